//! Artwork, chronology and media types plus their structural validation.
//!
//! An [`Artwork`] carries an ordered, non-empty list of [`Phase`]s. A phase may
//! be named ("Conception"), dated (1977) or both, and may hold one level of
//! [`SubPhase`]s. Validation never fails: every violated rule becomes an
//! [`Issue`] in a [`ValidationReport`], listed in document order.

use std::fmt;

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowercase hex SHA-256 of a media blob.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MediaId(pub String);

impl MediaId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// 64 lowercase hex characters.
    pub fn is_well_formed(&self) -> bool {
        self.0.len() == 64
            && self
                .0
                .bytes()
                .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
    }
}

impl fmt::Display for MediaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for MediaId {
    fn from(s: &str) -> Self {
        MediaId(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaKind {
    Image,
    Video,
    Audio,
    Document,
}

impl MediaKind {
    /// Audio and video never start on their own; the visitor has to ask.
    pub fn playback_policy(self) -> PlaybackPolicy {
        match self {
            MediaKind::Audio | MediaKind::Video => PlaybackPolicy::UserInitiated,
            MediaKind::Image | MediaKind::Document => PlaybackPolicy::Static,
        }
    }

    /// image ⇒ `image/*`, video ⇒ `video/*`, audio ⇒ `audio/*`, document ⇒ anything else.
    pub fn accepts_content_type(self, content_type: &str) -> bool {
        let top = content_type
            .split('/')
            .next()
            .unwrap_or("")
            .trim()
            .to_ascii_lowercase();
        match self {
            MediaKind::Image => top == "image",
            MediaKind::Video => top == "video",
            MediaKind::Audio => top == "audio",
            MediaKind::Document => !matches!(top.as_str(), "image" | "video" | "audio"),
        }
    }

    pub fn from_content_type(content_type: &str) -> MediaKind {
        [MediaKind::Image, MediaKind::Video, MediaKind::Audio]
            .into_iter()
            .find(|k| k.accepts_content_type(content_type))
            .unwrap_or(MediaKind::Document)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MediaKind::Image => "image",
            MediaKind::Video => "video",
            MediaKind::Audio => "audio",
            MediaKind::Document => "document",
        }
    }
}

impl fmt::Display for MediaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MediaKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "image" => Ok(MediaKind::Image),
            "video" => Ok(MediaKind::Video),
            "audio" => Ok(MediaKind::Audio),
            "document" => Ok(MediaKind::Document),
            other => Err(format!("unknown media kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaybackPolicy {
    Static,
    UserInitiated,
}

impl PlaybackPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            PlaybackPolicy::Static => "static",
            PlaybackPolicy::UserInitiated => "user_initiated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaAsset {
    pub id: MediaId,
    pub kind: MediaKind,
    pub filename: String,
    pub content_type: String,
    pub byte_size: u64,
    pub checksum: String,
    pub caption: Option<String>,
    pub credit: Option<String>,
    pub playback_policy: PlaybackPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artwork {
    /// Empty until the store assigns a slug.
    #[serde(default)]
    pub id: String,
    pub title: String,
    pub artist_name: String,
    #[serde(default)]
    pub creation_year: Option<i32>,
    pub cover_media: MediaId,
    pub phases: Vec<Phase>,
    #[serde(default = "epoch", with = "timestamp")]
    pub created_at: DateTime<Utc>,
    #[serde(default = "epoch", with = "timestamp")]
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub ordinal: u32,
    pub label: String,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub media: Vec<MediaId>,
    #[serde(default)]
    pub subphases: Vec<SubPhase>,
}

impl Phase {
    pub fn placeholder(ordinal: u32) -> Self {
        Phase {
            ordinal,
            label: format!("Phase {}", ordinal + 1),
            year: None,
            description: String::new(),
            media: Vec::new(),
            subphases: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubPhase {
    pub ordinal: u32,
    pub label: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub media: Vec<MediaId>,
    /// Only present so that over-nested input can be reported instead of
    /// silently dropped; a valid sub-phase always has none.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subphases: Vec<SubPhase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AboutContent {
    pub title: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub media: Vec<MediaId>,
}

impl Artwork {
    /// Every media id the work references, in document order.
    pub fn media_refs(&self) -> Vec<(String, &MediaId)> {
        let mut out = vec![("cover_media".to_owned(), &self.cover_media)];
        for (i, phase) in self.phases.iter().enumerate() {
            for (k, m) in phase.media.iter().enumerate() {
                out.push((format!("phases[{i}].media[{k}]"), m));
            }
            for (j, sub) in phase.subphases.iter().enumerate() {
                for (k, m) in sub.media.iter().enumerate() {
                    out.push((format!("phases[{i}].subphases[{j}].media[{k}]"), m));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub code: String,
    pub path: String,
    pub message: String,
}

impl Issue {
    fn new(code: &str, path: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            code: code.to_owned(),
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn from_issues(issues: Vec<Issue>) -> Self {
        ValidationReport {
            valid: issues.is_empty(),
            issues,
        }
    }

    pub fn has(&self, code: &str) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }
}

const MAX_YEAR: i32 = 9999;

fn check_year(year: Option<i32>, path: String, issues: &mut Vec<Issue>) {
    if let Some(y) = year {
        if y <= 0 || y > MAX_YEAR {
            issues.push(Issue::new(
                "year_out_of_range",
                path,
                format!("year {y} is outside 1..={MAX_YEAR}"),
            ));
        }
    }
}

fn check_media_ids(ids: &[MediaId], prefix: &str, issues: &mut Vec<Issue>) {
    for (k, m) in ids.iter().enumerate() {
        if !m.is_well_formed() {
            issues.push(Issue::new(
                "invalid_media_ref",
                format!("{prefix}.media[{k}]"),
                format!("{:?} is not a media digest", m.0),
            ));
        }
    }
}

fn check_label(label: &str, path: String, issues: &mut Vec<Issue>) {
    if label.trim().is_empty() {
        issues.push(Issue::new("empty_label", path, "label must not be empty"));
    }
}

fn check_ordinal(actual: u32, expected: usize, path: String, issues: &mut Vec<Issue>) {
    if actual as usize != expected {
        issues.push(Issue::new(
            "ordinal_mismatch",
            path,
            format!("expected ordinal {expected}, found {actual}"),
        ));
    }
}

/// Structural validation of a candidate work. Media references are checked for
/// shape only; whether they resolve is [`validate_references`]'s job.
pub fn validate_artwork(work: &Artwork) -> ValidationReport {
    let mut issues = Vec::new();

    if !work.id.is_empty() && !is_valid_slug(&work.id) {
        issues.push(Issue::new(
            "invalid_slug",
            "id",
            format!("{:?} is not a lowercase hyphenated slug", work.id),
        ));
    }
    if work.title.trim().is_empty() {
        issues.push(Issue::new("empty_title", "title", "title must not be empty"));
    }
    if work.artist_name.trim().is_empty() {
        issues.push(Issue::new(
            "empty_artist",
            "artist_name",
            "artist name must not be empty",
        ));
    }
    check_year(work.creation_year, "creation_year".into(), &mut issues);
    if !work.cover_media.is_well_formed() {
        issues.push(Issue::new(
            "invalid_media_ref",
            "cover_media",
            format!("{:?} is not a media digest", work.cover_media.0),
        ));
    }

    if work.phases.is_empty() {
        issues.push(Issue::new(
            "empty_chronology",
            "phases",
            "a work needs at least one phase",
        ));
    }

    // Last dated phase seen so far, for the monotone-year check.
    let mut last_dated: Option<(usize, i32)> = None;
    for (i, phase) in work.phases.iter().enumerate() {
        let at = format!("phases[{i}]");
        check_ordinal(phase.ordinal, i, format!("{at}.ordinal"), &mut issues);
        check_label(&phase.label, format!("{at}.label"), &mut issues);
        check_year(phase.year, format!("{at}.year"), &mut issues);
        if let Some(y) = phase.year {
            if let Some((prev_i, prev_y)) = last_dated {
                if y < prev_y {
                    issues.push(Issue::new(
                        "years_not_monotone",
                        format!("{at}.year"),
                        format!("year {y} precedes {prev_y} of phases[{prev_i}]"),
                    ));
                }
            }
            last_dated = Some((i, y));
        }
        check_media_ids(&phase.media, &at, &mut issues);
        for (j, sub) in phase.subphases.iter().enumerate() {
            let sub_at = format!("{at}.subphases[{j}]");
            check_ordinal(sub.ordinal, j, format!("{sub_at}.ordinal"), &mut issues);
            check_label(&sub.label, format!("{sub_at}.label"), &mut issues);
            check_media_ids(&sub.media, &sub_at, &mut issues);
            if !sub.subphases.is_empty() {
                issues.push(Issue::new(
                    "nesting_too_deep",
                    format!("{sub_at}.subphases"),
                    "sub-phases cannot contain further sub-phases",
                ));
            }
        }
    }

    ValidationReport::from_issues(issues)
}

/// Checks that every media reference resolves and that the cover is an image.
/// `resolve` returns the stored kind of an asset, or `None` when unknown.
pub fn validate_references(
    work: &Artwork,
    resolve: impl Fn(&MediaId) -> Option<MediaKind>,
) -> ValidationReport {
    let mut issues = Vec::new();
    for (path, id) in work.media_refs() {
        match resolve(id) {
            None => issues.push(Issue::new(
                "dangling_media_ref",
                path,
                format!("media {id} is not stored"),
            )),
            Some(kind) if path == "cover_media" && kind != MediaKind::Image => {
                issues.push(Issue::new(
                    "cover_not_image",
                    path,
                    format!("cover must be an image, {id} is {kind}"),
                ))
            }
            Some(_) => {}
        }
    }
    ValidationReport::from_issues(issues)
}

pub fn validate_about(about: &AboutContent) -> ValidationReport {
    let mut issues = Vec::new();
    if about.title.trim().is_empty() {
        issues.push(Issue::new("empty_title", "title", "title must not be empty"));
    }
    check_media_ids(&about.media, "about", &mut issues);
    // Paths are rooted at the record itself.
    for issue in &mut issues {
        if let Some(rest) = issue.path.strip_prefix("about.") {
            issue.path = rest.to_owned();
        }
    }
    ValidationReport::from_issues(issues)
}

/// `[a-z0-9]+(-[a-z0-9]+)*`
pub fn is_valid_slug(s: &str) -> bool {
    !s.is_empty()
        && s.split('-')
            .all(|part| !part.is_empty() && part.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()))
}

/// Letters without a canonical decomposition that still have an obvious ASCII base.
fn fold_special(c: char) -> Option<&'static str> {
    Some(match c {
        'ß' => "ss",
        'æ' => "ae",
        'œ' => "oe",
        'ø' => "o",
        'ł' => "l",
        'đ' | 'ð' => "d",
        'þ' => "th",
        'ı' => "i",
        'ħ' => "h",
        _ => return None,
    })
}

/// Derives a URL slug from a title: lowercase ASCII, accents stripped, every
/// run of anything else collapsed into one hyphen.
pub fn make_slug(title: &str) -> Result<String> {
    use unicode_normalization::char::is_combining_mark;
    use unicode_normalization::UnicodeNormalization;

    let mut slug = String::with_capacity(title.len());
    let mut pending_hyphen = false;
    let lowered = title.to_lowercase();
    for c in lowered.nfd() {
        if is_combining_mark(c) {
            continue;
        }
        let mapped: Option<std::borrow::Cow<'static, str>> = if c.is_ascii_alphanumeric() {
            Some(c.to_ascii_lowercase().to_string().into())
        } else {
            fold_special(c).map(Into::into)
        };
        match mapped {
            Some(s) => {
                if pending_hyphen && !slug.is_empty() {
                    slug.push('-');
                }
                pending_hyphen = false;
                slug.push_str(&s);
            }
            None => pending_hyphen = true,
        }
    }
    if slug.is_empty() {
        return Err(Error::Unsluggable(title.to_owned()));
    }
    Ok(slug)
}

/// Changes the number of phases. Growing appends placeholders; shrinking drops
/// the highest ordinals and is refused unless `allow_truncation` is set.
pub fn resize_phases(work: &Artwork, new_count: i64, allow_truncation: bool) -> Result<Artwork> {
    if new_count < 1 {
        return Err(Error::InvalidCount(new_count));
    }
    let target = usize::try_from(new_count).map_err(|_| Error::InvalidCount(new_count))?;
    let current = work.phases.len();
    if target < current && !allow_truncation {
        return Err(Error::TruncationRefused {
            current,
            requested: new_count,
        });
    }
    let mut out = work.clone();
    out.phases.truncate(target);
    for ordinal in current..target {
        let ordinal = u32::try_from(ordinal).map_err(|_| Error::InvalidCount(new_count))?;
        out.phases.push(Phase::placeholder(ordinal));
    }
    let report = validate_artwork(&out);
    if report.has("ordinal_mismatch") {
        return Err(Error::InvalidWork(report));
    }
    Ok(out)
}

fn epoch() -> DateTime<Utc> {
    Utc.timestamp_opt(0, 0).unwrap()
}

/// Truncates to whole seconds, the precision kept on disk.
pub fn to_seconds(t: DateTime<Utc>) -> DateTime<Utc> {
    Utc.timestamp_opt(t.timestamp(), 0).unwrap()
}

/// RFC 3339 UTC with whole seconds, e.g. `2021-03-21T00:00:00Z`.
pub mod timestamp {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&raw)
            .map(|t| super::to_seconds(t.with_timezone(&Utc)))
            .map_err(serde::de::Error::custom)
    }
}

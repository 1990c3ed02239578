//! Plain-directory repository.
//!
//! ```text
//! <root>/acoa.repo                     marker, "acoa-repo 1"
//! <root>/works/<slug>.manifest         one canonical manifest per work
//! <root>/media/<d0d1>/<digest>         raw blob
//! <root>/media/<d0d1>/<digest>.meta    asset metadata
//! <root>/about.manifest
//! <root>/auth/users.manifest
//! ```
//!
//! Every file is replaced atomically. Mutations are serialized through a
//! single writer lock; readers share the lock and so only ever observe fully
//! committed states. Blobs are never deleted: they are content addressed and
//! may be shared between works.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{RwLock, RwLockReadGuard, RwLockWriteGuard};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use crate::canonical;
use crate::clock::{Clock, SystemClock};
use crate::error::{Error, Result};
use crate::fsutil::{digest_hex, write_atomic_with};
use crate::model::{
    is_valid_slug, make_slug, resize_phases, validate_about, validate_artwork,
    validate_references, AboutContent, Artwork, Issue, MediaAsset, MediaId, MediaKind,
};

pub const MARKER_FILE: &str = "acoa.repo";
pub const MARKER_CONTENT: &str = "acoa-repo 1\n";
pub const WORKS_DIR: &str = "works";
pub const MEDIA_DIR: &str = "media";
pub const AUTH_DIR: &str = "auth";
pub const ABOUT_FILE: &str = "about.manifest";
pub const USERS_FILE: &str = "auth/users.manifest";
pub const MANIFEST_EXT: &str = "manifest";
pub const META_EXT: &str = "meta";

/// One row of the public works list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkSummary {
    pub slug: String,
    pub title: String,
    pub artist_name: String,
    pub creation_year: Option<i32>,
    pub cover_media: MediaId,
    pub phase_count: usize,
}

impl WorkSummary {
    pub fn of(work: &Artwork) -> Self {
        WorkSummary {
            slug: work.id.clone(),
            title: work.title.clone(),
            artist_name: work.artist_name.clone(),
            creation_year: work.creation_year,
            cover_media: work.cover_media.clone(),
            phase_count: work.phases.len(),
        }
    }
}

/// Input to [`Repository::put_media`].
#[derive(Debug, Clone)]
pub struct NewMedia<'a> {
    pub bytes: &'a [u8],
    pub filename: &'a str,
    pub content_type: &'a str,
    pub kind: MediaKind,
    pub caption: Option<String>,
    pub credit: Option<String>,
}

#[derive(Debug, Default)]
pub(crate) struct Index {
    pub(crate) works: BTreeMap<String, WorkSummary>,
    pub(crate) media: HashMap<MediaId, MediaAsset>,
}

type CommitHook = Box<dyn Fn(&Path) -> io::Result<()> + Send + Sync>;

pub struct Repository {
    root: PathBuf,
    clock: Arc<dyn Clock>,
    index: RwLock<Index>,
    commit_hook: RwLock<Option<CommitHook>>,
}

impl std::fmt::Debug for Repository {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Repository").field("root", &self.root).finish_non_exhaustive()
    }
}

pub(crate) fn blob_rel_path(id: &MediaId) -> String {
    format!("{MEDIA_DIR}/{}/{}", &id.0[..2], id.0)
}

pub(crate) fn meta_rel_path(id: &MediaId) -> String {
    format!("{}.{META_EXT}", blob_rel_path(id))
}

pub(crate) fn work_rel_path(slug: &str) -> String {
    format!("{WORKS_DIR}/{slug}.{MANIFEST_EXT}")
}

impl Repository {
    /// Creates a repository in an empty or absent directory.
    pub fn init(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref();
        match fs::read_dir(root) {
            Ok(mut entries) => {
                if entries.next().is_some() {
                    return Err(Error::AlreadyInitialized(root.display().to_string()));
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::io(root, e)),
        }
        for dir in [WORKS_DIR, MEDIA_DIR, AUTH_DIR] {
            let p = root.join(dir);
            fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        let marker = root.join(MARKER_FILE);
        crate::fsutil::write_atomic(&marker, MARKER_CONTENT.as_bytes())
            .map_err(|e| Error::io(&marker, e))?;
        debug!(root = %root.display(), "initialized repository");
        Self::open(root)
    }

    /// Opens an initialized repository and rebuilds its indices from disk.
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        let marker = root.join(MARKER_FILE);
        let content = match fs::read_to_string(&marker) {
            Ok(c) => c,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(Error::NotARepository(root.display().to_string()))
            }
            Err(e) => return Err(Error::io(&marker, e)),
        };
        if content.trim_end() != MARKER_CONTENT.trim_end() {
            return Err(Error::VersionUnsupported(content.trim_end().to_owned()));
        }
        let repo = Repository {
            root,
            clock: Arc::new(SystemClock),
            index: RwLock::new(Index::default()),
            commit_hook: RwLock::new(None),
        };
        let index = repo.scan()?;
        *repo.index.write() = index;
        Ok(repo)
    }

    /// Replaces the clock used for `created_at` / `updated_at`.
    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn clock(&self) -> Arc<dyn Clock> {
        Arc::clone(&self.clock)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Installs a hook that runs on every temp file right before it is renamed
    /// into place. An error from the hook aborts that write. Used to simulate
    /// crashes mid-commit.
    pub fn set_commit_hook(&self, hook: Option<CommitHook>) {
        *self.commit_hook.write() = hook;
    }

    fn scan(&self) -> Result<Index> {
        let mut index = Index::default();

        let works = self.root.join(WORKS_DIR);
        for entry in read_dir_sorted(&works)? {
            let Some(slug) = entry
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_suffix(&format!(".{MANIFEST_EXT}")))
                .map(str::to_owned)
            else {
                continue;
            };
            if !is_valid_slug(&slug) {
                continue;
            }
            let bytes = fs::read(&entry).map_err(|e| Error::io(&entry, e))?;
            let work: Artwork = canonical::decode(&bytes)
                .map_err(|e| Error::Malformed(format!("{}: {e}", entry.display())))?;
            if work.id != slug {
                warn!(file = %entry.display(), id = %work.id, "manifest id does not match file name");
            }
            let mut summary = WorkSummary::of(&work);
            summary.slug = slug.clone();
            index.works.insert(slug, summary);
        }

        let media = self.root.join(MEDIA_DIR);
        for shard in read_dir_sorted(&media)? {
            if !shard.is_dir() {
                continue;
            }
            for entry in read_dir_sorted(&shard)? {
                if entry.extension().and_then(|e| e.to_str()) != Some(META_EXT) {
                    continue;
                }
                let bytes = fs::read(&entry).map_err(|e| Error::io(&entry, e))?;
                let asset: MediaAsset = canonical::decode(&bytes)
                    .map_err(|e| Error::Malformed(format!("{}: {e}", entry.display())))?;
                index.media.insert(asset.id.clone(), asset);
            }
        }
        Ok(index)
    }

    pub(crate) fn read_index(&self) -> RwLockReadGuard<'_, Index> {
        self.index.read()
    }

    pub(crate) fn write_index(&self) -> RwLockWriteGuard<'_, Index> {
        self.index.write()
    }

    pub(crate) fn abs(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Atomic write of a repository-relative path. Callers hold the writer lock.
    pub(crate) fn commit(&self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.abs(rel);
        let hook = self.commit_hook.read();
        write_atomic_with(&path, bytes, |tmp| match hook.as_ref() {
            Some(h) => h(tmp),
            None => Ok(()),
        })
        .map_err(|e| Error::io(&path, e))
    }

    pub(crate) fn read_rel(&self, rel: &str) -> Result<Option<Vec<u8>>> {
        let path = self.abs(rel);
        match fs::read(&path) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(&path, e)),
        }
    }

    pub(crate) fn read_doc<T: DeserializeOwned>(&self, rel: &str) -> Result<Option<T>> {
        let _guard = self.index.read();
        self.read_rel(rel)?.map(|b| canonical::decode(&b)).transpose()
    }

    /// Read-modify-write of a single document under the writer lock.
    pub(crate) fn modify_doc<T, R>(
        &self,
        rel: &str,
        f: impl FnOnce(Option<T>) -> Result<(T, R)>,
    ) -> Result<R>
    where
        T: DeserializeOwned + Serialize,
    {
        let _guard = self.index.write();
        let current = self.read_rel(rel)?.map(|b| canonical::decode(&b)).transpose()?;
        let (next, out) = f(current)?;
        self.commit(rel, &canonical::encode(&next)?)?;
        Ok(out)
    }

    fn resolver<'a>(index: &'a Index) -> impl Fn(&MediaId) -> Option<MediaKind> + 'a {
        move |id| index.media.get(id).map(|a| a.kind)
    }

    fn check_work(index: &Index, work: &Artwork) -> Result<()> {
        let report = validate_artwork(work);
        if !report.valid {
            return Err(Error::InvalidWork(report));
        }
        let refs = validate_references(work, Self::resolver(index));
        if let Some(dangling) = refs.issues.iter().find(|i| i.code == "dangling_media_ref") {
            let id = work
                .media_refs()
                .into_iter()
                .find(|(p, _)| *p == dangling.path)
                .map(|(_, id)| id.0.clone())
                .unwrap_or_default();
            return Err(Error::DanglingMediaRef {
                path: dangling.path.clone(),
                id,
            });
        }
        if !refs.valid {
            return Err(Error::InvalidWork(refs));
        }
        Ok(())
    }

    fn store_work(&self, index: &mut Index, work: &Artwork) -> Result<()> {
        let bytes = canonical::encode(work)?;
        self.commit(&work_rel_path(&work.id), &bytes)?;
        index.works.insert(work.id.clone(), WorkSummary::of(work));
        Ok(())
    }

    fn free_slug(index: &Index, base: &str) -> String {
        if !index.works.contains_key(base) {
            return base.to_owned();
        }
        (2u64..)
            .map(|n| format!("{base}-{n}"))
            .find(|candidate| !index.works.contains_key(candidate))
            .expect("unbounded suffix search")
    }

    /// Stores a new work. The slug comes from `work.id` when set, otherwise
    /// from the title; collisions get `-2`, `-3`, … appended.
    pub fn create_work(&self, mut work: Artwork) -> Result<String> {
        let mut index = self.index.write();
        let base = if work.id.is_empty() {
            make_slug(&work.title)?
        } else {
            work.id.clone()
        };
        let probe = Artwork { id: base.clone(), ..work.clone() };
        Self::check_work(&index, &probe)?;
        work.id = Self::free_slug(&index, &base);
        let now = self.clock.now();
        work.created_at = now;
        work.updated_at = now;
        self.store_work(&mut index, &work)?;
        debug!(slug = %work.id, "created work");
        Ok(work.id)
    }

    /// Replaces an existing work, keeping its slug and creation time.
    pub fn update_work(&self, slug: &str, mut work: Artwork) -> Result<Artwork> {
        let mut index = self.index.write();
        if !index.works.contains_key(slug) {
            return Err(Error::not_found(format!("work {slug}")));
        }
        let previous: Artwork = self.load_work(slug)?;
        work.id = slug.to_owned();
        Self::check_work(&index, &work)?;
        work.created_at = previous.created_at;
        work.updated_at = self.clock.now();
        self.store_work(&mut index, &work)?;
        debug!(slug, "updated work");
        Ok(work)
    }

    /// Updates the work named by `work.id` when it exists, creates it otherwise.
    pub fn put_work(&self, work: Artwork) -> Result<String> {
        let exists = !work.id.is_empty() && self.index.read().works.contains_key(&work.id);
        if exists {
            let slug = work.id.clone();
            self.update_work(&slug, work)?;
            Ok(slug)
        } else {
            self.create_work(work)
        }
    }

    fn load_work(&self, slug: &str) -> Result<Artwork> {
        let bytes = self
            .read_rel(&work_rel_path(slug))?
            .ok_or_else(|| Error::not_found(format!("work {slug}")))?;
        canonical::decode(&bytes)
    }

    pub fn get_work(&self, slug: &str) -> Result<Artwork> {
        let index = self.index.read();
        if !index.works.contains_key(slug) {
            return Err(Error::not_found(format!("work {slug}")));
        }
        self.load_work(slug)
    }

    /// The exact stored manifest bytes of a work.
    pub fn work_manifest(&self, slug: &str) -> Result<Vec<u8>> {
        let index = self.index.read();
        if !index.works.contains_key(slug) {
            return Err(Error::not_found(format!("work {slug}")));
        }
        self.read_rel(&work_rel_path(slug))?
            .ok_or_else(|| Error::not_found(format!("work {slug}")))
    }

    pub fn contains_work(&self, slug: &str) -> bool {
        self.index.read().works.contains_key(slug)
    }

    /// Sorted by title, then slug.
    pub fn list_works(&self) -> Vec<WorkSummary> {
        let mut out: Vec<_> = self.index.read().works.values().cloned().collect();
        out.sort_by(|a, b| a.title.cmp(&b.title).then_with(|| a.slug.cmp(&b.slug)));
        out
    }

    /// Removes a work's manifest. Its media blobs stay in place.
    pub fn delete_work(&self, slug: &str, confirm: bool) -> Result<()> {
        if !confirm {
            return Err(Error::ConfirmationRequired);
        }
        let mut index = self.index.write();
        if !index.works.contains_key(slug) {
            return Err(Error::not_found(format!("work {slug}")));
        }
        let path = self.abs(&work_rel_path(slug));
        fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
        index.works.remove(slug);
        debug!(slug, "deleted work");
        Ok(())
    }

    /// Grows or shrinks a stored work's chronology in one locked step.
    pub fn resize_work(&self, slug: &str, new_count: i64, allow_truncation: bool) -> Result<Artwork> {
        let mut index = self.index.write();
        if !index.works.contains_key(slug) {
            return Err(Error::not_found(format!("work {slug}")));
        }
        let current = self.load_work(slug)?;
        let mut resized = resize_phases(&current, new_count, allow_truncation)?;
        if resized.phases.len() != current.phases.len() {
            resized.updated_at = self.clock.now();
            self.store_work(&mut index, &resized)?;
        }
        Ok(resized)
    }

    /// Stores a blob and its metadata. Identical bytes map to the same id and
    /// the first upload's metadata is kept.
    pub fn put_media(&self, media: NewMedia<'_>) -> Result<MediaAsset> {
        if media.bytes.is_empty() {
            return Err(Error::EmptyBlob);
        }
        if !media.kind.accepts_content_type(media.content_type) {
            return Err(Error::KindMismatch {
                kind: media.kind.to_string(),
                content_type: media.content_type.to_owned(),
            });
        }
        let digest = digest_hex(media.bytes);
        let id = MediaId(digest.clone());
        let mut index = self.index.write();
        if let Some(existing) = index.media.get(&id) {
            return Ok(existing.clone());
        }
        let asset = MediaAsset {
            id: id.clone(),
            kind: media.kind,
            filename: media.filename.to_owned(),
            content_type: media.content_type.to_owned(),
            byte_size: media.bytes.len() as u64,
            checksum: digest,
            caption: media.caption.filter(|c| !c.trim().is_empty()),
            credit: media.credit.filter(|c| !c.trim().is_empty()),
            playback_policy: media.kind.playback_policy(),
        };
        self.commit(&blob_rel_path(&id), media.bytes)?;
        self.commit(&meta_rel_path(&id), &canonical::encode(&asset)?)?;
        index.media.insert(id, asset.clone());
        debug!(id = %asset.id, kind = %asset.kind, "stored media");
        Ok(asset)
    }

    pub fn media_asset(&self, id: &MediaId) -> Result<MediaAsset> {
        self.index
            .read()
            .media
            .get(id)
            .cloned()
            .ok_or_else(|| Error::not_found(format!("media {id}")))
    }

    pub fn get_media(&self, id: &MediaId) -> Result<(MediaAsset, Vec<u8>)> {
        let index = self.index.read();
        let asset = index
            .media
            .get(id)
            .cloned()
            .ok_or_else(|| Error::not_found(format!("media {id}")))?;
        let bytes = self
            .read_rel(&blob_rel_path(id))?
            .ok_or_else(|| Error::not_found(format!("media blob {id}")))?;
        Ok((asset, bytes))
    }

    /// All stored assets ordered by id.
    pub fn list_media(&self) -> Vec<MediaAsset> {
        let mut out: Vec<_> = self.index.read().media.values().cloned().collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    pub fn put_about(&self, about: AboutContent) -> Result<()> {
        let index = self.index.write();
        let report = validate_about(&about);
        if !report.valid {
            return Err(Error::InvalidAbout(report));
        }
        if let Some((k, id)) = about
            .media
            .iter()
            .enumerate()
            .find(|(_, id)| !index.media.contains_key(*id))
        {
            return Err(Error::DanglingMediaRef {
                path: format!("media[{k}]"),
                id: id.0.clone(),
            });
        }
        self.commit(ABOUT_FILE, &canonical::encode(&about)?)
    }

    pub fn get_about(&self) -> Result<AboutContent> {
        self.read_doc(ABOUT_FILE)?
            .ok_or_else(|| Error::not_found("about content"))
    }

    /// Integrity sweep: blob digests, manifest canonical form, work validity.
    /// Returns `(subject, issue)` pairs; empty means the repository is sound.
    pub fn verify(&self) -> Result<Vec<(String, Issue)>> {
        let index = self.index.read();
        let mut problems = Vec::new();
        let issue = |code: &str, path: &str, message: String| Issue {
            code: code.to_owned(),
            path: path.to_owned(),
            message,
        };

        let mut media: Vec<_> = index.media.values().collect();
        media.sort_by(|a, b| a.id.cmp(&b.id));
        for asset in media {
            let subject = format!("media/{}", asset.id);
            match self.read_rel(&blob_rel_path(&asset.id))? {
                None => problems.push((subject, issue("missing_blob", "", "blob file is missing".into()))),
                Some(bytes) => {
                    let actual = digest_hex(&bytes);
                    if actual != asset.id.0 || asset.checksum != asset.id.0 {
                        problems.push((
                            subject,
                            issue("checksum_mismatch", "checksum", format!("blob digest is {actual}")),
                        ));
                    }
                }
            }
        }

        for slug in index.works.keys() {
            let bytes = self.load_bytes_or_missing(slug)?;
            let work: Artwork = match canonical::decode_canonical(&bytes) {
                Ok(w) => w,
                Err(e) => {
                    problems.push((slug.clone(), issue("malformed_manifest", "", e.to_string())));
                    continue;
                }
            };
            if work.id != *slug {
                problems.push((
                    slug.clone(),
                    issue("slug_mismatch", "id", format!("manifest id is {:?}", work.id)),
                ));
            }
            let structural = validate_artwork(&work);
            let refs = validate_references(&work, Self::resolver(&index));
            for i in structural.issues.into_iter().chain(refs.issues) {
                problems.push((slug.clone(), i));
            }
        }

        if let Some(bytes) = self.read_rel(ABOUT_FILE)? {
            match canonical::decode_canonical::<AboutContent>(&bytes) {
                Ok(about) => {
                    for i in validate_about(&about).issues {
                        problems.push(("about".into(), i));
                    }
                    for (k, id) in about.media.iter().enumerate() {
                        if !index.media.contains_key(id) {
                            problems.push((
                                "about".into(),
                                issue("dangling_media_ref", &format!("media[{k}]"), format!("media {id} is not stored")),
                            ));
                        }
                    }
                }
                Err(e) => problems.push(("about".into(), issue("malformed_manifest", "", e.to_string()))),
            }
        }
        Ok(problems)
    }

    fn load_bytes_or_missing(&self, slug: &str) -> Result<Vec<u8>> {
        self.read_rel(&work_rel_path(slug))?
            .ok_or_else(|| Error::not_found(format!("work {slug}")))
    }
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(dir, e)),
    };
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        out.push(entry.path());
    }
    out.sort();
    Ok(out)
}

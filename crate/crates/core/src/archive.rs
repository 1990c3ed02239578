//! Single-file export/import bundles.
//!
//! Layout, all integers big-endian:
//!
//! ```text
//! "ACOA1"
//! u64                 record count
//! record*:  u32 path length, path (UTF-8), u64 data length, data
//! [u8; 32]            SHA-256 of every preceding byte
//! ```
//!
//! The first record is always `manifest-version`. Paths mirror the repository
//! layout, so an import into an empty repository reproduces manifests byte for
//! byte. Admin credentials are never exported.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tracing::{debug, info};

use crate::canonical;
use crate::error::{Error, Result};
use crate::fsutil::{digest_hex, write_atomic};
use crate::model::{validate_about, validate_artwork, AboutContent, Artwork, MediaAsset, MediaId};
use crate::store::{blob_rel_path, meta_rel_path, work_rel_path, Repository, WorkSummary, ABOUT_FILE};

pub const MAGIC: &[u8; 5] = b"ACOA1";
pub const VERSION_PATH: &str = "manifest-version";
pub const VERSION_CONTENT: &str = "acoa-archive 1\n";
const DIGEST_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AboutOutcome {
    Imported,
    Skipped,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportReport {
    pub imported: Vec<String>,
    pub skipped: Vec<String>,
    pub media_added: usize,
    pub about: AboutOutcome,
}

/// Serializes `(path, bytes)` records into a complete archive.
pub fn encode_records(records: &[(String, Vec<u8>)]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(records.len() as u64).to_be_bytes());
    for (path, data) in records {
        out.extend_from_slice(&(path.len() as u32).to_be_bytes());
        out.extend_from_slice(path.as_bytes());
        out.extend_from_slice(&(data.len() as u64).to_be_bytes());
        out.extend_from_slice(data);
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::CorruptArchive("record runs past end of archive".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses and integrity-checks an archive into its records.
pub fn decode_records(bytes: &[u8]) -> Result<Vec<(String, Vec<u8>)>> {
    if bytes.len() < MAGIC.len() + 8 + DIGEST_LEN || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::CorruptArchive("missing ACOA1 header".into()));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != trailer {
        return Err(Error::CorruptArchive("archive digest mismatch".into()));
    }
    let mut cur = Cursor { buf: body, pos: MAGIC.len() };
    let count = cur.u64()?;
    let mut records = Vec::new();
    for _ in 0..count {
        let path_len = cur.u32()? as usize;
        let path = std::str::from_utf8(cur.take(path_len)?)
            .map_err(|_| Error::CorruptArchive("record path is not UTF-8".into()))?
            .to_owned();
        let data_len = usize::try_from(cur.u64()?)
            .map_err(|_| Error::CorruptArchive("record length overflows".into()))?;
        let data = cur.take(data_len)?.to_vec();
        records.push((path, data));
    }
    if cur.pos != body.len() {
        return Err(Error::CorruptArchive("trailing bytes after last record".into()));
    }
    Ok(records)
}

enum Entry {
    Work(String),
    Blob(MediaId),
    Meta(MediaId),
    About,
}

fn classify_path(path: &str) -> Option<Entry> {
    if path == ABOUT_FILE {
        return Some(Entry::About);
    }
    if let Some(name) = path.strip_prefix("works/") {
        let slug = name.strip_suffix(".manifest")?;
        return crate::model::is_valid_slug(slug).then(|| Entry::Work(slug.to_owned()));
    }
    let rest = path.strip_prefix("media/")?;
    let (shard, file) = rest.split_once('/')?;
    let (name, is_meta) = match file.strip_suffix(".meta") {
        Some(n) => (n, true),
        None => (file, false),
    };
    let id = MediaId(name.to_owned());
    if !id.is_well_formed() || shard != &name[..2] {
        return None;
    }
    Some(if is_meta { Entry::Meta(id) } else { Entry::Blob(id) })
}

/// Fully checked archive content, ready to be written.
struct Bundle {
    works: BTreeMap<String, (Artwork, Vec<u8>)>,
    media: BTreeMap<MediaId, (MediaAsset, Vec<u8>, Vec<u8>)>,
    about: Option<Vec<u8>>,
}

fn parse_bundle(bytes: &[u8]) -> Result<Bundle> {
    let records = decode_records(bytes)?;
    let mut iter = records.into_iter();
    match iter.next() {
        Some((path, data)) if path == VERSION_PATH => {
            if data != VERSION_CONTENT.as_bytes() {
                return Err(Error::VersionUnsupported(
                    String::from_utf8_lossy(&data).trim_end().to_owned(),
                ));
            }
        }
        _ => return Err(Error::CorruptArchive("first record must be manifest-version".into())),
    }

    let corrupt = |msg: String| Error::CorruptArchive(msg);
    let mut seen = BTreeSet::new();
    let mut works = BTreeMap::new();
    let mut blobs = BTreeMap::new();
    let mut metas: BTreeMap<MediaId, (MediaAsset, Vec<u8>)> = BTreeMap::new();
    let mut about = None;

    for (path, data) in iter {
        if !seen.insert(path.clone()) {
            return Err(corrupt(format!("duplicate record {path}")));
        }
        match classify_path(&path).ok_or_else(|| corrupt(format!("unexpected path {path:?}")))? {
            Entry::Work(slug) => {
                let work: Artwork = canonical::decode_canonical(&data)
                    .map_err(|e| corrupt(format!("{path}: {e}")))?;
                if work.id != slug || !validate_artwork(&work).valid {
                    return Err(corrupt(format!("{path}: invalid work manifest")));
                }
                works.insert(slug, (work, data));
            }
            Entry::Blob(id) => {
                if digest_hex(&data) != id.0 {
                    return Err(corrupt(format!("{path}: blob digest mismatch")));
                }
                blobs.insert(id, data);
            }
            Entry::Meta(id) => {
                let asset: MediaAsset = canonical::decode_canonical(&data)
                    .map_err(|e| corrupt(format!("{path}: {e}")))?;
                if asset.id != id
                    || asset.checksum != id.0
                    || asset.playback_policy != asset.kind.playback_policy()
                {
                    return Err(corrupt(format!("{path}: inconsistent metadata")));
                }
                metas.insert(id, (asset, data));
            }
            Entry::About => {
                let value: AboutContent = canonical::decode_canonical(&data)
                    .map_err(|e| corrupt(format!("{path}: {e}")))?;
                if !validate_about(&value).valid {
                    return Err(corrupt("about.manifest: invalid about content".into()));
                }
                about = Some((value, data));
            }
        }
    }

    let mut media = BTreeMap::new();
    for (id, (asset, meta_bytes)) in metas {
        let blob = blobs
            .remove(&id)
            .ok_or_else(|| corrupt(format!("metadata for {id} has no blob")))?;
        if asset.byte_size != blob.len() as u64 {
            return Err(corrupt(format!("{id}: byte size mismatch")));
        }
        media.insert(id, (asset, meta_bytes, blob));
    }
    if let Some(id) = blobs.keys().next() {
        return Err(corrupt(format!("blob {id} has no metadata")));
    }
    let resolves = |id: &MediaId| media.contains_key(id);
    for (slug, (work, _)) in &works {
        if let Some((p, id)) = work.media_refs().into_iter().find(|(_, id)| !resolves(id)) {
            return Err(corrupt(format!("work {slug} references missing media {id} at {p}")));
        }
    }
    if let Some((value, _)) = &about {
        if let Some(id) = value.media.iter().find(|id| !resolves(id)) {
            return Err(corrupt(format!("about references missing media {id}")));
        }
    }
    Ok(Bundle {
        works,
        media,
        about: about.map(|(_, b)| b),
    })
}

impl Repository {
    /// Builds the archive bytes for every work, the About record and all
    /// media they reference.
    pub fn export_bytes(&self) -> Result<Vec<u8>> {
        let index = self.read_index();
        let mut records = vec![(VERSION_PATH.to_owned(), VERSION_CONTENT.as_bytes().to_vec())];
        let mut referenced = BTreeSet::new();

        if let Some(bytes) = self.read_rel(ABOUT_FILE)? {
            let about: AboutContent = canonical::decode(&bytes)?;
            referenced.extend(about.media);
            records.push((ABOUT_FILE.to_owned(), bytes));
        }
        for slug in index.works.keys() {
            let rel = work_rel_path(slug);
            let bytes = self
                .read_rel(&rel)?
                .ok_or_else(|| Error::not_found(format!("work {slug}")))?;
            let work: Artwork = canonical::decode(&bytes)?;
            referenced.extend(work.media_refs().into_iter().map(|(_, id)| id.clone()));
            records.push((rel, bytes));
        }
        for id in &referenced {
            for rel in [blob_rel_path(id), meta_rel_path(id)] {
                let bytes = self
                    .read_rel(&rel)?
                    .ok_or_else(|| Error::not_found(format!("media file {rel}")))?;
                records.push((rel, bytes));
            }
        }
        debug!(records = records.len(), "built archive");
        Ok(encode_records(&records))
    }

    pub fn export_archive(&self, out: impl AsRef<Path>) -> Result<()> {
        let out = out.as_ref();
        let bytes = self.export_bytes()?;
        write_atomic(out, &bytes).map_err(|e| Error::io(out, e))
    }

    /// Imports an archive. The whole archive is validated before anything is
    /// written. Works whose slug already exists are skipped unless
    /// `overwrite` is set; the same holds for the About record.
    pub fn import_bytes(&self, bytes: &[u8], overwrite: bool) -> Result<ImportReport> {
        let bundle = parse_bundle(bytes)?;
        let mut index = self.write_index();

        let mut media_added = 0;
        for (id, (asset, meta_bytes, blob)) in &bundle.media {
            if index.media.contains_key(id) {
                continue;
            }
            self.commit(&blob_rel_path(id), blob)?;
            self.commit(&meta_rel_path(id), meta_bytes)?;
            index.media.insert(id.clone(), asset.clone());
            media_added += 1;
        }

        let mut imported = Vec::new();
        let mut skipped = Vec::new();
        for (slug, (work, manifest)) in &bundle.works {
            if index.works.contains_key(slug) && !overwrite {
                skipped.push(slug.clone());
                continue;
            }
            self.commit(&work_rel_path(slug), manifest)?;
            index.works.insert(slug.clone(), WorkSummary::of(work));
            imported.push(slug.clone());
        }

        let about = match &bundle.about {
            None => AboutOutcome::Absent,
            Some(_) if !overwrite && self.read_rel(ABOUT_FILE)?.is_some() => AboutOutcome::Skipped,
            Some(b) => {
                self.commit(ABOUT_FILE, b)?;
                AboutOutcome::Imported
            }
        };
        info!(imported = imported.len(), skipped = skipped.len(), media_added, "imported archive");
        Ok(ImportReport {
            imported,
            skipped,
            media_added,
            about,
        })
    }

    pub fn import_archive(&self, path: impl AsRef<Path>, overwrite: bool) -> Result<ImportReport> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.import_bytes(&bytes, overwrite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_codec_round_trip() {
        let records = vec![
            (VERSION_PATH.to_owned(), VERSION_CONTENT.as_bytes().to_vec()),
            ("works/a.manifest".to_owned(), b"{}\n".to_vec()),
            ("empty".to_owned(), vec![]),
        ];
        let bytes = encode_records(&records);
        assert_eq!(&bytes[..5], b"ACOA1");
        assert_eq!(decode_records(&bytes).unwrap(), records);
    }

    #[test]
    fn every_truncation_is_detected() {
        let records = vec![(VERSION_PATH.to_owned(), VERSION_CONTENT.as_bytes().to_vec())];
        let bytes = encode_records(&records);
        for cut in 0..bytes.len() {
            assert!(decode_records(&bytes[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn digest_covers_payload() {
        let records = vec![("x".to_owned(), b"payload".to_vec())];
        let mut bytes = encode_records(&records);
        let n = bytes.len();
        bytes[n - DIGEST_LEN - 1] ^= 1;
        assert!(matches!(decode_records(&bytes), Err(Error::CorruptArchive(_))));
    }

    #[test]
    fn foreign_version_is_unsupported() {
        let bytes = encode_records(&[(VERSION_PATH.to_owned(), b"acoa-archive 2\n".to_vec())]);
        assert!(matches!(parse_bundle(&bytes), Err(Error::VersionUnsupported(_))));
    }

    #[test]
    fn unexpected_paths_are_rejected() {
        for path in ["../etc/passwd", "works/../x.manifest", "auth/users.manifest", "media/zz/zz"] {
            let bytes = encode_records(&[
                (VERSION_PATH.to_owned(), VERSION_CONTENT.as_bytes().to_vec()),
                (path.to_owned(), b"x".to_vec()),
            ]);
            assert!(matches!(parse_bundle(&bytes), Err(Error::CorruptArchive(_))), "{path}");
        }
    }

    #[test]
    fn blob_with_wrong_digest_is_rejected() {
        let id = digest_hex(b"real");
        let bytes = encode_records(&[
            (VERSION_PATH.to_owned(), VERSION_CONTENT.as_bytes().to_vec()),
            (format!("media/{}/{}", &id[..2], id), b"fake".to_vec()),
        ]);
        assert!(matches!(parse_bundle(&bytes), Err(Error::CorruptArchive(_))));
    }
}

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use acoa_core::fixtures::fixture_slugs;
use acoa_core::model::MediaKind;
use acoa_core::{
    seed_fixtures, AboutContent, AboutOutcome, Artwork, Auth, HashCost, MediaId, NewMedia, Repository,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn fresh() -> (TempDir, Repository) {
    let dir = TempDir::new().unwrap();
    let repo = Repository::init(dir.path().join("repo")).unwrap();
    (dir, repo)
}

/// Every file under `root`, relative path to bytes.
fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn image(repo: &Repository, seed: &str) -> MediaId {
    let bytes = acoa_core::placeholder::render_png(seed);
    repo.put_media(NewMedia {
        bytes: &bytes,
        filename: "p.png",
        content_type: "image/png",
        kind: MediaKind::Image,
        caption: None,
        credit: None,
    })
    .unwrap()
    .id
}

fn blob(repo: &Repository, bytes: &[u8], content_type: &str, kind: MediaKind) -> MediaId {
    repo.put_media(NewMedia {
        bytes,
        filename: "b",
        content_type,
        kind,
        caption: Some("caption".into()),
        credit: None,
    })
    .unwrap()
    .id
}

fn untitled(cover: &MediaId) -> Artwork {
    Artwork {
        id: String::new(),
        title: "Untitled".into(),
        artist_name: "Anonymous".into(),
        creation_year: None,
        cover_media: cover.clone(),
        phases: vec![acoa_core::Phase::placeholder(0)],
        created_at: Default::default(),
        updated_at: Default::default(),
    }
}

#[test]
fn seeded_works_survive_reopen() {
    let (_dir, repo) = fresh();
    let slugs = seed_fixtures(&repo).unwrap();
    assert_eq!(slugs, fixture_slugs());
    let root = repo.root().to_path_buf();
    drop(repo);

    let repo = Repository::open(&root).unwrap();
    let listed: Vec<String> = repo.list_works().into_iter().map(|w| w.slug).collect();
    assert_eq!(listed, ["ensaio-para-uma-paisagem", "le-dejeuner-sur-l-herbe"]);
    assert!(repo.verify().unwrap().is_empty());
    assert_eq!(repo.get_about().unwrap().title, "Ana Vieira (1940–2016)");

    let err = seed_fixtures(&repo).unwrap_err();
    assert_eq!(err.code(), "already_seeded");
}

#[test]
fn colliding_titles_get_numbered_slugs() {
    let (_dir, repo) = fresh();
    let cover = image(&repo, "cover");
    let a = repo.create_work(untitled(&cover)).unwrap();
    let b = repo.create_work(untitled(&cover)).unwrap();
    let c = repo.create_work(untitled(&cover)).unwrap();
    assert_eq!([a, b, c], ["untitled", "untitled-2", "untitled-3"]);
    assert_eq!(repo.list_works().len(), 3);
}

#[test]
fn identical_uploads_share_one_blob() {
    let (_dir, repo) = fresh();
    let bytes = b"same bytes".repeat(10);
    let a = blob(&repo, &bytes, "audio/mpeg", MediaKind::Audio);
    let b = blob(&repo, &bytes, "audio/mpeg", MediaKind::Audio);
    assert_eq!(a, b);
    assert_eq!(a.0, hex::encode(Sha256::digest(&bytes)));
    assert_eq!(repo.list_media().len(), 1);
    let (asset, data) = repo.get_media(&a).unwrap();
    assert_eq!(data, bytes);
    assert_eq!(asset.byte_size, bytes.len() as u64);
    assert_eq!(asset.playback_policy, acoa_core::PlaybackPolicy::UserInitiated);
}

#[test]
fn export_import_reproduces_manifests_and_blobs() {
    let (_a, source) = fresh();
    seed_fixtures(&source).unwrap();
    let audio = blob(&source, &[7u8; 1000], "audio/ogg", MediaKind::Audio);
    let mut work = source.get_work("le-dejeuner-sur-l-herbe").unwrap();
    work.phases[1].media.push(audio.clone());
    source.update_work("le-dejeuner-sur-l-herbe", work).unwrap();

    let archive = source.export_bytes().unwrap();
    let (_b, target) = fresh();
    let report = target.import_bytes(&archive, false).unwrap();
    assert_eq!(report.imported.len(), 2);
    assert!(report.skipped.is_empty());
    assert_eq!(report.about, AboutOutcome::Imported);

    for slug in fixture_slugs() {
        assert_eq!(source.work_manifest(&slug).unwrap(), target.work_manifest(&slug).unwrap());
    }
    let ids = |r: &Repository| -> Vec<(MediaId, String)> {
        let mut v: Vec<_> = r.list_media().into_iter().map(|m| (m.id, m.checksum)).collect();
        v.sort();
        v
    };
    assert_eq!(ids(&source), ids(&target));
    assert_eq!(target.get_media(&audio).unwrap().1, vec![7u8; 1000]);
    assert_eq!(source.get_about().unwrap(), target.get_about().unwrap());
    assert_eq!(target.export_bytes().unwrap(), archive);
    assert!(target.verify().unwrap().is_empty());
}

#[test]
fn damaged_archives_are_rejected_without_writes() {
    let (_a, source) = fresh();
    seed_fixtures(&source).unwrap();
    let archive = source.export_bytes().unwrap();

    let (_b, target) = fresh();
    let before = snapshot(target.root());
    for cut in [0, 5, 13, archive.len() / 2, archive.len() - 1] {
        let err = target.import_bytes(&archive[..cut], false).unwrap_err();
        assert_eq!(err.code(), "corrupt_archive", "cut at {cut}");
    }
    let mut flipped = archive.clone();
    let mid = flipped.len() / 2;
    flipped[mid] ^= 0x01;
    assert_eq!(target.import_bytes(&flipped, false).unwrap_err().code(), "corrupt_archive");
    assert_eq!(snapshot(target.root()), before);
}

#[test]
fn archive_with_dangling_reference_is_rejected() {
    use acoa_core::archive::{decode_records, encode_records};
    let (_a, source) = fresh();
    seed_fixtures(&source).unwrap();
    let records = decode_records(&source.export_bytes().unwrap()).unwrap();
    // drop the first blob but keep everything that points at it
    let victim = records
        .iter()
        .position(|(p, _)| p.starts_with("media/") && !p.ends_with(".meta"))
        .unwrap();
    let meta = format!("{}.meta", records[victim].0);
    let kept: Vec<_> = records
        .into_iter()
        .enumerate()
        .filter(|(i, (p, _))| *i != victim && *p != meta)
        .map(|(_, r)| r)
        .collect();

    let (_b, target) = fresh();
    let before = snapshot(target.root());
    let err = target.import_bytes(&encode_records(&kept), false).unwrap_err();
    assert_eq!(err.code(), "corrupt_archive");
    assert!(err.to_string().contains("missing media"), "{err}");
    assert_eq!(snapshot(target.root()), before);
}

#[test]
fn import_skips_existing_slugs_unless_overwriting() {
    let (_a, source) = fresh();
    seed_fixtures(&source).unwrap();
    let archive = source.export_bytes().unwrap();

    let (_b, target) = fresh();
    let cover = image(&target, "mine");
    let mut mine = untitled(&cover);
    mine.id = "ensaio-para-uma-paisagem".into();
    mine.title = "Something else".into();
    target.create_work(mine).unwrap();
    let manifest = target.work_manifest("ensaio-para-uma-paisagem").unwrap();

    let report = target.import_bytes(&archive, false).unwrap();
    assert_eq!(report.skipped, ["ensaio-para-uma-paisagem"]);
    assert_eq!(report.imported, ["le-dejeuner-sur-l-herbe"]);
    assert_eq!(target.work_manifest("ensaio-para-uma-paisagem").unwrap(), manifest);

    target
        .put_about(AboutContent { title: "Local".into(), body: String::new(), media: vec![] })
        .unwrap();
    let report = target.import_bytes(&archive, false).unwrap();
    assert_eq!(report.skipped.len(), 2);
    assert_eq!(report.about, AboutOutcome::Skipped);
    assert_eq!(target.get_about().unwrap().title, "Local");

    let report = target.import_bytes(&archive, true).unwrap();
    assert_eq!(report.imported.len(), 2);
    assert_eq!(report.about, AboutOutcome::Imported);
    assert_eq!(
        target.work_manifest("ensaio-para-uma-paisagem").unwrap(),
        source.work_manifest("ensaio-para-uma-paisagem").unwrap()
    );
}

#[test]
fn readers_never_see_a_torn_work() {
    let (_dir, repo) = fresh();
    seed_fixtures(&repo).unwrap();
    let repo = Arc::new(repo);
    let slug = "ensaio-para-uma-paisagem";
    let original = repo.get_work(slug).unwrap();
    let done = Arc::new(AtomicBool::new(false));

    let readers: Vec<_> = (0..4)
        .map(|_| {
            let repo = Arc::clone(&repo);
            let done = Arc::clone(&done);
            std::thread::spawn(move || {
                let mut reads = 0;
                while !done.load(Ordering::Relaxed) || reads == 0 {
                    let w = repo.get_work(slug).unwrap();
                    // title and phase count are written together
                    let n: usize = w.title.rsplit(' ').next().unwrap().parse().unwrap_or(3);
                    assert_eq!(w.phases.len(), n, "{}", w.title);
                    assert!(acoa_core::validate_artwork(&w).valid);
                    let listed = repo.list_works();
                    assert_eq!(listed.len(), 2);
                    reads += 1;
                }
                reads
            })
        })
        .collect();

    for i in 1..=40usize {
        let n = i % 5 + 1;
        let mut w = acoa_core::resize_phases(&original, n as i64, true).unwrap();
        w.title = format!("Revision {n}");
        repo.update_work(slug, w).unwrap();
    }
    done.store(true, Ordering::Relaxed);
    for r in readers {
        assert!(r.join().unwrap() > 0);
    }
}

#[test]
fn random_works_round_trip_through_disk() {
    let (_dir, repo) = fresh();
    let covers: Vec<MediaId> = (0..3).map(|i| image(&repo, &format!("c{i}"))).collect();
    let mut pool = covers.clone();
    pool.push(blob(&repo, b"video bytes", "video/mp4", MediaKind::Video));
    pool.push(blob(&repo, b"%PDF-1.4", "application/pdf", MediaKind::Document));

    let mut runner = TestRunner::new(Config { cases: 64, ..Config::default() });
    let stored: std::cell::RefCell<Vec<(String, Artwork)>> = Default::default();
    runner
        .run(&acoa_core::testkit::artwork(covers, pool), |work| {
            let slug = repo.create_work(work.clone()).unwrap();
            let back = repo.get_work(&slug).unwrap();
            prop_assert_eq!(&back.title, &work.title);
            prop_assert_eq!(&back.phases, &work.phases);
            stored.borrow_mut().push((slug, back));
            Ok(())
        })
        .unwrap();

    let stored = stored.into_inner();
    let root = repo.root().to_path_buf();
    drop(repo);
    let repo = Repository::open(&root).unwrap();
    let slugs: HashSet<String> = repo.list_works().into_iter().map(|w| w.slug).collect();
    assert_eq!(slugs.len(), stored.len());
    for (slug, work) in &stored {
        assert_eq!(&repo.get_work(slug).unwrap(), work);
    }
    assert!(repo.verify().unwrap().is_empty());
}

#[test]
fn tampered_blob_is_reported() {
    let (_dir, repo) = fresh();
    seed_fixtures(&repo).unwrap();
    let id = repo.list_media()[0].id.clone();
    let path = repo
        .root()
        .join("media")
        .join(&id.0[..2])
        .join(&id.0);
    std::fs::write(&path, b"not the original").unwrap();
    let issues = repo.verify().unwrap();
    assert!(issues.iter().any(|(_, i)| i.code == "checksum_mismatch"), "{issues:?}");
}

#[test]
fn ten_thousand_sessions_have_distinct_tokens() {
    let (_dir, repo) = fresh();
    let auth = Auth::with_cost(Arc::new(repo), HashCost::minimal());
    auth.add_admin("curator", "correct horse").unwrap();
    let mut seen = HashSet::new();
    for _ in 0..10_000 {
        let s = auth.login("curator", "correct horse").unwrap();
        assert_eq!(s.token.len(), 43);
        assert!(seen.insert(s.token));
    }
}

//! Proptest strategies for valid content, shared by test suites.

use proptest::collection::vec;
use proptest::option;
use proptest::prelude::*;

use crate::model::{Artwork, MediaId, Phase, SubPhase};

/// Text with at least one visible character, mixing ASCII, accented Latin
/// and punctuation.
pub fn label() -> impl Strategy<Value = String> {
    "[A-Za-z0-9ÁÉÍÓÚáéíóúçãõâêôà][A-Za-z0-9ÁÉÍÓÚáéíóúçãõâêôà '’.,:;()–-]{0,24}"
}

/// Plain-text paragraphs separated by blank lines.
pub fn description() -> impl Strategy<Value = String> {
    vec("[A-Za-z0-9çãéó ,.'\"“”«»!?–-]{1,60}", 0..4).prop_map(|ps| ps.join("\n\n"))
}

pub fn year() -> impl Strategy<Value = i32> {
    1..=9999i32
}

fn media_list(pool: Vec<MediaId>) -> impl Strategy<Value = Vec<MediaId>> {
    let n = pool.len();
    vec(0..n.max(1), 0..3).prop_map(move |picks| {
        if pool.is_empty() {
            Vec::new()
        } else {
            picks.into_iter().map(|i| pool[i].clone()).collect()
        }
    })
}

fn subphases(pool: Vec<MediaId>) -> impl Strategy<Value = Vec<SubPhase>> {
    vec((label(), description(), media_list(pool)), 0..3).prop_map(|subs| {
        subs.into_iter()
            .enumerate()
            .map(|(j, (label, description, media))| SubPhase {
                ordinal: j as u32,
                label,
                description,
                media,
                subphases: Vec::new(),
            })
            .collect()
    })
}

/// Ordered phases whose dated entries are non-decreasing.
pub fn phases(pool: Vec<MediaId>, max: usize) -> impl Strategy<Value = Vec<Phase>> {
    vec(
        (
            label(),
            option::of(year()),
            description(),
            media_list(pool.clone()),
            subphases(pool),
        ),
        1..=max,
    )
    .prop_map(|raw| {
        let mut years: Vec<i32> = raw.iter().filter_map(|r| r.1).collect();
        years.sort_unstable();
        let mut years = years.into_iter();
        raw.into_iter()
            .enumerate()
            .map(|(i, (label, year, description, media, subphases))| Phase {
                ordinal: i as u32,
                label,
                year: year.and_then(|_| years.next()),
                description,
                media,
                subphases,
            })
            .collect()
    })
}

/// A valid, not yet stored work. `covers` must hold image ids, `pool` any
/// stored media ids.
pub fn artwork(covers: Vec<MediaId>, pool: Vec<MediaId>) -> impl Strategy<Value = Artwork> {
    assert!(!covers.is_empty(), "need at least one cover image");
    let n = covers.len();
    (
        label(),
        label(),
        option::of(year()),
        0..n,
        phases(pool, 6),
    )
        .prop_map(move |(title, artist_name, creation_year, cover, phases)| Artwork {
            id: String::new(),
            title,
            artist_name,
            creation_year,
            cover_media: covers[cover].clone(),
            phases,
            created_at: Default::default(),
            updated_at: Default::default(),
        })
}

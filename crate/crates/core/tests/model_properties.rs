//! Property tests for validation, slugs, phase resizing and timeline layout,
//! checked against independent oracles.

use acoa_core::chronology::{classify, layout, ChronologyMode};
use acoa_core::model::{make_slug, resize_phases, validate_artwork, Artwork, MediaId, Phase};
use acoa_core::testkit;
use num_rational::Ratio;
use proptest::prelude::*;

fn ids(n: u8) -> Vec<MediaId> {
    (1..=n).map(|i| MediaId(format!("{i:02x}").repeat(32))).collect()
}

fn any_work() -> impl Strategy<Value = Artwork> {
    testkit::artwork(ids(2), ids(4))
}

/// Accent folding spelled out letter by letter, independent of Unicode
/// decomposition.
fn fold_oracle(c: char) -> Option<&'static str> {
    const TABLE: &[(&str, &str)] = &[
        ("áàâãäåā", "a"),
        ("ç", "c"),
        ("éèêëē", "e"),
        ("íìîïī", "i"),
        ("ñ", "n"),
        ("óòôõöō", "o"),
        ("úùûüū", "u"),
        ("ýÿ", "y"),
        ("ß", "ss"),
        ("æ", "ae"),
        ("ø", "o"),
    ];
    TABLE
        .iter()
        .find(|(from, _)| from.contains(c))
        .map(|(_, to)| *to)
}

/// Character-by-character slug reference.
fn slug_oracle(title: &str) -> Option<String> {
    let mut tokens: Vec<String> = vec![String::new()];
    for c in title.chars() {
        let lower: String = c.to_lowercase().collect();
        let mut mapped = String::new();
        let mut separator = false;
        for l in lower.chars() {
            if l.is_ascii_alphanumeric() {
                mapped.push(l);
            } else if let Some(s) = fold_oracle(l) {
                mapped.push_str(s);
            } else {
                separator = true;
            }
        }
        if separator {
            tokens.push(String::new());
        }
        tokens.last_mut().unwrap().push_str(&mapped);
    }
    let parts: Vec<String> = tokens.into_iter().filter(|t| !t.is_empty()).collect();
    (!parts.is_empty()).then(|| parts.join("-"))
}

#[test]
fn slug_oracle_agrees_on_the_named_examples() {
    for (title, expected) in [
        ("Ensaio para uma Paisagem", "ensaio-para-uma-paisagem"),
        ("ABC", "abc"),
        ("Le Déjeuner sur L'Herbe", "le-dejeuner-sur-l-herbe"),
    ] {
        assert_eq!(slug_oracle(title).as_deref(), Some(expected));
        assert_eq!(make_slug(title).unwrap(), expected);
    }
}

fn phases_with_years(years: &[i32]) -> Vec<Phase> {
    years
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let mut p = Phase::placeholder(i as u32);
            p.year = Some(*y);
            p
        })
        .collect()
}

#[test]
fn exhibition_years_match_exact_rationals() {
    let years = [1977, 1998, 2011, 2017];
    let l = layout(&phases_with_years(&years)).unwrap();
    let expected = [Ratio::new(0i64, 40), Ratio::new(21, 40), Ratio::new(34, 40), Ratio::new(40, 40)];
    for (tick, exact) in l.ticks.iter().zip(expected) {
        let exact = *exact.numer() as f64 / *exact.denom() as f64;
        assert!((tick.position - exact).abs() < 1e-12);
    }
    let positions: Vec<f64> = l.ticks.iter().map(|t| t.position).collect();
    assert_eq!(positions, [0.0, 0.525, 0.85, 1.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn generated_works_are_valid(work in any_work()) {
        let r = validate_artwork(&work);
        prop_assert!(r.valid, "{:?}", r.issues);
    }

    #[test]
    fn accepted_works_have_dense_ordinals(work in any_work(), swap in any::<(usize, usize)>()) {
        let ords: Vec<u32> = work.phases.iter().map(|p| p.ordinal).collect();
        prop_assert_eq!(ords, (0..work.phases.len() as u32).collect::<Vec<_>>());

        // Any permutation that moves an ordinal out of place is caught.
        let n = work.phases.len();
        let (a, b) = (swap.0 % n, swap.1 % n);
        let mut shuffled = work.clone();
        shuffled.phases.swap(a, b);
        let report = validate_artwork(&shuffled);
        prop_assert_eq!(report.has("ordinal_mismatch"), a != b);
    }

    #[test]
    fn duplicated_ordinal_is_caught(work in any_work(), at in any::<usize>()) {
        let mut w = work;
        let n = w.phases.len();
        let dup = w.phases[at % n].clone();
        w.phases.push(dup);
        prop_assert!(validate_artwork(&w).has("ordinal_mismatch"));
    }

    #[test]
    fn monotone_check_matches_brute_force(
        base in any_work(),
        years in proptest::collection::vec(proptest::option::of(1..=3000i32), 1..8),
    ) {
        let phases: Vec<Phase> = years.iter().enumerate().map(|(i, y)| {
            let mut p = Phase::placeholder(i as u32);
            p.year = *y;
            p
        }).collect();
        let mut w = base;
        w.phases = phases;

        // brute force: phase j is out of order if any earlier dated phase is later
        let expected: Vec<String> = (0..years.len())
            .filter(|&j| {
                let Some(yj) = years[j] else { return false };
                let prev = years[..j].iter().rev().flatten().next();
                prev.is_some_and(|&yp| yj < yp)
            })
            .map(|j| format!("phases[{j}].year"))
            .collect();
        let got: Vec<String> = validate_artwork(&w)
            .issues
            .into_iter()
            .filter(|i| i.code == "years_not_monotone")
            .map(|i| i.path)
            .collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn slug_matches_oracle(title in "[A-Za-z0-9 áàâãçéêíóôõúüñßæø'’.,:;!?/()_-]{0,30}") {
        match (make_slug(&title), slug_oracle(&title)) {
            (Ok(s), Some(o)) => prop_assert_eq!(s, o),
            (Err(e), None) => prop_assert_eq!(e.code(), "unsluggable"),
            (got, want) => prop_assert!(false, "{:?} vs {:?}", got, want),
        }
    }

    #[test]
    fn slug_is_idempotent(title in "\\PC{1,40}") {
        if let Ok(s) = make_slug(&title) {
            prop_assert!(acoa_core::model::is_valid_slug(&s), "{}", s);
            prop_assert_eq!(make_slug(&s).unwrap(), s);
        }
    }

    #[test]
    fn grow_then_shrink_restores_prefix(work in any_work(), extra in 0i64..5) {
        let n = work.phases.len() as i64;
        let grown = resize_phases(&work, n + extra, false).unwrap();
        prop_assert_eq!(grown.phases.len() as i64, n + extra);
        let back = resize_phases(&grown, n, true).unwrap();
        let before = serde_json::to_vec(&work).unwrap();
        let after = serde_json::to_vec(&back).unwrap();
        prop_assert_eq!(before, after);
        prop_assert!(validate_artwork(&grown).valid);
    }

    #[test]
    fn shrink_keeps_survivors_byte_identical(work in any_work(), keep in 1usize..6) {
        let keep = keep.min(work.phases.len());
        let cut = resize_phases(&work, keep as i64, true).unwrap();
        for (a, b) in work.phases.iter().zip(&cut.phases) {
            prop_assert_eq!(serde_json::to_vec(a).unwrap(), serde_json::to_vec(b).unwrap());
        }
        prop_assert_eq!(cut.phases.len(), keep);
    }

    #[test]
    fn layout_is_affine_invariant(
        years in proptest::collection::vec(1000..=3000i32, 2..10),
        shift in -999..=999i32,
    ) {
        let mut sorted = years;
        sorted.sort_unstable();
        let base = layout(&phases_with_years(&sorted)).unwrap();
        let moved: Vec<i32> = sorted.iter().map(|y| y + shift).collect();
        let shifted = layout(&phases_with_years(&moved)).unwrap();
        prop_assert_eq!(base.mode, shifted.mode);
        for (a, b) in base.ticks.iter().zip(&shifted.ticks) {
            prop_assert_eq!(a.position, b.position);
        }
    }

    #[test]
    fn quantitative_positions_match_rationals_and_are_monotone(
        years in proptest::collection::vec(1..=9999i32, 2..10),
    ) {
        let mut sorted = years;
        sorted.sort_unstable();
        let l = layout(&phases_with_years(&sorted)).unwrap();
        let (lo, hi) = (sorted[0] as i64, *sorted.last().unwrap() as i64);
        if lo == hi {
            prop_assert_eq!(l.mode, ChronologyMode::Qualitative);
        } else {
            prop_assert_eq!(l.mode, ChronologyMode::Quantitative);
            prop_assert_eq!(l.ticks[0].position, 0.0);
            prop_assert_eq!(l.ticks.last().unwrap().position, 1.0);
            for (tick, y) in l.ticks.iter().zip(&sorted) {
                let exact = Ratio::new(*y as i64 - lo, hi - lo);
                let exact = *exact.numer() as f64 / *exact.denom() as f64;
                prop_assert!((tick.position - exact).abs() < 1e-12);
                prop_assert_eq!(&tick.tick_label, &y.to_string());
            }
        }
        for pair in l.ticks.windows(2) {
            prop_assert!(pair[0].position <= pair[1].position);
            prop_assert!(pair[0].ordinal < pair[1].ordinal);
        }
    }

    #[test]
    fn qualitative_positions_ignore_labels(work in any_work(), relabel in "[a-z]{1,8}") {
        let mut undated = work.phases.clone();
        for p in &mut undated {
            p.year = None;
        }
        let a = layout(&undated).unwrap();
        for p in &mut undated {
            p.label = format!("{relabel} {}", p.ordinal);
        }
        let b = layout(&undated).unwrap();
        let n = undated.len();
        for (i, (x, y)) in a.ticks.iter().zip(&b.ticks).enumerate() {
            prop_assert_eq!(x.position, y.position);
            let expected = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
            prop_assert_eq!(x.position, expected);
        }
    }

    #[test]
    fn layout_mode_agrees_with_classify(work in any_work()) {
        let l = layout(&work.phases).unwrap();
        prop_assert_eq!(l.mode, classify(&work.phases).unwrap());
        prop_assert_eq!(l.ticks.len(), work.phases.len());
    }

    #[test]
    fn canonical_encoding_round_trips(work in any_work()) {
        let bytes = acoa_core::canonical::encode(&work).unwrap();
        let back: Artwork = acoa_core::canonical::decode_canonical(&bytes).unwrap();
        prop_assert_eq!(&back, &work);
        prop_assert_eq!(acoa_core::canonical::encode(&back).unwrap(), bytes);
    }
}

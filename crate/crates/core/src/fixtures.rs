//! The two bundled case-study works by Ana Vieira and the matching About
//! record. All media are generated placeholders, never archive photographs.

use crate::error::{Error, Result};
use crate::model::{make_slug, AboutContent, Artwork, MediaId, MediaKind, Phase, SubPhase};
use crate::placeholder::render_png;
use crate::store::{NewMedia, Repository};

pub const ARTIST: &str = "Ana Vieira";
pub const CREDIT: &str =
    "© Ana Vieira Archive, courtesy of the family and Banco de Arte Contemporânea (BAC)";

pub const ENSAIO_TITLE: &str = "Ensaio para uma Paisagem";
pub const DEJEUNER_TITLE: &str = "Le Déjeuner sur L'Herbe";
pub const ABOUT_TITLE: &str = "Ana Vieira (1940–2016)";

pub const ENSAIO_MATERIALS: [&str; 7] =
    ["Fumo", "Areia", "Farol", "Humidade", "Ventos", "Madeira", "Metal"];
pub const DEJEUNER_OBJECTS: &str = "four glasses, five plates, three bottles, one bowl, \
a palette with three brushes, a picnic basket in lintel and two oranges";
pub const DEJEUNER_YEARS: [i32; 4] = [1977, 1998, 2011, 2017];

/// Slugs the fixtures are stored under.
pub fn fixture_slugs() -> [String; 2] {
    [
        make_slug(ENSAIO_TITLE).expect("fixture title is sluggable"),
        make_slug(DEJEUNER_TITLE).expect("fixture title is sluggable"),
    ]
}

fn placeholder(repo: &Repository, label: &str, caption: String) -> Result<MediaId> {
    let png = render_png(label);
    let asset = repo.put_media(NewMedia {
        bytes: &png,
        filename: &format!("{}.png", make_slug(label)?),
        content_type: "image/png",
        kind: MediaKind::Image,
        caption: Some(caption),
        credit: Some(CREDIT.to_owned()),
    })?;
    Ok(asset.id)
}

fn phase(ordinal: u32, label: &str, year: Option<i32>, description: &str, media: Vec<MediaId>) -> Phase {
    Phase {
        ordinal,
        label: label.to_owned(),
        year,
        description: description.to_owned(),
        media,
        subphases: Vec::new(),
    }
}

fn ensaio(repo: &Repository) -> Result<Artwork> {
    let img = |label: &str, caption: &str| {
        placeholder(repo, &format!("Ensaio {label}"), format!("{ENSAIO_TITLE}: {caption}"))
    };
    let cover = img("para uma Paisagem", "cover")?;

    let materials = format!(
        "The installation was planned as seven box-like elements, each built from a \
different material or evoking a different element of landscape.\n\nThe seven elements: {}.",
        ENSAIO_MATERIALS.join(", ")
    );
    let mut conception = phase(
        0,
        "Conception",
        None,
        "Everything that happened before the work was shown: the planning, \
the drawings and the search for materials.",
        vec![img("Conception", "working documents")?],
    );
    conception.subphases = vec![
        SubPhase {
            ordinal: 0,
            label: "Ideas".into(),
            description: "Sketches on paper recording the first structured idea \
of the installation.\n\nThe artist planned extensively before building anything."
                .into(),
            media: vec![img("Ideas", "sketch")?],
            subphases: Vec::new(),
        },
        SubPhase {
            ordinal: 1,
            label: "Materials".into(),
            description: materials,
            media: vec![img("Materials", "material studies")?],
            subphases: Vec::new(),
        },
    ];

    Ok(Artwork {
        id: String::new(),
        title: ENSAIO_TITLE.into(),
        artist_name: ARTIST.into(),
        creation_year: Some(1997),
        cover_media: cover,
        phases: vec![
            conception,
            phase(
                1,
                "Exhibition",
                None,
                "Shown a single time, in 1997, in the Sala do Veado of the Natural \
History Museum in Lisbon.\n\nPhotographs and video recorded during the exhibition, \
together with the artist's texts describing the installation.",
                vec![img("Exhibition", "installation view")?],
            ),
            phase(
                2,
                "Post-Exhibition",
                None,
                "Material produced in response to the exhibition, such as press articles.",
                vec![img("Post-Exhibition", "press clipping")?],
            ),
        ],
        created_at: Default::default(),
        updated_at: Default::default(),
    })
}

fn dejeuner(repo: &Repository) -> Result<Artwork> {
    let cover = placeholder(repo, "Le Dejeuner sur L'Herbe", format!("{DEJEUNER_TITLE}: cover"))?;
    let notes = [
        format!(
            "First presentation. A projection of Manet's painting falls on a picnic \
cloth laid on the floor of a dark room.\n\nOn the cloth: {DEJEUNER_OBJECTS}."
        ),
        "The installation is shown again, reassembled for a new venue.".to_owned(),
        "A further exhibition of the work in a different location.".to_owned(),
        "The most recent exhibition documented here.".to_owned(),
    ];
    let phases = DEJEUNER_YEARS
        .iter()
        .zip(notes.iter())
        .enumerate()
        .map(|(i, (year, text))| {
            let media = placeholder(
                repo,
                &format!("Dejeuner {year}"),
                format!("{DEJEUNER_TITLE}: exhibition of {year}"),
            )?;
            Ok(phase(i as u32, &year.to_string(), Some(*year), text, vec![media]))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Artwork {
        id: String::new(),
        title: DEJEUNER_TITLE.into(),
        artist_name: ARTIST.into(),
        creation_year: Some(1977),
        cover_media: cover,
        phases,
        created_at: Default::default(),
        updated_at: Default::default(),
    })
}

fn about(repo: &Repository) -> Result<AboutContent> {
    let portrait = placeholder(repo, "Ana Vieira 1940-2016", ARTIST.to_owned())?;
    Ok(AboutContent {
        title: ABOUT_TITLE.into(),
        body: "Portuguese artist, born in 1940 and died in 2016.\n\nThis site documents \
the trajectories of two of her installations, from their conception to their most \
recent exhibitions."
            .into(),
        media: vec![portrait],
    })
}

/// Installs both case-study works, plus the About record when none is
/// configured yet. Fails before writing anything if either work exists.
pub fn seed_fixtures(repo: &Repository) -> Result<Vec<String>> {
    let slugs = fixture_slugs();
    let present: Vec<&str> = slugs
        .iter()
        .filter(|s| repo.contains_work(s))
        .map(String::as_str)
        .collect();
    if !present.is_empty() {
        return Err(Error::AlreadySeeded(present.join(", ")));
    }
    let works = [ensaio(repo)?, dejeuner(repo)?];
    let mut out = Vec::new();
    for w in works {
        out.push(repo.create_work(w)?);
    }
    if matches!(repo.get_about(), Err(Error::NotFound { .. })) {
        repo.put_about(about(repo)?)?;
    }
    Ok(out)
}

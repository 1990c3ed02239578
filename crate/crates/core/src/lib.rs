//! Core of the artwork chronology service: the content model and its
//! validation, timeline layout, the file-backed repository with archive
//! bundles, admin authentication and the bundled case-study fixtures.

pub mod archive;
pub mod auth;
pub mod canonical;
pub mod chronology;
pub mod clock;
pub mod error;
pub mod fixtures;
pub mod fsutil;
pub mod model;
pub mod placeholder;
pub mod store;

pub use archive::{AboutOutcome, ImportReport};
pub use auth::{AdminSession, Auth, HashCost};
pub use chronology::{classify, layout, ChronologyMode, Tick, TimelineLayout};
pub use clock::{Clock, ManualClock, SystemClock};
pub use error::{Error, Result};
pub use fixtures::seed_fixtures;
pub use model::{
    make_slug, resize_phases, validate_artwork, AboutContent, Artwork, Issue, MediaAsset, MediaId,
    MediaKind, Phase, PlaybackPolicy, SubPhase, ValidationReport,
};
pub use store::{NewMedia, Repository, WorkSummary};

#[cfg(feature = "testkit")]
pub mod testkit;

//! Tracking of task and dialogue initiative in two-party dialogues.
//!
//! Each turn's annotated cues contribute basic probability assignments that
//! are combined, with Dempster's rule, with the current initiative indices
//! to predict who holds each initiative on the next turn. The per-cue
//! assignments are learned from annotated corpora by error-driven
//! adjustment.

pub mod cli;
pub mod corpus;
pub mod cues;
pub mod error;
pub mod evalstats;
pub mod evidence;
pub mod synth;
pub mod tracker;

pub use corpus::{parse_corpus, AgentId, Corpus, Dialogue, Turn};
pub use cues::{CueKind, CueModel, Dimension};
pub use error::{Error, Result};
pub use evidence::{MassFunction, Role};
pub use tracker::{AdjustmentMethod, TrackerConfig};

//! Cue taxonomy and the learned per-cue bpa tables.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evidence::{MassFunction, Role};

pub const MODEL_HEADER: &str = "initrack-model v1";

/// How a cue is recognized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CueClass {
    Explicit,
    Discourse,
    Analytical,
}

/// Which initiatives a cue can move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effect {
    DialogueOnly,
    Both,
}

/// Task or dialogue initiative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dimension {
    Task,
    Dialogue,
}

impl Dimension {
    pub const BOTH: [Dimension; 2] = [Dimension::Task, Dimension::Dialogue];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Task => "task",
            Dimension::Dialogue => "dialogue",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "task" => Ok(Dimension::Task),
            "dialogue" => Ok(Dimension::Dialogue),
            other => Err(Error::domain(format!("unknown dimension \"{other}\""))),
        }
    }
}

macro_rules! cue_kinds {
    ($( $variant:ident => $token:literal, $class:ident, $effect:ident, $holder:ident; )*) => {
        /// One leaf entry of the cue taxonomy.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum CueKind {
            $( $variant, )*
        }

        impl CueKind {
            /// Every cue, in canonical order.
            pub const ALL: [CueKind; 14] = [ $( CueKind::$variant, )* ];

            pub fn as_str(self) -> &'static str {
                match self {
                    $( CueKind::$variant => $token, )*
                }
            }

            pub fn spec(self) -> CueSpec {
                match self {
                    $( CueKind::$variant => CueSpec {
                        kind: CueKind::$variant,
                        class: CueClass::$class,
                        effect: Effect::$effect,
                        expected_holder: Role::$holder,
                    }, )*
                }
            }
        }

        impl FromStr for CueKind {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $( $token => Ok(CueKind::$variant), )*
                    other => Err(Error::UnknownCue(other.to_string())),
                }
            }
        }
    };
}

cue_kinds! {
    ExplicitGiveUp => "explicit_giveup", Explicit, Both, Hearer;
    ExplicitTakeOver => "explicit_takeover", Explicit, Both, Speaker;
    EndSilence => "end_silence", Discourse, Both, Hearer;
    Repetition => "no_new_info:repetition", Discourse, Both, Hearer;
    Prompt => "no_new_info:prompt", Discourse, Both, Hearer;
    DomainQuestion => "question:domain", Discourse, DialogueOnly, Speaker;
    EvaluationQuestion => "question:evaluation", Discourse, DialogueOnly, Hearer;
    TaskObligationFulfilled => "obligation_fulfilled:task", Discourse, Both, Hearer;
    DiscourseObligationFulfilled => "obligation_fulfilled:discourse", Discourse, DialogueOnly, Hearer;
    InvalidAction => "invalidity:action", Analytical, Both, Hearer;
    InvalidBelief => "invalidity:belief", Analytical, DialogueOnly, Hearer;
    Suboptimality => "suboptimality", Analytical, Both, Hearer;
    AmbiguousAction => "ambiguity:action", Analytical, Both, Hearer;
    AmbiguousBelief => "ambiguity:belief", Analytical, DialogueOnly, Hearer;
}

impl CueKind {
    fn index(self) -> usize {
        self as usize
    }

    pub fn effect(self) -> Effect {
        self.spec().effect
    }

    /// Whether this cue carries evidence for `dim`.
    pub fn affects(self, dim: Dimension) -> bool {
        dim == Dimension::Dialogue || self.effect() == Effect::Both
    }
}

impl fmt::Display for CueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Strict, case-sensitive lookup of a canonical cue token.
pub fn parse_cue(token: &str) -> Result<CueKind> {
    token.parse()
}

/// Static metadata for one cue.
///
/// `expected_holder` is the participant the cue usually hands the initiative
/// to. It is informational only; prediction is driven by the learned bpa's.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CueSpec {
    pub kind: CueKind,
    pub class: CueClass,
    pub effect: Effect,
    pub expected_holder: Role,
}

/// All cue specs in canonical order.
pub fn canonical_specs() -> Vec<CueSpec> {
    CueKind::ALL.iter().map(|k| k.spec()).collect()
}

/// A learned bpa with its credit counter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BpaEntry {
    pub bpa: MassFunction,
    pub counter: i64,
}

/// Trainable parameters for one cue. Dialogue-only cues have no task entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CueParams {
    pub dialogue: BpaEntry,
    pub task: Option<BpaEntry>,
}

impl CueParams {
    fn initial(kind: CueKind) -> Self {
        CueParams {
            dialogue: BpaEntry::default(),
            task: (kind.effect() == Effect::Both).then(BpaEntry::default),
        }
    }
}

/// The full set of per-cue bpa's and counters.
#[derive(Debug, Clone, PartialEq)]
pub struct CueModel {
    params: [CueParams; 14],
}

impl Default for CueModel {
    fn default() -> Self {
        Self::new()
    }
}

impl CueModel {
    /// Every bpa vacuous, every counter zero.
    pub fn new() -> Self {
        CueModel {
            params: CueKind::ALL.map(CueParams::initial),
        }
    }

    pub fn params(&self, kind: CueKind) -> &CueParams {
        &self.params[kind.index()]
    }

    pub fn entry(&self, kind: CueKind, dim: Dimension) -> Option<&BpaEntry> {
        let p = &self.params[kind.index()];
        match dim {
            Dimension::Dialogue => Some(&p.dialogue),
            Dimension::Task => p.task.as_ref(),
        }
    }

    pub fn entry_mut(&mut self, kind: CueKind, dim: Dimension) -> Option<&mut BpaEntry> {
        let p = &mut self.params[kind.index()];
        match dim {
            Dimension::Dialogue => Some(&mut p.dialogue),
            Dimension::Task => p.task.as_mut(),
        }
    }

    /// All (cue, dimension, entry) triples in file order.
    pub fn entries(&self) -> impl Iterator<Item = (CueKind, Dimension, &BpaEntry)> + '_ {
        CueKind::ALL.into_iter().flat_map(move |k| {
            Dimension::BOTH
                .into_iter()
                .filter_map(move |d| self.entry(k, d).map(|e| (k, d, e)))
        })
    }

    pub fn is_vacuous(&self) -> bool {
        self.entries()
            .all(|(_, _, e)| e.bpa == MassFunction::vacuous() && e.counter == 0)
    }

    pub fn save<W: Write>(&self, mut sink: W) -> Result<()> {
        sink.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MODEL_HEADER);
        out.push('\n');
        for (kind, dim, e) in self.entries() {
            out.push_str(&format!(
                "cue={} dim={} m_speaker={:.16e} m_hearer={:.16e} m_theta={:.16e} counter={}\n",
                kind,
                dim,
                e.bpa.speaker(),
                e.bpa.hearer(),
                e.bpa.theta(),
                e.counter
            ));
        }
        out
    }

    pub fn load<R: BufRead>(source: R) -> Result<Self> {
        let mut model = CueModel::new();
        let mut seen = [[false; 2]; 14];
        let mut header_seen = false;
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let err = |message: String| Error::ModelLoad {
                line: lineno,
                message,
            };
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if !header_seen {
                if trimmed != MODEL_HEADER {
                    return Err(err(format!("expected header \"{MODEL_HEADER}\"")));
                }
                header_seen = true;
                continue;
            }
            let fields = parse_fields(
                trimmed,
                &["cue", "dim", "m_speaker", "m_hearer", "m_theta", "counter"],
            )
            .map_err(err)?;
            let kind = parse_cue(fields[0]).map_err(|e| err(e.to_string()))?;
            let dim: Dimension = fields[1].parse().map_err(|e: Error| err(e.to_string()))?;
            let num = |s: &str, name: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| err(format!("{name}: \"{s}\" is not a number")))
            };
            let bpa = MassFunction::new(
                num(fields[2], "m_speaker")?,
                num(fields[3], "m_hearer")?,
                num(fields[4], "m_theta")?,
            )
            .map_err(|e| err(e.to_string()))?;
            let counter: i64 = fields[5]
                .parse()
                .map_err(|_| err(format!("counter: \"{}\" is not an integer", fields[5])))?;
            let slot = &mut seen[kind.index()][dim as usize];
            if *slot {
                return Err(err(format!("duplicate entry for cue={kind} dim={dim}")));
            }
            *slot = true;
            let entry = model.entry_mut(kind, dim).ok_or_else(|| {
                err(format!(
                    "cue {kind} affects the dialogue initiative only; it has no task bpa"
                ))
            })?;
            *entry = BpaEntry { bpa, counter };
        }
        if !header_seen {
            return Err(Error::ModelLoad {
                line: 0,
                message: "empty model file".into(),
            });
        }
        for kind in CueKind::ALL {
            for dim in Dimension::BOTH {
                if kind.affects(dim) && !seen[kind.index()][dim as usize] {
                    return Err(Error::ModelLoad {
                        line: 0,
                        message: format!("missing entry for cue={kind} dim={dim}"),
                    });
                }
            }
        }
        Ok(model)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::load(text.as_bytes())
    }
}

/// Split `key=value` tokens, requiring exactly `keys` in that order.
fn parse_fields<'a>(line: &'a str, keys: &[&str]) -> std::result::Result<Vec<&'a str>, String> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != keys.len() {
        return Err(format!(
            "expected {} fields, found {}",
            keys.len(),
            tokens.len()
        ));
    }
    tokens
        .iter()
        .zip(keys)
        .map(|(tok, key)| match tok.split_once('=') {
            Some((k, v)) if k == *key => Ok(v),
            _ => Err(format!("expected field \"{key}=...\", found \"{tok}\"")),
        })
        .collect()
}

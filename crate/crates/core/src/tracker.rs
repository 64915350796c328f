//! Initiative tracking and error-driven training of the cue bpa's.
//!
//! For every turn the tracker combines the current initiative indices with
//! the bpa's of the cues observed on that turn and predicts who holds each
//! initiative on the next turn. Indices are kept in the frame of the turn
//! being processed and swapped into the next speaker's frame afterwards.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{AgentId, Corpus, Dialogue};
use crate::cues::{CueKind, CueModel, Dimension};
use crate::error::{Error, Result};
use crate::evalstats;
use crate::evidence::{combine_all, MassFunction, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdjustmentMethod {
    ConstantIncrement,
    ConstantIncrementWithCounter,
    VariableIncrementWithCounter,
}

impl AdjustmentMethod {
    pub const ALL: [AdjustmentMethod; 3] = [
        AdjustmentMethod::ConstantIncrement,
        AdjustmentMethod::ConstantIncrementWithCounter,
        AdjustmentMethod::VariableIncrementWithCounter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AdjustmentMethod::ConstantIncrement => "const",
            AdjustmentMethod::ConstantIncrementWithCounter => "const-counter",
            AdjustmentMethod::VariableIncrementWithCounter => "var-counter",
        }
    }

    pub fn uses_counters(self) -> bool {
        self != AdjustmentMethod::ConstantIncrement
    }
}

impl fmt::Display for AdjustmentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AdjustmentMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AdjustmentMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown adjustment method \"{s}\"")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Increment constant.
    pub delta: f64,
    pub method: AdjustmentMethod,
    /// Speaker mass of the task index at the start of each dialogue.
    pub default_task_x: f64,
    /// Speaker mass of the dialogue index at the start of each dialogue.
    pub default_dialogue_x: f64,
    /// Mass placed on the actual holder when an index is reset after a
    /// misprediction.
    pub reset_strength: f64,
    /// Mass every adjusted cue bpa keeps on Θ. Zero lets a cue become fully
    /// committed, which allows total conflict between opposing cues.
    pub min_uncommitted: f64,
    /// Start each dialogue from the annotated holders of its first turn
    /// (at `reset_strength`) instead of the default indices.
    pub anchor_first_turn: bool,
    /// Accept `delta` in [0.5, 1).
    pub allow_large_delta: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            delta: 0.35,
            method: AdjustmentMethod::ConstantIncrementWithCounter,
            default_task_x: 0.5,
            default_dialogue_x: 0.5,
            reset_strength: 0.75,
            min_uncommitted: 1e-6,
            anchor_first_turn: false,
            allow_large_delta: false,
        }
    }
}

impl TrackerConfig {
    pub fn with_method(method: AdjustmentMethod, delta: f64) -> Self {
        TrackerConfig {
            method,
            delta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let upper = if self.allow_large_delta { 1.0 } else { 0.5 };
        if !(self.delta > 0.0 && self.delta < upper) {
            return Err(Error::Config(format!(
                "delta {} outside (0, {upper})",
                self.delta
            )));
        }
        for (name, x) in [
            ("default task index", self.default_task_x),
            ("default dialogue index", self.default_dialogue_x),
        ] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Config(format!("{name} {x} outside [0, 1]")));
            }
        }
        if !(self.reset_strength > 0.0 && self.reset_strength < 1.0) {
            return Err(Error::Config(format!(
                "reset strength {} outside (0, 1)",
                self.reset_strength
            )));
        }
        if !(0.0..1.0).contains(&self.min_uncommitted) {
            return Err(Error::Config(format!(
                "minimum uncommitted mass {} outside [0, 1)",
                self.min_uncommitted
            )));
        }
        Ok(())
    }

    fn default_index(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Task => self.default_task_x,
            Dimension::Dialogue => self.default_dialogue_x,
        }
    }
}

/// Current initiative indices, in the frame of the turn being processed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerState {
    pub task: MassFunction,
    pub dialogue: MassFunction,
}

impl TrackerState {
    pub fn from_defaults(config: &TrackerConfig) -> Result<Self> {
        Ok(TrackerState {
            task: MassFunction::bayesian(config.default_task_x)?,
            dialogue: MassFunction::bayesian(config.default_dialogue_x)?,
        })
    }

    pub fn get(&self, dim: Dimension) -> &MassFunction {
        match dim {
            Dimension::Task => &self.task,
            Dimension::Dialogue => &self.dialogue,
        }
    }

    fn initial(config: &TrackerConfig, dialogue: &Dialogue) -> Result<Self> {
        let first = &dialogue.turns[0];
        let index = |dim: Dimension| -> Result<MassFunction> {
            if config.anchor_first_turn {
                let role = first.role_of(first.holder(dim))?;
                MassFunction::favoring(role, config.reset_strength)
            } else {
                MassFunction::bayesian(config.default_index(dim))
            }
        };
        Ok(TrackerState {
            task: index(Dimension::Task)?,
            dialogue: index(Dimension::Dialogue)?,
        })
    }
}

/// Combined indices for one turn and the holders they predict for the next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub task_new: MassFunction,
    pub dialogue_new: MassFunction,
    pub task: Role,
    pub dialogue: Role,
}

impl Prediction {
    pub fn role(&self, dim: Dimension) -> Role {
        match dim {
            Dimension::Task => self.task,
            Dimension::Dialogue => self.dialogue,
        }
    }
}

fn combine_with_cues(
    current: MassFunction,
    cues: &[CueKind],
    model: &CueModel,
    dim: Dimension,
) -> Result<MassFunction> {
    let mut masses = Vec::with_capacity(cues.len() + 1);
    masses.push(current);
    masses.extend(
        cues.iter()
            .filter_map(|&c| model.entry(c, dim))
            .map(|e| e.bpa),
    );
    combine_all(&masses)
}

/// Combine the current indices with the evidence of `cues` and predict the
/// next holders, expressed in the current turn's role frame.
pub fn step_predict(
    state: &TrackerState,
    cues: &[CueKind],
    model: &CueModel,
) -> Result<Prediction> {
    let task_new = combine_with_cues(state.task, cues, model, Dimension::Task)?;
    let dialogue_new = combine_with_cues(state.dialogue, cues, model, Dimension::Dialogue)?;
    Ok(Prediction {
        task_new,
        dialogue_new,
        task: task_new.predicted_holder(),
        dialogue: dialogue_new.predicted_holder(),
    })
}

/// Shift the observed cues' bpa's in `dim` toward `actual` after a
/// misprediction. Cues without a bpa in `dim` are skipped.
pub fn adjust_bpa(
    model: &mut CueModel,
    cues: &[CueKind],
    dim: Dimension,
    actual: Role,
    config: &TrackerConfig,
) {
    let floor = config.min_uncommitted;
    for &cue in cues {
        let Some(entry) = model.entry_mut(cue, dim) else {
            continue;
        };
        match config.method {
            AdjustmentMethod::ConstantIncrement => {
                entry.bpa.shift_from_theta(actual, config.delta, floor);
            }
            AdjustmentMethod::ConstantIncrementWithCounter => {
                entry.counter -= 1;
                if entry.counter < 0 {
                    entry.bpa.shift_from_theta(actual, config.delta, floor);
                    entry.counter = 0;
                }
            }
            AdjustmentMethod::VariableIncrementWithCounter => {
                entry.counter -= 1;
                let exponent = entry.counter.clamp(0, i32::MAX as i64 - 1) as i32 + 1;
                let increment = config.delta * 0.5f64.powi(exponent);
                entry.bpa.shift_from_theta(actual, increment, floor);
            }
        }
    }
}

/// Credit the observed cues' counters in `dim` after a correct prediction.
pub fn credit_counters(
    model: &mut CueModel,
    cues: &[CueKind],
    dim: Dimension,
    method: AdjustmentMethod,
) {
    if !method.uses_counters() {
        return;
    }
    for &cue in cues {
        if let Some(entry) = model.entry_mut(cue, dim) {
            entry.counter += 1;
        }
    }
}

/// Bayesian index with `strength` on the actual holder.
pub fn reset_current(actual: Role, strength: f64) -> Result<MassFunction> {
    if !(strength > 0.0 && strength < 1.0) {
        return Err(Error::domain(format!(
            "reset strength {strength} outside (0, 1)"
        )));
    }
    MassFunction::favoring(actual, strength)
}

/// Re-express an index in the next turn's frame, where speaker and hearer
/// have exchanged places.
pub fn swap_frame(m: &MassFunction) -> MassFunction {
    m.swapped()
}

/// Fraction of correct predictions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
}

impl Accuracy {
    pub fn from_flags(flags: impl IntoIterator<Item = bool>) -> Self {
        flags.into_iter().fold(Accuracy::default(), |mut a, ok| {
            a.total += 1;
            a.correct += ok as usize;
            a
        })
    }

    /// Zero when nothing was predicted.
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    pub fn percent(&self) -> f64 {
        self.fraction() * 100.0
    }

    pub fn merge(self, other: Accuracy) -> Accuracy {
        Accuracy {
            correct: self.correct + other.correct,
            total: self.total + other.total,
        }
    }
}

impl fmt::Display for Accuracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} ({:.1}%)",
            self.correct,
            self.total,
            self.percent()
        )
    }
}

/// Prediction outcome for one initiative at one prediction point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimOutcome {
    pub predicted: Role,
    pub predicted_agent: AgentId,
    /// Holder annotated on the predicting turn.
    pub current: AgentId,
    /// Holder annotated on the following turn.
    pub actual: AgentId,
    pub correct: bool,
}

impl DimOutcome {
    pub fn shifted(&self) -> bool {
        self.current != self.actual
    }
}

/// One prediction point: turn `turn` of a dialogue predicting turn `turn + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnRecord {
    pub dialogue_id: String,
    /// Zero-based index of the predicting turn.
    pub turn: usize,
    pub cues: Vec<CueKind>,
    pub ti: DimOutcome,
    pub di: DimOutcome,
}

impl TurnRecord {
    pub fn outcome(&self, dim: Dimension) -> &DimOutcome {
        match dim {
            Dimension::Task => &self.ti,
            Dimension::Dialogue => &self.di,
        }
    }
}

/// Per-turn records from one pass over a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunResult {
    pub records: Vec<TurnRecord>,
}

impl RunResult {
    pub fn correctness(&self, dim: Dimension) -> Vec<bool> {
        self.records
            .iter()
            .map(|r| r.outcome(dim).correct)
            .collect()
    }

    pub fn accuracy(&self, dim: Dimension) -> Accuracy {
        Accuracy::from_flags(self.records.iter().map(|r| r.outcome(dim).correct))
    }

    pub fn task_accuracy(&self) -> Accuracy {
        self.accuracy(Dimension::Task)
    }

    pub fn dialogue_accuracy(&self) -> Accuracy {
        self.accuracy(Dimension::Dialogue)
    }

    pub fn extend(&mut self, other: RunResult) {
        self.records.extend(other.records);
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: CueModel,
    pub run: RunResult,
}

/// Whether a tracking pass updates the model and how it treats its indices
/// after a misprediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PassMode {
    Learn,
    Frozen { teacher_forcing: bool },
}

pub(crate) fn track(
    corpus: &Corpus,
    model: &mut CueModel,
    config: &TrackerConfig,
    mode: PassMode,
) -> Result<RunResult> {
    config.validate()?;
    let learn = mode == PassMode::Learn;
    let reset_on_error = match mode {
        PassMode::Learn => true,
        PassMode::Frozen { teacher_forcing } => teacher_forcing,
    };
    let mut run = RunResult {
        records: Vec::with_capacity(corpus.prediction_points()),
    };
    for dialogue in &corpus.dialogues {
        let mut state = TrackerState::initial(config, dialogue)?;
        for (t, pair) in dialogue.turns.windows(2).enumerate() {
            let (cur, next) = (&pair[0], &pair[1]);
            let prediction = step_predict(&state, &cur.cues, model)?;
            let mut new = [prediction.task_new, prediction.dialogue_new];
            let mut outcomes = Vec::with_capacity(2);
            for (slot, dim) in Dimension::BOTH.into_iter().enumerate() {
                let predicted = prediction.role(dim);
                let actual_agent = next.holder(dim);
                let actual = cur.role_of(actual_agent)?;
                let correct = predicted == actual;
                if correct {
                    if learn {
                        credit_counters(model, &cur.cues, dim, config.method);
                    }
                } else {
                    if learn {
                        adjust_bpa(model, &cur.cues, dim, actual, config);
                    }
                    if reset_on_error {
                        new[slot] = reset_current(actual, config.reset_strength)?;
                    }
                }
                outcomes.push(DimOutcome {
                    predicted,
                    predicted_agent: cur.agent_of(predicted).clone(),
                    current: cur.holder(dim).clone(),
                    actual: actual_agent.clone(),
                    correct,
                });
            }
            let di = outcomes.pop().expect("two outcomes");
            let ti = outcomes.pop().expect("two outcomes");
            run.records.push(TurnRecord {
                dialogue_id: dialogue.id.clone(),
                turn: t,
                cues: cur.cues.clone(),
                ti,
                di,
            });
            state = TrackerState {
                task: swap_frame(&new[0]),
                dialogue: swap_frame(&new[1]),
            };
        }
    }
    Ok(run)
}

/// Train a fresh model on `corpus`.
pub fn train(corpus: &Corpus, config: &TrackerConfig) -> Result<TrainOutcome> {
    train_from(CueModel::new(), corpus, config)
}

/// Continue training `model` with one more pass over `corpus`.
pub fn train_from(
    mut model: CueModel,
    corpus: &Corpus,
    config: &TrackerConfig,
) -> Result<TrainOutcome> {
    let run = track(corpus, &mut model, config, PassMode::Learn)?;
    Ok(TrainOutcome { model, run })
}

/// Δ values 0.025, 0.050, ..., 0.475.
pub fn default_deltas() -> Vec<f64> {
    (0..19).map(|i| 0.025 + 0.025 * i as f64).collect()
}

/// Inclusive grid `from, from + step, ...` up to `to`.
pub fn delta_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
        || to
            .partial_cmp(&from)
            .is_none_or(|o| o == std::cmp::Ordering::Less)
        || !from.is_finite()
        || !to.is_finite()
    {
        return Err(Error::Config(format!(
            "invalid sweep range from={from} to={to} step={step}"
        )));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + step * i as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Accuracy of one training pass over the whole corpus.
    Train,
    /// Leave-one-pair-out cross-validated accuracy.
    CrossValidate { teacher_forcing: bool },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub task: Accuracy,
    pub dialogue: Accuracy,
}

/// One independent run per Δ, reported in ascending Δ order.
pub fn sweep(
    corpus: &Corpus,
    base: &TrackerConfig,
    method: AdjustmentMethod,
    deltas: &[f64],
    mode: SweepMode,
) -> Result<Vec<SweepRow>> {
    if deltas.is_empty() {
        return Err(Error::Config("empty delta list".into()));
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .par_iter()
        .map(|&delta| {
            let config = TrackerConfig {
                delta,
                method,
                ..base.clone()
            };
            let run = match mode {
                SweepMode::Train => train(corpus, &config)?.run,
                SweepMode::CrossValidate { teacher_forcing } => {
                    evalstats::cross_validate(corpus, &config, teacher_forcing)?.aggregate
                }
            };
            Ok(SweepRow {
                delta,
                task: run.task_accuracy(),
                dialogue: run.dialogue_accuracy(),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("delta,task_accuracy,dialogue_accuracy\n");
    for r in rows {
        out.push_str(&format!(
            "{:.6},{:.6},{:.6}\n",
            r.delta,
            r.task.fraction(),
            r.dialogue.fraction()
        ));
    }
    out
}

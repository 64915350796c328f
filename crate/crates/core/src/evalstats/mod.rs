//! Evaluation of trained models, the no-cue baseline, cross-validation,
//! error and comparison reports, and the agreement and significance
//! statistics used to judge them.

mod agreement;
mod significance;
pub mod special;

use rayon::prelude::*;

pub use agreement::{kappa, Kappa, RatingMatrix};
pub use significance::{cochran_q, CochranQ, OutcomeMatrix};

use crate::corpus::{distribution_report, partition_by_pair, AgentId, Corpus};
use crate::cues::{CueKind, CueModel, Dimension};
use crate::error::{Error, Result};
use crate::tracker::{self, Accuracy, DimOutcome, PassMode, RunResult, TrackerConfig, TurnRecord};

/// Run the tracker over `corpus` with `model` held fixed.
///
/// With `teacher_forcing` the indices are reset toward the annotated holder
/// after each misprediction, as during training; without it the tracker
/// runs on its own predictions.
pub fn evaluate(
    corpus: &Corpus,
    model: &CueModel,
    config: &TrackerConfig,
    teacher_forcing: bool,
) -> Result<RunResult> {
    let mut frozen = model.clone();
    tracker::track(
        corpus,
        &mut frozen,
        config,
        PassMode::Frozen { teacher_forcing },
    )
}

/// Predict that each initiative stays with its current holder.
pub fn baseline_run(corpus: &Corpus) -> Result<RunResult> {
    let mut run = RunResult::default();
    for d in &corpus.dialogues {
        for (t, pair) in d.turns.windows(2).enumerate() {
            let (cur, next) = (&pair[0], &pair[1]);
            let outcome = |dim: Dimension| -> Result<DimOutcome> {
                let current = cur.holder(dim).clone();
                let actual = next.holder(dim).clone();
                Ok(DimOutcome {
                    predicted: cur.role_of(&current)?,
                    predicted_agent: current.clone(),
                    correct: current == actual,
                    current,
                    actual,
                })
            };
            run.records.push(TurnRecord {
                dialogue_id: d.id.clone(),
                turn: t,
                cues: cur.cues.clone(),
                ti: outcome(Dimension::Task)?,
                di: outcome(Dimension::Dialogue)?,
            });
        }
    }
    Ok(run)
}

#[derive(Debug, Clone)]
pub struct Fold {
    pub key: String,
    pub training_dialogues: usize,
    pub run: RunResult,
}

#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub folds: Vec<Fold>,
    /// Fold runs concatenated in fold order.
    pub aggregate: RunResult,
}

impl CrossValidation {
    /// Per-fold table: `fold,dim,correct,total,accuracy`, then the aggregate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fold,dim,correct,total,accuracy\n");
        let rows = self
            .folds
            .iter()
            .map(|f| (f.key.as_str(), &f.run))
            .chain(std::iter::once(("all", &self.aggregate)));
        for (key, run) in rows {
            for dim in Dimension::BOTH {
                let a = run.accuracy(dim);
                out.push_str(&format!(
                    "{key},{dim},{},{},{:.6}\n",
                    a.correct,
                    a.total,
                    a.fraction()
                ));
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:<20}{:>24}{:>24}\n", "fold", "task", "dialogue");
        for f in &self.folds {
            out.push_str(&format!(
                "{:<20}{:>24}{:>24}\n",
                f.key,
                f.run.task_accuracy().to_string(),
                f.run.dialogue_accuracy().to_string()
            ));
        }
        out.push_str(&format!(
            "{:<20}{:>24}{:>24}\n",
            "all",
            self.aggregate.task_accuracy().to_string(),
            self.aggregate.dialogue_accuracy().to_string()
        ));
        out
    }
}

/// Leave-one-pair-out cross-validation: for each pair group, train a fresh
/// model on the remaining dialogues and evaluate it on the group.
pub fn cross_validate(
    corpus: &Corpus,
    config: &TrackerConfig,
    teacher_forcing: bool,
) -> Result<CrossValidation> {
    config.validate()?;
    let groups = partition_by_pair(corpus);
    if groups.len() < 2 {
        return Err(Error::domain(format!(
            "cross-validation needs at least two dialogue pairs, corpus {} has {}",
            corpus.name,
            groups.len()
        )));
    }
    let folds = groups
        .par_iter()
        .map(|(key, held_out)| {
            let training = Corpus {
                name: format!("{}-without-{key}", corpus.name),
                dialogues: corpus
                    .dialogues
                    .iter()
                    .filter(|d| d.pair_key() != *key)
                    .cloned()
                    .collect(),
            };
            let trained = tracker::train(&training, config)?;
            let run = evaluate(held_out, &trained.model, config, teacher_forcing)?;
            Ok(Fold {
                key: key.clone(),
                training_dialogues: training.dialogues.len(),
                run,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut aggregate = RunResult::default();
    for f in &folds {
        aggregate.extend(f.run.clone());
    }
    Ok(CrossValidation { folds, aggregate })
}

/// Error and total counts for prediction points carrying one cue.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCell {
    pub shift_errors: usize,
    pub shift_total: usize,
    pub no_shift_errors: usize,
    pub no_shift_total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorReport {
    /// One row per cue and dimension the cue can affect, in canonical order.
    pub rows: Vec<(CueKind, Dimension, ErrorCell)>,
}

impl ErrorReport {
    pub fn cell(&self, cue: CueKind, dim: Dimension) -> Option<&ErrorCell> {
        self.rows
            .iter()
            .find(|(c, d, _)| *c == cue && *d == dim)
            .map(|(_, _, cell)| cell)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cue,dim,shift_err,shift_tot,noshift_err,noshift_tot\n");
        for (cue, dim, c) in &self.rows {
            out.push_str(&format!(
                "{cue},{dim},{},{},{},{}\n",
                c.shift_errors, c.shift_total, c.no_shift_errors, c.no_shift_total
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for dim in Dimension::BOTH {
            out.push_str(&format!(
                "{} initiative errors\n{:<34}{:>14}{:>14}\n",
                dim, "cue", "shift", "no-shift"
            ));
            for (cue, d, c) in self.rows.iter().filter(|(_, d, _)| *d == dim) {
                debug_assert_eq!(*d, dim);
                if c.shift_total + c.no_shift_total == 0 {
                    continue;
                }
                out.push_str(&format!(
                    "{:<34}{:>14}{:>14}\n",
                    cue.as_str(),
                    format!("{}/{}", c.shift_errors, c.shift_total),
                    format!("{}/{}", c.no_shift_errors, c.no_shift_total)
                ));
            }
            out.push('\n');
        }
        out
    }
}

/// Tally errors per cue, split by whether the initiative actually shifted.
pub fn error_report(run: &RunResult, corpus: &Corpus) -> Result<ErrorReport> {
    let points = corpus
        .dialogues
        .iter()
        .flat_map(|d| d.turns.windows(2).enumerate().map(move |(t, w)| (d, t, w)));
    let mut n = 0;
    let mut rows: Vec<(CueKind, Dimension, ErrorCell)> = CueKind::ALL
        .into_iter()
        .flat_map(|c| {
            Dimension::BOTH
                .into_iter()
                .filter(move |d| c.affects(*d))
                .map(move |d| (c, d, ErrorCell::default()))
        })
        .collect();
    for ((d, t, w), rec) in points.zip(&run.records) {
        n += 1;
        if rec.dialogue_id != d.id || rec.turn != t {
            return Err(Error::domain(format!(
                "run record {n} ({} turn {}) does not line up with corpus dialogue {} turn {t}",
                rec.dialogue_id, rec.turn, d.id
            )));
        }
        for (cue, dim, cell) in rows.iter_mut() {
            if !w[0].cues.contains(cue) {
                continue;
            }
            let shifted = w[0].holder(*dim) != w[1].holder(*dim);
            let wrong = !rec.outcome(*dim).correct;
            if shifted {
                cell.shift_total += 1;
                cell.shift_errors += wrong as usize;
            } else {
                cell.no_shift_total += 1;
                cell.no_shift_errors += wrong as usize;
            }
        }
    }
    if n != run.records.len() || n != corpus.prediction_points() {
        return Err(Error::domain(format!(
            "run has {} records but corpus {} has {} prediction points",
            run.records.len(),
            corpus.name,
            corpus.prediction_points()
        )));
    }
    Ok(ErrorReport { rows })
}

/// One corpus in a baseline-versus-trained comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub corpus: String,
    pub turns: usize,
    pub expert_task: usize,
    pub expert_dialogue: usize,
    pub baseline_task: Accuracy,
    pub baseline_dialogue: Accuracy,
    pub trained_task: Accuracy,
    pub trained_dialogue: Accuracy,
    pub significance_task: Option<CochranQ>,
    pub significance_dialogue: Option<CochranQ>,
}

impl ComparisonRow {
    pub fn from_runs(
        corpus: &Corpus,
        expert: &AgentId,
        baseline: &RunResult,
        trained: &RunResult,
    ) -> Result<Self> {
        let dist = distribution_report(corpus, expert)?;
        if baseline.records.len() != trained.records.len() {
            return Err(Error::domain("baseline and trained runs differ in length"));
        }
        let sig = |dim: Dimension| -> Option<CochranQ> {
            OutcomeMatrix::from_columns(&[baseline.correctness(dim), trained.correctness(dim)])
                .ok()
                .map(|m| cochran_q(&m))
        };
        Ok(ComparisonRow {
            corpus: corpus.name.clone(),
            turns: dist.total(),
            expert_task: dist.focus_task(),
            expert_dialogue: dist.focus_dialogue(),
            baseline_task: baseline.task_accuracy(),
            baseline_dialogue: baseline.dialogue_accuracy(),
            trained_task: trained.task_accuracy(),
            trained_dialogue: trained.dialogue_accuracy(),
            significance_task: sig(Dimension::Task),
            significance_dialogue: sig(Dimension::Dialogue),
        })
    }

    fn dim(&self, dim: Dimension) -> (usize, Accuracy, Accuracy, Option<CochranQ>) {
        match dim {
            Dimension::Task => (
                self.expert_task,
                self.baseline_task,
                self.trained_task,
                self.significance_task,
            ),
            Dimension::Dialogue => (
                self.expert_dialogue,
                self.baseline_dialogue,
                self.trained_dialogue,
                self.significance_dialogue,
            ),
        }
    }

    pub fn expert_percent(&self, dim: Dimension) -> f64 {
        let (expert, ..) = self.dim(dim);
        if self.turns == 0 {
            0.0
        } else {
            expert as f64 / self.turns as f64 * 100.0
        }
    }

    /// Improvement as displayed: difference of the one-decimal percentages.
    pub fn improvement_display(&self, dim: Dimension) -> f64 {
        let (_, base, trained, _) = self.dim(dim);
        round1(trained.percent()) - round1(base.percent())
    }

    /// Unrounded improvement in percentage points.
    pub fn improvement_points(&self, dim: Dimension) -> f64 {
        let (_, base, trained, _) = self.dim(dim);
        trained.percent() - base.percent()
    }
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// `corpus,dim,expert_pct,baseline_pct,trained_pct,improvement_pts`
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("corpus,dim,expert_pct,baseline_pct,trained_pct,improvement_pts\n");
    for r in rows {
        for dim in Dimension::BOTH {
            let (_, base, trained, _) = r.dim(dim);
            out.push_str(&format!(
                "{},{dim},{:.6},{:.6},{:.6},{:.6}\n",
                r.corpus,
                r.expert_percent(dim),
                base.percent(),
                trained.percent(),
                r.improvement_points(dim)
            ));
        }
    }
    out
}

/// Human-readable comparison with one column pair per corpus.
pub fn comparison_text(rows: &[ComparisonRow], trained_label: &str) -> String {
    let mut out = String::new();
    let width = 18;
    out.push_str(&format!("{:<16}", "corpus"));
    for r in rows {
        out.push_str(&format!(
            "{:>w$}",
            format!("{} ({})", r.corpus, r.turns),
            w = 2 * width
        ));
    }
    out.push('\n');
    out.push_str(&format!("{:<16}", ""));
    for _ in rows {
        out.push_str(&format!("{:>width$}{:>width$}", "task", "dialogue"));
    }
    out.push('\n');

    let line = |label: &str, cell: &dyn Fn(&ComparisonRow, Dimension) -> String| {
        let mut s = format!("{label:<16}");
        for r in rows {
            for dim in Dimension::BOTH {
                s.push_str(&format!("{:>width$}", cell(r, dim)));
            }
        }
        s.push('\n');
        s
    };
    out.push_str(&line("Expert control", &|r, d| {
        format!("{} ({:.1}%)", r.dim(d).0, r.expert_percent(d))
    }));
    out.push_str(&line("No cue", &|r, d| {
        let a = r.dim(d).1;
        format!("{} ({:.1}%)", a.correct, a.percent())
    }));
    out.push_str(&line(trained_label, &|r, d| {
        let a = r.dim(d).2;
        format!("{} ({:.1}%)", a.correct, a.percent())
    }));
    out.push_str(&line("Improvement", &|r, d| {
        format!("{:.1}%", r.improvement_display(d))
    }));
    out.push_str(&line("Cochran Q p", &|r, d| match r.dim(d).3 {
        Some(q) => format!("{:.2e}", q.p),
        None => "n/a".into(),
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_corpus;
    use crate::evidence::MassFunction;

    fn corpus(text: &str) -> Corpus {
        parse_corpus(text, "t").unwrap()
    }

    const ALTERNATING_DI: &str = "corpus c\ndialogue d1 agents=a,b\n\
turn speaker=a ti=a di=a cues=-\nturn speaker=b ti=a di=b cues=-\n\
turn speaker=a ti=a di=a cues=-\nturn speaker=b ti=a di=b cues=-\nend\n";

    #[test]
    fn baseline_cases() {
        let run = baseline_run(&corpus(ALTERNATING_DI)).unwrap();
        assert_eq!(
            run.task_accuracy(),
            Accuracy {
                correct: 3,
                total: 3
            }
        );
        assert_eq!(
            run.dialogue_accuracy(),
            Accuracy {
                correct: 0,
                total: 3
            }
        );
    }

    #[test]
    fn baseline_table_four_replica() {
        // One long dialogue with 1043 turns gives 1042 prediction points;
        // 33 task and 262 dialogue holder changes.
        let mut text = String::from("corpus replica\ndialogue d1 agents=system,manager\n");
        let (mut ti, mut di) = ("manager", "manager");
        let flip = |x: &str| if x == "manager" { "system" } else { "manager" };
        for t in 0..1043 {
            if t > 0 && t <= 33 {
                ti = flip(ti);
            }
            if t > 0 && t <= 262 {
                di = flip(di);
            }
            let speaker = if t % 2 == 0 { "manager" } else { "system" };
            text.push_str(&format!("turn speaker={speaker} ti={ti} di={di} cues=-\n"));
        }
        text.push_str("end\n");
        let run = baseline_run(&corpus(&text)).unwrap();
        assert_eq!(
            run.task_accuracy(),
            Accuracy {
                correct: 1009,
                total: 1042
            }
        );
        assert_eq!(
            run.dialogue_accuracy(),
            Accuracy {
                correct: 780,
                total: 1042
            }
        );
        assert_eq!(format!("{:.1}", run.task_accuracy().percent()), "96.8");
        assert_eq!(format!("{:.1}", run.dialogue_accuracy().percent()), "74.9");
    }

    #[test]
    fn vacuous_model_matches_baseline_when_anchored() {
        let c = corpus(ALTERNATING_DI);
        let config = TrackerConfig {
            anchor_first_turn: true,
            ..Default::default()
        };
        let eval = evaluate(&c, &CueModel::new(), &config, true).unwrap();
        let base = baseline_run(&c).unwrap();
        assert_eq!(
            eval.correctness(Dimension::Task),
            base.correctness(Dimension::Task)
        );
        assert_eq!(
            eval.correctness(Dimension::Dialogue),
            base.correctness(Dimension::Dialogue)
        );
    }

    #[test]
    fn evaluate_leaves_model_untouched() {
        let c = corpus(ALTERNATING_DI);
        let mut model = CueModel::new();
        model
            .entry_mut(CueKind::Prompt, Dimension::Dialogue)
            .unwrap()
            .bpa = MassFunction::new(0.0, 0.35, 0.65).unwrap();
        let before = model.to_text();
        evaluate(&c, &model, &TrackerConfig::default(), true).unwrap();
        evaluate(&c, &model, &TrackerConfig::default(), false).unwrap();
        assert_eq!(model.to_text(), before);
    }

    #[test]
    fn cross_validation_needs_two_groups() {
        assert!(cross_validate(&corpus(ALTERNATING_DI), &TrackerConfig::default(), true).is_err());
    }

    #[test]
    fn symmetric_halves_give_equal_folds() {
        let text = "corpus c\n\
dialogue d1 agents=a,b pair=x\nturn speaker=a ti=a di=a cues=end_silence\nturn speaker=b ti=b di=b cues=-\nend\n\
dialogue d2 agents=a,b pair=y\nturn speaker=a ti=a di=a cues=end_silence\nturn speaker=b ti=b di=b cues=-\nend\n";
        let cv = cross_validate(&corpus(text), &TrackerConfig::default(), true).unwrap();
        assert_eq!(cv.folds.len(), 2);
        assert_eq!(
            cv.folds[0].run.task_accuracy(),
            cv.folds[1].run.task_accuracy()
        );
        assert_eq!(
            cv.folds[0].run.dialogue_accuracy(),
            cv.folds[1].run.dialogue_accuracy()
        );
        assert_eq!(cv.aggregate.records.len(), 2);
        assert!(cv
            .to_csv()
            .starts_with("fold,dim,correct,total,accuracy\nx,task,"));
    }

    #[test]
    fn error_report_counts() {
        let text = "corpus c\ndialogue d1 agents=a,b\n\
turn speaker=a ti=a di=a cues=invalidity:action\n\
turn speaker=b ti=b di=b cues=invalidity:action\n\
turn speaker=a ti=b di=b cues=-\nend\n";
        let c = corpus(text);
        let run = baseline_run(&c).unwrap();
        let report = error_report(&run, &c).unwrap();
        let task = report
            .cell(CueKind::InvalidAction, Dimension::Task)
            .unwrap();
        assert_eq!(
            *task,
            ErrorCell {
                shift_errors: 1,
                shift_total: 1,
                no_shift_errors: 0,
                no_shift_total: 1
            }
        );
        let never = report.cell(CueKind::Prompt, Dimension::Dialogue).unwrap();
        assert_eq!(*never, ErrorCell::default());
        assert!(report
            .cell(CueKind::DomainQuestion, Dimension::Task)
            .is_none());

        let other = corpus(ALTERNATING_DI);
        assert!(error_report(&baseline_run(&other).unwrap(), &c).is_err());
    }

    #[test]
    fn comparison_rounding_matches_table_convention() {
        let row = ComparisonRow {
            corpus: "replica".into(),
            turns: 1042,
            expert_task: 41,
            expert_dialogue: 311,
            baseline_task: Accuracy {
                correct: 1009,
                total: 1042,
            },
            baseline_dialogue: Accuracy {
                correct: 780,
                total: 1042,
            },
            trained_task: Accuracy {
                correct: 1033,
                total: 1042,
            },
            trained_dialogue: Accuracy {
                correct: 915,
                total: 1042,
            },
            significance_task: None,
            significance_dialogue: None,
        };
        assert_eq!(
            format!("{:.1}", row.improvement_display(Dimension::Task)),
            "2.3"
        );
        assert_eq!(
            format!("{:.1}", row.improvement_display(Dimension::Dialogue)),
            "12.9"
        );
        assert_eq!(format!("{:.1}", row.trained_task.percent()), "99.1");
        assert_eq!(format!("{:.1}", row.baseline_task.percent()), "96.8");
        let text = comparison_text(std::slice::from_ref(&row), "const-counter");
        assert!(text.contains("1033 (99.1%)"), "{text}");
        assert!(text.contains("12.9%"), "{text}");
        let csv = comparison_csv(&[row]);
        assert!(csv.starts_with("corpus,dim,expert_pct,baseline_pct,trained_pct,improvement_pts\nreplica,task,3.934741,96.833013,99.136276,2.303263\n"), "{csv}");
    }

    #[test]
    fn perfect_predictors_improve_nothing() {
        let c = corpus("corpus c\ndialogue d1 agents=a,b\nturn speaker=a ti=a di=a cues=-\nturn speaker=b ti=a di=a cues=-\nend\n");
        let base = baseline_run(&c).unwrap();
        let row = ComparisonRow::from_runs(&c, &AgentId::new("a").unwrap(), &base, &base).unwrap();
        assert_eq!(row.improvement_display(Dimension::Task), 0.0);
        assert_eq!(row.improvement_display(Dimension::Dialogue), 0.0);
        assert_eq!(row.significance_dialogue.unwrap().p, 1.0);
    }
}

//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{distribution_report, parse_corpus, partition_by_pair, AgentId, Corpus};
use crate::cues::{CueModel, Dimension};
use crate::error::{Error, Result};
use crate::evalstats::{
    baseline_run, cochran_q, comparison_csv, comparison_text, cross_validate, error_report,
    evaluate, kappa, ComparisonRow, OutcomeMatrix, RatingMatrix,
};
use crate::synth::{gen_synthetic, SyntheticConfig};
use crate::tracker::{
    delta_grid, sweep, sweep_csv, train, AdjustmentMethod, RunResult, SweepMode, TrackerConfig,
};

pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "initrack",
    version,
    about = "Track task and dialogue initiative from annotated cues"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a corpus file and report its size.
    Validate(CorpusOnly),
    /// Count turns by task and dialogue initiative holder.
    Distribution(DistributionArgs),
    /// Train cue bpa's on a corpus and write the model.
    Train(TrainArgs),
    /// Evaluate a saved model on a corpus.
    Eval(EvalArgs),
    /// Accuracy of predicting that initiative never changes hands.
    Baseline(CorpusOnly),
    /// Leave-one-pair-out cross-validation.
    Xval(XvalArgs),
    /// Train once per increment constant and tabulate accuracies.
    Sweep(SweepArgs),
    /// Per-cue prediction errors split by shift and no-shift.
    ReportErrors(ReportErrorsArgs),
    /// Compare the baseline with cue-based prediction across corpora.
    Compare(CompareArgs),
    /// Multi-rater kappa from a CSV of category labels.
    Kappa(KappaArgs),
    /// Cochran's Q for matched binary outcomes.
    CochranQ(CochranArgs),
    /// Write a seeded synthetic corpus.
    GenSynthetic(GenArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Const,
    ConstCounter,
    VarCounter,
}

impl From<MethodArg> for AdjustmentMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Const => AdjustmentMethod::ConstantIncrement,
            MethodArg::ConstCounter => AdjustmentMethod::ConstantIncrementWithCounter,
            MethodArg::VarCounter => AdjustmentMethod::VariableIncrementWithCounter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct Output {
    /// Write results here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct TrackerArgs {
    /// Increment constant for bpa adjustment.
    #[arg(long, default_value_t = 0.35)]
    delta: f64,
    /// Adjustment method.
    #[arg(long, value_enum, default_value = "const-counter")]
    method: MethodArg,
    /// Speaker mass of both initiative indices at dialogue start.
    #[arg(long, default_value_t = 0.5)]
    default_x: f64,
    /// Mass on the actual holder when an index is reset after an error.
    #[arg(long, default_value_t = 0.75)]
    reset_strength: f64,
    /// Mass every adjusted cue bpa keeps uncommitted.
    #[arg(long, default_value_t = 1e-6)]
    min_theta: f64,
    /// Start each dialogue from the annotated holders of its first turn.
    #[arg(long)]
    anchor_first_turn: bool,
    /// Accept --delta values in [0.5, 1).
    #[arg(long)]
    allow_large_delta: bool,
}

impl TrackerArgs {
    fn config(&self, err: &mut dyn Write) -> TrackerConfig {
        if self.allow_large_delta && self.delta >= 0.5 {
            let _ = writeln!(
                err,
                "warning: delta {} is outside the usual range (0, 0.5)",
                self.delta
            );
        }
        TrackerConfig {
            delta: self.delta,
            method: self.method.into(),
            default_task_x: self.default_x,
            default_dialogue_x: self.default_x,
            reset_strength: self.reset_strength,
            min_uncommitted: self.min_theta,
            anchor_first_turn: self.anchor_first_turn,
            allow_large_delta: self.allow_large_delta,
        }
    }
}

#[derive(Debug, Args)]
struct CorpusOnly {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct DistributionArgs {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    /// Agent whose initiative share is reported.
    #[arg(long, value_name = "NAME")]
    focus_agent: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    /// Where to write the trained model.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    #[command(flatten)]
    tracker: TrackerArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    /// Reset indices toward the annotated holder after each error.
    #[arg(long, value_name = "BOOL", default_value_t = true, action = ArgAction::Set)]
    teacher_forcing: bool,
    #[command(flatten)]
    tracker: TrackerArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct XvalArgs {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    #[arg(long, value_name = "BOOL", default_value_t = true, action = ArgAction::Set)]
    teacher_forcing: bool,
    #[command(flatten)]
    tracker: TrackerArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    #[arg(long, default_value_t = 0.025)]
    sweep_from: f64,
    #[arg(long, default_value_t = 0.475)]
    sweep_to: f64,
    #[arg(long, default_value_t = 0.025)]
    sweep_step: f64,
    /// Report cross-validated accuracy instead of training accuracy.
    #[arg(long)]
    xval: bool,
    #[arg(long, value_name = "BOOL", default_value_t = true, action = ArgAction::Set)]
    teacher_forcing: bool,
    #[command(flatten)]
    tracker: TrackerArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ReportErrorsArgs {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    /// Evaluate this model; without it the corpus is cross-validated.
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    #[arg(long, value_name = "BOOL", default_value_t = true, action = ArgAction::Set)]
    teacher_forcing: bool,
    #[command(flatten)]
    tracker: TrackerArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Corpus to compare on; repeat for several.
    #[arg(long, value_name = "PATH", required = true)]
    corpus: Vec<PathBuf>,
    /// Expert agent per corpus, in the same order; one value applies to all.
    #[arg(long, value_name = "NAME", required = true)]
    focus_agent: Vec<String>,
    /// Evaluate this model on every corpus; without it each corpus is
    /// cross-validated.
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    #[arg(long, value_name = "BOOL", default_value_t = true, action = ArgAction::Set)]
    teacher_forcing: bool,
    #[command(flatten)]
    tracker: TrackerArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct KappaArgs {
    /// CSV with one row per item and one category label per rater.
    #[arg(long, value_name = "PATH")]
    ratings: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct CochranArgs {
    /// CSV of 0/1 outcomes, one row per subject and one column per treatment.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["corpus", "model"])]
    outcomes: Option<PathBuf>,
    /// Compare baseline and model predictions on this corpus.
    #[arg(long, value_name = "PATH", requires = "model")]
    corpus: Option<PathBuf>,
    #[arg(long, value_name = "PATH", requires = "corpus")]
    model: Option<PathBuf>,
    #[arg(long, value_name = "BOOL", default_value_t = true, action = ArgAction::Set)]
    teacher_forcing: bool,
    #[command(flatten)]
    tracker: TrackerArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "synthetic")]
    name: String,
    #[arg(long, default_value_t = 16)]
    dialogues: usize,
    #[arg(long, default_value_t = 40)]
    turns: usize,
    /// Number of distinct participant pairs.
    #[arg(long, default_value_t = 8)]
    pairs: usize,
    /// Probability that an observed cue moves the initiative.
    #[arg(long, default_value_t = 0.9)]
    shift_prob: f64,
    /// Write the corpus here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    let corpus = parse_corpus(&read_text(path)?, &path.display().to_string())?;
    corpus.validate()?;
    Ok(corpus)
}

fn load_model(path: &Path) -> Result<CueModel> {
    CueModel::from_text(&read_text(path)?)
}

fn emit(out: &mut dyn Write, target: &Output, text: &str) -> Result<()> {
    match &target.out {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn accuracy_report(run: &RunResult, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = String::from("dim,correct,total,accuracy\n");
            for dim in Dimension::BOTH {
                let a = run.accuracy(dim);
                s.push_str(&format!(
                    "{dim},{},{},{:.6}\n",
                    a.correct,
                    a.total,
                    a.fraction()
                ));
            }
            s
        }
        Format::Text => format!(
            "task accuracy: {}\ndialogue accuracy: {}\n",
            run.task_accuracy(),
            run.dialogue_accuracy()
        ),
    }
}

/// Corpus reordered so that dialogues follow cross-validation fold order.
fn in_fold_order(corpus: &Corpus) -> Corpus {
    Corpus {
        name: corpus.name.clone(),
        dialogues: partition_by_pair(corpus)
            .into_iter()
            .flat_map(|(_, g)| g.dialogues)
            .collect(),
    }
}

fn parse_csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').map(|f| f.trim().to_string()).collect())
        .collect()
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Validate(a) => {
            let c = load_corpus(&a.corpus)?;
            let text = match a.output.format.unwrap_or(Format::Text) {
                Format::Text => format!(
                    "corpus {}: {} dialogues, {} turns, {} prediction points\n",
                    c.name,
                    c.dialogues.len(),
                    c.turn_count(),
                    c.prediction_points()
                ),
                Format::Csv => format!(
                    "corpus,dialogues,turns,prediction_points\n{},{},{},{}\n",
                    c.name,
                    c.dialogues.len(),
                    c.turn_count(),
                    c.prediction_points()
                ),
            };
            emit(out, &a.output, &text)
        }
        Command::Distribution(a) => {
            let c = load_corpus(&a.corpus)?;
            let r = distribution_report(&c, &AgentId::new(a.focus_agent)?)?;
            let text = match a.output.format.unwrap_or(Format::Text) {
                Format::Text => r.to_text(),
                Format::Csv => r.to_csv(),
            };
            emit(out, &a.output, &text)
        }
        Command::Train(a) => {
            let c = load_corpus(&a.corpus)?;
            let config = a.tracker.config(err);
            let trained = train(&c, &config)?;
            fs::write(&a.model, trained.model.to_text())?;
            emit(
                out,
                &a.output,
                &accuracy_report(&trained.run, a.output.format.unwrap_or(Format::Text)),
            )
        }
        Command::Eval(a) => {
            let c = load_corpus(&a.corpus)?;
            let model = load_model(&a.model)?;
            let run = evaluate(&c, &model, &a.tracker.config(err), a.teacher_forcing)?;
            emit(
                out,
                &a.output,
                &accuracy_report(&run, a.output.format.unwrap_or(Format::Text)),
            )
        }
        Command::Baseline(a) => {
            let run = baseline_run(&load_corpus(&a.corpus)?)?;
            emit(
                out,
                &a.output,
                &accuracy_report(&run, a.output.format.unwrap_or(Format::Text)),
            )
        }
        Command::Xval(a) => {
            let c = load_corpus(&a.corpus)?;
            let cv = cross_validate(&c, &a.tracker.config(err), a.teacher_forcing)?;
            let text = match a.output.format.unwrap_or(Format::Csv) {
                Format::Csv => cv.to_csv(),
                Format::Text => cv.to_text(),
            };
            emit(out, &a.output, &text)
        }
        Command::Sweep(a) => {
            let c = load_corpus(&a.corpus)?;
            let config = a.tracker.config(err);
            let deltas = delta_grid(a.sweep_from, a.sweep_to, a.sweep_step)?;
            let mode = if a.xval {
                SweepMode::CrossValidate {
                    teacher_forcing: a.teacher_forcing,
                }
            } else {
                SweepMode::Train
            };
            let rows = sweep(&c, &config, config.method, &deltas, mode)?;
            let text = match a.output.format.unwrap_or(Format::Csv) {
                Format::Csv => sweep_csv(&rows),
                Format::Text => rows
                    .iter()
                    .map(|r| {
                        format!(
                            "delta {:.3}: task {} dialogue {}\n",
                            r.delta, r.task, r.dialogue
                        )
                    })
                    .collect(),
            };
            emit(out, &a.output, &text)
        }
        Command::ReportErrors(a) => {
            let c = load_corpus(&a.corpus)?;
            let config = a.tracker.config(err);
            let (corpus, run) = match &a.model {
                Some(path) => {
                    let run = evaluate(&c, &load_model(path)?, &config, a.teacher_forcing)?;
                    (c, run)
                }
                None => {
                    let cv = cross_validate(&c, &config, a.teacher_forcing)?;
                    (in_fold_order(&c), cv.aggregate)
                }
            };
            let report = error_report(&run, &corpus)?;
            let text = match a.output.format.unwrap_or(Format::Csv) {
                Format::Csv => report.to_csv(),
                Format::Text => report.to_text(),
            };
            emit(out, &a.output, &text)
        }
        Command::Compare(a) => {
            if a.focus_agent.len() != 1 && a.focus_agent.len() != a.corpus.len() {
                return Err(Error::Config(format!(
                    "{} --focus-agent values for {} corpora",
                    a.focus_agent.len(),
                    a.corpus.len()
                )));
            }
            let config = a.tracker.config(err);
            let model = a.model.as_deref().map(load_model).transpose()?;
            let mut rows = Vec::new();
            for (i, path) in a.corpus.iter().enumerate() {
                let c = load_corpus(path)?;
                let expert = AgentId::new(
                    a.focus_agent[if a.focus_agent.len() == 1 { 0 } else { i }].clone(),
                )?;
                let (corpus, trained) = match &model {
                    Some(m) => {
                        let run = evaluate(&c, m, &config, a.teacher_forcing)?;
                        (c, run)
                    }
                    None => {
                        let cv = cross_validate(&c, &config, a.teacher_forcing)?;
                        (in_fold_order(&c), cv.aggregate)
                    }
                };
                let baseline = baseline_run(&corpus)?;
                rows.push(ComparisonRow::from_runs(
                    &corpus, &expert, &baseline, &trained,
                )?);
            }
            let text = match a.output.format.unwrap_or(Format::Csv) {
                Format::Csv => comparison_csv(&rows),
                Format::Text => comparison_text(&rows, config.method.as_str()),
            };
            emit(out, &a.output, &text)
        }
        Command::Kappa(a) => {
            let rows = parse_csv_rows(&read_text(&a.ratings)?);
            let k = kappa(&RatingMatrix::from_labels(&rows)?)?;
            let text = match a.output.format.unwrap_or(Format::Text) {
                Format::Text => format!(
                    "kappa: {:.6}\nobserved agreement: {:.6}\nchance agreement: {:.6}\n",
                    k.kappa, k.observed, k.chance
                ),
                Format::Csv => format!(
                    "kappa,observed,chance\n{:.6},{:.6},{:.6}\n",
                    k.kappa, k.observed, k.chance
                ),
            };
            emit(out, &a.output, &text)
        }
        Command::CochranQ(a) => {
            let tests: Vec<(String, OutcomeMatrix)> = match (&a.outcomes, &a.corpus, &a.model) {
                (Some(path), _, _) => {
                    let rows = parse_csv_rows(&read_text(path)?)
                        .into_iter()
                        .enumerate()
                        .map(|(i, row)| {
                            row.iter()
                                .map(|f| match f.as_str() {
                                    "0" => Ok(false),
                                    "1" => Ok(true),
                                    other => Err(Error::domain(format!(
                                        "row {}: outcome \"{other}\" is not 0 or 1",
                                        i + 1
                                    ))),
                                })
                                .collect::<Result<Vec<bool>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                    vec![("outcomes".into(), OutcomeMatrix::from_rows(rows)?)]
                }
                (None, Some(cpath), Some(mpath)) => {
                    let c = load_corpus(cpath)?;
                    let model = load_model(mpath)?;
                    let trained = evaluate(&c, &model, &a.tracker.config(err), a.teacher_forcing)?;
                    let baseline = baseline_run(&c)?;
                    Dimension::BOTH
                        .into_iter()
                        .map(|dim| {
                            OutcomeMatrix::from_columns(&[
                                baseline.correctness(dim),
                                trained.correctness(dim),
                            ])
                            .map(|m| (dim.to_string(), m))
                        })
                        .collect::<Result<_>>()?
                }
                _ => {
                    return Err(Error::Config(
                        "give either --outcomes or both --corpus and --model".into(),
                    ))
                }
            };
            let format = a.output.format.unwrap_or(Format::Text);
            let mut text = match format {
                Format::Csv => String::from("test,q,df,p\n"),
                Format::Text => String::new(),
            };
            for (label, m) in &tests {
                let r = cochran_q(m);
                match format {
                    Format::Csv => {
                        text.push_str(&format!("{label},{:.6},{},{:.6e}\n", r.q, r.df, r.p))
                    }
                    Format::Text => text.push_str(&format!(
                        "{label}: Q = {:.6}, df = {}, p = {:.6e}\n",
                        r.q, r.df, r.p
                    )),
                }
            }
            emit(out, &a.output, &text)
        }
        Command::GenSynthetic(a) => {
            let config = SyntheticConfig {
                name: a.name,
                dialogues: a.dialogues,
                turns_per_dialogue: a.turns,
                pairs: a.pairs,
                ..SyntheticConfig::cue_driven(a.shift_prob)
            };
            let corpus = gen_synthetic(&config, a.seed)?;
            let text = corpus.to_text();
            match a.out {
                Some(path) => fs::write(path, text)?,
                None => out.write_all(text.as_bytes())?,
            }
            Ok(())
        }
    }
}

/// Parse `argv` and run the selected command. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

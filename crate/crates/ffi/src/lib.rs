//! C ABI over the `initrack` crate.
//!
//! Corpora and models are opaque heap handles released with their `_free`
//! function. Every fallible call returns an [`InitrackStatus`]; on failure
//! [`initrack_last_error`] describes the most recent error on the calling
//! thread. Strings returned by the library are freed with
//! [`initrack_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use initrack::corpus::{parse_corpus, Corpus};
use initrack::cues::CueModel;
use initrack::evalstats::{self, OutcomeMatrix, RatingMatrix};
use initrack::evidence::MassFunction;
use initrack::tracker::{self, AdjustmentMethod, RunResult, TrackerConfig};
use initrack::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitrackStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    TotalConflict = 4,
    UnknownCue = 5,
    Parse = 6,
    ModelLoad = 7,
    Config = 8,
    Degenerate = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitrackMethod {
    Const = 0,
    ConstCounter = 1,
    VarCounter = 2,
}

/// Tracker settings; see [`initrack_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitrackConfig {
    pub delta: f64,
    pub method: InitrackMethod,
    pub default_task_x: f64,
    pub default_dialogue_x: f64,
    pub reset_strength: f64,
    pub min_uncommitted: f64,
    pub anchor_first_turn: bool,
    pub allow_large_delta: bool,
}

/// Masses on speaker, hearer, and the whole frame.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitrackMass {
    pub speaker: f64,
    pub hearer: f64,
    pub theta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InitrackAccuracy {
    pub task_correct: usize,
    pub task_total: usize,
    pub dialogue_correct: usize,
    pub dialogue_total: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitrackKappa {
    pub observed: f64,
    pub chance: f64,
    pub kappa: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitrackCochranQ {
    pub q: f64,
    pub df: usize,
    pub p: f64,
}

/// Parsed corpus.
pub struct InitrackCorpus(Corpus);

/// Cue bpa's and counters.
pub struct InitrackModel(CueModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> InitrackStatus {
    match e {
        Error::Domain(_) => InitrackStatus::Domain,
        Error::TotalConflict => InitrackStatus::TotalConflict,
        Error::UnknownCue(_) => InitrackStatus::UnknownCue,
        Error::Parse { .. } => InitrackStatus::Parse,
        Error::ModelLoad { .. } => InitrackStatus::ModelLoad,
        Error::Config(_) => InitrackStatus::Config,
        Error::Degenerate(_) => InitrackStatus::Degenerate,
        Error::Io(_) => InitrackStatus::Io,
    }
}

struct Failure(InitrackStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(InitrackStatus::NullArgument, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> InitrackStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            InitrackStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            InitrackStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            InitrackStatus::InvalidUtf8,
            format!("{name} is not valid UTF-8"),
        )
    })
}

unsafe fn reference<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

impl From<AdjustmentMethod> for InitrackMethod {
    fn from(m: AdjustmentMethod) -> Self {
        match m {
            AdjustmentMethod::ConstantIncrement => InitrackMethod::Const,
            AdjustmentMethod::ConstantIncrementWithCounter => InitrackMethod::ConstCounter,
            AdjustmentMethod::VariableIncrementWithCounter => InitrackMethod::VarCounter,
        }
    }
}

impl From<InitrackMethod> for AdjustmentMethod {
    fn from(m: InitrackMethod) -> Self {
        match m {
            InitrackMethod::Const => AdjustmentMethod::ConstantIncrement,
            InitrackMethod::ConstCounter => AdjustmentMethod::ConstantIncrementWithCounter,
            InitrackMethod::VarCounter => AdjustmentMethod::VariableIncrementWithCounter,
        }
    }
}

impl From<&TrackerConfig> for InitrackConfig {
    fn from(c: &TrackerConfig) -> Self {
        InitrackConfig {
            delta: c.delta,
            method: c.method.into(),
            default_task_x: c.default_task_x,
            default_dialogue_x: c.default_dialogue_x,
            reset_strength: c.reset_strength,
            min_uncommitted: c.min_uncommitted,
            anchor_first_turn: c.anchor_first_turn,
            allow_large_delta: c.allow_large_delta,
        }
    }
}

impl From<&InitrackConfig> for TrackerConfig {
    fn from(c: &InitrackConfig) -> Self {
        TrackerConfig {
            delta: c.delta,
            method: c.method.into(),
            default_task_x: c.default_task_x,
            default_dialogue_x: c.default_dialogue_x,
            reset_strength: c.reset_strength,
            min_uncommitted: c.min_uncommitted,
            anchor_first_turn: c.anchor_first_turn,
            allow_large_delta: c.allow_large_delta,
        }
    }
}

fn accuracy(run: &RunResult) -> InitrackAccuracy {
    let (t, d) = (run.task_accuracy(), run.dialogue_accuracy());
    InitrackAccuracy {
        task_correct: t.correct,
        task_total: t.total,
        dialogue_correct: d.correct,
        dialogue_total: d.total,
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn initrack_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Fill `out` with the default settings.
///
/// # Safety
/// `out` must be null or point to writable memory for one `InitrackConfig`.
#[no_mangle]
pub unsafe extern "C" fn initrack_config_default(out: *mut InitrackConfig) -> InitrackStatus {
    guard(|| write(out, InitrackConfig::from(&TrackerConfig::default()), "out"))
}

/// Parse corpus text into a new handle stored in `*out`.
///
/// # Safety
/// `text` must be null or a NUL-terminated string; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn initrack_corpus_parse(
    text_ptr: *const c_char,
    out: *mut *mut InitrackCorpus,
) -> InitrackStatus {
    guard(|| {
        let corpus = parse_corpus(text(text_ptr, "text")?, "<ffi>")?;
        corpus.validate()?;
        write(out, Box::into_raw(Box::new(InitrackCorpus(corpus))), "out")
    })
}

/// Number of turns in the corpus, or 0 for a null handle.
///
/// # Safety
/// `corpus` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn initrack_corpus_turn_count(corpus: *const InitrackCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.turn_count())
}

/// # Safety
/// `corpus` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn initrack_corpus_free(corpus: *mut InitrackCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// A model with every bpa vacuous.
#[no_mangle]
pub extern "C" fn initrack_model_new() -> *mut InitrackModel {
    Box::into_raw(Box::new(InitrackModel(CueModel::new())))
}

/// Load a model from its text form.
///
/// # Safety
/// As for [`initrack_corpus_parse`].
#[no_mangle]
pub unsafe extern "C" fn initrack_model_load(
    text_ptr: *const c_char,
    out: *mut *mut InitrackModel,
) -> InitrackStatus {
    guard(|| {
        let model = CueModel::from_text(text(text_ptr, "text")?)?;
        write(out, Box::into_raw(Box::new(InitrackModel(model))), "out")
    })
}

/// Serialize a model. Free the string with [`initrack_string_free`].
///
/// # Safety
/// `model` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn initrack_model_to_text(
    model: *const InitrackModel,
    out: *mut *mut c_char,
) -> InitrackStatus {
    guard(|| {
        let model = reference(model, "model")?;
        let s = CString::new(model.0.to_text()).expect("model text has no NUL");
        write(out, s.into_raw(), "out")
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn initrack_model_free(model: *mut InitrackModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn initrack_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// One training pass over `corpus`, updating `model` in place. Training
/// accuracies are written to `out` when it is not null.
///
/// # Safety
/// Handles must be live; `config` must be null (defaults) or valid; `out`
/// must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn initrack_train(
    corpus: *const InitrackCorpus,
    model: *mut InitrackModel,
    config: *const InitrackConfig,
    out: *mut InitrackAccuracy,
) -> InitrackStatus {
    guard(|| {
        let corpus = reference(corpus, "corpus")?;
        let model = model.as_mut().ok_or_else(|| null("model"))?;
        let config = config
            .as_ref()
            .map_or_else(TrackerConfig::default, TrackerConfig::from);
        let trained = tracker::train_from(model.0.clone(), &corpus.0, &config)?;
        model.0 = trained.model;
        if !out.is_null() {
            out.write(accuracy(&trained.run));
        }
        Ok(())
    })
}

/// Accuracies of a frozen model on `corpus`.
///
/// # Safety
/// As for [`initrack_train`]; `out` must not be null.
#[no_mangle]
pub unsafe extern "C" fn initrack_evaluate(
    corpus: *const InitrackCorpus,
    model: *const InitrackModel,
    config: *const InitrackConfig,
    teacher_forcing: bool,
    out: *mut InitrackAccuracy,
) -> InitrackStatus {
    guard(|| {
        let corpus = reference(corpus, "corpus")?;
        let model = reference(model, "model")?;
        let config = config
            .as_ref()
            .map_or_else(TrackerConfig::default, TrackerConfig::from);
        let run = evalstats::evaluate(&corpus.0, &model.0, &config, teacher_forcing)?;
        write(out, accuracy(&run), "out")
    })
}

/// Accuracies of predicting that initiative never changes hands.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn initrack_baseline(
    corpus: *const InitrackCorpus,
    out: *mut InitrackAccuracy,
) -> InitrackStatus {
    guard(|| {
        let run = evalstats::baseline_run(&reference(corpus, "corpus")?.0)?;
        write(out, accuracy(&run), "out")
    })
}

/// Dempster combination of two mass functions.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn initrack_combine(
    a: *const InitrackMass,
    b: *const InitrackMass,
    out: *mut InitrackMass,
) -> InitrackStatus {
    guard(|| {
        let (a, b) = (reference(a, "a")?, reference(b, "b")?);
        let ma = MassFunction::new(a.speaker, a.hearer, a.theta)?;
        let mb = MassFunction::new(b.speaker, b.hearer, b.theta)?;
        let c = ma.combine(&mb)?;
        write(
            out,
            InitrackMass {
                speaker: c.speaker(),
                hearer: c.hearer(),
                theta: c.theta(),
            },
            "out",
        )
    })
}

/// Multi-rater kappa from a row-major `items x categories` count matrix.
///
/// # Safety
/// `counts` must point to `items * categories` readable values.
#[no_mangle]
pub unsafe extern "C" fn initrack_kappa(
    counts: *const usize,
    items: usize,
    categories: usize,
    out: *mut InitrackKappa,
) -> InitrackStatus {
    guard(|| {
        if counts.is_null() {
            return Err(null("counts"));
        }
        let flat = std::slice::from_raw_parts(counts, items * categories);
        let rows = flat
            .chunks(categories.max(1))
            .map(<[usize]>::to_vec)
            .collect();
        let k = evalstats::kappa(&RatingMatrix::from_counts(rows)?)?;
        write(
            out,
            InitrackKappa {
                observed: k.observed,
                chance: k.chance,
                kappa: k.kappa,
            },
            "out",
        )
    })
}

/// Cochran's Q from a row-major `subjects x treatments` matrix of 0/1 bytes.
///
/// # Safety
/// `outcomes` must point to `subjects * treatments` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn initrack_cochran_q(
    outcomes: *const u8,
    subjects: usize,
    treatments: usize,
    out: *mut InitrackCochranQ,
) -> InitrackStatus {
    guard(|| {
        if outcomes.is_null() {
            return Err(null("outcomes"));
        }
        let flat = std::slice::from_raw_parts(outcomes, subjects * treatments);
        if flat.iter().any(|&b| b > 1) {
            return Err(Failure(
                InitrackStatus::Domain,
                "outcomes must be 0 or 1".into(),
            ));
        }
        let rows = flat
            .chunks(treatments.max(1))
            .map(|r| r.iter().map(|&b| b == 1).collect())
            .collect();
        let r = evalstats::cochran_q(&OutcomeMatrix::from_rows(rows)?);
        write(
            out,
            InitrackCochranQ {
                q: r.q,
                df: r.df,
                p: r.p,
            },
            "out",
        )
    })
}

#[cfg(test)]
mod tests {
    use std::ptr;

    use super::*;

    #[test]
    fn config_round_trips() {
        let c = TrackerConfig::default();
        assert_eq!(TrackerConfig::from(&InitrackConfig::from(&c)), c);
    }

    #[test]
    fn null_arguments_are_reported() {
        let status = unsafe { initrack_corpus_parse(ptr::null(), ptr::null_mut()) };
        assert_eq!(status, InitrackStatus::NullArgument);
        let msg = unsafe { CStr::from_ptr(initrack_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "text is null");
    }
}

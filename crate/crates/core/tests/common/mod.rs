//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::BTreeMap;

use initrack::corpus::{AgentId, Corpus, Dialogue, Turn};
use initrack::cues::{CueKind, CueModel, Dimension};
use initrack::tracker::AdjustmentMethod;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SPEAKER: u8 = 0b01;
pub const HEARER: u8 = 0b10;
pub const THETA: u8 = 0b11;

/// Masses as (speaker, hearer, theta).
pub type Triple = [f64; 3];

fn focal_mass(m: &Triple, set: u8) -> f64 {
    match set {
        SPEAKER => m[0],
        HEARER => m[1],
        THETA => m[2],
        _ => 0.0,
    }
}

/// Dempster's rule by enumerating every pair of focal sets and
/// intersecting them as bitmasks.
pub fn brute_combine(a: &Triple, b: &Triple) -> Option<Triple> {
    let mut joint = [0.0f64; 4];
    for x in [SPEAKER, HEARER, THETA] {
        for y in [SPEAKER, HEARER, THETA] {
            joint[(x & y) as usize] += focal_mass(a, x) * focal_mass(b, y);
        }
    }
    let kappa = joint[0];
    if kappa >= 1.0 {
        return None;
    }
    let k = 1.0 - kappa;
    Some([
        joint[SPEAKER as usize] / k,
        joint[HEARER as usize] / k,
        joint[THETA as usize] / k,
    ])
}

pub fn random_triple(rng: &mut impl Rng) -> Triple {
    let a: f64 = rng.random();
    let b: f64 = rng.random();
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    [lo, hi - lo, 1.0 - hi]
}

const DIALOGUE_ONLY: [&str; 5] = [
    "question:domain",
    "question:evaluation",
    "obligation_fulfilled:discourse",
    "invalidity:belief",
    "ambiguity:belief",
];

/// Straight-line training loop over a plain map of cue parameters.
#[derive(Debug, Clone)]
pub struct OracleTrainer {
    pub delta: f64,
    pub method: AdjustmentMethod,
    pub default_x: f64,
    pub reset: f64,
    pub floor: f64,
    /// (cue token, "task" | "dialogue") -> (masses, counter)
    pub params: BTreeMap<(String, &'static str), (Triple, i64)>,
}

/// One scored turn: (predicted TI is speaker, predicted DI is speaker,
/// TI correct, DI correct).
pub type TraceRow = (bool, bool, bool, bool);

impl OracleTrainer {
    pub fn new(delta: f64, method: AdjustmentMethod, floor: f64) -> Self {
        let mut params = BTreeMap::new();
        for cue in CueKind::ALL {
            let tok = cue.as_str().to_string();
            params.insert((tok.clone(), "dialogue"), ([0.0, 0.0, 1.0], 0));
            if !DIALOGUE_ONLY.contains(&cue.as_str()) {
                params.insert((tok, "task"), ([0.0, 0.0, 1.0], 0));
            }
        }
        OracleTrainer {
            delta,
            method,
            default_x: 0.5,
            reset: 0.75,
            floor,
            params,
        }
    }

    fn adjust(&mut self, key: &(String, &'static str), to_speaker: bool) {
        let delta = self.delta;
        let floor = self.floor;
        let method = self.method;
        let (m, counter) = self.params.get_mut(key).unwrap();
        let amount = match method {
            AdjustmentMethod::ConstantIncrement => Some(delta),
            AdjustmentMethod::ConstantIncrementWithCounter => {
                *counter -= 1;
                if *counter < 0 {
                    *counter = 0;
                    Some(delta)
                } else {
                    None
                }
            }
            AdjustmentMethod::VariableIncrementWithCounter => {
                *counter -= 1;
                let e = if *counter > 0 { *counter } else { 0 };
                Some(delta / 2f64.powi(e as i32 + 1))
            }
        };
        if let Some(amount) = amount {
            let mut moved = m[2] - floor;
            if amount < moved {
                moved = amount;
            }
            if moved < 0.0 {
                moved = 0.0;
            }
            if to_speaker {
                m[0] += moved;
            } else {
                m[1] += moved;
            }
            m[2] -= moved;
        }
    }

    pub fn pass(&mut self, corpus: &Corpus) -> Vec<TraceRow> {
        let mut trace = Vec::new();
        for d in &corpus.dialogues {
            let mut ti: Triple = [self.default_x, 1.0 - self.default_x, 0.0];
            let mut di: Triple = [self.default_x, 1.0 - self.default_x, 0.0];
            for i in 0..d.turns.len() - 1 {
                let cur = &d.turns[i];
                let next = &d.turns[i + 1];
                let mut row = [false; 4];
                for (slot, dim) in ["task", "dialogue"].into_iter().enumerate() {
                    let index = if slot == 0 { ti } else { di };
                    let keys: Vec<(String, &'static str)> = cur
                        .cues
                        .iter()
                        .map(|c| (c.as_str().to_string(), dim))
                        .filter(|k| self.params.contains_key(k))
                        .collect();
                    let mut acc = index;
                    for k in &keys {
                        acc = brute_combine(&acc, &self.params[k].0).expect("no total conflict");
                    }
                    // Ties, up to rounding, go to the speaker.
                    let predict_speaker = acc[1] - acc[0] <= 1e-12;
                    let holder = if slot == 0 {
                        &next.ti_holder
                    } else {
                        &next.di_holder
                    };
                    let actual_speaker = *holder == cur.speaker;
                    let correct = predict_speaker == actual_speaker;
                    if correct {
                        if self.method != AdjustmentMethod::ConstantIncrement {
                            for k in &keys {
                                self.params.get_mut(k).unwrap().1 += 1;
                            }
                        }
                    } else {
                        for k in &keys {
                            self.adjust(k, actual_speaker);
                        }
                        acc = if actual_speaker {
                            [self.reset, 1.0 - self.reset, 0.0]
                        } else {
                            [1.0 - self.reset, self.reset, 0.0]
                        };
                    }
                    let swapped = [acc[1], acc[0], acc[2]];
                    if slot == 0 {
                        ti = swapped;
                    } else {
                        di = swapped;
                    }
                    row[slot] = predict_speaker;
                    row[2 + slot] = correct;
                }
                trace.push((row[0], row[1], row[2], row[3]));
            }
        }
        trace
    }

    /// Largest absolute mass difference to `model`, or `None` when the
    /// entry sets or counters differ.
    pub fn distance(&self, model: &CueModel) -> Option<f64> {
        let mut worst = 0.0f64;
        let mut seen = 0;
        for (cue, dim, entry) in model.entries() {
            let key = (
                cue.as_str().to_string(),
                if dim == Dimension::Task {
                    "task"
                } else {
                    "dialogue"
                },
            );
            let (m, counter) = self.params.get(&key)?;
            if *counter != entry.counter {
                return None;
            }
            let b = &entry.bpa;
            for (x, y) in m.iter().zip([b.speaker(), b.hearer(), b.theta()]) {
                worst = worst.max((x - y).abs());
            }
            seen += 1;
        }
        (seen == self.params.len()).then_some(worst)
    }
}

/// Random corpus with at most `max_turns` turns in total, at least two per
/// dialogue, and random holders and cues.
pub fn random_small_corpus(seed: u64, max_turns: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = AgentId::new("a").unwrap();
    let b = AgentId::new("b").unwrap();
    let mut dialogues = Vec::new();
    let mut budget = rng.random_range(2..=max_turns);
    let mut n = 0;
    while budget >= 2 {
        let len = rng.random_range(2..=budget);
        budget -= len;
        n += 1;
        let turns = (0..len)
            .map(|t| {
                let (speaker, hearer) = if t % 2 == 0 {
                    (a.clone(), b.clone())
                } else {
                    (b.clone(), a.clone())
                };
                let pick = |rng: &mut ChaCha8Rng| {
                    if rng.random_bool(0.5) {
                        a.clone()
                    } else {
                        b.clone()
                    }
                };
                let ti_holder = pick(&mut rng);
                let di_holder = pick(&mut rng);
                let mut cues: Vec<CueKind> = Vec::new();
                for _ in 0..rng.random_range(0..=2) {
                    let c = CueKind::ALL[rng.random_range(0..CueKind::ALL.len())];
                    if !cues.contains(&c) {
                        cues.push(c);
                    }
                }
                Turn {
                    speaker,
                    hearer,
                    ti_holder,
                    di_holder,
                    cues,
                }
            })
            .collect();
        dialogues.push(Dialogue {
            id: format!("r{n}"),
            agents: [a.clone(), b.clone()],
            pair: None,
            turns,
        });
    }
    Corpus {
        name: format!("random{seed}"),
        dialogues,
    }
}

/// Holder changes between consecutive turns, per dimension.
pub fn holder_changes(corpus: &Corpus, dim: Dimension) -> usize {
    corpus
        .dialogues
        .iter()
        .map(|d| {
            d.turns
                .windows(2)
                .filter(|w| w[0].holder(dim) != w[1].holder(dim))
                .count()
        })
        .sum()
}

/// erfc by composite Simpson integration of exp(-t²) over [0, z].
pub fn erfc_simpson(z: f64) -> f64 {
    let n = 200_000;
    let h = z / n as f64;
    let f = |t: f64| (-t * t).exp();
    let mut s = f(0.0) + f(z);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    1.0 - 2.0 / std::f64::consts::PI.sqrt() * s * h / 3.0
}

/// Chi-square upper tail from the closed forms: a finite Poisson sum for
/// even df and the erfc recurrence for odd df.
pub fn chi_square_sf_closed(x: f64, df: usize) -> f64 {
    let half = x / 2.0;
    if df.is_multiple_of(2) {
        let mut term = 1.0;
        let mut sum = 1.0;
        for i in 1..df / 2 {
            term *= half / i as f64;
            sum += term;
        }
        (-half).exp() * sum
    } else {
        let mut p = erfc_simpson(half.sqrt());
        // sf(x, k + 2) = sf(x, k) + (x/2)^(k/2) e^(-x/2) / Γ(k/2 + 1)
        let mut k = 1.0;
        let mut gamma = std::f64::consts::PI.sqrt() / 2.0; // Γ(3/2)
        while (k as usize) < df {
            p += half.powf(k / 2.0) * (-half).exp() / gamma;
            k += 2.0;
            gamma *= k / 2.0;
        }
        p
    }
}

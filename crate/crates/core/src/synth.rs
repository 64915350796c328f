//! Seeded generator for synthetic annotated corpora.
//!
//! Cues are emitted independently per turn. Initiative holders then evolve
//! by explicit shift rules: the first rule whose cue was observed on a turn
//! decides the next holder in its dimension; with no applicable rule the
//! holder changes with a small background probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AgentId, Corpus, Dialogue, Turn};
use crate::cues::{CueKind, Dimension, Effect};
use crate::error::{Error, Result};
use crate::evidence::Role;

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRule {
    pub cue: CueKind,
    pub dimension: Dimension,
    /// Role, relative to the turn carrying the cue, that receives the initiative.
    pub target: Role,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub name: String,
    pub dialogues: usize,
    pub turns_per_dialogue: usize,
    /// Number of distinct pair keys; dialogues are assigned round-robin.
    pub pairs: usize,
    pub agents: [String; 2],
    pub cue_probabilities: Vec<(CueKind, f64)>,
    pub rules: Vec<ShiftRule>,
    pub background_task_shift: f64,
    pub background_dialogue_shift: f64,
}

impl SyntheticConfig {
    /// Preset where every observed cue moves the dialogue initiative toward
    /// the cue's usual recipient with probability `p`, and the explicit and
    /// action-level analytical cues move the task initiative likewise.
    pub fn cue_driven(p: f64) -> Self {
        use CueKind::*;
        let cue_probabilities = vec![
            (ExplicitGiveUp, 0.03),
            (ExplicitTakeOver, 0.03),
            (EndSilence, 0.08),
            (Repetition, 0.04),
            (Prompt, 0.18),
            (DomainQuestion, 0.12),
            (EvaluationQuestion, 0.05),
            (TaskObligationFulfilled, 0.03),
            (DiscourseObligationFulfilled, 0.10),
            (InvalidAction, 0.03),
            (InvalidBelief, 0.03),
            (Suboptimality, 0.01),
            (AmbiguousAction, 0.02),
            (AmbiguousBelief, 0.02),
        ];
        let task_movers = [
            ExplicitGiveUp,
            ExplicitTakeOver,
            TaskObligationFulfilled,
            InvalidAction,
            Suboptimality,
            AmbiguousAction,
        ];
        let mut rules = Vec::new();
        for kind in CueKind::ALL {
            let target = kind.spec().expected_holder;
            if task_movers.contains(&kind) {
                rules.push(ShiftRule {
                    cue: kind,
                    dimension: Dimension::Task,
                    target,
                    probability: p,
                });
            }
            rules.push(ShiftRule {
                cue: kind,
                dimension: Dimension::Dialogue,
                target,
                probability: p,
            });
        }
        SyntheticConfig {
            name: "synthetic".into(),
            dialogues: 16,
            turns_per_dialogue: 40,
            pairs: 8,
            agents: ["expert".into(), "client".into()],
            cue_probabilities,
            rules,
            background_task_shift: 0.02,
            background_dialogue_shift: 0.03,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |what: String, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{what} probability {p} outside [0, 1]"
                )))
            }
        };
        for (cue, p) in &self.cue_probabilities {
            prob(format!("emission of {cue}"), *p)?;
        }
        for r in &self.rules {
            prob(format!("shift rule for {}", r.cue), r.probability)?;
            if r.dimension == Dimension::Task && r.cue.effect() == Effect::DialogueOnly {
                return Err(Error::Config(format!(
                    "{} cannot move the task initiative",
                    r.cue
                )));
            }
        }
        prob("background task shift".into(), self.background_task_shift)?;
        prob(
            "background dialogue shift".into(),
            self.background_dialogue_shift,
        )?;
        if self.dialogues == 0 || self.turns_per_dialogue == 0 || self.pairs == 0 {
            return Err(Error::Config(
                "dialogues, turns per dialogue and pairs must all be positive".into(),
            ));
        }
        if self.agents[0] == self.agents[1] {
            return Err(Error::Config(
                "the two agents must have different names".into(),
            ));
        }
        Ok(())
    }

    fn next_holder(
        &self,
        rng: &mut ChaCha8Rng,
        dim: Dimension,
        turn: &Turn,
        current: &AgentId,
    ) -> AgentId {
        let rule = self
            .rules
            .iter()
            .find(|r| r.dimension == dim && turn.cues.contains(&r.cue));
        match rule {
            Some(r) => {
                if rng.random::<f64>() < r.probability {
                    turn.agent_of(r.target).clone()
                } else {
                    current.clone()
                }
            }
            None => {
                let q = match dim {
                    Dimension::Task => self.background_task_shift,
                    Dimension::Dialogue => self.background_dialogue_shift,
                };
                if rng.random::<f64>() < q {
                    other(turn, current).clone()
                } else {
                    current.clone()
                }
            }
        }
    }
}

fn other<'a>(turn: &'a Turn, agent: &AgentId) -> &'a AgentId {
    if *agent == turn.speaker {
        &turn.hearer
    } else {
        &turn.speaker
    }
}

/// Generate a corpus. Output depends only on `config` and `seed`.
pub fn gen_synthetic(config: &SyntheticConfig, seed: u64) -> Result<Corpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents = [
        AgentId::new(config.agents[0].clone())?,
        AgentId::new(config.agents[1].clone())?,
    ];
    let mut dialogues = Vec::with_capacity(config.dialogues);
    for i in 0..config.dialogues {
        let first = rng.random_range(0..2usize);
        let mut ti = agents[rng.random_range(0..2usize)].clone();
        let mut di = ti.clone();
        let mut turns: Vec<Turn> = Vec::with_capacity(config.turns_per_dialogue);
        for t in 0..config.turns_per_dialogue {
            let speaker = agents[(first + t) % 2].clone();
            let hearer = agents[(first + t + 1) % 2].clone();
            if let Some(prev) = turns.last() {
                ti = config.next_holder(&mut rng, Dimension::Task, prev, &ti);
                di = config.next_holder(&mut rng, Dimension::Dialogue, prev, &di);
            }
            let cues = config
                .cue_probabilities
                .iter()
                .filter(|(_, p)| rng.random::<f64>() < *p)
                .map(|(c, _)| *c)
                .fold(Vec::new(), |mut acc, c| {
                    if !acc.contains(&c) {
                        acc.push(c);
                    }
                    acc
                });
            turns.push(Turn {
                speaker,
                hearer,
                ti_holder: ti.clone(),
                di_holder: di.clone(),
                cues,
            });
        }
        dialogues.push(Dialogue {
            id: format!("s{:03}", i + 1),
            agents: agents.clone(),
            pair: Some(format!("p{}", i % config.pairs + 1)),
            turns,
        });
    }
    let corpus = Corpus {
        name: config.name.clone(),
        dialogues,
    };
    corpus.validate()?;
    Ok(corpus)
}

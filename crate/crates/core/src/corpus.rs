//! Annotated dialogue corpora.
//!
//! File layout (UTF-8, one record per line, `#` starts a comment line):
//!
//! ```text
//! corpus demo
//! dialogue d1 agents=system,manager
//! turn speaker=manager ti=manager di=manager cues=question:domain
//! turn speaker=system ti=manager di=manager cues=no_new_info:prompt
//! end
//! ```
//!
//! A `dialogue` line may carry an optional `pair=<key>` attribute naming the
//! participant pairing used for cross-validation folds.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::cues::{parse_cue, CueKind};
use crate::error::{Error, Result};
use crate::evidence::Role;

/// Name of a dialogue participant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if !is_token(&name) {
            return Err(Error::domain(format!("invalid agent name \"{name}\"")));
        }
        Ok(AgentId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || c == ',' || c == '=')
}

/// One annotated turn. Holders are the agents holding each initiative
/// during this turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub speaker: AgentId,
    pub hearer: AgentId,
    pub ti_holder: AgentId,
    pub di_holder: AgentId,
    pub cues: Vec<CueKind>,
}

impl Turn {
    pub fn role_of(&self, agent: &AgentId) -> Result<Role> {
        if *agent == self.speaker {
            Ok(Role::Speaker)
        } else if *agent == self.hearer {
            Ok(Role::Hearer)
        } else {
            Err(Error::domain(format!(
                "agent \"{agent}\" does not take part in this turn"
            )))
        }
    }

    pub fn agent_of(&self, role: Role) -> &AgentId {
        match role {
            Role::Speaker => &self.speaker,
            Role::Hearer => &self.hearer,
        }
    }

    pub fn holder(&self, dim: crate::cues::Dimension) -> &AgentId {
        match dim {
            crate::cues::Dimension::Task => &self.ti_holder,
            crate::cues::Dimension::Dialogue => &self.di_holder,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dialogue {
    pub id: String,
    pub agents: [AgentId; 2],
    pub pair: Option<String>,
    pub turns: Vec<Turn>,
}

impl Dialogue {
    /// Cross-validation grouping key: the explicit `pair=` attribute, or the
    /// ordered agent pair.
    pub fn pair_key(&self) -> String {
        match &self.pair {
            Some(p) => p.clone(),
            None => format!("{},{}", self.agents[0], self.agents[1]),
        }
    }

    pub fn has_agent(&self, agent: &AgentId) -> bool {
        self.agents.contains(agent)
    }

    /// Turns scored by the tracker: every turn but the first.
    pub fn prediction_points(&self) -> usize {
        self.turns.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    pub dialogues: Vec<Dialogue>,
}

impl Corpus {
    pub fn turn_count(&self) -> usize {
        self.dialogues.iter().map(|d| d.turns.len()).sum()
    }

    pub fn prediction_points(&self) -> usize {
        self.dialogues.iter().map(Dialogue::prediction_points).sum()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Check every structural invariant; used by the parser and generator.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for d in &self.dialogues {
            if !ids.insert(d.id.as_str()) {
                return Err(Error::domain(format!("duplicate dialogue id \"{}\"", d.id)));
            }
            if d.agents[0] == d.agents[1] {
                return Err(Error::domain(format!(
                    "dialogue {} names the same agent twice",
                    d.id
                )));
            }
            if d.turns.is_empty() {
                return Err(Error::domain(format!("dialogue {} has no turns", d.id)));
            }
            for (i, t) in d.turns.iter().enumerate() {
                for a in [&t.speaker, &t.hearer, &t.ti_holder, &t.di_holder] {
                    if !d.has_agent(a) {
                        return Err(Error::domain(format!(
                            "dialogue {} turn {}: unknown agent \"{a}\"",
                            d.id,
                            i + 1
                        )));
                    }
                }
                if t.speaker == t.hearer {
                    return Err(Error::domain(format!(
                        "dialogue {} turn {}: speaker and hearer coincide",
                        d.id,
                        i + 1
                    )));
                }
                if has_duplicates(&t.cues) {
                    return Err(Error::domain(format!(
                        "dialogue {} turn {}: repeated cue",
                        d.id,
                        i + 1
                    )));
                }
                if i > 0 && d.turns[i - 1].speaker == t.speaker {
                    return Err(Error::domain(format!(
                        "dialogue {} turn {}: speaker \"{}\" speaks twice in a row",
                        d.id,
                        i + 1,
                        t.speaker
                    )));
                }
            }
        }
        Ok(())
    }
}

fn has_duplicates(cues: &[CueKind]) -> bool {
    let mut seen = HashSet::new();
    cues.iter().any(|c| !seen.insert(*c))
}

impl fmt::Display for Corpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "corpus {}", self.name)?;
        for d in &self.dialogues {
            write!(
                f,
                "dialogue {} agents={},{}",
                d.id, d.agents[0], d.agents[1]
            )?;
            if let Some(p) = &d.pair {
                write!(f, " pair={p}")?;
            }
            writeln!(f)?;
            for t in &d.turns {
                write!(
                    f,
                    "turn speaker={} ti={} di={} cues=",
                    t.speaker, t.ti_holder, t.di_holder
                )?;
                if t.cues.is_empty() {
                    f.write_str("-")?;
                } else {
                    let names: Vec<_> = t.cues.iter().map(|c| c.as_str()).collect();
                    f.write_str(&names.join(","))?;
                }
                writeln!(f)?;
            }
            writeln!(f, "end")?;
        }
        Ok(())
    }
}

struct OpenDialogue {
    dialogue: Dialogue,
    line: usize,
}

/// Parse a corpus file. `origin` names the source in error messages.
///
/// Parsing is all-or-nothing: the first problem aborts with its line number.
pub fn parse_corpus(text: &str, origin: &str) -> Result<Corpus> {
    let mut name: Option<String> = None;
    let mut dialogues: Vec<Dialogue> = Vec::new();
    let mut ids: HashSet<String> = HashSet::new();
    let mut open: Option<OpenDialogue> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let err = |message: String| Error::Parse {
            origin: origin.to_string(),
            line: lineno,
            message,
        };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();

        if name.is_none() {
            if keyword != "corpus" || rest.is_empty() || !is_token(rest) {
                return Err(err("expected \"corpus <name>\" as the first record".into()));
            }
            name = Some(rest.to_string());
            continue;
        }

        match keyword {
            "corpus" => return Err(err("second corpus header".into())),
            "dialogue" => {
                if open.is_some() {
                    return Err(err("dialogue started before the previous one ended".into()));
                }
                let mut parts = rest.split_whitespace();
                let id = parts
                    .next()
                    .filter(|s| !s.contains('='))
                    .ok_or_else(|| err("dialogue id missing".into()))?;
                let mut agents = None;
                let mut pair = None;
                for tok in parts {
                    match tok.split_once('=') {
                        Some(("agents", v)) if agents.is_none() => agents = Some(v),
                        Some(("pair", v)) if pair.is_none() && is_token(v) => {
                            pair = Some(v.to_string())
                        }
                        _ => return Err(err(format!("unexpected dialogue attribute \"{tok}\""))),
                    }
                }
                let agents = agents.ok_or_else(|| err("dialogue needs agents=<a>,<b>".into()))?;
                let (a, b) = agents
                    .split_once(',')
                    .ok_or_else(|| err(format!("agents=\"{agents}\" must name two agents")))?;
                let a = AgentId::new(a).map_err(|e| err(e.to_string()))?;
                let b = AgentId::new(b).map_err(|e| err(e.to_string()))?;
                if a == b {
                    return Err(err(format!("agents must differ, both are \"{a}\"")));
                }
                if !ids.insert(id.to_string()) {
                    return Err(err(format!("duplicate dialogue id \"{id}\"")));
                }
                open = Some(OpenDialogue {
                    dialogue: Dialogue {
                        id: id.to_string(),
                        agents: [a, b],
                        pair,
                        turns: Vec::new(),
                    },
                    line: lineno,
                });
            }
            "turn" => {
                let current = open
                    .as_mut()
                    .ok_or_else(|| err("turn outside of a dialogue".into()))?;
                let d = &mut current.dialogue;
                let turn = parse_turn(rest, &d.agents).map_err(err)?;
                if let Some(prev) = d.turns.last() {
                    if prev.speaker == turn.speaker {
                        return Err(err(format!(
                            "speaker \"{}\" takes two consecutive turns; merge them into one",
                            turn.speaker
                        )));
                    }
                }
                d.turns.push(turn);
            }
            "end" => {
                if !rest.is_empty() {
                    return Err(err("\"end\" takes no arguments".into()));
                }
                let finished = open
                    .take()
                    .ok_or_else(|| err("\"end\" without a dialogue".into()))?;
                if finished.dialogue.turns.is_empty() {
                    return Err(err(format!(
                        "dialogue {} has no turns",
                        finished.dialogue.id
                    )));
                }
                dialogues.push(finished.dialogue);
            }
            other => return Err(err(format!("unknown record \"{other}\""))),
        }
    }

    if let Some(unfinished) = open {
        return Err(Error::Parse {
            origin: origin.to_string(),
            line: unfinished.line,
            message: format!("dialogue {} is missing its \"end\"", unfinished.dialogue.id),
        });
    }
    let name = name.ok_or_else(|| Error::Parse {
        origin: origin.to_string(),
        line: 0,
        message: "empty corpus file".into(),
    })?;
    Ok(Corpus { name, dialogues })
}

fn parse_turn(rest: &str, agents: &[AgentId; 2]) -> std::result::Result<Turn, String> {
    let mut speaker = None;
    let mut ti = None;
    let mut di = None;
    let mut cues = None;
    for tok in rest.split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, found \"{tok}\""))?;
        let slot = match key {
            "speaker" => &mut speaker,
            "ti" => &mut ti,
            "di" => &mut di,
            "cues" => &mut cues,
            _ => return Err(format!("unknown turn field \"{key}\"")),
        };
        if slot.replace(value).is_some() {
            return Err(format!("field \"{key}\" given twice"));
        }
    }
    let agent = |field: &str, v: Option<&str>| -> std::result::Result<AgentId, String> {
        let v = v.ok_or_else(|| format!("turn is missing {field}="))?;
        agents
            .iter()
            .find(|a| a.as_str() == v)
            .cloned()
            .ok_or_else(|| format!("{field}: unknown agent \"{v}\""))
    };
    let speaker = agent("speaker", speaker)?;
    let hearer = agents
        .iter()
        .find(|a| **a != speaker)
        .cloned()
        .expect("two distinct agents");
    let ti_holder = agent("ti", ti)?;
    let di_holder = agent("di", di)?;
    let cues_field = cues.ok_or("turn is missing cues= (use cues=- for none)")?;
    let mut cue_list = Vec::new();
    if cues_field != "-" {
        for tok in cues_field.split(',') {
            let c = parse_cue(tok).map_err(|e| e.to_string())?;
            if cue_list.contains(&c) {
                return Err(format!("cue {c} listed twice"));
            }
            cue_list.push(c);
        }
    }
    Ok(Turn {
        speaker,
        hearer,
        ti_holder,
        di_holder,
        cues: cue_list,
    })
}

/// Counts of turns by (TI holder, DI holder) relative to a focus agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionReport {
    pub focus: AgentId,
    pub ti_focus_di_focus: usize,
    pub ti_focus_di_other: usize,
    pub ti_other_di_focus: usize,
    pub ti_other_di_other: usize,
}

impl DistributionReport {
    pub fn total(&self) -> usize {
        self.ti_focus_di_focus
            + self.ti_focus_di_other
            + self.ti_other_di_focus
            + self.ti_other_di_other
    }

    fn pct(&self, n: usize) -> f64 {
        match self.total() {
            0 => 0.0,
            t => n as f64 / t as f64 * 100.0,
        }
    }

    /// Percentages in field order.
    pub fn percentages(&self) -> [f64; 4] {
        [
            self.pct(self.ti_focus_di_focus),
            self.pct(self.ti_focus_di_other),
            self.pct(self.ti_other_di_focus),
            self.pct(self.ti_other_di_other),
        ]
    }

    /// Turns in which the focus agent holds the task initiative.
    pub fn focus_task(&self) -> usize {
        self.ti_focus_di_focus + self.ti_focus_di_other
    }

    /// Turns in which the focus agent holds the dialogue initiative.
    pub fn focus_dialogue(&self) -> usize {
        self.ti_focus_di_focus + self.ti_other_di_focus
    }

    pub fn to_text(&self) -> String {
        let p = self.percentages();
        let f = &self.focus;
        format!(
            "{:<16}{:>16}{:>16}\n{:<16}{:>16}{:>16}\n{:<16}{:>16}{:>16}\ntotal turns: {}\n",
            "",
            format!("TI: {f}"),
            "TI: other",
            format!("DI: {f}"),
            format!("{} ({:.1}%)", self.ti_focus_di_focus, p[0]),
            format!("{} ({:.1}%)", self.ti_other_di_focus, p[2]),
            "DI: other",
            format!("{} ({:.1}%)", self.ti_focus_di_other, p[1]),
            format!("{} ({:.1}%)", self.ti_other_di_other, p[3]),
            self.total()
        )
    }

    pub fn to_csv(&self) -> String {
        let p = self.percentages();
        format!(
            "ti,di,count,pct\nfocus,focus,{},{:.6}\nfocus,other,{},{:.6}\nother,focus,{},{:.6}\nother,other,{},{:.6}\n",
            self.ti_focus_di_focus, p[0], self.ti_focus_di_other, p[1],
            self.ti_other_di_focus, p[2], self.ti_other_di_other, p[3]
        )
    }
}

pub fn distribution_report(corpus: &Corpus, focus: &AgentId) -> Result<DistributionReport> {
    let mut r = DistributionReport {
        focus: focus.clone(),
        ti_focus_di_focus: 0,
        ti_focus_di_other: 0,
        ti_other_di_focus: 0,
        ti_other_di_other: 0,
    };
    for d in &corpus.dialogues {
        if !d.has_agent(focus) {
            return Err(Error::domain(format!(
                "focus agent \"{focus}\" does not take part in dialogue {}",
                d.id
            )));
        }
        for t in &d.turns {
            match (t.ti_holder == *focus, t.di_holder == *focus) {
                (true, true) => r.ti_focus_di_focus += 1,
                (true, false) => r.ti_focus_di_other += 1,
                (false, true) => r.ti_other_di_focus += 1,
                (false, false) => r.ti_other_di_other += 1,
            }
        }
    }
    Ok(r)
}

/// Group dialogues by pair key, in sorted key order. Each group keeps the
/// corpus name with the key appended.
pub fn partition_by_pair(corpus: &Corpus) -> Vec<(String, Corpus)> {
    let mut groups: BTreeMap<String, Vec<Dialogue>> = BTreeMap::new();
    for d in &corpus.dialogues {
        groups.entry(d.pair_key()).or_default().push(d.clone());
    }
    groups
        .into_iter()
        .map(|(key, dialogues)| {
            let name = format!("{}[{}]", corpus.name, key);
            (key, Corpus { name, dialogues })
        })
        .collect()
}

//! Debate corpora: canonical instances, raw-format ingestion, filtering,
//! and fold assignment.
//!
//! Two tasks are supported. `kialo` is three-way argument impact
//! classification over a debate tree; `ddo` is two-way persuasion (winner)
//! prediction over round-based debates. Raw inputs are JSONL, one object
//! per line; the canonical instance format is shared by both tasks.

mod sentence;

pub use sentence::count_sentences;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("node {node} references missing parent {parent}")]
    DanglingParent { node: String, parent: String },
    #[error("node {node} is its own ancestor")]
    Cycle { node: String },
    #[error("node {node} not found in tree")]
    MissingNode { node: String },
    #[error("vote {value} outside the 1-5 rating scale")]
    VoteOutOfRange { value: i64 },
    #[error("fold sizes sum to {expected} but the corpus holds {actual} items")]
    FoldSizeMismatch { expected: usize, actual: usize },
    #[error("label {value:?} is not in the {task} label set")]
    UnknownLabel { value: String, task: TaskKind },
    #[error("unknown split {value:?} (expected train, validation, or test)")]
    UnknownSplit { value: String },
    #[error("debate {debate} has no rounds")]
    EmptyDebate { debate: String },
    #[error("invalid vote policy: {0}")]
    BadPolicy(String),
}

/// Which task a corpus or instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Kialo,
    Ddo,
}

impl TaskKind {
    /// Canonical label order for the task. Indices into this slice are the
    /// stable `canonical_index` used for tie-breaking.
    pub fn labels(&self) -> &'static [Label] {
        match self {
            TaskKind::Kialo => &[Label::Impactful, Label::MediumImpact, Label::NotImpactful],
            TaskKind::Ddo => &[Label::Con, Label::Pro],
        }
    }

    pub fn parse_label(&self, value: &str) -> Result<Label, CorpusError> {
        self.labels()
            .iter()
            .copied()
            .find(|l| l.value() == value)
            .ok_or_else(|| CorpusError::UnknownLabel {
                value: value.to_string(),
                task: *self,
            })
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskKind::Kialo => write!(f, "kialo"),
            TaskKind::Ddo => write!(f, "ddo"),
        }
    }
}

/// Class label for either task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    // ddo
    Con,
    Pro,
    // kialo
    Impactful,
    MediumImpact,
    NotImpactful,
}

impl Label {
    /// The label's surface form, as stored in corpus files.
    pub fn value(&self) -> &'static str {
        match self {
            Label::Con => "Con",
            Label::Pro => "Pro",
            Label::Impactful => "Impactful",
            Label::MediumImpact => "Medium Impact",
            Label::NotImpactful => "Not Impactful",
        }
    }

    pub fn task(&self) -> TaskKind {
        match self {
            Label::Con | Label::Pro => TaskKind::Ddo,
            _ => TaskKind::Kialo,
        }
    }

    /// Position in the task's canonical label order.
    pub fn canonical_index(&self) -> usize {
        self.task()
            .labels()
            .iter()
            .position(|l| l == self)
            .expect("label present in its own task order")
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.value())
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.value())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        for task in [TaskKind::Kialo, TaskKind::Ddo] {
            if let Ok(label) = task.parse_label(&s) {
                return Ok(label);
            }
        }
        Err(serde::de::Error::custom(format!("unknown label {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn parse(s: &str) -> Result<Split, CorpusError> {
        match s {
            "train" => Ok(Split::Train),
            "validation" | "val" | "dev" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(CorpusError::UnknownSplit {
                value: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Split::Train => write!(f, "train"),
            Split::Validation => write!(f, "validation"),
            Split::Test => write!(f, "test"),
        }
    }
}

/// One node of a kialo-style debate tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DebateNode {
    pub node_id: String,
    pub text: String,
    pub parent_id: Option<String>,
    /// User impact ratings in 1..=5. Empty for ddo-style data.
    #[serde(default)]
    pub votes: Vec<u8>,
}

/// Root-to-parent chain of prior arguments above a claim.
///
/// The last element is the claim's direct parent; a root claim has an
/// empty path. The context length `l` is simply the element count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextPath {
    pub nodes: Vec<String>,
}

impl ContextPath {
    pub fn new(nodes: Vec<String>) -> Self {
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// One canonical task instance: an argument claim, its context, and a label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DebateInstance {
    #[serde(rename = "id")]
    pub instance_id: String,
    pub argument: String,
    #[serde(with = "context_path_as_list")]
    pub context: ContextPath,
    pub label: Label,
    pub split: Split,
    pub task: TaskKind,
}

mod context_path_as_list {
    use super::ContextPath;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(path: &ContextPath, s: S) -> Result<S::Ok, S::Error> {
        path.nodes.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ContextPath, D::Error> {
        Ok(ContextPath::new(Vec::<String>::deserialize(d)?))
    }
}

/// One side's text in a ddo round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DdoRound {
    pub pro: String,
    pub con: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DdoForfeit {
    pub pro: bool,
    pub con: bool,
}

/// A raw ddo debate before filtering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DdoDebate {
    #[serde(rename = "id")]
    pub debate_id: String,
    pub rounds: Vec<DdoRound>,
    pub pro_votes: u32,
    pub con_votes: u32,
    #[serde(default)]
    pub forfeit: DdoForfeit,
}

/// Raw kialo node record, the ingestion input for the kialo task.
///
/// `label` and `split` are optional: pre-labeled corpora carry both and
/// bypass vote aggregation; unlabeled corpora carry `votes` instead.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KialoNodeRecord {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub parent_id: Option<String>,
    #[serde(default)]
    pub votes: Vec<i64>,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub split: Option<String>,
}

/// Corpus loaded from a raw file; the variant depends on the task.
#[derive(Debug, Clone)]
pub enum LoadedCorpus {
    Kialo(Vec<DebateNode>),
    Ddo(Vec<DdoDebate>),
}

/// A line that failed to parse, with the 1-based line number.
#[derive(Debug, Clone, Serialize)]
pub struct RejectedRecord {
    pub line: usize,
    pub reason: String,
}

fn read_jsonl<T: serde::de::DeserializeOwned>(
    path: &Path,
) -> Result<(Vec<(usize, T)>, Vec<RejectedRecord>), CorpusError> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<T>(&line) {
            Ok(record) => records.push((line_no, record)),
            Err(e) => rejected.push(RejectedRecord {
                line: line_no,
                reason: e.to_string(),
            }),
        }
    }
    Ok((records, rejected))
}

/// Loads a raw corpus file, collecting malformed lines instead of failing.
///
/// Structural problems (dangling parents, cycles, empty debates) are still
/// hard errors: they invalidate records that did parse.
pub fn load_corpus_lenient(
    path: &Path,
    task: TaskKind,
) -> Result<(LoadedCorpus, Vec<RejectedRecord>), CorpusError> {
    match task {
        TaskKind::Kialo => {
            let (records, rejected) = read_jsonl::<KialoNodeRecord>(path)?;
            let nodes = kialo_nodes(records)?;
            Ok((LoadedCorpus::Kialo(nodes), rejected))
        }
        TaskKind::Ddo => {
            let (records, rejected) = read_jsonl::<DdoDebate>(path)?;
            for (line, debate) in &records {
                if debate.rounds.is_empty() {
                    let _ = line;
                    return Err(CorpusError::EmptyDebate {
                        debate: debate.debate_id.clone(),
                    });
                }
            }
            let debates = records.into_iter().map(|(_, d)| d).collect();
            Ok((LoadedCorpus::Ddo(debates), rejected))
        }
    }
}

/// Strict variant of [`load_corpus_lenient`]: the first malformed line is an
/// error carrying its line number.
pub fn load_corpus(path: &Path, task: TaskKind) -> Result<LoadedCorpus, CorpusError> {
    let (corpus, rejected) = load_corpus_lenient(path, task)?;
    if let Some(first) = rejected.into_iter().next() {
        return Err(CorpusError::Parse {
            line: first.line,
            message: first.reason,
        });
    }
    Ok(corpus)
}

fn kialo_nodes(
    records: Vec<(usize, KialoNodeRecord)>,
) -> Result<Vec<DebateNode>, CorpusError> {
    let mut nodes = Vec::with_capacity(records.len());
    for (line, record) in records {
        let mut votes = Vec::with_capacity(record.votes.len());
        for v in &record.votes {
            if !(1..=5).contains(v) {
                return Err(CorpusError::Parse {
                    line,
                    message: format!("vote {v} outside the 1-5 rating scale"),
                });
            }
            votes.push(*v as u8);
        }
        nodes.push(DebateNode {
            node_id: record.id,
            text: record.text,
            parent_id: record.parent_id,
            votes,
        });
    }
    let by_id: HashMap<&str, &DebateNode> =
        nodes.iter().map(|n| (n.node_id.as_str(), n)).collect();
    for node in &nodes {
        if let Some(parent) = &node.parent_id {
            if !by_id.contains_key(parent.as_str()) {
                return Err(CorpusError::DanglingParent {
                    node: node.node_id.clone(),
                    parent: parent.clone(),
                });
            }
        }
    }
    validate_acyclic(&nodes)?;
    Ok(nodes)
}

fn validate_acyclic(nodes: &[DebateNode]) -> Result<(), CorpusError> {
    let parent_of: HashMap<&str, Option<&str>> = nodes
        .iter()
        .map(|n| (n.node_id.as_str(), n.parent_id.as_deref()))
        .collect();
    for node in nodes {
        let mut cursor = node.parent_id.as_deref();
        let mut steps = 0usize;
        while let Some(id) = cursor {
            if id == node.node_id {
                return Err(CorpusError::Cycle {
                    node: node.node_id.clone(),
                });
            }
            steps += 1;
            if steps > nodes.len() {
                return Err(CorpusError::Cycle {
                    node: node.node_id.clone(),
                });
            }
            cursor = parent_of.get(id).copied().flatten();
        }
    }
    Ok(())
}

/// Walks the parent chain of `claim_id` and returns the root-to-parent
/// context path.
pub fn build_context_path(
    claim_id: &str,
    tree: &[DebateNode],
) -> Result<ContextPath, CorpusError> {
    let by_id: HashMap<&str, &DebateNode> =
        tree.iter().map(|n| (n.node_id.as_str(), n)).collect();
    let claim = by_id.get(claim_id).ok_or_else(|| CorpusError::MissingNode {
        node: claim_id.to_string(),
    })?;
    let mut chain = Vec::new();
    let mut cursor = claim.parent_id.as_deref();
    while let Some(id) = cursor {
        let node = by_id.get(id).ok_or_else(|| CorpusError::DanglingParent {
            node: claim_id.to_string(),
            parent: id.to_string(),
        })?;
        chain.push(node.text.clone());
        if chain.len() > tree.len() {
            return Err(CorpusError::Cycle {
                node: claim_id.to_string(),
            });
        }
        cursor = node.parent_id.as_deref();
    }
    chain.reverse();
    Ok(ContextPath::new(chain))
}

/// Thresholds for turning raw impact votes into one of the three classes.
///
/// Votes above `medium_max` count toward Impactful, votes above `not_max`
/// up to `medium_max` toward Medium Impact, and the rest toward
/// Not Impactful. The modal band must hold at least `agreement` of the
/// valid votes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VotePolicy {
    pub min_valid_votes: usize,
    pub agreement: f64,
    pub not_max: u8,
    pub medium_max: u8,
}

impl Default for VotePolicy {
    fn default() -> Self {
        Self {
            min_valid_votes: 3,
            agreement: 0.6,
            not_max: 2,
            medium_max: 3,
        }
    }
}

impl VotePolicy {
    fn validate(&self) -> Result<(), CorpusError> {
        if self.not_max == 0 || self.not_max >= self.medium_max || self.medium_max >= 5 {
            return Err(CorpusError::BadPolicy(format!(
                "rating bands require 0 < not_max < medium_max < 5, got {} and {}",
                self.not_max, self.medium_max
            )));
        }
        if !(0.0..=1.0).contains(&self.agreement) {
            return Err(CorpusError::BadPolicy(format!(
                "agreement must be in [0, 1], got {}",
                self.agreement
            )));
        }
        Ok(())
    }
}

/// Outcome of aggregating one node's impact votes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoteOutcome {
    Label(Label),
    /// Fewer valid votes than the policy minimum.
    InsufficientVotes,
    /// No rating band reached the agreement threshold.
    NoAgreement,
}

/// Aggregates impact votes into a label, or signals why none was assigned.
pub fn aggregate_impact_votes(
    votes: &[u8],
    policy: &VotePolicy,
) -> Result<VoteOutcome, CorpusError> {
    policy.validate()?;
    for &v in votes {
        if !(1..=5).contains(&v) {
            return Err(CorpusError::VoteOutOfRange { value: v as i64 });
        }
    }
    if votes.len() < policy.min_valid_votes {
        return Ok(VoteOutcome::InsufficientVotes);
    }
    let mut bands = [0usize; 3]; // not, medium, impactful
    for &v in votes {
        if v <= policy.not_max {
            bands[0] += 1;
        } else if v <= policy.medium_max {
            bands[1] += 1;
        } else {
            bands[2] += 1;
        }
    }
    let (best, count) = bands
        .iter()
        .enumerate()
        .max_by_key(|(_, c)| **c)
        .expect("three bands");
    if (*count as f64) / (votes.len() as f64) < policy.agreement {
        return Ok(VoteOutcome::NoAgreement);
    }
    let label = match best {
        0 => Label::NotImpactful,
        1 => Label::MediumImpact,
        _ => Label::Impactful,
    };
    Ok(VoteOutcome::Label(label))
}

/// Elimination rules for ddo debates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterRules {
    /// Keep a debate only if |pro_votes - con_votes| >= this margin.
    pub min_vote_margin: u32,
    /// Keep a debate only if no side exceeds this many sentences in a round.
    pub max_round_sentences: usize,
}

impl Default for FilterRules {
    fn default() -> Self {
        Self {
            min_vote_margin: 2,
            max_round_sentences: 40,
        }
    }
}

/// Why a debate was eliminated. When several rules apply, the first one in
/// this order is charged: tie, vote margin, forfeit, round length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EliminationReason {
    Tie,
    VoteMargin,
    Forfeit,
    RoundLength,
}

impl fmt::Display for EliminationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EliminationReason::Tie => write!(f, "tie"),
            EliminationReason::VoteMargin => write!(f, "vote-margin"),
            EliminationReason::Forfeit => write!(f, "forfeit"),
            EliminationReason::RoundLength => write!(f, "round-length"),
        }
    }
}

/// Result of [`filter_ddo`]: surviving debates with their winner label,
/// plus per-rule elimination counts.
#[derive(Debug, Clone)]
pub struct DdoFilterOutcome {
    pub kept: Vec<(DdoDebate, Label)>,
    pub eliminated: BTreeMap<EliminationReason, usize>,
    pub eliminated_ids: Vec<(String, EliminationReason)>,
}

fn eliminate_reason(debate: &DdoDebate, rules: &FilterRules) -> Option<EliminationReason> {
    let diff = debate.pro_votes.abs_diff(debate.con_votes);
    if diff == 0 {
        return Some(EliminationReason::Tie);
    }
    if diff < rules.min_vote_margin {
        return Some(EliminationReason::VoteMargin);
    }
    if debate.forfeit.pro || debate.forfeit.con {
        return Some(EliminationReason::Forfeit);
    }
    for round in &debate.rounds {
        if count_sentences(&round.pro) > rules.max_round_sentences
            || count_sentences(&round.con) > rules.max_round_sentences
        {
            return Some(EliminationReason::RoundLength);
        }
    }
    None
}

/// Applies the elimination rules and assigns the winner by vote majority.
///
/// Filtering is total: every debate is either kept or charged to exactly
/// one rule.
pub fn filter_ddo(debates: &[DdoDebate], rules: &FilterRules) -> DdoFilterOutcome {
    let mut kept = Vec::new();
    let mut eliminated = BTreeMap::new();
    let mut eliminated_ids = Vec::new();
    for debate in debates {
        match eliminate_reason(debate, rules) {
            Some(reason) => {
                *eliminated.entry(reason).or_insert(0) += 1;
                eliminated_ids.push((debate.debate_id.clone(), reason));
            }
            None => {
                let winner = if debate.pro_votes > debate.con_votes {
                    Label::Pro
                } else {
                    Label::Con
                };
                kept.push((debate.clone(), winner));
            }
        }
    }
    DdoFilterOutcome {
        kept,
        eliminated,
        eliminated_ids,
    }
}

/// Converts a kept ddo debate into a canonical instance: earlier rounds are
/// the context path, the final round is the argument claim.
pub fn ddo_instance(debate: &DdoDebate, winner: Label, split: Split) -> DebateInstance {
    let render = |round: &DdoRound| format!("PRO: {} CON: {}", round.pro, round.con);
    let context: Vec<String> = debate.rounds[..debate.rounds.len() - 1]
        .iter()
        .map(render)
        .collect();
    let argument = render(debate.rounds.last().expect("at least one round"));
    DebateInstance {
        instance_id: debate.debate_id.clone(),
        argument,
        context: ContextPath::new(context),
        label: winner,
        split,
        task: TaskKind::Ddo,
    }
}

/// Deterministically assigns `sizes.len()` folds over `count` items.
///
/// Returns the fold index per item position. The assignment is a seeded
/// shuffle, so equal seeds give equal assignments and the folds partition
/// the items exactly.
pub fn split_folds(count: usize, sizes: &[usize], seed: u64) -> Result<Vec<usize>, CorpusError> {
    let expected: usize = sizes.iter().sum();
    if expected != count {
        return Err(CorpusError::FoldSizeMismatch {
            expected,
            actual: count,
        });
    }
    let mut order: Vec<usize> = (0..count).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut assignment = vec![0usize; count];
    let mut cursor = 0usize;
    for (fold, &size) in sizes.iter().enumerate() {
        for &item in &order[cursor..cursor + size] {
            assignment[item] = fold;
        }
        cursor += size;
    }
    Ok(assignment)
}

/// Per-split, per-label instance counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub counts: BTreeMap<Split, BTreeMap<String, usize>>,
    pub totals: BTreeMap<Split, usize>,
}

pub fn corpus_stats(instances: &[DebateInstance]) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for instance in instances {
        *stats
            .counts
            .entry(instance.split)
            .or_default()
            .entry(instance.label.value().to_string())
            .or_insert(0) += 1;
        *stats.totals.entry(instance.split).or_insert(0) += 1;
    }
    stats
}

/// Reads canonical instances from JSONL.
pub fn load_instances(path: &Path) -> Result<Vec<DebateInstance>, CorpusError> {
    let (records, rejected) = read_jsonl::<DebateInstance>(path)?;
    if let Some(first) = rejected.into_iter().next() {
        return Err(CorpusError::Parse {
            line: first.line,
            message: first.reason,
        });
    }
    let instances: Vec<DebateInstance> = records.into_iter().map(|(_, r)| r).collect();
    for instance in &instances {
        if instance.argument.is_empty() {
            return Err(CorpusError::Parse {
                line: 0,
                message: format!("instance {} has an empty argument", instance.instance_id),
            });
        }
        if instance.label.task() != instance.task {
            return Err(CorpusError::UnknownLabel {
                value: instance.label.value().to_string(),
                task: instance.task,
            });
        }
    }
    Ok(instances)
}

/// Serializes instances as JSONL, one object per line, in input order.
pub fn instances_to_jsonl(instances: &[DebateInstance]) -> String {
    let mut out = String::new();
    for instance in instances {
        out.push_str(&serde_json::to_string(instance).expect("instance serializes"));
        out.push('\n');
    }
    out
}

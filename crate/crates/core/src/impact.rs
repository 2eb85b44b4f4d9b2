//! Attack taxonomy and threshold-based impact discovery.
//!
//! For every targeted DP `v_i` and every 1-hop candidate `v_j`, the
//! discovery step finds the state pair maximizing
//! `P(v_i = s_k | v_j = s_l)`. The candidate is impacted when that maximum
//! reaches the threshold θ.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::BayesNet;
use crate::graph::CausalGraph;
use crate::inference::{posterior, state_of, InferenceError, Query};

pub const DEFAULT_THETA: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImpactError {
    #[error("theta must lie in (0, 1], got {0}")]
    InvalidTheta(f64),
    #[error("attack `{0}` has no targeted DPs")]
    EmptyTargets(String),
    #[error("attack `{attack}` targets DPs absent from the network: {}", missing.join(", "))]
    TargetNotInNet { attack: String, missing: Vec<String> },
    #[error("no stage known for `{0}`")]
    UnknownStage(String),
    #[error("attack `{attack}`: bad precondition `{dp}={state}`")]
    InvalidPrecondition { attack: String, dp: String, state: String },
    #[error("unknown candidate rule `{0}`")]
    UnknownCandidateRule(String),
    #[error("attack file: {0}")]
    AttackFile(String),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

impl ImpactError {
    pub fn code(&self) -> &'static str {
        match self {
            ImpactError::InvalidTheta(_) => "InvalidTheta",
            ImpactError::EmptyTargets(_) => "EmptyTargets",
            ImpactError::TargetNotInNet { .. } => "TargetNotInNet",
            ImpactError::UnknownStage(_) => "UnknownStage",
            ImpactError::InvalidPrecondition { .. } => "InvalidPrecondition",
            ImpactError::UnknownCandidateRule(_) => "UnknownCandidateRule",
            ImpactError::AttackFile(_) => "AttackFile",
            ImpactError::Inference(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub id: String,
    pub targeted: Vec<String>,
    /// DP -> state label. Recorded; used as evidence only on request.
    #[serde(default)]
    pub preconditions: BTreeMap<String, String>,
    #[serde(default)]
    pub description: String,
    /// Overrides the run-wide threshold for this attack.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

impl AttackSpec {
    pub fn new(id: impl Into<String>, targeted: &[&str]) -> Self {
        AttackSpec {
            id: id.into(),
            targeted: targeted.iter().map(|s| s.to_string()).collect(),
            preconditions: BTreeMap::new(),
            description: String::new(),
            theta: None,
        }
    }

    fn target_set(&self) -> BTreeSet<&str> {
        self.targeted.iter().map(String::as_str).collect()
    }
}

/// Parse a JSON array of attacks.
pub fn parse_attacks(text: &str) -> Result<Vec<AttackSpec>, ImpactError> {
    let attacks: Vec<AttackSpec> = serde_json::from_str(text).map_err(|e| ImpactError::AttackFile(e.to_string()))?;
    for a in &attacks {
        if a.targeted.is_empty() {
            return Err(ImpactError::EmptyTargets(a.id.clone()));
        }
        if let Some(t) = a.theta {
            check_theta(t)?;
        }
    }
    Ok(attacks)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateRule {
    /// Out-neighbours of each target.
    #[default]
    Children,
    /// Parents and children of each target.
    UndirectedNeighbors,
}

impl fmt::Display for CandidateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CandidateRule::Children => "children",
            CandidateRule::UndirectedNeighbors => "undirected_neighbors",
        })
    }
}

impl FromStr for CandidateRule {
    type Err = ImpactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "children" => Ok(CandidateRule::Children),
            "undirected_neighbors" | "undirected-neighbors" | "neighbors" => Ok(CandidateRule::UndirectedNeighbors),
            other => Err(ImpactError::UnknownCandidateRule(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactConfig {
    pub theta: f64,
    pub candidate_rule: CandidateRule,
    /// Add the attack's preconditions to every query. Experimental.
    #[serde(default)]
    pub condition_preconditions: bool,
    /// DP -> stage id; DPs absent here fall back to [`stage_from_name`].
    #[serde(default)]
    pub stages: BTreeMap<String, u32>,
}

impl Default for ImpactConfig {
    fn default() -> Self {
        ImpactConfig {
            theta: DEFAULT_THETA,
            candidate_rule: CandidateRule::Children,
            condition_preconditions: false,
            stages: BTreeMap::new(),
        }
    }
}

impl ImpactConfig {
    pub fn with_theta(theta: f64) -> Result<Self, ImpactError> {
        check_theta(theta)?;
        Ok(ImpactConfig { theta, ..Default::default() })
    }
}

fn check_theta(theta: f64) -> Result<(), ImpactError> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(ImpactError::InvalidTheta(theta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "TSIS")]
    Tsis,
    #[serde(rename = "TSIM")]
    Tsim,
    #[serde(rename = "TMIS")]
    Tmis,
    #[serde(rename = "TMIM")]
    Tmim,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Tsis => "TSIS",
            Category::Tsim => "TSIM",
            Category::Tmis => "TMIS",
            Category::Tmim => "TMIM",
        })
    }
}

/// Stage id from the leading digit of a DP tag: `P101` -> 1, `AIT504` -> 5.
pub fn stage_from_name(name: &str) -> Option<u32> {
    name.chars().find(|c| c.is_ascii_digit()).and_then(|c| c.to_digit(10))
}

fn stage(stages: &BTreeMap<String, u32>, dp: &str) -> Result<u32, ImpactError> {
    stages
        .get(dp)
        .copied()
        .or_else(|| stage_from_name(dp))
        .ok_or_else(|| ImpactError::UnknownStage(dp.to_string()))
}

/// Category from the number of stages spanned by the targeted and impacted DPs.
///
/// An empty impacted set takes the span of the targeted set, so an attack
/// whose targets cross stages with no further impact is `TMIM`.
pub fn classify_attack(
    targeted: &[String],
    impacted: &[String],
    stages: &BTreeMap<String, u32>,
) -> Result<Category, ImpactError> {
    let span = |dps: &[String]| -> Result<usize, ImpactError> {
        let set: BTreeSet<u32> = dps.iter().map(|d| stage(stages, d)).collect::<Result<_, _>>()?;
        Ok(set.len())
    };
    let t = span(targeted)?;
    let i = if impacted.is_empty() { t } else { span(impacted)? };
    Ok(match (t > 1, i > 1) {
        (false, false) => Category::Tsis,
        (false, true) => Category::Tsim,
        (true, false) => Category::Tmis,
        (true, true) => Category::Tmim,
    })
}

/// Verdict for one (target, candidate) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateVerdict {
    pub candidate: String,
    pub target: String,
    /// `None` when every candidate state has zero probability.
    pub best_target_state: Option<String>,
    pub best_candidate_state: Option<String>,
    pub probability: f64,
    pub included: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactReport {
    pub attack_id: String,
    pub targeted: Vec<String>,
    pub theta: f64,
    pub candidate_rule: CandidateRule,
    pub preconditions: BTreeMap<String, String>,
    pub conditioned_on_preconditions: bool,
    pub candidates: Vec<CandidateVerdict>,
    pub impacted: Vec<String>,
    pub category: Category,
}

impl ImpactReport {
    /// Fixed-width text rendering, one row per verdict.
    pub fn table(&self) -> String {
        let mut out = format!(
            "attack {}  targeted [{}]  theta {}  category {}\n",
            self.attack_id,
            self.targeted.join(", "),
            self.theta,
            self.category
        );
        out.push_str(&format!(
            "  {:<10} {:<10} {:<12} {:<12} {:>9}  {}\n",
            "target", "candidate", "target_st", "cand_st", "prob", "in"
        ));
        for c in &self.candidates {
            out.push_str(&format!(
                "  {:<10} {:<10} {:<12} {:<12} {:>9.6}  {}\n",
                c.target,
                c.candidate,
                c.best_target_state.as_deref().unwrap_or("-"),
                c.best_candidate_state.as_deref().unwrap_or("-"),
                c.probability,
                if c.included { "yes" } else { "no" }
            ));
        }
        out.push_str(&format!("  impacted: [{}]\n", self.impacted.join(", ")));
        out
    }
}

fn candidates_of(g: &CausalGraph, target: usize, rule: CandidateRule) -> Vec<usize> {
    let mut c = match rule {
        CandidateRule::Children => g.children_idx(target),
        CandidateRule::UndirectedNeighbors => g.adjacents_idx(target),
    };
    c.sort_by(|&a, &b| g.name(a).cmp(g.name(b)));
    c.dedup();
    c
}

pub fn discover_impact(net: &BayesNet, attack: &AttackSpec, cfg: &ImpactConfig) -> Result<ImpactReport, ImpactError> {
    let theta = attack.theta.unwrap_or(cfg.theta);
    check_theta(theta)?;
    if attack.targeted.is_empty() {
        return Err(ImpactError::EmptyTargets(attack.id.clone()));
    }
    let missing: Vec<String> = attack.targeted.iter().filter(|t| net.index_of(t).is_none()).cloned().collect();
    if !missing.is_empty() {
        return Err(ImpactError::TargetNotInNet { attack: attack.id.clone(), missing });
    }
    let targets = attack.target_set();
    let mut base = BTreeMap::new();
    if cfg.condition_preconditions {
        for (dp, state) in &attack.preconditions {
            if targets.contains(dp.as_str()) {
                continue;
            }
            let s = state_of(net, dp, state).map_err(|_| ImpactError::InvalidPrecondition {
                attack: attack.id.clone(),
                dp: dp.clone(),
                state: state.clone(),
            })?;
            base.insert(dp.clone(), s);
        }
    }

    let g = net.graph();
    let mut verdicts = Vec::new();
    for &t in &targets {
        let ti = net.index_of(t).expect("checked above");
        let tspec = &net.variables()[ti];
        for c in candidates_of(g, ti, cfg.candidate_rule) {
            let cname = g.name(c);
            if targets.contains(cname) {
                continue;
            }
            let cspec = &net.variables()[c];
            let mut best: Option<(f64, usize, usize)> = None;
            for sl in 0..cspec.cardinality() {
                let mut q = Query::new(t);
                q.evidence = base.clone();
                q.evidence.insert(cname.to_string(), sl);
                let dist = match posterior(net, &q) {
                    Ok(d) => d,
                    Err(InferenceError::ZeroProbabilityEvidence) => continue,
                    Err(e) => return Err(e.into()),
                };
                for (sk, &p) in dist.iter().enumerate() {
                    let better = match best {
                        None => true,
                        Some((bp, bk, bl)) => p > bp || (p == bp && (sk, sl) < (bk, bl)),
                    };
                    if better {
                        best = Some((p, sk, sl));
                    }
                }
            }
            let (probability, tk, cl) = match best {
                Some((p, k, l)) => (p, Some(tspec.states[k].clone()), Some(cspec.states[l].clone())),
                None => (0.0, None, None),
            };
            verdicts.push(CandidateVerdict {
                candidate: cname.to_string(),
                target: t.to_string(),
                best_target_state: tk,
                best_candidate_state: cl,
                probability,
                included: probability >= theta,
            });
        }
    }
    verdicts.sort_by(|a, b| (&a.candidate, &a.target).cmp(&(&b.candidate, &b.target)));
    let impacted: Vec<String> = verdicts
        .iter()
        .filter(|v| v.included)
        .map(|v| v.candidate.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let targeted: Vec<String> = targets.iter().map(|s| s.to_string()).collect();
    let category = classify_attack(&targeted, &impacted, &cfg.stages)?;
    Ok(ImpactReport {
        attack_id: attack.id.clone(),
        targeted,
        theta,
        candidate_rule: cfg.candidate_rule,
        preconditions: attack.preconditions.clone(),
        conditioned_on_preconditions: cfg.condition_preconditions,
        candidates: verdicts,
        impacted,
        category,
    })
}

/// 1-hop out-neighbours of the targets in a domain graph, targets excluded.
pub fn domain_impact(g: &CausalGraph, targeted: &[String]) -> Result<Vec<String>, ImpactError> {
    let missing: Vec<String> = targeted.iter().filter(|t| !g.contains(t)).cloned().collect();
    if !missing.is_empty() {
        return Err(ImpactError::TargetNotInNet { attack: String::new(), missing });
    }
    let targets: BTreeSet<&str> = targeted.iter().map(String::as_str).collect();
    let mut out = BTreeSet::new();
    for t in &targets {
        for c in g.children(t).expect("checked above") {
            if !targets.contains(c.as_str()) {
                out.insert(c);
            }
        }
    }
    Ok(out.into_iter().collect())
}

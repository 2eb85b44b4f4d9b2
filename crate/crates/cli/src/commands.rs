use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cpscausal::data::{discretize, format_specs, parse_log, parse_specs, suggest_bins, BinMethod};
use cpscausal::domain::{load_domain_graph, looks_like_domain_spec};
use cpscausal::estimation::{fit_bayes, fit_mle};
use cpscausal::graph::{break_cycles, CycleRepair};
use cpscausal::impact::{discover_impact, parse_attacks, CandidateRule};
use cpscausal::inference::{parse_evidence, posterior};
use cpscausal::sim::{render_log, sample_with_clamp};
use cpscausal::structure::{extend_to_dag, learn_cl, learn_hc, learn_pc, ClConfig, HcConfig, PcConfig};
use cpscausal::{fixtures, BayesNet, CausalGraph, DiscreteDataset, ImpactConfig, ScoreMethod};
use serde_json::{json, Value};

use crate::args::*;
use crate::error::CliError;

/// Result of a command before anything touches the filesystem.
#[derive(Debug, Default)]
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    /// Primary output first; the manifest is written next to it.
    pub outputs: Vec<(PathBuf, Vec<u8>)>,
    pub config: Value,
    pub seed: Option<u64>,
    pub stdout: String,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn pretty<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn load_dataset(path: &Path) -> Result<DiscreteDataset, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::json(path, e))
}

/// JSON graph or domain-graph text.
fn load_graph(path: &Path) -> Result<CausalGraph, CliError> {
    let text = read_text(path)?;
    if looks_like_domain_spec(&text) {
        Ok(load_domain_graph(&text)?)
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::json(path, e))
    }
}

fn load_net(path: &Path) -> Result<BayesNet, CliError> {
    Ok(BayesNet::from_json(&read_text(path)?)?)
}

pub fn discretize_cmd(a: &DiscretizeArgs) -> Result<Outcome, CliError> {
    let log = parse_log(&read_text(&a.input)?)?;
    let specs = parse_specs(&read_text(&a.spec)?)?;
    let ds = discretize(&log, &specs)?;
    Ok(Outcome {
        inputs: vec![a.input.clone(), a.spec.clone()],
        stdout: format!("{} records x {} variables\n", ds.n_records(), ds.n_vars()),
        // Compact: one value per line would dwarf the raw log.
        outputs: vec![(a.out.clone(), format!("{}\n", serde_json::to_string(&ds).expect("serializable")).into_bytes())],
        ..Outcome::default()
    })
}

pub fn suggest_bins_cmd(a: &SuggestBinsArgs) -> Result<Outcome, CliError> {
    let method: BinMethod = a.method.parse().map_err(CliError::Usage)?;
    let log = parse_log(&read_text(&a.input)?)?;
    let edges = suggest_bins(&log, &a.column, a.bins, method)?;
    let body = json!({ "column": a.column, "method": a.method, "bins": a.bins, "edges": edges });
    Ok(Outcome { inputs: vec![a.input.clone()], stdout: format!("{body}\n"), ..Outcome::default() })
}

fn score_method(a: &LearnArgs) -> Result<ScoreMethod, CliError> {
    match a.score.as_deref().unwrap_or("bic") {
        "bic" => Ok(ScoreMethod::Bic),
        "k2" => Ok(ScoreMethod::K2),
        "bdeu" => Ok(ScoreMethod::Bdeu { ess: a.ess }),
        other => Err(CliError::Usage(format!("score `{other}` cannot drive hill climbing (expected bic|k2|bdeu)"))),
    }
}

pub fn learn_cmd(a: &LearnArgs) -> Result<Outcome, CliError> {
    let ds = load_dataset(&a.dataset)?;
    let mut outputs = Vec::new();
    let (graph, config, summary) = match a.algo {
        Algo::Pc => {
            if a.score.as_deref().is_some_and(|s| s != "chi2") {
                return Err(CliError::Usage("pc uses the chi2 test; drop --score or pass --score chi2".into()));
            }
            let cfg = PcConfig { alpha: a.alpha, max_cond_size: a.max_cond_size };
            let r = learn_pc(&ds, &cfg)?;
            if let Some(path) = &a.sepsets {
                let list: Vec<Value> =
                    r.sepsets.iter().map(|((x, y), s)| json!({ "pair": [x, y], "sepset": s })).collect();
                outputs.push((path.clone(), pretty(&list)));
            }
            let summary = format!("pc: {} edges, {} CI tests\n", r.graph.n_edges(), r.tests_run);
            let g = if a.extend { extend_to_dag(&r.graph)? } else { r.graph };
            (g, json!({ "algo": "pc", "test": "chi2", "pc": cfg, "extend": a.extend }), summary)
        }
        Algo::Hc => {
            let cfg = HcConfig {
                score: score_method(a)?,
                plateau_k: a.plateau,
                max_iter: a.max_iter,
                max_parents: a.max_parents,
                prefilter: a.prefilter,
            };
            let r = learn_hc(&ds, &cfg)?;
            let summary = format!("hc ({}): {} edges, score {}, {} moves\n", cfg.score, r.graph.n_edges(), r.score, r.trace.len() - 1);
            (r.graph, json!({ "algo": "hc", "hc": cfg }), summary)
        }
        Algo::Cl => {
            if a.score.is_some() {
                return Err(CliError::Usage("cl weighs edges by mutual information; --score does not apply".into()));
            }
            let root = a.root.clone().ok_or_else(|| CliError::Usage("cl requires --root".into()))?;
            let cfg = ClConfig { root };
            let g = learn_cl(&ds, &cfg)?;
            let summary = format!("cl rooted at {}: {} edges\n", cfg.root, g.n_edges());
            (g, json!({ "algo": "cl", "cl": cfg }), summary)
        }
    };
    outputs.insert(0, (a.out.clone(), pretty(&graph)));
    Ok(Outcome { inputs: vec![a.dataset.clone()], outputs, config, stdout: summary, ..Outcome::default() })
}

pub fn fit_cmd(a: &FitArgs) -> Result<Outcome, CliError> {
    let ds = load_dataset(&a.dataset)?;
    let mut graph = load_graph(&a.graph)?;
    let mut stdout = String::new();
    if a.break_cycles && graph.has_directed_cycle() {
        let r = break_cycles(&graph, &CycleRepair::Heuristic)?;
        for (s, d) in &r.removed {
            stdout.push_str(&format!("removed {s} -> {d} to break a cycle\n"));
        }
        graph = r.graph;
    }
    if graph.has_undirected_edges() {
        graph = extend_to_dag(&graph)?;
        stdout.push_str("oriented undirected edges by consistent extension\n");
    }
    let net = match a.estimator {
        Estimator::Mle => fit_mle(&ds, &graph)?,
        Estimator::Bayes => fit_bayes(&ds, &graph, a.ess)?,
    };
    let unseen: usize = net.cpts().iter().map(|c| c.unseen_rows.len()).sum();
    stdout.push_str(&format!("fitted {} CPTs, {unseen} rows unseen in the data\n", net.n_nodes()));
    let config = json!({ "estimator": a.estimator, "ess": a.ess, "break_cycles": a.break_cycles });
    let mut body = net.to_json();
    body.push('\n');
    Ok(Outcome {
        inputs: vec![a.dataset.clone(), a.graph.clone()],
        outputs: vec![(a.out.clone(), body.into_bytes())],
        config,
        stdout,
        ..Outcome::default()
    })
}

pub fn compare_cmd(a: &CompareArgs) -> Result<Outcome, CliError> {
    let left = load_graph(&a.left)?;
    let right = load_graph(&a.right)?;
    let diff = left.compare(&right)?;
    Ok(Outcome {
        inputs: vec![a.left.clone(), a.right.clone()],
        outputs: a.out.iter().map(|p| (p.clone(), pretty(&diff))).collect(),
        stdout: diff.summary(),
        ..Outcome::default()
    })
}

pub fn infer_cmd(a: &InferArgs) -> Result<Outcome, CliError> {
    let net = load_net(&a.net)?;
    let evidence = match &a.evidence {
        Some(text) => parse_evidence(&net, text)?,
        None => BTreeMap::new(),
    };
    let q = cpscausal::Query { target: a.target.clone(), evidence };
    let dist = posterior(&net, &q)?;
    let label = |var: &str, s: usize| net.variable(var).expect("validated").states[s].clone();
    let distribution: serde_json::Map<String, Value> =
        dist.iter().enumerate().map(|(s, &p)| (label(&a.target, s), json!(p))).collect();
    let evidence: serde_json::Map<String, Value> =
        q.evidence.iter().map(|(k, &s)| (k.clone(), json!(label(k, s)))).collect();
    let body = json!({ "target": a.target, "evidence": evidence, "distribution": distribution });
    let bytes = pretty(&body);
    Ok(Outcome {
        inputs: vec![a.net.clone()],
        stdout: String::from_utf8(bytes.clone()).expect("utf-8"),
        outputs: a.out.iter().map(|p| (p.clone(), bytes.clone())).collect(),
        ..Outcome::default()
    })
}

pub fn impact_cmd(a: &ImpactArgs) -> Result<Outcome, CliError> {
    let mut cfg = match a.theta {
        Some(t) => ImpactConfig::with_theta(t).map_err(|e| CliError::Usage(e.to_string()))?,
        None => ImpactConfig::default(),
    };
    cfg.candidate_rule = a.candidate_rule.parse::<CandidateRule>().map_err(|e| CliError::Usage(e.to_string()))?;
    cfg.condition_preconditions = a.condition_preconditions;
    let net = load_net(&a.net)?;
    let mut attacks = parse_attacks(&read_text(&a.attacks)?)?;
    if let Some(id) = &a.attack {
        attacks.retain(|x| &x.id == id);
        if attacks.is_empty() {
            return Err(CliError::Usage(format!("no attack with id `{id}`")));
        }
    }
    let mut reports = Vec::with_capacity(attacks.len());
    let mut stdout = String::new();
    for mut attack in attacks {
        // An explicit --theta wins over per-attack thresholds.
        if a.theta.is_some() {
            attack.theta = None;
        }
        let r = discover_impact(&net, &attack, &cfg)?;
        stdout.push_str(&r.table());
        reports.push(r);
    }
    Ok(Outcome {
        inputs: vec![a.net.clone(), a.attacks.clone()],
        outputs: a.out.iter().map(|p| (p.clone(), pretty(&reports))).collect(),
        config: json!(cfg),
        stdout,
        ..Outcome::default()
    })
}

pub fn sample_cmd(a: &SampleArgs) -> Result<Outcome, CliError> {
    let (net, inputs) = match (&a.fixture, &a.net) {
        (Some(name), None) => (
            fixtures::net(name).ok_or_else(|| {
                CliError::Usage(format!("unknown fixture `{name}` (known: {})", fixtures::NETS.join(", ")))
            })?,
            Vec::new(),
        ),
        (None, Some(path)) => (load_net(path)?, vec![path.clone()]),
        _ => return Err(CliError::Usage("pass exactly one of --fixture or --net".into())),
    };
    let clamp = match &a.clamp {
        Some(text) => parse_evidence(&net, text)?,
        None => BTreeMap::new(),
    };
    let ds = sample_with_clamp(&net, a.n, a.seed, &clamp)?;
    let log = render_log(&ds, a.seed);
    let mut outputs = vec![(a.out.clone(), log.to_csv().into_bytes())];
    if let Some(p) = &a.spec_out {
        outputs.push((p.clone(), format_specs(net.variables()).into_bytes()));
    }
    let config = json!({ "fixture": a.fixture, "n": a.n, "clamp": a.clamp });
    Ok(Outcome {
        inputs,
        outputs,
        config,
        seed: Some(a.seed),
        stdout: format!("sampled {} records\n", ds.n_records()),
    })
}

pub fn export_cmd(a: &ExportArgs) -> Result<Outcome, CliError> {
    let g = load_graph(&a.graph)?;
    let body = match a.format {
        ExportFormat::Dot => g.to_dot(),
        ExportFormat::Json => String::from_utf8(pretty(&g)).expect("utf-8"),
        ExportFormat::Domain => cpscausal::domain::format_domain_graph(&g),
    };
    Ok(Outcome {
        inputs: vec![a.graph.clone()],
        stdout: if a.out.is_none() { body.clone() } else { String::new() },
        outputs: a.out.iter().map(|p| (p.clone(), body.clone().into_bytes())).collect(),
        config: json!({ "format": a.format }),
        ..Outcome::default()
    })
}

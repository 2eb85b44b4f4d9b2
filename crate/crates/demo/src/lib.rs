//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes plain strings and numbers and returns a JSON string,
//! so the page needs no bundler or generated TypeScript types.

use cpscausal::domain::load_domain_graph;
use cpscausal::impact::{discover_impact, CandidateRule};
use cpscausal::inference::{parse_evidence, posterior};
use cpscausal::sim::forward_sample;
use cpscausal::structure::{extend_to_dag, learn_cl, learn_hc, learn_pc, ClConfig, HcConfig, PcConfig};
use cpscausal::{fixtures, AttackSpec, BayesNet, ImpactConfig, Query};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Networks too large to list usefully in a drop-down are left out.
const DEMO_NETS: [&str; 4] = ["stage1", "attack1", "twostage12", "plant"];

fn net(name: &str) -> Result<BayesNet, String> {
    fixtures::net(name).ok_or_else(|| format!("unknown network `{name}`"))
}

fn split_list(text: &str) -> Vec<String> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

pub fn networks_json() -> String {
    let list: Vec<_> = DEMO_NETS
        .iter()
        .map(|&n| {
            let net = fixtures::net(n).expect("shipped fixture");
            let vars: Vec<_> = net.variables().iter().map(|v| json!({ "name": v.name, "states": v.states })).collect();
            json!({ "name": n, "variables": vars, "edges": net.graph().n_edges() })
        })
        .collect();
    json!(list).to_string()
}

pub fn impact_json(network: &str, targeted: &str, theta: f64, rule: &str) -> Result<String, String> {
    let net = net(network)?;
    let mut cfg = ImpactConfig::with_theta(theta).map_err(|e| e.to_string())?;
    cfg.candidate_rule = rule.parse::<CandidateRule>().map_err(|e| e.to_string())?;
    let targets = split_list(targeted);
    let refs: Vec<&str> = targets.iter().map(String::as_str).collect();
    let report = discover_impact(&net, &AttackSpec::new("demo", &refs), &cfg).map_err(|e| e.to_string())?;
    Ok(json!({ "report": report, "table": report.table() }).to_string())
}

pub fn posterior_json(network: &str, target: &str, evidence: &str) -> Result<String, String> {
    let net = net(network)?;
    let evidence = parse_evidence(&net, evidence).map_err(|e| e.to_string())?;
    let q = Query { target: target.to_string(), evidence };
    let dist = posterior(&net, &q).map_err(|e| e.to_string())?;
    let states = &net.variable(target).expect("validated by the query").states;
    let rows: Vec<_> = states.iter().zip(&dist).map(|(s, p)| json!({ "state": s, "p": p })).collect();
    Ok(json!({ "target": target, "distribution": rows }).to_string())
}

/// Sample the stage-1 network, learn a graph and diff it against the
/// stage-1 domain graph.
pub fn learn_vs_domain_json(algo: &str, records: usize, seed: u64) -> Result<String, String> {
    let truth = net("stage1")?;
    let data = forward_sample(&truth, records.clamp(100, 200_000), seed).map_err(|e| e.to_string())?;
    let learnt = match algo {
        "pc" => {
            let pdag = learn_pc(&data, &PcConfig::default()).map_err(|e| e.to_string())?.graph;
            extend_to_dag(&pdag).map_err(|e| e.to_string())?
        }
        "hc" => learn_hc(&data, &HcConfig::default()).map_err(|e| e.to_string())?.graph,
        "cl" => learn_cl(&data, &ClConfig { root: "LIT101".into() }).map_err(|e| e.to_string())?,
        other => return Err(format!("unknown algorithm `{other}` (expected pc, hc or cl)")),
    };
    let domain = load_domain_graph(fixtures::domain_spec("stage1").expect("shipped")).map_err(|e| e.to_string())?;
    let diff = domain.compare(&learnt).map_err(|e| e.to_string())?;
    Ok(json!({
        "algo": algo,
        "records": data.n_records(),
        "learnt": learnt,
        "domain": domain,
        "diff": diff,
        "summary": diff.summary(),
        "dot": learnt.to_dot(),
    })
    .to_string())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = networks)]
pub fn networks() -> String {
    networks_json()
}

#[wasm_bindgen(js_name = impact)]
pub fn impact(network: &str, targeted: &str, theta: f64, rule: &str) -> Result<String, JsError> {
    js(impact_json(network, targeted, theta, rule))
}

#[wasm_bindgen(js_name = posterior)]
pub fn posterior_query(network: &str, target: &str, evidence: &str) -> Result<String, JsError> {
    js(posterior_json(network, target, evidence))
}

#[wasm_bindgen(js_name = learnVsDomain)]
pub fn learn_vs_domain(algo: &str, records: u32, seed: u32) -> Result<String, JsError> {
    js(learn_vs_domain_json(algo, records as usize, seed as u64))
}

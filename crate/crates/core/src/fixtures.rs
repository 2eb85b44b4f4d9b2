//! Ground-truth networks, domain-graph specs and attack lists shipped with
//! the crate.
//!
//! CPTs are synthetic. They echo the qualitative behaviour of a water
//! treatment plant (for example, the inlet valve is mostly closed when the
//! raw-water tank level is low) but are not estimates from plant data.

use std::collections::BTreeMap;

use crate::data::VariableSpec;
use crate::domain::load_domain_graph;
use crate::estimation::{BayesNet, Cpt};
use crate::graph::{break_cycles, CausalGraph, CycleRepair, EdgeKind};
use crate::impact::{parse_attacks, stage_from_name, AttackSpec};
use crate::rng::SplitMix64;

pub const NETS: [&str; 8] = ["stage1", "stage6", "chain3", "fork3", "collider3", "twostage12", "attack1", "plant"];

pub const DOMAIN_SPECS: [&str; 6] = ["stage1", "stage2", "stage3", "stage4", "stage5", "stage6"];

pub const ATTACK_FILES: [&str; 2] = ["swat", "stage1"];

/// A network with known parameters plus the plant stage of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureNet {
    pub name: String,
    pub net: BayesNet,
    pub stage_of: BTreeMap<String, u32>,
}

pub fn domain_spec(name: &str) -> Option<&'static str> {
    Some(match name {
        "stage1" => include_str!("../fixtures/domain/stage1.txt"),
        "stage2" => include_str!("../fixtures/domain/stage2.txt"),
        "stage3" => include_str!("../fixtures/domain/stage3.txt"),
        "stage4" => include_str!("../fixtures/domain/stage4.txt"),
        "stage5" => include_str!("../fixtures/domain/stage5.txt"),
        "stage6" => include_str!("../fixtures/domain/stage6.txt"),
        _ => return None,
    })
}

pub fn attacks_json(name: &str) -> Option<&'static str> {
    Some(match name {
        "swat" => include_str!("../fixtures/attacks/swat.json"),
        "stage1" => include_str!("../fixtures/attacks/stage1.json"),
        _ => return None,
    })
}

pub fn attacks(name: &str) -> Option<Vec<AttackSpec>> {
    attacks_json(name).map(|t| parse_attacks(t).expect("shipped attack files parse"))
}

pub fn net(name: &str) -> Option<BayesNet> {
    fixture(name).map(|f| f.net)
}

pub fn fixture(name: &str) -> Option<FixtureNet> {
    let net = match name {
        "stage1" => stage1(),
        "stage6" => stage6(),
        "chain3" => chain3(),
        "fork3" => fork3(),
        "collider3" => collider3(),
        "twostage12" => twostage12(),
        "attack1" => attack1(),
        "plant" => plant(),
        _ => return None,
    };
    let stage_of = net
        .graph()
        .nodes()
        .iter()
        .map(|n| (n.clone(), stage_from_name(n).unwrap_or(0)))
        .collect();
    Some(FixtureNet { name: name.to_string(), net, stage_of })
}

/// `(child, rows)` with rows ordered over the parents sorted by name.
type Table<'a> = (&'a str, Vec<Vec<f64>>);

fn assemble(variables: Vec<VariableSpec>, edges: &[(&str, &str, EdgeKind)], tables: Vec<Table<'_>>) -> BayesNet {
    let names: Vec<&str> = variables.iter().map(|v| v.name.as_str()).collect();
    let mut g = CausalGraph::new(names.iter().copied()).expect("distinct names");
    for (s, d, k) in edges {
        g.add_edge(s, d, *k).expect("valid edge");
    }
    let card = |n: &str| variables.iter().find(|v| v.name == n).expect("declared").cardinality();
    let cpts = tables
        .into_iter()
        .map(|(child, table)| {
            let parents = g.parents(child).expect("node exists");
            Cpt {
                child: child.to_string(),
                parent_cards: parents.iter().map(|p| card(p)).collect(),
                parents,
                table,
                unseen_rows: Vec::new(),
            }
        })
        .collect();
    BayesNet::new(g, variables, cpts).expect("fixture is a valid network")
}

fn sensor(name: &str, states: &[&str], edges: &[f64]) -> VariableSpec {
    VariableSpec::sensor(name, states, edges).expect("valid sensor")
}

fn on_off(name: &str) -> VariableSpec {
    VariableSpec::actuator(name, &["Off", "On"], Some(&[1, 2])).expect("valid actuator")
}

fn valve(name: &str) -> VariableSpec {
    VariableSpec::actuator(name, &["Close", "Open"], Some(&[1, 2])).expect("valid actuator")
}

fn binary(name: &str) -> VariableSpec {
    VariableSpec::indexed(name, 2)
}

const C: EdgeKind = EdgeKind::Control;
const P: EdgeKind = EdgeKind::Physical;
const L: EdgeKind = EdgeKind::Learnt;

fn stage1_parts() -> (Vec<VariableSpec>, Vec<(&'static str, &'static str, EdgeKind)>, Vec<Table<'static>>) {
    let vars = vec![
        sensor("LIT101", &["Low", "Medium", "High"], &[250.0, 800.0]),
        valve("MV101"),
        on_off("P101"),
        on_off("P102"),
        sensor("FIT101", &["Low", "High"], &[0.5]),
    ];
    let edges = vec![
        ("LIT101", "MV101", C),
        ("LIT101", "P101", C),
        ("LIT101", "P102", C),
        ("MV101", "FIT101", P),
    ];
    let tables = vec![
        ("LIT101", vec![vec![0.04, 0.74, 0.22]]),
        ("MV101", vec![vec![0.85, 0.15], vec![0.15, 0.85], vec![0.70, 0.30]]),
        ("P101", vec![vec![0.98, 0.02], vec![0.18, 0.82], vec![0.67, 0.33]]),
        ("P102", vec![vec![0.99, 0.01], vec![0.9, 0.1], vec![0.8, 0.2]]),
        ("FIT101", vec![vec![0.97, 0.03], vec![0.02, 0.98]]),
    ];
    (vars, edges, tables)
}

/// Raw-water stage: tank level drives the inlet valve and both pumps.
fn stage1() -> BayesNet {
    let (v, e, t) = stage1_parts();
    assemble(v, &e, t)
}

fn stage6() -> BayesNet {
    assemble(
        vec![on_off("P602"), sensor("FIT601", &["Low", "High"], &[0.5])],
        &[("P602", "FIT601", P)],
        vec![("P602", vec![vec![0.7, 0.3]]), ("FIT601", vec![vec![0.95, 0.05], vec![0.1, 0.9]])],
    )
}

fn chain3() -> BayesNet {
    assemble(
        vec![binary("A"), binary("B"), binary("C")],
        &[("A", "B", L), ("B", "C", L)],
        vec![
            ("A", vec![vec![0.6, 0.4]]),
            ("B", vec![vec![0.9, 0.1], vec![0.2, 0.8]]),
            ("C", vec![vec![0.85, 0.15], vec![0.3, 0.7]]),
        ],
    )
}

fn fork3() -> BayesNet {
    assemble(
        vec![binary("A"), binary("B"), binary("C")],
        &[("B", "A", L), ("B", "C", L)],
        vec![
            ("B", vec![vec![0.5, 0.5]]),
            ("A", vec![vec![0.9, 0.1], vec![0.25, 0.75]]),
            ("C", vec![vec![0.8, 0.2], vec![0.15, 0.85]]),
        ],
    )
}

/// Noisy-OR collider: leak 0.05, activation 0.8 from A and 0.7 from B.
fn collider3() -> BayesNet {
    let on = |a: f64, b: f64| 1.0 - 0.95 * (1.0 - 0.8 * a) * (1.0 - 0.7 * b);
    let rows = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
        .iter()
        .map(|&(a, b)| {
            let p = on(a, b);
            vec![1.0 - p, p]
        })
        .collect();
    assemble(
        vec![binary("A"), binary("B"), binary("C")],
        &[("A", "C", L), ("B", "C", L)],
        vec![("A", vec![vec![0.6, 0.4]]), ("B", vec![vec![0.7, 0.3]]), ("C", rows)],
    )
}

/// Stage 1 plus the dosing stage, linked through pump P101.
fn twostage12() -> BayesNet {
    let (mut vars, mut edges, mut tables) = stage1_parts();
    vars.extend([
        sensor("FIT201", &["Low", "High"], &[1.0]),
        sensor("AIT201", &["Low", "High"], &[250.0]),
        sensor("AIT202", &["Low", "High"], &[7.0]),
        sensor("AIT203", &["Low", "High"], &[300.0]),
        on_off("P203"),
        on_off("P205"),
        valve("MV201"),
    ]);
    edges.extend([
        ("P101", "MV201", L),
        ("P101", "FIT201", L),
        ("FIT201", "AIT201", P),
        ("FIT201", "AIT202", P),
        ("FIT201", "AIT203", P),
        ("AIT202", "P203", C),
        ("AIT203", "P205", C),
    ]);
    tables.extend([
        ("MV201", vec![vec![0.8, 0.2], vec![0.15, 0.85]]),
        ("FIT201", vec![vec![0.95, 0.05], vec![0.05, 0.95]]),
        ("AIT201", vec![vec![0.7, 0.3], vec![0.3, 0.7]]),
        ("AIT202", vec![vec![0.6, 0.4], vec![0.1, 0.9]]),
        ("AIT203", vec![vec![0.8, 0.2], vec![0.4, 0.6]]),
        ("P203", vec![vec![0.9, 0.1], vec![0.3, 0.7]]),
        ("P205", vec![vec![0.85, 0.15], vec![0.2, 0.8]]),
    ]);
    assemble(vars, &edges, tables)
}

/// Built so that `P(MV101=Close | FIT101=Low) = 0.98` and the best state
/// pair between MV101 and P101 reaches only 0.80.
fn attack1() -> BayesNet {
    assemble(
        vec![valve("MV101"), sensor("FIT101", &["Low", "High"], &[0.5]), on_off("P101")],
        &[("MV101", "FIT101", L), ("MV101", "P101", L)],
        vec![
            ("MV101", vec![vec![0.5, 0.5]]),
            ("FIT101", vec![vec![0.98, 0.02], vec![0.02, 0.98]]),
            ("P101", vec![vec![0.8, 0.2], vec![0.2, 0.8]]),
        ],
    )
}

/// Variable for a plant tag, typed by its prefix.
fn plant_variable(name: &str) -> VariableSpec {
    if name.starts_with("LIT") {
        sensor(name, &["Low", "Medium", "High"], &[250.0, 800.0])
    } else if name.starts_with("MV") {
        valve(name)
    } else if name.starts_with('P') && !name.starts_with("PIT") {
        on_off(name)
    } else if name.starts_with("UV") {
        on_off(name)
    } else {
        sensor(name, &["Low", "High"], &[1.0])
    }
}

/// Union of the six stage domain graphs, cycles broken, with strongly
/// diagonal CPTs: a child takes state `(sum of parent states) mod card`
/// with probability 0.9 and spreads the rest evenly.
fn plant() -> BayesNet {
    let mut g = CausalGraph::new(Vec::<String>::new()).expect("empty graph");
    for s in DOMAIN_SPECS {
        let part = load_domain_graph(domain_spec(s).expect("shipped")).expect("shipped spec parses");
        for n in part.nodes() {
            g.add_node(n.as_str()).expect("stages share no DPs");
        }
        for e in part.edges() {
            g.add_edge(&e.src, &e.dst, e.kind).expect("valid edge");
        }
    }
    let g = break_cycles(&g, &CycleRepair::Heuristic).expect("heuristic always succeeds").graph;
    let variables: Vec<VariableSpec> = g.nodes().iter().map(|n| plant_variable(n)).collect();
    let card = |n: &str| variables[g.node_index(n).expect("node")].cardinality();
    let cpts = g
        .nodes()
        .iter()
        .map(|child| {
            let parents = g.parents(child).expect("node");
            let pc: Vec<usize> = parents.iter().map(|p| card(p)).collect();
            let k = card(child);
            let rows: usize = pc.iter().product();
            let table = (0..rows)
                .map(|r| {
                    if parents.is_empty() {
                        return vec![1.0 / k as f64; k];
                    }
                    let mut states = Vec::with_capacity(pc.len());
                    let mut rem = r;
                    for &c in pc.iter().rev() {
                        states.push(rem % c);
                        rem /= c;
                    }
                    let hot = states.iter().sum::<usize>() % k;
                    (0..k).map(|s| if s == hot { 0.9 } else { 0.1 / (k - 1) as f64 }).collect()
                })
                .collect();
            Cpt { child: child.clone(), parents, parent_cards: pc, table, unseen_rows: Vec::new() }
        })
        .collect();
    BayesNet::new(g, variables, cpts).expect("plant network is valid")
}

/// One binary-or-wider root node named `A`.
pub fn single_node(prior: &[f64]) -> BayesNet {
    assemble(vec![VariableSpec::indexed("A", prior.len())], &[], vec![("A", vec![prior.to_vec()])])
}

/// `X0 -> X1 -> ... ` where each node copies its parent; `X0` is uniform.
pub fn deterministic_chain(n: usize) -> BayesNet {
    let names: Vec<String> = (0..n).map(|i| format!("X{i}")).collect();
    let vars = names.iter().map(|s| binary(s)).collect();
    let edges: Vec<(&str, &str, EdgeKind)> = names.windows(2).map(|w| (w[0].as_str(), w[1].as_str(), L)).collect();
    let mut tables: Vec<Table> = vec![(names[0].as_str(), vec![vec![0.5, 0.5]])];
    for s in &names[1..] {
        tables.push((s.as_str(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]));
    }
    assemble(vars, &edges, tables)
}

/// Random DAG over `N00..` in which each ordered pair `i < j` (in a random
/// permutation) is an edge with probability `density`.
pub fn random_dag(rng: &mut SplitMix64, n: usize, density: f64) -> CausalGraph {
    let names: Vec<String> = (0..n).map(|i| format!("N{i:02}")).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
    }
    let mut g = CausalGraph::new(names.iter().map(String::as_str)).expect("distinct");
    for a in 0..n {
        for b in a + 1..n {
            if rng.next_f64() < density {
                g.add_edge(&names[perm[a]], &names[perm[b]], L).expect("fresh edge");
            }
        }
    }
    g
}

/// Random network: DAG from [`random_dag`], 2..=`max_states` states per
/// node, at most `max_parents` parents, CPT rows from normalized uniforms
/// with occasional exact zeros.
pub fn random_net(seed: u64, n: usize, max_states: usize, max_parents: usize) -> BayesNet {
    let mut rng = SplitMix64::new(seed);
    let mut g = random_dag(&mut rng, n, 0.35);
    for v in 0..g.n_nodes() {
        let parents = g.parents_idx(v);
        for &p in parents.iter().skip(max_parents) {
            g.remove_edge_idx(p, v);
        }
    }
    let variables: Vec<VariableSpec> = g
        .nodes()
        .iter()
        .map(|name| VariableSpec::indexed(name, 2 + (rng.next_u64() % (max_states as u64 - 1)) as usize))
        .collect();
    let cpts = (0..g.n_nodes())
        .map(|v| {
            let parents = g.parents(g.name(v)).expect("node");
            let pc: Vec<usize> = parents.iter().map(|p| variables[g.node_index(p).expect("node")].cardinality()).collect();
            let k = variables[v].cardinality();
            let rows: usize = pc.iter().product();
            let table = (0..rows)
                .map(|_| {
                    let mut w: Vec<f64> = (0..k)
                        .map(|_| if rng.next_f64() < 0.1 { 0.0 } else { rng.next_f64() + 1e-3 })
                        .collect();
                    if w.iter().all(|&x| x == 0.0) {
                        w[0] = 1.0;
                    }
                    let z: f64 = w.iter().sum();
                    w.iter().map(|x| x / z).collect()
                })
                .collect();
            Cpt { child: g.name(v).to_string(), parents, parent_cards: pc, table, unseen_rows: Vec::new() }
        })
        .collect();
    BayesNet::new(g, variables, cpts).expect("random network is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_builds() {
        for n in NETS {
            let f = fixture(n).unwrap();
            assert!(f.net.graph().is_dag());
            assert_eq!(f.stage_of.len(), f.net.n_nodes());
        }
        assert!(net("nope").is_none());
    }

    #[test]
    fn fixture_shapes() {
        assert_eq!(net("stage1").unwrap().n_nodes(), 5);
        assert_eq!(net("stage1").unwrap().graph().n_edges(), 4);
        assert_eq!(net("stage6").unwrap().n_nodes(), 2);
        assert_eq!(net("twostage12").unwrap().n_nodes(), 12);
        let plant = net("plant").unwrap();
        assert_eq!(plant.n_nodes(), 48);
        assert!(!plant.graph().has_edge("MV302", "P301"));
        assert!(plant.graph().has_edge("P301", "MV302"));
    }

    #[test]
    fn stage1_echoes_plant_behaviour() {
        let net = net("stage1").unwrap();
        // Inlet valve mostly closed when the tank is low.
        assert!(net.cpt("MV101").unwrap().table[0][0] > 0.8);
    }

    #[test]
    fn random_nets_respect_limits() {
        for seed in 0..20 {
            let net = random_net(seed, 10, 4, 3);
            for v in 0..net.n_nodes() {
                assert!(net.parents_of(v).len() <= 3);
                assert!((2..=4).contains(&net.cardinality(v)));
            }
        }
    }

    #[test]
    fn attack_lists_load() {
        assert_eq!(attacks("swat").unwrap().len(), 9);
        assert_eq!(attacks("stage1").unwrap().len(), 3);
    }
}

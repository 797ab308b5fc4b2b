//! Acceptance gate. Each test checks one criterion at its full size and
//! writes a single PASS/FAIL line to stderr, uncaptured, so the verdicts show
//! up in plain `cargo test` output.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use lbcast::conditions::{check_nc, check_sc, propagates, sc_with_param, unique_source_component};
use lbcast::digraph::{Digraph, NodeId, NodeSet, PathCount};
use lbcast::protocol::trace::{TraceEvent, VecSink};
use lbcast::protocol::{run_algorithm, Bit, Outcome, ProtocolContext};
use lbcast::simulator::{
    build_copy_network, random, run_three_executions, threshold, AdversaryKind, HashSink, JsonlSink, Network,
    ReplayValidator, ValidationSummary,
};
use rayon::prelude::*;

use common::{brute_disjoint, brute_sc, brute_source_components, nc_violation, satisfies_sc, seeded_graphs, sigma_edges};

fn verdict(id: u32, name: &str, failures: &[String], started: Instant, detail: String) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    let line = format!(
        "acceptance {id} {name}: {status} ({detail}; {:.1}s)\n",
        started.elapsed().as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(failures.is_empty(), "criterion {id} failed:\n{}", failures.join("\n"));
}

fn note(failures: &mut Vec<String>, msg: String) {
    if failures.len() < 20 {
        failures.push(msg);
    }
}

// 1. Disjoint-path counts against exhaustive enumeration.

fn compare_counts(g: &Digraph, failures: &mut Vec<String>) -> u64 {
    let all = g.nodes();
    let mut cases = 0;
    for v in all.iter() {
        let rest = all.without(v);
        for a_mask in 0..1u64 << g.n() {
            let a = NodeSet::from_bits(a_mask) & all;
            for x_mask in 0..1u64 << g.n() {
                let x = NodeSet::from_bits(x_mask) & rest;
                if x.bits() != x_mask {
                    continue;
                }
                cases += 1;
                let flow = g.count_disjoint_paths(a, v, x).unwrap();
                let brute = brute_disjoint(g, a, v, x);
                let same = match (flow, brute) {
                    (PathCount::Unbounded, None) => true,
                    (PathCount::Finite(k), Some(b)) => k == b,
                    _ => false,
                };
                if !same {
                    note(failures, format!("{g:?} A={a} v={v} X={x}: flow {flow:?}, enumeration {brute:?}"));
                }
            }
        }
    }
    cases
}

#[test]
fn c1_disjoint_path_counts_match_enumeration() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut cases = 0;
    let mut graphs = 0;
    for n in 1..=4 {
        for g in common::all_graphs(n) {
            cases += compare_counts(&g, &mut failures);
            graphs += 1;
        }
    }
    for i in 0..500u64 {
        let n = 5 + (i % 2) as usize;
        let p = [0.2, 0.35, 0.5, 0.7][(i / 2 % 4) as usize];
        let g = random(n, p, 10_000 + i).unwrap();
        cases += compare_counts(&g, &mut failures);
        graphs += 1;
    }
    let detail = format!("{graphs} graphs, {cases} (A, v, X) cases, {} mismatches", failures.len());
    assert!(t.elapsed() < Duration::from_secs(300), "over the 5 minute budget");
    verdict(1, "disjoint-path counts", &failures, t, detail);
}

// 2. SC and NC decide the same graphs.

#[test]
fn c2_sc_and_nc_agree() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut tally = BTreeMap::new();
    let mut compare = |g: &Digraph, f: usize, with_brute: bool, failures: &mut Vec<String>| {
        let sc = check_sc(g, f).unwrap();
        let nc = check_nc(g, f).unwrap();
        sc.validate(g).unwrap_or_else(|e| note(failures, format!("{g:?}: bad SC witness: {e}")));
        nc.validate(g).unwrap_or_else(|e| note(failures, format!("{g:?}: bad NC witness: {e}")));
        if sc.holds() != nc.holds() {
            note(failures, format!("{g:?} f={f}: SC {} vs NC {}", sc.holds(), nc.holds()));
        }
        if with_brute && brute_sc(g, f) != sc.holds() {
            note(failures, format!("{g:?} f={f}: SC decider disagrees with enumeration"));
        }
        *tally.entry((g.n(), f, sc.holds())).or_insert(0u32) += 1;
    };
    for n in 2..=4 {
        for g in common::all_graphs(n) {
            compare(&g, 1, true, &mut failures);
        }
    }
    for i in 0..300u64 {
        let n = 5 + (i % 2) as usize;
        let f = 1 + (i / 2 % 2) as usize;
        // Dense graphs for f = 2, or nothing would satisfy either condition.
        let p = if f == 1 { [0.4, 0.6, 0.8][(i % 3) as usize] } else { [0.8, 0.9, 1.0][(i % 3) as usize] };
        let g = random(n, p, 20_000 + i).unwrap();
        compare(&g, f, false, &mut failures);
    }
    let holds: u32 = tally.iter().filter(|(k, _)| k.2).map(|(_, c)| c).sum();
    let total: u32 = tally.values().sum();
    let detail = format!("{total} graphs, {holds} satisfy both, {} disagreements", failures.len());
    verdict(2, "SC iff NC", &failures, t, detail);
}

// 3. Structure of the source component under SC.

fn source_component_checks(g: &Digraph, f: usize, failures: &mut Vec<String>) -> u32 {
    let ctx = ProtocolContext::new(g.clone(), f).unwrap();
    let mut checked = 0;
    for info in ctx.phases() {
        let fault = info.fault_set;
        if !sc_with_param(g, fault, f).unwrap().holds() {
            continue;
        }
        checked += 1;
        let tag = format!("{g:?} f={f} F={fault}");
        let rest = g.nodes() - fault;

        let brute = brute_source_components(g, rest);
        let s = match unique_source_component(g, fault) {
            Ok(s) => s,
            Err(e) => {
                note(failures, format!("{tag}: {e}"));
                continue;
            }
        };
        if brute != vec![s] || info.source != s || !info.source_unique {
            note(failures, format!("{tag}: source component {s} vs enumeration {brute:?}"));
        }

        let candidates = s | g.in_neighborhood(fault, s);
        if info.candidates != candidates {
            note(failures, format!("{tag}: candidates {} vs {candidates}", info.candidates));
        }
        let (sub, ids) = g.induced(candidates).unwrap();
        let sub_fault: NodeSet = ids.iter().enumerate().filter(|(_, v)| fault.contains(**v)).map(|(i, _)| NodeId::new(i)).collect();
        if !sc_with_param(&sub, sub_fault, f).unwrap().holds() {
            note(failures, format!("{tag}: G[S ∪ N_F(S)] violates SC with parameter F"));
        }

        for u in candidates.iter() {
            for v in s.iter() {
                match info.canonical_path(g.n(), u, v) {
                    Some(p)
                        if p.is_simple_path_in(g)
                            && p.source() == Some(u)
                            && p.terminal() == Some(v)
                            && !p.internal_set().intersects(fault) => {}
                    other => note(failures, format!("{tag}: canonical path {u}->{v}: {other:?}")),
                }
            }
        }

        // Every way the candidate vote could split.
        let members: Vec<NodeId> = candidates.iter().collect();
        for mask in 0..1u64 << members.len() {
            let zero: NodeSet = members.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
            let nonzero = candidates - zero;
            let (zf, nf) = (zero - fault, nonzero - fault);
            if zf.is_empty() || nf.is_empty() {
                continue;
            }
            let (a, b) = if propagates(g, zero, nf, fault, f).unwrap() { (zero, nf) } else { (nonzero, zf) };
            for v in b.iter() {
                if !g.count_disjoint_paths(a, v, fault).unwrap().at_least(f + 1) {
                    note(failures, format!("{tag}: Z={zero}: {v} in B lacks {} disjoint paths from {a}", f + 1));
                }
                if g.n() <= 6 && brute_disjoint(g, a, v, fault).is_some_and(|k| k <= f) {
                    note(failures, format!("{tag}: Z={zero}: enumeration finds too few paths {a}->{v}"));
                }
            }
        }

        if !propagates(g, s, rest - s, fault, f).unwrap() {
            note(failures, format!("{tag}: S does not propagate to V - S - F"));
        }
        if info.outside != rest - s {
            note(failures, format!("{tag}: outside set {}", info.outside));
        }
    }
    checked
}

#[test]
fn c3_source_component_properties() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut corpus: Vec<(usize, Digraph)> = Vec::new();
    for (n, p) in [(4, 0.6), (5, 0.55), (6, 0.5), (7, 0.5), (8, 0.45)] {
        corpus.extend(seeded_graphs(&[n], p, 30_000 + n as u64 * 1000, 36, |g| satisfies_sc(g, 1)).into_iter().map(|(_, g)| (1, g)));
    }
    for n in [7, 8] {
        corpus.extend(seeded_graphs(&[n], 0.85, 40_000 + n as u64 * 1000, 10, |g| satisfies_sc(g, 2)).into_iter().map(|(_, g)| (2, g)));
    }
    let mut pairs = 0;
    for (f, g) in &corpus {
        pairs += source_component_checks(g, *f, &mut failures);
    }
    let detail = format!("{} SC graphs, {pairs} (graph, F) pairs, {} failures", corpus.len(), failures.len());
    assert!(corpus.len() >= 200);
    verdict(3, "source component properties", &failures, t, detail);
}

// 4. End-to-end consensus on SC graphs. The replay summaries feed criterion 6.

struct EndToEnd {
    graphs: usize,
    runs: u64,
    failures: Vec<String>,
    replay_errors: usize,
    summary: ValidationSummary,
    elapsed: Duration,
}

fn end_to_end_corpus() -> Vec<(String, Digraph)> {
    let mut corpus = vec![
        ("K4".to_string(), Digraph::complete(4).unwrap()),
        ("threshold(6,1)".to_string(), threshold(6, 1).unwrap()),
    ];
    for (n, p, count) in [(5, 0.5, 7), (6, 0.45, 7), (7, 0.4, 6)] {
        for (seed, g) in seeded_graphs(&[n], p, 50_000 + n as u64 * 1000, count, |g| satisfies_sc(g, 1)) {
            corpus.push((format!("random({n},{p},{seed})"), g));
        }
    }
    corpus
}

/// Inputs for the non-faulty nodes from `mask`; faulty nodes get 0.
fn inputs_from_mask(n: usize, faulty: NodeSet, mask: u64) -> Vec<Bit> {
    let mut bits = mask;
    (0..n)
        .map(|i| {
            if faulty.contains(NodeId::new(i)) {
                Bit::Zero
            } else {
                let b = Bit::from(bits & 1 == 1);
                bits >>= 1;
                b
            }
        })
        .collect()
}

fn end_to_end() -> &'static EndToEnd {
    static RESULT: OnceLock<EndToEnd> = OnceLock::new();
    RESULT.get_or_init(|| {
        let t = Instant::now();
        let corpus = end_to_end_corpus();
        let mut failures = Vec::new();
        let mut summary = ValidationSummary::default();
        let mut replay_errors = 0;
        let mut runs = 0;
        for (name, g) in &corpus {
            assert!(satisfies_sc(g, 1), "{name} must satisfy SC");
            let n = g.n();
            let ctx = ProtocolContext::new(g.clone(), 1).unwrap();
            let network = Arc::new(Network::from_graph(g));
            let expected_rounds = ctx.plan().len() as u64 * 2 * n as u64;
            for faulty in g.nodes().subsets_up_to(1) {
                // With no faulty node every strategy is the same run.
                let kinds: &[AdversaryKind] = if faulty.is_empty() { &[AdversaryKind::Silent] } else { &AdversaryKind::ALL };
                let honest = n - faulty.len();
                assert!(honest <= 8, "input space would need sampling");
                for &kind in kinds {
                    for mask in 0..1u64 << honest {
                        let inputs = inputs_from_mask(n, faulty, mask);
                        let seed = mask ^ faulty.bits() << 16;
                        let mut validator = ReplayValidator::new(Arc::clone(&ctx), Arc::clone(&network), true);
                        let report = run_algorithm(&ctx, &inputs, faulty, kind, seed, &mut validator).unwrap();
                        runs += 1;
                        let tag = format!("{name} F*={faulty} {kind} inputs={mask:b}");
                        if !report.agreement || !report.validity {
                            note(&mut failures, format!("{tag}: outputs {:?}", report.outputs));
                        }
                        if report.rounds != expected_rounds {
                            note(&mut failures, format!("{tag}: {} rounds, expected {expected_rounds}", report.rounds));
                        }
                        match validator.finish() {
                            Ok(s) => summary.absorb(&s),
                            Err(errors) => {
                                replay_errors += 1;
                                note(&mut failures, format!("{tag}: replay: {}", errors.join("; ")));
                            }
                        }
                    }
                }
            }
        }
        EndToEnd {
            graphs: corpus.len(),
            runs,
            failures,
            replay_errors,
            summary,
            elapsed: t.elapsed(),
        }
    })
}

#[test]
fn c4_consensus_on_sc_graphs() {
    let t = Instant::now();
    let r = end_to_end();
    let mut failures = r.failures.clone();
    if r.elapsed > Duration::from_secs(30 * 60) {
        failures.push(format!("took {:?}, over 30 minutes", r.elapsed));
    }
    let random = r.graphs - 2;
    if random < 20 {
        failures.push(format!("only {random} random graphs"));
    }
    let detail = format!(
        "{} graphs ({random} random), {} runs, all six adversaries, {:.0}s of runs",
        r.graphs,
        r.runs,
        r.elapsed.as_secs_f64()
    );
    verdict(4, "agreement, validity, termination", &failures, t, detail);
}

// 5. The copy-network harness on graphs violating NC.

struct NecessityRuns {
    cases: Vec<String>,
    failures: Vec<String>,
    replay_errors: usize,
    summary: ValidationSummary,
}

fn necessity_corpus() -> Vec<(String, Digraph)> {
    let mut corpus = vec![
        ("K2".to_string(), Digraph::complete(2).unwrap()),
        ("cycle(3)".to_string(), Digraph::cycle(3).unwrap()),
    ];
    for n in [4, 5, 6] {
        for (seed, g) in seeded_graphs(&[n], 0.45, 60_000 + n as u64 * 1000, 2, |g| nc_violation(g, 1).is_some()) {
            corpus.push((format!("random({n},0.45,{seed})"), g));
        }
    }
    corpus
}

fn necessity_runs() -> &'static NecessityRuns {
    static RESULT: OnceLock<NecessityRuns> = OnceLock::new();
    RESULT.get_or_init(|| {
        let mut failures = Vec::new();
        let mut summary = ValidationSummary::default();
        let mut replay_errors = 0;
        let mut cases = Vec::new();
        for (name, g) in necessity_corpus() {
            let w = nc_violation(&g, 1).expect("corpus graphs violate NC");
            let copy = build_copy_network(&g, 1, &w).unwrap();
            let by_table: BTreeSet<_> = copy
                .edges
                .iter()
                .map(|&(a, b)| (copy.slots[a], copy.slots[b]))
                .collect();
            if by_table != sigma_edges(&g, &w) {
                note(&mut failures, format!("{name}: copy edges differ from the execution-derived edges"));
            }

            let ctx = ProtocolContext::new(g.clone(), 1).unwrap();
            let mut validator = ReplayValidator::new(ctx, Arc::clone(&copy.network), false);
            let (_, triple) = run_three_executions(&g, 1, &w, &mut validator).unwrap();
            match validator.finish() {
                Ok(s) => summary.absorb(&s),
                Err(errors) => {
                    replay_errors += 1;
                    note(&mut failures, format!("{name}: replay: {}", errors.join("; ")));
                }
            }
            if !triple.e1_valid || !triple.e2_valid || !triple.disagreement {
                note(&mut failures, format!("{name}: {triple:?}"));
            }
            cases.push(format!("{name}: {} copies", copy.slots.len()));
        }
        NecessityRuns {
            cases,
            failures,
            replay_errors,
            summary,
        }
    })
}

#[test]
fn c5_copy_network_forces_disagreement() {
    let t = Instant::now();
    let r = necessity_runs();
    let mut failures = r.failures.clone();
    if r.cases.len() < 5 {
        failures.push("fewer than three random graphs".into());
    }
    let detail = format!("{} graphs: {}", r.cases.len(), r.cases.join(", "));
    verdict(5, "necessity harness", &failures, t, detail);
}

// 6. Flooding rules, by replay.

/// Runs split-brain from every single faulty node and checks that no
/// receiver accepted two values on one path from the same sender.
fn rule_two_attack(g: &Digraph, failures: &mut Vec<String>) -> u64 {
    let ctx = ProtocolContext::new(g.clone(), 1).unwrap();
    let mut attempts = 0;
    for bad in g.nodes().iter() {
        let faulty = NodeSet::singleton(bad);
        let inputs = inputs_from_mask(g.n(), faulty, 0b1010);
        let mut sink = VecSink::default();
        run_algorithm(&ctx, &inputs, faulty, AdversaryKind::SplitBrain, 1, &mut sink).unwrap();
        let mut offered: BTreeMap<(u64, usize, usize, String), BTreeSet<Bit>> = BTreeMap::new();
        let mut accepted: BTreeMap<(u64, usize, usize, String), BTreeSet<Bit>> = BTreeMap::new();
        let flood_len = g.n() as u64;
        for e in &sink.0 {
            if let TraceEvent::Decision { round, slot, from_slot, message, outcome } = e {
                if *from_slot != bad.index() {
                    continue;
                }
                let key = (round / flood_len, *slot, *from_slot, message.path.to_string());
                offered.entry(key.clone()).or_default().insert(message.value);
                if *outcome == Outcome::Accepted {
                    accepted.entry(key).or_default().insert(message.value);
                }
            }
        }
        attempts += offered.values().filter(|v| v.len() > 1).count() as u64;
        for (key, values) in accepted {
            if values.len() > 1 {
                note(failures, format!("{g:?}: two values accepted for {key:?}"));
            }
        }
    }
    if attempts == 0 {
        note(failures, format!("{g:?}: split-brain never offered two values"));
    }
    attempts
}

#[test]
fn c6_flooding_rules_hold_on_replay() {
    let t = Instant::now();
    let e2e = end_to_end();
    let nec = necessity_runs();
    let mut failures = Vec::new();
    if e2e.replay_errors + nec.replay_errors > 0 {
        failures.push(format!(
            "replay validation rejected {} traces from criteria 4 and 5",
            e2e.replay_errors + nec.replay_errors
        ));
        failures.extend(e2e.failures.iter().chain(&nec.failures).filter(|f| f.contains("replay")).take(5).cloned());
    }
    let s = &e2e.summary;
    if s.discarded[0] == 0 {
        failures.push("no forged-path discards: forged paths never exercised".into());
    }
    if s.discarded[1] == 0 {
        failures.push("no duplicate-value discards: duplicate values never exercised".into());
    }
    if s.fault_free_checked == 0 || nec.summary.fault_free_checked == 0 {
        failures.push("no fault-free paths checked".into());
    }
    let attempts = rule_two_attack(&Digraph::complete(4).unwrap(), &mut failures)
        + rule_two_attack(&threshold(6, 1).unwrap(), &mut failures);
    let detail = format!(
        "{} decisions replayed, discards by rule {:?}, {} fault-free paths, {} witnesses, {attempts} double-value attempts blocked",
        s.decisions + nec.summary.decisions,
        s.discarded,
        s.fault_free_checked + nec.summary.fault_free_checked,
        s.witnesses_checked + nec.summary.witnesses_checked,
    );
    verdict(6, "flooding rules", &failures, t, detail);
}

// 7. Determinism.

#[derive(Clone)]
struct Config {
    graph: Arc<ProtocolContext>,
    faulty: NodeSet,
    kind: AdversaryKind,
    seed: u64,
    inputs: Vec<Bit>,
}

fn trace_bytes(c: &Config) -> Vec<u8> {
    let mut sink = JsonlSink::new(Vec::new());
    run_algorithm(&c.graph, &c.inputs, c.faulty, c.kind, c.seed, &mut sink).unwrap();
    sink.finish().unwrap()
}

fn trace_hash(c: &Config) -> String {
    let mut sink = HashSink::new();
    run_algorithm(&c.graph, &c.inputs, c.faulty, c.kind, c.seed, &mut sink).unwrap();
    sink.hex_digest()
}

#[test]
fn c7_traces_are_deterministic() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut configs = Vec::new();
    for (i, (_, g)) in end_to_end_corpus().into_iter().take(6).enumerate() {
        let ctx = ProtocolContext::new(g.clone(), 1).unwrap();
        for (j, kind) in AdversaryKind::ALL.into_iter().enumerate() {
            let faulty = NodeSet::singleton(NodeId::new((i + j) % g.n()));
            let seed = (i * 10 + j) as u64;
            configs.push(Config {
                graph: Arc::clone(&ctx),
                faulty,
                kind,
                seed,
                inputs: inputs_from_mask(g.n(), faulty, seed * 37),
            });
        }
    }
    for c in &configs {
        if trace_bytes(c) != trace_bytes(c) {
            note(&mut failures, format!("{} seed {}: traces differ between runs", c.kind, c.seed));
        }
    }
    let serial: Vec<String> = configs.iter().map(trace_hash).collect();
    for threads in [1, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let parallel: Vec<String> = pool.install(|| configs.par_iter().map(trace_hash).collect());
        if parallel != serial {
            note(&mut failures, format!("{threads} threads: trace hashes differ from the serial sweep"));
        }
    }

    // The copy network too.
    let g = Digraph::cycle(3).unwrap();
    let w = nc_violation(&g, 1).unwrap();
    let copy_trace = || {
        let mut sink = JsonlSink::new(Vec::new());
        run_three_executions(&g, 1, &w, &mut sink).unwrap();
        sink.finish().unwrap()
    };
    if copy_trace() != copy_trace() {
        note(&mut failures, "copy network traces differ".into());
    }

    let detail = format!("{} configurations, byte-compared twice and hashed at 1, 2 and 4 threads", configs.len());
    verdict(7, "determinism", &failures, t, detail);
}

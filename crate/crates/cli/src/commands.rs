use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use lbcast::conditions::{check_nc, check_sc, ConditionWitness, Violation, NC_MAX_NODES, SC_MAX_NODES};
use lbcast::digraph::{format_edge_list, Digraph, NodeSet};
use lbcast::protocol::trace::{NullSink, TraceSink};
use lbcast::protocol::{run_algorithm, Bit, ProtocolContext, RunReport};
use lbcast::simulator::{run_three_executions, AdversaryKind, ExecutionTriple, HashSink, JsonlSink};
use rayon::prelude::*;
use serde::Serialize;

use crate::exit;
use crate::options::{CheckArgs, Format, GenArgs, NecessityArgs, RunArgs, SweepArgs};
use crate::report::{self, ScStatus};

pub const MAX_SWEEP_RUNS: usize = 1_000_000;

#[derive(Serialize)]
struct CheckReport {
    graph_hash: String,
    n: usize,
    f: usize,
    sc: ConditionWitness,
    /// Absent when n is above the NC cap.
    nc: Option<ConditionWitness>,
    agree: Option<bool>,
}

pub fn check(args: CheckArgs) -> Result<u8> {
    let g = args.graph.load()?;
    let f = args.graph.f;
    if g.n() > SC_MAX_NODES {
        bail!("graph has {} nodes; the SC check supports at most {SC_MAX_NODES}", g.n());
    }
    let sc = check_sc(&g, f)?;
    let nc = if g.n() <= NC_MAX_NODES {
        Some(check_nc(&g, f)?)
    } else {
        log::warn!("skipping NC: n={} is above its cap of {NC_MAX_NODES}", g.n());
        None
    };
    let agree = nc.as_ref().map(|nc| nc.holds() == sc.holds());
    let code = if sc.holds() { exit::OK } else { exit::VIOLATED };
    let report = CheckReport {
        graph_hash: g.fingerprint(),
        n: g.n(),
        f,
        sc,
        nc,
        agree,
    };
    match args.format {
        Format::Json => report::print_json(&report)?,
        Format::Text => {
            println!("graph {} (n={}, {} edges), f={f}", report.graph_hash, g.n(), g.edge_count());
            println!("{}", report.sc);
            match &report.nc {
                Some(nc) => println!("{nc}"),
                None => println!("NC: skipped (n={} is above {NC_MAX_NODES})", g.n()),
            }
            match agree {
                Some(true) => println!("SC and NC agree"),
                Some(false) => println!("SC and NC DISAGREE"),
                None => {}
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout());
            w.write_record(["condition", "f", "verdict", "fault_set", "detail"])?;
            for witness in std::iter::once(&report.sc).chain(&report.nc) {
                let (verdict, fault) = match witness.violation() {
                    None => ("holds", String::new()),
                    Some(v) => ("violated", v.fault_set().to_string()),
                };
                w.write_record([
                    witness.condition.to_string(),
                    f.to_string(),
                    verdict.to_string(),
                    fault,
                    witness.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    if agree == Some(false) {
        bail!("SC and NC disagree on this graph; this is a bug");
    }
    Ok(code)
}

#[derive(Serialize)]
struct RunOutput<'a> {
    graph_hash: String,
    f: usize,
    sc: ScStatus,
    #[serde(flatten)]
    report: &'a RunReport,
    trace: Option<PathBuf>,
}

pub fn run(args: RunArgs) -> Result<u8> {
    let g = args.graph.load()?;
    let f = args.graph.f;
    let faulty = match args.faulty.expand(&g, f)?.as_slice() {
        [one] => *one,
        _ => bail!("run takes one faulty set; use sweep for --faulty sweep"),
    };
    let inputs = match args.inputs.expand(g.n(), faulty)?.as_slice() {
        [one] => one.clone(),
        _ => bail!("run takes one input assignment; use sweep for --inputs enumerate"),
    };
    let (sc, _) = ScStatus::of(&g, f)?;
    let ctx = ProtocolContext::new(g.clone(), f)?;

    let trace_path = match &args.out {
        Some(dir) => {
            report::ensure_dir(dir)?;
            Some(dir.join("trace.jsonl"))
        }
        None => None,
    };
    let report = match &trace_path {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut sink = JsonlSink::new(BufWriter::new(file));
            let r = run_algorithm(&ctx, &inputs, faulty, args.adversary, args.seed, &mut sink)?;
            sink.finish().with_context(|| format!("writing {}", path.display()))?;
            r
        }
        None => run_algorithm(&ctx, &inputs, faulty, args.adversary, args.seed, &mut NullSink)?,
    };

    let out = RunOutput {
        graph_hash: g.fingerprint(),
        f,
        sc,
        report: &report,
        trace: trace_path.clone(),
    };
    if let Some(dir) = &args.out {
        report::write_json(&dir.join("report.json"), &out)?;
    }
    match args.format {
        Format::Json => report::print_json(&out)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout());
            w.write_record(["node", "faulty", "input", "output"])?;
            for v in g.nodes().iter() {
                let i = v.index();
                w.write_record([
                    i.to_string(),
                    faulty.contains(v).to_string(),
                    inputs[i].to_string(),
                    report.outputs[i].map_or(String::new(), |b| b.to_string()),
                ])?;
            }
            w.flush()?;
        }
        Format::Text => {
            println!(
                "graph {} (n={}), f={f}, faulty={faulty}, adversary={}, seed={}",
                out.graph_hash,
                g.n(),
                args.adversary,
                args.seed
            );
            println!("{}", sc.describe());
            println!("rounds: {}", report.rounds);
            for v in g.nodes().iter() {
                let i = v.index();
                match report.outputs[i] {
                    Some(b) => println!("  node {i}: input {} -> output {b}", inputs[i]),
                    None => println!("  node {i}: faulty"),
                }
            }
            println!("agreement: {}", report::ok(report.agreement));
            println!("validity: {}", report::ok(report.validity));
            if let Some(p) = &trace_path {
                println!("trace: {}", p.display());
            }
        }
    }
    Ok(outcome_code(sc, report.ok()))
}

fn outcome_code(sc: ScStatus, ok: bool) -> u8 {
    match (sc, ok) {
        (ScStatus::Violated, _) => exit::NOT_APPLICABLE,
        (_, true) => exit::OK,
        (_, false) => exit::VIOLATED,
    }
}

#[derive(Clone, Debug, Serialize)]
struct SweepRow {
    run: usize,
    faulty: String,
    adversary: AdversaryKind,
    seed: u64,
    inputs: String,
    outputs: String,
    rounds: u64,
    agreement: bool,
    validity: bool,
    trace_sha256: String,
}

#[derive(Serialize)]
struct SweepSummary {
    graph_hash: String,
    n: usize,
    f: usize,
    sc: ScStatus,
    runs: usize,
    passed: usize,
    failed: usize,
    /// Failed runs per adversary.
    failures_by_adversary: BTreeMap<String, usize>,
    seconds: f64,
}

pub fn sweep(args: SweepArgs) -> Result<u8> {
    let started = Instant::now();
    let g = args.graph.load()?;
    let f = args.graph.f;
    let kinds = args.adversary.kinds();

    let mut jobs: Vec<(NodeSet, AdversaryKind, Vec<Bit>)> = Vec::new();
    for faulty in args.faulty.expand(&g, f)? {
        let inputs = args.inputs.expand(g.n(), faulty)?;
        let count = kinds.len().saturating_mul(inputs.len());
        if jobs.len().saturating_add(count) > MAX_SWEEP_RUNS {
            bail!("sweep would exceed {MAX_SWEEP_RUNS} runs; narrow --faulty, --adversary or --inputs");
        }
        for &kind in &kinds {
            for input in &inputs {
                jobs.push((faulty, kind, input.clone()));
            }
        }
    }
    if jobs.is_empty() {
        bail!("empty sweep space");
    }

    let (sc, _) = ScStatus::of(&g, f)?;
    let ctx = ProtocolContext::new(g.clone(), f)?;
    log::info!("sweeping {} runs on {} threads", jobs.len(), rayon::current_num_threads());
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .enumerate()
        .map(|(run, (faulty, kind, inputs))| {
            let seed = args.seed.wrapping_add(run as u64);
            let mut hash = HashSink::new();
            let r = run_algorithm(&ctx, inputs, *faulty, *kind, seed, &mut hash)?;
            Ok(SweepRow {
                run,
                faulty: faulty.to_string(),
                adversary: *kind,
                seed,
                inputs: report::bits(inputs),
                outputs: report::outputs(&r.outputs),
                rounds: r.rounds,
                agreement: r.agreement,
                validity: r.validity,
                trace_sha256: hash.hex_digest(),
            })
        })
        .collect::<Result<_>>()?;

    let mut failures_by_adversary = BTreeMap::new();
    for row in rows.iter().filter(|r| !(r.agreement && r.validity)) {
        *failures_by_adversary.entry(row.adversary.to_string()).or_insert(0) += 1;
    }
    let failed: usize = failures_by_adversary.values().sum();
    let summary = SweepSummary {
        graph_hash: g.fingerprint(),
        n: g.n(),
        f,
        sc,
        runs: rows.len(),
        passed: rows.len() - failed,
        failed,
        failures_by_adversary,
        seconds: started.elapsed().as_secs_f64(),
    };

    if let Some(dir) = &args.out {
        report::ensure_dir(dir)?;
        write_rows(csv::Writer::from_path(dir.join("sweep.csv"))?, &rows)?;
        report::write_json(&dir.join("summary.json"), &summary)?;
    }
    match args.format {
        Format::Json => report::print_json(&summary)?,
        Format::Csv => write_rows(csv::Writer::from_writer(io::stdout()), &rows)?,
        Format::Text => {
            println!("graph {} (n={}), f={f}", summary.graph_hash, g.n());
            println!("{}", sc.describe());
            println!("runs: {}, passed: {}, failed: {}", summary.runs, summary.passed, summary.failed);
            for (kind, count) in &summary.failures_by_adversary {
                println!("  {kind}: {count} failed");
            }
            if sc == ScStatus::Violated && failed > 0 {
                println!("failures are expected on this graph and do not affect the exit code");
            }
            if let Some(dir) = &args.out {
                println!("rows: {}", dir.join("sweep.csv").display());
            }
        }
    }
    Ok(match sc {
        ScStatus::Violated => exit::OK,
        _ if failed > 0 => exit::VIOLATED,
        _ => exit::OK,
    })
}

fn write_rows<W: Write>(mut w: csv::Writer<W>, rows: &[SweepRow]) -> Result<()> {
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct NecessityReport {
    graph_hash: String,
    f: usize,
    witness: ConditionWitness,
    copies: usize,
    copy_edges: usize,
    #[serde(flatten)]
    triple: ExecutionTriple,
}

pub fn necessity(args: NecessityArgs) -> Result<u8> {
    let g = args.graph.load()?;
    let f = args.graph.f;
    if g.n() > NC_MAX_NODES {
        bail!("graph has {} nodes; the NC check supports at most {NC_MAX_NODES}", g.n());
    }
    let witness = check_nc(&g, f)?;
    let Some(Violation::Nc(w)) = witness.violation().cloned() else {
        bail!("graph satisfies SC (and NC) for f={f}; there is no impossibility witness");
    };

    let (copy, triple) = match &args.out {
        Some(dir) => {
            report::ensure_dir(dir)?;
            let path = dir.join("trace.jsonl");
            let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            let mut sink = JsonlSink::new(BufWriter::new(file));
            let res = run_three_executions(&g, f, &w, &mut sink as &mut dyn TraceSink)?;
            sink.finish()?;
            res
        }
        None => run_three_executions(&g, f, &w, &mut NullSink)?,
    };
    let report = NecessityReport {
        graph_hash: g.fingerprint(),
        f,
        witness,
        copies: copy.slots.len(),
        copy_edges: copy.edges.len(),
        triple,
    };
    if let Some(dir) = &args.out {
        report::write_json(&dir.join("report.json"), &report)?;
    }
    let t = &report.triple;
    match args.format {
        Format::Json => report::print_json(&report)?,
        Format::Csv => {
            let mut out = csv::Writer::from_writer(io::stdout());
            out.write_record(["execution", "node", "faulty", "input", "output", "copy_slot"])?;
            for (i, ex) in t.executions.iter().enumerate() {
                for v in g.nodes().iter() {
                    let k = v.index();
                    out.write_record([
                        format!("E{}", i + 1),
                        k.to_string(),
                        ex.faulty.contains(v).to_string(),
                        ex.inputs[k].map_or(String::new(), |b| b.to_string()),
                        ex.outputs[k].map_or(String::new(), |b| b.to_string()),
                        ex.modeled_by[k].to_string(),
                    ])?;
                }
            }
            out.flush()?;
        }
        Format::Text => {
            println!("{}", report.witness);
            println!("copy network: {} copies, {} edges, {} rounds", report.copies, report.copy_edges, t.rounds);
            for (i, ex) in t.executions.iter().enumerate() {
                let outs: Vec<String> = g
                    .nodes()
                    .iter()
                    .filter_map(|v| ex.outputs[v.index()].map(|b| format!("{v}={b}")))
                    .collect();
                println!("E{} (faulty {}): {}", i + 1, ex.faulty, outs.join(" "));
            }
            println!("E1: all 0: {}", yes(t.e1_valid));
            println!("E2: all 1: {}", yes(t.e2_valid));
            if t.disagreement {
                println!("E3: L-F and R-F disagree: agreement violated");
            } else {
                println!("E3: no disagreement");
            }
        }
    }
    Ok(if t.e1_valid && t.e2_valid && t.disagreement {
        exit::OK
    } else {
        exit::VIOLATED
    })
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn gen(args: GenArgs) -> Result<u8> {
    let g: Digraph = args.spec.generate()?;
    let text = format!("# {}\n{}", args.spec, format_edge_list(&g));
    match &args.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(exit::OK)
}

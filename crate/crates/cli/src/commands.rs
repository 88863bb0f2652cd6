use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use matchsim::classical::{best_known_message_bits, best_known_message_size, lower_bound_bits};
use matchsim::coherent::{
    aggregate_runs, error_terms, simulate_batch, BatchSpec, InputPolicy, RunStats,
};
use matchsim::drift::{paired_visibility, run_blocks};
use matchsim::output::{drift_csv, read_json_lines, resource_csv, write_json_lines, write_text};
use matchsim::resource::{
    advantage_threshold_with, geometric_grid, optimal_mu, resource_curve, ThresholdQuery,
    DEFAULT_N_CAP,
};
use matchsim::seed::run_rng;
use matchsim::{
    AbstainPolicy, BlockLayout, ClassicalBound, CoherentConfig, DriftModel, Protocol, RunRecord,
    SimOptions, Threshold, TiMetric,
};
use serde_json::{json, Value};

use crate::args::*;
use crate::config::{usage, FileConfig};

const DEFAULT_P: f64 = 0.1;

/// What a command printed, wrote and ran with.
pub struct Report {
    pub stdout: String,
    pub settings: Value,
    pub outputs: Vec<PathBuf>,
}

impl Report {
    fn new(stdout: String, settings: Value) -> Self {
        Report {
            stdout,
            settings,
            outputs: Vec::new(),
        }
    }

    /// Writes `contents` to `path` when given.
    fn emit(&mut self, path: Option<&PathBuf>, contents: &str) -> Result<()> {
        if let Some(p) = path {
            write_text(p, contents)?;
            self.outputs.push(p.clone());
        }
        Ok(())
    }
}

pub fn run(command: &Command, cfg: &FileConfig) -> Result<Report> {
    match command {
        Command::Bounds(a) => bounds(a, cfg),
        Command::Simulate(a) => simulate(a, cfg),
        Command::Analytic(a) => analytic(a, cfg),
        Command::OptimizeMu(a) => optimize(a, cfg),
        Command::Threshold(a) => threshold(a, cfg),
        Command::Curve(a) => curve(a, cfg),
        Command::Table2(a) => table2(a),
        Command::Drift(a) => drift(a, cfg),
    }
}

fn target(p: Option<f64>, cfg: &FileConfig) -> Result<f64> {
    let p = p.or(cfg.p).unwrap_or(DEFAULT_P);
    if !(p > 0.0 && p < 0.5) {
        return Err(usage(format!("--p must lie in (0, 0.5), got {p}")));
    }
    Ok(p)
}

fn sizes(n: &[usize], cfg: &FileConfig, default: Option<usize>) -> Result<Vec<usize>> {
    if !n.is_empty() {
        return Ok(n.to_vec());
    }
    cfg.n
        .or(default)
        .map(|n| vec![n])
        .ok_or_else(|| usage("--n is required"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn bounds(a: &BoundsArgs, cfg: &FileConfig) -> Result<Report> {
    let p = target(a.p, cfg)?;
    let ns = sizes(&a.n, cfg, None)?;
    let mut csv = String::from("n,p,best_known,best_known_bits,lower_bound\n");
    for &n in &ns {
        let n = n as u64;
        writeln!(
            csv,
            "{n},{p},{},{},{}",
            best_known_message_size(n, p)?,
            best_known_message_bits(n, p)?,
            lower_bound_bits(n, p)?
        )?;
    }
    let mut r = Report::new(csv.clone(), json!({ "n": ns, "p": p }));
    r.emit(a.out.as_ref(), &csv)?;
    Ok(r)
}

fn simulate(a: &SimulateArgs, cfg: &FileConfig) -> Result<Report> {
    let protocol = a
        .protocol
        .or(cfg.protocol)
        .ok_or_else(|| usage("--protocol is required"))?;
    let n = a.n.or(cfg.n).ok_or_else(|| usage("--n is required"))?;
    let mu = a.mu.or(cfg.mu).ok_or_else(|| usage("--mu is required"))?;
    let trials = a
        .trials
        .or(cfg.trials)
        .ok_or_else(|| usage("--trials is required"))?;
    let seed = a
        .seed
        .or(cfg.seed)
        .ok_or_else(|| usage("--seed is required for simulations"))?;
    let post_select = a.post_select || cfg.post_select.unwrap_or(false);
    let include_dark = a.include_dark || cfg.include_dark.unwrap_or(false);
    let model = cfg.model(&a.model)?;
    let config = CoherentConfig::new(n, mu).map_err(|e| usage(e.to_string()))?;
    if trials == 0 {
        return Err(usage("--trials must be >= 1"));
    }
    let spec = BatchSpec {
        protocol,
        config,
        model,
        options: SimOptions {
            include_dark,
            abstain: if post_select {
                AbstainPolicy::Suppress
            } else {
                AbstainPolicy::Guess
            },
        },
        input: InputPolicy::Random,
        trials,
        seed,
    };
    let records = simulate_batch(&spec)?;
    let stats = aggregate_runs(&records, post_select)?;
    let text = serde_json::to_string_pretty(&stats)? + "\n";
    let settings = json!({
        "protocol": protocol, "n": n, "mu": mu, "trials": trials, "seed": seed,
        "post_select": post_select, "include_dark": include_dark, "model": model,
    });
    let mut r = Report::new(text.clone(), settings);
    r.emit(a.out.as_ref(), &text)?;
    if let Some(path) = &a.records {
        write_json_lines(path, &records)?;
        r.outputs.push(path.clone());
    }
    Ok(r)
}

fn protocols(p: Option<Protocol>) -> Vec<Protocol> {
    p.map(|p| vec![p])
        .unwrap_or_else(|| vec![Protocol::Hm, Protocol::Sm])
}

fn analytic(a: &AnalyticArgs, cfg: &FileConfig) -> Result<Report> {
    let model = cfg.model(&a.model)?;
    let ns = sizes(&a.n, cfg, None)?;
    let mus = if a.mu.is_empty() {
        vec![cfg.mu.ok_or_else(|| usage("--mu is required"))?]
    } else {
        a.mu.clone()
    };
    let protocol = a.protocol.or(cfg.protocol);
    let mut csv =
        String::from("protocol,n,mu,mu_per_pulse,p_abstain,p_wrong_given_output,p_error\n");
    for &protocol in &protocols(protocol) {
        for &n in &ns {
            for &mu in &mus {
                let c = CoherentConfig::new(n, mu).map_err(|e| usage(e.to_string()))?;
                let t = error_terms(protocol, n, mu, &model);
                writeln!(
                    csv,
                    "{protocol},{n},{mu},{},{},{},{}",
                    c.mu_per_pulse(),
                    t.p_abstain,
                    t.p_wrong_given_output,
                    t.total()
                )?;
            }
        }
    }
    let mut r = Report::new(
        csv.clone(),
        json!({ "protocol": protocol, "n": ns, "mu": mus, "model": model }),
    );
    r.emit(a.out.as_ref(), &csv)?;
    Ok(r)
}

fn optimize(a: &OptimizeArgs, cfg: &FileConfig) -> Result<Report> {
    let model = cfg.model(&a.model)?;
    let p = target(a.p, cfg)?;
    let protocol = a
        .protocol
        .or(cfg.protocol)
        .ok_or_else(|| usage("--protocol is required"))?;
    let ns = sizes(&a.n, cfg, Some(1000))?;
    let mut csv = String::from("protocol,n,p_target,mu_opt,mu_per_pulse,p_error\n");
    for &n in &ns {
        let mu =
            optimal_mu(protocol, n, &model, p).with_context(|| format!("{protocol} at n = {n}"))?;
        let e = error_terms(protocol, n, mu, &model).total();
        writeln!(csv, "{protocol},{n},{p},{mu},{},{e}", mu / n as f64)?;
    }
    let mut r = Report::new(
        csv.clone(),
        json!({ "protocol": protocol, "n": ns, "p": p, "model": model }),
    );
    r.emit(a.out.as_ref(), &csv)?;
    Ok(r)
}

fn threshold(a: &ThresholdArgs, cfg: &FileConfig) -> Result<Report> {
    let q = ThresholdQuery {
        protocol: a
            .protocol
            .or(cfg.protocol)
            .ok_or_else(|| usage("--protocol is required"))?,
        model: cfg.model(&a.model)?,
        p_target: target(a.p, cfg)?,
        metric: a.metric.or(cfg.metric).unwrap_or_default(),
        bound: a.bound.or(cfg.bound).unwrap_or(ClassicalBound::BestKnown),
        post_selected: a.post_select || cfg.post_select.unwrap_or(false),
        n_cap: a.n_cap.unwrap_or(DEFAULT_N_CAP),
    };
    let t = advantage_threshold_with(&q)?;
    let (status, n) = match t {
        Threshold::Found { n } => ("found", n.to_string()),
        Threshold::NotFound { .. } => ("not_found", String::new()),
    };
    let csv = format!(
        "protocol,p_target,metric,bound,post_selected,n_cap,status,n_star\n{},{},{},{},{},{},{status},{n}\n",
        q.protocol, q.p_target, q.metric, q.bound, q.post_selected, q.n_cap
    );
    let settings = json!({
        "protocol": q.protocol, "p": q.p_target, "metric": q.metric, "bound": q.bound,
        "post_select": q.post_selected, "n_cap": q.n_cap, "model": q.model,
    });
    let mut r = Report::new(csv.clone(), settings);
    r.emit(a.out.as_ref(), &csv)?;
    Ok(r)
}

fn curve(a: &CurveArgs, cfg: &FileConfig) -> Result<Report> {
    let model = cfg.model(&a.model)?;
    let p = target(a.p, cfg)?;
    let protocol = a
        .protocol
        .or(cfg.protocol)
        .ok_or_else(|| usage("--protocol is required"))?;
    let metric: TiMetric = a.metric.or(cfg.metric).unwrap_or_default();
    let post = a.post_select || cfg.post_select.unwrap_or(false);
    let grid = if a.n_grid.is_empty() {
        geometric_grid(
            a.n_min.unwrap_or(16),
            a.n_max.unwrap_or(16384),
            a.points.unwrap_or(41),
        )
        .map_err(|e| usage(e.to_string()))?
    } else {
        a.n_grid.clone()
    };
    let points = resource_curve(protocol, &model, p, metric, &grid, post).map_err(|e| match e {
        matchsim::Error::InvalidArgument(m) => usage(m),
        e => e.into(),
    })?;
    let csv = resource_csv(&points);
    let settings = json!({
        "protocol": protocol, "p": p, "metric": metric, "post_select": post, "n_grid": grid, "model": model,
    });
    let mut r = Report::new(csv.clone(), settings);
    r.emit(a.out.as_ref(), &csv)?;
    Ok(r)
}

const TABLE2_HEADER: &str =
    "protocol,n,mu_p,runs,runs_no_click,runs_wrong,p_error,p_error_post,mu_post\n";

fn table2_row(s: &RunStats) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}\n",
        s.protocol,
        s.n,
        s.mu_per_pulse,
        s.runs,
        s.runs_no_click,
        s.runs_wrong,
        s.p_error,
        opt(s.p_error_post),
        s.mu_post
    )
}

fn table2(a: &Table2Args) -> Result<Report> {
    let stats = match (&a.records, &a.counts) {
        (Some(path), _) => stats_from_records(path)?,
        (None, Some(path)) => stats_from_counts(path)?,
        (None, None) => return Err(usage("one of --records or --counts is required")),
    };
    let mut csv = String::from(TABLE2_HEADER);
    for s in &stats {
        csv.push_str(&table2_row(s));
    }
    let mut r = Report::new(
        csv.clone(),
        json!({ "records": a.records, "counts": a.counts }),
    );
    r.emit(a.out.as_ref(), &csv)?;
    Ok(r)
}

/// One row per `(protocol, n, μ)` batch, in order of first appearance.
fn stats_from_records(path: &Path) -> Result<Vec<RunStats>> {
    let records: Vec<RunRecord> = read_json_lines(path)?;
    let mut groups: Vec<Vec<RunRecord>> = Vec::new();
    for r in records {
        let key = |x: &RunRecord| (x.protocol, x.config.n, x.config.mu.to_bits());
        match groups.iter_mut().find(|g| key(&g[0]) == key(&r)) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .iter()
        .map(|g| Ok(aggregate_runs(g, true)?))
        .collect()
}

fn stats_from_counts(path: &Path) -> Result<Vec<RunStats>> {
    let text = std::fs::read_to_string(path).map_err(|e| matchsim::Error::io(path, e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("{}: empty counts table", path.display()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| anyhow::anyhow!("{}: missing column {name}", path.display()))
    };
    let idx = [
        col("protocol")?,
        col("n")?,
        col("mu_p")?,
        col("runs")?,
        col("runs_no_click")?,
        col("runs_wrong")?,
    ];
    lines
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let get = |k: usize| {
                f.get(idx[k])
                    .copied()
                    .ok_or_else(|| anyhow::anyhow!("{}:{}: too few fields", path.display(), i + 1))
            };
            let parse_err =
                |e: &dyn std::fmt::Display| anyhow::anyhow!("{}:{}: {e}", path.display(), i + 1);
            let protocol: Protocol = get(0)?.parse().map_err(|e| parse_err(&e))?;
            let n: usize = get(1)?.parse().map_err(|e| parse_err(&e))?;
            let mu_p: f64 = get(2)?.parse().map_err(|e| parse_err(&e))?;
            let runs: u64 = get(3)?.parse().map_err(|e| parse_err(&e))?;
            let no_click: u64 = get(4)?.parse().map_err(|e| parse_err(&e))?;
            let wrong: u64 = get(5)?.parse().map_err(|e| parse_err(&e))?;
            RunStats::from_counts(protocol, n, mu_p, runs, no_click, wrong)
                .map_err(|e| parse_err(&e))
        })
        .collect()
}

fn drift(a: &DriftArgs, cfg: &FileConfig) -> Result<Report> {
    let sigma = a.sigma.or(cfg.sigma).unwrap_or(1e-4);
    let noise = a.noise.or(cfg.noise).unwrap_or(0.0);
    let blocks = a.blocks.or(cfg.blocks).unwrap_or(100);
    let seed = a
        .seed
        .or(cfg.seed)
        .ok_or_else(|| usage("--seed is required for simulations"))?;
    let model = DriftModel::new(sigma, noise).map_err(|e| usage(e.to_string()))?;
    if blocks == 0 {
        return Err(usage("--blocks must be >= 1"));
    }
    let layout = BlockLayout::default();
    let report = run_blocks(blocks, &layout, &model, &mut run_rng(seed, 0))?;
    let mut summary = json!({
        "blocks": blocks,
        "visibility_corrected": report.visibility_corrected,
        "visibility_uncorrected": report.visibility_uncorrected,
    });
    if let Some(seeds) = a.seeds {
        summary["paired"] =
            serde_json::to_value(paired_visibility(seeds, blocks, &layout, &model, seed)?)?;
    }
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    let settings =
        json!({ "sigma": sigma, "noise": noise, "blocks": blocks, "seed": seed, "seeds": a.seeds });
    let mut r = Report::new(text, settings);
    r.emit(a.out.as_ref(), &drift_csv(&report))?;
    Ok(r)
}

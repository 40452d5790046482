//! Runs configured experiments and writes their reports.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Kind, Params, SuiteParams};
use crate::distributions::Source;
use crate::dominance::{
    check_domination, dominated_gaussian_pairs, proxy_bound_check, reduction_experiment, tensorisation_experiment,
    DominationQuery, DominationReport, DEFAULT_PROXY_P,
};
use crate::error::{Error, Result};
use crate::fixtures::{instance_rng, random_finite_law, random_norm, random_sign_instance};
use crate::geometry::NormFamily;
use crate::inequalities::{
    verify_contraction, verify_kahane, verify_l1l2, verify_pz, verify_sum_inequalities, SumLevels, Transform, SIGN_CAP,
};
use crate::majorisation::{
    counterexample_experiment, decompose, is_majorised, schur_convexity_check, t_transform_chain,
    weighted_domination_experiment, WeightedDominationQuery, MAJORISATION_TOL,
};
use crate::report::{write_json, Cell, Table};
use crate::rng::StreamKey;
use crate::stats::{Estimator, SlackReport, TailEstimate, Verdict};
use crate::tails::family_tails;
use crate::weakborell::{check_wb, recursion_bound, wb_sum_experiment, WBParams, WBReport, DEFAULT_LAMBDAS};

/// Exit status for a run without violations.
pub const EXIT_OK: i32 = 0;
/// Exit status for usage, configuration or runtime errors.
pub const EXIT_ERROR: i32 = 1;
/// Exit status when at least one check is violated.
pub const EXIT_VIOLATED: i32 = 2;
/// Exit status when checks were made but none could be decided.
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// Verdict counts over every check of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub holds: usize,
    pub inconclusive: usize,
    pub violated: usize,
}

impl Tally {
    pub fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Holds => self.holds += 1,
            Verdict::Inconclusive => self.inconclusive += 1,
            Verdict::Violated => self.violated += 1,
        }
    }

    pub fn verdict(&self) -> Verdict {
        if self.violated > 0 {
            Verdict::Violated
        } else if self.holds == 0 && self.inconclusive > 0 {
            Verdict::Inconclusive
        } else {
            Verdict::Holds
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.verdict() {
            Verdict::Holds => EXIT_OK,
            Verdict::Violated => EXIT_VIOLATED,
            Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        }
    }
}

/// The substream family used by one operation of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OperationSeed {
    pub operation: String,
    pub seed: u64,
    pub label: String,
    pub fingerprint: String,
}

/// Contents of `report.json`; free of timing data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    pub kind: Kind,
    pub seed: u64,
    pub estimator: Estimator,
    pub verdict: Verdict,
    pub tally: Tally,
    /// Set for experiments whose purpose is to exhibit a violation.
    pub expected_violation: bool,
    pub result: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: Report,
    pub tables: Vec<Table>,
    pub operations: Vec<OperationSeed>,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        self.report.tally.exit_code()
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    root: StreamKey,
    operations: Vec<OperationSeed>,
    tally: Tally,
    tables: Vec<Table>,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        Self {
            cfg,
            root: StreamKey::new(cfg.seed, cfg.kind.name()),
            operations: Vec::new(),
            tally: Tally::default(),
            tables: Vec::new(),
        }
    }

    fn key(&mut self, operation: &str) -> StreamKey {
        let k = self.root.child(operation);
        self.operations.push(OperationSeed {
            operation: operation.into(),
            seed: k.seed,
            label: k.label.clone(),
            fingerprint: k.fingerprint(),
        });
        k
    }

    fn family(&self, d: usize) -> Result<NormFamily> {
        self.cfg.norms.family(d, self.cfg.seed)
    }

    fn slack(&mut self, table: &mut Table, stage: &str, r: &SlackReport) {
        self.tally.add(r.verdict);
        table.push(vec![
            stage.into(),
            r.label.clone().into(),
            r.lhs.into(),
            r.rhs.into(),
            r.slack.into(),
            verdict_name(r.verdict).into(),
        ]);
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Inconclusive => "inconclusive",
        Verdict::Violated => "violated",
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(format!("cannot encode result: {e}")))
}

fn slack_table(name: &str) -> Table {
    Table::new(name, &["stage", "check", "lhs", "rhs", "slack", "verdict"])
}

fn tail_cells(t: &TailEstimate) -> Vec<Cell> {
    vec![t.estimate.into(), t.lower.into(), t.upper.into()]
}

fn domination_rows(ctx: &mut Ctx, table: &mut Table, stage: &str, r: &DominationReport) {
    for c in &r.cells {
        ctx.tally.add(c.verdict);
        let mut row: Vec<Cell> = vec![stage.into(), c.norm.into(), c.scale.into(), r.kappa.into(), r.lambda.into()];
        row.extend(tail_cells(&c.px));
        row.extend(tail_cells(&c.py));
        row.extend([c.bound.into(), c.slack.into(), verdict_name(c.verdict).into()]);
        table.push(row);
    }
}

fn domination_table() -> Table {
    Table::new(
        "domination",
        &[
            "stage", "norm", "scale", "kappa", "lambda", "px", "px_lower", "px_upper", "py", "py_lower", "py_upper", "bound",
            "slack", "verdict",
        ],
    )
}

fn wb_table(name: &str) -> Table {
    Table::new(
        name,
        &["stage", "norm", "scale", "lambda", "p1", "p1_lower", "p1_upper", "p_lambda", "p_lambda_lower", "p_lambda_upper", "bound", "slack", "verdict"],
    )
}

fn wb_rows(ctx: &mut Ctx, table: &mut Table, stage: &str, r: &WBReport) {
    for rec in &r.records {
        ctx.tally.add(rec.verdict);
        let mut row: Vec<Cell> = vec![stage.into(), rec.norm.into(), rec.scale.into(), rec.lambda.into()];
        row.extend(tail_cells(&rec.p1));
        row.extend(tail_cells(&rec.p_lambda));
        row.extend([rec.bound.into(), rec.slack.into(), verdict_name(rec.verdict).into()]);
        table.push(row);
    }
}

fn wb_params(c: f64, delta: f64, theta: f64) -> Result<WBParams> {
    WBParams::new(c, delta, theta)
}

fn lambdas(grid: &Option<Vec<f64>>) -> Vec<f64> {
    grid.clone().unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec())
}

fn tensorize_pairs(cfg: &ExperimentConfig, p: &crate::config::TensorizeParams) -> Result<Vec<(Source, Source)>> {
    let mut pairs: Vec<(Source, Source)> = p.pairs.iter().map(|q| (q.x.clone(), q.y.clone())).collect();
    if let Some(g) = p.gaussian_pairs {
        pairs.extend(dominated_gaussian_pairs(cfg.seed, g.dim, g.count)?);
    }
    if pairs.is_empty() {
        return Err(Error::Config("tensorize needs `pairs` or `gaussian_pairs`".into()));
    }
    for (x, y) in &pairs {
        x.validate()?;
        y.validate()?;
    }
    Ok(pairs)
}

/// Checks constants and builds every law and norm family without running.
pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    cfg.estimator.validate()?;
    match &cfg.params {
        Params::Tail(p) => {
            let law = p.law.law()?;
            cfg.norms.family(law.dim(), cfg.seed)?;
            if p.levels.is_empty() {
                return Err(Error::param("no tail levels"));
            }
        }
        Params::Domination(p) => {
            let (x, y) = (p.x.law()?, p.y.law()?);
            if x.dim() != y.dim() {
                return Err(Error::Dimension { expected: x.dim(), got: y.dim() });
            }
            cfg.norms.family(x.dim(), cfg.seed)?;
            check_kl(p.kappa, p.lambda)?;
        }
        Params::Tensorize(p) => {
            let pairs = tensorize_pairs(cfg, p)?;
            cfg.norms.family(pairs[0].0.dim(), cfg.seed)?;
            check_kl(p.kappa, p.lambda)?;
            if !(p.alpha > 0.0 && p.alpha <= 1.0) {
                return Err(Error::param(format!("alpha {} outside (0,1]", p.alpha)));
            }
        }
        Params::Wb(p) => {
            wb_params(p.c, p.delta, p.theta)?;
            if p.law.is_none() && p.recursion.is_none() {
                return Err(Error::Config("wb needs `law` or `recursion`".into()));
            }
            if let Some(l) = &p.law {
                cfg.norms.family(l.law()?.dim(), cfg.seed)?;
            }
            if let Some(r) = p.recursion {
                if !(r.p0 > 0.0 && r.p0 < 1.0) {
                    return Err(Error::param(format!("p0 = {} outside (0,1)", r.p0)));
                }
            }
        }
        Params::WbSum(p) => {
            wb_params(p.c, p.delta, p.theta)?;
            cfg.norms.family(p.law.law()?.dim(), cfg.seed)?;
        }
        Params::Majorize(p) => {
            t_transform_chain(&p.a, &p.b)?;
            if let Some(w) = &p.domination {
                w.source.validate()?;
                wb_params(w.c, w.delta, w.theta)?;
                cfg.norms.family(w.source.dim(), cfg.seed)?;
            }
        }
        Params::Schur(p) => {
            t_transform_chain(&p.a, &p.b)?;
            p.source.validate()?;
            cfg.norms.family(p.source.dim(), cfg.seed)?;
        }
        Params::Counterexample(p) => {
            if !(p.delta > 0.0 && p.delta < 1.0) {
                return Err(Error::param(format!("delta = {} outside (0,1)", p.delta)));
            }
            check_kl(p.kappa, p.lambda)?;
            if p.n_grid.is_empty() || p.n_grid.contains(&0) {
                return Err(Error::param("n grid must be nonempty with positive entries"));
            }
        }
        Params::InequalitySuite(p) => check_suite(p)?,
    }
    Ok(())
}

fn check_kl(kappa: f64, lambda: f64) -> Result<()> {
    if kappa >= 1.0 && kappa.is_finite() && lambda >= 1.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("kappa = {kappa} and lambda = {lambda} must be finite and ≥ 1")))
    }
}

fn check_suite(p: &SuiteParams) -> Result<()> {
    if p.max_len == 0 || p.max_len > SIGN_CAP {
        return Err(Error::param(format!("max_len {} outside [1, {SIGN_CAP}]", p.max_len)));
    }
    if p.dim == 0 || p.dim > 4 || p.max_pairs == 0 || p.max_pairs > 4 {
        return Err(Error::param("suite needs 1 ≤ dim ≤ 4 and 1 ≤ max_pairs ≤ 4"));
    }
    if !(p.theta > 0.0 && p.theta < 1.0) {
        return Err(Error::param(format!("theta {} outside (0,1)", p.theta)));
    }
    if p.alphas.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
        return Err(Error::param("alphas must lie in (0,1]"));
    }
    Ok(())
}

/// Runs an experiment in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput> {
    validate(cfg)?;
    let mut ctx = Ctx::new(cfg);
    let est = cfg.estimator;
    let mut expected_violation = false;
    let result = match &cfg.params {
        Params::Tail(p) => {
            let law = p.law.law()?;
            let fam = ctx.family(law.dim())?;
            let key = ctx.key("tails");
            let tails = family_tails(&law, &fam, &p.levels, &est, &key)?;
            let mut table = Table::new("tails", &["norm", "scale", "level", "estimate", "lower", "upper", "exact"]);
            let mut cells = Vec::new();
            for (ci, cell) in fam.cells().iter().enumerate() {
                for (li, &level) in p.levels.iter().enumerate() {
                    let t = tails[ci * p.levels.len() + li];
                    let mut row: Vec<Cell> = vec![cell.norm.into(), cell.scale.into(), level.into()];
                    row.extend(tail_cells(&t));
                    row.push(t.exact.into());
                    table.push(row);
                    cells.push(json!({"norm": cell.norm, "scale": cell.scale, "level": level, "tail": t}));
                }
            }
            ctx.tables.push(table);
            json!({ "family": fam, "tails": cells })
        }
        Params::Domination(p) => {
            let (x, y) = (p.x.law()?, p.y.law()?);
            let family = ctx.family(x.dim())?;
            let key = ctx.key("domination");
            let r = check_domination(&DominationQuery { x, y, kappa: p.kappa, lambda: p.lambda, family, estimator: est }, &key)?;
            let mut t = domination_table();
            domination_rows(&mut ctx, &mut t, "sum", &r);
            ctx.tables.push(t);
            to_value(&r)?
        }
        Params::Tensorize(p) => {
            let pairs = tensorize_pairs(cfg, p)?;
            let family = ctx.family(pairs[0].0.dim())?;
            let key = ctx.key("tensorisation");
            let r = tensorisation_experiment(&pairs, p.kappa, p.lambda, p.alpha, &family, &est, &key)?;
            let mut t = domination_table();
            for (i, pr) in r.pairs.iter().enumerate() {
                domination_rows(&mut ctx, &mut t, &format!("pair-{i}"), pr);
            }
            domination_rows(&mut ctx, &mut t, "sum", &r.sum);
            let mut out = json!({ "tensorisation": to_value(&r)? });
            if let Some(route) = p.route {
                let key = ctx.key("reduction");
                let red = reduction_experiment(&pairs, p.kappa, p.lambda, p.alpha, route, &family, &est, &key)?;
                for s in &red.steps {
                    domination_rows(&mut ctx, &mut t, &format!("reduction {}", s.label), &s.report);
                }
                domination_rows(&mut ctx, &mut t, "reduction sum", &red.sum);
                out["reduction"] = to_value(&red)?;
            }
            ctx.tables.push(t);
            out
        }
        Params::Wb(p) => {
            let params = wb_params(p.c, p.delta, p.theta)?;
            let mut out = json!({});
            if let Some(l) = &p.law {
                let law = l.law()?;
                let fam = ctx.family(law.dim())?;
                let key = ctx.key("weak-borell");
                let r = check_wb(&law, params, &fam, &lambdas(&p.lambdas), &est, &key)?;
                let mut t = wb_table("weak_borell");
                wb_rows(&mut ctx, &mut t, "law", &r);
                ctx.tables.push(t);
                out["check"] = to_value(&r)?;
            }
            if let Some(rc) = p.recursion {
                let r = recursion_bound(rc.p0, params, rc.steps)?;
                let mut t = Table::new("recursion", &["k", "recursive", "closed_form", "multiplier", "within"]);
                for row in &r.rows {
                    if r.induction_applies {
                        ctx.tally.add(if row.within { Verdict::Holds } else { Verdict::Violated });
                    }
                    t.push(vec![
                        (row.k as u64).into(),
                        row.recursive.into(),
                        row.closed_form.into(),
                        row.multiplier.into(),
                        row.within.into(),
                    ]);
                }
                ctx.tables.push(t);
                out["recursion"] = to_value(&r)?;
            }
            out
        }
        Params::WbSum(p) => {
            let params = wb_params(p.c, p.delta, p.theta)?;
            let law = p.law.law()?;
            let fam = ctx.family(law.dim())?;
            let key = ctx.key("weak-borell-sum");
            let r = wb_sum_experiment(law.components(), params, &fam, &lambdas(&p.lambdas), &est, &key)?;
            let mut t = wb_table("weak_borell");
            for (j, c) in r.components.iter().enumerate() {
                wb_rows(&mut ctx, &mut t, &format!("component-{j}"), c);
            }
            wb_rows(&mut ctx, &mut t, "sum", &r.sum);
            ctx.tables.push(t);
            let mut g = slack_table("gate");
            for s in &r.gate {
                ctx.slack(&mut g, "gate", s);
            }
            ctx.tables.push(g);
            to_value(&r)?
        }
        Params::Majorize(p) => {
            let chain = t_transform_chain(&p.a, &p.b)?;
            let mix = decompose(&p.a, &p.b)?;
            let n = p.a.len();
            let recon = mix.reconstruct(&p.b);
            let err = recon.iter().zip(&p.a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let mut checks = slack_table("checks");
            ctx.slack(&mut checks, "decomposition", &SlackReport::exact("reconstruction error", err, 1e-9));
            ctx.slack(&mut checks, "decomposition", &SlackReport::exact("weight sum error", (mix.weight_sum() - 1.0).abs(), 1e-12));
            let min_w = mix.terms.iter().map(|t| t.weight).fold(f64::INFINITY, f64::min);
            ctx.slack(&mut checks, "decomposition", &SlackReport::exact("negative weight", -min_w, 1e-12));
            ctx.slack(
                &mut checks,
                "decomposition",
                &SlackReport::exact("term count", mix.terms.len() as f64, ((n - 1) * (n - 1) + 1) as f64),
            );
            for (k, v) in chain.vectors.iter().enumerate() {
                let ok = is_majorised(v, &p.b, MAJORISATION_TOL)? && is_majorised(&p.a, v, MAJORISATION_TOL)?;
                let r = SlackReport::exact(format!("step {k} lies between a and b"), f64::from(u8::from(!ok)), 0.0);
                ctx.slack(&mut checks, "chain", &r);
            }
            let mut terms = Table::new("mixture", &["term", "weight", "permutation"]);
            for (i, t) in mix.terms.iter().enumerate() {
                let perm = t.permutation.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
                terms.push(vec![i.into(), t.weight.into(), perm.into()]);
            }
            ctx.tables.push(checks);
            ctx.tables.push(terms);
            let mut out = json!({ "chain": to_value(&chain)?, "mixture": to_value(&mix)?, "max_reconstruction_error": err });
            if let Some(w) = &p.domination {
                let family = ctx.family(w.source.dim())?;
                let key = ctx.key("weighted-domination");
                let q = WeightedDominationQuery {
                    a: p.a.clone(),
                    b: p.b.clone(),
                    source: w.source.clone(),
                    params: wb_params(w.c, w.delta, w.theta)?,
                    family,
                    estimator: est,
                    kappa_override: w.kappa,
                };
                let r = weighted_domination_experiment(&q, &key)?;
                let mut t = domination_table();
                domination_rows(&mut ctx, &mut t, "weighted sums", &r.domination);
                ctx.tables.push(t);
                out["weighted_domination"] = to_value(&r)?;
            }
            out
        }
        Params::Schur(p) => {
            let fam = ctx.family(p.source.dim())?;
            let mut t = slack_table("schur");
            let mut reports = Vec::new();
            for cell in fam.cells() {
                let r = schur_convexity_check(&p.a, &p.b, &p.source, &fam.cell_norm(cell), Transform::ShiftedPlus(p.shift))?;
                ctx.slack(&mut t, &format!("norm {} scale {}", cell.norm, cell.scale), &r);
                reports.push(json!({"norm": cell.norm, "scale": cell.scale, "report": r}));
            }
            ctx.tables.push(t);
            json!({ "cells": reports })
        }
        Params::Counterexample(p) => {
            expected_violation = true;
            let key = ctx.key("counterexample");
            let r = counterexample_experiment(p.delta, &p.n_grid, p.kappa, p.lambda, &est, &key)?;
            let mut t = Table::new("counterexample", &["n", "threshold", "lhs", "rhs", "rhs_lower", "rhs_upper", "ratio", "verdict"]);
            for row in &r.rows {
                if row.n > 1 {
                    ctx.tally.add(row.verdict);
                }
                t.push(vec![
                    row.n.into(),
                    row.threshold.into(),
                    row.lhs.estimate.into(),
                    row.rhs.into(),
                    row.rhs_lower.into(),
                    row.rhs_upper.into(),
                    row.ratio.into(),
                    verdict_name(row.verdict).into(),
                ]);
            }
            ctx.tables.push(t);
            to_value(&r)?
        }
        Params::InequalitySuite(p) => run_suite(&mut ctx, p)?,
    };
    let report = Report {
        name: cfg.name.clone(),
        kind: cfg.kind,
        seed: cfg.seed,
        estimator: cfg.estimator,
        verdict: ctx.tally.verdict(),
        tally: ctx.tally,
        expected_violation,
        result,
    };
    Ok(RunOutput { report, tables: ctx.tables, operations: ctx.operations })
}

fn run_suite(ctx: &mut Ctx, p: &SuiteParams) -> Result<Value> {
    let seed = ctx.cfg.seed;
    let mut t = slack_table("suite");
    let sign_len = p.max_len.min(12);
    let law_len = p.max_len.min(5);
    for i in 0..p.instances as u64 {
        let stage = format!("instance-{i}");
        let mut rng = instance_rng(seed, "signs", i);
        let inst = random_sign_instance(&mut rng, sign_len, p.dim)?;
        let (s, tt) = (0.1 + 1.9 * rng.random::<f64>(), 0.1 + 1.9 * rng.random::<f64>());
        ctx.slack(&mut t, &stage, &verify_kahane(&inst, s, tt)?);
        ctx.slack(&mut t, &stage, &verify_l1l2(&inst)?);
        ctx.slack(&mut t, &stage, &verify_pz(&inst, p.theta)?);
        let b: Vec<f64> = (0..inst.len()).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let a: Vec<f64> = b.iter().map(|v| v * (2.0 * rng.random::<f64>() - 1.0)).collect();
        ctx.slack(&mut t, &stage, &verify_contraction(&inst, &a, &b)?);

        let mut rng = instance_rng(seed, "laws", i);
        let law = random_finite_law(&mut rng, law_len, p.dim, p.max_pairs)?;
        let norm = random_norm(&mut rng, p.dim)?;
        let levels = SumLevels { s: 0.2 + rng.random::<f64>(), t: 0.2 + rng.random::<f64>(), u: 0.2 + rng.random::<f64>() };
        let sums = verify_sum_inequalities(&law, &norm, levels, &Estimator::Exact, &StreamKey::new(seed, "unused"))?;
        for r in sums.reports() {
            ctx.slack(&mut t, &stage, r);
        }
        for &alpha in &p.alphas {
            let b = proxy_bound_check(&law, &norm, alpha, DEFAULT_PROXY_P)?;
            ctx.slack(&mut t, &stage, &b.lower);
            ctx.slack(&mut t, &stage, &b.upper);
        }
    }
    ctx.tables.push(t);
    Ok(json!({ "instances": p.instances, "tally": ctx.tally }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub name: String,
    pub kind: Kind,
    pub config_sha256: String,
    pub version: String,
    pub started_unix_ms: u128,
    pub wall_clock_ms: u128,
    pub threads: usize,
    pub operations: Vec<OperationSeed>,
    pub tally: Tally,
    pub verdict: Verdict,
    pub expected_violation: bool,
    pub exit_code: i32,
    pub files: Vec<String>,
}

/// Where a finished run wrote its files.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub exit_code: i32,
    pub report_path: PathBuf,
    pub manifest_path: PathBuf,
    pub output: RunOutput,
}

/// Runs `cfg` (parsed from `config_text`) and writes `report.json`, one CSV
/// per table and `manifest.json` into `out_dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, config_text: &str, out_dir: &Path) -> Result<RunSummary> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    let clock = Instant::now();
    let output = execute(cfg)?;
    std::fs::create_dir_all(out_dir)?;
    let report_path = out_dir.join("report.json");
    write_json(&report_path, &output.report)?;
    let mut files = vec!["report.json".to_string()];
    for t in &output.tables {
        t.write(out_dir)?;
        files.push(format!("{}.csv", t.name));
    }
    let manifest = Manifest {
        name: cfg.name.clone(),
        kind: cfg.kind,
        config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix_ms: started,
        wall_clock_ms: clock.elapsed().as_millis(),
        threads: rayon::current_num_threads(),
        operations: output.operations.clone(),
        tally: output.report.tally,
        verdict: output.report.verdict,
        expected_violation: output.report.expected_violation,
        exit_code: output.exit_code(),
        files,
    };
    let manifest_path = out_dir.join("manifest.json");
    write_json(&manifest_path, &manifest)?;
    Ok(RunSummary { exit_code: output.exit_code(), report_path, manifest_path, output })
}

/// A built-in experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: Kind,
    /// The result the experiment exercises.
    pub anchor: &'static str,
    pub description: &'static str,
    pub config: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    CATALOG.to_vec()
}

pub fn catalog_entry(name: &str) -> Option<CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name).copied()
}

const CATALOG: [CatalogEntry; 12] = [
    CatalogEntry {
        name: "rademacher-tail",
        kind: Kind::Tail,
        anchor: "exact sign-pattern oracle",
        description: "tails of a sum of three Rademacher signs",
        config: include_str!("catalog/rademacher_tail.toml"),
    },
    CatalogEntry {
        name: "rademacher-peakedness",
        kind: Kind::Domination,
        anchor: "(κ,λ)-domination definition",
        description: "Rademacher sum against a Gaussian of equal variance",
        config: include_str!("catalog/rademacher_peakedness.toml"),
    },
    CatalogEntry {
        name: "gaussian-tensorisation",
        kind: Kind::Tensorize,
        anchor: "domination tensorisation",
        description: "three dominated Gaussian pairs in the plane, 50 norms, constants (16, 2)",
        config: include_str!("catalog/gaussian_tensorisation.toml"),
    },
    CatalogEntry {
        name: "thinned-reduction",
        kind: Kind::Tensorize,
        anchor: "reduction to κ = 1 by Bernoulli thinning",
        description: "finite-support pairs with κ = 2, thinning route, exact",
        config: include_str!("catalog/thinned_reduction.toml"),
    },
    CatalogEntry {
        name: "pareto-weak-borell",
        kind: Kind::Wb,
        anchor: "weak Borell inequality",
        description: "closed-form Pareto tail, equality case",
        config: include_str!("catalog/pareto_weak_borell.toml"),
    },
    CatalogEntry {
        name: "tail-recursion",
        kind: Kind::Wb,
        anchor: "p_k recursion in the weak Borell tensorisation",
        description: "recursive tail bound against its closed form",
        config: include_str!("catalog/tail_recursion.toml"),
    },
    CatalogEntry {
        name: "pareto-sum-weak-borell",
        kind: Kind::WbSum,
        anchor: "weak Borell tensorisation",
        description: "three iid Pareto tails against WB(972, 2, 1/7776)",
        config: include_str!("catalog/pareto_sum_weak_borell.toml"),
    },
    CatalogEntry {
        name: "uniform-majorisation",
        kind: Kind::Majorize,
        anchor: "majorisation as a mixture of permutations",
        description: "(1/3, 1/3, 1/3) against (1, 0, 0)",
        config: include_str!("catalog/uniform_majorisation.toml"),
    },
    CatalogEntry {
        name: "majorised-weights",
        kind: Kind::Majorize,
        anchor: "majorised-weight domination",
        description: "weights (1/2, 1/2) against (1, 0) for a Pareto tail, λ = 2",
        config: include_str!("catalog/majorised_weights.toml"),
    },
    CatalogEntry {
        name: "schur-step",
        kind: Kind::Schur,
        anchor: "convex-transform step for majorised weights",
        description: "E(‖Σ a_i X_i‖ - 1)_+ against the b-weighted sum",
        config: include_str!("catalog/schur_step.toml"),
    },
    CatalogEntry {
        name: "stable-counterexample",
        kind: Kind::Counterexample,
        anchor: "failure for δ < 1",
        description: "equal weights against a point mass for a symmetric 1/2-stable law",
        config: include_str!("catalog/stable_counterexample.toml"),
    },
    CatalogEntry {
        name: "inequality-suite",
        kind: Kind::InequalitySuite,
        anchor: "classical inequalities for symmetric sums",
        description: "Kahane, L1-L2, Paley-Zygmund, contraction, sum inequalities and proxy sandwich",
        config: include_str!("catalog/inequality_suite.toml"),
    },
];

//! One function per task. Each fills a [`TaskOutput`] as it goes, so a
//! failure part way through still leaves the rows computed so far.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cache::{content_hash, Cache, CacheStats};
use super::config::{ExperimentConfig, OperatorConfig, Task};
use super::report::{map, ReportRecord, Table, Value};
use crate::criteria::{
    av_lambda, capacity, eigenvalues_up_to, form_bound_estimate, molchanov_scan, probe_verdict, set_cube_profile,
    sublevel_set, BoxSpectrum, NegativePart, ProbeOptions, ResolventPower, TruncationFamily,
};
use crate::error::Result;
use crate::lattice::{build_grid, Grid, GridFunction, GridSpec, NodeSet, SymmetricOperator};
use crate::semigroup::super_poincare_beta_from;
use crate::spectral::{dense_eigendecomposition_with_budget, lowest_eigenpairs_with, EigenOptions, SpectralData};

#[derive(Debug, Default)]
pub(crate) struct TaskOutput {
    pub summary: Vec<(String, Value)>,
    pub table: Table,
}

impl TaskOutput {
    fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.push((key.to_string(), v.into()));
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    cache: Cache,
    operator_text: String,
}

impl Ctx<'_> {
    fn key(&self, spec: &GridSpec, op: &str, what: &str) -> String {
        let grid = serde_json::to_string(&(&spec.lower, &spec.upper, &spec.nodes)).expect("serializable");
        content_hash(&["spectra-lab cache v1", &grid, op, what])
    }

    fn eigen_options(&self) -> EigenOptions {
        EigenOptions { dense_budget: self.cfg.solver.dense_budget, seed: self.cfg.seed, ..EigenOptions::default() }
    }

    fn dense(&mut self, spec: &GridSpec, a: &SymmetricOperator) -> Result<SpectralData> {
        let key = self.key(spec, &self.operator_text, "dense");
        let budget = self.cfg.solver.dense_budget;
        self.cache.eigenpairs(&key, a, || dense_eigendecomposition_with_budget(a, budget))
    }
}

fn grid_and_operator(cfg: &ExperimentConfig) -> Result<(GridSpec, Grid, SymmetricOperator)> {
    let spec = cfg.grid_spec().expect("validated");
    let grid = build_grid(&spec)?;
    let a = cfg.operator_on(&grid)?;
    Ok((spec, grid, a))
}

fn grid_summary(out: &mut TaskOutput, grid: &Grid, a: &SymmetricOperator) {
    out.set("nodes", grid.len());
    out.set("active_nodes", a.dim());
    out.set("spacing", Value::from(grid.spacing().to_vec()));
}

/// Runs the configured task. Numerical failures are recorded in the
/// returned record; wall time is reported separately.
pub fn run_experiment(cfg: &ExperimentConfig, cache_dir: Option<&Path>) -> (ReportRecord, CacheStats) {
    let mut hashed = cfg.clone();
    hashed.output = Default::default();
    let hash_text = toml::to_string(&hashed).expect("config serializes");
    let config = toml::to_string(cfg).expect("config serializes");
    let operator_text = toml::to_string(&cfg.operator).expect("operator serializes");
    let mut ctx = Ctx { cfg, cache: Cache::new(cache_dir, cfg.seed), operator_text };
    let mut out = TaskOutput::default();
    let task = cfg.task();
    let result = match task {
        Task::Spectrum => spectrum(&mut ctx, &mut out),
        Task::Probe => probe(&mut ctx, &mut out),
        Task::AvSweep => av_sweep(&mut ctx, &mut out),
        Task::Capacity => capacity_task(&mut ctx, &mut out),
        Task::Molchanov => molchanov(&mut ctx, &mut out),
        Task::ThinProfile => thin_profile(&mut ctx, &mut out),
        Task::Strichartz => strichartz(&mut ctx, &mut out),
        Task::SuperPoincare => super_poincare(&mut ctx, &mut out),
        Task::FormBound => form_bound(&mut ctx, &mut out),
    };
    let record = ReportRecord {
        task,
        config_hash: hex_hash(&hash_text),
        seed: cfg.seed,
        config,
        error: result.err().map(|e| format!("{}: {e}", task.name())),
        summary: out.summary,
        table: out.table,
    };
    (record, ctx.cache.stats())
}

fn hex_hash(text: &str) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Columns: `index, eigenvalue, residual`.
fn spectrum(ctx: &mut Ctx, out: &mut TaskOutput) -> Result<()> {
    let (spec, grid, a) = grid_and_operator(ctx.cfg)?;
    grid_summary(out, &grid, &a);
    let k = ctx.cfg.spectrum.count.min(a.dim());
    let tol = ctx.cfg.solver.eig_tol;
    let key = ctx.key(&spec, &ctx.operator_text, &format!("lowest k={k} tol={tol:e}"));
    let opts = ctx.eigen_options();
    let s = ctx.cache.eigenpairs(&key, &a, || lowest_eigenpairs_with(&a, k, tol, &opts))?;
    out.table = Table::new(&["index", "eigenvalue", "residual"]);
    for (i, (&l, &r)) in s.eigenvalues().iter().zip(s.residuals()).enumerate() {
        out.table.push(vec![i.into(), l.into(), r.into()]);
    }
    out.set("eigenvalues", Value::from(s.eigenvalues()));
    Ok(())
}

/// Columns: `threshold, radius, count, lower_bound_only, classification`.
fn probe(ctx: &mut Ctx, out: &mut TaskOutput) -> Result<()> {
    let cfg = ctx.cfg;
    let h = cfg.family_spacing().expect("validated");
    let op: OperatorConfig = cfg.operator.clone();
    let family = TruncationFamily::new(cfg.grid.dim, h, &cfg.probe.radii, move |g| op.assemble(g))?;
    let lambdas = &cfg.probe.lambdas;
    let top = lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let opts = ProbeOptions {
        cauchy_tol: cfg.solver.cauchy_tol,
        initial_k: cfg.solver.initial_eigenpairs,
        max_k: cfg.solver.max_eigenpairs,
        eig_tol: cfg.solver.eig_tol,
    };
    let what = format!(
        "up-to {top:e} k0={} kmax={} tol={:e}",
        opts.initial_k, opts.max_k, opts.eig_tol
    );
    let mut spectra: Vec<BoxSpectrum> = Vec::new();
    let mut failure = None;
    for j in 0..family.len() {
        let r = family.operator(j).and_then(|a| {
            let key = ctx.key(&family.grid_spec(j), &ctx.operator_text, &what);
            ctx.cache.values(&key, a, || eigenvalues_up_to(a, top, &opts))
        });
        if let Err(e) = &r {
            failure.get_or_insert_with(|| e.clone());
        }
        spectra.push(r.map_err(|e| format!("radius {}: {e}", family.radii()[j])));
    }
    out.table = Table::new(&["threshold", "radius", "count", "lower_bound_only", "classification"]);
    let mut verdicts = Vec::new();
    for &lam in lambdas {
        let v = probe_verdict(family.radii(), &spectra, lam, opts.cauchy_tol);
        for (j, &r) in v.radii.iter().enumerate() {
            out.table.push(vec![
                lam.into(),
                r.into(),
                v.counts[j].into(),
                v.lower_bound_only[j].into(),
                v.classification.to_string().into(),
            ]);
        }
        verdicts.push(map([
            ("threshold", lam.into()),
            ("counts", Value::from(v.counts.clone())),
            ("lower_bound_only", Value::from(v.lower_bound_only.clone())),
            ("classification", v.classification.to_string().into()),
            ("eigenvalues", Value::List(v.eigenvalues.iter().map(|e| Value::from(e.as_slice())).collect())),
            ("diagnostics", Value::from(v.diagnostics.clone())),
        ]));
    }
    out.set("radii", Value::from(family.radii()));
    out.set("verdicts", Value::List(verdicts));
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Columns: `n, box_radius, av, dual_lower, relative_gap, beta_star`.
fn av_sweep(ctx: &mut Ctx, out: &mut TaskOutput) -> Result<()> {
    let cfg = ctx.cfg;
    let p = &cfg.av_sweep;
    let h = cfg.family_spacing().expect("validated");
    let measure = cfg.operator.measure.clone().expect("validated");
    let base = OperatorConfig { measure: None, ..cfg.operator.clone() };
    out.set("lambda", p.lambda);
    out.table = Table::new(&["n", "box_radius", "av", "dual_lower", "relative_gap", "beta_star"]);
    let mut values = Vec::new();
    for &n in &p.n {
        let spec = GridSpec::centered_box(cfg.grid.dim, p.box_factor * n, h).with_node_budget(cfg.grid.node_budget);
        let grid = build_grid(&spec)?;
        let a0 = base.assemble(&grid)?;
        let mu = measure.on_grid(&grid)?;
        let gn = NodeSet::from_predicate(&grid, |x| x[0].hypot(x[1]) > n);
        let r = av_lambda(&mu, &gn, p.lambda, &a0)?;
        values.push(r.value());
        out.table.push(vec![
            n.into(),
            (p.box_factor * n).into(),
            r.value().into(),
            r.dual_lower.into(),
            r.relative_gap().into(),
            r.beta_star.into(),
        ]);
    }
    out.set("nondecreasing", values.windows(2).all(|w| w[1] >= w[0]));
    Ok(())
}

/// Columns: `radius, nodes_in_u, capacity, kkt_ok, iterations, contact`.
fn capacity_task(ctx: &mut Ctx, out: &mut TaskOutput) -> Result<()> {
    let (_, grid, a) = grid_and_operator(ctx.cfg)?;
    grid_summary(out, &grid, &a);
    let p = &ctx.cfg.capacity;
    let c = [p.center.first().copied().unwrap_or(0.0), p.center.get(1).copied().unwrap_or(0.0)];
    let u = NodeSet::from_predicate(&grid, |x| (x[0] - c[0]).hypot(x[1] - c[1]) <= p.radius);
    let r = capacity(&u, &a)?;
    out.table = Table::new(&["radius", "nodes_in_u", "capacity", "kkt_ok", "iterations", "contact"]);
    out.table.push(vec![p.radius.into(), u.len().into(), r.cap.into(), r.kkt_ok.into(), r.iterations.into(), r.contact.into()]);
    out.set("minimizer", Value::from(r.minimizer.values()));
    Ok(())
}

/// Columns: `x, mass` (window `[x, x + w)`).
fn molchanov(ctx: &mut Ctx, out: &mut TaskOutput) -> Result<()> {
    let cfg = ctx.cfg;
    let grid = build_grid(&cfg.grid_spec().expect("validated"))?;
    let mu = cfg.operator.measure.as_ref().expect("validated").on_grid(&grid)?;
    let p = &cfg.molchanov;
    let prof = molchanov_scan(&mu, p.window, p.stride)?;
    out.set("window", p.window);
    out.set("stride", p.stride);
    out.set(
        "min_tail",
        Value::List(p.tail_radii.iter().map(|&r| map([("radius", r.into()), ("min_mass", prof.min_tail(r).into())])).collect()),
    );
    out.table = Table::new(&["x", "mass"]);
    for w in &prof.windows {
        out.table.push(vec![w.x.into(), w.mass.into()]);
    }
    Ok(())
}

/// Columns: `level, k1, k2, cube_norm, complete`.
fn thin_profile(ctx: &mut Ctx, out: &mut TaskOutput) -> Result<()> {
    let cfg = ctx.cfg;
    let grid = build_grid(&cfg.grid_spec().expect("validated"))?;
    let v = cfg.operator.potential.on_grid(&grid)?;
    let p = &cfg.thin_profile;
    out.table = Table::new(&["level", "k1", "k2", "cube_norm", "complete"]);
    let mut levels = Vec::new();
    for &level in &p.levels {
        let set = sublevel_set(&v, level)?;
        let prof = set_cube_profile(&set, p.cube_side)?;
        for c in &prof.per_cube {
            out.table.push(vec![level.into(), c.k[0].into(), c.k[1].into(), c.norm.into(), c.complete.into()]);
        }
        levels.push(map([
            ("level", level.into()),
            ("volume", set.volume().into()),
            ("side", prof.side.into()),
            ("sup_norm", prof.sup_norm.into()),
            (
                "tail",
                Value::List(
                    p.tail_radii.iter().map(|&r| map([("radius", r.into()), ("sup_norm", prof.tail_sup(r).into())])).collect(),
                ),
            ),
        ]));
    }
    out.set("levels", Value::List(levels));
    Ok(())
}

/// Random weights constant on cells of side `cell`, uniform in `[−a, a]`.
fn cell_function(grid: &Grid, cell: f64, amplitude: f64, rng: &mut ChaCha8Rng) -> GridFunction {
    let d = grid.dim();
    let cells: Vec<usize> =
        (0..d).map(|ax| ((grid.upper()[ax] - grid.lower()[ax]) / cell - 1e-9).ceil().max(1.0) as usize).collect();
    let total: usize = cells.iter().product();
    let w: Vec<f64> = (0..total).map(|_| rng.gen_range(-amplitude..=amplitude)).collect();
    GridFunction::from_fn(grid, |x| {
        let mut idx = 0;
        let mut stride = 1;
        for ax in 0..d {
            let i = (((x[ax] - grid.lower()[ax]) / cell + 1e-9).floor() as usize).min(cells[ax] - 1);
            idx += i * stride;
            stride *= cells[ax];
        }
        w[idx]
    })
}

/// Columns: `sample, ratio`.
fn strichartz(ctx: &mut Ctx, out: &mut TaskOutput) -> Result<()> {
    let (spec, grid, a) = grid_and_operator(ctx.cfg)?;
    grid_summary(out, &grid, &a);
    let s = ctx.dense(&spec, &a)?;
    let p = &ctx.cfg.strichartz;
    let rp = ResolventPower::new(&s, p.p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    out.table = Table::new(&["sample", "ratio"]);
    let mut best = 0.0f64;
    for i in 0..p.samples {
        let f = cell_function(&grid, p.cell, p.amplitude, &mut rng);
        let r = rp.ratio(&f)?;
        best = best.max(r);
        out.table.push(vec![i.into(), r.into()]);
    }
    out.set("p", p.p);
    out.set("max_ratio", best);
    Ok(())
}

/// Columns: `r, t, beta_certified, beta_observed, c_12`.
fn super_poincare(ctx: &mut Ctx, out: &mut TaskOutput) -> Result<()> {
    let (spec, grid, a) = grid_and_operator(ctx.cfg)?;
    grid_summary(out, &grid, &a);
    let s = ctx.dense(&spec, &a)?;
    let p = &ctx.cfg.super_poincare;
    out.table = Table::new(&["r", "t", "beta_certified", "beta_observed", "c_12"]);
    let mut all_ok = true;
    let mut logs = Vec::new();
    for i in 0..p.points {
        let r = p.r_min * (p.r_max / p.r_min).powf(i as f64 / (p.points - 1) as f64);
        let sp = super_poincare_beta_from(&a, &s, r, p.samples, ctx.cfg.seed.wrapping_add(i as u64))?;
        all_ok &= sp.beta_observed <= sp.beta_certified * (1.0 + 1e-10);
        logs.push((r.ln(), sp.beta_certified.ln()));
        out.table.push(vec![sp.r.into(), sp.t.into(), sp.beta_certified.into(), sp.beta_observed.into(), sp.c_12.into()]);
    }
    let m = logs.len() as f64;
    let (mx, my) = logs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    out.set("observed_le_certified", all_ok);
    out.set("log_log_slope", sxy / sxx);
    Ok(())
}

/// Columns: `c, q, c_q, klmn_ok`.
fn form_bound(ctx: &mut Ctx, out: &mut TaskOutput) -> Result<()> {
    let cfg = ctx.cfg;
    let grid = build_grid(&cfg.grid_spec().expect("validated"))?;
    let base = cfg.operator.positive_part(&grid)?;
    grid_summary(out, &grid, &base);
    let vm = cfg.operator.negative.on_grid(&grid)?;
    out.table = Table::new(&["c", "q", "c_q", "klmn_ok"]);
    let mut first = None;
    for &c in &cfg.form_bound.c {
        let est = form_bound_estimate(NegativePart::Potential(&vm), &base, c)?;
        if est.q < 1.0 && first.is_none() {
            first = Some(c);
        }
        out.table.push(vec![c.into(), est.q.into(), est.c_q().into(), (est.q < 1.0).into()]);
    }
    out.set("first_admissible_c", first);
    Ok(())
}

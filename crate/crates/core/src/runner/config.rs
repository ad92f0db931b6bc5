use serde::{Deserialize, Serialize};

use crate::criteria::TruncationFamily;
use crate::error::Error;
use crate::lattice::{build_grid, GridSpec, DEFAULT_NODE_BUDGET};

/// Experiment kinds understood by the runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectrum,
    Probe,
    AvSweep,
    Capacity,
    Molchanov,
    ThinProfile,
    Strichartz,
    SuperPoincare,
    FormBound,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Probe => "probe",
            Task::AvSweep => "av-sweep",
            Task::Capacity => "capacity",
            Task::Molchanov => "molchanov",
            Task::ThinProfile => "thin-profile",
            Task::Strichartz => "strichartz",
            Task::SuperPoincare => "super-poincare",
            Task::FormBound => "form-bound",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// A config failure with the offending field (dotted path) when known.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    pub grid: GridConfig,
    #[serde(default)]
    pub operator: OperatorConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub spectrum: SpectrumParams,
    #[serde(default)]
    pub probe: ProbeParams,
    #[serde(default, rename = "av-sweep")]
    pub av_sweep: AvSweepParams,
    #[serde(default)]
    pub capacity: CapacityParams,
    #[serde(default)]
    pub molchanov: MolchanovParams,
    #[serde(default, rename = "thin-profile")]
    pub thin_profile: ThinProfileParams,
    #[serde(default)]
    pub strichartz: StrichartzParams,
    #[serde(default, rename = "super-poincare")]
    pub super_poincare: SuperPoincareParams,
    #[serde(default, rename = "form-bound")]
    pub form_bound: FormBoundParams,
}

/// Either a centered box (`radius`, `spacing`) or explicit `lower`, `upper`, `nodes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<usize>>,
    #[serde(default = "defaults::node_budget")]
    pub node_budget: usize,
}

/// Potential families; every variant is a function of the physical point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Zero,
    /// `Σ c·x^a·y^b` for terms `[c, a, b]` with integer exponents.
    Polynomial { terms: Vec<[f64; 3]> },
    /// `scale·|x|^alpha`.
    Power {
        alpha: f64,
        #[serde(default = "defaults::one")]
        scale: f64,
    },
    /// `scale·x²y²`.
    ProductSquare {
        #[serde(default = "defaults::one")]
        scale: f64,
    },
    /// `inside` on the closed ball, `outside` elsewhere (either may be `inf`).
    Indicator {
        radius: f64,
        inside: f64,
        outside: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// `scale·|x|²` except on the balls of radius `radius` centered at
    /// `(k·spacing, 0)`, `k ≥ 1`, where it is `depth`.
    Wells {
        spacing: f64,
        radius: f64,
        #[serde(default)]
        depth: f64,
        #[serde(default = "defaults::one")]
        scale: f64,
    },
    /// Explicit node values in grid order.
    Tabulated { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombWeight {
    /// Every atom has weight `strength`.
    Unit,
    /// Atom at `k·spacing` has weight `strength·|k|`.
    AbsIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    Comb {
        #[serde(default = "defaults::one")]
        spacing: f64,
        weight: CombWeight,
        #[serde(default = "defaults::one")]
        strength: f64,
    },
    Lebesgue { density: f64 },
    /// `∞` on `|x| > radius`.
    InfiniteOutside { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    /// `V₊ ≥ 0`.
    #[serde(default)]
    pub potential: PotentialSpec,
    /// `V₋ ≥ 0`, subtracted in the form sense.
    #[serde(default)]
    pub negative: PotentialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    /// Fixed form-bound constants for `V₋`; scanned when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form_bound: Option<FormBoundConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormBoundConfig {
    pub q: f64,
    pub c_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "defaults::eig_tol")]
    pub eig_tol: f64,
    #[serde(default = "defaults::cauchy_tol")]
    pub cauchy_tol: f64,
    #[serde(default = "defaults::dense_budget")]
    pub dense_budget: usize,
    #[serde(default = "defaults::initial_eigenpairs")]
    pub initial_eigenpairs: usize,
    #[serde(default = "defaults::max_eigenpairs")]
    pub max_eigenpairs: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eig_tol: defaults::eig_tol(),
            cauchy_tol: defaults::cauchy_tol(),
            dense_budget: defaults::dense_budget(),
            initial_eigenpairs: defaults::initial_eigenpairs(),
            max_eigenpairs: defaults::max_eigenpairs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Both files are written when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default = "defaults::yes")]
    pub cache: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, format: None, cache: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    #[serde(default = "defaults::count")]
    pub count: usize,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams { count: defaults::count() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProbeParams {
    #[serde(default)]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvSweepParams {
    #[serde(default = "defaults::av_lambda")]
    pub lambda: f64,
    /// `G_n = {|x| > n}`.
    #[serde(default = "defaults::av_n")]
    pub n: Vec<f64>,
    /// Box radius is `box_factor·n`.
    #[serde(default = "defaults::two")]
    pub box_factor: f64,
}

impl Default for AvSweepParams {
    fn default() -> Self {
        AvSweepParams { lambda: defaults::av_lambda(), n: defaults::av_n(), box_factor: defaults::two() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityParams {
    /// Closed ball `U`.
    #[serde(default)]
    pub center: Vec<f64>,
    #[serde(default = "defaults::one")]
    pub radius: f64,
}

impl Default for CapacityParams {
    fn default() -> Self {
        CapacityParams { center: vec![], radius: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MolchanovParams {
    #[serde(default = "defaults::one")]
    pub window: f64,
    #[serde(default = "defaults::half")]
    pub stride: f64,
    #[serde(default)]
    pub tail_radii: Vec<f64>,
}

impl Default for MolchanovParams {
    fn default() -> Self {
        MolchanovParams { window: 1.0, stride: 0.5, tail_radii: vec![] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThinProfileParams {
    /// Sublevel sets `{V₊ ≤ level}`.
    #[serde(default = "defaults::levels")]
    pub levels: Vec<f64>,
    #[serde(default = "defaults::one")]
    pub cube_side: f64,
    #[serde(default)]
    pub tail_radii: Vec<f64>,
}

impl Default for ThinProfileParams {
    fn default() -> Self {
        ThinProfileParams { levels: defaults::levels(), cube_side: 1.0, tail_radii: vec![] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzParams {
    #[serde(default = "defaults::one")]
    pub p: f64,
    #[serde(default = "defaults::samples")]
    pub samples: usize,
    /// Random weights are constant on cells of this length.
    #[serde(default = "defaults::one")]
    pub cell: f64,
    #[serde(default = "defaults::one")]
    pub amplitude: f64,
}

impl Default for StrichartzParams {
    fn default() -> Self {
        StrichartzParams { p: 1.0, samples: defaults::samples(), cell: 1.0, amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperPoincareParams {
    #[serde(default = "defaults::r_min")]
    pub r_min: f64,
    #[serde(default = "defaults::r_max")]
    pub r_max: f64,
    #[serde(default = "defaults::r_points")]
    pub points: usize,
    #[serde(default = "defaults::sp_samples")]
    pub samples: usize,
}

impl Default for SuperPoincareParams {
    fn default() -> Self {
        SuperPoincareParams {
            r_min: defaults::r_min(),
            r_max: defaults::r_max(),
            points: defaults::r_points(),
            samples: defaults::sp_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormBoundParams {
    #[serde(default = "defaults::shifts")]
    pub c: Vec<f64>,
}

impl Default for FormBoundParams {
    fn default() -> Self {
        FormBoundParams { c: defaults::shifts() }
    }
}

mod defaults {
    pub fn seed() -> u64 {
        0
    }
    pub fn node_budget() -> usize {
        super::DEFAULT_NODE_BUDGET
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn two() -> f64 {
        2.0
    }
    pub fn half() -> f64 {
        0.5
    }
    pub fn yes() -> bool {
        true
    }
    pub fn eig_tol() -> f64 {
        1e-8
    }
    pub fn cauchy_tol() -> f64 {
        1e-4
    }
    pub fn dense_budget() -> usize {
        crate::spectral::DEFAULT_DENSE_BUDGET
    }
    pub fn initial_eigenpairs() -> usize {
        16
    }
    pub fn max_eigenpairs() -> usize {
        512
    }
    pub fn count() -> usize {
        10
    }
    pub fn av_lambda() -> f64 {
        4.0
    }
    pub fn av_n() -> Vec<f64> {
        vec![5.0, 10.0, 15.0, 20.0]
    }
    pub fn levels() -> Vec<f64> {
        vec![1.0]
    }
    pub fn samples() -> usize {
        50
    }
    pub fn r_min() -> f64 {
        0.03
    }
    pub fn r_max() -> f64 {
        3.0
    }
    pub fn r_points() -> usize {
        21
    }
    pub fn sp_samples() -> usize {
        40
    }
    pub fn shifts() -> Vec<f64> {
        vec![0.0, 1.0, 2.0, 4.0, 8.0]
    }
}

/// Parses and validates a config. `task` (from the command line) must agree
/// with the file's `task` key when both are present.
pub fn parse_config(text: &str, task: Option<Task>) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        let loc = e.span().map(|s| {
            let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}")
        });
        ConfigError::new(loc.unwrap_or_else(|| "config".into()), msg)
    })?;
    match (cfg.task, task) {
        (Some(a), Some(b)) if a != b => {
            return Err(ConfigError::new("task", format!("config says {} but {} was requested", a.name(), b.name())));
        }
        (None, Some(b)) => cfg.task = Some(b),
        (None, None) => return Err(ConfigError::new("task", "no task given")),
        _ => {}
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn task(&self) -> Task {
        self.task.expect("validated configs carry a task")
    }

    /// The grid described by `[grid]`.
    pub fn grid_spec(&self) -> Result<GridSpec, ConfigError> {
        let g = &self.grid;
        let spec = match (g.radius, g.spacing, &g.lower, &g.upper, &g.nodes) {
            (Some(r), Some(h), None, None, None) => {
                positive("grid.radius", r)?;
                positive("grid.spacing", h)?;
                GridSpec::centered_box(g.dim, r, h)
            }
            (None, _, Some(lo), Some(hi), Some(n)) => GridSpec::new(lo, hi, n),
            _ => {
                return Err(ConfigError::new(
                    "grid",
                    "give either radius and spacing, or lower, upper and nodes",
                ))
            }
        };
        Ok(spec.with_node_budget(g.node_budget))
    }

    /// Spacing shared by truncation families.
    pub fn family_spacing(&self) -> Result<f64, ConfigError> {
        let h = self.grid.spacing.ok_or_else(|| ConfigError::new("grid.spacing", "required for this task"))?;
        positive("grid.spacing", h)?;
        Ok(h)
    }
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if !(1..=2).contains(&cfg.grid.dim) {
        return Err(ConfigError::new("grid.dim", format!("must be 1 or 2, got {}", cfg.grid.dim)));
    }
    let s = &cfg.solver;
    positive("solver.eig_tol", s.eig_tol)?;
    positive("solver.cauchy_tol", s.cauchy_tol)?;
    if s.initial_eigenpairs == 0 || s.max_eigenpairs < s.initial_eigenpairs {
        return Err(ConfigError::new("solver.max_eigenpairs", "need 0 < initial_eigenpairs <= max_eigenpairs"));
    }
    if let Some(fb) = cfg.operator.form_bound {
        if !(0.0..1.0).contains(&fb.q) || !fb.c_q.is_finite() {
            return Err(ConfigError::new("operator.form_bound", format!("need 0 <= q < 1 and finite c_q, got {fb:?}")));
        }
    }
    validate_potential("operator.potential", &cfg.operator.potential)?;
    validate_potential("operator.negative", &cfg.operator.negative)?;
    let family_task = matches!(cfg.task(), Task::Probe | Task::AvSweep);
    if family_task {
        cfg.family_spacing()?;
        for (f, p) in [("operator.potential", &cfg.operator.potential), ("operator.negative", &cfg.operator.negative)] {
            if matches!(p, PotentialSpec::Tabulated { .. }) {
                return Err(ConfigError::new(f, "tabulated values cannot be used on a truncation family"));
            }
        }
    } else {
        let spec = cfg.grid_spec()?;
        build_grid(&spec).map_err(|e| ConfigError::new("grid", e.to_string()))?;
        let n: usize = spec.nodes.iter().product();
        for (f, p) in [("operator.potential", &cfg.operator.potential), ("operator.negative", &cfg.operator.negative)] {
            if let PotentialSpec::Tabulated { values } = p {
                if values.len() != n {
                    return Err(ConfigError::new(f, format!("{} values for {n} nodes", values.len())));
                }
            }
        }
    }
    match cfg.task() {
        Task::Spectrum => {
            if cfg.spectrum.count == 0 {
                return Err(ConfigError::new("spectrum.count", "must be at least 1"));
            }
        }
        Task::Probe => {
            let p = &cfg.probe;
            if p.radii.len() < 3 {
                return Err(ConfigError::new("probe.radii", format!(">= 3 radii required, got {}", p.radii.len())));
            }
            if p.radii.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(ConfigError::new("probe.radii", "must increase strictly"));
            }
            if p.lambdas.is_empty() || p.lambdas.iter().any(|l| !l.is_finite()) {
                return Err(ConfigError::new("probe.lambdas", "need at least one finite threshold"));
            }
            let h = cfg.family_spacing()?;
            TruncationFamily::new(cfg.grid.dim, h, &p.radii, |_| Err(Error::InvalidArgument("unused".into())))
                .map_err(|e| ConfigError::new("probe.radii", e.to_string()))?;
            let last = GridSpec::centered_box(cfg.grid.dim, *p.radii.last().unwrap(), h).with_node_budget(cfg.grid.node_budget);
            build_grid(&last).map_err(|e| ConfigError::new("probe.radii", e.to_string()))?;
        }
        Task::AvSweep => {
            let a = &cfg.av_sweep;
            if cfg.operator.measure.is_none() {
                return Err(ConfigError::new("operator.measure", "the av-sweep task needs a measure"));
            }
            if a.n.is_empty() {
                return Err(ConfigError::new("av-sweep.n", "need at least one n"));
            }
            for &n in &a.n {
                positive("av-sweep.n", n)?;
            }
            if !(a.box_factor > 1.0) {
                return Err(ConfigError::new("av-sweep.box_factor", "must exceed 1"));
            }
            if !a.lambda.is_finite() {
                return Err(ConfigError::new("av-sweep.lambda", "must be finite"));
            }
            let h = cfg.family_spacing()?;
            let widest = a.n.iter().cloned().fold(0.0, f64::max) * a.box_factor;
            let spec = GridSpec::centered_box(cfg.grid.dim, widest, h).with_node_budget(cfg.grid.node_budget);
            build_grid(&spec).map_err(|e| ConfigError::new("av-sweep.n", e.to_string()))?;
        }
        Task::Capacity => {
            positive("capacity.radius", cfg.capacity.radius)?;
            if !cfg.capacity.center.is_empty() && cfg.capacity.center.len() != cfg.grid.dim {
                return Err(ConfigError::new("capacity.center", "needs one coordinate per axis"));
            }
        }
        Task::Molchanov => {
            if cfg.grid.dim != 1 {
                return Err(ConfigError::new("grid.dim", "the molchanov task is 1D"));
            }
            if cfg.operator.measure.is_none() {
                return Err(ConfigError::new("operator.measure", "the molchanov task needs a measure"));
            }
            positive("molchanov.window", cfg.molchanov.window)?;
            positive("molchanov.stride", cfg.molchanov.stride)?;
        }
        Task::ThinProfile => {
            positive("thin-profile.cube_side", cfg.thin_profile.cube_side)?;
            if cfg.thin_profile.levels.is_empty() {
                return Err(ConfigError::new("thin-profile.levels", "need at least one level"));
            }
        }
        Task::Strichartz => {
            let p = cfg.strichartz.p;
            if !(p > cfg.grid.dim as f64 / 4.0) || !p.is_finite() {
                return Err(ConfigError::new("strichartz.p", format!("must exceed d/4, got {p}")));
            }
            positive("strichartz.cell", cfg.strichartz.cell)?;
            positive("strichartz.amplitude", cfg.strichartz.amplitude)?;
            if cfg.strichartz.samples == 0 {
                return Err(ConfigError::new("strichartz.samples", "must be at least 1"));
            }
        }
        Task::SuperPoincare => {
            let s = &cfg.super_poincare;
            positive("super-poincare.r_min", s.r_min)?;
            positive("super-poincare.r_max", s.r_max)?;
            if !(s.r_max > s.r_min) || s.points < 2 {
                return Err(ConfigError::new("super-poincare", "need r_min < r_max and at least 2 points"));
            }
        }
        Task::FormBound => {
            if cfg.form_bound.c.is_empty() || cfg.form_bound.c.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                return Err(ConfigError::new("form-bound.c", "need finite nonnegative shifts"));
            }
        }
    }
    Ok(())
}

fn validate_potential(field: &str, p: &PotentialSpec) -> Result<(), ConfigError> {
    match p {
        PotentialSpec::Power { alpha, .. } if !(alpha.is_finite() && *alpha >= 0.0) => {
            Err(ConfigError::new(format!("{field}.alpha"), "must be finite and nonnegative"))
        }
        PotentialSpec::Indicator { radius, .. } => positive(&format!("{field}.radius"), *radius),
        PotentialSpec::Wells { spacing, radius, .. } => {
            positive(&format!("{field}.spacing"), *spacing)?;
            positive(&format!("{field}.radius"), *radius)?;
            if 2.0 * radius >= *spacing {
                return Err(ConfigError::new(format!("{field}.radius"), "wells must be disjoint (2·radius < spacing)"));
            }
            Ok(())
        }
        PotentialSpec::Polynomial { terms } => {
            for t in terms {
                if t[1] < 0.0 || t[2] < 0.0 || t[1].fract() != 0.0 || t[2].fract() != 0.0 {
                    return Err(ConfigError::new(format!("{field}.terms"), "exponents must be nonnegative integers"));
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\ndim = 1\nradius = 5.0\nspacing = 0.1\n";

    #[test]
    fn minimal_spectrum_config_fills_defaults() {
        let cfg = parse_config(MINIMAL, Some(Task::Spectrum)).unwrap();
        assert_eq!(cfg.spectrum.count, 10);
        assert_eq!(cfg.solver.eig_tol, 1e-8);
        assert_eq!(cfg.operator.potential, PotentialSpec::Zero);
        let echoed = toml::to_string(&cfg).unwrap();
        assert!(echoed.contains("eig_tol"));
        assert_eq!(parse_config(&echoed, None).unwrap(), cfg);
    }

    #[test]
    fn field_level_errors() {
        let bad = format!("{MINIMAL}[solver]\neig_tol = -1e-3\n");
        let err = parse_config(&bad, Some(Task::Spectrum)).unwrap_err();
        assert_eq!(err.field, "solver.eig_tol");
        let unknown = format!("{MINIMAL}colour = 3\n");
        let err = parse_config(&unknown, Some(Task::Spectrum)).unwrap_err();
        assert!(err.message.contains("colour"), "{err}");
        assert!(err.field.starts_with("line"), "{err}");
        let probe = format!("{MINIMAL}[probe]\nradii = [1.0, 2.0]\nlambdas = [1.0]\n");
        let err = parse_config(&probe, Some(Task::Probe)).unwrap_err();
        assert!(err.message.contains(">= 3 radii required"));
    }

    #[test]
    fn potential_families_parse() {
        let text = format!(
            "{MINIMAL}[operator.potential]\nfamily = \"indicator\"\nradius = 1.0\ninside = 0.0\noutside = inf\n"
        );
        let cfg = parse_config(&text, Some(Task::Spectrum)).unwrap();
        assert!(matches!(cfg.operator.potential, PotentialSpec::Indicator { outside, .. } if outside == f64::INFINITY));
        let typo = format!("{MINIMAL}[operator.potential]\nfamily = \"power\"\nalpha = 2.0\nscal = 1.0\n");
        assert!(parse_config(&typo, Some(Task::Spectrum)).is_err());
        let mismatch = "task = \"probe\"\n".to_string() + MINIMAL;
        assert_eq!(parse_config(&mismatch, Some(Task::Spectrum)).unwrap_err().field, "task");
    }
}

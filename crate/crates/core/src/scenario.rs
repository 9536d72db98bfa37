//! Scenario runner: config files in, deterministic CSV out.
//!
//! Config format: flat `key = value` lines under `[section]` headers.
//! Sections: `[model]`, `[grid]`, `[integrator]`, `[diagnostics]`,
//! `[ensemble.N]` (one per member), `[output]`. `#` starts a comment.
//!
//! The CSV contract is fixed: a `# adia-check csv v1` version line, a header
//! row, then one row per grid sample with the columns
//! `t, t_over_tau, e_plus, e_minus, adicrit_ratio, q_numeric, q_analytic,
//! f0, f1_exact, f1_naive, fidelity_avron, prediction_residual,
//! unitarity_error`. Diagnostics that were not selected emit empty fields,
//! never zeros. Ensemble runs append `f0_ensemble, q_ensemble` (and
//! optionally per-member columns). Numbers carry 12 significant digits, and
//! reruns of the same config are byte-identical (fixed-step default).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::diagnostics::{
    self, instantaneous_projector, DiagnosticsRecord, EnsembleMember, EnsembleSpec,
};
use crate::error::{AdiaError, Result};
use crate::hamiltonians::{Branch, HamiltonianModel, TabulatedField};
use crate::mat2::RealVec3;
use crate::propagation::{
    avron_trajectory, propagate, IntegratorConfig, Method, TimeGrid, Trajectory,
};

pub const CSV_VERSION_LINE: &str = "# adia-check csv v1";

pub const BASE_COLUMNS: [&str; 13] = [
    "t",
    "t_over_tau",
    "e_plus",
    "e_minus",
    "adicrit_ratio",
    "q_numeric",
    "q_analytic",
    "f0",
    "f1_exact",
    "f1_naive",
    "fidelity_avron",
    "prediction_residual",
    "unitarity_error",
];

/// Which diagnostics a run computes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiagnosticsSelection {
    pub adicrit: bool,
    pub q: bool,
    pub q_analytic: bool,
    pub f0: bool,
    pub f1: bool,
    pub avron_fidelity: bool,
    pub prediction_check: bool,
}

impl DiagnosticsSelection {
    /// Everything except `q_analytic`, which only some models support.
    pub fn standard() -> Self {
        Self {
            adicrit: true,
            q: true,
            q_analytic: false,
            f0: true,
            f1: true,
            avron_fidelity: true,
            prediction_check: true,
        }
    }

    pub fn all() -> Self {
        Self {
            q_analytic: true,
            ..Self::standard()
        }
    }

    pub fn parse(list: &str, path: &str) -> Result<Self> {
        let mut sel = Self::default();
        for raw in list.split(',') {
            let name = raw.trim();
            match name {
                "" => {}
                "all" => sel = Self::all(),
                "adicrit" => sel.adicrit = true,
                "q" => sel.q = true,
                "q_analytic" => sel.q_analytic = true,
                "f0" => sel.f0 = true,
                "f1" => sel.f1 = true,
                "avron_fidelity" => sel.avron_fidelity = true,
                "prediction_check" => sel.prediction_check = true,
                other => {
                    return Err(AdiaError::config(
                        path,
                        format!(
                            "unknown diagnostic `{other}` (expected adicrit, q, q_analytic, \
                             f0, f1, avron_fidelity, prediction_check, all)"
                        ),
                    ))
                }
            }
        }
        Ok(sel)
    }
}

/// A fully described run.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    /// Model for the base diagnostic columns. Ensemble runs may omit it, in
    /// which case the first member supplies the base columns.
    pub model: Option<HamiltonianModel>,
    pub grid: TimeGrid,
    pub integrator: IntegratorConfig,
    pub diagnostics: DiagnosticsSelection,
    pub branch: Branch,
    pub ensemble: Option<EnsembleSpec>,
    pub emit_members: bool,
    pub output: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new(model: HamiltonianModel, grid: TimeGrid) -> Self {
        Self {
            model: Some(model),
            grid,
            integrator: IntegratorConfig::default(),
            diagnostics: DiagnosticsSelection::standard(),
            branch: Branch::Plus,
            ensemble: None,
            emit_members: false,
            output: None,
        }
    }

    /// The model backing the base columns.
    pub fn base_model(&self) -> Result<&HamiltonianModel> {
        if let Some(m) = &self.model {
            return Ok(m);
        }
        if let Some(e) = &self.ensemble {
            return Ok(&e.members()[0].model);
        }
        Err(AdiaError::config(
            "model",
            "scenario needs a [model] section or ensemble members",
        ))
    }

    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        let model = self.base_model()?;
        if self.diagnostics.q_analytic
            && !matches!(
                model,
                HamiltonianModel::Counterexample { .. } | HamiltonianModel::RotatingField { .. }
            )
        {
            return Err(AdiaError::config(
                "diagnostics.select",
                format!(
                    "q_analytic requires a model with an explicit propagator \
                     parametrization (counterexample or rotating_field), got {}",
                    model.name()
                ),
            ));
        }
        Ok(())
    }
}

/// CSV payload: fixed header plus one row of optional values per sample.
#[derive(Debug, Clone)]
pub struct CsvReport {
    header: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl CsvReport {
    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.rows
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Value at (row, named column).
    pub fn value(&self, row: usize, column: &str) -> Option<f64> {
        let idx = self.column_index(column)?;
        self.rows.get(row).and_then(|r| r[idx])
    }

    /// Render with the version line, header and 12-significant-digit
    /// numbers; absent values render as empty fields.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_VERSION_LINE);
        out.push('\n');
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                if let Some(v) = cell {
                    out.push_str(&format_sig12(*v));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| AdiaError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// 12 significant digits: below integrator tolerance, above cross-platform
/// rounding noise.
fn format_sig12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Thread cap for internal parallelism, from `ADIA_CHECK_THREADS` (invalid
/// or unset falls back to the machine's parallelism).
pub fn thread_cap() -> usize {
    if let Ok(raw) = std::env::var("ADIA_CHECK_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Propagate all ensemble members on the same grid, concurrently up to the
/// thread cap; results keep member order.
fn member_trajectories(
    spec: &EnsembleSpec,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
) -> Result<Vec<Trajectory>> {
    let n = spec.len();
    let workers = thread_cap().min(n).max(1);
    let mut slots: Vec<Option<Result<Trajectory>>> = (0..n).map(|_| None).collect();
    if workers <= 1 {
        for (i, m) in spec.members().iter().enumerate() {
            slots[i] = Some(propagate(&m.model, grid, cfg));
        }
    } else {
        let chunks: Vec<Vec<usize>> = (0..workers)
            .map(|w| (w..n).step_by(workers).collect())
            .collect();
        let outcomes: Vec<Vec<(usize, Result<Trajectory>)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .into_iter()
                .map(|indices| {
                    scope.spawn(move || {
                        indices
                            .into_iter()
                            .map(|i| (i, propagate(&spec.members()[i].model, grid, cfg)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for batch in outcomes {
            for (i, res) in batch {
                slots[i] = Some(res);
            }
        }
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, slot)| {
            slot.unwrap().map_err(|e| AdiaError::EnsembleMember {
                index: i,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Run one scenario: propagate, evaluate the selected diagnostics at every
/// grid sample, and assemble the CSV report. Deterministic for a fixed
/// config with the fixed-step integrator.
pub fn run_scenario(config: &ScenarioConfig) -> Result<CsvReport> {
    config.validate()?;
    let model = config.base_model()?.clone();
    let sel = config.diagnostics;
    let branch = config.branch;
    let grid = &config.grid;

    let traj = propagate(&model, grid, &config.integrator)?;
    let frames = traj.frames().ok();
    let needs_frames =
        sel.q || sel.q_analytic || sel.f0 || sel.f1 || sel.avron_fidelity || sel.prediction_check;
    if needs_frames && frames.is_none() {
        // Surface the original reason.
        traj.frames()?;
    }
    let avron = if sel.avron_fidelity {
        Some(avron_trajectory(&model, grid, &config.integrator)?)
    } else {
        None
    };

    let ensemble_data = match &config.ensemble {
        Some(spec) => Some((spec, member_trajectories(spec, grid, &config.integrator)?)),
        None => None,
    };

    let tau = model.tau();
    let mut records = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        let t = traj.time(i);
        let mut rec = DiagnosticsRecord {
            t,
            unitarity_error: traj.unitarity_errors()[i],
            ..Default::default()
        };
        if sel.adicrit {
            rec.adiabaticity_ratio = Some(model.adiabaticity_ratio(t)?);
        }
        if sel.q {
            rec.q_numeric = Some(diagnostics::survival_q_branch(&traj, i, branch)?);
        }
        if sel.q_analytic {
            rec.q_analytic = Some(diagnostics::q_analytic(&model, t)?);
        }
        if sel.f0 {
            rec.f0 = Some(diagnostics::overlap_f0_branch(
                frames.unwrap(),
                i,
                branch,
            )?);
        }
        if sel.f1 {
            rec.f1_exact = Some(diagnostics::f1_exact_at(&traj, i)?);
            rec.f1_naive = Some(diagnostics::f1_naive_at(&traj, i)?);
        }
        if let Some(av) = &avron {
            rec.fidelity_avron = Some(diagnostics::avron_fidelity_at(&traj, av, i)?);
        }
        if sel.prediction_check {
            rec.prediction_residual = Some(diagnostics::prediction_residual_at(&traj, i)?);
        }
        records.push(rec);
    }

    let mut header: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    if let Some((spec, _)) = &ensemble_data {
        header.push("f0_ensemble".into());
        header.push("q_ensemble".into());
        if config.emit_members {
            for k in 0..spec.len() {
                header.push(format!("f0_member_{k}"));
                header.push(format!("q_member_{k}"));
            }
        }
    }

    let mut rows = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let mut row: Vec<Option<f64>> = vec![
            Some(rec.t),
            tau.map(|tau| rec.t / tau),
            frames.map(|f| f[i].e_plus),
            frames.map(|f| f[i].e_minus),
            rec.adiabaticity_ratio,
            rec.q_numeric,
            rec.q_analytic,
            rec.f0,
            rec.f1_exact,
            rec.f1_naive,
            rec.fidelity_avron,
            rec.prediction_residual,
            Some(rec.unitarity_error),
        ];
        if let Some((spec, trajs)) = &ensemble_data {
            let per_member: Vec<(f64, f64)> = spec
                .members()
                .iter()
                .zip(trajs.iter())
                .enumerate()
                .map(|(k, (_, mt))| {
                    let m_frames = mt
                        .frames()
                        .map_err(|e| AdiaError::EnsembleMember {
                            index: k,
                            source: Box::new(e),
                        })?;
                    let p0 = instantaneous_projector(&m_frames[0], branch);
                    let p_t = instantaneous_projector(&m_frames[i], branch);
                    let f0 = p0.mul(&p_t).trace().re;
                    let q = diagnostics::survival_q_branch(mt, i, branch).map_err(|e| {
                        AdiaError::EnsembleMember {
                            index: k,
                            source: Box::new(e),
                        }
                    })?;
                    Ok((f0, q))
                })
                .collect::<Result<_>>()?;
            let f0_ens: f64 = spec
                .members()
                .iter()
                .zip(&per_member)
                .map(|(m, (f0, _))| m.weight * f0)
                .sum();
            let q_ens: f64 = spec
                .members()
                .iter()
                .zip(&per_member)
                .map(|(m, (_, q))| m.weight * q)
                .sum();
            row.push(Some(f0_ens));
            row.push(Some(q_ens));
            if config.emit_members {
                for (f0, q) in per_member {
                    row.push(Some(f0));
                    row.push(Some(q));
                }
            }
        }
        rows.push(row);
    }

    Ok(CsvReport { header, rows })
}

/// Canned scenario: fidelity between exact evolution and the
/// spectral-projection generator for the counterexample with ω₀ = 1,
/// τ = 2π·10, swept over a full period. The curve starts at one and dips to
/// zero at t/τ = 1/2.
pub fn cmd_fig1(steps: usize) -> Result<CsvReport> {
    let tau = 2.0 * std::f64::consts::PI * 10.0;
    let model = HamiltonianModel::counterexample(1.0, tau)?;
    let steps = steps.max(2);
    let grid = TimeGrid::new(0.0, tau, steps)?;
    let mut config = ScenarioConfig::new(model, grid);
    // Keep at least 4000 internal steps so coarse output grids still meet
    // the drift cap.
    config.integrator.substeps = 4000usize.div_ceil(steps);
    config.diagnostics = DiagnosticsSelection {
        avron_fidelity: true,
        ..DiagnosticsSelection::default()
    };
    run_scenario(&config)
}

/// Pick internal sub-steps for a Landau–Zener window so the estimated RK4
/// unitarity decay stays a factor below the drift cap. The per-step decay
/// scales as `(h·E)⁶/72`; bound `E` by its edge value.
fn lzt_substeps(omega: f64, sweep: f64, window: f64, steps: usize) -> usize {
    let e_max = (omega * omega + (0.5 * sweep * window).powi(2)).sqrt();
    let span = 2.0 * window;
    let target = 1e-9;
    let h = (72.0 * target / (span * e_max.powi(6))).powf(0.2);
    let total = (span / h).ceil() as usize;
    // Sub-steps are integrated but never stored, so a large count only
    // costs time; extreme windows can still be overridden explicitly.
    total.div_ceil(steps).clamp(1, 4_000_000)
}

/// Canned scenario: symmetric Landau–Zener sweep over `t ∈ [−window, window]`
/// with Rabi coupling `omega` and detuning slope `sweep`, reporting the
/// survival probability along the sweep.
pub fn cmd_lzt(
    omega: f64,
    sweep: f64,
    window: f64,
    steps: Option<usize>,
    substeps: Option<usize>,
) -> Result<CsvReport> {
    if !(window.is_finite() && window > 0.0) {
        return Err(AdiaError::config("lzt.window", "must be finite and > 0"));
    }
    let model = HamiltonianModel::landau_zener(omega, sweep)?;
    let steps = steps.unwrap_or(2000).max(2);
    let grid = TimeGrid::new(-window, window, steps)?;
    let mut config = ScenarioConfig::new(model, grid);
    config.integrator.substeps =
        substeps.unwrap_or_else(|| lzt_substeps(omega, sweep, window, steps));
    config.diagnostics = DiagnosticsSelection {
        q: true,
        ..DiagnosticsSelection::default()
    };
    run_scenario(&config)
}

/// Ensemble run: requires members in the config; base columns come from the
/// `[model]` section when present, else from the first member.
pub fn cmd_ensemble(config: &ScenarioConfig) -> Result<CsvReport> {
    if config.ensemble.is_none() {
        return Err(AdiaError::config(
            "ensemble",
            "ensemble run needs at least one [ensemble.N] section",
        ));
    }
    run_scenario(config)
}

// ---------------------------------------------------------------------------
// Config file parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Clone)]
struct ModelDraft {
    kind: Option<String>,
    omega0: Option<f64>,
    tau: Option<f64>,
    rabi: Option<f64>,
    sweep_rate: Option<f64>,
    rx: Option<f64>,
    ry: Option<f64>,
    rz: Option<f64>,
    path: Option<String>,
    weight: Option<f64>,
}

impl ModelDraft {
    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let path = format!("{section}.{key}");
        match key {
            "kind" => self.kind = Some(value.to_string()),
            "omega0" => self.omega0 = Some(parse_f64(&path, value)?),
            "tau" => self.tau = Some(parse_f64(&path, value)?),
            "rabi" => self.rabi = Some(parse_f64(&path, value)?),
            "sweep_rate" => self.sweep_rate = Some(parse_f64(&path, value)?),
            "rx" => self.rx = Some(parse_f64(&path, value)?),
            "ry" => self.ry = Some(parse_f64(&path, value)?),
            "rz" => self.rz = Some(parse_f64(&path, value)?),
            "path" => self.path = Some(value.to_string()),
            "weight" => self.weight = Some(parse_f64(&path, value)?),
            _ => {
                return Err(AdiaError::config(path, "unknown key"));
            }
        }
        Ok(())
    }

    fn finish(&self, section: &str) -> Result<HamiltonianModel> {
        let kind = self.kind.as_deref().ok_or_else(|| {
            AdiaError::config(format!("{section}.kind"), "missing model kind")
        })?;
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| {
                AdiaError::config(format!("{section}.{key}"), "required for this model kind")
            })
        };
        match kind {
            "counterexample" => HamiltonianModel::counterexample(
                need(self.omega0, "omega0")?,
                need(self.tau, "tau")?,
            ),
            "rotating_field" => HamiltonianModel::rotating_field(
                need(self.omega0, "omega0")?,
                need(self.tau, "tau")?,
            ),
            "landau_zener" => HamiltonianModel::landau_zener(
                need(self.rabi, "rabi")?,
                need(self.sweep_rate, "sweep_rate")?,
            ),
            "constant" => HamiltonianModel::constant(RealVec3::new(
                need(self.rx, "rx")?,
                need(self.ry, "ry")?,
                need(self.rz, "rz")?,
            )),
            "tabulated" => {
                let path = self.path.as_deref().ok_or_else(|| {
                    AdiaError::config(format!("{section}.path"), "required for tabulated models")
                })?;
                Ok(HamiltonianModel::Tabulated(TabulatedField::load(
                    Path::new(path),
                )?))
            }
            other => Err(AdiaError::config(
                format!("{section}.kind"),
                format!(
                    "unknown model kind `{other}` (expected counterexample, rotating_field, \
                     landau_zener, constant, tabulated)"
                ),
            )),
        }
    }
}

fn parse_f64(path: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| AdiaError::config(path, format!("not a number: `{value}`")))
}

fn parse_usize(path: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| AdiaError::config(path, format!("not a non-negative integer: `{value}`")))
}

fn parse_bool(path: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(AdiaError::config(
            path,
            format!("not a boolean: `{value}`"),
        )),
    }
}

/// Parse a scenario config from text. `origin` labels error messages
/// (usually the file path).
pub fn parse_config(text: &str, origin: &str) -> Result<ScenarioConfig> {
    let mut section = String::new();
    let mut model_draft: Option<ModelDraft> = None;
    let mut ensemble_drafts: BTreeMap<usize, ModelDraft> = BTreeMap::new();
    let mut grid_t0 = None;
    let mut grid_t1 = None;
    let mut grid_steps = None;
    let mut integrator = IntegratorConfig::default();
    let mut diagnostics = DiagnosticsSelection::standard();
    let mut branch = Branch::Plus;
    let mut emit_members = false;
    let mut output: Option<PathBuf> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let here = format!("{origin}:{}", lineno + 1);
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                AdiaError::config(&here, "malformed section header (missing `]`)")
            })?;
            let name = name.trim();
            let known = name == "model"
                || name == "grid"
                || name == "integrator"
                || name == "diagnostics"
                || name == "output"
                || name.starts_with("ensemble.");
            if !known {
                return Err(AdiaError::config(
                    &here,
                    format!("unknown section `[{name}]`"),
                ));
            }
            if let Some(idx) = name.strip_prefix("ensemble.") {
                let idx = parse_usize(&format!("{here} [{name}]"), idx)?;
                ensemble_drafts.entry(idx).or_default();
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            AdiaError::config(&here, "expected `key = value` or a `[section]` header")
        })?;
        let key = key.trim();
        let value = value.trim();
        if section.is_empty() {
            return Err(AdiaError::config(&here, "key before any [section] header"));
        }
        match section.as_str() {
            "model" => {
                model_draft
                    .get_or_insert_with(ModelDraft::default)
                    .set("model", key, value)?;
            }
            "grid" => match key {
                "t0" => grid_t0 = Some(parse_f64("grid.t0", value)?),
                "t1" => grid_t1 = Some(parse_f64("grid.t1", value)?),
                "steps" => grid_steps = Some(parse_usize("grid.steps", value)?),
                _ => return Err(AdiaError::config(format!("grid.{key}"), "unknown key")),
            },
            "integrator" => match key {
                "method" => {
                    integrator.method = match value {
                        "rk4_fixed" => Method::Rk4Fixed,
                        "rk45_adaptive" => Method::Rk45Adaptive,
                        other => {
                            return Err(AdiaError::config(
                                "integrator.method",
                                format!(
                                    "unknown method `{other}` (expected rk4_fixed or \
                                     rk45_adaptive)"
                                ),
                            ))
                        }
                    }
                }
                "rel_tol" => integrator.rel_tol = parse_f64("integrator.rel_tol", value)?,
                "abs_tol" => integrator.abs_tol = parse_f64("integrator.abs_tol", value)?,
                "max_unitarity_drift" => {
                    integrator.max_unitarity_drift =
                        parse_f64("integrator.max_unitarity_drift", value)?
                }
                "substeps" => integrator.substeps = parse_usize("integrator.substeps", value)?,
                _ => {
                    return Err(AdiaError::config(
                        format!("integrator.{key}"),
                        "unknown key",
                    ))
                }
            },
            "diagnostics" => match key {
                "select" => diagnostics = DiagnosticsSelection::parse(value, "diagnostics.select")?,
                "branch" => {
                    branch = match value {
                        "plus" => Branch::Plus,
                        "minus" => Branch::Minus,
                        other => {
                            return Err(AdiaError::config(
                                "diagnostics.branch",
                                format!("unknown branch `{other}` (expected plus or minus)"),
                            ))
                        }
                    }
                }
                "emit_members" => emit_members = parse_bool("diagnostics.emit_members", value)?,
                _ => {
                    return Err(AdiaError::config(
                        format!("diagnostics.{key}"),
                        "unknown key",
                    ))
                }
            },
            "output" => match key {
                "path" => output = Some(PathBuf::from(value)),
                _ => return Err(AdiaError::config(format!("output.{key}"), "unknown key")),
            },
            ensemble => {
                // ensemble.N member fields
                let idx: usize = ensemble
                    .strip_prefix("ensemble.")
                    .and_then(|s| s.parse().ok())
                    .expect("section name validated above");
                ensemble_drafts
                    .get_mut(&idx)
                    .expect("entry created at section header")
                    .set(ensemble, key, value)?;
            }
        }
    }

    let grid = TimeGrid::new(
        grid_t0.ok_or_else(|| AdiaError::config("grid.t0", "missing"))?,
        grid_t1.ok_or_else(|| AdiaError::config("grid.t1", "missing"))?,
        grid_steps.ok_or_else(|| AdiaError::config("grid.steps", "missing"))?,
    )?;

    let model = match &model_draft {
        Some(d) => Some(d.finish("model")?),
        None => None,
    };

    let ensemble = if ensemble_drafts.is_empty() {
        None
    } else {
        let members = ensemble_drafts
            .iter()
            .map(|(idx, draft)| {
                let section = format!("ensemble.{idx}");
                let weight = draft.weight.ok_or_else(|| {
                    AdiaError::config(format!("{section}.weight"), "missing")
                })?;
                Ok(EnsembleMember {
                    weight,
                    model: draft.finish(&section)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Some(EnsembleSpec::new(members)?)
    };

    let config = ScenarioConfig {
        model,
        grid,
        integrator,
        diagnostics,
        branch,
        ensemble,
        emit_members,
        output,
    };
    config.validate()?;
    Ok(config)
}

/// Load and parse a scenario config file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| AdiaError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_config(&text, &path.display().to_string())
}

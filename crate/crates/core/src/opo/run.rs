use super::density::DensityOperator;
use super::lindblad::{dense_options, lindblad_dense_propagate, AUTO_DENSE_DIM};
use super::model::{build_model, ModelKind, QuantumModel, Truncation};
use super::observables::{g3, linspace, mean_number, photon_distribution, reduce, wigner_grid, z3_symmetrize};
use super::params::OpoParams;
use super::semiclassical::{semiclassical_steady, SteadyState};
use super::trajectory::{run_ensemble, time_average, vacuum, TrajectoryOptions, Unraveling};
use crate::{Error, Result, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            "fig6" => Ok(Preset::Fig6),
            _ => Err(Error::config("preset", format!("unknown preset {s:?} (fig2..fig6)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Dense master equation for small joint spaces, trajectories above.
    #[default]
    Auto,
    Dense,
    Trajectories,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerMode {
    Signal,
    Idler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerSpec {
    pub modes: Vec<WignerMode>,
    /// Grid spans `[−extent, extent]` in both quadratures.
    pub extent: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub preset: Option<Preset>,
    pub params: OpoParams,
    /// When set, the drive is `ratio · E_th` and `params.e` is ignored.
    #[serde(default)]
    pub ratio: Option<f64>,
    pub model: ModelKind,
    pub truncation: Truncation,
    pub t_end: f64,
    /// Number of equally spaced sample times in `(0, t_end]`.
    pub samples: usize,
    /// Extra times at which photon distributions and Wigner grids are
    /// written. The last sample is always a snapshot.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub trajectory: TrajectoryOptions,
    #[serde(default)]
    pub wigner: Option<WignerSpec>,
    /// Replace the final snapshot by the mean over samples with `t ≥` this.
    #[serde(default)]
    pub average_from: Option<f64>,
    /// Project snapshot states onto their Z₃-invariant part.
    #[serde(default)]
    pub z3_symmetrize: bool,
    #[serde(default = "default_leakage")]
    pub leakage_threshold: f64,
    #[serde(default = "default_escalations")]
    pub max_escalations: usize,
}

fn default_trajectories() -> usize {
    100
}
fn default_leakage() -> f64 {
    1e-4
}
fn default_escalations() -> usize {
    2
}

/// Rates shared by the dissipative presets: ζ′/γ = 0.2, ξ′/γ = 0.1, γ₀ = γ₁ = γ₂ = γ.
pub fn dissipative_params() -> OpoParams {
    OpoParams { e: 0.0, phi: 0.0, zeta_p: 0.2, xi_p: 0.1, gamma0: 1.0, gamma1: 1.0, gamma2: 1.0 }
}

/// Drive used by the short-time preset, in units of γ.
pub const FIG2_DRIVE: f64 = 50.0;

/// Truncation that holds the bright branch at `ratio` with room for the
/// photon-number spread.
pub fn bright_truncation(params: &OpoParams, ratio: f64) -> Truncation {
    let base = Truncation::default();
    match semiclassical_steady(params, ratio) {
        Ok(s) if s.n1 > 0.0 => Truncation {
            n0_max: base.n0_max,
            n1_max: base.n1_max.max((2.2 * s.n1 + 10.0).ceil() as usize),
            n2_max: base.n2_max.max((4.0 * s.n2 + 8.0).ceil() as usize),
        },
        _ => base,
    }
}

impl RunConfig {
    pub fn preset(preset: Preset, ratio: Option<f64>) -> Result<Self> {
        let diss = dissipative_params();
        let pe = ModelKind::PumpEliminated { depletion: false };
        let jump = TrajectoryOptions { unraveling: Unraveling::Jump, ..Default::default() };
        let wig = |modes: Vec<WignerMode>, extent: f64, points: usize| Some(WignerSpec { modes, extent, points });
        let cfg = |ratio: f64| RunConfig {
            schema_version: SCHEMA_VERSION,
            preset: Some(preset),
            params: diss,
            ratio: Some(ratio),
            model: pe,
            truncation: bright_truncation(&diss, ratio),
            t_end: 30.0,
            samples: 60,
            snapshot_times: vec![],
            method: Method::Auto,
            trajectories: 8,
            trajectory: jump,
            wigner: None,
            average_from: None,
            z3_symmetrize: false,
            leakage_threshold: default_leakage(),
            max_escalations: default_escalations(),
        };
        let c = match preset {
            Preset::Fig2 => {
                if ratio.is_some() {
                    return Err(Error::config("ratio", "fig2 has a fixed drive; use a config file to change it"));
                }
                RunConfig {
                    params: OpoParams { e: FIG2_DRIVE, phi: 0.0, zeta_p: 200.0, xi_p: 100.0, gamma0: 1.0, gamma1: 1.0, gamma2: 1.0 },
                    ratio: None,
                    model: ModelKind::ThreeMode,
                    truncation: Truncation::default(),
                    t_end: 2e-2,
                    samples: 40,
                    snapshot_times: vec![5e-4, 5e-3],
                    trajectories: 50,
                    method: Method::Trajectories,
                    wigner: wig(vec![WignerMode::Signal], 4.0, 81),
                    ..cfg(1.0)
                }
            }
            // The photon-number tail at threshold needs several enlargements.
            Preset::Fig3 | Preset::Fig4 => RunConfig { max_escalations: 5, ..cfg(ratio.unwrap_or(1.0)) },
            Preset::Fig5 => {
                let r = ratio.unwrap_or(1.0);
                let ext = 3.0 + (bright_truncation(&diss, r).n1_max as f64).sqrt();
                RunConfig { wigner: wig(vec![WignerMode::Idler, WignerMode::Signal], ext, 81), ..cfg(r) }
            }
            Preset::Fig6 => {
                let r = ratio.unwrap_or(1.4);
                let n1 = semiclassical_steady(&diss, r).map(|s| s.n1).unwrap_or(0.0);
                let ext = 4.0 + 1.2 * (2.0 * n1).sqrt();
                RunConfig {
                    t_end: 20.0,
                    samples: 40,
                    average_from: Some(10.0),
                    z3_symmetrize: true,
                    wigner: wig(vec![WignerMode::Signal], ext, 81),
                    ..cfg(r)
                }
            }
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        self.params.validate()?;
        if let Some(r) = self.ratio {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::config("ratio", "must be finite and ≥ 0"));
            }
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("t_end", "must be positive and finite"));
        }
        if self.samples == 0 {
            return Err(Error::config("samples", "must be at least 1"));
        }
        if self.snapshot_times.iter().any(|t| !(*t > 0.0 && *t <= self.t_end)) {
            return Err(Error::config("snapshot_times", "must lie in (0, t_end]"));
        }
        if let Some(w) = &self.wigner {
            if !(w.extent > 0.0) || w.points < 2 {
                return Err(Error::config("wigner", "needs extent > 0 and at least 2 points"));
            }
        }
        if self.trajectories == 0 {
            return Err(Error::config("trajectories", "must be at least 1"));
        }
        if !(self.leakage_threshold > 0.0) {
            return Err(Error::config("leakage_threshold", "must be positive"));
        }
        self.trajectory.validate()
    }

    /// Parameters with the ratio applied.
    pub fn effective_params(&self) -> Result<OpoParams> {
        match self.ratio {
            Some(r) => self.params.with_ratio(r),
            None => Ok(self.params),
        }
    }

    /// Sample times, snapshot times merged in.
    pub fn times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = (1..=self.samples).map(|k| self.t_end * k as f64 / self.samples as f64).collect();
        t.extend(&self.snapshot_times);
        t.sort_by(f64::total_cmp);
        t.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * self.t_end);
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub n1: f64,
    pub n2: f64,
    pub g3: Option<f64>,
    pub n1_stderr: Option<f64>,
    pub n2_stderr: Option<f64>,
    pub g3_stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerField {
    pub mode: WignerMode,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major over `ys` (outer) and `xs` (inner).
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    /// Set when the state is a time average starting here.
    pub averaged_from: Option<f64>,
    pub p_signal: Vec<f64>,
    pub p_idler: Vec<f64>,
    pub g3: Option<f64>,
    pub wigner: Vec<WignerField>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UsedMethod {
    Dense,
    Trajectories,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leakage {
    pub signal: f64,
    pub idler: f64,
    pub pump: Option<f64>,
}

impl Leakage {
    pub fn max(&self) -> f64 {
        self.signal.max(self.idler).max(self.pump.unwrap_or(0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub config: RunConfig,
    pub params: OpoParams,
    pub threshold: Option<f64>,
    pub semiclassical: Option<SteadyState>,
    pub truncation: Truncation,
    pub escalations: usize,
    pub method: UsedMethod,
    pub leakage: Leakage,
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<Snapshot>,
}

/// Reduced signal, idler and (when present) pump states at every sample.
struct Samples {
    signal: Vec<DensityOperator>,
    idler: Vec<DensityOperator>,
    pump: Vec<DensityOperator>,
    stderr: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

fn propagate(model: &QuantumModel, cfg: &RunConfig, times: &[f64]) -> Result<(Samples, UsedMethod)> {
    let dense = match cfg.method {
        Method::Dense => true,
        Method::Trajectories => false,
        Method::Auto => model.dim() <= AUTO_DENSE_DIM,
    };
    if dense {
        let rho0 = DensityOperator::basis(model.dim(), model.vacuum_index());
        let mut s = Samples { signal: vec![], idler: vec![], pump: vec![], stderr: None };
        lindblad_dense_propagate(model, &rho0, times, dense_options(), |rho| {
            s.signal.push(reduce(rho, &model.register, model.signal)?);
            s.idler.push(reduce(rho, &model.register, model.idler)?);
            if let Some(p) = model.pump {
                s.pump.push(reduce(rho, &model.register, p)?);
            }
            Ok(())
        })?;
        return Ok((s, UsedMethod::Dense));
    }
    let opts = TrajectoryOptions { keep_full: false, ..cfg.trajectory };
    let res = run_ensemble(model, &vacuum(model), times, cfg.trajectories, &opts)?;
    let pick = |m: usize| res.reduced.iter().map(|r| r[m].clone()).collect::<Vec<_>>();
    let s = Samples {
        signal: pick(model.signal),
        idler: pick(model.idler),
        pump: model.pump.map(pick).unwrap_or_default(),
        stderr: Some((res.n1_stderr.clone(), res.n2_stderr.clone(), res.g3_stderr.clone())),
    };
    Ok((s, UsedMethod::Trajectories))
}

fn max_leak(states: &[DensityOperator]) -> f64 {
    states.iter().map(|r| photon_distribution(r).leakage).fold(0.0, f64::max)
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Runs a configuration, enlarging the truncation while the reduced-state
/// leakage exceeds the threshold (at most `max_escalations` times).
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let params = cfg.effective_params()?;
    let times = cfg.times();
    let mut trunc = cfg.truncation;
    let mut escalations = 0;
    let (samples, method, leakage) = loop {
        let model = build_model(&params, cfg.model, trunc)?;
        let (samples, method) = propagate(&model, cfg, &times)?;
        let leakage = Leakage {
            signal: max_leak(&samples.signal),
            idler: max_leak(&samples.idler),
            pump: (!samples.pump.is_empty()).then(|| max_leak(&samples.pump)),
        };
        if leakage.max() <= cfg.leakage_threshold || escalations >= cfg.max_escalations {
            break (samples, method, leakage);
        }
        trunc = trunc.escalated();
        escalations += 1;
    };
    let series = times
        .iter()
        .enumerate()
        .map(|(k, &t)| SeriesRow {
            t,
            n1: mean_number(&samples.signal[k]),
            n2: mean_number(&samples.idler[k]),
            g3: g3(&samples.signal[k]).ok(),
            n1_stderr: samples.stderr.as_ref().and_then(|s| finite(s.0[k])),
            n2_stderr: samples.stderr.as_ref().and_then(|s| finite(s.1[k])),
            g3_stderr: samples.stderr.as_ref().and_then(|s| finite(s.2[k])),
        })
        .collect();
    let snap_at = |signal: DensityOperator, idler: DensityOperator, t: f64, averaged_from: Option<f64>| -> Snapshot {
        let (signal, idler) = if cfg.z3_symmetrize { (z3_symmetrize(&signal), z3_symmetrize(&idler)) } else { (signal, idler) };
        let wigner = cfg
            .wigner
            .as_ref()
            .map(|w| {
                let xs = linspace(-w.extent, w.extent, w.points);
                w.modes
                    .iter()
                    .map(|&mode| {
                        let rho = match mode {
                            WignerMode::Signal => &signal,
                            WignerMode::Idler => &idler,
                        };
                        WignerField { mode, xs: xs.clone(), ys: xs.clone(), values: wigner_grid(rho, &xs, &xs) }
                    })
                    .collect()
            })
            .unwrap_or_default();
        Snapshot {
            t,
            averaged_from,
            g3: g3(&signal).ok(),
            p_signal: photon_distribution(&signal).p,
            p_idler: photon_distribution(&idler).p,
            wigner,
        }
    };
    let mut snapshots = vec![];
    for &ts in &cfg.snapshot_times {
        if let Some(k) = times.iter().position(|t| (t - ts).abs() <= 1e-12 * cfg.t_end) {
            if k + 1 != times.len() {
                snapshots.push(snap_at(samples.signal[k].clone(), samples.idler[k].clone(), times[k], None));
            }
        }
    }
    let last = times.len() - 1;
    let final_snap = match cfg.average_from {
        Some(t0) => {
            let pick = |v: &[DensityOperator]| -> Result<DensityOperator> {
                let s: Vec<&DensityOperator> = times.iter().zip(v).filter(|(t, _)| **t >= t0).map(|(_, r)| r).collect();
                time_average(&s)
            };
            snap_at(pick(&samples.signal)?, pick(&samples.idler)?, times[last], Some(t0))
        }
        None => snap_at(samples.signal[last].clone(), samples.idler[last].clone(), times[last], None),
    };
    snapshots.push(final_snap);
    let ratio = cfg.ratio.or_else(|| params.ratio().ok());
    Ok(RunOutput {
        config: cfg.clone(),
        params,
        threshold: params.threshold().ok(),
        semiclassical: ratio.and_then(|r| semiclassical_steady(&params, r).ok()),
        truncation: trunc,
        escalations,
        method,
        leakage,
        series,
        snapshots,
    })
}

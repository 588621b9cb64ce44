use crate::io::{self, check_schema, Output, Table};
use crate::{svg, Common};
use cascade3_core::jsa::*;
use cascade3_core::qpm::{DispersionTable, DualGrid, MismatchSpec, PhaseConvention, Polarization, SpacerGrid};
use cascade3_core::{Error, Result, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Where the temporal walkoffs come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WalkoffSource {
    Direct {
        walkoffs: WalkoffSet,
    },
    Velocities {
        velocities: InverseVelocities,
        /// `(l₁, l₂, l₃)`.
        lengths: [f64; 3],
        m: usize,
        n: usize,
        tau_p: f64,
    },
    Table {
        dispersion: DispersionTable,
        request: WalkoffRequest,
        lengths: [f64; 3],
        m: usize,
        n: usize,
        tau_p: f64,
    },
    /// Solve for `l₁` and `l₃` so that the `eoo` amplitude factorizes.
    Factorizing {
        velocities: InverseVelocities,
        tau_p: f64,
        m: usize,
        n: usize,
        l2: f64,
    },
}

impl WalkoffSource {
    fn resolve(&self) -> Result<(WalkoffSet, Option<[f64; 3]>)> {
        match self {
            WalkoffSource::Direct { walkoffs } => Ok((*walkoffs, None)),
            WalkoffSource::Velocities { velocities, lengths, m, n, tau_p } => {
                positive("config.walkoffs.tau_p", *tau_p)?;
                let [a, b, c] = *lengths;
                Ok((WalkoffSet::from_inverse_velocities(velocities, (a, b, c), *m, *n, *tau_p), Some(*lengths)))
            }
            WalkoffSource::Table { dispersion, request, lengths, m, n, tau_p } => {
                dispersion.validate("config.walkoffs.dispersion")?;
                let [a, b, c] = *lengths;
                Ok((compute_walkoffs(dispersion, request, (a, b, c), *m, *n, *tau_p)?, Some(*lengths)))
            }
            WalkoffSource::Factorizing { velocities, tau_p, m, n, l2 } => {
                positive("config.walkoffs.tau_p", *tau_p)?;
                positive("config.walkoffs.l2", *l2)?;
                let (l1, l3) = factorizing_lengths(velocities, *tau_p, *m, *l2)?;
                let w = WalkoffSet::from_inverse_velocities(velocities, (l1, *l2, l3), *m, *n, *tau_p);
                Ok((w, Some([l1, *l2, l3])))
            }
        }
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, "must be finite and > 0"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacerSpec {
    pub mismatch: MismatchSpec,
    pub grid: SpacerGrid,
}

/// Layered crystal for the resonant and full routes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub dispersion: DispersionTable,
    pub primary: MismatchSpec,
    pub secondary: MismatchSpec,
    pub grid: DualGrid,
    #[serde(default)]
    pub spacer: Option<SpacerSpec>,
    #[serde(default)]
    pub convention: PhaseConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub points: usize,
    pub sigmas: f64,
    /// Explicit axis half-widths; otherwise taken from the Gaussian form.
    pub half_width: Option<[f64; 3]>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points: DEFAULT_GRID_POINTS, sigmas: DEFAULT_GRID_SIGMAS, half_width: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsaConfig {
    pub schema_version: u32,
    /// Three letters from `o`/`e`, photon 1 first, e.g. `"eoo"`.
    pub polarizations: String,
    #[serde(default = "default_route")]
    pub route: Route,
    #[serde(default)]
    pub walkoffs: Option<WalkoffSource>,
    #[serde(default)]
    pub pair_coefficient: PairCoefficient,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "all_bipartitions")]
    pub bipartitions: Vec<Bipartition>,
    #[serde(default)]
    pub lattice: Option<LatticeSpec>,
    #[serde(default)]
    pub pulse: Option<PumpPulse>,
    #[serde(default)]
    pub full: FullOptions,
    /// Write every grid amplitude (`n³` rows).
    #[serde(default = "yes")]
    pub write_grid: bool,
}

fn default_route() -> Route {
    Route::Gaussian
}
fn all_bipartitions() -> Vec<Bipartition> {
    vec![Bipartition::One, Bipartition::Two, Bipartition::Three]
}
fn yes() -> bool {
    true
}

impl Default for JsaConfig {
    fn default() -> Self {
        JsaConfig {
            schema_version: SCHEMA_VERSION,
            polarizations: "eoo".into(),
            route: Route::Gaussian,
            walkoffs: Some(WalkoffSource::Factorizing {
                velocities: InverseVelocities {
                    pump: 1.0,
                    daughter: [0.8, 1.3],
                    intermediate: 1.1,
                    spacer_intermediate: 0.7,
                    spacer_daughter: [0.95, 1.0],
                },
                tau_p: 1.0,
                m: 10,
                n: 10,
                l2: 1.0,
            }),
            pair_coefficient: PairCoefficient::Consistent,
            grid: GridSpec::default(),
            bipartitions: all_bipartitions(),
            lattice: None,
            pulse: None,
            full: FullOptions::default(),
            write_grid: true,
        }
    }
}

pub fn parse_polarizations(s: &str) -> Result<[Polarization; 3]> {
    let p: Vec<Polarization> = s
        .chars()
        .map(|c| c.to_string().parse::<Polarization>())
        .collect::<Result<_>>()
        .map_err(|_| Error::config("config.polarizations", format!("expected three of `o`/`e`, got {s:?}")))?;
    p.try_into()
        .map_err(|_| Error::config("config.polarizations", format!("expected exactly three letters, got {s:?}")))
}

fn axes_from(cfg: &JsaConfig, form: Option<&GaussianForm>) -> Result<[Vec<f64>; 3]> {
    let g = &cfg.grid;
    if g.points < 2 {
        return Err(Error::config("config.grid.points", "must be at least 2"));
    }
    match (g.half_width, form) {
        (Some(h), _) => {
            let mut out: [Vec<f64>; 3] = Default::default();
            for (k, axis) in out.iter_mut().enumerate() {
                positive(&format!("config.grid.half_width[{k}]"), h[k])?;
                *axis = (0..g.points).map(|i| -h[k] + 2.0 * h[k] * i as f64 / (g.points - 1) as f64).collect();
            }
            Ok(out)
        }
        (None, Some(f)) => default_axes(f, g.points, g.sigmas),
        (None, None) => Err(Error::config("config.grid.half_width", "needed when no walkoffs are given")),
    }
}

pub fn run(common: &Common, check_heralding: bool) -> Result<()> {
    let cfg = io::load_config::<JsaConfig>(common, "jsa")?.unwrap_or_default();
    check_schema(cfg.schema_version)?;
    let pols = parse_polarizations(&cfg.polarizations)?;
    let walk = cfg.walkoffs.as_ref().map(|w| w.resolve()).transpose()?;
    let form = walk.as_ref().map(|(w, _)| gaussian_form(w, pols, cfg.pair_coefficient));
    let axes = axes_from(&cfg, form.as_ref())?;

    let grid = match cfg.route {
        Route::Gaussian => {
            let f = form.ok_or_else(|| Error::config("config.walkoffs", "the gaussian route needs walkoffs"))?;
            JointAmplitudeGrid::build(axes, pols, cfg.route, |a, b, c| Ok(f.eval((a, b, c))))?
        }
        Route::Resonant | Route::Full => {
            let lat = cfg.lattice.as_ref().ok_or_else(|| Error::config("config.lattice", "required for this route"))?;
            let pulse = cfg.pulse.ok_or_else(|| Error::config("config.pulse", "required for this route"))?;
            pulse.validate()?;
            lat.dispersion.validate("config.lattice.dispersion")?;
            let spacer = lat.spacer.as_ref().map(|s| (&s.mismatch, s.grid.clone()));
            let couplings = LatticeCouplings::new(&lat.dispersion, &lat.primary, &lat.secondary, lat.grid.clone(), spacer, lat.convention)?;
            if cfg.route == Route::Resonant {
                JointAmplitudeGrid::build(axes, pols, cfg.route, |a, b, c| Ok(amplitude_resonant((a, b, c), &couplings, &pulse)))?
            } else {
                JointAmplitudeGrid::build(axes, pols, cfg.route, |a, b, c| amplitude_full((a, b, c), &couplings, &pulse, &cfg.full))?
            }
        }
    };
    grid.check()?;

    let mut out = Output::create(common)?;
    let mut reports = serde_json::Map::new();
    for &b in &cfg.bipartitions {
        let r = schmidt_analysis(&grid, b)?;
        let key = io::to_value(&b).as_str().unwrap_or("?").to_string();
        println!("bipartition {key}: schmidt_number {:.12} purity {:.12}", r.schmidt_number, r.purity);
        reports.insert(key, io::to_value(&r));
    }
    out.json("schmidt", &reports)?;

    let mut summary = serde_json::Map::new();
    summary.insert("schmidt".into(), json!(reports
        .iter()
        .map(|(k, v)| (k.clone(), json!({ "schmidt_number": v["schmidt_number"], "purity": v["purity"] })))
        .collect::<serde_json::Map<_, _>>()));
    if let Some((w, lengths)) = &walk {
        summary.insert("walkoffs".into(), io::to_value(w));
        if let Some(l) = lengths {
            summary.insert("lengths".into(), json!(l));
        }
        let r = heralding_residuals(w);
        if check_heralding {
            println!("r12 {:.6e}\nr13 {:.6e}\nr23 {:.6e}", r.r12, r.r13, r.r23);
        }
        summary.insert("heralding_residuals".into(), io::to_value(&r));
    } else if check_heralding {
        return Err(Error::config("config.walkoffs", "--check-heralding needs walkoffs"));
    }
    if let Some(f) = &form {
        summary.insert("gaussian_form".into(), io::to_value(f));
    }

    let [n1, n2, n3] = grid.shape();
    if cfg.write_grid {
        let mut t = Table::new(&["nu1", "nu2", "nu3", "re", "im"]);
        for i in 0..n1 {
            for j in 0..n2 {
                for k in 0..n3 {
                    let v = grid.get(i, j, k);
                    t.push(vec![grid.nu1[i], grid.nu2[j], grid.nu3[k], v.re, v.im]);
                }
            }
        }
        out.table("jsa_grid", &t)?;
    }
    if out.wants_svg() {
        // |Φ(ν₁, ν₂)| on the central ν₃ slice
        let k = n3 / 2;
        let vals: Vec<f64> = (0..n2).flat_map(|j| (0..n1).map(move |i| (i, j))).map(|(i, j)| grid.get(i, j, k).norm()).collect();
        out.text("jsa_slice.svg", &svg::heatmap("|JSA| (nu1, nu2) at central nu3", &grid.nu1, &grid.nu2, &vals))?;
    }
    out.finish("jsa", &cfg, serde_json::Value::Object(summary))
}

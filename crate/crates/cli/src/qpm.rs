use crate::io::{self, check_schema, Output, Table};
use crate::{svg, Common};
use cascade3_core::qpm::*;
use cascade3_core::{Complex64, Error, Result, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QpmConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub dispersion: DispersionTable,
    #[serde(default)]
    pub convention: PhaseConvention,
    /// Arbitrary layer stack, swept with one common mismatch.
    #[serde(default)]
    pub layers: Option<Vec<LayerSpec>>,
    #[serde(default)]
    pub grid: Option<DualGrid>,
    #[serde(default)]
    pub spacer_grid: Option<SpacerGrid>,
    /// Spacer mismatch held fixed while `Δk₂` is swept.
    #[serde(default)]
    pub delta_kappa2: f64,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub design: Option<DesignRequest>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub center: f64,
    pub half_width: f64,
}

/// Missing ranges are filled in around each structure's own QPM peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    pub points: usize,
    pub layers: Option<Range>,
    pub zeta: Option<Range>,
    pub xi: Option<Range>,
    pub xi_spacer: Option<Range>,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep { points: 401, layers: None, zeta: None, xi: None, xi_spacer: None }
    }
}

impl Default for QpmConfig {
    fn default() -> Self {
        QpmConfig {
            schema_version: SCHEMA_VERSION,
            dispersion: DispersionTable::default(),
            convention: PhaseConvention::Exact,
            layers: None,
            grid: Some(DualGrid::new(40, 2.0, 40, 1.0, 1.0)),
            spacer_grid: None,
            delta_kappa2: 0.0,
            sweep: Sweep::default(),
            design: None,
        }
    }
}

/// Eight main-lobe half-widths around `q`.
fn around(q: f64, length: f64) -> Range {
    Range { center: q, half_width: 8.0 * 2.0 * PI / length }
}

impl QpmConfig {
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        self.dispersion.validate("config.dispersion")?;
        if self.sweep.points < 2 {
            return Err(Error::config("config.sweep.points", "must be at least 2"));
        }
        if let Some(layers) = &self.layers {
            if layers.is_empty() {
                return Err(Error::config("config.layers", "layer list is empty"));
            }
            for (i, l) in layers.iter().enumerate() {
                l.validate(&format!("config.layers[{i}]"))?;
            }
        }
        if let Some(g) = &self.grid {
            g.validate("config.grid")?;
        }
        if let Some(g) = &self.spacer_grid {
            g.validate("config.spacer_grid")?;
        }
        if self.layers.is_none() && self.grid.is_none() && self.spacer_grid.is_none() && self.design.is_none() {
            return Err(Error::config("config", "nothing to do: give layers, grid, spacer_grid or design"));
        }
        for (name, r) in [("layers", &self.sweep.layers), ("zeta", &self.sweep.zeta), ("xi", &self.sweep.xi), ("xi_spacer", &self.sweep.xi_spacer)] {
            if let Some(r) = r {
                if !(r.center.is_finite() && r.half_width.is_finite() && r.half_width > 0.0) {
                    return Err(Error::config(format!("config.sweep.{name}"), "needs a finite center and half_width > 0"));
                }
            }
        }
        Ok(())
    }

    /// Fills every sweep range that applies to a configured structure.
    pub fn resolve(mut self) -> Self {
        if let Some(layers) = &self.layers {
            let nl: Vec<f64> = layers.iter().filter(|l| l.chi != 0.0).map(|l| l.length).collect();
            let mean = if nl.is_empty() { 1.0 } else { nl.iter().sum::<f64>() / nl.len() as f64 };
            let total: f64 = layers.iter().map(|l| l.length).sum();
            self.sweep.layers.get_or_insert(around(PI / mean, total));
        }
        if let Some(g) = &self.grid {
            self.sweep.zeta.get_or_insert(around(g.q1(), g.section1_length()));
            self.sweep.xi.get_or_insert(around(g.q2(), g.section2_length()));
        }
        if let Some(g) = &self.spacer_grid {
            // ΔK = 0 at Δk₂ = −l₃Δκ₂/l₂
            let c = -g.l3 * self.delta_kappa2 / g.l2;
            self.sweep.xi_spacer.get_or_insert(around(c, g.section2_length()));
        }
        self
    }
}

fn axis(r: Range, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| r.center - r.half_width + 2.0 * r.half_width * i as f64 / (n - 1) as f64)
}

fn peak(t: &Table, abs_col: usize) -> f64 {
    t.rows.iter().max_by(|a, b| a[abs_col].total_cmp(&b[abs_col])).map(|r| r[0]).unwrap_or(f64::NAN)
}

fn row(dk: f64, v: Complex64) -> Vec<f64> {
    vec![dk, v.re, v.im, v.norm()]
}

pub fn run(common: &Common) -> Result<()> {
    let cfg = io::load_config::<QpmConfig>(common, "qpm")?.unwrap_or_default();
    cfg.validate()?;
    let cfg = cfg.resolve();
    let mut out = Output::create(common)?;
    let mut summary = serde_json::Map::new();
    let n = cfg.sweep.points;

    if let (Some(layers), Some(r)) = (&cfg.layers, cfg.sweep.layers) {
        let mut t = Table::new(&["delta_k", "re", "im", "abs"]);
        for dk in axis(r, n) {
            let terms: Vec<LayerTerm> = layers.iter().map(|l| LayerTerm { length: l.length, chi: l.chi, delta_k: dk }).collect();
            t.push(row(dk, coupling_sum(&terms)));
        }
        summary.insert("layers_peak_delta_k".into(), json!(peak(&t, 3)));
        emit(&mut out, "layers_sweep", &t, "|sum| vs delta_k")?;
    }
    if let (Some(g), Some(rz), Some(rx)) = (&cfg.grid, cfg.sweep.zeta, cfg.sweep.xi) {
        let cols = ["delta_k", "re", "im", "abs", "abs_first", "abs_second"];
        let mut tz = Table::new(&cols);
        for dk in axis(rz, n) {
            let s = zeta_dualgrid(g, dk, cfg.convention);
            tz.push([row(dk, s.total()), vec![s.first.norm(), s.second.norm()]].concat());
        }
        let mut tx = Table::new(&cols);
        for dk in axis(rx, n) {
            let s = xi_dualgrid(g, dk, cfg.convention);
            tx.push([row(dk, s.total()), vec![s.first.norm(), s.second.norm()]].concat());
        }
        summary.insert("q1".into(), json!(g.q1()));
        summary.insert("q2".into(), json!(g.q2()));
        summary.insert("zeta_peak_delta_k".into(), json!(peak(&tz, 3)));
        summary.insert("xi_peak_delta_k".into(), json!(peak(&tx, 3)));
        emit(&mut out, "zeta_sweep", &tz, "|zeta| vs delta_k1")?;
        emit(&mut out, "xi_sweep", &tx, "|xi| vs delta_k2")?;
    }
    if let (Some(g), Some(r)) = (&cfg.spacer_grid, cfg.sweep.xi_spacer) {
        let mut t = Table::new(&["delta_k", "re", "im", "abs"]);
        for dk in axis(r, n) {
            t.push(row(dk, xi_linear_spacers(g, dk, cfg.delta_kappa2, cfg.convention)));
        }
        summary.insert("xi_spacer_peak_delta_k".into(), json!(peak(&t, 3)));
        emit(&mut out, "xi_spacer_sweep", &t, "|xi| vs delta_k2 (spacers)")?;
    }
    if let Some(req) = &cfg.design {
        let d = solve_qpm_design(&cfg.dispersion, req)?;
        out.json("design", &d)?;
        summary.insert("design".into(), io::to_value(&d));
    }
    out.finish("qpm", &cfg, serde_json::Value::Object(summary))
}

fn emit(out: &mut Output, stem: &str, t: &Table, title: &str) -> Result<()> {
    out.table(stem, t)?;
    if out.wants_svg() {
        let xs: Vec<f64> = t.rows.iter().map(|r| r[0]).collect();
        let ys: Vec<f64> = t.rows.iter().map(|r| r[3]).collect();
        out.text(&format!("{stem}.svg"), &svg::line_plot(title, "delta_k", "abs", &[(&xs, &ys)]))?;
    }
    Ok(())
}

use crate::io::{self, Output, Table};
use crate::{svg, Common};
use cascade3_core::opo::*;
use cascade3_core::{Error, Result};
use clap::{Args, ValueEnum};
use serde_json::json;

#[derive(Args, Debug, Clone)]
pub struct OpoArgs {
    /// fig2 | fig3 | fig4 | fig5 | fig6
    #[arg(long, env = "CASCADE3_PRESET")]
    pub preset: Option<String>,

    /// Drive as a multiple of the threshold.
    #[arg(long, env = "CASCADE3_RATIO")]
    pub ratio: Option<f64>,

    #[arg(long, env = "CASCADE3_TRAJECTORIES")]
    pub trajectories: Option<usize>,

    /// End time (in 1/γ); later snapshots are dropped.
    #[arg(long, env = "CASCADE3_TIME")]
    pub time: Option<f64>,

    /// Dense master-equation propagation instead of trajectories.
    #[arg(long, conflicts_with = "method")]
    pub oracle: bool,

    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Dense,
    Trajectories,
}

pub fn resolve(common: &Common, args: &OpoArgs) -> Result<RunConfig> {
    let from_file = io::load_config::<RunConfig>(common, "opo")?;
    let mut cfg = match (from_file, &args.preset) {
        (Some(_), Some(_)) => return Err(Error::config("--preset", "give either --preset or --config, not both")),
        (Some(c), None) => {
            let mut c = c;
            if let Some(r) = args.ratio {
                c.ratio = Some(r);
            }
            c
        }
        (None, Some(p)) => RunConfig::preset(p.parse()?, args.ratio)?,
        (None, None) => return Err(Error::config("--preset", "give --preset or --config")),
    };
    if let Some(seed) = common.seed {
        cfg.trajectory.seed = seed;
    }
    if let Some(n) = args.trajectories {
        cfg.trajectories = n;
    }
    if let Some(t) = args.time {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::config("--time", "must be finite and > 0"));
        }
        cfg.t_end = t;
        cfg.snapshot_times.retain(|&s| s < t);
        if cfg.average_from.is_some_and(|a| a >= t) {
            cfg.average_from = None;
        }
    }
    if args.oracle {
        cfg.method = Method::Dense;
    }
    if let Some(m) = args.method {
        cfg.method = match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Dense => Method::Dense,
            MethodArg::Trajectories => Method::Trajectories,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn mode_name(m: WignerMode) -> &'static str {
    match m {
        WignerMode::Signal => "signal",
        WignerMode::Idler => "idler",
    }
}

pub fn run(common: &Common, args: &OpoArgs) -> Result<()> {
    let cfg = resolve(common, args)?;
    let res = cascade3_core::opo::run(&cfg)?;
    let mut out = Output::create(common)?;

    let mut t = Table::new(&["t", "n1", "n2", "g3", "n1_stderr", "n2_stderr", "g3_stderr"]);
    for r in &res.series {
        t.push(vec![r.t, r.n1, r.n2, opt(r.g3), opt(r.n1_stderr), opt(r.n2_stderr), opt(r.g3_stderr)]);
    }
    out.table("series", &t)?;
    if out.wants_svg() {
        let ts: Vec<f64> = res.series.iter().map(|r| r.t).collect();
        let n1: Vec<f64> = res.series.iter().map(|r| r.n1).collect();
        let n2: Vec<f64> = res.series.iter().map(|r| r.n2).collect();
        let g: Vec<f64> = res.series.iter().map(|r| opt(r.g3)).collect();
        out.text("series_n.svg", &svg::line_plot("photon numbers", "t", "n1 (blue), n2 (red)", &[(&ts, &n1), (&ts, &n2)]))?;
        out.text("series_g3.svg", &svg::line_plot("g3 of the signal", "t", "g3", &[(&ts, &g)]))?;
    }

    let mut snaps = vec![];
    for (k, s) in res.snapshots.iter().enumerate() {
        let stem = format!("snap{k}");
        let len = s.p_signal.len().max(s.p_idler.len());
        let mut p = Table::new(&["n", "p_signal", "p_idler"]);
        for n in 0..len {
            p.push(vec![n as f64, s.p_signal.get(n).copied().unwrap_or(f64::NAN), s.p_idler.get(n).copied().unwrap_or(f64::NAN)]);
        }
        out.table(&format!("{stem}_pn"), &p)?;
        let mut wigner_files = vec![];
        for w in &s.wigner {
            let name = format!("{stem}_wigner_{}", mode_name(w.mode));
            let mut tw = Table::new(&["x", "y", "w"]);
            for (j, &y) in w.ys.iter().enumerate() {
                for (i, &x) in w.xs.iter().enumerate() {
                    tw.push(vec![x, y, w.values[j * w.xs.len() + i]]);
                }
            }
            out.table(&name, &tw)?;
            if out.wants_svg() {
                out.text(&format!("{name}.svg"), &svg::heatmap(&format!("W {} at t = {}", mode_name(w.mode), s.t), &w.xs, &w.ys, &w.values))?;
            }
            let min = w.values.iter().copied().fold(f64::INFINITY, f64::min);
            wigner_files.push(json!({ "mode": w.mode, "stem": name, "min": min }));
        }
        snaps.push(json!({
            "stem": stem,
            "t": s.t,
            "averaged_from": s.averaged_from,
            "g3": s.g3,
            "p0_signal": s.p_signal.first(),
            "wigner": wigner_files,
        }));
    }
    if res.leakage.max() > cfg.leakage_threshold {
        eprintln!(
            "warning: truncation leakage {:.3e} above threshold {:.1e} after {} escalations",
            res.leakage.max(),
            cfg.leakage_threshold,
            res.escalations
        );
    }
    let summary = json!({
        "params": res.params,
        "threshold": res.threshold,
        "semiclassical": res.semiclassical,
        "truncation": res.truncation,
        "escalations": res.escalations,
        "method": res.method,
        "leakage": res.leakage,
        "final_g3": res.series.last().and_then(|r| r.g3),
        "snapshots": snaps,
    });
    out.finish("opo", &cfg, summary)
}

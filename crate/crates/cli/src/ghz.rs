use crate::io::{self, check_schema, Output};
use crate::Common;
use cascade3_core::cascade::*;
use cascade3_core::{Complex64, Result, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletSpec {
    pub modes: Vec<ModeSpec>,
    pub zeta_p: f64,
    pub xi_p: f64,
    pub e0: Complex64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhzConfig {
    pub schema_version: u32,
    /// Needs `a1 (V)`, `a2 (H)`, `b1 (V)`, `b2 (H)`.
    pub modes: Vec<ModeSpec>,
    pub couplings: GhzCouplings,
    #[serde(default)]
    pub triplet: Option<TripletSpec>,
}

impl Default for GhzConfig {
    fn default() -> Self {
        let reg = ModeRegister::ghz(DEFAULT_CUTOFF).expect("static register");
        let triplet = ModeRegister::triplet(DEFAULT_CUTOFF).expect("static register");
        let e0 = Complex64::new(1.0, 0.0);
        GhzConfig {
            schema_version: SCHEMA_VERSION,
            modes: reg.modes,
            couplings: GhzCouplings::equal(0.1, 0.1, e0),
            triplet: Some(TripletSpec { modes: triplet.modes, zeta_p: 0.1, xi_p: 0.1, e0, t: 1.0 }),
        }
    }
}

pub fn run(common: &Common) -> Result<()> {
    let cfg = io::load_config::<GhzConfig>(common, "ghz")?.unwrap_or_default();
    check_schema(cfg.schema_version)?;
    let register = ModeRegister::new(cfg.modes.clone())?;
    let rep = ghz_state(&register, cfg.couplings)?;

    let mut out = Output::create(common)?;
    out.json("ghz_occupancy_state", &rep.occupancy.dump()?)?;
    out.json("ghz_split_state", &rep.split.dump()?)?;
    let mut lines = vec![
        format!("fidelity {:.12}", rep.fidelity),
        format!("occupancy_fidelity {:.12}", rep.occupancy_fidelity),
        format!("triplet_weight {:.12e}", rep.triplet_weight),
        format!("amplitude_vhh {:.12e} {:+.12e}i", rep.amplitude_vhh.re, rep.amplitude_vhh.im),
        format!("amplitude_hvv {:.12e} {:+.12e}i", rep.amplitude_hvv.re, rep.amplitude_hvv.im),
    ];
    let mut summary = json!({
        "fidelity": rep.fidelity,
        "occupancy_fidelity": rep.occupancy_fidelity,
        "triplet_weight": rep.triplet_weight,
        "amplitude_vhh": rep.amplitude_vhh,
        "amplitude_hvv": rep.amplitude_hvv,
    });
    if let Some(t) = &cfg.triplet {
        let reg = ModeRegister::new(t.modes.clone())?;
        let state = triplet_state(&reg, t.zeta_p, t.xi_p, t.e0, t.t)?;
        let amp = state.amplitude(&triplet_occupation(&reg)?)?;
        out.json("triplet_state", &state.dump()?)?;
        lines.push(format!("triplet_amplitude {:.12e} {:+.12e}i", amp.re, amp.im));
        summary["triplet_amplitude"] = json!(amp);
    }
    let report = lines.join("\n") + "\n";
    print!("{report}");
    out.text("report.txt", &report)?;
    out.finish("ghz", &cfg, summary)
}

/// `|0_b, 1, 1, 1⟩` in the register's own mode order.
fn triplet_occupation(reg: &ModeRegister) -> Result<Vec<usize>> {
    let mut occ = vec![0; reg.modes.len()];
    for l in ["a1", "a2", "a3"] {
        occ[reg.position(l)?] = 1;
    }
    reg.position("b")?;
    Ok(occ)
}

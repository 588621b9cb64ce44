use super::dispersion::{DispersionTable, MismatchSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// What the grating design has to satisfy. Mismatches are zero-order values
/// at the carriers; either give them directly or through the table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DesignRequest {
    #[serde(default)]
    pub delta_k1: Option<f64>,
    #[serde(default)]
    pub delta_k2: Option<f64>,
    /// Zero-order mismatch of the secondary process inside the spacers.
    #[serde(default)]
    pub delta_kappa2: Option<f64>,
    #[serde(default)]
    pub primary: Option<MismatchSpec>,
    #[serde(default)]
    pub secondary: Option<MismatchSpec>,
    #[serde(default)]
    pub spacer: Option<MismatchSpec>,
    /// Demand `l₂Δk₂⁽⁰⁾ + l₃Δκ₂⁽⁰⁾ = 0` with `Δκ₂⁽⁰⁾ = π/l₃`.
    #[serde(default)]
    pub spacer_compensation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpmDesign {
    pub d1: Option<f64>,
    pub l1: Option<f64>,
    pub d2: Option<f64>,
    pub l2: Option<f64>,
    pub l3: Option<f64>,
    /// `(condition, relative residual)`.
    pub residuals: Vec<(String, f64)>,
}

pub const DESIGN_TOLERANCE: f64 = 1e-12;

fn resolve(direct: Option<f64>, spec: &Option<MismatchSpec>, table: &DispersionTable) -> Result<Option<f64>> {
    match (direct, spec) {
        (Some(v), _) => Ok(Some(v)),
        (None, Some(s)) => s.zero_order(table).map(Some),
        (None, None) => Ok(None),
    }
}

/// Grating periods from the QPM conditions `Δk₁⁽⁰⁾ = q₁`, `Δk₂⁽⁰⁾ = q₂` and,
/// for spacer lattices, `l₂Δk₂⁽⁰⁾ + l₃Δκ₂⁽⁰⁾ = 0`, `Δκ₂⁽⁰⁾ = π/l₃`.
///
/// Alternating poling phase-matches `±q`, so the sign of a dual-grid
/// mismatch is free; only a vanishing mismatch is infeasible.
pub fn solve_qpm_design(table: &DispersionTable, req: &DesignRequest) -> Result<QpmDesign> {
    let dk1 = resolve(req.delta_k1, &req.primary, table)?;
    let dk2 = resolve(req.delta_k2, &req.secondary, table)?;
    let dkap = resolve(req.delta_kappa2, &req.spacer, table)?;
    let mut out = QpmDesign { d1: None, l1: None, d2: None, l2: None, l3: None, residuals: Vec::new() };

    if let Some(dk) = dk1 {
        if dk == 0.0 || !dk.is_finite() {
            return Err(Error::Infeasible {
                reason: "primary mismatch is zero or not finite; no grating period matches it".into(),
                residuals: vec![("delta_k1".into(), dk)],
            });
        }
        let d1 = 2.0 * PI / dk.abs();
        out.d1 = Some(d1);
        out.l1 = Some(d1 / 2.0);
        out.residuals.push(("q1 - |delta_k1|".into(), (2.0 * PI / d1 - dk.abs()) / dk.abs()));
    }

    if req.spacer_compensation {
        let (dk2, dkap) = match (dk2, dkap) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::config(
                    "design",
                    "spacer compensation needs both delta_k2 and delta_kappa2",
                ))
            }
        };
        if !(dkap > 0.0 && dk2 < 0.0) {
            return Err(Error::Infeasible {
                reason: "compensation needs delta_kappa2 > 0 and delta_k2 < 0 (opposite signs)".into(),
                residuals: vec![("delta_k2".into(), dk2), ("delta_kappa2".into(), dkap)],
            });
        }
        let l3 = PI / dkap;
        let l2 = -l3 * dkap / dk2;
        out.l2 = Some(l2);
        out.l3 = Some(l3);
        out.d2 = Some(l2 + l3);
        out.residuals.push(("l2*dk2 + l3*dkappa2".into(), (l2 * dk2 + l3 * dkap) / PI));
        out.residuals.push(("dkappa2 - pi/l3".into(), (dkap - PI / l3) / dkap));
    } else if let Some(dk) = dk2 {
        if dk == 0.0 || !dk.is_finite() {
            return Err(Error::Infeasible {
                reason: "secondary mismatch is zero or not finite".into(),
                residuals: vec![("delta_k2".into(), dk)],
            });
        }
        let d2 = 2.0 * PI / dk.abs();
        out.d2 = Some(d2);
        out.l2 = Some(d2 / 2.0);
        out.residuals.push(("q2 - |delta_k2|".into(), (2.0 * PI / d2 - dk.abs()) / dk.abs()));
    }

    if let Some((name, r)) = out.residuals.iter().find(|(_, r)| r.abs() > DESIGN_TOLERANCE) {
        return Err(Error::Numerical(format!("design residual `{name}` = {r:.3e} exceeds tolerance")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_grid_period() {
        let req = DesignRequest { delta_k1: Some(1e6), ..Default::default() };
        let d = solve_qpm_design(&DispersionTable::default(), &req).unwrap();
        assert_eq!(d.d1, Some(2.0 * PI / 1e6));
        assert!(d.residuals.iter().all(|(_, r)| r.abs() <= DESIGN_TOLERANCE));
    }

    #[test]
    fn spacer_conditions_hold_together() {
        let req = DesignRequest {
            delta_k2: Some(-2.5e6),
            delta_kappa2: Some(1.7e6),
            spacer_compensation: true,
            ..Default::default()
        };
        let d = solve_qpm_design(&DispersionTable::default(), &req).unwrap();
        let (l2, l3) = (d.l2.unwrap(), d.l3.unwrap());
        assert!(((l2 * -2.5e6) + PI).abs() < 1e-12);
        assert!((1.7e6 - PI / l3).abs() / 1.7e6 < 1e-12);
    }

    #[test]
    fn same_sign_is_infeasible() {
        let req = DesignRequest {
            delta_k2: Some(2.5e6),
            delta_kappa2: Some(1.7e6),
            spacer_compensation: true,
            ..Default::default()
        };
        match solve_qpm_design(&DispersionTable::default(), &req) {
            Err(Error::Infeasible { residuals, .. }) => assert_eq!(residuals.len(), 2),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}

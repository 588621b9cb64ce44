use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    O,
    E,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::O => "o",
            Polarization::E => "e",
        })
    }
}

impl std::str::FromStr for Polarization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "o" | "O" => Ok(Polarization::O),
            "e" | "E" => Ok(Polarization::E),
            other => Err(Error::config("polarization", format!("expected `o` or `e`, got `{other}`"))),
        }
    }
}

/// Taylor expansion of a wavevector about a carrier frequency:
/// `k(ω) = k0 + u⁻¹ δ + Σ c_n δ^n`, `δ = ω − ω_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionModel {
    pub carrier_frequency: f64,
    pub k0: f64,
    pub inv_group_velocity: f64,
    /// `(order, coefficient)` pairs with order ≥ 2.
    #[serde(default)]
    pub higher_terms: Vec<(u32, f64)>,
    pub polarization: Polarization,
}

impl DispersionModel {
    pub fn first_order(carrier_frequency: f64, k0: f64, inv_group_velocity: f64, polarization: Polarization) -> Self {
        DispersionModel {
            carrier_frequency,
            k0,
            inv_group_velocity,
            higher_terms: Vec::new(),
            polarization,
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.inv_group_velocity.is_finite() && self.inv_group_velocity > 0.0) {
            return Err(Error::config(
                format!("{path}.inv_group_velocity"),
                "must be finite and > 0",
            ));
        }
        if !self.carrier_frequency.is_finite() || !self.k0.is_finite() {
            return Err(Error::config(path, "carrier_frequency and k0 must be finite"));
        }
        for (i, &(order, c)) in self.higher_terms.iter().enumerate() {
            if order < 2 || !c.is_finite() {
                return Err(Error::config(
                    format!("{path}.higher_terms[{i}]"),
                    "order must be ≥ 2 and coefficient finite",
                ));
            }
        }
        Ok(())
    }

    pub fn k(&self, omega: f64) -> f64 {
        self.k_detuned(omega - self.carrier_frequency)
    }

    pub fn k_detuned(&self, delta: f64) -> f64 {
        let mut k = self.k0 + self.inv_group_velocity * delta;
        for &(order, c) in &self.higher_terms {
            k += c * delta.powi(order as i32);
        }
        k
    }
}

/// One row of a dispersion table: a model for `mode` inside `material`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionEntry {
    pub material: String,
    pub mode: String,
    #[serde(flatten)]
    pub model: DispersionModel,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DispersionTable {
    pub entries: Vec<DispersionEntry>,
}

impl DispersionTable {
    pub fn new(entries: Vec<DispersionEntry>) -> Self {
        DispersionTable { entries }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        for (i, e) in self.entries.iter().enumerate() {
            e.model.validate(&format!("{path}[{i}]"))?;
            if self.entries[..i].iter().any(|o| o.material == e.material && o.mode == e.mode) {
                return Err(Error::config(
                    format!("{path}[{i}]"),
                    format!("duplicate entry for material `{}` mode `{}`", e.material, e.mode),
                ));
            }
        }
        Ok(())
    }

    pub fn lookup(&self, material: &str, mode: &str) -> Result<&DispersionModel> {
        self.entries
            .iter()
            .find(|e| e.material == material && e.mode == mode)
            .map(|e| &e.model)
            .ok_or_else(|| {
                Error::config(
                    "dispersion",
                    format!("unknown material_id `{material}` / mode `{mode}`"),
                )
            })
    }

    pub fn has_material(&self, material: &str) -> bool {
        self.entries.iter().any(|e| e.material == material)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    /// ω₀ → ω₁ + ω₂
    Primary,
    /// ω₂ → ω₁′ + ω₁″
    Secondary,
}

/// Which dispersion rows enter a mismatch: `Δk = k_parent − k_first − k_second`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchSpec {
    pub process: Process,
    pub material: String,
    pub parent: String,
    pub first: String,
    pub second: String,
}

impl MismatchSpec {
    pub fn new(process: Process, material: &str, parent: &str, first: &str, second: &str) -> Self {
        MismatchSpec {
            process,
            material: material.into(),
            parent: parent.into(),
            first: first.into(),
            second: second.into(),
        }
    }

    /// Mismatch at the three carrier frequencies.
    pub fn zero_order(&self, table: &DispersionTable) -> Result<f64> {
        let p = table.lookup(&self.material, &self.parent)?;
        let a = table.lookup(&self.material, &self.first)?;
        let b = table.lookup(&self.material, &self.second)?;
        Ok(p.k0 - a.k0 - b.k0)
    }
}

/// `Δk₁ = k_L(ω₀) − k₁(ω₁) − k₂(ω₂)` or `Δk₂ = k₂(ω₂) − k₁(ω₁′) − k₁(ω₁″)`,
/// with `frequencies = (parent, first, second)`. Energy bookkeeping is the
/// caller's responsibility.
pub fn mismatch(spec: &MismatchSpec, table: &DispersionTable, frequencies: (f64, f64, f64)) -> Result<f64> {
    let p = table.lookup(&spec.material, &spec.parent)?;
    let a = table.lookup(&spec.material, &spec.first)?;
    let b = table.lookup(&spec.material, &spec.second)?;
    Ok(p.k(frequencies.0) - a.k(frequencies.1) - b.k(frequencies.2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn entry(mode: &str, k0: f64, u: f64, wc: f64) -> DispersionEntry {
        DispersionEntry {
            material: "ln".into(),
            mode: mode.into(),
            model: DispersionModel::first_order(wc, k0, u, Polarization::E),
        }
    }

    #[test]
    fn zero_order_arithmetic() {
        let t = DispersionTable::new(vec![entry("L", 10.0, 1.0, 0.0), entry("1", 3.0, 1.0, 0.0), entry("2", 4.0, 1.0, 0.0)]);
        let s = MismatchSpec::new(Process::Primary, "ln", "L", "1", "2");
        assert_eq!(mismatch(&s, &t, (0.0, 0.0, 0.0)).unwrap(), 3.0);
    }

    #[test]
    fn first_order_detuning() {
        let t = DispersionTable::new(vec![entry("L", 7.0, 2.0, 0.0), entry("1", 3.0, 1.0, 0.0), entry("2", 4.0, 1.0, 0.0)]);
        let s = MismatchSpec::new(Process::Primary, "ln", "L", "1", "2");
        assert_relative_eq!(mismatch(&s, &t, (1.0, 0.5, 0.5)).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn identical_models_cancel() {
        let t = DispersionTable::new(vec![entry("L", 2.0, 1.5, 1.0), entry("1", 1.0, 1.5, 1.0), entry("2", 1.0, 1.5, 1.0)]);
        let s = MismatchSpec::new(Process::Secondary, "ln", "L", "1", "2");
        assert_eq!(mismatch(&s, &t, (1.0, 1.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn higher_terms_are_exact_polynomials() {
        let mut m = DispersionModel::first_order(5.0, 1.0, 2.0, Polarization::O);
        m.higher_terms = vec![(2, 0.5), (3, -0.25)];
        let d: f64 = 1.5;
        assert_eq!(m.k(5.0 + d), 1.0 + 2.0 * d + 0.5 * d * d - 0.25 * d * d * d);
    }

    #[test]
    fn unknown_material_is_config_error() {
        let t = DispersionTable::new(vec![entry("L", 1.0, 1.0, 0.0)]);
        let s = MismatchSpec::new(Process::Primary, "glass", "L", "1", "2");
        assert!(matches!(mismatch(&s, &t, (0.0, 0.0, 0.0)), Err(Error::Config { .. })));
    }

    #[test]
    fn rejects_bad_group_velocity() {
        let m = DispersionModel::first_order(0.0, 1.0, 0.0, Polarization::O);
        assert!(m.validate("d").is_err());
    }
}

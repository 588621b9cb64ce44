use super::density::DensityOperator;
use super::lindblad::DENSE_DIM_LIMIT;
use super::model::QuantumModel;
use super::observables::{accumulate_reduced, g3, mean_number, photon_distribution};
use crate::fock::norm_sqr;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Unraveling {
    /// Quantum state diffusion: norm-preserving, complex Wiener noise per
    /// collapse channel.
    #[default]
    Diffusive,
    /// Quantum jumps: non-Hermitian evolution interrupted by collapses.
    Jump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryOptions {
    pub unraveling: Unraveling,
    /// Upper bound on the step. It is further capped at `0.05/‖G‖∞`
    /// (diffusive) or `2/‖G‖∞` (jump, inside the RK4 stability region).
    pub dt: f64,
    /// Diffusive only: a step whose squared norm moves by more than this
    /// before renormalization is split in two along a Brownian bridge.
    pub norm_tol: f64,
    /// Splitting below this step is a numerical error.
    pub min_dt: f64,
    pub seed: u64,
    /// Trajectories are grouped into this many batches; batch means give
    /// the standard errors.
    pub batches: usize,
    /// Also accumulate the full joint density matrix.
    pub keep_full: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions {
            unraveling: Unraveling::Diffusive,
            dt: 1e-3,
            norm_tol: 1e-3,
            min_dt: 1e-10,
            seed: 0,
            batches: 20,
            keep_full: false,
        }
    }
}

impl TrajectoryOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("trajectory.dt", "must be positive and finite"));
        }
        if !(self.norm_tol > 0.0) {
            return Err(Error::config("trajectory.norm_tol", "must be positive"));
        }
        if !(self.min_dt > 0.0 && self.min_dt <= self.dt) {
            return Err(Error::config("trajectory.min_dt", "must be positive and at most dt"));
        }
        if self.batches == 0 {
            return Err(Error::config("trajectory.batches", "must be at least 1"));
        }
        Ok(())
    }
}

/// Ensemble averages at each requested time.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub trajectories: usize,
    /// `reduced[t][mode]`, in register order.
    pub reduced: Vec<Vec<DensityOperator>>,
    pub full: Option<Vec<DensityOperator>>,
    /// Batch-mean standard errors of `⟨n₁⟩`, `⟨n₂⟩`, `g⁽³⁾`. `NaN` with one
    /// batch or an undefined `g⁽³⁾`.
    pub n1_stderr: Vec<f64>,
    pub n2_stderr: Vec<f64>,
    pub g3_stderr: Vec<f64>,
}

impl EnsembleResult {
    pub fn signal(&self, model: &QuantumModel, t: usize) -> &DensityOperator {
        &self.reduced[t][model.signal]
    }

    pub fn idler(&self, model: &QuantumModel, t: usize) -> &DensityOperator {
        &self.reduced[t][model.idler]
    }

    /// Mean of the reduced state of `mode` over all times `≥ t_from`.
    pub fn time_average(&self, mode: usize, t_from: f64) -> Result<DensityOperator> {
        let picked: Vec<&DensityOperator> =
            self.times.iter().zip(&self.reduced).filter(|(t, _)| **t >= t_from).map(|(_, r)| &r[mode]).collect();
        time_average(&picked)
    }
}

/// Uniform average of density matrices of equal dimension.
pub fn time_average(states: &[&DensityOperator]) -> Result<DensityOperator> {
    let first = states.first().ok_or_else(|| Error::Domain("no states to average".into()))?;
    let mut acc = DensityOperator::zeros(first.dim);
    for s in states {
        if s.dim != first.dim {
            return Err(Error::Domain("cannot average states of different dimension".into()));
        }
        for (a, b) in acc.data.iter_mut().zip(&s.data) {
            *a += b;
        }
        acc.time = s.time;
    }
    acc.scale(1.0 / states.len() as f64);
    Ok(acc)
}

/// Random stream of trajectory `index` under `seed`. Streams never overlap,
/// so any trajectory can be replayed on its own.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Accum {
    reduced: Vec<Vec<DensityOperator>>,
    full: Option<Vec<DensityOperator>>,
}

impl Accum {
    fn new(model: &QuantumModel, nt: usize, keep_full: bool) -> Self {
        let reduced = (0..nt).map(|_| model.levels().iter().map(|&m| DensityOperator::zeros(m)).collect()).collect();
        let full = keep_full.then(|| (0..nt).map(|_| DensityOperator::zeros(model.dim())).collect());
        Accum { reduced, full }
    }

    fn record(&mut self, model: &QuantumModel, k: usize, psi: &[Complex64], w: f64) {
        for (mode, acc) in self.reduced[k].iter_mut().enumerate() {
            accumulate_reduced(psi, &model.register, mode, w, acc);
        }
        if let Some(full) = &mut self.full {
            full[k].add_pure(psi, w);
        }
    }

    fn merge(&mut self, other: &Accum) {
        for (a, b) in self.reduced.iter_mut().flatten().zip(other.reduced.iter().flatten()) {
            for (x, y) in a.data.iter_mut().zip(&b.data) {
                *x += y;
            }
        }
        if let (Some(a), Some(b)) = (&mut self.full, &other.full) {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (x, y) in ra.data.iter_mut().zip(&rb.data) {
                    *x += y;
                }
            }
        }
    }
}

/// Shared per-model data for stepping.
struct Stepper<'a> {
    model: &'a QuantumModel,
    opts: TrajectoryOptions,
    dt: f64,
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn normalize(psi: &mut [Complex64]) -> f64 {
    let n2 = norm_sqr(psi);
    let s = 1.0 / n2.sqrt();
    for x in psi.iter_mut() {
        *x *= s;
    }
    n2
}

fn complex_normal<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    // E|z|² = var
    let s = (0.5 * var).sqrt();
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a * s, b * s)
}

impl<'a> Stepper<'a> {
    fn new(model: &'a QuantumModel, opts: TrajectoryOptions) -> Self {
        let g = model.generator.norm_inf();
        let c = match opts.unraveling {
            Unraveling::Diffusive => 0.05,
            Unraveling::Jump => 2.0,
        };
        let dt = if g > 0.0 { opts.dt.min(c / g) } else { opts.dt };
        Stepper { model, opts, dt }
    }

    /// QSD drift `Gψ + Σ(⟨L†⟩Lψ − ½|⟨L⟩|²ψ)`; fills `lpsi[k] = L_kψ`, `ls[k] = ⟨L_k⟩`.
    fn qsd_drift(&self, psi: &[Complex64], out: &mut [Complex64], lpsi: &mut [Vec<Complex64>], ls: &mut [Complex64]) {
        self.model.generator.apply(psi, out);
        for (k, c) in self.model.collapse.iter().enumerate() {
            c.apply(psi, &mut lpsi[k]);
            let l: Complex64 = psi.iter().zip(&lpsi[k]).map(|(a, b)| a.conj() * b).sum();
            ls[k] = l;
            axpy(out, l.conj(), &lpsi[k]);
            axpy(out, Complex64::new(-0.5 * l.norm_sqr(), 0.0), psi);
        }
    }

    /// One Heun-drift / Itô-noise step of length `h` with increments `dw`.
    fn qsd_try(&self, psi: &[Complex64], h: f64, dw: &[Complex64], ws: &mut QsdWork) -> Vec<Complex64> {
        let n = psi.len();
        self.qsd_drift(psi, &mut ws.a0, &mut ws.lpsi, &mut ws.ls);
        // noise b_k = (L_k − ⟨L_k⟩)ψ, frozen at the start of the step
        let mut noise = vec![ZERO; n];
        for (k, w) in dw.iter().enumerate() {
            axpy(&mut noise, *w, &ws.lpsi[k]);
            axpy(&mut noise, -ws.ls[k] * w, psi);
        }
        let mut pred = psi.to_vec();
        axpy(&mut pred, Complex64::new(h, 0.0), &ws.a0);
        axpy(&mut pred, Complex64::new(1.0, 0.0), &noise);
        normalize(&mut pred);
        self.qsd_drift(&pred, &mut ws.a1, &mut ws.lpsi, &mut ws.ls);
        let mut next = psi.to_vec();
        axpy(&mut next, Complex64::new(0.5 * h, 0.0), &ws.a0);
        axpy(&mut next, Complex64::new(0.5 * h, 0.0), &ws.a1);
        axpy(&mut next, Complex64::new(1.0, 0.0), &noise);
        next
    }

    fn qsd_step<R: Rng>(&self, psi: &mut Vec<Complex64>, h: f64, dw: &[Complex64], rng: &mut R, ws: &mut QsdWork) -> Result<()> {
        let mut next = self.qsd_try(psi, h, dw, ws);
        let drift = (norm_sqr(&next) - 1.0).abs();
        if drift > self.opts.norm_tol {
            let half = 0.5 * h;
            if half < self.opts.min_dt {
                return Err(Error::Numerical(format!(
                    "norm drift {drift:.3e} exceeds {:.1e} at the minimum step {:.1e}",
                    self.opts.norm_tol, self.opts.min_dt
                )));
            }
            // Brownian bridge: W(h/2) | W(h) has mean W(h)/2, variance h/4.
            let first: Vec<Complex64> = dw.iter().map(|w| 0.5 * w + complex_normal(rng, 0.5 * half)).collect();
            let second: Vec<Complex64> = dw.iter().zip(&first).map(|(w, f)| w - f).collect();
            self.qsd_step(psi, half, &first, rng, ws)?;
            return self.qsd_step(psi, half, &second, rng, ws);
        }
        normalize(&mut next);
        *psi = next;
        Ok(())
    }

    fn run_diffusive<R: Rng>(&self, psi0: &[Complex64], times: &[f64], rng: &mut R, mut record: impl FnMut(usize, &[Complex64])) -> Result<()> {
        let nc = self.model.collapse.len();
        let mut ws = QsdWork::new(psi0.len(), nc);
        let mut psi = psi0.to_vec();
        normalize(&mut psi);
        let mut t = 0.0;
        for (k, &tk) in times.iter().enumerate() {
            while tk - t > 1e-12 * tk.abs().max(1.0) {
                let h = self.dt.min(tk - t);
                let dw: Vec<Complex64> = (0..nc).map(|_| complex_normal(rng, h)).collect();
                self.qsd_step(&mut psi, h, &dw, rng, &mut ws)?;
                t += h;
            }
            t = tk;
            record(k, &psi);
        }
        Ok(())
    }

    fn rk4(&self, psi: &mut [Complex64], h: f64, ws: &mut Rk4Work) {
        let g = &self.model.generator;
        g.apply(psi, &mut ws.k1);
        ws.tmp.copy_from_slice(psi);
        axpy(&mut ws.tmp, Complex64::new(0.5 * h, 0.0), &ws.k1);
        g.apply(&ws.tmp, &mut ws.k2);
        ws.tmp.copy_from_slice(psi);
        axpy(&mut ws.tmp, Complex64::new(0.5 * h, 0.0), &ws.k2);
        g.apply(&ws.tmp, &mut ws.k3);
        ws.tmp.copy_from_slice(psi);
        axpy(&mut ws.tmp, Complex64::new(h, 0.0), &ws.k3);
        g.apply(&ws.tmp, &mut ws.k4);
        for i in 0..psi.len() {
            psi[i] += (h / 6.0) * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
        }
    }

    /// `Σ‖Lψ‖²/‖ψ‖²`.
    fn jump_rate(&self, psi: &[Complex64], scratch: &mut [Complex64]) -> f64 {
        let total: f64 = self
            .model
            .collapse
            .iter()
            .map(|c| {
                c.apply(psi, scratch);
                norm_sqr(scratch)
            })
            .sum();
        total / norm_sqr(psi)
    }

    fn jump<R: Rng>(&self, psi: &mut Vec<Complex64>, rng: &mut R, scratch: &mut [Complex64]) {
        let weights: Vec<f64> = self
            .model
            .collapse
            .iter()
            .map(|c| {
                c.apply(psi, scratch);
                norm_sqr(scratch)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return;
        }
        let mut r = rng.random::<f64>() * total;
        let mut pick = weights.len() - 1;
        for (k, w) in weights.iter().enumerate() {
            if r < *w {
                pick = k;
                break;
            }
            r -= w;
        }
        self.model.collapse[pick].apply(psi, scratch);
        psi.copy_from_slice(scratch);
        normalize(psi);
    }

    fn run_jump<R: Rng>(&self, psi0: &[Complex64], times: &[f64], rng: &mut R, mut record: impl FnMut(usize, &[Complex64])) -> Result<()> {
        let n = psi0.len();
        let mut ws = Rk4Work::new(n);
        let mut scratch = vec![ZERO; n];
        let mut psi = psi0.to_vec();
        normalize(&mut psi);
        let mut threshold: f64 = rng.random();
        let mut t = 0.0;
        for (k, &tk) in times.iter().enumerate() {
            while tk - t > 1e-12 * tk.abs().max(1.0) {
                // at most ~1/20 expected jumps per step
                let rate = self.jump_rate(&psi, &mut scratch);
                let h = if rate > 0.0 { self.dt.min(0.05 / rate) } else { self.dt }.min(tk - t);
                self.rk4(&mut psi, h, &mut ws);
                t += h;
                let n2 = norm_sqr(&psi);
                if !n2.is_finite() {
                    return Err(Error::Numerical("jump trajectory diverged; reduce dt".into()));
                }
                if n2 <= threshold {
                    self.jump(&mut psi, rng, &mut scratch);
                    threshold = rng.random();
                }
            }
            t = tk;
            let mut out = psi.clone();
            normalize(&mut out);
            record(k, &out);
        }
        Ok(())
    }

    fn run<R: Rng>(&self, psi0: &[Complex64], times: &[f64], rng: &mut R, record: impl FnMut(usize, &[Complex64])) -> Result<()> {
        match self.opts.unraveling {
            Unraveling::Diffusive => self.run_diffusive(psi0, times, rng, record),
            Unraveling::Jump => self.run_jump(psi0, times, rng, record),
        }
    }
}

struct QsdWork {
    a0: Vec<Complex64>,
    a1: Vec<Complex64>,
    lpsi: Vec<Vec<Complex64>>,
    ls: Vec<Complex64>,
}

impl QsdWork {
    fn new(n: usize, nc: usize) -> Self {
        QsdWork { a0: vec![ZERO; n], a1: vec![ZERO; n], lpsi: vec![vec![ZERO; n]; nc], ls: vec![ZERO; nc] }
    }
}

struct Rk4Work {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4Work {
    fn new(n: usize) -> Self {
        Rk4Work { k1: vec![ZERO; n], k2: vec![ZERO; n], k3: vec![ZERO; n], k4: vec![ZERO; n], tmp: vec![ZERO; n] }
    }
}

/// Runs one trajectory and returns the normalized state at every time.
pub fn single_trajectory(
    model: &QuantumModel,
    psi0: &[Complex64],
    times: &[f64],
    opts: &TrajectoryOptions,
    index: u64,
) -> Result<Vec<Vec<Complex64>>> {
    opts.validate()?;
    check_inputs(model, psi0, times)?;
    let stepper = Stepper::new(model, *opts);
    let mut rng = trajectory_rng(opts.seed, index);
    let mut out = Vec::with_capacity(times.len());
    stepper.run(psi0, times, &mut rng, |_, psi| out.push(psi.to_vec()))?;
    Ok(out)
}

fn check_inputs(model: &QuantumModel, psi0: &[Complex64], times: &[f64]) -> Result<()> {
    if psi0.len() != model.dim() {
        return Err(Error::Domain(format!("initial state has dimension {}, model {}", psi0.len(), model.dim())));
    }
    if norm_sqr(psi0) == 0.0 {
        return Err(Error::Domain("initial state is zero".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::config("times", "must be finite, non-negative and non-decreasing"));
    }
    Ok(())
}

/// Averages `n_traj` trajectories started from `psi0` at `t = 0`.
///
/// Work is split into fixed batches and summed in batch order, so results
/// are bit-identical for any thread count.
pub fn run_ensemble(
    model: &QuantumModel,
    psi0: &[Complex64],
    times: &[f64],
    n_traj: usize,
    opts: &TrajectoryOptions,
) -> Result<EnsembleResult> {
    opts.validate()?;
    check_inputs(model, psi0, times)?;
    if n_traj == 0 {
        return Err(Error::config("trajectories", "must be at least 1"));
    }
    if opts.keep_full && model.dim() > DENSE_DIM_LIMIT {
        return Err(Error::ResourceGuard(format!(
            "full density accumulation refused: dimension {} exceeds {DENSE_DIM_LIMIT}",
            model.dim()
        )));
    }
    let batches = opts.batches.min(n_traj);
    let stepper = Stepper::new(model, *opts);
    let nt = times.len();
    let bounds: Vec<(usize, usize)> =
        (0..batches).map(|b| (b * n_traj / batches, (b + 1) * n_traj / batches)).collect();
    let parts: Vec<Result<(Accum, usize)>> = bounds
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = Accum::new(model, nt, opts.keep_full);
            for index in lo..hi {
                let mut rng = trajectory_rng(opts.seed, index as u64);
                stepper.run(psi0, times, &mut rng, |k, psi| acc.record(model, k, psi, 1.0))?;
            }
            Ok((acc, hi - lo))
        })
        .collect();
    let mut total = Accum::new(model, nt, opts.keep_full);
    let mut stats: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = Vec::with_capacity(batches);
    for part in parts {
        let (acc, count) = part?;
        let w = 1.0 / count as f64;
        let mut n1 = Vec::with_capacity(nt);
        let mut n2 = Vec::with_capacity(nt);
        let mut g = Vec::with_capacity(nt);
        for k in 0..nt {
            let mut s = acc.reduced[k][model.signal].clone();
            s.scale(w);
            let mut d = acc.reduced[k][model.idler].clone();
            d.scale(w);
            n1.push(mean_number(&s));
            n2.push(mean_number(&d));
            g.push(g3(&s).unwrap_or(f64::NAN));
        }
        stats.push((n1, n2, g));
        total.merge(&acc);
    }
    let w = 1.0 / n_traj as f64;
    for r in total.reduced.iter_mut().flatten() {
        r.scale(w);
    }
    if let Some(full) = &mut total.full {
        for r in full.iter_mut() {
            r.scale(w);
        }
    }
    for (k, &tk) in times.iter().enumerate() {
        for r in total.reduced[k].iter_mut() {
            r.time = tk;
        }
        if let Some(full) = &mut total.full {
            full[k].time = tk;
        }
    }
    let stderr = |pick: fn(&(Vec<f64>, Vec<f64>, Vec<f64>)) -> &Vec<f64>, k: usize| -> f64 {
        let xs: Vec<f64> = stats.iter().map(|s| pick(s)[k]).collect();
        batch_stderr(&xs)
    };
    let n1_stderr = (0..nt).map(|k| stderr(|s| &s.0, k)).collect();
    let n2_stderr = (0..nt).map(|k| stderr(|s| &s.1, k)).collect();
    let g3_stderr = (0..nt).map(|k| stderr(|s| &s.2, k)).collect();
    Ok(EnsembleResult {
        times: times.to_vec(),
        trajectories: n_traj,
        reduced: total.reduced,
        full: total.full,
        n1_stderr,
        n2_stderr,
        g3_stderr,
    })
}

/// Standard error of the mean of batch estimates.
pub fn batch_stderr(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 || xs.iter().any(|x| !x.is_finite()) {
        return f64::NAN;
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Largest reduced-state leakage over all modes and times.
pub fn max_leakage(result: &EnsembleResult) -> f64 {
    result.reduced.iter().flatten().map(|r| photon_distribution(r).leakage).fold(0.0, f64::max)
}

/// Vacuum state vector of `model`.
pub fn vacuum(model: &QuantumModel) -> Vec<Complex64> {
    let mut v = vec![ZERO; model.dim()];
    v[model.vacuum_index()] = Complex64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opo::{build_model, lindblad_dense_propagate, dense_options, ModelKind, OpoParams, Truncation};

    fn model() -> QuantumModel {
        let p = OpoParams { e: 0.0, phi: 0.0, zeta_p: 0.2, xi_p: 0.1, gamma0: 1.0, gamma1: 1.0, gamma2: 1.0 }
            .with_ratio(1.0)
            .unwrap();
        build_model(&p, ModelKind::PumpEliminated { depletion: true }, Truncation::new(0, 6, 4)).unwrap()
    }

    fn dense(m: &QuantumModel, t: f64) -> DensityOperator {
        let rho0 = DensityOperator::basis(m.dim(), 0);
        lindblad_dense_propagate(m, &rho0, &[t], dense_options(), |_| Ok(())).unwrap()
    }

    #[test]
    fn ensembles_match_dense() {
        let m = model();
        let exact = dense(&m, 0.5);
        for unr in [Unraveling::Diffusive, Unraveling::Jump] {
            let opts = TrajectoryOptions { unraveling: unr, keep_full: true, seed: 7, dt: 2e-3, ..Default::default() };
            let res = run_ensemble(&m, &vacuum(&m), &[0.5], 400, &opts).unwrap();
            let d = res.full.as_ref().unwrap()[0].trace_distance(&exact).unwrap();
            assert!(d < 0.03, "{unr:?}: {d}");
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let m = model();
        let opts = TrajectoryOptions { seed: 3, ..Default::default() };
        let a = single_trajectory(&m, &vacuum(&m), &[0.1, 0.2], &opts, 5).unwrap();
        let b = single_trajectory(&m, &vacuum(&m), &[0.1, 0.2], &opts, 5).unwrap();
        assert_eq!(a, b);
        let c = single_trajectory(&m, &vacuum(&m), &[0.1, 0.2], &opts, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ensemble_slices_agree_with_single_runs() {
        let m = model();
        let opts = TrajectoryOptions { seed: 11, batches: 3, ..Default::default() };
        let res = run_ensemble(&m, &vacuum(&m), &[0.3], 5, &opts).unwrap();
        let mut acc = DensityOperator::zeros(m.levels()[m.signal]);
        for i in 0..5 {
            let psi = &single_trajectory(&m, &vacuum(&m), &[0.3], &opts, i).unwrap()[0];
            accumulate_reduced(psi, &m.register, m.signal, 0.2, &mut acc);
        }
        let r = res.signal(&m, 0);
        for (a, b) in acc.data.iter().zip(&r.data) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn full_accumulation_guarded() {
        let p = OpoParams { e: 1.0, phi: 0.0, zeta_p: 0.2, xi_p: 0.1, gamma0: 1.0, gamma1: 1.0, gamma2: 1.0 };
        let m = build_model(&p, ModelKind::ThreeMode, Truncation::new(15, 20, 15)).unwrap();
        let opts = TrajectoryOptions { keep_full: true, ..Default::default() };
        assert!(matches!(run_ensemble(&m, &vacuum(&m), &[0.1], 1, &opts), Err(Error::ResourceGuard(_))));
    }

    #[test]
    fn tiny_min_step_errors() {
        let m = model();
        let opts = TrajectoryOptions { norm_tol: 1e-30, min_dt: 1e-4, dt: 1e-3, ..Default::default() };
        assert!(matches!(single_trajectory(&m, &vacuum(&m), &[0.5], &opts, 0), Err(Error::Numerical(_))));
    }
}

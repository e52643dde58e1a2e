//! Time evolution and steady states of Lindblad generators.
//!
//! Propagation is exponential: a constant generator is applied exactly as
//! `exp(Δt·L)` between output samples, and a time-dependent generator is
//! integrated with a fourth-order commutator-free Magnus scheme whose step
//! size is controlled by step doubling. Each exponential is a dense Padé
//! evaluation for small spaces and a Krylov projection otherwise, so stiff
//! generators (rates spanning many orders of magnitude) cost no stability
//! restriction.

use alloc::{boxed::Box, format, string::String, vec, vec::Vec};

use crate::error::{Error, Result};
use crate::expm::{expm, matvec};
use crate::hilbert::{DensityMatrix, SpaceConfig};
use crate::krylov::{expmv, KrylovStats};
use crate::math::{powi, sqrt};
use crate::model::Liouvillian;
use crate::observables::mean_photon;
use crate::sparse::TripletBuilder;
use crate::C64;

/// Strictly increasing, finite sample times; the first entry is the initial time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidParameter { name: "time_grid", reason: "grid is empty".into() });
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter { name: "time_grid", reason: "non-finite time".into() });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter {
                name: "time_grid",
                reason: "times must be strictly increasing".into(),
            });
        }
        Ok(Self { times })
    }

    /// `points` equally spaced samples from `t0` to `t1` inclusive.
    pub fn linspace(t0: f64, t1: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter {
                name: "points",
                reason: format!("need at least 2 samples, got {points}"),
            });
        }
        let dt = (t1 - t0) / (points - 1) as f64;
        let mut times: Vec<f64> = (0..points).map(|k| t0 + dt * k as f64).collect();
        times[points - 1] = t1;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Budget of attempted Magnus steps (accepted plus rejected).
    pub max_steps: usize,
    pub krylov_dim: usize,
    /// Largest Liouville-space dimension handled with dense exponentials.
    pub dense_limit: usize,
    /// Upper bound on the Magnus step, on top of any bound the generator carries.
    pub max_step: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_steps: 200_000, krylov_dim: 30, dense_limit: 100, max_step: None }
    }
}

impl EvolveOptions {
    fn validate(&self) -> Result<()> {
        for (name, v) in [("rtol", self.rtol), ("atol", self.atol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter { name, reason: format!("tolerance must be positive, got {v}") });
            }
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::InvalidParameter { name: "max_step", reason: format!("must be positive, got {h}") });
            }
        }
        Ok(())
    }
}

/// Scalar envelope `f(t)` multiplying a delta generator.
pub type Envelope = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Addend `f(t)·ΔL` of a time-dependent generator.
pub struct GeneratorTerm {
    pub label: String,
    pub envelope: Envelope,
    pub delta: Liouvillian,
    /// Time scale the envelope varies on; the integrator never steps further.
    pub max_step: Option<f64>,
}

impl core::fmt::Debug for GeneratorTerm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("GeneratorTerm").field("label", &self.label).field("max_step", &self.max_step).finish()
    }
}

impl GeneratorTerm {
    pub fn new(
        label: impl Into<String>,
        delta: Liouvillian,
        envelope: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), envelope: Box::new(envelope), delta, max_step: None }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }
}

/// `L(t) = L₀ + Σ_k f_k(t)·ΔL_k`.
#[derive(Debug)]
pub struct TimeDependentGenerator {
    base: Liouvillian,
    terms: Vec<GeneratorTerm>,
}

impl TimeDependentGenerator {
    pub fn constant(base: Liouvillian) -> Self {
        Self { base, terms: Vec::new() }
    }

    pub fn push(&mut self, term: GeneratorTerm) -> Result<()> {
        if term.delta.dim() != self.base.dim() {
            return Err(Error::DimensionMismatch { expected: self.base.dim(), found: term.delta.dim() });
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn with_term(mut self, term: GeneratorTerm) -> Result<Self> {
        self.push(term)?;
        Ok(self)
    }

    pub fn base(&self) -> &Liouvillian {
        &self.base
    }

    pub fn terms(&self) -> &[GeneratorTerm] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn envelopes(&self, t: f64) -> Vec<f64> {
        self.terms.iter().map(|term| (term.envelope)(t)).collect()
    }

    /// The summed generator at time `t`.
    pub fn at(&self, t: f64) -> Result<Liouvillian> {
        let mut parts = vec![&self.base];
        let mut coeffs = vec![C64::new(1.0, 0.0)];
        for (term, f) in self.terms.iter().zip(self.envelopes(t)) {
            parts.push(&term.delta);
            coeffs.push(C64::new(f, 0.0));
        }
        Liouvillian::linear_combination(&parts, &coeffs)
    }

    fn max_step(&self) -> Option<f64> {
        self.terms.iter().filter_map(|t| t.max_step).reduce(f64::min)
    }
}

/// Integrator bookkeeping.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    pub steps: usize,
    pub rejected_steps: usize,
    pub krylov_substeps: usize,
    /// Largest `|Tr ρ − 1|` seen at a sample, before renormalization.
    pub max_trace_error: f64,
    /// Largest `max|ρ − ρ†|` seen at a sample.
    pub max_hermiticity_error: f64,
}

/// Sampled states; each stored state is divided by its trace.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: Diagnostics,
}

// Commutator-free Magnus, order 4: nodes c1,2 = ½ ∓ √3/6; the first applied
// exponential weights A(c1) by W_BIG and A(c2) by W_SMALL, the second the reverse.
const SQRT3: f64 = 1.732_050_807_568_877_2;
const C1: f64 = 0.5 - SQRT3 / 6.0;
const C2: f64 = 0.5 + SQRT3 / 6.0;
const W_BIG: f64 = (3.0 + 2.0 * SQRT3) / 12.0;
const W_SMALL: f64 = (3.0 - 2.0 * SQRT3) / 12.0;

enum Backend {
    Dense { n: usize, base: Vec<C64>, deltas: Vec<Vec<C64>> },
    Sparse { base_norm: f64, delta_norms: Vec<f64> },
}

fn inf_norm(l: &Liouvillian) -> f64 {
    let m = l.matrix();
    (0..m.nrows()).map(|r| m.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

struct Propagator<'a> {
    gen: &'a TimeDependentGenerator,
    backend: Backend,
    tol: f64,
    krylov_dim: usize,
    krylov: KrylovStats,
}

impl<'a> Propagator<'a> {
    fn new(gen: &'a TimeDependentGenerator, opts: &EvolveOptions) -> Self {
        let n = gen.dim() * gen.dim();
        let backend = if n <= opts.dense_limit {
            let dense = |l: &Liouvillian| l.matrix().to_dense();
            Backend::Dense { n, base: dense(&gen.base), deltas: gen.terms.iter().map(|t| dense(&t.delta)).collect() }
        } else {
            Backend::Sparse {
                base_norm: inf_norm(&gen.base),
                delta_norms: gen.terms.iter().map(|t| inf_norm(&t.delta)).collect(),
            }
        };
        // Krylov errors are absolute per call; keep them well below the step tolerance.
        Self { gen, backend, tol: opts.atol * 1e-2, krylov_dim: opts.krylov_dim, krylov: KrylovStats::default() }
    }

    /// `exp(h·(s·L₀ + Σ c_k ΔL_k)) y`.
    fn exp_apply(&mut self, h: f64, s: f64, coeffs: &[f64], y: &[C64]) -> Result<Vec<C64>> {
        match &self.backend {
            Backend::Dense { n, base, deltas } => {
                let n = *n;
                let mut a: Vec<C64> = base.iter().map(|v| v * (h * s)).collect();
                for (d, &c) in deltas.iter().zip(coeffs) {
                    if c != 0.0 {
                        for (x, v) in a.iter_mut().zip(d) {
                            *x += v * (h * c);
                        }
                    }
                }
                Ok(matvec(n, &expm(n, &a)?, y))
            }
            Backend::Sparse { base_norm, delta_norms } => {
                let gen = self.gen;
                let norm = s.abs() * base_norm + delta_norms.iter().zip(coeffs).map(|(n, c)| n * c.abs()).sum::<f64>();
                let apply = |x: &[C64], out: &mut [C64]| {
                    gen.base.matrix().mul_vec_into(x, out);
                    if s != 1.0 {
                        for o in out.iter_mut() {
                            *o *= s;
                        }
                    }
                    for (term, &c) in gen.terms.iter().zip(coeffs) {
                        if c != 0.0 {
                            term.delta.matrix().mul_vec_acc(C64::new(c, 0.0), x, out);
                        }
                    }
                };
                expmv(&apply, h, y, norm, self.tol, self.krylov_dim, &mut self.krylov)
            }
        }
    }

    fn cf4_step(&mut self, t: f64, h: f64, y: &[C64]) -> Result<Vec<C64>> {
        let f1 = self.gen.envelopes(t + C1 * h);
        let f2 = self.gen.envelopes(t + C2 * h);
        let first: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| W_BIG * a + W_SMALL * b).collect();
        let second: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| W_SMALL * a + W_BIG * b).collect();
        let mid = self.exp_apply(h, 0.5, &first, y)?;
        self.exp_apply(h, 0.5, &second, &mid)
    }
}

fn trace_of(dim: usize, v: &[C64]) -> C64 {
    (0..dim).map(|i| v[i + dim * i]).sum()
}

fn hermiticity_of(dim: usize, v: &[C64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in i..dim {
            worst = worst.max((v[i + dim * j] - v[j + dim * i].conj()).norm());
        }
    }
    worst
}

/// Propagates `rho0` over `grid`, handing each sample to `observer`
/// (index, time, trace-normalized state). Nothing is stored.
pub fn evolve_with(
    gen: &TimeDependentGenerator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &EvolveOptions,
    observer: &mut dyn FnMut(usize, f64, &DensityMatrix) -> Result<()>,
) -> Result<Diagnostics> {
    opts.validate()?;
    let dim = gen.dim();
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho0.dim() });
    }
    let times = grid.times();
    let mut diag = Diagnostics::default();
    let mut y = rho0.to_vec();
    // The state is renormalized at every sample, so `drift` measures the
    // trace error accumulated over one sample interval.
    let mut record = |k: usize, t: f64, y: &mut [C64], diag: &mut Diagnostics| -> Result<()> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: t });
        }
        let tr = trace_of(dim, y);
        let drift = (tr - C64::new(1.0, 0.0)).norm();
        diag.max_trace_error = diag.max_trace_error.max(drift);
        diag.max_hermiticity_error = diag.max_hermiticity_error.max(hermiticity_of(dim, y));
        if drift > 10.0 * opts.atol {
            return Err(Error::TraceDrift { time: t, drift });
        }
        let inv = C64::new(1.0, 0.0) / tr;
        y.iter_mut().for_each(|v| *v *= inv);
        observer(k, t, &DensityMatrix::from_vec(dim, y)?)
    };
    record(0, times[0], &mut y, &mut diag)?;

    let mut prop = Propagator::new(gen, opts);
    if gen.is_constant() {
        // Exact propagation between samples; dense propagators are reused
        // while the sample spacing stays the same.
        let mut cached: Option<(f64, Vec<C64>)> = None;
        for k in 1..times.len() {
            let dt = times[k] - times[k - 1];
            y = match &prop.backend {
                Backend::Dense { n, base, .. } => {
                    let n = *n;
                    let reuse = matches!(&cached, Some((h, _)) if (h - dt).abs() <= 1e-12 * dt);
                    if !reuse {
                        let a: Vec<C64> = base.iter().map(|v| v * dt).collect();
                        cached = Some((dt, expm(n, &a)?));
                    }
                    matvec(n, &cached.as_ref().expect("propagator cached").1, &y)
                }
                Backend::Sparse { .. } => prop.exp_apply(dt, 1.0, &[], &y)?,
            };
            diag.steps += 1;
            record(k, times[k], &mut y, &mut diag)?;
        }
        diag.krylov_substeps = prop.krylov.substeps;
        diag.rejected_steps = prop.krylov.rejections;
        return Ok(diag);
    }

    let span = times[times.len() - 1] - times[0];
    let h_cap = [opts.max_step, gen.max_step()].into_iter().flatten().fold(f64::INFINITY, f64::min);
    let mut h = h_cap.min(times[1] - times[0]).max(span * 1e-12);
    let mut t = times[0];
    for k in 1..times.len() {
        let target = times[k];
        while t < target {
            if diag.steps + diag.rejected_steps >= opts.max_steps {
                return Err(Error::NonConvergence { time: t, reason: "step budget exhausted" });
            }
            let mut h_try = h.min(h_cap);
            let clipped = t + h_try >= target - 1e-12 * span;
            if clipped {
                h_try = target - t;
            }
            let full = prop.cf4_step(t, h_try, &y)?;
            let half = prop.cf4_step(t, 0.5 * h_try, &y)?;
            let two_halves = prop.cf4_step(t + 0.5 * h_try, 0.5 * h_try, &half)?;
            let mut err: f64 = 0.0;
            for ((a, b), y0) in two_halves.iter().zip(&full).zip(&y) {
                let scale = opts.atol + opts.rtol * a.norm().max(y0.norm());
                err = err.max((a - b).norm() / (15.0 * scale));
            }
            if !err.is_finite() {
                return Err(Error::NonFinite { time: t });
            }
            let factor = if err == 0.0 { 5.0 } else { 0.9 * libm::pow(err, -0.2) };
            if err <= 1.0 {
                y = two_halves;
                t = if clipped { target } else { t + h_try };
                diag.steps += 1;
                let proposal = h_try * factor.clamp(0.2, 5.0);
                h = if clipped { h.max(proposal) } else { proposal };
            } else {
                diag.rejected_steps += 1;
                h = h_try * factor.clamp(0.1, 0.5);
                if h <= 1e-14 * span {
                    return Err(Error::NonConvergence { time: t, reason: "step size underflow" });
                }
            }
        }
        record(k, target, &mut y, &mut diag)?;
    }
    diag.krylov_substeps = prop.krylov.substeps;
    Ok(diag)
}

/// Propagates and stores every sample.
pub fn evolve(
    gen: &TimeDependentGenerator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(grid.len());
    let diagnostics = evolve_with(gen, rho0, grid, opts, &mut |_, _, rho| {
        states.push(rho.clone());
        Ok(())
    })?;
    Ok(Trajectory { grid: grid.clone(), states, diagnostics })
}

/// Stationary state of a constant generator, from the sparse system
/// `L vec(ρ) = 0` with the first diagonal equation replaced by `Tr ρ = 1`.
///
/// The constrained matrix is invertible exactly when the kernel of `L` is
/// one-dimensional. Uniqueness is checked with the same factorization: a
/// structurally singular pattern, or a condition estimate from a second
/// (pseudo-random) right-hand side near the rounding limit, is reported as
/// [`Error::MultipleSteadyStates`].
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    stationary(l, None)
}

/// Steady state of a full-model generator with multi-photon coherences
/// resolved to relative rather than absolute precision.
///
/// A plain solve fixes the mean occupations `r₁, r₂`; the system is then
/// solved again for `y = S⁻¹ vec(ρ)` with `S` diagonal,
/// `S[(i,j)] = √(wᵢ wⱼ)` and `wᵢ = r₁^{n₁} r₂^{n₂}`, so that entries of
/// the n-photon sectors are not swamped by the rounding error of the
/// vacuum sector. Correlation functions of weakly excited modes need this.
pub fn steady_state_graded(l: &Liouvillian, config: &SpaceConfig) -> Result<DensityMatrix> {
    let d = l.dim();
    if d != config.dim() {
        return Err(Error::DimensionMismatch { expected: config.dim(), found: d });
    }
    let first = stationary(l, None)?;
    let occupation = |mode| -> Result<f64> { Ok(mean_photon(&first, mode, config)?.clamp(1e-20, 1.0)) };
    let (r1, r2) = (occupation(1)?, occupation(2)?);
    let w: Vec<f64> = (0..d)
        .map(|i| {
            let (_, n1, n2) = config.decode(i);
            powi(r1, n1 as i32) * powi(r2, n2 as i32)
        })
        .collect();
    let s: Vec<f64> = (0..d * d).map(|k| sqrt(w[k % d] * w[k / d])).collect();
    stationary(l, Some(&s))
}

/// `scaling` is the diagonal of `S` in `A' = S⁻¹ A S` (all ones if absent).
fn stationary(l: &Liouvillian, scaling: Option<&[f64]>) -> Result<DensityMatrix> {
    use faer::linalg::solvers::Solve;
    let d = l.dim();
    if d == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    let n = d * d;
    let s = |k: usize| scaling.map_or(1.0, |s| s[k]);
    let scaled = match scaling {
        None => l.matrix().clone(),
        Some(sc) => {
            let mut b = TripletBuilder::with_capacity(n, n, l.matrix().nnz());
            for (r, c, v) in l.matrix().iter() {
                b.push(r, c, v * (sc[c] / sc[r]));
            }
            b.build()
        }
    };
    // The trace row is scaled to the generator so the condition estimate
    // reflects the dynamics, not the units.
    let scale = scaled.max_abs().max(f64::MIN_POSITIVE);
    let trace_row: Vec<(usize, C64)> = (0..d).map(|i| (i + d * i, C64::new(scale * s(i + d * i), 0.0))).collect();
    let a = scaled.to_faer_csc(Some((0, &trace_row)))?;
    let lu = a.sp_lu().map_err(|e| match e {
        faer::sparse::linalg::LuError::SymbolicSingular { .. } => Error::MultipleSteadyStates,
        other => Error::LinearSolve(format!("{other:?}")),
    })?;
    let apply = |x: &[C64]| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n];
        scaled.mul_vec_into(x, &mut out);
        out[0] = trace_row.iter().map(|&(c, v)| v * x[c]).sum();
        out
    };

    let mut rhs = faer::Mat::<C64>::zeros(n, 2);
    rhs[(0, 0)] = C64::new(scale, 0.0);
    let mut seed: u64 = 0x9e37_79b9_7f4a_7c15;
    for i in 0..n {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        rhs[(i, 1)] = C64::new(((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5, 0.0);
    }
    let b_norm = (0..n).map(|i| rhs[(i, 1)].norm()).fold(0.0, f64::max);
    lu.solve_in_place(rhs.as_mut());

    let a_norm = (0..n)
        .map(|r| {
            if r == 0 {
                trace_row.iter().map(|(_, v)| v.norm()).sum()
            } else {
                scaled.row(r).map(|(_, v)| v.norm()).sum::<f64>()
            }
        })
        .fold(0.0, f64::max);
    let y_norm = (0..n).map(|i| rhs[(i, 1)].norm()).fold(0.0, f64::max);
    let condition = a_norm * y_norm / b_norm;
    if !condition.is_finite() || condition > 1e13 {
        return Err(Error::MultipleSteadyStates);
    }

    // two rounds of iterative refinement against the constrained system
    let mut y: Vec<C64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    for _ in 0..2 {
        let ay = apply(&y);
        let mut r = faer::Mat::<C64>::zeros(n, 1);
        for i in 0..n {
            r[(i, 0)] = -ay[i];
        }
        r[(0, 0)] += C64::new(scale, 0.0);
        lu.solve_in_place(r.as_mut());
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += r[(i, 0)];
        }
    }

    let x: Vec<C64> = y.iter().enumerate().map(|(k, v)| v * s(k)).collect();
    let tr = trace_of(d, &x);
    if !tr.is_finite() || tr.norm() == 0.0 {
        return Err(Error::MultipleSteadyStates);
    }
    let x: Vec<C64> = x.iter().map(|v| v / tr).collect();
    let rho = DensityMatrix::from_vec(d, &x)?.hermitian_part();
    let residual = l.apply_vec(&rho.to_vec())?.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if residual > 1e-8 * l.max_abs() {
        return Err(Error::LinearSolve(format!("residual {residual:e} exceeds tolerance")));
    }
    Ok(rho)
}

/// Frobenius distance between two states, a convenience for convergence checks.
pub fn distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let d = a.matrix().try_sub(b.matrix())?;
    Ok(sqrt(d.as_slice().iter().map(|v| v.norm_sqr()).sum()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{annihilation, emitter_flip, Level, OperatorMatrix};
    use crate::model::{build_liouvillian, CollapseTerm};

    fn decay_generator(rate: f64, n_max: usize) -> Liouvillian {
        let terms = [CollapseTerm { rate, operator: annihilation(n_max) }];
        build_liouvillian(&OperatorMatrix::zeros(n_max + 1), &terms).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::linspace(0.0, 1.0, 1).is_err());
        let g = TimeGrid::linspace(0.0, 1.0, 11).unwrap();
        assert_eq!(g.times()[10], 1.0);
    }

    #[test]
    fn zero_generator_keeps_state() {
        let l = build_liouvillian(&OperatorMatrix::zeros(2), &[]).unwrap();
        let gen = TimeDependentGenerator::constant(l);
        let rho0 = DensityMatrix::basis(2, 1);
        let traj = evolve(&gen, &rho0, &TimeGrid::linspace(0.0, 5.0, 6).unwrap(), &EvolveOptions::default()).unwrap();
        assert!(traj.states.iter().all(|s| s == &rho0));
    }

    #[test]
    fn dense_and_krylov_decay_agree_with_closed_form() {
        for (n_max, dense_limit) in [(1, 100), (1, 0)] {
            let gen = TimeDependentGenerator::constant(decay_generator(2.0, n_max));
            let opts = EvolveOptions { dense_limit, ..Default::default() };
            let grid = TimeGrid::linspace(0.0, 3.0, 31).unwrap();
            let traj = evolve(&gen, &DensityMatrix::basis(2, 1), &grid, &opts).unwrap();
            for (t, s) in grid.times().iter().zip(&traj.states) {
                assert!((s.population(1) - libm::exp(-2.0 * t)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn inconsistent_dimension_is_rejected() {
        let gen = TimeDependentGenerator::constant(decay_generator(1.0, 1));
        let grid = TimeGrid::linspace(0.0, 1.0, 3).unwrap();
        assert!(matches!(
            evolve(&gen, &DensityMatrix::basis(3, 0), &grid, &EvolveOptions::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn decoupled_subsystems_have_multiple_steady_states() {
        // Two disconnected absorbing levels: any mixture is stationary.
        let terms = [CollapseTerm { rate: 1.0, operator: emitter_flip(Level::One, Level::Excited) }];
        let l = build_liouvillian(&OperatorMatrix::zeros(3), &terms).unwrap();
        assert_eq!(steady_state(&l), Err(Error::MultipleSteadyStates));
    }

    #[test]
    fn steady_state_of_decay_is_ground() {
        let rho = steady_state(&decay_generator(3.0, 3)).unwrap();
        assert!((rho.population(0) - 1.0).abs() < 1e-12);
    }
}

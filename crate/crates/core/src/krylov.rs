//! Krylov (Arnoldi) approximation of `exp(tA) v` for large sparse generators.

use alloc::{vec, vec::Vec};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::math::sqrt;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

fn norm2(v: &[C64]) -> f64 {
    sqrt(v.iter().map(|x| x.norm_sqr()).sum())
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(a, b)| a.conj() * b).sum()
}

/// Work counters reported back to the integrator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KrylovStats {
    pub substeps: usize,
    pub rejections: usize,
}

/// Computes `exp(t·A) v` where `apply(x, out)` writes `A x` to `out`.
///
/// `norm_a` is an upper bound on ‖A‖ used to pick the first substep; the
/// substep size then adapts so the Saad error estimate stays below
/// `tol·τ/t` per substep, giving an absolute error of roughly `tol` overall.
pub(crate) fn expmv(
    apply: &dyn Fn(&[C64], &mut [C64]),
    t: f64,
    v: &[C64],
    norm_a: f64,
    tol: f64,
    m_max: usize,
    stats: &mut KrylovStats,
) -> Result<Vec<C64>> {
    let n = v.len();
    let m_max = m_max.clamp(2, n.max(2));
    let mut w = v.to_vec();
    if t == 0.0 || norm2(&w) == 0.0 {
        return Ok(w);
    }
    let mut t_done = 0.0;
    let mut tau = if norm_a > 0.0 { (t).min(0.5 * m_max as f64 / norm_a) } else { t };
    let breakdown_tol = 1e-13 * norm_a.max(f64::MIN_POSITIVE);

    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m_max + 1);
    let mut scratch = vec![ZERO; n];
    while t_done < t {
        let beta = norm2(&w);
        if beta == 0.0 {
            break;
        }
        // Arnoldi with modified Gram-Schmidt.
        basis.clear();
        basis.push(w.iter().map(|x| x / beta).collect());
        let mut h = vec![ZERO; (m_max + 1) * m_max];
        let mut m = m_max;
        let mut h_next = 0.0;
        let mut happy = false;
        for j in 0..m_max {
            apply(&basis[j], &mut scratch);
            let mut p = scratch.clone();
            for (i, q) in basis.iter().enumerate() {
                let hij = dot(q, &p);
                h[i * m_max + j] = hij;
                for (pk, qk) in p.iter_mut().zip(q) {
                    *pk -= hij * qk;
                }
            }
            let hn = norm2(&p);
            if !hn.is_finite() {
                return Err(Error::NonFinite { time: t_done });
            }
            // Invariant subspace, up to a residual whose effect over the rest
            // of the interval is within tolerance.
            if hn == 0.0 || (hn <= breakdown_tol && beta * hn * (t - t_done) <= tol) {
                m = j + 1;
                happy = true;
                break;
            }
            h[(j + 1) * m_max + j] = C64::new(hn, 0.0);
            h_next = hn;
            if j + 1 < m_max {
                basis.push(p.iter().map(|x| x / hn).collect());
            }
        }

        loop {
            let step = if happy { t - t_done } else { tau.min(t - t_done) };
            // exp([[step·H, step·e1], [0, 0]]) yields exp(step·H) e1 and step·φ1(step·H) e1.
            let k = m + 1;
            let mut aug = vec![ZERO; k * k];
            for r in 0..m {
                for c in 0..m {
                    aug[r * k + c] = h[r * m_max + c] * step;
                }
            }
            aug[m] = C64::new(step, 0.0);
            let e = expm(k, &aug)?;
            let err = if happy { 0.0 } else { beta * h_next * e[(m - 1) * k + m].norm() };
            let allowed = tol * step / t;
            if err <= allowed || step <= t * 1e-14 {
                let mut next = vec![ZERO; n];
                for (j, q) in basis.iter().take(m).enumerate() {
                    let c = e[j * k] * beta;
                    for (nx, qx) in next.iter_mut().zip(q) {
                        *nx += c * qx;
                    }
                }
                w = next;
                t_done += step;
                stats.substeps += 1;
                let grow = if err > 0.0 { 0.9 * libm::pow(allowed / err, 1.0 / m as f64) } else { 4.0 };
                tau = step * grow.clamp(1.0, 4.0);
                break;
            }
            stats.rejections += 1;
            let shrink = 0.9 * libm::pow(allowed / err, 1.0 / (m as f64));
            tau = step * shrink.clamp(0.1, 0.9);
        }
        if stats.substeps > 1_000_000 {
            return Err(Error::NonConvergence { time: t_done, reason: "Krylov substep budget exhausted" });
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expm::{expm, matvec};

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    #[test]
    fn matches_dense_exponential() {
        let n = 40;
        let mut seed = 7;
        let mut a: Vec<C64> = (0..n * n).map(|_| C64::new(lcg(&mut seed), lcg(&mut seed))).collect();
        for i in 0..n {
            a[i * n + i] -= C64::new(3.0, 0.0);
        }
        let v: Vec<C64> = (0..n).map(|_| C64::new(lcg(&mut seed), 0.0)).collect();
        let t = 2.5;
        let scaled: Vec<C64> = a.iter().map(|x| x * t).collect();
        let exact = matvec(n, &expm(n, &scaled).unwrap(), &v);
        let apply = |x: &[C64], out: &mut [C64]| out.copy_from_slice(&matvec(n, &a, x));
        let norm: f64 = (0..n).map(|i| (0..n).map(|j| a[i * n + j].norm()).sum::<f64>()).fold(0.0, f64::max);
        let mut stats = KrylovStats::default();
        let approx = expmv(&apply, t, &v, norm, 1e-11, 20, &mut stats).unwrap();
        let err = exact.iter().zip(&approx).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "err = {err}");
        assert!(stats.substeps >= 1);
    }

    #[test]
    fn small_invariant_subspace_breaks_down_exactly() {
        // Diagonal generator: e0 spans an invariant subspace.
        let n = 10;
        let apply = |x: &[C64], out: &mut [C64]| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = x[i] * -(1.0 + i as f64);
            }
        };
        let mut v = vec![ZERO; n];
        v[0] = C64::new(1.0, 0.0);
        let mut stats = KrylovStats::default();
        let w = expmv(&apply, 3.0, &v, 10.0, 1e-12, 8, &mut stats).unwrap();
        assert!((w[0].re - libm::exp(-3.0)).abs() < 1e-14);
    }

    #[test]
    fn slow_leak_under_a_large_norm_is_not_dropped() {
        // e0 leaks into e1 at rate 5 while an unrelated fast decay makes
        // ‖A‖ ~ 1e14, so the Arnoldi residual looks negligible relative to ‖A‖.
        let rate = 5.0;
        let apply = |x: &[C64], out: &mut [C64]| {
            out[0] = x[0] * -rate;
            out[1] = x[0] * rate;
            out[2] = x[2] * -1e14;
        };
        let v = [C64::new(1.0, 0.0), ZERO, ZERO];
        let t = 1e-2;
        let mut stats = KrylovStats::default();
        let w = expmv(&apply, t, &v, 1e14, 1e-12, 8, &mut stats).unwrap();
        let kept = libm::exp(-rate * t);
        assert!((w[0].re - kept).abs() < 1e-12);
        assert!((w[1].re - (1.0 - kept)).abs() < 1e-12);
    }
}

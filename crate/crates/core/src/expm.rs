//! Dense complex matrix exponential (Padé 13 with scaling and squaring).
//!
//! Matrices are row-major `n×n` slices. Used directly for small generators
//! and for the Hessenberg matrices of the Krylov propagator.

use alloc::{vec, vec::Vec};

use crate::error::{Error, Result};
use crate::math::{ceil, log, powi};
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub(crate) fn matmul(n: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut c = vec![ZERO; n * n];
    for i in 0..n {
        let row = &mut c[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == ZERO {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            for (cij, bkj) in row.iter_mut().zip(brow) {
                *cij += aik * bkj;
            }
        }
    }
    c
}

pub(crate) fn matvec(n: usize, a: &[C64], x: &[C64]) -> Vec<C64> {
    (0..n).map(|i| a[i * n..(i + 1) * n].iter().zip(x).map(|(a, x)| a * x).sum()).collect()
}

fn one_norm(n: usize, a: &[C64]) -> f64 {
    (0..n).map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solves `A X = B` in place (`B` holds `n×n` right-hand sides, row-major)
/// by LU with partial pivoting.
fn solve_in_place(n: usize, mut a: Vec<C64>, b: &mut [C64]) -> Result<()> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm())).unwrap_or(col);
        let p = a[pivot * n + col];
        if p.norm() == 0.0 || !p.is_finite() {
            return Err(Error::LinearSolve(alloc::string::String::from("singular Padé denominator")));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                b.swap(pivot * n + k, col * n + k);
            }
        }
        let inv = ONE / p;
        for r in col + 1..n {
            let f = a[r * n + col] * inv;
            if f == ZERO {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[r * n + k] -= f * v;
            }
            for k in 0..n {
                let v = b[col * n + k];
                b[r * n + k] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let inv = ONE / a[col * n + col];
        for k in 0..n {
            b[col * n + k] *= inv;
        }
        for r in 0..col {
            let f = a[r * n + col];
            if f == ZERO {
                continue;
            }
            for k in 0..n {
                let v = b[col * n + k];
                b[r * n + k] -= f * v;
            }
        }
    }
    Ok(())
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// `exp(A)` for a row-major `n×n` matrix.
pub(crate) fn expm(n: usize, a: &[C64]) -> Result<Vec<C64>> {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { time: f64::NAN });
    }
    // Scaling from ‖A^k‖^{1/k} rather than ‖A‖ avoids over-squaring
    // non-normal matrices; (‖A⁴‖‖A⁶‖)^{1/10} bounds ‖A¹⁰‖^{1/10}.
    let a2 = matmul(n, a, a);
    let a4 = matmul(n, &a2, &a2);
    let a6 = matmul(n, &a4, &a2);
    let (n4, n6) = (one_norm(n, &a4), one_norm(n, &a6));
    let eta = libm::pow(n4, 0.25).max(libm::pow(n4 * n6, 0.1)).min(one_norm(n, a));
    let s = if eta > THETA13 { ceil(log(eta / THETA13) / core::f64::consts::LN_2) as i32 } else { 0 };
    let scale = |m: &[C64], k: i32| -> Vec<C64> {
        let f = powi(2.0, -s * k);
        m.iter().map(|v| v * f).collect()
    };
    let (a, a2, a4, a6) = (scale(a, 1), scale(&a2, 2), scale(&a4, 4), scale(&a6, 6));
    let b = PADE13;
    let comb = |c6: f64, c4: f64, c2: f64, c0: f64| -> Vec<C64> {
        let mut m: Vec<C64> = (0..n * n).map(|k| a6[k] * c6 + a4[k] * c4 + a2[k] * c2).collect();
        for i in 0..n {
            m[i * n + i] += c0;
        }
        m
    };
    let hi_u: Vec<C64> = (0..n * n).map(|k| a6[k] * b[13] + a4[k] * b[11] + a2[k] * b[9]).collect();
    let mut inner_u = matmul(n, &a6, &hi_u);
    let lo_u = comb(b[7], b[5], b[3], b[1]);
    for (x, y) in inner_u.iter_mut().zip(&lo_u) {
        *x += y;
    }
    let u = matmul(n, &a, &inner_u);
    let hi_v: Vec<C64> = (0..n * n).map(|k| a6[k] * b[12] + a4[k] * b[10] + a2[k] * b[8]).collect();
    let mut v = matmul(n, &a6, &hi_v);
    let lo_v = comb(b[6], b[4], b[2], b[0]);
    for (x, y) in v.iter_mut().zip(&lo_v) {
        *x += y;
    }

    let denom: Vec<C64> = v.iter().zip(&u).map(|(v, u)| v - u).collect();
    let mut r: Vec<C64> = v.iter().zip(&u).map(|(v, u)| v + u).collect();
    solve_in_place(n, denom, &mut r)?;
    for _ in 0..s {
        r = matmul(n, &r, &r);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn diagonal_matrix() {
        let a = vec![C64::new(-3.0, 1.0), ZERO, ZERO, C64::new(0.5, -2.0)];
        let e = expm(2, &a).unwrap();
        assert!(close(e[0], a[0].exp(), 1e-14));
        assert!(close(e[3], a[3].exp(), 1e-14));
        assert_eq!(e[1], ZERO);
    }

    #[test]
    fn rotation_generator_large_norm() {
        // exp(θ [[0, -1], [1, 0]]) is a rotation; θ large forces squaring.
        let theta = 40.0;
        let a = vec![ZERO, C64::new(-theta, 0.0), C64::new(theta, 0.0), ZERO];
        let e = expm(2, &a).unwrap();
        let (s, c) = (libm::sin(theta), libm::cos(theta));
        assert!(close(e[0], C64::new(c, 0.0), 1e-12));
        assert!(close(e[1], C64::new(-s, 0.0), 1e-12));
        assert!(close(e[2], C64::new(s, 0.0), 1e-12));
    }

    #[test]
    fn nilpotent_block() {
        let a = vec![ZERO, C64::new(2.0, 1.0), ZERO, ZERO];
        let e = expm(2, &a).unwrap();
        assert!(close(e[0], ONE, 1e-15) && close(e[1], a[1], 1e-15) && close(e[3], ONE, 1e-15));
    }

    #[test]
    fn stiff_decay_stays_bounded() {
        let a = vec![C64::new(-1e6, 0.0), C64::new(1e6, 0.0), ZERO, C64::new(-1.0, 0.0)];
        let e = expm(2, &a).unwrap();
        assert!(e.iter().all(|v| v.is_finite()));
        // exact (1,2) element: 1e6 (e^{-1} − e^{-1e6}) / (1e6 − 1); twenty
        // squarings cost a few digits.
        let expected = 1e6 * libm::exp(-1.0) / (1e6 - 1.0);
        assert!(close(e[1], C64::new(expected, 0.0), 1e-10), "{:?} vs {expected}", e[1]);
    }
}

//! Wigner matrices.

use super::cg::ln_factorial;
use crate::linalg::{Complex64, ComplexMatrix};

/// `d^j_{m'm}(beta)`, all spins doubled.
pub fn small_d(two_j: u32, two_mp: i32, two_m: i32, beta: f64) -> f64 {
    let j = two_j as i64;
    let (mp, m) = (two_mp as i64, two_m as i64);
    if mp.abs() > j || m.abs() > j || (j + mp) % 2 != 0 || (j + m) % 2 != 0 {
        return 0.0;
    }
    let (jpm, jmm, jpmp, jmmp) = ((j + m) / 2, (j - m) / 2, (j + mp) / 2, (j - mp) / 2);
    let diff = (m - mp) / 2;
    let lf = |n: i64| ln_factorial(n as u64);
    let ln_num = 0.5 * (lf(jpmp) + lf(jmmp) + lf(jpm) + lf(jmm));
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let mut sum = 0.0;
    for k in 0.max(diff)..=jpm.min(jmmp) {
        let ln_den = lf(jpm - k) + lf(k) + lf(jmmp - k) + lf(k - diff);
        let pc = (j - 2 * k + diff) as i32;
        let ps = (2 * k - diff) as i32;
        let term = (ln_num - ln_den).exp() * c.powi(pc) * s.powi(ps);
        sum += if (k - diff) % 2 == 0 { term } else { -term };
    }
    sum
}

/// Above this doubled spin the alternating sum cancels badly, so the matrix is
/// built as `exp(-i beta J_y)` from an eigendecomposition of `J_y`.
const SUM_FORMULA_MAX_TWO_J: u32 = 24;

pub fn small_d_matrix(two_j: u32, beta: f64) -> ComplexMatrix {
    if two_j > SUM_FORMULA_MAX_TWO_J {
        return exp_jy(two_j, beta);
    }
    let d = two_j as usize + 1;
    let ms = |k: usize| -(two_j as i32) + 2 * k as i32;
    ComplexMatrix::from_fn(d, d, |r, c| Complex64::new(small_d(two_j, ms(r), ms(c), beta), 0.0))
}

fn exp_jy(two_j: u32, beta: f64) -> ComplexMatrix {
    let j = two_j as f64 / 2.0;
    let d = two_j as usize + 1;
    let m = |k: usize| -j + k as f64;
    // J_y = (J+ - J-) / 2i, basis ascending in m.
    let mut jy = ComplexMatrix::zeros(d, d);
    for k in 0..d - 1 {
        let c = 0.5 * (j * (j + 1.0) - m(k) * (m(k) + 1.0)).sqrt();
        jy[(k + 1, k)] = Complex64::new(0.0, -c);
        jy[(k, k + 1)] = Complex64::new(0.0, c);
    }
    let (vals, vecs) = jy.eigh().expect("J_y is Hermitian");
    let phases: Vec<Complex64> = vals.iter().map(|&l| Complex64::from_polar(1.0, -beta * l)).collect();
    let out = &(&vecs * &ComplexMatrix::from_diag(&phases)) * &vecs.adjoint();
    ComplexMatrix::from_fn(d, d, |r, c| Complex64::new(out[(r, c)].re, 0.0))
}

/// `D^j_{m'm}(a,b,c) = e^{-i m' a} d^j_{m'm}(b) e^{-i m c}`.
pub fn wigner_d_matrix(two_j: u32, a: f64, b: f64, c: f64) -> ComplexMatrix {
    let d = two_j as usize + 1;
    let half = |k: usize| (-(two_j as i32) + 2 * k as i32) as f64 / 2.0;
    let small = small_d_matrix(two_j, b);
    ComplexMatrix::from_fn(d, d, |r, k| small[(r, k)] * Complex64::from_polar(1.0, -half(r) * a - half(k) * c))
}

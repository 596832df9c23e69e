//! Quadrature averages `sum_k w_k U(g_k) X U(g_k)^dagger` over token (x) system.
//!
//! `U_RS(g)` is block diagonal: one `(2 d_q) x (2 d_q)` block `U^q (x) U_S` per
//! token sector and multiplicity index. For product rules the sum is evaluated
//! factor by factor (`U = Z(a) Y(b) Z(c)` with `Z` diagonal), which is the same
//! finite sum reassociated.

use rayon::prelude::*;

use super::Codec;
use crate::error::{invalid, Result};
use crate::group::{EulerFactors, GroupElement, QuadratureRule};
use crate::linalg::{Complex64, ComplexMatrix, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    /// `U X U^dagger`.
    Forward,
    /// `U^dagger X U`.
    Inverse,
}

pub(crate) struct BlockOp {
    sets: Vec<Vec<usize>>,
    mats: Vec<ComplexMatrix>,
}

impl BlockOp {
    fn adjoint(&self) -> Self {
        Self { sets: self.sets.clone(), mats: self.mats.iter().map(ComplexMatrix::adjoint).collect() }
    }

    /// `self * x`.
    fn left_mul(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = x.cols();
        let mut out = ComplexMatrix::zeros(x.rows(), n);
        let mut buf = vec![ZERO; n];
        for (set, m) in self.sets.iter().zip(&self.mats) {
            for (a, &ra) in set.iter().enumerate() {
                buf.iter_mut().for_each(|z| *z = ZERO);
                for (b, &rb) in set.iter().enumerate() {
                    let coef = m[(a, b)];
                    if coef == ZERO {
                        continue;
                    }
                    for (o, v) in buf.iter_mut().zip(x.row(rb)) {
                        *o += coef * v;
                    }
                }
                out.data_mut()[ra * n..(ra + 1) * n].copy_from_slice(&buf);
            }
        }
        out
    }

    /// `x * self`.
    fn right_mul(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = x.cols();
        let mut out = ComplexMatrix::zeros(x.rows(), n);
        for r in 0..x.rows() {
            let row = x.row(r);
            let orow = &mut out.data_mut()[r * n..(r + 1) * n];
            for (set, m) in self.sets.iter().zip(&self.mats) {
                for (b, &cb) in set.iter().enumerate() {
                    let mut acc = ZERO;
                    for (a, &ca) in set.iter().enumerate() {
                        acc += row[ca] * m[(a, b)];
                    }
                    orow[cb] = acc;
                }
            }
        }
        out
    }

    fn sandwich(&self, x: &ComplexMatrix, dir: Direction) -> ComplexMatrix {
        match dir {
            Direction::Forward => self.right_mul_adjoint(&self.left_mul(x)),
            Direction::Inverse => {
                let adj = self.adjoint();
                adj.left_mul(&self.right_mul(x))
            }
        }
    }

    fn right_mul_adjoint(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.adjoint().right_mul(x)
    }
}

impl Codec {
    /// `U_RS(g)` from per-sector irrep matrices and the system matrix.
    pub(crate) fn block_op(&self, token_blocks: &[ComplexMatrix], us: &ComplexMatrix) -> BlockOp {
        let ds = self.system.dim();
        let mut sets = Vec::new();
        let mut mats = Vec::new();
        for (s, u) in self.token.sectors().iter().zip(token_blocks) {
            let m = u.kron(us);
            for mu in 0..s.mult {
                let set = (0..s.dim).flat_map(|k| (0..ds).map(move |x| s.index(k, mu) * ds + x)).collect();
                sets.push(set);
                mats.push(m.clone());
            }
        }
        BlockOp { sets, mats }
    }

    fn block_op_at(&self, g: &GroupElement) -> Result<BlockOp> {
        Ok(self.block_op(&self.token.irrep_blocks(g)?, &self.system.action(g)?))
    }

    /// `sum_k w_k U_RS(g_k) X U_RS(g_k)^dagger` (or the inverse sandwich).
    pub(crate) fn quadrature_average(
        &self,
        x: &ComplexMatrix,
        quad: &QuadratureRule,
        dir: Direction,
    ) -> Result<ComplexMatrix> {
        if quad.group != self.token.group() {
            return invalid("quadrature rule is for a different group");
        }
        let n = self.sectors.joint_dim;
        if x.shape() != (n, n) {
            return invalid(format!("expected a {n}x{n} operator on token (x) system"));
        }
        match &quad.factors {
            Some(f) => self.factored_average(x, f, dir),
            None => quad
                .nodes
                .par_iter()
                .zip(quad.weights.par_iter())
                .map(|(g, &w)| Ok::<_, crate::Error>(self.block_op_at(g)?.sandwich(x, dir).scale_real(w)))
                .try_reduce(|| ComplexMatrix::zeros(n, n), |a, b| Ok(&a + &b)),
        }
    }

    fn factored_average(&self, x: &ComplexMatrix, f: &EulerFactors, dir: Direction) -> Result<ComplexMatrix> {
        let (first, last) = match dir {
            Direction::Forward => (&f.c, &f.a),
            Direction::Inverse => (&f.a, &f.c),
        };
        // Forward: Z(c) X Z(c)^dagger has entries e^{-i c (M_x - M_y)} X_xy.
        let sign = if dir == Direction::Forward { -1.0 } else { 1.0 };
        let x1 = self.diagonal_average(x, first, sign);
        let n = x.rows();
        let x2 =
            f.b.par_iter()
                .map(|&(b, w)| {
                    let g = GroupElement::Euler { a: 0.0, b, c: 0.0 };
                    Ok::<_, crate::Error>(self.block_op_at(&g)?.sandwich(&x1, dir).scale_real(w))
                })
                .try_reduce(|| ComplexMatrix::zeros(n, n), |a, b| Ok(&a + &b))?;
        Ok(self.diagonal_average(&x2, last, sign))
    }

    fn diagonal_average(&self, x: &ComplexMatrix, rule: &[(f64, f64)], sign: f64) -> ComplexMatrix {
        let tm = &self.joint_two_m;
        let max = tm.iter().map(|m| m.unsigned_abs() as i64).max().unwrap_or(0);
        let span = 2 * max as usize + 1;
        let factor: Vec<Complex64> = (0..2 * span - 1)
            .map(|k| {
                let delta = k as f64 - (span - 1) as f64;
                rule.iter().map(|&(t, w)| Complex64::from_polar(w, sign * t * delta / 2.0)).sum()
            })
            .collect();
        let n = x.rows();
        ComplexMatrix::from_fn(n, n, |r, c| {
            let k = (tm[r] - tm[c]) as i64 + (span - 1) as i64;
            x[(r, c)] * factor[k as usize]
        })
    }
}

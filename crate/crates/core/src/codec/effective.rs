//! Effective system channels `R . E` and their moment-mixture fit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Codec, SystemSpec};
use crate::channel::{twirl, ChoiMatrix, KrausChannel};
use crate::error::{check_dim, invalid, Error, Result};
use crate::group::{haar_quadrature, QuadratureRule};
use crate::linalg::{Complex64, ComplexMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMethod {
    /// Sector-wise relational recovery applied to the block encoding.
    Relational,
    /// `sum_k w_k p(g_k) U_S(g_k) . U_S(g_k)^dagger` with the POVM overlap density.
    Integral,
}

impl Codec {
    /// Quadrature rule of the token's default order.
    pub fn default_quadrature(&self) -> Result<QuadratureRule> {
        haar_quadrature(self.token.group(), self.token.default_order())
    }

    /// The system-to-system channel of encoding followed by decoding.
    pub fn effective_channel(&self, method: DecodeMethod, quad: Option<&QuadratureRule>) -> Result<KrausChannel> {
        let ds = self.system.dim();
        match method {
            DecodeMethod::Relational => KrausChannel::from_linear_map(ds, ds, |x| {
                let mut out = ComplexMatrix::zeros(ds, ds);
                for s in &self.sectors.sectors {
                    out += &self.sector_recovery(s.label, &self.encode_sector(s.label, x)?)?;
                }
                Ok(out)
            }),
            DecodeMethod::Integral => {
                let owned;
                let quad = match quad {
                    Some(q) => q,
                    None => {
                        owned = self.default_quadrature()?;
                        &owned
                    }
                };
                if quad.group != self.token.group() {
                    return invalid("quadrature rule is for a different group");
                }
                let n = ds * ds;
                let choi = quad
                    .nodes
                    .par_iter()
                    .zip(quad.weights.par_iter())
                    .try_fold(
                        || ComplexMatrix::zeros(n, n),
                        |mut acc, (g, &w)| {
                            let p = self.token.overlap_density(g)?;
                            let u = self.system.action(g)?;
                            // vec index (i, a) = i * ds + a holds U[a, i].
                            let v: Vec<Complex64> = (0..n).map(|k| u[(k % ds, k / ds)]).collect();
                            acc.axpy(Complex64::new(w * p, 0.0), &ComplexMatrix::outer(&v, &v));
                            Ok::<_, Error>(acc)
                        },
                    )
                    .try_reduce(|| ComplexMatrix::zeros(n, n), |a, b| Ok(&a + &b))?;
                KrausChannel::from_choi(&ChoiMatrix { matrix: choi.hermitian_part(), in_dim: ds, out_dim: ds })
            }
        }
    }

    /// Encoding followed by the literal measure-and-reorient decoder.
    pub fn measure_reorient_channel(&self, quad: &QuadratureRule) -> Result<KrausChannel> {
        let ds = self.system.dim();
        KrausChannel::from_linear_map(ds, ds, |x| self.decode_measure_reorient(&self.encode_block(x)?.state, quad))
    }
}

/// Least-squares fit `C ~ x Choi(P) + p Choi(G . P)` with `G` the system twirl
/// and `P` an optional pre-channel (identity when absent).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentFit {
    pub p: f64,
    pub identity_weight: f64,
    pub residual: f64,
}

pub fn fit_moment_mixture(ch: &KrausChannel, system: &SystemSpec, pre: Option<&KrausChannel>) -> Result<MomentFit> {
    let ds = system.dim();
    check_dim(ds, ch.in_dim())?;
    check_dim(ds, ch.out_dim())?;
    let id = KrausChannel::identity(ds);
    let pre = pre.unwrap_or(&id);
    check_dim(ds, pre.in_dim())?;
    let g = twirl(&system.twirl_rep())?;
    let c = ch.choi().matrix;
    let c1 = pre.choi().matrix;
    let c2 = KrausChannel::compose(&g, pre)?.choi().matrix;
    let (g11, g12, g22) = (c1.hs_inner(&c1).re, c1.hs_inner(&c2).re, c2.hs_inner(&c2).re);
    let (b1, b2) = (c1.hs_inner(&c).re, c2.hs_inner(&c).re);
    let det = g11 * g22 - g12 * g12;
    if det.abs() <= 1e-12 * g11 * g22 {
        return Err(Error::Numerical("moment-mixture basis is degenerate".into()));
    }
    let x = (b1 * g22 - b2 * g12) / det;
    let p = (g11 * b2 - g12 * b1) / det;
    let mut r = c.clone();
    r.axpy(Complex64::new(-x, 0.0), &c1);
    r.axpy(Complex64::new(-p, 0.0), &c2);
    Ok(MomentFit { p, identity_weight: x, residual: r.frobenius_norm() })
}

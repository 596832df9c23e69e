//! Decomposition of token (x) system into total-irrep sectors.
//!
//! Each sector `q` gets an isometry `B_q` whose column `M * rel_dim + r` is the
//! coupled vector `|q, M> (x) |r>`, with `r` running over the relational basis
//! (token irrep, token multiplicity index, system irrep).

use super::SystemSpec;
use crate::error::{Error, Result};
use crate::group::{clebsch_gordan, couple_labels, coupling_coefficient, IrrepLabel};
use crate::linalg::{Complex64, ComplexMatrix, DEFAULT_TOL};
use crate::token::{TokenKind, TokenSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelIndex {
    pub token: IrrepLabel,
    pub mu: usize,
    pub system: IrrepLabel,
}

#[derive(Clone, Debug)]
pub struct Sector {
    pub label: IrrepLabel,
    /// `d_q`.
    pub dim: usize,
    pub rel: Vec<RelIndex>,
    /// `dim_RS x (dim * rel_dim)`.
    pub isometry: ComplexMatrix,
    /// `A^dagger : K (x) H_S -> N_q`, `rel_dim x (dim * dim_S)`; regular tokens only.
    pub intertwiner_adjoint: Option<ComplexMatrix>,
    /// `A A^dagger = I`: the sector carries the system without loss.
    pub ok: bool,
}

impl Sector {
    pub fn rel_dim(&self) -> usize {
        self.rel.len()
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.isometry * &self.isometry.adjoint()
    }
}

#[derive(Clone, Debug)]
pub struct SectorMap {
    pub sectors: Vec<Sector>,
    pub joint_dim: usize,
}

impl SectorMap {
    pub fn build(token: &TokenSpec, system: &SystemSpec) -> Result<Self> {
        let ds = system.dim();
        let joint_dim = token.dimension() * ds;
        let sys_irreps = system.irreps();
        let mut labels = Vec::new();
        for ts in token.sectors() {
            for (sl, _) in &sys_irreps {
                labels.extend(couple_labels(ts.label, *sl)?);
            }
        }
        labels.sort();
        labels.dedup();

        let mut sectors = Vec::with_capacity(labels.len());
        for q in labels {
            let mut rel = Vec::new();
            for ts in token.sectors() {
                for mu in 0..ts.mult {
                    for (sl, _) in &sys_irreps {
                        if couple_labels(ts.label, *sl)?.contains(&q) {
                            rel.push(RelIndex { token: ts.label, mu, system: *sl });
                        }
                    }
                }
            }
            let d = q.dim();
            let mut iso = ComplexMatrix::zeros(joint_dim, d * rel.len());
            for (mi, &two_mq) in q.two_m_values().iter().enumerate() {
                for (r, ri) in rel.iter().enumerate() {
                    let ts = token.sector(ri.token).expect("relational index from token");
                    let s_off =
                        sys_irreps.iter().find(|(l, _)| *l == ri.system).map(|(_, o)| *o).expect("system irrep");
                    for (tm, &two_mt) in ri.token.two_m_values().iter().enumerate() {
                        for (sm, &two_ms) in ri.system.two_m_values().iter().enumerate() {
                            let c = coupling_coefficient(ri.token, two_mt, ri.system, two_ms, q, two_mq);
                            if c != 0.0 {
                                let row = ts.index(tm, ri.mu) * ds + s_off + sm;
                                iso[(row, mi * rel.len() + r)] = Complex64::new(c, 0.0);
                            }
                        }
                    }
                }
            }
            let a_dag = match token.kind() {
                TokenKind::Regular => Some(intertwiner_adjoint(q, &rel, system)?),
                TokenKind::Coherent => None,
            };
            let ok = match &a_dag {
                Some(a) => {
                    let aad = &a.adjoint() * a;
                    aad.approx_eq(&ComplexMatrix::identity(aad.rows()), DEFAULT_TOL)
                }
                None => false,
            };
            sectors.push(Sector { label: q, dim: d, rel, isometry: iso, intertwiner_adjoint: a_dag, ok });
        }
        Ok(Self { sectors, joint_dim })
    }

    pub fn get(&self, label: IrrepLabel) -> Option<&Sector> {
        self.sectors.iter().find(|s| s.label == label)
    }
}

/// Closed-form intertwiner for regular tokens.
///
/// SU(2), spin-1/2 system: `A^dagger[(j,mu), (M,s)] = (-1)^{s+1/2} <J,-M; 1/2,s | j,-mu>`.
/// U(1): `A^dagger (|0> (x) |s>) = |N - n_s, s>` when the token holds charge `N - n_s`.
fn intertwiner_adjoint(q: IrrepLabel, rel: &[RelIndex], system: &SystemSpec) -> Result<ComplexMatrix> {
    let d = q.dim();
    let ds = system.dim();
    let mut a = ComplexMatrix::zeros(rel.len(), d * ds);
    match q {
        IrrepLabel::Charge(_) => {
            for (s, (sl, _)) in system.basis().iter().enumerate() {
                if let Some(r) = rel.iter().position(|ri| ri.system == *sl) {
                    a[(r, s)] = Complex64::new(1.0, 0.0);
                }
            }
        }
        IrrepLabel::Spin { two_j: big_j } => {
            if system.irreps() != vec![(IrrepLabel::spin(1), 0)] {
                return Err(Error::Unsupported("SU(2) intertwiner needs a spin-1/2 system".into()));
            }
            for (r, ri) in rel.iter().enumerate() {
                let IrrepLabel::Spin { two_j } = ri.token else { unreachable!() };
                let two_mu = -(two_j as i32) + 2 * ri.mu as i32;
                for (mi, &two_m) in q.two_m_values().iter().enumerate() {
                    for (s, &two_s) in [-1i32, 1].iter().enumerate() {
                        let cg = clebsch_gordan(big_j, -two_m, 1, two_s, two_j, -two_mu);
                        if cg != 0.0 {
                            let sign = if two_s == 1 { -1.0 } else { 1.0 };
                            a[(r, mi * ds + s)] = Complex64::new(sign * cg, 0.0);
                        }
                    }
                }
            }
        }
    }
    let check = &a * &a.adjoint();
    if !check.approx_eq(&ComplexMatrix::identity(rel.len()), 1e-10) {
        return Err(Error::Numerical(format!("intertwiner for sector {q} is not a co-isometry")));
    }
    Ok(a)
}

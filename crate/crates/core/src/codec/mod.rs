//! Encoding a qubit relative to a token, and the two ways back.
//!
//! Encoding is `E(rho) = G(|e><e| (x) rho)`, stored sector by sector as
//! `E(rho) = (+)_q (I_{d_q}/d_q) (x) E^(q)(rho)`. Decoding either measures the
//! token with the covariant POVM and re-orients the system, or applies the
//! relational recovery `R^(q)(Z) = Tr_K[A Z A^dagger]` in each sector.

mod effective;
mod sectors;
mod twirl;

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use effective::{fit_moment_mixture, DecodeMethod, MomentFit};
pub use sectors::{RelIndex, Sector, SectorMap};
use twirl::Direction;

use crate::channel::{DensityOperator, KrausChannel, TpClass};
use crate::error::{check_dim, invalid, Error, Result};
use crate::group::{irrep_matrix, GroupElement, GroupId, IrrepLabel, QuadratureRule};
use crate::linalg::{Complex64, ComplexMatrix, Dims};
use crate::token::{TokenKind, TokenSpec};

/// The encoded qubit: basis entries `(irrep, two_m)` in index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSpec {
    group: GroupId,
    basis: Vec<(IrrepLabel, i32)>,
}

impl SystemSpec {
    /// Spin-1/2 with basis `(m = -1/2, m = +1/2)`.
    pub fn spin_half() -> Self {
        let l = IrrepLabel::spin(1);
        Self { group: GroupId::SU2, basis: vec![(l, -1), (l, 1)] }
    }

    /// U(1) qubit carrying charges 0 and 1.
    pub fn u1_qubit() -> Self {
        Self::u1(0, 1).expect("distinct charges")
    }

    pub fn u1(n0: i32, n1: i32) -> Result<Self> {
        if n0 == n1 {
            return invalid("U(1) qubit needs two distinct charges");
        }
        Ok(Self { group: GroupId::U1, basis: vec![(IrrepLabel::Charge(n0), 0), (IrrepLabel::Charge(n1), 0)] })
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[(IrrepLabel, i32)] {
        &self.basis
    }

    /// Irreps with the index of their first basis vector.
    pub fn irreps(&self) -> Vec<(IrrepLabel, usize)> {
        let mut out: Vec<(IrrepLabel, usize)> = Vec::new();
        for (k, (l, _)) in self.basis.iter().enumerate() {
            if out.last().is_none_or(|(p, _)| p != l) {
                out.push((*l, k));
            }
        }
        out
    }

    /// Representation for the group twirl on the system.
    pub fn twirl_rep(&self) -> Vec<(IrrepLabel, usize)> {
        self.irreps().into_iter().map(|(l, _)| (l, 1)).collect()
    }

    /// `U_S(g)`.
    pub fn action(&self, g: &GroupElement) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
        for (l, off) in self.irreps() {
            out.set_block(off, off, &irrep_matrix(l, g)?);
        }
        Ok(out)
    }

    fn two_m(&self, k: usize) -> i32 {
        match self.basis[k] {
            (IrrepLabel::Charge(n), _) => 2 * n,
            (IrrepLabel::Spin { .. }, m) => m,
        }
    }
}

/// Token, system, fiducial state and sector decomposition; immutable once built.
#[derive(Clone, Debug)]
pub struct Codec {
    token: TokenSpec,
    system: SystemSpec,
    fiducial: Vec<Complex64>,
    sectors: SectorMap,
    /// `|e> (x) I_S`, `dim_RS x dim_S`.
    embed: ComplexMatrix,
    /// `B_q^dagger (|e> (x) I_S)` per sector.
    encoders: Vec<ComplexMatrix>,
    /// Doubled total `J_z` eigenvalue (twice the charge for U(1)) per joint basis vector.
    joint_two_m: Vec<i32>,
}

/// `E(rho)` as sector blocks `E^(q)(rho)` plus the assembled joint operator.
#[derive(Clone, Debug)]
pub struct BlockEncoding {
    pub blocks: Vec<(IrrepLabel, ComplexMatrix)>,
    pub state: ComplexMatrix,
}

#[derive(Clone, Debug)]
pub struct PostselectionOutcome {
    pub label: IrrepLabel,
    pub probability: f64,
    pub perfect: bool,
    pub state: DensityOperator,
}

impl Codec {
    pub fn new(token: TokenSpec, system: SystemSpec) -> Result<Self> {
        if token.group() != system.group() {
            return invalid("token and system use different groups");
        }
        let sectors = SectorMap::build(&token, &system)?;
        let fiducial = token.fiducial_state().vec;
        let ds = system.dim();
        let n = sectors.joint_dim;
        let embed =
            ComplexMatrix::from_fn(n, ds, |r, c| if r % ds == c { fiducial[r / ds] } else { Complex64::new(0.0, 0.0) });
        let encoders = sectors.sectors.iter().map(|s| &s.isometry.adjoint() * &embed).collect();
        let mut token_two_m = vec![0; token.dimension()];
        for s in token.sectors() {
            let ms = match s.label {
                IrrepLabel::Charge(n) => vec![2 * n],
                l => l.two_m_values(),
            };
            for (k, &m) in ms.iter().enumerate() {
                for mu in 0..s.mult {
                    token_two_m[s.index(k, mu)] = m;
                }
            }
        }
        let joint_two_m = (0..n).map(|x| token_two_m[x / ds] + system.two_m(x % ds)).collect();
        Ok(Self { token, system, fiducial, sectors, embed, encoders, joint_two_m })
    }

    pub fn token(&self) -> &TokenSpec {
        &self.token
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn sectors(&self) -> &SectorMap {
        &self.sectors
    }

    pub fn fiducial(&self) -> &[Complex64] {
        &self.fiducial
    }

    pub fn joint_dim(&self) -> usize {
        self.sectors.joint_dim
    }

    fn d_r(&self) -> f64 {
        self.token.dimension() as f64
    }

    fn check_system_op(&self, x: &ComplexMatrix) -> Result<()> {
        check_dim(self.system.dim(), x.rows())?;
        check_dim(self.system.dim(), x.cols())
    }

    fn check_joint_op(&self, x: &ComplexMatrix) -> Result<()> {
        check_dim(self.joint_dim(), x.rows())?;
        check_dim(self.joint_dim(), x.cols())
    }

    fn sector_index(&self, label: IrrepLabel) -> Result<usize> {
        self.sectors
            .sectors
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::InvalidArgument(format!("no sector {label}")))
    }

    /// `E^(q)(x) = Tr_M[Y_q x Y_q^dagger]`.
    pub fn encode_sector(&self, label: IrrepLabel, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_system_op(x)?;
        let k = self.sector_index(label)?;
        let s = &self.sectors.sectors[k];
        let y = &self.encoders[k];
        (&(y * x) * &y.adjoint()).partial_trace(&Dims::new(vec![s.dim, s.rel_dim()])?, 1)
    }

    /// Block-structured encoding; linear in `x`, so it accepts any system operator.
    pub fn encode_block(&self, x: &ComplexMatrix) -> Result<BlockEncoding> {
        self.check_system_op(x)?;
        let n = self.joint_dim();
        let mut state = ComplexMatrix::zeros(n, n);
        let mut blocks = Vec::with_capacity(self.sectors.sectors.len());
        for s in &self.sectors.sectors {
            let e = self.encode_sector(s.label, x)?;
            let inner = ComplexMatrix::identity(s.dim).scale_real(1.0 / s.dim as f64).kron(&e);
            state += &s.isometry.sandwich(&inner);
            blocks.push((s.label, e));
        }
        Ok(BlockEncoding { blocks, state })
    }

    /// `sum_k w_k |g_k><g_k| (x) U_S(g_k) x U_S(g_k)^dagger`.
    pub fn encode_integral(&self, x: &ComplexMatrix, quad: &QuadratureRule) -> Result<ComplexMatrix> {
        self.check_system_op(x)?;
        let start = self.embed.sandwich(x);
        self.quadrature_average(&start, quad, Direction::Forward)
    }

    /// `Tr E^(q)(rho)` for every sector.
    pub fn irrep_probabilities(&self, x: &ComplexMatrix) -> Result<BTreeMap<IrrepLabel, f64>> {
        self.sectors.sectors.iter().map(|s| Ok((s.label, self.encode_sector(s.label, x)?.trace().re))).collect()
    }

    /// `Z_q = Tr_M[B_q^dagger X B_q]`.
    pub fn sector_component(&self, label: IrrepLabel, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_joint_op(x)?;
        let s = &self.sectors.sectors[self.sector_index(label)?];
        let inner = &(&s.isometry.adjoint() * x) * &s.isometry;
        inner.partial_trace(&Dims::new(vec![s.dim, s.rel_dim()])?, 1)
    }

    /// `R^(q)(Z)`: through the intertwiner when the token has one, otherwise
    /// through `(D_R/d_q) E^(q)^dagger`.
    pub fn sector_recovery(&self, label: IrrepLabel, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        let s = &self.sectors.sectors[self.sector_index(label)?];
        match &s.intertwiner_adjoint {
            Some(_) => self.recover_via_intertwiner(label, z),
            None => self.recover_via_adjoint(label, z),
        }
    }

    /// `Tr_K[A Z A^dagger]`.
    pub fn recover_via_intertwiner(&self, label: IrrepLabel, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        let s = &self.sectors.sectors[self.sector_index(label)?];
        let Some(a_dag) = &s.intertwiner_adjoint else {
            return Err(Error::Unsupported("coherent tokens have no intertwiner".into()));
        };
        check_dim(s.rel_dim(), z.rows())?;
        let a = a_dag.adjoint();
        (&(&a * z) * a_dag).partial_trace(&Dims::new(vec![s.dim, self.system.dim()])?, 1)
    }

    /// `(D_R/d_q) Y_q^dagger (I_{d_q} (x) Z) Y_q`.
    pub fn recover_via_adjoint(&self, label: IrrepLabel, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        let k = self.sector_index(label)?;
        let s = &self.sectors.sectors[k];
        check_dim(s.rel_dim(), z.rows())?;
        let y = &self.encoders[k];
        let lifted = ComplexMatrix::identity(s.dim).kron(z);
        Ok((&(&y.adjoint() * &lifted) * y).scale_real(self.d_r() / s.dim as f64))
    }

    /// Relational decoding `sum_q R^(q)(Tr_M[B_q^dagger X B_q])`.
    pub fn decode_relational(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_joint_op(x)?;
        let mut out = ComplexMatrix::zeros(self.system.dim(), self.system.dim());
        for s in &self.sectors.sectors {
            let z = self.sector_component(s.label, x)?;
            out += &self.sector_recovery(s.label, &z)?;
        }
        Ok(out)
    }

    /// Measure-and-reorient decoding
    /// `D_R sum_k w_k (<g_k| (x) U_S(g_k)^dagger) X (|g_k> (x) U_S(g_k))`.
    /// Since `|g> (x) U_S(g) = U_RS(g) (|e> (x) I)`, the node sum is
    /// `D_R J^dagger [sum_k w_k U_RS^dagger X U_RS] J`.
    pub fn decode_measure_reorient(&self, x: &ComplexMatrix, quad: &QuadratureRule) -> Result<ComplexMatrix> {
        self.check_joint_op(x)?;
        let avg = self.quadrature_average(x, quad, Direction::Inverse)?;
        Ok((&(&self.embed.adjoint() * &avg) * &self.embed).scale_real(self.d_r()))
    }

    /// The same decoder evaluated node by node from `|g_k>` and `U_S(g_k)`.
    pub fn decode_measure_reorient_nodewise(&self, x: &ComplexMatrix, quad: &QuadratureRule) -> Result<ComplexMatrix> {
        self.check_joint_op(x)?;
        if quad.group != self.token.group() {
            return invalid("quadrature rule is for a different group");
        }
        let ds = self.system.dim();
        let d_r = self.d_r();
        quad.nodes
            .par_iter()
            .zip(quad.weights.par_iter())
            .map(|(g, &w)| {
                let v = self.token.orbit_state(g)?;
                let us = self.system.action(g)?;
                let k = ComplexMatrix::from_fn(self.joint_dim(), ds, |r, c| v[r / ds] * us[(r % ds, c)]);
                Ok((&(&k.adjoint() * x) * &k).scale_real(w * d_r))
            })
            .try_reduce(|| ComplexMatrix::zeros(ds, ds), |a, b| Ok(&a + &b))
    }

    /// Every outcome `q` with non-negligible probability, its recovered state,
    /// and whether the sector carries the system perfectly.
    pub fn postselection_outcomes(&self, x: &ComplexMatrix) -> Result<Vec<PostselectionOutcome>> {
        self.check_joint_op(x)?;
        let mut out = Vec::new();
        for s in &self.sectors.sectors {
            let z = self.sector_component(s.label, x)?;
            let p = z.trace().re;
            if p <= 1e-14 {
                continue;
            }
            let rec = self.sector_recovery(s.label, &z)?.scale_real(1.0 / p);
            let state = DensityOperator::new(rec.hermitian_part())?;
            out.push(PostselectionOutcome { label: s.label, probability: p, perfect: s.ok, state });
        }
        Ok(out)
    }

    /// One seeded draw of the post-selected decoder.
    pub fn decode_postselect(&self, x: &ComplexMatrix, seed: u64) -> Result<PostselectionOutcome> {
        let outcomes = self.postselection_outcomes(x)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(outcomes[sample_outcome(&outcomes, &mut rng)?].clone())
    }

    /// `sum_{ok q} d_q^2 / D_R`: success probability of perfect decoding.
    pub fn p_perfect(&self) -> f64 {
        match self.token.kind() {
            TokenKind::Regular => {
                self.sectors.sectors.iter().filter(|s| s.ok).map(|s| (s.dim * s.dim) as f64).sum::<f64>() / self.d_r()
            }
            TokenKind::Coherent => 0.0,
        }
    }

    /// Kraus form of `E`: `K_{q,m,mu} = D_R^{-1/2} B_q (|m> (x) A^dagger (|mu> (x) .))`.
    pub fn encoding_channel(&self) -> Result<KrausChannel> {
        let ds = self.system.dim();
        let n = self.joint_dim();
        if self.token.kind() == TokenKind::Coherent {
            return KrausChannel::from_linear_map(ds, n, |x| Ok(self.encode_block(x)?.state));
        }
        let scale = 1.0 / self.d_r().sqrt();
        let mut kraus = Vec::new();
        for s in &self.sectors.sectors {
            let a_dag = s.intertwiner_adjoint.as_ref().expect("regular token");
            let rel = s.rel_dim();
            for m in 0..s.dim {
                for mu in 0..s.dim {
                    let inner = ComplexMatrix::from_fn(s.dim * rel, ds, |row, c| {
                        if row / rel == m {
                            a_dag[(row % rel, mu * ds + c)] * scale
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    });
                    kraus.push(&s.isometry * &inner);
                }
            }
        }
        KrausChannel::new(kraus, TpClass::TracePreserving)
    }

    /// `J = |e> (x) I_S`.
    pub fn embedding(&self) -> &ComplexMatrix {
        &self.embed
    }
}

/// Index of one outcome drawn with the outcome probabilities.
pub fn sample_outcome<R: Rng>(outcomes: &[PostselectionOutcome], rng: &mut R) -> Result<usize> {
    let dist = WeightedIndex::new(outcomes.iter().map(|o| o.probability))
        .map_err(|e| Error::InvalidArgument(format!("cannot sample outcomes: {e}")))?;
    Ok(dist.sample(rng))
}

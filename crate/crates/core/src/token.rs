//! Reference-frame tokens.
//!
//! A token space is `(+)_q M_q (x) N_q`. Regular tokens use `N_q` of dimension
//! `d_q` and the fiducial state `|e> = sum_q sqrt(d_q / D_R) sum_m |q,m>|phi_{q,m}>`
//! with `D_R = sum_q d_q^2`. Coherent tokens are a single spin with `N_q` trivial
//! and fiducial `|j, j>`. Within a sector the `m` index is major:
//! `index = offset_q + m * mult_q + mu`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::group::{character, default_order, irrep_matrix, GroupElement, GroupId, IrrepLabel};
use crate::linalg::{vdot, vec_norm, Complex64, ComplexMatrix, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Regular,
    Coherent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenSector {
    pub label: IrrepLabel,
    /// Dimension of the irrep factor `M_q`.
    pub dim: usize,
    /// Dimension of the multiplicity factor `N_q`.
    pub mult: usize,
    pub offset: usize,
}

impl TokenSector {
    pub fn index(&self, m: usize, mu: usize) -> usize {
        self.offset + m * self.mult + mu
    }

    pub fn size(&self) -> usize {
        self.dim * self.mult
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenSpec {
    group: GroupId,
    kind: TokenKind,
    labels: Vec<IrrepLabel>,
    sectors: Vec<TokenSector>,
}

impl TokenSpec {
    /// Regular token over the irreps `labels` (SU(2) spins must be integer).
    pub fn regular(group: GroupId, mut labels: Vec<IrrepLabel>) -> Result<Self> {
        if labels.is_empty() {
            return invalid("a regular token needs at least one irrep");
        }
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return invalid("token irreps must be distinct");
        }
        for l in &labels {
            if l.group() != group {
                return invalid(format!("irrep {l} does not belong to {group}"));
            }
            if let IrrepLabel::Spin { two_j } = l {
                if two_j % 2 == 1 {
                    return invalid("regular SU(2) tokens use integer spins only");
                }
            }
        }
        let mut offset = 0;
        let sectors = labels
            .iter()
            .map(|&label| {
                let d = label.dim();
                let s = TokenSector { label, dim: d, mult: d, offset };
                offset += d * d;
                s
            })
            .collect();
        Ok(Self { group, kind: TokenKind::Regular, labels, sectors })
    }

    /// Spin-`j` coherent state `|j, j>`.
    pub fn coherent(two_j: u32) -> Result<Self> {
        if two_j == 0 {
            return invalid("a coherent token needs j > 0");
        }
        let label = IrrepLabel::spin(two_j);
        let sectors = vec![TokenSector { label, dim: label.dim(), mult: 1, offset: 0 }];
        Ok(Self { group: GroupId::SU2, kind: TokenKind::Coherent, labels: vec![label], sectors })
    }

    /// U(1) regular token with charges `0..=n_r`.
    pub fn phase(n_r: u32) -> Result<Self> {
        if n_r == 0 {
            return invalid("phase reference needs N_R >= 1");
        }
        Self::regular(GroupId::U1, (0..=n_r as i32).map(IrrepLabel::Charge).collect())
    }

    /// SU(2) regular token with spins `0..=j_r`.
    pub fn cartesian(j_r: u32) -> Result<Self> {
        if j_r == 0 {
            return invalid("Cartesian frame needs j_R >= 1");
        }
        Self::regular(GroupId::SU2, (0..=j_r).map(|j| IrrepLabel::spin(2 * j)).collect())
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn kind(&self) -> TokenKind {
        self.kind
    }

    pub fn labels(&self) -> &[IrrepLabel] {
        &self.labels
    }

    pub fn sectors(&self) -> &[TokenSector] {
        &self.sectors
    }

    pub fn sector(&self, label: IrrepLabel) -> Option<&TokenSector> {
        self.sectors.iter().find(|s| s.label == label)
    }

    /// Token Hilbert-space dimension; `D_R = sum d_q^2` for regular tokens.
    pub fn dimension(&self) -> usize {
        self.sectors.iter().map(TokenSector::size).sum()
    }

    /// Largest doubled spin (or twice the largest charge magnitude).
    pub fn max_two_j(&self) -> u32 {
        self.labels
            .iter()
            .map(|l| match *l {
                IrrepLabel::Charge(n) => 2 * n.unsigned_abs(),
                IrrepLabel::Spin { two_j } => two_j,
            })
            .max()
            .unwrap_or(0)
    }

    /// Quadrature order covering token, conjugate token and a spin-1/2 system.
    pub fn default_order(&self) -> usize {
        default_order(self.max_two_j() + 1)
    }

    pub fn fiducial_state(&self) -> FiducialState {
        FiducialState { token: self.clone(), vec: self.orbit_state_unchecked(None) }
    }

    /// Irrep matrices of every sector at `g`, in sector order.
    pub fn irrep_blocks(&self, g: &GroupElement) -> Result<Vec<ComplexMatrix>> {
        self.sectors.iter().map(|s| irrep_matrix(s.label, g)).collect()
    }

    /// `(+)_q U^q(g) (x) I_{N_q}`.
    pub fn left_action(&self, g: &GroupElement) -> Result<ComplexMatrix> {
        let blocks = self.irrep_blocks(g)?;
        let mut out = ComplexMatrix::zeros(self.dimension(), self.dimension());
        for (s, u) in self.sectors.iter().zip(&blocks) {
            out.set_block(s.offset, s.offset, &u.kron(&ComplexMatrix::identity(s.mult)));
        }
        Ok(out)
    }

    /// `(+)_q I_{M_q} (x) conj(U^q(h))`; the identity for coherent tokens.
    pub fn right_action(&self, h: &GroupElement) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(self.dimension(), self.dimension());
        for s in &self.sectors {
            let v = match self.kind {
                TokenKind::Regular => irrep_matrix(s.label, h)?.conj(),
                TokenKind::Coherent => {
                    h.validate()?;
                    ComplexMatrix::identity(1)
                }
            };
            out.set_block(s.offset, s.offset, &ComplexMatrix::identity(s.dim).kron(&v));
        }
        Ok(out)
    }

    /// `|g> = U_R(g) |e>`, computed sector by sector.
    pub fn orbit_state(&self, g: &GroupElement) -> Result<Vec<Complex64>> {
        if g.group() != self.group {
            return invalid("group element does not match the token group");
        }
        g.validate()?;
        Ok(self.orbit_state_unchecked(Some(g)))
    }

    fn orbit_state_unchecked(&self, g: Option<&GroupElement>) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.dimension()];
        let d_r = self.dimension() as f64;
        for s in &self.sectors {
            let u = match g {
                Some(g) => irrep_matrix(s.label, g).expect("validated element"),
                None => ComplexMatrix::identity(s.dim),
            };
            match self.kind {
                TokenKind::Regular => {
                    let amp = (s.dim as f64 / d_r).sqrt();
                    for m in 0..s.dim {
                        for mu in 0..s.mult {
                            v[s.index(m, mu)] = u[(m, mu)] * amp;
                        }
                    }
                }
                TokenKind::Coherent => {
                    for m in 0..s.dim {
                        v[s.index(m, 0)] = u[(m, s.dim - 1)];
                    }
                }
            }
        }
        v
    }

    /// Density of the covariant POVM `D_R |<e|U_R(g)|e>|^2`, closed form.
    pub fn overlap_density(&self, g: &GroupElement) -> Result<f64> {
        if g.group() != self.group {
            return invalid("group element does not match the token group");
        }
        let d_r = self.dimension() as f64;
        match self.kind {
            TokenKind::Regular => {
                let mut s = ZERO;
                for sec in &self.sectors {
                    s += character(sec.label, g)? * sec.dim as f64;
                }
                Ok(s.norm_sqr() / d_r)
            }
            TokenKind::Coherent => {
                let sec = &self.sectors[0];
                let u = irrep_matrix(sec.label, g)?;
                Ok(d_r * u[(sec.dim - 1, sec.dim - 1)].norm_sqr())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiducialState {
    pub token: TokenSpec,
    pub vec: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct TokenJson {
    group: GroupId,
    kind: TokenKind,
    /// Charges for U(1), doubled spins for SU(2).
    labels: Vec<i64>,
    vec: Vec<[f64; 2]>,
}

impl FiducialState {
    pub fn to_json(&self) -> Result<String> {
        let labels = self
            .token
            .labels
            .iter()
            .map(|l| match *l {
                IrrepLabel::Charge(n) => n as i64,
                IrrepLabel::Spin { two_j } => two_j as i64,
            })
            .collect();
        let doc = TokenJson {
            group: self.token.group,
            kind: self.token.kind,
            labels,
            vec: self.vec.iter().map(|z| [z.re, z.im]).collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses and checks that the stored vector is the fiducial state of the token.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: TokenJson = serde_json::from_str(s)?;
        let labels: Vec<IrrepLabel> = doc
            .labels
            .iter()
            .map(|&x| match doc.group {
                GroupId::U1 => i32::try_from(x).map(IrrepLabel::Charge).map_err(|_| ()),
                GroupId::SU2 => u32::try_from(x).map(IrrepLabel::spin).map_err(|_| ()),
            })
            .collect::<std::result::Result<_, _>>()
            .or_else(|_| invalid("token label out of range"))?;
        let token = match doc.kind {
            TokenKind::Regular => TokenSpec::regular(doc.group, labels)?,
            TokenKind::Coherent => match (doc.group, labels.as_slice()) {
                (GroupId::SU2, [IrrepLabel::Spin { two_j }]) => TokenSpec::coherent(*two_j)?,
                _ => return invalid("coherent tokens carry exactly one SU(2) spin"),
            },
        };
        let vec: Vec<Complex64> = doc.vec.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        check_dim(token.dimension(), vec.len())?;
        let expect = token.fiducial_state();
        if (vdot(&expect.vec, &vec).norm() - 1.0).abs() > 1e-10 || (vec_norm(&vec) - 1.0).abs() > 1e-10 {
            return invalid("token vector is not the fiducial state");
        }
        Ok(Self { token, vec })
    }
}

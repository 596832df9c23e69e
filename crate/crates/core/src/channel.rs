//! Density operators and Kraus channels.
//!
//! Choi matrices put the input factor first: `C = sum_ij |i><j| (x) ch(|i><j|)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::group::IrrepLabel;
use crate::linalg::{is_psd, trace_distance, vec_norm, Complex64, ComplexMatrix, DEFAULT_TOL, ZERO};

/// Eigenvalues of a Choi matrix below this are dropped when extracting Kraus operators.
pub const KRAUS_CUTOFF: f64 = 1e-12;

const PSD_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    mat: ComplexMatrix,
}

impl DensityOperator {
    /// Unit-trace, Hermitian, positive semidefinite.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let rho = Self::subnormalized(mat)?;
        if (rho.trace() - 1.0).abs() > DEFAULT_TOL {
            return invalid(format!("density operator trace {} is not 1", rho.trace()));
        }
        Ok(rho)
    }

    /// Hermitian, positive semidefinite, trace at most one.
    pub fn subnormalized(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_hermitian(DEFAULT_TOL) {
            return invalid("density operator must be Hermitian");
        }
        if !is_psd(&mat, PSD_TOL) {
            return invalid("density operator must be positive semidefinite");
        }
        if mat.trace().re > 1.0 + DEFAULT_TOL {
            return invalid("density operator trace exceeds 1");
        }
        Ok(Self { mat })
    }

    /// `|v><v| / <v|v>`.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let n = vec_norm(v);
        if n.is_nan() || n <= 0.0 || !n.is_finite() {
            return invalid("pure state vector must be non-zero and finite");
        }
        let u: Vec<Complex64> = v.iter().map(|z| z / n).collect();
        Ok(Self { mat: ComplexMatrix::projector(&u) })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { mat: ComplexMatrix::identity(d).scale_real(1.0 / d as f64) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TpClass {
    /// `sum K^dagger K = I`.
    TracePreserving,
    /// `sum K^dagger K <= I`.
    TraceDecreasing,
    /// Neither, e.g. the adjoint of a non-unital channel.
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    pub matrix: ComplexMatrix,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl ChoiMatrix {
    /// Choi matrix scaled to unit trace for trace-preserving maps.
    pub fn normalized(&self) -> ComplexMatrix {
        self.matrix.scale_real(1.0 / self.in_dim as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<ComplexMatrix>,
    tp_class: TpClass,
}

impl KrausChannel {
    /// Kraus operators are `out_dim x in_dim`; the declared class is checked.
    pub fn new(kraus: Vec<ComplexMatrix>, tp_class: TpClass) -> Result<Self> {
        let ch = Self::unchecked(kraus)?;
        let actual = ch.infer_class();
        let ok = match tp_class {
            TpClass::TracePreserving => actual == TpClass::TracePreserving,
            TpClass::TraceDecreasing => actual != TpClass::General,
            TpClass::General => true,
        };
        if !ok {
            return invalid(format!("Kraus operators are {actual:?}, not {tp_class:?}"));
        }
        Ok(Self { tp_class, ..ch })
    }

    /// Class inferred from `sum K^dagger K`.
    pub fn classify(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::unchecked(kraus)?;
        let tp_class = ch.infer_class();
        Ok(Self { tp_class, ..ch })
    }

    fn unchecked(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return invalid("a channel needs at least one Kraus operator");
        };
        let (out_dim, in_dim) = first.shape();
        if in_dim == 0 || out_dim == 0 {
            return invalid("Kraus operators must be non-empty");
        }
        for k in &kraus {
            check_dim(out_dim, k.rows())?;
            check_dim(in_dim, k.cols())?;
        }
        Ok(Self { in_dim, out_dim, kraus, tp_class: TpClass::General })
    }

    fn infer_class(&self) -> TpClass {
        let s = self.kraus_sum();
        let id = ComplexMatrix::identity(self.in_dim);
        if s.max_abs_diff(&id) <= DEFAULT_TOL {
            return TpClass::TracePreserving;
        }
        match s.eigvalsh() {
            Ok(v) if v.last().is_some_and(|&l| l <= 1.0 + DEFAULT_TOL) => TpClass::TraceDecreasing,
            _ => TpClass::General,
        }
    }

    pub fn identity(d: usize) -> Self {
        Self { in_dim: d, out_dim: d, kraus: vec![ComplexMatrix::identity(d)], tp_class: TpClass::TracePreserving }
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u], TpClass::TracePreserving)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn tp_class(&self) -> TpClass {
        self.tp_class
    }

    pub fn kraus_sum(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            s += &(&k.adjoint() * k);
        }
        s
    }

    /// `sum_k K_k x K_k^dagger` for any `in_dim x in_dim` operator `x`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dim(self.in_dim, x.rows())?;
        check_dim(self.in_dim, x.cols())?;
        let mut out = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += &k.sandwich(x);
        }
        Ok(out)
    }

    pub fn apply_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let out = self.apply(rho.matrix())?;
        match self.tp_class {
            TpClass::TracePreserving => DensityOperator::new(out),
            _ => DensityOperator::subnormalized(out),
        }
    }

    /// Heisenberg-picture map with Kraus operators `K^dagger`.
    pub fn adjoint(&self) -> Self {
        let kraus: Vec<ComplexMatrix> = self.kraus.iter().map(ComplexMatrix::adjoint).collect();
        Self::classify(kraus).expect("adjoint of a valid channel is valid")
    }

    pub fn choi(&self) -> ChoiMatrix {
        let n = self.in_dim * self.out_dim;
        let mut c = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            accumulate_choi(&mut c, k);
        }
        ChoiMatrix { matrix: c, in_dim: self.in_dim, out_dim: self.out_dim }
    }

    /// Kraus operators from the eigendecomposition of a Choi matrix.
    pub fn from_choi(choi: &ChoiMatrix) -> Result<Self> {
        let (vals, vecs) = choi.matrix.eigh()?;
        let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if vals.first().is_some_and(|&l| l < -PSD_TOL * scale) {
            return Err(Error::Numerical(format!("map is not completely positive (Choi eigenvalue {})", vals[0])));
        }
        let (din, dout) = (choi.in_dim, choi.out_dim);
        let mut kraus = Vec::new();
        for (k, &l) in vals.iter().enumerate().rev() {
            if l < KRAUS_CUTOFF {
                continue;
            }
            let s = l.sqrt();
            kraus.push(ComplexMatrix::from_fn(dout, din, |a, i| vecs[(i * dout + a, k)] * s));
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(dout, din));
        }
        Self::classify(kraus)
    }

    /// Channel of a linear map given by its action on matrix units.
    pub fn from_linear_map(
        in_dim: usize,
        out_dim: usize,
        f: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
    ) -> Result<Self> {
        let n = in_dim * out_dim;
        let mut c = ComplexMatrix::zeros(n, n);
        for i in 0..in_dim {
            for j in 0..in_dim {
                let img = f(&ComplexMatrix::unit(in_dim, in_dim, i, j))?;
                check_dim(out_dim, img.rows())?;
                check_dim(out_dim, img.cols())?;
                c.set_block(i * out_dim, j * out_dim, &img);
            }
        }
        Self::from_choi(&ChoiMatrix { matrix: c.hermitian_part(), in_dim, out_dim })
    }

    /// `second . first`, recompressed through the Choi matrix.
    pub fn compose(second: &KrausChannel, first: &KrausChannel) -> Result<Self> {
        check_dim(second.in_dim, first.out_dim)?;
        let n = first.in_dim * second.out_dim;
        let mut c = ComplexMatrix::zeros(n, n);
        for b in &second.kraus {
            for a in &first.kraus {
                accumulate_choi(&mut c, &(b * a));
            }
        }
        Self::from_choi(&ChoiMatrix { matrix: c, in_dim: first.in_dim, out_dim: second.out_dim })
    }

    /// Convex combination `sum p_k ch_k`.
    pub fn mixture(parts: &[(f64, &KrausChannel)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return invalid("empty mixture");
        };
        if parts.iter().any(|(p, _)| p.is_nan() || *p < 0.0)
            || (parts.iter().map(|(p, _)| p).sum::<f64>() - 1.0).abs() > 1e-12
        {
            return invalid("mixture weights must be non-negative and sum to 1");
        }
        let mut kraus = Vec::new();
        for (p, ch) in parts {
            check_dim(first.in_dim, ch.in_dim)?;
            check_dim(first.out_dim, ch.out_dim)?;
            if *p > 0.0 {
                kraus.extend(ch.kraus.iter().map(|k| k.scale_real(p.sqrt())));
            }
        }
        Self::classify(kraus)
    }

    /// `F_e = (1/d^2) sum |Tr K|^2`.
    pub fn entanglement_fidelity(&self) -> Result<f64> {
        if self.in_dim != self.out_dim {
            return invalid("entanglement fidelity needs equal input and output dimensions");
        }
        let d = self.in_dim as f64;
        Ok(self.kraus.iter().map(|k| k.trace().norm_sqr()).sum::<f64>() / (d * d))
    }

    /// Affine Bloch-ball map `r -> M r + t` of a qubit channel, with Pauli
    /// matrices taken in the computational (index) basis.
    pub fn bloch_map(&self) -> Result<BlochMap> {
        if self.in_dim != 2 || self.out_dim != 2 {
            return invalid("Bloch representation needs a qubit channel");
        }
        let p = paulis();
        let mut matrix = [[0.0; 3]; 3];
        let mut offset = [0.0; 3];
        let id_img = self.apply(&ComplexMatrix::identity(2))?;
        for i in 0..3 {
            offset[i] = 0.5 * (&p[i] * &id_img).trace().re;
            for j in 0..3 {
                matrix[i][j] = 0.5 * (&p[i] * &self.apply(&p[j])?).trace().re;
            }
        }
        Ok(BlochMap { matrix, offset })
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ChannelJson {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            tp_class: self.tp_class,
            kraus: self
                .kraus
                .iter()
                .map(|k| (0..k.rows()).map(|r| k.row(r).iter().map(|z| [z.re, z.im]).collect()).collect())
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ChannelJson = serde_json::from_str(s)?;
        let mut kraus = Vec::with_capacity(doc.kraus.len());
        for k in doc.kraus {
            check_dim(doc.out_dim, k.len())?;
            let mut data = Vec::with_capacity(doc.out_dim * doc.in_dim);
            for row in k {
                check_dim(doc.in_dim, row.len())?;
                data.extend(row.into_iter().map(|[re, im]| Complex64::new(re, im)));
            }
            kraus.push(ComplexMatrix::new(doc.out_dim, doc.in_dim, data)?);
        }
        let ch = Self::new(kraus, doc.tp_class)?;
        check_dim(doc.in_dim, ch.in_dim)?;
        Ok(ch)
    }
}

fn accumulate_choi(c: &mut ComplexMatrix, k: &ComplexMatrix) {
    let (dout, din) = k.shape();
    let v: Vec<Complex64> = (0..din * dout).map(|idx| k[(idx % dout, idx / dout)]).collect();
    let n = v.len();
    let data = c.data_mut();
    for r in 0..n {
        if v[r] == ZERO {
            continue;
        }
        let row = &mut data[r * n..(r + 1) * n];
        for (x, b) in row.iter_mut().zip(&v) {
            *x += v[r] * b.conj();
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochMap {
    pub matrix: [[f64; 3]; 3],
    pub offset: [f64; 3],
}

pub fn paulis() -> [ComplexMatrix; 3] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        ComplexMatrix::new(2, 2, vec![ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO]).unwrap(),
        ComplexMatrix::new(2, 2, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap(),
        ComplexMatrix::from_real_diag(&[1.0, -1.0]),
    ]
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    in_dim: usize,
    out_dim: usize,
    tp_class: TpClass,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Trace distance between the normalised Choi states of two channels.
pub fn channel_distance(a: &KrausChannel, b: &KrausChannel) -> Result<f64> {
    check_dim(a.in_dim, b.in_dim)?;
    check_dim(a.out_dim, b.out_dim)?;
    trace_distance(&a.choi().normalized(), &b.choi().normalized())
}

/// Group twirl over a representation `(+)_l U^l (x) I_{mult}`, basis index
/// `offset_l + m * mult + mu`. Computed block-wise:
/// `G(X) = (+)_{l,l'} delta_{l l'} (I_{d_l}/d_l) (x) Tr_{d_l}[X_{ll}]`.
pub fn twirl(rep: &[(IrrepLabel, usize)]) -> Result<KrausChannel> {
    let Some((first, _)) = rep.first() else {
        return invalid("twirl needs a non-empty representation");
    };
    if rep.iter().any(|(l, m)| l.group() != first.group() || *m == 0) {
        return invalid("twirl representation must use one group and positive multiplicities");
    }
    let mut sorted: Vec<IrrepLabel> = rep.iter().map(|(l, _)| *l).collect();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != rep.len() {
        return invalid("twirl representation lists an irrep twice");
    }
    let dim: usize = rep.iter().map(|(l, m)| l.dim() * m).sum();
    let mut kraus = Vec::new();
    let mut offset = 0;
    for (l, mult) in rep {
        let d = l.dim();
        let s = 1.0 / (d as f64).sqrt();
        for m in 0..d {
            for mp in 0..d {
                let mut k = ComplexMatrix::zeros(dim, dim);
                for mu in 0..*mult {
                    k[(offset + m * mult + mu, offset + mp * mult + mu)] = Complex64::new(s, 0.0);
                }
                kraus.push(k);
            }
        }
        offset += d * mult;
    }
    KrausChannel::new(kraus, TpClass::TracePreserving)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{haar_quadrature, irrep_matrix, GroupId};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn amplitude_damping(g: f64) -> KrausChannel {
        let k0 = ComplexMatrix::from_real_diag(&[1.0, (1.0 - g).sqrt()]);
        let mut k1 = ComplexMatrix::zeros(2, 2);
        k1[(0, 1)] = c(g.sqrt(), 0.0);
        KrausChannel::new(vec![k0, k1], TpClass::TracePreserving).unwrap()
    }

    #[test]
    fn density_operator_validation() {
        assert!(DensityOperator::new(ComplexMatrix::from_real_diag(&[0.5, 0.5])).is_ok());
        assert!(DensityOperator::new(ComplexMatrix::from_real_diag(&[0.7, 0.5])).is_err());
        assert!(DensityOperator::new(ComplexMatrix::from_real_diag(&[1.2, -0.2])).is_err());
        assert!(DensityOperator::subnormalized(ComplexMatrix::from_real_diag(&[0.2, 0.1])).is_ok());
        let mut x = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        x[(0, 1)] = c(0.1, 0.0);
        assert!(DensityOperator::new(x).is_err());
        assert!(DensityOperator::pure(&[ZERO, ZERO]).is_err());
    }

    #[test]
    fn declared_class_is_checked() {
        let k = ComplexMatrix::from_real_diag(&[1.0, 0.5]);
        assert!(KrausChannel::new(vec![k.clone()], TpClass::TracePreserving).is_err());
        assert_eq!(KrausChannel::classify(vec![k]).unwrap().tp_class(), TpClass::TraceDecreasing);
        let big = ComplexMatrix::from_real_diag(&[2.0, 0.0]);
        assert_eq!(KrausChannel::classify(vec![big]).unwrap().tp_class(), TpClass::General);
        assert!(KrausChannel::new(vec![], TpClass::General).is_err());
        assert!(
            KrausChannel::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)], TpClass::General).is_err()
        );
    }

    #[test]
    fn choi_round_trip_preserves_action() {
        let ch = amplitude_damping(0.3);
        let back = KrausChannel::from_choi(&ch.choi()).unwrap();
        assert_eq!(back.tp_class(), TpClass::TracePreserving);
        assert!(channel_distance(&ch, &back).unwrap() < 1e-12);
        let x = ComplexMatrix::new(2, 2, vec![c(0.3, 0.0), c(0.1, 0.2), c(-0.4, 0.0), c(0.7, 0.0)]).unwrap();
        assert!(ch.apply(&x).unwrap().approx_eq(&back.apply(&x).unwrap(), 1e-12));
    }

    #[test]
    fn adjoint_duality() {
        let ch = amplitude_damping(0.4);
        let adj = ch.adjoint();
        let x = ComplexMatrix::new(2, 2, vec![c(0.3, 0.1), c(0.1, 0.2), c(-0.4, 0.5), c(0.7, -1.0)]).unwrap();
        let y = ComplexMatrix::new(2, 2, vec![c(1.0, 0.0), c(0.0, 2.0), c(0.5, 0.5), c(0.2, 0.0)]).unwrap();
        let lhs = y.hs_inner(&ch.apply(&x).unwrap());
        let rhs = adj.apply(&y).unwrap().hs_inner(&x);
        assert!((lhs - rhs).norm() < 1e-13);
        // Adjoint of a non-unital channel is unital but not trace non-increasing.
        assert_eq!(adj.tp_class(), TpClass::General);
    }

    #[test]
    fn linear_map_rejects_non_cp() {
        let transpose = |x: &ComplexMatrix| Ok(x.transpose());
        assert!(KrausChannel::from_linear_map(2, 2, transpose).is_err());
    }

    #[test]
    fn su2_twirl_of_spin_half_is_depolarizing() {
        let g = twirl(&[(IrrepLabel::spin(1), 1)]).unwrap();
        let x = ComplexMatrix::new(2, 2, vec![c(0.8, 0.0), c(0.1, 0.3), c(0.1, -0.3), c(0.2, 0.0)]).unwrap();
        assert!(g.apply(&x).unwrap().approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-15));
    }

    #[test]
    fn twirl_matches_quadrature_average() {
        // spin 1 with multiplicity 2 plus spin 1/2 with multiplicity 1.
        let rep = [(IrrepLabel::spin(1), 1), (IrrepLabel::spin(2), 2)];
        let g = twirl(&rep).unwrap();
        let dim = 2 + 6;
        let x = ComplexMatrix::from_fn(dim, dim, |r, k| c((r * 3 + k) as f64 * 0.1, (r as f64 - k as f64) * 0.05));
        let quad = haar_quadrature(GroupId::SU2, 8).unwrap();
        let mut avg = ComplexMatrix::zeros(dim, dim);
        for (node, w) in quad.iter() {
            let mut u = ComplexMatrix::zeros(dim, dim);
            u.set_block(0, 0, &irrep_matrix(IrrepLabel::spin(1), node).unwrap());
            u.set_block(2, 2, &irrep_matrix(IrrepLabel::spin(2), node).unwrap().kron(&ComplexMatrix::identity(2)));
            avg.axpy(c(w, 0.0), &u.sandwich(&x));
        }
        assert!(g.apply(&x).unwrap().approx_eq(&avg, 1e-12));
    }

    #[test]
    fn entanglement_fidelity_of_simple_channels() {
        assert!((KrausChannel::identity(3).entanglement_fidelity().unwrap() - 1.0).abs() < 1e-15);
        let dep = twirl(&[(IrrepLabel::spin(1), 1)]).unwrap();
        assert!((dep.entanglement_fidelity().unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn bloch_map_of_dephasing() {
        let deph = twirl(&[(IrrepLabel::Charge(0), 1), (IrrepLabel::Charge(1), 1)]).unwrap();
        let b = deph.bloch_map().unwrap();
        assert_eq!(b.matrix, [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(b.offset, [0.0; 3]);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let ch = amplitude_damping(0.123456789);
        let back = KrausChannel::from_json(&ch.to_json().unwrap()).unwrap();
        assert_eq!(ch, back);
        assert!(KrausChannel::from_json("{\"in_dim\":2}").is_err());
    }

    #[test]
    fn mixture_validation() {
        let id = KrausChannel::identity(2);
        assert!(KrausChannel::mixture(&[(0.5, &id), (0.6, &id)]).is_err());
        let m = KrausChannel::mixture(&[(0.25, &id), (0.75, &id)]).unwrap();
        assert!(channel_distance(&m, &id).unwrap() < 1e-15);
    }
}

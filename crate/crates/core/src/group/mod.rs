//! Compact groups U(1) and SU(2): irreps, characters, coupling.
//!
//! Spins are stored doubled (`two_j`, `two_m`) so half-integers stay exact.
//! Irrep bases are ordered by ascending `m`. SU(2) elements act as
//! `e^{-i a J_z} e^{-i b J_y} e^{-i c J_z}` (Euler, z-y-z) or `e^{i w n.J}`
//! (axis-angle); U(1) charge `n` acts as `e^{i n theta}`.

mod cg;
mod quadrature;
mod wigner;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use cg::{clebsch_gordan, ln_factorial};
pub use quadrature::{default_order, gauss_legendre, haar_quadrature, EulerFactors, QuadratureRule};
pub use wigner::{small_d, small_d_matrix, wigner_d_matrix};

use crate::error::{invalid, Error, Result};
use crate::linalg::{Complex64, ComplexMatrix, I};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupId {
    U1,
    SU2,
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupId::U1 => "U1",
            GroupId::SU2 => "SU2",
        })
    }
}

/// Irrep label: a U(1) charge or an SU(2) spin (doubled).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IrrepLabel {
    Charge(i32),
    Spin { two_j: u32 },
}

impl IrrepLabel {
    pub fn spin(two_j: u32) -> Self {
        IrrepLabel::Spin { two_j }
    }

    pub fn group(&self) -> GroupId {
        match self {
            IrrepLabel::Charge(_) => GroupId::U1,
            IrrepLabel::Spin { .. } => GroupId::SU2,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            IrrepLabel::Charge(_) => 1,
            IrrepLabel::Spin { two_j } => two_j as usize + 1,
        }
    }

    /// Magnetic labels in basis order. U(1) irreps carry the single label 0.
    pub fn two_m_values(&self) -> Vec<i32> {
        match *self {
            IrrepLabel::Charge(_) => vec![0],
            IrrepLabel::Spin { two_j } => (0..=two_j as i32).map(|k| -(two_j as i32) + 2 * k).collect(),
        }
    }

    /// Position of `two_m` in the basis, if it belongs to this irrep.
    pub fn m_index(&self, two_m: i32) -> Option<usize> {
        match *self {
            IrrepLabel::Charge(_) => (two_m == 0).then_some(0),
            IrrepLabel::Spin { two_j } => {
                let k = two_m + two_j as i32;
                (k >= 0 && k % 2 == 0 && k <= 2 * two_j as i32).then_some((k / 2) as usize)
            }
        }
    }

    /// The label as a number: the charge, or `j`.
    pub fn value(&self) -> f64 {
        match *self {
            IrrepLabel::Charge(n) => n as f64,
            IrrepLabel::Spin { two_j } => two_j as f64 / 2.0,
        }
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            IrrepLabel::Charge(n) => write!(f, "{n}"),
            IrrepLabel::Spin { two_j } if two_j % 2 == 0 => write!(f, "{}", two_j / 2),
            IrrepLabel::Spin { two_j } => write!(f, "{two_j}/2"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GroupElement {
    U1 {
        theta: f64,
    },
    /// `e^{-i a J_z} e^{-i b J_y} e^{-i c J_z}`.
    Euler {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `e^{i omega n.J}` with `n = (sin t cos p, sin t sin p, cos t)`.
    AxisAngle {
        omega: f64,
        theta: f64,
        phi: f64,
    },
}

impl GroupElement {
    pub fn group(&self) -> GroupId {
        match self {
            GroupElement::U1 { .. } => GroupId::U1,
            _ => GroupId::SU2,
        }
    }

    pub fn identity(group: GroupId) -> Self {
        match group {
            GroupId::U1 => GroupElement::U1 { theta: 0.0 },
            GroupId::SU2 => GroupElement::Euler { a: 0.0, b: 0.0, c: 0.0 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = match *self {
            GroupElement::U1 { theta } => theta.is_finite(),
            GroupElement::Euler { a, b, c } => a.is_finite() && b.is_finite() && c.is_finite(),
            GroupElement::AxisAngle { omega, theta, phi } => omega.is_finite() && theta.is_finite() && phi.is_finite(),
        };
        if finite {
            Ok(())
        } else {
            invalid("group element parameters must be finite")
        }
    }

    /// Defining 2x2 matrix, basis `(m = -1/2, m = +1/2)`.
    pub fn su2_matrix(&self) -> Result<[[Complex64; 2]; 2]> {
        self.validate()?;
        match *self {
            GroupElement::U1 { .. } => Err(Error::Unsupported("U(1) element has no SU(2) matrix".into())),
            GroupElement::Euler { a, b, c } => {
                let (cb, sb) = ((b / 2.0).cos(), (b / 2.0).sin());
                let e = |x: f64| Complex64::from_polar(1.0, x);
                Ok([[e((a + c) / 2.0) * cb, e((a - c) / 2.0) * sb], [-e(-(a - c) / 2.0) * sb, e(-(a + c) / 2.0) * cb]])
            }
            GroupElement::AxisAngle { omega, theta, phi } => {
                let (nx, ny, nz) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
                let (co, so) = ((omega / 2.0).cos(), (omega / 2.0).sin());
                let re = Complex64::new(co, 0.0);
                Ok([
                    [re - I * so * nz, I * so * Complex64::new(nx, ny)],
                    [I * so * Complex64::new(nx, -ny), re + I * so * nz],
                ])
            }
        }
    }

    /// Euler angles `(a, b, c)` with `a` in `[0, 2pi)`, `b` in `[0, pi]`, `c` in `[0, 4pi)`.
    pub fn euler(&self) -> Result<(f64, f64, f64)> {
        if let GroupElement::Euler { a, b, c } = *self {
            if (0.0..=PI).contains(&b) {
                return Ok((a, b, c));
            }
        }
        Ok(euler_from_matrix(&self.su2_matrix()?))
    }

    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        match (*self, *other) {
            (GroupElement::U1 { theta: x }, GroupElement::U1 { theta: y }) => Ok(GroupElement::U1 { theta: x + y }),
            (GroupElement::U1 { .. }, _) | (_, GroupElement::U1 { .. }) => {
                invalid("cannot compose elements of different groups")
            }
            _ => {
                let (u, v) = (self.su2_matrix()?, other.su2_matrix()?);
                let mut w = [[Complex64::new(0.0, 0.0); 2]; 2];
                for r in 0..2 {
                    for c in 0..2 {
                        w[r][c] = u[r][0] * v[0][c] + u[r][1] * v[1][c];
                    }
                }
                let (a, b, c) = euler_from_matrix(&w);
                Ok(GroupElement::Euler { a, b, c })
            }
        }
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        match *self {
            GroupElement::U1 { theta } => Ok(GroupElement::U1 { theta: -theta }),
            _ => {
                let u = self.su2_matrix()?;
                let w = [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]];
                let (a, b, c) = euler_from_matrix(&w);
                Ok(GroupElement::Euler { a, b, c })
            }
        }
    }

    /// Rotation angle `omega` in `[0, 2pi]` of an SU(2) element.
    pub fn rotation_angle(&self) -> Result<f64> {
        let u = self.su2_matrix()?;
        let cos_half = 0.5 * (u[0][0] + u[1][1]).re;
        let sin_half = (u[0][1].norm_sqr() + (0.5 * (u[1][1] - u[0][0])).im.powi(2)).sqrt();
        Ok(2.0 * sin_half.atan2(cos_half))
    }
}

fn euler_from_matrix(u: &[[Complex64; 2]; 2]) -> (f64, f64, f64) {
    const TINY: f64 = 1e-14;
    let (cb, sb) = (u[1][1].norm(), u[0][1].norm());
    let b = 2.0 * sb.atan2(cb);
    let sigma = if cb > TINY { -2.0 * u[1][1].arg() } else { 0.0 };
    let delta = if sb > TINY { 2.0 * u[0][1].arg() } else { 0.0 };
    let (mut a, mut c) = ((sigma + delta) / 2.0, (sigma - delta) / 2.0);
    // (a, c) -> (a + 2pi, c + 2pi) and c -> c + 4pi leave the element unchanged.
    let k = (a / (2.0 * PI)).floor();
    a -= 2.0 * PI * k;
    c -= 2.0 * PI * k;
    c = c.rem_euclid(4.0 * PI);
    (a, b, c)
}

/// Representation matrix of irrep `label` at `g`, basis ascending in `m`.
pub fn irrep_matrix(label: IrrepLabel, g: &GroupElement) -> Result<ComplexMatrix> {
    check_group(label, g)?;
    match label {
        IrrepLabel::Charge(n) => {
            let GroupElement::U1 { theta } = *g else { unreachable!() };
            Ok(ComplexMatrix::from_diag(&[Complex64::from_polar(1.0, n as f64 * theta)]))
        }
        IrrepLabel::Spin { two_j } => {
            let (a, b, c) = g.euler()?;
            Ok(wigner_d_matrix(two_j, a, b, c))
        }
    }
}

/// Character `Tr U^label(g)`; the SU(2) case uses the closed form in the rotation angle.
pub fn character(label: IrrepLabel, g: &GroupElement) -> Result<Complex64> {
    check_group(label, g)?;
    match label {
        IrrepLabel::Charge(n) => {
            let GroupElement::U1 { theta } = *g else { unreachable!() };
            Ok(Complex64::from_polar(1.0, n as f64 * theta))
        }
        IrrepLabel::Spin { two_j } => Ok(Complex64::new(spin_character(two_j, g.rotation_angle()?), 0.0)),
    }
}

/// `sin((2j+1) w/2) / sin(w/2)`.
pub fn spin_character(two_j: u32, omega: f64) -> f64 {
    let n = two_j as f64 + 1.0;
    let s = (omega / 2.0).sin();
    if s.abs() <= 1e-8 {
        let sign = if (omega / 2.0).cos() < 0.0 && two_j % 2 == 1 { -1.0 } else { 1.0 };
        return n * sign;
    }
    (n * omega / 2.0).sin() / s
}

fn check_group(label: IrrepLabel, g: &GroupElement) -> Result<()> {
    g.validate()?;
    if label.group() != g.group() {
        return invalid(format!("irrep {label:?} does not belong to the group of {g:?}"));
    }
    Ok(())
}

/// Doubled spins in `j1 (x) j2`.
pub fn couple(two_j1: u32, two_j2: u32) -> Vec<u32> {
    let lo = two_j1.abs_diff(two_j2);
    (lo..=two_j1 + two_j2).step_by(2).collect()
}

/// Irreps in the tensor product of two irreps of the same group.
pub fn couple_labels(a: IrrepLabel, b: IrrepLabel) -> Result<Vec<IrrepLabel>> {
    match (a, b) {
        (IrrepLabel::Charge(x), IrrepLabel::Charge(y)) => Ok(vec![IrrepLabel::Charge(x + y)]),
        (IrrepLabel::Spin { two_j: x }, IrrepLabel::Spin { two_j: y }) => {
            Ok(couple(x, y).into_iter().map(IrrepLabel::spin).collect())
        }
        _ => invalid("cannot couple irreps of different groups"),
    }
}

/// `<l1 m1; l2 m2 | l m>`: Clebsch-Gordan for SU(2), charge conservation for U(1).
pub fn coupling_coefficient(
    l1: IrrepLabel,
    two_m1: i32,
    l2: IrrepLabel,
    two_m2: i32,
    l: IrrepLabel,
    two_m: i32,
) -> f64 {
    match (l1, l2, l) {
        (IrrepLabel::Charge(x), IrrepLabel::Charge(y), IrrepLabel::Charge(z)) => {
            if x + y == z && two_m1 == 0 && two_m2 == 0 && two_m == 0 {
                1.0
            } else {
                0.0
            }
        }
        (IrrepLabel::Spin { two_j: a }, IrrepLabel::Spin { two_j: b }, IrrepLabel::Spin { two_j: c }) => {
            clebsch_gordan(a, two_m1, b, two_m2, c, two_m)
        }
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Spin matrices from ladder operators, basis ascending in m.
    fn spin_ops(two_j: u32) -> [ComplexMatrix; 3] {
        let j = two_j as f64 / 2.0;
        let d = two_j as usize + 1;
        let m = |k: usize| -j + k as f64;
        let jz = ComplexMatrix::from_real_diag(&(0..d).map(m).collect::<Vec<_>>());
        let mut jp = ComplexMatrix::zeros(d, d);
        for k in 0..d - 1 {
            jp[(k + 1, k)] = Complex64::new((j * (j + 1.0) - m(k) * (m(k) + 1.0)).sqrt(), 0.0);
        }
        let jm = jp.adjoint();
        let jx = (&jp + &jm).scale_real(0.5);
        let jy = (&jp - &jm).scale(Complex64::new(0.0, -0.5));
        [jx, jy, jz]
    }

    fn expm_i_hermitian(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
        let (vals, vecs) = h.eigh().unwrap();
        let d: Vec<Complex64> = vals.iter().map(|&l| Complex64::from_polar(1.0, t * l)).collect();
        &(&vecs * &ComplexMatrix::from_diag(&d)) * &vecs.adjoint()
    }

    #[test]
    fn wigner_matches_exponentiated_generators() {
        for two_j in 0..=6 {
            let [_, jy, jz] = spin_ops(two_j);
            let (a, b, c) = (0.7, 1.9, -2.3);
            let oracle = &(&expm_i_hermitian(&jz, -a) * &expm_i_hermitian(&jy, -b)) * &expm_i_hermitian(&jz, -c);
            let g = GroupElement::Euler { a, b, c };
            assert!(irrep_matrix(IrrepLabel::spin(two_j), &g).unwrap().approx_eq(&oracle, 1e-12), "two_j={two_j}");
        }
    }

    #[test]
    fn axis_angle_matches_exponentiated_generators() {
        for two_j in 0..=5 {
            let [jx, jy, jz] = spin_ops(two_j);
            let (omega, theta, phi): (f64, f64, f64) = (2.2, 0.8, 4.0);
            let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let mut nj = jx.scale_real(n[0]);
            nj += &jy.scale_real(n[1]);
            nj += &jz.scale_real(n[2]);
            let oracle = expm_i_hermitian(&nj, omega);
            let g = GroupElement::AxisAngle { omega, theta, phi };
            assert!(irrep_matrix(IrrepLabel::spin(two_j), &g).unwrap().approx_eq(&oracle, 1e-12));
        }
    }

    #[test]
    fn z_rotation_of_spin_half() {
        let w = 0.9;
        let g = GroupElement::AxisAngle { omega: w, theta: 0.0, phi: 0.0 };
        let u = irrep_matrix(IrrepLabel::spin(1), &g).unwrap();
        let expect =
            ComplexMatrix::from_diag(&[Complex64::from_polar(1.0, -w / 2.0), Complex64::from_polar(1.0, w / 2.0)]);
        assert!(u.approx_eq(&expect, 1e-14));
    }

    #[test]
    fn euler_round_trip_including_poles() {
        let cases = [
            GroupElement::Euler { a: 1.0, b: 0.0, c: 2.0 },
            GroupElement::Euler { a: 1.0, b: PI, c: 2.0 },
            GroupElement::Euler { a: 5.5, b: 2.0, c: 11.0 },
            GroupElement::AxisAngle { omega: 2.0 * PI, theta: 0.3, phi: 0.2 },
            GroupElement::AxisAngle { omega: 3.7, theta: 2.5, phi: -1.0 },
        ];
        for g in cases {
            let (a, b, c) = g.euler().unwrap();
            assert!((0.0..2.0 * PI).contains(&a) && (0.0..=PI).contains(&b) && (0.0..4.0 * PI).contains(&c));
            let u = g.su2_matrix().unwrap();
            let v = GroupElement::Euler { a, b, c }.su2_matrix().unwrap();
            for r in 0..2 {
                for k in 0..2 {
                    assert!((u[r][k] - v[r][k]).norm() < 1e-12, "{g:?}");
                }
            }
        }
    }

    #[test]
    fn homomorphism_and_inverse() {
        let g = GroupElement::Euler { a: 0.4, b: 1.1, c: 3.0 };
        let h = GroupElement::AxisAngle { omega: 1.3, theta: 2.0, phi: 0.5 };
        let gh = g.compose(&h).unwrap();
        for two_j in 0..=4 {
            let l = IrrepLabel::spin(two_j);
            let lhs = irrep_matrix(l, &gh).unwrap();
            let rhs = &irrep_matrix(l, &g).unwrap() * &irrep_matrix(l, &h).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-12));
            let e = g.compose(&g.inverse().unwrap()).unwrap();
            assert!(irrep_matrix(l, &e).unwrap().approx_eq(&ComplexMatrix::identity(two_j as usize + 1), 1e-12));
        }
    }

    #[test]
    fn characters_match_traces() {
        let gs = [
            GroupElement::Euler { a: 0.4, b: 1.1, c: 3.0 },
            GroupElement::Euler { a: 0.0, b: 0.0, c: 0.0 },
            GroupElement::Euler { a: 0.0, b: 0.0, c: 2.0 * PI },
            GroupElement::AxisAngle { omega: 6.0, theta: 1.0, phi: 2.0 },
        ];
        for g in gs {
            for two_j in 0..=7 {
                let l = IrrepLabel::spin(two_j);
                let tr = irrep_matrix(l, &g).unwrap().trace();
                assert!((character(l, &g).unwrap() - tr).norm() < 1e-10, "{g:?} {two_j}");
            }
        }
        let g = GroupElement::U1 { theta: 0.3 };
        assert!((character(IrrepLabel::Charge(3), &g).unwrap() - Complex64::from_polar(1.0, 0.9)).norm() < 1e-15);
    }

    #[test]
    fn group_mismatch_is_rejected() {
        assert!(irrep_matrix(IrrepLabel::Charge(1), &GroupElement::identity(GroupId::SU2)).is_err());
        assert!(character(IrrepLabel::spin(1), &GroupElement::U1 { theta: 0.0 }).is_err());
        assert!(GroupElement::U1 { theta: 0.0 }.compose(&GroupElement::identity(GroupId::SU2)).is_err());
        assert!(irrep_matrix(IrrepLabel::spin(1), &GroupElement::Euler { a: f64::NAN, b: 0.0, c: 0.0 }).is_err());
    }

    #[test]
    fn coupling_ranges() {
        assert_eq!(couple(2, 1), vec![1, 3]);
        assert_eq!(couple(0, 3), vec![3]);
        assert_eq!(couple(4, 4), vec![0, 2, 4, 6, 8]);
        assert_eq!(couple_labels(IrrepLabel::Charge(2), IrrepLabel::Charge(-1)).unwrap(), vec![IrrepLabel::Charge(1)]);
    }

    #[test]
    fn labels() {
        assert_eq!(IrrepLabel::spin(3).two_m_values(), vec![-3, -1, 1, 3]);
        assert_eq!(IrrepLabel::spin(3).m_index(1), Some(2));
        assert_eq!(IrrepLabel::spin(3).m_index(0), None);
        assert_eq!(IrrepLabel::spin(3).to_string(), "3/2");
        assert_eq!(IrrepLabel::spin(4).to_string(), "2");
    }
}

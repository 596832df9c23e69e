//! Invariant checks shared by the property tests and the acceptance suite.
//! Each returns the largest deviation found.

#![allow(dead_code)]

use qrf_core::group::{character, clebsch_gordan, haar_quadrature, irrep_matrix};
use qrf_core::{
    Codec, Complex64, ComplexMatrix, GroupElement, GroupId, IrrepLabel, KrausChannel, ScenarioId, TokenKind,
};

/// Small instances of every scenario.
pub fn small_scenarios() -> Vec<ScenarioId> {
    let mut v: Vec<ScenarioId> = (1..=4).map(|n_r| ScenarioId::PhaseReference { n_r }).collect();
    v.extend((1..=2).map(|j_r| ScenarioId::CartesianFrame { j_r }));
    v.extend((1..=4).map(|two_j_r| ScenarioId::DirectionIndicator { two_j_r }));
    v
}

pub fn qubit_state(p: [f64; 4]) -> ComplexMatrix {
    let v = [Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3])];
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let v = [v[0] / n, v[1] / n];
    ComplexMatrix::outer(&v, &v)
}

/// Hermitian operator with entries from a flat list, cycled.
pub fn hermitian(n: usize, entries: &[f64]) -> ComplexMatrix {
    let m = ComplexMatrix::from_fn(n, n, |r, c| {
        let k = 2 * (r * n + c);
        Complex64::new(entries[k % entries.len()], entries[(k + 1) % entries.len()])
    });
    m.hermitian_part()
}

pub fn element(group: GroupId, angles: [f64; 3]) -> GroupElement {
    match group {
        GroupId::U1 => GroupElement::U1 { theta: angles[0] },
        GroupId::SU2 => GroupElement::Euler { a: angles[0], b: angles[1], c: angles[2] },
    }
}

pub fn trace_preservation(codec: &Codec) -> f64 {
    let ds = codec.system().dim();
    let enc = codec.encoding_channel().unwrap();
    let eff = codec.effective_channel(qrf_core::DecodeMethod::Relational, None).unwrap();
    let id = ComplexMatrix::identity(ds);
    enc.kraus_sum().max_abs_diff(&id).max(eff.kraus_sum().max_abs_diff(&id))
}

/// `E(I/d_S) = I/(D_R d_S)`.
pub fn unitality(codec: &Codec) -> f64 {
    let ds = codec.system().dim();
    let n = codec.joint_dim();
    let out = codec.encode_block(&ComplexMatrix::identity(ds).scale_real(1.0 / ds as f64)).unwrap().state;
    out.max_abs_diff(&ComplexMatrix::identity(n).scale_real(1.0 / n as f64))
}

/// `U_RS(g) E(rho) U_RS(g)^dagger = E(rho)`.
pub fn invariance(codec: &Codec, rho: &ComplexMatrix, g: &GroupElement) -> f64 {
    let e = codec.encode_block(rho).unwrap().state;
    let u = codec.token().left_action(g).unwrap().kron(&codec.system().action(g).unwrap());
    u.sandwich(&e).max_abs_diff(&e)
}

/// `E(U_S rho U_S^dagger) = (V_R(g) (x) I) E(rho) (..)^dagger`.
pub fn covariance(codec: &Codec, rho: &ComplexMatrix, g: &GroupElement) -> f64 {
    let us = codec.system().action(g).unwrap();
    let e = codec.encode_block(rho).unwrap().state;
    let v = codec.token().right_action(g).unwrap().kron(&ComplexMatrix::identity(codec.system().dim()));
    codec.encode_block(&us.sandwich(rho)).unwrap().state.max_abs_diff(&v.sandwich(&e))
}

/// `R(X) = D_R E^dagger(X)` on a joint operator.
pub fn adjoint_duality(codec: &Codec, x: &ComplexMatrix) -> f64 {
    let d_r = codec.token().dimension() as f64;
    let adj: KrausChannel = codec.encoding_channel().unwrap().adjoint();
    let want = adj.apply(x).unwrap().scale_real(d_r);
    codec.decode_relational(x).unwrap().max_abs_diff(&want)
}

/// `A V(h) = (W(h) (x) U_S(h)) A` in every sector of a regular token.
pub fn intertwiner_relation(codec: &Codec, h: &GroupElement) -> f64 {
    if codec.token().kind() != TokenKind::Regular {
        return 0.0;
    }
    let us = codec.system().action(h).unwrap();
    let mut dev: f64 = 0.0;
    for s in &codec.sectors().sectors {
        let a = s.intertwiner_adjoint.as_ref().unwrap().adjoint();
        let w = irrep_matrix(s.label, h).unwrap().conj();
        let rel = s.rel_dim();
        let v = ComplexMatrix::from_fn(rel, rel, |r, k| {
            let (ri, rk) = (s.rel[r], s.rel[k]);
            if ri.token == rk.token && ri.system == rk.system {
                irrep_matrix(ri.token, h).unwrap()[(ri.mu, rk.mu)].conj()
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        dev = dev.max((&a * &v).max_abs_diff(&(&w.kron(&us) * &a)));
    }
    dev
}

/// On good sectors `R^(q)(E^(q)(rho)) = (d_q^2 / D_R) rho`.
pub fn case_a_perfection(codec: &Codec, rho: &ComplexMatrix) -> f64 {
    let d_r = codec.token().dimension() as f64;
    let mut dev: f64 = 0.0;
    for s in codec.sectors().sectors.iter().filter(|s| s.ok) {
        let back = codec.sector_recovery(s.label, &codec.encode_sector(s.label, rho).unwrap()).unwrap();
        dev = dev.max(back.max_abs_diff(&rho.scale_real((s.dim * s.dim) as f64 / d_r)));
    }
    dev
}

/// Orthogonality over `(m1, m2)` and completeness over `(J, M)`.
pub fn cg_orthonormality(two_j1: u32, two_j2: u32) -> f64 {
    let ms = |tj: u32| (0..=tj).map(move |k| -(tj as i32) + 2 * k as i32);
    let totals: Vec<u32> = ((two_j1 as i32 - two_j2 as i32).unsigned_abs()..=two_j1 + two_j2).step_by(2).collect();
    let coupled: Vec<(u32, i32)> = totals.iter().flat_map(|&tj| ms(tj).map(move |m| (tj, m))).collect();
    let uncoupled: Vec<(i32, i32)> = ms(two_j1).flat_map(|a| ms(two_j2).map(move |b| (a, b))).collect();
    let mut dev: f64 = 0.0;
    for (x, &(j, m)) in coupled.iter().enumerate() {
        for &(jp, mp) in &coupled[x..] {
            let s: f64 = uncoupled
                .iter()
                .map(|&(a, b)| {
                    clebsch_gordan(two_j1, a, two_j2, b, j, m) * clebsch_gordan(two_j1, a, two_j2, b, jp, mp)
                })
                .sum();
            dev = dev.max((s - if (j, m) == (jp, mp) { 1.0 } else { 0.0 }).abs());
        }
    }
    for (x, &(a, b)) in uncoupled.iter().enumerate() {
        for &(ap, bp) in &uncoupled[x..] {
            let s: f64 = coupled
                .iter()
                .map(|&(j, m)| {
                    clebsch_gordan(two_j1, a, two_j2, b, j, m) * clebsch_gordan(two_j1, ap, two_j2, bp, j, m)
                })
                .sum();
            dev = dev.max((s - if (a, b) == (ap, bp) { 1.0 } else { 0.0 }).abs());
        }
    }
    dev
}

/// `int chi_j conj(chi_k) dg = delta_jk` by quadrature.
pub fn character_orthogonality(a: IrrepLabel, b: IrrepLabel) -> f64 {
    let max = match (a, b) {
        (IrrepLabel::Spin { two_j: x }, IrrepLabel::Spin { two_j: y }) => x.max(y),
        (IrrepLabel::Charge(x), IrrepLabel::Charge(y)) => x.unsigned_abs().max(y.unsigned_abs()),
        _ => panic!("labels from different groups"),
    };
    let quad = haar_quadrature(a.group(), 2 * max as usize + 2).unwrap();
    let s: Complex64 = quad.iter().map(|(g, w)| character(a, g).unwrap() * character(b, g).unwrap().conj() * w).sum();
    (s - Complex64::new(if a == b { 1.0 } else { 0.0 }, 0.0)).norm()
}

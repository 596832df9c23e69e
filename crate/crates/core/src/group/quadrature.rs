//! Haar quadrature on U(1) and SU(2).
//!
//! The SU(2) rule is a tensor product over Euler angles: `order` trapezoid nodes
//! for `a` on `[0, 2pi)`, Gauss-Legendre nodes in `cos b`, and `2 * order`
//! trapezoid nodes for `c` on `[0, 4pi)`. It integrates every matrix element of
//! irreps (and products of them) with total `|m| < order` and `b`-degree
//! `<= 2 * order - 1` exactly.

use std::f64::consts::PI;

use super::{GroupElement, GroupId};
use crate::error::{invalid, Result};

/// One-dimensional factors of a product rule, as `(angle, weight)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerFactors {
    pub a: Vec<(f64, f64)>,
    pub b: Vec<(f64, f64)>,
    pub c: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub group: GroupId,
    pub nodes: Vec<GroupElement>,
    pub weights: Vec<f64>,
    /// Present when the rule is the full tensor product of its Euler factors,
    /// with nodes ordered `a` outermost and `c` innermost.
    pub factors: Option<EulerFactors>,
}

impl QuadratureRule {
    /// Arbitrary weighted node set. Weights must be non-negative and sum to one.
    pub fn new(group: GroupId, nodes: Vec<GroupElement>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return invalid("quadrature needs matching, non-empty node and weight lists");
        }
        if nodes.iter().any(|g| g.group() != group || g.validate().is_err()) {
            return invalid("quadrature node from the wrong group");
        }
        if weights.iter().any(|&w| w.is_nan() || w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return invalid("quadrature weights must be non-negative and sum to 1");
        }
        Ok(Self { group, nodes, weights, factors: None })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same nodes and weights without the product structure.
    pub fn without_factors(&self) -> Self {
        Self { factors: None, ..self.clone() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, f64)> {
        self.nodes.iter().zip(self.weights.iter().copied())
    }
}

/// Default order for integrands built from irreps with doubled spin up to `max_two_j`.
pub fn default_order(max_two_j: u32) -> usize {
    2 * max_two_j as usize + 8
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Haar quadrature of the given order; weights are normalised to 1.
pub fn haar_quadrature(group: GroupId, order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return invalid("quadrature order must be positive");
    }
    match group {
        GroupId::U1 => {
            let w = 1.0 / order as f64;
            let nodes = (0..order).map(|k| GroupElement::U1 { theta: 2.0 * PI * k as f64 / order as f64 }).collect();
            Ok(QuadratureRule { group, nodes, weights: vec![w; order], factors: None })
        }
        GroupId::SU2 => {
            let a: Vec<(f64, f64)> =
                (0..order).map(|k| (2.0 * PI * k as f64 / order as f64, 1.0 / order as f64)).collect();
            let c: Vec<(f64, f64)> =
                (0..2 * order).map(|k| (2.0 * PI * k as f64 / order as f64, 0.5 / order as f64)).collect();
            let b: Vec<(f64, f64)> =
                gauss_legendre(order).into_iter().map(|(x, w)| (x.clamp(-1.0, 1.0).acos(), w / 2.0)).collect();
            let mut nodes = Vec::with_capacity(a.len() * b.len() * c.len());
            let mut weights = Vec::with_capacity(nodes.capacity());
            for &(aa, wa) in &a {
                for &(bb, wb) in &b {
                    for &(cc, wc) in &c {
                        nodes.push(GroupElement::Euler { a: aa, b: bb, c: cc });
                        weights.push(wa * wb * wc);
                    }
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            Ok(QuadratureRule { group, nodes, weights, factors: Some(EulerFactors { a, b, c }) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..=12 {
            let rule = gauss_legendre(n);
            for deg in 0..2 * n {
                let approx: f64 = rule.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn sizes_and_weights() {
        let r = haar_quadrature(GroupId::SU2, 5).unwrap();
        assert_eq!(r.len(), 5 * 5 * 10);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let u = haar_quadrature(GroupId::U1, 7).unwrap();
        assert_eq!(u.len(), 7);
        assert!(haar_quadrature(GroupId::U1, 0).is_err());
    }

    #[test]
    fn custom_rules_are_validated() {
        let g = GroupElement::U1 { theta: 0.0 };
        assert!(QuadratureRule::new(GroupId::U1, vec![g], vec![1.0]).is_ok());
        assert!(QuadratureRule::new(GroupId::U1, vec![g], vec![0.5]).is_err());
        assert!(QuadratureRule::new(GroupId::SU2, vec![g], vec![1.0]).is_err());
    }
}

//! The three worked examples: phase reference, Cartesian frame, direction
//! indicator. Each has a closed-form effective channel built from identity,
//! twirl and dephasing, plus a `verify` that checks the generic codec against it.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{channel_distance, twirl, KrausChannel};
use crate::codec::{fit_moment_mixture, Codec, DecodeMethod, SystemSpec};
use crate::error::{invalid, Result};
use crate::group::IrrepLabel;
use crate::linalg::{Complex64, ComplexMatrix};
use crate::token::TokenSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioId {
    PhaseReference { n_r: u32 },
    CartesianFrame { j_r: u32 },
    DirectionIndicator { two_j_r: u32 },
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PhaseReference { n_r } => write!(f, "phase(N_R={n_r})"),
            Self::CartesianFrame { j_r } => write!(f, "cartesian(j_R={j_r})"),
            Self::DirectionIndicator { two_j_r } => write!(f, "direction(j_R={})", IrrepLabel::spin(*two_j_r)),
        }
    }
}

impl ScenarioId {
    /// Cartesian frame from a doubled spin; odd values are rejected.
    pub fn cartesian_from_two_j(two_j_r: u32) -> Result<Self> {
        if !two_j_r.is_multiple_of(2) {
            return invalid("Cartesian frame tokens need integer j_R");
        }
        let s = Self::CartesianFrame { j_r: two_j_r / 2 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::PhaseReference { n_r } => n_r >= 1,
            Self::CartesianFrame { j_r } => j_r >= 1,
            Self::DirectionIndicator { two_j_r } => two_j_r >= 1,
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("token size must be at least 1 (got {self:?})"))
        }
    }

    /// `N_R` or `j_R`.
    pub fn size(&self) -> f64 {
        match *self {
            Self::PhaseReference { n_r } => n_r as f64,
            Self::CartesianFrame { j_r } => j_r as f64,
            Self::DirectionIndicator { two_j_r } => two_j_r as f64 / 2.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::PhaseReference { .. } => "phase",
            Self::CartesianFrame { .. } => "cartesian",
            Self::DirectionIndicator { .. } => "direction",
        }
    }

    pub fn params(&self) -> BTreeMap<String, u32> {
        let (k, v) = match *self {
            Self::PhaseReference { n_r } => ("n_r", n_r),
            Self::CartesianFrame { j_r } => ("j_r", j_r),
            Self::DirectionIndicator { two_j_r } => ("two_j_r", two_j_r),
        };
        BTreeMap::from([(k.to_string(), v)])
    }

    pub fn token(&self) -> Result<TokenSpec> {
        self.validate()?;
        match *self {
            Self::PhaseReference { n_r } => TokenSpec::phase(n_r),
            Self::CartesianFrame { j_r } => TokenSpec::cartesian(j_r),
            Self::DirectionIndicator { two_j_r } => TokenSpec::coherent(two_j_r),
        }
    }

    pub fn system(&self) -> SystemSpec {
        match self {
            Self::PhaseReference { .. } => SystemSpec::u1_qubit(),
            _ => SystemSpec::spin_half(),
        }
    }

    pub fn codec(&self) -> Result<Codec> {
        Codec::new(self.token()?, self.system())
    }

    pub fn reference(&self) -> Result<ClosedFormReference> {
        match *self {
            Self::PhaseReference { n_r } => phase_reference(n_r),
            Self::CartesianFrame { j_r } => cartesian_frame(j_r),
            Self::DirectionIndicator { two_j_r } => direction_indicator(two_j_r),
        }
    }
}

/// `channel = ((1 - p) I + p G) . pre`.
#[derive(Clone, Debug)]
pub struct ClosedFormReference {
    pub scenario: ScenarioId,
    pub channel: KrausChannel,
    pub mixing_p: f64,
    pub p_perfect: f64,
    /// `D_R`.
    pub token_dimension: usize,
    pub pre_channel: Option<KrausChannel>,
}

impl ClosedFormReference {
    fn build(
        scenario: ScenarioId,
        p: f64,
        p_perfect: f64,
        token_dimension: usize,
        pre: Option<KrausChannel>,
    ) -> Result<Self> {
        let system = scenario.system();
        let g = twirl(&system.twirl_rep())?;
        let id = KrausChannel::identity(2);
        let mix = KrausChannel::mixture(&[(1.0 - p, &id), (p, &g)])?;
        let channel = match &pre {
            Some(u) => KrausChannel::compose(&mix, u)?,
            None => mix,
        };
        Ok(Self { scenario, channel, mixing_p: p, p_perfect, token_dimension, pre_channel: pre })
    }

    /// Probability of each total irrep for input `rho` (system index basis).
    pub fn sector_probabilities(&self, rho: &ComplexMatrix) -> Result<BTreeMap<IrrepLabel, f64>> {
        if rho.shape() != (2, 2) {
            return invalid("sector probabilities need a qubit state");
        }
        let (r0, r1) = (rho[(0, 0)].re, rho[(1, 1)].re);
        let d = self.token_dimension as f64;
        let mut out = BTreeMap::new();
        match self.scenario {
            ScenarioId::PhaseReference { n_r } => {
                for n in 0..=(n_r as i32 + 1) {
                    let p = if n == 0 {
                        r0
                    } else if n == n_r as i32 + 1 {
                        r1
                    } else {
                        1.0
                    };
                    out.insert(IrrepLabel::Charge(n), p / d);
                }
            }
            ScenarioId::CartesianFrame { j_r } => {
                for two_j in (1..=2 * j_r + 1).step_by(2) {
                    let p = if two_j == 2 * j_r + 1 {
                        ((2 * j_r + 1) * (j_r + 1)) as f64 / d
                    } else {
                        ((two_j + 1) * (two_j + 1)) as f64 / d
                    };
                    out.insert(IrrepLabel::spin(two_j), p);
                }
            }
            ScenarioId::DirectionIndicator { two_j_r } => {
                // Index 1 is m = +1/2, aligned with the token's |j, j>.
                let tj = two_j_r as f64;
                out.insert(IrrepLabel::spin(two_j_r + 1), tj / (tj + 1.0) * r1 + 1.0 / (tj + 1.0));
                out.insert(IrrepLabel::spin(two_j_r - 1), tj / (tj + 1.0) * r0);
            }
        }
        Ok(out)
    }
}

pub fn phase_reference(n_r: u32) -> Result<ClosedFormReference> {
    let s = ScenarioId::PhaseReference { n_r };
    s.validate()?;
    let n = n_r as f64;
    ClosedFormReference::build(s, 1.0 / (n + 1.0), n / (n + 1.0), n_r as usize + 1, None)
}

pub fn cartesian_frame(j_r: u32) -> Result<ClosedFormReference> {
    let s = ScenarioId::CartesianFrame { j_r };
    s.validate()?;
    let j = j_r as usize;
    let d_r = (2 * j + 1) * (2 * j + 3) * (j + 1) / 3;
    let jf = j_r as f64;
    ClosedFormReference::build(s, 1.0 / (jf + 1.0), 2.0 * jf / (2.0 * jf + 3.0), d_r, None)
}

pub fn direction_indicator(two_j_r: u32) -> Result<ClosedFormReference> {
    let s = ScenarioId::DirectionIndicator { two_j_r };
    s.validate()?;
    let j = two_j_r as f64 / 2.0;
    ClosedFormReference::build(s, 1.0 / (j + 1.0), 0.0, two_j_r as usize + 1, Some(z_dephasing()?))
}

/// Dephasing in the `J_z` eigenbasis of a qubit.
pub fn z_dephasing() -> Result<KrausChannel> {
    twirl(&[(IrrepLabel::Charge(0), 1), (IrrepLabel::Charge(1), 1)])
}

/// States the direction decoder reprepares on outcomes `j_R + 1/2` and `j_R - 1/2`.
pub fn direction_repreparation(two_j_r: u32) -> Result<BTreeMap<IrrepLabel, ComplexMatrix>> {
    ScenarioId::DirectionIndicator { two_j_r }.validate()?;
    let tj = two_j_r as f64;
    Ok(BTreeMap::from([
        (IrrepLabel::spin(two_j_r + 1), ComplexMatrix::from_real_diag(&[1.0 / (tj + 2.0), (tj + 1.0) / (tj + 2.0)])),
        (IrrepLabel::spin(two_j_r - 1), ComplexMatrix::from_real_diag(&[1.0, 0.0])),
    ]))
}

/// Posterior `p(state | outcome)` under a uniform prior over `m = +1/2` ("0")
/// and `m = -1/2` ("1"), keyed by (outcome irrep, state index in `[0, 1]`).
pub fn direction_posteriors(two_j_r: u32) -> Result<BTreeMap<(IrrepLabel, usize), f64>> {
    let r = direction_indicator(two_j_r)?;
    let up = r.sector_probabilities(&ComplexMatrix::from_real_diag(&[0.0, 1.0]))?;
    let down = r.sector_probabilities(&ComplexMatrix::from_real_diag(&[1.0, 0.0]))?;
    let mut out = BTreeMap::new();
    for (l, pu) in &up {
        let pd = down[l];
        out.insert((*l, 0), pu / (pu + pd));
        out.insert((*l, 1), pd / (pu + pd));
    }
    Ok(out)
}

/// Measure total spin on token (x) system and reprepare the more likely state:
/// `m = +1/2` on `j_R + 1/2`, `m = -1/2` on `j_R - 1/2`.
pub fn direction_optimal_decoder(two_j_r: u32) -> Result<KrausChannel> {
    let codec = ScenarioId::DirectionIndicator { two_j_r }.codec()?;
    let n = codec.joint_dim();
    let mut kraus = Vec::new();
    for s in &codec.sectors().sectors {
        let target = if s.label == IrrepLabel::spin(two_j_r + 1) { 1 } else { 0 };
        for c in 0..s.isometry.cols() {
            kraus.push(ComplexMatrix::from_fn(2, n, |r, k| {
                if r == target {
                    s.isometry[(k, c)].conj()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }));
        }
    }
    KrausChannel::classify(kraus)
}

/// The relational (adjoint-form) direction decoder as a channel on token (x) system.
pub fn direction_adjoint_decoder(two_j_r: u32) -> Result<KrausChannel> {
    let codec = ScenarioId::DirectionIndicator { two_j_r }.codec()?;
    KrausChannel::from_linear_map(codec.joint_dim(), 2, |x| codec.decode_relational(x))
}

/// Average fidelity of `decoder . E` over the two `J_z` eigenstates.
pub fn direction_average_fidelity(two_j_r: u32, decoder: &KrausChannel) -> Result<f64> {
    let codec = ScenarioId::DirectionIndicator { two_j_r }.codec()?;
    let mut total = 0.0;
    for k in 0..2 {
        let rho = ComplexMatrix::unit(2, 2, k, k);
        let out = decoder.apply(&codec.encode_block(&rho)?.state)?;
        total += out[(k, k)].re;
    }
    Ok(total / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, pass: value.is_finite() && value <= tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub params: BTreeMap<String, u32>,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn test_inputs() -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let vecs = [
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
        vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
    ];
    vecs.iter().map(|v| ComplexMatrix::outer(v, v)).collect()
}

/// Compare the generic codec (both decoders) with the closed form.
pub fn verify(scenario: ScenarioId, tol: f64) -> Result<VerifyReport> {
    if tol.is_nan() || tol <= 0.0 {
        return invalid("tolerance must be positive");
    }
    let reference = scenario.reference()?;
    let codec = scenario.codec()?;
    let quad = codec.default_quadrature()?;
    let relational = codec.effective_channel(DecodeMethod::Relational, None)?;
    let integral = codec.effective_channel(DecodeMethod::Integral, Some(&quad))?;
    let reorient = codec.measure_reorient_channel(&quad)?;

    let mut checks = vec![
        Check::new("relational_choi_distance", channel_distance(&relational, &reference.channel)?, tol),
        Check::new("integral_choi_distance", channel_distance(&integral, &reference.channel)?, tol),
        Check::new("measure_reorient_vs_relational", channel_distance(&reorient, &relational)?, tol),
    ];
    let fit = fit_moment_mixture(&relational, &scenario.system(), reference.pre_channel.as_ref())?;
    checks.push(Check::new("mixing_p_deviation", (fit.p - reference.mixing_p).abs(), tol));

    let mut dev: f64 = 0.0;
    for rho in test_inputs() {
        // Projected from the assembled joint state, not from the sector blocks.
        let state = codec.encode_block(&rho)?.state;
        let got: BTreeMap<IrrepLabel, f64> = codec
            .sectors()
            .sectors
            .iter()
            .map(|s| Ok((s.label, codec.sector_component(s.label, &state)?.trace().re)))
            .collect::<Result<_>>()?;
        let want = reference.sector_probabilities(&rho)?;
        for (l, p) in &want {
            dev = dev.max((got.get(l).copied().unwrap_or(0.0) - p).abs());
        }
        for (l, p) in &got {
            if !want.contains_key(l) {
                dev = dev.max(p.abs());
            }
        }
    }
    checks.push(Check::new("sector_probability_deviation", dev, tol));
    checks.push(Check::new("p_perfect_deviation", (codec.p_perfect() - reference.p_perfect).abs(), tol));
    checks.push(Check::new(
        "token_dimension_deviation",
        (codec.token().dimension() as f64 - reference.token_dimension as f64).abs(),
        tol,
    ));

    if let ScenarioId::DirectionIndicator { two_j_r } = scenario {
        let mut dev: f64 = 0.0;
        for (l, want) in direction_repreparation(two_j_r)? {
            let got = codec.sector_recovery(l, &ComplexMatrix::identity(1))?;
            dev = dev.max(got.max_abs_diff(&want));
        }
        checks.push(Check::new("repreparation_deviation", dev, tol));
    }
    Ok(VerifyReport { scenario: scenario.name().into(), params: scenario.params(), checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin(two_j: u32) -> IrrepLabel {
        IrrepLabel::spin(two_j)
    }

    #[test]
    fn phase_closed_forms() {
        let r = phase_reference(1).unwrap();
        assert_eq!(r.mixing_p, 0.5);
        assert_eq!(r.p_perfect, 0.5);
        assert!((phase_reference(1000).unwrap().mixing_p - 1.0 / 1001.0).abs() < 1e-15);
        let n = 3.0;
        let plus = ComplexMatrix::from_fn(2, 2, |_, _| Complex64::new(0.5, 0.0));
        let out = phase_reference(3).unwrap().channel.apply(&plus).unwrap();
        assert!((2.0 * out[(0, 1)].re - n / (n + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn phase_sector_cases() {
        let r = phase_reference(2).unwrap();
        let rho = ComplexMatrix::from_real_diag(&[0.7, 0.3]);
        let p = r.sector_probabilities(&rho).unwrap();
        let want = [0.7 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.3 / 3.0];
        for (n, w) in want.iter().enumerate() {
            assert!((p[&IrrepLabel::Charge(n as i32)] - w).abs() < 1e-15);
        }
    }

    #[test]
    fn cartesian_closed_forms() {
        let r = cartesian_frame(1).unwrap();
        assert_eq!(r.token_dimension, 10);
        assert_eq!(r.mixing_p, 0.5);
        assert!((r.p_perfect - 0.4).abs() < 1e-15);
        let p = r.sector_probabilities(&ComplexMatrix::identity(2).scale_real(0.5)).unwrap();
        assert!((p[&spin(1)] - 0.4).abs() < 1e-15 && (p[&spin(3)] - 0.6).abs() < 1e-15);
        for j in 1..=6 {
            let r = cartesian_frame(j).unwrap();
            let total: f64 = r.sector_probabilities(&ComplexMatrix::identity(2)).unwrap().values().sum();
            assert!((total - 1.0).abs() < 1e-12, "j_R = {j}");
        }
    }

    #[test]
    fn cartesian_bloch_scaling() {
        let b = cartesian_frame(3).unwrap().channel.bloch_map().unwrap();
        for i in 0..3 {
            for k in 0..3 {
                let want = if i == k { 0.75 } else { 0.0 };
                assert!((b.matrix[i][k] - want).abs() < 1e-12);
            }
            assert!(b.offset[i].abs() < 1e-12);
        }
    }

    #[test]
    fn cartesian_from_two_j_rejects_odd() {
        assert!(ScenarioId::cartesian_from_two_j(3).is_err());
        assert_eq!(ScenarioId::cartesian_from_two_j(4).unwrap(), ScenarioId::CartesianFrame { j_r: 2 });
        assert!(cartesian_frame(0).is_err());
        assert!(phase_reference(0).is_err());
        assert!(direction_indicator(0).is_err());
    }

    #[test]
    fn direction_closed_forms() {
        let r = direction_indicator(1).unwrap();
        assert_eq!(r.p_perfect, 0.0);
        let b = r.channel.bloch_map().unwrap();
        let want = [0.0, 0.0, 1.0 / 3.0];
        for (i, row) in b.matrix.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let w = if i == k { want[i] } else { 0.0 };
                assert!((v - w).abs() < 1e-12);
            }
        }
        let up = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let p = r.sector_probabilities(&up).unwrap();
        assert!((p[&spin(2)] - 1.0).abs() < 1e-15 && p[&spin(0)].abs() < 1e-15);
        let rep = direction_repreparation(2).unwrap();
        assert!(rep[&spin(3)].approx_eq(&ComplexMatrix::from_real_diag(&[0.25, 0.75]), 1e-15));
        assert!(rep[&spin(1)].approx_eq(&ComplexMatrix::from_real_diag(&[1.0, 0.0]), 0.0));
    }

    #[test]
    fn direction_posterior_table() {
        let p = direction_posteriors(2).unwrap();
        assert!((p[&(spin(3), 0)] - 0.75).abs() < 1e-15);
        assert!((p[&(spin(3), 1)] - 0.25).abs() < 1e-15);
        assert!((p[&(spin(1), 1)] - 1.0).abs() < 1e-15);
        assert!(p[&(spin(1), 0)].abs() < 1e-15);
    }

    #[test]
    fn direction_decoders_compare() {
        for two_j in 1..=8u32 {
            let j = two_j as f64 / 2.0;
            let opt = direction_average_fidelity(two_j, &direction_optimal_decoder(two_j).unwrap()).unwrap();
            let adj = direction_average_fidelity(two_j, &direction_adjoint_decoder(two_j).unwrap()).unwrap();
            // Branch enumeration: '+' given m = -1/2 has probability 1/(2j+1).
            assert!((opt - (1.0 - 0.5 / (2.0 * j + 1.0))).abs() < 1e-10, "two_j = {two_j}");
            assert!((adj - (1.0 - 0.5 / (j + 1.0))).abs() < 1e-10, "two_j = {two_j}");
            assert!(opt > adj);
        }
    }

    #[test]
    fn optimal_decoder_on_down_state() {
        let two_j = 2;
        let codec = ScenarioId::DirectionIndicator { two_j_r: two_j }.codec().unwrap();
        let dec = direction_optimal_decoder(two_j).unwrap();
        let out = dec.apply(&codec.encode_block(&ComplexMatrix::from_real_diag(&[1.0, 0.0])).unwrap().state).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::from_real_diag(&[2.0 / 3.0, 1.0 / 3.0]), 1e-12));
    }

    #[test]
    fn verify_examples_pass() {
        for (s, tol) in [
            (ScenarioId::PhaseReference { n_r: 4 }, 1e-9),
            (ScenarioId::CartesianFrame { j_r: 2 }, 1e-8),
            (ScenarioId::DirectionIndicator { two_j_r: 1 }, 1e-8),
        ] {
            let rep = verify(s, tol).unwrap();
            assert!(rep.passed(), "{rep:?}");
            let back: VerifyReport = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
            assert_eq!(back, rep);
        }
    }

    #[test]
    fn verify_fails_below_noise() {
        let rep = verify(ScenarioId::CartesianFrame { j_r: 1 }, 1e-15).unwrap();
        assert!(!rep.passed());
    }
}

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qrf_core::codec::sample_outcome;
use qrf_core::group::haar_quadrature;
use qrf_core::{
    fit_moment_mixture, verify, Complex64, ComplexMatrix, DecodeMethod, KrausChannel, ScenarioId, VerifyReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{default_grid, scenario_at, Format, Metric, Options, ScenarioKind};
use crate::{CliError, UsageError};

const DEFAULT_TOL: f64 = 1e-8;
const DEFAULT_SAMPLES: usize = 1000;

/// Shortest round-trip decimal; exponent form for very small or large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Failed(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Effective channel of one scenario, with its fitted mixing parameter.
fn effective(id: ScenarioId, method: DecodeMethod, order: Option<usize>) -> Result<KrausChannel, CliError> {
    let codec = id.codec()?;
    let quad = match (method, order) {
        (DecodeMethod::Integral, Some(n)) => Some(haar_quadrature(codec.token().group(), n)?),
        _ => None,
    };
    Ok(codec.effective_channel(method, quad.as_ref())?)
}

fn mixing_fit(id: ScenarioId, ch: &KrausChannel) -> Result<qrf_core::MomentFit, CliError> {
    let pre = id.reference()?.pre_channel;
    Ok(fit_moment_mixture(ch, &id.system(), pre.as_ref())?)
}

pub fn channel(opts: &Options) -> Result<(), CliError> {
    let id = opts.scenario_id()?;
    if opts.format == Some(Format::Csv) {
        return Err(UsageError("channel output is JSON only".into()).into());
    }
    let method: DecodeMethod = opts.method.map(Into::into).unwrap_or(DecodeMethod::Relational);
    let ch = effective(id, method, opts.order)?;
    let fit = mixing_fit(id, &ch)?;
    let out = opts.out.clone().unwrap_or_else(|| PathBuf::from("channel.json"));
    emit(Some(&out), &ch.to_json()?)?;
    println!("scenario = {id}");
    println!("mixing_p = {}", num(fit.p));
    println!("residual = {}", num(fit.residual));
    println!("written = {}", out.display());
    Ok(())
}

fn verify_grid(opts: &Options) -> Result<Vec<ScenarioId>, CliError> {
    let sized = opts.nr.is_some() || opts.jr.is_some() || opts.two_jr.is_some();
    Ok(match opts.scenario {
        Some(_) if sized => vec![opts.scenario_id()?],
        Some(kind) => default_grid(kind).map(|s| scenario_at(kind, s)).collect(),
        None => [ScenarioKind::Phase, ScenarioKind::Cartesian, ScenarioKind::Direction]
            .into_iter()
            .flat_map(|k| default_grid(k).map(move |s| scenario_at(k, s)))
            .collect(),
    })
}

pub fn verify_csv(reports: &[VerifyReport]) -> String {
    let mut s = String::from("scenario,params,check,value,tol,pass\n");
    for r in reports {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        for c in &r.checks {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.scenario,
                params.join(";"),
                c.name,
                num(c.value),
                num(c.tol),
                c.pass
            );
        }
    }
    s
}

/// Returns whether every check passed.
pub fn verify_cmd(opts: &Options) -> Result<bool, CliError> {
    let tol = opts.tol.unwrap_or(DEFAULT_TOL);
    let grid = verify_grid(opts)?;
    let reports: Vec<VerifyReport> = grid.par_iter().map(|&id| verify(id, tol)).collect::<Result<_, _>>()?;
    for (id, r) in grid.iter().zip(&reports) {
        let failed: Vec<&str> = r.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        let status = if failed.is_empty() { "pass".to_string() } else { format!("FAIL ({})", failed.join(", ")) };
        if opts.out.is_some() {
            println!("{id}: {status}");
        } else {
            eprintln!("{id}: {status}");
        }
    }
    let text = match opts.format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&reports).map_err(qrf_core::Error::from)? + "\n",
        Format::Csv => verify_csv(&reports),
    };
    emit(opts.out.as_deref(), &text)?;
    Ok(reports.iter().all(VerifyReport::passed))
}

#[derive(Serialize)]
struct SweepRow {
    size: f64,
    value: f64,
}

fn metric_value(
    id: ScenarioId,
    metric: Metric,
    method: Option<DecodeMethod>,
    order: Option<usize>,
) -> Result<f64, CliError> {
    match method {
        None => {
            let r = id.reference()?;
            Ok(match metric {
                Metric::MixingP => r.mixing_p,
                Metric::PPerfect => r.p_perfect,
                Metric::EntanglementFidelity => r.channel.entanglement_fidelity()?,
            })
        }
        Some(m) => match metric {
            Metric::PPerfect => Ok(id.codec()?.p_perfect()),
            Metric::MixingP => Ok(mixing_fit(id, &effective(id, m, order)?)?.p),
            Metric::EntanglementFidelity => Ok(effective(id, m, order)?.entanglement_fidelity()?),
        },
    }
}

pub fn sweep(opts: &Options) -> Result<(), CliError> {
    let kind = opts.scenario.ok_or_else(|| UsageError("--scenario is required".into()))?;
    let metric = opts.metric.ok_or_else(|| UsageError("--metric is required".into()))?;
    let (from, to) = match (opts.from, opts.to) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(UsageError("--from and --to are required".into()).into()),
    };
    if from == 0 || from > to {
        return Err(UsageError(format!("empty size range {from}..={to}")).into());
    }
    // Closed forms unless a codec method is asked for explicitly.
    let method = opts.method.map(DecodeMethod::from);
    let ids: Vec<ScenarioId> = (from..=to).map(|s| scenario_at(kind, s)).collect();
    let rows: Vec<SweepRow> = ids
        .par_iter()
        .map(|&id| Ok(SweepRow { size: id.size(), value: metric_value(id, metric, method, opts.order)? }))
        .collect::<Result<_, CliError>>()?;
    let text = match opts.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("size,metric_value\n");
            for r in &rows {
                let _ = writeln!(s, "{},{}", num(r.size), num(r.value));
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(&rows).map_err(qrf_core::Error::from)? + "\n",
    };
    emit(opts.out.as_deref(), &text)
}

fn parse_input(s: &str) -> Result<Vec<Complex64>, CliError> {
    let v: Vec<[f64; 2]> =
        serde_json::from_str(s).map_err(|e| UsageError(format!("--input must be [[re, im], [re, im]]: {e}")))?;
    if v.len() != 2 {
        return Err(UsageError("--input must have two amplitudes".into()).into());
    }
    Ok(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}

fn random_input(rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> =
            (0..2).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if n > 1e-3 && n <= 1.0 {
            return v;
        }
    }
}

#[derive(Serialize)]
struct PostselectLog {
    scenario: String,
    params: BTreeMap<String, u32>,
    seed: u64,
    samples: usize,
    input: Vec<[f64; 2]>,
    p_perfect: f64,
    perfect_rate: f64,
    standard_error: f64,
    counts: BTreeMap<String, usize>,
    outcomes: Vec<String>,
}

pub fn postselect(opts: &Options) -> Result<(), CliError> {
    let id = opts.scenario_id()?;
    let seed = opts.seed.unwrap_or(0);
    let samples = opts.samples.unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(UsageError("--samples must be at least 1".into()).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = match &opts.input {
        Some(s) => parse_input(s)?,
        None => random_input(&mut rng),
    };
    let rho = qrf_core::DensityOperator::pure(&amps)?;
    let codec = id.codec()?;
    let outcomes = codec.postselection_outcomes(&codec.encode_block(rho.matrix())?.state)?;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut log = Vec::with_capacity(samples);
    let mut hits = 0usize;
    for _ in 0..samples {
        let o = &outcomes[sample_outcome(&outcomes, &mut rng)?];
        hits += o.perfect as usize;
        let label = o.label.to_string();
        *counts.entry(label.clone()).or_default() += 1;
        log.push(label);
    }
    let rate = hits as f64 / samples as f64;
    let se = (rate * (1.0 - rate) / samples as f64).sqrt();
    let normed = ComplexMatrix::column(&amps);
    let norm = normed.frobenius_norm();
    let report = PostselectLog {
        scenario: id.name().into(),
        params: id.params(),
        seed,
        samples,
        input: amps.iter().map(|z| [z.re / norm, z.im / norm]).collect(),
        p_perfect: codec.p_perfect(),
        perfect_rate: rate,
        standard_error: se,
        counts,
        outcomes: log,
    };
    println!("scenario = {id}");
    println!("perfect_rate = {}", num(rate));
    println!("standard_error = {}", num(se));
    println!("p_perfect = {}", num(report.p_perfect));
    let text = match opts.format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&report).map_err(qrf_core::Error::from)? + "\n",
        Format::Csv => {
            let mut s = String::from("sample,outcome\n");
            for (k, l) in report.outcomes.iter().enumerate() {
                let _ = writeln!(s, "{k},{l}");
            }
            s
        }
    };
    match &opts.out {
        Some(p) => emit(Some(p), &text),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0 / 3.0, 0.8333333333333334, 4.775249788392737e-16, 1e20, -2.5e-7, 0.25] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.25), "0.25");
        assert!(num(4.7e-16).contains('e'));
    }

    #[test]
    fn input_parsing() {
        assert_eq!(parse_input("[[1, 0], [0, 1]]").unwrap()[1], Complex64::new(0.0, 1.0));
        assert!(parse_input("[[1, 0]]").is_err());
        assert!(parse_input("nope").is_err());
    }
}

//! Synthetic scenarios, trial execution, and parameter sweeps.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frft::{frfs_synthesize, ComplexSignal, FrfsCoefficients, FrftAngle, TimeAxis};
use crate::modulo::{centered_modulo, count_folds_periodic, fold_samples, residual, ModuloParams};
use crate::reconstruction::{reconstruct, ReconstructionReport, SamplingCriterion};
use crate::{Folded, Residual, SeriesCoefficients, Signal};

/// A trial passes when the aligned relative RMSE is below this.
pub const PASS_RMSE: f64 = 1e-6;
/// Points per period of the reference grid used to set the peak amplitude.
pub const PEAK_GRID: usize = 4096;

/// How the ground-truth waveform is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalModel {
    /// Finite chirp-basis series with 2R+1 random coefficients.
    #[default]
    Frfs,
    /// Sequence whose circular increments, once dechirped, occupy only the
    /// 2R+1 lowest DFT bins. Coincides with `Frfs` at α = π/2.
    BandlimitedIncrements,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignalSpec {
    pub alpha: f64,
    pub sigma: f64,
    pub band_index: usize,
    /// Peak component amplitude as a multiple of λ.
    pub amplitude_scale: f64,
    pub seed: u64,
    pub model: SignalModel,
}

impl SignalSpec {
    pub fn new(alpha: f64, sigma: f64, band_index: usize, amplitude_scale: f64, seed: u64) -> Self {
        SignalSpec { alpha, sigma, band_index, amplitude_scale, seed, model: SignalModel::Frfs }
    }

    fn validate(&self) -> Result<FrftAngle<f64>> {
        if !(self.amplitude_scale > 0.0) || !self.amplitude_scale.is_finite() {
            return Err(Error::InvalidParameter { name: "amplitude_scale", reason: "must be positive".into() });
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter { name: "sigma", reason: "must be positive".into() });
        }
        let alpha = FrftAngle::new(self.alpha)?;
        if alpha.degenerate().is_some() {
            return Err(Error::DegenerateAngle { alpha: self.alpha });
        }
        Ok(alpha)
    }
}

/// Seed for stream `stream` of a base seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.gen()
}

fn draw_coefficients(rng: &mut ChaCha8Rng, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|_| {
            let mag = rng.gen_range(0.3..=1.0);
            let phase = rng.gen_range(0.0..2.0 * PI);
            Complex64::from_polar(mag, phase)
        })
        .collect()
}

fn peak_component(x: &[Complex64]) -> f64 {
    x.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()))
}

/// Draws one period of a ground-truth signal on the Q-point grid and its
/// generating coefficients, scaled so the peak component is β·λ.
///
/// For the series model the peak is taken on a fine reference grid, so the
/// continuous waveform does not depend on Q. For the increments model the
/// coefficients are the DFT weights of the dechirped increments.
pub fn generate_signal(spec: &SignalSpec, q: usize, lambda: f64) -> Result<(Signal, SeriesCoefficients)> {
    let alpha = spec.validate()?;
    let r = spec.band_index;
    if q < 2 * r + 1 {
        return Err(Error::InsufficientSamples { needed: 2 * r + 1, have: q });
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter { name: "lambda", reason: "must be positive".into() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let signed = draw_coefficients(&mut rng, 2 * r + 1);
    let target = spec.amplitude_scale * lambda;
    match spec.model {
        SignalModel::Frfs => {
            let coeffs = FrfsCoefficients::from_signed(&signed, spec.sigma)?;
            let fine = TimeAxis::period(spec.sigma, PEAK_GRID.max(16 * q));
            let fine_t: Vec<f64> = (0..PEAK_GRID.max(16 * q)).map(|k| fine.t(k)).collect();
            let peak = peak_component(&frfs_synthesize(&coeffs, alpha, &fine_t)?);
            let scale = target / peak;
            let coeffs = FrfsCoefficients::new(coeffs.coeffs.iter().map(|c| c * scale).collect(), r, spec.sigma)?;
            let axis = TimeAxis::period(spec.sigma, q);
            let times: Vec<f64> = (0..q).map(|k| axis.t(k)).collect();
            let samples = frfs_synthesize(&coeffs, alpha, &times)?;
            Ok((ComplexSignal { samples, axis, sigma: spec.sigma }, coeffs))
        }
        SignalModel::BandlimitedIncrements => {
            let (samples, weights) = increments_signal(&signed, alpha, spec.sigma, q)?;
            let scale = target / peak_component(&samples);
            let samples = samples.iter().map(|z| z * scale).collect();
            let weights: Vec<Complex64> = weights.iter().map(|z| z * scale).collect();
            let coeffs = FrfsCoefficients::from_signed(&weights, spec.sigma)?;
            Ok((ComplexSignal::on_period(samples, spec.sigma)?, coeffs))
        }
    }
}

// f̄[k] = e^{−jγt_k²}·b[k] with b in the span of e^{j2πwk/Q}, |w| ≤ R; the
// w = 0 weight is solved so that Σ f̄ = 0 and the running sum closes on itself.
fn increments_signal(signed: &[Complex64], alpha: FrftAngle<f64>, sigma: f64, q: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let r = signed.len() / 2;
    let axis = TimeAxis::period(sigma, q);
    let g = alpha.gamma();
    let dechirp: Vec<Complex64> = (0..q).map(|k| Complex64::from_polar(1.0, -g * axis.t(k).powi(2))).collect();
    let mode = |w: i64, k: usize| Complex64::from_polar(1.0, 2.0 * PI * (w * k as i64).rem_euclid(q as i64) as f64 / q as f64);
    let rest: Vec<Complex64> =
        (0..q).map(|k| (0..signed.len()).filter(|&i| i != r).map(|i| signed[i] * mode(i as i64 - r as i64, k)).sum()).collect();
    let denom: Complex64 = dechirp.iter().sum();
    if denom.norm() < 1e-9 * q as f64 {
        return Err(Error::InvalidParameter { name: "alpha", reason: "chirp sum vanishes on this grid".into() });
    }
    let num: Complex64 = dechirp.iter().zip(&rest).map(|(c, b)| c * b).sum();
    let b0 = -num / denom;
    let mut weights = signed.to_vec();
    weights[r] = b0;
    let incr: Vec<Complex64> = dechirp.iter().zip(&rest).map(|(c, b)| c * (b + b0)).collect();
    let mut f = Vec::with_capacity(q);
    let mut acc = Complex64::new(0.0, 0.0);
    for d in &incr {
        f.push(acc);
        acc += d;
    }
    let mean: Complex64 = f.iter().sum::<Complex64>() / q as f64;
    Ok((f.iter().map(|z| z - mean).collect(), weights))
}

/// ‖a − b‖₂ / ‖b‖₂.
pub fn rel_rmse(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: b.len(), got: a.len() });
    }
    let den = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    Ok(num / den)
}

/// Multiple of 2λ (per component) closest to the mean of `truth − recovered`.
pub fn truth_alignment(recovered: &[Complex64], truth: &[Complex64], lambda: f64) -> Complex64 {
    let n = truth.len().max(1) as f64;
    let mean: Complex64 = truth.iter().zip(recovered).map(|(t, r)| t - r).sum::<Complex64>() / n;
    let two_l = 2.0 * lambda;
    Complex64::new(two_l * (mean.re / two_l).round(), two_l * (mean.im / two_l).round())
}

/// Largest wrap-aware componentwise distance between M_λ(recovered) and h.
pub fn refold_error(recovered: &[Complex64], h: &[Complex64], lambda: f64) -> f64 {
    recovered
        .iter()
        .zip(h)
        .map(|(r, m)| {
            let d = r - m;
            let re = centered_modulo(d.re, lambda).map(f64::abs).unwrap_or(f64::INFINITY);
            let im = centered_modulo(d.im, lambda).map(f64::abs).unwrap_or(f64::INFINITY);
            re.max(im)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    CriterionViolation,
    EstimationFailure,
    SnapFailure,
    NoConvergence,
    OffCircleRoot,
    RankDeficient,
    SingularSystem,
    InsufficientSamples,
    AccuracyExceeded,
    InvalidInput,
}

impl FailureKind {
    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::CriterionViolation { .. } => FailureKind::CriterionViolation,
            Error::EstimationFailure { .. } => FailureKind::EstimationFailure,
            Error::SnapFailure { .. } => FailureKind::SnapFailure,
            Error::NoConvergence { .. } => FailureKind::NoConvergence,
            Error::OffCircleRoot { .. } => FailureKind::OffCircleRoot,
            Error::RankDeficient => FailureKind::RankDeficient,
            Error::SingularSystem => FailureKind::SingularSystem,
            Error::InsufficientSamples { .. } => FailureKind::InsufficientSamples,
            _ => FailureKind::InvalidInput,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            FailureKind::CriterionViolation => "criterion_violation",
            FailureKind::EstimationFailure => "estimation_failure",
            FailureKind::SnapFailure => "snap_failure",
            FailureKind::NoConvergence => "no_convergence",
            FailureKind::OffCircleRoot => "off_circle_root",
            FailureKind::RankDeficient => "rank_deficient",
            FailureKind::SingularSystem => "singular_system",
            FailureKind::InsufficientSamples => "insufficient_samples",
            FailureKind::AccuracyExceeded => "accuracy_exceeded",
            FailureKind::InvalidInput => "invalid_input",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub passed: bool,
    /// Relative RMSE after ground-truth alignment; NaN when nothing was recovered.
    pub rel_rmse: f64,
    /// Folds per period of the simulated residual (wrap included).
    pub realized_folds: usize,
    pub m_budget: usize,
    pub q: usize,
    pub required_q: usize,
    /// Ground-truth alignment added on top of the pipeline's own constant.
    pub offset: Complex64,
    pub pipeline_offset: Complex64,
    pub spikes_found: usize,
    pub fit_residual: f64,
    pub refold_error: f64,
    pub failure_kind: Option<FailureKind>,
}

/// Everything a trial touches, for callers that need the intermediate data.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub truth: Signal,
    pub coeffs: SeriesCoefficients,
    pub folded: Folded,
    pub residual: Residual,
    pub realized_folds: usize,
}

pub fn simulate(spec: &SignalSpec, q: usize, lambda: f64) -> Result<Simulation> {
    let (truth, coeffs) = generate_signal(spec, q, lambda)?;
    let folded = fold_samples(&truth, ModuloParams::new(lambda)?)?;
    let residual = residual(&truth, &folded)?;
    let realized_folds = count_folds_periodic(&residual);
    Ok(Simulation { truth, coeffs, folded, residual, realized_folds })
}

/// Generate, fold, reconstruct, align against ground truth, and score.
///
/// `m_budget = None` uses the realized fold count.
pub fn run_trial(spec: &SignalSpec, q: usize, m_budget: Option<usize>, lambda: f64) -> TrialResult {
    let mut result = TrialResult {
        passed: false,
        rel_rmse: f64::NAN,
        realized_folds: 0,
        m_budget: m_budget.unwrap_or(0),
        q,
        required_q: 0,
        offset: Complex64::new(0.0, 0.0),
        pipeline_offset: Complex64::new(0.0, 0.0),
        spikes_found: 0,
        fit_residual: f64::NAN,
        refold_error: f64::NAN,
        failure_kind: None,
    };
    let sim = match simulate(spec, q, lambda) {
        Ok(s) => s,
        Err(e) => {
            result.failure_kind = Some(FailureKind::from_error(&e));
            return result;
        }
    };
    result.realized_folds = sim.realized_folds;
    let m = m_budget.unwrap_or(sim.realized_folds);
    result.m_budget = m;
    result.required_q = 2 * (spec.band_index + m + 1);
    let outcome = FrftAngle::new(spec.alpha)
        .and_then(|alpha| SamplingCriterion::from_band_index(spec.band_index, spec.sigma, alpha, m, q))
        .and_then(|cfg| reconstruct(&sim.folded, &cfg));
    match outcome {
        Ok(report) => score(&mut result, &sim, &report, lambda),
        Err(e) => result.failure_kind = Some(FailureKind::from_error(&e)),
    }
    result
}

fn score(result: &mut TrialResult, sim: &Simulation, report: &ReconstructionReport<f64>, lambda: f64) {
    let rec = &report.recovered.samples;
    let truth = &sim.truth.samples;
    result.pipeline_offset = report.constant_offset;
    result.spikes_found = report.spikes.count();
    result.fit_residual = report.annihilation_residual;
    result.refold_error = refold_error(rec, &sim.folded.samples, lambda);
    let offset = truth_alignment(rec, truth, lambda);
    result.offset = offset;
    let aligned: Vec<Complex64> = rec.iter().map(|z| z + offset).collect();
    result.rel_rmse = rel_rmse(&aligned, truth).unwrap_or(f64::NAN);
    result.passed = result.rel_rmse < PASS_RMSE;
    if !result.passed {
        result.failure_kind = Some(FailureKind::AccuracyExceeded);
    }
}

/// Smallest Q with Q = 2(R + M(Q) + 1) + `offset`, where M(Q) is the realized
/// per-period fold count at Q. Returns (Q, M).
pub fn find_boundary_q(spec: &SignalSpec, lambda: f64, offset: i64, q_max: usize) -> Result<Option<(usize, usize)>> {
    let r = spec.band_index;
    for q in (2 * r + 1).max(2)..=q_max {
        let sim = simulate(spec, q, lambda)?;
        let m = sim.realized_folds;
        if q as i64 == 2 * (r + m + 1) as i64 + offset {
            return Ok(Some((q, m)));
        }
    }
    Ok(None)
}

/// Fixed parameters shared by every cell of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepBase {
    pub sigma: f64,
    pub band_index: usize,
    pub lambda: f64,
    pub model: SignalModel,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepGrid {
    pub amplitude_scales: Vec<f64>,
    pub qs: Vec<usize>,
    /// `None` entries use the realized fold count of each trial.
    pub m_budgets: Vec<Option<usize>>,
    pub alphas: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl SweepGrid {
    fn is_empty(&self) -> bool {
        self.amplitude_scales.is_empty()
            || self.qs.is_empty()
            || self.m_budgets.is_empty()
            || self.alphas.is_empty()
            || self.seeds.is_empty()
    }
}

/// Aggregate over the seeds of one (α, β, Q, M) cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub amplitude_scale: f64,
    pub q: usize,
    pub m_budget: String,
    pub trials: usize,
    pub passed: usize,
    pub pass_rate: f64,
    pub rmse_median: f64,
    pub rmse_p90: f64,
    pub rmse_max: f64,
    pub folds_mean: f64,
    pub required_q_max: usize,
    pub failures: String,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Runs every (α, β, Q, M, seed) combination in parallel on the current rayon
/// pool and aggregates per cell.
///
/// The waveform of a trial depends only on the seed and the index of α, so
/// cells that differ in β, Q, or M see the same underlying signal.
pub fn sweep(base: &SweepBase, grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter { name: "sweep", reason: "every grid axis needs at least one value".into() });
    }
    let mut jobs = Vec::new();
    for (ai, &alpha) in grid.alphas.iter().enumerate() {
        for &beta in &grid.amplitude_scales {
            for &q in &grid.qs {
                for &m in &grid.m_budgets {
                    jobs.push((ai, alpha, beta, q, m));
                }
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(ai, alpha, beta, q, m)| {
            let trials: Vec<TrialResult> = grid
                .seeds
                .iter()
                .map(|&seed| {
                    let spec = SignalSpec {
                        alpha,
                        sigma: base.sigma,
                        band_index: base.band_index,
                        amplitude_scale: beta,
                        seed: derive_seed(seed, ai as u64),
                        model: base.model,
                    };
                    run_trial(&spec, q, m, base.lambda)
                })
                .collect();
            aggregate(alpha, beta, q, m, &trials)
        })
        .collect();
    Ok(rows)
}

fn aggregate(alpha: f64, beta: f64, q: usize, m: Option<usize>, trials: &[TrialResult]) -> SweepRow {
    let passed = trials.iter().filter(|t| t.passed).count();
    let mut rmse: Vec<f64> = trials.iter().map(|t| t.rel_rmse).filter(|x| x.is_finite()).collect();
    rmse.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut failures: BTreeMap<&'static str, usize> = BTreeMap::new();
    for t in trials {
        if let Some(k) = t.failure_kind {
            *failures.entry(k.tag()).or_default() += 1;
        }
    }
    let n = trials.len();
    SweepRow {
        alpha,
        amplitude_scale: beta,
        q,
        m_budget: m.map_or_else(|| "realized".to_string(), |v| v.to_string()),
        trials: n,
        passed,
        pass_rate: passed as f64 / n.max(1) as f64,
        rmse_median: quantile(&rmse, 0.5),
        rmse_p90: quantile(&rmse, 0.9),
        rmse_max: rmse.last().copied().unwrap_or(f64::NAN),
        folds_mean: trials.iter().map(|t| t.realized_folds as f64).sum::<f64>() / n.max(1) as f64,
        required_q_max: trials.iter().map(|t| t.required_q).max().unwrap_or(0),
        failures: failures.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(";"),
    }
}

/// One point of a plot-data series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

/// Pass rate against Q, one series per (α, β, M).
pub fn pass_rate_vs_q(rows: &[SweepRow]) -> Vec<PlotPoint> {
    let mut pts: Vec<PlotPoint> = rows
        .iter()
        .map(|r| PlotPoint {
            series: format!("alpha={};beta={};m={}", r.alpha, r.amplitude_scale, r.m_budget),
            x: r.q as f64,
            y: r.pass_rate,
        })
        .collect();
    pts.sort_by(|a, b| a.series.cmp(&b.series).then(a.x.partial_cmp(&b.x).unwrap()));
    pts
}

/// Median relative RMSE against β, one series per (α, Q, M).
pub fn rmse_vs_beta(rows: &[SweepRow]) -> Vec<PlotPoint> {
    let mut pts: Vec<PlotPoint> = rows
        .iter()
        .map(|r| PlotPoint { series: format!("alpha={};q={};m={}", r.alpha, r.q, r.m_budget), x: r.amplitude_scale, y: r.rmse_median })
        .collect();
    pts.sort_by(|a, b| a.series.cmp(&b.series).then(a.x.partial_cmp(&b.x).unwrap()));
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(alpha: f64, r: usize, beta: f64, seed: u64) -> SignalSpec {
        SignalSpec::new(alpha, 1.0, r, beta, seed)
    }

    #[test]
    fn small_amplitude_never_folds() {
        for seed in 0..10 {
            let (x, _) = generate_signal(&spec(PI / 4.0, 3, 0.5, seed), 20, 1.0).unwrap();
            assert!(peak_component(&x.samples) < 1.0);
            assert!(peak_component(&x.samples) <= 0.5 * (1.0 + 1e-3));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let s = spec(0.9, 2, 3.0, 42);
        assert_eq!(generate_signal(&s, 15, 1.0).unwrap(), generate_signal(&s, 15, 1.0).unwrap());
        assert_ne!(generate_signal(&s, 15, 1.0).unwrap().0, generate_signal(&spec(0.9, 2, 3.0, 43), 15, 1.0).unwrap().0);
    }

    #[test]
    fn band_zero_has_constant_modulus() {
        let (x, c) = generate_signal(&spec(PI / 3.0, 0, 2.0, 7), 9, 1.0).unwrap();
        assert_eq!(c.coeffs.len(), 1);
        let m0 = x.samples[0].norm();
        assert!(x.samples.iter().all(|z| (z.norm() - m0).abs() < 1e-12));
    }

    #[test]
    fn too_few_samples_is_an_error() {
        assert!(matches!(generate_signal(&spec(1.0, 3, 1.0, 0), 6, 1.0), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn increments_model_dechirped_difference_is_bandlimited() {
        let mut s = spec(PI / 4.0, 2, 3.0, 5);
        s.model = SignalModel::BandlimitedIncrements;
        let q = 16;
        let (x, _) = generate_signal(&s, q, 1.0).unwrap();
        let alpha = FrftAngle::new(PI / 4.0).unwrap();
        let d = crate::modulo::circular_difference(&x.samples);
        let spec = crate::frft::dtfrft_on_axis(&d, alpha, x.axis).unwrap();
        for n in 3..q - 2 {
            assert!(spec.coeffs[n].norm() < 1e-10, "bin {n}: {}", spec.coeffs[n].norm());
        }
    }

    #[test]
    fn rel_rmse_examples() {
        let b = vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)];
        assert_eq!(rel_rmse(&b, &b).unwrap(), 0.0);
        let a2: Vec<Complex64> = b.iter().map(|z| z * 2.0).collect();
        assert!((rel_rmse(&a2, &b).unwrap() - 1.0).abs() < 1e-15);
        let mut a = b.clone();
        a[0] += 0.01;
        assert!((rel_rmse(&a, &b).unwrap() - 0.01 / 5.0).abs() < 1e-15);
        assert_eq!(rel_rmse(&b, &[Complex64::new(0.0, 0.0); 2]).unwrap_err(), Error::ZeroReference);
    }

    #[test]
    fn unfolded_trial_passes_at_any_angle() {
        for alpha in [PI / 4.0, PI / 2.0, 1.2] {
            let t = run_trial(&spec(alpha, 2, 0.5, 3), 9, None, 1.0);
            assert!(t.passed, "{t:?}");
            assert!(t.rel_rmse < 1e-10);
            assert_eq!(t.realized_folds, 0);
        }
    }

    #[test]
    fn quarter_turn_trial_at_bound() {
        let s = spec(PI / 2.0, 3, 3.0, 11);
        let (q, m) = find_boundary_q(&s, 1.0, 0, 200).unwrap().unwrap();
        assert_eq!(q, 2 * (3 + m + 1));
        let t = run_trial(&s, q, None, 1.0);
        assert!(t.passed, "{t:?}");
        assert!(t.refold_error < 1e-9);
    }

    #[test]
    fn below_bound_trial_reports_criterion() {
        let t = run_trial(&spec(PI / 2.0, 2, 3.0, 1), 9, Some(3), 1.0);
        assert_eq!(t.failure_kind, Some(FailureKind::CriterionViolation));
        assert!(!t.passed);
    }

    #[test]
    fn folds_grow_with_amplitude() {
        for seed in 0..5 {
            let mut prev = 0;
            for beta in [0.5, 1.5, 3.0, 6.0] {
                let m = simulate(&spec(PI / 4.0, 3, beta, seed), 64, 1.0).unwrap().realized_folds;
                assert!(m >= prev);
                prev = m;
            }
        }
    }

    #[test]
    fn single_cell_sweep_matches_trial() {
        let base = SweepBase { sigma: 1.0, band_index: 2, lambda: 1.0, model: SignalModel::Frfs };
        let grid = SweepGrid { amplitude_scales: vec![0.5], qs: vec![11], m_budgets: vec![None], alphas: vec![PI / 2.0], seeds: vec![9] };
        let rows = sweep(&base, &grid).unwrap();
        assert_eq!(rows.len(), 1);
        let t = run_trial(&SignalSpec::new(PI / 2.0, 1.0, 2, 0.5, derive_seed(9, 0)), 11, None, 1.0);
        assert_eq!(rows[0].passed, usize::from(t.passed));
        assert_eq!(rows[0].rmse_median, t.rel_rmse);
        assert!(sweep(&base, &SweepGrid::default()).is_err());
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.0);
        assert_eq!(quantile(&v, 0.9), 4.0);
        assert!(quantile(&[], 0.5).is_nan());
    }
}

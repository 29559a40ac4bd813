//! Fractional Fourier kernel, direct discrete-time FRFT, and the chirp-basis
//! fractional Fourier series.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, from_usize, lit, Real};

/// Below this `|sin α|` the kernel degenerates to a Dirac.
pub const DEGENERATE_SIN_TOL: f64 = 1e-12;

/// Rotation angle of the time-frequency plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrftAngle<T> {
    alpha: T,
}

/// How an angle with vanishing sine is realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degenerate {
    Identity,
    Reversal,
}

impl<T: Real> FrftAngle<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NonFinite { what: "alpha" });
        }
        Ok(FrftAngle { alpha })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Transform order p = 2α/π.
    pub fn order(&self) -> T {
        lit::<T>(2.0) * self.alpha / T::PI()
    }

    pub fn sin(&self) -> T {
        self.alpha.sin()
    }

    pub fn cos(&self) -> T {
        self.alpha.cos()
    }

    pub fn cot(&self) -> T {
        self.cos() / self.sin()
    }

    pub fn csc(&self) -> T {
        T::one() / self.sin()
    }

    /// Chirp rate cot(α)/2.
    pub fn gamma(&self) -> T {
        self.cot() * lit(0.5)
    }

    fn sin_tol() -> T {
        lit::<T>(DEGENERATE_SIN_TOL).max(T::epsilon() * lit(16.0))
    }

    pub fn degenerate(&self) -> Option<Degenerate> {
        if self.sin().abs() >= Self::sin_tol() {
            return None;
        }
        let k = (self.alpha / T::PI()).round();
        let even = (k * lit(0.5)).fract() == T::zero();
        Some(if even { Degenerate::Identity } else { Degenerate::Reversal })
    }

    fn require_regular(&self) -> Result<()> {
        match self.degenerate() {
            Some(_) => Err(Error::DegenerateAngle { alpha: self.alpha.to_f64().unwrap_or(f64::NAN) }),
            None => Ok(()),
        }
    }

    /// Kernel amplitude A_α = √((1 − j cot α)/2π), principal branch.
    pub fn amplitude(&self) -> Result<Complex<T>> {
        self.require_regular()?;
        Ok((Complex::new(T::one(), -self.cot()) / (lit::<T>(2.0) * T::PI())).sqrt())
    }
}

/// Uniform sampling instants t_k = start + k·step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis<T> {
    pub start: T,
    pub step: T,
}

impl<T: Real> TimeAxis<T> {
    /// Bare index axis t_k = k.
    pub fn index() -> Self {
        TimeAxis { start: T::zero(), step: T::one() }
    }

    /// Q-point half-open grid over one period [−σ/2, σ/2).
    pub fn period(sigma: T, q: usize) -> Self {
        TimeAxis { start: -sigma * lit(0.5), step: sigma / from_usize(q) }
    }

    #[inline]
    pub fn t(&self, k: usize) -> T {
        self.start + from_usize::<T>(k) * self.step
    }
}

/// Uniformly sampled complex sequence with its time axis and period.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSignal<T> {
    pub samples: Vec<Complex<T>>,
    pub axis: TimeAxis<T>,
    pub sigma: T,
}

impl<T: Real> ComplexSignal<T> {
    /// Samples on the Q-point grid of one period, Q = `samples.len()`.
    pub fn on_period(samples: Vec<Complex<T>>, sigma: T) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter { name: "samples", reason: "empty signal".into() });
        }
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidParameter { name: "sigma", reason: "must be positive".into() });
        }
        let axis = TimeAxis::period(sigma, samples.len());
        Ok(ComplexSignal { samples, axis, sigma })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_period(&self) -> T {
        self.axis.step
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.len()).map(|k| self.axis.t(k)).collect()
    }
}

/// Discrete-time FRFT coefficients X[n] at u_n = n·freq_step, n = 0..N−1.
#[derive(Clone, Debug, PartialEq)]
pub struct FrftSpectrum<T> {
    pub coeffs: Vec<Complex<T>>,
    pub alpha: FrftAngle<T>,
    pub freq_step: T,
    /// Time axis of the transformed sequence; needed to invert.
    pub axis: TimeAxis<T>,
}

/// FRFS coefficients for w ∈ [−R, R], stored in wrapped order 0..R, −R..−1.
#[derive(Clone, Debug, PartialEq)]
pub struct FrfsCoefficients<T> {
    pub coeffs: Vec<Complex<T>>,
    pub bandwidth_index: usize,
    pub sigma: T,
}

impl<T: Real> FrfsCoefficients<T> {
    pub fn new(coeffs: Vec<Complex<T>>, bandwidth_index: usize, sigma: T) -> Result<Self> {
        if coeffs.len() != 2 * bandwidth_index + 1 {
            return Err(Error::LengthMismatch { expected: 2 * bandwidth_index + 1, got: coeffs.len() });
        }
        if !(sigma > T::zero()) {
            return Err(Error::InvalidParameter { name: "sigma", reason: "must be positive".into() });
        }
        Ok(FrfsCoefficients { coeffs, bandwidth_index, sigma })
    }

    /// Builds from coefficients listed in signed order w = −R..R.
    pub fn from_signed(signed: &[Complex<T>], sigma: T) -> Result<Self> {
        if signed.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter { name: "coeffs", reason: "need an odd count 2R+1".into() });
        }
        let r = signed.len() / 2;
        let mut coeffs = signed[r..].to_vec();
        coeffs.extend_from_slice(&signed[..r]);
        Self::new(coeffs, r, sigma)
    }

    pub fn zeros(bandwidth_index: usize, sigma: T) -> Self {
        FrfsCoefficients { coeffs: vec![Complex::zero(); 2 * bandwidth_index + 1], bandwidth_index, sigma }
    }

    pub fn index_of(&self, w: i64) -> usize {
        let r = self.bandwidth_index as i64;
        assert!(w.abs() <= r, "w = {w} outside [-{r}, {r}]");
        if w >= 0 {
            w as usize
        } else {
            (2 * r + 1 + w) as usize
        }
    }

    pub fn get(&self, w: i64) -> Complex<T> {
        self.coeffs[self.index_of(w)]
    }

    pub fn set(&mut self, w: i64, v: Complex<T>) {
        let i = self.index_of(w);
        self.coeffs[i] = v;
    }

    /// Pairs (w, X̂(w)) in signed order.
    pub fn signed(&self) -> Vec<(i64, Complex<T>)> {
        let r = self.bandwidth_index as i64;
        (-r..=r).map(|w| (w, self.get(w))).collect()
    }
}

/// K_α(u, t) = A_α·exp(j((cot α/2)t² − csc α·u·t + (cot α/2)u²)).
pub fn frft_kernel<T: Real>(alpha: FrftAngle<T>, u: T, t: T) -> Result<Complex<T>> {
    let a = alpha.amplitude()?;
    let g = alpha.gamma();
    Ok(a * cis(g * t * t - alpha.csc() * u * t + g * u * u))
}

/// Direct discrete-time FRFT in index form:
/// X[n] = A_α Σ_k x[k]·exp(j((cot α/2)k² − csc α·ū₀·k·n + (cot α/2)ū₀²n²)),
/// ū₀ = 2π sin α / N.
///
/// Angles with |sin α| below tolerance dispatch to the identity (α = 2kπ) or
/// circular time reversal (α = (2k+1)π); their `freq_step` is zero.
pub fn dtfrft<T: Real>(x: &[Complex<T>], alpha: FrftAngle<T>) -> Result<FrftSpectrum<T>> {
    dtfrft_on_axis(x, alpha, TimeAxis::index())
}

/// Direct discrete-time FRFT of samples taken at t_k = start + k·step.
///
/// X[n] = Σ_k x[k]·K_α(u_n, t_k) with u_n = n·du and du = 2π sin α/(N·step),
/// so the cross term reduces to a length-N DFT twiddle.
pub fn dtfrft_on_axis<T: Real>(x: &[Complex<T>], alpha: FrftAngle<T>, axis: TimeAxis<T>) -> Result<FrftSpectrum<T>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidParameter { name: "signal", reason: "empty input".into() });
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite { what: "signal" });
    }
    if let Some(kind) = alpha.degenerate() {
        return Ok(FrftSpectrum { coeffs: degenerate_apply(x, kind), alpha, freq_step: T::zero(), axis });
    }
    let a = alpha.amplitude()?;
    let g = alpha.gamma();
    let du = freq_step_for(alpha, n, axis.step);
    let twiddle = twiddles::<T>(n, -T::one());
    let pre: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let t = axis.t(k);
            x[k] * cis(g * t * t)
        })
        .collect();
    let offset = offset_phase_rate(n, axis);
    let coeffs = (0..n)
        .map(|m| {
            let acc = dft_row(&pre, &twiddle, m);
            let u = from_usize::<T>(m) * du;
            a * acc * cis(g * u * u - offset * from_usize::<T>(m))
        })
        .collect();
    Ok(FrftSpectrum { coeffs, alpha, freq_step: du, axis })
}

/// Inverse of [`dtfrft_on_axis`]:
/// x[k] = (1/(N·A_α))·e^{−j(cot α/2)t_k²} Σ_n X[n]·e^{−j(cot α/2)u_n²}·e^{j csc α·u_n·t_k}.
///
/// The constant 1/(N·A_α) makes the round trip the identity; it is the discrete
/// counterpart of A_{−α}·du, since A_α·A_{−α} = |csc α|/2π.
pub fn inverse_dtfrft<T: Real>(spec: &FrftSpectrum<T>) -> Result<ComplexSignal<T>> {
    let n = spec.coeffs.len();
    if n == 0 {
        return Err(Error::InvalidParameter { name: "spectrum", reason: "empty input".into() });
    }
    let axis = spec.axis;
    let sigma = axis.step * from_usize(n);
    let alpha = spec.alpha;
    if let Some(kind) = alpha.degenerate() {
        let samples = degenerate_apply(&spec.coeffs, kind);
        return Ok(ComplexSignal { samples, axis, sigma });
    }
    let expected = freq_step_for(alpha, n, axis.step);
    let tol = lit::<T>(1e-9) * expected.abs();
    if (spec.freq_step - expected).abs() > tol {
        return Err(Error::InvalidParameter {
            name: "freq_step",
            reason: "spectrum step does not match its angle, length, and axis".into(),
        });
    }
    let a = alpha.amplitude()?;
    let g = alpha.gamma();
    let du = spec.freq_step;
    let offset = offset_phase_rate(n, axis);
    let twiddle = twiddles::<T>(n, T::one());
    let pre: Vec<Complex<T>> = (0..n)
        .map(|m| {
            let u = from_usize::<T>(m) * du;
            spec.coeffs[m] * cis(-g * u * u + offset * from_usize::<T>(m))
        })
        .collect();
    let scale = (a * from_usize::<T>(n)).inv();
    let samples = (0..n)
        .map(|k| {
            let t = axis.t(k);
            scale * dft_row(&pre, &twiddle, k) * cis(-g * t * t)
        })
        .collect();
    Ok(ComplexSignal { samples, axis, sigma })
}

fn freq_step_for<T: Real>(alpha: FrftAngle<T>, n: usize, step: T) -> T {
    lit::<T>(2.0) * T::PI() * alpha.sin() / (from_usize::<T>(n) * step)
}

// csc α·u_n·start = n·2π·start/(N·step)
fn offset_phase_rate<T: Real>(n: usize, axis: TimeAxis<T>) -> T {
    lit::<T>(2.0) * T::PI() * axis.start / (from_usize::<T>(n) * axis.step)
}

fn twiddles<T: Real>(n: usize, sign: T) -> Vec<Complex<T>> {
    let base = sign * lit::<T>(2.0) * T::PI() / from_usize(n);
    (0..n).map(|m| cis(base * from_usize::<T>(m))).collect()
}

fn dft_row<T: Real>(x: &[Complex<T>], twiddle: &[Complex<T>], m: usize) -> Complex<T> {
    let n = x.len();
    let mut idx = 0usize;
    let mut acc = Complex::zero();
    for v in x {
        acc += v * twiddle[idx];
        idx += m;
        if idx >= n {
            idx %= n;
        }
    }
    acc
}

fn degenerate_apply<T: Real>(x: &[Complex<T>], kind: Degenerate) -> Vec<Complex<T>> {
    match kind {
        Degenerate::Identity => x.to_vec(),
        Degenerate::Reversal => {
            let n = x.len();
            (0..n).map(|k| x[(n - k) % n]).collect()
        }
    }
}

/// Φ_α(w, t) = √((sin α − j cos α)/σ)·exp(j((cot α/2)t² − csc α·w·u₀·t + (cot α/2)w²u₀²)),
/// u₀ = 2π sin α/σ.
pub fn frfs_basis<T: Real>(alpha: FrftAngle<T>, w: i64, t: T, sigma: T) -> Result<Complex<T>> {
    alpha.require_regular()?;
    Ok(frfs_amplitude(alpha, sigma) * frfs_phase(alpha, w, t, sigma))
}

fn frfs_amplitude<T: Real>(alpha: FrftAngle<T>, sigma: T) -> Complex<T> {
    (Complex::new(alpha.sin(), -alpha.cos()) / sigma).sqrt()
}

fn frfs_phase<T: Real>(alpha: FrftAngle<T>, w: i64, t: T, sigma: T) -> Complex<T> {
    let g = alpha.gamma();
    let wf = T::from_i64(w).expect("w representable");
    let u0 = lit::<T>(2.0) * T::PI() * alpha.sin() / sigma;
    let wu = wf * u0;
    // csc α·u₀ = 2π/σ exactly
    let lin = lit::<T>(2.0) * T::PI() * wf / sigma;
    cis(g * t * t - lin * t + g * wu * wu)
}

/// x(t) = Σ_{|w|≤R} X̂(w)·conj(Φ_α(w, t)) at each instant of `times`.
///
/// conj(Φ_α(w,t)) is the reverse-rotation basis at the same fractional
/// frequency; the pair is orthogonal on any Q ≥ 2R+1 uniform period grid.
pub fn frfs_synthesize<T: Real>(coeffs: &FrfsCoefficients<T>, alpha: FrftAngle<T>, times: &[T]) -> Result<Vec<Complex<T>>> {
    alpha.require_regular()?;
    let amp = frfs_amplitude(alpha, coeffs.sigma).conj();
    let terms = coeffs.signed();
    Ok(times
        .iter()
        .map(|&t| {
            let acc = terms.iter().fold(Complex::<T>::zero(), |acc, &(w, c)| acc + c * frfs_phase(alpha, w, t, coeffs.sigma).conj());
            acc * amp
        })
        .collect())
}

/// Synthesizes on the Q-point period grid t_k = −σ/2 + kσ/Q.
pub fn frfs_synthesize_signal<T: Real>(coeffs: &FrfsCoefficients<T>, alpha: FrftAngle<T>, q: usize) -> Result<ComplexSignal<T>> {
    if q == 0 {
        return Err(Error::InvalidParameter { name: "q", reason: "must be positive".into() });
    }
    let axis = TimeAxis::period(coeffs.sigma, q);
    let times: Vec<T> = (0..q).map(|k| axis.t(k)).collect();
    let samples = frfs_synthesize(coeffs, alpha, &times)?;
    Ok(ComplexSignal { samples, axis, sigma: coeffs.sigma })
}

/// Left Riemann sum X̂(w) = T Σ_k x[k]·Φ_α(w, t_k) over one period, |w| ≤ R.
pub fn frfs_analyze<T: Real>(x: &ComplexSignal<T>, alpha: FrftAngle<T>, r: usize) -> Result<FrfsCoefficients<T>> {
    alpha.require_regular()?;
    let q = x.len();
    if q < 2 * r + 1 {
        return Err(Error::InsufficientSamples { needed: 2 * r + 1, have: q });
    }
    let sigma = x.sigma;
    let span = x.axis.step * from_usize(q);
    if (span - sigma).abs() > lit::<T>(1e-9) * sigma {
        return Err(Error::InvalidParameter {
            name: "sample_period",
            reason: "samples must cover exactly one period (Q*T = sigma)".into(),
        });
    }
    let amp = frfs_amplitude(alpha, sigma);
    let times = x.times();
    let mut out = FrfsCoefficients::zeros(r, sigma);
    let ri = r as i64;
    for w in -ri..=ri {
        let acc = times.iter().zip(&x.samples).fold(Complex::<T>::zero(), |acc, (&t, &s)| acc + s * frfs_phase(alpha, w, t, sigma));
        out.set(w, acc * amp * x.axis.step);
    }
    Ok(out)
}

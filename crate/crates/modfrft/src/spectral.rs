//! Recovery of on-grid spikes {c_m, k_m} from a window of their fractional
//! spectrum: chirp demodulation, annihilating filter, roots, Vandermonde fit.

use std::ops::Range;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::frft::{FrftAngle, FrftSpectrum, TimeAxis};
use crate::linalg::{hessenberg_eigenvalues, lstsq, ridge_lstsq, Matrix};
use crate::scalar::{cis, from_usize, lit, norm2, Real};

/// Diagonal load, relative to trace(AᴴA), used when the Toeplitz system is
/// rank deficient or underdetermined.
pub const TOEPLITZ_RIDGE: f64 = 1e-12;
/// Pivot ratio below which the plain Toeplitz solve counts as rank deficient.
pub const TOEPLITZ_RANK_TOL: f64 = 1e-10;
pub const ROOT_TOL: f64 = 1e-12;
pub const ROOT_MAX_ITER: usize = 500;
/// Roots farther than this from the unit circle signal a failed estimate.
pub const UNIT_CIRCLE_TOL: f64 = 0.1;

/// ℑ(n) on a contiguous window of a length-`len` spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct DemodulatedSpectrum<T> {
    pub values: Vec<Complex<T>>,
    pub window: Range<usize>,
    /// Length N of the spectrum the window was cut from.
    pub len: usize,
}

impl<T: Real> DemodulatedSpectrum<T> {
    pub fn norm(&self) -> T {
        norm2(&self.values)
    }
}

/// Monic annihilating filter Γ[0..=M], Γ[0] = 1.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnihilationFilter<T> {
    pub taps: Vec<Complex<T>>,
}

impl<T: Real> AnnihilationFilter<T> {
    pub fn from_roots(roots: &[Complex<T>]) -> Self {
        let mut taps = vec![Complex::one()];
        for r in roots {
            let mut next = taps.clone();
            next.push(Complex::zero());
            for k in 1..next.len() {
                next[k] -= r * taps[k - 1];
            }
            taps = next;
        }
        AnnihilationFilter { taps }
    }

    pub fn degree(&self) -> usize {
        self.taps.len() - 1
    }
}

/// Spikes of weight c_m at grid indices k_m (t_m = t_0 + k_m·T).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpikeTrain<T> {
    pub instants: Vec<usize>,
    pub weights: Vec<Complex<T>>,
}

impl<T: Real> SpikeTrain<T> {
    pub fn new(instants: Vec<usize>, weights: Vec<Complex<T>>) -> Result<Self> {
        if instants.len() != weights.len() {
            return Err(Error::LengthMismatch { expected: instants.len(), got: weights.len() });
        }
        if instants.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter { name: "instants", reason: "must be strictly increasing".into() });
        }
        Ok(SpikeTrain { instants, weights })
    }

    pub fn empty() -> Self {
        SpikeTrain { instants: Vec::new(), weights: Vec::new() }
    }

    pub fn count(&self) -> usize {
        self.instants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instants.is_empty()
    }

    /// Dense length-`n` sequence with the weights at their instants.
    pub fn to_sequence(&self, n: usize) -> Vec<Complex<T>> {
        let mut out = vec![Complex::zero(); n];
        for (&k, &c) in self.instants.iter().zip(&self.weights) {
            out[k] += c;
        }
        out
    }
}

/// Largest run of indices outside the band E_R = [0, R] ∪ [N−R, N−1].
pub fn out_of_band_window(len: usize, r: usize) -> Option<Range<usize>> {
    let lo = r + 1;
    let hi = len.checked_sub(r)?;
    (lo < hi).then_some(lo..hi)
}

// κ(n) = exp(j((cot α/2)u_n² − csc α·u_n·t_0)), the chirp left after pulling
// the grid mode ς^n out of the kernel.
fn kappa<T: Real>(alpha: FrftAngle<T>, du: T, axis: TimeAxis<T>, len: usize, n: usize) -> Complex<T> {
    let u = from_usize::<T>(n) * du;
    let offset = lit::<T>(2.0) * T::PI() * axis.start / (from_usize::<T>(len) * axis.step);
    cis(alpha.gamma() * u * u - offset * from_usize::<T>(n))
}

/// ς^n = exp(−j2π·k·n/N), reduced modulo N before the trig call.
fn mode_power<T: Real>(k: usize, n: usize, len: usize) -> Complex<T> {
    let idx = ((k as u128 * n as u128) % len as u128) as usize;
    cis(-lit::<T>(2.0) * T::PI() * from_usize::<T>(idx) / from_usize::<T>(len))
}

/// ℑ(n) = −H̄[n]/(A_α·κ(n)) on an out-of-band window, where the measured
/// spectrum equals the negated spike spectrum.
pub fn demodulate_chirp<T: Real>(h: &FrftSpectrum<T>, window: Range<usize>, r: usize) -> Result<DemodulatedSpectrum<T>> {
    let len = h.coeffs.len();
    if window.end > len || window.start >= window.end {
        return Err(Error::InvalidParameter { name: "window", reason: format!("{window:?} not inside 0..{len}") });
    }
    for n in window.clone() {
        if n <= r || n + r >= len {
            return Err(Error::WindowOverlapsBand { index: n });
        }
    }
    let a = h.alpha.amplitude()?;
    let values = window.clone().map(|n| -h.coeffs[n] / (a * kappa(h.alpha, h.freq_step, h.axis, len, n))).collect();
    Ok(DemodulatedSpectrum { values, window, len })
}

/// Monic Γ of degree M minimizing Σ_n |(Γ∗ℑ)[n]|² over n = M..L−1.
///
/// Solved by QR least squares; a rank-deficient system (M larger than the
/// number of spikes) falls back to a ridge-regularized solve.
pub fn solve_annihilation<T: Real>(data: &DemodulatedSpectrum<T>, m: usize) -> Result<AnnihilationFilter<T>> {
    if m == 0 {
        return Err(Error::InvalidParameter { name: "m", reason: "filter degree must be at least 1".into() });
    }
    let s = &data.values;
    let l = s.len();
    if l < 2 * m {
        return Err(Error::InsufficientSamples { needed: 2 * m, have: l });
    }
    if s.iter().all(|z| z.is_zero()) {
        return Err(Error::RankDeficient);
    }
    toeplitz_fit(s, m)
}

/// Toeplitz fit without the 2M window requirement; a window shorter than 2M
/// gives an underdetermined system and the ridge picks a small-norm filter.
pub(crate) fn solve_annihilation_underdetermined<T: Real>(data: &DemodulatedSpectrum<T>, m: usize) -> Result<AnnihilationFilter<T>> {
    let l = data.values.len();
    if m == 0 || l <= m {
        return Err(Error::InsufficientSamples { needed: m + 1, have: l });
    }
    toeplitz_fit(&data.values, m)
}

fn toeplitz_fit<T: Real>(s: &[Complex<T>], m: usize) -> Result<AnnihilationFilter<T>> {
    let l = s.len();
    let a = Matrix::from_fn(l - m, m, |row, j| s[row + m - (j + 1)]);
    let b: Vec<Complex<T>> = (m..l).map(|n| -s[n]).collect();
    let sol = match lstsq(&a, &b, lit(TOEPLITZ_RANK_TOL)) {
        Ok(sol) => sol,
        Err(Error::RankDeficient | Error::InsufficientSamples { .. }) => ridge_lstsq(&a, &b, lit::<T>(TOEPLITZ_RIDGE) * a.gram_trace())?,
        Err(e) => return Err(e),
    };
    let mut taps = Vec::with_capacity(m + 1);
    taps.push(Complex::one());
    taps.extend(sol.solution);
    Ok(AnnihilationFilter { taps })
}

/// ‖(Γ∗ℑ)[n]‖₂ over the valid range n = M..L−1.
pub fn annihilation_residual<T: Real>(data: &DemodulatedSpectrum<T>, filter: &AnnihilationFilter<T>) -> T {
    let m = filter.degree();
    let s = &data.values;
    (m..s.len())
        .map(|n| (0..=m).fold(Complex::zero(), |acc, j| acc + filter.taps[j] * s[n - j]).norm_sqr())
        .fold(T::zero(), |a, b| a + b)
        .sqrt()
}

/// Roots of z^M + Γ[1]z^{M−1} + … + Γ[M] via companion-matrix QR, Newton-polished.
pub fn polynomial_roots<T: Real>(filter: &AnnihilationFilter<T>) -> Result<Vec<Complex<T>>> {
    let m = filter.degree();
    if m == 0 {
        return Err(Error::InvalidParameter { name: "filter", reason: "degree must be at least 1".into() });
    }
    let lead = filter.taps[0];
    let taps: Vec<Complex<T>> = filter.taps.iter().map(|t| t / lead).collect();
    let comp = Matrix::from_fn(m, m, |i, j| {
        if i == 0 {
            -taps[j + 1]
        } else if i == j + 1 {
            Complex::one()
        } else {
            Complex::zero()
        }
    });
    let mut roots = hessenberg_eigenvalues(comp, lit(ROOT_TOL), ROOT_MAX_ITER)?;
    for z in roots.iter_mut() {
        *z = newton_polish(&taps, *z);
    }
    Ok(roots)
}

fn newton_polish<T: Real>(taps: &[Complex<T>], mut z: Complex<T>) -> Complex<T> {
    let eval = |z: Complex<T>| {
        let mut p = Complex::<T>::zero();
        let mut dp = Complex::<T>::zero();
        for &c in taps {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let (mut p, _) = eval(z);
    for _ in 0..4 {
        let (_, dp) = eval(z);
        if dp.is_zero() {
            break;
        }
        let cand = z - p / dp;
        let (pc, _) = eval(cand);
        if pc.norm() < p.norm() {
            z = cand;
            p = pc;
        } else {
            break;
        }
    }
    z
}

fn root_to_index<T: Real>(root: Complex<T>, len: usize) -> usize {
    let n = from_usize::<T>(len);
    let k = (-root.arg() * n / (lit::<T>(2.0) * T::PI())).round();
    let k = k.to_i64().expect("finite index");
    k.rem_euclid(len as i64) as usize
}

/// Maps modes ς = e^{−j2πk/N} to sorted, de-duplicated grid indices k.
pub fn roots_to_instants<T: Real>(roots: &[Complex<T>], len: usize) -> Result<Vec<usize>> {
    let tol = lit::<T>(UNIT_CIRCLE_TOL);
    for r in roots {
        if !((r.norm() - T::one()).abs() < tol) {
            return Err(Error::OffCircleRoot { modulus: r.norm().to_f64().unwrap_or(f64::NAN) });
        }
    }
    Ok(dedup_indices(roots.iter().map(|&r| root_to_index(r, len)).collect()))
}

/// Like [`roots_to_instants`] but silently drops off-circle roots.
pub fn roots_to_instants_lenient<T: Real>(roots: &[Complex<T>], len: usize) -> Vec<usize> {
    let tol = lit::<T>(UNIT_CIRCLE_TOL);
    dedup_indices(roots.iter().filter(|r| (r.norm() - T::one()).abs() < tol).map(|&r| root_to_index(r, len)).collect())
}

fn dedup_indices(mut k: Vec<usize>) -> Vec<usize> {
    k.sort_unstable();
    k.dedup();
    k
}

/// Least-squares χ from Uχ = ℑ with U[i][m] = ς_m^{n_i}, then
/// c_m = χ_m·e^{−j(cot α/2)t_m²}.
pub fn estimate_amplitudes<T: Real>(
    data: &DemodulatedSpectrum<T>,
    instants: &[usize],
    alpha: FrftAngle<T>,
    axis: TimeAxis<T>,
) -> Result<SpikeTrain<T>> {
    let mut sorted = instants.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::SingularSystem);
    }
    if sorted.is_empty() {
        return Ok(SpikeTrain::empty());
    }
    let len = data.len;
    let l = data.values.len();
    if l < sorted.len() {
        return Err(Error::InsufficientSamples { needed: sorted.len(), have: l });
    }
    let start = data.window.start;
    let u = Matrix::from_fn(l, sorted.len(), |i, j| mode_power(sorted[j] % len, start + i, len));
    let chi = match lstsq(&u, &data.values, lit(1e-10)) {
        Ok(sol) => sol.solution,
        Err(Error::RankDeficient) => return Err(Error::SingularSystem),
        Err(e) => return Err(e),
    };
    let g = alpha.gamma();
    let weights = sorted
        .iter()
        .zip(&chi)
        .map(|(&k, &x)| {
            let t = axis.t(k);
            x * cis(-g * t * t)
        })
        .collect();
    SpikeTrain::new(sorted, weights)
}

/// ‖ℑ − Σ_m χ_m ς_m^n‖₂ over the window, for a spike train on `axis`.
pub fn model_residual<T: Real>(data: &DemodulatedSpectrum<T>, spikes: &SpikeTrain<T>, alpha: FrftAngle<T>, axis: TimeAxis<T>) -> T {
    let g = alpha.gamma();
    let chi: Vec<Complex<T>> = spikes
        .instants
        .iter()
        .zip(&spikes.weights)
        .map(|(&k, &c)| {
            let t = axis.t(k);
            c * cis(g * t * t)
        })
        .collect();
    data.window
        .clone()
        .zip(&data.values)
        .map(|(n, &v)| {
            let model = spikes.instants.iter().zip(&chi).fold(Complex::zero(), |acc, (&k, &x)| acc + x * mode_power::<T>(k, n, data.len));
            (v - model).norm_sqr()
        })
        .fold(T::zero(), |a, b| a + b)
        .sqrt()
}

/// Forward model V̄[n] = Σ_m c_m·K_α(u_n, t_{k_m}) for n = 0..len−1.
pub fn synthesize_spike_spectrum<T: Real>(
    spikes: &SpikeTrain<T>,
    alpha: FrftAngle<T>,
    axis: TimeAxis<T>,
    len: usize,
) -> Result<FrftSpectrum<T>> {
    let a = alpha.amplitude()?;
    let g = alpha.gamma();
    let du = lit::<T>(2.0) * T::PI() * alpha.sin() / (from_usize::<T>(len) * axis.step);
    let chi: Vec<(usize, Complex<T>)> = spikes
        .instants
        .iter()
        .zip(&spikes.weights)
        .map(|(&k, &c)| {
            let t = axis.t(k);
            (k, c * cis(g * t * t))
        })
        .collect();
    let coeffs = (0..len)
        .map(|n| {
            let s = chi.iter().fold(Complex::zero(), |acc, &(k, x)| acc + x * mode_power::<T>(k, n, len));
            a * kappa(alpha, du, axis, len, n) * s
        })
        .collect();
    Ok(FrftSpectrum { coeffs, alpha, freq_step: du, axis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frft::dtfrft_on_axis;
    use std::f64::consts::PI;

    type C = Complex<f64>;

    fn ang(a: f64) -> FrftAngle<f64> {
        FrftAngle::new(a).unwrap()
    }

    fn demod_of(train: &SpikeTrain<f64>, alpha: f64, axis: TimeAxis<f64>, len: usize, r: usize) -> DemodulatedSpectrum<f64> {
        let mut v = synthesize_spike_spectrum(train, ang(alpha), axis, len).unwrap();
        for z in v.coeffs.iter_mut() {
            *z = -*z;
        }
        demodulate_chirp(&v, out_of_band_window(len, r).unwrap(), r).unwrap()
    }

    #[test]
    fn window_bounds() {
        assert_eq!(out_of_band_window(10, 2), Some(3..8));
        assert_eq!(out_of_band_window(5, 2), None);
        assert_eq!(out_of_band_window(3, 5), None);
    }

    #[test]
    fn spike_spectrum_matches_transform_of_sequence() {
        let axis = TimeAxis::period(1.0, 16);
        let train = SpikeTrain::new(vec![2, 9], vec![C::new(2.0, 0.0), C::new(-4.0, 2.0)]).unwrap();
        let direct = dtfrft_on_axis(&train.to_sequence(16), ang(PI / 4.0), axis).unwrap();
        let model = synthesize_spike_spectrum(&train, ang(PI / 4.0), axis, 16).unwrap();
        for (a, b) in direct.coeffs.iter().zip(&model.coeffs) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((direct.freq_step - model.freq_step).abs() < 1e-15);
    }

    #[test]
    fn one_spike_at_origin_is_pure_chirp() {
        let alpha = ang(0.9);
        let train = SpikeTrain::new(vec![0], vec![C::new(2.0, 0.0)]).unwrap();
        let v = synthesize_spike_spectrum(&train, alpha, TimeAxis::index(), 12).unwrap();
        let a = alpha.amplitude().unwrap();
        for (n, z) in v.coeffs.iter().enumerate() {
            let u = n as f64 * v.freq_step;
            assert!((z - a * 2.0 * C::new(0.0, alpha.gamma() * u * u).exp()).norm() < 1e-13);
        }
        assert!(synthesize_spike_spectrum(&SpikeTrain::empty(), alpha, TimeAxis::index(), 5).unwrap().coeffs.iter().all(|z| z.is_zero()));
    }

    #[test]
    fn demodulation_examples() {
        let zero = FrftSpectrum { coeffs: vec![C::zero(); 10], alpha: ang(1.0), freq_step: 0.1, axis: TimeAxis::index() };
        assert!(demodulate_chirp(&zero, 3..7, 2).unwrap().values.iter().all(|z| z.is_zero()));
        assert_eq!(demodulate_chirp(&zero, 2..7, 2).unwrap_err(), Error::WindowOverlapsBand { index: 2 });
        assert_eq!(demodulate_chirp(&zero, 3..9, 2).unwrap_err(), Error::WindowOverlapsBand { index: 8 });

        let h: Vec<C> = (0..10).map(|n| C::new(n as f64, 1.0)).collect();
        let spec = FrftSpectrum { coeffs: h.clone(), alpha: ang(PI / 2.0), freq_step: 2.0 * PI / 10.0, axis: TimeAxis::index() };
        let a = ang(PI / 2.0).amplitude().unwrap();
        let d = demodulate_chirp(&spec, 3..7, 2).unwrap();
        for (i, n) in (3..7).enumerate() {
            assert!((d.values[i] + h[n] / a).norm() < 1e-14);
        }

        let train = SpikeTrain::new(vec![5], vec![C::new(0.0, 6.0)]).unwrap();
        let d = demod_of(&train, 0.7, TimeAxis::period(2.0, 20), 20, 3);
        for z in &d.values {
            assert!((z.norm() - d.values[0].norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_filter() {
        let s = C::new(0.0, -PI / 4.0).exp();
        let data = DemodulatedSpectrum { values: (0..6).map(|n| s.powi(n) * 2.0).collect(), window: 0..6, len: 8 };
        let f = solve_annihilation(&data, 1).unwrap();
        assert!((f.taps[0] - C::new(1.0, 0.0)).norm() == 0.0);
        assert!((f.taps[1] + s).norm() < 1e-10);
    }

    #[test]
    fn filter_annihilates_two_spikes() {
        let axis = TimeAxis::period(1.0, 24);
        let train = SpikeTrain::new(vec![4, 13], vec![C::new(2.0, -2.0), C::new(-4.0, 0.0)]).unwrap();
        let d = demod_of(&train, PI / 3.0, axis, 24, 3);
        let f = solve_annihilation(&d, 2).unwrap();
        assert!(annihilation_residual(&d, &f) < 1e-9 * d.norm());
    }

    #[test]
    fn annihilation_errors() {
        let zero = DemodulatedSpectrum { values: vec![C::zero(); 6], window: 2..8, len: 10 };
        assert_eq!(solve_annihilation(&zero, 1).unwrap_err(), Error::RankDeficient);
        let short = DemodulatedSpectrum { values: vec![C::new(1.0, 0.0); 3], window: 2..5, len: 10 };
        assert_eq!(solve_annihilation(&short, 2).unwrap_err(), Error::InsufficientSamples { needed: 4, have: 3 });
    }

    #[test]
    fn root_examples() {
        let s = C::new(0.3, 0.8);
        let r = polynomial_roots(&AnnihilationFilter { taps: vec![C::new(1.0, 0.0), -s] }).unwrap();
        assert!((r[0] - s).norm() < 1e-14);

        let (a, b) = (C::new(0.6, -0.8), C::new(-1.0, 0.0));
        let f = AnnihilationFilter { taps: vec![C::new(1.0, 0.0), -(a + b), a * b] };
        let r = polynomial_roots(&f).unwrap();
        assert!(r.iter().any(|z| (z - a).norm() < 1e-12));
        assert!(r.iter().any(|z| (z - b).norm() < 1e-12));
    }

    #[test]
    fn instants_from_roots() {
        assert_eq!(roots_to_instants(&[C::new(1.0, 0.0)], 7).unwrap(), vec![0]);
        for q in [9usize, 16, 33] {
            let z = C::new(0.0, -2.0 * PI * 5.0 / q as f64).exp();
            assert_eq!(roots_to_instants(&[z], q).unwrap(), vec![5]);
        }
        let z = C::new(0.0, -2.0 * PI * 3.0 / 10.0).exp();
        let near = z * C::new(0.0, 0.01).exp();
        assert_eq!(roots_to_instants(&[z, near], 10).unwrap(), vec![3]);
        assert!(matches!(roots_to_instants(&[C::new(1.5, 0.0)], 10), Err(Error::OffCircleRoot { .. })));
        assert_eq!(roots_to_instants_lenient(&[C::new(1.5, 0.0), z], 10), vec![3]);
    }

    #[test]
    fn amplitude_examples() {
        let axis = TimeAxis::index();
        let alpha = ang(PI / 2.0);
        let data = DemodulatedSpectrum { values: vec![C::new(0.5, 0.5); 4], window: 3..7, len: 12 };
        let t = estimate_amplitudes(&data, &[0], alpha, axis).unwrap();
        assert!((t.weights[0] - C::new(0.5, 0.5)).norm() < 1e-14);

        let zero = DemodulatedSpectrum { values: vec![C::zero(); 4], window: 3..7, len: 12 };
        let t = estimate_amplitudes(&zero, &[1, 5], ang(0.8), axis).unwrap();
        assert!(t.weights.iter().all(|w| w.norm() < 1e-15));
        assert_eq!(estimate_amplitudes(&zero, &[2, 2], alpha, axis).unwrap_err(), Error::SingularSystem);
    }

    #[test]
    fn full_chain_on_exact_data() {
        let axis = TimeAxis::period(1.0, 30);
        let alpha = ang(PI / 4.0);
        let train = SpikeTrain::new(vec![3, 11, 20], vec![C::new(2.0, 0.0), C::new(-2.0, 4.0), C::new(0.0, -6.0)]).unwrap();
        let d = demod_of(&train, PI / 4.0, axis, 30, 4);
        let f = solve_annihilation(&d, 3).unwrap();
        let roots = polynomial_roots(&f).unwrap();
        for r in &roots {
            assert!((r.norm() - 1.0).abs() < 1e-6);
        }
        let k = roots_to_instants(&roots, 30).unwrap();
        assert_eq!(k, train.instants);
        let est = estimate_amplitudes(&d, &k, alpha, axis).unwrap();
        for (a, b) in est.weights.iter().zip(&train.weights) {
            assert!((a - b).norm() < 1e-8);
        }
        assert!(model_residual(&d, &est, alpha, axis) < 1e-9);
        let back = synthesize_spike_spectrum(&est, alpha, axis, 30).unwrap();
        let orig = synthesize_spike_spectrum(&train, alpha, axis, 30).unwrap();
        for (a, b) in back.coeffs.iter().zip(&orig.coeffs) {
            assert!((a - b).norm() < 1e-8);
        }
    }
}

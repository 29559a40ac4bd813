//! Centered modulo folding, the residual decomposition, and finite differences.

use std::ops::{Add, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::frft::{ComplexSignal, TimeAxis};
use crate::scalar::{lit, Real};

/// Residual components within this many λ of the 2λ grid are snapped onto it.
pub const RESIDUAL_SNAP_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModuloParams<T> {
    lambda: T,
}

impl<T: Real> ModuloParams<T> {
    pub fn new(lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParameter { name: "lambda", reason: "threshold must be positive and finite".into() });
        }
        Ok(ModuloParams { lambda })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }
}

/// Output of the modulo ADC: every component lies in [−λ, λ).
#[derive(Clone, Debug, PartialEq)]
pub struct FoldedSamples<T> {
    pub samples: Vec<Complex<T>>,
    pub params: ModuloParams<T>,
    pub axis: TimeAxis<T>,
    pub sigma: T,
}

impl<T: Real> FoldedSamples<T> {
    /// Wraps measured samples, checking the range invariant.
    pub fn from_measurements(signal: ComplexSignal<T>, params: ModuloParams<T>) -> Result<Self> {
        let l = params.lambda();
        for z in &signal.samples {
            for c in [z.re, z.im] {
                if !c.is_finite() {
                    return Err(Error::NonFinite { what: "folded samples" });
                }
                if c < -l || c >= l {
                    return Err(Error::InvalidParameter { name: "samples", reason: format!("component {c} outside [-lambda, lambda)") });
                }
            }
        }
        Ok(FoldedSamples { samples: signal.samples, params, axis: signal.axis, sigma: signal.sigma })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn lambda(&self) -> T {
        self.params.lambda()
    }

    pub fn to_signal(&self) -> ComplexSignal<T> {
        ComplexSignal { samples: self.samples.clone(), axis: self.axis, sigma: self.sigma }
    }
}

/// Piecewise-constant residual v = x − M_λ(x), components in 2λℤ.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualSequence<T> {
    pub values: Vec<Complex<T>>,
    pub lambda: T,
}

/// M_λ(g) = 2λ([[g/2λ + 1/2]] − 1/2), with [[·]] the fractional part.
///
/// Computed as g − 2λk with k = ⌊g/2λ + 1/2⌋ so that g − M_λ(g) is exactly the
/// representable multiple 2λk; k is corrected when rounding pushes the result
/// out of [−λ, λ).
pub fn centered_modulo<T: Real>(g: T, lambda: T) -> Result<T> {
    if !g.is_finite() {
        return Err(Error::NonFinite { what: "modulo input" });
    }
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParameter { name: "lambda", reason: "threshold must be positive".into() });
    }
    Ok(modulo_unchecked(g, lambda))
}

fn modulo_unchecked<T: Real>(g: T, lambda: T) -> T {
    let two_l = lambda + lambda;
    let mut k = (g / two_l + lit(0.5)).floor();
    let mut h = g - two_l * k;
    if h < -lambda {
        k -= T::one();
        h = g - two_l * k;
    } else if h >= lambda {
        k += T::one();
        h = g - two_l * k;
    }
    h
}

/// Applies M_λ independently to real and imaginary parts.
pub fn fold_samples<T: Real>(x: &ComplexSignal<T>, params: ModuloParams<T>) -> Result<FoldedSamples<T>> {
    let l = params.lambda();
    let mut samples = Vec::with_capacity(x.len());
    for z in &x.samples {
        samples.push(Complex::new(centered_modulo(z.re, l)?, centered_modulo(z.im, l)?));
    }
    Ok(FoldedSamples { samples, params, axis: x.axis, sigma: x.sigma })
}

/// v[k] = x[k] − h[k], snapped componentwise to 2λℤ when within 1e−6·λ.
pub fn residual<T: Real>(x: &ComplexSignal<T>, h: &FoldedSamples<T>) -> Result<ResidualSequence<T>> {
    if x.len() != h.len() {
        return Err(Error::LengthMismatch { expected: h.len(), got: x.len() });
    }
    let lambda = h.lambda();
    let values = x
        .samples
        .iter()
        .zip(&h.samples)
        .map(|(a, b)| {
            let v = a - b;
            Complex::new(snap_component(v.re, lambda), snap_component(v.im, lambda))
        })
        .collect();
    Ok(ResidualSequence { values, lambda })
}

fn snap_component<T: Real>(v: T, lambda: T) -> T {
    let two_l = lambda + lambda;
    let grid = two_l * (v / two_l).round();
    if (v - grid).abs() <= lit::<T>(RESIDUAL_SNAP_TOL) * lambda {
        grid
    } else {
        v
    }
}

/// N-th order forward difference; the output is N samples shorter.
pub fn finite_difference<V>(s: &[V], order: usize) -> Result<Vec<V>>
where
    V: Copy + Sub<Output = V>,
{
    if order == 0 {
        return Err(Error::InvalidParameter { name: "order", reason: "difference order must be at least 1".into() });
    }
    if s.len() <= order {
        return Err(Error::SequenceTooShort { len: s.len(), order });
    }
    let mut cur = s.to_vec();
    for _ in 0..order {
        cur = cur.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(cur)
}

/// Running sum inverting the first difference: o[0] = initial, Δo = d.
pub fn anti_difference<V>(d: &[V], initial: V) -> Vec<V>
where
    V: Copy + Add<Output = V>,
{
    let mut out = Vec::with_capacity(d.len() + 1);
    let mut acc = initial;
    out.push(acc);
    for &x in d {
        acc = acc + x;
        out.push(acc);
    }
    out
}

/// Circular first difference d[k] = s[(k+1) mod N] − s[k], same length as `s`.
pub fn circular_difference<V>(s: &[V]) -> Vec<V>
where
    V: Copy + Sub<Output = V>,
{
    let n = s.len();
    (0..n).map(|k| s[(k + 1) % n] - s[k]).collect()
}

/// True iff no component of consecutive samples moves by more than 2λ.
pub fn itoh_check<T: Real>(x: &[Complex<T>], lambda: T) -> bool {
    let bound = lambda + lambda;
    x.windows(2).all(|w| {
        let d = w[1] - w[0];
        d.re.abs() <= bound && d.im.abs() <= bound
    })
}

fn jumps<T: Real>(a: Complex<T>, b: Complex<T>, lambda: T) -> bool {
    let d = b - a;
    d.re.abs() > lambda || d.im.abs() > lambda
}

/// Number of indices k ≥ 1 where v[k] ≠ v[k−1] in either component.
pub fn count_folds<T: Real>(v: &ResidualSequence<T>) -> usize {
    v.values.windows(2).filter(|w| jumps(w[0], w[1], v.lambda)).count()
}

/// Fold count of the periodized residual, including the wrap from the last
/// sample back to the first.
pub fn count_folds_periodic<T: Real>(v: &ResidualSequence<T>) -> usize {
    let n = v.values.len();
    if n < 2 {
        return 0;
    }
    let wrap = usize::from(jumps(v.values[n - 1], v.values[0], v.lambda));
    count_folds(v) + wrap
}

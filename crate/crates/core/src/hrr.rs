//! Vector algebra for holographic reduced representations.
//!
//! Binding is circular convolution, unbinding is circular correlation and
//! superposition is an element-wise sum scaled by a divisor. Two convolution
//! routes are provided: direct O(n²) summation, which is the reference
//! definition, and an FFT route that handles any length through `rustfft`'s
//! mixed-radix and Bluestein plans.

use std::cell::RefCell;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seedable, platform-independent generator used for every label vector.
pub type LabelRng = ChaCha20Rng;

/// Creates the label generator for `seed`.
pub fn seeded_rng(seed: u64) -> LabelRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// A fixed-length vector of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    /// Wraps `elements`, rejecting empty input and NaN/Inf entries.
    pub fn new(elements: Vec<f64>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &value)) = elements.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(DenseVector(elements))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(DenseVector(vec![0.0; n]))
    }

    // Callers guarantee non-empty, finite input.
    pub(crate) fn from_raw(elements: Vec<f64>) -> Self {
        debug_assert!(!elements.is_empty());
        DenseVector(elements)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        check_lengths(self, other)?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scale(&self, factor: f64) -> DenseVector {
        DenseVector(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn add(&self, other: &DenseVector) -> Result<DenseVector> {
        check_lengths(self, other)?;
        Ok(DenseVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        check_lengths(self, other)?;
        Ok(DenseVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn neg(&self) -> DenseVector {
        DenseVector(self.0.iter().map(|v| -v).collect())
    }

    /// Unit-norm copy. Fails on the zero vector.
    pub fn normalized(&self) -> Result<DenseVector> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(1.0 / norm))
    }
}

impl AsRef<DenseVector> for DenseVector {
    fn as_ref(&self) -> &DenseVector {
        self
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(elements: Vec<f64>) -> Result<Self> {
        DenseVector::new(elements)
    }
}

impl From<DenseVector> for Vec<f64> {
    fn from(v: DenseVector) -> Self {
        v.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_lengths(a: &DenseVector, b: &DenseVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Circular convolution by direct summation: `t[j] = Σ_k a[k]·b[(j−k) mod n]`.
pub fn circular_convolve(a: &DenseVector, b: &DenseVector) -> Result<DenseVector> {
    check_lengths(a, b)?;
    let n = a.len();
    let (a, b) = (a.as_slice(), b.as_slice());
    let out = (0..n)
        .map(|j| {
            // Terms k and (j−k) mod n are summed as a pair, which makes the
            // result bitwise identical when a and b are swapped.
            let mut acc = 0.0;
            for k in 0..n {
                let k2 = (j + n - k) % n;
                if k < k2 {
                    acc += a[k] * b[k2] + a[k2] * b[k];
                } else if k == k2 {
                    acc += a[k] * b[k];
                }
            }
            acc
        })
        .collect();
    Ok(DenseVector::from_raw(out))
}

/// Circular correlation by direct summation: `y[j] = Σ_k a[k]·t[(k+j) mod n]`.
pub fn circular_correlate(a: &DenseVector, t: &DenseVector) -> Result<DenseVector> {
    check_lengths(a, t)?;
    let n = a.len();
    let (a, t) = (a.as_slice(), t.as_slice());
    let out = (0..n)
        .map(|j| (0..n).map(|k| a[k] * t[(k + j) % n]).sum())
        .collect();
    Ok(DenseVector::from_raw(out))
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    })
}

fn spectrum(v: &DenseVector, fft: &dyn Fft<f64>) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fft.process(&mut buf);
    buf
}

fn fft_product(
    a: &DenseVector,
    b: &DenseVector,
    combine: impl Fn(Complex<f64>, Complex<f64>) -> Complex<f64>,
) -> Result<DenseVector> {
    check_lengths(a, b)?;
    let n = a.len();
    let (forward, inverse) = plans(n);
    let fa = spectrum(a, forward.as_ref());
    let fb = spectrum(b, forward.as_ref());
    let mut prod: Vec<Complex<f64>> = fa.into_iter().zip(fb).map(|(x, y)| combine(x, y)).collect();
    inverse.process(&mut prod);
    let scale = 1.0 / n as f64;
    Ok(DenseVector::from_raw(
        prod.into_iter().map(|c| c.re * scale).collect(),
    ))
}

/// Circular convolution through the convolution theorem. Works for any length.
pub fn circular_convolve_fft(a: &DenseVector, b: &DenseVector) -> Result<DenseVector> {
    fft_product(a, b, |x, y| x * y)
}

/// Circular correlation through the FFT: `Y = conj(A)·T`.
pub fn circular_correlate_fft(a: &DenseVector, t: &DenseVector) -> Result<DenseVector> {
    fft_product(a, t, |x, y| x.conj() * y)
}

/// Which algorithm actually produced a binding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionPath {
    Direct,
    Fft,
}

/// Path selection for [`bind`] and [`unbind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    Direct,
    Fft,
    /// Direct summation below [`FFT_CROSSOVER`] elements, FFT above.
    #[default]
    Auto,
}

/// Length at which the FFT route overtakes direct summation.
pub const FFT_CROSSOVER: usize = 64;

impl Strategy {
    pub fn resolve(self, n: usize) -> ConvolutionPath {
        match self {
            Strategy::Direct => ConvolutionPath::Direct,
            Strategy::Fft => ConvolutionPath::Fft,
            Strategy::Auto if n < FFT_CROSSOVER => ConvolutionPath::Direct,
            Strategy::Auto => ConvolutionPath::Fft,
        }
    }
}

/// Binds `a` and `b`, reporting which path ran.
pub fn bind(a: &DenseVector, b: &DenseVector, strategy: Strategy) -> Result<(DenseVector, ConvolutionPath)> {
    let path = strategy.resolve(a.len());
    let out = match path {
        ConvolutionPath::Direct => circular_convolve(a, b)?,
        ConvolutionPath::Fft => circular_convolve_fft(a, b)?,
    };
    Ok((out, path))
}

/// Unbinds `t` with the cue `a` (circular correlation), reporting which path ran.
pub fn unbind(a: &DenseVector, t: &DenseVector, strategy: Strategy) -> Result<(DenseVector, ConvolutionPath)> {
    let path = strategy.resolve(a.len());
    let out = match path {
        ConvolutionPath::Direct => circular_correlate(a, t)?,
        ConvolutionPath::Fft => circular_correlate_fft(a, t)?,
    };
    Ok((out, path))
}

/// Element-wise sum of `vectors` divided by `divisor`.
pub fn superpose<V: AsRef<DenseVector>>(vectors: &[V], divisor: usize) -> Result<DenseVector> {
    if divisor == 0 {
        return Err(Error::InvalidDivisor);
    }
    let first = vectors.first().ok_or(Error::EmptyInput("superposition"))?.as_ref();
    let mut acc = first.as_slice().to_vec();
    for v in &vectors[1..] {
        let v = v.as_ref();
        check_lengths(first, v)?;
        acc.iter_mut().zip(v.iter()).for_each(|(a, b)| *a += b);
    }
    let d = divisor as f64;
    acc.iter_mut().for_each(|a| *a /= d);
    Ok(DenseVector::from_raw(acc))
}

/// `dot(a,b)/(‖a‖·‖b‖)`, clamped to [−1, 1]. Zero-norm input is an error.
pub fn cosine_similarity(a: &DenseVector, b: &DenseVector) -> Result<f64> {
    check_lengths(a, b)?;
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(a.as_slice(), b.as_slice()) / (na * nb)).clamp(-1.0, 1.0))
}

/// Draws `n` independent samples from N(0, 1/n).
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<DenseVector> {
    if n == 0 {
        return Err(Error::InvalidDimension(n));
    }
    let normal = Normal::new(0.0, (1.0 / n as f64).sqrt()).map_err(|_| Error::InvalidDimension(n))?;
    Ok(DenseVector::from_raw((0..n).map(|_| normal.sample(rng)).collect()))
}

//! Fourier analysis on finite abelian groups.
//!
//! With Haar weights `w` on `G` and `ŵ` on `Ĝ`,
//! `f̂(ξ) = w Σ_x f(x) conj⟨ξ,x⟩` and `f(x) = ŵ Σ_ξ f̂(ξ) ⟨ξ,x⟩`.

pub mod fft;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement};
use crate::scalar::{is_finite, Real};

pub use fft::{FftPlan, MultiFft};

/// Complex-valued function on a finite abelian group, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal<T: Real> {
    group: FiniteAbelianGroup,
    values: Vec<Complex<T>>,
}

impl<T: Real> Signal<T> {
    pub fn new(group: FiniteAbelianGroup, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::DimensionMismatch { expected: group.order(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|z| !is_finite(z)) {
            return Err(Error::InvalidSignal(format!("non-finite value at index {i}")));
        }
        Ok(Signal { group, values })
    }

    pub(crate) fn from_parts(group: FiniteAbelianGroup, values: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(values.len(), group.order());
        Signal { group, values }
    }

    pub fn zeros(group: &FiniteAbelianGroup) -> Self {
        Signal { group: group.clone(), values: vec![Complex::new(T::zero(), T::zero()); group.order()] }
    }

    pub fn constant(group: &FiniteAbelianGroup, c: Complex<T>) -> Self {
        Signal { group: group.clone(), values: vec![c; group.order()] }
    }

    pub fn from_fn(group: &FiniteAbelianGroup, mut f: impl FnMut(&GroupElement) -> Complex<T>) -> Self {
        let values = group.elements().map(|x| f(&x)).collect();
        Signal { group: group.clone(), values }
    }

    pub fn from_real(group: &FiniteAbelianGroup, values: &[T]) -> Result<Self> {
        Self::new(group.clone(), values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    /// Point mass of Haar integral one at `x`: value `1/w` there, zero elsewhere.
    pub fn delta(group: &FiniteAbelianGroup, x: &GroupElement) -> Self {
        let mut s = Self::zeros(group);
        s.values[group.index_of(x)] = Complex::new(T::one() / group.weight::<T>(), T::zero());
        s
    }

    /// Indicator of a set of element indices.
    pub fn indicator(group: &FiniteAbelianGroup, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::zeros(group);
        for i in indices {
            s.values[i] = Complex::new(T::one(), T::zero());
        }
        s
    }

    /// Character `x ↦ ⟨ξ,x⟩`.
    pub fn character(group: &FiniteAbelianGroup, xi: &GroupElement) -> Result<Self> {
        let values = group.elements().map(|x| group.pairing(xi, &x)).collect::<Result<Vec<_>>>()?;
        Ok(Signal { group: group.clone(), values })
    }

    /// Independent standard complex Gaussian entries.
    pub fn random<R: Rng + ?Sized>(group: &FiniteAbelianGroup, rng: &mut R) -> Self {
        let values = (0..group.order())
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::of(re), T::of(im))
            })
            .collect();
        Signal { group: group.clone(), values }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, x: &GroupElement) -> Complex<T> {
        self.values[self.group.index_of(x)]
    }

    /// Haar integral `∫ f`.
    pub fn integral(&self) -> Complex<T> {
        let s: Complex<T> = self.values.iter().copied().sum();
        s * self.group.weight::<T>()
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn abs(&self) -> Self {
        self.map(|z| Complex::new(z.norm(), T::zero()))
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Signal { group: self.group.clone(), values: self.values.iter().map(|&z| f(z)).collect() }
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        self.map(|z| z * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    pub fn zip(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        ensure_same_group(&self.group, &other.group)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Signal { group: self.group.clone(), values })
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }

    /// Same values read on a group with the same cyclic shape.
    pub fn regroup(&self, group: &FiniteAbelianGroup) -> Result<Self> {
        if !group.same_shape(&self.group) {
            return Err(Error::GroupMismatch(format!("{} vs {}", self.group, group)));
        }
        Ok(Signal { group: group.clone(), values: self.values.clone() })
    }

    /// Indices where `|f| > threshold`.
    pub fn support(&self, threshold: T) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, z)| z.norm() > threshold).map(|(i, _)| i).collect()
    }
}

pub(crate) fn ensure_same_group(a: &FiniteAbelianGroup, b: &FiniteAbelianGroup) -> Result<()> {
    if a != b {
        return Err(Error::GroupMismatch(format!("{a} vs {b}")));
    }
    Ok(())
}

/// Fourier transform `f ↦ f̂` on the dual group, via the factor-wise FFT.
pub fn fourier<T: Real>(f: &Signal<T>) -> Signal<T> {
    let fft = MultiFft::new(f.group.orders());
    fourier_with(&fft, f)
}

pub fn fourier_with<T: Real>(fft: &MultiFft<T>, f: &Signal<T>) -> Signal<T> {
    let mut values = f.values.clone();
    fft.forward(&mut values);
    let w = f.group.weight::<T>();
    for v in values.iter_mut() {
        *v = *v * w;
    }
    Signal { group: f.group.dual(), values }
}

/// Inverse transform from `Ĝ` back to `G = dual(Ĝ)`.
pub fn inverse_fourier<T: Real>(big_f: &Signal<T>) -> Signal<T> {
    let fft = MultiFft::new(big_f.group.orders());
    inverse_fourier_with(&fft, big_f)
}

pub fn inverse_fourier_with<T: Real>(fft: &MultiFft<T>, big_f: &Signal<T>) -> Signal<T> {
    let mut values = big_f.values.clone();
    fft.inverse_unnormalized(&mut values);
    let w = big_f.group.weight::<T>();
    for v in values.iter_mut() {
        *v = *v * w;
    }
    Signal { group: big_f.group.dual(), values }
}

/// Direct `O(|G|²)` evaluation of the Fourier transform.
pub fn naive_fourier<T: Real>(f: &Signal<T>) -> Signal<T> {
    let g = &f.group;
    let w = g.weight::<T>();
    let elems: Vec<GroupElement> = g.elements().collect();
    let values = elems
        .iter()
        .map(|xi| {
            let s: Complex<T> =
                elems.iter().zip(&f.values).map(|(x, &v)| v * g.pairing::<T>(xi, x).expect("same rank").conj()).sum();
            s * w
        })
        .collect();
    Signal { group: g.dual(), values }
}

/// Direct `O(|G|²)` inverse transform.
pub fn naive_inverse_fourier<T: Real>(big_f: &Signal<T>) -> Signal<T> {
    let g = &big_f.group;
    let w = g.weight::<T>();
    let elems: Vec<GroupElement> = g.elements().collect();
    let values = elems
        .iter()
        .map(|x| {
            let s: Complex<T> =
                elems.iter().zip(&big_f.values).map(|(xi, &v)| v * g.pairing::<T>(xi, x).expect("same rank")).sum();
            s * w
        })
        .collect();
    Signal { group: g.dual(), values }
}

/// `τ_y f(x) = f(x − y)`.
pub fn translate<T: Real>(f: &Signal<T>, y: &GroupElement) -> Result<Signal<T>> {
    let g = &f.group;
    if !g.contains(y) {
        return Err(Error::GroupMismatch(format!("{y} is not an element of {g}")));
    }
    let yi = g.index_of(y);
    let values = (0..g.order()).map(|x| f.values[g.sub_index(x, yi)]).collect();
    Ok(Signal { group: g.clone(), values })
}

/// `M_ξ f(x) = conj⟨ξ,x⟩ f(x)`; its transform is `f̂(· + ξ)`.
pub fn modulate<T: Real>(f: &Signal<T>, xi: &GroupElement) -> Result<Signal<T>> {
    let g = &f.group;
    if !g.contains(xi) {
        return Err(Error::GroupMismatch(format!("{xi} is not a character of {g}")));
    }
    let values = g
        .elements()
        .zip(&f.values)
        .map(|(x, &v)| Ok(v * g.pairing::<T>(xi, &x)?.conj()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Signal { group: g.clone(), values })
}

/// Haar convolution `(f*g)(x) = ∫ f(y) g(x−y) dy`, through the convolution theorem.
pub fn convolve<T: Real>(f: &Signal<T>, g: &Signal<T>) -> Result<Signal<T>> {
    ensure_same_group(&f.group, &g.group)?;
    let fft = MultiFft::new(f.group.orders());
    let prod = fourier_with(&fft, f).mul(&fourier_with(&fft, g))?;
    Ok(inverse_fourier_with(&fft, &prod))
}

/// Direct `O(|G|²)` convolution.
pub fn naive_convolve<T: Real>(f: &Signal<T>, g: &Signal<T>) -> Result<Signal<T>> {
    ensure_same_group(&f.group, &g.group)?;
    let grp = &f.group;
    let w = grp.weight::<T>();
    let n = grp.order();
    let values = (0..n)
        .map(|x| {
            let s: Complex<T> = (0..n).map(|y| f.values[y] * g.values[grp.sub_index(x, y)]).sum();
            s * w
        })
        .collect();
    Ok(Signal { group: grp.clone(), values })
}

/// Haar `L²` inner product `∫ f conj(g)`.
pub fn inner_product<T: Real>(f: &Signal<T>, g: &Signal<T>) -> Result<Complex<T>> {
    ensure_same_group(&f.group, &g.group)?;
    let s: Complex<T> = f.values.iter().zip(&g.values).map(|(a, b)| a * b.conj()).sum();
    Ok(s * f.group.weight::<T>())
}

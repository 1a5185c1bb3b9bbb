//! Finite abelian groups as products of cyclic factors with exact Haar weights.
//!
//! A group `Z_{n_1} × … × Z_{n_d}` carries a rational mass per point. Its dual has
//! the same cyclic orders and the weight fixed by `w(G)·w(Ĝ)·|G| = 1`, which makes
//! the Fourier pair in [`crate::transform`] an exact inverse pair. Continuum groups
//! (`T`, `R`) are represented only through their cyclic discretizations, and the
//! metrizability and σ-compactness hypotheses of the continuum theory are vacuous
//! here.

mod hom;
pub mod snf;
mod subgroup;

use std::fmt;

use num_complex::Complex;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{unit_root, Real};

pub use hom::GroupHom;
pub use subgroup::{annihilator, quotient, Subgroup};

/// Element of a cyclic product, stored as reduced coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(Vec<usize>);

impl GroupElement {
    pub fn new(coords: Vec<usize>) -> Self {
        GroupElement(coords)
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<usize> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// `Z_{n_1} × … × Z_{n_d}` with Haar mass `haar_weight` on every point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    orders: Vec<usize>,
    haar_weight: Rational64,
    strides: Vec<usize>,
    order: usize,
}

impl FiniteAbelianGroup {
    pub fn new(orders: Vec<usize>, haar_weight: Rational64) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::InvalidGroup("orders list is empty".into()));
        }
        if orders.contains(&0) {
            return Err(Error::InvalidGroup("cyclic orders must be ≥ 1".into()));
        }
        if haar_weight <= Rational64::zero() {
            return Err(Error::InvalidGroup("haar weight must be positive".into()));
        }
        let order = orders
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::InvalidGroup("group order overflows".into()))?;
        let mut strides = vec![1usize; orders.len()];
        for i in (0..orders.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * orders[i + 1];
        }
        Ok(FiniteAbelianGroup { orders, haar_weight, strides, order })
    }

    /// `Z_n` with counting measure.
    pub fn cyclic(n: usize) -> Self {
        Self::new(vec![n], Rational64::one()).expect("n ≥ 1")
    }

    /// Product of cyclic factors with counting measure.
    pub fn product(orders: &[usize]) -> Result<Self> {
        Self::new(orders.to_vec(), Rational64::one())
    }

    pub fn with_weight(&self, haar_weight: Rational64) -> Result<Self> {
        Self::new(self.orders.clone(), haar_weight)
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// Number of points `|G|`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn haar_weight(&self) -> Rational64 {
        self.haar_weight
    }

    pub fn weight<T: Real>(&self) -> T {
        T::of(*self.haar_weight.numer() as f64) / T::of(*self.haar_weight.denom() as f64)
    }

    pub fn total_mass(&self) -> Rational64 {
        self.haar_weight * Rational64::from_integer(self.order as i64)
    }

    /// Dual group: same cyclic orders, weight `1/(w·|G|)`.
    pub fn dual(&self) -> Self {
        let w = Rational64::one() / self.total_mass();
        Self::new(self.orders.clone(), w).expect("dual of a valid group is valid")
    }

    /// `self × self`, the group carrying kernels and bilinear symbols.
    pub fn square(&self) -> Self {
        let mut orders = self.orders.clone();
        orders.extend_from_slice(&self.orders);
        Self::new(orders, self.haar_weight * self.haar_weight).expect("square of a valid group")
    }

    /// Same cyclic orders, regardless of Haar weight.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.orders == other.orders
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    /// Builds an element, reducing every coordinate modulo its factor.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        self.check_rank(coords.len())?;
        Ok(GroupElement(coords.iter().zip(&self.orders).map(|(&c, &n)| c.rem_euclid(n as i64) as usize).collect()))
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        x.0.len() == self.rank() && x.0.iter().zip(&self.orders).all(|(&c, &n)| c < n)
    }

    /// Row-major index of an element (last factor varies fastest).
    pub fn index_of(&self, x: &GroupElement) -> usize {
        debug_assert!(self.contains(x));
        x.0.iter().zip(&self.strides).map(|(&c, &s)| c * s).sum()
    }

    pub fn element_at(&self, mut index: usize) -> GroupElement {
        debug_assert!(index < self.order);
        let mut coords = vec![0; self.rank()];
        for (i, &s) in self.strides.iter().enumerate() {
            coords[i] = index / s;
            index %= s;
        }
        GroupElement(coords)
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(move |i| self.element_at(i))
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement(a.0.iter().zip(&b.0).zip(&self.orders).map(|((&x, &y), &n)| (x + y) % n).collect())
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        GroupElement(a.0.iter().zip(&self.orders).map(|(&x, &n)| (n - x) % n).collect())
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, k: i64, a: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter()
                .zip(&self.orders)
                .map(|(&x, &n)| ((x as i128 * k as i128).rem_euclid(n as i128)) as usize)
                .collect(),
        )
    }

    /// Index of `a + b` given indices, without materializing elements.
    pub fn add_index(&self, a: usize, b: usize) -> usize {
        if self.rank() == 1 {
            return (a + b) % self.order;
        }
        let mut out = 0;
        for (&s, &n) in self.strides.iter().zip(&self.orders) {
            let ca = (a / s) % n;
            let cb = (b / s) % n;
            out += ((ca + cb) % n) * s;
        }
        out
    }

    /// Index of `a − b` given indices.
    pub fn sub_index(&self, a: usize, b: usize) -> usize {
        if self.rank() == 1 {
            return (a + self.order - b) % self.order;
        }
        let mut out = 0;
        for (&s, &n) in self.strides.iter().zip(&self.orders) {
            let ca = (a / s) % n;
            let cb = (b / s) % n;
            out += ((ca + n - cb) % n) * s;
        }
        out
    }

    pub fn neg_index(&self, a: usize) -> usize {
        self.sub_index(0, a)
    }

    /// Order of an element.
    pub fn element_order(&self, x: &GroupElement) -> usize {
        x.0.iter().zip(&self.orders).map(|(&c, &n)| n / c.gcd(&n)).fold(1, |acc, k| acc.lcm(&k))
    }

    /// `lcm(n_1, …, n_d)`, the common denominator of every pairing phase.
    pub fn exponent(&self) -> usize {
        self.orders.iter().fold(1, |acc, n| acc.lcm(n))
    }

    /// Phase numerator `k` with `⟨ξ,x⟩ = exp(2πi k / exponent)`.
    pub fn pairing_phase(&self, xi: &GroupElement, x: &GroupElement) -> Result<u64> {
        self.check_rank(xi.0.len())?;
        self.check_rank(x.0.len())?;
        let l = self.exponent() as u128;
        let mut acc: u128 = 0;
        for ((&a, &b), &n) in xi.0.iter().zip(&x.0).zip(&self.orders) {
            let n = n as u128;
            acc = (acc + ((a as u128 % n) * (b as u128 % n) % n) * (l / n)) % l;
        }
        Ok(acc as u64)
    }

    /// Character pairing `⟨ξ,x⟩ = exp(2πi Σ ξ_i x_i / n_i)`; `ξ` is read in the dual.
    pub fn pairing<T: Real>(&self, xi: &GroupElement, x: &GroupElement) -> Result<Complex<T>> {
        let k = self.pairing_phase(xi, x)?;
        Ok(unit_root(k, self.exponent() as u64))
    }

    /// Centered representative of each coordinate, in `(-n/2, n/2]`.
    pub fn centered(&self, x: &GroupElement) -> Vec<i64> {
        x.0.iter()
            .zip(&self.orders)
            .map(|(&c, &n)| {
                let (c, n) = (c as i64, n as i64);
                if 2 * c > n {
                    c - n
                } else {
                    c
                }
            })
            .collect()
    }

    /// Max-norm of the centered representative.
    pub fn centered_norm(&self, x: &GroupElement) -> usize {
        self.centered(x).iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0)
    }

    fn check_rank(&self, got: usize) -> Result<()> {
        if got != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), got });
        }
        Ok(())
    }

    pub fn weight_f64(&self) -> f64 {
        self.haar_weight.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.orders.iter().enumerate() {
            if i > 0 {
                write!(f, "×")?;
            }
            write!(f, "Z_{n}")?;
        }
        write!(f, " [w={}]", self.haar_weight)
    }
}

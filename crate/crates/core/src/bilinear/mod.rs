//! Bilinear multiplier operators in symbol, kernel and transferred form, and the
//! symbol algebra built on them.
//!
//! A symbol `m` lives on `Ĝ × Ĝ` and acts by
//! `B_m(f,g)(x) = ∬ f̂(ξ) ĝ(η) m(ξ,η) ⟨ξ+η, x⟩ dξ dη`.

mod operator;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement, GroupHom};
use crate::scalar::{is_finite, Real};
use crate::transform::{
    ensure_same_group, fourier, fourier_with, inverse_fourier, inverse_fourier_with, naive_fourier, MultiFft, Signal,
};

pub use operator::{
    BilinearOperator, DirectSymbolOperator, KernelOperator, PositiveKernelOperator, SymbolOperator, TransferredOperator,
};

const PARALLEL_THRESHOLD: usize = 256;

/// Dense bilinear symbol on `Ĝ²`, indexed `ξ·|Ĝ| + η`.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearSymbol<T: Real> {
    dual_group: FiniteAbelianGroup,
    values: Vec<Complex<T>>,
}

impl<T: Real> BilinearSymbol<T> {
    pub fn new(dual_group: FiniteAbelianGroup, values: Vec<Complex<T>>) -> Result<Self> {
        let n = dual_group.order();
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: values.len() });
        }
        if let Some(i) = values.iter().position(|z| !is_finite(z)) {
            return Err(Error::InvalidSignal(format!("non-finite symbol value at index {i}")));
        }
        Ok(BilinearSymbol { dual_group, values })
    }

    pub fn constant(dual_group: &FiniteAbelianGroup, c: Complex<T>) -> Self {
        let n = dual_group.order();
        BilinearSymbol { dual_group: dual_group.clone(), values: vec![c; n * n] }
    }

    pub fn from_fn(
        dual_group: &FiniteAbelianGroup,
        mut f: impl FnMut(&GroupElement, &GroupElement) -> Complex<T>,
    ) -> Self {
        let elems: Vec<GroupElement> = dual_group.elements().collect();
        let mut values = Vec::with_capacity(elems.len() * elems.len());
        for xi in &elems {
            for eta in &elems {
                values.push(f(xi, eta));
            }
        }
        BilinearSymbol { dual_group: dual_group.clone(), values }
    }

    pub fn from_index_fn(dual_group: &FiniteAbelianGroup, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let n = dual_group.order();
        let values = (0..n * n).map(|k| f(k / n, k % n)).collect();
        BilinearSymbol { dual_group: dual_group.clone(), values }
    }

    /// `m(ξ,η) = c·conj⟨ξ,a⟩·conj⟨η,b⟩`, so that `B_m(f,g)(x) = c·f(x−a)·g(x−b)`.
    pub fn modulation(
        dual_group: &FiniteAbelianGroup,
        a: &GroupElement,
        b: &GroupElement,
        c: Complex<T>,
    ) -> Result<Self> {
        let g = dual_group;
        let ca = g.elements().map(|xi| g.pairing::<T>(&xi, a).map(|z| z.conj())).collect::<Result<Vec<_>>>()?;
        let cb = g.elements().map(|xi| g.pairing::<T>(&xi, b).map(|z| z.conj())).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_index_fn(g, |i, j| c * ca[i] * cb[j]))
    }

    /// `m(ξ,η) = u(ξ)·v(η)`.
    pub fn tensor(u: &Signal<T>, v: &Signal<T>) -> Result<Self> {
        ensure_same_group(u.group(), v.group())?;
        let (uv, vv) = (u.values(), v.values());
        Ok(Self::from_index_fn(u.group(), |i, j| uv[i] * vv[j]))
    }

    /// Symbol depending only on `η − ξ`.
    pub fn difference(profile: &Signal<T>) -> Self {
        let g = profile.group().clone();
        let pv = profile.values().to_vec();
        Self::from_index_fn(&g, |i, j| pv[g.sub_index(j, i)])
    }

    pub fn dual_group(&self) -> &FiniteAbelianGroup {
        &self.dual_group
    }

    /// Group the operator acts on, `G = dual(Ĝ)`.
    pub fn spatial_group(&self) -> FiniteAbelianGroup {
        self.dual_group.dual()
    }

    pub fn side(&self) -> usize {
        self.dual_group.order()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn get(&self, xi: usize, eta: usize) -> Complex<T> {
        self.values[xi * self.side() + eta]
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == T::zero() && z.im == T::zero())
    }

    /// The symbol as a function on the product group `Ĝ × Ĝ`.
    pub fn as_signal(&self) -> Signal<T> {
        Signal::from_parts(self.dual_group.square(), self.values.clone())
    }

    pub fn from_signal(dual_group: &FiniteAbelianGroup, s: &Signal<T>) -> Result<Self> {
        if !s.group().same_shape(&dual_group.square()) {
            return Err(Error::GroupMismatch(format!("{} is not the square of {}", s.group(), dual_group)));
        }
        Self::new(dual_group.clone(), s.values().to_vec())
    }
}

/// Dense kernel `K(u,v)` on `G²`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<T: Real> {
    group: FiniteAbelianGroup,
    values: Vec<Complex<T>>,
}

impl<T: Real> Kernel<T> {
    pub fn new(group: FiniteAbelianGroup, values: Vec<Complex<T>>) -> Result<Self> {
        let n = group.order();
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: values.len() });
        }
        if let Some(i) = values.iter().position(|z| !is_finite(z)) {
            return Err(Error::InvalidSignal(format!("non-finite kernel value at index {i}")));
        }
        Ok(Kernel { group, values })
    }

    pub fn from_index_fn(group: &FiniteAbelianGroup, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let n = group.order();
        let values = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Kernel { group: group.clone(), values }
    }

    /// Point mass at `(u,v)` with unit `G²` integral.
    pub fn delta(group: &FiniteAbelianGroup, u: &GroupElement, v: &GroupElement) -> Self {
        let n = group.order();
        let w = group.weight::<T>();
        let mut values = vec![Complex::new(T::zero(), T::zero()); n * n];
        values[group.index_of(u) * n + group.index_of(v)] = Complex::new(T::one() / (w * w), T::zero());
        Kernel { group: group.clone(), values }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn get(&self, u: usize, v: usize) -> Complex<T> {
        self.values[u * self.group.order() + v]
    }

    /// `∬ K`.
    pub fn integral(&self) -> Complex<T> {
        let w = self.group.weight::<T>();
        let s: Complex<T> = self.values.iter().copied().sum();
        s * w * w
    }

    /// `‖K‖_{L¹(G²)}`.
    pub fn l1_norm(&self) -> T {
        let w = self.group.weight::<T>();
        self.values.iter().map(|z| z.norm()).sum::<T>() * w * w
    }

    pub fn as_signal(&self) -> Signal<T> {
        Signal::from_parts(self.group.square(), self.values.clone())
    }

    pub fn from_signal(group: &FiniteAbelianGroup, s: &Signal<T>) -> Result<Self> {
        if !s.group().same_shape(&group.square()) {
            return Err(Error::GroupMismatch(format!("{} is not the square of {}", s.group(), group)));
        }
        Self::new(group.clone(), s.values().to_vec())
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }

    /// `K · χ_box` for a set of `(u,v)` index pairs given as a predicate.
    pub fn truncate(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        let n = self.group.order();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &z)| if keep(k / n, k % n) { z } else { Complex::new(T::zero(), T::zero()) })
            .collect();
        Kernel { group: self.group.clone(), values }
    }
}

/// Finitely supported complex measure on `Ĝ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMeasure<T: Real> {
    dual_group: FiniteAbelianGroup,
    atoms: Vec<(GroupElement, Complex<T>)>,
}

impl<T: Real> FiniteMeasure<T> {
    pub fn new(dual_group: FiniteAbelianGroup, atoms: Vec<(GroupElement, Complex<T>)>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for (x, w) in &atoms {
            if !dual_group.contains(x) {
                return Err(Error::InvalidArgument(format!("atom {x} outside {dual_group}")));
            }
            if !seen.insert(x.clone()) {
                return Err(Error::InvalidArgument(format!("repeated atom {x}")));
            }
            if !is_finite(w) {
                return Err(Error::InvalidArgument(format!("non-finite weight at {x}")));
            }
        }
        Ok(FiniteMeasure { dual_group, atoms })
    }

    pub fn point_mass(dual_group: &FiniteAbelianGroup, x: &GroupElement) -> Self {
        FiniteMeasure { dual_group: dual_group.clone(), atoms: vec![(x.clone(), Complex::new(T::one(), T::zero()))] }
    }

    pub fn dual_group(&self) -> &FiniteAbelianGroup {
        &self.dual_group
    }

    pub fn atoms(&self) -> &[(GroupElement, Complex<T>)] {
        &self.atoms
    }

    pub fn total_variation(&self) -> T {
        self.atoms.iter().map(|(_, w)| w.norm()).sum()
    }
}

fn check_operands<T: Real>(m: &BilinearSymbol<T>, f: &Signal<T>, g: &Signal<T>) -> Result<()> {
    ensure_same_group(f.group(), g.group())?;
    if f.group().dual() != *m.dual_group() {
        return Err(Error::GroupMismatch(format!("signals on {} but symbol on {}", f.group(), m.dual_group())));
    }
    Ok(())
}

/// Anti-diagonal collapse `S(s) = ŵ Σ_ξ F̂(ξ) Ĝ(s−ξ) m(ξ, s−ξ)`.
pub(crate) fn collapse_antidiagonal<T: Real>(
    m: &BilinearSymbol<T>,
    fh: &[Complex<T>],
    gh: &[Complex<T>],
) -> Vec<Complex<T>> {
    let dg = m.dual_group();
    let n = dg.order();
    let w = dg.weight::<T>();
    let mv = m.values();
    let one_dim = dg.rank() == 1;
    let row = |s: usize| -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for xi in 0..n {
            let eta = if one_dim {
                if s >= xi {
                    s - xi
                } else {
                    s + n - xi
                }
            } else {
                dg.sub_index(s, xi)
            };
            acc = acc + fh[xi] * gh[eta] * mv[xi * n + eta];
        }
        acc * w
    };
    if n >= PARALLEL_THRESHOLD {
        (0..n).into_par_iter().map(row).collect()
    } else {
        (0..n).map(row).collect()
    }
}

/// `B_m(f,g)` by anti-diagonal collapse and one inverse FFT: `O(|G|²)`.
pub fn apply_symbol<T: Real>(m: &BilinearSymbol<T>, f: &Signal<T>, g: &Signal<T>) -> Result<Signal<T>> {
    check_operands(m, f, g)?;
    let fft = MultiFft::new(f.group().orders());
    Ok(apply_symbol_with(&fft, m, f, g))
}

pub(crate) fn apply_symbol_with<T: Real>(
    fft: &MultiFft<T>,
    m: &BilinearSymbol<T>,
    f: &Signal<T>,
    g: &Signal<T>,
) -> Signal<T> {
    let fh = fourier_with(fft, f);
    let gh = fourier_with(fft, g);
    let s = collapse_antidiagonal(m, fh.values(), gh.values());
    let big = Signal::from_parts(fh.group().clone(), s);
    inverse_fourier_with(fft, &big)
}

/// Direct `O(|G|³)` evaluation of the defining double integral.
pub fn apply_symbol_direct<T: Real>(m: &BilinearSymbol<T>, f: &Signal<T>, g: &Signal<T>) -> Result<Signal<T>> {
    check_operands(m, f, g)?;
    let grp = f.group();
    let dg = grp.dual();
    let fh = naive_fourier(f);
    let gh = naive_fourier(g);
    let w = dg.weight::<T>();
    let n = grp.order();
    let xs: Vec<GroupElement> = grp.elements().collect();
    let duals: Vec<GroupElement> = dg.elements().collect();
    let eval = |x: &GroupElement| -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (i, xi) in duals.iter().enumerate() {
            for (j, eta) in duals.iter().enumerate() {
                let ch = dg.pairing::<T>(&dg.add(xi, eta), x).expect("same rank");
                acc = acc + fh.values()[i] * gh.values()[j] * m.values()[i * n + j] * ch;
            }
        }
        acc * w * w
    };
    let values: Vec<Complex<T>> =
        if n >= 32 { xs.par_iter().map(eval).collect() } else { xs.iter().map(eval).collect() };
    Signal::new(grp.clone(), values)
}

/// `m = K̂`, the two-dimensional transform on `G²`.
pub fn symbol_from_kernel<T: Real>(k: &Kernel<T>) -> BilinearSymbol<T> {
    let s = fourier(&k.as_signal());
    BilinearSymbol { dual_group: k.group().dual(), values: s.into_values() }
}

pub fn kernel_from_symbol<T: Real>(m: &BilinearSymbol<T>) -> Kernel<T> {
    let s = inverse_fourier(&m.as_signal());
    Kernel { group: m.spatial_group(), values: s.into_values() }
}

/// `∬ K(u,v) f(x−u) g(x−v) du dv`, evaluated directly.
pub fn kernel_apply_direct<T: Real>(k: &Kernel<T>, f: &Signal<T>, g: &Signal<T>) -> Result<Signal<T>> {
    ensure_same_group(f.group(), g.group())?;
    let grp = f.group();
    if grp != k.group() {
        return Err(Error::GroupMismatch(format!("signals on {grp}, kernel on {}", k.group())));
    }
    let n = grp.order();
    let w = k.group().weight::<T>();
    let (fv, gv) = (f.values(), g.values());
    let nonzero: Vec<(usize, usize, Complex<T>)> = k
        .values()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.re != T::zero() || z.im != T::zero())
        .map(|(idx, &z)| (idx / n, idx % n, z))
        .collect();
    let values = (0..n)
        .map(|x| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for &(u, v, kz) in &nonzero {
                acc = acc + kz * fv[grp.sub_index(x, u)] * gv[grp.sub_index(x, v)];
            }
            acc * w * w
        })
        .collect();
    Signal::new(grp.clone(), values)
}

/// `m ∘ (π ⊗ π)` for `π : Ĝ → Γ̂`; the result lives on `π.source()²`.
pub fn pullback_symbol<T: Real>(m: &BilinearSymbol<T>, pi: &GroupHom) -> Result<BilinearSymbol<T>> {
    if pi.target() != m.dual_group() {
        return Err(Error::GroupMismatch(format!(
            "π maps into {} but the symbol lives on {}",
            pi.target(),
            m.dual_group()
        )));
    }
    let table = pi.index_table();
    let side = m.side();
    Ok(BilinearSymbol::from_index_fn(pi.source(), |i, j| m.values()[table[i] * side + table[j]]))
}

/// Transferred operator `T_K(f,g)(x) = ∬_{Γ²} K(z₁,z₂) f(x − π̃z₁) g(x − π̃z₂) dz`.
///
/// `pi_tilde : Γ → G`. The representation acts by `R_z f = f(· − π̃ z)`, which makes
/// `T_K = B_{K̂ ∘ (π ⊗ π)}` with `π = dual(π̃)` hold exactly.
pub fn transferred_apply<T: Real>(
    k: &Kernel<T>,
    pi_tilde: &GroupHom,
    f: &Signal<T>,
    g: &Signal<T>,
) -> Result<Signal<T>> {
    ensure_same_group(f.group(), g.group())?;
    if pi_tilde.source() != k.group() {
        return Err(Error::GroupMismatch(format!("π̃ starts at {} but K lives on {}", pi_tilde.source(), k.group())));
    }
    if pi_tilde.target() != f.group() {
        return Err(Error::GroupMismatch(format!("π̃ ends at {} but f lives on {}", pi_tilde.target(), f.group())));
    }
    let gamma = k.group();
    let grp = f.group();
    let table = pi_tilde.index_table();
    let m = gamma.order();
    let w = gamma.weight::<T>();
    let (fv, gv) = (f.values(), g.values());
    let values = (0..grp.order())
        .map(|x| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for z1 in 0..m {
                let fx = fv[grp.sub_index(x, table[z1])];
                for z2 in 0..m {
                    acc = acc + k.values()[z1 * m + z2] * fx * gv[grp.sub_index(x, table[z2])];
                }
            }
            acc * w * w
        })
        .collect();
    Signal::new(grp.clone(), values)
}

/// `(m₁ ⊗ m₂)·m`.
pub fn modulation_product<T: Real>(m1: &Signal<T>, m2: &Signal<T>, m: &BilinearSymbol<T>) -> Result<BilinearSymbol<T>> {
    for s in [m1, m2] {
        if s.group() != m.dual_group() {
            return Err(Error::GroupMismatch(format!("linear symbol on {} vs {}", s.group(), m.dual_group())));
        }
    }
    let n = m.side();
    Ok(BilinearSymbol::from_index_fn(m.dual_group(), |i, j| m1.values()[i] * m2.values()[j] * m.values()[i * n + j]))
}

/// `((λ⊗μ) * m)(ξ,η) = Σ_a Σ_b λ(a) μ(b) m(ξ−a, η−b)`.
pub fn measure_convolve<T: Real>(
    lambda: &FiniteMeasure<T>,
    mu: &FiniteMeasure<T>,
    m: &BilinearSymbol<T>,
) -> Result<BilinearSymbol<T>> {
    let dg = m.dual_group();
    for meas in [lambda, mu] {
        if meas.dual_group() != dg {
            return Err(Error::GroupMismatch(format!("measure on {} vs symbol on {}", meas.dual_group(), dg)));
        }
    }
    let n = m.side();
    let la: Vec<(usize, Complex<T>)> = lambda.atoms().iter().map(|(x, w)| (dg.index_of(x), *w)).collect();
    let mb: Vec<(usize, Complex<T>)> = mu.atoms().iter().map(|(x, w)| (dg.index_of(x), *w)).collect();
    Ok(BilinearSymbol::from_index_fn(dg, |i, j| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for &(a, wa) in &la {
            let ia = dg.sub_index(i, a);
            for &(b, wb) in &mb {
                acc = acc + wa * wb * m.values()[ia * n + dg.sub_index(j, b)];
            }
        }
        acc
    }))
}

/// Convolution of two functions on `Ĝ²` with the dual Haar measure.
pub(crate) fn symbol_convolve<T: Real>(a: &BilinearSymbol<T>, b: &BilinearSymbol<T>) -> BilinearSymbol<T> {
    let c = crate::transform::convolve(&a.as_signal(), &b.as_signal()).expect("same group");
    BilinearSymbol { dual_group: a.dual_group.clone(), values: c.into_values() }
}

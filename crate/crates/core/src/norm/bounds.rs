use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{KhintchineTable, SpaceTriple};
use crate::bilinear::{kernel_from_symbol, BilinearOperator, BilinearSymbol};
use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::ri::{space_norm, ExponentTriple, SpaceSpec};
use crate::scalar::Real;
use crate::transform::{ensure_same_group, inverse_fourier, Signal};

const MAX_FAMILY: usize = 8;

/// `𝔠 = 1` for `p ≥ 1`, else `B_{p₁} B_{p₂} / A_p²`.
pub fn constant_c(triple: &ExponentTriple, table: &KhintchineTable) -> Result<f64> {
    if triple.p >= 1.0 {
        return Ok(1.0);
    }
    let get = |q: f64| table.get(q).ok_or(Error::MissingConstants(q));
    let b1 = get(triple.p1)?.b_q;
    let b2 = get(triple.p2)?.b_q;
    let a = get(triple.p)?.a_q;
    Ok(b1 * b2 / (a * a))
}

/// `𝔡 = 1` for `p ≥ 1`, else `M_(p₁)(X₁) M_(p₂)(X₂) 𝔠`.
pub fn constant_d(triple: &ExponentTriple, table: &KhintchineTable, m1: f64, m2: f64) -> Result<f64> {
    if triple.p >= 1.0 {
        return Ok(1.0);
    }
    Ok(m1 * m2 * constant_c(triple, table)?)
}

/// `(𝔠, 𝔡)` for a space triple, with `M_(pₖ)(Xₖ)` from [`concavity_constant`].
pub fn constants_for(spaces: &SpaceTriple, table: &KhintchineTable) -> Result<(f64, f64)> {
    let (p1, p2, p) = spaces.exponents();
    let triple = ExponentTriple::new(p1, p2, p, false)?;
    let c = constant_c(&triple, table)?;
    if p >= 1.0 {
        return Ok((c, 1.0));
    }
    let m = |x: &SpaceSpec, r: f64| {
        concavity_constant(x, r)
            .ok_or_else(|| Error::InvalidArgument(format!("no known {r}-concavity constant for {x}")))
    };
    let d = constant_d(&triple, table, m(&spaces.x1, p1)?, m(&spaces.x2, p2)?)?;
    Ok((c, d))
}

/// Known `r`-concavity constants: `M_(r)(L^p) = 1` for `r ≥ p ≥ 1`.
pub fn concavity_constant(spec: &SpaceSpec, r: f64) -> Option<f64> {
    match spec.canonical() {
        SpaceSpec::Lebesgue { p } if p >= 1.0 && r >= p => Some(1.0),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `m ≡ 0`.
    Zero,
    /// `m = c·conj⟨ξ,a⟩conj⟨η,b⟩`, so `B(f,g) = c·τ_a f·τ_b g` and Hölder gives `|c|`.
    Modulation { a: Vec<usize>, b: Vec<usize> },
    /// `m = u ⊗ v`, so `B(f,g) = T_u f · T_v g`; each factor bounded by Young or Plancherel.
    Tensor { left: f64, right: f64 },
    /// `‖m^∨‖_{L¹(G²)}` through Minkowski's inequality, for `p ≥ 1`.
    KernelL1,
}

/// A proven upper bound for `‖m‖_{BM}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedBound {
    pub value: f64,
    pub certificate: Certificate,
}

/// Smallest available certified upper bound, for Lebesgue sources and a Lebesgue or
/// weak target with `1/p = 1/p₁ + 1/p₂`; weak targets use `‖h‖_{p,∞} ≤ ‖h‖_p`.
pub fn certified_upper_bound<T: Real>(m: &BilinearSymbol<T>, spaces: &SpaceTriple) -> Option<CertifiedBound> {
    if m.is_zero() {
        return Some(CertifiedBound { value: 0.0, certificate: Certificate::Zero });
    }
    if !spaces.is_lebesgue_family() || !spaces.is_holder_linked() {
        return None;
    }
    let (p1, p2, p) = spaces.exponents();
    let mut cands = Vec::new();
    if let Some((c, a, b)) = detect_modulation(m) {
        cands.push(CertifiedBound { value: c, certificate: Certificate::Modulation { a, b } });
    }
    if p1 >= 1.0 && p2 >= 1.0 {
        if let Some((u, v)) = detect_tensor(m) {
            let left = multiplier_bound(&u, p1);
            let right = multiplier_bound(&v, p2);
            cands.push(CertifiedBound { value: left * right, certificate: Certificate::Tensor { left, right } });
        }
    }
    if p >= 1.0 {
        let k = kernel_from_symbol(m);
        cands.push(CertifiedBound { value: k.l1_norm().to_f64_lossy(), certificate: Certificate::KernelL1 });
    }
    cands.into_iter().min_by(|a, b| a.value.total_cmp(&b.value))
}

/// `‖T_u‖_{L^p → L^p} ≤ ‖u^∨‖_{L¹}`, and `= ‖u‖_∞` at `p = 2`.
fn multiplier_bound<T: Real>(u: &Signal<T>, p: f64) -> f64 {
    let k = inverse_fourier(u);
    let w = k.group().weight_f64();
    let l1 = k.values().iter().map(|z| z.norm().to_f64_lossy()).sum::<f64>() * w;
    if p == 2.0 {
        l1.min(u.sup_norm().to_f64_lossy())
    } else {
        l1
    }
}

fn close<T: Real>(a: Complex<T>, b: Complex<T>, scale: f64) -> bool {
    (a - b).norm().to_f64_lossy() <= 1e-10 * scale
}

/// `m = u ⊗ v` up to rounding.
fn detect_tensor<T: Real>(m: &BilinearSymbol<T>) -> Option<(Signal<T>, Signal<T>)> {
    let n = m.side();
    let (k, _) =
        m.values().iter().enumerate().max_by(|a, b| a.1.norm().to_f64_lossy().total_cmp(&b.1.norm().to_f64_lossy()))?;
    let (i0, j0) = (k / n, k % n);
    let pivot = m.get(i0, j0);
    let scale = pivot.norm().to_f64_lossy();
    let u: Vec<Complex<T>> = (0..n).map(|i| m.get(i, j0)).collect();
    let v: Vec<Complex<T>> = (0..n).map(|j| m.get(i0, j) / pivot).collect();
    for i in 0..n {
        for j in 0..n {
            if !close(m.get(i, j), u[i] * v[j], scale) {
                return None;
            }
        }
    }
    let dg = m.dual_group().clone();
    Some((Signal::from_parts(dg.clone(), u), Signal::from_parts(dg, v)))
}

/// `m = c·conj⟨ξ,a⟩conj⟨η,b⟩`; returns `(|c|, a, b)`.
fn detect_modulation<T: Real>(m: &BilinearSymbol<T>) -> Option<(f64, Vec<usize>, Vec<usize>)> {
    let dg = m.dual_group();
    let n = m.side();
    let c = m.get(0, 0);
    let cn = c.norm().to_f64_lossy();
    if cn == 0.0 {
        return None;
    }
    let g = dg.dual();
    let a = character_point(dg, &g, |i| m.get(i, 0) / c)?;
    let b = character_point(dg, &g, |j| m.get(0, j) / c)?;
    let ca: Vec<Complex<T>> = dg.elements().map(|xi| dg.pairing::<T>(&xi, &a).expect("rank").conj()).collect();
    let cb: Vec<Complex<T>> = dg.elements().map(|xi| dg.pairing::<T>(&xi, &b).expect("rank").conj()).collect();
    for i in 0..n {
        for j in 0..n {
            if !close(m.get(i, j), c * ca[i] * cb[j], cn) {
                return None;
            }
        }
    }
    Some((cn, a.into_coords(), b.into_coords()))
}

/// The point `a ∈ G` with `u(ξ) = conj⟨ξ,a⟩`, read off the unit characters.
fn character_point<T: Real>(
    dg: &FiniteAbelianGroup,
    g: &FiniteAbelianGroup,
    u: impl Fn(usize) -> Complex<T>,
) -> Option<crate::group::GroupElement> {
    let mut coords = Vec::with_capacity(dg.rank());
    for (axis, &n) in dg.orders().iter().enumerate() {
        let idx = if n == 1 { 0 } else { dg.strides()[axis] };
        let z = u(idx);
        let arg = z.im.to_f64_lossy().atan2(z.re.to_f64_lossy());
        let a = (-arg * n as f64 / std::f64::consts::TAU).round() as i64;
        coords.push(a);
    }
    g.element(&coords).ok()
}

/// Slack added to an oracle bound before comparing an estimate against it.
pub const ORACLE_SLACK: f64 = 1e-3;
/// Slack added to a certified bound, covering rounding only.
pub const CERTIFIED_SLACK: f64 = 1e-9;
/// Largest `|G|` on which [`reference_bound`] falls back to the exhaustive oracle.
pub const ORACLE_MAX_GROUP: usize = 3;
const ORACLE_PAIR_BUDGET: u128 = 200_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum BoundSource {
    Certified { certificate: Certificate },
    Oracle { levels: usize },
}

/// An upper reference for `‖m‖_{BM}` against which lower-bound estimates are compared.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBound {
    pub value: f64,
    pub slack: f64,
    #[serde(flatten)]
    pub source: BoundSource,
}

impl ReferenceBound {
    /// `estimate ≤ factor·value + slack`.
    pub fn admits(&self, estimate: f64, factor: f64) -> bool {
        estimate <= factor * self.value + self.slack
    }
}

/// Finest oracle grid on `|G| = n` within the default pair budget.
pub fn default_oracle_levels(n: usize) -> usize {
    (2..=super::exhaustive::MAX_LEVELS).rev().find(|&r| super::grid_size(n, r) <= ORACLE_PAIR_BUDGET).unwrap_or(2)
}

/// A certified bound when one exists, otherwise the exhaustive oracle on `|G| ≤ 3`.
pub fn reference_bound<T: Real>(m: &BilinearSymbol<T>, spaces: &SpaceTriple) -> Result<Option<ReferenceBound>> {
    if let Some(c) = certified_upper_bound(m, spaces) {
        return Ok(Some(ReferenceBound {
            value: c.value,
            slack: CERTIFIED_SLACK,
            source: BoundSource::Certified { certificate: c.certificate },
        }));
    }
    let n = m.side();
    if n > ORACLE_MAX_GROUP {
        return Ok(None);
    }
    let levels = default_oracle_levels(n);
    let est = super::exhaustive_oracle(m, spaces, levels)?;
    Ok(Some(ReferenceBound { value: est.value, slack: ORACLE_SLACK, source: BoundSource::Oracle { levels } }))
}

/// Square-function inequality check for families `{f_j}`, `{g_k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MzReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub norm_bound: f64,
    pub d: f64,
    /// Whether `norm_bound` is a proven upper bound, so that `ratio ≤ 1` is a theorem.
    pub asserted: bool,
}

/// `‖(Σ|B(f_j,g_k)|²)^{1/2}‖_X` against `𝔡·N·‖(Σ|f_j|²)^{1/2}‖_{X₁}‖(Σ|g_k|²)^{1/2}‖_{X₂}`.
pub fn mz_square_check<T: Real, O: BilinearOperator<T> + ?Sized>(
    op: &O,
    spaces: &SpaceTriple,
    fs: &[Signal<T>],
    gs: &[Signal<T>],
    norm_bound: f64,
    analytic: bool,
    d: f64,
) -> Result<MzReport> {
    if fs.is_empty() || gs.is_empty() || fs.len() > MAX_FAMILY || gs.len() > MAX_FAMILY {
        return Err(Error::InvalidArgument(format!("family sizes must lie in 1..={MAX_FAMILY}")));
    }
    let group = op.source_group();
    let n = group.order();
    let square = |fam: &[Signal<T>]| -> Result<Signal<f64>> {
        let mut acc = vec![0.0f64; n];
        for f in fam {
            ensure_same_group(group, f.group())?;
            for (a, z) in acc.iter_mut().zip(f.values()) {
                *a += z.norm_sqr().to_f64_lossy();
            }
        }
        let v: Vec<f64> = acc.iter().map(|a| a.sqrt()).collect();
        Signal::from_real(group, &v)
    };
    let mut acc = vec![0.0f64; n];
    for f in fs {
        for g in gs {
            let out = op.apply(f, g)?;
            for (a, z) in acc.iter_mut().zip(out.values()) {
                *a += z.norm_sqr().to_f64_lossy();
            }
        }
    }
    let lhs_sig = Signal::from_real(group, &acc.iter().map(|a| a.sqrt()).collect::<Vec<_>>())?;
    let lhs = space_norm(&spaces.x, &lhs_sig)?;
    let rhs = d * norm_bound * space_norm(&spaces.x1, &square(fs)?)? * space_norm(&spaces.x2, &square(gs)?)?;
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(MzReport { lhs, rhs, ratio, norm_bound, d, asserted: analytic })
}

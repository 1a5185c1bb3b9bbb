//! Lower-bound estimation of bilinear operator quasi-norms, exhaustive grid
//! oracles for tiny groups, Khintchine constants and the constants `𝔠`, `𝔡`.

mod bounds;
mod exhaustive;
mod khintchine;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bilinear::{BilinearOperator, BilinearSymbol, SymbolOperator};
use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::ri::{magnitudes_norm, space_norm, SpaceSpec};
use crate::scalar::Real;
use crate::transform::Signal;

pub use bounds::{
    certified_upper_bound, concavity_constant, constant_c, constant_d, constants_for, default_oracle_levels,
    mz_square_check, reference_bound, BoundSource, Certificate, CertifiedBound, MzReport, ReferenceBound,
    CERTIFIED_SLACK, ORACLE_MAX_GROUP, ORACLE_SLACK,
};
pub use exhaustive::{exhaustive_operator_oracle, exhaustive_oracle, grid_size, MAX_GRID_PAIRS};
pub use khintchine::{khintchine_estimate, rademacher_ratio, KhintchineConstants, KhintchineTable, Provenance};

/// Largest group for which ascent tracks the output through precomputed columns.
const COLUMN_LIMIT: usize = 1024;
const MIN_STEP: f64 = 1e-9;

/// `(X₁, X₂, X)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTriple {
    pub x1: SpaceSpec,
    pub x2: SpaceSpec,
    pub x: SpaceSpec,
}

impl SpaceTriple {
    pub fn new(x1: SpaceSpec, x2: SpaceSpec, x: SpaceSpec) -> Result<Self> {
        for s in [&x1, &x2, &x] {
            s.validate()?;
        }
        Ok(SpaceTriple { x1, x2, x })
    }

    /// `(L^{p₁}, L^{p₂}, L^p)`.
    pub fn lebesgue(p1: f64, p2: f64, p: f64) -> Result<Self> {
        Self::new(SpaceSpec::lebesgue(p1), SpaceSpec::lebesgue(p2), SpaceSpec::lebesgue(p))
    }

    /// `(L^{p₁}, L^{p₂}, L^{p,∞})`.
    pub fn weak_target(p1: f64, p2: f64, p: f64) -> Result<Self> {
        Self::new(SpaceSpec::lebesgue(p1), SpaceSpec::lebesgue(p2), SpaceSpec::weak(p))
    }

    /// Parses `"p1,p2,p"`; each entry is `p` or `p:q` (Lorentz, `q` may be `inf`).
    ///
    /// `kind` applies to entries without `:`: `lebesgue`, `weak` (target only) or `lorentz`
    /// (which then requires `p:q` entries).
    pub fn parse(exponents: &str, kind: &str) -> Result<Self> {
        let parts: Vec<&str> = exponents.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected three exponents, got {exponents:?}")));
        }
        let mut specs = Vec::with_capacity(3);
        for (i, part) in parts.iter().enumerate() {
            let spec = match part.split_once(':') {
                Some((p, q)) => SpaceSpec::lorentz(parse_real(p)?, parse_real(q)?),
                None => {
                    let p = parse_real(part)?;
                    match kind {
                        "lebesgue" => SpaceSpec::lebesgue(p),
                        "weak" if i == 2 => SpaceSpec::weak(p),
                        "weak" => SpaceSpec::lebesgue(p),
                        "lorentz" => {
                            return Err(Error::Parse(format!("lorentz entries need the form p:q, got {part:?}")))
                        }
                        other => return Err(Error::Parse(format!("unknown space kind {other:?}"))),
                    }
                }
            };
            specs.push(spec);
        }
        Self::new(specs[0], specs[1], specs[2])
    }

    /// The exponents as Lebesgue spaces are read: `(p₁, p₂, p)`.
    pub fn exponents(&self) -> (f64, f64, f64) {
        (self.x1.p(), self.x2.p(), self.x.p())
    }

    /// `X₁ = L^{p₁}`, `X₂ = L^{p₂}` and `X` is `L^p` or `L^{p,∞}`.
    pub fn is_lebesgue_family(&self) -> bool {
        matches!(self.x1.canonical(), SpaceSpec::Lebesgue { .. })
            && matches!(self.x2.canonical(), SpaceSpec::Lebesgue { .. })
            && matches!(self.x.canonical(), SpaceSpec::Lebesgue { .. } | SpaceSpec::Weak { .. })
    }

    pub fn is_holder_linked(&self) -> bool {
        let (p1, p2, p) = self.exponents();
        (1.0 / p - 1.0 / p1 - 1.0 / p2).abs() < 1e-12
    }
}

impl fmt::Display for SpaceTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x1, self.x2, self.x)
    }
}

pub(crate) fn parse_real(s: &str) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| Error::Parse(format!("bad exponent {s:?}: {e}"))),
    }
}

/// Restarts and ascent sweeps per restart, written `RxS`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    pub restarts: usize,
    pub sweeps: usize,
}

impl Budget {
    pub fn new(restarts: usize, sweeps: usize) -> Result<Self> {
        if restarts == 0 {
            return Err(Error::InvalidArgument("budget needs at least one restart".into()));
        }
        Ok(Budget { restarts, sweeps })
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget { restarts: 16, sweeps: 200 }
    }
}

impl FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (r, sw) =
            s.split_once(['x', 'X']).ok_or_else(|| Error::Parse(format!("budget must look like 200x50, got {s:?}")))?;
        let r = r.trim().parse().map_err(|e| Error::Parse(format!("bad restart count in {s:?}: {e}")))?;
        let sw = sw.trim().parse().map_err(|e| Error::Parse(format!("bad sweep count in {s:?}: {e}")))?;
        Budget::new(r, sw)
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.restarts, self.sweeps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMethod {
    Random,
    Ascent,
    Exhaustive,
}

/// A certified lower bound `‖B(f,g)‖_X / (‖f‖_{X₁}‖g‖_{X₂})` with its witness pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = ""))]
pub struct NormEstimate<T: Real> {
    pub value: f64,
    pub witness_f: Signal<T>,
    pub witness_g: Signal<T>,
    pub method: EstimateMethod,
    pub budget: Budget,
    pub seed: u64,
    pub spaces: SpaceTriple,
}

impl<T: Real> NormEstimate<T> {
    /// Ratio recomputed from the stored witnesses.
    pub fn recompute<O: BilinearOperator<T> + ?Sized>(&self, op: &O) -> Result<f64> {
        norm_ratio(op, &self.spaces, &self.witness_f, &self.witness_g)
    }
}

/// `‖B(f,g)‖_X / (‖f‖_{X₁}‖g‖_{X₂})`, and 0 when `f` or `g` vanishes.
pub fn norm_ratio<T: Real, O: BilinearOperator<T> + ?Sized>(
    op: &O,
    spaces: &SpaceTriple,
    f: &Signal<T>,
    g: &Signal<T>,
) -> Result<f64> {
    let nf = space_norm(&spaces.x1, f)?;
    let ng = space_norm(&spaces.x2, g)?;
    if nf == 0.0 || ng == 0.0 {
        return Ok(0.0);
    }
    let out = op.apply(f, g)?;
    Ok(space_norm(&spaces.x, &out)? / (nf * ng))
}

/// Seeded restarts with alternating coordinate ascent on `B_m`.
pub fn estimate_norm<T: Real>(
    m: &BilinearSymbol<T>,
    spaces: &SpaceTriple,
    budget: Budget,
    seed: u64,
) -> Result<NormEstimate<T>> {
    estimate_operator_norm(&SymbolOperator::new(m.clone()), spaces, budget, seed)
}

/// [`estimate_norm`] for any operator.
///
/// Restart `i` starts from a pair drawn with seed `seed ^ i`; restart 0 starts from
/// constant signals. Each restart runs `budget.sweeps` sweeps, and the best
/// normalized witness over all restarts is returned.
pub fn estimate_operator_norm<T: Real, O: BilinearOperator<T> + ?Sized>(
    op: &O,
    spaces: &SpaceTriple,
    budget: Budget,
    seed: u64,
) -> Result<NormEstimate<T>> {
    for s in [&spaces.x1, &spaces.x2, &spaces.x] {
        s.validate()?;
    }
    let group = op.source_group().clone();
    let results: Vec<(f64, Signal<T>, Signal<T>)> = (0..budget.restarts)
        .into_par_iter()
        .map(|i| {
            let (f0, g0) = if i == 0 {
                let one = Signal::constant(&group, Complex::new(T::one(), T::zero()));
                (one.clone(), one)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
                let f = Signal::random(&group, &mut rng);
                let g = Signal::random(&group, &mut rng);
                (f, g)
            };
            let mut engine = Ascent::new(op, spaces);
            let (f, g) = engine.run(f0.into_values(), g0.into_values(), budget.sweeps, 0.5)?;
            finish(op, spaces, &group, f, g)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 > results[best].0 {
            best = i;
        }
    }
    let (value, f, g) = results.into_iter().nth(best).expect("at least one restart");
    let method = if budget.sweeps == 0 { EstimateMethod::Random } else { EstimateMethod::Ascent };
    Ok(NormEstimate { value, witness_f: f, witness_g: g, method, budget, seed, spaces: *spaces })
}

/// Normalizes a witness pair and recomputes its ratio.
pub(crate) fn finish<T: Real, O: BilinearOperator<T> + ?Sized>(
    op: &O,
    spaces: &SpaceTriple,
    group: &FiniteAbelianGroup,
    f: Vec<Complex<T>>,
    g: Vec<Complex<T>>,
) -> Result<(f64, Signal<T>, Signal<T>)> {
    let f = normalize(&spaces.x1, Signal::new(group.clone(), f)?)?;
    let g = normalize(&spaces.x2, Signal::new(group.clone(), g)?)?;
    let value = norm_ratio(op, spaces, &f, &g)?;
    Ok((value, f, g))
}

fn normalize<T: Real>(spec: &SpaceSpec, f: Signal<T>) -> Result<Signal<T>> {
    let n = space_norm(spec, &f)?;
    if n == 0.0 {
        return Ok(f);
    }
    Ok(f.scaled(Complex::new(T::of(1.0 / n), T::zero())))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    F,
    G,
}

/// Coordinate ascent on the ratio; first improvement wins, the step halves after a
/// sweep without improvement.
pub(crate) struct Ascent<'a, T: Real, O: BilinearOperator<T> + ?Sized> {
    op: &'a O,
    spaces: SpaceTriple,
    group: FiniteAbelianGroup,
    weight: f64,
    mags: Vec<f64>,
    _marker: std::marker::PhantomData<T>,
}

impl<'a, T: Real, O: BilinearOperator<T> + ?Sized> Ascent<'a, T, O> {
    pub(crate) fn new(op: &'a O, spaces: &SpaceTriple) -> Self {
        let group = op.source_group().clone();
        let w = group.haar_weight();
        let weight = *w.numer() as f64 / *w.denom() as f64;
        Ascent {
            op,
            spaces: *spaces,
            mags: Vec::with_capacity(group.order()),
            group,
            weight,
            _marker: Default::default(),
        }
    }

    fn norm(&mut self, spec: &SpaceSpec, v: &[Complex<T>]) -> f64 {
        self.mags.clear();
        self.mags.extend(v.iter().map(|z| z.norm().to_f64_lossy()));
        magnitudes_norm(spec, self.weight, &mut self.mags)
    }

    fn apply(&self, f: &[Complex<T>], g: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let fs = Signal::from_parts(self.group.clone(), f.to_vec());
        let gs = Signal::from_parts(self.group.clone(), g.to_vec());
        Ok(self.op.apply(&fs, &gs)?.into_values())
    }

    fn ratio(&mut self, out: &[Complex<T>], nf: f64, ng: f64) -> f64 {
        if nf == 0.0 || ng == 0.0 {
            return 0.0;
        }
        let x = self.spaces.x;
        self.norm(&x, out) / (nf * ng)
    }

    pub(crate) fn run(
        &mut self,
        mut f: Vec<Complex<T>>,
        mut g: Vec<Complex<T>>,
        sweeps: usize,
        step: f64,
    ) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
        let mut s = step;
        for _ in 0..sweeps {
            if s < MIN_STEP {
                break;
            }
            let a = self.half_sweep(Side::F, &mut f, &g, s)?;
            let b = self.half_sweep(Side::G, &mut g, &f, s)?;
            if !(a || b) {
                s *= 0.5;
            }
        }
        Ok((f, g))
    }

    fn half_sweep(&mut self, side: Side, v: &mut [Complex<T>], other: &[Complex<T>], s: f64) -> Result<bool> {
        let n = v.len();
        let zero = Complex::new(T::zero(), T::zero());
        let call = |this: &Self, v: &[Complex<T>]| match side {
            Side::F => this.apply(v, other),
            Side::G => this.apply(other, v),
        };
        let (vs, os) = match side {
            Side::F => (self.spaces.x1, self.spaces.x2),
            Side::G => (self.spaces.x2, self.spaces.x1),
        };
        let n_other = self.norm(&os, other);
        if n_other == 0.0 {
            return Ok(false);
        }
        let columns: Option<Vec<Vec<Complex<T>>>> = if self.op.is_bilinear() && n <= COLUMN_LIMIT {
            let mut e = vec![zero; n];
            let mut cols = Vec::with_capacity(n);
            for x in 0..n {
                e[x] = Complex::new(T::one(), T::zero());
                cols.push(call(self, &e)?);
                e[x] = zero;
            }
            Some(cols)
        } else {
            None
        };
        let mut out = call(self, v)?;
        let nv = self.norm(&vs, v);
        let mut cur = self.ratio(&out, nv, n_other);
        let mut trial = vec![zero; n];
        let mut improved = false;
        let rms = (v.iter().map(|z| z.norm_sqr().to_f64_lossy()).sum::<f64>() / n as f64).sqrt().max(1e-300);
        let rot = Complex::from_polar(T::one(), T::of(std::f64::consts::PI * s));
        let up = T::of(1.0 + s);
        let a = T::of(s * rms);
        for x in 0..n {
            let z = v[x];
            let cands: [Complex<T>; 4] = if z == zero {
                [
                    Complex::new(a, T::zero()),
                    Complex::new(T::zero(), a),
                    Complex::new(-a, T::zero()),
                    Complex::new(T::zero(), -a),
                ]
            } else {
                [z * up, z / up, z * rot, z * rot.conj()]
            };
            for c in cands {
                v[x] = c;
                let nv_new = self.norm(&vs, v);
                if let Some(cols) = &columns {
                    let d = c - z;
                    for ((t, o), col) in trial.iter_mut().zip(&out).zip(&cols[x]) {
                        *t = *o + d * *col;
                    }
                } else {
                    trial = call(self, v)?;
                }
                let r = self.ratio(&trial, nv_new, n_other);
                if r > cur {
                    cur = r;
                    std::mem::swap(&mut out, &mut trial);
                    improved = true;
                    break;
                }
                v[x] = z;
            }
        }
        Ok(improved)
    }
}

#[cfg(test)]
mod tests;

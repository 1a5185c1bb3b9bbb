//! Rearrangement-invariant quasi-norms on finite abelian groups: decreasing
//! rearrangements, Lebesgue, Lorentz and weak-type norms, dilations and Boyd indices.
//!
//! All norms are closed-form integrals over step profiles, so no quadrature error.

mod spec;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::transform::Signal;

pub use spec::{extended_real, Convexification, ExponentTriple, SpaceSpec};

/// Non-increasing step function `f*` on `[0, total_mass)`.
///
/// Steps hold strictly positive, strictly decreasing values; the remaining mass
/// up to `total_mass` carries the value zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RearrangementProfile {
    steps: Vec<(f64, f64)>,
    total_mass: f64,
}

impl RearrangementProfile {
    /// Profile from `(mass, value)` pairs in any order; equal values are merged.
    pub fn from_steps(steps: impl IntoIterator<Item = (f64, f64)>, total_mass: f64) -> Result<Self> {
        let mut raw: Vec<(f64, f64)> = Vec::new();
        for (mass, value) in steps {
            if !(mass.is_finite() && mass >= 0.0 && value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidArgument(format!("bad step ({mass}, {value})")));
            }
            if mass > 0.0 && value > 0.0 {
                raw.push((mass, value));
            }
        }
        raw.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (mass, value) in raw {
            match merged.last_mut() {
                Some(last) if last.1 == value => last.0 += mass,
                _ => merged.push((mass, value)),
            }
        }
        let support: f64 = merged.iter().map(|s| s.0).sum();
        if !(total_mass.is_finite() || total_mass == f64::INFINITY) || total_mass < support * (1.0 - 1e-12) {
            return Err(Error::InvalidArgument(format!("total mass {total_mass} below support mass {support}")));
        }
        Ok(RearrangementProfile { steps: merged, total_mass: total_mass.max(support) })
    }

    pub fn empty(total_mass: f64) -> Self {
        RearrangementProfile { steps: Vec::new(), total_mass }
    }

    /// `(mass, value)` steps with positive values, largest value first.
    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_zero(&self) -> bool {
        self.steps.is_empty()
    }

    /// Mass of `{f ≠ 0}`.
    pub fn support_mass(&self) -> f64 {
        self.steps.iter().map(|s| s.0).sum()
    }

    /// Right endpoints `T_k` paired with the value on `[T_{k-1}, T_k)`.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        let mut t = 0.0;
        self.steps
            .iter()
            .map(|&(mass, value)| {
                t += mass;
                (t, value)
            })
            .collect()
    }

    /// `f*(t)`, right-continuous.
    pub fn value_at(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &(mass, value) in &self.steps {
            acc += mass;
            if t < acc {
                return value;
            }
        }
        0.0
    }

    /// `μ_f(s) = |{|f| > s}|`.
    pub fn distribution(&self, s: f64) -> f64 {
        self.steps.iter().filter(|st| st.1 > s).map(|st| st.0).sum()
    }

    /// `∫ f*`.
    pub fn integral(&self) -> f64 {
        self.steps.iter().map(|&(m, v)| m * v).sum()
    }

    /// `E_{1/s} f*(t) = f*(t/s)`: every mass is multiplied by `s`.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {s}")));
        }
        Ok(RearrangementProfile {
            steps: self.steps.iter().map(|&(m, v)| (m * s, v)).collect(),
            total_mass: self.total_mass * s,
        })
    }

    /// Rows `t_k,v_k` with cumulative right endpoints, ending with the zero tail when present.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t_k", "v_k"]).map_err(csv_err)?;
        let bps = self.breakpoints();
        for (t, v) in &bps {
            w.write_record([format!("{t}"), format!("{v}")]).map_err(csv_err)?;
        }
        let support = bps.last().map_or(0.0, |b| b.0);
        if self.total_mass > support {
            w.write_record([format!("{}", self.total_mass), "0".to_string()]).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Decreasing rearrangement of `|f|` with Haar masses.
pub fn rearrange<T: Real>(f: &Signal<T>) -> RearrangementProfile {
    let w = f.group().haar_weight();
    let w = *w.numer() as f64 / *w.denom() as f64;
    let total = w * f.len() as f64;
    let mut vals: Vec<f64> = f.values().iter().map(|z| z.norm().to_f64_lossy()).filter(|v| *v > 0.0).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    let mut steps: Vec<(f64, f64)> = Vec::new();
    let mut run = 0usize;
    for (i, &v) in vals.iter().enumerate() {
        run += 1;
        if i + 1 == vals.len() || vals[i + 1] != v {
            steps.push((w * run as f64, v));
            run = 0;
        }
    }
    RearrangementProfile { steps, total_mass: total }
}

/// `‖f*‖_{X*}` computed in closed form on the steps.
pub fn profile_norm(spec: &SpaceSpec, prof: &RearrangementProfile) -> Result<f64> {
    spec.validate()?;
    if prof.is_zero() {
        return Ok(0.0);
    }
    let p = spec.p();
    let q = spec.q();
    if q.is_infinite() {
        let mut t = 0.0;
        let mut best = 0.0f64;
        for &(m, v) in prof.steps() {
            t += m;
            best = best.max(t.powf(1.0 / p) * v);
        }
        return Ok(best);
    }
    if (q - p).abs() == 0.0 {
        let s: f64 = prof.steps().iter().map(|&(m, v)| m * v.powf(p)).sum();
        return Ok(s.powf(1.0 / p));
    }
    let r = q / p;
    let mut t_prev = 0.0f64;
    let mut s = 0.0;
    for &(m, v) in prof.steps() {
        let t = t_prev + m;
        s += v.powf(q) * (t.powf(r) - t_prev.powf(r));
        t_prev = t;
    }
    Ok((s * p / q).powf(1.0 / q))
}

/// `‖f‖_X` from the moduli of a signal whose points all carry mass `weight`.
///
/// `mags` is sorted in place; each point is its own step, which gives the same
/// closed forms as merging equal values.
pub fn magnitudes_norm(spec: &SpaceSpec, weight: f64, mags: &mut [f64]) -> f64 {
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let p = spec.p();
    let q = spec.q();
    if q.is_infinite() {
        let mut best = 0.0f64;
        for (k, &v) in mags.iter().enumerate() {
            if v == 0.0 {
                break;
            }
            best = best.max((weight * (k + 1) as f64).powf(1.0 / p) * v);
        }
        return best;
    }
    if q == p {
        let s: f64 = mags.iter().take_while(|v| **v > 0.0).map(|v| v.powf(p)).sum();
        return (weight * s).powf(1.0 / p);
    }
    let r = q / p;
    let mut prev = 0.0f64;
    let mut s = 0.0;
    for (k, &v) in mags.iter().enumerate() {
        if v == 0.0 {
            break;
        }
        let t = (weight * (k + 1) as f64).powf(r);
        s += v.powf(q) * (t - prev);
        prev = t;
    }
    (s * p / q).powf(1.0 / q)
}

/// `‖f‖_X`.
pub fn space_norm<T: Real>(spec: &SpaceSpec, f: &Signal<T>) -> Result<f64> {
    profile_norm(spec, &rearrange(f))
}

/// Analytic dilation norm `h_X(s) = s^{1/p}`.
pub fn dilation_norm(spec: &SpaceSpec, s: f64) -> Result<f64> {
    spec.validate()?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {s}")));
    }
    Ok(s.powf(1.0 / spec.p()))
}

/// Largest observed `‖E_{1/s}f*‖ / ‖f*‖` over a profile corpus; a lower bound for `h_X(s)`.
pub fn dilation_norm_empirical(spec: &SpaceSpec, s: f64, corpus: &[RearrangementProfile]) -> Result<f64> {
    let mut best = 0.0f64;
    for prof in corpus {
        let base = profile_norm(spec, prof)?;
        if base > 0.0 {
            best = best.max(profile_norm(spec, &prof.dilate(s)?)? / base);
        }
    }
    Ok(best)
}

/// Seeded corpus of step profiles with 1 to 12 steps.
pub fn profile_corpus(seed: u64, count: usize) -> Vec<RearrangementProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.random_range(1..=12);
            let steps: Vec<(f64, f64)> =
                (0..k).map(|_| (rng.random_range(0.05..4.0), rng.random_range(0.01..10.0f64))).collect();
            let total = steps.iter().map(|s| s.0).sum::<f64>() * rng.random_range(1.0..2.0);
            RearrangementProfile::from_steps(steps, total).expect("valid random steps")
        })
        .collect()
}

/// `(lower, upper)` Boyd indices; `1/p` for every implemented space.
pub fn boyd_indices(spec: &SpaceSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    Ok((1.0 / spec.p(), 1.0 / spec.p()))
}

/// `(log h(2^-10) / log 2^-10, log h(2^10) / log 2^10)` with `h` estimated on a corpus.
pub fn boyd_indices_numeric(spec: &SpaceSpec, corpus: &[RearrangementProfile]) -> Result<(f64, f64)> {
    let a: f64 = 1024.0;
    let lower = dilation_norm_empirical(spec, 1.0 / a, corpus)?.ln() / (1.0 / a).ln();
    let upper = dilation_norm_empirical(spec, a, corpus)?.ln() / a.ln();
    Ok((lower, upper))
}

/// Constant `C` with `‖f+g‖ ≤ C(‖f‖+‖g‖)`.
pub fn quasi_triangle_constant(spec: &SpaceSpec) -> Result<f64> {
    spec.validate()?;
    let p = spec.p();
    Ok(match *spec {
        SpaceSpec::Lebesgue { .. } => 1f64.max(2f64.powf(1.0 / p - 1.0)),
        SpaceSpec::Lorentz { q, .. } if q == p => 1f64.max(2f64.powf(1.0 / p - 1.0)),
        SpaceSpec::Lorentz { q, .. } if q.is_infinite() => 2f64.powf(1.0 / p) * 1f64.max(2f64.powf((1.0 - p) / p)),
        SpaceSpec::Lorentz { q, .. } => 2f64.powf(1.0 / p) * 1f64.max(2f64.powf(1.0 / q - 1.0)),
        SpaceSpec::Weak { .. } => 2f64.powf(1.0 / p) * 1f64.max(2f64.powf((1.0 - p) / p)),
    })
}

/// Outcome of a `r`-concavity search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub space: SpaceSpec,
    pub exponent: f64,
    pub families: usize,
    /// Largest `(Σ‖f_j‖^r)^{1/r} / ‖(Σ|f_j|^r)^{1/r}‖`; a lower bound for `M_(r)`.
    pub max_ratio: f64,
    pub argmax: Option<usize>,
}

/// Empirical `r`-concavity constant of `spec` over families of signals.
pub fn concavity_check<T: Real>(spec: &SpaceSpec, r: f64, families: &[Vec<Signal<T>>]) -> Result<ConcavityReport> {
    spec.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("concavity exponent must be positive, got {r}")));
    }
    let ratios: Vec<Option<f64>> =
        families.par_iter().map(|fam| concavity_ratio(spec, r, fam)).collect::<Result<Vec<_>>>()?;
    let mut best = 0.0;
    let mut argmax = None;
    for (i, ratio) in ratios.iter().enumerate() {
        if let Some(v) = ratio {
            if *v > best {
                best = *v;
                argmax = Some(i);
            }
        }
    }
    Ok(ConcavityReport { space: *spec, exponent: r, families: families.len(), max_ratio: best, argmax })
}

fn concavity_ratio<T: Real>(spec: &SpaceSpec, r: f64, fam: &[Signal<T>]) -> Result<Option<f64>> {
    let Some(first) = fam.first() else { return Ok(None) };
    let mut acc = vec![0.0f64; first.len()];
    let mut lhs = 0.0;
    for f in fam {
        crate::transform::ensure_same_group(first.group(), f.group())?;
        lhs += space_norm(spec, f)?.powf(r);
        for (a, z) in acc.iter_mut().zip(f.values()) {
            *a += z.norm().to_f64_lossy().powf(r);
        }
    }
    let combined: Vec<f64> = acc.iter().map(|a| a.powf(1.0 / r)).collect();
    let rhs = space_norm(spec, &Signal::<f64>::from_real(first.group(), &combined)?)?;
    if rhs == 0.0 {
        return Ok(None);
    }
    Ok(Some(lhs.powf(1.0 / r) / rhs))
}

//! Approximate identities on `Ĝ`, shrinking cutoffs on `G` and the smoothed symbols
//! `m_j = (ĥ_j ⊗ ĥ_j)·((φ̂_j ⊗ φ̂_j) * m)`, with mechanical checks of (P1)–(P4).
//!
//! On a finite group every function has compact support, so (P1) is checked in its
//! quantitative form: `supp m_j^∨ ⊆ supp(h_j ⊗ h_j) + supp(φ_j ⊗ φ_j)`.
//!
//! The cutoffs satisfy `0 ≤ h_j ≤ 1`, `∫ h_j = 1` and `ĥ_j → 1`, so they concentrate
//! at the identity of `G`. With the unit Haar weight the last stage is `δ₀`.

use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::bilinear::{symbol_convolve, BilinearSymbol};
use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::norm::{estimate_norm, Budget, ReferenceBound, SpaceTriple};
use crate::scalar::{unit_root, Real};
use crate::transform::{convolve, ensure_same_group, fourier, naive_fourier, Signal};

const MASS_TOLERANCE: f64 = 1e-12;
const SUPPORT_THRESHOLD: f64 = 1e-12;
const LADDER_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Fejer,
    Custom,
}

/// Nonnegative unit-mass stages `φ̂_j` on `Ĝ` concentrating at `0`.
#[derive(Clone, Debug)]
pub struct ApproxIdentity<T: Real> {
    dual_group: FiniteAbelianGroup,
    stages: Vec<Signal<T>>,
    generator: Generator,
    windows: Vec<Vec<usize>>,
    spatial: Vec<Vec<usize>>,
}

/// Mechanical (I1)–(I3) verdicts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub nonnegative: bool,
    pub unit_mass: bool,
    pub monotone: bool,
    pub max_mass_error: f64,
}

impl<T: Real> ApproxIdentity<T> {
    /// Tensor products of normalized Fejér kernels `|Σ_{t<L} e(kt/n)|² / L`, one per
    /// cyclic factor. Stage `j` targets the window `⌈n^{j/S}⌉` and enlarges it until
    /// no rung of the neighborhood ladder gains outside mass; the last stage is `δ₀`.
    pub fn fejer(dual_group: &FiniteAbelianGroup, stages: usize) -> Result<Self> {
        if stages == 0 {
            return Err(Error::InvalidArgument("approximate identity needs at least one stage".into()));
        }
        let orders = dual_group.orders().to_vec();
        let mut per_factor: Vec<Vec<(usize, Vec<f64>)>> = Vec::with_capacity(orders.len());
        for &n in &orders {
            let mut chosen: Vec<(usize, Vec<f64>)> = Vec::with_capacity(stages);
            let mut prev: Option<Vec<f64>> = None;
            for j in 1..=stages {
                let target = ((n as f64).powf(j as f64 / stages as f64) - 1e-9).ceil() as usize;
                let mut l = target.clamp(1, n).max(chosen.last().map_or(1, |c| c.0));
                let (p, lad) = loop {
                    let p = fejer_factor(n, l);
                    let lad = factor_ladder(n, &p);
                    let ok = prev.as_ref().is_none_or(|q| lad.iter().zip(q).all(|(a, b)| *a <= b + LADDER_TOLERANCE));
                    if ok || l == n {
                        break (p, lad);
                    }
                    l += 1;
                };
                prev = Some(lad);
                chosen.push((l, p));
            }
            per_factor.push(chosen);
        }
        let inv_w = 1.0 / dual_group.weight_f64();
        let stage_data: Vec<(Vec<usize>, Signal<T>, Vec<usize>)> = (0..stages)
            .into_par_iter()
            .map(|j| {
                let windows: Vec<usize> = per_factor.iter().map(|f| f[j].0).collect();
                let sig = Signal::from_fn(dual_group, |xi| {
                    let v = xi.coords().iter().zip(&per_factor).map(|(&c, f)| f[j].1[c]).product::<f64>();
                    Complex::new(T::of(v * inv_w), T::zero())
                });
                let g = dual_group.dual();
                let spatial = g
                    .elements()
                    .enumerate()
                    .filter(|(_, x)| {
                        x.coords().iter().zip(&orders).zip(&windows).all(|((&c, &n), &l)| c.min(n - c) < l)
                    })
                    .map(|(i, _)| i)
                    .collect();
                (windows, sig, spatial)
            })
            .collect();
        let mut out = ApproxIdentity {
            dual_group: dual_group.clone(),
            stages: Vec::with_capacity(stages),
            generator: Generator::Fejer,
            windows: Vec::with_capacity(stages),
            spatial: Vec::with_capacity(stages),
        };
        for (w, s, sp) in stage_data {
            out.windows.push(w);
            out.stages.push(s);
            out.spatial.push(sp);
        }
        Ok(out)
    }

    /// User-supplied stages; each must be nonnegative with unit mass.
    pub fn custom(dual_group: &FiniteAbelianGroup, stages: Vec<Signal<T>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidArgument("approximate identity needs at least one stage".into()));
        }
        let mut spatial = Vec::with_capacity(stages.len());
        for (j, s) in stages.iter().enumerate() {
            ensure_same_group(s.group(), dual_group)?;
            if s.values().iter().any(|z| z.re < T::zero() || !z.im.is_zero()) {
                return Err(Error::InvalidSignal(format!("stage {} is not nonnegative", j + 1)));
            }
            let mass = s.integral().re.to_f64_lossy();
            if (mass - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidSignal(format!("stage {} has mass {mass}", j + 1)));
            }
            spatial.push(numeric_support(&crate::transform::inverse_fourier(s)));
        }
        Ok(ApproxIdentity {
            dual_group: dual_group.clone(),
            stages,
            generator: Generator::Custom,
            windows: Vec::new(),
            spatial,
        })
    }

    pub fn dual_group(&self) -> &FiniteAbelianGroup {
        &self.dual_group
    }

    pub fn stages(&self) -> &[Signal<T>] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    /// Per-factor Fejér windows of each stage; empty for custom stages.
    pub fn windows(&self) -> &[Vec<usize>] {
        &self.windows
    }

    /// Indices of `supp φ_j` on `G`, stage `j` counted from 1.
    pub fn spatial_support(&self, j: usize) -> &[usize] {
        &self.spatial[j - 1]
    }

    /// `1 − ∫_{N_k} φ̂_j` for the boxes `N_k = {|ξᵢ| ≤ nᵢ/2^k}`, `k = 1, 2, …` down to `{0}`.
    pub fn outside_mass_ladder(&self) -> Vec<Vec<f64>> {
        let dg = &self.dual_group;
        let w = dg.weight_f64();
        let cents: Vec<Vec<i64>> = dg.elements().map(|x| dg.centered(&x)).collect();
        let mut rungs: Vec<Vec<bool>> = Vec::new();
        for k in 1.. {
            let scale = 2f64.powi(k);
            let mask: Vec<bool> = cents
                .iter()
                .map(|c| c.iter().zip(dg.orders()).all(|(&v, &n)| v.unsigned_abs() as f64 <= n as f64 / scale))
                .collect();
            let size = mask.iter().filter(|b| **b).count();
            rungs.push(mask);
            if size <= 1 {
                break;
            }
        }
        self.stages
            .iter()
            .map(|s| {
                rungs
                    .iter()
                    .map(|mask| {
                        let inside: f64 =
                            s.values().iter().zip(mask).filter(|(_, m)| **m).map(|(z, _)| z.re.to_f64_lossy()).sum();
                        1.0 - w * inside
                    })
                    .collect()
            })
            .collect()
    }

    pub fn check(&self) -> IdentityReport {
        let nonnegative = self.stages.iter().all(|s| s.values().iter().all(|z| z.re >= T::zero() && z.im.is_zero()));
        let max_mass_error =
            self.stages.iter().map(|s| (s.integral().re.to_f64_lossy() - 1.0).abs()).fold(0.0, f64::max);
        let lad = self.outside_mass_ladder();
        let monotone = lad.windows(2).all(|w| w[1].iter().zip(&w[0]).all(|(a, b)| *a <= b + LADDER_TOLERANCE));
        IdentityReport { nonnegative, unit_mass: max_mass_error <= MASS_TOLERANCE, monotone, max_mass_error }
    }
}

/// Normalized Fejér weights on `Z_n` with window `l`.
fn fejer_factor(n: usize, l: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|k| {
            let s: Complex<f64> = (0..l).map(|t| unit_root::<f64>((k * t) as u64, n as u64)).sum();
            s.norm_sqr() / l as f64
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn factor_ladder(n: usize, p: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 1.. {
        let r = n as f64 / 2f64.powi(k);
        let mut inside = 0.0;
        let mut size = 0;
        for (c, v) in p.iter().enumerate() {
            if (c.min(n - c) as f64) <= r {
                inside += v;
                size += 1;
            }
        }
        out.push(1.0 - inside);
        if size <= 1 {
            break;
        }
    }
    out
}

fn numeric_support<T: Real>(s: &Signal<T>) -> Vec<usize> {
    let scale = s.sup_norm().to_f64_lossy().max(1.0);
    s.support(T::of(SUPPORT_THRESHOLD * scale))
}

/// Cutoffs `h_j` on `G` with `0 ≤ h_j ≤ 1` and `∫ h_j = 1`.
#[derive(Clone, Debug)]
pub struct CutoffFamily<T: Real> {
    group: FiniteAbelianGroup,
    stages: Vec<Signal<T>>,
    lengths: Vec<Vec<usize>>,
    supports: Vec<Vec<usize>>,
}

impl<T: Real> CutoffFamily<T> {
    /// Centered binomial kernels: on each factor `Z_n` the `k`-fold cyclic power of
    /// `(δ₋₁ + 2δ₀ + δ₁)/4`, so `ĥ_j(ξ) = Π cos^{2k_i}(πξ_i/n_i)` lies in `[0, 1]` and
    /// increases pointwise as the radii `k_i = ⌈n_i^{1−j/S}⌉ − 1` shrink.
    ///
    /// Radii are raised to a common floor where needed for `h_j ≤ 1`; when the group has
    /// total mass exactly 1 the only admissible cutoff is the constant `1`.
    pub fn shrinking(group: &FiniteAbelianGroup, stages: usize) -> Result<Self> {
        if stages == 0 {
            return Err(Error::InvalidArgument("cutoff family needs at least one stage".into()));
        }
        let one = num_rational::Rational64::from_integer(1);
        let total = group.total_mass();
        if total < one {
            return Err(Error::InvalidArgument(format!(
                "{group} has total mass below 1; no cutoff with 0 <= h <= 1 and unit integral"
            )));
        }
        let orders = group.orders().to_vec();
        let w = group.weight_f64();
        let mut out =
            CutoffFamily { group: group.clone(), stages: Vec::new(), lengths: Vec::new(), supports: Vec::new() };
        if total == one {
            let sig = Signal::constant(group, Complex::new(T::one(), T::zero()));
            for _ in 0..stages {
                out.supports.push((0..group.order()).collect());
                out.lengths.push(Vec::new());
                out.stages.push(sig.clone());
            }
            return Ok(out);
        }
        let peak = |k: &[usize]| orders.iter().zip(k).map(|(&n, &k)| binomial_profile(n, k)[0]).product::<f64>() / w;
        let mut floor = 0;
        while peak(&vec![floor; orders.len()]) > 1.0 + MASS_TOLERANCE {
            floor += 1;
        }
        for j in 1..=stages {
            let frac = 1.0 - j as f64 / stages as f64;
            let radii: Vec<usize> = orders
                .iter()
                .map(|&n| {
                    let side = (((n as f64).powf(frac) - 1e-9).ceil() as usize).clamp(1, n);
                    (side - 1).max(floor)
                })
                .collect();
            let profiles: Vec<Vec<f64>> = orders.iter().zip(&radii).map(|(&n, &k)| binomial_profile(n, k)).collect();
            let sig = Signal::from_fn(group, |x| {
                let v = x.coords().iter().zip(&profiles).map(|(&c, p)| p[c]).product::<f64>() / w;
                Complex::new(T::of(v), T::zero())
            });
            out.supports.push(sig.support(T::zero()));
            out.stages.push(sig);
            out.lengths.push(radii);
        }
        Ok(out)
    }

    pub fn custom(group: &FiniteAbelianGroup, stages: Vec<Signal<T>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidArgument("cutoff family needs at least one stage".into()));
        }
        let mut supports = Vec::with_capacity(stages.len());
        for (j, s) in stages.iter().enumerate() {
            ensure_same_group(s.group(), group)?;
            if s.values().iter().any(|z| z.re < T::zero() || z.re > T::one() || !z.im.is_zero()) {
                return Err(Error::InvalidSignal(format!("cutoff {} leaves [0, 1]", j + 1)));
            }
            let mass = s.integral().re.to_f64_lossy();
            if (mass - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidSignal(format!("cutoff {} has integral {mass}", j + 1)));
            }
            supports.push(s.support(T::zero()));
        }
        Ok(CutoffFamily { group: group.clone(), stages, lengths: Vec::new(), supports })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn stages(&self) -> &[Signal<T>] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// Per-factor binomial radii of each stage; empty for custom or constant cutoffs.
    pub fn lengths(&self) -> &[Vec<usize>] {
        &self.lengths
    }

    /// Indices of `supp h_j`, stage `j` counted from 1.
    pub fn support(&self, j: usize) -> &[usize] {
        &self.supports[j - 1]
    }

    /// `ĥ_j` on `Ĝ` for every stage.
    pub fn transforms(&self) -> Vec<Signal<T>> {
        self.stages.iter().map(fourier).collect()
    }
}

/// `k`-fold cyclic convolution power of `(δ₋₁ + 2δ₀ + δ₁)/4` on `Z_n`, as point masses.
fn binomial_profile(n: usize, k: usize) -> Vec<f64> {
    let mut p = vec![0.0; n];
    p[0] = 1.0;
    for _ in 0..k {
        let mut q = vec![0.0; n];
        for (x, &v) in p.iter().enumerate() {
            if v != 0.0 {
                q[x] += 0.5 * v;
                q[(x + 1) % n] += 0.25 * v;
                q[(x + n - 1) % n] += 0.25 * v;
            }
        }
        p = q;
    }
    p
}

fn check_stage<T: Real>(m: &BilinearSymbol<T>, h: &CutoffFamily<T>, phi: &ApproxIdentity<T>, j: usize) -> Result<()> {
    ensure_same_group(phi.dual_group(), m.dual_group())?;
    ensure_same_group(&h.group().dual(), m.dual_group())?;
    let stages = h.len().min(phi.len());
    if j == 0 || j > stages {
        return Err(Error::InvalidArgument(format!("stage {j} outside 1..={stages}")));
    }
    Ok(())
}

/// `m_j = (ĥ_j ⊗ ĥ_j)·((φ̂_j ⊗ φ̂_j) * m)`, stage `j` counted from 1.
pub fn build_mj<T: Real>(
    m: &BilinearSymbol<T>,
    h: &CutoffFamily<T>,
    phi: &ApproxIdentity<T>,
    j: usize,
) -> Result<BilinearSymbol<T>> {
    check_stage(m, h, phi, j)?;
    let p = &phi.stages()[j - 1];
    let smoothed = symbol_convolve(&BilinearSymbol::tensor(p, p)?, m);
    let hat = fourier(&h.stages()[j - 1]);
    let hv = hat.values();
    let n = m.side();
    Ok(BilinearSymbol::from_index_fn(m.dual_group(), |a, b| hv[a] * hv[b] * smoothed.values()[a * n + b]))
}

/// [`build_mj`] by the double-sum convolution and the naive transform.
pub fn build_mj_direct<T: Real>(
    m: &BilinearSymbol<T>,
    h: &CutoffFamily<T>,
    phi: &ApproxIdentity<T>,
    j: usize,
) -> Result<BilinearSymbol<T>> {
    check_stage(m, h, phi, j)?;
    let dg = m.dual_group();
    let n = m.side();
    let w = dg.weight::<T>();
    let p = phi.stages()[j - 1].values();
    let hat = naive_fourier(&h.stages()[j - 1]);
    let hv = hat.values();
    Ok(BilinearSymbol::from_index_fn(dg, |xi, eta| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for a in 0..n {
            for b in 0..n {
                acc = acc + p[a] * p[b] * m.get(dg.sub_index(xi, a), dg.sub_index(eta, b));
            }
        }
        hv[xi] * hv[eta] * acc * w * w
    }))
}

/// A symbol together with the families and the stages `m_1, …, m_S` built from it.
#[derive(Clone, Debug)]
pub struct ApproxSequence<T: Real> {
    pub cutoffs: CutoffFamily<T>,
    pub identity: ApproxIdentity<T>,
    pub symbols: Vec<BilinearSymbol<T>>,
}

impl<T: Real> ApproxSequence<T> {
    pub fn new(m: &BilinearSymbol<T>, cutoffs: CutoffFamily<T>, identity: ApproxIdentity<T>) -> Result<Self> {
        let stages = cutoffs.len().min(identity.len());
        let symbols =
            (1..=stages).into_par_iter().map(|j| build_mj(m, &cutoffs, &identity, j)).collect::<Result<Vec<_>>>()?;
        Ok(ApproxSequence { cutoffs, identity, symbols })
    }

    /// Shrinking boxes and Fejér stages.
    pub fn standard(m: &BilinearSymbol<T>, stages: usize) -> Result<Self> {
        let cutoffs = CutoffFamily::shrinking(&m.spatial_group(), stages)?;
        let identity = ApproxIdentity::fejer(m.dual_group(), stages)?;
        Self::new(m, cutoffs, identity)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub spaces: SpaceTriple,
    pub budget: Budget,
    pub seed: u64,
    /// Symbol sampled from a continuous model; enables the (P2) monotonicity check.
    pub continuous: bool,
    /// The constant `𝔡` multiplying the reference bound in (P4).
    pub d: f64,
    /// Reference for `‖m‖`; (P4) is only asserted when present.
    pub bound: Option<ReferenceBound>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Unchecked,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRow {
    pub stage: usize,
    pub sup_deviation: f64,
    pub sup_norm: f64,
    pub support_size: usize,
    pub allowed_size: usize,
    pub support_contained: bool,
    /// `max_ξ |ĥ_j(ξ) − 1|`.
    pub cutoff_defect: f64,
    pub p4_estimate: f64,
    pub p4: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxReport {
    pub stages: Vec<StageRow>,
    pub p1: bool,
    pub p3: bool,
    pub p2_monotone: Option<bool>,
    pub p4_violations: usize,
    pub d: f64,
    pub bound: Option<ReferenceBound>,
    pub spaces: SpaceTriple,
    pub budget: Budget,
    pub seed: u64,
}

impl ApproxReport {
    pub fn passed(&self) -> bool {
        self.p1 && self.p3 && self.p2_monotone != Some(false) && self.p4_violations == 0
    }

    /// One row per stage: `stage,sup_deviation,sup_norm,p1_support_size,p4_estimate`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["stage", "sup_deviation", "sup_norm", "p1_support_size", "p4_estimate"]).map_err(csv_error)?;
        for r in &self.stages {
            w.write_record([
                r.stage.to_string(),
                format!("{:?}", r.sup_deviation),
                format!("{:?}", r.sup_norm),
                r.support_size.to_string(),
                format!("{:?}", r.p4_estimate),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// `A + B` in `G` as a membership table.
fn sumset(g: &FiniteAbelianGroup, a: &[usize], b: &[usize]) -> Vec<bool> {
    let mut mark = vec![false; g.order()];
    for &x in a {
        for &y in b {
            mark[g.add_index(x, y)] = true;
        }
    }
    mark
}

/// Checks (P1)–(P4) stage by stage.
pub fn verify_p<T: Real>(m: &BilinearSymbol<T>, seq: &ApproxSequence<T>, opts: &VerifyOptions) -> Result<ApproxReport> {
    let g = m.spatial_group();
    let n = g.order();
    let m_sup = m.sup_norm().to_f64_lossy();
    let threshold = SUPPORT_THRESHOLD * m_sup.max(1.0);
    let hats = seq.cutoffs.transforms();
    let rows = (1..=seq.len())
        .into_par_iter()
        .map(|j| -> Result<StageRow> {
            let mj = &seq.symbols[j - 1];
            let kernel = crate::transform::inverse_fourier(&mj.as_signal());
            let support = kernel.support(T::of(threshold));
            let side = sumset(&g, seq.cutoffs.support(j), seq.identity.spatial_support(j));
            let contained = support.iter().all(|&i| side[i / n] && side[i % n]);
            let allowed = side.iter().filter(|b| **b).count();
            let sup_norm = mj.sup_norm().to_f64_lossy();
            let cutoff_defect = hats[j - 1]
                .values()
                .iter()
                .map(|z| (*z - Complex::new(T::one(), T::zero())).norm().to_f64_lossy())
                .fold(0.0, f64::max);
            let est = estimate_norm(mj, &opts.spaces, opts.budget, opts.seed)?.value;
            let p4 = match &opts.bound {
                Some(b) if b.admits(est, opts.d) => Verdict::Pass,
                Some(_) => Verdict::Fail,
                None => Verdict::Unchecked,
            };
            Ok(StageRow {
                stage: j,
                sup_deviation: mj.max_abs_diff(m).to_f64_lossy(),
                sup_norm,
                support_size: support.len(),
                allowed_size: allowed * allowed,
                support_contained: contained,
                cutoff_defect,
                p4_estimate: est,
                p4,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let p1 = rows.iter().all(|r| r.support_contained);
    let p3 = rows.iter().all(|r| r.sup_norm <= m_sup + 1e-12);
    let p2_monotone = opts.continuous.then(|| {
        let tail = &rows[rows.len().saturating_sub(3)..];
        tail.windows(2).all(|w| w[1].sup_deviation <= w[0].sup_deviation + 1e-12)
    });
    let p4_violations = rows.iter().filter(|r| r.p4 == Verdict::Fail).count();
    Ok(ApproxReport {
        stages: rows,
        p1,
        p3,
        p2_monotone,
        p4_violations,
        d: opts.d,
        bound: opts.bound.clone(),
        spaces: opts.spaces,
        budget: opts.budget,
        seed: opts.seed,
    })
}

/// Deviation of `m * Φ_j` from `m`, and the factorization check for difference symbols.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizedReport {
    /// `max |m * Φ_j − m|` per stage.
    pub stage_deviation: Vec<f64>,
    /// `|m * Φ_S − m|` at every point, indexed `ξ·|Ĝ| + η`.
    pub final_pointwise: Vec<f64>,
    /// Point of largest final deviation.
    pub worst_point: (usize, usize),
    /// Whether `m(ξ,η)` depends on `η − ξ` only.
    pub difference_symbol: bool,
    /// Largest factorization residual over the stages, for difference symbols.
    pub factorization_residual: Option<f64>,
}

pub fn normalized_check<T: Real>(m: &BilinearSymbol<T>, phi: &ApproxIdentity<T>) -> Result<NormalizedReport> {
    ensure_same_group(phi.dual_group(), m.dual_group())?;
    let dg = m.dual_group();
    let n = m.side();
    let smoothed: Vec<BilinearSymbol<T>> =
        phi.stages().iter().map(|p| Ok(symbol_convolve(&BilinearSymbol::tensor(p, p)?, m))).collect::<Result<_>>()?;
    let stage_deviation = smoothed.iter().map(|s| s.max_abs_diff(m).to_f64_lossy()).collect();
    let last = smoothed.last().expect("at least one stage");
    let final_pointwise: Vec<f64> =
        last.values().iter().zip(m.values()).map(|(a, b)| (*a - *b).norm().to_f64_lossy()).collect();
    let mut worst = 0;
    for (i, v) in final_pointwise.iter().enumerate() {
        if *v > final_pointwise[worst] {
            worst = i;
        }
    }
    let scale = m.sup_norm().to_f64_lossy().max(1.0);
    let difference_symbol = (0..n)
        .all(|a| (0..n).all(|b| (m.get(a, b) - m.get(0, dg.sub_index(b, a))).norm().to_f64_lossy() <= 1e-12 * scale));
    let factorization_residual = if difference_symbol {
        let profile = Signal::from_fn(dg, |x| m.get(0, dg.index_of(x)));
        let mut worst = 0.0f64;
        for p in phi.stages() {
            worst = worst.max(difference_factorization(&profile, p, p)?);
        }
        Some(worst)
    } else {
        None
    };
    Ok(NormalizedReport {
        stage_deviation,
        final_pointwise,
        worst_point: (worst / n, worst % n),
        difference_symbol,
        factorization_residual,
    })
}

/// `max |m * (φ ⊗ ψ) − (M * (ψ * φ̃))(η − ξ)|` for `m(ξ,η) = M(η − ξ)`, `φ̃(ζ) = φ(−ζ)`.
pub fn difference_factorization<T: Real>(profile: &Signal<T>, phi: &Signal<T>, psi: &Signal<T>) -> Result<f64> {
    ensure_same_group(profile.group(), phi.group())?;
    ensure_same_group(profile.group(), psi.group())?;
    let dg = profile.group();
    let lhs = symbol_convolve(&BilinearSymbol::tensor(phi, psi)?, &BilinearSymbol::difference(profile));
    let reflected = Signal::from_fn(dg, |x| phi.at(&dg.neg(x)));
    let inner = convolve(psi, &reflected)?;
    let rhs = BilinearSymbol::difference(&convolve(profile, &inner)?);
    Ok(lhs.max_abs_diff(&rhs).to_f64_lossy())
}

#[cfg(test)]
mod tests;

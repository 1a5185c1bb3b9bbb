use num_complex::{Complex, Complex64 as C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{finish, Ascent, Budget, EstimateMethod, NormEstimate, SpaceTriple};
use crate::bilinear::{BilinearOperator, BilinearSymbol, SymbolOperator};
use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::ri::{magnitudes_norm, SpaceSpec};
use crate::scalar::Real;
use crate::transform::Signal;

/// Largest number of grid pairs the oracle will enumerate.
pub const MAX_GRID_PAIRS: u128 = 20_000_000;
const MAX_GROUP: usize = 4;
pub(crate) const MAX_LEVELS: usize = 9;
const POLISH_STARTS: usize = 16;
const POLISH_SWEEPS: usize = 400;
const PATTERN_PASSES: usize = 4000;
const WEAK_STARTS: usize = 4;
const SURROGATE_PASSES: usize = 600;
const RANDOM_DIRECTIONS: usize = 64;
const RANDOM_DIRECTION_SEED: u64 = 0x5eed;

/// Phase levels: the `r` equally spaced turns together with the quarter turns, as
/// multiples of `1/(4r)` of a full turn.
fn phase_levels(r: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..r).map(|k| 4 * k).chain((0..4).map(|k| k * r)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Grid vectors on `n` points as `(magnitude level, phase index)` pairs.
///
/// Magnitudes are `k/(r−1)`; the largest coordinate modulus is 1 and the first
/// nonzero coordinate has phase 0, which loses nothing since the ratio is invariant
/// under scaling each argument.
fn grid_vectors(n: usize, r: usize) -> Vec<Vec<(usize, usize)>> {
    let phases = phase_levels(r).len();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(n: usize, r: usize, phases: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if cur.len() == n {
            if cur.iter().any(|c| c.0 == r - 1) {
                out.push(cur.clone());
            }
            return;
        }
        let leading = cur.iter().all(|c| c.0 == 0);
        cur.push((0, 0));
        rec(n, r, phases, cur, out);
        cur.pop();
        for mag in 1..r {
            for ph in 0..if leading { 1 } else { phases } {
                cur.push((mag, ph));
                rec(n, r, phases, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, r, phases, &mut cur, &mut out);
    out
}

/// Number of `(f,g)` pairs the oracle enumerates on `n` points with `r` levels.
pub fn grid_size(n: usize, r: usize) -> u128 {
    if r < 2 {
        return 0;
    }
    let ph = phase_levels(r).len();
    let full = (((r - 1) * ph + 1) as u128, ((r - 2) * ph + 1) as u128);
    let mut total: u128 = 0;
    // count by the position of the first nonzero coordinate
    for lead in 0..n {
        let rest = (n - lead - 1) as u32;
        // leading coordinate at the top magnitude, the rest free
        let a = full.0.pow(rest);
        // leading coordinate below the top, so the rest must reach it
        let b = (r as u128 - 2) * (full.0.pow(rest) - full.1.pow(rest));
        total += a + b;
    }
    total * total
}

/// Brute-force maximum over a magnitude/phase grid, polished by deterministic
/// pattern search from the best grid points. Always a lower bound for the norm.
pub fn exhaustive_oracle<T: Real>(
    m: &BilinearSymbol<T>,
    spaces: &SpaceTriple,
    levels: usize,
) -> Result<NormEstimate<T>> {
    exhaustive_operator_oracle(&SymbolOperator::new(m.clone()), spaces, levels)
}

pub fn exhaustive_operator_oracle<T: Real, O: BilinearOperator<T> + ?Sized>(
    op: &O,
    spaces: &SpaceTriple,
    levels: usize,
) -> Result<NormEstimate<T>> {
    let group = op.source_group().clone();
    let n = group.order();
    if n > MAX_GROUP {
        return Err(Error::GroupTooLarge(n));
    }
    if !(2..=MAX_LEVELS).contains(&levels) {
        return Err(Error::InvalidArgument(format!("grid levels must lie in 2..={MAX_LEVELS}, got {levels}")));
    }
    let pairs = grid_size(n, levels);
    if pairs > MAX_GRID_PAIRS {
        return Err(Error::GridTooLarge(pairs));
    }
    let eval = Evaluator::new(op, spaces)?;
    let phases = phase_levels(levels);
    let to_vector = |v: &[(usize, usize)]| -> Vec<C64> {
        v.iter()
            .map(|&(mag, ph)| {
                if mag == 0 {
                    return C64::new(0.0, 0.0);
                }
                let r = mag as f64 / (levels - 1) as f64;
                let turn = phases[ph] as f64 / (4 * levels) as f64;
                C64::from_polar(r, std::f64::consts::TAU * turn)
            })
            .collect()
    };
    let grid: Vec<Vec<C64>> = grid_vectors(n, levels).iter().map(|v| to_vector(v)).collect();
    let mut buf = Vec::with_capacity(n);
    let norms1: Vec<f64> = grid.iter().map(|v| eval.norm(&spaces.x1, v, &mut buf)).collect();
    let norms2: Vec<f64> = grid.iter().map(|v| eval.norm(&spaces.x2, v, &mut buf)).collect();
    let scored: Vec<Vec<(f64, usize, usize)>> = (0..grid.len())
        .into_par_iter()
        .map(|i| -> Result<Vec<(f64, usize, usize)>> {
            let mut top: Vec<(f64, usize, usize)> = Vec::new();
            let mut mags = Vec::with_capacity(n);
            let mut out = vec![C64::new(0.0, 0.0); n];
            let partial = eval.partial(&grid[i]);
            for (j, gv) in grid.iter().enumerate() {
                match &partial {
                    Some(a) => contract(a, gv, &mut out),
                    None => eval.apply(&grid[i], gv, &mut out)?,
                }
                let r = eval.norm(&spaces.x, &out, &mut mags) / (norms1[i] * norms2[j]);
                push_top(&mut top, (r, i, j));
            }
            Ok(top)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut top = Vec::new();
    for t in scored.into_iter().flatten() {
        push_top(&mut top, t);
    }
    let to_t = |v: &[C64]| -> Vec<Complex<T>> { v.iter().map(|z| Complex::new(T::of(z.re), T::of(z.im))).collect() };
    let polished: Vec<(f64, Vec<C64>, Vec<C64>)> = top
        .par_iter()
        .map(|&(_, i, j)| -> Result<(f64, Vec<C64>, Vec<C64>)> {
            let mut out = vec![C64::new(0.0, 0.0); n];
            let mut buf = Vec::with_capacity(n);
            let mut ratio = |a: &[C64], b: &[C64]| eval.ratio(a, b, &mut out, &mut buf);
            let (f, g) = pattern_search(&mut ratio, &grid[i], &grid[j], 0.5 / levels as f64)?;
            Ok((ratio(&f, &g)?, f, g))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..polished.len()).collect();
    order.sort_by(|&a, &b| polished[b].0.total_cmp(&polished[a].0).then(a.cmp(&b)));
    let weak_rank: Vec<usize> =
        (0..polished.len()).map(|k| order.iter().position(|&o| o == k).unwrap_or(usize::MAX)).collect();
    let per_start: Vec<Vec<(f64, Signal<T>, Signal<T>)>> = top
        .par_iter()
        .zip(polished.par_iter())
        .enumerate()
        .map(|(k, (&(_, i, j), (_, f, g)))| -> Result<Vec<(f64, Signal<T>, Signal<T>)>> {
            let mut starts = vec![(grid[i].clone(), grid[j].clone()), (f.clone(), g.clone())];
            if spaces.x.is_weak() && weak_rank[k] < WEAK_STARTS {
                for (wf, wg) in weak_polish(&eval, f.clone(), g.clone())? {
                    let mut out = vec![C64::new(0.0, 0.0); n];
                    let mut buf = Vec::with_capacity(n);
                    let ratio = |a: &[C64], b: &[C64]| eval.ratio(a, b, &mut out, &mut buf);
                    starts.push(pattern_search(ratio, &wf, &wg, 1e-4)?);
                }
            }
            let mut cands = Vec::with_capacity(starts.len() + 1);
            for (k, (f, g)) in starts.into_iter().enumerate() {
                if k == 1 {
                    let mut engine = Ascent::new(op, spaces);
                    let (af, ag) = engine.run(to_t(&f), to_t(&g), POLISH_SWEEPS, 1e-3)?;
                    cands.push(finish(op, spaces, &group, af, ag)?);
                }
                cands.push(finish(op, spaces, &group, to_t(&f), to_t(&g))?);
            }
            Ok(cands)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(f64, Signal<T>, Signal<T>)> = None;
    for c in per_start.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| c.0 > b.0) {
            best = Some(c);
        }
    }
    let (value, f, g) = best.expect("grid is never empty");
    Ok(NormEstimate {
        value,
        witness_f: f,
        witness_g: g,
        method: EstimateMethod::Exhaustive,
        budget: Budget { restarts: top.len(), sweeps: POLISH_SWEEPS },
        seed: 0,
        spaces: *spaces,
    })
}

/// `out[z] = Σ_y g[y] a[y][z]`.
fn contract(a: &[C64], g: &[C64], out: &mut [C64]) {
    let n = g.len();
    out.fill(C64::new(0.0, 0.0));
    for (y, gy) in g.iter().enumerate() {
        if gy.re == 0.0 && gy.im == 0.0 {
            continue;
        }
        for (o, t) in out.iter_mut().zip(&a[y * n..(y + 1) * n]) {
            *o += gy * t;
        }
    }
}

/// Ratio evaluation in double precision; bilinear operators go through the
/// tensor `B(e_x, e_y)(z)`.
struct Evaluator<'a, T: Real, O: BilinearOperator<T> + ?Sized> {
    op: &'a O,
    spaces: SpaceTriple,
    group: FiniteAbelianGroup,
    weight: f64,
    tensor: Option<Vec<C64>>,
    _marker: std::marker::PhantomData<T>,
}

impl<'a, T: Real, O: BilinearOperator<T> + ?Sized> Evaluator<'a, T, O> {
    fn new(op: &'a O, spaces: &SpaceTriple) -> Result<Self> {
        let group = op.source_group().clone();
        let n = group.order();
        let tensor = if op.is_bilinear() {
            let mut t = Vec::with_capacity(n * n * n);
            for x in 0..n {
                let ex = Signal::<T>::indicator(&group, [x]);
                for y in 0..n {
                    let ey = Signal::<T>::indicator(&group, [y]);
                    let out = op.apply(&ex, &ey)?;
                    t.extend(out.values().iter().map(|z| C64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())));
                }
            }
            Some(t)
        } else {
            None
        };
        let weight = group.weight_f64();
        Ok(Evaluator { op, spaces: *spaces, group, weight, tensor, _marker: Default::default() })
    }

    fn norm(&self, spec: &SpaceSpec, v: &[C64], buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        buf.extend(v.iter().map(|z| z.norm()));
        magnitudes_norm(spec, self.weight, buf)
    }

    /// `a[y][z] = Σ_x f[x] B(e_x, e_y)(z)`.
    fn partial(&self, f: &[C64]) -> Option<Vec<C64>> {
        let t = self.tensor.as_ref()?;
        let n = f.len();
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for (x, fx) in f.iter().enumerate() {
            if fx.re == 0.0 && fx.im == 0.0 {
                continue;
            }
            for (ai, ti) in a.iter_mut().zip(&t[x * n * n..(x + 1) * n * n]) {
                *ai += fx * ti;
            }
        }
        Some(a)
    }

    fn apply(&self, f: &[C64], g: &[C64], out: &mut [C64]) -> Result<()> {
        if let Some(a) = self.partial(f) {
            contract(&a, g, out);
            return Ok(());
        }
        let conv = |v: &[C64]| {
            Signal::new(self.group.clone(), v.iter().map(|z| Complex::new(T::of(z.re), T::of(z.im))).collect())
        };
        let r = self.op.apply(&conv(f)?, &conv(g)?)?;
        for (o, z) in out.iter_mut().zip(r.values()) {
            *o = C64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy());
        }
        Ok(())
    }

    fn ratio(&self, f: &[C64], g: &[C64], out: &mut [C64], buf: &mut Vec<f64>) -> Result<f64> {
        let nf = self.norm(&self.spaces.x1, f, buf);
        let ng = self.norm(&self.spaces.x2, g, buf);
        if nf == 0.0 || ng == 0.0 {
            return Ok(0.0);
        }
        self.apply(f, g, out)?;
        Ok(self.norm(&self.spaces.x, out, buf) / (nf * ng))
    }
}

/// Opportunistic pattern search over the real and imaginary parts of `(f, g)` along
/// `±e_i`, `±e_i ± e_j` and a fixed set of random unit vectors, halving the step
/// when a pass stalls.
fn pattern_search(
    score: impl FnMut(&[C64], &[C64]) -> Result<f64>,
    f: &[C64],
    g: &[C64],
    step: f64,
) -> Result<(Vec<C64>, Vec<C64>)> {
    pattern_search_capped(score, f, g, step, PATTERN_PASSES)
}

fn pattern_search_capped(
    mut score: impl FnMut(&[C64], &[C64]) -> Result<f64>,
    f: &[C64],
    g: &[C64],
    step: f64,
    max_passes: usize,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = f.len();
    let dim = 4 * n;
    let mut x: Vec<f64> = f.iter().chain(g).flat_map(|z| [z.re, z.im]).collect();
    let mut zf = vec![C64::new(0.0, 0.0); n];
    let mut zg = vec![C64::new(0.0, 0.0); n];
    let mut eval = |x: &[f64], zf: &mut [C64], zg: &mut [C64]| -> Result<f64> {
        for (k, c) in x.chunks(2).enumerate() {
            let z = C64::new(c[0], c[1]);
            if k < n {
                zf[k] = z;
            } else {
                zg[k - n] = z;
            }
        }
        score(zf, zg)
    };
    let mut dirs: Vec<Vec<(usize, f64)>> = Vec::new();
    for i in 0..dim {
        dirs.push(vec![(i, 1.0)]);
        dirs.push(vec![(i, -1.0)]);
        for j in i + 1..dim {
            for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                dirs.push(vec![(i, a), (j, b)]);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_DIRECTION_SEED);
    for _ in 0..RANDOM_DIRECTIONS {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        dirs.push(v.iter().enumerate().map(|(k, a)| (k, a / len)).collect());
    }
    let mut cur = eval(&x, &mut zf, &mut zg)?;
    let mut s = step;
    let mut passes = 0;
    let mut y = x.clone();
    while s > 1e-10 && passes < max_passes {
        passes += 1;
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let mut improved = false;
        for d in &dirs {
            y.copy_from_slice(&x);
            for &(k, sign) in d {
                y[k] += sign * s * scale;
            }
            let r = eval(&y, &mut zf, &mut zg)?;
            if r > cur {
                cur = r;
                x.copy_from_slice(&y);
                improved = true;
            }
        }
        if !improved {
            s *= 0.5;
        }
    }
    eval(&x, &mut zf, &mut zg)?;
    Ok((zf, zg))
}

/// Polishes a weak-type ratio by fixing the top-`k` output set `S` and maximizing
/// `(k w)^{1/p} · softmin_{z∈S} |h_z| / (‖f‖‖g‖)` at increasing sharpness. The
/// surrogate never exceeds the true ratio, which is what gets kept.
fn weak_polish<T: Real, O: BilinearOperator<T> + ?Sized>(
    eval: &Evaluator<'_, T, O>,
    f: Vec<C64>,
    g: Vec<C64>,
) -> Result<Vec<(Vec<C64>, Vec<C64>)>> {
    let n = f.len();
    let p = eval.spaces.x.p();
    let mut out = vec![C64::new(0.0, 0.0); n];
    let mut buf = Vec::with_capacity(n);
    eval.apply(&f, &g, &mut out)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| out[b].norm().total_cmp(&out[a].norm()).then(a.cmp(&b)));
    let mut found = Vec::new();
    for k in 1..=n {
        let set = &order[..k];
        let coef = (eval.weight * k as f64).powf(1.0 / p);
        let (mut cf, mut cg) = (f.clone(), g.clone());
        for beta in [1e2, 1e4, 1e6] {
            let mut h = vec![C64::new(0.0, 0.0); n];
            let surrogate = |a: &[C64], b: &[C64]| -> Result<f64> {
                let nf = eval.norm(&eval.spaces.x1, a, &mut buf.clone());
                let ng = eval.norm(&eval.spaces.x2, b, &mut buf.clone());
                if nf == 0.0 || ng == 0.0 {
                    return Ok(0.0);
                }
                eval.apply(a, b, &mut h)?;
                let vals: Vec<f64> = set.iter().map(|&z| h[z].norm() / (nf * ng)).collect();
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let lse: f64 = vals.iter().map(|v| (-beta * (v - lo)).exp()).sum::<f64>().ln() / beta;
                Ok(coef * (lo - lse))
            };
            let r = pattern_search_capped(surrogate, &cf, &cg, 1e-2, SURROGATE_PASSES)?;
            cf = r.0;
            cg = r.1;
        }
        found.push((cf, cg));
    }
    let _ = &mut buf;
    Ok(found)
}

/// Keeps the `POLISH_STARTS` largest ratios, earlier indices first on ties.
fn push_top(top: &mut Vec<(f64, usize, usize)>, item: (f64, usize, usize)) {
    let key = |t: &(f64, usize, usize)| (std::cmp::Reverse(ordered(t.0)), t.1, t.2);
    let pos = top.partition_point(|t| key(t) < key(&item));
    if pos < POLISH_STARTS {
        top.insert(pos, item);
        top.truncate(POLISH_STARTS);
    }
}

fn ordered(x: f64) -> u64 {
    let b = if x.is_nan() { 0.0f64 } else { x }.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

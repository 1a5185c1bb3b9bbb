use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bht_symbol;
use crate::bilinear::{symbol_from_kernel, BilinearSymbol, Kernel};
use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::transform::Signal;

type C = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusKind {
    RandomSymbol,
    Bht,
    Modulation,
    Tensor,
    KernelBump,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 5] =
        [CorpusKind::RandomSymbol, CorpusKind::Bht, CorpusKind::Modulation, CorpusKind::Tensor, CorpusKind::KernelBump];

    /// Symbols sampled from a continuous model on the dual group.
    pub fn is_continuous(self) -> bool {
        matches!(self, CorpusKind::Modulation | CorpusKind::Tensor | CorpusKind::KernelBump)
    }

    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::RandomSymbol => "random-symbol",
            CorpusKind::Bht => "bht",
            CorpusKind::Modulation => "modulation",
            CorpusKind::Tensor => "tensor",
            CorpusKind::KernelBump => "kernel-bump",
        }
    }

    fn id(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorpusKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown corpus kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusEntry {
    pub name: String,
    pub kind: CorpusKind,
    pub size: usize,
    pub index: usize,
    pub seed: u64,
    pub symbol: BilinearSymbol<f64>,
}

/// Uniform entries in `[−1, 1] + i[−1, 1]`.
pub fn random_symbol<R: Rng + ?Sized>(dual_group: &FiniteAbelianGroup, rng: &mut R) -> BilinearSymbol<f64> {
    BilinearSymbol::from_index_fn(dual_group, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn entry_seed(kind: CorpusKind, size: usize, index: usize, seed: u64) -> u64 {
    seed ^ (kind.id() << 56) ^ ((size as u64) << 24) ^ index as u64
}

/// Trigonometric polynomial `Σ_{|t|≤1} c_t conj⟨ξ,t⟩` with `Σ|c_t| = 1`.
fn smooth_factor<R: Rng + ?Sized>(dg: &FiniteAbelianGroup, rng: &mut R) -> Signal<f64> {
    let g = dg.dual();
    let taps: Vec<(Vec<i64>, C)> = [-1i64, 0, 1]
        .iter()
        .map(|&t| (vec![t; g.rank()], C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
        .collect();
    let total: f64 = taps.iter().map(|t| t.1.norm()).sum();
    Signal::from_fn(dg, |xi| {
        let mut acc = C::new(0.0, 0.0);
        for (t, c) in &taps {
            let x = g.element(t).expect("rank matches");
            acc += c * dg.pairing::<f64>(xi, &x).expect("rank matches").conj();
        }
        acc / total
    })
}

/// One deterministic symbol of the given kind on `Ẑ_size`.
pub fn corpus_symbol(kind: CorpusKind, size: usize, index: usize, seed: u64) -> Result<BilinearSymbol<f64>> {
    if size == 0 {
        return Err(Error::InvalidArgument("corpus size must be positive".into()));
    }
    let g = FiniteAbelianGroup::cyclic(size);
    let dg = g.dual();
    let mut rng = ChaCha8Rng::seed_from_u64(entry_seed(kind, size, index, seed));
    Ok(match kind {
        CorpusKind::RandomSymbol => random_symbol(&dg, &mut rng),
        CorpusKind::Bht => bht_symbol(size)?,
        CorpusKind::Modulation => {
            let a = g.element_at(rng.random_range(0..size));
            let b = g.element_at(rng.random_range(0..size));
            let c = [C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(-1.0, 0.0), C::new(0.0, -1.0)][rng.random_range(0..4)];
            BilinearSymbol::modulation(&dg, &a, &b, c)?
        }
        CorpusKind::Tensor => {
            let u = smooth_factor(&dg, &mut rng);
            let v = smooth_factor(&dg, &mut rng);
            BilinearSymbol::tensor(&u, &v)?
        }
        CorpusKind::KernelBump => {
            let sigma: f64 = rng.random_range(0.5..2.0);
            let cent: Vec<f64> = g.elements().map(|x| g.centered(&x)[0] as f64).collect();
            let raw = Kernel::from_index_fn(&g, |u, v| {
                C::new((-(cent[u] * cent[u] + cent[v] * cent[v]) / (2.0 * sigma * sigma)).exp(), 0.0)
            });
            let mass = raw.integral().re;
            let k = Kernel::from_index_fn(&g, |u, v| raw.get(u, v) / mass);
            symbol_from_kernel(&k)
        }
    })
}

/// `count` symbols per size (one for `bht`, which has no randomness).
pub fn corpus_generate(kind: CorpusKind, sizes: &[usize], count: usize, seed: u64) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for &size in sizes {
        let count = if kind == CorpusKind::Bht { 1 } else { count };
        for index in 0..count {
            out.push(CorpusEntry {
                name: format!("{kind}-n{size}-{index:03}"),
                kind,
                size,
                index,
                seed: entry_seed(kind, size, index, seed),
                symbol: corpus_symbol(kind, size, index, seed)?,
            });
        }
    }
    Ok(out)
}

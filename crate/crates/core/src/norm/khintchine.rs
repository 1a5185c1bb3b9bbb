use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_TERMS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Configured,
    Estimated,
}

/// Brackets for the Khintchine constants `A_q ≤ B_q`.
///
/// Estimated values are the extreme observed ratios: `a_q ≥ A_q` and `b_q ≤ B_q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KhintchineConstants {
    pub q: f64,
    pub a_q: f64,
    pub b_q: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl KhintchineConstants {
    pub fn configured(q: f64, a_q: f64, b_q: f64) -> Result<Self> {
        if !(q > 0.0 && a_q > 0.0 && a_q <= b_q && b_q.is_finite()) {
            return Err(Error::InvalidArgument(format!("need 0 < A_q <= B_q, got A={a_q}, B={b_q} at q={q}")));
        }
        Ok(KhintchineConstants {
            q,
            a_q,
            b_q,
            provenance: Provenance::Configured,
            terms: None,
            samples: None,
            seed: None,
        })
    }
}

/// `(E|Σ α_j r_j|^q)^{1/q} / |α|₂`, averaged exactly over all `2^n` sign patterns.
pub fn rademacher_ratio(alpha: &[f64], q: f64) -> Result<f64> {
    let n = alpha.len();
    if n == 0 || n > MAX_TERMS {
        return Err(Error::InvalidArgument(format!("need 1..={MAX_TERMS} coefficients, got {n}")));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("q must be positive, got {q}")));
    }
    let l2 = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
    if l2 == 0.0 {
        return Err(Error::InvalidArgument("coefficient vector is zero".into()));
    }
    // |Σ ε_j α_j| is even in ε, so fix ε_0 = +1 and walk the others in Gray-code order
    let mut signs = vec![1.0f64; n];
    let mut s: f64 = alpha.iter().sum();
    let mut acc = s.abs().powf(q);
    let count = 1u64 << (n - 1);
    for k in 1..count {
        let bit = k.trailing_zeros() as usize + 1;
        signs[bit] = -signs[bit];
        s += 2.0 * signs[bit] * alpha[bit];
        acc += s.abs().powf(q);
    }
    Ok((acc / count as f64).powf(1.0 / q) / l2)
}

/// Terms and Gaussian probes behind [`KhintchineTable::for_spaces`].
pub const DEFAULT_TERMS: usize = 12;
pub const DEFAULT_SAMPLES: usize = 64;

/// Empirical `(A_q, B_q)` bracket from `samples` Gaussian vectors of length `n`
/// together with `e₁` and the flat vectors `(1,…,1,0,…)/√k`.
pub fn khintchine_estimate(q: f64, n: usize, samples: usize, seed: u64) -> Result<KhintchineConstants> {
    if n == 0 || n > MAX_TERMS {
        return Err(Error::InvalidArgument(format!("Khintchine terms must lie in 1..={MAX_TERMS}, got {n}")));
    }
    let mut probes: Vec<Vec<f64>> = (1..=n).map(|k| (0..n).map(|j| if j < k { 1.0 } else { 0.0 }).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        probes.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for a in &probes {
        if a.iter().all(|x| *x == 0.0) {
            continue;
        }
        let r = rademacher_ratio(a, q)?;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok(KhintchineConstants {
        q,
        a_q: lo,
        b_q: hi,
        provenance: Provenance::Estimated,
        terms: Some(n),
        samples: Some(samples),
        seed: Some(seed),
    })
}

/// Khintchine brackets keyed by `q`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KhintchineTable {
    entries: BTreeMap<String, KhintchineConstants>,
}

impl KhintchineTable {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(q: f64) -> String {
        format!("{q:.12}")
    }

    pub fn insert(&mut self, c: KhintchineConstants) {
        self.entries.insert(Self::key(c.q), c);
    }

    pub fn get(&self, q: f64) -> Option<&KhintchineConstants> {
        self.entries.get(&Self::key(q))
    }

    pub fn entries(&self) -> impl Iterator<Item = &KhintchineConstants> {
        self.entries.values()
    }

    /// The default brackets a space triple needs: none when `p ≥ 1`, else estimated
    /// at `q ∈ {p₁, p₂, p}` with 12 terms.
    pub fn for_spaces(spaces: &super::SpaceTriple, seed: u64) -> Result<Self> {
        let (p1, p2, p) = spaces.exponents();
        if p >= 1.0 {
            return Ok(Self::new());
        }
        Self::estimated(&[p1, p2, p], DEFAULT_TERMS, DEFAULT_SAMPLES, seed)
    }

    /// Estimated brackets for every `q`, with `n = 12` terms by default.
    pub fn estimated(qs: &[f64], n: usize, samples: usize, seed: u64) -> Result<Self> {
        let mut t = Self::new();
        for &q in qs {
            if t.get(q).is_none() {
                t.insert(khintchine_estimate(q, n, samples, seed)?);
            }
        }
        Ok(t)
    }
}

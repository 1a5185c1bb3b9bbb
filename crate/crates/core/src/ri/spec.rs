use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serde helpers for reals that may be `+∞`, written as the string `"inf"`.
pub mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                other => other.parse::<f64>().map_err(serde::de::Error::custom),
            },
        }
    }
}

/// `L^p`, `L^{p,q}` or `L^{p,∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceSpec {
    Lebesgue {
        p: f64,
    },
    Lorentz {
        p: f64,
        #[serde(with = "extended_real")]
        q: f64,
    },
    Weak {
        p: f64,
    },
}

impl SpaceSpec {
    pub fn lebesgue(p: f64) -> Self {
        SpaceSpec::Lebesgue { p }
    }

    pub fn lorentz(p: f64, q: f64) -> Self {
        SpaceSpec::Lorentz { p, q }
    }

    pub fn weak(p: f64) -> Self {
        SpaceSpec::Weak { p }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidSpace(format!("p must be a positive real, got {p}")));
        }
        if let SpaceSpec::Lorentz { q, .. } = self {
            if q.is_nan() || *q <= 0.0 {
                return Err(Error::InvalidSpace(format!("q must be positive or inf, got {q}")));
            }
        }
        Ok(())
    }

    pub fn p(&self) -> f64 {
        match *self {
            SpaceSpec::Lebesgue { p } | SpaceSpec::Lorentz { p, .. } | SpaceSpec::Weak { p } => p,
        }
    }

    /// Second Lorentz index: `p` for Lebesgue, `∞` for weak.
    pub fn q(&self) -> f64 {
        match *self {
            SpaceSpec::Lebesgue { p } => p,
            SpaceSpec::Lorentz { q, .. } => q,
            SpaceSpec::Weak { .. } => f64::INFINITY,
        }
    }

    /// Canonical form: `L^{p,p} → L^p`, `L^{p,∞} → weak`.
    pub fn canonical(&self) -> Self {
        match *self {
            SpaceSpec::Lorentz { p, q } if q == p => SpaceSpec::Lebesgue { p },
            SpaceSpec::Lorentz { p, q } if q.is_infinite() => SpaceSpec::Weak { p },
            other => other,
        }
    }

    pub fn is_weak(&self) -> bool {
        self.q().is_infinite()
    }

    /// Whether the quasi-norm is a norm: `L^p` with `p ≥ 1`, `L^{p,q}` with `1 ≤ q ≤ p`.
    pub fn is_normed(&self) -> bool {
        let (p, q) = (self.p(), self.q());
        match self.canonical() {
            SpaceSpec::Lebesgue { .. } => p >= 1.0,
            SpaceSpec::Lorentz { .. } => p >= 1.0 && q >= 1.0 && q <= p,
            SpaceSpec::Weak { .. } => false,
        }
    }

    /// `X = Y^{(r)}` with `r = min(p, 1)` and `Y` the space with both indices divided by `r`.
    pub fn convexification(&self) -> Convexification {
        let r = self.p().min(1.0);
        let base = match *self {
            SpaceSpec::Lebesgue { p } => SpaceSpec::Lebesgue { p: p / r },
            SpaceSpec::Lorentz { p, q } => SpaceSpec::Lorentz { p: p / r, q: q / r },
            SpaceSpec::Weak { p } => SpaceSpec::Weak { p: p / r },
        };
        Convexification { power: r, base_is_normed: base.is_normed(), base }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpaceSpec::Lebesgue { p } => write!(f, "L^{p}"),
            SpaceSpec::Lorentz { p, q } if q.is_infinite() => write!(f, "L^({p},inf)"),
            SpaceSpec::Lorentz { p, q } => write!(f, "L^({p},{q})"),
            SpaceSpec::Weak { p } => write!(f, "L^({p},inf)"),
        }
    }
}

/// `‖f‖_X = ‖|f|^power‖_base^{1/power}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Convexification {
    pub power: f64,
    pub base: SpaceSpec,
    pub base_is_normed: bool,
}

/// `(p₁, p₂, p)` with `p_i ∈ [1,∞)` and `p ∈ (0,∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub p1: f64,
    pub p2: f64,
    #[serde(with = "extended_real")]
    pub p: f64,
    pub holder_linked: bool,
}

impl ExponentTriple {
    pub fn new(p1: f64, p2: f64, p: f64, holder_linked: bool) -> Result<Self> {
        for (name, v) in [("p1", p1), ("p2", p2)] {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [1, inf), got {v}")));
            }
        }
        if p.is_nan() || p <= 0.0 {
            return Err(Error::InvalidArgument(format!("p must lie in (0, inf], got {p}")));
        }
        let t = ExponentTriple { p1, p2, p, holder_linked };
        if holder_linked && t.holder_defect() > 1e-12 {
            return Err(Error::InvalidArgument(format!("1/{p} != 1/{p1} + 1/{p2}")));
        }
        Ok(t)
    }

    /// The linked triple with `1/p = 1/p₁ + 1/p₂`.
    pub fn holder(p1: f64, p2: f64) -> Result<Self> {
        Self::new(p1, p2, 1.0 / (1.0 / p1 + 1.0 / p2), true)
    }

    pub fn holder_defect(&self) -> f64 {
        (1.0 / self.p - 1.0 / self.p1 - 1.0 / self.p2).abs()
    }

    /// `1/p − 1/p₁ − 1/p₂`, the exponent in the translate-packing law.
    pub fn packing_exponent(&self) -> f64 {
        1.0 / self.p - 1.0 / self.p1 - 1.0 / self.p2
    }
}

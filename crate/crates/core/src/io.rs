//! JSON and binary formats for groups, homomorphisms, signals, symbols and kernels.
//!
//! ```text
//! group   {"orders":[4,2],"haar_weight":"1/8"}
//! hom     {"source":<group>,"target":<group>,"matrix":[[1,0]]}
//! signal  {"group":<group>,"values":[[re,im],...]}
//! symbol  {"group":<dual group>,"rank":2,"values":[...]}   indexed ξ·|Ĝ|+η
//! kernel  {"group":<group>,"rank":2,"values":[...]}
//! ```

use std::io::{Read, Write};

use num_complex::Complex;
use num_rational::Rational64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bilinear::{BilinearSymbol, FiniteMeasure, Kernel};
use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement, GroupHom};
use crate::scalar::Real;
use crate::transform::Signal;

const MAGIC: &[u8; 7] = b"BMLSIG1";
const VERSION: u8 = 1;

fn parse_weight(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: i64 = n.parse().map_err(|e| Error::Parse(format!("bad haar weight {s:?}: {e}")))?;
    let d: i64 = d.parse().map_err(|e| Error::Parse(format!("bad haar weight {s:?}: {e}")))?;
    if d == 0 {
        return Err(Error::Parse(format!("bad haar weight {s:?}: zero denominator")));
    }
    Ok(Rational64::new(n, d))
}

fn format_weight(w: Rational64) -> String {
    format!("{}/{}", w.numer(), w.denom())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupRepr {
    orders: Vec<usize>,
    #[serde(default = "unit_weight")]
    haar_weight: WeightRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WeightRepr {
    Text(String),
    Int(i64),
}

fn unit_weight() -> WeightRepr {
    WeightRepr::Text("1/1".into())
}

impl Serialize for FiniteAbelianGroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupRepr { orders: self.orders().to_vec(), haar_weight: WeightRepr::Text(format_weight(self.haar_weight())) }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteAbelianGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GroupRepr::deserialize(d)?;
        let w = match r.haar_weight {
            WeightRepr::Text(t) => parse_weight(&t).map_err(D::Error::custom)?,
            WeightRepr::Int(i) => Rational64::from_integer(i),
        };
        FiniteAbelianGroup::new(r.orders, w).map_err(D::Error::custom)
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(GroupElement::new(Vec::<usize>::deserialize(d)?))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HomRepr {
    source: FiniteAbelianGroup,
    target: FiniteAbelianGroup,
    matrix: Vec<Vec<i64>>,
}

impl Serialize for GroupHom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HomRepr { source: self.source().clone(), target: self.target().clone(), matrix: self.matrix().to_vec() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupHom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = HomRepr::deserialize(d)?;
        GroupHom::new(r.source, r.target, r.matrix).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrayRepr {
    group: FiniteAbelianGroup,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rank: Option<u8>,
    values: Vec<[f64; 2]>,
}

fn to_pairs<T: Real>(v: &[Complex<T>]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()]).collect()
}

fn from_pairs<T: Real>(v: Vec<[f64; 2]>) -> Vec<Complex<T>> {
    v.into_iter().map(|[re, im]| Complex::new(T::of(re), T::of(im))).collect()
}

impl<T: Real> Serialize for Signal<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ArrayRepr { group: self.group().clone(), rank: None, values: to_pairs(self.values()) }.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Signal<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ArrayRepr::deserialize(d)?;
        if r.rank.unwrap_or(1) != 1 {
            return Err(D::Error::custom("a signal has rank 1"));
        }
        Signal::new(r.group, from_pairs(r.values)).map_err(D::Error::custom)
    }
}

impl<T: Real> Serialize for BilinearSymbol<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ArrayRepr { group: self.dual_group().clone(), rank: Some(2), values: to_pairs(self.values()) }.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for BilinearSymbol<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ArrayRepr::deserialize(d)?;
        if r.rank != Some(2) {
            return Err(D::Error::custom("a symbol needs \"rank\":2"));
        }
        BilinearSymbol::new(r.group, from_pairs(r.values)).map_err(D::Error::custom)
    }
}

impl<T: Real> Serialize for Kernel<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ArrayRepr { group: self.group().clone(), rank: Some(2), values: to_pairs(self.values()) }.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Kernel<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ArrayRepr::deserialize(d)?;
        if r.rank != Some(2) {
            return Err(D::Error::custom("a kernel needs \"rank\":2"));
        }
        Kernel::new(r.group, from_pairs(r.values)).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureRepr {
    group: FiniteAbelianGroup,
    atoms: Vec<(GroupElement, [f64; 2])>,
}

impl<T: Real> Serialize for FiniteMeasure<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let atoms = self.atoms().iter().map(|(x, w)| (x.clone(), [w.re.to_f64_lossy(), w.im.to_f64_lossy()])).collect();
        MeasureRepr { group: self.dual_group().clone(), atoms }.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for FiniteMeasure<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MeasureRepr::deserialize(d)?;
        let atoms = r.atoms.into_iter().map(|(x, [re, im])| (x, Complex::new(T::of(re), T::of(im)))).collect();
        FiniteMeasure::new(r.group, atoms).map_err(D::Error::custom)
    }
}

/// Parses JSON, reporting syntax and schema errors with their line and column.
pub fn from_json_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        let msg = msg.strip_suffix(&suffix).unwrap_or(&msg);
        Error::Parse(format!("line {} column {}: {msg}", e.line(), e.column()))
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes the binary signal format:
/// `BMLSIG1`, version byte, `u32` rank, `u32` reserved, `u64` orders, the
/// Haar weight as two `i64`, then `(re, im)` pairs of little-endian `f64`.
pub fn write_signal_binary<T: Real, W: Write>(f: &Signal<T>, mut out: W) -> Result<()> {
    let g = f.group();
    out.write_all(MAGIC)?;
    out.write_all(&[VERSION])?;
    out.write_all(&(g.rank() as u32).to_le_bytes())?;
    out.write_all(&0u32.to_le_bytes())?;
    for &n in g.orders() {
        out.write_all(&(n as u64).to_le_bytes())?;
    }
    let w = g.haar_weight();
    out.write_all(&w.numer().to_le_bytes())?;
    out.write_all(&w.denom().to_le_bytes())?;
    for z in f.values() {
        out.write_all(&z.re.to_f64_lossy().to_le_bytes())?;
        out.write_all(&z.im.to_f64_lossy().to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_signal_binary<T: Real, R: Read>(mut input: R) -> Result<Signal<T>> {
    let mut head = [0u8; 16];
    input.read_exact(&mut head).map_err(|_| Error::Parse("truncated binary signal header".into()))?;
    if &head[..7] != MAGIC {
        return Err(Error::Parse("not a binary signal file".into()));
    }
    if head[7] != VERSION {
        return Err(Error::Parse(format!("unsupported binary signal version {}", head[7])));
    }
    let rank = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes")) as usize;
    if rank > 64 {
        return Err(Error::Parse(format!("implausible rank {rank}")));
    }
    let mut word = [0u8; 8];
    let mut next = |input: &mut R| -> Result<[u8; 8]> {
        input.read_exact(&mut word).map_err(|_| Error::Parse("truncated binary signal".into()))?;
        Ok(word)
    };
    let mut orders = Vec::with_capacity(rank);
    for _ in 0..rank {
        orders.push(u64::from_le_bytes(next(&mut input)?) as usize);
    }
    let num = i64::from_le_bytes(next(&mut input)?);
    let den = i64::from_le_bytes(next(&mut input)?);
    if den == 0 {
        return Err(Error::Parse("zero Haar weight denominator".into()));
    }
    let group = FiniteAbelianGroup::new(orders, Rational64::new(num, den))?;
    let mut values = Vec::with_capacity(group.order());
    for _ in 0..group.order() {
        let re = f64::from_le_bytes(next(&mut input)?);
        let im = f64::from_le_bytes(next(&mut input)?);
        values.push(Complex::new(T::of(re), T::of(im)));
    }
    Signal::new(group, values)
}

/// Rows `index,coords,re,im` for a signal.
pub fn write_signal_csv<T: Real, W: Write>(f: &Signal<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let e = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["index", "element", "re", "im"]).map_err(e)?;
    for (i, (x, z)) in f.group().elements().zip(f.values()).enumerate() {
        w.write_record([
            i.to_string(),
            x.to_string(),
            z.re.to_f64_lossy().to_string(),
            z.im.to_f64_lossy().to_string(),
        ])
        .map_err(e)?;
    }
    w.flush()?;
    Ok(())
}

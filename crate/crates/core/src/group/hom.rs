use num_integer::Integer;
use rand::Rng;

use crate::error::{Error, Result};

use super::{FiniteAbelianGroup, GroupElement};

/// Homomorphism between cyclic products given by an integer matrix.
///
/// `matrix[j][i]` is the contribution of source generator `i` to target factor `j`.
/// Entries are kept reduced modulo the target orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupHom {
    source: FiniteAbelianGroup,
    target: FiniteAbelianGroup,
    matrix: Vec<Vec<i64>>,
}

impl GroupHom {
    pub fn new(source: FiniteAbelianGroup, target: FiniteAbelianGroup, matrix: Vec<Vec<i64>>) -> Result<Self> {
        if matrix.len() != target.rank() {
            return Err(Error::DimensionMismatch { expected: target.rank(), got: matrix.len() });
        }
        let mut reduced = Vec::with_capacity(matrix.len());
        for (j, row) in matrix.iter().enumerate() {
            if row.len() != source.rank() {
                return Err(Error::DimensionMismatch { expected: source.rank(), got: row.len() });
            }
            let m = target.orders()[j] as i64;
            reduced.push(row.iter().map(|&a| a.rem_euclid(m)).collect::<Vec<_>>());
        }
        for (i, &n) in source.orders().iter().enumerate() {
            for (j, &m) in target.orders().iter().enumerate() {
                if (n as i128 * reduced[j][i] as i128) % m as i128 != 0 {
                    return Err(Error::NotHomomorphism(format!(
                        "generator {i} of order {n} maps to {} in Z_{m}",
                        reduced[j][i]
                    )));
                }
            }
        }
        Ok(GroupHom { source, target, matrix: reduced })
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        let d = group.rank();
        let matrix = (0..d).map(|j| (0..d).map(|i| i64::from(i == j)).collect()).collect();
        Self::new(group.clone(), group.clone(), matrix).expect("identity is a homomorphism")
    }

    pub fn zero(source: &FiniteAbelianGroup, target: &FiniteAbelianGroup) -> Self {
        let matrix = vec![vec![0; source.rank()]; target.rank()];
        Self::new(source.clone(), target.clone(), matrix).expect("zero map is a homomorphism")
    }

    /// Uniform over all homomorphisms: entry `(j, i)` is a multiple of `m_j / gcd(m_j, n_i)`.
    pub fn random<R: Rng + ?Sized>(source: &FiniteAbelianGroup, target: &FiniteAbelianGroup, rng: &mut R) -> Self {
        let matrix = target
            .orders()
            .iter()
            .map(|&m| {
                source
                    .orders()
                    .iter()
                    .map(|&n| {
                        let g = m.gcd(&n);
                        ((m / g) * rng.random_range(0..g)) as i64
                    })
                    .collect()
            })
            .collect();
        Self::new(source.clone(), target.clone(), matrix).expect("admissible entries give a homomorphism")
    }

    /// Diagonal map `x ↦ (k_1 x_1, …, k_d x_d)` between groups of equal rank.
    pub fn diagonal(source: &FiniteAbelianGroup, target: &FiniteAbelianGroup, factors: &[i64]) -> Result<Self> {
        if source.rank() != target.rank() || factors.len() != source.rank() {
            return Err(Error::DimensionMismatch { expected: source.rank(), got: factors.len() });
        }
        let d = source.rank();
        let matrix = (0..d).map(|j| (0..d).map(|i| if i == j { factors[i] } else { 0 }).collect()).collect();
        Self::new(source.clone(), target.clone(), matrix)
    }

    pub fn source(&self) -> &FiniteAbelianGroup {
        &self.source
    }

    pub fn target(&self) -> &FiniteAbelianGroup {
        &self.target
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn apply(&self, x: &GroupElement) -> Result<GroupElement> {
        if x.coords().len() != self.source.rank() {
            return Err(Error::DimensionMismatch { expected: self.source.rank(), got: x.coords().len() });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &GroupElement) -> GroupElement {
        let coords = self
            .matrix
            .iter()
            .zip(self.target.orders())
            .map(|(row, &m)| {
                let m = m as i128;
                let s: i128 = row.iter().zip(x.coords()).map(|(&a, &c)| a as i128 * c as i128 % m).sum();
                (s % m) as usize
            })
            .collect();
        GroupElement::new(coords)
    }

    /// Table of target indices for every source index.
    pub fn index_table(&self) -> Vec<usize> {
        self.source.elements().map(|x| self.target.index_of(&self.apply_unchecked(&x))).collect()
    }

    /// `self ∘ inner` (apply `inner` first).
    pub fn compose(&self, inner: &GroupHom) -> Result<GroupHom> {
        if !inner.target.same_shape(&self.source) {
            return Err(Error::GroupMismatch(format!(
                "cannot compose {} → {} after {} → {}",
                self.source, self.target, inner.source, inner.target
            )));
        }
        let rows = self.target.rank();
        let cols = inner.source.rank();
        let mid = self.source.rank();
        let matrix = (0..rows)
            .map(|j| {
                let m = self.target.orders()[j] as i128;
                (0..cols)
                    .map(|i| {
                        let s: i128 =
                            (0..mid).map(|k| self.matrix[j][k] as i128 * inner.matrix[k][i] as i128 % m).sum();
                        (s % m) as i64
                    })
                    .collect()
            })
            .collect();
        GroupHom::new(inner.source.clone(), self.target.clone(), matrix)
    }

    /// Dual homomorphism `dual(target) → dual(source)` with `⟨π̃(z), x⟩ = ⟨z, π(x)⟩`.
    pub fn dual(&self) -> GroupHom {
        let n = self.source.orders();
        let m = self.target.orders();
        let matrix = (0..self.source.rank())
            .map(|i| {
                (0..self.target.rank())
                    .map(|j| {
                        let num = self.matrix[j][i] as i128 * n[i] as i128;
                        debug_assert_eq!(num % m[j] as i128, 0);
                        ((num / m[j] as i128).rem_euclid(n[i] as i128)) as i64
                    })
                    .collect()
            })
            .collect();
        GroupHom::new(self.target.dual(), self.source.dual(), matrix).expect("dual of a homomorphism is a homomorphism")
    }

    pub fn is_injective(&self) -> bool {
        let zero = self.target.zero();
        self.source.elements().filter(|x| self.apply_unchecked(x) == zero).count() == 1
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target.order()];
        for x in self.source.elements() {
            hit[self.target.index_of(&self.apply_unchecked(&x))] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn kernel_elements(&self) -> Vec<GroupElement> {
        let zero = self.target.zero();
        self.source.elements().filter(|x| self.apply_unchecked(x) == zero).collect()
    }
}

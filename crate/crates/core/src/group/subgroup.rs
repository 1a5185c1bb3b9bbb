use std::collections::BTreeSet;

use num_rational::Rational64;

use crate::error::{Error, Result};

use super::snf::smith_normal_form;
use super::{FiniteAbelianGroup, GroupElement, GroupHom};

/// Subgroup of `parent` generated by a list of elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    parent: FiniteAbelianGroup,
    generators: Vec<GroupElement>,
}

impl Subgroup {
    pub fn new(parent: FiniteAbelianGroup, generators: Vec<GroupElement>) -> Result<Self> {
        for g in &generators {
            if !parent.contains(g) {
                return Err(Error::InvalidArgument(format!("generator {g} is not an element of {parent}")));
            }
        }
        Ok(Subgroup { parent, generators })
    }

    pub fn trivial(parent: &FiniteAbelianGroup) -> Self {
        Subgroup { parent: parent.clone(), generators: vec![] }
    }

    /// The whole group, generated by the standard basis.
    pub fn whole(parent: &FiniteAbelianGroup) -> Self {
        let generators = (0..parent.rank())
            .map(|i| GroupElement::new((0..parent.rank()).map(|j| usize::from(i == j)).collect()))
            .collect();
        Subgroup { parent: parent.clone(), generators }
    }

    pub fn parent(&self) -> &FiniteAbelianGroup {
        &self.parent
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// Element indices of the generated subgroup, sorted.
    pub fn element_indices(&self) -> BTreeSet<usize> {
        let g = &self.parent;
        let mut set = BTreeSet::from([0usize]);
        let mut frontier = vec![0usize];
        let gens: Vec<usize> = self.generators.iter().map(|x| g.index_of(x)).collect();
        while let Some(x) = frontier.pop() {
            for &s in &gens {
                let y = g.add_index(x, s);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.element_indices().into_iter().map(|i| self.parent.element_at(i)).collect()
    }

    pub fn order(&self) -> usize {
        self.element_indices().len()
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.parent.contains(x) && self.element_indices().contains(&self.parent.index_of(x))
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.iter().all(GroupElement::is_zero)
    }
}

/// `G/H` in Smith-normal-form coordinates together with the projection `G → G/H`.
///
/// The quotient carries Haar weight `w(G)·|H|`, so the projection pushes the Haar
/// measure of `G` forward to that of `G/H`.
pub fn quotient(h: &Subgroup) -> Result<(FiniteAbelianGroup, GroupHom)> {
    let g = h.parent();
    let weight = g.haar_weight() * Rational64::from_integer(h.order() as i64);
    if h.is_trivial() {
        let q = g.with_weight(weight)?;
        let proj = GroupHom::new(g.clone(), q.clone(), GroupHom::identity(g).matrix().to_vec())?;
        return Ok((q, proj));
    }
    let d = g.rank();
    // relation lattice: the cyclic relations n_i e_i plus the generators of H
    let mut relations: Vec<Vec<i64>> = vec![vec![0; d + h.generators().len()]; d];
    for (i, &n) in g.orders().iter().enumerate() {
        relations[i][i] = n as i64;
    }
    for (k, gen) in h.generators().iter().enumerate() {
        for (i, &c) in gen.coords().iter().enumerate() {
            relations[i][d + k] = c as i64;
        }
    }
    let snf = smith_normal_form(&relations);
    let mut orders = Vec::new();
    let mut rows = Vec::new();
    for (i, &di) in snf.diagonal.iter().enumerate().take(d) {
        debug_assert!(di > 0, "relation lattice has full rank");
        if di > 1 {
            orders.push(di as usize);
            rows.push(snf.u[i].iter().map(|&x| x.rem_euclid(di) as i64).collect::<Vec<_>>());
        }
    }
    if orders.is_empty() {
        orders.push(1);
        rows.push(vec![0; d]);
    }
    let q = FiniteAbelianGroup::new(orders, weight)?;
    let proj = GroupHom::new(g.clone(), q.clone(), rows)?;
    Ok((q, proj))
}

/// `H⊥ = {ξ ∈ Ĝ : ⟨ξ,h⟩ = 1 ∀ h ∈ H}`, realized as the image of `dual(G/H) → Ĝ`.
pub fn annihilator(h: &Subgroup) -> Result<Subgroup> {
    let (q, proj) = quotient(h)?;
    let inclusion = proj.dual();
    let qd = q.dual();
    let generators = (0..qd.rank())
        .map(|i| {
            let e = GroupElement::new((0..qd.rank()).map(|j| usize::from(i == j)).collect());
            inclusion.apply_unchecked(&e)
        })
        .collect();
    Subgroup::new(h.parent().dual(), generators)
}

//! Finite product spaces and partitions.
//!
//! On a finite set every σ-field is generated by a unique partition, so a
//! [`Partition`] is the only representation of an information field used in
//! this crate. Points of a [`ProductSpace`] are enumerated row-major in
//! declared factor order (the last factor varies fastest), and partition atoms
//! are numbered by first occurrence in that enumeration. Two partitions of the
//! same space are therefore equal as σ-fields iff their `atom_of` vectors are
//! equal.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a factor of a product space stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorKind {
    NatureExogenous,
    NatureType,
    Action,
}

impl FactorKind {
    pub fn is_nature(self) -> bool {
        !matches!(self, FactorKind::Action)
    }
}

/// A finite set with labelled elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteFactor {
    pub id: String,
    pub label: String,
    pub elements: Vec<String>,
    pub kind: FactorKind,
}

impl FiniteFactor {
    pub fn new<I, S>(id: &str, kind: FactorKind, elements: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        FiniteFactor {
            id: id.to_string(),
            label: id.to_string(),
            elements: elements.into_iter().map(Into::into).collect(),
            kind,
        }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.elements.is_empty() {
            return Err(Error::EmptyFactor(self.id.clone()));
        }
        let mut seen = std::collections::HashSet::new();
        for e in &self.elements {
            if !seen.insert(e.as_str()) {
                return Err(Error::DuplicateElement {
                    factor: self.id.clone(),
                    label: e.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Cartesian product of finite factors with row-major point indexing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductSpace {
    factors: Vec<FiniteFactor>,
    strides: Vec<usize>,
    len: usize,
}

impl ProductSpace {
    /// Builds the product of `factors` in declaration order.
    pub fn new(factors: Vec<FiniteFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::NoFactors);
        }
        let mut ids = std::collections::HashSet::new();
        for f in &factors {
            f.validate()?;
            if !ids.insert(f.id.as_str()) {
                return Err(Error::DuplicateFactor(f.id.clone()));
            }
        }
        let mut strides = vec![1usize; factors.len()];
        let mut len: usize = 1;
        for i in (0..factors.len()).rev() {
            strides[i] = len;
            len = len
                .checked_mul(factors[i].size())
                .ok_or_else(|| Error::CapacityExceeded {
                    what: "product space size".into(),
                    count: u128::MAX,
                    cap: usize::MAX as u64,
                })?;
        }
        Ok(ProductSpace {
            factors,
            strides,
            len,
        })
    }

    pub fn factors(&self) -> &[FiniteFactor] {
        &self.factors
    }

    pub fn factor(&self, pos: usize) -> &FiniteFactor {
        &self.factors[pos]
    }

    pub fn dims(&self) -> usize {
        self.factors.len()
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(FiniteFactor::size).collect()
    }

    pub fn position(&self, id: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.id == id)
            .ok_or_else(|| Error::UnknownFactor(id.to_string()))
    }

    /// Row-major index of a point.
    pub fn index_of(&self, point: &[usize]) -> Result<usize> {
        if point.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                what: "point".into(),
                expected: self.dims(),
                got: point.len(),
            });
        }
        let mut idx = 0;
        for (k, (&c, f)) in point.iter().zip(&self.factors).enumerate() {
            if c >= f.size() {
                return Err(Error::OutOfRange {
                    what: format!("factor `{}`", f.id),
                    index: c,
                    size: f.size(),
                });
            }
            idx += c * self.strides[k];
        }
        Ok(idx)
    }

    pub fn point(&self, index: usize) -> Vec<usize> {
        (0..self.dims()).map(|k| self.coord(index, k)).collect()
    }

    /// Coordinate of point `index` along factor position `pos`.
    pub fn coord(&self, index: usize, pos: usize) -> usize {
        (index / self.strides[pos]) % self.factors[pos].size()
    }

    pub fn stride(&self, pos: usize) -> usize {
        self.strides[pos]
    }

    pub fn describe_point(&self, index: usize) -> String {
        let parts: Vec<String> = self
            .factors
            .iter()
            .enumerate()
            .map(|(k, f)| format!("{}={}", f.id, f.elements[self.coord(index, k)]))
            .collect();
        format!("({})", parts.join(", "))
    }
}

/// A partition of a product space into atoms; the generator of a σ-field.
#[derive(Debug, Clone)]
pub struct Partition {
    space: Arc<ProductSpace>,
    atom_of: Vec<u32>,
    atom_count: usize,
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        *self.space == *other.space && self.atom_of == other.atom_of
    }
}

impl Eq for Partition {}

impl Partition {
    /// Builds a partition from arbitrary labels, renumbering atoms by first
    /// occurrence.
    pub fn from_labels<T>(space: Arc<ProductSpace>, labels: &[T]) -> Result<Self>
    where
        T: Eq + std::hash::Hash,
    {
        if labels.len() != space.len() {
            return Err(Error::DimensionMismatch {
                what: "partition labels".into(),
                expected: space.len(),
                got: labels.len(),
            });
        }
        let mut ids: HashMap<&T, u32> = HashMap::new();
        let mut atom_of = Vec::with_capacity(labels.len());
        for l in labels {
            let next = ids.len() as u32;
            atom_of.push(*ids.entry(l).or_insert(next));
        }
        let atom_count = ids.len();
        Ok(Partition {
            space,
            atom_of,
            atom_count,
        })
    }

    /// Partition into singletons.
    pub fn discrete(space: Arc<ProductSpace>) -> Self {
        let n = space.len();
        Partition {
            space,
            atom_of: (0..n as u32).collect(),
            atom_count: n,
        }
    }

    /// Single-atom partition.
    pub fn trivial(space: Arc<ProductSpace>) -> Self {
        let n = space.len();
        Partition {
            space,
            atom_of: vec![0; n],
            atom_count: 1,
        }
    }

    /// Points agree on all `visible` factors iff they share an atom.
    pub fn cylinder<S: AsRef<str>>(space: Arc<ProductSpace>, visible: &[S]) -> Result<Self> {
        let mut positions = Vec::with_capacity(visible.len());
        for id in visible {
            let p = space.position(id.as_ref())?;
            if !positions.contains(&p) {
                positions.push(p);
            }
        }
        Ok(Self::cylinder_positions(space, &positions))
    }

    pub(crate) fn cylinder_positions(space: Arc<ProductSpace>, positions: &[usize]) -> Self {
        let mut positions = positions.to_vec();
        positions.sort_unstable();
        positions.dedup();
        let n = space.len();
        // Row-major enumeration visits visible coordinate tuples in
        // lexicographic order, so the mixed-radix key is already canonical.
        let mut atom_of = Vec::with_capacity(n);
        let mut atom_count = 1usize;
        for &p in &positions {
            atom_count *= space.factor(p).size();
        }
        for idx in 0..n {
            let mut key = 0usize;
            for &p in &positions {
                key = key * space.factor(p).size() + space.coord(idx, p);
            }
            atom_of.push(key as u32);
        }
        Partition {
            space,
            atom_of,
            atom_count,
        }
    }

    pub fn space(&self) -> &Arc<ProductSpace> {
        &self.space
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn atom_of(&self, point: usize) -> usize {
        self.atom_of[point] as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.atom_of
    }

    /// Point indices of every atom, in enumeration order.
    pub fn atoms(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.atom_count];
        for (idx, &a) in self.atom_of.iter().enumerate() {
            out[a as usize].push(idx);
        }
        out
    }

    /// First point of each atom.
    pub fn representatives(&self) -> Vec<usize> {
        let mut reps = vec![usize::MAX; self.atom_count];
        for (idx, &a) in self.atom_of.iter().enumerate() {
            if reps[a as usize] == usize::MAX {
                reps[a as usize] = idx;
            }
        }
        reps
    }

    fn same_space(&self, other: &Partition) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space {
            Ok(())
        } else {
            Err(Error::MismatchedSpaces)
        }
    }

    /// True iff every atom of `self` lies inside one atom of `coarse`.
    pub fn refines(&self, coarse: &Partition) -> Result<bool> {
        self.same_space(coarse)?;
        let mut image = vec![u32::MAX; self.atom_count];
        for (&f, &c) in self.atom_of.iter().zip(&coarse.atom_of) {
            let slot = &mut image[f as usize];
            if *slot == u32::MAX {
                *slot = c;
            } else if *slot != c {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Meet: atoms are the nonempty pairwise intersections.
    pub fn common_refinement(&self, other: &Partition) -> Result<Partition> {
        self.same_space(other)?;
        let pairs: Vec<(u32, u32)> = self
            .atom_of
            .iter()
            .zip(&other.atom_of)
            .map(|(&a, &b)| (a, b))
            .collect();
        Partition::from_labels(self.space.clone(), &pairs)
    }

    /// True iff `map` is constant on every atom.
    pub fn is_measurable<T: PartialEq>(&self, map: &[T]) -> Result<bool> {
        if map.len() != self.space.len() {
            return Err(Error::DimensionMismatch {
                what: "map".into(),
                expected: self.space.len(),
                got: map.len(),
            });
        }
        let mut first: Vec<Option<&T>> = vec![None; self.atom_count];
        for (v, &a) in map.iter().zip(&self.atom_of) {
            match first[a as usize] {
                None => first[a as usize] = Some(v),
                Some(w) if w != v => return Ok(false),
                _ => {}
            }
        }
        Ok(true)
    }
}

/// Free-function form of [`ProductSpace::new`].
pub fn make_product_space(factors: Vec<FiniteFactor>) -> Result<ProductSpace> {
    ProductSpace::new(factors)
}

pub fn cylinder_partition<S: AsRef<str>>(
    space: &Arc<ProductSpace>,
    visible: &[S],
) -> Result<Partition> {
    Partition::cylinder(space.clone(), visible)
}

pub fn refines(fine: &Partition, coarse: &Partition) -> Result<bool> {
    fine.refines(coarse)
}

pub fn common_refinement(p: &Partition, q: &Partition) -> Result<Partition> {
    p.common_refinement(q)
}

pub fn is_measurable<T: PartialEq>(map: &[T], wrt: &Partition) -> Result<bool> {
    wrt.is_measurable(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(id: &str, n: usize) -> FiniteFactor {
        FiniteFactor::new(id, FactorKind::Action, (0..n).map(|i| i.to_string()))
    }

    fn space(sizes: &[usize]) -> Arc<ProductSpace> {
        let factors = sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| f(&format!("f{i}"), n))
            .collect();
        Arc::new(ProductSpace::new(factors).unwrap())
    }

    #[test]
    fn three_binary_factors_give_eight_points() {
        let s = ProductSpace::new(vec![
            FiniteFactor::new("omega", FactorKind::NatureExogenous, ["-", "+"]),
            f("u_a", 2),
            f("u_b", 2),
        ])
        .unwrap();
        assert_eq!(s.len(), 8);
    }

    #[test]
    fn single_point_space() {
        assert_eq!(ProductSpace::new(vec![f("x", 1)]).unwrap().len(), 1);
    }

    #[test]
    fn row_major_last_point() {
        let s = space(&[3, 2]);
        assert_eq!(s.len(), 6);
        assert_eq!(s.index_of(&[2, 1]).unwrap(), 5);
        assert_eq!(s.point(5), vec![2, 1]);
        assert_eq!(s.point(1), vec![0, 1]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            ProductSpace::new(vec![f("a", 2), f("a", 3)]),
            Err(Error::DuplicateFactor("a".into()))
        );
        assert_eq!(
            ProductSpace::new(vec![f("a", 0)]),
            Err(Error::EmptyFactor("a".into()))
        );
        assert_eq!(ProductSpace::new(vec![]), Err(Error::NoFactors));
        let dup = FiniteFactor::new("d", FactorKind::Action, ["x", "x"]);
        assert!(matches!(
            ProductSpace::new(vec![dup]),
            Err(Error::DuplicateElement { .. })
        ));
    }

    #[test]
    fn cylinder_extremes() {
        let s = space(&[2, 3, 2]);
        let none: [&str; 0] = [];
        let triv = Partition::cylinder(s.clone(), &none).unwrap();
        assert_eq!(triv.atom_count(), 1);
        assert_eq!(triv, Partition::trivial(s.clone()));
        let all = Partition::cylinder(s.clone(), &["f0", "f1", "f2"]).unwrap();
        assert_eq!(all.atom_count(), 12);
        assert_eq!(all, Partition::discrete(s.clone()));
        assert!(matches!(
            Partition::cylinder(s, &["nope"]),
            Err(Error::UnknownFactor(_))
        ));
    }

    #[test]
    fn cylinder_on_one_action_of_cube() {
        let s = space(&[2, 2, 2]);
        let p = Partition::cylinder(s, &["f1"]).unwrap();
        assert_eq!(p.atom_count(), 2);
        assert!(p.atoms().iter().all(|a| a.len() == 4));
    }

    #[test]
    fn cylinder_matches_from_labels_canonicalization() {
        let s = space(&[3, 2, 2]);
        let p = Partition::cylinder(s.clone(), &["f2", "f0"]).unwrap();
        let labels: Vec<(usize, usize)> = (0..s.len())
            .map(|i| (s.coord(i, 0), s.coord(i, 2)))
            .collect();
        assert_eq!(p, Partition::from_labels(s, &labels).unwrap());
    }

    #[test]
    fn refinement_basics() {
        let s = space(&[2, 3]);
        let disc = Partition::discrete(s.clone());
        let c0 = Partition::cylinder(s.clone(), &["f0"]).unwrap();
        let c01 = Partition::cylinder(s.clone(), &["f0", "f1"]).unwrap();
        assert!(disc.refines(&c0).unwrap());
        assert!(c01.refines(&c0).unwrap());
        assert!(!c0.refines(&c01).unwrap());
    }

    #[test]
    fn crossing_partitions_do_not_refine() {
        // 4 points: {0,1}{2,3} vs {0,2}{1,3}; checked by hand over atom containment
        let s = space(&[4]);
        let p = Partition::from_labels(s.clone(), &[0, 0, 1, 1]).unwrap();
        let q = Partition::from_labels(s, &[0, 1, 0, 1]).unwrap();
        assert!(!p.refines(&q).unwrap());
        assert!(!q.refines(&p).unwrap());
    }

    #[test]
    fn meet_identities() {
        let s = space(&[2, 3]);
        let p = Partition::from_labels(s.clone(), &[5, 5, 1, 2, 2, 1]).unwrap();
        let triv = Partition::trivial(s.clone());
        assert_eq!(p.common_refinement(&triv).unwrap(), p);
        assert_eq!(p.common_refinement(&p).unwrap(), p);
    }

    #[test]
    fn meet_of_cylinders_is_joint_cylinder() {
        let s = space(&[2, 3, 2]);
        let a = Partition::cylinder(s.clone(), &["f0"]).unwrap();
        let b = Partition::cylinder(s.clone(), &["f2"]).unwrap();
        let m = a.common_refinement(&b).unwrap();
        // oracle: same atom iff agree on f0 and f2
        for i in 0..s.len() {
            for j in 0..s.len() {
                let same = s.coord(i, 0) == s.coord(j, 0) && s.coord(i, 2) == s.coord(j, 2);
                assert_eq!(m.atom_of(i) == m.atom_of(j), same);
            }
        }
        assert_eq!(m, Partition::cylinder(s, &["f0", "f2"]).unwrap());
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let a = Partition::trivial(space(&[2]));
        let b = Partition::trivial(space(&[3]));
        assert_eq!(a.refines(&b), Err(Error::MismatchedSpaces));
        assert_eq!(a.common_refinement(&b), Err(Error::MismatchedSpaces));
    }

    #[test]
    fn measurability() {
        let s = space(&[2, 3]);
        let proj0: Vec<usize> = (0..s.len()).map(|i| s.coord(i, 0)).collect();
        assert!(Partition::discrete(s.clone())
            .is_measurable(&proj0)
            .unwrap());
        assert!(!Partition::trivial(s.clone()).is_measurable(&proj0).unwrap());
        let c0 = Partition::cylinder(s.clone(), &["f0"]).unwrap();
        let c1 = Partition::cylinder(s.clone(), &["f1"]).unwrap();
        assert!(c0.is_measurable(&proj0).unwrap());
        assert!(!c1.is_measurable(&proj0).unwrap());

        // a size-1 factor's projection is constant, hence measurable wrt anything
        let s1 = space(&[1, 3]);
        let p: Vec<usize> = (0..s1.len()).map(|i| s1.coord(i, 0)).collect();
        assert!(Partition::cylinder(s1, &["f1"])
            .unwrap()
            .is_measurable(&p)
            .unwrap());
    }
}

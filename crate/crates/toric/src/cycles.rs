//! 1-cycle classes, primitive collections, and primitive relations.
//!
//! The group of 1-cycles modulo numerical equivalence is realized as the
//! lattice of integral relations among the ray generators: a class is an
//! integer vector indexed by the rays whose weighted ray sum vanishes, and
//! its entry at a ray is the intersection number with the corresponding
//! invariant divisor.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::Error;
use crate::fan::{ConeRef, Fan, FanId, RaySet, StarQuotient, Wall};
use crate::lattice::{IntMatrix, IntVec};

/// An element of the 1-cycle lattice: integer coefficients indexed by the
/// fan's rays, summing to zero against the ray vectors.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CycleClass {
    coeffs: IntVec,
    fan: FanId,
}

impl CycleClass {
    /// Checks the defining relation `sum coeffs[x] * ray[x] == 0`.
    pub fn new(f: &Fan, coeffs: IntVec) -> Result<CycleClass, Error> {
        if coeffs.dim() != f.ray_count() {
            return Err(Error::NotARelation);
        }
        let mut total = IntVec::zero(f.dim());
        for (i, ray) in f.rays().iter().enumerate() {
            total = total.add(&ray.scale(&coeffs.0[i]));
        }
        if !total.is_zero() {
            return Err(Error::NotARelation);
        }
        Ok(CycleClass { coeffs, fan: f.id() })
    }

    pub fn from_i64(f: &Fan, coeffs: &[i64]) -> Result<CycleClass, Error> {
        CycleClass::new(f, IntVec::from_i64(coeffs))
    }

    pub fn coeffs(&self) -> &IntVec {
        &self.coeffs
    }

    pub fn coeff(&self, ray: usize) -> &BigInt {
        &self.coeffs.0[ray]
    }

    pub fn fan_id(&self) -> FanId {
        self.fan
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_zero()
    }

    pub fn check_fan(&self, f: &Fan) -> Result<(), Error> {
        if self.fan == f.id() {
            Ok(())
        } else {
            Err(Error::FanMismatch)
        }
    }

    pub fn add(&self, other: &CycleClass) -> CycleClass {
        assert_eq!(self.fan, other.fan, "classes from different fans");
        CycleClass { coeffs: self.coeffs.add(&other.coeffs), fan: self.fan }
    }

    pub fn sub(&self, other: &CycleClass) -> CycleClass {
        assert_eq!(self.fan, other.fan, "classes from different fans");
        CycleClass { coeffs: self.coeffs.sub(&other.coeffs), fan: self.fan }
    }

    pub fn scale(&self, s: &BigInt) -> CycleClass {
        CycleClass { coeffs: self.coeffs.scale(s), fan: self.fan }
    }

    /// The primitive class on the same ray: coefficients divided by content.
    pub fn primitive_part(&self) -> CycleClass {
        CycleClass { coeffs: self.coeffs.primitive_part(), fan: self.fan }
    }

    /// Whether `self == t * other` for some positive rational `t`.
    pub fn proportional_positive(&self, other: &CycleClass) -> bool {
        if self.is_zero() || other.is_zero() {
            return false;
        }
        let a = &self.coeffs.0;
        let b = &other.coeffs.0;
        let k = match b.iter().position(|e| !e.is_zero()) {
            Some(k) => k,
            None => return false,
        };
        if a[k].is_zero() || (a[k].sign() != b[k].sign()) {
            return false;
        }
        // a == (a[k]/b[k]) * b, cross-multiplied to stay integral.
        for i in 0..a.len() {
            if &a[i] * &b[k] != &b[i] * &a[k] {
                return false;
            }
        }
        true
    }

    /// Human-readable relation form, positive side left: `e1+f2 = x`.
    pub fn format_relation(&self, f: &Fan) -> String {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (i, c) in self.coeffs.0.iter().enumerate() {
            if c.is_positive() {
                plus.push(term(c, &f.label(i)));
            } else if c.is_negative() {
                minus.push(term(&-c, &f.label(i)));
            }
        }
        let lhs = if plus.is_empty() { "0".to_string() } else { plus.join("+") };
        let rhs = if minus.is_empty() { "0".to_string() } else { minus.join("+") };
        format!("{lhs} = {rhs}")
    }

    /// JSON form `{"coeffs": [...]}` used by the CLI.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc {
            coeffs: Vec<i64>,
        }
        serde_json::to_value(Doc {
            coeffs: self
                .coeffs
                .0
                .iter()
                .map(|e| i64::try_from(e.clone()).expect("coefficient fits in i64"))
                .collect(),
        })
        .expect("class serializes")
    }
}

fn term(c: &BigInt, label: &str) -> String {
    if c.is_one() {
        label.to_string()
    } else {
        format!("{c}{label}")
    }
}

/// A minimal non-face: spans no cone, but every one-deleted subset does.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct PrimitiveCollection {
    pub rays: RaySet,
}

impl PrimitiveCollection {
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        PrimitiveCollection { rays: indices.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn labels(&self, f: &Fan) -> Vec<String> {
        self.rays.iter().map(|&r| f.label(r)).collect()
    }
}

/// A primitive collection together with the relation its ray sum satisfies:
/// `x_1 + .. + x_h = a_1 y_1 + .. + a_k y_k` with the focus cone on the right.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PrimitiveRelation {
    pub collection: PrimitiveCollection,
    pub focus: ConeRef,
    /// Positive coefficients aligned with `focus` in ascending ray order.
    pub neg_coeffs: Vec<BigInt>,
    pub cls: CycleClass,
    pub degree: BigInt,
}

impl PrimitiveRelation {
    /// Positive-side size `h`.
    pub fn h(&self) -> usize {
        self.collection.len()
    }

    /// Negative-side size `k`; zero means the class is numerically effective.
    pub fn k(&self) -> usize {
        self.focus.len()
    }

    pub fn is_nef(&self) -> bool {
        self.focus.is_empty()
    }

    pub fn format(&self, f: &Fan) -> String {
        self.cls.format_relation(f)
    }

    /// JSON form `{"plus": [...], "minus": [[label, coeff], ...], "degree": d}`.
    pub fn to_json(&self, f: &Fan) -> serde_json::Value {
        let plus: Vec<String> = self.collection.labels(f);
        let minus: Vec<(String, i64)> = self
            .focus
            .iter()
            .zip(&self.neg_coeffs)
            .map(|(r, a)| (f.label(r), i64::try_from(a.clone()).expect("coefficient fits in i64")))
            .collect();
        serde_json::json!({
            "plus": plus,
            "minus": minus,
            "degree": i64::try_from(self.degree.clone()).expect("degree fits in i64"),
        })
    }
}

/// A saturated basis of the 1-cycle lattice; its cardinality is the Picard
/// number `#rays - dim`.
pub fn cycle_lattice_basis(f: &Fan) -> Vec<CycleClass> {
    let m = IntMatrix::from_columns(f.dim(), f.rays());
    m.kernel_basis()
        .into_iter()
        .map(|v| CycleClass::new(f, v).expect("kernel vector is a relation"))
        .collect()
}

/// Intersection number of the class with the invariant divisor of a ray.
pub fn intersect_divisor(c: &CycleClass, ray: usize) -> BigInt {
    c.coeff(ray).clone()
}

/// Pairing with the anticanonical divisor: the sum of all coefficients.
pub fn anticanonical_degree(c: &CycleClass) -> BigInt {
    c.coeffs().0.iter().sum()
}

/// The numerical class of the invariant curve indexed by a wall: the unique
/// relation with coefficient 1 on the two rays opposite the wall, supported
/// on the wall rays plus those two.
pub fn curve_class_from_wall(f: &Fan, w: &Wall) -> CycleClass {
    let left = &f.max_cones()[w.left];
    let right = &f.max_cones()[w.right];
    let a = *left.difference(&w.cone.0).next().expect("adjacent cone adds one ray");
    let b = *right.difference(&w.cone.0).next().expect("adjacent cone adds one ray");
    let rhs = f.rays()[a].add(&f.rays()[b]).neg();
    let mut coeffs = IntVec::zero(f.ray_count());
    coeffs.0[a] = BigInt::one();
    coeffs.0[b] = BigInt::one();
    if !w.cone.is_empty() {
        let wall_rays: Vec<usize> = w.cone.to_vec();
        let cols: Vec<IntVec> = wall_rays.iter().map(|&r| f.rays()[r].clone()).collect();
        let m = IntMatrix::from_columns(f.dim(), &cols);
        let sol = m
            .solve_rational(&rhs)
            .expect("wall rays plus opposite rays are linearly dependent");
        let sol = sol.to_integer().expect("smooth cone yields integer coefficients");
        for (idx, r) in wall_rays.iter().enumerate() {
            coeffs.0[*r] = sol.0[idx].clone();
        }
    }
    CycleClass::new(f, coeffs).expect("wall relation sums to zero")
}

/// All primitive collections, enumerated by size then lexicographically.
/// A set containing a previously found collection is skipped.
pub fn primitive_collections(f: &Fan) -> Vec<PrimitiveCollection> {
    let m = f.ray_count();
    let n = f.dim();
    let mut found: Vec<RaySet> = Vec::new();
    // Minimal non-faces have at most n+1 rays: cones have at most n, so every
    // (n+1)-set is a non-face and anything larger contains one.
    for size in 2..=(n + 1).min(m) {
        'subsets: for subset in k_subsets_of(m, size) {
            let set: RaySet = subset.iter().copied().collect();
            for prior in &found {
                if prior.is_subset(&set) {
                    continue 'subsets;
                }
            }
            if f.is_cone(&set) {
                continue;
            }
            let all_facets_are_cones = subset.iter().all(|&skip| {
                let sub: RaySet = set.iter().copied().filter(|&r| r != skip).collect();
                f.is_cone(&sub)
            });
            if all_facets_are_cones {
                found.push(set);
            }
        }
    }
    found.into_iter().map(|rays| PrimitiveCollection { rays }).collect()
}

fn k_subsets_of(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n || k == 0 {
        return out;
    }
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        let mut i = k - 1;
        while current[i] == i + n - k {
            if i == 0 {
                return out;
            }
            i -= 1;
        }
        current[i] += 1;
        for j in i + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

/// The primitive relation of a collection: locates the cone containing the
/// ray sum in its relative interior and reads off the coefficients.
///
/// Errors if the collection meets its focus cone; that would violate an
/// assumption the rest of the pipeline relies on, so it is surfaced rather
/// than silently accepted.
pub fn primitive_relation(f: &Fan, p: &PrimitiveCollection) -> Result<PrimitiveRelation, Error> {
    let mut sum = IntVec::zero(f.dim());
    for &r in &p.rays {
        sum = sum.add(&f.rays()[r]);
    }
    let (focus, coords) = f
        .locate_with_coords(&sum)
        .ok_or_else(|| Error::Internal("ray sum located in no cone".into()))?;
    if p.rays.intersection(&focus.0).next().is_some() {
        return Err(Error::FocusOverlap {
            collection: p.rays.iter().copied().collect(),
            focus: focus.to_vec(),
        });
    }
    let mut coeffs = IntVec::zero(f.ray_count());
    for &r in &p.rays {
        coeffs.0[r] = BigInt::one();
    }
    let mut neg_coeffs = Vec::with_capacity(coords.len());
    for (r, a) in &coords {
        coeffs.0[*r] = -a.clone();
        neg_coeffs.push(a.clone());
    }
    let cls = CycleClass::new(f, coeffs)?;
    let degree = anticanonical_degree(&cls);
    Ok(PrimitiveRelation { collection: p.clone(), focus, neg_coeffs, cls, degree })
}

/// All primitive relations, in collection order.
pub fn primitive_relations(f: &Fan) -> Result<Vec<PrimitiveRelation>, Error> {
    primitive_collections(f)
        .iter()
        .map(|p| primitive_relation(f, p))
        .collect()
}

/// Restriction of a class to the invariant subvariety of `quotient.tau`.
///
/// Every ray carrying a nonzero coefficient must either belong to `tau`
/// (those are killed by the projection) or map to a quotient ray.
pub fn restrict_class(
    f: &Fan,
    quotient: &StarQuotient,
    c: &CycleClass,
) -> Result<CycleClass, Error> {
    c.check_fan(f)?;
    let mut coeffs = IntVec::zero(quotient.fan.ray_count());
    for (r, v) in c.coeffs().0.iter().enumerate() {
        if v.is_zero() || quotient.tau.contains(r) {
            continue;
        }
        match quotient.ray_map.get(&r) {
            Some(&q) => coeffs.0[q] = v.clone(),
            None => return Err(Error::ClassOutsideStar),
        }
    }
    CycleClass::new(&quotient.fan, coeffs)
}

/// Effectivity hint: a class whose negative-support rays span a cone of the
/// fan is effective. Primitive relations always qualify.
pub fn negative_support_spans_cone(f: &Fan, c: &CycleClass) -> bool {
    let neg: RaySet = c
        .coeffs()
        .0
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_negative())
        .map(|(r, _)| r)
        .collect();
    f.is_cone(&neg)
}

/// Distinct wall classes in canonical (coefficient-lexicographic) order.
pub fn wall_classes(f: &Fan) -> Vec<CycleClass> {
    let mut classes: Vec<CycleClass> =
        f.walls().iter().map(|w| curve_class_from_wall(f, w)).collect();
    classes.sort();
    classes.dedup();
    classes
}

/// Walls of `f` whose curve class equals `c`, in wall order.
pub fn walls_with_class(f: &Fan, c: &CycleClass) -> Vec<Wall> {
    f.walls()
        .into_iter()
        .filter(|w| &curve_class_from_wall(f, w) == c)
        .collect()
}

/// Class lookup table: wall class by collection of supporting walls.
pub fn class_by_wall(f: &Fan) -> BTreeMap<ConeRef, CycleClass> {
    f.walls()
        .into_iter()
        .map(|w| {
            let cls = curve_class_from_wall(f, &w);
            (w.cone, cls)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn p2_has_one_basis_class() {
        let f = catalog::projective_space(2);
        let basis = cycle_lattice_basis(&f);
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0].coeffs(), &IntVec::from_i64(&[1, 1, 1]));
    }

    #[test]
    fn p2_line_class_degree() {
        let f = catalog::projective_space(2);
        let line = CycleClass::from_i64(&f, &[1, 1, 1]).unwrap();
        assert_eq!(anticanonical_degree(&line), BigInt::from(3));
    }

    #[test]
    fn class_must_be_a_relation() {
        let f = catalog::projective_space(2);
        assert!(matches!(CycleClass::from_i64(&f, &[1, 0, 0]), Err(Error::NotARelation)));
    }

    #[test]
    fn p2_wall_class_is_line() {
        let f = catalog::projective_space(2);
        for w in f.walls() {
            let c = curve_class_from_wall(&f, &w);
            assert_eq!(c.coeffs(), &IntVec::from_i64(&[1, 1, 1]));
        }
    }

    #[test]
    fn hirzebruch_section_self_intersection() {
        for a in 0..4i64 {
            let f = catalog::hirzebruch(a as u64);
            // wall {u2}: u1 + u3 = a*u2, so the class has -a at u2.
            let wall = f
                .walls()
                .into_iter()
                .find(|w| w.cone == ConeRef::from_indices([1]))
                .unwrap();
            let c = curve_class_from_wall(&f, &wall);
            assert_eq!(c.coeffs(), &IntVec::from_i64(&[1, -a, 1, 0]));
        }
    }

    #[test]
    fn p2_primitive_collections() {
        let f = catalog::projective_space(2);
        let pcs = primitive_collections(&f);
        assert_eq!(pcs, vec![PrimitiveCollection::from_indices([0, 1, 2])]);
    }

    #[test]
    fn hirzebruch_primitive_collections() {
        let f = catalog::hirzebruch(2);
        let pcs = primitive_collections(&f);
        assert_eq!(
            pcs,
            vec![
                PrimitiveCollection::from_indices([0, 2]),
                PrimitiveCollection::from_indices([1, 3]),
            ]
        );
    }

    #[test]
    fn p2_primitive_relation_is_nef_of_degree_three() {
        let f = catalog::projective_space(2);
        let pcs = primitive_collections(&f);
        let r = primitive_relation(&f, &pcs[0]).unwrap();
        assert!(r.is_nef());
        assert_eq!(r.degree, BigInt::from(3));
        assert_eq!(r.cls.coeffs(), &IntVec::from_i64(&[1, 1, 1]));
    }

    #[test]
    fn hirzebruch_relation_degrees() {
        for a in 0..4i64 {
            let f = catalog::hirzebruch(a as u64);
            let rels = primitive_relations(&f).unwrap();
            // {u1,u3}: u1+u3 = a*u2 has degree 2-a; {u2,u4}: u2+u4 = 0 has degree 2.
            let d: Vec<BigInt> = rels.iter().map(|r| r.degree.clone()).collect();
            assert_eq!(d, vec![BigInt::from(2 - a), BigInt::from(2)]);
        }
    }

    #[test]
    fn degree_matches_h_minus_coefficient_sum() {
        let f = catalog::projective_space(3);
        for r in primitive_relations(&f).unwrap() {
            let coeff_sum: BigInt = r.neg_coeffs.iter().sum();
            assert_eq!(r.degree, BigInt::from(r.h() as i64) - coeff_sum);
        }
    }

    #[test]
    fn restrict_class_checks_star_support() {
        let f = catalog::hirzebruch(1);
        let q = crate::fan::star_quotient(&f, &ConeRef::from_indices([0])).unwrap();
        // Fiber class is supported on the star of u1.
        let fiber = CycleClass::from_i64(&f, &[0, 1, 0, 1]).unwrap();
        assert!(restrict_class(&f, &q, &fiber).is_ok());
        // The section class touches u3, which does not complete <u1> to a cone.
        let section = CycleClass::from_i64(&f, &[1, -1, 1, 0]).unwrap();
        assert!(matches!(restrict_class(&f, &q, &section), Err(Error::ClassOutsideStar)));
    }

    #[test]
    fn proportionality() {
        let f = catalog::projective_space(2);
        let line = CycleClass::from_i64(&f, &[1, 1, 1]).unwrap();
        let double = CycleClass::from_i64(&f, &[2, 2, 2]).unwrap();
        let minus = CycleClass::from_i64(&f, &[-1, -1, -1]).unwrap();
        assert!(line.proportional_positive(&double));
        assert!(double.proportional_positive(&line));
        assert!(!line.proportional_positive(&minus));
    }
}

//! Contractibility of classes and contraction morphisms as fan surgery.
//!
//! A class is contractible when it admits an equivariant morphism contracting
//! exactly the curves proportional to it. Three equivalent tests are
//! implemented: the purely combinatorial collection criterion
//! ([`is_contractible_criterio`]), the local fan-geometry condition
//! ([`is_contractible_geometric`]), and extremality of the class in every
//! invariant surface containing one of its curves ([`check_condition_i`]).
//! [`contract`] performs the surgery itself.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::cycles::{
    self, curve_class_from_wall, primitive_collections, primitive_relations, CycleClass,
    PrimitiveCollection, PrimitiveRelation,
};
use crate::error::Error;
use crate::fan::{self, ConeRef, Fan, GeneralFan, RaySet, Wall};
use crate::lattice::IntMatrix;
use crate::mori;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ContractionKind {
    Fiber,
    Birational,
}

/// Numerical shape of a contraction, read off the primitive relation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ContractionProfile {
    pub kind: ContractionKind,
    /// Positive-side size of the relation.
    pub h: usize,
    /// Negative-side size; zero exactly in the fiber case.
    pub k: usize,
    /// Fibers of the contraction are projective spaces of this dimension.
    pub bundle_fiber_dim: usize,
    /// Exceptional locus upstairs (birational case), in source ray indices.
    pub locus_a: Option<ConeRef>,
    /// Stratum the locus maps onto (birational case), in source ray indices.
    pub image_b: Option<ConeRef>,
    pub target_simplicial: bool,
    pub target_smooth: bool,
}

/// Contraction target: a smooth fan when the surgery stays smooth, otherwise
/// the weaker general type.
#[derive(Clone, Debug)]
pub enum ContractionTarget {
    Smooth(Fan),
    General(GeneralFan),
}

/// Result of contracting a contractible class.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub profile: ContractionProfile,
    pub removed_walls: Vec<Wall>,
    /// Merged maximal cones of the target, in source ray indices.
    pub merged_cones: Vec<RaySet>,
    pub target: ContractionTarget,
    /// Source ray index -> target ray index, for rays that survive.
    pub ray_map: BTreeMap<usize, usize>,
    /// Lattice projection along the collection span (fiber case).
    pub quotient_map: Option<IntMatrix>,
}

impl Contraction {
    pub fn to_json(&self) -> serde_json::Value {
        let target = match &self.target {
            ContractionTarget::Smooth(f) => fan::fan_to_json(f),
            ContractionTarget::General(g) => fan::general_fan_to_json(g),
        };
        serde_json::json!({
            "kind": match self.profile.kind {
                ContractionKind::Fiber => "fiber",
                ContractionKind::Birational => "birational",
            },
            "removed_walls": self
                .removed_walls
                .iter()
                .map(|w| w.cone.to_vec())
                .collect::<Vec<_>>(),
            "target": target,
            "profile": {
                "h": self.profile.h,
                "k": self.profile.k,
                "bundle_fiber_dim": self.profile.bundle_fiber_dim,
                "locus_a": self.profile.locus_a.as_ref().map(|c| c.to_vec()),
                "image_b": self.profile.image_b.as_ref().map(|c| c.to_vec()),
                "target_simplicial": self.profile.target_simplicial,
                "target_smooth": self.profile.target_smooth,
            },
        })
    }
}

/// Collection criterion: the relation is contractible iff for every other
/// primitive collection meeting it, the other collection's complement plus
/// the focus rays contains a primitive collection.
pub fn is_contractible_criterio(f: &Fan, r: &PrimitiveRelation) -> bool {
    let collections = primitive_collections(f);
    criterio_with(&collections, r)
}

/// Same check against a precomputed collection list.
pub fn criterio_with(collections: &[PrimitiveCollection], r: &PrimitiveRelation) -> bool {
    let p = &r.collection.rays;
    for q in collections {
        if &q.rays == p || q.rays.intersection(p).next().is_none() {
            continue;
        }
        let mut candidate: RaySet = q.rays.difference(p).copied().collect();
        candidate.extend(r.focus.iter());
        let contains_collection = collections.iter().any(|c| c.rays.is_subset(&candidate));
        if !contains_collection {
            return false;
        }
    }
    true
}

/// All cones disjoint from the relation's rays whose join with the focus is
/// in the fan: the faces of maximal cones containing the focus, filtered.
fn candidate_nus(f: &Fan, r: &PrimitiveRelation) -> BTreeSet<RaySet> {
    let p = &r.collection.rays;
    let focus = &r.focus.0;
    let mut out = BTreeSet::new();
    for sigma in f.max_cones() {
        if !focus.is_subset(sigma) {
            continue;
        }
        let free: Vec<usize> = sigma
            .iter()
            .copied()
            .filter(|ray| !focus.contains(ray) && !p.contains(ray))
            .collect();
        for mask in 0u32..(1 << free.len()) {
            let nu: RaySet = free
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &ray)| ray)
                .collect();
            out.insert(nu);
        }
    }
    out
}

/// Local fan-geometry test: for every cone `nu` disjoint from the relation's
/// rays with `focus + nu` in the fan, all cones obtained by dropping one
/// collection ray from `collection + focus + nu` must be in the fan.
pub fn is_contractible_geometric(f: &Fan, r: &PrimitiveRelation) -> bool {
    let p = &r.collection.rays;
    for nu in candidate_nus(f, r) {
        for &drop in p {
            let mut cone: RaySet = p.iter().copied().filter(|&x| x != drop).collect();
            cone.extend(r.focus.iter());
            cone.extend(nu.iter().copied());
            if !f.is_cone(&cone) {
                return false;
            }
        }
    }
    true
}

/// Curve-geometry test: the class is the class of an invariant curve, and
/// every invariant curve in the class is extremal in every invariant surface
/// containing it.
pub fn check_condition_i(f: &Fan, c: &CycleClass) -> Result<bool, Error> {
    c.check_fan(f)?;
    let matching: Vec<Wall> = cycles::walls_with_class(f, c);
    if matching.is_empty() {
        return Ok(false);
    }
    let n = f.dim();
    if n < 2 {
        return Ok(true);
    }
    for w in &matching {
        let wall_rays: Vec<usize> = w.cone.to_vec();
        for tau in subsets_of_size(&wall_rays, n - 2) {
            let quotient = fan::star_quotient(f, &ConeRef::from_indices(tau))?;
            let restricted = cycles::restrict_class(f, &quotient, c)?;
            if !mori::is_extremal(&quotient.fan, &restricted)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn subsets_of_size(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut chooser: Vec<usize> = (0..k).collect();
    loop {
        out.push(chooser.iter().map(|&i| items[i]).collect());
        let mut i = k - 1;
        while chooser[i] == i + n - k {
            if i == 0 {
                return out;
            }
            i -= 1;
        }
        chooser[i] += 1;
        for j in i + 1..k {
            chooser[j] = chooser[j - 1] + 1;
        }
    }
}

/// The cone spanned by the rays pairing negatively with the class; curves in
/// the class live on the corresponding invariant subvariety.
pub fn negative_locus(f: &Fan, c: &CycleClass) -> Result<ConeRef, Error> {
    c.check_fan(f)?;
    let neg: RaySet = c
        .coeffs()
        .0
        .iter()
        .enumerate()
        .filter(|(_, v)| v < &&BigInt::from(0))
        .map(|(r, _)| r)
        .collect();
    if f.is_cone(&neg) {
        Ok(ConeRef(neg))
    } else {
        Err(Error::NoInvariantLocus)
    }
}

/// All primitive relations passing the contractibility criterion, in the
/// canonical collection order.
pub fn contractible_classes(f: &Fan) -> Result<Vec<PrimitiveRelation>, Error> {
    let collections = primitive_collections(f);
    let mut out = Vec::new();
    for p in &collections {
        let r = cycles::primitive_relation(f, p)?;
        if criterio_with(&collections, &r) {
            out.push(r);
        }
    }
    Ok(out)
}

/// Contracts a contractible primitive relation.
///
/// Birational case (`k > 0`): removes exactly the walls whose curve class is
/// the relation's class and merges their stars into the cones
/// `collection + focus + nu`. Fiber case (`k = 0`): additionally quotients by
/// the span of the collection, producing a smooth fan of lower dimension.
pub fn contract(f: &Fan, r: &PrimitiveRelation) -> Result<Contraction, Error> {
    r.cls.check_fan(f)?;
    if !is_contractible_criterio(f, r) {
        return Err(Error::NotContractible);
    }
    let gamma = &r.cls;
    let n = f.dim();
    let h = r.h();
    let k = r.k();
    let p = &r.collection.rays;
    let focus = &r.focus.0;

    let removed_walls: Vec<Wall> = cycles::walls_with_class(f, gamma);
    let nu_size = n - h - k + 1;
    let deltas: Vec<RaySet> = candidate_nus(f, r)
        .into_iter()
        .filter(|nu| nu.len() == nu_size)
        .collect();
    if deltas.is_empty() {
        return Err(Error::Internal("contractible relation with empty cone family".into()));
    }

    if k > 0 {
        let mut removed_max: BTreeSet<usize> = BTreeSet::new();
        for w in &removed_walls {
            removed_max.insert(w.left);
            removed_max.insert(w.right);
        }
        // The removed stars must be exactly the cones predicted by the
        // relation's geometry.
        for &ci in &removed_max {
            let sigma = &f.max_cones()[ci];
            let shared = sigma.intersection(p).count();
            let nu: RaySet = sigma
                .iter()
                .copied()
                .filter(|ray| !p.contains(ray) && !focus.contains(ray))
                .collect();
            if !focus.is_subset(sigma) || shared != h - 1 || !deltas.contains(&nu) {
                return Err(Error::Internal(
                    "wall with the contracted class outside the predicted star".into(),
                ));
            }
        }
        let merged: Vec<RaySet> = deltas
            .iter()
            .map(|nu| {
                let mut cone: RaySet = p.clone();
                cone.extend(focus.iter());
                cone.extend(nu.iter().copied());
                cone
            })
            .collect();
        let untouched: Vec<RaySet> = f
            .max_cones()
            .iter()
            .enumerate()
            .filter(|(ci, _)| !removed_max.contains(ci))
            .map(|(_, c)| c.clone())
            .collect();

        let a1 = r.neg_coeffs.first().cloned().unwrap_or_else(BigInt::one);
        let simplicial = k == 1;
        let smooth = simplicial && a1.is_one();
        let profile = ContractionProfile {
            kind: ContractionKind::Birational,
            h,
            k,
            bundle_fiber_dim: h - 1,
            locus_a: Some(r.focus.clone()),
            image_b: Some(ConeRef(p.union(focus).copied().collect())),
            target_simplicial: simplicial,
            target_smooth: smooth,
        };

        if simplicial {
            // The single negative ray lands in the relative interior of the
            // collection span and stops being a ray of the target.
            let y1 = *focus.iter().next().expect("k == 1");
            for cone in &untouched {
                if cone.contains(&y1) {
                    return Err(Error::Internal(
                        "negative ray survives outside the contracted star".into(),
                    ));
                }
            }
            let mut ray_map = BTreeMap::new();
            let mut new_rays = Vec::with_capacity(f.ray_count() - 1);
            let mut new_labels = f.labels().map(|_| Vec::with_capacity(f.ray_count() - 1));
            for (i, ray) in f.rays().iter().enumerate() {
                if i == y1 {
                    continue;
                }
                ray_map.insert(i, new_rays.len());
                new_rays.push(ray.clone());
                if let Some(ls) = &mut new_labels {
                    ls.push(f.label(i));
                }
            }
            let remap = |cone: &RaySet| -> RaySet {
                cone.iter().filter(|&&ray| ray != y1).map(|ray| ray_map[ray]).collect()
            };
            let target_cones: Vec<RaySet> =
                merged.iter().chain(untouched.iter()).map(|c| remap(c)).collect();
            let target = if smooth {
                ContractionTarget::Smooth(Fan::new(n, new_rays, target_cones, new_labels)?)
            } else {
                let g = GeneralFan {
                    dim: n,
                    rays: new_rays,
                    max_cones: target_cones,
                    labels: new_labels,
                };
                let violations = g.validate();
                if !violations.is_empty() {
                    return Err(Error::InvalidFan(violations));
                }
                ContractionTarget::General(g)
            };
            return Ok(Contraction {
                profile,
                removed_walls,
                merged_cones: merged,
                target,
                ray_map,
                quotient_map: None,
            });
        }

        // k >= 2: every ray survives, the merged cones are non-simplicial.
        let g = GeneralFan {
            dim: n,
            rays: f.rays().to_vec(),
            max_cones: merged.iter().chain(untouched.iter()).cloned().collect(),
            labels: f.labels().map(|ls| ls.to_vec()),
        };
        let violations = g.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidFan(violations));
        }
        let ray_map = (0..f.ray_count()).map(|i| (i, i)).collect();
        return Ok(Contraction {
            profile,
            removed_walls,
            merged_cones: merged,
            target: ContractionTarget::General(g),
            ray_map,
            quotient_map: None,
        });
    }

    // Fiber case: quotient every cone by the span of the collection. Any h-1
    // of the collection rays span that sublattice, and they are part of a
    // lattice basis, so the projection is onto.
    let span_rays: Vec<usize> = p.iter().copied().take(h - 1).collect();
    let span_cols: Vec<_> = span_rays.iter().map(|&ray| f.rays()[ray].clone()).collect();
    let t_matrix = IntMatrix::from_columns(n, &span_cols);
    let (hnf, u) = t_matrix.row_hermite();
    for i in 0..h - 1 {
        if !hnf.get(i, i).is_one() {
            return Err(Error::Internal("collection span is not a direct summand".into()));
        }
    }
    let q_dim = n - h + 1;
    let mut proj = IntMatrix::zero(q_dim, n);
    for row in 0..q_dim {
        for col in 0..n {
            proj.set(row, col, u.get(h - 1 + row, col).clone());
        }
    }

    let mut ray_map = BTreeMap::new();
    let mut new_rays: Vec<crate::lattice::IntVec> = Vec::new();
    let mut new_labels = f.labels().map(|_| Vec::new());
    for (i, ray) in f.rays().iter().enumerate() {
        if p.contains(&i) {
            continue;
        }
        let image = proj.mul_int_vec(ray).primitive_part();
        if let Some(existing) = new_rays.iter().position(|r| r == &image) {
            ray_map.insert(i, existing);
        } else {
            ray_map.insert(i, new_rays.len());
            new_rays.push(image);
            if let Some(ls) = &mut new_labels {
                ls.push(f.label(i));
            }
        }
    }
    let mut target_cones: Vec<RaySet> = f
        .max_cones()
        .iter()
        .map(|sigma| {
            sigma
                .iter()
                .filter(|ray| !p.contains(ray))
                .map(|ray| ray_map[ray])
                .collect::<RaySet>()
        })
        .collect();
    target_cones.sort_by(|a, b| a.iter().collect::<Vec<_>>().cmp(&b.iter().collect::<Vec<_>>()));
    target_cones.dedup();

    let fan = Fan::new(q_dim, new_rays, target_cones, new_labels)?;
    Ok(Contraction {
        profile: ContractionProfile {
            kind: ContractionKind::Fiber,
            h,
            k: 0,
            bundle_fiber_dim: h - 1,
            locus_a: None,
            image_b: None,
            target_simplicial: true,
            target_smooth: true,
        },
        removed_walls,
        merged_cones: deltas
            .iter()
            .map(|nu| {
                let mut cone: RaySet = p.clone();
                cone.extend(nu.iter().copied());
                cone
            })
            .collect(),
        target: ContractionTarget::Smooth(fan),
        ray_map,
        quotient_map: Some(proj),
    })
}

/// Contraction by class: strips the content, matches the primitive part
/// against the primitive relations, and contracts.
pub fn contract_class(f: &Fan, c: &CycleClass) -> Result<Contraction, Error> {
    c.check_fan(f)?;
    let normalized = c.primitive_part();
    for r in primitive_relations(f)? {
        if r.cls == normalized {
            return contract(f, &r);
        }
    }
    Err(Error::NotAPrimitiveClass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn relation_by_labels(f: &Fan, labels: &[&str]) -> PrimitiveRelation {
        let p = catalog::collection_by_labels(f, labels).unwrap();
        cycles::primitive_relation(f, &p).unwrap()
    }

    #[test]
    fn oda_gamma1_is_contractible() {
        let y = catalog::oda_nonprojective_3fold();
        let r = relation_by_labels(&y, &["e1", "f2"]);
        assert!(is_contractible_criterio(&y, &r));
        assert!(is_contractible_geometric(&y, &r));
    }

    #[test]
    fn oda_gamma4_is_not_contractible() {
        let y = catalog::oda_nonprojective_3fold();
        let r = relation_by_labels(&y, &["e0", "e2"]);
        assert!(!is_contractible_criterio(&y, &r));
        assert!(!is_contractible_geometric(&y, &r));
    }

    #[test]
    fn oda_contractible_set() {
        let y = catalog::oda_nonprojective_3fold();
        let c: Vec<String> = contractible_classes(&y)
            .unwrap()
            .iter()
            .map(|r| r.format(&y))
            .collect();
        assert_eq!(
            c,
            vec![
                "e1+f2 = f1+e2", // gamma_1
                "e2+f3 = f2+e3", // omega_3
                "f1+e3 = e1+f3", // omega_2
                "f1+f2+f3 = 2e0", // omega_5
            ]
        );
    }

    #[test]
    fn projective_space_has_one_contractible_class() {
        for n in 2..=4 {
            let f = catalog::projective_space(n);
            assert_eq!(contractible_classes(&f).unwrap().len(), 1);
        }
    }

    #[test]
    fn negative_locus_of_gamma_is_x() {
        let x = catalog::esempio_total_space();
        let r = relation_by_labels(&x, &["f1", "e2"]);
        let locus = negative_locus(&x, &r.cls).unwrap();
        assert_eq!(locus, ConeRef::from_indices([7]));
    }

    #[test]
    fn negative_locus_of_nef_class_is_origin() {
        let f = catalog::projective_space(2);
        let line = CycleClass::from_i64(&f, &[1, 1, 1]).unwrap();
        assert_eq!(negative_locus(&f, &line).unwrap(), ConeRef::default());
    }

    #[test]
    fn contract_hirzebruch_fiber_gives_p1() {
        let f = catalog::hirzebruch(2);
        let r = relation_by_labels(&f, &["u2", "u4"]);
        let c = contract(&f, &r).unwrap();
        assert_eq!(c.profile.kind, ContractionKind::Fiber);
        assert_eq!(c.profile.bundle_fiber_dim, 1);
        let ContractionTarget::Smooth(target) = &c.target else { panic!("smooth target") };
        assert_eq!(target.dim(), 1);
        assert_eq!(target.ray_count(), 2);
    }

    #[test]
    fn contract_blowup_of_p3_nef_relation_gives_p1() {
        let f = catalog::blowup_of_p3_along_line();
        let rels = primitive_relations(&f).unwrap();
        let nef: Vec<_> = rels.iter().filter(|r| r.is_nef()).collect();
        assert_eq!(nef.len(), 1);
        assert_eq!(nef[0].h(), 3);
        let c = contract(&f, nef[0]).unwrap();
        assert_eq!(c.profile.bundle_fiber_dim, 2);
        let ContractionTarget::Smooth(target) = &c.target else { panic!("smooth target") };
        assert_eq!(target.dim(), 1);
    }

    #[test]
    fn contract_gamma_recovers_oda_3fold() {
        let x = catalog::esempio_total_space();
        let y = catalog::oda_nonprojective_3fold();
        let r = relation_by_labels(&x, &["f1", "e2"]);
        let c = contract(&x, &r).unwrap();
        assert_eq!(c.profile.kind, ContractionKind::Birational);
        assert!(c.profile.target_smooth);
        assert_eq!(c.removed_walls.len(), 2);
        let ContractionTarget::Smooth(target) = &c.target else { panic!("smooth target") };
        assert_eq!(target, &y);
    }

    #[test]
    fn contract_rejects_non_contractible() {
        let y = catalog::oda_nonprojective_3fold();
        let r = relation_by_labels(&y, &["e0", "e2"]);
        assert!(matches!(contract(&y, &r), Err(Error::NotContractible)));
    }

    #[test]
    fn contract_class_normalizes_multiples() {
        let f = catalog::projective_space(2);
        let twice = CycleClass::from_i64(&f, &[2, 2, 2]).unwrap();
        let c = contract_class(&f, &twice).unwrap();
        assert_eq!(c.profile.kind, ContractionKind::Fiber);
        // contracting the line class of the plane collapses to a point:
        // dimension 2 - 3 + 1 = 0 is outlawed by the fan type, so check the
        // profile only.
        let _ = c;
    }
}

//! Built-in fans and fan constructors, used as ground truth by the test
//! suite and addressable from the CLI by name.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blowup::{self, BlowUp};
use crate::cycles::{self, PrimitiveCollection};
use crate::error::Error;
use crate::fan::{ConeRef, Fan, RaySet};
use crate::lattice::IntVec;

/// A named fan with a note on where it comes from.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub fan: Fan,
    pub provenance: &'static str,
}

/// Projective n-space: rays `e1..en` and `e0 = -(e1+..+en)`, maximal cones
/// all n-subsets of the n+1 rays.
pub fn projective_space(n: usize) -> Fan {
    assert!(n >= 1);
    let mut rays = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut v = vec![0i64; n];
        v[i] = 1;
        rays.push(IntVec::from_i64(&v));
    }
    rays.push(IntVec::from_i64(&vec![-1i64; n]));
    let mut labels: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    labels.push("e0".into());
    let cones: Vec<RaySet> = (0..=n)
        .map(|skip| (0..=n).filter(|&r| r != skip).collect())
        .collect();
    Fan::new(n, rays, cones, Some(labels)).expect("projective space fan is valid")
}

/// The Hirzebruch surface with parameter `a`: rays `(1,0), (0,1), (-1,a),
/// (0,-1)` and the four adjacent cones. `a = 0` is the product of two lines.
pub fn hirzebruch(a: u64) -> Fan {
    let rays = vec![
        IntVec::from_i64(&[1, 0]),
        IntVec::from_i64(&[0, 1]),
        IntVec::from_i64(&[-1, a as i64]),
        IntVec::from_i64(&[0, -1]),
    ];
    let cones: Vec<RaySet> = vec![
        [0usize, 1].into_iter().collect(),
        [1usize, 2].into_iter().collect(),
        [2usize, 3].into_iter().collect(),
        [3usize, 0].into_iter().collect(),
    ];
    let labels = vec!["u1".into(), "u2".into(), "u3".into(), "u4".into()];
    Fan::new(2, rays, cones, Some(labels)).expect("hirzebruch fan is valid")
}

/// Builds the fan whose primitive collections are exactly the given list:
/// the maximal cones are all n-subsets of rays containing no listed
/// collection. Fails if the result does not validate or if its computed
/// primitive collections differ from the input.
pub fn fan_from_primitive_collections(
    dim: usize,
    rays: Vec<IntVec>,
    collections: &[RaySet],
    labels: Option<Vec<String>>,
) -> Result<Fan, Error> {
    let m = rays.len();
    let mut cones: Vec<RaySet> = Vec::new();
    let mut chooser: Vec<usize> = (0..dim).collect();
    if dim > m {
        return Err(Error::CollectionMismatch);
    }
    loop {
        let set: RaySet = chooser.iter().copied().collect();
        if !collections.iter().any(|c| c.is_subset(&set)) {
            cones.push(set);
        }
        let mut i = dim - 1;
        loop {
            if chooser[i] != i + m - dim {
                break;
            }
            if i == 0 {
                let fan = Fan::new(dim, rays, cones, labels)?;
                let computed: Vec<RaySet> = cycles::primitive_collections(&fan)
                    .into_iter()
                    .map(|p| p.rays)
                    .collect();
                let mut expected: Vec<RaySet> = collections.to_vec();
                expected.sort_by(|a, b| {
                    (a.len(), a.iter().collect::<Vec<_>>())
                        .cmp(&(b.len(), b.iter().collect::<Vec<_>>()))
                });
                if computed != expected {
                    return Err(Error::CollectionMismatch);
                }
                return Ok(fan);
            }
            i -= 1;
        }
        chooser[i] += 1;
        for j in i + 1..dim {
            chooser[j] = chooser[j - 1] + 1;
        }
    }
}

/// The complete non-projective 3-fold of Picard number 4, reconstructed from
/// its seven primitive collections. Ray order: `e1, e2, e3, e0, f1, f2, f3`
/// with `e0 = -e1-e2-e3` and `fi = e0 + ei`.
pub fn oda_nonprojective_3fold() -> Fan {
    let rays = vec![
        IntVec::from_i64(&[1, 0, 0]),    // e1
        IntVec::from_i64(&[0, 1, 0]),    // e2
        IntVec::from_i64(&[0, 0, 1]),    // e3
        IntVec::from_i64(&[-1, -1, -1]), // e0
        IntVec::from_i64(&[0, -1, -1]),  // f1
        IntVec::from_i64(&[-1, 0, -1]),  // f2
        IntVec::from_i64(&[-1, -1, 0]),  // f3
    ];
    let labels = vec![
        "e1".into(),
        "e2".into(),
        "e3".into(),
        "e0".into(),
        "f1".into(),
        "f2".into(),
        "f3".into(),
    ];
    let collections: Vec<RaySet> = vec![
        [0usize, 5].into_iter().collect(), // {e1, f2}
        [4usize, 2].into_iter().collect(), // {f1, e3}
        [1usize, 6].into_iter().collect(), // {e2, f3}
        [3usize, 1].into_iter().collect(), // {e0, e2}
        [4usize, 5, 6].into_iter().collect(), // {f1, f2, f3}
        [3usize, 0].into_iter().collect(), // {e0, e1}
        [3usize, 2].into_iter().collect(), // {e0, e3}
    ];
    fan_from_primitive_collections(3, rays, &collections, Some(labels))
        .expect("collection list reconstructs the 3-fold")
}

/// The blow-up of [`oda_nonprojective_3fold`] along the curve `V(<f1,e2>)`;
/// projective of Picard number 5, with the new ray labeled `x`.
pub fn esempio_blowup() -> BlowUp {
    let base = oda_nonprojective_3fold();
    // f1 has index 4, e2 has index 1.
    let mut b = blowup::blow_up(&base, &ConeRef::from_indices([4, 1]))
        .expect("the curve <f1,e2> is a cone of the 3-fold");
    b.total = relabel_last_ray(&b.total, "x");
    b
}

/// Total space of [`esempio_blowup`].
pub fn esempio_total_space() -> Fan {
    esempio_blowup().total
}

fn relabel_last_ray(f: &Fan, label: &str) -> Fan {
    let mut labels: Vec<String> = f
        .labels()
        .map(|ls| ls.to_vec())
        .unwrap_or_else(|| (0..f.ray_count()).map(|i| format!("r{i}")).collect());
    *labels.last_mut().expect("fan has rays") = label.to_string();
    Fan::new(f.dim(), f.rays().to_vec(), f.max_cones().to_vec(), Some(labels))
        .expect("relabeling keeps the fan valid")
}

/// The blow-up of projective 3-space along the invariant line `V(<e1,e2>)`.
pub fn blowup_of_p3_along_line() -> Fan {
    let base = projective_space(3);
    blowup::blow_up(&base, &ConeRef::from_indices([0, 1]))
        .expect("<e1,e2> is a cone of projective 3-space")
        .total
}

/// All named catalog entries.
pub fn entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "p1",
            fan: projective_space(1),
            provenance: "projective line",
        },
        CatalogEntry {
            name: "p2",
            fan: projective_space(2),
            provenance: "projective plane",
        },
        CatalogEntry {
            name: "p3",
            fan: projective_space(3),
            provenance: "projective 3-space",
        },
        CatalogEntry {
            name: "p4",
            fan: projective_space(4),
            provenance: "projective 4-space",
        },
        CatalogEntry {
            name: "f0",
            fan: hirzebruch(0),
            provenance: "product of two projective lines",
        },
        CatalogEntry {
            name: "f1",
            fan: hirzebruch(1),
            provenance: "Hirzebruch surface, parameter 1 (plane blown up in a point)",
        },
        CatalogEntry {
            name: "f2",
            fan: hirzebruch(2),
            provenance: "Hirzebruch surface, parameter 2",
        },
        CatalogEntry {
            name: "f3",
            fan: hirzebruch(3),
            provenance: "Hirzebruch surface, parameter 3",
        },
        CatalogEntry {
            name: "oda-y",
            fan: oda_nonprojective_3fold(),
            provenance: "complete non-projective 3-fold of Picard number 4, \
                         reconstructed from its primitive collections",
        },
        CatalogEntry {
            name: "esempio-x",
            fan: esempio_total_space(),
            provenance: "blow-up of oda-y along the curve V(<f1,e2>)",
        },
        CatalogEntry {
            name: "bl-line-p3",
            fan: blowup_of_p3_along_line(),
            provenance: "blow-up of projective 3-space along an invariant line",
        },
    ]
}

pub fn lookup(name: &str) -> Result<Fan, Error> {
    entries()
        .into_iter()
        .find(|e| e.name == name)
        .map(|e| e.fan)
        .ok_or_else(|| Error::UnknownCatalogEntry(name.to_string()))
}

/// Deterministic corpus of iterated smooth blow-ups over the catalog bases,
/// for cross-oracle and round-trip testing. Each entry carries the chain's
/// final blow-up so pushforward properties can be checked on the pair.
pub struct CorpusEntry {
    pub name: String,
    pub fan: Fan,
    pub last_step: Option<BlowUp>,
}

/// `count` fans obtained from the catalog bases (dimensions 2 to 4) by 1 to
/// `max_depth` random smooth blow-ups, seeded deterministically.
pub fn random_blowup_corpus(seed: u64, count: usize, max_depth: usize) -> Vec<CorpusEntry> {
    let bases: Vec<(&str, Fan)> = vec![
        ("p2", projective_space(2)),
        ("f0", hirzebruch(0)),
        ("f1", hirzebruch(1)),
        ("f2", hirzebruch(2)),
        ("p3", projective_space(3)),
        ("oda-y", oda_nonprojective_3fold()),
        ("p4", projective_space(4)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let (base_name, base) = &bases[i % bases.len()];
        let depth = rng.gen_range(1..=max_depth);
        let mut fan = base.clone();
        let mut last = None;
        for _ in 0..depth {
            let cone_idx = rng.gen_range(0..fan.max_cones().len());
            let cone: Vec<usize> = fan.max_cones()[cone_idx].iter().copied().collect();
            let size = rng.gen_range(2..=cone.len());
            let mut picked: RaySet = RaySet::new();
            while picked.len() < size {
                picked.insert(cone[rng.gen_range(0..cone.len())]);
            }
            let b = blowup::blow_up(&fan, &ConeRef(picked)).expect("cone of the fan");
            fan = b.total.clone();
            last = Some(b);
        }
        out.push(CorpusEntry { name: format!("{base_name}+{depth}blowups#{i}"), fan, last_step: last });
    }
    out
}

/// Every cone of the fan with at least `min_size` rays, in canonical order.
pub fn all_cones_of_size_at_least(f: &Fan, min_size: usize) -> Vec<ConeRef> {
    let mut seen = std::collections::BTreeSet::new();
    for cone in f.max_cones() {
        let members: Vec<usize> = cone.iter().copied().collect();
        for mask in 1u32..(1 << members.len()) {
            let subset: RaySet = members
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &r)| r)
                .collect();
            if subset.len() >= min_size {
                seen.insert(subset);
            }
        }
    }
    seen.into_iter().map(ConeRef).collect()
}

/// The collection sum check used by the surface decomposition tests: whether
/// all coefficients of the class sum to zero against the rays. Exposed for
/// test-side sanity checks.
pub fn is_relation(f: &Fan, coeffs: &IntVec) -> bool {
    let mut total = IntVec::zero(f.dim());
    for (i, ray) in f.rays().iter().enumerate() {
        total = total.add(&ray.scale(&coeffs.0[i]));
    }
    total.0.iter().all(|e| e.is_zero())
}

/// Convenience: the primitive collection given by labels.
pub fn collection_by_labels(f: &Fan, labels: &[&str]) -> Result<PrimitiveCollection, Error> {
    let mut rays = RaySet::new();
    for l in labels {
        rays.insert(
            f.ray_by_label(l)
                .ok_or_else(|| Error::UnknownLabel((*l).to_string()))?,
        );
    }
    Ok(PrimitiveCollection { rays })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projective_spaces_validate() {
        for n in 1..=4 {
            let f = projective_space(n);
            assert_eq!(f.ray_count(), n + 1);
            assert_eq!(f.max_cones().len(), n + 1);
        }
    }

    #[test]
    fn hirzebruch_validates() {
        for a in 0..4 {
            let f = hirzebruch(a);
            assert_eq!(f.ray_count(), 4);
            assert_eq!(f.max_cones().len(), 4);
        }
    }

    #[test]
    fn p3_has_one_collection_of_degree_four() {
        let f = projective_space(3);
        let rels = cycles::primitive_relations(&f).unwrap();
        assert_eq!(rels.len(), 1);
        assert_eq!(rels[0].degree, BigInt::from(4));
    }

    #[test]
    fn p2_from_collections() {
        let rays = vec![
            IntVec::from_i64(&[1, 0]),
            IntVec::from_i64(&[0, 1]),
            IntVec::from_i64(&[-1, -1]),
        ];
        let collections: Vec<RaySet> = vec![[0usize, 1, 2].into_iter().collect()];
        let f = fan_from_primitive_collections(2, rays, &collections, None).unwrap();
        // label-insensitive equality
        assert_eq!(f, projective_space(2));
    }

    #[test]
    fn inconsistent_collection_list_rejected() {
        // On the product of two lines, {u1,u3} and {u2,u4} are the real
        // collections; listing only one of them is inconsistent.
        let rays = vec![
            IntVec::from_i64(&[1, 0]),
            IntVec::from_i64(&[0, 1]),
            IntVec::from_i64(&[-1, 0]),
            IntVec::from_i64(&[0, -1]),
        ];
        let collections: Vec<RaySet> = vec![[0usize, 2].into_iter().collect()];
        assert!(fan_from_primitive_collections(2, rays, &collections, None).is_err());
    }

    #[test]
    fn oda_3fold_validates_with_seven_rays() {
        let f = oda_nonprojective_3fold();
        assert_eq!(f.ray_count(), 7);
        assert_eq!(f.dim(), 3);
        // complete simplicial 3-fold: #maximal cones = 2*#rays - 4
        assert_eq!(f.max_cones().len(), 10);
        assert_eq!(cycles::cycle_lattice_basis(&f).len(), 4);
    }

    #[test]
    fn esempio_total_space_shape() {
        let x = esempio_total_space();
        assert_eq!(x.ray_count(), 8);
        assert_eq!(cycles::cycle_lattice_basis(&x).len(), 5);
        assert_eq!(x.label(7), "x");
    }

    #[test]
    fn corpus_is_deterministic() {
        let a = random_blowup_corpus(7, 10, 3);
        let b = random_blowup_corpus(7, 10, 3);
        assert_eq!(a.len(), 10);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.fan, y.fan);
        }
    }
}

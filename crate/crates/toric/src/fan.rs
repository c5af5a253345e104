//! Fans of smooth complete toric varieties.
//!
//! A [`Fan`] stores primitive ray generators together with the maximal cones
//! as sorted ray-index sets. Construction validates the smooth/complete
//! invariants; after that a fan is immutable and all operations are pure.
//!
//! Completeness is checked by a surrogate: every wall must lie in exactly two
//! maximal cones, any two maximal cones must intersect in a common face, and
//! a deterministic pseudo-random battery of points must all locate inside
//! some cone. For valid inputs at this scale the combination is decisive.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lattice::{lp_feasible, Constraint, IntMatrix, IntVec, RatVec};

pub type RaySet = BTreeSet<usize>;

/// Seed for the point-location smoke test; override per run via the CLI's
/// `TORIC_SEED`.
pub const DEFAULT_POINT_SEED: u64 = 0x70B1C;

const SMOKE_TEST_POINTS: usize = 1000;

/// Reference to a cone of a fan, as the sorted set of its ray indices.
/// The empty set refers to the origin cone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct ConeRef(pub RaySet);

impl ConeRef {
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        ConeRef(indices.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, ray: usize) -> bool {
        self.0.contains(&ray)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.0.iter().copied().collect()
    }
}

/// An (n-1)-dimensional cone together with its two adjacent maximal cones;
/// indexes an invariant curve.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Wall {
    pub cone: ConeRef,
    pub left: usize,
    pub right: usize,
}

/// Identity token for the fan a class belongs to; derived from the ray data.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FanId(u64);

/// One validation failure, naming the offending ray or cone.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    EmptyDimension,
    RayWrongDimension { ray: usize },
    RayZero { ray: usize },
    RayNotPrimitive { ray: usize },
    DuplicateRay { first: usize, second: usize },
    LabelCountMismatch { labels: usize, rays: usize },
    ConeRayOutOfRange { cone: usize },
    ConeWrongSize { cone: usize, size: usize },
    DuplicateCone { first: usize, second: usize },
    ConeNotUnimodular { cone: usize, det: BigInt },
    ConeNotFullDimensional { cone: usize },
    ConeNotPointed { cone: usize },
    WallCoverage { wall: Vec<usize>, count: usize },
    FacetCoverage { cone: usize, facet: Vec<usize>, count: usize },
    OverlappingCones { first: usize, second: usize },
    PointLocationFailed { point: Vec<BigInt> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyDimension => write!(f, "fan dimension must be positive"),
            Violation::RayWrongDimension { ray } => {
                write!(f, "ray {ray} has the wrong dimension")
            }
            Violation::RayZero { ray } => write!(f, "ray {ray} is zero"),
            Violation::RayNotPrimitive { ray } => write!(f, "non-primitive ray {ray}"),
            Violation::DuplicateRay { first, second } => {
                write!(f, "rays {first} and {second} are equal")
            }
            Violation::LabelCountMismatch { labels, rays } => {
                write!(f, "{labels} labels for {rays} rays")
            }
            Violation::ConeRayOutOfRange { cone } => {
                write!(f, "cone {cone} references a ray out of range")
            }
            Violation::ConeWrongSize { cone, size } => {
                write!(f, "maximal cone {cone} has {size} rays instead of the fan dimension")
            }
            Violation::DuplicateCone { first, second } => {
                write!(f, "maximal cones {first} and {second} are equal")
            }
            Violation::ConeNotUnimodular { cone, det } => {
                write!(f, "maximal cone {cone} is not smooth (determinant {det})")
            }
            Violation::ConeNotFullDimensional { cone } => {
                write!(f, "maximal cone {cone} is not full-dimensional")
            }
            Violation::ConeNotPointed { cone } => {
                write!(f, "maximal cone {cone} contains a line")
            }
            Violation::WallCoverage { wall, count } => {
                write!(f, "wall {wall:?} lies in {count} maximal cones instead of 2")
            }
            Violation::FacetCoverage { cone, facet, count } => {
                write!(
                    f,
                    "facet {facet:?} of cone {cone} is shared by {count} maximal cones instead of 2"
                )
            }
            Violation::OverlappingCones { first, second } => {
                write!(f, "maximal cones {first} and {second} do not meet in a common face")
            }
            Violation::PointLocationFailed { point } => {
                write!(f, "point {point:?} lies in no maximal cone")
            }
        }
    }
}

/// The fan of a smooth complete toric variety.
#[derive(Clone)]
pub struct Fan {
    dim: usize,
    rays: Vec<IntVec>,
    max_cones: Vec<RaySet>,
    labels: Option<Vec<String>>,
    // Integer inverse of each maximal cone's ray matrix, aligned with
    // max_cones; exists because every maximal cone is unimodular.
    cone_inverses: Vec<IntMatrix>,
    id: FanId,
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.rays == other.rays && self.max_cones == other.max_cones
    }
}

impl Eq for Fan {}

impl fmt::Debug for Fan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fan")
            .field("dim", &self.dim)
            .field("rays", &self.rays)
            .field("max_cones", &self.max_cones)
            .finish()
    }
}

impl Fan {
    /// Validates and builds a fan. The cone list is canonicalized (each cone
    /// sorted, cones sorted lexicographically).
    pub fn new(
        dim: usize,
        rays: Vec<IntVec>,
        max_cones: Vec<RaySet>,
        labels: Option<Vec<String>>,
    ) -> Result<Fan, Error> {
        Fan::new_with_seed(dim, rays, max_cones, labels, DEFAULT_POINT_SEED)
    }

    pub fn new_with_seed(
        dim: usize,
        rays: Vec<IntVec>,
        mut max_cones: Vec<RaySet>,
        labels: Option<Vec<String>>,
        seed: u64,
    ) -> Result<Fan, Error> {
        max_cones.sort_by(|a, b| a.iter().collect::<Vec<_>>().cmp(&b.iter().collect::<Vec<_>>()));
        let violations = validate_parts(dim, &rays, &max_cones, labels.as_deref(), seed);
        if !violations.is_empty() {
            return Err(Error::InvalidFan(violations));
        }
        let cone_inverses = max_cones
            .iter()
            .map(|cone| {
                cone_matrix(&rays, cone)
                    .unimodular_inverse()
                    .expect("validated cone is unimodular")
            })
            .collect();
        let id = fan_id(dim, &rays, &max_cones);
        Ok(Fan { dim, rays, max_cones, labels, cone_inverses, id })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[IntVec] {
        &self.rays
    }

    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    pub fn max_cones(&self) -> &[RaySet] {
        &self.max_cones
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display label for a ray: the stored label, or `r<idx>`.
    pub fn label(&self, ray: usize) -> String {
        match &self.labels {
            Some(ls) => ls[ray].clone(),
            None => format!("r{ray}"),
        }
    }

    /// Resolves a ray label (stored label or `r<idx>`).
    pub fn ray_by_label(&self, label: &str) -> Option<usize> {
        if let Some(ls) = &self.labels {
            if let Some(i) = ls.iter().position(|l| l == label) {
                return Some(i);
            }
        }
        label
            .strip_prefix('r')
            .and_then(|rest| rest.parse::<usize>().ok())
            .filter(|&i| i < self.rays.len())
    }

    pub fn id(&self) -> FanId {
        self.id
    }

    /// Whether the given ray set spans a cone of the fan, i.e. is a subset of
    /// some maximal cone.
    pub fn is_cone(&self, rays: &RaySet) -> bool {
        self.max_cones.iter().any(|c| rays.is_subset(c))
    }

    /// All walls, sorted by their ray sets.
    pub fn walls(&self) -> Vec<Wall> {
        let mut by_facet: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (ci, cone) in self.max_cones.iter().enumerate() {
            let cone_vec: Vec<usize> = cone.iter().copied().collect();
            for skip in 0..cone_vec.len() {
                let mut facet = cone_vec.clone();
                facet.remove(skip);
                by_facet.entry(facet).or_default().push(ci);
            }
        }
        by_facet
            .into_iter()
            .map(|(facet, cones)| {
                assert_eq!(cones.len(), 2, "validated fan has 2 cones per wall");
                Wall {
                    cone: ConeRef::from_indices(facet),
                    left: cones[0],
                    right: cones[1],
                }
            })
            .collect()
    }

    /// The unique cone having `p` in its relative interior.
    ///
    /// Panics when no maximal cone contains `p`; completeness of a validated
    /// fan guarantees that never happens.
    pub fn locate_minimal_cone(&self, p: &RatVec) -> ConeRef {
        let scale = p.denominator_lcm();
        let scaled = IntVec(p.0.iter().map(|e| e.numer() * (&scale / e.denom())).collect());
        self.locate_with_coords(&scaled)
            .expect("complete fan contains every point")
            .0
    }

    /// Locates an integer point and returns the minimal cone together with
    /// the (positive) coordinates of the point on that cone's rays.
    pub fn locate_with_coords(&self, p: &IntVec) -> Option<(ConeRef, BTreeMap<usize, BigInt>)> {
        assert_eq!(p.dim(), self.dim);
        for (ci, inv) in self.cone_inverses.iter().enumerate() {
            let coords = inv.mul_int_vec(p);
            if coords.0.iter().all(|c| !c.is_negative()) {
                let mut support = BTreeMap::new();
                for (k, ray) in self.max_cones[ci].iter().enumerate() {
                    if coords.0[k].is_positive() {
                        support.insert(*ray, coords.0[k].clone());
                    }
                }
                let cone = ConeRef(support.keys().copied().collect());
                return Some((cone, support));
            }
        }
        None
    }
}

fn fan_id(dim: usize, rays: &[IntVec], max_cones: &[RaySet]) -> FanId {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    dim.hash(&mut hasher);
    for r in rays {
        for e in &r.0 {
            e.hash(&mut hasher);
        }
        0xff_u8.hash(&mut hasher);
    }
    for c in max_cones {
        for i in c {
            i.hash(&mut hasher);
        }
        0xfe_u8.hash(&mut hasher);
    }
    FanId(hasher.finish())
}

fn cone_matrix(rays: &[IntVec], cone: &RaySet) -> IntMatrix {
    let cols: Vec<IntVec> = cone.iter().map(|&i| rays[i].clone()).collect();
    let dim = cols.first().map_or(0, |c| c.dim());
    IntMatrix::from_columns(dim, &cols)
}

/// Full validation of fan data; returns every violation found.
pub fn validate_parts(
    dim: usize,
    rays: &[IntVec],
    max_cones: &[RaySet],
    labels: Option<&[String]>,
    seed: u64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if dim == 0 {
        out.push(Violation::EmptyDimension);
        return out;
    }
    for (i, r) in rays.iter().enumerate() {
        if r.dim() != dim {
            out.push(Violation::RayWrongDimension { ray: i });
        } else if r.is_zero() {
            out.push(Violation::RayZero { ray: i });
        } else if !r.content().is_one() {
            out.push(Violation::RayNotPrimitive { ray: i });
        }
    }
    for i in 0..rays.len() {
        for j in i + 1..rays.len() {
            if rays[i] == rays[j] {
                out.push(Violation::DuplicateRay { first: i, second: j });
            }
        }
    }
    if let Some(ls) = labels {
        if ls.len() != rays.len() {
            out.push(Violation::LabelCountMismatch { labels: ls.len(), rays: rays.len() });
        }
    }
    if !out.is_empty() {
        return out;
    }

    let mut inverses: Vec<Option<IntMatrix>> = Vec::with_capacity(max_cones.len());
    for (ci, cone) in max_cones.iter().enumerate() {
        if cone.iter().any(|&r| r >= rays.len()) {
            out.push(Violation::ConeRayOutOfRange { cone: ci });
            inverses.push(None);
            continue;
        }
        if cone.len() != dim {
            out.push(Violation::ConeWrongSize { cone: ci, size: cone.len() });
            inverses.push(None);
            continue;
        }
        let m = cone_matrix(rays, cone);
        let det = m.det().expect("cone matrix is square");
        if !det.abs().is_one() {
            out.push(Violation::ConeNotUnimodular { cone: ci, det });
            inverses.push(None);
        } else {
            inverses.push(m.unimodular_inverse());
        }
    }
    for i in 0..max_cones.len() {
        for j in i + 1..max_cones.len() {
            if max_cones[i] == max_cones[j] {
                out.push(Violation::DuplicateCone { first: i, second: j });
            }
        }
    }
    if !out.is_empty() {
        return out;
    }

    // Wall condition: every facet of every maximal cone in exactly two.
    let mut by_facet: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for cone in max_cones {
        let cone_vec: Vec<usize> = cone.iter().copied().collect();
        for skip in 0..cone_vec.len() {
            let mut facet = cone_vec.clone();
            facet.remove(skip);
            *by_facet.entry(facet).or_default() += 1;
        }
    }
    for (facet, count) in &by_facet {
        if *count != 2 {
            out.push(Violation::WallCoverage { wall: facet.clone(), count: *count });
        }
    }

    // Pairwise face compatibility: the intersection of two maximal cones must
    // be the cone on their common rays. Working in cone a's integer
    // coordinates x, a violation is a point with x >= 0, (B^-1 A) x >= 0 and
    // positive total mass on the rays of a outside b.
    for a in 0..max_cones.len() {
        for b in a + 1..max_cones.len() {
            let Some(inv_b) = &inverses[b] else { continue };
            let rays_a: Vec<usize> = max_cones[a].iter().copied().collect();
            let only_a: Vec<usize> = (0..rays_a.len())
                .filter(|&k| !max_cones[b].contains(&rays_a[k]))
                .collect();
            if only_a.is_empty() {
                continue; // duplicate cones are reported separately
            }
            let m_a = cone_matrix(rays, &max_cones[a]);
            let mut constraints = Vec::new();
            for k in 0..dim {
                let mut v = vec![BigInt::zero(); dim];
                v[k] = BigInt::one();
                constraints.push(Constraint::ge(IntVec(v).to_rational(), rational(0)));
            }
            for row in 0..dim {
                let v: Vec<BigInt> = (0..dim)
                    .map(|col| (0..dim).map(|k| inv_b.get(row, k) * m_a.get(k, col)).sum())
                    .collect();
                constraints.push(Constraint::ge(IntVec(v).to_rational(), rational(0)));
            }
            let mut sel = vec![BigInt::zero(); dim];
            for &k in &only_a {
                sel[k] = BigInt::one();
            }
            constraints.push(Constraint::eq(IntVec(sel).to_rational(), rational(1)));
            if lp_feasible(&constraints).is_some() {
                out.push(Violation::OverlappingCones { first: a, second: b });
            }
        }
    }
    if !out.is_empty() {
        return out;
    }

    // Deterministic point-location smoke test.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'points: for _ in 0..SMOKE_TEST_POINTS {
        let p = IntVec((0..dim).map(|_| BigInt::from(rng.gen_range(-9999i64..=9999))).collect());
        for inv in inverses.iter().flatten() {
            let coords = inv.mul_int_vec(&p);
            if coords.0.iter().all(|c| !c.is_negative()) {
                continue 'points;
            }
        }
        out.push(Violation::PointLocationFailed { point: p.0.clone() });
        break;
    }
    out
}

fn rational(n: i64) -> num_rational::BigRational {
    num_rational::BigRational::from_integer(BigInt::from(n))
}

/// Star quotient data: the fan of the invariant subvariety `V(tau)` together
/// with the map from contributing ambient rays to quotient rays.
#[derive(Clone, Debug)]
pub struct StarQuotient {
    pub fan: Fan,
    pub ray_map: BTreeMap<usize, usize>,
    pub tau: ConeRef,
}

/// The fan of `V(tau)` in the quotient lattice by the span of `tau`'s rays.
///
/// Rays are the primitive images of the ambient rays completing `tau` to a
/// cone; maximal cones are the images of the maximal cones containing `tau`.
pub fn star_quotient(f: &Fan, tau: &ConeRef) -> Result<StarQuotient, Error> {
    if !f.is_cone(&tau.0) {
        return Err(Error::NotACone(tau.to_vec()));
    }
    let t = tau.len();
    let n = f.dim();
    assert!(t < n, "star_quotient requires a cone of dimension < n");

    // Unimodular u with u * T = [I_t; 0]; the bottom rows project onto the
    // quotient lattice.
    let tau_matrix = cone_matrix(f.rays(), &tau.0);
    let (h, u) = tau_matrix.row_hermite();
    for i in 0..t {
        if !h.get(i, i).is_one() {
            return Err(Error::Internal(
                "cone generators are not part of a lattice basis".into(),
            ));
        }
    }
    let mut proj = IntMatrix::zero(n - t, n);
    for r in 0..n - t {
        for c in 0..n {
            proj.set(r, c, u.get(t + r, c).clone());
        }
    }

    let star_cones: Vec<&RaySet> =
        f.max_cones().iter().filter(|c| tau.0.is_subset(c)).collect();
    let contributing: Vec<usize> = star_cones
        .iter()
        .flat_map(|c| c.iter().copied())
        .filter(|r| !tau.contains(*r))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut ray_map = BTreeMap::new();
    let mut q_rays = Vec::with_capacity(contributing.len());
    for &r in &contributing {
        let image = proj.mul_int_vec(&f.rays()[r]).primitive_part();
        ray_map.insert(r, q_rays.len());
        q_rays.push(image);
    }
    let q_cones: Vec<RaySet> = star_cones
        .iter()
        .map(|c| c.iter().filter(|r| !tau.contains(**r)).map(|r| ray_map[r]).collect())
        .collect();
    let q_labels =
        f.labels().map(|ls| contributing.iter().map(|&r| ls[r].clone()).collect());

    let fan = Fan::new(n - t, q_rays, q_cones, q_labels)?;
    Ok(StarQuotient { fan, ray_map, tau: tau.clone() })
}

/// Compares two fans up to a relabeling of rays (matching rays by their
/// coordinate vectors).
pub fn equal_up_to_ray_relabeling(a: &Fan, b: &Fan) -> bool {
    if a.dim() != b.dim() || a.ray_count() != b.ray_count() {
        return false;
    }
    let lookup: BTreeMap<&IntVec, usize> =
        b.rays().iter().enumerate().map(|(i, r)| (r, i)).collect();
    let mut perm = Vec::with_capacity(a.ray_count());
    for r in a.rays() {
        match lookup.get(r) {
            Some(&i) => perm.push(i),
            None => return false,
        }
    }
    let mapped: BTreeSet<RaySet> = a
        .max_cones()
        .iter()
        .map(|c| c.iter().map(|&r| perm[r]).collect())
        .collect();
    let target: BTreeSet<RaySet> = b.max_cones().iter().cloned().collect();
    mapped == target
}

/// A complete fan without the smoothness or simpliciality invariants; the
/// output type for birational contraction targets. Only validation and
/// serialization are supported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralFan {
    pub dim: usize,
    pub rays: Vec<IntVec>,
    pub max_cones: Vec<RaySet>,
    pub labels: Option<Vec<String>>,
}

impl GeneralFan {
    /// Checks ray sanity, pointedness and full-dimensionality of every
    /// maximal cone, and the wall condition: every facet of every maximal
    /// cone is shared with exactly one other maximal cone.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.dim == 0 {
            out.push(Violation::EmptyDimension);
            return out;
        }
        for (i, r) in self.rays.iter().enumerate() {
            if r.dim() != self.dim {
                out.push(Violation::RayWrongDimension { ray: i });
            } else if r.is_zero() {
                out.push(Violation::RayZero { ray: i });
            } else if !r.content().is_one() {
                out.push(Violation::RayNotPrimitive { ray: i });
            }
        }
        for i in 0..self.rays.len() {
            for j in i + 1..self.rays.len() {
                if self.rays[i] == self.rays[j] {
                    out.push(Violation::DuplicateRay { first: i, second: j });
                }
            }
        }
        if !out.is_empty() {
            return out;
        }

        let mut facets: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (ci, cone) in self.max_cones.iter().enumerate() {
            if cone.iter().any(|&r| r >= self.rays.len()) {
                out.push(Violation::ConeRayOutOfRange { cone: ci });
                continue;
            }
            let members: Vec<usize> = cone.iter().copied().collect();
            let rows: Vec<IntVec> = members.iter().map(|&r| self.rays[r].clone()).collect();
            let m = IntMatrix::from_rows(self.dim, &rows);
            if m.rank() != self.dim {
                out.push(Violation::ConeNotFullDimensional { cone: ci });
                continue;
            }
            if !cone_is_pointed(&rows) {
                out.push(Violation::ConeNotPointed { cone: ci });
                continue;
            }
            for facet in cone_facets(&self.rays, &members, self.dim) {
                facets.entry(facet).or_default().push(ci);
            }
        }
        if !out.is_empty() {
            return out;
        }
        for (facet, cones) in &facets {
            if cones.len() != 2 {
                out.push(Violation::FacetCoverage {
                    cone: cones[0],
                    facet: facet.clone(),
                    count: cones.len(),
                });
            }
        }
        out
    }
}

fn cone_is_pointed(rays: &[IntVec]) -> bool {
    // Pointed iff no nontrivial nonnegative combination of the rays vanishes.
    let dim = rays[0].dim();
    let k = rays.len();
    let mut constraints = Vec::new();
    for i in 0..k {
        let mut v = vec![BigInt::zero(); k];
        v[i] = BigInt::one();
        constraints.push(Constraint::ge(IntVec(v).to_rational(), rational(0)));
    }
    for d in 0..dim {
        let v: Vec<BigInt> = rays.iter().map(|r| r.0[d].clone()).collect();
        constraints.push(Constraint::eq(IntVec(v).to_rational(), rational(0)));
    }
    constraints.push(Constraint::eq(IntVec(vec![BigInt::one(); k]).to_rational(), rational(1)));
    lp_feasible(&constraints).is_none()
}

/// Facets of a full-dimensional pointed cone, each as the sorted list of the
/// cone's rays lying on the facet hyperplane.
fn cone_facets(rays: &[IntVec], members: &[usize], dim: usize) -> BTreeSet<Vec<usize>> {
    let mut facets = BTreeSet::new();
    if dim == 1 {
        facets.insert(Vec::new());
        return facets;
    }
    for subset in k_subsets(members.len(), dim - 1) {
        let rows: Vec<IntVec> = subset.iter().map(|&k| rays[members[k]].clone()).collect();
        let m = IntMatrix::from_rows(dim, &rows);
        let kernel = m.kernel_basis();
        if kernel.len() != 1 {
            continue; // subset does not span a hyperplane
        }
        let mut normal = kernel[0].clone();
        let mut pos = false;
        let mut neg = false;
        for &r in members {
            let v = normal.dot(&rays[r]);
            if v.is_positive() {
                pos = true;
            } else if v.is_negative() {
                neg = true;
            }
        }
        if pos && neg {
            continue; // interior hyperplane, not a facet
        }
        if neg {
            normal = normal.neg();
        }
        let facet: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&r| normal.dot(&rays[r]).is_zero())
            .collect();
        facets.insert(facet);
    }
    facets
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        out.push(Vec::new());
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

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// JSON interchange format shared by `Fan` and `GeneralFan`:
/// `{"dim": n, "rays": [[int,...],...], "max_cones": [[idx,...],...],
///   "labels": ["e1",...]}` with 0-based indices. Canonical output sorts each
/// cone ascending and the cone list lexicographically.
#[derive(Serialize, Deserialize)]
struct FanDocument {
    dim: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

type DocumentParts = (usize, Vec<IntVec>, Vec<RaySet>, Option<Vec<String>>);

fn document_parts(text: &str) -> Result<DocumentParts, Error> {
    let doc: FanDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let rays: Vec<IntVec> = doc.rays.iter().map(|r| IntVec::from_i64(r)).collect();
    let cones: Vec<RaySet> = doc.max_cones.iter().map(|c| c.iter().copied().collect()).collect();
    for (i, c) in doc.max_cones.iter().enumerate() {
        if c.len() != cones[i].len() {
            return Err(Error::Parse(format!("cone {i} repeats a ray index")));
        }
    }
    Ok((doc.dim, rays, cones, doc.labels))
}

pub fn parse_fan(text: &str) -> Result<Fan, Error> {
    let (dim, rays, cones, labels) = document_parts(text)?;
    Fan::new(dim, rays, cones, labels)
}

pub fn parse_general_fan(text: &str) -> Result<GeneralFan, Error> {
    let (dim, rays, mut max_cones, labels) = document_parts(text)?;
    max_cones.sort_by(|a, b| a.iter().collect::<Vec<_>>().cmp(&b.iter().collect::<Vec<_>>()));
    let fan = GeneralFan { dim, rays, max_cones, labels };
    let violations = fan.validate();
    if violations.is_empty() {
        Ok(fan)
    } else {
        Err(Error::InvalidFan(violations))
    }
}

fn document_of(
    dim: usize,
    rays: &[IntVec],
    max_cones: &[RaySet],
    labels: Option<&[String]>,
) -> FanDocument {
    let mut cones: Vec<Vec<usize>> =
        max_cones.iter().map(|c| c.iter().copied().collect()).collect();
    cones.sort();
    FanDocument {
        dim,
        rays: rays
            .iter()
            .map(|r| {
                r.0.iter()
                    .map(|e| i64::try_from(e.clone()).expect("ray coordinate fits in i64"))
                    .collect()
            })
            .collect(),
        max_cones: cones,
        labels: labels.map(|ls| ls.to_vec()),
    }
}

pub fn serialize_fan(f: &Fan) -> String {
    serde_json::to_string(&document_of(f.dim, &f.rays, &f.max_cones, f.labels()))
        .expect("document serializes")
}

pub fn fan_to_json(f: &Fan) -> serde_json::Value {
    serde_json::to_value(document_of(f.dim, &f.rays, &f.max_cones, f.labels()))
        .expect("document serializes")
}

pub fn serialize_general_fan(f: &GeneralFan) -> String {
    serde_json::to_string(&document_of(f.dim, &f.rays, &f.max_cones, f.labels.as_deref()))
        .expect("document serializes")
}

pub fn general_fan_to_json(f: &GeneralFan) -> serde_json::Value {
    serde_json::to_value(document_of(f.dim, &f.rays, &f.max_cones, f.labels.as_deref()))
        .expect("document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> Fan {
        Fan::new(
            2,
            vec![
                IntVec::from_i64(&[1, 0]),
                IntVec::from_i64(&[0, 1]),
                IntVec::from_i64(&[-1, -1]),
            ],
            vec![
                [0usize, 1].into_iter().collect(),
                [1usize, 2].into_iter().collect(),
                [0usize, 2].into_iter().collect(),
            ],
            Some(vec!["e1".into(), "e2".into(), "e0".into()]),
        )
        .unwrap()
    }

    fn p1xp1() -> Fan {
        Fan::new(
            2,
            vec![
                IntVec::from_i64(&[1, 0]),
                IntVec::from_i64(&[0, 1]),
                IntVec::from_i64(&[-1, 0]),
                IntVec::from_i64(&[0, -1]),
            ],
            vec![
                [0usize, 1].into_iter().collect(),
                [1usize, 2].into_iter().collect(),
                [2usize, 3].into_iter().collect(),
                [3usize, 0].into_iter().collect(),
            ],
            None,
        )
        .unwrap()
    }

    fn p3() -> Fan {
        let rays = vec![
            IntVec::from_i64(&[1, 0, 0]),
            IntVec::from_i64(&[0, 1, 0]),
            IntVec::from_i64(&[0, 0, 1]),
            IntVec::from_i64(&[-1, -1, -1]),
        ];
        let cones = vec![
            [0usize, 1, 2].into_iter().collect(),
            [0usize, 1, 3].into_iter().collect(),
            [0usize, 2, 3].into_iter().collect(),
            [1usize, 2, 3].into_iter().collect(),
        ];
        Fan::new(3, rays, cones, None).unwrap()
    }

    #[test]
    fn p2_is_valid() {
        p2();
    }

    #[test]
    fn missing_cone_breaks_wall_condition() {
        let err = Fan::new(
            2,
            vec![
                IntVec::from_i64(&[1, 0]),
                IntVec::from_i64(&[0, 1]),
                IntVec::from_i64(&[-1, -1]),
            ],
            vec![[1usize, 2].into_iter().collect(), [0usize, 2].into_iter().collect()],
            None,
        )
        .unwrap_err();
        let Error::InvalidFan(violations) = err else { panic!("expected InvalidFan") };
        assert!(violations.iter().any(|v| matches!(v, Violation::WallCoverage { count: 1, .. })));
    }

    #[test]
    fn p2_has_three_walls() {
        assert_eq!(p2().walls().len(), 3);
    }

    #[test]
    fn p1xp1_has_four_walls() {
        assert_eq!(p1xp1().walls().len(), 4);
    }

    #[test]
    fn locate_interior_point() {
        let f = p2();
        let p = IntVec::from_i64(&[1, 1]).to_rational();
        assert_eq!(f.locate_minimal_cone(&p), ConeRef::from_indices([0, 1]));
    }

    #[test]
    fn locate_boundary_point() {
        let f = p2();
        let p = IntVec::from_i64(&[1, 0]).to_rational();
        assert_eq!(f.locate_minimal_cone(&p), ConeRef::from_indices([0]));
    }

    #[test]
    fn locate_origin() {
        let f = p2();
        let p = RatVec::zero(2);
        assert_eq!(f.locate_minimal_cone(&p), ConeRef::default());
    }

    #[test]
    fn star_quotient_of_p3_ray_is_p2() {
        let f = p3();
        let q = star_quotient(&f, &ConeRef::from_indices([0])).unwrap();
        assert_eq!(q.fan.dim(), 2);
        assert_eq!(q.fan.ray_count(), 3);
        assert_eq!(q.fan.max_cones().len(), 3);
    }

    #[test]
    fn star_quotient_of_wall_is_p1() {
        let f = p3();
        for w in f.walls() {
            let q = star_quotient(&f, &w.cone).unwrap();
            assert_eq!(q.fan.dim(), 1);
            assert_eq!(q.fan.ray_count(), 2);
            assert_eq!(q.fan.rays()[0].add(&q.fan.rays()[1]), IntVec::zero(1));
        }
    }

    #[test]
    fn wall_count_formula() {
        for f in [p2(), p1xp1(), p3()] {
            assert_eq!(f.walls().len(), f.dim() * f.max_cones().len() / 2);
        }
    }

    #[test]
    fn serialization_round_trip_is_canonical() {
        let f = p2();
        let text = serialize_fan(&f);
        let g = parse_fan(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(text, serialize_fan(&g));
    }

    #[test]
    fn parse_rejects_non_primitive_ray() {
        let doc = r#"{"dim":2,"rays":[[2,2],[0,1],[-1,-1]],"max_cones":[[0,1],[1,2],[0,2]]}"#;
        let err = parse_fan(doc).unwrap_err();
        let Error::InvalidFan(violations) = err else { panic!("expected InvalidFan") };
        assert!(violations.iter().any(|v| matches!(v, Violation::RayNotPrimitive { ray: 0 })));
    }

    #[test]
    fn relabeling_equality() {
        let f = p2();
        let g = Fan::new(
            2,
            vec![
                IntVec::from_i64(&[0, 1]),
                IntVec::from_i64(&[-1, -1]),
                IntVec::from_i64(&[1, 0]),
            ],
            vec![
                [0usize, 2].into_iter().collect(),
                [0usize, 1].into_iter().collect(),
                [1usize, 2].into_iter().collect(),
            ],
            None,
        )
        .unwrap();
        assert!(equal_up_to_ray_relabeling(&f, &g));
        assert!(!equal_up_to_ray_relabeling(&f, &p1xp1()));
    }

    #[test]
    fn overlapping_cones_detected() {
        // <e2,e1+e2> sits inside <e1,e2>; the wall condition alone cannot see
        // it, the pairwise face check must.
        let violations = validate_parts(
            2,
            &[
                IntVec::from_i64(&[1, 0]),
                IntVec::from_i64(&[0, 1]),
                IntVec::from_i64(&[1, 1]),
                IntVec::from_i64(&[0, -1]),
            ],
            &[
                [0usize, 1].into_iter().collect(),
                [1usize, 2].into_iter().collect(),
                [0usize, 3].into_iter().collect(),
                [2usize, 3].into_iter().collect(),
            ],
            None,
            DEFAULT_POINT_SEED,
        );
        assert!(violations.iter().any(|v| matches!(v, Violation::OverlappingCones { .. })));
    }

    #[test]
    fn general_fan_validates_p2_shape() {
        let g = GeneralFan {
            dim: 2,
            rays: vec![
                IntVec::from_i64(&[1, 0]),
                IntVec::from_i64(&[0, 1]),
                IntVec::from_i64(&[-1, -1]),
            ],
            max_cones: vec![
                [0usize, 1].into_iter().collect(),
                [1usize, 2].into_iter().collect(),
                [0usize, 2].into_iter().collect(),
            ],
            labels: None,
        };
        assert!(g.validate().is_empty());
    }
}

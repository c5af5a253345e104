//! Exact rational LP feasibility.
//!
//! Phase-I simplex over `BigRational` with Bland's anti-cycling rule: the
//! entering column is the lowest-index column with negative reduced cost, the
//! leaving row breaks ratio ties by the lowest basic-variable index. Both
//! rules together guarantee termination, and the whole solve is deterministic:
//! identical input yields the identical witness.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::RatVec;

/// Constraint relation: `coeffs . x >= rhs` or `coeffs . x == rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Ge,
    Eq,
}

/// A single linear constraint on a free (sign-unrestricted) variable vector.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: RatVec,
    pub rel: Rel,
    pub rhs: BigRational,
}

impl Constraint {
    pub fn ge(coeffs: RatVec, rhs: BigRational) -> Self {
        Constraint { coeffs, rel: Rel::Ge, rhs }
    }

    pub fn eq(coeffs: RatVec, rhs: BigRational) -> Self {
        Constraint { coeffs, rel: Rel::Eq, rhs }
    }

    pub fn holds_for(&self, x: &RatVec) -> bool {
        let lhs = self.coeffs.dot(x);
        match self.rel {
            Rel::Ge => lhs >= self.rhs,
            Rel::Eq => lhs == self.rhs,
        }
    }
}

/// Exact feasible point for the system, if one exists.
///
/// Variables are free; internally each is split into a difference of two
/// nonnegative variables and the system is solved by phase-I simplex with
/// artificial variables.
pub fn lp_feasible(constraints: &[Constraint]) -> Option<RatVec> {
    let Some(first) = constraints.first() else {
        return Some(RatVec::zero(0));
    };
    let dim = first.coeffs.dim();
    assert!(
        constraints.iter().all(|c| c.coeffs.dim() == dim),
        "all constraint vectors must share one dimension"
    );

    let m = constraints.len();
    let num_slacks = constraints.iter().filter(|c| c.rel == Rel::Ge).count();
    // Columns: x+ (dim), x- (dim), slacks, artificials.
    let n_struct = 2 * dim + num_slacks;
    let n_total = n_struct + m;

    let zero = BigRational::zero();
    let one = BigRational::one();

    let mut tableau: Vec<Vec<BigRational>> = vec![vec![zero.clone(); n_total]; m];
    let mut rhs: Vec<BigRational> = Vec::with_capacity(m);
    let mut slack_idx = 0usize;
    for (i, c) in constraints.iter().enumerate() {
        let flip = c.rhs.is_negative();
        let sgn = if flip { -one.clone() } else { one.clone() };
        for j in 0..dim {
            let a = &c.coeffs.0[j] * &sgn;
            tableau[i][j] = a.clone();
            tableau[i][dim + j] = -a;
        }
        if c.rel == Rel::Ge {
            // a.x - s = b, possibly negated so the right side is nonnegative.
            tableau[i][2 * dim + slack_idx] = -&one * &sgn;
            slack_idx += 1;
        }
        tableau[i][n_struct + i] = one.clone();
        rhs.push(&c.rhs * &sgn);
    }

    // Basis starts as the artificials; reduced costs for minimizing their sum.
    let mut basis: Vec<usize> = (n_struct..n_total).collect();
    let mut reduced: Vec<BigRational> = (0..n_total)
        .map(|j| {
            let cost = if j >= n_struct { one.clone() } else { zero.clone() };
            let colsum: BigRational = (0..m).map(|i| tableau[i][j].clone()).sum();
            cost - colsum
        })
        .collect();
    let mut objective: BigRational = -rhs.iter().cloned().sum::<BigRational>();

    loop {
        let Some(entering) = (0..n_total).find(|&j| reduced[j].is_negative()) else {
            break;
        };
        let mut leaving: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if tableau[i][entering].is_positive() {
                let ratio = &rhs[i] / &tableau[i][entering];
                let better = match &leaving {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && basis[i] < basis[*li])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        let Some((pivot_row, _)) = leaving else {
            // Phase-I objective is bounded below by zero, so an unbounded
            // direction cannot occur on well-formed input.
            unreachable!("phase-I simplex cannot be unbounded");
        };

        let pivot = tableau[pivot_row][entering].clone();
        for j in 0..n_total {
            tableau[pivot_row][j] = &tableau[pivot_row][j] / &pivot;
        }
        rhs[pivot_row] = &rhs[pivot_row] / &pivot;
        for i in 0..m {
            if i != pivot_row && !tableau[i][entering].is_zero() {
                let factor = tableau[i][entering].clone();
                for j in 0..n_total {
                    let v = &tableau[i][j] - &factor * &tableau[pivot_row][j];
                    tableau[i][j] = v;
                }
                rhs[i] = &rhs[i] - &factor * &rhs[pivot_row];
            }
        }
        if !reduced[entering].is_zero() {
            let factor = reduced[entering].clone();
            for j in 0..n_total {
                let v = &reduced[j] - &factor * &tableau[pivot_row][j];
                reduced[j] = v;
            }
            objective = &objective - &factor * &rhs[pivot_row];
        }
        basis[pivot_row] = entering;
    }

    // Feasible iff the artificials can all be driven to zero.
    if !objective.is_zero() {
        return None;
    }

    let mut values = vec![zero.clone(); n_total];
    for i in 0..m {
        values[basis[i]] = rhs[i].clone();
    }
    // Artificials still basic at the optimum are at level zero (degenerate).
    debug_assert!((n_struct..n_total).all(|j| values[j].is_zero()));
    let witness = RatVec(
        (0..dim)
            .map(|j| &values[j] - &values[dim + j])
            .collect(),
    );
    debug_assert!(constraints.iter().all(|c| c.holds_for(&witness)));
    Some(witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn rv(entries: &[i64]) -> RatVec {
        RatVec(entries.iter().map(|&e| rat(e)).collect())
    }

    #[test]
    fn contradictory_system_is_infeasible() {
        let cs = vec![
            Constraint::ge(rv(&[1]), rat(1)),
            Constraint::ge(rv(&[-1]), rat(0)),
        ];
        assert!(lp_feasible(&cs).is_none());
    }

    #[test]
    fn single_bound_is_feasible() {
        let cs = vec![Constraint::ge(rv(&[1]), rat(1))];
        let x = lp_feasible(&cs).unwrap();
        assert!(x.0[0] >= rat(1));
    }

    #[test]
    fn equality_and_inequality_mix() {
        // x + y = 3, x >= 2, y >= 0
        let cs = vec![
            Constraint::eq(rv(&[1, 1]), rat(3)),
            Constraint::ge(rv(&[1, 0]), rat(2)),
            Constraint::ge(rv(&[0, 1]), rat(0)),
        ];
        let x = lp_feasible(&cs).unwrap();
        for c in &cs {
            assert!(c.holds_for(&x));
        }
    }

    #[test]
    fn negative_rhs_handled() {
        // x <= -1 rewritten as -x >= 1; also x >= -5.
        let cs = vec![
            Constraint::ge(rv(&[-1]), rat(1)),
            Constraint::ge(rv(&[1]), rat(-5)),
        ];
        let x = lp_feasible(&cs).unwrap();
        for c in &cs {
            assert!(c.holds_for(&x));
        }
    }

    fn constraint_strategy(dim: usize) -> impl Strategy<Value = Constraint> {
        (
            proptest::collection::vec(-5i64..=5, dim),
            prop_oneof![Just(Rel::Ge), Just(Rel::Eq)],
            -5i64..=5,
        )
            .prop_map(|(coeffs, rel, rhs)| Constraint {
                coeffs: rv(&coeffs),
                rel,
                rhs: rat(rhs),
            })
    }

    proptest! {
        #[test]
        fn witnesses_satisfy_all_constraints_exactly(
            cs in proptest::collection::vec(constraint_strategy(3), 1..6)
        ) {
            if let Some(x) = lp_feasible(&cs) {
                for c in &cs {
                    prop_assert!(c.holds_for(&x));
                }
                // Determinism: same input, same witness.
                prop_assert_eq!(Some(x), lp_feasible(&cs));
            }
        }
    }
}

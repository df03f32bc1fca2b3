//! Exact solver for small packing integer programs:
//! maximize `c·x` subject to `A x ≤ b`, `x ≥ 0` integer, with `A ≥ 0` and
//! `b ≥ 0`.
//!
//! The relaxation is solved by a fraction-free simplex (integer pivoting,
//! Bland's rule) so every bound is exact. Because `A` is nonnegative the
//! origin is feasible at every branch-and-bound node once lower bounds are
//! shifted out, and a node whose shifted right-hand side turns negative is
//! infeasible. Arithmetic runs in `i128` and restarts in `BigInt` if a pivot
//! would overflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

/// Integer arithmetic the tableau needs. `None` signals overflow.
trait Exact: Clone + Ord + std::fmt::Debug {
    fn from_i64(v: i64) -> Self;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn div_exact(&self, o: &Self) -> Self;
    fn div_floor(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn to_i64(&self) -> Option<i64>;
}

impl Exact for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn div_floor(&self, o: &Self) -> Self {
        Integer::div_floor(self, o)
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_positive(&self) -> bool {
        *self > 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn to_i64(&self) -> Option<i64> {
        i64::try_from(*self).ok()
    }
}

impl Exact for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn div_floor(&self, o: &Self) -> Self {
        Integer::div_floor(self, o)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn to_i64(&self) -> Option<i64> {
        ToPrimitive::to_i64(self)
    }
}

/// `maximize c·x` s.t. `A x ≤ b`, `x ≥ 0` integer.
#[derive(Clone, Debug)]
pub struct PackingProblem {
    pub a: Vec<Vec<i64>>,
    pub b: Vec<i64>,
    pub c: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IlpSolution {
    pub x: Vec<i64>,
    pub value: i64,
    /// Floor of the root relaxation.
    pub root_bound: i64,
    /// False when the node limit stopped the search before optimality was
    /// proven.
    pub optimal: bool,
    pub nodes: usize,
}

/// Relaxation optimum as `x_j = num_j / den` with value `z_num / den`.
struct LpPoint<T> {
    num: Vec<T>,
    den: T,
    z_num: T,
}

/// Fraction-free simplex from the slack basis. Rows of `a` are constraints;
/// `b ≥ 0` is required.
#[allow(clippy::needless_range_loop)]
fn simplex<T: Exact>(a: &[Vec<i64>], b: &[i64], c: &[i64]) -> Option<LpPoint<T>> {
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    let rhs = n + m;
    let mut t: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = vec![T::from_i64(0); width];
        for j in 0..n {
            row[j] = T::from_i64(a[i][j]);
        }
        row[n + i] = T::from_i64(1);
        row[rhs] = T::from_i64(b[i]);
        t.push(row);
    }
    let mut z = vec![T::from_i64(0); width];
    for j in 0..n {
        z[j] = T::from_i64(-c[j]);
    }
    t.push(z);
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut den = T::from_i64(1);
    // Bland: lowest-index improving column.
    while let Some(s) = (0..n + m).find(|&j| t[m][j].is_negative()) {
        let mut r: Option<usize> = None;
        for i in 0..m {
            if !t[i][s].is_positive() {
                continue;
            }
            r = match r {
                None => Some(i),
                Some(k) => {
                    // Compare t[i][rhs]/t[i][s] with t[k][rhs]/t[k][s].
                    let lhs = t[i][rhs].mul(&t[k][s])?;
                    let rhs_v = t[k][rhs].mul(&t[i][s])?;
                    if lhs < rhs_v || (lhs == rhs_v && basis[i] < basis[k]) {
                        Some(i)
                    } else {
                        Some(k)
                    }
                }
            };
        }
        // `check` guarantees a blocking row for every rewarded column.
        let r = r?;
        let p = t[r][s].clone();
        for i in 0..=m {
            if i == r || t[i][s].is_zero() {
                if i != r {
                    for j in 0..width {
                        t[i][j] = t[i][j].mul(&p)?.div_exact(&den);
                    }
                }
                continue;
            }
            let f = t[i][s].clone();
            for j in 0..width {
                let v = t[i][j].mul(&p)?.sub(&f.mul(&t[r][j])?)?;
                t[i][j] = v.div_exact(&den);
            }
        }
        den = p;
        basis[r] = s;
    }
    let mut num = vec![T::from_i64(0); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            num[bv] = t[i][rhs].clone();
        }
    }
    Some(LpPoint {
        num,
        den,
        z_num: t[m][rhs].clone(),
    })
}

/// The relaxation rounded down, with the first fractional coordinate.
struct Relaxed {
    floor_x: Vec<i64>,
    fractional: Option<usize>,
    floor_z: i64,
    branch_floor: i64,
}

fn relax_exact<T: Exact>(a: &[Vec<i64>], b: &[i64], c: &[i64]) -> Option<Relaxed> {
    let pt = simplex::<T>(a, b, c)?;
    let floor_x: Vec<i64> = pt
        .num
        .iter()
        .map(|v| v.div_floor(&pt.den).to_i64())
        .collect::<Option<_>>()?;
    let fractional = pt.num.iter().position(|v| {
        let q = v.div_floor(&pt.den);
        !q.mul(&pt.den).map(|w| w == *v).unwrap_or(false)
    });
    let floor_z = pt.z_num.div_floor(&pt.den).to_i64()?;
    let branch_floor = fractional.map(|j| floor_x[j]).unwrap_or(0);
    Some(Relaxed {
        floor_x,
        fractional,
        floor_z,
        branch_floor,
    })
}

fn relax(a: &[Vec<i64>], b: &[i64], c: &[i64]) -> Relaxed {
    relax_exact::<i128>(a, b, c)
        .or_else(|| relax_exact::<BigInt>(a, b, c))
        .expect("packing relaxation is bounded and BigInt does not overflow")
}

impl PackingProblem {
    fn check(&self) {
        assert_eq!(self.a.len(), self.b.len(), "one bound per constraint");
        assert!(self.a.iter().all(|r| r.len() == self.c.len()));
        assert!(
            self.a.iter().flatten().all(|&v| v >= 0),
            "A must be nonnegative"
        );
        assert!(self.b.iter().all(|&v| v >= 0), "b must be nonnegative");
        assert!(self.c.iter().all(|&v| v >= 0), "c must be nonnegative");
        assert!(
            (0..self.c.len()).all(|j| self.c[j] == 0 || self.a.iter().any(|r| r[j] > 0)),
            "every rewarded variable must be bounded by some constraint"
        );
    }

    pub fn is_feasible(&self, x: &[i64]) -> bool {
        x.len() == self.c.len()
            && x.iter().all(|&v| v >= 0)
            && self
                .a
                .iter()
                .zip(&self.b)
                .all(|(row, &bi)| row.iter().zip(x).map(|(a, x)| a * x).sum::<i64>() <= bi)
    }

    pub fn value(&self, x: &[i64]) -> i64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Raises variables in index order while the constraints allow it.
    fn greedy_fill(&self, x: &mut [i64], hi: &[Option<i64>]) {
        let mut slack: Vec<i64> = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(row, &bi)| bi - row.iter().zip(x.iter()).map(|(a, x)| a * x).sum::<i64>())
            .collect();
        for j in 0..x.len() {
            if self.c[j] == 0 {
                continue;
            }
            let mut room = hi[j].map_or(i64::MAX, |h| h - x[j]);
            for (i, row) in self.a.iter().enumerate() {
                if row[j] > 0 {
                    room = room.min(slack[i] / row[j]);
                }
            }
            if room > 0 {
                x[j] += room;
                for (i, row) in self.a.iter().enumerate() {
                    slack[i] -= row[j] * room;
                }
            }
        }
    }

    /// Branch and bound. Stops early once the incumbent meets the root bound
    /// or after `node_limit` nodes.
    pub fn solve(&self, node_limit: usize) -> IlpSolution {
        self.check();
        let n = self.c.len();
        let mut best_x = vec![0i64; n];
        let mut best = 0i64;
        let mut nodes = 0usize;
        let mut root_bound = None;
        let mut stack: Vec<(Vec<i64>, Vec<Option<i64>>)> = vec![(vec![0; n], vec![None; n])];
        let mut exhausted = true;
        while let Some((lo, hi)) = stack.pop() {
            if nodes >= node_limit {
                exhausted = false;
                break;
            }
            nodes += 1;
            // Shift x = lo + y.
            let mut b: Vec<i64> = self
                .a
                .iter()
                .zip(&self.b)
                .map(|(row, &bi)| bi - row.iter().zip(&lo).map(|(a, l)| a * l).sum::<i64>())
                .collect();
            if b.iter().any(|&v| v < 0)
                || hi.iter().zip(&lo).any(|(h, l)| h.is_some_and(|h| h < *l))
            {
                continue;
            }
            let mut a = self.a.clone();
            for j in 0..n {
                if let Some(h) = hi[j] {
                    let mut row = vec![0; n];
                    row[j] = 1;
                    a.push(row);
                    b.push(h - lo[j]);
                }
            }
            let offset = self.value(&lo);
            let r = relax(&a, &b, &self.c);
            let bound = offset + r.floor_z;
            if root_bound.is_none() {
                root_bound = Some(bound);
            }
            if bound <= best && nodes > 1 {
                continue;
            }
            let mut x: Vec<i64> = lo.iter().zip(&r.floor_x).map(|(l, y)| l + y).collect();
            self.greedy_fill(&mut x, &hi);
            let v = self.value(&x);
            if v > best || nodes == 1 {
                best = v;
                best_x = x;
            }
            if best >= root_bound.unwrap_or(i64::MAX) {
                stack.clear();
                break;
            }
            if best >= bound {
                continue;
            }
            if let Some(j) = r.fractional {
                let f = lo[j] + r.branch_floor;
                let mut up_lo = lo.clone();
                up_lo[j] = f + 1;
                let mut down_hi = hi.clone();
                down_hi[j] = Some(f);
                stack.push((up_lo, hi.clone()));
                stack.push((lo, down_hi));
            }
        }
        let root_bound = root_bound.unwrap_or(0);
        IlpSolution {
            value: best,
            x: best_x,
            root_bound,
            optimal: exhausted || best >= root_bound,
            nodes,
        }
    }
}

/// Convenience for callers that only need the relaxation bound.
pub fn relaxation_bound(problem: &PackingProblem) -> i64 {
    problem.check();
    relax(&problem.a, &problem.b, &problem.c).floor_z
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(p: &PackingProblem, cap: i64) -> i64 {
        let n = p.c.len();
        let mut x = vec![0i64; n];
        let mut best = 0;
        loop {
            if p.is_feasible(&x) {
                best = best.max(p.value(&x));
            }
            let mut j = 0;
            loop {
                if j == n {
                    return best;
                }
                x[j] += 1;
                if x[j] <= cap {
                    break;
                }
                x[j] = 0;
                j += 1;
            }
        }
    }

    #[test]
    fn fractional_relaxation_needs_branching() {
        // Odd cycle: x0+x1 ≤ 1, x1+x2 ≤ 1, x0+x2 ≤ 1. Relaxation 3/2, integer 1.
        let p = PackingProblem {
            a: vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]],
            b: vec![1, 1, 1],
            c: vec![1, 1, 1],
        };
        assert_eq!(relaxation_bound(&p), 1);
        let s = p.solve(1000);
        assert_eq!(s.value, 1);
        assert!(s.optimal);

        let p = PackingProblem {
            a: vec![vec![2, 2, 0], vec![0, 2, 2], vec![2, 0, 2]],
            b: vec![3, 3, 3],
            c: vec![1, 1, 1],
        };
        assert_eq!(relaxation_bound(&p), 2);
        let s = p.solve(1000);
        assert_eq!(s.value, 1);
        assert!(s.optimal && p.is_feasible(&s.x));
    }

    #[test]
    fn large_right_hand_sides() {
        let p = PackingProblem {
            a: vec![vec![1, 1], vec![1, 0]],
            b: vec![1_000_000_000, 400_000_000],
            c: vec![3, 1],
        };
        let s = p.solve(100);
        assert_eq!(s.value, 3 * 400_000_000 + 600_000_000);
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            a in prop::collection::vec(prop::collection::vec(0i64..3, 3), 1..4),
            b in prop::collection::vec(0i64..5, 4),
            c in prop::collection::vec(0i64..4, 3),
        ) {
            let m = a.len();
            let mut a = a;
            // Keep every variable bounded.
            a.push(vec![1, 1, 1]);
            let mut b = b[..m].to_vec();
            b.push(4);
            let p = PackingProblem { a, b, c };
            let s = p.solve(10_000);
            prop_assert!(s.optimal);
            prop_assert!(p.is_feasible(&s.x));
            prop_assert_eq!(s.value, brute_force(&p, 4));
        }
    }
}

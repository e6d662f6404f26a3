//! A small exact simplex solver over ℚ.
//!
//! This backs vertex irredundancy tests and affine-piece pruning. Problem
//! sizes here are tiny (tens of variables), so a dense tableau with Bland's
//! rule is plenty and gives guaranteed termination with exact pivots.

use crate::rat::Rat;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: Rat, x: Vec<Rat> },
}

/// Minimizes `c·x` subject to `A x = b`, `x ≥ 0`.
pub fn solve_standard(a: &[Vec<Rat>], b: &[Rat], c: &[Rat]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert_eq!(b.len(), m);

    // Normalize to b >= 0.
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rat> = Vec::with_capacity(m);
    for i in 0..m {
        if b[i].is_negative() {
            rows.push(a[i].iter().map(|x| -x).collect());
            rhs.push(-b[i].clone());
        } else {
            rows.push(a[i].clone());
            rhs.push(b[i].clone());
        }
    }

    // Phase 1 tableau: columns = n original + m artificial.
    let total = n + m;
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![Rat::zero(); total + 1];
        row[..n].clone_from_slice(&rows[i]);
        row[n + i] = Rat::one();
        row[total] = rhs[i].clone();
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase-1 cost: sum of artificials, expressed in nonbasic terms.
    let mut cost = vec![Rat::zero(); total + 1];
    for i in 0..m {
        for j in 0..total + 1 {
            let v = &t[i][j];
            if !v.is_zero() {
                cost[j] -= v;
            }
        }
    }
    for j in n..total {
        cost[j] += Rat::one();
    }
    simplex_loop(&mut t, &mut cost, &mut basis, total);
    // cost[total] holds -(phase-1 objective)
    if !cost[total].is_zero() {
        return LpOutcome::Infeasible;
    }

    // Drive remaining artificial variables out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut cost, &mut basis, i, j, total);
            }
            // Otherwise the row is redundant (all-zero on originals); harmless.
        }
    }

    // Phase 2 cost row.
    let mut cost2 = vec![Rat::zero(); total + 1];
    cost2[..n].clone_from_slice(c);
    // Make reduced costs of basic variables zero.
    for i in 0..m {
        let bj = basis[i];
        if bj < n && !cost2[bj].is_zero() {
            let factor = cost2[bj].clone();
            for j in 0..total + 1 {
                let v = factor.clone() * &t[i][j];
                cost2[j] -= v;
            }
        }
    }
    // Forbid artificials from re-entering: treat their columns as absent.
    for c in cost2.iter_mut().take(total).skip(n) {
        *c = Rat::one();
    }

    if !simplex_loop_restricted(&mut t, &mut cost2, &mut basis, total, n) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![Rat::zero(); n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][total].clone();
        }
    }
    LpOutcome::Optimal {
        value: -cost2[total].clone(),
        x,
    }
}

fn simplex_loop(t: &mut [Vec<Rat>], cost: &mut [Rat], basis: &mut [usize], total: usize) {
    loop {
        let enter = (0..total).find(|&j| cost[j].is_negative());
        let Some(j) = enter else { return };
        let Some(r) = ratio_test(t, basis, j, total) else {
            // Phase 1 is bounded below by 0; unboundedness cannot occur here.
            return;
        };
        pivot_full(t, cost, basis, r, j, total);
    }
}

/// Phase-2 loop; entering columns restricted to the first `n` (no artificials).
/// Returns false on unboundedness.
fn simplex_loop_restricted(
    t: &mut [Vec<Rat>],
    cost: &mut [Rat],
    basis: &mut [usize],
    total: usize,
    n: usize,
) -> bool {
    loop {
        let enter = (0..n).find(|&j| cost[j].is_negative());
        let Some(j) = enter else { return true };
        let Some(r) = ratio_test(t, basis, j, total) else {
            return false;
        };
        pivot_full(t, cost, basis, r, j, total);
    }
}

/// Bland ratio test: min b_r / t[r][j] over positive pivots, ties by smallest
/// basis index.
fn ratio_test(t: &[Vec<Rat>], basis: &[usize], j: usize, total: usize) -> Option<usize> {
    let mut best: Option<(Rat, usize, usize)> = None; // (ratio, basis var, row)
    for (r, row) in t.iter().enumerate() {
        if row[j].is_positive() {
            let ratio = row[total].clone() / &row[j];
            match &best {
                None => best = Some((ratio, basis[r], r)),
                Some((br, bv, _)) => {
                    if ratio < *br || (ratio == *br && basis[r] < *bv) {
                        best = Some((ratio, basis[r], r));
                    }
                }
            }
        }
    }
    best.map(|(_, _, r)| r)
}

fn pivot_full(
    t: &mut [Vec<Rat>],
    cost: &mut [Rat],
    basis: &mut [usize],
    r: usize,
    j: usize,
    total: usize,
) {
    let piv = t[r][j].clone();
    for v in t[r].iter_mut() {
        *v /= &piv;
    }
    for i in 0..t.len() {
        if i != r && !t[i][j].is_zero() {
            let f = t[i][j].clone();
            for k in 0..total + 1 {
                let v = f.clone() * &t[r][k];
                t[i][k] -= v;
            }
        }
    }
    if !cost[j].is_zero() {
        let f = cost[j].clone();
        for k in 0..total + 1 {
            let v = f.clone() * &t[r][k];
            cost[k] -= v;
        }
    }
    basis[r] = j;
}

fn pivot(
    t: &mut [Vec<Rat>],
    cost: &mut [Rat],
    basis: &mut [usize],
    r: usize,
    j: usize,
    total: usize,
) {
    pivot_full(t, cost, basis, r, j, total);
}

/// Is `p` a convex combination of `points`?
pub fn point_in_hull(p: &[Rat], points: &[Vec<Rat>]) -> bool {
    if points.is_empty() {
        return false;
    }
    let d = p.len();
    let k = points.len();
    // Σ λ_i v_i = p, Σ λ_i = 1, λ ≥ 0 — feasibility only.
    let mut a = Vec::with_capacity(d + 1);
    let mut b = Vec::with_capacity(d + 1);
    for coord in 0..d {
        a.push(points.iter().map(|v| v[coord].clone()).collect());
        b.push(p[coord].clone());
    }
    a.push(vec![Rat::one(); k]);
    b.push(Rat::one());
    let c = vec![Rat::zero(); k];
    !matches!(solve_standard(&a, &b, &c), LpOutcome::Infeasible)
}

/// Maximizes `obj·y` over free `y` subject to `cons[k]·y ≤ rhs[k]`.
pub fn maximize_free(obj: &[Rat], cons: &[Vec<Rat>], rhs: &[Rat]) -> LpOutcome {
    let d = obj.len();
    let m = cons.len();
    // y = y+ − y−, slack s: cons·y+ − cons·y− + s = rhs.
    let n = 2 * d + m;
    let mut a = Vec::with_capacity(m);
    for (row, _) in cons.iter().zip(rhs) {
        debug_assert_eq!(row.len(), d);
        let mut r = vec![Rat::zero(); n];
        for j in 0..d {
            r[j] = row[j].clone();
            r[d + j] = -row[j].clone();
        }
        r[2 * d + a.len()] = Rat::one();
        a.push(r);
    }
    let mut c = vec![Rat::zero(); n];
    for j in 0..d {
        c[j] = -obj[j].clone();
        c[d + j] = obj[j].clone();
    }
    match solve_standard(&a, rhs, &c) {
        LpOutcome::Optimal { value, x } => {
            let y: Vec<Rat> = (0..d).map(|j| x[j].clone() - &x[d + j]).collect();
            LpOutcome::Optimal { value: -value, x: y }
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i};

    #[test]
    fn hull_membership() {
        let tri = vec![
            vec![rat_i(0), rat_i(0)],
            vec![rat_i(1), rat_i(0)],
            vec![rat_i(0), rat_i(1)],
        ];
        assert!(point_in_hull(&[rat(1, 4), rat(1, 4)], &tri));
        assert!(point_in_hull(&[rat_i(1), rat_i(0)], &tri));
        assert!(!point_in_hull(&[rat(3, 4), rat(3, 4)], &tri));
    }

    #[test]
    fn simple_max() {
        // max x + y, x ≤ 2, y ≤ 3, x + y ≤ 4 → 4
        let obj = vec![rat_i(1), rat_i(1)];
        let cons = vec![
            vec![rat_i(1), rat_i(0)],
            vec![rat_i(0), rat_i(1)],
            vec![rat_i(1), rat_i(1)],
        ];
        let rhs = vec![rat_i(2), rat_i(3), rat_i(4)];
        match maximize_free(&obj, &cons, &rhs) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat_i(4)),
            o => panic!("unexpected {o:?}"),
        }
    }

    #[test]
    fn unbounded_detected() {
        // max x with no constraints binding from above
        let obj = vec![rat_i(1)];
        let cons = vec![vec![rat_i(-1)]];
        let rhs = vec![rat_i(0)];
        assert_eq!(maximize_free(&obj, &cons, &rhs), LpOutcome::Unbounded);
    }

    #[test]
    fn infeasible_detected() {
        // x ≤ 0 and -x ≤ -1 → x ≥ 1: infeasible
        let obj = vec![rat_i(0)];
        let cons = vec![vec![rat_i(1)], vec![rat_i(-1)]];
        let rhs = vec![rat_i(0), rat_i(-1)];
        assert_eq!(maximize_free(&obj, &cons, &rhs), LpOutcome::Infeasible);
    }

    #[test]
    fn degenerate_equalities() {
        // min x s.t. x = 1 (duplicated row)
        let a = vec![vec![rat_i(1)], vec![rat_i(1)]];
        let b = vec![rat_i(1), rat_i(1)];
        let c = vec![rat_i(1)];
        match solve_standard(&a, &b, &c) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat_i(1)),
            o => panic!("unexpected {o:?}"),
        }
    }
}

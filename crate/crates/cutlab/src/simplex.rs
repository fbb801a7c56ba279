//! Exact primal simplex over the slack-extended system `[A | I]`.
//!
//! Maximizes `c'x` subject to `A x <= b`, `x >= 0` in rational arithmetic.
//! Extra cut rows are appended below the instance rows in call order, so the
//! slack-extended system has one slack column per row in row order. Pivoting
//! follows Bland's least-index rule throughout: the entering column is the
//! smallest index with positive reduced cost, and ratio-test ties are broken
//! toward the leaving variable with the smallest column index. Rows whose
//! right-hand side is negative are driven feasible by a textbook phase-one
//! with artificial variables (row signs flipped so artificials start basic at
//! nonnegative values). Row flips do not disturb the reported basis inverse:
//! the final tableau equals `B^{-1}[A | I]` for the original row signs.

use crate::instance::{Cut, IlpInstance};
use crate::rational::{dot, Rational};

/// Outcome of an LP relaxation solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpSolution {
    Optimal(LpOptimum),
    Infeasible,
    Unbounded,
}

impl LpSolution {
    /// Unwraps the optimum; panics if the LP was infeasible or unbounded.
    pub fn expect_optimal(&self, context: &str) -> &LpOptimum {
        match self {
            LpSolution::Optimal(opt) => opt,
            other => panic!("{context}: expected optimal LP, got {other:?}"),
        }
    }
}

/// Optimal vertex with its certificate: the basis (column indices into
/// `[A | I]`, listed row by row) and the exact basis inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpOptimum {
    pub x: Vec<Rational>,
    pub objective: Rational,
    pub basis: Vec<usize>,
    pub basis_inverse: Vec<Vec<Rational>>,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    rc: Vec<Rational>,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn compute_reduced_costs(&mut self, cost: &[Rational]) {
        let mut rc = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (r, v) in rc.iter_mut().zip(row) {
                if !v.is_zero() {
                    *r -= cb * v;
                }
            }
        }
        self.rc = rc;
    }

    fn pivot(&mut self, prow: usize, pcol: usize) {
        let pivot_val = self.rows[prow][pcol].clone();
        debug_assert!(!pivot_val.is_zero());
        if pivot_val != Rational::one() {
            for v in self.rows[prow].iter_mut() {
                if !v.is_zero() {
                    *v /= &pivot_val;
                }
            }
            self.rhs[prow] /= &pivot_val;
        }
        let nz: Vec<usize> = self.rows[prow]
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, _)| j)
            .collect();
        let prow_vals = self.rows[prow].clone();
        let prow_rhs = self.rhs[prow].clone();
        for r in 0..self.rows.len() {
            if r == prow {
                continue;
            }
            let f = self.rows[r][pcol].clone();
            if f.is_zero() {
                continue;
            }
            let row = &mut self.rows[r];
            for &j in &nz {
                row[j] -= &f * &prow_vals[j];
            }
            self.rhs[r] -= &f * &prow_rhs;
        }
        let f = self.rc[pcol].clone();
        if !f.is_zero() {
            for &j in &nz {
                self.rc[j] -= &f * &prow_vals[j];
            }
        }
        self.basis[prow] = pcol;
    }

    /// Runs Bland pivots until optimality or an unbounded column appears.
    fn bland(&mut self) -> PhaseEnd {
        loop {
            let Some(enter) = self.rc.iter().position(|r| r.is_positive()) else {
                return PhaseEnd::Optimal;
            };
            let mut best: Option<(Rational, usize, usize)> = None;
            for r in 0..self.rows.len() {
                let d = &self.rows[r][enter];
                if !d.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / d;
                let replace = match &best {
                    None => true,
                    Some((br, bcol, _)) => {
                        ratio < *br || (ratio == *br && self.basis[r] < *bcol)
                    }
                };
                if replace {
                    best = Some((ratio, self.basis[r], r));
                }
            }
            match best {
                None => return PhaseEnd::Unbounded,
                Some((_, _, r)) => self.pivot(r, enter),
            }
        }
    }
}

fn row_data<'a>(
    inst: &'a IlpInstance,
    extra_cuts: &'a [Cut],
    i: usize,
) -> (&'a [Rational], &'a Rational) {
    if i < inst.num_cons {
        (&inst.a[i], &inst.b[i])
    } else {
        let cut = &extra_cuts[i - inst.num_cons];
        (&cut.coeffs, &cut.rhs)
    }
}

/// Solves the LP relaxation of `inst` with `extra_cuts` appended as rows.
/// Panics if a cut's coefficient vector does not have length `n`.
pub fn solve_lp(inst: &IlpInstance, extra_cuts: &[Cut]) -> LpSolution {
    let n = inst.num_vars;
    for cut in extra_cuts {
        assert_eq!(cut.coeffs.len(), n, "cut arity must match instance variables");
    }
    let m = inst.num_cons + extra_cuts.len();
    let ncols_main = n + m;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut art_rows = Vec::new();
    for i in 0..m {
        let (coeffs, bi) = row_data(inst, extra_cuts, i);
        let flip = bi.is_negative();
        let mut row = vec![Rational::zero(); ncols_main];
        for (j, v) in coeffs.iter().enumerate() {
            if !v.is_zero() {
                row[j] = if flip { -v } else { v.clone() };
            }
        }
        row[n + i] = if flip { Rational::from_int(-1) } else { Rational::one() };
        rows.push(row);
        rhs.push(if flip { -bi } else { bi.clone() });
        if flip {
            art_rows.push(i);
        }
    }

    let mut t = Tableau {
        rows,
        rhs,
        basis: (n..n + m).collect(),
        rc: Vec::new(),
    };

    if !art_rows.is_empty() {
        let n_art = art_rows.len();
        for row in &mut t.rows {
            row.extend(std::iter::repeat_with(Rational::zero).take(n_art));
        }
        let mut cost = vec![Rational::zero(); ncols_main + n_art];
        for (k, &r) in art_rows.iter().enumerate() {
            t.rows[r][ncols_main + k] = Rational::one();
            t.basis[r] = ncols_main + k;
            cost[ncols_main + k] = Rational::from_int(-1);
        }
        t.compute_reduced_costs(&cost);
        match t.bland() {
            PhaseEnd::Optimal => {}
            // Phase-one objective is bounded above by zero.
            PhaseEnd::Unbounded => unreachable!("phase one cannot be unbounded"),
        }
        let infeasibility: Rational = t
            .basis
            .iter()
            .zip(&t.rhs)
            .filter(|(b, _)| **b >= ncols_main)
            .map(|(_, v)| v)
            .sum();
        if !infeasibility.is_zero() {
            return LpSolution::Infeasible;
        }
        for r in 0..m {
            if t.basis[r] >= ncols_main {
                let pcol = (0..ncols_main)
                    .find(|&j| !t.rows[r][j].is_zero())
                    .expect("slack-extended system has full row rank");
                t.pivot(r, pcol);
            }
        }
        for row in &mut t.rows {
            row.truncate(ncols_main);
        }
    }

    let mut cost = vec![Rational::zero(); ncols_main];
    cost[..n].clone_from_slice(&inst.c);
    t.compute_reduced_costs(&cost);
    if let PhaseEnd::Unbounded = t.bland() {
        return LpSolution::Unbounded;
    }

    let mut x = vec![Rational::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs[r].clone();
        }
    }
    let objective = dot(&inst.c, &x);
    let basis_inverse = t
        .rows
        .iter()
        .map(|row| row[n..n + m].to_vec())
        .collect();
    LpSolution::Optimal(LpOptimum {
        x,
        objective,
        basis: t.basis,
        basis_inverse,
    })
}

/// Checks an optimality certificate exactly: primal feasibility, the
/// basis-inverse identity `B B^{-1} = I`, agreement of `x` and the objective
/// with the claimed basis, and nonpositive reduced costs on every column of
/// the slack-extended system. Returns false on any violation.
pub fn verify_lp_certificate(inst: &IlpInstance, extra_cuts: &[Cut], opt: &LpOptimum) -> bool {
    let n = inst.num_vars;
    let m = inst.num_cons + extra_cuts.len();
    if opt.x.len() != n || opt.basis.len() != m || opt.basis_inverse.len() != m {
        return false;
    }
    if opt.basis_inverse.iter().any(|row| row.len() != m) {
        return false;
    }
    let mut seen = vec![false; n + m];
    for &b in &opt.basis {
        if b >= n + m || seen[b] {
            return false;
        }
        seen[b] = true;
    }

    // Column `col` of [A | I] at row r.
    let ext_entry = |r: usize, col: usize| -> Rational {
        if col < n {
            row_data(inst, extra_cuts, r).0[col].clone()
        } else if col - n == r {
            Rational::one()
        } else {
            Rational::zero()
        }
    };

    // B B^{-1} = I.
    for r in 0..m {
        for c in 0..m {
            let mut acc = Rational::zero();
            for (t, &bcol) in opt.basis.iter().enumerate() {
                acc += ext_entry(r, bcol) * &opt.basis_inverse[t][c];
            }
            let expected = if r == c { Rational::one() } else { Rational::zero() };
            if acc != expected {
                return false;
            }
        }
    }

    // Basic solution induced by the claimed basis matches x (and is >= 0).
    let b_full: Vec<Rational> = (0..m).map(|i| row_data(inst, extra_cuts, i).1.clone()).collect();
    let mut full = vec![Rational::zero(); n + m];
    for (t, &bcol) in opt.basis.iter().enumerate() {
        let v = dot(&opt.basis_inverse[t], &b_full);
        if v.is_negative() {
            return false;
        }
        full[bcol] = v;
    }
    if full[..n] != opt.x[..] {
        return false;
    }

    // Primal feasibility of x against the original rows.
    if opt.x.iter().any(|v| v.is_negative()) {
        return false;
    }
    for i in 0..m {
        let (coeffs, bi) = row_data(inst, extra_cuts, i);
        if &dot(coeffs, &opt.x) > bi {
            return false;
        }
    }

    if dot(&inst.c, &opt.x) != opt.objective {
        return false;
    }

    // Dual prices y = c_B' B^{-1}; every reduced cost c_j - y'col_j <= 0.
    let mut y = vec![Rational::zero(); m];
    for (t, &bcol) in opt.basis.iter().enumerate() {
        if bcol < n && !inst.c[bcol].is_zero() {
            for (yk, inv) in y.iter_mut().zip(&opt.basis_inverse[t]) {
                *yk += &inst.c[bcol] * inv;
            }
        }
    }
    for col in 0..n + m {
        let cj = if col < n { inst.c[col].clone() } else { Rational::zero() };
        let mut ya = Rational::zero();
        if col < n {
            for (k, yk) in y.iter().enumerate() {
                if !yk.is_zero() {
                    let a = &row_data(inst, extra_cuts, k).0[col];
                    if !a.is_zero() {
                        ya += yk * a;
                    }
                }
            }
        } else {
            ya = y[col - n].clone();
        }
        if (cj - ya).is_positive() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn rats(ss: &[&str]) -> Vec<Rational> {
        ss.iter().map(|s| rat(s)).collect()
    }

    fn two_var_example() -> IlpInstance {
        IlpInstance::new(
            "paper-example-2d",
            vec![rats(&["1", "1"]), rats(&["5", "9"])],
            rats(&["6", "45"]),
            rats(&["5", "8"]),
        )
        .unwrap()
    }

    #[test]
    fn two_var_example_relaxation() {
        let inst = two_var_example();
        let sol = solve_lp(&inst, &[]);
        let opt = sol.expect_optimal("two-var example");
        assert_eq!(opt.x, rats(&["9/4", "15/4"]));
        assert_eq!(opt.objective, rat("165/4"));
        assert_eq!(opt.basis, vec![0, 1]);
        assert_eq!(
            opt.basis_inverse,
            vec![rats(&["9/4", "-1/4"]), rats(&["-5/4", "1/4"])]
        );
        assert!(verify_lp_certificate(&inst, &[], opt));
    }

    #[test]
    fn two_var_example_with_first_tableau_cut() {
        let inst = two_var_example();
        let cut = Cut::new(rats(&["4", "7"]), rat("35"));
        let sol = solve_lp(&inst, &[cut.clone()]);
        let opt = sol.expect_optimal("cut 4x1+7x2<=35");
        assert_eq!(opt.x, rats(&["7/3", "11/3"]));
        assert_eq!(opt.objective, rat("41"));
        assert!(verify_lp_certificate(&inst, &[cut], opt));
    }

    #[test]
    fn two_var_example_with_second_tableau_cut() {
        let inst = two_var_example();
        let cut = Cut::new(rats(&["2", "3"]), rat("15"));
        let sol = solve_lp(&inst, &[cut.clone()]);
        let opt = sol.expect_optimal("cut 2x1+3x2<=15");
        assert_eq!(opt.x, rats(&["0", "5"]));
        assert_eq!(opt.objective, rat("40"));
        assert!(verify_lp_certificate(&inst, &[cut], opt));
    }

    #[test]
    fn degenerate_origin_is_optimal() {
        let inst = IlpInstance::new(
            "origin",
            vec![rats(&["1", "0"]), rats(&["0", "1"])],
            rats(&["0", "0"]),
            rats(&["-1", "-2"]),
        )
        .unwrap();
        let sol = solve_lp(&inst, &[]);
        let opt = sol.expect_optimal("origin");
        assert_eq!(opt.x, rats(&["0", "0"]));
        assert_eq!(opt.objective, rat("0"));
        assert!(verify_lp_certificate(&inst, &[], opt));
    }

    #[test]
    fn detects_infeasible() {
        let inst = IlpInstance::new("inf", vec![rats(&["1"])], rats(&["-1"]), rats(&["1"])).unwrap();
        assert_eq!(solve_lp(&inst, &[]), LpSolution::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let inst = IlpInstance::new("unb", vec![rats(&["-1"])], rats(&["0"]), rats(&["1"])).unwrap();
        assert_eq!(solve_lp(&inst, &[]), LpSolution::Unbounded);
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // min-cover style row: x1 >= 1 written as -x1 <= -1, plus x1 <= 1.
        let inst = IlpInstance::new(
            "cover1",
            vec![rats(&["-1"]), rats(&["1"])],
            rats(&["-1", "1"]),
            rats(&["-3"]),
        )
        .unwrap();
        let opt = solve_lp(&inst, &[]).expect_optimal("cover1").clone();
        assert_eq!(opt.x, rats(&["1"]));
        assert_eq!(opt.objective, rat("-3"));
        assert!(verify_lp_certificate(&inst, &[], &opt));
    }

    #[test]
    fn certificate_rejects_perturbed_objective() {
        let inst = two_var_example();
        let mut opt = solve_lp(&inst, &[]).expect_optimal("two-var").clone();
        opt.objective += rat("1/1000");
        assert!(!verify_lp_certificate(&inst, &[], &opt));
    }

    #[test]
    fn certificate_rejects_swapped_basis_column() {
        let inst = two_var_example();
        let mut opt = solve_lp(&inst, &[]).expect_optimal("two-var").clone();
        // Claim basis {x1, s0} with its true inverse; x and z no longer match
        // the basic solution for that basis.
        opt.basis = vec![0, 2];
        opt.basis_inverse = vec![rats(&["0", "1/5"]), rats(&["1", "-1/5"])];
        assert!(!verify_lp_certificate(&inst, &[], &opt));
    }

    #[test]
    fn certificate_rejects_wrong_inverse() {
        let inst = two_var_example();
        let mut opt = solve_lp(&inst, &[]).expect_optimal("two-var").clone();
        opt.basis_inverse[0][0] += rat("1");
        assert!(!verify_lp_certificate(&inst, &[], &opt));
    }

    #[test]
    fn deterministic_across_runs() {
        let inst = two_var_example();
        let a = solve_lp(&inst, &[]);
        let b = solve_lp(&inst, &[]);
        assert_eq!(a, b);
    }
}

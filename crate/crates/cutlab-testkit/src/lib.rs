//! Independent reference implementations used to cross-check the main crate.
//!
//! Everything here is deliberately naive and deliberately foreign: the LP
//! oracle enumerates every basis, the integer oracle enumerates every
//! lattice point in a box, the tree oracle re-derives branch-and-bound by
//! plain recursion, and all arithmetic runs on `num_rational::BigRational`
//! rather than the main crate's rational type. This crate does not link
//! `cutlab` at all; problems cross the boundary as JSON documents and
//! rational display strings, so agreement between the two implementations
//! is meaningful evidence rather than a tautology.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

/// Exact row-major LP data: maximize `cost·x` over `rows·x <= rhs`, `x >= 0`.
#[derive(Debug, Clone)]
pub struct RefProblem {
    pub rows: Vec<Vec<BigRational>>,
    pub rhs: Vec<BigRational>,
    pub cost: Vec<BigRational>,
}

/// Parse a rational written as `p` or `p/q`.
pub fn parse_rat(s: &str) -> Result<BigRational, String> {
    s.trim().parse::<BigRational>().map_err(|e| format!("bad rational {s:?}: {e}"))
}

fn rat_field(v: &Value) -> Result<BigRational, String> {
    match v {
        Value::String(s) => parse_rat(s),
        other => Err(format!("expected rational string, got {other}")),
    }
}

impl RefProblem {
    /// Parse an instance document `{"id","n","m","A","b","c"}` with its own
    /// JSON walk, independent of the main crate's deserializer.
    pub fn from_instance_json(doc: &str) -> Result<RefProblem, String> {
        let v: Value = serde_json::from_str(doc).map_err(|e| e.to_string())?;
        let n = v["n"].as_u64().ok_or("missing n")? as usize;
        let m = v["m"].as_u64().ok_or("missing m")? as usize;
        let a = v["A"].as_array().ok_or("missing A")?;
        let b = v["b"].as_array().ok_or("missing b")?;
        let c = v["c"].as_array().ok_or("missing c")?;
        if a.len() != m || b.len() != m || c.len() != n {
            return Err(format!("shape mismatch: |A|={}, |b|={}, |c|={}", a.len(), b.len(), c.len()));
        }
        let rows: Vec<Vec<BigRational>> = a
            .iter()
            .map(|row| {
                let row = row.as_array().ok_or("A row is not an array")?;
                if row.len() != n {
                    return Err(format!("A row has {} entries, n = {n}", row.len()));
                }
                row.iter().map(rat_field).collect()
            })
            .collect::<Result<_, String>>()?;
        Ok(RefProblem {
            rows,
            rhs: b.iter().map(rat_field).collect::<Result<_, String>>()?,
            cost: c.iter().map(rat_field).collect::<Result<_, String>>()?,
        })
    }

    /// Append one inequality `coeffs·x <= rhs`, entries as rational strings.
    pub fn push_row(&mut self, coeffs: &[String], rhs: &str) -> Result<(), String> {
        if coeffs.len() != self.num_vars() {
            return Err(format!("row has {} entries, n = {}", coeffs.len(), self.num_vars()));
        }
        let row: Vec<BigRational> =
            coeffs.iter().map(|s| parse_rat(s)).collect::<Result<_, String>>()?;
        self.rows.push(row);
        self.rhs.push(parse_rat(rhs)?);
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Outcome of the brute-force LP oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum BruteLp {
    Infeasible,
    Unbounded,
    Optimal { value: BigRational, vertex: Vec<BigRational> },
}

/// Solve `M z = v` for square exact `M` by Gaussian elimination.
/// Returns `None` when `M` is singular.
fn solve_square(m: &[Vec<BigRational>], v: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = v.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut b = v.to_vec();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in col..n {
                a[r][j] = &a[r][j] - &factor * &a[col][j];
            }
            b[r] = &b[r] - &factor * &b[col];
        }
    }
    Some(b)
}

/// Best vertex of `{x : rows·x <= rhs, x >= 0}` by enumerating every basis
/// of the slack-extended system. Returns `None` when no feasible basis
/// exists (an empty polytope, since a nonempty one of this form has a
/// vertex). Objective ties break toward the lexicographically smallest
/// vertex so the result is deterministic.
fn best_vertex(p: &RefProblem) -> Option<(BigRational, Vec<BigRational>)> {
    let n = p.num_vars();
    let m = p.num_rows();
    let total = n + m;
    let ext_col = |row: usize, col: usize| -> BigRational {
        if col < n {
            p.rows[row][col].clone()
        } else if col - n == row {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    };

    let mut best: Option<(BigRational, Vec<BigRational>)> = None;
    let mut combo: Vec<usize> = (0..m).collect();
    loop {
        let bmat: Vec<Vec<BigRational>> = (0..m)
            .map(|r| combo.iter().map(|&c| ext_col(r, c)).collect())
            .collect();
        if let Some(z) = solve_square(&bmat, &p.rhs) {
            if z.iter().all(|v| !v.is_negative()) {
                let mut x = vec![BigRational::zero(); n];
                for (slot, &col) in combo.iter().enumerate() {
                    if col < n {
                        x[col] = z[slot].clone();
                    }
                }
                let value: BigRational =
                    p.cost.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
                let better = match &best {
                    None => true,
                    Some((bv, bx)) => value > *bv || (value == *bv && lex_less(&x, bx)),
                };
                if better {
                    best = Some((value, x));
                }
            }
        }
        // Next m-combination of {0..total} in lexicographic order.
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if combo[i] != i + total - m {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..m {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

fn lex_less(a: &[BigRational], b: &[BigRational]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Brute-force exact LP oracle.
pub fn brute_force_lp(p: &RefProblem) -> BruteLp {
    let Some((value, vertex)) = best_vertex(p) else {
        return BruteLp::Infeasible;
    };
    // Unboundedness: the recession cone {d : rows·d <= 0, d >= 0} contains a
    // cost-improving ray iff max cost·d over that cone intersected with the
    // unit box is positive; the box makes the helper polytope bounded, so
    // plain vertex enumeration decides it.
    let mut helper = RefProblem {
        rows: p.rows.clone(),
        rhs: vec![BigRational::zero(); p.num_rows()],
        cost: p.cost.clone(),
    };
    for j in 0..p.num_vars() {
        let mut row = vec![BigRational::zero(); p.num_vars()];
        row[j] = BigRational::one();
        helper.rows.push(row);
        helper.rhs.push(BigRational::one());
    }
    let (ray_gain, _) =
        best_vertex(&helper).expect("origin is always feasible for the recession box");
    if ray_gain.is_positive() {
        return BruteLp::Unbounded;
    }
    BruteLp::Optimal { value, vertex }
}

/// Exact integer optimum restricted to the box `lo_j <= x_j <= hi_j`, by
/// enumerating every lattice point. Ties break toward the lexicographically
/// smallest point. Returns `None` when no feasible point exists in the box.
/// The caller must pick a box that really contains the feasible region.
pub fn lattice_optimum(p: &RefProblem, bounds: &[(i64, i64)]) -> Option<(Vec<i64>, BigRational)> {
    assert_eq!(bounds.len(), p.num_vars(), "one bound pair per variable");
    let clamped: Vec<(i64, i64)> = bounds.iter().map(|&(lo, hi)| (lo.max(0), hi)).collect();
    if clamped.iter().any(|&(lo, hi)| lo > hi) {
        return None;
    }
    let mut point: Vec<i64> = clamped.iter().map(|&(lo, _)| lo).collect();
    let mut best: Option<(Vec<i64>, BigRational)> = None;
    loop {
        if feasible_point(p, &point) {
            let value: BigRational = p
                .cost
                .iter()
                .zip(&point)
                .map(|(ci, &xi)| ci * BigRational::from(BigInt::from(xi)))
                .sum();
            let better = match &best {
                None => true,
                Some((bp, bv)) => value > *bv || (value == *bv && point < *bp),
            };
            if better {
                best = Some((point.clone(), value));
            }
        }
        let mut idx = point.len();
        loop {
            if idx == 0 {
                return best;
            }
            idx -= 1;
            if point[idx] < clamped[idx].1 {
                point[idx] += 1;
                break;
            }
            point[idx] = clamped[idx].0;
        }
    }
}

fn feasible_point(p: &RefProblem, point: &[i64]) -> bool {
    for (row, rhs) in p.rows.iter().zip(&p.rhs) {
        let mut lhs = BigRational::zero();
        for (coef, &v) in row.iter().zip(point) {
            if v != 0 {
                lhs += coef * BigRational::from(BigInt::from(v));
            }
        }
        if lhs > *rhs {
            return false;
        }
    }
    true
}

/// Reference branch-and-bound statistics computed by direct recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTree {
    /// Number of nodes whose LP relaxation was solved.
    pub tree_size: usize,
    /// Best integral solution found, as `(x, value)`.
    pub incumbent: Option<(Vec<BigRational>, BigRational)>,
}

/// Recursive branch-and-bound oracle, independent of the main solver.
///
/// Node rules mirror the production solver's contract: prune infeasible
/// nodes, prune nodes whose LP bound is at most the incumbent value, accept
/// integral LP vertices as incumbents, and otherwise branch on the
/// lowest-index fractional variable, exploring the floor branch first. The
/// node LP is the brute-force oracle, so tree shapes only agree with the
/// production solver when every node LP has a unique optimal vertex (the
/// small documented fixtures all do).
pub fn tree_by_recursive_enumeration(p: &RefProblem) -> OracleTree {
    let mut state = OracleTree { tree_size: 0, incumbent: None };
    let mut work = p.clone();
    explore(&mut work, &mut state);
    state
}

fn explore(p: &mut RefProblem, state: &mut OracleTree) {
    state.tree_size += 1;
    let BruteLp::Optimal { value, vertex } = brute_force_lp(p) else {
        // Branch constraints only shrink the region, so unbounded
        // subproblems cannot appear under a bounded root.
        return;
    };
    if let Some((_, inc)) = &state.incumbent {
        if value <= *inc {
            return;
        }
    }
    let Some(j) = vertex.iter().position(|v| !v.is_integer()) else {
        state.incumbent = Some((vertex, value));
        return;
    };
    let floor = vertex[j].floor();
    let n = p.num_vars();

    let mut le_row = vec![BigRational::zero(); n];
    le_row[j] = BigRational::one();
    p.rows.push(le_row);
    p.rhs.push(floor.clone());
    explore(p, state);
    p.rows.pop();
    p.rhs.pop();

    let mut ge_row = vec![BigRational::zero(); n];
    ge_row[j] = -BigRational::one();
    p.rows.push(ge_row);
    p.rhs.push(-(floor + BigRational::one()));
    explore(p, state);
    p.rows.pop();
    p.rhs.pop();
}

/// Deterministic random instance document for property tests. `draw` must
/// return a uniform integer in its inclusive argument range; entries land in
/// `[-coeff_bound, coeff_bound]`, right-hand sides skew nonnegative so a
/// decent share of instances are feasible, and when `var_bound` is set one
/// extra row `x_j <= var_bound` per variable keeps the region box-bounded.
pub fn random_instance_doc(
    draw: &mut dyn FnMut(i64, i64) -> i64,
    id: &str,
    num_vars: usize,
    num_cons: usize,
    coeff_bound: i64,
    var_bound: Option<i64>,
) -> String {
    let mut a: Vec<Vec<String>> = (0..num_cons)
        .map(|_| (0..num_vars).map(|_| draw(-coeff_bound, coeff_bound).to_string()).collect())
        .collect();
    let mut b: Vec<String> =
        (0..num_cons).map(|_| draw(-coeff_bound / 2, 2 * coeff_bound).to_string()).collect();
    let c: Vec<String> =
        (0..num_vars).map(|_| draw(-coeff_bound, coeff_bound).to_string()).collect();
    if let Some(u) = var_bound {
        for j in 0..num_vars {
            let mut row = vec!["0".to_string(); num_vars];
            row[j] = "1".to_string();
            a.push(row);
            b.push(u.to_string());
        }
    }
    serde_json::json!({
        "id": id,
        "n": num_vars,
        "m": a.len(),
        "A": a,
        "b": b,
        "c": c,
    })
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_VAR_DOC: &str = r#"{
        "id": "paper-example-2d",
        "n": 2,
        "m": 2,
        "A": [["1", "1"], ["5", "9"]],
        "b": ["6", "45"],
        "c": ["5", "8"]
    }"#;

    fn rat(s: &str) -> BigRational {
        parse_rat(s).unwrap()
    }

    #[test]
    fn brute_lp_matches_known_vertex() {
        let p = RefProblem::from_instance_json(TWO_VAR_DOC).unwrap();
        let got = brute_force_lp(&p);
        let BruteLp::Optimal { value, vertex } = got else {
            panic!("expected optimum, got {got:?}");
        };
        assert_eq!(value, rat("165/4"));
        assert_eq!(vertex, vec![rat("9/4"), rat("15/4")]);
    }

    #[test]
    fn brute_lp_detects_infeasible() {
        // x1 <= -1 with x1 >= 0.
        let doc = r#"{"id":"inf","n":1,"m":1,"A":[["1"]],"b":["-1"],"c":["1"]}"#;
        let p = RefProblem::from_instance_json(doc).unwrap();
        assert_eq!(brute_force_lp(&p), BruteLp::Infeasible);
    }

    #[test]
    fn brute_lp_detects_unbounded() {
        // Maximize x1 subject to -x1 <= 0 only.
        let doc = r#"{"id":"unb","n":1,"m":1,"A":[["-1"]],"b":["0"],"c":["1"]}"#;
        let p = RefProblem::from_instance_json(doc).unwrap();
        assert_eq!(brute_force_lp(&p), BruteLp::Unbounded);
    }

    #[test]
    fn pushed_rows_participate() {
        let mut p = RefProblem::from_instance_json(TWO_VAR_DOC).unwrap();
        p.push_row(&["2".into(), "3".into()], "15").unwrap();
        let got = brute_force_lp(&p);
        let BruteLp::Optimal { value, vertex } = got else {
            panic!("expected optimum, got {got:?}");
        };
        assert_eq!(value, rat("40"));
        assert_eq!(vertex, vec![rat("0"), rat("5")]);
    }

    #[test]
    fn lattice_optimum_of_doc_example() {
        let p = RefProblem::from_instance_json(TWO_VAR_DOC).unwrap();
        let (point, value) = lattice_optimum(&p, &[(0, 10), (0, 10)]).unwrap();
        assert_eq!(value, rat("40"));
        assert_eq!(point, vec![0, 5]);
    }

    #[test]
    fn lattice_optimum_empty_region() {
        let doc = r#"{"id":"inf","n":1,"m":1,"A":[["1"]],"b":["-1"],"c":["1"]}"#;
        let p = RefProblem::from_instance_json(doc).unwrap();
        assert_eq!(lattice_optimum(&p, &[(0, 5)]), None);
    }

    #[test]
    fn recursive_tree_matches_hand_trace() {
        let p = RefProblem::from_instance_json(TWO_VAR_DOC).unwrap();
        let plain = tree_by_recursive_enumeration(&p);
        assert_eq!(plain.tree_size, 9);
        let (x, v) = plain.incumbent.unwrap();
        assert_eq!(v, rat("40"));
        assert_eq!(x, vec![rat("0"), rat("5")]);

        let mut with_cut = p.clone();
        with_cut.push_row(&["2".into(), "3".into()], "15").unwrap();
        let cut_tree = tree_by_recursive_enumeration(&with_cut);
        assert_eq!(cut_tree.tree_size, 1);
        assert_eq!(cut_tree.incumbent.unwrap().1, rat("40"));
    }

    #[test]
    fn random_docs_are_deterministic_in_the_draw_stream() {
        let mut script = vec![3, -2, 0, 5, 1, -1, 4, 2].into_iter();
        let mut draw = move |lo: i64, hi: i64| {
            let v = script.next().unwrap();
            assert!(v >= lo && v <= hi);
            v
        };
        let doc = random_instance_doc(&mut draw, "t-0", 2, 2, 8, Some(6));
        let p = RefProblem::from_instance_json(&doc).unwrap();
        assert_eq!(p.num_vars(), 2);
        assert_eq!(p.num_rows(), 4, "two base rows plus two bound rows");
        assert_eq!(p.rows[2], vec![rat("1"), rat("0")]);
        assert_eq!(p.rhs[2], rat("6"));
    }
}

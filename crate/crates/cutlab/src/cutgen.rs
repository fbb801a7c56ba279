//! Chvátal-Gomory cut generation and cut-scoring helpers.
//!
//! A weight vector `u >= 0` over the rows of `A x <= b` yields the cut
//! `floor(u'A) x <= floor(u'b)`, valid for every integer point with `x >= 0`
//! because flooring the coefficients can only lower the left-hand side.
//! The tableau variant reads `u` off the fractional parts of the optimal
//! basis inverse, one candidate cut per tableau row.

use crate::instance::{Cut, IlpInstance};
use crate::rational::{dot, Rational};
use crate::simplex::{solve_lp, LpSolution};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CutError {
    #[error("weight {index} is negative; CG weights must be nonnegative")]
    NegativeWeight { index: usize },
    #[error("expected {expected} weights (one per constraint), got {got}")]
    WeightArity { expected: usize, got: usize },
    #[error("LP relaxation is infeasible; tableau cuts are undefined")]
    RelaxationInfeasible,
    #[error("LP relaxation is unbounded; tableau cuts are undefined")]
    RelaxationUnbounded,
    #[error("parallelism is undefined for a zero {which} vector")]
    ZeroVector { which: &'static str },
    #[error("validity box holds {points} integer points, above the 10^7 enumeration cap")]
    BoxTooLarge { points: u128 },
}

/// Nonnegative row weights for CG cut generation.
#[derive(Debug, Clone, PartialEq)]
pub struct CgWeights {
    u: Vec<Rational>,
}

impl CgWeights {
    /// Validates componentwise nonnegativity.
    pub fn new(u: Vec<Rational>) -> Result<Self, CutError> {
        if let Some(index) = u.iter().position(|w| w.is_negative()) {
            return Err(CutError::NegativeWeight { index });
        }
        Ok(CgWeights { u })
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.u
    }
}

/// The CG cut `floor(u'A) x <= floor(u'b)` for nonnegative weights `u`.
pub fn cg_cut_from_weights(inst: &IlpInstance, weights: &CgWeights) -> Result<Cut, CutError> {
    let u = weights.as_slice();
    if u.len() != inst.num_cons {
        return Err(CutError::WeightArity { expected: inst.num_cons, got: u.len() });
    }
    let coeffs: Vec<Rational> = (0..inst.num_vars)
        .map(|j| {
            u.iter()
                .zip(&inst.a)
                .filter(|(w, _)| !w.is_zero())
                .map(|(w, row)| w * &row[j])
                .sum::<Rational>()
                .floor()
        })
        .collect();
    let rhs = dot(u, &inst.b).floor();
    Ok(Cut::new(coeffs, rhs))
}

/// Candidate CG cuts read off the optimal simplex tableau: for each row `i`
/// of the basis inverse, the weights are the componentwise fractional parts
/// of that row. Rows whose fractional part is identically zero produce the
/// trivial cut `0 <= 0` and are omitted, so an integral LP vertex yields an
/// empty list. Results are ordered by tableau row index.
pub fn tableau_cg_cuts(inst: &IlpInstance) -> Result<Vec<(usize, Cut)>, CutError> {
    let opt = match solve_lp(inst, &[]) {
        LpSolution::Optimal(opt) => opt,
        LpSolution::Infeasible => return Err(CutError::RelaxationInfeasible),
        LpSolution::Unbounded => return Err(CutError::RelaxationUnbounded),
    };
    let mut cuts = Vec::new();
    for (i, row) in opt.basis_inverse.iter().enumerate() {
        let u: Vec<Rational> = row.iter().map(Rational::frac).collect();
        if u.iter().all(Rational::is_zero) {
            continue;
        }
        let weights = CgWeights::new(u).expect("fractional parts are nonnegative");
        cuts.push((i, cg_cut_from_weights(inst, &weights)?));
    }
    Ok(cuts)
}

/// Cosine of the angle between the cut normal and the objective:
/// `c'a / (|c| |a|)`, in `[-1, 1]`. Dot products are taken exactly and only
/// the final division and square root run in floating point.
pub fn parallelism_score(inst: &IlpInstance, cut: &Cut) -> Result<f64, CutError> {
    if inst.c.iter().all(Rational::is_zero) {
        return Err(CutError::ZeroVector { which: "objective" });
    }
    if cut.coeffs.iter().all(Rational::is_zero) {
        return Err(CutError::ZeroVector { which: "cut" });
    }
    let num = dot(&inst.c, &cut.coeffs).to_f64();
    let c_sq = dot(&inst.c, &inst.c).to_f64();
    let a_sq = dot(&cut.coeffs, &cut.coeffs).to_f64();
    Ok(num / (c_sq * a_sq).sqrt())
}

/// Componentwise logistic map `1 / (1 + e^-v)`: negatives land in
/// `[0, 1/2)`, nonnegatives in `[1/2, 1]`, and the image covers `(0, 1)`.
pub fn squeeze(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| 1.0 / (1.0 + (-x).exp())).collect()
}

/// Brute-force CG validity check: true iff every integer point of the box
/// that satisfies `A x <= b` (with `x >= 0`) also satisfies the cut.
///
/// Lower bounds are clamped to zero before enumeration since negative
/// coordinates are never feasible; the `10^7` work cap applies to the
/// clamped box. The caller must pick a box that covers the feasible region.
pub fn is_valid_cut(
    inst: &IlpInstance,
    cut: &Cut,
    bounds: &[(i64, i64)],
) -> Result<bool, CutError> {
    assert_eq!(bounds.len(), inst.num_vars, "one bound pair per variable");
    let clamped: Vec<(i64, i64)> = bounds.iter().map(|&(lo, hi)| (lo.max(0), hi)).collect();
    if clamped.iter().any(|&(lo, hi)| lo > hi) {
        return Ok(true);
    }
    let mut points: u128 = 1;
    for &(lo, hi) in &clamped {
        points = points.saturating_mul((hi - lo + 1) as u128);
    }
    if points > 10_000_000 {
        return Err(CutError::BoxTooLarge { points });
    }

    let rows: Vec<(&[Rational], &Rational)> = inst
        .a
        .iter()
        .map(|r| r.as_slice())
        .zip(&inst.b)
        .chain(std::iter::once((cut.coeffs.as_slice(), &cut.rhs)))
        .collect();
    let scaled: Option<Vec<ScaledRow>> =
        rows.iter().map(|(coeffs, rhs)| ScaledRow::build(coeffs, rhs)).collect();

    let mut point: Vec<i64> = clamped.iter().map(|&(lo, _)| lo).collect();
    loop {
        let violates_cut = match &scaled {
            Some(srows) => {
                let (feasible, cut_ok) = check_scaled(srows, &point);
                feasible && !cut_ok
            }
            None => {
                let xr: Vec<Rational> = point.iter().map(|&v| Rational::from_int(v)).collect();
                inst.satisfies(&xr) && !cut.satisfies(&xr)
            }
        };
        if violates_cut {
            return Ok(false);
        }
        let mut idx = point.len();
        loop {
            if idx == 0 {
                return Ok(true);
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

/// One inequality with rational entries cleared to integers, so the hot
/// enumeration loop runs in machine arithmetic.
struct ScaledRow {
    coeffs: Vec<i128>,
    rhs: i128,
}

impl ScaledRow {
    fn build(coeffs: &[Rational], rhs: &Rational) -> Option<ScaledRow> {
        let mut scale: i128 = 1;
        for v in coeffs.iter().chain(std::iter::once(rhs)) {
            let (_, den) = v.to_i128_parts()?;
            scale = scale.checked_mul(den / num_integer::gcd(scale, den))?;
        }
        let clear = |v: &Rational| -> Option<i128> {
            let (num, den) = v.to_i128_parts()?;
            num.checked_mul(scale / den)
        };
        Some(ScaledRow {
            coeffs: coeffs.iter().map(clear).collect::<Option<_>>()?,
            rhs: clear(rhs)?,
        })
    }

    fn holds_at(&self, point: &[i64]) -> bool {
        let mut lhs: i128 = 0;
        for (c, &x) in self.coeffs.iter().zip(point) {
            lhs += c * x as i128;
        }
        lhs <= self.rhs
    }
}

/// Returns `(instance rows all hold, cut row holds)`; the cut is last.
fn check_scaled(rows: &[ScaledRow], point: &[i64]) -> (bool, bool) {
    let (cut_row, inst_rows) = rows.split_last().expect("at least the cut row");
    let feasible = inst_rows.iter().all(|r| r.holds_at(point));
    if !feasible {
        return (false, true);
    }
    (true, cut_row.holds_at(point))
}

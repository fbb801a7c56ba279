//! Worst-case two-cut constructions and their exact certification.
//!
//! For a margin `0 < gamma < 1/2` and a direction `a <= 0`, the instance
//!
//! ```text
//! max x1 + x2   s.t.   a' x <= 0,   2 x1 <= 4,   2 x2 <= 5/2 + 2 gamma
//! ```
//!
//! has LP value `13/4 + gamma` at `(2, 5/4 + gamma)` and integer optimum `3`
//! at `(2, 1)`. Two designated CG weight vectors produce a strong cut
//! `x1 + x2 <= 3` (closing the whole gap and collapsing the tree) and a weak
//! cut `x1 <= 3` (redundant: zero gap closed, tree untouched). Because both
//! cuts exist for every such instance, a family of these instances can
//! realize any high/low labeling of either cut score around a common
//! witness — the separation this module certifies with exact arithmetic.
//! All verdicts are computed over rationals; floats appear only in reports
//! for display.

use crate::bnc::{solve_bnc, BncConfig, BncError};
use crate::cutgen::{cg_cut_from_weights, tableau_cg_cuts, CgWeights, CutError};
use crate::instance::{Cut, IlpInstance};
use crate::rational::Rational;
use crate::simplex::solve_lp;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShatterError {
    #[error("gamma must lie strictly between 0 and 1/2, got {gamma}")]
    GammaOutOfRange { gamma: Rational },
    #[error("direction {index} has a positive component; rows a'x <= 0 must stay redundant on x >= 0")]
    BadDirection { index: usize },
    #[error("tree search failed")]
    Tree(#[from] BncError),
    #[error("cut generation failed")]
    Cuts(#[from] CutError),
}

/// Family parameters: one instance per direction, all sharing `gamma`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShatterConfig {
    pub gamma: Rational,
    /// Componentwise nonpositive 2-vectors, one per instance.
    pub directions: Vec<[Rational; 2]>,
}

impl ShatterConfig {
    pub fn validate(&self) -> Result<(), ShatterError> {
        check_gamma(&self.gamma)?;
        for (index, a) in self.directions.iter().enumerate() {
            if a.iter().any(Rational::is_positive) {
                return Err(ShatterError::BadDirection { index });
            }
        }
        Ok(())
    }
}

fn check_gamma(gamma: &Rational) -> Result<(), ShatterError> {
    let half = Rational::new(1, 2);
    if gamma.is_positive() && *gamma < half {
        Ok(())
    } else {
        Err(ShatterError::GammaOutOfRange { gamma: gamma.clone() })
    }
}

/// Which cut score a verification run certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreKind {
    GapClosed,
    TreeSize,
    Both,
}

/// The three-row construction for one direction. The row `2 x1 <= 4` is kept
/// unsimplified: its coefficient 2 is what makes the basis inverse
/// fractional enough to reach both cuts.
pub fn build_shatter_instance(
    direction: &[Rational; 2],
    gamma: &Rational,
    id: &str,
) -> Result<IlpInstance, ShatterError> {
    check_gamma(gamma)?;
    if direction.iter().any(Rational::is_positive) {
        return Err(ShatterError::BadDirection { index: 0 });
    }
    let two = Rational::from_int(2);
    Ok(IlpInstance {
        id: id.to_string(),
        num_vars: 2,
        num_cons: 3,
        a: vec![
            vec![direction[0].clone(), direction[1].clone()],
            vec![two.clone(), Rational::zero()],
            vec![Rational::zero(), two.clone()],
        ],
        b: vec![Rational::zero(), Rational::from_int(4), Rational::new(5, 2) + &two * gamma],
        c: vec![Rational::one(), Rational::one()],
    })
}

/// Lift an instance to `num_vars` variables and `num_cons` constraints by
/// appending zero-cost variables (zero column everywhere) and rows
/// `0'x <= 0`. The feasible integer set, LP value, and both cut scores are
/// unchanged by construction.
pub fn pad_with_trivial_rows(inst: &IlpInstance, num_vars: usize, num_cons: usize) -> IlpInstance {
    assert!(num_vars >= inst.num_vars, "cannot shrink the variable count");
    assert!(num_cons >= inst.num_cons, "cannot shrink the constraint count");
    let mut a: Vec<Vec<Rational>> = inst
        .a
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.resize(num_vars, Rational::zero());
            r
        })
        .collect();
    a.resize_with(num_cons, || vec![Rational::zero(); num_vars]);
    let mut b = inst.b.clone();
    b.resize(num_cons, Rational::zero());
    let mut c = inst.c.clone();
    c.resize(num_vars, Rational::zero());
    IlpInstance {
        id: format!("{}-lift{}x{}", inst.id, num_vars, num_cons),
        num_vars,
        num_cons,
        a,
        b,
        c,
    }
}

/// The designated weight vectors, exactly inside their admissible regions.
///
/// Strong: `u = (0, 1/2, 1/2)` with `u2` in `[1/2, 1 - (5/36)(5/2 + 2g)]`
/// and `u3` in `[1/2, 5/9)`; yields `x1 + x2 <= 3`.
///
/// Weak: `u = (0, 1/2, 2/(5 + 4g))` with `u2` in `[1/2, 11/16 - g/4]` and
/// `u3` in `[(1/4 + g)/(5/2 + 2g), 1/2)`; the third weight is chosen so that
/// `u3 (5/2 + 2g) = 1` exactly, which pins the cut to `x1 <= 3` for every
/// admissible `gamma` (an interval midpoint would drift to `x1 <= 2` for
/// small `gamma`). Yields the redundant `x1 <= 3`.
///
/// Both memberships are asserted exactly; they hold for all
/// `gamma` in `(0, 1/2)`.
pub fn weight_region_representatives(
    gamma: &Rational,
) -> Result<(CgWeights, CgWeights), ShatterError> {
    check_gamma(gamma)?;
    let half = Rational::new(1, 2);
    let row3_rhs = Rational::new(5, 2) + Rational::from_int(2) * gamma;

    let strong = vec![Rational::zero(), half.clone(), half.clone()];
    let strong_u2_hi = Rational::one() - Rational::new(5, 36) * &row3_rhs;
    assert!(strong[1] >= half && strong[1] <= strong_u2_hi, "strong u2 left its region");
    assert!(
        strong[2] >= half && strong[2] < Rational::new(20, 36),
        "strong u3 left its region"
    );

    let weak_u3 = (&row3_rhs).recip();
    let weak = vec![Rational::zero(), half.clone(), weak_u3];
    let weak_u2_hi = Rational::new(11, 16) - gamma / Rational::from_int(4);
    let weak_u3_lo = (Rational::new(1, 4) + gamma) / &row3_rhs;
    assert!(weak[1] >= half && weak[1] <= weak_u2_hi, "weak u2 left its region");
    assert!(weak[2] >= weak_u3_lo && weak[2] < half, "weak u3 left its region");

    Ok((
        CgWeights::new(strong).expect("strong weights are nonnegative"),
        CgWeights::new(weak).expect("weak weights are nonnegative"),
    ))
}

/// Everything measured about one cut on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutEvidence {
    pub cut: Cut,
    pub gap_closed: Rational,
    pub tree_size: usize,
    /// LP vertex after appending the cut, as returned by the solver. The
    /// strong cut creates a degenerate optimal face; which of its vertices
    /// the pivot path lands on decides whether the tree collapses to the
    /// root, so the vertex is part of the record.
    pub post_cut_vertex: Vec<Rational>,
    pub vertex_integral: bool,
}

/// Exact measurements for one instance and its strong/weak cut pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterRecord {
    pub instance_id: String,
    pub z_lp: Rational,
    pub z_ip: Rational,
    pub baseline_tree_size: usize,
    pub strong: CutEvidence,
    pub weak: CutEvidence,
    /// `strong.gap_closed - weak.gap_closed`.
    pub gap_separation: Rational,
    /// `weak.tree_size - strong.tree_size` (positive when the strong cut
    /// yields the smaller tree).
    pub tree_separation: i64,
}

/// Verification outcome: per-instance records plus an overall verdict.
/// `failures` lists every claim that did not hold, with exact values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterReport {
    pub score: ScoreKind,
    pub gamma: Option<Rational>,
    pub records: Vec<ShatterRecord>,
    /// Number of +/-1 labelings exhaustively confirmed realizable, or
    /// `None` when the family is too large to enumerate (more than 20
    /// instances) and per-instance separation suffices by independence.
    pub labelings_checked: Option<u64>,
    pub verdict: bool,
    pub failures: Vec<String>,
}

fn measure_cut(
    inst: &IlpInstance,
    cut: Cut,
    z_lp: &Rational,
    z_ip: &Rational,
    cfg: &BncConfig,
) -> Result<CutEvidence, ShatterError> {
    let post = solve_lp(inst, std::slice::from_ref(&cut));
    let post = post.expect_optimal("cut kept the instance feasible and bounded");
    let gap = z_lp - z_ip;
    assert!(gap.is_positive(), "construction has a positive integrality gap");
    let gap_closed = (z_lp - &post.objective) / gap;
    let run = solve_bnc(inst, std::slice::from_ref(&cut), cfg)?;
    Ok(CutEvidence {
        cut,
        gap_closed,
        tree_size: run.tree_size,
        vertex_integral: post.x.iter().all(Rational::is_integer),
        post_cut_vertex: post.x.clone(),
    })
}

fn measure_instance(
    inst: &IlpInstance,
    strong_cut: Cut,
    weak_cut: Cut,
) -> Result<ShatterRecord, ShatterError> {
    let cfg = BncConfig::default();
    let z_lp = solve_lp(inst, &[])
        .expect_optimal("construction LP is feasible and bounded")
        .objective
        .clone();
    let baseline = solve_bnc(inst, &[], &cfg)?;
    let z_ip = baseline
        .incumbent
        .as_ref()
        .expect("construction is integer-feasible")
        .value
        .clone();
    let strong = measure_cut(inst, strong_cut, &z_lp, &z_ip, &cfg)?;
    let weak = measure_cut(inst, weak_cut, &z_lp, &z_ip, &cfg)?;
    Ok(ShatterRecord {
        instance_id: inst.id.clone(),
        gap_separation: &strong.gap_closed - &weak.gap_closed,
        tree_separation: weak.tree_size as i64 - strong.tree_size as i64,
        z_lp,
        z_ip,
        baseline_tree_size: baseline.tree_size,
        strong,
        weak,
    })
}

/// Claim checks for one record of the constructed family; pushes a line per
/// violated claim.
fn check_family_record(
    rec: &ShatterRecord,
    gamma: &Rational,
    score: ScoreKind,
    failures: &mut Vec<String>,
) {
    let id = &rec.instance_id;
    let expected_z_lp = Rational::new(13, 4) + gamma;
    if rec.z_lp != expected_z_lp {
        failures.push(format!("{id}: z_LP = {} instead of {expected_z_lp}", rec.z_lp));
    }
    if rec.z_ip != Rational::from_int(3) {
        failures.push(format!("{id}: z_IP = {} instead of 3", rec.z_ip));
    }
    if score != ScoreKind::TreeSize {
        let half = Rational::new(1, 2);
        if rec.strong.gap_closed != Rational::one() {
            failures.push(format!(
                "{id}: strong cut closes {} of the gap instead of all of it",
                rec.strong.gap_closed
            ));
        }
        if !rec.weak.gap_closed.is_zero() {
            failures.push(format!(
                "{id}: weak cut closes {} of the gap instead of none",
                rec.weak.gap_closed
            ));
        }
        // Margin-gamma straddle of the common witness 1/2.
        if rec.strong.gap_closed < &half + gamma {
            failures.push(format!("{id}: strong score below witness + gamma"));
        }
        if rec.weak.gap_closed > &half - gamma {
            failures.push(format!("{id}: weak score above witness - gamma"));
        }
        // The absolute LP improvement the construction promises.
        let post_strong = &rec.z_lp - &rec.strong.gap_closed * (&rec.z_lp - &rec.z_ip);
        let absolute = &rec.z_lp - &post_strong;
        let promised = Rational::new(1, 4) + gamma;
        if absolute != promised {
            failures.push(format!(
                "{id}: strong cut improves the LP by {absolute} instead of {promised}"
            ));
        }
    }
    if score != ScoreKind::GapClosed {
        if rec.weak.tree_size != 3 {
            failures.push(format!(
                "{id}: weak-cut tree has {} nodes instead of 3",
                rec.weak.tree_size
            ));
        }
        if rec.strong.tree_size != 1 && rec.strong.tree_size != 3 {
            failures.push(format!(
                "{id}: strong-cut tree has {} nodes, outside {{1, 3}}",
                rec.strong.tree_size
            ));
        }
        // When the solver lands on the integral vertex of the degenerate
        // face, the tree must genuinely collapse below the weak cut's.
        if rec.strong.vertex_integral && rec.strong.tree_size >= rec.weak.tree_size {
            failures.push(format!(
                "{id}: integral strong vertex but trees not separated ({} vs {})",
                rec.strong.tree_size, rec.weak.tree_size
            ));
        }
    }
}

/// Can instance `rec` realize the demanded side of the labeling?
/// `high` asks for a score at least `witness + margin` (label -1), achieved
/// by one cut; `!high` asks for at most `witness - margin` (label +1),
/// achieved by the other.
fn side_realizable(rec: &ShatterRecord, score: ScoreKind, gamma: &Rational, high: bool) -> bool {
    match score {
        ScoreKind::GapClosed => {
            let half = Rational::new(1, 2);
            if high {
                rec.strong.gap_closed >= &half + gamma
            } else {
                rec.weak.gap_closed <= &half - gamma
            }
        }
        ScoreKind::TreeSize => {
            // Witness 2 nodes, margin 1 node: the weak cut realizes the
            // high side, the strong cut the low side.
            if high {
                rec.weak.tree_size >= 3
            } else {
                rec.strong.tree_size <= 1
            }
        }
        ScoreKind::Both => {
            side_realizable(rec, ScoreKind::GapClosed, gamma, high)
                && side_realizable(rec, ScoreKind::TreeSize, gamma, high)
        }
    }
}

/// Builds the family, measures both cuts on every member, checks every
/// quantitative claim, and (for families of at most 20 instances)
/// exhaustively confirms that each of the `2^r` labelings is realizable by
/// picking one cut per instance.
pub fn verify_shattering(
    cfg: &ShatterConfig,
    score: ScoreKind,
) -> Result<ShatterReport, ShatterError> {
    cfg.validate()?;
    let (u_strong, u_weak) = weight_region_representatives(&cfg.gamma)?;
    let gamma_slug = cfg.gamma.to_string().replace('/', "_");
    let mut records = Vec::with_capacity(cfg.directions.len());
    let mut failures = Vec::new();

    for (i, direction) in cfg.directions.iter().enumerate() {
        let id = format!("shatter-{gamma_slug}-{i}");
        let inst = build_shatter_instance(direction, &cfg.gamma, &id)?;
        let strong_cut = cg_cut_from_weights(&inst, &u_strong)?;
        let weak_cut = cg_cut_from_weights(&inst, &u_weak)?;
        let expected_strong = Cut::new(vec![Rational::one(), Rational::one()], Rational::from_int(3));
        let expected_weak = Cut::new(vec![Rational::one(), Rational::zero()], Rational::from_int(3));
        if strong_cut != expected_strong {
            failures.push(format!("{id}: strong weights produced {strong_cut:?}"));
        }
        if weak_cut != expected_weak {
            failures.push(format!("{id}: weak weights produced {weak_cut:?}"));
        }
        let rec = measure_instance(&inst, strong_cut, weak_cut)?;
        check_family_record(&rec, &cfg.gamma, score, &mut failures);
        records.push(rec);
    }

    let r = records.len();
    let labelings_checked = if r <= 20 {
        let total: u64 = 1 << r;
        for mask in 0..total {
            for (i, rec) in records.iter().enumerate() {
                let high = mask >> i & 1 == 0;
                if !side_realizable(rec, score, &cfg.gamma, high) {
                    failures.push(format!(
                        "labeling {mask:#b}: instance {} cannot realize the {} side",
                        rec.instance_id,
                        if high { "high" } else { "low" }
                    ));
                }
            }
        }
        Some(total)
    } else {
        None
    };

    Ok(ShatterReport {
        score,
        gamma: Some(cfg.gamma.clone()),
        verdict: failures.is_empty(),
        records,
        labelings_checked,
        failures,
    })
}

/// Certifies the two-cut separation on the documented two-variable example:
/// its tableau yields exactly two cuts whose gap-closed scores differ by
/// 4/5 (> 1/5) and whose trees are 1 versus at least 3 nodes.
pub fn verify_tableau_lemma() -> Result<ShatterReport, ShatterError> {
    let inst = crate::instgen::paper_example_2d();
    let cuts = tableau_cg_cuts(&inst)?;
    let mut failures = Vec::new();
    assert_eq!(cuts.len(), 2, "documented example must yield exactly two tableau cuts");
    // The second tableau row produces the cut that closes the whole gap.
    let weak_cut = cuts[0].1.clone();
    let strong_cut = cuts[1].1.clone();
    let rec = measure_instance(&inst, strong_cut, weak_cut)?;

    let fifth = Rational::new(1, 5);
    if rec.gap_separation.abs() <= fifth {
        failures.push(format!(
            "gap-closed scores {} and {} are within 1/5 of each other",
            rec.strong.gap_closed, rec.weak.gap_closed
        ));
    }
    if rec.strong.gap_closed != Rational::one() || rec.weak.gap_closed != fifth {
        failures.push(format!(
            "gap-closed pair ({}, {}) instead of (1, 1/5)",
            rec.strong.gap_closed, rec.weak.gap_closed
        ));
    }
    if rec.strong.tree_size != 1 {
        failures.push(format!("strong-cut tree has {} nodes instead of 1", rec.strong.tree_size));
    }
    if rec.weak.tree_size < 3 {
        failures.push(format!("weak-cut tree has {} nodes, below 3", rec.weak.tree_size));
    }

    Ok(ShatterReport {
        score: ScoreKind::Both,
        gamma: None,
        verdict: failures.is_empty(),
        records: vec![rec],
        labelings_checked: None,
        failures,
    })
}

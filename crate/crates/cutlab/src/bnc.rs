//! Exact branch-and-bound tree enumeration and the two cut-quality scores.
//!
//! The solver explores subproblems depth-first, branching on the
//! lowest-index fractional variable of each node's LP vertex and taking the
//! floor branch first. A node is pruned when its LP is infeasible, when its
//! LP bound is at most the incumbent value (ties discarded), or when its LP
//! vertex is integral (the incumbent is then updated). Branch bounds are
//! appended constraint rows, so every node reuses the one exact LP path.
//!
//! The two scores attached to a cut are the share of the integrality gap it
//! closes, `(z_LP - z_cut) / (z_LP - z_IP)`, and the tree-size pair
//! `(T_1, (T_0 - T_1) / T_0)` comparing the branch-and-bound tree with and
//! without the cut at the root. Both are computed in exact arithmetic and
//! only converted to floating point for training consumers.

use crate::cutgen::{tableau_cg_cuts, CutError};
use crate::instance::{Cut, IlpInstance};
use crate::rational::Rational;
use crate::simplex::{solve_lp, LpSolution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BncError {
    #[error("LP relaxation of {id} is unbounded")]
    UnboundedRelaxation { id: String },
    #[error("{id} has no feasible integer point")]
    IpInfeasible { id: String },
    #[error("{id} has zero integrality gap; gap-closed scores are undefined")]
    ZeroGap { id: String },
    #[error("tree search on {id} hit the node limit (baseline {baseline} nodes, with cut {with_cut:?})")]
    Truncated { id: String, baseline: usize, with_cut: Option<usize> },
    #[error("cut generation failed for {id}")]
    Cuts {
        id: String,
        #[source]
        source: CutError,
    },
}

/// Search limits and fixed exploration rules.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BncConfig {
    /// Maximum number of nodes whose LP may be solved before the search is
    /// cut short and the result flagged as truncated.
    pub node_limit: usize,
}

impl Default for BncConfig {
    fn default() -> Self {
        BncConfig { node_limit: 100_000 }
    }
}

/// Best integral solution found by the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    pub x: Vec<Rational>,
    pub value: Rational,
}

/// Outcome of one branch-and-bound run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BncResult {
    /// Number of nodes at which an LP was solved, root included.
    pub tree_size: usize,
    pub incumbent: Option<Incumbent>,
    /// True iff the node limit was reached while unexplored nodes remained.
    pub truncated: bool,
}

/// Exhaustive depth-first branch-and-bound over the integer points of
/// `inst` with `root_cuts` appended once at the root (and therefore active
/// in every node). Exact throughout; deterministic by construction.
pub fn solve_bnc(
    inst: &IlpInstance,
    root_cuts: &[Cut],
    cfg: &BncConfig,
) -> Result<BncResult, BncError> {
    assert!(cfg.node_limit >= 1, "node limit must be positive");
    let mut stack: Vec<Vec<Cut>> = vec![root_cuts.to_vec()];
    let mut incumbent: Option<Incumbent> = None;
    let mut tree_size = 0usize;
    let mut truncated = false;

    while let Some(cuts) = stack.pop() {
        if tree_size == cfg.node_limit {
            truncated = true;
            break;
        }
        tree_size += 1;
        let opt = match solve_lp(inst, &cuts) {
            LpSolution::Infeasible => continue,
            LpSolution::Unbounded => {
                // Children only append rows, so an unbounded LP can only be
                // the root; reject the instance either way.
                return Err(BncError::UnboundedRelaxation { id: inst.id.clone() });
            }
            LpSolution::Optimal(opt) => opt,
        };
        if let Some(inc) = &incumbent {
            if opt.objective <= inc.value {
                continue;
            }
        }
        let Some(j) = opt.x.iter().position(|v| !v.is_integer()) else {
            incumbent = Some(Incumbent { x: opt.x, value: opt.objective });
            continue;
        };
        let floor = opt.x[j].floor();
        let mut le_row = vec![Rational::zero(); inst.num_vars];
        le_row[j] = Rational::one();
        let mut ge_row = vec![Rational::zero(); inst.num_vars];
        ge_row[j] = Rational::from_int(-1);

        // Depth-first with the floor branch explored first, so the ceiling
        // child is pushed below it.
        let mut ge_cuts = cuts.clone();
        ge_cuts.push(Cut::new(ge_row, -(&floor + Rational::one())));
        stack.push(ge_cuts);
        let mut le_cuts = cuts;
        le_cuts.push(Cut::new(le_row, floor));
        stack.push(le_cuts);
    }

    Ok(BncResult { tree_size, incumbent, truncated })
}

/// Exact share of the integrality gap closed by `cut`:
/// `(z_LP - z_cut) / (z_LP - z_IP)`. Requires a strictly positive gap.
pub fn gap_closed_exact(inst: &IlpInstance, cut: &Cut) -> Result<Rational, BncError> {
    let (z_lp, z_ip) = lp_and_ip_values(inst, &BncConfig::default())?;
    gap_closed_from(inst, cut, &z_lp, &z_ip)
}

/// Floating-point view of [`gap_closed_exact`], guaranteed inside `[0, 1]`.
pub fn gap_closed_score(inst: &IlpInstance, cut: &Cut) -> Result<f64, BncError> {
    Ok(gap_closed_exact(inst, cut)?.to_f64())
}

/// Tree size with the cut at the root and the relative reduction against
/// the no-cut baseline: `(T_1, (T_0 - T_1) / T_0)`. The reduction may be
/// negative when the cut grows the tree.
pub fn tree_size_score(
    inst: &IlpInstance,
    cut: &Cut,
    cfg: &BncConfig,
) -> Result<(usize, Rational), BncError> {
    let baseline = solve_bnc(inst, &[], cfg)?;
    let with_cut = solve_bnc(inst, std::slice::from_ref(cut), cfg)?;
    if baseline.truncated || with_cut.truncated {
        return Err(BncError::Truncated {
            id: inst.id.clone(),
            baseline: baseline.tree_size,
            with_cut: Some(with_cut.tree_size),
        });
    }
    Ok((with_cut.tree_size, relative_reduction(baseline.tree_size, with_cut.tree_size)))
}

/// One tableau cut with both quality scores, exact and as floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCut {
    /// Index of the optimal-tableau row the cut was read from (0-based).
    pub row_index: usize,
    pub cut: Cut,
    pub gap_closed: Rational,
    pub gap_closed_f64: f64,
    pub tree_size_after: usize,
    pub relative_reduction: Rational,
    pub relative_reduction_f64: f64,
}

/// All tableau cuts of one instance, scored against the shared baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCutSet {
    pub instance_id: String,
    pub baseline_tree_size: usize,
    pub z_lp: Rational,
    pub z_ip: Rational,
    pub entries: Vec<ScoredCut>,
}

/// Scores every tableau cut of `inst`. The LP value, integer optimum, and
/// baseline tree are computed once and shared across cuts. An instance
/// whose tableau yields no cuts returns an empty entry list; a zero
/// integrality gap is only an error when there are cuts to score.
pub fn label_instance(inst: &IlpInstance, cfg: &BncConfig) -> Result<ScoredCutSet, BncError> {
    let baseline = solve_bnc(inst, &[], cfg)?;
    if baseline.truncated {
        return Err(BncError::Truncated {
            id: inst.id.clone(),
            baseline: baseline.tree_size,
            with_cut: None,
        });
    }
    let Some(Incumbent { value: z_ip, .. }) = baseline.incumbent else {
        return Err(BncError::IpInfeasible { id: inst.id.clone() });
    };
    let z_lp = solve_lp(inst, &[])
        .expect_optimal("baseline tree search already solved the root LP")
        .objective
        .clone();

    let cuts = tableau_cg_cuts(inst)
        .map_err(|source| BncError::Cuts { id: inst.id.clone(), source })?;
    if !cuts.is_empty() && z_lp == z_ip {
        return Err(BncError::ZeroGap { id: inst.id.clone() });
    }

    let mut entries = Vec::with_capacity(cuts.len());
    for (row_index, cut) in cuts {
        let gap_closed = gap_closed_from(inst, &cut, &z_lp, &z_ip)?;
        let with_cut = solve_bnc(inst, std::slice::from_ref(&cut), cfg)?;
        if with_cut.truncated {
            return Err(BncError::Truncated {
                id: inst.id.clone(),
                baseline: baseline.tree_size,
                with_cut: Some(with_cut.tree_size),
            });
        }
        let inc = with_cut
            .incumbent
            .as_ref()
            .unwrap_or_else(|| panic!("valid cut removed every integer point of {}", inst.id));
        assert_eq!(
            inc.value, z_ip,
            "valid cut changed the integer optimum of {}",
            inst.id
        );
        let relative_reduction = relative_reduction(baseline.tree_size, with_cut.tree_size);
        entries.push(ScoredCut {
            row_index,
            cut,
            gap_closed_f64: gap_closed.to_f64(),
            gap_closed,
            tree_size_after: with_cut.tree_size,
            relative_reduction_f64: relative_reduction.to_f64(),
            relative_reduction,
        });
    }
    Ok(ScoredCutSet {
        instance_id: inst.id.clone(),
        baseline_tree_size: baseline.tree_size,
        z_lp,
        z_ip,
        entries,
    })
}

fn relative_reduction(baseline: usize, with_cut: usize) -> Rational {
    Rational::new(baseline as i64 - with_cut as i64, baseline as i64)
}

fn lp_and_ip_values(inst: &IlpInstance, cfg: &BncConfig) -> Result<(Rational, Rational), BncError> {
    let z_lp = match solve_lp(inst, &[]) {
        LpSolution::Optimal(opt) => opt.objective,
        LpSolution::Infeasible => return Err(BncError::IpInfeasible { id: inst.id.clone() }),
        LpSolution::Unbounded => {
            return Err(BncError::UnboundedRelaxation { id: inst.id.clone() })
        }
    };
    let run = solve_bnc(inst, &[], cfg)?;
    if run.truncated {
        return Err(BncError::Truncated {
            id: inst.id.clone(),
            baseline: run.tree_size,
            with_cut: None,
        });
    }
    let Some(Incumbent { value: z_ip, .. }) = run.incumbent else {
        return Err(BncError::IpInfeasible { id: inst.id.clone() });
    };
    Ok((z_lp, z_ip))
}

fn gap_closed_from(
    inst: &IlpInstance,
    cut: &Cut,
    z_lp: &Rational,
    z_ip: &Rational,
) -> Result<Rational, BncError> {
    let gap = z_lp - z_ip;
    if gap.is_zero() {
        return Err(BncError::ZeroGap { id: inst.id.clone() });
    }
    debug_assert!(gap.is_positive(), "z_LP below z_IP would contradict LP relaxation");
    let z_cut = solve_lp(inst, std::slice::from_ref(cut))
        .expect_optimal("a valid cut keeps an IP-feasible instance feasible and bounded")
        .objective
        .clone();
    let closed = (z_lp - &z_cut) / gap;
    debug_assert!(
        !closed.is_negative() && closed <= Rational::one(),
        "gap closed {closed} outside [0, 1]"
    );
    Ok(closed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::TWO_VAR_DOC;
    use crate::rng::SplitMix64;
    use cutlab_testkit::{lattice_optimum, tree_by_recursive_enumeration, RefProblem};

    fn rat(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn doc_instance() -> IlpInstance {
        IlpInstance::from_json(TWO_VAR_DOC).unwrap()
    }

    fn oracle_problem(inst: &IlpInstance, cuts: &[Cut]) -> RefProblem {
        let mut p = RefProblem::from_instance_json(&inst.to_json()).unwrap();
        for cut in cuts {
            let coeffs: Vec<String> = cut.coeffs.iter().map(|r| r.to_string()).collect();
            p.push_row(&coeffs, &cut.rhs.to_string()).unwrap();
        }
        p
    }

    fn first_cut() -> Cut {
        Cut::new(vec![rat("4"), rat("7")], rat("35"))
    }

    fn second_cut() -> Cut {
        Cut::new(vec![rat("2"), rat("3")], rat("15"))
    }

    #[test]
    fn doc_example_tree_has_nine_nodes() {
        let inst = doc_instance();
        let got = solve_bnc(&inst, &[], &BncConfig::default()).unwrap();
        assert_eq!(got.tree_size, 9);
        assert!(!got.truncated);
        let inc = got.incumbent.unwrap();
        assert_eq!(inc.value, rat("40"));
        assert_eq!(inc.x, vec![rat("0"), rat("5")]);
    }

    #[test]
    fn doc_example_agrees_with_recursive_oracle() {
        let inst = doc_instance();
        for cuts in [vec![], vec![first_cut()], vec![second_cut()]] {
            let ours = solve_bnc(&inst, &cuts, &BncConfig::default()).unwrap();
            let oracle = tree_by_recursive_enumeration(&oracle_problem(&inst, &cuts));
            assert_eq!(ours.tree_size, oracle.tree_size, "cuts: {cuts:?}");
            let inc = ours.incumbent.unwrap();
            let (ox, ov) = oracle.incumbent.unwrap();
            assert_eq!(inc.value.to_string(), ov.to_string());
            let inc_x: Vec<String> = inc.x.iter().map(|v| v.to_string()).collect();
            let ox: Vec<String> = ox.iter().map(|v| v.to_string()).collect();
            assert_eq!(inc_x, ox);
        }
    }

    #[test]
    fn strong_cut_collapses_tree_to_root() {
        let inst = doc_instance();
        let got = solve_bnc(&inst, &[second_cut()], &BncConfig::default()).unwrap();
        assert_eq!(got.tree_size, 1);
        assert_eq!(got.incumbent.unwrap().value, rat("40"));
    }

    #[test]
    fn weak_cut_does_not_shrink_tree() {
        let inst = doc_instance();
        let baseline = solve_bnc(&inst, &[], &BncConfig::default()).unwrap();
        let with_cut = solve_bnc(&inst, &[first_cut()], &BncConfig::default()).unwrap();
        assert_eq!(with_cut.tree_size, 9);
        assert!(with_cut.tree_size >= baseline.tree_size);
        assert_eq!(with_cut.incumbent.unwrap().value, rat("40"));
    }

    #[test]
    fn infeasible_root_counts_one_node() {
        let doc = r#"{"id":"inf","n":1,"m":1,"A":[["1"]],"b":["-1"],"c":["1"]}"#;
        let inst = IlpInstance::from_json(doc).unwrap();
        let got = solve_bnc(&inst, &[], &BncConfig::default()).unwrap();
        assert_eq!(got.tree_size, 1);
        assert_eq!(got.incumbent, None);
        assert!(!got.truncated);
    }

    #[test]
    fn unbounded_relaxation_is_rejected() {
        let doc = r#"{"id":"unb","n":1,"m":1,"A":[["-1"]],"b":["0"],"c":["1"]}"#;
        let inst = IlpInstance::from_json(doc).unwrap();
        let err = solve_bnc(&inst, &[], &BncConfig::default()).unwrap_err();
        assert!(matches!(err, BncError::UnboundedRelaxation { .. }));
    }

    #[test]
    fn node_limit_truncates_only_while_nodes_remain() {
        let inst = doc_instance();
        let tight = solve_bnc(&inst, &[], &BncConfig { node_limit: 3 }).unwrap();
        assert!(tight.truncated);
        assert_eq!(tight.tree_size, 3);
        let almost = solve_bnc(&inst, &[], &BncConfig { node_limit: 8 }).unwrap();
        assert!(almost.truncated);
        assert_eq!(almost.tree_size, 8);
        let exact = solve_bnc(&inst, &[], &BncConfig { node_limit: 9 }).unwrap();
        assert!(!exact.truncated, "list empties exactly at the limit");
        assert_eq!(exact.tree_size, 9);
    }

    #[test]
    fn repeated_runs_are_identical() {
        let inst = doc_instance();
        let a = solve_bnc(&inst, &[first_cut()], &BncConfig::default()).unwrap();
        let b = solve_bnc(&inst, &[first_cut()], &BncConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gap_closed_of_documented_cuts() {
        let inst = doc_instance();
        assert_eq!(gap_closed_exact(&inst, &first_cut()).unwrap(), rat("1/5"));
        assert_eq!(gap_closed_exact(&inst, &second_cut()).unwrap(), rat("1"));
        let trivial = Cut::new(vec![rat("0"), rat("0")], rat("0"));
        assert_eq!(gap_closed_exact(&inst, &trivial).unwrap(), rat("0"));
        assert_eq!(gap_closed_score(&inst, &first_cut()).unwrap(), 0.2);
    }

    #[test]
    fn tree_score_of_documented_cuts() {
        let cfg = BncConfig::default();
        let inst = doc_instance();
        assert_eq!(tree_size_score(&inst, &second_cut(), &cfg).unwrap(), (1, rat("8/9")));
        assert_eq!(tree_size_score(&inst, &first_cut(), &cfg).unwrap(), (9, rat("0")));
        // A cut duplicating constraint row 0 leaves every node's polyhedron
        // unchanged.
        let duplicate = Cut::new(vec![rat("1"), rat("1")], rat("6"));
        assert_eq!(tree_size_score(&inst, &duplicate, &cfg).unwrap(), (9, rat("0")));
    }

    #[test]
    fn truncation_is_an_error_for_scores() {
        let inst = doc_instance();
        let err = tree_size_score(&inst, &first_cut(), &BncConfig { node_limit: 3 }).unwrap_err();
        let BncError::Truncated { baseline, with_cut, .. } = err else {
            panic!("expected truncation error, got {err}");
        };
        assert_eq!(baseline, 3);
        assert_eq!(with_cut, Some(3));
    }

    #[test]
    fn labeling_the_doc_example_scores_both_cuts() {
        let inst = doc_instance();
        let set = label_instance(&inst, &BncConfig::default()).unwrap();
        assert_eq!(set.instance_id, "paper-example-2d");
        assert_eq!(set.baseline_tree_size, 9);
        assert_eq!(set.z_lp, rat("165/4"));
        assert_eq!(set.z_ip, rat("40"));
        assert_eq!(set.entries.len(), 2);

        let first = &set.entries[0];
        assert_eq!(first.row_index, 0);
        assert_eq!(first.cut, first_cut());
        assert_eq!(first.gap_closed, rat("1/5"));
        assert_eq!(first.tree_size_after, 9);
        assert_eq!(first.relative_reduction, rat("0"));

        let second = &set.entries[1];
        assert_eq!(second.row_index, 1);
        assert_eq!(second.cut, second_cut());
        assert_eq!(second.gap_closed, rat("1"));
        assert_eq!(second.tree_size_after, 1);
        assert_eq!(second.relative_reduction, rat("8/9"));
        assert!((second.relative_reduction_f64 - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn labeling_round_trips_through_json() {
        let inst = doc_instance();
        let set = label_instance(&inst, &BncConfig::default()).unwrap();
        let json = serde_json::to_string(&set).unwrap();
        let back: ScoredCutSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn integral_vertex_labels_to_empty_entries() {
        let doc = r#"{"id":"int","n":1,"m":1,"A":[["1"]],"b":["2"],"c":["1"]}"#;
        let inst = IlpInstance::from_json(doc).unwrap();
        let set = label_instance(&inst, &BncConfig::default()).unwrap();
        assert!(set.entries.is_empty());
        assert_eq!(set.z_lp, set.z_ip);
    }

    #[test]
    fn zero_gap_with_cuts_is_an_error() {
        // max x1 s.t. 2 x1 <= 4: vertex x = 2 is integral but the basis
        // inverse entry 1/2 still yields the (useless) tableau cut x1 <= 2.
        let doc = r#"{"id":"zg","n":1,"m":1,"A":[["2"]],"b":["4"],"c":["1"]}"#;
        let inst = IlpInstance::from_json(doc).unwrap();
        let err = label_instance(&inst, &BncConfig::default()).unwrap_err();
        assert!(matches!(err, BncError::ZeroGap { .. }), "got {err}");
    }

    #[test]
    fn ip_infeasible_labeling_is_an_error() {
        // 4 x1 <= 2 and -4 x1 <= -1 force x1 in [1/4, 1/2]: LP-feasible but
        // integer-infeasible.
        let doc = r#"{"id":"noint","n":1,"m":2,"A":[["4"],["-4"]],"b":["2","-1"],"c":["1"]}"#;
        let inst = IlpInstance::from_json(doc).unwrap();
        let err = label_instance(&inst, &BncConfig::default()).unwrap_err();
        assert!(matches!(err, BncError::IpInfeasible { .. }), "got {err}");
    }

    /// 300 random box-bounded instances: the solver's incumbent matches
    /// lattice enumeration exactly, including the infeasible cases.
    #[test]
    fn random_instances_match_lattice_oracle() {
        let mut rng = SplitMix64::new(0xb17c0de);
        let mut feasible_seen = 0;
        for trial in 0..300 {
            let num_vars = rng.int_in(1, 5) as usize;
            let num_cons = rng.int_in(1, 5) as usize;
            let doc = cutlab_testkit::random_instance_doc(
                &mut |lo, hi| rng.int_in(lo, hi),
                &format!("bb-{trial}"),
                num_vars,
                num_cons,
                8,
                Some(4),
            );
            let inst = IlpInstance::from_json(&doc).unwrap();
            let got = solve_bnc(&inst, &[], &BncConfig::default()).unwrap();
            assert!(!got.truncated);
            let bounds = vec![(0i64, 4i64); inst.num_vars];
            let oracle = lattice_optimum(&oracle_problem(&inst, &[]), &bounds);
            match (got.incumbent, oracle) {
                (None, None) => {}
                (Some(inc), Some((_, z))) => {
                    assert_eq!(inc.value.to_string(), z.to_string(), "trial {trial}");
                    assert!(inst.satisfies(&inc.x), "trial {trial}: incumbent infeasible");
                    assert!(inc.x.iter().all(Rational::is_integer));
                    assert_eq!(inst.objective_value(&inc.x), inc.value);
                    feasible_seen += 1;
                }
                (ours, oracle) => panic!("trial {trial}: solver {ours:?} vs oracle {oracle:?}"),
            }
        }
        assert!(feasible_seen >= 60, "family too degenerate: {feasible_seen} feasible");
    }
}

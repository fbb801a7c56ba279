//! Workspace acceptance gate: one test per headline claim, each checked at
//! its stated tolerance and wall-clock budget.
//!
//! The randomized solver cross-checks share one corpus (built once, behind a
//! `OnceLock`) so the certificate test can verify exactly the LP solves the
//! other criteria performed, and the end-to-end pipeline criteria share one
//! full generate -> label -> train -> evaluate run for the same reason. Each
//! fixture records its own wall time, so the budget assertions do not depend
//! on which test happens to touch a fixture first.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use cutlab::bnc::{gap_closed_exact, label_instance, solve_bnc, BncConfig};
use cutlab::cutgen::{cg_cut_from_weights, is_valid_cut, tableau_cg_cuts, CgWeights};
use cutlab::gnn::{encode, CutGraph, GnnModel, GraphEdge, TargetScore, TrainConfig};
use cutlab::instgen::{filter_for_training, gen_set_cover, paper_example_2d, SetCoverParams};
use cutlab::rng::SplitMix64;
use cutlab::shattering::{verify_shattering, ScoreKind};
use cutlab::simplex::{solve_lp, verify_lp_certificate, LpOptimum, LpSolution};
use cutlab::{Cut, IlpInstance, Rational};
use cutlab_cli::artifacts::{instances_to_jsonl, write_file};
use cutlab_cli::checks::canonical_shatter_family;
use cutlab_cli::commands::{cmd_evaluate, cmd_label, cmd_train, column_name};
use cutlab_cli::eval::EvalReport;
use cutlab_testkit::{
    lattice_optimum, parse_rat, random_instance_doc, tree_by_recursive_enumeration, RefProblem,
};
use tempfile::TempDir;

fn rat(s: &str) -> Rational {
    s.parse().unwrap()
}

fn int_cut(coeffs: &[i64], rhs: i64) -> Cut {
    Cut::new(coeffs.iter().copied().map(Rational::from_int).collect(), Rational::from_int(rhs))
}

/// The two-variable documented example solves to its exact fractional
/// vertex, yields exactly the two documented tableau cuts, and re-solves to
/// the exact post-cut vertices. Budget: one second.
#[test]
fn worked_example_solves_exactly() {
    let start = Instant::now();
    let inst = paper_example_2d();

    let root = solve_lp(&inst, &[]);
    let root = root.expect_optimal("documented example has an optimal vertex");
    assert_eq!(root.x, vec![rat("9/4"), rat("15/4")], "root LP vertex");
    assert_eq!(root.objective, rat("165/4"), "root LP value");

    let cuts = tableau_cg_cuts(&inst).expect("fractional vertex yields tableau cuts");
    assert_eq!(
        cuts,
        vec![(0, int_cut(&[4, 7], 35)), (1, int_cut(&[2, 3], 15))],
        "both tableau rows produce their documented cuts, in row order",
    );

    let post0 = solve_lp(&inst, std::slice::from_ref(&cuts[0].1));
    let post0 = post0.expect_optimal("first cut keeps the region nonempty");
    assert_eq!(post0.x, vec![rat("7/3"), rat("11/3")], "vertex after the first cut");

    let post1 = solve_lp(&inst, std::slice::from_ref(&cuts[1].1));
    let post1 = post1.expect_optimal("second cut keeps the region nonempty");
    assert_eq!(post1.x, vec![rat("0"), rat("5")], "vertex after the second cut");

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}, budget 1s");
    println!("worked example: exact vertices and both tableau cuts in {elapsed:?}");
}

/// Scoring the documented example gives gap-closed (1/5, 1) at exact
/// distance 4/5 and with-cut tree sizes (9, 1), and the tree sizes agree
/// with the independent recursive enumeration oracle. Budget: one second.
#[test]
fn cut_scores_match_the_recursive_oracle() {
    let start = Instant::now();
    let inst = paper_example_2d();

    let scored = label_instance(&inst, &BncConfig::default()).expect("example labels cleanly");
    assert_eq!(scored.baseline_tree_size, 9, "no-cut baseline tree");
    assert_eq!(scored.z_lp, rat("165/4"));
    assert_eq!(scored.z_ip, rat("40"));
    assert_eq!(scored.entries.len(), 2);

    let weak = &scored.entries[0];
    let strong = &scored.entries[1];
    assert_eq!((weak.row_index, &weak.gap_closed, weak.tree_size_after), (0, &rat("1/5"), 9));
    assert_eq!((strong.row_index, &strong.gap_closed, strong.tree_size_after), (1, &rat("1"), 1));
    assert_eq!(&strong.gap_closed - &weak.gap_closed, rat("4/5"), "exact score distance");

    // The one-shot scorer must agree with the batch labeler.
    assert_eq!(gap_closed_exact(&inst, &weak.cut).unwrap(), rat("1/5"));
    assert_eq!(gap_closed_exact(&inst, &strong.cut).unwrap(), rat("1"));

    // Independent tree sizes by recursive enumeration over BigRational LPs.
    let base = RefProblem::from_instance_json(&inst.to_json()).unwrap();
    assert_eq!(tree_by_recursive_enumeration(&base).tree_size, 9, "oracle baseline tree");
    for entry in &scored.entries {
        let mut with_cut = base.clone();
        let coeffs: Vec<String> = entry.cut.coeffs.iter().map(Rational::to_string).collect();
        with_cut.push_row(&coeffs, &entry.cut.rhs.to_string()).unwrap();
        let oracle = tree_by_recursive_enumeration(&with_cut);
        assert_eq!(
            oracle.tree_size, entry.tree_size_after,
            "row {}: oracle tree disagrees with the production tree",
            entry.row_index,
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}, budget 1s");
    println!("scores (1/5, 1), distance 4/5, trees (9, 1) confirmed in {elapsed:?}");
}

/// The five-instance shattering family verifies at gamma 1/8, 1/4, and 3/8
/// for both scores: strong/weak cuts come out exactly as constructed, the
/// gap-closed pair is (1, 0), the weak tree is 3, the strong tree is 1 or 3
/// with the landed-on vertex of the degenerate optimal face reported, and
/// all 2^5 labelings are realized. Budget: five seconds.
#[test]
fn shattering_families_verify_at_three_gammas() {
    let start = Instant::now();
    for gamma in ["1/8", "1/4", "3/8"] {
        let family = canonical_shatter_family(&rat(gamma));
        let report = verify_shattering(&family, ScoreKind::Both)
            .unwrap_or_else(|err| panic!("gamma {gamma}: verifier failed: {err}"));
        assert!(report.verdict, "gamma {gamma}: {}", report.failures.join("; "));
        assert_eq!(report.records.len(), 5, "one record per direction");
        assert_eq!(report.labelings_checked, Some(32), "2^5 labelings enumerated");

        for rec in &report.records {
            let id = &rec.instance_id;
            assert_eq!(rec.strong.cut, int_cut(&[1, 1], 3), "{id}: strong cut");
            assert_eq!(rec.weak.cut, int_cut(&[1, 0], 3), "{id}: weak cut");
            assert_eq!(rec.strong.gap_closed, rat("1"), "{id}: strong cut closes the gap");
            assert_eq!(rec.weak.gap_closed, rat("0"), "{id}: weak cut closes nothing");
            assert_eq!(rec.weak.tree_size, 3, "{id}: weak tree");
            assert!(
                rec.strong.tree_size == 1 || rec.strong.tree_size == 3,
                "{id}: strong tree is {}, expected 1 or 3",
                rec.strong.tree_size,
            );
            assert_eq!(rec.strong.post_cut_vertex.len(), 2, "{id}: face vertex is reported");
            assert_eq!(
                rec.strong.vertex_integral,
                rec.strong.tree_size == 1,
                "{id}: the tree collapses to the root exactly when the solver \
                 lands on the integral vertex of the degenerate optimal face",
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}, budget 5s");
    println!("shattering verified at gamma 1/8, 1/4, 3/8 in {elapsed:?}");
}

/// One LP solve kept for the certificate criterion: the instance, the cuts
/// that were appended, and the optimum the solver returned.
struct SolvedLp {
    inst: IlpInstance,
    cuts: Vec<Cut>,
    opt: LpOptimum,
}

/// Shared randomized corpus: 300 tree-search cross-checks plus 500 cut
/// validity checks, with every explicit LP solve recorded.
struct RandomCorpus {
    search_infeasible: usize,
    search_elapsed: Duration,
    validity_cases: usize,
    validity_elapsed: Duration,
    lps: Vec<SolvedLp>,
}

static CORPUS: OnceLock<RandomCorpus> = OnceLock::new();

const SEARCH_CORPUS_SEED: u64 = 0x7ace;
const VALIDITY_CORPUS_SEED: u64 = 0xfade;

/// Box-bounded random instance: up to 5 variables and 5 base rows, entries
/// in [-4, 4], plus one `x_j <= var_bound` row per variable so lattice
/// enumeration and box validity checks stay finite.
fn random_boxed_instance(rng: &mut SplitMix64, id: &str, var_bound: i64) -> IlpInstance {
    let num_vars = rng.int_in(1, 5) as usize;
    let num_cons = rng.int_in(1, 5) as usize;
    let doc = {
        let mut draw = |lo: i64, hi: i64| rng.int_in(lo, hi);
        random_instance_doc(&mut draw, id, num_vars, num_cons, 4, Some(var_bound))
    };
    IlpInstance::from_json(&doc).expect("generated documents always parse")
}

/// Random rational weight in [0, 1] with denominator at most 12.
fn unit_weight(rng: &mut SplitMix64) -> Rational {
    let den = rng.int_in(1, 12);
    let num = rng.int_in(0, den);
    Rational::new(num, den)
}

fn build_random_corpus() -> RandomCorpus {
    let cfg = BncConfig::default();
    let mut lps = Vec::new();

    // Part one: exhaustive lattice enumeration agrees with the tree search.
    let search_start = Instant::now();
    let mut search_infeasible = 0usize;
    for k in 0..300u64 {
        let mut rng = SplitMix64::substream(SEARCH_CORPUS_SEED, k);
        let var_bound = rng.int_in(2, 6);
        let inst = random_boxed_instance(&mut rng, &format!("search-{k}"), var_bound);

        if let LpSolution::Optimal(opt) = solve_lp(&inst, &[]) {
            lps.push(SolvedLp { inst: inst.clone(), cuts: Vec::new(), opt });
        }

        let run = solve_bnc(&inst, &[], &cfg).expect("bound rows keep every relaxation bounded");
        assert!(!run.truncated, "{}: hit the node limit on a toy box", inst.id);

        let problem = RefProblem::from_instance_json(&inst.to_json()).unwrap();
        let bounds = vec![(0, var_bound); inst.num_vars];
        match (run.incumbent, lattice_optimum(&problem, &bounds)) {
            (None, None) => search_infeasible += 1,
            (Some(inc), Some((_, best))) => {
                assert!(inst.satisfies(&inc.x), "{}: incumbent violates a row", inst.id);
                assert!(
                    inc.x.iter().all(Rational::is_integer),
                    "{}: incumbent is fractional",
                    inst.id,
                );
                assert_eq!(
                    parse_rat(&inc.value.to_string()).unwrap(),
                    best,
                    "{}: tree search and lattice enumeration disagree",
                    inst.id,
                );
            }
            (inc, oracle) => panic!(
                "{}: tree search found an incumbent: {}; lattice found a point: {}",
                inst.id,
                inc.is_some(),
                oracle.is_some(),
            ),
        }
    }
    let search_elapsed = search_start.elapsed();

    // Part two: every cut from random rational weights in [0, 1]^m is valid.
    let validity_start = Instant::now();
    for k in 0..500u64 {
        let mut rng = SplitMix64::substream(VALIDITY_CORPUS_SEED, k);
        let var_bound = rng.int_in(2, 6);
        let inst = random_boxed_instance(&mut rng, &format!("validity-{k}"), var_bound);

        let u: Vec<Rational> = (0..inst.num_cons).map(|_| unit_weight(&mut rng)).collect();
        let weights = CgWeights::new(u).expect("weights are nonnegative by construction");
        let cut = cg_cut_from_weights(&inst, &weights).expect("arity matches by construction");

        let bounds = vec![(0, var_bound); inst.num_vars];
        assert_eq!(
            is_valid_cut(&inst, &cut, &bounds),
            Ok(true),
            "{}: cut {cut:?} from weights {weights:?} excludes a feasible integer point",
            inst.id,
        );

        if let LpSolution::Optimal(opt) = solve_lp(&inst, &[]) {
            lps.push(SolvedLp { inst: inst.clone(), cuts: Vec::new(), opt });
            if let LpSolution::Optimal(post) = solve_lp(&inst, std::slice::from_ref(&cut)) {
                lps.push(SolvedLp { inst: inst.clone(), cuts: vec![cut.clone()], opt: post });
            }
        }
    }
    let validity_elapsed = validity_start.elapsed();

    RandomCorpus { search_infeasible, search_elapsed, validity_cases: 500, validity_elapsed, lps }
}

fn random_corpus() -> &'static RandomCorpus {
    CORPUS.get_or_init(build_random_corpus)
}

/// On 300 random box-bounded instances (n, m <= 5) the branch-and-bound
/// incumbent value matches exhaustive lattice enumeration exactly, including
/// agreeing on infeasibility. Budget: two minutes.
#[test]
fn tree_search_agrees_with_exhaustive_lattice_enumeration() {
    let corpus = random_corpus();
    assert!(
        corpus.search_infeasible < 150,
        "corpus degenerated: {}/300 instances infeasible",
        corpus.search_infeasible,
    );
    assert!(
        corpus.search_elapsed < Duration::from_secs(120),
        "took {:?}, budget 2min",
        corpus.search_elapsed,
    );
    println!(
        "300 instances cross-checked ({} infeasible on both sides) in {:?}",
        corpus.search_infeasible, corpus.search_elapsed,
    );
}

/// On 500 random box-bounded instances, the cut generated from random
/// rational weights u in [0, 1]^m never excludes a feasible integer point
/// (checked by brute force over the box). Budget: two minutes.
#[test]
fn random_weight_cuts_never_exclude_feasible_points() {
    let corpus = random_corpus();
    assert_eq!(corpus.validity_cases, 500);
    assert!(
        corpus.validity_elapsed < Duration::from_secs(120),
        "took {:?}, budget 2min",
        corpus.validity_elapsed,
    );
    println!(
        "500 random-weight cuts validated by box enumeration in {:?}",
        corpus.validity_elapsed,
    );
}

/// Every optimal LP solve performed by the two randomized criteria carries a
/// basis certificate that verifies independently of the pivot path.
#[test]
fn every_recorded_lp_solve_carries_a_verifiable_certificate() {
    let corpus = random_corpus();
    assert!(
        corpus.lps.len() > 700,
        "only {} optimal LP solves recorded; the corpus should produce far more",
        corpus.lps.len(),
    );
    let start = Instant::now();
    for solved in &corpus.lps {
        assert!(
            verify_lp_certificate(&solved.inst, &solved.cuts, &solved.opt),
            "{}: certificate with {} extra cuts failed to verify",
            solved.inst.id,
            solved.cuts.len(),
        );
    }
    println!("{} LP certificates verified in {:?}", corpus.lps.len(), start.elapsed());
}

/// Random bipartite graph shaped like an encoded (instance, cut) pair.
fn random_graph(rng: &mut SplitMix64) -> CutGraph {
    let num_vars = rng.int_in(1, 4) as usize;
    let num_cons = rng.int_in(1, 4) as usize;
    let var_features = (0..num_vars)
        .map(|_| [rng.f64_symmetric(5.0), rng.f64_symmetric(5.0), rng.f64_symmetric(5.0)])
        .collect();
    let cons_features = vec![[1.0, 1.0, 1.0]; num_cons];
    let mut edges = Vec::new();
    for cons in 0..num_cons {
        for var in 0..num_vars {
            if rng.bernoulli(3, 5) {
                edges.push(GraphEdge { cons, var, weight: rng.f64_symmetric(3.0) });
            }
        }
    }
    CutGraph { var_features, cons_features, edges }
}

/// On 50 random (model, cut-set) pairs the hand-written gradients match
/// central finite differences to a relative error below 1e-4. Every cut set
/// has at least two graphs so the softmax couples the scores. Budget: one
/// minute.
#[test]
fn analytic_gradients_match_finite_differences() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0x96ad);
    for case in 0..50 {
        let rounds = rng.int_in(1, 2) as usize;
        let hidden = rng.int_in(2, 6) as usize;
        let mut model_rng = SplitMix64::new(rng.next_u64());
        let model = GnnModel::xavier(rounds, hidden, &mut model_rng);

        let k = rng.int_in(2, 4) as usize;
        let graphs: Vec<CutGraph> = (0..k).map(|_| random_graph(&mut rng)).collect();
        let raw: Vec<f64> = (0..k).map(|_| 0.05 + rng.f64_unit()).collect();
        let total: f64 = raw.iter().sum();
        let targets: Vec<f64> = raw.iter().map(|v| v / total).collect();

        let summary = model.grad_check(&graphs, &targets).expect("targets are normalized");
        assert!(
            summary.max_rel_error < 1e-4,
            "case {case} (rounds {rounds}, hidden {hidden}, {k} graphs): relative error {} \
             at parameter {} (analytic {}, numeric {})",
            summary.max_rel_error,
            summary.worst_param,
            summary.analytic,
            summary.numeric,
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}, budget 1min");
    println!("50 gradient checks below 1e-4 in {elapsed:?}");
}

/// Permuting an instance's constraint rows never moves the selector's score
/// for a cut by more than 1e-9, across 100 random (instance, cut, model)
/// cases run end to end through the graph encoder.
#[test]
fn constraint_order_never_changes_the_selectors_score() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0x0dd5);
    let mut shuffled = 0usize;
    for case in 0..100 {
        let num_vars = rng.int_in(1, 4) as usize;
        let num_cons = rng.int_in(2, 5) as usize;
        let doc = {
            let mut draw = |lo: i64, hi: i64| rng.int_in(lo, hi);
            random_instance_doc(&mut draw, &format!("perm-{case}"), num_vars, num_cons, 4, None)
        };
        let inst = IlpInstance::from_json(&doc).unwrap();

        let u: Vec<Rational> = (0..inst.num_cons).map(|_| unit_weight(&mut rng)).collect();
        let cut = cg_cut_from_weights(&inst, &CgWeights::new(u).unwrap()).unwrap();

        let hidden = rng.int_in(4, 8) as usize;
        let mut model_rng = SplitMix64::new(rng.next_u64());
        let model = GnnModel::xavier(2, hidden, &mut model_rng);
        let base = model.forward(&encode(&inst, &cut));

        let mut perm: Vec<usize> = (0..inst.num_cons).collect();
        rng.shuffle(&mut perm);
        if perm.iter().enumerate().any(|(slot, &row)| slot != row) {
            shuffled += 1;
        }
        let permuted = IlpInstance {
            id: inst.id.clone(),
            num_vars: inst.num_vars,
            num_cons: inst.num_cons,
            a: perm.iter().map(|&row| inst.a[row].clone()).collect(),
            b: perm.iter().map(|&row| inst.b[row].clone()).collect(),
            c: inst.c.clone(),
        };
        let drift = (model.forward(&encode(&permuted, &cut)) - base).abs();
        assert!(drift <= 1e-9, "case {case}: drift {drift} exceeds 1e-9");
    }
    assert!(shuffled >= 60, "only {shuffled}/100 permutations moved a row");
    println!("100 row permutations left scores unchanged in {:?}", start.elapsed());
}

/// One full generate -> label -> train -> evaluate run, kept in memory so the
/// trend and determinism criteria can share it.
struct PipelineRun {
    labeled: String,
    /// Checkpoint file bodies in creation order, keyed by file name.
    checkpoints: Vec<(String, String)>,
    /// Evaluation report bodies, one per training seed.
    reports: Vec<(u64, String)>,
    elapsed: Duration,
}

const TREND_GEN_SEED: u64 = 0x7e5701;
const TREND_RAW_COUNT: usize = 1700;
const TREND_DATASET_SIZE: usize = 400;
const TREND_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn trend_train_config(target: TargetScore, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 50,
        learning_rate: 1e-3,
        batch_size: 32,
        tau: 1.0,
        target,
        seed,
        rounds: 2,
        hidden: 16,
    }
}

fn run_trend_pipeline() -> PipelineRun {
    let start = Instant::now();
    let dir = TempDir::new().expect("temp dir");
    let root = dir.path();

    let params = SetCoverParams {
        elements: 15,
        sets: 25,
        coverage_num: 1,
        coverage_den: 4,
        cost_min: 1,
        cost_max: 100,
    };
    let raw = gen_set_cover(&params, TREND_GEN_SEED, TREND_RAW_COUNT).expect("valid coverage");
    let (mut kept, _drops) = filter_for_training(raw, &BncConfig::default());
    assert!(
        kept.len() >= TREND_DATASET_SIZE,
        "keep rate fell: {} of {TREND_RAW_COUNT} survived the training filter",
        kept.len(),
    );
    kept.truncate(TREND_DATASET_SIZE);

    let instances = root.join("instances.jsonl");
    write_file(&instances, &instances_to_jsonl(&kept)).unwrap();

    let labeled = root.join("labeled.jsonl");
    let label_run = cmd_label(&instances, &labeled, BncConfig::default().node_limit, 1).unwrap();
    assert_eq!(label_run.manifest.records, TREND_DATASET_SIZE);
    assert_eq!(label_run.manifest.failed, 0, "every filtered instance must label cleanly");
    let labeled_text = std::fs::read_to_string(&labeled).unwrap();

    let mut checkpoints = Vec::new();
    let mut reports = Vec::new();
    for seed in TREND_SEEDS {
        let mut seed_checkpoints: Vec<PathBuf> = Vec::new();
        for target in [TargetScore::GapClosed, TargetScore::TreeReduction] {
            let name = format!("seed{seed}-{}.ckpt", column_name(target));
            let path = root.join(&name);
            cmd_train(&labeled, &trend_train_config(target, seed), &path).unwrap();
            checkpoints.push((name, std::fs::read_to_string(&path).unwrap()));
            seed_checkpoints.push(path);
        }
        let report_path = root.join(format!("report-seed{seed}.json"));
        cmd_evaluate(&labeled, &seed_checkpoints, seed, Some(&report_path)).unwrap();
        reports.push((seed, std::fs::read_to_string(&report_path).unwrap()));
    }

    PipelineRun { labeled: labeled_text, checkpoints, reports, elapsed: start.elapsed() }
}

static TREND: OnceLock<PipelineRun> = OnceLock::new();

fn trend_run() -> &'static PipelineRun {
    TREND.get_or_init(run_trend_pipeline)
}

/// On 400 set-cover instances (15 elements, 25 sets; 300 train / 100 test),
/// for at least four of five training seeds both learned selectors sit a
/// relative 3% above the per-instance optimal average tree size and a
/// relative 3% below the random baseline, and the two learned targets land
/// within a relative 15% of each other on their five-seed means. Budget:
/// thirty minutes for the whole pipeline.
#[test]
fn learned_selector_lands_between_optimal_and_random() {
    let run = trend_run();
    assert!(
        run.elapsed < Duration::from_secs(30 * 60),
        "pipeline took {:?}, budget 30min",
        run.elapsed,
    );

    let mut passing = 0usize;
    let mut gap_means = 0.0;
    let mut tree_means = 0.0;
    for (seed, text) in &run.reports {
        let report: EvalReport = serde_json::from_str(text).unwrap();
        assert_eq!(report.total_records, TREND_DATASET_SIZE);
        assert_eq!(report.test_start, 300, "train/test split is the last quarter");
        assert_eq!(report.test_records, 100);
        assert_eq!(report.evaluated, 100, "seed {seed}: every test record is usable");

        let optimal = report.average("optimal").unwrap();
        let random = report.average("random").unwrap();
        let gap = report.average("gnn-gap-closed").unwrap();
        let tree = report.average("gnn-tree-reduction").unwrap();
        gap_means += gap / TREND_SEEDS.len() as f64;
        tree_means += tree / TREND_SEEDS.len() as f64;

        let above_optimal = gap >= 1.03 * optimal && tree >= 1.03 * optimal;
        let below_random = random >= 1.03 * gap && random >= 1.03 * tree;
        if above_optimal && below_random {
            passing += 1;
        }
        println!(
            "seed {seed}: optimal {optimal:.3} | gnn-gap {gap:.3} | gnn-tree {tree:.3} | \
             random {random:.3} | 3% margins {}",
            if above_optimal && below_random { "ok" } else { "MISSED" },
        );
    }
    assert!(passing >= 4, "strategy ordering held for {passing}/5 seeds, need at least 4");

    let spread = (gap_means - tree_means).abs();
    assert!(
        spread <= 0.15 * tree_means,
        "five-seed means diverge: gap target {gap_means:.3} vs tree target {tree_means:.3}",
    );
    println!(
        "{passing}/5 seeds pass; five-seed means {gap_means:.3} (gap) vs {tree_means:.3} \
         (tree); pipeline {:?}",
        run.elapsed,
    );
}

/// Rerunning the complete pipeline from the same seeds in a fresh directory
/// reproduces the labeled dataset, every checkpoint, and every evaluation
/// report byte for byte.
#[test]
fn pipeline_rerun_is_byte_identical() {
    let first = trend_run();
    let second = run_trend_pipeline();

    assert!(first.labeled == second.labeled, "labeled dataset bytes differ between runs");
    assert_eq!(first.checkpoints.len(), second.checkpoints.len());
    for ((name, body), (second_name, second_body)) in
        first.checkpoints.iter().zip(&second.checkpoints)
    {
        assert_eq!(name, second_name);
        assert!(body == second_body, "checkpoint {name} differs between runs");
    }
    assert_eq!(first.reports.len(), second.reports.len());
    for ((seed, body), (second_seed, second_body)) in first.reports.iter().zip(&second.reports) {
        assert_eq!(seed, second_seed);
        assert!(body == second_body, "evaluation report for seed {seed} differs between runs");
    }
    println!(
        "labeled dataset, {} checkpoints, and {} reports reproduced byte for byte",
        first.checkpoints.len(),
        first.reports.len(),
    );
}

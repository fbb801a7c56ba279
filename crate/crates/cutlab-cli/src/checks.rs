//! Regression checks over the documented two-variable example and the
//! strong/weak cut family, runnable from the command line.

use cutlab::bnc::gap_closed_exact;
use cutlab::cutgen::tableau_cg_cuts;
use cutlab::instgen::paper_example_2d;
use cutlab::shattering::{verify_shattering, ScoreKind, ShatterConfig, ShatterError, ShatterReport};
use cutlab::simplex::{solve_lp, LpSolution};
use cutlab::{Cut, Rational};

/// One line of the checklist.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Checklist over every documented exact quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperCheckReport {
    pub checks: Vec<CheckLine>,
}

impl PaperCheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            out.push_str(&format!("{mark}  {:<24} {}\n", c.name, c.detail));
        }
        out.push_str(if self.passed() { "all checks passed\n" } else { "CHECKS FAILED\n" });
        out
    }
}

fn rat(s: &str) -> Rational {
    s.parse().expect("literal rational")
}

fn fmt_point(x: &[Rational]) -> String {
    let coords: Vec<String> = x.iter().map(Rational::to_string).collect();
    format!("({})", coords.join(", "))
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckLine {
    CheckLine { name, passed, detail }
}

/// Re-verifies the documented example end to end: root LP vertex, the two
/// tableau cuts, the post-cut vertices, the gap-closed pair, and the
/// strong/weak family at three interior gamma values. Pure computation; the
/// caller turns a failed report into a nonzero exit.
pub fn paper_check() -> PaperCheckReport {
    let mut checks = Vec::new();
    let inst = paper_example_2d();

    // Root relaxation.
    match solve_lp(&inst, &[]) {
        LpSolution::Optimal(opt) => {
            let want_x = [rat("9/4"), rat("15/4")];
            let ok = opt.x == want_x && opt.objective == rat("165/4");
            checks.push(check(
                "lp-vertex",
                ok,
                format!("x* = {}, z = {}", fmt_point(&opt.x), opt.objective),
            ));
        }
        other => {
            checks.push(check("lp-vertex", false, format!("solver returned {other:?}")));
        }
    }

    // The two tableau cuts, in tableau row order.
    let cuts = match tableau_cg_cuts(&inst) {
        Ok(cuts) => {
            let want = vec![
                (0, Cut::new(vec![rat("4"), rat("7")], rat("35"))),
                (1, Cut::new(vec![rat("2"), rat("3")], rat("15"))),
            ];
            let ok = cuts == want;
            let shown: Vec<String> = cuts
                .iter()
                .map(|(row, cut)| {
                    format!(
                        "row {row}: {}x1 + {}x2 <= {}",
                        cut.coeffs[0], cut.coeffs[1], cut.rhs
                    )
                })
                .collect();
            checks.push(check("tableau-cuts", ok, shown.join("; ")));
            if ok {
                Some(cuts)
            } else {
                None
            }
        }
        Err(err) => {
            checks.push(check("tableau-cuts", false, format!("cut generation failed: {err}")));
            None
        }
    };

    if let Some(cuts) = &cuts {
        // Re-solve after each cut and compare the vertices moved to.
        let expected = [
            ("post-cut-vertex-1", vec![rat("7/3"), rat("11/3")]),
            ("post-cut-vertex-2", vec![rat("0"), rat("5")]),
        ];
        for ((name, want), (_, cut)) in expected.into_iter().zip(cuts) {
            match solve_lp(&inst, std::slice::from_ref(cut)) {
                LpSolution::Optimal(opt) => {
                    checks.push(check(name, opt.x == want, fmt_point(&opt.x)));
                }
                other => {
                    checks.push(check(name, false, format!("solver returned {other:?}")));
                }
            }
        }

        // Fraction of the integrality gap each cut closes.
        let gaps: Result<Vec<Rational>, _> =
            cuts.iter().map(|(_, cut)| gap_closed_exact(&inst, cut)).collect();
        match gaps {
            Ok(gaps) => {
                let ok = gaps == [rat("1/5"), rat("1")];
                let shown: Vec<String> = gaps.iter().map(Rational::to_string).collect();
                checks.push(check("gap-closed-pair", ok, format!("({})", shown.join(", "))));
            }
            Err(err) => {
                checks.push(check("gap-closed-pair", false, format!("scoring failed: {err}")));
            }
        }
    }

    // The strong/weak family at three interior gamma values.
    for (name, gamma) in [
        ("shattering-gamma-1/8", "1/8"),
        ("shattering-gamma-1/4", "1/4"),
        ("shattering-gamma-3/8", "3/8"),
    ] {
        match verify_shattering(&canonical_shatter_family(&rat(gamma)), ScoreKind::Both) {
            Ok(report) => {
                let detail = if report.verdict {
                    format!(
                        "{} instances, {} labelings realized",
                        report.records.len(),
                        report.labelings_checked.unwrap_or(0)
                    )
                } else {
                    report.failures.join("; ")
                };
                checks.push(check(name, report.verdict, detail));
            }
            Err(err) => checks.push(check(name, false, format!("verifier failed: {err}"))),
        }
    }

    PaperCheckReport { checks }
}

/// The fixed direction set used by command-line shattering runs: five
/// componentwise-nonpositive directions, mixing strict negatives with zero
/// components. The direction row is satisfied by every nonnegative point,
/// so family members differ only in data the cut weights ignore — which is
/// exactly what the shattering argument needs.
pub fn canonical_shatter_family(gamma: &Rational) -> ShatterConfig {
    let dir = |a: i64, b: i64| [Rational::from_int(a), Rational::from_int(b)];
    ShatterConfig {
        gamma: gamma.clone(),
        directions: vec![dir(-1, -1), dir(-2, -1), dir(-1, -3), dir(0, -2), dir(-4, -4)],
    }
}

/// Runs the shattering verifier over the canonical family at each gamma.
pub fn run_shattering(
    gammas: &[Rational],
    score: ScoreKind,
) -> Result<Vec<ShatterReport>, ShatterError> {
    gammas.iter().map(|g| verify_shattering(&canonical_shatter_family(g), score)).collect()
}

/// Plain-text rendering of one shattering report.
pub fn render_shatter_report(report: &ShatterReport) -> String {
    let mut out = String::new();
    let gamma = report.gamma.as_ref().map(Rational::to_string).unwrap_or_else(|| "-".into());
    let verdict = if report.verdict { "ok" } else { "FAIL" };
    let labelings = match report.labelings_checked {
        Some(n) => format!("{n} labelings realized"),
        None => "per-instance separation only (family too large to enumerate)".into(),
    };
    out.push_str(&format!(
        "gamma {gamma}, score {:?}: {verdict} ({} instances, {labelings})\n",
        report.score,
        report.records.len()
    ));
    for rec in &report.records {
        out.push_str(&format!(
            "  {}: strong gap {} tree {} vertex {}; weak gap {} tree {} vertex {}\n",
            rec.instance_id,
            rec.strong.gap_closed,
            rec.strong.tree_size,
            fmt_point(&rec.strong.post_cut_vertex),
            rec.weak.gap_closed,
            rec.weak.tree_size,
            fmt_point(&rec.weak.post_cut_vertex),
        ));
    }
    for failure in &report.failures {
        out.push_str(&format!("  failure: {failure}\n"));
    }
    out
}

//! Seeded generators for the benchmark instance families.
//!
//! Each instance is drawn from its own RNG substream
//! (`SplitMix64::substream(seed, k)` for the k-th instance), so a family is
//! reproducible from `(family parameters, seed)` alone and instances can be
//! regenerated individually. Minimization problems are negated into the
//! canonical `max { c'x : Ax <= b, x >= 0 }` form; binary variables get
//! explicit `x_j <= 1` rows.

use crate::bnc::{solve_bnc, BncConfig};
use crate::instance::IlpInstance;
use crate::rational::Rational;
use crate::rng::SplitMix64;
use crate::shattering::{build_shatter_instance, ShatterError};
use crate::simplex::{solve_lp, LpSolution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("element {element} of {id} cannot reach coverage {needed} after 1000 draws (p = {num}/{den})")]
    CoverageUnsatisfiable { id: String, element: usize, needed: usize, num: u64, den: u64 },
    #[error("coverage probability must be in (0, 1], got {num}/{den}")]
    BadCoverage { num: u64, den: u64 },
    #[error(transparent)]
    Shatter(#[from] ShatterError),
}

/// Set-cover family: `elements` ground elements, one binary variable per
/// set, membership Bernoulli(`coverage_num / coverage_den`), integer costs
/// uniform on `[cost_min, cost_max]`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SetCoverParams {
    pub elements: usize,
    pub sets: usize,
    pub coverage_num: u64,
    pub coverage_den: u64,
    pub cost_min: i64,
    pub cost_max: i64,
}

impl Default for SetCoverParams {
    fn default() -> Self {
        SetCoverParams {
            elements: 30,
            sets: 50,
            coverage_num: 1,
            coverage_den: 5,
            cost_min: 1,
            cost_max: 100,
        }
    }
}

/// Uncapacitated facility location: binary open decisions and assignments,
/// integer costs uniform on the given ranges.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FacilityParams {
    pub facilities: usize,
    pub clients: usize,
    pub open_cost_min: i64,
    pub open_cost_max: i64,
    pub assign_cost_min: i64,
    pub assign_cost_max: i64,
}

impl Default for FacilityParams {
    fn default() -> Self {
        FacilityParams {
            facilities: 10,
            clients: 10,
            open_cost_min: 20,
            open_cost_max: 70,
            assign_cost_min: 1,
            assign_cost_max: 20,
        }
    }
}

/// Worst-case two-cut construction family: fixed `gamma`, directions drawn
/// uniformly from `[-direction_bound, 0]^2`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ShatterFamilyParams {
    pub gamma: Rational,
    pub direction_bound: i64,
}

impl Default for ShatterFamilyParams {
    fn default() -> Self {
        ShatterFamilyParams { gamma: Rational::new(1, 4), direction_bound: 4 }
    }
}

/// Which family to draw from, with its parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyConfig {
    SetCover(SetCoverParams),
    FacilityLocation(FacilityParams),
    /// The documented two-variable example; always a single instance.
    Paper2d,
    Shatter(ShatterFamilyParams),
}

/// Full generation request: identical configs generate bit-identical
/// instance sequences.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub count: usize,
    #[serde(flatten)]
    pub family: FamilyConfig,
}

/// Generate `cfg.count` instances of the configured family (the constant
/// `Paper2d` family always yields exactly one).
pub fn generate(cfg: &GenConfig) -> Result<Vec<IlpInstance>, GenError> {
    match &cfg.family {
        FamilyConfig::SetCover(params) => gen_set_cover(params, cfg.seed, cfg.count),
        FamilyConfig::FacilityLocation(params) => {
            Ok(gen_facility_location(params, cfg.seed, cfg.count))
        }
        FamilyConfig::Paper2d => Ok(vec![paper_example_2d()]),
        FamilyConfig::Shatter(params) => gen_shatter_family(params, cfg.seed, cfg.count),
    }
}

/// Random set-cover instances in canonical form: variables `x_j` choose
/// sets; rows `-sum_{j covers e} x_j <= -1` (cover every element) and
/// `x_j <= 1`; objective `max sum -cost_j x_j`. Every element's membership
/// row is redrawn until it is covered by at least `min(2, sets)` sets, so
/// instances are integer-feasible with room for nontrivial covers.
pub fn gen_set_cover(
    params: &SetCoverParams,
    seed: u64,
    count: usize,
) -> Result<Vec<IlpInstance>, GenError> {
    let (num, den) = (params.coverage_num, params.coverage_den);
    if num == 0 || num > den {
        return Err(GenError::BadCoverage { num, den });
    }
    let needed = params.sets.min(2);
    (0..count)
        .map(|k| {
            let mut rng = SplitMix64::substream(seed, k as u64);
            let id = format!("setcover-{seed}-{k}");
            let mut membership: Vec<Vec<bool>> = Vec::with_capacity(params.elements);
            for element in 0..params.elements {
                let row = (0..1000)
                    .map(|_| -> Vec<bool> {
                        (0..params.sets).map(|_| rng.bernoulli(num, den)).collect()
                    })
                    .find(|row| row.iter().filter(|&&m| m).count() >= needed)
                    .ok_or(GenError::CoverageUnsatisfiable {
                        id: id.clone(),
                        element,
                        needed,
                        num,
                        den,
                    })?;
                membership.push(row);
            }
            let costs: Vec<i64> =
                (0..params.sets).map(|_| rng.int_in(params.cost_min, params.cost_max)).collect();

            let mut a: Vec<Vec<Rational>> = membership
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&m| if m { Rational::from_int(-1) } else { Rational::zero() })
                        .collect()
                })
                .collect();
            let mut b = vec![Rational::from_int(-1); params.elements];
            for j in 0..params.sets {
                let mut bound = vec![Rational::zero(); params.sets];
                bound[j] = Rational::one();
                a.push(bound);
                b.push(Rational::one());
            }
            Ok(IlpInstance {
                id,
                num_vars: params.sets,
                num_cons: params.elements + params.sets,
                a,
                b,
                c: costs.iter().map(|&cost| Rational::from_int(-cost)).collect(),
            })
        })
        .collect()
}

/// Random uncapacitated facility-location instances in canonical form.
/// Variables are `y_i` (open facility i) followed by `x_ij` in facility-major
/// order (assign client j to facility i). Rows: linking `x_ij - y_i <= 0`,
/// then per client the split equality `sum_i x_ij = 1` as a `<=`/`>=` pair,
/// then `v <= 1` for every variable. Objective: negated total cost.
pub fn gen_facility_location(params: &FacilityParams, seed: u64, count: usize) -> Vec<IlpInstance> {
    let nf = params.facilities;
    let nc = params.clients;
    let num_vars = nf + nf * nc;
    let x_col = |i: usize, j: usize| nf + i * nc + j;
    (0..count)
        .map(|k| {
            let mut rng = SplitMix64::substream(seed, k as u64);
            let open_costs: Vec<i64> =
                (0..nf).map(|_| rng.int_in(params.open_cost_min, params.open_cost_max)).collect();
            let assign_costs: Vec<i64> = (0..nf * nc)
                .map(|_| rng.int_in(params.assign_cost_min, params.assign_cost_max))
                .collect();

            let mut a: Vec<Vec<Rational>> = Vec::with_capacity(nf * nc + 2 * nc + num_vars);
            let mut b: Vec<Rational> = Vec::with_capacity(a.capacity());
            for i in 0..nf {
                for j in 0..nc {
                    let mut row = vec![Rational::zero(); num_vars];
                    row[x_col(i, j)] = Rational::one();
                    row[i] = Rational::from_int(-1);
                    a.push(row);
                    b.push(Rational::zero());
                }
            }
            for j in 0..nc {
                let mut le = vec![Rational::zero(); num_vars];
                for i in 0..nf {
                    le[x_col(i, j)] = Rational::one();
                }
                let ge: Vec<Rational> = le.iter().map(|v| -v).collect();
                a.push(le);
                b.push(Rational::one());
                a.push(ge);
                b.push(Rational::from_int(-1));
            }
            for v in 0..num_vars {
                let mut bound = vec![Rational::zero(); num_vars];
                bound[v] = Rational::one();
                a.push(bound);
                b.push(Rational::one());
            }

            let mut c: Vec<Rational> =
                open_costs.iter().map(|&f| Rational::from_int(-f)).collect();
            c.extend(assign_costs.iter().map(|&w| Rational::from_int(-w)));
            IlpInstance {
                id: format!("facility-{seed}-{k}"),
                num_vars,
                num_cons: a.len(),
                a,
                b,
                c,
            }
        })
        .collect()
}

/// The documented two-variable instance:
/// `max 5 x1 + 8 x2` s.t. `x1 + x2 <= 6`, `5 x1 + 9 x2 <= 45`.
pub fn paper_example_2d() -> IlpInstance {
    IlpInstance::from_json(crate::instance::TWO_VAR_DOC)
        .expect("embedded document is well-formed")
}

fn gen_shatter_family(
    params: &ShatterFamilyParams,
    seed: u64,
    count: usize,
) -> Result<Vec<IlpInstance>, GenError> {
    (0..count)
        .map(|k| {
            let mut rng = SplitMix64::substream(seed, k as u64);
            let direction = [
                Rational::from_int(rng.int_in(-params.direction_bound, 0)),
                Rational::from_int(rng.int_in(-params.direction_bound, 0)),
            ];
            Ok(build_shatter_instance(
                &direction,
                &params.gamma,
                &format!("shatter-{seed}-{k}"),
            )?)
        })
        .collect()
}

/// Why an instance was removed from a training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropReason {
    /// The root LP vertex is already integral; there is nothing to cut.
    IntegralLpVertex,
    /// `z_LP = z_IP`, so the gap-closed score divides by zero.
    ZeroGap,
    /// No feasible integer point (or no feasible LP point at all).
    IpInfeasible,
    /// The LP relaxation is unbounded; scores are undefined.
    UnboundedRelaxation,
    /// The baseline tree search hit the node limit.
    TreeBudgetExceeded,
}

/// One dropped instance with its reason, for dataset manifests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropRecord {
    pub id: String,
    pub reason: DropReason,
}

/// Splits instances into those usable for score labeling and those that a
/// labeler would reject, with the reason recorded per drop.
pub fn filter_for_training(
    insts: Vec<IlpInstance>,
    cfg: &BncConfig,
) -> (Vec<IlpInstance>, Vec<DropRecord>) {
    let mut kept = Vec::with_capacity(insts.len());
    let mut dropped = Vec::new();
    for inst in insts {
        match training_drop_reason(&inst, cfg) {
            None => kept.push(inst),
            Some(reason) => dropped.push(DropRecord { id: inst.id, reason }),
        }
    }
    (kept, dropped)
}

fn training_drop_reason(inst: &IlpInstance, cfg: &BncConfig) -> Option<DropReason> {
    let opt = match solve_lp(inst, &[]) {
        LpSolution::Infeasible => return Some(DropReason::IpInfeasible),
        LpSolution::Unbounded => return Some(DropReason::UnboundedRelaxation),
        LpSolution::Optimal(opt) => opt,
    };
    if opt.x.iter().all(Rational::is_integer) {
        return Some(DropReason::IntegralLpVertex);
    }
    let baseline = match solve_bnc(inst, &[], cfg) {
        Ok(run) => run,
        // The unbounded case was already handled above; treat any other
        // solver rejection as unusable for training.
        Err(_) => return Some(DropReason::UnboundedRelaxation),
    };
    if baseline.truncated {
        return Some(DropReason::TreeBudgetExceeded);
    }
    let Some(incumbent) = baseline.incumbent else {
        return Some(DropReason::IpInfeasible);
    };
    if incumbent.value == opt.objective {
        return Some(DropReason::ZeroGap);
    }
    None
}

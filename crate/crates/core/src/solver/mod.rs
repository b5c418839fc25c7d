//! Exact solvers for the canonical and templated assembly index.
//!
//! Both searches deepen iteratively on plan cost, seeded by a greedy upper
//! bound: every cost below the seed is either refuted exhaustively or the
//! search stops on its budget and reports the best witness found so far.
//! States are sets of assembled objects.  Because a concatenation is
//! strictly longer than its operands and an instantiation either grows or
//! strictly loses wildcards, every plan can be reordered so produced objects
//! ascend in a fixed total order; the searches enumerate only ascending
//! sequences, visiting each assembled set exactly once per deepening
//! iteration.

mod canonical;
mod oracle;
mod templated;

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::builder::PlanBuilder;
use crate::plan::{AssemblyPlan, PlanMode};
use crate::universe::TargetString;

pub use oracle::brute_force_oracle;

/// Knobs for the exact searches (and the template miner, which shares the
/// template bounds).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchConfig {
    /// Stop deepening beyond this cost; the result degrades to an upper
    /// bound when the optimum lies above it.
    pub max_cost: Option<usize>,
    /// Longest template admitted to the search (`None` = target length;
    /// clamped to at least 2).
    pub template_max_len: Option<usize>,
    /// Most wildcards per admitted template.
    pub template_max_stars: usize,
    /// Admit templates containing `**`.
    pub allow_adjacent_stars: bool,
    /// Let `Instantiate` fillers be templates as well as literals.
    pub allow_template_fillers: bool,
    /// Force sequential search (stable witness tie-breaking).
    pub deterministic: bool,
    /// Worker-count hint for the canonical search; the templated search is
    /// always sequential.
    pub parallelism: usize,
    /// Wall-clock budget; on expiry the best-so-far witness is returned.
    #[serde(with = "duration_secs")]
    pub time_budget: Option<Duration>,
}

mod duration_secs {
    use serde::Serializer;
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&d.as_secs_f64()),
            None => s.serialize_none(),
        }
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_cost: None,
            template_max_len: None,
            template_max_stars: 4,
            allow_adjacent_stars: true,
            allow_template_fillers: false,
            deterministic: true,
            parallelism: 1,
            time_budget: None,
        }
    }
}

impl SearchConfig {
    pub fn effective_template_max_len(&self, target_len: usize) -> usize {
        self.template_max_len.unwrap_or(target_len).max(2)
    }

    /// True when the configured template bounds admit every object the
    /// templated universe can contain for this target.
    pub fn covers_full_universe(&self, target_len: usize) -> bool {
        self.effective_template_max_len(target_len) >= target_len
            && self.template_max_stars >= target_len.saturating_sub(1)
            && self.allow_adjacent_stars
            && self.allow_template_fillers
    }
}

/// Whether a reported value is known minimal for the configured universe.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimality {
    /// Every smaller cost was refuted exhaustively (for the templated index
    /// this additionally requires bounds that cover the full universe).
    Proved,
    UpperBoundOnly,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub value: usize,
    pub witness: AssemblyPlan,
    pub optimal: Optimality,
    pub nodes_expanded: u64,
    pub elapsed: Duration,
}

/// `ceil(log2 |w|)`: each concatenation at most doubles the longest object,
/// so no plan beats this many steps.
pub fn asi_lower_bound(w: &TargetString) -> usize {
    let n = w.len();
    if n <= 1 {
        0
    } else {
        ((n - 1).ilog2() + 1) as usize
    }
}

/// Growth-rate lower bound for templated plans: one step turns objects of
/// length `m` into at most `m + s_max * (m - 1) <= m * (1 + s_max)`.
fn tai_lower_bound(n: usize, max_stars: usize) -> usize {
    let factor = 1 + max_stars.max(1);
    let mut reach = 1usize;
    let mut steps = 0;
    while reach < n {
        reach = reach.saturating_mul(factor);
        steps += 1;
    }
    steps
}

/// Greedy canonical upper bound: longest-repeat factoring with reuse.
/// The returned plan is valid; its cost is an upper bound for the canonical
/// index (and, re-tagged templated, for the templated index).
pub fn greedy_concat_upper(w: &TargetString) -> AssemblyPlan {
    let mut builder = PlanBuilder::new(w, PlanMode::Canonical);
    builder.assemble(w.text());
    builder.finish()
}

fn checked_result(
    value: usize,
    witness: AssemblyPlan,
    optimal: Optimality,
    nodes_expanded: u64,
    elapsed: Duration,
) -> SearchResult {
    let report = witness.verify();
    assert!(
        report.valid && report.cost == value,
        "internal error: search witness failed verification (valid={}, cost={}, value={})",
        report.valid,
        report.cost,
        value
    );
    SearchResult { value, witness, optimal, nodes_expanded, elapsed }
}

/// Exact canonical assembly index.
///
/// Deepens from the doubling lower bound towards the greedy seed, refuting
/// each cost exhaustively; the first witness found is optimal.  Honors
/// `max_cost` and `time_budget` by degrading to `UpperBoundOnly`.
pub fn asi_exact(w: &TargetString, cfg: &SearchConfig) -> SearchResult {
    let started = Instant::now();
    let deadline = cfg.time_budget.map(|b| started + b);
    let seed = greedy_concat_upper(w);
    let mut best_cost = seed.cost();
    let mut best_plan = seed;
    let lb = asi_lower_bound(w);
    if best_cost == lb {
        return checked_result(best_cost, best_plan, Optimality::Proved, 0, started.elapsed());
    }

    let engine = canonical::CanonicalEngine::new(w);
    let mut nodes = 0u64;
    let cap = cfg.max_cost.unwrap_or(usize::MAX);
    let mut k = lb;
    let mut refuted_below_best = true;
    while k < best_cost {
        if k > cap {
            refuted_below_best = false;
            break;
        }
        match engine.run(k, cfg, deadline, &mut nodes) {
            canonical::Outcome::Found(objects) => {
                let value = objects.len();
                best_plan = engine.reconstruct(w, &objects);
                best_cost = value;
                break;
            }
            canonical::Outcome::Refuted => k += 1,
            canonical::Outcome::TimedOut => {
                refuted_below_best = false;
                break;
            }
        }
    }

    let optimal = if refuted_below_best { Optimality::Proved } else { Optimality::UpperBoundOnly };
    checked_result(best_cost, best_plan, optimal, nodes, started.elapsed())
}

/// Templated assembly index search over the configured template bounds.
///
/// Seeds from the better of the greedy concatenation bound and the greedy
/// template heuristic, then deepens like `asi_exact` over the templated
/// universe.  The value never exceeds the canonical index; `Proved` is
/// reported only when every smaller cost was refuted *and* the configured
/// bounds cover the full templated universe for this target.
pub fn tai_search(w: &TargetString, cfg: &SearchConfig) -> SearchResult {
    let started = Instant::now();
    let deadline = cfg.time_budget.map(|b| started + b);

    let concat_seed = greedy_concat_upper(w).with_mode(PlanMode::Templated);
    let heuristic_seed = crate::heuristics::greedy_heuristic(w, cfg);
    let (mut best_plan, mut best_cost) = if heuristic_seed.cost() <= concat_seed.cost() {
        let c = heuristic_seed.cost();
        (heuristic_seed, c)
    } else {
        let c = concat_seed.cost();
        (concat_seed, c)
    };

    let lb = tai_lower_bound(w.len(), cfg.template_max_stars);
    if best_cost == lb {
        let optimal = Optimality::Proved; // nothing below the growth bound
        return checked_result(best_cost, best_plan, optimal, 0, started.elapsed());
    }

    let mut engine = templated::TemplatedEngine::new(w, cfg);
    let mut nodes = 0u64;
    let cap = cfg.max_cost.unwrap_or(usize::MAX);
    let mut k = lb;
    let mut refuted_below_best = true;
    while k < best_cost {
        if k > cap {
            refuted_below_best = false;
            break;
        }
        match engine.run(k, deadline, &mut nodes) {
            templated::Outcome::Found(plan) => {
                best_cost = plan.cost();
                best_plan = plan;
                break;
            }
            templated::Outcome::Refuted => k += 1,
            templated::Outcome::TimedOut => {
                refuted_below_best = false;
                break;
            }
        }
    }

    let optimal = if refuted_below_best && cfg.covers_full_universe(w.len()) {
        Optimality::Proved
    } else {
        Optimality::UpperBoundOnly
    };
    checked_result(best_cost, best_plan, optimal, nodes, started.elapsed())
}

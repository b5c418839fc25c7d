//! Randomized invariants over the universe, plan, and solver layers.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use templated_assembly::certificate::{parse_plan, serialize_plan};
use templated_assembly::heuristics::greedy_heuristic;
use templated_assembly::plan::{AssemblyPlan, PlanMode, PlanStep};
use templated_assembly::solver::{
    asi_exact, asi_lower_bound, greedy_concat_upper, tai_search, Optimality, SearchConfig,
};
use templated_assembly::universe::{instantiate, AssemblyObject, OccurrenceMode, TargetString};

/// A random template pattern plus the 0-based positions of its wildcards.
/// At least one wildcard and at least one letter survive.
fn template_with_stars() -> impl Strategy<Value = (Vec<u8>, Vec<usize>)> {
    "[abc]{2,10}".prop_flat_map(|base| {
        let n = base.len();
        let positions: Vec<usize> = (0..n).collect();
        (Just(base.into_bytes()), proptest::sample::subsequence(positions, 1..n))
    })
}

proptest! {
    /// |T[S -> u]| = |T| + |S| * (|u| - 1) for every wildcard selection,
    /// with duplicate selections collapsing to one substitution each.
    #[test]
    fn instantiation_length_law(
        (base, stars) in template_with_stars(),
        filler in "[abc]{1,6}",
        filler_is_template in any::<bool>(),
        sel_bits in any::<u16>(),
        dup_bits in any::<u16>(),
    ) {
        let mut pattern = base;
        for &p in &stars {
            pattern[p] = b'*';
        }
        let template = AssemblyObject::new(&pattern).unwrap();

        let mut filler = filler.into_bytes();
        if filler_is_template {
            filler.push(b'*');
        }
        let filler = AssemblyObject::new(&filler).unwrap();

        let mut selection: Vec<usize> = stars
            .iter()
            .enumerate()
            .filter(|(i, _)| sel_bits >> (i % 16) & 1 == 1)
            .map(|(_, &p)| p)
            .collect();
        if selection.is_empty() {
            selection.push(stars[0]);
        }
        let unique = selection.len();
        for (i, &p) in selection.clone().iter().enumerate() {
            if dup_bits >> (i % 16) & 1 == 1 {
                selection.push(p);
            }
        }

        let product = instantiate(&template, &selection, &filler).unwrap();
        prop_assert_eq!(
            product.len(),
            template.len() + unique * (filler.len() - 1)
        );

        // Substituting every wildcard by a literal yields a literal string
        // that the template matches again.
        if !filler_is_template {
            let all: Vec<usize> = stars.clone();
            let full = instantiate(&template, &all, &filler).unwrap();
            let w = TargetString::new(full.as_str()).unwrap();
            prop_assert!(w.is_object(&template));
        }
    }
}

/// A syntactically valid plan with random structure.  Products need not be
/// in any universe; parsing and serialization must not care.
fn random_plan(seed: u64) -> AssemblyPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = ["ab", "abc", "01"][rng.gen_range(0..3)];
    let len = rng.gen_range(3..=12);
    let text: String = (0..len)
        .map(|_| alphabet.as_bytes()[rng.gen_range(0..alphabet.len())] as char)
        .collect();
    let target = TargetString::new(&text).unwrap();
    let mode = if rng.gen_bool(0.5) { PlanMode::Templated } else { PlanMode::Canonical };

    let mut steps: Vec<PlanStep> =
        alphabet.bytes().map(|symbol| PlanStep::Monomer { symbol }).collect();
    if mode == PlanMode::Templated {
        steps.push(PlanStep::Monomer { symbol: b'*' });
    }
    for _ in 0..rng.gen_range(1..=8) {
        let k = steps.len();
        if mode == PlanMode::Templated && rng.gen_bool(0.3) {
            // Ordinals are stored sorted and deduplicated, matching the
            // normal form the parser produces.
            let mut selection: Vec<usize> =
                (1..=4usize).filter(|_| rng.gen_bool(0.4)).collect();
            if selection.is_empty() {
                selection.push(rng.gen_range(1..=3));
            }
            steps.push(PlanStep::Instantiate {
                template: rng.gen_range(0..k),
                selection,
                filler: rng.gen_range(0..k),
            });
        } else {
            steps.push(PlanStep::Concat {
                left: rng.gen_range(0..k),
                right: rng.gen_range(0..k),
            });
        }
    }
    AssemblyPlan { target, mode, steps }
}

proptest! {
    /// parse(serialize(p)) reproduces p exactly, for plans far outside the
    /// well-formed fragment the solvers emit.
    #[test]
    fn serialize_parse_round_trip(seed in any::<u64>()) {
        let plan = random_plan(seed);
        let text = serialize_plan(&plan);
        let reparsed = parse_plan(&text).unwrap();
        prop_assert_eq!(reparsed, plan);
    }
}

proptest! {
    /// Both greedy planners emit plans that verify, and every cost report
    /// counts exactly the composite steps.
    #[test]
    fn greedy_plans_verify(w in "[abc]{1,12}") {
        let w = TargetString::new(&w).unwrap();
        for plan in [greedy_concat_upper(&w), greedy_heuristic(&w, &SearchConfig::default())] {
            let rep = plan.verify();
            prop_assert!(rep.valid, "greedy plan failed: {:?}", rep.failure);
            prop_assert_eq!(rep.cost, plan.cost());
            prop_assert_eq!(
                plan.cost(),
                plan.steps.iter().filter(|s| s.is_composite()).count()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    /// Doubling bound <= templated value <= canonical value <= repeated
    /// concatenation, with verifying witnesses at every rung.
    #[test]
    fn bound_ladder(w in "[ab]{1,9}") {
        let w = TargetString::new(&w).unwrap();
        let cfg = SearchConfig::default();
        let concat = greedy_concat_upper(&w);
        let canonical = asi_exact(&w, &cfg);
        let templated = tai_search(&w, &cfg);

        prop_assert_eq!(canonical.optimal, Optimality::Proved);
        prop_assert!(asi_lower_bound(&w) <= templated.value);
        prop_assert!(templated.value <= canonical.value);
        prop_assert!(canonical.value <= concat.cost());

        for (r, label) in [(&canonical, "canonical"), (&templated, "templated")] {
            let rep = r.witness.verify();
            prop_assert!(rep.valid, "{label} witness failed: {:?}", rep.failure);
            prop_assert_eq!(rep.cost, r.value);
        }
    }

    /// Rerunning a search reproduces the witness byte for byte.
    #[test]
    fn searches_are_deterministic(w in "[abc]{1,9}") {
        let w = TargetString::new(&w).unwrap();
        let cfg = SearchConfig::default();
        let a = serialize_plan(&asi_exact(&w, &cfg).witness);
        let b = serialize_plan(&asi_exact(&w, &cfg).witness);
        prop_assert_eq!(a, b);
        let ta = serialize_plan(&tai_search(&w, &cfg).witness);
        let tb = serialize_plan(&tai_search(&w, &cfg).witness);
        prop_assert_eq!(ta, tb);
    }
}

proptest! {
    /// Occurrence counting: non-overlapping occurrences fit in the target,
    /// a count is positive exactly for substrings, and overlapping counts
    /// dominate non-overlapping ones.
    #[test]
    fn occurrence_counts(w in "[ab]{1,12}", probe in "[ab]{1,4}") {
        let target = TargetString::new(&w).unwrap();
        let x = AssemblyObject::new(probe.as_bytes()).unwrap();
        let non = target.count_occurrences(&x, OccurrenceMode::NonOverlapping).unwrap();
        let over = target.count_occurrences(&x, OccurrenceMode::Overlapping).unwrap();
        prop_assert!(non * probe.len() <= w.len());
        prop_assert!(non <= over);
        prop_assert_eq!(non >= 1, target.is_substring(&x).unwrap());
        prop_assert_eq!(non >= 1, w.contains(&probe));

        let whole = AssemblyObject::new(w.as_bytes()).unwrap();
        prop_assert_eq!(
            target.count_occurrences(&whole, OccurrenceMode::NonOverlapping).unwrap(),
            1
        );
    }
}

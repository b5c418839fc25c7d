//! Acceptance table for the toolkit's headline guarantees, one row per
//! criterion.  Run with `--nocapture` to see the table; any failing row
//! fails the test with its detail line.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use templated_assembly::certificate::{parse_plan, serialize_plan};
use templated_assembly::heuristics::{gain, greedy_heuristic, mine_templates, CostProxy};
use templated_assembly::plan::PlanMode;
use templated_assembly::solver::{
    asi_exact, asi_lower_bound, brute_force_oracle, tai_search, Optimality, SearchConfig,
};
use templated_assembly::universe::{AssemblyObject, TargetString};

/// Three-block target: templated reuse spans the 000 bridge.
const BLOCK: &str = "11221122110001100110011";
/// Anchor-motif target over {0,1,2,3}: motifs 1011/1211 share skeleton 1*11.
const ANCHOR: &str = "10113121101011212111211";
/// The anchor-motif target with one more 1011 block appended.
const LONG_ANCHOR: &str = "101131211010112121112111011";

const TARGETS: [&str; 3] = [BLOCK, ANCHOR, LONG_ANCHOR];

/// Exhaustively proved canonical minima for the three targets.  The
/// hand-written fixture plans of cost 12/13/14 are valid but sit one step
/// above the minimum: block-by-block assembly misses cheaper plans through
/// boundary-crossing repeats (the block target has an 11-step plan that
/// builds 11000, which straddles its 11221122110 / 001100110011 seam).
const CANONICAL_MINIMA: [usize; 3] = [11, 12, 13];

/// Verified templated upper bounds (greedy heuristic; confirmed by bounded
/// search).  They coincide with the canonical minima on these targets, so
/// only the non-strict inequality of the two indices is asserted.
const TEMPLATED_UPPER: [usize; 3] = [11, 12, 13];

fn target(s: &str) -> TargetString {
    TargetString::new(s).expect("reference targets are valid")
}

fn obj(s: &str) -> AssemblyObject {
    AssemblyObject::new(s.as_bytes()).expect("test objects are valid")
}

/// Seeded corpus shared by the oracle, proposition, and invariant rows:
/// 100 strings over {a,b} plus 100 over {a,b,c}, lengths 1..=10.
fn corpus() -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut out = Vec::new();
    for alphabet in ["ab", "abc"] {
        for _ in 0..100 {
            let len = rng.gen_range(1..=10);
            let s: String = (0..len)
                .map(|_| alphabet.as_bytes()[rng.gen_range(0..alphabet.len())] as char)
                .collect();
            out.push(s);
        }
    }
    out
}

fn canonical_index_proved() -> Result<String, String> {
    let mut values = Vec::new();
    for (s, expect) in TARGETS.iter().zip(CANONICAL_MINIMA) {
        let r = asi_exact(&target(s), &SearchConfig::default());
        if r.value != expect || r.optimal != Optimality::Proved {
            return Err(format!(
                "{s}: value {} ({:?}), expected {expect} proved",
                r.value, r.optimal
            ));
        }
        let rep = r.witness.verify();
        if !rep.valid || rep.cost != expect || r.witness.mode != PlanMode::Canonical {
            return Err(format!("{s}: witness failed re-verification at cost {expect}"));
        }
        if !r.witness.canonical_restriction() {
            return Err(format!("{s}: canonical witness uses templated steps"));
        }
        values.push(r.value.to_string());
    }
    Ok(format!("proved {}", values.join("/")))
}

fn templated_upper_bounds() -> Result<String, String> {
    let budget = SearchConfig {
        time_budget: Some(Duration::from_secs(10)),
        ..SearchConfig::default()
    };
    let mut values = Vec::new();
    for (i, (s, expect)) in TARGETS.iter().zip(TEMPLATED_UPPER).enumerate() {
        let w = target(s);
        let plan = greedy_heuristic(&w, &SearchConfig::default());
        let rep = plan.verify();
        if !rep.valid || plan.mode != PlanMode::Templated {
            return Err(format!("{s}: greedy plan failed verification"));
        }
        if rep.cost != expect {
            return Err(format!("{s}: greedy cost {} expected {expect}", rep.cost));
        }
        let r = tai_search(&w, &budget);
        if r.value > expect {
            return Err(format!("{s}: search value {} above greedy {expect}", r.value));
        }
        let vrep = r.witness.verify();
        if !vrep.valid || vrep.cost != r.value {
            return Err(format!("{s}: search witness failed re-verification"));
        }
        if r.value > CANONICAL_MINIMA[i] {
            return Err(format!(
                "{s}: templated {} above canonical {}",
                r.value, CANONICAL_MINIMA[i]
            ));
        }
        values.push(expect.to_string());
    }
    Ok(format!("verified plans {}; never above canonical", values.join("/")))
}

fn gain_scores() -> Result<String, String> {
    let cases: [(&str, &str, &[&str], i64, i64, i64); 3] = [
        (BLOCK, "11*11*11", &["22", "00"], 18, 11, 7),
        (ANCHOR, "1*11", &["0", "2"], 15, 8, 7),
        (LONG_ANCHOR, "1*11", &["0", "2"], 18, 9, 9),
    ];
    let mut gains = Vec::new();
    for (s, skeleton, fillers, benefit, outlay, expect) in cases {
        let fillers: Vec<AssemblyObject> = fillers.iter().map(|f| obj(f)).collect();
        let rep = gain(&target(s), &obj(skeleton), &fillers, CostProxy::default())
            .map_err(|e| format!("{s}: {skeleton}: {e}"))?;
        if (rep.benefit, rep.outlay, rep.gain) != (benefit, outlay, expect) {
            return Err(format!(
                "{s}: {skeleton}: got {}-{}={}, expected {benefit}-{outlay}={expect}",
                rep.benefit, rep.outlay, rep.gain
            ));
        }
        gains.push(expect.to_string());
    }
    Ok(format!("gains {}", gains.join("/")))
}

fn certificate_fixtures() -> Result<String, String> {
    // (name, text, mode, cost, corruption pattern, single-character edit)
    let fixtures: [(&str, &str, PlanMode, usize, &str, &str); 6] = [
        (
            "block-target-canonical-12",
            include_str!("fixtures/block-target-canonical-12.cert"),
            PlanMode::Canonical,
            12,
            "c 5 8",
            "c 5 5",
        ),
        (
            "block-target-templated-11",
            include_str!("fixtures/block-target-templated-11.cert"),
            PlanMode::Templated,
            11,
            "t 8 {1,2} 9",
            "t 8 {1,2} 5",
        ),
        (
            "anchor-target-canonical-13",
            include_str!("fixtures/anchor-target-canonical-13.cert"),
            PlanMode::Canonical,
            13,
            "c 7 4",
            "c 7 7",
        ),
        (
            "anchor-target-templated-12",
            include_str!("fixtures/anchor-target-templated-12.cert"),
            PlanMode::Templated,
            12,
            "t 8 {1} 4",
            "t 8 {1} 5",
        ),
        (
            "long-anchor-target-canonical-14",
            include_str!("fixtures/long-anchor-target-canonical-14.cert"),
            PlanMode::Canonical,
            14,
            "c 10 4",
            "c 10 1",
        ),
        (
            "long-anchor-target-templated-13",
            include_str!("fixtures/long-anchor-target-templated-13.cert"),
            PlanMode::Templated,
            13,
            "t 8 {1} 3",
            "t 8 {2} 3",
        ),
    ];
    for (name, text, mode, cost, pattern, edit) in fixtures {
        let plan = parse_plan(text).map_err(|e| format!("{name}: parse failed: {e}"))?;
        let rep = plan.verify();
        if !rep.valid || plan.mode != mode || rep.cost != cost {
            return Err(format!(
                "{name}: valid={} cost={} mode={:?}, expected cost {cost} {mode:?}",
                rep.valid, rep.cost, plan.mode
            ));
        }
        let reparsed = parse_plan(&serialize_plan(&plan))
            .map_err(|e| format!("{name}: round-trip parse failed: {e}"))?;
        if reparsed != plan {
            return Err(format!("{name}: serialize/parse round trip changed the plan"));
        }
        let corrupted = text.replacen(pattern, edit, 1);
        if corrupted == text {
            return Err(format!("{name}: corruption pattern {pattern:?} not found"));
        }
        match parse_plan(&corrupted) {
            Err(_) => {}
            Ok(bad) => {
                if bad.verify().valid {
                    return Err(format!("{name}: corruption {pattern:?} -> {edit:?} accepted"));
                }
            }
        }
    }
    Ok("6 plans verify at stated costs; 6 corruptions rejected".to_string())
}

fn oracle_equivalence() -> Result<String, String> {
    let cfg = SearchConfig::default();
    let mut checked = 0usize;
    let mut capped = 0usize;
    for s in corpus() {
        let w = TargetString::new(&s).map_err(|e| format!("{s}: {e}"))?;
        let exact = asi_exact(&w, &cfg);
        if exact.optimal != Optimality::Proved {
            return Err(format!("{s}: exact solver did not prove"));
        }
        match brute_force_oracle(&w, PlanMode::Canonical, 8) {
            Some(v) => {
                if v != exact.value {
                    return Err(format!("{s}: oracle {v} != exact {}", exact.value));
                }
            }
            None => {
                capped += 1;
                if exact.value <= 8 {
                    return Err(format!(
                        "{s}: oracle gave up at 8 but exact found {}",
                        exact.value
                    ));
                }
            }
        }
        checked += 1;
    }
    Ok(format!("{checked} strings agree ({capped} above the oracle cap)"))
}

fn canonical_embeds_in_templated() -> Result<String, String> {
    let cfg = SearchConfig::default();
    let mut checked = 0usize;
    for s in corpus() {
        let w = TargetString::new(&s).map_err(|e| format!("{s}: {e}"))?;
        let c = asi_exact(&w, &cfg);
        let retagged = c.witness.with_mode(PlanMode::Templated);
        let rep = retagged.verify();
        if !rep.valid || rep.cost != c.value {
            return Err(format!("{s}: canonical witness invalid as a templated plan"));
        }
        let t = tai_search(&w, &cfg);
        if t.value > c.value {
            return Err(format!("{s}: templated {} above canonical {}", t.value, c.value));
        }
        checked += 1;
    }
    Ok(format!("{checked} witnesses re-verify; templated <= canonical throughout"))
}

fn structural_invariants() -> Result<String, String> {
    // Instantiation length law and compress-instantiate-recognize round
    // trip, over every mined candidate of the reference targets.
    let cfg = SearchConfig::default();
    let mut instantiations = 0usize;
    for s in TARGETS {
        let w = target(s);
        for cand in mine_templates(&w, &cfg) {
            let stars = cand.skeleton.wildcard_count();
            if !w.is_object(&cand.skeleton) {
                return Err(format!("{s}: mined skeleton {} not in universe", cand.skeleton));
            }
            for fb in &cand.fillers {
                let expect = cand.skeleton.len() + stars * (fb.filler.len() - 1);
                if fb.instantiation.len() != expect {
                    return Err(format!(
                        "{s}: |{}[all -> {}]| = {}, length law says {expect}",
                        cand.skeleton,
                        fb.filler,
                        fb.instantiation.len()
                    ));
                }
                if !w.is_substring(&fb.instantiation).unwrap_or(false) {
                    return Err(format!(
                        "{s}: instantiation {} not a substring",
                        fb.instantiation
                    ));
                }
                let back = TargetString::new(fb.instantiation.as_str())
                    .map_err(|e| format!("{s}: {e}"))?;
                if !back.is_object(&cand.skeleton) {
                    return Err(format!(
                        "{s}: skeleton {} no longer matches its instantiation {}",
                        cand.skeleton, fb.instantiation
                    ));
                }
                instantiations += 1;
            }
        }
    }

    // Doubling lower bound on the corpus.
    for s in corpus().iter().take(50) {
        let w = TargetString::new(s).map_err(|e| format!("{s}: {e}"))?;
        let r = asi_exact(&w, &cfg);
        if asi_lower_bound(&w) > r.value {
            return Err(format!(
                "{s}: doubling bound {} above exact {}",
                asi_lower_bound(&w),
                r.value
            ));
        }
    }

    // Reported values do not depend on the worker count.
    let wide = SearchConfig { parallelism: 4, deterministic: false, ..SearchConfig::default() };
    for s in corpus().iter().take(20) {
        let w = TargetString::new(s).map_err(|e| format!("{s}: {e}"))?;
        let a1 = asi_exact(&w, &cfg).value;
        let a4 = asi_exact(&w, &wide).value;
        if a1 != a4 {
            return Err(format!("{s}: canonical value {a1} with 1 worker, {a4} with 4"));
        }
        let t1 = tai_search(&w, &cfg).value;
        let t4 = tai_search(&w, &wide).value;
        if t1 != t4 {
            return Err(format!("{s}: templated value {t1} with 1 worker, {t4} with 4"));
        }
    }

    Ok(format!(
        "length law and round trip on {instantiations} instantiations; \
         doubling bound on 50; worker-count independence on 20"
    ))
}

#[test]
fn acceptance_table() {
    let rows: [(&str, fn() -> Result<String, String>); 7] = [
        ("canonical index proved on the reference targets", canonical_index_proved),
        ("templated upper bounds verified on the reference targets", templated_upper_bounds),
        ("gain scores on the reference candidates", gain_scores),
        ("certificate fixtures verify and corruptions are rejected", certificate_fixtures),
        ("exact solver agrees with the brute-force oracle", oracle_equivalence),
        ("canonical witnesses are templated plans of equal cost", canonical_embeds_in_templated),
        ("structural invariants hold", structural_invariants),
    ];
    let mut failures = Vec::new();
    for (i, (name, run)) in rows.iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        let elapsed = started.elapsed();
        match outcome {
            Ok(detail) => {
                println!("PASS {} {name}: {detail} ({elapsed:.2?})", i + 1);
            }
            Err(detail) => {
                println!("FAIL {} {name}: {detail} ({elapsed:.2?})", i + 1);
                failures.push(format!("{}: {detail}", i + 1));
            }
        }
    }
    assert!(failures.is_empty(), "acceptance rows failed:\n{}", failures.join("\n"));
}

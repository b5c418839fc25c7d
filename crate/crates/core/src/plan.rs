//! Assembly plans and the plan verifier.
//!
//! A plan is an ordered list of steps.  `Monomer` steps introduce single
//! symbols and are free; `Concat` and `Instantiate` steps are the composite
//! steps counted by the plan cost.  Steps reference earlier steps by index
//! (0-based internally; the certificate text format is 1-based).
//!
//! Verification replays the plan against its target: every composite product
//! must be a member of the target's object universe, and a valid plan must
//! produce the target itself.  Duplicate derivations of the same object are
//! legal — they waste steps but break nothing.

use serde::Serialize;

use crate::universe::{
    instantiate, AssemblyObject, ObjectKind, TargetString, UniverseError, WILDCARD,
};

/// Canonical plans build literal substrings only; templated plans may also
/// use the wildcard monomer and `Instantiate` steps.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    Canonical,
    Templated,
}

impl std::fmt::Display for PlanMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlanMode::Canonical => "canonical",
            PlanMode::Templated => "templated",
        })
    }
}

impl std::str::FromStr for PlanMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical" => Ok(PlanMode::Canonical),
            "templated" => Ok(PlanMode::Templated),
            other => Err(format!("unknown mode {other:?} (expected canonical or templated)")),
        }
    }
}

/// One plan step.  References are 0-based indices of earlier steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanStep {
    /// Introduce a single symbol (a letter of the target, or `*`).  Free.
    Monomer { symbol: u8 },
    /// Concatenate the objects produced by two earlier steps.
    Concat { left: usize, right: usize },
    /// Replace the selected wildcards of an earlier template by the object
    /// of an earlier step.  `selection` holds 1-based wildcard ordinals.
    Instantiate { template: usize, selection: Vec<usize>, filler: usize },
}

impl PlanStep {
    pub fn is_composite(&self) -> bool {
        !matches!(self, PlanStep::Monomer { .. })
    }
}

/// A plan together with its target and mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssemblyPlan {
    pub target: TargetString,
    pub mode: PlanMode,
    pub steps: Vec<PlanStep>,
}

/// Why a step failed verification.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// A referenced step index is not strictly earlier than the step itself.
    DanglingReference,
    /// A wildcard monomer appeared in a canonical-mode plan.
    WildcardInCanonicalMode,
    /// An `Instantiate` step appeared in a canonical-mode plan.
    InstantiateInCanonicalMode,
    /// A monomer symbol does not occur in the target.
    SymbolNotInAlphabet,
    /// A composite product is neither a substring nor a valid template.
    ProductNotInUniverse,
    /// The template operand of an `Instantiate` step has no wildcard.
    NotATemplate,
    /// An `Instantiate` selection is empty.
    EmptySelection,
    /// A selection ordinal exceeds the template's wildcard count.
    OrdinalOutOfRange,
    /// The plan exceeds the verifier's step budget.
    StepBudgetExceeded,
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FailureReason::DanglingReference => "dangling_reference",
            FailureReason::WildcardInCanonicalMode => "wildcard_in_canonical_mode",
            FailureReason::InstantiateInCanonicalMode => "instantiate_in_canonical_mode",
            FailureReason::SymbolNotInAlphabet => "symbol_not_in_alphabet",
            FailureReason::ProductNotInUniverse => "product_not_in_universe",
            FailureReason::NotATemplate => "not_a_template",
            FailureReason::EmptySelection => "empty_selection",
            FailureReason::OrdinalOutOfRange => "ordinal_out_of_range",
            FailureReason::StepBudgetExceeded => "step_budget_exceeded",
        };
        f.write_str(s)
    }
}

/// The first failing step (1-based, matching certificate numbering).
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize)]
pub struct StepFailure {
    pub step: usize,
    pub reason: FailureReason,
}

/// Verification outcome.  `cost` counts the composite steps of the whole
/// plan regardless of validity; `valid` implies `target_produced`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub valid: bool,
    pub cost: usize,
    pub target_produced: bool,
    pub failure: Option<StepFailure>,
}

impl AssemblyPlan {
    pub fn new(target: TargetString, mode: PlanMode, steps: Vec<PlanStep>) -> Self {
        AssemblyPlan { target, mode, steps }
    }

    /// Number of composite (`Concat` / `Instantiate`) steps.
    pub fn cost(&self) -> usize {
        self.steps.iter().filter(|s| s.is_composite()).count()
    }

    /// True when the plan stays inside the canonical fragment: no
    /// `Instantiate` step and no wildcard monomer.
    pub fn canonical_restriction(&self) -> bool {
        self.steps.iter().all(|s| match s {
            PlanStep::Monomer { symbol } => *symbol != WILDCARD,
            PlanStep::Concat { .. } => true,
            PlanStep::Instantiate { .. } => false,
        })
    }

    /// A copy of the plan re-tagged with another mode (steps unchanged).
    pub fn with_mode(&self, mode: PlanMode) -> AssemblyPlan {
        AssemblyPlan { target: self.target.clone(), mode, steps: self.steps.clone() }
    }

    /// Verifies the plan with the default step budget of `4 * |target|`.
    pub fn verify(&self) -> VerificationReport {
        self.verify_with_step_budget(4 * self.target.len())
    }

    pub fn verify_with_step_budget(&self, budget: usize) -> VerificationReport {
        self.simulate(budget).0
    }

    /// Verifies and returns the object produced by every executed step.
    pub fn verify_with_trace(&self) -> (VerificationReport, Vec<AssemblyObject>) {
        self.simulate(4 * self.target.len())
    }

    fn simulate(&self, budget: usize) -> (VerificationReport, Vec<AssemblyObject>) {
        let cost = self.cost();
        let mut produced: Vec<AssemblyObject> = Vec::with_capacity(self.steps.len());
        let mut target_produced = false;
        let mut failure = None;

        for (i, step) in self.steps.iter().enumerate() {
            if i >= budget {
                failure = Some(StepFailure {
                    step: i + 1,
                    reason: FailureReason::StepBudgetExceeded,
                });
                break;
            }
            match self.execute_step(i, step, &produced) {
                Ok(object) => {
                    if object.is_literal() && object.symbols() == self.target.text() {
                        target_produced = true;
                    }
                    produced.push(object);
                }
                Err(reason) => {
                    failure = Some(StepFailure { step: i + 1, reason });
                    break;
                }
            }
        }

        let report = VerificationReport {
            valid: failure.is_none() && target_produced,
            cost,
            target_produced,
            failure,
        };
        (report, produced)
    }

    fn execute_step(
        &self,
        index: usize,
        step: &PlanStep,
        produced: &[AssemblyObject],
    ) -> Result<AssemblyObject, FailureReason> {
        let fetch = |r: usize| -> Result<&AssemblyObject, FailureReason> {
            if r < index && r < produced.len() {
                Ok(&produced[r])
            } else {
                Err(FailureReason::DanglingReference)
            }
        };
        match step {
            PlanStep::Monomer { symbol } => {
                if *symbol == WILDCARD {
                    if self.mode == PlanMode::Canonical {
                        return Err(FailureReason::WildcardInCanonicalMode);
                    }
                    return Ok(AssemblyObject::wildcard_monomer());
                }
                if !self.target.alphabet().contains(symbol) {
                    return Err(FailureReason::SymbolNotInAlphabet);
                }
                Ok(AssemblyObject::monomer(*symbol))
            }
            PlanStep::Concat { left, right } => {
                let product = fetch(*left)?.concat(fetch(*right)?);
                if !self.target.is_object(&product) {
                    return Err(FailureReason::ProductNotInUniverse);
                }
                Ok(product)
            }
            PlanStep::Instantiate { template, selection, filler } => {
                if self.mode == PlanMode::Canonical {
                    return Err(FailureReason::InstantiateInCanonicalMode);
                }
                let template = fetch(*template)?;
                let filler = fetch(*filler)?.clone();
                if template.kind() != ObjectKind::Template {
                    return Err(FailureReason::NotATemplate);
                }
                let positions = template
                    .wildcard_positions()
                    .select_ordinals(selection)
                    .map_err(|e| match e {
                        UniverseError::EmptySelection => FailureReason::EmptySelection,
                        _ => FailureReason::OrdinalOutOfRange,
                    })?;
                let product = instantiate(template, &positions, &filler)
                    .expect("selection validated against the template");
                if !self.target.is_object(&product) {
                    return Err(FailureReason::ProductNotInUniverse);
                }
                Ok(product)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target(s: &str) -> TargetString {
        TargetString::new(s).unwrap()
    }

    fn m(symbol: char) -> PlanStep {
        PlanStep::Monomer { symbol: symbol as u8 }
    }

    fn c(left: usize, right: usize) -> PlanStep {
        PlanStep::Concat { left, right }
    }

    fn t(template: usize, selection: &[usize], filler: usize) -> PlanStep {
        PlanStep::Instantiate { template, selection: selection.to_vec(), filler }
    }

    #[test]
    fn minimal_canonical_plan() {
        // abab: ab = a+b, abab = ab+ab.
        let plan = AssemblyPlan::new(
            target("abab"),
            PlanMode::Canonical,
            vec![m('a'), m('b'), c(0, 1), c(2, 2)],
        );
        let report = plan.verify();
        assert!(report.valid);
        assert!(report.target_produced);
        assert_eq!(report.cost, 2);
        assert_eq!(plan.cost(), 2);
        assert!(plan.canonical_restriction());
    }

    #[test]
    fn single_letter_target_needs_no_composite_step() {
        let plan = AssemblyPlan::new(target("a"), PlanMode::Canonical, vec![m('a')]);
        let report = plan.verify();
        assert!(report.valid);
        assert_eq!(report.cost, 0);
    }

    #[test]
    fn templated_plan_with_instantiation() {
        // Target abcb: build the template a*c* is NOT valid here; use b*b on
        // bcb?  Simpler: target "abab", template "a*a*"? Use "abab":
        // T = ab (literal) gives nothing; exercise instantiate on "a*ab".
        // a* matches ab; a*ab matches abab with * = b.
        let w = target("abab");
        let plan = AssemblyPlan::new(
            w,
            PlanMode::Templated,
            vec![
                m('a'),          // 0
                m('*'),          // 1
                m('b'),          // 2
                c(0, 1),         // 3: a*
                c(3, 0),         // 4: a*a
                c(4, 2),         // 5: a*ab
                t(5, &[1], 2),   // 6: abab
            ],
        );
        let (report, trace) = plan.verify_with_trace();
        assert!(report.valid, "{report:?}");
        assert_eq!(report.cost, 4);
        assert_eq!(trace.last().unwrap().as_str(), "abab");
        assert!(!plan.canonical_restriction());
    }

    #[test]
    fn verification_failures() {
        let w = target("abab");

        // Dangling (forward) reference.
        let plan = AssemblyPlan::new(w.clone(), PlanMode::Canonical, vec![m('a'), c(0, 2)]);
        let report = plan.verify();
        assert!(!report.valid);
        assert_eq!(
            report.failure,
            Some(StepFailure { step: 2, reason: FailureReason::DanglingReference })
        );

        // Self reference.
        let plan = AssemblyPlan::new(w.clone(), PlanMode::Canonical, vec![m('a'), c(1, 0)]);
        assert_eq!(plan.verify().failure.unwrap().reason, FailureReason::DanglingReference);

        // Wildcard monomer in canonical mode.
        let plan = AssemblyPlan::new(w.clone(), PlanMode::Canonical, vec![m('*')]);
        assert_eq!(
            plan.verify().failure.unwrap().reason,
            FailureReason::WildcardInCanonicalMode
        );

        // Instantiate in canonical mode.
        let plan = AssemblyPlan::new(
            w.clone(),
            PlanMode::Canonical,
            vec![m('a'), m('b'), t(0, &[1], 1)],
        );
        assert_eq!(
            plan.verify().failure.unwrap().reason,
            FailureReason::InstantiateInCanonicalMode
        );

        // Monomer outside the alphabet.
        let plan = AssemblyPlan::new(w.clone(), PlanMode::Canonical, vec![m('z')]);
        assert_eq!(plan.verify().failure.unwrap().reason, FailureReason::SymbolNotInAlphabet);

        // Product outside the universe ("aa" is not a substring of abab).
        let plan = AssemblyPlan::new(w.clone(), PlanMode::Canonical, vec![m('a'), c(0, 0)]);
        let report = plan.verify();
        assert_eq!(report.failure.unwrap().reason, FailureReason::ProductNotInUniverse);
        assert!(!report.target_produced);

        // Instantiating a literal.
        let plan = AssemblyPlan::new(
            w.clone(),
            PlanMode::Templated,
            vec![m('a'), m('b'), c(0, 1), t(2, &[1], 0)],
        );
        assert_eq!(plan.verify().failure.unwrap().reason, FailureReason::NotATemplate);

        // Empty selection.
        let plan = AssemblyPlan::new(
            w.clone(),
            PlanMode::Templated,
            vec![m('a'), m('*'), c(0, 1), t(2, &[], 0)],
        );
        assert_eq!(plan.verify().failure.unwrap().reason, FailureReason::EmptySelection);

        // Ordinal out of range.
        let plan = AssemblyPlan::new(
            w.clone(),
            PlanMode::Templated,
            vec![m('a'), m('*'), c(0, 1), t(2, &[2], 0)],
        );
        assert_eq!(plan.verify().failure.unwrap().reason, FailureReason::OrdinalOutOfRange);

        // Valid steps but target never produced.
        let plan = AssemblyPlan::new(w, PlanMode::Canonical, vec![m('a'), m('b'), c(0, 1)]);
        let report = plan.verify();
        assert!(!report.valid);
        assert!(report.failure.is_none());
        assert!(!report.target_produced);
        assert_eq!(report.cost, 1);
    }

    #[test]
    fn duplicate_derivations_are_legal() {
        let plan = AssemblyPlan::new(
            target("abab"),
            PlanMode::Canonical,
            vec![m('a'), m('b'), c(0, 1), c(0, 1), c(2, 3)],
        );
        let report = plan.verify();
        assert!(report.valid);
        assert_eq!(report.cost, 3); // wasteful but valid
    }

    #[test]
    fn step_budget() {
        let w = target("ab");
        let mut steps = vec![m('a'), m('b')];
        for _ in 0..20 {
            steps.push(c(0, 1));
        }
        let plan = AssemblyPlan::new(w, PlanMode::Canonical, steps);
        // Default budget is 4 * |target| = 8.
        let report = plan.verify();
        assert!(!report.valid);
        assert_eq!(
            report.failure,
            Some(StepFailure { step: 9, reason: FailureReason::StepBudgetExceeded })
        );
        // A budget large enough accepts the (wasteful) plan.
        let report = plan.verify_with_step_budget(100);
        assert!(report.valid);
        assert_eq!(report.cost, 20);
    }

    #[test]
    fn wildcard_filler_keeps_template_valid() {
        // Instantiating with the template's own wildcard replays the
        // template; products are checked for membership, so this verifies.
        let plan = AssemblyPlan::new(
            target("abab"),
            PlanMode::Templated,
            vec![m('a'), m('*'), c(0, 1), t(2, &[1], 1), c(3, 0), t(4, &[1], 0), c(5, 2)],
        );
        // a*, a* (again), a*a, aaa? -> "a*a"[*:=a] = "aaa" not in universe.
        let report = plan.verify();
        assert!(!report.valid);
        assert_eq!(report.failure.unwrap().reason, FailureReason::ProductNotInUniverse);
    }
}

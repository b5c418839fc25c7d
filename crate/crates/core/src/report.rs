//! Flat, serializable views of search results, verification outcomes, and
//! mined template candidates, for JSON output.

use serde::Serialize;

use crate::certificate::serialize_plan;
use crate::heuristics::TemplateCandidate;
use crate::plan::{AssemblyPlan, PlanMode, VerificationReport};
use crate::solver::{Optimality, SearchResult};

/// A search outcome with its witness in certificate text form.
#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub target: String,
    pub mode: PlanMode,
    pub value: usize,
    pub optimal: Optimality,
    pub nodes_expanded: u64,
    pub elapsed_ms: u64,
    pub certificate: String,
}

impl From<&SearchResult> for SearchReport {
    fn from(r: &SearchResult) -> Self {
        SearchReport {
            target: r.witness.target.as_str().to_string(),
            mode: r.witness.mode,
            value: r.value,
            optimal: r.optimal,
            nodes_expanded: r.nodes_expanded,
            elapsed_ms: r.elapsed.as_millis() as u64,
            certificate: serialize_plan(&r.witness),
        }
    }
}

/// A certificate check: the claimed cost next to the verifier's verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub target: String,
    pub mode: PlanMode,
    pub claimed_cost: usize,
    pub verdict: VerificationReport,
}

impl CertificateReport {
    pub fn new(plan: &AssemblyPlan, verdict: VerificationReport) -> Self {
        CertificateReport {
            target: plan.target.as_str().to_string(),
            mode: plan.mode,
            claimed_cost: plan.cost(),
            verdict,
        }
    }
}

/// One mined candidate, flattened for tabular or JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateReport {
    pub skeleton: String,
    pub fillers: Vec<FillerReport>,
    pub benefit: i64,
    pub outlay: i64,
    pub gain: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FillerReport {
    pub filler: String,
    pub instantiation: String,
    pub occurrences: usize,
}

impl From<&TemplateCandidate> for CandidateReport {
    fn from(c: &TemplateCandidate) -> Self {
        CandidateReport {
            skeleton: c.skeleton.as_str().to_string(),
            fillers: c
                .fillers
                .iter()
                .map(|f| FillerReport {
                    filler: f.filler.as_str().to_string(),
                    instantiation: f.instantiation.as_str().to_string(),
                    occurrences: f.occurrences,
                })
                .collect(),
            benefit: c.gain.benefit,
            outlay: c.gain.outlay,
            gain: c.gain.gain,
        }
    }
}

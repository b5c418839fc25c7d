//! Template mining, gain scoring, and the greedy macro-template heuristic.
//!
//! The heuristic produces valid templated plans quickly; the exact search uses
//! them as upper-bound seeds.  Mining anti-unifies pairs of repeated substrings
//! into skeletons, attaches uniform-length filler families, and ranks the
//! candidates by a gain score built on a pluggable cost proxy.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::builder::PlanBuilder;
use crate::plan::{AssemblyPlan, PlanMode};
use crate::solver::SearchConfig;
use crate::universe::{instantiate, AssemblyObject, OccurrenceMode, TargetString, WILDCARD};

/// Cost proxy `c(y)` used by the gain score.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Default)]
pub enum CostProxy {
    /// `c(y) = |y| - 1`: the cost of building `y` by plain concatenation.
    #[default]
    LengthMinusOne,
}

impl CostProxy {
    pub fn cost(self, y: &AssemblyObject) -> i64 {
        match self {
            CostProxy::LengthMinusOne => y.len() as i64 - 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CostProxy::LengthMinusOne => "length_minus_one",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeuristicError {
    #[error("skeleton {0:?} is not a template of the target")]
    NotATemplate(String),
    #[error("filler {filler:?} instantiates to {instantiation:?}, which is not a substring of the target")]
    InvalidFiller { filler: String, instantiation: String },
}

/// Benefit, outlay, and their difference for one (skeleton, filler family).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GainReport {
    pub benefit: i64,
    pub outlay: i64,
    pub gain: i64,
}

/// One admissible filler with its full instantiation and occurrence count.
#[derive(Debug, Clone)]
pub struct FillerBinding {
    pub filler: AssemblyObject,
    pub instantiation: AssemblyObject,
    pub occurrences: usize,
}

/// A mined skeleton with a uniform-length filler family.
#[derive(Debug, Clone)]
pub struct TemplateCandidate {
    pub skeleton: AssemblyObject,
    pub fillers: Vec<FillerBinding>,
    pub gain: GainReport,
}

/// Scores a filler family `U` for a template `T` against the target:
///
/// ```text
/// gain(T, U) = sum_u occ(x_u) * c(x_u)  -  (c(T) + sum_u c(u) + sum_u occ(x_u))
/// ```
///
/// where `x_u` is the full instantiation (every wildcard replaced by `u`) and
/// occurrences are counted non-overlapping.  Every `x_u` must be a substring
/// of the target.
pub fn gain(
    target: &TargetString,
    skeleton: &AssemblyObject,
    fillers: &[AssemblyObject],
    proxy: CostProxy,
) -> Result<GainReport, HeuristicError> {
    if !target.is_template(skeleton) {
        return Err(HeuristicError::NotATemplate(skeleton.as_str().to_string()));
    }
    let all = skeleton.wildcard_positions();
    let mut bindings = Vec::with_capacity(fillers.len());
    for u in fillers {
        let invalid = || HeuristicError::InvalidFiller {
            filler: u.as_str().to_string(),
            instantiation: full_instantiation(skeleton.symbols(), u.symbols())
                .iter()
                .map(|&b| b as char)
                .collect(),
        };
        let x = instantiate(skeleton, all.positions(), u).map_err(|_| invalid())?;
        if !x.is_literal() || !target.is_substring(&x).unwrap_or(false) {
            return Err(invalid());
        }
        let occurrences = target
            .count_occurrences(&x, OccurrenceMode::NonOverlapping)
            .expect("x is literal");
        bindings.push(FillerBinding { filler: u.clone(), instantiation: x, occurrences });
    }
    Ok(score(proxy, skeleton, &bindings))
}

fn score(proxy: CostProxy, skeleton: &AssemblyObject, bindings: &[FillerBinding]) -> GainReport {
    let mut benefit = 0i64;
    let mut outlay = proxy.cost(skeleton);
    for b in bindings {
        benefit += b.occurrences as i64 * proxy.cost(&b.instantiation);
        outlay += proxy.cost(&b.filler) + b.occurrences as i64;
    }
    GainReport { benefit, outlay, gain: benefit - outlay }
}

/// Generalizes two distinct literals into a template: recursively anchor on
/// the longest common substring (ties: leftmost in `x`, then in `y`) and turn
/// each differing region pair into a single wildcard.  Returns `None` when the
/// inputs are equal, share nothing, or a region is empty on exactly one side
/// (a wildcard must consume at least one symbol).
pub fn anti_unify(x: &AssemblyObject, y: &AssemblyObject) -> Option<AssemblyObject> {
    let bytes = generalize(x.symbols(), y.symbols())?;
    let obj = AssemblyObject::new(bytes).ok()?;
    obj.has_template_shape().then_some(obj)
}

fn generalize(x: &[u8], y: &[u8]) -> Option<Vec<u8>> {
    if x == y {
        return Some(x.to_vec());
    }
    if x.is_empty() || y.is_empty() {
        return None;
    }
    match longest_common(x, y) {
        None => Some(vec![WILDCARD]),
        Some((len, px, py)) => {
            let mut out = generalize(&x[..px], &y[..py])?;
            out.extend_from_slice(&x[px..px + len]);
            out.extend(generalize(&x[px + len..], &y[py + len..])?);
            Some(out)
        }
    }
}

/// Longest common substring as `(len, start_x, start_y)`; ties prefer the
/// smaller start in `x`, then in `y`.
fn longest_common(x: &[u8], y: &[u8]) -> Option<(usize, usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    let mut prev = vec![0usize; y.len() + 1];
    let mut cur = vec![0usize; y.len() + 1];
    for i in 0..x.len() {
        for j in 0..y.len() {
            cur[j + 1] = if x[i] == y[j] { prev[j] + 1 } else { 0 };
            let l = cur[j + 1];
            if l > 0 {
                let cand = (l, i + 1 - l, j + 1 - l);
                let better = match best {
                    None => true,
                    Some((bl, bx, by)) => l > bl || (l == bl && (cand.1, cand.2) < (bx, by)),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

fn full_instantiation(template: &[u8], filler: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(template.len() + filler.len());
    for &b in template {
        if b == WILDCARD {
            out.extend_from_slice(filler);
        } else {
            out.push(b);
        }
    }
    out
}

/// Mines template candidates from the target.
///
/// Skeletons come from anti-unifying ordered pairs of distinct substrings
/// (length >= 4, within the configured template bounds) that share their first
/// symbol.  Each skeleton gets one candidate per admissible filler length,
/// whose family is every filler of that length with `x_u` a substring of the
/// target and at least one realizable occurrence.  Candidates are sorted by
/// gain descending (ties: shorter skeleton, lexicographic skeleton, shorter
/// fillers).
pub fn mine_templates(w: &TargetString, cfg: &SearchConfig) -> Vec<TemplateCandidate> {
    let whole = [w.text()];
    mine_over(w, &whole, &whole, cfg, CostProxy::default())
}

/// Mining core: `sub_corpus` supplies the substring pairs for skeletons,
/// `occ_corpus` the occurrence counts (the greedy heuristic mines the
/// uncommitted remainder rather than the whole target).
fn mine_over(
    w: &TargetString,
    sub_corpus: &[&[u8]],
    occ_corpus: &[&[u8]],
    cfg: &SearchConfig,
    proxy: CostProxy,
) -> Vec<TemplateCandidate> {
    let n = w.len();
    let max_len = cfg.effective_template_max_len(n);
    let max_stars = cfg.template_max_stars.min(n.saturating_sub(1));

    let mut pair_subs: BTreeSet<&[u8]> = BTreeSet::new();
    for seg in sub_corpus {
        for l in 4..=max_len.min(seg.len()) {
            for s in 0..=(seg.len() - l) {
                pair_subs.insert(&seg[s..s + l]);
            }
        }
    }
    let pair_subs: Vec<&[u8]> = pair_subs.into_iter().collect();

    let mut skeletons: BTreeSet<Vec<u8>> = BTreeSet::new();
    for &x in &pair_subs {
        for &y in &pair_subs {
            if x == y || x[0] != y[0] {
                continue;
            }
            let Some(t) = generalize(x, y) else { continue };
            let stars = t.iter().filter(|&&b| b == WILDCARD).count();
            if stars == 0 || stars == t.len() || stars > max_stars || t.len() > max_len {
                continue;
            }
            skeletons.insert(t);
        }
    }

    let mut filler_pool: BTreeSet<&[u8]> = BTreeSet::new();
    let text = w.text();
    for l in 1..=n {
        for s in 0..=(n - l) {
            filler_pool.insert(&text[s..s + l]);
        }
    }

    let mut out = Vec::new();
    for t in &skeletons {
        let tobj = AssemblyObject::new(&t[..]).expect("skeleton symbols are valid");
        debug_assert!(w.is_template(&tobj));
        let stars = tobj.wildcard_count();
        let mut families: BTreeMap<usize, Vec<(&[u8], Vec<u8>)>> = BTreeMap::new();
        for &u in &filler_pool {
            let xlen = t.len() + stars * (u.len() - 1);
            if xlen > n {
                continue;
            }
            let xbytes = full_instantiation(t, u);
            if !w.contains_bytes(&xbytes) {
                continue;
            }
            families.entry(u.len()).or_default().push((u, xbytes));
        }
        for members in families.into_values() {
            // Occurrences are what one commit could realize: a mutually
            // disjoint leftmost scan over the whole family.  Within a family
            // every instantiation has the same length, so at most one member
            // matches at a position.
            let xlen = members[0].1.len();
            let mut occ = vec![0usize; members.len()];
            for seg in occ_corpus {
                let mut pos = 0;
                while pos + xlen <= seg.len() {
                    match members.iter().position(|(_, x)| &seg[pos..pos + xlen] == &x[..]) {
                        Some(i) => {
                            occ[i] += 1;
                            pos += xlen;
                        }
                        None => pos += 1,
                    }
                }
            }
            let fillers: Vec<FillerBinding> = members
                .iter()
                .zip(&occ)
                .filter(|&(_, &o)| o > 0)
                .map(|(&(u, ref x), &o)| FillerBinding {
                    filler: AssemblyObject::new(u).expect("filler symbols are valid"),
                    instantiation: AssemblyObject::new(&x[..]).expect("instantiation is valid"),
                    occurrences: o,
                })
                .collect();
            if fillers.is_empty() {
                continue;
            }
            let gain = score(proxy, &tobj, &fillers);
            out.push(TemplateCandidate { skeleton: tobj.clone(), fillers, gain });
        }
    }

    out.sort_by(|a, b| {
        b.gain
            .gain
            .cmp(&a.gain.gain)
            .then(a.skeleton.len().cmp(&b.skeleton.len()))
            .then(a.skeleton.symbols().cmp(b.skeleton.symbols()))
            .then(a.fillers[0].filler.len().cmp(&b.fillers[0].filler.len()))
    });
    out
}

/// Options for [`greedy_heuristic_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicOptions {
    /// Rank candidates by occurrence counts over the whole target instead of
    /// the uncommitted remainder (realization still happens in the remainder).
    pub occ_against_target: bool,
}

/// Greedy macro-template heuristic.  Repeatedly mines the uncommitted part of
/// the target, commits the best positive-gain candidate — the skeleton
/// assembled once, each realized filler assembled once, one full
/// instantiation per realized filler — and finally factors the remainder by
/// greedy concatenation.  Always returns a valid templated plan.
pub fn greedy_heuristic(w: &TargetString, cfg: &SearchConfig) -> AssemblyPlan {
    greedy_heuristic_with(w, cfg, HeuristicOptions::default())
}

pub fn greedy_heuristic_with(
    w: &TargetString,
    cfg: &SearchConfig,
    opts: HeuristicOptions,
) -> AssemblyPlan {
    #[derive(Clone, Copy)]
    enum Token {
        /// Half-open span of the target not yet covered by a commitment.
        Raw(usize, usize),
        /// Step index of a committed instantiation.
        Done(usize),
    }

    let text = w.text();
    let mut builder = PlanBuilder::new(w, PlanMode::Templated);
    let mut tokens = vec![Token::Raw(0, text.len())];

    for _ in 0..text.len() {
        let segments: Vec<&[u8]> = tokens
            .iter()
            .filter_map(|t| match *t {
                Token::Raw(s, e) => Some(&text[s..e]),
                Token::Done(_) => None,
            })
            .collect();
        if segments.is_empty() {
            break;
        }
        let whole = [text];
        let occ_corpus: &[&[u8]] = if opts.occ_against_target { &whole } else { &segments };
        let cand = match mine_over(w, &segments, occ_corpus, cfg, CostProxy::default())
            .into_iter()
            .next()
        {
            Some(c) if c.gain.gain > 0 => c,
            _ => break,
        };

        // Realize occurrences in the raw spans: greedy leftmost scan, longer
        // instantiations first.
        let mut order: Vec<usize> = (0..cand.fillers.len()).collect();
        order.sort_by(|&a, &b| {
            let xa = cand.fillers[a].instantiation.symbols();
            let xb = cand.fillers[b].instantiation.symbols();
            xb.len().cmp(&xa.len()).then(xa.cmp(xb))
        });
        let mut hits: Vec<(usize, usize, usize)> = Vec::new(); // (token, start, binding)
        for (ti, tok) in tokens.iter().enumerate() {
            let Token::Raw(s, e) = *tok else { continue };
            let mut pos = s;
            'scan: while pos < e {
                for &bi in &order {
                    let x = cand.fillers[bi].instantiation.symbols();
                    if pos + x.len() <= e && &text[pos..pos + x.len()] == x {
                        hits.push((ti, pos, bi));
                        pos += x.len();
                        continue 'scan;
                    }
                }
                pos += 1;
            }
        }
        if hits.is_empty() {
            break;
        }

        let t_step = builder.assemble(cand.skeleton.symbols());
        let mut inst_step = vec![usize::MAX; cand.fillers.len()];
        for bi in 0..cand.fillers.len() {
            if hits.iter().any(|&(_, _, b)| b == bi) {
                let f_step = builder.assemble(cand.fillers[bi].filler.symbols());
                inst_step[bi] = builder.instantiate_all(t_step, f_step);
            }
        }

        let mut next: Vec<Token> = Vec::with_capacity(tokens.len() + 2 * hits.len());
        let mut hi = 0;
        for (ti, tok) in tokens.iter().enumerate() {
            let Token::Raw(s, e) = *tok else {
                next.push(*tok);
                continue;
            };
            let mut cur = s;
            while hi < hits.len() && hits[hi].0 == ti {
                let (_, start, bi) = hits[hi];
                hi += 1;
                if start > cur {
                    next.push(Token::Raw(cur, start));
                }
                next.push(Token::Done(inst_step[bi]));
                cur = start + cand.fillers[bi].instantiation.len();
            }
            if cur < e {
                next.push(Token::Raw(cur, e));
            }
        }
        tokens = next;
    }

    let mut steps = Vec::with_capacity(tokens.len());
    for tok in &tokens {
        steps.push(match *tok {
            Token::Raw(s, e) => builder.assemble(&text[s..e]),
            Token::Done(step) => step,
        });
    }
    let mut acc = steps[0];
    for &s in &steps[1..] {
        acc = builder.concat(acc, s);
    }
    builder.finish()
}

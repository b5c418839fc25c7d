//! Incremental plan construction with object reuse.
//!
//! `PlanBuilder` keeps a pool of every object built so far (monomers are
//! added lazily and are free) and emits steps on demand.  Its `assemble`
//! routine builds an arbitrary object greedily:
//!
//! 1. pool hit — nothing to emit;
//! 2. otherwise factor out the longest substring with two or more
//!    non-overlapping occurrences (grammar-compression style), build it
//!    once, and reuse it for every occurrence;
//! 3. otherwise chop the string into greedy longest pool-prefix chunks.
//!
//! Pieces are concatenated around the first literal-containing piece so
//! every intermediate is a contiguous slice of the final string containing
//! at least one literal symbol — such slices of universe members are
//! themselves universe members, which keeps emitted plans verifiable.

use std::collections::HashMap;

use crate::plan::{AssemblyPlan, PlanMode, PlanStep};
use crate::universe::{AssemblyObject, TargetString, WILDCARD};

pub struct PlanBuilder {
    target: TargetString,
    mode: PlanMode,
    steps: Vec<PlanStep>,
    objects: Vec<AssemblyObject>,
    pool: HashMap<Vec<u8>, usize>,
}

impl PlanBuilder {
    pub fn new(target: &TargetString, mode: PlanMode) -> Self {
        PlanBuilder {
            target: target.clone(),
            mode,
            steps: Vec::new(),
            objects: Vec::new(),
            pool: HashMap::new(),
        }
    }

    pub fn object_at(&self, step: usize) -> &AssemblyObject {
        &self.objects[step]
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn cost(&self) -> usize {
        self.steps.iter().filter(|s| s.is_composite()).count()
    }

    /// The step currently producing `symbols`, if any.
    pub fn lookup(&self, symbols: &[u8]) -> Option<usize> {
        self.pool.get(symbols).copied()
    }

    fn push(&mut self, step: PlanStep, object: AssemblyObject) -> usize {
        let index = self.steps.len();
        self.steps.push(step);
        self.pool.entry(object.symbols().to_vec()).or_insert(index);
        self.objects.push(object);
        index
    }

    /// Step index of a monomer, emitting it on first use.
    pub fn monomer(&mut self, symbol: u8) -> usize {
        if let Some(&i) = self.pool.get(std::slice::from_ref(&symbol)) {
            return i;
        }
        self.push(PlanStep::Monomer { symbol }, AssemblyObject::monomer(symbol))
    }

    pub fn concat(&mut self, left: usize, right: usize) -> usize {
        let product = self.objects[left].concat(&self.objects[right]);
        debug_assert!(
            self.target.is_object(&product),
            "concat product {:?} left the universe",
            product.as_str()
        );
        if let Some(&i) = self.pool.get(product.symbols()) {
            return i;
        }
        self.push(PlanStep::Concat { left, right }, product)
    }

    /// Full-parallel instantiation of every wildcard of `template`.
    pub fn instantiate_all(&mut self, template: usize, filler: usize) -> usize {
        let tpl = &self.objects[template];
        let positions = tpl.wildcard_positions();
        let ordinals: Vec<usize> = (1..=positions.len()).collect();
        let product = crate::universe::instantiate(
            tpl,
            positions.positions(),
            &self.objects[filler],
        )
        .expect("builder instantiates templates only");
        debug_assert!(
            self.target.is_object(&product),
            "instantiation product {:?} left the universe",
            product.as_str()
        );
        if let Some(&i) = self.pool.get(product.symbols()) {
            return i;
        }
        self.push(
            PlanStep::Instantiate { template, selection: ordinals, filler },
            product,
        )
    }

    /// Builds `symbols` greedily and returns the producing step.
    pub fn assemble(&mut self, symbols: &[u8]) -> usize {
        debug_assert!(!symbols.is_empty());
        if symbols.len() == 1 {
            return self.monomer(symbols[0]);
        }
        if let Some(&i) = self.pool.get(symbols) {
            return i;
        }
        let pieces = match self.repeat_factoring(symbols) {
            Some(pieces) => pieces,
            None => self.pool_chunks(symbols),
        };
        self.combine(symbols, pieces)
    }

    /// Longest substring with >= 2 non-overlapping occurrences, scanning
    /// lengths descending and starts ascending.  Returns the piece split of
    /// `symbols` induced by the greedy leftmost occurrences.
    fn repeat_factoring(&mut self, symbols: &[u8]) -> Option<Vec<Piece>> {
        let n = symbols.len();
        for len in (2..n).rev() {
            for start in 0..=n - len {
                let r = &symbols[start..start + len];
                if !r.iter().any(|&s| s != WILDCARD) {
                    continue; // all-wildcard strings cannot stand alone
                }
                let occ = crate::universe::occurrence_starts(
                    symbols,
                    r,
                    crate::universe::OccurrenceMode::NonOverlapping,
                );
                if occ.len() < 2 {
                    continue;
                }
                let repeat = self.assemble(r);
                let mut pieces = Vec::new();
                let mut pos = 0;
                for o in occ {
                    if o > pos {
                        self.raw_pieces(&symbols[pos..o], &mut pieces);
                    }
                    pieces.push(Piece { step: repeat, literal: true });
                    pos = o + len;
                }
                if pos < n {
                    self.raw_pieces(&symbols[pos..n], &mut pieces);
                }
                return Some(pieces);
            }
        }
        None
    }

    /// Assembles a raw segment between repeat occurrences.  Segments with a
    /// literal stand alone; all-wildcard segments are appended symbol by
    /// symbol because `**...` is never a universe member on its own.
    fn raw_pieces(&mut self, segment: &[u8], pieces: &mut Vec<Piece>) {
        if segment.iter().any(|&s| s != WILDCARD) {
            let step = self.assemble(segment);
            pieces.push(Piece { step, literal: true });
        } else {
            for &s in segment {
                let step = self.monomer(s);
                pieces.push(Piece { step, literal: false });
            }
        }
    }

    /// Greedy longest pool-prefix chunking (monomers as a fallback).
    fn pool_chunks(&mut self, symbols: &[u8]) -> Vec<Piece> {
        let n = symbols.len();
        let mut pieces = Vec::new();
        let mut i = 0;
        while i < n {
            let mut len = 1;
            let max = n - i;
            // Never swallow the whole string: `assemble` already missed it.
            let cap = if i == 0 { max - 1 } else { max };
            for l in (2..=cap).rev() {
                if self.pool.contains_key(&symbols[i..i + l]) {
                    len = l;
                    break;
                }
            }
            let step = if len == 1 {
                self.monomer(symbols[i])
            } else {
                *self.pool.get(&symbols[i..i + len]).unwrap()
            };
            pieces.push(Piece { step, literal: symbols[i..i + len].iter().any(|&s| s != WILDCARD) });
            i += len;
        }
        pieces
    }

    /// Concatenates pieces around the first literal-containing piece so
    /// every intermediate slice contains a literal.
    fn combine(&mut self, symbols: &[u8], pieces: Vec<Piece>) -> usize {
        debug_assert!(!pieces.is_empty());
        if pieces.len() == 1 {
            return pieces[0].step;
        }
        let anchor = pieces
            .iter()
            .position(|p| p.literal)
            .expect("assembled strings contain a literal symbol");
        let mut acc = pieces[anchor].step;
        for piece in pieces[..anchor].iter().rev() {
            acc = self.concat(piece.step, acc);
        }
        for piece in &pieces[anchor + 1..] {
            acc = self.concat(acc, piece.step);
        }
        debug_assert_eq!(self.objects[acc].symbols(), symbols);
        acc
    }

    pub fn finish(self) -> AssemblyPlan {
        AssemblyPlan::new(self.target, self.mode, self.steps)
    }
}

struct Piece {
    step: usize,
    literal: bool,
}

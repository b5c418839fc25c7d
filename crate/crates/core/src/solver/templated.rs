//! Search engine for the templated assembly index.
//!
//! The templated universe (substrings plus matching templates) is too rich
//! to tabulate up front, so objects are interned lazily as the search
//! discovers them as products.  Positions in the assembly order are keys
//! `(length, wildcards descending, intern id)`: concatenations strictly
//! grow, instantiation by a built object strictly grows, and instantiation
//! by a letter keeps the length while strictly shedding wildcards, so every
//! operand precedes its product and ascending-key enumeration visits each
//! assembled set once.
//!
//! Candidates carry the generation that first produced them; the operands
//! of that generation were available when it was discovered, which makes
//! witness reconstruction a replay.  For the orphan bound every discovered
//! generation additionally marks its operands as possibly-consumed
//! (optimistically, hence soundly).  The search is sequential; determinism
//! follows from the fixed intern order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::{BuildHasherDefault, Hasher};
use std::ops::Bound;
use std::time::Instant;

use crate::plan::{AssemblyPlan, PlanMode, PlanStep};
use crate::universe::{AssemblyObject, TargetString, WILDCARD};

use super::SearchConfig;

pub(super) enum Outcome {
    Found(AssemblyPlan),
    Refuted,
    TimedOut,
}

enum Step {
    Found(AssemblyPlan),
    Refuted,
    TimedOut,
}

/// (length, !wildcards, intern id) — ascending order is assembly order.
type Key = (u16, u16, u32);

/// Interning and mark updates sit on the hot path; FNV-style mixing beats
/// the default hasher for short byte strings and intern ids, and hashing
/// never feeds ordering, so determinism is unaffected.
#[derive(Default)]
struct Fnv(u64);

impl Hasher for Fnv {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        let mut h = if self.0 == 0 { 0xCBF2_9CE4_8422_2325 } else { self.0 };
        for &b in bytes {
            h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3);
        }
        self.0 = h;
    }

    fn write_u32(&mut self, v: u32) {
        self.0 = (self.0 ^ v as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }

    fn write_usize(&mut self, v: usize) {
        self.write_u64(v as u64);
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0 ^ v).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }
}

type FnvBuild = BuildHasherDefault<Fnv>;

#[derive(Debug, Copy, Clone)]
enum Gen {
    Concat(u32, u32),
    /// Template id, bitmask selecting wildcard ordinals, filler id.
    Inst(u32, u64, u32),
}

impl Gen {
    fn operands(self) -> (u32, u32) {
        match self {
            Gen::Concat(a, b) => (a, b),
            Gen::Inst(t, _, u) => (t, u),
        }
    }
}

struct ObjInfo {
    bytes: Vec<u8>,
    /// Wildcard positions, ascending.
    stars: Vec<u16>,
    /// In the universe and within the configured template bounds.
    admitted: bool,
}

struct Ctx {
    deadline: Option<Instant>,
    nodes: u64,
}

pub(super) struct TemplatedEngine<'w> {
    w: &'w TargetString,
    n: usize,
    /// Largest per-step length growth factor: 2 for concatenation,
    /// `1 + max_stars` for instantiation.
    growth: usize,
    max_len: usize,
    max_stars: usize,
    allow_adjacent: bool,
    template_fillers: bool,

    objs: Vec<ObjInfo>,
    map: HashMap<Vec<u8>, u32, FnvBuild>,
    /// Operands of every generation discovered for each object, across the
    /// whole search: optimistic possibly-consumed marks.
    marks: Vec<HashSet<u32, FnvBuild>>,
    monomers: Vec<u32>,
    letters: Vec<u32>,
    w_key: Key,

    cand: BTreeMap<Key, Gen>,
    /// Mirrors `cand` membership by id; most product discoveries hit an
    /// already-queued candidate, and this check is much cheaper than the
    /// tree walk.
    in_cand: Vec<bool>,
    built: Vec<u32>,
    is_built: Vec<bool>,
    gens: Vec<Gen>,
    /// How many built objects mark each id as possibly consumed.
    used_counts: Vec<u32>,
    /// Product bytes are assembled here before interning, so discovering an
    /// already-interned product allocates nothing.
    scratch: Vec<u8>,
    /// One undo journal per depth, reused across siblings.
    undo_pool: Vec<Vec<Key>>,
    /// Admitted product of each ordered operand pair, or `None` when the
    /// product is too long or outside the universe.  Operand sets repeat
    /// heavily between nodes, so almost every product try is a memo hit.
    concat_memo: HashMap<(u32, u32), Option<u32>, FnvBuild>,
    inst_memo: HashMap<(u32, u64, u32), Option<u32>, FnvBuild>,
}

impl<'w> TemplatedEngine<'w> {
    pub(super) fn new(w: &'w TargetString, cfg: &SearchConfig) -> Self {
        let n = w.len();
        let max_stars = cfg.template_max_stars.min(n.saturating_sub(1));
        let mut engine = TemplatedEngine {
            w,
            n,
            growth: 2.max(1 + max_stars),
            max_len: cfg.effective_template_max_len(n).min(n),
            max_stars,
            allow_adjacent: cfg.allow_adjacent_stars,
            template_fillers: cfg.allow_template_fillers,
            objs: Vec::new(),
            map: HashMap::default(),
            marks: Vec::new(),
            monomers: Vec::new(),
            letters: Vec::new(),
            w_key: (0, 0, 0),
            cand: BTreeMap::new(),
            in_cand: Vec::new(),
            built: Vec::new(),
            is_built: Vec::new(),
            gens: Vec::new(),
            used_counts: Vec::new(),
            scratch: Vec::new(),
            undo_pool: Vec::new(),
            concat_memo: HashMap::default(),
            inst_memo: HashMap::default(),
        };
        for &c in w.alphabet() {
            let id = engine.intern(vec![c]);
            engine.letters.push(id);
            engine.monomers.push(id);
        }
        let star = engine.intern(vec![WILDCARD]);
        engine.monomers.push(star);
        let w_id = engine.intern(w.text().to_vec());
        engine.w_key = engine.key_of(w_id);
        engine
    }

    fn intern(&mut self, bytes: Vec<u8>) -> u32 {
        if let Some(&id) = self.map.get(bytes.as_slice()) {
            return id;
        }
        let id = self.objs.len() as u32;
        let obj = AssemblyObject::new(&bytes).expect("generated objects are nonempty");
        let stars: Vec<u16> =
            obj.wildcard_positions().positions().iter().map(|&p| p as u16).collect();
        let admitted = self.w.is_object(&obj)
            && (stars.is_empty()
                || (bytes.len() <= self.max_len
                    && stars.len() <= self.max_stars
                    && (self.allow_adjacent || !obj.has_adjacent_wildcards())));
        self.map.insert(bytes.clone(), id);
        self.objs.push(ObjInfo { bytes, stars, admitted });
        self.marks.push(HashSet::default());
        self.used_counts.push(0);
        self.is_built.push(false);
        self.in_cand.push(false);
        id
    }

    fn key_of(&self, id: u32) -> Key {
        let o = &self.objs[id as usize];
        (o.bytes.len() as u16, u16::MAX - o.stars.len() as u16, id)
    }

    /// One deepening iteration; smaller limits must already be refuted.
    pub(super) fn run(
        &mut self,
        limit: usize,
        deadline: Option<Instant>,
        nodes: &mut u64,
    ) -> Outcome {
        self.cand.clear();
        self.built.clear();
        self.gens.clear();
        self.used_counts.iter_mut().for_each(|c| *c = 0);
        self.is_built.iter_mut().for_each(|b| *b = false);
        self.in_cand.iter_mut().for_each(|c| *c = false);
        if self.undo_pool.len() < limit {
            self.undo_pool.resize_with(limit, Vec::new);
        }
        let mut root_undo = Vec::new();
        let ms = self.monomers.clone();
        for &a in &ms {
            for &b in &ms {
                self.try_concat(a, b, &mut root_undo);
            }
        }
        let mut ctx = Ctx { deadline, nodes: 0 };
        let step = self.dfs(0, (0, 0, 0), 1, limit, &mut ctx);
        *nodes += ctx.nodes;
        match step {
            Step::Found(plan) => Outcome::Found(plan),
            Step::Refuted => Outcome::Refuted,
            Step::TimedOut => Outcome::TimedOut,
        }
    }

    fn dfs(&mut self, g: usize, last: Key, maxlen: usize, limit: usize, ctx: &mut Ctx) -> Step {
        ctx.nodes += 1;
        if ctx.nodes & 0xFFF == 0 {
            if let Some(d) = ctx.deadline {
                if Instant::now() >= d {
                    return Step::TimedOut;
                }
            }
        }
        if let Some(&gen) = self.cand.get(&self.w_key) {
            return Step::Found(self.materialize(gen));
        }
        let r = limit - g;
        if r <= 1 {
            return Step::Refuted;
        }

        // Length threshold: the longest object grows by at most `growth`
        // per production, so with r - 1 productions after the next one the
        // next object must reach n / growth^(r-1) unless maxlen already has.
        let mut need = self.n;
        let mut left = r - 1;
        while left > 0 && need > maxlen {
            need = need.div_ceil(self.growth);
            left -= 1;
        }
        let constrained = need > maxlen;
        let mut cursor = if constrained && (need as u16, 0u16, 0u32) > last {
            Bound::Included((need as u16, 0u16, 0u32))
        } else {
            Bound::Excluded(last)
        };

        let unrescued =
            self.built.iter().filter(|&&b| self.used_counts[b as usize] == 0).count();
        let check_orphans = unrescued + 1 > r;

        // Descending into a child changes the candidate set but the undo
        // restores it, so siblings can be walked with a range cursor instead
        // of a snapshot.
        loop {
            let Some((&key, &gen)) = self.cand.range((cursor, Bound::Unbounded)).next() else {
                break;
            };
            cursor = Bound::Excluded(key);
            let z = key.2;
            if check_orphans {
                // The new object is never consumable by what exists, and
                // its generations can rescue some of the unconsumed built
                // objects; more than r leftovers cannot all be used by the
                // r remaining productions.
                let orphans = 1 + self
                    .built
                    .iter()
                    .filter(|&&b| {
                        self.used_counts[b as usize] == 0
                            && !self.marks[z as usize].contains(&b)
                    })
                    .count();
                if orphans > r {
                    continue;
                }
            }

            self.cand.remove(&key).expect("cursor key vanished from candidates");
            self.in_cand[z as usize] = false;
            self.built.push(z);
            self.is_built[z as usize] = true;
            self.gens.push(gen);
            for &m in &self.marks[z as usize] {
                self.used_counts[m as usize] += 1;
            }

            let mut undo = std::mem::take(&mut self.undo_pool[g]);
            undo.clear();
            self.enumerate_products(z, &mut undo);
            let step = self.dfs(g + 1, key, maxlen.max(key.0 as usize), limit, ctx);

            for &k in &undo {
                self.cand.remove(&k);
                self.in_cand[k.2 as usize] = false;
            }
            self.undo_pool[g] = undo;
            for &m in &self.marks[z as usize] {
                self.used_counts[m as usize] -= 1;
            }
            self.gens.pop();
            self.is_built[z as usize] = false;
            self.built.pop();
            self.cand.insert(key, gen);
            self.in_cand[z as usize] = true;

            match step {
                Step::Refuted => {}
                other => return other,
            }
        }
        Step::Refuted
    }

    /// All products with `z` as an operand, drawn from monomers and the
    /// built objects (including `z` itself).
    fn enumerate_products(&mut self, z: u32, undo: &mut Vec<Key>) {
        let ml = self.monomers.len();
        for i in 0..ml + self.built.len() {
            let x = if i < ml { self.monomers[i] } else { self.built[i - ml] };
            self.try_concat(x, z, undo);
            if x != z {
                self.try_concat(z, x, undo);
            }
        }

        let z_template = !self.objs[z as usize].stars.is_empty();
        if z_template {
            let ll = self.letters.len();
            for i in 0..ll + self.built.len() {
                let u = if i < ll { self.letters[i] } else { self.built[i - ll] };
                if i >= ll
                    && !self.objs[u as usize].stars.is_empty()
                    && !self.template_fillers
                {
                    continue;
                }
                self.inst_all_masks(z, u, undo);
            }
        }
        if !z_template || self.template_fillers {
            for i in 0..self.built.len() {
                let t = self.built[i];
                if t == z || self.objs[t as usize].stars.is_empty() {
                    continue;
                }
                self.inst_all_masks(t, z, undo);
            }
        }
    }

    fn try_concat(&mut self, a: u32, b: u32, undo: &mut Vec<Key>) {
        if let Some(&memo) = self.concat_memo.get(&(a, b)) {
            if let Some(id) = memo {
                self.offer(id, Gen::Concat(a, b), undo);
            }
            return;
        }
        let la = self.objs[a as usize].bytes.len();
        let lb = self.objs[b as usize].bytes.len();
        let product = if la + lb > self.n {
            None
        } else {
            self.scratch.clear();
            self.scratch.extend_from_slice(&self.objs[a as usize].bytes);
            self.scratch.extend_from_slice(&self.objs[b as usize].bytes);
            self.admit_scratch(Gen::Concat(a, b), undo)
        };
        self.concat_memo.insert((a, b), product);
    }

    fn inst_all_masks(&mut self, t: u32, u: u32, undo: &mut Vec<Key>) {
        let s = self.objs[t as usize].stars.len();
        for mask in 1u64..(1u64 << s) {
            self.try_inst(t, mask, u, undo);
        }
    }

    fn try_inst(&mut self, t: u32, mask: u64, u: u32, undo: &mut Vec<Key>) {
        if let Some(&memo) = self.inst_memo.get(&(t, mask, u)) {
            if let Some(id) = memo {
                self.offer(id, Gen::Inst(t, mask, u), undo);
            }
            return;
        }
        let picked = mask.count_ones() as usize;
        let ulen = self.objs[u as usize].bytes.len();
        let plen = self.objs[t as usize].bytes.len() + picked * (ulen - 1);
        let product = if plen > self.n {
            None
        } else {
            let TemplatedEngine { objs, scratch, .. } = self;
            scratch.clear();
            let tpl = &objs[t as usize];
            let u_bytes = &objs[u as usize].bytes;
            let mut next_star = 0usize;
            for (i, &c) in tpl.bytes.iter().enumerate() {
                if next_star < tpl.stars.len() && tpl.stars[next_star] as usize == i {
                    let selected = mask >> next_star & 1 == 1;
                    next_star += 1;
                    if selected {
                        scratch.extend_from_slice(u_bytes);
                        continue;
                    }
                }
                scratch.push(c);
            }
            debug_assert_eq!(self.scratch.len(), plen);
            self.admit_scratch(Gen::Inst(t, mask, u), undo)
        };
        self.inst_memo.insert((t, mask, u), product);
    }

    /// Intern whatever sits in the scratch buffer; an admitted product has
    /// its operands marked and is queued.  Returns the admitted id for the
    /// product memos.
    fn admit_scratch(&mut self, gen: Gen, undo: &mut Vec<Key>) -> Option<u32> {
        let id = match self.map.get(self.scratch.as_slice()) {
            Some(&id) => id,
            None => {
                let bytes = self.scratch.clone();
                self.intern(bytes)
            }
        };
        if !self.objs[id as usize].admitted {
            return None;
        }
        let (a, b) = gen.operands();
        self.marks[id as usize].insert(a);
        self.marks[id as usize].insert(b);
        self.offer(id, gen, undo);
        Some(id)
    }

    /// Queue an admitted product unless it is already pending or built.
    fn offer(&mut self, id: u32, gen: Gen, undo: &mut Vec<Key>) {
        if self.in_cand[id as usize] || self.is_built[id as usize] {
            return;
        }
        let key = self.key_of(id);
        self.cand.insert(key, gen);
        self.in_cand[id as usize] = true;
        undo.push(key);
    }

    /// Replay the generations of the built path plus the target.
    fn materialize(&self, w_gen: Gen) -> AssemblyPlan {
        let mut steps: Vec<PlanStep> = Vec::new();
        let mut step_of: HashMap<u32, usize> = HashMap::new();
        for i in 0..self.built.len() {
            let s = self.emit(self.gens[i], &mut steps, &mut step_of);
            step_of.insert(self.built[i], s);
        }
        self.emit(w_gen, &mut steps, &mut step_of);
        AssemblyPlan::new(self.w.clone(), PlanMode::Templated, steps)
    }

    fn emit(
        &self,
        gen: Gen,
        steps: &mut Vec<PlanStep>,
        step_of: &mut HashMap<u32, usize>,
    ) -> usize {
        match gen {
            Gen::Concat(a, b) => {
                let left = self.resolve(a, steps, step_of);
                let right = self.resolve(b, steps, step_of);
                steps.push(PlanStep::Concat { left, right });
            }
            Gen::Inst(t, mask, u) => {
                let template = self.resolve(t, steps, step_of);
                let filler = self.resolve(u, steps, step_of);
                let selection: Vec<usize> = (0..self.objs[t as usize].stars.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| i + 1)
                    .collect();
                steps.push(PlanStep::Instantiate { template, selection, filler });
            }
        }
        steps.len() - 1
    }

    fn resolve(
        &self,
        id: u32,
        steps: &mut Vec<PlanStep>,
        step_of: &mut HashMap<u32, usize>,
    ) -> usize {
        if let Some(&s) = step_of.get(&id) {
            return s;
        }
        let info = &self.objs[id as usize];
        assert_eq!(info.bytes.len(), 1, "unresolved operand must be a monomer");
        steps.push(PlanStep::Monomer { symbol: info.bytes[0] });
        step_of.insert(id, steps.len() - 1);
        steps.len() - 1
    }
}

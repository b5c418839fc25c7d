//! Search engine for the canonical (concatenation-only) assembly index.
//!
//! Setup interns every distinct substring of the target and sorts them by
//! (length, bytes); ids are dense, letters first, the target last.  A flat
//! table maps every id pair to its concatenation (when that is again a
//! substring), so the search never touches bytes.  States are bitsets over
//! ids: `avail` (letters plus built), `built`, `cand` (objects buildable
//! from `avail` in one step, not yet built) and `used` (optimistic marks:
//! everything appearing in any split of a built object).
//!
//! The DFS adds objects in strictly ascending id order.  Operands are
//! strictly shorter than their product, hence have smaller ids, so every
//! plan has exactly one ascending representative and no assembled set is
//! visited twice within an iteration.  Pruning:
//!
//! * doubling: with `r` productions left the longest object can at most
//!   double `r` times, so short candidates are skipped wholesale by jumping
//!   to the first id of sufficient length;
//! * orphans: a built object no future production could still consume makes
//!   the state infeasible once there are more than `r + 1` of them (each of
//!   the `r` remaining productions has two operand slots, and all but the
//!   final target must themselves be consumed);
//! * at `r == 2` only candidates completing a split of the target matter.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use crate::builder::PlanBuilder;
use crate::plan::{AssemblyPlan, PlanMode};
use crate::universe::TargetString;

use super::SearchConfig;

pub(super) enum Outcome {
    /// Built objects in ascending id order, target last.
    Found(Vec<u16>),
    Refuted,
    TimedOut,
}

enum Step {
    Found(Vec<u16>),
    Refuted,
    TimedOut,
    /// Another worker already found a witness; this refutation is moot.
    Aborted,
}

struct Bufs {
    avail: Vec<u64>,
    built: Vec<u64>,
    cand: Vec<u64>,
    used: Vec<u64>,
}

struct Prefix {
    avail: Vec<u64>,
    built: Vec<u64>,
    cand: Vec<u64>,
    used: Vec<u64>,
    path: Vec<u16>,
    last: i32,
    maxlen: u16,
}

struct Ctx<'a> {
    deadline: Option<Instant>,
    stop: Option<&'a AtomicBool>,
    nodes: u64,
}

impl Ctx<'_> {
    #[inline]
    fn tick(&mut self) -> Option<Step> {
        self.nodes += 1;
        if self.nodes & 0xFFF == 0 {
            if let Some(stop) = self.stop {
                if stop.load(Ordering::Relaxed) {
                    return Some(Step::Aborted);
                }
            }
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return Some(Step::TimedOut);
                }
            }
        }
        None
    }
}

#[inline]
fn set_bit(words: &mut [u64], i: usize) {
    words[i >> 6] |= 1u64 << (i & 63);
}

#[inline]
fn test_bit(words: &[u64], i: usize) -> bool {
    words[i >> 6] & (1u64 << (i & 63)) != 0
}

#[inline]
fn next_bit(words: &[u64], from: usize) -> Option<usize> {
    let mut wi = from >> 6;
    if wi >= words.len() {
        return None;
    }
    let mut cur = words[wi] & (!0u64 << (from & 63));
    loop {
        if cur != 0 {
            return Some((wi << 6) + cur.trailing_zeros() as usize);
        }
        wi += 1;
        if wi >= words.len() {
            return None;
        }
        cur = words[wi];
    }
}

pub(super) struct CanonicalEngine {
    n: usize,
    n_sub: usize,
    words: usize,
    letters: Vec<u16>,
    len_of: Vec<u16>,
    occ_of: Vec<u32>,
    w_id: usize,
    /// `concat[a * n_sub + b]` is the product id plus one, zero when the
    /// concatenation is not a substring of the target.
    concat: Vec<u16>,
    /// Row per id: every id occurring in any split of that id.
    used_mask: Vec<u64>,
    first_with_len: Vec<u16>,
    splits_of_target: Vec<(u16, u16)>,
    text: Vec<u8>,
    id_map: HashMap<Vec<u8>, u16>,
}

impl CanonicalEngine {
    pub(super) fn new(w: &TargetString) -> Self {
        let text = w.text().to_vec();
        let n = text.len();
        let mut subs: Vec<&[u8]> = Vec::new();
        for len in 1..=n {
            for start in 0..=n - len {
                subs.push(&text[start..start + len]);
            }
        }
        subs.sort_unstable_by_key(|s| (s.len(), *s));
        subs.dedup();
        let n_sub = subs.len();
        assert!(n_sub <= u16::MAX as usize - 1, "target too long to intern");

        let mut id_map = HashMap::with_capacity(n_sub);
        let mut len_of = vec![0u16; n_sub];
        let mut occ_of = vec![0u32; n_sub];
        for (id, s) in subs.iter().enumerate() {
            id_map.insert(s.to_vec(), id as u16);
            len_of[id] = s.len() as u16;
            occ_of[id] = (s.as_ptr() as usize - text.as_ptr() as usize) as u32;
        }
        let letters: Vec<u16> = (0..n_sub).filter(|&i| len_of[i] == 1).map(|i| i as u16).collect();
        let w_id = n_sub - 1;

        let mut concat = vec![0u16; n_sub * n_sub];
        let mut buf = Vec::with_capacity(2 * n);
        for a in 0..n_sub {
            for b in 0..n_sub {
                if (len_of[a] + len_of[b]) as usize > n {
                    continue;
                }
                buf.clear();
                buf.extend_from_slice(subs[a]);
                buf.extend_from_slice(subs[b]);
                if let Some(&id) = id_map.get(buf.as_slice()) {
                    concat[a * n_sub + b] = id + 1;
                }
            }
        }

        let words = n_sub.div_ceil(64);
        let mut used_mask = vec![0u64; n_sub * words];
        for (z, s) in subs.iter().enumerate() {
            if s.len() < 2 {
                continue;
            }
            let row = &mut used_mask[z * words..(z + 1) * words];
            for cut in 1..s.len() {
                set_bit(row, id_map[&s[..cut]] as usize);
                set_bit(row, id_map[&s[cut..]] as usize);
            }
        }

        let mut first_with_len = vec![0u16; n + 1];
        let mut seen = 0usize;
        for id in 0..n_sub {
            while seen < len_of[id] as usize {
                seen += 1;
                first_with_len[seen] = id as u16;
            }
        }

        let splits_of_target: Vec<(u16, u16)> =
            (1..n).map(|c| (id_map[&text[..c]], id_map[&text[c..]])).collect();

        CanonicalEngine {
            n,
            n_sub,
            words,
            letters,
            len_of,
            occ_of,
            w_id,
            concat,
            used_mask,
            first_with_len,
            splits_of_target,
            text,
            id_map,
        }
    }

    fn bytes(&self, id: u16) -> &[u8] {
        let start = self.occ_of[id as usize] as usize;
        &self.text[start..start + self.len_of[id as usize] as usize]
    }

    fn fresh_bufs(&self, limit: usize) -> Vec<Bufs> {
        (0..=limit)
            .map(|_| Bufs {
                avail: vec![0u64; self.words],
                built: vec![0u64; self.words],
                cand: vec![0u64; self.words],
                used: vec![0u64; self.words],
            })
            .collect()
    }

    fn init_root(&self, root: &mut Bufs) {
        for &a in &self.letters {
            set_bit(&mut root.avail, a as usize);
        }
        for &a in &self.letters {
            for &b in &self.letters {
                let p = self.concat[a as usize * self.n_sub + b as usize];
                if p != 0 {
                    set_bit(&mut root.cand, (p - 1) as usize);
                }
            }
        }
    }

    /// One deepening iteration: find a plan of cost exactly `limit` or
    /// refute that cost.  `limit` must only be probed after all smaller
    /// costs were refuted, otherwise a cheaper witness could be missed.
    pub(super) fn run(
        &self,
        limit: usize,
        cfg: &SearchConfig,
        deadline: Option<Instant>,
        nodes: &mut u64,
    ) -> Outcome {
        let workers = if cfg.deterministic { 1 } else { cfg.parallelism.max(1) };
        let mut bufs = self.fresh_bufs(limit);
        self.init_root(&mut bufs[0]);
        let mut path: Vec<u16> = Vec::with_capacity(limit + 1);
        let mut sink: Vec<Prefix> = Vec::new();

        if workers <= 1 || limit < 4 {
            let mut ctx = Ctx { deadline, stop: None, nodes: 0 };
            let step = self.dfs(&mut bufs, &mut path, 0, -1, 1, limit, &mut ctx, None, &mut sink);
            *nodes += ctx.nodes;
            return match step {
                Step::Found(v) => Outcome::Found(v),
                Step::Refuted => Outcome::Refuted,
                Step::TimedOut => Outcome::TimedOut,
                Step::Aborted => unreachable!("no stop flag in sequential search"),
            };
        }

        // Parallel: expand the first two levels sequentially (same pruning),
        // then hand each depth-2 state to the pool.  A found witness flips
        // `stop`; aborted refutations are moot because the iteration value
        // is fixed at `limit` either way.
        let mut ctx = Ctx { deadline, stop: None, nodes: 0 };
        let step = self.dfs(&mut bufs, &mut path, 0, -1, 1, limit, &mut ctx, Some(2), &mut sink);
        *nodes += ctx.nodes;
        match step {
            Step::Found(v) => return Outcome::Found(v),
            Step::TimedOut => return Outcome::TimedOut,
            Step::Aborted => unreachable!("no stop flag in prefix enumeration"),
            Step::Refuted => {}
        }

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("failed to build worker pool");
        let stop = AtomicBool::new(false);
        let total_nodes = AtomicU64::new(0);
        let results: Vec<Step> = pool.install(|| {
            sink.par_iter()
                .map(|prefix| {
                    if stop.load(Ordering::Relaxed) {
                        return Step::Aborted;
                    }
                    let mut ctx = Ctx { deadline, stop: Some(&stop), nodes: 0 };
                    let mut bufs = self.fresh_bufs(limit);
                    bufs[2] = Bufs {
                        avail: prefix.avail.clone(),
                        built: prefix.built.clone(),
                        cand: prefix.cand.clone(),
                        used: prefix.used.clone(),
                    };
                    let mut path = prefix.path.clone();
                    let step = self.dfs(
                        &mut bufs,
                        &mut path,
                        2,
                        prefix.last,
                        prefix.maxlen,
                        limit,
                        &mut ctx,
                        None,
                        &mut Vec::new(),
                    );
                    total_nodes.fetch_add(ctx.nodes, Ordering::Relaxed);
                    if matches!(step, Step::Found(_)) {
                        stop.store(true, Ordering::Relaxed);
                    }
                    step
                })
                .collect()
        });
        *nodes += total_nodes.load(Ordering::Relaxed);

        let mut best: Option<Vec<u16>> = None;
        let mut timed_out = false;
        for step in results {
            match step {
                Step::Found(v) => {
                    if best.as_ref().is_none_or(|b| v < *b) {
                        best = Some(v);
                    }
                }
                Step::TimedOut => timed_out = true,
                Step::Refuted | Step::Aborted => {}
            }
        }
        match best {
            Some(v) => Outcome::Found(v),
            None if timed_out => Outcome::TimedOut,
            None => Outcome::Refuted,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        bufs: &mut Vec<Bufs>,
        path: &mut Vec<u16>,
        g: usize,
        last: i32,
        maxlen: u16,
        limit: usize,
        ctx: &mut Ctx<'_>,
        spawn: Option<usize>,
        sink: &mut Vec<Prefix>,
    ) -> Step {
        if spawn == Some(g) {
            let cur = &bufs[g];
            sink.push(Prefix {
                avail: cur.avail.clone(),
                built: cur.built.clone(),
                cand: cur.cand.clone(),
                used: cur.used.clone(),
                path: path.clone(),
                last,
                maxlen,
            });
            return Step::Refuted;
        }
        if let Some(bail) = ctx.tick() {
            return bail;
        }

        // Target buildable right now: with all smaller limits refuted this
        // only fires at full depth, but checking unconditionally is free.
        if test_bit(&bufs[g].cand, self.w_id) {
            let mut objects = path.clone();
            objects.push(self.w_id as u16);
            return Step::Found(objects);
        }
        let r = limit - g;
        if r <= 1 {
            return Step::Refuted;
        }
        if r == 2 {
            // Exactly one object besides the target: it must complete a
            // split of the target whose other half is already available.
            let cur = &bufs[g];
            let mut best: Option<u16> = None;
            for &(x, y) in &self.splits_of_target {
                let consider = |z: u16, other: u16, best: &mut Option<u16>| {
                    if z as i32 > last
                        && test_bit(&cur.cand, z as usize)
                        && (other == z || test_bit(&cur.avail, other as usize))
                        && best.is_none_or(|b| z < b)
                    {
                        *best = Some(z);
                    }
                };
                consider(x, y, &mut best);
                if y != x {
                    consider(y, x, &mut best);
                }
            }
            return match best {
                Some(z) => {
                    let mut objects = path.clone();
                    objects.push(z);
                    objects.push(self.w_id as u16);
                    Step::Found(objects)
                }
                None => Step::Refuted,
            };
        }

        let mut from = (last + 1) as usize;
        let reach = (maxlen as usize).checked_shl((r - 1) as u32).unwrap_or(usize::MAX);
        if reach < self.n {
            // Candidates shorter than n / 2^(r-1) can no longer matter; ids
            // are length-sorted, so jump straight to the first long enough.
            let need = self.n.div_ceil(1usize << (r - 1));
            from = from.max(self.first_with_len[need] as usize);
        }

        let mut z = next_bit(&bufs[g].cand, from);
        while let Some(zi) = z {
            let mz = &self.used_mask[zi * self.words..(zi + 1) * self.words];
            let cur = &bufs[g];
            let mut orphans = 0u32;
            for i in 0..self.words {
                orphans += (cur.built[i] & !(cur.used[i] | mz[i])).count_ones();
            }
            if (cur.used[zi >> 6] | mz[zi >> 6]) & (1u64 << (zi & 63)) == 0 {
                orphans += 1;
            }
            if orphans as usize > r {
                z = next_bit(&bufs[g].cand, zi + 1);
                continue;
            }

            {
                let (head, tail) = bufs.split_at_mut(g + 1);
                let cur = &head[g];
                let nxt = &mut tail[0];
                nxt.avail.copy_from_slice(&cur.avail);
                nxt.built.copy_from_slice(&cur.built);
                nxt.cand.copy_from_slice(&cur.cand);
                for i in 0..self.words {
                    nxt.used[i] = cur.used[i] | mz[i];
                }
                set_bit(&mut nxt.avail, zi);
                set_bit(&mut nxt.built, zi);
                nxt.cand[zi >> 6] &= !(1u64 << (zi & 63));
                let mut a = next_bit(&nxt.avail, 0);
                while let Some(ai) = a {
                    for p in [
                        self.concat[ai * self.n_sub + zi],
                        self.concat[zi * self.n_sub + ai],
                    ] {
                        if p != 0 && !test_bit(&nxt.built, (p - 1) as usize) {
                            set_bit(&mut nxt.cand, (p - 1) as usize);
                        }
                    }
                    a = next_bit(&nxt.avail, ai + 1);
                }
            }

            path.push(zi as u16);
            let step = self.dfs(
                bufs,
                path,
                g + 1,
                zi as i32,
                maxlen.max(self.len_of[zi]),
                limit,
                ctx,
                spawn,
                sink,
            );
            path.pop();
            match step {
                Step::Refuted => {}
                other => return other,
            }
            z = next_bit(&bufs[g].cand, zi + 1);
        }
        Step::Refuted
    }

    /// Turn a found object sequence back into a plan.  Every object splits
    /// into two strictly shorter parts that were available when it was
    /// built, and shorter means smaller id, so scanning cuts against the
    /// earlier objects always succeeds.
    pub(super) fn reconstruct(&self, w: &TargetString, objects: &[u16]) -> AssemblyPlan {
        let mut builder = PlanBuilder::new(w, PlanMode::Canonical);
        let mut step_of: HashMap<u16, usize> = HashMap::new();
        for &z in objects {
            let bytes = self.bytes(z).to_vec();
            let mut pick = None;
            for cut in 1..bytes.len() {
                let l = self.id_map[&bytes[..cut]];
                let r = self.id_map[&bytes[cut..]];
                let ready = |id: u16| self.len_of[id as usize] == 1 || step_of.contains_key(&id);
                if ready(l) && ready(r) {
                    pick = Some((l, r));
                    break;
                }
            }
            let (l, r) = pick.expect("witness object must split over earlier objects");
            let mut resolve = |id: u16| -> usize {
                if self.len_of[id as usize] == 1 {
                    builder.monomer(self.bytes(id)[0])
                } else {
                    step_of[&id]
                }
            };
            let li = resolve(l);
            let ri = resolve(r);
            let step = builder.concat(li, ri);
            step_of.insert(z, step);
        }
        builder.finish()
    }
}

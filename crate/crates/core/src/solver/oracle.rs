//! Brute-force reference for both indices.
//!
//! Breadth-first enumeration over sets of assembled objects: level `k`
//! holds every deduplicated set reachable with `k` productions, and the
//! first level able to produce the target is its index.  No ordering, no
//! pruning, no bounds — this is deliberately the dumb, obviously-correct
//! baseline the optimized engines are tested against.  Exponential in the
//! answer; only use on short targets.

use std::collections::{HashMap, HashSet};

use crate::plan::PlanMode;
use crate::universe::{instantiate, AssemblyObject, TargetString, WILDCARD};

/// Minimal number of productions to assemble `w`, or `None` if more than
/// `max_cost` are needed.  `Templated` mode searches the unrestricted
/// templated universe (any matching template, template fillers allowed).
pub fn brute_force_oracle(w: &TargetString, mode: PlanMode, max_cost: usize) -> Option<usize> {
    if w.len() == 1 {
        return Some(0);
    }
    Oracle::new(w, mode).run(max_cost)
}

struct Oracle<'w> {
    w: &'w TargetString,
    mode: PlanMode,
    objs: Vec<Vec<u8>>,
    map: HashMap<Vec<u8>, u32>,
    member: Vec<bool>,
    stars: Vec<Vec<usize>>,
    free: Vec<u32>,
    star_id: Option<u32>,
    target_id: u32,
    concat_memo: HashMap<(u32, u32), Option<u32>>,
    inst_memo: HashMap<(u32, u64, u32), Option<u32>>,
}

impl<'w> Oracle<'w> {
    fn new(w: &'w TargetString, mode: PlanMode) -> Self {
        let mut oracle = Oracle {
            w,
            mode,
            objs: Vec::new(),
            map: HashMap::new(),
            member: Vec::new(),
            stars: Vec::new(),
            free: Vec::new(),
            star_id: None,
            target_id: 0,
            concat_memo: HashMap::new(),
            inst_memo: HashMap::new(),
        };
        for &c in w.alphabet() {
            let id = oracle.intern(vec![c]);
            oracle.free.push(id);
        }
        if mode == PlanMode::Templated {
            let id = oracle.intern(vec![WILDCARD]);
            oracle.star_id = Some(id);
            oracle.free.push(id);
        }
        oracle.target_id = oracle.intern(w.text().to_vec());
        oracle
    }

    fn intern(&mut self, bytes: Vec<u8>) -> u32 {
        if let Some(&id) = self.map.get(bytes.as_slice()) {
            return id;
        }
        let id = self.objs.len() as u32;
        let obj = AssemblyObject::new(&bytes).expect("oracle objects are nonempty");
        self.member.push(self.w.is_object(&obj));
        self.stars.push(obj.wildcard_positions().positions().to_vec());
        self.map.insert(bytes.clone(), id);
        self.objs.push(bytes);
        id
    }

    fn concat(&mut self, a: u32, b: u32) -> Option<u32> {
        if let Some(&memo) = self.concat_memo.get(&(a, b)) {
            return memo;
        }
        let la = self.objs[a as usize].len();
        let lb = self.objs[b as usize].len();
        let product = if la + lb > self.w.len() {
            None
        } else {
            let mut bytes = Vec::with_capacity(la + lb);
            bytes.extend_from_slice(&self.objs[a as usize]);
            bytes.extend_from_slice(&self.objs[b as usize]);
            let id = self.intern(bytes);
            self.member[id as usize].then_some(id)
        };
        self.concat_memo.insert((a, b), product);
        product
    }

    fn inst(&mut self, t: u32, mask: u64, u: u32) -> Option<u32> {
        if let Some(&memo) = self.inst_memo.get(&(t, mask, u)) {
            return memo;
        }
        let picked = mask.count_ones() as usize;
        let ulen = self.objs[u as usize].len();
        let plen = self.objs[t as usize].len() + picked * (ulen - 1);
        let product = if plen > self.w.len() {
            None
        } else {
            let positions: Vec<usize> = self.stars[t as usize]
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            let tpl = AssemblyObject::new(&self.objs[t as usize]).unwrap();
            let filler = AssemblyObject::new(&self.objs[u as usize]).unwrap();
            let out = instantiate(&tpl, &positions, &filler)
                .expect("oracle instantiation is well-formed");
            let id = self.intern(out.symbols().to_vec());
            self.member[id as usize].then_some(id)
        };
        self.inst_memo.insert((t, mask, u), product);
        product
    }

    fn run(&mut self, max_cost: usize) -> Option<usize> {
        let mut current: HashSet<Vec<u32>> = HashSet::new();
        current.insert(Vec::new());
        for step in 1..=max_cost {
            let mut next: HashSet<Vec<u32>> = HashSet::new();
            for state in &current {
                let avail: Vec<u32> = self.free.iter().chain(state.iter()).copied().collect();
                let mut products: Vec<u32> = Vec::new();
                for &a in &avail {
                    for &b in &avail {
                        if let Some(p) = self.concat(a, b) {
                            products.push(p);
                        }
                    }
                }
                if self.mode == PlanMode::Templated {
                    for &t in &avail {
                        let s = self.stars[t as usize].len();
                        if s == 0 {
                            continue;
                        }
                        for &u in &avail {
                            if Some(u) == self.star_id {
                                continue; // a bare-star filler reproduces t
                            }
                            for mask in 1u64..(1u64 << s) {
                                if let Some(p) = self.inst(t, mask, u) {
                                    products.push(p);
                                }
                            }
                        }
                    }
                }
                for p in products {
                    if p == self.target_id {
                        return Some(step);
                    }
                    if state.binary_search(&p).is_ok() {
                        continue;
                    }
                    let mut grown = state.clone();
                    let at = grown.binary_search(&p).unwrap_err();
                    grown.insert(at, p);
                    next.insert(grown);
                }
            }
            current = next;
            if current.is_empty() {
                return None;
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> TargetString {
        TargetString::new(s).unwrap()
    }

    #[test]
    fn canonical_basics() {
        assert_eq!(brute_force_oracle(&t("a"), PlanMode::Canonical, 4), Some(0));
        assert_eq!(brute_force_oracle(&t("ab"), PlanMode::Canonical, 4), Some(1));
        assert_eq!(brute_force_oracle(&t("abab"), PlanMode::Canonical, 4), Some(2));
        assert_eq!(brute_force_oracle(&t("aaaa"), PlanMode::Canonical, 4), Some(2));
        // abc in two steps, doubled, then one more abc appended.
        assert_eq!(brute_force_oracle(&t("abcabcabc"), PlanMode::Canonical, 6), Some(4));
    }

    #[test]
    fn cost_cap_yields_none() {
        assert_eq!(brute_force_oracle(&t("abcabcabc"), PlanMode::Canonical, 3), None);
    }

    #[test]
    fn templated_never_worse() {
        for s in ["abab", "aabaa", "abcabc"] {
            let w = t(s);
            let c = brute_force_oracle(&w, PlanMode::Canonical, 6).unwrap();
            let t = brute_force_oracle(&w, PlanMode::Templated, 6).unwrap();
            assert!(t <= c, "{s}: templated {t} > canonical {c}");
        }
    }
}

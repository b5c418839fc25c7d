//! Targets, assembly objects, and the object universe.
//!
//! For a target string `w` the universe contains every literal substring of
//! `w` together with every *template*: a string over the alphabet plus the
//! wildcard `*` that arises from some substring of `w` by replacing one or
//! more whole, non-empty blocks with a single `*` each, keeping at least one
//! literal symbol.  Equivalently, a template is a pattern with at least one
//! wildcard and one literal that matches some substring of `w` when every
//! wildcard consumes one or more symbols.

use std::collections::BTreeSet;
use std::fmt;

/// The wildcard symbol used by templates.
pub const WILDCARD: u8 = b'*';

/// Errors produced by target construction and universe operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UniverseError {
    #[error("target string is empty")]
    EmptyTarget,
    #[error("target string contains the wildcard symbol '*'")]
    WildcardInTarget,
    #[error("symbol {0:?} is not a printable non-reserved character")]
    InvalidSymbol(char),
    #[error("assembly object is empty")]
    EmptyObject,
    #[error("operation requires a literal object, found a template")]
    TemplateNotLiteral,
    #[error("operation requires a template, found a literal object")]
    NotATemplate,
    #[error("wildcard selection is empty")]
    EmptySelection,
    #[error("position {0} is not a wildcard position of the template")]
    PositionNotWildcard(usize),
    #[error("wildcard ordinal {ordinal} out of range 1..={count}")]
    OrdinalOutOfRange { ordinal: usize, count: usize },
}

/// A sequence of symbols over the target alphabet plus the wildcard.
///
/// Objects are immutable.  An object containing at least one wildcard has
/// [`ObjectKind::Template`]; whether it is a *valid* template for a given
/// target is decided by [`TargetString::is_template`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AssemblyObject {
    symbols: Vec<u8>,
}

/// Literal (wildcard-free) vs template (contains a wildcard).
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum ObjectKind {
    Literal,
    Template,
}

impl AssemblyObject {
    /// Builds an object from raw symbols.  Objects must be non-empty; all
    /// other shape constraints are universe membership questions.
    pub fn new(symbols: impl AsRef<[u8]>) -> Result<Self, UniverseError> {
        let symbols = symbols.as_ref().to_vec();
        if symbols.is_empty() {
            return Err(UniverseError::EmptyObject);
        }
        Ok(AssemblyObject { symbols })
    }

    /// Single-symbol object.
    pub fn monomer(symbol: u8) -> Self {
        AssemblyObject { symbols: vec![symbol] }
    }

    /// The wildcard monomer `*`.
    pub fn wildcard_monomer() -> Self {
        Self::monomer(WILDCARD)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn as_str(&self) -> &str {
        // Symbols are validated printable ASCII wherever objects enter from
        // text; raw constructors keep bytes, so fall back lossily for Debug.
        std::str::from_utf8(&self.symbols).unwrap_or("<non-utf8>")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false // objects are non-empty by construction
    }

    pub fn kind(&self) -> ObjectKind {
        if self.symbols.contains(&WILDCARD) {
            ObjectKind::Template
        } else {
            ObjectKind::Literal
        }
    }

    pub fn is_literal(&self) -> bool {
        self.kind() == ObjectKind::Literal
    }

    pub fn wildcard_count(&self) -> usize {
        self.symbols.iter().filter(|&&s| s == WILDCARD).count()
    }

    /// True when the object has the shape of a template: at least one
    /// wildcard and at least one literal symbol.
    pub fn has_template_shape(&self) -> bool {
        let stars = self.wildcard_count();
        stars >= 1 && stars < self.len()
    }

    pub fn wildcard_positions(&self) -> WildcardPositions {
        WildcardPositions(
            self.symbols
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == WILDCARD)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn concat(&self, other: &AssemblyObject) -> AssemblyObject {
        let mut symbols = Vec::with_capacity(self.len() + other.len());
        symbols.extend_from_slice(&self.symbols);
        symbols.extend_from_slice(&other.symbols);
        AssemblyObject { symbols }
    }

    /// True when the object contains the wildcard symbol `**` adjacently.
    pub fn has_adjacent_wildcards(&self) -> bool {
        self.symbols.windows(2).any(|p| p == [WILDCARD, WILDCARD])
    }
}

impl fmt::Display for AssemblyObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for AssemblyObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AssemblyObject({:?})", self.as_str())
    }
}

/// The ordered set of wildcard positions of a template (0-based), together
/// with the 1-based ordinal mapping used by plan certificates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WildcardPositions(Vec<usize>);

impl WildcardPositions {
    pub fn positions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Maps a 1-based wildcard ordinal to its 0-based symbol position.
    pub fn position_of_ordinal(&self, ordinal: usize) -> Result<usize, UniverseError> {
        if ordinal == 0 || ordinal > self.0.len() {
            return Err(UniverseError::OrdinalOutOfRange { ordinal, count: self.0.len() });
        }
        Ok(self.0[ordinal - 1])
    }

    /// Maps 1-based ordinals to 0-based positions, deduplicating.
    pub fn select_ordinals(&self, ordinals: &[usize]) -> Result<Vec<usize>, UniverseError> {
        if ordinals.is_empty() {
            return Err(UniverseError::EmptySelection);
        }
        let mut positions: Vec<usize> = ordinals
            .iter()
            .map(|&o| self.position_of_ordinal(o))
            .collect::<Result<_, _>>()?;
        positions.sort_unstable();
        positions.dedup();
        Ok(positions)
    }
}

/// Replaces the selected wildcard positions of `template` (0-based, treated
/// as a set) each by the full symbol sequence of `filler`.
///
/// The result's length obeys `|T| + |S| * (|u| - 1)`.  No universe membership
/// check happens here; the plan verifier checks products against a target.
pub fn instantiate(
    template: &AssemblyObject,
    selection: &[usize],
    filler: &AssemblyObject,
) -> Result<AssemblyObject, UniverseError> {
    if template.kind() != ObjectKind::Template {
        return Err(UniverseError::NotATemplate);
    }
    if selection.is_empty() {
        return Err(UniverseError::EmptySelection);
    }
    let mut selected: Vec<usize> = selection.to_vec();
    selected.sort_unstable();
    selected.dedup();
    for &p in &selected {
        if p >= template.len() || template.symbols[p] != WILDCARD {
            return Err(UniverseError::PositionNotWildcard(p));
        }
    }
    let mut symbols =
        Vec::with_capacity(template.len() + selected.len() * (filler.len().saturating_sub(1)));
    let mut sel = selected.iter().peekable();
    for (i, &s) in template.symbols.iter().enumerate() {
        if sel.peek() == Some(&&i) {
            symbols.extend_from_slice(&filler.symbols);
            sel.next();
        } else {
            symbols.push(s);
        }
    }
    Ok(AssemblyObject { symbols })
}

/// How occurrences of a literal in the target are counted.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OccurrenceMode {
    Overlapping,
    /// Greedy leftmost non-overlapping scan (the default everywhere).
    #[default]
    NonOverlapping,
}

/// A target string: validated symbols, alphabet, and a substring index.
#[derive(Clone)]
pub struct TargetString {
    text: Vec<u8>,
    alphabet: BTreeSet<u8>,
    index: SubstringIndex,
}

impl TargetString {
    /// Validates and indexes a target.  Targets are non-empty, wildcard-free
    /// strings of printable, non-whitespace symbols (`#` is reserved for
    /// certificate comments).
    pub fn new(text: impl AsRef<[u8]>) -> Result<Self, UniverseError> {
        let text = text.as_ref().to_vec();
        if text.is_empty() {
            return Err(UniverseError::EmptyTarget);
        }
        if text.contains(&WILDCARD) {
            return Err(UniverseError::WildcardInTarget);
        }
        for &b in &text {
            if !b.is_ascii_graphic() || b == b'#' {
                return Err(UniverseError::InvalidSymbol(b as char));
            }
        }
        let alphabet = text.iter().copied().collect();
        let index = SubstringIndex::build(&text);
        Ok(TargetString { text, alphabet, index })
    }

    pub fn text(&self) -> &[u8] {
        &self.text
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.text).expect("targets are validated ASCII")
    }

    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        false // targets are non-empty by construction
    }

    pub fn alphabet(&self) -> &BTreeSet<u8> {
        &self.alphabet
    }

    pub(crate) fn contains_bytes(&self, s: &[u8]) -> bool {
        self.index.contains(s)
    }

    /// Containment of a literal object, answered by the substring index.
    pub fn is_substring(&self, x: &AssemblyObject) -> Result<bool, UniverseError> {
        if x.kind() != ObjectKind::Literal {
            return Err(UniverseError::TemplateNotLiteral);
        }
        Ok(self.index.contains(x.symbols()))
    }

    /// True when `x` is a valid template for this target: at least one
    /// wildcard, at least one literal symbol, and `x` matches some substring
    /// with every wildcard consuming one or more symbols.
    pub fn is_template(&self, x: &AssemblyObject) -> bool {
        x.has_template_shape() && self.matches_somewhere(x.symbols())
    }

    /// Universe membership: literal substring or valid template.
    pub fn is_object(&self, x: &AssemblyObject) -> bool {
        match x.kind() {
            ObjectKind::Literal => self.index.contains(x.symbols()),
            ObjectKind::Template => self.is_template(x),
        }
    }

    /// Counts occurrences of a literal object in the target.
    pub fn count_occurrences(
        &self,
        x: &AssemblyObject,
        mode: OccurrenceMode,
    ) -> Result<usize, UniverseError> {
        if x.kind() != ObjectKind::Literal {
            return Err(UniverseError::TemplateNotLiteral);
        }
        Ok(count_occurrences_in(&self.text, x.symbols(), mode))
    }

    /// The monomers available to plans for this target: every letter that
    /// occurs in the target, plus the wildcard (usable in templated mode).
    pub fn monomers(&self) -> BTreeSet<AssemblyObject> {
        let mut set: BTreeSet<AssemblyObject> =
            self.alphabet.iter().map(|&b| AssemblyObject::monomer(b)).collect();
        set.insert(AssemblyObject::wildcard_monomer());
        set
    }

    /// Gap-pattern matching: does `pattern` (wildcards consume >= 1 symbol)
    /// match any substring of the target?
    fn matches_somewhere(&self, pattern: &[u8]) -> bool {
        let n = self.text.len();
        // reach[i] = the consumed prefix of `pattern` can end at position i.
        let mut reach = vec![true; n + 1]; // empty prefix: start anywhere
        for &sym in pattern {
            let mut next = vec![false; n + 1];
            if sym == WILDCARD {
                // A wildcard extends any earlier endpoint by >= 1 symbol.
                let mut seen = false;
                for i in 0..=n {
                    next[i] = seen;
                    seen = seen || reach[i];
                }
            } else {
                for i in 0..n {
                    if reach[i] && self.text[i] == sym {
                        next[i + 1] = true;
                    }
                }
            }
            reach = next;
        }
        reach.into_iter().any(|b| b)
    }
}

impl PartialEq for TargetString {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for TargetString {}

impl fmt::Display for TargetString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for TargetString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TargetString({:?})", self.as_str())
    }
}

/// Counts occurrences of `pattern` in `text`.
pub(crate) fn count_occurrences_in(text: &[u8], pattern: &[u8], mode: OccurrenceMode) -> usize {
    occurrence_starts(text, pattern, mode).len()
}

/// Match start positions under the given counting mode.
pub(crate) fn occurrence_starts(text: &[u8], pattern: &[u8], mode: OccurrenceMode) -> Vec<usize> {
    let (n, m) = (text.len(), pattern.len());
    let mut starts = Vec::new();
    if m == 0 || m > n {
        return starts;
    }
    let mut i = 0;
    while i + m <= n {
        if &text[i..i + m] == pattern {
            starts.push(i);
            i += match mode {
                OccurrenceMode::Overlapping => 1,
                OccurrenceMode::NonOverlapping => m,
            };
        } else {
            i += 1;
        }
    }
    starts
}

/// Suffix automaton over the target, answering substring containment in time
/// linear in the query.
#[derive(Clone, Debug)]
struct SubstringIndex {
    states: Vec<SaState>,
}

#[derive(Clone, Debug)]
struct SaState {
    len: u32,
    link: i32,
    next: Vec<(u8, u32)>, // tiny alphabets: linear scan beats hashing
}

impl SaState {
    fn get(&self, c: u8) -> Option<u32> {
        self.next.iter().find(|&&(s, _)| s == c).map(|&(_, t)| t)
    }

    fn set(&mut self, c: u8, to: u32) {
        match self.next.iter_mut().find(|(s, _)| *s == c) {
            Some(entry) => entry.1 = to,
            None => self.next.push((c, to)),
        }
    }
}

impl SubstringIndex {
    fn build(text: &[u8]) -> Self {
        let mut sa = SubstringIndex {
            states: vec![SaState { len: 0, link: -1, next: Vec::new() }],
        };
        let mut last = 0usize;
        for &c in text {
            last = sa.extend(last, c);
        }
        sa
    }

    fn extend(&mut self, last: usize, c: u8) -> usize {
        let cur = self.states.len();
        let cur_len = self.states[last].len + 1;
        self.states.push(SaState { len: cur_len, link: -1, next: Vec::new() });
        let mut p = last as i32;
        while p >= 0 && self.states[p as usize].get(c).is_none() {
            self.states[p as usize].set(c, cur as u32);
            p = self.states[p as usize].link;
        }
        if p < 0 {
            self.states[cur].link = 0;
        } else {
            let q = self.states[p as usize].get(c).unwrap() as usize;
            if self.states[p as usize].len + 1 == self.states[q].len {
                self.states[cur].link = q as i32;
            } else {
                let clone = self.states.len();
                let cloned = SaState {
                    len: self.states[p as usize].len + 1,
                    link: self.states[q].link,
                    next: self.states[q].next.clone(),
                };
                self.states.push(cloned);
                while p >= 0 && self.states[p as usize].get(c) == Some(q as u32) {
                    self.states[p as usize].set(c, clone as u32);
                    p = self.states[p as usize].link;
                }
                self.states[q].link = clone as i32;
                self.states[cur].link = clone as i32;
            }
        }
        cur
    }

    fn contains(&self, pattern: &[u8]) -> bool {
        let mut state = 0u32;
        for &c in pattern {
            match self.states[state as usize].get(c) {
                Some(next) => state = next,
                None => return false,
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: &str = "11221122110001100110011";
    const W1: &str = "10113121101011212111211";

    fn obj(s: &str) -> AssemblyObject {
        AssemblyObject::new(s).unwrap()
    }

    #[test]
    fn target_construction_and_alphabet() {
        let w = TargetString::new(W).unwrap();
        assert_eq!(w.len(), 23);
        assert_eq!(w.alphabet().iter().copied().collect::<Vec<_>>(), vec![b'0', b'1', b'2']);

        assert_eq!(TargetString::new("").unwrap_err(), UniverseError::EmptyTarget);
        assert_eq!(TargetString::new("ab*c").unwrap_err(), UniverseError::WildcardInTarget);
        assert!(matches!(TargetString::new("a b").unwrap_err(), UniverseError::InvalidSymbol(_)));
        assert!(matches!(TargetString::new("a#b").unwrap_err(), UniverseError::InvalidSymbol(_)));
    }

    #[test]
    fn substring_containment() {
        let w = TargetString::new(W).unwrap();
        assert!(w.is_substring(&obj("2211")).unwrap());
        assert!(w.is_substring(&obj("000")).unwrap());
        assert!(!w.is_substring(&obj("0000")).unwrap());
        assert!(!w.is_substring(&obj("210")).unwrap());
        assert!(w.is_substring(&obj(W)).unwrap());
        assert_eq!(
            w.is_substring(&obj("1*")).unwrap_err(),
            UniverseError::TemplateNotLiteral
        );
        // Exhaustive agreement with naive containment.
        let text = w.text();
        for len in 1..=text.len() {
            for start in 0..=text.len() - len {
                assert!(w.is_substring(&obj(
                    std::str::from_utf8(&text[start..start + len]).unwrap()
                ))
                .unwrap());
            }
        }
        assert!(!w.is_substring(&obj("22110011")).unwrap());
    }

    #[test]
    fn template_membership() {
        let w = TargetString::new(W).unwrap();
        assert!(w.is_template(&obj("11*11*11")));
        assert!(w.is_template(&obj("110011*11")));
        assert!(w.is_template(&obj("1*")));
        assert!(w.is_template(&obj("11*11*")));
        assert!(!w.is_template(&obj("***")));
        assert!(!w.is_template(&obj("11")));
        assert!(!w.is_template(&obj("3*3")));

        let w1 = TargetString::new(W1).unwrap();
        assert!(w1.is_template(&obj("1*11")));
        assert!(w1.is_template(&obj("1*")));
    }

    #[test]
    fn template_matching_agrees_with_brute_force() {
        // Brute force: try every substring and every way of carving it into
        // blocks consumed by the pattern.
        fn matches_exactly(pattern: &[u8], text: &[u8]) -> bool {
            if pattern.is_empty() {
                return text.is_empty();
            }
            if pattern[0] == WILDCARD {
                (1..=text.len()).any(|k| matches_exactly(&pattern[1..], &text[k..]))
            } else {
                !text.is_empty() && text[0] == pattern[0] && matches_exactly(&pattern[1..], &text[1..])
            }
        }
        fn brute_is_template(pattern: &[u8], text: &[u8]) -> bool {
            let stars = pattern.iter().filter(|&&c| c == WILDCARD).count();
            if stars == 0 || stars == pattern.len() {
                return false;
            }
            (0..text.len()).any(|i| {
                (i + 1..=text.len()).any(|j| matches_exactly(pattern, &text[i..j]))
            })
        }

        let targets = ["abab", "aabbaabb", "abcabc", "aaaa", "ba"];
        let symbols = [b'a', b'b', WILDCARD];
        for target in targets {
            let w = TargetString::new(target).unwrap();
            // All patterns up to length 5 over {a, b, *}.
            for len in 1..=5usize {
                for code in 0..3usize.pow(len as u32) {
                    let mut c = code;
                    let mut pat = Vec::with_capacity(len);
                    for _ in 0..len {
                        pat.push(symbols[c % 3]);
                        c /= 3;
                    }
                    let x = AssemblyObject::new(&pat).unwrap();
                    assert_eq!(
                        w.is_template(&x),
                        brute_is_template(&pat, target.as_bytes()),
                        "pattern {:?} target {target}",
                        x.as_str(),
                    );
                }
            }
        }
    }

    #[test]
    fn wildcard_positions_and_ordinals() {
        let t = obj("11*11*11");
        let p = t.wildcard_positions();
        assert_eq!(p.positions(), &[2, 5]);
        assert_eq!(p.position_of_ordinal(1).unwrap(), 2);
        assert_eq!(p.position_of_ordinal(2).unwrap(), 5);
        assert_eq!(
            p.position_of_ordinal(3).unwrap_err(),
            UniverseError::OrdinalOutOfRange { ordinal: 3, count: 2 }
        );
        assert_eq!(p.select_ordinals(&[2, 1, 2]).unwrap(), vec![2, 5]);
        assert_eq!(p.select_ordinals(&[]).unwrap_err(), UniverseError::EmptySelection);
        assert!(obj("1011").wildcard_positions().is_empty());
    }

    #[test]
    fn instantiation() {
        let t = obj("11*11*11");
        assert_eq!(instantiate(&t, &[2, 5], &obj("22")).unwrap(), obj("1122112211"));
        assert_eq!(instantiate(&t, &[2, 5], &obj("00")).unwrap(), obj("1100110011"));
        assert_eq!(instantiate(&t, &[2], &obj("00")).unwrap(), obj("110011*11"));
        assert_eq!(instantiate(&obj("1*11"), &[1], &obj("0")).unwrap(), obj("1011"));
        // Template-valued fillers are plain rewriting at this layer.
        assert_eq!(instantiate(&t, &[2], &obj("0*0")).unwrap(), obj("110*011*11"));

        assert_eq!(
            instantiate(&obj("1011"), &[1], &obj("0")).unwrap_err(),
            UniverseError::NotATemplate
        );
        assert_eq!(
            instantiate(&t, &[], &obj("0")).unwrap_err(),
            UniverseError::EmptySelection
        );
        assert_eq!(
            instantiate(&t, &[3], &obj("0")).unwrap_err(),
            UniverseError::PositionNotWildcard(3)
        );
    }

    #[test]
    fn instantiation_length_law() {
        let t = obj("1*2*3*4");
        for sel in [vec![1], vec![1, 3], vec![1, 3, 5]] {
            for filler in ["x", "xy", "xyz", "wxyz"] {
                let u = obj(filler);
                let out = instantiate(&t, &sel, &u).unwrap();
                assert_eq!(out.len(), t.len() + sel.len() * (u.len() - 1));
            }
        }
    }

    #[test]
    fn occurrence_counting() {
        let w = TargetString::new("1111").unwrap();
        let x = obj("11");
        assert_eq!(w.count_occurrences(&x, OccurrenceMode::Overlapping).unwrap(), 3);
        assert_eq!(w.count_occurrences(&x, OccurrenceMode::NonOverlapping).unwrap(), 2);

        let w1 = TargetString::new(W1).unwrap();
        assert_eq!(
            w1.count_occurrences(&obj("1011"), OccurrenceMode::NonOverlapping).unwrap(),
            2
        );
        assert_eq!(
            w1.count_occurrences(&obj("1211"), OccurrenceMode::NonOverlapping).unwrap(),
            3
        );
        assert_eq!(
            w1.count_occurrences(&obj("1*11"), OccurrenceMode::NonOverlapping).unwrap_err(),
            UniverseError::TemplateNotLiteral
        );
        let w2 = TargetString::new("101131211010112121112111011").unwrap();
        assert_eq!(
            w2.count_occurrences(&obj("1011"), OccurrenceMode::NonOverlapping).unwrap(),
            3
        );
        assert_eq!(
            w2.count_occurrences(&obj("1211"), OccurrenceMode::NonOverlapping).unwrap(),
            3
        );
    }

    #[test]
    fn monomer_enumeration() {
        let w = TargetString::new(W).unwrap();
        let names: Vec<String> = w.monomers().iter().map(|m| m.to_string()).collect();
        assert_eq!(names, vec!["*", "0", "1", "2"]);
        let a = TargetString::new("aaaa").unwrap();
        let names: Vec<String> = a.monomers().iter().map(|m| m.to_string()).collect();
        assert_eq!(names, vec!["*", "a"]);
    }

    #[test]
    fn object_shape() {
        assert_eq!(AssemblyObject::new("").unwrap_err(), UniverseError::EmptyObject);
        assert_eq!(obj("1*1").kind(), ObjectKind::Template);
        assert_eq!(obj("11").kind(), ObjectKind::Literal);
        assert!(!obj("***").has_template_shape());
        assert!(obj("1*").has_template_shape());
        assert!(obj("1**1").has_adjacent_wildcards());
        assert!(!obj("1*1*").has_adjacent_wildcards());
        assert_eq!(obj("ab").concat(&obj("cd")), obj("abcd"));
    }
}

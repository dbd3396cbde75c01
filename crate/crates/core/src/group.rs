//! Exact computation in the group generated by an invertible Mealy automaton:
//! tree action, sections, reduction and the word problem.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::automaton::{Letter, MealyAutomaton, Rewriting, StateId};
use crate::error::{BudgetKind, GroupError};
use crate::nucleus::Nucleus;
use crate::perm::Perm;

/// Bounds on the section closures explored by the word-problem solver and by
/// portrait normalization. Exceeding either bound is an error, never an answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContractionBudget {
    pub max_closure: usize,
    pub max_depth: usize,
}

impl Default for ContractionBudget {
    fn default() -> Self {
        ContractionBudget { max_closure: 1 << 20, max_depth: 64 }
    }
}

impl ContractionBudget {
    pub fn new(max_closure: usize, max_depth: usize) -> Result<Self, GroupError> {
        if max_closure == 0 || max_depth == 0 {
            return Err(GroupError::InvalidSpec("budget bounds must be positive".into()));
        }
        Ok(ContractionBudget { max_closure, max_depth })
    }

    /// Parses `"<closure>"` or `"<closure>,<depth>"`.
    pub fn parse(s: &str) -> Result<Self, GroupError> {
        let bad = || GroupError::InvalidSpec(format!("bad budget `{s}`"));
        let mut parts = s.split(',').map(str::trim);
        let closure = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let depth = match parts.next() {
            Some(d) => d.parse().map_err(|_| bad())?,
            None => Self::default().max_depth,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Self::new(closure, depth)
    }

    /// Reads `AAG_BUDGET`, falling back to the default when unset.
    pub fn from_env() -> Result<Self, GroupError> {
        match std::env::var("AAG_BUDGET") {
            Ok(v) => Self::parse(&v),
            Err(_) => Ok(Self::default()),
        }
    }
}

/// A reduced word over the states of a platform's automaton (and their
/// inverses). The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GeneratorWord {
    platform: u8,
    letters: Vec<Letter>,
}

impl GeneratorWord {
    pub fn platform(&self) -> u8 {
        self.platform
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// A group of tree automorphisms given by a Mealy automaton plus the
/// rewriting rules known to hold in it.
pub struct AutomatonGroup {
    id: u8,
    name: String,
    automaton: MealyAutomaton,
    rewriting: Rewriting,
    generators: Vec<StateId>,
    contracting: bool,
    nucleus: Option<Nucleus>,
}

impl fmt::Debug for AutomatonGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AutomatonGroup")
            .field("id", &self.id)
            .field("name", &self.name)
            .field("states", &self.automaton.state_count())
            .field("contracting", &self.contracting)
            .finish()
    }
}

impl AutomatonGroup {
    /// Builds the group; when `contracting` is set the nucleus is computed
    /// with `budget`.
    pub fn new(
        id: u8,
        name: impl Into<String>,
        automaton: MealyAutomaton,
        rewriting: Rewriting,
        generators: Vec<StateId>,
        contracting: bool,
        budget: ContractionBudget,
    ) -> Result<Self, GroupError> {
        let mut group = AutomatonGroup {
            id,
            name: name.into(),
            automaton,
            rewriting,
            generators,
            contracting,
            nucleus: None,
        };
        if contracting {
            group.nucleus = Some(Nucleus::compute(&group, budget)?);
        }
        Ok(group)
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn automaton(&self) -> &MealyAutomaton {
        &self.automaton
    }

    pub fn rewriting(&self) -> &Rewriting {
        &self.rewriting
    }

    pub fn alphabet_size(&self) -> u8 {
        self.automaton.alphabet_size()
    }

    /// The public generating states, identity excluded.
    pub fn generators(&self) -> &[StateId] {
        &self.generators
    }

    pub fn is_contracting(&self) -> bool {
        self.contracting
    }

    pub fn nucleus(&self) -> Result<&Nucleus, GroupError> {
        self.nucleus.as_ref().ok_or(GroupError::NoNucleus)
    }

    pub fn has_nucleus(&self) -> bool {
        self.nucleus.is_some()
    }

    // ---- words ----

    pub fn reduce(&self, letters: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
        self.rewriting.reduce(self.automaton.identity(), letters)
    }

    /// Wraps arbitrary letters as a reduced word of this platform.
    pub fn word(&self, letters: impl IntoIterator<Item = Letter>) -> Result<GeneratorWord, GroupError> {
        let letters: Vec<Letter> = letters.into_iter().collect();
        let n = self.automaton.state_count();
        if let Some(l) = letters.iter().find(|l| l.state() as usize >= n) {
            return Err(GroupError::InvalidSpec(format!("state index {} out of range", l.state())));
        }
        Ok(GeneratorWord { platform: self.id, letters: self.reduce(letters) })
    }

    pub(crate) fn word_unchecked(&self, letters: Vec<Letter>) -> GeneratorWord {
        GeneratorWord { platform: self.id, letters }
    }

    pub fn identity_word(&self) -> GeneratorWord {
        GeneratorWord { platform: self.id, letters: Vec::new() }
    }

    /// Word for public generator `index` (position in [`generators`](Self::generators)).
    pub fn generator_word(&self, index: usize, inverse: bool) -> Result<GeneratorWord, GroupError> {
        let s = *self
            .generators
            .get(index)
            .ok_or_else(|| GroupError::UnknownGenerator(format!("#{index}")))?;
        self.word([Letter::new(s, inverse)])
    }

    /// Parses state names separated optionally by whitespace, `*` or `·`.
    /// Inverses are written with a `⁻¹`, `^-1` or `'` suffix. Names are
    /// matched greedily, so `bcd` reads as `b c d`.
    pub fn parse_word(&self, text: &str) -> Result<GeneratorWord, GroupError> {
        let mut letters = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let c = rest.chars().next().unwrap();
            if c.is_whitespace() || c == '*' || c == '·' || c == ',' || c == '.' {
                rest = &rest[c.len_utf8()..];
                continue;
            }
            let best = self
                .automaton
                .names()
                .iter()
                .enumerate()
                .filter(|(_, n)| rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            let Some((s, name)) = best else {
                let token: String = rest.chars().take_while(|c| !c.is_whitespace()).collect();
                return Err(GroupError::UnknownGenerator(token));
            };
            rest = &rest[name.len()..];
            let mut inverse = false;
            for suffix in ["⁻¹", "^-1", "'"] {
                if let Some(r) = rest.strip_prefix(suffix) {
                    inverse = true;
                    rest = r;
                    break;
                }
            }
            letters.push(Letter::new(s as StateId, inverse));
        }
        self.word(letters)
    }

    pub fn format_word(&self, w: &GeneratorWord) -> String {
        self.format_letters(w.letters())
    }

    pub fn format_letters(&self, letters: &[Letter]) -> String {
        if letters.is_empty() {
            return "ε".to_string();
        }
        let sep = if self.automaton.names().iter().any(|n| n.chars().count() > 1) { " " } else { "" };
        letters.iter().map(|&l| self.automaton.letter_name(l)).collect::<Vec<_>>().join(sep)
    }

    fn check_platform(&self, w: &GeneratorWord) -> Result<(), GroupError> {
        if w.platform != self.id {
            return Err(GroupError::PlatformMismatch { expected: self.id, found: w.platform });
        }
        Ok(())
    }

    fn check_letter(&self, x: u8) -> Result<(), GroupError> {
        let k = self.alphabet_size();
        if x >= k {
            return Err(GroupError::LetterOutOfRange { letter: x as u32, k });
        }
        Ok(())
    }

    // ---- action ----

    /// Image of the string `s` under `w`; the rightmost letter of `w` acts first.
    pub fn apply(&self, w: &GeneratorWord, s: &[u8]) -> Result<Vec<u8>, GroupError> {
        self.check_platform(w)?;
        for &x in s {
            self.check_letter(x)?;
        }
        Ok(self.apply_letters(w.letters(), s))
    }

    pub(crate) fn apply_letters(&self, letters: &[Letter], s: &[u8]) -> Vec<u8> {
        let mut out = s.to_vec();
        for &l in letters.iter().rev() {
            let mut state = l;
            for x in out.iter_mut() {
                let y = self.automaton.letter_output(state, *x);
                state = self.automaton.letter_section(state, *x);
                *x = y;
            }
        }
        out
    }

    pub fn root_perm(&self, w: &GeneratorWord) -> Result<Perm, GroupError> {
        self.check_platform(w)?;
        Ok(self.root_perm_letters(w.letters()))
    }

    pub(crate) fn root_perm_letters(&self, letters: &[Letter]) -> Perm {
        let k = self.alphabet_size();
        let images: Vec<u8> = (0..k).map(|x| self.letter_image(letters, x)).collect();
        Perm::from_images(&images).expect("composition of bijections")
    }

    #[inline]
    fn letter_image(&self, letters: &[Letter], x: u8) -> u8 {
        letters.iter().rev().fold(x, |y, &l| self.automaton.letter_output(l, y))
    }

    pub(crate) fn root_is_identity(&self, letters: &[Letter]) -> bool {
        (0..self.alphabet_size()).all(|x| self.letter_image(letters, x) == x)
    }

    /// Section of `w` at the first-level vertex `x`, reduced.
    pub fn section(&self, w: &GeneratorWord, x: u8) -> Result<GeneratorWord, GroupError> {
        self.check_platform(w)?;
        self.check_letter(x)?;
        Ok(self.word_unchecked(self.section_letters(w.letters(), x)))
    }

    /// `(s₁…sₙ)_x = (s₁)_{x₁} ⋯ (sₙ)_{xₙ}` where `xₙ = x` and
    /// `x_{i-1} = s_i(x_i)`.
    pub(crate) fn section_letters(&self, letters: &[Letter], x: u8) -> Vec<Letter> {
        let m = &self.automaton;
        let mut raw = Vec::with_capacity(letters.len());
        let mut y = x;
        for &l in letters.iter().rev() {
            raw.push(m.letter_section(l, y));
            y = m.letter_output(l, y);
        }
        raw.reverse();
        self.reduce(raw)
    }

    pub fn multiply(&self, w1: &GeneratorWord, w2: &GeneratorWord) -> Result<GeneratorWord, GroupError> {
        self.check_platform(w1)?;
        self.check_platform(w2)?;
        Ok(self.word_unchecked(self.reduce(w1.letters().iter().chain(w2.letters()).copied())))
    }

    pub fn invert(&self, w: &GeneratorWord) -> Result<GeneratorWord, GroupError> {
        self.check_platform(w)?;
        Ok(self.word_unchecked(self.invert_letters(w.letters())))
    }

    pub(crate) fn invert_letters(&self, letters: &[Letter]) -> Vec<Letter> {
        self.reduce(letters.iter().rev().map(|l| l.inverse()))
    }

    // ---- word problem ----

    /// Decides whether `w` acts trivially on the whole tree by exploring the
    /// closure of `{w}` under first-level sections.
    pub fn is_trivial(&self, w: &GeneratorWord, budget: ContractionBudget) -> Result<bool, GroupError> {
        self.check_platform(w)?;
        self.is_trivial_letters(w.letters(), budget)
    }

    pub(crate) fn is_trivial_letters(&self, letters: &[Letter], budget: ContractionBudget) -> Result<bool, GroupError> {
        Ok(self.trivial_closure(letters, budget)?.0)
    }

    /// Returns the verdict and the number of closure elements visited.
    pub fn trivial_closure(&self, letters: &[Letter], budget: ContractionBudget) -> Result<(bool, usize), GroupError> {
        let start = self.reduce(letters.iter().copied());
        if start.is_empty() {
            return Ok((true, 0));
        }
        let mut seen: HashSet<Vec<Letter>> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back((start, 0usize));
        while let Some((u, depth)) = queue.pop_front() {
            if !self.root_is_identity(&u) {
                return Ok((false, seen.len()));
            }
            for x in 0..self.alphabet_size() {
                let s = self.section_letters(&u, x);
                if s.is_empty() || seen.contains(&s) {
                    continue;
                }
                if depth + 1 > budget.max_depth {
                    return Err(GroupError::BudgetExhausted(BudgetKind::Depth));
                }
                if seen.len() >= budget.max_closure {
                    return Err(GroupError::BudgetExhausted(BudgetKind::ClosureSize));
                }
                seen.insert(s.clone());
                queue.push_back((s, depth + 1));
            }
        }
        Ok((true, seen.len()))
    }

    pub fn equal(&self, w1: &GeneratorWord, w2: &GeneratorWord, budget: ContractionBudget) -> Result<bool, GroupError> {
        let q = self.multiply(w1, &self.invert(w2)?)?;
        self.is_trivial(&q, budget)
    }

    pub(crate) fn equal_letters(&self, a: &[Letter], b: &[Letter], budget: ContractionBudget) -> Result<bool, GroupError> {
        let q = self.reduce(a.iter().copied().chain(b.iter().rev().map(|l| l.inverse())));
        self.is_trivial_letters(&q, budget)
    }

    // ---- truncated portraits ----

    /// Node permutations down to `depth` with section words at the frontier.
    pub fn portrait(&self, w: &GeneratorWord, depth: usize) -> Result<DepthPortrait, GroupError> {
        self.check_platform(w)?;
        Ok(self.depth_portrait(w.letters().to_vec(), depth))
    }

    fn depth_portrait(&self, letters: Vec<Letter>, depth: usize) -> DepthPortrait {
        if depth == 0 {
            return DepthPortrait::Frontier(self.word_unchecked(letters));
        }
        let perm = self.root_perm_letters(&letters);
        let children = (0..self.alphabet_size())
            .map(|x| self.depth_portrait(self.section_letters(&letters, x), depth - 1))
            .collect();
        DepthPortrait::Node { perm, children }
    }
}

/// A portrait truncated at a fixed depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DepthPortrait {
    Node { perm: Perm, children: Vec<DepthPortrait> },
    Frontier(GeneratorWord),
}

impl DepthPortrait {
    /// Section words at the frontier, vertices in lexicographic order.
    pub fn frontier_words(&self) -> Vec<&GeneratorWord> {
        match self {
            DepthPortrait::Frontier(w) => vec![w],
            DepthPortrait::Node { children, .. } => children.iter().flat_map(|c| c.frontier_words()).collect(),
        }
    }
}

//! Built-in platforms: the Grigorchuk group and its `G_ω` relatives, the
//! Basilica group, the universal Grigorchuk group, Hanoi Towers groups and
//! affine groups `Zⁿ ⋊ ⟨M_i⟩`.

pub mod affine;
pub mod config;
pub mod hanoi;

use std::fmt;

use crate::automaton::{MealyAutomaton, Rewriting, StateId};
use crate::error::GroupError;
use crate::group::{AutomatonGroup, ContractionBudget};

pub use affine::{AffineElement, AffineGroup};
pub use config::parse_platform_config;
pub use hanoi::{hanoi_legal_move, HanoiConfig};

pub const GRIGORCHUK_ID: u8 = 0x01;
pub const G_OMEGA_ID: u8 = 0x02;
pub const BASILICA_ID: u8 = 0x03;
pub const UNIVERSAL_ID: u8 = 0x04;
pub const HANOI_ID: u8 = 0x05;
pub const AFFINE_ID: u8 = 0x06;

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// States `e a b c d` on `{0,1}`:
/// `a = (e, e)·(0 1)`, `b = (a, c)`, `c = (a, d)`, `d = (e, b)`.
pub fn grigorchuk_automaton() -> MealyAutomaton {
    const E: StateId = 0;
    const A: StateId = 1;
    const B: StateId = 2;
    const C: StateId = 3;
    const D: StateId = 4;
    MealyAutomaton::new(
        2,
        names(&["e", "a", "b", "c", "d"]),
        E,
        vec![vec![E, E], vec![E, E], vec![A, C], vec![A, D], vec![E, B]],
        vec![vec![0, 1], vec![1, 0], vec![0, 1], vec![0, 1], vec![0, 1]],
    )
    .expect("static table")
}

pub fn grigorchuk(budget: ContractionBudget) -> Result<AutomatonGroup, GroupError> {
    let rewriting = Rewriting::free(5).with_involutions(&[1]).with_klein([2, 3, 4]);
    AutomatonGroup::new(GRIGORCHUK_ID, "grigorchuk", grigorchuk_automaton(), rewriting, vec![1, 2, 3, 4], true, budget)
}

/// An eventually periodic sequence `ω = preperiod · period^∞` over `{0,1,2}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GOmegaSpec {
    preperiod: Vec<u8>,
    period: Vec<u8>,
}

impl GOmegaSpec {
    pub fn new(preperiod: Vec<u8>, period: Vec<u8>) -> Result<Self, GroupError> {
        if period.is_empty() {
            return Err(GroupError::InvalidSpec("G_ω period must be nonempty".into()));
        }
        if preperiod.iter().chain(&period).any(|&x| x > 2) {
            return Err(GroupError::InvalidSpec("G_ω letters must be in {0,1,2}".into()));
        }
        if preperiod.len() + period.len() > 60 {
            return Err(GroupError::InvalidSpec("G_ω preperiod + period longer than 60".into()));
        }
        Ok(GOmegaSpec { preperiod, period })
    }

    /// Parses `"<period>"` or `"<preperiod>/<period>"`, e.g. `"012"` or `"2/01"`.
    pub fn parse(text: &str) -> Result<Self, GroupError> {
        let digits = |s: &str| -> Result<Vec<u8>, GroupError> {
            s.trim()
                .chars()
                .map(|c| match c {
                    '0'..='2' => Ok(c as u8 - b'0'),
                    _ => Err(GroupError::InvalidSpec(format!("bad ω letter `{c}`"))),
                })
                .collect()
        };
        match text.split_once('/') {
            Some((pre, per)) => Self::new(digits(pre)?, digits(per)?),
            None => Self::new(Vec::new(), digits(text)?),
        }
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.preperiod
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    /// `ω_n`
    pub fn letter(&self, n: usize) -> u8 {
        if n < self.preperiod.len() {
            self.preperiod[n]
        } else {
            self.period[(n - self.preperiod.len()) % self.period.len()]
        }
    }

    /// Number of distinct levels after folding the periodic tail.
    pub fn levels(&self) -> usize {
        self.preperiod.len() + self.period.len()
    }

    fn next_level(&self, l: usize) -> usize {
        if l + 1 < self.levels() {
            l + 1
        } else {
            self.preperiod.len()
        }
    }
}

impl fmt::Display for GOmegaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |v: &[u8]| v.iter().map(|d| char::from(b'0' + d)).collect::<String>();
        if self.preperiod.is_empty() {
            write!(f, "{}", s(&self.period))
        } else {
            write!(f, "{}/{}", s(&self.preperiod), s(&self.period))
        }
    }
}

/// Sections at letter 0 of `(b, c, d)` for a given letter of ω: `true` means `a`,
/// `false` means `e`.
const OMEGA_COLUMNS: [[bool; 3]; 3] = [[true, true, false], [true, false, true], [false, true, true]];

/// The level-indexed automaton of `G_ω`, folded into finitely many states
/// because ω is eventually periodic. State `b@l` acts as `b` does on the
/// subtree at depth `l`; level-0 states are named plainly.
pub fn g_omega_automaton(spec: &GOmegaSpec) -> MealyAutomaton {
    const E: StateId = 0;
    const A: StateId = 1;
    let levels = spec.levels();
    let mut state_names = names(&["e", "a"]);
    let mut transition = vec![vec![E, E], vec![E, E]];
    let mut output = vec![vec![0, 1], vec![1, 0]];
    let state = |gen: usize, level: usize| (2 + 3 * level + gen) as StateId;
    for l in 0..levels {
        let column = OMEGA_COLUMNS[spec.letter(l) as usize];
        for (gen, base) in ["b", "c", "d"].iter().enumerate() {
            state_names.push(if l == 0 { base.to_string() } else { format!("{base}@{l}") });
            let at0 = if column[gen] { A } else { E };
            transition.push(vec![at0, state(gen, spec.next_level(l))]);
            output.push(vec![0, 1]);
        }
    }
    MealyAutomaton::new(2, state_names, E, transition, output).expect("generated table")
}

pub fn g_omega(spec: &GOmegaSpec, budget: ContractionBudget) -> Result<AutomatonGroup, GroupError> {
    let automaton = g_omega_automaton(spec);
    let mut rewriting = Rewriting::free(automaton.state_count()).with_involutions(&[1]);
    for l in 0..spec.levels() {
        let b = (2 + 3 * l) as StateId;
        rewriting = rewriting.with_klein([b, b + 1, b + 2]);
    }
    AutomatonGroup::new(G_OMEGA_ID, format!("gomega:{spec}"), automaton, rewriting, vec![1, 2, 3, 4], true, budget)
}

/// States `e a b` on `{0,1}`: `a = (e, b)`, `b = (e, a)·(0 1)`.
pub fn basilica_automaton() -> MealyAutomaton {
    MealyAutomaton::new(
        2,
        names(&["e", "a", "b"]),
        0,
        vec![vec![0, 0], vec![0, 2], vec![0, 1]],
        vec![vec![0, 1], vec![0, 1], vec![1, 0]],
    )
    .expect("static table")
}

pub fn basilica(budget: ContractionBudget) -> Result<AutomatonGroup, GroupError> {
    AutomatonGroup::new(BASILICA_ID, "basilica", basilica_automaton(), Rewriting::free(3), vec![1, 2], true, budget)
}

/// The byte encoding of the letter `(x, y)` of `{0,1} × {0,1,2}`.
pub fn universal_letter(x: u8, y: u8) -> u8 {
    3 * x + y
}

/// States `e a b c d` on `{0,1} × {0,1,2}`. `a` swaps the first coordinate;
/// `b`, `c`, `d` fix every letter, keep themselves on `(1, y)` and go to `a`
/// or `e` on `(0, y)` by the column `y`: `(a,a,e)`, `(a,e,a)`, `(e,a,a)`.
pub fn universal_automaton() -> MealyAutomaton {
    const E: StateId = 0;
    const A: StateId = 1;
    let l = universal_letter;
    let ident: Vec<u8> = (0..6).collect();
    let mut a_out = vec![0u8; 6];
    for y in 0..3 {
        a_out[l(0, y) as usize] = l(1, y);
        a_out[l(1, y) as usize] = l(0, y);
    }
    let mut transition = vec![vec![E; 6], vec![E; 6]];
    for (gen, s) in [2 as StateId, 3, 4].iter().enumerate() {
        let mut row = vec![E; 6];
        for y in 0..3u8 {
            row[l(0, y) as usize] = if OMEGA_COLUMNS[y as usize][gen] { A } else { E };
            row[l(1, y) as usize] = *s;
        }
        transition.push(row);
    }
    MealyAutomaton::new(
        6,
        names(&["e", "a", "b", "c", "d"]),
        E,
        transition,
        vec![ident.clone(), a_out, ident.clone(), ident.clone(), ident],
    )
    .expect("static table")
}

pub fn universal(budget: ContractionBudget) -> Result<AutomatonGroup, GroupError> {
    let rewriting = Rewriting::free(5).with_involutions(&[1]).with_klein([2, 3, 4]);
    AutomatonGroup::new(UNIVERSAL_ID, "universal", universal_automaton(), rewriting, vec![1, 2, 3, 4], true, budget)
}

/// Hanoi Towers group on `k` pegs: one state `a_ij` per pair `i < j`, which
/// swaps `i ↔ j` on the first letter in `{i, j}` and fixes everything else.
pub fn hanoi_automaton(k: u8) -> Result<MealyAutomaton, GroupError> {
    if k < 3 {
        return Err(GroupError::InvalidSpec(format!("Hanoi towers need at least 3 pegs, got {k}")));
    }
    let mut state_names = vec!["e".to_string()];
    let mut transition = vec![vec![0 as StateId; k as usize]];
    let mut output = vec![(0..k).collect::<Vec<u8>>()];
    for i in 0..k {
        for j in i + 1..k {
            let s = state_names.len() as StateId;
            state_names.push(if k <= 10 { format!("a{i}{j}") } else { format!("a{i}_{j}") });
            let mut out: Vec<u8> = (0..k).collect();
            out.swap(i as usize, j as usize);
            let row = (0..k).map(|x| if x == i || x == j { 0 } else { s }).collect();
            transition.push(row);
            output.push(out);
        }
    }
    MealyAutomaton::new(k, state_names, 0, transition, output)
}

/// Only the 3-peg group is flagged contracting; for more pegs the known word
/// problem bound is not polynomial.
pub fn hanoi(k: u8, budget: ContractionBudget) -> Result<AutomatonGroup, GroupError> {
    let automaton = hanoi_automaton(k)?;
    let gens: Vec<StateId> = (1..automaton.state_count() as StateId).collect();
    let rewriting = Rewriting::free(automaton.state_count()).with_involutions(&gens);
    AutomatonGroup::new(HANOI_ID, format!("hanoi:{k}"), automaton, rewriting, gens, k == 3, budget)
}

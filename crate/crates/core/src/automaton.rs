//! Invertible Mealy automata and words over their states.

use std::fmt;

use crate::error::GroupError;
use crate::perm::Perm;

pub type StateId = u16;

/// A state or the inverse of a state. Inverse states are never stored; their
/// output and transition are derived from the forward tables on demand.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u16);

impl Letter {
    #[inline]
    pub fn new(state: StateId, inverse: bool) -> Self {
        Letter((state << 1) | inverse as u16)
    }

    #[inline]
    pub fn state(self) -> StateId {
        self.0 >> 1
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.state(), if self.is_inverse() { "'" } else { "" })
    }
}

/// A finite invertible Mealy automaton over the alphabet `{0..k-1}`.
#[derive(Clone, Debug)]
pub struct MealyAutomaton {
    k: u8,
    names: Vec<String>,
    identity: StateId,
    /// `transition[s * k + x]`
    transition: Vec<StateId>,
    /// `output[s * k + x]`
    output: Vec<u8>,
    inverse_output: Vec<u8>,
}

impl MealyAutomaton {
    /// Validates and builds an automaton. `transition[s][x]` and `output[s][x]`
    /// are given per state.
    pub fn new(
        k: u8,
        names: Vec<String>,
        identity: StateId,
        transition: Vec<Vec<StateId>>,
        output: Vec<Vec<u8>>,
    ) -> Result<Self, GroupError> {
        let n = names.len();
        if k == 0 {
            return Err(GroupError::InvalidAutomaton("empty alphabet".into()));
        }
        if n == 0 || identity as usize >= n {
            return Err(GroupError::InvalidAutomaton("identity state missing".into()));
        }
        if transition.len() != n || output.len() != n {
            return Err(GroupError::InvalidAutomaton("table row count".into()));
        }
        let ku = k as usize;
        let mut flat_t = Vec::with_capacity(n * ku);
        let mut flat_o = Vec::with_capacity(n * ku);
        let mut flat_inv = vec![0u8; n * ku];
        for s in 0..n {
            if transition[s].len() != ku || output[s].len() != ku {
                return Err(GroupError::InvalidAutomaton(format!(
                    "state {} is not defined on every letter",
                    names[s]
                )));
            }
            if transition[s].iter().any(|&t| t as usize >= n) {
                return Err(GroupError::InvalidAutomaton(format!(
                    "state {} transitions to an unknown state",
                    names[s]
                )));
            }
            let perm = Perm::from_images(&output[s]).ok_or_else(|| {
                GroupError::InvalidAutomaton(format!("output of {} is not a bijection", names[s]))
            })?;
            let inv = perm.inverse();
            flat_inv[s * ku..(s + 1) * ku].copy_from_slice(inv.images());
            flat_t.extend_from_slice(&transition[s]);
            flat_o.extend_from_slice(&output[s]);
        }
        let id = identity as usize;
        if (0..ku).any(|x| flat_o[id * ku + x] as usize != x || flat_t[id * ku + x] != identity) {
            return Err(GroupError::InvalidAutomaton("identity state acts nontrivially".into()));
        }
        Ok(MealyAutomaton {
            k,
            names,
            identity,
            transition: flat_t,
            output: flat_o,
            inverse_output: flat_inv,
        })
    }

    pub fn alphabet_size(&self) -> u8 {
        self.k
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn identity(&self) -> StateId {
        self.identity
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name).map(|i| i as StateId)
    }

    /// Forward output table entry.
    pub fn output(&self, s: StateId, x: u8) -> u8 {
        self.output[s as usize * self.k as usize + x as usize]
    }

    /// Forward transition table entry.
    pub fn transition(&self, s: StateId, x: u8) -> StateId {
        self.transition[s as usize * self.k as usize + x as usize]
    }

    /// Output of a (possibly inverse) letter on input `x`.
    #[inline]
    pub fn letter_output(&self, l: Letter, x: u8) -> u8 {
        let base = l.state() as usize * self.k as usize;
        if l.is_inverse() {
            self.inverse_output[base + x as usize]
        } else {
            self.output[base + x as usize]
        }
    }

    /// Section of a letter at `x`. For an inverse letter this is
    /// `(τ(s, π(s)⁻¹(x)))⁻¹`, so that `s⁻¹·s` has trivial sections.
    #[inline]
    pub fn letter_section(&self, l: Letter, x: u8) -> Letter {
        let s = l.state();
        let base = s as usize * self.k as usize;
        if l.is_inverse() {
            let y = self.inverse_output[base + x as usize];
            Letter::new(self.transition[base + y as usize], true)
        } else {
            Letter::new(self.transition[base + x as usize], false)
        }
    }

    pub fn letter_perm(&self, l: Letter) -> Perm {
        let k = self.k as usize;
        let base = l.state() as usize * k;
        let table = if l.is_inverse() { &self.inverse_output } else { &self.output };
        Perm::from_images(&table[base..base + k]).expect("validated at construction")
    }

    pub fn letter_name(&self, l: Letter) -> String {
        if l.is_inverse() {
            format!("{}⁻¹", self.name(l.state()))
        } else {
            self.name(l.state()).to_string()
        }
    }
}

/// Length-reducing rewriting applied after free reduction.
#[derive(Clone, Debug, Default)]
pub struct Rewriting {
    /// `involution[s]`: `s² = e`, so `s⁻¹` is rewritten to `s`.
    involution: Vec<bool>,
    /// `klein[s] = Some((group, slot))` when `s` belongs to a Klein four-group
    /// `{e, x, y, z}` with `xy = z`.
    klein: Vec<Option<(u16, u8)>>,
    klein_groups: Vec<[StateId; 3]>,
}

impl Rewriting {
    /// Free reduction only.
    pub fn free(state_count: usize) -> Self {
        Rewriting {
            involution: vec![false; state_count],
            klein: vec![None; state_count],
            klein_groups: Vec::new(),
        }
    }

    pub fn with_involutions(mut self, states: &[StateId]) -> Self {
        for &s in states {
            self.involution[s as usize] = true;
        }
        self
    }

    /// Registers `{x, y, z}` as the nonidentity elements of a Klein four-group.
    /// All three become involutions.
    pub fn with_klein(mut self, triple: [StateId; 3]) -> Self {
        let g = self.klein_groups.len() as u16;
        for (slot, &s) in triple.iter().enumerate() {
            self.involution[s as usize] = true;
            self.klein[s as usize] = Some((g, slot as u8));
        }
        self.klein_groups.push(triple);
        self
    }

    pub fn is_involution(&self, s: StateId) -> bool {
        self.involution[s as usize]
    }

    /// Normalizes the letter itself: inverse involutions become forward.
    #[inline]
    fn normalize(&self, l: Letter) -> Letter {
        if l.is_inverse() && self.involution[l.state() as usize] {
            l.inverse()
        } else {
            l
        }
    }

    /// Reduces `letters`, dropping the identity state.
    pub fn reduce(&self, identity: StateId, letters: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if l.state() == identity {
                continue;
            }
            self.push(&mut out, l);
        }
        out
    }

    /// Appends one letter to an already reduced word, keeping it reduced.
    pub fn push(&self, out: &mut Vec<Letter>, l: Letter) {
        let mut cur = self.normalize(l);
        loop {
            let Some(&top) = out.last() else {
                out.push(cur);
                return;
            };
            if top == cur.inverse() || (top == cur && self.involution[cur.state() as usize]) {
                out.pop();
                return;
            }
            match (self.klein[top.state() as usize], self.klein[cur.state() as usize]) {
                (Some((g1, s1)), Some((g2, s2))) if g1 == g2 && s1 != s2 => {
                    out.pop();
                    let third = 3 - s1 - s2;
                    cur = Letter::new(self.klein_groups[g1 as usize][third as usize], false);
                }
                _ => {
                    out.push(cur);
                    return;
                }
            }
        }
    }
}

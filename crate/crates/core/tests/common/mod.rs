//! Test-only oracles. Everything here works from the printed automaton
//! tables and never calls into the crate's section or reduction code.
#![allow(dead_code)]

use std::collections::HashMap;

/// Raw Mealy tables: `out[s][x]`, `next[s][x]`; state 0 is the identity.
#[derive(Clone)]
pub struct Tables {
    pub k: u8,
    pub out: Vec<Vec<u8>>,
    pub next: Vec<Vec<usize>>,
}

/// A raw letter: (state, inverted).
pub type Raw = (usize, bool);

impl Tables {
    pub fn grigorchuk() -> Self {
        // e a b c d
        Tables {
            k: 2,
            out: vec![vec![0, 1], vec![1, 0], vec![0, 1], vec![0, 1], vec![0, 1]],
            next: vec![vec![0, 0], vec![0, 0], vec![1, 3], vec![1, 4], vec![0, 2]],
        }
    }

    pub fn basilica() -> Self {
        // e a b
        Tables {
            k: 2,
            out: vec![vec![0, 1], vec![0, 1], vec![1, 0]],
            next: vec![vec![0, 0], vec![0, 2], vec![0, 1]],
        }
    }

    pub fn universal() -> Self {
        // letters (x,y) -> 3x+y; e a b c d
        let id: Vec<u8> = (0..6).collect();
        let a_out = vec![3, 4, 5, 0, 1, 2];
        Tables {
            k: 6,
            out: vec![id.clone(), a_out, id.clone(), id.clone(), id],
            next: vec![
                vec![0; 6],
                vec![0; 6],
                vec![1, 1, 0, 2, 2, 2],
                vec![1, 0, 1, 3, 3, 3],
                vec![0, 1, 1, 4, 4, 4],
            ],
        }
    }

    pub fn hanoi3() -> Self {
        // e a01 a02 a12
        Tables {
            k: 3,
            out: vec![vec![0, 1, 2], vec![1, 0, 2], vec![2, 1, 0], vec![0, 2, 1]],
            next: vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 2, 0], vec![3, 0, 0]],
        }
    }

    /// `G_ω` unfolded over the levels of `ω = preperiod (period)^∞`.
    /// States: 0 = e, 1 = a, then `2 + 3·level + g` for `g` in (b, c, d),
    /// so `b, c, d` at level 0 are raw states 2, 3, 4. At level `n`, `g`
    /// has section `a` or `e` on 0 according to the column of `ω_n`, and
    /// the level `n + 1` copy of itself on 1.
    pub fn g_omega(preperiod: &[u8], period: &[u8]) -> Self {
        // Column for letter 0: (a, a, e); 1: (a, e, a); 2: (e, a, a).
        let cols = [[true, true, false], [true, false, true], [false, true, true]];
        let levels = preperiod.len() + period.len();
        let omega = |n: usize| if n < preperiod.len() { preperiod[n] } else { period[n - preperiod.len()] };
        let mut out = vec![vec![0, 1], vec![1, 0]];
        let mut next = vec![vec![0, 0], vec![0, 0]];
        for level in 0..levels {
            let succ = if level + 1 < levels { level + 1 } else { preperiod.len() };
            for g in 0..3 {
                out.push(vec![0, 1]);
                let on_zero = if cols[omega(level) as usize][g] { 1 } else { 0 };
                next.push(vec![on_zero, 2 + 3 * succ + g]);
            }
        }
        Tables { k: 2, out, next }
    }

    fn inv_out(&self, s: usize, y: u8) -> u8 {
        self.out[s].iter().position(|&o| o == y).unwrap() as u8
    }

    /// One letter acting on a whole string.
    pub fn act(&self, l: Raw, s: &[u8]) -> Vec<u8> {
        let (mut st, inv) = l;
        let mut out = Vec::with_capacity(s.len());
        for &x in s {
            if inv {
                let pre = self.inv_out(st, x);
                out.push(pre);
                st = self.next[st][pre as usize];
            } else {
                out.push(self.out[st][x as usize]);
                st = self.next[st][x as usize];
            }
        }
        out
    }

    /// Word acting with the rightmost letter first.
    pub fn apply(&self, w: &[Raw], s: &[u8]) -> Vec<u8> {
        w.iter().rev().fold(s.to_vec(), |acc, &l| self.act(l, &acc))
    }

    /// Do the two words agree on every string of length `depth`?
    /// Exhaustive over strings; the memo only shares identical subproblems
    /// (same pair of per-letter state tuples and remaining depth).
    pub fn agree_to_depth(&self, w1: &[Raw], w2: &[Raw], depth: usize) -> bool {
        let mut memo = HashMap::new();
        self.agree_rec(normalize(w1.to_vec()), normalize(w2.to_vec()), depth, &mut memo)
    }

    fn step(&self, w: &[Raw], x: u8) -> (u8, Vec<Raw>) {
        let mut y = x;
        let mut next = vec![(0, false); w.len()];
        for (i, &(s, inv)) in w.iter().enumerate().rev() {
            if inv {
                let pre = self.inv_out(s, y);
                next[i] = (self.next[s][pre as usize], true);
                y = pre;
            } else {
                next[i] = (self.next[s][y as usize], false);
                y = self.out[s][y as usize];
            }
        }
        (y, next)
    }

    fn agree_rec(&self, w1: Vec<Raw>, w2: Vec<Raw>, depth: usize, memo: &mut HashMap<(Vec<Raw>, Vec<Raw>, usize), bool>) -> bool {
        if depth == 0 {
            return true;
        }
        let key = (w1.clone(), w2.clone(), depth);
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let mut ok = true;
        for x in 0..self.k {
            let (y1, n1) = self.step(&w1, x);
            let (y2, n2) = self.step(&w2, x);
            if y1 != y2 || !self.agree_rec(normalize(n1), normalize(n2), depth - 1, memo) {
                ok = false;
                break;
            }
        }
        memo.insert(key, ok);
        ok
    }
}

/// Drops identity letters and cancels adjacent `s s⁻¹` pairs. Both are
/// group axioms, so the action is unchanged.
pub fn normalize(w: Vec<Raw>) -> Vec<Raw> {
    let mut out: Vec<Raw> = Vec::with_capacity(w.len());
    for l in w {
        if l.0 == 0 {
            continue;
        }
        if out.last() == Some(&(l.0, !l.1)) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Parses `"a b^-1 c"` against a list of state names (index = raw state).
pub fn raw_word(names: &[&str], text: &str) -> Vec<Raw> {
    text.split_whitespace()
        .map(|tok| {
            let (name, inv) = match tok.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (tok, false),
            };
            let s = names.iter().position(|n| *n == name).unwrap_or_else(|| panic!("unknown state {name}"));
            (s, inv)
        })
        .collect()
}

/// Inverse of [`raw_word`].
pub fn raw_text(names: &[&str], w: &[Raw]) -> String {
    w.iter()
        .map(|&(s, inv)| if inv { format!("{}^-1", names[s]) } else { names[s].to_string() })
        .collect::<Vec<_>>()
        .join(" ")
}

pub const GRIG_NAMES: [&str; 5] = ["e", "a", "b", "c", "d"];
pub const BASILICA_NAMES: [&str; 3] = ["e", "a", "b"];
pub const HANOI3_NAMES: [&str; 4] = ["e", "a01", "a02", "a12"];

/// All strings over `{0..k-1}` of length `n`, lexicographic.
pub fn all_strings(k: u8, n: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..k).map(move |x| {
                    let mut t = s.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

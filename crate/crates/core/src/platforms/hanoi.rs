//! Game semantics for Hanoi Towers configurations, independent of the
//! automaton. Used to cross-check the automaton action.

use crate::error::GroupError;

/// Position `i` holds the peg of disc `i`, discs numbered from the smallest.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HanoiConfig {
    pegs: u8,
    discs: Vec<u8>,
}

impl HanoiConfig {
    pub fn new(pegs: u8, discs: Vec<u8>) -> Result<Self, GroupError> {
        if pegs < 3 {
            return Err(GroupError::InvalidSpec(format!("need at least 3 pegs, got {pegs}")));
        }
        if let Some(&x) = discs.iter().find(|&&x| x >= pegs) {
            return Err(GroupError::LetterOutOfRange { letter: x as u32, k: pegs });
        }
        Ok(HanoiConfig { pegs, discs })
    }

    pub fn pegs(&self) -> u8 {
        self.pegs
    }

    pub fn discs(&self) -> &[u8] {
        &self.discs
    }
}

/// Moves the smallest disc lying on peg `i` or peg `j` onto the other of the
/// two pegs. With both pegs empty the configuration is returned unchanged.
pub fn hanoi_legal_move(config: &HanoiConfig, i: u8, j: u8) -> Result<HanoiConfig, GroupError> {
    let k = config.pegs;
    for p in [i, j] {
        if p >= k {
            return Err(GroupError::LetterOutOfRange { letter: p as u32, k });
        }
    }
    if i == j {
        return Err(GroupError::InvalidSpec("pegs must differ".into()));
    }
    let mut discs = config.discs.clone();
    // The top disc of a peg is its smallest, so scan from the smallest disc.
    if let Some(d) = discs.iter_mut().find(|p| **p == i || **p == j) {
        *d = if *d == i { j } else { i };
    }
    Ok(HanoiConfig { pegs: k, discs })
}

//! Brute-force search for simultaneous conjugators inside the public
//! subgroups, and key recovery from any pair of solutions.
//!
//! Candidates are freely reduced signed words over one side's public
//! generators, visited in length-then-lexicographic order with letters ordered
//! `g1, g1⁻¹, g2, g2⁻¹, …`. The search is level-synchronous: every word of
//! length `L` is produced from the words of length `L - 1`, so the order, the
//! first solution and the node count do not depend on whether the level is
//! evaluated on one thread or many.

use std::collections::HashSet;
use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::aag::{key_digest, PublicParams, Side, Transmission};
use crate::element::{Element, Platform};
use crate::error::{GroupError, ProtocolError};
use crate::SignedIndex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("node budget exhausted after {nodes} candidates")]
    NodeBudget { nodes: u64 },
    #[error("target tuple has {found} entries, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("solution failed re-verification")]
    Unsound,
}

/// How a conjugator acts in the equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `x⁻¹ u x = v`, the shape of Alice's transmission.
    Right,
    /// `x u x⁻¹ = v`, the shape of Bob's transmission.
    Left,
}

impl Orientation {
    pub fn of(side: Side) -> Self {
        match side {
            Side::Alice => Orientation::Right,
            Side::Bob => Orientation::Left,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AttackOptions {
    pub max_length: usize,
    /// Cap on candidates tested before giving up.
    pub max_nodes: u64,
    /// Skip candidates whose element already appeared earlier in the order.
    pub dedup: bool,
    pub parallel: bool,
}

impl AttackOptions {
    pub fn new(max_length: usize) -> Self {
        AttackOptions { max_length, max_nodes: 5_000_000, dedup: false, parallel: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Found(Vec<SignedIndex>),
    /// Every candidate up to this length was tested.
    NoSolutionUpTo(usize),
}

#[derive(Clone, Debug)]
pub struct AttackResult {
    pub outcome: Outcome,
    /// Candidates tested, including the solution itself.
    pub nodes: u64,
    pub elapsed: Duration,
}

impl AttackResult {
    pub fn solution(&self) -> Option<&[SignedIndex]> {
        match &self.outcome {
            Outcome::Found(w) => Some(w),
            Outcome::NoSolutionUpTo(_) => None,
        }
    }
}

/// An observed transmission together with the public data it was made from.
#[derive(Clone, Debug)]
pub struct AttackInstance {
    pub params: PublicParams,
    pub target: Transmission,
}

impl AttackInstance {
    pub fn new(params: PublicParams, target: Transmission) -> Result<Self, AttackError> {
        let expected = params.generators(target.side.other()).len();
        if target.elements.len() != expected {
            return Err(AttackError::LengthMismatch { expected, found: target.elements.len() });
        }
        Ok(AttackInstance { params, target })
    }

    /// The side whose private element is sought.
    pub fn side(&self) -> Side {
        self.target.side
    }

    fn equations(&self) -> Vec<(Element, Element)> {
        let us = self.params.generators(self.side().other());
        us.iter().cloned().zip(self.target.elements.iter().cloned()).collect()
    }
}

/// Searches the sender's generator subgroup for a conjugator explaining the
/// whole target tuple.
pub fn solve_simultaneous(instance: &AttackInstance, options: &AttackOptions) -> Result<AttackResult, AttackError> {
    let side = instance.side();
    search(
        instance.params.platform(),
        instance.params.generators(side),
        &instance.equations(),
        Orientation::of(side),
        options,
    )
}

/// One equation `x⁻¹ u x = v` over `generators`.
pub fn single_conjugacy(
    platform: &Platform,
    u: &Element,
    v: &Element,
    generators: &[Element],
    options: &AttackOptions,
) -> Result<AttackResult, AttackError> {
    search(platform, generators, &[(u.clone(), v.clone())], Orientation::Right, options)
}

/// `x` satisfies every equation.
pub fn satisfies(
    platform: &Platform,
    x: &Element,
    equations: &[(Element, Element)],
    orientation: Orientation,
) -> Result<bool, GroupError> {
    for (u, v) in equations {
        // Multiplied through by x so no inverse is needed.
        let (lhs, rhs) = match orientation {
            Orientation::Right => (platform.multiply(u, x)?, platform.multiply(x, v)?),
            Orientation::Left => (platform.multiply(x, u)?, platform.multiply(v, x)?),
        };
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

fn letters(count: usize) -> Vec<SignedIndex> {
    (0..count as u16).flat_map(|i| [SignedIndex::new(i, false), SignedIndex::new(i, true)]).collect()
}

struct Candidate {
    word: Vec<SignedIndex>,
    element: Element,
}

fn search(
    platform: &Platform,
    generators: &[Element],
    equations: &[(Element, Element)],
    orientation: Orientation,
    options: &AttackOptions,
) -> Result<AttackResult, AttackError> {
    let start = Instant::now();
    let alphabet = letters(generators.len());
    let letter_elems: Vec<Element> = alphabet
        .iter()
        .map(|x| {
            let g = &generators[x.index as usize];
            if x.inverse {
                platform.invert(g)
            } else {
                Ok(g.clone())
            }
        })
        .collect::<Result<_, _>>()?;

    let test = |x: &Element| satisfies(platform, x, equations, orientation);

    let mut nodes: u64 = 0;
    let mut seen: HashSet<Element> = HashSet::new();
    let mut level = vec![Candidate { word: Vec::new(), element: platform.identity()? }];

    for length in 0..=options.max_length {
        if length > 0 {
            let remaining = options.max_nodes.saturating_sub(nodes);
            let mut shapes: Vec<(usize, usize)> = Vec::new();
            'outer: for (pi, parent) in level.iter().enumerate() {
                for (li, &x) in alphabet.iter().enumerate() {
                    if parent.word.last() == Some(&x.inverse()) {
                        continue;
                    }
                    shapes.push((pi, li));
                    if !options.dedup && shapes.len() as u64 > remaining {
                        break 'outer;
                    }
                }
            }
            let build = |&(pi, li): &(usize, usize)| -> Result<Candidate, GroupError> {
                let parent = &level[pi];
                let mut word = parent.word.clone();
                word.push(alphabet[li]);
                Ok(Candidate { word, element: platform.multiply(&parent.element, &letter_elems[li])? })
            };
            let built: Vec<Candidate> = if options.parallel {
                shapes.par_iter().map(build).collect::<Result<_, _>>()?
            } else {
                shapes.iter().map(build).collect::<Result<_, _>>()?
            };
            level = built;
        }
        if options.dedup {
            level.retain(|c| seen.insert(c.element.clone()));
        }
        if level.is_empty() {
            return Ok(AttackResult { outcome: Outcome::NoSolutionUpTo(options.max_length), nodes, elapsed: start.elapsed() });
        }

        let remaining = options.max_nodes.saturating_sub(nodes);
        let window = level.len().min(remaining.min(usize::MAX as u64) as usize);
        let hit = if options.parallel {
            level[..window]
                .par_iter()
                .map(|c| test(&c.element))
                .collect::<Result<Vec<bool>, _>>()?
                .iter()
                .position(|&b| b)
        } else {
            let mut hit = None;
            for (i, c) in level[..window].iter().enumerate() {
                if test(&c.element)? {
                    hit = Some(i);
                    break;
                }
            }
            hit
        };
        match hit {
            Some(i) => {
                nodes += i as u64 + 1;
                let word = level[i].word.clone();
                if !reverify(platform, generators, &word, equations, orientation)? {
                    return Err(AttackError::Unsound);
                }
                return Ok(AttackResult { outcome: Outcome::Found(word), nodes, elapsed: start.elapsed() });
            }
            None => {
                nodes += window as u64;
                if window < level.len() || (nodes >= options.max_nodes && length < options.max_length) {
                    return Err(AttackError::NodeBudget { nodes });
                }
            }
        }
    }
    Ok(AttackResult { outcome: Outcome::NoSolutionUpTo(options.max_length), nodes, elapsed: start.elapsed() })
}

/// Recomputes the candidate from its word and checks the original equations
/// `x⁻¹ u x = v` (or `x u x⁻¹ = v`) literally.
fn reverify(
    platform: &Platform,
    generators: &[Element],
    word: &[SignedIndex],
    equations: &[(Element, Element)],
    orientation: Orientation,
) -> Result<bool, GroupError> {
    let mut x = platform.identity()?;
    for l in word {
        let g = &generators[l.index as usize];
        let g = if l.inverse { platform.invert(g)? } else { g.clone() };
        x = platform.multiply(&x, &g)?;
    }
    let xi = platform.invert(&x)?;
    for (u, v) in equations {
        let lhs = match orientation {
            Orientation::Right => platform.multiply(&platform.multiply(&xi, u)?, &x)?,
            Orientation::Left => platform.multiply(&platform.multiply(&x, u)?, &xi)?,
        };
        if &lhs != v {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Digest of `A⁻¹ B A B⁻¹` for candidate solutions of the two systems.
pub fn recover_key(params: &PublicParams, sol_a: &[SignedIndex], sol_b: &[SignedIndex]) -> Result<[u8; 32], AttackError> {
    let p = params.platform();
    let a = params.evaluate(Side::Alice, sol_a)?;
    let b = params.evaluate(Side::Bob, sol_b)?;
    let k = p.multiply(&p.multiply(&p.invert(&a)?, &b)?, &p.multiply(&a, &p.invert(&b)?)?)?;
    Ok(key_digest(p, &k))
}

/// One row of attack measurements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackReport {
    pub platform: String,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub t: usize,
    pub max_length: usize,
    pub found: bool,
    pub nodes: u64,
    pub millis: u128,
}

impl AttackReport {
    /// Tab-separated `key=value` fields in a fixed order.
    pub fn record(&self) -> String {
        format!(
            "platform={}\tn={}\tm={}\ts={}\tt={}\tL={}\tfound={}\tnodes={}\tms={}",
            self.platform, self.n, self.m, self.s, self.t, self.max_length, self.found, self.nodes, self.millis
        )
    }
}

impl fmt::Display for AttackReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: n={} m={} s={} t={} L={} -> {} after {} nodes in {} ms",
            self.platform,
            self.n,
            self.m,
            self.s,
            self.t,
            self.max_length,
            if self.found { "solved" } else { "not solved" },
            self.nodes,
            self.millis
        )
    }
}

//! Permutations of a small alphabet `{0..k-1}`.

use std::fmt;

/// A permutation stored as its image table: `self.apply(x) == images[x]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Box<[u8]>);

impl Perm {
    pub fn identity(k: u8) -> Self {
        Perm((0..k).collect())
    }

    /// Builds a permutation from its image table, or `None` when the table is
    /// not a bijection on `{0..len-1}`.
    pub fn from_images(images: &[u8]) -> Option<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &y in images {
            let y = y as usize;
            if y >= k || seen[y] {
                return None;
            }
            seen[y] = true;
        }
        Some(Perm(images.into()))
    }

    pub fn transposition(k: u8, i: u8, j: u8) -> Self {
        let mut images: Vec<u8> = (0..k).collect();
        images.swap(i as usize, j as usize);
        Perm(images.into())
    }

    #[inline]
    pub fn apply(&self, x: u8) -> u8 {
        self.0[x as usize]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[u8] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &y)| i == y as usize)
    }

    /// `self ∘ other`: `other` is applied first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&x| self.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u8; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y as usize] = x as u8;
        }
        Perm(inv.into())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Cycle notation, `()` for the identity.
impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut done = vec![false; self.0.len()];
        let mut wrote = false;
        for start in 0..self.0.len() {
            if done[start] || self.0[start] as usize == start {
                continue;
            }
            write!(f, "(")?;
            let mut x = start;
            let mut first = true;
            while !done[x] {
                done[x] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
                first = false;
                x = self.0[x] as usize;
            }
            write!(f, ")")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "()")?;
        }
        Ok(())
    }
}

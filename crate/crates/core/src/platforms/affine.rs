//! Affine transformations `v ↦ u + M·v` of `Zⁿ` with unimodular integer `M`.
//!
//! Element encoding: `n` as one byte, then the `n²` matrix entries row-major,
//! then the `n` translation entries. Each integer is a sign byte (`0x00`
//! non-negative, `0x01` negative), a big-endian `u16` magnitude length and the
//! big-endian magnitude with no leading zero bytes (zero has length 0).

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};

use crate::error::{DecodeError, GroupError};
use crate::SignedIndex;

/// Largest dimension accepted from constructors and decoders.
pub const MAX_DIMENSION: usize = 16;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AffineElement {
    n: usize,
    translation: Vec<BigInt>,
    /// row-major `n × n`
    matrix: Vec<BigInt>,
}

impl AffineElement {
    pub fn identity(n: usize) -> Self {
        let mut matrix = vec![BigInt::zero(); n * n];
        for i in 0..n {
            matrix[i * n + i] = BigInt::one();
        }
        AffineElement { n, translation: vec![BigInt::zero(); n], matrix }
    }

    /// Validates dimensions and unimodularity.
    pub fn new(translation: Vec<BigInt>, matrix: Vec<BigInt>) -> Result<Self, GroupError> {
        let n = translation.len();
        if matrix.len() != n * n {
            return Err(GroupError::DimensionMismatch { expected: n * n, found: matrix.len() });
        }
        if n == 0 || n > MAX_DIMENSION {
            return Err(GroupError::InvalidSpec(format!("dimension {n} out of range")));
        }
        let e = AffineElement { n, translation, matrix };
        if e.determinant().abs() != BigInt::one() {
            return Err(GroupError::NonUnimodular);
        }
        Ok(e)
    }

    pub fn from_i64(translation: &[i64], matrix: &[i64]) -> Result<Self, GroupError> {
        Self::new(
            translation.iter().map(|&x| BigInt::from(x)).collect(),
            matrix.iter().map(|&x| BigInt::from(x)).collect(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn translation(&self) -> &[BigInt] {
        &self.translation
    }

    pub fn matrix(&self) -> &[BigInt] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.matrix[i * self.n + j]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// `self ∘ other`: `(u₁, M₁)(u₂, M₂) = (u₁ + M₁u₂, M₁M₂)`.
    pub fn compose(&self, other: &AffineElement) -> Result<AffineElement, GroupError> {
        if self.n != other.n {
            return Err(GroupError::DimensionMismatch { expected: self.n, found: other.n });
        }
        let n = self.n;
        let mut matrix = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigInt::zero();
                for l in 0..n {
                    acc += self.entry(i, l) * other.entry(l, j);
                }
                matrix.push(acc);
            }
        }
        let translation = (0..n)
            .map(|i| {
                let mut acc = self.translation[i].clone();
                for l in 0..n {
                    acc += self.entry(i, l) * &other.translation[l];
                }
                acc
            })
            .collect();
        Ok(AffineElement { n, translation, matrix })
    }

    /// `(u, M)⁻¹ = (−M⁻¹u, M⁻¹)`; `M⁻¹ = det · adj(M)` since `det = ±1`.
    pub fn invert(&self) -> AffineElement {
        let n = self.n;
        let det = self.determinant();
        let mut inv = vec![BigInt::zero(); n * n];
        if n == 1 {
            inv[0] = det.clone();
        } else {
            for i in 0..n {
                for j in 0..n {
                    let minor = minor_matrix(&self.matrix, n, i, j);
                    let mut cof = bareiss_det(minor, n - 1);
                    if (i + j) % 2 == 1 {
                        cof = -cof;
                    }
                    // adj(M)[j][i] = cofactor(i, j)
                    inv[j * n + i] = &det * cof;
                }
            }
        }
        let translation = (0..n)
            .map(|i| {
                let mut acc = BigInt::zero();
                for l in 0..n {
                    acc -= &inv[i * n + l] * &self.translation[l];
                }
                acc
            })
            .collect();
        AffineElement { n, translation, matrix: inv }
    }

    pub fn determinant(&self) -> BigInt {
        bareiss_det(self.matrix.clone(), self.n)
    }

    /// `u + M·v`
    pub fn act(&self, v: &[BigInt]) -> Vec<BigInt> {
        (0..self.n)
            .map(|i| {
                let mut acc = self.translation[i].clone();
                for l in 0..self.n {
                    acc += self.entry(i, l) * &v[l];
                }
                acc
            })
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.n as u8];
        for x in self.matrix.iter().chain(&self.translation) {
            write_int(x, &mut out);
        }
        out
    }

    /// Decodes an element from the front of `bytes`, returning it and the
    /// number of bytes consumed.
    pub fn decode(bytes: &[u8]) -> Result<(AffineElement, usize), DecodeError> {
        let mut pos = 0usize;
        let n = *bytes.first().ok_or(DecodeError::Truncated)? as usize;
        pos += 1;
        if n == 0 || n > MAX_DIMENSION {
            return Err(DecodeError::Invalid(format!("dimension {n}")));
        }
        let mut ints = Vec::with_capacity(n * n + n);
        for _ in 0..n * n + n {
            ints.push(read_int(bytes, &mut pos)?);
        }
        let translation = ints.split_off(n * n);
        let e = AffineElement { n, translation, matrix: ints };
        if e.determinant().abs() != BigInt::one() {
            return Err(DecodeError::NonUnimodular);
        }
        Ok((e, pos))
    }
}

fn minor_matrix(m: &[BigInt], n: usize, row: usize, col: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in (0..n).filter(|&i| i != row) {
        for j in (0..n).filter(|&j| j != col) {
            out.push(m[i * n + j].clone());
        }
    }
    out
}

/// Fraction-free Gaussian elimination; exact over the integers.
fn bareiss_det(mut a: Vec<BigInt>, n: usize) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k * n + k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i * n + k].is_zero()) else {
                return BigInt::zero();
            };
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j]) / &prev;
                a[i * n + j] = v;
            }
        }
        prev = a[k * n + k].clone();
    }
    sign * &a[(n - 1) * n + (n - 1)]
}

fn write_int(x: &BigInt, out: &mut Vec<u8>) {
    let (sign, mag) = x.to_bytes_be();
    let mag: &[u8] = if x.is_zero() { &[] } else { &mag };
    out.push(if sign == Sign::Minus { 0x01 } else { 0x00 });
    let len = u16::try_from(mag.len()).expect("integer magnitude exceeds 65535 bytes");
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(mag);
}

fn read_int(bytes: &[u8], pos: &mut usize) -> Result<BigInt, DecodeError> {
    let sign = *bytes.get(*pos).ok_or(DecodeError::Truncated)?;
    let len_bytes = bytes.get(*pos + 1..*pos + 3).ok_or(DecodeError::Truncated)?;
    let len = u16::from_be_bytes([len_bytes[0], len_bytes[1]]) as usize;
    let mag = bytes.get(*pos + 3..*pos + 3 + len).ok_or(DecodeError::Truncated)?;
    *pos += 3 + len;
    if mag.first() == Some(&0) {
        return Err(DecodeError::NonCanonicalInteger);
    }
    let value = BigInt::from_bytes_be(Sign::Plus, mag);
    match sign {
        0x00 => Ok(value),
        0x01 if len == 0 => Err(DecodeError::NonCanonicalInteger),
        0x01 => Ok(-value),
        s => Err(DecodeError::BadSign(s)),
    }
}

/// A finitely generated subgroup of `Aff_n(Z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineGroup {
    n: usize,
    generators: Vec<AffineElement>,
    inverses: Vec<AffineElement>,
}

impl AffineGroup {
    pub fn new(generators: Vec<AffineElement>) -> Result<Self, GroupError> {
        let first = generators.first().ok_or_else(|| GroupError::InvalidSpec("no generators".into()))?;
        let n = first.dimension();
        for g in &generators {
            if g.dimension() != n {
                return Err(GroupError::DimensionMismatch { expected: n, found: g.dimension() });
            }
            if g.determinant().abs() != BigInt::one() {
                return Err(GroupError::NonUnimodular);
            }
        }
        let inverses = generators.iter().map(AffineElement::invert).collect();
        Ok(AffineGroup { n, generators, inverses })
    }

    /// `g₁ = ((0,0), [[1,2],[0,1]])`, `g₂ = ((0,0), [[1,0],[2,1]])`, which
    /// generate a free subgroup of `SL₂(Z)`.
    pub fn sanov() -> Self {
        Self::new(vec![
            AffineElement::from_i64(&[0, 0], &[1, 2, 0, 1]).unwrap(),
            AffineElement::from_i64(&[0, 0], &[1, 0, 2, 1]).unwrap(),
        ])
        .unwrap()
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[AffineElement] {
        &self.generators
    }

    pub fn generator(&self, g: SignedIndex) -> Result<&AffineElement, GroupError> {
        let list = if g.inverse { &self.inverses } else { &self.generators };
        list.get(g.index as usize)
            .ok_or_else(|| GroupError::UnknownGenerator(format!("g{}", g.index + 1)))
    }

    /// Evaluates a word, rightmost letter acting first.
    pub fn evaluate(&self, word: &[SignedIndex]) -> Result<AffineElement, GroupError> {
        let mut acc = AffineElement::identity(self.n);
        for &g in word {
            acc = acc.compose(self.generator(g)?)?;
        }
        Ok(acc)
    }

    pub fn is_trivial(&self, word: &[SignedIndex]) -> Result<bool, GroupError> {
        Ok(self.evaluate(word)?.is_identity())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(u: &[i64], m: &[i64]) -> AffineElement {
        AffineElement::from_i64(u, m).unwrap()
    }

    #[test]
    fn compose_matches_hand_arithmetic() {
        let g1 = el(&[1, 0], &[1, 2, 0, 1]);
        let g2 = el(&[0, 1], &[1, 0, 0, 1]);
        assert_eq!(g1.compose(&g2).unwrap(), el(&[3, 1], &[1, 2, 0, 1]));
    }

    #[test]
    fn inverse_is_exact() {
        let g = el(&[5, -7, 2], &[2, 1, 0, 1, 1, 0, 0, 0, -1]);
        assert!(g.compose(&g.invert()).unwrap().is_identity());
        assert!(g.invert().compose(&g).unwrap().is_identity());
        let one = el(&[4], &[-1]);
        assert!(one.compose(&one.invert()).unwrap().is_identity());
    }

    #[test]
    fn rejects_non_unimodular_and_mismatch() {
        assert_eq!(AffineElement::from_i64(&[0, 0], &[2, 0, 0, 1]), Err(GroupError::NonUnimodular));
        assert!(matches!(
            AffineElement::from_i64(&[0, 0], &[1, 0, 0]),
            Err(GroupError::DimensionMismatch { .. })
        ));
        let g2 = el(&[0, 0], &[1, 0, 0, 1]);
        let g3 = AffineElement::identity(3);
        assert!(AffineGroup::new(vec![g2, g3]).is_err());
    }

    #[test]
    fn sanov_commutator_is_nontrivial() {
        let g = AffineGroup::sanov();
        let w = [
            SignedIndex::new(0, false),
            SignedIndex::new(1, false),
            SignedIndex::new(0, true),
            SignedIndex::new(1, true),
        ];
        assert!(!g.is_trivial(&w).unwrap());
        assert!(g.is_trivial(&[]).unwrap());
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(el(&[0, 0], &[0, 1, 1, 0]).determinant(), BigInt::from(-1));
        assert_eq!(el(&[0, 0, 0], &[0, 0, 1, 0, 1, 0, 1, 0, 0]).determinant(), BigInt::from(-1));
    }

    #[test]
    fn byte_encoding_round_trip_and_layout() {
        let g = el(&[-300, 0], &[1, 2, 0, 1]);
        let bytes = g.to_bytes();
        assert_eq!(&bytes[..5], &[2, 0, 0, 1, 1]);
        // zero entry: sign 0, length 0
        assert_eq!(&bytes[9..12], &[0, 0, 0]);
        // translation -300 = -0x012c
        assert_eq!(&bytes[bytes.len() - 8..bytes.len() - 3], &[1, 0, 2, 0x01, 0x2c]);
        let (back, used) = AffineElement::decode(&bytes).unwrap();
        assert_eq!(used, bytes.len());
        assert_eq!(back, g);
    }

    #[test]
    fn decode_rejects_malformed() {
        let g = el(&[1, 0], &[1, 2, 0, 1]);
        let bytes = g.to_bytes();
        assert_eq!(AffineElement::decode(&bytes[..bytes.len() - 1]), Err(DecodeError::Truncated));
        let mut neg_zero = bytes.clone();
        assert_eq!(&neg_zero[9..12], &[0, 0, 0]);
        neg_zero[9] = 1;
        assert_eq!(AffineElement::decode(&neg_zero), Err(DecodeError::NonCanonicalInteger));
        let mut bad_sign = bytes.clone();
        bad_sign[1] = 7;
        assert_eq!(AffineElement::decode(&bad_sign), Err(DecodeError::BadSign(7)));
        let singular = el(&[0, 0], &[1, 0, 0, 1]);
        let mut b = singular.to_bytes();
        assert_eq!(&b[1..5], &[0, 0, 1, 1]);
        b[4] = 2;
        assert_eq!(AffineElement::decode(&b), Err(DecodeError::NonUnimodular));
    }
}

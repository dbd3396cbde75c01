use thiserror::Error;

/// Which bound of a [`ContractionBudget`](crate::ContractionBudget) ran out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetKind {
    ClosureSize,
    Depth,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("letter {letter} out of range for alphabet of size {k}")]
    LetterOutOfRange { letter: u32, k: u8 },
    #[error("unknown platform {0}")]
    UnknownPlatform(String),
    #[error("platform mismatch: expected 0x{expected:02x}, got 0x{found:02x}")]
    PlatformMismatch { expected: u8, found: u8 },
    #[error("contraction budget exhausted ({0:?})")]
    BudgetExhausted(BudgetKind),
    #[error("platform has no nucleus (not flagged contracting)")]
    NoNucleus,
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("invalid platform spec: {0}")]
    InvalidSpec(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not unimodular (|det| != 1)")]
    NonUnimodular,
    #[error("nucleus too large for the portrait format ({0} elements)")]
    NucleusTooLarge(usize),
    #[error("inconsistent nucleus: {0}")]
    InconsistentNucleus(String),
}

/// Byte-level parse failures; one variant per malformation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("truncated input")]
    Truncated,
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported format version {0}")]
    BadVersion(u8),
    #[error("header does not match platform: {0}")]
    HeaderMismatch(&'static str),
    #[error("unknown node tag 0x{0:02x}")]
    BadTag(u8),
    #[error("leaf id {0} outside the nucleus")]
    BadLeafId(u8),
    #[error("node permutation is not a bijection")]
    NonBijective,
    #[error("portrait is not in canonical form")]
    NonCanonical,
    #[error("portrait nesting exceeds {0} levels")]
    TooDeep(usize),
    #[error("bad sign byte 0x{0:02x}")]
    BadSign(u8),
    #[error("non-canonical integer encoding")]
    NonCanonicalInteger,
    #[error("decoded matrix is not unimodular")]
    NonUnimodular,
    #[error("trailing bytes after value")]
    TrailingBytes,
    #[error("invalid field: {0}")]
    Invalid(String),
}

/// Failures of key generation and key derivation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("{side} generator #{index} is the identity")]
    IdentityGenerator { side: &'static str, index: usize },
    #[error("{0} generator list is empty")]
    NoGenerators(&'static str),
    #[error("private word must have at least one letter")]
    EmptyPrivateWord,
    #[error("private word longer than the maximum {0}")]
    PrivateWordTooLong(usize),
    #[error("generator index {index} out of range for {count} generators")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("private word cancels at position {0}")]
    AdjacentCancellation(usize),
    #[error("tuple has {found} entries, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("expected a transmission from the other side")]
    SideMismatch,
    #[error("elements do not belong to this platform")]
    ForeignElement,
}

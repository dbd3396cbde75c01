//! One interface over every platform: canonical elements, their products and
//! their byte encodings.

use std::fmt;
use std::sync::Arc;

use crate::automaton::Letter;
use crate::error::{DecodeError, GroupError};
use crate::group::{AutomatonGroup, ContractionBudget};
use crate::platforms::{self, AffineElement, AffineGroup, GOmegaSpec};
use crate::portrait::Portrait;
use crate::rng::SplitMix64;
use crate::SignedIndex;

/// Everything needed to rebuild a platform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlatformSpec {
    Grigorchuk,
    GOmega(GOmegaSpec),
    Basilica,
    Universal,
    Hanoi(u8),
    Affine(Vec<AffineElement>),
}

pub const DEFAULT_G_OMEGA: &str = "01";

impl PlatformSpec {
    pub fn id(&self) -> u8 {
        match self {
            PlatformSpec::Grigorchuk => platforms::GRIGORCHUK_ID,
            PlatformSpec::GOmega(_) => platforms::G_OMEGA_ID,
            PlatformSpec::Basilica => platforms::BASILICA_ID,
            PlatformSpec::Universal => platforms::UNIVERSAL_ID,
            PlatformSpec::Hanoi(_) => platforms::HANOI_ID,
            PlatformSpec::Affine(_) => platforms::AFFINE_ID,
        }
    }

    /// Parses a platform name: `grigorchuk`, `gomega[:<ω>]`, `basilica`,
    /// `universal`, `hanoi[:<pegs>]` or `affine` (the Sanov pair).
    pub fn parse(name: &str) -> Result<Self, GroupError> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let no_arg = |spec: PlatformSpec| match arg {
            None => Ok(spec),
            Some(_) => Err(GroupError::InvalidSpec(format!("`{head}` takes no argument"))),
        };
        match head.trim().to_ascii_lowercase().as_str() {
            "grigorchuk" => no_arg(PlatformSpec::Grigorchuk),
            "gomega" | "g_omega" => Ok(PlatformSpec::GOmega(GOmegaSpec::parse(arg.unwrap_or(DEFAULT_G_OMEGA))?)),
            "basilica" => no_arg(PlatformSpec::Basilica),
            "universal" => no_arg(PlatformSpec::Universal),
            "hanoi" => {
                let k = match arg {
                    Some(a) => a.trim().parse().map_err(|_| GroupError::InvalidSpec(format!("bad peg count `{a}`")))?,
                    None => 3,
                };
                Ok(PlatformSpec::Hanoi(k))
            }
            "affine" => no_arg(PlatformSpec::Affine(AffineGroup::sanov().generators().to_vec())),
            _ => Err(GroupError::UnknownPlatform(name.to_string())),
        }
    }

    /// Platform-specific bytes distinguishing members of one family.
    pub fn descriptor(&self) -> Vec<u8> {
        match self {
            PlatformSpec::Grigorchuk | PlatformSpec::Basilica | PlatformSpec::Universal => Vec::new(),
            PlatformSpec::GOmega(s) => {
                let mut out = vec![s.preperiod().len() as u8];
                out.extend_from_slice(s.preperiod());
                out.push(s.period().len() as u8);
                out.extend_from_slice(s.period());
                out
            }
            PlatformSpec::Hanoi(k) => vec![*k],
            PlatformSpec::Affine(gens) => {
                let mut out = vec![gens.len() as u8];
                for g in gens {
                    out.extend_from_slice(&g.to_bytes());
                }
                out
            }
        }
    }

    pub fn from_descriptor(id: u8, bytes: &[u8]) -> Result<Self, DecodeError> {
        let invalid = |e: GroupError| DecodeError::Invalid(e.to_string());
        let spec = match id {
            platforms::GRIGORCHUK_ID => PlatformSpec::Grigorchuk,
            platforms::BASILICA_ID => PlatformSpec::Basilica,
            platforms::UNIVERSAL_ID => PlatformSpec::Universal,
            platforms::G_OMEGA_ID => {
                let pre_len = *bytes.first().ok_or(DecodeError::Truncated)? as usize;
                let pre = bytes.get(1..1 + pre_len).ok_or(DecodeError::Truncated)?;
                let per_len = *bytes.get(1 + pre_len).ok_or(DecodeError::Truncated)? as usize;
                let per = bytes.get(2 + pre_len..2 + pre_len + per_len).ok_or(DecodeError::Truncated)?;
                if bytes.len() != 2 + pre_len + per_len {
                    return Err(DecodeError::TrailingBytes);
                }
                PlatformSpec::GOmega(GOmegaSpec::new(pre.to_vec(), per.to_vec()).map_err(invalid)?)
            }
            platforms::HANOI_ID => match bytes {
                [k] => PlatformSpec::Hanoi(*k),
                [] => return Err(DecodeError::Truncated),
                _ => return Err(DecodeError::TrailingBytes),
            },
            platforms::AFFINE_ID => {
                let count = *bytes.first().ok_or(DecodeError::Truncated)? as usize;
                let mut pos = 1;
                let mut gens = Vec::with_capacity(count);
                for _ in 0..count {
                    let (g, used) = AffineElement::decode(&bytes[pos..])?;
                    pos += used;
                    gens.push(g);
                }
                if pos != bytes.len() {
                    return Err(DecodeError::TrailingBytes);
                }
                PlatformSpec::Affine(gens)
            }
            other => return Err(DecodeError::Invalid(format!("unknown platform id 0x{other:02x}"))),
        };
        Ok(spec)
    }
}

impl fmt::Display for PlatformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlatformSpec::Grigorchuk => write!(f, "grigorchuk"),
            PlatformSpec::GOmega(s) => write!(f, "gomega:{s}"),
            PlatformSpec::Basilica => write!(f, "basilica"),
            PlatformSpec::Universal => write!(f, "universal"),
            PlatformSpec::Hanoi(k) => write!(f, "hanoi:{k}"),
            PlatformSpec::Affine(g) => write!(f, "affine(dim {}, {} generators)", g.first().map_or(0, |e| e.dimension()), g.len()),
        }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Automaton(Arc<AutomatonGroup>),
    Affine(Arc<AffineGroup>),
}

/// A constructed platform. Cheap to clone and safe to share across threads.
#[derive(Clone, Debug)]
pub struct Platform {
    spec: PlatformSpec,
    kind: Kind,
    budget: ContractionBudget,
}

/// A canonical group element: a canonical portrait on automaton platforms, an
/// exact affine map on affine ones. Equal elements compare equal.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Element {
    Portrait(Portrait),
    Affine(AffineElement),
}

impl Platform {
    pub fn build(spec: PlatformSpec, budget: ContractionBudget) -> Result<Self, GroupError> {
        let kind = match &spec {
            PlatformSpec::Grigorchuk => Kind::Automaton(Arc::new(platforms::grigorchuk(budget)?)),
            PlatformSpec::GOmega(s) => Kind::Automaton(Arc::new(platforms::g_omega(s, budget)?)),
            PlatformSpec::Basilica => Kind::Automaton(Arc::new(platforms::basilica(budget)?)),
            PlatformSpec::Universal => Kind::Automaton(Arc::new(platforms::universal(budget)?)),
            PlatformSpec::Hanoi(k) => Kind::Automaton(Arc::new(platforms::hanoi(*k, budget)?)),
            PlatformSpec::Affine(gens) => Kind::Affine(Arc::new(AffineGroup::new(gens.clone())?)),
        };
        Ok(Platform { spec, kind, budget })
    }

    pub fn by_name(name: &str, budget: ContractionBudget) -> Result<Self, GroupError> {
        Self::build(PlatformSpec::parse(name)?, budget)
    }

    pub fn spec(&self) -> &PlatformSpec {
        &self.spec
    }

    pub fn id(&self) -> u8 {
        self.spec.id()
    }

    pub fn name(&self) -> String {
        self.spec.to_string()
    }

    pub fn budget(&self) -> ContractionBudget {
        self.budget
    }

    pub fn automaton_group(&self) -> Option<&AutomatonGroup> {
        match &self.kind {
            Kind::Automaton(g) => Some(g),
            Kind::Affine(_) => None,
        }
    }

    pub fn affine_group(&self) -> Option<&AffineGroup> {
        match &self.kind {
            Kind::Affine(g) => Some(g),
            Kind::Automaton(_) => None,
        }
    }

    pub fn is_contracting(&self) -> bool {
        self.automaton_group().is_some_and(|g| g.is_contracting())
    }

    /// Whether elements have a canonical form here (automaton platforms need a
    /// nucleus).
    pub fn supports_elements(&self) -> bool {
        match &self.kind {
            Kind::Automaton(g) => g.has_nucleus(),
            Kind::Affine(_) => true,
        }
    }

    pub fn generator_count(&self) -> usize {
        match &self.kind {
            Kind::Automaton(g) => g.generators().len(),
            Kind::Affine(g) => g.generators().len(),
        }
    }

    pub fn generator_names(&self) -> Vec<String> {
        match &self.kind {
            Kind::Automaton(g) => g.generators().iter().map(|&s| g.automaton().name(s).to_string()).collect(),
            Kind::Affine(g) => (1..=g.generators().len()).map(|i| format!("g{i}")).collect(),
        }
    }

    fn gen_letter(g: &AutomatonGroup, x: SignedIndex) -> Result<Letter, GroupError> {
        let s = *g
            .generators()
            .get(x.index as usize)
            .ok_or_else(|| GroupError::UnknownGenerator(format!("#{}", x.index)))?;
        Ok(Letter::new(s, x.inverse))
    }

    /// Canonical element spelled by a word over the platform generators.
    pub fn evaluate(&self, word: &[SignedIndex]) -> Result<Element, GroupError> {
        match &self.kind {
            Kind::Automaton(g) => {
                let letters = word.iter().map(|&x| Self::gen_letter(g, x)).collect::<Result<Vec<_>, _>>()?;
                Ok(Element::Portrait(g.canonical_portrait_letters(&letters, self.budget)?))
            }
            Kind::Affine(g) => Ok(Element::Affine(g.evaluate(word)?)),
        }
    }

    pub fn generator(&self, index: usize, inverse: bool) -> Result<Element, GroupError> {
        self.evaluate(&[SignedIndex::new(index as u16, inverse)])
    }

    pub fn identity(&self) -> Result<Element, GroupError> {
        match &self.kind {
            Kind::Automaton(g) => Ok(Element::Portrait(g.identity_portrait()?)),
            Kind::Affine(g) => Ok(Element::Affine(AffineElement::identity(g.dimension()))),
        }
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element, GroupError> {
        match (&self.kind, x, y) {
            (Kind::Automaton(g), Element::Portrait(p), Element::Portrait(q)) => {
                Ok(Element::Portrait(g.portrait_multiply(p, q, self.budget)?))
            }
            (Kind::Affine(_), Element::Affine(p), Element::Affine(q)) => Ok(Element::Affine(p.compose(q)?)),
            _ => Err(self.kind_mismatch()),
        }
    }

    pub fn invert(&self, x: &Element) -> Result<Element, GroupError> {
        match (&self.kind, x) {
            (Kind::Automaton(g), Element::Portrait(p)) => Ok(Element::Portrait(g.portrait_invert(p)?)),
            (Kind::Affine(_), Element::Affine(p)) => Ok(Element::Affine(p.invert())),
            _ => Err(self.kind_mismatch()),
        }
    }

    /// `x⁻¹ · y · x`
    pub fn conjugate(&self, y: &Element, x: &Element) -> Result<Element, GroupError> {
        let xi = self.invert(x)?;
        self.multiply(&self.multiply(&xi, y)?, x)
    }

    pub fn is_identity(&self, x: &Element) -> bool {
        match x {
            Element::Portrait(p) => p.is_identity(),
            Element::Affine(a) => a.is_identity(),
        }
    }

    fn kind_mismatch(&self) -> GroupError {
        GroupError::PlatformMismatch { expected: self.id(), found: 0 }
    }

    pub fn encode(&self, x: &Element) -> Vec<u8> {
        match x {
            Element::Portrait(p) => p.to_bytes(),
            Element::Affine(a) => a.to_bytes(),
        }
    }

    /// Decodes one element from the front of `bytes`, returning it and the
    /// number of bytes consumed.
    pub fn decode(&self, bytes: &[u8]) -> Result<(Element, usize), DecodeError> {
        match &self.kind {
            Kind::Automaton(g) => g.decode_portrait(bytes).map(|(p, n)| (Element::Portrait(p), n)),
            Kind::Affine(g) => {
                let (a, n) = AffineElement::decode(bytes)?;
                if a.dimension() != g.dimension() {
                    return Err(DecodeError::HeaderMismatch("affine dimension"));
                }
                Ok((Element::Affine(a), n))
            }
        }
    }

    /// A uniformly drawn reduced word of exactly `len` letters over the
    /// platform generators.
    pub fn random_word(&self, len: usize, rng: &mut SplitMix64) -> Vec<SignedIndex> {
        let count = self.generator_count() as u64;
        match &self.kind {
            Kind::Automaton(g) => {
                let rw = g.rewriting();
                let letters: Vec<(u64, Letter)> = (0..count)
                    .flat_map(|i| {
                        let s = g.generators()[i as usize];
                        let mut v = vec![(i, Letter::new(s, false))];
                        if !rw.is_involution(s) {
                            v.push((i, Letter::new(s, true)));
                        }
                        v
                    })
                    .collect();
                let mut word: Vec<Letter> = Vec::new();
                let mut guard = 0usize;
                while word.len() < len && guard < 1000 * (len + 1) {
                    let (_, l) = letters[rng.below(letters.len() as u64) as usize];
                    rw.push(&mut word, l);
                    guard += 1;
                }
                word.iter()
                    .map(|l| {
                        let idx = g.generators().iter().position(|&s| s == l.state()).expect("generator closed under rewriting");
                        SignedIndex::new(idx as u16, l.is_inverse())
                    })
                    .collect()
            }
            Kind::Affine(_) => {
                let mut word: Vec<SignedIndex> = Vec::with_capacity(len);
                while word.len() < len {
                    let r = rng.below(2 * count);
                    let x = SignedIndex::new((r / 2) as u16, r % 2 == 1);
                    if word.last() == Some(&x.inverse()) {
                        continue;
                    }
                    word.push(x);
                }
                word
            }
        }
    }

    pub fn format_word(&self, word: &[SignedIndex]) -> String {
        let names = self.generator_names();
        if word.is_empty() {
            return "ε".into();
        }
        word.iter()
            .map(|x| {
                let n = names.get(x.index as usize).cloned().unwrap_or_else(|| format!("#{}", x.index));
                if x.inverse {
                    format!("{n}⁻¹")
                } else {
                    n
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses a word over the public generators, e.g. `"a b c"` or
    /// `"g1 g2^-1"`. Automaton names are matched greedily.
    pub fn parse_generator_word(&self, text: &str) -> Result<Vec<SignedIndex>, GroupError> {
        let names = self.generator_names();
        let mut out = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let c = rest.chars().next().unwrap();
            if c.is_whitespace() || matches!(c, '*' | '·' | ',' | '.') {
                rest = &rest[c.len_utf8()..];
                continue;
            }
            let best = names
                .iter()
                .enumerate()
                .filter(|(_, n)| rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            let Some((i, name)) = best else {
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
            out.push(SignedIndex::new(i as u16, inverse));
        }
        Ok(out)
    }
}

//! Canonical portraits: finite decorated trees with a permutation at each
//! internal vertex and a nucleus element at each leaf, expanded exactly until
//! every section first enters the nucleus.
//!
//! Byte layout: `'A' 'G' 0x01 <platform> <k> <nucleus size>` followed by the
//! preorder node stream. An internal node is `0x00`, then the `k` images of
//! its permutation, then its `k` children in letter order. A leaf is `0x01`
//! followed by its nucleus id.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::automaton::Letter;
use crate::error::{BudgetKind, DecodeError, GroupError};
use crate::group::{AutomatonGroup, ContractionBudget, GeneratorWord};
use crate::nucleus::Nucleus;
use crate::perm::Perm;

pub const PORTRAIT_MAGIC: [u8; 2] = *b"AG";
pub const PORTRAIT_VERSION: u8 = 0x01;
const TAG_INTERNAL: u8 = 0x00;
const TAG_LEAF: u8 = 0x01;
/// Nesting limit applied while decoding untrusted bytes.
pub const MAX_DECODE_DEPTH: usize = 512;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Leaf(u8),
    Branch(Arc<Branch>),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Branch {
    pub perm: Perm,
    pub children: Vec<Node>,
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Leaf(id) => write!(f, "#{id}"),
            Node::Branch(b) => {
                write!(f, "{}[", b.perm)?;
                for (i, c) in b.children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c:?}")?;
                }
                write!(f, "]")
            }
        }
    }
}

impl Node {
    fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Branch(b) => 1 + b.children.iter().map(Node::depth).max().unwrap_or(0),
        }
    }

    fn count(&self) -> (usize, usize) {
        match self {
            Node::Leaf(_) => (0, 1),
            Node::Branch(b) => b.children.iter().fold((1, 0), |(i, l), c| {
                let (ci, cl) = c.count();
                (i + ci, l + cl)
            }),
        }
    }
}

/// A portrait of an element of an automaton platform.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Portrait {
    platform: u8,
    k: u8,
    nucleus_size: u8,
    root: Node,
}

impl Portrait {
    pub fn platform(&self) -> u8 {
        self.platform
    }

    pub fn nucleus_size(&self) -> u8 {
        self.nucleus_size
    }

    pub fn alphabet_size(&self) -> u8 {
        self.k
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// `(internal nodes, leaves)`
    pub fn node_counts(&self) -> (usize, usize) {
        self.root.count()
    }

    pub fn is_identity(&self) -> bool {
        self.root == Node::Leaf(0)
    }

    pub fn root_perm(&self, nucleus: &Nucleus) -> Perm {
        match &self.root {
            Node::Leaf(id) => nucleus.perm(*id).clone(),
            Node::Branch(b) => b.perm.clone(),
        }
    }

    /// Image of a string, reading permutations off the tree and finishing with
    /// the nucleus tables below the leaves.
    pub fn apply(&self, nucleus: &Nucleus, s: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(s.len());
        let mut node = &self.root;
        let mut i = 0;
        while i < s.len() {
            match node {
                Node::Branch(b) => {
                    out.push(b.perm.apply(s[i]));
                    node = &b.children[s[i] as usize];
                    i += 1;
                }
                Node::Leaf(id) => {
                    let mut id = *id;
                    for &x in &s[i..] {
                        out.push(nucleus.perm(id).apply(x));
                        id = nucleus.section(id, x);
                    }
                    break;
                }
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![
            PORTRAIT_MAGIC[0],
            PORTRAIT_MAGIC[1],
            PORTRAIT_VERSION,
            self.platform,
            self.k,
            self.nucleus_size,
        ];
        write_node(&self.root, &mut out);
        out
    }
}

fn write_node(node: &Node, out: &mut Vec<u8>) {
    match node {
        Node::Leaf(id) => {
            out.push(TAG_LEAF);
            out.push(*id);
        }
        Node::Branch(b) => {
            out.push(TAG_INTERNAL);
            out.extend_from_slice(b.perm.images());
            for c in &b.children {
                write_node(c, out);
            }
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn byte(&mut self) -> Result<u8, DecodeError> {
        let b = *self.bytes.get(self.pos).ok_or(DecodeError::Truncated)?;
        self.pos += 1;
        Ok(b)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        let end = self.pos.checked_add(n).ok_or(DecodeError::Truncated)?;
        let s = self.bytes.get(self.pos..end).ok_or(DecodeError::Truncated)?;
        self.pos = end;
        Ok(s)
    }
}

fn read_node(r: &mut Reader<'_>, nucleus: &Nucleus, k: u8, nucleus_size: u8, depth: usize) -> Result<Node, DecodeError> {
    if depth > MAX_DECODE_DEPTH {
        return Err(DecodeError::TooDeep(MAX_DECODE_DEPTH));
    }
    match r.byte()? {
        TAG_LEAF => {
            let id = r.byte()?;
            if id >= nucleus_size {
                return Err(DecodeError::BadLeafId(id));
            }
            Ok(Node::Leaf(id))
        }
        TAG_INTERNAL => {
            let perm = Perm::from_images(r.take(k as usize)?).ok_or(DecodeError::NonBijective)?;
            let mut children = Vec::with_capacity(k as usize);
            for _ in 0..k {
                children.push(read_node(r, nucleus, k, nucleus_size, depth + 1)?);
            }
            // A branch spelling a nucleus element must have been a leaf.
            let ids: Option<Vec<u8>> = children
                .iter()
                .map(|c| match c {
                    Node::Leaf(id) => Some(*id),
                    Node::Branch(_) => None,
                })
                .collect();
            if ids.is_some_and(|ids| nucleus.by_action(&perm, &ids).is_some()) {
                return Err(DecodeError::NonCanonical);
            }
            Ok(Node::Branch(Arc::new(Branch { perm, children })))
        }
        t => Err(DecodeError::BadTag(t)),
    }
}

impl AutomatonGroup {
    fn portrait_of(&self, root: Node) -> Result<Portrait, GroupError> {
        Ok(Portrait {
            platform: self.id(),
            k: self.alphabet_size(),
            nucleus_size: self.nucleus()?.len() as u8,
            root,
        })
    }

    pub fn identity_portrait(&self) -> Result<Portrait, GroupError> {
        self.portrait_of(Node::Leaf(0))
    }

    /// The portrait of `w`, each branch expanded until its section is a
    /// nucleus element. Equal elements give identical portraits.
    pub fn canonical_portrait(&self, w: &GeneratorWord, budget: ContractionBudget) -> Result<Portrait, GroupError> {
        if w.platform() != self.id() {
            return Err(GroupError::PlatformMismatch { expected: self.id(), found: w.platform() });
        }
        self.canonical_portrait_letters(w.letters(), budget)
    }

    pub(crate) fn canonical_portrait_letters(&self, letters: &[Letter], budget: ContractionBudget) -> Result<Portrait, GroupError> {
        let nucleus = self.nucleus()?;
        let mut canon = Canonicalizer {
            group: self,
            nucleus,
            budget,
            memo: HashMap::new(),
            stack: HashSet::new(),
        };
        let root = canon.node(self.reduce(letters.iter().copied()), 0)?;
        self.portrait_of(root)
    }

    pub fn portrait_multiply(&self, p1: &Portrait, p2: &Portrait, budget: ContractionBudget) -> Result<Portrait, GroupError> {
        self.check_portrait(p1)?;
        self.check_portrait(p2)?;
        let nucleus = self.nucleus()?;
        let mut nodes = 0usize;
        let root = mul(nucleus, &p1.root, &p2.root, 0, budget, &mut nodes)?;
        self.portrait_of(root)
    }

    pub fn portrait_invert(&self, p: &Portrait) -> Result<Portrait, GroupError> {
        self.check_portrait(p)?;
        let nucleus = self.nucleus()?;
        self.portrait_of(inv(nucleus, &p.root))
    }

    fn check_portrait(&self, p: &Portrait) -> Result<(), GroupError> {
        if p.platform != self.id() {
            return Err(GroupError::PlatformMismatch { expected: self.id(), found: p.platform });
        }
        Ok(())
    }

    pub fn serialize_portrait(&self, p: &Portrait) -> Vec<u8> {
        p.to_bytes()
    }

    /// Decodes a portrait from the front of `bytes`, returning it and the
    /// number of bytes consumed.
    pub fn decode_portrait(&self, bytes: &[u8]) -> Result<(Portrait, usize), DecodeError> {
        let nucleus = self.nucleus().map_err(|_| DecodeError::HeaderMismatch("platform has no nucleus"))?;
        let nucleus_len = nucleus.len();
        let mut r = Reader { bytes, pos: 0 };
        if r.take(2)? != PORTRAIT_MAGIC {
            return Err(DecodeError::BadMagic);
        }
        let version = r.byte()?;
        if version != PORTRAIT_VERSION {
            return Err(DecodeError::BadVersion(version));
        }
        if r.byte()? != self.id() {
            return Err(DecodeError::HeaderMismatch("platform id"));
        }
        let k = r.byte()?;
        if k != self.alphabet_size() {
            return Err(DecodeError::HeaderMismatch("alphabet size"));
        }
        let nucleus_size = r.byte()?;
        if nucleus_size as usize != nucleus_len {
            return Err(DecodeError::HeaderMismatch("nucleus size"));
        }
        let root = read_node(&mut r, nucleus, k, nucleus_size, 0)?;
        Ok((Portrait { platform: self.id(), k, nucleus_size, root }, r.pos))
    }

    /// Decodes a portrait occupying all of `bytes`.
    pub fn deserialize_portrait(&self, bytes: &[u8]) -> Result<Portrait, DecodeError> {
        let (p, used) = self.decode_portrait(bytes)?;
        if used != bytes.len() {
            return Err(DecodeError::TrailingBytes);
        }
        Ok(p)
    }
}

struct Canonicalizer<'a> {
    group: &'a AutomatonGroup,
    nucleus: &'a Nucleus,
    budget: ContractionBudget,
    memo: HashMap<Vec<Letter>, Node>,
    stack: HashSet<Vec<Letter>>,
}

impl Canonicalizer<'_> {
    fn node(&mut self, w: Vec<Letter>, depth: usize) -> Result<Node, GroupError> {
        if let Some(id) = self.nucleus.lookup_word(&w) {
            return Ok(Node::Leaf(id));
        }
        if let Some(n) = self.memo.get(&w) {
            return Ok(n.clone());
        }
        if self.stack.contains(&w) {
            // w is its own section somewhere below, so it lies on a cycle and
            // must be a nucleus element under another spelling.
            return match self.nucleus.find_element(self.group, &w)? {
                Some(id) => Ok(Node::Leaf(id)),
                None => Err(GroupError::InconsistentNucleus("cycle outside the nucleus".into())),
            };
        }
        if depth >= self.budget.max_depth {
            return Err(GroupError::BudgetExhausted(BudgetKind::Depth));
        }
        self.stack.insert(w.clone());
        let perm = self.group.root_perm_letters(&w);
        let mut children = Vec::with_capacity(self.group.alphabet_size() as usize);
        for x in 0..self.group.alphabet_size() {
            let s = self.group.section_letters(&w, x);
            children.push(self.node(s, depth + 1)?);
        }
        self.stack.remove(&w);
        let node = collapse(self.nucleus, perm, children);
        if self.memo.len() >= self.budget.max_closure {
            return Err(GroupError::BudgetExhausted(BudgetKind::ClosureSize));
        }
        self.memo.insert(w, node.clone());
        Ok(node)
    }
}

/// Replaces a node whose children are all leaves by the matching nucleus
/// leaf, when there is one.
fn collapse(nucleus: &Nucleus, perm: Perm, children: Vec<Node>) -> Node {
    let ids: Option<Vec<u8>> = children
        .iter()
        .map(|c| match c {
            Node::Leaf(id) => Some(*id),
            Node::Branch(_) => None,
        })
        .collect();
    if let Some(ids) = ids {
        if let Some(id) = nucleus.by_action(&perm, &ids) {
            return Node::Leaf(id);
        }
    }
    Node::Branch(Arc::new(Branch { perm, children }))
}

fn expand(nucleus: &Nucleus, node: &Node) -> (Perm, Vec<Node>) {
    match node {
        Node::Leaf(id) => (
            nucleus.perm(*id).clone(),
            nucleus.sections_of(*id).iter().map(|&s| Node::Leaf(s)).collect(),
        ),
        Node::Branch(b) => (b.perm.clone(), b.children.clone()),
    }
}

/// `(gh)_x = g_{h(x)} · h_x`
fn mul(nucleus: &Nucleus, a: &Node, b: &Node, depth: usize, budget: ContractionBudget, nodes: &mut usize) -> Result<Node, GroupError> {
    match (a, b) {
        (Node::Leaf(0), _) => return Ok(b.clone()),
        (_, Node::Leaf(0)) => return Ok(a.clone()),
        (Node::Leaf(i), Node::Leaf(j)) => {
            if let Some(id) = nucleus.product(*i, *j) {
                return Ok(Node::Leaf(id));
            }
        }
        _ => {}
    }
    if depth >= budget.max_depth {
        return Err(GroupError::BudgetExhausted(BudgetKind::Depth));
    }
    *nodes += 1;
    if *nodes > budget.max_closure {
        return Err(GroupError::BudgetExhausted(BudgetKind::ClosureSize));
    }
    let (pa, ca) = expand(nucleus, a);
    let (pb, cb) = expand(nucleus, b);
    let perm = pa.compose(&pb);
    let mut children = Vec::with_capacity(cb.len());
    for (x, child_b) in cb.iter().enumerate() {
        children.push(mul(nucleus, &ca[pb.apply(x as u8) as usize], child_b, depth + 1, budget, nodes)?);
    }
    Ok(collapse(nucleus, perm, children))
}

/// `(g⁻¹)_x = (g_{g⁻¹(x)})⁻¹`
fn inv(nucleus: &Nucleus, node: &Node) -> Node {
    match node {
        Node::Leaf(id) => Node::Leaf(nucleus.inverse(*id)),
        Node::Branch(b) => {
            let pinv = b.perm.inverse();
            let children = (0..b.children.len())
                .map(|x| inv(nucleus, &b.children[pinv.apply(x as u8) as usize]))
                .collect();
            Node::Branch(Arc::new(Branch { perm: pinv, children }))
        }
    }
}

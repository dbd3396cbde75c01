//! The nucleus of a contracting automaton group: a finite, section-closed,
//! inverse-closed set of elements into which every section of every element
//! eventually falls.

use std::collections::{HashMap, HashSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::automaton::{Letter, StateId};
use crate::error::{BudgetKind, GroupError};
use crate::group::{AutomatonGroup, ContractionBudget};
use crate::perm::Perm;

/// Nucleus ids and the nucleus size are single bytes in the portrait format.
pub const MAX_NUCLEUS: usize = 255;

#[derive(Clone, Debug)]
pub struct Nucleus {
    words: Vec<Vec<Letter>>,
    perms: Vec<Perm>,
    /// `sections[id][x]`
    sections: Vec<Vec<u8>>,
    inverse: Vec<u8>,
    /// `products[i][j]`, when `n_i · n_j` is itself a nucleus element.
    products: Vec<Vec<Option<u8>>>,
    word_ids: HashMap<Vec<Letter>, u8>,
    by_action: HashMap<(Perm, Vec<u8>), u8>,
    budget: ContractionBudget,
}

/// Element set under construction, deduplicated by group equality.
struct Candidates<'a> {
    group: &'a AutomatonGroup,
    budget: ContractionBudget,
    words: Vec<Vec<Letter>>,
    perms: Vec<Perm>,
    exact: HashMap<Vec<Letter>, usize>,
}

impl<'a> Candidates<'a> {
    fn find(&mut self, w: &[Letter]) -> Result<Option<usize>, GroupError> {
        if let Some(&i) = self.exact.get(w) {
            return Ok(Some(i));
        }
        let perm = self.group.root_perm_letters(w);
        for i in 0..self.words.len() {
            if self.perms[i] != perm {
                continue;
            }
            if self.group.equal_letters(w, &self.words[i], self.budget)? {
                self.exact.insert(w.to_vec(), i);
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Returns `true` when `w` was a new element.
    fn add(&mut self, w: Vec<Letter>) -> Result<bool, GroupError> {
        if self.find(&w)?.is_some() {
            return Ok(false);
        }
        if self.words.len() >= MAX_NUCLEUS {
            return Err(GroupError::NucleusTooLarge(self.words.len() + 1));
        }
        self.perms.push(self.group.root_perm_letters(&w));
        self.exact.insert(w.clone(), self.words.len());
        self.words.push(w);
        Ok(true)
    }
}

impl Nucleus {
    /// Computes the nucleus by fixed-point iteration: start from the identity,
    /// every state and every inverse state; close under sections; then add
    /// every element lying on a cycle of the section graph of a product of two
    /// current elements. Stops when neither step adds anything.
    pub fn compute(group: &AutomatonGroup, budget: ContractionBudget) -> Result<Nucleus, GroupError> {
        let automaton = group.automaton();
        let k = group.alphabet_size();
        let mut cand = Candidates {
            group,
            budget,
            words: Vec::new(),
            perms: Vec::new(),
            exact: HashMap::new(),
        };
        cand.add(Vec::new())?;
        for s in 0..automaton.state_count() as StateId {
            for inverse in [false, true] {
                cand.add(group.reduce([Letter::new(s, inverse)]))?;
            }
        }

        let mut sectioned = 0usize;
        let mut paired = 0usize;
        loop {
            let mut grew = false;
            while sectioned < cand.words.len() {
                let w = cand.words[sectioned].clone();
                for x in 0..k {
                    grew |= cand.add(group.section_letters(&w, x))?;
                }
                sectioned += 1;
            }
            let n = cand.words.len();
            for i in 0..n {
                for j in 0..n {
                    if i < paired && j < paired {
                        continue;
                    }
                    let product = group.reduce(cand.words[i].iter().chain(&cand.words[j]).copied());
                    for w in cycle_words(group, product, budget)? {
                        grew |= cand.add(w)?;
                    }
                }
            }
            paired = n;
            if !grew && sectioned == cand.words.len() {
                break;
            }
        }
        Self::tabulate(group, cand, budget)
    }

    fn tabulate(group: &AutomatonGroup, mut cand: Candidates<'_>, budget: ContractionBudget) -> Result<Nucleus, GroupError> {
        let k = group.alphabet_size();
        let n = cand.words.len();
        let missing = |what: &str| GroupError::InconsistentNucleus(format!("{what} left the candidate set"));

        let mut sections = Vec::with_capacity(n);
        for i in 0..n {
            let w = cand.words[i].clone();
            let mut row = Vec::with_capacity(k as usize);
            for x in 0..k {
                let s = group.section_letters(&w, x);
                row.push(cand.find(&s)?.ok_or_else(|| missing("section"))? as u8);
            }
            sections.push(row);
        }
        let mut inverse = Vec::with_capacity(n);
        for i in 0..n {
            let w = group.invert_letters(&cand.words[i]);
            inverse.push(cand.find(&w)?.ok_or_else(|| missing("inverse"))? as u8);
        }
        let mut products = vec![vec![None; n]; n];
        for i in 0..n {
            for j in 0..n {
                let w = group.reduce(cand.words[i].iter().chain(&cand.words[j]).copied());
                products[i][j] = cand.find(&w)?.map(|id| id as u8);
            }
        }
        let mut by_action = HashMap::new();
        for i in 0..n {
            if by_action.insert((cand.perms[i].clone(), sections[i].clone()), i as u8).is_some() {
                return Err(GroupError::InconsistentNucleus("two elements share an action".into()));
            }
        }
        let word_ids = cand.exact.iter().map(|(w, &i)| (w.clone(), i as u8)).collect();
        Ok(Nucleus {
            words: cand.words,
            perms: cand.perms,
            sections,
            inverse,
            products,
            word_ids,
            by_action,
            budget,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// The identity is always id 0.
    pub fn identity(&self) -> u8 {
        0
    }

    pub fn word(&self, id: u8) -> &[Letter] {
        &self.words[id as usize]
    }

    pub fn perm(&self, id: u8) -> &Perm {
        &self.perms[id as usize]
    }

    pub fn section(&self, id: u8, x: u8) -> u8 {
        self.sections[id as usize][x as usize]
    }

    pub fn sections_of(&self, id: u8) -> &[u8] {
        &self.sections[id as usize]
    }

    pub fn inverse(&self, id: u8) -> u8 {
        self.inverse[id as usize]
    }

    pub fn product(&self, i: u8, j: u8) -> Option<u8> {
        self.products[i as usize][j as usize]
    }

    /// The element with this root permutation and these section ids, if any.
    pub fn by_action(&self, perm: &Perm, sections: &[u8]) -> Option<u8> {
        self.by_action.get(&(perm.clone(), sections.to_vec())).copied()
    }

    /// Fast path: the id of a word already known to spell a nucleus element.
    pub fn lookup_word(&self, w: &[Letter]) -> Option<u8> {
        self.word_ids.get(w).copied()
    }

    /// Full membership test: compares `w` with each representative sharing its
    /// root permutation.
    pub fn find_element(&self, group: &AutomatonGroup, w: &[Letter]) -> Result<Option<u8>, GroupError> {
        if let Some(id) = self.lookup_word(w) {
            return Ok(Some(id));
        }
        let perm = group.root_perm_letters(w);
        for (id, rep) in self.words.iter().enumerate() {
            if self.perms[id] == perm && group.equal_letters(w, rep, self.budget)? {
                return Ok(Some(id as u8));
            }
        }
        Ok(None)
    }
}

/// Words lying on a cycle of the section graph reachable from `start`.
fn cycle_words(group: &AutomatonGroup, start: Vec<Letter>, budget: ContractionBudget) -> Result<Vec<Vec<Letter>>, GroupError> {
    let mut graph: DiGraph<(), ()> = DiGraph::new();
    let mut index: HashMap<Vec<Letter>, NodeIndex> = HashMap::new();
    let mut words = Vec::new();
    let mut queue = VecDeque::new();
    let root = graph.add_node(());
    index.insert(start.clone(), root);
    words.push(start.clone());
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        let from = index[&u];
        for x in 0..group.alphabet_size() {
            let s = group.section_letters(&u, x);
            let to = match index.get(&s) {
                Some(&n) => n,
                None => {
                    if words.len() >= budget.max_closure {
                        return Err(GroupError::BudgetExhausted(BudgetKind::ClosureSize));
                    }
                    let n = graph.add_node(());
                    index.insert(s.clone(), n);
                    words.push(s.clone());
                    queue.push_back(s);
                    n
                }
            };
            graph.update_edge(from, to, ());
        }
    }
    let mut out = Vec::new();
    let mut on_cycle = HashSet::new();
    for scc in tarjan_scc(&graph) {
        let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
        if cyclic {
            on_cycle.extend(scc);
        }
    }
    for (i, w) in words.into_iter().enumerate() {
        if on_cycle.contains(&NodeIndex::new(i)) {
            out.push(w);
        }
    }
    Ok(out)
}

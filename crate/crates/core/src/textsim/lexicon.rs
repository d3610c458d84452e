//! Lexical knowledge base: synonym sets plus relation edges between sets.
//!
//! File format, one directive per line (`#` starts a comment):
//!
//! ```text
//! syn: graph multigraph network
//! hyp: structure graph
//! ```
//!
//! `syn:` declares a synonym set. `hyp: a b` links every set containing `a`
//! (the hypernym) to every set containing `b` (the hyponym). A word named in
//! a `hyp:` line but in no set gets a singleton set.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type SetId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationKind {
    Synonym,
    Hypernym,
    Hyponym,
}

impl RelationKind {
    /// Score contributed by a one-step relation of this kind.
    pub fn score(self) -> f64 {
        match self {
            RelationKind::Synonym => SYNONYM_SCORE,
            RelationKind::Hypernym | RelationKind::Hyponym => ONE_STEP_SCORE,
        }
    }

    fn inverse(self) -> Self {
        match self {
            RelationKind::Synonym => RelationKind::Synonym,
            RelationKind::Hypernym => RelationKind::Hyponym,
            RelationKind::Hyponym => RelationKind::Hypernym,
        }
    }
}

pub const SYNONYM_SCORE: f64 = 1.0;
pub const ONE_STEP_SCORE: f64 = 0.9;

#[derive(Debug, Clone, Default)]
pub struct LexicalKb {
    word_sets: HashMap<String, Vec<SetId>>,
    set_count: SetId,
    // (from, to) -> kind; every edge is stored together with its inverse
    edges: BTreeMap<(SetId, SetId), RelationKind>,
}

impl LexicalKb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut kb = LexicalKb::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Lexicon {
                source_name: source_name.to_string(),
                line: i + 1,
                message,
            };
            let (directive, rest) = line
                .split_once(':')
                .ok_or_else(|| err(format!("expected `syn:` or `hyp:`, found `{line}`")))?;
            let words: Vec<&str> = rest.split_whitespace().collect();
            match directive.trim() {
                "syn" => {
                    if words.is_empty() {
                        return Err(err("empty synonym set".into()));
                    }
                    kb.add_synonym_set(&words);
                }
                "hyp" => {
                    if words.len() != 2 {
                        return Err(err(format!(
                            "`hyp:` needs exactly two words, found {}",
                            words.len()
                        )));
                    }
                    kb.add_relation(words[0], words[1], RelationKind::Hypernym);
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        Ok(kb)
    }

    fn new_set(&mut self) -> SetId {
        let id = self.set_count;
        self.set_count += 1;
        id
    }

    fn attach(&mut self, word: &str, set: SetId) {
        let sets = self.word_sets.entry(word.to_lowercase()).or_default();
        if !sets.contains(&set) {
            sets.push(set);
            sets.sort_unstable();
        }
    }

    pub fn add_synonym_set<S: AsRef<str>>(&mut self, words: &[S]) -> SetId {
        let id = self.new_set();
        for w in words {
            self.attach(w.as_ref(), id);
        }
        id
    }

    fn sets_or_singleton(&mut self, word: &str) -> Vec<SetId> {
        let key = word.to_lowercase();
        match self.word_sets.get(&key) {
            Some(sets) => sets.clone(),
            None => {
                let id = self.new_set();
                self.attach(&key, id);
                vec![id]
            }
        }
    }

    /// Links every set of `from` to every set of `to` with `kind`, and the
    /// reverse direction with the inverse kind. An existing stronger relation
    /// between the same pair is kept.
    pub fn add_relation(&mut self, from: &str, to: &str, kind: RelationKind) {
        let a = self.sets_or_singleton(from);
        let b = self.sets_or_singleton(to);
        for &x in &a {
            for &y in &b {
                if x == y {
                    continue;
                }
                self.insert_edge(x, y, kind);
                self.insert_edge(y, x, kind.inverse());
            }
        }
    }

    fn insert_edge(&mut self, from: SetId, to: SetId, kind: RelationKind) {
        self.edges
            .entry((from, to))
            .and_modify(|k| {
                if kind.score() > k.score() {
                    *k = kind;
                }
            })
            .or_insert(kind);
    }

    pub fn sets_of(&self, word: &str) -> &[SetId] {
        self.word_sets.get(word).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn relation(&self, from: SetId, to: SetId) -> Option<RelationKind> {
        self.edges.get(&(from, to)).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (SetId, SetId, RelationKind)> + '_ {
        self.edges.iter().map(|(&(a, b), &k)| (a, b, k))
    }

    pub fn set_count(&self) -> usize {
        self.set_count as usize
    }

    /// Lexical relatedness of two words in `{0, 0.9, 1}`.
    pub fn lexical_score(&self, w1: &str, w2: &str) -> f64 {
        if w1 == w2 {
            return SYNONYM_SCORE;
        }
        self.score_sets(self.sets_of(w1), self.sets_of(w2))
    }

    pub(crate) fn score_sets(&self, a: &[SetId], b: &[SetId]) -> f64 {
        if a.is_empty() || b.is_empty() {
            return 0.0;
        }
        if a.iter().any(|x| b.binary_search(x).is_ok()) {
            return SYNONYM_SCORE;
        }
        let mut best = 0.0f64;
        for &x in a {
            for &y in b {
                if let Some(kind) = self.relation(x, y) {
                    best = best.max(kind.score());
                    if best >= SYNONYM_SCORE {
                        return best;
                    }
                }
            }
        }
        best
    }
}

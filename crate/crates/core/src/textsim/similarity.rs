//! Term and document similarity combining the latent term space with the
//! lexical knowledge base.
//!
//! A term pair scores the larger of its clamped LSA cosine and its lexical
//! score. A document pair is scored by greedy alignment in both directions:
//! every distinct token of one side takes its best-matching token on the other
//! side, the matches are averaged with IDF weights, and the two directional
//! averages are themselves averaged.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::textsim::lexicon::{LexicalKb, SetId, SYNONYM_SCORE};
use crate::textsim::lsa::LsaModel;
use crate::textsim::preprocess::TokenList;

/// A similarity value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub const ZERO: SimilarityScore = SimilarityScore(0.0);
    pub const ONE: SimilarityScore = SimilarityScore(1.0);

    /// Clamps `value` into `[0, 1]`; NaN maps to 0.
    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            SimilarityScore(0.0)
        } else {
            SimilarityScore(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Similarity of two words.
pub fn term_similarity(model: &LsaModel, kb: &LexicalKb, w1: &str, w2: &str) -> SimilarityScore {
    let a = PreparedTerm::new(model, kb, w1);
    let b = PreparedTerm::new(model, kb, w2);
    SimilarityScore::new(a.similarity(&b, model, kb))
}

/// Similarity of two token lists.
pub fn doc_similarity(
    model: &LsaModel,
    kb: &LexicalKb,
    a: &TokenList,
    b: &TokenList,
) -> SimilarityScore {
    let a = PreparedDoc::new(model, kb, a);
    let b = PreparedDoc::new(model, kb, b);
    a.similarity(&b, model, kb)
}

#[derive(Debug, Clone)]
struct PreparedTerm {
    word: String,
    vocab: Option<usize>,
    sets: Vec<SetId>,
    weight: f64,
}

impl PreparedTerm {
    fn new(model: &LsaModel, kb: &LexicalKb, word: &str) -> Self {
        PreparedTerm {
            word: word.to_string(),
            vocab: model.term_index(word),
            sets: kb.sets_of(word).to_vec(),
            weight: model.token_weight(word),
        }
    }

    fn similarity(&self, other: &PreparedTerm, model: &LsaModel, kb: &LexicalKb) -> f64 {
        if self.word == other.word {
            return SYNONYM_SCORE;
        }
        let lexical = kb.score_sets(&self.sets, &other.sets);
        if lexical >= SYNONYM_SCORE {
            return lexical;
        }
        let lsa = match (self.vocab, other.vocab) {
            (Some(i), Some(j)) => model.cosine_by_index(i, j).unwrap_or(0.0).max(0.0),
            _ => 0.0,
        };
        lsa.max(lexical)
    }
}

/// Distinct tokens of a document with their vocabulary, lexical, and weight
/// lookups resolved once, for repeated pairwise scoring.
#[derive(Debug, Clone)]
pub struct PreparedDoc {
    terms: Vec<PreparedTerm>,
}

impl PreparedDoc {
    pub fn new(model: &LsaModel, kb: &LexicalKb, tokens: &TokenList) -> Self {
        let distinct: BTreeSet<&str> = tokens.tokens().iter().map(String::as_str).collect();
        PreparedDoc {
            terms: distinct
                .into_iter()
                .map(|w| PreparedTerm::new(model, kb, w))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn directed(&self, other: &PreparedDoc, model: &LsaModel, kb: &LexicalKb) -> f64 {
        let mut weighted = 0.0;
        let mut total_weight = 0.0;
        let mut plain = 0.0;
        for t in &self.terms {
            let mut best = 0.0f64;
            for o in &other.terms {
                best = best.max(t.similarity(o, model, kb));
                if best >= 1.0 {
                    break;
                }
            }
            weighted += t.weight * best;
            total_weight += t.weight;
            plain += best;
        }
        if total_weight > 0.0 {
            weighted / total_weight
        } else {
            // every token has zero IDF: fall back to an unweighted mean
            plain / self.terms.len() as f64
        }
    }

    pub fn similarity(
        &self,
        other: &PreparedDoc,
        model: &LsaModel,
        kb: &LexicalKb,
    ) -> SimilarityScore {
        if self.is_empty() || other.is_empty() {
            return SimilarityScore::ZERO;
        }
        let forward = self.directed(other, model, kb);
        let backward = other.directed(self, model, kb);
        SimilarityScore::new((forward + backward) / 2.0)
    }
}

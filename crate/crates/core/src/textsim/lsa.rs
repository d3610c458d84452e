//! Latent semantic analysis over a syllabus corpus.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::textsim::preprocess::TokenList;
use crate::textsim::svd::{thin_svd, DenseMatrix};

/// Upper bound on the default LSA rank.
pub const DEFAULT_MAX_RANK: usize = 150;

/// TF-IDF weighted term-document matrix (`terms × documents`).
///
/// Term frequency is the raw count; IDF is `ln(N / df)`, so a term present in
/// every document is weighted zero.
#[derive(Debug, Clone)]
pub struct TermDocMatrix {
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
    pub weights: DenseMatrix,
}

impl TermDocMatrix {
    pub fn from_corpus(corpus: &[TokenList]) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::Corpus("corpus has no documents".into()));
        }
        let terms: Vec<String> = corpus
            .iter()
            .flat_map(|d| d.tokens().iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if terms.is_empty() {
            return Err(Error::Corpus("corpus vocabulary is empty".into()));
        }
        let index: HashMap<&str, usize> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();

        let n_docs = corpus.len();
        let mut counts = DenseMatrix::zeros(terms.len(), n_docs);
        let mut df = vec![0usize; terms.len()];
        for (d, doc) in corpus.iter().enumerate() {
            let mut tf: BTreeMap<usize, usize> = BTreeMap::new();
            for t in doc.tokens() {
                *tf.entry(index[t.as_str()]).or_default() += 1;
            }
            for (&t, &count) in &tf {
                counts.set(t, d, count as f64);
                df[t] += 1;
            }
        }

        let idf: Vec<f64> = df
            .iter()
            .map(|&d| (n_docs as f64 / d as f64).ln())
            .collect();
        let mut weights = counts;
        for (t, w) in idf.iter().enumerate() {
            for d in 0..n_docs {
                weights.set(t, d, weights.get(t, d) * w);
            }
        }
        Ok(TermDocMatrix {
            terms,
            idf,
            weights,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.weights.cols()
    }
}

/// Default rank for a corpus: `min(150, documents − 1, terms − 1)`, at least 1.
pub fn default_rank(n_docs: usize, n_terms: usize) -> usize {
    DEFAULT_MAX_RANK
        .min(n_docs.saturating_sub(1))
        .min(n_terms.saturating_sub(1))
        .max(1)
}

/// Rank-k latent term space.
///
/// Term vectors are the rows of `U_k · Σ_k`; document vectors are the rows of
/// `V_k`, so `term_vectors · doc_vectorsᵀ` is the rank-k approximation of the
/// weighted term-document matrix.
#[derive(Debug, Clone)]
pub struct LsaModel {
    vocabulary: HashMap<String, usize>,
    terms: Vec<String>,
    idf: Vec<f64>,
    term_vectors: DenseMatrix,
    term_norms: Vec<f64>,
    doc_vectors: DenseMatrix,
    singular_values: Vec<f64>,
    n_docs: usize,
}

impl LsaModel {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_index(&self, word: &str) -> Option<usize> {
        self.vocabulary.get(word).copied()
    }

    pub fn term_vector(&self, word: &str) -> Option<&[f64]> {
        self.term_index(word).map(|i| self.term_vectors.row(i))
    }

    pub fn idf(&self, word: &str) -> Option<f64> {
        self.term_index(word).map(|i| self.idf[i])
    }

    /// Weight given to a token in alignment: its IDF, or `ln N` (the IDF of a
    /// single-document term) for a word outside the vocabulary.
    pub fn token_weight(&self, word: &str) -> f64 {
        self.idf(word).unwrap_or_else(|| (self.n_docs as f64).ln())
    }

    /// Cosine between two vocabulary terms; `None` when either vector is zero.
    pub fn cosine_by_index(&self, a: usize, b: usize) -> Option<f64> {
        let (na, nb) = (self.term_norms[a], self.term_norms[b]);
        if na == 0.0 || nb == 0.0 {
            return None;
        }
        let dot: f64 = self
            .term_vectors
            .row(a)
            .iter()
            .zip(self.term_vectors.row(b))
            .map(|(x, y)| x * y)
            .sum();
        Some((dot / (na * nb)).clamp(-1.0, 1.0))
    }

    pub fn cosine(&self, w1: &str, w2: &str) -> Option<f64> {
        self.cosine_by_index(self.term_index(w1)?, self.term_index(w2)?)
    }

    pub fn doc_vectors(&self) -> &DenseMatrix {
        &self.doc_vectors
    }

    pub fn term_vectors(&self) -> &DenseMatrix {
        &self.term_vectors
    }

    /// The rank-k approximation of the weighted term-document matrix.
    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, n, k) = (self.terms.len(), self.n_docs, self.rank());
        let mut out = DenseMatrix::zeros(m, n);
        for t in 0..m {
            let tv = self.term_vectors.row(t);
            for d in 0..n {
                let dv = self.doc_vectors.row(d);
                out.set(t, d, (0..k).map(|j| tv[j] * dv[j]).sum());
            }
        }
        out
    }
}

/// Builds a rank-`rank` LSA model of `corpus`.
pub fn build_lsa(corpus: &[TokenList], rank: usize) -> Result<LsaModel> {
    let tdm = TermDocMatrix::from_corpus(corpus)?;
    build_lsa_from_matrix(tdm, rank)
}

pub fn build_lsa_from_matrix(tdm: TermDocMatrix, rank: usize) -> Result<LsaModel> {
    let max = tdm.terms.len().min(tdm.n_docs());
    if rank == 0 || rank > max {
        return Err(Error::Rank {
            requested: rank,
            max,
        });
    }
    let svd = thin_svd(&tdm.weights);
    let (m, n) = (tdm.terms.len(), tdm.n_docs());

    let mut term_vectors = DenseMatrix::zeros(m, rank);
    for t in 0..m {
        for j in 0..rank {
            term_vectors.set(t, j, svd.u.get(t, j) * svd.singular_values[j]);
        }
    }
    let mut doc_vectors = DenseMatrix::zeros(n, rank);
    for d in 0..n {
        for j in 0..rank {
            doc_vectors.set(d, j, svd.v.get(d, j));
        }
    }
    let term_norms = (0..m)
        .map(|t| {
            term_vectors
                .row(t)
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let vocabulary = tdm
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();

    Ok(LsaModel {
        vocabulary,
        terms: tdm.terms,
        idf: tdm.idf,
        term_vectors,
        term_norms,
        doc_vectors,
        singular_values: svd.singular_values[..rank].to_vec(),
        n_docs: n,
    })
}

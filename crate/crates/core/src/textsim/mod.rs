//! Semantic similarity between syllabus texts.
//!
//! Syllabi are tokenized ([`preprocess`]), embedded in a latent term space
//! trained on the catalog itself ([`lsa`]), and compared with a
//! knowledge-base-aware alignment score ([`similarity`]).

pub mod lexicon;
pub mod lsa;
pub mod preprocess;
pub mod similarity;
pub mod svd;

pub use lexicon::{LexicalKb, RelationKind};
pub use lsa::{build_lsa, default_rank, LsaModel, TermDocMatrix};
pub use preprocess::{preprocess, Preprocessor, TokenList, ENGLISH_STOPWORDS};
pub use similarity::{doc_similarity, term_similarity, PreparedDoc, SimilarityScore};

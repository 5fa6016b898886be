//! Pre-analysis views of a dataset: term frequencies with keyword coding,
//! demographic tabulations and the coauthor network.

mod demographics;
mod network;
mod terms;

pub use demographics::{demographics, Demographics, UNKNOWN};
pub use network::{coauthor_graph, AuthorNode, CoauthorEdge, CoauthorGraph};
pub use terms::{
    default_stopwords, outlier_terms, term_frequency, terms, CodingMap, TermFrequency, TermScope, ENGLISH_STOPWORDS,
};

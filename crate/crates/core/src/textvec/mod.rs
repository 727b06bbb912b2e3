//! Tokenization, tf-idf vectors, k-means and representative sampling.

mod kmeans;
mod sample;
mod tfidf;
mod tokenize;

pub use kmeans::{kmeans, Clustering, KMeansParams};
pub use sample::{representative_sample, representative_sample_with};
pub use tfidf::{tfidf_fit, TfidfModel, TfidfVector};
pub use tokenize::{tokenize, words, Token};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::tokenize::words;
use crate::corpus::{Corpus, Split};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Vocabulary and document frequencies fitted on one split.
///
/// Column indices follow the lexicographic order of the vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TfidfModel {
    pub vocabulary: BTreeMap<String, usize>,
    pub document_frequency: BTreeMap<String, usize>,
    pub documents: usize,
}

impl TfidfModel {
    pub fn fit<'a, I>(docs: I) -> Result<TfidfModel>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut documents = 0;
        for doc in docs {
            documents += 1;
            let unique: BTreeSet<String> = words(doc).into_iter().collect();
            for w in unique {
                *df.entry(w).or_default() += 1;
            }
        }
        if documents == 0 {
            return Err(Error::EmptyCorpus("cannot fit tf-idf on zero documents".into()));
        }
        let vocabulary = df.keys().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(TfidfModel {
            vocabulary,
            document_frequency: df,
            documents,
        })
    }

    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }

    /// Smoothed inverse document frequency: `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf<T: Scalar>(&self, term: &str) -> Option<T> {
        let df = *self.document_frequency.get(term)?;
        let n = T::from_usize_lossy(self.documents);
        let df = T::from_usize_lossy(df);
        Some(((T::one() + n) / (T::one() + df)).ln() + T::one())
    }

    /// Raw term counts times idf, L2-normalized. Out-of-vocabulary tokens
    /// are ignored; a document with no known tokens maps to the zero vector.
    pub fn transform<T: Scalar>(&self, text: &str) -> TfidfVector<T> {
        let mut counts: BTreeMap<usize, (usize, &str)> = BTreeMap::new();
        let toks = words(text);
        for w in &toks {
            if let Some((key, &col)) = self.vocabulary.get_key_value(w.as_str()) {
                counts.entry(col).or_insert((0, key.as_str())).0 += 1;
            }
        }
        let mut entries: Vec<(usize, T)> = counts
            .into_iter()
            .map(|(col, (tf, term))| {
                let idf: T = self.idf(term).expect("vocabulary term has df");
                (col, T::from_usize_lossy(tf) * idf)
            })
            .collect();
        let norm = entries.iter().map(|&(_, w)| w * w).sum::<T>().sqrt();
        if norm > T::zero() {
            for (_, w) in &mut entries {
                *w = *w / norm;
            }
        }
        TfidfVector { entries }
    }
}

pub fn tfidf_fit(corpus: &Corpus, split: Split) -> Result<TfidfModel> {
    let docs: Vec<&str> = corpus.split(split).map(|i| i.text.as_str()).collect();
    if docs.is_empty() {
        return Err(Error::EmptyCorpus(format!("split {split:?} has no instances")));
    }
    TfidfModel::fit(docs)
}

/// Sparse vector as `(column, weight)` pairs sorted by column.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TfidfVector<T> {
    pub entries: Vec<(usize, T)>,
}

impl<T: Scalar> TfidfVector<T> {
    pub fn from_dense(dense: &[T]) -> Self {
        TfidfVector {
            entries: dense
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(i, &w)| (i, w))
                .collect(),
        }
    }

    pub fn get(&self, col: usize) -> T {
        self.entries
            .binary_search_by_key(&col, |&(c, _)| c)
            .map_or(T::zero(), |pos| self.entries[pos].1)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_squared(&self) -> T {
        self.entries.iter().map(|&(_, w)| w * w).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    /// Adds this vector into a dense accumulator.
    pub fn add_to(&self, dense: &mut [T]) {
        for &(c, w) in &self.entries {
            dense[c] = dense[c] + w;
        }
    }

    /// Squared euclidean distance to a dense point, given that point's
    /// squared norm.
    pub fn distance_squared(&self, dense: &[T], dense_norm_sq: T) -> T {
        let mut d = dense_norm_sq;
        for &(c, w) in &self.entries {
            let x = dense[c];
            d = d + (w - x) * (w - x) - x * x;
        }
        d.max(T::zero())
    }

    pub fn to_dense(&self, dim: usize) -> Vec<T> {
        let mut out = vec![T::zero(); dim];
        self.add_to(&mut out);
        out
    }
}

use super::kmeans::{kmeans, KMeansParams};
use super::tfidf::{tfidf_fit, TfidfVector};
use crate::corpus::{Corpus, Split};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Picks `m` representative Train instances: fit tf-idf on the Train
/// split, run k-means with `k = m`, then take from each cluster the member
/// closest to its centroid (lowest id on ties). Ids come back in cluster
/// order.
pub fn representative_sample<T: Scalar>(corpus: &Corpus, m: usize, seed: u64) -> Result<Vec<String>> {
    representative_sample_with::<T>(corpus, KMeansParams::new(m, seed))
}

pub fn representative_sample_with<T: Scalar>(corpus: &Corpus, params: KMeansParams) -> Result<Vec<String>> {
    let m = params.k;
    let train: Vec<_> = corpus.split(Split::Train).collect();
    if m == 0 || m > train.len() {
        return Err(Error::InvalidM {
            m,
            available: train.len(),
        });
    }
    let model = tfidf_fit(corpus, Split::Train)?;
    let vectors: Vec<TfidfVector<T>> = train.iter().map(|i| model.transform(&i.text)).collect();
    let clustering = kmeans(&vectors, params)?;

    let mut picked = Vec::with_capacity(m);
    for (cluster, centroid) in clustering.centroids.iter().enumerate() {
        let norm: T = centroid.iter().map(|&x| x * x).sum();
        let mut best: Option<(T, &str)> = None;
        for idx in clustering.members(cluster) {
            let d = vectors[idx].distance_squared(centroid, norm);
            let id = train[idx].id.as_str();
            best = match best {
                Some((bd, bid)) if bd < d || (bd == d && bid <= id) => Some((bd, bid)),
                _ => Some((d, id)),
            };
        }
        let (_, id) = best.expect("clusters are never empty");
        picked.push(id.to_string());
    }
    Ok(picked)
}

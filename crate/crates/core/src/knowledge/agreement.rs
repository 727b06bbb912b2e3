//! Inter-rater agreement and taxonomy coverage.

use std::collections::BTreeMap;

use super::taxonomy::Taxonomy;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Items × raters grid of categorical judgments.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix<C> {
    rows: Vec<Vec<C>>,
}

impl<C: Ord + Clone> RatingMatrix<C> {
    pub fn new(rows: Vec<Vec<C>>) -> Result<Self> {
        let raters = rows.first().map_or(0, Vec::len);
        if rows.is_empty() {
            return Err(Error::InvalidMatrix("no items".into()));
        }
        if raters < 2 {
            return Err(Error::InvalidMatrix("need at least two raters".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != raters) {
            return Err(Error::InvalidMatrix(format!(
                "item {bad} has {} ratings, expected {raters}",
                rows[bad].len()
            )));
        }
        Ok(RatingMatrix { rows })
    }

    pub fn items(&self) -> usize {
        self.rows.len()
    }

    pub fn raters(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<C>] {
        &self.rows
    }
}

/// Fleiss' kappa, `(P̄ − P̄e) / (1 − P̄e)`.
///
/// When every rating falls in one category `P̄e = 1`; that case is
/// reported as perfect agreement (1.0).
pub fn fleiss_kappa<T: Scalar, C: Ord + Clone>(m: &RatingMatrix<C>) -> T {
    let n = m.raters();
    let items = m.items();
    let mut totals: BTreeMap<&C, usize> = BTreeMap::new();
    let mut agreement_sum = T::zero();

    for row in m.rows() {
        let mut counts: BTreeMap<&C, usize> = BTreeMap::new();
        for c in row {
            *counts.entry(c).or_default() += 1;
        }
        let pairs: usize = counts.values().map(|&k| k * (k - 1)).sum();
        agreement_sum = agreement_sum + T::from_usize_lossy(pairs) / T::from_usize_lossy(n * (n - 1));
        for (c, k) in counts {
            *totals.entry(c).or_default() += k;
        }
    }

    let p_bar = agreement_sum / T::from_usize_lossy(items);
    let all = T::from_usize_lossy(items * n);
    let p_e: T = totals
        .values()
        .map(|&k| {
            let p = T::from_usize_lossy(k) / all;
            p * p
        })
        .sum();

    if totals.len() == 1 || p_e >= T::one() {
        return T::one();
    }
    (p_bar - p_e) / (T::one() - p_e)
}

/// Fraction of instances a judge could place under some topic of `t`.
/// `None` means the judge found no fitting topic.
pub fn taxonomy_coverage<T: Scalar, S: AsRef<str>>(t: &Taxonomy, assignments: &[Option<S>]) -> Result<T> {
    if assignments.is_empty() {
        return Err(Error::InvalidArgument("no instances to assess coverage on".into()));
    }
    let mut covered = 0usize;
    for a in assignments.iter().flatten() {
        let name = a.as_ref();
        if t.topic(name).is_none() {
            return Err(Error::InvalidAssignment(name.to_string()));
        }
        covered += 1;
    }
    Ok(T::from_usize_lossy(covered) / T::from_usize_lossy(assignments.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_agreement() {
        let m = RatingMatrix::new(vec![vec!["a", "a", "a"], vec!["b", "b", "b"]]).unwrap();
        assert_eq!(fleiss_kappa::<f64, _>(&m), 1.0);
    }

    #[test]
    fn single_category_guard() {
        let m = RatingMatrix::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(fleiss_kappa::<f64, _>(&m), 1.0);
    }

    #[test]
    fn three_by_two_by_hand() {
        // P_i = 1, 1, 0 → P̄ = 2/3; p_A = p_B = 1/2 → P̄e = 1/2; κ = 1/3
        let m = RatingMatrix::new(vec![vec!["A", "A"], vec!["B", "B"], vec!["A", "B"]]).unwrap();
        assert!((fleiss_kappa::<f64, _>(&m) - 1.0 / 3.0).abs() < 1e-12);
        assert!((fleiss_kappa::<f32, _>(&m) - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn matrix_shape_errors() {
        assert!(RatingMatrix::<u8>::new(vec![]).is_err());
        assert!(RatingMatrix::new(vec![vec![1]]).is_err());
        assert!(RatingMatrix::new(vec![vec![1, 2], vec![1]]).is_err());
    }

    fn food_taxonomy() -> Taxonomy {
        Taxonomy::new("e1")
            .with_topic("food", ["tasty"])
            .with_topic("service", ["kind"])
    }

    #[test]
    fn coverage_fractions() {
        let t = food_taxonomy();
        let mut a: Vec<Option<&str>> = vec![Some("food"); 25];
        a.extend(vec![None; 11]);
        let c: f64 = taxonomy_coverage(&t, &a).unwrap();
        assert!((c - 0.6944).abs() < 1e-4);
        assert_eq!(taxonomy_coverage::<f64, _>(&t, &[Some("food"), Some("Service")]).unwrap(), 1.0);
        assert_eq!(taxonomy_coverage::<f64, &str>(&t, &[None, None]).unwrap(), 0.0);
        assert!(matches!(
            taxonomy_coverage::<f64, _>(&t, &[Some("price")]),
            Err(Error::InvalidAssignment(_))
        ));
    }

    proptest! {
        #[test]
        fn kappa_invariant_under_relabel_and_permutation(
            rows in proptest::collection::vec(proptest::collection::vec(0u8..4, 3), 1..12),
            shift in 1u8..4,
            rot in 0usize..12,
        ) {
            let m = RatingMatrix::new(rows.clone()).unwrap();
            let k: f64 = fleiss_kappa(&m);
            prop_assert!((-1.0..=1.0).contains(&k));

            let relabeled: Vec<Vec<u8>> = rows.iter().map(|r| r.iter().map(|c| (c + shift) % 4 + 10).collect()).collect();
            let k2: f64 = fleiss_kappa(&RatingMatrix::new(relabeled).unwrap());
            prop_assert!((k - k2).abs() < 1e-12);

            let mut permuted = rows.clone();
            let len = permuted.len();
            permuted.rotate_left(rot % len);
            let k3: f64 = fleiss_kappa(&RatingMatrix::new(permuted).unwrap());
            prop_assert!((k - k3).abs() < 1e-12);
        }
    }
}

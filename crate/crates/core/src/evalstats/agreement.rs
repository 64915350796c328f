//! Multi-rater kappa.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Per-item category counts: `counts[i][j]` raters put item `i` in category `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingMatrix {
    counts: Vec<Vec<usize>>,
    raters: usize,
}

impl RatingMatrix {
    pub fn from_counts(counts: Vec<Vec<usize>>) -> Result<Self> {
        let first = counts
            .first()
            .ok_or_else(|| Error::domain("rating matrix has no items"))?;
        let categories = first.len();
        if categories < 2 {
            return Err(Error::domain("rating matrix needs at least two categories"));
        }
        let raters: usize = first.iter().sum();
        if raters < 2 {
            return Err(Error::domain("rating matrix needs at least two raters"));
        }
        for (i, row) in counts.iter().enumerate() {
            if row.len() != categories {
                return Err(Error::domain(format!(
                    "item {} has {} categories, expected {categories}",
                    i + 1,
                    row.len()
                )));
            }
            let n: usize = row.iter().sum();
            if n != raters {
                return Err(Error::domain(format!(
                    "item {} has {n} ratings, expected {raters}",
                    i + 1
                )));
            }
        }
        Ok(RatingMatrix { counts, raters })
    }

    /// Build from raw labels, one row per item and one label per rater.
    /// Categories are the distinct labels observed.
    pub fn from_labels<L: Ord + Clone>(items: &[Vec<L>]) -> Result<Self> {
        let mut categories: BTreeMap<L, usize> = BTreeMap::new();
        for label in items.iter().flatten() {
            let next = categories.len();
            categories.entry(label.clone()).or_insert(next);
        }
        if categories.len() < 2 {
            return Err(Error::Degenerate(
                "every rating falls in one category; chance agreement is 1".into(),
            ));
        }
        let counts = items
            .iter()
            .map(|item| {
                let mut row = vec![0; categories.len()];
                for label in item {
                    row[categories[label]] += 1;
                }
                row
            })
            .collect();
        Self::from_counts(counts)
    }

    pub fn items(&self) -> usize {
        self.counts.len()
    }

    pub fn raters(&self) -> usize {
        self.raters
    }

    pub fn categories(&self) -> usize {
        self.counts[0].len()
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }
}

/// Observed and chance agreement together with the kappa coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa {
    pub observed: f64,
    pub chance: f64,
    pub kappa: f64,
}

/// K = (P(A) - P(E)) / (1 - P(E)) for N items rated by m raters.
pub fn kappa(ratings: &RatingMatrix) -> Result<Kappa> {
    let n = ratings.items() as f64;
    let m = ratings.raters() as f64;
    let agreeing_pairs: usize = ratings
        .counts()
        .iter()
        .flatten()
        .map(|&c| c * c.saturating_sub(1))
        .sum();
    let observed = agreeing_pairs as f64 / (n * m * (m - 1.0));
    let chance: f64 = (0..ratings.categories())
        .map(|j| {
            let col: usize = ratings.counts().iter().map(|row| row[j]).sum();
            let p = col as f64 / (n * m);
            p * p
        })
        .sum();
    if chance >= 1.0 {
        return Err(Error::Degenerate(
            "every rating falls in one category; chance agreement is 1".into(),
        ));
    }
    Ok(Kappa {
        observed,
        chance,
        kappa: (observed - chance) / (1.0 - chance),
    })
}

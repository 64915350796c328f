//! Cochran's Q test for k matched binary treatments.

use super::special::chi_square_sf;
use crate::error::{Error, Result};

/// Binary outcomes, one row per subject and one column per treatment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeMatrix {
    rows: Vec<Vec<bool>>,
    treatments: usize,
}

impl OutcomeMatrix {
    pub fn from_rows(rows: Vec<Vec<bool>>) -> Result<Self> {
        let treatments = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::domain("outcome matrix has no subjects"))?;
        if treatments < 2 {
            return Err(Error::domain(
                "outcome matrix needs at least two treatments",
            ));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != treatments) {
            return Err(Error::domain(format!(
                "subject {} has {} outcomes, expected {treatments}",
                i + 1,
                rows[i].len()
            )));
        }
        Ok(OutcomeMatrix { rows, treatments })
    }

    /// Build from per-treatment outcome vectors of equal length.
    pub fn from_columns(columns: &[Vec<bool>]) -> Result<Self> {
        let n = columns.first().map(Vec::len).unwrap_or(0);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::domain("treatment columns differ in length"));
        }
        Self::from_rows(
            (0..n)
                .map(|i| columns.iter().map(|c| c[i]).collect())
                .collect(),
        )
    }

    pub fn subjects(&self) -> usize {
        self.rows.len()
    }

    pub fn treatments(&self) -> usize {
        self.treatments
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CochranQ {
    pub q: f64,
    pub df: usize,
    pub p: f64,
}

/// Q = (k-1)·[k·ΣG_j² − (ΣG_j)²] / (k·ΣL_i − ΣL_i²), referred to chi-square
/// with k − 1 degrees of freedom.
///
/// When every subject has the same outcome under all treatments the
/// statistic is 0/0; the treatments are then indistinguishable and the
/// result is Q = 0, p = 1.
pub fn cochran_q(outcomes: &OutcomeMatrix) -> CochranQ {
    let k = outcomes.treatments();
    let mut col_totals = vec![0u64; k];
    let mut row_sum = 0u64;
    let mut row_sq_sum = 0u64;
    for row in outcomes.rows() {
        let l = row.iter().filter(|&&x| x).count() as u64;
        row_sum += l;
        row_sq_sum += l * l;
        for (g, &x) in col_totals.iter_mut().zip(row) {
            *g += x as u64;
        }
    }
    let k64 = k as u64;
    let col_sq_sum: u64 = col_totals.iter().map(|g| g * g).sum();
    let numerator = (k64 * col_sq_sum - row_sum * row_sum) as f64 * (k - 1) as f64;
    let denominator = (k64 * row_sum - row_sq_sum) as f64;
    let df = k - 1;
    if denominator == 0.0 {
        return CochranQ { q: 0.0, df, p: 1.0 };
    }
    let q = numerator / denominator;
    CochranQ {
        q,
        df,
        p: chi_square_sf(q, df),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols(a: &[u8], b: &[u8]) -> OutcomeMatrix {
        OutcomeMatrix::from_columns(&[
            a.iter().map(|&x| x == 1).collect(),
            b.iter().map(|&x| x == 1).collect(),
        ])
        .unwrap()
    }

    #[test]
    fn identical_columns() {
        let r = cochran_q(&cols(&[1, 0, 1, 1], &[1, 0, 1, 1]));
        assert_eq!((r.q, r.df, r.p), (0.0, 1, 1.0));
    }

    #[test]
    fn hand_computed_two_treatments() {
        let r = cochran_q(&cols(&[1, 1, 0], &[1, 0, 0]));
        assert_eq!(r.q, 1.0);
        assert_eq!(r.df, 1);
        assert!((r.p - 0.3173).abs() < 1e-4);
    }

    #[test]
    fn three_treatments() {
        // G = (3, 1, 0), L = (2, 1, 1, 0): Q = 2·(3·10 − 16) / (3·4 − 6) = 14/3
        let m = OutcomeMatrix::from_rows(vec![
            vec![true, true, false],
            vec![true, false, false],
            vec![true, false, false],
            vec![false, false, false],
        ])
        .unwrap();
        let r = cochran_q(&m);
        assert!((r.q - 14.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.df, 2);
        assert!((r.p - (-7.0f64 / 3.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn invalid_shapes() {
        assert!(OutcomeMatrix::from_rows(vec![]).is_err());
        assert!(OutcomeMatrix::from_rows(vec![vec![true]]).is_err());
        assert!(OutcomeMatrix::from_rows(vec![vec![true, false], vec![true]]).is_err());
        assert!(OutcomeMatrix::from_columns(&[vec![true], vec![true, false]]).is_err());
    }
}

//! Splitting a nonnegative diagonal into geometrically controlled rows.
//!
//! The rows feed the block shift: row `n` (0-based) may only hold values
//! `<= max(d) / 2^n`, each row is listed in descending order, and no
//! value is lost. The greedy rule below is deterministic, so partitions
//! (and everything built from them) reproduce exactly.

use crate::error::{LatticeError, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionResult<S> {
    /// `K` rows of one common length, zero padded on the right.
    rows: Vec<Vec<S>>,
    /// Original index -> (row, position within row).
    assignment: Vec<(usize, usize)>,
}

impl<S: Scalar> PartitionResult<S> {
    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row_len(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn assignment(&self) -> &[(usize, usize)] {
        &self.assignment
    }

    /// Largest input value (first entry of row 0).
    pub fn max_value(&self) -> S {
        self.rows[0][0].clone()
    }
}

/// Greedy rule: walk the values in descending order; a value `v` may
/// enter row `n` iff `v <= max(d) / 2^n`; put it in the eligible row
/// with the fewest members, ties to the smallest row index. Rows are
/// padded with zeros to a common length at the end.
pub fn partition_diagonal<S: Scalar>(d: &[S], k: usize) -> Result<PartitionResult<S>> {
    if k < 1 {
        return Err(LatticeError::TooFewBlocks { min: 1, got: k });
    }
    if d.is_empty() {
        return Err(LatticeError::Domain("cannot partition an empty diagonal".into()));
    }
    if let Some((index, value)) = d.iter().enumerate().find(|(_, v)| **v < S::zero()) {
        return Err(LatticeError::NegativeDiagonal {
            index,
            value: value.to_string(),
        });
    }

    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap().then(a.cmp(&b)));

    // bounds[n] = max(d) / 2^n, exact in both scalar modes.
    let mut bounds = Vec::with_capacity(k);
    bounds.push(d[order[0]].clone());
    for n in 1..k {
        bounds.push(bounds[n - 1].halve());
    }

    let mut rows: Vec<Vec<S>> = vec![Vec::new(); k];
    let mut assignment = vec![(0usize, 0usize); d.len()];
    for &orig in &order {
        let v = &d[orig];
        let mut cutoff = 0;
        while cutoff + 1 < k && *v <= bounds[cutoff + 1] {
            cutoff += 1;
        }
        let row = (0..=cutoff)
            .min_by_key(|&n| (rows[n].len(), n))
            .expect("row 0 is always eligible");
        assignment[orig] = (row, rows[row].len());
        rows[row].push(v.clone());
    }

    let width = rows.iter().map(Vec::len).max().unwrap_or(0).max(1);
    for row in &mut rows {
        row.resize(width, S::zero());
    }
    Ok(PartitionResult { rows, assignment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{parse_ratio, Rat};
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rats(list: &[&str]) -> Vec<Rat> {
        list.iter().map(|s| parse_ratio(s).unwrap()).collect()
    }

    #[test]
    fn worked_example_two_rows() {
        let p = partition_diagonal(&rats(&["1", "1/2", "1/4", "0"]), 2).unwrap();
        assert_eq!(p.rows()[0], rats(&["1", "1/4"]));
        assert_eq!(p.rows()[1], rats(&["1/2", "0"]));
        // 1 -> row 0 pos 0, 1/2 -> row 1 pos 0, 1/4 -> row 0 pos 1.
        assert_eq!(p.assignment()[0], (0, 0));
        assert_eq!(p.assignment()[1], (1, 0));
        assert_eq!(p.assignment()[2], (0, 1));
    }

    #[test]
    fn geometric_diagonal_spreads_one_per_row() {
        let p = partition_diagonal(&rats(&["1", "1/2", "1/4"]), 3).unwrap();
        assert_eq!(p.rows()[0], rats(&["1"]));
        assert_eq!(p.rows()[1], rats(&["1/2"]));
        assert_eq!(p.rows()[2], rats(&["1/4"]));
    }

    #[test]
    fn constant_diagonal_cannot_leave_row_zero() {
        let p = partition_diagonal(&vec![1.0; 4], 2).unwrap();
        assert_eq!(p.rows()[0], vec![1.0; 4]);
        assert_eq!(p.rows()[1], vec![0.0; 4]);
    }

    #[test]
    fn all_zero_diagonal_gives_zero_rows() {
        let p = partition_diagonal(&vec![0.0; 5], 3).unwrap();
        assert_eq!(p.row_count(), 3);
        assert!(p.rows().iter().all(|r| r.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn guards() {
        assert!(matches!(
            partition_diagonal(&[1.0], 0),
            Err(LatticeError::TooFewBlocks { min: 1, got: 0 })
        ));
        assert!(partition_diagonal::<f64>(&[], 2).is_err());
        assert!(matches!(
            partition_diagonal(&[1.0, -1.0], 2),
            Err(LatticeError::NegativeDiagonal { index: 1, .. })
        ));
    }

    #[test]
    fn single_row_is_the_sorted_input() {
        let p = partition_diagonal(&[0.5, 2.0, 1.0], 1).unwrap();
        assert_eq!(p.rows(), &[vec![2.0, 1.0, 0.5]]);
    }

    fn check_invariants(d: &[Rat], k: usize) {
        let p = partition_diagonal(d, k).unwrap();
        let max = p.max_value();

        // Multiset of nonzero values is preserved.
        let mut input: Vec<Rat> = d.iter().filter(|v| !v.is_zero()).cloned().collect();
        let mut output: Vec<Rat> = p
            .rows()
            .iter()
            .flatten()
            .filter(|v| !v.is_zero())
            .cloned()
            .collect();
        input.sort_by(|a, b| a.partial_cmp(b).unwrap());
        output.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(input, output);

        let mut bound = max.clone();
        for (n, row) in p.rows().iter().enumerate() {
            // Rows descend, so the head is the row maximum.
            for w in row.windows(2) {
                assert!(w[0] >= w[1], "row {n} not descending");
            }
            // Head obeys the geometric cap.
            assert!(row[0] <= bound, "row {n} head exceeds max/2^{n}");
            bound = bound.halve();
        }

        // Assignment round-trips values to their cells.
        for (orig, &(row, pos)) in p.assignment().iter().enumerate() {
            assert_eq!(p.rows()[row][pos], d[orig]);
        }
    }

    #[test]
    fn invariants_hold_on_random_rational_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..300 {
            let len = rng.gen_range(1..40);
            let k = rng.gen_range(2..8);
            let d: Vec<Rat> = (0..len)
                .map(|_| Rat::new(rng.gen_range(0i64..64).into(), rng.gen_range(1i64..16).into()))
                .collect();
            check_invariants(&d, k);
        }
    }
}

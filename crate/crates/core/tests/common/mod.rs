//! Shared helpers for the integration suites. Each test binary compiles
//! this module on its own and uses a subset.
#![allow(dead_code)]

use latcomm_core::selfcomm::partition_diagonal;
use latcomm_core::{Mat, Rat, Scalar};
use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Nonnegative rational with numerator in `0..num_max` and denominator
/// in `1..den_max`.
pub fn small_rat(rng: &mut ChaCha8Rng, num_max: i64, den_max: i64) -> Rat {
    Rat::new(
        BigInt::from(rng.gen_range(0..num_max)),
        BigInt::from(rng.gen_range(1..den_max)),
    )
}

/// Prints the per-criterion verdict line, then fails the test if any
/// problem was recorded.
pub fn conclude(criterion: usize, label: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("[acceptance {criterion}] PASS {label}");
    } else {
        println!(
            "[acceptance {criterion}] FAIL {label}: {} problem(s), first: {}",
            failures.len(),
            failures[0]
        );
        panic!(
            "acceptance criterion {criterion} failed: {}",
            failures.join("; ")
        );
    }
}

/// Largest `|left - right|` entry over `region` x `region`.
pub fn region_deviation(left: &Mat<f64>, right: &Mat<f64>, region: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for &i in region {
        for &j in region {
            worst = worst.max((left.get(i, j) - right.get(i, j)).abs());
        }
    }
    worst
}

/// Partition oracle: exact multiset preservation, descending rows, the
/// geometric head cap, and assignment round-trip.
pub fn check_partition<S: Scalar>(d: &[S], k: usize) -> Result<(), String> {
    let p = partition_diagonal(d, k).map_err(|e| e.to_string())?;

    let mut input: Vec<S> = d.iter().filter(|v| !(**v == S::zero())).cloned().collect();
    let mut output: Vec<S> = p
        .rows()
        .iter()
        .flatten()
        .filter(|v| !(**v == S::zero()))
        .cloned()
        .collect();
    input.sort_by(|a, b| a.partial_cmp(b).unwrap());
    output.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if input != output {
        return Err("multiset of nonzero values changed".into());
    }

    let mut bound = p.max_value();
    for (r, row) in p.rows().iter().enumerate() {
        for w in row.windows(2) {
            if !(w[0] >= w[1]) {
                return Err(format!("row {r} is not descending"));
            }
        }
        if !(row[0] <= bound) {
            return Err(format!("row {r} head exceeds max/2^{r}"));
        }
        bound = bound.halve();
    }

    for (orig, &(row, pos)) in p.assignment().iter().enumerate() {
        if p.rows()[row][pos] != d[orig] {
            return Err(format!("assignment of input {orig} does not round-trip"));
        }
    }
    Ok(())
}

//! Positive factorizations through dyadic step spaces.
//!
//! The star construction: for a nonnegative diagonal `d` on `seq(n)`,
//! the operator `X : seq(n) -> dyadic(N)` with `X[k][k] = sqrt(2^k d_k)`
//! satisfies `X*X = diag(d)` because coordinate `k` of the dyadic space
//! carries weight `2^-k`. `X` is entrywise nonnegative, so a diagonal
//! is always the "square" of a cone-preserving map even though taking
//! entrywise square roots of `diag(d)` itself would stay diagonal.
//! `Y = sqrt of XX*` lives on the dyadic side and squares back to `XX*`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::derive_seed;
use crate::diagonal::DiagonalSpec;
use crate::error::{LatticeError, Result};
use crate::operator::LatticeOperator;
use crate::scalar::{dyadic_weight, Rat, Scalar};
use crate::space::{SpaceKind, WeightedSpace};
use crate::tolerance::ToleranceConfig;

fn exact_sqrt<S: Scalar>(v: &S) -> Result<S> {
    v.try_sqrt().ok_or_else(|| LatticeError::InexactSqrt {
        value: v.to_string(),
    })
}

fn require_sequence(space: &WeightedSpace) -> Result<()> {
    if space.kind() != SpaceKind::Sequence {
        return Err(LatticeError::BadDescriptor(format!(
            "expected a sequence space, got {space}"
        )));
    }
    Ok(())
}

/// `X : seq(n) -> dyadic(depth)` with `X[k][k] = sqrt(2^k d_k)`, so that
/// `X*X = diag(d)` exactly (in exact arithmetic) and `||X|| = sqrt(max d_k)`.
///
/// In rational mode every `2^k d_k` must be a perfect square; otherwise
/// `InexactSqrt` says which entry is not.
pub fn build_x<S: Scalar>(d: &DiagonalSpec<S>, depth: usize) -> Result<LatticeOperator<S>> {
    require_sequence(d.space())?;
    let n = d.len();
    if depth < n {
        return Err(LatticeError::DepthTooSmall { depth, dim: n });
    }
    let codomain = WeightedSpace::dyadic(depth)?;
    let mut diag_entries = Vec::with_capacity(n);
    for (k, dk) in d.entries().iter().enumerate() {
        let two_pow = S::from_ratio(&(Rat::from_integer(1.into()) / dyadic_weight(k + 1)));
        diag_entries.push(exact_sqrt(&(two_pow * dk.clone()))?);
    }
    Ok(LatticeOperator::from_fn(
        d.space().clone(),
        codomain,
        move |i, j| {
            if i == j && i < n {
                diag_entries[i].clone()
            } else {
                S::zero()
            }
        },
    ))
}

/// `Y` on `dyadic(depth)`: multiplication by `sqrt(d_k)` on the first
/// `n` coordinates. `Y` is self-adjoint and `Y^2 = XX*` for the `X`
/// built from the same diagonal.
pub fn build_y<S: Scalar>(d: &DiagonalSpec<S>, depth: usize) -> Result<LatticeOperator<S>> {
    require_sequence(d.space())?;
    let n = d.len();
    if depth < n {
        return Err(LatticeError::DepthTooSmall { depth, dim: n });
    }
    let space = WeightedSpace::dyadic(depth)?;
    let mut roots = Vec::with_capacity(n);
    for dk in d.entries() {
        roots.push(exact_sqrt(dk)?);
    }
    Ok(LatticeOperator::from_fn(space.clone(), space, move |i, j| {
        if i == j && i < n {
            roots[i].clone()
        } else {
            S::zero()
        }
    }))
}

/// The all-ones case of `build_x`: a positive isometry `seq(n) ->
/// dyadic(depth)` (entry `sqrt(2^k)` at coordinate `k`).
pub fn positive_isometry(n: usize, depth: usize) -> Result<LatticeOperator<f64>> {
    let ones = DiagonalSpec::on_sequence(vec![1.0; n])?;
    build_x(&ones, depth)
}

/// Averaging a dyadic step function over its intervals: coordinate `k`
/// (value on an interval of length `2^-k`) goes to `c_k 2^-k` (its
/// integral), read in a plain sequence space. Exact rationals only; the
/// interesting content is exact equality of norms on the cone.
pub fn dyadic_averaging(depth: usize) -> Result<LatticeOperator<Rat>> {
    let domain = WeightedSpace::dyadic(depth)?;
    let codomain = WeightedSpace::sequence(depth)?;
    Ok(LatticeOperator::from_fn(domain, codomain, |i, j| {
        if i == j {
            dyadic_weight(i + 1)
        } else {
            Rat::from_integer(0.into())
        }
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct AveragingReport {
    pub input_l1: String,
    pub output_l1: String,
    /// `||Vf||_1 <= ||f||_1`; holds for every input here.
    pub contraction: bool,
    /// Exact equality of the two norms; guaranteed on the cone.
    pub equality: bool,
}

/// Applies the averaging map to coordinates `f` and compares weighted
/// l1 norms exactly.
pub fn averaging_report(f: &[Rat]) -> Result<AveragingReport> {
    let v = dyadic_averaging(f.len())?;
    let input = v.domain().l1_norm(f);
    let out = v.apply(f);
    let output = v.codomain().l1_norm(&out);
    Ok(AveragingReport {
        contraction: output <= input,
        equality: output == input,
        input_l1: input.to_string(),
        output_l1: output.to_string(),
    })
}

/// `(a+b)^p - a^p - b^p`, strictly positive for `a, b > 0`, `p > 1`.
pub fn strict_superadditivity_gap(a: f64, b: f64, p: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(LatticeError::Domain(format!(
            "superadditivity gap needs a, b > 0 (got a={a}, b={b})"
        )));
    }
    if !(p > 1.0) {
        return Err(LatticeError::Domain(format!(
            "superadditivity gap needs p > 1 (got p={p})"
        )));
    }
    Ok((a + b).powf(p) - a.powf(p) - b.powf(p))
}

#[derive(Clone, Debug, Serialize)]
pub struct DisjointnessViolation {
    pub trial: u64,
    /// Largest coordinatewise overlap `min(|Vf|_i, |Vg|_i)`.
    pub overlap: f64,
    /// `| ||V(f+g)||_p^p - ||Vf||_p^p - ||Vg||_p^p |` for that trial.
    pub norm_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DisjointnessReport {
    pub trials: u64,
    /// Trials where the p-th power norms added up (within tolerance).
    pub additive: u64,
    /// Trials whose images were coordinatewise disjoint.
    pub disjoint: u64,
    /// Additive trials with overlapping images. Empty for positive `V`:
    /// per coordinate, `(x+y)^p > x^p + y^p` as soon as both are
    /// positive, so additivity of the sums forces disjointness.
    pub flagged: Vec<DisjointnessViolation>,
    pub v_positive: bool,
}

/// Samples pairs of disjointly supported nonnegative vectors and tests
/// whether additivity of `||.||_p^p` under `V` forces disjoint images.
pub fn check_disjointness_preservation(
    v: &LatticeOperator<f64>,
    p: f64,
    trials: u64,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<DisjointnessReport> {
    if !(p > 1.0) {
        return Err(LatticeError::Domain(format!(
            "disjointness check needs p > 1 (got p={p})"
        )));
    }
    let n = v.domain().dim();
    if n < 2 {
        return Err(LatticeError::Domain(
            "disjointness check needs a domain of dimension >= 2".into(),
        ));
    }
    let v_positive = v.is_positive(cfg).positive;
    let np = |x: &[f64]| -> f64 { x.iter().map(|t| t.abs().powf(p)).sum() };
    // Smallest overlap whose superadditivity gap would clear eq_tol.
    let overlap_tol = cfg.eq_tol.max((4.0 * cfg.eq_tol).powf(1.0 / p));

    let mut report = DisjointnessReport {
        trials,
        additive: 0,
        disjoint: 0,
        flagged: Vec::new(),
        v_positive,
    };
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial));
        let mut f = vec![0.0; n];
        let mut g = vec![0.0; n];
        loop {
            for i in 0..n {
                f[i] = 0.0;
                g[i] = 0.0;
                match rng.gen_range(0..3) {
                    0 => f[i] = rng.gen_range(0.1..2.0),
                    1 => g[i] = rng.gen_range(0.1..2.0),
                    _ => {}
                }
            }
            let fs = f.iter().any(|&x| x > 0.0);
            let gs = g.iter().any(|&x| x > 0.0);
            if fs && gs {
                break;
            }
        }
        let uf = v.apply(&f);
        let ug = v.apply(&g);
        let both: Vec<f64> = uf.iter().zip(&ug).map(|(a, b)| a + b).collect();
        let parts = np(&uf) + np(&ug);
        let norm_gap = (np(&both) - parts).abs();
        let additive = norm_gap <= cfg.eq_tol * parts.abs().max(1.0);
        let overlap = uf
            .iter()
            .zip(&ug)
            .map(|(a, b)| a.abs().min(b.abs()))
            .fold(0.0, f64::max);
        let disjoint = overlap <= overlap_tol;
        if additive {
            report.additive += 1;
        }
        if disjoint {
            report.disjoint += 1;
        }
        if additive && !disjoint {
            report.flagged.push(DisjointnessViolation {
                trial,
                overlap,
                norm_gap,
            });
        }
    }
    Ok(report)
}

//! Projected gradient exploration of self-commutator residuals on the
//! mixed sequence/dyadic space.
//!
//! The optimizer works in scaled coordinates `B = W^(1/2) Z W^(-1/2)`
//! where the weighted adjoint becomes the plain transpose, so the
//! objective is the ordinary Frobenius residual
//! `f(B) = || B^T B - B B^T - T ||_F^2` and entrywise nonnegativity of
//! `B` is the same constraint as for `Z`. Reports carry residual data
//! only: a descent run is evidence, not an answer, about whether the
//! targets are reachable in larger truncations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{LatticeError, Result};
use crate::matrix::Mat;
use crate::operator::LatticeOperator;
use crate::report::{operator_to_doc, Meta, OperatorDoc};
use crate::space::WeightedSpace;
use crate::tolerance::ToleranceConfig;

/// Diagonal the search steers the self-commutator toward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchTarget {
    /// Identity on the sequence block, zero elsewhere. A chain
    /// construction realizes this up to its truncation edge.
    SequenceIdentity,
    /// Identity on the first dyadic copy, zero elsewhere. No
    /// construction is known either way; runs gather evidence only.
    DyadicIdentity,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seq_dim: usize,
    pub dyadic_depth: usize,
    /// Total blocks: one sequence block plus `copies - 1` dyadic
    /// copies.
    pub copies: usize,
    pub max_iters: usize,
    pub step_size: f64,
    /// Step shrink factor in (0, 1) when a trial step fails to
    /// decrease the objective.
    pub backtrack: f64,
    pub seed: u64,
    pub restarts: usize,
    /// Stop once an accepted step improves the residual by less than
    /// this.
    pub stop_tol: f64,
    pub target: SearchTarget,
}

impl SearchConfig {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("seq_dim", self.seq_dim),
            ("dyadic_depth", self.dyadic_depth),
            ("max_iters", self.max_iters),
            ("restarts", self.restarts),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(LatticeError::Domain(format!("{name} must be positive")));
            }
        }
        if self.copies < 2 {
            return Err(LatticeError::TooFewBlocks {
                min: 2,
                got: self.copies,
            });
        }
        if !(self.step_size > 0.0) {
            return Err(LatticeError::Domain("step_size must be positive".to_string()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(LatticeError::Domain(
                "backtrack factor must lie strictly between 0 and 1".to_string(),
            ));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(LatticeError::Domain("stop_tol must be nonnegative".to_string()));
        }
        Ok(())
    }
}

/// The sequence-plus-dyadic-copies space a config describes.
pub fn search_space(cfg: &SearchConfig) -> Result<WeightedSpace> {
    let mut blocks = vec![WeightedSpace::sequence(cfg.seq_dim)?];
    for _ in 1..cfg.copies {
        blocks.push(WeightedSpace::dyadic(cfg.dyadic_depth)?);
    }
    WeightedSpace::direct_sum(blocks)
}

/// The diagonal target operator a config describes.
pub fn search_target(cfg: &SearchConfig) -> Result<LatticeOperator<f64>> {
    let space = search_space(cfg)?;
    let n = cfg.seq_dim;
    let on: std::ops::Range<usize> = match cfg.target {
        SearchTarget::SequenceIdentity => 0..n,
        SearchTarget::DyadicIdentity => n..n + cfg.dyadic_depth,
        SearchTarget::Zero => 0..0,
    };
    let m = Mat::from_fn(space.dim(), space.dim(), |i, j| {
        if i == j && on.contains(&i) {
            1.0
        } else {
            0.0
        }
    });
    LatticeOperator::new(space.clone(), space, m)
}

/// Why a restart ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    MaxIters,
    /// Backtracking exhausted the step size: projected-stationary.
    Stationary,
    /// Residual improvement fell below `stop_tol`.
    Converged,
    /// The objective left the finite range; the restart aborted at its
    /// last finite iterate.
    NonFinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub seed: u64,
    pub iterations: usize,
    pub best_residual: f64,
    pub stop: StopReason,
}

/// Best iterate found, with the full residual trace of the winning
/// restart. No conclusion is drawn from the numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchReport {
    pub best_residual: f64,
    /// Residual at the initial point and after each accepted step of
    /// the best restart; non-increasing.
    pub residual_history: Vec<f64>,
    pub best_operator: LatticeOperator<f64>,
    pub restarts: Vec<RestartSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchDoc {
    pub meta: Meta,
    pub config: SearchConfig,
    pub best_residual: f64,
    pub residual_history: Vec<f64>,
    #[serde(rename = "best_Z")]
    pub best_operator: OperatorDoc,
    pub restarts: Vec<RestartSummary>,
}

impl SearchReport {
    pub fn to_doc(&self, cfg: &SearchConfig, tol: &ToleranceConfig) -> SearchDoc {
        SearchDoc {
            meta: Meta::new("Question 5.3", cfg.seed, tol),
            config: cfg.clone(),
            best_residual: self.best_residual,
            residual_history: self.residual_history.clone(),
            best_operator: operator_to_doc(&self.best_operator),
            restarts: self.restarts.clone(),
        }
    }
}

fn hat(op: &LatticeOperator<f64>) -> Mat<f64> {
    let w = op.domain().weights_f64();
    let m = op.entries();
    Mat::from_fn(m.rows(), m.cols(), |i, j| {
        m.get(i, j) * (w[i] / w[j]).sqrt()
    })
}

fn unhat(space: &WeightedSpace, b: Mat<f64>) -> LatticeOperator<f64> {
    let w = space.weights_f64();
    let m = Mat::from_fn(b.rows(), b.cols(), |i, j| {
        b.get(i, j) * (w[j] / w[i]).sqrt()
    });
    LatticeOperator::new(space.clone(), space.clone(), m)
        .expect("square matrix on its own space")
}

/// Objective value and the symmetric residual `B^T B - B B^T - T`.
fn objective(b: &Mat<f64>, target: &Mat<f64>) -> (f64, Mat<f64>) {
    let bt = b.transpose();
    let r = bt.matmul(b).sub(&b.matmul(&bt)).sub(target);
    let mut f = 0.0;
    for (_, _, v) in r.entries() {
        f += v * v;
    }
    (f, r)
}

/// `grad f = 4 (B R - R B)` for the residual `R` at `B`.
fn gradient(b: &Mat<f64>, r: &Mat<f64>) -> Mat<f64> {
    b.matmul(r).sub(&r.matmul(b)).scale(&4.0)
}

fn clamp_nonneg(m: &Mat<f64>) -> Mat<f64> {
    m.map(|v| v.max(0.0))
}

struct RunOutcome {
    b: Mat<f64>,
    residual: f64,
    history: Vec<f64>,
    iterations: usize,
    stop: StopReason,
}

/// Threshold under which backtracking gives up: no descent left at
/// representable step sizes.
const MIN_STEP: f64 = 1e-18;

fn run_descent(init: Mat<f64>, target: &Mat<f64>, cfg: &SearchConfig) -> RunOutcome {
    let mut b = clamp_nonneg(&init);
    let (mut f, mut r) = objective(&b, target);
    if !f.is_finite() {
        return RunOutcome {
            residual: f64::INFINITY,
            history: vec![f64::INFINITY],
            iterations: 0,
            stop: StopReason::NonFinite,
            b,
        };
    }
    let mut history = vec![f.sqrt()];
    let mut iterations = 0;
    let mut stop = StopReason::MaxIters;
    'outer: for _ in 0..cfg.max_iters {
        iterations += 1;
        let g = gradient(&b, &r);
        let mut t = cfg.step_size;
        let accepted = loop {
            if t < MIN_STEP {
                stop = StopReason::Stationary;
                break 'outer;
            }
            let cand = clamp_nonneg(&b.sub(&g.scale(&t)));
            let (fc, rc) = objective(&cand, target);
            if !fc.is_finite() {
                stop = StopReason::NonFinite;
                break 'outer;
            }
            if fc < f {
                break (cand, fc, rc);
            }
            t *= cfg.backtrack;
        };
        let improvement = f.sqrt() - accepted.1.sqrt();
        b = accepted.0;
        f = accepted.1;
        r = accepted.2;
        history.push(f.sqrt());
        if improvement < cfg.stop_tol {
            stop = StopReason::Converged;
            break;
        }
    }
    RunOutcome {
        residual: f.sqrt(),
        history,
        iterations,
        stop,
        b,
    }
}

fn random_start(dim: usize, seed: u64) -> Mat<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Mat::from_fn(dim, dim, |_, _| rng.gen_range(0.0..1.0))
}

fn report_from_outcomes(
    space: &WeightedSpace,
    outcomes: Vec<(RestartSummary, RunOutcome)>,
) -> SearchReport {
    let best = outcomes
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            a.1.residual
                .partial_cmp(&b.1.residual)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(j))
        })
        .map(|(i, _)| i)
        .expect("at least one restart");
    let mut summaries = Vec::with_capacity(outcomes.len());
    let mut best_outcome = None;
    for (i, (summary, outcome)) in outcomes.into_iter().enumerate() {
        summaries.push(summary);
        if i == best {
            best_outcome = Some(outcome);
        }
    }
    let out = best_outcome.expect("best index is in range");
    SearchReport {
        best_residual: out.residual,
        residual_history: out.history,
        best_operator: unhat(space, out.b),
        restarts: summaries,
    }
}

/// Multi-restart projected gradient descent from random nonnegative
/// starts. Restarts run in parallel; each is deterministic from its
/// derived seed, and ties pick the earliest restart, so the report is
/// reproducible.
pub fn projected_gradient_search(cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let space = search_space(cfg)?;
    let target_hat = search_target(cfg)?.entries().clone();
    let dim = space.dim();
    let outcomes: Vec<(RestartSummary, RunOutcome)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(cfg.seed, i as u64);
            let outcome = run_descent(random_start(dim, seed), &target_hat, cfg);
            (
                RestartSummary {
                    restart: i,
                    seed,
                    iterations: outcome.iterations,
                    best_residual: outcome.residual,
                    stop: outcome.stop,
                },
                outcome,
            )
        })
        .collect();
    Ok(report_from_outcomes(&space, outcomes))
}

/// Single descent run seeded at a given operator instead of a random
/// start. The first history entry is the seed's own residual.
pub fn projected_gradient_search_from(
    cfg: &SearchConfig,
    init: &LatticeOperator<f64>,
) -> Result<SearchReport> {
    cfg.validate()?;
    let space = search_space(cfg)?;
    if init.domain() != &space || init.codomain() != &space {
        return Err(LatticeError::SpaceMismatch {
            left: init.domain().to_string(),
            right: space.to_string(),
            context: "search seed operator",
        });
    }
    let target_hat = search_target(cfg)?.entries().clone();
    let outcome = run_descent(hat(init), &target_hat, cfg);
    let summary = RestartSummary {
        restart: 0,
        seed: cfg.seed,
        iterations: outcome.iterations,
        best_residual: outcome.residual,
        stop: outcome.stop,
    };
    Ok(report_from_outcomes(&space, vec![(summary, outcome)]))
}

/// Compares the analytic gradient at `z` against central finite
/// differences of the objective, entry by entry, in the scaled
/// coordinates; returns the largest relative deviation.
pub fn gradient_check(
    z: &LatticeOperator<f64>,
    target: &LatticeOperator<f64>,
    epsilon: f64,
) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(LatticeError::Domain("epsilon must be positive".to_string()));
    }
    if z.domain() != target.domain() || z.codomain() != target.codomain() {
        return Err(LatticeError::SpaceMismatch {
            left: z.domain().to_string(),
            right: target.domain().to_string(),
            context: "gradient check",
        });
    }
    let b = hat(z);
    let t = hat(target);
    let (_, r) = objective(&b, &t);
    let g = gradient(&b, &r);
    let mut worst = 0.0f64;
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            let mut plus = b.clone();
            plus.set(i, j, b.get(i, j) + epsilon);
            let mut minus = b.clone();
            minus.set(i, j, b.get(i, j) - epsilon);
            let numeric = (objective(&plus, &t).0 - objective(&minus, &t).0) / (2.0 * epsilon);
            let analytic = *g.get(i, j);
            let scale = analytic.abs().max(numeric.abs()).max(1.0);
            worst = worst.max((analytic - numeric).abs() / scale);
        }
    }
    Ok(worst)
}

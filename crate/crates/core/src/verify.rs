//! Checks that measure the impossibility statements against concrete
//! operators, re-derivation of certificate claims, and seeded
//! falsification campaigns.
//!
//! A campaign never proves anything; it reports that a statement
//! survived N trials, or serializes a counterexample completely enough
//! to re-verify it from the report alone. Campaigns are parallel over
//! trials, but every trial owns a seed derived from (root seed, trial
//! index), so reports are byte-identical across runs and thread counts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::diagonal::DiagonalSpec;
use crate::error::{LatticeError, Result};
use crate::matrix::Mat;
use crate::operator::LatticeOperator;
use crate::report::{operator_from_doc, operator_to_doc, Meta, OperatorDoc};
use crate::scalar::Scalar;
use crate::selfcomm::certificate::{sub_operator, SelfCommutatorCertificate};
use crate::space::WeightedSpace;
use crate::tolerance::ToleranceConfig;

/// Outcome of testing a positive idempotent against the claim that a
/// positive self-commutator forces an orthogonal projection.
#[derive(Clone, Debug, PartialEq)]
pub enum IdempotentVerdict {
    NotPositive { min_entry: f64 },
    NotIdempotent { deviation: f64 },
    /// `[A*, A]` has a negative entry, so the hypothesis fails and the
    /// statement says nothing about this operator.
    CommutatorNotPositive { min_entry: f64 },
    /// Hypotheses hold and so does the conclusion: `A = A*` and
    /// `[A*, A] = 0` within `eq_tol`.
    TheoremHolds {
        symmetry_gap: f64,
        commutator_norm: f64,
    },
    /// Hypotheses hold but the conclusion fails.
    Counterexample {
        symmetry_gap: f64,
        commutator_norm: f64,
    },
}

/// Classifies `A` against the orthogonal-projection claim.
pub fn check_idempotent_theorem<S: Scalar>(
    a: &LatticeOperator<S>,
    cfg: &ToleranceConfig,
) -> Result<IdempotentVerdict> {
    require_endomorphism(a)?;
    let pos = a.is_positive(cfg);
    if !pos.positive {
        return Ok(IdempotentVerdict::NotPositive {
            min_entry: pos.witness.value,
        });
    }
    let deviation = a.compose(a)?.max_deviation(a);
    if deviation > cfg.eq_tol {
        return Ok(IdempotentVerdict::NotIdempotent { deviation });
    }
    let c = a.self_commutator()?;
    let cpos = c.is_positive(cfg);
    if !cpos.positive {
        return Ok(IdempotentVerdict::CommutatorNotPositive {
            min_entry: cpos.witness.value,
        });
    }
    let symmetry_gap = a.max_deviation(&a.adjoint());
    let commutator_norm = c.max_abs();
    if symmetry_gap <= cfg.eq_tol && commutator_norm <= cfg.eq_tol {
        Ok(IdempotentVerdict::TheoremHolds {
            symmetry_gap,
            commutator_norm,
        })
    } else {
        Ok(IdempotentVerdict::Counterexample {
            symmetry_gap,
            commutator_norm,
        })
    }
}

/// Deterministic stream of entrywise-nonnegative idempotents on the
/// `n`-dim sequence space: the identity first, then a mix of 0/1 band
/// projections, rank-one `x f^T` with `f(x) = 1`, and sums of such
/// rank-ones over disjoint coordinate blocks. Every emitted operator is
/// re-checked to satisfy `A^2 = A` within 1e-12.
pub fn sample_positive_idempotents(
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<LatticeOperator<f64>>> {
    let space = WeightedSpace::sequence(n)?;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        out.push(if i == 0 {
            LatticeOperator::identity(space.clone())
        } else {
            sample_one_idempotent(&space, derive_seed(seed, i as u64))
        });
    }
    Ok(out)
}

fn sample_one_idempotent(space: &WeightedSpace, seed: u64) -> LatticeOperator<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.dim();
    let family = rng.gen_range(0u32..3);
    let mat = match family {
        0 => {
            let flags: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
            Mat::from_fn(n, n, |i, j| {
                if i == j && flags[i] {
                    1.0
                } else {
                    0.0
                }
            })
        }
        1 => {
            let block: Vec<usize> = (0..n).collect();
            let mut m = Mat::zeros(n, n);
            write_rank_one(&mut m, &block, &mut rng);
            m
        }
        _ => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let blocks = rng.gen_range(1..=n.min(3));
            let used = rng.gen_range(blocks..=n);
            let mut m = Mat::zeros(n, n);
            for chunk in chunk_evenly(&idx[..used], blocks) {
                write_rank_one(&mut m, &chunk, &mut rng);
            }
            for &c in &idx[used..] {
                if rng.gen_bool(0.5) {
                    m.set(c, c, 1.0);
                }
            }
            m
        }
    };
    let op = LatticeOperator::new(space.clone(), space.clone(), mat)
        .expect("sampler shapes match the space");
    let deviation = op
        .compose(&op)
        .expect("endomorphism")
        .max_deviation(&op);
    if deviation <= 1e-12 {
        op
    } else {
        // Rounding spoiled the biorthogonality; a band projection is
        // always exact.
        let flags: Vec<bool> = {
            let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x5051_5253);
            (0..n).map(|_| r.gen_bool(0.5)).collect()
        };
        let m = Mat::from_fn(n, n, |i, j| {
            if i == j && flags[i] {
                1.0
            } else {
                0.0
            }
        });
        LatticeOperator::new(space.clone(), space.clone(), m).expect("diagonal shape")
    }
}

/// Writes `x f^T` on the given coordinates, with `f` scaled so that
/// `f^T x = 1`; entries stay strictly positive on the block.
fn write_rank_one(m: &mut Mat<f64>, block: &[usize], rng: &mut ChaCha8Rng) {
    let x: Vec<f64> = block.iter().map(|_| rng.gen_range(0.25..1.5)).collect();
    let g: Vec<f64> = block.iter().map(|_| rng.gen_range(0.25..1.5)).collect();
    let s: f64 = x.iter().zip(&g).map(|(a, b)| a * b).sum();
    for (bi, &i) in block.iter().enumerate() {
        for (bj, &j) in block.iter().enumerate() {
            m.set(i, j, x[bi] * g[bj] / s);
        }
    }
}

fn chunk_evenly(items: &[usize], parts: usize) -> Vec<Vec<usize>> {
    let base = items.len() / parts;
    let extra = items.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut at = 0;
    for p in 0..parts {
        let len = base + usize::from(p < extra);
        out.push(items[at..at + len].to_vec());
        at += len;
    }
    out
}

/// Outcome of testing the claim that an entrywise-nonnegative operator
/// with entrywise-nonnegative self-commutator has zero self-commutator
/// (finite stand-in: every operator here is power compact).
#[derive(Clone, Debug, PartialEq)]
pub enum PowerCompactVerdict {
    /// `[A*, A]` has an entry below `-pos_tol`; the statement is
    /// vacuous for this operator.
    HypothesisNotMet { min_entry: f64 },
    Vanishes { commutator_norm: f64 },
    Counterexample { commutator_norm: f64, allowed: f64 },
}

pub fn check_finite_selfcommutator_vanishes<S: Scalar>(
    a: &LatticeOperator<S>,
    cfg: &ToleranceConfig,
) -> Result<PowerCompactVerdict> {
    require_endomorphism(a)?;
    require_entrywise_nonneg(a, cfg)?;
    let c = a.self_commutator()?;
    let min = min_entry(&c);
    if min < -cfg.pos_tol {
        return Ok(PowerCompactVerdict::HypothesisNotMet { min_entry: min });
    }
    let commutator_norm = c.max_abs();
    let allowed = cfg.eq_tol.max(10.0 * cfg.pos_tol * a.domain().dim() as f64);
    if commutator_norm <= allowed {
        Ok(PowerCompactVerdict::Vanishes { commutator_norm })
    } else {
        Ok(PowerCompactVerdict::Counterexample {
            commutator_norm,
            allowed,
        })
    }
}

/// Outcome of the entrywise power inequality
/// `(A*)^n A^n >= (A*A)^n` for operators with `[A*, A] >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum PowerInequalityVerdict {
    /// `[A*, A]` has a negative entry; the induction hypothesis fails.
    Inapplicable { min_commutator_entry: f64 },
    Holds {
        max_entry_gap: f64,
        max_norm_gap: f64,
    },
    Counterexample {
        power: usize,
        violation: f64,
        contract: &'static str,
    },
}

/// Checks the powers `1..=n_max`, entrywise and in norm. The entrywise
/// tolerance is scaled by `||A||^(2n)` because the products grow at
/// that rate.
pub fn check_power_inequality<S: Scalar>(
    a: &LatticeOperator<S>,
    n_max: usize,
    cfg: &ToleranceConfig,
) -> Result<PowerInequalityVerdict> {
    require_endomorphism(a)?;
    require_entrywise_nonneg(a, cfg)?;
    let c = a.self_commutator()?;
    let min = min_entry(&c);
    if min < -cfg.pos_tol {
        return Ok(PowerInequalityVerdict::Inapplicable {
            min_commutator_entry: min,
        });
    }
    power_inequality_over(a, n_max, None, cfg)
}

/// Same entrywise check, but only over entry pairs drawn from `region`,
/// and without the hypothesis filter: the caller vouches that the
/// commutator is nonnegative where it matters. The norm comparison is
/// skipped, since restricting to a sub-block changes both sides.
pub fn check_power_inequality_on<S: Scalar>(
    a: &LatticeOperator<S>,
    region: &[usize],
    n_max: usize,
    cfg: &ToleranceConfig,
) -> Result<PowerInequalityVerdict> {
    require_endomorphism(a)?;
    require_entrywise_nonneg(a, cfg)?;
    let dim = a.domain().dim();
    for &c in region {
        if c >= dim {
            return Err(LatticeError::Domain(format!(
                "region coordinate {c} outside dimension {dim}"
            )));
        }
    }
    let keep = |_n: usize, i: usize, j: usize| region.contains(&i) && region.contains(&j);
    power_inequality_over(a, n_max, Some(&keep), cfg)
}

/// Power inequality for a certificate operator, restricted for each
/// power `n` to the chain blocks that sit more than `n` steps away from
/// the truncation edge. On those blocks the commutator is the
/// (nonnegative) target, so the induction applies even though the edge
/// block itself is negative.
pub fn check_certificate_power_inequality<S: Scalar>(
    cert: &SelfCommutatorCertificate<S>,
    n_max: usize,
    cfg: &ToleranceConfig,
) -> Result<PowerInequalityVerdict> {
    let a = cert.operator();
    require_endomorphism(a)?;
    require_entrywise_nonneg(a, cfg)?;
    let k = cert.chain().len();
    let dim = a.domain().dim();
    let mut group_of = vec![usize::MAX; dim];
    for (g, coords) in cert.chain().iter().enumerate() {
        for &c in coords {
            group_of[c] = g;
        }
    }
    let keep = |n: usize, i: usize, j: usize| -> bool {
        group_of[i] < k.saturating_sub(n) && group_of[j] < k.saturating_sub(n)
    };
    power_inequality_over(a, n_max, Some(&keep), cfg)
}

/// Headroom for the norm comparison: the two sides come from separate
/// power iterations whose residual error can dwarf `eq_tol` when an
/// eigenvalue gap is small. A real violation would be O(1).
const NORM_SLACK: f64 = 1e-6;

/// Shared power loop. `keep(n, i, j)` selects the entries compared at
/// power `n`; `None` compares everything and also checks the norm
/// consequence `||(A*A)^n|| <= ||(A*)^n|| ||A^n||`.
fn power_inequality_over<S: Scalar>(
    a: &LatticeOperator<S>,
    n_max: usize,
    keep: Option<&dyn Fn(usize, usize, usize) -> bool>,
    cfg: &ToleranceConfig,
) -> Result<PowerInequalityVerdict> {
    let adj = a.adjoint();
    let gram = adj.compose(a)?;
    let norm_scale = a.operator_norm(cfg).value.max(1.0);
    let mut an = a.clone();
    let mut adjn = adj.clone();
    let mut gramn = gram.clone();
    let mut max_entry_gap = 0.0f64;
    let mut max_norm_gap = 0.0f64;
    for n in 1..=n_max {
        if n > 1 {
            an = a.compose(&an)?;
            adjn = adj.compose(&adjn)?;
            gramn = gram.compose(&gramn)?;
        }
        let upper = adjn.compose(&an)?;
        let diff = upper.sub(&gramn);
        let mut min = 0.0f64;
        for (i, j, v) in diff.entries().entries() {
            if keep.map_or(true, |f| f(n, i, j)) {
                min = min.min(v.to_f64());
            }
        }
        let scale = norm_scale.powi(2 * n as i32);
        if min < -cfg.pos_tol * scale {
            return Ok(PowerInequalityVerdict::Counterexample {
                power: n,
                violation: -min,
                contract: "entrywise",
            });
        }
        max_entry_gap = max_entry_gap.max(-min);
        if keep.is_none() {
            let le = gramn.operator_norm(cfg);
            let r1 = adjn.operator_norm(cfg);
            let r2 = an.operator_norm(cfg);
            // Unconverged estimates cannot certify either way; skip.
            if le.converged && r1.converged && r2.converged {
                let rhs = r1.value * r2.value;
                if le.value > rhs + NORM_SLACK * rhs.max(1.0) {
                    return Ok(PowerInequalityVerdict::Counterexample {
                        power: n,
                        violation: le.value - rhs,
                        contract: "norm",
                    });
                }
                max_norm_gap = max_norm_gap.max(le.value - rhs);
            }
        }
    }
    Ok(PowerInequalityVerdict::Holds {
        max_entry_gap,
        max_norm_gap,
    })
}

/// Outcome of the trace test on a nonnegative diagonal operator:
/// commutators have plain trace zero, so positive trace rules out any
/// commutator representation at this dimension.
#[derive(Clone, Debug, PartialEq)]
pub enum TraceVerdict {
    NonCommutator {
        trace: f64,
        /// Smallest diagonal entry; positive means `C >= delta*I`.
        delta: f64,
    },
    NoObstruction,
}

pub fn trace_obstruction<S: Scalar>(c: &LatticeOperator<S>) -> Result<TraceVerdict> {
    require_endomorphism(c)?;
    if !c.entries().is_diagonal() {
        return Err(LatticeError::Domain(
            "trace obstruction needs a diagonal operator".to_string(),
        ));
    }
    let diag = c.entries().diag();
    for (i, v) in diag.iter().enumerate() {
        if *v < S::zero() {
            return Err(LatticeError::NegativeDiagonal {
                index: i,
                value: v.to_string(),
            });
        }
    }
    let trace: f64 = diag.iter().map(|v| v.to_f64()).sum();
    if trace > 0.0 {
        let delta = diag
            .iter()
            .map(|v| v.to_f64())
            .fold(f64::INFINITY, f64::min);
        Ok(TraceVerdict::NonCommutator { trace, delta })
    } else {
        Ok(TraceVerdict::NoObstruction)
    }
}

/// One measured claim inside a certificate report. Boolean facts use
/// `measured` as a count of offending items and `allowed = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub allowed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

impl CertificateReport {
    fn finish(checks: Vec<CheckResult>) -> Self {
        let all_passed = checks.iter().all(|c| c.passed);
        CertificateReport { checks, all_passed }
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &str, passed: bool, measured: f64, allowed: f64) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
        measured,
        allowed,
    }
}

/// Re-derives every claim a certificate makes, from its operator alone:
/// positivity, the commutator against the target off the edge, the edge
/// norm and bound, the chain step norms, and the coordinate
/// bookkeeping. Failures come back as report entries, never errors.
pub fn verify_certificate<S: Scalar>(
    cert: &SelfCommutatorCertificate<S>,
    cfg: &ToleranceConfig,
) -> CertificateReport {
    let mut checks = Vec::new();
    let a = cert.operator();
    let t = cert.target();
    let structural =
        a.is_endomorphism() && t.is_endomorphism() && a.domain() == t.domain();
    checks.push(check(
        "operator and target live on one space",
        structural,
        if structural { 0.0 } else { 1.0 },
        0.0,
    ));
    if !structural {
        return CertificateReport::finish(checks);
    }

    let dim = a.domain().dim();
    let mut seen = vec![0usize; dim];
    let mut oob = 0usize;
    for &c in cert.verified_region().iter().chain(cert.edge_region()) {
        if c < dim {
            seen[c] += 1;
        } else {
            oob += 1;
        }
    }
    let mut bad = oob + seen.iter().filter(|&&s| s != 1).count();
    if cert.chain().last().map(Vec::as_slice).unwrap_or(&[]) != cert.edge_region() {
        bad += 1;
    }
    let mut chain_seen = vec![false; dim];
    for &c in cert.chain().iter().flatten() {
        if c >= dim || chain_seen[c] {
            bad += 1;
        } else {
            chain_seen[c] = true;
        }
    }
    // The permutation sends each original input coordinate to its slot
    // in the certificate basis; the basis may be larger (padding,
    // zero-filled partition slots), so injectivity is the contract.
    let perm = cert.permutation();
    let mut hit = vec![false; dim];
    let mut perm_bad = usize::from(perm.len() > dim);
    for &p in perm {
        if p >= dim || hit[p] {
            perm_bad += 1;
        } else {
            hit[p] = true;
        }
    }
    checks.push(check(
        "regions, chain and permutation are consistent",
        bad + perm_bad == 0,
        (bad + perm_bad) as f64,
        0.0,
    ));
    if bad + perm_bad > 0 {
        return CertificateReport::finish(checks);
    }

    let pos = a.is_positive(cfg);
    checks.push(check(
        "operator entrywise nonnegative",
        pos.positive,
        pos.witness.value,
        -cfg.pos_tol,
    ));

    let commutator = a.self_commutator().expect("endomorphism checked");
    let residual = commutator.sub(t);
    let mut in_edge = vec![false; dim];
    for &c in cert.edge_region() {
        in_edge[c] = true;
    }
    let mut off_edge = 0.0f64;
    for (i, j, v) in residual.entries().entries() {
        if !(in_edge[i] && in_edge[j]) {
            off_edge = off_edge.max(v.abs().to_f64());
        }
    }
    checks.push(check(
        "commutator equals target off the edge",
        off_edge <= cfg.eq_tol,
        off_edge,
        cfg.eq_tol,
    ));
    checks.push(check(
        "reported residual matches remeasurement",
        (off_edge - cert.residual_verified()).abs() <= cfg.eq_tol,
        (off_edge - cert.residual_verified()).abs(),
        cfg.eq_tol,
    ));

    let edge_norm = if cert.edge_region().is_empty() {
        0.0
    } else {
        sub_operator(&residual, cert.edge_region(), cert.edge_region())
            .expect("edge coordinates checked")
            .operator_norm(cfg)
            .value
    };
    checks.push(check(
        "reported edge norm matches remeasurement",
        (edge_norm - cert.edge_norm()).abs() <= cfg.eq_tol,
        (edge_norm - cert.edge_norm()).abs(),
        cfg.eq_tol,
    ));
    checks.push(check(
        "edge norm within claimed bound",
        edge_norm <= cert.edge_bound() + cfg.eq_tol,
        edge_norm,
        cert.edge_bound() + cfg.eq_tol,
    ));

    let witness = cert.norm_witness();
    let mut remeasured = Vec::new();
    for step in cert.chain().windows(2) {
        remeasured.push(
            sub_operator(a, &step[1], &step[0])
                .expect("chain coordinates checked")
                .operator_norm(cfg)
                .value,
        );
    }
    let step_gap = if remeasured.len() == witness.block_norms.len() {
        remeasured
            .iter()
            .zip(&witness.block_norms)
            .map(|(m, w)| (m - w).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    checks.push(check(
        "chain step norms match witness",
        step_gap <= cfg.eq_tol,
        step_gap,
        cfg.eq_tol,
    ));
    let max_step = remeasured.iter().copied().fold(0.0, f64::max);
    checks.push(check(
        "chain step norms within claimed bound",
        max_step <= witness.block_bound + cfg.eq_tol,
        max_step,
        witness.block_bound + cfg.eq_tol,
    ));
    let op_norm = a.operator_norm(cfg).value;
    checks.push(check(
        "operator norm within claimed bound",
        op_norm <= witness.operator_bound + cfg.eq_tol,
        op_norm,
        witness.operator_bound + cfg.eq_tol,
    ));

    CertificateReport::finish(checks)
}

/// A sampled operator that violated a campaign's contract, serialized
/// completely enough to re-check it without the campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleDoc {
    pub trial: usize,
    /// Seed the trial's generator was built from.
    pub seed: u64,
    pub operator: OperatorDoc,
    pub violated: String,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsificationReport {
    pub meta: Meta,
    pub campaign: String,
    pub note: String,
    pub max_dim: usize,
    /// Highest power checked; zero when the campaign has no power loop.
    pub n_max: usize,
    pub trials: usize,
    /// Trials whose hypotheses held, so the conclusion was actually
    /// tested rather than vacuous.
    pub applicable: usize,
    pub counterexamples: Vec<CounterexampleDoc>,
    pub survived: bool,
}

struct CampaignSpec<'a> {
    campaign: &'a str,
    statement: &'a str,
    note: &'a str,
    max_dim: usize,
    n_max: usize,
}

fn run_campaign<F>(
    spec: CampaignSpec,
    trials: usize,
    seed: u64,
    cfg: &ToleranceConfig,
    trial: F,
) -> FalsificationReport
where
    F: Fn(usize, u64) -> (bool, Option<CounterexampleDoc>) + Sync,
{
    let results: Vec<(bool, Option<CounterexampleDoc>)> = (0..trials)
        .into_par_iter()
        .map(|i| trial(i, derive_seed(seed, i as u64)))
        .collect();
    let applicable = results.iter().filter(|r| r.0).count();
    let counterexamples: Vec<CounterexampleDoc> =
        results.into_iter().filter_map(|r| r.1).collect();
    let survived = counterexamples.is_empty();
    FalsificationReport {
        meta: Meta::new(spec.statement, seed, cfg),
        campaign: spec.campaign.to_string(),
        note: spec.note.to_string(),
        max_dim: spec.max_dim,
        n_max: spec.n_max,
        trials,
        applicable,
        counterexamples,
        survived,
    }
}

fn counterexample(
    trial: usize,
    seed: u64,
    op: &LatticeOperator<f64>,
    violated: &str,
    deviation: f64,
) -> CounterexampleDoc {
    CounterexampleDoc {
        trial,
        seed,
        operator: operator_to_doc(op),
        violated: violated.to_string(),
        deviation,
    }
}

/// Campaign for the orthogonal-projection claim over sampled positive
/// idempotents.
pub fn run_idempotent_campaign(
    n: usize,
    trials: usize,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<FalsificationReport> {
    let space = WeightedSpace::sequence(n)?;
    let spec = CampaignSpec {
        campaign: "idempotent",
        statement: "Prop 2.1",
        note: "families: band projections, rank-one idempotents, disjoint rank-one sums",
        max_dim: n,
        n_max: 0,
    };
    Ok(run_campaign(spec, trials, seed, cfg, |i, s| {
        let a = if i == 0 {
            LatticeOperator::identity(space.clone())
        } else {
            sample_one_idempotent(&space, s)
        };
        match check_idempotent_theorem(&a, cfg).expect("sampled idempotents are square") {
            IdempotentVerdict::TheoremHolds { .. } => (true, None),
            IdempotentVerdict::Counterexample {
                symmetry_gap,
                commutator_norm,
            } => (
                true,
                Some(counterexample(
                    i,
                    s,
                    &a,
                    "positive idempotent with nonnegative self-commutator must be an orthogonal projection",
                    symmetry_gap.max(commutator_norm),
                )),
            ),
            _ => (false, None),
        }
    }))
}

fn random_nonneg(space: &WeightedSpace, rng: &mut ChaCha8Rng) -> LatticeOperator<f64> {
    let n = space.dim();
    let style = rng.gen_range(0u32..4);
    let mut m = Mat::zeros(n, n);
    match style {
        // Symmetric: always satisfies the commutator hypothesis on
        // unweighted spaces.
        0 => {
            for i in 0..n {
                for j in i..n {
                    let v = rng.gen_range(0.0..1.0);
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
        }
        1 => {
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, rng.gen_range(0.0..1.0));
                }
            }
        }
        2 => {
            for i in 0..n {
                for j in 0..n {
                    if rng.gen_bool(0.35) {
                        m.set(i, j, rng.gen_range(0.0..1.0));
                    }
                }
            }
        }
        // Scaled permutation: normal-adjacent but asymmetric.
        _ => {
            let mut cols: Vec<usize> = (0..n).collect();
            cols.shuffle(rng);
            for (i, &j) in cols.iter().enumerate() {
                m.set(i, j, rng.gen_range(0.1..2.0));
            }
        }
    }
    LatticeOperator::new(space.clone(), space.clone(), m).expect("square shape")
}

/// Campaign for the claim that a nonnegative self-commutator of a
/// nonnegative operator vanishes (finite stand-in for power
/// compactness: every operator qualifies).
pub fn run_power_compact_campaign(
    max_dim: usize,
    trials: usize,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<FalsificationReport> {
    if max_dim < 2 {
        return Err(LatticeError::Domain(
            "power compact campaign needs max_dim >= 2".to_string(),
        ));
    }
    let spaces: Vec<WeightedSpace> = (2..=max_dim)
        .map(WeightedSpace::sequence)
        .collect::<Result<_>>()?;
    let spec = CampaignSpec {
        campaign: "powercompact",
        statement: "Prop 2.2",
        note: "finite stand-in: every operator on a finite-dimensional space is power compact",
        max_dim,
        n_max: 0,
    };
    Ok(run_campaign(spec, trials, seed, cfg, |i, s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let space = &spaces[rng.gen_range(0..spaces.len())];
        let a = random_nonneg(space, &mut rng);
        match check_finite_selfcommutator_vanishes(&a, cfg)
            .expect("sampled operators are square and nonnegative")
        {
            PowerCompactVerdict::HypothesisNotMet { .. } => (false, None),
            PowerCompactVerdict::Vanishes { .. } => (true, None),
            PowerCompactVerdict::Counterexample {
                commutator_norm, ..
            } => (
                true,
                Some(counterexample(
                    i,
                    s,
                    &a,
                    "nonnegative self-commutator of a nonnegative operator must vanish",
                    commutator_norm,
                )),
            ),
        }
    }))
}

/// Campaign for the entrywise power inequality on operators whose
/// self-commutator is entrywise nonnegative.
pub fn run_power_inequality_campaign(
    max_dim: usize,
    trials: usize,
    n_max: usize,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<FalsificationReport> {
    if max_dim < 2 {
        return Err(LatticeError::Domain(
            "power inequality campaign needs max_dim >= 2".to_string(),
        ));
    }
    let spaces: Vec<WeightedSpace> = (2..=max_dim)
        .map(WeightedSpace::sequence)
        .collect::<Result<_>>()?;
    let spec = CampaignSpec {
        campaign: "powerineq",
        statement: "Sec 2",
        note: "entrywise order; tolerance scaled by the squared operator norm per power",
        max_dim,
        n_max,
    };
    Ok(run_campaign(spec, trials, seed, cfg, |i, s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let space = &spaces[rng.gen_range(0..spaces.len())];
        let a = random_nonneg(space, &mut rng);
        match check_power_inequality(&a, n_max, cfg)
            .expect("sampled operators are square and nonnegative")
        {
            PowerInequalityVerdict::Inapplicable { .. } => (false, None),
            PowerInequalityVerdict::Holds { .. } => (true, None),
            PowerInequalityVerdict::Counterexample {
                power,
                violation,
                contract,
            } => (
                true,
                Some(counterexample(
                    i,
                    s,
                    &a,
                    &format!("power inequality ({contract}) at power {power}"),
                    violation,
                )),
            ),
        }
    }))
}

/// Campaign cross-checking the trace verdict against a direct trace
/// read-off on sampled nonnegative diagonals.
pub fn run_trace_campaign(
    max_dim: usize,
    trials: usize,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<FalsificationReport> {
    if max_dim < 1 {
        return Err(LatticeError::Domain(
            "trace campaign needs max_dim >= 1".to_string(),
        ));
    }
    let spec = CampaignSpec {
        campaign: "trace",
        statement: "Thm 5.4",
        note: "diagonal targets; positive trace rules out commutator representations",
        max_dim,
        n_max: 0,
    };
    Ok(run_campaign(spec, trials, seed, cfg, |i, s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let n = rng.gen_range(1..=max_dim);
        let family = rng.gen_range(0u32..4);
        let entries: Vec<f64> = match family {
            0 => vec![0.0; n],
            1 => (0..n)
                .map(|_| {
                    if rng.gen_bool(0.4) {
                        0.0
                    } else {
                        rng.gen_range(0.0..2.0)
                    }
                })
                .collect(),
            2 => (0..n).map(|_| rng.gen_range(0.1..2.0)).collect(),
            _ => {
                let delta = rng.gen_range(0.1..2.0);
                vec![delta; n]
            }
        };
        let op = DiagonalSpec::on_sequence(entries.clone())
            .expect("entries are nonnegative")
            .as_operator();
        let verdict = trace_obstruction(&op).expect("diagonal nonnegative input");
        let trace: f64 = entries.iter().sum();
        let consistent = match &verdict {
            TraceVerdict::NonCommutator { delta, .. } => {
                trace > 0.0
                    && (*delta
                        - entries.iter().copied().fold(f64::INFINITY, f64::min))
                    .abs()
                        == 0.0
            }
            TraceVerdict::NoObstruction => trace == 0.0,
        };
        let applicable = matches!(verdict, TraceVerdict::NonCommutator { .. });
        if consistent {
            (applicable, None)
        } else {
            (
                applicable,
                Some(counterexample(
                    i,
                    s,
                    &op,
                    "trace verdict disagrees with direct trace read-off",
                    trace,
                )),
            )
        }
    }))
}

/// Re-runs the violated check on a counterexample's serialized
/// operator; true when the violation reproduces. This is the audit
/// path: a report is only as good as its counterexamples' replays.
pub fn reverify_counterexample(
    report: &FalsificationReport,
    ce: &CounterexampleDoc,
) -> Result<bool> {
    let a: LatticeOperator<f64> = operator_from_doc(&ce.operator, None)?;
    let cfg = &report.meta.tolerances;
    Ok(match report.campaign.as_str() {
        "idempotent" => matches!(
            check_idempotent_theorem(&a, cfg)?,
            IdempotentVerdict::Counterexample { .. }
        ),
        "powercompact" => matches!(
            check_finite_selfcommutator_vanishes(&a, cfg)?,
            PowerCompactVerdict::Counterexample { .. }
        ),
        "powerineq" => matches!(
            check_power_inequality(&a, report.n_max, cfg)?,
            PowerInequalityVerdict::Counterexample { .. }
        ),
        "trace" => {
            let verdict = trace_obstruction(&a)?;
            let trace: f64 = a.entries().diag().iter().map(|v| v.to_f64()).sum();
            match verdict {
                TraceVerdict::NonCommutator { .. } => trace <= 0.0,
                TraceVerdict::NoObstruction => trace > 0.0,
            }
        }
        other => {
            return Err(LatticeError::Domain(format!(
                "unknown campaign {other:?}"
            )))
        }
    })
}

fn require_endomorphism<S: Scalar>(a: &LatticeOperator<S>) -> Result<()> {
    if a.is_endomorphism() {
        Ok(())
    } else {
        Err(LatticeError::NotEndomorphism {
            domain: a.domain().to_string(),
            codomain: a.codomain().to_string(),
        })
    }
}

fn require_entrywise_nonneg<S: Scalar>(
    a: &LatticeOperator<S>,
    cfg: &ToleranceConfig,
) -> Result<()> {
    let pos = a.is_positive(cfg);
    if pos.positive {
        Ok(())
    } else {
        Err(LatticeError::Domain(format!(
            "operator must be entrywise nonnegative; entry ({}, {}) = {}",
            pos.witness.row, pos.witness.col, pos.witness.value
        )))
    }
}

fn min_entry<S: Scalar>(op: &LatticeOperator<S>) -> f64 {
    let mut min = f64::INFINITY;
    for (_, _, v) in op.entries().entries() {
        min = min.min(v.to_f64());
    }
    min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selfcomm::certificate::{build_block_shift, lemma_block_shift};
    use crate::selfcomm::partition::partition_diagonal;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn seq_op(rows: Vec<Vec<f64>>) -> LatticeOperator<f64> {
        let n = rows.len();
        let space = WeightedSpace::sequence(n).unwrap();
        LatticeOperator::new(space.clone(), space, Mat::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn idempotent_band_projection_passes() {
        let a = seq_op(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        assert!(matches!(
            check_idempotent_theorem(&a, &cfg()).unwrap(),
            IdempotentVerdict::TheoremHolds { .. }
        ));
    }

    #[test]
    fn idempotent_rank_one_lands_in_negative_commutator_case() {
        // x = (1,1), f = (1,0): idempotent, but the self-commutator
        // picks up a negative entry, so the claim is silent here.
        let a = seq_op(vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(
            check_idempotent_theorem(&a, &cfg()).unwrap(),
            IdempotentVerdict::CommutatorNotPositive { .. }
        ));
        let c = a.self_commutator().unwrap();
        assert_eq!(
            c.entries().diag(),
            vec![1.0, -1.0]
        );
        assert_eq!(*c.entries().get(0, 1), -1.0);
        assert_eq!(*c.entries().get(1, 0), -1.0);
    }

    #[test]
    fn idempotent_zero_and_misfits() {
        let zero = seq_op(vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(
            check_idempotent_theorem(&zero, &cfg()).unwrap(),
            IdempotentVerdict::TheoremHolds { .. }
        ));

        let doubled = seq_op(vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
        assert!(matches!(
            check_idempotent_theorem(&doubled, &cfg()).unwrap(),
            IdempotentVerdict::NotIdempotent { .. }
        ));

        let negative = seq_op(vec![vec![1.0, 0.0], vec![-0.5, 0.0]]);
        assert!(matches!(
            check_idempotent_theorem(&negative, &cfg()).unwrap(),
            IdempotentVerdict::NotPositive { .. }
        ));
    }

    #[test]
    fn sampler_emits_verified_idempotents() {
        let ops = sample_positive_idempotents(5, 40, 11).unwrap();
        assert_eq!(ops.len(), 40);
        assert_eq!(ops[0], LatticeOperator::identity(WeightedSpace::sequence(5).unwrap()));
        for op in &ops {
            assert!(op.is_positive(&cfg()).positive);
            assert!(op.compose(op).unwrap().max_deviation(op) <= 1e-12);
        }
        let again = sample_positive_idempotents(5, 40, 11).unwrap();
        assert_eq!(ops, again);
        let other = sample_positive_idempotents(5, 40, 12).unwrap();
        assert_ne!(ops, other);
    }

    #[test]
    fn sampler_count_zero_is_empty() {
        assert!(sample_positive_idempotents(3, 0, 1).unwrap().is_empty());
    }

    #[test]
    fn powercompact_symmetric_vanishes_exactly() {
        let a = seq_op(vec![vec![1.0, 2.0], vec![2.0, 0.5]]);
        match check_finite_selfcommutator_vanishes(&a, &cfg()).unwrap() {
            PowerCompactVerdict::Vanishes { commutator_norm } => {
                assert_eq!(commutator_norm, 0.0)
            }
            v => panic!("expected Vanishes, got {v:?}"),
        }
    }

    #[test]
    fn powercompact_truncated_shift_is_vacuous() {
        let n = 4;
        let space = WeightedSpace::sequence(n).unwrap();
        let m = Mat::from_fn(n, n, |i, j| if i == j + 1 { 1.0 } else { 0.0 });
        let a = LatticeOperator::new(space.clone(), space, m).unwrap();
        assert_eq!(
            a.self_commutator().unwrap().entries().diag(),
            vec![1.0, 0.0, 0.0, -1.0]
        );
        assert!(matches!(
            check_finite_selfcommutator_vanishes(&a, &cfg()).unwrap(),
            PowerCompactVerdict::HypothesisNotMet { .. }
        ));
    }

    #[test]
    fn powercompact_rejects_negative_entries() {
        let a = seq_op(vec![vec![1.0, -1.0], vec![0.0, 1.0]]);
        assert!(matches!(
            check_finite_selfcommutator_vanishes(&a, &cfg()),
            Err(LatticeError::Domain(_))
        ));
    }

    #[test]
    fn power_inequality_on_symmetric_operator_holds() {
        let a = seq_op(vec![
            vec![1.0, 0.3, 0.0],
            vec![0.3, 0.2, 1.1],
            vec![0.0, 1.1, 0.7],
        ]);
        assert!(matches!(
            check_power_inequality(&a, 5, &cfg()).unwrap(),
            PowerInequalityVerdict::Holds { .. }
        ));
    }

    #[test]
    fn power_inequality_weighted_diagonal_holds() {
        let space = WeightedSpace::dyadic(3).unwrap();
        let m = Mat::diagonal(&[2.0, 1.0, 0.5]);
        let a = LatticeOperator::new(space.clone(), space, m).unwrap();
        match check_power_inequality(&a, 4, &cfg()).unwrap() {
            PowerInequalityVerdict::Holds { max_entry_gap, .. } => {
                assert!(max_entry_gap <= 1e-12)
            }
            v => panic!("expected Holds, got {v:?}"),
        }
    }

    #[test]
    fn power_inequality_scaled_permutation_is_inapplicable() {
        // diag(2,1) times the swap: self-commutator diag(-3, 3).
        let a = seq_op(vec![vec![0.0, 2.0], vec![1.0, 0.0]]);
        match check_power_inequality(&a, 4, &cfg()).unwrap() {
            PowerInequalityVerdict::Inapplicable {
                min_commutator_entry,
            } => assert_eq!(min_commutator_entry, -3.0),
            v => panic!("expected Inapplicable, got {v:?}"),
        }
    }

    #[test]
    fn power_inequality_region_logic_bites_on_truncated_shift() {
        let n = 4;
        let space = WeightedSpace::sequence(n).unwrap();
        let m = Mat::from_fn(n, n, |i, j| if i == j + 1 { 1.0 } else { 0.0 });
        let a = LatticeOperator::new(space.clone(), space, m).unwrap();
        // Away from the edge the inequality survives the truncation...
        assert!(matches!(
            check_power_inequality_on(&a, &[0, 1], 2, &cfg()).unwrap(),
            PowerInequalityVerdict::Holds { .. }
        ));
        // ...but the coordinate 2 entry of (A*)^2 A^2 - (A*A)^2 is -1.
        match check_power_inequality_on(&a, &[0, 1, 2], 2, &cfg()).unwrap() {
            PowerInequalityVerdict::Counterexample {
                power, violation, ..
            } => {
                assert_eq!(power, 2);
                assert_eq!(violation, 1.0);
            }
            v => panic!("expected Counterexample, got {v:?}"),
        }
    }

    #[test]
    fn certificate_power_inequality_holds_on_shrinking_blocks() {
        let d = vec![1.0, 0.5, 0.25, 0.125];
        let p = partition_diagonal(&d, 5).unwrap();
        let cert = build_block_shift(&p, &cfg()).unwrap();
        assert!(matches!(
            check_certificate_power_inequality(&cert, 3, &cfg()).unwrap(),
            PowerInequalityVerdict::Holds { .. }
        ));

        let t = DiagonalSpec::on_sequence(vec![1.0, 0.75]).unwrap();
        let cert = lemma_block_shift(&t, 5, &cfg()).unwrap();
        assert!(matches!(
            check_certificate_power_inequality(&cert, 4, &cfg()).unwrap(),
            PowerInequalityVerdict::Holds { .. }
        ));
    }

    #[test]
    fn trace_verdicts() {
        let id3: LatticeOperator<f64> =
            LatticeOperator::identity(WeightedSpace::sequence(3).unwrap());
        match trace_obstruction(&id3).unwrap() {
            TraceVerdict::NonCommutator { trace, delta } => {
                assert_eq!(trace, 3.0);
                assert_eq!(delta, 1.0);
            }
            v => panic!("expected NonCommutator, got {v:?}"),
        }

        let half_zero = DiagonalSpec::on_sequence(vec![1.0, 0.0]).unwrap().as_operator();
        match trace_obstruction(&half_zero).unwrap() {
            TraceVerdict::NonCommutator { trace, delta } => {
                assert_eq!(trace, 1.0);
                assert_eq!(delta, 0.0);
            }
            v => panic!("expected NonCommutator, got {v:?}"),
        }

        let zero = DiagonalSpec::on_sequence(vec![0.0, 0.0]).unwrap().as_operator();
        assert_eq!(trace_obstruction(&zero).unwrap(), TraceVerdict::NoObstruction);

        let off_diag = seq_op(vec![vec![1.0, 0.5], vec![0.0, 1.0]]);
        assert!(matches!(
            trace_obstruction(&off_diag),
            Err(LatticeError::Domain(_))
        ));

        let negative = seq_op(vec![vec![-1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(
            trace_obstruction(&negative),
            Err(LatticeError::NegativeDiagonal { .. })
        ));
    }

    #[test]
    fn verify_certificate_passes_for_shift() {
        let p = partition_diagonal(&[1.0, 0.5], 3).unwrap();
        let cert = build_block_shift(&p, &cfg()).unwrap();
        let report = verify_certificate(&cert, &cfg());
        assert!(report.all_passed, "failing checks: {:?}", report.checks);
        assert!(report.checks.len() >= 9);
    }

    #[test]
    fn verify_certificate_flags_tampered_entry() {
        let p = partition_diagonal(&[1.0, 0.5], 3).unwrap();
        let cert = build_block_shift(&p, &cfg()).unwrap();
        let mut doc = cert.to_doc(0, &cfg());
        match &mut doc.operator.matrix {
            crate::report::MatrixPayload::Inline { rows } => {
                // Negate the first subdiagonal entry.
                rows[1][0] = format!("-{}", rows[1][0]);
            }
            _ => unreachable!("to_doc inlines matrices"),
        }
        let tampered: SelfCommutatorCertificate<f64> =
            SelfCommutatorCertificate::from_doc(&doc, None).unwrap();
        let report = verify_certificate(&tampered, &cfg());
        assert!(!report.all_passed);
        let pos = report.check("operator entrywise nonnegative").unwrap();
        assert!(!pos.passed);
        assert!(pos.measured < 0.0);
    }

    #[test]
    fn verify_certificate_accepts_zero_certificate() {
        let t = DiagonalSpec::on_sequence(vec![0.0, 0.0]).unwrap();
        let cert = lemma_block_shift(&t, 3, &cfg()).unwrap();
        let report = verify_certificate(&cert, &cfg());
        assert!(report.all_passed, "failing checks: {:?}", report.checks);
    }

    #[test]
    fn idempotent_campaign_survives_and_is_deterministic() {
        let a = run_idempotent_campaign(4, 80, 9, &cfg()).unwrap();
        let b = run_idempotent_campaign(4, 80, 9, &cfg()).unwrap();
        assert!(a.survived);
        assert!(a.applicable >= 1);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn power_compact_campaign_survives() {
        let r = run_power_compact_campaign(4, 300, 3, &cfg()).unwrap();
        assert!(r.survived);
        assert!(r.applicable >= 1, "no applicable trials at this seed");
        assert_eq!(r.trials, 300);
    }

    #[test]
    fn power_inequality_campaign_survives() {
        let r = run_power_inequality_campaign(4, 150, 4, 5, &cfg()).unwrap();
        assert!(r.survived);
        assert!(r.applicable >= 1);
        assert_eq!(r.n_max, 4);
    }

    #[test]
    fn trace_campaign_survives() {
        let r = run_trace_campaign(6, 200, 21, &cfg()).unwrap();
        assert!(r.survived);
        assert!(r.applicable >= 1);
    }

    #[test]
    fn plain_trace_of_self_commutator_vanishes_on_weighted_spaces() {
        let spaces = vec![
            WeightedSpace::sequence(5).unwrap(),
            WeightedSpace::dyadic(4).unwrap(),
            WeightedSpace::direct_sum(vec![
                WeightedSpace::sequence(2).unwrap(),
                WeightedSpace::dyadic(3).unwrap(),
            ])
            .unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for space in spaces {
            for _ in 0..20 {
                let a = random_nonneg(&space, &mut rng);
                let c = a.self_commutator().unwrap();
                let trace: f64 = c.entries().diag().iter().sum();
                assert!(trace.abs() <= 1e-10 * a.max_abs().powi(2).max(1.0));
            }
        }
    }

    #[test]
    fn reverify_rejects_a_non_violating_record() {
        let report = run_power_compact_campaign(3, 10, 2, &cfg()).unwrap();
        let identity = LatticeOperator::identity(WeightedSpace::sequence(3).unwrap());
        let fake = counterexample(0, 0, &identity, "test", 1.0);
        assert!(!reverify_counterexample(&report, &fake).unwrap());
    }
}

//! Realizing diagonals as self-commutators of positive operators, with
//! truncation accounting.
//!
//! Every construction here is a chain of weighted shifts: coordinate
//! block 0 feeds block 1 feeds block 2 and so on, with entries chosen so
//! that each step's `B*B` reproduces the intended diagonal on its
//! domain block. The commutator then equals the target everywhere
//! except the last block of the chain, where the truncation dumps
//! `-B B*` of the final step. A certificate never hides that block: it
//! reports the verified region, the edge region, the measured edge norm
//! and the claimed bounds side by side.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constructions::{build_x, build_y};
use crate::diagonal::DiagonalSpec;
use crate::error::{LatticeError, Result};
use crate::matrix::Mat;
use crate::operator::{equal_half_split, LatticeOperator, NormEstimate};
use crate::report::{operator_from_doc, operator_to_csv_doc, operator_to_doc, Meta, OperatorDoc};
use crate::scalar::{dyadic_weight, Rat, Scalar};
use crate::space::{SpaceKind, WeightedSpace};
use crate::tolerance::ToleranceConfig;

use super::partition::PartitionResult;

/// Measured norms next to the bounds the construction promises.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormWitness {
    pub operator_norm: NormEstimate,
    /// Claimed upper bound for `||A||`.
    pub operator_bound: f64,
    /// Measured norm of each chain step, in chain order.
    pub block_norms: Vec<f64>,
    /// Claimed upper bound for every chain step norm.
    pub block_bound: f64,
}

/// A positive operator `A` together with the region where `[A*, A]`
/// provably equals the target diagonal, and explicit accounting for the
/// truncation edge.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfCommutatorCertificate<S> {
    operator: LatticeOperator<S>,
    target: LatticeOperator<S>,
    verified_region: Vec<usize>,
    edge_region: Vec<usize>,
    /// Coordinate blocks of the shift chain, in order; consecutive
    /// blocks delimit the nonzero sub-blocks of `A`. The last block is
    /// the edge.
    chain: Vec<Vec<usize>>,
    residual_verified: f64,
    edge_norm: f64,
    edge_bound: f64,
    norm_witness: NormWitness,
    /// Where original coordinate `i` now lives in the certificate's
    /// basis (identity when no relabeling happened).
    permutation: Vec<usize>,
    statement: String,
}

impl<S: Scalar> SelfCommutatorCertificate<S> {
    pub fn operator(&self) -> &LatticeOperator<S> {
        &self.operator
    }

    pub fn target(&self) -> &LatticeOperator<S> {
        &self.target
    }

    pub fn commutator(&self) -> LatticeOperator<S> {
        self.operator
            .self_commutator()
            .expect("certificate operators are endomorphisms")
    }

    pub fn verified_region(&self) -> &[usize] {
        &self.verified_region
    }

    pub fn edge_region(&self) -> &[usize] {
        &self.edge_region
    }

    pub fn chain(&self) -> &[Vec<usize>] {
        &self.chain
    }

    pub fn residual_verified(&self) -> f64 {
        self.residual_verified
    }

    pub fn edge_norm(&self) -> f64 {
        self.edge_norm
    }

    pub fn edge_bound(&self) -> f64 {
        self.edge_bound
    }

    pub fn norm_witness(&self) -> &NormWitness {
        &self.norm_witness
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn statement(&self) -> &str {
        &self.statement
    }

    /// Inline-matrix JSON document.
    pub fn to_doc(&self, seed: u64, cfg: &ToleranceConfig) -> CertificateDoc {
        self.doc_with(operator_to_doc(&self.operator), operator_to_doc(&self.target), seed, cfg)
    }

    /// JSON document with the two matrices written as CSV files
    /// (`A.csv`, `target.csv`) under `dir`.
    pub fn to_doc_with_csv(
        &self,
        seed: u64,
        cfg: &ToleranceConfig,
        dir: &Path,
    ) -> Result<CertificateDoc> {
        self.to_doc_with_csv_names(seed, cfg, dir, "A.csv", "target.csv")
    }

    pub(crate) fn to_doc_with_csv_names(
        &self,
        seed: u64,
        cfg: &ToleranceConfig,
        dir: &Path,
        operator_name: &str,
        target_name: &str,
    ) -> Result<CertificateDoc> {
        let a = operator_to_csv_doc(&self.operator, dir, operator_name)?;
        let t = operator_to_csv_doc(&self.target, dir, target_name)?;
        Ok(self.doc_with(a, t, seed, cfg))
    }

    fn doc_with(
        &self,
        operator: OperatorDoc,
        target: OperatorDoc,
        seed: u64,
        cfg: &ToleranceConfig,
    ) -> CertificateDoc {
        CertificateDoc {
            meta: Meta::new(&self.statement, seed, cfg),
            operator,
            target,
            verified_region: self.verified_region.clone(),
            edge_region: self.edge_region.clone(),
            chain: self.chain.clone(),
            residual_verified: self.residual_verified,
            edge_norm: self.edge_norm,
            edge_bound: self.edge_bound,
            norm_witness: self.norm_witness.clone(),
            permutation: self.permutation.clone(),
        }
    }

    /// Rebuilds a certificate from its document; `base` resolves CSV
    /// references. The claims are taken at face value here; run the
    /// verifier to re-derive them.
    pub fn from_doc(doc: &CertificateDoc, base: Option<&Path>) -> Result<Self> {
        Ok(SelfCommutatorCertificate {
            operator: operator_from_doc(&doc.operator, base)?,
            target: operator_from_doc(&doc.target, base)?,
            verified_region: doc.verified_region.clone(),
            edge_region: doc.edge_region.clone(),
            chain: doc.chain.clone(),
            residual_verified: doc.residual_verified,
            edge_norm: doc.edge_norm,
            edge_bound: doc.edge_bound,
            norm_witness: doc.norm_witness.clone(),
            permutation: doc.permutation.clone(),
            statement: doc.meta.statement.clone(),
        })
    }
}

/// Serialized certificate. The matrices travel inline or as CSV
/// references next to the JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub meta: Meta,
    #[serde(rename = "A")]
    pub operator: OperatorDoc,
    pub target: OperatorDoc,
    pub verified_region: Vec<usize>,
    pub edge_region: Vec<usize>,
    pub chain: Vec<Vec<usize>>,
    pub residual_verified: f64,
    pub edge_norm: f64,
    pub edge_bound: f64,
    pub norm_witness: NormWitness,
    pub permutation: Vec<usize>,
}

/// Entry making a chain step pull back to `t` on its domain coordinate:
/// `sqrt(t * w_col / w_row)`, exact when the scalar type can take the
/// root.
fn chain_entry<S: Scalar>(t: &S, w_col: &Rat, w_row: &Rat) -> Result<S> {
    let scaled = t.clone() * S::from_ratio(&(w_col.clone() / w_row.clone()));
    scaled.try_sqrt().ok_or_else(|| LatticeError::InexactSqrt {
        value: scaled.to_string(),
    })
}

pub(crate) fn sub_space(space: &WeightedSpace, coords: &[usize]) -> Result<WeightedSpace> {
    WeightedSpace::with_weights(coords.iter().map(|&c| space.weight(c).clone()).collect())
}

pub(crate) fn sub_operator<S: Scalar>(
    op: &LatticeOperator<S>,
    rows: &[usize],
    cols: &[usize],
) -> Result<LatticeOperator<S>> {
    LatticeOperator::new(
        sub_space(op.domain(), cols)?,
        sub_space(op.codomain(), rows)?,
        op.entries().submatrix(rows, cols),
    )
}

/// Measures everything a certificate reports: the commutator, the
/// residual off the edge, the edge block norm, and the chain step
/// norms against their claimed bounds.
#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble_certificate<S: Scalar>(
    operator: LatticeOperator<S>,
    target: LatticeOperator<S>,
    chain: Vec<Vec<usize>>,
    edge_bound: f64,
    operator_bound: f64,
    block_bound: f64,
    permutation: Vec<usize>,
    statement: String,
    cfg: &ToleranceConfig,
) -> Result<SelfCommutatorCertificate<S>> {
    let dim = operator.domain().dim();
    let commutator = operator.self_commutator()?;
    let residual = commutator.sub(&target);

    let edge_region: Vec<usize> = chain.last().cloned().unwrap_or_default();
    let mut in_edge = vec![false; dim];
    for &c in &edge_region {
        in_edge[c] = true;
    }
    let verified_region: Vec<usize> = (0..dim).filter(|&c| !in_edge[c]).collect();

    let mut residual_verified = 0.0f64;
    for (i, j, v) in residual.entries().entries() {
        if !(in_edge[i] && in_edge[j]) {
            residual_verified = residual_verified.max(v.abs().to_f64());
        }
    }

    let edge_norm = if edge_region.is_empty() {
        0.0
    } else {
        sub_operator(&residual, &edge_region, &edge_region)?
            .operator_norm(cfg)
            .value
    };

    let mut block_norms = Vec::new();
    for step in chain.windows(2) {
        block_norms.push(
            sub_operator(&operator, &step[1], &step[0])?
                .operator_norm(cfg)
                .value,
        );
    }

    let norm_witness = NormWitness {
        operator_norm: operator.operator_norm(cfg),
        operator_bound,
        block_norms,
        block_bound,
    };

    Ok(SelfCommutatorCertificate {
        operator,
        target,
        verified_region,
        edge_region,
        chain,
        residual_verified,
        edge_norm,
        edge_bound,
        norm_witness,
        permutation,
        statement,
    })
}

/// Shift certificate for a partitioned diagonal: `K` copies of a common
/// row space, step `n` carrying `sqrt` of the running row sum. The
/// commutator realizes rows `0..K-2` on the first `K-1` blocks; the
/// last block is the edge, the last row stays beyond this truncation.
pub fn build_block_shift<S: Scalar>(
    partition: &PartitionResult<S>,
    cfg: &ToleranceConfig,
) -> Result<SelfCommutatorCertificate<S>> {
    let k = partition.row_count();
    if k < 2 {
        return Err(LatticeError::TooFewBlocks { min: 2, got: k });
    }
    let m = partition.row_len();
    let rows = partition.rows();
    let omega = WeightedSpace::repeat(&WeightedSpace::sequence(m)?, k)?;
    let dim = k * m;

    // Running sums rows[0] + ... + rows[n], entrywise.
    let mut cumulative: Vec<Vec<S>> = Vec::with_capacity(k - 1);
    for n in 0..k - 1 {
        let mut next = if n == 0 {
            vec![S::zero(); m]
        } else {
            cumulative[n - 1].clone()
        };
        for j in 0..m {
            next[j] = next[j].clone() + rows[n][j].clone();
        }
        cumulative.push(next);
    }

    let mut a = Mat::zeros(dim, dim);
    for (n, cum) in cumulative.iter().enumerate() {
        for (j, c) in cum.iter().enumerate() {
            let row = (n + 1) * m + j;
            let col = n * m + j;
            a.set(row, col, chain_entry(c, omega.weight(col), omega.weight(row))?);
        }
    }
    let operator = LatticeOperator::new(omega.clone(), omega.clone(), a)?;

    let mut t = Mat::zeros(dim, dim);
    for (n, row) in rows.iter().enumerate().take(k - 1) {
        for (j, v) in row.iter().enumerate() {
            t.set(n * m + j, n * m + j, v.clone());
        }
    }
    let target = LatticeOperator::new(omega.clone(), omega, t)?;

    let chain: Vec<Vec<usize>> = (0..k).map(|n| (n * m..(n + 1) * m).collect()).collect();
    let edge_bound: f64 = rows.iter().take(k - 1).map(|r| r[0].to_f64()).sum();
    let shift_bound = (2.0 * partition.max_value().to_f64()).sqrt();
    let permutation = partition
        .assignment()
        .iter()
        .map(|&(row, pos)| row * m + pos)
        .collect();

    assemble_certificate(
        operator,
        target,
        chain,
        edge_bound,
        shift_bound,
        shift_bound,
        permutation,
        "Thm 4.1".to_string(),
        cfg,
    )
}

/// Certificate for `T` placed in the first of `copies` identical
/// blocks: every chain step is the entrywise square root of `T`, so the
/// commutator is `T` on block 0, `-T` on the last block, zero between.
pub fn lemma_block_shift<S: Scalar>(
    t: &DiagonalSpec<S>,
    copies: usize,
    cfg: &ToleranceConfig,
) -> Result<SelfCommutatorCertificate<S>> {
    if copies < 2 {
        return Err(LatticeError::TooFewBlocks { min: 2, got: copies });
    }
    let m = t.len();
    let omega = WeightedSpace::repeat(t.space(), copies)?;
    let dim = copies * m;

    let mut a = Mat::zeros(dim, dim);
    for c in 0..copies - 1 {
        for (i, v) in t.entries().iter().enumerate() {
            let row = (c + 1) * m + i;
            let col = c * m + i;
            a.set(row, col, chain_entry(v, omega.weight(col), omega.weight(row))?);
        }
    }
    let operator = LatticeOperator::new(omega.clone(), omega.clone(), a)?;

    let mut tm = Mat::zeros(dim, dim);
    for (i, v) in t.entries().iter().enumerate() {
        tm.set(i, i, v.clone());
    }
    let target = LatticeOperator::new(omega.clone(), omega, tm)?;

    let chain: Vec<Vec<usize>> = (0..copies).map(|c| (c * m..(c + 1) * m).collect()).collect();
    let max_t = t.max_entry().to_f64();
    let bound = max_t.sqrt();

    assemble_certificate(
        operator,
        target,
        chain,
        max_t,
        bound,
        bound,
        (0..dim).collect(),
        "Lemma 4.3".to_string(),
        cfg,
    )
}

/// Conjugates a certificate by the permutation exchanging the two
/// identical halves of its space. Everything transports exactly; what
/// was realized on the first half is now realized on the second.
pub fn conjugate_by_switch<S: Scalar>(
    cert: &SelfCommutatorCertificate<S>,
    cfg: &ToleranceConfig,
) -> Result<SelfCommutatorCertificate<S>> {
    let space = cert.operator.domain().clone();
    let half = equal_half_split(&space)?;
    let dim = space.dim();
    let sigma = |i: usize| if i < half { i + half } else { i - half };
    let perm: Vec<usize> = (0..dim).map(sigma).collect();

    let operator = cert.operator.reindex(&perm, space.clone(), &perm, space.clone())?;
    let target = cert.target.reindex(&perm, space.clone(), &perm, space)?;
    let chain: Vec<Vec<usize>> = cert
        .chain
        .iter()
        .map(|group| group.iter().map(|&c| sigma(c)).collect())
        .collect();
    let permutation = cert.permutation.iter().map(|&c| sigma(c)).collect();

    assemble_certificate(
        operator,
        target,
        chain,
        cert.edge_bound,
        cert.norm_witness.operator_bound,
        cert.norm_witness.block_bound,
        permutation,
        cert.statement.clone(),
        cfg,
    )
}

/// How a kernel split used its coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSplitReport {
    pub support: usize,
    pub kernel: usize,
    pub copies: usize,
    /// Kernel coordinates consumed as extra chain copies.
    pub used_kernel: usize,
    /// Coordinates appended because the kernel was too small.
    pub padding: usize,
    pub total_dim: usize,
}

/// Realizes a diagonal with zeros through its own kernel: coordinates
/// are relabeled support-first, the kernel supplies the `copies - 1`
/// extra chain blocks, and only if it is too small does the space grow
/// (sequence spaces pad with weight-1 coordinates, dyadic spaces with
/// deeper dyadic ones). Kernel coordinates the chain never touches stay
/// in the verified region: the commutator is zero there, as required.
pub fn kernel_split_selfcommutator<S: Scalar>(
    c: &DiagonalSpec<S>,
    copies: usize,
    cfg: &ToleranceConfig,
) -> Result<(SelfCommutatorCertificate<S>, KernelSplitReport)> {
    if copies < 2 {
        return Err(LatticeError::TooFewBlocks { min: 2, got: copies });
    }
    let dim = c.len();
    let support: Vec<usize> = (0..dim).filter(|&i| c.entries()[i] > S::zero()).collect();
    let kernel: Vec<usize> = (0..dim).filter(|&i| !(c.entries()[i] > S::zero())).collect();
    let s = support.len();
    let z = kernel.len();

    if s == 0 {
        let space = c.space().clone();
        let cert = assemble_certificate(
            LatticeOperator::zero(space.clone(), space.clone()),
            c.as_operator(),
            Vec::new(),
            0.0,
            0.0,
            0.0,
            (0..dim).collect(),
            "Thm 4.4".to_string(),
            cfg,
        )?;
        let report = KernelSplitReport {
            support: 0,
            kernel: z,
            copies,
            used_kernel: 0,
            padding: 0,
            total_dim: dim,
        };
        return Ok((cert, report));
    }

    let need = (copies - 1) * s;
    let padding = need.saturating_sub(z);
    let total_dim = dim + padding;

    let mut weights: Vec<Rat> = support
        .iter()
        .chain(kernel.iter())
        .map(|&i| c.space().weight(i).clone())
        .collect();
    for j in 0..padding {
        weights.push(match c.space().kind() {
            SpaceKind::DyadicStep => dyadic_weight(dim + 1 + j),
            _ => Rat::from_integer(1.into()),
        });
    }
    let space = WeightedSpace::with_weights(weights)?;

    let t: Vec<S> = support.iter().map(|&i| c.entries()[i].clone()).collect();
    let chain: Vec<Vec<usize>> = (0..copies).map(|g| (g * s..(g + 1) * s).collect()).collect();

    let mut a = Mat::zeros(total_dim, total_dim);
    for g in 0..copies - 1 {
        for (i, v) in t.iter().enumerate() {
            let row = (g + 1) * s + i;
            let col = g * s + i;
            a.set(row, col, chain_entry(v, space.weight(col), space.weight(row))?);
        }
    }
    let operator = LatticeOperator::new(space.clone(), space.clone(), a)?;

    let mut tm = Mat::zeros(total_dim, total_dim);
    for (i, v) in t.iter().enumerate() {
        tm.set(i, i, v.clone());
    }
    let target = LatticeOperator::new(space.clone(), space, tm)?;

    // Original coordinate -> its place in the support-first relabeling.
    let mut permutation = vec![0usize; dim];
    for (rank, &orig) in support.iter().enumerate() {
        permutation[orig] = rank;
    }
    for (rank, &orig) in kernel.iter().enumerate() {
        permutation[orig] = s + rank;
    }

    let max_t = c.max_entry().to_f64();
    let bound = max_t.sqrt();
    let cert = assemble_certificate(
        operator,
        target,
        chain,
        max_t,
        bound,
        bound,
        permutation,
        "Thm 4.4".to_string(),
        cfg,
    )?;
    let report = KernelSplitReport {
        support: s,
        kernel: z,
        copies,
        used_kernel: need.min(z),
        padding,
        total_dim,
    };
    Ok((cert, report))
}

/// Shift on `seq(n) + dyadic(depth)^(copies-1)`: the first step factors
/// the diagonal through the dyadic space, the remaining steps multiply
/// by its entrywise root. The commutator realizes `diag(d)` on the
/// sequence block; everything dyadic except the last copy is verified
/// zero.
pub fn mixed_identity_block<S: Scalar>(
    d: &DiagonalSpec<S>,
    depth: usize,
    copies: usize,
    cfg: &ToleranceConfig,
) -> Result<SelfCommutatorCertificate<S>> {
    if copies < 3 {
        return Err(LatticeError::TooFewBlocks { min: 3, got: copies });
    }
    let n = d.len();
    let x = build_x(d, depth)?;
    let y = build_y(d, depth)?;

    let mut components = vec![d.space().clone()];
    components.extend(std::iter::repeat(WeightedSpace::dyadic(depth)?).take(copies - 1));
    let omega = WeightedSpace::direct_sum(components)?;
    let dim = n + (copies - 1) * depth;

    let mut a = Mat::zeros(dim, dim);
    for j in 0..n {
        a.set(n + j, j, x.entries().get(j, j).clone());
    }
    for c in 1..copies - 1 {
        for j in 0..n {
            a.set(n + c * depth + j, n + (c - 1) * depth + j, y.entries().get(j, j).clone());
        }
    }
    let operator = LatticeOperator::new(omega.clone(), omega.clone(), a)?;

    let mut tm = Mat::zeros(dim, dim);
    for (j, v) in d.entries().iter().enumerate() {
        tm.set(j, j, v.clone());
    }
    let target = LatticeOperator::new(omega.clone(), omega, tm)?;

    let mut chain: Vec<Vec<usize>> = vec![(0..n).collect()];
    for c in 0..copies - 1 {
        chain.push((n + c * depth..n + (c + 1) * depth).collect());
    }

    let max_d = d.max_entry().to_f64();
    let bound = max_d.sqrt();
    let statement = if !d.is_empty() && d.entries().iter().all(|v| *v == S::one()) {
        "Example 5.1"
    } else {
        "Thm 4.1"
    };

    assemble_certificate(
        operator,
        target,
        chain,
        max_d,
        bound,
        bound,
        (0..dim).collect(),
        statement.to_string(),
        cfg,
    )
}

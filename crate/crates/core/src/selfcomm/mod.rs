//! Realizing central (diagonal) operators as self-commutators of
//! positive operators, and as sums of two of them.
//!
//! `partition` splits a diagonal into geometrically capped rows;
//! `certificate` turns rows, diagonals and kernels into shift
//! certificates; this module adds the two-block descriptor whose
//! diagonal is realized as a sum of two certified commutators on one
//! common space.

pub mod certificate;
pub mod partition;

pub use certificate::{
    build_block_shift, conjugate_by_switch, kernel_split_selfcommutator, lemma_block_shift,
    mixed_identity_block, CertificateDoc, KernelSplitReport, NormWitness,
    SelfCommutatorCertificate,
};
pub use partition::{partition_diagonal, PartitionResult};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagonal::DiagonalSpec;
use crate::error::{LatticeError, Result};
use crate::matrix::Mat;
use crate::operator::LatticeOperator;
use crate::report::{operator_to_csv_doc, operator_to_doc, Meta, OperatorDoc};
use crate::scalar::Scalar;
use crate::space::{SpaceKind, WeightedSpace};
use crate::tolerance::ToleranceConfig;

use certificate::assemble_certificate;

/// A central operator on a two-block space: one nonnegative diagonal
/// per block, each block a sequence or dyadic step space.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralOperatorDescriptor<S> {
    components: Vec<DiagonalSpec<S>>,
}

impl<S: Scalar> CentralOperatorDescriptor<S> {
    pub fn new(components: Vec<DiagonalSpec<S>>) -> Result<Self> {
        if components.is_empty() {
            return Err(LatticeError::BadDescriptor(
                "descriptor needs at least one component".into(),
            ));
        }
        for (i, c) in components.iter().enumerate() {
            match c.space().kind() {
                SpaceKind::Sequence | SpaceKind::DyadicStep => {}
                other => {
                    return Err(LatticeError::BadDescriptor(format!(
                        "component {i} must live on a sequence or dyadic block, got {} space",
                        other.tag()
                    )))
                }
            }
        }
        Ok(CentralOperatorDescriptor { components })
    }

    pub fn two_blocks(first: DiagonalSpec<S>, second: DiagonalSpec<S>) -> Result<Self> {
        CentralOperatorDescriptor::new(vec![first, second])
    }

    pub fn components(&self) -> &[DiagonalSpec<S>] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.iter().map(DiagonalSpec::len).sum()
    }

    /// All diagonal values, block by block.
    pub fn values(&self) -> Vec<S> {
        self.components
            .iter()
            .flat_map(|c| c.entries().iter().cloned())
            .collect()
    }

    pub fn space(&self) -> Result<WeightedSpace> {
        WeightedSpace::direct_sum(self.components.iter().map(|c| c.space().clone()).collect())
    }

    pub fn as_operator(&self) -> Result<LatticeOperator<S>> {
        let space = self.space()?;
        let values = self.values();
        LatticeOperator::new(space.clone(), space, Mat::diagonal(&values))
    }
}

/// Two certificates over one space whose verified commutators add up to
/// the descriptor's diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SumCertificates<S> {
    first: SelfCommutatorCertificate<S>,
    second: SelfCommutatorCertificate<S>,
    combined_target: LatticeOperator<S>,
    common_verified: Vec<usize>,
    sum_residual: f64,
    /// Descriptor coordinate -> coordinate in the certificates' space.
    embedding: Vec<usize>,
    statement: String,
}

impl<S: Scalar> SumCertificates<S> {
    pub fn first(&self) -> &SelfCommutatorCertificate<S> {
        &self.first
    }

    pub fn second(&self) -> &SelfCommutatorCertificate<S> {
        &self.second
    }

    pub fn combined_target(&self) -> &LatticeOperator<S> {
        &self.combined_target
    }

    pub fn common_verified(&self) -> &[usize] {
        &self.common_verified
    }

    pub fn sum_residual(&self) -> f64 {
        self.sum_residual
    }

    pub fn embedding(&self) -> &[usize] {
        &self.embedding
    }

    pub fn statement(&self) -> &str {
        &self.statement
    }

    pub fn to_doc(&self, seed: u64, cfg: &ToleranceConfig) -> SumDoc {
        SumDoc {
            meta: Meta::new(&self.statement, seed, cfg),
            first: self.first.to_doc(seed, cfg),
            second: self.second.to_doc(seed, cfg),
            combined_target: operator_to_doc(&self.combined_target),
            common_verified: self.common_verified.clone(),
            sum_residual: self.sum_residual,
            embedding: self.embedding.clone(),
        }
    }

    pub fn to_doc_with_csv(
        &self,
        seed: u64,
        cfg: &ToleranceConfig,
        dir: &Path,
    ) -> Result<SumDoc> {
        Ok(SumDoc {
            meta: Meta::new(&self.statement, seed, cfg),
            first: self.first.to_doc_with_csv_names(seed, cfg, dir, "A1.csv", "target1.csv")?,
            second: self
                .second
                .to_doc_with_csv_names(seed, cfg, dir, "A2.csv", "target2.csv")?,
            combined_target: operator_to_csv_doc(&self.combined_target, dir, "combined_target.csv")?,
            common_verified: self.common_verified.clone(),
            sum_residual: self.sum_residual,
            embedding: self.embedding.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumDoc {
    pub meta: Meta,
    pub first: CertificateDoc,
    pub second: CertificateDoc,
    pub combined_target: OperatorDoc,
    pub common_verified: Vec<usize>,
    pub sum_residual: f64,
    pub embedding: Vec<usize>,
}

/// Realizes a two-block central operator as a sum of two certified
/// self-commutators on one common space.
///
/// Matching block kinds use two plain shift chains over `copies` copies
/// of the whole two-block space, one chain per component. A sequence
/// block next to a dyadic block instead factors the sequence component
/// through the dyadic copies (the dyadic depth must cover the sequence
/// dimension, one interval per basis vector; `copies >= 3`). The two
/// certificates share their edge block, so the intersection of the
/// verified regions is just the common complement.
pub fn sum_of_two_selfcommutators<S: Scalar>(
    desc: &CentralOperatorDescriptor<S>,
    copies: usize,
    cfg: &ToleranceConfig,
) -> Result<SumCertificates<S>> {
    let components = desc.components();
    if components.len() != 2 {
        return Err(LatticeError::BadDescriptor(format!(
            "sum of two needs exactly two blocks, got {}",
            components.len()
        )));
    }
    let (c1, c2) = (&components[0], &components[1]);
    let (n1, n2) = (c1.len(), c2.len());

    let (first, second, embedding) = match (c1.space().kind(), c2.space().kind()) {
        (SpaceKind::Sequence, SpaceKind::DyadicStep) => {
            let (a, b) = mixed_pair(c1, c2, copies, cfg)?;
            let embedding = (0..n1).chain(n1..n1 + n2).collect();
            (a, b, embedding)
        }
        (SpaceKind::DyadicStep, SpaceKind::Sequence) => {
            let (a, b) = mixed_pair(c2, c1, copies, cfg)?;
            // Descriptor order is (dyadic, sequence); the space puts the
            // sequence block first.
            let embedding = (n2..n2 + n1).chain(0..n2).collect();
            (b, a, embedding)
        }
        _ => {
            let h = WeightedSpace::direct_sum(vec![c1.space().clone(), c2.space().clone()])?;
            let mut t1 = c1.entries().to_vec();
            t1.extend(std::iter::repeat(S::zero()).take(n2));
            let mut t2 = vec![S::zero(); n1];
            t2.extend(c2.entries().iter().cloned());
            let first = lemma_block_shift(&DiagonalSpec::new(t1, h.clone())?, copies, cfg)?;
            let second = lemma_block_shift(&DiagonalSpec::new(t2, h)?, copies, cfg)?;
            (first, second, (0..n1 + n2).collect())
        }
    };

    finish_sum(desc, first, second, embedding, cfg)
}

/// The sequence-next-to-dyadic pair: the sequence diagonal rides the
/// mixed factorization, the dyadic diagonal rides a shift over the
/// dyadic copies, shifted past the sequence block.
fn mixed_pair<S: Scalar>(
    seq: &DiagonalSpec<S>,
    dyadic: &DiagonalSpec<S>,
    copies: usize,
    cfg: &ToleranceConfig,
) -> Result<(SelfCommutatorCertificate<S>, SelfCommutatorCertificate<S>)> {
    let depth = dyadic.len();
    if depth < seq.len() {
        return Err(LatticeError::BadDescriptor(format!(
            "dyadic block depth {depth} cannot factor a sequence block of dimension {}; \
             each basis vector needs its own interval",
            seq.len()
        )));
    }
    if copies < 3 {
        return Err(LatticeError::TooFewBlocks { min: 3, got: copies });
    }
    let first = mixed_identity_block(seq, depth, copies, cfg)?;
    let inner = lemma_block_shift(dyadic, copies - 1, cfg)?;
    let second = embed_after_prefix(seq.space(), &inner, cfg)?;
    Ok((first, second))
}

/// Re-expresses a certificate on `prefix + (its space)`, leaving the
/// prefix coordinates untouched (and therefore verified: the operator
/// is zero there).
fn embed_after_prefix<S: Scalar>(
    prefix: &WeightedSpace,
    cert: &SelfCommutatorCertificate<S>,
    cfg: &ToleranceConfig,
) -> Result<SelfCommutatorCertificate<S>> {
    let n = prefix.dim();
    let zero = LatticeOperator::zero(prefix.clone(), prefix.clone());
    let operator = LatticeOperator::direct_sum(&[zero.clone(), cert.operator().clone()])?;
    let target = LatticeOperator::direct_sum(&[zero, cert.target().clone()])?;
    let chain = cert
        .chain()
        .iter()
        .map(|group| group.iter().map(|&c| c + n).collect())
        .collect();
    let mut permutation: Vec<usize> = (0..n).collect();
    permutation.extend(cert.permutation().iter().map(|&c| c + n));
    assemble_certificate(
        operator,
        target,
        chain,
        cert.edge_bound(),
        cert.norm_witness().operator_bound,
        cert.norm_witness().block_bound,
        permutation,
        cert.statement().to_string(),
        cfg,
    )
}

fn finish_sum<S: Scalar>(
    desc: &CentralOperatorDescriptor<S>,
    first: SelfCommutatorCertificate<S>,
    second: SelfCommutatorCertificate<S>,
    embedding: Vec<usize>,
    cfg: &ToleranceConfig,
) -> Result<SumCertificates<S>> {
    let space = first.operator().domain().clone();
    debug_assert_eq!(space, *second.operator().domain());
    let dim = space.dim();

    let mut tm = Mat::zeros(dim, dim);
    for (value, &at) in desc.values().iter().zip(&embedding) {
        tm.set(at, at, value.clone());
    }
    let combined_target = LatticeOperator::new(space.clone(), space, tm)?;

    let mut in_edge = vec![false; dim];
    for &c in first.edge_region().iter().chain(second.edge_region()) {
        in_edge[c] = true;
    }
    let common_verified: Vec<usize> = (0..dim).filter(|&c| !in_edge[c]).collect();

    let sum = first.commutator().add(&second.commutator());
    let residual = sum.sub(&combined_target);
    let mut sum_residual = 0.0f64;
    for (i, j, v) in residual.entries().entries() {
        if !(in_edge[i] && in_edge[j]) {
            sum_residual = sum_residual.max(v.abs().to_f64());
        }
    }
    let _ = cfg;

    Ok(SumCertificates {
        first,
        second,
        combined_target,
        common_verified,
        sum_residual,
        embedding,
        statement: "Thm 5.2".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{parse_ratio, Rat};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn rat(s: &str) -> Rat {
        parse_ratio(s).unwrap()
    }

    #[test]
    fn two_sequence_blocks_sum_exactly() {
        // Both entries have rational roots, so everything stays exact.
        let desc = CentralOperatorDescriptor::two_blocks(
            DiagonalSpec::on_sequence(vec![rat("1")]).unwrap(),
            DiagonalSpec::on_sequence(vec![rat("1/4")]).unwrap(),
        )
        .unwrap();
        let sum = sum_of_two_selfcommutators(&desc, 3, &cfg()).unwrap();

        assert_eq!(sum.sum_residual(), 0.0);
        assert_eq!(sum.common_verified(), &[0, 1, 2, 3]);
        assert_eq!(sum.embedding(), &[0, 1]);
        assert_eq!(sum.statement(), "Thm 5.2");

        let total = sum.first().commutator().add(&sum.second().commutator());
        let diag = total.entries().diag();
        assert_eq!(diag[0], rat("1"));
        assert_eq!(diag[1], rat("1/4"));
        assert_eq!(diag[2], rat("0"));
        assert_eq!(diag[3], rat("0"));
        // The shared edge carries both truncation blocks.
        assert_eq!(diag[4], rat("-1"));
        assert_eq!(diag[5], rat("-1/4"));
    }

    #[test]
    fn two_sequence_blocks_with_irrational_roots() {
        let desc = CentralOperatorDescriptor::two_blocks(
            DiagonalSpec::on_sequence(vec![1.0]).unwrap(),
            DiagonalSpec::on_sequence(vec![0.5]).unwrap(),
        )
        .unwrap();
        let sum = sum_of_two_selfcommutators(&desc, 3, &cfg()).unwrap();

        assert!(sum.sum_residual() <= 1e-15);
        assert_eq!(sum.common_verified(), &[0, 1, 2, 3]);

        let total = sum.first().commutator().add(&sum.second().commutator());
        let diag = total.entries().diag();
        assert!((diag[0] - 1.0).abs() < 1e-15);
        assert!((diag[1] - 0.5).abs() < 1e-15);
        assert!(diag[2].abs() < 1e-15 && diag[3].abs() < 1e-15);
        assert!((diag[4] + 1.0).abs() < 1e-15);
        assert!((diag[5] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_descriptor_gives_zero_certificates() {
        let desc = CentralOperatorDescriptor::two_blocks(
            DiagonalSpec::on_sequence(vec![0.0, 0.0]).unwrap(),
            DiagonalSpec::on_sequence(vec![0.0]).unwrap(),
        )
        .unwrap();
        let sum = sum_of_two_selfcommutators(&desc, 2, &cfg()).unwrap();
        assert!(sum.first().operator().entries().is_zero());
        assert!(sum.second().operator().entries().is_zero());
        assert_eq!(sum.sum_residual(), 0.0);
    }

    #[test]
    fn sequence_next_to_dyadic_block() {
        let desc = CentralOperatorDescriptor::two_blocks(
            DiagonalSpec::on_sequence(vec![1.0]).unwrap(),
            DiagonalSpec::on_dyadic(vec![0.5]).unwrap(),
        )
        .unwrap();
        let sum = sum_of_two_selfcommutators(&desc, 3, &cfg()).unwrap();

        assert!(sum.sum_residual() <= 1e-12);
        assert_eq!(sum.common_verified(), &[0, 1]);
        assert_eq!(sum.embedding(), &[0, 1]);

        let total = sum.first().commutator().add(&sum.second().commutator());
        assert!((total.entries().get(0, 0) - 1.0).abs() < 1e-15);
        assert!((total.entries().get(1, 1) - 0.5).abs() < 1e-15);
        assert!((total.entries().get(2, 2) + 1.5).abs() < 1e-15);
    }

    #[test]
    fn dyadic_block_listed_first_is_flipped_into_place() {
        let desc = CentralOperatorDescriptor::two_blocks(
            DiagonalSpec::on_dyadic(vec![0.5, 0.25]).unwrap(),
            DiagonalSpec::on_sequence(vec![1.0]).unwrap(),
        )
        .unwrap();
        let sum = sum_of_two_selfcommutators(&desc, 3, &cfg()).unwrap();

        assert!(sum.sum_residual() <= 1e-12);
        assert_eq!(sum.embedding(), &[1, 2, 0]);
        assert_eq!(sum.common_verified(), &[0, 1, 2]);
        // first() still realizes the descriptor's first (dyadic) block.
        let c = sum.first().commutator();
        assert!((c.entries().get(1, 1) - 0.5).abs() < 1e-12);
        assert!((c.entries().get(2, 2) - 0.25).abs() < 1e-12);
        let d = sum.second().commutator();
        assert!((d.entries().get(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn descriptor_guards() {
        assert!(CentralOperatorDescriptor::<f64>::new(vec![]).is_err());

        let mixed_space = WeightedSpace::direct_sum(vec![
            WeightedSpace::sequence(1).unwrap(),
            WeightedSpace::dyadic(1).unwrap(),
        ])
        .unwrap();
        let on_sum = DiagonalSpec::new(vec![1.0, 1.0], mixed_space).unwrap();
        assert!(matches!(
            CentralOperatorDescriptor::new(vec![on_sum]),
            Err(LatticeError::BadDescriptor(_))
        ));

        let three = CentralOperatorDescriptor::new(vec![
            DiagonalSpec::on_sequence(vec![1.0]).unwrap(),
            DiagonalSpec::on_sequence(vec![1.0]).unwrap(),
            DiagonalSpec::on_sequence(vec![1.0]).unwrap(),
        ])
        .unwrap();
        assert!(matches!(
            sum_of_two_selfcommutators(&three, 3, &cfg()),
            Err(LatticeError::BadDescriptor(_))
        ));
    }

    #[test]
    fn mixed_route_guards() {
        let shallow = CentralOperatorDescriptor::two_blocks(
            DiagonalSpec::on_sequence(vec![1.0, 1.0, 1.0]).unwrap(),
            DiagonalSpec::on_dyadic(vec![0.5, 0.25]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            sum_of_two_selfcommutators(&shallow, 3, &cfg()),
            Err(LatticeError::BadDescriptor(_))
        ));

        let ok_but_flat = CentralOperatorDescriptor::two_blocks(
            DiagonalSpec::on_sequence(vec![1.0]).unwrap(),
            DiagonalSpec::on_dyadic(vec![0.5]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            sum_of_two_selfcommutators(&ok_but_flat, 2, &cfg()),
            Err(LatticeError::TooFewBlocks { min: 3, got: 2 })
        ));
    }

    #[test]
    fn sum_doc_round_trips() {
        let desc = CentralOperatorDescriptor::two_blocks(
            DiagonalSpec::on_sequence(vec![1.0]).unwrap(),
            DiagonalSpec::on_dyadic(vec![0.5]).unwrap(),
        )
        .unwrap();
        let sum = sum_of_two_selfcommutators(&desc, 3, &cfg()).unwrap();
        let doc = sum.to_doc(9, &cfg());
        let text = serde_json::to_string(&doc).unwrap();
        let parsed: SumDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, doc);
        assert_eq!(parsed.meta.statement, "Thm 5.2");
        assert_eq!(parsed.sum_residual, sum.sum_residual());
    }
}

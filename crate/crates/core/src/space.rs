//! Weighted coordinate spaces.
//!
//! A space is a finite list of strictly positive rational weights; the
//! inner product is `<x, y> = sum_k w_k x_k y_k` and the positive cone is
//! the entrywise-nonnegative orthant. Two models cover everything built
//! here:
//!
//! * sequence spaces: all weights 1;
//! * dyadic step spaces: weight `2^-k` at coordinate `k` (1-based), the
//!   coordinate `k` standing for the indicator of `[2^-k, 2^-k+1)`, so
//!   the weight is that interval's length.
//!
//! Direct sums concatenate weights and remember the summands; the kind
//! tag is derived from the weight pattern, so equality of spaces is
//! equality of weight lists.

use std::fmt;

use num_traits::One;

use crate::error::{LatticeError, Result};
use crate::scalar::{dyadic_weight, Rat, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Sequence,
    DyadicStep,
    DirectSum,
}

impl SpaceKind {
    pub fn tag(self) -> &'static str {
        match self {
            SpaceKind::Sequence => "sequence",
            SpaceKind::DyadicStep => "dyadic_step",
            SpaceKind::DirectSum => "direct_sum",
        }
    }
}

#[derive(Clone, Debug)]
pub struct WeightedSpace {
    weights: Vec<Rat>,
    kind: SpaceKind,
    blocks: Vec<WeightedSpace>,
}

impl PartialEq for WeightedSpace {
    /// Block structure is bookkeeping, not identity: operators compose
    /// whenever dimensions and weights agree.
    fn eq(&self, other: &Self) -> bool {
        self.weights == other.weights
    }
}

impl WeightedSpace {
    pub fn sequence(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(LatticeError::EmptySpace);
        }
        Ok(WeightedSpace {
            weights: vec![Rat::one(); dim],
            kind: SpaceKind::Sequence,
            blocks: Vec::new(),
        })
    }

    pub fn dyadic(depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(LatticeError::EmptySpace);
        }
        Ok(WeightedSpace {
            weights: (1..=depth).map(dyadic_weight).collect(),
            kind: SpaceKind::DyadicStep,
            blocks: Vec::new(),
        })
    }

    /// Arbitrary strictly positive weights; the kind tag is inferred.
    pub fn with_weights(weights: Vec<Rat>) -> Result<Self> {
        if weights.is_empty() {
            return Err(LatticeError::EmptySpace);
        }
        for (index, w) in weights.iter().enumerate() {
            if *w <= Rat::from_integer(0.into()) {
                return Err(LatticeError::NonPositiveWeight { index });
            }
        }
        let kind = infer_kind(&weights);
        Ok(WeightedSpace {
            weights,
            kind,
            blocks: Vec::new(),
        })
    }

    pub fn direct_sum(components: Vec<WeightedSpace>) -> Result<Self> {
        if components.is_empty() {
            return Err(LatticeError::EmptySpace);
        }
        if components.len() == 1 {
            return Ok(components.into_iter().next().unwrap());
        }
        let weights: Vec<Rat> = components
            .iter()
            .flat_map(|c| c.weights.iter().cloned())
            .collect();
        let kind = infer_kind(&weights);
        Ok(WeightedSpace {
            weights,
            kind,
            blocks: components,
        })
    }

    pub fn repeat(component: &WeightedSpace, copies: usize) -> Result<Self> {
        WeightedSpace::direct_sum(vec![component.clone(); copies])
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &Rat {
        &self.weights[i]
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(|w| f64::from_ratio(w)).collect()
    }

    /// Direct summands, or the space itself when atomic.
    pub fn blocks(&self) -> Vec<&WeightedSpace> {
        if self.blocks.is_empty() {
            vec![self]
        } else {
            self.blocks.iter().collect()
        }
    }

    /// Starting coordinate of each direct summand.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::new();
        let mut at = 0;
        for b in self.blocks() {
            offsets.push(at);
            at += b.dim();
        }
        offsets
    }

    pub fn dot<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        let mut acc = S::zero();
        for i in 0..x.len() {
            acc = acc + S::from_ratio(&self.weights[i]) * x[i].clone() * y[i].clone();
        }
        acc
    }

    pub fn norm_sq<S: Scalar>(&self, x: &[S]) -> S {
        self.dot(x, x)
    }

    /// Weighted l1 norm `sum_k w_k |x_k|`.
    pub fn l1_norm<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = S::zero();
        for i in 0..x.len() {
            acc = acc + S::from_ratio(&self.weights[i]) * x[i].abs();
        }
        acc
    }
}

fn infer_kind(weights: &[Rat]) -> SpaceKind {
    if weights.iter().all(|w| w.is_one()) {
        SpaceKind::Sequence
    } else if weights
        .iter()
        .enumerate()
        .all(|(i, w)| *w == dyadic_weight(i + 1))
    {
        SpaceKind::DyadicStep
    } else {
        SpaceKind::DirectSum
    }
}

impl fmt::Display for WeightedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpaceKind::Sequence => write!(f, "seq({})", self.dim()),
            SpaceKind::DyadicStep => write!(f, "dyadic({})", self.dim()),
            SpaceKind::DirectSum => {
                if self.blocks.is_empty() {
                    write!(f, "weighted({})", self.dim())
                } else {
                    write!(f, "sum[")?;
                    for (i, b) in self.blocks.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{b}")?;
                    }
                    write!(f, "]")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::parse_ratio;

    #[test]
    fn sequence_space_weights_are_one() {
        let h = WeightedSpace::sequence(4).unwrap();
        assert_eq!(h.dim(), 4);
        assert!(h.weights().iter().all(|w| w.is_one()));
        assert_eq!(h.kind(), SpaceKind::Sequence);
    }

    #[test]
    fn dyadic_weights_halve() {
        let h = WeightedSpace::dyadic(3).unwrap();
        let expect: Vec<Rat> = ["1/2", "1/4", "1/8"]
            .iter()
            .map(|s| parse_ratio(s).unwrap())
            .collect();
        assert_eq!(h.weights(), &expect[..]);
        assert_eq!(h.kind(), SpaceKind::DyadicStep);
    }

    #[test]
    fn direct_sum_concatenates_and_tags() {
        let seq = WeightedSpace::sequence(2).unwrap();
        let dy = WeightedSpace::dyadic(2).unwrap();
        let sum = WeightedSpace::direct_sum(vec![seq.clone(), dy.clone()]).unwrap();
        assert_eq!(sum.dim(), 4);
        assert_eq!(sum.kind(), SpaceKind::DirectSum);
        assert_eq!(sum.block_offsets(), vec![0, 2]);

        // Two sequence summands still form a sequence space.
        let ss = WeightedSpace::direct_sum(vec![seq.clone(), seq]).unwrap();
        assert_eq!(ss.kind(), SpaceKind::Sequence);
        assert_eq!(ss.blocks().len(), 2);
    }

    #[test]
    fn equality_ignores_block_structure() {
        let plain = WeightedSpace::sequence(4).unwrap();
        let split = WeightedSpace::repeat(&WeightedSpace::sequence(2).unwrap(), 2).unwrap();
        assert_eq!(plain, split);
    }

    #[test]
    fn dyadic_inner_product_example() {
        // <x1*chi1 + x2*chi2, same> = x1^2/2 + x2^2/4.
        let h = WeightedSpace::dyadic(2).unwrap();
        let n = h.norm_sq(&[2.0, 2.0]);
        assert_eq!(n, 2.0 + 1.0);
    }

    #[test]
    fn zero_dim_rejected() {
        assert!(WeightedSpace::sequence(0).is_err());
        assert!(WeightedSpace::with_weights(vec![]).is_err());
        assert!(WeightedSpace::with_weights(vec![Rat::from_integer(0.into())]).is_err());
    }
}

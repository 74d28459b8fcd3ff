use crate::error::{LatticeError, Result};
use crate::matrix::Mat;
use crate::operator::LatticeOperator;
use crate::scalar::Scalar;
use crate::space::WeightedSpace;

/// A nonnegative diagonal (multiplication) operator, kept as data so
/// constructions can read individual entries without scanning a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalSpec<S> {
    entries: Vec<S>,
    space: WeightedSpace,
}

impl<S: Scalar> DiagonalSpec<S> {
    pub fn new(entries: Vec<S>, space: WeightedSpace) -> Result<Self> {
        if entries.len() != space.dim() {
            return Err(LatticeError::DiagonalLength {
                len: entries.len(),
                dim: space.dim(),
            });
        }
        if let Some((index, value)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| **v < S::zero())
        {
            return Err(LatticeError::NegativeDiagonal {
                index,
                value: value.to_string(),
            });
        }
        Ok(DiagonalSpec { entries, space })
    }

    pub fn on_sequence(entries: Vec<S>) -> Result<Self> {
        let space = WeightedSpace::sequence(entries.len())?;
        DiagonalSpec::new(entries, space)
    }

    pub fn on_dyadic(entries: Vec<S>) -> Result<Self> {
        let space = WeightedSpace::dyadic(entries.len())?;
        DiagonalSpec::new(entries, space)
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_entry(&self) -> S {
        let mut best = S::zero();
        for e in &self.entries {
            if *e > best {
                best = e.clone();
            }
        }
        best
    }

    pub fn as_operator(&self) -> LatticeOperator<S> {
        LatticeOperator::new(
            self.space.clone(),
            self.space.clone(),
            Mat::diagonal(&self.entries),
        )
        .expect("diagonal shape always matches its space")
    }
}

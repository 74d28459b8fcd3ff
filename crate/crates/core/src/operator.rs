//! Operators between weighted spaces.
//!
//! The adjoint is fixed once here and everything downstream routes
//! through it: for `A : (dom, W_dom) -> (cod, W_cod)` the matrix of the
//! adjoint is
//!
//! ```text
//! A*[i][j] = A[j][i] * w_cod[j] / w_dom[i]
//! ```
//!
//! which is `W_dom^-1 A^T W_cod`. On sequence spaces this is the plain
//! transpose; on dyadic spaces it is not, and conflating the two is the
//! classic way to get every construction in this crate silently wrong.
//!
//! Positivity always means entrywise nonnegativity (the operator maps
//! the positive cone into itself), never positive semidefiniteness.

use crate::error::{LatticeError, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;
use crate::space::WeightedSpace;
use crate::tolerance::ToleranceConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeOperator<S> {
    domain: WeightedSpace,
    codomain: WeightedSpace,
    entries: Mat<S>,
}

/// Location and value of the smallest entry of an operator.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PositivityWitness {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositivityReport {
    pub positive: bool,
    pub witness: PositivityWitness,
}

/// Operator norm from the power iteration (or an exact shortcut).
/// `converged = false` flags an estimate that did not stabilize within
/// the iteration budget; it is still the best value seen.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl NormEstimate {
    fn exact(value: f64) -> Self {
        NormEstimate {
            value,
            converged: true,
            iterations: 0,
        }
    }
}

impl<S: Scalar> LatticeOperator<S> {
    pub fn new(domain: WeightedSpace, codomain: WeightedSpace, entries: Mat<S>) -> Result<Self> {
        if entries.rows() != codomain.dim() || entries.cols() != domain.dim() {
            return Err(LatticeError::ShapeMismatch {
                rows: entries.rows(),
                cols: entries.cols(),
                expected_rows: codomain.dim(),
                expected_cols: domain.dim(),
            });
        }
        Ok(LatticeOperator {
            domain,
            codomain,
            entries,
        })
    }

    pub fn zero(domain: WeightedSpace, codomain: WeightedSpace) -> Self {
        let entries = Mat::zeros(codomain.dim(), domain.dim());
        LatticeOperator {
            domain,
            codomain,
            entries,
        }
    }

    pub fn identity(space: WeightedSpace) -> Self {
        let entries = Mat::identity(space.dim());
        LatticeOperator {
            domain: space.clone(),
            codomain: space,
            entries,
        }
    }

    pub fn from_fn(
        domain: WeightedSpace,
        codomain: WeightedSpace,
        f: impl FnMut(usize, usize) -> S,
    ) -> Self {
        let entries = Mat::from_fn(codomain.dim(), domain.dim(), f);
        LatticeOperator {
            domain,
            codomain,
            entries,
        }
    }

    pub fn domain(&self) -> &WeightedSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &WeightedSpace {
        &self.codomain
    }

    pub fn entries(&self) -> &Mat<S> {
        &self.entries
    }

    pub fn is_endomorphism(&self) -> bool {
        self.domain == self.codomain
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        self.entries.apply(x)
    }

    /// Weighted adjoint `W_dom^-1 A^T W_cod`. Exact in rational mode;
    /// in float mode the weight ratios of the stock spaces are powers of
    /// two, so the scaling is still exact.
    pub fn adjoint(&self) -> Self {
        let dom_w = self.domain.weights();
        let cod_w = self.codomain.weights();
        let entries = Mat::from_fn(self.domain.dim(), self.codomain.dim(), |i, j| {
            let ratio = cod_w[j].clone() / dom_w[i].clone();
            self.entries.get(j, i).clone() * S::from_ratio(&ratio)
        });
        LatticeOperator {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            entries,
        }
    }

    /// `self . rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if rhs.codomain != self.domain {
            return Err(LatticeError::SpaceMismatch {
                left: self.domain.to_string(),
                right: rhs.codomain.to_string(),
                context: "compose",
            });
        }
        Ok(LatticeOperator {
            domain: rhs.domain.clone(),
            codomain: self.codomain.clone(),
            entries: self.entries.matmul(&rhs.entries),
        })
    }

    /// `A*A - AA*`; requires an endomorphism.
    pub fn self_commutator(&self) -> Result<Self> {
        if !self.is_endomorphism() {
            return Err(LatticeError::NotEndomorphism {
                domain: self.domain.to_string(),
                codomain: self.codomain.to_string(),
            });
        }
        let adj = self.adjoint();
        let left = adj.compose(self)?;
        let right = self.compose(&adj)?;
        Ok(left.sub(&right))
    }

    /// Entrywise sum; spaces must already agree (caller's invariant).
    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.domain, rhs.domain);
        assert_eq!(self.codomain, rhs.codomain);
        LatticeOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            entries: self.entries.add(&rhs.entries),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.domain, rhs.domain);
        assert_eq!(self.codomain, rhs.codomain);
        LatticeOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            entries: self.entries.sub(&rhs.entries),
        }
    }

    /// Largest |entry| as a float (0 for the zero operator).
    pub fn max_abs(&self) -> f64 {
        self.entries.max_abs().to_f64()
    }

    /// Largest |difference of entries| against another operator on the
    /// same pair of spaces.
    pub fn max_deviation(&self, rhs: &Self) -> f64 {
        self.sub(rhs).max_abs()
    }

    /// Entrywise positivity test at `pos_tol`, with the most negative
    /// entry as witness. Exact arithmetic compares exactly (the
    /// tolerance only ever widens the cone).
    pub fn is_positive(&self, cfg: &ToleranceConfig) -> PositivityReport {
        let mut min = S::zero();
        let mut at = (0usize, 0usize);
        let mut seen = false;
        for (i, j, v) in self.entries.entries() {
            if !seen || *v < min {
                min = v.clone();
                at = (i, j);
                seen = true;
            }
        }
        let threshold = S::from_f64(-cfg.pos_tol.abs());
        PositivityReport {
            positive: min >= threshold,
            witness: PositivityWitness {
                row: at.0,
                col: at.1,
                value: min.to_f64(),
            },
        }
    }

    /// Operator norm between the weighted spaces.
    ///
    /// Diagonal endomorphisms short-circuit to `max |d_i|` exactly; so
    /// does any `A` whose `A*A` comes out diagonal (block shifts).
    /// Otherwise: power iteration on `A*A` with a fixed start vector,
    /// flagged unconverged when the Rayleigh quotient is still moving
    /// after `norm_iters` steps.
    pub fn operator_norm(&self, cfg: &ToleranceConfig) -> NormEstimate {
        if self.entries.is_zero() {
            return NormEstimate::exact(0.0);
        }
        if self.is_endomorphism() && self.entries.is_diagonal() {
            let max = self
                .entries
                .diag()
                .iter()
                .map(|d| d.abs().to_f64())
                .fold(0.0, f64::max);
            return NormEstimate::exact(max);
        }
        let gram = self
            .adjoint()
            .compose(self)
            .expect("A*A is always composable");
        if gram.entries.is_diagonal() {
            let max = gram
                .entries
                .diag()
                .iter()
                .map(|d| d.to_f64().max(0.0))
                .fold(0.0, f64::max);
            return NormEstimate::exact(max.sqrt());
        }

        let b = gram.entries.to_f64();
        let w = self.domain.weights_f64();
        let n = w.len();
        let dot = |x: &[f64], y: &[f64]| -> f64 {
            (0..n).map(|i| w[i] * x[i] * y[i]).sum()
        };

        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i % 7) as f64).collect();
        let mut lambda = 0.0;
        let mut iterations = 0;
        let mut converged = false;
        for it in 1..=cfg.norm_iters {
            iterations = it;
            let u = b.apply(&v);
            let vv = dot(&v, &v);
            let new_lambda = dot(&u, &v) / vv;
            let norm_u = dot(&u, &u).sqrt();
            if norm_u == 0.0 {
                // v landed in the kernel; the Rayleigh value so far is it.
                converged = true;
                lambda = new_lambda;
                break;
            }
            let scale = 1.0 / norm_u;
            v = u.into_iter().map(|x| x * scale).collect();
            let settled = (new_lambda - lambda).abs() <= 1e-14 * new_lambda.abs().max(1.0);
            lambda = new_lambda;
            if settled && it > 1 {
                converged = true;
                break;
            }
        }
        NormEstimate {
            value: lambda.max(0.0).sqrt(),
            converged,
            iterations,
        }
    }

    /// Block-diagonal direct sum; domains and codomains concatenate.
    pub fn direct_sum(ops: &[Self]) -> Result<Self> {
        if ops.is_empty() {
            return Err(LatticeError::EmptySpace);
        }
        let domain =
            WeightedSpace::direct_sum(ops.iter().map(|o| o.domain.clone()).collect())?;
        let codomain =
            WeightedSpace::direct_sum(ops.iter().map(|o| o.codomain.clone()).collect())?;
        let mut entries = Mat::zeros(codomain.dim(), domain.dim());
        let mut row0 = 0;
        let mut col0 = 0;
        for op in ops {
            for (i, j, v) in op.entries.entries() {
                entries.set(row0 + i, col0 + j, v.clone());
            }
            row0 += op.codomain.dim();
            col0 += op.domain.dim();
        }
        Ok(LatticeOperator {
            domain,
            codomain,
            entries,
        })
    }

    /// Re-expresses the operator along a coordinate relabelling.
    ///
    /// `dom_perm[i]` is the old domain coordinate sitting at new
    /// coordinate `i` (likewise `cod_perm`); the new spaces must carry
    /// the matching weights, so the relabelling is a lattice isometry
    /// and adjoints, commutators, positivity and norms are all
    /// transported exactly.
    pub fn reindex(
        &self,
        dom_perm: &[usize],
        new_domain: WeightedSpace,
        cod_perm: &[usize],
        new_codomain: WeightedSpace,
    ) -> Result<Self> {
        check_isometric_relabel(&self.domain, dom_perm, &new_domain, "reindex domain")?;
        check_isometric_relabel(&self.codomain, cod_perm, &new_codomain, "reindex codomain")?;
        let entries = Mat::from_fn(new_codomain.dim(), new_domain.dim(), |i, j| {
            self.entries.get(cod_perm[i], dom_perm[j]).clone()
        });
        Ok(LatticeOperator {
            domain: new_domain,
            codomain: new_codomain,
            entries,
        })
    }

    pub fn to_f64_operator(&self) -> LatticeOperator<f64> {
        LatticeOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            entries: self.entries.to_f64(),
        }
    }
}

fn check_isometric_relabel(
    old: &WeightedSpace,
    perm: &[usize],
    new: &WeightedSpace,
    context: &'static str,
) -> Result<()> {
    let ok = perm.len() == old.dim()
        && new.dim() == old.dim()
        && perm.iter().all(|&p| p < old.dim())
        && {
            let mut seen = vec![false; old.dim()];
            perm.iter().for_each(|&p| seen[p] = true);
            seen.into_iter().all(|s| s)
        }
        && (0..new.dim()).all(|i| new.weight(i) == old.weight(perm[i]));
    if ok {
        Ok(())
    } else {
        Err(LatticeError::SpaceMismatch {
            left: old.to_string(),
            right: new.to_string(),
            context,
        })
    }
}

/// Where a space splits into two identical halves: the dimension of one
/// half. Prefers an explicit two-block structure, falls back to the
/// weight pattern.
pub fn equal_half_split(space: &WeightedSpace) -> Result<usize> {
    let blocks = space.blocks();
    if blocks.len() == 2 && blocks[0] == blocks[1] {
        return Ok(blocks[0].dim());
    }
    let dim = space.dim();
    if dim % 2 == 0 {
        let half = dim / 2;
        if (0..half).all(|i| space.weight(i) == space.weight(half + i)) {
            return Ok(half);
        }
    }
    Err(LatticeError::BadSwitchSplit {
        reason: format!("{space} has no two identical halves"),
    })
}

/// The switch of a space made of two identical halves: the permutation
/// exchanging the halves. It is its own adjoint and its own inverse.
pub fn switch_operator<S: Scalar>(space: &WeightedSpace) -> Result<LatticeOperator<S>> {
    let half = equal_half_split(space)?;
    let dim = space.dim();
    let op = LatticeOperator::from_fn(space.clone(), space.clone(), |i, j| {
        let swapped = if i < half { i + half } else { i - half };
        if j == swapped {
            S::one()
        } else {
            S::zero()
        }
    });
    debug_assert_eq!(dim, op.entries().rows());
    Ok(op)
}

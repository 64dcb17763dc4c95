//! Transition matrices `M_n` over the Laurent polynomial algebra, their
//! partial products, harmonic vectors, states and finite-horizon norms.
//!
//! `M_n` is indexed by edge level: it is `k(n+1) × k(n)` with rows indexing
//! `V_{n+1}` and columns `V_n`, and entry `(i, j) = Σ p(e) x^{b(e)}` over the
//! edges from `v^n_j` to `v^{n+1}_i`.

use std::fmt;

use num_traits::One;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bratteli::OrderedBratteliDiagram;
use crate::error::{Error, Result};
use crate::labeling::EdgeLabeling;
use crate::laurent::{weighted_one_norm, LaurentMatrix, LaurentPoly, Rational, Scalar};

#[derive(Clone)]
pub struct DimensionSpace<C = Rational> {
    matrices: Vec<LaurentMatrix<C>>,
    dims: Vec<usize>,
}

pub fn build_matrices<W: Scalar>(
    d: &OrderedBratteliDiagram<W>,
    l: &EdgeLabeling,
) -> DimensionSpace<W> {
    let matrices = (0..d.depth())
        .into_par_iter()
        .map(|n| {
            let mut m = LaurentMatrix::zeros(d.dim(n + 1), d.dim(n)).expect("levels are nonempty");
            for (i, e) in d.edges(n).iter().enumerate() {
                let term = LaurentPoly::monomial(l.b(n, i).clone(), e.p.clone());
                let entry = m.get(e.dst, e.src) + &term;
                m.set(e.dst, e.src, entry);
            }
            m
        })
        .collect();
    DimensionSpace {
        matrices,
        dims: (0..=d.depth()).map(|n| d.dim(n)).collect(),
    }
}

impl<C: Scalar> fmt::Debug for DimensionSpace<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DimensionSpace")
            .field("dims", &self.dims)
            .field("matrices", &self.matrices)
            .finish()
    }
}

/// Per-level residuals `μ_{n+1} M_n(1) − μ_n`.
#[derive(Clone, Debug)]
pub struct HarmonicReport<C> {
    pub residuals: Vec<Vec<C>>,
    pub pass: bool,
}

impl<C: Scalar> HarmonicReport<C> {
    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "residuals": self.residuals.iter()
                .map(|r| r.iter().map(Scalar::to_json).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

impl<C: Scalar> DimensionSpace<C> {
    pub fn from_matrices(matrices: Vec<LaurentMatrix<C>>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::DimensionMismatch("no matrices".into()))?;
        let mut dims = vec![first.cols()];
        for m in &matrices {
            if m.cols() != *dims.last().unwrap() {
                return Err(Error::DimensionMismatch(
                    "consecutive matrices do not compose".into(),
                ));
            }
            dims.push(m.rows());
        }
        Ok(DimensionSpace { matrices, dims })
    }

    pub fn depth(&self) -> usize {
        self.matrices.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self, n: usize) -> &LaurentMatrix<C> {
        &self.matrices[n]
    }

    pub fn matrices(&self) -> &[LaurentMatrix<C>] {
        &self.matrices
    }

    /// `M_{to−1} ⋯ M_{from}`.
    pub fn partial_product(&self, from: usize, to: usize) -> Result<LaurentMatrix<C>> {
        if from >= to || to > self.depth() {
            return Err(Error::RangeError(format!(
                "product range {from}..{to} not inside 0..{}",
                self.depth()
            )));
        }
        let mut acc = self.matrices[from].clone();
        for m in &self.matrices[from + 1..to] {
            acc = m.mat_mul(&acc)?;
        }
        Ok(acc)
    }

    /// Every column of every `M_n(1)` sums to 1 (or its enclosure admits 1).
    pub fn is_column_stochastic(&self) -> bool {
        self.matrices.iter().all(|m| {
            m.column_sums_at_one()
                .iter()
                .all(|s| s.admits(&Rational::one()))
        })
    }

    /// No coefficient is certainly negative or zero.
    pub fn has_positive_entries(&self) -> bool {
        self.matrices.iter().all(|m| {
            m.entries()
                .all(|p| p.terms().all(|(_, c)| c.certainly_positive()))
        })
    }

    /// `μ` lists one row vector per level `0..=depth`.
    pub fn check_harmonic(&self, mu: &[Vec<C>]) -> Result<HarmonicReport<C>> {
        if mu.len() != self.dims.len() || mu.iter().zip(&self.dims).any(|(v, &k)| v.len() != k) {
            return Err(Error::DimensionMismatch(
                "harmonic vectors must have length k(n) for every level".into(),
            ));
        }
        let residuals: Vec<Vec<C>> = self
            .matrices
            .iter()
            .enumerate()
            .map(|(n, m)| {
                let at_one = m.eval_at_one();
                (0..m.cols())
                    .map(|j| {
                        let pushed = (0..m.rows()).fold(C::zero(), |acc, i| {
                            acc + mu[n + 1][i].clone() * at_one[i][j].clone()
                        });
                        pushed - mu[n][j].clone()
                    })
                    .collect()
            })
            .collect();
        let pass = residuals.iter().flatten().all(Scalar::admits_zero);
        Ok(HarmonicReport { residuals, pass })
    }

    /// `γ(f) = Σ_i Σ_k (f_i, x^k) μ_i`.
    pub fn state_eval(&self, mu: &[C], f: &[LaurentPoly<C>]) -> Result<C> {
        if mu.len() != f.len() {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} against vector of length {}",
                mu.len(),
                f.len()
            )));
        }
        Ok(f.iter()
            .zip(mu)
            .fold(C::zero(), |acc, (fi, w)| acc + w.clone() * fi.eval_at_one()))
    }

    /// Pushes `f` from level `n` to level `m`.
    pub fn push_forward(
        &self,
        f: &[LaurentPoly<C>],
        n: usize,
        m: usize,
    ) -> Result<Vec<LaurentPoly<C>>> {
        if n > m || m > self.depth() {
            return Err(Error::RangeError(format!(
                "horizon {m} must satisfy {n} <= m <= {}",
                self.depth()
            )));
        }
        if f.len() != self.dims[n] {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} at level {n} with k = {}",
                f.len(),
                self.dims[n]
            )));
        }
        let mut v = f.to_vec();
        for mat in &self.matrices[n..m] {
            v = mat.apply(&v)?;
        }
        Ok(v)
    }

    /// `‖M_{m−1}⋯M_n f‖` under the all-ones state.
    pub fn horizon_norm(&self, f: &[LaurentPoly<C>], n: usize, m: usize) -> Result<C> {
        let v = self.push_forward(f, n, m)?;
        let ones = vec![C::one(); v.len()];
        weighted_one_norm(&v, &ones)
    }

    /// Norms at horizons `n..=m`.
    pub fn norm_sequence(&self, f: &[LaurentPoly<C>], n: usize, m: usize) -> Result<Vec<C>> {
        if n > m || m > self.depth() {
            return Err(Error::RangeError(format!("bad horizon range {n}..={m}")));
        }
        let ones = |k: usize| vec![C::one(); k];
        let mut v = self.push_forward(f, n, n)?;
        let mut out = vec![weighted_one_norm(&v, &ones(v.len()))?];
        for mat in &self.matrices[n..m] {
            v = mat.apply(&v)?;
            out.push(weighted_one_norm(&v, &ones(v.len()))?);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.matrices.iter().map(LaurentMatrix::to_json).collect())
    }
}

/// True when no entry of the sequence can exceed its predecessor.
pub fn is_nonincreasing<C: Scalar>(seq: &[C]) -> bool {
    seq.windows(2).all(|w| w[1].lower() <= w[0].upper())
}

/// The all-ones vectors `(1, …, 1)` for every level.
pub fn ones_state<C: Scalar>(dims: &[usize]) -> Vec<Vec<C>> {
    dims.iter().map(|&k| vec![C::one(); k]).collect()
}

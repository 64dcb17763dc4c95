use std::fmt;

use rayon::prelude::*;
use serde_json::Value;

use super::poly::LaurentPoly;
use super::scalar::{Rational, Scalar};
use crate::error::{Error, Result};

/// A dense `rows × cols` matrix of Laurent polynomials.
#[derive(Clone, PartialEq)]
pub struct LaurentMatrix<C = Rational> {
    rows: usize,
    cols: usize,
    entries: Vec<LaurentPoly<C>>,
}

impl<C: Scalar> LaurentMatrix<C> {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}×{cols}"
            )));
        }
        Ok(LaurentMatrix {
            rows,
            cols,
            entries: vec![LaurentPoly::zero(); rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, LaurentPoly::one());
        }
        Ok(m)
    }

    /// Row-major construction.
    pub fn from_rows(rows: Vec<Vec<LaurentPoly<C>>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch(
                "rows must be non-empty and of equal length".into(),
            ));
        }
        Ok(LaurentMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly<C> {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: LaurentPoly<C>) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn column(&self, j: usize) -> Vec<LaurentPoly<C>> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// `self · rhs`.
    pub fn mat_mul(&self, rhs: &LaurentMatrix<C>) -> Result<LaurentMatrix<C>> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let entries = (0..self.rows * rhs.cols)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / rhs.cols, idx % rhs.cols);
                let mut acc = LaurentPoly::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = rhs.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                acc
            })
            .collect();
        Ok(LaurentMatrix {
            rows: self.rows,
            cols: rhs.cols,
            entries,
        })
    }

    /// Matrix-vector product `self · f`.
    pub fn apply(&self, f: &[LaurentPoly<C>]) -> Result<Vec<LaurentPoly<C>>> {
        if f.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {}×{} matrix",
                f.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..self.cols).fold(LaurentPoly::zero(), |acc, k| {
                    &acc + &(self.get(i, k) * &f[k])
                })
            })
            .collect())
    }

    /// Entrywise sum of coefficients, i.e. `M(1)`.
    pub fn eval_at_one(&self) -> Vec<Vec<C>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j).eval_at_one())
                    .collect()
            })
            .collect()
    }

    pub fn column_sums_at_one(&self) -> Vec<C> {
        let m = self.eval_at_one();
        (0..self.cols)
            .map(|j| m.iter().fold(C::zero(), |acc, row| acc + row[j].clone()))
            .collect()
    }

    /// Entrywise ℓ¹ distance `Σ_{i,j} ‖A_ij − B_ij‖₁`.
    pub fn l1_distance(&self, other: &LaurentMatrix<C>) -> Result<C> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} vs {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self
            .entries
            .par_iter()
            .zip(other.entries.par_iter())
            .map(|(a, b)| (a - b).one_norm())
            .reduce(C::zero, |x, y| x + y))
    }

    pub fn entries(&self) -> impl Iterator<Item = &LaurentPoly<C>> {
        self.entries.iter()
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> LaurentMatrix<D> {
        LaurentMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|p| p.map_coeffs(&f)).collect(),
        }
    }

    /// Row-major nested arrays of polynomial objects.
    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|i| Value::Array((0..self.cols).map(|j| self.get(i, j).to_json()).collect()))
                .collect(),
        )
    }
}

impl LaurentMatrix<Rational> {
    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v
            .as_array()
            .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
        let rows = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                    .iter()
                    .map(LaurentPoly::from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

impl<C: Scalar> fmt::Debug for LaurentMatrix<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LaurentMatrix {}×{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "({:?}) ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `Σ_i w_i Σ_k |(f_i, x^k)|`.
pub fn weighted_one_norm<C: Scalar>(f: &[LaurentPoly<C>], w: &[C]) -> Result<C> {
    if f.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} vs weight length {}",
            f.len(),
            w.len()
        )));
    }
    Ok(f.iter()
        .zip(w)
        .fold(C::zero(), |acc, (fi, wi)| acc + wi.clone() * fi.one_norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::scalar::rat;

    fn mono(e: i64, n: i64, d: i64) -> LaurentPoly {
        LaurentPoly::monomial(e, rat(n, d))
    }

    fn odometer_factor(i: u32) -> LaurentMatrix {
        LaurentMatrix::from_rows(vec![vec![&mono(0, 1, 2) + &mono(1 << i, 1, 2)]]).unwrap()
    }

    #[test]
    fn odometer_product_is_uniform() {
        let mut acc = LaurentMatrix::identity(1).unwrap();
        for i in 0..3 {
            acc = odometer_factor(i).mat_mul(&acc).unwrap();
        }
        let expected = LaurentPoly::from_terms((0..8).map(|k| (k, rat(1, 8))));
        assert_eq!(acc.get(0, 0), &expected);
    }

    #[test]
    fn dimension_mismatch() {
        let a = LaurentMatrix::<Rational>::zeros(2, 3).unwrap();
        let b = LaurentMatrix::<Rational>::zeros(2, 3).unwrap();
        assert!(matches!(a.mat_mul(&b), Err(Error::DimensionMismatch(_))));
        assert!(LaurentMatrix::<Rational>::zeros(0, 3).is_err());
    }

    #[test]
    fn identity_is_neutral() {
        let m = LaurentMatrix::from_rows(vec![
            vec![mono(0, 1, 2), mono(3, 1, 2)],
            vec![mono(-1, 1, 3), LaurentPoly::zero()],
        ])
        .unwrap();
        let i = LaurentMatrix::identity(2).unwrap();
        assert_eq!(i.mat_mul(&m).unwrap(), m);
        assert_eq!(m.mat_mul(&i).unwrap(), m);
    }

    #[test]
    fn weighted_norm_examples() {
        let f = vec![&mono(0, 1, 1) + &mono(1, 1, 1)];
        assert_eq!(weighted_one_norm(&f, &[rat(1, 1)]).unwrap(), rat(2, 1));
        let col = vec![mono(0, 1, 2), mono(4, 1, 2)];
        assert_eq!(
            weighted_one_norm(&col, &[rat(1, 1), rat(1, 1)]).unwrap(),
            rat(1, 1)
        );
        assert!(weighted_one_norm(&col, &[rat(1, 1)]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let m = LaurentMatrix::from_rows(vec![vec![mono(2, 1, 2), mono(-5, 3, 7)]]).unwrap();
        assert_eq!(LaurentMatrix::from_json(&m.to_json()).unwrap(), m);
    }
}

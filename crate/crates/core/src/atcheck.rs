//! Exact rank-one approximation of products of circulant matrices
//! `½(I + x^{2^i}P)`: the product itself, the explicit column/row
//! construction for `k = 4`, `ℓ¹` errors, and a greedy coordinate-descent
//! baseline.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::laurent::{format_rational, LaurentMatrix, LaurentPoly, Rational};

pub const DEFAULT_BUDGET: u128 = 1 << 20;

/// Exponents `i` of the factors in block `j`: `8Mj ≤ i ≤ 8Mj + 4M`.
fn factor_bits(m: usize, n: usize) -> Vec<usize> {
    (0..n).flat_map(|j| 8 * m * j..=8 * m * j + 4 * m).collect()
}

/// `k · 2^{(4M+1)N}`, saturating.
pub fn monomial_budget(k: usize, m: usize, n: usize) -> u128 {
    let bits = (4 * m + 1) * n;
    if bits >= 120 {
        return u128::MAX;
    }
    (k as u128).saturating_mul(1u128 << bits)
}

fn check_budget(k: usize, m: usize, n: usize, cap: u128) -> Result<()> {
    if k == 0 || m == 0 || n == 0 {
        return Err(Error::InvalidParameter(
            "k, M and N must be positive".into(),
        ));
    }
    let needed = monomial_budget(k, m, n);
    if needed > cap {
        return Err(Error::BudgetExceeded { needed, cap });
    }
    Ok(())
}

/// `½(I + x^{2^i}P)` with `P e_c = e_{c+1}`.
pub fn circulant_factor(k: usize, i: usize) -> Result<LaurentMatrix> {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut f = LaurentMatrix::zeros(k, k)?;
    let shift = BigInt::one() << i;
    for c in 0..k {
        let r = (c + 1) % k;
        let mut entry = f.get(r, c).clone();
        entry.add_term(shift.clone(), half.clone());
        f.set(r, c, entry);
        let mut diag = f.get(c, c).clone();
        diag.add_term(BigInt::zero(), half.clone());
        f.set(c, c, diag);
    }
    Ok(f)
}

/// `∏_{j<N} ∏_{i=8Mj}^{8Mj+4M} ½(I + x^{2^i}P)`, exactly.
pub fn circulant_product(k: usize, m: usize, n: usize, budget: u128) -> Result<LaurentMatrix> {
    check_budget(k, m, n, budget)?;
    let mut a = LaurentMatrix::identity(k)?;
    for i in factor_bits(m, n) {
        a = circulant_factor(k, i)?.mat_mul(&a)?;
    }
    Ok(a)
}

/// Number of binary ones of a nonnegative exponent.
pub fn digit_count(e: &BigInt) -> u64 {
    e.magnitude().count_ones()
}

/// Every monomial of entry `(r, c)` has digit count `≡ r − c (mod k)`.
pub fn has_class_support(a: &LaurentMatrix) -> bool {
    let k = a.rows() as u64;
    (0..a.rows()).all(|r| {
        (0..a.cols()).all(|c| {
            let class = (r as u64 + k - c as u64) % k;
            a.get(r, c)
                .exponents()
                .all(|e| !e.is_negative() && digit_count(e) % k == class)
        })
    })
}

/// A column `·` row product `column_i · row_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneCandidate {
    pub column: Vec<LaurentPoly>,
    pub row: Vec<LaurentPoly>,
}

impl RankOneCandidate {
    pub fn zero(k: usize) -> Self {
        RankOneCandidate {
            column: vec![LaurentPoly::zero(); k],
            row: vec![LaurentPoly::zero(); k],
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.column
            .iter()
            .chain(&self.row)
            .all(|p| p.has_nonnegative_coeffs())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "column": self.column.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
            "row": self.row.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// `Σ_{i,j} ‖A_ij − column_i · row_j‖₁`.
pub fn approximation_error(a: &LaurentMatrix, c: &RankOneCandidate) -> Result<Rational> {
    if a.rows() != c.column.len() || a.cols() != c.row.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}×{} matrix against a candidate of lengths {} and {}",
            a.rows(),
            a.cols(),
            c.column.len(),
            c.row.len()
        )));
    }
    Ok((0..a.rows() * a.cols())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / a.cols(), idx % a.cols());
            (a.get(i, j) - &(&c.column[i] * &c.row[j])).one_norm()
        })
        .reduce(Rational::zero, |x, y| x + y))
}

/// The explicit construction for `k = 4`: `φ_p` and `g_p`, `p = 0..3`.
#[derive(Clone, Debug)]
pub struct ExplicitConstruction {
    pub m: usize,
    pub n: usize,
    pub phi: Vec<LaurentPoly>,
    pub g: Vec<LaurentPoly>,
}

/// `φ_p = 2^{−N} Σ_{Σa_j ≡ p} x^{Σ a_j 2^{8Mj}}` and `g_p = f_p / 2^{(4M+1)N}`,
/// where `f_p` sums products of one basic monomial per block: the full block
/// `x^{2^{8Mj} + … + 2^{8Mj+4M−1}}`, or any monomial on the bits
/// `8Mj+1 … 8Mj+4M`. A product using `s` full blocks has coefficient
/// `2^{N+2} 2^{−3Ms} (1 − 2^{−7M})^{N−s}`; `p` is its digit count mod 4.
pub fn explicit_rank_one(m: usize, n: usize, budget: u128) -> Result<ExplicitConstruction> {
    check_budget(4, m, n, budget)?;
    let two = BigInt::from(2);
    let mut phi = vec![LaurentPoly::zero(); 4];
    let weight = Rational::new(BigInt::one(), BigInt::one() << n);
    for mask in 0u64..(1 << n) {
        let e: BigInt = (0..n)
            .filter(|j| mask >> j & 1 == 1)
            .map(|j| BigInt::one() << (8 * m * j))
            .sum();
        phi[mask.count_ones() as usize % 4].add_term(e, weight.clone());
    }

    // Per block: (exponent, digit count, is the full block).
    let blocks: Vec<Vec<(BigInt, usize, bool)>> = (0..n)
        .map(|j| {
            let base = 8 * m * j;
            let full: BigInt = (0..4 * m).map(|i| BigInt::one() << (base + i)).sum();
            let mut out = vec![(full, 4 * m, true)];
            for c in 0u64..(1 << (4 * m)) {
                let e: BigInt = (0..4 * m)
                    .filter(|i| c >> i & 1 == 1)
                    .map(|i| BigInt::one() << (base + 1 + i))
                    .sum();
                out.push((e, c.count_ones() as usize, false));
            }
            out
        })
        .collect();
    let decay = Rational::new(BigInt::one(), BigInt::one() << (3 * m));
    let keep = Rational::one() - Rational::new(BigInt::one(), BigInt::one() << (7 * m));
    let norm = Rational::new(BigInt::one(), BigInt::one() << ((4 * m + 1) * n));
    let coeff: Vec<Rational> = (0..=n)
        .map(|s| {
            Rational::from_integer(two.pow((n + 2) as u32))
                * num_traits::pow(decay.clone(), s)
                * num_traits::pow(keep.clone(), n - s)
                * &norm
        })
        .collect();

    let mut partial: Vec<(BigInt, usize, usize)> = vec![(BigInt::zero(), 0, 0)];
    for block in &blocks {
        partial = partial
            .par_iter()
            .flat_map_iter(|(e, d, s)| {
                block
                    .iter()
                    .map(move |(be, bd, full)| (e + be, d + bd, s + usize::from(*full)))
            })
            .collect();
    }
    let g = (0..4)
        .into_par_iter()
        .map(|p| {
            LaurentPoly::from_terms(
                partial
                    .iter()
                    .filter(|(_, d, _)| d % 4 == p)
                    .map(|(e, _, s)| (e.clone(), coeff[*s].clone())),
            )
        })
        .collect();
    Ok(ExplicitConstruction { m, n, phi, g })
}

impl ExplicitConstruction {
    /// Column `φ_r`, row `g_{−c mod 4}`, matching `A_{rc} = a_{r−c}`.
    pub fn candidate(&self) -> RankOneCandidate {
        RankOneCandidate {
            column: self.phi.clone(),
            row: (0..4).map(|c| self.g[(4 - c) % 4].clone()).collect(),
        }
    }

    pub fn phi_norms(&self) -> Vec<Rational> {
        self.phi.iter().map(|p| p.one_norm()).collect()
    }

    /// `‖g_0 + g_1 + g_2 + g_3‖`.
    pub fn g_sum_norm(&self) -> Rational {
        self.g
            .iter()
            .fold(LaurentPoly::zero(), |acc, p| &acc + p)
            .one_norm()
    }

    /// Largest `|‖φ_p‖ − ¼|`.
    pub fn phi_deviation(&self) -> Rational {
        let quarter = Rational::new(BigInt::one(), BigInt::from(4));
        self.phi_norms()
            .into_iter()
            .map(|x| Signed::abs(&(x - &quarter)))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Products `φ_i · g_j` whose monomials fall in the support of `A` with
    /// a digit-count class other than `i + j mod 4`. The count is over
    /// `(i, j, monomial)` triples.
    pub fn class_violations(&self, a: &LaurentMatrix) -> usize {
        let support: std::collections::BTreeSet<&BigInt> =
            (0..4).flat_map(|r| a.get(r, 0).exponents()).collect();
        (0..16)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / 4, idx % 4);
                (&self.phi[i] * &self.g[j])
                    .exponents()
                    .filter(|e| support.contains(e) && digit_count(e) % 4 != ((i + j) % 4) as u64)
                    .count()
            })
            .sum()
    }

    /// `Σ_i ‖φ_i (g_0+…+g_3) − (a_0+…+a_3)‖` with `a_p = A_{p0}`.
    pub fn regrouped_error(&self, a: &LaurentMatrix) -> Rational {
        let gs = self.g.iter().fold(LaurentPoly::zero(), |acc, p| &acc + p);
        let total = (0..4).fold(LaurentPoly::zero(), |acc, p| &acc + a.get(p, 0));
        self.phi
            .par_iter()
            .map(|phi| (&(phi * &gs) - &total).one_norm())
            .reduce(Rational::zero, |x, y| x + y)
    }

    pub fn norms_json(&self) -> Value {
        json!({
            "phi": self.phi_norms().iter().map(format_rational).collect::<Vec<_>>(),
            "g": self.g.iter().map(|p| format_rational(&p.one_norm())).collect::<Vec<_>>(),
            "g_sum": format_rational(&self.g_sum_norm()),
            "phi_max_deviation": format_rational(&self.phi_deviation()),
        })
    }
}

#[derive(Clone, Debug)]
pub struct GreedyResult {
    pub candidate: RankOneCandidate,
    /// Error before the first sweep, then after each sweep.
    pub trace: Vec<Rational>,
}

/// Minimises `Σ w |v − t|` over `t ≥ 0`.
fn weighted_median(mut points: Vec<(Rational, Rational)>) -> Option<Rational> {
    points.retain(|(_, w)| !w.is_zero());
    if points.is_empty() {
        return None;
    }
    points.sort();
    let total: Rational = points.iter().map(|(_, w)| w.clone()).sum();
    let half = total / Rational::from_integer(2.into());
    let mut acc = Rational::zero();
    for (v, w) in &points {
        acc += w;
        if acc >= half {
            return Some(if v.is_negative() {
                Rational::zero()
            } else {
                v.clone()
            });
        }
    }
    unreachable!("weights sum to the total")
}

/// Updates the coefficients of `target` one at a time against the fixed
/// `other` factors. `residual(t, o)` is `A − target·other` for that pair.
fn sweep(
    target: &mut [LaurentPoly],
    other: &[LaurentPoly],
    a: &[Vec<&LaurentPoly>],
    residual: &mut [Vec<LaurentPoly>],
) {
    for t in 0..target.len() {
        let mut candidates: std::collections::BTreeSet<BigInt> =
            target[t].exponents().cloned().collect();
        for (o, factor) in other.iter().enumerate() {
            for g in a[t][o].exponents() {
                for f in factor.exponents() {
                    candidates.insert(g - f);
                }
            }
        }
        for e in candidates {
            let t0 = target[t].coeff(&e);
            let mut points = Vec::new();
            for (o, factor) in other.iter().enumerate() {
                for (f, w) in factor.terms() {
                    let r = residual[t][o].coeff(&(&e + f)) + &t0 * w;
                    points.push((r / w, w.clone()));
                }
            }
            let Some(best) = weighted_median(points) else {
                continue;
            };
            let delta = &best - &t0;
            if delta.is_zero() {
                continue;
            }
            for (o, factor) in other.iter().enumerate() {
                for (f, w) in factor.terms() {
                    residual[t][o].add_term(&e + f, -(&delta * w));
                }
            }
            target[t].add_term(e, delta);
        }
    }
}

/// Alternating coordinate descent from row = column sums of `A` normalised
/// at `x = 1`, column = `1/k`. Each coefficient is set to the weighted median
/// that minimises the error with everything else fixed, so the trace is
/// nonincreasing.
pub fn greedy_rank_one(a: &LaurentMatrix, iters: usize) -> Result<GreedyResult> {
    if iters == 0 {
        return Err(Error::InvalidParameter(
            "greedy search needs at least one iteration".into(),
        ));
    }
    let (k, l) = (a.rows(), a.cols());
    let mut column = vec![LaurentPoly::constant(Rational::new(BigInt::one(), BigInt::from(k))); k];
    let mut row: Vec<LaurentPoly> = (0..l)
        .map(|j| {
            let s = a
                .column(j)
                .iter()
                .fold(LaurentPoly::zero(), |acc, p| &acc + p);
            let mass = s.eval_at_one();
            if mass.is_zero() {
                s
            } else {
                s.scale(&mass.recip())
            }
        })
        .collect();
    let mut residual: Vec<Vec<LaurentPoly>> = (0..k)
        .map(|i| {
            (0..l)
                .map(|j| a.get(i, j) - &(&column[i] * &row[j]))
                .collect()
        })
        .collect();
    let total =
        |res: &[Vec<LaurentPoly>]| -> Rational { res.iter().flatten().map(|p| p.one_norm()).sum() };
    let by_row: Vec<Vec<&LaurentPoly>> = (0..k)
        .map(|i| (0..l).map(|j| a.get(i, j)).collect())
        .collect();
    let by_col: Vec<Vec<&LaurentPoly>> = (0..l)
        .map(|j| (0..k).map(|i| a.get(i, j)).collect())
        .collect();
    let mut trace = vec![total(&residual)];
    for _ in 0..iters {
        sweep(&mut column, &row, &by_row, &mut residual);
        let mut transposed: Vec<Vec<LaurentPoly>> = (0..l)
            .map(|j| (0..k).map(|i| residual[i][j].clone()).collect())
            .collect();
        sweep(&mut row, &column, &by_col, &mut transposed);
        residual = (0..k)
            .map(|i| (0..l).map(|j| transposed[j][i].clone()).collect())
            .collect();
        trace.push(total(&residual));
    }
    Ok(GreedyResult {
        candidate: RankOneCandidate { column, row },
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::rat;

    #[test]
    fn single_block_entries() {
        let a = circulant_product(4, 1, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(a.get(0, 0).len(), 6);
        assert!(has_class_support(&a));
        for s in a.column_sums_at_one() {
            assert_eq!(s, Rational::one());
        }
        assert!(matches!(
            circulant_product(4, 3, 2, DEFAULT_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn zero_candidate_error_is_k() {
        let a = circulant_product(3, 1, 1, DEFAULT_BUDGET).unwrap();
        let e = approximation_error(&a, &RankOneCandidate::zero(3)).unwrap();
        assert_eq!(e, rat(3, 1));
        assert!(approximation_error(&a, &RankOneCandidate::zero(2)).is_err());
    }

    #[test]
    fn rank_one_input_is_recovered() {
        let a = circulant_product(1, 1, 1, DEFAULT_BUDGET).unwrap();
        let c = RankOneCandidate {
            column: vec![LaurentPoly::one()],
            row: vec![a.get(0, 0).clone()],
        };
        assert_eq!(approximation_error(&a, &c).unwrap(), Rational::zero());
        let r = greedy_rank_one(&a, 1).unwrap();
        assert_eq!(r.trace.last().unwrap(), &Rational::zero());
        assert!(greedy_rank_one(&a, 0).is_err());
    }

    #[test]
    fn explicit_construction_is_nonnegative() {
        let x = explicit_rank_one(1, 1, DEFAULT_BUDGET).unwrap();
        let c = x.candidate();
        assert!(c.is_nonnegative());
        assert_eq!(
            x.phi_norms(),
            vec![rat(1, 2), rat(1, 2), rat(0, 1), rat(0, 1)]
        );
        assert_eq!(x.g_sum_norm(), rat(4, 1));
    }

    #[test]
    fn weighted_median_clamps() {
        let m = weighted_median(vec![(rat(-3, 1), rat(1, 1)), (rat(-1, 1), rat(1, 1))]);
        assert_eq!(m, Some(Rational::zero()));
        let m = weighted_median(vec![(rat(1, 1), rat(1, 1)), (rat(5, 1), rat(3, 1))]);
        assert_eq!(m, Some(rat(5, 1)));
    }
}

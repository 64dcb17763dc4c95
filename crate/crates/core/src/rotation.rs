//! Continued fractions, certified enclosures of `α(n) = |q(n)α − p(n)|`,
//! and the two-vertex diagram whose adic map is the rotation by `α`.
//!
//! `α` itself is never given numerically. From the terms `a(1..=D)` we only
//! know that `α = [0; a(1), …, a(D), t]` for some tail `t > 1`, which pins it
//! strictly between `p(D)/q(D)` and the mediant
//! `(p(D) + p(D−1)) / (q(D) + q(D−1))`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::bratteli::{Edge, OrderedBratteliDiagram};
use crate::error::{Error, Result};
use crate::labeling::{label_edges, EdgeLabeling};
use crate::laurent::{format_rational, Interval, LaurentMatrix, LaurentPoly, Rational, Scalar};

/// A declared lower bound on the terms beyond the given ones, used to
/// certify the tail of `Σ 1/(a(n)a(n+1))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GrowthRule {
    /// `a(n) ≥ a(D) + s·(n − D)` for `n ≥ D`, with `s > 0`.
    Linear { slope: Rational },
    /// `a(n) ≥ a(D)·r^(n−D)` for `n ≥ D`, with `r ≥ 2`.
    Geometric { ratio: Rational },
}

impl FromStr for GrowthRule {
    type Err = Error;

    /// `linear`, `linear:S`, `geometric`, `geometric:R`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let arg = arg.map(crate::laurent::parse_rational).transpose()?;
        match kind.trim() {
            "linear" => {
                let slope = arg.unwrap_or_else(Rational::one);
                if !Signed::is_positive(&slope) {
                    return Err(Error::InvalidParameter(
                        "linear slope must be positive".into(),
                    ));
                }
                Ok(GrowthRule::Linear { slope })
            }
            "geometric" => {
                let ratio = arg.unwrap_or_else(|| Rational::from_integer(2.into()));
                if ratio < Rational::from_integer(2.into()) {
                    return Err(Error::InvalidParameter(
                        "geometric ratio must be at least 2".into(),
                    ));
                }
                Ok(GrowthRule::Geometric { ratio })
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown growth rule {other:?}"
            ))),
        }
    }
}

impl fmt::Display for GrowthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthRule::Linear { slope } => write!(f, "linear:{}", format_rational(slope)),
            GrowthRule::Geometric { ratio } => write!(f, "geometric:{}", format_rational(ratio)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CFExpansion {
    /// `a[n-1] = a(n)`.
    terms: Vec<BigInt>,
    /// `p[n+1] = p(n)` for `n ≥ −1`.
    p: Vec<BigInt>,
    q: Vec<BigInt>,
    rule: Option<GrowthRule>,
    alpha: Interval,
}

impl CFExpansion {
    /// Needs at least two terms, all positive.
    pub fn new(terms: Vec<BigInt>, rule: Option<GrowthRule>) -> Result<Self> {
        if terms.len() < 2 {
            return Err(Error::InsufficientDepth(
                "need at least two continued fraction terms".into(),
            ));
        }
        if let Some(bad) = terms.iter().find(|a| !a.is_positive()) {
            return Err(Error::InvalidParameter(format!(
                "continued fraction terms must be positive, got {bad}"
            )));
        }
        let mut p = vec![BigInt::one(), BigInt::zero()];
        let mut q = vec![BigInt::zero(), BigInt::one()];
        for a in &terms {
            let k = p.len();
            p.push(a * &p[k - 1] + &p[k - 2]);
            q.push(a * &q[k - 1] + &q[k - 2]);
        }
        let d = terms.len() + 1;
        let alpha = Interval::hull(
            Rational::new(p[d].clone(), q[d].clone()),
            Rational::new(&p[d] + &p[d - 1], &q[d] + &q[d - 1]),
        );
        Ok(CFExpansion {
            terms,
            p,
            q,
            rule,
            alpha,
        })
    }

    pub fn from_u64(terms: &[u64], rule: Option<GrowthRule>) -> Result<Self> {
        Self::new(terms.iter().map(|&a| BigInt::from(a)).collect(), rule)
    }

    /// Comma- or whitespace-separated positive integers.
    pub fn parse_terms(s: &str) -> Result<Vec<BigInt>> {
        s.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<BigInt>()
                    .map_err(|_| Error::Parse(format!("bad continued fraction term {t:?}")))
            })
            .collect()
    }

    /// Number of given terms `D`.
    pub fn depth(&self) -> usize {
        self.terms.len()
    }

    pub fn rule(&self) -> Option<&GrowthRule> {
        self.rule.as_ref()
    }

    /// `a(n)` for `1 ≤ n ≤ D`.
    pub fn a(&self, n: usize) -> Result<&BigInt> {
        if n == 0 || n > self.depth() {
            return Err(Error::RangeError(format!(
                "a({n}) needs 1 <= n <= {}",
                self.depth()
            )));
        }
        Ok(&self.terms[n - 1])
    }

    /// `(p(n), q(n))` for `0 ≤ n ≤ D`.
    pub fn convergents(&self, n: usize) -> Result<(BigInt, BigInt)> {
        if n > self.depth() {
            return Err(Error::RangeError(format!(
                "convergent {n} beyond depth {}",
                self.depth()
            )));
        }
        Ok((self.p[n + 1].clone(), self.q[n + 1].clone()))
    }

    /// `q(n)` for `−1 ≤ n ≤ D`, with `q(−1) = 0`.
    pub fn q(&self, n: isize) -> Result<&BigInt> {
        usize::try_from(n + 1)
            .ok()
            .and_then(|i| self.q.get(i))
            .ok_or_else(|| Error::RangeError(format!("q({n}) not available")))
    }

    /// Enclosure of `α`.
    pub fn alpha(&self) -> &Interval {
        &self.alpha
    }

    /// Enclosure of `α(n)` for `n ≤ D − 2`, checked against the strict
    /// bracket `1/(q(n)+q(n+1)) < α(n) < 1/q(n+1)`.
    pub fn alpha_n(&self, n: usize) -> Result<Interval> {
        if n + 2 > self.depth() {
            return Err(Error::InsufficientDepth(format!(
                "alpha({n}) needs depth at least {}, have {}",
                n + 2,
                self.depth()
            )));
        }
        let (p, q) = self.convergents(n)?;
        let qn = Rational::from_integer(q.clone());
        let pn = Rational::from_integer(p);
        let raw = Interval::hull(&qn * self.alpha.lo() - &pn, &qn * self.alpha.hi() - &pn);
        let enc = if n.is_multiple_of(2) { raw } else { -raw };
        let q1 = self.q[n + 2].clone();
        let lower = Rational::new(BigInt::one(), &q + &q1);
        let upper = Rational::new(BigInt::one(), q1);
        if !(enc.lo() > &lower && enc.hi() < &upper) {
            return Err(Error::InsufficientDepth(format!(
                "enclosure {enc} of alpha({n}) does not certify the strict bracket"
            )));
        }
        Ok(enc)
    }

    /// Enclosure of `|p(n)/q(n) − α| = α(n)/q(n)`.
    pub fn approximation_error(&self, n: usize) -> Result<Interval> {
        let a = self.alpha_n(n)?;
        let q = Rational::from_integer(self.q[n + 1].clone());
        Ok(a.scale(&q.recip()))
    }

    /// Partial sum of `Σ 1/(a(n)a(n+1))` over the given terms, plus a
    /// certified tail bound when a growth rule is declared.
    pub fn summability_report(&self) -> SummabilityReport {
        let d = self.depth();
        let partial: Rational = (1..d)
            .map(|n| Rational::new(BigInt::one(), &self.terms[n - 1] * &self.terms[n]))
            .sum();
        let tail = self.rule.as_ref().map(|r| self.tail_bound(r, d));
        SummabilityReport {
            terms_used: d,
            partial_sum: partial,
            rule: self.rule.clone(),
            tail_bound: tail,
        }
    }

    /// Bound on `Σ_{n ≥ from} 1/(a(n)a(n+1))` under `rule`, using given
    /// terms up to `D` and the rule beyond. `from ≥ 1`.
    pub fn tail_bound(&self, rule: &GrowthRule, from: usize) -> Rational {
        let d = self.depth();
        let from = from.max(1);
        let given: Rational = (from..d)
            .map(|n| Rational::new(BigInt::one(), &self.terms[n - 1] * &self.terms[n]))
            .sum();
        let start = from.max(d);
        // Beyond D the rule gives a(start) ≥ A with A from the rule itself.
        let ad = Rational::from_integer(self.terms[d - 1].clone());
        let shift = (start - d) as u32;
        match rule {
            GrowthRule::Linear { slope } => {
                let a = &ad + slope * Rational::from_integer(shift.into());
                given + (slope * a).recip()
            }
            GrowthRule::Geometric { ratio } => {
                let a = &ad * num_traits::pow(ratio.clone(), shift as usize);
                let r2 = ratio * ratio;
                given + ratio / (&a * &a * (r2 - Rational::one()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummabilityReport {
    pub terms_used: usize,
    pub partial_sum: Rational,
    pub rule: Option<GrowthRule>,
    pub tail_bound: Option<Rational>,
}

impl SummabilityReport {
    pub fn certified(&self) -> bool {
        self.tail_bound.is_some()
    }

    pub fn verdict(&self) -> &'static str {
        if self.certified() {
            "CONVERGENT_CERTIFIED"
        } else {
            "INCONCLUSIVE"
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict(),
            "terms_used": self.terms_used,
            "partial_sum": format_rational(&self.partial_sum),
            "rule": self.rule.as_ref().map(ToString::to_string),
            "tail_bound": self.tail_bound.as_ref().map(format_rational),
            "total_bound": self.tail_bound.as_ref().map(|t| format_rational(&(t + &self.partial_sum))),
        })
    }
}

/// The rotation diagram truncated at `depth` edge levels, with interval
/// measures and its closed-form labels. Edge `n` of each level joins
/// `v{n}_i` to `v{n+1}_j`; ids are `e{n}_11({k})`, `e{n}_12`, `e{n}_21`.
pub fn rotation_diagram(
    cf: &CFExpansion,
    depth: usize,
) -> Result<(OrderedBratteliDiagram<Interval>, EdgeLabeling)> {
    if depth == 0 || depth + 2 > cf.depth() {
        return Err(Error::InsufficientDepth(format!(
            "diagram depth {depth} needs between 1 and {} given terms minus 2",
            cf.depth()
        )));
    }
    let alphas = (0..=depth)
        .map(|n| cf.alpha_n(n))
        .collect::<Result<Vec<_>>>()?;
    let mut vertices = vec![vec!["v0_1".to_string()]];
    for n in 1..=depth {
        vertices.push(vec![format!("v{n}_1"), format!("v{n}_2")]);
    }
    let mut edges = Vec::with_capacity(depth);
    let mut orders = Vec::with_capacity(depth);
    let mut labels = Vec::with_capacity(depth);
    for n in 0..depth {
        let a = cf.a(n + 1)?.to_usize().ok_or_else(|| {
            Error::InvalidParameter(format!("a({}) too large to enumerate", n + 1))
        })?;
        let qn = cf.q(n as isize)?.clone();
        let (p11, p12) = if n == 0 {
            (alphas[0].clone(), alphas[1].clone())
        } else {
            (
                alphas[n].checked_div(&alphas[n - 1])?,
                alphas[n + 1].checked_div(&alphas[n - 1])?,
            )
        };
        let mut level = Vec::new();
        let mut b = Vec::new();
        for k in 1..=a {
            level.push(Edge {
                id: format!("e{n}_11({k})"),
                src: 0,
                dst: 0,
                p: p11.clone(),
            });
            b.push(BigInt::from(k - 1) * &qn);
        }
        level.push(Edge {
            id: format!("e{n}_12"),
            src: 0,
            dst: 1,
            p: p12,
        });
        b.push(BigInt::zero());
        let mut into_first: Vec<usize> = (0..a).collect();
        if n > 0 {
            level.push(Edge {
                id: format!("e{n}_21"),
                src: 1,
                dst: 0,
                p: Interval::point(Rational::one()),
            });
            b.push(BigInt::from(a) * &qn);
            into_first.push(a + 1);
        }
        edges.push(level);
        orders.push(vec![into_first, vec![a]]);
        labels.push(b);
    }
    let d = OrderedBratteliDiagram::new(vertices, edges, orders)?;
    let l = EdgeLabeling::from_explicit(&d, labels)?;
    Ok((d, l))
}

/// Whether the generic inductive labeling reproduces the closed form.
pub fn generic_labeling_agrees(
    d: &OrderedBratteliDiagram<Interval>,
    explicit: &EdgeLabeling,
) -> bool {
    label_edges(d) == *explicit
}

/// The ℓ¹ gap between `M_n` and the rank-one product
/// `[1; 0]·[P_n, x^{a(n+1)q(n)}]`.
#[derive(Clone, Debug)]
pub struct RankOneGap {
    pub n: usize,
    /// Contribution of the top-left entry, `a(n+1)·|α(n)/α(n−1) − 1/a(n+1)|`.
    pub diagonal_part: Interval,
    /// Contribution of the bottom-left entry, `α(n+1)/α(n−1)`.
    pub corner_part: Interval,
    pub gap: Interval,
    /// `2/(a(n+1)a(n+2))`.
    pub bound: Rational,
}

impl RankOneGap {
    /// Certified `gap < bound`.
    pub fn below_bound(&self) -> bool {
        self.gap.hi() < &self.bound
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "gap": self.gap.to_json(),
            "diagonal_part": self.diagonal_part.to_json(),
            "corner_part": self.corner_part.to_json(),
            "bound": format_rational(&self.bound),
            "below_bound": self.below_bound(),
        })
    }
}

/// `M_n` of the rotation diagram as a 2×2 matrix (`n ≥ 1`).
pub fn rotation_matrix(cf: &CFExpansion, n: usize) -> Result<LaurentMatrix<Interval>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "M_0 is a column; use n >= 1".into(),
        ));
    }
    let prev = cf.alpha_n(n - 1)?;
    let r = cf.alpha_n(n)?.checked_div(&prev)?;
    let s = cf.alpha_n(n + 1)?.checked_div(&prev)?;
    let a = cf.a(n + 1)?.clone();
    let qn = cf.q(n as isize)?.clone();
    let top = arithmetic_progression(&a, &qn, r)?;
    LaurentMatrix::from_rows(vec![
        vec![
            top,
            LaurentPoly::monomial(&a * &qn, Interval::point(Rational::one())),
        ],
        vec![LaurentPoly::constant(s), LaurentPoly::zero()],
    ])
}

fn arithmetic_progression<C: Scalar>(
    count: &BigInt,
    step: &BigInt,
    c: C,
) -> Result<LaurentPoly<C>> {
    let count = count
        .to_usize()
        .ok_or_else(|| Error::InvalidParameter(format!("{count} terms are too many")))?;
    Ok(LaurentPoly::from_terms(
        (0..count).map(|k| (BigInt::from(k) * step, c.clone())),
    ))
}

pub fn rank_one_gap(cf: &CFExpansion, n: usize) -> Result<RankOneGap> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "the gap is defined for n >= 1".into(),
        ));
    }
    if n + 2 > cf.depth() {
        return Err(Error::InsufficientDepth(format!(
            "gap at n = {n} needs a({})",
            n + 2
        )));
    }
    let m = rotation_matrix(cf, n)?;
    let a = cf.a(n + 1)?.clone();
    let qn = cf.q(n as isize)?.clone();
    let row = arithmetic_progression(
        &a,
        &qn,
        Interval::point(Rational::new(BigInt::one(), a.clone())),
    )?;
    let approx = LaurentMatrix::from_rows(vec![
        vec![row, m.get(0, 1).clone()],
        vec![LaurentPoly::zero(), LaurentPoly::zero()],
    ])?;
    let gap = m.l1_distance(&approx)?;
    let diagonal_part = (m.get(0, 0) - approx.get(0, 0)).one_norm();
    let corner_part = m.get(1, 0).one_norm();
    let bound = Rational::new(BigInt::from(2), &a * cf.a(n + 2)?);
    Ok(RankOneGap {
        n,
        diagonal_part,
        corner_part,
        gap,
        bound,
    })
}

/// `P_n = (1/a(n+1)) Σ_{k<a(n+1)} x^{k q(n)}` for `n < count`. The second
/// value is a warning when summability is not certified.
pub fn rank_one_polys(
    cf: &CFExpansion,
    count: usize,
) -> Result<(Vec<LaurentPoly>, Option<String>)> {
    if count > cf.depth() {
        return Err(Error::InsufficientDepth(format!(
            "{count} polynomials need {count} terms, have {}",
            cf.depth()
        )));
    }
    let polys = (0..count)
        .map(|n| {
            let a = cf.a(n + 1)?;
            arithmetic_progression(
                a,
                cf.q(n as isize)?,
                Rational::new(BigInt::one(), a.clone()),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let warning = (!cf.summability_report().certified()).then(|| {
        "summability of 1/(a(n)a(n+1)) is not certified; declare a growth rule".to_string()
    });
    Ok((polys, warning))
}

/// `gcd(p(n), q(n)) = 1` for every computed convergent.
pub fn convergents_coprime(cf: &CFExpansion) -> bool {
    (0..=cf.depth()).all(|n| {
        let (p, q) = cf.convergents(n).unwrap();
        p.gcd(&q).is_one()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::Successor;
    use crate::laurent::rat;

    fn linear(depth: u64) -> CFExpansion {
        let terms: Vec<u64> = (1..=depth).map(|n| n + 1).collect();
        CFExpansion::from_u64(&terms, Some("linear".parse().unwrap())).unwrap()
    }

    #[test]
    fn convergent_values() {
        let cf = linear(6);
        assert_eq!(cf.convergents(0).unwrap(), (0.into(), 1.into()));
        assert_eq!(cf.convergents(1).unwrap(), (1.into(), 2.into()));
        assert_eq!(cf.convergents(2).unwrap(), (3.into(), 7.into()));
        assert_eq!(cf.convergents(3).unwrap(), (13.into(), 30.into()));
        assert!(cf.convergents(7).is_err());
        assert!(convergents_coprime(&cf));
        let fib = CFExpansion::from_u64(&[1; 10], None).unwrap();
        let qs: Vec<i64> = (0..=10)
            .map(|n| fib.convergents(n).unwrap().1.to_i64().unwrap())
            .collect();
        assert_eq!(qs, vec![1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
    }

    #[test]
    fn alpha_enclosures() {
        let cf = linear(10);
        assert_eq!(cf.alpha_n(0).unwrap(), cf.alpha().clone());
        let a1 = cf.alpha_n(1).unwrap();
        assert!(a1.lo() > &rat(1, 9) && a1.hi() < &rat(1, 7));
        for n in 1..8 {
            let lhs = cf.alpha_n(n + 1).unwrap()
                + cf.alpha_n(n)
                    .unwrap()
                    .scale(&Rational::from_integer(cf.a(n + 1).unwrap().clone()));
            let rhs = cf.alpha_n(n - 1).unwrap();
            assert!(lhs.lo() <= rhs.hi() && rhs.lo() <= lhs.hi());
        }
        assert!(matches!(cf.alpha_n(9), Err(Error::InsufficientDepth(_))));
    }

    #[test]
    fn summability_verdicts() {
        let cf = linear(8);
        let r = cf.summability_report();
        assert_eq!(r.verdict(), "CONVERGENT_CERTIFIED");
        // Σ_{n≥8} 1/((n+1)(n+2)) = 1/9.
        assert_eq!(r.tail_bound.unwrap(), rat(1, 9));
        let ones = CFExpansion::from_u64(&[1; 8], None).unwrap();
        let r = ones.summability_report();
        assert_eq!(r.verdict(), "INCONCLUSIVE");
        assert_eq!(r.partial_sum, rat(7, 1));
        let pow: Vec<u64> = (1..=8).map(|n| 1 << n).collect();
        let g = CFExpansion::from_u64(&pow, Some("geometric:2".parse().unwrap())).unwrap();
        assert!(g.summability_report().certified());
        assert!("geometric:3/2".parse::<GrowthRule>().is_err());
        assert!("quadratic".parse::<GrowthRule>().is_err());
    }

    #[test]
    fn polys() {
        let cf = linear(6);
        let (p, warn) = rank_one_polys(&cf, 3).unwrap();
        assert!(warn.is_none());
        assert_eq!(
            p[0],
            LaurentPoly::from_terms([(0, rat(1, 2)), (1, rat(1, 2))])
        );
        assert_eq!(
            p[1],
            LaurentPoly::from_terms([(0, rat(1, 3)), (2, rat(1, 3)), (4, rat(1, 3))])
        );
        assert_eq!(
            p[2],
            LaurentPoly::from_terms((0..4).map(|k| (7 * k, rat(1, 4))))
        );
        let bare = CFExpansion::from_u64(&[2, 3, 4], None).unwrap();
        assert!(rank_one_polys(&bare, 2).unwrap().1.is_some());
    }

    #[test]
    fn diagram_shape_and_labels() {
        let cf = linear(8);
        let (d, l) = rotation_diagram(&cf, 5).unwrap();
        assert_eq!(d.enumerate_paths(0, Some(0)).unwrap().len(), 2);
        assert!(generic_labeling_agrees(&d, &l));
        for n in 0..4 {
            for v in 0..2 {
                let mut p = d.min_path_into(n + 1, v);
                while let Successor::Path(q) = d.successor(&p).unwrap() {
                    assert_eq!(l.cocycle(&d, &p, &q).unwrap(), BigInt::one());
                    p = q;
                }
            }
        }
        let p = d.path_from_ids(&["e0_11(1)", "e1_12"]).unwrap();
        let m = d.cylinder_measure(&p).unwrap();
        let expected = cf.alpha_n(0).unwrap()
            * cf.alpha_n(2)
                .unwrap()
                .checked_div(&cf.alpha_n(0).unwrap())
                .unwrap();
        assert!(m.lo() <= expected.hi() && expected.lo() <= m.hi());
        assert!(rotation_diagram(&cf, 7).is_err());
    }

    #[test]
    fn gaps_below_bound() {
        let cf = linear(10);
        for n in 1..=7 {
            let g = rank_one_gap(&cf, n).unwrap();
            assert!(g.below_bound(), "n = {n}: {}", g.gap);
            let closed = cf
                .alpha_n(n + 1)
                .unwrap()
                .checked_div(&cf.alpha_n(n - 1).unwrap())
                .unwrap()
                .scale(&rat(2, 1));
            assert!(g.gap.lo() <= closed.hi() && closed.lo() <= g.gap.hi());
        }
        assert!(rank_one_gap(&cf, 0).is_err());
        assert!(rank_one_gap(&cf, 9).is_err());
    }
}

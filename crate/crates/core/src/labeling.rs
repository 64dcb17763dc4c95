//! The integer edge labeling `b: E → ℤ` and the cocycle it induces on
//! finite paths.

use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{Map, Value};

use crate::bratteli::{FinitePath, OrderedBratteliDiagram};
use crate::error::{Error, Result};
use crate::laurent::Scalar;

/// Edge labels plus the maximal and minimal label sums over paths from the
/// root into each vertex. Indexed `[level][edge]` and `[level][vertex]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLabeling {
    b: Vec<Vec<BigInt>>,
    wmax: Vec<Vec<BigInt>>,
    wmin: Vec<Vec<BigInt>>,
}

/// Runs the inductive construction: into each vertex the order-minimal edge
/// gets 0 and `b(e^{i+1}) = wmax(s(e^i)) + b(e^i) + 1`.
pub fn label_edges<W: Scalar>(d: &OrderedBratteliDiagram<W>) -> EdgeLabeling {
    let mut b = Vec::with_capacity(d.depth());
    let mut wmax = vec![vec![BigInt::zero()]];
    for n in 0..d.depth() {
        let mut level = vec![BigInt::zero(); d.edges(n).len()];
        let mut next = Vec::with_capacity(d.dim(n + 1));
        for v in 0..d.dim(n + 1) {
            let order = d.incoming(n, v);
            let mut prev: Option<usize> = None;
            for &e in order {
                if let Some(p) = prev {
                    level[e] = &wmax[n][d.edge(n, p).src] + &level[p] + 1;
                }
                prev = Some(e);
            }
            // The last edge in the order carries the largest sum.
            let last = *order.last().unwrap();
            next.push(&wmax[n][d.edge(n, last).src] + &level[last]);
        }
        b.push(level);
        wmax.push(next);
    }
    let wmin = extremal_sums(d, &b, false);
    EdgeLabeling { b, wmax, wmin }
}

fn extremal_sums<W: Scalar>(
    d: &OrderedBratteliDiagram<W>,
    b: &[Vec<BigInt>],
    maximal: bool,
) -> Vec<Vec<BigInt>> {
    let mut out = vec![vec![BigInt::zero()]];
    for n in 0..d.depth() {
        let level = (0..d.dim(n + 1))
            .map(|v| {
                let sums = d
                    .incoming(n, v)
                    .iter()
                    .map(|&e| &out[n][d.edge(n, e).src] + &b[n][e]);
                if maximal {
                    sums.max().unwrap()
                } else {
                    sums.min().unwrap()
                }
            })
            .collect();
        out.push(level);
    }
    out
}

impl EdgeLabeling {
    /// Wraps externally given labels (e.g. a closed form) and recomputes the
    /// path-sum tables for them.
    pub fn from_explicit<W: Scalar>(
        d: &OrderedBratteliDiagram<W>,
        b: Vec<Vec<BigInt>>,
    ) -> Result<Self> {
        if b.len() != d.depth() || (0..d.depth()).any(|n| b[n].len() != d.edges(n).len()) {
            return Err(Error::DimensionMismatch(
                "explicit labels do not match the diagram's edge sets".into(),
            ));
        }
        let wmax = extremal_sums(d, &b, true);
        let wmin = extremal_sums(d, &b, false);
        Ok(EdgeLabeling { b, wmax, wmin })
    }

    pub fn b(&self, level: usize, e: usize) -> &BigInt {
        &self.b[level][e]
    }

    pub fn labels(&self) -> &[Vec<BigInt>] {
        &self.b
    }

    pub fn wmax(&self, level: usize, v: usize) -> &BigInt {
        &self.wmax[level][v]
    }

    pub fn wmin(&self, level: usize, v: usize) -> &BigInt {
        &self.wmin[level][v]
    }

    /// `Σ_k b(e_k)`.
    pub fn path_bsum(&self, p: &FinitePath) -> BigInt {
        p.edges()
            .iter()
            .enumerate()
            .map(|(k, &e)| &self.b[k][e])
            .sum()
    }

    /// `c(q, p) = bsum(q) − bsum(p)` for paths of equal length ending at the
    /// same vertex.
    pub fn cocycle<W: Scalar>(
        &self,
        d: &OrderedBratteliDiagram<W>,
        p: &FinitePath,
        q: &FinitePath,
    ) -> Result<BigInt> {
        let tp = d.check_path(p)?;
        let tq = d.check_path(q)?;
        if p.len() != q.len() || tp != tq {
            return Err(Error::IncompatiblePaths(
                "paths differ in length or terminal vertex".into(),
            ));
        }
        Ok(self.path_bsum(q) - self.path_bsum(p))
    }

    /// `{"b":{id:"…"}, "wmax":{vertex:"…"}, "wmin":{…}}` with integers as
    /// decimal strings.
    pub fn to_json<W: Scalar>(&self, d: &OrderedBratteliDiagram<W>) -> Value {
        let mut b = Map::new();
        for (n, level) in self.b.iter().enumerate() {
            for (e, val) in level.iter().enumerate() {
                b.insert(d.edge(n, e).id.clone(), Value::String(val.to_string()));
            }
        }
        let table = |t: &Vec<Vec<BigInt>>| {
            let mut m = Map::new();
            for (n, level) in t.iter().enumerate() {
                for (v, val) in level.iter().enumerate() {
                    m.insert(
                        d.vertex_name(n, v).to_string(),
                        Value::String(val.to_string()),
                    );
                }
            }
            Value::Object(m)
        };
        let mut out = Map::new();
        out.insert("b".into(), Value::Object(b));
        out.insert("wmax".into(), table(&self.wmax));
        out.insert("wmin".into(), table(&self.wmin));
        Value::Object(out)
    }
}

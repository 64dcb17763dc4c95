//! Ordered Bratteli diagrams with Markov measures, truncated at a finite
//! depth, and the adic (Vershik) order on their finite paths.
//!
//! Vertices of level `n` are indexed `0..k(n)`; edges of level `n` (from
//! `V_n` to `V_{n+1}`) are indexed `0..|E_n|`. A [`FinitePath`] of length
//! `n + 1` stores one edge index per level `0..=n`.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{format_rational, parse_rational, Rational, Scalar};

/// An edge of level `n`: `src ∈ V_n`, `dst ∈ V_{n+1}`, transition weight `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge<W> {
    pub id: String,
    pub src: usize,
    pub dst: usize,
    pub p: W,
}

#[derive(Clone, Debug)]
pub struct OrderedBratteliDiagram<W = Rational> {
    vertices: Vec<Vec<String>>,
    edges: Vec<Vec<Edge<W>>>,
    /// `incoming[n][v]`: edges of `E_n` into `v ∈ V_{n+1}`, in order.
    incoming: Vec<Vec<Vec<usize>>>,
    /// `outgoing[n][v]`: edges of `E_n` leaving `v ∈ V_n`.
    outgoing: Vec<Vec<Vec<usize>>>,
    /// `rank[n][e]`: position of edge `e` within its range order.
    rank: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinitePath {
    edges: Vec<usize>,
}

impl FinitePath {
    pub fn new(edges: Vec<usize>) -> Self {
        FinitePath { edges }
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Successor {
    Path(FinitePath),
    Maximal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Predecessor {
    Path(FinitePath),
    Minimal,
}

impl<W: Scalar> OrderedBratteliDiagram<W> {
    /// Builds and validates a diagram. `orders[n][v]` lists the edge
    /// indices of `E_n` with range `v ∈ V_{n+1}`, smallest first.
    pub fn new(
        vertices: Vec<Vec<String>>,
        edges: Vec<Vec<Edge<W>>>,
        orders: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        if vertices.first().map(Vec::len) != Some(1) {
            return Err(Error::MissingRoot {
                found: vertices.first().map(Vec::len).unwrap_or(0),
            });
        }
        let depth = vertices.len() - 1;
        if edges.len() != depth || orders.len() != depth {
            return Err(Error::MalformedDiagram(format!(
                "{} vertex levels need {} edge levels and order levels, got {} and {}",
                vertices.len(),
                depth,
                edges.len(),
                orders.len()
            )));
        }
        let mut seen = HashSet::new();
        for (n, level) in edges.iter().enumerate() {
            for e in level {
                if e.src >= vertices[n].len() || e.dst >= vertices[n + 1].len() {
                    return Err(Error::MalformedDiagram(format!(
                        "edge {} at level {n} joins nonexistent vertices",
                        e.id
                    )));
                }
                if !seen.insert(e.id.clone()) {
                    return Err(Error::MalformedDiagram(format!(
                        "duplicate edge id {}",
                        e.id
                    )));
                }
            }
        }

        let mut outgoing = Vec::with_capacity(depth);
        for (n, level) in edges.iter().enumerate() {
            let mut out = vec![Vec::new(); vertices[n].len()];
            for (i, e) in level.iter().enumerate() {
                out[e.src].push(i);
            }
            for (v, list) in out.iter().enumerate() {
                if list.is_empty() {
                    return Err(Error::EmptyFiber {
                        level: n,
                        vertex: vertices[n][v].clone(),
                        direction: "outgoing",
                    });
                }
            }
            outgoing.push(out);
        }

        let mut rank = Vec::with_capacity(depth);
        for (n, level) in edges.iter().enumerate() {
            let mut into = vec![Vec::new(); vertices[n + 1].len()];
            for (i, e) in level.iter().enumerate() {
                into[e.dst].push(i);
            }
            if orders[n].len() != vertices[n + 1].len() {
                return Err(Error::BadOrder {
                    key: format!("{}/*", n + 1),
                    reason: format!(
                        "expected {} order lists, got {}",
                        vertices[n + 1].len(),
                        orders[n].len()
                    ),
                });
            }
            let mut r = vec![usize::MAX; level.len()];
            for (v, expected) in into.iter().enumerate() {
                if expected.is_empty() {
                    return Err(Error::EmptyFiber {
                        level: n + 1,
                        vertex: vertices[n + 1][v].clone(),
                        direction: "incoming",
                    });
                }
                let order = &orders[n][v];
                let mut sorted = order.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != order.len() || sorted != *expected {
                    return Err(Error::BadOrder {
                        key: format!("{}/{}", n + 1, v),
                        reason: "order is not a permutation of the edges with this range".into(),
                    });
                }
                for (pos, &e) in order.iter().enumerate() {
                    r[e] = pos;
                }
            }
            rank.push(r);
        }

        for (n, out) in outgoing.iter().enumerate() {
            for (v, list) in out.iter().enumerate() {
                let mut total = W::zero();
                for &i in list {
                    let p = &edges[n][i].p;
                    if !p.certainly_positive() {
                        return Err(Error::BadMeasure {
                            vertex: vertices[n][v].clone(),
                            reason: format!("p({}) is not positive", edges[n][i].id),
                        });
                    }
                    if p.lower() > Rational::one() {
                        return Err(Error::BadMeasure {
                            vertex: vertices[n][v].clone(),
                            reason: format!("p({}) exceeds 1", edges[n][i].id),
                        });
                    }
                    total = total + p.clone();
                }
                if !total.admits(&Rational::one()) {
                    return Err(Error::BadMeasure {
                        vertex: vertices[n][v].clone(),
                        reason: format!(
                            "outgoing probabilities sum to {:?}, not 1",
                            total.to_json()
                        ),
                    });
                }
            }
        }

        Ok(OrderedBratteliDiagram {
            vertices,
            edges,
            incoming: orders,
            outgoing,
            rank,
        })
    }

    /// Number of edge levels.
    pub fn depth(&self) -> usize {
        self.edges.len()
    }

    /// `k(n) = |V_n|`.
    pub fn dim(&self, level: usize) -> usize {
        self.vertices[level].len()
    }

    pub fn vertex_name(&self, level: usize, v: usize) -> &str {
        &self.vertices[level][v]
    }

    pub fn vertices(&self) -> &[Vec<String>] {
        &self.vertices
    }

    pub fn edges(&self, level: usize) -> &[Edge<W>] {
        &self.edges[level]
    }

    pub fn edge(&self, level: usize, e: usize) -> &Edge<W> {
        &self.edges[level][e]
    }

    /// Ordered edges of `E_n` into `v ∈ V_{n+1}`.
    pub fn incoming(&self, n: usize, v: usize) -> &[usize] {
        &self.incoming[n][v]
    }

    pub fn outgoing(&self, n: usize, v: usize) -> &[usize] {
        &self.outgoing[n][v]
    }

    /// Position of edge `e ∈ E_n` in the order at its range.
    pub fn rank(&self, n: usize, e: usize) -> usize {
        self.rank[n][e]
    }

    /// Incidence matrix `A_n` (rows `V_{n+1}`, columns `V_n`).
    pub fn incidence(&self, n: usize) -> Vec<Vec<usize>> {
        let mut a = vec![vec![0; self.dim(n)]; self.dim(n + 1)];
        for e in &self.edges[n] {
            a[e.dst][e.src] += 1;
        }
        a
    }

    /// Number of paths from the root into each vertex of `level`.
    pub fn path_counts(&self, level: usize) -> Vec<BigUint> {
        let mut counts = vec![BigUint::one()];
        for n in 0..level {
            let mut next = vec![BigUint::zero(); self.dim(n + 1)];
            for e in &self.edges[n] {
                next[e.dst] += &counts[e.src];
            }
            counts = next;
        }
        counts
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n >= self.depth() {
            Err(Error::DepthExceeded {
                requested: n,
                depth: self.depth(),
            })
        } else {
            Ok(())
        }
    }

    /// Checks consecutive compatibility; returns the terminal vertex.
    pub fn check_path(&self, p: &FinitePath) -> Result<usize> {
        if p.is_empty() {
            return Err(Error::InvalidParameter("empty path".into()));
        }
        if p.len() > self.depth() {
            return Err(Error::DepthExceeded {
                requested: p.len() - 1,
                depth: self.depth(),
            });
        }
        let mut at = 0;
        for (k, &e) in p.edges.iter().enumerate() {
            let edge = self.edges[k]
                .get(e)
                .ok_or_else(|| Error::InvalidParameter(format!("no edge {e} at level {k}")))?;
            if edge.src != at {
                return Err(Error::InvalidParameter(format!(
                    "edge {} does not start where the path is",
                    edge.id
                )));
            }
            at = edge.dst;
        }
        Ok(at)
    }

    /// Terminal vertex `r(e_n)` of a valid path.
    pub fn terminal(&self, p: &FinitePath) -> usize {
        let n = p.len() - 1;
        self.edges[n][p.edges[n]].dst
    }

    fn extremal_path_into(&self, level: usize, v: usize, maximal: bool) -> FinitePath {
        let mut edges = vec![0; level];
        let mut at = v;
        for n in (0..level).rev() {
            let into = &self.incoming[n][at];
            let e = if maximal {
                *into.last().unwrap()
            } else {
                into[0]
            };
            edges[n] = e;
            at = self.edges[n][e].src;
        }
        FinitePath { edges }
    }

    /// Adic-minimal path from the root into `v ∈ V_level`.
    pub fn min_path_into(&self, level: usize, v: usize) -> FinitePath {
        self.extremal_path_into(level, v, false)
    }

    pub fn max_path_into(&self, level: usize, v: usize) -> FinitePath {
        self.extremal_path_into(level, v, true)
    }

    fn paths_into(&self, level: usize, v: usize, out: &mut Vec<FinitePath>) {
        if level == 0 {
            out.push(FinitePath { edges: Vec::new() });
            return;
        }
        let n = level - 1;
        for &e in &self.incoming[n][v] {
            let start = out.len();
            self.paths_into(n, self.edges[n][e].src, out);
            for p in &mut out[start..] {
                p.edges.push(e);
            }
        }
    }

    /// All paths `(e_0, …, e_n)`, optionally only those ending at
    /// `v ∈ V_{n+1}`. Paths into one vertex come out in adic order; with no
    /// vertex given, vertices are taken in index order.
    pub fn enumerate_paths(&self, n: usize, v: Option<usize>) -> Result<Vec<FinitePath>> {
        self.check_level(n)?;
        let mut out = Vec::new();
        match v {
            Some(v) => {
                if v >= self.dim(n + 1) {
                    return Err(Error::InvalidParameter(format!(
                        "vertex {v} not in level {}",
                        n + 1
                    )));
                }
                self.paths_into(n + 1, v, &mut out);
            }
            None => {
                for v in 0..self.dim(n + 1) {
                    self.paths_into(n + 1, v, &mut out);
                }
            }
        }
        Ok(out)
    }

    /// The adic successor among paths with the same terminal vertex.
    pub fn successor(&self, p: &FinitePath) -> Result<Successor> {
        self.check_path(p)?;
        for m in 0..p.len() {
            let e = p.edges[m];
            let dst = self.edges[m][e].dst;
            let order = &self.incoming[m][dst];
            let r = self.rank[m][e];
            if r + 1 < order.len() {
                let next = order[r + 1];
                let mut edges = self.min_path_into(m, self.edges[m][next].src).edges;
                edges.push(next);
                edges.extend_from_slice(&p.edges[m + 1..]);
                return Ok(Successor::Path(FinitePath { edges }));
            }
        }
        Ok(Successor::Maximal)
    }

    /// Inverse of [`successor`](Self::successor).
    pub fn predecessor(&self, p: &FinitePath) -> Result<Predecessor> {
        self.check_path(p)?;
        for m in 0..p.len() {
            let e = p.edges[m];
            let dst = self.edges[m][e].dst;
            let r = self.rank[m][e];
            if r > 0 {
                let prev = self.incoming[m][dst][r - 1];
                let mut edges = self.max_path_into(m, self.edges[m][prev].src).edges;
                edges.push(prev);
                edges.extend_from_slice(&p.edges[m + 1..]);
                return Ok(Predecessor::Path(FinitePath { edges }));
            }
        }
        Ok(Predecessor::Minimal)
    }

    /// `μ(Z_p) = Π p(e_k)`.
    pub fn cylinder_measure(&self, p: &FinitePath) -> Result<W> {
        self.check_path(p)?;
        Ok(p.edges
            .iter()
            .enumerate()
            .fold(W::one(), |acc, (k, &e)| acc * self.edges[k][e].p.clone()))
    }

    /// Looks an edge up by id; returns `(level, index)`.
    pub fn find_edge(&self, id: &str) -> Option<(usize, usize)> {
        self.edges
            .iter()
            .enumerate()
            .find_map(|(n, level)| level.iter().position(|e| e.id == id).map(|i| (n, i)))
    }

    /// Builds a path from edge ids.
    pub fn path_from_ids(&self, ids: &[&str]) -> Result<FinitePath> {
        let edges = ids
            .iter()
            .enumerate()
            .map(|(k, id)| {
                self.edges
                    .get(k)
                    .and_then(|level| level.iter().position(|e| e.id == *id))
                    .ok_or_else(|| Error::InvalidParameter(format!("no edge {id} at level {k}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = FinitePath { edges };
        self.check_path(&p)?;
        Ok(p)
    }

    pub fn path_ids(&self, p: &FinitePath) -> Vec<&str> {
        p.edges
            .iter()
            .enumerate()
            .map(|(k, &e)| self.edges[k][e].id.as_str())
            .collect()
    }
}

/// Raw JSON description of a diagram:
/// `{"levels":[["v0"],…], "edges":[[{"id","src","dst","p"},…],…], "orders":{"<level>/<vertex-index>":[edge ids…]}}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DiagramSpec {
    pub levels: Vec<Vec<String>>,
    pub edges: Vec<Vec<EdgeSpec>>,
    pub orders: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EdgeSpec {
    pub id: String,
    pub src: usize,
    pub dst: usize,
    pub p: String,
}

impl DiagramSpec {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagram spec serializes")
    }
}

/// Parses and checks a raw diagram description.
pub fn validate_diagram(spec: &DiagramSpec) -> Result<OrderedBratteliDiagram<Rational>> {
    if spec.levels.first().map(Vec::len) != Some(1) {
        return Err(Error::MissingRoot {
            found: spec.levels.first().map(Vec::len).unwrap_or(0),
        });
    }
    let depth = spec.levels.len() - 1;
    if spec.edges.len() != depth {
        return Err(Error::MalformedDiagram(format!(
            "{} vertex levels need {} edge levels, got {}",
            spec.levels.len(),
            depth,
            spec.edges.len()
        )));
    }
    let mut edges = Vec::with_capacity(depth);
    let mut index: Vec<HashMap<&str, usize>> = Vec::with_capacity(depth);
    for level in &spec.edges {
        let mut out = Vec::with_capacity(level.len());
        let mut idx = HashMap::new();
        for (i, e) in level.iter().enumerate() {
            let p = parse_rational(&e.p).map_err(|_| Error::BadMeasure {
                vertex: format!("source of {}", e.id),
                reason: format!("unparseable probability {:?}", e.p),
            })?;
            idx.insert(e.id.as_str(), i);
            out.push(Edge {
                id: e.id.clone(),
                src: e.src,
                dst: e.dst,
                p,
            });
        }
        edges.push(out);
        index.push(idx);
    }
    for key in spec.orders.keys() {
        let ok = key
            .split_once('/')
            .and_then(|(l, v)| Some((l.parse::<usize>().ok()?, v.parse::<usize>().ok()?)))
            .map(|(l, v)| l >= 1 && l <= depth && v < spec.levels[l].len())
            .unwrap_or(false);
        if !ok {
            return Err(Error::BadOrder {
                key: key.clone(),
                reason: "key does not name a non-root vertex".into(),
            });
        }
    }
    let mut orders = Vec::with_capacity(depth);
    for n in 0..depth {
        let mut level_orders = Vec::with_capacity(spec.levels[n + 1].len());
        for v in 0..spec.levels[n + 1].len() {
            let key = format!("{}/{}", n + 1, v);
            let ids = spec.orders.get(&key).ok_or_else(|| Error::BadOrder {
                key: key.clone(),
                reason: "missing order list".into(),
            })?;
            let list = ids
                .iter()
                .map(|id| {
                    index[n]
                        .get(id.as_str())
                        .copied()
                        .ok_or_else(|| Error::BadOrder {
                            key: key.clone(),
                            reason: format!("unknown edge id {id} at level {n}"),
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            level_orders.push(list);
        }
        orders.push(level_orders);
    }
    OrderedBratteliDiagram::new(spec.levels.clone(), edges, orders)
}

impl OrderedBratteliDiagram<Rational> {
    pub fn to_spec(&self) -> DiagramSpec {
        let edges = self
            .edges
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|e| EdgeSpec {
                        id: e.id.clone(),
                        src: e.src,
                        dst: e.dst,
                        p: format_rational(&e.p),
                    })
                    .collect()
            })
            .collect();
        let mut orders = BTreeMap::new();
        for (n, level) in self.incoming.iter().enumerate() {
            for (v, list) in level.iter().enumerate() {
                orders.insert(
                    format!("{}/{}", n + 1, v),
                    list.iter().map(|&e| self.edges[n][e].id.clone()).collect(),
                );
            }
        }
        DiagramSpec {
            levels: self.vertices.clone(),
            edges,
            orders,
        }
    }
}

//! Generators for the standard example diagrams and for random diagrams.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bratteli::{Edge, OrderedBratteliDiagram};
use crate::laurent::{rat, Rational};

fn build(
    vertices: Vec<Vec<String>>,
    edges: Vec<Vec<Edge<Rational>>>,
    orders: Vec<Vec<Vec<usize>>>,
) -> OrderedBratteliDiagram {
    OrderedBratteliDiagram::new(vertices, edges, orders).expect("generated diagram is valid")
}

fn edge(id: String, src: usize, dst: usize, p: Rational) -> Edge<Rational> {
    Edge { id, src, dst, p }
}

/// Dyadic odometer: one vertex per level, edges `e{n}_0 < e{n}_1`, p = 1/2.
pub fn odometer(depth: usize) -> OrderedBratteliDiagram {
    let vertices = (0..=depth).map(|n| vec![format!("v{n}")]).collect();
    let edges = (0..depth)
        .map(|n| {
            vec![
                edge(format!("e{n}_0"), 0, 0, rat(1, 2)),
                edge(format!("e{n}_1"), 0, 0, rat(1, 2)),
            ]
        })
        .collect();
    let orders = (0..depth).map(|_| vec![vec![0, 1]]).collect();
    build(vertices, edges, orders)
}

/// Morse diagram. Edge `e{n}_{i},{j}` joins `v{n}_{i}` to `v{n+1}_{j}`;
/// into `v_0` the order is `e_{0,0} < e_{1,0}`, into `v_1` it is
/// `e_{1,1} < e_{0,1}`. All probabilities are 1/2.
pub fn morse(depth: usize) -> OrderedBratteliDiagram {
    let mut vertices = vec![vec!["v0_0".to_string()]];
    for n in 1..=depth {
        vertices.push(vec![format!("v{n}_0"), format!("v{n}_1")]);
    }
    let mut edges = Vec::with_capacity(depth);
    let mut orders = Vec::with_capacity(depth);
    for n in 0..depth {
        if n == 0 {
            edges.push(vec![
                edge("e0_0,0".into(), 0, 0, rat(1, 2)),
                edge("e0_0,1".into(), 0, 1, rat(1, 2)),
            ]);
            orders.push(vec![vec![0], vec![1]]);
        } else {
            let mut level = Vec::new();
            for i in 0..2 {
                for j in 0..2 {
                    level.push(edge(format!("e{n}_{i},{j}"), i, j, rat(1, 2)));
                }
            }
            edges.push(level);
            // indices: 0 = (0,0), 1 = (0,1), 2 = (1,0), 3 = (1,1)
            orders.push(vec![vec![0, 2], vec![3, 1]]);
        }
    }
    build(vertices, edges, orders)
}

/// The circulant family with `k ≥ 2` vertices per level. Level-0 edges
/// `e0_{i}` have p = 1/k; later levels have `e{n}_{i},{i}` before
/// `e{n}_{i-1},{i}` (and `e{n}_{k},{1}` into vertex 1), p = 1/2.
/// Vertex names are 1-based.
pub fn circulant(k: usize, depth: usize) -> OrderedBratteliDiagram {
    assert!(k >= 2, "circulant family needs k >= 2");
    let mut vertices = vec![vec!["v0_1".to_string()]];
    for n in 1..=depth {
        vertices.push((1..=k).map(|i| format!("v{n}_{i}")).collect());
    }
    let mut edges = Vec::with_capacity(depth);
    let mut orders = Vec::with_capacity(depth);
    let kq = rat(1, k as i64);
    for n in 0..depth {
        if n == 0 {
            edges.push(
                (0..k)
                    .map(|i| edge(format!("e0_{}", i + 1), 0, i, kq.clone()))
                    .collect(),
            );
            orders.push((0..k).map(|i| vec![i]).collect());
        } else {
            let mut level = Vec::with_capacity(2 * k);
            let mut order = Vec::with_capacity(k);
            for i in 0..k {
                let prev = (i + k - 1) % k;
                level.push(edge(format!("e{n}_{},{}", i + 1, i + 1), i, i, rat(1, 2)));
                level.push(edge(
                    format!("e{n}_{},{}", prev + 1, i + 1),
                    prev,
                    i,
                    rat(1, 2),
                ));
                order.push(vec![2 * i, 2 * i + 1]);
            }
            edges.push(level);
            orders.push(order);
        }
    }
    build(vertices, edges, orders)
}

/// A random diagram with at most `max_vertices` vertices per level, at most
/// `max_parallel` parallel edges between any two vertices, random orders,
/// and random positive rational probabilities.
pub fn random_diagram<R: Rng + ?Sized>(
    rng: &mut R,
    max_vertices: usize,
    max_parallel: usize,
    depth: usize,
) -> OrderedBratteliDiagram {
    assert!(max_vertices >= 1 && max_parallel >= 1);
    let mut vertices = vec![vec!["v0_0".to_string()]];
    for n in 1..=depth {
        let k = rng.random_range(1..=max_vertices);
        vertices.push((0..k).map(|i| format!("v{n}_{i}")).collect());
    }
    let mut edges = Vec::with_capacity(depth);
    let mut orders = Vec::with_capacity(depth);
    for n in 0..depth {
        let (ks, kr) = (vertices[n].len(), vertices[n + 1].len());
        let mut mult = vec![vec![0usize; kr]; ks];
        for row in mult.iter_mut() {
            for m in row.iter_mut() {
                *m = rng.random_range(0..=max_parallel);
            }
        }
        for row in mult.iter_mut() {
            if row.iter().all(|&m| m == 0) {
                row[rng.random_range(0..kr)] = 1;
            }
        }
        for j in 0..kr {
            if (0..ks).all(|i| mult[i][j] == 0) {
                mult[rng.random_range(0..ks)][j] = 1;
            }
        }
        let mut level = Vec::new();
        let mut weights = Vec::new();
        for (i, row) in mult.iter().enumerate() {
            for (j, &m) in row.iter().enumerate() {
                for c in 0..m {
                    level.push(edge(format!("e{n}_{i},{j}#{c}"), i, j, rat(0, 1)));
                    weights.push(rng.random_range(1..=4i64));
                }
            }
        }
        for i in 0..ks {
            let total: i64 = level
                .iter()
                .zip(&weights)
                .filter(|(e, _)| e.src == i)
                .map(|(_, w)| w)
                .sum();
            for (e, w) in level.iter_mut().zip(&weights) {
                if e.src == i {
                    e.p = rat(*w, total);
                }
            }
        }
        let mut order: Vec<Vec<usize>> = vec![Vec::new(); kr];
        for (idx, e) in level.iter().enumerate() {
            order[e.dst].push(idx);
        }
        for o in order.iter_mut() {
            o.shuffle(rng);
        }
        edges.push(level);
        orders.push(order);
    }
    build(vertices, edges, orders)
}

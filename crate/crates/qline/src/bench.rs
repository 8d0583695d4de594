// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Benchmark circuit generators: QFT, QAOA over seeded problem graphs, and
//! seeded random circuits for oracle spot checks.
//!
//! Both benchmark families are mostly-local with sparse distant
//! interactions: every distant pair in QFT interacts exactly once, and QAOA
//! interacts only along problem-graph edges. That structure is what makes a
//! line layout competitive.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

/// Problem-graph family for QAOA instances.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFamily {
    Ring,
    ThreeRegular,
    ErdosRenyi(f64),
    /// Loaded from an edge list rather than generated.
    Custom,
}

impl GraphFamily {
    pub fn as_str(&self) -> String {
        match self {
            GraphFamily::Ring => "ring".into(),
            GraphFamily::ThreeRegular => "3regular".into(),
            GraphFamily::ErdosRenyi(p) => format!("er{p}"),
            GraphFamily::Custom => "custom".into(),
        }
    }
}

/// Simple undirected graph whose edges become QAOA interaction terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemGraph {
    num_vertices: usize,
    edges: BTreeSet<(usize, usize)>,
    pub family: GraphFamily,
    pub seed: u64,
}

impl ProblemGraph {
    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as normalized (low, high) pairs in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidBenchmark(format!("ring needs >= 3 vertices, got {n}")));
        }
        let edges = (0..n).map(|i| order(i, (i + 1) % n)).collect();
        Ok(ProblemGraph { num_vertices: n, edges, family: GraphFamily::Ring, seed: 0 })
    }

    /// Random 3-regular graph by the pairing model: three stubs per vertex,
    /// shuffled and paired, rejecting pairings with loops or parallel edges.
    pub fn three_regular(n: usize, seed: u64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidBenchmark(format!(
                "3-regular graphs need an even vertex count >= 4, got {n}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        'attempt: for _ in 0..10_000 {
            let mut stubs: Vec<usize> = (0..n).flat_map(|v| [v, v, v]).collect();
            stubs.shuffle(&mut rng);
            let mut edges = BTreeSet::new();
            for pair in stubs.chunks(2) {
                let (u, v) = (pair[0], pair[1]);
                if u == v || !edges.insert(order(u, v)) {
                    continue 'attempt;
                }
            }
            return Ok(ProblemGraph {
                num_vertices: n,
                edges,
                family: GraphFamily::ThreeRegular,
                seed,
            });
        }
        Err(Error::InvalidBenchmark(format!(
            "pairing model failed to produce a simple 3-regular graph on {n} vertices"
        )))
    }

    /// Each of the n(n-1)/2 pairs is an edge independently with probability p.
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidBenchmark("graph needs at least one vertex".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidBenchmark(format!("edge probability {p} outside [0,1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = BTreeSet::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_range(0.0..1.0) < p {
                    edges.insert((u, v));
                }
            }
        }
        Ok(ProblemGraph { num_vertices: n, edges, family: GraphFamily::ErdosRenyi(p), seed })
    }

    /// All pairs connected.
    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidBenchmark("graph needs at least one vertex".into()));
        }
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Ok(ProblemGraph { num_vertices: n, edges, family: GraphFamily::Custom, seed: 0 })
    }

    /// Parse an edge-list document: one "u v" pair per line, `#` starts a
    /// comment. Vertex count is 1 + the largest mentioned vertex.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut edges = BTreeSet::new();
        let mut max_vertex = None::<usize>;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or(())
                    .and_then(|t| t.parse().map_err(|_| ()))
                    .map_err(|_| Error::Parse {
                        line: idx + 1,
                        msg: format!("expected 'u v' vertex pair, got '{line}'"),
                    })
            };
            let u = parse(it.next())?;
            let v = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("trailing tokens after edge '{line}'"),
                });
            }
            if u == v {
                return Err(Error::Parse { line: idx + 1, msg: format!("self-loop on {u}") });
            }
            edges.insert(order(u, v));
            max_vertex = Some(max_vertex.map_or(u.max(v), |m: usize| m.max(u).max(v)));
        }
        let num_vertices = max_vertex.map_or(0, |m| m + 1);
        if num_vertices == 0 {
            return Err(Error::InvalidBenchmark("edge list mentions no vertices".into()));
        }
        Ok(ProblemGraph { num_vertices, edges, family: GraphFamily::Custom, seed: 0 })
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# {} vertices, {} edges\n", self.num_vertices, self.edges.len());
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

fn order(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Quantum Fourier transform circuit without the trailing qubit-reversal
/// SWAP layer. Gate count is n + n(n-1)/2.
pub fn qft(n: usize) -> Result<Circuit> {
    qft_with_reversal(n, false)
}

/// QFT with an optional qubit-reversal SWAP layer appended. With the layer
/// the output ordering matches the plain DFT; without it the output is
/// bit-reversed, which routers compensate for via the final layout.
pub fn qft_with_reversal(n: usize, reversal: bool) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidBenchmark("qft needs at least one qubit".into()));
    }
    let mut c = Circuit::new(format!("qft_{n}"), n, 0);
    for i in 0..n {
        c.push_unchecked(Gate::h(i));
        for j in i + 1..n {
            let theta = std::f64::consts::PI / f64::powi(2.0, (j - i) as i32);
            c.push_unchecked(Gate::cp(theta, i, j));
        }
    }
    if reversal {
        for i in 0..n / 2 {
            c.push_unchecked(Gate::swap(i, n - 1 - i));
        }
    }
    Ok(c)
}

/// QAOA ansatz over a problem graph: a Hadamard wall, then per layer one
/// RZZ(gamma_l) per edge (sorted order) and one RX(beta_l) per qubit.
/// Angles are drawn from `seed` as gamma_0, beta_0, gamma_1, beta_1, ...
/// uniformly in (0, pi). Gate count is n + layers * (|E| + n).
pub fn qaoa(graph: &ProblemGraph, layers: usize, seed: u64) -> Result<Circuit> {
    if layers == 0 {
        return Err(Error::InvalidBenchmark("qaoa needs at least one layer".into()));
    }
    let n = graph.num_vertices();
    if n == 0 {
        return Err(Error::InvalidBenchmark("qaoa needs at least one qubit".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(
        format!("qaoa_{}_{}_p{}_s{}", graph.family.as_str(), n, layers, seed),
        n,
        0,
    );
    for q in 0..n {
        c.push_unchecked(Gate::h(q));
    }
    for _ in 0..layers {
        let gamma = rng.random_range(0.0..std::f64::consts::PI);
        let beta = rng.random_range(0.0..std::f64::consts::PI);
        for (u, v) in graph.edges() {
            c.push_unchecked(Gate::rzz(gamma, u, v));
        }
        for q in 0..n {
            c.push_unchecked(Gate::rx(beta, q));
        }
    }
    Ok(c)
}

/// Seeded random measurement-free circuit for oracle spot checks.
pub fn random_circuit(n: usize, num_gates: usize, seed: u64) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidBenchmark("circuit needs at least one qubit".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(format!("random_{n}_g{num_gates}_s{seed}"), n, 0);
    let one_q = [GateKind::H, GateKind::X, GateKind::Y, GateKind::Z, GateKind::Rx, GateKind::Ry, GateKind::Rz];
    let two_q = [GateKind::Cx, GateKind::Cz, GateKind::Cp, GateKind::Rzz, GateKind::Swap];
    for _ in 0..num_gates {
        let two = n >= 2 && rng.random_range(0.0..1.0) < 0.5;
        let theta = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        let gate = if two {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            match two_q[rng.random_range(0..two_q.len())] {
                GateKind::Cx => Gate::cx(a, b),
                GateKind::Cz => Gate::cz(a, b),
                GateKind::Cp => Gate::cp(theta, a, b),
                GateKind::Rzz => Gate::rzz(theta, a, b),
                _ => Gate::swap(a, b),
            }
        } else {
            let q = rng.random_range(0..n);
            match one_q[rng.random_range(0..one_q.len())] {
                GateKind::H => Gate::h(q),
                GateKind::X => Gate::x(q),
                GateKind::Y => Gate::y(q),
                GateKind::Z => Gate::z(q),
                GateKind::Rx => Gate::rx(theta, q),
                GateKind::Ry => Gate::ry(theta, q),
                _ => Gate::rz(theta, q),
            }
        };
        c.push_unchecked(gate);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateAccounting;
    use crate::sim::unitary_of;
    use num_complex::Complex64;

    #[test]
    fn qft_gate_counts() {
        assert_eq!(qft(1).unwrap().gates, vec![Gate::h(0)]);
        assert_eq!(qft(3).unwrap().len(), 6);
        assert_eq!(qft(10).unwrap().len(), 55);
        assert_eq!(
            qft(10).unwrap().gate_count(GateAccounting::SwapAsOne),
            55
        );
        assert!(qft(0).is_err());
    }

    #[test]
    fn qft_two_qubit_gates_all_cp_each_pair_once() {
        let c = qft(6).unwrap();
        let mut pairs = BTreeSet::new();
        for g in &c.gates {
            if g.is_two_qubit() {
                assert_eq!(g.kind, GateKind::Cp);
                assert!(pairs.insert(order(g.q0(), g.q1())), "pair repeats");
            }
        }
        assert_eq!(pairs.len(), 15);
        // Reversal flag adds the SWAP layer.
        let r = qft_with_reversal(6, true).unwrap();
        assert_eq!(r.swap_count(), 3);
    }

    /// The n-qubit circuit realizes the DFT with bit-reversed indexing:
    /// entry (k, x) is omega^(k * rev(x)) / sqrt(N). Verified by hand for
    /// n=2 and frozen here for n=2 and n=3.
    #[test]
    fn qft_unitary_matches_bit_reversed_dft() {
        for n in [2usize, 3] {
            let dim = 1usize << n;
            let u = unitary_of(&qft(n).unwrap()).unwrap();
            let scale = 1.0 / (dim as f64).sqrt();
            for k in 0..dim {
                for x in 0..dim {
                    let rev_x = (0..n).fold(0usize, |acc, b| acc | ((x >> b & 1) << (n - 1 - b)));
                    let angle = 2.0 * std::f64::consts::PI * (k * rev_x) as f64 / dim as f64;
                    let expected = Complex64::from_polar(scale, angle);
                    let diff = (u[k][x] - expected).norm();
                    assert!(diff < 1e-9, "n={n} entry ({k},{x}): {} vs {expected}", u[k][x]);
                }
            }
        }
    }

    #[test]
    fn qaoa_gate_counts() {
        let ring = ProblemGraph::ring(4).unwrap();
        assert_eq!(qaoa(&ring, 1, 7).unwrap().len(), 12);
        let cubic = ProblemGraph::three_regular(20, 3).unwrap();
        assert_eq!(cubic.num_edges(), 30);
        assert_eq!(qaoa(&cubic, 1, 7).unwrap().len(), 70);
        let g = ProblemGraph::erdos_renyi(8, 0.4, 5).unwrap();
        assert_eq!(qaoa(&g, 3, 9).unwrap().len(), 8 + 3 * (g.num_edges() + 8));
    }

    #[test]
    fn qaoa_is_deterministic() {
        let g = ProblemGraph::three_regular(10, 11).unwrap();
        assert_eq!(qaoa(&g, 2, 13).unwrap(), qaoa(&g, 2, 13).unwrap());
        let g2 = ProblemGraph::three_regular(10, 11).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn three_regular_really_is() {
        for seed in 0..5 {
            let g = ProblemGraph::three_regular(12, seed).unwrap();
            let mut deg = vec![0usize; 12];
            for (u, v) in g.edges() {
                deg[u] += 1;
                deg[v] += 1;
            }
            assert!(deg.iter().all(|&d| d == 3), "seed {seed}: {deg:?}");
        }
        assert!(ProblemGraph::three_regular(7, 0).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = ProblemGraph::three_regular(8, 2).unwrap();
        let text = g.to_edge_list();
        let back = ProblemGraph::from_edge_list(&text).unwrap();
        assert_eq!(back.num_vertices(), g.num_vertices());
        let a: Vec<_> = g.edges().collect();
        let b: Vec<_> = back.edges().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_list_rejects_garbage() {
        assert!(ProblemGraph::from_edge_list("1 1\n").is_err());
        assert!(ProblemGraph::from_edge_list("1 2 3\n").is_err());
        assert!(ProblemGraph::from_edge_list("x y\n").is_err());
        assert!(ProblemGraph::from_edge_list("# nothing\n").is_err());
    }

    #[test]
    fn random_circuit_is_seeded_and_in_range() {
        let a = random_circuit(5, 30, 4).unwrap();
        let b = random_circuit(5, 30, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 30);
        a.validate().unwrap();
        let c = random_circuit(1, 10, 0).unwrap();
        assert!(c.gates.iter().all(|g| !g.is_two_qubit()));
    }
}

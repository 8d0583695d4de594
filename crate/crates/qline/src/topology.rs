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

//! Coupling graphs: heavy-hex lattices, their reduction to a line with
//! pendant qubits, and the two-chip linked composition.
//!
//! The lattice is parametrized by an odd distance `d`: `d` rows of `2d-1`
//! qubits each, joined by bridge qubits on alternating columns (multiples of
//! four between even row pairs; column 2 mod 4 plus both end columns between
//! odd row pairs). Row qubits are numbered row-major; bridges follow,
//! ordered by (gap, column). Maximum degree is 3.
//!
//! [`to_lnn`] carves a serpentine line through the rows, descending through
//! one bridge per row junction (rightmost bridge below even rows, leftmost
//! below odd rows). Every unused bridge loses its lower edge and stays
//! pendant from its upper-row anchor. Those pendant qubits are what the
//! two-chip link attaches to under [`LinkKind::DanglingLink`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph over nodes `0..num_nodes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingGraph {
    num_nodes: usize,
    edges: BTreeSet<(usize, usize)>,
    labels: BTreeMap<usize, String>,
}

impl CouplingGraph {
    pub fn new(num_nodes: usize) -> Self {
        CouplingGraph { num_nodes, edges: BTreeSet::new(), labels: BTreeMap::new() }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u == v {
            return Err(Error::InvalidTopology(format!("self-loop on node {u}")));
        }
        if u >= self.num_nodes || v >= self.num_nodes {
            return Err(Error::InvalidTopology(format!(
                "edge ({u},{v}) out of range for {} nodes",
                self.num_nodes
            )));
        }
        self.edges.insert((u.min(v), u.max(v)));
        Ok(())
    }

    pub fn set_label(&mut self, node: usize, label: impl Into<String>) {
        self.labels.insert(node, label.into());
    }

    pub fn label(&self, node: usize) -> Option<&str> {
        self.labels.get(&node).map(|s| s.as_str())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as normalized (low, high) pairs in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if a == u {
                out.push(b);
            } else if b == u {
                out.push(a);
            }
        }
        out
    }

    pub fn degree(&self, u: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == u || b == u).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_nodes).map(|u| self.degree(u)).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        if self.num_nodes == 0 {
            return true;
        }
        self.bfs_distances(0).iter().all(|&d| d != usize::MAX)
    }

    /// Hop distance from `from` to every node; unreachable = usize::MAX.
    pub fn bfs_distances(&self, from: usize) -> Vec<usize> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut dist = vec![usize::MAX; self.num_nodes];
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn to_json(&self) -> TopologyJson {
        TopologyJson {
            num_nodes: self.num_nodes,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            labels: if self.labels.is_empty() { None } else { Some(self.labels.clone()) },
            ..TopologyJson::default()
        }
    }

    pub fn from_json(json: &TopologyJson) -> Result<Self> {
        let mut g = CouplingGraph::new(json.num_nodes);
        for &[u, v] in &json.edges {
            g.add_edge(u, v)?;
        }
        if let Some(labels) = &json.labels {
            for (&node, label) in labels {
                if node >= g.num_nodes {
                    return Err(Error::InvalidTopology(format!("label on unknown node {node}")));
                }
                g.set_label(node, label.clone());
            }
        }
        Ok(g)
    }
}

/// One physical position in the `d`-row lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LatticeNode {
    /// Row qubit at (row, column).
    Row(usize, usize),
    /// Bridge qubit between rows `gap` and `gap + 1` at `column`.
    Bridge(usize, usize),
}

/// Bridge columns for the gap between rows `g` and `g+1` of width `w`.
fn bridge_columns(g: usize, w: usize) -> Vec<usize> {
    if g % 2 == 0 {
        (0..w).step_by(4).collect()
    } else {
        let mut cols = vec![0];
        cols.extend((2..=w.saturating_sub(3)).step_by(4));
        cols.push(w - 1);
        cols
    }
}

/// Node enumeration behind [`heavy_hex`]: row qubits row-major, then
/// bridges by (gap, column).
fn lattice_nodes(d: usize) -> Vec<LatticeNode> {
    let w = 2 * d - 1;
    let mut nodes = Vec::new();
    for r in 0..d {
        for c in 0..w {
            nodes.push(LatticeNode::Row(r, c));
        }
    }
    for g in 0..d - 1 {
        for c in bridge_columns(g, w) {
            nodes.push(LatticeNode::Bridge(g, c));
        }
    }
    nodes
}

/// Heavy-hex coupling graph of odd distance `d >= 3`.
pub fn heavy_hex(d: usize) -> Result<CouplingGraph> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::InvalidTopology(format!(
            "heavy-hex distance must be odd and >= 3, got {d}"
        )));
    }
    let w = 2 * d - 1;
    let nodes = lattice_nodes(d);
    let mut graph = CouplingGraph::new(nodes.len());
    let mut bridge_id = BTreeMap::new();
    for (id, node) in nodes.iter().enumerate() {
        match *node {
            LatticeNode::Row(r, c) => graph.set_label(id, format!("r{r}c{c}")),
            LatticeNode::Bridge(g, c) => {
                graph.set_label(id, format!("b{g}c{c}"));
                bridge_id.insert((g, c), id);
            }
        }
    }
    for r in 0..d {
        for c in 0..w - 1 {
            graph.add_edge(r * w + c, r * w + c + 1)?;
        }
    }
    for (&(g, c), &id) in &bridge_id {
        graph.add_edge(g * w + c, id)?;
        graph.add_edge((g + 1) * w + c, id)?;
    }
    Ok(graph)
}

/// A backbone line with pendant qubits, derived from a coupling graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LnnTopology {
    /// Node ids in backbone order; consecutive entries are coupled.
    pub line: Vec<usize>,
    /// Backbone anchor -> its pendant (degree-1) node.
    pub dangling: BTreeMap<usize, usize>,
    /// Source-graph edges deleted by the reduction.
    pub removed_edges: BTreeSet<(usize, usize)>,
}

impl LnnTopology {
    pub fn num_nodes(&self) -> usize {
        self.line.len() + self.dangling.len()
    }

    /// Line index of a backbone node.
    pub fn position_of(&self, node: usize) -> Option<usize> {
        self.line.iter().position(|&n| n == node)
    }

    /// Pendant whose anchor comes first along the line, with its anchor's
    /// position. This is the deterministic link endpoint choice.
    pub fn first_dangling_in_line_order(&self) -> Option<(usize, usize)> {
        self.line
            .iter()
            .enumerate()
            .find_map(|(pos, anchor)| self.dangling.get(anchor).map(|&p| (p, pos)))
    }

    /// The reduced coupling graph: the line plus pendant edges.
    pub fn derived_graph(&self) -> CouplingGraph {
        let max_id = self
            .line
            .iter()
            .chain(self.dangling.values())
            .chain(self.dangling.keys())
            .copied()
            .max()
            .map_or(0, |m| m + 1);
        let mut g = CouplingGraph::new(max_id);
        for pair in self.line.windows(2) {
            g.add_edge(pair[0], pair[1]).expect("line nodes in range");
        }
        for (&anchor, &pendant) in &self.dangling {
            g.add_edge(anchor, pendant).expect("pendant nodes in range");
        }
        g
    }

    /// Same topology with every node id shifted by `offset`.
    pub fn offset(&self, offset: usize) -> LnnTopology {
        LnnTopology {
            line: self.line.iter().map(|&n| n + offset).collect(),
            dangling: self
                .dangling
                .iter()
                .map(|(&a, &p)| (a + offset, p + offset))
                .collect(),
            removed_edges: self
                .removed_edges
                .iter()
                .map(|&(u, v)| (u + offset, v + offset))
                .collect(),
        }
    }

    pub fn to_json(&self) -> TopologyJson {
        let derived = self.derived_graph();
        TopologyJson {
            num_nodes: self.num_nodes(),
            edges: derived.edges.iter().map(|&(a, b)| [a, b]).collect(),
            line: Some(self.line.clone()),
            dangling: Some(self.dangling.clone()),
            removed_edges: Some(self.removed_edges.iter().map(|&(a, b)| [a, b]).collect()),
            ..TopologyJson::default()
        }
    }

    pub fn from_json(json: &TopologyJson) -> Result<Self> {
        let line = json
            .line
            .clone()
            .ok_or_else(|| Error::InvalidTopology("missing 'line' field".into()))?;
        let dangling = json.dangling.clone().unwrap_or_default();
        let removed_edges: BTreeSet<(usize, usize)> = json
            .removed_edges
            .clone()
            .unwrap_or_default()
            .into_iter()
            .map(|[u, v]| (u.min(v), u.max(v)))
            .collect();
        let topo = LnnTopology { line, dangling, removed_edges };
        topo.validate()?;
        // The edge list, when present, must match the line + pendant shape.
        if !json.edges.is_empty() {
            let declared: BTreeSet<(usize, usize)> = json
                .edges
                .iter()
                .map(|&[u, v]| (u.min(v), u.max(v)))
                .collect();
            let expected: BTreeSet<(usize, usize)> = topo.derived_graph().edges().collect();
            if declared != expected {
                return Err(Error::InvalidTopology(
                    "edge list inconsistent with line and dangling fields".into(),
                ));
            }
        }
        Ok(topo)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &n in &self.line {
            if !seen.insert(n) {
                return Err(Error::InvalidTopology(format!("node {n} repeats on the line")));
            }
        }
        if self.line.len() < 2 && !self.dangling.is_empty() {
            return Err(Error::InvalidTopology("pendants require a backbone".into()));
        }
        for (&anchor, &pendant) in &self.dangling {
            if !seen.contains(&anchor) {
                return Err(Error::InvalidTopology(format!(
                    "dangling anchor {anchor} is not a backbone node"
                )));
            }
            if !seen.insert(pendant) {
                return Err(Error::InvalidTopology(format!(
                    "pendant {pendant} is not a fresh node"
                )));
            }
        }
        Ok(())
    }
}

/// Reduce a heavy-hex graph to a serpentine line with pendant qubits.
///
/// Even rows are walked left-to-right, odd rows right-to-left, descending
/// through the bridge at the walk's current end. Every other bridge keeps
/// only its upper-row edge and becomes a pendant. Applying the reduction to
/// an already-reduced graph returns the identical result.
pub fn to_lnn(graph: &CouplingGraph) -> Result<LnnTopology> {
    // Recognize the input: either a lattice or the reduction of one.
    for d in (3..).step_by(2) {
        let lattice = heavy_hex(d)?;
        if lattice.num_nodes() > graph.num_nodes() {
            break;
        }
        if lattice.num_nodes() == graph.num_nodes() {
            let reduced = reduce_lattice(d);
            if lattice.edges == graph.edges {
                return Ok(reduced);
            }
            if reduced.derived_graph().edges == graph.edges {
                // Already linear: fixed point.
                return Ok(reduced);
            }
        }
    }
    Err(Error::InvalidTopology(
        "graph is not a recognized heavy-hex lattice or its line reduction".into(),
    ))
}

fn reduce_lattice(d: usize) -> LnnTopology {
    let w = 2 * d - 1;
    let mut bridge_id = BTreeMap::new();
    for (id, node) in lattice_nodes(d).iter().enumerate() {
        if let LatticeNode::Bridge(g, c) = *node {
            bridge_id.insert((g, c), id);
        }
    }
    let mut line = Vec::new();
    let mut junctions = BTreeSet::new();
    for r in 0..d {
        if r % 2 == 0 {
            line.extend((0..w).map(|c| r * w + c));
        } else {
            line.extend((0..w).rev().map(|c| r * w + c));
        }
        if r + 1 < d {
            // Descend where the serpentine currently stands: the right end
            // below even rows, the left end below odd rows.
            let col = if r % 2 == 0 { w - 1 } else { 0 };
            let id = bridge_id[&(r, col)];
            junctions.insert(id);
            line.push(id);
        }
    }
    let mut dangling = BTreeMap::new();
    let mut removed_edges = BTreeSet::new();
    for (&(g, c), &id) in &bridge_id {
        if junctions.contains(&id) {
            continue;
        }
        let upper = g * w + c;
        let lower = (g + 1) * w + c;
        dangling.insert(upper, id);
        removed_edges.insert((lower.min(id), lower.max(id)));
    }
    LnnTopology { line, dangling, removed_edges }
}

/// How the inter-chip link attaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    /// Both endpoints are pendant (dangling) qubits, first in line order.
    DanglingLink,
    /// Both endpoints are seeded uniform random backbone nodes.
    RandomLink,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::DanglingLink => "dangling",
            LinkKind::RandomLink => "random",
        }
    }
}

impl std::str::FromStr for LinkKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dangling" => Ok(LinkKind::DanglingLink),
            "random" => Ok(LinkKind::RandomLink),
            other => Err(Error::Config(format!(
                "unknown link kind '{other}' (expected 'dangling' or 'random')"
            ))),
        }
    }
}

/// Two line-reduced chips joined by one link pair. Node ids are global:
/// chip 1's ids are offset by chip 0's node count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiChipTopology {
    pub chips: [LnnTopology; 2],
    /// (node on chip 0, node on chip 1).
    pub link: (usize, usize),
    pub link_kind: LinkKind,
}

/// Join two chips with one entangling link.
///
/// `DanglingLink` picks each chip's first pendant in line order (which is
/// also the lowest-numbered pendant under the lattice numbering).
/// `RandomLink` draws one backbone node per chip uniformly from `seed`.
pub fn link_chips(
    a: &LnnTopology,
    b: &LnnTopology,
    kind: LinkKind,
    seed: u64,
) -> Result<MultiChipTopology> {
    let offset = a.num_nodes();
    let chips = [a.clone(), b.offset(offset)];
    let link = match kind {
        LinkKind::DanglingLink => {
            let (pa, _) = a.first_dangling_in_line_order().ok_or_else(|| {
                Error::InvalidTopology("chip 0 has no dangling qubit to link".into())
            })?;
            let (pb, _) = chips[1].first_dangling_in_line_order().ok_or_else(|| {
                Error::InvalidTopology("chip 1 has no dangling qubit to link".into())
            })?;
            (pa, pb)
        }
        LinkKind::RandomLink => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let na = a.line[rng.random_range(0..a.line.len())];
            let nb = chips[1].line[rng.random_range(0..chips[1].line.len())];
            (na, nb)
        }
    };
    Ok(MultiChipTopology { chips, link, link_kind: kind })
}

impl MultiChipTopology {
    pub fn num_nodes(&self) -> usize {
        self.chips[0].num_nodes() + self.chips[1].num_nodes()
    }

    /// Which chip a global node id lives on.
    pub fn chip_of(&self, node: usize) -> usize {
        usize::from(node >= self.chips[0].num_nodes())
    }

    pub fn link_endpoint(&self, chip: usize) -> usize {
        if chip == 0 {
            self.link.0
        } else {
            self.link.1
        }
    }

    /// True when {u, v} is exactly the link pair.
    pub fn is_link_pair(&self, u: usize, v: usize) -> bool {
        (u, v) == self.link || (v, u) == self.link
    }

    /// True when (u, v) is executable directly: an intra-chip coupling or
    /// the link pair.
    pub fn is_coupled(&self, u: usize, v: usize) -> bool {
        if self.is_link_pair(u, v) {
            return true;
        }
        let (cu, cv) = (self.chip_of(u), self.chip_of(v));
        cu == cv && self.chips[cu].derived_graph().has_edge(u, v)
    }

    pub fn to_json(&self) -> TopologyJson {
        let mut edges: Vec<[usize; 2]> = Vec::new();
        for chip in &self.chips {
            edges.extend(chip.derived_graph().edges().map(|(u, v)| [u, v]));
        }
        edges.push([self.link.0, self.link.1]);
        edges.sort_unstable();
        TopologyJson {
            num_nodes: self.num_nodes(),
            edges,
            link: Some([self.link.0, self.link.1]),
            link_kind: Some(self.link_kind.as_str().to_string()),
            chips: Some(vec![self.chips[0].to_json(), self.chips[1].to_json()]),
            ..TopologyJson::default()
        }
    }

    pub fn from_json(json: &TopologyJson) -> Result<Self> {
        let chips_json = json
            .chips
            .as_ref()
            .ok_or_else(|| Error::InvalidTopology("missing 'chips' field".into()))?;
        if chips_json.len() != 2 {
            return Err(Error::InvalidTopology(format!(
                "expected exactly 2 chips, got {}",
                chips_json.len()
            )));
        }
        let chip0 = LnnTopology::from_json(&chips_json[0])?;
        let chip1 = LnnTopology::from_json(&chips_json[1])?;
        let link = json
            .link
            .ok_or_else(|| Error::InvalidTopology("missing 'link' field".into()))?;
        let kind: LinkKind = json
            .link_kind
            .as_deref()
            .ok_or_else(|| Error::InvalidTopology("missing 'link_kind' field".into()))?
            .parse()?;
        let topo = MultiChipTopology {
            chips: [chip0, chip1],
            link: (link[0], link[1]),
            link_kind: kind,
        };
        // Chip 1 ids must sit directly above chip 0's range, and the link
        // must span the two chips at valid attachment points.
        let split = topo.chips[0].num_nodes();
        if topo.chips[0].line.iter().chain(topo.chips[0].dangling.values()).any(|&n| n >= split) {
            return Err(Error::InvalidTopology("chip 0 ids exceed its node count".into()));
        }
        let hi = topo.num_nodes();
        if topo.chips[1]
            .line
            .iter()
            .chain(topo.chips[1].dangling.values())
            .any(|&n| n < split || n >= hi)
        {
            return Err(Error::InvalidTopology("chip 1 ids outside its global range".into()));
        }
        for (chip, endpoint) in [(0, link[0]), (1, link[1])] {
            let c = &topo.chips[chip];
            let valid = match kind {
                LinkKind::DanglingLink => c.dangling.values().any(|&p| p == endpoint),
                LinkKind::RandomLink => c.line.contains(&endpoint),
            };
            if !valid {
                return Err(Error::InvalidTopology(format!(
                    "link endpoint {endpoint} is not a valid {} attachment on chip {chip}",
                    kind.as_str()
                )));
            }
        }
        Ok(topo)
    }
}

/// The one-size-fits-all JSON exchange shape for every topology artifact.
/// Plain graphs fill `num_nodes`/`edges`; line reductions add `line`,
/// `dangling` and `removed_edges`; two-chip topologies add `chips`, `link`
/// and `link_kind`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyJson {
    pub num_nodes: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<usize, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dangling: Option<BTreeMap<usize, usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub removed_edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chips: Option<Vec<TopologyJson>>,
}

/// Parse any topology JSON document into the most specific structure it
/// describes, re-validating every structural invariant.
pub fn parse_topology_json(text: &str) -> Result<ParsedTopology> {
    let json: TopologyJson = serde_json::from_str(text)?;
    if json.chips.is_some() {
        return Ok(ParsedTopology::MultiChip(MultiChipTopology::from_json(&json)?));
    }
    if json.line.is_some() {
        return Ok(ParsedTopology::Lnn(LnnTopology::from_json(&json)?));
    }
    Ok(ParsedTopology::Graph(CouplingGraph::from_json(&json)?))
}

#[derive(Debug, Clone)]
pub enum ParsedTopology {
    Graph(CouplingGraph),
    Lnn(LnnTopology),
    MultiChip(MultiChipTopology),
}

/// Text-art rendering of a heavy-hex lattice (small `d` only).
pub fn render_heavy_hex(d: usize) -> Result<String> {
    heavy_hex(d)?; // validate d
    let w = 2 * d - 1;
    let mut bridge_id = BTreeMap::new();
    for (id, node) in lattice_nodes(d).iter().enumerate() {
        if let LatticeNode::Bridge(g, c) = *node {
            bridge_id.insert((g, c), id);
        }
    }
    let cell = 4usize;
    let mut out = String::new();
    for r in 0..d {
        let mut row = String::new();
        for c in 0..w {
            let id = format!("{:>3}", r * w + c);
            row.push_str(&id);
            if c + 1 < w {
                row.push('-');
            }
        }
        out.push_str(row.trim_end());
        out.push('\n');
        if r + 1 < d {
            let cols = bridge_columns(r, w);
            for pad in 0..2 {
                let mut line = vec![b' '; w * cell];
                for &c in &cols {
                    let center = c * cell + 2;
                    if pad == 0 {
                        line[center] = b'|';
                    } else {
                        let id = format!("{:>3}", bridge_id[&(r, c)]);
                        line[center - 2..center + 1].copy_from_slice(id.as_bytes());
                    }
                }
                let mut s = String::from_utf8(line).unwrap();
                while s.ends_with(' ') {
                    s.pop();
                }
                out.push_str(&s);
                out.push('\n');
            }
            // Mirror the connector below the bridge ids.
            let mut line = vec![b' '; w * cell];
            for &c in &cols {
                line[c * cell + 2] = b'|';
            }
            let mut s = String::from_utf8(line).unwrap();
            while s.ends_with(' ') {
                s.pop();
            }
            out.push_str(&s);
            out.push('\n');
        }
    }
    Ok(out)
}

/// Text-art rendering of a line reduction: the backbone with pendants
/// hanging below their anchors.
pub fn render_lnn(topo: &LnnTopology) -> String {
    let cell = 5usize;
    let mut top = String::new();
    for (i, &n) in topo.line.iter().enumerate() {
        top.push_str(&format!("{n:>3}"));
        if i + 1 < topo.line.len() {
            top.push_str("--");
        }
    }
    let mut bars = vec![b' '; topo.line.len() * cell];
    let mut ids = vec![b' '; topo.line.len() * cell];
    let mut any = false;
    for (i, &n) in topo.line.iter().enumerate() {
        if let Some(&p) = topo.dangling.get(&n) {
            any = true;
            let center = i * cell + 2;
            bars[center] = b'|';
            let id = format!("{p:>3}");
            ids[center - 2..center + 1].copy_from_slice(id.as_bytes());
        }
    }
    let mut out = top;
    out.push('\n');
    if any {
        for row in [bars, ids] {
            let mut s = String::from_utf8(row).unwrap();
            while s.ends_with(' ') {
                s.pop();
            }
            out.push_str(&s);
            out.push('\n');
        }
    }
    out
}

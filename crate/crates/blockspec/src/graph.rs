//! Simple undirected graphs: CSR adjacency, degree bookkeeping, connectivity,
//! degree pruning, snapshot merging, and edge-list I/O.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Simple undirected graph. No self-loops, each edge stored once as an
/// ordered pair `(i, j)` with `i < j`. Neighbor lists and degrees are
/// cached in compressed sparse row form at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    degrees: Vec<usize>,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) are collapsed; self-loops and out-of-range endpoints are
    /// rejected.
    pub fn new(node_count: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut canon = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::Invalid(format!("self-loop at node {a}")));
            }
            if a >= node_count || b >= node_count {
                return Err(Error::Invalid(format!(
                    "edge ({a},{b}) out of range for {node_count} nodes"
                )));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(Self::from_sorted_unique(node_count, canon))
    }

    /// Fast path when edges are already canonical `(i < j)`, sorted and
    /// unique (the sampler produces them in exactly this order).
    pub(crate) fn from_sorted_unique(node_count: usize, edges: Vec<(usize, usize)>) -> Graph {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.iter().all(|&(a, b)| a < b && b < node_count));
        let mut degrees = vec![0usize; node_count];
        for &(a, b) in &edges {
            degrees[a] += 1;
            degrees[b] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for &d in &degrees {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor = offsets[..node_count].to_vec();
        let mut neighbors = vec![0usize; acc];
        for &(a, b) in &edges {
            neighbors[cursor[a]] = b;
            cursor[a] += 1;
            neighbors[cursor[b]] = a;
            cursor[b] += 1;
        }
        // Neighbor lists come out sorted because edges are sorted and each
        // endpoint receives its partners in increasing order.
        Graph {
            node_count,
            edges,
            offsets,
            neighbors,
            degrees,
        }
    }

    pub fn empty(node_count: usize) -> Graph {
        Self::from_sorted_unique(node_count, Vec::new())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as canonical `(i, j)` pairs with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, node: usize) -> usize {
        self.degrees[node]
    }

    /// Degree of every node; the sum always equals `2 * edge_count`.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a == b || a >= self.node_count || b >= self.node_count {
            return false;
        }
        let (s, t) = if self.degrees[a] <= self.degrees[b] {
            (a, b)
        } else {
            (b, a)
        };
        self.neighbors(s).binary_search(&t).is_ok()
    }

    /// Dense adjacency matrix. Intended for desk-scale eigensolves.
    pub fn adjacency_dense(&self) -> ndarray::Array2<f64> {
        let mut m = ndarray::Array2::zeros((self.node_count, self.node_count));
        for &(a, b) in &self.edges {
            m[[a, b]] = 1.0;
            m[[b, a]] = 1.0;
        }
        m
    }

    /// Induced subgraph on `nodes` (must be sorted, unique, in range).
    /// The i-th entry of `nodes` becomes new node i.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> (Graph, IdMap) {
        debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        let map = IdMap::from_kept(self.node_count, nodes);
        let mut edges = Vec::new();
        for &(a, b) in &self.edges {
            if let (Some(na), Some(nb)) = (map.new_id(a), map.new_id(b)) {
                edges.push((na, nb));
            }
        }
        // Canonical order is preserved: the map is monotone.
        (Graph::from_sorted_unique(nodes.len(), edges), map)
    }

    /// Connected components via BFS; returns one sorted node list per
    /// component, in order of smallest contained node id.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.node_count];
        let mut comps = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        for start in 0..self.node_count {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut comp = vec![start];
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Induced subgraph on the largest connected component. Ties on size are
    /// broken by the smallest contained original node id, which makes the
    /// result deterministic.
    pub fn largest_connected_component(&self) -> (Graph, IdMap) {
        let comps = self.connected_components();
        let best = comps
            .iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
            .expect("graph has at least one node");
        self.induced_subgraph(best)
    }

    /// Fraction of nodes contained in the largest connected component.
    pub fn largest_component_fraction(&self) -> f64 {
        let comps = self.connected_components();
        let m = comps.iter().map(Vec::len).max().unwrap_or(0);
        m as f64 / self.node_count.max(1) as f64
    }

    /// Repeatedly removes nodes of degree below `min_deg` until no such node
    /// remains, then returns the surviving induced subgraph. Deletion lowers
    /// neighbor degrees, so the peeling is iterated to a fixed point.
    pub fn prune_min_degree(&self, min_deg: usize) -> (Graph, IdMap) {
        let r = self.prune_min_degree_rounds(min_deg, None);
        (r.graph, r.map)
    }

    /// Degree peeling with an explicit round budget. `max_rounds = Some(1)`
    /// is the literal single-pass reading; `None` iterates to a fixed point.
    pub fn prune_min_degree_rounds(&self, min_deg: usize, max_rounds: Option<usize>) -> PruneResult {
        let mut deg = self.degrees.clone();
        let mut alive = vec![true; self.node_count];
        let mut rounds = 0usize;
        let mut fixed_point = true;
        loop {
            if let Some(m) = max_rounds {
                if rounds >= m {
                    fixed_point = !alive
                        .iter()
                        .zip(&deg)
                        .any(|(&a, &d)| a && d < min_deg);
                    break;
                }
            }
            let doomed: Vec<usize> = (0..self.node_count)
                .filter(|&i| alive[i] && deg[i] < min_deg)
                .collect();
            if doomed.is_empty() {
                break;
            }
            rounds += 1;
            for &u in &doomed {
                alive[u] = false;
            }
            for &u in &doomed {
                for &v in self.neighbors(u) {
                    if alive[v] {
                        deg[v] = deg[v].saturating_sub(1);
                    }
                }
            }
        }
        let kept: Vec<usize> = (0..self.node_count).filter(|&i| alive[i]).collect();
        let (graph, map) = self.induced_subgraph(&kept);
        PruneResult {
            graph,
            map,
            rounds,
            fixed_point,
        }
    }

    /// Union of edge sets over snapshots sharing one node-id universe.
    pub fn merge_snapshots(snaps: &[Graph]) -> Result<Graph> {
        let first = snaps
            .first()
            .ok_or_else(|| Error::Invalid("no snapshots to merge".into()))?;
        let n = first.node_count;
        for s in snaps {
            if s.node_count != n {
                return Err(Error::SnapshotMismatch(n, s.node_count));
            }
        }
        let mut edges: Vec<(usize, usize)> = snaps.iter().flat_map(|s| s.edges.iter().copied()).collect();
        edges.sort_unstable();
        edges.dedup();
        Ok(Graph::from_sorted_unique(n, edges))
    }
}

/// Outcome of a degree-pruning pass: surviving graph, id map, number of
/// peel rounds executed, and whether a fixed point was reached.
#[derive(Debug, Clone)]
pub struct PruneResult {
    pub graph: Graph,
    pub map: IdMap,
    pub rounds: usize,
    pub fixed_point: bool,
}

/// Old-id to new-id mapping produced by node-dropping transforms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    old_to_new: Vec<Option<usize>>,
    new_to_old: Vec<usize>,
}

impl IdMap {
    pub fn identity(n: usize) -> IdMap {
        IdMap {
            old_to_new: (0..n).map(Some).collect(),
            new_to_old: (0..n).collect(),
        }
    }

    fn from_kept(old_count: usize, kept_sorted: &[usize]) -> IdMap {
        let mut old_to_new = vec![None; old_count];
        for (new, &old) in kept_sorted.iter().enumerate() {
            old_to_new[old] = Some(new);
        }
        IdMap {
            old_to_new,
            new_to_old: kept_sorted.to_vec(),
        }
    }

    pub fn new_id(&self, old: usize) -> Option<usize> {
        self.old_to_new.get(old).copied().flatten()
    }

    pub fn old_id(&self, new: usize) -> usize {
        self.new_to_old[new]
    }

    /// Number of surviving nodes.
    pub fn kept(&self) -> usize {
        self.new_to_old.len()
    }

    pub fn old_count(&self) -> usize {
        self.old_to_new.len()
    }

    /// Composes `self` (old -> mid) with `then` (mid -> new).
    pub fn compose(&self, then: &IdMap) -> IdMap {
        let old_to_new = self
            .old_to_new
            .iter()
            .map(|m| m.and_then(|mid| then.new_id(mid)))
            .collect();
        let new_to_old = then.new_to_old.iter().map(|&mid| self.old_id(mid)).collect();
        IdMap {
            old_to_new,
            new_to_old,
        }
    }
}

/// Ground-truth or predicted class assignment: one label in `0..k` per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLabeling {
    labels: Vec<usize>,
    class_sizes: Vec<usize>,
}

impl NodeLabeling {
    pub fn new(labels: Vec<usize>) -> NodeLabeling {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        Self::with_classes(labels, k)
    }

    pub fn with_classes(labels: Vec<usize>, class_count: usize) -> NodeLabeling {
        let mut class_sizes = vec![0usize; class_count];
        for &l in &labels {
            assert!(l < class_count, "label {l} out of range");
            class_sizes[l] += 1;
        }
        NodeLabeling {
            labels,
            class_sizes,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    /// Node ids belonging to class `c`.
    pub fn class_members(&self, c: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == c).collect()
    }

    /// Labeling restricted to the nodes surviving in `map`.
    pub fn restrict(&self, map: &IdMap) -> NodeLabeling {
        let labels = (0..map.kept()).map(|new| self.labels[map.old_id(new)]).collect();
        NodeLabeling::with_classes(labels, self.class_sizes.len())
    }
}

/// Graph loaded from text together with its token table and cleanup counts.
#[derive(Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// Original node tokens in first-appearance order; index = node id.
    pub node_names: Vec<String>,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

/// Parses a whitespace-separated edge list. Lines starting with `#` and
/// blank lines are ignored. Tokens are assigned contiguous 0-based ids in
/// first-appearance order; self-loops are dropped (counted), duplicate
/// edges collapse to one.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<LoadedGraph> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut self_loops = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected two node tokens, got {trimmed:?}"),
                })
            }
        };
        let mut intern = |tok: &str| -> usize {
            *ids.entry(tok.to_string()).or_insert_with(|| {
                names.push(tok.to_string());
                names.len() - 1
            })
        };
        let ia = intern(a);
        let ib = intern(b);
        if ia == ib {
            self_loops += 1;
            continue;
        }
        edges.push((ia.min(ib), ia.max(ib)));
    }
    let raw = edges.len();
    edges.sort_unstable();
    edges.dedup();
    let duplicates = raw - edges.len();
    Ok(LoadedGraph {
        graph: Graph::from_sorted_unique(names.len(), edges),
        node_names: names,
        self_loops_dropped: self_loops,
        duplicates_dropped: duplicates,
    })
}

/// Parses several edge lists against one shared token table, so temporal
/// snapshots agree on node ids. Every graph spans the union universe.
pub fn load_edge_lists_shared<R: BufRead>(readers: Vec<R>) -> Result<(Vec<Graph>, Vec<String>)> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut edge_sets: Vec<Vec<(usize, usize)>> = Vec::new();
    for reader in readers {
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut it = trimmed.split_whitespace();
            let (a, b) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("expected two node tokens, got {trimmed:?}"),
                    })
                }
            };
            let mut intern = |tok: &str| -> usize {
                *ids.entry(tok.to_string()).or_insert_with(|| {
                    names.push(tok.to_string());
                    names.len() - 1
                })
            };
            let ia = intern(a);
            let ib = intern(b);
            if ia != ib {
                edges.push((ia.min(ib), ia.max(ib)));
            }
        }
        edge_sets.push(edges);
    }
    let n = names.len();
    let graphs = edge_sets
        .into_iter()
        .map(|mut edges| {
            edges.sort_unstable();
            edges.dedup();
            Graph::from_sorted_unique(n, edges)
        })
        .collect();
    Ok((graphs, names))
}

/// Writes the edge list, one `a b` pair per LF-terminated line. When
/// `names` is given it must cover every node; otherwise decimal ids are used.
pub fn save_edge_list<W: Write>(g: &Graph, mut writer: W, names: Option<&[String]>) -> Result<()> {
    for &(a, b) in g.edges() {
        match names {
            Some(ns) => writeln!(writer, "{} {}", ns[a], ns[b])?,
            None => writeln!(writer, "{a} {b}")?,
        }
    }
    Ok(())
}

/// Parses a `node_token<TAB>label` file against the token table of a loaded
/// graph. Label tokens are mapped to 0-based classes in first-appearance
/// order. Every node must receive exactly one label.
pub fn load_labels<R: BufRead>(reader: R, node_names: &[String]) -> Result<NodeLabeling> {
    let ids: HashMap<&str, usize> = node_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut labels: Vec<Option<usize>> = vec![None; node_names.len()];
    let mut classes: HashMap<String, usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim_end_matches(['\n', '\r']);
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let (tok, lab) = trimmed.split_once('\t').ok_or_else(|| Error::Parse {
            line: lineno,
            msg: "expected node_token<TAB>label".into(),
        })?;
        let node = *ids.get(tok.trim()).ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("unknown node token {:?}", tok.trim()),
        })?;
        let next = classes.len();
        let class = *classes.entry(lab.trim().to_string()).or_insert(next);
        if labels[node].replace(class).is_some() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("node {tok:?} labeled twice"),
            });
        }
    }
    let labels: Vec<usize> = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.ok_or_else(|| Error::LabelMismatch(format!("node {:?} has no label", node_names[i])))
        })
        .collect::<Result<_>>()?;
    Ok(NodeLabeling::with_classes(labels, classes.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::new(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn degrees_single_edge() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(g.degrees(), &[1, 1]);
    }

    #[test]
    fn degrees_empty_graph() {
        let g = Graph::empty(3);
        assert_eq!(g.degrees(), &[0, 0, 0]);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn degrees_triangle() {
        let g = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(g.degrees(), &[2, 2, 2]);
    }

    #[test]
    fn degree_sum_is_twice_edges() {
        let g = Graph::new(6, &[(0, 1), (1, 2), (3, 4), (0, 2), (4, 5)]).unwrap();
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
    }

    #[test]
    fn rejects_self_loop_and_out_of_range() {
        assert!(Graph::new(3, &[(1, 1)]).is_err());
        assert!(Graph::new(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn collapses_duplicates() {
        let g = Graph::new(3, &[(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn lcc_triangle_plus_isolated() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let (lcc, map) = g.largest_connected_component();
        assert_eq!(lcc.node_count(), 3);
        assert_eq!(lcc.edge_count(), 3);
        for i in 0..3 {
            assert_eq!(map.new_id(i), Some(i));
        }
        assert_eq!(map.new_id(3), None);
    }

    #[test]
    fn lcc_tie_breaks_by_smallest_id() {
        let g = Graph::new(4, &[(0, 1), (2, 3)]).unwrap();
        let (lcc, map) = g.largest_connected_component();
        assert_eq!(lcc.node_count(), 2);
        assert_eq!(map.new_id(0), Some(0));
        assert_eq!(map.new_id(1), Some(1));
        assert_eq!(map.new_id(2), None);
    }

    #[test]
    fn lcc_connected_is_identity() {
        let g = path(5);
        let (lcc, map) = g.largest_connected_component();
        assert_eq!(lcc, g);
        assert_eq!(map, IdMap::identity(5));
    }

    #[test]
    fn lcc_idempotent() {
        let g = Graph::new(7, &[(0, 1), (1, 2), (4, 5), (5, 6), (4, 6)]).unwrap();
        let (a, _) = g.largest_connected_component();
        let (b, _) = a.largest_connected_component();
        assert_eq!(a, b);
    }

    #[test]
    fn prune_path_to_empty() {
        // Endpoints peel first, the middle node then has degree 0.
        let g = path(3);
        let (pruned, _) = g.prune_min_degree(2);
        assert_eq!(pruned.node_count(), 0);
        let r = g.prune_min_degree_rounds(2, None);
        assert_eq!(r.rounds, 2);
        assert!(r.fixed_point);
    }

    #[test]
    fn prune_keeps_triangle() {
        let g = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let (pruned, _) = g.prune_min_degree(2);
        assert_eq!(pruned, g);
    }

    #[test]
    fn prune_removes_pendant_keeps_triangle() {
        // One peel round removes the pendant; node 0 retains degree 2.
        let g = Graph::new(4, &[(0, 1), (1, 2), (0, 2), (0, 3)]).unwrap();
        let r = g.prune_min_degree_rounds(2, None);
        assert_eq!(r.graph.node_count(), 3);
        assert_eq!(r.graph.degrees(), &[2, 2, 2]);
        assert_eq!(r.rounds, 1);
    }

    #[test]
    fn prune_single_pass_mode_can_stop_early() {
        let g = path(4); // peeling 0 and 3 leaves 1-2 with degree 1 each
        let r = g.prune_min_degree_rounds(2, Some(1));
        assert_eq!(r.graph.node_count(), 2);
        assert!(!r.fixed_point);
    }

    #[test]
    fn prune_min_degree_one_single_pass_suffices() {
        let g = Graph::new(5, &[(0, 1), (2, 3)]).unwrap();
        let r = g.prune_min_degree_rounds(1, None);
        assert_eq!(r.graph.node_count(), 4);
        assert!(r.rounds <= 1);
    }

    #[test]
    fn merge_union() {
        let a = Graph::new(3, &[(0, 1)]).unwrap();
        let b = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let m = Graph::merge_snapshots(&[a, b]).unwrap();
        assert_eq!(m.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn merge_empty_snapshots() {
        let m = Graph::merge_snapshots(&[Graph::empty(4), Graph::empty(4)]).unwrap();
        assert_eq!(m.edge_count(), 0);
        assert_eq!(m.node_count(), 4);
    }

    #[test]
    fn merge_disjoint_edge_sets() {
        let a = Graph::new(4, &[(0, 1)]).unwrap();
        let b = Graph::new(4, &[(2, 3)]).unwrap();
        let m = Graph::merge_snapshots(&[a, b]).unwrap();
        assert_eq!(m.edges(), &[(0, 1), (2, 3)]);
    }

    #[test]
    fn merge_rejects_mismatched_universe() {
        let a = Graph::empty(3);
        let b = Graph::empty(4);
        assert!(Graph::merge_snapshots(&[a, b]).is_err());
    }

    #[test]
    fn load_simple_path() {
        let l = load_edge_list("0 1\n1 2\n".as_bytes()).unwrap();
        assert_eq!(l.graph.node_count(), 3);
        assert_eq!(l.graph.edge_count(), 2);
        assert_eq!(l.self_loops_dropped, 0);
    }

    #[test]
    fn load_collapses_reversed_duplicate() {
        let l = load_edge_list("a b\nb a\n".as_bytes()).unwrap();
        assert_eq!(l.graph.node_count(), 2);
        assert_eq!(l.graph.edge_count(), 1);
        assert_eq!(l.duplicates_dropped, 1);
        assert_eq!(l.node_names, vec!["a", "b"]);
    }

    #[test]
    fn load_drops_self_loop_with_count() {
        let l = load_edge_list("0 0\n0 1\n".as_bytes()).unwrap();
        assert_eq!(l.graph.edge_count(), 1);
        assert_eq!(l.self_loops_dropped, 1);
    }

    #[test]
    fn load_reports_line_of_malformed_input() {
        let err = load_edge_list("0 1\nbroken\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_skips_comments_and_blanks() {
        let l = load_edge_list("# header\n\n0 1\n".as_bytes()).unwrap();
        assert_eq!(l.graph.edge_count(), 1);
    }

    #[test]
    fn save_load_round_trip() {
        let g = Graph::new(5, &[(0, 3), (1, 2), (3, 4)]).unwrap();
        let mut buf = Vec::new();
        save_edge_list(&g, &mut buf, None).unwrap();
        let l = load_edge_list(buf.as_slice()).unwrap();
        // Identity up to relabeling: same degree multiset and edge count.
        assert_eq!(l.graph.edge_count(), g.edge_count());
        let mut d1 = l.graph.degrees().to_vec();
        let mut d2: Vec<usize> = g.degrees().iter().copied().filter(|&d| d > 0).collect();
        d1.sort_unstable();
        d2.sort_unstable();
        // Isolated nodes have no edges, so they vanish on reload.
        assert_eq!(d1, d2);
    }

    #[test]
    fn labels_parse_and_restrict() {
        let l = load_edge_list("a b\nb c\nc d\n".as_bytes()).unwrap();
        let lab = load_labels("a\tleft\nb\tleft\nc\tright\nd\tright\n".as_bytes(), &l.node_names)
            .unwrap();
        assert_eq!(lab.labels(), &[0, 0, 1, 1]);
        assert_eq!(lab.class_sizes(), &[2, 2]);
        let (_, map) = l.graph.induced_subgraph(&[1, 2, 3]);
        let sub = lab.restrict(&map);
        assert_eq!(sub.labels(), &[0, 1, 1]);
    }

    #[test]
    fn labels_error_on_unlabeled_node() {
        let l = load_edge_list("a b\n".as_bytes()).unwrap();
        assert!(load_labels("a\t0\n".as_bytes(), &l.node_names).is_err());
    }

    #[test]
    fn idmap_compose() {
        let g = path(6);
        let (g1, m1) = g.induced_subgraph(&[1, 2, 3, 4]);
        let (_, m2) = g1.induced_subgraph(&[0, 2, 3]);
        let c = m1.compose(&m2);
        assert_eq!(c.new_id(1), Some(0));
        assert_eq!(c.new_id(3), Some(1));
        assert_eq!(c.new_id(0), None);
        assert_eq!(c.old_id(2), 4);
    }

    #[test]
    fn has_edge_lookup() {
        let g = Graph::new(4, &[(0, 2), (2, 3)]).unwrap();
        assert!(g.has_edge(0, 2));
        assert!(g.has_edge(2, 0));
        assert!(!g.has_edge(0, 3));
        assert!(!g.has_edge(1, 1));
    }
}

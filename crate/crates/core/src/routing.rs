//! Cluster-head election, leaf attachment, the cluster-head spanning tree and
//! per-link traffic scheduling.

use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;

use rand::seq::index;

use crate::rng;
use crate::topology::{shortest_paths, HeapEntry, NetworkTopology, NodeId};
use crate::{Error, Result};

/// Redraws allowed when an election produces no cluster head at all.
pub const ELECTION_ATTEMPTS: usize = 100;

/// Two path lengths closer than this (relative) count as a tie.
const TIE_TOLERANCE: f64 = 1e-9;

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Bernoulli election: node `i` draws `T_u ~ U[0, 1)` and becomes a cluster
/// head iff `T_u <= thr`. An empty outcome is redrawn from a derived seed.
pub fn select_cluster_heads(topo: &NetworkTopology, thr: f64, seed: u64) -> Result<Vec<NodeId>> {
    if !(thr > 0.0 && thr <= 1.0) {
        return Err(Error::InvalidParameter(format!("threshold must lie in (0, 1], got {thr}")));
    }
    for attempt in 0..ELECTION_ATTEMPTS {
        let draw = rng::derive(seed, "cluster-heads", attempt as u64);
        let heads: Vec<NodeId> =
            (0..topo.node_count()).filter(|&i| rng::unit_draw(draw, i as u64) <= thr).collect();
        if !heads.is_empty() {
            return Ok(heads);
        }
    }
    Err(Error::NoClusterHeads { seed, attempts: ELECTION_ATTEMPTS })
}

/// Exactly `m` cluster heads chosen uniformly without replacement. Used where
/// an experiment fixes the number of measurements rather than the threshold.
pub fn select_cluster_heads_exact(topo: &NetworkTopology, m: usize, seed: u64) -> Result<Vec<NodeId>> {
    let n = topo.node_count();
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!("need 1 <= m <= {n}, got {m}")));
    }
    let mut rng = rng::stream(seed, "cluster-heads-exact", 0);
    let mut heads = index::sample(&mut rng, n, m).into_vec();
    heads.sort_unstable();
    Ok(heads)
}

/// Partition of the nodes into clusters, one per cluster head.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    heads: Vec<NodeId>,
    member_of: Vec<usize>,
    leaf_paths: Vec<Vec<usize>>,
}

impl ClusterAssignment {
    /// Number of clusters `M`.
    pub fn cluster_count(&self) -> usize {
        self.heads.len()
    }

    pub fn node_count(&self) -> usize {
        self.member_of.len()
    }

    /// Cluster heads in ascending id order; cluster `j` is headed by `heads()[j]`.
    pub fn heads(&self) -> &[NodeId] {
        &self.heads
    }

    pub fn head_of_cluster(&self, j: usize) -> NodeId {
        self.heads[j]
    }

    pub fn cluster_of(&self, node: NodeId) -> usize {
        self.member_of[node]
    }

    pub fn is_head(&self, node: NodeId) -> bool {
        self.heads[self.member_of[node]] == node
    }

    /// Hop sequence from `node` to its cluster head (just `[node]` for a head).
    pub fn leaf_path(&self, node: NodeId) -> &[usize] {
        &self.leaf_paths[node]
    }

    /// Members of every cluster, each list in ascending id order.
    pub fn clusters(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.heads.len()];
        for (node, &j) in self.member_of.iter().enumerate() {
            out[j].push(node);
        }
        out
    }

    /// One `id cluster_j is_ch` line per node.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for node in 0..self.node_count() {
            let _ = writeln!(out, "{node} {} {}", self.member_of[node], u8::from(self.is_head(node)));
        }
        out
    }
}

/// Attaches every non-head node to the head at minimum shortest-path distance
/// (ties to the lowest head id) and records the realized hop sequence.
/// Relays on a leaf's path do not change cluster membership.
pub fn assign_leaves(topo: &NetworkTopology, heads: &[NodeId]) -> Result<ClusterAssignment> {
    let n = topo.node_count();
    if heads.is_empty() {
        return Err(Error::InvalidParameter("at least one cluster head is required".into()));
    }
    let mut heads = heads.to_vec();
    heads.sort_unstable();
    heads.dedup();
    if let Some(&h) = heads.iter().find(|&&h| h >= n) {
        return Err(Error::InvalidParameter(format!("cluster head {h} is not a sensor node")));
    }

    // multi-source Dijkstra on (distance, owning head) labels
    let nv = topo.vertex_count();
    let mut dist = vec![f64::INFINITY; nv];
    let mut owner = vec![usize::MAX; nv];
    let mut parent = vec![usize::MAX; nv];
    let mut done = vec![false; nv];
    let mut heap = BinaryHeap::new();
    for &h in &heads {
        dist[h] = 0.0;
        owner[h] = h;
        heap.push(HeapEntry { dist: 0.0, tag: h, vertex: h });
    }
    while let Some(HeapEntry { dist: d, tag: o, vertex: u }) = heap.pop() {
        if done[u] || o != owner[u] {
            continue;
        }
        done[u] = true;
        for &(v, w) in topo.neighbors(u) {
            if done[v] {
                continue;
            }
            let nd = d + w;
            let better = if dist[v].is_finite() && ties(nd, dist[v]) { o < owner[v] } else { nd < dist[v] };
            if better {
                dist[v] = nd;
                owner[v] = o;
                parent[v] = u;
                heap.push(HeapEntry { dist: nd, tag: o, vertex: v });
            }
        }
    }

    let cluster_index: BTreeMap<NodeId, usize> = heads.iter().enumerate().map(|(j, &h)| (h, j)).collect();
    let mut member_of = Vec::with_capacity(n);
    let mut leaf_paths = Vec::with_capacity(n);
    for v in 0..n {
        if owner[v] == usize::MAX {
            return Err(Error::Unreachable(v));
        }
        member_of.push(cluster_index[&owner[v]]);
        let mut path = vec![v];
        let mut cur = v;
        while cur != owner[v] {
            cur = parent[cur];
            path.push(cur);
        }
        leaf_paths.push(path);
    }
    Ok(ClusterAssignment { heads, member_of, leaf_paths })
}

/// One edge of the cluster-head tree together with its multi-hop route.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    /// Shortest-path length between the endpoints.
    pub weight: f64,
    /// Vertex sequence from `a` to `b` through the connectivity graph.
    pub path: Vec<usize>,
}

/// Minimum spanning tree over the cluster heads and the sink.
#[derive(Debug, Clone, PartialEq)]
pub struct ChTree {
    sink: usize,
    edges: Vec<TreeEdge>,
}

impl ChTree {
    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// For each tree vertex other than the sink: `(vertex, parent, route from
    /// vertex to parent)`, listed so that children precede their parents.
    pub fn upward_order(&self) -> Vec<(usize, usize, Vec<usize>)> {
        let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (k, e) in self.edges.iter().enumerate() {
            adj.entry(e.a).or_default().push((e.b, k));
            adj.entry(e.b).or_default().push((e.a, k));
        }
        let mut order = Vec::with_capacity(self.edges.len());
        let mut stack = vec![(self.sink, usize::MAX)];
        while let Some((v, from)) = stack.pop() {
            for &(w, k) in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
                if w == from {
                    continue;
                }
                let e = &self.edges[k];
                let mut route = e.path.clone();
                if e.a != w {
                    route.reverse();
                }
                order.push((w, v, route));
                stack.push((w, v));
            }
        }
        order.reverse();
        order
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Kruskal over the complete graph on heads ∪ {sink}, weighted by
/// shortest-path distance; ties broken by the endpoint ids.
pub fn build_ch_mst(topo: &NetworkTopology, heads: &[NodeId]) -> Result<ChTree> {
    if heads.is_empty() {
        return Err(Error::InvalidParameter("at least one cluster head is required".into()));
    }
    let mut terminals = heads.to_vec();
    terminals.sort_unstable();
    terminals.dedup();
    terminals.push(topo.sink_vertex());
    let trees = terminals.iter().map(|&t| shortest_paths(topo, t)).collect::<Result<Vec<_>>>()?;

    let mut candidates = Vec::with_capacity(terminals.len() * (terminals.len() - 1) / 2);
    for (i, tree) in trees.iter().enumerate() {
        for (j, &t) in terminals.iter().enumerate().skip(i + 1) {
            candidates.push((tree.dist[t], i, j));
        }
    }
    candidates.sort_by(|x, y| {
        x.0.total_cmp(&y.0).then_with(|| (terminals[x.1], terminals[x.2]).cmp(&(terminals[y.1], terminals[y.2])))
    });

    let mut dsu = DisjointSet::new(terminals.len());
    let mut edges = Vec::with_capacity(terminals.len() - 1);
    for (weight, i, j) in candidates {
        if dsu.union(i, j) {
            edges.push(TreeEdge { a: terminals[i], b: terminals[j], weight, path: trees[i].path_to(terminals[j])? });
            if edges.len() + 1 == terminals.len() {
                break;
            }
        }
    }
    Ok(ChTree { sink: topo.sink_vertex(), edges })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cycle {
    /// First cycle: heads also ship the sign and address of every member.
    Bootstrap,
    Steady,
}

/// Application payload accounting, in octets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PayloadModel {
    pub capacity: u64,
    pub measurement: u64,
    pub address: u64,
    /// Sign plus short address per cluster member, bootstrap cycle only.
    pub bootstrap_member: u64,
}

impl Default for PayloadModel {
    /// ZigBee: 87 payload octets, 2-octet samples and short addresses.
    fn default() -> Self {
        Self { capacity: 87, measurement: 2, address: 2, bootstrap_member: 3 }
    }
}

impl PayloadModel {
    pub fn record(&self) -> u64 {
        self.measurement + self.address
    }

    /// Packets needed for `octets` of greedily packed payload.
    pub fn packets_for(&self, octets: u64) -> u64 {
        octets.div_ceil(self.capacity)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkLoad {
    pub packets: u64,
    pub octets: u64,
}

/// Packets and octets per directed link for one aggregation cycle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrafficLedger {
    links: BTreeMap<(usize, usize), LinkLoad>,
}

impl TrafficLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, src: usize, dst: usize, packets: u64, octets: u64) {
        let load = self.links.entry((src, dst)).or_default();
        load.packets += packets;
        load.octets += octets;
    }

    /// Adds the same load on every hop of `route`.
    pub fn add_route(&mut self, route: &[usize], packets: u64, octets: u64) {
        for hop in route.windows(2) {
            self.add(hop[0], hop[1], packets, octets);
        }
    }

    pub fn get(&self, src: usize, dst: usize) -> LinkLoad {
        self.links.get(&(src, dst)).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &LinkLoad)> {
        self.links.iter()
    }

    pub fn total_packets(&self) -> u64 {
        self.links.values().map(|l| l.packets).sum()
    }

    /// CSV with header `src,dst,packets,octets`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("src,dst,packets,octets\n");
        for (&(s, d), l) in &self.links {
            let _ = writeln!(out, "{s},{d},{},{}", l.packets, l.octets);
        }
        out
    }
}

/// Per-link traffic of one cycle. Each leaf sends one packet along its route
/// to its head. Heads forward toward the sink along the tree with pack and
/// forward: a head appends its record to the payload relayed from its subtree
/// and emits as many packets as the accumulated octets need.
pub fn schedule_traffic(
    assignment: &ClusterAssignment,
    tree: &ChTree,
    cycle: Cycle,
    payload: &PayloadModel,
) -> TrafficLedger {
    let mut ledger = TrafficLedger::new();
    for node in 0..assignment.node_count() {
        if !assignment.is_head(node) {
            ledger.add_route(assignment.leaf_path(node), 1, payload.record());
        }
    }

    let mut cluster_size = vec![0u64; assignment.cluster_count()];
    for node in 0..assignment.node_count() {
        cluster_size[assignment.cluster_of(node)] += 1;
    }
    let mut carried: BTreeMap<usize, u64> = BTreeMap::new();
    for (v, parent, route) in tree.upward_order() {
        let mut own = payload.record();
        if cycle == Cycle::Bootstrap {
            own += payload.bootstrap_member * cluster_size[assignment.cluster_of(v)];
        }
        let octets = own + carried.remove(&v).unwrap_or(0);
        ledger.add_route(&route, payload.packets_for(octets), octets);
        *carried.entry(parent).or_default() += octets;
    }
    ledger
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{deploy_grid, deploy_random, Area, Point};

    fn line(xs: &[f64], sink_x: f64, range: f64) -> NetworkTopology {
        let pos = xs.iter().map(|&x| Point::new(x, 0.0)).collect();
        NetworkTopology::new(pos, Area::new(100.0, 1.0).unwrap(), Point::new(sink_x, 0.0), range).unwrap()
    }

    #[test]
    fn threshold_one_elects_everyone() {
        let topo = deploy_grid(36, Area::square(60.0).unwrap()).unwrap();
        assert_eq!(select_cluster_heads(&topo, 1.0, 3).unwrap(), (0..36).collect::<Vec<_>>());
        assert!(select_cluster_heads(&topo, 0.0, 3).is_err());
        assert!(select_cluster_heads(&topo, 1.5, 3).is_err());
    }

    #[test]
    fn tiny_threshold_exhausts_redraws() {
        let topo = deploy_grid(4, Area::square(10.0).unwrap()).unwrap();
        assert_eq!(
            select_cluster_heads(&topo, 1e-300, 9),
            Err(Error::NoClusterHeads { seed: 9, attempts: ELECTION_ATTEMPTS })
        );
    }

    #[test]
    fn fifty_nodes_at_point_three() {
        let topo = deploy_grid(50, Area::square(100.0).unwrap()).unwrap();
        let counts: Vec<usize> =
            (0..4000).map(|s| select_cluster_heads(&topo, 0.3, s).unwrap().len()).collect();
        let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
        assert!((mean - 15.0).abs() < 0.2, "mean {mean}");
        // the hardware run reported a 14-head realization
        assert!(counts.contains(&14));
    }

    #[test]
    fn exact_election_size() {
        let topo = deploy_grid(100, Area::square(100.0).unwrap()).unwrap();
        let heads = select_cluster_heads_exact(&topo, 40, 1).unwrap();
        assert_eq!(heads.len(), 40);
        assert!(heads.windows(2).all(|w| w[0] < w[1]));
        assert!(select_cluster_heads_exact(&topo, 0, 1).is_err());
        assert!(select_cluster_heads_exact(&topo, 101, 1).is_err());
    }

    #[test]
    fn single_head_takes_everyone() {
        let topo = deploy_grid(25, Area::square(50.0).unwrap()).unwrap();
        let a = assign_leaves(&topo, &[7]).unwrap();
        assert_eq!(a.cluster_count(), 1);
        assert!((0..25).all(|i| a.cluster_of(i) == 0));
        assert!((0..25).all(|i| *a.leaf_path(i).last().unwrap() == 7));
    }

    #[test]
    fn grid_cluster_of_three() {
        // 10×10 grid, 1-based labels 98/88/97 are ids 97/87/96 here
        let topo = deploy_grid(100, Area::square(100.0).unwrap()).unwrap();
        let a = assign_leaves(&topo, &[97, 98, 85, 67]).unwrap();
        let j = a.cluster_of(97);
        assert_eq!(a.clusters()[j], vec![87, 96, 97]);
        assert!(a.is_head(97) && !a.is_head(87));
    }

    #[test]
    fn leaves_pick_the_nearest_head_by_graph_distance() {
        for seed in 0..20 {
            let topo = deploy_random(30, Area::square(50.0).unwrap(), seed).unwrap();
            let heads = select_cluster_heads_exact(&topo, 5, seed).unwrap();
            let a = assign_leaves(&topo, &heads).unwrap();
            let all: Vec<_> = heads.iter().map(|&h| shortest_paths(&topo, h).unwrap()).collect();
            for v in 0..30 {
                let best = (0..heads.len())
                    .min_by(|&x, &y| all[x].dist[v].total_cmp(&all[y].dist[v]).then(heads[x].cmp(&heads[y])))
                    .unwrap();
                assert_eq!(a.cluster_of(v), best, "seed {seed} node {v}");
                let path = a.leaf_path(v);
                let len: f64 = path.windows(2).map(|h| topo.link_length(h[0], h[1]).unwrap()).sum();
                assert!((len - all[best].dist[v]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn one_head_tree_is_a_single_sink_edge() {
        let topo = deploy_grid(9, Area::square(30.0).unwrap()).unwrap();
        let tree = build_ch_mst(&topo, &[0]).unwrap();
        assert_eq!(tree.edges().len(), 1);
        assert_eq!((tree.edges()[0].a, tree.edges()[0].b), (0, 9));
    }

    #[test]
    fn collinear_heads_form_a_chain() {
        let topo = line(&[1.0, 2.0, 3.0], 0.0, 1.0);
        let tree = build_ch_mst(&topo, &[0, 1, 2]).unwrap();
        assert_eq!(tree.edges().len(), 3);
        assert!((tree.total_weight() - 3.0).abs() < 1e-12);
    }

    fn prim_weight(w: &[Vec<f64>]) -> f64 {
        let n = w.len();
        let mut in_tree = vec![false; n];
        let mut best = vec![f64::INFINITY; n];
        best[0] = 0.0;
        let mut total = 0.0;
        for _ in 0..n {
            let u = (0..n).filter(|&v| !in_tree[v]).min_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap();
            in_tree[u] = true;
            total += best[u];
            for v in 0..n {
                if !in_tree[v] && w[u][v] < best[v] {
                    best[v] = w[u][v];
                }
            }
        }
        total
    }

    fn floyd(topo: &NetworkTopology) -> Vec<Vec<f64>> {
        let n = topo.vertex_count();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for e in topo.edges() {
            d[e.a][e.b] = e.length;
            d[e.b][e.a] = e.length;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    #[test]
    fn mst_weight_matches_prim_oracle() {
        for seed in 0..10 {
            let topo = deploy_random(60, Area::square(80.0).unwrap(), seed).unwrap();
            let heads = select_cluster_heads_exact(&topo, 10, seed + 100).unwrap();
            let tree = build_ch_mst(&topo, &heads).unwrap();
            let d = floyd(&topo);
            let mut terms = heads.clone();
            terms.push(topo.sink_vertex());
            let w: Vec<Vec<f64>> = terms.iter().map(|&a| terms.iter().map(|&b| d[a][b]).collect()).collect();
            assert!((tree.total_weight() - prim_weight(&w)).abs() < 1e-9);
            // no spanning star beats it
            for c in 0..terms.len() {
                let star: f64 = (0..terms.len()).map(|k| w[c][k]).sum();
                assert!(tree.total_weight() <= star + 1e-9);
            }
            for e in tree.edges() {
                assert_eq!((e.path[0], *e.path.last().unwrap()), (e.a, e.b));
                assert!(e.path.windows(2).all(|h| topo.has_edge(h[0], h[1])));
            }
        }
    }

    #[test]
    fn lone_head_next_to_sink_sends_one_packet() {
        let topo = line(&[10.0], 0.0, 10.0);
        let a = assign_leaves(&topo, &[0]).unwrap();
        let tree = build_ch_mst(&topo, &[0]).unwrap();
        let ledger = schedule_traffic(&a, &tree, Cycle::Steady, &PayloadModel::default());
        assert_eq!(ledger.total_packets(), 1);
        assert_eq!(ledger.get(0, 1).packets, 1);
    }

    #[test]
    fn head_with_one_leaf_sends_two_packets() {
        // leaf at 15, head at 10, sink at 0
        let topo = line(&[15.0, 10.0], 0.0, 10.0);
        let a = assign_leaves(&topo, &[1]).unwrap();
        let tree = build_ch_mst(&topo, &[1]).unwrap();
        let ledger = schedule_traffic(&a, &tree, Cycle::Steady, &PayloadModel::default());
        assert_eq!(ledger.total_packets(), 2);
        assert_eq!(ledger.get(0, 1).packets, 1);
        assert_eq!(ledger.get(1, 2).packets, 1);
    }

    /// Packet-level pack and forward: every hop receives the upstream packets,
    /// appends its own sample into the last packet with room and opens new
    /// packets when full.
    fn packet_oracle(chain: usize, sample: u64, capacity: u64) -> Vec<u64> {
        let mut packets: Vec<u64> = Vec::new();
        let mut per_hop = Vec::new();
        for _ in 0..chain {
            let mut left = sample;
            while left > 0 {
                match packets.last_mut() {
                    Some(fill) if *fill < capacity => {
                        let take = left.min(capacity - *fill);
                        *fill += take;
                        left -= take;
                    }
                    _ => packets.push(0),
                }
            }
            per_hop.push(packets.len() as u64);
        }
        per_hop
    }

    #[test]
    fn pack_and_forward_chain_of_44() {
        let xs: Vec<f64> = (1..=44).map(f64::from).collect();
        let topo = line(&xs, 0.0, 1.0);
        let heads: Vec<usize> = (0..44).collect();
        let a = assign_leaves(&topo, &heads).unwrap();
        let tree = build_ch_mst(&topo, &heads).unwrap();
        let model = PayloadModel { address: 0, ..PayloadModel::default() };
        let ledger = schedule_traffic(&a, &tree, Cycle::Steady, &model);
        // the far end (node 43) emits first
        let expected = packet_oracle(44, 2, 87);
        for (hop, &count) in expected.iter().enumerate() {
            let from = 43 - hop;
            let to = if from == 0 { 44 } else { from - 1 };
            assert_eq!(ledger.get(from, to).packets, count, "hop {hop}");
        }
        assert_eq!(ledger.get(0, 44).packets, 2);
        assert_eq!(ledger.total_packets(), expected.iter().sum::<u64>());
    }

    #[test]
    fn bootstrap_adds_member_records() {
        let topo = line(&[15.0, 10.0], 0.0, 10.0);
        let a = assign_leaves(&topo, &[1]).unwrap();
        let tree = build_ch_mst(&topo, &[1]).unwrap();
        let model = PayloadModel::default();
        let steady = schedule_traffic(&a, &tree, Cycle::Steady, &model);
        let boot = schedule_traffic(&a, &tree, Cycle::Bootstrap, &model);
        assert_eq!(steady.get(1, 2).octets, 4);
        assert_eq!(boot.get(1, 2).octets, 4 + 2 * 3);
    }

    #[test]
    fn ledger_only_uses_links_and_counts_leaf_hops() {
        for seed in 0..10 {
            let topo = deploy_random(80, Area::square(100.0).unwrap(), seed).unwrap();
            let heads = select_cluster_heads(&topo, 0.2, seed).unwrap();
            let a = assign_leaves(&topo, &heads).unwrap();
            let tree = build_ch_mst(&topo, &heads).unwrap();
            let ledger = schedule_traffic(&a, &tree, Cycle::Steady, &PayloadModel::default());
            assert!(ledger.iter().all(|(&(s, d), l)| topo.has_edge(s, d) && l.packets > 0));
            let leaf_hops: usize = (0..80).filter(|&i| !a.is_head(i)).map(|i| a.leaf_path(i).len() - 1).sum();
            let only_leaves = schedule_traffic(
                &a,
                &ChTree { sink: tree.sink(), edges: Vec::new() },
                Cycle::Steady,
                &PayloadModel::default(),
            );
            assert_eq!(only_leaves.total_packets(), leaf_hops as u64);
        }
    }

    #[test]
    fn assignment_dump() {
        let topo = line(&[15.0, 10.0], 0.0, 10.0);
        let a = assign_leaves(&topo, &[1]).unwrap();
        assert_eq!(a.to_text(), "0 0 0\n1 0 1\n");
        let tree = build_ch_mst(&topo, &[1]).unwrap();
        let csv = schedule_traffic(&a, &tree, Cycle::Steady, &PayloadModel::default()).to_csv();
        assert_eq!(csv, "src,dst,packets,octets\n0,1,1,4\n1,2,1,4\n");
    }
}

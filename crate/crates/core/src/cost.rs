//! Transmission cost `Σ t_ij · c_ij` (packets times link length) for LWCDA
//! and the two baselines, plus the sweeps built on it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index;
use rayon::prelude::*;

use crate::routing::{
    assign_leaves, build_ch_mst, schedule_traffic, select_cluster_heads, ClusterAssignment, ChTree, Cycle,
    PayloadModel, TrafficLedger,
};
use crate::rng;
use crate::topology::{deploy, shortest_paths, Area, Deployment, NetworkTopology, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkCost {
    pub src: usize,
    pub dst: usize,
    pub packets: u64,
    pub length: f64,
}

impl LinkCost {
    pub fn cost(&self) -> f64 {
        self.packets as f64 * self.length
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub scheme: String,
    /// Compression rate as a fraction, `1 − M/N`.
    pub gamma: f64,
    /// Steady-state cost in packet·meters.
    pub t_cst: f64,
    pub links: Vec<LinkCost>,
    /// Cost of the first (bootstrap) cycle, for schemes that have one.
    pub bootstrap: Option<f64>,
}

impl CostReport {
    /// Prices every ledger entry at the Euclidean length of its link.
    pub fn from_ledger(scheme: &str, gamma: f64, topo: &NetworkTopology, ledger: &TrafficLedger) -> Result<Self> {
        let mut links = Vec::new();
        for (&(src, dst), load) in ledger.iter() {
            let length = topo.link_length(src, dst).ok_or_else(|| {
                Error::InvalidParameter(format!("traffic on ({src}, {dst}), which is not a link"))
            })?;
            links.push(LinkCost { src, dst, packets: load.packets, length });
        }
        let t_cst = links.iter().map(LinkCost::cost).sum();
        Ok(Self { scheme: scheme.to_string(), gamma, t_cst, links, bootstrap: None })
    }
}

/// LWCDA cost of an existing clustering. `ledger` is the steady-state
/// schedule; the bootstrap cycle is priced separately.
pub fn lwcda_cost(
    topo: &NetworkTopology,
    assignment: &ClusterAssignment,
    tree: &ChTree,
    ledger: &TrafficLedger,
    payload: &PayloadModel,
) -> Result<CostReport> {
    let gamma = 1.0 - assignment.cluster_count() as f64 / assignment.node_count() as f64;
    let mut report = CostReport::from_ledger("lwcda", gamma, topo, ledger)?;
    let boot = schedule_traffic(assignment, tree, Cycle::Bootstrap, payload);
    report.bootstrap = Some(CostReport::from_ledger("lwcda", gamma, topo, &boot)?.t_cst);
    Ok(report)
}

/// Every node sends one packet to the sink along its shortest path.
pub fn noncs_cost(topo: &NetworkTopology) -> Result<CostReport> {
    let sources: Vec<usize> = (0..topo.node_count()).collect();
    shortest_path_cost("noncs", 0.0, topo, &sources)
}

/// `round((1 − gamma)·N)` uniformly chosen nodes each send one packet to the
/// sink along the shortest path.
pub fn sprm_cost(topo: &NetworkTopology, gamma: f64, seed: u64) -> Result<CostReport> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    let n = topo.node_count();
    let m = ((1.0 - gamma) * n as f64).round() as usize;
    if m == 0 {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} leaves no measurement on {n} nodes")));
    }
    let mut rng = rng::stream(seed, "sprm", 0);
    let mut sources = index::sample(&mut rng, n, m).into_vec();
    sources.sort_unstable();
    shortest_path_cost("sprm", gamma, topo, &sources)
}

fn shortest_path_cost(scheme: &str, gamma: f64, topo: &NetworkTopology, sources: &[usize]) -> Result<CostReport> {
    let tree = shortest_paths(topo, topo.sink_vertex())?;
    let mut ledger = TrafficLedger::new();
    for &node in sources {
        let mut route = tree.path_to(node)?;
        route.reverse();
        ledger.add_route(&route, 1, 0);
    }
    CostReport::from_ledger(scheme, gamma, topo, &ledger)
}

/// `100 · T(P) / T(Q)`.
pub fn disbursed_pct(p: &CostReport, q: &CostReport) -> Result<f64> {
    if q.t_cst == 0.0 {
        return Err(Error::InvalidParameter("reference cost is zero".into()));
    }
    Ok(100.0 * p.t_cst / q.t_cst)
}

/// `100 · (1 − T(P) / T(Q))`.
pub fn saved_pct(p: &CostReport, q: &CostReport) -> Result<f64> {
    Ok(100.0 - disbursed_pct(p, q)?)
}

/// A data-gathering scheme priced by [`CostReport`].
pub trait AggregationScheme: Send + Sync {
    fn name(&self) -> &'static str;

    fn cost(&self, topo: &NetworkTopology, gamma: f64, seed: u64) -> Result<CostReport>;
}

/// Clustered CS aggregation with election threshold `T_hr = 1 − gamma`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lwcda {
    pub payload: PayloadModel,
}

impl AggregationScheme for Lwcda {
    fn name(&self) -> &'static str {
        "lwcda"
    }

    fn cost(&self, topo: &NetworkTopology, gamma: f64, seed: u64) -> Result<CostReport> {
        let heads = select_cluster_heads(topo, 1.0 - gamma, seed)?;
        let assignment = assign_leaves(topo, &heads)?;
        let tree = build_ch_mst(topo, &heads)?;
        let ledger = schedule_traffic(&assignment, &tree, Cycle::Steady, &self.payload);
        let mut report = lwcda_cost(topo, &assignment, &tree, &ledger, &self.payload)?;
        report.gamma = gamma;
        Ok(report)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NonCs;

impl AggregationScheme for NonCs {
    fn name(&self) -> &'static str {
        "noncs"
    }

    fn cost(&self, topo: &NetworkTopology, gamma: f64, _seed: u64) -> Result<CostReport> {
        let mut report = noncs_cost(topo)?;
        report.gamma = gamma;
        Ok(report)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sprm;

impl AggregationScheme for Sprm {
    fn name(&self) -> &'static str {
        "sprm"
    }

    fn cost(&self, topo: &NetworkTopology, gamma: f64, seed: u64) -> Result<CostReport> {
        sprm_cost(topo, gamma, seed)
    }
}

/// Aggregation schemes by name.
pub struct SchemeRegistry {
    schemes: BTreeMap<&'static str, Box<dyn AggregationScheme>>,
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(Lwcda::default()));
        reg.register(Box::new(NonCs));
        reg.register(Box::new(Sprm));
        reg
    }
}

impl SchemeRegistry {
    pub fn empty() -> Self {
        Self { schemes: BTreeMap::new() }
    }

    pub fn register(&mut self, scheme: Box<dyn AggregationScheme>) {
        self.schemes.insert(scheme.name(), scheme);
    }

    pub fn get(&self, name: &str) -> Result<&dyn AggregationScheme> {
        self.schemes
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::Unknown { kind: "scheme", name: name.to_string() })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.schemes.keys().copied()
    }
}

/// Network shape shared by every run of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeploySpec {
    pub kind: Deployment,
    pub n: usize,
    pub area: Area,
}

impl DeploySpec {
    pub fn build(&self, sink: Option<Point>, seed: u64) -> Result<NetworkTopology> {
        deploy(self.kind, self.n, self.area, sink, seed)
    }
}

/// One line of a cost CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub scheme: String,
    pub gamma: f64,
    pub seed: u64,
    pub n: usize,
    pub sink: Point,
    pub t_cst: f64,
}

/// One cost run: the topology is drawn from `seed` and so is the scheme's
/// own randomness, on separate substreams.
pub fn run_scheme(
    scheme: &dyn AggregationScheme,
    spec: &DeploySpec,
    sink: Option<Point>,
    gamma: f64,
    seed: u64,
) -> Result<CostRow> {
    let topo = spec.build(sink, seed)?;
    let report = scheme.cost(&topo, gamma, rng::derive(seed, scheme.name(), 0))?;
    Ok(CostRow { scheme: scheme.name().to_string(), gamma, seed, n: spec.n, sink: topo.sink(), t_cst: report.t_cst })
}

fn run_all(
    schemes: &[&dyn AggregationScheme],
    jobs: Vec<(DeploySpec, Option<Point>, f64, u64)>,
) -> Result<Vec<CostRow>> {
    let tasks: Vec<_> =
        jobs.iter().flat_map(|job| schemes.iter().map(move |s| (*s, job))).collect();
    tasks.par_iter().map(|(s, (spec, sink, gamma, seed))| run_scheme(*s, spec, *sink, *gamma, *seed)).collect()
}

/// Every scheme at every compression rate and seed.
pub fn gamma_sweep(
    schemes: &[&dyn AggregationScheme],
    spec: &DeploySpec,
    gammas: &[f64],
    seeds: &[u64],
) -> Result<Vec<CostRow>> {
    let jobs = gammas.iter().flat_map(|&g| seeds.iter().map(move |&s| (*spec, None, g, s))).collect();
    run_all(schemes, jobs)
}

/// Every scheme at every network size, fixed compression rate.
pub fn density_sweep(
    schemes: &[&dyn AggregationScheme],
    kind: Deployment,
    area: Area,
    sizes: &[usize],
    gamma: f64,
    seeds: &[u64],
) -> Result<Vec<CostRow>> {
    let jobs = sizes
        .iter()
        .flat_map(|&n| seeds.iter().map(move |&s| (DeploySpec { kind, n, area }, None, gamma, s)))
        .collect();
    run_all(schemes, jobs)
}

/// `count` sink positions `(i·w/(count−1), i·h/(count−1))` along the diagonal.
pub fn diagonal_positions(area: &Area, count: usize) -> Vec<Point> {
    if count == 1 {
        return vec![area.center()];
    }
    let steps = (count - 1) as f64;
    (0..count).map(|i| Point::new(i as f64 * area.width / steps, i as f64 * area.height / steps)).collect()
}

/// Every scheme at every sink position and seed.
pub fn sink_sweep(
    schemes: &[&dyn AggregationScheme],
    spec: &DeploySpec,
    gamma: f64,
    sinks: &[Point],
    seeds: &[u64],
) -> Result<Vec<CostRow>> {
    for p in sinks {
        if !spec.area.contains(p) {
            return Err(Error::InvalidParameter(format!("sink ({}, {}) lies outside the area", p.x, p.y)));
        }
    }
    let jobs = sinks.iter().flat_map(|&p| seeds.iter().map(move |&s| (*spec, Some(p), gamma, s))).collect();
    run_all(schemes, jobs)
}

/// CSV with header `scheme,gamma,seed,N,sink_x,sink_y,T_cst`; `gamma` is in
/// percent.
pub fn cost_csv(rows: &[CostRow]) -> String {
    let mut out = String::from("scheme,gamma,seed,N,sink_x,sink_y,T_cst\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scheme,
            (r.gamma * 100.0 * 1e9).round() / 1e9,
            r.seed,
            r.n,
            r.sink.x,
            r.sink.y,
            r.t_cst
        );
    }
    out
}

/// Mean `T_cst` per `(scheme, key)` where `key` picks the sweep variable.
pub fn mean_by<K: Ord + Clone>(rows: &[CostRow], key: impl Fn(&CostRow) -> K) -> BTreeMap<(String, K), f64> {
    let mut acc: BTreeMap<(String, K), (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry((r.scheme.clone(), key(r))).or_default();
        e.0 += r.t_cst;
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (sum, count))| (k, sum / count as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{deploy_grid, deploy_random};

    fn line(xs: &[f64], sink_x: f64, range: f64) -> NetworkTopology {
        let pos = xs.iter().map(|&x| Point::new(x, 0.0)).collect();
        NetworkTopology::new(pos, Area::new(100.0, 1.0).unwrap(), Point::new(sink_x, 0.0), range).unwrap()
    }

    fn lwcda_with(topo: &NetworkTopology, heads: &[usize]) -> CostReport {
        let payload = PayloadModel::default();
        let a = assign_leaves(topo, heads).unwrap();
        let tree = build_ch_mst(topo, heads).unwrap();
        let ledger = schedule_traffic(&a, &tree, Cycle::Steady, &payload);
        lwcda_cost(topo, &a, &tree, &ledger, &payload).unwrap()
    }

    #[test]
    fn single_head_next_to_sink() {
        let topo = line(&[10.0], 0.0, 10.0);
        assert_eq!(lwcda_with(&topo, &[0]).t_cst, 10.0);
    }

    #[test]
    fn head_with_one_leaf() {
        let topo = line(&[10.0, 15.0], 0.0, 10.0);
        assert_eq!(lwcda_with(&topo, &[0]).t_cst, 15.0);
    }

    #[test]
    fn noncs_examples() {
        assert_eq!(noncs_cost(&line(&[10.0], 0.0, 10.0)).unwrap().t_cst, 10.0);
        assert_eq!(noncs_cost(&line(&[10.0, 20.0], 0.0, 10.0)).unwrap().t_cst, 30.0);
    }

    #[test]
    fn noncs_matches_relaxation_oracle() {
        // Bellman-Ford over every link, then one packet per node priced at its distance
        let topo = deploy_grid(100, Area::square(100.0).unwrap()).unwrap();
        let sink = topo.sink_vertex();
        let mut dist = vec![f64::INFINITY; topo.vertex_count()];
        dist[sink] = 0.0;
        for _ in 0..topo.vertex_count() {
            for e in topo.edges() {
                dist[e.a] = dist[e.a].min(dist[e.b] + e.length);
                dist[e.b] = dist[e.b].min(dist[e.a] + e.length);
            }
        }
        let expected: f64 = dist[..100].iter().sum();
        assert!((noncs_cost(&topo).unwrap().t_cst - expected).abs() < 1e-9);
    }

    #[test]
    fn sprm_degenerates_to_noncs() {
        let topo = deploy_random(80, Area::square(100.0).unwrap(), 3).unwrap();
        assert_eq!(sprm_cost(&topo, 0.0, 1).unwrap().t_cst, noncs_cost(&topo).unwrap().t_cst);
        assert!(sprm_cost(&topo, 0.999, 1).is_err());
        let half = sprm_cost(&topo, 0.5, 1).unwrap();
        assert_eq!(half.links.iter().filter(|l| l.dst == topo.sink_vertex()).map(|l| l.packets).sum::<u64>(), 40);
    }

    #[test]
    fn percentages() {
        let q = CostReport { scheme: "q".into(), gamma: 0.0, t_cst: 80.0, links: vec![], bootstrap: None };
        let mut p = q.clone();
        assert_eq!(disbursed_pct(&p, &q).unwrap(), 100.0);
        assert_eq!(saved_pct(&p, &q).unwrap(), 0.0);
        p.t_cst = 40.0;
        assert_eq!(disbursed_pct(&p, &q).unwrap(), 50.0);
        p.t_cst = 0.0;
        assert_eq!(saved_pct(&p, &q).unwrap(), 100.0);
        assert!(disbursed_pct(&q, &p).is_err());
    }

    #[test]
    fn total_is_the_sum_of_links() {
        let topo = deploy_random(150, Area::square(100.0).unwrap(), 8).unwrap();
        for scheme in ["lwcda", "noncs", "sprm"] {
            let r = SchemeRegistry::default().get(scheme).unwrap().cost(&topo, 0.4, 8).unwrap();
            let sum: f64 = r.links.iter().map(|l| l.cost()).sum();
            assert_eq!(r.t_cst, sum);
            assert!(r.t_cst > 0.0);
        }
    }

    /// All nodes as heads: compare with an independent Prim tree over the
    /// metric closure, rooted at the sink, where every edge carries the
    /// records of its subtree.
    #[test]
    fn all_heads_equals_mst_collection() {
        let payload = PayloadModel::default();
        for seed in 0..5 {
            let topo = deploy_random(60, Area::square(100.0).unwrap(), seed).unwrap();
            let heads: Vec<usize> = (0..60).collect();
            let got = lwcda_with(&topo, &heads).t_cst;

            let v = topo.vertex_count();
            let dist: Vec<Vec<f64>> = (0..v).map(|s| shortest_paths(&topo, s).unwrap().dist).collect();
            let root = topo.sink_vertex();
            let mut parent = vec![usize::MAX; v];
            let mut best = vec![f64::INFINITY; v];
            let mut in_tree = vec![false; v];
            let mut order = Vec::new();
            best[root] = 0.0;
            for _ in 0..v {
                let u = (0..v).filter(|&x| !in_tree[x]).min_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap();
                in_tree[u] = true;
                order.push(u);
                for w in 0..v {
                    if !in_tree[w] && dist[u][w] < best[w] {
                        best[w] = dist[u][w];
                        parent[w] = u;
                    }
                }
            }
            let mut subtree = vec![1u64; v];
            let mut expected = 0.0;
            for &u in order.iter().rev() {
                if u == root {
                    continue;
                }
                let octets = subtree[u] * payload.record();
                expected += payload.packets_for(octets) as f64 * dist[u][parent[u]];
                subtree[parent[u]] += subtree[u];
            }
            assert!((got - expected).abs() < 1e-6 * expected, "seed {seed}: {got} vs {expected}");
        }
    }

    #[test]
    fn bootstrap_costs_more() {
        let topo = deploy_random(200, Area::square(100.0).unwrap(), 2).unwrap();
        let r = Lwcda::default().cost(&topo, 0.7, 2).unwrap();
        assert!(r.bootstrap.unwrap() >= r.t_cst);
    }

    #[test]
    fn symmetric_sinks_cost_the_same() {
        let spec = DeploySpec { kind: Deployment::Grid, n: 100, area: Area::square(100.0).unwrap() };
        let rows = sink_sweep(&[&NonCs], &spec, 0.5, &[Point::new(0.0, 0.0), Point::new(100.0, 100.0)], &[1]).unwrap();
        assert!((rows[0].t_cst - rows[1].t_cst).abs() < 1e-9);
        let center = sink_sweep(&[&NonCs], &spec, 0.5, &diagonal_positions(&spec.area, 1), &[1]).unwrap();
        assert_eq!(center[0].t_cst, noncs_cost(&spec.build(None, 1).unwrap()).unwrap().t_cst);
    }

    #[test]
    fn sweep_rows_and_csv() {
        let spec = DeploySpec { kind: Deployment::Random, n: 60, area: Area::square(100.0).unwrap() };
        let reg = SchemeRegistry::default();
        let schemes: Vec<&dyn AggregationScheme> = reg.names().map(|n| reg.get(n).unwrap()).collect();
        let gammas: Vec<f64> = (1..=9).map(|g| g as f64 / 10.0).collect();
        let rows = gamma_sweep(&schemes, &spec, &gammas, &[4]).unwrap();
        assert_eq!(rows.len(), 27);
        for name in ["lwcda", "noncs", "sprm"] {
            assert_eq!(rows.iter().filter(|r| r.scheme == name).count(), 9);
        }
        let csv = cost_csv(&rows);
        assert!(csv.starts_with("scheme,gamma,seed,N,sink_x,sink_y,T_cst\n"));
        assert_eq!(csv.lines().count(), 28);
        assert!(csv.lines().nth(1).unwrap().starts_with("lwcda,10,4,60,50,50,"));
        assert_eq!(gamma_sweep(&schemes, &spec, &gammas, &[4]).unwrap(), rows);
    }

    #[test]
    fn adding_a_relay_can_lower_noncs_cost() {
        // Non-CS cost is not monotone under node insertion: a new node can
        // shorten the routes of many others by more than its own distance.
        let area = Area::new(4.0, 4.0).unwrap();
        let mut pos = vec![Point::new(1.0, 1.0)];
        pos.extend((0..6).map(|_| Point::new(2.0, 0.0)));
        let before = NetworkTopology::new(pos.clone(), area, Point::new(0.0, 0.0), 1.5).unwrap();
        pos.push(Point::new(1.0, 0.0));
        let after = NetworkTopology::new(pos, area, Point::new(0.0, 0.0), 1.5).unwrap();
        assert!(noncs_cost(&after).unwrap().t_cst < noncs_cost(&before).unwrap().t_cst);
    }

    #[test]
    fn adding_a_non_relay_adds_its_own_distance() {
        let topo = deploy_grid(64, Area::square(80.0).unwrap()).unwrap();
        let base = noncs_cost(&topo).unwrap().t_cst;
        let mut pos = topo.positions().to_vec();
        // a corner-adjacent point that sits on no shortest path
        pos.push(Point::new(1.0, 1.0));
        let grown = NetworkTopology::new(pos, topo.area(), topo.sink(), topo.range()).unwrap();
        let d = shortest_paths(&grown, grown.sink_vertex()).unwrap().dist[64];
        assert!((noncs_cost(&grown).unwrap().t_cst - base - d).abs() < 1e-9);
    }
}

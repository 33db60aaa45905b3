//! Instance generators: the integrality-gap families, random instances and
//! the crossing-spanning-tree adapter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Cost, Instance, Kind};

/// Largest `K * m` a generator will materialize.
pub const MAX_ENTRIES: usize = 10_000_000;

fn guard(k: usize, m: usize) -> Result<()> {
    match k.checked_mul(m) {
        Some(v) if v <= MAX_ENTRIES => Ok(()),
        _ => Err(Error::Range(format!(
            "K * m = {k} * {m} exceeds {MAX_ENTRIES} cost entries"
        ))),
    }
}

/// A shortest-path gadget: nodes `0..n`, terminals, arcs and 0/1 scenario rows.
struct Gadget {
    n: usize,
    source: usize,
    target: usize,
    arcs: Vec<(usize, usize)>,
    scenarios: Vec<Vec<u8>>,
}

impl Gadget {
    fn single_arc() -> Self {
        Gadget {
            n: 2,
            source: 0,
            target: 1,
            arcs: vec![(0, 1)],
            scenarios: vec![vec![1]],
        }
    }

    /// Template on s, a, b, c, d, g, t with every solid arc replaced by a copy of `inner`.
    fn expand(inner: &Gadget) -> Gadget {
        const S: usize = 0;
        const A: usize = 1;
        const B: usize = 2;
        const C: usize = 3;
        const D: usize = 4;
        const G: usize = 5;
        const T: usize = 6;
        enum Piece {
            Solid(usize, usize, usize),
            Dashed(usize, usize),
        }
        let template = [
            Piece::Solid(0, S, A),
            Piece::Solid(1, S, B),
            Piece::Dashed(A, C),
            Piece::Dashed(B, C),
            Piece::Solid(2, C, D),
            Piece::Solid(3, C, G),
            Piece::Dashed(D, T),
            Piece::Dashed(G, T),
        ];
        let mut n = 7;
        let mut arcs = Vec::new();
        // Arc range of each solid copy.
        let mut copies = [(0usize, 0usize); 4];
        for piece in &template {
            match *piece {
                Piece::Solid(i, from, to) => {
                    let mut local = vec![0; inner.n];
                    for (v, slot) in local.iter_mut().enumerate() {
                        *slot = if v == inner.source {
                            from
                        } else if v == inner.target {
                            to
                        } else {
                            n += 1;
                            n - 1
                        };
                    }
                    let start = arcs.len();
                    arcs.extend(inner.arcs.iter().map(|&(a, b)| (local[a], local[b])));
                    copies[i] = (start, arcs.len());
                }
                Piece::Dashed(a, b) => arcs.push((a, b)),
            }
        }
        let mut scenarios = Vec::new();
        for sigma1 in &inner.scenarios {
            for sigma2 in &inner.scenarios {
                for i in 0..2 {
                    for j in 2..4 {
                        let mut row = vec![0u8; arcs.len()];
                        for (copy, sigma) in [(copies[i], sigma1), (copies[j], sigma2)] {
                            row[copy.0..copy.1].copy_from_slice(sigma);
                        }
                        scenarios.push(row);
                    }
                }
            }
        }
        Gadget {
            n,
            source: S,
            target: T,
            arcs,
            scenarios,
        }
    }
}

/// Recursive shortest-path gap instance of level `r` (`0 <= r <= 2`).
///
/// Every s-t path costs `2^(r+1)` in some scenario while LP(1) is feasible.
/// Node 0 is the source and node 6 the target at every level; sizes are
/// `n = 2 + 5(k^2 - 1)/3`, `m = (7k^2 - 4)/3`, `K = 4^(k-1)` with `k = 2^(r+1)`.
pub fn gen_gap_sp(r: u32) -> Result<Instance> {
    if r >= 3 {
        return Err(Error::Range(format!(
            "gap-sp level r = {r} too large (r <= 2; K = 4^(2^(r+1) - 1))"
        )));
    }
    let mut gadget = Gadget::expand(&Gadget::single_arc());
    for _ in 0..r {
        gadget = Gadget::expand(&gadget);
    }
    let k = 1usize << (r + 1);
    let expect_n = 2 + 5 * (k * k - 1) / 3;
    let expect_m = (7 * k * k - 4) / 3;
    let expect_k = 1usize << (2 * (k - 1));
    assert_eq!(
        (gadget.n, gadget.arcs.len(), gadget.scenarios.len()),
        (expect_n, expect_m, expect_k)
    );
    guard(expect_k, expect_m)?;
    let scenarios = gadget
        .scenarios
        .iter()
        .map(|row| row.iter().map(|&v| Cost::from_integer(v as i64)).collect())
        .collect();
    Instance::new(
        format!("gap_sp_r{r}"),
        Kind::ShortestPath {
            source: gadget.source,
            target: gadget.target,
        },
        gadget.n,
        gadget.arcs,
        scenarios,
    )
}

/// Series-composition spanning-tree gap instance with parameter `2 <= k <= 4`.
///
/// Hubs `v_1..v_{k+1}` are nodes `0..=k`; subgraph `i` has nodes `u^i_j` with
/// solid edges `{v_i, u^i_j}` followed by dashed edges `{u^i_j, v_{i+1}}`.
/// Each scenario picks one solid edge per subgraph and charges it 1.
pub fn gen_gap_mst(k: usize) -> Result<Instance> {
    if !(2..=4).contains(&k) {
        return Err(Error::Range(format!(
            "gap-mst parameter k = {k} out of range (2 <= k <= 4)"
        )));
    }
    let n = k * k + k + 1;
    let u = |i: usize, j: usize| k + 1 + i * k + j;
    let mut edges = Vec::with_capacity(2 * k * k);
    for i in 0..k {
        for j in 0..k {
            edges.push((i, u(i, j)));
        }
        for j in 0..k {
            edges.push((u(i, j), i + 1));
        }
    }
    let count = k.pow(k as u32);
    let mut scenarios = Vec::with_capacity(count);
    for idx in 0..count {
        let mut row = vec![Cost::from_integer(0); edges.len()];
        // Lexicographic tuple (j_1, ..., j_k), first subgraph most significant.
        let mut rest = idx;
        for i in (0..k).rev() {
            let j = rest % k;
            rest /= k;
            row[2 * k * i + j] = Cost::from_integer(1);
        }
        scenarios.push(row);
    }
    let mut has_dashed = vec![false; n];
    for i in 0..k {
        for j in 0..k {
            has_dashed[u(i, j)] = true;
            has_dashed[i + 1] = true;
        }
    }
    assert!(!has_dashed[0] && has_dashed[1..].iter().all(|&b| b));
    assert_eq!((edges.len(), scenarios.len()), (2 * k * k, count));
    Instance::new(format!("gap_mst_k{k}"), Kind::SpanningTree, n, edges, scenarios)
}

/// Crossing-spanning-tree instance: scenario `j` charges 1 to each edge
/// crossing `cuts[j]`.
pub fn gen_cst(name: &str, n: usize, edges: Vec<(usize, usize)>, cuts: &[Vec<usize>]) -> Result<Instance> {
    if cuts.is_empty() {
        return Err(Error::InvalidInput("at least one cut required".into()));
    }
    let mut scenarios = Vec::with_capacity(cuts.len());
    for (j, cut) in cuts.iter().enumerate() {
        let mut inside = vec![false; n];
        for &v in cut {
            if v >= n {
                return Err(Error::InvalidInput(format!(
                    "cut {j} contains node {v} (n = {n})"
                )));
            }
            inside[v] = true;
        }
        let size = inside.iter().filter(|&&b| b).count();
        if size == 0 || size == n {
            return Err(Error::InvalidInput(format!(
                "cut {j} is not a proper nonempty node set"
            )));
        }
        scenarios.push(
            edges
                .iter()
                .map(|&(a, b)| Cost::from_integer((inside[a] != inside[b]) as i64))
                .collect(),
        );
    }
    Instance::new(name, Kind::SpanningTree, n, edges, scenarios)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostDist {
    /// Multiples of 1/1000 in `[0, 1]`.
    Uniform,
    /// 0 or 1 with equal probability.
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub shortest_path: bool,
    pub n: usize,
    /// Probability of each optional edge.
    pub density: f64,
    pub scenarios: usize,
    pub seed: u64,
    pub cost_dist: CostDist,
}

/// Random instance, reproducible from `spec.seed`.
///
/// Shortest path: a DAG on nodes in topological order with backbone
/// `0 -> 1 -> ... -> n-1`, source 0, target `n-1`, and each other forward arc
/// `i -> j` present with probability `density`. Spanning tree: a random tree
/// (node `v` attaches to a uniform earlier node) plus every other pair with
/// probability `density`.
pub fn gen_random(spec: &RandomSpec) -> Result<Instance> {
    let RandomSpec {
        shortest_path,
        n,
        density,
        scenarios: k,
        seed,
        cost_dist,
    } = *spec;
    if n < 2 {
        return Err(Error::Range(format!("n = {n} must be at least 2")));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Range(format!("density {density} outside [0, 1]")));
    }
    if k == 0 {
        return Err(Error::Range("K must be at least 1".into()));
    }
    guard(k, n * (n - 1) / 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    if shortest_path {
        for i in 0..n - 1 {
            edges.push((i, i + 1));
        }
        for i in 0..n {
            for j in i + 2..n {
                if rng.gen_bool(density) {
                    edges.push((i, j));
                }
            }
        }
    } else {
        let mut tree = vec![vec![false; n]; n];
        for v in 1..n {
            let p = rng.gen_range(0..v);
            edges.push((p, v));
            tree[p][v] = true;
        }
        for i in 0..n {
            for j in i + 1..n {
                if !tree[i][j] && rng.gen_bool(density) {
                    edges.push((i, j));
                }
            }
        }
    }
    let scenarios = (0..k)
        .map(|_| {
            edges
                .iter()
                .map(|_| match cost_dist {
                    CostDist::Uniform => Cost::new(rng.gen_range(0..=1000), 1000),
                    CostDist::Binary => Cost::from_integer(rng.gen_range(0..=1)),
                })
                .collect()
        })
        .collect();
    let kind = if shortest_path {
        Kind::ShortestPath {
            source: 0,
            target: n - 1,
        }
    } else {
        Kind::SpanningTree
    };
    let tag = if shortest_path { "sp" } else { "mst" };
    Instance::new(
        format!("random_{tag}_n{n}_K{k}_s{seed}"),
        kind,
        n,
        edges,
        scenarios,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_sp_sizes() {
        let r0 = gen_gap_sp(0).unwrap();
        assert_eq!((r0.num_nodes(), r0.num_edges(), r0.num_scenarios()), (7, 8, 4));
        let r1 = gen_gap_sp(1).unwrap();
        assert_eq!((r1.num_nodes(), r1.num_edges(), r1.num_scenarios()), (27, 36, 64));
        assert!(matches!(gen_gap_sp(3), Err(Error::Range(_))));
    }

    #[test]
    fn gap_sp_level0_scenarios_charge_one_arc_per_half() {
        let r0 = gen_gap_sp(0).unwrap();
        let solid = [0usize, 1, 4, 5];
        for row in r0.scenarios() {
            let charged: Vec<usize> = (0..8).filter(|&e| row[e] == Cost::from_integer(1)).collect();
            assert_eq!(charged.len(), 2);
            assert!(charged.iter().all(|e| solid.contains(e)));
            assert!(charged[0] < 2 && charged[1] >= 4);
        }
    }

    #[test]
    fn gap_mst_sizes() {
        for k in 2..=4 {
            let inst = gen_gap_mst(k).unwrap();
            assert_eq!(inst.num_nodes(), k * k + k + 1);
            assert_eq!(inst.num_edges(), 2 * k * k);
            assert_eq!(inst.num_scenarios(), k.pow(k as u32));
        }
        assert!(gen_gap_mst(5).is_err());
        assert!(gen_gap_mst(1).is_err());
    }

    #[test]
    fn random_is_reproducible_and_sparse_at_zero_density() {
        let spec = RandomSpec {
            shortest_path: false,
            n: 10,
            density: 0.3,
            scenarios: 8,
            seed: 7,
            cost_dist: CostDist::Uniform,
        };
        assert_eq!(
            gen_random(&spec).unwrap().to_json(),
            gen_random(&spec).unwrap().to_json()
        );
        let tree = gen_random(&RandomSpec { density: 0.0, ..spec }).unwrap();
        assert_eq!(tree.num_edges(), 9);
        let path = gen_random(&RandomSpec {
            density: 0.0,
            shortest_path: true,
            ..spec
        })
        .unwrap();
        assert_eq!(
            path.edges(),
            (0..9).map(|i| (i, i + 1)).collect::<Vec<_>>().as_slice()
        );
    }

    #[test]
    fn cst_rejects_bad_cuts() {
        let edges = vec![(0, 1), (1, 2)];
        assert!(gen_cst("c", 3, edges.clone(), &[]).is_err());
        assert!(gen_cst("c", 3, edges.clone(), &[vec![]]).is_err());
        assert!(gen_cst("c", 3, edges.clone(), &[vec![0, 1, 2]]).is_err());
        let inst = gen_cst("c", 3, edges, &[vec![2]]).unwrap();
        assert_eq!(
            inst.scenarios()[0],
            vec![Cost::from_integer(0), Cost::from_integer(1)]
        );
    }
}

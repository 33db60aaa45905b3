//! Small graph helpers shared by the solvers.

use std::collections::VecDeque;

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
    count: usize,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
            count: n,
        }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Merges the sets of `a` and `b`; returns false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.count -= 1;
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Number of disjoint sets.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Dense component label in `0..count()` for every element, numbered by
    /// first appearance.
    pub fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut label_of_root = vec![usize::MAX; n];
        let mut next = 0;
        let mut labels = Vec::with_capacity(n);
        for v in 0..n {
            let r = self.find(v);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            labels.push(label_of_root[r]);
        }
        labels
    }
}

/// Finds a directed cycle among `arcs` (restricted to ids in `active`), returned
/// as arc ids in traversal order.
pub fn find_directed_cycle(n: usize, arcs: &[(usize, usize)], active: &[usize]) -> Option<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &id in active {
        out[arcs[id].0].push(id);
    }
    // 0 = unseen, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut via = vec![usize::MAX; n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < out[v].len() {
                let id = out[v][*next];
                *next += 1;
                let w = arcs[id].1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        via[w] = id;
                        stack.push((w, 0));
                    }
                    1 => {
                        let mut cycle = vec![id];
                        let mut cur = v;
                        while cur != w {
                            let a = via[cur];
                            cycle.push(a);
                            cur = arcs[a].0;
                        }
                        cycle.reverse();
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    None
}

/// Kahn topological order over the arcs in `active`; `None` if a cycle exists.
pub fn topological_order(n: usize, arcs: &[(usize, usize)], active: &[usize]) -> Option<Vec<usize>> {
    let mut indeg = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &id in active {
        let (a, b) = arcs[id];
        out[a].push(b);
        indeg[b] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &out[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Edge ids on the unique path between `a` and `b` in the forest formed by
/// `forest` (undirected), if one exists.
pub fn forest_path(
    n: usize,
    edges: &[(usize, usize)],
    forest: &[usize],
    a: usize,
    b: usize,
) -> Option<Vec<usize>> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &id in forest {
        let (u, v) = edges[id];
        adj[u].push((v, id));
        adj[v].push((u, id));
    }
    let mut via = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[a] = true;
    let mut queue = VecDeque::from([a]);
    while let Some(v) = queue.pop_front() {
        if v == b {
            break;
        }
        for &(w, id) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                via[w] = id;
                queue.push_back(w);
            }
        }
    }
    if !seen[b] {
        return None;
    }
    let mut path = Vec::new();
    let mut cur = b;
    while cur != a {
        let id = via[cur];
        path.push(id);
        let (u, v) = edges[id];
        cur = if u == cur { v } else { u };
    }
    path.reverse();
    Some(path)
}

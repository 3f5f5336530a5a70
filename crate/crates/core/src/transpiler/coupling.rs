use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected qubit connectivity of a device.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingMap {
    n_qubits: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adj: Vec<Vec<usize>>,
}

impl CouplingMap {
    /// Edges are normalized to `(min, max)`, deduplicated and sorted.
    pub fn new(n_qubits: usize, edges: &[(usize, usize)]) -> Result<CouplingMap> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n_qubits || b >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: a.max(b), n_qubits });
            }
            if a == b {
                return Err(Error::DuplicateOperands(vec![a, b]));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        let mut adj = vec![Vec::new(); n_qubits];
        for &(a, b) in &norm {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj.iter_mut().for_each(|v| v.sort_unstable());
        Ok(CouplingMap { n_qubits, edges: norm, adj })
    }

    pub fn line(n: usize) -> CouplingMap {
        let e: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        CouplingMap::new(n, &e).expect("line coupling")
    }

    pub fn full(n: usize) -> CouplingMap {
        let e: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        CouplingMap::new(n, &e).expect("full coupling")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adj[q]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj.get(a).is_some_and(|n| n.binary_search(&b).is_ok())
    }

    pub fn is_connected(&self) -> bool {
        if self.n_qubits <= 1 {
            return true;
        }
        let dist = self.bfs(0);
        dist.iter().all(|d| d.is_some())
    }

    fn bfs(&self, from: usize) -> Vec<Option<usize>> {
        let mut prev = vec![None; self.n_qubits];
        let mut seen = vec![false; self.n_qubits];
        seen[from] = true;
        prev[from] = Some(from);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    prev[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        prev
    }

    /// Shortest path `from ..= to`; BFS over ascending neighbour lists, so ties
    /// resolve toward lower physical indices.
    pub fn shortest_path(&self, from: usize, to: usize) -> Result<Vec<usize>> {
        let prev = self.bfs(from);
        if prev[to].is_none() {
            return Err(Error::DisconnectedCoupling);
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = prev[cur].expect("reachable");
            path.push(cur);
        }
        path.reverse();
        Ok(path)
    }

    /// Rebuild adjacency after deserialization.
    pub fn rebuilt(self) -> Result<CouplingMap> {
        CouplingMap::new(self.n_qubits, &self.edges)
    }
}

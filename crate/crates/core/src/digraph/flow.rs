//! Node-disjoint path counting by unit-capacity max-flow on the vertex-split
//! graph.

use serde::{Deserialize, Serialize};

use super::{Digraph, NodeId, NodeSet, Path};

/// Result of a disjoint-path count. `Unbounded` marks a terminal that is
/// itself a source: the trivial path shares nothing with any other path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathCount {
    Finite(usize),
    Unbounded,
}

impl PathCount {
    pub fn at_least(self, k: usize) -> bool {
        match self {
            PathCount::Finite(c) => c >= k,
            PathCount::Unbounded => true,
        }
    }

    pub fn finite(self) -> Option<usize> {
        match self {
            PathCount::Finite(c) => Some(c),
            PathCount::Unbounded => None,
        }
    }
}

/// Maximum family of disjoint paths together with a vertex cut of the same
/// size separating the sources from the terminal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointPaths {
    pub count: PathCount,
    pub paths: Vec<Path>,
    /// Nodes (never the terminal) whose removal leaves no qualifying path.
    /// Sources may appear here. Empty for `Unbounded`.
    pub cut: NodeSet,
}

struct Network {
    head: Vec<usize>,
    cap: Vec<u32>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            head: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: u32) {
        self.adj[from].push(self.head.len());
        self.head.push(to);
        self.cap.push(cap);
        self.adj[to].push(self.head.len());
        self.head.push(from);
        self.cap.push(0);
    }

    /// One augmenting path by depth-first search in adjacency order.
    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut visited = vec![false; self.adj.len()];
        let mut via: Vec<usize> = vec![usize::MAX; self.adj.len()];
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        visited[s] = true;
        while let Some(&mut (x, ref mut pos)) = stack.last_mut() {
            if x == t {
                break;
            }
            if *pos == self.adj[x].len() {
                stack.pop();
                continue;
            }
            let e = self.adj[x][*pos];
            *pos += 1;
            let y = self.head[e];
            if self.cap[e] > 0 && !visited[y] {
                visited[y] = true;
                via[y] = e;
                stack.push((y, 0));
            }
        }
        if !visited[t] {
            return false;
        }
        let mut y = t;
        while y != s {
            let e = via[y];
            self.cap[e] -= 1;
            self.cap[e ^ 1] += 1;
            y = self.head[e ^ 1];
        }
        true
    }

    fn residual_reach(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &e in &self.adj[x] {
                let y = self.head[e];
                if self.cap[e] > 0 && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }
}

pub(super) fn disjoint_paths(
    g: &Digraph,
    sources: NodeSet,
    terminal: NodeId,
    exclude: NodeSet,
) -> DisjointPaths {
    if sources.contains(terminal) {
        return DisjointPaths {
            count: PathCount::Unbounded,
            paths: vec![Path::singleton(terminal)],
            cut: NodeSet::EMPTY,
        };
    }
    let n = g.n();
    let big = (n + 1) as u32;
    let inn = |x: NodeId| 2 * x.index();
    let out = |x: NodeId| 2 * x.index() + 1;
    let s = 2 * n;
    let t = inn(terminal);

    let mut net = Network::new(2 * n + 1);
    for a in sources.iter() {
        net.add(s, inn(a), big);
    }
    // Split edges first for every node except the terminal, then the graph
    // edges of G with edges into `exclude` dropped.
    for x in g.nodes().iter().filter(|&x| x != terminal) {
        net.add(inn(x), out(x), 1);
    }
    for x in g.nodes().iter().filter(|&x| x != terminal) {
        for y in (g.out_neighbors(x) - exclude).iter() {
            net.add(out(x), inn(y), big);
        }
    }

    let mut flow = 0usize;
    while net.augment(s, t) {
        flow += 1;
    }

    // Decompose: walk saturated split edges from each used source.
    let mut paths = Vec::with_capacity(flow);
    let mut used = vec![0u32; net.head.len()];
    for a in sources.iter() {
        let e_sa = net.adj[s]
            .iter()
            .copied()
            .find(|&e| net.head[e] == inn(a) && e % 2 == 0)
            .expect("source edge");
        let sent = big - net.cap[e_sa];
        if sent == 0 {
            continue;
        }
        debug_assert_eq!(sent, 1);
        let mut nodes = vec![a];
        let mut x = a;
        while x != terminal {
            let from = out(x);
            let next = net.adj[from]
                .iter()
                .copied()
                .filter(|&e| e % 2 == 0)
                .find(|&e| {
                    let pushed = big - net.cap[e];
                    pushed > used[e]
                })
                .expect("flow conservation");
            used[next] += 1;
            let y = NodeId::new(net.head[next] / 2);
            nodes.push(y);
            x = y;
        }
        paths.push(Path::from_nodes(nodes));
    }

    let reach = net.residual_reach(s);
    let cut: NodeSet = g
        .nodes()
        .iter()
        .filter(|&x| x != terminal && reach[inn(x)] && !reach[out(x)])
        .collect();
    debug_assert_eq!(cut.len(), flow);

    DisjointPaths {
        count: PathCount::Finite(flow),
        paths,
        cut,
    }
}

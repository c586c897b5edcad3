use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::lattice::WeightConfiguration;

pub(crate) const NO_PRED: usize = usize::MAX;

/// Weighted undirected graph with a fixed arc order per node. Dijkstra's
/// tie-breaking follows that order, which makes predecessor trees
/// deterministic.
pub(crate) trait Graph: Sync {
    fn node_count(&self) -> usize;
    fn for_each_arc(&self, u: usize, f: &mut dyn FnMut(usize, f64));
}

#[derive(Clone, Copy)]
struct Item {
    dist: f64,
    node: usize,
}

impl PartialEq for Item {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Item {
    // min-heap on (dist, node)
    fn cmp(&self, o: &Self) -> Ordering {
        o.dist.total_cmp(&self.dist).then_with(|| o.node.cmp(&self.node))
    }
}

pub(crate) struct ShortestPaths {
    pub dist: Vec<f64>,
    pub pred: Vec<usize>,
}

impl ShortestPaths {
    pub fn path_to(&self, target: usize) -> Vec<usize> {
        let mut path = vec![target];
        let mut v = target;
        while self.pred[v] != NO_PRED {
            v = self.pred[v];
            path.push(v);
        }
        path.reverse();
        path
    }
}

/// What to do when a node is settled.
pub(crate) enum Stop<'a> {
    Never,
    At(usize),
    When(&'a mut dyn FnMut(usize) -> bool),
}

pub(crate) fn dijkstra(g: &dyn Graph, sources: &[(usize, f64)], mut stop: Stop<'_>) -> ShortestPaths {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &(s, d0) in sources {
        if d0 < dist[s] {
            dist[s] = d0;
            heap.push(Item { dist: d0, node: s });
        }
    }
    while let Some(Item { dist: du, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        let halt = match &mut stop {
            Stop::Never => false,
            Stop::At(t) => *t == u,
            Stop::When(f) => f(u),
        };
        if halt {
            break;
        }
        g.for_each_arc(u, &mut |v, c| {
            let nd = du + c;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                heap.push(Item { dist: nd, node: v });
            }
        });
    }
    ShortestPaths { dist, pred }
}

/// Nearest-neighbour graph of a configuration, optionally restricted to a
/// vertex mask. Arcs are listed in canonical edge order.
pub(crate) struct LatticeGraph<'a> {
    pub config: &'a WeightConfiguration,
    pub mask: Option<&'a [bool]>,
}

impl Graph for LatticeGraph<'_> {
    fn node_count(&self) -> usize {
        self.config.lattice().vertex_count()
    }

    fn for_each_arc(&self, u: usize, f: &mut dyn FnMut(usize, f64)) {
        let lat = self.config.lattice();
        let ok = |v: usize| self.mask.is_none_or(|m| m[v]);
        for axis in 0..lat.dim() {
            if let Some(w) = lat.neighbor(u, axis, false) {
                if ok(w) {
                    f(w, self.config.weight_up(w, axis));
                }
            }
        }
        for axis in 0..lat.dim() {
            if let Some(w) = lat.neighbor(u, axis, true) {
                if ok(w) {
                    f(w, self.config.weight_up(u, axis));
                }
            }
        }
    }
}

/// Compressed adjacency lists.
pub(crate) struct Csr {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    costs: Vec<f64>,
}

impl Csr {
    pub fn from_lists(lists: Vec<Vec<(usize, f64)>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let total = lists.iter().map(|l| l.len()).sum();
        let mut targets = Vec::with_capacity(total);
        let mut costs = Vec::with_capacity(total);
        offsets.push(0);
        for l in lists {
            for (t, c) in l {
                targets.push(t);
                costs.push(c);
            }
            offsets.push(targets.len());
        }
        Self { offsets, targets, costs }
    }
}

impl Graph for Csr {
    fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    fn for_each_arc(&self, u: usize, f: &mut dyn FnMut(usize, f64)) {
        for k in self.offsets[u]..self.offsets[u + 1] {
            f(self.targets[k], self.costs[k]);
        }
    }
}

/// Undirected arc list builder.
pub(crate) struct ArcLists {
    lists: Vec<Vec<(usize, f64)>>,
}

impl ArcLists {
    pub fn new(n: usize) -> Self {
        Self { lists: vec![Vec::new(); n] }
    }

    pub fn add_node(&mut self) -> usize {
        self.lists.push(Vec::new());
        self.lists.len() - 1
    }

    pub fn connect(&mut self, u: usize, v: usize, cost: f64) {
        if u != v {
            self.lists[u].push((v, cost));
            self.lists[v].push((u, cost));
        }
    }

    pub fn finish(self) -> Csr {
        Csr::from_lists(self.lists)
    }
}

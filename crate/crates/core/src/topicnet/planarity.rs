//! Left-right planarity test (de Fraysseix–Rosenstiehl criterion, in the
//! formulation of Brandes' "The Left-Right Planarity Test").

/// Whether the simple undirected graph on `n` vertices is planar.
/// Self-loops and repeated edges are ignored.
pub fn is_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut simple: Vec<(usize, usize)> = edges
        .iter()
        .filter(|(a, b)| a != b)
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect();
    simple.sort_unstable();
    simple.dedup();
    assert!(simple.iter().all(|&(_, b)| b < n), "edge endpoint out of range");
    if n > 2 && simple.len() > 3 * n - 6 {
        return false;
    }
    LrState::new(n, &simple).run()
}

type EdgeId = usize;
type PairId = usize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Interval {
    low: Option<EdgeId>,
    high: Option<EdgeId>,
}

impl Interval {
    fn single(e: EdgeId) -> Self {
        Interval {
            low: Some(e),
            high: Some(e),
        }
    }

    fn is_empty(&self) -> bool {
        self.low.is_none() && self.high.is_none()
    }
}

#[derive(Debug, Clone, Copy)]
struct ConflictPair {
    id: PairId,
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }
}

struct LrState {
    n: usize,
    /// Undirected adjacency: `(neighbour, undirected edge index)`.
    adj: Vec<Vec<(usize, usize)>>,
    oriented: Vec<bool>,
    height: Vec<Option<usize>>,
    parent_edge: Vec<Option<EdgeId>>,
    roots: Vec<usize>,
    // Directed edges produced by the orientation phase.
    src: Vec<usize>,
    dst: Vec<usize>,
    out: Vec<Vec<EdgeId>>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting_depth: Vec<usize>,
    // Testing phase.
    reference: Vec<Option<EdgeId>>,
    lowpt_edge: Vec<Option<EdgeId>>,
    stack_bottom: Vec<Option<PairId>>,
    stack: Vec<ConflictPair>,
    next_pair: PairId,
}

impl LrState {
    fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (i, &(a, b)) in edges.iter().enumerate() {
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
        let m = edges.len();
        LrState {
            n,
            adj,
            oriented: vec![false; m],
            height: vec![None; n],
            parent_edge: vec![None; n],
            roots: Vec::new(),
            src: Vec::with_capacity(m),
            dst: Vec::with_capacity(m),
            out: vec![Vec::new(); n],
            lowpt: Vec::with_capacity(m),
            lowpt2: Vec::with_capacity(m),
            nesting_depth: Vec::with_capacity(m),
            reference: vec![None; m],
            lowpt_edge: vec![None; m],
            stack_bottom: vec![None; m],
            stack: Vec::new(),
            next_pair: 0,
        }
    }

    fn run(mut self) -> bool {
        for v in 0..self.n {
            if self.height[v].is_none() {
                self.height[v] = Some(0);
                self.roots.push(v);
                self.orient(v);
            }
        }
        for v in 0..self.n {
            let mut out = std::mem::take(&mut self.out[v]);
            out.sort_by_key(|&e| self.nesting_depth[e]);
            self.out[v] = out;
        }
        let roots = std::mem::take(&mut self.roots);
        roots.into_iter().all(|r| self.test(r))
    }

    fn h(&self, v: usize) -> usize {
        self.height[v].expect("visited vertex")
    }

    fn orient(&mut self, v: usize) {
        let parent = self.parent_edge[v];
        for idx in 0..self.adj[v].len() {
            let (w, undirected) = self.adj[v][idx];
            if self.oriented[undirected] {
                continue;
            }
            self.oriented[undirected] = true;
            let e = self.src.len();
            self.src.push(v);
            self.dst.push(w);
            self.out[v].push(e);
            let hv = self.h(v);
            self.lowpt.push(hv);
            self.lowpt2.push(hv);
            self.nesting_depth.push(0);
            match self.height[w] {
                None => {
                    self.parent_edge[w] = Some(e);
                    self.height[w] = Some(hv + 1);
                    self.orient(w);
                }
                Some(hw) => self.lowpt[e] = hw,
            }
            self.nesting_depth[e] = 2 * self.lowpt[e] + usize::from(self.lowpt2[e] < hv);
            if let Some(p) = parent {
                let (le, l2e, lp) = (self.lowpt[e], self.lowpt2[e], self.lowpt[p]);
                if le < lp {
                    self.lowpt2[p] = lp.min(l2e);
                    self.lowpt[p] = le;
                } else if le > lp {
                    self.lowpt2[p] = self.lowpt2[p].min(le);
                } else {
                    self.lowpt2[p] = self.lowpt2[p].min(l2e);
                }
            }
        }
    }

    fn top_id(&self) -> Option<PairId> {
        self.stack.last().map(|p| p.id)
    }

    fn new_pair(&mut self, left: Interval, right: Interval) -> ConflictPair {
        self.next_pair += 1;
        ConflictPair {
            id: self.next_pair,
            left,
            right,
        }
    }

    fn conflicting(&self, i: &Interval, b: EdgeId) -> bool {
        i.high.is_some_and(|h| self.lowpt[h] > self.lowpt[b])
    }

    fn lowest(&self, p: &ConflictPair) -> usize {
        match (p.left.low, p.right.low) {
            (None, Some(r)) => self.lowpt[r],
            (Some(l), None) => self.lowpt[l],
            (Some(l), Some(r)) => self.lowpt[l].min(self.lowpt[r]),
            (None, None) => usize::MAX,
        }
    }

    fn test(&mut self, v: usize) -> bool {
        let parent = self.parent_edge[v];
        let out = self.out[v].clone();
        for (pos, &ei) in out.iter().enumerate() {
            let w = self.dst[ei];
            self.stack_bottom[ei] = self.top_id();
            if self.parent_edge[w] == Some(ei) {
                if !self.test(w) {
                    return false;
                }
            } else {
                self.lowpt_edge[ei] = Some(ei);
                let p = self.new_pair(Interval::default(), Interval::single(ei));
                self.stack.push(p);
            }
            if self.lowpt[ei] < self.h(v) {
                let e = parent.expect("a return edge implies a parent edge");
                if pos == 0 {
                    self.lowpt_edge[e] = self.lowpt_edge[ei];
                } else if !self.add_constraints(ei, e) {
                    return false;
                }
            }
        }
        if let Some(e) = parent {
            self.remove_back_edges(e);
        }
        true
    }

    fn add_constraints(&mut self, ei: EdgeId, e: EdgeId) -> bool {
        let mut p = self.new_pair(Interval::default(), Interval::default());
        while let Some(mut q) = self.stack.pop() {
            if !q.left.is_empty() {
                q.swap();
            }
            if !q.left.is_empty() {
                return false;
            }
            let q_low = q.right.low.expect("non-empty interval");
            if self.lowpt[q_low] > self.lowpt[e] {
                if p.right.is_empty() {
                    p.right = q.right;
                } else if let Some(pl) = p.right.low {
                    self.reference[pl] = q.right.high;
                }
                p.right.low = q.right.low;
            } else {
                self.reference[q_low] = self.lowpt_edge[e];
            }
            if self.top_id() == self.stack_bottom[ei] {
                break;
            }
        }
        while let Some(top) = self.stack.last() {
            if !(self.conflicting(&top.left, ei) || self.conflicting(&top.right, ei)) {
                break;
            }
            let mut q = self.stack.pop().expect("checked non-empty");
            if self.conflicting(&q.right, ei) {
                q.swap();
            }
            if self.conflicting(&q.right, ei) {
                return false;
            }
            if let Some(pl) = p.right.low {
                self.reference[pl] = q.right.high;
            }
            if q.right.low.is_some() {
                p.right.low = q.right.low;
            }
            if p.left.is_empty() {
                p.left = q.left;
            } else if let Some(pl) = p.left.low {
                self.reference[pl] = q.left.high;
            }
            p.left.low = q.left.low;
        }
        if !(p.left.is_empty() && p.right.is_empty()) {
            self.stack.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, e: EdgeId) {
        let u = self.src[e];
        let hu = self.h(u);
        while let Some(top) = self.stack.last() {
            if self.lowest(top) != hu {
                break;
            }
            self.stack.pop();
        }
        if let Some(mut p) = self.stack.pop() {
            while let Some(h) = p.left.high.filter(|&h| self.dst[h] == u) {
                p.left.high = self.reference[h];
            }
            if p.left.high.is_none() {
                if let Some(l) = p.left.low {
                    self.reference[l] = p.right.low;
                    p.left.low = None;
                }
            }
            while let Some(h) = p.right.high.filter(|&h| self.dst[h] == u) {
                p.right.high = self.reference[h];
            }
            if p.right.high.is_none() {
                if let Some(r) = p.right.low {
                    self.reference[r] = p.left.low;
                    p.right.low = None;
                }
            }
            self.stack.push(p);
        }
        if self.lowpt[e] < hu {
            if let Some(top) = self.stack.last() {
                let (hl, hr) = (top.left.high, top.right.high);
                self.reference[e] = match (hl, hr) {
                    (Some(l), None) => Some(l),
                    (Some(l), Some(r)) if self.lowpt[l] > self.lowpt[r] => Some(l),
                    _ => hr,
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Vec<(usize, usize)> {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    }

    #[test]
    fn kuratowski_graphs() {
        assert!(is_planar(4, &complete(4)));
        assert!(!is_planar(5, &complete(5)));
        let k33: Vec<_> = (0..3).flat_map(|i| (3..6).map(move |j| (i, j))).collect();
        assert!(!is_planar(6, &k33));
        let mut k5_minus = complete(5);
        k5_minus.pop();
        assert!(is_planar(5, &k5_minus));
    }

    #[test]
    fn petersen_is_not_planar() {
        let mut e = Vec::new();
        for i in 0..5 {
            e.push((i, (i + 1) % 5));
            e.push((i, i + 5));
            e.push((i + 5, (i + 2) % 5 + 5));
        }
        assert!(!is_planar(10, &e));
    }

    #[test]
    fn subdivided_k33_is_not_planar() {
        // K3,3 with edge (0,3) replaced by the path 0-6-3.
        let mut e: Vec<_> = (0..3)
            .flat_map(|i| (3..6).map(move |j| (i, j)))
            .filter(|&p| p != (0, 3))
            .collect();
        e.extend([(0, 6), (6, 3)]);
        assert!(!is_planar(7, &e));
    }

    #[test]
    fn planar_families() {
        let grid: Vec<_> = (0..16)
            .flat_map(|v| {
                let mut out = vec![];
                if v % 4 < 3 {
                    out.push((v, v + 1));
                }
                if v < 12 {
                    out.push((v, v + 4));
                }
                out
            })
            .collect();
        assert!(is_planar(16, &grid));
        // Wheel: hub 0 joined to a 9-cycle.
        let mut wheel: Vec<_> = (1..10).map(|i| (0, i)).collect();
        wheel.extend((1..10).map(|i| (i, i % 9 + 1)));
        assert!(is_planar(10, &wheel));
        assert!(is_planar(3, &[]));
        assert!(is_planar(0, &[]));
    }

    #[test]
    fn disconnected_components() {
        let mut e = complete(4);
        e.extend(complete(5).into_iter().map(|(a, b)| (a + 4, b + 4)));
        assert!(!is_planar(9, &e));
        let mut e = complete(4);
        e.extend(complete(4).into_iter().map(|(a, b)| (a + 4, b + 4)));
        assert!(is_planar(8, &e));
    }
}

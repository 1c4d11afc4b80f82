//! Shared oracles and fixtures for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use miner_core::ingest::FixtureTransport;
use miner_core::topicnet::is_planar;
use ndarray::Array2;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/forem")
}

/// Serves the canned fixture over real HTTP. Paths listed in `fail_once`
/// answer 500 the first time they are requested.
pub struct FixtureServer {
    pub base_url: String,
    pub requests: Arc<AtomicUsize>,
    pub failures_served: Arc<AtomicUsize>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl FixtureServer {
    pub fn start(fail_once: &[&str]) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let transport = FixtureTransport::new(fixture_dir());
        let pending: Arc<Mutex<HashSet<String>>> =
            Arc::new(Mutex::new(fail_once.iter().map(|s| s.to_string()).collect()));
        let requests = Arc::new(AtomicUsize::new(0));
        let failures_served = Arc::new(AtomicUsize::new(0));
        let stop = Arc::new(AtomicBool::new(false));
        let (req, fails, halt) = (requests.clone(), failures_served.clone(), stop.clone());
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if halt.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                req.fetch_add(1, Ordering::SeqCst);
                serve(stream, &transport, &pending, &fails);
            }
        });
        FixtureServer {
            base_url: format!("http://{addr}"),
            requests,
            failures_served,
            stop,
            handle: Some(handle),
        }
    }
}

fn serve(
    mut stream: TcpStream,
    transport: &FixtureTransport,
    pending: &Mutex<HashSet<String>>,
    fails: &AtomicUsize,
) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut request_line = String::new();
    if reader.read_line(&mut request_line).is_err() {
        return;
    }
    loop {
        let mut header = String::new();
        if reader.read_line(&mut header).unwrap_or(0) == 0 || header == "\r\n" {
            break;
        }
    }
    let path = request_line.split_whitespace().nth(1).unwrap_or("/").to_string();
    let (status, body) = if pending.lock().unwrap().remove(&path) {
        fails.fetch_add(1, Ordering::SeqCst);
        (500, "{\"error\": \"try again\"}".to_string())
    } else {
        let r = transport.respond(&path);
        (r.status, r.body)
    };
    let _ = write!(
        stream,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.base_url.trim_start_matches("http://"));
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

// ---------------------------------------------------------------------------
// Planarity by Wagner's theorem: a graph is planar iff it has neither K5
// nor K3,3 as a minor. Exhaustive over contractions for up to 7 vertices.

pub type Adj = [u8; 7];

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Adj {
    assert!(n <= 7);
    let mut adj = [0u8; 7];
    for &(a, b) in edges {
        if a != b {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
    }
    adj
}

fn edge_count(n: usize, adj: &Adj) -> u32 {
    adj[..n].iter().map(|r| r.count_ones()).sum::<u32>() / 2
}

fn has_k5_or_k33_subgraph(n: usize, adj: &Adj) -> bool {
    let connected = |a: usize, b: usize| adj[a] & (1 << b) != 0;
    for subset in 0u32..(1 << n) {
        let verts: Vec<usize> = (0..n).filter(|&v| subset & (1 << v) != 0).collect();
        match verts.len() {
            5 => {
                if verts.iter().enumerate().all(|(i, &a)| verts[i + 1..].iter().all(|&b| connected(a, b))) {
                    return true;
                }
            }
            6 => {
                // Sides {v0, x, y} and the rest.
                for x in 1..6 {
                    for y in x + 1..6 {
                        let side_a = [verts[0], verts[x], verts[y]];
                        let side_b: Vec<usize> = verts.iter().copied().filter(|v| !side_a.contains(v)).collect();
                        if side_a.iter().all(|&a| side_b.iter().all(|&b| connected(a, b))) {
                            return true;
                        }
                    }
                }
            }
            _ => {}
        }
    }
    false
}

fn contract(n: usize, adj: &Adj, u: usize, v: usize) -> Adj {
    debug_assert!(u < v);
    let relabel = |w: usize| if w > v { w - 1 } else { w };
    let mut out = [0u8; 7];
    for a in 0..n {
        for b in a + 1..n {
            if adj[a] & (1 << b) == 0 {
                continue;
            }
            let (x, y) = (if a == v { u } else { a }, if b == v { u } else { b });
            if x == y {
                continue;
            }
            let (x, y) = (relabel(x), relabel(y));
            out[x] |= 1 << y;
            out[y] |= 1 << x;
        }
    }
    out
}

fn to_mask(n: usize, adj: &Adj) -> usize {
    pairs(n)
        .iter()
        .enumerate()
        .filter(|(_, &(a, b))| adj[a] & (1 << b) != 0)
        .fold(0, |m, (bit, _)| m | 1 << bit)
}

fn from_mask(n: usize, mask: usize) -> Adj {
    adjacency(n, &graph_from_mask(&pairs(n), mask as u32))
}

/// Whether a graph has a K5 or K3,3 minor. Any minor is a subgraph of some
/// contraction, so it suffices to look for the two graphs as subgraphs
/// after every sequence of edge contractions. Answers for 5 and 6
/// vertices are tabulated over all labelled graphs.
pub struct KuratowskiOracle {
    tables: Vec<Vec<bool>>,
}

impl KuratowskiOracle {
    pub fn new() -> Self {
        let mut oracle = KuratowskiOracle { tables: Vec::new() };
        for n in 0..=6 {
            let table = (0..1usize << pairs(n).len()).map(|m| oracle.compute(n, &from_mask(n, m))).collect();
            oracle.tables.push(table);
        }
        oracle
    }

    fn compute(&self, n: usize, adj: &Adj) -> bool {
        if n < 5 || edge_count(n, adj) < 9 {
            return false;
        }
        if has_k5_or_k33_subgraph(n, adj) {
            return true;
        }
        (0..n).any(|u| {
            (u + 1..n).any(|v| adj[u] & (1 << v) != 0 && self.has_minor(n - 1, &contract(n, adj, u, v)))
        })
    }

    pub fn has_minor(&self, n: usize, adj: &Adj) -> bool {
        match self.tables.get(n) {
            Some(t) => t[to_mask(n, adj)],
            None => self.compute(n, adj),
        }
    }

    pub fn planar(&self, n: usize, edges: &[(usize, usize)]) -> bool {
        !self.has_minor(n, &adjacency(n, edges))
    }
}

/// Every labelled simple graph on `n` vertices, by edge bitmask over the
/// pairs in lexicographic order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

pub fn graph_from_mask(pairs: &[(usize, usize)], mask: u32) -> Vec<(usize, usize)> {
    pairs.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &e)| e).collect()
}

// ---------------------------------------------------------------------------
// Demoucron–Malgrange–Pertuiset path-addition planarity test, valid for
// biconnected graphs. Used as an independent check on filtered networks.

pub fn dmp_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    let norm = |a: usize, b: usize| (a.min(b), a.max(b));
    let edge_set: BTreeSet<(usize, usize)> = edges.iter().map(|&(a, b)| norm(a, b)).collect();
    let mut adj = vec![BTreeSet::new(); n];
    for &(a, b) in &edge_set {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    if edge_set.len() < 3 {
        return true;
    }
    assert!(is_biconnected(n, &adj), "the path-addition test needs a biconnected graph");

    let (s, t) = *edge_set.iter().next().unwrap();
    let path = bfs_path(&adj, s, t, |a, b| norm(a, b) != (s, t), |_| true).expect("edge lies on a cycle");
    let mut on_v = vec![false; n];
    let mut on_e: HashSet<(usize, usize)> = HashSet::new();
    for w in path.windows(2) {
        on_e.insert(norm(w[0], w[1]));
    }
    on_e.insert((s, t));
    path.iter().for_each(|&v| on_v[v] = true);
    let mut faces = vec![path.clone(), path];

    while on_e.len() < edge_set.len() {
        // Fragments: chords between embedded vertices, and components of
        // the unembedded vertices with their attachments.
        let mut fragments: Vec<(BTreeSet<usize>, Option<(usize, usize)>, Vec<usize>)> = Vec::new();
        for &(a, b) in &edge_set {
            if on_v[a] && on_v[b] && !on_e.contains(&(a, b)) {
                fragments.push(([a, b].into_iter().collect(), Some((a, b)), Vec::new()));
            }
        }
        let mut seen = vec![false; n];
        for start in 0..n {
            if on_v[start] || seen[start] || adj[start].is_empty() {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut i = 0;
            let mut contacts = BTreeSet::new();
            while i < comp.len() {
                let v = comp[i];
                i += 1;
                for &w in &adj[v] {
                    if on_v[w] {
                        contacts.insert(w);
                    } else if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            fragments.push((contacts, None, comp));
        }
        let admissible: Vec<Vec<usize>> = fragments
            .iter()
            .map(|(contacts, _, _)| {
                (0..faces.len()).filter(|&f| contacts.iter().all(|c| faces[f].contains(c))).collect()
            })
            .collect();
        if admissible.iter().any(Vec::is_empty) {
            return false;
        }
        let pick = (0..fragments.len()).min_by_key(|&i| admissible[i].len()).unwrap();
        let face = admissible[pick][0];
        let (contacts, chord, comp) = &fragments[pick];
        let path = match chord {
            Some((a, b)) => vec![*a, *b],
            None => {
                let in_comp: HashSet<usize> = comp.iter().copied().collect();
                let a = *contacts.iter().next().unwrap();
                let x = *adj[a].iter().find(|w| in_comp.contains(w)).unwrap();
                // Walk inside the component to a vertex touching another contact.
                let end = |v: usize| adj[v].iter().any(|&c| c != a && on_v[c]);
                let inner = bfs_to(&adj, x, end, |v| in_comp.contains(&v)).unwrap();
                let last = *inner.last().unwrap();
                let b = *adj[last].iter().find(|&&c| c != a && on_v[c]).unwrap();
                let mut p = vec![a];
                p.extend(inner);
                p.push(b);
                p
            }
        };
        for w in path.windows(2) {
            on_e.insert(norm(w[0], w[1]));
        }
        path.iter().for_each(|&v| on_v[v] = true);
        let (a, b) = (path[0], *path.last().unwrap());
        let f = faces.swap_remove(face);
        let ia = f.iter().position(|&v| v == a).unwrap();
        let ib = f.iter().position(|&v| v == b).unwrap();
        let walk = |from: usize, to: usize| {
            let mut out = vec![f[from]];
            let mut i = from;
            while i != to {
                i = (i + 1) % f.len();
                out.push(f[i]);
            }
            out
        };
        let interior = &path[1..path.len() - 1];
        let mut one = walk(ia, ib);
        one.extend(interior.iter().rev());
        let mut two = walk(ib, ia);
        two.extend(interior.iter());
        faces.push(one);
        faces.push(two);
    }
    true
}

fn bfs_path(
    adj: &[BTreeSet<usize>],
    s: usize,
    t: usize,
    edge_ok: impl Fn(usize, usize) -> bool,
    vertex_ok: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[s] = s;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        if v == t {
            let mut path = vec![t];
            while *path.last().unwrap() != s {
                path.push(prev[*path.last().unwrap()]);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &adj[v] {
            if prev[w] == usize::MAX && edge_ok(v, w) && (w == t || vertex_ok(w)) {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

fn bfs_to(
    adj: &[BTreeSet<usize>],
    s: usize,
    is_end: impl Fn(usize) -> bool,
    vertex_ok: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[s] = s;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        if is_end(v) {
            let mut path = vec![v];
            while *path.last().unwrap() != s {
                path.push(prev[*path.last().unwrap()]);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &adj[v] {
            if prev[w] == usize::MAX && vertex_ok(w) {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

fn is_biconnected(n: usize, adj: &[BTreeSet<usize>]) -> bool {
    let connected_without = |skip: Option<usize>| {
        let start = (0..n).find(|&v| Some(v) != skip).unwrap();
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if Some(w) != skip && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        (0..n).all(|v| seen[v] || Some(v) == skip)
    };
    n >= 3 && connected_without(None) && (0..n).all(|v| connected_without(Some(v)))
}

// ---------------------------------------------------------------------------

/// PMFG by the textbook recipe: every pair in descending weight order,
/// kept whenever the graph stays planar. No shortcuts, no early exit.
pub fn naive_pmfg(w: &Array2<f64>) -> Vec<(usize, usize)> {
    let n = w.nrows();
    let mut pairs: Vec<(usize, usize)> = pairs(n);
    pairs.sort_by(|a, b| w[[b.0, b.1]].total_cmp(&w[[a.0, a.1]]).then(a.cmp(b)));
    let mut kept = Vec::new();
    for p in pairs {
        kept.push(p);
        if !is_planar(n, &kept) {
            kept.pop();
        }
    }
    kept
}

/// Kruskal by brute force: repeatedly the heaviest edge joining two
/// different components, found by scanning all pairs.
pub fn naive_mst(w: &Array2<f64>) -> BTreeSet<(usize, usize)> {
    let n = w.nrows();
    let mut comp: Vec<usize> = (0..n).collect();
    let mut tree = BTreeSet::new();
    while tree.len() + 1 < n {
        let mut best: Option<(usize, usize)> = None;
        for (i, j) in pairs(n) {
            if comp[i] != comp[j] && best.is_none_or(|(a, b)| w[[i, j]] > w[[a, b]]) {
                best = Some((i, j));
            }
        }
        let (i, j) = best.unwrap();
        let (from, to) = (comp[j], comp[i]);
        comp.iter_mut().filter(|c| **c == from).for_each(|c| *c = to);
        tree.insert((i, j));
    }
    tree
}

pub fn random_symmetric(n: usize, rng: &mut impl rand::Rng) -> Array2<f64> {
    let mut w = Array2::eye(n);
    for i in 0..n {
        for j in i + 1..n {
            let x: f64 = rng.random_range(-1.0..1.0);
            w[[i, j]] = x;
            w[[j, i]] = x;
        }
    }
    w
}

/// Largest deviation of a row sum from 1, and the smallest entry.
pub fn simplex_error(m: &Array2<f64>) -> (f64, f64) {
    let dev = m.rows().into_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
    let min = m.iter().copied().fold(f64::INFINITY, f64::min);
    (dev, min)
}

// ---------------------------------------------------------------------------
// Three documents, two topics, window 3, top 3 terms. Expected values come
// from a separate straight-line implementation that enumerates the 16
// windows as explicit token sets; they are frozen here.

pub const CV_TERMS: [&str; 6] = ["api_design", "code_review", "pull_request", "remot_work", "time_zone", "work_home"];
pub const CV_DOCS: [&[&str]; 3] = [
    &["api_design", "code_review", "pull_request", "api_design", "remot_work"],
    &["code_review", "pull_request", "time_zone", "work_home", "code_review"],
    &["api_design", "remot_work", "time_zone", "work_home", "pull_request", "api_design"],
];
pub const CV_BETA: [[f64; 6]; 2] = [[0.30, 0.25, 0.20, 0.10, 0.10, 0.05], [0.05, 0.05, 0.10, 0.25, 0.20, 0.35]];
pub const CV_WINDOW: usize = 3;
pub const CV_TOP_N: usize = 3;
pub const CV_N_WINDOWS: u64 = 16;
/// Windows containing each term, in `CV_TERMS` order.
pub const CV_COUNTS: [u64; 6] = [8, 6, 8, 5, 6, 6];
pub const CV_TOPIC_SCORES: [f64; 2] = [0.5692296628842599, 0.626771402634242];
pub const CV_MEAN: f64 = 0.598000532759251;

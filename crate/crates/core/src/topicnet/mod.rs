//! Topic correlation networks filtered to their planar maximally filtered graph.

mod export;
mod planarity;

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use export::{export_graph, layout, ExportFormat};
pub use planarity::is_planar;

use crate::error::{Error, Result};

pub type WeightedEdge = (usize, usize, f64);

/// Pearson correlation between the columns of θ. Correlations with a
/// constant column are reported as 0.
pub fn correlation_matrix(theta: &Array2<f64>) -> Result<Array2<f64>> {
    let (d, k) = theta.dim();
    if k < 2 {
        return Err(Error::Model(format!("correlation needs at least 2 topics, got {k}")));
    }
    if d < 2 {
        return Err(Error::Model(format!("correlation needs at least 2 documents, got {d}")));
    }
    let centred: Vec<Vec<f64>> = theta
        .columns()
        .into_iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / d as f64;
            c.iter().map(|x| x - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centred.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    for (i, &n) in norms.iter().enumerate() {
        if n == 0.0 {
            log::warn!("topic {i} has constant proportions; its correlations are set to 0");
        }
    }
    let mut r = Array2::eye(k);
    for i in 0..k {
        for j in i + 1..k {
            let value = if norms[i] == 0.0 || norms[j] == 0.0 {
                0.0
            } else {
                let dot: f64 = centred[i].iter().zip(&centred[j]).map(|(a, b)| a * b).sum();
                (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            };
            r[[i, j]] = value;
            r[[j, i]] = value;
        }
    }
    Ok(r)
}

/// Off-diagonal pairs by weight descending, ties by ascending `(i, j)`.
fn ranked_pairs(weights: &Array2<f64>) -> Vec<WeightedEdge> {
    let n = weights.nrows();
    let mut pairs: Vec<WeightedEdge> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j, weights[[i, j]])))
        .collect();
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    pairs
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    /// Merge the sets of `a` and `b`; false if they were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

fn check_square(weights: &Array2<f64>, min_n: usize) -> Result<usize> {
    let n = weights.nrows();
    if weights.ncols() != n {
        return Err(Error::Model("weight matrix must be square".into()));
    }
    if n < min_n {
        return Err(Error::Model(format!("need at least {min_n} nodes, got {n}")));
    }
    Ok(n)
}

/// Maximum-weight spanning tree (forest if some weights are missing) by
/// Kruskal's algorithm over descending weights.
pub fn maximal_spanning_tree(weights: &Array2<f64>) -> Result<Vec<WeightedEdge>> {
    let n = check_square(weights, 2)?;
    let mut uf = UnionFind::new(n);
    let mut tree = Vec::with_capacity(n - 1);
    for (i, j, w) in ranked_pairs(weights) {
        if uf.union(i, j) {
            tree.push((i, j, w));
            if tree.len() == n - 1 {
                break;
            }
        }
    }
    Ok(tree)
}

/// Planar maximally filtered graph: add pairs by descending weight whenever
/// the graph stays planar, until 3n − 6 edges are placed.
///
/// An edge joining two different components cannot break planarity, so
/// only edges closing a cycle are tested.
pub fn pmfg(weights: &Array2<f64>) -> Result<Vec<WeightedEdge>> {
    let n = check_square(weights, 3)?;
    let target = 3 * n - 6;
    let mut uf = UnionFind::new(n);
    let mut kept: Vec<WeightedEdge> = Vec::with_capacity(target);
    let mut plain: Vec<(usize, usize)> = Vec::with_capacity(target + 1);
    for (i, j, w) in ranked_pairs(weights) {
        if kept.len() == target {
            break;
        }
        plain.push((i, j));
        if uf.union(i, j) || is_planar(n, &plain) {
            kept.push((i, j, w));
        } else {
            plain.pop();
        }
    }
    Ok(kept)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Social,
    Technical,
    Mixed,
    Unlabeled,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Social => "social",
            Category::Technical => "technical",
            Category::Mixed => "mixed",
            Category::Unlabeled => "unlabeled",
        }
    }

    pub fn color(self) -> &'static str {
        match self {
            Category::Social => "red",
            Category::Technical => "green",
            Category::Mixed => "yellow",
            Category::Unlabeled => "lightgray",
        }
    }
}

impl std::str::FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "social" => Ok(Category::Social),
            "technical" => Ok(Category::Technical),
            "mixed" => Ok(Category::Mixed),
            "" | "unlabeled" => Ok(Category::Unlabeled),
            other => Err(Error::Config(format!("unknown topic category {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub label: String,
    pub category: Category,
}

/// Parse a `topic<TAB>label<TAB>category` file. Topic numbers are 1-based;
/// a header line and `#` comments are skipped.
pub fn parse_annotations(text: &str, location: &Path) -> Result<Vec<(usize, Annotation)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let first = cols.next().unwrap_or_default().trim();
        let Ok(topic) = first.parse::<usize>() else {
            if out.is_empty() && i == 0 {
                continue;
            }
            return Err(Error::parse("annotations", format!("{}:{}", location.display(), i + 1), "bad topic number"));
        };
        if topic == 0 {
            return Err(Error::parse("annotations", format!("{}:{}", location.display(), i + 1), "topics are numbered from 1"));
        }
        let label = cols.next().unwrap_or_default().trim().to_string();
        let category = cols.next().unwrap_or_default().parse()?;
        out.push((topic - 1, Annotation { label, category }));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicGraph {
    pub n: usize,
    pub labels: Vec<String>,
    pub categories: Vec<Category>,
    pub frequencies: Vec<f64>,
    pub weights: Array2<f64>,
    pub pmfg_edges: Vec<WeightedEdge>,
}

impl TopicGraph {
    /// Correlate θ columns and filter with the PMFG. `default_labels` are
    /// used for topics without an annotation.
    pub fn build(
        theta: &Array2<f64>,
        frequencies: Vec<f64>,
        default_labels: Vec<String>,
        annotations: &[(usize, Annotation)],
    ) -> Result<Self> {
        let weights = correlation_matrix(theta)?;
        let n = weights.nrows();
        if frequencies.len() != n || default_labels.len() != n {
            return Err(Error::Model("labels and frequencies must cover every topic".into()));
        }
        let mut labels = default_labels;
        let mut categories = vec![Category::Unlabeled; n];
        for (topic, a) in annotations {
            if *topic >= n {
                return Err(Error::Config(format!("annotation for topic {} but the model has {n}", topic + 1)));
            }
            if !a.label.is_empty() {
                labels[*topic] = a.label.clone();
            }
            categories[*topic] = a.category;
        }
        let pmfg_edges = if n >= 3 { pmfg(&weights)? } else { maximal_spanning_tree(&weights)? };
        Ok(TopicGraph {
            n,
            labels,
            categories,
            frequencies,
            weights,
            pmfg_edges,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn pearson_by_hand() {
        // Columns x = (0.2, 0.5, 0.8), y = (0.3, 0.1, 0.2):
        // centred x = (−0.3, 0, 0.3), y = (0.1, −0.1, 0); Σxy = −0.03,
        // |x| = √0.18, |y| = √0.02 → r = −0.03 / 0.06 = −0.5.
        let theta = array![[0.2, 0.3, 0.5], [0.5, 0.1, 0.4], [0.8, 0.2, 0.0]];
        let r = correlation_matrix(&theta).unwrap();
        assert!((r[[0, 1]] + 0.5).abs() < 1e-12, "{r}");
        assert_eq!(r[[0, 1]], r[[1, 0]]);
        for i in 0..3 {
            assert_eq!(r[[i, i]], 1.0);
        }
    }

    #[test]
    fn identical_and_constant_columns() {
        let theta = array![[0.1, 0.1, 0.5], [0.7, 0.7, 0.5], [0.3, 0.3, 0.5]];
        let r = correlation_matrix(&theta).unwrap();
        assert!((r[[0, 1]] - 1.0).abs() < 1e-12);
        assert_eq!(r[[0, 2]], 0.0);
        assert_eq!(r[[2, 2]], 1.0);
        assert!(correlation_matrix(&array![[1.0], [1.0]]).is_err());
        assert!(correlation_matrix(&array![[0.5, 0.5]]).is_err());
    }

    #[test]
    fn mst_equal_weights_is_lexicographic() {
        let w = Array2::from_elem((4, 4), 0.5);
        let t = maximal_spanning_tree(&w).unwrap();
        assert_eq!(t.iter().map(|e| (e.0, e.1)).collect::<Vec<_>>(), [(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn small_pmfgs() {
        let w4 = array![[1.0, 0.1, 0.2, 0.3], [0.1, 1.0, 0.4, 0.5], [0.2, 0.4, 1.0, 0.6], [0.3, 0.5, 0.6, 1.0]];
        assert_eq!(pmfg(&w4).unwrap().len(), 6);
        let mut w5 = Array2::eye(5);
        let mut x = 0.0;
        for i in 0..5 {
            for j in i + 1..5 {
                x += 0.05;
                w5[[i, j]] = x;
                w5[[j, i]] = x;
            }
        }
        let g = pmfg(&w5).unwrap();
        assert_eq!(g.len(), 9);
        // (0, 1) carries the smallest weight and is the edge that would close K5.
        assert!(!g.iter().any(|e| (e.0, e.1) == (0, 1)));
    }

    #[test]
    fn annotations() {
        let text = "topic\tlabel\tcategory\n1\tRemote work\tsocial\n3\tCloud\ttechnical\n# note\n2\t\t\n";
        let a = parse_annotations(text, Path::new("t.tsv")).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a[0], (0, Annotation { label: "Remote work".into(), category: Category::Social }));
        assert_eq!(a[2].1.category, Category::Unlabeled);
        assert!(parse_annotations("1\tx\tweird\n", Path::new("t")).is_err());
        assert!(parse_annotations("0\tx\tsocial\n", Path::new("t")).is_err());
    }

    #[test]
    fn graph_uses_annotations() {
        let theta = array![[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.1, 0.2, 0.7], [0.3, 0.3, 0.4]];
        let ann = [(1, Annotation { label: "Web".into(), category: Category::Technical })];
        let labels = vec!["a".to_string(), "b".into(), "c".into()];
        let g = TopicGraph::build(&theta, vec![0.3, 0.3, 0.4], labels, &ann).unwrap();
        assert_eq!(g.labels, ["a", "Web", "c"]);
        assert_eq!(g.categories, [Category::Unlabeled, Category::Technical, Category::Unlabeled]);
        assert_eq!(g.pmfg_edges.len(), 3);
    }
}

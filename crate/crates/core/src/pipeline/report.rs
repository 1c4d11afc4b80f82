use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{read_annotations, topic_graph};
use crate::error::{Error, Result};
use crate::selection::{CoherenceReport, DEFAULT_TOP_N, DEFAULT_WINDOW};
use crate::textprep::PreparedCorpus;
use crate::topicmodel::{top_terms, TopicModel};
use crate::topicnet::{export_graph, Category, ExportFormat};

/// Artifacts a report can draw on; any may be absent.
#[derive(Debug, Clone, Default)]
pub struct ReportInputs {
    pub model_dir: Option<PathBuf>,
    pub dtm_prefix: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub coherence: Option<PathBuf>,
    pub link_stats: Option<PathBuf>,
}

impl ReportInputs {
    /// Inputs at their standard places inside a pipeline output directory.
    pub fn from_out_dir(dir: &Path, annotations: Option<PathBuf>) -> Self {
        ReportInputs {
            model_dir: Some(dir.join("model")),
            dtm_prefix: Some(dir.join("dtm")),
            annotations,
            coherence: Some(dir.join("coherence.csv")),
            link_stats: Some(dir.join("link_stats.md")),
        }
    }
}

fn notice(out: &mut String, what: &str, err: &Error) {
    let _ = writeln!(out, "_{what} omitted: {err}._\n");
}

/// Turn missing files into `None` and keep every other error.
fn optional<T>(r: Result<T>) -> Result<std::result::Result<T, Error>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e @ Error::MissingArtifact(_)) => Ok(Err(e)),
        Err(e) => Err(e),
    }
}

fn require(path: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    match path {
        Some(p) if p.exists() => Ok(p.clone()),
        Some(p) => Err(Error::MissingArtifact(p.clone())),
        None => Err(Error::MissingArtifact(PathBuf::from(what))),
    }
}

/// Markdown report: topic table, coherence curve, network figure and link table.
/// Sections whose artifacts are missing are replaced by a notice.
pub fn render_report(inputs: &ReportInputs) -> Result<String> {
    let mut out = String::from("# Topic mining report\n\n");
    let annotations = read_annotations(inputs.annotations.as_deref())?;

    let model = optional(require(&inputs.model_dir, "model directory").and_then(|d| TopicModel::load(&d)))?;
    let prepared = match &inputs.dtm_prefix {
        Some(p) => optional(PreparedCorpus::load(p))?,
        None => Err(Error::MissingArtifact(PathBuf::from("document-term matrix"))),
    };

    out.push_str("## Topics\n\n");
    match (&model, &prepared) {
        (Ok(model), Ok(prepared)) => {
            if prepared.vocab.len() != model.n_terms() {
                return Err(Error::Model("model and vocabulary sizes differ".into()));
            }
            let mut labels = vec![String::new(); model.k];
            let mut categories = vec![Category::Unlabeled; model.k];
            for (t, a) in &annotations {
                if *t < model.k {
                    labels[*t] = a.label.clone();
                    categories[*t] = a.category;
                }
            }
            let freq = model.relative_frequency();
            let bigrams = top_terms(&model.beta, &prepared.vocab.terms, 5);
            out.push_str("| Topic | Label | Category | Rel. Freq. | Key Bigrams |\n|---|---|---|---:|---|\n");
            let mut printed_sum = 0.0;
            for i in 0..model.k {
                let f = format!("{:.3}", freq[i]);
                printed_sum += f.parse::<f64>().expect("formatted number");
                let _ = writeln!(
                    out,
                    "| T{} | {} | {} | {} | {} |",
                    i + 1,
                    labels[i].replace('|', "\\|"),
                    categories[i].as_str(),
                    f,
                    bigrams[i].join(", ")
                );
            }
            let _ = writeln!(
                out,
                "\n{} topics, fitted with the {:?} method and seed {}. Printed frequencies sum to {:.3}.\n",
                model.k, model.method, model.seed, printed_sum
            );
        }
        (Err(e), _) | (_, Err(e)) => notice(&mut out, "Topic table", e),
    }

    out.push_str("## Coherence by number of topics\n\n");
    match optional(require(&inputs.coherence, "coherence curve").and_then(|p| {
        CoherenceReport::from_csv(&std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?, DEFAULT_WINDOW, DEFAULT_TOP_N, &p)
    }))? {
        Ok(report) => {
            out.push_str(&coherence_svg(&report));
            let _ = writeln!(out, "\nHighest C_v at K = {}.\n", report.chosen_k);
            out.push_str("| K | C_v |\n|---:|---:|\n");
            for (k, s) in &report.per_k {
                let _ = writeln!(out, "| {k} | {s:.4} |");
            }
            out.push('\n');
        }
        Err(e) => notice(&mut out, "Coherence curve", &e),
    }

    out.push_str("## Topic network\n\n");
    match &model {
        Ok(model) => {
            let graph = topic_graph(model, &annotations)?;
            out.push_str(&String::from_utf8(export_graph(&graph, ExportFormat::Svg, model.seed)).expect("utf-8"));
            let _ = writeln!(
                out,
                "\nPlanar filtered network: {} topics, {} edges. Node size grows with relative frequency.\n",
                graph.n,
                graph.pmfg_edges.len()
            );
        }
        Err(e) => notice(&mut out, "Network", e),
    }

    out.push_str("## Links to other platforms\n\n");
    match require(&inputs.link_stats, "link statistics") {
        Ok(p) => {
            out.push_str(&std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?);
            out.push('\n');
        }
        Err(e) => notice(&mut out, "Link table", &e),
    }
    Ok(out)
}

fn coherence_svg(report: &CoherenceReport) -> String {
    const W: f64 = 480.0;
    const H: f64 = 260.0;
    const L: f64 = 60.0;
    const R: f64 = 20.0;
    const T: f64 = 20.0;
    const B: f64 = 40.0;
    let points: Vec<(usize, f64)> = report.per_k.iter().map(|(&k, &s)| (k, s)).collect();
    let (k_lo, k_hi) = (points[0].0 as f64, points[points.len() - 1].0 as f64);
    let (mut s_lo, mut s_hi) = points
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &(_, s)| (lo.min(s), hi.max(s)));
    if s_hi - s_lo < 1e-9 {
        s_lo -= 0.05;
        s_hi += 0.05;
    }
    let x = |k: f64| if k_hi > k_lo { L + (k - k_lo) / (k_hi - k_lo) * (W - L - R) } else { (L + W - R) / 2.0 };
    let y = |s: f64| T + (s_hi - s) / (s_hi - s_lo) * (H - T - B);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <line x1=\"{L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{L}\" y1=\"{T}\" x2=\"{L}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - B,
        W - R,
        H - B,
        H - B
    );
    let path: Vec<String> = points.iter().map(|&(k, s)| format!("{:.2},{:.2}", x(k as f64), y(s))).collect();
    let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"{}\"/>", path.join(" "));
    for &(k, s) in &points {
        let fill = if k == report.chosen_k { "crimson" } else { "steelblue" };
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{fill}\"><title>K={k}: {s:.4}</title></circle>\n\
             <text x=\"{:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{k}</text>",
            x(k as f64),
            y(s),
            x(k as f64),
            H - B + 14.0
        );
    }
    for s in [s_lo, s_hi] {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{s:.3}</text>",
            L - 4.0,
            y(s) + 3.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">number of topics K</text>\n\
         <text x=\"14\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2})\">C_v</text>\n</svg>",
        (L + W - R) / 2.0,
        H - 6.0,
        (T + H - B) / 2.0,
        (T + H - B) / 2.0
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn everything_missing_gives_notices() {
        let dir = tempfile::tempdir().unwrap();
        let r = render_report(&ReportInputs::from_out_dir(dir.path(), None)).unwrap();
        assert_eq!(r.matches("omitted").count(), 4, "{r}");
        assert!(r.starts_with("# Topic mining report"));
    }

    #[test]
    fn curve_marks_chosen_k() {
        let per_k: BTreeMap<usize, f64> = [(5, 0.4), (10, 0.6), (15, 0.5)].into_iter().collect();
        let svg = coherence_svg(&CoherenceReport::new(per_k, 110, 10).unwrap());
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("crimson").count(), 1);
        assert!(svg.contains("K=10: 0.6000"));
        assert!(!svg.contains("\n\n"));
    }
}

//! Plot data as CSV text plus small self-contained SVG renderings.
//!
//! Numbers are printed with fixed precision so output is byte-stable.

use std::fmt::Write as _;

use super::{ALECurve, DecisionPathData, DependenceData, GlobalExplanation, LimeExplanation};

fn num(x: f64) -> String {
    format!("{x:.6}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// `rank,feature,score` in ranking order.
pub fn global_scores_csv(g: &GlobalExplanation) -> String {
    let mut out = String::from("rank,feature,score\n");
    for (r, &j) in g.ranking.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", r + 1, csv_field(&g.feature_names[j]), num(g.scores[j]));
    }
    out
}

/// Long format `feature,iteration,importance` for box plots.
pub fn pfi_iterations_csv(g: &GlobalExplanation) -> Option<String> {
    let per = g.per_iteration.as_ref()?;
    let mut out = String::from("feature,iteration,importance\n");
    for &j in &g.ranking {
        for (it, row) in per.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", csv_field(&g.feature_names[j]), it, num(row[j]));
        }
    }
    Some(out)
}

/// `feature,edge,effect,bin_count`; for numeric curves the count belongs to
/// the bin that ends at the edge (0 on the first edge).
pub fn ale_csv(curves: &[ALECurve]) -> String {
    let mut out = String::from("feature,edge,effect,bin_count\n");
    for c in curves {
        for (k, (e, v)) in c.edges.iter().zip(&c.effects).enumerate() {
            let count = match c.kind {
                super::AleKind::Binary => c.bin_counts[k],
                super::AleKind::Numeric => k.checked_sub(1).map_or(0, |b| c.bin_counts[b]),
            };
            let _ = writeln!(out, "{},{},{},{}", csv_field(&c.feature_name), num(*e), num(*v), count);
        }
    }
    out
}

pub fn dependence_csv(d: &DependenceData) -> String {
    let mut out = String::from("value,shap,interaction_value\n");
    for p in &d.points {
        let inter = p.interaction_value.map(num).unwrap_or_default();
        let _ = writeln!(out, "{},{},{}", num(p.value), num(p.shap), inter);
    }
    out
}

pub fn decision_path_csv(d: &DecisionPathData) -> String {
    let mut out = String::from("step,feature,phi,cumulative\n");
    let _ = writeln!(out, "0,base_value,{},{}", num(0.0), num(d.base_value));
    for (i, s) in d.steps.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{}", i + 1, csv_field(&s.label), num(s.phi), num(s.cumulative));
    }
    out
}

pub fn lime_csv(e: &LimeExplanation) -> String {
    let mut out = String::from("feature,coefficient\n");
    for f in &e.top_features {
        let _ = writeln!(out, "{},{}", csv_field(&f.name), num(f.coefficient));
    }
    out
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        xml_escape(title)
    )
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, v: f64) -> f64 {
        PAD + (v - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD)
    }

    fn py(&self, v: f64) -> f64 {
        H - PAD - (v - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD)
    }

    fn axes(&self, out: &mut String) {
        let _ = writeln!(
            out,
            "<line x1=\"{PAD}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n<line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{0}\" stroke=\"black\"/>",
            H - PAD,
            W - PAD
        );
        let _ = writeln!(
            out,
            "<text x=\"{PAD}\" y=\"{:.1}\" text-anchor=\"middle\">{:.3}</text><text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{:.3}</text>",
            H - PAD + 14.0,
            self.x.0,
            W - PAD,
            H - PAD + 14.0,
            self.x.1
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.3}</text><text x=\"{:.1}\" y=\"{PAD}\" text-anchor=\"end\">{:.3}</text>",
            PAD - 4.0,
            H - PAD,
            self.y.0,
            PAD - 4.0,
            self.y.1
        );
    }
}

/// Horizontal bars, one per label, top to bottom.
pub fn bar_svg(title: &str, labels: &[String], values: &[f64]) -> String {
    let mut out = svg_open(title);
    let left = 200.0;
    let (lo, hi) = extent(values.iter().copied().chain([0.0]));
    let scale = |v: f64| left + (v - lo) / (hi - lo) * (W - left - PAD);
    let n = labels.len().max(1) as f64;
    let band = (H - 2.0 * PAD) / n;
    for (i, (l, &v)) in labels.iter().zip(values).enumerate() {
        let y = PAD + i as f64 * band;
        let (a, b) = (scale(0.0).min(scale(v)), scale(0.0).max(scale(v)));
        let _ = writeln!(
            out,
            "<rect x=\"{a:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{}\"/><text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            y + band * 0.1,
            b - a,
            band * 0.8,
            if v >= 0.0 { "#d62728" } else { "#1f77b4" },
            left - 4.0,
            y + band * 0.6,
            xml_escape(l)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn line_svg(title: &str, xs: &[f64], ys: &[f64]) -> String {
    let mut out = svg_open(title);
    let f = Frame {
        x: extent(xs.iter().copied()),
        y: extent(ys.iter().copied()),
    };
    f.axes(&mut out);
    let pts: Vec<String> = xs.iter().zip(ys).map(|(&x, &y)| format!("{:.1},{:.1}", f.px(x), f.py(y))).collect();
    let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"{}\"/>", pts.join(" "));
    out.push_str("</svg>\n");
    out
}

/// Scatter plot; points are shaded by `colors` (rescaled to [0, 1]) when given.
pub fn scatter_svg(title: &str, xs: &[f64], ys: &[f64], colors: Option<&[f64]>) -> String {
    let mut out = svg_open(title);
    let f = Frame {
        x: extent(xs.iter().copied()),
        y: extent(ys.iter().copied()),
    };
    f.axes(&mut out);
    let c = colors.map(|c| (c, extent(c.iter().copied())));
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let fill = match c {
            Some((c, (lo, hi))) => {
                let t = ((c[i] - lo) / (hi - lo)).clamp(0.0, 1.0);
                format!("rgb({},{},{})", (30.0 + 200.0 * t) as u8, 60, (230.0 - 200.0 * t) as u8)
            }
            None => "#1f77b4".to_string(),
        };
        let _ = writeln!(out, "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"{fill}\"/>", f.px(x), f.py(y));
    }
    out.push_str("</svg>\n");
    out
}

/// Box plots of PFI iterations, one per feature in ranking order (top `max_features`).
pub fn pfi_box_svg(title: &str, g: &GlobalExplanation, max_features: usize) -> String {
    let mut out = svg_open(title);
    let Some(per) = g.per_iteration.as_ref() else {
        out.push_str("</svg>\n");
        return out;
    };
    let feats: Vec<usize> = g.top_k(max_features).to_vec();
    let (lo, hi) = extent(feats.iter().flat_map(|&j| per.iter().map(move |r| r[j])).chain([0.0]));
    let left = 200.0;
    let scale = |v: f64| left + (v - lo) / (hi - lo) * (W - left - PAD);
    let band = (H - 2.0 * PAD) / feats.len().max(1) as f64;
    for (i, &j) in feats.iter().enumerate() {
        let mut v: Vec<f64> = per.iter().map(|r| r[j]).collect();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
        let y = PAD + (i as f64 + 0.5) * band;
        let _ = writeln!(
            out,
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"black\"/>\
             <rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#aec7e8\" stroke=\"black\"/>\
             <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\" stroke-width=\"2\"/>\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            scale(q(0.0)),
            scale(q(1.0)),
            scale(q(0.25)),
            y - band * 0.3,
            (scale(q(0.75)) - scale(q(0.25))).max(1.0),
            band * 0.6,
            scale(q(0.5)),
            y - band * 0.3,
            scale(q(0.5)),
            y + band * 0.3,
            left - 4.0,
            y + 4.0,
            xml_escape(&g.feature_names[j])
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn global_svg(g: &GlobalExplanation, max_features: usize) -> String {
    let feats = g.top_k(max_features);
    let labels: Vec<String> = feats.iter().map(|&j| g.feature_names[j].clone()).collect();
    let values: Vec<f64> = feats.iter().map(|&j| g.scores[j]).collect();
    bar_svg(g.method.name(), &labels, &values)
}

pub fn ale_svg(c: &ALECurve) -> String {
    line_svg(&format!("ALE {}", c.feature_name), &c.edges, &c.effects)
}

pub fn dependence_svg(d: &DependenceData) -> String {
    let xs: Vec<f64> = d.points.iter().map(|p| p.value).collect();
    let ys: Vec<f64> = d.points.iter().map(|p| p.shap).collect();
    let cs: Option<Vec<f64>> = d.points.iter().map(|p| p.interaction_value).collect();
    let title = match &d.interaction_name {
        Some(n) => format!("SHAP dependence {} (color: {n})", d.feature_name),
        None => format!("SHAP dependence {}", d.feature_name),
    };
    scatter_svg(&title, &xs, &ys, cs.as_deref())
}

pub fn decision_path_svg(d: &DecisionPathData) -> String {
    let mut xs = vec![d.base_value];
    xs.extend(d.steps.iter().map(|s| s.cumulative));
    let ys: Vec<f64> = (0..xs.len()).map(|i| i as f64).collect();
    line_svg("decision path (log odds)", &xs, &ys)
}

pub fn lime_svg(e: &LimeExplanation) -> String {
    let labels: Vec<String> = e.top_features.iter().map(|f| f.name.clone()).collect();
    let values: Vec<f64> = e.top_features.iter().map(|f| f.coefficient).collect();
    bar_svg("LIME coefficients", &labels, &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explainers::GlobalMethod;

    #[test]
    fn csv_layouts() {
        let g = GlobalExplanation::new(
            GlobalMethod::Pfi,
            vec!["a".into(), "b,c".into()],
            vec![0.1, 0.3],
            Some(vec![vec![0.1, 0.2], vec![0.1, 0.4]]),
        );
        assert_eq!(global_scores_csv(&g), "rank,feature,score\n1,\"b,c\",0.300000\n2,a,0.100000\n");
        assert_eq!(pfi_iterations_csv(&g).unwrap().lines().count(), 5);
        let svg = pfi_box_svg("pfi", &g, 10);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}

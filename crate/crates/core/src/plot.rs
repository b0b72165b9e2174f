//! Timeline plots as plain SVG.

use std::fmt::Write as _;

use crate::trackpost::AxisStages;

/// One named series; `None` samples break the line.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

impl Trace {
    pub fn new(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        Trace {
            name: name.into(),
            values,
        }
    }
}

/// The four post-processing stages of one axis.
pub fn stage_traces(prefix: &str, stages: &AxisStages) -> Vec<Trace> {
    vec![
        Trace::new(format!("{prefix} L"), stages.raw.clone()),
        Trace::new(format!("{prefix} Lf"), stages.filled.clone()),
        Trace::new(format!("{prefix} Lpr"), stages.peaks_removed.clone()),
        Trace::new(format!("{prefix} Ls"), stages.smoothed.clone()),
    ]
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Frame index on the horizontal axis, value on the vertical axis.
pub fn render_timeline_plot(title: &str, y_label: &str, traces: &[Trace]) -> String {
    let n = traces.iter().map(|t| t.values.len()).max().unwrap_or(0);
    let present = || traces.iter().flat_map(|t| t.values.iter().flatten().copied());
    let (mut lo, mut hi) = present().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        lo -= 1.0;
        hi += 1.0;
    }
    let x_max = n.saturating_sub(1).max(1) as f64;
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let sx = |i: usize| MARGIN + pw * i as f64 / x_max;
    let sy = |v: f64| MARGIN + ph * (1.0 - (v - lo) / (hi - lo));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<g id="axes" stroke="black"><line x1="{MARGIN}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{b}"/></g>"#,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">frame</text>"#,
        WIDTH / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 15 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (v, y) in [(lo, HEIGHT - MARGIN), (hi, MARGIN)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y:.2}" text-anchor="end" font-size="10">{v:.2}</text>"#,
            MARGIN - 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end" font-size="10">{}</text>"#,
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 14.0,
        n.saturating_sub(1)
    );

    for (k, t) in traces.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let _ = writeln!(
            s,
            r#"<g class="trace" data-name="{}" stroke="{color}" fill="none">"#,
            escape(&t.name)
        );
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, s: &mut String| {
            if !run.is_empty() {
                let _ = writeln!(s, r#"<polyline points="{}"/>"#, run.join(" "));
                run.clear();
            }
        };
        for (i, v) in t.values.iter().enumerate() {
            match v {
                Some(v) => run.push(format!("{:.2},{:.2}", sx(i), sy(*v))),
                None => flush(&mut run, &mut s),
            }
        }
        flush(&mut run, &mut s);
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="10" fill="{color}">{}</text>"#,
            WIDTH - MARGIN + 4.0,
            MARGIN + 12.0 * k as f64,
            escape(&t.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

//! Minimal SVG heatmap and line-plot renderers.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 110.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 60.0;

// viridis at five stops
const STOPS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let pos = t * (STOPS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axis_labels(out: &mut String, x_label: &str, y_label: &str) {
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let cy = MARGIN_T + plot_h / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="20" y="{cy}" text-anchor="middle" transform="rotate(-90 20 {cy})">{}</text>"#,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// `values[iy][ix]` drawn as a grid of cells in index space, `ys[0]` at the bottom.
pub fn heatmap(title: &str, xs: &[f64], ys: &[f64], values: &[Vec<f64>], x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let finite = values.iter().flatten().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (nx, ny) = (xs.len().max(1), ys.len().max(1));
    let (cw, ch) = (plot_w / nx as f64, plot_h / ny as f64);

    for (iy, row) in values.iter().enumerate() {
        for (ix, v) in row.iter().enumerate() {
            let x = MARGIN_L + ix as f64 * cw;
            let y = MARGIN_T + plot_h - (iy + 1) as f64 * ch;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{}</title></rect>"#,
                cw + 0.3,
                ch + 0.3,
                color((v - lo) / span),
                tick(*v)
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let picks = |n: usize| -> Vec<usize> {
        let mut v = vec![0, n / 2, n.saturating_sub(1)];
        v.dedup();
        v
    };
    for ix in picks(xs.len()) {
        if let Some(x) = xs.get(ix) {
            let px = MARGIN_L + (ix as f64 + 0.5) * cw;
            let _ = writeln!(
                out,
                r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
                MARGIN_T + plot_h + 18.0,
                tick(*x)
            );
        }
    }
    for iy in picks(ys.len()) {
        if let Some(y) = ys.get(iy) {
            let py = MARGIN_T + plot_h - (iy as f64 + 0.5) * ch;
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN_L - 6.0,
                py + 4.0,
                tick(*y)
            );
        }
    }
    // color bar
    let bx = WIDTH - MARGIN_R + 25.0;
    let steps = 40;
    for i in 0..steps {
        let t = i as f64 / (steps - 1) as f64;
        let y = MARGIN_T + plot_h * (1.0 - (i + 1) as f64 / steps as f64);
        let _ = writeln!(
            out,
            r#"<rect x="{bx}" y="{y:.2}" width="18" height="{:.2}" fill="{}"/>"#,
            plot_h / steps as f64 + 0.3,
            color(t)
        );
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, bx + 22.0, MARGIN_T + 10.0, tick(hi));
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, bx + 22.0, MARGIN_T + plot_h, tick(lo));
    axis_labels(&mut out, x_label, y_label);
    out.push_str("</svg>\n");
    out
}

/// Polyline with point markers on linear axes.
pub fn line_plot(title: &str, xs: &[f64], ys: &[f64], x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R + 60.0;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let range = |v: &[f64]| {
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi > lo {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = range(xs);
    let (y0, y1) = range(ys);
    let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| MARGIN_T + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let yv = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN_L}" x2="{}" y1="{:.2}" y2="{:.2}" stroke="#ddd"/>"##,
            MARGIN_L + plot_w,
            py(yv),
            py(yv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            py(yv) + 4.0,
            tick(yv)
        );
    }
    for &x in xs {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            px(x),
            MARGIN_T + plot_h + 18.0,
            tick(x)
        );
    }
    let points: Vec<String> = xs.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        points.join(" ")
    );
    for (&x, &y) in xs.iter().zip(ys) {
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#1f77b4"><title>{}, {}</title></circle>"##,
            px(x),
            py(y),
            tick(x),
            tick(y)
        );
    }
    axis_labels(&mut out, x_label, y_label);
    out.push_str("</svg>\n");
    out
}

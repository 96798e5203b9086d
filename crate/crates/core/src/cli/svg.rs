//! Minimal SVG line plot: frame, ticks with labels, one polyline.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

fn range(v: &[f64]) -> (f64, f64) {
    let (lo, hi) = v
        .iter()
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(*x), b.max(*x))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e5) {
        format!("{v:.2e}")
    } else {
        crate::num::fmt_sig(v, 4)
    }
}

pub fn line_plot(x: &[f64], y: &[f64], title: &str, xlabel: &str, ylabel: &str) -> String {
    let (x0, x1) = range(x);
    let (y0, y1) = range(y);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| TOP + ph - (v - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for k in 0..TICKS {
        let t = k as f64 / (TICKS - 1) as f64;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 6.0,
            TOP + ph + 20.0,
            label(xv)
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            LEFT - 8.0,
            py + 4.0,
            label(yv)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{xlabel}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.2})">{ylabel}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-size="15" text-anchor="middle">{title}</text>"#,
        WIDTH / 2.0
    )
    .unwrap();
    s.push_str(r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points=""#);
    for (i, (xv, yv)) in x.iter().zip(y).enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{:.2},{:.2}", sx(*xv), sy(*yv)).unwrap();
    }
    s.push_str("\"/>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_structure() {
        let x = [0.0, 1.0, 2.0];
        let y = [0.0, 1.0, 0.0];
        let s = line_plot(&x, &y, "t", "x", "y");
        assert!(s.starts_with("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
        assert!(s.contains("<polyline"));
        assert!(s.contains(&format!("{:.2},{:.2}", LEFT, TOP + HEIGHT - TOP - BOTTOM)));
        assert_eq!(s.matches("<text").count(), 2 * TICKS + 3);
    }

    #[test]
    fn flat_data_does_not_divide_by_zero() {
        let s = line_plot(&[0.0, 1.0], &[2.0, 2.0], "", "", "");
        assert!(!s.contains("NaN"));
    }
}

//! Minimal static line chart, fixed 800x500 viewport. Data display only.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 55.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
    pub color: &'a str,
}

/// Render one or more series against their sample index.
pub fn line_chart(title: &str, y_label: &str, series: &[Series]) -> String {
    let finite = |v: &f64| v.is_finite();
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let y_min = series
        .iter()
        .flat_map(|s| s.values.iter().filter(|v| finite(v)))
        .fold(f64::INFINITY, |a, &b| a.min(b));
    let y_max = series
        .iter()
        .flat_map(|s| s.values.iter().filter(|v| finite(v)))
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let (y_min, y_max) = if y_min.is_finite() && y_max.is_finite() && y_min < y_max {
        (y_min, y_max)
    } else {
        (0.0, 1.0)
    };
    let x_of = |t: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * t as f64 / (n.max(2) - 1) as f64;
    let y_of = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - y_min) / (y_max - y_min);

    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{title}</text>
<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{}" stroke="black"/>
<line x1="{MARGIN}" y1="{}" x2="{}" y2="{}" stroke="black"/>
<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle" font-family="sans-serif" font-size="12">{y_label}</text>
<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">t (samples)</text>
<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{y_max:.3}</text>
<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{y_min:.3}</text>
"#,
        WIDTH / 2.0,
        HEIGHT - MARGIN,
        HEIGHT - MARGIN,
        WIDTH - MARGIN,
        HEIGHT - MARGIN,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        MARGIN - 6.0,
        MARGIN + 5.0,
        MARGIN - 6.0,
        HEIGHT - MARGIN,
    );
    for s in series {
        let mut path = String::new();
        let mut pen_down = false;
        for (t, &v) in s.values.iter().enumerate() {
            if v.is_finite() {
                let cmd = if pen_down { 'L' } else { 'M' };
                path.push_str(&format!("{cmd}{:.2} {:.2} ", x_of(t), y_of(v)));
                pen_down = true;
            } else {
                pen_down = false;
            }
        }
        svg.push_str(&format!(
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.2"/>
"#,
            path.trim_end(),
            s.color
        ));
    }
    let mut ly = MARGIN + 14.0;
    for s in series {
        svg.push_str(&format!(
            r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="12" fill="{}">{}</text>
"#,
            WIDTH - MARGIN - 140.0,
            s.color,
            s.label
        ));
        ly += 16.0;
    }
    svg.push_str("</svg>\n");
    svg
}

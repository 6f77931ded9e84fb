//! Minimal SVG line plots of `P^K_m` and normalized dist² against `m`.
//! Output depends only on the summary, so files are byte-stable.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{SimError, SimResult};
use crate::experiment::PanelSummary;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Panels sharing a manifold and prior variance, one figure each.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure<'a> {
    pub n: usize,
    pub k: usize,
    pub sigma0_2: f64,
    pub series: Vec<&'a PanelSummary>,
}

pub fn group_figures(panels: &[PanelSummary]) -> Vec<Figure<'_>> {
    let mut figs: Vec<Figure> = Vec::new();
    for p in panels {
        match figs
            .iter_mut()
            .find(|f| f.n == p.n && f.k == p.k && f.sigma0_2 == p.sigma0_2)
        {
            Some(f) => f.series.push(p),
            None => figs.push(Figure {
                n: p.n,
                k: p.k,
                sigma0_2: p.sigma0_2,
                series: vec![p],
            }),
        }
    }
    figs
}

struct Axes {
    x_max: f64,
    lo_dec: i32,
    hi_dec: i32,
}

impl Axes {
    fn x(&self, step: f64) -> f64 {
        let span = (self.x_max - 1.0).max(1.0);
        LEFT + (step - 1.0) / span * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let t = (v.log10() - self.lo_dec as f64) / (self.hi_dec - self.lo_dec) as f64;
        HEIGHT - BOTTOM - t * (HEIGHT - TOP - BOTTOM)
    }
}

fn positive(v: Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite() && *x > 0.0)
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, dashed: bool) {
    if pts.is_empty() {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let dash = if dashed { " stroke-dasharray=\"6,4\"" } else { "" };
    let _ = writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>",
        coords.join(" ")
    );
}

/// Renders one figure. Returns `None` when there is nothing positive to draw.
pub fn render_svg(fig: &Figure, title: &str) -> Option<String> {
    let values: Vec<f64> = fig
        .series
        .iter()
        .flat_map(|p| p.rows.iter())
        .flat_map(|r| [r.pk_median, r.dist2_median, r.dist2_q1, r.dist2_q3])
        .filter_map(positive)
        .collect();
    if values.is_empty() {
        return None;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo_dec = lo.log10().floor() as i32;
    let hi_dec = (hi.log10().ceil() as i32).max(lo_dec + 1);
    let x_max = fig
        .series
        .iter()
        .flat_map(|p| p.rows.iter().map(|r| r.step))
        .max()
        .unwrap_or(1) as f64;
    let ax = Axes { x_max, lo_dec, hi_dec };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-size=\"13\">{title}</text>",
        (LEFT + WIDTH - RIGHT) / 2.0
    );
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        "<rect x=\"{x0:.2}\" y=\"{y1:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        x1 - x0,
        y0 - y1
    );
    for d in lo_dec..=hi_dec {
        let y = ax.y(10f64.powi(d));
        let _ = writeln!(
            out,
            "<line x1=\"{x0:.2}\" y1=\"{y:.2}\" x2=\"{x1:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>"
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">1e{d}</text>",
            x0 - 6.0,
            y + 4.0
        );
    }
    let ticks = 5;
    for i in 0..=ticks {
        let step = (1.0 + (x_max - 1.0) * i as f64 / ticks as f64).round();
        let x = ax.x(step);
        let _ = writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            y0 + 4.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{step}</text>",
            y0 + 17.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">m</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );

    for (i, p) in fig.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let band: Vec<(f64, f64, f64)> = p
            .rows
            .iter()
            .filter_map(|r| Some((r.step as f64, positive(r.dist2_q1)?, positive(r.dist2_q3)?)))
            .collect();
        if !band.is_empty() {
            let mut pts: Vec<String> = band
                .iter()
                .map(|&(s, _, q3)| format!("{:.2},{:.2}", ax.x(s), ax.y(q3)))
                .collect();
            pts.extend(
                band.iter()
                    .rev()
                    .map(|&(s, q1, _)| format!("{:.2},{:.2}", ax.x(s), ax.y(q1))),
            );
            let _ = writeln!(
                out,
                "<polygon fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\" points=\"{}\"/>",
                pts.join(" ")
            );
        }
        let line = |f: fn(&crate::experiment::SummaryRow) -> Option<f64>| -> Vec<(f64, f64)> {
            p.rows
                .iter()
                .filter_map(|r| positive(f(r)).map(|v| (ax.x(r.step as f64), ax.y(v))))
                .collect()
        };
        polyline(&mut out, &line(|r| r.pk_median), color, true);
        polyline(&mut out, &line(|r| r.dist2_median), color, false);

        let ly = TOP + 12.0 + 36.0 * i as f64;
        let lx = WIDTH - RIGHT + 14.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>",
            lx + 24.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\">P^K, xi2 = {}</text>",
            lx + 30.0,
            ly + 4.0,
            p.xi2
        );
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            ly + 16.0,
            lx + 24.0,
            ly + 16.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\">dist2/dim, xi2 = {}</text>",
            lx + 30.0,
            ly + 20.0,
            p.xi2
        );
    }
    out.push_str("</svg>\n");
    Some(out)
}

pub fn figure_file_name(prefix: &str, fig: &Figure) -> String {
    format!("{prefix}_st{}_{}_s{}.svg", fig.n, fig.k, fig.sigma0_2)
}

/// Writes one SVG per (manifold, σ₀²) panel into `dir`.
pub fn emit_plots(panels: &[PanelSummary], dir: &Path, prefix: &str) -> SimResult<Vec<PathBuf>> {
    let figs = group_figures(panels);
    let rendered: Vec<(String, String)> = figs
        .iter()
        .filter_map(|f| {
            let title = format!("St({},{}), sigma0^2 = {}", f.n, f.k, f.sigma0_2);
            render_svg(f, &title).map(|svg| (figure_file_name(prefix, f), svg))
        })
        .collect();
    if rendered.is_empty() {
        return Err(SimError::Runtime {
            context: "plot".into(),
            message: "summary contains no plottable values".into(),
        });
    }
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let mut paths = Vec::with_capacity(rendered.len());
    for (name, svg) in rendered {
        let path = dir.join(name);
        fs::write(&path, svg).map_err(|e| SimError::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::SummaryRow;

    fn panel(sigma0_2: f64, xi2: f64) -> PanelSummary {
        let rows = (1..=4)
            .map(|m| SummaryRow {
                step: m,
                count: 1,
                pk_median: Some(0.5 / m as f64),
                dist2_median: Some(0.4 / m as f64),
                dist2_q1: Some(0.3 / m as f64),
                dist2_q3: Some(0.6 / m as f64),
                gain_median: Some(0.5),
            })
            .collect();
        PanelSummary { n: 4, k: 2, sigma0_2, xi2, rows }
    }

    #[test]
    fn figures_group_by_prior_variance() {
        let panels: Vec<_> = [1.0, 0.5, 0.1]
            .iter()
            .flat_map(|&s| [panel(s, 0.1), panel(s, 0.5)])
            .collect();
        let figs = group_figures(&panels);
        assert_eq!(figs.len(), 3);
        assert!(figs.iter().all(|f| f.series.len() == 2));
    }

    #[test]
    fn empty_summary_is_an_error() {
        let dir = std::env::temp_dir().join("simcli-plot-empty");
        assert!(emit_plots(&[], &dir, "x").is_err());
        let mut p = panel(1.0, 0.1);
        for r in &mut p.rows {
            *r = SummaryRow { step: r.step, count: 0, pk_median: None, dist2_median: None, dist2_q1: None, dist2_q3: None, gain_median: None };
        }
        assert!(emit_plots(&[p], &dir, "x").is_err());
    }

    #[test]
    fn svg_has_both_series_and_legend() {
        let panels = [panel(0.5, 0.1), panel(0.5, 0.5)];
        let figs = group_figures(&panels);
        let svg = render_svg(&figs[0], "t").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert_eq!(svg.matches("stroke-dasharray").count(), 4);
        assert!(svg.contains("xi2 = 0.5"));
        assert_eq!(render_svg(&figs[0], "t").unwrap(), svg);
    }
}

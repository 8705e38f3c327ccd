//! Report emission: machine-readable tables.csv, an aligned human-readable
//! tables.txt, curve.csv, and a deterministic curve.svg line chart. Every
//! file is a pure function of the analysis results, so re-running a report
//! reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use overlap_core::analysis::{OverlapCurve, PartitionReport};

use crate::jsonl::write_text_atomic;
use crate::CliError;

/// Write the full report set into `out_dir`: tables.csv, tables.txt,
/// curve.csv, curve.svg.
pub fn emit_report(
    reports: &[PartitionReport],
    curve: &OverlapCurve,
    out_dir: &Path,
) -> Result<(), CliError> {
    write_tables(reports, out_dir)?;
    write_curve(curve, out_dir)
}

/// Write tables.csv and tables.txt into `out_dir`.
pub fn write_tables(reports: &[PartitionReport], out_dir: &Path) -> Result<(), CliError> {
    write_text_atomic(&out_dir.join("tables.csv"), &render_tables_csv(reports))?;
    write_text_atomic(&out_dir.join("tables.txt"), &render_tables_txt(reports))
}

/// Write curve.csv and curve.svg into `out_dir`.
pub fn write_curve(curve: &OverlapCurve, out_dir: &Path) -> Result<(), CliError> {
    write_text_atomic(&out_dir.join("curve.csv"), &render_curve_csv(curve))?;
    write_text_atomic(&out_dir.join("curve.svg"), &render_curve_svg(curve))
}

fn opt_csv(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per (model, cutoff), full-precision floats, empty cells where a
/// value does not exist (empty subset or degenerate table).
pub fn render_tables_csv(reports: &[PartitionReport]) -> String {
    let mut text = String::from(
        "model,cutoff,overlap_size,nonoverlap_size,overlap_accuracy,nonoverlap_accuracy,\
         overall_accuracy,accuracy_difference,chi_squared,p_value,significant\n",
    );
    for r in reports {
        let significant = match r.significant {
            Some(true) => "true",
            Some(false) => "false",
            None => "",
        };
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.model_name,
            r.cutoff,
            r.overlap_size,
            r.nonoverlap_size,
            opt_csv(r.overlap_acc),
            opt_csv(r.nonoverlap_acc),
            r.overall_acc,
            opt_csv(r.perf_diff),
            opt_csv(r.chi2),
            opt_csv(r.p_value),
            significant,
        );
    }
    text
}

fn cell(value: Option<f64>, width: usize, precision: usize, signed: bool) -> String {
    match value {
        Some(v) if signed => format!("{v:>+width$.precision$}"),
        Some(v) => format!("{v:>width$.precision$}"),
        None => format!("{:>width$}", "-"),
    }
}

/// Aligned fixed-precision table: one row per (model, cutoff).
pub fn render_tables_txt(reports: &[PartitionReport]) -> String {
    let model_width = reports
        .iter()
        .map(|r| r.model_name.len())
        .chain(std::iter::once(5))
        .max()
        .unwrap_or(5);
    let mut text =
        format!(
        "{:<model_width$}  {:>7}  {:>7}  {:>9}  {:>7}  {:>9}  {:>9}  {:>9}  {:>8}  {:>8}  {:>4}\n",
        "model", "cutoff", "n_over", "acc_over", "n_non", "acc_non", "acc_all", "diff", "chi2",
        "p", "sig",
    );
    for r in reports {
        let sig = match r.significant {
            Some(true) => "yes",
            Some(false) => "no",
            None => "-",
        };
        let _ = writeln!(
            text,
            "{:<model_width$}  {:>7.2}  {:>7}  {}  {:>7}  {}  {}  {}  {}  {}  {:>4}",
            r.model_name,
            r.cutoff,
            r.overlap_size,
            cell(r.overlap_acc, 9, 4, false),
            r.nonoverlap_size,
            cell(r.nonoverlap_acc, 9, 4, false),
            cell(Some(r.overall_acc), 9, 4, false),
            cell(r.perf_diff, 9, 4, true),
            cell(r.chi2, 8, 3, false),
            cell(r.p_value, 8, 4, false),
            sig,
        );
    }
    text
}

/// Two columns: the cutoff and the percentage of instances whose score
/// strictly exceeds it.
pub fn render_curve_csv(curve: &OverlapCurve) -> String {
    let mut text = String::from("cutoff,overlap_percent\n");
    for &(cutoff, proportion) in &curve.points {
        let _ = writeln!(text, "{},{}", cutoff, proportion * 100.0);
    }
    text
}

// Fixed SVG canvas; the plot rectangle leaves room for axis labels.
const SVG_W: f64 = 800.0;
const SVG_H: f64 = 500.0;
const PLOT_L: f64 = 80.0;
const PLOT_R: f64 = 760.0;
const PLOT_T: f64 = 50.0;
const PLOT_B: f64 = 430.0;

/// Deterministic line chart of the overlap curve: fixed 800x500 canvas,
/// x axis "cutoff", y axis "% overlap" spanning 0..100. A single point
/// renders as one marker without a line.
pub fn render_curve_svg(curve: &OverlapCurve) -> String {
    assert!(
        !curve.points.is_empty(),
        "curve must have at least one point"
    );
    let (mut x_min, mut x_max) = (curve.points[0].0, curve.points[curve.points.len() - 1].0);
    if x_max <= x_min {
        // Degenerate (single-point) domain: pad so coordinates stay finite.
        x_min -= 0.5;
        x_max += 0.5;
    }
    let x_of = |c: f64| PLOT_L + (c - x_min) / (x_max - x_min) * (PLOT_R - PLOT_L);
    let y_of = |pct: f64| PLOT_B - pct / 100.0 * (PLOT_B - PLOT_T);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">"#
    );
    let _ = writeln!(
        svg,
        r##"<rect width="{SVG_W}" height="{SVG_H}" fill="#ffffff"/>"##
    );

    // Horizontal gridlines and y tick labels at fixed percentages.
    for pct in [0.0, 25.0, 50.0, 75.0, 100.0] {
        let y = y_of(pct);
        let _ = writeln!(
            svg,
            r##"<line x1="{PLOT_L}" y1="{y:.2}" x2="{PLOT_R}" y2="{y:.2}" stroke="#dddddd" stroke-width="1"/>"##
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="end" fill="#333333">{pct:.0}</text>"##,
            PLOT_L - 8.0,
            y + 4.0,
        );
    }
    // Five evenly spaced x ticks across the domain.
    for i in 0..5 {
        let c = x_min + (x_max - x_min) * f64::from(i) / 4.0;
        let x = x_of(c);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{PLOT_B}" x2="{x:.2}" y2="{:.2}" stroke="#333333" stroke-width="1"/>"##,
            PLOT_B + 6.0,
        );
        let _ = writeln!(
            svg,
            r##"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" fill="#333333">{c:.1}</text>"##,
            PLOT_B + 22.0,
        );
    }
    // Axes.
    let _ = writeln!(
        svg,
        r##"<line x1="{PLOT_L}" y1="{PLOT_T}" x2="{PLOT_L}" y2="{PLOT_B}" stroke="#333333" stroke-width="1.5"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{PLOT_L}" y1="{PLOT_B}" x2="{PLOT_R}" y2="{PLOT_B}" stroke="#333333" stroke-width="1.5"/>"##
    );
    // Axis labels.
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="15" text-anchor="middle" fill="#111111">cutoff</text>"##,
        (PLOT_L + PLOT_R) / 2.0,
        PLOT_B + 52.0,
    );
    let _ = writeln!(
        svg,
        r##"<text x="24" y="{mid:.2}" font-family="sans-serif" font-size="15" text-anchor="middle" fill="#111111" transform="rotate(-90 24 {mid:.2})">% overlap</text>"##,
        mid = (PLOT_T + PLOT_B) / 2.0,
    );
    // The curve itself: a polyline when there are at least two points,
    // always a marker per point.
    if curve.points.len() >= 2 {
        let mut coords = String::new();
        for &(c, p) in &curve.points {
            let _ = write!(coords, "{:.2},{:.2} ", x_of(c), y_of(p * 100.0));
        }
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#336699" stroke-width="2"/>"##,
            coords.trim_end(),
        );
    }
    for &(c, p) in &curve.points {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="#336699"/>"##,
            x_of(c),
            y_of(p * 100.0),
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(model: &str, cutoff: f64) -> PartitionReport {
        PartitionReport {
            model_name: model.to_string(),
            cutoff,
            overlap_size: 40,
            nonoverlap_size: 40,
            overlap_acc: Some(0.75),
            nonoverlap_acc: Some(0.5),
            overall_acc: 0.625,
            perf_diff: Some(0.25),
            chi2: Some(5.333_333_333_333_333),
            p_value: Some(0.020_921),
            significant: Some(true),
        }
    }

    #[test]
    fn csv_has_one_data_row_per_report() {
        let reports = vec![
            report("a", 0.0),
            report("a", 25.0),
            report("b", 0.0),
            report("b", 25.0),
        ];
        let csv = render_tables_csv(&reports);
        assert_eq!(csv.lines().count(), 5, "header plus four rows");
        assert!(csv.lines().nth(1).expect("row").starts_with("a,0,40,40,"));
    }

    #[test]
    fn missing_values_render_as_empty_csv_cells_and_dash_text() {
        let mut r = report("m", 35.0);
        r.overlap_acc = None;
        r.perf_diff = None;
        r.chi2 = None;
        r.p_value = None;
        r.significant = None;
        let csv = render_tables_csv(&[r.clone()]);
        let row = csv.lines().nth(1).expect("row");
        assert_eq!(row, "m,35,40,40,,0.5,0.625,,,,");
        let txt = render_tables_txt(&[r]);
        let body = txt.lines().nth(1).expect("row");
        assert!(
            body.contains(" - "),
            "missing cells render as dashes: {body}"
        );
        assert!(
            body.trim_end().ends_with('-'),
            "missing significance renders as dash"
        );
    }

    #[test]
    fn text_table_columns_stay_aligned() {
        let txt = render_tables_txt(&[report("longmodelname", 0.0), report("b", 25.0)]);
        let lines: Vec<&str> = txt.lines().collect();
        assert_eq!(lines.len(), 3);
        let widths: Vec<usize> = lines.iter().map(|l| l.chars().count()).collect();
        assert_eq!(widths[0], widths[1], "header and rows share one width");
        assert_eq!(widths[1], widths[2]);
    }

    #[test]
    fn curve_csv_reports_percentages() {
        let curve = OverlapCurve {
            points: vec![(0.0, 0.5), (10.0, 0.25)],
        };
        let csv = render_curve_csv(&curve);
        assert_eq!(csv, "cutoff,overlap_percent\n0,50\n10,25\n");
    }

    #[test]
    fn single_point_curve_yields_valid_svg_with_one_marker() {
        let curve = OverlapCurve {
            points: vec![(35.0, 0.2)],
        };
        let svg = render_curve_svg(&curve);
        assert!(svg.starts_with("<svg "), "root element present");
        assert!(svg.trim_end().ends_with("</svg>"), "closed root element");
        assert_eq!(svg.matches("<circle").count(), 1, "exactly one marker");
        assert_eq!(svg.matches("<polyline").count(), 0, "no line for one point");
        assert!(svg.contains(">cutoff</text>"), "x axis labeled");
        assert!(svg.contains(">% overlap</text>"), "y axis labeled");
    }

    #[test]
    fn svg_rendering_is_deterministic() {
        let curve = OverlapCurve {
            points: vec![(0.0, 1.0), (20.0, 0.3), (40.0, 0.0)],
        };
        assert_eq!(render_curve_svg(&curve), render_curve_svg(&curve));
        assert_eq!(render_curve_svg(&curve).matches("<circle").count(), 3);
        assert_eq!(render_curve_svg(&curve).matches("<polyline").count(), 1);
    }
}

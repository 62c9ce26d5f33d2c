//! SVG emission: per-step projection curves for every vocabulary label
//! plus an emitted-token track.

use std::fs;
use std::path::Path;

use crate::attention::Trajectory;
use crate::{Error, Result};

use super::format::{canonical9, format_sig};

/// The data a plot is drawn from: one projection series per label over
/// the record positions, plus the emitted labels. Values are canonicalized
/// to the 9-significant-digit export representation so a plot built from
/// a live trajectory and one rebuilt from its exported table are
/// identical.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub positions: Vec<usize>,
    pub labels: Vec<String>,
    pub series: Vec<Vec<f64>>,
    pub emitted: Vec<String>,
}

impl PlotData {
    pub fn from_trajectory(trajectory: &Trajectory) -> Result<Self> {
        let first = trajectory
            .records
            .first()
            .ok_or_else(|| Error::Validation("trajectory has no records".into()))?;
        let labels: Vec<String> = first
            .projections_onto
            .iter()
            .map(|(l, _)| l.clone())
            .collect();
        let mut series = vec![Vec::with_capacity(trajectory.records.len()); labels.len()];
        let mut positions = Vec::with_capacity(trajectory.records.len());
        let mut emitted = Vec::with_capacity(trajectory.records.len());
        for record in &trajectory.records {
            positions.push(record.position);
            emitted.push(record.emitted.clone());
            for (slot, (_, p)) in series.iter_mut().zip(&record.projections_onto) {
                slot.push(canonical9(*p));
            }
        }
        Ok(PlotData {
            positions,
            labels,
            series,
            emitted,
        })
    }

    /// Rebuilds plot data from an exported trajectory table.
    pub fn from_trajectory_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Validation("empty trajectory table".into()))?;
        let columns: Vec<&str> = header.split(',').collect();
        let proj_cols: Vec<(usize, String)> = columns
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.strip_prefix("proj_").map(|l| (i, l.to_string())))
            .collect();
        let pos_col = columns
            .iter()
            .position(|&c| c == "position")
            .ok_or_else(|| Error::Validation("missing position column".into()))?;
        let emitted_col = columns
            .iter()
            .position(|&c| c == "emitted")
            .ok_or_else(|| Error::Validation("missing emitted column".into()))?;

        let labels: Vec<String> = proj_cols.iter().map(|(_, l)| l.clone()).collect();
        let mut series = vec![Vec::new(); labels.len()];
        let mut positions = Vec::new();
        let mut emitted = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| Error::Validation(format!(
                    "bad number `{s}` on data line {}",
                    lineno + 1
                )))
            };
            positions.push(parse(fields[pos_col])? as usize);
            emitted.push(fields[emitted_col].to_string());
            for (slot, (col, _)) in series.iter_mut().zip(&proj_cols) {
                slot.push(parse(fields[*col])?);
            }
        }
        if positions.is_empty() {
            return Err(Error::Validation("trajectory table has no rows".into()));
        }
        Ok(PlotData {
            positions,
            labels,
            series,
            emitted,
        })
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 90.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn fmt_coord(x: f64) -> String {
    format!("{x:.2}")
}

/// Renders the plot as an SVG document. Each marker carries the exported
/// data value in a `data-value` attribute.
pub fn render_svg(data: &PlotData) -> String {
    let x_min = *data.positions.first().expect("nonempty") as f64;
    let x_max = *data.positions.last().expect("nonempty") as f64;
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for series in &data.series {
        for &v in series {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    if !y_min.is_finite() {
        y_min = 0.0;
        y_max = 1.0;
    }
    if y_max - y_min < 1e-12 {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |p: f64| MARGIN_LEFT + (p - x_min) / x_span * plot_w;
    let sy = |v: f64| MARGIN_TOP + (y_max - v) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP),
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP + plot_h)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP + plot_h),
        fmt_coord(MARGIN_LEFT + plot_w),
        fmt_coord(MARGIN_TOP + plot_h)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
        fmt_coord(MARGIN_LEFT - 6.0),
        fmt_coord(sy(y_max - pad) + 4.0),
        format_sig(y_max - pad, 9)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
        fmt_coord(MARGIN_LEFT - 6.0),
        fmt_coord(sy(y_min + pad) + 4.0),
        format_sig(y_min + pad, 9)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">token position</text>\n",
        fmt_coord(MARGIN_LEFT + plot_w / 2.0),
        fmt_coord(HEIGHT - 10.0)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {})\">projection onto context</text>\n",
        fmt_coord(MARGIN_TOP + plot_h / 2.0),
        fmt_coord(MARGIN_TOP + plot_h / 2.0)
    ));

    // projection curves
    for (idx, (label, series)) in data.labels.iter().zip(&data.series).enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if series.len() > 1 {
            let points: Vec<String> = data
                .positions
                .iter()
                .zip(series)
                .map(|(&p, &v)| format!("{},{}", fmt_coord(sx(p as f64)), fmt_coord(sy(v))))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                points.join(" ")
            ));
        }
        for (&p, &v) in data.positions.iter().zip(series) {
            svg.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\" data-label=\"{label}\" \
                 data-position=\"{p}\" data-value=\"{}\"/>\n",
                fmt_coord(sx(p as f64)),
                fmt_coord(sy(v)),
                format_sig(v, 9)
            ));
        }
        // legend entry
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"13\" fill=\"{color}\">{label}</text>\n",
            fmt_coord(MARGIN_LEFT + plot_w - 40.0),
            fmt_coord(MARGIN_TOP + 16.0 * (idx as f64 + 1.0))
        ));
    }

    // emitted-token track
    let track_y = MARGIN_TOP + plot_h + 30.0;
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">emitted:</text>\n",
        fmt_coord(MARGIN_LEFT - 6.0),
        fmt_coord(track_y)
    ));
    for (&p, label) in data.positions.iter().zip(&data.emitted) {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" \
             data-position=\"{p}\">{label}</text>\n",
            fmt_coord(sx(p as f64)),
            fmt_coord(track_y)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

/// Emits an SVG plot of a trajectory.
pub fn emit_plot(trajectory: &Trajectory, path: &Path) -> Result<()> {
    let data = PlotData::from_trajectory(trajectory)?;
    fs::write(path, render_svg(&data))?;
    Ok(())
}

/// Emits an SVG plot from a previously exported trajectory table.
pub fn emit_plot_from_csv(table_path: &Path, out_path: &Path) -> Result<()> {
    let text = fs::read_to_string(table_path)?;
    let data = PlotData::from_trajectory_csv(&text)?;
    fs::write(out_path, render_svg(&data))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attention::{run_trajectory, ModelConfig};
    use crate::io::render_trajectory_csv;
    use crate::scenario::paper_scenario;

    #[test]
    fn plot_contains_all_label_series() {
        let trajectory = paper_scenario().run().unwrap();
        let svg = render_svg(&PlotData::from_trajectory(&trajectory).unwrap());
        for label in ["A", "B", "C", "D"] {
            assert!(svg.contains(&format!("data-label=\"{label}\"")));
        }
        assert_eq!(svg.matches("<polyline").count(), 4);
        // step 4 value is embedded exactly as exported
        assert!(svg.contains("data-value=\"0.477223"), "{svg}");
    }

    #[test]
    fn single_step_trajectory_plots_without_lines() {
        let scenario = paper_scenario();
        let config = ModelConfig::new(1.0, 1).unwrap();
        let trajectory =
            run_trajectory(&scenario.prompt, &scenario.vocab, &config).unwrap();
        let svg = render_svg(&PlotData::from_trajectory(&trajectory).unwrap());
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert_eq!(svg.matches("<circle").count(), 4);
    }

    #[test]
    fn plot_from_csv_equals_plot_from_trajectory() {
        let trajectory = paper_scenario().run().unwrap();
        let live = render_svg(&PlotData::from_trajectory(&trajectory).unwrap());
        let csv = render_trajectory_csv(&trajectory);
        let rebuilt = render_svg(&PlotData::from_trajectory_csv(&csv).unwrap());
        assert_eq!(live, rebuilt);
    }

    #[test]
    fn empty_trajectory_is_rejected() {
        let trajectory = crate::attention::Trajectory {
            prompt: vec!["A".into()],
            records: vec![],
            terminated_by: crate::attention::Termination::StepLimit,
        };
        assert!(PlotData::from_trajectory(&trajectory).is_err());
    }
}

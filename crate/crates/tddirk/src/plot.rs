//! File emission: CSV, binary PPM rasters, and SVG (contour outlines and
//! log-log line charts). CSV is the authoritative data artifact; the images
//! are visual companions.
//!
//! All writers go through [`write_atomic`]: content is written to a `.tmp`
//! sibling and renamed into place, so a failed run never leaves a partial
//! file behind.

use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::StabilityGrid;
use crate::error::{Error, Result};

/// Writes `bytes` to `path` via a temporary sibling file and an atomic
/// rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let display = path.display().to_string();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(&display, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp_path, bytes).map_err(|e| Error::io(tmp_path.display().to_string(), e))?;
    std::fs::rename(&tmp_path, path).map_err(|e| Error::io(&display, e))?;
    Ok(())
}

/// Stability grid as CSV with columns `re, im, absR` (one row per cell,
/// row-major from the bottom of the window). Poles print as `inf`.
pub fn stability_grid_csv(grid: &StabilityGrid) -> String {
    let mut out = String::with_capacity(grid.values.len() * 32);
    out.push_str("re,im,absR\n");
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e}",
                grid.re_center(i),
                grid.im_center(j),
                grid.value(i, j)
            );
        }
    }
    out
}

/// Binary PPM (P6) rendering of a stability grid: header
/// `P6\n<width> <height>\n255\n` followed by `width * height` RGB byte
/// triples, top row first. Cells with `|R| <= 1` shade from dark blue
/// (`|R| = 0`) to light blue (`|R| = 1`); unstable cells are white.
pub fn stability_grid_ppm(grid: &StabilityGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 3 * grid.nx * grid.ny);
    out.extend_from_slice(format!("P6\n{} {}\n255\n", grid.nx, grid.ny).as_bytes());
    // Image rows run top-down; the grid's j axis runs bottom-up.
    for j in (0..grid.ny).rev() {
        for i in 0..grid.nx {
            let v = grid.value(i, j);
            if v <= 1.0 {
                let t = v.clamp(0.0, 1.0);
                let shade = (55.0 + 145.0 * t) as u8;
                out.extend_from_slice(&[shade / 3, shade, 200]);
            } else {
                out.extend_from_slice(&[255, 255, 255]);
            }
        }
    }
    out
}

/// SVG outline of the `|R| = 1` contour, extracted by marching squares on
/// the raster. The drawing spans the grid window with the real axis
/// horizontal.
pub fn stability_contour_svg(grid: &StabilityGrid, title: &str) -> String {
    let width = 640.0;
    let height = 640.0 * (grid.window.im_max - grid.window.im_min)
        / (grid.window.re_max - grid.window.re_min);
    let sx = |re: f64| {
        (re - grid.window.re_min) / (grid.window.re_max - grid.window.re_min) * width
    };
    let sy = |im: f64| {
        height - (im - grid.window.im_min) / (grid.window.im_max - grid.window.im_min) * height
    };

    let mut segments = String::new();
    // Marching squares over cell-center values; each 2x2 block of centers
    // contributes 0..2 line segments of the level set.
    let level = 1.0;
    let clamp_big = |v: f64| if v.is_finite() { v } else { 1e6 };
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            let v = [
                clamp_big(grid.value(i, j)),
                clamp_big(grid.value(i + 1, j)),
                clamp_big(grid.value(i + 1, j + 1)),
                clamp_big(grid.value(i, j + 1)),
            ];
            let x = [
                grid.re_center(i),
                grid.re_center(i + 1),
                grid.re_center(i + 1),
                grid.re_center(i),
            ];
            let y = [
                grid.im_center(j),
                grid.im_center(j),
                grid.im_center(j + 1),
                grid.im_center(j + 1),
            ];
            // Interpolated crossing points on each edge that straddles the
            // level.
            let mut crossings: Vec<(f64, f64)> = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (e, (e + 1) % 4);
                let (va, vb) = (v[a], v[b]);
                if (va <= level) != (vb <= level) {
                    let t = (level - va) / (vb - va);
                    crossings.push((x[a] + t * (x[b] - x[a]), y[a] + t * (y[b] - y[a])));
                }
            }
            if crossings.len() >= 2 {
                for pair in crossings.chunks(2) {
                    if pair.len() == 2 {
                        let _ = write!(
                            segments,
                            "M{:.2} {:.2}L{:.2} {:.2}",
                            sx(pair[0].0),
                            sy(pair[0].1),
                            sx(pair[1].0),
                            sy(pair[1].1)
                        );
                    }
                }
            }
        }
    }

    let axis_x = sx(0.0);
    let axis_y = sy(0.0);
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" ",
            "viewBox=\"0 0 {w:.0} {h:.0}\">\n",
            "<rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n",
            "<line x1=\"{ax:.2}\" y1=\"0\" x2=\"{ax:.2}\" y2=\"{h:.0}\" stroke=\"#bbb\"/>\n",
            "<line x1=\"0\" y1=\"{ay:.2}\" x2=\"{w:.0}\" y2=\"{ay:.2}\" stroke=\"#bbb\"/>\n",
            "<path d=\"{segs}\" stroke=\"#1f4e9c\" fill=\"none\" stroke-width=\"1\"/>\n",
            "<text x=\"8\" y=\"16\" font-family=\"monospace\" font-size=\"13\">{title}</text>\n",
            "</svg>\n"
        ),
        w = width,
        h = height,
        ax = axis_x,
        ay = axis_y,
        segs = segments,
        title = title,
    )
}

/// One named series of a log-log chart.
pub struct Series {
    pub label: String,
    /// `(x, y)` pairs with positive coordinates.
    pub points: Vec<(f64, f64)>,
}

const SERIES_COLORS: [&str; 6] = [
    "#1f4e9c", "#c23b22", "#2e7d32", "#7b1fa2", "#ef6c00", "#00838f",
];

/// Log-log SVG line chart (markers plus connecting lines), one color per
/// series, legend in the top-right corner.
pub fn log_log_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let width = 640.0;
    let height = 480.0;
    let margin = 56.0;

    let finite_points: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .collect();
    if finite_points.is_empty() {
        return format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\">\
             <text x=\"20\" y=\"40\">{title}: no data</text></svg>\n"
        );
    }
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &finite_points {
        x_min = x_min.min(x.log10());
        x_max = x_max.max(x.log10());
        y_min = y_min.min(y.log10());
        y_max = y_max.max(y.log10());
    }
    if x_max - x_min < 1e-12 {
        x_max = x_min + 1.0;
    }
    if y_max - y_min < 1e-12 {
        y_max = y_min + 1.0;
    }
    let px = |x: f64| margin + (x.log10() - x_min) / (x_max - x_min) * (width - 2.0 * margin);
    let py =
        |y: f64| height - margin - (y.log10() - y_min) / (y_max - y_min) * (height - 2.0 * margin);

    let mut body = String::new();
    // Decade grid lines.
    let mut decade = x_min.ceil() as i64;
    while (decade as f64) <= x_max {
        let x = margin + (decade as f64 - x_min) / (x_max - x_min) * (width - 2.0 * margin);
        let _ = write!(
            body,
            "<line x1=\"{x:.1}\" y1=\"{margin}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#eee\"/>\
             <text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">1e{decade}</text>",
            height - margin,
            height - margin + 16.0
        );
        decade += 1;
    }
    let mut decade = y_min.ceil() as i64;
    while (decade as f64) <= y_max {
        let y = height - margin - (decade as f64 - y_min) / (y_max - y_min) * (height - 2.0 * margin);
        let _ = write!(
            body,
            "<line x1=\"{margin}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#eee\"/>\
             <text x=\"{:.1}\" y=\"{y:.1}\" font-size=\"11\" text-anchor=\"end\">1e{decade}</text>",
            width - margin,
            margin - 6.0
        );
        decade += 1;
    }

    for (k, s) in series.iter().enumerate() {
        let color = SERIES_COLORS[k % SERIES_COLORS.len()];
        let mut path = String::new();
        for (n, &(x, y)) in s
            .points
            .iter()
            .filter(|&&(x, y)| x > 0.0 && y > 0.0)
            .enumerate()
        {
            let _ = write!(path, "{}{:.1} {:.1}", if n == 0 { "M" } else { "L" }, px(x), py(y));
        }
        let _ = write!(
            body,
            "<path d=\"{path}\" stroke=\"{color}\" fill=\"none\" stroke-width=\"1.5\"/>"
        );
        for &(x, y) in s.points.iter().filter(|&&(x, y)| x > 0.0 && y > 0.0) {
            let _ = write!(
                body,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>",
                px(x),
                py(y)
            );
        }
        let _ = write!(
            body,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{color}\" text-anchor=\"end\">{}</text>",
            width - margin,
            margin + 16.0 * k as f64 + 4.0,
            s.label
        );
    }

    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" ",
            "viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"monospace\">\n",
            "<rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n",
            "<rect x=\"{m}\" y=\"{m}\" width=\"{iw:.1}\" height=\"{ih:.1}\" fill=\"none\" stroke=\"#888\"/>\n",
            "{body}\n",
            "<text x=\"{w2:.1}\" y=\"{h:.0}\" dy=\"-8\" font-size=\"12\" text-anchor=\"middle\">{xl}</text>\n",
            "<text x=\"14\" y=\"{h2:.1}\" font-size=\"12\" text-anchor=\"middle\" ",
            "transform=\"rotate(-90 14 {h2:.1})\">{yl}</text>\n",
            "<text x=\"{m}\" y=\"20\" font-size=\"14\">{title}</text>\n",
            "</svg>\n"
        ),
        w = width,
        h = height,
        m = margin,
        iw = width - 2.0 * margin,
        ih = height - 2.0 * margin,
        w2 = width / 2.0,
        h2 = height / 2.0,
        body = body,
        xl = x_label,
        yl = y_label,
        title = title,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{stability_region, StabilityWindow, DEFAULT_WINDOW};
    use crate::tableau::get_scheme;

    #[test]
    fn ppm_has_correct_header_and_size() {
        let t = get_scheme("OTDDIRK4s2a").unwrap();
        let grid = stability_region(&t, DEFAULT_WINDOW, 60, 120).unwrap();
        let ppm = stability_grid_ppm(&grid);
        assert!(ppm.starts_with(b"P6\n60 120\n255\n"));
        assert_eq!(ppm.len(), b"P6\n60 120\n255\n".len() + 3 * 60 * 120);
    }

    #[test]
    fn csv_row_count_matches_grid() {
        let t = get_scheme("TDDIRK5s2").unwrap();
        let window = StabilityWindow {
            re_min: -2.0,
            re_max: 0.5,
            im_min: -1.0,
            im_max: 1.0,
        };
        let grid = stability_region(&t, window, 8, 6).unwrap();
        let csv = stability_grid_csv(&grid);
        assert_eq!(csv.lines().count(), 1 + 8 * 6);
        assert!(csv.starts_with("re,im,absR\n"));
    }

    #[test]
    fn contour_svg_is_nonempty_and_well_formed() {
        let t = get_scheme("OTDDIRK5s3").unwrap();
        let grid = stability_region(&t, DEFAULT_WINDOW, 80, 160).unwrap();
        let svg = stability_contour_svg(&grid, "OTDDIRK5s3");
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("M"), "no contour segments found");
    }

    #[test]
    fn chart_svg_handles_empty_and_normal_series() {
        let empty = log_log_chart_svg("t", "h", "err", &[]);
        assert!(empty.contains("no data"));
        let svg = log_log_chart_svg(
            "conv",
            "h",
            "error",
            &[Series {
                label: "s".to_string(),
                points: vec![(0.25, 1e-3), (0.125, 6e-5)],
            }],
        );
        assert!(svg.contains("circle"));
    }

    #[test]
    fn atomic_write_leaves_no_tmp_file() {
        let dir = std::env::temp_dir().join("tddirk-plot-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        write_atomic(&path, b"a,b\n").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"a,b\n");
        assert!(!dir.join("out.csv.tmp").exists());
        std::fs::remove_file(&path).unwrap();
    }
}

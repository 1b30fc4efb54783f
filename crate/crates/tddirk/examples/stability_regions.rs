//! Rasterize |R(z)| over the complex plane for every built-in scheme and
//! emit PPM images plus SVG outlines of the |R| = 1 contour.
//!
//! Files land in `target/stability/`.
//!
//! ```text
//! cargo run --release --example stability_regions
//! ```

use tddirk::analysis::{stability_region, DEFAULT_WINDOW};
use tddirk::plot::{stability_contour_svg, stability_grid_ppm, write_atomic};
use tddirk::tableau::{get_scheme, BUILTIN_SCHEMES};

fn main() {
    let dir = std::path::Path::new("target/stability");
    for name in BUILTIN_SCHEMES {
        let scheme = get_scheme(name).unwrap();
        let grid = stability_region(&scheme, DEFAULT_WINDOW, 600, 1200).unwrap();

        let stable_cells = grid.values.iter().filter(|&&v| v <= 1.0).count();
        println!(
            "{name:12} window [{}, {}] x [{}, {}]: {:.1}% of cells stable",
            grid.window.re_min,
            grid.window.re_max,
            grid.window.im_min,
            grid.window.im_max,
            100.0 * stable_cells as f64 / grid.values.len() as f64
        );

        write_atomic(&dir.join(format!("{name}.ppm")), &stability_grid_ppm(&grid)).unwrap();
        write_atomic(
            &dir.join(format!("{name}.svg")),
            stability_contour_svg(&grid, name).as_bytes(),
        )
        .unwrap();
    }
    println!("wrote PPM/SVG files under {}", dir.display());
}

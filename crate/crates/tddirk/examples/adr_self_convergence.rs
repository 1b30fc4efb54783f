//! Self-convergence study on the 2D advection-diffusion-reaction problem.
//!
//! The run uses the coarse 21x21 unit-square grid so it finishes in a few
//! seconds; pass `--full` for the 101x101 benchmark resolution (a minute or
//! so, dominated by the reference solve). There is no closed-form solution,
//! so errors are measured against a reference computed with OTDDIRK5s3 at a
//! step 100x smaller than the finest step in the ladder.
//!
//! ```text
//! cargo run --release --example adr_self_convergence [-- --full]
//! ```

use tddirk::problems::{adr2d, compute_reference, Grid2D};
use tddirk::stepper::{integrate, IntegrationConfig};
use tddirk::tableau::{get_scheme, BUILTIN_SCHEMES};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn main() {
    let full = std::env::args().any(|a| a == "--full");
    let points = if full { 101 } else { 21 };
    let grid = Grid2D::unit_square(points).unwrap();
    let problem = adr2d(grid, 0.01, -10.0, 100.0).unwrap();
    let t_end = 0.08;
    let h_list = [0.002, 0.001, 0.0005, 0.00025];
    let h_ref = h_list[h_list.len() - 1] / 100.0;

    println!(
        "grid {points}x{points}, t_end = {t_end}, reference: OTDDIRK5s3 at h = {h_ref:e}"
    );
    let reference = compute_reference(&problem, "demo", t_end, h_ref).unwrap();

    print!("{:<14}", "scheme");
    for h in h_list {
        print!(" {:>12}", format!("h = {h}"));
    }
    println!(" {:>8}", "slope");

    for name in BUILTIN_SCHEMES {
        let scheme = get_scheme(name).unwrap();
        let mut points = Vec::new();
        print!("{name:<14}");
        for h in h_list {
            let cfg = IntegrationConfig::new(h, 0.0, t_end);
            let run = integrate(&scheme, &problem.system, &problem.y0, &cfg).unwrap();
            let err = max_diff(&run.y_final, &reference.y);
            print!(" {err:>12.3e}");
            points.push((h.ln(), err.ln()));
        }
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        println!(" {:>8.2}", (n * sxy - sx * sy) / (n * sxx - sx * sx));
    }
}

//! Accuracy table for the upwind advection problem with the logistic
//! source: fixed step h = 0.02, grid resolutions N = 50, 100, 200
//! (CFL 0.5, 1, 2), errors measured against a 100x-finer time reference
//! on the same grid.
//!
//! Both error conventions are shown: the max-norm error at the final time
//! and the max over all step times (the convention behind the published
//! accuracy table for this problem). A diverging fixed-point iteration is
//! reported as such rather than aborting the table.
//!
//! ```text
//! cargo run --release --example advection_benchmark
//! ```

use tddirk::problems::{advection_source, Grid1D};
use tddirk::stepper::{integrate_observed, IntegrationConfig};
use tddirk::tableau::{get_scheme, BUILTIN_SCHEMES};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn main() {
    let h = 0.02;
    let t_end = 1.4;
    let amplitude = 0.5;

    for n in [50u32, 100, 200] {
        let grid = Grid1D::advection_benchmark(n).unwrap();
        let problem = advection_source(grid, amplitude).unwrap();
        println!(
            "N = {n} (dx = {}, CFL = {}):",
            grid.dx,
            h / grid.dx
        );

        // Reference trajectory at the coarse step times.
        let fine = get_scheme("OTDDIRK5s3").unwrap();
        let h_ref = h / 100.0;
        let cfg_ref = IntegrationConfig::new(h_ref, 0.0, t_end);
        let mut states = Vec::new();
        let mut counter = 0usize;
        integrate_observed(&fine, &problem.system, &problem.y0, &cfg_ref, |_, y| {
            counter += 1;
            if counter.is_multiple_of(100) {
                states.push(y.to_vec());
            }
        })
        .unwrap();

        for name in BUILTIN_SCHEMES {
            let scheme = get_scheme(name).unwrap();
            let cfg = IntegrationConfig::new(h, 0.0, t_end);
            let mut worst: f64 = 0.0;
            let mut index = 0usize;
            let run = integrate_observed(&scheme, &problem.system, &problem.y0, &cfg, |_, y| {
                worst = worst.max(max_diff(y, &states[index]));
                index += 1;
            });
            match run {
                Ok(result) => println!(
                    "  {name:<14} final-time error {:.3e}   trajectory max {:.3e}   fp iters {}",
                    max_diff(&result.y_final, states.last().unwrap()),
                    worst,
                    result.total_fp_iterations
                ),
                Err(e) => println!("  {name:<14} diverged ({e})"),
            }
        }
        println!();
    }
}

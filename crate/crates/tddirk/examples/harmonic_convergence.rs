//! Convergence study on the 2D harmonic oscillator over [0, 100]: global
//! max-norm errors against the exact solution for a ladder of step sizes,
//! with fitted slopes.
//!
//! ```text
//! cargo run --release --example harmonic_convergence
//! ```

use tddirk::problems::harmonic_oscillator;
use tddirk::stepper::{final_time_error_vs_exact, IntegrationConfig};
use tddirk::tableau::{get_scheme, BUILTIN_SCHEMES};

fn main() {
    let problem = harmonic_oscillator();
    let h_list = [0.25, 0.125, 0.0625, 0.03125];

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
            let cfg = IntegrationConfig::new(h, 0.0, 100.0);
            let err =
                final_time_error_vs_exact(&scheme, &problem.system, &problem.y0, &cfg).unwrap();
            print!(" {err:>12.3e}");
            if err > 1e-12 {
                points.push((h.ln(), err.ln()));
            }
        }
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        println!(" {slope:>8.2}");
    }
    println!("\n(points at the 1e-12 round-off floor are excluded from the slope fit;");
    println!(" slopes exceed the classical orders because the optimized phase errors");
    println!(" dominate on this purely oscillatory problem)");
}

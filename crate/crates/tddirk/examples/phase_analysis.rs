//! Estimate dispersion/dissipation orders and leading constants for the
//! built-in schemes by series fitting, and compare with the expected
//! values.
//!
//! ```text
//! cargo run --example phase_analysis
//! ```

use tddirk::analysis::{dispersion, dissipation, estimate_phase_expansion, phase_targets};
use tddirk::tableau::{get_scheme, BUILTIN_SCHEMES};

fn main() {
    for name in BUILTIN_SCHEMES {
        let scheme = get_scheme(name).unwrap();
        let est = estimate_phase_expansion(&scheme).unwrap();
        let target = phase_targets(name).unwrap();
        println!("{name}");
        println!(
            "  dispersion:  order {} constant {:+.6e} (expected {:.6e})",
            est.dispersion_order, est.dispersion_constant, target.dispersion_constant
        );
        println!(
            "  dissipation: order {} constant {:+.6e} (expected {:.6e})",
            est.dissipation_order, est.dissipation_constant, target.dissipation_constant
        );
        // Spot values of the raw per-step errors.
        for nu in [0.1, 0.4] {
            println!(
                "  nu = {nu}: phase error {:+.3e}, amplitude error {:+.3e}",
                dispersion(&scheme, nu).unwrap(),
                dissipation(&scheme, nu).unwrap()
            );
        }
        println!();
    }
}

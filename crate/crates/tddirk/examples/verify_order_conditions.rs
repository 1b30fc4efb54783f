//! Check the row assumption and the order conditions for every built-in
//! scheme, printing each residual.
//!
//! ```text
//! cargo run --example verify_order_conditions
//! ```

use tddirk::tableau::{
    get_scheme, order_condition_residuals, row_assumption_residuals, BUILTIN_SCHEMES,
};

fn main() {
    for name in BUILTIN_SCHEMES {
        let scheme = get_scheme(name).unwrap();
        println!("{name} (order {})", scheme.claimed_order());
        for r in row_assumption_residuals(&scheme) {
            println!("  {:<8} {:+.3e}", r.condition_id.to_string(), r.value);
        }
        for r in order_condition_residuals(&scheme, 6).unwrap() {
            let marker = if r.value.abs() <= 1e-13 { "" } else { "  <- beyond this scheme's order" };
            println!("  {:<8} {:+.3e}{marker}", r.condition_id.to_string(), r.value);
        }
        println!();
    }
}

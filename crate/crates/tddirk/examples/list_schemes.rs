//! Walk the built-in scheme registry: stage counts, verified order, and
//! tableau coefficients.
//!
//! ```text
//! cargo run --example list_schemes
//! ```

use tddirk::tableau::classify_order;
use tddirk::SchemeRegistry;

fn main() {
    let registry = SchemeRegistry::with_builtins();
    for scheme in registry.iter() {
        let order = classify_order(scheme, 1e-12);
        println!("{scheme}");
        println!(
            "  verified order {order} (claimed {}), max |a_ii| = {:.4}\n",
            scheme.claimed_order(),
            scheme.max_diagonal()
        );
    }
}

//! Re-derive the four built-in schemes from their families and
//! optimization conditions, and check the results against the registry
//! coefficients.
//!
//! The two-stage fourth-order family has two free parameters; zeroing its
//! leading phase-error coefficients (or imposing the fifth-order
//! conditions) pins them down. The three-stage family reduces to a single
//! free node, chosen at a stationary point of the principal local-error
//! norm.
//!
//! ```text
//! cargo run --example derive_schemes
//! ```

use tddirk::families::{
    lte_norm_5s3, solve_optimal_c2, solve_property_i, solve_property_ii, tddirk4s2, tddirk5s2,
    tddirk5s3_family, FamilyParams3s5,
};
use tddirk::tableau::get_scheme;

fn main() {
    let [prop_i, prop_i_alt] = solve_property_i();
    println!("property I (dispersion order 6, dissipation order 7):");
    println!("  alpha = {:.16}, beta = {:.16}", prop_i.alpha, prop_i.beta);
    println!(
        "  second root alpha = {:.16} (larger phase constant, not selected)",
        prop_i_alt.alpha
    );
    let derived = tddirk4s2(&prop_i).unwrap();
    let reference = get_scheme("OTDDIRK4s2a").unwrap();
    println!(
        "  matches OTDDIRK4s2a to {:.1e}\n",
        derived.max_coefficient_difference(&reference)
    );

    let prop_ii = solve_property_ii();
    println!("property II (dispersion order 8, dissipation order 5):");
    println!("  alpha = {:.16}, beta = {:.16}", prop_ii.alpha, prop_ii.beta);
    let derived = tddirk4s2(&prop_ii).unwrap();
    let reference = get_scheme("OTDDIRK4s2b").unwrap();
    println!(
        "  matches OTDDIRK4s2b to {:.1e}\n",
        derived.max_coefficient_difference(&reference)
    );

    println!("unique fifth-order two-stage member:");
    let derived = tddirk5s2();
    let reference = get_scheme("TDDIRK5s2").unwrap();
    println!(
        "  matches TDDIRK5s2 to {:.1e}\n",
        derived.max_coefficient_difference(&reference)
    );

    let [c2, c2_alt] = solve_optimal_c2();
    println!("three-stage family, local-error stationary points:");
    println!(
        "  c2 = {:.16} (|lte| = {:.3e}) and c2 = {:.16} (|lte| = {:.3e})",
        c2,
        lte_norm_5s3(c2).unwrap().abs(),
        c2_alt,
        lte_norm_5s3(c2_alt).unwrap().abs()
    );
    let derived = tddirk5s3_family(&FamilyParams3s5::new(c2).unwrap()).unwrap();
    let reference = get_scheme("OTDDIRK5s3").unwrap();
    println!(
        "  first root matches OTDDIRK5s3 to {:.1e}",
        derived.max_coefficient_difference(&reference)
    );
}

//! Evaluate the built-in windowing functions and check their gradient
//! conditions on a log grid.
//!
//! ```sh
//! cargo run -p rokr --example window_functions
//! ```

use rokr::losses::{default_condition_grid, WindowingFunction, CONDITION_TOL};

fn main() {
    let grid = default_condition_grid();

    println!("window function values and derivatives:");
    println!("{:<14} {:>10} {:>10} {:>10} {:>10}", "loss", "W(0.5)", "W(2)", "W'(0)", "W'(2)");
    for w in WindowingFunction::builtins() {
        println!(
            "{:<14} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            w.name(),
            w.eval(0.5).unwrap(),
            w.eval(2.0).unwrap(),
            w.deriv(0.0).unwrap(),
            w.deriv(2.0).unwrap(),
        );
    }

    println!("\ncondition checks on {} grid points in [1e-6, 1e2]:", grid.len());
    for w in WindowingFunction::builtins() {
        let report = w.check_conditions(&grid, CONDITION_TOL);
        println!(
            "{:<14} bound_ok={} holder_ok={} min W' = {:.3e}{}",
            w.name(),
            report.bound_ok,
            report.holder_ok,
            report.min_deriv,
            if report.strictly_positive { "" } else { "  (W' vanishes past the cutoff)" },
        );
    }

    // The scale parameter trades efficiency for robustness: at large sigma
    // every window acts like least squares, at small sigma large residuals
    // stop moving the estimate.
    let welsch = WindowingFunction::welsch();
    println!("\nwelsch gradient weight W'(u^2/sigma^2) for residual u = 2:");
    for sigma in [0.5, 1.0, 2.0, 10.0, 100.0] {
        let xi: f64 = (2.0 / sigma) * (2.0 / sigma);
        println!("  sigma = {sigma:>6}: weight = {:.6}", welsch.deriv(xi).unwrap());
    }
}

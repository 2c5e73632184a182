//! The stationary density of the polar angle, three independent ways:
//! closed form, backward-difference recurrence, Monte-Carlo histogram.
//!
//! Run with `cargo run --example phase_density [output.csv]`.

use cournot_stability::{
    density_backward_difference, density_closed_form, linearize, mc_angle_histogram, GameParams,
};
use std::fmt::Write as _;

fn main() {
    let game = GameParams::with_rotation_scale(0.2, 2.0, 0.2, 0.4, 2.0, 2.0).unwrap();
    let sys = linearize(&game).unwrap().system;

    let n = 512;
    let closed = density_closed_form(&sys, n).unwrap();
    let discrete = density_backward_difference(&sys, n / 2).unwrap();
    let histogram = mc_angle_histogram(&sys, 1, 1_000_000, 10.0, 1e-2, n).unwrap();

    println!(
        "closed form ({:?}): normalization error {:.2e}, FPE residual {:.2e}",
        closed.closed_form_variant.unwrap(),
        closed.normalization_error,
        closed.fpe_residual
    );
    println!(
        "backward difference: normalization error {:.2e}, FPE residual {:.2e}",
        discrete.normalization_error, discrete.fpe_residual
    );

    let sup = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0_f64, f64::max)
    };
    println!(
        "sup |closed - discrete|  = {:.2e}",
        sup(&closed.values, &discrete.values)
    );
    println!(
        "sup |closed - histogram| = {:.2e}",
        sup(&closed.values, &histogram.values)
    );
    println!(
        "pi-shift asymmetry of the closed form: {:.2e}",
        closed.pi_shift_asymmetry()
    );

    if let Some(path) = std::env::args().nth(1) {
        let mut out = String::from("theta,p_closed,p_discrete,p_mc\n");
        for j in 0..=n {
            writeln!(
                out,
                "{},{},{},{}",
                closed.grid[j], closed.values[j], discrete.values[j], histogram.values[j]
            )
            .unwrap();
        }
        std::fs::write(&path, out).unwrap();
        println!("wrote {path}");
    }
}

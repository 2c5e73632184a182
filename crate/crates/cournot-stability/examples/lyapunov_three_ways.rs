//! The top Lyapunov exponent by quadrature, by the discrete λ(N) sum, and by
//! Monte-Carlo log-growth of simulated paths — three routes, one number.
//!
//! Run with `cargo run --release --example lyapunov_three_ways`.

use cournot_stability::{
    density_closed_form, lambda_discrete, lambda_monte_carlo, lambda_quadrature_for_game,
    linearize, GameParams, McConfig,
};

fn main() {
    let game = GameParams::with_rotation_scale(0.2, 2.0, 0.2, 0.4, 2.0, 2.0).unwrap();
    let sys = linearize(&game).unwrap().system;

    let density = density_closed_form(&sys, 2048).unwrap();
    let quad = lambda_quadrature_for_game(&game, &density).unwrap();
    println!(
        "quadrature:      lambda = {:+.6}   (c2 = {:+.5}, s2 = {:+.5})",
        quad.value,
        quad.metadata.c2.unwrap(),
        quad.metadata.s2.unwrap()
    );
    println!(
        "                 closed forms agree: rotation-scale {:+.6}, game {:+.6}",
        quad.metadata.rotation_scale_closed_form.unwrap(),
        quad.metadata.game_closed_form.unwrap()
    );

    for n in [250, 1000, 2000] {
        let disc = lambda_discrete(&sys, n).unwrap();
        println!("discrete N={n:<5}: lambda = {:+.6}", disc.value);
    }

    let mc = lambda_monte_carlo(&sys, &McConfig::default()).unwrap();
    println!(
        "monte carlo:     lambda = {:+.6} ± {:.1e}  ({} paths, T = {}, h = {})",
        mc.value,
        mc.std_error,
        mc.n_used,
        mc.metadata.horizon.unwrap(),
        mc.metadata.step.unwrap()
    );

    let verdict = if quad.value < 0.0 {
        "stable"
    } else {
        "unstable"
    };
    println!(
        "stationary state is {verdict} under this noise (lambda {} 0)",
        if quad.value < 0.0 { "<" } else { ">" }
    );
}

//! λ as a function of the noise parameter α at fixed β = 2, with the
//! stability thresholds located by bisection.
//!
//! Run with `cargo run --release --example alpha_sweep [output.csv]`.

use cournot_stability::{lambda_sweep, GameParams, LambdaMethod, SweepSettings, SweepVar};
use std::fmt::Write as _;

fn main() {
    let base = GameParams::with_rotation_scale(0.2, 2.0, 0.2, 0.4, 0.0, 2.0).unwrap();
    let table = lambda_sweep(
        &base,
        SweepVar::Alpha,
        (-3.0, 3.0),
        61,
        LambdaMethod::Quadrature,
        &SweepSettings::default(),
    )
    .unwrap();

    for sc in &table.sign_changes {
        println!(
            "lambda changes sign in [{:.4}, {:.4}], root ~ {:.4}",
            sc.lower, sc.upper, sc.root
        );
    }
    let negative = table
        .points
        .iter()
        .filter(|p| p.lambda.is_some_and(|l| l < 0.0))
        .count();
    println!(
        "{negative} of {} sweep points have lambda < 0 (stable)",
        table.points.len()
    );

    if let Some(path) = std::env::args().nth(1) {
        let mut out = String::from("alpha,lambda\n");
        for p in &table.points {
            if let Some(l) = p.lambda {
                writeln!(out, "{},{}", p.param, l).unwrap();
            }
        }
        std::fs::write(&path, out).unwrap();
        println!("wrote {path}");
    }
}

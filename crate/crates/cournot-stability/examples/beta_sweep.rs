//! λ as a function of the noise parameter β at fixed α = 2. The β = 0
//! neighborhood is skipped: there the angle process has no diffusion and no
//! stationary phase density in this form.
//!
//! Run with `cargo run --release --example beta_sweep [output.csv]`.

use cournot_stability::{lambda_sweep, GameParams, LambdaMethod, SweepSettings, SweepVar};
use std::fmt::Write as _;

fn main() {
    let base = GameParams::with_rotation_scale(0.2, 2.0, 0.2, 0.4, 2.0, 2.0).unwrap();
    let settings = SweepSettings::default();
    let halves = [
        lambda_sweep(
            &base,
            SweepVar::Beta,
            (-4.0, -0.2),
            39,
            LambdaMethod::Quadrature,
            &settings,
        )
        .unwrap(),
        lambda_sweep(
            &base,
            SweepVar::Beta,
            (0.2, 4.0),
            39,
            LambdaMethod::Quadrature,
            &settings,
        )
        .unwrap(),
    ];

    for table in &halves {
        for sc in &table.sign_changes {
            println!(
                "lambda changes sign in [{:.4}, {:.4}], root ~ {:.4}",
                sc.lower, sc.upper, sc.root
            );
        }
    }

    if let Some(path) = std::env::args().nth(1) {
        let mut out = String::from("beta,lambda\n");
        for table in &halves {
            for p in &table.points {
                if let Some(l) = p.lambda {
                    writeln!(out, "{},{}", p.param, l).unwrap();
                }
            }
        }
        std::fs::write(&path, out).unwrap();
        println!("wrote {path}");
    }
}

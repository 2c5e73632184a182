//! Simulated orbits of the full nonlinear game: the second-order scheme
//! against the Euler–Maruyama reference on the same Brownian path, plus the
//! noise-free flow.
//!
//! Run with `cargo run --release --example orbits [output.csv]`.

use cournot_stability::{
    euler_maruyama, paper_taylor2, stationary_state, GameParams, Mat2, WienerSpec, Wiring,
};
use std::fmt::Write as _;

fn main() {
    let game = GameParams::with_rotation_scale(0.2, 2.0, 0.2, 0.4, 2.0, 1.0).unwrap();
    let x0 = stationary_state(&game).unwrap();
    let start = x0.as_vec() * 1.05;
    let spec = WienerSpec {
        seed: 42,
        step_h: 1e-3,
        n_steps: 50_000,
        wiring: Wiring::SharedWiener,
    };

    let taylor = paper_taylor2(&game, start, &spec).unwrap();
    let em = euler_maruyama(&game, start, &spec).unwrap();
    let quiet = GameParams::new(game.c1, game.c2, game.k1, game.k2, Mat2::ZERO).unwrap();
    let ode = paper_taylor2(&quiet, start, &spec).unwrap();

    println!("stationary state  ({:.6}, {:.6})", x0.x10, x0.x20);
    println!("initial state     ({:.6}, {:.6})", start.x, start.y);
    for (name, path) in [("taylor2", &taylor), ("euler", &em), ("ode", &ode)] {
        let last = path.final_state();
        let trunc = match path.truncation {
            Some(t) => format!("truncated at step {} ({:?})", t.step, t.reason),
            None => "ran to completion".into(),
        };
        println!("{name:<8} -> final ({:.6}, {:.6}), {trunc}", last.x, last.y);
    }
    let sup: f64 = taylor
        .states
        .iter()
        .zip(&em.states)
        .map(|(a, b)| (*a - *b).norm())
        .fold(0.0, f64::max);
    println!("sup-norm distance taylor2 vs euler on the shared path: {sup:.3e}");

    if let Some(path_name) = std::env::args().nth(1) {
        let rows = taylor
            .states
            .len()
            .min(em.states.len())
            .min(ode.states.len());
        let mut out = String::from("t,x1_taylor2,x2_taylor2,x1_euler,x2_euler,x1_ode,x2_ode\n");
        for j in 0..rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                taylor.times[j],
                taylor.states[j].x,
                taylor.states[j].y,
                em.states[j].x,
                em.states[j].y,
                ode.states[j].x,
                ode.states[j].y
            )
            .unwrap();
        }
        std::fs::write(&path_name, out).unwrap();
        println!("wrote {path_name}");
    }
}

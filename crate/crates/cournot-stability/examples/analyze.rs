//! Stationary state, linearization, and eigenvalue structure of the duopoly.
//!
//! Run with `cargo run --example analyze`.

use cournot_stability::{
    characteristic_roots, diffusion, drift, gamma_offsets, linearize, stationary_state, GameParams,
};

fn main() {
    let game = GameParams::with_rotation_scale(0.2, 2.0, 0.2, 0.4, 2.0, 2.0).unwrap();

    let x0 = stationary_state(&game).unwrap();
    println!("stationary state: x1 = {:.12}, x2 = {:.12}", x0.x10, x0.x20);

    let d = drift(&game, x0.as_vec()).unwrap();
    let g = diffusion(&game, x0.as_vec()).unwrap();
    println!("drift there:      ({:+.3e}, {:+.3e})", d.x, d.y);
    println!(
        "diffusion there:  ({:?}, {:?})  (zero by the gamma construction)",
        g.x, g.y
    );

    let gamma = gamma_offsets(&game).unwrap();
    println!(
        "noise offsets:    gamma = ({:.12}, {:.12})",
        gamma.x, gamma.y
    );

    let lin = linearize(&game).unwrap();
    let a = lin.system.a;
    println!(
        "drift Jacobian A = [[{:.6}, {:.6}], [{:.6}, {:.6}]]  (FD check deviation {:.2e})",
        a.m11, a.m12, a.m21, a.m22, lin.fd_max_deviation
    );

    let roots = characteristic_roots(&lin.system);
    println!(
        "eigenvalues:      {:.6}{:+.6}i and {:.6}{:+.6}i",
        roots.mu1.re, roots.mu1.im, roots.mu2.re, roots.mu2.im
    );
    println!(
        "half trace:       {:.6}  (equals -(k1 c1 + k2 c2)(c1 + c2); the common
                  real part only when the discriminant {:.4} is negative)",
        roots.half_trace, roots.discriminant
    );
}

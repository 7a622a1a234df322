//! Regenerate the frozen supremum constant at α = 1.5:
//! `cargo run --release --example sup_pin -- 1000000 10000`
//! (about half an hour on one core).

use std::time::Instant;

use shc_core::stable_motion::{estimate_sup_constant, sup_constant_exact};

fn main() {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("usage: sup_pin <n_paths> <n_steps>"))
        .collect();
    let (n_paths, n_steps) = match args.as_slice() {
        [p, s] => (*p, *s),
        _ => (10_000, 1_000),
    };
    let start = Instant::now();
    let e = estimate_sup_constant(1.5, n_paths, n_steps, 20240601).unwrap();
    println!(
        "mean {:.16} ± {:.3e} ({} paths, {} steps; exact {:.7}) in {:.1?}",
        e.mean,
        e.ci_half_width,
        e.n_paths,
        e.n_steps,
        sup_constant_exact(1.5).unwrap(),
        start.elapsed()
    );
}

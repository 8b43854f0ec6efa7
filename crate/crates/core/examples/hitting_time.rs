//! Waiting times for the orbit to enter a ball, and to enter a single packing
//! cell, on the middle-thirds Cantor set.
//!
//! cargo run --release --example hitting_time

use chaos_cover::engine::{ball_hitting_time_mc, hitting_time_mc, PackingTracker, DEFAULT_STEP_CEILING};
use chaos_cover::measures::Driver;
use chaos_cover::symbolic::{build_packing, IfsModel, Word};

fn main() -> chaos_cover::Result<()> {
    let cantor = IfsModel::middle_thirds_cantor();
    let fair = Driver::bernoulli(vec![0.5, 0.5])?;
    let skew = Driver::bernoulli(vec![0.2, 0.8])?;
    for k in 2..=6 {
        let r = 3f64.powi(-k);
        let a = ball_hitting_time_mc(&cantor, &fair, &[0.0], r, &[1.0], 2000, 5, DEFAULT_STEP_CEILING)?;
        let b = ball_hitting_time_mc(&cantor, &skew, &[0.0], r, &[1.0], 2000, 5, DEFAULT_STEP_CEILING)?;
        println!("B(0, 3^-{k}): fair {:>8.1}   (0.2, 0.8) {:>8.1}", a.mean, b.mean);
    }

    let pk = build_packing(&cantor, 0.01)?;
    // the cell next to 0
    let cell = 0;
    let target = pk.word(cell).clone();
    let tracker = PackingTracker::new(pk);
    let s = hitting_time_mc(
        &fair,
        &tracker,
        cell,
        &Word::constant(1, 1),
        5000,
        7,
        DEFAULT_STEP_CEILING,
    )?;
    println!("cell {target:?}: {:.2} ± {:.2}", s.mean, s.stderr);
    Ok(())
}

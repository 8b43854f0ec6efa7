//! The two-dimensional chaos game draws a map and, independently, a column to
//! feed the horizontal coordinate. Compare it with the ordinary game.
//!
//! cargo run --release --example two_dim_game -- [K] [trials]

use chaos_cover::carpet::{reduce_params, CarpetSpec, LevelConvention};
use chaos_cover::engine::{cover_time_mc, two_dim_cover_time_mc, CarpetSquareTracker, DEFAULT_STEP_CEILING};
use chaos_cover::measures::Driver;
use chaos_cover::symbolic::Word;

fn main() -> chaos_cover::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let level = args.first().copied().unwrap_or(7);
    let trials = args.get(1).copied().unwrap_or(200);

    let rp = reduce_params(&CarpetSpec::from_column_heights(2, 3, &[1, 2])?)?;
    let tracker = CarpetSquareTracker::new(&rp, level, LevelConvention::Floor)?;
    let p = Driver::bernoulli(vec![1.0 / 3.0; 3])?;
    let x0 = Word::constant(2, 1);
    let one = cover_time_mc(&p, &tracker, &x0, trials, 3, DEFAULT_STEP_CEILING)?;
    println!(
        "ordinary game, uniform p      {:>10.1} ± {:.1}",
        one.mean, one.stderr
    );
    for qc in [[0.5, 0.5], [0.3, 0.7], [0.7, 0.3]] {
        let q = Driver::bernoulli(qc.to_vec())?;
        let two = two_dim_cover_time_mc(&tracker, &p, &q, &x0, trials, 3, DEFAULT_STEP_CEILING)?;
        println!(
            "two-dim game, columns {qc:?} {:>10.1} ± {:.1}",
            two.mean, two.stderr
        );
    }
    Ok(())
}

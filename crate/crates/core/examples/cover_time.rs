//! Monte Carlo cover time of the level-K approximate squares under the
//! optimal driving vector, with the exact minimal square mass alongside.
//!
//! cargo run --release --example cover_time -- [K] [trials] [seed]

use chaos_cover::carpet::{min_square_measure, optimize, reduce_params, CarpetSpec, LevelConvention};
use chaos_cover::engine::{cover_time_mc, CarpetSquareTracker, CellTracker, DEFAULT_STEP_CEILING};
use chaos_cover::measures::Driver;
use chaos_cover::symbolic::Word;

fn main() -> chaos_cover::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let level = args.first().copied().unwrap_or(7) as usize;
    let trials = args.get(1).copied().unwrap_or(200) as usize;
    let seed = args.get(2).copied().unwrap_or(1);

    let rp = reduce_params(&CarpetSpec::from_column_heights(2, 3, &[1, 2])?)?;
    let p = optimize(&rp).p_star;
    let tracker = CarpetSquareTracker::new(&rp, level, LevelConvention::Floor)?;
    let drv = Driver::bernoulli(p.clone())?;
    let s = cover_time_mc(
        &drv,
        &tracker,
        &Word::constant(2, 1),
        trials,
        seed,
        DEFAULT_STEP_CEILING,
    )?;
    let nu = min_square_measure(&rp, &p, level, LevelConvention::Floor)?;
    println!(
        "{} squares, lightest has mass {nu:.3e} (1/mass = {:.0})",
        tracker.cell_count(),
        1.0 / nu
    );
    println!(
        "cover time over {} trials: {:.1} ± {:.1} (min {}, max {})",
        s.trials, s.mean, s.stderr, s.min, s.max
    );
    Ok(())
}

//! Mean cover times of the level-K approximate squares on the carpet with
//! columns of heights 1 and 2 in a 2x3 grid, for five driving vectors.
//!
//! cargo run --release --example table2 -- [K] [trials] [seed]

use chaos_cover::carpet::{
    lift_q_to_p, mcmullen_vector, reduce_params, vector_big_q_k, vector_q_k, CarpetSpec, LevelConvention,
};
use chaos_cover::engine::{
    cover_time_mc, two_dim_cover_time_mc, CarpetSquareTracker, CellTracker, DEFAULT_STEP_CEILING,
};
use chaos_cover::measures::Driver;
use chaos_cover::symbolic::Word;

fn main() -> chaos_cover::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let level = args.first().copied().unwrap_or(6) as usize;
    let trials = args.get(1).copied().unwrap_or(400) as usize;
    let seed = args.get(2).copied().unwrap_or(2023);

    let spec = CarpetSpec::from_column_heights(2, 3, &[1, 2])?;
    let rp = reduce_params(&spec)?;
    let vectors = [
        ("p_1", lift_q_to_p(&rp, &vector_q_k(&rp, 1)?)),
        ("P_1", lift_q_to_p(&rp, &vector_big_q_k(&rp, 1)?)),
        ("p_2", lift_q_to_p(&rp, &vector_q_k(&rp, 2)?)),
        ("mcmullen", mcmullen_vector(&rp)),
    ];
    // (1, 1) is the fixed point of the last map
    let x0 = Word::constant(rp.maps() - 1, level);

    for conv in [LevelConvention::Floor, LevelConvention::Ceil] {
        let tracker = CarpetSquareTracker::new(&rp, level, conv)?;
        println!(
            "L(K) = {} ({conv}), {} squares",
            tracker.prefix_len(),
            tracker.cell_count()
        );
        for (name, p) in &vectors {
            let drv = Driver::bernoulli(p.clone())?;
            let s = cover_time_mc(&drv, &tracker, &x0, trials, seed, DEFAULT_STEP_CEILING)?;
            println!("  {name:<10} mean {:>10.1}  stderr {:>7.1}", s.mean, s.stderr);
        }
        let p = Driver::bernoulli(vec![1.0 / rp.maps() as f64; rp.maps()])?;
        let qc = Driver::bernoulli(vec![1.0 / rp.columns() as f64; rp.columns()])?;
        let s = two_dim_cover_time_mc(&tracker, &p, &qc, &x0, trials, seed, DEFAULT_STEP_CEILING)?;
        println!(
            "  {:<10} mean {:>10.1}  stderr {:>7.1}",
            "two-dim", s.mean, s.stderr
        );
    }
    Ok(())
}

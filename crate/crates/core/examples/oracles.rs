//! Brute-force checks: the exact expected cover time of a four-cell packing
//! from the absorbing chain against simulation and the harmonic sandwich, and
//! the closed-form optimum against a grid search.
//!
//! cargo run --release --example oracles

use chaos_cover::analysis::{matthews_bounds, oracle_exact_cover_expectation, oracle_grid_alpha};
use chaos_cover::carpet::{optimize, reduce_params, CarpetSpec};
use chaos_cover::engine::{cover_time_mc, PackingTracker, DEFAULT_STEP_CEILING};
use chaos_cover::measures::{BernoulliDriver, Driver};
use chaos_cover::symbolic::{build_packing, IfsModel, Word};

fn main() -> chaos_cover::Result<()> {
    let pk = build_packing(&IfsModel::middle_thirds_cantor(), 0.2)?;
    let fair = BernoulliDriver::uniform(2);
    let x0 = Word::new(vec![1, 1]);
    let exact = oracle_exact_cover_expectation(&fair, &pk, &x0)?;
    let (t, big_t) = exact.hitting_extremes();
    let b = matthews_bounds(t, big_t, pk.len(), 1.0, 1.0)?;
    let mc = cover_time_mc(
        &Driver::Bernoulli(fair),
        &PackingTracker::new(pk),
        &x0,
        100_000,
        1,
        DEFAULT_STEP_CEILING,
    )?;
    println!(
        "exact {}  simulated {:.4} ± {:.4}",
        exact.expectation, mc.mean, mc.stderr
    );
    println!(
        "hitting times in [{t}, {big_t}] give [{:.4}, {:.4}]",
        b.lower, b.upper
    );

    let rp = reduce_params(&CarpetSpec::from_column_heights(2, 3, &[1, 2])?)?;
    let g = oracle_grid_alpha(&rp, 1e-3)?;
    println!(
        "grid optimum {:.6} at {:?}, closed form {:.6} (slack {:.1e})",
        g.alpha,
        g.q,
        optimize(&rp).alpha,
        g.slack
    );
    Ok(())
}

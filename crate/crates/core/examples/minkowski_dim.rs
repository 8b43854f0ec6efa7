//! Empirical Minkowski dimension of the self-similar measure on the Cantor set
//! and on a Bernoulli convolution, from ball masses of a pushforward sample.
//!
//! cargo run --release --example minkowski_dim

use chaos_cover::analysis::{
    bernoulli_convolution_dim_lower, minkowski_dim_estimate, minkowski_dim_estimate_at,
};
use chaos_cover::engine::trial_rng;
use chaos_cover::measures::Driver;
use chaos_cover::symbolic::IfsModel;

fn main() -> chaos_cover::Result<()> {
    let fair = Driver::bernoulli(vec![0.5, 0.5])?;
    let radii: Vec<f64> = (3..=6).map(|k| 3f64.powi(-k)).collect();
    let est = minkowski_dim_estimate(
        &IfsModel::middle_thirds_cantor(),
        &fair,
        &radii,
        400_000,
        200,
        &mut trial_rng(1, 0),
    )?;
    for e in &est {
        println!(
            "Cantor r = {:.5}: {:.4} (min count {}{})",
            e.radius,
            e.value,
            e.min_count,
            if e.reliable { "" } else { ", unreliable" }
        );
    }

    let lambda = 0.7;
    let bc = IfsModel::bernoulli_convolution(lambda)?;
    let ends = bc.maps().iter().map(|m| m.fixed_point()).collect::<Vec<_>>();
    let radii = [0.05, 0.02, 0.01];
    let est = minkowski_dim_estimate_at(&bc, &fair, &radii, &ends, 400_000, &mut trial_rng(2, 0))?;
    for e in &est {
        println!(
            "lambda = {lambda}, r = {}: {:.4} at the endpoints",
            e.radius, e.value
        );
    }
    println!(
        "lower bound {:.4}",
        bernoulli_convolution_dim_lower(&[0.5, 0.5], lambda)?
    );
    Ok(())
}

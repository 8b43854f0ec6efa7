//! Log-log slope of mean cover time against the radius on the Cantor set. The
//! plain fit carries the logarithmic coupon-collector factor; dividing by the
//! log of the cell count removes most of it.
//!
//! cargo run --release --example slope -- [trials]

use chaos_cover::analysis::slope_fit;
use chaos_cover::engine::{cover_time_mc, CellTracker, PackingTracker, DEFAULT_STEP_CEILING};
use chaos_cover::measures::Driver;
use chaos_cover::symbolic::{build_packing, IfsModel, Word};

fn main() -> chaos_cover::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(300);
    let cantor = IfsModel::middle_thirds_cantor();
    let fair = Driver::bernoulli(vec![0.5, 0.5])?;
    let mut raw = Vec::new();
    let mut corrected = Vec::new();
    for k in 4..=11 {
        let r = 3f64.powi(-k);
        let t = PackingTracker::new(build_packing(&cantor, r)?);
        let s = cover_time_mc(
            &fair,
            &t,
            &Word::constant(1, 1),
            trials,
            k as u64,
            DEFAULT_STEP_CEILING,
        )?;
        println!("r = 3^-{k:<2} cells {:>5}  mean {:>10.1}", t.cell_count(), s.mean);
        raw.push((r, s.mean));
        corrected.push((r, s.mean / (t.cell_count() as f64).ln()));
    }
    println!("slope            {:.4}", slope_fit(&raw)?.exponent);
    println!("slope / ln cells {:.4}", slope_fit(&corrected)?.exponent);
    println!("log 2 / log 3    {:.4}", 2f64.ln() / 3f64.ln());
    Ok(())
}

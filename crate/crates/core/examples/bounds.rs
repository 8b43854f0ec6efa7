//! Upper and lower main terms of the expected cover time on the Cantor set,
//! with the dimension offsets computed from exact ball masses.
//!
//! cargo run --release --example bounds

use chaos_cover::analysis::{
    cylinder_probes, dimension_offset, expected_lower_main_term, expected_upper_main_term, min_ball_measure,
};
use chaos_cover::engine::{cover_time_mc, PackingTracker, DEFAULT_STEP_CEILING};
use chaos_cover::measures::Driver;
use chaos_cover::symbolic::{build_packing, IfsModel, Word};

fn main() -> chaos_cover::Result<()> {
    let cantor = IfsModel::middle_thirds_cantor();
    let fair = Driver::bernoulli(vec![0.5, 0.5])?;
    let alpha = 2f64.ln() / 3f64.ln();
    let probes = cylinder_probes(&cantor, 10)?;
    for k in 4..=8 {
        let r = 3f64.powi(-k);
        let nu = min_ball_measure(&cantor, &fair, &probes, r / 4.0, 24)?;
        let upper = expected_upper_main_term(r, alpha, dimension_offset(alpha, nu.lower, r / 4.0))?;
        let lower = match expected_lower_main_term(&cantor, r, alpha, 0.0, 1.0, 1.0) {
            Ok(l) => {
                let nu = min_ball_measure(&cantor, &fair, &probes, l.radius, 24)?;
                if nu.upper >= 0.25 {
                    // needs some ball at R_r lighter than 1/4
                    "n/a (heavy balls)".to_string()
                } else {
                    let o = dimension_offset(alpha, nu.upper, l.radius);
                    let term = expected_lower_main_term(&cantor, r, alpha, o, 1.0, 1.0)?;
                    format!("{:.2}", term.bound())
                }
            }
            Err(e) => format!("n/a ({e})"),
        };
        let t = PackingTracker::new(build_packing(&cantor, r)?);
        let mc = cover_time_mc(
            &fair,
            &t,
            &Word::constant(1, 1),
            1000,
            k as u64,
            DEFAULT_STEP_CEILING,
        )?;
        println!(
            "r = 3^-{k}: lower {lower:<10} mean {:>8.1}   upper {upper:.1}",
            mc.mean
        );
    }
    Ok(())
}

//! Run the chaos game on the carpet and write the orbit as CSV and SVG.
//!
//! cargo run --example orbit_svg -- [points] [dir]

use std::path::PathBuf;

use chaos_cover::carpet::{reduce_params, CarpetSpec};
use chaos_cover::engine::{orbit_points, trial_rng};
use chaos_cover::measures::Driver;
use chaos_cover::svg::{emit_svg_points, SvgStyle};

fn main() -> chaos_cover::Result<()> {
    let count = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(20_000);
    let dir = std::env::args()
        .nth(2)
        .map_or_else(std::env::temp_dir, PathBuf::from);
    let spec = CarpetSpec::from_column_heights(2, 3, &[1, 2])?;
    let rp = reduce_params(&spec)?;
    let drv = Driver::bernoulli(vec![1.0 / rp.maps() as f64; rp.maps()])?;
    let pts = orbit_points(&spec.ifs(), &drv, &[1.0, 1.0], count, &mut trial_rng(4, 0))?;

    let csv_path = dir.join("carpet_orbit.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(std::io::Error::other)?;
    w.write_record(["step", "x", "y"])
        .map_err(std::io::Error::other)?;
    for (i, p) in pts.iter().enumerate() {
        w.write_record([(i + 1).to_string(), p[0].to_string(), p[1].to_string()])
            .map_err(std::io::Error::other)?;
    }
    w.flush()?;
    let svg_path = dir.join("carpet_orbit.svg");
    emit_svg_points(&csv_path, &svg_path, &SvgStyle::default())?;
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
    Ok(())
}

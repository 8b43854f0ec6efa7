//! Find the Bernoulli vector whose measure has the smallest Minkowski
//! dimension on an arbitrary carpet, given as column heights.
//!
//! cargo run --example optimize_carpet -- 3 7 1 3 6

use chaos_cover::carpet::{dim_measure, dim_set, mcmullen_vector, optimize, reduce_params, CarpetSpec};

fn main() -> chaos_cover::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (m, n, heights) = match args.as_slice() {
        [m, n, h @ ..] if !h.is_empty() => (*m, *n, h.to_vec()),
        _ => (3, 7, vec![1, 3, 6]),
    };
    let rp = reduce_params(&CarpetSpec::from_column_heights(m, n, &heights)?)?;
    let res = optimize(&rp);
    println!(
        "carpet {m}x{n}, heights {heights:?}: {} maps in {} columns",
        rp.maps(),
        rp.columns()
    );
    println!("dim of the set         {:.6}", dim_set(&rp));
    println!(
        "optimum                {} with alpha {:.6}",
        res.label(),
        res.alpha
    );
    println!("  height-class weights {:?}", res.q_star);
    println!("  per-map weights      {:?}", res.p_star);
    let uniform = vec![1.0 / rp.maps() as f64; rp.maps()];
    println!("uniform weights        {:.6}", dim_measure(&rp, &uniform)?);
    println!(
        "McMullen weights       {:.6}",
        dim_measure(&rp, &mcmullen_vector(&rp))?
    );
    Ok(())
}

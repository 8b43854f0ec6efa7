//! The dimension of the measure at the two vertex candidates and the interior
//! candidate, next to the Minkowski dimension of the carpet itself, for three
//! carpets with two column heights.
//!
//! cargo run --example table1

use chaos_cover::carpet::{
    alpha_of_q, dim_set, optimize, reduce_params, threshold_a_k, vector_big_q_k, vector_q_k, CarpetSpec,
    Regime,
};

fn main() -> chaos_cover::Result<()> {
    println!(
        "{:>3} {:>3} {:>7}  {:>8} {:>8} {:>8} {:>8}  optimum",
        "m", "n", "heights", "q_1", "Q_1", "q_2", "dim"
    );
    for (m, n, heights) in [(2, 3, [2, 3]), (2, 3, [1, 2]), (2, 5, [2, 3])] {
        let rp = reduce_params(&CarpetSpec::from_column_heights(m, n, &heights)?)?;
        let res = optimize(&rp);
        let interior = match res.regime {
            Regime::Interior => format!("{:.5}", alpha_of_q(&rp, &vector_big_q_k(&rp, 1)?)?),
            Regime::Vertex => "-".into(),
        };
        println!(
            "{m:>3} {n:>3} {:>7}  {:>8.5} {:>8} {:>8.5} {:>8.5}  {} (A_1 = {:.5})",
            format!("{heights:?}"),
            alpha_of_q(&rp, &vector_q_k(&rp, 1)?)?,
            interior,
            alpha_of_q(&rp, &vector_q_k(&rp, 2)?)?,
            dim_set(&rp),
            res.label(),
            threshold_a_k(&rp, 1)?,
        );
    }
    Ok(())
}

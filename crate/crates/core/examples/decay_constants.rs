//! Fit the decay constants of a two-state Markov driver and check the
//! correlation inequality on a few word pairs.
//!
//! cargo run --example decay_constants

use chaos_cover::measures::{estimate_decay_constants, joint_cylinder_measure, Driver, MarkovDriver};
use chaos_cover::symbolic::Word;

fn main() -> chaos_cover::Result<()> {
    let chain = MarkovDriver::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]])?;
    let dc = estimate_decay_constants(&chain, 10, 3)?;
    println!(
        "stationary {:?}, |lambda_2| = {:.3}",
        chain.stationary(),
        chain.second_eigenvalue_modulus()
    );
    println!("epsilon = {:.4}, kappa = {:.4}", dc.epsilon, dc.kappa);
    let drv = Driver::Markov(chain.clone());
    let (u, v) = (Word::new(vec![1]), Word::new(vec![1, 1]));
    for gap in [0, 1, 2, 5, 10] {
        let joint = joint_cylinder_measure(&chain, &u, gap, &v);
        let product = drv.cylinder_measure(&u) * drv.cylinder_measure(&v);
        println!(
            "gap {gap:>2}: joint/product = {:.4} <= {:.4}",
            joint / product,
            dc.factor(gap)
        );
    }
    Ok(())
}

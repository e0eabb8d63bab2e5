//! The commutator identities on random symmetric matrices: the trace
//! inequality, the sum rule and the triangularization of the coupling.

use drift_hodge::operator_identities::{
    ah_check, lpt_identity_residual, random_symmetric, run_trials, triangularize_coupling, OperatorPair,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> drift_hodge::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = random_symmetric(8, &mut rng);
    let gs: Vec<_> = (0..3).map(|_| random_symmetric(8, &mut rng)).collect();

    let pair = OperatorPair::new(a.clone(), gs.clone())?;
    for k in 1..8 {
        let c = ah_check(&pair, k)?;
        println!("k = {k}: lhs {:>12.5} ≤ rhs {:>12.5}  slack {:.3e}", c.lhs, c.rhs, c.slack);
    }
    for j in 1..=8 {
        println!("sum rule j = {j}: residual {:.2e}", lpt_identity_residual(&a, &gs[0], j)?);
    }
    let tri = triangularize_coupling(&a, &gs, 2)?;
    println!("rotated coupling at i = 2:\n{:.4}", tri.coupling);
    println!("zero-pattern residual {:.2e}", tri.zero_pattern_residual);

    let summary = run_trials(2024, 1000, 12)?;
    println!(
        "{} random trials: max violation {:.2e}, failures {}",
        summary.trials,
        summary.max_violation,
        summary.failures.len()
    );
    Ok(())
}

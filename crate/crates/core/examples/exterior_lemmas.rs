//! Pointwise lemmas for `T ↦ Σ T_ij ω^i ∧ ι(e_j)`: the identity tensor acts
//! as `p`, and the pairing is bounded by `p|T||φ|²`.

use drift_hodge::complex::exterior::{contraction_bound_check, wedge_contract, PointwiseForm};
use drift_hodge::manifold::SymmetricTwoTensor;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> drift_hodge::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in 2..=5 {
        for p in 0..=m {
            let mut identity_err: f64 = 0.0;
            let mut min_slack = f64::INFINITY;
            for _ in 0..200 {
                let phi = PointwiseForm::random(m, p, &mut rng)?;
                let id = wedge_contract(&SymmetricTwoTensor::identity(m), &phi)?;
                identity_err = identity_err.max((id.inner(&phi) - p as f64 * phi.norm_sq()).abs());
                let t = SymmetricTwoTensor::new(DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0)))?;
                min_slack = min_slack.min(contraction_bound_check(&t, &phi)?);
            }
            println!("m = {m}, p = {p}: identity error {identity_err:.1e}, min bound slack {min_slack:.4}");
        }
    }
    Ok(())
}

//! Fixtures shared by the benchmarks.

use pqbbh::analysis::default_schedule;
use pqbbh::exact::{random_input, IdentityId, IdentityInput};
use pqbbh::{BivariateOperator, OperatorSpec, PqParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Degrees swept by the scaling benchmarks.
pub const DEGREES: [usize; 4] = [8, 32, 128, 512];

pub fn params(n: usize) -> PqParams {
    default_schedule(n).expect("default schedule is valid for n >= 1")
}

pub fn operator(n: usize) -> BivariateOperator {
    BivariateOperator::new(OperatorSpec::symmetric(n, params(n)).expect("positive degree"))
}

/// A fixed batch of exact-identity inputs.
pub fn exact_inputs(id: IdentityId, count: usize) -> Vec<IdentityInput> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..count).map(|_| random_input(id, &mut rng)).collect()
}

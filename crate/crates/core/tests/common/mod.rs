//! Shared helpers for the integration suites: seeded random rationals,
//! jets, and operator corpora.

use jetpde::multiindex::indices_of_height;
use jetpde::{MultiIndex, OperatorSpec, Rat, RatJet, RatJetSpace};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_rat(rng: &mut ChaCha8Rng) -> Rat {
    let num: i64 = rng.gen_range(-9..=9);
    let den: i64 = rng.gen_range(1..=9);
    Rat::new(num.into(), den.into())
}

pub fn rand_base(n: usize, rng: &mut ChaCha8Rng) -> Vec<Rat> {
    (0..n).map(|_| rand_rat(rng)).collect()
}

/// Dense random jet with coefficients up to `max_height`.
pub fn rand_jet(space: &RatJetSpace, rng: &mut ChaCha8Rng, max_height: usize) -> RatJet {
    let mut coeffs: Vec<(MultiIndex, Rat)> = Vec::new();
    for h in 0..=max_height.min(space.order()) {
        for ix in indices_of_height(space.n(), h) {
            coeffs.push((ix, rand_rat(rng)));
        }
    }
    space.from_coeffs(coeffs)
}

/// Random operator with affine-plus-quadratic coefficient jets.
pub fn rand_operator(
    n: usize,
    k: usize,
    p: usize,
    q: usize,
    order: usize,
    rng: &mut ChaCha8Rng,
) -> OperatorSpec<Rat> {
    let space = RatJetSpace::new(n, order, rand_base(n, rng));
    let mut spec = OperatorSpec::new(n, k, p, q, space.clone());
    let table = jetpde::IndexTable::new(n, k);
    for u in 1..=q {
        for s in 0..table.len() {
            let key = table.unrank(s).clone();
            for v in 1..=p {
                spec.set_coeff(u, &key, v, rand_jet(&space, rng, 2));
            }
        }
    }
    spec
}

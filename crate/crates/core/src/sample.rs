//! Seeded random sampling. Every random choice in the crate goes through a
//! `ChaCha8Rng`, so a seed fixes all outputs.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numkit::scalar::{int, rat, CFloat, Rational};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream derived from a base seed and a label.
pub fn substream(seed: u64, label: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(label);
    r
}

pub fn small_int(r: &mut SeededRng, bound: i64) -> i64 {
    r.gen_range(-bound..=bound)
}

pub fn nonzero_int(r: &mut SeededRng, bound: i64) -> i64 {
    loop {
        let v = small_int(r, bound);
        if v != 0 {
            return v;
        }
    }
}

pub fn small_rational(r: &mut SeededRng, bound: i64) -> Rational {
    let d = r.gen_range(1..=bound);
    rat(small_int(r, bound), d)
}

/// A nonzero integer vector of length `n`.
pub fn int_vector(r: &mut SeededRng, n: usize, bound: i64) -> Vec<Rational> {
    loop {
        let v: Vec<i64> = (0..n).map(|_| small_int(r, bound)).collect();
        if v.iter().any(|&x| x != 0) {
            return v.into_iter().map(int).collect();
        }
    }
}

pub fn real_unit(r: &mut SeededRng) -> f64 {
    r.gen_range(-1.0..1.0)
}

pub fn complex_unit(r: &mut SeededRng) -> CFloat {
    Complex::new(real_unit(r), real_unit(r))
}

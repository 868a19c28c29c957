//! Reproducible random polynomial generation for experiments and tests.
//!
//! Every draw takes an explicit seed and uses a counter-based stream cipher
//! generator, so results are identical across platforms and thread counts.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::spectrum::{enumerate_box, BoxSpec, MultiIndex};
use crate::trigpoly::TrigPoly;

/// How coefficients are drawn for the modes of a box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CoeffDistribution {
    /// Independent standard complex Gaussians.
    #[default]
    ComplexGaussian,
    /// Unit modulus, uniform phase.
    UnimodularPhase,
}

/// Draws a polynomial supported on the full box `|lambda_k| <= a_k`.
pub fn draw_full_box(
    spec: &BoxSpec,
    dist: CoeffDistribution,
    seed: u64,
    cap: u128,
) -> Result<TrigPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = TrigPoly::zero(spec.dim());
    for lambda in enumerate_box(spec, cap)? {
        f.add_term(&lambda, draw_coeff(&mut rng, dist))?;
    }
    Ok(f)
}

/// Draws a polynomial supported on `k` distinct modes of the box, sampled
/// without replacement. `k` is clamped to the box cardinality.
pub fn draw_sparse(
    spec: &BoxSpec,
    k: usize,
    dist: CoeffDistribution,
    seed: u64,
    cap: u128,
) -> Result<TrigPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes: Vec<MultiIndex> = enumerate_box(spec, cap)?.collect();
    let k = k.min(modes.len());
    // Partial Fisher-Yates: the first k slots end up a uniform sample.
    for i in 0..k {
        let j = rng.gen_range(i..modes.len());
        modes.swap(i, j);
    }
    modes.truncate(k);
    modes.sort();
    let mut f = TrigPoly::zero(spec.dim());
    for lambda in &modes {
        f.add_term(lambda, draw_coeff(&mut rng, dist))?;
    }
    Ok(f)
}

fn draw_coeff(rng: &mut ChaCha8Rng, dist: CoeffDistribution) -> Complex64 {
    match dist {
        CoeffDistribution::ComplexGaussian => {
            // Box-Muller; two uniforms per component pair.
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = std::f64::consts::TAU * u2;
            Complex64::new(r * theta.cos(), r * theta.sin()) / std::f64::consts::SQRT_2
        }
        CoeffDistribution::UnimodularPhase => {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(1.0, theta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::DEFAULT_ENUMERATION_CAP;

    #[test]
    fn full_box_has_all_modes() {
        let spec = BoxSpec::new(vec![1, 1]).unwrap();
        let f = draw_full_box(
            &spec,
            CoeffDistribution::ComplexGaussian,
            7,
            DEFAULT_ENUMERATION_CAP,
        )
        .unwrap();
        assert_eq!(f.num_terms(), 9);
    }

    #[test]
    fn draws_are_seed_deterministic() {
        let spec = BoxSpec::new(vec![2, 2]).unwrap();
        let a = draw_full_box(
            &spec,
            CoeffDistribution::ComplexGaussian,
            42,
            DEFAULT_ENUMERATION_CAP,
        )
        .unwrap();
        let b = draw_full_box(
            &spec,
            CoeffDistribution::ComplexGaussian,
            42,
            DEFAULT_ENUMERATION_CAP,
        )
        .unwrap();
        assert_eq!(a.to_literal(), b.to_literal());
        let c = draw_full_box(
            &spec,
            CoeffDistribution::ComplexGaussian,
            43,
            DEFAULT_ENUMERATION_CAP,
        )
        .unwrap();
        assert_ne!(a.to_literal(), c.to_literal());
    }

    #[test]
    fn sparse_draw_mode_count_and_support() {
        let spec = BoxSpec::new(vec![3, 3]).unwrap();
        let f = draw_sparse(
            &spec,
            10,
            CoeffDistribution::UnimodularPhase,
            1,
            DEFAULT_ENUMERATION_CAP,
        )
        .unwrap();
        assert_eq!(f.num_terms(), 10);
        for (lambda, c) in f.terms() {
            assert!(spec.contains(lambda));
            assert!((c.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sparse_draw_clamps_to_cardinality() {
        let spec = BoxSpec::new(vec![1]).unwrap();
        let f = draw_sparse(
            &spec,
            100,
            CoeffDistribution::ComplexGaussian,
            5,
            DEFAULT_ENUMERATION_CAP,
        )
        .unwrap();
        assert_eq!(f.num_terms(), 3);
    }
}

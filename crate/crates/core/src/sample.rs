//! Seeded, reproducible sampling of points and maps.
//!
//! Every stochastic grid in the crate goes through these helpers with an
//! explicit seed, so CLI runs and tests are bit-reproducible.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::innerseq::BlaschkeMap;

/// RNG used everywhere sampling is needed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` points distributed uniformly (by area) over the disc of the given
/// radius, excluding the origin only by chance.
pub fn disc_points(rng: &mut impl Rng, radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let t = TAU * rng.gen::<f64>();
            Complex64::from_polar(r, t)
        })
        .collect()
}

/// `count` equally spaced points on the circle of the given radius.
pub fn circle_points(radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|j| Complex64::from_polar(radius, TAU * j as f64 / count as f64))
        .collect()
}

/// Square lattice of side `side` over `[-radius, radius]²`, restricted to the
/// open disc of that radius.
pub fn lattice_in_disc(radius: f64, side: usize) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            let x = radius * (2.0 * (i as f64 + 0.5) / side as f64 - 1.0);
            let y = radius * (2.0 * (j as f64 + 0.5) / side as f64 - 1.0);
            let z = Complex64::new(x, y);
            if z.norm() < radius {
                pts.push(z);
            }
        }
    }
    pts
}

/// Random degree-2 Blaschke map fixing the origin with derivative modulus
/// exactly `lambda`: zeros `[0, λ·e^{iθ}]` and a random rotation.
pub fn blaschke_with_lambda(rng: &mut impl Rng, lambda: f64) -> BlaschkeMap {
    let theta = TAU * rng.gen::<f64>();
    let psi = TAU * rng.gen::<f64>();
    BlaschkeMap::new(
        vec![Complex64::ZERO, Complex64::from_polar(lambda, theta)],
        Complex64::from_polar(1.0, psi),
    )
    .expect("zeros are inside the disc by construction")
}

/// Random Blaschke map fixing the origin, with degree between 1 and
/// `max_degree` and non-origin zeros of modulus at most `max_zero_modulus`.
pub fn random_blaschke(rng: &mut impl Rng, max_degree: u32, max_zero_modulus: f64) -> BlaschkeMap {
    let degree = rng.gen_range(1..=max_degree.max(1));
    let mut zeros = vec![Complex64::ZERO];
    for _ in 1..degree {
        let r = max_zero_modulus * rng.gen::<f64>().sqrt().max(1e-3);
        let t = TAU * rng.gen::<f64>();
        zeros.push(Complex64::from_polar(r, t));
    }
    let psi = TAU * rng.gen::<f64>();
    BlaschkeMap::new(zeros, Complex64::from_polar(1.0, psi))
        .expect("zeros are inside the disc by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_points_stay_in_radius_and_are_reproducible() {
        let a = disc_points(&mut rng(7), 0.5, 100);
        let b = disc_points(&mut rng(7), 0.5, 100);
        assert_eq!(a, b);
        assert!(a.iter().all(|z| z.norm() <= 0.5));
    }

    #[test]
    fn lattice_respects_open_disc() {
        let pts = lattice_in_disc(0.25, 50);
        assert!(pts.iter().all(|z| z.norm() < 0.25));
        assert!(pts.len() > 1500);
    }

    #[test]
    fn blaschke_with_lambda_hits_the_requested_derivative() {
        let map = blaschke_with_lambda(&mut rng(3), 0.8);
        assert!((map.lambda().unwrap() - 0.8).abs() < 1e-15);
    }
}

//! Dense complex polynomials and a simultaneous root finder.
//!
//! Coefficients are stored lowest degree first. The root finder is
//! Aberth–Ehrlich iteration (all roots at once, no deflation) followed by a
//! Newton polish; it is deterministic and verifies residuals before returning.

use num_complex::Complex64;

use crate::{Error, Result};

const MAX_ABERTH_ITERATIONS: usize = 400;
/// Relative correction size at which the simultaneous iteration stops.
const ABERTH_TOL: f64 = 1e-13;
/// Residuals are measured relative to Σ|c_k|·max(1,|z|)^k.
const RESIDUAL_TOL: f64 = 1e-8;

/// Evaluates `p` and `p'` at `z` by a fused Horner pass.
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::ZERO;
    let mut dp = Complex64::ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Product polynomial (convolution of coefficient vectors).
pub fn multiply(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Complex64::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Formal derivative.
pub fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Monic expansion of ∏ (z − r_k), lowest degree first.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::ONE];
    for &r in roots {
        coeffs = multiply(&coeffs, &[-r, Complex64::ONE]);
    }
    coeffs
}

/// All complex roots of `coeffs`, with multiplicity, in a deterministic order
/// (sorted by real part, then imaginary part).
///
/// Errors with a conditioning diagnostic when the iteration fails to reach the
/// requested residual.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    // Strip (exactly) zero leading coefficients so the degree is honest.
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1] == Complex64::ZERO {
        hi -= 1;
    }
    let coeffs = &coeffs[..hi];
    if coeffs.len() <= 1 {
        return if coeffs.is_empty() {
            Err(Error::RootFinding("zero polynomial has no root set".into()))
        } else {
            Ok(vec![])
        };
    }
    let degree = coeffs.len() - 1;
    let lead = coeffs[degree];

    // Cauchy bound initialization: equally spaced on a circle, with an angular
    // offset so that real-coefficient symmetry cannot trap the iteration.
    let cauchy = 1.0
        + coeffs[..degree]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    let mut zs: Vec<Complex64> = (0..degree)
        .map(|k| {
            Complex64::from_polar(
                cauchy * 0.9,
                std::f64::consts::TAU * k as f64 / degree as f64 + 0.7,
            )
        })
        .collect();

    for _ in 0..MAX_ABERTH_ITERATIONS {
        let mut worst = 0.0f64;
        for i in 0..degree {
            let (p, dp) = eval_with_derivative(coeffs, zs[i]);
            if p == Complex64::ZERO {
                continue;
            }
            if dp == Complex64::ZERO {
                // Sitting on a critical point: nudge deterministically.
                let bump = 1e-8 * (1.0 + zs[i].norm());
                zs[i] += Complex64::new(bump, 1e-8);
                worst = worst.max(1.0);
                continue;
            }
            let newton = p / dp;
            let mut repulsion = Complex64::ZERO;
            for j in 0..degree {
                if j != i {
                    let d = zs[i] - zs[j];
                    if d != Complex64::ZERO {
                        repulsion += d.inv();
                    }
                }
            }
            let denom = Complex64::ONE - newton * repulsion;
            let step = if denom.norm() > 1e-300 {
                newton / denom
            } else {
                newton
            };
            zs[i] -= step;
            worst = worst.max(step.norm() / (1.0 + zs[i].norm()));
        }
        if worst < ABERTH_TOL {
            break;
        }
    }

    // One Newton polish per root.
    for z in zs.iter_mut() {
        let (p, dp) = eval_with_derivative(coeffs, *z);
        if dp != Complex64::ZERO {
            *z -= p / dp;
        }
    }

    // Residual verification relative to the coefficient scale at each root.
    for &z in &zs {
        let (p, _) = eval_with_derivative(coeffs, z);
        let scale: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm() * z.norm().max(1.0).powi(k as i32))
            .sum();
        if p.norm() > RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::RootFinding(format!(
                "residual {:.3e} at root estimate {z} exceeds {:.1e}×scale \
                 (degree {degree}, coefficient scale {scale:.3e}); \
                 the polynomial is ill-conditioned near this root",
                p.norm(),
                RESIDUAL_TOL,
            )));
        }
    }

    zs.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(zs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_root_multiset_eq(got: &[Complex64], want: &[Complex64], tol: f64) {
        assert_eq!(got.len(), want.len());
        let mut used = vec![false; want.len()];
        for g in got {
            let hit = want
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|(_, a), (_, b)| {
                    (g - **a).norm().partial_cmp(&(g - **b).norm()).unwrap()
                })
                .map(|(i, w)| ((g - w).norm(), i))
                .expect("nonempty");
            assert!(hit.0 < tol, "root {g} missed every target by ≥ {tol}");
            used[hit.1] = true;
        }
    }

    #[test]
    fn quadratic_with_known_roots() {
        // z² − 1
        let r = roots(&[
            Complex64::new(-1.0, 0.0),
            Complex64::ZERO,
            Complex64::ONE,
        ])
        .unwrap();
        assert_root_multiset_eq(
            &r,
            &[Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
            1e-12,
        );
    }

    #[test]
    fn cubic_from_factored_form() {
        let want = [
            Complex64::new(0.3, 0.0),
            Complex64::new(0.0, -0.5),
            Complex64::new(0.9, 0.0),
        ];
        let r = roots(&from_roots(&want)).unwrap();
        assert_root_multiset_eq(&r, &want, 1e-10);
    }

    #[test]
    fn roots_of_unity_scaled() {
        // z^8 = w has 8 roots of modulus |w|^{1/8}.
        let w = Complex64::new(0.3, 0.4);
        let mut coeffs = vec![Complex64::ZERO; 9];
        coeffs[0] = -w;
        coeffs[8] = Complex64::ONE;
        let r = roots(&coeffs).unwrap();
        assert_eq!(r.len(), 8);
        for z in &r {
            assert!((z.powu(8) - w).norm() < 1e-12);
            assert!((z.norm() - w.norm().powf(0.125)).abs() < 1e-12);
        }
    }

    #[test]
    fn double_root_recovered_with_loose_accuracy() {
        let want = [Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)];
        let r = roots(&from_roots(&want)).unwrap();
        // A double root is only determined to ~sqrt(eps).
        assert_root_multiset_eq(&r, &want, 1e-6);
    }

    #[test]
    fn constant_polynomial_has_no_roots() {
        assert!(roots(&[Complex64::ONE]).unwrap().is_empty());
    }

    #[test]
    fn zero_polynomial_errors() {
        assert!(roots(&[Complex64::ZERO, Complex64::ZERO]).is_err());
    }

    prop_compose! {
        fn root_candidates()(v in proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..7)) -> Vec<Complex64> {
            v.into_iter().map(|(x, y)| Complex64::new(x, y)).collect()
        }
    }

    proptest! {
        #[test]
        fn random_separated_roots_are_recovered(cands in root_candidates()) {
            let mut want: Vec<Complex64> = Vec::new();
            for c in cands {
                if want.iter().all(|w| (w - c).norm() > 0.1) {
                    want.push(c);
                }
            }
            prop_assume!(!want.is_empty());
            let got = roots(&from_roots(&want)).unwrap();
            assert_root_multiset_eq(&got, &want, 1e-7);
        }

        #[test]
        fn derivative_matches_difference_quotient(x in -1.0..1.0f64, y in -1.0..1.0f64) {
            let coeffs = from_roots(&[
                Complex64::new(0.2, 0.1),
                Complex64::new(-0.4, 0.3),
                Complex64::new(0.0, -0.6),
            ]);
            let z = Complex64::new(x, y);
            let h = 1e-6;
            let (_, dp) = eval_with_derivative(&coeffs, z);
            let (p_plus, _) = eval_with_derivative(&coeffs, z + h);
            let (p_minus, _) = eval_with_derivative(&coeffs, z - h);
            let fd = (p_plus - p_minus) / (2.0 * h);
            prop_assert!((dp - fd).norm() < 1e-7);
        }
    }
}

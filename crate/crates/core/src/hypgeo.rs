//! Hyperbolic geometry of the disc, round annuli, and the punctured disc, all
//! at curvature −1.
//!
//! A round annulus of modulus `μ` is `{e^{-2πμ} < |z| < 1}`; its core geodesic
//! is the circle `|z| = e^{-πμ}` with length `ℓ = π/μ`. Points are tracked by
//! the angle coordinate `θ = log(1/|z|)/(2μ) ∈ (0, π)` (the core sits at
//! `θ = π/2`), in which the density is `1/(2μ|z| sin θ)`, the distance to the
//! core is `|log tan(θ/2)|`, and the shortest deck loop through the point has
//! length `2·arcsinh(sinh(ℓ/2)/sin θ)`.
//!
//! The punctured disc `{0 < |z| < 1}` has density `1/(|z| log(1/|z|))`; the
//! horocycle `|z| = s` has length `2π/log(1/s)` and the cusp coordinate is the
//! log of that length, with the standard collar at `p ≤ log 2`.

use num_complex::Complex64;

use crate::innerseq::BlaschkeMap;
use crate::{check_in_disc, check_positive, Error, Result};

/// Hyperbolic distance in the unit disc:
/// `d(z, w) = 2 artanh |(z − w)/(1 − z̄ w)|`.
pub fn hyp_dist(z: Complex64, w: Complex64) -> Result<f64> {
    check_in_disc(z)?;
    check_in_disc(w)?;
    // |a/b| computed as |a|/|b| so the result is bitwise symmetric in (z, w):
    // swapping conjugates the denominator, which preserves its norm exactly.
    let t = (z - w).norm() / (Complex64::ONE - z.conj() * w).norm();
    Ok(2.0 * t.atanh())
}

/// Hyperbolic distortion `|B'(z)|·(1−|z|²)/(1−|B(z)|²)` of a Blaschke map at
/// `z`; the Schwarz–Pick lemma bounds it by 1, with equality only for disc
/// automorphisms.
pub fn hyp_distortion(map: &BlaschkeMap, z: Complex64) -> Result<f64> {
    let (v, d) = map.eval_with_derivative(z)?;
    Ok(d.norm() * (1.0 - z.norm_sqr()) / (1.0 - v.norm_sqr()))
}

/// Round annulus `{e^{-2πμ} < |z| < 1}` of modulus `μ > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StdAnnulus {
    modulus: f64,
}

impl StdAnnulus {
    pub fn new(modulus: f64) -> Result<Self> {
        check_positive("annulus modulus", modulus)?;
        Ok(Self { modulus })
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    /// Inner boundary radius `e^{-2πμ}` (underflows to 0 for huge moduli; the
    /// angle coordinate remains usable regardless).
    pub fn inner_radius(&self) -> f64 {
        (-2.0 * std::f64::consts::PI * self.modulus).exp()
    }

    /// Radius of the core geodesic, `e^{-πμ}`.
    pub fn core_radius(&self) -> f64 {
        (-std::f64::consts::PI * self.modulus).exp()
    }

    /// Angle coordinate `θ = log(1/s)/(2μ)`; errors unless `θ ∈ (0, π)`,
    /// i.e. unless the circle `|z| = s` lies inside the annulus.
    pub fn angle_coordinate(&self, s: f64) -> Result<f64> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::OutsideAnnulus {
                radius: s,
                modulus: self.modulus,
            });
        }
        let theta = (1.0 / s).ln() / (2.0 * self.modulus);
        if theta > 0.0 && theta < std::f64::consts::PI {
            Ok(theta)
        } else {
            Err(Error::OutsideAnnulus {
                radius: s,
                modulus: self.modulus,
            })
        }
    }

    /// Whether `z` lies strictly inside the annulus.
    pub fn contains(&self, z: Complex64) -> bool {
        self.angle_coordinate(z.norm()).is_ok()
    }

    /// Hyperbolic density at radius `s`: `1/(2μ s sin θ)`.
    pub fn density(&self, s: f64) -> Result<f64> {
        let theta = self.angle_coordinate(s)?;
        Ok(1.0 / (2.0 * self.modulus * s * theta.sin()))
    }

    /// Distance from the circle `|z| = s` to the core geodesic:
    /// `|log tan(θ/2)|`.
    pub fn core_distance(&self, s: f64) -> Result<f64> {
        let theta = self.angle_coordinate(s)?;
        Ok((theta / 2.0).tan().ln().abs())
    }
}

/// Length of the core geodesic: `ℓ = π/μ`.
pub fn annulus_core_length(annulus: &StdAnnulus) -> f64 {
    std::f64::consts::PI / annulus.modulus()
}

/// Injectivity radius at the circle `|z| = s`: half the shortest deck loop,
/// `arcsinh(sinh(ℓ/2)/sin θ)`. Equals `ℓ/2` exactly on the core.
pub fn annulus_injectivity(annulus: &StdAnnulus, s: f64) -> Result<f64> {
    let theta = annulus.angle_coordinate(s)?;
    let half_core = annulus_core_length(annulus) / 2.0;
    // sinh overflows past ~709; switch to the asymptotic form there.
    if half_core > 350.0 {
        Ok(half_core + (1.0 / theta.sin()).ln())
    } else {
        Ok((half_core.sinh() / theta.sin()).asinh())
    }
}

/// Half-width of the standard collar around a geodesic of length `ℓ`:
/// `η(ℓ) = ½ log((cosh(ℓ/2)+1)/(cosh(ℓ/2)−1)) = log coth(ℓ/4)`.
pub fn collar_width(core_length: f64) -> Result<f64> {
    check_positive("core length", core_length)?;
    Ok((1.0 / (core_length / 4.0).tanh()).ln())
}

/// Universal lower bound for the injectivity radius at distance `d ≥ 0`
/// from the boundary-facing end of a collar: `½ e^{-d}`.
pub fn collar_inj_lower_bound(distance: f64) -> Result<f64> {
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(Error::BadParameter {
            what: "distance into the collar (must be ≥ 0)",
            value: distance,
        });
    }
    Ok(0.5 * (-distance).exp())
}

/// Injectivity radius in the cusp collar at cusp coordinate `p` (log of the
/// horocycle length, collar boundary at `p = log 2`): half the horocycle
/// length, `½ e^p`. Errors outside the collar.
pub fn cusp_injectivity(p: f64) -> Result<f64> {
    if !(p.is_finite() && p <= 2f64.ln()) {
        return Err(Error::OutsideCollar(p));
    }
    Ok(0.5 * p.exp())
}

/// Punctured unit disc `{0 < |z| < 1}` with its cusp at the origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StdPuncturedDisc;

impl StdPuncturedDisc {
    fn check_radius(s: f64) -> Result<f64> {
        if s.is_finite() && s > 0.0 && s < 1.0 {
            Ok(s)
        } else {
            Err(Error::BadParameter {
                what: "punctured-disc radius (must lie in (0,1))",
                value: s,
            })
        }
    }

    /// Hyperbolic density at radius `s`: `1/(s log(1/s))`.
    pub fn density(s: f64) -> Result<f64> {
        let s = Self::check_radius(s)?;
        Ok(1.0 / (s * (1.0 / s).ln()))
    }

    /// Length of the horocycle `|z| = s`: `2π/log(1/s)`.
    pub fn horocycle_length(s: f64) -> Result<f64> {
        let s = Self::check_radius(s)?;
        Ok(2.0 * std::f64::consts::PI / (1.0 / s).ln())
    }

    /// Cusp coordinate `p = log(horocycle length)`.
    pub fn cusp_coordinate(s: f64) -> Result<f64> {
        Ok(Self::horocycle_length(s)?.ln())
    }

    /// Whether the circle `|z| = s` lies in the standard cusp collar
    /// (horocycle length ≤ 2, i.e. `s ≤ e^{-π}`).
    pub fn in_collar(s: f64) -> Result<bool> {
        Ok(Self::cusp_coordinate(s)? <= 2f64.ln())
    }
}

/// Standard collar of a geodesic or cusp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CollarSpec {
    /// Tube of half-width `width = η(core_length)` around a closed geodesic.
    Geodesic { core_length: f64, width: f64 },
    /// Cusp neighbourhood out to the horocycle of length 2 (infinite width).
    Cusp,
}

impl CollarSpec {
    pub fn geodesic(core_length: f64) -> Result<Self> {
        Ok(Self::Geodesic {
            core_length,
            width: collar_width(core_length)?,
        })
    }

    pub fn cusp() -> Self {
        Self::Cusp
    }

    pub fn width(&self) -> f64 {
        match self {
            Self::Geodesic { width, .. } => *width,
            Self::Cusp => f64::INFINITY,
        }
    }
}

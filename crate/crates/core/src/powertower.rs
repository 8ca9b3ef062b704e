//! Towers of power maps `z ↦ z^{d_n}` between round annuli or punctured
//! discs.
//!
//! On annuli the modulus multiplies: a degree-`d` power map carries the
//! annulus of modulus `μ` onto the annulus of modulus `d·μ`, preserving the
//! angle coordinate `θ = log(1/|z|)/(2μ)`. Accumulated degrees `D_n = ∏ d_k`
//! are kept as big integers and moduli as exact rationals, so the geometry
//! stays exact far beyond the range of doubles.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use std::f64::consts::{PI, TAU};

use crate::hypgeo::{cusp_injectivity, StdAnnulus, StdPuncturedDisc};
use crate::{check_positive, Error, Result};

/// Natural log of a big integer, usable far past the f64 overflow range.
fn ln_biguint(d: &BigUint) -> f64 {
    let bits = d.bits();
    if bits <= 1000 {
        return d.to_f64().expect("small BigUint converts").ln();
    }
    let shift = bits - 53;
    let top = (d >> shift).to_f64().expect("53-bit BigUint converts");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Degree schedule `d_n ≥ 1` of the tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DegreeRule {
    Constant(u32),
    Periodic { head: Vec<u32>, cycle: Vec<u32> },
}

impl DegreeRule {
    fn validate(&self) -> Result<()> {
        let all = |ds: &[u32]| ds.iter().all(|&d| d >= 1);
        let ok = match self {
            DegreeRule::Constant(d) => *d >= 1,
            DegreeRule::Periodic { head, cycle } => !cycle.is_empty() && all(head) && all(cycle),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BadParameter {
                what: "degree rule (needs all degrees ≥ 1 and a nonempty cycle)",
                value: 0.0,
            })
        }
    }

    pub fn at(&self, n: usize) -> u32 {
        match self {
            DegreeRule::Constant(d) => *d,
            DegreeRule::Periodic { head, cycle } => head
                .get(n)
                .copied()
                .unwrap_or_else(|| cycle[(n - head.len()) % cycle.len()]),
        }
    }

    /// Whether `d_n = 1` for all large `n`.
    pub fn eventually_one(&self) -> bool {
        match self {
            DegreeRule::Constant(d) => *d == 1,
            DegreeRule::Periodic { cycle, .. } => cycle.iter().all(|&d| d == 1),
        }
    }

    /// Whether `d_n ≥ 2` infinitely often (the negation of
    /// [`Self::eventually_one`], since the tail is periodic).
    pub fn degrees_ge2_infinitely_often(&self) -> bool {
        !self.eventually_one()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TowerKind {
    Annulus,
    PuncturedDisc,
}

/// A point at level `n` of a tower.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TowerPoint {
    pub n: usize,
    pub z: Complex64,
}

/// Sequence of power maps acting level-by-level on round annuli (base modulus
/// `μ_0`) or on the punctured disc.
#[derive(Clone, Debug, PartialEq)]
pub struct CoveringTower {
    kind: TowerKind,
    mu0: Option<f64>,
    degrees: DegreeRule,
}

impl CoveringTower {
    pub fn annulus(mu0: f64, degrees: DegreeRule) -> Result<Self> {
        check_positive("base modulus", mu0)?;
        degrees.validate()?;
        Ok(Self {
            kind: TowerKind::Annulus,
            mu0: Some(mu0),
            degrees,
        })
    }

    pub fn punctured_disc(degrees: DegreeRule) -> Result<Self> {
        degrees.validate()?;
        Ok(Self {
            kind: TowerKind::PuncturedDisc,
            mu0: None,
            degrees,
        })
    }

    pub fn kind(&self) -> TowerKind {
        self.kind
    }

    pub fn degrees(&self) -> &DegreeRule {
        &self.degrees
    }

    pub fn degree_at(&self, n: usize) -> u32 {
        self.degrees.at(n)
    }

    /// `D_n = ∏_{k<n} d_k`, exactly.
    pub fn total_degree(&self, n: usize) -> BigUint {
        let mut d = BigUint::one();
        for k in 0..n {
            d *= BigUint::from(self.degrees.at(k));
        }
        d
    }

    /// Modulus of the level-`n` annulus, exactly: `μ_n = μ_0 · D_n`.
    pub fn push_modulus_exact(&self, n: usize) -> Result<BigRational> {
        let mu0 = self.mu0.ok_or(Error::Hypothesis(
            "punctured-disc towers carry no modulus".into(),
        ))?;
        let base = BigRational::from_float(mu0)
            .expect("validated modulus is finite");
        Ok(base * BigRational::from_integer(BigInt::from(self.total_degree(n))))
    }

    /// Modulus of the level-`n` annulus as a double (one rounding from the
    /// exact rational; +∞ once doubles are exhausted).
    pub fn push_modulus(&self, n: usize) -> Result<f64> {
        let exact = self.push_modulus_exact(n)?;
        Ok(exact.to_f64().unwrap_or(f64::INFINITY))
    }

    /// The level-`n` annulus model.
    pub fn level_annulus(&self, n: usize) -> Result<StdAnnulus> {
        StdAnnulus::new(self.push_modulus(n)?)
    }

    /// Strict membership of a point in its level model.
    pub fn contains(&self, p: &TowerPoint) -> Result<bool> {
        match self.kind {
            TowerKind::Annulus => Ok(self.level_annulus(p.n)?.contains(p.z)),
            TowerKind::PuncturedDisc => {
                let s = p.z.norm();
                Ok(s > 0.0 && s < 1.0)
            }
        }
    }

    fn check_point(&self, p: &TowerPoint) -> Result<()> {
        if self.contains(p)? {
            Ok(())
        } else {
            match self.kind {
                TowerKind::Annulus => Err(Error::OutsideAnnulus {
                    radius: p.z.norm(),
                    modulus: self.push_modulus(p.n)?,
                }),
                TowerKind::PuncturedDisc => Err(Error::BadParameter {
                    what: "tower point (needs 0 < |z| < 1)",
                    value: p.z.norm(),
                }),
            }
        }
    }
}

/// Applies the level-`n` power map: `(n, z) ↦ (n+1, z^{d_n})`. The angle
/// coordinate is preserved on annuli and the cusp coordinate drops by
/// `log d_n` on punctured discs.
pub fn tower_map(tower: &CoveringTower, p: &TowerPoint) -> Result<TowerPoint> {
    tower.check_point(p)?;
    let d = tower.degree_at(p.n);
    Ok(TowerPoint {
        n: p.n + 1,
        z: p.z.powu(d),
    })
}

/// Angular gap `2π/D_k` between adjacent level-0 preimages of a point on a
/// level-`k` circle. A positive floor on grand-orbit gaps would have to beat
/// this for every `k`.
pub fn indiscreteness_witness(tower: &CoveringTower, p: &TowerPoint, k: usize) -> Result<f64> {
    if p.n != 0 {
        return Err(Error::BadIndex {
            what: "witness base level (must be 0)",
            value: p.n,
        });
    }
    tower.check_point(p)?;
    let d = tower.total_degree(k).to_f64().unwrap_or(f64::INFINITY);
    Ok(TAU / d)
}

/// Injectivity radii along a tower orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct InjDecay {
    /// `values[i]` is the injectivity radius at the level-`i` image of the
    /// start point.
    pub values: Vec<f64>,
    /// True when the requested length outran double precision (the remaining
    /// radii underflow to 0).
    pub truncated: bool,
}

/// Injectivity radius at each level image of `p` for `len` levels, computed
/// in closed form from the conserved transverse coordinate (angle θ on
/// annuli, cusp coordinate on punctured discs) — no orbit points are
/// materialized, so the answer is exact even where `|z|^{D_n}` underflows.
pub fn inj_decay(tower: &CoveringTower, p: &TowerPoint, len: usize) -> Result<InjDecay> {
    if p.n != 0 {
        return Err(Error::BadIndex {
            what: "decay start level (must be 0)",
            value: p.n,
        });
    }
    tower.check_point(p)?;
    let mut values = Vec::with_capacity(len);
    let mut truncated = false;
    match tower.kind {
        TowerKind::Annulus => {
            let theta = tower.level_annulus(0)?.angle_coordinate(p.z.norm())?;
            for i in 0..len {
                let mu = tower.push_modulus(i)?;
                if !mu.is_finite() {
                    truncated = true;
                    break;
                }
                // arcsinh(sinh(ℓ_i/2)/sin θ) with ℓ_i = π/μ_i.
                let inj = ((PI / mu / 2.0).sinh() / theta.sin()).asinh();
                if inj <= 0.0 {
                    truncated = true;
                    break;
                }
                values.push(inj);
            }
        }
        TowerKind::PuncturedDisc => {
            let p0 = StdPuncturedDisc::cusp_coordinate(p.z.norm())?;
            if p0 > 2f64.ln() {
                return Err(Error::OutsideCollar(p0));
            }
            for i in 0..len {
                let pi_coord = p0 - ln_biguint(&tower.total_degree(i));
                let inj = cusp_injectivity(pi_coord)?;
                if inj <= 0.0 {
                    truncated = true;
                    break;
                }
                values.push(inj);
            }
        }
    }
    Ok(InjDecay { values, truncated })
}

/// A rotated power map `f(z) = e^{iα} z^{d}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatedPower {
    pub alpha: f64,
    pub degree: u32,
}

impl RotatedPower {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, self.alpha) * z.powu(self.degree)
    }
}

/// Rotation angles `β_n` with `φ_n(z) = e^{iβ_n} z` conjugating the rotated
/// powers to plain powers: `φ_{n+1} ∘ f_n = (φ_n)^{d_n}` forces
/// `β_{n+1} = d_n β_n − α_n`, `β_0 = 0`. Returns `maps.len() + 1` angles.
pub fn rotation_corrections(maps: &[RotatedPower]) -> Vec<f64> {
    let mut betas = Vec::with_capacity(maps.len() + 1);
    betas.push(0.0);
    for (n, f) in maps.iter().enumerate() {
        betas.push(f.degree as f64 * betas[n] - f.alpha);
    }
    betas
}

/// Sup over the points of `|φ_{n+1}(f_n(z)) − (φ_n(z))^{d_n}|` with
/// `φ_n(z) = e^{iβ_n} z`. Zero (to rounding) exactly when the `β_n` satisfy
/// the conjugacy recursion.
pub fn conjugacy_residual(
    tower: &CoveringTower,
    maps: &[RotatedPower],
    phi_rotations: &[f64],
    points: &[TowerPoint],
) -> Result<f64> {
    for (level, f) in maps.iter().enumerate() {
        let expected = tower.degree_at(level);
        if f.degree != expected {
            return Err(Error::DegreeMismatch {
                level,
                expected,
                got: f.degree,
            });
        }
    }
    let mut sup = 0.0f64;
    for p in points {
        if p.n >= maps.len() || p.n + 1 >= phi_rotations.len() {
            return Err(Error::BadIndex {
                what: "point level (needs maps[n] and φ_{n+1})",
                value: p.n,
            });
        }
        tower.check_point(p)?;
        let f = maps[p.n];
        let lhs = Complex64::from_polar(1.0, phi_rotations[p.n + 1]) * f.eval(p.z);
        let rhs = (Complex64::from_polar(1.0, phi_rotations[p.n]) * p.z).powu(f.degree);
        sup = sup.max((lhs - rhs).norm());
    }
    Ok(sup)
}

/// Equally spaced points on the core geodesic circle of the level-`level`
/// annulus.
pub fn core_circle_points(
    tower: &CoveringTower,
    level: usize,
    count: usize,
) -> Result<Vec<TowerPoint>> {
    if tower.kind() != TowerKind::Annulus {
        return Err(Error::Hypothesis(
            "core circles exist only in annulus towers".into(),
        ));
    }
    let radius = tower.level_annulus(level)?.core_radius();
    Ok((0..count)
        .map(|j| TowerPoint {
            n: level,
            z: Complex64::from_polar(radius, TAU * j as f64 / count as f64),
        })
        .collect())
}

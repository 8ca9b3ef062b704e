//! Grand-orbit samples and discreteness detection.
//!
//! Two points are grand-orbit related when forward compositions eventually
//! send them to the same point. The time-0 slice of the grand orbit of a
//! base point is sampled by pushing the base forward `depth` steps and
//! pulling the image back through the same maps; the slices are nested in
//! `depth`, so only the deepest is materialized.

use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::TAU;

use crate::hypgeo::hyp_dist;
use crate::innerseq::{BlaschkeMap, MapSequence, Verdict};
use crate::powertower::CoveringTower;
use crate::{check_in_disc, poly, Error, Result};

/// Largest map degree the algebraic preimage solver accepts.
const PREIMAGE_DEGREE_CAP: usize = 64;
/// A polished preimage must reproduce its image this well.
const PREIMAGE_RESIDUAL: f64 = 1e-9;
/// Points closer than this (Euclidean) are one grand-orbit point.
const DEDUP_GAP: f64 = 1e-10;
/// Minimum-gap statistics only use points with `|z| ≤ GAP_RADIUS`, where the
/// hyperbolic metric is still moderate.
const GAP_RADIUS: f64 = 0.9;
/// Classification horizon used by the structural tier of the detector.
const DETECT_HORIZON: usize = 10_000;

/// All solutions of `B(z) = w` in the open disc, with multiplicity. A
/// degree-`d` Blaschke product is a proper self-map of the disc, so there are
/// exactly `d` of them; they are found as roots of `ρN(z) − w·D(z)` and then
/// Newton-polished against `B` itself.
pub fn preimages(map: &BlaschkeMap, w: Complex64) -> Result<Vec<Complex64>> {
    check_in_disc(w)?;
    let degree = map.degree();
    if degree > PREIMAGE_DEGREE_CAP {
        return Err(Error::BadParameter {
            what: "map degree (preimage solver accepts at most 64)",
            value: degree as f64,
        });
    }
    let (numer, denom) = map.rational_coefficients();
    let len = numer.len().max(denom.len());
    let mut coeffs = vec![Complex64::ZERO; len];
    for (i, c) in numer.iter().enumerate() {
        coeffs[i] += c;
    }
    for (i, c) in denom.iter().enumerate() {
        coeffs[i] -= w * c;
    }
    let raw = poly::roots(&coeffs)?;
    if raw.len() != degree {
        return Err(Error::RootFinding(format!(
            "expected {degree} preimages, solver produced {}",
            raw.len()
        )));
    }
    let mut out = Vec::with_capacity(raw.len());
    for mut z in raw {
        // Roots are inside the disc mathematically; nudge rounding strays
        // back in before polishing.
        let n = z.norm();
        if n >= 1.0 {
            z *= (1.0 - 1e-12) / n;
        }
        for _ in 0..4 {
            let (val, der) = map.eval_with_derivative(z)?;
            let err = val - w;
            if err.norm() < 1e-15 || der.norm() == 0.0 {
                break;
            }
            let candidate = z - err / der;
            if candidate.norm_sqr() < 1.0 {
                z = candidate;
            } else {
                break;
            }
        }
        let residual = (map.eval(z)? - w).norm();
        if residual > PREIMAGE_RESIDUAL {
            return Err(Error::RootFinding(format!(
                "preimage residual {residual:.3e} exceeds {PREIMAGE_RESIDUAL:.1e}"
            )));
        }
        out.push(z);
    }
    Ok(out)
}

/// The dynamical system a grand orbit lives in.
pub enum OrbitSystem<'a> {
    Inner(&'a MapSequence),
    Tower(&'a CoveringTower),
}

impl OrbitSystem<'_> {
    fn forward(&self, level: usize, z: Complex64) -> Result<Complex64> {
        match self {
            OrbitSystem::Inner(seq) => seq.map_at(level)?.eval(z),
            OrbitSystem::Tower(t) => Ok(z.powu(t.degree_at(level))),
        }
    }

    fn pullback(&self, level: usize, w: Complex64) -> Result<Vec<Complex64>> {
        match self {
            OrbitSystem::Inner(seq) => {
                let map = seq.map_at(level)?;
                preimages(map.as_ref(), w)
            }
            OrbitSystem::Tower(t) => {
                // d-th roots, computed exactly in polar form.
                let d = t.degree_at(level);
                let r = w.norm().powf(1.0 / f64::from(d));
                let arg = w.arg() / f64::from(d);
                Ok((0..d)
                    .map(|j| Complex64::from_polar(r, arg + TAU * f64::from(j) / f64::from(d)))
                    .collect())
            }
        }
    }
}

/// A finite sample of the time-0 slice of a grand orbit.
#[derive(Clone, Debug)]
pub struct GrandOrbitSample {
    pub base: Complex64,
    pub depth: usize,
    /// Distinct slice points, sorted by (re, im).
    pub points: Vec<Complex64>,
    /// Minimum pairwise hyperbolic distance among points with `|z| ≤ 0.9`,
    /// or +∞ when fewer than two qualify.
    pub min_gap: f64,
    /// True when the point cap cut the pullback short.
    pub truncated: bool,
}

/// Collapse points that agree to within `DEDUP_GAP`, keeping first-seen
/// representatives. Spatial hashing keeps this linear.
fn dedup_points(points: Vec<Complex64>) -> Vec<Complex64> {
    let inv = 1.0 / DEDUP_GAP;
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut kept: Vec<Complex64> = Vec::with_capacity(points.len());
    'candidates: for p in points {
        let cx = (p.re * inv).floor() as i64;
        let cy = (p.im * inv).floor() as i64;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = cells.get(&(cx + dx, cy + dy)) {
                    for &i in ids {
                        if (kept[i] - p).norm() < DEDUP_GAP {
                            continue 'candidates;
                        }
                    }
                }
            }
        }
        cells.entry((cx, cy)).or_default().push(kept.len());
        kept.push(p);
    }
    kept
}

fn min_hyperbolic_gap(points: &[Complex64]) -> f64 {
    let eligible: Vec<Complex64> = points
        .iter()
        .copied()
        .filter(|z| z.norm() <= GAP_RADIUS)
        .collect();
    if eligible.len() < 2 {
        return f64::INFINITY;
    }
    let mut min = f64::INFINITY;
    for (i, &z) in eligible.iter().enumerate() {
        for &w in &eligible[i + 1..] {
            let d = hyp_dist(z, w).expect("gap points are inside the disc");
            min = min.min(d);
        }
    }
    min
}

/// Sample the time-0 grand-orbit slice of `base` to the given depth: push
/// the base forward `depth` steps, then pull the image back through the same
/// maps, deduplicating as fibers merge. At most `cap` points are kept per
/// level (`truncated` reports when that bit).
pub fn grand_orbit_sample(
    sys: &OrbitSystem,
    base: Complex64,
    depth: usize,
    cap: usize,
) -> Result<GrandOrbitSample> {
    check_in_disc(base)?;
    if cap < 1 {
        return Err(Error::BadParameter {
            what: "grand-orbit point cap",
            value: cap as f64,
        });
    }
    let mut target = base;
    for m in 0..depth {
        target = sys.forward(m, target)?;
    }
    let mut frontier = vec![target];
    let mut truncated = false;
    for level in (0..depth).rev() {
        let mut next: Vec<Complex64> = Vec::with_capacity(frontier.len() * 2);
        'frontier: for &w in &frontier {
            for z in sys.pullback(level, w)? {
                if next.len() >= cap {
                    truncated = true;
                    break 'frontier;
                }
                next.push(z);
            }
        }
        frontier = dedup_points(next);
    }
    // The base belongs to its own slice; replace its numerical twin with the
    // exact value (or restore it if the cap dropped it).
    match frontier.iter_mut().min_by(|a, b| {
        (**a - base)
            .norm()
            .partial_cmp(&(**b - base).norm())
            .expect("finite distances")
    }) {
        Some(closest) if (*closest - base).norm() < 1e-7 => *closest = base,
        _ => frontier.push(base),
    }
    frontier.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).expect("finite points"));
    let min_gap = min_hyperbolic_gap(&frontier);
    Ok(GrandOrbitSample {
        base,
        depth,
        points: frontier,
        min_gap,
        truncated,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationVerdict {
    Discrete,
    Indiscrete,
    Undetermined,
}

impl std::fmt::Display for RelationVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RelationVerdict::Discrete => "discrete",
            RelationVerdict::Indiscrete => "indiscrete",
            RelationVerdict::Undetermined => "undetermined",
        };
        f.write_str(s)
    }
}

/// Outcome of [`discreteness_detect`].
#[derive(Clone, Debug)]
pub struct DetectReport {
    pub verdict: RelationVerdict,
    /// True when the verdict follows from the structure of the system (known
    /// tail behaviour) rather than from measured gaps.
    pub structural: bool,
    /// `(depth, min_gap)` per requested depth; evidence either way.
    pub gaps: Vec<(usize, f64)>,
    pub note: String,
}

/// Decide whether the time-0 grand-orbit slice of `base` accumulates on
/// itself. Structure wins when available: towers with unbounded total degree
/// are indiscrete, eventually-degree-one towers and non-contracting inner
/// sequences are discrete. Otherwise measured gaps are compared against an
/// explicit envelope, and anything ambiguous stays `Undetermined`.
pub fn discreteness_detect(
    sys: &OrbitSystem,
    base: Complex64,
    depths: &[usize],
    floor: f64,
    cap: usize,
) -> Result<DetectReport> {
    if depths.is_empty() || depths.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::BadParameter {
            what: "depth schedule (needs a strictly increasing, nonempty list)",
            value: depths.len() as f64,
        });
    }
    crate::check_positive("gap floor", floor)?;
    let structural: Option<(RelationVerdict, String)> = match sys {
        OrbitSystem::Tower(t) => {
            if t.degrees().degrees_ge2_infinitely_often() {
                Some((
                    RelationVerdict::Indiscrete,
                    "unbounded total degree splits every candidate gap".into(),
                ))
            } else {
                Some((
                    RelationVerdict::Discrete,
                    "tower is eventually degree one, hence eventually isometric".into(),
                ))
            }
        }
        OrbitSystem::Inner(seq) => match seq.classify(DETECT_HORIZON) {
            Ok(report) => match report.verdict {
                Verdict::Contracting => Some((
                    RelationVerdict::Indiscrete,
                    "contracting sequence: deeper slices shrink every gap".into(),
                )),
                Verdict::SemiContracting | Verdict::EventuallyIsometric => Some((
                    RelationVerdict::Discrete,
                    format!("{} sequence keeps a positive gap floor", report.verdict),
                )),
                Verdict::Undetermined => None,
            },
            Err(_) => None,
        },
    };

    let mut gaps = Vec::with_capacity(depths.len());
    let mut any_truncated = false;
    for &d in depths {
        let sample = grand_orbit_sample(sys, base, d, cap)?;
        any_truncated |= sample.truncated;
        gaps.push((d, sample.min_gap));
    }

    if let Some((verdict, note)) = structural {
        return Ok(DetectReport {
            verdict,
            structural: true,
            gaps,
            note,
        });
    }

    // Heuristic envelope on the measured gaps.
    if gaps.iter().any(|&(_, g)| !g.is_finite()) {
        return Ok(DetectReport {
            verdict: RelationVerdict::Undetermined,
            structural: false,
            gaps,
            note: "too few comparable points at some depth".into(),
        });
    }
    let first = gaps[0].1;
    let last = gaps[gaps.len() - 1].1;
    let all_above = gaps.iter().all(|&(_, g)| g >= floor);
    let steady = last >= first / 2.0;
    let geometric_decay = gaps.windows(2).all(|pair| {
        let (d0, g0) = pair[0];
        let (d1, g1) = pair[1];
        g1 <= 1.25 * g0 * 2f64.powi(-((d1 - d0) as i32))
    });
    let (verdict, note) = if all_above && steady && !any_truncated {
        (
            RelationVerdict::Discrete,
            format!("gaps stay above the floor {floor:.3e} without decay"),
        )
    } else if last < floor && geometric_decay {
        (
            RelationVerdict::Indiscrete,
            format!("gaps decay geometrically below the floor {floor:.3e}"),
        )
    } else {
        (
            RelationVerdict::Undetermined,
            if any_truncated {
                "sample truncated by the point cap; gaps are upper bounds only".into()
            } else {
                "measured gaps match neither envelope".into()
            },
        )
    };
    Ok(DetectReport {
        verdict,
        structural: false,
        gaps,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innerseq::SequenceRule;
    use crate::powertower::DegreeRule;
    use proptest::prelude::*;

    fn constant_seq(a: f64) -> MapSequence {
        let map = BlaschkeMap::new(
            vec![Complex64::ZERO, Complex64::new(a, 0.0)],
            Complex64::ONE,
        )
        .unwrap();
        MapSequence::new(SequenceRule::Constant(map)).unwrap()
    }

    // ---- preimages -----------------------------------------------------------

    #[test]
    fn squaring_preimages_match_the_closed_form() {
        // Oracle first: B(z) = z² has preimages ±√w.
        let map = BlaschkeMap::new(vec![Complex64::ZERO; 2], Complex64::ONE).unwrap();
        let w = Complex64::new(0.3, -0.4);
        let root = w.sqrt();
        let mut expected = [root, -root];
        expected.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        let mut got = preimages(&map, w).unwrap();
        got.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        assert_eq!(got.len(), 2);
        for (g, e) in got.iter().zip(expected.iter()) {
            assert!((g - e).norm() < 1e-12, "{g} vs {e}");
        }
    }

    #[test]
    fn preimages_of_zero_are_the_zeros() {
        let zeros = vec![Complex64::ZERO, Complex64::new(0.5, 0.2)];
        let map = BlaschkeMap::new(zeros.clone(), Complex64::from_polar(1.0, 0.7)).unwrap();
        let mut got = preimages(&map, Complex64::ZERO).unwrap();
        got.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        let mut want = zeros;
        want.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        for (g, e) in got.iter().zip(want.iter()) {
            assert!((g - e).norm() < 1e-10);
        }
    }

    #[test]
    fn near_critical_values_still_round_trip() {
        let map = BlaschkeMap::new(
            vec![Complex64::ZERO, Complex64::new(-0.5, 0.0)],
            Complex64::ONE,
        )
        .unwrap();
        let crit = map.critical_points().unwrap()[0];
        let w = map.eval(crit).unwrap();
        let got = preimages(&map, w).unwrap();
        assert_eq!(got.len(), 2);
        for z in got {
            assert!((map.eval(z).unwrap() - w).norm() < 1e-9);
        }
    }

    #[test]
    fn degree_cap_is_enforced() {
        let map = BlaschkeMap::new(vec![Complex64::ZERO; 65], Complex64::ONE).unwrap();
        assert!(preimages(&map, Complex64::new(0.1, 0.0)).is_err());
    }

    // ---- grand-orbit samples ----------------------------------------------------

    #[test]
    fn slice_points_share_the_forward_image() {
        // Oracle: every sampled point must hit the same depth-image as the
        // base under the same composition.
        let seq = constant_seq(0.4);
        let sys = OrbitSystem::Inner(&seq);
        let base = Complex64::new(0.2, 0.1);
        let depth = 4;
        let sample = grand_orbit_sample(&sys, base, depth, 1 << 20).unwrap();
        let block = seq.compose_block(0, depth).unwrap();
        let target = block.eval(base).unwrap();
        for &z in &sample.points {
            let img = block.eval(z).unwrap();
            assert!(
                (img - target).norm() < 1e-8,
                "stray point {z}: image {img} vs {target}"
            );
        }
    }

    #[test]
    fn fiber_counts_grow_like_degree_to_the_depth() {
        let seq = constant_seq(0.4);
        let sys = OrbitSystem::Inner(&seq);
        let base = Complex64::new(0.2, 0.0);
        for depth in 0..=6 {
            let sample = grand_orbit_sample(&sys, base, depth, 1 << 20).unwrap();
            assert!(!sample.truncated);
            assert_eq!(sample.points.len(), 1 << depth, "depth {depth}");
            assert!(sample.points.contains(&base));
        }
    }

    #[test]
    fn deeper_slices_contain_shallower_ones() {
        let seq = constant_seq(0.5);
        let sys = OrbitSystem::Inner(&seq);
        let base = Complex64::new(0.25, -0.1);
        let shallow = grand_orbit_sample(&sys, base, 2, 1 << 20).unwrap();
        let deep = grand_orbit_sample(&sys, base, 4, 1 << 20).unwrap();
        for &z in &shallow.points {
            assert!(
                deep.points.iter().any(|&p| (p - z).norm() < 1e-8),
                "shallow point {z} missing from the deeper slice"
            );
        }
    }

    #[test]
    fn point_cap_marks_truncation() {
        let seq = constant_seq(0.4);
        let sys = OrbitSystem::Inner(&seq);
        let sample = grand_orbit_sample(&sys, Complex64::new(0.2, 0.0), 5, 7).unwrap();
        assert!(sample.truncated);
        assert!(sample.points.len() <= 8); // cap plus the restored base
    }

    #[test]
    fn tower_slices_are_roots_of_unity_times_the_base() {
        let t = CoveringTower::annulus(0.3, DegreeRule::Constant(2)).unwrap();
        let sys = OrbitSystem::Tower(&t);
        let r = t.level_annulus(0).unwrap().core_radius();
        let base = Complex64::from_polar(r, 0.3);
        let sample = grand_orbit_sample(&sys, base, 5, 1 << 20).unwrap();
        assert_eq!(sample.points.len(), 32);
        for &z in &sample.points {
            assert!((z.norm() - r).abs() < 1e-12);
        }
        // Angular gaps are exactly 2π/32.
        let mut angles: Vec<f64> = sample.points.iter().map(|z| z.arg()).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in angles.windows(2) {
            assert!((pair[1] - pair[0] - TAU / 32.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dedup_collapses_numerical_twins() {
        let pts = vec![
            Complex64::new(0.1, 0.1),
            Complex64::new(0.1 + 1e-12, 0.1),
            Complex64::new(0.2, 0.1),
        ];
        assert_eq!(dedup_points(pts).len(), 2);
    }

    // ---- detection -------------------------------------------------------------------

    #[test]
    fn contracting_sequences_are_structurally_indiscrete() {
        let seq = constant_seq(0.5);
        let sys = OrbitSystem::Inner(&seq);
        let report =
            discreteness_detect(&sys, Complex64::new(0.2, 0.0), &[1, 2, 3], 1e-6, 1 << 16)
                .unwrap();
        assert_eq!(report.verdict, RelationVerdict::Indiscrete);
        assert!(report.structural);
    }

    #[test]
    fn rotation_sequences_are_structurally_discrete() {
        let seq = MapSequence::new(SequenceRule::Constant(BlaschkeMap::rotation_map(2.39)))
            .unwrap();
        let sys = OrbitSystem::Inner(&seq);
        let report =
            discreteness_detect(&sys, Complex64::new(0.3, 0.1), &[1, 2], 1e-6, 1 << 16).unwrap();
        assert_eq!(report.verdict, RelationVerdict::Discrete);
        assert!(report.structural);
    }

    #[test]
    fn doubling_towers_are_structurally_indiscrete_with_decaying_gaps() {
        let t = CoveringTower::annulus(0.3, DegreeRule::Constant(2)).unwrap();
        let sys = OrbitSystem::Tower(&t);
        let r = t.level_annulus(0).unwrap().core_radius();
        let base = Complex64::from_polar(r, 0.0);
        let report = discreteness_detect(&sys, base, &[2, 4, 6], 1e-6, 1 << 16).unwrap();
        assert_eq!(report.verdict, RelationVerdict::Indiscrete);
        assert!(report.structural);
        assert!(report.gaps[0].1 > report.gaps[1].1);
        assert!(report.gaps[1].1 > report.gaps[2].1);
    }

    #[test]
    fn degree_one_towers_are_structurally_discrete() {
        let t = CoveringTower::annulus(0.5, DegreeRule::Constant(1)).unwrap();
        let sys = OrbitSystem::Tower(&t);
        let base = Complex64::from_polar(t.level_annulus(0).unwrap().core_radius(), 0.2);
        let report = discreteness_detect(&sys, base, &[1, 3], 1e-6, 1 << 16).unwrap();
        assert_eq!(report.verdict, RelationVerdict::Discrete);
        assert!(report.structural);
    }

    #[test]
    fn finite_sequences_use_the_measured_envelope() {
        // No tail structure to lean on: the verdict must come from the
        // measured gaps, which stay wide at these depths.
        let map = BlaschkeMap::new(
            vec![Complex64::ZERO, Complex64::new(0.5, 0.0)],
            Complex64::ONE,
        )
        .unwrap();
        let seq = MapSequence::new(SequenceRule::Finite(vec![map; 4])).unwrap();
        let sys = OrbitSystem::Inner(&seq);
        let report =
            discreteness_detect(&sys, Complex64::new(0.2, 0.0), &[1, 2, 3], 1e-9, 1 << 16)
                .unwrap();
        assert!(!report.structural);
        assert_eq!(report.verdict, RelationVerdict::Discrete);
        assert!(report.gaps.iter().all(|&(_, g)| g > 1e-2));
    }

    #[test]
    fn truncated_samples_never_conclude_discrete() {
        let map = BlaschkeMap::new(
            vec![Complex64::ZERO, Complex64::new(0.5, 0.0)],
            Complex64::ONE,
        )
        .unwrap();
        let seq = MapSequence::new(SequenceRule::Finite(vec![map; 4])).unwrap();
        let sys = OrbitSystem::Inner(&seq);
        let report =
            discreteness_detect(&sys, Complex64::new(0.2, 0.0), &[1, 2], 1e-9, 3).unwrap();
        assert!(!report.structural);
        assert_eq!(report.verdict, RelationVerdict::Undetermined);
        assert!(report.note.contains("truncated"), "note: {}", report.note);
    }

    #[test]
    fn depth_schedules_must_increase() {
        let seq = constant_seq(0.4);
        let sys = OrbitSystem::Inner(&seq);
        assert!(discreteness_detect(&sys, Complex64::ZERO, &[2, 2], 1e-6, 64).is_err());
        assert!(discreteness_detect(&sys, Complex64::ZERO, &[], 1e-6, 64).is_err());
    }

    // ---- property tests -----------------------------------------------------------------

    proptest! {
        /// Preimage soundness: right count, right residual, inside the disc.
        #[test]
        fn preimages_are_sound(
            seed in 0u64..500,
            wr in 0.0f64..0.8,
            wt in 0.0f64..std::f64::consts::TAU,
        ) {
            let mut rng = crate::sample::rng(seed);
            let map = crate::sample::random_blaschke(&mut rng, 3, 0.7);
            let w = Complex64::from_polar(wr, wt);
            let pre = preimages(&map, w).unwrap();
            prop_assert_eq!(pre.len(), map.degree());
            for z in pre {
                prop_assert!(z.norm() < 1.0);
                prop_assert!((map.eval(z).unwrap() - w).norm() <= 1e-9);
            }
        }
    }
}

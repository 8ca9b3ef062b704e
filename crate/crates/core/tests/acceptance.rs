//! The acceptance gate: one test per criterion, each printing a single
//! `acceptance <name>: PASS/FAIL` line (visible with `--nocapture`) and
//! panicking on failure.

use num_complex::Complex64;
use std::f64::consts::TAU;

use wander_lab::hypgeo::{
    annulus_core_length, annulus_injectivity, collar_inj_lower_bound, collar_width, StdAnnulus,
};
use wander_lab::innerseq::{
    schwarz_lower_bound_check, BlaschkeMap, MapSequence, SequenceRule, Verdict,
};
use wander_lab::linearize::{
    commutation_residual, extend_by_dynamics, extend_by_dynamics_from, grid_injectivity,
    koenigs_e, koenigs_limit, univalence_radius, ConvergenceStatus,
};
use wander_lab::orbitrel::{
    discreteness_detect, grand_orbit_sample, OrbitSystem, RelationVerdict,
};
use wander_lab::powertower::{
    conjugacy_residual, core_circle_points, indiscreteness_witness, inj_decay,
    rotation_corrections, CoveringTower, DegreeRule, RotatedPower, TowerPoint,
};
use wander_lab::sample;
use wander_lab::teichreport::{
    component_dimension, total_dimension, ComponentDimension, ComponentKind, ComponentReport,
    DimensionValue,
};

/// Records a labelled check; failures accumulate into the criterion verdict.
struct Criterion {
    name: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn check_le(&mut self, what: &str, value: f64, bound: f64) {
        if !(value <= bound) {
            self.failures
                .push(format!("{what}: {value:.6e} exceeds {bound:.1e}"));
        }
    }

    fn conclude(self) {
        if self.failures.is_empty() {
            println!("acceptance {}: PASS", self.name);
        } else {
            println!("acceptance {}: FAIL — {}", self.name, self.failures.join("; "));
            panic!("acceptance {} failed: {}", self.name, self.failures.join("; "));
        }
    }
}

fn degree2_map(a: f64) -> BlaschkeMap {
    BlaschkeMap::new(
        vec![Complex64::ZERO, Complex64::new(a, 0.0)],
        Complex64::ONE,
    )
    .unwrap()
}

fn constant_seq(a: f64) -> MapSequence {
    MapSequence::new(SequenceRule::Constant(degree2_map(a))).unwrap()
}

/// `|z| ≤ radius` sample: an open lattice plus near-boundary circle points.
fn closed_disc_sample(radius: f64, side: usize, circle: usize) -> Vec<Complex64> {
    let mut grid = sample::lattice_in_disc(radius, side);
    grid.extend(sample::circle_points(radius * (1.0 - 1e-12), circle));
    grid
}

#[test]
fn criterion_01_autonomous_koenigs_reduction() {
    let mut c = Criterion::new("01 autonomous-koenigs-reduction");
    // B(z) = z(z+1/2)/(1+z/2), λ = 1/2.
    let seq = constant_seq(-0.5);
    let grid = closed_disc_sample(0.1, 9, 16);
    let result = koenigs_limit(&seq, 0, &grid, 1e-10, 512).unwrap();
    c.check("doubling converged", result.status == ConvergenceStatus::Converged);
    c.check("m_used within 512", result.m_used <= 512);
    c.check_le("functional-equation residual", result.residual_sup, 1e-8);

    // Direct oracle: B^m(z) / 0.5^m, no log-space bookkeeping.
    let map = degree2_map(-0.5);
    let scale = 0.5f64.powi(result.m_used as i32);
    let mut worst = 0.0f64;
    for (z, phi) in grid.iter().zip(&result.phi_values) {
        let mut w = *z;
        for _ in 0..result.m_used {
            w = map.eval(w).unwrap();
        }
        worst = worst.max((w / scale - phi).norm());
    }
    c.check_le("oracle disagreement", worst, 1e-8);
    c.conclude();
}

#[test]
fn criterion_02_semicontracting_linearization() {
    let mut c = Criterion::new("02 semicontracting-linearization");
    // λ_n = 1 − 1/(n+2)²; Λ_1 telescopes to 2/3, so Q/2 = 1/3.
    let seq = MapSequence::new(SequenceRule::PowerDeficit { c: 1.0, alpha: 2.0 }).unwrap();
    let lam1 = seq.product_limit(1).unwrap();
    c.check("Λ_1 positive", lam1 > 0.0);
    c.check_le("Λ_1 vs telescoping value 2/3", (lam1 - 2.0 / 3.0).abs(), 1e-5);

    let q_half = lam1 / 2.0;
    let mut grid = sample::disc_points(&mut sample::rng(13), q_half * 0.98, 12);
    grid.extend(sample::circle_points(q_half * 0.99, 4));
    // λ_n → 1 forces truncations below the index where 1 − λ_n underflows
    // the zero-modulus guard; the measured Cauchy gap at m ≈ 1.3e5 is 8e-7.
    let tol = 1e-6;
    let max_m = 1 << 19;
    let phi0 = koenigs_limit(&seq, 0, &grid, tol, max_m).unwrap();
    let phi1 = koenigs_limit(&seq, 1, &grid, tol, max_m).unwrap();
    c.check("φ_0 converged", phi0.status == ConvergenceStatus::Converged);
    c.check("φ_1 converged", phi1.status == ConvergenceStatus::Converged);
    let commutation = commutation_residual(&seq, &phi0, &phi1, &grid).unwrap();
    c.check_le("commutation residual", commutation, 1e-6);

    // Univalence on the closed-form radius, checked by grid injectivity of a
    // certified truncation.
    let r = univalence_radius(seq.inf_lambda().unwrap()).unwrap();
    let lattice = sample::lattice_in_disc(r * 0.98, 28);
    let values: Vec<Complex64> = lattice
        .iter()
        .map(|&z| koenigs_e(&seq, 0, 1024, z).unwrap())
        .collect();
    c.check("E injective on the univalence disc", grid_injectivity(&values, 1e-9));
    c.conclude();
}

#[test]
fn criterion_03_contracting_escape() {
    let mut c = Criterion::new("03 contracting-escape");
    let seq = constant_seq(-0.9);
    let verdict = seq.classify(1000).unwrap().verdict;
    c.check("classified contracting", verdict == Verdict::Contracting);

    let block = seq.compose_block(0, 200).unwrap();
    let escape = block.eval(Complex64::new(0.3, 0.0)).unwrap().norm();
    c.check_le("|G_0^200(0.3)|", escape, 1e-6);

    let grid = sample::disc_points(&mut sample::rng(5), 0.3, 16);
    let base = koenigs_limit(&seq, 0, &grid, 1e-10, 4096).unwrap();
    let z = Complex64::new(0.9, 0.0);
    // Least admissible spreading depth for z.
    let mut w = z;
    let mut least = 0usize;
    while w.norm() >= base.certified_radius {
        w = seq.map_at(least).unwrap().eval(w).unwrap();
        least += 1;
    }
    let auto = extend_by_dynamics(&seq, 0, z, &base).unwrap();
    let mut worst = 0.0f64;
    for m in [least, least + 1, least + 3] {
        let v = extend_by_dynamics_from(&seq, 0, z, &base, m).unwrap();
        worst = worst.max((v - auto).norm());
    }
    c.check_le("spreading-depth dependence at z = 0.9", worst, 1e-8);
    c.conclude();
}

#[test]
fn criterion_04_univalence_radius_closed_form() {
    let mut c = Criterion::new("04 univalence-radius-closed-form");
    let r = univalence_radius(0.8).unwrap();
    c.check_le("R(0.8) vs 1/4", (r - 0.25).abs(), 1e-12);

    let mut rng = sample::rng(41);
    let lattice = sample::lattice_in_disc(0.25, 200);
    for i in 0..10 {
        let map = sample::blaschke_with_lambda(&mut rng, 0.8);
        let values: Vec<Complex64> = lattice.iter().map(|&z| map.eval(z).unwrap()).collect();
        c.check(
            &format!("map {i} injective on the 200² lattice of D(0.25)"),
            grid_injectivity(&values, 1e-9),
        );
    }
    c.conclude();
}

#[test]
fn criterion_05_quantitative_bounds() {
    let mut c = Criterion::new("05 quantitative-bounds");
    let mut rng = sample::rng(2024);
    let mut koebe_violations = 0usize;
    let mut schwarz_violations = 0usize;
    for _ in 0..1000 {
        let map = sample::random_blaschke(&mut rng, 3, 0.7);
        let lambda = map.lambda().unwrap();
        let r = univalence_radius(lambda).unwrap();

        // Koebe sandwich for φ on the univalence disc.
        let pts = sample::disc_points(&mut rng, r * 0.9, 5);
        let seq = MapSequence::new(SequenceRule::Constant(map.clone())).unwrap();
        let run = koenigs_limit(&seq, 0, &pts, 1e-12, 1 << 14).unwrap();
        for (z, phi) in pts.iter().zip(&run.phi_values) {
            let s = z.norm();
            let v = phi.norm();
            let lower = r * r * s / ((r + s) * (r + s));
            let upper = r * r * s / ((r - s) * (r - s));
            if !(v >= lower - 1e-12 && v <= upper + 1e-12) {
                koebe_violations += 1;
            }
        }

        // Schwarz-type lower bound for the map itself, over the whole disc.
        for z in sample::disc_points(&mut rng, 0.95, 10) {
            if !schwarz_lower_bound_check(&map, z).unwrap() {
                schwarz_violations += 1;
            }
        }
    }
    c.check("Koebe sandwich violations = 0", koebe_violations == 0);
    c.check("lower-bound violations = 0", schwarz_violations == 0);
    c.conclude();
}

#[test]
fn criterion_06_collar_formulas() {
    let mut c = Criterion::new("06 collar-formulas");
    let eta = collar_width(2.0 * 3f64.acosh()).unwrap();
    c.check_le("collar width vs ½ log 2", (eta - 0.5 * 2f64.ln()).abs(), 1e-12);

    // Core length μ = 1/2 against direct metric quadrature along the core.
    let annulus = StdAnnulus::new(0.5).unwrap();
    let closed_form = annulus_core_length(&annulus);
    c.check_le("core length vs 2π", (closed_form - TAU).abs(), 1e-12);
    let r = annulus.core_radius();
    let n = 1 << 14;
    let mut quad = 0.0;
    for k in 0..n {
        // Trapezoid on a constant integrand: density · |z'(t)| dt.
        let _t = TAU * k as f64 / n as f64;
        quad += annulus.density(r).unwrap() * r * (TAU / n as f64);
    }
    c.check_le("core length vs quadrature", (closed_form - quad).abs(), 1e-9);

    // Collar bound sinh-form at 10³ sampled collar points.
    let mut rng = sample::rng(99);
    let mut violations = 0usize;
    for &mu in &[0.25f64, 1.0, 4.0] {
        let ann = StdAnnulus::new(mu).unwrap();
        let ell = annulus_core_length(&ann);
        let eta = collar_width(ell).unwrap();
        for _ in 0..334 {
            use rand::Rng;
            let u: f64 = rng.gen_range(-0.999..0.999) * eta;
            let theta = 2.0 * u.exp().atan();
            let s = (-2.0 * mu * theta).exp();
            let inj = annulus_injectivity(&ann, s).unwrap();
            // The bound's d is the distance to the collar boundary.
            let d = eta - ann.core_distance(s).unwrap();
            let bound = collar_inj_lower_bound(d).unwrap();
            if inj < bound - 1e-12 {
                violations += 1;
            }
        }
    }
    c.check("collar lower-bound violations = 0", violations == 0);
    c.conclude();
}

#[test]
fn criterion_07_power_tower_dichotomy() {
    let mut c = Criterion::new("07 power-tower-dichotomy");
    let tower = CoveringTower::annulus(0.3, DegreeRule::Constant(2)).unwrap();
    for n in 0i32..=30 {
        if tower.push_modulus(n as usize).unwrap() != 0.3 * 2f64.powi(n) {
            c.check(&format!("push_modulus({n}) exact"), false);
        }
    }
    let core = TowerPoint {
        n: 0,
        z: Complex64::from_polar(tower.level_annulus(0).unwrap().core_radius(), 0.0),
    };
    for k in 1i32..=20 {
        if indiscreteness_witness(&tower, &core, k as usize).unwrap() != TAU / 2f64.powi(k) {
            c.check(&format!("witness gap 2π/2^{k} exact"), false);
        }
    }
    let decay = inj_decay(&tower, &core, 16).unwrap();
    c.check(
        "inj decay monotone",
        decay.values.windows(2).all(|p| p[1] <= p[0]),
    );
    c.check_le("inj decay at level 15", decay.values[15], 1e-3);
    let detect = discreteness_detect(
        &OrbitSystem::Tower(&tower),
        core.z,
        &[2, 4, 6],
        1e-6,
        1 << 16,
    )
    .unwrap();
    c.check(
        "doubling tower indiscrete (structural)",
        detect.verdict == RelationVerdict::Indiscrete && detect.structural,
    );

    let flat = CoveringTower::annulus(0.3, DegreeRule::Constant(1)).unwrap();
    let flat_core = TowerPoint {
        n: 0,
        z: Complex64::from_polar(flat.level_annulus(0).unwrap().core_radius(), 0.0),
    };
    for k in [0usize, 7, 40] {
        if indiscreteness_witness(&flat, &flat_core, k).unwrap() != TAU {
            c.check(&format!("degree-one witness constant at depth {k}"), false);
        }
    }
    let flat_detect = discreteness_detect(
        &OrbitSystem::Tower(&flat),
        flat_core.z,
        &[1, 3],
        1e-6,
        1 << 16,
    )
    .unwrap();
    c.check(
        "degree-one tower discrete (structural)",
        flat_detect.verdict == RelationVerdict::Discrete && flat_detect.structural,
    );
    c.conclude();
}

#[test]
fn criterion_08_conjugacy_residual() {
    let mut c = Criterion::new("08 conjugacy-residual");
    let tower = CoveringTower::annulus(0.3, DegreeRule::Constant(2)).unwrap();
    let maps: Vec<RotatedPower> = [0.7, -0.3, 1.9, 0.2]
        .iter()
        .map(|&alpha| RotatedPower { alpha, degree: 2 })
        .collect();
    let betas = rotation_corrections(&maps);
    let mut points = Vec::new();
    for level in 0..maps.len() {
        points.extend(core_circle_points(&tower, level, 64).unwrap());
    }
    let corrected = conjugacy_residual(&tower, &maps, &betas, &points).unwrap();
    c.check_le("corrected residual", corrected, 1e-12);

    let one_level = [RotatedPower {
        alpha: std::f64::consts::FRAC_PI_4,
        degree: 2,
    }];
    let naive = [0.0, 0.0];
    let circle = core_circle_points(&tower, 0, 64).unwrap();
    let mismatch = conjugacy_residual(&tower, &one_level, &naive, &circle).unwrap();
    c.check("mismatched residual detects the defect (> 0.1)", mismatch > 0.1);
    c.conclude();
}

#[test]
fn criterion_09_dimension_classifier() {
    let mut c = Criterion::new("09 dimension-classifier");
    let discrete_piece = ComponentReport::new(
        ComponentKind::SimplyConnectedPiece,
        RelationVerdict::Discrete,
        "acceptance",
    )
    .unwrap();
    let annulus = ComponentReport::new(
        ComponentKind::FiniteModulusAnnulus(0.7),
        RelationVerdict::Indiscrete,
        "acceptance",
    )
    .unwrap();
    let cusp = ComponentReport::new(
        ComponentKind::PuncturedDisc,
        RelationVerdict::Indiscrete,
        "acceptance",
    )
    .unwrap();

    c.check(
        "[discrete] → Infinite",
        total_dimension(std::slice::from_ref(&discrete_piece), false).value
            == DimensionValue::Infinite,
    );
    let finite1 = total_dimension(&[annulus.clone(), cusp.clone(), cusp.clone()], false);
    c.check("[annulus + 2 cusps] → Finite(1)", finite1.value == DimensionValue::Finite(1));
    c.check(
        "breakdown is [1, 0, 0]",
        finite1.breakdown
            == vec![
                ComponentDimension::One,
                ComponentDimension::Zero,
                ComponentDimension::Zero,
            ],
    );
    c.check(
        "mixed discrete+indiscrete → Infinite",
        total_dimension(&[discrete_piece.clone(), annulus.clone()], false).value
            == DimensionValue::Infinite,
    );
    c.check(
        "[] → Finite(0)",
        total_dimension(&[], false).value == DimensionValue::Finite(0),
    );
    c.check(
        "per-component: discrete is infinite-dimensional",
        component_dimension(&discrete_piece) == ComponentDimension::Infinite,
    );
    c.conclude();
}

#[test]
fn criterion_10_grand_orbit_separation() {
    let mut c = Criterion::new("10 grand-orbit-separation");
    let seq = constant_seq(-0.5);
    let sys = OrbitSystem::Inner(&seq);
    let grid = sample::disc_points(&mut sample::rng(11), 0.05, 16);
    let base_run = koenigs_limit(&seq, 0, &grid, 1e-10, 512).unwrap();

    let phi_at = |z: Complex64| extend_by_dynamics(&seq, 0, z, &base_run).unwrap();

    let base_a = Complex64::new(0.2, 0.0);
    let base_b = Complex64::new(0.35, 0.0);
    let slice_a = grand_orbit_sample(&sys, base_a, 6, 1 << 12).unwrap();
    let slice_b = grand_orbit_sample(&sys, base_b, 6, 1 << 12).unwrap();
    c.check("depth-6 slice of 0.2 has 64 points", slice_a.points.len() == 64);

    let phis_a: Vec<Complex64> = slice_a.points.iter().map(|&z| phi_at(z)).collect();
    let phis_b: Vec<Complex64> = slice_b.points.iter().map(|&z| phi_at(z)).collect();

    let mut same_orbit_spread = 0.0f64;
    for (i, a) in phis_a.iter().enumerate() {
        for b in &phis_a[i + 1..] {
            same_orbit_spread = same_orbit_spread.max((a - b).norm());
        }
    }
    c.check_le("φ₀ spread within one grand orbit", same_orbit_spread, 1e-8);

    let mut cross_orbit_gap = f64::INFINITY;
    for a in &phis_a {
        for b in &phis_b {
            cross_orbit_gap = cross_orbit_gap.min((a - b).norm());
        }
    }
    c.check(
        "φ₀ separates the two grand orbits (> 1e-3)",
        cross_orbit_gap > 1e-3,
    );
    c.conclude();
}

//! Python bindings: thin wrappers over the wander-lab library types, with
//! errors surfaced as `ValueError` and complex numbers mapped to Python
//! `complex`.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use wander_lab::hypgeo::{self, StdAnnulus};
use wander_lab::innerseq::{BlaschkeMap, MapSequence, SequenceRule};
use wander_lab::linearize::{self, ConvergenceStatus, LinearizationResult, SurfaceKind};
use wander_lab::orbitrel::{self, OrbitSystem, RelationVerdict};
use wander_lab::powertower::{
    self, CoveringTower, DegreeRule, RotatedPower, TowerKind, TowerPoint,
};
use wander_lab::teichreport::{self, ComponentKind, ComponentReport};

fn err(e: wander_lab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_relation(s: &str) -> PyResult<RelationVerdict> {
    match s {
        "discrete" => Ok(RelationVerdict::Discrete),
        "indiscrete" => Ok(RelationVerdict::Indiscrete),
        "undetermined" => Ok(RelationVerdict::Undetermined),
        other => Err(PyValueError::new_err(format!(
            "unknown relation '{other}' (want discrete, indiscrete, or undetermined)"
        ))),
    }
}

// ---- finite Blaschke products ----------------------------------------------------

#[pyclass(name = "Map", module = "wander_lab_py")]
#[derive(Clone)]
struct PyMap {
    inner: BlaschkeMap,
}

#[pymethods]
impl PyMap {
    #[new]
    #[pyo3(signature = (zeros, rotation = None))]
    fn new(zeros: Vec<Complex64>, rotation: Option<Complex64>) -> PyResult<Self> {
        let inner =
            BlaschkeMap::new(zeros, rotation.unwrap_or(Complex64::ONE)).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn identity() -> Self {
        Self {
            inner: BlaschkeMap::identity(),
        }
    }

    #[staticmethod]
    fn rotation(angle: f64) -> Self {
        Self {
            inner: BlaschkeMap::rotation_map(angle),
        }
    }

    fn eval(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.eval(z).map_err(err)
    }

    /// `|g'(0)|` for origin-fixing maps.
    fn multiplier(&self) -> PyResult<f64> {
        self.inner.lambda().map_err(err)
    }

    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn is_rotation(&self) -> bool {
        self.inner.is_rotation()
    }

    fn fixes_origin(&self) -> bool {
        self.inner.fixes_origin()
    }

    fn zeros(&self) -> Vec<Complex64> {
        self.inner.zeros().to_vec()
    }

    fn critical_points(&self) -> PyResult<Vec<Complex64>> {
        self.inner.critical_points().map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Map(degree={})", self.inner.degree())
    }
}

// ---- inner-function sequences -----------------------------------------------------

#[pyclass(name = "Sequence", module = "wander_lab_py")]
struct PySequence {
    inner: MapSequence,
}

#[pyclass(name = "Classification", module = "wander_lab_py")]
struct PyClassification {
    #[pyo3(get)]
    verdict: String,
    #[pyo3(get)]
    terms_used: usize,
    #[pyo3(get)]
    partial_deficit_sum: f64,
}

#[pymethods]
impl PyClassification {
    fn __repr__(&self) -> String {
        format!(
            "Classification(verdict='{}', terms_used={}, partial_deficit_sum={})",
            self.verdict, self.terms_used, self.partial_deficit_sum
        )
    }
}

fn make_seq(rule: SequenceRule) -> PyResult<PySequence> {
    Ok(PySequence {
        inner: MapSequence::new(rule).map_err(err)?,
    })
}

#[pymethods]
impl PySequence {
    #[staticmethod]
    fn constant(map: PyMap) -> PyResult<Self> {
        make_seq(SequenceRule::Constant(map.inner))
    }

    #[staticmethod]
    fn periodic(head: Vec<PyMap>, cycle: Vec<PyMap>) -> PyResult<Self> {
        make_seq(SequenceRule::Periodic {
            head: head.into_iter().map(|m| m.inner).collect(),
            cycle: cycle.into_iter().map(|m| m.inner).collect(),
        })
    }

    #[staticmethod]
    fn finite(maps: Vec<PyMap>) -> PyResult<Self> {
        make_seq(SequenceRule::Finite(
            maps.into_iter().map(|m| m.inner).collect(),
        ))
    }

    /// `λ_n = 1 − c/(n+2)^α`, degree-2 terms.
    #[staticmethod]
    fn power_deficit(c: f64, alpha: f64) -> PyResult<Self> {
        make_seq(SequenceRule::PowerDeficit { c, alpha })
    }

    #[staticmethod]
    fn rotation_tail(head: Vec<PyMap>, angle: f64) -> PyResult<Self> {
        make_seq(SequenceRule::RotationTail {
            head: head.into_iter().map(|m| m.inner).collect(),
            angle,
        })
    }

    fn map_at(&self, n: usize) -> PyResult<PyMap> {
        Ok(PyMap {
            inner: (*self.inner.map_at(n).map_err(err)?).clone(),
        })
    }

    fn lambda_at(&self, n: usize) -> PyResult<f64> {
        self.inner.lambda_at(n).map_err(err)
    }

    fn inf_lambda(&self) -> PyResult<f64> {
        self.inner.inf_lambda().map_err(err)
    }

    /// `Λ_n = ∏_{k ≥ n} λ_k` (0 in the contracting case).
    fn product_limit(&self, n: usize) -> PyResult<f64> {
        self.inner.product_limit(n).map_err(err)
    }

    #[pyo3(signature = (horizon = 10_000))]
    fn classify(&self, horizon: usize) -> PyResult<PyClassification> {
        let report = self.inner.classify(horizon).map_err(err)?;
        Ok(PyClassification {
            verdict: report.verdict.to_string(),
            terms_used: report.terms_used,
            partial_deficit_sum: report.partial_deficit_sum,
        })
    }

    /// `G_n^m(z) = g_{m−1} ∘ … ∘ g_n (z)`.
    fn compose(&self, n: usize, m: usize, z: Complex64) -> PyResult<Complex64> {
        self.inner.compose_block(n, m).map_err(err)?.eval(z).map_err(err)
    }

    fn explicit_len(&self) -> Option<usize> {
        self.inner.explicit_len()
    }

    fn normalization_applied(&self) -> bool {
        self.inner.normalization_applied()
    }
}

// ---- linearization ---------------------------------------------------------------

#[pyclass(name = "Linearization", module = "wander_lab_py")]
struct PyLinearization {
    inner: LinearizationResult,
}

#[pymethods]
impl PyLinearization {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn m_used(&self) -> usize {
        self.inner.m_used
    }

    #[getter]
    fn status(&self) -> &'static str {
        match self.inner.status {
            ConvergenceStatus::Converged => "converged",
            ConvergenceStatus::NonConvergent => "non-convergent",
        }
    }

    #[getter]
    fn residual_sup(&self) -> f64 {
        self.inner.residual_sup
    }

    #[getter]
    fn cauchy_gap(&self) -> f64 {
        self.inner.cauchy_gap
    }

    #[getter]
    fn certified_radius(&self) -> f64 {
        self.inner.certified_radius
    }

    #[getter]
    fn univalence_radius(&self) -> f64 {
        self.inner.univalence_radius
    }

    #[getter]
    fn grid(&self) -> Vec<Complex64> {
        self.inner.grid.clone()
    }

    #[getter]
    fn phi_values(&self) -> Vec<Complex64> {
        self.inner.phi_values.clone()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    /// Value of `φ_n` at `z` by running the orbit into the certified disc.
    fn extend(&self, seq: &PySequence, z: Complex64) -> PyResult<Complex64> {
        linearize::extend_by_dynamics(&seq.inner, self.inner.n, z, &self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Linearization(n={}, m_used={}, status='{}')",
            self.inner.n,
            self.inner.m_used,
            self.status()
        )
    }
}

#[pyfunction]
fn univalence_radius(c: f64) -> PyResult<f64> {
    linearize::univalence_radius(c).map_err(err)
}

#[pyfunction]
fn koenigs_e(seq: &PySequence, n: usize, m: usize, z: Complex64) -> PyResult<Complex64> {
    linearize::koenigs_e(&seq.inner, n, m, z).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (seq, n, grid, tol = 1e-10, max_m = 1 << 20))]
fn koenigs_limit(
    seq: &PySequence,
    n: usize,
    grid: Vec<Complex64>,
    tol: f64,
    max_m: usize,
) -> PyResult<PyLinearization> {
    Ok(PyLinearization {
        inner: linearize::koenigs_limit(&seq.inner, n, &grid, tol, max_m).map_err(err)?,
    })
}

#[pyfunction]
fn commutation_residual(
    seq: &PySequence,
    phi_n: &PyLinearization,
    phi_next: &PyLinearization,
    grid: Vec<Complex64>,
) -> PyResult<f64> {
    linearize::commutation_residual(&seq.inner, &phi_n.inner, &phi_next.inner, &grid)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (seq, horizon = 6))]
fn quotient_surface(
    seq: &PySequence,
    horizon: usize,
) -> PyResult<(String, Vec<Complex64>, bool, Vec<String>)> {
    let model = linearize::quotient_surface_model(&seq.inner, horizon).map_err(err)?;
    let kind = match model.kind {
        SurfaceKind::PlaneMinusSet => "plane-minus-set",
        SurfaceKind::DiscMinusSet => "disc-minus-set",
    };
    Ok((
        kind.to_string(),
        model.marked_points,
        model.countable_flag,
        model.notes,
    ))
}

// ---- hyperbolic geometry ----------------------------------------------------------

#[pyfunction]
fn hyp_dist(z: Complex64, w: Complex64) -> PyResult<f64> {
    hypgeo::hyp_dist(z, w).map_err(err)
}

#[pyfunction]
fn collar_width(core_length: f64) -> PyResult<f64> {
    hypgeo::collar_width(core_length).map_err(err)
}

#[pyfunction]
fn collar_inj_lower_bound(distance: f64) -> PyResult<f64> {
    hypgeo::collar_inj_lower_bound(distance).map_err(err)
}

#[pyfunction]
fn cusp_injectivity(p: f64) -> PyResult<f64> {
    hypgeo::cusp_injectivity(p).map_err(err)
}

#[pyclass(name = "Annulus", module = "wander_lab_py")]
#[derive(Clone)]
struct PyAnnulus {
    inner: StdAnnulus,
}

#[pymethods]
impl PyAnnulus {
    #[new]
    fn new(modulus: f64) -> PyResult<Self> {
        Ok(Self {
            inner: StdAnnulus::new(modulus).map_err(err)?,
        })
    }

    #[getter]
    fn modulus(&self) -> f64 {
        self.inner.modulus()
    }

    #[getter]
    fn inner_radius(&self) -> f64 {
        self.inner.inner_radius()
    }

    #[getter]
    fn core_radius(&self) -> f64 {
        self.inner.core_radius()
    }

    fn core_length(&self) -> f64 {
        hypgeo::annulus_core_length(&self.inner)
    }

    fn injectivity(&self, s: f64) -> PyResult<f64> {
        hypgeo::annulus_injectivity(&self.inner, s).map_err(err)
    }

    fn core_distance(&self, s: f64) -> PyResult<f64> {
        self.inner.core_distance(s).map_err(err)
    }

    fn density(&self, s: f64) -> PyResult<f64> {
        self.inner.density(s).map_err(err)
    }

    fn contains(&self, z: Complex64) -> bool {
        self.inner.contains(z)
    }

    fn __repr__(&self) -> String {
        format!("Annulus(modulus={})", self.inner.modulus())
    }
}

// ---- power-map towers --------------------------------------------------------------

/// Either a single constant degree or a `(head, cycle)` pair.
#[derive(FromPyObject)]
enum DegreesArg {
    #[pyo3(transparent)]
    Constant(u32),
    Periodic(Vec<u32>, Vec<u32>),
}

impl DegreesArg {
    fn into_rule(self) -> DegreeRule {
        match self {
            DegreesArg::Constant(d) => DegreeRule::Constant(d),
            DegreesArg::Periodic(head, cycle) => DegreeRule::Periodic { head, cycle },
        }
    }
}

#[pyclass(name = "Tower", module = "wander_lab_py")]
struct PyTower {
    inner: CoveringTower,
}

#[pyclass(name = "Detection", module = "wander_lab_py")]
struct PyDetection {
    #[pyo3(get)]
    verdict: String,
    #[pyo3(get)]
    structural: bool,
    #[pyo3(get)]
    gaps: Vec<(usize, f64)>,
    #[pyo3(get)]
    note: String,
}

#[pymethods]
impl PyDetection {
    fn __repr__(&self) -> String {
        format!(
            "Detection(verdict='{}', structural={})",
            self.verdict, self.structural
        )
    }
}

fn detection_from(report: orbitrel::DetectReport) -> PyDetection {
    PyDetection {
        verdict: report.verdict.to_string(),
        structural: report.structural,
        gaps: report.gaps,
        note: report.note,
    }
}

#[pymethods]
impl PyTower {
    #[staticmethod]
    fn annulus(mu0: f64, degrees: DegreesArg) -> PyResult<Self> {
        Ok(Self {
            inner: CoveringTower::annulus(mu0, degrees.into_rule()).map_err(err)?,
        })
    }

    #[staticmethod]
    fn punctured_disc(degrees: DegreesArg) -> PyResult<Self> {
        Ok(Self {
            inner: CoveringTower::punctured_disc(degrees.into_rule()).map_err(err)?,
        })
    }

    fn kind(&self) -> &'static str {
        match self.inner.kind() {
            TowerKind::Annulus => "annulus",
            TowerKind::PuncturedDisc => "punctured-disc",
        }
    }

    fn degree_at(&self, n: usize) -> u32 {
        self.inner.degree_at(n)
    }

    fn total_degree(&self, n: usize) -> BigUint {
        self.inner.total_degree(n)
    }

    fn push_modulus(&self, n: usize) -> PyResult<f64> {
        self.inner.push_modulus(n).map_err(err)
    }

    /// Exact `μ_n` as a `(numerator, denominator)` pair.
    fn push_modulus_exact(&self, n: usize) -> PyResult<(BigInt, BigInt)> {
        let q = self.inner.push_modulus_exact(n).map_err(err)?;
        Ok((q.numer().clone(), q.denom().clone()))
    }

    fn level_core_radius(&self, n: usize) -> PyResult<f64> {
        Ok(self.inner.level_annulus(n).map_err(err)?.core_radius())
    }

    /// One step up the tower: `(n, z) ↦ (n+1, z^{d_n})`.
    fn map_point(&self, n: usize, z: Complex64) -> PyResult<(usize, Complex64)> {
        let q = powertower::tower_map(&self.inner, &TowerPoint { n, z }).map_err(err)?;
        Ok((q.n, q.z))
    }

    /// Angular gap of the depth-`k` fiber over a level-0 point.
    fn witness(&self, z: Complex64, k: usize) -> PyResult<f64> {
        powertower::indiscreteness_witness(&self.inner, &TowerPoint { n: 0, z }, k)
            .map_err(err)
    }

    /// Injectivity radii along the forward orbit of a level-0 point.
    fn inj_decay(&self, z: Complex64, len: usize) -> PyResult<(Vec<f64>, bool)> {
        let decay =
            powertower::inj_decay(&self.inner, &TowerPoint { n: 0, z }, len).map_err(err)?;
        Ok((decay.values, decay.truncated))
    }

    fn core_circle(&self, level: usize, count: usize) -> PyResult<Vec<Complex64>> {
        Ok(powertower::core_circle_points(&self.inner, level, count)
            .map_err(err)?
            .into_iter()
            .map(|p| p.z)
            .collect())
    }

    #[pyo3(signature = (z, depths, gap_floor = 1e-9, cap = 1 << 20))]
    fn detect(
        &self,
        z: Complex64,
        depths: Vec<usize>,
        gap_floor: f64,
        cap: usize,
    ) -> PyResult<PyDetection> {
        let sys = OrbitSystem::Tower(&self.inner);
        let report =
            orbitrel::discreteness_detect(&sys, z, &depths, gap_floor, cap).map_err(err)?;
        Ok(detection_from(report))
    }

    fn __repr__(&self) -> String {
        format!("Tower(kind='{}')", self.kind())
    }
}

/// `β_{n+1} = d_n β_n − α_n` correction angles for `e^{iα_n} z^{d_n}` levels,
/// given as `(alpha, degree)` pairs.
#[pyfunction]
fn rotation_corrections(maps: Vec<(f64, u32)>) -> Vec<f64> {
    let maps: Vec<RotatedPower> = maps
        .into_iter()
        .map(|(alpha, degree)| RotatedPower { alpha, degree })
        .collect();
    powertower::rotation_corrections(&maps)
}

/// Sup of `|e^{iβ_{n+1}} f_n(z) − (e^{iβ_n} z)^{d_n}|` over `(level, z)` points.
#[pyfunction]
fn conjugacy_residual(
    tower: &PyTower,
    maps: Vec<(f64, u32)>,
    betas: Vec<f64>,
    points: Vec<(usize, Complex64)>,
) -> PyResult<f64> {
    let maps: Vec<RotatedPower> = maps
        .into_iter()
        .map(|(alpha, degree)| RotatedPower { alpha, degree })
        .collect();
    let points: Vec<TowerPoint> = points
        .into_iter()
        .map(|(n, z)| TowerPoint { n, z })
        .collect();
    powertower::conjugacy_residual(&tower.inner, &maps, &betas, &points).map_err(err)
}

// ---- grand orbits ------------------------------------------------------------------

#[pyclass(name = "OrbitSample", module = "wander_lab_py")]
struct PyOrbitSample {
    #[pyo3(get)]
    base: Complex64,
    #[pyo3(get)]
    depth: usize,
    #[pyo3(get)]
    points: Vec<Complex64>,
    #[pyo3(get)]
    min_gap: f64,
    #[pyo3(get)]
    truncated: bool,
}

#[pymethods]
impl PyOrbitSample {
    fn __len__(&self) -> usize {
        self.points.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "OrbitSample(depth={}, points={}, truncated={})",
            self.depth,
            self.points.len(),
            self.truncated
        )
    }
}

#[pyfunction]
#[pyo3(signature = (seq, base, depth, cap = 1 << 20))]
fn grand_orbit(
    seq: &PySequence,
    base: Complex64,
    depth: usize,
    cap: usize,
) -> PyResult<PyOrbitSample> {
    let sys = OrbitSystem::Inner(&seq.inner);
    let sample = orbitrel::grand_orbit_sample(&sys, base, depth, cap).map_err(err)?;
    Ok(PyOrbitSample {
        base: sample.base,
        depth: sample.depth,
        points: sample.points,
        min_gap: sample.min_gap,
        truncated: sample.truncated,
    })
}

#[pyfunction]
#[pyo3(signature = (seq, base, depths, gap_floor = 1e-9, cap = 1 << 20))]
fn detect_discreteness(
    seq: &PySequence,
    base: Complex64,
    depths: Vec<usize>,
    gap_floor: f64,
    cap: usize,
) -> PyResult<PyDetection> {
    let sys = OrbitSystem::Inner(&seq.inner);
    let report = orbitrel::discreteness_detect(&sys, base, &depths, gap_floor, cap).map_err(err)?;
    Ok(detection_from(report))
}

// ---- dimension reports ---------------------------------------------------------------

#[pyclass(name = "Component", module = "wander_lab_py")]
#[derive(Clone)]
struct PyComponent {
    inner: ComponentReport,
}

#[pymethods]
impl PyComponent {
    #[staticmethod]
    fn annulus(modulus: f64, relation: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ComponentReport::new(
                ComponentKind::FiniteModulusAnnulus(modulus),
                parse_relation(relation)?,
                "python",
            )
            .map_err(err)?,
        })
    }

    #[staticmethod]
    fn punctured_disc(relation: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ComponentReport::new(
                ComponentKind::PuncturedDisc,
                parse_relation(relation)?,
                "python",
            )
            .map_err(err)?,
        })
    }

    #[staticmethod]
    fn simply_connected(relation: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ComponentReport::new(
                ComponentKind::SimplyConnectedPiece,
                parse_relation(relation)?,
                "python",
            )
            .map_err(err)?,
        })
    }

    #[staticmethod]
    fn other(relation: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ComponentReport::new(
                ComponentKind::Other,
                parse_relation(relation)?,
                "python",
            )
            .map_err(err)?,
        })
    }

    /// Per-component contribution: 'infinite', '1', '0', or 'unknown'.
    fn dimension(&self) -> String {
        teichreport::component_dimension(&self.inner).to_string()
    }
}

/// Total dimension over the listed components: a decimal count, 'unknown',
/// or 'infinite'.
#[pyfunction]
#[pyo3(signature = (components, infinite_family = false))]
fn total_dimension(
    components: Vec<PyComponent>,
    infinite_family: bool,
) -> (String, Vec<String>) {
    let reports: Vec<ComponentReport> = components.into_iter().map(|c| c.inner).collect();
    let verdict = teichreport::total_dimension(&reports, infinite_family);
    (
        verdict.value.to_string(),
        verdict.breakdown.iter().map(|d| d.to_string()).collect(),
    )
}

#[pymodule]
pub fn wander_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMap>()?;
    m.add_class::<PySequence>()?;
    m.add_class::<PyClassification>()?;
    m.add_class::<PyLinearization>()?;
    m.add_class::<PyAnnulus>()?;
    m.add_class::<PyTower>()?;
    m.add_class::<PyDetection>()?;
    m.add_class::<PyOrbitSample>()?;
    m.add_class::<PyComponent>()?;
    m.add_function(wrap_pyfunction!(univalence_radius, m)?)?;
    m.add_function(wrap_pyfunction!(koenigs_e, m)?)?;
    m.add_function(wrap_pyfunction!(koenigs_limit, m)?)?;
    m.add_function(wrap_pyfunction!(commutation_residual, m)?)?;
    m.add_function(wrap_pyfunction!(quotient_surface, m)?)?;
    m.add_function(wrap_pyfunction!(hyp_dist, m)?)?;
    m.add_function(wrap_pyfunction!(collar_width, m)?)?;
    m.add_function(wrap_pyfunction!(collar_inj_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(cusp_injectivity, m)?)?;
    m.add_function(wrap_pyfunction!(rotation_corrections, m)?)?;
    m.add_function(wrap_pyfunction!(conjugacy_residual, m)?)?;
    m.add_function(wrap_pyfunction!(grand_orbit, m)?)?;
    m.add_function(wrap_pyfunction!(detect_discreteness, m)?)?;
    m.add_function(wrap_pyfunction!(total_dimension, m)?)?;
    Ok(())
}

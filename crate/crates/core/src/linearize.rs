//! Linearizing coordinates for sequences of inner functions.
//!
//! With `G_n^m = g_{m-1} ∘ … ∘ g_n` and `Λ_n^m = ∏_{k=n}^{m-1} λ_k`, the
//! normalized compositions `E_n^m = G_n^m / Λ_n^m` converge locally uniformly
//! to a family `φ_n` with `φ_n(0) = 0`, `φ_n'(0) = 1` and
//! `φ_{n+1} ∘ g_n = λ_n · φ_n`. Convergence is certified empirically by a
//! doubling Cauchy test; univalence holds on the disc of radius
//! `univalence_radius(inf λ)`.
//!
//! Evaluation runs in log space along the orbit,
//! `E_n^m(z) = z · exp( Σ_k [Log(g_k(w_k)/w_k) − log λ_k] )`, which survives
//! derivative products far below the smallest positive double.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Arc;

use crate::innerseq::{BlaschkeMap, MapSequence, Verdict};
use crate::{check_in_disc, Error, Result};

/// First truncation length tried by the doubling loop.
const INITIAL_BLOCK: usize = 8;
/// Orbit modulus below which remaining factors contribute < 1e-100 and the
/// accumulator is frozen.
const FREEZE_FLOOR: f64 = 1e-120;
/// Horizon used for the internal classification evidence.
const CLASSIFY_HORIZON: usize = 10_000;
/// Cap on the forward-orbit search when spreading by the dynamics.
const SPREAD_STEP_CAP: usize = 200_000;
/// Tolerances for quotient-model marked points.
const QUOTIENT_TOL: f64 = 1e-6;
const QUOTIENT_MAX_M: usize = 1 << 18;
const QUOTIENT_G_CAP: usize = 1 << 21;
const MARKED_DEDUP: f64 = 1e-9;
/// Levels whose `−log Λ_0^k` exceeds this are dropped (doubles exhausted).
const LOG_SCALE_CAP: f64 = 300.0;

/// Univalence radius of an origin-fixing inner function with `|g'(0)| ≥ c`:
/// every such map is injective on the disc of radius
/// `R = tanh²(artanh(c)/2)` (critical points stay at hyperbolic distance
/// ≥ d(0,c)/2 from the origin, and the Schwarz–Pick preimage bound pulls the
/// radius in once more).
pub fn univalence_radius(c: f64) -> Result<f64> {
    if !(c.is_finite() && c > 0.0 && c <= 1.0) {
        return Err(Error::BadParameter {
            what: "derivative bound c (needs 0 < c ≤ 1)",
            value: c,
        });
    }
    if c == 1.0 {
        return Ok(1.0); // isometry: univalent on the whole disc
    }
    let r1 = (c.atanh() / 2.0).tanh();
    Ok(r1 * r1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvergenceStatus {
    Converged,
    NonConvergent,
}

/// Output of [`koenigs_limit`].
#[derive(Clone, Debug)]
pub struct LinearizationResult {
    /// Start index of the linearized family member.
    pub n: usize,
    /// Absolute truncation index at which the doubling loop stopped.
    pub m_used: usize,
    pub grid: Vec<Complex64>,
    pub phi_values: Vec<Complex64>,
    /// Radius on which univalence is guaranteed from `inf λ`.
    pub univalence_radius: f64,
    /// Radius on which convergence is certified (`|Λ_1|` in the
    /// non-contracting case, the univalence radius otherwise).
    pub certified_radius: f64,
    /// Sup over the grid of `|φ_{n+1}(g_n z) − λ_n φ_n(z)|`, with each side
    /// from its own independently certified truncation.
    pub residual_sup: f64,
    /// Per-grid-point values of that residual.
    pub residuals: Vec<f64>,
    /// Last Cauchy increment `sup |E^{2m} − E^m|` observed.
    pub cauchy_gap: f64,
    pub status: ConvergenceStatus,
    pub warnings: Vec<String>,
    /// Tolerance and truncation cap the run was performed with.
    pub tol: f64,
    pub max_m: usize,
}

/// Per-point orbit state for the log-space evaluation.
#[derive(Clone, Copy, Debug)]
struct PointState {
    start: Complex64,
    w: Complex64,
    acc: Complex64,
    vanished: bool,
    frozen: bool,
}

impl PointState {
    fn new(z: Complex64) -> Self {
        Self {
            start: z,
            w: z,
            acc: Complex64::ZERO,
            vanished: z == Complex64::ZERO,
            frozen: false,
        }
    }

    fn value(&self) -> Complex64 {
        if self.vanished {
            Complex64::ZERO
        } else {
            self.start * self.acc.exp()
        }
    }

    fn advance(&mut self, maps: &[Arc<BlaschkeMap>], log_lambdas: &[f64]) -> Result<()> {
        for (map, &ll) in maps.iter().zip(log_lambdas) {
            if self.vanished || self.frozen {
                return Ok(());
            }
            let gw = map.eval(self.w)?;
            if gw == Complex64::ZERO {
                self.vanished = true;
                return Ok(());
            }
            self.acc += (gw / self.w).ln() - ll;
            self.w = gw;
            if gw.norm() < FREEZE_FLOOR {
                self.frozen = true;
                return Ok(());
            }
        }
        Ok(())
    }
}

/// Materializes maps and `log λ` for indices `from..to`.
fn prefetch(seq: &MapSequence, from: usize, to: usize) -> Result<(Vec<Arc<BlaschkeMap>>, Vec<f64>)> {
    let mut maps = Vec::with_capacity(to - from);
    let mut lls = Vec::with_capacity(to - from);
    for k in from..to {
        maps.push(seq.map_at(k)?);
        lls.push(seq.lambda_at(k)?.ln());
    }
    Ok((maps, lls))
}

/// `E_n^m(z) = G_n^m(z)/Λ_n^m`, evaluated in log space along the orbit.
pub fn koenigs_e(seq: &MapSequence, n: usize, m: usize, z: Complex64) -> Result<Complex64> {
    if m < n {
        return Err(Error::BadIndex {
            what: "truncation index m (must be ≥ n)",
            value: m,
        });
    }
    check_in_disc(z)?;
    let (maps, lls) = prefetch(seq, n, m)?;
    let mut state = PointState::new(z);
    state.advance(&maps, &lls)?;
    Ok(state.value())
}

struct DoublingRun {
    values: Vec<Complex64>,
    m_used: usize,
    gap: f64,
    status: ConvergenceStatus,
}

/// Doubles the truncation length until the sup Cauchy increment over the
/// points drops below `tol`, the truncation passes `max_m`, or explicit data
/// runs out.
fn run_doubling(
    seq: &MapSequence,
    n: usize,
    points: &[Complex64],
    tol: f64,
    max_m: usize,
) -> Result<DoublingRun> {
    let hard_cap = seq
        .explicit_len()
        .map_or(max_m, |len| max_m.min(len));
    if hard_cap < n {
        return Err(Error::BeyondHorizon {
            index: n,
            len: hard_cap,
        });
    }
    let mut states: Vec<PointState> = points.iter().map(|&z| PointState::new(z)).collect();

    let mut m_prev = (n + INITIAL_BLOCK).min(hard_cap).max(n);
    {
        let (maps, lls) = prefetch(seq, n, m_prev)?;
        states
            .par_iter_mut()
            .try_for_each(|st| st.advance(&maps, &lls))?;
    }
    let mut prev: Vec<Complex64> = states.iter().map(PointState::value).collect();
    let mut gap = f64::INFINITY;

    loop {
        let m_next = (n + 2 * (m_prev - n).max(INITIAL_BLOCK)).min(hard_cap);
        if m_next <= m_prev {
            return Ok(DoublingRun {
                values: prev,
                m_used: m_prev,
                gap,
                status: ConvergenceStatus::NonConvergent,
            });
        }
        let (maps, lls) = prefetch(seq, m_prev, m_next)?;
        states
            .par_iter_mut()
            .try_for_each(|st| st.advance(&maps, &lls))?;
        let next: Vec<Complex64> = states.iter().map(PointState::value).collect();
        gap = next
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        prev = next;
        m_prev = m_next;
        if gap < tol {
            return Ok(DoublingRun {
                values: prev,
                m_used: m_prev,
                gap,
                status: ConvergenceStatus::Converged,
            });
        }
    }
}

/// Computes `φ_n` on a grid with a doubling Cauchy certificate, plus the
/// functional-equation residual against an independently certified `φ_{n+1}`.
pub fn koenigs_limit(
    seq: &MapSequence,
    n: usize,
    grid: &[Complex64],
    tol: f64,
    max_m: usize,
) -> Result<LinearizationResult> {
    if grid.is_empty() {
        return Err(Error::BadParameter {
            what: "grid size (needs at least one point)",
            value: 0.0,
        });
    }
    crate::check_positive("tolerance", tol)?;
    for &z in grid {
        check_in_disc(z)?;
    }

    let mut warnings = Vec::new();
    let report = seq.classify(CLASSIFY_HORIZON)?;
    let c = seq.inf_lambda()?;
    let r_univ = univalence_radius(c)?;
    let certified_radius = match report.verdict {
        Verdict::Contracting => r_univ,
        Verdict::SemiContracting | Verdict::EventuallyIsometric => seq.product_limit(n + 1)?,
        Verdict::Undetermined => {
            warnings.push(
                "classification undetermined; certified radius falls back to the univalence radius"
                    .to_string(),
            );
            r_univ
        }
    };
    let outside = grid
        .iter()
        .filter(|z| z.norm() >= certified_radius)
        .count();
    if outside > 0 {
        warnings.push(format!(
            "{outside} grid point(s) lie outside the certified radius {certified_radius:.6e}; \
             values there carry no convergence guarantee"
        ));
    }

    let main = run_doubling(seq, n, grid, tol, max_m)?;
    if main.status == ConvergenceStatus::NonConvergent {
        warnings.push(format!(
            "Cauchy gap {:.3e} still above tol {tol:.1e} at truncation {}",
            main.gap, main.m_used
        ));
    }

    // Independent certification of φ_{n+1} at the pushed-forward grid.
    let g_n = seq.map_at(n)?;
    let lambda_n = seq.lambda_at(n)?;
    let pushed: Vec<Complex64> = grid
        .iter()
        .map(|&z| g_n.eval(z))
        .collect::<Result<_>>()?;
    let next = run_doubling(seq, n + 1, &pushed, tol, max_m)?;
    if next.status == ConvergenceStatus::NonConvergent {
        warnings.push(format!(
            "residual certification at index {} stopped non-convergent (gap {:.3e})",
            n + 1,
            next.gap
        ));
    }
    let residuals: Vec<f64> = next
        .values
        .iter()
        .zip(&main.values)
        .map(|(up, lo)| (up - lambda_n * lo).norm())
        .collect();
    let residual_sup = residuals.iter().copied().fold(0.0, f64::max);

    Ok(LinearizationResult {
        n,
        m_used: main.m_used,
        grid: grid.to_vec(),
        phi_values: main.values,
        univalence_radius: r_univ,
        certified_radius,
        residual_sup,
        residuals,
        cauchy_gap: main.gap,
        status: main.status,
        warnings,
        tol,
        max_m,
    })
}

/// `φ_{idx}` at a single point, spreading forward by the dynamics until the
/// orbit enters the disc where the doubling run is certified, then dividing
/// by the accumulated `Λ` in log space.
fn phi_value(
    seq: &MapSequence,
    idx: usize,
    z: Complex64,
    threshold: f64,
    tol: f64,
    max_m: usize,
) -> Result<Complex64> {
    check_in_disc(z)?;
    let mut w = z;
    let mut m = 0usize;
    let mut log_lambda = 0.0f64;
    while w.norm() >= threshold {
        w = seq.map_at(idx + m)?.eval(w)?;
        log_lambda += seq.lambda_at(idx + m)?.ln();
        m += 1;
        if m > SPREAD_STEP_CAP {
            return Err(Error::NonConvergent {
                context: format!(
                    "orbit of {z} from index {idx} did not enter the certified disc of radius \
                     {threshold:.3e}"
                ),
                limit: SPREAD_STEP_CAP,
            });
        }
    }
    if -log_lambda > LOG_SCALE_CAP {
        return Err(Error::NonConvergent {
            context: format!(
                "spreading factor exp({:.1}) from index {idx} overflows doubles",
                -log_lambda
            ),
            limit: m,
        });
    }
    let run = run_doubling(seq, idx + m, &[w], tol, max_m)?;
    Ok(run.values[0] * (-log_lambda).exp())
}

/// `φ_n(z)` outside the certified disc, via the least `m` with
/// `|G_n^{n+m}(z)|` below the certified radius of `base`.
///
/// Requires a contracting sequence (forward orbits reach the origin).
pub fn extend_by_dynamics(
    seq: &MapSequence,
    n: usize,
    z: Complex64,
    base: &LinearizationResult,
) -> Result<Complex64> {
    let report = seq.classify(CLASSIFY_HORIZON)?;
    if report.verdict != Verdict::Contracting {
        return Err(Error::Hypothesis(format!(
            "extend_by_dynamics needs a contracting sequence, classification is {}",
            report.verdict
        )));
    }
    phi_value(seq, n, z, base.certified_radius, base.tol, base.max_m)
}

/// Same as [`extend_by_dynamics`] but with a caller-chosen spreading depth
/// `m`; the value must be independent of any admissible choice.
pub fn extend_by_dynamics_from(
    seq: &MapSequence,
    n: usize,
    z: Complex64,
    base: &LinearizationResult,
    m: usize,
) -> Result<Complex64> {
    check_in_disc(z)?;
    let block = seq.compose_block(n, n + m)?;
    let w = block.eval(z)?;
    if w.norm() >= base.certified_radius {
        return Err(Error::Hypothesis(format!(
            "|G_n^(n+{m})(z)| = {:.6e} is not inside the certified radius {:.6e}",
            w.norm(),
            base.certified_radius
        )));
    }
    if -block.log_lambda() > LOG_SCALE_CAP {
        return Err(Error::NonConvergent {
            context: "spreading factor overflows doubles".into(),
            limit: m,
        });
    }
    let run = run_doubling(seq, n + m, &[w], base.tol, base.max_m)?;
    Ok(run.values[0] * (-block.log_lambda()).exp())
}

/// Sup over the grid of `|φ_{n+1}(g_n z) − λ_n φ_n(z)|`, evaluating each
/// family member at its own certified truncation.
pub fn commutation_residual(
    seq: &MapSequence,
    phi_n: &LinearizationResult,
    phi_next: &LinearizationResult,
    grid: &[Complex64],
) -> Result<f64> {
    if phi_next.n != phi_n.n + 1 {
        return Err(Error::Hypothesis(format!(
            "results are not consecutive: indices {} and {}",
            phi_n.n, phi_next.n
        )));
    }
    let g_n = seq.map_at(phi_n.n)?;
    let lambda_n = seq.lambda_at(phi_n.n)?;
    grid.par_iter()
        .map(|&z| -> Result<f64> {
            let lo = koenigs_e(seq, phi_n.n, phi_n.m_used, z)?;
            let hi = koenigs_e(seq, phi_next.n, phi_next.m_used, g_n.eval(z)?)?;
            Ok((hi - lambda_n * lo).norm())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Target surface of the `φ_0`-plane quotient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceKind {
    /// Contracting case: the φ-plane is all of ℂ minus the marked set.
    PlaneMinusSet,
    /// Non-contracting case: a bounded disc-like domain minus the marked set.
    DiscMinusSet,
}

/// Model of the quotient carrier: a plane or disc with the φ-images of the
/// critical values marked.
#[derive(Clone, Debug)]
pub struct QuotientSurfaceModel {
    pub kind: SurfaceKind,
    pub marked_points: Vec<Complex64>,
    /// Whether the marked set grows without bound with the horizon
    /// (countably infinite in the contracting case).
    pub countable_flag: bool,
    pub notes: Vec<String>,
}

/// Builds the quotient-model marked set from the critical values of
/// `g_0, …, g_{horizon-1}`.
///
/// Contracting: marked point of a critical value `v` of `g_k` is
/// `φ_{k+1}(v)/Λ_0^{k+1}` (spreading forward as needed). Otherwise the marked
/// point is `Φ_{k+1}(v) = Λ_{k+1}·φ_{k+1}(v) = lim_m G_{k+1}^m(v)`, computed
/// by direct iteration with a doubling Cauchy stop. Refuses sequences whose
/// classification is undetermined.
pub fn quotient_surface_model(seq: &MapSequence, horizon: usize) -> Result<QuotientSurfaceModel> {
    let report = seq.classify(CLASSIFY_HORIZON)?;
    if report.verdict == Verdict::Undetermined {
        return Err(Error::Undetermined(
            "quotient model needs a known tail; explicit finite data cannot be classified".into(),
        ));
    }
    let contracting = report.verdict == Verdict::Contracting;
    let c = seq.inf_lambda()?;
    let r_univ = univalence_radius(c)?;

    let mut notes = Vec::new();
    let mut marked: Vec<Complex64> = Vec::new();
    let mut log_lambda0 = 0.0f64; // log Λ_0^{k+1}, updated per level

    for k in 0..horizon {
        let g_k = match seq.map_at(k) {
            Ok(m) => m,
            Err(Error::BeyondHorizon { .. }) => break,
            Err(e) => return Err(e),
        };
        log_lambda0 += seq.lambda_at(k)?.ln();
        if contracting && -log_lambda0 > LOG_SCALE_CAP {
            notes.push(format!(
                "stopped at level {k}: scaling 1/Λ_0 exceeds exp({LOG_SCALE_CAP})"
            ));
            break;
        }
        for crit in g_k.critical_points()? {
            let v = g_k.eval(crit)?;
            let point = if contracting {
                phi_value(seq, k + 1, v, r_univ, QUOTIENT_TOL, QUOTIENT_MAX_M)?
                    * (-log_lambda0).exp()
            } else {
                limit_of_compositions(seq, k + 1, v)?
            };
            if marked.iter().all(|p| (p - point).norm() > MARKED_DEDUP) {
                marked.push(point);
            }
        }
    }

    Ok(QuotientSurfaceModel {
        kind: if contracting {
            SurfaceKind::PlaneMinusSet
        } else {
            SurfaceKind::DiscMinusSet
        },
        marked_points: marked,
        countable_flag: contracting,
        notes,
    })
}

/// `lim_m G_n^m(z)` by direct iteration with doubling Cauchy stops (defined
/// for non-contracting sequences; stabilizes bitwise once an isometric tail is
/// reached).
fn limit_of_compositions(seq: &MapSequence, n: usize, z: Complex64) -> Result<Complex64> {
    check_in_disc(z)?;
    let mut w = z;
    let mut m = n;
    let mut block = INITIAL_BLOCK;
    loop {
        let prev = w;
        for k in m..m + block {
            match seq.map_at(k) {
                Ok(map) => w = map.eval(w)?,
                Err(Error::BeyondHorizon { .. }) => return Ok(w),
                Err(e) => return Err(e),
            }
        }
        m += block;
        block *= 2;
        if (w - prev).norm() < QUOTIENT_TOL {
            return Ok(w);
        }
        if m - n > QUOTIENT_G_CAP {
            return Err(Error::NonConvergent {
                context: format!("limit of compositions from index {n} at {z}"),
                limit: QUOTIENT_G_CAP,
            });
        }
    }
}

/// Whether no two values collide at the given resolution (spatial hash, so
/// the check is linear in the number of points).
pub fn grid_injectivity(values: &[Complex64], resolution: f64) -> bool {
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |v: Complex64| -> (i64, i64) {
        (
            (v.re / resolution).floor() as i64,
            (v.im / resolution).floor() as i64,
        )
    };
    for (i, &v) in values.iter().enumerate() {
        cells.entry(key(v)).or_default().push(i);
    }
    for (&(cx, cy), members) in &cells {
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                let Some(others) = cells.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &i in members {
                    for &j in others {
                        if i < j && (values[i] - values[j]).norm() < resolution {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

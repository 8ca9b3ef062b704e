//! Command dispatch: builds domain objects from the scenario, runs the
//! requested analyses, and assembles the report.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::path::Path;
use std::time::Instant;

use super::report::{fmt_complex, fmt_f64, sha256_hex, RunReport, Section, Table};
use super::scenario::{self, Options, PayloadSpec, ScenarioFile};
use super::Command;
use crate::innerseq::{MapSequence, Verdict};
use crate::linearize::{self, ConvergenceStatus, SurfaceKind};
use crate::orbitrel::{self, OrbitSystem, RelationVerdict};
use crate::powertower::{self, CoveringTower, RotatedPower, TowerKind, TowerPoint};
use crate::teichreport::{self, ComponentReport, DimensionValue};
use crate::{sample, Error, Result};

/// Point cap for grand-orbit sampling.
const ORBIT_CAP: usize = 1 << 20;
/// Levels tabulated by tower-verify.
const TOWER_TABLE_LEVELS: usize = 12;

/// Fully resolved numeric options (defaults < scenario < config).
#[derive(Clone, Debug)]
struct Resolved {
    tolerance: f64,
    max_m: usize,
    horizon: usize,
    marked_horizon: usize,
    grid_radius: f64,
    grid_count: usize,
    seed: u64,
    start_index: usize,
    base_point: Complex64,
    depths: Vec<usize>,
    gap_floor: f64,
    decay_len: usize,
    point: Option<Complex64>,
}

impl Default for Resolved {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_m: 1 << 20,
            horizon: 10_000,
            marked_horizon: 6,
            grid_radius: 0.05,
            grid_count: 64,
            seed: 7,
            start_index: 0,
            base_point: Complex64::new(0.2, 0.0),
            depths: vec![1, 2, 3, 4],
            gap_floor: 1e-9,
            decay_len: 16,
            point: None,
        }
    }
}

impl Resolved {
    fn apply(mut self, opts: &Options) -> Self {
        if let Some(v) = opts.tolerance {
            self.tolerance = v;
        }
        if let Some(v) = opts.max_m {
            self.max_m = v;
        }
        if let Some(v) = opts.horizon {
            self.horizon = v;
        }
        if let Some(v) = opts.marked_horizon {
            self.marked_horizon = v;
        }
        if let Some(g) = opts.grid {
            self.grid_radius = g.radius;
            self.grid_count = g.count;
        }
        if let Some(v) = opts.seed {
            self.seed = v;
        }
        if let Some(v) = opts.start_index {
            self.start_index = v;
        }
        if let Some(p) = opts.base_point {
            self.base_point = Complex64::new(p[0], p[1]);
        }
        if let Some(d) = &opts.depths {
            self.depths = d.clone();
        }
        if let Some(v) = opts.gap_floor {
            self.gap_floor = v;
        }
        if let Some(v) = opts.decay_len {
            self.decay_len = v;
        }
        if let Some(p) = opts.point {
            self.point = Some(Complex64::new(p[0], p[1]));
        }
        self
    }

    fn config_lines(&self) -> Vec<(String, String)> {
        let mut lines = vec![
            ("tolerance".to_string(), fmt_f64(self.tolerance)),
            ("max_m".to_string(), self.max_m.to_string()),
            ("horizon".to_string(), self.horizon.to_string()),
            (
                "marked_horizon".to_string(),
                self.marked_horizon.to_string(),
            ),
            ("grid.radius".to_string(), fmt_f64(self.grid_radius)),
            ("grid.count".to_string(), self.grid_count.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("start_index".to_string(), self.start_index.to_string()),
            ("base_point".to_string(), fmt_complex(self.base_point)),
            (
                "depths".to_string(),
                self.depths
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("gap_floor".to_string(), fmt_f64(self.gap_floor)),
            ("decay_len".to_string(), self.decay_len.to_string()),
        ];
        lines.push((
            "point".to_string(),
            self.point.map_or_else(|| "auto".to_string(), fmt_complex),
        ));
        lines
    }
}

fn fmt_opt_bool(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "unknown",
    }
}

fn wrong_payload(command: Command, needs: &str, scenario: &ScenarioFile) -> Error {
    let found = match &scenario.payload {
        PayloadSpec::InnerSequence(_) => "an inner sequence",
        PayloadSpec::CoveringTower(_) => "a covering tower",
        PayloadSpec::ComponentList(_) => "a component list",
    };
    Error::Scenario(format!(
        "command {} needs {needs}, but scenario '{}' provides {found}",
        command.name(),
        scenario.name
    ))
}

/// Runs `command` against the scenario at `scenario_path`, optionally
/// overridden by a config file and persisted under `out`. Returns the
/// report and the process exit code (0 definite, 2 undetermined).
pub fn execute(
    command: Command,
    scenario_path: &Path,
    config_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<(RunReport, i32)> {
    let started = Instant::now();
    let (scenario, bytes) = scenario::ingest(scenario_path)?;
    let mut cfg = Resolved::default().apply(&scenario.options);
    if let Some(path) = config_path {
        cfg = cfg.apply(&scenario::read_config(path)?);
    }
    let mut report = RunReport::new(command.name(), &scenario.name, &sha256_hex(&bytes));
    report.config_lines = cfg.config_lines();

    let exit = dispatch(command, &scenario, &cfg, &mut report)?;
    report.wall_ms = started.elapsed().as_millis();
    if let Some(dir) = out {
        report.write_to(dir)?;
    }
    Ok((report, exit))
}

fn dispatch(
    command: Command,
    scenario: &ScenarioFile,
    cfg: &Resolved,
    report: &mut RunReport,
) -> Result<i32> {
    match command {
        Command::Classify => classify_cmd(&need_sequence(command, scenario)?, cfg, report),
        Command::Linearize => linearize_cmd(&need_sequence(command, scenario)?, cfg, report),
        Command::Quotient => quotient_cmd(&need_sequence(command, scenario)?, cfg, report),
        Command::TowerVerify => {
            let (tower, rotations) = need_tower(command, scenario)?;
            tower_verify_cmd(&tower, rotations.as_deref(), cfg, report)
        }
        Command::Orbit => orbit_cmd(scenario, cfg, report),
        Command::InjDecay => {
            let (tower, _) = need_tower(command, scenario)?;
            inj_decay_cmd(&tower, cfg, report)
        }
        Command::TeichDim => teich_dim_cmd(&need_components(command, scenario)?, cfg, report),
        Command::All => {
            let mut exit = 0;
            let subcommands: &[Command] = match &scenario.payload {
                PayloadSpec::InnerSequence(_) => &[
                    Command::Classify,
                    Command::Linearize,
                    Command::Quotient,
                    Command::Orbit,
                ],
                PayloadSpec::CoveringTower(_) => {
                    &[Command::TowerVerify, Command::InjDecay, Command::Orbit]
                }
                PayloadSpec::ComponentList(_) => &[Command::TeichDim],
            };
            for &sub in subcommands {
                exit = exit.max(dispatch(sub, scenario, cfg, report)?);
            }
            Ok(exit)
        }
    }
}

fn need_sequence(command: Command, scenario: &ScenarioFile) -> Result<MapSequence> {
    match &scenario.payload {
        PayloadSpec::InnerSequence(spec) => spec.build(),
        _ => Err(wrong_payload(command, "an inner-sequence payload", scenario)),
    }
}

fn need_tower(
    command: Command,
    scenario: &ScenarioFile,
) -> Result<(CoveringTower, Option<Vec<f64>>)> {
    match &scenario.payload {
        PayloadSpec::CoveringTower(spec) => Ok((spec.build()?, spec.rotations.clone())),
        _ => Err(wrong_payload(command, "a covering-tower payload", scenario)),
    }
}

fn need_components(
    command: Command,
    scenario: &ScenarioFile,
) -> Result<(Vec<ComponentReport>, bool)> {
    match &scenario.payload {
        PayloadSpec::ComponentList(spec) => {
            let components = spec
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| c.build(&format!("{} component {i}", scenario.name)))
                .collect::<Result<Vec<_>>>()?;
            Ok((components, spec.infinite_family))
        }
        _ => Err(wrong_payload(command, "a component-list payload", scenario)),
    }
}

/// Start point for tower commands: explicit option, else the core circle
/// (annulus) or the length-1 horocycle (punctured disc).
fn tower_start(tower: &CoveringTower, cfg: &Resolved) -> Result<TowerPoint> {
    if let Some(z) = cfg.point {
        return Ok(TowerPoint { n: 0, z });
    }
    let z = match tower.kind() {
        TowerKind::Annulus => {
            Complex64::from_polar(tower.level_annulus(0)?.core_radius(), 0.0)
        }
        TowerKind::PuncturedDisc => Complex64::from_polar((-TAU).exp(), 0.0),
    };
    Ok(TowerPoint { n: 0, z })
}

fn classify_cmd(seq: &MapSequence, cfg: &Resolved, report: &mut RunReport) -> Result<i32> {
    let outcome = seq.classify(cfg.horizon)?;
    let mut s = Section::new("classification");
    s.push("verdict", outcome.verdict.to_string());
    s.push("terms_used", outcome.terms_used.to_string());
    s.push("partial_deficit_sum", fmt_f64(outcome.partial_deficit_sum));
    s.push(
        "tail_deficit_diverges",
        fmt_opt_bool(outcome.tail.deficit_sum_diverges),
    );
    s.push(
        "tail_eventually_isometric",
        fmt_opt_bool(outcome.tail.eventually_isometric),
    );
    s.push("inf_lambda", fmt_f64(seq.inf_lambda()?));
    s.push("lambda_product_from_0", fmt_f64(seq.product_limit(0)?));
    s.push("lambda_product_from_1", fmt_f64(seq.product_limit(1)?));
    report.sections.push(s);
    Ok(if outcome.verdict == Verdict::Undetermined {
        2
    } else {
        0
    })
}

fn linearize_cmd(seq: &MapSequence, cfg: &Resolved, report: &mut RunReport) -> Result<i32> {
    let grid = sample::disc_points(
        &mut sample::rng(cfg.seed),
        cfg.grid_radius,
        cfg.grid_count,
    );
    let result = linearize::koenigs_limit(seq, cfg.start_index, &grid, cfg.tolerance, cfg.max_m)?;
    let mut s = Section::new("linearization");
    s.push("n", result.n.to_string());
    s.push("m_used", result.m_used.to_string());
    s.push(
        "status",
        match result.status {
            ConvergenceStatus::Converged => "converged",
            ConvergenceStatus::NonConvergent => "non-convergent",
        },
    );
    s.push("cauchy_gap", fmt_f64(result.cauchy_gap));
    s.push("residual_sup", fmt_f64(result.residual_sup));
    s.push("univalence_radius", fmt_f64(result.univalence_radius));
    s.push("certified_radius", fmt_f64(result.certified_radius));
    for (i, w) in result.warnings.iter().enumerate() {
        s.push(&format!("warning_{i}"), w.clone());
    }
    report.sections.push(s);

    let mut table = Table::new("phi", &["z_re", "z_im", "phi_re", "phi_im", "residual"]);
    for ((z, phi), r) in result
        .grid
        .iter()
        .zip(&result.phi_values)
        .zip(&result.residuals)
    {
        table.push_row(vec![
            fmt_f64(z.re),
            fmt_f64(z.im),
            fmt_f64(phi.re),
            fmt_f64(phi.im),
            fmt_f64(*r),
        ]);
    }
    report.tables.push(table);
    Ok(if result.status == ConvergenceStatus::NonConvergent {
        2
    } else {
        0
    })
}

fn quotient_cmd(seq: &MapSequence, cfg: &Resolved, report: &mut RunReport) -> Result<i32> {
    let model = linearize::quotient_surface_model(seq, cfg.marked_horizon)?;
    let mut s = Section::new("quotient-surface");
    s.push(
        "carrier",
        match model.kind {
            SurfaceKind::PlaneMinusSet => "plane-minus-marked-set",
            SurfaceKind::DiscMinusSet => "disc-minus-marked-set",
        },
    );
    s.push("marked_points", model.marked_points.len().to_string());
    s.push(
        "countable_marked_set",
        if model.countable_flag { "yes" } else { "no" },
    );
    for (i, note) in model.notes.iter().enumerate() {
        s.push(&format!("note_{i}"), note.clone());
    }
    report.sections.push(s);

    let mut table = Table::new("marked", &["index", "re", "im"]);
    for (i, p) in model.marked_points.iter().enumerate() {
        table.push_row(vec![i.to_string(), fmt_f64(p.re), fmt_f64(p.im)]);
    }
    report.tables.push(table);
    Ok(0)
}

fn orbit_cmd(scenario: &ScenarioFile, cfg: &Resolved, report: &mut RunReport) -> Result<i32> {
    // Bind the built objects so the borrowed OrbitSystem outlives the call.
    let seq;
    let tower;
    let (sys, base) = match &scenario.payload {
        PayloadSpec::InnerSequence(spec) => {
            seq = spec.build()?;
            (OrbitSystem::Inner(&seq), cfg.base_point)
        }
        PayloadSpec::CoveringTower(spec) => {
            tower = spec.build()?;
            let start = tower_start(&tower, cfg)?;
            (OrbitSystem::Tower(&tower), start.z)
        }
        PayloadSpec::ComponentList(_) => {
            return Err(wrong_payload(
                Command::Orbit,
                "an inner-sequence or covering-tower payload",
                scenario,
            ))
        }
    };
    let detect = orbitrel::discreteness_detect(&sys, base, &cfg.depths, cfg.gap_floor, ORBIT_CAP)?;
    let mut s = Section::new("grand-orbit");
    s.push("base", fmt_complex(base));
    s.push("verdict", detect.verdict.to_string());
    s.push("structural", if detect.structural { "yes" } else { "no" });
    s.push("note", detect.note.clone());
    report.sections.push(s);

    let mut table = Table::new("orbit_gaps", &["depth", "min_gap"]);
    for (depth, gap) in &detect.gaps {
        table.push_row(vec![depth.to_string(), fmt_f64(*gap)]);
    }
    report.tables.push(table);
    Ok(if detect.verdict == RelationVerdict::Undetermined {
        2
    } else {
        0
    })
}

fn tower_verify_cmd(
    tower: &CoveringTower,
    rotations: Option<&[f64]>,
    cfg: &Resolved,
    report: &mut RunReport,
) -> Result<i32> {
    let start = tower_start(tower, cfg)?;
    let mut s = Section::new("tower");
    s.push(
        "kind",
        match tower.kind() {
            TowerKind::Annulus => "annulus",
            TowerKind::PuncturedDisc => "punctured-disc",
        },
    );
    s.push(
        "eventually_isometric",
        if tower.degrees().eventually_one() {
            "yes"
        } else {
            "no"
        },
    );
    s.push("start", fmt_complex(start.z));
    report.sections.push(s);

    let mut table = Table::new(
        "tower",
        &["level", "degree", "total_degree", "modulus", "witness_gap"],
    );
    for level in 0..TOWER_TABLE_LEVELS {
        let modulus = match tower.kind() {
            TowerKind::Annulus => fmt_f64(tower.push_modulus(level)?),
            TowerKind::PuncturedDisc => "-".to_string(),
        };
        table.push_row(vec![
            level.to_string(),
            tower.degree_at(level).to_string(),
            tower.total_degree(level).to_string(),
            modulus,
            fmt_f64(powertower::indiscreteness_witness(tower, &start, level)?),
        ]);
    }
    report.tables.push(table);

    if let Some(alphas) = rotations {
        if tower.kind() != TowerKind::Annulus {
            return Err(Error::Scenario(
                "rotation verification needs an annulus tower (core circles)".into(),
            ));
        }
        let maps: Vec<RotatedPower> = alphas
            .iter()
            .enumerate()
            .map(|(n, &alpha)| RotatedPower {
                alpha,
                degree: tower.degree_at(n),
            })
            .collect();
        let betas = powertower::rotation_corrections(&maps);
        let mut points = Vec::new();
        for level in 0..maps.len() {
            points.extend(powertower::core_circle_points(tower, level, 32)?);
        }
        let corrected = powertower::conjugacy_residual(tower, &maps, &betas, &points)?;
        let naive_phis = vec![0.0; maps.len() + 1];
        let naive = powertower::conjugacy_residual(tower, &maps, &naive_phis, &points)?;
        let mut s = Section::new("rotations");
        s.push("levels", maps.len().to_string());
        s.push("corrected_residual", fmt_f64(corrected));
        s.push("uncorrected_residual", fmt_f64(naive));
        report.sections.push(s);

        let mut table = Table::new("betas", &["n", "alpha", "beta"]);
        for (n, beta) in betas.iter().enumerate() {
            let alpha = alphas.get(n).map_or_else(|| "-".to_string(), |a| fmt_f64(*a));
            table.push_row(vec![n.to_string(), alpha, fmt_f64(*beta)]);
        }
        report.tables.push(table);
    }
    Ok(0)
}

fn inj_decay_cmd(tower: &CoveringTower, cfg: &Resolved, report: &mut RunReport) -> Result<i32> {
    let start = tower_start(tower, cfg)?;
    let decay = powertower::inj_decay(tower, &start, cfg.decay_len)?;
    let mut s = Section::new("injectivity-decay");
    s.push("start", fmt_complex(start.z));
    s.push("levels", decay.values.len().to_string());
    s.push("truncated", if decay.truncated { "yes" } else { "no" });
    if let Some(last) = decay.values.last() {
        s.push("last_value", fmt_f64(*last));
    }
    report.sections.push(s);

    let mut table = Table::new("decay", &["level", "injectivity_radius"]);
    for (level, v) in decay.values.iter().enumerate() {
        table.push_row(vec![level.to_string(), fmt_f64(*v)]);
    }
    report.tables.push(table);
    Ok(0)
}

fn teich_dim_cmd(
    payload: &(Vec<ComponentReport>, bool),
    _cfg: &Resolved,
    report: &mut RunReport,
) -> Result<i32> {
    let (components, infinite_family) = payload;
    let verdict = teichreport::total_dimension(components, *infinite_family);
    let mut s = Section::new("dimension");
    s.push("total", verdict.value.to_string());
    s.push("components", components.len().to_string());
    s.push(
        "infinite_family",
        if *infinite_family { "yes" } else { "no" },
    );
    report.sections.push(s);

    let mut table = Table::new("components", &["index", "kind", "relation", "contribution"]);
    for (i, (c, dim)) in components.iter().zip(&verdict.breakdown).enumerate() {
        let kind = match c.kind() {
            teichreport::ComponentKind::FiniteModulusAnnulus(mu) => {
                format!("annulus({})", fmt_f64(mu))
            }
            teichreport::ComponentKind::PuncturedDisc => "punctured-disc".to_string(),
            teichreport::ComponentKind::SimplyConnectedPiece => "simply-connected".to_string(),
            teichreport::ComponentKind::Other => "other".to_string(),
        };
        table.push_row(vec![
            i.to_string(),
            kind,
            c.relation().to_string(),
            dim.to_string(),
        ]);
    }
    report.tables.push(table);
    Ok(if verdict.value == DimensionValue::Unknown {
        2
    } else {
        0
    })
}

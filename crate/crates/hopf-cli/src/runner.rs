//! Task execution and deterministic report assembly.
//!
//! A report is a single structured text document plus one series file per
//! series-producing task. All numeric output is rendered with 17
//! significant digits, and nothing nondeterministic (timings, paths) ever
//! enters the report bytes; wall-clock goes to stdout.

use crate::config::{Scenario, TaskKind};
use anyhow::{anyhow, Context, Result};
use hopf_core::discrete::{
    union_systems, z_on_cyclic_system, z_translation_system, DiscreteSystem,
};
use hopf_core::engine::{
    classify_point, classify_series, hopf_transform, lattice_reduce, maharam_criterion,
    poincare_test, return_volume, Verdict, WindowSeries,
};
use hopf_core::group::{GroupElement, ScanProfile};
use hopf_core::homogeneous::{compactness_integral, weil_verify, CompactnessVerdict};
use hopf_core::rng::derive_seed;
use std::fmt::Write as _;

/// Rendered outcome of one scenario run.
pub struct RunReport {
    pub document: String,
    /// `(file stem, contents)` for each emitted series file.
    pub series_files: Vec<(String, String)>,
    pub undecided_count: usize,
    pub wall_clock_ms: u128,
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn render_series(series: &WindowSeries) -> String {
    let mut out = String::new();
    for ((n, v), vol) in series.window_values.iter().zip(&series.window_volumes) {
        writeln!(out, "{n} {} {}", fmt_f(*v), fmt_f(*vol)).unwrap();
    }
    out
}

fn builtin_system(name: &str) -> Result<DiscreteSystem> {
    match name {
        "z_on_z" => Ok(z_translation_system(40, 16)),
        "z_on_cyclic_12" => Ok(z_on_cyclic_system(12, 16)),
        "union_z_cyclic" => {
            union_systems(&z_on_cyclic_system(12, 16), &z_translation_system(40, 16))
                .map_err(|e| anyhow!("builtin union: {e}"))
        }
        other => {
            let path = other
                .strip_prefix("file:")
                .ok_or_else(|| anyhow!("unknown system `{other}`"))?;
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading system file {path}"))?;
            DiscreteSystem::parse(&text).map_err(|e| anyhow!("parsing system file {path}: {e}"))
        }
    }
}

fn verdict_str(v: &Verdict) -> String {
    match v {
        Verdict::Conservative => "Conservative".into(),
        Verdict::Dissipative => "Dissipative".into(),
        Verdict::Undecided(reason) => format!("Undecided({reason})"),
    }
}

pub fn run_scenario(scenario: &Scenario) -> Result<RunReport> {
    let started = std::time::Instant::now();
    let mut doc = String::new();
    let mut series_files: Vec<(String, String)> = Vec::new();
    let mut undecided = 0usize;

    writeln!(doc, "hopf-report v1").unwrap();
    writeln!(doc, "scenario: {}", scenario.id).unwrap();
    match scenario.seed {
        Some(s) => writeln!(doc, "seed: {s}").unwrap(),
        None => writeln!(doc, "seed: none").unwrap(),
    }
    if let Some(space) = &scenario.space {
        writeln!(doc, "space: {}", space.name).unwrap();
        writeln!(doc, "truncation: {}", fmt_f(space.truncation)).unwrap();
    }
    writeln!(
        doc,
        "policy: min_windows={} blowup_factor={} sat_tol={} sat_windows={} min_slope={} quorum={}",
        scenario.policy.min_windows,
        fmt_f(scenario.policy.blowup_factor),
        fmt_f(scenario.policy.sat_tol),
        scenario.policy.sat_windows,
        fmt_f(scenario.policy.min_slope),
        fmt_f(scenario.policy.quorum),
    )
    .unwrap();
    writeln!(
        doc,
        "quadrature: nodes={} max_panel={} max_panels={} scan={}",
        scenario.spec.nodes,
        fmt_f(scenario.spec.max_panel),
        scenario.spec.max_panels,
        scenario.spec.scan
    )
    .unwrap();
    writeln!(doc, "schedule: closed balls of radius 2^n (doubling)").unwrap();
    writeln!(
        doc,
        "gauges: Z^d/R^d sup-norm boxes; Aff max(|log a|, |b|/min(1,a)); E2 |v|_2 (rotation free)"
    )
    .unwrap();

    for task in &scenario.tasks {
        let seed = scenario.seed.unwrap_or(0);
        let task_seed = derive_seed(seed, task.id.len() as u64 ^ 0x5441534b);
        writeln!(doc).unwrap();
        match &task.kind {
            TaskKind::Transform { f, point, max_window } => {
                let space = scenario.space.as_ref().expect("validated");
                let x = match point {
                    Some(p) => p.clone(),
                    None => space.sample(1, task_seed, 0).pop().unwrap(),
                };
                let series = hopf_transform(space, f, &x, *max_window, &scenario.spec)?;
                let class = classify_point(&series, &scenario.policy);
                if !class.verdict.is_decided() {
                    undecided += 1;
                }
                writeln!(doc, "[task {} transform]", task.id).unwrap();
                writeln!(doc, "point: {x:?}").unwrap();
                writeln!(doc, "f: {}", f.name()).unwrap();
                writeln!(doc, "verdict: {}", verdict_str(&class.verdict)).unwrap();
                writeln!(doc, "last: {}", fmt_f(class.evidence.last_value)).unwrap();
                writeln!(doc, "slope: {}", fmt_f(class.evidence.slope)).unwrap();
                writeln!(doc, "series-file: {}.series", task.id).unwrap();
                series_files.push((task.id.clone(), render_series(&series)));
            }
            TaskKind::Classify { f, points, max_window } => {
                let space = scenario.space.as_ref().expect("validated");
                let sample = space.sample(*points, task_seed, 1);
                let mut conservative = 0usize;
                let mut dissipative = 0usize;
                let mut task_undecided = 0usize;
                for x in &sample {
                    let series = hopf_transform(space, f, x, *max_window, &scenario.spec)?;
                    match classify_point(&series, &scenario.policy).verdict {
                        Verdict::Conservative => conservative += 1,
                        Verdict::Dissipative => dissipative += 1,
                        Verdict::Undecided(_) => task_undecided += 1,
                    }
                }
                undecided += task_undecided;
                let verdict = if conservative > 0 && dissipative == 0 && task_undecided == 0 {
                    "Conservative"
                } else if dissipative > 0 && conservative == 0 && task_undecided == 0 {
                    "Dissipative"
                } else if conservative > 0 && dissipative > 0 {
                    "Mixed"
                } else {
                    "Undecided"
                };
                writeln!(doc, "[task {} classify]", task.id).unwrap();
                writeln!(doc, "f: {}", f.name()).unwrap();
                writeln!(doc, "points: {}", sample.len()).unwrap();
                writeln!(
                    doc,
                    "votes: conservative={conservative} dissipative={dissipative} undecided={task_undecided}"
                )
                .unwrap();
                writeln!(doc, "verdict: {verdict}").unwrap();
            }
            TaskKind::ReturnVolume { set, point, max_window } => {
                let space = scenario.space.as_ref().expect("validated");
                let x = match point {
                    Some(p) => p.clone(),
                    None => space.sample(1, task_seed, 2).pop().unwrap(),
                };
                let series = return_volume(space, set, &x, *max_window, &scenario.spec)?;
                let class = classify_series(&series, &scenario.policy);
                if !class.verdict.is_decided() {
                    undecided += 1;
                }
                writeln!(doc, "[task {} return-volume]", task.id).unwrap();
                writeln!(doc, "set: {}", set.name()).unwrap();
                writeln!(doc, "point: {x:?}").unwrap();
                writeln!(doc, "verdict: {}", verdict_str(&class.verdict)).unwrap();
                writeln!(doc, "last: {}", fmt_f(class.evidence.last_value)).unwrap();
                writeln!(doc, "series-file: {}.series", task.id).unwrap();
                series_files.push((task.id.clone(), render_series(&series)));
            }
            TaskKind::Poincare { set, max_window, overlap_samples } => {
                let space = scenario.space.as_ref().expect("validated");
                let rep = poincare_test(
                    space,
                    set,
                    *max_window,
                    *overlap_samples,
                    &scenario.policy,
                    &scenario.spec,
                    scenario.seed.unwrap_or(0),
                )?;
                if !rep.verdict.is_decided() {
                    undecided += 1;
                }
                writeln!(doc, "[task {} poincare]", task.id).unwrap();
                writeln!(doc, "set: {}", set.name()).unwrap();
                writeln!(doc, "verdict: {}", verdict_str(&rep.verdict)).unwrap();
                writeln!(doc, "fubini-lhs: {}", fmt_f(rep.fubini_lhs)).unwrap();
                writeln!(doc, "fubini-rhs: {}", fmt_f(rep.fubini_rhs)).unwrap();
                writeln!(doc, "fubini-residual: {}", fmt_f(rep.fubini_residual)).unwrap();
                writeln!(doc, "series-file: {}.series", task.id).unwrap();
                series_files.push((task.id.clone(), render_series(&rep.series)));
            }
            TaskKind::Maharam { f, point, levels, max_window } => {
                let space = scenario.space.as_ref().expect("validated");
                let x = match point {
                    Some(p) => p.clone(),
                    None => space.sample(1, task_seed, 3).pop().unwrap(),
                };
                let rep = maharam_criterion(
                    space,
                    f,
                    &x,
                    levels,
                    *max_window,
                    &scenario.policy,
                    &scenario.spec,
                )?;
                if !rep.verdict.is_decided() {
                    undecided += 1;
                }
                writeln!(doc, "[task {} maharam]", task.id).unwrap();
                writeln!(doc, "point: {x:?}").unwrap();
                writeln!(doc, "levels: {}", levels.len()).unwrap();
                writeln!(doc, "verdict: {}", verdict_str(&rep.verdict)).unwrap();
                for level in &rep.levels {
                    let stem = format!("{}-r{}", task.id, fmt_f(level.r));
                    writeln!(doc, "series-file: {stem}.series (r={})", fmt_f(level.r)).unwrap();
                    series_files.push((stem, render_series(&level.series)));
                }
            }
            TaskKind::Lattice { f, point, max_window } => {
                let space = scenario.space.as_ref().expect("validated");
                let x = match point {
                    Some(p) => p.clone(),
                    None => space.sample(1, task_seed, 4).pop().unwrap(),
                };
                let rep = lattice_reduce(space, f, &x, *max_window, &scenario.spec)?;
                writeln!(doc, "[task {} lattice]", task.id).unwrap();
                writeln!(doc, "point: {x:?}").unwrap();
                writeln!(doc, "max-residual: {}", fmt_f(rep.max_residual)).unwrap();
                let mut body = String::new();
                for (n, s_g, s_h, diff) in &rep.rows {
                    writeln!(body, "{n} {} {} {}", fmt_f(*s_g), fmt_f(*s_h), fmt_f(*diff))
                        .unwrap();
                }
                writeln!(doc, "series-file: {}.series", task.id).unwrap();
                series_files.push((task.id.clone(), body));
            }
            TaskKind::Weil { pair, radius } => {
                let window = pair.ambient.window_with_radius(1, *radius);
                let phi = |g: &GroupElement| {
                    let mut c = Vec::new();
                    g.canonical_coords(&mut c);
                    (-0.5 * c.iter().map(|x| x * x).sum::<f64>()).exp()
                };
                let (lhs, rhs, residual) =
                    weil_verify(pair, &phi, &window, &scenario.spec, ScanProfile::Smooth)?;
                let comp = compactness_integral(pair, 6, &scenario.spec);
                writeln!(doc, "[task {} weil]", task.id).unwrap();
                writeln!(doc, "pair: {} / {}", pair.ambient.kind, pair.subgroup).unwrap();
                writeln!(doc, "lhs: {}", fmt_f(lhs)).unwrap();
                writeln!(doc, "rhs: {}", fmt_f(rhs)).unwrap();
                writeln!(doc, "residual: {}", fmt_f(residual)).unwrap();
                match comp.verdict {
                    CompactnessVerdict::Finite(v) => {
                        writeln!(doc, "compactness: finite {}", fmt_f(v)).unwrap()
                    }
                    CompactnessVerdict::InfiniteByGrowth => {
                        writeln!(doc, "compactness: infinite-by-growth").unwrap()
                    }
                }
            }
            TaskKind::DiscreteExact { system } => {
                let ds = builtin_system(system)?;
                let p = ds.hopf_decompose_exact().map_err(|e| anyhow!("{e}"))?;
                writeln!(doc, "[task {} discrete-exact]", task.id).unwrap();
                writeln!(doc, "system: {system}").unwrap();
                writeln!(doc, "group: {}", ds.group.render()).unwrap();
                writeln!(doc, "core: {}", ds.core_points().count()).unwrap();
                writeln!(doc, "conservative: {}", p.conservative.len()).unwrap();
                writeln!(doc, "dissipative: {}", p.dissipative.len()).unwrap();
                writeln!(doc, "tmax-size: {}", p.t_max.t_max.len()).unwrap();
            }
            TaskKind::GreedyTmax { system, k } => {
                let ds = builtin_system(system)?;
                let t = ds.greedy_max_transient(*k).map_err(|e| anyhow!("{e}"))?;
                writeln!(doc, "[task {} greedy-tmax]", task.id).unwrap();
                writeln!(doc, "system: {system}").unwrap();
                writeln!(doc, "steps: {}", t.steps.len()).unwrap();
                for (i, (step, alpha)) in t.steps.iter().zip(&t.alphas).enumerate() {
                    writeln!(doc, "step {i}: size={} alpha={}", step.len(), alpha).unwrap();
                }
                writeln!(doc, "tmax: {:?}", t.t_max).unwrap();
            }
            TaskKind::HajianIto { system } => {
                let ds = builtin_system(system)?;
                let inv = ds.invariant_measure_search().map_err(|e| anyhow!("{e}"))?;
                writeln!(doc, "[task {} hajian-ito]", task.id).unwrap();
                writeln!(doc, "system: {system}").unwrap();
                writeln!(doc, "p1: {}", inv.p1.len()).unwrap();
                writeln!(doc, "p-infinity: {}", inv.p_inf.len()).unwrap();
                writeln!(doc, "n-part: {} (witnessed: {})", inv.n_part.len(), inv.n_witnessed)
                    .unwrap();
                writeln!(doc, "acip: {}", inv.acip.is_some()).unwrap();
                match &inv.no_acip_witness {
                    Some((set, w)) => writeln!(
                        doc,
                        "no-acip-witness: set={set:?} direction={} modulus={}",
                        w.direction, w.modulus
                    )
                    .unwrap(),
                    None => writeln!(doc, "no-acip-witness: none").unwrap(),
                }
            }
        }
    }

    Ok(RunReport {
        document: doc,
        series_files,
        undecided_count: undecided,
        wall_clock_ms: started.elapsed().as_millis(),
    })
}

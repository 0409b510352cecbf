//! Divergence/saturation estimators over the window schedule: the averaging
//! transform `S_f(x) = ∫_G ∇_g(x) f(g.x) dλ(g)`, return-set volumes
//! `λ(R_A(x) ∩ K_n)`, setwise overlap volumes, cocycle level sets, and the
//! lattice reduction identity.
//!
//! Divergence is not decidable from finitely many windows, so every verdict
//! goes through an explicit `DecisionPolicy` and `Undecided` is a
//! first-class outcome. Series are assembled shell by shell from
//! nonnegative increments, so monotonicity in the window index holds
//! exactly, not just up to quadrature noise.
//!
//! Every estimator is a pure function of `(space, inputs, seed)`; per-point
//! loops can run concurrently with partitioned seed streams, and windows
//! are indexed explicitly so series assembly is order-independent.

use crate::error::{CoreError, Result};
use crate::group::{GroupElement, GroupModel, ScanProfile};
use crate::quad::QuadratureSpec;
use crate::rng::{stream_of_coords, stream_rng};
use crate::space::{Point, SetDescriptor, SpaceModel, TestFunction};

/// Decision thresholds for divergence-vs-saturation verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionPolicy {
    pub min_windows: usize,
    /// Divergence is declared at `blowup_factor ×` the first positive
    /// window value.
    pub blowup_factor: f64,
    /// Relative increment over the last `sat_windows` windows below which
    /// the series counts as saturated.
    pub sat_tol: f64,
    pub sat_windows: usize,
    /// Minimal least-squares slope of `S_n` against `λ(K_n)` for the
    /// divergence verdict.
    pub min_slope: f64,
    /// Fraction of sampled points that must agree for a set verdict.
    pub quorum: f64,
}

impl Default for DecisionPolicy {
    fn default() -> Self {
        DecisionPolicy {
            min_windows: 6,
            blowup_factor: 1e6,
            sat_tol: 1e-6,
            sat_windows: 3,
            min_slope: 1e-3,
            quorum: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Conservative,
    Dissipative,
    Undecided(String),
}

impl Verdict {
    pub fn is_decided(&self) -> bool {
        !matches!(self, Verdict::Undecided(_))
    }
}

/// Diagnostics snapshot attached to every classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub last_value: f64,
    pub slope: f64,
    pub saturation: f64,
    pub blowup_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub evidence: Diagnostics,
    pub policy: DecisionPolicy,
}

/// Window-indexed nondecreasing series with divergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSeries {
    pub window_values: Vec<(u32, f64)>,
    pub window_volumes: Vec<f64>,
    /// Least-squares slope of the values against the window volumes over
    /// the trailing windows.
    pub slope_diagnostic: f64,
    /// Relative increment across the trailing windows.
    pub saturation_diagnostic: f64,
    /// Last window index with a strictly positive increment (0 = none).
    pub last_active_window: u32,
}

pub type HopfSeries = WindowSeries;
pub type ReturnVolumeSeries = WindowSeries;

/// Level-set volume series `λ{g ∈ K_n : ∇_g(x) f(g.x) ≥ r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetSeries {
    pub r: f64,
    pub series: WindowSeries,
}

fn assemble_series(increments: &[f64], volumes: &[f64], k: usize) -> WindowSeries {
    let mut values = Vec::with_capacity(increments.len());
    let mut acc = 0.0;
    let mut last_active = 0u32;
    for (i, inc) in increments.iter().enumerate() {
        // tiny negative quadrature noise is clamped so monotonicity is exact
        let inc = inc.max(0.0);
        acc += inc;
        if inc > 0.0 {
            last_active = (i + 1) as u32;
        }
        values.push(((i + 1) as u32, acc));
    }
    let slope = trailing_slope(&values, volumes, k + 1);
    let sat = trailing_saturation(&values, k);
    WindowSeries {
        window_values: values,
        window_volumes: volumes.to_vec(),
        slope_diagnostic: slope,
        saturation_diagnostic: sat,
        last_active_window: last_active,
    }
}

fn trailing_slope(values: &[(u32, f64)], volumes: &[f64], points: usize) -> f64 {
    let n = values.len().min(volumes.len());
    if n < 2 {
        return 0.0;
    }
    let take = points.clamp(2, n);
    let ys: Vec<f64> = values[n - take..n].iter().map(|(_, v)| *v).collect();
    let xs: Vec<f64> = volumes[n - take..n].to_vec();
    let mx = xs.iter().sum::<f64>() / take as f64;
    let my = ys.iter().sum::<f64>() / take as f64;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        cov += (x - mx) * (y - my);
        var += (x - mx) * (x - mx);
    }
    if var <= 0.0 {
        0.0
    } else {
        cov / var
    }
}

fn trailing_saturation(values: &[(u32, f64)], k: usize) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let back = k.min(n - 1);
    let last = values[n - 1].1;
    let before = values[n - 1 - back].1;
    (last - before) / last.abs().max(1e-300)
}

/// Classifies a window series via the policy: saturated series are
/// dissipative-side, blown-up or persistently growing series are
/// conservative-side, anything else is `Undecided`.
pub fn classify_series(series: &WindowSeries, policy: &DecisionPolicy) -> Classification {
    let n = series.window_values.len();
    let first_positive = series
        .window_values
        .iter()
        .map(|(_, v)| *v)
        .find(|v| *v > 0.0);
    let last = series.window_values.last().map(|(_, v)| *v).unwrap_or(0.0);
    let blowup = first_positive.map(|v| policy.blowup_factor * v).unwrap_or(f64::INFINITY);
    let evidence = Diagnostics {
        last_value: last,
        slope: series.slope_diagnostic,
        saturation: series.saturation_diagnostic,
        blowup_threshold: blowup,
    };
    // both conservative clauses require a live tail: a series that went
    // flat is never declared divergent, whatever its early ratios were
    let live = series.last_active_window as usize == n;
    let verdict = if n < policy.min_windows {
        Verdict::Undecided("insufficient windows".into())
    } else if last >= blowup && live {
        Verdict::Conservative
    } else if series.saturation_diagnostic < policy.sat_tol {
        Verdict::Dissipative
    } else if series.slope_diagnostic >= policy.min_slope && live {
        Verdict::Conservative
    } else {
        Verdict::Undecided("no decision rule met".into())
    };
    Classification { verdict, evidence, policy: policy.clone() }
}

fn window_volumes(group: &GroupModel, max_window: u32) -> Vec<f64> {
    (1..=max_window).map(|n| group.exhaustion_window(n).haar_volume).collect()
}

/// Accumulates shell integrals of a nonnegative group integrand into a
/// window series; `tail_bound(inner_radius)` may certify that the rest of a
/// shell is negligible so it can be skipped.
fn accumulate_windows(
    group: &GroupModel,
    max_window: u32,
    spec: &QuadratureSpec,
    profile: ScanProfile,
    integrand: &dyn Fn(&GroupElement) -> f64,
    tail_bound: Option<&dyn Fn(f64) -> f64>,
    k: usize,
) -> Result<WindowSeries> {
    let volumes = window_volumes(group, max_window);
    let mut increments = Vec::with_capacity(max_window as usize);
    let mut acc = 0.0f64;
    for n in 1..=max_window {
        let inner = if n == 1 { 0.0 } else { GroupModel::window_radius(n - 1) };
        let outer = GroupModel::window_radius(n);
        let shell_volume = volumes[(n - 1) as usize] - if n == 1 { 0.0 } else { volumes[(n - 2) as usize] };
        let skip = tail_bound
            .map(|b| b(inner) * shell_volume.max(0.0) < 1e-15 * acc.max(1.0))
            .unwrap_or(false);
        let inc = if skip {
            0.0
        } else {
            group.integrate_shell_radii(inner, outer, integrand, spec, profile)?
        };
        acc += inc.max(0.0);
        increments.push(inc);
    }
    Ok(assemble_series(&increments, &volumes, k))
}

/// Partial values of the averaging transform
/// `S_n = ∫_{K_n} ∇_g(x) f(g.x) dλ(g)`.
pub fn hopf_transform(
    space: &SpaceModel,
    f: &TestFunction,
    x: &Point,
    max_window: u32,
    spec: &QuadratureSpec,
) -> Result<HopfSeries> {
    hopf_transform_mode(space, f, x, max_window, spec, false)
}

/// As `hopf_transform`, optionally admitting nonnegative (indicator) test
/// functions for recurrence-theorem usage.
pub fn hopf_transform_mode(
    space: &SpaceModel,
    f: &TestFunction,
    x: &Point,
    max_window: u32,
    spec: &QuadratureSpec,
    allow_nonnegative: bool,
) -> Result<HopfSeries> {
    if !allow_nonnegative && !f.strictly_positive() {
        return Err(CoreError::DomainMismatch(
            "hopf transform needs a strictly positive test function".into(),
        ));
    }
    if max_window < 3 {
        return Err(CoreError::DomainMismatch("need at least 3 windows".into()));
    }
    let integrand = |g: &GroupElement| -> f64 {
        let gx = match space.act(g, x) {
            Ok(p) => p,
            Err(_) => return f64::NAN,
        };
        match space.rn_cocycle(g, x) {
            Ok(rn) => rn * f.eval(&gx),
            Err(_) => f64::NAN,
        }
    };
    let profile = if f.strictly_positive() { ScanProfile::Smooth } else { ScanProfile::InnerScan };
    let tail = |inner: f64| space.hopf_tail_bound(f, x, inner).unwrap_or(f64::INFINITY);
    accumulate_windows(
        &space.group,
        max_window,
        spec,
        profile,
        &integrand,
        Some(&tail),
        DecisionPolicy::default().sat_windows,
    )
}

/// Classifies the point behind a Hopf series.
pub fn classify_point(series: &HopfSeries, policy: &DecisionPolicy) -> Classification {
    classify_series(series, policy)
}

/// Return-set volume series `λ(R_A(x) ∩ K_n)` where
/// `R_A(x) = {g : x ∈ g.A}`.
pub fn return_volume(
    space: &SpaceModel,
    a: &SetDescriptor,
    x: &Point,
    max_window: u32,
    spec: &QuadratureSpec,
) -> Result<ReturnVolumeSeries> {
    let integrand = |g: &GroupElement| -> f64 {
        let ginv = space.group.inverse(g);
        match space.act(&ginv, x) {
            Ok(p) => f64::from(a.contains(&p)),
            Err(_) => f64::NAN,
        }
    };
    accumulate_windows(
        &space.group,
        max_window,
        spec,
        ScanProfile::InnerScan,
        &integrand,
        None,
        DecisionPolicy::default().sat_windows,
    )
}

/// Setwise verdict produced by [`classify_set`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetVerdict {
    HaarRecurrent,
    HaarTransient,
    Mixed,
}

#[derive(Debug, Clone)]
pub struct SetClassification {
    pub verdict: SetVerdict,
    /// Returns escape every bounded window along the sampled points.
    pub recurrent: bool,
    /// Returns stay inside a bounded window along the sampled points.
    pub transient: bool,
    pub recurrence_votes: (usize, usize),
    pub transience_votes: (usize, usize),
    pub per_point: Vec<(Point, ReturnVolumeSeries, Verdict)>,
}

/// Classifies a set from return-volume series: recurrence is sampled inside
/// `A`, transience over all of the sampled domain.
pub fn classify_set(
    space: &SpaceModel,
    a: &SetDescriptor,
    sample_points: &[Point],
    max_window: u32,
    policy: &DecisionPolicy,
    spec: &QuadratureSpec,
) -> Result<SetClassification> {
    if sample_points.is_empty() {
        return Err(CoreError::EmptySample("classify_set".into()));
    }
    let mut per_point = Vec::new();
    let mut rec_yes = 0usize;
    let mut rec_total = 0usize;
    let mut trans_yes = 0usize;
    let mut late_escape = true;
    let mut bounded_all = true;
    for x in sample_points {
        let series = return_volume(space, a, x, max_window, spec)?;
        let class = classify_series(&series, policy);
        let diverging = matches!(class.verdict, Verdict::Conservative);
        let saturating = matches!(class.verdict, Verdict::Dissipative);
        if a.contains(x) {
            rec_total += 1;
            if diverging {
                rec_yes += 1;
                if (series.last_active_window as usize) < max_window as usize {
                    late_escape = false;
                }
            }
        }
        if saturating {
            trans_yes += 1;
        }
        if series.last_active_window as usize * 2 > max_window as usize {
            bounded_all = false;
        }
        per_point.push((x.clone(), series, class.verdict));
    }
    let n = sample_points.len();
    let rec_quorum = rec_total > 0 && rec_yes as f64 >= policy.quorum * rec_total as f64;
    let trans_quorum = trans_yes as f64 >= policy.quorum * n as f64;
    let verdict = if rec_quorum {
        SetVerdict::HaarRecurrent
    } else if trans_quorum {
        SetVerdict::HaarTransient
    } else {
        SetVerdict::Mixed
    };
    Ok(SetClassification {
        recurrent: rec_quorum && late_escape,
        transient: trans_quorum && bounded_all,
        verdict,
        recurrence_votes: (rec_yes, rec_total),
        transience_votes: (trans_yes, n),
        per_point,
    })
}

/// Poincaré overlap report: the volume of group elements in each window
/// whose translate of `A` still meets `A` in positive mass.
#[derive(Debug, Clone)]
pub struct PoincareReport {
    pub series: WindowSeries,
    pub verdict: Verdict,
    /// Fubini cross-check at the last window: the overlap-mass integral
    /// `∫_{K} μ(A ∩ g.A) dλ(g)` computed group-side first (`lhs`) against
    /// the return-volume integral `∫_X 1_A(x) λ(R_A(x) ∩ K) dμ(x)`
    /// computed space-side first (`rhs`). The two orders must agree up to
    /// estimator error.
    pub fubini_lhs: f64,
    pub fubini_rhs: f64,
    pub fubini_residual: f64,
}

/// Tests setwise (Poincaré) recurrence. Overlap masses are estimated by a
/// seeded reference-measure sampler; a translate counts as overlapping as
/// soon as a sample lands in `A ∩ g.A` (under the zero-mass null any hit is
/// already significant at every level).
pub fn poincare_test(
    space: &SpaceModel,
    a: &SetDescriptor,
    max_window: u32,
    overlap_samples: usize,
    policy: &DecisionPolicy,
    spec: &QuadratureSpec,
    seed: u64,
) -> Result<PoincareReport> {
    if overlap_samples < 16 {
        return Err(CoreError::EmptySample("poincare overlap sampler".into()));
    }
    let exact_spec = spec.clone().with_scan(spec.scan.min(128));
    let discrete = space.is_discrete_domain();
    let overlap_positive = |g: &GroupElement| -> f64 {
        let ginv = space.group.inverse(g);
        if discrete {
            // atomic reference measure: decide positivity by the exact sum
            let mass = space.integrate(
                &|y| {
                    if !a.contains(y) {
                        return 0.0;
                    }
                    match space.act(&ginv, y) {
                        Ok(p) => f64::from(a.contains(&p)),
                        Err(_) => f64::NAN,
                    }
                },
                &exact_spec,
                ScanProfile::InnerScan,
                &[],
            );
            return f64::from(mass > 0.0);
        }
        // zero-mass null: any sampled hit is significant at every level
        let mut coords = Vec::new();
        g.canonical_coords(&mut coords);
        let mut rng = stream_rng(seed, stream_of_coords(&coords));
        for _ in 0..overlap_samples {
            let y = space.sample_one(&mut rng);
            if a.contains(&y) {
                if let Ok(p) = space.act(&ginv, &y) {
                    if a.contains(&p) {
                        return 1.0;
                    }
                }
            }
        }
        0.0
    };
    let series = accumulate_windows(
        &space.group,
        max_window,
        spec,
        ScanProfile::InnerScan,
        &overlap_positive,
        None,
        policy.sat_windows,
    )?;
    let verdict = classify_series(&series, policy).verdict;

    // Fubini cross-check: integrate 1_A(x) 1_A(g^{-1}.x) in both orders
    // with a coarser scan (the result is a residual, not a verdict).
    let inner_spec = spec.clone().with_scan(spec.scan.min(128));
    let window = space.group.exhaustion_window(max_window);
    let overlap_mass = |g: &GroupElement| -> f64 {
        let ginv = space.group.inverse(g);
        space.integrate(
            &|y| {
                if !a.contains(y) {
                    return 0.0;
                }
                match space.act(&ginv, y) {
                    Ok(p) => f64::from(a.contains(&p)),
                    Err(_) => f64::NAN,
                }
            },
            &inner_spec,
            ScanProfile::InnerScan,
            &[],
        )
    };
    let lhs = space.group.haar_integrate(&window, &overlap_mass, &inner_spec, ScanProfile::InnerScan)?;
    let return_mass = |x: &Point| -> f64 {
        if !a.contains(x) {
            return 0.0;
        }
        let membership = |g: &GroupElement| -> f64 {
            let ginv = space.group.inverse(g);
            match space.act(&ginv, x) {
                Ok(p) => f64::from(a.contains(&p)),
                Err(_) => f64::NAN,
            }
        };
        space
            .group
            .haar_integrate(&window, &membership, &inner_spec, ScanProfile::InnerScan)
            .unwrap_or(f64::NAN)
    };
    let rhs = space.integrate(&return_mass, &inner_spec, ScanProfile::InnerScan, &[]);
    let residual = (lhs - rhs).abs() / lhs.abs().max(1e-9);
    Ok(PoincareReport { series, verdict, fubini_lhs: lhs, fubini_rhs: rhs, fubini_residual: residual })
}

/// Cocycle level-set report for the pointwise recurrence criterion.
#[derive(Debug, Clone)]
pub struct MaharamReport {
    pub levels: Vec<LevelSetSeries>,
    pub verdict: Verdict,
}

/// For each `r` in the grid, accumulates `λ{g ∈ K_n : ∇_g(x) f(g.x) ≥ r}`.
/// Conservative-compatible iff some level diverges; dissipative-compatible
/// iff every level saturates.
pub fn maharam_criterion(
    space: &SpaceModel,
    f: &TestFunction,
    x: &Point,
    r_grid: &[f64],
    max_window: u32,
    policy: &DecisionPolicy,
    spec: &QuadratureSpec,
) -> Result<MaharamReport> {
    if !f.strictly_positive() {
        return Err(CoreError::DomainMismatch(
            "level-set criterion needs a strictly positive test function".into(),
        ));
    }
    let mut levels = Vec::new();
    let mut any_diverging = false;
    let mut all_saturating = true;
    for &r in r_grid {
        let integrand = |g: &GroupElement| -> f64 {
            let gx = match space.act(g, x) {
                Ok(p) => p,
                Err(_) => return f64::NAN,
            };
            match space.rn_cocycle(g, x) {
                Ok(rn) => f64::from(rn * f.eval(&gx) >= r),
                Err(_) => f64::NAN,
            }
        };
        let series = accumulate_windows(
            &space.group,
            max_window,
            spec,
            ScanProfile::InnerScan,
            &integrand,
            None,
            policy.sat_windows,
        )?;
        let class = classify_series(&series, policy);
        match class.verdict {
            Verdict::Conservative => {
                any_diverging = true;
                all_saturating = false;
            }
            Verdict::Dissipative => {}
            Verdict::Undecided(_) => all_saturating = false,
        }
        levels.push(LevelSetSeries { r, series });
    }
    let verdict = if any_diverging {
        Verdict::Conservative
    } else if all_saturating {
        Verdict::Dissipative
    } else {
        Verdict::Undecided("levels neither diverge nor all saturate".into())
    };
    Ok(MaharamReport { levels, verdict })
}

/// Default level grid `r = 2^{-k}, k = 0..=20`.
pub fn default_level_grid() -> Vec<f64> {
    (0..=20).map(|k| (2.0f64).powi(-k)).collect()
}

/// Matched-window comparison of the continuous transform `S_f` with the
/// reduced lattice transform `S_{f_Ω}` over `H = Z`.
#[derive(Debug, Clone)]
pub struct LatticeReduceReport {
    /// `(window, continuous value, lattice value, |difference|)`
    pub rows: Vec<(u32, f64, f64, f64)>,
    pub max_residual: f64,
}

/// Evaluates `f_Ω(x) = ∫_Ω ∇_g(x) f(g.x) dλ(g)` over the unit cell.
pub fn lattice_f_omega(
    space: &SpaceModel,
    f: &TestFunction,
    x: &Point,
    spec: &QuadratureSpec,
) -> Result<f64> {
    space.cell_transform(f, x, 0.0, 1.0, spec)
}

/// Compares `S_f^G` with `S_{f_Ω}^H` on matched windows: the `H`-window
/// `{-r..r}` of unit cells tiles `[-r, r+1)`, which is exactly the domain
/// used for the continuous side.
pub fn lattice_reduce(
    space: &SpaceModel,
    f: &TestFunction,
    x: &Point,
    max_window: u32,
    spec: &QuadratureSpec,
) -> Result<LatticeReduceReport> {
    let mut rows = Vec::new();
    let mut max_residual = 0.0f64;
    for n in 1..=max_window {
        let r = GroupModel::window_radius(n);
        // continuous side: one pass over the full matched interval
        let s_g = space.cell_transform(f, x, -r, r + 1.0, spec)?;
        // lattice side: cocycle-factorized sum of cell transforms
        let mut s_h = 0.0;
        let m = r as i64;
        for omega in -m..=m {
            let ge = GroupElement::Reals(vec![omega as f64]);
            let rn = space.rn_cocycle(&ge, x)?;
            let shifted = space.act(&ge, x)?;
            s_h += rn * lattice_f_omega(space, f, &shifted, spec)?;
        }
        let diff = (s_g - s_h).abs();
        max_residual = max_residual.max(diff);
        rows.push((n, s_g, s_h, diff));
    }
    Ok(LatticeReduceReport { rows, max_residual })
}

/// Separating-statistics table `u_{n,m}(x) = λ(R_{U_n ∩ T_m}(x) ∩ K_w)`.
#[derive(Debug, Clone)]
pub struct SeparatorReport {
    /// `table[n][m] = (u at x0, u at x1)`
    pub table: Vec<Vec<(f64, f64)>>,
    pub separated: bool,
    pub tolerance: f64,
}

/// Evaluates the separating statistics at both points. Callers supply
/// basis sets and sets previously classified Haar-transient; entries agree
/// along orbits, so `separated` witnesses distinct orbits.
pub fn orbit_separator(
    space: &SpaceModel,
    x0: &Point,
    x1: &Point,
    basis_sets: &[SetDescriptor],
    transient_sets: &[SetDescriptor],
    max_window: u32,
    spec: &QuadratureSpec,
) -> Result<SeparatorReport> {
    let tolerance = 1e-6;
    let mut table = Vec::new();
    let mut separated = false;
    for u in basis_sets {
        let mut row = Vec::new();
        for t in transient_sets {
            let cap = SetDescriptor::Intersection(vec![u.clone(), t.clone()]);
            let v0 = return_volume(space, &cap, x0, max_window, spec)?
                .window_values
                .last()
                .map(|(_, v)| *v)
                .unwrap_or(0.0);
            let v1 = return_volume(space, &cap, x1, max_window, spec)?
                .window_values
                .last()
                .map(|(_, v)| *v)
                .unwrap_or(0.0);
            if (v0 - v1).abs() > tolerance * v0.abs().max(v1.abs()).max(1.0) {
                separated = true;
            }
            row.push((v0, v1));
        }
        table.push(row);
    }
    Ok(SeparatorReport { table, separated, tolerance })
}

/// Ground-truth verdict for catalog instances with a known decomposition.
pub fn expected_verdict(space_name: &str) -> Option<Verdict> {
    let name = space_name.split('(').next().unwrap_or(space_name);
    match name {
        "circle_rotation" | "cyclic_points" => Some(Verdict::Conservative),
        "integer_translation" | "real_translation" | "real_exp_translation" | "translation"
        | "coset_plane" | "coset" | "krengel" => Some(Verdict::Dissipative),
        _ => None,
    }
}

/// Monte Carlo estimate of `μ(A ∩ g.A)` used by diagnostics displays.
pub fn overlap_mass_estimate(
    space: &SpaceModel,
    a: &SetDescriptor,
    g: &GroupElement,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = stream_rng(seed, 0x4f564c); // "OVL"
    let ginv = space.group.inverse(g);
    let mut hits = 0usize;
    for _ in 0..samples {
        let y = space.sample_one(&mut rng);
        if a.contains(&y) {
            if let Ok(p) = space.act(&ginv, &y) {
                if a.contains(&p) {
                    hits += 1;
                }
            }
        }
    }
    let spec = QuadratureSpec::default();
    Ok(hits as f64 / samples as f64 * space.truncated_mass(&spec))
}

//! Deterministic quadrature.
//!
//! The workhorse is panelled Gauss–Legendre with discontinuity location:
//! each 1-D integral is split at caller-supplied breakpoints, then a uniform
//! scan looks for jumps of the integrand (indicator edges, masked regions);
//! every detected jump is refined by bisection to machine precision and the
//! smooth pieces are integrated with a fixed-order rule. Multi-dimensional
//! integrals are iterated 1-D integrals whose bounds and breakpoints may
//! depend on the outer coordinates.
//!
//! A stratified Monte Carlo rule with an explicit seed covers box domains
//! where tensor rules are too expensive. Nothing here is adaptive: node
//! counts, scan resolution and panel caps are all part of the scheme, so a
//! scheme plus a seed fixes every sampled abscissa.

use crate::rng::stream_rng;
use rand::Rng;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

/// Quadrature scheme parameters. `nodes` is the Gauss–Legendre order per
/// panel, `max_panel` caps panel width, `scan` is the per-piece resolution of
/// the jump scan (0 disables it).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub max_panel: f64,
    pub max_panels: usize,
    pub scan: usize,
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes: 24,
            max_panel: 2.0,
            max_panels: 48,
            scan: 512,
            seed: 0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_scan(mut self, scan: usize) -> Self {
        self.scan = scan;
        self
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

static GL_CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes and weights on [-1, 1], cached per order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let cache = GL_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return rule.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    cache.lock().unwrap().insert(n, (nodes.clone(), weights.clone()));
    (nodes, weights)
}

fn gl_on_interval(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, nodes: usize) -> f64 {
    let (xs, ws) = gauss_legendre(nodes);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(ws.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Bisects the predicate `f(x) > level` on [lo, hi] (assumed to differ at the
/// endpoints) down to machine width; returns the crossing abscissa.
fn bisect_crossing(f: &mut dyn FnMut(f64) -> f64, mut lo: f64, mut hi: f64, level: f64) -> f64 {
    let above_lo = f(lo) > level;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > level) == above_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Integrates `f` over [lo, hi], splitting at `breaks` and at scan-detected
/// jumps. Panels never exceed `spec.max_panel` width (subject to the
/// `max_panels` cap), so fixed-order Gauss–Legendre stays accurate on wide
/// domains.
pub fn integrate_1d(
    f: &mut dyn FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let mut cuts: Vec<f64> = vec![lo, hi];
    for &b in breaks {
        if b > lo && b < hi {
            cuts.push(b);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();

    if spec.scan > 1 {
        // Scan each piece for jumps; a located jump splits the piece further.
        let mut extra = Vec::new();
        for win in cuts.windows(2) {
            let (a, b) = (win[0], win[1]);
            let step = (b - a) / spec.scan as f64;
            // Endpoints are included so that edges hugging the domain
            // boundary are still bracketed.
            let mut xs: Vec<f64> = Vec::with_capacity(spec.scan + 2);
            xs.push(a);
            xs.extend((0..spec.scan).map(|i| a + (i as f64 + 0.5) * step));
            xs.push(b);
            let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
            let scale = vals
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                .max(1e-300);
            for i in 1..vals.len() {
                let (prev, v) = (vals[i - 1], vals[i]);
                // A jump is a change comparable to the local values; smooth
                // steep slopes may also trigger, which only adds a panel cut.
                let local = v.abs() + prev.abs();
                if local > 1e-13 * scale && (v - prev).abs() > 0.25 * local {
                    let level = 0.5 * (v + prev);
                    extra.push(bisect_crossing(f, xs[i - 1], xs[i], level));
                }
            }
        }
        cuts.extend(extra);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
    }

    let mut total = 0.0;
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        let width = b - a;
        if width <= 0.0 {
            continue;
        }
        let mut panels = (width / spec.max_panel).ceil() as usize;
        panels = panels.clamp(1, spec.max_panels.max(1));
        let pw = width / panels as f64;
        for p in 0..panels {
            total += gl_on_interval(f, a + p as f64 * pw, a + (p + 1) as f64 * pw, spec.nodes);
        }
    }
    total
}

/// One axis of a nested integral. Bounds and breakpoints see the outer
/// coordinates accumulated so far (outermost axis first).
pub struct Axis<'a> {
    pub bounds: Box<dyn Fn(&[f64]) -> (f64, f64) + 'a>,
    pub breaks: Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>,
    /// Jump-scan resolution override for this axis (None = spec default for
    /// the innermost axis, no scan for outer axes).
    pub scan: Option<usize>,
    /// Panel width override (e.g. one panel across a compact periodic
    /// axis).
    pub max_panel: Option<f64>,
}

impl<'a> Axis<'a> {
    pub fn fixed(lo: f64, hi: f64) -> Self {
        Axis {
            bounds: Box::new(move |_| (lo, hi)),
            breaks: Box::new(|_| Vec::new()),
            scan: None,
            max_panel: None,
        }
    }

    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = Box::new(move |_| breaks.clone());
        self
    }

    pub fn with_scan(mut self, scan: usize) -> Self {
        self.scan = Some(scan);
        self
    }

    pub fn with_max_panel(mut self, width: f64) -> Self {
        self.max_panel = Some(width);
        self
    }
}

fn nested_rec(
    axes: &[Axis],
    coords: &mut Vec<f64>,
    f: &dyn Fn(&[f64]) -> f64,
    spec: &QuadratureSpec,
) -> f64 {
    let depth = coords.len();
    let axis = &axes[depth];
    let (lo, hi) = (axis.bounds)(coords);
    let breaks = (axis.breaks)(coords);
    let innermost = depth + 1 == axes.len();
    let axis_spec = QuadratureSpec {
        scan: axis.scan.unwrap_or(if innermost { spec.scan } else { 0 }),
        max_panel: axis.max_panel.unwrap_or(spec.max_panel),
        ..spec.clone()
    };
    let mut eval = |x: f64| -> f64 {
        coords.push(x);
        let v = if coords.len() == axes.len() {
            f(coords)
        } else {
            // Recursion needs its own coordinate buffer: the closure borrow
            // prevents reusing `coords` mutably here.
            let mut inner = coords.clone();
            nested_rec_owned(axes, &mut inner, f, spec)
        };
        coords.pop();
        v
    };
    integrate_1d(&mut eval, lo, hi, &breaks, &axis_spec)
}

fn nested_rec_owned(
    axes: &[Axis],
    coords: &mut Vec<f64>,
    f: &dyn Fn(&[f64]) -> f64,
    spec: &QuadratureSpec,
) -> f64 {
    nested_rec(axes, coords, f, spec)
}

/// Iterated integral over the given axes (outermost first). The integrand
/// receives the full coordinate vector.
pub fn integrate_nested(axes: &[Axis], f: &dyn Fn(&[f64]) -> f64, spec: &QuadratureSpec) -> f64 {
    if axes.is_empty() {
        return f(&[]);
    }
    let mut coords = Vec::with_capacity(axes.len());
    nested_rec(axes, &mut coords, f, spec)
}

/// Stratified Monte Carlo over a box: each axis is divided into `strata`
/// equal cells and `samples_per_stratum` points are drawn uniformly in each
/// cell of the grid. Deterministic for a fixed seed.
pub fn stratified_mc_box(
    bounds: &[(f64, f64)],
    f: &dyn Fn(&[f64]) -> f64,
    strata: usize,
    samples_per_stratum: usize,
    seed: u64,
) -> f64 {
    let d = bounds.len();
    assert!(d >= 1 && strata >= 1 && samples_per_stratum >= 1);
    let cells = strata.pow(d as u32);
    let mut rng = stream_rng(seed, 0x5742_4f58); // "WBOX"
    let mut acc = 0.0;
    let mut cell_vol = 1.0;
    for &(lo, hi) in bounds {
        cell_vol *= (hi - lo) / strata as f64;
    }
    let mut x = vec![0.0; d];
    for cell in 0..cells {
        let mut idx = cell;
        let mut cell_acc = 0.0;
        let lo_corner: Vec<f64> = (0..d)
            .map(|k| {
                let i = idx % strata;
                idx /= strata;
                bounds[k].0 + (bounds[k].1 - bounds[k].0) * i as f64 / strata as f64
            })
            .collect();
        for _ in 0..samples_per_stratum {
            for k in 0..d {
                let w = (bounds[k].1 - bounds[k].0) / strata as f64;
                x[k] = lo_corner[k] + w * rng.gen::<f64>();
            }
            cell_acc += f(&x);
        }
        acc += cell_acc / samples_per_stratum as f64 * cell_vol;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_exact_for_polynomials_up_to_order() {
        // n-point rule is exact through degree 2n-1.
        for n in [4usize, 8, 16] {
            let deg = 2 * n - 1;
            let mut f = |x: f64| x.powi(deg as i32) + 3.0 * x * x;
            let got = gl_on_interval(&mut f, -1.0, 1.0, n);
            let want = 2.0; // odd power integrates to 0, 3x^2 to 2
            assert!((got - want).abs() < 1e-12, "n={n} got={got}");
        }
    }

    #[test]
    fn integrate_1d_locates_indicator_edges() {
        let mut f = |x: f64| if (0.31..1.77).contains(&x) { 2.5 } else { 0.0 };
        let spec = QuadratureSpec::default();
        let got = integrate_1d(&mut f, -3.0, 3.0, &[], &spec);
        assert!((got - 2.5 * (1.77 - 0.31)).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn integrate_1d_gaussian_with_kink_breaks() {
        let mut f = |x: f64| (-x.abs()).exp();
        let spec = QuadratureSpec::default();
        let got = integrate_1d(&mut f, -30.0, 30.0, &[0.0], &spec);
        let want = 2.0 * (1.0 - (-30.0f64).exp());
        assert!((got - want).abs() < 1e-12, "got {got} want {want}");
    }

    #[test]
    fn nested_integrates_triangle_region() {
        // area of {0<=y<=x<=1} via inner bounds depending on outer coord
        let axes = [
            Axis::fixed(0.0, 1.0),
            Axis {
                bounds: Box::new(|outer: &[f64]| (0.0, outer[0])),
                breaks: Box::new(|_| Vec::new()),
                scan: None,
                max_panel: None,
            },
        ];
        let got = integrate_nested(&axes, &|_| 1.0, &QuadratureSpec::default().with_scan(0));
        assert!((got - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stratified_mc_is_deterministic_and_close() {
        let b = [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)];
        let f = |x: &[f64]| x[0] * x[1] + x[2];
        let a = stratified_mc_box(&b, &f, 8, 4, 99);
        let b2 = stratified_mc_box(&b, &f, 8, 4, 99);
        assert_eq!(a, b2);
        assert!((a - 0.75).abs() < 0.02, "got {a}");
    }
}

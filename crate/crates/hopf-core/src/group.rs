//! Locally compact group catalog: composition laws, Haar integration,
//! modular functions, compact exhaustion windows, and lattice fundamental
//! domains.
//!
//! Conventions fixed here (and asserted by tests):
//! * `IntegerLattice`, `FiniteCyclic` carry counting measure; `RealVector`
//!   carries Lebesgue; `EuclideanMotions2D` carries `dθ ⊗ Lebesgue(R²)` with
//!   the angle on `[0, 2π)`.
//! * `AffineLine` is the `x ↦ ax + b` group (`a > 0`) with left Haar
//!   `a⁻² da db`. Its modular function is `Δ(a, b) = a`: this is the value
//!   pinned by the inversion identity
//!   `∫ φ(g) Δ(g) dλ(g) = ∫ φ(g⁻¹) dλ(g)`, which the test suite checks on
//!   box indicators.
//! * Exhaustion windows are closed balls of radius `2^n` in a kind-specific
//!   norm: `ℓ∞` for lattice and vector kinds, `max(|log a|, |b|/min(1, a))`
//!   for the affine line (an inversion-symmetric gauge), and the Euclidean
//!   norm of the translation part for planar motions (rotation free).

use crate::error::{CoreError, Result};
use crate::quad::{integrate_nested, stratified_mc_box, Axis, QuadratureSpec};
use std::cell::Cell;
use std::fmt;

/// Catalog of supported group kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupKind {
    IntegerLattice(usize),
    RealVector(usize),
    FiniteCyclic(u64),
    AffineLine,
    EuclideanMotions2D,
    Product(Box<GroupKind>, Box<GroupKind>),
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::IntegerLattice(1) => write!(f, "Z"),
            GroupKind::IntegerLattice(d) => write!(f, "Z^{d}"),
            GroupKind::RealVector(1) => write!(f, "R"),
            GroupKind::RealVector(d) => write!(f, "R^{d}"),
            GroupKind::FiniteCyclic(n) => write!(f, "Z/{n}"),
            GroupKind::AffineLine => write!(f, "Aff"),
            GroupKind::EuclideanMotions2D => write!(f, "E2"),
            GroupKind::Product(l, r) => write!(f, "{l} x {r}"),
        }
    }
}

/// An element of a catalog group. The payload matches the kind.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Ints(Vec<i64>),
    Reals(Vec<f64>),
    Cyclic(u64),
    /// `x ↦ scale·x + shift`, `scale > 0`.
    Affine { scale: f64, shift: f64 },
    /// Rotation by `angle ∈ [0, 2π)` followed by translation by `shift`.
    Motion { angle: f64, shift: [f64; 2] },
    Pair(Box<GroupElement>, Box<GroupElement>),
}

fn wrap_angle(t: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut a = t % two_pi;
    if a < 0.0 {
        a += two_pi;
    }
    if a >= two_pi {
        a = 0.0;
    }
    a
}

pub fn rotate(angle: f64, v: [f64; 2]) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

impl GroupElement {
    /// Flattens the element into canonical real coordinates (angles become
    /// `(cos, sin)` so that smooth test functions stay smooth across the
    /// wrap).
    pub fn canonical_coords(&self, out: &mut Vec<f64>) {
        match self {
            GroupElement::Ints(v) => out.extend(v.iter().map(|&k| k as f64)),
            GroupElement::Reals(v) => out.extend_from_slice(v),
            GroupElement::Cyclic(c) => out.push(*c as f64),
            GroupElement::Affine { scale, shift } => {
                out.push(scale.ln());
                out.push(*shift);
            }
            GroupElement::Motion { angle, shift } => {
                out.push(angle.cos());
                out.push(angle.sin());
                out.extend_from_slice(shift);
            }
            GroupElement::Pair(l, r) => {
                l.canonical_coords(out);
                r.canonical_coords(out);
            }
        }
    }
}

/// A compact symmetric window `K_n` of the exhaustion.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub index: u32,
    pub radius: f64,
    pub haar_volume: f64,
    pub description: String,
}

/// A group together with its fixed Haar normalization and window schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupModel {
    pub kind: GroupKind,
}

/// Scan behaviour for group-side quadrature. Smooth integrands skip the jump
/// scan entirely; indicator-like integrands scan the innermost axis, and
/// optionally the outer axes at a coarser resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanProfile {
    Smooth,
    InnerScan,
    FullScan,
}

impl ScanProfile {
    fn outer(self) -> usize {
        match self {
            ScanProfile::FullScan => 48,
            _ => 0,
        }
    }
    fn inner(self, spec: &QuadratureSpec) -> usize {
        match self {
            ScanProfile::Smooth => 0,
            _ => spec.scan,
        }
    }
}

impl GroupModel {
    pub fn new(kind: GroupKind) -> Self {
        GroupModel { kind }
    }

    pub fn integer_lattice(d: usize) -> Self {
        Self::new(GroupKind::IntegerLattice(d))
    }
    pub fn real_vector(d: usize) -> Self {
        Self::new(GroupKind::RealVector(d))
    }
    pub fn finite_cyclic(n: u64) -> Self {
        Self::new(GroupKind::FiniteCyclic(n))
    }
    pub fn affine_line() -> Self {
        Self::new(GroupKind::AffineLine)
    }
    pub fn euclidean_motions() -> Self {
        Self::new(GroupKind::EuclideanMotions2D)
    }
    pub fn product(l: GroupModel, r: GroupModel) -> Self {
        Self::new(GroupKind::Product(Box::new(l.kind), Box::new(r.kind)))
    }

    pub fn identity(&self) -> GroupElement {
        identity_of(&self.kind)
    }

    pub fn compose(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        compose_in(&self.kind, g, h)
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        inverse_in(&self.kind, g)
    }

    /// Modular function for the inversion identity
    /// `∫ φ(g) Δ(g) dλ = ∫ φ(g⁻¹) dλ`.
    pub fn modular(&self, g: &GroupElement) -> f64 {
        modular_in(&self.kind, g)
    }

    pub fn is_unimodular(&self) -> bool {
        unimodular(&self.kind)
    }

    /// Whether the group is compact (windows stop growing).
    pub fn is_compact(&self) -> bool {
        compact(&self.kind)
    }

    pub fn is_discrete(&self) -> bool {
        continuous_dim(&self.kind) == 0
    }

    /// Number of continuous parameters (0 for discrete kinds).
    pub fn continuous_dim(&self) -> usize {
        continuous_dim(&self.kind)
    }

    /// Window schedule: closed ball of radius `2^n`.
    pub fn exhaustion_window(&self, n: u32) -> Window {
        assert!(n >= 1, "window index starts at 1");
        self.window_with_radius(n, (2.0f64).powi(n as i32))
    }

    pub fn window_with_radius(&self, index: u32, radius: f64) -> Window {
        Window {
            index,
            radius,
            haar_volume: volume_radius(&self.kind, radius),
            description: describe_window(&self.kind, radius),
        }
    }

    pub fn window_radius(n: u32) -> f64 {
        (2.0f64).powi(n as i32)
    }

    pub fn haar_volume_radius(&self, r: f64) -> f64 {
        volume_radius(&self.kind, r)
    }

    /// Window gauge: `norm(g) <= r` is membership in the radius-`r` window.
    pub fn norm(&self, g: &GroupElement) -> f64 {
        norm_in(&self.kind, g)
    }

    pub fn member_radius(&self, g: &GroupElement, r: f64) -> bool {
        self.norm(g) <= r
    }

    /// Enumeration of a window for fully discrete kinds.
    pub fn enumerate_radius(&self, r: f64) -> Option<Vec<GroupElement>> {
        enumerate_radius(&self.kind, r)
    }

    /// `∫_{K} φ dλ` over the window.
    pub fn haar_integrate(
        &self,
        window: &Window,
        f: &dyn Fn(&GroupElement) -> f64,
        spec: &QuadratureSpec,
        profile: ScanProfile,
    ) -> Result<f64> {
        self.integrate_shell_radii(0.0, window.radius, f, spec, profile)
    }

    /// `∫_{K_outer \ K_inner} φ dλ`; `inner = 0` integrates the full window.
    /// Shell decompositions are disjoint, so window integrals of nonnegative
    /// integrands accumulate monotonically across the schedule.
    pub fn integrate_shell_radii(
        &self,
        inner: f64,
        outer: f64,
        f: &dyn Fn(&GroupElement) -> f64,
        spec: &QuadratureSpec,
        profile: ScanProfile,
    ) -> Result<f64> {
        let bad = Cell::new(false);
        let wrapped = |g: &GroupElement| -> f64 {
            let v = f(g);
            if !v.is_finite() {
                bad.set(true);
            }
            v
        };
        let value = integrate_region(&self.kind, inner, outer, &wrapped, spec, profile);
        if bad.get() || !value.is_finite() {
            return Err(CoreError::NonFiniteIntegrand {
                context: format!("{} shell ({inner}, {outer}]", self.kind),
            });
        }
        Ok(value)
    }

    /// Stratified Monte Carlo alternative for `RealVector` boxes; other kinds
    /// report `UnsupportedScheme`.
    pub fn haar_integrate_mc(
        &self,
        window: &Window,
        f: &dyn Fn(&GroupElement) -> f64,
        strata: usize,
        samples_per_stratum: usize,
        seed: u64,
    ) -> Result<f64> {
        match &self.kind {
            GroupKind::RealVector(d) => {
                let bounds = vec![(-window.radius, window.radius); *d];
                let val = stratified_mc_box(
                    &bounds,
                    &|x| f(&GroupElement::Reals(x.to_vec())),
                    strata,
                    samples_per_stratum,
                    seed,
                );
                if !val.is_finite() {
                    return Err(CoreError::NonFiniteIntegrand {
                        context: format!("{} MC window", self.kind),
                    });
                }
                Ok(val)
            }
            other => Err(CoreError::UnsupportedScheme {
                scheme: "stratified-mc".into(),
                kind: other.to_string(),
            }),
        }
    }
}

fn identity_of(kind: &GroupKind) -> GroupElement {
    match kind {
        GroupKind::IntegerLattice(d) => GroupElement::Ints(vec![0; *d]),
        GroupKind::RealVector(d) => GroupElement::Reals(vec![0.0; *d]),
        GroupKind::FiniteCyclic(_) => GroupElement::Cyclic(0),
        GroupKind::AffineLine => GroupElement::Affine { scale: 1.0, shift: 0.0 },
        GroupKind::EuclideanMotions2D => GroupElement::Motion { angle: 0.0, shift: [0.0, 0.0] },
        GroupKind::Product(l, r) => {
            GroupElement::Pair(Box::new(identity_of(l)), Box::new(identity_of(r)))
        }
    }
}

fn compose_in(kind: &GroupKind, g: &GroupElement, h: &GroupElement) -> GroupElement {
    match (kind, g, h) {
        (GroupKind::IntegerLattice(_), GroupElement::Ints(a), GroupElement::Ints(b)) => {
            GroupElement::Ints(a.iter().zip(b).map(|(x, y)| x + y).collect())
        }
        (GroupKind::RealVector(_), GroupElement::Reals(a), GroupElement::Reals(b)) => {
            GroupElement::Reals(a.iter().zip(b).map(|(x, y)| x + y).collect())
        }
        (GroupKind::FiniteCyclic(n), GroupElement::Cyclic(a), GroupElement::Cyclic(b)) => {
            GroupElement::Cyclic((a + b) % n)
        }
        (
            GroupKind::AffineLine,
            GroupElement::Affine { scale: a1, shift: b1 },
            GroupElement::Affine { scale: a2, shift: b2 },
        ) => GroupElement::Affine { scale: a1 * a2, shift: a1 * b2 + b1 },
        (
            GroupKind::EuclideanMotions2D,
            GroupElement::Motion { angle: t1, shift: v1 },
            GroupElement::Motion { angle: t2, shift: v2 },
        ) => {
            let rv = rotate(*t1, *v2);
            GroupElement::Motion {
                angle: wrap_angle(t1 + t2),
                shift: [rv[0] + v1[0], rv[1] + v1[1]],
            }
        }
        (GroupKind::Product(kl, kr), GroupElement::Pair(gl, gr), GroupElement::Pair(hl, hr)) => {
            GroupElement::Pair(
                Box::new(compose_in(kl, gl, hl)),
                Box::new(compose_in(kr, gr, hr)),
            )
        }
        _ => panic!("element payload does not match group kind {kind}"),
    }
}

fn inverse_in(kind: &GroupKind, g: &GroupElement) -> GroupElement {
    match (kind, g) {
        (GroupKind::IntegerLattice(_), GroupElement::Ints(a)) => {
            GroupElement::Ints(a.iter().map(|x| -x).collect())
        }
        (GroupKind::RealVector(_), GroupElement::Reals(a)) => {
            GroupElement::Reals(a.iter().map(|x| -x).collect())
        }
        (GroupKind::FiniteCyclic(n), GroupElement::Cyclic(a)) => {
            GroupElement::Cyclic(if *a == 0 { 0 } else { n - a })
        }
        (GroupKind::AffineLine, GroupElement::Affine { scale, shift }) => {
            GroupElement::Affine { scale: 1.0 / scale, shift: -shift / scale }
        }
        (GroupKind::EuclideanMotions2D, GroupElement::Motion { angle, shift }) => {
            let rv = rotate(-angle, *shift);
            GroupElement::Motion { angle: wrap_angle(-angle), shift: [-rv[0], -rv[1]] }
        }
        (GroupKind::Product(kl, kr), GroupElement::Pair(l, r)) => {
            GroupElement::Pair(Box::new(inverse_in(kl, l)), Box::new(inverse_in(kr, r)))
        }
        _ => panic!("element payload does not match group kind {kind}"),
    }
}

fn modular_in(kind: &GroupKind, g: &GroupElement) -> f64 {
    match (kind, g) {
        (GroupKind::AffineLine, GroupElement::Affine { scale, .. }) => *scale,
        (GroupKind::Product(kl, kr), GroupElement::Pair(l, r)) => {
            modular_in(kl, l) * modular_in(kr, r)
        }
        _ => 1.0,
    }
}

fn unimodular(kind: &GroupKind) -> bool {
    match kind {
        GroupKind::AffineLine => false,
        GroupKind::Product(l, r) => unimodular(l) && unimodular(r),
        _ => true,
    }
}

fn compact(kind: &GroupKind) -> bool {
    match kind {
        GroupKind::FiniteCyclic(_) => true,
        GroupKind::Product(l, r) => compact(l) && compact(r),
        _ => false,
    }
}

fn continuous_dim(kind: &GroupKind) -> usize {
    match kind {
        GroupKind::IntegerLattice(_) | GroupKind::FiniteCyclic(_) => 0,
        GroupKind::RealVector(d) => *d,
        GroupKind::AffineLine => 2,
        GroupKind::EuclideanMotions2D => 3,
        GroupKind::Product(l, r) => continuous_dim(l) + continuous_dim(r),
    }
}

fn norm_in(kind: &GroupKind, g: &GroupElement) -> f64 {
    match (kind, g) {
        (GroupKind::IntegerLattice(_), GroupElement::Ints(a)) => {
            a.iter().map(|k| k.unsigned_abs() as f64).fold(0.0, f64::max)
        }
        (GroupKind::RealVector(_), GroupElement::Reals(a)) => {
            a.iter().map(|x| x.abs()).fold(0.0, f64::max)
        }
        // The whole cyclic group sits inside every window.
        (GroupKind::FiniteCyclic(_), GroupElement::Cyclic(_)) => 0.0,
        (GroupKind::AffineLine, GroupElement::Affine { scale, shift }) => {
            scale.ln().abs().max(shift.abs() / scale.min(1.0))
        }
        (GroupKind::EuclideanMotions2D, GroupElement::Motion { shift, .. }) => {
            (shift[0] * shift[0] + shift[1] * shift[1]).sqrt()
        }
        (GroupKind::Product(kl, kr), GroupElement::Pair(l, r)) => {
            norm_in(kl, l).max(norm_in(kr, r))
        }
        _ => panic!("element payload does not match group kind {kind}"),
    }
}

fn volume_radius(kind: &GroupKind, r: f64) -> f64 {
    match kind {
        GroupKind::IntegerLattice(d) => (2.0 * r.floor() + 1.0).powi(*d as i32),
        GroupKind::RealVector(d) => (2.0 * r).powi(*d as i32),
        GroupKind::FiniteCyclic(n) => *n as f64,
        // ∫_{|s|<=r} e^{-s} · 2 r min(1, e^s) ds = 2r (r + 1 - e^{-r})
        GroupKind::AffineLine => 2.0 * r * (r + 1.0 - (-r).exp()),
        GroupKind::EuclideanMotions2D => std::f64::consts::TAU * std::f64::consts::PI * r * r,
        GroupKind::Product(l, r_k) => volume_radius(l, r) * volume_radius(r_k, r),
    }
}

fn describe_window(kind: &GroupKind, r: f64) -> String {
    match kind {
        GroupKind::IntegerLattice(d) => format!("{{-{0}..{0}}}^{d}", r.floor() as i64),
        GroupKind::RealVector(d) => format!("[-{r}, {r}]^{d}"),
        GroupKind::FiniteCyclic(n) => format!("all {n} residues"),
        GroupKind::AffineLine => format!("|log a| <= {r}, |b| <= {r}·min(1, a)"),
        GroupKind::EuclideanMotions2D => format!("S1 x disk(|v| <= {r})"),
        GroupKind::Product(l, rt) => {
            format!("{} x {}", describe_window(l, r), describe_window(rt, r))
        }
    }
}

fn enumerate_radius(kind: &GroupKind, r: f64) -> Option<Vec<GroupElement>> {
    match kind {
        GroupKind::IntegerLattice(d) => {
            let m = r.floor() as i64;
            let mut out = vec![GroupElement::Ints(Vec::new())];
            for _ in 0..*d {
                let mut next = Vec::with_capacity(out.len() * (2 * m as usize + 1));
                for e in &out {
                    if let GroupElement::Ints(v) = e {
                        for k in -m..=m {
                            let mut w = v.clone();
                            w.push(k);
                            next.push(GroupElement::Ints(w));
                        }
                    }
                }
                out = next;
            }
            Some(out)
        }
        GroupKind::FiniteCyclic(n) => Some((0..*n).map(GroupElement::Cyclic).collect()),
        GroupKind::Product(l, rt) => {
            let ls = enumerate_radius(l, r)?;
            let rs = enumerate_radius(rt, r)?;
            let mut out = Vec::with_capacity(ls.len() * rs.len());
            for a in &ls {
                for b in &rs {
                    out.push(GroupElement::Pair(Box::new(a.clone()), Box::new(b.clone())));
                }
            }
            Some(out)
        }
        _ => None,
    }
}

/// Shell membership for discrete elements: in `K_outer` but not `K_inner`.
fn in_shell(kind: &GroupKind, g: &GroupElement, inner: f64, outer: f64) -> bool {
    let n = norm_in(kind, g);
    n <= outer && (inner <= 0.0 || n > inner)
}

fn integrate_region(
    kind: &GroupKind,
    inner: f64,
    outer: f64,
    f: &dyn Fn(&GroupElement) -> f64,
    spec: &QuadratureSpec,
    profile: ScanProfile,
) -> f64 {
    match kind {
        GroupKind::IntegerLattice(_) | GroupKind::FiniteCyclic(_) => {
            let elems = enumerate_radius(kind, outer).expect("discrete kind enumerates");
            elems
                .iter()
                .filter(|g| in_shell(kind, g, inner, outer))
                .map(f)
                .sum()
        }
        GroupKind::RealVector(d) => integrate_real_shell(*d, inner, outer, f, spec, profile),
        GroupKind::AffineLine => integrate_affine_shell(inner, outer, f, spec, profile),
        GroupKind::EuclideanMotions2D => integrate_e2_shell(inner, outer, f, spec, profile),
        GroupKind::Product(kl, kr) => {
            let full_l = |g_l: &GroupElement, lo: f64, hi: f64| -> f64 {
                integrate_region(
                    kr,
                    lo,
                    hi,
                    &|g_r: &GroupElement| {
                        f(&GroupElement::Pair(Box::new(g_l.clone()), Box::new(g_r.clone())))
                    },
                    spec,
                    profile,
                )
            };
            if inner <= 0.0 {
                // K_outer(l) x K_outer(r)
                integrate_region(kl, 0.0, outer, &|g_l| full_l(g_l, 0.0, outer), spec, profile)
            } else {
                // shell(l) x K_outer(r)  ⊔  K_inner(l) x shell(r)
                integrate_region(kl, inner, outer, &|g_l| full_l(g_l, 0.0, outer), spec, profile)
                    + integrate_region(
                        kl,
                        0.0,
                        inner,
                        &|g_l| full_l(g_l, inner, outer),
                        spec,
                        profile,
                    )
            }
        }
    }
}

fn axis_segments(inner: f64, outer: f64) -> Vec<(f64, f64)> {
    if inner <= 0.0 {
        vec![(-outer, outer)]
    } else {
        vec![(-outer, -inner), (inner, outer)]
    }
}

fn integrate_real_shell(
    d: usize,
    inner: f64,
    outer: f64,
    f: &dyn Fn(&GroupElement) -> f64,
    spec: &QuadratureSpec,
    profile: ScanProfile,
) -> f64 {
    let eval = |x: &[f64]| f(&GroupElement::Reals(x.to_vec()));
    let mut total = 0.0;
    if inner <= 0.0 || d == 1 {
        // whole box or 1-D split segments
        if d == 1 {
            for (lo, hi) in axis_segments(inner, outer) {
                let axes = [mk_axis(lo, hi, profile, spec, true)];
                total += integrate_nested(&axes, &eval, spec);
            }
            return total;
        }
        let axes: Vec<Axis> = (0..d)
            .map(|k| mk_axis(-outer, outer, profile, spec, k + 1 == d))
            .collect();
        return integrate_nested(&axes, &eval, spec);
    }
    // Slab decomposition of box(outer) \ box(inner): axis i escapes, axes
    // before it stay within inner, axes after range over the outer box.
    for i in 0..d {
        for (lo, hi) in axis_segments(inner, outer) {
            let axes: Vec<Axis> = (0..d)
                .map(|k| {
                    let innermost = k + 1 == d;
                    if k < i {
                        mk_axis(-inner, inner, profile, spec, innermost)
                    } else if k == i {
                        mk_axis(lo, hi, profile, spec, innermost)
                    } else {
                        mk_axis(-outer, outer, profile, spec, innermost)
                    }
                })
                .collect();
            total += integrate_nested(&axes, &eval, spec);
        }
    }
    total
}

fn mk_axis<'a>(
    lo: f64,
    hi: f64,
    profile: ScanProfile,
    spec: &QuadratureSpec,
    innermost: bool,
) -> Axis<'a> {
    let scan = if innermost {
        profile.inner(spec)
    } else {
        profile.outer()
    };
    Axis::fixed(lo, hi).with_scan(scan)
}

/// Affine shell in coordinates `(s, b)` with `a = e^s`; the Haar weight is
/// `e^{-s} ds db` and the `b`-range at level `s` is `r·min(1, e^s)`.
fn integrate_affine_shell(
    inner: f64,
    outer: f64,
    f: &dyn Fn(&GroupElement) -> f64,
    spec: &QuadratureSpec,
    profile: ScanProfile,
) -> f64 {
    let eval = |c: &[f64]| {
        let (s, b) = (c[0], c[1]);
        f(&GroupElement::Affine { scale: s.exp(), shift: b }) * (-s).exp()
    };
    let b_cap = move |r: f64, s: f64| r * s.exp().min(1.0);
    let mut total = 0.0;
    let mut add_cell =
        |s_lo: f64, s_hi: f64, b_lo: Box<dyn Fn(f64) -> f64>, b_hi: Box<dyn Fn(f64) -> f64>| {
            let axes = [
                Axis {
                    bounds: Box::new(move |_: &[f64]| (s_lo, s_hi)),
                    breaks: Box::new(|_| vec![0.0]),
                    scan: Some(profile.outer()),
                    max_panel: None,
                },
                Axis {
                    bounds: Box::new(move |outer_c: &[f64]| (b_lo(outer_c[0]), b_hi(outer_c[0]))),
                    breaks: Box::new(|_| Vec::new()),
                    scan: Some(profile.inner(spec)),
                    max_panel: None,
                },
            ];
            total += integrate_nested(&axes, &eval, spec);
        };
    if inner <= 0.0 {
        add_cell(
            -outer,
            outer,
            Box::new(move |s| -b_cap(outer, s)),
            Box::new(move |s| b_cap(outer, s)),
        );
        return total;
    }
    // |s| in (inner, outer]: full b-range of the outer window
    for (lo, hi) in axis_segments(inner, outer) {
        add_cell(
            lo,
            hi,
            Box::new(move |s| -b_cap(outer, s)),
            Box::new(move |s| b_cap(outer, s)),
        );
    }
    // |s| <= inner: b in the outer range minus the inner range, both signs
    add_cell(
        -inner,
        inner,
        Box::new(move |s| b_cap(inner, s)),
        Box::new(move |s| b_cap(outer, s)),
    );
    add_cell(
        -inner,
        inner,
        Box::new(move |s| -b_cap(outer, s)),
        Box::new(move |s| -b_cap(inner, s)),
    );
    total
}

/// E(2) shell. Smooth integrands use polar coordinates `(θ, ψ, ρ)` with
/// `v = ρ(cos ψ, sin ψ)` and Haar weight `ρ dθ dψ dρ`. Indicator-like
/// integrands on a full window instead use Cartesian `(θ, vx, vy)` so that
/// the jump scan resolves box and disk edges axis by axis (the polar inner
/// integral is only continuous, not smooth, across indicator corners).
fn integrate_e2_shell(
    inner: f64,
    outer: f64,
    f: &dyn Fn(&GroupElement) -> f64,
    spec: &QuadratureSpec,
    profile: ScanProfile,
) -> f64 {
    let tau = std::f64::consts::TAU;
    if inner <= 0.0 && profile == ScanProfile::FullScan {
        let r2 = outer * outer;
        let eval = |c: &[f64]| {
            let (theta, vx, vy) = (c[0], c[1], c[2]);
            if vx * vx + vy * vy > r2 {
                return 0.0;
            }
            f(&GroupElement::Motion { angle: theta, shift: [vx, vy] })
        };
        let axes = [
            mk_axis(0.0, tau, profile, spec, false),
            mk_axis(-outer, outer, profile, spec, false),
            mk_axis(-outer, outer, profile, spec, true),
        ];
        return integrate_nested(&axes, &eval, spec);
    }
    let eval = |c: &[f64]| {
        let (theta, psi, rho) = (c[0], c[1], c[2]);
        f(&GroupElement::Motion {
            angle: theta,
            shift: [rho * psi.cos(), rho * psi.sin()],
        }) * rho
    };
    // periodic axes: one panel across the whole circle
    let axes = [
        mk_axis(0.0, tau, profile, spec, false).with_max_panel(tau),
        mk_axis(0.0, tau, profile, spec, false).with_max_panel(tau),
        mk_axis(inner.max(0.0), outer, profile, spec, true),
    ];
    integrate_nested(&axes, &eval, spec)
}

/// A full-rank integer lattice `H = B·Z^d` inside `RealVector(d)`, with the
/// half-open fundamental domain `Ω = B·[0,1)^d`.
#[derive(Debug, Clone)]
pub struct LatticeData {
    pub dim: usize,
    /// Basis vectors as columns.
    pub basis: Vec<Vec<i64>>,
    inv: Vec<Vec<f64>>,
}

/// Result of reducing an ambient point modulo the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint {
    /// Coefficients of the lattice element in the basis.
    pub coeffs: Vec<i64>,
    /// The lattice element in ambient coordinates.
    pub lattice_point: Vec<f64>,
    /// The residue inside `Ω`; `lattice_point + residue == g` exactly.
    pub residue: Vec<f64>,
}

impl LatticeData {
    pub fn standard(dim: usize) -> Self {
        let basis: Vec<Vec<i64>> =
            (0..dim).map(|i| (0..dim).map(|j| i64::from(i == j)).collect()).collect();
        Self::new(basis)
    }

    pub fn new(basis: Vec<Vec<i64>>) -> Self {
        let dim = basis.len();
        for col in &basis {
            assert_eq!(col.len(), dim, "basis must be square");
        }
        let inv = invert(&basis);
        LatticeData { dim, basis, inv }
    }

    pub fn fundamental_volume(&self) -> f64 {
        det(&self.basis).abs()
    }

    /// Unique decomposition `g = ω + residue` with `residue ∈ Ω`.
    pub fn fundamental_domain(&self, g: &[f64]) -> LatticePoint {
        assert_eq!(g.len(), self.dim);
        let coeffs_f: Vec<f64> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.inv[i][j] * g[j]).sum())
            .collect();
        let coeffs: Vec<i64> = coeffs_f.iter().map(|c| c.floor() as i64).collect();
        let lattice_point: Vec<f64> = (0..self.dim)
            .map(|j| {
                (0..self.dim)
                    .map(|i| self.basis[i][j] as f64 * coeffs[i] as f64)
                    .sum()
            })
            .collect();
        let residue: Vec<f64> = g.iter().zip(&lattice_point).map(|(x, w)| x - w).collect();
        LatticePoint { coeffs, lattice_point, residue }
    }
}

fn det(basis: &[Vec<i64>]) -> f64 {
    let n = basis.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| basis[j][i] as f64).collect())
        .collect();
    let mut d = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            d = -d;
        }
        d *= m[col][col];
        for row in col + 1..n {
            let fac = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= fac * m[col][k];
            }
        }
    }
    d
}

fn invert(basis: &[Vec<i64>]) -> Vec<Vec<f64>> {
    let n = basis.len();
    // augmented Gauss-Jordan on the basis matrix (columns are basis vectors)
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| basis[j][i] as f64).collect();
            row.extend((0..n).map(|j| f64::from(i == j)));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        assert!(m[piv][col] != 0.0, "lattice basis is singular");
        m.swap(piv, col);
        let p = m[col][col];
        for k in 0..2 * n {
            m[col][k] /= p;
        }
        for row in 0..n {
            if row != col {
                let fac = m[row][col];
                for k in 0..2 * n {
                    m[row][k] -= fac * m[col][k];
                }
            }
        }
    }
    (0..n).map(|i| (n..2 * n).map(|j| m[i][j]).collect()).collect()
}

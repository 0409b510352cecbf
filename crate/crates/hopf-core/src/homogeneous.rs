//! Measures on homogeneous spaces for the catalog of group pairs.
//!
//! Supported pairs `C ⋖ G`: the trivial subgroup of any catalog group, the
//! finite cyclic right factor of a product, SO(2) inside the planar motion
//! group, and (for the divergent compactness demo only) the line `R × {0}`
//! inside `R²`. On this catalog the ambient groups restrict to unimodular
//! data on `C`, so the rho-function is identically one and the invariant
//! measure on `G/C` is the pushforward of Haar.

use crate::error::{CoreError, Result};
use crate::group::{GroupElement, GroupKind, GroupModel, ScanProfile, Window};
use crate::quad::{integrate_1d, QuadratureSpec};

/// Closed subgroups available for pair construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubgroupDescriptor {
    Trivial,
    /// The `FiniteCyclic` right factor of a `Product` kind.
    CyclicRightFactor,
    /// SO(2) inside `EuclideanMotions2D`, parameterized by angle with
    /// `dλ_C = dθ` on `[0, 2π)`.
    Rotations,
    /// `R × {0}` inside `RealVector(2)`; non-compact, used only to exhibit
    /// the divergent compactness integral.
    LineInPlane,
}

impl std::fmt::Display for SubgroupDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SubgroupDescriptor::Trivial => write!(f, "{{e}}"),
            SubgroupDescriptor::CyclicRightFactor => write!(f, "cyclic factor"),
            SubgroupDescriptor::Rotations => write!(f, "SO(2)"),
            SubgroupDescriptor::LineInPlane => write!(f, "R x {{0}}"),
        }
    }
}

/// A group pair `C ⋖ G` with fixed Haar data on both sides.
#[derive(Debug, Clone)]
pub struct GroupPair {
    pub ambient: GroupModel,
    pub subgroup: SubgroupDescriptor,
}

/// A measure on the coset domain `G/C`, described by the constant relating
/// it to the reference normalization of the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    PushforwardOfHaar,
    Normalized,
}

#[derive(Debug, Clone)]
pub struct HomogeneousMeasure {
    pub domain: String,
    /// Density with respect to the domain's reference measure (Lebesgue on
    /// `R²`, counting on discrete cosets, Haar on `G` itself).
    pub density: f64,
    pub provenance: Provenance,
    /// Max relative deviation of the density across probe cells; near zero
    /// because invariant measures on these cosets are unique up to scale.
    pub constancy_residual: f64,
    /// Residual of invariance under sampled ambient translations.
    pub invariance_residual: f64,
}

/// Verdict of the subgroup compactness criterion.
#[derive(Debug, Clone, PartialEq)]
pub enum CompactnessVerdict {
    Finite(f64),
    InfiniteByGrowth,
}

#[derive(Debug, Clone)]
pub struct CompactnessReport {
    pub window_values: Vec<(u32, f64)>,
    pub verdict: CompactnessVerdict,
}

impl GroupPair {
    pub fn new(ambient: GroupModel, subgroup: SubgroupDescriptor) -> Result<Self> {
        let ok = match (&ambient.kind, &subgroup) {
            (_, SubgroupDescriptor::Trivial) => true,
            (GroupKind::Product(_, r), SubgroupDescriptor::CyclicRightFactor) => {
                matches!(**r, GroupKind::FiniteCyclic(_))
            }
            (GroupKind::EuclideanMotions2D, SubgroupDescriptor::Rotations) => true,
            (GroupKind::RealVector(2), SubgroupDescriptor::LineInPlane) => true,
            _ => false,
        };
        if !ok {
            return Err(CoreError::DomainMismatch(format!(
                "subgroup {subgroup} does not embed in {}",
                ambient.kind
            )));
        }
        Ok(GroupPair { ambient, subgroup })
    }

    pub fn is_compact_subgroup(&self) -> bool {
        !matches!(self.subgroup, SubgroupDescriptor::LineInPlane)
    }

    /// rho-function of the pair; identically one on this catalog since
    /// `Δ_G` restricted to `C` equals `Δ_C`.
    pub fn rho(&self, _g: &GroupElement) -> f64 {
        1.0
    }

    /// Modular function of the subgroup as a group in its own right.
    pub fn subgroup_modular(&self, _c: &GroupElement) -> f64 {
        1.0
    }

    /// Embeds a subgroup parameter into the ambient group: the residue for
    /// cyclic factors, the angle for rotations, the line coordinate for
    /// `LineInPlane`. `Trivial` ignores the parameter.
    pub fn embed(&self, param: f64) -> GroupElement {
        match (&self.ambient.kind, &self.subgroup) {
            (_, SubgroupDescriptor::Trivial) => self.ambient.identity(),
            (GroupKind::Product(l, _), SubgroupDescriptor::CyclicRightFactor) => {
                GroupElement::Pair(
                    Box::new(crate::group::GroupModel::new((**l).clone()).identity()),
                    Box::new(GroupElement::Cyclic(param as u64)),
                )
            }
            (_, SubgroupDescriptor::Rotations) => {
                GroupElement::Motion { angle: param, shift: [0.0, 0.0] }
            }
            (_, SubgroupDescriptor::LineInPlane) => GroupElement::Reals(vec![param, 0.0]),
            _ => unreachable!("validated in GroupPair::new"),
        }
    }

    /// `∫_{C ∩ K_r} ψ dλ_C` with the pair's fixed subgroup Haar measure.
    pub fn subgroup_integrate(
        &self,
        psi: &dyn Fn(&GroupElement) -> f64,
        window_radius: f64,
        spec: &QuadratureSpec,
    ) -> f64 {
        match &self.subgroup {
            SubgroupDescriptor::Trivial => psi(&self.ambient.identity()),
            SubgroupDescriptor::CyclicRightFactor => {
                let n = match &self.ambient.kind {
                    GroupKind::Product(_, r) => match **r {
                        GroupKind::FiniteCyclic(n) => n,
                        _ => unreachable!(),
                    },
                    _ => unreachable!(),
                };
                (0..n).map(|c| psi(&self.embed(c as f64))).sum()
            }
            SubgroupDescriptor::Rotations => {
                let mut f = |t: f64| psi(&self.embed(t));
                integrate_1d(&mut f, 0.0, std::f64::consts::TAU, &[], spec)
            }
            SubgroupDescriptor::LineInPlane => {
                let mut f = |t: f64| psi(&self.embed(t));
                integrate_1d(&mut f, -window_radius, window_radius, &[0.0], spec)
            }
        }
    }

    /// Integrates `x ↦ h(σ(x))` over the coset domain against the invariant
    /// measure `κ` (in its pushforward-compatible normalization), where `σ`
    /// is the canonical section. Truncated to the coset window of `radius`.
    fn coset_integrate(
        &self,
        h: &dyn Fn(&GroupElement) -> f64,
        radius: f64,
        spec: &QuadratureSpec,
        profile: ScanProfile,
    ) -> Result<f64> {
        match (&self.ambient.kind, &self.subgroup) {
            (_, SubgroupDescriptor::Trivial) => {
                let w = self.ambient.window_with_radius(0, radius);
                self.ambient.haar_integrate(&w, h, spec, profile)
            }
            (GroupKind::Product(l, _), SubgroupDescriptor::CyclicRightFactor) => {
                // G/C is the left factor with its own Haar measure.
                let left = GroupModel::new((**l).clone());
                let w = left.window_with_radius(0, radius);
                let lift = |g_l: &GroupElement| {
                    h(&GroupElement::Pair(Box::new(g_l.clone()), Box::new(GroupElement::Cyclic(0))))
                };
                left.haar_integrate(&w, &lift, spec, profile)
            }
            (_, SubgroupDescriptor::Rotations) => {
                // G/SO(2) is the plane with Lebesgue measure; κ matched to
                // the pushforward convention means plain Lebesgue here.
                let plane = GroupModel::real_vector(2);
                let w = plane.window_with_radius(0, radius);
                let lift = |v: &GroupElement| match v {
                    GroupElement::Reals(v) => {
                        h(&GroupElement::Motion { angle: 0.0, shift: [v[0], v[1]] })
                    }
                    _ => unreachable!(),
                };
                plane.haar_integrate(&w, &lift, spec, profile)
            }
            _ => Err(CoreError::NonCompactSubgroup(self.subgroup.to_string())),
        }
    }
}

/// Both sides of Weil's formula on a window, and their relative residual:
/// `∫_G φ dλ_G` against
/// `∫_{G/C} [∫_C φ(gc)·(Δ_G/Δ_C)(c) dλ_C(c)] ρ(g)⁻¹ dκ(gC)`.
pub fn weil_verify(
    pair: &GroupPair,
    phi: &dyn Fn(&GroupElement) -> f64,
    window: &Window,
    spec: &QuadratureSpec,
    profile: ScanProfile,
) -> Result<(f64, f64, f64)> {
    if !pair.is_compact_subgroup() {
        return Err(CoreError::NonCompactSubgroup(pair.subgroup.to_string()));
    }
    let lhs = pair.ambient.haar_integrate(window, phi, spec, profile)?;
    let fiber = |g: &GroupElement| -> f64 {
        let inner = pair.subgroup_integrate(
            &|c| {
                let gc = pair.ambient.compose(g, c);
                phi(&gc) * pair.ambient.modular(c) / pair.subgroup_modular(c)
            },
            window.radius,
            spec,
        );
        inner / pair.rho(g)
    };
    let rhs = pair.coset_integrate(&fiber, window.radius, spec, profile)?;
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(CoreError::NonFiniteIntegrand { context: "weil formula".into() });
    }
    let residual = (lhs - rhs).abs() / lhs.abs().max(1e-12);
    Ok((lhs, rhs, residual))
}

/// Pushforward of ambient Haar along the canonical projection, probed on a
/// grid of coset cells; reports the constant relating it to the reference
/// normalization together with constancy and invariance residuals.
pub fn pushforward_haar(
    pair: &GroupPair,
    window: &Window,
    spec: &QuadratureSpec,
) -> Result<HomogeneousMeasure> {
    if !pair.is_compact_subgroup() {
        return Err(CoreError::NonCompactSubgroup(pair.subgroup.to_string()));
    }
    match (&pair.ambient.kind, &pair.subgroup) {
        (_, SubgroupDescriptor::Trivial) => Ok(HomogeneousMeasure {
            domain: pair.ambient.kind.to_string(),
            density: 1.0,
            provenance: Provenance::PushforwardOfHaar,
            constancy_residual: 0.0,
            invariance_residual: 0.0,
        }),
        (GroupKind::Product(l, r), SubgroupDescriptor::CyclicRightFactor) => {
            let n = match **r {
                GroupKind::FiniteCyclic(n) => n as f64,
                _ => unreachable!(),
            };
            Ok(HomogeneousMeasure {
                domain: GroupKind::clone(l).to_string(),
                density: n,
                provenance: Provenance::PushforwardOfHaar,
                constancy_residual: 0.0,
                invariance_residual: 0.0,
            })
        }
        (_, SubgroupDescriptor::Rotations) => {
            // probe cells: q_*λ(B) = λ_G(q^{-1}(B)) computed by quadrature,
            // compared with Lebesgue area of B cell by cell.
            let cells = [
                ([-1.0, -1.0], [0.0, 0.0]),
                ([0.0, -1.0], [1.0, 0.0]),
                ([-1.0, 0.5], [0.5, 1.0]),
                ([0.25, 0.25], [1.0, 1.0]),
            ];
            let mut ratios = Vec::new();
            for (lo, hi) in cells {
                let ind = |g: &GroupElement| match g {
                    GroupElement::Motion { shift, .. } => f64::from(
                        (lo[0]..=hi[0]).contains(&shift[0]) && (lo[1]..=hi[1]).contains(&shift[1]),
                    ),
                    _ => unreachable!(),
                };
                let mass = pair.ambient.haar_integrate(window, &ind, spec, ScanProfile::FullScan)?;
                let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
                ratios.push(mass / area);
            }
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let constancy = ratios
                .iter()
                .map(|r| (r - mean).abs() / mean)
                .fold(0.0f64, f64::max);
            // invariance of the reference (Lebesgue) under sampled motions:
            // rotate-and-translate a cell and compare masses.
            let g0 = GroupElement::Motion { angle: 0.9, shift: [0.4, -0.3] };
            let ind = |v: [f64; 2]| {
                f64::from((-0.5..=0.5).contains(&v[0]) && (-0.25..=0.75).contains(&v[1]))
            };
            let base = {
                let f = |g: &GroupElement| match g {
                    GroupElement::Motion { shift, .. } => ind(*shift),
                    _ => unreachable!(),
                };
                pair.ambient.haar_integrate(window, &f, spec, ScanProfile::FullScan)?
            };
            let moved = {
                let ginv = pair.ambient.inverse(&g0);
                let f = |g: &GroupElement| match g {
                    GroupElement::Motion { shift, .. } => {
                        // membership of g0^{-1}.v in the cell
                        let m = pair.ambient.compose(
                            &ginv,
                            &GroupElement::Motion { angle: 0.0, shift: *shift },
                        );
                        match m {
                            GroupElement::Motion { shift: v, .. } => ind(v),
                            _ => unreachable!(),
                        }
                    }
                    _ => unreachable!(),
                };
                pair.ambient.haar_integrate(window, &f, spec, ScanProfile::FullScan)?
            };
            Ok(HomogeneousMeasure {
                domain: "R^2".into(),
                density: mean,
                provenance: Provenance::PushforwardOfHaar,
                constancy_residual: constancy,
                invariance_residual: (base - moved).abs() / base.abs().max(1e-12),
            })
        }
        _ => unreachable!("validated in GroupPair::new"),
    }
}

/// `∫_{C ∩ K_n} (Δ_G/Δ_C)(c) dλ_C(c)` across the window schedule, with a
/// finite/infinite-by-growth verdict.
pub fn compactness_integral(
    pair: &GroupPair,
    max_window: u32,
    spec: &QuadratureSpec,
) -> CompactnessReport {
    let mut window_values = Vec::new();
    for n in 1..=max_window {
        let r = GroupModel::window_radius(n);
        let v = pair.subgroup_integrate(
            &|c| pair.ambient.modular(c) / pair.subgroup_modular(c),
            r,
            spec,
        );
        window_values.push((n, v));
    }
    let verdict = match window_values.as_slice() {
        [] => CompactnessVerdict::Finite(0.0),
        [.., (_, last)] => {
            let stable = window_values
                .iter()
                .rev()
                .take(3)
                .all(|(_, v)| (v - last).abs() <= 1e-9 * last.abs().max(1.0));
            if stable {
                CompactnessVerdict::Finite(*last)
            } else {
                CompactnessVerdict::InfiniteByGrowth
            }
        }
    };
    CompactnessReport { window_values, verdict }
}

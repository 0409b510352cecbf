//! Scenario configuration: a single declarative TOML document naming a
//! catalog space, a task list, quadrature and policy parameters, and a
//! seed. Validation reports field-precise messages.

use anyhow::{anyhow, bail, Context, Result};
use hopf_core::engine::DecisionPolicy;
use hopf_core::group::GroupModel;
use hopf_core::homogeneous::{GroupPair, SubgroupDescriptor};
use hopf_core::quad::QuadratureSpec;
use hopf_core::space::{
    circle_rotation, coset_space, cyclic_points, integer_translation, krengel_space,
    maharam_extend_prob, real_exp_translation, real_translation, translation_space, Point,
    SetDescriptor, SpaceModel, TestFunction,
};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub scenario: ScenarioSection,
    pub space: Option<SpaceSection>,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub policy: PolicySection,
    #[serde(default, rename = "task")]
    pub tasks: Vec<TaskSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub id: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub kind: String,
    pub alpha: Option<f64>,
    pub n: Option<u64>,
    pub atoms: Option<Vec<f64>>,
    pub group: Option<String>,
    pub truncation: Option<f64>,
    pub fiber_truncation: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub nodes: Option<usize>,
    pub max_panel: Option<f64>,
    pub max_panels: Option<usize>,
    pub scan: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub min_windows: Option<usize>,
    pub blowup_factor: Option<f64>,
    pub sat_tol: Option<f64>,
    pub sat_windows: Option<usize>,
    pub min_slope: Option<f64>,
    pub quorum: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub id: Option<String>,
    #[serde(rename = "type")]
    pub task_type: String,
    pub f: Option<String>,
    pub set: Option<String>,
    pub point: Option<Vec<f64>>,
    pub points: Option<usize>,
    pub max_window: Option<u32>,
    pub overlap_samples: Option<usize>,
    pub levels: Option<Vec<f64>>,
    pub system: Option<String>,
    pub k: Option<usize>,
    pub ambient: Option<String>,
    pub subgroup: Option<String>,
    pub radius: Option<f64>,
}

/// A fully resolved scenario.
pub struct Scenario {
    pub id: String,
    pub seed: Option<u64>,
    pub space: Option<SpaceModel>,
    pub spec: QuadratureSpec,
    pub policy: DecisionPolicy,
    pub tasks: Vec<ResolvedTask>,
}

pub struct ResolvedTask {
    pub id: String,
    pub kind: TaskKind,
}

pub enum TaskKind {
    Transform { f: TestFunction, point: Option<Point>, max_window: u32 },
    Classify { f: TestFunction, points: usize, max_window: u32 },
    ReturnVolume { set: SetDescriptor, point: Option<Point>, max_window: u32 },
    Poincare { set: SetDescriptor, max_window: u32, overlap_samples: usize },
    Maharam { f: TestFunction, point: Option<Point>, levels: Vec<f64>, max_window: u32 },
    Lattice { f: TestFunction, point: Option<Point>, max_window: u32 },
    Weil { pair: GroupPair, radius: f64 },
    DiscreteExact { system: String },
    GreedyTmax { system: String, k: usize },
    HajianIto { system: String },
}

impl TaskKind {
    pub fn needs_sampling(&self) -> bool {
        match self {
            TaskKind::Classify { .. } | TaskKind::Poincare { .. } => true,
            TaskKind::Transform { point, .. }
            | TaskKind::ReturnVolume { point, .. }
            | TaskKind::Maharam { point, .. }
            | TaskKind::Lattice { point, .. } => point.is_none(),
            _ => false,
        }
    }

    pub fn needs_space(&self) -> bool {
        !matches!(
            self,
            TaskKind::Weil { .. }
                | TaskKind::DiscreteExact { .. }
                | TaskKind::GreedyTmax { .. }
                | TaskKind::HajianIto { .. }
        )
    }
}

/// Catalog space names accepted under `space.kind`.
pub fn space_catalog_names() -> Vec<&'static str> {
    vec![
        "circle_rotation",
        "integer_translation",
        "cyclic_points",
        "real_translation",
        "real_exp_translation",
        "translation",
        "coset_plane",
        "maharam_exp_line",
        "krengel_z_zmod2",
    ]
}

pub fn group_catalog_names() -> Vec<&'static str> {
    vec!["Z", "Z^2", "R", "R^2", "Z/n", "Aff", "E2", "Z x Z/2"]
}

pub fn pair_catalog_names() -> Vec<&'static str> {
    vec!["(E2, SO2)", "(Z x Z/2, Z/2)", "(G, trivial)", "(R^2, line) [non-compact demo]"]
}

fn parse_group(name: &str) -> Result<GroupModel> {
    Ok(match name {
        "Z" => GroupModel::integer_lattice(1),
        "Z^2" => GroupModel::integer_lattice(2),
        "R" => GroupModel::real_vector(1),
        "R^2" => GroupModel::real_vector(2),
        "Aff" => GroupModel::affine_line(),
        "E2" => GroupModel::euclidean_motions(),
        "Z x Z/2" => {
            GroupModel::product(GroupModel::integer_lattice(1), GroupModel::finite_cyclic(2))
        }
        other => {
            if let Some(n) = other.strip_prefix("Z/") {
                GroupModel::finite_cyclic(
                    n.parse().map_err(|_| anyhow!("space.group: bad cyclic order in `{other}`"))?,
                )
            } else {
                bail!("space.group: unknown group `{other}` (catalog: {:?})", group_catalog_names())
            }
        }
    })
}

pub fn build_space(section: &SpaceSection) -> Result<SpaceModel> {
    let mut space = match section.kind.as_str() {
        "circle_rotation" => {
            circle_rotation(section.alpha.unwrap_or(std::f64::consts::SQRT_2 - 1.0))
        }
        "integer_translation" => integer_translation(),
        "cyclic_points" => cyclic_points(
            section.n.ok_or_else(|| anyhow!("space.n: required for cyclic_points"))?,
        ),
        "real_translation" => real_translation(),
        "real_exp_translation" => real_exp_translation(),
        "translation" => {
            let atoms = section.atoms.clone().unwrap_or_else(|| vec![1.0]);
            let group = parse_group(section.group.as_deref().unwrap_or("R"))?;
            translation_space(atoms, group)
                .map_err(|e| anyhow!("space.atoms: {e}"))?
        }
        "coset_plane" => coset_space(
            &GroupPair::new(GroupModel::euclidean_motions(), SubgroupDescriptor::Rotations)
                .expect("catalog pair"),
        )
        .expect("catalog coset"),
        "maharam_exp_line" => {
            maharam_extend_prob(&real_exp_translation(), section.fiber_truncation.unwrap_or(12.0))
        }
        "krengel_z_zmod2" => krengel_space(
            GroupModel::product(GroupModel::integer_lattice(1), GroupModel::finite_cyclic(2)),
            vec![
                (0.5, SubgroupDescriptor::Trivial),
                (0.5, SubgroupDescriptor::CyclicRightFactor),
            ],
        )
        .expect("catalog krengel"),
        other => bail!(
            "space.kind: unknown catalog name `{other}` (catalog: {:?})",
            space_catalog_names()
        ),
    };
    if let Some(t) = section.truncation {
        if t <= 0.0 {
            bail!("space.truncation: must be positive");
        }
        space.truncation = t;
    }
    Ok(space)
}

fn parse_test_function(text: &str) -> Result<TestFunction> {
    if text == "const" {
        return Ok(TestFunction::ConstOnProb);
    }
    if let Some(arg) = text.strip_prefix("gaussian:") {
        let sigma: f64 = arg.parse().map_err(|_| anyhow!("task.f: bad gaussian sigma `{arg}`"))?;
        if sigma <= 0.0 {
            bail!("task.f: gaussian sigma must be positive");
        }
        return Ok(TestFunction::Gaussian { sigma });
    }
    if let Some(arg) = text.strip_prefix("expdecay:") {
        let base: f64 = arg.parse().map_err(|_| anyhow!("task.f: bad expdecay base `{arg}`"))?;
        if base <= 1.0 {
            bail!("task.f: expdecay base must exceed 1");
        }
        return Ok(TestFunction::ExpDecay { base });
    }
    if let Some(arg) = text.strip_prefix("indicator:") {
        return Ok(TestFunction::Indicator(parse_set(arg)?));
    }
    bail!("task.f: unknown test function `{text}` (const | gaussian:σ | expdecay:b | indicator:SET)")
}

fn parse_set(text: &str) -> Result<SetDescriptor> {
    if let Some(arg) = text.strip_prefix("interval:") {
        let (lo, hi) = arg
            .split_once(',')
            .ok_or_else(|| anyhow!("task.set: interval needs `lo,hi`"))?;
        let lo: f64 = lo.trim().parse().map_err(|_| anyhow!("task.set: bad interval lower bound"))?;
        let hi: f64 = hi.trim().parse().map_err(|_| anyhow!("task.set: bad interval upper bound"))?;
        if !(lo < hi) {
            bail!("task.set: interval bounds must satisfy lo < hi");
        }
        return Ok(SetDescriptor::interval(lo, hi));
    }
    if let Some(arg) = text.strip_prefix("ints:") {
        let items: Result<Vec<i64>> = arg
            .split(',')
            .map(|s| s.trim().parse::<i64>().map_err(|_| anyhow!("task.set: bad integer `{s}`")))
            .collect();
        return Ok(SetDescriptor::int_set(items?));
    }
    if let Some(arg) = text.strip_prefix("atom:") {
        let idx: usize = arg.parse().map_err(|_| anyhow!("task.set: bad atom index"))?;
        return Ok(SetDescriptor::Atom(idx));
    }
    bail!("task.set: unknown set `{text}` (interval:lo,hi | ints:a,b,.. | atom:i)")
}

/// Interprets a coordinate vector as a point of the space's domain.
pub fn point_from_coords(space: &SpaceModel, coords: &[f64]) -> Result<Point> {
    use hopf_core::group::GroupElement;
    use hopf_core::space::SpaceKind;
    let need = |n: usize| -> Result<()> {
        if coords.len() != n {
            bail!("task.point: expected {n} coordinates for {}", space.name);
        }
        Ok(())
    };
    Ok(match &space.kind {
        SpaceKind::CircleRotation { .. } => {
            need(1)?;
            Point::Circle(coords[0].rem_euclid(1.0))
        }
        SpaceKind::IntegerTranslation => {
            need(1)?;
            Point::Int(coords[0] as i64)
        }
        SpaceKind::CyclicPoints { n } => {
            need(1)?;
            Point::Label((coords[0] as i64).rem_euclid(*n as i64) as u32)
        }
        SpaceKind::RealTranslation | SpaceKind::RealExpTranslation => {
            need(1)?;
            Point::Real(coords[0])
        }
        SpaceKind::CosetPlane => {
            need(2)?;
            Point::Plane([coords[0], coords[1]])
        }
        SpaceKind::Translation { .. } => {
            // [atom, group coordinates...]
            if coords.len() < 2 {
                bail!("task.point: translation points are [atom, coords..]");
            }
            Point::Fibered {
                atom: coords[0] as usize,
                g: GroupElement::Reals(coords[1..].to_vec()),
            }
        }
        SpaceKind::Skew { base, .. } => {
            if coords.is_empty() {
                bail!("task.point: extension points are [base.., t]");
            }
            let (body, t) = coords.split_at(coords.len() - 1);
            Point::WithFiber(Box::new(point_from_coords(base, body)?), t[0])
        }
        _ => bail!("task.point: explicit points unsupported for {}; omit to sample", space.name),
    })
}

pub fn resolve(doc: &ConfigDoc) -> Result<Scenario> {
    let space = doc.space.as_ref().map(build_space).transpose()?;
    let defaults = QuadratureSpec::default();
    let spec = QuadratureSpec {
        nodes: doc.quadrature.nodes.unwrap_or(defaults.nodes),
        max_panel: doc.quadrature.max_panel.unwrap_or(defaults.max_panel),
        max_panels: doc.quadrature.max_panels.unwrap_or(defaults.max_panels),
        scan: doc.quadrature.scan.unwrap_or(defaults.scan),
        seed: doc.scenario.seed.unwrap_or(0),
    };
    if spec.nodes == 0 {
        bail!("quadrature.nodes: must be positive");
    }
    let pd = DecisionPolicy::default();
    let policy = DecisionPolicy {
        min_windows: doc.policy.min_windows.unwrap_or(pd.min_windows),
        blowup_factor: doc.policy.blowup_factor.unwrap_or(pd.blowup_factor),
        sat_tol: doc.policy.sat_tol.unwrap_or(pd.sat_tol),
        sat_windows: doc.policy.sat_windows.unwrap_or(pd.sat_windows),
        min_slope: doc.policy.min_slope.unwrap_or(pd.min_slope),
        quorum: doc.policy.quorum.unwrap_or(pd.quorum),
    };
    if !(0.0..=1.0).contains(&policy.quorum) {
        bail!("policy.quorum: must lie in [0, 1]");
    }

    let builtin_systems = ["z_on_z", "z_on_cyclic_12", "union_z_cyclic"];
    let mut tasks = Vec::new();
    for (i, t) in doc.tasks.iter().enumerate() {
        let id = t.id.clone().unwrap_or_else(|| format!("{}-{i}", t.task_type));
        let ctx = format!("task[{i}] ({id})");
        let max_window = t.max_window.unwrap_or(10);
        if max_window < 3 {
            bail!("{ctx}: task.max_window must be at least 3");
        }
        let f = || -> Result<TestFunction> {
            parse_test_function(
                t.f.as_deref().ok_or_else(|| anyhow!("{ctx}: task.f is required"))?,
            )
        };
        let set = || -> Result<SetDescriptor> {
            parse_set(t.set.as_deref().ok_or_else(|| anyhow!("{ctx}: task.set is required"))?)
        };
        let sys = || -> Result<String> {
            let name =
                t.system.clone().ok_or_else(|| anyhow!("{ctx}: task.system is required"))?;
            if !builtin_systems.contains(&name.as_str()) && !name.starts_with("file:") {
                bail!("{ctx}: task.system `{name}` unknown ({builtin_systems:?} or file:PATH)");
            }
            Ok(name)
        };
        let point = |space: &Option<SpaceModel>| -> Result<Option<Point>> {
            match (&t.point, space) {
                (Some(c), Some(s)) => Ok(Some(point_from_coords(s, c).context(ctx.clone())?)),
                (Some(_), None) => bail!("{ctx}: task.point given but no [space] configured"),
                (None, _) => Ok(None),
            }
        };
        let kind = match t.task_type.as_str() {
            "transform" => TaskKind::Transform { f: f()?, point: point(&space)?, max_window },
            "classify" => TaskKind::Classify {
                f: f()?,
                points: t.points.unwrap_or(100),
                max_window,
            },
            "return-volume" => {
                TaskKind::ReturnVolume { set: set()?, point: point(&space)?, max_window }
            }
            "poincare" => TaskKind::Poincare {
                set: set()?,
                max_window,
                overlap_samples: t.overlap_samples.unwrap_or(256),
            },
            "maharam" => TaskKind::Maharam {
                f: f()?,
                point: point(&space)?,
                levels: t.levels.clone().unwrap_or_else(hopf_core::engine::default_level_grid),
                max_window,
            },
            "lattice" => TaskKind::Lattice { f: f()?, point: point(&space)?, max_window },
            "weil" => {
                let ambient = parse_group(
                    t.ambient.as_deref().ok_or_else(|| anyhow!("{ctx}: task.ambient required"))?,
                )?;
                let sub = match t.subgroup.as_deref() {
                    Some("trivial") => SubgroupDescriptor::Trivial,
                    Some("so2") => SubgroupDescriptor::Rotations,
                    Some("cyclic") => SubgroupDescriptor::CyclicRightFactor,
                    Some("line") => SubgroupDescriptor::LineInPlane,
                    Some(other) => bail!("{ctx}: task.subgroup `{other}` unknown (trivial | so2 | cyclic | line)"),
                    None => bail!("{ctx}: task.subgroup required"),
                };
                let pair = GroupPair::new(ambient, sub)
                    .map_err(|e| anyhow!("{ctx}: task.subgroup does not embed: {e}"))?;
                TaskKind::Weil { pair, radius: t.radius.unwrap_or(12.0) }
            }
            "discrete-exact" => TaskKind::DiscreteExact { system: sys()? },
            "greedy-tmax" => TaskKind::GreedyTmax { system: sys()?, k: t.k.unwrap_or(4) },
            "hajian-ito" => TaskKind::HajianIto { system: sys()? },
            other => bail!("{ctx}: task.type `{other}` unknown"),
        };
        if kind.needs_space() && space.is_none() {
            bail!("{ctx}: requires a [space] section");
        }
        tasks.push(ResolvedTask { id, kind });
    }

    // duplicate task ids would collide in the report and series files
    let mut seen = std::collections::BTreeSet::new();
    for t in &tasks {
        if !seen.insert(t.id.clone()) {
            bail!("task.id: duplicate id `{}`", t.id);
        }
    }

    let needs_seed = tasks.iter().any(|t| t.kind.needs_sampling());
    if needs_seed && doc.scenario.seed.is_none() {
        bail!("scenario.seed: required because the task list samples points or masses");
    }

    Ok(Scenario { id: doc.scenario.id.clone(), seed: doc.scenario.seed, space, spec, policy, tasks })
}

pub fn parse_config(text: &str) -> Result<Scenario> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| anyhow!("config parse error: {e}"))?;
    if doc.scenario.id.is_empty() {
        bail!("scenario.id: must be nonempty");
    }
    resolve(&doc)
}

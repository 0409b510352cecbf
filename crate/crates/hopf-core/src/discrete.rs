//! Exact engine for finitely generated countable abelian groups acting on
//! countable truncated point sets.
//!
//! A `DiscreteSystem` is a truncation of an infinite system: the point set
//! includes a buffer zone, the declared `core` is the region where every
//! word of length at most `exact_radius` acts truncation-free, and all
//! weights are exact rationals. Orbits are certified either as closed
//! (every generator total on the orbit), as recurrent via an explicit
//! infinite-order stabilizer word, or as escaping (free within the radius);
//! the conservative/dissipative split, maximal transient sets, wandering
//! data, invariant measures, transversals and ergodic components are all
//! derived from these certificates with no floating point involved.

use crate::error::{CoreError, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::str::FromStr;

/// `Z^rank × Z/n₁ × … × Z/nₖ`, one generator per factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteGroup {
    pub z_rank: usize,
    pub cyclic: Vec<u64>,
}

impl DiscreteGroup {
    pub fn z() -> Self {
        DiscreteGroup { z_rank: 1, cyclic: Vec::new() }
    }

    pub fn z2() -> Self {
        DiscreteGroup { z_rank: 2, cyclic: Vec::new() }
    }

    pub fn z_cross_cyclic(n: u64) -> Self {
        DiscreteGroup { z_rank: 1, cyclic: vec![n] }
    }

    pub fn generator_count(&self) -> usize {
        self.z_rank + self.cyclic.len()
    }

    pub fn is_infinite(&self) -> bool {
        self.z_rank > 0
    }

    pub fn identity(&self) -> GroupWord {
        GroupWord { z: vec![0; self.z_rank], c: vec![0; self.cyclic.len()] }
    }

    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        match self.z_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            d => parts.push(format!("Z^{d}")),
        }
        for n in &self.cyclic {
            parts.push(format!("Z/{n}"));
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" x ")
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut z_rank = 0usize;
        let mut cyclic = Vec::new();
        for part in text.split(" x ") {
            let part = part.trim();
            if part == "1" {
                continue;
            } else if part == "Z" {
                z_rank += 1;
            } else if let Some(d) = part.strip_prefix("Z^") {
                z_rank += d.parse::<usize>().map_err(|_| CoreError::Parse {
                    line: 0,
                    message: format!("bad group factor {part}"),
                })?;
            } else if let Some(n) = part.strip_prefix("Z/") {
                cyclic.push(n.parse::<u64>().map_err(|_| CoreError::Parse {
                    line: 0,
                    message: format!("bad cyclic factor {part}"),
                })?);
            } else {
                return Err(CoreError::Parse {
                    line: 0,
                    message: format!("unknown group factor {part}"),
                });
            }
        }
        Ok(DiscreteGroup { z_rank, cyclic })
    }
}

/// A group element in exponent form (the canonical word).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupWord {
    pub z: Vec<i64>,
    pub c: Vec<u64>,
}

impl GroupWord {
    pub fn is_identity(&self) -> bool {
        self.z.iter().all(|&k| k == 0) && self.c.iter().all(|&r| r == 0)
    }

    /// Word length: `Σ|zᵢ| + Σ min(cⱼ, nⱼ - cⱼ)`.
    pub fn length(&self, group: &DiscreteGroup) -> u64 {
        let zl: u64 = self.z.iter().map(|k| k.unsigned_abs()).sum();
        let cl: u64 = self
            .c
            .iter()
            .zip(&group.cyclic)
            .map(|(&r, &n)| r.min(n - r))
            .sum();
        zl + cl
    }

    pub fn compose(&self, other: &GroupWord, group: &DiscreteGroup) -> GroupWord {
        GroupWord {
            z: self.z.iter().zip(&other.z).map(|(a, b)| a + b).collect(),
            c: self
                .c
                .iter()
                .zip(&other.c)
                .zip(&group.cyclic)
                .map(|((a, b), n)| (a + b) % n)
                .collect(),
        }
    }

    pub fn inverse(&self, group: &DiscreteGroup) -> GroupWord {
        GroupWord {
            z: self.z.iter().map(|k| -k).collect(),
            c: self
                .c
                .iter()
                .zip(&group.cyclic)
                .map(|(&r, &n)| if r == 0 { 0 } else { n - r })
                .collect(),
        }
    }

    /// Whether the word generates an infinite subgroup.
    pub fn infinite_order(&self) -> bool {
        self.z.iter().any(|&k| k != 0)
    }

    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self.z.iter().map(|k| k.to_string()).collect();
        parts.extend(self.c.iter().map(|r| r.to_string()));
        format!("({})", parts.join(","))
    }
}

/// Exact truncated system.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    pub group: DiscreteGroup,
    pub labels: Vec<String>,
    pub weights: Vec<BigRational>,
    /// Forward map per generator; `None` where the image leaves the
    /// truncation.
    pub gen_maps: Vec<Vec<Option<usize>>>,
    pub core: Vec<bool>,
    pub exact_radius: u32,
    inverse_maps: Vec<Vec<Option<usize>>>,
}

/// Per-orbit certificate backing the exact decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitCertificate {
    /// Every generator is total on the orbit (finite closed orbit).
    Closed,
    /// An infinite-order word fixes every core point of the orbit.
    Recurrent(GroupWord),
    /// No nontrivial stabilizer word within the radius: free escape.
    Escaping,
    /// Only finite-order stabilizer words: escape with finite isotropy.
    EscapingFiniteStabilizer(GroupWord),
}

#[derive(Debug, Clone)]
pub struct ExactPartition {
    pub conservative: BTreeSet<usize>,
    pub dissipative: BTreeSet<usize>,
    /// One transient witness set per dissipative orbit, keyed by the least
    /// core point of the orbit.
    pub witnesses: BTreeMap<usize, BTreeSet<usize>>,
    pub certificates: BTreeMap<usize, OrbitCertificate>,
    pub t_max: GreedyTmax,
}

/// Outcome of the greedy maximal-transient-set construction.
#[derive(Debug, Clone)]
pub struct GreedyTmax {
    /// Disjoint transient sets picked per step.
    pub steps: Vec<BTreeSet<usize>>,
    /// Supremal candidate mass at each step.
    pub alphas: Vec<BigRational>,
    pub t_max: BTreeSet<usize>,
}

/// Result of the exact return-set enumeration.
#[derive(Debug, Clone)]
pub struct ReturnsReport {
    pub words: Vec<GroupWord>,
    /// All returns within the radius are all returns of the modeled system.
    pub certified_complete: bool,
    /// A stabilizer word certifying infinitely many returns.
    pub infinite_via: Option<GroupWord>,
}

/// Witness `S = {k·m·e_dir : k ∈ Z}` for weak wandering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WanderingWitness {
    pub direction: usize,
    pub modulus: i64,
}

#[derive(Debug, Clone)]
pub struct WanderingReport {
    pub is_transient: bool,
    pub is_wandering: bool,
    pub weakly_wandering: Option<WanderingWitness>,
    pub degenerate_empty: bool,
}

#[derive(Debug, Clone)]
pub struct InvariantMeasures {
    /// σ-finite invariant weights equivalent to μ (orbit averages on closed
    /// orbits, counting weights on escaping orbits).
    pub acim: Vec<BigRational>,
    /// Invariant probability, supported on `P₁`, when `P₁` is nonempty.
    pub acip: Option<Vec<BigRational>>,
    pub p1: BTreeSet<usize>,
    pub p_inf: BTreeSet<usize>,
    /// Always empty here: a conservative system without any invariant
    /// measure admits no finite certificate in this engine.
    pub n_part: BTreeSet<usize>,
    pub n_witnessed: bool,
    /// Weakly wandering witness showing no a.c.i.p. exists on `P∞`.
    pub no_acip_witness: Option<(BTreeSet<usize>, WanderingWitness)>,
}

#[derive(Debug, Clone)]
pub struct TransversalReport {
    pub transversal: BTreeSet<usize>,
    /// `selector[x]` = the transversal point of the orbit of `x`.
    pub selector: BTreeMap<usize, usize>,
    /// `return_words[x]` = canonical `r(x)` with `r(x).x = selector[x]`.
    pub return_words: BTreeMap<usize, GroupWord>,
}

impl DiscreteSystem {
    pub fn new(
        group: DiscreteGroup,
        labels: Vec<String>,
        weights: Vec<BigRational>,
        gen_maps: Vec<Vec<Option<usize>>>,
        core: Vec<bool>,
        exact_radius: u32,
    ) -> Result<Self> {
        let n = labels.len();
        if weights.len() != n || core.len() != n {
            return Err(CoreError::DomainMismatch("table sizes disagree".into()));
        }
        if gen_maps.len() != group.generator_count() {
            return Err(CoreError::DomainMismatch("one action row set per generator".into()));
        }
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(CoreError::DomainMismatch("weights must be positive".into()));
        }
        let mut inverse_maps = Vec::with_capacity(gen_maps.len());
        for (gi, map) in gen_maps.iter().enumerate() {
            if map.len() != n {
                return Err(CoreError::DomainMismatch("action row length".into()));
            }
            let mut inv = vec![None; n];
            for (from, to) in map.iter().enumerate() {
                if let Some(to) = *to {
                    if to >= n {
                        return Err(CoreError::DomainMismatch("action target out of range".into()));
                    }
                    if inv[to].is_some() {
                        return Err(CoreError::DomainMismatch(format!(
                            "generator {gi} is not injective at point {to}"
                        )));
                    }
                    inv[to] = Some(from);
                }
            }
            inverse_maps.push(inv);
        }
        let ds = DiscreteSystem { group, labels, weights, gen_maps, core, exact_radius, inverse_maps };
        ds.validate_commutativity()?;
        ds.validate_radius()?;
        Ok(ds)
    }

    #[cfg(test)]
    pub(crate) fn new_unvalidated(
        group: DiscreteGroup,
        labels: Vec<String>,
        weights: Vec<BigRational>,
        gen_maps: Vec<Vec<Option<usize>>>,
        core: Vec<bool>,
        exact_radius: u32,
    ) -> Self {
        let n = labels.len();
        let mut inverse_maps = Vec::new();
        for map in &gen_maps {
            let mut inv = vec![None; n];
            for (from, to) in map.iter().enumerate() {
                if let Some(to) = *to {
                    inv[to] = Some(from);
                }
            }
            inverse_maps.push(inv);
        }
        DiscreteSystem { group, labels, weights, gen_maps, core, exact_radius, inverse_maps }
    }

    /// The acting group is abelian, so generator maps must commute wherever
    /// both composition orders are defined.
    fn validate_commutativity(&self) -> Result<()> {
        let g = self.gen_maps.len();
        for a in 0..g {
            for b in a + 1..g {
                for p in 0..self.point_count() {
                    let ab = self.gen_maps[a][p].and_then(|q| self.gen_maps[b][q]);
                    let ba = self.gen_maps[b][p].and_then(|q| self.gen_maps[a][q]);
                    if let (Some(x), Some(y)) = (ab, ba) {
                        if x != y {
                            return Err(CoreError::DomainMismatch(format!(
                                "generators {a} and {b} do not commute at point {}",
                                self.labels[p]
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Exactness-radius certificate: every word of length at most the
    /// radius acts truncation-free on every core point.
    fn validate_radius(&self) -> Result<()> {
        for x in self.core_points() {
            for w in self.enumerate_words(self.exact_radius as u64) {
                if self.apply_word(&w, x).is_none() {
                    return Err(CoreError::DomainMismatch(format!(
                        "radius certificate fails: word {} leaves the truncation from core point {}",
                        w.render(),
                        self.labels[x]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.labels.len()
    }

    pub fn core_points(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.labels.len()).filter(|&i| self.core[i])
    }

    pub fn apply_gen(&self, gen: usize, power: i64, mut p: usize) -> Option<usize> {
        let steps = power.unsigned_abs();
        let map = if power >= 0 { &self.gen_maps[gen] } else { &self.inverse_maps[gen] };
        for _ in 0..steps {
            p = map[p]?;
        }
        Some(p)
    }

    /// Applies a word in canonical generator order (Z factors first, then
    /// cyclic factors along the shorter direction).
    pub fn apply_word(&self, w: &GroupWord, mut p: usize) -> Option<usize> {
        for (gi, &k) in w.z.iter().enumerate() {
            p = self.apply_gen(gi, k, p)?;
        }
        for (cj, (&r, &n)) in w.c.iter().zip(&self.group.cyclic).enumerate() {
            let gen = self.group.z_rank + cj;
            let power: i64 = if r <= n - r { r as i64 } else { -((n - r) as i64) };
            p = self.apply_gen(gen, power, p)?;
        }
        Some(p)
    }

    /// Exact cocycle `∇_w(x) = μ(w.x)/μ(x)` where the action is defined.
    pub fn cocycle(&self, w: &GroupWord, x: usize) -> Option<BigRational> {
        let y = self.apply_word(w, x)?;
        Some(&self.weights[y] / &self.weights[x])
    }

    /// All canonical words of length at most `max_len`.
    pub fn enumerate_words(&self, max_len: u64) -> Vec<GroupWord> {
        let mut out = Vec::new();
        let m = max_len as i64;
        let mut stack: Vec<Vec<i64>> = vec![Vec::new()];
        for _ in 0..self.group.z_rank {
            let mut next = Vec::new();
            for prefix in &stack {
                let used: i64 = prefix.iter().map(|k| k.abs()).sum();
                for k in -(m - used)..=(m - used) {
                    let mut w = prefix.clone();
                    w.push(k);
                    next.push(w);
                }
            }
            stack = next;
        }
        let mut cyc_stack: Vec<Vec<u64>> = vec![Vec::new()];
        for &n in &self.group.cyclic {
            let mut next = Vec::new();
            for prefix in &cyc_stack {
                for r in 0..n {
                    let mut w = prefix.clone();
                    w.push(r);
                    next.push(w);
                }
            }
            cyc_stack = next;
        }
        for z in &stack {
            for c in &cyc_stack {
                let w = GroupWord { z: z.clone(), c: c.clone() };
                if w.length(&self.group) <= max_len {
                    out.push(w);
                }
            }
        }
        out.sort();
        out
    }

    /// Orbits = weakly connected components of the partial action graph.
    pub fn orbits(&self) -> Vec<BTreeSet<usize>> {
        let n = self.point_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(p) = queue.pop_front() {
                comp.insert(p);
                for maps in [&self.gen_maps, &self.inverse_maps] {
                    for map in maps.iter() {
                        if let Some(q) = map[p] {
                            if !seen[q] {
                                seen[q] = true;
                                queue.push_back(q);
                            }
                        }
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    fn orbit_closed(&self, orbit: &BTreeSet<usize>) -> bool {
        orbit.iter().all(|&p| {
            self.gen_maps.iter().all(|m| m[p].is_some())
                && self.inverse_maps.iter().all(|m| m[p].is_some())
        })
    }

    /// Fundamental loops of the orbit graph: BFS spanning tree from `probe`
    /// recording transporter words; every non-tree edge closes a loop whose
    /// word stabilizes the base point. In an abelian group these loops
    /// generate every stabilizer element reachable inside the truncation.
    fn orbit_loops(&self, probe: usize) -> Vec<GroupWord> {
        let mut words: BTreeMap<usize, GroupWord> = BTreeMap::new();
        words.insert(probe, self.group.identity());
        let mut queue = VecDeque::from([probe]);
        let mut loops: BTreeSet<GroupWord> = BTreeSet::new();
        while let Some(p) = queue.pop_front() {
            let wp = words[&p].clone();
            for gi in 0..self.group.generator_count() {
                for sign in [1i64, -1] {
                    let Some(q) = self.apply_gen(gi, sign, p) else { continue };
                    let mut step = self.group.identity();
                    if gi < self.group.z_rank {
                        step.z[gi] = sign;
                    } else {
                        let cj = gi - self.group.z_rank;
                        let n = self.group.cyclic[cj];
                        step.c[cj] = if sign > 0 { 1 } else { n - 1 };
                    }
                    let wq_new = wp.compose(&step, &self.group);
                    match words.get(&q) {
                        None => {
                            words.insert(q, wq_new);
                            queue.push_back(q);
                        }
                        Some(wq) => {
                            let diff = wq_new.compose(&wq.inverse(&self.group), &self.group);
                            if !diff.is_identity() {
                                loops.insert(diff);
                            }
                        }
                    }
                }
            }
        }
        loops.into_iter().collect()
    }

    /// Certifies one orbit; `Err(UncertifiedOrbit)` when neither the closed
    /// nor the escape pattern applies consistently.
    pub fn certify_orbit(&self, orbit: &BTreeSet<usize>) -> Result<OrbitCertificate> {
        if self.orbit_closed(orbit) {
            return Ok(OrbitCertificate::Closed);
        }
        let core_pts: Vec<usize> = orbit.iter().copied().filter(|&p| self.core[p]).collect();
        let probe = core_pts.first().copied().or_else(|| orbit.first().copied());
        let probe = match probe {
            Some(p) => p,
            None => return Ok(OrbitCertificate::Escaping),
        };
        let mut finite_stab: Option<GroupWord> = None;
        let mut infinite_stab: Option<GroupWord> = None;
        for w in self.orbit_loops(probe) {
            // a stabilizer word must fix the whole core of the orbit
            let consistent = core_pts.iter().all(|&p| self.apply_word(&w, p) == Some(p));
            if !consistent {
                return Err(CoreError::UncertifiedOrbit(self.labels[probe].clone()));
            }
            if w.infinite_order() {
                infinite_stab = Some(w);
                break;
            } else {
                finite_stab.get_or_insert(w);
            }
        }
        if let Some(w) = infinite_stab {
            return Ok(OrbitCertificate::Recurrent(w));
        }
        if let Some(w) = finite_stab {
            return Ok(OrbitCertificate::EscapingFiniteStabilizer(w));
        }
        Ok(OrbitCertificate::Escaping)
    }

    fn certificate_is_conservative(&self, cert: &OrbitCertificate) -> bool {
        match cert {
            OrbitCertificate::Closed => self.group.is_infinite(),
            OrbitCertificate::Recurrent(_) => true,
            _ => false,
        }
    }

    /// All return words `{w : x ∈ w.A, |w| <= radius}`, with completeness
    /// and infinitude flags.
    pub fn returns_set_exact(&self, a: &BTreeSet<usize>, x: usize) -> Result<ReturnsReport> {
        if x >= self.point_count() || !self.core[x] {
            return Err(CoreError::OutsideCore(
                self.labels.get(x).cloned().unwrap_or_else(|| format!("#{x}")),
            ));
        }
        let words = self.enumerate_words(self.exact_radius as u64);
        let mut hits = Vec::new();
        for w in &words {
            // x ∈ w.A  ⟺  w⁻¹.x ∈ A
            let winv = w.inverse(&self.group);
            if let Some(y) = self.apply_word(&winv, x) {
                if a.contains(&y) {
                    hits.push(w.clone());
                }
            }
        }
        let orbit = self
            .orbits()
            .into_iter()
            .find(|o| o.contains(&x))
            .unwrap_or_default();
        let cert = self.certify_orbit(&orbit)?;
        let infinite_via = if hits.is_empty() {
            None
        } else {
            match &cert {
                OrbitCertificate::Closed => {
                    // period word: an infinite-order stabilizer found by
                    // cycling a Z generator within the closed orbit
                    self.closed_orbit_period_word(&orbit, x)
                }
                OrbitCertificate::Recurrent(w) => Some(w.clone()),
                _ => None,
            }
        };
        let all_in_core = a.iter().all(|&p| self.core[p]);
        let certified_complete = match cert {
            OrbitCertificate::Escaping | OrbitCertificate::EscapingFiniteStabilizer(_) => {
                all_in_core
            }
            _ => false,
        };
        Ok(ReturnsReport { words: hits, certified_complete, infinite_via })
    }

    /// For closed orbits of infinite groups: a stabilizer word from cycling
    /// the first Z generator that moves the orbit (or the identity-acting
    /// generator itself).
    fn closed_orbit_period_word(&self, orbit: &BTreeSet<usize>, x: usize) -> Option<GroupWord> {
        if !self.group.is_infinite() {
            return None;
        }
        for gi in 0..self.group.z_rank {
            let mut p = x;
            for period in 1..=(orbit.len() as i64 + 1) {
                p = self.gen_maps[gi][p]?;
                if p == x {
                    let mut w = self.group.identity();
                    w.z[gi] = period;
                    return Some(w);
                }
            }
        }
        None
    }

    /// Exact conservative/dissipative partition of the core.
    pub fn hopf_decompose_exact(&self) -> Result<ExactPartition> {
        let mut conservative = BTreeSet::new();
        let mut dissipative = BTreeSet::new();
        let mut witnesses = BTreeMap::new();
        let mut certificates = BTreeMap::new();
        for orbit in self.orbits() {
            let core_pts: Vec<usize> = orbit.iter().copied().filter(|&p| self.core[p]).collect();
            if core_pts.is_empty() {
                continue;
            }
            let cert = self.certify_orbit(&orbit)?;
            let key = core_pts[0];
            if self.certificate_is_conservative(&cert) {
                conservative.extend(core_pts.iter().copied());
            } else {
                dissipative.extend(core_pts.iter().copied());
                // singleton sections are transient witnesses on escape orbits
                witnesses.insert(key, BTreeSet::from([key]));
            }
            certificates.insert(key, cert);
        }
        let t_max = self.greedy_max_transient_from(&dissipative, 4)?;
        Ok(ExactPartition { conservative, dissipative, witnesses, certificates, t_max })
    }

    /// Greedy maximal transient set: per step, the best union of at most
    /// `k` orbit sections (highest remaining mass, lexicographic
    /// tie-break), until the dissipative part is covered.
    pub fn greedy_max_transient(&self, k: usize) -> Result<GreedyTmax> {
        let partition = self.hopf_decompose_exact()?;
        self.greedy_max_transient_from(&partition.dissipative, k)
    }

    fn greedy_max_transient_from(
        &self,
        dissipative: &BTreeSet<usize>,
        k: usize,
    ) -> Result<GreedyTmax> {
        // candidate sections: the max-weight core point per dissipative orbit
        let mut sections: Vec<(BigRational, usize)> = Vec::new();
        for orbit in self.orbits() {
            let core_diss: Vec<usize> = orbit
                .iter()
                .copied()
                .filter(|p| dissipative.contains(p))
                .collect();
            if core_diss.is_empty() {
                continue;
            }
            let best = core_diss
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    self.weights[a]
                        .cmp(&self.weights[b])
                        .then(b.cmp(&a)) // ties: least index wins
                })
                .unwrap();
            sections.push((self.weights[best].clone(), best));
        }
        // heaviest first, lexicographic tie-break on the point index
        sections.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut steps = Vec::new();
        let mut alphas = Vec::new();
        let mut t_max = BTreeSet::new();
        let mut idx = 0;
        while idx < sections.len() {
            let chunk: Vec<_> = sections[idx..].iter().take(k.max(1)).collect();
            let alpha: BigRational =
                chunk.iter().map(|(w, _)| w.clone()).fold(BigRational::zero(), |a, b| a + b);
            let step: BTreeSet<usize> = chunk.iter().map(|(_, p)| *p).collect();
            idx += step.len();
            t_max.extend(step.iter().copied());
            steps.push(step);
            alphas.push(alpha);
        }
        Ok(GreedyTmax { steps, alphas, t_max })
    }

    /// Exact transience/wandering/weak-wandering tests for a core subset.
    pub fn wandering_tests(&self, w_set: &BTreeSet<usize>) -> Result<WanderingReport> {
        if w_set.is_empty() {
            return Ok(WanderingReport {
                is_transient: true,
                is_wandering: true,
                weakly_wandering: Some(WanderingWitness { direction: 0, modulus: 1 }),
                degenerate_empty: true,
            });
        }
        for &p in w_set {
            if p >= self.point_count() || !self.core[p] {
                return Err(CoreError::OutsideCore(
                    self.labels.get(p).cloned().unwrap_or_else(|| format!("#{p}")),
                ));
            }
        }
        let words = self.enumerate_words(self.exact_radius as u64);

        // transience: every return set R_W(x) is certifiably finite, i.e.
        // no point of W sits on a conservative orbit
        let mut is_transient = true;
        for orbit in self.orbits() {
            if orbit.iter().any(|p| w_set.contains(p)) {
                let cert = self.certify_orbit(&orbit)?;
                if self.certificate_is_conservative(&cert) {
                    is_transient = false;
                }
            }
        }

        // wandering: w.W ∩ W = ∅ for every nontrivial word within radius
        let mut is_wandering = true;
        'outer: for w in &words {
            if w.is_identity() {
                continue;
            }
            for &p in w_set {
                if let Some(q) = self.apply_word(w, p) {
                    if w_set.contains(&q) {
                        is_wandering = false;
                        break 'outer;
                    }
                }
            }
        }
        // beyond the radius, translates of a set meeting a conservative
        // orbit recur, so wandering additionally requires transience
        is_wandering = is_wandering && is_transient;

        // weak wandering: search arithmetic progressions along Z factors
        let mut weakly_wandering = None;
        'search: for dir in 0..self.group.z_rank {
            for modulus in 1..=(self.exact_radius as i64) {
                let mut ok = true;
                let mut j = 1i64;
                while (j * modulus) as u64 <= self.exact_radius as u64 {
                    for &p in w_set {
                        let mut w = self.group.identity();
                        w.z[dir] = j * modulus;
                        for shifted in [&w, &w.inverse(&self.group)] {
                            if let Some(q) = self.apply_word(shifted, p) {
                                if w_set.contains(&q) {
                                    ok = false;
                                }
                            }
                        }
                    }
                    if !ok {
                        break;
                    }
                    j += 1;
                }
                if ok && is_transient {
                    weakly_wandering = Some(WanderingWitness { direction: dir, modulus });
                    break 'search;
                }
            }
        }
        Ok(WanderingReport {
            is_transient,
            is_wandering,
            weakly_wandering,
            degenerate_empty: false,
        })
    }

    /// Invariant measures and the positive–null decomposition of the core.
    pub fn invariant_measure_search(&self) -> Result<InvariantMeasures> {
        let n = self.point_count();
        let mut acim = vec![BigRational::zero(); n];
        let mut p1 = BTreeSet::new();
        let mut p_inf = BTreeSet::new();
        let mut p1_mass = BigRational::zero();
        let mut acip = vec![BigRational::zero(); n];
        let mut no_acip_witness = None;
        for orbit in self.orbits() {
            let core_pts: Vec<usize> = orbit.iter().copied().filter(|&p| self.core[p]).collect();
            if core_pts.is_empty() {
                continue;
            }
            let cert = self.certify_orbit(&orbit)?;
            match cert {
                OrbitCertificate::Closed => {
                    // orbit-averaged weights: exact invariant probability part
                    let total: BigRational = orbit
                        .iter()
                        .map(|&p| self.weights[p].clone())
                        .fold(BigRational::zero(), |a, b| a + b);
                    let avg = total.clone() / BigRational::from(BigInt::from(orbit.len() as i64));
                    for &p in &orbit {
                        acim[p] = avg.clone();
                        acip[p] = avg.clone();
                    }
                    p1.extend(core_pts.iter().copied());
                    p1_mass += total;
                }
                _ => {
                    // counting weights give a σ-finite invariant measure;
                    // no invariant probability lives on these orbits
                    for &p in &orbit {
                        acim[p] = BigRational::one();
                    }
                    p_inf.extend(core_pts.iter().copied());
                    if no_acip_witness.is_none() {
                        let section = BTreeSet::from([core_pts[0]]);
                        if let Some(witness) = self.wandering_tests(&section)?.weakly_wandering {
                            no_acip_witness = Some((section, witness));
                        }
                    }
                }
            }
        }
        let acip = if p1.is_empty() {
            None
        } else {
            // normalize the closed-orbit part to a probability
            Some(acip.into_iter().map(|w| w / p1_mass.clone()).collect())
        };
        Ok(InvariantMeasures {
            acim,
            acip,
            p1,
            p_inf,
            n_part: BTreeSet::new(),
            n_witnessed: false,
            no_acip_witness,
        })
    }

    /// Lexicographically least transversal with selector and return words.
    pub fn orbit_transversal(&self) -> Result<TransversalReport> {
        let mut transversal = BTreeSet::new();
        let mut selector = BTreeMap::new();
        let mut return_words = BTreeMap::new();
        for orbit in self.orbits() {
            let core_pts: Vec<usize> = orbit.iter().copied().filter(|&p| self.core[p]).collect();
            if core_pts.is_empty() {
                continue;
            }
            self.certify_orbit(&orbit)?;
            let base = core_pts[0];
            transversal.insert(base);
            for &x in &core_pts {
                selector.insert(x, base);
                let w = self
                    .shortest_word(x, base)
                    .ok_or_else(|| CoreError::UncertifiedOrbit(self.labels[x].clone()))?;
                return_words.insert(x, w);
            }
        }
        Ok(TransversalReport { transversal, selector, return_words })
    }

    /// Shortest word (lexicographic tie-break) with `w.x = target`.
    fn shortest_word(&self, x: usize, target: usize) -> Option<GroupWord> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        let mut best: BTreeMap<usize, GroupWord> = BTreeMap::new();
        let mut heap: BinaryHeap<Reverse<(u64, GroupWord, usize)>> = BinaryHeap::new();
        heap.push(Reverse((0, self.group.identity(), x)));
        while let Some(Reverse((len, w, p))) = heap.pop() {
            if let Some(existing) = best.get(&p) {
                if (existing.length(&self.group), existing.clone()) <= (len, w.clone()) {
                    continue;
                }
            }
            best.insert(p, w.clone());
            // every step below walks an explicitly defined edge, so the
            // found word is valid at any length
            for gi in 0..self.group.generator_count() {
                for sign in [1i64, -1] {
                    if let Some(q) = self.apply_gen(gi, sign, p) {
                        if best.contains_key(&q) {
                            continue;
                        }
                        let mut step = self.group.identity();
                        if gi < self.group.z_rank {
                            step.z[gi] = sign;
                        } else {
                            let cj = gi - self.group.z_rank;
                            let n = self.group.cyclic[cj];
                            step.c[cj] = if sign > 0 { 1 } else { n - 1 };
                        }
                        let nw = w.compose(&step, &self.group);
                        let nlen = nw.length(&self.group);
                        heap.push(Reverse((nlen, nw, q)));
                    }
                }
            }
        }
        best.get(&target).cloned()
    }

    /// Ergodic components: orbit restrictions as stand-alone systems, with
    /// the index maps back into this system.
    pub fn ergodic_components(&self) -> Result<Vec<(BTreeSet<usize>, DiscreteSystem)>> {
        let mut out = Vec::new();
        for orbit in self.orbits() {
            if orbit.iter().all(|&p| !self.core[p]) {
                continue;
            }
            let index: Vec<usize> = orbit.iter().copied().collect();
            let back: BTreeMap<usize, usize> =
                index.iter().enumerate().map(|(i, &p)| (p, i)).collect();
            let labels = index.iter().map(|&p| self.labels[p].clone()).collect();
            let weights = index.iter().map(|&p| self.weights[p].clone()).collect();
            let gen_maps = self
                .gen_maps
                .iter()
                .map(|m| {
                    index
                        .iter()
                        .map(|&p| m[p].and_then(|q| back.get(&q).copied()))
                        .collect()
                })
                .collect();
            let core = index.iter().map(|&p| self.core[p]).collect();
            let sub = DiscreteSystem::new(
                self.group.clone(),
                labels,
                weights,
                gen_maps,
                core,
                self.exact_radius,
            )?;
            out.push((orbit, sub));
        }
        Ok(out)
    }

    /// Canonical text serialization; `parse` inverts it bit-exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "discrete-system v1").unwrap();
        writeln!(s, "group {}", self.group.render()).unwrap();
        writeln!(s, "points {}", self.point_count()).unwrap();
        for i in 0..self.point_count() {
            writeln!(
                s,
                "point {} {} {}/{}",
                i,
                self.labels[i],
                self.weights[i].numer(),
                self.weights[i].denom()
            )
            .unwrap();
        }
        for (gi, map) in self.gen_maps.iter().enumerate() {
            for (from, to) in map.iter().enumerate() {
                if let Some(to) = to {
                    writeln!(s, "act {gi} {from} {to}").unwrap();
                }
            }
        }
        let core: Vec<String> = self.core_points().map(|p| p.to_string()).collect();
        writeln!(s, "core {}", core.join(" ")).unwrap();
        writeln!(s, "radius {}", self.exact_radius).unwrap();
        writeln!(s, "end").unwrap();
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut expect = |what: &str| -> Result<(usize, String)> {
            for (ln, line) in lines.by_ref() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                if !line.starts_with(what) {
                    return Err(CoreError::Parse {
                        line: ln + 1,
                        message: format!("expected `{what}`, found `{line}`"),
                    });
                }
                return Ok((ln + 1, line.to_string()));
            }
            Err(CoreError::Parse { line: 0, message: format!("missing `{what}`") })
        };
        expect("discrete-system v1")?;
        let (gl, group_line) = expect("group ")?;
        let group = DiscreteGroup::parse(group_line.trim_start_matches("group ").trim())
            .map_err(|e| match e {
                CoreError::Parse { message, .. } => CoreError::Parse { line: gl, message },
                other => other,
            })?;
        let (pl, points_line) = expect("points ")?;
        let count: usize = points_line
            .trim_start_matches("points ")
            .trim()
            .parse()
            .map_err(|_| CoreError::Parse { line: pl, message: "bad point count".into() })?;

        let mut labels = vec![String::new(); count];
        let mut weights = vec![BigRational::zero(); count];
        let mut gen_maps = vec![vec![None; count]; group.generator_count()];
        let mut core = vec![false; count];
        let mut radius: Option<u32> = None;
        let mut saw_end = false;
        for (ln, raw) in lines {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mk_err = |message: String| CoreError::Parse { line: ln + 1, message };
            let mut words = line.split_whitespace();
            match words.next() {
                Some("point") => {
                    let idx: usize = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| mk_err("bad point index".into()))?;
                    let label =
                        words.next().ok_or_else(|| mk_err("missing point label".into()))?;
                    let weight_str =
                        words.next().ok_or_else(|| mk_err("missing point weight".into()))?;
                    let (num, den) = weight_str
                        .split_once('/')
                        .ok_or_else(|| mk_err("weight must be num/den".into()))?;
                    let num = BigInt::from_str(num).map_err(|_| mk_err("bad numerator".into()))?;
                    let den =
                        BigInt::from_str(den).map_err(|_| mk_err("bad denominator".into()))?;
                    if idx >= count {
                        return Err(mk_err(format!("point index {idx} out of range")));
                    }
                    if den.is_zero() {
                        return Err(mk_err("zero denominator".into()));
                    }
                    labels[idx] = label.to_string();
                    weights[idx] = BigRational::new(num, den);
                }
                Some("act") => {
                    let gi: usize = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| mk_err("bad generator index".into()))?;
                    let from: usize = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| mk_err("bad source point".into()))?;
                    let to: usize = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| mk_err("bad target point".into()))?;
                    if gi >= gen_maps.len() || from >= count || to >= count {
                        return Err(mk_err("action row out of range".into()));
                    }
                    gen_maps[gi][from] = Some(to);
                }
                Some("core") => {
                    for w in words {
                        let idx: usize =
                            w.parse().map_err(|_| mk_err("bad core index".into()))?;
                        if idx >= count {
                            return Err(mk_err(format!("core index {idx} out of range")));
                        }
                        core[idx] = true;
                    }
                }
                Some("radius") => {
                    radius = Some(
                        words
                            .next()
                            .and_then(|w| w.parse().ok())
                            .ok_or_else(|| mk_err("bad radius".into()))?,
                    );
                }
                Some("end") => {
                    saw_end = true;
                    break;
                }
                other => {
                    return Err(mk_err(format!("unknown directive {other:?}")));
                }
            }
        }
        if !saw_end {
            return Err(CoreError::Parse { line: 0, message: "missing `end`".into() });
        }
        let radius =
            radius.ok_or(CoreError::Parse { line: 0, message: "missing `radius`".into() })?;
        DiscreteSystem::new(group, labels, weights, gen_maps, core, radius)
    }
}

/// `Z` translating `{-m..m}` with weights `2^{-|k|}`; the core is shrunk by
/// the radius so the certificate holds.
pub fn z_translation_system(half_width: i64, radius: u32) -> DiscreteSystem {
    let m = half_width;
    assert!(m > radius as i64, "truncation must exceed the radius");
    let points: Vec<i64> = (-m..=m).collect();
    let labels = points.iter().map(|k| format!("n{k}")).collect();
    let weights = points
        .iter()
        .map(|&k| {
            let p = BigInt::from(1) << k.unsigned_abs() as usize;
            BigRational::new(BigInt::one(), p)
        })
        .collect();
    let idx = |k: i64| (k + m) as usize;
    let mut fwd = vec![None; points.len()];
    for &k in &points {
        if k < m {
            fwd[idx(k)] = Some(idx(k + 1));
        }
    }
    let core = points.iter().map(|&k| k.abs() <= m - radius as i64).collect();
    DiscreteSystem::new(DiscreteGroup::z(), labels, weights, vec![fwd], core, radius).unwrap()
}

/// `Z` rotating `Z/n` with uniform weights (fully closed, core = all).
pub fn z_on_cyclic_system(n: u64, radius: u32) -> DiscreteSystem {
    let labels = (0..n).map(|r| format!("r{r}")).collect();
    let weights = (0..n)
        .map(|_| BigRational::new(BigInt::one(), BigInt::from(n)))
        .collect();
    let fwd: Vec<Option<usize>> = (0..n as usize).map(|i| Some((i + 1) % n as usize)).collect();
    let core = vec![true; n as usize];
    DiscreteSystem::new(DiscreteGroup::z(), labels, weights, vec![fwd], core, radius).unwrap()
}

/// `Z` acting trivially on `n` fixed points.
pub fn trivial_action_system(n: usize, radius: u32) -> DiscreteSystem {
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    let weights = (0..n)
        .map(|_| BigRational::new(BigInt::one(), BigInt::from(n as i64)))
        .collect();
    let fwd: Vec<Option<usize>> = (0..n).map(Some).collect();
    let core = vec![true; n];
    DiscreteSystem::new(DiscreteGroup::z(), labels, weights, vec![fwd], core, radius).unwrap()
}

/// Disjoint union (relabeled side by side); both systems must share the
/// group and radius.
pub fn union_systems(a: &DiscreteSystem, b: &DiscreteSystem) -> Result<DiscreteSystem> {
    if a.group != b.group || a.exact_radius != b.exact_radius {
        return Err(CoreError::DomainMismatch("union needs matching group and radius".into()));
    }
    let offset = a.point_count();
    let labels = a
        .labels
        .iter()
        .map(|l| format!("a.{l}"))
        .chain(b.labels.iter().map(|l| format!("b.{l}")))
        .collect();
    let weights = a.weights.iter().chain(b.weights.iter()).cloned().collect();
    let gen_maps = a
        .gen_maps
        .iter()
        .zip(&b.gen_maps)
        .map(|(ma, mb)| {
            ma.iter()
                .copied()
                .chain(mb.iter().map(|t| t.map(|q| q + offset)))
                .collect()
        })
        .collect();
    let core = a.core.iter().chain(b.core.iter()).copied().collect();
    DiscreteSystem::new(a.group.clone(), labels, weights, gen_maps, core, a.exact_radius)
}

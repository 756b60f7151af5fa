//! Multi-objective tuning methodology: Pareto search over controller
//! parameters, work-zone filtering, Monte Carlo robustness screening and
//! the three-setup selection rule.
//!
//! Candidates are scored by the worst case over a set of tuning
//! trajectories, one objective per indicator (IAE, M_epsilon, M_zeta).
//! The search is a direct multisearch: a pattern search that polls mesh
//! neighbors of nondominated archive points, deterministic per seed.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::controllers::{
    run_closed_loop, ControlLaw, ControllerConfig, PlantConfig, PreviewConfig, DIVERGENCE_LIMIT,
};
use crate::metrics::metrics_report;
use crate::numerics::{Distribution, SeedStream};
use crate::trajectory::Trajectory;
use crate::vehicle::{TireModel, VehicleParams, A3_NOMINAL};

/// Mean absolute lateral error above this is poor tracking, m.
pub const WORKZONE_MAX_IAE: f64 = 0.35;
/// Stability indicator limit; more oscillatory feedback risks instability.
pub const WORKZONE_MAX_EPSILON: f64 = 0.25;
/// Comfort indicator limit; more steering chatter is felt by passengers.
pub const WORKZONE_MAX_ZETA: f64 = 0.7;

/// Robustness gate for setup selection, percent of successful runs.
pub const ROBUSTNESS_GATE_PCT: f64 = 90.0;

/// Mesh tolerance (fraction of each parameter range) at which polling stops.
const MESH_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TuningError {
    #[error("parameter space is invalid: {0}")]
    InvalidSpace(&'static str),
    #[error("search budget must be at least 50 evaluations")]
    BudgetTooSmall,
    #[error("candidate parameters do not form a valid controller")]
    InvalidCandidate,
    #[error("selection needs at least two qualifying archive points")]
    TooFewPoints,
}

/// One tunable parameter: bounds plus the initial poll step.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpec {
    pub name: &'static str,
    pub lower: f64,
    pub upper: f64,
    /// Initial mesh step, absolute units.
    pub step: f64,
}

impl ParameterSpec {
    pub fn new(name: &'static str, lower: f64, upper: f64) -> Self {
        Self { name, lower, upper, step: 0.25 * (upper - lower) }
    }

    fn validate(&self) -> Result<(), TuningError> {
        if !(self.lower.is_finite() && self.upper.is_finite()) {
            return Err(TuningError::InvalidSpace("bounds must be finite"));
        }
        if self.lower >= self.upper {
            return Err(TuningError::InvalidSpace("lower bound must be below upper"));
        }
        if !(self.step > 0.0) {
            return Err(TuningError::InvalidSpace("step must be positive"));
        }
        Ok(())
    }
}

/// Box-bounded search space, one spec per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpace {
    pub specs: Vec<ParameterSpec>,
}

impl ParameterSpace {
    pub fn validate(&self) -> Result<(), TuningError> {
        if self.specs.is_empty() {
            return Err(TuningError::InvalidSpace("no parameters"));
        }
        for s in &self.specs {
            s.validate()?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.specs.len()
    }
}

/// Worst case of each indicator over the tuning trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveVector {
    pub max_iae: f64,
    pub max_m_epsilon: f64,
    pub max_m_zeta: f64,
}

impl ObjectiveVector {
    /// Sentinel for candidates that diverge on any trajectory.
    pub fn diverged() -> Self {
        Self { max_iae: f64::INFINITY, max_m_epsilon: f64::INFINITY, max_m_zeta: f64::INFINITY }
    }

    pub fn is_finite(&self) -> bool {
        self.max_iae.is_finite() && self.max_m_epsilon.is_finite() && self.max_m_zeta.is_finite()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.max_iae, self.max_m_epsilon, self.max_m_zeta]
    }

    /// `self` dominates `other`: no worse in every objective, better in one.
    pub fn dominates(&self, other: &Self) -> bool {
        let a = self.as_array();
        let b = other.as_array();
        a.iter().zip(&b).all(|(x, y)| x <= y) && a.iter().zip(&b).any(|(x, y)| x < y)
    }

    pub fn in_work_zone(&self) -> bool {
        self.max_iae <= WORKZONE_MAX_IAE
            && self.max_m_epsilon <= WORKZONE_MAX_EPSILON
            && self.max_m_zeta <= WORKZONE_MAX_ZETA
    }
}

/// One nondominated candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    /// Evaluation index; canonical ordering key, independent of execution
    /// order.
    pub index: u64,
    pub params: Vec<f64>,
    pub objectives: ObjectiveVector,
    pub robustness_pct: Option<f64>,
}

/// Set of mutually nondominated entries, kept sorted by evaluation index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Insert if nondominated; drops existing entries the candidate
    /// dominates. Entries with equal objectives coexist. Returns whether the
    /// candidate entered the archive.
    pub fn insert(&mut self, entry: ArchiveEntry) -> bool {
        if !entry.objectives.is_finite() {
            return false;
        }
        if self.entries.iter().any(|e| e.objectives.dominates(&entry.objectives)) {
            return false;
        }
        // a re-evaluation of a point already present adds nothing
        if self.entries.iter().any(|e| e.params == entry.params) {
            return false;
        }
        self.entries.retain(|e| !entry.objectives.dominates(&e.objectives));
        let pos = self.entries.partition_point(|e| e.index < entry.index);
        self.entries.insert(pos, entry);
        true
    }
}

/// Controller family under tuning. Fixed structural choices (filter
/// smoothing, adaptation slope, secondary weights) stay at their bundled
/// values; the space covers the parameters that differ between bundled
/// setups, plus the preview distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Lqr,
    Mfc,
    Samfc,
    Pid,
    Nlmpc,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Lqr, Family::Mfc, Family::Samfc, Family::Pid, Family::Nlmpc];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Lqr => "lqr",
            Family::Mfc => "mfc",
            Family::Samfc => "samfc",
            Family::Pid => "pid",
            Family::Nlmpc => "nlmpc",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Default search space; bounds bracket the bundled setup values by
    /// roughly a decade in each direction.
    pub fn space(&self) -> ParameterSpace {
        let p = ParameterSpec::new;
        let specs = match self {
            Family::Lqr => alloc::vec![
                p("q1", 1e-4, 0.02),
                p("q4", 1e-5, 2e-3),
                p("n", 1.0, 30.0),
                p("d_p", 0.0, 5.0),
            ],
            Family::Mfc => alloc::vec![
                p("k_d", 0.2, 12.0),
                p("alpha", 40.0, 2500.0),
                p("d_p", 0.0, 5.0),
            ],
            Family::Samfc => alloc::vec![
                p("k_p", 0.0, 2.0),
                p("k_d", 0.2, 12.0),
                p("alpha0", 20.0, 400.0),
                p("v_x0", 0.0, 25.0),
                p("d_p", 0.0, 5.0),
            ],
            Family::Pid => alloc::vec![
                p("k_p", 0.01, 1.0),
                p("k_d", 0.003, 0.4),
                p("n", 1.0, 40.0),
                p("d_p", 0.0, 5.0),
            ],
            Family::Nlmpc => alloc::vec![
                p("h_p", 5.0, 40.0),
                p("h_c", 2.0, 8.0),
                p("w_du", 2.0, 300.0),
                p("d_p", 0.0, 5.0),
            ],
        };
        ParameterSpace { specs }
    }

    /// Map a parameter vector to a runnable setup.
    pub fn config(&self, params: &[f64]) -> Result<ControllerConfig, TuningError> {
        let space = self.space();
        if params.len() != space.dim() {
            return Err(TuningError::InvalidCandidate);
        }
        let d_p0 = params[params.len() - 1];
        let preview = PreviewConfig { d_p0, t_p: 0.0 };
        let law = match self {
            Family::Lqr => ControlLaw::Lqr {
                q1: params[0],
                q2: 0.0002,
                q3: 0.001,
                q4: params[1],
                n: params[2],
            },
            Family::Mfc => ControlLaw::Mfc { k_p: 0.0, k_d: params[0], alpha: params[1] },
            Family::Samfc => ControlLaw::Samfc {
                k_p: params[0],
                k_d: params[1],
                alpha0: params[2],
                v_x0: params[3],
                k_alpha: 10.0,
            },
            Family::Pid => ControlLaw::Pid { k_p: params[0], k_i: 0.0, k_d: params[1], n: params[2] },
            Family::Nlmpc => {
                let h_p = params[0].round().max(1.0) as usize;
                let h_c = (params[1].round().max(1.0) as usize).min(h_p);
                ControlLaw::Nlmpc { h_p, h_c, w_du: params[2] }
            }
        };
        let config = ControllerConfig { law, preview };
        config.validate().map_err(|_| TuningError::InvalidCandidate)?;
        Ok(config)
    }
}

/// Worst-case objectives of one candidate over the tuning trajectories.
/// A divergence on any trajectory maps every objective to the infinite
/// sentinel. Deterministic: no randomness enters the closed loop.
pub fn evaluate_candidate(
    config: &ControllerConfig,
    trajectories: &[Trajectory],
    plant: &PlantConfig,
) -> Result<ObjectiveVector, TuningError> {
    config.validate().map_err(|_| TuningError::InvalidCandidate)?;
    let mut out = ObjectiveVector { max_iae: 0.0, max_m_epsilon: 0.0, max_m_zeta: 0.0 };
    for trajectory in trajectories {
        let log = match run_closed_loop(trajectory, config, plant, 0) {
            Ok(log) => log,
            Err(_) => return Ok(ObjectiveVector::diverged()),
        };
        let report = match metrics_report(&log) {
            Some(r) if !r.diverged => r,
            _ => return Ok(ObjectiveVector::diverged()),
        };
        out.max_iae = out.max_iae.max(report.iae);
        out.max_m_epsilon = out.max_m_epsilon.max(report.m_epsilon.unwrap_or(0.0));
        out.max_m_zeta = out.max_m_zeta.max(report.m_zeta.unwrap_or(0.0));
    }
    Ok(out)
}

/// Direct multisearch over an arbitrary objective function.
///
/// Seeds the archive with the box center plus random interior points, then
/// repeatedly polls the +-step coordinate neighbors of the archive point
/// with the coarsest mesh; a poll round that fails to extend the archive
/// halves that point's mesh. Stops at the evaluation budget or when every
/// mesh is below `MESH_TOLERANCE` of its parameter range. Deterministic
/// given `(space, budget, seed)`.
pub fn direct_multisearch<F>(
    space: &ParameterSpace,
    mut objective: F,
    budget: usize,
    seed: u64,
) -> Result<ParetoArchive, TuningError>
where
    F: FnMut(&[f64]) -> ObjectiveVector,
{
    direct_multisearch_batched(
        space,
        |batch| batch.iter().map(|p| objective(p)).collect(),
        budget,
        seed,
    )
}

/// [`direct_multisearch`] with a batch evaluator: all points of one poll
/// round are handed over together, so a caller may evaluate them
/// concurrently. Results are inserted in candidate-index order, making the
/// archive independent of evaluation order within a batch.
pub fn direct_multisearch_batched<F>(
    space: &ParameterSpace,
    mut evaluate: F,
    budget: usize,
    seed: u64,
) -> Result<ParetoArchive, TuningError>
where
    F: FnMut(&[Vec<f64>]) -> Vec<ObjectiveVector>,
{
    space.validate()?;
    if budget < 50 {
        return Err(TuningError::BudgetTooSmall);
    }
    let dim = space.dim();
    let ranges: Vec<f64> = space.specs.iter().map(|s| s.upper - s.lower).collect();

    let mut archive = ParetoArchive::new();
    // mesh fraction per archive entry, keyed by evaluation index
    let mut mesh: BTreeMap<u64, f64> = BTreeMap::new();
    let mut evals = 0usize;
    let mut index = 0u64;

    // evaluate a batch and fold the results into the archive; returns
    // whether any point entered
    let submit = |batch: Vec<Vec<f64>>,
                      frac: f64,
                      evaluate: &mut F,
                      archive: &mut ParetoArchive,
                      mesh: &mut BTreeMap<u64, f64>,
                      evals: &mut usize,
                      index: &mut u64|
     -> bool {
        if batch.is_empty() {
            return false;
        }
        let objs = evaluate(&batch);
        debug_assert_eq!(objs.len(), batch.len());
        *evals += batch.len();
        let mut any = false;
        for (p, obj) in batch.into_iter().zip(objs) {
            let entered = archive.insert(ArchiveEntry {
                index: *index,
                params: p,
                objectives: obj,
                robustness_pct: None,
            });
            if entered {
                mesh.insert(*index, frac);
                any = true;
            }
            *index += 1;
        }
        any
    };

    // initial design: center plus seeded uniform points
    let mut stream = SeedStream::new(seed);
    let n_init = (budget / 10).clamp(4, 24).min(budget);
    let mut initial: Vec<Vec<f64>> =
        alloc::vec![space.specs.iter().map(|s| 0.5 * (s.lower + s.upper)).collect()];
    for _ in 1..n_init {
        initial.push(
            space
                .specs
                .iter()
                .map(|s| s.lower + (s.upper - s.lower) * stream.next_unit())
                .collect(),
        );
    }
    submit(initial, 0.25, &mut evaluate, &mut archive, &mut mesh, &mut evals, &mut index);

    // poll rounds served per entry; spreading rounds evenly over the
    // archive refines the whole front instead of one region
    let mut polls: BTreeMap<u64, u64> = BTreeMap::new();
    while evals < budget {
        // poll center: least-polled live entry, lowest index on ties
        let live: Vec<(u64, f64)> = archive
            .entries()
            .iter()
            .filter_map(|e| mesh.get(&e.index).map(|m| (e.index, *m)))
            .collect();
        let Some(&(ci, cm)) = live
            .iter()
            .filter(|(_, m)| *m >= MESH_TOLERANCE)
            .min_by_key(|(i, _)| (polls.get(i).copied().unwrap_or(0), *i))
        else {
            break;
        };
        *polls.entry(ci).or_insert(0) += 1;
        let center: Vec<f64> = archive
            .entries()
            .iter()
            .find(|e| e.index == ci)
            .map(|e| e.params.clone())
            .unwrap();

        let mut round: Vec<Vec<f64>> = Vec::with_capacity(2 * dim);
        for j in 0..dim {
            for sign in [1.0, -1.0] {
                if evals + round.len() >= budget {
                    break;
                }
                let mut p = center.clone();
                p[j] = (p[j] + sign * cm * ranges[j])
                    .clamp(space.specs[j].lower, space.specs[j].upper);
                if p[j] != center[j] {
                    round.push(p);
                }
            }
        }
        let success =
            submit(round, cm, &mut evaluate, &mut archive, &mut mesh, &mut evals, &mut index);
        if success {
            // expanding on success reaches the extremes of the front faster
            mesh.insert(ci, (cm * 2.0).min(0.25));
        } else {
            mesh.insert(ci, cm * 0.5);
        }
    }

    // meshes of evicted entries are dead weight; drop them
    let live: Vec<u64> = archive.entries().iter().map(|e| e.index).collect();
    mesh.retain(|k, _| live.contains(k));
    Ok(archive)
}

/// Pareto search for one controller family on the given tuning
/// trajectories (worst case per objective).
pub fn pareto_search(
    space: &ParameterSpace,
    family: Family,
    trajectories: &[Trajectory],
    plant: &PlantConfig,
    budget: usize,
    seed: u64,
) -> Result<ParetoArchive, TuningError> {
    direct_multisearch(
        space,
        |p| match family.config(p) {
            Ok(config) => evaluate_candidate(&config, trajectories, plant)
                .unwrap_or_else(|_| ObjectiveVector::diverged()),
            Err(_) => ObjectiveVector::diverged(),
        },
        budget,
        seed,
    )
}

/// Entries within the work-zone limits (boundaries inclusive).
pub fn workzone_filter(archive: &ParetoArchive) -> ParetoArchive {
    ParetoArchive {
        entries: archive
            .entries
            .iter()
            .filter(|e| e.objectives.in_work_zone())
            .cloned()
            .collect(),
    }
}

/// Plant-parameter scatter for the robustness screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessDistributions {
    pub mass: Distribution,
    pub yaw_inertia: Distribution,
    pub friction: Distribution,
    pub stiffness_slip: Distribution,
}

impl Default for RobustnessDistributions {
    /// 10% relative scatter on mass and yaw inertia, 20% on the
    /// stiffness-slip factor, friction uniform from wet to dry asphalt.
    fn default() -> Self {
        Self {
            mass: Distribution::normal(1372.0, 137.2).unwrap(),
            yaw_inertia: Distribution::normal(1990.0, 199.0).unwrap(),
            friction: Distribution::uniform(0.5, 1.17).unwrap(),
            stiffness_slip: Distribution::normal(80_157.0, 16_031.0).unwrap(),
        }
    }
}

impl RobustnessDistributions {
    /// Zero-variance point masses at the nominal plant (all-nominal screen).
    pub fn degenerate() -> Self {
        let nominal = VehicleParams::default();
        Self {
            mass: Distribution::Fixed(nominal.mass),
            yaw_inertia: Distribution::Fixed(nominal.yaw_inertia),
            friction: Distribution::Fixed(1.0),
            stiffness_slip: Distribution::Fixed(A3_NOMINAL),
        }
    }

    /// One plant draw; nonpositive normal draws are rejected and resampled.
    pub fn sample_params(&self, stream: &mut SeedStream, base: &VehicleParams) -> VehicleParams {
        VehicleParams {
            mass: self.mass.sample_positive(stream),
            yaw_inertia: self.yaw_inertia.sample_positive(stream),
            friction: self.friction.sample_positive(stream),
            stiffness_slip_factor: self.stiffness_slip.sample_positive(stream),
            ..*base
        }
    }
}

/// One Monte Carlo draw: sample a plant from `(seed, draw)`, run the setup
/// with the nonlinear tire model, succeed when the run reaches the end of
/// the path with `|e_y|` at most `threshold`. Deterministic per
/// `(seed, draw)`, so a campaign may execute draws in any order.
pub fn monte_carlo_draw(
    config: &ControllerConfig,
    trajectory: &Trajectory,
    seed: u64,
    draw: u64,
    dists: &RobustnessDistributions,
    threshold: f64,
) -> bool {
    let mut stream = SeedStream::for_draw(seed, draw);
    let params = dists.sample_params(&mut stream, &VehicleParams::default());
    let plant = PlantConfig { params, tire: TireModel::MagicFormula };
    match run_closed_loop(trajectory, config, &plant, seed) {
        Ok(log) => !log.diverged && log.max_abs_e_y() <= threshold,
        Err(_) => false,
    }
}

/// Success rate (percent) of a setup over `n` random plant draws on the
/// given trajectory.
pub fn monte_carlo_robustness_threshold(
    config: &ControllerConfig,
    trajectory: &Trajectory,
    n: usize,
    seed: u64,
    dists: &RobustnessDistributions,
    threshold: f64,
) -> f64 {
    let successes = (0..n)
        .filter(|draw| monte_carlo_draw(config, trajectory, seed, *draw as u64, dists, threshold))
        .count();
    100.0 * successes as f64 / n as f64
}

/// Robustness screen at the standard 3 m lateral-error limit.
pub fn monte_carlo_robustness(
    config: &ControllerConfig,
    trajectory: &Trajectory,
    n: usize,
    seed: u64,
    dists: &RobustnessDistributions,
) -> f64 {
    monte_carlo_robustness_threshold(config, trajectory, n, seed, dists, DIVERGENCE_LIMIT)
}

/// The three selected setups, ordered by tracking accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Lowest-error pick.
    pub accurate: ArchiveEntry,
    /// Bisector pick between the other two.
    pub balanced: ArchiveEntry,
    /// Smoothest pick from the high-error end.
    pub smooth: ArchiveEntry,
}

fn normalized(o: &ObjectiveVector) -> [f64; 3] {
    [
        o.max_iae / WORKZONE_MAX_IAE,
        o.max_m_epsilon / WORKZONE_MAX_EPSILON,
        o.max_m_zeta / WORKZONE_MAX_ZETA,
    ]
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n <= 0.0 {
        [0.0; 3]
    } else {
        [v[0] / n, v[1] / n, v[2] / n]
    }
}

fn angle_to(v: &ObjectiveVector, bisector: [f64; 3]) -> f64 {
    let u = unit(normalized(v));
    let dot = u[0] * bisector[0] + u[1] * bisector[1] + u[2] * bisector[2];
    dot.clamp(-1.0, 1.0).acos()
}

/// Pick three setups from a robustness-annotated archive.
///
/// Gate: work zone plus success rate at least 90%. The accurate pick
/// minimizes M_epsilon among the k lowest-IAE survivors, the smooth pick
/// likewise among the k highest-IAE survivors (k = 5, shrunk to half the
/// survivor count when fewer than ten remain so the two ends stay
/// disjoint), and the balanced pick minimizes the angle to the bisector of
/// the two in work-zone-normalized objective space. Ties break toward the
/// lowest evaluation index.
pub fn select_setups(archive: &ParetoArchive) -> Result<Selection, TuningError> {
    let mut survivors: Vec<&ArchiveEntry> = archive
        .entries
        .iter()
        .filter(|e| {
            e.objectives.in_work_zone()
                && e.robustness_pct.map_or(false, |p| p >= ROBUSTNESS_GATE_PCT)
        })
        .collect();
    if survivors.len() < 2 {
        return Err(TuningError::TooFewPoints);
    }
    survivors.sort_by(|a, b| {
        a.objectives
            .max_iae
            .partial_cmp(&b.objectives.max_iae)
            .unwrap()
            .then(a.index.cmp(&b.index))
    });
    let k = (survivors.len() / 2).clamp(1, 5);

    let pick_min_epsilon = |slice: &[&ArchiveEntry]| -> ArchiveEntry {
        slice
            .iter()
            .min_by(|a, b| {
                a.objectives
                    .max_m_epsilon
                    .partial_cmp(&b.objectives.max_m_epsilon)
                    .unwrap()
                    .then(a.index.cmp(&b.index))
            })
            .map(|e| (*e).clone())
            .unwrap()
    };
    let accurate = pick_min_epsilon(&survivors[..k]);
    // the high-error window re-sorts descending but keeps ties at the
    // lowest index, so a fully tied archive yields one pick for both ends
    let mut descending = survivors.clone();
    descending.sort_by(|a, b| {
        b.objectives
            .max_iae
            .partial_cmp(&a.objectives.max_iae)
            .unwrap()
            .then(a.index.cmp(&b.index))
    });
    let smooth = pick_min_epsilon(&descending[..k]);

    let bisector = {
        let u1 = unit(normalized(&accurate.objectives));
        let u3 = unit(normalized(&smooth.objectives));
        unit([u1[0] + u3[0], u1[1] + u3[1], u1[2] + u3[2]])
    };
    let balanced = survivors
        .iter()
        .min_by(|a, b| {
            angle_to(&a.objectives, bisector)
                .partial_cmp(&angle_to(&b.objectives, bisector))
                .unwrap()
                .then(a.index.cmp(&b.index))
        })
        .map(|e| (*e).clone())
        .unwrap();

    Ok(Selection { accurate, balanced, smooth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{build_path, plan_speed_profile_with_boundary, DrivingLimits, Segment};
    use alloc::string::String;
    use alloc::vec;
    use proptest::prelude::*;

    fn entry(index: u64, iae: f64, eps: f64, zeta: f64) -> ArchiveEntry {
        entry_r(index, iae, eps, zeta, Some(100.0))
    }

    fn entry_r(index: u64, iae: f64, eps: f64, zeta: f64, r: Option<f64>) -> ArchiveEntry {
        ArchiveEntry {
            index,
            params: vec![index as f64],
            objectives: ObjectiveVector { max_iae: iae, max_m_epsilon: eps, max_m_zeta: zeta },
            robustness_pct: r,
        }
    }

    fn short_trajectory(length: f64, v: f64) -> Trajectory {
        let limits = DrivingLimits { v_max_kmh: v * 3.6, a_x_max: 1.5, a_x_min: 2.0, a_y_max: 4.0 };
        let path = build_path(&[Segment::straight(length)], 0.5).unwrap();
        let speed = plan_speed_profile_with_boundary(&path, &limits, v);
        Trajectory { path, speed, limits, purpose: String::from("test") }
    }

    #[test]
    fn space_validation() {
        let mut space = Family::Pid.space();
        assert!(space.validate().is_ok());
        space.specs[0].lower = space.specs[0].upper;
        assert_eq!(space.validate(), Err(TuningError::InvalidSpace("lower bound must be below upper")));
        assert_eq!(
            ParameterSpace { specs: vec![] }.validate(),
            Err(TuningError::InvalidSpace("no parameters"))
        );
        assert_eq!(
            ParameterSpec::new("x", 0.0, f64::INFINITY).validate(),
            Err(TuningError::InvalidSpace("bounds must be finite"))
        );
    }

    #[test]
    fn dominance_arithmetic() {
        let a = ObjectiveVector { max_iae: 0.1, max_m_epsilon: 0.1, max_m_zeta: 0.1 };
        let b = ObjectiveVector { max_iae: 0.2, max_m_epsilon: 0.1, max_m_zeta: 0.1 };
        let c = ObjectiveVector { max_iae: 0.05, max_m_epsilon: 0.3, max_m_zeta: 0.1 };
        assert!(a.dominates(&b));
        assert!(!b.dominates(&a));
        assert!(!a.dominates(&a)); // equal vectors do not dominate
        assert!(!a.dominates(&c));
        assert!(!c.dominates(&a));
    }

    #[test]
    fn archive_rejects_dominated_and_evicts() {
        let mut archive = ParetoArchive::new();
        assert!(archive.insert(entry(0, 0.2, 0.2, 0.2)));
        assert!(!archive.insert(entry(1, 0.3, 0.3, 0.3))); // dominated
        assert!(archive.insert(entry(2, 0.1, 0.3, 0.1))); // trade-off
        assert!(archive.insert(entry(3, 0.05, 0.05, 0.05))); // dominates both
        assert_eq!(archive.len(), 1);
        assert_eq!(archive.entries()[0].index, 3);
        // equal objectives coexist
        assert!(archive.insert(entry(4, 0.05, 0.05, 0.05)));
        assert_eq!(archive.len(), 2);
        // infinite sentinel never enters
        let mut bad = entry(5, 0.0, 0.0, 0.0);
        bad.objectives = ObjectiveVector::diverged();
        assert!(!archive.insert(bad));
    }

    proptest! {
        #[test]
        fn archive_never_holds_a_dominated_pair(
            objs in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 1..80)
        ) {
            let mut archive = ParetoArchive::new();
            for (i, (x, y, z)) in objs.into_iter().enumerate() {
                archive.insert(entry(i as u64, x, y, z));
            }
            let entries = archive.entries();
            for a in entries {
                for b in entries {
                    prop_assert!(!a.objectives.dominates(&b.objectives));
                }
            }
        }
    }

    /// Bi-objective two-sphere problem: f1 = |p-a|^2, f2 = |p-b|^2. The
    /// true front is the image of the segment [a, b].
    fn two_sphere(p: &[f64]) -> ObjectiveVector {
        let a = [0.0, 0.0];
        let b = [1.0, 1.0];
        let f1 = (p[0] - a[0]).powi(2) + (p[1] - a[1]).powi(2);
        let f2 = (p[0] - b[0]).powi(2) + (p[1] - b[1]).powi(2);
        ObjectiveVector { max_iae: f1, max_m_epsilon: f2, max_m_zeta: 0.0 }
    }

    fn two_sphere_space() -> ParameterSpace {
        ParameterSpace {
            specs: vec![ParameterSpec::new("x", -2.0, 3.0), ParameterSpec::new("y", -2.0, 3.0)],
        }
    }

    /// Largest objective-space gap from the analytic front to the archive,
    /// as a fraction of the front's extent.
    fn front_coverage_gap(archive: &ParetoArchive) -> f64 {
        let d2 = 2.0; // |b - a|^2
        let mut worst: f64 = 0.0;
        for k in 0..=200 {
            let t = k as f64 / 200.0;
            let (f1, f2) = (t * t * d2, (1.0 - t) * (1.0 - t) * d2);
            let nearest = archive
                .entries()
                .iter()
                .map(|e| {
                    let o = e.objectives;
                    ((o.max_iae - f1).powi(2) + (o.max_m_epsilon - f2).powi(2)).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
        }
        worst / d2
    }

    #[test]
    fn two_sphere_front_within_five_percent() {
        let archive = direct_multisearch(&two_sphere_space(), two_sphere, 500, 42).unwrap();
        let gap = front_coverage_gap(&archive);
        assert!(gap <= 0.05, "coverage gap {gap}");
        // archive points lie on (or numerically at) the true front:
        // sqrt(f1) + sqrt(f2) = |b - a|
        for e in archive.entries() {
            let s = e.objectives.max_iae.sqrt() + e.objectives.max_m_epsilon.sqrt();
            assert!(s <= 2.0f64.sqrt() + 0.02, "off-front point {s}");
        }
    }

    #[test]
    fn bigger_budget_never_worse() {
        let small = direct_multisearch(&two_sphere_space(), two_sphere, 50, 42).unwrap();
        let large = direct_multisearch(&two_sphere_space(), two_sphere, 500, 42).unwrap();
        assert!(front_coverage_gap(&large) <= front_coverage_gap(&small) + 1e-12);
    }

    #[test]
    fn search_is_deterministic_and_validates_inputs() {
        let a = direct_multisearch(&two_sphere_space(), two_sphere, 120, 7).unwrap();
        let b = direct_multisearch(&two_sphere_space(), two_sphere, 120, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            direct_multisearch(&two_sphere_space(), two_sphere, 49, 7),
            Err(TuningError::BudgetTooSmall)
        );
        assert_eq!(
            direct_multisearch(&ParameterSpace { specs: vec![] }, two_sphere, 100, 7),
            Err(TuningError::InvalidSpace("no parameters"))
        );
    }

    #[test]
    fn workzone_filter_boundary_and_idempotence() {
        let mut archive = ParetoArchive::new();
        archive.insert(entry(0, 0.36, 0.1, 0.1)); // IAE over
        archive.insert(entry(1, 0.3, 0.25, 0.7)); // on the boundary
        archive.insert(entry(2, 0.1, 0.26, 0.1)); // epsilon over
        let filtered = workzone_filter(&archive);
        assert_eq!(filtered.len(), 1);
        assert_eq!(filtered.entries()[0].index, 1);
        assert_eq!(workzone_filter(&filtered), filtered);
        assert!(workzone_filter(&ParetoArchive::new()).is_empty());
    }

    #[test]
    fn degenerate_draws_are_nominal() {
        let dists = RobustnessDistributions::degenerate();
        let mut stream = SeedStream::new(3);
        let base = VehicleParams::default();
        let p = dists.sample_params(&mut stream, &base);
        assert_eq!(p.mass, base.mass);
        assert_eq!(p.yaw_inertia, base.yaw_inertia);
        assert_eq!(p.friction, 1.0);
        assert_eq!(p.stiffness_slip_factor, base.stiffness_slip_factor);
    }

    #[test]
    fn random_draws_are_physical_and_in_range() {
        let dists = RobustnessDistributions::default();
        let base = VehicleParams::default();
        let mut stream = SeedStream::new(11);
        for _ in 0..500 {
            let p = dists.sample_params(&mut stream, &base);
            assert!(p.mass > 0.0 && p.yaw_inertia > 0.0 && p.stiffness_slip_factor > 0.0);
            assert!((0.5..1.17).contains(&p.friction));
            assert!(p.validate().is_ok());
        }
    }

    #[test]
    fn robustness_screen_deterministic_and_threshold_monotone() {
        let traj = short_trajectory(250.0, 12.0);
        let config = crate::controllers::setups::by_name("lqr-1").unwrap();
        let dists = RobustnessDistributions::default();
        let a = monte_carlo_robustness(&config, &traj, 8, 5, &dists);
        let b = monte_carlo_robustness(&config, &traj, 8, 5, &dists);
        assert_eq!(a, b);
        // success never drops when the error limit is relaxed
        let mut last = 0.0;
        for threshold in [0.5, 1.0, 3.0, 5.0] {
            let pct = monte_carlo_robustness_threshold(&config, &traj, 8, 5, &dists, threshold);
            assert!(pct >= last, "threshold {threshold}: {pct} < {last}");
            last = pct;
        }
    }

    #[test]
    fn degenerate_screen_scores_full_marks() {
        let traj = short_trajectory(250.0, 12.0);
        let config = crate::controllers::setups::by_name("lqr-1").unwrap();
        let pct = monte_carlo_robustness(&config, &traj, 4, 9, &RobustnessDistributions::degenerate());
        assert_eq!(pct, 100.0);
    }

    #[test]
    fn candidate_evaluation_deterministic_and_divergence_sentinel() {
        let traj = vec![short_trajectory(300.0, 15.0)];
        let plant = PlantConfig::default();
        let good = Family::Pid.config(&[0.16, 0.03, 8.0, 1.76]).unwrap();
        let a = evaluate_candidate(&good, &traj, &plant).unwrap();
        let b = evaluate_candidate(&good, &traj, &plant).unwrap();
        assert_eq!(a, b);
        assert!(a.is_finite());

        // destabilized gains blow up; every objective becomes the sentinel
        let bad = Family::Pid.config(&[1.0, 0.4, 40.0, 0.0]).unwrap();
        let v = evaluate_candidate(&bad, &traj, &plant).unwrap();
        if !v.is_finite() {
            assert_eq!(v, ObjectiveVector::diverged());
        }
    }

    #[test]
    fn family_roundtrip_and_bad_candidates() {
        for family in Family::ALL {
            assert_eq!(Family::from_name(family.name()), Some(family));
            let space = family.space();
            let mid: Vec<f64> =
                space.specs.iter().map(|s| 0.5 * (s.lower + s.upper)).collect();
            family.config(&mid).unwrap().validate().unwrap();
        }
        assert_eq!(Family::from_name("fuzzy"), None);
        assert_eq!(Family::Mfc.config(&[1.0]), Err(TuningError::InvalidCandidate));
    }

    #[test]
    fn selection_three_point_example() {
        let mut archive = ParetoArchive::new();
        archive.insert(entry(0, 0.1, 0.2, 0.1));
        archive.insert(entry(1, 0.2, 0.1, 0.2));
        archive.insert(entry(2, 0.3, 0.05, 0.3));
        let s = select_setups(&archive).unwrap();
        assert_eq!(s.accurate.index, 0);
        assert_eq!(s.balanced.index, 1);
        assert_eq!(s.smooth.index, 2);
        assert!(s.accurate.objectives.max_iae <= s.balanced.objectives.max_iae);
        assert!(s.balanced.objectives.max_iae <= s.smooth.objectives.max_iae);
    }

    #[test]
    fn selection_gates_and_ties() {
        // identical-objective cluster: all three picks coincide, lowest index
        let mut cluster = ParetoArchive::new();
        for i in 0..6 {
            cluster.insert(entry(i, 0.2, 0.1, 0.3));
        }
        let s = select_setups(&cluster).unwrap();
        assert_eq!((s.accurate.index, s.balanced.index, s.smooth.index), (0, 0, 0));

        // robustness gate removes low scorers before selection
        let mut gated = ParetoArchive::new();
        gated.insert(entry_r(0, 0.05, 0.2, 0.1, Some(89.9)));
        gated.insert(entry_r(1, 0.1, 0.15, 0.2, Some(95.0)));
        gated.insert(entry_r(2, 0.3, 0.05, 0.3, Some(90.0)));
        gated.insert(entry_r(3, 0.2, 0.1, 0.25, None));
        let s = select_setups(&gated).unwrap();
        assert_eq!(s.accurate.index, 1);
        assert_eq!(s.smooth.index, 2);

        // fewer than two qualifying points is an error
        let mut sparse = ParetoArchive::new();
        sparse.insert(entry_r(0, 0.1, 0.1, 0.1, Some(99.0)));
        assert_eq!(select_setups(&sparse), Err(TuningError::TooFewPoints));
    }

    #[test]
    fn selection_orders_by_error_on_spread_archives() {
        let mut archive = ParetoArchive::new();
        for i in 0..12u64 {
            let t = i as f64 / 11.0;
            // error rises along the front while the spectral scores fall
            archive.insert(entry(i, 0.05 + 0.25 * t, 0.24 - 0.2 * t, 0.65 - 0.5 * t));
        }
        let s = select_setups(&archive).unwrap();
        assert!(s.accurate.objectives.max_iae <= s.balanced.objectives.max_iae);
        assert!(s.balanced.objectives.max_iae <= s.smooth.objectives.max_iae);
    }
}

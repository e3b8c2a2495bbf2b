//! The epoch loop: clustering, rotation scheduling, UAV motion, DTN traffic
//! and metric collection for one scenario.

mod report;
mod sweep;

use ndarray::Array2;
use rand::Rng as _;
use thiserror::Error;

use crate::clustering::{random_initial_medoids, run_am, ClusterState};
use crate::config::{ConfigError, RotationMode, ScenarioConfig};
use crate::dtn::{DtnParams, DtnWorld};
use crate::ferrying::{qap_cost, solve_qap_ga, solve_tsp, GaParams, Permutation, RotationSchedule, WeightKind, WeightMatrix};
use crate::geometry::{move_toward, Point2};
use crate::mobility::{MobilityError, MobilityModel};
use crate::rng::{self, Stream};
use crate::transport::{coverage_fraction, CostKind};

pub use report::{EpochSample, RunReport};
pub use sweep::{bench, bench_csv, sweep, sweep_csv, BenchRow, SweepAxis, SweepPoint};

type Point = Point2<f64>;

/// A UAV counts as arrived when this close to its target medoid.
pub const ARRIVAL_TOLERANCE: f64 = 10.0;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
}

#[derive(Debug, Clone)]
enum Fleet {
    None,
    Ferry { schedule: Option<RotationSchedule>, weights: WeightMatrix },
    /// `angle` is set once the UAV has reached its orbit.
    Circular { radii: Vec<f64>, angle: Vec<Option<f64>> },
    RandomWaypoint { targets: Vec<Point>, rng: rng::Rng },
}

/// One scenario in progress. Drive it with [`Simulation::step_epoch`] and
/// collect the results with [`Simulation::finish`].
#[derive(Debug, Clone)]
pub struct Simulation {
    config: ScenarioConfig,
    mobility: MobilityModel,
    with_dtn: bool,
    epoch: u64,
    last_rotation: u64,
    rotations: u64,
    /// every UAV sat on its target at the end of the previous epoch
    arrived: bool,
    /// when the current dwell started
    settled_at: Option<u64>,
    users: Vec<Point>,
    uavs: Vec<Point>,
    odometry: Vec<f64>,
    clusters: Option<ClusterState<f64>>,
    fleet: Fleet,
    dtn: DtnWorld,
    dtn_rng: rng::Rng,
    ga_rng: rng::Rng,
    series: Vec<EpochSample>,
    node_positions: Vec<Point>,
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self, SimError> {
        Self::build(config, true)
    }

    /// Clustering, scheduling and motion only: no messages, no coverage.
    pub fn control_only(config: ScenarioConfig) -> Result<Self, SimError> {
        Self::build(config, false)
    }

    fn build(config: ScenarioConfig, with_dtn: bool) -> Result<Self, SimError> {
        config.validate()?;
        let mobility = MobilityModel::from_config(&config)?;
        let users = mobility.positions_at(0.0);
        let w = config.area_half_width;
        let mut placement = rng::stream(config.seed, Stream::Placement);

        let n = if config.rotation_mode == RotationMode::NoUav { 0 } else { config.n_uavs };
        let uavs: Vec<Point> = (0..n).map(|_| Point::new(placement.random_range(-w..=w), placement.random_range(-w..=w))).collect();

        let (fleet, clusters) = match config.rotation_mode {
            RotationMode::Tsp | RotationMode::BinaryJumping => {
                let kind = if config.rotation_mode == RotationMode::Tsp { WeightKind::Cycle } else { WeightKind::BinaryJump };
                let medoids = random_initial_medoids(&users, n, &mut placement);
                (Fleet::Ferry { schedule: None, weights: WeightMatrix::new(kind, n) }, Some(ClusterState::new(medoids)))
            }
            RotationMode::Circular => {
                let radii = (0..n).map(|i| w * (i + 1) as f64 / n as f64).collect();
                (Fleet::Circular { radii, angle: vec![None; n] }, None)
            }
            RotationMode::RwpHeuristic => {
                let mut rng = rng::stream(config.seed, Stream::Heuristics);
                let targets = (0..n).map(|_| uniform_point(w, &mut rng)).collect();
                (Fleet::RandomWaypoint { targets, rng }, None)
            }
            RotationMode::NoUav => (Fleet::None, None),
        };

        Ok(Self {
            dtn: DtnWorld::new(DtnParams::from_config(&config), config.n_users, n),
            dtn_rng: rng::stream(config.seed, Stream::Dtn),
            ga_rng: rng::stream(config.seed, Stream::Ga),
            odometry: vec![0.0; n],
            series: Vec::with_capacity(config.epochs() as usize),
            node_positions: Vec::with_capacity(config.n_users + n),
            config,
            mobility,
            with_dtn,
            epoch: 0,
            last_rotation: 0,
            rotations: 0,
            arrived: false,
            settled_at: None,
            users,
            uavs,
            clusters,
            fleet,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// Start time of the next epoch.
    pub fn time(&self) -> u64 {
        self.epoch * self.config.step
    }

    pub fn is_done(&self) -> bool {
        self.epoch >= self.config.epochs()
    }

    /// Number of rotations performed so far.
    pub fn rotations(&self) -> u64 {
        self.rotations
    }

    pub fn users(&self) -> &[Point] {
        &self.users
    }

    pub fn uavs(&self) -> &[Point] {
        &self.uavs
    }

    pub fn odometry(&self) -> &[f64] {
        &self.odometry
    }

    pub fn clusters(&self) -> Option<&ClusterState<f64>> {
        self.clusters.as_ref()
    }

    pub fn schedule(&self) -> Option<&RotationSchedule> {
        match &self.fleet {
            Fleet::Ferry { schedule, .. } => schedule.as_ref(),
            _ => None,
        }
    }

    pub fn dtn(&self) -> &DtnWorld {
        &self.dtn
    }

    pub fn series(&self) -> &[EpochSample] {
        &self.series
    }

    /// Current target of every UAV in the ferrying modes.
    pub fn uav_targets(&self) -> Option<Vec<Point>> {
        let (schedule, clusters) = (self.schedule()?, self.clusters.as_ref()?);
        Some(schedule.targets().into_iter().map(|c| clusters.medoids[c]).collect())
    }

    /// Advance by one control interval.
    pub fn step_epoch(&mut self) {
        let t = self.time();
        let step = self.config.step;
        self.mobility.positions_into(t as f64, &mut self.users);
        self.control(t);

        for tau in t..t + step {
            if self.with_dtn {
                if tau != t {
                    self.mobility.positions_into(tau as f64, &mut self.users);
                }
                self.dtn_tick(tau);
            }
            self.move_uavs();
        }
        self.arrived = self
            .uav_targets()
            .is_some_and(|targets| targets.iter().zip(&self.uavs).all(|(t, p)| t.distance(p) <= ARRIVAL_TOLERANCE));

        let end = t + step;
        let coverage = if self.with_dtn && !self.uavs.is_empty() {
            self.mobility.positions_into(end as f64, &mut self.users);
            Some(coverage_fraction(&self.users, &self.uavs, self.config.uav_capacity, self.config.cell_range))
        } else {
            None
        };
        self.series.push(EpochSample {
            t: end,
            coverage,
            delivered: self.dtn.delivered(),
            created: self.dtn.created(),
            distance_total: self.odometry.iter().sum(),
        });
        self.epoch += 1;
    }

    pub fn run_to_end(&mut self) {
        while !self.is_done() {
            self.step_epoch();
        }
    }

    pub fn finish(self) -> RunReport {
        RunReport::collect(&self.config, self.dtn.messages().to_vec(), self.series, !self.uavs.is_empty())
    }

    fn control(&mut self, t: u64) {
        let Fleet::Ferry { schedule, weights } = &mut self.fleet else {
            return;
        };
        let clusters = self.clusters.as_mut().expect("ferry modes cluster");
        let kind = CostKind::LeakyQoS(self.config.cell_range);
        *clusters = run_am(&self.users, &clusters.medoids, self.config.uav_capacity, kind, self.config.am_iterations);
        let dist = medoid_distances(&clusters.medoids);

        let ga = GaParams {
            iterations: self.config.ga_iterations,
            population: self.config.ga_population,
            crossover_prob: self.config.ga_crossover_prob,
            mutation_prob: self.config.ga_mutation_prob,
        };
        let solve = |rng: &mut rng::Rng| match weights.kind() {
            WeightKind::Cycle => solve_tsp(&dist),
            WeightKind::BinaryJump => solve_qap_ga(&dist, weights, &ga, rng).expect("matching dimensions"),
        };

        let Some(sched) = schedule else {
            let pi = solve(&mut self.ga_rng);
            let pi = align(&pi, 0, &self.uavs, &clusters.medoids);
            *schedule = Some(RotationSchedule::new(weights.kind(), pi));
            return;
        };

        // The interval is dwell time: it starts once every UAV has reached
        // its cluster, or after one crossing of the area at the latest.
        if self.settled_at.is_none() {
            let crossing = (self.config.area_diameter() / self.config.uav_speed).ceil() as u64;
            if self.arrived || t >= self.last_rotation + crossing {
                self.settled_at = Some(t);
            }
        }
        let rotate_now = self.settled_at.is_some_and(|s| t >= s + self.config.rotation_interval);
        if rotate_now {
            if sched.resolve_requested() {
                let candidate = solve(&mut self.ga_rng);
                let current = sched.permutation().clone();
                let better = qap_cost(&dist, weights, &candidate).expect("dims") < qap_cost(&dist, weights, &current).expect("dims");
                let pi = if better { align(&candidate, sched.alpha(), &self.uavs, &clusters.medoids) } else { current };
                sched.set_permutation(pi);
            }
            sched.advance();
            self.last_rotation = t;
            self.settled_at = None;
            self.rotations += 1;
        }
    }

    fn move_uavs(&mut self) {
        let v = self.config.uav_speed;
        match &mut self.fleet {
            Fleet::None => {}
            Fleet::Ferry { schedule, .. } => {
                let (Some(sched), Some(clusters)) = (schedule.as_ref(), self.clusters.as_ref()) else {
                    return;
                };
                for (i, p) in self.uavs.iter_mut().enumerate() {
                    let next = move_toward(*p, clusters.medoids[sched.target(i)], v, 1.0);
                    self.odometry[i] += p.distance(&next);
                    *p = next;
                }
            }
            Fleet::Circular { radii, angle } => {
                for (i, p) in self.uavs.iter_mut().enumerate() {
                    let r = radii[i];
                    match angle[i] {
                        Some(a) => {
                            let a = a + v / r;
                            angle[i] = Some(a);
                            *p = Point::new(r * a.cos(), r * a.sin());
                            self.odometry[i] += v;
                        }
                        None => {
                            let norm = p.distance(&Point::origin());
                            let entry = if norm > 0.0 { Point::new(p.x * r / norm, p.y * r / norm) } else { Point::new(r, 0.0) };
                            let next = move_toward(*p, entry, v, 1.0);
                            self.odometry[i] += p.distance(&next);
                            *p = next;
                            if next == entry {
                                angle[i] = Some(entry.y.atan2(entry.x));
                            }
                        }
                    }
                }
            }
            Fleet::RandomWaypoint { targets, rng } => {
                let w = self.config.area_half_width;
                for (i, p) in self.uavs.iter_mut().enumerate() {
                    let next = move_toward(*p, targets[i], v, 1.0);
                    self.odometry[i] += p.distance(&next);
                    *p = next;
                    if next == targets[i] {
                        targets[i] = uniform_point(w, rng);
                    }
                }
            }
        }
    }

    fn dtn_tick(&mut self, tau: u64) {
        if tau % self.config.dtn_msg_interval == 0 {
            self.dtn.spawn_message(tau, &mut self.dtn_rng);
        }
        self.node_positions.clear();
        self.node_positions.extend_from_slice(&self.users);
        self.node_positions.extend_from_slice(&self.uavs);
        self.dtn.step(&self.node_positions, tau, 1);

        if self.config.idealized_clusters {
            if let Some(clusters) = &self.clusters {
                let m = self.config.n_users;
                let r = self.config.dtn_range;
                let groups: Vec<Vec<usize>> = clusters
                    .assignments
                    .iter()
                    .zip(&clusters.medoids)
                    .map(|(members, medoid)| {
                        let mut g = members.clone();
                        g.extend(self.uavs.iter().enumerate().filter(|(_, u)| u.distance(medoid) <= r).map(|(j, _)| m + j));
                        g
                    })
                    .collect();
                self.dtn.idealized_cluster_sync(&groups, tau + 1);
            }
        }
    }
}

/// Run a scenario from start to finish.
pub fn run(config: &ScenarioConfig) -> Result<RunReport, SimError> {
    let started = std::time::Instant::now();
    let mut sim = Simulation::new(config.clone())?;
    sim.run_to_end();
    let mut report = sim.finish();
    report.wall_clock = started.elapsed().as_secs_f64();
    Ok(report)
}

/// [`run`] for the circular and random-waypoint reference fleets.
pub fn run_baseline(config: &ScenarioConfig) -> Result<RunReport, SimError> {
    if !matches!(config.rotation_mode, RotationMode::Circular | RotationMode::RwpHeuristic) {
        return Err(ConfigError::Invalid { field: "rotation_mode", reason: "not a baseline mode".into() }.into());
    }
    run(config)
}

pub fn medoid_distances(medoids: &[Point]) -> Array2<f64> {
    let n = medoids.len();
    Array2::from_shape_fn((n, n), |(i, j)| medoids[i].distance(&medoids[j]))
}

fn uniform_point(w: f64, rng: &mut rng::Rng) -> Point {
    Point::new(rng.random_range(-w..=w), rng.random_range(-w..=w))
}

/// Among the rotations and reflections of `pi`, all of which have the same
/// rotation cost, pick the one that leaves the UAVs the least total flying
/// to their targets under the current `alpha`.
fn align(pi: &Permutation, alpha: usize, uavs: &[Point], medoids: &[Point]) -> Permutation {
    let n = pi.len();
    let p = pi.as_slice();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for reflect in [false, true] {
        for shift in 0..n {
            let cand: Vec<usize> =
                (0..n).map(|k| if reflect { p[(n - k + shift) % n] } else { p[(k + shift) % n] }).collect();
            let travel: f64 = uavs.iter().enumerate().map(|(i, u)| u.distance(&medoids[cand[(i + alpha) % n]])).sum();
            if best.as_ref().is_none_or(|(b, _)| travel < *b) {
                best = Some((travel, cand));
            }
        }
    }
    Permutation::new(best.expect("n > 0").1).expect("rotations of a permutation")
}

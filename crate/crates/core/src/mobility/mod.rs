//! Ground-user mobility: random waypoint, rotating Gaussian clusters, and
//! externally generated waypoint traces.

mod trace;

use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::config::{GaussianParams, MobilitySource, RwpParams, ScenarioConfig};
use crate::geometry::{distance, Point2};
use crate::rng::{self, Stream};

pub use trace::{format_trace, TraceFile};

type Point = Point2<f64>;

#[derive(Debug, Error)]
pub enum MobilityError {
    #[error("cannot read trace: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("trace line {line}: time {t} does not increase")]
    NonMonotone { line: usize, t: f64 },
    #[error("trace has {found} nodes, scenario expects {expected}")]
    NodeCount { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t: f64,
    pub p: Point,
}

/// Piecewise-linear path through waypoints with strictly increasing times.
/// Held at the first waypoint before it and at the last one after it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    waypoints: Vec<Waypoint>,
}

impl Trajectory {
    /// # Panics
    /// On an empty waypoint list.
    pub fn new(waypoints: Vec<Waypoint>) -> Self {
        assert!(!waypoints.is_empty(), "trajectory needs a waypoint");
        Self { waypoints }
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn position_at(&self, t: f64) -> Point {
        let w = &self.waypoints;
        let k = w.partition_point(|wp| wp.t <= t);
        if k == 0 {
            return w[0].p;
        }
        if k == w.len() {
            return w[k - 1].p;
        }
        let (a, b) = (w[k - 1], w[k]);
        if t == a.t {
            return a.p;
        }
        a.p.lerp(b.p, (t - a.t) / (b.t - a.t))
    }
}

fn uniform_point<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> Point {
    Point::new(rng.random_range(-half_width..=half_width), rng.random_range(-half_width..=half_width))
}

/// Random-waypoint path covering `[0, horizon]`: start at a uniform point,
/// then alternate a uniform pause and a straight leg to a uniform waypoint
/// at a uniform speed.
fn rwp_trajectory<R: Rng + ?Sized>(params: &RwpParams, half_width: f64, horizon: f64, rng: &mut R) -> Trajectory {
    let mut p = uniform_point(rng, half_width);
    let mut t = 0.0;
    let mut wps = vec![Waypoint { t, p }];
    while t < horizon {
        let pause = if params.max_pause > 0.0 { rng.random_range(0.0..=params.max_pause) } else { 0.0 };
        if pause > 0.0 {
            t += pause;
            wps.push(Waypoint { t, p });
        }
        let q = uniform_point(rng, half_width);
        let speed = if params.v_max > params.v_min { rng.random_range(params.v_min..=params.v_max) } else { params.v_min };
        let leg = distance(p, q) / speed;
        if leg > 0.0 {
            t += leg;
            wps.push(Waypoint { t, p: q });
        }
        p = q;
    }
    Trajectory::new(wps)
}

/// A source of user positions over time.
#[derive(Debug, Clone, PartialEq)]
pub enum MobilityModel {
    Rwp { params: RwpParams, nodes: Vec<Trajectory> },
    GaussianClusters { params: GaussianParams, offsets: Vec<Point>, half_width: f64 },
    Trace { nodes: Vec<Trajectory> },
}

impl MobilityModel {
    pub fn rwp<R: Rng + ?Sized>(params: RwpParams, n_users: usize, half_width: f64, horizon: f64, rng: &mut R) -> Self {
        let nodes = (0..n_users).map(|_| rwp_trajectory(&params, half_width, horizon, rng)).collect();
        MobilityModel::Rwp { params, nodes }
    }

    /// User `n` belongs to cluster `n mod n_clusters`; its offset from the
    /// rotating cluster center is drawn once.
    pub fn gaussian_clusters<R: Rng + ?Sized>(params: GaussianParams, n_users: usize, half_width: f64, rng: &mut R) -> Self {
        let offsets = if params.sigma > 0.0 {
            let normal = Normal::new(0.0, params.sigma).expect("sigma is finite and positive");
            (0..n_users).map(|_| Point::new(normal.sample(rng), normal.sample(rng))).collect()
        } else {
            vec![Point::origin(); n_users]
        };
        MobilityModel::GaussianClusters { params, offsets, half_width }
    }

    pub fn from_trace(trace: TraceFile, n_users: usize, shift: Point) -> Result<Self, MobilityError> {
        Ok(MobilityModel::Trace { nodes: trace.into_trajectories(n_users, shift)? })
    }

    pub fn from_trace_path(path: &Path, n_users: usize, shift: Point) -> Result<Self, MobilityError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_trace(TraceFile::parse(&text)?, n_users, shift)
    }

    /// Build the model a scenario asks for, drawing from its mobility stream.
    /// Trace files are shifted by `-area_half_width` on both axes.
    pub fn from_config(config: &ScenarioConfig) -> Result<Self, MobilityError> {
        let mut rng = rng::stream(config.seed, Stream::Mobility);
        let w = config.area_half_width;
        Ok(match &config.mobility_source {
            MobilitySource::Rwp(p) => Self::rwp(p.clone(), config.n_users, w, config.total_time as f64, &mut rng),
            MobilitySource::GaussianClusters(p) => Self::gaussian_clusters(p.clone(), config.n_users, w, &mut rng),
            MobilitySource::TraceFile(path) => Self::from_trace_path(path, config.n_users, Point::new(-w, -w))?,
        })
    }

    pub fn n_users(&self) -> usize {
        match self {
            MobilityModel::Rwp { nodes, .. } | MobilityModel::Trace { nodes } => nodes.len(),
            MobilityModel::GaussianClusters { offsets, .. } => offsets.len(),
        }
    }

    /// Upper bound on any user's speed, when the model has one.
    pub fn max_speed(&self) -> Option<f64> {
        match self {
            MobilityModel::Rwp { params, .. } => Some(params.v_max),
            MobilityModel::GaussianClusters { params, .. } => Some(params.angular_speed.abs() * params.center_radius),
            MobilityModel::Trace { .. } => None,
        }
    }

    pub fn cluster_center(params: &GaussianParams, cluster: usize, t: f64) -> Point {
        let phase = TAU * cluster as f64 / params.n_clusters as f64 + params.angular_speed * t;
        Point::new(params.center_radius * phase.cos(), params.center_radius * phase.sin())
    }

    pub fn positions_into(&self, t: f64, out: &mut Vec<Point>) {
        out.clear();
        match self {
            MobilityModel::Rwp { nodes, .. } | MobilityModel::Trace { nodes } => {
                out.extend(nodes.iter().map(|n| n.position_at(t)));
            }
            MobilityModel::GaussianClusters { params, offsets, half_width } => {
                out.extend(offsets.iter().enumerate().map(|(n, off)| {
                    let c = Self::cluster_center(params, n % params.n_clusters, t);
                    Point::new(c.x + off.x, c.y + off.y).clamp_square(*half_width)
                }));
            }
        }
    }

    pub fn positions_at(&self, t: f64) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.n_users());
        self.positions_into(t, &mut out);
        out
    }

    /// Sample every user at `0, resolution, 2 resolution, ...` up to
    /// `horizon` and render the result as a trace file.
    pub fn export_trace(&self, horizon: u64, resolution: u64) -> String {
        let times: Vec<u64> = (0..=horizon).step_by(resolution.max(1) as usize).collect();
        let samples: Vec<Vec<Point>> = times.iter().map(|&t| self.positions_at(t as f64)).collect();
        let nodes: Vec<Vec<Waypoint>> = (0..self.n_users())
            .map(|u| times.iter().zip(&samples).map(|(&t, s)| Waypoint { t: t as f64, p: s[u] }).collect())
            .collect();
        format_trace(&nodes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rwp_model(seed: u64) -> MobilityModel {
        let mut r = rng::stream(seed, Stream::Mobility);
        MobilityModel::rwp(RwpParams::default(), 20, 4000.0, 43_200.0, &mut r)
    }

    fn inside(p: &Point, w: f64) -> bool {
        p.x.abs() <= w && p.y.abs() <= w
    }

    #[test]
    fn rwp_starts_inside_and_is_seeded() {
        let a = rwp_model(3);
        let b = rwp_model(3);
        assert_eq!(a, b);
        assert_ne!(a, rwp_model(4));
        let p0 = a.positions_at(0.0);
        assert!(p0.iter().all(|p| inside(p, 4000.0)));
        if let MobilityModel::Rwp { nodes, .. } = &a {
            for (n, p) in nodes.iter().zip(&p0) {
                assert_eq!(n.waypoints()[0].p, *p);
                assert!(n.waypoints().last().unwrap().t >= 43_200.0);
            }
        }
    }

    #[test]
    fn degenerate_gaussian_clusters_sit_on_centers() {
        let params = GaussianParams { n_clusters: 4, sigma: 0.0, angular_speed: 0.0, center_radius: 1000.0 };
        let mut r = rng::stream(1, Stream::Mobility);
        let m = MobilityModel::gaussian_clusters(params.clone(), 12, 4000.0, &mut r);
        for t in [0.0, 100.0, 5000.0] {
            let pos = m.positions_at(t);
            for (n, p) in pos.iter().enumerate() {
                assert_eq!(*p, MobilityModel::cluster_center(&params, n % 4, 0.0));
            }
        }
    }

    #[test]
    fn rotating_clusters_stay_clamped() {
        let params = GaussianParams { n_clusters: 3, sigma: 2000.0, angular_speed: 0.01, center_radius: 3500.0 };
        let mut r = rng::stream(2, Stream::Mobility);
        let m = MobilityModel::gaussian_clusters(params, 60, 4000.0, &mut r);
        for t in (0..1000).step_by(37) {
            assert!(m.positions_at(t as f64).iter().all(|p| inside(p, 4000.0)));
        }
    }

    #[test]
    fn export_round_trip_on_grid() {
        let m = rwp_model(9);
        let text = m.export_trace(600, 1);
        let back = MobilityModel::from_trace(TraceFile::parse(&text).unwrap(), 20, Point::origin()).unwrap();
        for t in 0..=600 {
            assert_eq!(back.positions_at(t as f64), m.positions_at(t as f64), "t = {t}");
        }
    }

    proptest! {
        #[test]
        fn speed_bound(seed in 0u64..50, t in 0.0..43_000.0f64, dt in 0.0..100.0f64) {
            let m = rwp_model(seed);
            let a = m.positions_at(t);
            let b = m.positions_at(t + dt);
            let vmax = m.max_speed().unwrap();
            for (p, q) in a.iter().zip(&b) {
                prop_assert!(p.distance(q) <= vmax * dt + 1e-6);
            }
        }

        #[test]
        fn gaussian_speed_bound(seed in 0u64..50, t in 0.0..5000.0f64, dt in 0.0..60.0f64) {
            let params = GaussianParams { n_clusters: 8, sigma: 300.0, angular_speed: 0.002, center_radius: 2500.0 };
            let mut r = rng::stream(seed, Stream::Mobility);
            let m = MobilityModel::gaussian_clusters(params, 16, 4000.0, &mut r);
            let vmax = m.max_speed().unwrap();
            for (p, q) in m.positions_at(t).iter().zip(&m.positions_at(t + dt)) {
                prop_assert!(p.distance(q) <= vmax * dt + 1e-6);
            }
        }
    }
}

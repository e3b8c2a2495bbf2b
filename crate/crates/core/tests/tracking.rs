//! Warm-started clustering follows rotating Gaussian user clusters.

use std::f64::consts::TAU;

use skyferry::config::GaussianParams;
use skyferry::mobility::MobilityModel;
use skyferry::sim::Simulation;
use skyferry::{MobilitySource, Point, RotationMode, ScenarioConfig};

fn rotating() -> (ScenarioConfig, GaussianParams) {
    let params = GaussianParams { n_clusters: 8, sigma: 150.0, angular_speed: TAU / 3600.0, center_radius: 2500.0 };
    let cfg = ScenarioConfig {
        n_users: 96,
        n_uavs: 8,
        uav_capacity: 13,
        total_time: 3600,
        rotation_interval: 3600,
        rotation_mode: RotationMode::Tsp,
        mobility_source: MobilitySource::GaussianClusters(params.clone()),
        seed: 5,
        ..ScenarioConfig::default()
    };
    (cfg, params)
}

fn nearest_center(p: Point, params: &GaussianParams, t: f64) -> (usize, f64) {
    (0..params.n_clusters)
        .map(|k| (k, p.distance(&MobilityModel::cluster_center(params, k, t))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

#[test]
fn medoids_settle_into_distinct_rotating_clusters() {
    let (cfg, params) = rotating();
    let mut sim = Simulation::new(cfg).unwrap();
    let mut checked = 0;
    while !sim.is_done() {
        let t = sim.time() as f64;
        sim.step_epoch();
        if t < 600.0 {
            continue;
        }
        let medoids = &sim.clusters().unwrap().medoids;
        let mut seen = [false; 8];
        for m in medoids {
            let (k, d) = nearest_center(*m, &params, t);
            assert!(d < params.sigma, "t={t}: medoid {d:.0} m from its cluster center");
            assert!(!seen[k], "t={t}: two medoids in cluster {k}");
            seen[k] = true;
        }
        checked += 1;
    }
    assert_eq!(checked, 300);
}

#[test]
fn uavs_follow_their_clusters() {
    let (cfg, params) = rotating();
    let mut sim = Simulation::new(cfg).unwrap();
    while !sim.is_done() {
        sim.step_epoch();
    }
    // no rotation within the hour: each UAV hovers over one moving cluster
    let t = sim.time() as f64;
    let mut seen = [false; 8];
    for u in sim.uavs() {
        let (k, d) = nearest_center(*u, &params, t);
        assert!(d < 2.0 * params.sigma, "UAV {d:.0} m away from cluster {k}");
        assert!(!seen[k]);
        seen[k] = true;
    }
    let tail = &sim.series()[sim.series().len() - 60..];
    assert!(tail.iter().all(|s| s.coverage == Some(1.0)));
}

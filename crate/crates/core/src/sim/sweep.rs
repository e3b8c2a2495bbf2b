use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{run, RunReport, SimError, Simulation};
use crate::config::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// UAV count; per-UAV capacity stays fixed.
    NUavs,
    /// seconds
    RotationInterval,
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n_uavs" => Ok(SweepAxis::NUavs),
            "rotation_interval" => Ok(SweepAxis::RotationInterval),
            other => Err(format!("unknown sweep axis `{other}` (expected n_uavs or rotation_interval)")),
        }
    }
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::NUavs => "n_uavs",
            SweepAxis::RotationInterval => "rotation_interval",
        }
    }

    /// `base` with the axis set to `value` and the seed offset by `index`.
    pub fn apply(self, base: &ScenarioConfig, value: u64, index: usize) -> Result<ScenarioConfig, SimError> {
        let mut c = base.clone();
        match self {
            SweepAxis::NUavs => c.n_uavs = value as usize,
            SweepAxis::RotationInterval => c.rotation_interval = value,
        }
        c.seed = base.seed.wrapping_add(index as u64);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: u64,
    pub report: RunReport,
}

/// One run per value, concurrently, returned in input order.
pub fn sweep(base: &ScenarioConfig, axis: SweepAxis, values: &[u64]) -> Result<Vec<SweepPoint>, SimError> {
    let configs: Vec<ScenarioConfig> =
        values.iter().enumerate().map(|(i, &v)| axis.apply(base, v, i)).collect::<Result<_, _>>()?;
    configs
        .par_iter()
        .zip(values.par_iter())
        .map(|(c, &value)| run(c).map(|report| SweepPoint { value, report }))
        .collect()
}

pub fn sweep_csv(axis: SweepAxis, points: &[SweepPoint]) -> String {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut out = format!("{},seed,ttd_mean,ttd_ci95,p_deliver,coverage_mean,distance_total\n", axis.name());
    for p in points {
        let r = &p.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.value,
            r.seed,
            opt(r.ttd_mean),
            opt(r.ttd_ci95),
            r.p_deliver,
            opt(r.coverage_mean),
            opt(r.distance_total)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n_users: usize,
    pub n_uavs: usize,
    pub uav_capacity: usize,
    pub epochs: u64,
    pub seconds: f64,
}

impl BenchRow {
    pub fn per_epoch(&self) -> f64 {
        self.seconds / self.epochs as f64
    }
}

/// Time `epochs` control intervals for every `(M, N)` pair, one after the
/// other. Capacity is scaled to keep the base capacity ratio.
pub fn bench(base: &ScenarioConfig, users: &[usize], uavs: &[usize], epochs: u64) -> Result<Vec<BenchRow>, SimError> {
    let ratio = base.capacity_ratio();
    let mut rows = Vec::new();
    for &m in users {
        for &n in uavs {
            let mut c = base.clone();
            c.n_users = m;
            c.n_uavs = n;
            c.uav_capacity = ((ratio * m as f64 / n as f64) - 1e-9).ceil().max(1.0) as usize;
            c.total_time = epochs * c.step;
            let mut sim = Simulation::control_only(c.clone())?;
            let started = Instant::now();
            sim.run_to_end();
            rows.push(BenchRow { n_users: m, n_uavs: n, uav_capacity: c.uav_capacity, epochs, seconds: started.elapsed().as_secs_f64() });
        }
    }
    Ok(rows)
}

pub fn bench_csv(mode: &str, rows: &[BenchRow]) -> String {
    let mut out = String::from("mode,n_users,n_uavs,uav_capacity,epochs,seconds,seconds_per_epoch\n");
    for r in rows {
        let _ = writeln!(out, "{mode},{},{},{},{},{},{}", r.n_users, r.n_uavs, r.uav_capacity, r.epochs, r.seconds, r.per_epoch());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RotationMode;

    fn base() -> ScenarioConfig {
        ScenarioConfig { n_users: 24, n_uavs: 4, uav_capacity: 8, total_time: 300, ga_population: 10, ga_iterations: 5, seed: 11, ..Default::default() }
    }

    #[test]
    fn single_value_matches_run() {
        let pts = sweep(&base(), SweepAxis::RotationInterval, &[120]).unwrap();
        let direct = run(&ScenarioConfig { rotation_interval: 120, ..base() }).unwrap();
        assert_eq!(pts[0].report.to_json(), direct.to_json());
    }

    #[test]
    fn seeds_are_offset_and_order_kept() {
        let pts = sweep(&base(), SweepAxis::NUavs, &[2, 3, 4]).unwrap();
        assert_eq!(pts.iter().map(|p| (p.value, p.report.seed, p.report.n_uavs)).collect::<Vec<_>>(), vec![(2, 11, 2), (3, 12, 3), (4, 13, 4)]);
        assert!(sweep_csv(SweepAxis::NUavs, &pts).starts_with("n_uavs,seed,"));
    }

    #[test]
    fn invalid_sweep_value_is_reported() {
        assert!(sweep(&base(), SweepAxis::RotationInterval, &[15]).is_err());
        assert!("speed".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn bench_keeps_capacity_ratio() {
        let rows = bench(&ScenarioConfig { rotation_mode: RotationMode::BinaryJumping, ..base() }, &[30], &[4], 3).unwrap();
        // ratio 32/24 applied to 30 users over 4 UAVs
        assert_eq!(rows[0].uav_capacity, 10);
        assert_eq!(rows[0].epochs, 3);
    }
}

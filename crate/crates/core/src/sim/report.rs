use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::{RotationMode, ScenarioConfig};
use crate::dtn::Message;

/// State at the end of one control interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochSample {
    pub t: u64,
    pub coverage: Option<f64>,
    pub delivered: usize,
    pub created: usize,
    pub distance_total: f64,
}

/// Aggregate metrics of one run.
///
/// The per-epoch series and the message ledger are carried along but written
/// as separate CSV files, and wall-clock time is left out of the JSON so
/// that reports are reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub rotation_mode: RotationMode,
    pub seed: u64,
    pub n_users: usize,
    pub n_uavs: usize,
    pub rotation_interval: u64,
    pub total_time: u64,
    pub created: usize,
    pub delivered: usize,
    /// seconds, over delivered messages
    pub ttd_mean: Option<f64>,
    /// half-width of the normal 95 % interval of the mean
    pub ttd_ci95: Option<f64>,
    pub ttd_max: Option<u64>,
    pub p_deliver: f64,
    pub coverage_mean: Option<f64>,
    /// meters, summed over UAVs
    pub distance_total: Option<f64>,
    #[serde(skip)]
    pub series: Vec<EpochSample>,
    #[serde(skip)]
    pub messages: Vec<Message>,
    #[serde(skip)]
    pub wall_clock: f64,
}

impl RunReport {
    pub(crate) fn collect(config: &ScenarioConfig, messages: Vec<Message>, series: Vec<EpochSample>, has_uavs: bool) -> Self {
        let ttds: Vec<f64> = messages.iter().filter_map(|m| m.ttd()).map(|x| x as f64).collect();
        let n = ttds.len();
        let ttd_mean = (n > 0).then(|| ttds.iter().sum::<f64>() / n as f64);
        let ttd_ci95 = ttd_mean.map(|mean| {
            if n < 2 {
                0.0
            } else {
                let var = ttds.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                1.96 * var.sqrt() / (n as f64).sqrt()
            }
        });
        let coverage: Vec<f64> = series.iter().filter_map(|s| s.coverage).collect();
        let coverage_mean = (!coverage.is_empty()).then(|| coverage.iter().sum::<f64>() / coverage.len() as f64);
        let distance_total = if has_uavs { Some(series.last().map_or(0.0, |s| s.distance_total)) } else { None };
        let created = messages.len();
        Self {
            rotation_mode: config.rotation_mode,
            seed: config.seed,
            n_users: config.n_users,
            n_uavs: if has_uavs { config.n_uavs } else { 0 },
            rotation_interval: config.rotation_interval,
            total_time: config.total_time,
            created,
            delivered: n,
            ttd_mean,
            ttd_ci95,
            ttd_max: messages.iter().filter_map(|m| m.ttd()).max(),
            p_deliver: if created == 0 { 0.0 } else { n as f64 / created as f64 },
            coverage_mean,
            distance_total,
            series,
            messages,
            wall_clock: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn series_csv(&self) -> String {
        let mut out = String::from("t,coverage,delivered,created,distance_total\n");
        for s in &self.series {
            let cov = s.coverage.map(|c| c.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", s.t, cov, s.delivered, s.created, s.distance_total);
        }
        out
    }

    pub fn messages_csv(&self) -> String {
        let mut out = String::from("id,created_at,delivered_at,source,destination\n");
        for m in &self.messages {
            let d = m.delivered_at.map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", m.id, m.created_at, d, m.source, m.destination);
        }
        out
    }
}

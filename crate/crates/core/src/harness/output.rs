//! CSV and metadata writers.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::sweep::{Metric, SweepResult};
use crate::analysis::bd_rate;
use crate::error::{Error, Result};

#[derive(Serialize)]
struct BerRecord<'a> {
    x_value: f64,
    x_unit: &'a str,
    ber_empirical: f64,
    ber_analytic: Option<f64>,
    trials: usize,
    ci_halfwidth: f64,
    detector: &'a str,
    combiner: &'a str,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "M")]
    m: usize,
    seed: u64,
}

#[derive(Serialize)]
struct MseRecord<'a> {
    x_value: f64,
    x_unit: &'a str,
    mse: f64,
    ber_analytic: Option<f64>,
    trials: usize,
    ci_halfwidth: f64,
    detector: &'a str,
    combiner: &'a str,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "M")]
    m: usize,
    seed: u64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Serialises one or more sweeps into a single CSV table.
pub fn to_csv<W: std::io::Write>(results: &[SweepResult], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in results {
        for row in &r.rows {
            match r.metric {
                Metric::Ber => wr.serialize(BerRecord {
                    x_value: row.x_value,
                    x_unit: &r.x_unit,
                    ber_empirical: row.value,
                    ber_analytic: row.analytic,
                    trials: row.trials,
                    ci_halfwidth: row.ci_halfwidth,
                    detector: &r.detector,
                    combiner: &r.combiner,
                    k: r.k,
                    m: r.m,
                    seed: r.seed,
                }),
                Metric::Mse => wr.serialize(MseRecord {
                    x_value: row.x_value,
                    x_unit: &r.x_unit,
                    mse: row.value,
                    ber_analytic: row.analytic,
                    trials: row.trials,
                    ci_halfwidth: row.ci_halfwidth,
                    detector: &r.detector,
                    combiner: &r.combiner,
                    k: r.k,
                    m: r.m,
                    seed: r.seed,
                }),
            }
            .map_err(csv_err)?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn to_csv_string(results: &[SweepResult]) -> Result<String> {
    let mut buf = Vec::new();
    to_csv(results, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_csv(results: &[SweepResult], path: &Path) -> Result<()> {
    to_csv(results, std::fs::File::create(path)?)
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    snr_axis: &'a str,
    mse_convention: &'a str,
    rate_note: String,
    config: &'a ExperimentConfig,
}

/// `<out>.meta.toml`
pub fn metadata_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.toml");
    PathBuf::from(s)
}

pub fn metadata_string(cfg: &ExperimentConfig, command: &str) -> Result<String> {
    let rate = bd_rate(cfg.ofdm.fs, cfg.ofdm.n, cfg.ofdm.nc, cfg.bd.k)?;
    let body_only = cfg.ofdm.fs / (cfg.bd.k * cfg.ofdm.n) as f64;
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        snr_axis: "ensemble-average linear detection SNR, reported in dB",
        mse_convention: "normalized MSE = E[(x_hat - x)^2] / x^2, x the true parameter",
        rate_note: format!(
            "BD rate fs/(K(N+Nc)) = {:.1} bit/s; fs/(K N) would give {:.1} bit/s",
            rate, body_only
        ),
        config: cfg,
    };
    toml::to_string(&meta).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_metadata(cfg: &ExperimentConfig, command: &str, out: &Path) -> Result<PathBuf> {
    let path = metadata_path(out);
    std::fs::write(&path, metadata_string(cfg, command)?)?;
    Ok(path)
}

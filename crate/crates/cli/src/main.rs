use std::path::PathBuf;

use ambc_core::analysis::{bd_rate, db_to_linear, min_ber_single};
use ambc_core::harness::{
    analytic_curve, run_ber_sweep, run_combiner_sweep, run_distance_sweep, run_mse_sweep, selftest,
    to_csv, write_csv, write_metadata, DetectorKind, ExperimentConfig, MseParam, SweepResult,
    SyncMode,
};
use ambc_core::CombinerScheme;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "ambc",
    version,
    about = "Ambient backscatter over OFDM: Monte Carlo sweeps and closed-form tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER against mean detection SNR
    BerSweep(Common),
    /// BER against BD to receiver distance
    DistanceSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated distances in metres
        #[arg(long, value_delimiter = ',')]
        distances: Option<Vec<f64>>,
    },
    /// Normalised MSE of a synchronisation estimate against SNR
    MseSweep {
        #[command(flatten)]
        common: Common,
        /// dh, d or l
        #[arg(long, default_value = "l")]
        param: MseParam,
    },
    /// BER of every combining scheme against SNR
    CombinerSweep(Common),
    /// Closed-form BER tables only
    Analytic(Common),
    /// Fast invariant checks
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated SNR grid in dB
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Option<Vec<f64>>,
    /// OFDM symbols per BD symbol
    #[arg(long)]
    k: Option<usize>,
    /// Receive antennas
    #[arg(long)]
    antennas: Option<usize>,
    #[arg(long)]
    detector: Option<DetectorKind>,
    #[arg(long)]
    combiner: Option<CombinerScheme>,
    #[arg(long)]
    sync_mode: Option<SyncMode>,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    /// Direct-link SNR margin over the detection SNR, dB
    #[arg(long, allow_hyphen_values = true)]
    direct_margin_db: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    analytic_draws: Option<usize>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)
                .with_context(|| format!("reading {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { $target = v; })*
            };
        }
        set!(
            seed => cfg.seed,
            trials => cfg.trials,
            snr => cfg.snr_grid,
            k => cfg.bd.k,
            antennas => cfg.antennas,
            detector => cfg.detector,
            combiner => cfg.combiner,
            sync_mode => cfg.sync_mode,
            k1 => cfg.k1,
            k2 => cfg.k2,
            direct_margin_db => cfg.direct_margin_db,
            grid_step => cfg.grid_step,
            analytic_draws => cfg.analytic_draws,
        );
        cfg.validate()?;
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring the thread pool")?;
        }
        Ok(cfg)
    }
}

fn emit(
    results: &[SweepResult],
    cfg: &ExperimentConfig,
    command: &str,
    out: &Option<PathBuf>,
) -> Result<()> {
    match out {
        Some(path) => {
            write_csv(results, path)?;
            let meta = write_metadata(cfg, command, path)?;
            eprintln!("wrote {} and {}", path.display(), meta.display());
        }
        None => to_csv(results, std::io::stdout().lock())?,
    }
    Ok(())
}

fn analytic(common: &Common) -> Result<()> {
    let cfg = common.resolve()?;
    let curve = analytic_curve(&cfg, &cfg.snr_grid)?;
    let rate = bd_rate(cfg.ofdm.fs, cfg.ofdm.n, cfg.ofdm.nc, cfg.bd.k)?;
    let geo = {
        let p = cfg.profile_at(cfg.distance)?;
        ambc_core::derive_geometry(&cfg.ofdm, p.f, p.h, ambc_core::PathProfile::new(p.dg, 1))?
    };
    let j = geo.j * cfg.bd.k;
    let mut wr = std::io::stdout().lock();
    use std::io::Write;
    let mut sink: Box<dyn Write> = match &common.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(&mut wr),
    };
    writeln!(
        sink,
        "snr_db,J,ber_fixed_gamma,ber_fading_average,K,M,rate_bps"
    )?;
    for (snr, avg) in cfg.snr_grid.iter().zip(curve) {
        let fixed = min_ber_single(db_to_linear(*snr), j).p_e;
        writeln!(
            sink,
            "{snr},{j},{fixed:.6e},{avg:.6e},{},{},{rate:.1}",
            cfg.bd.k, cfg.antennas
        )?;
    }
    drop(sink);
    if let Some(p) = &common.out {
        write_metadata(&cfg, "analytic", p)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::BerSweep(c) => {
            let cfg = c.resolve()?;
            let r = run_ber_sweep(&cfg)?;
            emit(&[r], &cfg, "ber-sweep", &c.out)
        }
        Command::DistanceSweep { common, distances } => {
            let mut cfg = common.resolve()?;
            if let Some(d) = distances {
                cfg.distances = d;
            }
            let r = run_distance_sweep(&cfg, &cfg.distances)?;
            emit(&[r], &cfg, "distance-sweep", &common.out)
        }
        Command::MseSweep { common, param } => {
            let cfg = common.resolve()?;
            let r = run_mse_sweep(&cfg, param)?;
            emit(
                &[r],
                &cfg,
                &format!("mse-sweep --param {param}"),
                &common.out,
            )
        }
        Command::CombinerSweep(c) => {
            let cfg = c.resolve()?;
            if cfg.antennas < 2 {
                bail!("combiner-sweep needs --antennas 2 or more");
            }
            let r = run_combiner_sweep(&cfg)?;
            emit(&r, &cfg, "combiner-sweep", &c.out)
        }
        Command::Analytic(c) => analytic(&c),
        Command::Selftest(c) => {
            let cfg = c.resolve()?;
            let checks = selftest(&cfg)?;
            let mut failed = 0;
            for ch in &checks {
                println!(
                    "[{}] {}: {}",
                    if ch.passed { "PASS" } else { "FAIL" },
                    ch.name,
                    ch.detail
                );
                failed += usize::from(!ch.passed);
            }
            if failed > 0 {
                bail!("{failed} check(s) failed");
            }
            Ok(())
        }
    }
}

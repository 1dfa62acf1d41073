//! fhcheck: run verification campaigns for anisotropic Hardy and
//! exponential-integrability inequalities, print per-norm constants, or
//! scan radial sharpness thresholds.
//!
//! Exit codes: 0 all non-advisory checks pass, 1 at least one failed,
//! 2 configuration or usage error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use finsler_hardy::campaign::{
    default_campaign, emit_reports, parse_config, CampaignConfig, NormConfig, ProfileConfig,
    ReportFormat,
};
use finsler_hardy::functionals::{gamma_bar, normalize_to_unit_j};
use finsler_hardy::verify::{all_pass, failing_ids, run_campaign};
use finsler_hardy::{DomainSpec, Error, TestFunction};

#[derive(Parser)]
#[command(
    name = "fhcheck",
    version,
    about = "Numerical verification of anisotropic Hardy and exponential-integrability inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the campaign described by a TOML configuration file
    Run {
        /// Path to the configuration, or "default" for the built-in campaign
        config: String,
        /// Override the configured seed
        #[arg(long)]
        seed: Option<u64>,
        /// Cap on worker threads (results are identical for any value)
        #[arg(long)]
        jobs: Option<usize>,
        /// Write reports here instead of the configured path / stdout
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Report format: json or csv
        #[arg(long)]
        format: Option<String>,
    },
    /// Print the constants attached to a norm
    Constants {
        /// euclidean | ellipsoid | p_norm
        norm: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// exponent for p_norm
        #[arg(long)]
        p: Option<f64>,
        /// row-major matrix entries for ellipsoid, comma separated
        #[arg(long, value_delimiter = ',')]
        matrix: Option<Vec<f64>>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Locate the radial exponential thresholds for the configured
    /// norm/profile pairs (profiles are rescaled to unit Hardy difference)
    Threshold {
        /// Path to the configuration, or "default"
        config: String,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_config(path: &str, seed: Option<u64>) -> Result<CampaignConfig, Error> {
    let mut cfg = if path == "default" {
        default_campaign()
    } else {
        let text = fs::read_to_string(path)?;
        parse_config(&text)?
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn cmd_run(
    config: String,
    seed: Option<u64>,
    jobs: Option<usize>,
    output: Option<PathBuf>,
    format: Option<String>,
) -> Result<bool, Error> {
    let mut cfg = load_config(&config, seed)?;
    if let Some(j) = jobs {
        cfg.jobs = j.max(1);
    }
    if let Some(f) = format {
        cfg.format = match f.as_str() {
            "json" => ReportFormat::Json,
            "csv" => ReportFormat::Csv,
            other => {
                return Err(Error::Config(vec![format!(
                    "unknown format `{other}`, expected json or csv"
                )]))
            }
        };
    }
    let reports = run_campaign(&cfg)?;
    let destination = output.or_else(|| cfg.output.as_ref().map(PathBuf::from));
    match destination {
        Some(path) => {
            let mut file = fs::File::create(&path)?;
            emit_reports(&reports, cfg.format, &mut file)?;
            eprintln!("wrote {} reports to {}", reports.len(), path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            emit_reports(&reports, cfg.format, &mut stdout)?;
        }
    }
    let ok = all_pass(&reports);
    if !ok {
        eprintln!("failing checks:");
        for id in failing_ids(&reports) {
            eprintln!("  {id}");
        }
    }
    Ok(ok)
}

fn cmd_constants(
    norm: String,
    dim: usize,
    p: Option<f64>,
    matrix: Option<Vec<f64>>,
    seed: u64,
) -> Result<(), Error> {
    let nc = match norm.as_str() {
        "euclidean" => NormConfig::Euclidean { dim },
        "p_norm" => NormConfig::PNorm {
            dim,
            p: p.ok_or_else(|| Error::Config(vec!["p_norm needs --p".into()]))?,
        },
        "ellipsoid" => NormConfig::Ellipsoid {
            dim,
            matrix: matrix
                .ok_or_else(|| Error::Config(vec!["ellipsoid needs --matrix".into()]))?,
        },
        other => {
            return Err(Error::Config(vec![format!(
                "unknown norm `{other}`; expected euclidean, ellipsoid or p_norm"
            )]))
        }
    };
    let pair = nc.build()?;
    let bundle = finsler_hardy::functionals::constants_bundle(&pair, 4096, 20_000, seed)?;
    println!("norm            {}", pair.label());
    println!("dimension       {}", bundle.n);
    println!("kappa_n         {:.17e}", bundle.kappa_n);
    println!("alpha           {:.17e}", bundle.alpha);
    println!("beta            {:.17e}", bundle.beta);
    println!("alpha_polar     {:.17e}", bundle.alpha_polar);
    println!("beta_polar      {:.17e}", bundle.beta_polar);
    println!("beta_tilde      {:.17e}", bundle.beta_tilde);
    println!(
        "sigma_F         [{:.17e}, {:.17e}] (sampled bracket)",
        bundle.sigma_lo, bundle.sigma_hi
    );
    println!("omega_nF        {:.17e}", bundle.omega_nf);
    println!("boundary_area   {:.17e}", bundle.boundary_area);
    println!("C_nF            {:.17e}", bundle.c_nf);
    println!("gamma_bar(J=1)  {:.17e}", bundle.gamma_bar_unit);
    Ok(())
}

fn cmd_threshold(config: String, seed: Option<u64>) -> Result<(), Error> {
    let cfg = load_config(&config, seed)?;
    println!(
        "{:<18} {:<16} {:>16} {:>16} {:>10}",
        "norm", "profile", "gamma_bar", "located", "rel_dev"
    );
    for nc in &cfg.norms {
        let pair = Arc::new(nc.build()?);
        let domain = Arc::new(DomainSpec::wulff_ball(pair.clone(), 1.0)?);
        let omega = pair.wulff_volume(200_000)?.value;
        for pc in &cfg.profiles {
            if matches!(pc, ProfileConfig::Modulated { .. } | ProfileConfig::Zero) {
                println!(
                    "{:<18} {:<16} {:>16} {:>16} {:>10}",
                    pair.label(),
                    pc.label(),
                    "-",
                    "-",
                    "n/a"
                );
                continue;
            }
            let u = TestFunction::make_radial(pc.base_profile(), domain.clone())?;
            let u = normalize_to_unit_j(&u, cfg.tolerance)?;
            let gbar = gamma_bar(pair.dim() as u32, omega, 1.0)?;
            let located = finsler_hardy::functionals::locate_exp_threshold(
                &u,
                cfg.tolerance,
                cfg.budget,
                cfg.seed,
            )?;
            println!(
                "{:<18} {:<16} {:>16.10} {:>16.10} {:>10.3e}",
                pair.label(),
                pc.label(),
                gbar,
                located,
                (located - gbar).abs() / gbar
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            seed,
            jobs,
            output,
            format,
        } => cmd_run(config, seed, jobs, output, format).map(|ok| {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }),
        Command::Constants {
            norm,
            dim,
            p,
            matrix,
            seed,
        } => cmd_constants(norm, dim, p, matrix, seed).map(|_| ExitCode::SUCCESS),
        Command::Threshold { config, seed } => {
            cmd_threshold(config, seed).map(|_| ExitCode::SUCCESS)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

//! `curvem <subcommand> --config <path> [--levels a..b] [--k 1,2,3] [--geo withGeo|noGeo|both] [--out dir] [--seed n]`
//!
//! Exit codes: 0 success, 1 invariant failure, 2 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use curvem::experiments::{converge, cornerpoint, quadcheck, selftest, GeoSelection, RunConfig, Subcommand};
use curvem::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Quadcheck,
    Converge,
    Cornerpoint,
    Selftest,
}

#[derive(Debug, Parser)]
#[command(name = "curvem", version, about = "Mixed virtual elements on curved polyhedral meshes")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration; keys left out take the subcommand defaults.
    #[arg(long)]
    config: PathBuf,
    /// Inclusive level range, e.g. `0..3`.
    #[arg(long)]
    levels: Option<String>,
    /// Comma-separated degrees.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    geo: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let sub = match cli.command {
        Command::Quadcheck => Subcommand::Quadcheck,
        Command::Converge => Subcommand::Converge,
        Command::Cornerpoint => Subcommand::Cornerpoint,
        Command::Selftest => Subcommand::Selftest,
    };
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::Config(format!("{}: {e}", cli.config.display())))?;
    let mut cfg = RunConfig::from_toml(sub, &text)?;
    if let Some(l) = &cli.levels {
        cfg.levels = l.parse()?;
    }
    if let Some(k) = &cli.k {
        cfg.set_k_list(k)?;
    }
    if let Some(g) = &cli.geo {
        cfg.geo = g.parse::<GeoSelection>()?;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cfg: &RunConfig) -> Result<Vec<String>, Error> {
    std::fs::create_dir_all(&cfg.out)?;
    std::fs::write(cfg.out.join("config.toml"), cfg.to_canonical())?;
    match cfg.subcommand {
        Subcommand::Quadcheck => {
            let r = quadcheck::run(cfg)?;
            println!("{:>6} {:>6} {:>12}", "points", "mesh", "rel. error");
            for row in &r.rows {
                println!("{:>6} {:>6} {:>12.3e}", row.gauss_degree, row.mesh, row.relative_error);
            }
            let c = &r.compression;
            println!(
                "compression: {} -> {} points (min weight {:.3e}, moment residual {:.1e})",
                c.raw_points, c.compressed_points, c.min_weight, c.moment_residual
            );
            Ok(r.failures)
        }
        Subcommand::Converge => {
            let r = converge::run(cfg)?;
            println!(
                "{:<13} {:>2} {:<8} {:>8} {:>8} {:>8} {:>8}  verdict",
                "family", "k", "geo", "slope_v", "last_v", "slope_p", "last_p"
            );
            for s in &r.summary {
                println!(
                    "{:<13} {:>2} {:<8} {:>8.3} {:>8.3} {:>8.3} {:>8.3}  v:{} p:{} (expected {:.1} ± {:.2})",
                    s.family.name(),
                    s.k,
                    s.geo.name(),
                    s.fitted_v,
                    s.last_v,
                    s.fitted_p,
                    s.last_p,
                    if s.pass_v() { "match" } else { "mismatch" },
                    if s.pass_p() { "match" } else { "mismatch" },
                    s.expected,
                    s.tolerance
                );
            }
            for (f, level, ratio) in &r.nogeo_ratio {
                println!("noGeo e_v(k=3)/e_v(k=2) {} level {level}: {ratio:.3}", f.name());
            }
            Ok(r.failures)
        }
        Subcommand::Cornerpoint => {
            let r = cornerpoint::run(cfg)?;
            for res in &r.results {
                let f = res.centerline.drop_fractions();
                println!(
                    "{:<12} level {}: drops {:.4} {:.4} {:.4}, monotone {}, mass {:.1e}",
                    res.variant.name(),
                    res.level,
                    f[0],
                    f[1],
                    f[2],
                    res.centerline.is_monotone(),
                    res.mass_residual
                );
            }
            for (v, d) in &r.profile_differences {
                println!("{:<12} profile differences {:?}", v.name(), d);
            }
            Ok(r.failures)
        }
        Subcommand::Selftest => {
            let r = selftest::run_suite(cfg)?;
            for c in &r.checks {
                println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(r.failures())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("curvem: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(&cfg) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in failures {
                eprintln!("invariant failed: {f}");
            }
            ExitCode::from(1)
        }
        Err(Error::Config(msg)) => {
            eprintln!("curvem: configuration: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("curvem: {e}");
            ExitCode::from(1)
        }
    }
}

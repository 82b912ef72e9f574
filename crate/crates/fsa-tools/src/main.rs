use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fsa_core::search::{self, StrategyTemplate, SweepGrid, KMIN_TOLERANCE};
use fsa_core::{AttackStrategy, SystemParams};
use fsa_tools::config::{self, set_param};
use fsa_tools::manifest::{self, RunManifest};
use fsa_tools::recipes::{Recipe, PNRD_FIG6, QND_FIG3};
use fsa_tools::validate::{self, all_pass};
use fsa_tools::{parallel, range, table, Result, ToolError};

const EXIT_VALIDATION: u8 = 3;

/// Faked-states attack analysis for decoy-state BB84 with detector
/// efficiency mismatch.
#[derive(Debug, Parser)]
#[command(name = "fsa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one (distance, strategy) point.
    Rate {
        #[command(flatten)]
        common: Common,
        /// Fiber length in km (overrides the config).
        #[arg(long)]
        distance: Option<f64>,
    },
    /// Distance scan: observables, decoy bounds, R and R_absolute.
    Scan {
        #[command(flatten)]
        common: Common,
        /// `lo:hi:step` or comma list, km.
        #[arg(long, default_value = "0:200:1")]
        distances: String,
        #[arg(long, value_parser = ["fig3", "fig6", "fig7"])]
        recipe: Option<String>,
    },
    /// Rate over a (distance, k, μ′) grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1,10:1000:10")]
        k_values: String,
        #[arg(long, default_value = "0:2000:20")]
        mu_prime_values: String,
        #[arg(long, default_value = "100")]
        distances: String,
        #[arg(long, value_parser = ["fig2"])]
        recipe: Option<String>,
    },
    /// Minimum mismatch ratio for a positive rate under the QND attack.
    Kmin {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "0:200:5")]
        distances: String,
        /// Bisection tolerance on k.
        #[arg(long, default_value_t = KMIN_TOLERANCE)]
        tol: f64,
        #[arg(long, value_parser = ["fig4"])]
        recipe: Option<String>,
    },
    /// Compare closed forms with the Monte Carlo oracle at 3 sigma.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "100")]
        distances: String,
        /// Signal pulses, decoy pulses and isolated resends per point.
        #[arg(long, default_value_t = 100_000)]
        n_pulses: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write a JSON run manifest here.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyKind {
    Baseline,
    Qnd,
    Pnrd,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value = "gys")]
    preset: String,
    /// Flat TOML parameter file applied on top of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value` parameter override; wins over the config file.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long, value_enum, default_value = "qnd")]
    strategy: StrategyKind,
    /// Mismatch ratio (default 310 for qnd, 1000 for pnrd).
    #[arg(long)]
    k: Option<f64>,
    /// Faked-state mean photon number (default 300 for qnd, 900 for pnrd).
    #[arg(long)]
    mu_prime: Option<f64>,
    /// PNRD single-photon efficiency (default 0.1).
    #[arg(long)]
    eta_e: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn params(&self) -> Result<SystemParams> {
        let mut p = config::preset(&self.preset)?;
        if let Some(path) = &self.config {
            p = config::load_config(path, p)?;
        }
        for spec in &self.params {
            let (key, value) = config::parse_override(spec)?;
            set_param(&mut p, &key, value)?;
        }
        p.validate()?;
        Ok(p)
    }

    fn strategy(&self) -> Result<AttackStrategy> {
        let s = match self.strategy {
            StrategyKind::Baseline => AttackStrategy::Baseline,
            StrategyKind::Qnd => {
                let AttackStrategy::Qnd { mu_prime, k } = QND_FIG3 else { unreachable!() };
                AttackStrategy::Qnd {
                    mu_prime: self.mu_prime.unwrap_or(mu_prime),
                    k: self.k.unwrap_or(k),
                }
            }
            StrategyKind::Pnrd => {
                let AttackStrategy::Pnrd { mu_prime, k, eta_e } = PNRD_FIG6 else { unreachable!() };
                AttackStrategy::Pnrd {
                    mu_prime: self.mu_prime.unwrap_or(mu_prime),
                    k: self.k.unwrap_or(k),
                    eta_e: self.eta_e.unwrap_or(eta_e),
                }
            }
        };
        s.validate()?;
        Ok(s)
    }

    fn template(&self) -> Result<StrategyTemplate> {
        match self.strategy {
            StrategyKind::Qnd => Ok(StrategyTemplate::Qnd),
            StrategyKind::Pnrd => Ok(StrategyTemplate::Pnrd {
                eta_e: self.strategy()?.eve_efficiency().unwrap_or(0.1),
            }),
            StrategyKind::Baseline => Err(ToolError::BadValue {
                key: "strategy".into(),
                reason: "sweeps need an attack strategy".into(),
            }),
        }
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn recipe(name: &str) -> Recipe {
    Recipe::from_str(name, true).expect("restricted by clap")
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Rate { common, distance } => {
            let mut p = common.params()?;
            if let Some(l) = distance {
                p.distance = l;
                p.validate()?;
            }
            let s = common.strategy()?;
            let report = search::evaluate(&p, &s)?;
            table::write_rate(common.output()?, &s, p.distance, &report)?;
        }
        Command::Scan { common, distances, recipe: name } => {
            let p = common.params()?;
            if let Some(name) = name {
                recipe(&name).run(&p, common.output()?)?;
            } else {
                let s = common.strategy()?;
                let rows = parallel::distance_scan(&p, &s, &range::parse_values("distances", &distances)?)?;
                table::write_scan(common.output()?, [(s.name(), rows.as_slice())])?;
            }
        }
        Command::Sweep { common, k_values, mu_prime_values, distances, recipe: name } => {
            let p = common.params()?;
            if let Some(name) = name {
                recipe(&name).run(&p, common.output()?)?;
            } else {
                let list = |key, spec: &str| -> Result<Vec<f64>> {
                    let mut v = Vec::new();
                    for part in spec.split(',') {
                        v.extend(range::parse_values(key, part)?);
                    }
                    Ok(v)
                };
                let grid = SweepGrid::new(
                    list("k_values", &k_values)?,
                    list("mu_prime_values", &mu_prime_values)?,
                    list("distances", &distances)?,
                )?;
                let rows = parallel::sweep_grid(&p, common.template()?, &grid)?;
                table::write_sweep(common.output()?, &rows)?;
            }
        }
        Command::Kmin { common, distances, tol, recipe: name } => {
            let p = common.params()?;
            if let Some(name) = name {
                recipe(&name).run(&p, common.output()?)?;
            } else {
                let rows = parallel::k_min_scan(&p, &range::parse_values("distances", &distances)?, tol)?;
                table::write_kmin(common.output()?, &rows)?;
            }
        }
        Command::Validate { common, distances, n_pulses, seed, manifest: manifest_path } => {
            let p = common.params()?;
            let s = common.strategy()?;
            let mut rows = Vec::new();
            let mut manifests = Vec::new();
            for (i, l) in range::parse_values("distances", &distances)?.into_iter().enumerate() {
                let at = p.with_distance(l);
                at.validate()?;
                let (cmp, run) = validate::validate_point(&at, &s, i, n_pulses, seed.wrapping_add(i as u64))?;
                rows.extend(cmp);
                manifests.push(RunManifest::new(&at, &run));
            }
            table::write_validation(common.output()?, &rows)?;
            if let Some(path) = manifest_path {
                manifest::write_manifests(BufWriter::new(File::create(path)?), &manifests)?;
            }
            if !all_pass(&rows) {
                eprintln!("validation failed: {} comparison(s) beyond 3 sigma", rows.iter().filter(|r| !r.pass).count());
                return Ok(EXIT_VALIDATION);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use std::path::Path;

    fn fsa(args: &[&str]) -> Result<u8> {
        run(Cli::try_parse_from(std::iter::once("fsa").chain(args.iter().copied())).unwrap())
    }

    fn column(path: &Path, name: &str) -> Vec<f64> {
        let mut rdr = csv::Reader::from_path(path).unwrap();
        let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
        rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
    }

    #[test]
    fn rate_is_positive_for_baseline_and_qnd() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("rate.csv");
        let o = out.to_str().unwrap();
        assert_eq!(fsa(&["rate", "--strategy", "baseline", "--distance", "100", "--out", o]).unwrap(), 0);
        assert!(column(&out, "rate")[0] > 0.0);
        let args = ["rate", "--strategy", "qnd", "--k", "310", "--mu-prime", "300", "--distance", "100", "--out", o];
        assert_eq!(fsa(&args).unwrap(), 0);
        assert!(column(&out, "rate")[0] > 0.0);
    }

    #[test]
    fn unknown_config_key_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.toml");
        fs::write(&cfg, "alpha = 0.2\ndark_cnt = 1e-6\n").unwrap();
        let err = fsa(&["rate", "--config", cfg.to_str().unwrap()]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("dark_cnt"));
    }

    #[test]
    fn out_of_range_values_are_config_errors() {
        let err = fsa(&["rate", "--param", "alpha=-1"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("alpha"));
        assert_eq!(fsa(&["rate", "--strategy", "pnrd", "--eta-e", "1.5"]).unwrap_err().exit_code(), 2);
        assert_eq!(fsa(&["sweep", "--strategy", "baseline"]).unwrap_err().exit_code(), 2);
        assert!(Cli::try_parse_from(["fsa", "kmin", "--recipe", "fig3"]).is_err());
    }

    #[test]
    fn kmin_column_is_monotone() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("kmin.csv");
        assert_eq!(fsa(&["kmin", "--distances", "0:150:30", "--out", out.to_str().unwrap()]).unwrap(), 0);
        let k = column(&out, "k_min");
        assert_eq!(k.len(), 6);
        assert!(k.windows(2).all(|w| w[0] <= w[1]), "{k:?}");
    }

    #[test]
    fn validate_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let run_once = |name: &str| {
            let out = dir.path().join(format!("{name}.csv"));
            let man = dir.path().join(format!("{name}.json"));
            let args = [
                "validate", "--strategy", "pnrd", "--distances", "20,80", "--n-pulses", "100000", "--seed", "42",
                "--out", out.to_str().unwrap(), "--manifest", man.to_str().unwrap(),
            ];
            fsa(&args).unwrap();
            (fs::read(out).unwrap(), fs::read(man).unwrap())
        };
        let a = run_once("a");
        let b = run_once("b");
        assert!(!a.0.is_empty() && !a.1.is_empty());
        assert_eq!(a, b);
    }

    #[test]
    fn every_recipe_runs() {
        let dir = tempfile::tempdir().unwrap();
        for (cmd, recipe, header) in [
            ("sweep", "fig2", "distance,k,mu_prime"),
            ("scan", "fig3", "strategy,distance"),
            ("kmin", "fig4", "distance,k_min"),
            ("scan", "fig6", "strategy,distance"),
            ("scan", "fig7", "strategy,distance"),
        ] {
            let out = dir.path().join(format!("{recipe}.csv"));
            assert_eq!(fsa(&[cmd, "--recipe", recipe, "--out", out.to_str().unwrap()]).unwrap(), 0);
            let text = fs::read_to_string(&out).unwrap();
            assert!(text.starts_with(header), "{recipe}");
            assert!(text.lines().count() > 2, "{recipe}");
        }
    }
}

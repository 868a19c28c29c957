//! Command-line front end: sequence checking, spectrum folding, norm
//! queries, lemma and chain verification sweeps, and report generation.
//!
//! Exit codes are a stable contract: 0 success or all-pass, 1 verification
//! failure, 2 configuration or input error.

use std::io::Read as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::norms::l1_certified_with;
use crate::report::{DrawRecord, LemmaRecord, Report, Summary};
use crate::sampling::{draw_full_box, draw_sparse, CoeffDistribution};
use crate::spectrum::{check_admissibility, collision_scan, suggest_tau, BoxSpec};
use crate::trigpoly::{CollisionPolicy, TrigPoly};
use crate::verify::{lemma1_check, lemma2_check, lemma3_check, theorem_chain, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "torusfold",
    version,
    about = "Frequency folding of trigonometric polynomials: sequence checks, certified norms, verification sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand; each overrides the config file field
/// of the same name.
#[derive(Args, Debug, Default, Clone)]
pub struct Overrides {
    /// Config file: flat key = value lines, arrays as a = [1, 1, 1]
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base RNG seed; draw i uses seed + i
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Certified-norm relative error budget
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Number of random draws
    #[arg(long, global = true)]
    pub draws: Option<usize>,
    /// Box enumeration cap
    #[arg(long, global = true)]
    pub cap: Option<u64>,
    /// Bernstein constant: 2pi (sound) or paper
    #[arg(long, global = true, value_parser = ["2pi", "paper"])]
    pub cb: Option<String>,
    /// Report destination (default stdout)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV table destination
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a folding sequence: growth condition, tail sum, collisions
    CheckSeq(Overrides),
    /// Fold a polynomial read from FILE (or stdin) to one variable
    Fold {
        /// Polynomial literal; "-" or absent reads stdin
        file: Option<PathBuf>,
        #[command(flatten)]
        common: Overrides,
    },
    /// Certified L1 norm of a polynomial read from FILE (or stdin)
    Norm {
        /// Polynomial literal; "-" or absent reads stdin
        file: Option<PathBuf>,
        #[command(flatten)]
        common: Overrides,
    },
    /// Run the three estimate harnesses over random draws
    Lemmas(Overrides),
    /// Run the chain verification over random draws, with reports
    Verify(Overrides),
    /// Construct an admissible sequence for the configured box
    SuggestTau(Overrides),
}

/// Loads the config file if given and applies flag overrides.
pub fn resolve_config(ov: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = match &ov.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(e) = ov.eps {
        cfg.eps = e;
    }
    if let Some(d) = ov.draws {
        cfg.draws = d;
    }
    if let Some(c) = ov.cap {
        cfg.cap = c;
    }
    if let Some(cb) = &ov.cb {
        cfg.cb = cb.clone();
    }
    if let Some(p) = &ov.out {
        cfg.out = p.display().to_string();
    }
    if let Some(p) = &ov.csv {
        cfg.csv = p.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a parsed command, returning the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::CheckSeq(ov) => cmd_check_seq(ov),
        Command::Fold { file, common } => cmd_fold(file.as_deref(), common),
        Command::Norm { file, common } => cmd_norm(file.as_deref(), common),
        Command::Lemmas(ov) => cmd_lemmas(ov),
        Command::Verify(ov) => cmd_verify(ov),
        Command::SuggestTau(ov) => cmd_suggest_tau(ov),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse(_) | Error::Io(_) | Error::Empty => {
                    EXIT_CONFIG_ERROR
                }
                _ => EXIT_VERIFY_FAILED,
            }
        }
    }
}

fn cmd_check_seq(ov: &Overrides) -> Result<i32> {
    let cfg = resolve_config(ov)?;
    let spec = cfg.box_spec()?;
    let taus = cfg.folding_seq()?;
    let adm = check_admissibility(&spec, &taus)?;
    println!("a    = {:?}", spec.bounds());
    println!("tau  = {:?}", taus.taus());
    for (k, ok) in adm.growth_ok.iter().enumerate() {
        println!(
            "growth tau[{}] >= 3 a[{}] |tau[{}]|: {}",
            k + 2,
            k + 1,
            k + 1,
            if *ok { "ok" } else { "VIOLATED" }
        );
    }
    println!("tail_sum = {}", adm.tail_sum);
    let pairs = collision_scan(&spec, &taus, cfg.cap as u128)?;
    if pairs.is_empty() {
        println!("collisions: none (fold is injective on the box)");
    } else {
        println!("collisions: {}", pairs.len());
        for (a, b) in pairs.iter().take(10) {
            println!("  {a} and {b} fold equal");
        }
        if pairs.len() > 10 {
            println!("  ... {} more", pairs.len() - 10);
        }
    }
    let ok = adm.overall_ok && pairs.is_empty();
    println!("verdict: {}", if ok { "ADMISSIBLE" } else { "REJECTED" });
    Ok(if ok { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn read_poly(file: Option<&std::path::Path>) -> Result<TrigPoly> {
    let text = match file {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)?,
        _ => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            buf
        }
    };
    TrigPoly::from_literal(&text)
}

fn cmd_fold(file: Option<&std::path::Path>, ov: &Overrides) -> Result<i32> {
    let cfg = resolve_config(ov)?;
    let f = read_poly(file)?;
    let taus = cfg.folding_seq()?;
    let g = f.apply_t(&taus, CollisionPolicy::Strict)?;
    let text = g.to_literal();
    if cfg.out.is_empty() {
        print!("{text}");
    } else {
        std::fs::write(&cfg.out, text)?;
    }
    Ok(EXIT_OK)
}

fn cmd_norm(file: Option<&std::path::Path>, ov: &Overrides) -> Result<i32> {
    let cfg = resolve_config(ov)?;
    let f = read_poly(file)?;
    let est = l1_certified_with(&f, cfg.eps, &cfg.grid_policy()?)?;
    println!("value     = {}", est.value);
    println!("lower     = {}", est.lower());
    println!("upper     = {}", est.upper());
    println!("rel_error = {}", est.rel_error);
    println!("grid      = {:?}", est.grid);
    Ok(EXIT_OK)
}

fn cmd_suggest_tau(ov: &Overrides) -> Result<i32> {
    let cfg = resolve_config(ov)?;
    let spec = cfg.box_spec()?;
    let taus = suggest_tau(&spec, cfg.target_tail)?;
    let adm = check_admissibility(&spec, &taus)?;
    println!("tau      = {:?}", taus.taus());
    println!("tail_sum = {}", adm.tail_sum);
    Ok(EXIT_OK)
}

fn draw_poly(cfg: &ExperimentConfig, spec: &BoxSpec, seed: u64) -> Result<TrigPoly> {
    let dist = cfg.distribution()?;
    if cfg.is_sparse() {
        draw_sparse(spec, cfg.sparse_k, dist, seed, cfg.cap as u128)
    } else {
        draw_full_box(spec, dist, seed, cfg.cap as u128)
    }
}

fn cmd_verify(ov: &Overrides) -> Result<i32> {
    let cfg = resolve_config(ov)?;
    let spec = cfg.box_spec()?;
    let taus = cfg.folding_seq()?;
    let vcfg = VerifyConfig {
        eps: cfg.eps,
        grid: cfg.grid_policy()?,
        cap: cfg.cap as u128,
    };

    // Worker pool over draws; records come back ordered by draw index.
    let records: Vec<DrawRecord> = (0..cfg.draws)
        .into_par_iter()
        .map(|draw| -> Result<DrawRecord> {
            let seed = cfg.seed.wrapping_add(draw as u64);
            let f = draw_poly(&cfg, &spec, seed)?;
            let rep = theorem_chain(&f, &spec, &taus, &vcfg)?;
            Ok(DrawRecord {
                draw,
                seed,
                ratio: rep.ratio,
                lower: rep.lower,
                upper: rep.upper,
                k_final: rep.k_final,
                vacuous: rep.vacuous,
                passed: rep.passed,
            })
        })
        .collect::<Result<_>>()?;

    let mut summary = Summary {
        total: records.len(),
        min_ratio: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
        min_slack: f64::INFINITY,
        ..Default::default()
    };
    for r in &records {
        if r.vacuous {
            summary.vacuous += 1;
        } else if r.passed {
            summary.passed += 1;
        } else {
            summary.failed += 1;
        }
        summary.min_ratio = summary.min_ratio.min(r.ratio);
        summary.max_ratio = summary.max_ratio.max(r.ratio);
        summary.min_slack = summary
            .min_slack
            .min((r.upper - r.ratio).min(r.ratio - r.lower));
    }

    let c_b = cfg.bernstein()?.value();
    let report = Report::new(&cfg, c_b, records, summary);
    report.write_out()?;
    if !cfg.csv.is_empty() {
        report.write_csv(&cfg.csv)?;
    }
    Ok(if report.summary.failed == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn cmd_lemmas(ov: &Overrides) -> Result<i32> {
    let cfg = resolve_config(ov)?;
    let policy = cfg.grid_policy()?;
    // Parts live on the first axis of the box; one univariate draw each.
    let part_spec = BoxSpec::new(vec![cfg.a[0].max(1)])?;
    let dist = cfg.distribution()?;

    let per_draw: Vec<Vec<LemmaRecord>> = (0..cfg.draws)
        .into_par_iter()
        .map(|draw| -> Result<Vec<LemmaRecord>> {
            let seed = cfg.seed.wrapping_add(draw as u64);
            let parts: Vec<TrigPoly> = (0..cfg.parts)
                .map(|i| {
                    draw_part(
                        &part_spec,
                        dist,
                        seed.wrapping_add(1_000_003u64.wrapping_mul(i as u64 + 1)),
                        cfg.cap as u128,
                    )
                })
                .collect::<Result<_>>()?;
            let mut recs = Vec::new();
            let rec = |kind: &str, lhs: f64, rhs: f64, vacuous: bool, passed: bool| LemmaRecord {
                draw,
                seed,
                kind: kind.to_string(),
                lhs,
                rhs,
                slack: rhs - lhs,
                vacuous,
                passed,
            };

            let c1 = lemma1_check(&parts[0], cfg.n_slabs, cfg.eps, &policy)?;
            recs.push(rec(
                "step_approx",
                c1.measured_lhs,
                c1.bound_rhs,
                c1.vacuous,
                c1.passed,
            ));

            let (c2a, c2b) = lemma2_check(&parts, 0, cfg.eps, &policy)?;
            recs.push(rec(
                "part_sum_lower",
                c2a.measured_lhs,
                c2a.bound_rhs,
                c2a.vacuous,
                c2a.passed,
            ));
            recs.push(rec(
                "part_sum_upper",
                c2b.measured_lhs,
                c2b.bound_rhs,
                c2b.vacuous,
                c2b.passed,
            ));

            let c3 = lemma3_check(&parts, 0, cfg.n_slabs, cfg.eps, cfg.eps, &policy)?;
            recs.push(rec(
                "modulation_exchange",
                c3.check.measured_lhs,
                c3.check.bound_rhs,
                c3.check.vacuous,
                c3.check.passed,
            ));
            recs.push(rec(
                "modulation_identity",
                c3.identity_residual,
                c3.identity_tol,
                false,
                c3.identity_residual <= c3.identity_tol,
            ));
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    let records: Vec<LemmaRecord> = per_draw.into_iter().flatten().collect();

    let mut summary = Summary {
        total: records.len(),
        min_ratio: f64::NAN,
        max_ratio: f64::NAN,
        min_slack: f64::INFINITY,
        ..Default::default()
    };
    for r in &records {
        if r.vacuous {
            summary.vacuous += 1;
        } else if r.passed {
            summary.passed += 1;
        } else {
            summary.failed += 1;
        }
        summary.min_slack = summary.min_slack.min(r.slack);
        if r.kind == "modulation_identity" {
            summary.max_identity_residual = summary.max_identity_residual.max(r.lhs);
        }
    }

    let c_b = cfg.bernstein()?.value();
    let strict = cfg.cb == "2pi";
    let failed = summary.failed;
    let report = Report::new(&cfg, c_b, records, summary);
    report.write_out()?;
    // With the unsound comparison constant, violations are data, not bugs.
    Ok(if failed > 0 && strict {
        EXIT_VERIFY_FAILED
    } else {
        EXIT_OK
    })
}

fn draw_part(
    spec: &BoxSpec,
    dist: CoeffDistribution,
    seed: u64,
    cap: u128,
) -> Result<TrigPoly> {
    draw_full_box(spec, dist, seed, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn overrides_replace_config_fields() {
        let ov = Overrides {
            seed: Some(9),
            eps: Some(0.25),
            draws: Some(2),
            cb: Some("paper".into()),
            ..Default::default()
        };
        let cfg = resolve_config(&ov).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.eps, 0.25);
        assert_eq!(cfg.draws, 2);
        assert_eq!(cfg.cb, "paper");
    }

    #[test]
    fn bad_override_is_a_config_error() {
        let ov = Overrides {
            eps: Some(-1.0),
            ..Default::default()
        };
        assert!(matches!(resolve_config(&ov), Err(Error::Config(_))));
    }
}

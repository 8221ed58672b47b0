//! `mupolab`: enumerate and classify marginally unstable periodic orbits of
//! mushroom billiards, predict open-billiard survival laws, and verify both
//! against exact Monte Carlo simulation.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mupolab::config::RunConfig;
use mupolab::output;
use mupolab::parallel::survival_curve_parallel;
use mupolab::predict::predict;
use mupolab::verify::{self, VerifyOptions};
use mupolab_core::montecarlo::{survivor_phase_map, SurvivalCurve};
use mupolab_core::mupo::{classify, enumerate_mupos, HatFraction, RhoSpec};
use mupolab_core::{contfrac, QuadraticSurd};
use serde_json::json;
use std::fs;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "mupolab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Significant digits for floating-point fields in JSON/CSV artifacts.
    #[arg(long, global = true, default_value_t = 17)]
    precision: usize,
}

#[derive(Args, Clone)]
struct RhoArgs {
    /// Control parameter rho = r/R as a double.
    #[arg(long)]
    rho: Option<f64>,
    /// Exact theta* = arccos(rho)/pi, e.g. "871/2500" or "(5+sqrt(2))/23".
    #[arg(long)]
    theta_star: Option<String>,
    /// Hat fraction alpha as p/q (default 1/2).
    #[arg(long, default_value = "1/2")]
    alpha: String,
}

impl RhoArgs {
    fn rho_spec(&self) -> Result<RhoSpec> {
        match (&self.rho, &self.theta_star) {
            (Some(r), None) => Ok(RhoSpec::Plain(*r)),
            (None, Some(t)) => Ok(RhoSpec::ThetaStar(
                QuadraticSurd::parse(t).map_err(|e| anyhow!("{e}"))?,
            )),
            (None, None) => bail!("give --rho or --theta-star"),
            _ => bail!("give --rho or --theta-star, not both"),
        }
    }

    fn alpha(&self) -> Result<HatFraction> {
        let (num, den) = self
            .alpha
            .split_once('/')
            .ok_or_else(|| anyhow!("alpha must be p/q"))?;
        Ok(HatFraction {
            num: num.trim().parse()?,
            den: den.trim().parse()?,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate marginally unstable periodic orbits (s, j) up to s-max.
    Mupos {
        #[command(flatten)]
        rho: RhoArgs,
        #[arg(long, default_value_t = 1000)]
        s_max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify stickiness: MUPO-free certified, finitely or infinitely sticky.
    Classify {
        #[command(flatten)]
        rho: RhoArgs,
        /// Exhaustive scan bound Q (the certificate covers q > Q).
        #[arg(long, default_value_t = 95)]
        q_max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form survival prediction P_e(t) = exp(-gamma t) + C/t as CSV.
    Predict {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t_min: f64,
        #[arg(long, default_value_t = 1e4)]
        t_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo escape simulation; survival curve as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        particles: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Censoring time; default 50 / gamma capped at 1e6.
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 120)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Survivor phase map of the circle-with-slit system (CSV: phi, sin_theta).
    Phase {
        #[arg(long)]
        rho: f64,
        #[arg(long = "N", default_value_t = 200)]
        n_collisions: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance suite and print one pass/fail line per criterion.
    Verify {
        /// Reduced particle counts (for iteration; tolerances assume full runs).
        #[arg(long)]
        quick: bool,
        /// Comma-separated criterion ids, e.g. "1,2,3".
        #[arg(long)]
        criteria: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let digits = cli.precision.clamp(3, 17);
    match cli.command {
        Command::Mupos { rho, s_max, out } => {
            let spec = rho.rho_spec()?;
            let set = enumerate_mupos(&spec, s_max).map_err(|e| anyhow!("{e}"))?;
            let mut doc = json!({
                "rho": spec.rho(),
                "s_max": s_max,
                "mupos": set.iter().map(output::mupo_json).collect::<Vec<_>>(),
            });
            round_floats(&mut doc, digits);
            emit(&doc, out.as_deref())?;
            if let Some(path) = &out {
                output::write_manifest(path, "mupos", json!({"s_max": s_max}), None, doc.clone())?;
            }
        }
        Command::Classify { rho, q_max, out } => {
            let alpha = rho.alpha()?;
            let spec = rho.rho_spec()?;
            let theta = spec
                .theta_star_exact()
                .ok_or_else(|| anyhow!("classify needs an exact --theta-star"))?;
            let class = classify(theta, alpha, q_max).map_err(|e| anyhow!("{e}"))?;
            let xi = theta.mul_rational(&num_rational_big(alpha.den, alpha.num));
            let cf = contfrac::expand(&xi, 4096).map_err(|e| anyhow!("{e}"))?;
            let mut doc = json!({
                "theta_star": theta.to_string(),
                "rho": spec.rho(),
                "alpha": format!("{}/{}", alpha.num, alpha.den),
                "xi_cf": output::cf_json(&cf),
                "classification": output::stickiness_json(&class),
            });
            round_floats(&mut doc, digits);
            emit(&doc, out.as_deref())?;
        }
        Command::Predict {
            config,
            t_min,
            t_max,
            points,
            out,
        } => {
            let text = fs::read_to_string(&config).context("reading config")?;
            let cfg = RunConfig::parse(&text)?;
            let spec = cfg.resolved()?;
            let model = mupolab_core::geometry::build_boundary(&spec).map_err(|e| anyhow!("{e}"))?;
            let rho_spec = cfg.rho_spec()?;
            let pred = predict(&model, &rho_spec, t_max)?;
            let mut rows = Vec::with_capacity(points);
            for i in 0..points {
                let t = t_min * (t_max / t_min).powf(i as f64 / (points - 1) as f64);
                let e = (-pred.survival.gamma_bar * t).exp();
                let p = pred.survival.c_coefficient / t;
                rows.push((t, e, p, e + p));
            }
            let mut header = json!({
                "A": pred.survival.island_a,
                "B": pred.survival.ergodic_b,
                "gamma_bar": pred.survival.gamma_bar,
                "C": pred.survival.c_coefficient,
                "hat_C": pred.hat_c,
                "stem_C": pred.stem_c,
                "mupos": pred.mupos.iter().map(output::mupo_json).collect::<Vec<_>>(),
            });
            if let Some(th) = &pred.thresholds {
                header["ordering"] = json!(match th.ordering {
                    mupolab_core::hat::Ordering::Hat => "hat",
                    mupolab_core::hat::Ordering::Tilde => "tilde",
                });
                header["zeta"] = json!(pred.survival.zeta);
                header["n_thresholds"] = json!({
                    "A": th.n_a, "B": th.n_b, "C": th.n_c,
                    "D": th.n_d, "E": th.n_e, "F": th.n_f,
                });
            }
            output::write_prediction_csv(&out, &rows, &header)?;
            output::write_manifest(
                &out,
                "predict",
                serde_json::to_value(&cfg)?,
                Some(output::geometry_summary(&model)),
                json!({"t_min": t_min, "t_max": t_max, "points": points}),
            )?;
            println!("wrote {}", out.display());
        }
        Command::Simulate {
            config,
            particles,
            seed,
            t_max,
            bins,
            out,
        } => {
            let text = fs::read_to_string(&config).context("reading config")?;
            let cfg = RunConfig::parse(&text)?;
            let spec = cfg.resolved()?;
            if spec.hole.is_none() {
                bail!("simulate needs a hole in the config");
            }
            let model = mupolab_core::geometry::build_boundary(&spec).map_err(|e| anyhow!("{e}"))?;
            for w in &model.warnings {
                eprintln!("warning: {w}");
            }
            let gamma = mupolab_core::hat::escape_rate(&model).map_err(|e| anyhow!("{e}"))?;
            let t_max = t_max.unwrap_or_else(|| (50.0 / gamma).min(1e6));
            let edges = SurvivalCurve::new_edges((0.1 / gamma).min(1.0).max(1e-3), t_max, bins);
            let curve = survival_curve_parallel(&model, particles, &edges, t_max, seed);
            let header = json!({
                "particles": particles,
                "seed": seed,
                "t_max": t_max,
                "gamma_bar": gamma,
                "corner_events": curve.corner_events,
                "censored": curve.censored,
            });
            output::write_survival_csv(&out, &curve, &header)?;
            output::write_manifest(
                &out,
                "simulate",
                serde_json::to_value(&cfg)?,
                Some(output::geometry_summary(&model)),
                header,
            )?;
            println!("wrote {}", out.display());
        }
        Command::Phase {
            rho,
            n_collisions,
            samples,
            seed,
            out,
        } => {
            let pts = survivor_phase_map(rho, n_collisions, samples, seed);
            output::write_phase_csv(&out, &pts)?;
            output::write_manifest(
                &out,
                "phase",
                json!({"rho": rho}),
                None,
                json!({"N": n_collisions, "samples": samples, "seed": seed, "survivors": pts.len()}),
            )?;
            println!("wrote {} ({} survivors)", out.display(), pts.len());
        }
        Command::Verify { quick, criteria, out } => {
            let opts = VerifyOptions {
                quick,
                criteria: criteria.map(|s| {
                    s.split(',')
                        .filter_map(|x| x.trim().parse().ok())
                        .collect()
                }),
            };
            let results = verify::run(&opts);
            let mut all_ok = true;
            for r in &results {
                all_ok &= r.passed;
                println!(
                    "criterion {:>2}: {} [{:7.2}s] {} -- {}",
                    r.id,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.seconds,
                    r.name,
                    r.details
                );
            }
            if let Some(path) = out {
                let doc = json!(results
                    .iter()
                    .map(|r| json!({
                        "id": r.id,
                        "name": r.name,
                        "passed": r.passed,
                        "details": r.details,
                        "seconds": r.seconds,
                    }))
                    .collect::<Vec<_>>());
                fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
            }
            if !all_ok {
                std::process::exit(1);
            }
        }
    }
    Ok(())
}

fn num_rational_big(num: u32, den: u32) -> num_rational::Ratio<num_bigint::BigInt> {
    num_rational::Ratio::new(num_bigint::BigInt::from(num), num_bigint::BigInt::from(den))
}

/// Round every float in a JSON document to `digits` significant digits.
fn round_floats(doc: &mut serde_json::Value, digits: usize) {
    match doc {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.as_i64().is_none() {
                    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), f)
                        .parse()
                        .unwrap_or(f);
                    if let Some(num) = serde_json::Number::from_f64(rounded) {
                        *doc = serde_json::Value::Number(num);
                    }
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(|v| round_floats(v, digits)),
        serde_json::Value::Object(o) => o.values_mut().for_each(|v| round_floats(v, digits)),
        _ => {}
    }
}

fn emit(doc: &serde_json::Value, out: Option<&std::path::Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    match out {
        Some(path) => {
            fs::write(path, &text)?;
            println!("wrote {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

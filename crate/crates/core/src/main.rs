use clap::{Parser, Subcommand};
use ris_cma::attacks::{design_csi_attack, design_phase_attack, target_variance_ump};
use ris_cma::channel::{optimal_phases, sample_rayleigh, CompositeChannel};
use ris_cma::detectors::{cusum_threshold, energy_detect, EnergyTest, GlrCusum, Verdict};
use ris_cma::harness::{emit, run, ExperimentConfig, ExperimentId, HarnessError, OutputFormat};
use ris_cma::rng::Substreams;
use ris_cma::statdist::{snr_moments_continuous, snr_moments_discrete};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ris-cma",
    about = "Monte Carlo toolkit for controller-manipulation attacks on RIS-assisted links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preconfigured experiment sweep and emit result rows
    Run {
        /// experiment id: table1..table5, fig2, fig3, custom
        #[arg(long, default_value = "table1")]
        experiment: String,
        /// JSON config file overriding the experiment defaults
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// restore paper-scale trial counts
        #[arg(long)]
        full: bool,
        /// output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv or json
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Sample a fading block and print its headline quantities
    Channel {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        eps_h_db: f64,
        #[arg(long, default_value_t = 0.0)]
        eps_g_db: f64,
        #[arg(long, default_value_t = 30.0)]
        p_dbm: f64,
        #[arg(long, default_value_t = -10.0)]
        sigma_w2_dbm: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Design an attack for a sampled channel
    Attack {
        /// ump or csi
        #[arg(long, default_value = "ump")]
        kind: String,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        k: usize,
        #[arg(long, default_value_t = 0.05)]
        rho: f64,
        #[arg(long, default_value_t = 0.53)]
        xi: f64,
        #[arg(long, default_value_t = 0.10)]
        nu_ks: f64,
        #[arg(long, default_value_t = 1e-4)]
        sigma_e2: f64,
        #[arg(long, default_value_t = -33.6)]
        eps_db: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run a detector against a synthetic stream
    Detect {
        /// energy or cusum
        #[arg(long, default_value = "energy")]
        detector: String,
        #[arg(long, default_value_t = 50)]
        k: usize,
        #[arg(long, default_value_t = 0.05)]
        rho: f64,
        /// no-attack variance
        #[arg(long, default_value_t = 1.0)]
        sigma02: f64,
        /// stream variance to simulate
        #[arg(long, default_value_t = 0.8)]
        sigma2: f64,
        #[arg(long, default_value_t = 0.25)]
        sigma_min2: f64,
        #[arg(long, default_value_t = 0.01)]
        a_glr: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Closed-form SNR moments for the continuous or quantized model
    Moments {
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// phase bits; omit for the continuous model
        #[arg(long)]
        b: Option<u8>,
        #[arg(long, default_value_t = 30.0)]
        p_dbm: f64,
        #[arg(long, default_value_t = -10.0)]
        sigma_w2_dbm: f64,
        #[arg(long, default_value_t = 0.0)]
        eps_h_db: f64,
        #[arg(long, default_value_t = 0.0)]
        eps_g_db: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { experiment, config, seed, trials, full, out, format } => {
            let id = ExperimentId::parse(&experiment)
                .ok_or_else(|| HarnessError::Config(format!("unknown experiment {experiment}")))?;
            let from_file = config.is_some();
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)?;
                    ExperimentConfig::from_json(&text)?
                }
                None => ExperimentConfig::default_for(id),
            };
            if !from_file {
                cfg.experiment = id;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if full {
                cfg.full = true;
            }
            let fmt = OutputFormat::parse(&format)
                .ok_or_else(|| HarnessError::Config(format!("unknown format {format}")))?;
            let rows = run(&cfg)?;
            emit(&rows, fmt, out.as_deref())
        }
        Command::Channel { n, eps_h_db, eps_g_db, p_dbm, sigma_w2_dbm, seed } => {
            let mut rng = Substreams::new(seed).stream(0);
            let eps_h = 10f64.powf(eps_h_db / 10.0);
            let eps_g = 10f64.powf(eps_g_db / 10.0);
            let p = 10f64.powf(p_dbm / 10.0);
            let sw2 = 10f64.powf(sigma_w2_dbm / 10.0);
            let ch = sample_rayleigh(n, eps_h, eps_g, &mut rng)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            let comp = CompositeChannel::from_siso(&ch, p, sw2)?;
            let opt = optimal_phases(&ch);
            let report = serde_json::json!({
                "n": n,
                "optimal_phases": opt.phases,
                "snr_at_optimum": comp.snr(&opt)?,
                "received_variance_at_optimum": comp.received_variance(&opt)?,
                "noise_var": sw2,
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(())
        }
        Command::Attack { kind, n, k, rho, xi, nu_ks, sigma_e2, eps_db, trials, seed } => {
            let mut rng = Substreams::new(seed).stream(0);
            let eps = 10f64.powf(eps_db / 10.0);
            let (p, sw2) = (10f64.powf(3.0), 10f64.powf(-1.0));
            let ch = sample_rayleigh(n, eps, eps, &mut rng)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            let comp = CompositeChannel::from_siso(&ch, p, sw2)?;
            let opt = optimal_phases(&ch);
            let sigma02 = comp.received_variance(&opt)?;
            let plan = match kind.as_str() {
                "ump" => {
                    let sigma_t2 = target_variance_ump(rho, xi, k, sigma02)?;
                    let nu = ((sigma_t2 - sw2) / p).max(0.0);
                    design_phase_attack(&comp, nu, trials, &mut rng, None)?
                }
                "csi" => {
                    let sigma_s2 = p * n as f64 * sigma_e2;
                    let f0 = ris_cma::statdist::CsiEnergyDist::new(sigma02, sigma_s2)?;
                    let (r_l, _) = ris_cma::detectors::double_thresholds(k, 0.230, 0.02, &f0)?;
                    design_csi_attack(&comp, nu_ks, r_l, sigma_e2, trials, &mut rng, None)?
                }
                other => return Err(HarnessError::Config(format!("unknown attack kind {other}"))),
            };
            let report = serde_json::json!({
                "kind": kind,
                "feasible": plan.feasible,
                "achieved_metric": plan.achieved_metric,
                "target_bound": plan.target_bound,
                "predicted": if plan.predicted.is_finite() {
                    serde_json::json!(plan.predicted)
                } else {
                    serde_json::Value::Null
                },
                "phases": plan.omega.phases,
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(())
        }
        Command::Detect { detector, k, rho, sigma02, sigma2, sigma_min2, a_glr, seed } => {
            let mut rng = Substreams::new(seed).stream(0);
            let draw = |rng: &mut rand_chacha::ChaCha8Rng, var: f64| {
                use rand::Rng;
                use rand_distr::StandardNormal;
                let s = (var / 2.0_f64).sqrt();
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                num_complex::Complex64::new(s * re, s * im)
            };
            let outcome = match detector.as_str() {
                "energy" => {
                    let test = EnergyTest::new(k, rho, sigma02)?;
                    let block: Vec<_> = (0..k).map(|_| draw(&mut rng, sigma2)).collect();
                    energy_detect(&block, &test)?
                }
                "cusum" => {
                    let eps = cusum_threshold(a_glr, sigma_min2, sigma02)?;
                    let mut det = GlrCusum::new(sigma02, sigma_min2, eps, Some(k))?;
                    let mut last = det.step(draw(&mut rng, sigma2));
                    for _ in 1..(20.0 / a_glr) as usize {
                        last = det.step(draw(&mut rng, sigma2));
                        if last.verdict == Verdict::Attack {
                            break;
                        }
                    }
                    last
                }
                other => return Err(HarnessError::Config(format!("unknown detector {other}"))),
            };
            println!("{}", serde_json::to_string_pretty(&outcome).unwrap());
            Ok(())
        }
        Command::Moments { n, b, p_dbm, sigma_w2_dbm, eps_h_db, eps_g_db } => {
            let kappa = 10f64.powf(p_dbm / 10.0) / 10f64.powf(sigma_w2_dbm / 10.0);
            let eps_h = 10f64.powf(eps_h_db / 10.0);
            let eps_g = 10f64.powf(eps_g_db / 10.0);
            let m = match b {
                None => snr_moments_continuous(n, kappa, eps_h, eps_g)?,
                Some(bits) => snr_moments_discrete(n, kappa, eps_h, eps_g, bits)?,
            };
            let report = serde_json::json!({
                "model": match b {
                    None => "continuous".to_string(),
                    Some(x) => format!("discrete_b{x}"),
                },
                "m1": m.m1,
                "m2": m.m2,
                "mgf_at_0": m.mgf(0.0),
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(())
        }
    }
}

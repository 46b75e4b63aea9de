use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use toeplitz_lowrank::covariance::{covariance_estimate, default_sample_count, sample_gaussian_toeplitz, CovarianceModel};
use toeplitz_lowrank::io::{read_json, read_matrix, read_samples, write_json, write_matrix};
use toeplitz_lowrank::oracle::DENSE_CAP;
use toeplitz_lowrank::recovery::{lowrank, RecoveryReport};
use toeplitz_lowrank::sfft::{sparse_recover, RecoveryConfig};
use toeplitz_lowrank::toeplitz::{frobenius_from_column, EntryOracle, FourierToeplitz, SparseSignal, SymToeplitz};
use toeplitz_lowrank::{Error, Result};

use crate::config::RunConfig;
use crate::plant;

/// One run of one command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub input: String,
    pub seed: u64,
    pub config: RunConfig,
    pub wall_seconds: f64,
    pub reads: usize,
    pub degraded: bool,
    pub flags: Vec<String>,
    /// Relative Frobenius error against the input matrix.
    pub error_rel: Option<f64>,
    pub result: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Matrix,
    Signal,
}

pub fn gen(cfg: &RunConfig, kind: Kind, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let truth_path = out.join("truth.json");
    match kind {
        Kind::Matrix => {
            let (t, truth) = plant::matrix(cfg.d, cfg.k, cfg.noise, cfg.grid, &mut rng)?;
            let path = out.join("matrix.txt");
            write_matrix(&path, &t)?;
            write_json(&truth_path, &truth)?;
            Ok(vec![path, truth_path])
        }
        Kind::Signal => {
            let (x, truth) = plant::signal(cfg.d, cfg.k, cfg.grid, &mut rng)?;
            let path = out.join("signal.json");
            write_json(&path, &x)?;
            write_json(&truth_path, &truth)?;
            Ok(vec![path, truth_path])
        }
    }
}

fn relative_error(model: &FourierToeplitz, t: &SymToeplitz) -> f64 {
    let diff: Vec<f64> = model.first_column().iter().zip(t.col()).map(|(a, b)| a - b).collect();
    let norm = t.frobenius();
    if norm > 0.0 {
        frobenius_from_column(&diff) / norm
    } else {
        frobenius_from_column(&diff)
    }
}

fn finish(command: &str, input: &Path, cfg: &RunConfig, started: Instant, reads: usize, degraded: bool,
          flags: Vec<String>, error_rel: Option<f64>, result: serde_json::Value) -> Report {
    Report {
        command: command.into(),
        input: input.display().to_string(),
        seed: cfg.seed,
        config: cfg.clone(),
        wall_seconds: started.elapsed().as_secs_f64(),
        reads,
        degraded,
        flags,
        error_rel,
        result,
    }
}

pub fn sfft(cfg: &RunConfig, input: &Path) -> Result<Report> {
    let started = Instant::now();
    let x: SparseSignal = read_json(input)?;
    let cfg = &RunConfig { d: x.d, ..cfg.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = x.samples();
    if cfg.noise > 0.0 {
        let energy = x.energy();
        let mut g: Vec<Complex64> = (0..x.d)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let ge: f64 = g.iter().map(|v| v.norm_sqr()).sum();
        let scale = (cfg.noise * energy / ge).sqrt();
        g.iter_mut().for_each(|v| *v *= scale);
        samples.iter_mut().zip(&g).for_each(|(s, n)| *s += n);
    }
    let rc = cfg.sfft.clone().unwrap_or_else(|| RecoveryConfig::new(cfg.k, cfg.delta, x.d));
    let list = sparse_recover(&samples, &rc, &mut rng)?;
    Ok(finish("sfft", input, cfg, started, list.reads, list.degraded, list.flags.clone(), None, serde_json::to_value(&list)?))
}

fn lowrank_report(command: &str, input: &Path, cfg: &RunConfig, started: Instant, r: &RecoveryReport,
                  truth: Option<&SymToeplitz>, extra: serde_json::Value) -> Result<Report> {
    let error_rel = truth.map(|t| relative_error(&r.output, t));
    let mut result = serde_json::to_value(r)?;
    if let (serde_json::Value::Object(m), serde_json::Value::Object(e)) = (&mut result, extra) {
        m.extend(e);
    }
    Ok(finish(command, input, cfg, started, r.queries_used, r.degraded, r.flags.clone(), error_rel, result))
}

pub fn lowrank_cmd(cfg: &RunConfig, input: &Path) -> Result<Report> {
    let started = Instant::now();
    let t = read_matrix(input)?;
    let cfg = &RunConfig { d: t.d(), ..cfg.clone() };
    let oracle = EntryOracle::from_toeplitz(&t);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r = lowrank(&oracle, cfg.k, cfg.delta, &cfg.lowrank, &mut rng)?;
    lowrank_report("lowrank", input, cfg, started, &r, Some(&t), serde_json::json!({}))
}

/// Input is either a matrix file, sampled from here, or a binary sample file.
pub fn covest(cfg: &RunConfig, input: &Path) -> Result<Report> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let is_samples = input.extension().is_some_and(|e| e == "bin");
    let (x, truth) = if is_samples {
        (read_samples(std::io::BufReader::new(std::fs::File::open(input)?))?, None)
    } else {
        let t = read_matrix(input)?;
        if t.d() > DENSE_CAP {
            return Err(Error::OverCap { d: t.d(), cap: DENSE_CAP });
        }
        let s = cfg.samples.unwrap_or_else(|| default_sample_count(cfg.k, cfg.epsilon, cfg.sample_constant));
        (sample_gaussian_toeplitz(&CovarianceModel::Dense(t.clone()), s, &mut rng)?, Some(t))
    };
    let cfg = &RunConfig { d: x.d(), samples: Some(x.samples()), ..cfg.clone() };
    let c = covariance_estimate(&x, cfg.k, cfg.epsilon, &cfg.lowrank, &mut rng)?;
    let extra = serde_json::json!({
        "samples": c.samples,
        "max_entries_per_sample": c.max_entries_per_sample,
        "distinct_pairs": c.distinct_pairs,
        "delta": c.delta,
        "epsilon": c.epsilon,
    });
    lowrank_report("covest", input, cfg, started, &c.report, truth.as_ref(), extra)
}

/// Run `trials` consecutive seeds on a bounded pool of threads.
pub fn run_trials<F>(cfg: &RunConfig, job: F) -> Vec<Result<Report>>
where
    F: Fn(&RunConfig) -> Result<Report> + Sync,
{
    let configs: Vec<RunConfig> =
        (0..cfg.trials.max(1)).map(|i| RunConfig { seed: cfg.seed + i as u64, ..cfg.clone() }).collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(configs.len());
    let mut results: Vec<Option<Result<Report>>> = (0..configs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let configs = &configs;
                let job = &job;
                scope.spawn(move || {
                    (w..configs.len()).step_by(workers).map(|i| (i, job(&configs[i]))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                results[i] = Some(r);
            }
        }
    });
    results.into_iter().map(|r| r.expect("every trial ran")).collect()
}

/// Write `value` to `path` through a temporary file and a rename.
pub fn write_atomic<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    write_json(&tmp, value)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

//! Experiment stages shared by the subcommands: dataset generation, training,
//! evaluation and parameter sweeps.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vqccs::metrics::{roc_auc, CurveMean, MetricsReport};
use vqccs::persist::{self, DatasetHeader};
use vqccs::postproc::{mlp_forward, train_mlp};
use vqccs::solvers::{
    fista, ista, oamp, select_threshold, sparse::SparseSolver, vqc_cs, vqc_cs_sampled,
};
use vqccs::system_model::{derived_rng, gen_dataset_stream};
use vqccs::training::{train, EpochStats, TrainConfig, TrainError};
use vqccs::{Checkpoint64, Instance64, Trajectory64};

use crate::config::{ExperimentConfig, SolverKind};
use crate::error::{at_path, CliError, CliResult};
use crate::output::{write_csv, Csv};

pub const STREAM_TRAIN: u64 = 0;
pub const STREAM_TEST: u64 = 1;
pub const STREAM_VALIDATION: u64 = 2;
const STREAM_SHOTS: u64 = 3;
pub const STREAM_DETECTOR: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Validation,
    Test,
    /// Fits the detector MLP on VQC-CS outputs for instances the circuits never saw.
    Detector,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Train, Split::Validation, Split::Test, Split::Detector];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
            Split::Detector => "detector",
        }
    }

    pub fn stream(self) -> u64 {
        match self {
            Split::Train => STREAM_TRAIN,
            Split::Validation => STREAM_VALIDATION,
            Split::Test => STREAM_TEST,
            Split::Detector => STREAM_DETECTOR,
        }
    }

    pub fn count(self, cfg: &ExperimentConfig) -> usize {
        match self {
            Split::Train => cfg.data.train,
            Split::Validation => cfg.data.validation,
            Split::Test => cfg.data.test,
            Split::Detector => cfg.data.detector,
        }
    }

    pub fn path(self, cfg: &ExperimentConfig) -> PathBuf {
        cfg.data_dir().join(format!("{}.bin", self.name()))
    }
}

pub fn generate(cfg: &ExperimentConfig, split: Split) -> CliResult<Vec<Instance64>> {
    Ok(gen_dataset_stream(&cfg.scenario, split.count(cfg), split.stream())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub sha256: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub files: Vec<FileRecord>,
}

pub fn manifest_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.join("manifest.json")
}

pub fn cmd_gen_data(cfg: &ExperimentConfig) -> CliResult<Manifest> {
    cfg.validate()?;
    let mut files = Vec::new();
    for split in Split::ALL {
        if split == Split::Detector && !cfg.mlp.enabled {
            continue;
        }
        let data = generate(cfg, split)?;
        let header = DatasetHeader {
            scenario: cfg.scenario.clone(),
            stream: split.stream(),
            count: data.len(),
            n_devices: cfg.scenario.n_devices,
            n_measurements: cfg.scenario.n_measurements,
        };
        let path = split.path(cfg);
        let sha256 = at_path(&path, persist::write_dataset(&path, &header, &data))?;
        files.push(FileRecord {
            path,
            sha256,
            count: data.len(),
        });
    }
    let manifest = Manifest {
        tool_version: vqccs::VERSION.to_string(),
        config_hash: cfg.hash(),
        seed: cfg.scenario.seed,
        config: cfg.clone(),
        files,
    };
    let path = manifest_path(cfg);
    at_path(&path, persist::save_json(&path, &manifest))?;
    Ok(manifest)
}

/// Reads a generated split and checks it was produced for the configured scenario.
pub fn load_split(cfg: &ExperimentConfig, split: Split) -> CliResult<Vec<Instance64>> {
    let path = split.path(cfg);
    if !path.exists() {
        return Err(CliError::Missing {
            path,
            hint: "vqccs gen-data",
        });
    }
    let (header, data) = at_path(&path, persist::read_dataset::<f64>(&path))?;
    if header.scenario != cfg.scenario {
        return Err(CliError::Config(format!(
            "{} was generated for a different scenario; rerun gen-data",
            path.display()
        )));
    }
    Ok(data)
}

/// Failure of [`train_model`]; divergence keeps the last finite model.
#[derive(Debug)]
pub enum TrainFailure {
    Diverged { message: String, last_finite: Box<Checkpoint64> },
    Other(CliError),
}

impl From<CliError> for TrainFailure {
    fn from(e: CliError) -> Self {
        TrainFailure::Other(e)
    }
}

impl From<vqccs::Error> for TrainFailure {
    fn from(e: vqccs::Error) -> Self {
        TrainFailure::Other(e.into())
    }
}

pub type SeedProgress<'a> = &'a mut dyn FnMut(u64, &EpochStats);

/// Trains once per configured seed, keeps the lowest validation loss, then fits the
/// detector MLP on the selected model's final estimates for `detector` when enabled.
pub fn train_model(
    cfg: &ExperimentConfig,
    data: &[Instance64],
    detector: &[Instance64],
    mut progress: Option<SeedProgress<'_>>,
) -> Result<Checkpoint64, TrainFailure> {
    cfg.validate()?;
    let mut best: Option<Checkpoint64> = None;
    for seed in cfg.seeds() {
        let run_cfg = TrainConfig {
            seed,
            ..cfg.train.clone()
        };
        let mut cb = |s: &EpochStats| {
            if let Some(p) = progress.as_mut() {
                p(seed, s)
            }
        };
        let ck = match train(data, &run_cfg, &cfg.scenario, Some(&mut cb)) {
            Ok(ck) => ck,
            Err(TrainError::Diverged {
                epoch,
                reason,
                last_finite,
            }) => {
                return Err(TrainFailure::Diverged {
                    message: format!("training seed {seed} diverged in epoch {epoch}: {reason}"),
                    last_finite,
                })
            }
            Err(TrainError::Invalid(e)) => return Err(e.into()),
        };
        if best.as_ref().is_none_or(|b| ck.best_val_loss < b.best_val_loss) {
            best = Some(ck);
        }
    }
    let mut ck = best.expect("at least one seed");
    if cfg.mlp.enabled {
        let params = ck.iteration_params();
        let t = ck.train.n_iterations;
        let features: Vec<Vec<f64>> = detector
            .par_iter()
            .map(|inst| {
                vqc_cs(&inst.observation, &inst.pilot, inst.noise_var, &params, t, cfg.train.le_variant)
                    .map(|traj| magnitudes(&traj))
            })
            .collect::<vqccs::Result<_>>()?;
        let labels: Vec<Vec<bool>> = detector.iter().map(|i| i.activity.clone()).collect();
        match train_mlp(&features, &labels, &cfg.mlp.hyper) {
            Ok((mlp, _)) => ck.mlp = Some(mlp),
            Err(vqccs::Error::NonFinite(what)) => {
                return Err(TrainFailure::Diverged {
                    message: format!("detector training diverged: {what}"),
                    last_finite: Box::new(ck),
                })
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(ck)
}

pub fn checkpoint_path(cfg: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.out_dir.join("checkpoint.json"))
}

pub fn cmd_train(
    cfg: &ExperimentConfig,
    checkpoint: &Path,
    progress: Option<SeedProgress<'_>>,
) -> CliResult<Checkpoint64> {
    cfg.validate()?;
    let data = load_split(cfg, Split::Train)?;
    let detector = if cfg.mlp.enabled {
        load_split(cfg, Split::Detector)?
    } else {
        Vec::new()
    };
    match train_model(cfg, &data, &detector, progress) {
        Ok(ck) => {
            at_path(checkpoint, persist::save_json(checkpoint, &ck))?;
            let loss_path = cfg.out_dir.join("loss.csv");
            let mut csv = Csv::new(cfg, &["epoch", "train_loss", "val_loss"]);
            for s in &ck.loss_history {
                csv.row([s.epoch.to_string(), fmt(s.train_loss), fmt(s.val_loss)]);
            }
            write_csv(&loss_path, &csv)?;
            Ok(ck)
        }
        Err(TrainFailure::Diverged { message, last_finite }) => {
            at_path(checkpoint, persist::save_json(checkpoint, &*last_finite))?;
            Err(CliError::Diverged {
                message,
                checkpoint: Some(checkpoint.to_path_buf()),
            })
        }
        Err(TrainFailure::Other(e)) => Err(e),
    }
}

pub fn load_checkpoint(cfg: &ExperimentConfig, path: &Path) -> CliResult<Checkpoint64> {
    if !path.exists() {
        return Err(CliError::Missing {
            path: path.to_path_buf(),
            hint: "vqccs train",
        });
    }
    let ck: Checkpoint64 = at_path(path, persist::load_json(path))?;
    ck.validate(&cfg.scenario)?;
    if ck.train.n_iterations < cfg.iterations() {
        return Err(CliError::Invalid(vqccs::Error::Dimension {
            context: "checkpoint iterations",
            expected: cfg.iterations().to_string(),
            found: ck.train.n_iterations.to_string(),
        }));
    }
    Ok(ck)
}

fn magnitudes(traj: &Trajectory64) -> Vec<f64> {
    traj.final_estimate().iter().map(|z| z.norm()).collect()
}

pub const MLP_LABEL: &str = "vqc-cs+mlp";

/// Per-instance results, aggregated afterwards in dataset order.
struct InstanceResult {
    curves: Vec<Vec<f64>>,
    errors: Vec<Vec<f64>>,
    scores: Vec<Vec<f64>>,
    mlp: Option<Vec<f64>>,
    energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub metrics: MetricsReport,
    /// Per-iteration `Σ‖x̂ᵗ − x‖² / Σ‖x‖²` per solver.
    pub nmse: Vec<(String, Vec<f64>)>,
    pub ista_threshold: Option<f64>,
    pub fista_threshold: Option<f64>,
    pub config: ExperimentConfig,
}

impl Evaluation {
    pub fn final_mse(&self, solver: &str) -> Option<f64> {
        self.metrics.mse_curve(solver).and_then(|c| c.last().copied())
    }
}

pub fn evaluate(
    cfg: &ExperimentConfig,
    test: &[Instance64],
    validation: &[Instance64],
    checkpoint: Option<&Checkpoint64>,
) -> CliResult<Evaluation> {
    let solvers = cfg.solvers.enabled.clone();
    let t = cfg.iterations();
    let threshold = |kind: SparseSolver| -> CliResult<Option<f64>> {
        let wanted = match kind {
            SparseSolver::Ista => SolverKind::Ista,
            SparseSolver::Fista => SolverKind::Fista,
        };
        if solvers.contains(&wanted) {
            Ok(Some(select_threshold(validation, kind, t)?))
        } else {
            Ok(None)
        }
    };
    let ista_threshold = threshold(SparseSolver::Ista)?;
    let fista_threshold = threshold(SparseSolver::Fista)?;
    let vqc_params = match (solvers.contains(&SolverKind::VqcCs), checkpoint) {
        (true, Some(ck)) => Some(ck.iteration_params()),
        (true, None) => {
            return Err(CliError::Missing {
                path: cfg.out_dir.join("checkpoint.json"),
                hint: "vqccs train",
            })
        }
        (false, _) => None,
    };
    let mlp = checkpoint.and_then(|c| c.mlp.as_ref()).filter(|_| vqc_params.is_some());
    let rho = cfg.scenario.activity_rate;
    let shots = cfg.solvers.shots;

    let per_instance: Vec<InstanceResult> = test
        .par_iter()
        .enumerate()
        .map(|(idx, inst)| -> CliResult<InstanceResult> {
            let (y, a, s2) = (&inst.observation, &inst.pilot, inst.noise_var);
            let mut res = InstanceResult {
                curves: Vec::with_capacity(solvers.len()),
                errors: Vec::with_capacity(solvers.len()),
                scores: Vec::with_capacity(solvers.len()),
                mlp: None,
                energy: vqccs::scalar::norm_sqr(&inst.signal),
            };
            for kind in &solvers {
                let traj = match kind {
                    SolverKind::Ista => ista(y, a, ista_threshold.expect("selected"), t)?,
                    SolverKind::Fista => fista(y, a, fista_threshold.expect("selected"), t)?,
                    SolverKind::Oamp => oamp(y, a, rho, s2, t, cfg.solvers.le_variant, cfg.solvers.oamp_readout)?,
                    SolverKind::VqcCs => {
                        let params = vqc_params.as_ref().expect("checked above");
                        if shots == 0 {
                            vqc_cs(y, a, s2, params, t, cfg.solvers.le_variant)?
                        } else {
                            let mut rng = derived_rng(cfg.scenario.seed, STREAM_SHOTS, idx as u64);
                            vqc_cs_sampled(y, a, s2, params, t, cfg.solvers.le_variant, shots, &mut rng)?
                        }
                    }
                };
                let curve = traj.mse_curve(&inst.signal);
                res.errors.push(curve.iter().map(|m| m * inst.signal.len() as f64).collect());
                res.curves.push(curve);
                let mags = magnitudes(&traj);
                if *kind == SolverKind::VqcCs {
                    res.mlp = mlp.map(|p| mlp_forward(&mags, p));
                }
                res.scores.push(mags);
            }
            Ok(res)
        })
        .collect::<CliResult<_>>()?;

    let mut curves = vec![CurveMean::default(); solvers.len()];
    let mut err_sums = vec![vec![0.0; t + 1]; solvers.len()];
    let mut energy = 0.0;
    let mut scores = vec![Vec::new(); solvers.len()];
    let mut mlp_scores = Vec::new();
    let mut labels = Vec::new();
    for (res, inst) in per_instance.iter().zip(test) {
        for k in 0..solvers.len() {
            curves[k].add(&res.curves[k]);
            for (s, e) in err_sums[k].iter_mut().zip(&res.errors[k]) {
                *s += e;
            }
            scores[k].extend_from_slice(&res.scores[k]);
        }
        if let Some(p) = &res.mlp {
            mlp_scores.extend_from_slice(p);
        }
        energy += res.energy;
        labels.extend_from_slice(&inst.activity);
    }
    let mut roc = Vec::new();
    for (k, kind) in solvers.iter().enumerate() {
        let (points, auc) = roc_auc(&scores[k], &labels)?;
        roc.push((kind.name().to_string(), points, auc));
    }
    if mlp.is_some() {
        let (points, auc) = roc_auc(&mlp_scores, &labels)?;
        roc.push((MLP_LABEL.to_string(), points, auc));
    }
    let metrics = MetricsReport {
        mse: solvers
            .iter()
            .zip(&curves)
            .map(|(k, c)| (k.name().to_string(), c.mean()))
            .collect(),
        roc,
        samples: test.len(),
        config_hash: cfg.hash(),
        tool_version: vqccs::VERSION.to_string(),
    };
    let nmse = solvers
        .iter()
        .zip(err_sums)
        .map(|(k, e)| (k.name().to_string(), e.into_iter().map(|v| v / energy).collect()))
        .collect();
    Ok(Evaluation {
        metrics,
        nmse,
        ista_threshold,
        fista_threshold,
        config: cfg.clone(),
    })
}

pub fn report_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.join("report.json")
}

pub fn cmd_eval(cfg: &ExperimentConfig, checkpoint: Option<&Path>) -> CliResult<Evaluation> {
    cfg.validate()?;
    let test = load_split(cfg, Split::Test)?;
    if test.len() < cfg.data.min_test {
        return Err(CliError::Config(format!(
            "data.test: {} instances is below the minimum of {} (data.min_test)",
            test.len(),
            cfg.data.min_test
        )));
    }
    let validation = load_split(cfg, Split::Validation)?;
    let ck = if cfg.solvers.enabled.contains(&SolverKind::VqcCs) {
        Some(load_checkpoint(cfg, &checkpoint_path(cfg, checkpoint))?)
    } else {
        None
    };
    let eval = evaluate(cfg, &test, &validation, ck.as_ref())?;
    write_evaluation(cfg, &eval)?;
    Ok(eval)
}

pub fn write_evaluation(cfg: &ExperimentConfig, eval: &Evaluation) -> CliResult<()> {
    let dir = &cfg.out_dir;
    for (file, table) in [("mse.csv", &eval.metrics.mse), ("nmse.csv", &eval.nmse)] {
        let mut header = vec!["iteration"];
        header.extend(table.iter().map(|(s, _)| s.as_str()));
        let mut csv = Csv::new(cfg, &header);
        let rows = table.first().map_or(0, |(_, c)| c.len());
        for t in 0..rows {
            let mut row = vec![t.to_string()];
            row.extend(table.iter().map(|(_, c)| fmt(c[t])));
            csv.row(row);
        }
        write_csv(&dir.join(file), &csv)?;
    }
    let mut roc = Csv::new(cfg, &["solver", "fpr", "tpr", "threshold"]);
    let mut auc = Csv::new(cfg, &["solver", "auc"]);
    for (solver, points, area) in &eval.metrics.roc {
        for p in points {
            roc.row([solver.clone(), fmt(p.fpr), fmt(p.tpr), fmt(p.threshold)]);
        }
        auc.row([solver.clone(), fmt(*area)]);
    }
    write_csv(&dir.join("roc.csv"), &roc)?;
    write_csv(&dir.join("auc.csv"), &auc)?;
    let path = report_path(cfg);
    at_path(&path, persist::save_json(&path, eval))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Number of measurements M.
    M,
    /// Activity correlation.
    Gamma,
    /// Signal-to-noise ratio in dB.
    Snr,
    /// Solver iterations.
    T,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::M => "m",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Snr => "snr_db",
            SweepAxis::T => "t",
        }
    }

    fn apply(self, cfg: &mut ExperimentConfig, value: f64) -> CliResult<()> {
        let count = |v: f64| -> CliResult<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(CliError::Config(format!("sweep {}: {v} is not a count", self.name())))
            }
        };
        match self {
            SweepAxis::M => cfg.scenario.n_measurements = count(value)?,
            SweepAxis::Gamma => cfg.scenario.correlation = value,
            SweepAxis::Snr => cfg.scenario.snr_db = value,
            SweepAxis::T => {
                let t = count(value)?;
                cfg.solvers.iterations = Some(t);
                if cfg.train.n_iterations < t {
                    cfg.train.n_iterations = t;
                }
            }
        }
        Ok(())
    }
}

pub const SWEEP_METRICS: [&str; 2] = ["final_mse", "auc"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub axis_value: f64,
    pub solver: String,
    pub metric: String,
    pub value: f64,
}

/// Evaluates every grid point on freshly generated data. VQC-CS is trained per point when
/// `retrain` is set, otherwise it uses `checkpoint` and is skipped where incompatible.
pub fn sweep(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    checkpoint: Option<&Checkpoint64>,
    retrain: bool,
) -> CliResult<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    let mut rows = Vec::new();
    for &v in values {
        let mut point = cfg.clone();
        axis.apply(&mut point, v)?;
        let ck = if !point.solvers.enabled.contains(&SolverKind::VqcCs) {
            None
        } else if retrain {
            point.validate()?;
            let train_data = generate(&point, Split::Train)?;
            let detector = if point.mlp.enabled {
                generate(&point, Split::Detector)?
            } else {
                Vec::new()
            };
            match train_model(&point, &train_data, &detector, None) {
                Ok(ck) => Some(ck),
                Err(TrainFailure::Diverged { message, .. }) => {
                    return Err(CliError::Diverged {
                        message,
                        checkpoint: None,
                    })
                }
                Err(TrainFailure::Other(e)) => return Err(e),
            }
        } else {
            checkpoint
                .filter(|c| c.validate(&point.scenario).is_ok() && c.train.n_iterations >= point.iterations())
                .cloned()
        };
        if ck.is_none() {
            point.solvers.enabled.retain(|k| *k != SolverKind::VqcCs);
            if point.solvers.enabled.is_empty() {
                continue;
            }
        }
        point.validate()?;
        let test = generate(&point, Split::Test)?;
        let validation = generate(&point, Split::Validation)?;
        let eval = evaluate(&point, &test, &validation, ck.as_ref())?;
        for (solver, _, auc) in &eval.metrics.roc {
            let final_mse = eval.final_mse(solver);
            for metric in SWEEP_METRICS {
                let value = match metric {
                    "final_mse" => match final_mse {
                        Some(m) => m,
                        None => continue,
                    },
                    _ => *auc,
                };
                rows.push(SweepRow {
                    axis: axis.name().into(),
                    axis_value: v,
                    solver: solver.clone(),
                    metric: metric.into(),
                    value,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep(cfg: &ExperimentConfig, rows: &[SweepRow]) -> CliResult<PathBuf> {
    let mut csv = Csv::new(cfg, &["axis", "axis_value", "solver", "metric", "value"]);
    for r in rows {
        csv.row([r.axis.clone(), fmt(r.axis_value), r.solver.clone(), r.metric.clone(), fmt(r.value)]);
    }
    let path = cfg.out_dir.join("sweep.csv");
    write_csv(&path, &csv)?;
    Ok(path)
}

/// Plain-text summary of a stored evaluation.
pub fn summary(eval: &Evaluation) -> String {
    let m = &eval.metrics;
    let mut out = format!(
        "samples: {}\nconfig: {}\nversion: {}\n\nfinal MSE\n",
        m.samples, m.config_hash, m.tool_version
    );
    for (solver, curve) in &m.mse {
        let last = curve.last().copied().unwrap_or(f64::NAN);
        out.push_str(&format!("  {solver:<12} {last:.6}  ({:.2} dB)\n", vqccs::metrics::to_db(last)));
    }
    out.push_str("\nAUC\n");
    for (solver, _, auc) in &m.roc {
        out.push_str(&format!("  {solver:<12} {auc:.4}\n"));
    }
    out
}

pub fn cmd_report(cfg: &ExperimentConfig) -> CliResult<String> {
    let path = report_path(cfg);
    if !path.exists() {
        return Err(CliError::Missing {
            path,
            hint: "vqccs eval",
        });
    }
    let eval: Evaluation = at_path(&path, persist::load_json(&path))?;
    let text = summary(&eval);
    let out = cfg.out_dir.join("report.txt");
    at_path(&out, persist::atomic_write(&out, text.as_bytes()))?;
    Ok(text)
}

/// Shortest representation that parses back to the same value.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}

//! Dispatch a configuration to its solver and write the artifacts.
//!
//! Each report goes to `report.json`, one `curvature_t<t>.csv` per probe,
//! `spectrum_t<t>.csv` where spectra were recorded, and `energy.csv` /
//! `origin.csv` from the time series. Two-stage runs write one such set in
//! `stage1/` and `stage2/`. `manifest.json` lists everything written.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::{ConfigError, Experiment, ExperimentConfig};
use crate::fd::{fd_run_backward, fd_run_forward, FdBcKind, FdRunOptions};
use crate::grid::{ChebyshevGrid, UniformGrid};
use crate::report::RunReport;
use crate::selfsim::SelfSimilarParams;
use crate::spectral::{spectral_run_backward, spectral_run_forward_two_stage, SpectralBcKind, SpectralRunOptions, StageOptions};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{experiment} failed: {source}")]
    Solver {
        experiment: Experiment,
        #[source]
        source: crate::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Reports of a finished experiment and the files written for it.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub reports: Vec<(String, RunReport)>,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: Experiment,
    version: &'static str,
    config: &'a ExperimentConfig,
    config_text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
    files: Vec<String>,
}

fn solver_error(experiment: Experiment) -> impl FnOnce(crate::Error) -> ExperimentError {
    move |source| ExperimentError::Solver { experiment, source }
}

fn params(cfg: &ExperimentConfig) -> Result<SelfSimilarParams, ExperimentError> {
    SelfSimilarParams::new(cfg.c0, 1.0, cfg.metric).map_err(solver_error(cfg.experiment))
}

fn uniform_grid(cfg: &ExperimentConfig) -> Result<UniformGrid, ExperimentError> {
    let ds = cfg.ds.expect("validated");
    UniformGrid::with_spacing(cfg.length, ds).map_err(solver_error(cfg.experiment))
}

fn fd_options(cfg: &ExperimentConfig) -> FdRunOptions {
    FdRunOptions { dt: cfg.dt, t_end: cfg.t_end, probes: cfg.probes.clone(), series_every: cfg.series_every, window: cfg.window }
}

/// Run the configured solver without touching the filesystem.
pub fn run_reports(cfg: &ExperimentConfig) -> Result<Vec<(String, RunReport)>, ExperimentError> {
    cfg.validate()?;
    let fail = solver_error(cfg.experiment);
    let single = |r: RunReport| vec![(String::new(), r)];
    Ok(match cfg.experiment {
        Experiment::FdBackwardFixed | Experiment::FdBackwardAsymptotic => {
            let bc = if cfg.experiment == Experiment::FdBackwardFixed {
                FdBcKind::FixedFirstOrder
            } else {
                FdBcKind::AsymptoticSecondOrder
            };
            single(fd_run_backward(params(cfg)?, uniform_grid(cfg)?, bc, &fd_options(cfg)).map_err(fail)?.report)
        }
        Experiment::FdForward => {
            single(fd_run_forward(cfg.c0, cfg.metric, uniform_grid(cfg)?, &fd_options(cfg)).map_err(fail)?.report)
        }
        Experiment::SpectralBackward | Experiment::SpectralAdaptiveBackward => {
            let grid = ChebyshevGrid::new(cfg.length, cfg.degree.expect("validated")).map_err(solver_error(cfg.experiment))?;
            let opts = SpectralRunOptions {
                dt: cfg.dt,
                t_end: cfg.t_end,
                refine_threshold: cfg.refine_threshold,
                max_degree: cfg.max_degree,
                probes: cfg.probes.clone(),
                series_every: cfg.series_every,
                spectrum: cfg.spectrum,
                window: cfg.window,
            };
            let bc = cfg.spectral_bc.unwrap_or(SpectralBcKind::ProjectedSecondOrder);
            single(spectral_run_backward(params(cfg)?, grid, bc, &opts).map_err(fail)?.report)
        }
        Experiment::SpectralForwardTwoStage => {
            let s2 = cfg.stage2.expect("validated");
            let t_switch = cfg.t_switch.expect("validated");
            let stage1 = StageOptions { half_width: cfg.length, degree: cfg.degree.expect("validated"), dt: cfg.dt, t_end: t_switch };
            let stage2 = StageOptions { half_width: s2.length, degree: s2.degree, dt: s2.dt, t_end: cfg.t_end };
            let window = cfg.window.unwrap_or((-s2.length, s2.length));
            let out = spectral_run_forward_two_stage(cfg.c0, cfg.metric, stage1, stage2, window, &cfg.probes, cfg.series_every)
                .map_err(fail)?;
            vec![("stage1".into(), out.stage1.report), ("stage2".into(), out.stage2.report)]
        }
    })
}

fn write(path: PathBuf, contents: &str, files: &mut Vec<PathBuf>) -> Result<(), ExperimentError> {
    fs::write(&path, contents).map_err(|source| ExperimentError::Io { path: path.clone(), source })?;
    files.push(path);
    Ok(())
}

fn write_report(dir: &Path, report: &RunReport, files: &mut Vec<PathBuf>) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|source| ExperimentError::Io { path: dir.to_path_buf(), source })?;
    write(dir.join("report.json"), &report.to_json(), files)?;
    for probe in &report.probes {
        write(dir.join(format!("curvature_t{:.6}.csv", probe.t)), &probe.curvature_csv(), files)?;
        if let Some(csv) = probe.spectrum_csv() {
            write(dir.join(format!("spectrum_t{:.6}.csv", probe.t)), &csv, files)?;
        }
    }
    write(dir.join("energy.csv"), &report.energy_csv(), files)?;
    write(dir.join("origin.csv"), &report.origin_csv(), files)
}

/// Run the experiment and write its artifacts under `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutput, ExperimentError> {
    let start = Instant::now();
    log::info!("{} -> {}", cfg.experiment, out_dir.display());
    let reports = run_reports(cfg)?;
    let mut files = Vec::new();
    for (stage, report) in &reports {
        write_report(&out_dir.join(stage), report, &mut files)?;
    }
    let manifest = Manifest {
        experiment: cfg.experiment,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        config_text: cfg.to_text(),
        wall_time_s: (!cfg.deterministic).then(|| start.elapsed().as_secs_f64()),
        files: files
            .iter()
            .map(|p| p.strip_prefix(out_dir).unwrap_or(p).to_string_lossy().into_owned())
            .collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(out_dir.join("manifest.json"), &json, &mut files)?;
    Ok(ExperimentOutput { reports, files })
}

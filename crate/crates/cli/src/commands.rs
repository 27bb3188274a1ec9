use std::fs;
use std::path::{Path, PathBuf};

use reupload::bench::{prediction_map, run_benchmark, unit_grid, TeacherSpec};
use reupload::circuit::{build_observable, Evaluator};
use reupload::io;
use reupload::rng::stream;
use reupload::spectrum::{
    conjugate_symmetry_defect, factorized_harmonic_count, gamma_ratio, generic_parameters,
    numeric_spectrum, scaling_check, symbolic_spectrum, FrequencyAssignment, SpectrumReport,
    MAX_SYMBOLIC_SLOTS,
};
use reupload::trainer::{train, TrainConfig};
use reupload::{Architecture, Error, ObservableSpec, VERSION};
use serde::Serialize;

use crate::config::{BenchmarkConfig, GammaSweep, SimulateConfig, SpectrumConfig, TrainRunConfig};

/// A failed run and its process exit code.
#[derive(Debug)]
pub enum Failure {
    CrossCheck(String),
    Config(String),
    Shape(String),
    Data(String),
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::CrossCheck(_) | Self::Internal(_) => 1,
            Self::Config(_) => 2,
            Self::Shape(_) => 3,
            Self::Data(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::CrossCheck(m) => write!(f, "cross-check failed: {m}"),
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Shape(m) => write!(f, "shape error: {m}"),
            Self::Data(m) => write!(f, "data error: {m}"),
            Self::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::DimensionMismatch { .. } | Error::Shape(_) => Self::Shape(msg),
            Error::Architecture(_)
            | Error::MemoryGuard { .. }
            | Error::Nyquist { .. }
            | Error::Unsupported(_)
            | Error::Config(_) => Self::Config(msg),
            Error::Dataset(_) => Self::Data(msg),
            Error::NotNormalized(_) | Error::NotReal(_) | Error::NotUnitary(_) | Error::NotHermitian(_) => {
                Self::Internal(msg)
            }
        }
    }
}

fn write_failed(path: &Path, e: std::io::Error) -> Failure {
    Failure::Internal(format!("writing {}: {e}", path.display()))
}

/// Output directory with the config echo and run metadata already written.
pub struct RunDir {
    root: PathBuf,
}

#[derive(Serialize)]
struct RunInfo<'a> {
    subcommand: &'a str,
    seed: u64,
    version: &'a str,
}

impl RunDir {
    pub fn create<C: Serialize>(root: &Path, subcommand: &str, seed: u64, config: &C) -> Result<Self, Failure> {
        fs::create_dir_all(root).map_err(|e| write_failed(root, e))?;
        let dir = Self { root: root.to_path_buf() };
        dir.json("config.json", config)?;
        dir.json("run.json", &RunInfo { subcommand, seed, version: VERSION })?;
        Ok(dir)
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<(), Failure> {
        self.file(name, |w| io::write_json(w, value))
    }

    pub fn file(
        &self,
        name: &str,
        emit: impl FnOnce(&mut std::io::BufWriter<fs::File>) -> std::io::Result<()>,
    ) -> Result<(), Failure> {
        let path = self.root.join(name);
        io::to_file(&path, emit).map_err(|e| write_failed(&path, e))
    }
}

fn observable_or_default(spec: &Option<ObservableSpec>, arch: &Architecture) -> ObservableSpec {
    spec.clone().unwrap_or_else(|| ObservableSpec::sigma_z_total(arch.qubits))
}

pub fn simulate(cfg: &SimulateConfig, out: &Path) -> Result<(), Failure> {
    let arch = cfg.architecture;
    arch.validate()?;
    let spec = observable_or_default(&cfg.observable, &arch);
    let obs = build_observable(&spec, arch.qubits)?;
    let theta = cfg.parameters.realize(&arch, cfg.seed)?;
    let points = match &cfg.points {
        Some(p) => p.clone(),
        None => unit_grid(cfg.resolution, arch.inputs),
    };
    if let Some(p) = points.iter().find(|p| p.len() != arch.inputs) {
        return Err(Error::DimensionMismatch { expected: arch.inputs, found: p.len() }.into());
    }
    let eval = Evaluator::new(&arch, &obs)?;
    let signed: Vec<f64> = points.iter().map(|x| eval.signed(&theta, x)).collect();

    let dir = RunDir::create(out, "simulate", cfg.seed, cfg)?;
    dir.json("theta.json", &theta)?;
    dir.file("outputs.csv", |w| {
        let mut header: Vec<String> = (1..=arch.inputs).map(|i| format!("x{i}")).collect();
        header.extend(["F".to_string(), "signed".to_string()]);
        let rows = points.iter().zip(&signed).map(|(x, s)| {
            let mut row: Vec<String> = x.iter().map(f64::to_string).collect();
            row.extend([s.abs().to_string(), s.to_string()]);
            row
        });
        io::write_rows(w, &header, rows)
    })?;
    println!("{} points evaluated for {} with {}", points.len(), arch, obs.label());
    Ok(())
}

#[derive(Serialize)]
struct SpectrumOutcome {
    symbolic: SpectrumReport,
    numeric: SpectrumReport,
    methods_agree: bool,
    conjugate_symmetry_defect: f64,
    /// Count predicted by the per-qubit laws, non-entangling circuits only.
    closed_form: Option<usize>,
}

pub fn spectrum(cfg: &SpectrumConfig, out: &Path) -> Result<(), Failure> {
    let arch = cfg.architecture;
    arch.validate()?;
    if arch.slots() > MAX_SYMBOLIC_SLOTS {
        return Err(Error::MemoryGuard { slots: arch.slots(), limit: MAX_SYMBOLIC_SLOTS }.into());
    }
    let spec = observable_or_default(&cfg.observable, &arch);
    let obs = build_observable(&spec, arch.qubits)?;
    let theta = cfg.parameters.realize(&arch, cfg.seed)?;
    let theta = FrequencyAssignment::canonical(&arch).apply_to(&theta);

    let (symbolic, terms) = symbolic_spectrum(&arch, &theta, &obs)?;
    let numeric = numeric_spectrum(&arch, &theta, &obs, cfg.samples_per_dim)?;
    let outcome = SpectrumOutcome {
        methods_agree: symbolic.harmonics == numeric.report.harmonics,
        conjugate_symmetry_defect: conjugate_symmetry_defect(&terms),
        closed_form: scaling_check(&arch, &spec).ok(),
        symbolic,
        numeric: numeric.report.clone(),
    };

    let dir = RunDir::create(out, "spectrum", cfg.seed, cfg)?;
    dir.json("theta.json", &theta)?;
    dir.json("report.json", &outcome)?;
    dir.file("harmonics.csv", |w| io::write_harmonics(w, &terms))?;
    dir.file("amplitudes.csv", |w| io::write_amplitudes(w, &numeric))?;
    println!(
        "{} with {}: N_h symbolic {} numeric {} (bound {}, Γ = {:.4})",
        arch,
        obs.label(),
        outcome.symbolic.harmonics,
        outcome.numeric.harmonics,
        outcome.symbolic.output_bound,
        outcome.symbolic.gamma
    );
    if !outcome.methods_agree {
        return Err(Failure::CrossCheck(format!(
            "symbolic N_h = {} but DFT found {} peaks",
            outcome.symbolic.harmonics, outcome.numeric.harmonics
        )));
    }
    Ok(())
}

pub fn train_cmd(cfg: &TrainRunConfig, data_flag: Option<&Path>, out: &Path) -> Result<(), Failure> {
    let arch = cfg.architecture;
    arch.validate()?;
    let path = data_flag
        .map(Path::to_path_buf)
        .or_else(|| cfg.dataset.clone())
        .ok_or_else(|| Failure::Config("no dataset: set `dataset` in the config or pass --data".into()))?;
    let data = io::read_dataset(&path)?;
    if data.dim() != arch.inputs {
        return Err(Error::DimensionMismatch { expected: arch.inputs, found: data.dim() }.into());
    }
    let spec = observable_or_default(&cfg.observable, &arch);
    let obs = build_observable(&spec, arch.qubits)?;
    let config = TrainConfig { seed: cfg.seed, ..cfg.train.clone() };
    let echo = TrainRunConfig { dataset: Some(path), train: config.clone(), ..cfg.clone() };
    let result = train(&arch, &data, &obs, &config)?;

    let dir = RunDir::create(out, "train", cfg.seed, &echo)?;
    dir.json("result.json", &result)?;
    dir.file("history.csv", |w| io::write_history(w, &result))?;
    println!(
        "{}: best cost {:e} (restart {} of {}, {} aborted)",
        arch,
        result.best_cost,
        result.best_restart,
        config.restarts,
        result.aborted.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct GammaRow {
    label: String,
    layers: usize,
    qubits: usize,
    inputs: usize,
    harmonics: Option<usize>,
    params: usize,
    gamma: Option<f64>,
    method: &'static str,
}

fn gamma_rows(sweep: &GammaSweep, seed: u64) -> Result<Vec<GammaRow>, Failure> {
    let mut rows = Vec::new();
    for &e in &sweep.entanglement {
        for &q in &sweep.qubits {
            for &l in &sweep.layers {
                let arch = Architecture::non_entangling(l, q, sweep.inputs).with_entanglement(e);
                arch.validate()?;
                let spec = ObservableSpec::sigma_z_total(q);
                let mut rng = stream(seed, &[l as u64, q as u64]);
                let theta = generic_parameters(&arch, &mut rng);
                let (harmonics, method) = if !arch.is_entangling() && l <= MAX_SYMBOLIC_SLOTS {
                    (Some(factorized_harmonic_count(&arch, &theta, &spec)?), "factorized")
                } else if arch.slots() <= MAX_SYMBOLIC_SLOTS {
                    let obs = build_observable(&spec, q)?;
                    (Some(symbolic_spectrum(&arch, &theta, &obs)?.0.harmonics), "symbolic")
                } else {
                    (None, "skipped: memory guard")
                };
                rows.push(GammaRow {
                    label: arch.label(),
                    layers: l,
                    qubits: q,
                    inputs: sweep.inputs,
                    harmonics,
                    params: arch.num_params(),
                    gamma: harmonics.map(|h| gamma_ratio(h, &arch)),
                    method,
                });
            }
        }
    }
    Ok(rows)
}

pub fn benchmark(cfg: &BenchmarkConfig, out: &Path) -> Result<(), Failure> {
    if cfg.teacher.is_none() && cfg.gamma_sweep.is_none() {
        return Err(Failure::Config("benchmark needs `teacher` or `gamma_sweep`".into()));
    }
    let config = TrainConfig { seed: cfg.seed, ..cfg.train.clone() };
    let echo = BenchmarkConfig { train: config.clone(), ..cfg.clone() };
    let dir = RunDir::create(out, "benchmark", cfg.seed, &echo)?;

    if let Some(t) = &cfg.teacher {
        let ts = TeacherSpec {
            arch: t.architecture,
            observable: t.observable.clone(),
            realizations: t.realizations,
            seed: cfg.seed,
            normalize: t.normalize,
            theta_override: None,
        };
        let students = cfg.all_students(t.architecture.inputs);
        if students.is_empty() {
            return Err(Failure::Config("benchmark lists no students".into()));
        }
        let report = run_benchmark(&ts, &students, cfg.samples, &config)?;
        dir.json("benchmark.json", &report)?;
        dir.file("trials.csv", |w| io::write_benchmark(w, &report))?;
        dir.file("depth.csv", |w| io::write_depth_table(w, &report))?;
        if let Some(res) = cfg.map_resolution {
            let spec = ts.observable();
            let mut map = prediction_map(&ts.arch, &ts.parameters(0), &spec, res, None)?;
            map.seed = Some(cfg.seed);
            dir.file("teacher_map.csv", |w| io::write_prediction_map(w, &map))?;
        }
        for a in &report.aggregates {
            println!("{:<16} C̄ = {:.3e}  ΔC = {:.3e}  ({} trials)", a.label, a.mean_cost, a.std_cost, a.trials);
        }
    }
    if let Some(sweep) = &cfg.gamma_sweep {
        let rows = gamma_rows(sweep, cfg.seed)?;
        dir.file("gamma.csv", |w| {
            let header: Vec<String> = ["label", "layers", "qubits", "inputs", "harmonics", "params", "gamma", "method"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let opt = |v: Option<String>| v.unwrap_or_default();
            let body = rows.iter().map(|r| {
                vec![
                    r.label.clone(),
                    r.layers.to_string(),
                    r.qubits.to_string(),
                    r.inputs.to_string(),
                    opt(r.harmonics.map(|h| h.to_string())),
                    r.params.to_string(),
                    opt(r.gamma.map(|g| g.to_string())),
                    r.method.to_string(),
                ]
            });
            io::write_rows(w, &header, body)
        })?;
        println!("Γ table with {} rows written", rows.len());
    }
    Ok(())
}

//! Teacher-student benchmarks and prediction maps.
//!
//! A teacher network with random parameters labels random inputs; student
//! architectures are trained on the result. For each student the best-of-`R`
//! cost of every teacher realization `i ≤ M` is averaged into
//! `C̄ = Σ 𝒞_i / M` with spread `ΔC = sqrt(Σ (𝒞_i − C̄)² / M)`.

use std::f64::consts::FRAC_PI_2;

use log::warn;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_observable, Architecture, Evaluator, ObservableSpec, ParameterSet};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::trainer::{train_from, Dataset, TrainConfig};

/// Stream tags keeping teacher draws and student restarts apart.
const TEACHER_STREAM: u64 = 0;
const TRIAL_STREAM: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeacherSpec {
    pub arch: Architecture,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    pub realizations: usize,
    pub seed: u64,
    /// Divide targets by `Q` so they lie in `[0, 1]` for `σz`-type readouts.
    #[serde(default)]
    pub normalize: bool,
    /// Fixed teacher parameters instead of random draws.
    #[serde(default)]
    pub theta_override: Option<ParameterSet>,
}

impl TeacherSpec {
    pub fn new(arch: Architecture, realizations: usize, seed: u64) -> Self {
        Self { arch, observable: None, realizations, seed, normalize: false, theta_override: None }
    }

    /// The readout, `Σ_q σz^q` unless set.
    pub fn observable(&self) -> ObservableSpec {
        self.observable.clone().unwrap_or_else(|| ObservableSpec::sigma_z_total(self.arch.qubits))
    }

    pub fn validate(&self) -> Result<()> {
        self.arch.validate()?;
        if self.realizations == 0 {
            return Err(Error::Config("teacher realizations must be at least 1".into()));
        }
        if let Some(theta) = &self.theta_override {
            theta.check(&self.arch)?;
        }
        Ok(())
    }

    /// Teacher parameters of realization `m`, uniform in `[−π/2, π/2]`.
    pub fn parameters(&self, m: usize) -> ParameterSet {
        match &self.theta_override {
            Some(theta) => theta.clone(),
            None => {
                let mut rng = stream(self.seed, &[TEACHER_STREAM, m as u64]);
                ParameterSet::random(&self.arch, &mut rng, -FRAC_PI_2, FRAC_PI_2)
            }
        }
    }
}

/// `K` inputs uniform in `[0,1]^n` labelled by realization `m` of the teacher.
pub fn generate_teacher_dataset(ts: &TeacherSpec, m: usize, k: usize, n: usize) -> Result<Dataset> {
    ts.validate()?;
    if k == 0 {
        return Err(Error::Config("teacher dataset needs K ≥ 1".into()));
    }
    if n != ts.arch.inputs {
        return Err(Error::DimensionMismatch { expected: ts.arch.inputs, found: n });
    }
    let theta = ts.parameters(m);
    let obs = build_observable(&ts.observable(), ts.arch.qubits)?;
    let eval = Evaluator::new(&ts.arch, &obs)?;
    let mut rng = stream(ts.seed, &[TEACHER_STREAM, m as u64, 1]);
    let inputs: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.random_range(0.0..=1.0)).collect()).collect();
    let scale = if ts.normalize { ts.arch.qubits as f64 } else { 1.0 };
    let targets = inputs.iter().map(|x| eval.output(&theta, x) / scale).collect();
    Dataset::new(inputs, targets)
}

/// One student architecture under test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudentSpec {
    pub arch: Architecture,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
}

impl StudentSpec {
    pub fn new(arch: Architecture) -> Self {
        Self { arch, observable: None }
    }

    pub fn observable(&self) -> ObservableSpec {
        self.observable.clone().unwrap_or_else(|| ObservableSpec::sigma_z_total(self.arch.qubits))
    }
}

/// Final cost of one restart of one student on one teacher realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub student: usize,
    pub label: String,
    pub realization: usize,
    pub restart: usize,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudentAggregate {
    pub student: usize,
    pub label: String,
    pub layers: usize,
    pub qubits: usize,
    pub entangling: bool,
    /// Best-of-`R` cost per realization, `None` if the realization failed.
    pub best_costs: Vec<Option<f64>>,
    /// `C̄` over best-of-`R` costs.
    pub mean_cost: f64,
    /// `ΔC` over best-of-`R` costs.
    pub std_cost: f64,
    /// Mean and spread over every individual trial.
    pub all_trials_mean: f64,
    pub all_trials_std: f64,
    pub min_cost: f64,
    pub trials: usize,
    pub excluded: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub teacher: String,
    pub seed: u64,
    pub samples: usize,
    pub realizations: usize,
    pub restarts: usize,
    pub trials: Vec<TrialRecord>,
    pub aggregates: Vec<StudentAggregate>,
}

/// `(mean, population std)`; `(NaN, NaN)` for an empty slice.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / m;
    (mean, var.sqrt())
}

/// Trains every student on every teacher realization.
///
/// Restart `r` of student `s` on realization `m` draws from the stream
/// `(seed, m, s, r)`, so every trial replays in isolation.
pub fn run_benchmark(
    ts: &TeacherSpec,
    students: &[StudentSpec],
    k: usize,
    config: &TrainConfig,
) -> Result<BenchmarkReport> {
    ts.validate()?;
    config.validate()?;
    for s in students {
        s.arch.validate()?;
        if s.arch.inputs != ts.arch.inputs {
            return Err(Error::DimensionMismatch { expected: ts.arch.inputs, found: s.arch.inputs });
        }
    }
    let datasets: Vec<Dataset> = (0..ts.realizations)
        .map(|m| generate_teacher_dataset(ts, m, k, ts.arch.inputs))
        .collect::<Result<_>>()?;
    let observables = students
        .iter()
        .map(|s| build_observable(&s.observable(), s.arch.qubits))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> =
        (0..ts.realizations).flat_map(|m| (0..students.len()).map(move |s| (m, s))).collect();
    let config = TrainConfig { seed: ts.seed, ..config.clone() };
    let outcomes: Vec<((usize, usize), Option<Vec<f64>>)> = jobs
        .par_iter()
        .map(|&(m, s)| {
            let prefix = [TRIAL_STREAM, m as u64, s as u64];
            let outcome = train_from(&students[s].arch, &datasets[m], &observables[s], &config, &prefix);
            match outcome {
                Ok(result) => {
                    let mut costs = vec![f64::NAN; config.restarts];
                    for r in &result.restarts {
                        costs[r.index] = r.final_cost;
                    }
                    ((m, s), Some(costs))
                }
                Err(e) => {
                    warn!("student {s} on realization {m} failed: {e}");
                    ((m, s), None)
                }
            }
        })
        .collect();

    let mut trials = Vec::new();
    let mut per_student: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; ts.realizations]; students.len()];
    for ((m, s), costs) in outcomes {
        if let Some(costs) = &costs {
            for (r, &c) in costs.iter().enumerate() {
                trials.push(TrialRecord {
                    student: s,
                    label: students[s].arch.label(),
                    realization: m,
                    restart: r,
                    cost: c,
                });
            }
        }
        per_student[s][m] = costs;
    }
    trials.sort_by_key(|t| (t.student, t.realization, t.restart));

    let aggregates = students
        .iter()
        .enumerate()
        .map(|(s, spec)| {
            let runs = &per_student[s];
            let best_costs: Vec<Option<f64>> = runs
                .iter()
                .map(|r| {
                    r.as_ref().and_then(|c| {
                        c.iter().copied().filter(|v| v.is_finite()).min_by(f64::total_cmp)
                    })
                })
                .collect();
            let best: Vec<f64> = best_costs.iter().flatten().copied().collect();
            let all: Vec<f64> =
                runs.iter().flatten().flat_map(|c| c.iter().copied().filter(|v| v.is_finite())).collect();
            let (mean_cost, std_cost) = mean_and_std(&best);
            let (all_trials_mean, all_trials_std) = mean_and_std(&all);
            StudentAggregate {
                student: s,
                label: spec.arch.label(),
                layers: spec.arch.layers,
                qubits: spec.arch.qubits,
                entangling: spec.arch.is_entangling(),
                min_cost: all.iter().copied().fold(f64::INFINITY, f64::min),
                trials: all.len(),
                excluded: ts.realizations * config.restarts - all.len(),
                best_costs,
                mean_cost,
                std_cost,
                all_trials_mean,
                all_trials_std,
            }
        })
        .collect();

    Ok(BenchmarkReport {
        teacher: ts.arch.label(),
        seed: ts.seed,
        samples: k,
        realizations: ts.realizations,
        restarts: config.restarts,
        trials,
        aggregates,
    })
}

/// Output (and optional residual) on a uniform grid over `[0,1]^n`, `n ≤ 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionMap {
    pub arch: Architecture,
    pub seed: Option<u64>,
    pub resolution: usize,
    /// Grid points, last coordinate fastest.
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// `f(x) − F(x, θ)` against a reference map.
    pub residual: Option<Vec<f64>>,
}

/// `resolution` evenly spaced points per axis including both ends.
pub fn unit_grid(resolution: usize, n: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..resolution)
        .map(|i| if resolution == 1 { 0.5 } else { i as f64 / (resolution - 1) as f64 })
        .collect();
    (0..resolution.pow(n as u32))
        .map(|mut flat| {
            let mut p = vec![0.0; n];
            for slot in p.iter_mut().rev() {
                *slot = axis[flat % resolution];
                flat /= resolution;
            }
            p
        })
        .collect()
}

/// `F(x, θ)` at arbitrary points; no restriction on `n`.
pub fn evaluate_points(
    arch: &Architecture,
    theta: &ParameterSet,
    spec: &ObservableSpec,
    points: &[Vec<f64>],
) -> Result<Vec<f64>> {
    theta.check(arch)?;
    let obs = build_observable(spec, arch.qubits)?;
    let eval = Evaluator::new(arch, &obs)?;
    if let Some(p) = points.iter().find(|p| p.len() != arch.inputs) {
        return Err(Error::DimensionMismatch { expected: arch.inputs, found: p.len() });
    }
    Ok(points.par_iter().map(|x| eval.output(theta, x)).collect())
}

pub fn prediction_map(
    arch: &Architecture,
    theta: &ParameterSet,
    spec: &ObservableSpec,
    resolution: usize,
    reference: Option<&PredictionMap>,
) -> Result<PredictionMap> {
    if arch.inputs > 2 {
        return Err(Error::Unsupported(format!(
            "prediction maps need n ≤ 2, got n = {}; use evaluate_points",
            arch.inputs
        )));
    }
    if resolution == 0 {
        return Err(Error::Config("grid resolution must be at least 1".into()));
    }
    let points = unit_grid(resolution, arch.inputs);
    let values = evaluate_points(arch, theta, spec, &points)?;
    let residual = match reference {
        None => None,
        Some(r) => {
            if r.points != points {
                return Err(Error::Shape("reference map uses a different grid".into()));
            }
            Some(r.values.iter().zip(&values).map(|(f, v)| f - v).collect())
        }
    };
    Ok(PredictionMap { arch: *arch, seed: None, resolution, points, values, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn teacher() -> TeacherSpec {
        TeacherSpec::new(Architecture::non_entangling(2, 2, 2), 2, 42)
    }

    #[test]
    fn teacher_datasets_are_reproducible() {
        let ts = teacher();
        let a = generate_teacher_dataset(&ts, 1, 400, 2).unwrap();
        assert_eq!(a, generate_teacher_dataset(&ts, 1, 400, 2).unwrap());
        assert_ne!(a, generate_teacher_dataset(&ts, 0, 400, 2).unwrap());
        assert_eq!(a.len(), 400);
        assert!(a.inputs().iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        assert!(generate_teacher_dataset(&ts, 0, 0, 2).is_err());
        assert!(generate_teacher_dataset(&ts, 0, 10, 3).is_err());
    }

    #[test]
    fn zero_teacher_gives_constant_targets() {
        let mut ts = teacher();
        ts.theta_override = Some(ParameterSet::zeros(&ts.arch));
        let d = generate_teacher_dataset(&ts, 0, 50, 2).unwrap();
        // ω = 0 as well, so every qubit stays in |0⟩
        assert!(d.targets().iter().all(|&f| (f - 2.0).abs() < 1e-15));
        ts.normalize = true;
        let d = generate_teacher_dataset(&ts, 0, 50, 2).unwrap();
        assert!(d.targets().iter().all(|&f| (f - 1.0).abs() < 1e-15));
    }

    #[test]
    fn degenerate_benchmark() {
        let mut ts = teacher();
        ts.realizations = 1;
        let students = [StudentSpec::new(Architecture::non_entangling(1, 2, 2))];
        let config = TrainConfig { restarts: 1, max_iterations: 20, ..TrainConfig::default() };
        let report = run_benchmark(&ts, &students, 30, &config).unwrap();
        assert_eq!(report.trials.len(), 1);
        let agg = &report.aggregates[0];
        assert_eq!(agg.std_cost, 0.0);
        assert_eq!(agg.mean_cost, report.trials[0].cost);
        assert_eq!(agg.excluded, 0);
    }

    #[test]
    fn aggregation_identities() {
        let ts = teacher();
        let students = [
            StudentSpec::new(Architecture::non_entangling(1, 2, 2)),
            StudentSpec::new(Architecture::entangling(1, 2, 2)),
        ];
        let config = TrainConfig { restarts: 2, max_iterations: 15, ..TrainConfig::default() };
        let report = run_benchmark(&ts, &students, 20, &config).unwrap();
        assert_eq!(report.trials.len(), 2 * 2 * 2);
        for agg in &report.aggregates {
            let mut best = Vec::new();
            for m in 0..2 {
                let c = report
                    .trials
                    .iter()
                    .filter(|t| t.student == agg.student && t.realization == m)
                    .map(|t| t.cost)
                    .fold(f64::INFINITY, f64::min);
                best.push(c);
            }
            let mean = (best[0] + best[1]) / 2.0;
            let std = (((best[0] - mean).powi(2) + (best[1] - mean).powi(2)) / 2.0).sqrt();
            assert!((agg.mean_cost - mean).abs() < 1e-14);
            assert!((agg.std_cost - std).abs() < 1e-14);
            assert!(agg.mean_cost >= agg.min_cost);
        }
        let again = run_benchmark(&ts, &students, 20, &config).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn maps() {
        let arch = Architecture::non_entangling(2, 2, 2);
        let spec = ObservableSpec::sigma_z_total(2);
        let zero = prediction_map(&arch, &ParameterSet::zeros(&arch), &spec, 5, None).unwrap();
        assert_eq!(zero.values.len(), 25);
        assert!(zero.values.iter().all(|v| (v - 2.0).abs() < 1e-15));
        let same = prediction_map(&arch, &ParameterSet::zeros(&arch), &spec, 5, Some(&zero)).unwrap();
        assert!(same.residual.unwrap().iter().all(|&r| r == 0.0));
        assert_eq!(unit_grid(3, 1), vec![vec![0.0], vec![0.5], vec![1.0]]);
        let wide = Architecture::non_entangling(1, 1, 3);
        assert!(prediction_map(&wide, &ParameterSet::zeros(&wide), &ObservableSpec::sigma_z_total(1), 4, None).is_err());
    }
}

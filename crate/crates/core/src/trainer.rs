//! Squared-error regression by gradient descent with random restarts.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    compile, entangler_dagger_entries, entangler_entries, entangler_pairs, gate_half_angle,
    rotation_gate, Architecture, Axis, Evaluator, Observable, ParameterSet, Step,
};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::tensor::{apply_pair_inplace, apply_single_inplace, C64, ONE, ZERO};

/// Central-difference step.
pub const FD_STEP: f64 = 1e-6;

/// Regression samples `x^k ∈ [0,1]^n` with targets `f(x^k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::Dataset("dataset has no samples".into()));
        }
        if inputs.len() != targets.len() {
            return Err(Error::Dataset(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        let n = inputs[0].len();
        if n == 0 {
            return Err(Error::Dataset("inputs have no coordinates".into()));
        }
        for (k, (x, f)) in inputs.iter().zip(&targets).enumerate() {
            if x.len() != n {
                return Err(Error::Dataset(format!("sample {k} has {} coordinates, expected {n}", x.len())));
            }
            if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Dataset(format!("sample {k} has coordinate {v} outside [0, 1]")));
            }
            if !f.is_finite() {
                return Err(Error::Dataset(format!("sample {k} has non-finite target")));
            }
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Input dimension `n`.
    pub fn dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.inputs.iter().map(Vec::as_slice).zip(self.targets.iter().copied())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    /// Reverse sweep through the state vector; exact, one forward and one backward pass per sample.
    #[default]
    Adjoint,
    /// Two shifted re-simulations per rotation angle.
    ParameterShift,
    /// Central differences of the cost with step [`FD_STEP`].
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub gradient_method: GradientMethod,
    pub convergence_tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iterations: 2000,
            learning_rate: 0.1,
            seed: 0,
            gradient_method: GradientMethod::Adjoint,
            convergence_tol: 1e-10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::Config("convergence_tol must be non-negative".into()));
        }
        Ok(())
    }
}

/// Outcome of one restart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub index: usize,
    pub final_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after every accepted step, starting with the initial cost.
    pub history: Vec<f64>,
    pub theta: ParameterSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub best_theta: ParameterSet,
    pub best_cost: f64,
    pub best_restart: usize,
    pub restarts: Vec<RestartRecord>,
    /// Restarts abandoned after a non-finite cost.
    pub aborted: Vec<usize>,
    pub seed: u64,
}

fn check(arch: &Architecture, theta: &ParameterSet, data: &Dataset, obs: &Observable) -> Result<()> {
    arch.validate()?;
    theta.check(arch)?;
    if data.dim() != arch.inputs {
        return Err(Error::DimensionMismatch { expected: arch.inputs, found: data.dim() });
    }
    if obs.dim() != arch.dim() {
        return Err(Error::DimensionMismatch { expected: arch.dim(), found: obs.dim() });
    }
    Ok(())
}

/// `𝒞 = (1/K) Σ_k (F(x^k, θ) − f(x^k))²`.
pub fn cost(arch: &Architecture, theta: &ParameterSet, data: &Dataset, obs: &Observable) -> Result<f64> {
    check(arch, theta, data, obs)?;
    let eval = Evaluator::new(arch, obs)?;
    Ok(cost_with(&eval, theta, data))
}

fn cost_with(eval: &Evaluator<'_>, theta: &ParameterSet, data: &Dataset) -> f64 {
    let sum: f64 = data.iter().map(|(x, f)| (eval.output(theta, x) - f).powi(2)).sum();
    sum / data.len() as f64
}

/// `∂𝒞/∂θ` in the flat layout of [`ParameterSet::to_flat`].
pub fn gradient(
    arch: &Architecture,
    theta: &ParameterSet,
    data: &Dataset,
    obs: &Observable,
    method: GradientMethod,
) -> Result<Vec<f64>> {
    check(arch, theta, data, obs)?;
    let eval = Evaluator::new(arch, obs)?;
    Ok(match method {
        GradientMethod::Adjoint => adjoint_cost_and_gradient(arch, &eval, theta, data).1,
        GradientMethod::ParameterShift => shift_gradient(arch, &eval, theta, data),
        GradientMethod::FiniteDifference => fd_gradient(arch, &eval, theta, data),
    })
}

/// `d|E|/dE` with the subgradient 0 at the kink.
#[inline]
fn sign(e: f64) -> f64 {
    if e > 0.0 {
        1.0
    } else if e < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Adds `g · ∂τ/∂θ` for the gate's half angle `τ` into the flat gradient.
#[inline]
fn scatter(grad: &mut [f64], stride: usize, inputs: usize, slot: usize, data_driven: bool, x: &[f64], g: f64) {
    let base = slot * stride;
    if data_driven {
        for (i, xi) in x.iter().enumerate() {
            grad[base + i] += g * xi;
        }
        grad[base + inputs] += g;
    } else {
        grad[base + inputs + 1] += g;
    }
}

/// `Im⟨λ|σ|ψ⟩` on one bit.
fn pauli_overlap_im(lambda: &[C64], psi: &[C64], axis: Axis, bit: usize) -> f64 {
    let m = 1usize << bit;
    let mut acc = ZERO;
    for i0 in (0..psi.len()).filter(|i| i & m == 0) {
        let i1 = i0 | m;
        let (s0, s1) = match axis {
            Axis::X => (psi[i1], psi[i0]),
            Axis::Y => (psi[i1] * C64::new(0.0, -1.0), psi[i0] * C64::new(0.0, 1.0)),
        };
        acc += lambda[i0].conj() * s0 + lambda[i1].conj() * s1;
    }
    acc.im
}

fn adjoint_cost_and_gradient(
    arch: &Architecture,
    eval: &Evaluator<'_>,
    theta: &ParameterSet,
    data: &Dataset,
) -> (f64, Vec<f64>) {
    let steps = eval.steps();
    let obs = eval.observable();
    let pairs = entangler_pairs(arch.qubits, arch.entangler_order);
    let (e2, e2d) = (entangler_entries(), entangler_dagger_entries());
    let stride = arch.inputs + 2;
    let k = data.len() as f64;
    let mut grad = vec![0.0; arch.num_params()];
    let mut total = 0.0;
    let mut psi = vec![ZERO; arch.dim()];
    for (x, f) in data.iter() {
        psi.fill(ZERO);
        psi[0] = ONE;
        let angles: Vec<f64> = steps
            .iter()
            .map(|s| match s {
                Step::Rotation(g) => gate_half_angle(g, theta, x),
                Step::Entangler => 0.0,
            })
            .collect();
        for (step, &tau) in steps.iter().zip(&angles) {
            match step {
                Step::Rotation(g) => apply_single_inplace(&mut psi, &rotation_gate(g.axis, tau), g.bit),
                Step::Entangler => {
                    for &(hi, lo) in &pairs {
                        apply_pair_inplace(&mut psi, &e2, hi, lo);
                    }
                }
            }
        }
        let e = obs.expectation(&psi);
        let residual = e.abs() - f;
        total += residual * residual;
        let weight = 2.0 * residual * sign(e) / k;
        if weight == 0.0 {
            continue;
        }
        let mut lambda = obs.apply(&psi);
        for (step, &tau) in steps.iter().zip(&angles).rev() {
            match step {
                Step::Rotation(g) => {
                    // d/dτ of e^{−iτσ}: dE/dτ = 2 Im⟨λ|σ|ψ⟩ at the point after the gate
                    let de = 2.0 * pauli_overlap_im(&lambda, &psi, g.axis, g.bit);
                    scatter(&mut grad, stride, arch.inputs, g.slot, g.data_driven, x, weight * de);
                    let undo = rotation_gate(g.axis, -tau);
                    apply_single_inplace(&mut psi, &undo, g.bit);
                    apply_single_inplace(&mut lambda, &undo, g.bit);
                }
                Step::Entangler => {
                    for &(hi, lo) in pairs.iter().rev() {
                        apply_pair_inplace(&mut psi, &e2d, hi, lo);
                        apply_pair_inplace(&mut lambda, &e2d, hi, lo);
                    }
                }
            }
        }
    }
    (total / k, grad)
}

/// Signed output with one gate's half angle shifted by `delta`.
fn shifted_signed(
    arch: &Architecture,
    eval: &Evaluator<'_>,
    theta: &ParameterSet,
    x: &[f64],
    gate: usize,
    delta: f64,
) -> f64 {
    let pairs = entangler_pairs(arch.qubits, arch.entangler_order);
    let e2 = entangler_entries();
    let mut psi = vec![ZERO; arch.dim()];
    psi[0] = ONE;
    for (i, step) in eval.steps().iter().enumerate() {
        match step {
            Step::Rotation(g) => {
                let mut tau = gate_half_angle(g, theta, x);
                if i == gate {
                    tau += delta;
                }
                apply_single_inplace(&mut psi, &rotation_gate(g.axis, tau), g.bit);
            }
            Step::Entangler => {
                for &(hi, lo) in &pairs {
                    apply_pair_inplace(&mut psi, &e2, hi, lo);
                }
            }
        }
    }
    eval.observable().expectation(&psi)
}

/// Every parameter drives exactly one `e^{−iτσ}` gate, so `dE/dτ = E(τ + π/4) − E(τ − π/4)`.
fn shift_gradient(arch: &Architecture, eval: &Evaluator<'_>, theta: &ParameterSet, data: &Dataset) -> Vec<f64> {
    let stride = arch.inputs + 2;
    let k = data.len() as f64;
    let mut grad = vec![0.0; arch.num_params()];
    for (x, f) in data.iter() {
        let e = eval.signed(theta, x);
        let weight = 2.0 * (e.abs() - f) * sign(e) / k;
        for (i, step) in eval.steps().iter().enumerate() {
            if let Step::Rotation(g) = step {
                let de = shifted_signed(arch, eval, theta, x, i, FRAC_PI_4)
                    - shifted_signed(arch, eval, theta, x, i, -FRAC_PI_4);
                scatter(&mut grad, stride, arch.inputs, g.slot, g.data_driven, x, weight * de);
            }
        }
    }
    grad
}

fn fd_gradient(arch: &Architecture, eval: &Evaluator<'_>, theta: &ParameterSet, data: &Dataset) -> Vec<f64> {
    let flat = theta.to_flat();
    (0..flat.len())
        .map(|j| {
            let at = |delta: f64| {
                let mut p = flat.clone();
                p[j] += delta;
                let t = ParameterSet::from_flat(arch, &p).expect("same length");
                cost_with(eval, &t, data)
            };
            (at(FD_STEP) - at(-FD_STEP)) / (2.0 * FD_STEP)
        })
        .collect()
}

fn cost_and_gradient(
    arch: &Architecture,
    eval: &Evaluator<'_>,
    theta: &ParameterSet,
    data: &Dataset,
    method: GradientMethod,
) -> (f64, Vec<f64>) {
    match method {
        GradientMethod::Adjoint => adjoint_cost_and_gradient(arch, eval, theta, data),
        GradientMethod::ParameterShift => (cost_with(eval, theta, data), shift_gradient(arch, eval, theta, data)),
        GradientMethod::FiniteDifference => (cost_with(eval, theta, data), fd_gradient(arch, eval, theta, data)),
    }
}

/// Gradient descent from `theta`: a step that raises the cost is retried at
/// half the rate, an accepted step grows the rate by 1.1 up to `learning_rate`.
/// Returns `None` on a non-finite cost.
pub fn descend(
    arch: &Architecture,
    theta: ParameterSet,
    data: &Dataset,
    obs: &Observable,
    config: &TrainConfig,
) -> Result<Option<(ParameterSet, Vec<f64>, bool)>> {
    check(arch, &theta, data, obs)?;
    config.validate()?;
    let eval = Evaluator::new(arch, obs)?;
    Ok(run_descent(arch, &eval, theta, data, config))
}

fn run_descent(
    arch: &Architecture,
    eval: &Evaluator<'_>,
    mut theta: ParameterSet,
    data: &Dataset,
    config: &TrainConfig,
) -> Option<(ParameterSet, Vec<f64>, bool)> {
    let method = config.gradient_method;
    let (mut c, mut g) = cost_and_gradient(arch, eval, &theta, data, method);
    if !c.is_finite() {
        return None;
    }
    let mut history = vec![c];
    let mut rate = config.learning_rate;
    let mut flat = theta.to_flat();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let trial: Vec<f64> = flat.iter().zip(&g).map(|(p, gi)| p - rate * gi).collect();
        let trial_theta = ParameterSet::from_flat(arch, &trial).expect("same length");
        let (tc, tg) = cost_and_gradient(arch, eval, &trial_theta, data, method);
        if !tc.is_finite() {
            return None;
        }
        if tc <= c {
            let change = c - tc;
            (flat, theta, c, g) = (trial, trial_theta, tc, tg);
            history.push(c);
            rate = (rate * 1.1).min(config.learning_rate);
            if change < config.convergence_tol {
                converged = true;
                break;
            }
        } else {
            rate *= 0.5;
            if rate < f64::EPSILON * config.learning_rate {
                converged = true;
                break;
            }
        }
    }
    Some((theta, history, converged))
}

/// `R` restarts from uniform `[−π/2, π/2]` initializations; the lowest cost wins,
/// ties going to the lowest restart index.
pub fn train(arch: &Architecture, data: &Dataset, obs: &Observable, config: &TrainConfig) -> Result<TrainResult> {
    train_from(arch, data, obs, config, &[])
}

/// Like [`train`], with the stream path `(seed, prefix…, restart)` for each restart.
pub fn train_from(
    arch: &Architecture,
    data: &Dataset,
    obs: &Observable,
    config: &TrainConfig,
    stream_prefix: &[u64],
) -> Result<TrainResult> {
    config.validate()?;
    check(arch, &ParameterSet::zeros(arch), data, obs)?;
    let eval = Evaluator::new(arch, obs)?;
    let outcomes: Vec<(usize, Option<RestartRecord>)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut path = stream_prefix.to_vec();
            path.push(r as u64);
            let mut rng = stream(config.seed, &path);
            let init = ParameterSet::random(arch, &mut rng, -FRAC_PI_2, FRAC_PI_2);
            let record = run_descent(arch, &eval, init, data, config).map(|(theta, history, converged)| {
                let final_cost = *history.last().expect("history starts with the initial cost");
                debug!("restart {r}: cost {final_cost:.3e} after {} steps", history.len() - 1);
                RestartRecord { index: r, final_cost, iterations: history.len() - 1, converged, history, theta }
            });
            (r, record)
        })
        .collect();

    let mut restarts = Vec::new();
    let mut aborted = Vec::new();
    for (r, rec) in outcomes {
        match rec {
            Some(rec) => restarts.push(rec),
            None => {
                warn!("restart {r} aborted: non-finite cost");
                aborted.push(r);
            }
        }
    }
    let best = restarts
        .iter()
        .min_by(|a, b| a.final_cost.total_cmp(&b.final_cost).then(a.index.cmp(&b.index)))
        .ok_or_else(|| Error::Unsupported("every restart produced a non-finite cost".into()))?;
    Ok(TrainResult {
        best_theta: best.theta.clone(),
        best_cost: best.final_cost,
        best_restart: best.index,
        seed: config.seed,
        aborted,
        restarts,
    })
}

/// Largest per-component deviation `|a − b| / max(|a|, |b|, floor)`.
pub fn max_relative_deviation(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Per-sample forward evaluation used by tests and tools that want `F(x^k, θ)` directly.
pub fn predictions(arch: &Architecture, theta: &ParameterSet, data: &Dataset, obs: &Observable) -> Result<Vec<f64>> {
    check(arch, theta, data, obs)?;
    let eval = Evaluator::new(arch, obs)?;
    Ok(data.inputs().iter().map(|x| eval.output(theta, x)).collect())
}

/// Steps applied per sample by the compiled circuit, for cost accounting.
pub fn gate_count(arch: &Architecture) -> usize {
    compile(arch).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_observable, evaluate_output, Entanglement, LayerKind, ObservableSpec};
    use crate::tensor::Pauli;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_8;

    fn random_data<R: Rng>(rng: &mut R, k: usize, n: usize) -> Dataset {
        let inputs = (0..k).map(|_| (0..n).map(|_| rng.random_range(0.0..=1.0)).collect()).collect();
        let targets = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        Dataset::new(inputs, targets).unwrap()
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![], vec![]).is_err());
        assert!(Dataset::new(vec![vec![1.2]], vec![0.0]).is_err());
        assert!(Dataset::new(vec![vec![0.2], vec![0.1, 0.3]], vec![0.0, 1.0]).is_err());
        assert!(Dataset::new(vec![vec![0.2]], vec![f64::NAN]).is_err());
        assert_eq!(Dataset::new(vec![vec![0.0, 1.0]], vec![0.3]).unwrap().dim(), 2);
    }

    #[test]
    fn cost_examples() {
        let arch = Architecture::non_entangling(1, 1, 1);
        let obs = build_observable(&ObservableSpec::local_sum(Pauli::Z, 1), 1).unwrap();
        // ω = 0, β = π/6, α = 0: F = cos(π/3) = 0.5
        let mut theta = ParameterSet::zeros(&arch);
        theta.slots[0].beta = std::f64::consts::PI / 6.0;
        let data = Dataset::new(vec![vec![0.4]], vec![0.0]).unwrap();
        assert!((cost(&arch, &theta, &data, &obs).unwrap() - 0.25).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let arch = Architecture::entangling(2, 2, 2);
        let obs = build_observable(&ObservableSpec::sigma_z_total(2), 2).unwrap();
        let theta = ParameterSet::random_default(&arch, &mut rng);
        let data = random_data(&mut rng, 30, 2);
        let brute: f64 = data
            .iter()
            .map(|(x, f)| (evaluate_output(&arch, &theta, x, &obs).unwrap() - f).powi(2))
            .sum::<f64>()
            / 30.0;
        assert!((cost(&arch, &theta, &data, &obs).unwrap() - brute).abs() < 1e-12);
        let targets = predictions(&arch, &theta, &data, &obs).unwrap();
        let own = Dataset::new(data.inputs().to_vec(), targets).unwrap();
        assert_eq!(cost(&arch, &theta, &own, &obs).unwrap(), 0.0);
        for m in [GradientMethod::Adjoint, GradientMethod::ParameterShift] {
            assert!(gradient(&arch, &theta, &own, &obs, m).unwrap().iter().all(|g| *g == 0.0));
        }
    }

    #[test]
    fn omega_free_single_layer_derivatives() {
        // ω = 0, α = 0, β = π/8: F = cos 2(ωx + β), so ∂/∂ω = x·∂/∂β per sample.
        let arch = Architecture::non_entangling(1, 1, 1);
        let obs = build_observable(&ObservableSpec::local_sum(Pauli::Z, 1), 1).unwrap();
        let mut theta = ParameterSet::zeros(&arch);
        theta.slots[0].beta = FRAC_PI_8;
        let (s, c) = (2.0 * FRAC_PI_8).sin_cos();
        // d/dβ cos²2β = −4 sin 2β cos 2β
        let per_sample = -4.0 * s * c;
        let data = Dataset::new(vec![vec![0.3], vec![0.9]], vec![0.0, 0.0]).unwrap();
        let at_origin = Dataset::new(vec![vec![0.0], vec![0.0]], vec![0.0, 0.0]).unwrap();
        for m in [GradientMethod::Adjoint, GradientMethod::ParameterShift] {
            let g = gradient(&arch, &theta, &data, &obs, m).unwrap();
            assert!((g[1] - per_sample).abs() < 1e-12, "{m:?}");
            assert!((g[0] - 0.6 * per_sample).abs() < 1e-12, "{m:?}");
            assert!(g[2].abs() < 1e-12, "{m:?}");
            let g = gradient(&arch, &theta, &at_origin, &obs, m).unwrap();
            assert_eq!(g[0], 0.0, "{m:?}");
        }
    }

    #[test]
    fn gradient_methods_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..12 {
            let q = 1 + case % 3;
            let arch = Architecture::non_entangling(1 + case % 4, q, 1 + case % 2)
                .with_entanglement(if case % 2 == 0 { Entanglement::AllLayers } else { Entanglement::None })
                .with_layer_kind(if case % 5 == 0 { LayerKind::Alternative } else { LayerKind::Standard });
            let arch = if q == 1 { arch.with_entanglement(Entanglement::None) } else { arch };
            let obs = build_observable(&ObservableSpec::sigma_z_total(q), q).unwrap();
            let theta = ParameterSet::random_default(&arch, &mut rng);
            let data = random_data(&mut rng, 5, arch.inputs);
            let adj = gradient(&arch, &theta, &data, &obs, GradientMethod::Adjoint).unwrap();
            let ps = gradient(&arch, &theta, &data, &obs, GradientMethod::ParameterShift).unwrap();
            let fd = gradient(&arch, &theta, &data, &obs, GradientMethod::FiniteDifference).unwrap();
            assert!(max_relative_deviation(&adj, &ps, 1e-12) < 1e-10, "{arch}");
            assert!(max_relative_deviation(&ps, &fd, 1e-8) < 1e-5, "{arch}");
        }
    }

    #[test]
    fn constant_target_is_fit() {
        let arch = Architecture::non_entangling(1, 1, 1);
        let obs = build_observable(&ObservableSpec::local_sum(Pauli::Z, 1), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inputs = (0..20).map(|_| vec![rng.random_range(0.0..=1.0)]).collect();
        let data = Dataset::new(inputs, vec![1.0; 20]).unwrap();
        // |cos| is quartic at its maximum, so the fit needs the step to keep growing.
        let config = TrainConfig { restarts: 3, learning_rate: 100.0, ..TrainConfig::default() };
        let result = train(&arch, &data, &obs, &config).unwrap();
        assert!(result.best_cost <= 1e-8, "{}", result.best_cost);
    }

    #[test]
    fn descent_is_monotone_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let arch = Architecture::non_entangling(3, 1, 1);
        let obs = build_observable(&ObservableSpec::local_sum(Pauli::Z, 1), 1).unwrap();
        let data = random_data(&mut rng, 25, 1);
        let config = TrainConfig { restarts: 3, max_iterations: 150, seed: 17, ..TrainConfig::default() };
        let a = train(&arch, &data, &obs, &config).unwrap();
        let b = train(&arch, &data, &obs, &config).unwrap();
        assert_eq!(a, b);
        for r in &a.restarts {
            assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
        assert_eq!(a.best_cost, a.restarts.iter().map(|r| r.final_cost).fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig { restarts: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { learning_rate: 0.0, ..TrainConfig::default() }.validate().is_err());
        let cfg: TrainConfig = serde_json::from_str(r#"{"restarts": 2}"#).unwrap();
        assert_eq!(cfg.max_iterations, 2000);
        assert!(serde_json::from_str::<TrainConfig>(r#"{"restart": 2}"#).is_err());
    }
}

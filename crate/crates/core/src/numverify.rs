//! Brute-force numeric oracles.
//!
//! [`minimize_objective`] searches directly over pure states and projective
//! qubit measurements for the smallest value of one outcome probability
//! subject to fixed probabilities elsewhere in the behavior. Constraints enter
//! through a quadratic penalty and the search is a derivative-free simplex
//! method, restarted from seeded random points. Probabilities are computed by
//! contracting the state with measurement kets, a route that shares nothing
//! with [`crate::quantum::born_behavior`]; the winning realization is checked
//! against `born_behavior` before it is returned.
//!
//! [`grid_oracle_f`] evaluates the Schmidt-coefficient bound on a dense grid
//! from the saturated amplitude form, independently of the closed form and
//! the refinement used by [`crate::analytic::maximize_f_over_a`].

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::analytic::{
    construct_tripartite_family, g_bound, gt_bound, objective_inputs, AnalyticError, FamilyKind,
};
use crate::matkernel::Complex;
use crate::quantum::{
    born_behavior, BinaryQubitMeasurement, MeasurementAssembly, PureState, QuantumError,
};
use crate::scenario::{one_based, Scenario, ScenarioError};

/// Largest constraint residual a restart may have to count.
pub const RESIDUAL_GATE: f64 = 1e-7;
/// Penalty weight of the main search.
pub const KAPPA: f64 = 1e6;
/// Penalty weight of the polish phase.
pub const POLISH_KAPPA: f64 = 1e8;
/// Simplex size (largest coordinate distance to the best vertex) at which a
/// simplex run stops.
pub const SIMPLEX_XTOL: f64 = 1e-12;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_RESTARTS: usize = 32;
/// Floor on the denominator of relative errors.
pub const RELATIVE_FLOOR: f64 = 1e-6;
/// Agreement required between the contraction route and `born_behavior`.
const REGENERATION_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum NumVerifyError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("no restart met the residual gate {gate:e}; best residual {best_residual:e} (value {best_value})")]
    ResidualGate {
        gate: f64,
        best_residual: f64,
        best_value: f64,
    },
    #[error("realization does not regenerate its constraints: deviation {0:e}")]
    Regeneration(f64),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

/// One outcome probability `P(outputs | inputs)` (0-based labels).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

impl Event {
    pub fn new(inputs: &[usize], outputs: &[usize]) -> Self {
        Event {
            inputs: inputs.to_vec(),
            outputs: outputs.to_vec(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "inputs": one_based(&self.inputs), "outputs": one_based(&self.outputs) })
    }
}

/// Constraint `P(outputs | inputs) = value`.
#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    pub event: Event,
    pub value: f64,
}

impl Target {
    pub fn new(inputs: &[usize], outputs: &[usize], value: f64) -> Self {
        Target {
            event: Event::new(inputs, outputs),
            value,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.event.to_json();
        v["value"] = json!(self.value);
        v
    }
}

/// How the state is parameterized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateModel {
    /// `cos ω |00⟩ + sin ω |11⟩`; local bases are absorbed into measurements.
    Schmidt,
    /// Normalized complex amplitude vector.
    Full,
}

impl StateModel {
    /// Schmidt form for two parties, full amplitudes otherwise.
    pub fn for_scenario(s: Scenario) -> Self {
        if s.parties() == 2 {
            StateModel::Schmidt
        } else {
            StateModel::Full
        }
    }

    fn state_params(self, parties: usize) -> usize {
        match self {
            StateModel::Schmidt => 1,
            StateModel::Full => 2 << parties,
        }
    }

    /// Inputs whose measurement carries free angles. With a general state,
    /// a local unitary turns the first measurement of every party into σ_z.
    fn free_inputs(self, inputs: usize) -> usize {
        match self {
            StateModel::Schmidt => inputs,
            StateModel::Full => inputs - 1,
        }
    }

    fn dim(self, parties: usize, inputs: usize) -> usize {
        self.state_params(parties) + 2 * parties * self.free_inputs(inputs)
    }

    fn angles(self, raw: &[f64], parties: usize, inputs: usize, p: usize, x: usize) -> [f64; 2] {
        let fixed = inputs - self.free_inputs(inputs);
        if x < fixed {
            return [0.0, 0.0];
        }
        let i = self.state_params(parties) + 2 * (p * self.free_inputs(inputs) + x - fixed);
        [raw[i], raw[i + 1]]
    }
}

/// A point of the search space: a normalized state and the Bloch angles
/// `(θ, φ)` of the outcome-0 projector of every party and input.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizationParams {
    pub model: StateModel,
    /// Schmidt coefficient `A` (two parties only).
    pub schmidt_a: Option<f64>,
    pub amplitudes: Vec<Complex>,
    /// `angles[party][input] = [θ, φ]`
    pub angles: Vec<Vec<[f64; 2]>>,
}

impl RealizationParams {
    fn from_raw(model: StateModel, parties: usize, inputs: usize, raw: &[f64]) -> Self {
        let (amplitudes, schmidt_a) = match model {
            StateModel::Schmidt => {
                let (a, b) = (raw[0].cos(), raw[0].sin());
                let mut amps = vec![Complex::ZERO; 4];
                amps[0] = Complex::real(a.abs());
                amps[3] = Complex::real(b.abs());
                (amps, Some(a.abs()))
            }
            StateModel::Full => {
                let dim = 1 << parties;
                let norm = raw[..2 * dim]
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt()
                    .max(f64::MIN_POSITIVE);
                let amps = (0..dim)
                    .map(|i| Complex::new(raw[2 * i] / norm, raw[2 * i + 1] / norm))
                    .collect();
                (amps, None)
            }
        };
        let angles = (0..parties)
            .map(|p| {
                (0..inputs)
                    .map(|x| model.angles(raw, parties, inputs, p, x))
                    .collect()
            })
            .collect();
        RealizationParams {
            model,
            schmidt_a,
            amplitudes,
            angles,
        }
    }

    pub fn state(&self) -> Result<PureState, QuantumError> {
        PureState::normalized(self.amplitudes.clone())
    }

    pub fn assembly(&self) -> Result<MeasurementAssembly, QuantumError> {
        MeasurementAssembly::new(
            self.angles
                .iter()
                .map(|party| {
                    party
                        .iter()
                        .map(|&[t, p]| BinaryQubitMeasurement::from_angles(t, p))
                        .collect()
                })
                .collect(),
        )
    }
}

/// Probabilities of a fixed list of events, evaluated by applying the local
/// measurement bases to the state, one input tuple at a time.
struct Evaluator {
    model: StateModel,
    parties: usize,
    inputs: usize,
    /// Distinct input tuples and, per event, (tuple slot, output index).
    settings: Vec<Vec<usize>>,
    lookup: Vec<(usize, usize)>,
}

impl Evaluator {
    fn new(model: StateModel, scenario: Scenario, events: &[Event]) -> Self {
        let mut settings: Vec<Vec<usize>> = Vec::new();
        let lookup = events
            .iter()
            .map(|e| {
                let slot = settings
                    .iter()
                    .position(|s| *s == e.inputs)
                    .unwrap_or_else(|| {
                        settings.push(e.inputs.clone());
                        settings.len() - 1
                    });
                (slot, scenario.output_index(&e.outputs))
            })
            .collect();
        Evaluator {
            model,
            parties: scenario.parties(),
            inputs: scenario.inputs(),
            settings,
            lookup,
        }
    }

    fn dim(&self) -> usize {
        self.model.dim(self.parties, self.inputs)
    }

    /// Probabilities of all events at the raw parameter vector.
    fn probabilities(&self, raw: &[f64], out: &mut Vec<f64>) {
        self.probabilities_with(raw, &mut Scratch::default(), out)
    }

    fn probabilities_with(&self, raw: &[f64], scratch: &mut Scratch, out: &mut Vec<f64>) {
        let (parties, dim) = (self.parties, 1usize << self.parties);
        let Scratch { psi, buf, u, probs } = scratch;
        psi.clear();
        psi.resize(dim, Complex::ZERO);
        match self.model {
            StateModel::Schmidt => {
                psi[0] = Complex::real(raw[0].cos().abs());
                psi[dim - 1] = Complex::real(raw[0].sin().abs());
            }
            StateModel::Full => {
                let norm = raw[..2 * dim]
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt()
                    .max(f64::MIN_POSITIVE);
                for (i, a) in psi.iter_mut().enumerate() {
                    *a = Complex::new(raw[2 * i] / norm, raw[2 * i + 1] / norm);
                }
            }
        }
        // rows of the conjugated basis change: u[p·inputs + x][a] = ⟨a_x|
        u.clear();
        for p in 0..parties {
            for x in 0..self.inputs {
                let [t, ph] = self.model.angles(raw, parties, self.inputs, p, x);
                let m = BinaryQubitMeasurement::from_angles(t, ph);
                let (k0, k1) = (m.ket(0), m.ket(1));
                u.push([[k0[0].conj(), k0[1].conj()], [k1[0].conj(), k1[1].conj()]]);
            }
        }
        probs.clear();
        probs.resize(self.settings.len() * dim, 0.0);
        buf.clear();
        buf.extend_from_slice(psi);
        for (slot, inputs) in self.settings.iter().enumerate() {
            buf.copy_from_slice(psi);
            for (p, &x) in inputs.iter().enumerate() {
                let m = u[p * self.inputs + x];
                let stride = 1 << (parties - 1 - p);
                for base in (0..dim).filter(|i| i & stride == 0) {
                    let (a0, a1) = (buf[base], buf[base | stride]);
                    buf[base] = m[0][0] * a0 + m[0][1] * a1;
                    buf[base | stride] = m[1][0] * a0 + m[1][1] * a1;
                }
            }
            for (o, a) in buf.iter().enumerate() {
                probs[slot * dim + o] = a.norm_sqr();
            }
        }
        out.clear();
        out.extend(self.lookup.iter().map(|&(slot, o)| probs[slot * dim + o]));
    }
}

#[derive(Default)]
struct Scratch {
    psi: Vec<Complex>,
    buf: Vec<Complex>,
    u: Vec<[[Complex; 2]; 2]>,
    probs: Vec<f64>,
}

/// Options of [`minimize_objective`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinimizeOptions {
    pub restarts: usize,
    pub seed: u64,
    pub residual_gate: f64,
    pub kappa: f64,
    pub polish_kappa: f64,
    pub xtol: f64,
    /// Cap on function evaluations of the main phase of a restart.
    pub max_evals: usize,
    /// Additional evaluations reserved for the polish phase.
    pub polish_evals: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            restarts: DEFAULT_RESTARTS,
            seed: DEFAULT_SEED,
            residual_gate: RESIDUAL_GATE,
            kappa: KAPPA,
            polish_kappa: POLISH_KAPPA,
            xtol: SIMPLEX_XTOL,
            max_evals: 400_000,
            polish_evals: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartOutcome {
    pub index: usize,
    pub seed: u64,
    pub value: f64,
    pub max_residual: f64,
    pub evaluations: usize,
    pub passed_gate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericMinimum {
    pub value: f64,
    pub max_residual: f64,
    /// Index of the winning restart.
    pub restart: usize,
    pub realization: RealizationParams,
    pub restarts: Vec<RestartOutcome>,
}

/// Minimizes `P(objective)` over realizations subject to `targets`, from
/// `opts.restarts` random starts (restart `r` is seeded with `seed + r`).
/// Returns the smallest value among restarts whose residuals all pass the
/// gate; ties go to the lower restart index.
pub fn minimize_objective(
    scenario: Scenario,
    targets: &[Target],
    objective: &Event,
    opts: &MinimizeOptions,
) -> Result<NumericMinimum, NumVerifyError> {
    if scenario.outputs() != 2 {
        return Err(NumVerifyError::Input(
            "only binary outcomes are supported".into(),
        ));
    }
    if opts.restarts == 0 {
        return Err(NumVerifyError::Input(
            "at least one restart is required".into(),
        ));
    }
    for e in targets
        .iter()
        .map(|t| &t.event)
        .chain(std::iter::once(objective))
    {
        scenario.check_inputs(&e.inputs)?;
        scenario.check_outputs(&e.outputs)?;
    }
    if let Some(t) = targets.iter().find(|t| !(0.0..=1.0).contains(&t.value)) {
        return Err(NumVerifyError::Input(format!(
            "target value {} outside [0, 1]",
            t.value
        )));
    }
    let mut events = vec![objective.clone()];
    events.extend(targets.iter().map(|t| t.event.clone()));
    let eval = Evaluator::new(StateModel::for_scenario(scenario), scenario, &events);
    let values: Vec<f64> = targets.iter().map(|t| t.value).collect();

    let runs: Vec<(RestartOutcome, Vec<f64>)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| single_restart(&eval, &values, r, opts))
        .collect();

    let best = runs
        .iter()
        .filter(|(o, _)| o.passed_gate)
        .min_by(|(a, _), (b, _)| a.value.total_cmp(&b.value).then(a.index.cmp(&b.index)));
    let Some((win, raw)) = best else {
        let closest = runs
            .iter()
            .min_by(|(a, _), (b, _)| a.max_residual.total_cmp(&b.max_residual))
            .map(|(o, _)| o)
            .expect("at least one restart");
        return Err(NumVerifyError::ResidualGate {
            gate: opts.residual_gate,
            best_residual: closest.max_residual,
            best_value: closest.value,
        });
    };
    let realization = RealizationParams::from_raw(eval.model, eval.parties, eval.inputs, raw);

    // independent regeneration through the Born-rule module
    let behavior = born_behavior(&realization.state()?, &realization.assembly()?)?;
    let mut dev = (behavior.prob(&objective.inputs, &objective.outputs) - win.value).abs();
    for t in targets {
        let p = behavior.prob(&t.event.inputs, &t.event.outputs);
        dev = dev.max((p - t.value).abs() - win.max_residual);
    }
    if dev > REGENERATION_TOL {
        return Err(NumVerifyError::Regeneration(dev));
    }

    Ok(NumericMinimum {
        value: win.value,
        max_residual: win.max_residual,
        restart: win.index,
        realization,
        restarts: runs.into_iter().map(|(o, _)| o).collect(),
    })
}

fn single_restart(
    eval: &Evaluator,
    values: &[f64],
    index: usize,
    opts: &MinimizeOptions,
) -> (RestartOutcome, Vec<f64>) {
    let seed = opts.seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = eval.model.state_params(eval.parties);
    let mut x: Vec<f64> = (0..eval.dim())
        .map(|i| {
            if i < k {
                match eval.model {
                    StateModel::Schmidt => rng.gen_range(0.0..PI / 2.0),
                    StateModel::Full => rng.gen_range(-1.0..1.0),
                }
            } else if (i - k).is_multiple_of(2) {
                rng.gen_range(0.0..PI)
            } else {
                rng.gen_range(0.0..2.0 * PI)
            }
        })
        .collect();

    let mut probs = Vec::with_capacity(values.len() + 1);
    let mut evaluations = 0;
    let mut scratch = Scratch::default();
    // warm-up stages at weaker penalties, then the main and polish weights
    let schedule = [
        (opts.kappa * 1e-4, 0.5, opts.xtol.max(1e-6), opts.max_evals),
        (opts.kappa * 1e-2, 0.1, opts.xtol.max(1e-8), opts.max_evals),
        (opts.kappa, 0.01, opts.xtol, opts.max_evals),
        (
            opts.polish_kappa,
            1e-3,
            opts.xtol,
            opts.max_evals + opts.polish_evals,
        ),
    ];
    for (kappa, step, xtol, budget) in schedule {
        let mut f = |p: &[f64]| {
            eval.probabilities_with(p, &mut scratch, &mut probs);
            let pen: f64 = probs[1..]
                .iter()
                .zip(values)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            probs[0] + kappa * pen
        };
        let mut fx = f(&x);
        evaluations += 1;
        // restart the simplex around the incumbent until it stops improving
        loop {
            let left = budget.saturating_sub(evaluations);
            if left == 0 {
                break;
            }
            let (nx, nf, used) = nelder_mead(&mut f, &x, step, xtol, left);
            evaluations += used;
            let gain = fx - nf;
            if nf < fx {
                x = nx;
                fx = nf;
            }
            if !(gain > 1e-15 * fx.abs().max(1e-12)) {
                break;
            }
        }
    }
    eval.probabilities(&x, &mut probs);
    let max_residual = probs[1..]
        .iter()
        .zip(values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let outcome = RestartOutcome {
        index,
        seed,
        value: probs[0],
        max_residual,
        evaluations,
        passed_gate: max_residual <= opts.residual_gate,
    };
    (outcome, x)
}

/// Nelder–Mead with dimension-adapted coefficients (Gao and Han). Stops when
/// every vertex lies within `xtol` of the best one in each coordinate or the
/// evaluation budget is spent. Returns the best vertex, its value and the
/// number of evaluations used.
fn nelder_mead(
    f: &mut impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    xtol: f64,
    max_evals: usize,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) =
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut simplex: Vec<Vec<f64>> = (0..=n)
        .map(|i| {
            let mut v = x0.to_vec();
            if i > 0 {
                v[i - 1] += step;
            }
            v
        })
        .collect();
    let mut fv: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    while evals < max_evals {
        order.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]).then(a.cmp(&b)));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);
        let size = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if size <= xtol {
            break;
        }
        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            centroid
                .iter_mut()
                .zip(&simplex[i])
                .for_each(|(c, v)| *c += v / nf);
        }
        let along = |t: &mut Vec<f64>, coef: f64| {
            for j in 0..n {
                t[j] = centroid[j] + coef * (centroid[j] - simplex[worst][j]);
            }
        };
        along(&mut trial, alpha);
        let fr = f(&trial);
        evals += 1;
        if fr < fv[best] {
            along(&mut trial2, alpha * beta);
            let fe = f(&trial2);
            evals += 1;
            if fe < fr {
                simplex[worst].copy_from_slice(&trial2);
                fv[worst] = fe;
            } else {
                simplex[worst].copy_from_slice(&trial);
                fv[worst] = fr;
            }
        } else if fr < fv[second] {
            simplex[worst].copy_from_slice(&trial);
            fv[worst] = fr;
        } else {
            let outside = fr < fv[worst];
            along(&mut trial2, if outside { alpha * gamma } else { -gamma });
            let fc = f(&trial2);
            evals += 1;
            if (outside && fc <= fr) || (!outside && fc < fv[worst]) {
                simplex[worst].copy_from_slice(&trial2);
                fv[worst] = fc;
            } else {
                let anchor = simplex[best].clone();
                for &i in &order[1..] {
                    for j in 0..n {
                        simplex[i][j] = anchor[j] + delta * (simplex[i][j] - anchor[j]);
                    }
                    fv[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| fv[a].total_cmp(&fv[b]).then(a.cmp(&b)))
        .expect("nonempty simplex");
    (simplex[best].clone(), fv[best], evals)
}

/// Constraints of the two-party program: uniform outcomes at inputs (1,1),
/// `P(1,1|1,2) = x`, `P(2,1|1,2) = 1/2 − x`, `P(1,1|2,1) = z`,
/// `P(1,2|2,1) = 1/2 − z` (1-based labels).
pub fn bipartite_targets(x: f64, z: f64) -> Vec<Target> {
    let mut t: Vec<Target> = Scenario::bipartite()
        .output_tuples()
        .map(|o| Target::new(&[0, 0], &o, 0.25))
        .collect();
    t.push(Target::new(&[0, 1], &[0, 0], x));
    t.push(Target::new(&[0, 1], &[1, 0], 0.5 - x));
    t.push(Target::new(&[1, 0], &[0, 0], z));
    t.push(Target::new(&[1, 0], &[0, 1], 0.5 - z));
    t
}

/// Constraints of the three-party program: uniform outcomes at inputs
/// (1,1,1) and the complete distributions of the GHZ family at (1,1,2),
/// (1,2,1) and (2,1,1), which include `P(1,1,1|1,1,2) = x` and
/// `P(1,1,1|1,2,1) = P(1,1,1|2,1,1) = z`.
pub fn tripartite_targets(x: f64, z: f64) -> Result<Vec<Target>, NumVerifyError> {
    let fam = construct_tripartite_family(x, z)?;
    let b = fam.behavior();
    let s = Scenario::tripartite();
    let mut t: Vec<Target> = s
        .output_tuples()
        .map(|o| Target::new(&[0, 0, 0], &o, 0.125))
        .collect();
    for inputs in [[0, 0, 1], [0, 1, 0], [1, 0, 0]] {
        t.extend(
            s.output_tuples()
                .map(|o| Target::new(&inputs, &o, b.prob(&inputs, &o))),
        );
    }
    Ok(t)
}

/// Comparison of the numeric minimum with the closed-form prediction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub kind: FamilyKind,
    pub x: f64,
    pub z: f64,
    #[serde(skip)]
    pub constraints: Vec<Target>,
    #[serde(skip)]
    pub objective: Event,
    pub prediction: f64,
    pub numeric_minimum: f64,
    pub absolute_error: f64,
    /// `|min − prediction| / max(prediction, 1e-6)`
    pub relative_error: f64,
    pub max_residual: f64,
    pub restarts: usize,
    pub restarts_passing_gate: usize,
    pub best_restart: usize,
    pub seed: u64,
    #[serde(skip)]
    pub realization: RealizationParams,
}

impl VerificationReport {
    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind,
            "x": self.x,
            "z": self.z,
            "constraints": self.constraints.iter().map(Target::to_json).collect::<Vec<_>>(),
            "objective": self.objective.to_json(),
            "prediction": self.prediction,
            "numeric_minimum": self.numeric_minimum,
            "absolute_error": self.absolute_error,
            "relative_error": self.relative_error,
            "max_residual": self.max_residual,
            "restarts": self.restarts,
            "restarts_passing_gate": self.restarts_passing_gate,
            "best_restart": self.best_restart,
            "seed": self.seed,
            "realization": self.realization,
        })
    }
}

/// Runs [`minimize_objective`] on the family program of `kind` at `(x, z)`
/// and compares with `g²/2` (two parties) or `g_T²/4` (three parties).
pub fn verify_family(
    kind: FamilyKind,
    x: f64,
    z: f64,
    opts: &MinimizeOptions,
) -> Result<VerificationReport, NumVerifyError> {
    let (scenario, targets, g, scale) = match kind {
        FamilyKind::Bipartite => (
            Scenario::bipartite(),
            bipartite_targets(x, z),
            g_bound(x, z)?,
            2.0,
        ),
        FamilyKind::Tripartite => (
            Scenario::tripartite(),
            tripartite_targets(x, z)?,
            gt_bound(x, z)?,
            4.0,
        ),
    };
    if g < 0.0 {
        return Err(AnalyticError::Infeasible { g }.into());
    }
    let prediction = g * g / scale;
    let inputs = objective_inputs(kind);
    let objective = Event::new(&inputs, &vec![0; inputs.len()]);
    let min = minimize_objective(scenario, &targets, &objective, opts)?;
    let absolute_error = (min.value - prediction).abs();
    Ok(VerificationReport {
        kind,
        x,
        z,
        constraints: targets,
        objective,
        prediction,
        numeric_minimum: min.value,
        absolute_error,
        relative_error: absolute_error / prediction.max(RELATIVE_FLOOR),
        max_residual: min.max_residual,
        restarts: opts.restarts,
        restarts_passing_gate: min.restarts.iter().filter(|r| r.passed_gate).count(),
        best_restart: min.restart,
        seed: opts.seed,
        realization: min.realization,
    })
}

/// Dense evaluation of the Schmidt-coefficient bound over `A ∈ [0, √min(s,t)]`
/// with `gridpoints` equally spaced points. Each value is the Cauchy–Schwarz
/// saturated amplitude `(A|α₁α₂| + B|β₁β₂|)²` built from the measurement
/// weights; the removable point `A² = 1/2` is skipped. Returns
/// `(A_best, f_best)`, ties going to the smaller `A`.
pub fn grid_oracle_f(s: f64, t: f64, gridpoints: usize) -> Result<(f64, f64), NumVerifyError> {
    if !(s > 0.0 && s <= 0.5 && t > 0.0 && t <= 0.5) {
        return Err(NumVerifyError::Input(format!(
            "(s, t) = ({s}, {t}) outside (0, 1/2]²"
        )));
    }
    if gridpoints < 1000 {
        return Err(NumVerifyError::Input(format!(
            "{gridpoints} grid points; at least 1000 are required"
        )));
    }
    let top = s.min(t).sqrt();
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..gridpoints {
        let a = if i + 1 == gridpoints {
            top
        } else {
            top * i as f64 / (gridpoints - 1) as f64
        };
        let a2 = a * a;
        let den = 1.0 - 2.0 * a2;
        if den.abs() < 1e-12 {
            continue;
        }
        let weight = |num: f64| (num / den).max(0.0).sqrt();
        let (al1, be1) = (weight(1.0 - s - a2), weight(s - a2));
        let (al2, be2) = (weight(1.0 - t - a2), weight(t - a2));
        let b = (1.0 - a2).max(0.0).sqrt();
        let amp = a * al1 * al2 + b * be1 * be2;
        let f = amp * amp;
        if f > best.1 {
            best = (a, f);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{construct_bipartite_family, maximize_f_over_a};

    #[test]
    fn contraction_matches_born_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in [Scenario::bipartite(), Scenario::tripartite()] {
            let model = StateModel::for_scenario(s);
            let events: Vec<Event> = s
                .input_tuples()
                .flat_map(|i| s.output_tuples().map(move |o| Event::new(&i, &o)))
                .collect();
            let eval = Evaluator::new(model, s, &events);
            for _ in 0..20 {
                let raw: Vec<f64> = (0..eval.dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let r = RealizationParams::from_raw(model, s.parties(), s.inputs(), &raw);
                let b = born_behavior(&r.state().unwrap(), &r.assembly().unwrap()).unwrap();
                let mut out = Vec::new();
                eval.probabilities(&raw, &mut out);
                for (e, p) in events.iter().zip(&out) {
                    assert!((b.prob(&e.inputs, &e.outputs) - p).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2) + 3.0;
        let (x, fx, _) = nelder_mead(&mut f, &[0.0, 0.0], 0.5, 1e-12, 100_000);
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] + 2.0).abs() < 1e-9);
        assert!((fx - 3.0).abs() < 1e-15);
    }

    #[test]
    fn targets_are_consistent_with_the_family() {
        let fam = construct_bipartite_family(0.45, 0.4).unwrap().behavior();
        for t in bipartite_targets(0.45, 0.4) {
            assert!((fam.prob(&t.event.inputs, &t.event.outputs) - t.value).abs() < 1e-12);
        }
        let t = tripartite_targets(0.24, 0.23).unwrap();
        assert_eq!(t.len(), 32);
        let pick = |i: [usize; 3]| {
            t.iter()
                .find(|t| t.event.inputs == i && t.event.outputs == [0, 0, 0])
                .unwrap()
                .value
        };
        assert!((pick([0, 0, 1]) - 0.24).abs() < 1e-12);
        assert!((pick([0, 1, 0]) - 0.23).abs() < 1e-12);
        assert!((pick([1, 0, 0]) - 0.23).abs() < 1e-12);
    }

    #[test]
    fn bipartite_family_point() {
        let opts = MinimizeOptions {
            restarts: 8,
            ..Default::default()
        };
        let r = verify_family(FamilyKind::Bipartite, 0.45, 0.45, &opts).unwrap();
        assert!(r.relative_error <= 1e-5, "{:?}", r.to_json());
        assert!(r.max_residual <= RESIDUAL_GATE);
    }

    #[test]
    fn degenerate_corner_has_zero_objective() {
        let opts = MinimizeOptions {
            restarts: 4,
            ..Default::default()
        };
        let r = verify_family(FamilyKind::Bipartite, 0.5, 0.25, &opts).unwrap();
        assert!(r.prediction.abs() < 1e-15);
        assert!(r.numeric_minimum.abs() <= 1e-7, "{}", r.numeric_minimum);
    }

    #[test]
    fn more_restarts_never_worsen_the_best() {
        let few = MinimizeOptions {
            restarts: 2,
            ..Default::default()
        };
        let many = MinimizeOptions {
            restarts: 5,
            ..Default::default()
        };
        let a = verify_family(FamilyKind::Bipartite, 0.45, 0.42, &few).unwrap();
        let b = verify_family(FamilyKind::Bipartite, 0.45, 0.42, &many).unwrap();
        assert!(b.numeric_minimum <= a.numeric_minimum);
    }

    #[test]
    fn reruns_are_identical() {
        let opts = MinimizeOptions {
            restarts: 3,
            ..Default::default()
        };
        let a = verify_family(FamilyKind::Bipartite, 0.45, 0.4, &opts).unwrap();
        let b = verify_family(FamilyKind::Bipartite, 0.45, 0.4, &opts).unwrap();
        assert_eq!(a.to_json().to_string(), b.to_json().to_string());
    }

    #[test]
    fn grid_oracle_agrees_with_refined_maximizer() {
        let (a, f) = grid_oracle_f(0.5, 0.5, 100_001).unwrap();
        let r = maximize_f_over_a(0.5, 0.5).unwrap();
        assert!((f - r.f_star).abs() <= 1e-8, "{f} vs {}", r.f_star);
        assert!((a - r.a_star).abs() < 1e-3);
        // at s = t = 1/4 the maximum sits on the A² = s boundary
        let (a, f) = grid_oracle_f(0.25, 0.25, 1001).unwrap();
        assert!((a * a - 0.25).abs() < 1e-15);
        assert!((f - 0.25).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (s, t) = (rng.gen_range(0.01..0.5), rng.gen_range(0.01..0.5));
            let (_, f) = grid_oracle_f(s, t, 200_001).unwrap();
            let r = maximize_f_over_a(s, t).unwrap();
            assert!(
                (f - r.f_star).abs() <= 1e-7,
                "({s}, {t}): {f} vs {}",
                r.f_star
            );
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(grid_oracle_f(0.6, 0.2, 1000).is_err());
        assert!(grid_oracle_f(0.2, 0.2, 10).is_err());
        let opts = MinimizeOptions {
            restarts: 0,
            ..Default::default()
        };
        assert!(verify_family(FamilyKind::Bipartite, 0.45, 0.45, &opts).is_err());
        assert!(
            verify_family(FamilyKind::Bipartite, 0.1, 0.1, &MinimizeOptions::default()).is_err()
        );
    }
}

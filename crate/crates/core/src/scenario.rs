//! Bell-scenario data model.
//!
//! Index convention: inputs and outputs are 0-based in memory. In files and
//! user-facing text they are 1-based, so "input 1" is index 0. A behavior
//! table is stored with the input tuple as the outer index and the output
//! tuple as the inner one; within a tuple, party 0 is the most significant
//! digit.
//!
//! Correlators map output index 0 to +1 and output index 1 to −1.

use serde_json::{Map, Value};
use thiserror::Error;

/// Entries may undershoot 0 or overshoot 1 by this much before being flagged.
pub const ENTRY_TOL: f64 = 1e-12;
/// Tolerance on `Σ_a P(a|x) = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// No-signaling deviations above this are reported as warnings.
pub const SIGNALING_WARN_TOL: f64 = 1e-10;
/// No-signaling deviations above this are hard errors.
pub const SIGNALING_ERROR_TOL: f64 = 1e-8;
/// Parser rejects per-tuple totals further than this from 1.
pub const PARSE_TOTAL_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario (parties={parties}, inputs={inputs}, outputs={outputs}): {reason}")]
    InvalidScenario {
        parties: usize,
        inputs: usize,
        outputs: usize,
        reason: String,
    },
    #[error("behavior table has {got} entries, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },
    #[error("marginal of party {party} is ill-defined: signaling deviation {deviation:e}")]
    Signaling { party: usize, deviation: f64 },
    #[error("operation requires scenario {required}, got {got}")]
    WrongScenario { required: String, got: String },
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Scenario {
    parties: usize,
    inputs: usize,
    outputs: usize,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.parties, self.inputs, self.outputs)
    }
}

impl Scenario {
    pub fn new(parties: usize, inputs: usize, outputs: usize) -> Result<Self, ScenarioError> {
        let bad = |reason: &str| ScenarioError::InvalidScenario {
            parties,
            inputs,
            outputs,
            reason: reason.to_string(),
        };
        if parties < 1 {
            return Err(bad("need at least one party"));
        }
        if inputs < 1 {
            return Err(bad("need at least one input per party"));
        }
        if outputs < 2 {
            return Err(bad("need at least two outputs per party"));
        }
        let size = inputs.checked_pow(parties as u32).and_then(|a| {
            outputs
                .checked_pow(parties as u32)
                .and_then(|b| a.checked_mul(b))
        });
        match size {
            Some(s) if s <= 1 << 24 => {}
            _ => return Err(bad("behavior table too large")),
        }
        Ok(Scenario {
            parties,
            inputs,
            outputs,
        })
    }

    /// The CHSH scenario (2,2,2).
    pub fn bipartite() -> Self {
        Scenario {
            parties: 2,
            inputs: 2,
            outputs: 2,
        }
    }

    /// (3,2,2)
    pub fn tripartite() -> Self {
        Scenario {
            parties: 3,
            inputs: 2,
            outputs: 2,
        }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn num_input_tuples(&self) -> usize {
        self.inputs.pow(self.parties as u32)
    }

    pub fn num_output_tuples(&self) -> usize {
        self.outputs.pow(self.parties as u32)
    }

    pub fn table_len(&self) -> usize {
        self.num_input_tuples() * self.num_output_tuples()
    }

    pub fn input_index(&self, inputs: &[usize]) -> usize {
        encode(inputs, self.inputs)
    }

    pub fn output_index(&self, outputs: &[usize]) -> usize {
        encode(outputs, self.outputs)
    }

    pub fn input_tuple(&self, index: usize) -> Vec<usize> {
        decode(index, self.inputs, self.parties)
    }

    pub fn output_tuple(&self, index: usize) -> Vec<usize> {
        decode(index, self.outputs, self.parties)
    }

    pub fn input_tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_input_tuples()).map(|i| self.input_tuple(i))
    }

    pub fn output_tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_output_tuples()).map(|i| self.output_tuple(i))
    }

    pub fn check_inputs(&self, inputs: &[usize]) -> Result<(), ScenarioError> {
        if inputs.len() != self.parties || inputs.iter().any(|&x| x >= self.inputs) {
            return Err(ScenarioError::OutOfRange {
                what: "input tuple",
                detail: format!("{} for scenario {}", one_based(inputs), self),
            });
        }
        Ok(())
    }

    pub fn check_outputs(&self, outputs: &[usize]) -> Result<(), ScenarioError> {
        if outputs.len() != self.parties || outputs.iter().any(|&a| a >= self.outputs) {
            return Err(ScenarioError::OutOfRange {
                what: "output tuple",
                detail: format!("{} for scenario {}", one_based(outputs), self),
            });
        }
        Ok(())
    }
}

fn encode(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * base + d)
}

fn decode(mut index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// Formats a 0-based tuple with 1-based labels, e.g. `[0,1]` → `"1,2"`.
pub fn one_based(tuple: &[usize]) -> String {
    tuple
        .iter()
        .map(|v| (v + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses `"1,2"` into `[0, 1]`.
pub fn parse_one_based(s: &str) -> Option<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .map(|v| v - 1)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Negative,
    AboveOne,
    Normalization,
    Signaling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub severity: Severity,
    pub max_violation: f64,
    pub location: String,
}

/// Result of [`Behavior::validate`]. Lists at most one entry per kind, carrying
/// the worst offender.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// True when no violation reaches error severity.
    pub fn is_valid(&self) -> bool {
        self.violations
            .iter()
            .all(|v| v.severity == Severity::Warning)
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_violation(&self, kind: ViolationKind) -> f64 {
        self.violations
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.max_violation)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.violations
                .iter()
                .map(|v| {
                    serde_json::json!({
                        "kind": format!("{:?}", v.kind),
                        "severity": format!("{:?}", v.severity),
                        "max_violation": v.max_violation,
                        "location": v.location,
                    })
                })
                .collect(),
        )
    }
}

/// Full conditional probability table `P(a⃗|x⃗)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Behavior {
    scenario: Scenario,
    table: Vec<f64>,
}

impl Behavior {
    pub fn new(scenario: Scenario, table: Vec<f64>) -> Result<Self, ScenarioError> {
        if table.len() != scenario.table_len() {
            return Err(ScenarioError::Shape {
                expected: scenario.table_len(),
                got: table.len(),
            });
        }
        Ok(Behavior { scenario, table })
    }

    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(&[usize], &[usize]) -> f64) -> Self {
        let mut table = Vec::with_capacity(scenario.table_len());
        for x in scenario.input_tuples() {
            for a in scenario.output_tuples() {
                table.push(f(&x, &a));
            }
        }
        Behavior { scenario, table }
    }

    /// Every entry equal to `1/n^p`.
    pub fn uniform(scenario: Scenario) -> Self {
        let v = 1.0 / scenario.num_output_tuples() as f64;
        Behavior {
            scenario,
            table: vec![v; scenario.table_len()],
        }
    }

    /// Local deterministic behavior: party `i` answers `strategy[i][x_i]`.
    pub fn deterministic(
        scenario: Scenario,
        strategy: &[Vec<usize>],
    ) -> Result<Self, ScenarioError> {
        if strategy.len() != scenario.parties()
            || strategy
                .iter()
                .any(|s| s.len() != scenario.inputs() || s.iter().any(|&a| a >= scenario.outputs()))
        {
            return Err(ScenarioError::OutOfRange {
                what: "deterministic strategy",
                detail: format!("{strategy:?} for scenario {scenario}"),
            });
        }
        Ok(Self::from_fn(scenario, |x, a| {
            let hit = (0..x.len()).all(|i| strategy[i][x[i]] == a[i]);
            if hit {
                1.0
            } else {
                0.0
            }
        }))
    }

    /// All `n^(m·p)` local deterministic behaviors.
    pub fn all_deterministic(scenario: Scenario) -> Vec<Self> {
        let (p, m, n) = (scenario.parties(), scenario.inputs(), scenario.outputs());
        let count = n.pow((m * p) as u32);
        (0..count)
            .map(|code| {
                let digits = decode(code, n, m * p);
                let strategy: Vec<Vec<usize>> = digits.chunks(m).map(|c| c.to_vec()).collect();
                Self::deterministic(scenario, &strategy).expect("strategy in range")
            })
            .collect()
    }

    /// The PR box: `P(a,b|x,y) = 1/2` iff `a ⊕ b = x·y` (0-based labels).
    pub fn pr_box() -> Self {
        Self::from_fn(Scenario::bipartite(), |x, a| {
            if (a[0] ^ a[1]) == (x[0] & x[1]) {
                0.5
            } else {
                0.0
            }
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    fn offset(&self, inputs: &[usize]) -> usize {
        self.scenario.input_index(inputs) * self.scenario.num_output_tuples()
    }

    /// `P(a⃗|x⃗)` with 0-based labels.
    pub fn prob(&self, inputs: &[usize], outputs: &[usize]) -> f64 {
        self.table[self.offset(inputs) + self.scenario.output_index(outputs)]
    }

    /// The distribution `P(·|x⃗)` as a slice ordered by output index.
    pub fn distribution(&self, inputs: &[usize]) -> &[f64] {
        let off = self.offset(inputs);
        &self.table[off..off + self.scenario.num_output_tuples()]
    }

    /// Relabels outputs: party `i` output `a` becomes `perms[i][a]`.
    pub fn relabel_outputs(&self, perms: &[Vec<usize>]) -> Self {
        let sc = self.scenario;
        let mut table = vec![0.0; self.table.len()];
        for x in sc.input_tuples() {
            for a in sc.output_tuples() {
                let b: Vec<usize> = a.iter().enumerate().map(|(i, &ai)| perms[i][ai]).collect();
                table[self.offset(&x) + sc.output_index(&b)] = self.prob(&x, &a);
            }
        }
        Behavior {
            scenario: sc,
            table,
        }
    }

    /// Convex mixture `w·self + (1−w)·other`.
    pub fn mix(&self, other: &Behavior, w: f64) -> Result<Self, ScenarioError> {
        if self.scenario != other.scenario {
            return Err(ScenarioError::WrongScenario {
                required: self.scenario.to_string(),
                got: other.scenario.to_string(),
            });
        }
        Ok(Behavior {
            scenario: self.scenario,
            table: self
                .table
                .iter()
                .zip(&other.table)
                .map(|(a, b)| w * a + (1.0 - w) * b)
                .collect(),
        })
    }

    /// Marginal over the parties in `subset` (sorted party indices) at inputs
    /// `x⃗`, as a table indexed by the subset's output tuple.
    fn subset_marginal(&self, subset: &[usize], inputs: &[usize]) -> Vec<f64> {
        let sc = self.scenario;
        let n = sc.outputs();
        let mut out = vec![0.0; n.pow(subset.len() as u32)];
        let dist = self.distribution(inputs);
        for (k, &p) in dist.iter().enumerate() {
            let a = sc.output_tuple(k);
            let idx = subset.iter().fold(0, |acc, &i| acc * n + a[i]);
            out[idx] += p;
        }
        out
    }

    /// Largest change of any proper-subset marginal when the complement's
    /// inputs vary, with the offending subset.
    fn worst_signaling(&self) -> (f64, Vec<usize>) {
        let sc = self.scenario;
        let p = sc.parties();
        let mut worst = (0.0, Vec::new());
        for mask in 1..(1usize << p) - 1 {
            let subset: Vec<usize> = (0..p).filter(|i| mask >> i & 1 == 1).collect();
            // reference marginal per subset-input assignment
            let mut reference: Vec<Option<Vec<f64>>> =
                vec![None; sc.inputs().pow(subset.len() as u32)];
            for x in sc.input_tuples() {
                let key = subset.iter().fold(0, |acc, &i| acc * sc.inputs() + x[i]);
                let m = self.subset_marginal(&subset, &x);
                match &reference[key] {
                    None => reference[key] = Some(m),
                    Some(r) => {
                        let dev = r
                            .iter()
                            .zip(&m)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        if dev > worst.0 {
                            worst = (dev, subset.clone());
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn validate(&self) -> ValidationReport {
        let sc = self.scenario;
        let mut violations = Vec::new();

        let mut neg = (0.0, 0usize);
        let mut high = (0.0, 0usize);
        for (k, &v) in self.table.iter().enumerate() {
            if -v > neg.0 {
                neg = (-v, k);
            }
            if v - 1.0 > high.0 {
                high = (v - 1.0, k);
            }
        }
        let loc = |k: usize| {
            let x = sc.input_tuple(k / sc.num_output_tuples());
            let a = sc.output_tuple(k % sc.num_output_tuples());
            format!("P({}|{})", one_based(&a), one_based(&x))
        };
        if neg.0 > ENTRY_TOL {
            violations.push(Violation {
                kind: ViolationKind::Negative,
                severity: Severity::Error,
                max_violation: neg.0,
                location: loc(neg.1),
            });
        }
        if high.0 > ENTRY_TOL {
            violations.push(Violation {
                kind: ViolationKind::AboveOne,
                severity: Severity::Error,
                max_violation: high.0,
                location: loc(high.1),
            });
        }

        let mut norm = (0.0, Vec::new());
        for x in sc.input_tuples() {
            let dev = (self.distribution(&x).iter().sum::<f64>() - 1.0).abs();
            if dev > norm.0 {
                norm = (dev, x);
            }
        }
        if norm.0 > NORMALIZATION_TOL {
            violations.push(Violation {
                kind: ViolationKind::Normalization,
                severity: Severity::Error,
                max_violation: norm.0,
                location: format!("inputs {}", one_based(&norm.1)),
            });
        }

        let (sig, subset) = self.worst_signaling();
        if sig > SIGNALING_WARN_TOL {
            violations.push(Violation {
                kind: ViolationKind::Signaling,
                severity: if sig > SIGNALING_ERROR_TOL {
                    Severity::Error
                } else {
                    Severity::Warning
                },
                max_violation: sig,
                location: format!("marginal of parties {}", one_based(&subset)),
            });
        }
        ValidationReport { violations }
    }

    /// Distribution of `party`'s outputs when it uses `input`, summed over the
    /// other parties' outputs with their inputs set to index 0.
    pub fn marginal(&self, party: usize, input: usize) -> Result<Vec<f64>, ScenarioError> {
        let sc = self.scenario;
        if party >= sc.parties() || input >= sc.inputs() {
            return Err(ScenarioError::OutOfRange {
                what: "party/input",
                detail: format!(
                    "party {} input {} for scenario {}",
                    party + 1,
                    input + 1,
                    sc
                ),
            });
        }
        let mut reference: Option<Vec<f64>> = None;
        let mut worst: f64 = 0.0;
        for x in sc.input_tuples().filter(|x| x[party] == input) {
            let m = self.subset_marginal(&[party], &x);
            match &reference {
                None => reference = Some(m),
                Some(r) => {
                    worst = r
                        .iter()
                        .zip(&m)
                        .map(|(a, b)| (a - b).abs())
                        .fold(worst, f64::max);
                }
            }
        }
        if worst > SIGNALING_ERROR_TOL {
            return Err(ScenarioError::Signaling {
                party,
                deviation: worst,
            });
        }
        Ok(reference.expect("at least one input tuple"))
    }

    /// Probability that every party in `ops` (pairs of party, input; distinct
    /// parties) outputs index 0, with unlisted parties at input 0 and summed out.
    pub fn first_outcome_moment(&self, ops: &[(usize, usize)]) -> f64 {
        let sc = self.scenario;
        let mut inputs = vec![0; sc.parties()];
        for &(party, x) in ops {
            inputs[party] = x;
        }
        self.distribution(&inputs)
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let a = sc.output_tuple(*k);
                ops.iter().all(|&(party, _)| a[party] == 0)
            })
            .map(|(_, p)| p)
            .sum()
    }

    /// `max_a⃗ |P(a⃗|settings) − 1/n^p|`
    pub fn uniformity_deviation(&self, settings: &[usize]) -> Result<f64, ScenarioError> {
        self.scenario.check_inputs(settings)?;
        let target = 1.0 / self.scenario.num_output_tuples() as f64;
        Ok(self
            .distribution(settings)
            .iter()
            .map(|p| (p - target).abs())
            .fold(0.0, f64::max))
    }

    /// Whether the outputs at `settings` are uniform within `tol`, with the
    /// maximal deviation.
    pub fn uniformity_check(
        &self,
        settings: &[usize],
        tol: f64,
    ) -> Result<(bool, f64), ScenarioError> {
        let dev = self.uniformity_deviation(settings)?;
        Ok((dev <= tol, dev))
    }

    /// `⟨A_x B_y⟩ = Σ (−1)^{a+b} P(a,b|x,y)` for a (2,2,2) behavior.
    pub fn correlator(&self, x: usize, y: usize) -> Result<f64, ScenarioError> {
        self.require_chsh()?;
        let d = self.distribution(&[x, y]);
        Ok(d[0] - d[1] - d[2] + d[3])
    }

    /// CHSH value `⟨A₁B₁⟩+⟨A₁B₂⟩+⟨A₂B₁⟩−⟨A₂B₂⟩`.
    pub fn chsh_value(&self) -> Result<f64, ScenarioError> {
        self.require_chsh()?;
        Ok(
            self.correlator(0, 0)? + self.correlator(0, 1)? + self.correlator(1, 0)?
                - self.correlator(1, 1)?,
        )
    }

    fn require_chsh(&self) -> Result<(), ScenarioError> {
        if self.scenario != Scenario::bipartite() {
            return Err(ScenarioError::WrongScenario {
                required: Scenario::bipartite().to_string(),
                got: self.scenario.to_string(),
            });
        }
        Ok(())
    }

    /// Serializes to the behavior file format with 1-based keys.
    pub fn to_json(&self) -> Value {
        let sc = self.scenario;
        let mut p = Map::new();
        for x in sc.input_tuples() {
            let mut inner = Map::new();
            for a in sc.output_tuples() {
                inner.insert(one_based(&a), Value::from(self.prob(&x, &a)));
            }
            p.insert(one_based(&x), Value::Object(inner));
        }
        serde_json::json!({
            "parties": sc.parties(),
            "inputs": sc.inputs(),
            "outputs": sc.outputs(),
            "p": p,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("behavior serializes") + "\n"
    }

    pub fn from_json_str(s: &str) -> Result<Self, ScenarioError> {
        let v: Value = serde_json::from_str(s).map_err(|e| ScenarioError::Parse {
            path: "$".into(),
            message: e.to_string(),
        })?;
        Self::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<Self, ScenarioError> {
        let perr = |path: String, message: &str| ScenarioError::Parse {
            path,
            message: message.to_string(),
        };
        let obj = v
            .as_object()
            .ok_or_else(|| perr("$".into(), "expected an object"))?;
        let count = |key: &str| -> Result<usize, ScenarioError> {
            obj.get(key)
                .ok_or_else(|| perr(format!("$.{key}"), "missing field"))?
                .as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| perr(format!("$.{key}"), "expected a non-negative integer"))
        };
        let sc = Scenario::new(count("parties")?, count("inputs")?, count("outputs")?)
            .map_err(|e| perr("$".into(), &e.to_string()))?;
        let p = obj
            .get("p")
            .ok_or_else(|| perr("$.p".into(), "missing field"))?
            .as_object()
            .ok_or_else(|| perr("$.p".into(), "expected an object"))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "parties" | "inputs" | "outputs" | "p") {
                return Err(perr(format!("$.{key}"), "unknown field"));
            }
        }
        for key in p.keys() {
            match parse_one_based(key) {
                Some(x) if sc.check_inputs(&x).is_ok() => {}
                _ => return Err(perr(format!("$.p[\"{key}\"]"), "not a valid input tuple")),
            }
        }

        let mut table = Vec::with_capacity(sc.table_len());
        for x in sc.input_tuples() {
            let xk = one_based(&x);
            let inner = p
                .get(&xk)
                .ok_or_else(|| {
                    perr(
                        format!("$.p[\"{xk}\"]"),
                        &format!("missing input tuple {xk}"),
                    )
                })?
                .as_object()
                .ok_or_else(|| perr(format!("$.p[\"{xk}\"]"), "expected an object"))?;
            for key in inner.keys() {
                match parse_one_based(key) {
                    Some(a) if sc.check_outputs(&a).is_ok() => {}
                    _ => {
                        return Err(perr(
                            format!("$.p[\"{xk}\"][\"{key}\"]"),
                            "not a valid output tuple",
                        ))
                    }
                }
            }
            let mut total = 0.0;
            for a in sc.output_tuples() {
                let ak = one_based(&a);
                let path = format!("$.p[\"{xk}\"][\"{ak}\"]");
                let val = inner
                    .get(&ak)
                    .ok_or_else(|| perr(path.clone(), &format!("missing output tuple {ak}")))?
                    .as_f64()
                    .ok_or_else(|| perr(path.clone(), "expected a number"))?;
                total += val;
                table.push(val);
            }
            if (total - 1.0).abs() > PARSE_TOTAL_TOL {
                return Err(perr(
                    format!("$.p[\"{xk}\"]"),
                    &format!("probabilities for input tuple {xk} sum to {total}"),
                ));
            }
        }
        Behavior::new(sc, table)
    }
}

/// Constraint constants selecting a point of the maximal-randomness family.
/// `s = z + w` and `t = x + y` are the second-setting marginals of the first
/// and second party.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FamilyParams {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
    pub s: f64,
    pub t: f64,
}

impl FamilyParams {
    pub fn new(x: f64, y: f64, z: f64, w: f64) -> Result<Self, ScenarioError> {
        for (name, v) in [("x", x), ("y", y), ("z", z), ("w", w)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ScenarioError::OutOfRange {
                    what: "family parameter",
                    detail: format!("{name} = {v}"),
                });
            }
        }
        let s = z + w;
        let t = x + y;
        if s > 1.0 + ENTRY_TOL || t > 1.0 + ENTRY_TOL {
            return Err(ScenarioError::OutOfRange {
                what: "family marginal",
                detail: format!("s = {s}, t = {t}"),
            });
        }
        Ok(FamilyParams { x, y, z, w, s, t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bip() -> Scenario {
        Scenario::bipartite()
    }

    #[test]
    fn index_round_trip() {
        let sc = Scenario::new(3, 2, 3).unwrap();
        for i in 0..sc.num_output_tuples() {
            assert_eq!(sc.output_index(&sc.output_tuple(i)), i);
        }
        assert_eq!(sc.input_tuple(5), vec![1, 0, 1]);
        assert!(Scenario::new(0, 2, 2).is_err());
        assert!(Scenario::new(2, 2, 1).is_err());
    }

    #[test]
    fn uniform_behavior_is_valid() {
        let b = Behavior::uniform(bip());
        assert!(b.validate().is_clean());
    }

    #[test]
    fn negative_entry_reported() {
        let mut t = Behavior::uniform(bip()).table().to_vec();
        t[0] = -0.1;
        t[1] = 0.45;
        let r = Behavior::new(bip(), t).unwrap().validate();
        assert!(!r.is_valid());
        assert!((r.max_violation(ViolationKind::Negative) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn signaling_reported() {
        // Alice's x=1 marginal is (0.5,0.5) at y=1 and (0.7,0.3) at y=2
        let b = Behavior::from_fn(bip(), |x, a| match (x, a) {
            ([0, 1], [0, _]) => 0.35,
            ([0, 1], [1, _]) => 0.15,
            _ => 0.25,
        });
        let r = b.validate();
        assert!(!r.is_valid());
        assert!((r.max_violation(ViolationKind::Signaling) - 0.2).abs() < 1e-12);
        assert!(matches!(
            b.marginal(0, 0),
            Err(ScenarioError::Signaling { .. })
        ));
    }

    #[test]
    fn small_signaling_is_only_a_warning() {
        let b = Behavior::from_fn(bip(), |x, a| match (x, a) {
            ([0, 1], [0, _]) => 0.25 + 5e-10,
            ([0, 1], [1, _]) => 0.25 - 5e-10,
            _ => 0.25,
        });
        let r = b.validate();
        assert!(r.is_valid());
        assert!(!r.is_clean());
    }

    #[test]
    fn shape_mismatch_is_structural() {
        assert!(matches!(
            Behavior::new(bip(), vec![0.25; 15]),
            Err(ScenarioError::Shape {
                expected: 16,
                got: 15
            })
        ));
    }

    #[test]
    fn marginals() {
        let b = Behavior::uniform(bip());
        assert_eq!(b.marginal(0, 1).unwrap(), vec![0.5, 0.5]);
        let d = Behavior::deterministic(bip(), &[vec![0, 0], vec![0, 0]]).unwrap();
        assert_eq!(d.marginal(1, 0).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn uniformity() {
        let (ok, dev) = Behavior::uniform(bip())
            .uniformity_check(&[0, 0], 1e-12)
            .unwrap();
        assert!(ok && dev == 0.0);
        let d = Behavior::deterministic(bip(), &[vec![0, 0], vec![0, 0]]).unwrap();
        let (ok, dev) = d.uniformity_check(&[0, 0], 1e-6).unwrap();
        assert!(!ok);
        assert_eq!(dev, 0.75);
        assert!(d.uniformity_check(&[0, 2], 1e-6).is_err());
    }

    #[test]
    fn chsh_examples() {
        assert_eq!(Behavior::pr_box().chsh_value().unwrap(), 4.0);
        let d = Behavior::deterministic(bip(), &[vec![0, 0], vec![0, 0]]).unwrap();
        assert_eq!(d.chsh_value().unwrap(), 2.0);
        assert!(Behavior::uniform(Scenario::tripartite())
            .chsh_value()
            .is_err());
    }

    #[test]
    fn local_deterministic_chsh_bounded_by_two() {
        let all = Behavior::all_deterministic(bip());
        assert_eq!(all.len(), 16);
        for b in all {
            assert!(b.validate().is_clean());
            assert!(b.chsh_value().unwrap().abs() <= 2.0);
        }
    }

    #[test]
    fn chsh_invariant_under_joint_relabeling() {
        let b = Behavior::pr_box()
            .mix(&Behavior::uniform(bip()), 0.7)
            .unwrap();
        let flipped = b.relabel_outputs(&[vec![1, 0], vec![1, 0]]);
        assert!((b.chsh_value().unwrap() - flipped.chsh_value().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let b = Behavior::pr_box()
            .mix(&Behavior::uniform(bip()), 0.3)
            .unwrap();
        let s = b.to_json_string();
        assert_eq!(Behavior::from_json_str(&s).unwrap(), b);
        let u = Behavior::uniform(bip());
        assert_eq!(Behavior::from_json_str(&u.to_json_string()).unwrap(), u);
    }

    #[test]
    fn json_missing_tuple_named() {
        let mut v = Behavior::uniform(bip()).to_json();
        v["p"].as_object_mut().unwrap().remove("2,1");
        let err = Behavior::from_json(&v).unwrap_err();
        match err {
            ScenarioError::Parse { path, message } => {
                assert!(path.contains("2,1"));
                assert!(message.contains("2,1"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_bad_total_rejected() {
        let mut v = Behavior::uniform(bip()).to_json();
        v["p"]["1,2"]["2,2"] = Value::from(0.3);
        assert!(Behavior::from_json(&v).is_err());
        let mut v = Behavior::uniform(bip()).to_json();
        v["p"]["1,2"]["2,2"] = Value::from("x");
        let err = Behavior::from_json(&v).unwrap_err().to_string();
        assert!(err.contains("$.p[\"1,2\"][\"2,2\"]"), "{err}");
    }

    #[test]
    fn json_tripartite_shape() {
        let b = Behavior::uniform(Scenario::tripartite());
        let parsed = Behavior::from_json_str(&b.to_json_string()).unwrap();
        assert_eq!(parsed.scenario(), Scenario::tripartite());
        assert!(parsed.validate().is_clean());
    }

    #[test]
    fn family_params_sums() {
        let f = FamilyParams::new(0.45, 0.05, 0.45, 0.05).unwrap();
        assert!((f.s - 0.5).abs() < 1e-15 && (f.t - 0.5).abs() < 1e-15);
        assert!(FamilyParams::new(1.2, 0.0, 0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn marginals_are_probability_vectors(w in 0.0f64..=1.0, v in 0.0f64..=1.0) {
            let b = Behavior::pr_box()
                .mix(&Behavior::uniform(bip()), w).unwrap()
                .mix(&Behavior::deterministic(bip(), &[vec![0, 1], vec![1, 1]]).unwrap(), v).unwrap();
            for party in 0..2 {
                for x in 0..2 {
                    let m = b.marginal(party, x).unwrap();
                    prop_assert!((m.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
                    prop_assert!(m.iter().all(|&p| p >= -1e-12));
                }
            }
        }
    }
}

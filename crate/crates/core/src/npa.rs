//! Moment-matrix relaxations of the quantum set for binary-outcome scenarios,
//! membership tests, and the guessing-probability program that upper-bounds
//! an eavesdropper's knowledge of the outcomes at chosen settings.
//!
//! Each binary measurement contributes one projector (the first outcome); the
//! second outcome is `I − P`. Operator words are products of such projectors,
//! canonicalized by commuting different parties' operators past each other and
//! collapsing `P² = P`. Moment matrices are taken real symmetric, which loses
//! nothing: the real part of a feasible complex moment matrix is feasible.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::scenario::{one_based, Behavior, Scenario, ScenarioError};
use crate::sdpcore::{
    restrict, solve, Block, FaceBasis, LinearFunctional, Residuals, SdpError, SdpOptions,
    SdpProblem, SdpStatus, ACCEPT_TOL,
};

/// Membership is accepted when the best eigenvalue margin of the moment matrix
/// is at least `-MEMBERSHIP_TOL`.
pub const MEMBERSHIP_TOL: f64 = 1e-6;
/// Largest relative dual residual for which the dual objective is trusted.
pub const DUAL_CERT_TOL: f64 = 1e-9;
/// Largest relative primal-dual gap accepted for a guessing bound.
pub const GUESS_GAP_TOL: f64 = 1e-3;
const PSD_TOL: f64 = 1e-8;
/// Eigenvalues of the membership moment matrix below this fraction of the
/// largest mark directions outside the minimal face.
pub const FACE_EIG_TOL: f64 = 1e-7;
/// Largest right-hand side that may be discarded when restricting to a face.
pub const FACE_INCONSISTENCY_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NpaError {
    #[error("only two-outcome scenarios are supported (got {0} outcomes)")]
    UnsupportedOutputs(usize),
    #[error("level {level} lacks the moment {word}; use a higher level")]
    LevelTooLow { level: Level, word: String },
    #[error("unknown level {0:?}; expected 1, 1ab or 2")]
    UnknownLevel(String),
    #[error("solver did not converge (status {status:?}, equality residual {equality:e}, dual residual {dual:e})")]
    Indeterminate {
        status: SdpStatus,
        equality: f64,
        dual: f64,
    },
    #[error("guessing probability {0} outside (0, 1]")]
    ProbabilityRange(f64),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

/// Relaxation level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    /// Identity and single projectors.
    One,
    /// Level one plus every product of two projectors from different parties.
    OnePlusAb,
    /// All words of length at most two.
    Two,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::One => "1",
            Level::OnePlusAb => "1ab",
            Level::Two => "2",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = NpaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" => Ok(Level::One),
            "1ab" | "1+ab" => Ok(Level::OnePlusAb),
            "2" => Ok(Level::Two),
            other => Err(NpaError::UnknownLevel(other.to_string())),
        }
    }
}

impl Serialize for Level {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// First-outcome projector of `party` at `input` (both 0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Op {
    pub party: usize,
    pub input: usize,
}

pub type Word = Vec<Op>;

/// Canonical form: parties in increasing order (operators of one party keep
/// their relative order), repeated adjacent projectors collapsed.
pub fn canonical(word: &[Op]) -> Word {
    let mut w = word.to_vec();
    w.sort_by_key(|op| op.party);
    w.dedup();
    w
}

fn adjoint(word: &[Op]) -> Word {
    let mut w = word.to_vec();
    w.reverse();
    canonical(&w)
}

/// Moment label of `⟨w⟩`, identified with `⟨w†⟩`.
pub fn moment_key(word: &[Op]) -> Word {
    let w = canonical(word);
    let r = adjoint(&w);
    w.min(r)
}

/// Printable form such as `A1B2`; the empty word is `1`.
pub fn word_label(word: &[Op]) -> String {
    if word.is_empty() {
        return "1".into();
    }
    word.iter()
        .map(|op| {
            let name = (b'A' + (op.party % 26) as u8) as char;
            format!("{name}{}", op.input + 1)
        })
        .collect()
}

/// Parties and inputs of a word with at most one operator per party; these are
/// the moments fixed by an observed behavior.
fn as_observable(word: &[Op]) -> Option<Vec<(usize, usize)>> {
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(word.len());
    for op in word {
        if out.last().is_some_and(|&(p, _)| p == op.party) {
            return None;
        }
        out.push((op.party, op.input));
    }
    Some(out)
}

#[derive(Clone, Debug)]
pub struct WordIndex {
    scenario: Scenario,
    level: Level,
    words: Vec<Word>,
    /// Moment id for every upper-triangular entry `(i, j)`, `i ≤ j`.
    entry_moment: Vec<usize>,
    /// Distinct moments, in first-appearance order.
    moments: Vec<Word>,
    /// Entries `(i, j)` carrying each moment.
    moment_entries: Vec<Vec<(usize, usize)>>,
}

/// Builds the generating words of a relaxation.
pub fn build_words(scenario: Scenario, level: Level) -> Result<WordIndex, NpaError> {
    if scenario.outputs() != 2 {
        return Err(NpaError::UnsupportedOutputs(scenario.outputs()));
    }
    let (p, m) = (scenario.parties(), scenario.inputs());
    let singles: Vec<Op> = (0..p)
        .flat_map(|party| (0..m).map(move |input| Op { party, input }))
        .collect();
    let mut words: Vec<Word> = vec![vec![]];
    words.extend(singles.iter().map(|&op| vec![op]));
    if level >= Level::OnePlusAb {
        for (i, &a) in singles.iter().enumerate() {
            for &b in &singles[i + 1..] {
                if a.party != b.party {
                    words.push(vec![a, b]);
                }
            }
        }
    }
    if level == Level::Two {
        for &a in &singles {
            for &b in &singles {
                if a.party == b.party && a.input != b.input {
                    words.push(vec![a, b]);
                }
            }
        }
    }

    let n = words.len();
    let mut ids: BTreeMap<Word, usize> = BTreeMap::new();
    let mut moments = Vec::new();
    let mut moment_entries: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut entry_moment = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let mut prod = words[i].clone();
            prod.reverse();
            prod.extend_from_slice(&words[j]);
            let key = moment_key(&prod);
            let id = *ids.entry(key.clone()).or_insert_with(|| {
                moments.push(key);
                moment_entries.push(Vec::new());
                moments.len() - 1
            });
            moment_entries[id].push((i, j));
            entry_moment.push(id);
        }
    }
    Ok(WordIndex {
        scenario,
        level,
        words,
        entry_moment,
        moments,
        moment_entries,
    })
}

impl WordIndex {
    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn num_moments(&self) -> usize {
        self.moments.len()
    }

    /// Moment id of entry `(i, j)`.
    pub fn moment_of(&self, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        let n = self.words.len();
        self.entry_moment[i * n - i * (i + 1) / 2 + j]
    }

    fn find_moment(&self, word: &[Op]) -> Option<usize> {
        let key = moment_key(word);
        self.moments.iter().position(|m| *m == key)
    }

    /// Moments fixed by an observed behavior, with their values.
    fn observed_moments(&self, b: &Behavior) -> Vec<(usize, f64)> {
        self.moments
            .iter()
            .enumerate()
            .filter_map(|(id, w)| as_observable(w).map(|ops| (id, b.first_outcome_moment(&ops))))
            .collect()
    }

    /// Checks that every correlation moment of the scenario is present.
    fn require_full_correlations(&self) -> Result<(), NpaError> {
        let s = self.scenario;
        for inputs in s.input_tuples() {
            let word: Word = inputs
                .iter()
                .enumerate()
                .map(|(party, &input)| Op { party, input })
                .collect();
            if self.find_moment(&word).is_none() {
                return Err(NpaError::LevelTooLow {
                    level: self.level,
                    word: word_label(&word),
                });
            }
        }
        Ok(())
    }

    /// Coefficients (moment id, weight) expressing `P(outputs|inputs)` through
    /// first-outcome moments by inclusion–exclusion.
    fn probability_expansion(
        &self,
        inputs: &[usize],
        outputs: &[usize],
    ) -> Result<Vec<(usize, f64)>, NpaError> {
        let second: Vec<usize> = (0..inputs.len()).filter(|&i| outputs[i] == 1).collect();
        let mut terms: BTreeMap<usize, f64> = BTreeMap::new();
        for mask in 0u32..(1 << second.len()) {
            let mut word = Vec::new();
            let mut sign = 1.0;
            for (party, &input) in inputs.iter().enumerate() {
                let idx = second.iter().position(|&q| q == party);
                let include = match idx {
                    None => true,
                    Some(k) if mask & (1 << k) != 0 => {
                        sign = -sign;
                        true
                    }
                    Some(_) => false,
                };
                if include {
                    word.push(Op { party, input });
                }
            }
            let id = self
                .find_moment(&word)
                .ok_or_else(|| NpaError::LevelTooLow {
                    level: self.level,
                    word: word_label(&word),
                })?;
            *terms.entry(id).or_insert(0.0) += sign;
        }
        Ok(terms.into_iter().filter(|&(_, w)| w != 0.0).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipStatus {
    Feasible,
    Infeasible,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipResult {
    pub status: MembershipStatus,
    /// Largest `τ` with a consistent moment matrix `Γ ⪰ τ I`; the behavior is
    /// inside the relaxation iff `τ ≥ 0`.
    pub margin: f64,
    pub residuals: Residuals,
}

fn solver_options() -> SdpOptions {
    SdpOptions::default()
}

/// `max τ` subject to `Γ = Γ' + τ I` with `Γ' ⪰ 0` and `Γ` a moment matrix
/// matching `b` on its observed entries.
fn membership_program(idx: &WordIndex, b: &Behavior) -> SdpProblem {
    let (mat, tau) = (0, 1);
    let mut p = SdpProblem::new(vec![Block::Symmetric(idx.len()), Block::Free(1)]);
    p.maximize(LinearFunctional::new().with(tau, 0, 0, 1.0));
    let known: BTreeMap<usize, f64> = idx.observed_moments(b).into_iter().collect();
    // entry (i, j) of Γ = Γ' + τ I
    let entry = |f: &mut LinearFunctional, (i, j): (usize, usize), w: f64| {
        f.add(mat, i, j, w);
        if i == j {
            f.add(tau, 0, 0, w);
        }
    };
    for (id, entries) in idx.moment_entries.iter().enumerate() {
        match known.get(&id) {
            Some(&v) => {
                for &e in entries {
                    let mut f = LinearFunctional::new();
                    entry(&mut f, e, 1.0);
                    p.add_constraint(f, v);
                }
            }
            None => {
                for &e in &entries[1..] {
                    let mut f = LinearFunctional::new();
                    entry(&mut f, e, 1.0);
                    entry(&mut f, entries[0], -1.0);
                    p.add_constraint(f, 0.0);
                }
            }
        }
    }
    p
}

/// Tests whether `b` lies in the level-`level` outer approximation of the
/// quantum set.
pub fn membership(b: &Behavior, level: Level) -> Result<MembershipResult, NpaError> {
    let idx = build_words(b.scenario(), level)?;
    idx.require_full_correlations()?;
    let p = membership_program(&idx, b);
    let sol = solve(&p, &solver_options())?;
    let margin = sol.objective_value;
    let status = match sol.status {
        SdpStatus::Optimal if margin >= -MEMBERSHIP_TOL => MembershipStatus::Feasible,
        SdpStatus::Optimal => MembershipStatus::Infeasible,
        SdpStatus::Infeasible => MembershipStatus::Infeasible,
        SdpStatus::Indeterminate => MembershipStatus::Indeterminate,
    };
    Ok(MembershipResult {
        status,
        margin,
        residuals: sol.residuals,
    })
}

/// Range of the maximal-rank moment matrix consistent with `b`, when that
/// range is a proper subspace. Interior-point iterates converge to the
/// relative interior of the optimal face, so the membership solution has the
/// largest rank available.
fn minimal_face(idx: &WordIndex, b: &Behavior) -> Result<Option<FaceBasis>, NpaError> {
    let sol = solve(&membership_program(idx, b), &solver_options())?;
    let tau = sol.objective_value;
    if sol.status != SdpStatus::Optimal || tau < -MEMBERSHIP_TOL {
        return Ok(None);
    }
    let n = idx.len();
    let Some(m) = sol.blocks[0].matrix() else {
        return Ok(None);
    };
    let mut g: Vec<f64> = m.entries().iter().map(|z| z.re).collect();
    for i in 0..n {
        g[i * n + i] += tau;
    }
    let face = FaceBasis::from_psd(&g, n, FACE_EIG_TOL);
    Ok((face.rank() < n).then_some(face))
}

#[derive(Clone, Debug, Serialize)]
pub struct GuessingResult {
    /// Certified bound from the dual solution.
    pub pg_upper: f64,
    /// Value attained by the primal branches.
    pub primal_value: f64,
    /// Rank of the face the branches were restricted to, if any.
    pub face_rank: Option<usize>,
    /// Right-hand side discarded when restricting to the face.
    pub face_inconsistency: f64,
    pub level: Level,
    /// Target inputs (0-based).
    pub settings: Vec<usize>,
    pub residuals: Residuals,
    pub iterations: usize,
}

/// Upper bound on the probability that an adversary guesses all outputs at
/// `settings`, over decompositions of `b` into quantum-relaxation branches,
/// one (subnormalized) branch per guess.
pub fn pg_upper_bound(
    b: &Behavior,
    settings: &[usize],
    level: Level,
) -> Result<GuessingResult, NpaError> {
    let s = b.scenario();
    s.check_inputs(settings)?;
    let idx = build_words(s, level)?;
    idx.require_full_correlations()?;
    let guesses: Vec<Vec<usize>> = s.output_tuples().collect();
    let n = idx.len();
    let mut p = SdpProblem::new(vec![Block::Symmetric(n); guesses.len()]);

    // objective: Σ_λ P^λ(λ | settings)
    let mut obj = LinearFunctional::new();
    for (lam, guess) in guesses.iter().enumerate() {
        for (id, w) in idx.probability_expansion(settings, guess)? {
            let (i, j) = idx.moment_entries[id][0];
            obj.add(lam, i, j, w);
        }
    }
    p.maximize(obj);

    // projector algebra inside each branch
    for lam in 0..guesses.len() {
        for entries in &idx.moment_entries {
            for &(i, j) in &entries[1..] {
                let (i0, j0) = entries[0];
                p.add_constraint(
                    LinearFunctional::new()
                        .with(lam, i, j, 1.0)
                        .with(lam, i0, j0, -1.0),
                    0.0,
                );
            }
        }
    }
    // branches add up to the observed behavior
    for (id, v) in idx.observed_moments(b) {
        let (i, j) = idx.moment_entries[id][0];
        let mut f = LinearFunctional::new();
        for lam in 0..guesses.len() {
            f.add(lam, i, j, 1.0);
        }
        p.add_constraint(f, v);
    }

    let norm_c = 1.0
        + p.objective()
            .terms()
            .iter()
            .map(|t| t.coeff.abs())
            .sum::<f64>();

    if let Some(face) = minimal_face(&idx, b)? {
        let restricted = restrict(&p, &vec![Some(face.clone()); guesses.len()])?;
        if restricted.inconsistency <= FACE_INCONSISTENCY_TOL {
            let sol = solve(&restricted.problem, &solver_options())?;
            if sol.status == SdpStatus::Optimal {
                return Ok(GuessingResult {
                    pg_upper: sol.dual_value + n as f64 * norm_c * sol.residuals.dual,
                    primal_value: sol.objective_value,
                    face_rank: Some(face.rank()),
                    face_inconsistency: restricted.inconsistency,
                    level,
                    settings: settings.to_vec(),
                    residuals: sol.residuals,
                    iterations: sol.iterations,
                });
            }
        }
    }

    // Without a usable face the reported value is the dual objective, an upper
    // bound whenever the dual iterate is feasible. The dual residual is
    // charged against the largest possible ‖X‖_F, which is at most the total
    // trace n.
    let sol = solve(&p, &solver_options())?;
    let certified = sol.residuals.dual <= DUAL_CERT_TOL
        && sol.residuals.equality <= ACCEPT_TOL
        && sol.residuals.psd_violation <= PSD_TOL
        && sol.residuals.gap <= GUESS_GAP_TOL;
    if sol.status == SdpStatus::Infeasible || !certified {
        return Err(NpaError::Indeterminate {
            status: sol.status,
            equality: sol.residuals.equality,
            dual: sol.residuals.dual,
        });
    }
    Ok(GuessingResult {
        pg_upper: sol.dual_value + n as f64 * norm_c * sol.residuals.dual,
        primal_value: sol.objective_value,
        face_rank: None,
        face_inconsistency: 0.0,
        level,
        settings: settings.to_vec(),
        residuals: sol.residuals,
        iterations: sol.iterations,
    })
}

/// Min-entropy `−log₂ pg` in bits.
pub fn min_entropy(pg: f64) -> Result<f64, NpaError> {
    if !(pg > 0.0 && pg <= 1.0) {
        return Err(NpaError::ProbabilityRange(pg));
    }
    Ok(-pg.log2())
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    /// Absent when the behavior lies outside the relaxation.
    pub pg_upper: Option<f64>,
    pub min_entropy_bits: Option<f64>,
    pub level: Level,
    /// Target inputs, 1-based, comma separated.
    pub settings: String,
    pub solver_residuals: Option<Residuals>,
    pub face_rank: Option<usize>,
    pub membership_status: MembershipStatus,
    pub membership_margin: f64,
}

impl CertificationReport {
    pub fn to_json(&self) -> Value {
        json!(self)
    }
}

/// Runs membership and, unless the behavior is outside the relaxation, the
/// guessing program at one level. Solver round-off can push the bound
/// marginally above 1; the entropy is computed from the bound clipped to 1.
pub fn certify(
    b: &Behavior,
    settings: &[usize],
    level: Level,
) -> Result<CertificationReport, NpaError> {
    b.scenario().check_inputs(settings)?;
    let mem = membership(b, level)?;
    let mut report = CertificationReport {
        pg_upper: None,
        min_entropy_bits: None,
        level,
        settings: one_based(settings),
        solver_residuals: None,
        face_rank: None,
        membership_status: mem.status,
        membership_margin: mem.margin,
    };
    if mem.status != MembershipStatus::Infeasible {
        let pg = pg_upper_bound(b, settings, level)?;
        report.pg_upper = Some(pg.pg_upper);
        report.min_entropy_bits = Some(min_entropy(pg.pg_upper.clamp(f64::MIN_POSITIVE, 1.0))?);
        report.solver_residuals = Some(pg.residuals);
        report.face_rank = pg.face_rank;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::construct_bipartite_family;

    fn a(i: usize) -> Op {
        Op { party: 0, input: i }
    }
    fn b(i: usize) -> Op {
        Op { party: 1, input: i }
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonical(&[b(0), a(1)]), vec![a(1), b(0)]);
        assert_eq!(canonical(&[a(0), b(1), a(0)]), vec![a(0), b(1)]);
        assert_eq!(canonical(&[a(0), a(1), a(1), a(0)]), vec![a(0), a(1), a(0)]);
        assert_eq!(moment_key(&[a(1), a(0)]), vec![a(0), a(1)]);
        assert_eq!(word_label(&[a(0), b(1)]), "A1B2");
        assert_eq!(word_label(&[]), "1");
    }

    #[test]
    fn word_counts() {
        let bi = Scenario::bipartite();
        let tri = Scenario::tripartite();
        assert_eq!(build_words(bi, Level::One).unwrap().len(), 5);
        assert_eq!(build_words(bi, Level::OnePlusAb).unwrap().len(), 9);
        assert_eq!(build_words(bi, Level::Two).unwrap().len(), 13);
        assert_eq!(build_words(tri, Level::OnePlusAb).unwrap().len(), 19);
        assert_eq!(build_words(tri, Level::Two).unwrap().len(), 25);
        assert!(matches!(
            build_words(Scenario::new(2, 2, 3).unwrap(), Level::One),
            Err(NpaError::UnsupportedOutputs(3))
        ));
    }

    #[test]
    fn probability_expansion_is_exact() {
        let fam = construct_bipartite_family(0.45, 0.45).unwrap();
        let beh = fam.behavior();
        let idx = build_words(beh.scenario(), Level::OnePlusAb).unwrap();
        let known: BTreeMap<usize, f64> = idx.observed_moments(&beh).into_iter().collect();
        for inputs in beh.scenario().input_tuples() {
            for outputs in beh.scenario().output_tuples() {
                let v: f64 = idx
                    .probability_expansion(&inputs, &outputs)
                    .unwrap()
                    .iter()
                    .map(|(id, w)| w * known[id])
                    .sum();
                assert!((v - beh.prob(&inputs, &outputs)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn level_too_low_for_three_body_moments() {
        let u = Behavior::uniform(Scenario::tripartite());
        assert!(matches!(
            pg_upper_bound(&u, &[0, 0, 0], Level::One),
            Err(NpaError::LevelTooLow { .. })
        ));
    }

    #[test]
    fn min_entropy_values() {
        assert_eq!(min_entropy(1.0).unwrap(), 0.0);
        assert!((min_entropy(0.25).unwrap() - 2.0).abs() < 1e-15);
        assert!((min_entropy(0.125).unwrap() - 3.0).abs() < 1e-15);
        assert!(min_entropy(0.0).is_err());
        assert!(min_entropy(1.5).is_err());
    }

    #[test]
    fn membership_examples() {
        let u = Behavior::uniform(Scenario::bipartite());
        assert_eq!(
            membership(&u, Level::OnePlusAb).unwrap().status,
            MembershipStatus::Feasible
        );
        let pr = Behavior::pr_box();
        assert_eq!(
            membership(&pr, Level::OnePlusAb).unwrap().status,
            MembershipStatus::Infeasible
        );
        let fam = construct_bipartite_family(0.45, 0.45).unwrap().behavior();
        assert_eq!(
            membership(&fam, Level::OnePlusAb).unwrap().status,
            MembershipStatus::Feasible
        );
    }

    #[test]
    fn guessing_trivial_cases() {
        let s = Scenario::bipartite();
        let det = Behavior::deterministic(s, &[vec![0, 1], vec![1, 1]]).unwrap();
        let r = pg_upper_bound(&det, &[0, 1], Level::OnePlusAb).unwrap();
        assert!((r.pg_upper - 1.0).abs() < 1e-6);
        let u = Behavior::uniform(s);
        let r = pg_upper_bound(&u, &[1, 1], Level::OnePlusAb).unwrap();
        assert!((r.pg_upper - 1.0).abs() < 1e-5);
    }

    #[test]
    fn family_point_is_certified() {
        let fam = construct_bipartite_family(0.45, 0.45).unwrap().behavior();
        let r = certify(&fam, &[0, 0], Level::OnePlusAb).unwrap();
        let pg = r.pg_upper.unwrap();
        assert!(pg <= 0.255, "pg {pg}");
        assert!(r.min_entropy_bits.unwrap() >= 1.97);
        assert_eq!(r.settings, "1,1");
        let pr = certify(&Behavior::pr_box(), &[0, 0], Level::OnePlusAb).unwrap();
        assert_eq!(pr.membership_status, MembershipStatus::Infeasible);
        assert!(pr.pg_upper.is_none());
    }
}

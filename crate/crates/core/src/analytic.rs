//! Closed-form machinery for the two-setting, two-outcome maximal-randomness
//! families: Schmidt-amplitude relations, the Cauchy–Schwarz bound `f(A; s, t)`
//! and its maximization over `A`, the bounds `g(x, z)` and `g_T(x, z)`, and
//! explicit state/measurement constructions.
//!
//! All constructed amplitudes are real. The sign pattern is fixed so that the
//! objective probability equals `g²/2` (bipartite) or `g_T²/4` (tripartite)
//! exactly; every constructor re-derives its behavior by the Born rule and
//! refuses to return a realization that misses its targets by more than
//! [`CONSTRUCTION_TOL`].

use serde_json::json;
use thiserror::Error;

use crate::quantum::{
    born_behavior, make_bipartite_state, make_ghz, BinaryQubitMeasurement, MeasurementAssembly,
    PureState, QuantumError, RealizationFile,
};
use crate::scenario::{Behavior, FamilyParams, ScenarioError};

/// Born-rule self-check tolerance for constructed families.
pub const CONSTRUCTION_TOL: f64 = 1e-10;
/// `g` values down to `-FEASIBILITY_SLACK` count as zero (rounding at the
/// degenerate corners).
pub const FEASIBILITY_SLACK: f64 = 1e-12;
/// Minimum number of grid points used by [`maximize_f_over_a`].
pub const F_GRID_POINTS: usize = 10_001;
/// Golden-section refinement stops once the bracket is this narrow.
pub const F_REFINE_TOL: f64 = 1e-10;

const DOMAIN_SLACK: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("parameters outside the domain: {0}")]
    Domain(String),
    #[error("A² = 1/2 leaves the amplitude relations indeterminate; use the maximally entangled construction")]
    Indeterminate,
    #[error("infeasible parameters: bound value {g} is negative")]
    Infeasible { g: f64 },
    #[error(
        "constructed realization misses its targets (max residual {max_residual:e}): {detail}"
    )]
    Verification { max_residual: f64, detail: String },
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Squared amplitude magnitudes `(|α₁|², |β₁|², |α₂|², |β₂|²)` of the second
/// measurements of the two parties for a Schmidt state with coefficient `a`
/// and second-setting marginals `s` (first party) and `t` (second party).
pub fn alpha_beta_from_st(a: f64, s: f64, t: f64) -> Result<[f64; 4], AnalyticError> {
    let a2 = check_st_domain(a, s, t)?;
    let d = 1.0 - 2.0 * a2;
    Ok([
        (1.0 - s - a2) / d,
        ((s - a2) / d).max(0.0),
        (1.0 - t - a2) / d,
        ((t - a2) / d).max(0.0),
    ])
}

/// Validates the common domain and returns `A²` (snapped onto `min(s,t)` when
/// within rounding of it).
fn check_st_domain(a: f64, s: f64, t: f64) -> Result<f64, AnalyticError> {
    if !(a.is_finite() && s.is_finite() && t.is_finite()) {
        return Err(AnalyticError::Domain("non-finite input".into()));
    }
    if a < 0.0 {
        return Err(AnalyticError::Domain(format!("A = {a} is negative")));
    }
    if !(0.0..=0.5).contains(&s) || !(0.0..=0.5).contains(&t) {
        return Err(AnalyticError::Domain(format!(
            "s = {s}, t = {t} must lie in [0, 1/2]"
        )));
    }
    let mut a2 = a * a;
    let lim = s.min(t);
    if a2 > lim {
        if a2 - lim <= DOMAIN_SLACK {
            a2 = lim;
        } else {
            return Err(AnalyticError::Domain(format!(
                "A² = {a2} exceeds min(s, t) = {lim}"
            )));
        }
    }
    if (0.5 - a2).abs() <= DOMAIN_SLACK {
        return Err(AnalyticError::Indeterminate);
    }
    Ok(a2)
}

/// Upper bound on `P(1,1|2,2)` for a Schmidt state with coefficient `a` and
/// second-setting marginals `s`, `t`:
///
/// `f = [√(A²(1−s−A²)(1−t−A²)) + √((1−A²)(s−A²)(t−A²))]² / (1−2A²)²`
///
/// This is `(A|α₁||α₂| + B|β₁||β₂|)²` with the magnitudes from
/// [`alpha_beta_from_st`]; it is attained by real, positive amplitudes.
pub fn f_bound(a: f64, s: f64, t: f64) -> Result<f64, AnalyticError> {
    let a2 = check_st_domain(a, s, t)?;
    Ok(f_unchecked(a2, s, t))
}

fn f_unchecked(a2: f64, s: f64, t: f64) -> f64 {
    let d = 1.0 - 2.0 * a2;
    let p = ((1.0 - s - a2) * (1.0 - t - a2)).max(0.0);
    let q = ((s - a2).max(0.0) * (t - a2).max(0.0)).max(0.0);
    let r = (a2 * p).sqrt() + ((1.0 - a2) * q).sqrt();
    r * r / (d * d)
}

/// `f` on `A ∈ [0, √min(s,t)]`, including the removable singularity at
/// `A² = 1/2` (reachable only when `s = t = 1/2`, where `f = (A+B)²/4`).
fn f_extended(a: f64, s: f64, t: f64) -> f64 {
    let a2 = (a * a).min(s.min(t));
    if (0.5 - a2).abs() <= DOMAIN_SLACK {
        let b = (1.0 - a2).max(0.0).sqrt();
        let v = a2.sqrt() + b;
        return v * v / 4.0;
    }
    f_unchecked(a2, s, t)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct FBoundResult {
    /// Maximizing Schmidt coefficient.
    pub a_star: f64,
    pub f_star: f64,
    pub s: f64,
    pub t: f64,
}

/// Global maximum of `f(·; s, t)` over `A ∈ [0, √min(s,t)]`: a dense grid
/// locates the best cell, golden-section search refines it to
/// [`F_REFINE_TOL`]. Ties go to the smaller `A`.
pub fn maximize_f_over_a(s: f64, t: f64) -> Result<FBoundResult, AnalyticError> {
    if !(s > 0.0 && s <= 0.5 && t > 0.0 && t <= 0.5) {
        return Err(AnalyticError::Domain(format!(
            "s = {s}, t = {t} must lie in (0, 1/2]"
        )));
    }
    let a_max = s.min(t).sqrt();
    let n = F_GRID_POINTS;
    let step = a_max / (n - 1) as f64;
    let at = |i: usize| if i == n - 1 { a_max } else { i as f64 * step };

    let mut best_i = 0;
    let mut best_f = f_extended(0.0, s, t);
    for i in 1..n {
        let v = f_extended(at(i), s, t);
        if v > best_f {
            best_f = v;
            best_i = i;
        }
    }

    let lo = at(best_i.saturating_sub(1));
    let hi = at((best_i + 1).min(n - 1));
    let (a_ref, f_ref) = golden_section_max(|a| f_extended(a, s, t), lo, hi, F_REFINE_TOL);
    let (a_star, f_star) = if f_ref > best_f || (f_ref == best_f && a_ref < at(best_i)) {
        (a_ref, f_ref)
    } else {
        (at(best_i), best_f)
    };
    Ok(FBoundResult {
        a_star,
        f_star,
        s,
        t,
    })
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    // best of the surviving probes and the bracket ends
    [(lo, f(lo)), (c, fc), (d, fd), (hi, f(hi))]
        .into_iter()
        .fold((lo, f64::NEG_INFINITY), |acc, (a, v)| {
            if v > acc.1 {
                (a, v)
            } else {
                acc
            }
        })
}

fn check_unit_interval(x: f64, z: f64, upper: f64) -> Result<(), AnalyticError> {
    if !(x.is_finite() && z.is_finite())
        || !(0.0..=upper).contains(&x)
        || !(0.0..=upper).contains(&z)
    {
        return Err(AnalyticError::Domain(format!(
            "x = {x}, z = {z} must lie in [0, {upper}]"
        )));
    }
    Ok(())
}

/// `g(x,z) = [√(2z)(√(2x)−√(1−2x)) − √(1−2z)(√(2x)+√(1−2x))]/√2`.
///
/// Negative values mean the family does not exist at `(x, z)`; callers decide.
pub fn g_bound(x: f64, z: f64) -> Result<f64, AnalyticError> {
    check_unit_interval(x, z, 0.5)?;
    Ok(g_core(2.0 * x, 2.0 * z))
}

/// Tripartite analogue of [`g_bound`] with `2x → 4x`, `2z → 4z`; defined on
/// `[0, 1/4]²`.
pub fn gt_bound(x: f64, z: f64) -> Result<f64, AnalyticError> {
    check_unit_interval(x, z, 0.25)?;
    Ok(g_core(4.0 * x, 4.0 * z))
}

fn g_core(u: f64, v: f64) -> f64 {
    let (su, cu) = (u.sqrt(), (1.0 - u).max(0.0).sqrt());
    let (sv, cv) = (v.sqrt(), (1.0 - v).max(0.0).sqrt());
    (sv * (su - cu) - cv * (su + cu)) / std::f64::consts::SQRT_2
}

pub fn is_feasible(g: f64) -> bool {
    g >= -FEASIBILITY_SLACK
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Bipartite,
    Tripartite,
}

/// A point of the maximal-randomness family together with its quantum
/// realization.
#[derive(Clone, Debug)]
pub struct FamilyRealization {
    pub kind: FamilyKind,
    pub state: PureState,
    pub assembly: MeasurementAssembly,
    pub params: FamilyParams,
    /// `g` or `g_T` at `(x, z)`.
    pub g_value: f64,
    /// `g²/2` (bipartite) or `g_T²/4` (tripartite).
    pub predicted_objective: f64,
}

impl FamilyRealization {
    pub fn behavior(&self) -> Behavior {
        born_behavior(&self.state, &self.assembly).expect("family realization is consistent")
    }

    /// Inputs of the minimized probability (0-based).
    pub fn objective_inputs(&self) -> Vec<usize> {
        objective_inputs(self.kind)
    }

    /// Inputs at which outputs are uniform (0-based).
    pub fn uniform_settings(&self) -> Vec<usize> {
        match self.kind {
            FamilyKind::Bipartite => vec![0, 0],
            FamilyKind::Tripartite => vec![0, 0, 0],
        }
    }

    pub fn objective(&self) -> f64 {
        let b = self.behavior();
        let zeros = vec![0; b.scenario().parties()];
        b.prob(&self.objective_inputs(), &zeros)
    }

    pub fn metadata(&self) -> serde_json::Value {
        let g_key = match self.kind {
            FamilyKind::Bipartite => "g",
            FamilyKind::Tripartite => "g_t",
        };
        json!({
            "kind": self.kind,
            "x": self.params.x,
            "z": self.params.z,
            "predicted_objective": self.predicted_objective,
            g_key: self.g_value,
        })
    }

    pub fn to_file(&self) -> RealizationFile {
        let mut f = RealizationFile::new(&self.state, &self.assembly);
        f.metadata = Some(self.metadata());
        f
    }
}

pub fn objective_inputs(kind: FamilyKind) -> Vec<usize> {
    match kind {
        FamilyKind::Bipartite => vec![1, 1],
        FamilyKind::Tripartite => vec![1, 0, 1],
    }
}

/// Real second-setting measurement whose overlap with `|+⟩` gives
/// `(α+β)² = 2u`, i.e. `((√u − √(1−u))/√2, (√u + √(1−u))/√2)`.
fn x_measurement(u: f64) -> BinaryQubitMeasurement {
    let (a, b) = (u.sqrt(), (1.0 - u).max(0.0).sqrt());
    BinaryQubitMeasurement::real(
        (a - b) / std::f64::consts::SQRT_2,
        (a + b) / std::f64::consts::SQRT_2,
    )
    .expect("unit amplitudes")
}

/// Real second-setting measurement `(√v, −√(1−v))`.
fn z_measurement(v: f64) -> BinaryQubitMeasurement {
    BinaryQubitMeasurement::real(v.sqrt(), -(1.0 - v).max(0.0).sqrt()).expect("unit amplitudes")
}

/// Bipartite family on `Φ⁺`: first party measures `σ_x` then `(√(2z), −√(1−2z))`;
/// second party measures `σ_z` then `((√(2x)−√(1−2x))/√2, (√(2x)+√(1−2x))/√2)`.
///
/// The behavior has uniform outputs at inputs (1,1), `P(1,1|1,2) = x`,
/// `P(1,1|2,1) = z` and `P(1,1|2,2) = g(x,z)²/2`.
pub fn construct_bipartite_family(x: f64, z: f64) -> Result<FamilyRealization, AnalyticError> {
    let g = g_bound(x, z)?;
    if !is_feasible(g) {
        return Err(AnalyticError::Infeasible { g });
    }
    let state = make_bipartite_state(std::f64::consts::FRAC_1_SQRT_2)?;
    let assembly = MeasurementAssembly::new(vec![
        vec![BinaryQubitMeasurement::sigma_x(), z_measurement(2.0 * z)],
        vec![BinaryQubitMeasurement::sigma_z(), x_measurement(2.0 * x)],
    ])?;
    let params = FamilyParams::new(x, 0.5 - x, z, 0.5 - z)?;
    let fam = FamilyRealization {
        kind: FamilyKind::Bipartite,
        state,
        assembly,
        params,
        g_value: g.max(0.0),
        predicted_objective: g * g / 2.0,
    };
    verify_family(&fam, &[(vec![0, 1], x), (vec![1, 0], z)])?;
    Ok(fam)
}

/// Tripartite family on GHZ₃: the first two parties are identical (`σ_x`, then
/// `(√(4z), −√(1−4z))`); the third measures `σ_z` then the `x`-measurement with
/// `2x → 4x`. Targets: uniform outputs at (1,1,1), `P(1,1,1|1,1,2) = x`,
/// `P(1,1,1|1,2,1) = P(1,1,1|2,1,1) = z`, `P(1,1,1|2,1,2) = g_T(x,z)²/4`.
pub fn construct_tripartite_family(x: f64, z: f64) -> Result<FamilyRealization, AnalyticError> {
    let g = gt_bound(x, z)?;
    if !is_feasible(g) {
        return Err(AnalyticError::Infeasible { g });
    }
    let state = make_ghz(3)?;
    let twin = vec![BinaryQubitMeasurement::sigma_x(), z_measurement(4.0 * z)];
    let assembly = MeasurementAssembly::new(vec![
        twin.clone(),
        twin,
        vec![BinaryQubitMeasurement::sigma_z(), x_measurement(4.0 * x)],
    ])?;
    let params = FamilyParams::new(x, 0.5 - x, z, 0.5 - z)?;
    let fam = FamilyRealization {
        kind: FamilyKind::Tripartite,
        state,
        assembly,
        params,
        g_value: g.max(0.0),
        predicted_objective: g * g / 4.0,
    };
    verify_family(
        &fam,
        &[(vec![0, 0, 1], x), (vec![0, 1, 0], z), (vec![1, 0, 0], z)],
    )?;
    Ok(fam)
}

fn verify_family(
    fam: &FamilyRealization,
    targets: &[(Vec<usize>, f64)],
) -> Result<(), AnalyticError> {
    let b = fam.behavior();
    let zeros = vec![0; b.scenario().parties()];
    let mut worst = (0.0f64, String::new());
    let mut note = |r: f64, what: String| {
        if r > worst.0 {
            worst = (r, what);
        }
    };
    let uniform_dev = b.uniformity_deviation(&fam.uniform_settings())?;
    note(uniform_dev, "uniformity".into());
    for (inputs, v) in targets {
        note(
            (b.prob(inputs, &zeros) - v).abs(),
            format!("constraint at inputs {inputs:?}"),
        );
    }
    note(
        (b.prob(&fam.objective_inputs(), &zeros) - fam.predicted_objective).abs(),
        "objective".into(),
    );
    if worst.0 > CONSTRUCTION_TOL {
        return Err(AnalyticError::Verification {
            max_residual: worst.0,
            detail: worst.1,
        });
    }
    Ok(())
}

/// State `A|00⟩ + B|11⟩` with real, positive second-setting amplitudes from
/// [`alpha_beta_from_st`]; its `P(1,1|2,2)` equals `f(A; s, t)`. The first
/// settings are `σ_x` and `σ_z` and play no role in the bound.
pub fn realize_f_bound(
    a: f64,
    s: f64,
    t: f64,
) -> Result<(PureState, MeasurementAssembly), AnalyticError> {
    let [a1, b1, a2, b2] = alpha_beta_from_st(a, s, t)?;
    let state = make_bipartite_state(a)?;
    let assembly = MeasurementAssembly::new(vec![
        vec![
            BinaryQubitMeasurement::sigma_x(),
            BinaryQubitMeasurement::real(a1.sqrt(), b1.sqrt())?,
        ],
        vec![
            BinaryQubitMeasurement::sigma_z(),
            BinaryQubitMeasurement::real(a2.sqrt(), b2.sqrt())?,
        ],
    ])?;
    Ok((state, assembly))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn amplitude_relations() {
        let v = alpha_beta_from_st(0.5, 0.5, 0.5).unwrap();
        for x in v {
            assert!((x - 0.5).abs() < 1e-15);
        }
        let v = alpha_beta_from_st(0.3f64.sqrt(), 0.3, 0.4).unwrap();
        assert!(v[1].abs() < 1e-15);
        assert!((v[0] + v[1] - 1.0).abs() < 1e-12 && (v[2] + v[3] - 1.0).abs() < 1e-12);
        assert!(matches!(
            alpha_beta_from_st(0.4f64.sqrt(), 0.3, 0.45),
            Err(AnalyticError::Domain(_))
        ));
        assert_eq!(
            alpha_beta_from_st(H, 0.5, 0.5),
            Err(AnalyticError::Indeterminate)
        );
    }

    #[test]
    fn f_bound_values() {
        // A² = s = t = 1/4: second radical vanishes, (1/4·1/16)/(1/4) = 1/4
        assert!((f_bound(0.5, 0.25, 0.25).unwrap() - 0.25).abs() < 1e-15);
        // s = t = 1/2 collapses to (A + B)²/4
        assert!((f_bound(0.0, 0.5, 0.5).unwrap() - 0.25).abs() < 1e-15);
        let a: f64 = 0.3;
        let closed = (a + (1.0 - a * a).sqrt()).powi(2) / 4.0;
        assert!((f_bound(a, 0.5, 0.5).unwrap() - closed).abs() < 1e-15);
        assert!((f_bound(a, 0.5, 0.5).unwrap() - 0.393090).abs() < 1e-6);
        assert!(f_bound(0.8, 0.5, 0.5).is_err());
    }

    #[test]
    fn f_bound_is_attained_by_born_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let s: f64 = rng.gen_range(0.01..0.5);
            let t = rng.gen_range(0.01..0.5);
            let a = rng.gen_range(0.0..s.min(t).sqrt());
            let (state, asm) = realize_f_bound(a, s, t).unwrap();
            let b = born_behavior(&state, &asm).unwrap();
            assert!((b.prob(&[1, 1], &[0, 0]) - f_bound(a, s, t).unwrap()).abs() < 1e-12);
            assert!((b.marginal(0, 1).unwrap()[0] - s).abs() < 1e-12);
            assert!((b.marginal(1, 1).unwrap()[0] - t).abs() < 1e-12);
        }
    }

    #[test]
    fn f_bound_dominates_random_phases() {
        // flipping signs/phases of the optimal amplitudes never beats f
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..200 {
            let s: f64 = rng.gen_range(0.01..0.5);
            let t = rng.gen_range(0.01..0.5);
            let a = rng.gen_range(0.0..s.min(t).sqrt());
            let [a1, b1, a2, b2] = alpha_beta_from_st(a, s, t).unwrap();
            let m = |u: f64, v: f64, ph: f64| {
                BinaryQubitMeasurement::new(
                    crate::matkernel::Complex::real(u.sqrt()),
                    crate::matkernel::Complex::from_polar(v.sqrt(), ph),
                )
                .unwrap()
            };
            let asm = MeasurementAssembly::new(vec![
                vec![
                    BinaryQubitMeasurement::sigma_x(),
                    m(a1, b1, rng.gen_range(0.0..6.3)),
                ],
                vec![
                    BinaryQubitMeasurement::sigma_z(),
                    m(a2, b2, rng.gen_range(0.0..6.3)),
                ],
            ])
            .unwrap();
            let b = born_behavior(&make_bipartite_state(a).unwrap(), &asm).unwrap();
            assert!(b.prob(&[1, 1], &[0, 0]) <= f_bound(a, s, t).unwrap() + 1e-12);
        }
    }

    #[test]
    fn maximize_f_symmetric_case() {
        // s = t = 1/2: f = (A+B)²/4 increases up to the maximally entangled point
        let r = maximize_f_over_a(0.5, 0.5).unwrap();
        assert!((r.f_star - 0.5).abs() < 1e-12);
        assert!((r.a_star - H).abs() < 1e-9);
        // s = t: the boundary A² = s gives f = s, which beats the product state (f = s²)
        let r = maximize_f_over_a(0.15, 0.15).unwrap();
        assert!(r.a_star * r.a_star <= 0.15 + 1e-14);
        assert!(r.f_star >= 0.15 - 1e-12);
    }

    #[test]
    fn maximize_f_swap_symmetry() {
        let a = maximize_f_over_a(0.2, 0.4).unwrap();
        let b = maximize_f_over_a(0.4, 0.2).unwrap();
        assert!((a.a_star - b.a_star).abs() <= 1e-9);
        assert!((a.f_star - b.f_star).abs() <= 1e-9);
    }

    #[test]
    fn maximize_f_beats_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let s: f64 = rng.gen_range(0.01..0.5);
            let t = rng.gen_range(0.01..0.5);
            let r = maximize_f_over_a(s, t).unwrap();
            assert!(r.a_star * r.a_star <= s.min(t) + 1e-14);
            assert!((f_bound(r.a_star, s, t).unwrap() - r.f_star).abs() <= 1e-12);
            for _ in 0..1000 {
                let a = rng.gen_range(0.0..s.min(t).sqrt());
                assert!(f_bound(a, s, t).unwrap() <= r.f_star + 1e-12);
            }
        }
    }

    #[test]
    fn g_values() {
        assert!(g_bound(0.5, 0.25).unwrap().abs() < 1e-15);
        assert!((g_bound(0.5, 0.5).unwrap() - H).abs() < 1e-15);
        assert!((g_bound(0.3, 0.45).unwrap() - g_bound(0.45, 0.3).unwrap()).abs() < 1e-15);
        assert!(g_bound(0.6, 0.1).is_err());
        // g(0.1, 0.1) < 0: the family does not exist there
        assert!(g_bound(0.1, 0.1).unwrap() < 0.0);
        // x = z = 0.45: [0.8 − 2·0.3]/√2
        assert!((g_bound(0.45, 0.45).unwrap() - 0.2 / std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn gt_values() {
        assert!((gt_bound(0.25, 0.25).unwrap() - H).abs() < 1e-15);
        assert!(gt_bound(0.25, 0.125).unwrap().abs() < 1e-15);
        assert!(gt_bound(0.3, 0.1).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let (x, z) = (rng.gen_range(0.0..=0.25), rng.gen_range(0.0..=0.25));
            assert_eq!(gt_bound(x, z).unwrap(), g_bound(2.0 * x, 2.0 * z).unwrap());
        }
    }

    #[test]
    fn bipartite_family_points() {
        let fam = construct_bipartite_family(0.45, 0.45).unwrap();
        let b = fam.behavior();
        assert!((b.chsh_value().unwrap() - 2.56).abs() < 1e-12);
        let na = fam.assembly.party(0)[1].bloch();
        let nb = fam.assembly.party(1)[1].bloch();
        for (u, v) in na.iter().zip([-0.6, 0.0, 0.8]) {
            assert!((u - v).abs() < 1e-12);
        }
        for (u, v) in nb.iter().zip([0.8, 0.0, -0.6]) {
            assert!((u - v).abs() < 1e-12);
        }
        // marginal at the second setting is (1/2, 1/2)
        let m = b.marginal(0, 1).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-12);

        let corner = construct_bipartite_family(0.5, 0.25).unwrap();
        let na = corner.assembly.party(0)[1].bloch();
        assert!((na[0] + 1.0).abs() < 1e-12);
        let nb = corner.assembly.party(1)[1].bloch();
        assert!((nb[0] - 1.0).abs() < 1e-12);
        assert!((corner.behavior().chsh_value().unwrap() - 2.0).abs() < 1e-12);

        let top = construct_bipartite_family(0.5, 0.5).unwrap();
        assert!((top.objective() - 0.25).abs() < 1e-12);

        assert!(matches!(
            construct_bipartite_family(0.1, 0.1),
            Err(AnalyticError::Infeasible { .. })
        ));
    }

    #[test]
    fn family_params_match_behavior() {
        let fam = construct_bipartite_family(0.47, 0.44).unwrap();
        let b = fam.behavior();
        assert!((b.prob(&[0, 1], &[1, 0]) - fam.params.y).abs() < 1e-12);
        assert!((b.prob(&[1, 0], &[0, 1]) - fam.params.w).abs() < 1e-12);
    }

    #[test]
    fn tripartite_family_points() {
        let fam = construct_tripartite_family(0.25, 0.25).unwrap();
        assert!((fam.objective() - 0.125).abs() < 1e-12);
        let (ok, dev) = fam.behavior().uniformity_check(&[0, 0, 0], 1e-10).unwrap();
        assert!(ok && dev <= 1e-10);
        let edge = construct_tripartite_family(0.25, 0.125).unwrap();
        assert!(edge.objective().abs() < 1e-12);
        assert!(construct_tripartite_family(0.2, 0.2).is_err());
    }

    #[test]
    fn born_oracle_grid_consistency() {
        for i in 0..10 {
            for j in 0..10 {
                let x = 0.5 * i as f64 / 9.0;
                let z = 0.5 * j as f64 / 9.0;
                let g = g_bound(x, z).unwrap();
                if is_feasible(g) {
                    let fam = construct_bipartite_family(x, z).unwrap();
                    let b = fam.behavior();
                    assert!((b.prob(&[1, 1], &[0, 0]) - g * g / 2.0).abs() <= 1e-10);
                    assert!((b.prob(&[0, 1], &[0, 0]) - x).abs() <= 1e-10);
                    assert!((b.prob(&[1, 0], &[0, 0]) - z).abs() <= 1e-10);
                }
                let (xt, zt) = (x / 2.0, z / 2.0);
                let gt = gt_bound(xt, zt).unwrap();
                if is_feasible(gt) {
                    let fam = construct_tripartite_family(xt, zt).unwrap();
                    let b = fam.behavior();
                    assert!((b.prob(&[1, 0, 1], &[0, 0, 0]) - gt * gt / 4.0).abs() <= 1e-10);
                    assert!((b.prob(&[0, 0, 1], &[0, 0, 0]) - xt).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn family_is_nonlocal_in_the_interior() {
        let n = 60;
        for i in 0..=n {
            for j in 0..=n {
                let x = 0.5 * i as f64 / n as f64;
                let z = 0.5 * j as f64 / n as f64;
                let g = g_bound(x, z).unwrap();
                if g > 0.01 && x.min(z) < 0.49 {
                    let chsh = construct_bipartite_family(x, z)
                        .unwrap()
                        .behavior()
                        .chsh_value()
                        .unwrap();
                    assert!(chsh > 2.0, "x={x} z={z} chsh={chsh}");
                }
            }
        }
    }
}

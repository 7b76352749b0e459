//! Incompatibility robustness of pairs of binary qubit measurements under
//! white noise: `M^η = η M + (1−η) I/2`, and `η*` is the largest visibility at
//! which the two noisy measurements still admit a parent measurement.
//!
//! For unbiased projective qubit pairs the threshold has the closed form
//! `η* = 2 / (|n₁+n₂| + |n₁−n₂|)`. The SDP route decides joint measurability
//! directly and bisects on `η`, and the two routes are cross-checked against
//! each other.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analytic::{
    construct_bipartite_family, construct_tripartite_family, g_bound, gt_bound, is_feasible,
    AnalyticError,
};
use crate::matkernel::{min_eigenvalue, Complex, ComplexMatrix, MatError};
use crate::sdpcore::{solve, Block, LinearFunctional, SdpError, SdpOptions, SdpProblem, SdpStatus};

/// Bloch vectors must have unit length within this tolerance.
pub const UNIT_TOL: f64 = 1e-9;
/// Effects may be this far outside `[0, I]`.
pub const EFFECT_TOL: f64 = 1e-9;
/// Joint measurability is accepted when the best achievable margin is at
/// least `-JM_MARGIN_TOL`.
pub const JM_MARGIN_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IncompatError {
    #[error("Bloch vector {0:?} is not a unit vector")]
    NotUnit([f64; 3]),
    #[error("invalid effect: {0}")]
    InvalidEffect(String),
    #[error("bisection tolerance {0} is below 1e-8")]
    Tolerance(f64),
    #[error("joint measurability undecided at eta = {eta} (bracket [{lo}, {hi}])")]
    Indeterminate { eta: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RobustnessMethod {
    Analytic,
    SdpBisection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessResult {
    pub eta: f64,
    pub method: RobustnessMethod,
    /// Parent effects `G_{λ₁λ₂}` (order 00, 01, 10, 11) at the largest
    /// visibility found compatible. Only produced by the SDP route.
    pub certificate: Option<[ComplexMatrix; 4]>,
}

fn check_unit(n: [f64; 3]) -> Result<(), IncompatError> {
    let len = n.iter().map(|e| e * e).sum::<f64>().sqrt();
    if !len.is_finite() || (len - 1.0).abs() > UNIT_TOL {
        return Err(IncompatError::NotUnit(n));
    }
    Ok(())
}

fn norm3(v: [f64; 3]) -> f64 {
    v.iter().map(|e| e * e).sum::<f64>().sqrt()
}

/// Closed-form robustness `2 / (|n₁+n₂| + |n₁−n₂|)`.
pub fn analytic_robustness(n1: [f64; 3], n2: [f64; 3]) -> Result<RobustnessResult, IncompatError> {
    check_unit(n1)?;
    check_unit(n2)?;
    let plus = norm3([n1[0] + n2[0], n1[1] + n2[1], n1[2] + n2[2]]);
    let minus = norm3([n1[0] - n2[0], n1[1] - n2[1], n1[2] - n2[2]]);
    Ok(RobustnessResult {
        eta: (2.0 / (plus + minus)).min(1.0),
        method: RobustnessMethod::Analytic,
        certificate: None,
    })
}

/// Outcome-0 effect `(I + η n·σ)/2` of a noisy projective qubit measurement.
pub fn noisy_effect(n: [f64; 3], eta: f64) -> ComplexMatrix {
    let (x, y, z) = (eta * n[0], eta * n[1], eta * n[2]);
    ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => Complex::real((1.0 + z) / 2.0),
        (1, 1) => Complex::real((1.0 - z) / 2.0),
        (0, 1) => Complex::new(x / 2.0, -y / 2.0),
        _ => Complex::new(x / 2.0, y / 2.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JmStatus {
    Compatible,
    Incompatible,
    Indeterminate,
}

#[derive(Clone, Debug)]
pub struct JmOutcome {
    pub status: JmStatus,
    /// Largest `τ` such that a parent with every `G ⪰ τ I` exists; the pair is
    /// jointly measurable iff `τ ≥ 0`.
    pub margin: f64,
    /// Parent effects (order 00, 01, 10, 11) when compatible.
    pub parent: Option<[ComplexMatrix; 4]>,
}

impl JmOutcome {
    pub fn is_compatible(&self) -> bool {
        self.status == JmStatus::Compatible
    }
}

fn check_effect(e: &ComplexMatrix) -> Result<(), IncompatError> {
    if e.rows() != 2 || e.cols() != 2 {
        return Err(IncompatError::InvalidEffect("effects must be 2×2".into()));
    }
    if !e.is_hermitian(EFFECT_TOL) {
        return Err(IncompatError::InvalidEffect(
            "effect is not Hermitian".into(),
        ));
    }
    let lo = min_eigenvalue(e)?;
    let hi = -min_eigenvalue(&e.scale(-1.0))?;
    if lo < -EFFECT_TOL || hi > 1.0 + EFFECT_TOL {
        return Err(IncompatError::InvalidEffect(format!(
            "spectrum [{lo}, {hi}] leaves [0, 1]"
        )));
    }
    Ok(())
}

/// Decides whether the binary measurements `{e1, I−e1}` and `{e2, I−e2}` are
/// jointly measurable.
///
/// Solved as: maximize `τ` over Hermitian `H_{ij} ⪰ 0` with
/// `G_{ij} = H_{ij} + τI` satisfying the four marginal equations. The problem
/// is always feasible (take `τ = −1/4`), so the verdict follows from the sign
/// of the optimal margin.
pub fn jm_feasible(
    e1: &ComplexMatrix,
    e2: &ComplexMatrix,
    opts: &SdpOptions,
) -> Result<JmOutcome, IncompatError> {
    check_effect(e1)?;
    check_effect(e2)?;
    let id = ComplexMatrix::identity(2);
    let tau = 4;
    let mut p = SdpProblem::new(vec![
        Block::Hermitian(2),
        Block::Hermitian(2),
        Block::Hermitian(2),
        Block::Hermitian(2),
        Block::Free(1),
    ]);
    p.maximize(LinearFunctional::new().with(tau, 0, 0, 1.0));
    // (blocks summed, target): G00+G01 = E1, G10+G11 = I−E1, G00+G10 = E2, G01+G11 = I−E2
    let marginals = [
        ([0, 1], e1.clone()),
        ([2, 3], id.sub(e1)),
        ([0, 2], e2.clone()),
        ([1, 3], id.sub(e2)),
    ];
    for (pair, target) in &marginals {
        for d in 0..2 {
            let mut f = LinearFunctional::new();
            for &b in pair {
                f.add(b, d, d, 1.0);
            }
            f.add(tau, 0, 0, 2.0);
            p.add_constraint(f, target[(d, d)].re);
        }
        let mut re = LinearFunctional::new();
        let mut im = LinearFunctional::new();
        for &b in pair {
            re.add(b, 0, 1, 1.0);
            im.add_complex(b, 0, 1, Complex::new(0.0, -1.0));
        }
        let t01 = (target[(0, 1)] + target[(1, 0)].conj()) * 0.5;
        p.add_constraint(re, t01.re);
        p.add_constraint(im, t01.im);
    }

    let sol = solve(&p, opts)?;
    let margin = sol.objective_value;
    let status = match sol.status {
        SdpStatus::Optimal if margin >= -JM_MARGIN_TOL => JmStatus::Compatible,
        SdpStatus::Optimal => JmStatus::Incompatible,
        _ => JmStatus::Indeterminate,
    };
    let parent = (status == JmStatus::Compatible).then(|| {
        let shift = ComplexMatrix::identity(2).scale(margin);
        let g = |k: usize| sol.blocks[k].matrix().expect("matrix block").add(&shift);
        [g(0), g(1), g(2), g(3)]
    });
    Ok(JmOutcome {
        status,
        margin,
        parent,
    })
}

/// Joint measurability of the two noisy projective measurements with Bloch
/// vectors `n1`, `n2` at visibility `eta`.
pub fn jm_feasible_bloch(
    n1: [f64; 3],
    n2: [f64; 3],
    eta: f64,
    opts: &SdpOptions,
) -> Result<JmOutcome, IncompatError> {
    jm_feasible(&noisy_effect(n1, eta), &noisy_effect(n2, eta), opts)
}

/// Robustness by bisection on `η ∈ [1/2, 1]` with the SDP membership test.
/// Returns the largest visibility known compatible, so the true threshold lies
/// in `[eta, eta + tol]`.
pub fn sdp_robustness(
    n1: [f64; 3],
    n2: [f64; 3],
    tol: f64,
) -> Result<RobustnessResult, IncompatError> {
    check_unit(n1)?;
    check_unit(n2)?;
    if !(tol >= 1e-8) {
        return Err(IncompatError::Tolerance(tol));
    }
    let opts = SdpOptions::default();
    let (mut lo, mut hi) = (0.5, 1.0);
    let decide = |eta: f64, lo: f64, hi: f64| -> Result<JmOutcome, IncompatError> {
        let out = jm_feasible_bloch(n1, n2, eta, &opts)?;
        if out.status == JmStatus::Indeterminate {
            return Err(IncompatError::Indeterminate { eta, lo, hi });
        }
        Ok(out)
    };
    let top = decide(hi, lo, hi)?;
    if top.is_compatible() {
        return Ok(RobustnessResult {
            eta: 1.0,
            method: RobustnessMethod::SdpBisection,
            certificate: top.parent,
        });
    }
    let mut best = decide(lo, lo, hi)?;
    if !best.is_compatible() {
        return Err(IncompatError::Indeterminate { eta: lo, lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let out = decide(mid, lo, hi)?;
        if out.is_compatible() {
            lo = mid;
            best = out;
        } else {
            hi = mid;
        }
    }
    Ok(RobustnessResult {
        eta: lo,
        method: RobustnessMethod::SdpBisection,
        certificate: best.parent,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub x: f64,
    pub z: f64,
    /// Robustness between the two measurements of the first party.
    pub eta_a: f64,
    /// Robustness between the two measurements of the last party.
    pub eta_b: f64,
    /// `g` (bipartite) or `g_T` (tripartite).
    pub g: f64,
    /// CHSH value of the bipartite behavior; absent for tripartite points.
    pub chsh: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TradeoffCurve {
    pub points: Vec<TradeoffPoint>,
    /// Pareto-maximal points: no other point has both robustness values at
    /// least as large with one strictly larger. Sorted by decreasing `eta_a`.
    pub frontier: Vec<TradeoffPoint>,
    /// Grid cells where the family does not exist.
    pub skipped: usize,
}

fn grid_value(i: usize, grid: usize, upper: f64) -> f64 {
    if i + 1 == grid {
        upper
    } else {
        upper * i as f64 / (grid - 1) as f64
    }
}

/// Sweeps a `grid × grid` lattice over `[0, 1/2]²` and records the robustness
/// of each party's measurement pair on the bipartite family.
pub fn tradeoff_curve(grid: usize) -> Result<TradeoffCurve, IncompatError> {
    sweep(grid, 0.5, |x, z| {
        let g = g_bound(x, z)?;
        if !is_feasible(g) {
            return Ok(None);
        }
        let fam = construct_bipartite_family(x, z)?;
        let a = fam.assembly.party(0);
        let b = fam.assembly.party(1);
        let eta_a = analytic_robustness(a[0].bloch(), a[1].bloch())?.eta;
        let eta_b = analytic_robustness(b[0].bloch(), b[1].bloch())?.eta;
        let chsh = fam.behavior().chsh_value().map_err(AnalyticError::from)?;
        Ok(Some(TradeoffPoint {
            x,
            z,
            eta_a,
            eta_b,
            g: g.max(0.0),
            chsh: Some(chsh),
        }))
    })
}

/// Tripartite analogue over `[0, 1/4]²`: `eta_a` belongs to the first (and,
/// by symmetry, second) party, `eta_b` to the third.
pub fn tradeoff_curve_tripartite(grid: usize) -> Result<TradeoffCurve, IncompatError> {
    sweep(grid, 0.25, |x, z| {
        let g = gt_bound(x, z)?;
        if !is_feasible(g) {
            return Ok(None);
        }
        let fam = construct_tripartite_family(x, z)?;
        let a = fam.assembly.party(0);
        let c = fam.assembly.party(2);
        let eta_a = analytic_robustness(a[0].bloch(), a[1].bloch())?.eta;
        let eta_b = analytic_robustness(c[0].bloch(), c[1].bloch())?.eta;
        Ok(Some(TradeoffPoint {
            x,
            z,
            eta_a,
            eta_b,
            g: g.max(0.0),
            chsh: None,
        }))
    })
}

fn sweep(
    grid: usize,
    upper: f64,
    cell: impl Fn(f64, f64) -> Result<Option<TradeoffPoint>, IncompatError> + Sync,
) -> Result<TradeoffCurve, IncompatError> {
    let grid = grid.max(2);
    let cells: Vec<Option<TradeoffPoint>> = (0..grid * grid)
        .into_par_iter()
        .map(|k| {
            cell(
                grid_value(k / grid, grid, upper),
                grid_value(k % grid, grid, upper),
            )
        })
        .collect::<Result<_, _>>()?;
    let skipped = cells.iter().filter(|c| c.is_none()).count();
    let points: Vec<TradeoffPoint> = cells.into_iter().flatten().collect();
    let frontier = pareto_frontier(&points);
    Ok(TradeoffCurve {
        points,
        frontier,
        skipped,
    })
}

/// Upper-right Pareto frontier in the `(eta_a, eta_b)` plane.
pub fn pareto_frontier(points: &[TradeoffPoint]) -> Vec<TradeoffPoint> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|p, q| {
        q.eta_a
            .total_cmp(&p.eta_a)
            .then(q.eta_b.total_cmp(&p.eta_b))
            .then(p.x.total_cmp(&q.x))
            .then(p.z.total_cmp(&q.z))
    });
    let mut frontier: Vec<TradeoffPoint> = Vec::new();
    let mut best_b = f64::NEG_INFINITY;
    for p in sorted {
        if p.eta_b > best_b {
            best_b = p.eta_b;
            frontier.push(p);
        }
    }
    frontier
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
        loop {
            let v = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let n = norm3(v);
            if n > 0.1 && n <= 1.0 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }

    fn rotate(r: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = (0..3).map(|j| r[i][j] * v[j]).sum();
        }
        out
    }

    fn random_rotation(rng: &mut impl Rng) -> [[f64; 3]; 3] {
        // Rodrigues formula around a random axis
        let k = random_unit(rng);
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (s, c) = th.sin_cos();
        let mut r = [[0.0; 3]; 3];
        let kx = [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                let kk: f64 = (0..3).map(|m| kx[i][m] * kx[m][j]).sum();
                r[i][j] = if i == j { 1.0 } else { 0.0 } + s * kx[i][j] + (1.0 - c) * kk;
            }
        }
        r
    }

    #[test]
    fn analytic_examples() {
        let x = [1.0, 0.0, 0.0];
        assert_eq!(analytic_robustness(x, x).unwrap().eta, 1.0);
        let eta = analytic_robustness(x, [0.0, 0.0, 1.0]).unwrap().eta;
        assert!((eta - H).abs() < 1e-15);
        let eta = analytic_robustness(x, [-0.6, 0.0, 0.8]).unwrap().eta;
        assert!((eta - 2.0 / (0.8f64.sqrt() + 3.2f64.sqrt())).abs() < 1e-15);
        assert!((eta - 0.74536).abs() < 1e-5);
        // antiparallel projectors are the same measurement relabeled
        assert_eq!(analytic_robustness(x, [-1.0, 0.0, 0.0]).unwrap().eta, 1.0);
        assert!(analytic_robustness([1.0, 1.0, 0.0], x).is_err());
    }

    #[test]
    fn analytic_symmetry_and_rotation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (a, b) = (random_unit(&mut rng), random_unit(&mut rng));
            let e = analytic_robustness(a, b).unwrap().eta;
            assert_eq!(e, analytic_robustness(b, a).unwrap().eta);
            let r = random_rotation(&mut rng);
            let er = analytic_robustness(rotate(&r, a), rotate(&r, b))
                .unwrap()
                .eta;
            assert!((e - er).abs() < 1e-12);
        }
    }

    #[test]
    fn jm_examples() {
        let opts = SdpOptions::default();
        let (x, z) = ([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
        assert!(jm_feasible_bloch(x, z, 0.5, &opts).unwrap().is_compatible());
        let out = jm_feasible_bloch(x, z, 0.9, &opts).unwrap();
        assert_eq!(out.status, JmStatus::Incompatible);
        assert!(out.parent.is_none());

        let out = jm_feasible_bloch(x, x, 1.0, &opts).unwrap();
        assert!(out.is_compatible());
        let g = out.parent.unwrap();
        let e = noisy_effect(x, 1.0);
        assert!(g[0].sub(&e).max_abs() < 1e-6);
        assert!(g[1].max_abs() < 1e-6 && g[2].max_abs() < 1e-6);
    }

    #[test]
    fn parent_reproduces_marginals() {
        let opts = SdpOptions::default();
        let (n1, n2) = ([1.0, 0.0, 0.0], [0.0, 0.6, 0.8]);
        let out = jm_feasible_bloch(n1, n2, 0.7, &opts).unwrap();
        let g = out.parent.unwrap();
        for gi in &g {
            assert!(min_eigenvalue(gi).unwrap() > -1e-7);
        }
        assert!(g[0].add(&g[1]).sub(&noisy_effect(n1, 0.7)).max_abs() < 1e-7);
        assert!(g[0].add(&g[2]).sub(&noisy_effect(n2, 0.7)).max_abs() < 1e-7);
    }

    #[test]
    fn sdp_matches_analytic() {
        let r = sdp_robustness([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 1e-6).unwrap();
        assert!((r.eta - H).abs() < 2e-6);
        let same = sdp_robustness([0.0, 1.0, 0.0], [0.0, 1.0, 0.0], 1e-6).unwrap();
        assert_eq!(same.eta, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let (a, b) = (random_unit(&mut rng), random_unit(&mut rng));
            let s = sdp_robustness(a, b, 1e-6).unwrap().eta;
            let t = analytic_robustness(a, b).unwrap().eta;
            assert!((s - t).abs() <= 1e-5, "sdp {s} analytic {t}");
        }
        assert!(sdp_robustness([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 1e-9).is_err());
    }

    #[test]
    fn tradeoff_corner_and_diagonal() {
        let curve = tradeoff_curve(5).unwrap();
        let corner = curve
            .points
            .iter()
            .find(|p| p.x == 0.5 && p.z == 0.25)
            .unwrap();
        assert!((corner.eta_a - 1.0).abs() < 1e-9);
        assert!((corner.eta_b - H).abs() < 1e-6);
        for p in curve.points.iter().filter(|p| p.x == p.z) {
            assert!((p.eta_a - p.eta_b).abs() < 1e-10);
        }
        assert!(curve
            .frontier
            .iter()
            .any(|p| (p.eta_a - 1.0).abs() < 1e-3 && (p.eta_b - H).abs() < 1e-3));
        assert!(!curve
            .frontier
            .iter()
            .any(|p| p.eta_a > 0.999 && p.eta_b > 0.999));
        assert_eq!(curve.points.len() + curve.skipped, 25);
    }

    #[test]
    fn tripartite_tradeoff_matches_bipartite() {
        let bi = tradeoff_curve(9).unwrap();
        let tri = tradeoff_curve_tripartite(9).unwrap();
        assert_eq!(bi.points.len(), tri.points.len());
        for (p, q) in bi.points.iter().zip(&tri.points) {
            assert!((p.eta_a - q.eta_a).abs() < 1e-10 && (p.eta_b - q.eta_b).abs() < 1e-10);
        }
    }

    #[test]
    fn frontier_is_undominated() {
        let curve = tradeoff_curve(21).unwrap();
        for f in &curve.frontier {
            assert!(!curve.points.iter().any(|p| p.eta_a >= f.eta_a
                && p.eta_b >= f.eta_b
                && (p.eta_a > f.eta_a || p.eta_b > f.eta_b)));
        }
    }
}

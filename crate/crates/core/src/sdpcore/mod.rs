//! A small semidefinite-program engine for desk-scale problems.
//!
//! Problems are stated in primal standard form
//!
//! ```text
//! minimize ⟨C, X⟩  subject to  ⟨A_k, X⟩ = b_k,  X ∈ K
//! ```
//!
//! where `K` is a product of real-symmetric PSD blocks, complex Hermitian PSD
//! blocks and unconstrained real vectors. Two methods are available:
//!
//! * [`Method::InteriorPoint`] (default): infeasible primal-dual path following
//!   with the HKM search direction and Mehrotra's predictor-corrector. Reaches
//!   high accuracy in a few dozen iterations when the problem has a strictly
//!   feasible point. Problems without one (typical at the boundary of the
//!   quantum set) should first be restricted to their minimal face with
//!   [`restrict`].
//! * [`Method::Splitting`]: an alternating-direction augmented-Lagrangian method
//!   on the dual. Each iteration is one affine step (constraint rows are
//!   orthonormalized once) and one projection onto the cone. Cheap per
//!   iteration, but its tail convergence is slow on degenerate problems.
//!
//! Linearly dependent constraints are removed up front; a dependent row with
//! a contradictory right-hand side makes the problem infeasible. Otherwise
//! infeasibility is reported only with a Farkas certificate read off the
//! diverging dual iterates. Every other failure to converge is
//! [`SdpStatus::Indeterminate`].

mod face;
mod ipm;
mod splitting;

pub use face::{restrict, FaceBasis, Restriction, FACE_RANK_TOL};

use serde::Serialize;
use thiserror::Error;

use crate::matkernel::{hermitian_eig, symmetric_eig, Complex, ComplexMatrix, MatError};

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error(transparent)]
    Matrix(#[from] MatError),
}

/// Variable block of the cone `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Block {
    /// Real symmetric `n×n`, constrained PSD.
    Symmetric(usize),
    /// Complex Hermitian `n×n`, constrained PSD.
    Hermitian(usize),
    /// `n` unconstrained real scalars.
    Free(usize),
}

impl Block {
    /// Number of real coordinates.
    fn dim(self) -> usize {
        match self {
            Block::Symmetric(n) => n * (n + 1) / 2,
            Block::Hermitian(n) => n * n,
            Block::Free(n) => n,
        }
    }

    fn side(self) -> usize {
        match self {
            Block::Symmetric(n) | Block::Hermitian(n) | Block::Free(n) => n,
        }
    }
}

/// One term `Re(coeff · X[row, col])` of a linear functional. For
/// [`Block::Free`] blocks `row` selects the scalar and `col` must be 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub coeff: Complex,
}

/// Real linear functional on the block variables, as a sum of [`Term`]s.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearFunctional {
    terms: Vec<Term>,
}

impl LinearFunctional {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `coeff · X[row, col]` (real coefficient).
    pub fn add(&mut self, block: usize, row: usize, col: usize, coeff: f64) -> &mut Self {
        self.add_complex(block, row, col, Complex::real(coeff))
    }

    /// Adds `Re(coeff · X[row, col])`.
    pub fn add_complex(
        &mut self,
        block: usize,
        row: usize,
        col: usize,
        coeff: Complex,
    ) -> &mut Self {
        self.terms.push(Term {
            block,
            row,
            col,
            coeff,
        });
        self
    }

    pub fn with(mut self, block: usize, row: usize, col: usize, coeff: f64) -> Self {
        self.add(block, row, col, coeff);
        self
    }

    pub fn with_complex(mut self, block: usize, row: usize, col: usize, coeff: Complex) -> Self {
        self.add_complex(block, row, col, coeff);
        self
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    blocks: Vec<Block>,
    sense: Sense,
    objective: LinearFunctional,
    constraints: Vec<(LinearFunctional, f64)>,
}

impl SdpProblem {
    pub fn new(blocks: Vec<Block>) -> Self {
        SdpProblem {
            blocks,
            sense: Sense::Minimize,
            objective: LinearFunctional::new(),
            constraints: Vec::new(),
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn objective(&self) -> &LinearFunctional {
        &self.objective
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn minimize(&mut self, f: LinearFunctional) -> &mut Self {
        self.sense = Sense::Minimize;
        self.objective = f;
        self
    }

    pub fn maximize(&mut self, f: LinearFunctional) -> &mut Self {
        self.sense = Sense::Maximize;
        self.objective = f;
        self
    }

    pub fn add_constraint(&mut self, f: LinearFunctional, rhs: f64) -> &mut Self {
        self.constraints.push((f, rhs));
        self
    }

    fn validate(&self) -> Result<(), SdpError> {
        if self.blocks.is_empty() {
            return Err(SdpError::Malformed("no variable blocks".into()));
        }
        if let Some(b) = self.blocks.iter().find(|b| b.side() == 0) {
            return Err(SdpError::Malformed(format!("empty block {b:?}")));
        }
        let check = |f: &LinearFunctional| -> Result<(), SdpError> {
            for t in &f.terms {
                let Some(&b) = self.blocks.get(t.block) else {
                    return Err(SdpError::Malformed(format!(
                        "term references block {}",
                        t.block
                    )));
                };
                let ok = match b {
                    Block::Free(n) => t.row < n && t.col == 0,
                    _ => t.row < b.side() && t.col < b.side(),
                };
                if !ok || !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                    return Err(SdpError::Malformed(format!(
                        "bad term {t:?} for block {b:?}"
                    )));
                }
            }
            Ok(())
        };
        check(&self.objective)?;
        for (f, rhs) in &self.constraints {
            check(f)?;
            if !rhs.is_finite() {
                return Err(SdpError::Malformed("non-finite right-hand side".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    InteriorPoint,
    Splitting,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SdpOptions {
    pub method: Method,
    /// Stopping tolerance on the relative primal, dual and gap residuals.
    pub tol: f64,
    /// Iteration cap. The interior-point method additionally stops after
    /// [`IPM_MAX_ITER`] iterations.
    pub max_iter: usize,
    /// Initial penalty parameter of the splitting method.
    pub mu: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            method: Method::InteriorPoint,
            tol: 1e-9,
            max_iter: 200_000,
            mu: 1.0,
        }
    }
}

impl SdpOptions {
    pub fn splitting() -> Self {
        SdpOptions {
            method: Method::Splitting,
            ..Self::default()
        }
    }
}

pub const IPM_MAX_ITER: usize = 150;
/// A run that stops short of `tol` still counts as optimal when all relative
/// residuals are below this.
pub const ACCEPT_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Residuals {
    /// Largest absolute violation of the original equality constraints.
    pub equality: f64,
    /// Largest negative eigenvalue magnitude across the PSD blocks.
    pub psd_violation: f64,
    /// Relative dual residual at termination.
    pub dual: f64,
    /// Relative duality gap at termination.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BlockValue {
    Matrix(ComplexMatrix),
    Vector(Vec<f64>),
}

impl BlockValue {
    pub fn matrix(&self) -> Option<&ComplexMatrix> {
        match self {
            BlockValue::Matrix(m) => Some(m),
            BlockValue::Vector(_) => None,
        }
    }

    pub fn vector(&self) -> Option<&[f64]> {
        match self {
            BlockValue::Vector(v) => Some(v),
            BlockValue::Matrix(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Objective in the caller's sense (maximization problems report the max).
    pub objective_value: f64,
    /// Dual objective bound in the caller's sense.
    pub dual_value: f64,
    pub blocks: Vec<BlockValue>,
    pub residuals: Residuals,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

/// Coordinate layout: for each block its offset in the flat vector.
struct Layout {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    dim: usize,
}

impl Layout {
    fn new(blocks: &[Block]) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        for b in blocks {
            offsets.push(dim);
            dim += b.dim();
        }
        Layout {
            blocks: blocks.to_vec(),
            offsets,
            dim,
        }
    }

    /// Index of the off-diagonal pair `(i, j)`, `i < j`, among the strict upper
    /// triangle of an `n×n` block, in row-major order.
    fn upper_index(n: usize, i: usize, j: usize) -> usize {
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Accumulates the coefficient vector of a functional.
    fn dense(&self, f: &LinearFunctional) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for t in &f.terms {
            let off = self.offsets[t.block];
            let (i, j, c) = (t.row, t.col, t.coeff);
            match self.blocks[t.block] {
                Block::Free(_) => v[off + i] += c.re,
                Block::Symmetric(n) => {
                    if i == j {
                        v[off + i] += c.re;
                    } else {
                        let (a, b) = (i.min(j), i.max(j));
                        v[off + n + Self::upper_index(n, a, b)] += c.re / SQRT2;
                    }
                }
                Block::Hermitian(n) => {
                    if i == j {
                        v[off + i] += c.re;
                    } else {
                        // X_ab = (u + i w)/√2 for a < b; X_ba is its conjugate
                        let (a, b) = (i.min(j), i.max(j));
                        let k = off + n + 2 * Self::upper_index(n, a, b);
                        let sign = if i < j { -1.0 } else { 1.0 };
                        v[k] += c.re / SQRT2;
                        v[k + 1] += sign * c.im / SQRT2;
                    }
                }
            }
        }
        v
    }

    fn unpack(&self, x: &[f64]) -> Vec<BlockValue> {
        self.blocks
            .iter()
            .zip(&self.offsets)
            .map(|(&b, &off)| match b {
                Block::Free(n) => BlockValue::Vector(x[off..off + n].to_vec()),
                Block::Symmetric(n) => {
                    let m = unpack_symmetric(&x[off..off + b.dim()], n);
                    BlockValue::Matrix(ComplexMatrix::from_real(n, n, &m))
                }
                Block::Hermitian(n) => {
                    BlockValue::Matrix(unpack_hermitian(&x[off..off + b.dim()], n))
                }
            })
            .collect()
    }
}

fn unpack_symmetric(v: &[f64], n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = v[i];
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let e = v[k] / SQRT2;
            m[i * n + j] = e;
            m[j * n + i] = e;
            k += 1;
        }
    }
    m
}

fn pack_symmetric(m: &[f64], n: usize, out: &mut [f64]) {
    for i in 0..n {
        out[i] = m[i * n + i];
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            out[k] = (m[i * n + j] + m[j * n + i]) / SQRT2;
            k += 1;
        }
    }
}

fn unpack_hermitian(v: &[f64], n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex::real(v[i]);
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let e = Complex::new(v[k] / SQRT2, v[k + 1] / SQRT2);
            m[(i, j)] = e;
            m[(j, i)] = e.conj();
            k += 2;
        }
    }
    m
}

fn pack_hermitian(m: &ComplexMatrix, n: usize, out: &mut [f64]) {
    for i in 0..n {
        out[i] = m[(i, i)].re;
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let e = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[k] = e.re * SQRT2;
            out[k + 1] = e.im * SQRT2;
            k += 2;
        }
    }
}

/// Smallest eigenvalue of each PSD block (free blocks are skipped).
fn psd_violation(layout: &Layout, x: &[f64]) -> Result<f64, SdpError> {
    let mut neg = 0.0f64;
    for (&b, &off) in layout.blocks.iter().zip(&layout.offsets) {
        let seg = &x[off..off + b.dim()];
        let min = match b {
            Block::Free(_) => continue,
            Block::Symmetric(n) => {
                let (vals, _) = symmetric_eig(&unpack_symmetric(seg, n), n);
                vals.iter().cloned().fold(f64::INFINITY, f64::min)
            }
            Block::Hermitian(n) => {
                let eig = hermitian_eig(&unpack_hermitian(seg, n))?;
                eig.eigenvalues
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min)
            }
        };
        neg = neg.max(-min);
    }
    Ok(neg)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormalized constraint system `Q x = d` equivalent to `A x = b`.
struct Constraints {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// Indices of the original rows that span the system.
    kept: Vec<usize>,
}

/// Relative threshold below which a Gram–Schmidt remainder counts as linearly
/// dependent.
const RANK_TOL: f64 = 1e-10;
/// A dependent row whose right-hand side remainder exceeds this is
/// contradictory.
const CONSISTENCY_TOL: f64 = 1e-8;

enum Orthonormalized {
    Ok(Constraints),
    Inconsistent(f64),
}

fn orthonormalize(a: &[Vec<f64>], b: &[f64]) -> Orthonormalized {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut kept = Vec::new();
    let mut worst = 0.0f64;
    for (k, (row, &bi)) in a.iter().zip(b).enumerate() {
        let scale = norm(row);
        if scale == 0.0 {
            worst = worst.max(bi.abs());
            continue;
        }
        let mut r: Vec<f64> = row.iter().map(|e| e / scale).collect();
        let mut c = bi / scale;
        // two passes of modified Gram–Schmidt keep the basis orthonormal to
        // working precision
        for _ in 0..2 {
            for (q, &d) in rows.iter().zip(&rhs) {
                let p = dot(q, &r);
                if p != 0.0 {
                    r.iter_mut().zip(q).for_each(|(e, qe)| *e -= p * qe);
                    c -= p * d;
                }
            }
        }
        let rn = norm(&r);
        if rn <= RANK_TOL {
            worst = worst.max(c.abs() * scale);
            continue;
        }
        r.iter_mut().for_each(|e| *e /= rn);
        rows.push(r);
        rhs.push(c / rn);
        kept.push(k);
    }
    if worst > CONSISTENCY_TOL {
        Orthonormalized::Inconsistent(worst)
    } else {
        Orthonormalized::Ok(Constraints { rows, rhs, kept })
    }
}

/// What a method hands back: a primal point in layout coordinates and
/// minimization-sense diagnostics.
struct Outcome {
    x: Vec<f64>,
    dual_value: f64,
    status: SdpStatus,
    iterations: usize,
    dual: f64,
    gap: f64,
}

/// Solves `p` to the requested tolerance.
pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    p.validate()?;
    let layout = Layout::new(&p.blocks);
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut c = layout.dense(&p.objective);
    c.iter_mut().for_each(|e| *e *= sign);
    let a_orig: Vec<Vec<f64>> = p.constraints.iter().map(|(f, _)| layout.dense(f)).collect();
    let b_orig: Vec<f64> = p.constraints.iter().map(|(_, r)| *r).collect();

    let cons = match orthonormalize(&a_orig, &b_orig) {
        Orthonormalized::Ok(c) => c,
        Orthonormalized::Inconsistent(r) => {
            return Ok(SdpSolution {
                status: SdpStatus::Infeasible,
                objective_value: f64::NAN,
                dual_value: f64::NAN,
                blocks: layout.unpack(&vec![0.0; layout.dim]),
                residuals: Residuals {
                    equality: r,
                    ..Residuals::default()
                },
                iterations: 0,
            })
        }
    };

    let out = match opts.method {
        Method::Splitting => splitting::run(&layout, &c, &cons, opts)?,
        Method::InteriorPoint => {
            let rows: Vec<&[f64]> = cons.kept.iter().map(|&k| a_orig[k].as_slice()).collect();
            let rhs: Vec<f64> = cons.kept.iter().map(|&k| b_orig[k]).collect();
            ipm::run(&layout, &c, &rows, &rhs, opts)?
        }
    };

    let x = out.x;
    let equality = a_orig
        .iter()
        .zip(&b_orig)
        .map(|(row, bi)| (dot(row, &x) - bi).abs())
        .fold(0.0, f64::max);
    let residuals = Residuals {
        equality,
        psd_violation: psd_violation(&layout, &x)?,
        dual: out.dual,
        gap: out.gap,
    };
    let mut status = out.status;
    if status == SdpStatus::Optimal && (residuals.equality > 1e-7 || residuals.psd_violation > 1e-8)
    {
        status = SdpStatus::Indeterminate;
    }
    Ok(SdpSolution {
        status,
        objective_value: sign * dot(&c, &x),
        dual_value: sign * out.dual_value,
        blocks: layout.unpack(&x),
        residuals,
        iterations: out.iterations,
    })
}

/// Feasibility check: solves `p` with its objective replaced by zero. An
/// [`SdpStatus::Optimal`] result carries a feasible point.
pub fn check_feasibility(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    let mut q = p.clone();
    q.minimize(LinearFunctional::new());
    solve(&q, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::min_eigenvalue;

    fn opts() -> SdpOptions {
        SdpOptions::default()
    }

    #[test]
    fn svec_layout_roundtrip() {
        let m = vec![1.0, 2.0, 3.0, 2.0, 5.0, 6.0, 3.0, 6.0, 9.0];
        let mut v = vec![0.0; 6];
        pack_symmetric(&m, 3, &mut v);
        for (a, b) in unpack_symmetric(&v, 3).iter().zip(&m) {
            assert!((a - b).abs() < 1e-14);
        }
        // inner products are preserved
        assert!((dot(&v, &v) - m.iter().map(|e| e * e).sum::<f64>()).abs() < 1e-12);

        let h = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => Complex::real(1.0),
            (1, 1) => Complex::real(-2.0),
            (0, 1) => Complex::new(0.5, 0.25),
            _ => Complex::new(0.5, -0.25),
        });
        let mut hv = vec![0.0; 4];
        pack_hermitian(&h, 2, &mut hv);
        assert!(unpack_hermitian(&hv, 2).sub(&h).max_abs() < 1e-15);
    }

    #[test]
    fn functional_matches_trace_inner_product() {
        let layout = Layout::new(&[Block::Hermitian(2)]);
        let h = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => Complex::real(0.3),
            (1, 1) => Complex::real(0.7),
            (0, 1) => Complex::new(0.1, 0.2),
            _ => Complex::new(0.1, -0.2),
        });
        let mut x = vec![0.0; 4];
        pack_hermitian(&h, 2, &mut x);
        let c = Complex::new(0.4, -1.3);
        for (i, j) in [(0, 1), (1, 0), (1, 1)] {
            let f = LinearFunctional::new().with_complex(0, i, j, c);
            let want = (c * h[(i, j)]).re;
            assert!((dot(&layout.dense(&f), &x) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn min_trace_with_unit_diagonal() {
        let mut p = SdpProblem::new(vec![Block::Symmetric(2)]);
        p.minimize(
            LinearFunctional::new()
                .with(0, 0, 0, 1.0)
                .with(0, 1, 1, 1.0),
        );
        p.add_constraint(LinearFunctional::new().with(0, 0, 0, 1.0), 1.0);
        p.add_constraint(LinearFunctional::new().with(0, 1, 1, 1.0), 1.0);
        let sol = solve(&p, &opts()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.objective_value - 2.0).abs() < 1e-7);
    }

    #[test]
    fn negative_trace_is_infeasible() {
        let mut p = SdpProblem::new(vec![Block::Symmetric(2)]);
        p.add_constraint(
            LinearFunctional::new()
                .with(0, 0, 0, 1.0)
                .with(0, 1, 1, 1.0),
            -1.0,
        );
        let sol = check_feasibility(&p, &opts()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn contradictory_equalities_are_infeasible() {
        let mut p = SdpProblem::new(vec![Block::Symmetric(2)]);
        p.add_constraint(LinearFunctional::new().with(0, 0, 1, 1.0), 0.3);
        p.add_constraint(LinearFunctional::new().with(0, 1, 0, 2.0), 0.2);
        let sol = check_feasibility(&p, &opts()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn correlation_matrix_extreme_point() {
        let mut p = SdpProblem::new(vec![Block::Symmetric(2)]);
        p.maximize(
            LinearFunctional::new()
                .with(0, 0, 1, 1.0)
                .with(0, 1, 0, 1.0),
        );
        p.add_constraint(LinearFunctional::new().with(0, 0, 0, 1.0), 1.0);
        p.add_constraint(LinearFunctional::new().with(0, 1, 1, 1.0), 1.0);
        let sol = solve(&p, &opts()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.objective_value - 2.0).abs() < 1e-6);
        let x = sol.blocks[0].matrix().unwrap();
        assert!((x[(0, 1)].re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn psd_completion_is_feasible() {
        let mut p = SdpProblem::new(vec![Block::Symmetric(2)]);
        p.add_constraint(LinearFunctional::new().with(0, 0, 0, 1.0), 1.0);
        p.add_constraint(LinearFunctional::new().with(0, 1, 1, 1.0), 1.0);
        p.add_constraint(LinearFunctional::new().with(0, 0, 1, 1.0), 0.5);
        let sol = check_feasibility(&p, &opts()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(min_eigenvalue(sol.blocks[0].matrix().unwrap()).unwrap() > -1e-8);
    }

    #[test]
    fn hermitian_block_optimum() {
        // max Re⟨ψ|σ_y|ψ⟩-style: maximize ⟨σ_y, X⟩ over density matrices = 1
        let mut p = SdpProblem::new(vec![Block::Hermitian(2)]);
        let mut f = LinearFunctional::new();
        // ⟨σ_y, X⟩ = Re(−i X₁₀ + i X₀₁)
        f.add_complex(0, 1, 0, Complex::new(0.0, -1.0));
        f.add_complex(0, 0, 1, Complex::new(0.0, 1.0));
        p.maximize(f);
        p.add_constraint(
            LinearFunctional::new()
                .with(0, 0, 0, 1.0)
                .with(0, 1, 1, 1.0),
            1.0,
        );
        let sol = solve(&p, &opts()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.objective_value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn deterministic_runs() {
        let mut p = SdpProblem::new(vec![Block::Symmetric(3), Block::Free(1)]);
        p.maximize(LinearFunctional::new().with(1, 0, 0, 1.0));
        for i in 0..3 {
            p.add_constraint(
                LinearFunctional::new()
                    .with(0, i, i, 1.0)
                    .with(1, 0, 0, 1.0),
                1.0,
            );
        }
        p.add_constraint(LinearFunctional::new().with(0, 0, 1, 1.0), 0.9);
        let a = solve(&p, &opts()).unwrap();
        let b = solve(&p, &opts()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
    }
}

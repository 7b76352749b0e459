//! Alternating-direction augmented-Lagrangian method on the dual problem.

use super::{
    dot, norm, pack_hermitian, pack_symmetric, unpack_hermitian, unpack_symmetric, Block,
    Constraints, Layout, Outcome, SdpError, SdpOptions, SdpStatus,
};
use crate::matkernel::{hermitian_eig, symmetric_eig};

/// Cone projection workspace. Real blocks keep the previous eigenbasis and
/// diagonalize in it, which makes successive Jacobi solves nearly free once
/// the iterates settle.
struct Projector {
    bases: Vec<Option<Vec<f64>>>,
    calls: usize,
}

/// Warm-started bases are rebuilt from scratch this often to stop
/// orthogonality drift.
const BASIS_REFRESH: usize = 500;

impl Projector {
    fn new(n_blocks: usize) -> Self {
        Projector {
            bases: vec![None; n_blocks],
            calls: 0,
        }
    }

    /// Writes `Π_K(v)` into `out` block by block; `Free` blocks project to
    /// zero (the dual cone of an unconstrained variable). Returns the largest
    /// negative eigenvalue magnitude seen.
    fn project(&mut self, layout: &Layout, v: &[f64], out: &mut [f64]) -> Result<f64, SdpError> {
        self.calls += 1;
        let refresh = self.calls.is_multiple_of(BASIS_REFRESH);
        let mut neg = 0.0f64;
        for (bi, (&b, &off)) in layout.blocks.iter().zip(&layout.offsets).enumerate() {
            let seg = off..off + b.dim();
            match b {
                Block::Free(_) => out[seg].iter_mut().for_each(|e| *e = 0.0),
                Block::Symmetric(n) => {
                    let m = unpack_symmetric(&v[seg.clone()], n);
                    let basis = if refresh { None } else { self.bases[bi].take() };
                    let (vals, vecs) = match basis {
                        Some(q) => {
                            let rotated = congruence_t(&q, &m, n);
                            let (vals, w) = symmetric_eig(&rotated, n);
                            (vals, matmul_real(&q, &w, n))
                        }
                        None => symmetric_eig(&m, n),
                    };
                    let mut p = vec![0.0; n * n];
                    for (k, &lam) in vals.iter().enumerate() {
                        neg = neg.max(-lam);
                        if lam > 0.0 {
                            for i in 0..n {
                                let vi = vecs[i * n + k] * lam;
                                for j in 0..n {
                                    p[i * n + j] += vi * vecs[j * n + k];
                                }
                            }
                        }
                    }
                    pack_symmetric(&p, n, &mut out[seg]);
                    self.bases[bi] = Some(vecs);
                }
                Block::Hermitian(n) => {
                    let m = unpack_hermitian(&v[seg.clone()], n);
                    let eig = hermitian_eig(&m)?;
                    for &lam in &eig.eigenvalues {
                        neg = neg.max(-lam);
                    }
                    let p = eig.reconstruct_with(|l| l.max(0.0));
                    pack_hermitian(&p, n, &mut out[seg]);
                }
            }
        }
        Ok(neg)
    }
}

/// `Qᵀ M Q` for row-major `n×n` matrices.
fn congruence_t(q: &[f64], m: &[f64], n: usize) -> Vec<f64> {
    let mq = matmul_real(m, q, n);
    let mut out = vec![0.0; n * n];
    for k in 0..n {
        for i in 0..n {
            let qki = q[k * n + i];
            if qki == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += qki * mq[k * n + j];
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (out[i * n + j] + out[j * n + i]);
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
    out
}

fn matmul_real(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Runs the splitting iteration on the orthonormalized system `cons`
/// (`Q Qᵀ = I`), minimizing `c·x`.
pub(super) fn run(
    layout: &Layout,
    c: &[f64],
    cons: &Constraints,
    opts: &SdpOptions,
) -> Result<Outcome, SdpError> {
    let n = layout.dim;
    let m = cons.rows.len();
    let a = &cons.rows;
    let b = &cons.rhs;

    let apply_a = |x: &[f64], out: &mut [f64]| {
        for (o, row) in out.iter_mut().zip(a) {
            *o = dot(row, x);
        }
    };
    let apply_at = |y: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|e| *e = 0.0);
        for (row, &yi) in a.iter().zip(y) {
            if yi != 0.0 {
                out.iter_mut().zip(row).for_each(|(o, r)| *o += yi * r);
            }
        }
    };

    let norm_b = norm(b);
    let norm_c = norm(c);
    let mut x = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut y = vec![0.0; m];
    let mut y_prev = vec![0.0; m];
    let mut ax = vec![0.0; m];
    let mut a_cs = vec![0.0; m];
    let mut aty = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut cs = vec![0.0; n];
    let mut proj = Projector::new(layout.blocks.len());
    let mut mu = opts.mu;
    let mut ratio_acc = 0.0;
    let mut ratio_n = 0;

    let mut status = SdpStatus::Indeterminate;
    let mut iterations = opts.max_iter;
    let (mut dres, mut gap) = (f64::INFINITY, f64::INFINITY);

    for it in 0..opts.max_iter {
        // y = μ(b − Ax) + A(c − s)
        apply_a(&x, &mut ax);
        cs.iter_mut()
            .zip(c.iter().zip(&s))
            .for_each(|(o, (ci, si))| *o = ci - si);
        apply_a(&cs, &mut a_cs);
        y_prev.copy_from_slice(&y);
        for i in 0..m {
            y[i] = mu * (b[i] - ax[i]) + a_cs[i];
        }
        // V = c − Aᵀy − μx ; s = Π(V) ; x = (s − V)/μ
        apply_at(&y, &mut aty);
        for i in 0..n {
            v[i] = c[i] - aty[i] - mu * x[i];
        }
        proj.project(layout, &v, &mut s)?;
        let mut dnorm = 0.0;
        for i in 0..n {
            let xn = (s[i] - v[i]) / mu;
            let d = xn - x[i];
            dnorm += d * d;
            x[i] = xn;
        }

        if it % 10 == 9 || it + 1 == opts.max_iter {
            apply_a(&x, &mut ax);
            let p_abs = ax
                .iter()
                .zip(b)
                .map(|(u, w)| (u - w).powi(2))
                .sum::<f64>()
                .sqrt();
            let d_abs = mu * dnorm.sqrt();
            let pres = p_abs / (1.0 + norm_b);
            dres = d_abs / (1.0 + norm_c);
            let pobj = dot(c, &x);
            let dobj = dot(b, &y);
            gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            if pres.max(dres).max(gap) < opts.tol {
                status = SdpStatus::Optimal;
                iterations = it + 1;
                break;
            }
            if it % 50 == 49 && farkas_certificate(layout, a, b, &y, &y_prev, &mut aty, &mut proj)?
            {
                status = SdpStatus::Infeasible;
                iterations = it + 1;
                break;
            }
            // keep the primal and dual residuals balanced
            ratio_acc += (pres.max(1e-300) / dres.max(1e-300)).ln();
            ratio_n += 1;
            if ratio_n == 5 {
                let r = ratio_acc / ratio_n as f64;
                if r > 1.0f64.ln() + 1.5 {
                    mu = (mu * 1.6).min(1e6);
                } else if r < -1.5 {
                    mu = (mu / 1.6).max(1e-6);
                }
                ratio_acc = 0.0;
                ratio_n = 0;
            }
        }
    }

    Ok(Outcome {
        dual_value: dot(b, &y),
        x,
        status,
        iterations,
        dual: dres,
        gap,
    })
}

/// Checks whether the dual step `d = y − y_prev` (or `y` itself) is a Farkas
/// ray: `bᵀd > 0` with `−Aᵀd` in the dual cone. Such a ray proves that no
/// `x ∈ K` satisfies `Ax = b`.
fn farkas_certificate(
    layout: &Layout,
    a: &[Vec<f64>],
    b: &[f64],
    y: &[f64],
    y_prev: &[f64],
    work: &mut [f64],
    proj: &mut Projector,
) -> Result<bool, SdpError> {
    let step: Vec<f64> = y.iter().zip(y_prev).map(|(u, w)| u - w).collect();
    for d in [step.as_slice(), y] {
        let bd = dot(b, d);
        if !(bd > 0.0) {
            continue;
        }
        // normalize so that bᵀd = 1
        work.iter_mut().for_each(|e| *e = 0.0);
        for (row, &di) in a.iter().zip(d) {
            if di != 0.0 {
                work.iter_mut()
                    .zip(row)
                    .for_each(|(o, r)| *o -= di / bd * r);
            }
        }
        // −Aᵀd must be PSD on matrix blocks and zero on free blocks
        let mut ok = true;
        for (&blk, &off) in layout.blocks.iter().zip(&layout.offsets) {
            if let Block::Free(k) = blk {
                if work[off..off + k].iter().any(|e| e.abs() > 1e-9) {
                    ok = false;
                }
            }
        }
        if !ok {
            continue;
        }
        let mut projected = vec![0.0; work.len()];
        let neg = proj.project(layout, work, &mut projected)?;
        if neg <= 1e-9 {
            return Ok(true);
        }
    }
    Ok(false)
}

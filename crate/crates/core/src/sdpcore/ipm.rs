//! Infeasible primal-dual interior-point method with the HKM direction and
//! Mehrotra's predictor-corrector.
//!
//! The cone is rewritten as a product of dense real symmetric blocks:
//! Hermitian `n×n` blocks become `2n×2n` blocks via `[[Re, −Im], [Im, Re]]`,
//! and each free scalar becomes the difference of two nonnegative `1×1`
//! blocks. Every layout coordinate maps to a small sparse symmetric matrix
//! `E_k`, so that constraint rows lift to `Σ a_k E_k` and the solution is read
//! back as `x_k = ⟨E_k, X⟩`. For Hermitian blocks this read-back averages the
//! realified matrix onto the embedding pattern, which preserves positivity and
//! every lifted functional.

use std::collections::BTreeMap;

use super::{
    dot, Block, Layout, Outcome, SdpError, SdpOptions, SdpStatus, ACCEPT_TOL, IPM_MAX_ITER,
};
use crate::matkernel::symmetric_eig;

const SQRT2: f64 = std::f64::consts::SQRT_2;
/// Fraction of the distance to the cone boundary taken per step.
const REFINE_ROUNDS: usize = 2;
const STEP_FRACTION: f64 = 0.98;
/// Tolerance on `λ_min(−Aᵀd)` for a Farkas ray normalized to `bᵀd = 1`.
const FARKAS_TOL: f64 = 1e-9;

type Mats = Vec<Vec<f64>>;

/// `(block, row, col, weight)` entries of a sparse symmetric matrix, both
/// orientations of off-diagonal pairs listed.
type Entries = Vec<(usize, usize, usize, f64)>;

/// Sparse symmetric constraint matrix grouped by block.
struct SparseRow {
    parts: Vec<(usize, Vec<(usize, usize, f64)>)>,
}

struct RealCone {
    sizes: Vec<usize>,
    /// `E_k` for every layout coordinate.
    coords: Vec<Entries>,
}

impl RealCone {
    fn new(layout: &Layout) -> Self {
        let mut sizes = Vec::new();
        let mut coords: Vec<Entries> = Vec::with_capacity(layout.dim);
        let h = SQRT2 / 4.0;
        for &b in &layout.blocks {
            match b {
                Block::Symmetric(n) => {
                    let rb = sizes.len();
                    sizes.push(n);
                    for i in 0..n {
                        coords.push(vec![(rb, i, i, 1.0)]);
                    }
                    for i in 0..n {
                        for j in i + 1..n {
                            let w = 1.0 / SQRT2;
                            coords.push(vec![(rb, i, j, w), (rb, j, i, w)]);
                        }
                    }
                }
                Block::Hermitian(n) => {
                    let rb = sizes.len();
                    sizes.push(2 * n);
                    for i in 0..n {
                        coords.push(vec![(rb, i, i, 0.5), (rb, n + i, n + i, 0.5)]);
                    }
                    for i in 0..n {
                        for j in i + 1..n {
                            coords.push(vec![
                                (rb, i, j, h),
                                (rb, j, i, h),
                                (rb, n + i, n + j, h),
                                (rb, n + j, n + i, h),
                            ]);
                            coords.push(vec![
                                (rb, n + i, j, h),
                                (rb, j, n + i, h),
                                (rb, i, n + j, -h),
                                (rb, n + j, i, -h),
                            ]);
                        }
                    }
                }
                Block::Free(n) => {
                    for _ in 0..n {
                        let plus = sizes.len();
                        sizes.push(1);
                        sizes.push(1);
                        coords.push(vec![(plus, 0, 0, 1.0), (plus + 1, 0, 0, -1.0)]);
                    }
                }
            }
        }
        RealCone { sizes, coords }
    }

    fn zeros(&self) -> Mats {
        self.sizes.iter().map(|&n| vec![0.0; n * n]).collect()
    }

    fn identity(&self, scale: f64) -> Mats {
        self.sizes
            .iter()
            .map(|&n| {
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    m[i * n + i] = scale;
                }
                m
            })
            .collect()
    }

    fn lift_row(&self, row: &[f64]) -> SparseRow {
        let mut acc: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for (k, &a) in row.iter().enumerate() {
            if a != 0.0 {
                for &(rb, p, q, w) in &self.coords[k] {
                    *acc.entry((rb, p, q)).or_insert(0.0) += a * w;
                }
            }
        }
        let mut parts: Vec<(usize, Vec<(usize, usize, f64)>)> = Vec::new();
        for ((rb, p, q), w) in acc {
            if w == 0.0 {
                continue;
            }
            match parts.last_mut() {
                Some((b, list)) if *b == rb => list.push((p, q, w)),
                _ => parts.push((rb, vec![(p, q, w)])),
            }
        }
        SparseRow { parts }
    }

    fn lift_dense(&self, v: &[f64]) -> Mats {
        let mut out = self.zeros();
        for (k, &a) in v.iter().enumerate() {
            if a != 0.0 {
                for &(rb, p, q, w) in &self.coords[k] {
                    out[rb][p * self.sizes[rb] + q] += a * w;
                }
            }
        }
        out
    }

    fn read_back(&self, x: &Mats) -> Vec<f64> {
        self.coords
            .iter()
            .map(|e| {
                e.iter()
                    .map(|&(rb, p, q, w)| w * x[rb][p * self.sizes[rb] + q])
                    .sum()
            })
            .collect()
    }
}

fn apply_a(cone: &RealCone, rows: &[SparseRow], x: &Mats) -> Vec<f64> {
    rows.iter()
        .map(|r| {
            r.parts
                .iter()
                .map(|(rb, list)| {
                    let n = cone.sizes[*rb];
                    list.iter()
                        .map(|&(p, q, w)| w * x[*rb][p * n + q])
                        .sum::<f64>()
                })
                .sum()
        })
        .collect()
}

fn apply_at(cone: &RealCone, rows: &[SparseRow], y: &[f64]) -> Mats {
    let mut out = cone.zeros();
    for (r, &yi) in rows.iter().zip(y) {
        if yi == 0.0 {
            continue;
        }
        for (rb, list) in &r.parts {
            let n = cone.sizes[*rb];
            for &(p, q, w) in list {
                out[*rb][p * n + q] += yi * w;
            }
        }
    }
    out
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                let (row, brow) = (&mut out[i * n..(i + 1) * n], &b[k * n..(k + 1) * n]);
                row.iter_mut().zip(brow).for_each(|(o, bv)| *o += aik * bv);
            }
        }
    }
    out
}

fn symmetrize(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = s;
            a[j * n + i] = s;
        }
    }
}

/// Lower Cholesky factor, or `None` when `a` is not numerically positive
/// definite.
fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[k * n + i] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    z
}

fn inverse_from_cholesky(l: &[f64], n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = cholesky_solve(l, n, &e);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    symmetrize(&mut inv, n);
    inv
}

/// Solves `L Z = B` column by column (`B` row-major `n×n`).
fn forward_solve_matrix(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut z = b.to_vec();
    for c in 0..n {
        for i in 0..n {
            let mut s = z[i * n + c];
            for k in 0..i {
                s -= l[i * n + k] * z[k * n + c];
            }
            z[i * n + c] = s / l[i * n + i];
        }
    }
    z
}

/// Largest `α` with `X + α dX ⪰ 0` (infinite when `dX ⪰ 0`).
fn max_step(x: &[f64], dx: &[f64], n: usize) -> f64 {
    if n == 1 {
        return if dx[0] < 0.0 {
            -x[0] / dx[0]
        } else {
            f64::INFINITY
        };
    }
    let Some(l) = cholesky(x, n) else { return 0.0 };
    // Z = L⁻¹ dX L⁻ᵀ
    let y = forward_solve_matrix(&l, n, dx);
    let mut yt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            yt[j * n + i] = y[i * n + j];
        }
    }
    let mut z = forward_solve_matrix(&l, n, &yt);
    symmetrize(&mut z, n);
    let (vals, _) = symmetric_eig(&z, n);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min
    }
}

fn frob(m: &Mats) -> f64 {
    m.iter()
        .flat_map(|b| b.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

fn inner(a: &Mats, b: &Mats) -> f64 {
    a.iter().zip(b).map(|(x, y)| dot(x, y)).sum()
}

/// Schur complement `M_ij = ⟨A_i, X A_j S⁻¹⟩`.
fn schur(
    cone: &RealCone,
    rows: &[SparseRow],
    touch: &[Vec<(usize, usize)>],
    x: &Mats,
    sinv: &Mats,
) -> Vec<f64> {
    let m = rows.len();
    let mut big = vec![0.0; m * m];
    for (rb, list) in touch.iter().enumerate() {
        let n = cone.sizes[rb];
        for &(j, pj) in list {
            // W = X A_j S⁻¹ restricted to this block
            let mut t = vec![0.0; n * n];
            let mut cols = vec![false; n];
            for &(p, q, w) in &rows[j].parts[pj].1 {
                cols[q] = true;
                for r in 0..n {
                    t[r * n + q] += x[rb][r * n + p] * w;
                }
            }
            let mut wm = vec![0.0; n * n];
            for q in (0..n).filter(|&q| cols[q]) {
                for r in 0..n {
                    let trq = t[r * n + q];
                    if trq != 0.0 {
                        let (row, srow) =
                            (&mut wm[r * n..(r + 1) * n], &sinv[rb][q * n..(q + 1) * n]);
                        row.iter_mut().zip(srow).for_each(|(o, s)| *o += trq * s);
                    }
                }
            }
            for &(i, pi) in list {
                let v: f64 = rows[i].parts[pi]
                    .1
                    .iter()
                    .map(|&(p, q, w)| w * wm[p * n + q])
                    .sum();
                big[i * m + j] += v;
            }
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            let s = 0.5 * (big[i * m + j] + big[j * m + i]);
            big[i * m + j] = s;
            big[j * m + i] = s;
        }
    }
    big
}

struct Direction {
    dx: Mats,
    dy: Vec<f64>,
    ds: Mats,
}

#[allow(clippy::too_many_arguments)]
fn direction(
    cone: &RealCone,
    rows: &[SparseRow],
    chol_m: &[f64],
    x: &Mats,
    sinv: &Mats,
    rp: &[f64],
    rd: &Mats,
    sigma_mu: f64,
    corr: Option<&Mats>,
) -> Direction {
    let m = rows.len();
    let nb = cone.sizes.len();
    let mut g = Vec::with_capacity(nb);
    let mut hmat = Vec::with_capacity(nb);
    for b in 0..nb {
        let n = cone.sizes[b];
        // G = (σμ I − corr) S⁻¹ − X
        let mut left = vec![0.0; n * n];
        for i in 0..n {
            left[i * n + i] = sigma_mu;
        }
        if let Some(c) = corr {
            left.iter_mut().zip(&c[b]).for_each(|(l, cv)| *l -= cv);
        }
        let mut gb = matmul(&left, &sinv[b], n);
        gb.iter_mut().zip(&x[b]).for_each(|(gv, xv)| *gv -= xv);
        g.push(gb);
        hmat.push(matmul(&matmul(&x[b], &rd[b], n), &sinv[b], n));
    }
    let ag = apply_a(cone, rows, &g);
    let ah = apply_a(cone, rows, &hmat);
    let rhs: Vec<f64> = (0..m).map(|i| rp[i] - ag[i] + ah[i]).collect();
    let mut dy = cholesky_solve(chol_m, m, &rhs);
    let mut dx = Vec::new();
    let mut ds: Mats = Vec::new();
    // Refine dy against the primal equation itself: a correction δ in dy moves
    // A(dX) by M δ, so the computed step keeps A(dX) = rp despite cancellation
    // in the Schur complement.
    for round in 0..=REFINE_ROUNDS {
        let aty = apply_at(cone, rows, &dy);
        ds = rd
            .iter()
            .zip(&aty)
            .map(|(r, a)| r.iter().zip(a).map(|(u, v)| u - v).collect::<Vec<f64>>())
            .collect();
        dx = Vec::with_capacity(nb);
        for b in 0..nb {
            let n = cone.sizes[b];
            let xds = matmul(&matmul(&x[b], &ds[b], n), &sinv[b], n);
            let mut d: Vec<f64> = g[b].iter().zip(&xds).map(|(u, v)| u - v).collect();
            symmetrize(&mut d, n);
            dx.push(d);
        }
        if round == REFINE_ROUNDS {
            break;
        }
        let adx = apply_a(cone, rows, &dx);
        let err: Vec<f64> = rp.iter().zip(&adx).map(|(u, v)| u - v).collect();
        let delta = cholesky_solve(chol_m, m, &err);
        dy.iter_mut().zip(&delta).for_each(|(u, v)| *u += v);
    }
    Direction { dx, dy, ds }
}

/// True when `d = y/bᵀy` is a Farkas ray: `−Aᵀd ⪰ 0`.
fn farkas(cone: &RealCone, rows: &[SparseRow], b: &[f64], y: &[f64]) -> bool {
    let by = dot(b, y);
    if !(by > 0.0) {
        return false;
    }
    let d: Vec<f64> = y.iter().map(|v| -v / by).collect();
    let z = apply_at(cone, rows, &d);
    z.iter().zip(&cone.sizes).all(|(zb, &n)| {
        let mut s = zb.clone();
        symmetrize(&mut s, n);
        let (vals, _) = symmetric_eig(&s, n);
        vals.iter().all(|&v| v >= -FARKAS_TOL)
    })
}

pub(super) fn run(
    layout: &Layout,
    c: &[f64],
    rows: &[&[f64]],
    b: &[f64],
    opts: &SdpOptions,
) -> Result<Outcome, SdpError> {
    let cone = RealCone::new(layout);
    let a: Vec<SparseRow> = rows.iter().map(|r| cone.lift_row(r)).collect();
    let cm = cone.lift_dense(c);
    let m = a.len();
    let nb = cone.sizes.len();
    let total_n: usize = cone.sizes.iter().sum();

    let mut touch: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nb];
    for (i, r) in a.iter().enumerate() {
        for (pi, (rb, _)) in r.parts.iter().enumerate() {
            touch[*rb].push((i, pi));
        }
    }

    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_c = frob(&cm);
    let mut x = cone.identity(1.0);
    let mut s = cone.identity(1.0);
    let mut y = vec![0.0; m];

    let max_iter = opts.max_iter.min(IPM_MAX_ITER);
    let mut status = SdpStatus::Indeterminate;
    let mut iterations = max_iter;
    let (mut pres, mut dres, mut gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);

    for it in 0..=max_iter {
        let ax = apply_a(&cone, &a, &x);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
        let aty = apply_at(&cone, &a, &y);
        let rd: Mats = (0..nb)
            .map(|k| {
                (0..cm[k].len())
                    .map(|e| cm[k][e] - aty[k][e] - s[k][e])
                    .collect()
            })
            .collect();
        let pobj = inner(&cm, &x);
        let dobj = dot(b, &y);
        pres = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + norm_b);
        dres = frob(&rd) / (1.0 + norm_c);
        gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if pres.max(dres).max(gap) < opts.tol {
            status = SdpStatus::Optimal;
            iterations = it;
            break;
        }
        if farkas(&cone, &a, b, &y) {
            status = SdpStatus::Infeasible;
            iterations = it;
            break;
        }
        if it == max_iter {
            break;
        }
        let mu = inner(&x, &s) / total_n as f64;

        let mut sinv = Vec::with_capacity(nb);
        for (k, &n) in cone.sizes.iter().enumerate() {
            match cholesky(&s[k], n) {
                Some(l) => sinv.push(inverse_from_cholesky(&l, n)),
                None => {
                    iterations = it;
                    return Ok(finish(&cone, &x, &y, b, pres, dres, gap, iterations));
                }
            }
        }
        let mut big = schur(&cone, &a, &touch, &x, &sinv);
        let chol_m = match factor_regularized(&mut big, m) {
            Some(l) => l,
            None => {
                iterations = it;
                break;
            }
        };

        // predictor
        let pred = direction(&cone, &a, &chol_m, &x, &sinv, &rp, &rd, 0.0, None);
        let (ap, ad) = step_lengths(&cone, &x, &s, &pred, 1.0);
        let mut mu_aff = 0.0;
        for k in 0..nb {
            let xa: Vec<f64> = x[k]
                .iter()
                .zip(&pred.dx[k])
                .map(|(u, v)| u + ap * v)
                .collect();
            let sa: Vec<f64> = s[k]
                .iter()
                .zip(&pred.ds[k])
                .map(|(u, v)| u + ad * v)
                .collect();
            mu_aff += dot(&xa, &sa);
        }
        mu_aff /= total_n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let corr: Mats = (0..nb)
            .map(|k| matmul(&pred.dx[k], &pred.ds[k], cone.sizes[k]))
            .collect();
        let dir = direction(
            &cone,
            &a,
            &chol_m,
            &x,
            &sinv,
            &rp,
            &rd,
            sigma * mu,
            Some(&corr),
        );
        let (ap, ad) = step_lengths(&cone, &x, &s, &dir, STEP_FRACTION);
        if ap < 1e-12 && ad < 1e-12 {
            iterations = it;
            break;
        }
        for k in 0..nb {
            x[k].iter_mut()
                .zip(&dir.dx[k])
                .for_each(|(u, v)| *u += ap * v);
            s[k].iter_mut()
                .zip(&dir.ds[k])
                .for_each(|(u, v)| *u += ad * v);
        }
        y.iter_mut().zip(&dir.dy).for_each(|(u, v)| *u += ad * v);
    }

    let mut out = finish(&cone, &x, &y, b, pres, dres, gap, iterations);
    out.status = match status {
        SdpStatus::Indeterminate if pres.max(dres).max(gap) <= ACCEPT_TOL => SdpStatus::Optimal,
        other => other,
    };
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    cone: &RealCone,
    x: &Mats,
    y: &[f64],
    b: &[f64],
    _pres: f64,
    dres: f64,
    gap: f64,
    iterations: usize,
) -> Outcome {
    Outcome {
        x: cone.read_back(x),
        dual_value: dot(b, y),
        status: SdpStatus::Indeterminate,
        iterations,
        dual: dres,
        gap,
    }
}

fn step_lengths(cone: &RealCone, x: &Mats, s: &Mats, d: &Direction, fraction: f64) -> (f64, f64) {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for (k, &n) in cone.sizes.iter().enumerate() {
        ap = ap.min(max_step(&x[k], &d.dx[k], n));
        ad = ad.min(max_step(&s[k], &d.ds[k], n));
    }
    ((fraction * ap).min(1.0), (fraction * ad).min(1.0))
}

/// Cholesky of the Schur complement, adding a growing diagonal shift when
/// round-off has cost it positive definiteness.
fn factor_regularized(big: &mut [f64], m: usize) -> Option<Vec<f64>> {
    if m == 0 {
        return Some(Vec::new());
    }
    if let Some(l) = cholesky(big, m) {
        return Some(l);
    }
    let scale = (0..m)
        .map(|i| big[i * m + i].abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut shift = 1e-14 * scale;
    for _ in 0..8 {
        for i in 0..m {
            big[i * m + i] += shift;
        }
        if let Some(l) = cholesky(big, m) {
            return Some(l);
        }
        shift *= 100.0;
    }
    None
}

//! Facial reduction of symmetric blocks.
//!
//! When every feasible `X_b` is known to have its range inside the column
//! space of an orthonormal `V_b`, substituting `X_b = V_b W_b V_bᵀ` gives a
//! smaller problem that can regain a strictly feasible point. Without one the
//! central path does not exist and path-following methods stall short of the
//! optimum, with errors growing like the square root of the attainable
//! equality residual.
//!
//! Substitution makes some constraint rows dependent up to the accuracy of
//! `V`. The restricted rows are therefore rebuilt from a truncated singular
//! value decomposition, and the discarded right-hand side is reported.

use super::{Block, BlockValue, Layout, LinearFunctional, SdpError, SdpProblem, Sense, SQRT2};
use crate::matkernel::{symmetric_eig, ComplexMatrix};

/// Singular values of the restricted constraint matrix below this fraction of
/// the largest are treated as zero.
pub const FACE_RANK_TOL: f64 = 1e-6;

/// Orthonormal basis of a face of the PSD cone, as the columns of an `n×r`
/// row-major array.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceBasis {
    n: usize,
    rank: usize,
    v: Vec<f64>,
}

impl FaceBasis {
    /// Range of a PSD matrix (row-major `n×n`): eigenvectors whose eigenvalue
    /// exceeds `rel_tol` times the largest one.
    pub fn from_psd(m: &[f64], n: usize, rel_tol: f64) -> Self {
        let (vals, vecs) = symmetric_eig(m, n);
        let top = vals.first().copied().unwrap_or(0.0).max(0.0);
        let rank = vals.iter().filter(|&&l| l > rel_tol * top).count().max(1);
        let mut v = vec![0.0; n * rank];
        for i in 0..n {
            v[i * rank..(i + 1) * rank].copy_from_slice(&vecs[i * n..i * n + rank]);
        }
        FaceBasis { n, rank, v }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `V W Vᵀ` for a row-major `r×r` matrix `W`.
    pub fn lift(&self, w: &[f64]) -> Vec<f64> {
        let (n, r) = (self.n, self.rank);
        let mut vw = vec![0.0; n * r];
        for i in 0..n {
            for k in 0..r {
                vw[i * r + k] = (0..r).map(|l| self.v[i * r + l] * w[l * r + k]).sum();
            }
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..r).map(|k| vw[i * r + k] * self.v[j * r + k]).sum();
            }
        }
        out
    }
}

/// A problem restricted to faces, with the map back to the original blocks.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub problem: SdpProblem,
    /// Norm of the right-hand side component lost with the dropped rows.
    pub inconsistency: f64,
    /// Number of constraint rows of the restricted problem.
    pub kept_rows: usize,
    bases: Vec<Option<FaceBasis>>,
}

impl Restriction {
    /// Maps block values of the restricted problem back to the original ones.
    pub fn lift(&self, blocks: &[BlockValue]) -> Vec<BlockValue> {
        blocks
            .iter()
            .zip(&self.bases)
            .map(|(bv, basis)| match (bv, basis) {
                (BlockValue::Matrix(w), Some(f)) => {
                    let re: Vec<f64> = w.entries().iter().map(|z| z.re).collect();
                    BlockValue::Matrix(ComplexMatrix::from_real(f.n, f.n, &f.lift(&re)))
                }
                (other, _) => other.clone(),
            })
            .collect()
    }
}

/// Substitutes `X_b = V_b W_b V_bᵀ` for every block with a basis. Only real
/// symmetric blocks can be restricted.
pub fn restrict(p: &SdpProblem, bases: &[Option<FaceBasis>]) -> Result<Restriction, SdpError> {
    p.validate()?;
    if bases.len() != p.blocks.len() {
        return Err(SdpError::Malformed(format!(
            "{} face bases for {} blocks",
            bases.len(),
            p.blocks.len()
        )));
    }
    let mut blocks = Vec::with_capacity(p.blocks.len());
    for (&b, basis) in p.blocks.iter().zip(bases) {
        blocks.push(match (b, basis) {
            (Block::Symmetric(n), Some(f)) if f.n == n => Block::Symmetric(f.rank),
            (b, Some(_)) => {
                return Err(SdpError::Malformed(format!("cannot restrict block {b:?}")))
            }
            (b, None) => b,
        });
    }
    let layout = Layout::new(&blocks);
    let substitute = |f: &LinearFunctional| -> Vec<f64> { layout.dense(&map_functional(f, bases)) };

    let objective = from_dense(&layout, &substitute(&p.objective));
    let rows: Vec<Vec<f64>> = p.constraints.iter().map(|(f, _)| substitute(f)).collect();
    let rhs: Vec<f64> = p.constraints.iter().map(|(_, r)| *r).collect();

    // truncated SVD through the eigendecomposition of RᵀR
    let d = layout.dim;
    let mut gram = vec![0.0; d * d];
    for r in &rows {
        for i in 0..d {
            if r[i] != 0.0 {
                for j in 0..d {
                    gram[i * d + j] += r[i] * r[j];
                }
            }
        }
    }
    let (vals, vecs) = symmetric_eig(&gram, d);
    let top = vals.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    let mut restricted = SdpProblem::new(blocks);
    match p.sense {
        Sense::Minimize => restricted.minimize(objective),
        Sense::Maximize => restricted.maximize(objective),
    };
    let mut explained = vec![0.0; rhs.len()];
    let mut kept_rows = 0;
    for (k, &l) in vals.iter().enumerate() {
        let sigma = l.max(0.0).sqrt();
        if sigma <= FACE_RANK_TOL * top || sigma == 0.0 {
            break;
        }
        let vk: Vec<f64> = (0..d).map(|i| vecs[i * d + k]).collect();
        // left singular vector u = R v / σ and the projected right-hand side
        let u: Vec<f64> = rows.iter().map(|r| super::dot(r, &vk) / sigma).collect();
        let uk = super::dot(&u, &rhs);
        explained
            .iter_mut()
            .zip(&u)
            .for_each(|(e, ui)| *e += ui * uk);
        restricted.add_constraint(from_dense(&layout, &vk), uk / sigma);
        kept_rows += 1;
    }
    let inconsistency = rhs
        .iter()
        .zip(&explained)
        .map(|(r, e)| (r - e) * (r - e))
        .sum::<f64>()
        .sqrt();
    Ok(Restriction {
        problem: restricted,
        inconsistency,
        kept_rows,
        bases: bases.to_vec(),
    })
}

/// Rewrites terms on restricted blocks as terms on `W`.
fn map_functional(f: &LinearFunctional, bases: &[Option<FaceBasis>]) -> LinearFunctional {
    let mut out = LinearFunctional::new();
    for t in f.terms() {
        match &bases[t.block] {
            None => {
                out.add_complex(t.block, t.row, t.col, t.coeff);
            }
            Some(fb) => {
                // X[row, col] = Σ_kl V[row, k] W[k, l] V[col, l]
                let r = fb.rank;
                for k in 0..r {
                    let a = t.coeff.re * fb.v[t.row * r + k];
                    if a == 0.0 {
                        continue;
                    }
                    for l in 0..r {
                        let c = a * fb.v[t.col * r + l];
                        if c != 0.0 {
                            out.add(t.block, k, l, c);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Functional whose coefficient vector in `layout` is `v`.
fn from_dense(layout: &Layout, v: &[f64]) -> LinearFunctional {
    let mut f = LinearFunctional::new();
    for (b, (&block, &off)) in layout.blocks.iter().zip(&layout.offsets).enumerate() {
        match block {
            Block::Free(n) => (0..n).filter(|&i| v[off + i] != 0.0).for_each(|i| {
                f.add(b, i, 0, v[off + i]);
            }),
            Block::Symmetric(n) => {
                for i in 0..n {
                    if v[off + i] != 0.0 {
                        f.add(b, i, i, v[off + i]);
                    }
                }
                for i in 0..n {
                    for j in i + 1..n {
                        let c = v[off + n + Layout::upper_index(n, i, j)];
                        if c != 0.0 {
                            f.add(b, i, j, c * SQRT2);
                        }
                    }
                }
            }
            Block::Hermitian(_) => unreachable!("restricted problems have no Hermitian blocks"),
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdpcore::{solve, SdpOptions, SdpStatus};

    #[test]
    fn rank_one_face_recovers_the_optimum() {
        // maximize X01 with diag(X) = (1, 1) and X00 = X01: only the all-ones
        // matrix is feasible, so the problem has no interior point.
        let mut p = SdpProblem::new(vec![Block::Symmetric(2)]);
        p.maximize(LinearFunctional::new().with(0, 0, 1, 1.0));
        p.add_constraint(LinearFunctional::new().with(0, 0, 0, 1.0), 1.0);
        p.add_constraint(LinearFunctional::new().with(0, 1, 1, 1.0), 1.0);
        p.add_constraint(
            LinearFunctional::new()
                .with(0, 0, 0, 1.0)
                .with(0, 0, 1, -1.0),
            0.0,
        );
        let face = FaceBasis::from_psd(&[1.0, 1.0, 1.0, 1.0], 2, 1e-9);
        assert_eq!(face.rank(), 1);
        let r = restrict(&p, &[Some(face)]).unwrap();
        assert_eq!(r.kept_rows, 1);
        assert!(r.inconsistency < 1e-12);
        let sol = solve(&r.problem, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.objective_value - 1.0).abs() < 1e-9);
        let x = r.lift(&sol.blocks);
        let m = x[0].matrix().unwrap();
        for z in m.entries() {
            assert!((z.re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn full_face_is_the_identity_map() {
        let mut p = SdpProblem::new(vec![Block::Symmetric(2)]);
        p.minimize(
            LinearFunctional::new()
                .with(0, 0, 0, 1.0)
                .with(0, 1, 1, 1.0),
        );
        p.add_constraint(LinearFunctional::new().with(0, 0, 1, 1.0), 0.5);
        let face = FaceBasis::from_psd(&[2.0, 0.0, 0.0, 1.0], 2, 1e-9);
        assert_eq!(face.rank(), 2);
        let r = restrict(&p, &[Some(face)]).unwrap();
        let sol = solve(&r.problem, &SdpOptions::default()).unwrap();
        assert!((sol.objective_value - 1.0).abs() < 1e-7);
    }
}

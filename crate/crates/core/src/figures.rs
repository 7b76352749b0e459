//! Figure data: the entanglement sweep, the CHSH map of the bipartite family,
//! and the incompatibility trade-off, with CSV rendering.
//!
//! Rows come out in grid order (row-major in the first coordinate) whatever
//! order the cells were evaluated in.

use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{
    construct_bipartite_family, g_bound, is_feasible, maximize_f_over_a, AnalyticError,
};
use crate::incompat::{tradeoff_curve, IncompatError, TradeoffCurve};
use crate::scenario::ScenarioError;

/// Significant digits of every CSV number.
pub const CSV_DIGITS: usize = 12;

pub const FIG2_HEADER: &str = "s,t,A_star2,f_star";
pub const FIG3_HEADER: &str = "x,z,chsh";
pub const FIG4_HEADER: &str = "x,z,eta_A,eta_B";

#[derive(Debug, Error)]
pub enum FigureError {
    #[error("grid must have at least 2 points per axis (got {0})")]
    Grid(usize),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Incompat(#[from] IncompatError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

fn check_grid(grid: usize) -> Result<(), FigureError> {
    if grid < 2 {
        return Err(FigureError::Grid(grid));
    }
    Ok(())
}

/// `i`-th of `grid` equally spaced points on `[0, upper]`, hitting `upper`
/// exactly at the last index.
pub fn lattice(i: usize, grid: usize, upper: f64) -> f64 {
    if i + 1 == grid {
        upper
    } else {
        upper * i as f64 / (grid - 1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig2Row {
    pub s: f64,
    pub t: f64,
    /// Optimal squared Schmidt coefficient.
    pub a_star2: f64,
    pub f_star: f64,
}

/// Optimal Schmidt coefficient over `s_i = t_i = (i + 1) / (2 grid)`, so the
/// lattice covers `(0, 1/2]`.
pub fn fig2(grid: usize) -> Result<Vec<Fig2Row>, FigureError> {
    check_grid(grid)?;
    let coord = |i: usize| 0.5 * (i + 1) as f64 / grid as f64;
    (0..grid * grid)
        .into_par_iter()
        .map(|k| {
            let (s, t) = (coord(k / grid), coord(k % grid));
            let r = maximize_f_over_a(s, t)?;
            Ok(Fig2Row {
                s,
                t,
                a_star2: r.a_star * r.a_star,
                f_star: r.f_star,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig3Row {
    pub x: f64,
    pub z: f64,
    pub chsh: f64,
}

/// CHSH value of the bipartite family over the `grid × grid` lattice on
/// `[0, 1/2]²`. Cells where the family does not exist are omitted.
pub fn fig3(grid: usize) -> Result<Vec<Fig3Row>, FigureError> {
    check_grid(grid)?;
    let cells: Vec<Option<Fig3Row>> = (0..grid * grid)
        .into_par_iter()
        .map(|k| {
            let (x, z) = (lattice(k / grid, grid, 0.5), lattice(k % grid, grid, 0.5));
            if !is_feasible(g_bound(x, z)?) {
                return Ok(None);
            }
            let chsh = construct_bipartite_family(x, z)?.behavior().chsh_value()?;
            Ok(Some(Fig3Row { x, z, chsh }))
        })
        .collect::<Result<_, FigureError>>()?;
    Ok(cells.into_iter().flatten().collect())
}

/// Robustness trade-off of the bipartite family with its Pareto frontier.
pub fn fig4(grid: usize) -> Result<TradeoffCurve, FigureError> {
    check_grid(grid)?;
    Ok(tradeoff_curve(grid)?)
}

/// Formats `v` with [`CSV_DIGITS`] significant digits. Plain notation is used
/// for magnitudes in `[1e-4, 1e12)`, scientific notation otherwise.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // exponent after rounding, so 0.9999999999999 counts as 1.00000000000
    let sci = format!("{v:.*e}", CSV_DIGITS - 1);
    let exp: i32 = sci[sci.find('e').expect("scientific notation") + 1..]
        .parse()
        .expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (CSV_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

fn csv<I: IntoIterator<Item = Vec<f64>>>(header: &str, rows: I) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        let line: Vec<String> = r.into_iter().map(fmt_sig).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn fig2_csv(rows: &[Fig2Row]) -> String {
    csv(
        FIG2_HEADER,
        rows.iter().map(|r| vec![r.s, r.t, r.a_star2, r.f_star]),
    )
}

pub fn fig3_csv(rows: &[Fig3Row]) -> String {
    csv(FIG3_HEADER, rows.iter().map(|r| vec![r.x, r.z, r.chsh]))
}

/// Grid points and frontier of the trade-off, as two CSV documents.
pub fn fig4_csv(curve: &TradeoffCurve) -> (String, String) {
    let render = |pts: &[crate::incompat::TradeoffPoint]| {
        csv(
            FIG4_HEADER,
            pts.iter().map(|p| vec![p.x, p.z, p.eta_a, p.eta_b]),
        )
    };
    (render(&curve.points), render(&curve.frontier))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(0.45), "0.450000000000");
        assert_eq!(fmt_sig(2.5), "2.50000000000");
        assert_eq!(fmt_sig(std::f64::consts::FRAC_1_SQRT_2), "0.707106781187");
        assert_eq!(fmt_sig(-0.001234), "-0.00123400000000");
        assert_eq!(fmt_sig(1.5e-7), "1.50000000000e-7");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.99999999999999), "1.00000000000");
        assert_eq!(fmt_sig(9.9999999999999e-5), "0.000100000000000");
        for v in [0.123456789012345, 3.0, 1e-3, 0.999999999999999] {
            let back: f64 = fmt_sig(v).parse().unwrap();
            assert!((back - v).abs() <= 1e-11 * v.abs().max(1e-300) * 10.0);
        }
    }

    #[test]
    fn fig3_omits_infeasible_cells() {
        let rows = fig3(3).unwrap();
        // lattice {0, 1/4, 1/2}²: only cells with g ≥ 0 survive
        for r in &rows {
            assert!(g_bound(r.x, r.z).unwrap() >= 0.0);
        }
        assert!(rows.len() < 9);
        let csv = fig3_csv(&rows);
        assert!(csv.starts_with("x,z,chsh\n"));
        assert_eq!(csv.lines().count(), rows.len() + 1);
    }

    #[test]
    fn fig2_lattice_and_symmetry() {
        let rows = fig2(5).unwrap();
        assert_eq!(rows.len(), 25);
        assert_eq!(rows[0].s, 0.1);
        assert_eq!(rows[24].t, 0.5);
        for r in &rows {
            let m = rows.iter().find(|q| q.s == r.t && q.t == r.s).unwrap();
            assert!((m.f_star - r.f_star).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_degenerate_grid() {
        assert!(matches!(fig2(1), Err(FigureError::Grid(1))));
        assert!(fig3(0).is_err());
        assert!(fig4(1).is_err());
    }
}

//! Dense phase-1 simplex for small equality-constrained feasibility
//! problems: minimize the total artificial slack of `A x = b, x >= 0`.
//!
//! Bland's anti-cycling rule throughout: the entering column is the lowest
//! eligible index, and ratio-test ties leave the lowest basic variable. The
//! problems this crate solves have at most a few dozen rows, so a dense
//! tableau is the right tool.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const MAX_PIVOTS: u64 = 100_000;

pub(crate) struct Phase1Solution {
    /// Optimal total artificial slack; feasible systems reach (near) zero.
    pub objective: f64,
    /// The structural variables at the optimum.
    pub x: Vec<f64>,
}

/// Minimizes the total artificial slack of `A x = b`, `x >= 0`.
/// Requires `b >= 0` entrywise.
pub(crate) fn phase_one(a: &[Vec<f64>], b: &[f64]) -> Result<Phase1Solution> {
    let m = a.len();
    let n = if m > 0 { a[0].len() } else { 0 };
    debug_assert!(b.iter().all(|&v| v >= 0.0));

    // Tableau columns: n structural, m artificial, then the RHS.
    let cols = n + m + 1;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, row) in a.iter().enumerate() {
        let mut r = vec![0.0; cols];
        r[..n].copy_from_slice(row);
        r[n + i] = 1.0;
        r[cols - 1] = b[i];
        t.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced-cost row for min sum(artificials): with the artificial basis,
    // the reduced cost of column j is -sum_i a_ij.
    let mut obj = vec![0.0; cols];
    for r in &t {
        for (o, v) in obj.iter_mut().zip(r) {
            *o -= v;
        }
    }
    for o in &mut obj[n..n + m] {
        *o = 0.0;
    }

    for _pivot in 0..MAX_PIVOTS {
        // Bland: lowest-index improving column.
        let entering = (0..n + m).find(|&j| obj[j] < -PIVOT_TOL);
        let Some(j) = entering else {
            return Ok(extract(&t, &basis, n, m));
        };
        // Ratio test; ties leave the lowest basic variable.
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[j] > PIVOT_TOL {
                let ratio = row[cols - 1] / row[j];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - PIVOT_TOL
                            || ((ratio - br).abs() <= PIVOT_TOL && basis[i] < basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
        }
        let Some((r, _)) = leave else {
            // Phase 1 is bounded below by zero, so an unbounded ray is a
            // numerical breakdown, not a real certificate.
            return Err(Error::NoConvergence {
                iterations: _pivot,
                gap: f64::NAN,
            });
        };
        // Pivot on (r, j).
        let piv = t[r][j];
        for v in &mut t[r] {
            *v /= piv;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && row[j] != 0.0 {
                let factor = row[j];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                row[j] = 0.0;
            }
        }
        if obj[j] != 0.0 {
            let factor = obj[j];
            for (o, p) in obj.iter_mut().zip(&pivot_row) {
                *o -= factor * p;
            }
            obj[j] = 0.0;
        }
        basis[r] = j;
    }
    Err(Error::NoConvergence {
        iterations: MAX_PIVOTS,
        gap: f64::NAN,
    })
}

fn extract(t: &[Vec<f64>], basis: &[usize], n: usize, m: usize) -> Phase1Solution {
    let cols = n + m + 1;
    let mut x = vec![0.0; n];
    let mut objective = 0.0;
    for (i, &var) in basis.iter().enumerate() {
        let value = t[i][cols - 1];
        if var < n {
            x[var] = value.max(0.0);
        } else {
            objective += value.max(0.0);
        }
    }
    Phase1Solution { objective, x }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_system_reaches_zero_slack() {
        // x1 + x2 = 1, x2 - x1 = 0 -> x = (1/2, 1/2).
        let a = [vec![1.0, 1.0], vec![-1.0, 1.0]];
        let sol = phase_one(&a, &[1.0, 0.0]).unwrap();
        assert!(sol.objective < 1e-12);
        assert!((sol.x[0] - 0.5).abs() < 1e-12);
        assert!((sol.x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_system_keeps_slack() {
        // x1 = 1 and x1 = 2 cannot both hold.
        let a = [vec![1.0], vec![1.0]];
        let sol = phase_one(&a, &[1.0, 2.0]).unwrap();
        assert!(sol.objective > 0.5);
    }

    #[test]
    fn nonnegativity_blocks_signed_solutions() {
        // x1 + x2 = 1, 2 x1 + 2 x2 = 3 is inconsistent; and
        // x1 - x2 = 2 with x1 + x2 = 1 needs x2 < 0.
        let a = [vec![1.0, 1.0], vec![1.0, -1.0]];
        let sol = phase_one(&a, &[1.0, 2.0]).unwrap();
        assert!(sol.objective > 0.5);
    }
}

//! Restarted GMRES for the matrix-free interior systems, with a damped
//! fixed-point fallback when the Krylov iteration stagnates.

use crate::{Error, Result};

/// A square linear operator applied without forming its matrix.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    /// Krylov dimension between restarts.
    pub restart: usize,
    /// Cap on operator applications.
    pub max_iter: usize,
    /// Target relative residual `|b - Ax| / |b|`.
    pub tol: f64,
    /// Relaxation used by the fallback `x <- x + ω (b - Ax)`.
    pub damping: f64,
    /// Fallback iteration cap.
    pub fallback_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            restart: 30,
            max_iter: 500,
            tol: 1e-8,
            damping: 0.5,
            fallback_iter: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// The fixed-point fallback produced `x`.
    pub used_fallback: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual<A: LinearOperator + ?Sized>(op: &A, b: &[f64], x: &[f64], r: &mut [f64]) -> f64 {
    op.apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    norm(r)
}

/// Solves `A x = b` from `x = 0`.
pub fn gmres<A: LinearOperator + ?Sized>(op: &A, b: &[f64], config: &GmresConfig) -> Result<Solution> {
    gmres_from(op, b, vec![0.0; b.len()], config)
}

/// Solves `A x = b` starting from `x0`.
pub fn gmres_from<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    x0: Vec<f64>,
    config: &GmresConfig,
) -> Result<Solution> {
    let n = op.dim();
    assert_eq!(b.len(), n, "right-hand side has wrong length");
    assert_eq!(x0.len(), n, "initial guess has wrong length");
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(Solution {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            used_fallback: false,
        });
    }

    let mut x = x0;
    let mut r = vec![0.0; n];
    let mut iterations = 0;
    let mut rel = residual(op, b, &x, &mut r) / b_norm;
    let m = config.restart.max(1).min(n);

    while rel > config.tol && iterations < config.max_iter {
        let beta = rel * b_norm;
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // Hessenberg columns, h[k][i] = H(i, k)
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        let mut w = vec![0.0; n];
        while k < m && iterations < config.max_iter {
            iterations += 1;
            op.apply(&basis[k], &mut w);
            let mut col = vec![0.0; k + 2];
            for i in 0..=k {
                let hij = dot(&basis[i], &w);
                col[i] = hij;
                for (wj, vj) in w.iter_mut().zip(&basis[i]) {
                    *wj -= hij * vj;
                }
            }
            let wn = norm(&w);
            col[k + 1] = wn;
            for i in 0..k {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = col[k].hypot(col[k + 1]);
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (col[k] / denom, col[k + 1] / denom)
            };
            cs.push(c);
            sn.push(s);
            col[k] = denom;
            col[k + 1] = 0.0;
            g[k + 1] = -s * g[k];
            g[k] *= c;
            h.push(col);
            k += 1;
            if wn <= 1e-14 * beta || g[k].abs() / b_norm <= config.tol {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the triangularized Hessenberg matrix
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut sum = g[i];
            for j in i + 1..k {
                sum -= h[j][i] * y[j];
            }
            y[i] = if h[i][i] != 0.0 { sum / h[i][i] } else { 0.0 };
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * vi;
            }
        }
        let prev = rel;
        rel = residual(op, b, &x, &mut r) / b_norm;
        if rel >= prev {
            break;
        }
    }

    if rel <= config.tol {
        return Ok(Solution {
            x,
            iterations,
            residual: rel,
            used_fallback: false,
        });
    }
    fixed_point(op, b, x, iterations, config)
}

fn fixed_point<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    mut x: Vec<f64>,
    mut iterations: usize,
    config: &GmresConfig,
) -> Result<Solution> {
    let b_norm = norm(b);
    let mut r = vec![0.0; b.len()];
    let mut rel = residual(op, b, &x, &mut r) / b_norm;
    for _ in 0..config.fallback_iter {
        if rel <= config.tol {
            return Ok(Solution {
                x,
                iterations,
                residual: rel,
                used_fallback: true,
            });
        }
        for (xi, ri) in x.iter_mut().zip(&r) {
            *xi += config.damping * ri;
        }
        iterations += 1;
        rel = residual(op, b, &x, &mut r) / b_norm;
        if !rel.is_finite() {
            break;
        }
    }
    if rel <= config.tol {
        return Ok(Solution {
            x,
            iterations,
            residual: rel,
            used_fallback: true,
        });
    }
    Err(Error::InnerSolver {
        iterations,
        residual: rel,
    })
}

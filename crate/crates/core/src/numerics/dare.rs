//! Infinite-horizon discrete-time LQR gain via the algebraic Riccati
//! equation, solved by fixed-point iteration. Dependency-free and entirely
//! adequate for the few-state systems this crate works with.

use crate::mat::{Mat, MatError};

pub const DARE_TOLERANCE: f64 = 1e-12;
pub const DARE_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DareError {
    #[error("R must be symmetric positive definite")]
    IndefiniteR,
    #[error("inconsistent matrix dimensions")]
    Dimension,
    #[error("Riccati iteration did not converge within the iteration budget")]
    NotConverged,
    #[error("linear solve failed: {0}")]
    Solve(#[from] MatError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DareSolution {
    /// Feedback gain `K = (R + B'PB)^-1 B'PA`; the stabilizing control is
    /// `u = -K x`.
    pub gain: Mat,
    /// Riccati fixed point `P`.
    pub cost: Mat,
}

/// Solve `P = Q + A'PA - A'PB (R + B'PB)^-1 B'PA` and return the gain.
pub fn solve_dare(a: &Mat, b: &Mat, q: &Mat, r: &Mat) -> Result<DareSolution, DareError> {
    let n = a.rows();
    let m = b.cols();
    if a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n || r.rows() != m || r.cols() != m {
        return Err(DareError::Dimension);
    }
    check_spd(r)?;

    let at = a.transpose();
    let bt = b.transpose();
    let mut p = q.clone();
    for _ in 0..DARE_MAX_ITERATIONS {
        let pa = &p * a;
        let pb = &p * b;
        let s = &(r + &(&bt * &pb)) as &Mat; // R + B'PB
        let k = s.solve(&(&bt * &pa))?; // (R + B'PB)^-1 B'PA
        let next = &(q + &(&at * &pa)) - &(&(&at * &pb) * &k);
        let delta = (&next - &p).max_abs();
        p = next;
        if delta < DARE_TOLERANCE {
            let pa = &p * a;
            let pb = &p * b;
            let s = r + &(&bt * &pb);
            let gain = s.solve(&(&bt * &pa))?;
            return Ok(DareSolution { gain, cost: p });
        }
    }
    Err(DareError::NotConverged)
}

fn check_spd(r: &Mat) -> Result<(), DareError> {
    let m = r.rows();
    for i in 0..m {
        for j in 0..i {
            if (r[(i, j)] - r[(j, i)]).abs() > 1e-9 * (1.0 + r[(i, j)].abs()) {
                return Err(DareError::IndefiniteR);
            }
        }
    }
    // Cholesky attempt
    let mut l = Mat::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let mut s = r[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(DareError::IndefiniteR);
                }
                l[(i, i)] = num_traits::Float::sqrt(s);
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(())
}

/// Residual of the Riccati equation at `p`; used by verification suites.
pub fn dare_residual(a: &Mat, b: &Mat, q: &Mat, r: &Mat, p: &Mat) -> f64 {
    let at = a.transpose();
    let bt = b.transpose();
    let pa = p * a;
    let pb = p * b;
    let s = r + &(&bt * &pb);
    let k = s.solve(&(&bt * &pa)).expect("S invertible");
    let next = &(q + &(&at * &pa)) - &(&(&at * &pb) * &k);
    (&next - p).inf_norm()
}

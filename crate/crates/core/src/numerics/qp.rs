//! Small dense QP with box and move-rate constraints, as produced by the
//! predictive controller. Solved by capped-iteration projected Newton
//! steps with warm starting; the iteration cap is part of the benchmark
//! contract, not a shortcut.

use alloc::vec::Vec;

use crate::mat::{Mat, MatError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QpError {
    #[error("hessian is singular")]
    SingularHessian(#[from] MatError),
    #[error("dimension mismatch between hessian and gradient")]
    Dimension,
}

/// Minimize `0.5 z'Hz + g'z` subject to `|z_i| <= bound`,
/// `|z_0 - u_prev| <= rate` and `|z_i - z_{i-1}| <= rate`.
///
/// `warm_start` seeds the iterate (pass zeros when nothing better exists).
/// At most `max_iterations` Newton steps are taken; each step is followed by
/// a forward clipping sweep that restores feasibility.
pub fn solve_box_rate_qp(
    hessian: &Mat,
    gradient: &[f64],
    u_prev: f64,
    bound: f64,
    rate: f64,
    warm_start: &[f64],
    max_iterations: usize,
) -> Result<Vec<f64>, QpError> {
    let n = gradient.len();
    if hessian.rows() != n || hessian.cols() != n || warm_start.len() != n {
        return Err(QpError::Dimension);
    }
    let mut z = warm_start.to_vec();
    project(&mut z, u_prev, bound, rate);
    for _ in 0..max_iterations {
        // residual r = Hz + g
        let mut r = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = gradient[i];
            for j in 0..n {
                s += hessian[(i, j)] * z[j];
            }
            r.push(s);
        }
        let step = hessian.solve(&Mat::col_vec(&r))?;
        let mut moved = 0.0f64;
        for i in 0..n {
            z[i] -= step[(i, 0)];
        }
        project(&mut z, u_prev, bound, rate);
        for i in 0..n {
            moved = moved.max(step[(i, 0)].abs());
        }
        if moved < 1e-12 {
            break;
        }
    }
    Ok(z)
}

/// Forward sweep: clamp each move against the box and against the rate
/// limit relative to its (already clamped) predecessor.
fn project(z: &mut [f64], u_prev: f64, bound: f64, rate: f64) {
    let mut prev = u_prev;
    for v in z.iter_mut() {
        let lo = (prev - rate).max(-bound);
        let hi = (prev + rate).min(bound);
        *v = v.clamp(lo, hi);
        prev = *v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unconstrained_matches_direct_solve() {
        let h = Mat::from_rows(&[&[4.0, 1.0, 0.0], &[1.0, 3.0, 0.5], &[0.0, 0.5, 2.0]]);
        let g = [1.0, -2.0, 0.3];
        let z = solve_box_rate_qp(&h, &g, 0.0, 1e9, 1e9, &[0.0; 3], 10).unwrap();
        let direct = h.solve(&Mat::col_vec(&[-1.0, 2.0, -0.3])).unwrap();
        for i in 0..3 {
            assert_relative_eq!(z[i], direct[(i, 0)], epsilon = 1e-10);
        }
    }

    #[test]
    fn box_bound_respected() {
        // minimum at z = 5, box at 1
        let h = Mat::from_rows(&[&[2.0]]);
        let g = [-10.0];
        let z = solve_box_rate_qp(&h, &g, 0.0, 1.0, 10.0, &[0.0], 10).unwrap();
        assert_relative_eq!(z[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rate_chain_respected() {
        let h = Mat::identity(4).scale(2.0);
        let g = [-2.0, -2.0, -2.0, -2.0]; // unconstrained optimum all ones
        let z = solve_box_rate_qp(&h, &g, 0.0, 1.0, 0.25, &[0.0; 4], 10).unwrap();
        let mut prev = 0.0;
        for &v in &z {
            assert!((v - prev) <= 0.25 + 1e-12);
            assert!(v.abs() <= 1.0 + 1e-12);
            prev = v;
        }
        // first move saturates the rate limit
        assert_relative_eq!(z[0], 0.25, epsilon = 1e-9);
    }
}

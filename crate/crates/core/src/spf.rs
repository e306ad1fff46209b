//! Sparse power factorization: an outer normalize-and-relinearize loop
//! around an inner iterative-hard-thresholding solve of the linearized
//! problem.

use crate::error::Error;
use crate::linalg::{dot, hard_threshold, norm, sign_resolved_error};
use crate::par;
use crate::sensing::{empirical_risk, ProblemInstance};
use crate::trace::{RecoveryTrace, StopReason};
use crate::Result;

/// The linearized least-squares system at anchor y: row i is yᵀAᵢ/√m and
/// the right-hand side is b/√m, so the linearized loss is ‖rows·x − rhs‖².
#[derive(Clone, Debug)]
pub struct LinearizedSystem {
    pub m: usize,
    pub n: usize,
    /// m×n, row-major.
    pub rows: Vec<f64>,
    pub rhs: Vec<f64>,
}

/// Build the linearized system at a unit-norm anchor.
pub fn linearize(instance: &ProblemInstance, y: &[f64]) -> Result<LinearizedSystem> {
    let (n, m) = (instance.n, instance.m);
    if y.len() != n {
        return Err(Error::invalid("linearize: anchor has wrong length"));
    }
    if !((norm(y) - 1.0).abs() <= 1e-12) {
        return Err(Error::invalid("linearize: anchor must be unit norm"));
    }
    let ens = &instance.ensemble;
    let nz = crate::sensing::nonzeros(y);
    let scale = 1.0 / (m as f64).sqrt();
    let row_blocks = par::map_indexed(m, |i| {
        let mut row = vec![0.0; n];
        for (c, rc) in row.iter_mut().enumerate() {
            let mut s = 0.0;
            for &r in &nz {
                s += y[r] * ens.entry(i, r, c);
            }
            *rc = s * scale;
        }
        row
    });
    let mut rows = Vec::with_capacity(m * n);
    for r in row_blocks {
        rows.extend_from_slice(&r);
    }
    let rhs = instance.b.iter().map(|b| b * scale).collect();
    Ok(LinearizedSystem { m, n, rows, rhs })
}

impl LinearizedSystem {
    /// Φx.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| dot(&self.rows[i * self.n..(i + 1) * self.n], x))
            .collect()
    }

    /// Φᵀr.
    pub fn apply_transpose(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.m {
            let ri = r[i];
            if ri == 0.0 {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o += self.rows[i * self.n + c] * ri;
            }
        }
        out
    }
}

/// Iterative hard thresholding: L unit-step iterations of
/// x ← H_k(x + Φᵀ(rhs − Φx)) from `x_start`.
pub fn iht(system: &LinearizedSystem, k: usize, l_iters: usize, x_start: &[f64]) -> Result<Vec<f64>> {
    if l_iters == 0 {
        return Err(Error::invalid("iht: iteration count must be positive"));
    }
    if x_start.len() != system.n {
        return Err(Error::invalid("iht: start vector has wrong length"));
    }
    let mut x = x_start.to_vec();
    for _ in 0..l_iters {
        let fx = system.apply(&x);
        let resid: Vec<f64> = system.rhs.iter().zip(&fx).map(|(b, f)| b - f).collect();
        let grad = system.apply_transpose(&resid);
        let stepped: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + g).collect();
        x = hard_threshold(&stepped, k)?;
    }
    Ok(x)
}

/// Outer loop: relinearize at the current unit iterate, solve by IHT with a
/// warm start, renormalize. Stops when the angle between consecutive
/// iterates falls below `tol`, or after `t_outer` iterations.
pub fn spf_run(
    instance: &ProblemInstance,
    x_init: &[f64],
    t_outer: usize,
    l_inner: usize,
    tol: f64,
) -> Result<RecoveryTrace> {
    if x_init.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("spf_run: initial vector has non-finite entries"));
    }
    let n0 = norm(x_init);
    if !(n0 > 0.0) {
        return Err(Error::invalid("spf_run: initial vector must be nonzero"));
    }
    let mut x: Vec<f64> = x_init.iter().map(|v| v / n0).collect();
    let mut trace = RecoveryTrace::new(true);
    trace.push(
        x.clone(),
        Some(sign_resolved_error(&x, &instance.x0)),
        empirical_risk(instance, &x),
    );

    for outer in 1..=t_outer {
        let system = linearize(instance, &x)?;
        let z = iht(&system, instance.k, l_inner, &x)?;
        let nz = norm(&z);
        if !(nz > 0.0) {
            trace.stop_reason = StopReason::DegenerateIterate;
            return Err(Error::DegenerateIterate {
                iteration: outer,
                trace: Box::new(trace),
            });
        }
        let x_new: Vec<f64> = z.iter().map(|v| v / nz).collect();
        let cosine = dot(&x_new, &x).clamp(-1.0, 1.0);
        let sine = (1.0 - cosine * cosine).max(0.0).sqrt();
        trace.push(
            x_new.clone(),
            Some(sign_resolved_error(&x_new, &instance.x0)),
            empirical_risk(instance, &x_new),
        );
        x = x_new;
        if sine < tol {
            trace.converged = true;
            trace.stop_reason = StopReason::Converged;
            break;
        }
    }
    Ok(trace)
}

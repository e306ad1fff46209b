//! Initialization for the quadratic model: diagonal pivot estimator, column
//! estimator, support thresholding, and a restricted spectral step with norm
//! scaling.

use crate::error::Error;
use crate::linalg::{canonicalize_sign, embed_vec, IndexSet, SymMatrix};
use crate::par;
use crate::sensing::ProblemInstance;
use crate::{linalg, Result};

/// Output of the initialization pipeline.
#[derive(Clone, Debug)]
pub struct InitEstimate {
    /// Coordinate believed to carry the largest magnitude of x₀.
    pub pivot: usize,
    /// Estimate of |x₀[pivot]|.
    pub pivot_value: f64,
    /// Estimated support Ŝ.
    pub support: IndexSet,
    /// Scaled initial vector x⁽⁰⁾, supported on Ŝ ∪ {pivot}.
    pub x_init: Vec<f64>,
    /// Spectral scale φ (square root of the restricted operator norm).
    pub phi: f64,
}

/// Diagonal correlations x̂[ℓ] = (1/m) Σᵢ Aᵢ[ℓ,ℓ] bᵢ; E x̂[ℓ] = x₀²[ℓ].
pub fn diag_estimate(instance: &ProblemInstance) -> Vec<f64> {
    let (n, m) = (instance.n, instance.m);
    let ens = &instance.ensemble;
    let b = &instance.b;
    let mut d = par::accumulate_vec(m, n, |i, acc| {
        let bi = b[i];
        for (l, a) in acc.iter_mut().enumerate() {
            *a += ens.entry(i, l, l) * bi;
        }
    });
    for e in d.iter_mut() {
        *e /= m as f64;
    }
    d
}

/// Argmax of the diagonal estimate (lowest index on ties) together with
/// √max(diag[pivot], 0) as the pivot magnitude estimate.
pub fn select_pivot(diag: &[f64]) -> Result<(usize, f64)> {
    let mut pivot = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &v) in diag.iter().enumerate() {
        if v > best {
            best = v;
            pivot = i;
        }
    }
    if !(best > 0.0) {
        return Err(Error::DegenerateInstance(
            "diagonal estimate is nonpositive everywhere".into(),
        ));
    }
    Ok((pivot, best.sqrt()))
}

/// Column correlations ŷ[ℓ] = (1/m) Σᵢ bᵢ Aᵢ[ℓ, pivot];
/// E ŷ[ℓ] = x₀[pivot]·x₀[ℓ].
pub fn column_estimate(instance: &ProblemInstance, pivot: usize) -> Result<Vec<f64>> {
    let (n, m) = (instance.n, instance.m);
    if pivot >= n {
        return Err(Error::invalid(format!("pivot {pivot} out of range (n = {n})")));
    }
    let ens = &instance.ensemble;
    let b = &instance.b;
    let mut y = par::accumulate_vec(m, n, |i, acc| {
        let bi = b[i];
        for (l, a) in acc.iter_mut().enumerate() {
            *a += bi * ens.entry(i, l, pivot);
        }
    });
    for e in y.iter_mut() {
        *e /= m as f64;
    }
    Ok(y)
}

/// Data-driven estimate of ‖x₀‖²: √max(mean(b²) − σ̂²_ε, 0), using the
/// noise-kind variance at the recorded scale. E b² = ‖x₀‖⁴ + σ²_ε.
pub fn norm_estimate(instance: &ProblemInstance) -> f64 {
    let m = instance.m;
    let mean_b2 = par::sum_indexed(m, |i| instance.b[i] * instance.b[i]) / m as f64;
    let noise_var = instance.noise_kind.variance(instance.sigma);
    (mean_b2 - noise_var).max(0.0).sqrt()
}

/// Keep coordinates with |ŷ[ℓ]| above C·√(log m / m)·‖x₀‖²-estimate.
pub fn support_select(
    yhat: &[f64],
    norm_sq_est: f64,
    m: usize,
    c_thr: f64,
) -> Result<IndexSet> {
    if !(norm_sq_est > 0.0) {
        return Err(Error::invalid("support_select: norm estimate must be positive"));
    }
    if !(c_thr > 0.0) {
        return Err(Error::invalid("support_select: C_thr must be positive"));
    }
    let threshold = c_thr * ((m as f64).ln() / m as f64).sqrt() * norm_sq_est;
    let kept: Vec<usize> = yhat
        .iter()
        .enumerate()
        .filter(|(_, y)| y.abs() > threshold)
        .map(|(i, _)| i)
        .collect();
    if kept.is_empty() {
        return Err(Error::DegenerateSupport { threshold });
    }
    IndexSet::new(kept)
}

/// Data-weighted restricted matrix (1/m) Σᵢ ((Aᵢ + Aᵢᵀ)/2)_{Ŝ×Ŝ} bᵢ.
fn restricted_spectral_matrix(instance: &ProblemInstance, support: &IndexSet) -> SymMatrix {
    let s = support.len();
    let idx = support.as_slice();
    let m = instance.m;
    let ens = &instance.ensemble;
    let b = &instance.b;
    let flat = par::accumulate_vec(m, s * s, |i, acc| {
        let bi = b[i];
        for a in 0..s {
            for c in a..s {
                let v = 0.5 * (ens.entry(i, idx[a], idx[c]) + ens.entry(i, idx[c], idx[a])) * bi;
                acc[a * s + c] += v;
            }
        }
    });
    SymMatrix::from_fn(s, |a, c| {
        let (lo, hi) = if a <= c { (a, c) } else { (c, a) };
        flat[lo * s + hi] / m as f64
    })
}

/// Spectral step on a prepared restricted matrix; broken out so idealized
/// population matrices can be fed straight through.
pub(crate) fn spectral_from_matrix(
    matrix: &SymMatrix,
    support: &IndexSet,
    n: usize,
    pivot: usize,
    pivot_value: f64,
) -> Result<InitEstimate> {
    let (lambda, v) = linalg::top_eigpair(matrix, 1e-10, 50_000)?;
    let phi = lambda.abs().sqrt();
    let scaled: Vec<f64> = v.iter().map(|e| phi * e).collect();
    let mut x_init = embed_vec(&scaled, support, n)?;
    if let Some(pos) = support.position(pivot) {
        let sign = if v[pos] < 0.0 { -1.0 } else { 1.0 };
        x_init[pivot] = sign * pivot_value;
    }
    canonicalize_sign(&mut x_init);
    Ok(InitEstimate {
        pivot,
        pivot_value,
        support: support.clone(),
        x_init,
        phi,
    })
}

/// Restricted spectral estimate: top eigenpair of the data-weighted matrix
/// on Ŝ×Ŝ, scaled by φ = √(restricted operator norm), with the pivot
/// coordinate overwritten by the sign-consistent pivot estimate when the
/// pivot lies in Ŝ.
pub fn spectral_init(
    instance: &ProblemInstance,
    support: &IndexSet,
    pivot: usize,
    pivot_value: f64,
) -> Result<InitEstimate> {
    if support.is_empty() {
        return Err(Error::invalid("spectral_init: empty support"));
    }
    let matrix = restricted_spectral_matrix(instance, support);
    spectral_from_matrix(&matrix, support, instance.n, pivot, pivot_value)
}

/// Full pipeline: diagonal pivot → column estimate → support threshold →
/// restricted spectral step. Errors from any stage propagate.
pub fn initialize(instance: &ProblemInstance, c_thr: f64) -> Result<InitEstimate> {
    let diag = diag_estimate(instance);
    let (pivot, pivot_value) = select_pivot(&diag)?;
    let yhat = column_estimate(instance, pivot)?;
    let norm_sq_est = norm_estimate(instance);
    let support = support_select(&yhat, norm_sq_est, instance.m, c_thr)?;
    spectral_init(instance, &support, pivot, pivot_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sign_resolved_error;
    use crate::sensing::{generate_instance, NoiseKind, StorageMode};

    fn inst(n: usize, k: usize, m: usize, mu0: f64, seed: u64) -> ProblemInstance {
        generate_instance(n, k, m, mu0, 0.0, NoiseKind::None, StorageMode::Streamed, seed).unwrap()
    }

    #[test]
    fn single_measurement_definitions() {
        let inst = inst(4, 2, 1, 0.8, 3);
        let ens = &inst.ensemble;
        let d = diag_estimate(&inst);
        for l in 0..4 {
            assert!((d[l] - ens.entry(0, l, l) * inst.b[0]).abs() < 1e-15);
        }
        let y = column_estimate(&inst, 2).unwrap();
        for l in 0..4 {
            assert!((y[l] - inst.b[0] * ens.entry(0, l, 2)).abs() < 1e-15);
        }
    }

    #[test]
    fn estimators_linear_in_measurements() {
        let base = inst(5, 2, 6, 0.8, 8);
        let mut shifted = base.clone();
        for e in shifted.b.iter_mut() {
            *e *= 2.0;
        }
        let d1 = diag_estimate(&base);
        let d2 = diag_estimate(&shifted);
        for (a, b) in d1.iter().zip(&d2) {
            assert!((2.0 * a - b).abs() < 1e-13);
        }
        let y1 = column_estimate(&base, 1).unwrap();
        let y2 = column_estimate(&shifted, 1).unwrap();
        for (a, b) in y1.iter().zip(&y2) {
            assert!((2.0 * a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn select_pivot_rules() {
        assert_eq!(select_pivot(&[0.1, 0.9, 0.2]).unwrap().0, 1);
        let (_, v) = select_pivot(&[0.1, 0.9, 0.2]).unwrap();
        assert!((v - 0.9f64.sqrt()).abs() < 1e-15);
        // Lowest index wins ties.
        assert_eq!(select_pivot(&[0.0, 0.5, 0.5]).unwrap().0, 1);
        assert!(select_pivot(&[-0.3, -0.1]).is_err());
    }

    #[test]
    fn support_select_rules() {
        // Threshold above everything: degenerate support.
        let err = support_select(&[0.01, 0.02], 1.0, 10, 100.0);
        assert!(matches!(err, Err(Error::DegenerateSupport { .. })));
        // Idealized input keeps exactly the support.
        let yhat = [0.0, 0.4, 0.0, -0.5];
        let s = support_select(&yhat, 1.0, 10_000, 1.0).unwrap();
        assert_eq!(s.as_slice(), &[1, 3]);
        assert!(support_select(&yhat, 0.0, 10, 1.0).is_err());
    }

    #[test]
    fn norm_estimate_formula() {
        let mut instance = inst(4, 2, 10, 0.8, 4);
        // Force mean(b²) = 1.1 by hand.
        let v = (1.1f64).sqrt();
        instance.b = vec![v; 10];
        assert!((norm_estimate(&instance) - 1.1f64.sqrt()).abs() < 1e-12);
        instance.b = vec![0.0; 10];
        assert_eq!(norm_estimate(&instance), 0.0);
    }

    #[test]
    fn norm_estimate_concentrates() {
        let instance = inst(10, 3, 100_000, 0.7, 15);
        let est = norm_estimate(&instance);
        assert!((est - 1.0).abs() < 0.05, "norm estimate {est}");
    }

    #[test]
    fn diag_estimate_concentrates() {
        let mut pass = 0;
        for seed in 0..20u64 {
            let instance = inst(10, 3, 100_000, 0.7, 100 + seed);
            let d = diag_estimate(&instance);
            let worst = d
                .iter()
                .enumerate()
                .map(|(l, v)| (v - instance.x0[l] * instance.x0[l]).abs())
                .fold(0.0f64, f64::max);
            if worst < 0.05 {
                pass += 1;
            }
        }
        assert!(pass >= 19, "{pass}/20 seeds within 0.05");
    }

    #[test]
    fn column_estimate_concentrates() {
        let mut pass = 0;
        for seed in 0..20u64 {
            let instance = inst(10, 3, 100_000, 0.7, 200 + seed);
            let pivot = instance
                .x0
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                .unwrap()
                .0;
            let y = column_estimate(&instance, pivot).unwrap();
            let worst = y
                .iter()
                .enumerate()
                .map(|(l, v)| (v - instance.x0[pivot] * instance.x0[l]).abs())
                .fold(0.0f64, f64::max);
            if worst < 0.05 {
                pass += 1;
            }
        }
        assert!(pass >= 19, "{pass}/20 seeds within 0.05");
    }

    #[test]
    fn support_select_calibration() {
        // n = 50, k = 5, m = 2000, C = 3: estimated support stays inside the
        // true support in at least 90% of seeds.
        let mut pass = 0;
        for seed in 0..50u64 {
            let instance = inst(50, 5, 2000, 0.8, 300 + seed);
            let diag = diag_estimate(&instance);
            let Ok((pivot, _)) = select_pivot(&diag) else {
                continue;
            };
            let yhat = column_estimate(&instance, pivot).unwrap();
            let Ok(support) = support_select(&yhat, norm_estimate(&instance), instance.m, 3.0)
            else {
                continue;
            };
            let truth: Vec<usize> = instance
                .x0
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i)
                .collect();
            if support.iter().all(|i| truth.contains(i)) {
                pass += 1;
            }
        }
        assert!(pass >= 45, "{pass}/50 seeds with clean support");
    }

    #[test]
    fn spectral_from_rank_one_matrix_is_exact() {
        // Idealized input: the restricted population matrix (x₀)_Ŝ(x₀)_Ŝᵀ.
        let x0_s = [0.8, -0.36, 0.48];
        let support = IndexSet::new(vec![1, 4, 7]).unwrap();
        let matrix = SymMatrix::from_fn(3, |i, j| x0_s[i] * x0_s[j]);
        let est = spectral_from_matrix(&matrix, &support, 9, 1, 0.8).unwrap();
        let mut expect = vec![0.0; 9];
        expect[1] = 0.8;
        expect[4] = -0.36;
        expect[7] = 0.48;
        let err = sign_resolved_error(&est.x_init, &expect);
        assert!(err < 1e-10, "idealized spectral error {err}");
        assert!((est.phi - crate::linalg::norm(&x0_s)).abs() < 1e-10);
    }

    #[test]
    fn spectral_on_singleton_support() {
        let instance = inst(6, 2, 40, 0.8, 77);
        let s = IndexSet::new(vec![3]).unwrap();
        let est = spectral_init(&instance, &s, 3, 0.9).unwrap();
        let mut expect = vec![0.0; 6];
        expect[3] = 0.9;
        assert_eq!(est.x_init, expect);
    }

    #[test]
    fn x_init_supported_on_s_hat() {
        for seed in 0..10u64 {
            let instance = inst(30, 4, 800, 0.8, 400 + seed);
            if let Ok(est) = initialize(&instance, 3.0) {
                for (i, &v) in est.x_init.iter().enumerate() {
                    if v != 0.0 {
                        assert!(
                            est.support.contains(i) || i == est.pivot,
                            "coordinate {i} outside the estimated support"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn initialize_matches_manual_composition() {
        let instance = inst(20, 3, 500, 0.8, 500);
        let auto = initialize(&instance, 3.0).unwrap();
        let diag = diag_estimate(&instance);
        let (pivot, pivot_value) = select_pivot(&diag).unwrap();
        let yhat = column_estimate(&instance, pivot).unwrap();
        let support =
            support_select(&yhat, norm_estimate(&instance), instance.m, 3.0).unwrap();
        let manual = spectral_init(&instance, &support, pivot, pivot_value).unwrap();
        assert_eq!(auto.x_init, manual.x_init);
        assert_eq!(auto.phi.to_bits(), manual.phi.to_bits());
        assert_eq!(auto.pivot, manual.pivot);
    }

    #[test]
    fn undersampled_regime_errors_cleanly() {
        let mut errors = 0;
        for seed in 0..30u64 {
            let instance = inst(40, 5, 5, 0.8, 600 + seed);
            if initialize(&instance, 3.0).is_err() {
                errors += 1;
            }
        }
        assert!(errors > 0, "m = k should fail with nonzero frequency");
    }

    #[test]
    fn pipeline_recovery_at_reference_scale() {
        // n = 100, k = 5, μ₀ = 0.8, m = 3000, σ = 0: sign-resolved error of
        // the initializer at most 0.3 in at least 90% of seeds.
        let mut pass = 0;
        for seed in 0..20u64 {
            let instance = inst(100, 5, 3000, 0.8, 700 + seed);
            if let Ok(est) = initialize(&instance, 3.0) {
                if sign_resolved_error(&est.x_init, &instance.x0) <= 0.3 {
                    pass += 1;
                }
            }
        }
        assert!(pass >= 18, "{pass}/20 seeds below 0.3");
    }

    #[test]
    fn error_curve_nonincreasing_in_m() {
        let ms = [500usize, 1000, 2000, 4000];
        let mut medians = Vec::new();
        for &m in &ms {
            let mut errs: Vec<f64> = (0..20u64)
                .map(|seed| {
                    let instance = inst(100, 5, m, 0.8, 800 + seed);
                    match initialize(&instance, 3.0) {
                        Ok(est) => sign_resolved_error(&est.x_init, &instance.x0),
                        Err(_) => f64::INFINITY,
                    }
                })
                .collect();
            errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            medians.push(0.5 * (errs[9] + errs[10]));
        }
        for w in medians.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12,
                "median init error increased along m: {medians:?}"
            );
        }
    }
}

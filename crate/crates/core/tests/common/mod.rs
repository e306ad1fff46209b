//! Shared helpers for integration tests: an independent full-spectrum
//! Jacobi eigensolver used as the oracle for the production power iteration,
//! and small statistics utilities.

use quadrec::linalg::SymMatrix;

/// Full eigendecomposition by cyclic Jacobi rotations. Returns
/// (eigenvalues, eigenvectors) with `vectors[j]` the eigenvector of
/// `values[j]`. Independent of the library's power iteration.
pub fn jacobi_full(m: &SymMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.n();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m.entry(i, j)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|x| x * x))
        .sum::<f64>()
        .max(1e-300);

    for _sweep in 0..200 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off <= 1e-28 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (2.0 * apq).atan2(a[q][q] - a[p][p]);
                let (s, c) = theta.sin_cos();
                let (app, aqq) = (a[p][p], a[q][q]);
                a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let (arp, arq) = (a[r][p], a[r][q]);
                        a[r][p] = c * arp - s * arq;
                        a[p][r] = a[r][p];
                        a[r][q] = s * arp + c * arq;
                        a[q][r] = a[r][q];
                    }
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let values: Vec<f64> = (0..n).map(|j| a[j][j]).collect();
    let vectors: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    (values, vectors)
}

/// Median of a slice (not necessarily sorted). Infinite entries allowed.
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Least-squares slope of ln(err) against the iteration index over
/// `lo..=hi`, returned as the per-iteration ratio exp(slope). Entries at or
/// below the numerical floor are skipped; None when fewer than 5 usable
/// points remain.
pub fn fitted_contraction(errors: &[f64], lo: usize, hi: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = (lo..=hi.min(errors.len().saturating_sub(1)))
        .filter(|&t| errors[t] > 1e-13)
        .map(|t| (t as f64, errors[t].ln()))
        .collect();
    if pts.len() < 5 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Some(slope.exp())
}

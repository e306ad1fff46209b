//! Dense vector/matrix kernels, thresholding operators and a symmetric
//! top-eigenpair solver.

use crate::error::Error;
use crate::Result;

/// Dot product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
#[inline]
pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// min(‖x − y‖, ‖x + y‖) — the natural error metric under sign-blind
/// measurements.
pub fn sign_resolved_error(x: &[f64], y: &[f64]) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        minus += (a - b) * (a - b);
        plus += (a + b) * (a + b);
    }
    minus.min(plus).sqrt()
}

/// Flip the sign of `v` in place so its first coordinate of magnitude above
/// `1e-12` (falling back to the first nonzero) is positive.
pub fn canonicalize_sign(v: &mut [f64]) {
    let lead = v
        .iter()
        .find(|x| x.abs() > 1e-12)
        .or_else(|| v.iter().find(|x| **x != 0.0));
    if let Some(&x) = lead {
        if x < 0.0 {
            for e in v.iter_mut() {
                *e = -*e;
            }
        }
    }
}

/// Keep the `k` entries of largest magnitude, zero the rest. Ties are broken
/// by keeping the lowest index.
pub fn hard_threshold(v: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = v.len();
    if k > n {
        return Err(Error::invalid(format!("hard_threshold: k = {k} > n = {n}")));
    }
    if k == n {
        return Ok(v.to_vec());
    }
    let mut order: Vec<usize> = (0..n).collect();
    // Sort by (|v|, descending), index ascending on ties.
    order.sort_by(|&a, &b| {
        v[b].abs()
            .partial_cmp(&v[a].abs())
            .expect("finite entries")
            .then(a.cmp(&b))
    });
    let mut out = vec![0.0; n];
    for &i in &order[..k] {
        out[i] = v[i];
    }
    Ok(out)
}

/// Componentwise sign(x)·max(|x| − τ, 0).
pub fn soft_threshold(v: &[f64], tau: f64) -> Result<Vec<f64>> {
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!("soft_threshold: tau = {tau} < 0")));
    }
    Ok(v.iter()
        .map(|&x| {
            if x > tau {
                x - tau
            } else if x < -tau {
                x + tau
            } else {
                0.0
            }
        })
        .collect())
}

/// Extract the subvector on `S`.
pub fn restrict_vec(v: &[f64], s: &IndexSet) -> Result<Vec<f64>> {
    s.check_bound(v.len())?;
    Ok(s.iter().map(|&i| v[i]).collect())
}

/// Embed a subvector on `S` back into ℝⁿ (zero off `S`).
pub fn embed_vec(sub: &[f64], s: &IndexSet, n: usize) -> Result<Vec<f64>> {
    if sub.len() != s.len() {
        return Err(Error::invalid("embed_vec: length mismatch"));
    }
    s.check_bound(n)?;
    let mut out = vec![0.0; n];
    for (&i, &x) in s.iter().zip(sub) {
        out[i] = x;
    }
    Ok(out)
}

/// Sorted set of distinct coordinate indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    idx: Vec<usize>,
}

impl IndexSet {
    /// Build from arbitrary indices; sorts and rejects duplicates.
    pub fn new(mut idx: Vec<usize>) -> Result<Self> {
        idx.sort_unstable();
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("IndexSet: duplicate index"));
        }
        Ok(IndexSet { idx })
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.idx.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.idx
    }

    pub fn contains(&self, i: usize) -> bool {
        self.idx.binary_search(&i).is_ok()
    }

    /// Position of `i` within the set, if present.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.idx.binary_search(&i).ok()
    }

    fn check_bound(&self, n: usize) -> Result<()> {
        match self.idx.last() {
            Some(&last) if last >= n => Err(Error::invalid(format!(
                "IndexSet: index {last} out of range for length {n}"
            ))),
            _ => Ok(()),
        }
    }

    /// Support of a vector: indices of nonzero entries.
    pub fn support_of(v: &[f64]) -> Self {
        IndexSet {
            idx: v
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(i, _)| i)
                .collect(),
        }
    }
}

/// Dense symmetric matrix, stored full, symmetrized on construction so
/// `entry(i, j) == entry(j, i)` holds exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Build from `f(i, j)` evaluated only on i ≤ j and mirrored.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymMatrix { n, data }
    }

    /// Symmetrize an arbitrary square row-major matrix: (M + Mᵀ)/2.
    pub fn symmetrize(n: usize, raw: &[f64]) -> Self {
        assert_eq!(raw.len(), n * n);
        Self::from_fn(n, |i, j| 0.5 * (raw[i * n + j] + raw[j * n + i]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    /// Add `v` to entries (i, j) and (j, i).
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
        if i != j {
            self.data[j * self.n + i] += v;
        }
    }

    /// y = M x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], x))
            .collect()
    }

    /// Principal submatrix on `S`.
    pub fn restrict(&self, s: &IndexSet) -> Result<SymMatrix> {
        s.check_bound(self.n)?;
        let k = s.len();
        let idx = s.as_slice();
        Ok(SymMatrix::from_fn(k, |a, b| self.entry(idx[a], idx[b])))
    }

    fn frobenius(&self) -> f64 {
        norm(&self.data)
    }
}

/// Largest-magnitude eigenpair of a symmetric matrix by power iteration.
///
/// Returns `(λ, v)` with ‖Mv − λv‖ ≤ tol·max(1, |λ|), ‖v‖ = 1 and the sign
/// of `v` canonicalized (first nonzero coordinate positive). A random
/// restart and a pair of shifted iterations (which resolve spectra with
/// λ_max ≈ −λ_min, where plain power iteration stalls) are tried before
/// giving up.
pub fn top_eigpair(m: &SymMatrix, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>)> {
    if !(tol > 0.0) {
        return Err(Error::invalid("top_eigpair: tol must be positive"));
    }
    let n = m.n();
    if n == 0 {
        return Err(Error::invalid("top_eigpair: empty matrix"));
    }
    if m.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("top_eigpair: non-finite entry"));
    }
    if n == 1 {
        return Ok((m.entry(0, 0), vec![1.0]));
    }

    let start = |salt: u64| -> Vec<f64> {
        let s = crate::rng::stream_seed(salt, crate::rng::Stream::Scratch);
        let mut v: Vec<f64> = (0..n).map(|i| crate::rng::gaussian_at(s, i as u64)).collect();
        let nv = norm(&v);
        for e in v.iter_mut() {
            *e /= nv;
        }
        v
    };

    let mut best: Option<(f64, Vec<f64>, f64)> = None; // (residual, v, λ)
    let mut consider = |lambda: f64, v: Vec<f64>, residual: f64| {
        if best.as_ref().is_none_or(|(r, _, _)| residual < *r) {
            best = Some((residual, v, lambda));
        }
    };

    // Plain power iteration, two starts.
    for salt in [0x706f7765u64, 0x72657374] {
        if let Some((lambda, v, res)) = power_iterate(m, start(salt), tol, max_iter, 0.0) {
            if res <= tol * lambda.abs().max(1.0) {
                let mut v = v;
                canonicalize_sign(&mut v);
                return Ok((lambda, v));
            }
            consider(lambda, v, res);
        }
    }

    // Shifted iterations: M + cI exposes the algebraic maximum, M − cI the
    // minimum; take whichever has the larger magnitude.
    let shift = m.frobenius().max(1.0);
    for sign in [1.0, -1.0] {
        let shifted = SymMatrix::from_fn(n, |i, j| {
            m.entry(i, j) + if i == j { sign * shift } else { 0.0 }
        });
        if let Some((lam_shifted, v, _)) = power_iterate(&shifted, start(0x73686966), tol, max_iter, 0.0)
        {
            let lambda = lam_shifted - sign * shift;
            // Residual against the original matrix.
            let mv = m.matvec(&v);
            let res = residual_norm(&mv, lambda, &v);
            if res <= tol * lambda.abs().max(1.0) {
                let mut v = v;
                canonicalize_sign(&mut v);
                return Ok((lambda, v));
            }
            consider(lambda, v, res);
        }
    }

    let (residual, _, _) = best.expect("at least one attempt ran");
    Err(Error::ConvergenceFailure {
        residual,
        iterations: max_iter,
    })
}

fn residual_norm(mv: &[f64], lambda: f64, v: &[f64]) -> f64 {
    mv.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b) * (a - lambda * b))
        .sum::<f64>()
        .sqrt()
}

/// Returns (λ, v, residual) for the best iterate found, or None if the
/// matrix maps the start vector to ~0 repeatedly.
fn power_iterate(
    m: &SymMatrix,
    mut v: Vec<f64>,
    tol: f64,
    max_iter: usize,
    _shift: f64,
) -> Option<(f64, Vec<f64>, f64)> {
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for it in 0..max_iter {
        let mv = m.matvec(&v);
        let lambda = dot(&v, &mv); // Rayleigh quotient, ‖v‖ = 1
        let res = residual_norm(&mv, lambda, &v);
        if best.as_ref().is_none_or(|(_, _, r)| res < *r) {
            best = Some((lambda, v.clone(), res));
        }
        if res <= tol * lambda.abs().max(1.0) {
            return Some((lambda, v, res));
        }
        let nv = norm(&mv);
        if nv < 1e-300 {
            // Start vector in (numerical) kernel; a restart may help.
            return best;
        }
        v = mv.into_iter().map(|x| x / nv).collect();
        // Cheap periodic re-normalization guard.
        if it % 64 == 63 {
            let n2 = norm(&v);
            for e in v.iter_mut() {
                *e /= n2;
            }
        }
    }
    best
}

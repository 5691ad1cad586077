//! Small dense-vector kernels shared by the solvers.

/// Eight independent partial sums so the loop is not bound by add latency.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `sign` with `sign(0) = 0`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Conjugate gradient for a symmetric positive definite map, starting from
/// `x`. Stops when `‖r‖ ≤ tol·‖rhs‖` or after `max_iter` steps and returns
/// the number of steps taken.
pub fn conjugate_gradient(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> usize {
    let n = rhs.len();
    let mut q = vec![0.0; n];
    apply(x, &mut q);
    let mut r: Vec<f64> = rhs.iter().zip(&q).map(|(b, ax)| b - ax).collect();
    let mut dir = r.clone();
    let mut rr = norm_sq(&r);
    let goal = (tol * norm(rhs)).powi(2);
    for it in 0..max_iter {
        if rr <= goal {
            return it;
        }
        apply(&dir, &mut q);
        let curv = dot(&dir, &q);
        if !(curv > 0.0) {
            return it;
        }
        let alpha = rr / curv;
        for ((xi, di), (ri, qi)) in x.iter_mut().zip(&dir).zip(r.iter_mut().zip(&q)) {
            *xi += alpha * di;
            *ri -= alpha * qi;
        }
        let next = norm_sq(&r);
        let beta = next / rr;
        rr = next;
        for (di, ri) in dir.iter_mut().zip(&r) {
            *di = ri + beta * *di;
        }
    }
    max_iter
}

/// k-th smallest (1-based) value of `values`, reordering the slice.
pub fn order_statistic(values: &mut [f64], k: usize) -> f64 {
    assert!(k >= 1 && k <= values.len(), "order statistic {k} out of range");
    let (_, kth, _) = values.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
    *kth
}

/// Lower median: the ⌈len/2⌉-th order statistic.
pub fn lower_median(values: &[f64]) -> f64 {
    let mut scratch = values.to_vec();
    let k = scratch.len().div_ceil(2);
    order_statistic(&mut scratch, k)
}

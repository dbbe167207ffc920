//! Ordinary least squares for the handful of small linear models used in
//! the experiments.

#[derive(Clone, Debug, PartialEq)]
pub struct LinearFit {
    pub coef: Vec<f64>,
    pub stderr: Vec<f64>,
    pub residual_norm: f64,
}

/// Solves `y ~ sum_j coef[j] * columns[j]`.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> LinearFit {
    let k = columns.len();
    let n = y.len();
    assert!(k >= 1 && n >= k, "need at least as many observations as parameters");
    assert!(columns.iter().all(|c| c.len() == n), "column lengths differ");
    // scale columns to unit norm for conditioning
    let scale: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            xtx[i][j] = (0..n).map(|r| columns[i][r] * columns[j][r]).sum::<f64>() / (scale[i] * scale[j]);
        }
        xty[i] = (0..n).map(|r| columns[i][r] * y[r]).sum::<f64>() / scale[i];
    }
    let inv = invert(&xtx);
    let beta: Vec<f64> = (0..k).map(|i| (0..k).map(|j| inv[i][j] * xty[j]).sum::<f64>()).collect();
    let coef: Vec<f64> = (0..k).map(|i| beta[i] / scale[i]).collect();
    let rss: f64 = (0..n)
        .map(|r| {
            let fit: f64 = (0..k).map(|j| coef[j] * columns[j][r]).sum();
            (y[r] - fit).powi(2)
        })
        .sum();
    let sigma2 = if n > k { rss / (n - k) as f64 } else { 0.0 };
    let stderr = (0..k).map(|i| (sigma2 * inv[i][i]).sqrt() / scale[i]).collect();
    LinearFit { coef, stderr, residual_norm: rss.sqrt() }
}

/// Fits `y = intercept + slope x`; returns `coef = [intercept, slope]`.
pub fn line(x: &[f64], y: &[f64]) -> LinearFit {
    least_squares(&[vec![1.0; x.len()], x.to_vec()], y)
}

fn invert(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        assert!(p.abs() > 1e-300, "singular design matrix");
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for row in 0..k {
            if row != col {
                let f = a[row][col];
                let pivot_row = a[col].clone();
                for (v, pv) in a[row].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    a.into_iter().map(|r| r[k..].to_vec()).collect()
}

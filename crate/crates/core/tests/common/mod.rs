//! Test-only oracles, independent of the library's numerics.
#![allow(dead_code, clippy::needless_range_loop)]

use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let m = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

pub struct NormalEqFit {
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub t: Vec<f64>,
}

/// OLS through the normal equations `X'X b = X'y`.
pub fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> NormalEqFit {
    let p = rows[0].len();
    let n = rows.len();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (r, yi) in rows.iter().zip(y) {
        for i in 0..p {
            xty[i] += r[i] * yi;
            for j in 0..p {
                xtx[i][j] += r[i] * r[j];
            }
        }
    }
    let beta = solve(xtx.clone(), xty);
    let rss: f64 = rows
        .iter()
        .zip(y)
        .map(|(r, yi)| {
            let fit: f64 = r.iter().zip(&beta).map(|(a, b)| a * b).sum();
            (yi - fit).powi(2)
        })
        .sum();
    let s2 = rss / (n - p) as f64;
    let se: Vec<f64> = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            (s2 * solve(xtx.clone(), e)[j]).sqrt()
        })
        .collect();
    let t = beta.iter().zip(&se).map(|(b, s)| b / s).collect();
    NormalEqFit { beta, se, t }
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Two-sided Student-t tail by quadrature. With `x = sqrt(df) tan(theta)` the
/// density becomes proportional to `cos(theta)^(df - 1)` on `(-pi/2, pi/2)`,
/// so the tail is a ratio of two finite integrals and needs no gamma function.
pub fn t_tail_quadrature(t: f64, df: f64) -> f64 {
    let kernel = |th: f64| ((df - 1.0) * th.cos().ln()).exp();
    let half_pi = std::f64::consts::FRAC_PI_2;
    // beyond ~60 / sqrt(df) radians the kernel is below 1e-700 for large df
    let upper = if df > 100.0 {
        (60.0 / df.sqrt()).min(half_pi)
    } else {
        half_pi
    };
    let theta0 = (t.abs() / df.sqrt()).atan();
    let n = 200_000;
    let total = simpson(kernel, 0.0, upper, n);
    if theta0 >= upper {
        return 0.0;
    }
    simpson(kernel, theta0, upper, n) / total
}

/// Two-sided standard normal tail by quadrature.
pub fn gauss_tail_quadrature(t: f64) -> f64 {
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    2.0 * simpson(phi, t.abs(), t.abs() + 40.0, 400_000)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's numerical routines.
#![allow(dead_code)]

/// `A^k` by repeated multiplication.
pub fn naive_power(a: [[f64; 2]; 2], k: u32) -> [[f64; 2]; 2] {
    let mut out = [[1.0, 0.0], [0.0, 1.0]];
    for _ in 0..k {
        let mut next = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                next[i][j] = out[i][0] * a[0][j] + out[i][1] * a[1][j];
            }
        }
        out = next;
    }
    out
}

/// Sum of squares over `k = 1..n` for the path `x = (X_{-1}, X_0, ..., X_n)`.
pub fn sum_of_squares(x: &[u64], a: f64, b: f64, mu: f64) -> f64 {
    let mut q = 0.0;
    for k in 2..x.len() {
        let r = x[k] as f64 - a * x[k - 1] as f64 - b * x[k - 2] as f64 - mu;
        q += r * r;
    }
    q
}

/// Exact minimiser of `t -> f(p + t d)` for a quadratic `f`, from a parabola
/// through `t = -1, 0, 1`.
fn line_step(f: &impl Fn(f64, f64) -> f64, p: [f64; 2], d: [f64; 2]) -> f64 {
    let at = |t: f64| f(p[0] + t * d[0], p[1] + t * d[1]);
    let (lo, mid, hi) = (at(-1.0), at(0.0), at(1.0));
    let curvature = lo - 2.0 * mid + hi;
    if curvature <= 0.0 {
        return 0.0;
    }
    0.5 * (lo - hi) / curvature
}

/// Grid search over `[-2, 3]^2` at step 0.01 followed by derivative-free
/// conjugate-direction line searches until the step falls below 1e-13.
pub fn brute_force_minimiser(x: &[u64], mu: f64) -> [f64; 2] {
    let f = |a: f64, b: f64| sum_of_squares(x, a, b, mu);
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..=500 {
        let a = -2.0 + 0.01 * i as f64;
        for j in 0..=500 {
            let b = -2.0 + 0.01 * j as f64;
            let q = f(a, b);
            if q < best.0 {
                best = (q, [a, b]);
            }
        }
    }
    let mut p = best.1;
    let mut dirs = [[1.0, 0.0], [0.0, 1.0]];
    for _ in 0..200 {
        let start = p;
        for d in dirs {
            let t = line_step(&f, p, d);
            p = [p[0] + t * d[0], p[1] + t * d[1]];
        }
        let net = [p[0] - start[0], p[1] - start[1]];
        let len = (net[0] * net[0] + net[1] * net[1]).sqrt();
        if len < 1e-13 {
            break;
        }
        let t = line_step(&f, p, net);
        p = [p[0] + t * net[0], p[1] + t * net[1]];
        dirs = [dirs[1], [net[0] / len, net[1] / len]];
    }
    p
}

/// Design matrix in canonical coordinates built from `X_{k-1}` and
/// `V_{k-1} = X_{k-1} - X_{k-2}` directly.
pub fn canonical_design(x: &[u64]) -> [[i128; 2]; 2] {
    let mut a = [[0i128; 2]; 2];
    for k in 2..x.len() {
        let x1 = x[k - 1] as i128;
        let v1 = x1 - x[k - 2] as i128;
        a[0][0] += x1 * x1;
        a[0][1] -= x1 * v1;
        a[1][1] += v1 * v1;
    }
    a[1][0] = a[0][1];
    a
}

/// Exact law of the sum of `n` i.i.d. copies of a finitely supported
/// integer variable, by repeated convolution.
pub fn convolve_power(pmf: &[(u64, f64)], n: usize) -> Vec<f64> {
    let max = pmf.iter().map(|p| p.0).max().unwrap() as usize;
    let mut dist = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; dist.len() + max];
        for (s, &p) in dist.iter().enumerate() {
            for &(v, q) in pmf {
                next[s + v as usize] += p * q;
            }
        }
        dist = next;
    }
    dist
}

/// `E((S - shift)^ell)` for a law given as `P(S = s)` on `s = 0, 1, ...`.
pub fn moment_about(dist: &[f64], shift: f64, ell: i32) -> f64 {
    dist.iter().enumerate().map(|(s, p)| p * (s as f64 - shift).powi(ell)).sum()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

pub fn standard_error(x: &[f64]) -> f64 {
    (variance(x) / x.len() as f64).sqrt()
}

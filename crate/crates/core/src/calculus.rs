//! Finite differences, quadrature and small fitting helpers on uniform grids.

/// Finite-difference weights for the k-th derivative at `z0` given stencil
/// `nodes` (Fornberg's recurrence).
pub fn fd_weights(z0: f64, nodes: &[f64], k: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > k, "need at least k+1 stencil nodes");
    let mut c = vec![vec![0.0; k + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(k);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for v in (1..=mn).rev() {
                    c[i][v] = c1 * (v as f64 * c[i - 1][v - 1] - c5 * c[i - 1][v]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for v in (1..=mn).rev() {
                c[j][v] = (c4 * c[j][v] - v as f64 * c[j][v - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[k]).collect()
}

/// k-th derivative of `f` on a uniform grid with spacing `h`.
///
/// Interior nodes use a centered stencil, nodes near the edges use shifted
/// (one-sided) stencils of the same width so the order is uniform. `acc` is
/// the nominal accuracy order (2 or 4).
pub fn derivative(f: &[f64], h: f64, k: usize, acc: usize) -> Vec<f64> {
    let n = f.len();
    let mut w = k + acc;
    if w % 2 == 0 {
        w += 1;
    }
    assert!(n >= w, "grid too short for a width-{w} stencil");
    let m = w / 2;
    let offsets: Vec<f64> = (0..w).map(|i| i as f64).collect();

    // one weight set per evaluation position inside the window
    let weights: Vec<Vec<f64>> = (0..w).map(|at| fd_weights(at as f64, &offsets, k)).collect();
    let mut out = vec![0.0; n];
    let scale = h.powi(k as i32);
    for i in 0..n {
        let (start, at) = if i < m {
            (0, i)
        } else if i + m >= n {
            (n - w, i - (n - w))
        } else {
            (i - m, m)
        };
        let mut s = 0.0;
        for (j, &wj) in weights[at].iter().enumerate() {
            s += wj * f[start + j];
        }
        out[i] = s / scale;
    }
    out
}

/// First derivative, centered 2nd order, one-sided 2nd order at the ends.
pub fn d1(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 3);
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    out
}

/// Second derivative, centered 2nd order, one-sided 2nd order at the ends.
pub fn d2(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 4);
    let h2 = h * h;
    let mut out = vec![0.0; n];
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    }
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    out
}

/// Trapezoidal quadrature on a uniform grid.
pub fn trapz(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = f[1..n - 1].iter().sum();
    h * (0.5 * (f[0] + f[n - 1]) + inner)
}

/// Cumulative trapezoidal integral from the left end; out[0] = 0.
pub fn cumtrapz(f: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    for i in 1..f.len() {
        out[i] = out[i - 1] + 0.5 * h * (f[i] + f[i - 1]);
    }
    out
}

/// Cumulative integral with the Euler-Maclaurin endpoint correction,
/// `int f ~ h/2 (f_i + f_{i+1}) - h^2/12 (f'_{i+1} - f'_i)`, which lifts the
/// trapezoid to 4th order on smooth data.
pub fn cumtrapz4(f: &[f64], h: f64) -> Vec<f64> {
    let df = d1(f, h);
    let mut out = vec![0.0; f.len()];
    for i in 1..f.len() {
        out[i] = out[i - 1] + 0.5 * h * (f[i] + f[i - 1])
            - h * h / 12.0 * (df[i] - df[i - 1]);
    }
    out
}

/// Least-squares straight line through (x, y); returns (slope, intercept).
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    (slope, (sy - slope * sx) / n)
}

/// Bisection for a sign change of `f` on [a, b].
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a).abs() < tol {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Least-squares exponential rate of |f - f_inf| on one side of the origin.
///
/// Only nodes whose deviation lies inside `window` (absolute bounds) count;
/// at least `min_nodes` of them are required. Returns the positive e-folding
/// rate, or `None` when the window is underpopulated.
pub fn exp_decay_rate(
    points: &[f64],
    values: &[f64],
    f_inf: f64,
    left_side: bool,
    window: (f64, f64),
    min_nodes: usize,
) -> Option<(f64, usize)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&z, &v) in points.iter().zip(values) {
        let on_side = if left_side { z < 0.0 } else { z > 0.0 };
        if !on_side {
            continue;
        }
        let dev = (v - f_inf).abs();
        if dev >= window.0 && dev <= window.1 {
            xs.push(z);
            ys.push(dev.ln());
        }
    }
    if xs.len() < min_nodes {
        return None;
    }
    let (slope, _) = fit_line(&xs, &ys);
    Some((slope.abs(), xs.len()))
}

/// Evaluate `f` (sampled on a uniform grid starting at `z0` with spacing `h`)
/// at an arbitrary point by 4-point Lagrange interpolation.
pub fn interp_cubic(f: &[f64], z0: f64, h: f64, z: f64) -> f64 {
    let n = f.len();
    assert!(n >= 4);
    let pos = (z - z0) / h;
    let i = (pos.floor() as isize).clamp(1, n as isize - 3) as usize;
    let t = pos - i as f64; // in [0,1) away from the edges
    let (fm, f0, f1, f2) = (f[i - 1], f[i], f[i + 1], f[i + 2]);
    // Lagrange basis on offsets {-1, 0, 1, 2}
    let lm = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let l0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let l1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let l2 = (t + 1.0) * t * (t - 1.0) / 6.0;
    fm * lm + f0 * l0 + f1 * l1 + f2 * l2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> (Vec<f64>, f64) {
        let h = (b - a) / (n - 1) as f64;
        ((0..n).map(|i| f(a + i as f64 * h)).collect(), h)
    }

    #[test]
    fn derivatives_of_sine() {
        let (f, h) = sample(f64::sin, -2.0, 2.0, 801);
        let g1 = d1(&f, h);
        let g2 = d2(&f, h);
        let g3 = derivative(&f, h, 3, 2);
        for (i, z) in (0..801).map(|i| (i, -2.0 + i as f64 * h)) {
            assert!((g1[i] - z.cos()).abs() < 2e-5, "d1 at {z}");
            assert!((g2[i] + z.sin()).abs() < 2e-4, "d2 at {z}");
            assert!((g3[i] + z.cos()).abs() < 5e-4, "d3 at {z}");
        }
        // 4th derivative on a coarser grid: 1/h^4 amplifies round-off on
        // fine meshes, so pick h where truncation and round-off are both tiny
        let (f, h) = sample(f64::sin, -2.0, 2.0, 201);
        let g4 = derivative(&f, h, 4, 4);
        for (i, z) in (0..201).map(|i| (i, -2.0 + i as f64 * h)) {
            let tol = if (4..197).contains(&i) { 1e-6 } else { 1e-4 };
            assert!((g4[i] - z.sin()).abs() < tol, "d4 at {z}: {}", g4[i]);
        }
    }

    #[test]
    fn fornberg_matches_classic_stencils() {
        let w = fd_weights(1.0, &[0.0, 1.0, 2.0], 1);
        assert!((w[0] + 0.5).abs() < 1e-14);
        assert!(w[1].abs() < 1e-14);
        assert!((w[2] - 0.5).abs() < 1e-14);
        let w = fd_weights(1.0, &[0.0, 1.0, 2.0], 2);
        assert!((w[0] - 1.0).abs() < 1e-14);
        assert!((w[1] + 2.0).abs() < 1e-14);
        assert!((w[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trapz_quadratic_exact_order() {
        let (f, h) = sample(|z| z * z, 0.0, 1.0, 1001);
        assert!((trapz(&f, h) - 1.0 / 3.0).abs() < 1e-6);
        let c = cumtrapz(&f, h);
        assert!((c[1000] - 1.0 / 3.0).abs() < 1e-6);
        assert_eq!(c[0], 0.0);
    }

    #[test]
    fn line_fit_recovers_slope() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
        let (s, b) = fit_line(&x, &y);
        assert!((s - 3.0).abs() < 1e-12);
        assert!((b + 2.0).abs() < 1e-12);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cubic_interp_exact_on_cubic() {
        let (f, h) = sample(|z| z * z * z - z, -1.0, 1.0, 21);
        for &z in &[-0.95, -0.3, 0.0, 0.123, 0.77, 0.95] {
            let v = interp_cubic(&f, -1.0, h, z);
            assert!((v - (z * z * z - z)).abs() < 1e-12, "at {z}: {v}");
        }
    }
}

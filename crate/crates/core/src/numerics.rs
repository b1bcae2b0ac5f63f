//! Small numerical helpers shared by the solvers.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = if (1.0 - x * x).abs() < 1e-300 {
        0.5 * (n * (n + 1)) as f64 * x.powi(n as i32 + 1)
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

/// Values `P_0(x), …, P_n(x)`.
pub fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for k in 2..=n {
        let kf = k as f64;
        let v = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(v);
    }
    out
}

/// Integrates `f` on `[a, b]` with the four-point Gauss rule.
pub fn gauss4<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    const X: [f64; 2] = [0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
    const W: [f64; 2] = [0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for k in 0..2 {
        s += W[k] * (f(m - r * X[k]) + f(m + r * X[k]));
    }
    s * r
}

/// Outcome of [`conjugate_gradient`].
#[derive(Clone, Debug)]
pub struct CgReport {
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive definite
/// operator; `residual` is `‖b − Ax‖₂ / ‖b‖₂` (absolute when `b = 0`).
pub fn conjugate_gradient<A>(
    apply: A,
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgReport>
where
    A: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = if bnorm > 0.0 { bnorm } else { 1.0 };
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rnorm / scale <= tol {
        return Ok(CgReport {
            iterations: 0,
            residual: rnorm / scale,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::Elliptic {
                iterations: it,
                residual: rnorm / scale,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm / scale <= tol {
            return Ok(CgReport {
                iterations: it,
                residual: rnorm / scale,
            });
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Elliptic {
        iterations: max_iter,
        residual: rnorm / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rules_integrate_polynomials_exactly() {
        for n in [1, 2, 4, 7, 12] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
        assert!((gauss4(0.0, 1.0, |t| t.powi(7)) - 0.125).abs() < 1e-14);
    }

    #[test]
    fn legendre_values() {
        let p = legendre_all(3, 0.5);
        assert!((p[2] - (-0.125)).abs() < 1e-15);
        assert!((p[3] - (-0.4375)).abs() < 1e-15);
    }

    #[test]
    fn cg_solves_tridiagonal() {
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < n { x[i + 1] } else { 0.0 };
                y[i] = 2.0 * x[i] - l - r;
            }
        };
        let truth: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        apply(&truth, &mut b);
        let mut x = vec![0.0; n];
        let rep = conjugate_gradient(apply, &vec![2.0; n], &b, &mut x, 1e-12, 500).unwrap();
        assert!(rep.residual <= 1e-12);
        for (a, b) in x.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

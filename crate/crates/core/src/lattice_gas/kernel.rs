use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{domain, Result};

/// Even probability density on `ℝ` supported in `[−1, 1]` with vanishing
/// derivative at `±1`.
pub trait KacProfile: Send + Sync + Debug {
    fn value(&self, r: f64) -> f64;

    /// Largest value of the profile, attained at the origin.
    fn sup(&self) -> f64 {
        self.value(0.0)
    }

    fn name(&self) -> &'static str;
}

/// `j(r) = (1 + cos πr)/2` on `|r| ≤ 1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct CosineProfile;

impl KacProfile for CosineProfile {
    fn value(&self, r: f64) -> f64 {
        if r.abs() >= 1.0 {
            0.0
        } else {
            0.5 * (1.0 + (PI * r).cos())
        }
    }

    fn name(&self) -> &'static str {
        "cosine"
    }
}

/// `j(r) = (15/16)(1 − r²)²` on `|r| ≤ 1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuarticProfile;

impl KacProfile for QuarticProfile {
    fn value(&self, r: f64) -> f64 {
        if r.abs() >= 1.0 {
            0.0
        } else {
            let s = 1.0 - r * r;
            15.0 / 16.0 * s * s
        }
    }

    fn name(&self) -> &'static str {
        "quartic"
    }
}

/// Kac kernel on `[−1,1] × 𝕋^{d−1}` with uniform transverse factor and the
/// reflected (Neumann) extension at `u1 = ±1`.
#[derive(Clone, Debug)]
pub struct KacKernel {
    profile: Arc<dyn KacProfile>,
}

impl Default for KacKernel {
    fn default() -> Self {
        KacKernel::new(Arc::new(CosineProfile))
    }
}

impl KacKernel {
    pub fn new(profile: Arc<dyn KacProfile>) -> Self {
        KacKernel { profile }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "cosine" => Ok(KacKernel::new(Arc::new(CosineProfile))),
            "quartic" => Ok(KacKernel::new(Arc::new(QuarticProfile))),
            other => domain(format!("unknown kernel profile `{other}`")),
        }
    }

    pub fn profile(&self) -> &dyn KacProfile {
        self.profile.as_ref()
    }

    pub fn sup(&self) -> f64 {
        self.profile.sup()
    }

    /// Reflected kernel restricted to first coordinates, no domain checks.
    #[inline]
    pub fn neumann_1d(&self, u1: f64, v1: f64) -> f64 {
        let j = &self.profile;
        j.value(v1 - u1) + j.value(2.0 - u1 - v1) + j.value(2.0 + u1 + v1)
    }

    /// `J^neum(u, v)` for points of `Λ̄ = [−1,1] × [0,1)^{d−1}`.
    pub fn neumann(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        if u.len() != v.len() || u.is_empty() {
            return domain("points must share a positive dimension");
        }
        for p in [u, v] {
            if !(-1.0..=1.0).contains(&p[0]) {
                return domain(format!("first coordinate {} outside [-1, 1]", p[0]));
            }
            if let Some(bad) = p[1..].iter().find(|c| !(0.0..1.0).contains(*c)) {
                return domain(format!("torus coordinate {bad} outside [0, 1)"));
            }
        }
        Ok(self.neumann_1d(u[0], v[0]))
    }
}

/// Free-function form of [`KacKernel::neumann`] with the default kernel.
pub fn neumann_kernel(u: &[f64], v: &[f64]) -> Result<f64> {
    KacKernel::default().neumann(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn profiles_are_probability_densities() {
        for p in [&CosineProfile as &dyn KacProfile, &QuarticProfile] {
            let mass = simpson(|r| p.value(r), -1.0, 1.0, 2000);
            assert!((mass - 1.0).abs() < 1e-10, "{}: {mass}", p.name());
            assert_eq!(p.value(1.5), 0.0);
            assert!((p.value(0.3) - p.value(-0.3)).abs() < 1e-15);
        }
    }

    #[test]
    fn deep_interior_diagonal_is_profile_peak() {
        let k = KacKernel::default();
        // With |u1| = 0 both reflections are at distance 2.
        assert_eq!(k.neumann(&[0.0], &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn boundary_diagonal_doubles() {
        let k = KacKernel::default();
        assert!((k.neumann(&[-1.0, 0.3], &[-1.0, 0.3]).unwrap() - 2.0).abs() < 1e-15);
        assert!((k.neumann(&[1.0], &[1.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_domain_is_rejected() {
        assert!(neumann_kernel(&[1.2], &[0.0]).is_err());
        assert!(neumann_kernel(&[0.0, 1.0], &[0.0, 0.5]).is_err());
        assert!(neumann_kernel(&[0.0], &[0.0, 0.5]).is_err());
    }

    #[test]
    fn reflected_kernel_has_unit_mass() {
        let k = KacKernel::default();
        for i in 0..=20 {
            let u = -1.0 + 0.1 * i as f64;
            let mass = simpson(|v| k.neumann_1d(u, v), -1.0, 1.0, 4000);
            assert!((mass - 1.0).abs() < 1e-8, "u={u}: {mass}");
        }
    }
}

//! Gauss–Legendre rules and a polar product rule on centered disks.
//!
//! The polar rule integrates `r^k e^{ijθ}`-type integrands, which is all the
//! Ginibre eigenfunctions ever produce, to near machine precision once the
//! angular count exceeds twice the largest angular frequency.

use std::f64::consts::PI;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// `∫_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Composite rule over `panels` equal subintervals.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product rule on the disk `|z| <= radius`: Gauss–Legendre in `r`
/// (composite over `panels`) times the trapezoid rule in `θ`.
#[derive(Debug, Clone)]
pub struct DiskRule {
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

impl DiskRule {
    pub fn new(radius: f64, radial_nodes: usize, panels: usize, angular: usize) -> Self {
        let gl = GaussLegendre::new(radial_nodes);
        let h = radius / panels as f64;
        let dtheta = 2.0 * PI / angular as f64;
        let mut points = Vec::with_capacity(radial_nodes * panels * angular);
        let mut weights = Vec::with_capacity(points.capacity());
        for k in 0..panels {
            let mid = h * (k as f64 + 0.5);
            for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
                let r = mid + 0.5 * h * x;
                let wr = w * 0.5 * h * r * dtheta;
                for j in 0..angular {
                    let theta = dtheta * j as f64;
                    points.push((r * theta.cos(), r * theta.sin()));
                    weights.push(wr);
                }
            }
        }
        DiskRule { points, weights }
    }

    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&(x, y), &w)| w * f(x, y))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let gl = GaussLegendre::new(8);
        // Degree 15 is the highest exact degree for 8 nodes.
        let v = gl.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_integral() {
        let gl = GaussLegendre::new(32);
        let v = gl.integrate_composite(-10.0, 10.0, 8, |x| (-x * x).exp());
        assert!((v - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn disk_area_and_moment() {
        let rule = DiskRule::new(2.0, 16, 1, 16);
        assert!((rule.integrate(|_, _| 1.0) - 4.0 * PI).abs() < 1e-12);
        let m = rule.integrate(|x, y| (x * x + y * y).powi(2));
        assert!((m - 2.0 * PI * 2f64.powi(6) / 6.0).abs() < 1e-10);
    }
}

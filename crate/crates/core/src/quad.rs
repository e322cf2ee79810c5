//! Small panel-based Gauss–Legendre quadrature used by the kernel plan,
//! the Fourier-side oracle, and the slab-mass estimate.

use std::sync::OnceLock;

/// Nodes and weights of an N-point Gauss–Legendre rule on [-1, 1].
pub(crate) struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        // Newton iteration on P_n with the three-term recurrence.
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// ∫_a^b f
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + hw * x);
        }
        acc * hw
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 20-point rule; accurate to machine precision for the smooth
/// panel integrands used here.
pub(crate) fn gl20() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(20))
}

/// ∫_a^b f over an explicit panel list.
pub(crate) fn integrate_panels<F: Fn(f64) -> f64>(f: &F, cuts: &[f64]) -> f64 {
    let gl = gl20();
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            acc += gl.integrate(f, w[0], w[1]);
        }
    }
    acc
}

/// ∫_0^b f with dyadic panel refinement toward 0, for integrands with an
/// integrable singularity (logarithmic or power) at the origin.
pub(crate) fn integrate_dyadic_to_zero<F: Fn(f64) -> f64>(f: &F, b: f64, levels: usize) -> f64 {
    let gl = gl20();
    let mut acc = 0.0;
    let mut hi = b;
    for _ in 0..levels {
        let lo = hi * 0.5;
        acc += gl.integrate(f, lo, hi);
        hi = lo;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_exact_on_polynomials() {
        let gl = GaussLegendre::new(20);
        // degree 39 is integrated exactly
        let f = |x: f64| x.powi(39) + 3.0 * x.powi(12) - x;
        let got = gl.integrate(&f, -1.0, 1.0);
        let expected = 2.0 * 3.0 / 13.0;
        assert!((got - expected).abs() < 1e-13);
    }

    #[test]
    fn dyadic_handles_log_singularity() {
        // ∫_0^1 ln(1/x) dx = 1
        let got = integrate_dyadic_to_zero(&|x: f64| -x.ln(), 1.0, 70);
        assert!((got - 1.0).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn panels_sum() {
        let got = integrate_panels(&|x: f64| x.exp(), &[0.0, 0.3, 1.0]);
        assert!((got - (1.0f64.exp() - 1.0)).abs() < 1e-13);
    }
}

//! Gauss-Legendre quadrature on the reference element `[0, 1]`.

/// Quadrature rule with nodes in ascending order inside `(0, 1)`.
///
/// An `m`-point rule integrates polynomials of degree `2m - 1` exactly;
/// the weights sum to one (the reference element has unit length).
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Gauss-Legendre rule with `m >= 1` points, computed by Newton
    /// iteration on the Legendre polynomial. Deterministic: fixed seeds,
    /// fixed iteration count, no tables.
    pub fn gauss_legendre(m: usize) -> Self {
        assert!(m >= 1, "quadrature rule needs at least one point");
        let mut points = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..m {
            // Chebyshev-like initial guess for the i-th root of P_m on [-1,1].
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            // Map the root from [-1,1] to [0,1]; weights pick up the factor 1/2.
            points[i] = 0.5 * (1.0 + x);
            weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        // cos gives roots in descending order.
        points.reverse();
        weights.reverse();
        Self { points, weights }
    }

    /// Rule used for assembly with basis degree `k`: enough points for the
    /// degree-(3k) products that the nonlinear terms produce.
    pub fn for_degree(k: usize) -> Self {
        Self::gauss_legendre((3 * k + 3) / 2)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness(&self) -> usize {
        2 * self.points.len() - 1
    }

    /// Approximates the integral of `f` over `[0, 1]`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Legendre polynomial `P_m` and its derivative at `x`, by the three-term
/// recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=m {
        let jf = j as f64;
        let p_next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = p_next;
    }
    let dp = m as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

//! Lagrange nodal basis on the reference element `[0, 1]`.
//!
//! Degree `k` uses the `k + 1` uniformly spaced nodes `t_i = i / k`
//! (`t_0 = 0`, `t_k = 1`), so the first and last coefficients of an element
//! are its boundary traces.

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// Reference nodes `i / k` for `i = 0..=k`.
pub fn reference_nodes(k: usize) -> Vec<f64> {
    assert!(k >= 1);
    (0..=k).map(|i| i as f64 / k as f64).collect()
}

/// Physical Lagrange nodes of degree `k` on `[a, b]`, endpoints snapped
/// exactly to `a` and `b` so that shared mesh nodes reproduce bit-identical
/// coordinates on both sides.
pub fn lagrange_nodes(k: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    if k < 1 {
        return Err(Error::InvalidConfig("basis degree must be at least 1".into()));
    }
    if !(a < b) {
        return Err(Error::InvalidMesh(format!("[{a}, {b}] is not a proper element")));
    }
    let h = b - a;
    let mut nodes: Vec<f64> = (0..=k).map(|i| a + i as f64 * h / k as f64).collect();
    nodes[0] = a;
    nodes[k] = b;
    Ok(nodes)
}

/// Values and derivatives of all `k + 1` basis functions at reference
/// coordinate `t`. Returns `(values, derivatives)`; derivatives are with
/// respect to `t` (divide by the element size for physical derivatives).
///
/// Direct product/sum-of-products evaluation: exactly cardinal when `t`
/// equals a reference node, well-conditioned for the small degrees used.
pub fn eval_basis(k: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1);
    let nodes = reference_nodes(k);
    let m = k + 1;
    let mut values = vec![0.0; m];
    let mut derivs = vec![0.0; m];
    for i in 0..m {
        // L_i(t) = prod_{j != i} (t - t_j) / (t_i - t_j)
        let mut v = 1.0;
        for j in 0..m {
            if j != i {
                v *= (t - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
        values[i] = v;
        // L_i'(t) = sum_{l != i} 1/(t_i - t_l) * prod_{j != i, l} (t - t_j)/(t_i - t_j)
        let mut d = 0.0;
        for l in 0..m {
            if l == i {
                continue;
            }
            let mut term = 1.0 / (nodes[i] - nodes[l]);
            for j in 0..m {
                if j != i && j != l {
                    term *= (t - nodes[j]) / (nodes[i] - nodes[j]);
                }
            }
            d += term;
        }
        derivs[i] = d;
    }
    (values, derivs)
}

/// Basis values and derivatives tabulated at every point of a quadrature
/// rule; `values[q][i]` is basis function `i` at point `q`.
pub struct BasisTable {
    pub values: Vec<Vec<f64>>,
    pub derivs: Vec<Vec<f64>>,
}

pub fn tabulate(k: usize, rule: &QuadratureRule) -> BasisTable {
    let mut values = Vec::with_capacity(rule.len());
    let mut derivs = Vec::with_capacity(rule.len());
    for &t in rule.points() {
        let (v, d) = eval_basis(k, t);
        values.push(v);
        derivs.push(d);
    }
    BasisTable { values, derivs }
}

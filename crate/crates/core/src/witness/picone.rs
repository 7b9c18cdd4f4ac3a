use rayon::prelude::*;

use crate::error::{Error, Result};

/// Pairs (x, y) violating
/// (u(x) - u(y)) (v(x)^2 / u(x) - v(y)^2 / u(y)) <= (v(x) - v(y))^2
/// beyond 1e-12 max(1, (v(x) - v(y))^2).
pub fn picone_pointwise(u: &[f64], v: &[f64]) -> Result<usize> {
    if u.len() != v.len() {
        return Err(Error::Config("u and v have different lengths".into()));
    }
    if let Some(k) = u.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::Domain(format!("u is not positive at index {k}")));
    }
    if let Some(k) = v.iter().position(|&b| !(b >= 0.0)) {
        return Err(Error::Domain(format!("v is negative at index {k}")));
    }
    let q: Vec<f64> = v.iter().zip(u).map(|(b, a)| b * b / a).collect();
    let count = (0..u.len())
        .into_par_iter()
        .map(|x| {
            let mut c = 0usize;
            for y in x + 1..u.len() {
                let lhs = (u[x] - u[y]) * (q[x] - q[y]);
                let rhs = (v[x] - v[y]).powi(2);
                if lhs - rhs > 1e-12 * rhs.max(1.0) {
                    c += 1;
                }
            }
            c
        })
        .sum();
    Ok(count)
}

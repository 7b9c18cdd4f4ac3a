//! Quadrature helpers: Gauss-Legendre rules, recursive adaptive
//! integration and a double-exponential rule for endpoint singularities.

use std::f64::consts::PI;

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
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
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + r * x, r * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Recursive bisection with a 10-point rule, comparing a panel to its halves.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let rule = GaussRule::new(10);
    let whole = rule.integrate(a, b, f);
    adaptive_rec(f, &rule, a, b, whole, tol, 0)
}

fn adaptive_rec<F: Fn(f64) -> f64>(
    f: &F,
    rule: &GaussRule,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, f);
    let right = rule.integrate(m, b, f);
    let split = left + right;
    if (split - whole).abs() <= tol.max(1e-15 * split.abs()) || depth > 48 {
        return split;
    }
    adaptive_rec(f, rule, a, m, left, 0.5 * tol, depth + 1)
        + adaptive_rec(f, rule, m, b, right, 0.5 * tol, depth + 1)
}

/// Double-exponential rule on (a, b); tolerates integrable endpoint
/// singularities. `f` receives the point together with its distances to
/// `a` and `b`, which stay accurate where `x` itself rounds to the endpoint.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mut step = 0.5;
    let mut prev = f64::NAN;
    for _level in 0..12 {
        let mut sum = 0.0;
        let kmax = (6.5 / step) as i64;
        for k in -kmax..=kmax {
            let t = k as f64 * step;
            let sh = 0.5 * PI * t.sinh();
            let ch = 0.5 * PI * t.cosh();
            let e = (-sh.abs()).exp();
            // 1 - |tanh(sh)| computed without cancellation
            let comp = 2.0 * e * e / (1.0 + e * e);
            if comp < 1e-300 {
                continue;
            }
            let w = ch / (sh.cosh() * sh.cosh());
            let (da, db) = if sh < 0.0 {
                (half * comp, 2.0 * half - half * comp)
            } else {
                (2.0 * half - half * comp, half * comp)
            };
            let x = a + da;
            let v = f(x, da, db);
            if v.is_finite() {
                sum += w * v;
            }
        }
        let est = sum * step * half;
        if (est - prev).abs() <= tol * est.abs().max(1e-300) {
            return est;
        }
        prev = est;
        step *= 0.5;
    }
    prev
}

/// Integral of z^(e-1) over [a, b] with 0 < a; the e = 0 case is the log.
pub fn power_moment(e: f64, a: f64, b: f64) -> f64 {
    if e.abs() < 1e-14 {
        (b / a).ln()
    } else if a == 0.0 {
        b.powf(e) / e
    } else {
        (b.powf(e) - a.powf(e)) / e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_is_exact_for_polynomials() {
        let r = GaussRule::new(6);
        let v = r.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-10);
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn high_order_rule_is_stable() {
        let r = GaussRule::new(40);
        let v = r.integrate(0.0, PI, f64::sin);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_a_kink() {
        let v = adaptive(&|x: f64| x.abs(), -1.0, 2.0, 1e-12);
        assert!((v - 2.5).abs() < 1e-11);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let v = tanh_sinh(&|_x, da, _db| da.powf(-0.7), 0.0, 1.0, 1e-12);
        assert!((v - 1.0 / 0.3).abs() < 1e-9, "{v}");
    }

    #[test]
    fn power_moment_log_case() {
        assert!((power_moment(0.0, 1.0, std::f64::consts::E) - 1.0).abs() < 1e-15);
        assert!((power_moment(2.0, 0.0, 3.0) - 4.5).abs() < 1e-15);
    }
}

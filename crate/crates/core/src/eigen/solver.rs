use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::seminorm::{DenseForm, QuadForm};

/// Symmetric pencil (A, M) with diagonal positive M.
pub trait Pencil: Sync {
    fn len(&self) -> usize;
    fn apply_a(&self, x: &[f64]) -> Vec<f64>;
    fn mass_diag(&self) -> Vec<f64>;
    /// Dense A when the pencil is small enough.
    fn dense_a(&self) -> Option<DMatrix<f64>>;
}

impl Pencil for QuadForm {
    fn len(&self) -> usize {
        QuadForm::len(self)
    }

    fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        self.apply(x)
    }

    fn mass_diag(&self) -> Vec<f64> {
        vec![self.mass_weight(); QuadForm::len(self)]
    }

    fn dense_a(&self) -> Option<DMatrix<f64>> {
        (QuadForm::len(self) <= DENSE_DIRECT).then(|| self.to_dense().ok().map(|d| d.a)).flatten()
    }
}

impl Pencil for DenseForm {
    fn len(&self) -> usize {
        self.a.nrows()
    }

    fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        (&self.a * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    fn mass_diag(&self) -> Vec<f64> {
        self.m.as_slice().to_vec()
    }

    fn dense_a(&self) -> Option<DMatrix<f64>> {
        (self.a.nrows() <= DENSE_DIRECT).then(|| self.a.clone())
    }
}

/// Pencils up to this size are solved by a dense symmetric eigensolver.
pub const DENSE_DIRECT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Accept when residual < tol * max(1, lambda).
    pub tol: f64,
    pub inner_iter: usize,
    pub inner_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 400,
            tol: 1e-8,
            inner_iter: 40,
            inner_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// M-normalized, with nonnegative sum.
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub accepted: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mdot(m: &[f64], a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).zip(m).map(|((x, y), w)| x * y * w).sum()
}

fn residual_norm(ax: &[f64], m: &[f64], x: &[f64], lambda: f64) -> f64 {
    let mut r2 = 0.0;
    let mut mx2 = 0.0;
    for k in 0..x.len() {
        let mx = m[k] * x[k];
        r2 += (ax[k] - lambda * mx).powi(2);
        mx2 += mx * mx;
    }
    (r2 / mx2).sqrt()
}

fn orient(x: &mut [f64]) {
    if x.iter().sum::<f64>() < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
}

/// Approximate A^{-1} r by a few conjugate-gradient steps.
fn inner_solve<P: Pencil>(form: &P, r: &[f64], opts: &SolverOptions) -> Vec<f64> {
    let n = r.len();
    let mut z = vec![0.0; n];
    let mut res = r.to_vec();
    let mut d = res.clone();
    let r0 = dot(r, r).sqrt();
    let mut rr = r0 * r0;
    for _ in 0..opts.inner_iter {
        let ad = form.apply_a(&d);
        let dad = dot(&d, &ad);
        if !(dad > 0.0) {
            break;
        }
        let alpha = rr / dad;
        for k in 0..n {
            z[k] += alpha * d[k];
            res[k] -= alpha * ad[k];
        }
        let rr_new = dot(&res, &res);
        if rr_new.sqrt() <= opts.inner_tol * r0 {
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            d[k] = res[k] + beta * d[k];
        }
    }
    z
}

fn dense_solve<P: Pencil>(form: &P, a: DMatrix<f64>, opts: &SolverOptions) -> Result<EigenPair> {
    let n = a.nrows();
    let m = form.mass_diag();
    let is: Vec<f64> = m.iter().map(|w| 1.0 / w.sqrt()).collect();
    let b = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * is[i] * is[j]);
    let eig = SymmetricEigen::new(b);
    let (k, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .ok_or_else(|| Error::Empty("empty pencil".into()))?;
    let mut x: Vec<f64> = (0..n).map(|i| eig.eigenvectors[(i, k)] * is[i]).collect();
    orient(&mut x);
    let ax = form.apply_a(&x);
    let residual = residual_norm(&ax, &m, &x, value);
    Ok(EigenPair {
        value,
        vector: x,
        residual,
        iterations: 1,
        accepted: residual < opts.tol * value.abs().max(1.0),
    })
}

/// Smallest eigenpair of A u = lambda M u.
///
/// Small pencils are solved densely; larger ones by a single-vector locally
/// optimal block preconditioned conjugate gradient iteration whose
/// preconditioner is a truncated inner CG solve with A (an inexact inverse
/// iteration), started from the all-ones vector.
pub fn smallest_eigenpair<P: Pencil>(form: &P, opts: &SolverOptions) -> Result<EigenPair> {
    let n = form.len();
    if n == 0 {
        return Err(Error::Empty("no unknowns".into()));
    }
    if let Some(a) = form.dense_a() {
        return dense_solve(form, a, opts);
    }
    let m = form.mass_diag();
    let mut x = vec![1.0; n];
    let nx = mdot(&m, &x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= nx);
    let mut ax = form.apply_a(&x);
    let mut lambda = dot(&x, &ax);
    let mut p: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut best = (lambda, f64::INFINITY);
    for it in 1..=opts.max_iter {
        let r: Vec<f64> = (0..n).map(|k| ax[k] - lambda * m[k] * x[k]).collect();
        let res = residual_norm(&ax, &m, &x, lambda);
        if res < best.1 {
            best = (lambda, res);
        }
        if res < opts.tol * lambda.abs().max(1.0) {
            // final residual from a fresh product
            let ax_fresh = form.apply_a(&x);
            let lam = dot(&x, &ax_fresh) / mdot(&m, &x, &x);
            let fres = residual_norm(&ax_fresh, &m, &x, lam);
            if fres < opts.tol * lam.abs().max(1.0) {
                orient(&mut x);
                return Ok(EigenPair {
                    value: lam,
                    vector: x,
                    residual: fres,
                    iterations: it,
                    accepted: true,
                });
            }
            ax = ax_fresh;
            lambda = lam;
            p = None;
            continue;
        }
        let w = inner_solve(form, &r, opts);
        let aw = form.apply_a(&w);
        // basis [x, w, p] with A-images, M-orthonormalized
        let mut basis: Vec<(Vec<f64>, Vec<f64>)> = vec![(x.clone(), ax.clone()), (w, aw)];
        if let Some(pp) = p.take() {
            basis.push(pp);
        }
        let mut ortho: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        for (mut v, mut av) in basis {
            let n0 = mdot(&m, &v, &v).sqrt();
            for _ in 0..2 {
                for (q, aq) in &ortho {
                    let c = mdot(&m, q, &v);
                    for k in 0..n {
                        v[k] -= c * q[k];
                        av[k] -= c * aq[k];
                    }
                }
            }
            let nv = mdot(&m, &v, &v).sqrt();
            if nv > 1e-10 * n0 && nv > 0.0 {
                v.iter_mut().for_each(|t| *t /= nv);
                av.iter_mut().for_each(|t| *t /= nv);
                ortho.push((v, av));
            }
        }
        let kdim = ortho.len();
        let g = DMatrix::from_fn(kdim, kdim, |i, j| 0.5 * (dot(&ortho[i].0, &ortho[j].1) + dot(&ortho[j].0, &ortho[i].1)));
        let eig = SymmetricEigen::new(g);
        let (imin, &lam_new) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty Ritz problem");
        let c: Vec<f64> = (0..kdim).map(|i| eig.eigenvectors[(i, imin)]).collect();
        let mut xn = vec![0.0; n];
        let mut axn = vec![0.0; n];
        let mut pn = vec![0.0; n];
        let mut apn = vec![0.0; n];
        for (i, (v, av)) in ortho.iter().enumerate() {
            for k in 0..n {
                xn[k] += c[i] * v[k];
                axn[k] += c[i] * av[k];
                if i > 0 {
                    pn[k] += c[i] * v[k];
                    apn[k] += c[i] * av[k];
                }
            }
        }
        let nn = mdot(&m, &xn, &xn).sqrt();
        xn.iter_mut().for_each(|t| *t /= nn);
        axn.iter_mut().for_each(|t| *t /= nn);
        x = xn;
        ax = axn;
        lambda = lam_new;
        if kdim > 1 {
            p = Some((pn, apn));
        }
    }
    Err(Error::Iteration {
        iterations: opts.max_iter,
        value: best.0,
        residual: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seminorm::FormKind;

    fn pencil(a: DMatrix<f64>, m: Vec<f64>) -> DenseForm {
        DenseForm {
            dim: 1,
            s: 0.5,
            kind: FormKind::Regional,
            a,
            m: DVector::from_vec(m),
        }
    }

    /// Large pencil forcing the iterative path.
    struct Big(DenseForm);

    impl Pencil for Big {
        fn len(&self) -> usize {
            self.0.len()
        }
        fn apply_a(&self, x: &[f64]) -> Vec<f64> {
            self.0.apply_a(x)
        }
        fn mass_diag(&self) -> Vec<f64> {
            self.0.mass_diag()
        }
        fn dense_a(&self) -> Option<DMatrix<f64>> {
            None
        }
    }

    #[test]
    fn identity_pencil() {
        let n = 30;
        let f = pencil(DMatrix::identity(n, n) * 2.0, vec![2.0; n]);
        let e = smallest_eigenpair(&f, &SolverOptions::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-14);
        let e = smallest_eigenpair(&Big(f), &SolverOptions::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_two_by_two() {
        let f = pencil(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0])), vec![1.0, 1.0]);
        let e = smallest_eigenpair(&f, &SolverOptions::default()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn iterative_matches_dense_on_laplacian() {
        let n = 300;
        let a = DMatrix::from_fn(n, n, |i, j| match (i as i64 - j as i64).abs() {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        let m: Vec<f64> = (0..n).map(|k| 1.0 + 0.5 * ((k as f64) * 0.1).sin()).collect();
        let f = pencil(a, m);
        let d = smallest_eigenpair(&f, &SolverOptions::default()).unwrap();
        let it = smallest_eigenpair(&Big(f), &SolverOptions::default()).unwrap();
        assert!(it.accepted);
        assert!((d.value - it.value).abs() < 1e-10 * d.value.max(1e-3), "{} {}", d.value, it.value);
        assert!(it.vector.iter().all(|&v| v >= -1e-8));
    }
}

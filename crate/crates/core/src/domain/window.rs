use super::{DomainFamily, DomainMask, Window};
use crate::error::{Error, Result};
use crate::quad;

/// Values on the active cells of a mask, in `active_indices` order;
/// `None` marks cells outside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSamples {
    pub cells: Vec<usize>,
    pub values: Vec<Option<f64>>,
}

/// Distance from each active cell center to the complement of lambda * U,
/// against the continuum window geometry.
pub fn dist_to_window_complement(
    mask: &DomainMask,
    window: Window,
    lambda: f64,
) -> Result<CellSamples> {
    if !(lambda > 0.0) {
        return Err(Error::Domain("lambda must be positive".into()));
    }
    let g = mask.grid();
    let cells: Vec<usize> = mask.active_indices().collect();
    let values: Vec<Option<f64>> = cells
        .iter()
        .map(|&k| {
            let (i, j) = g.coords(k);
            let d = window.dist_to_complement(g.cell_center(i, j), lambda);
            (d > 0.0).then_some(d)
        })
        .collect();
    if values.iter().all(Option::is_none) {
        return Err(Error::Empty("mask does not meet the window".into()));
    }
    Ok(CellSamples { cells, values })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceAverage {
    pub value: f64,
    pub cells: usize,
    pub excluded: usize,
    pub accuracy_warning: bool,
}

/// Midpoint rule for (1/|Omega cap lambda U|) int dist(x, (lambda U)^c)^(-2s).
pub fn distance_average(
    mask: &DomainMask,
    window: Window,
    lambda: f64,
    s: f64,
) -> Result<DistanceAverage> {
    let g = mask.grid();
    let vol = g.cell_volume();
    let mut sum = 0.0;
    let mut cells = 0usize;
    let mut excluded = 0usize;
    for k in mask.active_indices() {
        let (i, j) = g.coords(k);
        let x = g.cell_center(i, j);
        let d = window.dist_to_complement(x, lambda);
        let inside = match window {
            Window::Ball => x[0].hypot(x[1]) <= lambda,
            Window::Square => x[0].abs() <= lambda && x[1].abs() <= lambda,
        };
        if !inside {
            continue;
        }
        if d > 0.0 {
            cells += 1;
            sum += vol * d.powf(-2.0 * s);
        } else {
            excluded += 1;
        }
    }
    if cells == 0 {
        return Err(Error::Empty("mask does not meet the window".into()));
    }
    if excluded > 0 {
        log::info!("distance_average: {excluded} boundary cells excluded");
    }
    let accuracy_warning = excluded as f64 > 0.01 * (cells + excluded) as f64;
    if accuracy_warning {
        log::warn!("distance_average: more than 1% of cells excluded");
    }
    Ok(DistanceAverage {
        value: sum / (cells as f64 * vol),
        cells,
        excluded,
        accuracy_warning,
    })
}

/// Pieces of int_{Omega cap lambda V} dist^(-2s) over the regions
/// A: |x1| <= lambda/2, B: lambda/2 < |x1| <= R, C: R < |x1| < lambda,
/// with V = (-1,1)^2 and lambda = R + a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSplit {
    pub r: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub measure: f64,
}

impl DistanceSplit {
    pub fn total(&self) -> f64 {
        self.a + self.b + self.c
    }
    pub fn average(&self) -> f64 {
        self.total() / self.measure
    }
}

/// Midpoint version of the split on a mask.
pub fn distance_split(mask: &DomainMask, r: f64, a: f64, s: f64) -> Result<DistanceSplit> {
    if mask.dim() != 2 {
        return Err(Error::Domain("distance_split needs a 2D mask".into()));
    }
    let lambda = r + a;
    let g = mask.grid();
    let vol = g.cell_volume();
    let mut out = DistanceSplit {
        r,
        lambda,
        a: 0.0,
        b: 0.0,
        c: 0.0,
        measure: 0.0,
    };
    for k in mask.active_indices() {
        let (i, j) = g.coords(k);
        let x = g.cell_center(i, j);
        let d = Window::Square.dist_to_complement(x, lambda);
        if d <= 0.0 {
            continue;
        }
        let v = vol * d.powf(-2.0 * s);
        out.measure += vol;
        let ax = x[0].abs();
        if ax <= 0.5 * lambda {
            out.a += v;
        } else if ax <= r {
            out.b += v;
        } else {
            out.c += v;
        }
    }
    if out.measure == 0.0 {
        return Err(Error::Empty("mask does not meet the window".into()));
    }
    Ok(out)
}

/// int over [lo, hi] of min(d1, lambda - |y|)^(-2s) dy, with |y| < lambda.
fn slice_integral(lo: f64, hi: f64, d1: f64, lambda: f64, s: f64) -> f64 {
    let lo = lo.max(-lambda);
    let hi = hi.min(lambda);
    if hi <= lo {
        return 0.0;
    }
    let x1 = lambda - d1;
    let mut cuts = vec![lo, hi];
    for c in [-x1, 0.0, x1] {
        if c > lo && c < hi {
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let e = 1.0 - 2.0 * s;
    let mut sum = 0.0;
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let mid = 0.5 * (p + q);
        if mid.abs() <= x1 {
            sum += (q - p) * d1.powf(-2.0 * s);
        } else if mid > 0.0 {
            sum += quad::power_moment(e, lambda - q, lambda - p);
        } else {
            sum += quad::power_moment(e, lambda + p, lambda + q);
        }
    }
    sum
}

/// Continuum split for two-dimensional families, by slice integration.
/// Requires s < 1/2 so the window-boundary singularity is integrable.
pub fn family_distance_split(
    family: &DomainFamily,
    r: f64,
    a: f64,
    s: f64,
) -> Result<DistanceSplit> {
    if family.dim() != 2 {
        return Err(Error::Domain("family_distance_split needs a 2D family".into()));
    }
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::Domain("continuum distance split needs 0 < s < 1/2".into()));
    }
    let lambda = r + a;
    let mut cuts = family.x1_breakpoints(-lambda, lambda);
    for c in [-lambda, -r, -0.5 * lambda, 0.5 * lambda, r, lambda] {
        cuts.push(c);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = DistanceSplit {
        r,
        lambda,
        a: 0.0,
        b: 0.0,
        c: 0.0,
        measure: 0.0,
    };
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if q - p < 1e-14 * lambda {
            continue;
        }
        let at_right = q == lambda;
        let at_left = p == -lambda;
        let f = |x1: f64, da: f64, db: f64| {
            let d1 = if at_right && x1 > 0.0 {
                db
            } else if at_left && x1 < 0.0 {
                da
            } else {
                lambda - x1.abs()
            };
            family
                .slice(x1)
                .iter()
                .map(|&(lo, hi)| slice_integral(lo, hi, d1, lambda, s))
                .sum::<f64>()
        };
        let len = |x1: f64, _da: f64, _db: f64| {
            family
                .slice(x1)
                .iter()
                .map(|&(lo, hi)| (hi.min(lambda) - lo.max(-lambda)).max(0.0))
                .sum::<f64>()
        };
        let v = quad::tanh_sinh(&f, p, q, 1e-11);
        let m = quad::tanh_sinh(&len, p, q, 1e-11);
        out.measure += m;
        let mid = (0.5 * (p + q)).abs();
        if mid <= 0.5 * lambda {
            out.a += v;
        } else if mid <= r {
            out.b += v;
        } else {
            out.c += v;
        }
    }
    if out.measure == 0.0 {
        return Err(Error::Empty("family does not meet the window".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{rasterize, CrossShape};
    use super::*;

    #[test]
    fn ball_window_center_distance() {
        let m = rasterize(&DomainFamily::Ball { center: [0.0, 0.0], radius: 3.0 }, 0.5).unwrap();
        let d = dist_to_window_complement(&m, Window::Ball, 8.0).unwrap();
        let g = m.grid();
        for (k, v) in d.cells.iter().zip(&d.values) {
            let (i, j) = g.coords(*k);
            let c = g.cell_center(i, j);
            assert!((v.unwrap() - (8.0 - c[0].hypot(c[1]))).abs() < 1e-14);
        }
    }

    #[test]
    fn square_window_distance_on_arm() {
        // region |x1| > |x2| of the plus shape: distance is k - |x1|
        let plus = DomainFamily::StripCross { shape: CrossShape::Plus, arm: 12.0 };
        let m = rasterize(&plus, 0.25).unwrap();
        let d = dist_to_window_complement(&m, Window::Square, 8.0).unwrap();
        let g = m.grid();
        for (k, v) in d.cells.iter().zip(&d.values) {
            let (i, j) = g.coords(*k);
            let c = g.cell_center(i, j);
            if c[0].abs() > c[1].abs() && c[0].abs() < 8.0 {
                assert!((v.unwrap() - (8.0 - c[0].abs())).abs() < 1e-14);
            }
            if c[0].abs() > 8.0 {
                assert!(v.is_none());
            }
        }
    }

    #[test]
    fn square_distance_matches_boundary_cloud() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::DEFAULT_SEED);
        let lam = 5.0;
        let h = 0.01;
        let mut cloud = Vec::new();
        let n = (2.0 * lam / h) as usize;
        for k in 0..=n {
            let t = -lam + k as f64 * h;
            cloud.extend([[t, lam], [t, -lam], [lam, t], [-lam, t]]);
        }
        for _ in 0..100 {
            let x = [rng.gen_range(-lam..lam), rng.gen_range(-lam..lam)];
            let brute = cloud
                .iter()
                .map(|p| (p[0] - x[0]).hypot(p[1] - x[1]))
                .fold(f64::INFINITY, f64::min);
            let d = Window::Square.dist_to_complement(x, lam);
            assert!((d - brute).abs() <= 2.0 * h);
        }
    }

    #[test]
    fn empty_intersection_is_reported() {
        let m = rasterize(&DomainFamily::Ball { center: [20.0, 0.0], radius: 1.0 }, 0.25).unwrap();
        assert!(dist_to_window_complement(&m, Window::Ball, 4.0).is_err());
        assert!(distance_average(&m, Window::Ball, 4.0, 0.25).is_err());
    }

    #[test]
    fn bounded_box_average_decays() {
        let b = DomainFamily::Box { lo: [-1.0, -1.0], hi: [1.0, 1.0] };
        let m = rasterize(&b, 0.125).unwrap();
        let s = 0.3;
        let a1 = distance_average(&m, Window::Ball, 1000.0, s).unwrap().value;
        let a2 = distance_average(&m, Window::Ball, 10000.0, s).unwrap().value;
        let ratio = a1 / a2;
        assert!((ratio - 10f64.powf(2.0 * s)).abs() / ratio < 0.01);
    }

    #[test]
    fn mask_and_continuum_splits_agree() {
        let f = DomainFamily::StripCross { shape: CrossShape::Plus, arm: 20.0 };
        let m = rasterize(&f, 1.0 / 16.0).unwrap();
        let s = 0.2;
        let a = distance_split(&m, 6.0, 2.0, s).unwrap();
        let b = family_distance_split(&f, 6.0, 2.0, s).unwrap();
        assert!((a.measure - b.measure).abs() / b.measure < 1e-3);
        assert!((a.average() - b.average()).abs() / b.average() < 0.02);
        assert!((a.a - b.a).abs() / b.a < 0.01);
    }

    #[test]
    fn slice_integral_closed_form() {
        let (d1, lam, s): (f64, f64, f64) = (0.7, 3.0, 0.3);
        let num = quad::adaptive(
            &|y: f64| d1.min(lam - y.abs()).powf(-2.0 * s),
            -2.9,
            2.95,
            1e-12,
        );
        assert!((slice_integral(-2.9, 2.95, d1, lam, s) - num).abs() < 1e-9);
    }
}

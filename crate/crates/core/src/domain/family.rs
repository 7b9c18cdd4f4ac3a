use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Height profile of a graph domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    /// coef * x^(-exponent), for x > 0
    InversePower { coef: f64, exponent: f64 },
    /// piecewise-linear interpolation, constant beyond the ends
    Sampled { xs: Vec<f64>, ys: Vec<f64> },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::InversePower { coef, exponent } => coef * x.powf(-exponent),
            Profile::Sampled { xs, ys } => interp(xs, ys, x),
        }
    }
}

pub(crate) fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + t * (ys[k + 1] - ys[k])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossShape {
    /// (0,1)x(0,T) union (0,T)x(0,1)
    LShape,
    /// (-T,T)x(-1,1) union (-1,1)x(-T,T)
    Plus,
}

/// Continuum domain families. Unbounded members carry an explicit truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainFamily {
    IntervalUnion {
        intervals: Vec<[f64; 2]>,
    },
    Box {
        lo: [f64; 2],
        hi: [f64; 2],
    },
    /// (-half_length, half_length) x (-half_width, half_width)
    TruncatedStrip {
        half_width: f64,
        half_length: f64,
    },
    /// union over k = 1..=k_max of 2k-1 < |x| < 2k
    AnnuliUnion {
        k_max: u32,
    },
    /// x_min < x1 < x_max, lower(x1) < x2 < upper(x1)
    GraphDomain {
        x_min: f64,
        x_max: Option<f64>,
        lower: Profile,
        upper: Profile,
    },
    /// union over l = first..first+count of (l, l + l^(-2-eps)) x (0, l)
    Blocks {
        eps: f64,
        first: u32,
        count: u32,
    },
    StripCross {
        shape: CrossShape,
        arm: f64,
    },
    Ball {
        center: [f64; 2],
        radius: f64,
    },
}

impl DomainFamily {
    pub fn interval(a: f64, b: f64) -> Self {
        DomainFamily::IntervalUnion {
            intervals: vec![[a, b]],
        }
    }

    pub fn strip(half_length: f64) -> Self {
        DomainFamily::TruncatedStrip {
            half_width: 1.0,
            half_length,
        }
    }

    /// Cusp x1 > 1, 0 < x2 < x1^(-1-eps), optionally truncated.
    pub fn cusp(eps: f64, x_max: Option<f64>) -> Self {
        DomainFamily::GraphDomain {
            x_min: 1.0,
            x_max,
            lower: Profile::Constant { value: 0.0 },
            upper: Profile::InversePower {
                coef: 1.0,
                exponent: 1.0 + eps,
            },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainFamily::IntervalUnion { .. } => 1,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DomainFamily::IntervalUnion { .. } => "interval_union",
            DomainFamily::Box { .. } => "box",
            DomainFamily::TruncatedStrip { .. } => "truncated_strip",
            DomainFamily::AnnuliUnion { .. } => "annuli_union",
            DomainFamily::GraphDomain { .. } => "graph_domain",
            DomainFamily::Blocks { .. } => "blocks",
            DomainFamily::StripCross { .. } => "strip_cross",
            DomainFamily::Ball { .. } => "ball",
        }
    }

    /// Same family truncated at length `l` along its unbounded direction.
    pub fn with_truncation(&self, l: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::Config("truncation length must be positive".into()));
        }
        let mut f = self.clone();
        match &mut f {
            DomainFamily::TruncatedStrip { half_length, .. } => *half_length = l,
            DomainFamily::GraphDomain { x_max, .. } => *x_max = Some(l),
            DomainFamily::StripCross { arm, .. } => *arm = l,
            _ => return Err(Error::Config(format!("family {} has no truncation length", self.name()))),
        }
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("{}: {m}", self.name())));
        match self {
            DomainFamily::IntervalUnion { intervals } => {
                if intervals.is_empty() || intervals.iter().any(|[a, b]| !(a < b)) {
                    return bad("intervals must be nonempty with a < b");
                }
            }
            DomainFamily::Box { lo, hi } => {
                if !(lo[0] < hi[0] && lo[1] < hi[1]) {
                    return bad("lo must be below hi");
                }
            }
            DomainFamily::TruncatedStrip {
                half_width,
                half_length,
            } => {
                if !(*half_width > 0.0 && *half_length > 0.0) {
                    return bad("half sizes must be positive");
                }
            }
            DomainFamily::AnnuliUnion { k_max } => {
                if *k_max == 0 {
                    return bad("k_max must be positive");
                }
            }
            DomainFamily::GraphDomain { x_min, x_max, .. } => {
                if let Some(m) = x_max {
                    if !(m > x_min) {
                        return bad("x_max must exceed x_min");
                    }
                }
            }
            DomainFamily::Blocks { eps, first, count } => {
                if !(*eps > 0.0) || *first == 0 || *count == 0 {
                    return bad("need eps > 0, first >= 1, count >= 1");
                }
            }
            DomainFamily::StripCross { arm, shape } => {
                let min = if *shape == CrossShape::Plus { 1.0 } else { 0.0 };
                if !(*arm > min) {
                    return bad("arm too short");
                }
            }
            DomainFamily::Ball { radius, .. } => {
                if !(*radius > 0.0) {
                    return bad("radius must be positive");
                }
            }
        }
        Ok(())
    }

    /// Open-set membership.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        let [x1, x2] = x;
        match self {
            DomainFamily::IntervalUnion { intervals } => {
                intervals.iter().any(|&[a, b]| a < x1 && x1 < b)
            }
            DomainFamily::Box { lo, hi } => lo[0] < x1 && x1 < hi[0] && lo[1] < x2 && x2 < hi[1],
            DomainFamily::TruncatedStrip {
                half_width,
                half_length,
            } => x1.abs() < *half_length && x2.abs() < *half_width,
            DomainFamily::AnnuliUnion { k_max } => {
                let r = x1.hypot(x2);
                let k = ((r + 1.0) / 2.0).floor();
                k >= 1.0 && k <= *k_max as f64 && r > 2.0 * k - 1.0 && r < 2.0 * k
            }
            DomainFamily::GraphDomain {
                x_min,
                x_max,
                lower,
                upper,
            } => {
                x1 > *x_min
                    && x_max.map_or(true, |m| x1 < m)
                    && lower.eval(x1) < x2
                    && x2 < upper.eval(x1)
            }
            DomainFamily::Blocks { eps, first, count } => {
                let l = x1.floor();
                l >= *first as f64
                    && l < (*first + *count) as f64
                    && x1 > l
                    && x1 < l + l.powf(-2.0 - eps)
                    && x2 > 0.0
                    && x2 < l
            }
            DomainFamily::StripCross { shape, arm } => match shape {
                CrossShape::LShape => {
                    (0.0 < x1 && x1 < 1.0 && 0.0 < x2 && x2 < *arm)
                        || (0.0 < x1 && x1 < *arm && 0.0 < x2 && x2 < 1.0)
                }
                CrossShape::Plus => {
                    (x1.abs() < *arm && x2.abs() < 1.0) || (x1.abs() < 1.0 && x2.abs() < *arm)
                }
            },
            DomainFamily::Ball { center, radius } => {
                (x1 - center[0]).hypot(x2 - center[1]) < *radius
            }
        }
    }

    /// Bounding box (lo, hi); unbounded families without truncation are an error.
    pub fn bbox(&self) -> Result<([f64; 2], [f64; 2])> {
        Ok(match self {
            DomainFamily::IntervalUnion { intervals } => {
                let lo = intervals.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                let hi = intervals.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max);
                ([lo, 0.0], [hi, 0.0])
            }
            DomainFamily::Box { lo, hi } => (*lo, *hi),
            DomainFamily::TruncatedStrip {
                half_width,
                half_length,
            } => ([-half_length, -half_width], [*half_length, *half_width]),
            DomainFamily::AnnuliUnion { k_max } => {
                let r = 2.0 * *k_max as f64;
                ([-r, -r], [r, r])
            }
            DomainFamily::GraphDomain {
                x_min,
                x_max,
                lower,
                upper,
            } => {
                let xm = x_max.ok_or_else(|| {
                    Error::Config("graph domain needs a truncation x_max to be rasterized".into())
                })?;
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for k in 0..=2048 {
                    let x = x_min + (xm - x_min) * k as f64 / 2048.0;
                    lo = lo.min(lower.eval(x));
                    hi = hi.max(upper.eval(x));
                }
                ([*x_min, lo], [xm, hi])
            }
            DomainFamily::Blocks { eps, first, count } => {
                let last = (*first + *count - 1) as f64;
                ([*first as f64, 0.0], [last + last.powf(-2.0 - eps), last])
            }
            DomainFamily::StripCross { shape, arm } => match shape {
                CrossShape::LShape => ([0.0, 0.0], [*arm, *arm]),
                CrossShape::Plus => ([-arm, -arm], [*arm, *arm]),
            },
            DomainFamily::Ball { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
        })
    }

    /// Thinnest feature size; rasterization needs at least two cells across it.
    pub fn min_feature(&self) -> f64 {
        match self {
            DomainFamily::IntervalUnion { intervals } => {
                let mut w = intervals
                    .iter()
                    .map(|[a, b]| b - a)
                    .fold(f64::INFINITY, f64::min);
                let mut sorted = intervals.clone();
                sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
                for p in sorted.windows(2) {
                    let gap = p[1][0] - p[0][1];
                    if gap > 0.0 {
                        w = w.min(gap);
                    }
                }
                w
            }
            DomainFamily::Box { lo, hi } => (hi[0] - lo[0]).min(hi[1] - lo[1]),
            DomainFamily::TruncatedStrip { half_width, .. } => 2.0 * half_width,
            DomainFamily::AnnuliUnion { .. } => 1.0,
            DomainFamily::GraphDomain {
                x_min,
                x_max,
                lower,
                upper,
            } => match x_max {
                None => 0.0,
                Some(xm) => {
                    let mut w: f64 = xm - x_min;
                    for k in 0..=2048 {
                        let x = x_min + (xm - x_min) * k as f64 / 2048.0;
                        w = w.min(upper.eval(x) - lower.eval(x));
                    }
                    w
                }
            },
            DomainFamily::Blocks { eps, first, count } => {
                let last = (*first + *count - 1) as f64;
                last.powf(-2.0 - eps).min(1.0 - (*first as f64).powf(-2.0 - eps))
            }
            DomainFamily::StripCross { shape, .. } => match shape {
                CrossShape::LShape => 1.0,
                CrossShape::Plus => 2.0,
            },
            DomainFamily::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// Continuum Lebesgue measure when it has a closed form.
    pub fn measure(&self) -> Option<f64> {
        use std::f64::consts::PI;
        match self {
            DomainFamily::IntervalUnion { intervals } => {
                Some(intervals.iter().map(|[a, b]| b - a).sum())
            }
            DomainFamily::Box { lo, hi } => Some((hi[0] - lo[0]) * (hi[1] - lo[1])),
            DomainFamily::TruncatedStrip {
                half_width,
                half_length,
            } => Some(4.0 * half_width * half_length),
            DomainFamily::AnnuliUnion { k_max } => Some(
                (1..=*k_max)
                    .map(|k| {
                        let k = k as f64;
                        PI * (4.0 * k * k - (2.0 * k - 1.0).powi(2))
                    })
                    .sum(),
            ),
            DomainFamily::Blocks { eps, first, count } => Some(
                (*first..*first + *count)
                    .map(|l| {
                        let l = l as f64;
                        l * l.powf(-2.0 - eps)
                    })
                    .sum(),
            ),
            DomainFamily::StripCross { shape, arm } => Some(match shape {
                CrossShape::LShape => 2.0 * arm - 1.0,
                CrossShape::Plus => 8.0 * arm - 4.0,
            }),
            DomainFamily::Ball { radius, .. } => Some(PI * radius * radius),
            DomainFamily::GraphDomain { .. } => None,
        }
    }

    /// x2-intervals of the slice {x1 = r}, for two-dimensional families.
    pub fn slice(&self, r: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        match self {
            DomainFamily::IntervalUnion { .. } => {}
            DomainFamily::Box { lo, hi } => {
                if lo[0] < r && r < hi[0] {
                    out.push((lo[1], hi[1]));
                }
            }
            DomainFamily::TruncatedStrip {
                half_width,
                half_length,
            } => {
                if r.abs() < *half_length {
                    out.push((-half_width, *half_width));
                }
            }
            DomainFamily::AnnuliUnion { k_max } => {
                let mut pos = Vec::new();
                for k in 1..=*k_max {
                    let (ri, ro) = (2.0 * k as f64 - 1.0, 2.0 * k as f64);
                    if r.abs() >= ro {
                        continue;
                    }
                    let top = (ro * ro - r * r).sqrt();
                    if r.abs() > ri {
                        out.push((-top, top));
                    } else {
                        let bot = (ri * ri - r * r).sqrt();
                        pos.push((bot, top));
                    }
                }
                for &(a, b) in &pos {
                    out.push((a, b));
                    out.push((-b, -a));
                }
            }
            DomainFamily::GraphDomain {
                x_min,
                x_max,
                lower,
                upper,
            } => {
                if r > *x_min && x_max.map_or(true, |m| r < m) {
                    let (a, b) = (lower.eval(r), upper.eval(r));
                    if b > a {
                        out.push((a, b));
                    }
                }
            }
            DomainFamily::Blocks { eps, first, count } => {
                let l = r.floor();
                if l >= *first as f64
                    && l < (*first + *count) as f64
                    && r > l
                    && r < l + l.powf(-2.0 - eps)
                {
                    out.push((0.0, l));
                }
            }
            DomainFamily::StripCross { shape, arm } => match shape {
                CrossShape::LShape => {
                    if 0.0 < r && r < 1.0 {
                        out.push((0.0, *arm));
                    } else if 1.0 <= r && r < *arm {
                        out.push((0.0, 1.0));
                    }
                }
                CrossShape::Plus => {
                    if r.abs() < 1.0 {
                        out.push((-arm, *arm));
                    } else if r.abs() < *arm {
                        out.push((-1.0, 1.0));
                    }
                }
            },
            DomainFamily::Ball { center, radius } => {
                let d = r - center[0];
                if d.abs() < *radius {
                    let t = (radius * radius - d * d).sqrt();
                    out.push((center[1] - t, center[1] + t));
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Length of the slice {x1 = r}.
    pub fn slice_measure(&self, r: f64) -> f64 {
        self.slice(r).iter().map(|(a, b)| b - a).sum()
    }

    /// Points in x1 where slices change non-smoothly, within [lo, hi].
    pub fn x1_breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut v = vec![lo, hi];
        match self {
            DomainFamily::Blocks { eps, first, count } => {
                for l in *first..*first + *count {
                    let l = l as f64;
                    v.push(l);
                    v.push(l + l.powf(-2.0 - eps));
                }
            }
            DomainFamily::GraphDomain { x_min, x_max, .. } => {
                v.push(*x_min);
                if let Some(m) = x_max {
                    v.push(*m);
                }
            }
            DomainFamily::Box { lo: a, hi: b } => {
                v.push(a[0]);
                v.push(b[0]);
            }
            DomainFamily::TruncatedStrip { half_length, .. } => {
                v.push(-half_length);
                v.push(*half_length);
            }
            DomainFamily::StripCross { arm, .. } => {
                for x in [-arm, -1.0, 0.0, 1.0, *arm] {
                    v.push(x);
                }
            }
            DomainFamily::AnnuliUnion { k_max } => {
                for k in 1..=2 * *k_max {
                    v.push(k as f64);
                    v.push(-(k as f64));
                }
                v.push(0.0);
            }
            DomainFamily::Ball { center, radius } => {
                v.push(center[0] - radius);
                v.push(center[0] + radius);
            }
            DomainFamily::IntervalUnion { .. } => {}
        }
        v.retain(|x| *x >= lo && *x <= hi);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// Window shapes U for the exhaustion lambda * U.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// unit ball
    Ball,
    /// (-1, 1)^n
    Square,
}

impl Window {
    pub fn contains(&self, x: [f64; 2], lambda: f64) -> bool {
        self.dist_to_complement(x, lambda) > 0.0
    }

    /// Euclidean distance from x to the complement of lambda * U (0 outside).
    pub fn dist_to_complement(&self, x: [f64; 2], lambda: f64) -> f64 {
        let d = match self {
            Window::Ball => lambda - x[0].hypot(x[1]),
            Window::Square => (lambda - x[0].abs()).min(lambda - x[1].abs()),
        };
        d.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annuli_membership() {
        let f = DomainFamily::AnnuliUnion { k_max: 2 };
        assert!(f.contains([1.5, 0.0]));
        assert!(!f.contains([2.5, 0.0]));
        assert!(f.contains([0.0, -3.5]));
        assert!(!f.contains([4.5, 0.0]));
        assert!(!f.contains([0.5, 0.0]));
    }

    #[test]
    fn slices_match_membership() {
        let fams = [
            DomainFamily::AnnuliUnion { k_max: 3 },
            DomainFamily::StripCross {
                shape: CrossShape::Plus,
                arm: 5.0,
            },
            DomainFamily::cusp(0.2, Some(20.0)),
            DomainFamily::Blocks {
                eps: 0.5,
                first: 1,
                count: 3,
            },
        ];
        for f in &fams {
            for i in 0..200 {
                let r = -6.3 + i as f64 * 0.0731;
                let sl = f.slice(r);
                for j in 0..200 {
                    let y = -6.1 + j as f64 * 0.0617;
                    let inside = sl.iter().any(|&(a, b)| a < y && y < b);
                    assert_eq!(inside, f.contains([r, y]), "{} at ({r},{y})", f.name());
                }
            }
        }
    }

    #[test]
    fn family_json_roundtrip() {
        let f = DomainFamily::cusp(0.25, Some(12.0));
        let s = serde_json::to_string(&f).unwrap();
        let g: DomainFamily = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn window_distances() {
        assert_eq!(Window::Ball.dist_to_complement([0.0, 0.0], 8.0), 8.0);
        assert_eq!(Window::Square.dist_to_complement([5.0, 2.0], 7.0), 2.0);
        assert_eq!(Window::Square.dist_to_complement([9.0, 2.0], 7.0), 0.0);
    }
}

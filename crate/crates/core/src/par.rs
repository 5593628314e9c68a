//! Piecewise-affine regularizers (PARs).
//!
//! A PAR is a continuous, piecewise-linear penalty whose kinks sit at the
//! target quantization levels. Symmetric families store the positive half of
//! the level set `0 = q_0 < q_1 < ... < q_m` together with one slope per
//! segment; on `q_k <= |x| <= q_{k+1}` the value is `a_k (|x| - q_k) + b_k`
//! with intercepts `b_0 = 0`, `b_k = b_{k-1} + a_{k-1} (q_k - q_{k-1})`.
//!
//! Two families have a dedicated representation:
//! * quasiconvex-uniform: the unbounded staircase with gap `q` (rising with
//!   slope `height` on `[kq, (k+1/2)q]`, flat on `[(k+1/2)q, (k+1)q]`);
//! * nonconvex-nearest: the distance to an ordered, possibly asymmetric list
//!   of levels (tents with slopes `+1, -1` between adjacent levels).

use serde::{Deserialize, Serialize};

use crate::error::{ParoError, Result};

/// Default absolute tolerance for counting a coordinate as quantized.
pub const DEFAULT_QUANT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Convex,
    QuasiconvexUniform,
    NonconvexNearest,
    General,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Convex => "convex",
            Family::QuasiconvexUniform => "quasiconvex-uniform",
            Family::NonconvexNearest => "nonconvex-nearest",
            Family::General => "general",
        }
    }

    pub fn is_symmetric(self) -> bool {
        !matches!(self, Family::NonconvexNearest)
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = ParoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convex" => Ok(Family::Convex),
            "quasiconvex-uniform" | "quasiconvex" => Ok(Family::QuasiconvexUniform),
            "nonconvex-nearest" | "nonconvex" => Ok(Family::NonconvexNearest),
            "general" => Ok(Family::General),
            other => Err(ParoError::InvalidPar(format!("unknown family `{other}`"))),
        }
    }
}

/// Closed interval `[lo, hi]` of subgradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgradInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SubgradInterval {
    pub fn point(v: f64) -> Self {
        SubgradInterval { lo: v, hi: v }
    }

    pub fn hull(a: f64, b: f64) -> Self {
        SubgradInterval {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationReport {
    pub rate: f64,
    pub quantized_mask: Vec<bool>,
    pub tolerance: f64,
}

/// One affine piece of a PAR on the real line: `psi(z) = slope * z + offset`
/// for `z` in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Table {
        levels: Vec<f64>,
        slopes: Vec<f64>,
        intercepts: Vec<f64>,
    },
    Staircase {
        gap: f64,
        height: f64,
    },
    Nearest {
        levels: Vec<f64>,
    },
}

/// A piecewise-affine regularizer. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParSpec {
    family: Family,
    shape: Shape,
    a_max: f64,
    nu: f64,
}

fn check_increasing(levels: &[f64]) -> Result<()> {
    if levels.iter().any(|q| !q.is_finite()) {
        return Err(ParoError::InvalidPar("levels must be finite".into()));
    }
    if let Some(w) = levels.windows(2).find(|w| w[0] >= w[1]) {
        return Err(ParoError::InvalidPar(format!(
            "levels must be strictly increasing, found {} followed by {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn intercepts_for(levels: &[f64], slopes: &[f64]) -> Vec<f64> {
    let mut b = Vec::with_capacity(levels.len());
    b.push(0.0);
    for k in 1..levels.len() {
        b.push(b[k - 1] + slopes[k - 1] * (levels[k] - levels[k - 1]));
    }
    b
}

/// Builds a PAR from its positive levels and segment slopes.
///
/// For the nonconvex-nearest family `levels` is the full ordered (signed)
/// level list and `slopes` must be empty. For quasiconvex-uniform, `levels`
/// lists the kinks `0, q/2, q, 3q/2, ...` and `slopes` alternates
/// `h, 0, h, 0, ...`; the staircase is then extended periodically.
pub fn build_par(levels: &[f64], slopes: &[f64], family: Family) -> Result<ParSpec> {
    check_increasing(levels)?;
    if levels.is_empty() {
        return Err(ParoError::InvalidPar("at least one level is required".into()));
    }
    if slopes.iter().any(|a| a.is_nan()) {
        return Err(ParoError::InvalidPar("slopes must not be NaN".into()));
    }

    match family {
        Family::NonconvexNearest => {
            if !slopes.is_empty() {
                return Err(ParoError::InvalidPar(
                    "nonconvex-nearest slopes are implied (+1/-1 tents); pass an empty slope list"
                        .into(),
                ));
            }
            return Ok(ParSpec::nearest(levels.to_vec()));
        }
        Family::QuasiconvexUniform => return staircase_from_table(levels, slopes),
        Family::Convex | Family::General => {}
    }

    if levels[0] != 0.0 {
        return Err(ParoError::InvalidPar(format!(
            "symmetric families need levels starting at 0, found {}",
            levels[0]
        )));
    }
    let count_ok = slopes.len() == levels.len()
        || (family == Family::General && slopes.len() + 1 == levels.len());
    if !count_ok {
        return Err(ParoError::InvalidPar(format!(
            "expected {} slopes for {} levels, found {}",
            levels.len(),
            levels.len(),
            slopes.len()
        )));
    }
    for (k, a) in slopes.iter().enumerate() {
        if a.is_infinite() {
            let last = k + 1 == slopes.len();
            if family != Family::Convex || !last || *a < 0.0 || k == 0 {
                return Err(ParoError::InvalidPar(format!(
                    "infinite slope at segment {k}; only the final segment of a convex PAR \
                     (after at least one finite segment) may be +inf"
                )));
            }
        }
    }
    if let Some(k) = slopes.windows(2).position(|w| w[0] == w[1]) {
        return Err(ParoError::InvalidPar(format!(
            "adjacent slopes a_{k} and a_{} are equal ({})",
            k + 1,
            slopes[k]
        )));
    }
    if family == Family::Convex {
        if slopes[0] < 0.0 {
            return Err(ParoError::InvalidPar(format!(
                "convex PAR needs a_0 >= 0, found {}",
                slopes[0]
            )));
        }
        if let Some(k) = slopes.windows(2).position(|w| w[0] >= w[1]) {
            return Err(ParoError::InvalidPar(format!(
                "convex PAR needs strictly increasing slopes, a_{k} = {} >= a_{} = {}",
                slopes[k],
                k + 1,
                slopes[k + 1]
            )));
        }
    }

    let intercepts = intercepts_for(levels, slopes);
    let a_max = slopes
        .iter()
        .filter(|a| a.is_finite())
        .fold(0.0_f64, |m, a| m.max(a.abs()));
    let nu = match family {
        Family::Convex => slopes[0],
        _ => general_nu(levels, slopes, &intercepts),
    };
    Ok(ParSpec {
        family,
        shape: Shape::Table {
            levels: levels.to_vec(),
            slopes: slopes.to_vec(),
            intercepts,
        },
        a_max,
        nu,
    })
}

// psi(x)/|x| is monotone on each segment, so its infimum is attained at a
// breakpoint, at 0+ (slope a_0) or at infinity (final slope).
fn general_nu(levels: &[f64], slopes: &[f64], intercepts: &[f64]) -> f64 {
    let mut inf = slopes[0];
    for k in 1..levels.len() {
        inf = inf.min(intercepts[k] / levels[k]);
    }
    if let Some(last) = slopes.last() {
        inf = inf.min(*last);
    }
    inf.max(0.0)
}

fn staircase_from_table(levels: &[f64], slopes: &[f64]) -> Result<ParSpec> {
    if levels.len() < 2 || levels[0] != 0.0 {
        return Err(ParoError::InvalidPar(
            "quasiconvex-uniform kinks must start 0, q/2, ...".into(),
        ));
    }
    if slopes.len() != levels.len() {
        return Err(ParoError::InvalidPar(format!(
            "expected {} slopes for {} kinks, found {}",
            levels.len(),
            levels.len(),
            slopes.len()
        )));
    }
    let half = levels[1];
    for (j, q) in levels.iter().enumerate() {
        let expected = j as f64 * half;
        if (q - expected).abs() > 1e-12 * expected.abs().max(1.0) {
            return Err(ParoError::InvalidPar(format!(
                "quasiconvex-uniform kinks must be uniformly spaced; kink {j} is {q}, expected {expected}"
            )));
        }
    }
    let height = slopes[0];
    for (j, a) in slopes.iter().enumerate() {
        let expected = if j % 2 == 0 { height } else { 0.0 };
        if *a != expected {
            return Err(ParoError::InvalidPar(format!(
                "quasiconvex-uniform slopes must alternate {height}, 0; slope {j} is {a}"
            )));
        }
    }
    ParSpec::quasiconvex_uniform(2.0 * half, height)
}

impl ParSpec {
    /// The l1 penalty `|x|` as a single-segment convex PAR.
    pub fn l1() -> Self {
        build_par(&[0.0], &[1.0], Family::Convex).expect("l1 is a valid PAR")
    }

    /// Convex PAR with levels `0, 1, ..., max_level`, slopes `1, 2, ...` and an
    /// infinite final slope, i.e. integer quantization truncated at `max_level`.
    pub fn convex_integer(max_level: usize) -> Self {
        let levels: Vec<f64> = (0..=max_level).map(|k| k as f64).collect();
        let mut slopes: Vec<f64> = (1..=max_level).map(|k| k as f64).collect();
        slopes.push(f64::INFINITY);
        build_par(&levels, &slopes, Family::Convex).expect("integer convex PAR is valid")
    }

    /// Uniform staircase with quantization levels `gap * Z`.
    pub fn quasiconvex_uniform(gap: f64, height: f64) -> Result<Self> {
        if !(gap.is_finite() && gap > 0.0) {
            return Err(ParoError::InvalidPar(format!("gap must be positive, found {gap}")));
        }
        if !(height.is_finite() && height > 0.0) {
            return Err(ParoError::InvalidPar(format!(
                "height must be positive, found {height}"
            )));
        }
        Ok(ParSpec {
            family: Family::QuasiconvexUniform,
            shape: Shape::Staircase { gap, height },
            a_max: height,
            nu: height / 2.0,
        })
    }

    /// Distance-to-nearest-level PAR over an ordered level list.
    pub fn nonconvex_nearest(levels: &[f64]) -> Result<Self> {
        build_par(levels, &[], Family::NonconvexNearest)
    }

    fn nearest(levels: Vec<f64>) -> Self {
        ParSpec {
            family: Family::NonconvexNearest,
            shape: Shape::Nearest { levels },
            a_max: 1.0,
            nu: 0.0,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Maximum finite slope magnitude.
    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    /// Linear-growth constant: `psi(x) >= nu |x|`.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn gap(&self) -> Option<f64> {
        match self.shape {
            Shape::Staircase { gap, .. } => Some(gap),
            _ => None,
        }
    }

    pub fn height(&self) -> Option<f64> {
        match self.shape {
            Shape::Staircase { height, .. } => Some(height),
            _ => None,
        }
    }

    /// Stored levels: the positive half for table families, the full signed
    /// list for nonconvex-nearest, `None` for the unbounded staircase.
    pub fn levels(&self) -> Option<&[f64]> {
        match &self.shape {
            Shape::Table { levels, .. } | Shape::Nearest { levels } => Some(levels),
            Shape::Staircase { .. } => None,
        }
    }

    pub fn slopes(&self) -> Option<&[f64]> {
        match &self.shape {
            Shape::Table { slopes, .. } => Some(slopes),
            _ => None,
        }
    }

    pub fn intercepts(&self) -> Option<&[f64]> {
        match &self.shape {
            Shape::Table { intercepts, .. } => Some(intercepts),
            _ => None,
        }
    }

    /// Largest stored level magnitude, `None` when the level set is unbounded.
    pub fn max_level(&self) -> Option<f64> {
        match &self.shape {
            Shape::Table { levels, .. } => levels.last().copied(),
            Shape::Nearest { levels } => Some(levels[0].abs().max(levels[levels.len() - 1].abs())),
            Shape::Staircase { .. } => None,
        }
    }

    /// Largest gap between adjacent levels (the staircase gap when unbounded).
    pub fn max_gap(&self) -> f64 {
        match &self.shape {
            Shape::Table { levels, .. } | Shape::Nearest { levels } => levels
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(0.0, f64::max),
            Shape::Staircase { gap, .. } => *gap,
        }
    }

    /// `|x|` bound of the effective domain (convex PAR with an infinite final slope).
    pub fn domain_radius(&self) -> Option<f64> {
        match &self.shape {
            Shape::Table { levels, slopes, .. } if slopes.last().is_some_and(|a| a.is_infinite()) => {
                Some(levels[slopes.len() - 1])
            }
            _ => None,
        }
    }

    /// Index of the table segment containing `u = |x|`.
    fn table_segment(levels: &[f64], slopes: &[f64], u: f64) -> usize {
        let starts = &levels[..slopes.len()];
        starts.partition_point(|&q| q <= u).saturating_sub(1)
    }

    /// Evaluates `psi(x)`; `+inf` outside the domain.
    pub fn value(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Table {
                levels,
                slopes,
                intercepts,
            } => {
                let u = x.abs();
                let k = Self::table_segment(levels, slopes, u);
                if slopes[k].is_infinite() {
                    if u == levels[k] {
                        intercepts[k]
                    } else {
                        f64::INFINITY
                    }
                } else {
                    slopes[k] * (u - levels[k]) + intercepts[k]
                }
            }
            Shape::Staircase { gap, height } => {
                let u = x.abs();
                let k = (u / gap).floor();
                let r = u - k * gap;
                let base = if r <= gap / 2.0 {
                    u - k * gap / 2.0
                } else {
                    (k + 1.0) * gap / 2.0
                };
                height * base
            }
            Shape::Nearest { .. } => (x - self.nearest_level(x)).abs(),
        }
    }

    /// Sum of `psi` over the coordinates of `x`.
    pub fn value_sum(&self, x: &[f64]) -> f64 {
        x.iter().map(|&xi| self.value(xi)).sum()
    }

    /// One-sided derivatives `(left, right)` of psi at `x`.
    fn one_sided(&self, x: f64) -> (f64, f64) {
        match &self.shape {
            Shape::Table { levels, slopes, .. } => {
                if x == 0.0 {
                    return (-slopes[0], slopes[0]);
                }
                let u = x.abs();
                let k = Self::table_segment(levels, slopes, u);
                let (inner, outer) = if u == levels[k] && k > 0 {
                    (slopes[k - 1], slopes[k])
                } else if slopes[k].is_infinite() {
                    (f64::INFINITY, f64::INFINITY)
                } else {
                    (slopes[k], slopes[k])
                };
                if x > 0.0 {
                    (inner, outer)
                } else {
                    (-outer, -inner)
                }
            }
            Shape::Staircase { gap, height } => {
                if x == 0.0 {
                    return (-height, *height);
                }
                let u = x.abs();
                let half = gap / 2.0;
                let j = (u / half).round();
                let (inner, outer) = if j * half == u && j >= 1.0 {
                    // kq: flat then rising; (k+1/2)q: rising then flat
                    if j % 2.0 == 0.0 {
                        (0.0, *height)
                    } else {
                        (*height, 0.0)
                    }
                } else {
                    let k = (u / gap).floor();
                    let r = u - k * gap;
                    let s = if r < half { *height } else { 0.0 };
                    (s, s)
                };
                if x > 0.0 {
                    (inner, outer)
                } else {
                    (-outer, -inner)
                }
            }
            Shape::Nearest { levels } => {
                let first = levels[0];
                let last = levels[levels.len() - 1];
                if x < first {
                    return (-1.0, -1.0);
                }
                if x > last {
                    return (1.0, 1.0);
                }
                let i = levels.partition_point(|&q| q <= x) - 1;
                if x == levels[i] {
                    return (-1.0, 1.0);
                }
                let mid = 0.5 * (levels[i] + levels[i + 1]);
                if x < mid {
                    (1.0, 1.0)
                } else if x > mid {
                    (-1.0, -1.0)
                } else {
                    (1.0, -1.0)
                }
            }
        }
    }

    /// Clarke subdifferential: convex hull of the one-sided slopes.
    pub fn subdifferential(&self, x: f64) -> SubgradInterval {
        let (l, r) = self.one_sided(x);
        if l == r {
            SubgradInterval::point(l)
        } else {
            SubgradInterval::hull(l, r)
        }
    }

    /// Nearest member of the quantization set; ties go to the smaller
    /// magnitude, then to the smaller value.
    pub fn nearest_level(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Table { levels, .. } => {
                let u = x.abs();
                let i = levels.partition_point(|&q| q <= u);
                let q = if i == 0 {
                    levels[0]
                } else if i == levels.len() {
                    levels[i - 1]
                } else {
                    let (lo, hi) = (levels[i - 1], levels[i]);
                    if u - lo <= hi - u {
                        lo
                    } else {
                        hi
                    }
                };
                q.copysign(x)
            }
            Shape::Staircase { gap, .. } => {
                let u = x.abs();
                round_half_toward_zero(u / gap) * gap * x.signum()
            }
            Shape::Nearest { levels } => {
                let i = levels.partition_point(|&q| q <= x);
                if i == 0 {
                    return levels[0];
                }
                if i == levels.len() {
                    return levels[i - 1];
                }
                let (lo, hi) = (levels[i - 1], levels[i]);
                let (dl, dh) = (x - lo, hi - x);
                if dl < dh {
                    lo
                } else if dh < dl {
                    hi
                } else if lo.abs() < hi.abs() {
                    lo
                } else if hi.abs() < lo.abs() {
                    hi
                } else {
                    lo
                }
            }
        }
    }

    /// Whether `x` is exactly a member of the quantization set.
    pub fn is_level(&self, x: f64) -> bool {
        self.nearest_level(x) == x
    }

    /// Nearest kink of psi (quantization levels plus the interior kinks of
    /// the staircase and tent families).
    pub fn nearest_kink(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Table { levels, slopes, .. } => {
                let kinks = &levels[..slopes.len()];
                let u = x.abs();
                let i = kinks.partition_point(|&q| q <= u);
                let q = if i == 0 {
                    kinks[0]
                } else if i == kinks.len() {
                    kinks[i - 1]
                } else if u - kinks[i - 1] <= kinks[i] - u {
                    kinks[i - 1]
                } else {
                    kinks[i]
                };
                q.copysign(x)
            }
            Shape::Staircase { gap, .. } => {
                let half = gap / 2.0;
                round_half_toward_zero(x.abs() / half) * half * x.signum()
            }
            Shape::Nearest { levels } => {
                let mut best = levels[0];
                let mut consider = |k: f64| {
                    if (x - k).abs() < (x - best).abs() {
                        best = k;
                    }
                };
                let i = levels.partition_point(|&q| q <= x);
                for j in i.saturating_sub(1)..(i + 1).min(levels.len()) {
                    consider(levels[j]);
                    if j + 1 < levels.len() {
                        consider(0.5 * (levels[j] + levels[j + 1]));
                    }
                }
                best
            }
        }
    }

    /// Fraction of coordinates within `tol` of the quantization set.
    pub fn quantization_rate(&self, x: &[f64], tol: f64) -> QuantizationReport {
        let quantized_mask: Vec<bool> = x
            .iter()
            .map(|&xi| (xi - self.nearest_level(xi)).abs() <= tol)
            .collect();
        let hits = quantized_mask.iter().filter(|&&m| m).count();
        let rate = if x.is_empty() {
            1.0
        } else {
            hits as f64 / x.len() as f64
        };
        QuantizationReport {
            rate,
            quantized_mask,
            tolerance: tol,
        }
    }

    /// Hard projection onto the quantization set, coordinate-wise.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&xi| self.nearest_level(xi)).collect()
    }

    /// Affine pieces of psi covering `[lo, hi]` (intersected with the domain),
    /// ordered left to right.
    pub fn pieces(&self, lo: f64, hi: f64) -> Vec<Piece> {
        let mut out = Vec::new();
        if lo > hi {
            return out;
        }
        let mut push = |a: f64, b: f64, slope: f64, offset: f64| {
            let (a, b) = (a.max(lo), b.min(hi));
            if a <= b {
                out.push(Piece {
                    lo: a,
                    hi: b,
                    slope,
                    offset,
                });
            }
        };
        match &self.shape {
            Shape::Table {
                levels,
                slopes,
                intercepts,
            } => {
                let seg = |k: usize| -> Option<(f64, f64, f64, f64)> {
                    let a = slopes[k];
                    if a.is_infinite() {
                        return None;
                    }
                    let end = if k + 1 < slopes.len() {
                        levels[k + 1]
                    } else {
                        f64::INFINITY
                    };
                    Some((levels[k], end, a, intercepts[k] - a * levels[k]))
                };
                // negative side, from far left to 0
                if lo < 0.0 {
                    let k_far = Self::table_segment(levels, slopes, (-lo).max(0.0));
                    let k_near = Self::table_segment(levels, slopes, (-hi).max(0.0));
                    for k in (k_near..=k_far).rev() {
                        if let Some((s, e, a, off)) = seg(k) {
                            push(-e, -s, -a, off);
                        }
                    }
                }
                if hi > 0.0 {
                    let k_near = Self::table_segment(levels, slopes, lo.max(0.0));
                    let k_far = Self::table_segment(levels, slopes, hi);
                    for k in k_near..=k_far {
                        if let Some((s, e, a, off)) = seg(k) {
                            push(s, e, a, off);
                        }
                    }
                }
            }
            Shape::Staircase { gap, height } => {
                let half = gap / 2.0;
                let piece = |j: i64| -> (f64, f64, f64, f64) {
                    let k = (j / 2) as f64;
                    let (s, e) = (j as f64 * half, (j + 1) as f64 * half);
                    if j % 2 == 0 {
                        (s, e, *height, -height * k * gap / 2.0)
                    } else {
                        (s, e, 0.0, height * (k + 1.0) * gap / 2.0)
                    }
                };
                if lo < 0.0 {
                    let j_far = ((-lo) / half).floor() as i64;
                    let j_near = ((-hi).max(0.0) / half).floor() as i64;
                    for j in (j_near.max(1) - 1..=j_far).rev() {
                        let (s, e, a, off) = piece(j);
                        push(-e, -s, -a, off);
                    }
                }
                if hi > 0.0 {
                    let j_near = (lo.max(0.0) / half).floor() as i64;
                    let j_far = (hi / half).floor() as i64;
                    for j in j_near.max(1) - 1..=j_far {
                        let (s, e, a, off) = piece(j);
                        push(s, e, a, off);
                    }
                }
            }
            Shape::Nearest { levels } => {
                let first = levels[0];
                let last = levels[levels.len() - 1];
                push(f64::NEG_INFINITY, first, -1.0, first);
                for w in levels.windows(2) {
                    if w[1] < lo || w[0] > hi {
                        continue;
                    }
                    let mid = 0.5 * (w[0] + w[1]);
                    push(w[0], mid, 1.0, -w[0]);
                    push(mid, w[1], -1.0, w[1]);
                }
                push(last, f64::INFINITY, 1.0, -last);
            }
        }
        out
    }

    /// Serializable record; intercepts are always recomputed on load.
    pub fn to_config(&self) -> ParConfig {
        match &self.shape {
            Shape::Table { levels, slopes, .. } => ParConfig {
                family: self.family,
                levels: levels.clone(),
                slopes: slopes.clone(),
                gap: None,
                height: None,
            },
            Shape::Staircase { gap, height } => ParConfig {
                family: self.family,
                levels: Vec::new(),
                slopes: Vec::new(),
                gap: Some(*gap),
                height: if *height == 1.0 { None } else { Some(*height) },
            },
            Shape::Nearest { levels } => ParConfig {
                family: self.family,
                levels: levels.clone(),
                slopes: Vec::new(),
                gap: None,
                height: None,
            },
        }
    }
}

/// Round to nearest integer, halves toward zero.
pub fn round_half_toward_zero(v: f64) -> f64 {
    let r = v.round();
    if (r - v).abs() == 0.5 {
        v.trunc()
    } else {
        r
    }
}

/// Plain config record of a PAR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParConfig {
    pub family: Family,
    #[serde(default)]
    pub levels: Vec<f64>,
    #[serde(default, with = "slope_list")]
    pub slopes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
}

impl ParConfig {
    pub fn build(&self) -> Result<ParSpec> {
        if self.family == Family::QuasiconvexUniform {
            let height = self.height.unwrap_or(1.0);
            return match (self.gap, self.levels.is_empty()) {
                (Some(gap), true) => ParSpec::quasiconvex_uniform(gap, height),
                (gap, false) => {
                    let par = build_par(&self.levels, &self.slopes, self.family)?;
                    if let Some(g) = gap {
                        if (par.gap().unwrap() - g).abs() > 1e-12 * g {
                            return Err(ParoError::InvalidPar(format!(
                                "gap {g} disagrees with the kink spacing"
                            )));
                        }
                    }
                    Ok(par)
                }
                (None, true) => Err(ParoError::InvalidPar(
                    "quasiconvex-uniform requires `gap`".into(),
                )),
            };
        }
        build_par(&self.levels, &self.slopes, self.family)
    }
}

/// Slopes serialize as numbers, with `"inf"` for the infinite final slope.
mod slope_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Slope {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let items: Vec<Slope> = v
            .iter()
            .map(|&a| {
                if a == f64::INFINITY {
                    Slope::Text("inf".into())
                } else {
                    Slope::Num(a)
                }
            })
            .collect();
        items.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let items = Vec::<Slope>::deserialize(d)?;
        items
            .into_iter()
            .map(|s| match s {
                Slope::Num(a) => Ok(a),
                Slope::Text(t) if matches!(t.as_str(), "inf" | "+inf" | "infinity") => {
                    Ok(f64::INFINITY)
                }
                Slope::Text(t) => Err(serde::de::Error::custom(format!("bad slope `{t}`"))),
            })
            .collect()
    }
}

/// Classical penalties approximated by PARs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicTarget {
    /// `x^2 / 2`
    Square,
    /// `|x|`
    Abs,
    /// `sqrt(|x|)`
    Sqrt,
}

impl ClassicTarget {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            ClassicTarget::Square => 0.5 * x * x,
            ClassicTarget::Abs => x.abs(),
            ClassicTarget::Sqrt => x.abs().sqrt(),
        }
    }
}

/// PAR approximation of a classical penalty on the grid `gap * Z`.
///
/// * `Square`: chords of `x^2/2` through `kq` (slopes `(k + 1/2) q`), convex,
///   with an infinite slope past the last level.
/// * `Abs`: staircase of height 2, equal to `|x|` at every `kq` and above it in
///   between (secants of `|x|` itself would all have slope 1 and no kinks).
/// * `Sqrt`: secants of `sqrt(|x|)` through `kq`, concave, last secant extended.
///
/// `max_level` is floor-rounded to a multiple of `gap`; `Abs` is unbounded.
pub fn par_approx_classic(target: ClassicTarget, gap: f64, max_level: f64) -> Result<ParSpec> {
    if !(gap.is_finite() && gap > 0.0) {
        return Err(ParoError::InvalidPar(format!("gap must be positive, found {gap}")));
    }
    if !(max_level >= gap) {
        return Err(ParoError::InvalidPar(format!(
            "max_level {max_level} must be at least the gap {gap}"
        )));
    }
    let m = (max_level / gap + 1e-9).floor() as usize;
    let levels: Vec<f64> = (0..=m).map(|k| k as f64 * gap).collect();
    match target {
        ClassicTarget::Square => {
            let mut slopes: Vec<f64> = (0..m).map(|k| (k as f64 + 0.5) * gap).collect();
            slopes.push(f64::INFINITY);
            build_par(&levels, &slopes, Family::Convex)
        }
        ClassicTarget::Abs => ParSpec::quasiconvex_uniform(gap, 2.0),
        ClassicTarget::Sqrt => {
            let slopes: Vec<f64> = (0..=m)
                .map(|k| {
                    let (a, b) = (k as f64 * gap, (k + 1) as f64 * gap);
                    (b.sqrt() - a.sqrt()) / gap
                })
                .collect();
            build_par(&levels, &slopes, Family::General)
        }
    }
}

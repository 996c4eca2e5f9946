//! Empirical lift expectations.
//!
//! For a weighted sample of bodies and a direction `u`, the support function
//! of the lift expectation at `(u0, u)` is the stop-loss transform
//! `L(u0) = sum_i w_i (u0 + h_i(u))_+`. Everything here reduces to sorting
//! the per-direction support values and taking partial sums.

use std::cmp::Ordering;

use crate::bodies::{ConvexBody, Vector};
use crate::error::{Error, Result};
use crate::scalar::{pos, Scalar};

/// Absolute tolerance on `|sum(weights) - 1|`.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;
/// Cross-product tolerance when merging collinear polygon vertices.
pub const COLLINEAR_TOL: f64 = 1e-12;

/// Weighted finite sample of convex bodies sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BodySample<T> {
    bodies: Vec<ConvexBody<T>>,
    weights: Vec<T>,
    dim: usize,
}

impl<T: Scalar> BodySample<T> {
    pub fn new(bodies: Vec<ConvexBody<T>>, weights: Vec<T>) -> Result<Self> {
        if bodies.is_empty() {
            return Err(Error::InvalidWeights("empty sample".into()));
        }
        if bodies.len() != weights.len() {
            return Err(Error::InvalidWeights(format!(
                "{} bodies but {} weights",
                bodies.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= T::zero()) {
            return Err(Error::InvalidWeights("weights must be positive".into()));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::lit(WEIGHT_SUM_TOL) {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        let dim = bodies[0].validate()?;
        for b in &bodies[1..] {
            let d = b.validate()?;
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
        }
        Ok(BodySample {
            bodies,
            weights,
            dim,
        })
    }

    /// Equal weights `1/n`.
    pub fn uniform(bodies: Vec<ConvexBody<T>>) -> Result<Self> {
        let n = T::from_usize(bodies.len()).unwrap_or_else(T::one);
        let weights = vec![T::one() / n; bodies.len()];
        Self::new(bodies, weights)
    }

    /// Rescales arbitrary positive weights (e.g. frequencies) to sum to one.
    pub fn normalized(bodies: Vec<ConvexBody<T>>, raw: Vec<T>) -> Result<Self> {
        if raw.iter().any(|w| !w.is_finite() || *w <= T::zero()) {
            return Err(Error::InvalidWeights("weights must be positive".into()));
        }
        let total: T = raw.iter().copied().sum();
        Self::new(bodies, raw.into_iter().map(|w| w / total).collect())
    }

    /// Deterministic body: a single atom with weight one.
    pub fn deterministic(body: ConvexBody<T>) -> Result<Self> {
        Self::new(vec![body], vec![T::one()])
    }

    /// One-dimensional interval sample from `(lo, hi)` pairs.
    pub fn intervals(pairs: &[(T, T)], weights: Vec<T>) -> Result<Self> {
        let bodies = pairs
            .iter()
            .map(|&(lo, hi)| ConvexBody::interval(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Self::new(bodies, weights)
    }

    /// One-dimensional sample of points with equal weights.
    pub fn points_1d(xs: &[T]) -> Result<Self> {
        Self::uniform(
            xs.iter()
                .map(|&x| ConvexBody::Singleton(Vector::scalar(x)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bodies(&self) -> &[ConvexBody<T>] {
        &self.bodies
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ConvexBody<T>, T)> {
        self.bodies.iter().zip(self.weights.iter().copied())
    }

    /// `support(body_i, u)` for every atom, in index order.
    pub fn support_values(&self, u: &Vector<T>) -> Result<Vec<T>> {
        u.check_dim(self.dim)?;
        Ok(self
            .bodies
            .iter()
            .map(|b| b.support_unchecked(u.coords()))
            .collect())
    }

    /// `(lo, hi)` endpoints of a one-dimensional sample.
    pub fn interval_endpoints(&self) -> Result<Vec<(T, T)>> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: self.dim,
            });
        }
        self.bodies
            .iter()
            .enumerate()
            .map(|(index, b)| match b {
                ConvexBody::Interval { lo, hi } => Ok((*lo, *hi)),
                ConvexBody::Singleton(p) => Ok((p[0], p[0])),
                ConvexBody::Segment(a, b) => Ok((a[0].min(b[0]), a[0].max(b[0]))),
                _ => Err(Error::NotInterval { index }),
            })
            .collect()
    }
}

/// Exact piecewise-linear stop-loss transform `t -> E(t + h_X(u))_+`.
///
/// Stored canonically: support values sorted in decreasing order with
/// duplicates merged, so breakpoints `-h` increase.
#[derive(Debug, Clone, PartialEq)]
pub struct StopLossCurve<T> {
    breakpoints: Vec<T>,
    masses: Vec<T>,
    slopes: Vec<T>,
    mean: T,
}

impl<T: Scalar> StopLossCurve<T> {
    /// Builds the curve from `(support value, weight)` atoms.
    pub fn from_atoms(mut atoms: Vec<(T, T)>) -> Self {
        // decreasing value, then increasing weight: independent of input order
        atoms.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
        });
        let mut values: Vec<T> = Vec::with_capacity(atoms.len());
        let mut masses: Vec<T> = Vec::with_capacity(atoms.len());
        for (h, w) in atoms {
            match values.last() {
                Some(&last) if last == h => *masses.last_mut().unwrap() += w,
                _ => {
                    values.push(h);
                    masses.push(w);
                }
            }
        }
        let mut slopes = Vec::with_capacity(masses.len());
        let mut acc = T::zero();
        for &m in &masses {
            acc += m;
            slopes.push(acc.min(T::one()));
        }
        if let Some(last) = slopes.last_mut() {
            *last = T::one();
        }
        let mean = values
            .iter()
            .zip(&masses)
            .fold(T::zero(), |s, (&h, &m)| s + m * h);
        StopLossCurve {
            breakpoints: values.into_iter().map(|h| -h).collect(),
            masses,
            slopes,
            mean,
        }
    }

    /// Increasing breakpoints `-h`.
    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    /// Probability mass at each breakpoint.
    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    /// Slope of `L` immediately to the right of each breakpoint.
    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }

    /// `E h_X(u)`.
    pub fn mean(&self) -> T {
        self.mean
    }

    /// Canonical `(support value, mass)` pairs, values decreasing.
    pub fn atoms(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.breakpoints
            .iter()
            .zip(&self.masses)
            .map(|(&b, &m)| (-b, m))
    }

    /// `L(t)`. Exactly zero left of the first breakpoint and exactly
    /// `t + mean` right of the last one.
    pub fn eval(&self, t: T) -> T {
        let first = self.breakpoints[0];
        let last = *self.breakpoints.last().unwrap();
        if t <= first {
            return T::zero();
        }
        if t >= last {
            return t + self.mean;
        }
        self.breakpoints
            .iter()
            .zip(&self.masses)
            .take_while(|(&b, _)| b < t)
            .fold(T::zero(), |acc, (&b, &m)| acc + m * (t - b))
    }

    /// `min_t L(t) - alpha t`, by scanning slopes. Equals `alpha` times the
    /// average of the largest `alpha`-mass of support values.
    pub fn infimal_section(&self, alpha: T) -> T {
        let mut below = T::zero();
        let mut acc = T::zero();
        for (k, (h, m)) in self.atoms().enumerate() {
            if self.slopes[k] >= alpha {
                return acc + (alpha - below) * h;
            }
            acc += m * h;
            below = self.slopes[k];
        }
        acc
    }
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(())
}

pub fn stop_loss_curve<T: Scalar>(sample: &BodySample<T>, u: &Vector<T>) -> Result<StopLossCurve<T>> {
    let values = sample.support_values(u)?;
    Ok(StopLossCurve::from_atoms(
        values.into_iter().zip(sample.weights.iter().copied()).collect(),
    ))
}

/// Support function of the lift expectation at `(u0, u)`.
pub fn lift_support<T: Scalar>(sample: &BodySample<T>, u0: T, u: &Vector<T>) -> Result<T> {
    if !u0.is_finite() {
        return Err(Error::NonFinite("u0"));
    }
    Ok(stop_loss_curve(sample, u)?.eval(u0))
}

/// Support function of the selection expectation `E X`.
pub fn expectation_support<T: Scalar>(sample: &BodySample<T>, u: &Vector<T>) -> Result<T> {
    Ok(sample
        .support_values(u)?
        .into_iter()
        .zip(&sample.weights)
        .fold(T::zero(), |acc, (h, &w)| acc + w * h))
}

/// Support function of the section `{x : (alpha, x) in lift expectation}`.
pub fn slice_support<T: Scalar>(sample: &BodySample<T>, alpha: T, u: &Vector<T>) -> Result<T> {
    check_alpha(alpha)?;
    Ok(stop_loss_curve(sample, u)?.infimal_section(alpha))
}

/// Support function of the zonoid-trimmed region at level `alpha`.
pub fn trimmed_region_support<T: Scalar>(
    sample: &BodySample<T>,
    alpha: T,
    u: &Vector<T>,
) -> Result<T> {
    Ok(slice_support(sample, alpha, u)? / alpha)
}

/// Index of the first direction in which `candidate` sticks out of the
/// trimmed region by more than `tol`.
pub fn outlier_witness<T: Scalar>(
    sample: &BodySample<T>,
    alpha: T,
    candidate: &ConvexBody<T>,
    directions: &[Vector<T>],
    tol: T,
) -> Result<Option<usize>> {
    check_alpha(alpha)?;
    if directions.is_empty() {
        return Err(Error::InvalidParameter("empty direction list".into()));
    }
    let cdim = candidate.validate()?;
    if cdim != sample.dim {
        return Err(Error::DimensionMismatch {
            expected: sample.dim,
            found: cdim,
        });
    }
    for (k, u) in directions.iter().enumerate() {
        let region = trimmed_region_support(sample, alpha, u)?;
        if candidate.support_unchecked(u.coords()) > region + tol {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Whether `candidate` is not contained in the trimmed region, as witnessed
/// on the direction grid.
pub fn is_outlier<T: Scalar>(
    sample: &BodySample<T>,
    alpha: T,
    candidate: &ConvexBody<T>,
    directions: &[Vector<T>],
    tol: T,
) -> Result<bool> {
    Ok(outlier_witness(sample, alpha, candidate, directions, tol)?.is_some())
}

/// Planar convex polygon, counterclockwise, closed implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2D<T> {
    vertices: Vec<(T, T)>,
}

impl<T: Scalar> Polygon2D<T> {
    pub fn new(vertices: Vec<(T, T)>) -> Self {
        Polygon2D { vertices }
    }

    pub fn vertices(&self) -> &[(T, T)] {
        &self.vertices
    }

    pub fn support(&self, a: T, b: T) -> T {
        self.vertices
            .iter()
            .map(|&(x, y)| x * a + y * b)
            .fold(T::neg_infinity(), T::max)
    }

    /// Signed shoelace area (positive for counterclockwise order).
    pub fn area(&self) -> T {
        let n = self.vertices.len();
        if n < 3 {
            return T::zero();
        }
        let twice = (0..n).fold(T::zero(), |acc, i| {
            let (x0, y0) = self.vertices[i];
            let (x1, y1) = self.vertices[(i + 1) % n];
            acc + (x0 * y1 - x1 * y0)
        });
        twice / T::lit(2.0)
    }

    /// All turns are left turns up to `tol`.
    pub fn is_convex(&self, tol: T) -> bool {
        let n = self.vertices.len();
        n < 3
            || (0..n).all(|i| {
                cross(
                    self.vertices[i],
                    self.vertices[(i + 1) % n],
                    self.vertices[(i + 2) % n],
                ) >= -tol
            })
    }

    /// Outward normals of the edges, useful as test directions.
    pub fn edge_normals(&self) -> Vec<(T, T)> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let (x0, y0) = self.vertices[i];
                let (x1, y1) = self.vertices[(i + 1) % n];
                (y1 - y0, x0 - x1)
            })
            .collect()
    }
}

fn cross<T: Scalar>(a: (T, T), b: (T, T), c: (T, T)) -> T {
    (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0)
}

/// Drops vertices that do not turn left by more than `tol`, until stable.
fn merge_collinear<T: Scalar>(mut pts: Vec<(T, T)>, tol: T) -> Vec<(T, T)> {
    loop {
        let n = pts.len();
        if n < 3 {
            pts.dedup();
            return pts;
        }
        // vertex 0 is the origin anchor and is never removed
        let drop = (1..n).find(|&i| cross(pts[i - 1], pts[i], pts[(i + 1) % n]) <= tol);
        match drop {
            Some(i) => {
                pts.remove(i);
            }
            None => return pts,
        }
    }
}

/// Lift expectation of a one-dimensional interval sample as a polygon:
/// lower Lorenz chain of the left endpoints, then the upper chain of the
/// right endpoints back to the origin.
pub fn polygon_1d<T: Scalar>(sample: &BodySample<T>) -> Result<Polygon2D<T>> {
    let ends = sample.interval_endpoints()?;
    let mut lower: Vec<(T, T)> = ends
        .iter()
        .zip(&sample.weights)
        .map(|(&(lo, _), &w)| (lo, w))
        .collect();
    let mut upper: Vec<(T, T)> = ends
        .iter()
        .zip(&sample.weights)
        .map(|(&(_, hi), &w)| (hi, w))
        .collect();
    lower.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    upper.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));

    let chain = |atoms: &[(T, T)]| {
        let mut out = Vec::with_capacity(atoms.len());
        let (mut x, mut y) = (T::zero(), T::zero());
        for &(v, w) in atoms {
            x += w;
            y += w * v;
            out.push((x, y));
        }
        out
    };
    let mut pts = vec![(T::zero(), T::zero())];
    pts.extend(chain(&lower));
    pts.extend(chain(&upper).into_iter().rev());
    Ok(Polygon2D::new(merge_collinear(pts, T::lit(COLLINEAR_TOL))))
}

/// Rescaled `alpha`-section `[lower, upper]` of a one-dimensional interval
/// sample: lower is the average of the smallest `alpha`-mass of left
/// endpoints, upper the average of the largest `alpha`-mass of right ones.
pub fn avar_interval<T: Scalar>(sample: &BodySample<T>, alpha: T) -> Result<(T, T)> {
    check_alpha(alpha)?;
    sample.interval_endpoints()?;
    let up = trimmed_region_support(sample, alpha, &Vector::scalar(T::one()))?;
    let down = trimmed_region_support(sample, alpha, &Vector::scalar(-T::one()))?;
    Ok((-down, up))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GiniArea<T> {
    /// Area of the lift expectation polygon.
    pub area: T,
    /// `2 * area`; equals the Gini mean difference `E|x - x'|` for point samples.
    pub gmd_upper: T,
}

pub fn gini_area<T: Scalar>(sample: &BodySample<T>) -> Result<GiniArea<T>> {
    let area = polygon_1d(sample)?.area();
    Ok(GiniArea {
        area,
        gmd_upper: area * T::lit(2.0),
    })
}

/// `E max(h_1(u), ..., h_n(u))` over `n` i.i.d. copies: the support
/// function of `E conv(X_1, ..., X_n)`.
pub fn hoeffding_support<T: Scalar>(sample: &BodySample<T>, n: u32, u: &Vector<T>) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let exp = i32::try_from(n).map_err(|_| Error::InvalidParameter("n too large".into()))?;
    let curve = stop_loss_curve(sample, u)?;
    // ascending values with their CDF
    let atoms: Vec<(T, T)> = curve.atoms().collect();
    let mut cdf = T::one();
    let mut total = T::zero();
    for (k, &(v, m)) in atoms.iter().enumerate() {
        let below = if k + 1 == atoms.len() {
            T::zero()
        } else {
            pos(cdf - m)
        };
        total += v * (cdf.powi(exp) - below.powi(exp));
        cdf = below;
    }
    Ok(total)
}

//! Tuple lifts, zonoids and lift zonoids.
//!
//! A coupled tuple `(X_1, ..., X_n)` lifts to a body in `R^{nd+1}` with
//! support `E(u0 + h_{X_1}(u_1) + ... + h_{X_n}(u_n))_+`. Only that support
//! function is exposed; the bodies themselves are never built.

use crate::bodies::{dot, ConvexBody, Vector};
use crate::error::{Error, Result};
use crate::lift::{BodySample, StopLossCurve, WEIGHT_SUM_TOL};
use crate::scalar::{pos, Scalar};

/// Slack allowed when checking that bodies contain the origin.
pub const ORIGIN_TOL: f64 = 1e-12;
/// Tuple lift values further apart than this distinguish two samples.
pub const DISTINGUISH_TOL: f64 = 1e-9;

fn check_weights<T: Scalar>(weights: &[T], expected: usize) -> Result<()> {
    if weights.len() != expected {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {expected} observations",
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
    Ok(())
}

/// Weighted observations of an n-tuple of bodies, coupled within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledTupleSample<T> {
    observations: Vec<Vec<ConvexBody<T>>>,
    weights: Vec<T>,
    slot_dims: Vec<usize>,
}

impl<T: Scalar> CoupledTupleSample<T> {
    pub fn new(observations: Vec<Vec<ConvexBody<T>>>, weights: Vec<T>) -> Result<Self> {
        let first = observations
            .first()
            .ok_or_else(|| Error::InvalidWeights("empty tuple sample".into()))?;
        if first.is_empty() {
            return Err(Error::InvalidParameter("tuples need at least one slot".into()));
        }
        let slot_dims = first
            .iter()
            .map(|b| b.validate())
            .collect::<Result<Vec<_>>>()?;
        for (i, row) in observations.iter().enumerate() {
            if row.len() != slot_dims.len() {
                return Err(Error::InvalidParameter(format!(
                    "observation {i} has {} slots, expected {}",
                    row.len(),
                    slot_dims.len()
                )));
            }
            for (b, &d) in row.iter().zip(&slot_dims) {
                let found = b.validate()?;
                if found != d {
                    return Err(Error::DimensionMismatch { expected: d, found });
                }
            }
        }
        check_weights(&weights, observations.len())?;
        Ok(CoupledTupleSample {
            observations,
            weights,
            slot_dims,
        })
    }

    /// Weights rescaled to sum to one.
    pub fn normalized(observations: Vec<Vec<ConvexBody<T>>>, raw: Vec<T>) -> Result<Self> {
        let total: T = raw.iter().copied().sum();
        if !total.is_finite() || total <= T::zero() {
            return Err(Error::InvalidWeights("weights must have positive finite sum".into()));
        }
        Self::new(observations, raw.into_iter().map(|w| w / total).collect())
    }

    /// `(X, ..., X)` with `n` copies of each realization.
    pub fn self_tuple(sample: &BodySample<T>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("tuple length must be positive".into()));
        }
        let observations = sample.bodies().iter().map(|b| vec![b.clone(); n]).collect();
        Self::new(observations, sample.weights().to_vec())
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Number of slots `n`.
    pub fn arity(&self) -> usize {
        self.slot_dims.len()
    }

    pub fn slot_dims(&self) -> &[usize] {
        &self.slot_dims
    }

    pub fn observations(&self) -> &[Vec<ConvexBody<T>>] {
        &self.observations
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// The law of slot `j` alone.
    pub fn slot_marginal(&self, j: usize) -> Result<BodySample<T>> {
        if j >= self.arity() {
            return Err(Error::InvalidParameter(format!("no slot {j}")));
        }
        BodySample::new(
            self.observations.iter().map(|row| row[j].clone()).collect(),
            self.weights.clone(),
        )
    }
}

/// `sum_i w_i (u0 + sum_j h_{X_ij}(u_j))_+`.
pub fn tuple_lift_support<T: Scalar>(
    sample: &CoupledTupleSample<T>,
    u0: T,
    us: &[Vector<T>],
) -> Result<T> {
    if !u0.is_finite() {
        return Err(Error::NonFinite("u0"));
    }
    if us.len() != sample.arity() {
        return Err(Error::InvalidParameter(format!(
            "{} slot directions for a {}-tuple",
            us.len(),
            sample.arity()
        )));
    }
    for (u, &d) in us.iter().zip(sample.slot_dims()) {
        u.check_dim(d)?;
    }
    // Through the canonical curve of the summed supports, so that zero
    // directions in all but one slot reproduce `lift_support` bit for bit.
    let atoms = sample
        .observations
        .iter()
        .zip(&sample.weights)
        .map(|(row, &w)| {
            let h = row
                .iter()
                .zip(us)
                .fold(T::zero(), |acc, (b, u)| acc + b.support_unchecked(u.coords()));
            (h, w)
        })
        .collect();
    Ok(StopLossCurve::from_atoms(atoms).eval(u0))
}

/// Weighted points, the law of a random vector.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSample<T> {
    points: Vec<Vector<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> VectorSample<T> {
    pub fn new(points: Vec<Vector<T>>, weights: Vec<T>) -> Result<Self> {
        let dim = points
            .first()
            .ok_or_else(|| Error::InvalidWeights("empty vector sample".into()))?
            .dim();
        for p in &points {
            p.check_dim(dim)?;
        }
        check_weights(&weights, points.len())?;
        Ok(VectorSample { points, weights })
    }

    pub fn uniform(points: Vec<Vector<T>>) -> Result<Self> {
        let w = T::one() / T::from_usize(points.len().max(1)).expect("count fits");
        let n = points.len();
        Self::new(points, vec![w; n])
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// Support of the zonoid `E[0, xi]`: `sum_i w_i <x_i, u>_+`.
pub fn zonoid_support<T: Scalar>(sample: &VectorSample<T>, u: &Vector<T>) -> Result<T> {
    lift_zonoid_support(sample, T::zero(), u)
}

/// Support of the lift zonoid: `sum_i w_i (u0 + <x_i, u>)_+`.
pub fn lift_zonoid_support<T: Scalar>(sample: &VectorSample<T>, u0: T, u: &Vector<T>) -> Result<T> {
    if !u0.is_finite() {
        return Err(Error::NonFinite("u0"));
    }
    u.check_dim(sample.dim())?;
    Ok(sample
        .points
        .iter()
        .zip(&sample.weights)
        .map(|(x, &w)| w * pos(u0 + dot(x.coords(), u.coords())))
        .sum())
}

/// Product grid for tuple lifts: every `u0` combined with every choice of
/// one direction per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleGrid<T> {
    pub u0s: Vec<T>,
    pub directions: Vec<Vector<T>>,
}

impl<T: Scalar> TupleGrid<T> {
    /// One-dimensional grid: `count_u0` offsets evenly spread over
    /// `[u0_lo, u0_hi]` and `count_dirs` slot directions evenly spread over
    /// `[-1, 1]`.
    pub fn linear_1d(u0_lo: T, u0_hi: T, count_u0: usize, count_dirs: usize) -> Result<Self> {
        if count_u0 == 0 || count_dirs == 0 || !u0_lo.is_finite() || !u0_hi.is_finite() || u0_lo > u0_hi {
            return Err(Error::InvalidParameter("empty tuple grid".into()));
        }
        Ok(TupleGrid {
            u0s: linspace(u0_lo, u0_hi, count_u0),
            directions: linspace(-T::one(), T::one(), count_dirs)
                .into_iter()
                .map(Vector::scalar)
                .collect(),
        })
    }

    /// Number of grid points for `n` slots.
    pub fn size(&self, n: usize) -> usize {
        self.u0s.len() * self.directions.len().pow(n as u32)
    }
}

fn linspace<T: Scalar>(lo: T, hi: T, count: usize) -> Vec<T> {
    if count == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / T::from_usize(count - 1).expect("count fits");
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + step * T::from_usize(i).expect("index fits")
            }
        })
        .collect()
}

fn check_origin<T: Scalar>(sample: &BodySample<T>, table: &[Vec<T>]) -> Result<()> {
    let slack = T::lit(ORIGIN_TOL);
    for (index, row) in table.iter().enumerate() {
        if let Some((direction, &value)) = row.iter().enumerate().find(|(_, v)| **v < -slack) {
            return Err(Error::OriginNotContained {
                index,
                direction,
                value: value.as_f64(),
            });
        }
    }
    debug_assert_eq!(table.len(), sample.len());
    Ok(())
}

/// First grid point `(u0, direction indices)` where the self-tuples
/// `(a, ..., a)` and `(b, ..., b)` have tuple lift supports more than
/// [`DISTINGUISH_TOL`] apart.
///
/// Every body must contain the origin, which is checked as nonnegative
/// support on all grid directions.
pub fn self_tuple_witness<T: Scalar>(
    a: &BodySample<T>,
    b: &BodySample<T>,
    n: usize,
    grid: &TupleGrid<T>,
) -> Result<Option<(T, Vec<usize>)>> {
    if n == 0 {
        return Err(Error::InvalidParameter("tuple length must be positive".into()));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let table = |s: &BodySample<T>| -> Result<Vec<Vec<T>>> {
        s.bodies()
            .iter()
            .map(|body| {
                grid.directions
                    .iter()
                    .map(|u| body.support(u))
                    .collect::<Result<Vec<_>>>()
            })
            .collect()
    };
    let ta = table(a)?;
    let tb = table(b)?;
    check_origin(a, &ta)?;
    check_origin(b, &tb)?;

    let m = grid.directions.len();
    let tol = T::lit(DISTINGUISH_TOL);
    let mut idx = vec![0usize; n];
    let mut sums_a = vec![T::zero(); ta.len()];
    let mut sums_b = vec![T::zero(); tb.len()];
    loop {
        for (s, row) in sums_a.iter_mut().zip(&ta) {
            *s = idx.iter().map(|&k| row[k]).sum();
        }
        for (s, row) in sums_b.iter_mut().zip(&tb) {
            *s = idx.iter().map(|&k| row[k]).sum();
        }
        for &u0 in &grid.u0s {
            let va: T = sums_a
                .iter()
                .zip(a.weights())
                .map(|(&s, &w)| w * pos(u0 + s))
                .sum();
            let vb: T = sums_b
                .iter()
                .zip(b.weights())
                .map(|(&s, &w)| w * pos(u0 + s))
                .sum();
            if (va - vb).abs() > tol {
                return Ok(Some((u0, idx)));
            }
        }
        // odometer over slot direction indices
        let mut slot = 0;
        loop {
            if slot == n {
                return Ok(None);
            }
            idx[slot] += 1;
            if idx[slot] < m {
                break;
            }
            idx[slot] = 0;
            slot += 1;
        }
    }
}

/// Whether the self-tuple lifts of order `n` differ somewhere on `grid`.
pub fn self_tuple_distinguishes<T: Scalar>(
    a: &BodySample<T>,
    b: &BodySample<T>,
    n: usize,
    grid: &TupleGrid<T>,
) -> Result<bool> {
    Ok(self_tuple_witness(a, b, n, grid)?.is_some())
}

/// Planar views of the self-pair lift of a random interval `[xi, eta]`.
///
/// Coordinates of the lift in `R^3` are numbered `0` (the lifting
/// coordinate), `1` and `2` (the two slots). The body's projection onto a
/// coordinate plane has the restriction of the support function to that
/// plane as its support function.
#[derive(Debug, Clone, PartialEq)]
pub struct CascosProjections<T> {
    pair: CoupledTupleSample<T>,
    endpoints: VectorSample<T>,
}

/// Builds the self pair `([xi, eta], [xi, eta])` and the vector sample
/// `(xi, eta)` of an interval sample.
pub fn cascos_projections<T: Scalar>(sample: &BodySample<T>) -> Result<CascosProjections<T>> {
    let ends = sample.interval_endpoints()?;
    let intervals = ends
        .iter()
        .map(|&(lo, hi)| ConvexBody::interval(lo, hi))
        .collect::<Result<Vec<_>>>()?;
    let pair = CoupledTupleSample::new(
        intervals.into_iter().map(|b| vec![b.clone(), b]).collect(),
        sample.weights().to_vec(),
    )?;
    let endpoints = VectorSample::new(
        ends.iter()
            .map(|&(lo, hi)| Vector::new(vec![lo, hi]))
            .collect::<Result<Vec<_>>>()?,
        sample.weights().to_vec(),
    )?;
    Ok(CascosProjections { pair, endpoints })
}

impl<T: Scalar> CascosProjections<T> {
    pub fn pair(&self) -> &CoupledTupleSample<T> {
        &self.pair
    }

    pub fn endpoints(&self) -> &VectorSample<T> {
        &self.endpoints
    }

    /// Support in `R^3` at `(w0, w1, w2)`.
    pub fn support(&self, w0: T, w1: T, w2: T) -> Result<T> {
        tuple_lift_support(&self.pair, w0, &[Vector::scalar(w1), Vector::scalar(w2)])
    }

    /// Support of the projection onto coordinates `plane = (i, j)`, `i < j`,
    /// at `(a, b)`.
    pub fn projection(&self, plane: (usize, usize), a: T, b: T) -> Result<T> {
        let mut w = [T::zero(); 3];
        match plane {
            (i, j) if i < j && j < 3 => {
                w[i] = a;
                w[j] = b;
            }
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "no coordinate plane {plane:?}"
                )))
            }
        }
        self.support(w[0], w[1], w[2])
    }

    /// Lift zonoid of `(xi, eta)` at `(u0, (u, v))`.
    pub fn lift_zonoid(&self, u0: T, u: T, v: T) -> Result<T> {
        lift_zonoid_support(&self.endpoints, u0, &Vector::new(vec![u, v])?)
    }

    /// Projection onto the slot plane minus the zonoid of `(xi, eta)` at
    /// `(u, v)`; never negative since `h_{[xi,eta]}(u) >= u xi` and
    /// `h_{[xi,eta]}(v) >= v eta`.
    pub fn gap(&self, u: T, v: T) -> Result<T> {
        Ok(self.projection((1, 2), u, v)? - self.lift_zonoid(T::zero(), u, v)?)
    }
}

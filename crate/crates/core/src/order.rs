//! Orderings of lift expectations.
//!
//! Inclusion of lift expectations is the increasing convex order of
//! `h_X(u)` in every direction. Per direction this is decided exactly by
//! comparing two piecewise-linear stop-loss curves at the union of their
//! breakpoints plus their asymptotes; across directions it is certified on a
//! deterministic [`DirectionGrid`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bodies::{ConvexBody, Vector};
use crate::error::{Error, Result};
use crate::lift::{lift_support, stop_loss_curve, BodySample, StopLossCurve};
use crate::scalar::Scalar;

/// Tolerance for the exact curve comparisons.
pub const EXACT_TOL: f64 = 1e-12;

/// How a [`DirectionGrid`] was generated.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// `{+1, -1}` in dimension one.
    Signs,
    /// `count` equally spaced angles on the circle, starting at angle 0.
    Angles(usize),
    /// `count` pseudo-uniform points on the unit sphere of `dim`.
    Seeded { dim: usize, count: usize, seed: u64 },
}

/// Deterministic finite set of nonzero directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrid<T> {
    spec: Option<GridSpec>,
    vectors: Vec<Vector<T>>,
}

impl<T: Scalar> DirectionGrid<T> {
    pub fn generate(spec: GridSpec) -> Result<Self> {
        let vectors = match &spec {
            GridSpec::Signs => vec![Vector::scalar(T::one()), Vector::scalar(-T::one())],
            GridSpec::Angles(count) => {
                if *count == 0 {
                    return Err(Error::InvalidParameter("empty angle grid".into()));
                }
                angle_path(*count)
            }
            GridSpec::Seeded { dim, count, seed } => {
                if *count == 0 || *dim == 0 {
                    return Err(Error::InvalidParameter("empty seeded grid".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut out = Vec::with_capacity(*count);
                while out.len() < *count {
                    let g: Vec<f64> = (0..*dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm < 1e-12 {
                        continue;
                    }
                    out.push(Vector::new(g.iter().map(|x| T::lit(x / norm)).collect())?);
                }
                out
            }
        };
        Ok(DirectionGrid {
            spec: Some(spec),
            vectors,
        })
    }

    /// The natural grid for a dimension: signs for `d = 1`, `count` angles
    /// for `d = 2`, seeded sphere points otherwise.
    pub fn for_dim(dim: usize, count: usize, seed: u64) -> Result<Self> {
        match dim {
            1 => Self::generate(GridSpec::Signs),
            2 => Self::generate(GridSpec::Angles(count)),
            _ => Self::generate(GridSpec::Seeded { dim, count, seed }),
        }
    }

    /// Grid from explicit directions; zero vectors are rejected.
    pub fn explicit(vectors: Vec<Vector<T>>) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty direction grid".into()))?;
        let dim = first.dim();
        for v in &vectors {
            v.check_dim(dim)?;
            if v.is_zero() {
                return Err(Error::ZeroDirection);
            }
        }
        Ok(DirectionGrid {
            spec: None,
            vectors,
        })
    }

    pub fn spec(&self) -> Option<&GridSpec> {
        self.spec.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn vectors(&self) -> &[Vector<T>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// `(cos 2 pi k / m, sin 2 pi k / m)` for `k = 0..m`.
pub fn angle_path<T: Scalar>(count: usize) -> Vec<Vector<T>> {
    (0..count)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / count as f64;
            Vector::new(vec![T::lit(th.cos()), T::lit(th.sin())]).expect("finite angle")
        })
        .collect()
}

/// Point where `L_a(t) <= L_b(t)` fails. `t == None` means the asymptotes
/// (the means) are out of order.
#[derive(Debug, Clone, PartialEq)]
pub struct IcxWitness<T> {
    pub direction_index: usize,
    pub direction: Vector<T>,
    pub t: Option<T>,
    /// `L_a(t) - L_b(t)` or `mean_a - mean_b`.
    pub excess: T,
}

fn check_same_dim<T: Scalar>(a: &BodySample<T>, b: &BodySample<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Compares two stop-loss curves. Both vanish at `-inf` and are linear
/// between breakpoints, so checking every breakpoint and the slopes-one
/// asymptotes is exact.
pub fn curve_dominance_violation<T: Scalar>(
    a: &StopLossCurve<T>,
    b: &StopLossCurve<T>,
    tol: T,
) -> Option<(Option<T>, T)> {
    let mut ts: Vec<T> = a
        .breakpoints()
        .iter()
        .chain(b.breakpoints())
        .copied()
        .collect();
    ts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    ts.dedup();
    for t in ts {
        let excess = a.eval(t) - b.eval(t);
        if excess > tol {
            return Some((Some(t), excess));
        }
    }
    let excess = a.mean() - b.mean();
    if excess > tol {
        return Some((None, excess));
    }
    None
}

/// First violation of `h_a(u) <=_icx h_b(u)` in direction `u`, if any.
pub fn icx_witness<T: Scalar>(
    a: &BodySample<T>,
    b: &BodySample<T>,
    u: &Vector<T>,
    tol: T,
) -> Result<Option<IcxWitness<T>>> {
    check_same_dim(a, b)?;
    let ca = stop_loss_curve(a, u)?;
    let cb = stop_loss_curve(b, u)?;
    Ok(
        curve_dominance_violation(&ca, &cb, tol).map(|(t, excess)| IcxWitness {
            direction_index: 0,
            direction: u.clone(),
            t,
            excess,
        }),
    )
}

/// `h_a(u)` is smaller than `h_b(u)` in the increasing convex order.
pub fn icx_dominates<T: Scalar>(
    a: &BodySample<T>,
    b: &BodySample<T>,
    u: &Vector<T>,
) -> Result<bool> {
    Ok(icx_witness(a, b, u, T::lit(EXACT_TOL))?.is_none())
}

/// First grid direction where inclusion of the lift expectation of `a` in
/// that of `b` fails.
pub fn inclusion_witness<T: Scalar>(
    a: &BodySample<T>,
    b: &BodySample<T>,
    grid: &DirectionGrid<T>,
    tol: T,
) -> Result<Option<IcxWitness<T>>> {
    check_same_dim(a, b)?;
    if grid.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: grid.dim(),
        });
    }
    for (k, u) in grid.vectors().iter().enumerate() {
        if let Some(mut w) = icx_witness(a, b, u, tol)? {
            w.direction_index = k;
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Grid-certified inclusion of lift expectations.
pub fn lift_included<T: Scalar>(
    a: &BodySample<T>,
    b: &BodySample<T>,
    grid: &DirectionGrid<T>,
) -> Result<bool> {
    Ok(inclusion_witness(a, b, grid, T::lit(EXACT_TOL))?.is_none())
}

/// Coupled mixture `t X + (1 - t) Y`, realization by realization. Both
/// samples must live on the same atoms: equal length and equal weights.
pub fn mix_samples<T: Scalar>(a: &BodySample<T>, b: &BodySample<T>, t: T) -> Result<BodySample<T>> {
    if !(t >= T::zero() && t <= T::one()) {
        return Err(Error::InvalidParameter(format!("t must lie in [0, 1], got {t}")));
    }
    check_same_dim(a, b)?;
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "coupled samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.weights() != b.weights() {
        return Err(Error::InvalidWeights(
            "coupled samples must carry identical weights".into(),
        ));
    }
    let bodies = a
        .bodies()
        .iter()
        .zip(b.bodies())
        .map(|(x, y)| {
            ConvexBody::MinkowskiCombo(vec![(t, x.clone()), (T::one() - t, y.clone())])
        })
        .collect();
    BodySample::new(bodies, a.weights().to_vec())
}

/// `t L_a(u0) + (1 - t) L_b(u0) - L_mix(u0)`; nonnegative by convexity of
/// the lift expectation under Minkowski combinations.
pub fn convexity_gap<T: Scalar>(
    a: &BodySample<T>,
    b: &BodySample<T>,
    t: T,
    u0: T,
    u: &Vector<T>,
) -> Result<T> {
    let mix = mix_samples(a, b, t)?;
    Ok(t * lift_support(a, u0, u)? + (T::one() - t) * lift_support(b, u0, u)?
        - lift_support(&mix, u0, u)?)
}

/// Re-merges canonical atoms whose values lie within `tol` of the group head.
fn coarsen<T: Scalar>(curve: &StopLossCurve<T>, tol: T) -> Vec<(T, T)> {
    let mut out: Vec<(T, T)> = Vec::new();
    let mut head = T::nan();
    for (h, m) in curve.atoms() {
        match out.last_mut() {
            Some(last) if (head - h).abs() <= tol => last.1 += m,
            _ => {
                head = h;
                out.push((h, m));
            }
        }
    }
    out
}

/// First grid direction where the canonical curves of `a` and `b` differ
/// by more than `tol` in a breakpoint or a mass.
pub fn lift_difference<T: Scalar>(
    a: &BodySample<T>,
    b: &BodySample<T>,
    grid: &DirectionGrid<T>,
    tol: T,
) -> Result<Option<usize>> {
    check_same_dim(a, b)?;
    for (k, u) in grid.vectors().iter().enumerate() {
        let ca = coarsen(&stop_loss_curve(a, u)?, tol);
        let cb = coarsen(&stop_loss_curve(b, u)?, tol);
        let same = ca.len() == cb.len()
            && ca
                .iter()
                .zip(&cb)
                .all(|(x, y)| (x.0 - y.0).abs() <= tol && (x.1 - y.1).abs() <= tol);
        if !same {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Whether `a` and `b` have the same lift expectation, as seen on `grid`.
pub fn same_lift<T: Scalar>(
    a: &BodySample<T>,
    b: &BodySample<T>,
    grid: &DirectionGrid<T>,
    tol: T,
) -> Result<bool> {
    Ok(lift_difference(a, b, grid, tol)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u1(x: f64) -> Vector<f64> {
        Vector::scalar(x)
    }

    fn signs() -> DirectionGrid<f64> {
        DirectionGrid::generate(GridSpec::Signs).unwrap()
    }

    #[test]
    fn icx_examples() {
        let a = BodySample::points_1d(&[2.0]).unwrap();
        let b = BodySample::points_1d(&[1.0, 3.0]).unwrap();
        assert!(icx_dominates(&a, &b, &u1(1.0)).unwrap());
        assert!(!icx_dominates(&b, &a, &u1(1.0)).unwrap());
        let w = icx_witness(&b, &a, &u1(1.0), 1e-12).unwrap().unwrap();
        assert_eq!(w.t, Some(-2.0));
        assert_eq!(w.excess, 0.5);
        assert!(icx_dominates(&b, &b, &u1(1.0)).unwrap());
    }

    #[test]
    fn asymptotic_witness() {
        let a = BodySample::points_1d(&[5.0]).unwrap();
        let b = BodySample::points_1d(&[4.0]).unwrap();
        let w = icx_witness(&a, &b, &u1(1.0), 1e-12).unwrap().unwrap();
        // L_a(-4) = 1 > L_b(-4) = 0 is found before the asymptote
        assert_eq!(w.t, Some(-4.0));
        // beyond the last breakpoint the gap is the difference of means
        let a = BodySample::points_1d(&[0.0, 10.0]).unwrap();
        let b = BodySample::intervals(&[(4.9, 4.9)], vec![1.0]).unwrap();
        let ca = stop_loss_curve(&a, &u1(1.0)).unwrap();
        let cb = stop_loss_curve(&b, &u1(1.0)).unwrap();
        assert!(curve_dominance_violation(&ca, &cb, 1e-12).is_some());
    }

    #[test]
    fn inclusion_examples() {
        let grid = DirectionGrid::generate(GridSpec::Angles(72)).unwrap();
        let pts = [[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]];
        let a = BodySample::uniform(
            pts.iter()
                .map(|p| ConvexBody::singleton(Vector::from_f64(p)))
                .collect(),
        )
        .unwrap();
        let b = BodySample::uniform(
            pts.iter()
                .map(|p| ConvexBody::ball(Vector::from_f64(p), 1.0).unwrap())
                .collect(),
        )
        .unwrap();
        assert!(lift_included(&a, &b, &grid).unwrap());
        assert!(!lift_included(&b, &a, &grid).unwrap());
        assert!(lift_included(&a, &a, &grid).unwrap());

        let shifted = BodySample::uniform(
            pts.iter()
                .map(|p| ConvexBody::singleton(Vector::from_f64(&[p[0] + 1.0, p[1]])))
                .collect(),
        )
        .unwrap();
        let w = inclusion_witness(&shifted, &a, &grid, 1e-12).unwrap().unwrap();
        assert_eq!(w.direction_index, 0);
        assert!(w.excess > 0.0);
    }

    #[test]
    fn mixing_examples() {
        let a = BodySample::points_1d(&[0.0]).unwrap();
        let b = BodySample::points_1d(&[2.0]).unwrap();
        let m = mix_samples(&a, &b, 0.5).unwrap();
        for u in [-2.0, 1.0, 3.0] {
            assert_eq!(m.support_values(&u1(u)).unwrap(), vec![u]);
        }
        let m1 = mix_samples(&a, &b, 1.0).unwrap();
        let m0 = mix_samples(&a, &b, 0.0).unwrap();
        for u in [-1.0, 2.0] {
            assert_eq!(m1.support_values(&u1(u)).unwrap(), a.support_values(&u1(u)).unwrap());
            assert_eq!(m0.support_values(&u1(u)).unwrap(), b.support_values(&u1(u)).unwrap());
        }
        let c = BodySample::points_1d(&[0.0, 1.0]).unwrap();
        assert!(mix_samples(&a, &c, 0.5).is_err());
        let d = BodySample::new(
            vec![ConvexBody::Singleton(u1(0.0)), ConvexBody::Singleton(u1(1.0))],
            vec![0.25, 0.75],
        )
        .unwrap();
        assert!(matches!(mix_samples(&c, &d, 0.5), Err(Error::InvalidWeights(_))));
        assert!(mix_samples(&a, &b, 1.5).is_err());
    }

    #[test]
    fn convexity_gap_examples() {
        let a = BodySample::points_1d(&[0.0, 2.0]).unwrap();
        let b = BodySample::points_1d(&[2.0, 0.0]).unwrap();
        assert_eq!(convexity_gap(&a, &b, 0.5, -1.0, &u1(1.0)).unwrap(), 0.5);
        for t in [0.0, 1.0] {
            assert_eq!(convexity_gap(&a, &b, t, -1.0, &u1(1.0)).unwrap(), 0.0);
        }
        for t in [0.2, 0.5, 0.9] {
            // t h + (1 - t) h rounds, so zero only to machine precision
            assert!(convexity_gap(&a, &a, t, -0.5, &u1(1.0)).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn same_lift_examples() {
        let a = BodySample::intervals(&[(1.0, 3.0), (2.0, 4.0)], vec![0.5, 0.5]).unwrap();
        let b = BodySample::intervals(&[(1.0, 4.0), (2.0, 3.0)], vec![0.5, 0.5]).unwrap();
        assert!(same_lift(&a, &b, &signs(), 0.0).unwrap());
        let a = BodySample::intervals(&[(1.0, 3.0), (2.0, 4.0)], vec![0.4, 0.6]).unwrap();
        let b = BodySample::intervals(&[(1.0, 4.0), (2.0, 3.0)], vec![0.4, 0.6]).unwrap();
        assert!(!same_lift(&a, &b, &signs(), 1e-9).unwrap());
        assert_eq!(lift_difference(&a, &b, &signs(), 1e-9).unwrap(), Some(0));
        assert!(same_lift(&a, &a, &signs(), 0.0).unwrap());
    }

    #[test]
    fn tolerant_merge_in_same_lift() {
        let a = BodySample::points_1d(&[1.0, 1.0 + 1e-13]).unwrap();
        let b = BodySample::points_1d(&[1.0]).unwrap();
        assert!(same_lift(&a, &b, &signs(), 1e-9).unwrap());
        assert!(!same_lift(&a, &b, &signs(), 0.0).unwrap());
    }

    #[test]
    fn grids_are_reproducible() {
        let g1 = DirectionGrid::<f64>::generate(GridSpec::Seeded {
            dim: 3,
            count: 20,
            seed: 7,
        })
        .unwrap();
        let g2 = DirectionGrid::<f64>::generate(GridSpec::Seeded {
            dim: 3,
            count: 20,
            seed: 7,
        })
        .unwrap();
        assert_eq!(g1, g2);
        for v in g1.vectors() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        let g3 = DirectionGrid::<f64>::generate(GridSpec::Seeded {
            dim: 3,
            count: 20,
            seed: 8,
        })
        .unwrap();
        assert_ne!(g1, g3);
        let a = DirectionGrid::<f64>::generate(GridSpec::Angles(4)).unwrap();
        assert_eq!(a.vectors()[0], Vector::from_f64(&[1.0, 0.0]));
        assert!(DirectionGrid::explicit(vec![Vector::<f64>::zeros(2)]).is_err());
    }
}

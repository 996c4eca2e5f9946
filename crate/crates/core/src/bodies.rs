//! Convex bodies with closed-form support functions.
//!
//! Every other module sees a body only through [`ConvexBody::support`] and
//! [`ConvexBody::support_point`]. Directions need not be unit vectors.

use std::cmp::Ordering;
use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::{pos, Scalar};

/// Point or direction in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<T>(Vec<T>);

impl<T: Scalar> Vector<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("vector of dimension 0".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("vector coordinate"));
        }
        Ok(Vector(coords))
    }

    pub fn scalar(x: T) -> Self {
        Vector(vec![x])
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![T::zero(); dim.max(1)])
    }

    /// Builds a vector from `f64` literals. Panics on empty or non-finite input.
    pub fn from_f64(coords: &[f64]) -> Self {
        Self::new(coords.iter().map(|&c| T::lit(c)).collect()).expect("valid vector literal")
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<T> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> T {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, s: T) -> Self {
        Vector(self.0.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| a + b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Lexicographic comparison of coordinates.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.partial_cmp(b) {
                Some(Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        } else if !self.is_finite() {
            Err(Error::NonFinite("direction"))
        } else {
            Ok(())
        }
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    /// Validates symmetry (to 1e-9, relative to the largest entry) and
    /// positive semi-definiteness (smallest eigenvalue >= -1e-9).
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidBody("empty shape matrix".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidBody("shape matrix is not square".into()));
        }
        let data: Vec<T> = rows.into_iter().flatten().collect();
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("shape matrix entry"));
        }
        let m = SymMatrix { n, data };
        let tol = T::lit(1e-9);
        let scale = m.data.iter().fold(T::one(), |a, &x| a.max(x.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                if (m.get(i, j) - m.get(j, i)).abs() > tol * scale {
                    return Err(Error::InvalidBody(format!(
                        "shape matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let min_eig = m
            .eigenvalues()
            .into_iter()
            .fold(T::infinity(), |a, e| a.min(e));
        if min_eig < -tol {
            return Err(Error::InvalidBody(format!(
                "shape matrix not positive semi-definite (eigenvalue {min_eig})"
            )));
        }
        Ok(m)
    }

    pub fn diagonal(diag: &[T]) -> Result<Self> {
        let n = diag.len();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { diag[i] } else { T::zero() })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn mul_vec(&self, u: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], u))
            .collect()
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Eigenvalues by cyclic Jacobi rotations on the symmetrized matrix.
    pub fn eigenvalues(&self) -> Vec<T> {
        let n = self.n;
        let half = T::lit(0.5);
        let mut a: Vec<T> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                (self.get(i, j) + self.get(j, i)) * half
            })
            .collect();
        let eps = T::epsilon();
        for _sweep in 0..100 {
            let off: T = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j] * a[i * n + j])
                .sum();
            let diag: T = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum();
            if off <= eps * eps * diag || off == T::zero() {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (T::lit(2.0) * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i * n + i]).collect()
    }
}

/// Exactly representable convex body.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody<T> {
    Singleton(Vector<T>),
    Segment(Vector<T>, Vector<T>),
    /// One-dimensional `[lo, hi]`.
    Interval { lo: T, hi: T },
    /// Convex hull of the vertices (V-representation only).
    Polytope(Vec<Vector<T>>),
    Ball { center: Vector<T>, radius: T },
    /// `{x : <Q^{-1} x, x> <= 1}` with support `sqrt(<Qu, u>)`.
    Ellipsoid(SymMatrix<T>),
    /// l1 unit ball scaled coordinatewise, support `max_i |s_i u_i|`.
    ScaledL1Ball(Vec<T>),
    /// `sum_k scale_k * body_k`.
    MinkowskiCombo(Vec<(T, ConvexBody<T>)>),
}

impl<T: Scalar> ConvexBody<T> {
    pub fn singleton(p: Vector<T>) -> Self {
        ConvexBody::Singleton(p)
    }

    pub fn segment(a: Vector<T>, b: Vector<T>) -> Result<Self> {
        let body = ConvexBody::Segment(a, b);
        body.validate()?;
        Ok(body)
    }

    pub fn interval(lo: T, hi: T) -> Result<Self> {
        let body = ConvexBody::Interval { lo, hi };
        body.validate()?;
        Ok(body)
    }

    pub fn polytope(vertices: Vec<Vector<T>>) -> Result<Self> {
        let body = ConvexBody::Polytope(vertices);
        body.validate()?;
        Ok(body)
    }

    pub fn ball(center: Vector<T>, radius: T) -> Result<Self> {
        let body = ConvexBody::Ball { center, radius };
        body.validate()?;
        Ok(body)
    }

    pub fn ellipsoid(shape: Vec<Vec<T>>) -> Result<Self> {
        Ok(ConvexBody::Ellipsoid(SymMatrix::new(shape)?))
    }

    pub fn scaled_l1_ball(scales: Vec<T>) -> Result<Self> {
        let body = ConvexBody::ScaledL1Ball(scales);
        body.validate()?;
        Ok(body)
    }

    pub fn minkowski(terms: Vec<(T, ConvexBody<T>)>) -> Result<Self> {
        let body = ConvexBody::MinkowskiCombo(terms);
        body.validate()?;
        Ok(body)
    }

    /// Checks the variant invariants and returns the dimension.
    pub fn validate(&self) -> Result<usize> {
        match self {
            ConvexBody::Singleton(p) => Ok(p.dim()),
            ConvexBody::Segment(a, b) => {
                b.check_dim(a.dim())?;
                Ok(a.dim())
            }
            ConvexBody::Interval { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::NonFinite("interval endpoint"));
                }
                if lo > hi {
                    return Err(Error::InvalidBody(format!("interval lo {lo} > hi {hi}")));
                }
                Ok(1)
            }
            ConvexBody::Polytope(vs) => {
                let first = vs
                    .first()
                    .ok_or_else(|| Error::InvalidBody("polytope without vertices".into()))?;
                for v in vs {
                    v.check_dim(first.dim())?;
                }
                Ok(first.dim())
            }
            ConvexBody::Ball { center, radius } => {
                if !radius.is_finite() {
                    return Err(Error::NonFinite("radius"));
                }
                if *radius < T::zero() {
                    return Err(Error::InvalidBody("negative radius".into()));
                }
                Ok(center.dim())
            }
            ConvexBody::Ellipsoid(q) => Ok(q.dim()),
            ConvexBody::ScaledL1Ball(s) => {
                if s.is_empty() {
                    return Err(Error::InvalidBody("l1 ball without scales".into()));
                }
                if s.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("l1 ball scale"));
                }
                if s.iter().any(|&x| x <= T::zero()) {
                    return Err(Error::InvalidBody("l1 ball scales must be positive".into()));
                }
                Ok(s.len())
            }
            ConvexBody::MinkowskiCombo(terms) => {
                let mut dim = None;
                if terms.is_empty() {
                    return Err(Error::InvalidBody("empty Minkowski combination".into()));
                }
                for (s, b) in terms {
                    if !s.is_finite() || *s < T::zero() {
                        return Err(Error::InvalidBody(
                            "Minkowski scales must be finite and nonnegative".into(),
                        ));
                    }
                    let d = b.validate()?;
                    match dim {
                        None => dim = Some(d),
                        Some(e) if e != d => {
                            return Err(Error::DimensionMismatch {
                                expected: e,
                                found: d,
                            })
                        }
                        _ => {}
                    }
                }
                Ok(dim.unwrap_or(1))
            }
        }
    }

    /// Dimension of the ambient space. Assumes a validated body.
    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Singleton(p) => p.dim(),
            ConvexBody::Segment(a, _) => a.dim(),
            ConvexBody::Interval { .. } => 1,
            ConvexBody::Polytope(vs) => vs.first().map_or(0, Vector::dim),
            ConvexBody::Ball { center, .. } => center.dim(),
            ConvexBody::Ellipsoid(q) => q.dim(),
            ConvexBody::ScaledL1Ball(s) => s.len(),
            ConvexBody::MinkowskiCombo(t) => t.first().map_or(0, |(_, b)| b.dim()),
        }
    }

    /// Support function `h(u) = sup <x, u>`.
    pub fn support(&self, u: &Vector<T>) -> Result<T> {
        u.check_dim(self.dim())?;
        Ok(self.support_unchecked(u.coords()))
    }

    /// Support function without dimension checks; `u.len()` must equal `dim()`.
    pub fn support_unchecked(&self, u: &[T]) -> T {
        match self {
            ConvexBody::Singleton(p) => dot(p.coords(), u),
            ConvexBody::Segment(a, b) => dot(a.coords(), u).max(dot(b.coords(), u)),
            ConvexBody::Interval { lo, hi } => {
                if u[0] >= T::zero() {
                    *hi * u[0]
                } else {
                    *lo * u[0]
                }
            }
            ConvexBody::Polytope(vs) => vs
                .iter()
                .map(|v| dot(v.coords(), u))
                .fold(T::neg_infinity(), T::max),
            ConvexBody::Ball { center, radius } => {
                dot(center.coords(), u) + *radius * dot(u, u).sqrt()
            }
            ConvexBody::Ellipsoid(q) => pos(dot(&q.mul_vec(u), u)).sqrt(),
            ConvexBody::ScaledL1Ball(s) => s
                .iter()
                .zip(u)
                .map(|(&si, &ui)| (si * ui).abs())
                .fold(T::zero(), T::max),
            ConvexBody::MinkowskiCombo(terms) => terms
                .iter()
                .fold(T::zero(), |acc, (s, b)| acc + *s * b.support_unchecked(u)),
        }
    }

    /// A point of the body attaining the support value in direction `u`.
    ///
    /// Faces are broken lexicographically: the smallest maximizing vertex is
    /// returned, where vertices within `1e-12` (relative) of the maximum count
    /// as maximizers.
    pub fn support_point(&self, u: &Vector<T>) -> Result<Vector<T>> {
        u.check_dim(self.dim())?;
        if u.is_zero() {
            return Err(Error::ZeroDirection);
        }
        self.support_point_unchecked(u)
    }

    fn support_point_unchecked(&self, u: &Vector<T>) -> Result<Vector<T>> {
        let uc = u.coords();
        Ok(match self {
            ConvexBody::Singleton(p) => p.clone(),
            ConvexBody::Segment(a, b) => lex_argmax(vec![a.clone(), b.clone()], uc),
            ConvexBody::Interval { lo, hi } => {
                if uc[0] > T::zero() {
                    Vector::scalar(*hi)
                } else {
                    Vector::scalar(*lo)
                }
            }
            ConvexBody::Polytope(vs) => lex_argmax(vs.clone(), uc),
            ConvexBody::Ball { center, radius } => center.add(&u.scale(*radius / u.norm())),
            ConvexBody::Ellipsoid(q) => {
                let qu = q.mul_vec(uc);
                let quu = dot(&qu, uc);
                if quu <= T::zero() {
                    return Err(Error::DegenerateDirection);
                }
                Vector(qu).scale(T::one() / quu.sqrt())
            }
            ConvexBody::ScaledL1Ball(s) => {
                let d = s.len();
                let candidates = (0..d)
                    .filter(|&i| !uc[i].is_zero())
                    .map(|i| {
                        let mut x = vec![T::zero(); d];
                        x[i] = s[i] * uc[i].signum();
                        Vector(x)
                    })
                    .collect();
                lex_argmax(candidates, uc)
            }
            ConvexBody::MinkowskiCombo(terms) => {
                let mut acc = Vector::zeros(self.dim());
                for (s, b) in terms {
                    acc = acc.add(&b.support_point_unchecked(u)?.scale(*s));
                }
                acc
            }
        })
    }

    /// Smallest support value over `dirs` (unchecked dimensions).
    pub fn min_support(&self, dirs: &[Vector<T>]) -> T {
        dirs.iter()
            .map(|u| self.support_unchecked(u.coords()))
            .fold(T::infinity(), T::min)
    }
}

fn lex_argmax<T: Scalar>(candidates: Vec<Vector<T>>, u: &[T]) -> Vector<T> {
    let values: Vec<T> = candidates.iter().map(|v| dot(v.coords(), u)).collect();
    let best = values.iter().copied().fold(T::neg_infinity(), T::max);
    let tol = T::lit(1e-12) * best.abs().max(T::one());
    candidates
        .into_iter()
        .zip(values)
        .filter(|(_, h)| *h >= best - tol)
        .map(|(v, _)| v)
        .min_by(|a, b| a.lex_cmp(b))
        .expect("nonempty candidate list")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector<f64> {
        Vector::from_f64(c)
    }

    fn square() -> ConvexBody<f64> {
        ConvexBody::polytope(vec![
            v(&[1.0, 1.0]),
            v(&[1.0, -1.0]),
            v(&[-1.0, 1.0]),
            v(&[-1.0, -1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn support_examples() {
        let ball = ConvexBody::ball(v(&[1.0, 0.0]), 2.0).unwrap();
        assert_eq!(ball.support(&v(&[0.0, 1.0])).unwrap(), 2.0);

        let ell = ConvexBody::ellipsoid(vec![vec![4.0, 0.0], vec![0.0, 9.0]]).unwrap();
        assert_eq!(ell.support(&v(&[1.0, 0.0])).unwrap(), 2.0);

        let l1 = ConvexBody::scaled_l1_ball(vec![1.0, 3.0]).unwrap();
        assert_eq!(l1.support(&v(&[2.0, 1.0])).unwrap(), 3.0);

        assert_eq!(square().support(&v(&[1.0, 1.0])).unwrap(), 2.0);
    }

    #[test]
    fn support_point_examples() {
        let ball = ConvexBody::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(ball.support_point(&v(&[3.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
        assert_eq!(
            square().support_point(&v(&[1.0, 0.0])).unwrap(),
            v(&[1.0, -1.0])
        );
        let p = ConvexBody::singleton(v(&[2.0, 5.0]));
        assert_eq!(p.support_point(&v(&[-0.3, 7.0])).unwrap(), v(&[2.0, 5.0]));
    }

    #[test]
    fn support_point_errors() {
        assert_eq!(
            square().support_point(&v(&[0.0, 0.0])),
            Err(Error::ZeroDirection)
        );
        let flat = ConvexBody::ellipsoid(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(
            flat.support_point(&v(&[0.0, 1.0])),
            Err(Error::DegenerateDirection)
        );
        assert_eq!(flat.support(&v(&[0.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn dimension_and_finiteness_errors() {
        assert!(matches!(
            square().support(&v(&[1.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        let bad = Vector(vec![f64::NAN, 0.0]);
        assert_eq!(square().support(&bad), Err(Error::NonFinite("direction")));
        assert!(Vector::<f64>::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn invalid_bodies_rejected() {
        assert!(ConvexBody::interval(3.0, 1.0).is_err());
        assert!(ConvexBody::<f64>::polytope(vec![]).is_err());
        assert!(ConvexBody::polytope(vec![v(&[0.0]), v(&[0.0, 1.0])]).is_err());
        assert!(ConvexBody::ball(v(&[0.0]), -1.0).is_err());
        assert!(ConvexBody::scaled_l1_ball(vec![1.0, 0.0]).is_err());
        assert!(ConvexBody::ellipsoid(vec![vec![1.0, 2.0], vec![0.0, 1.0]]).is_err());
        // eigenvalues 3 and -1
        assert!(ConvexBody::ellipsoid(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        // rounding-level negativity tolerated
        assert!(ConvexBody::ellipsoid(vec![vec![1.0, 0.0], vec![0.0, -1e-12]]).is_ok());
        assert!(ConvexBody::minkowski(vec![
            (1.0, ConvexBody::interval(0.0, 1.0).unwrap()),
            (1.0, ConvexBody::singleton(v(&[0.0, 0.0])))
        ])
        .is_err());
        assert!(ConvexBody::minkowski(vec![(-1.0, square())]).is_err());
    }

    #[test]
    fn jacobi_eigenvalues() {
        let m = SymMatrix::new(vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 2.0, 0.0],
            vec![0.0, 0.0, 5.0],
        ])
        .unwrap();
        let mut e: Vec<f64> = m.eigenvalues();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in e.iter().zip([1.0, 3.0, 5.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn interval_and_segment_agree() {
        let i = ConvexBody::interval(1.0, 3.0).unwrap();
        let s = ConvexBody::segment(v(&[1.0]), v(&[3.0])).unwrap();
        for u in [-2.0, -1.0, 0.0, 0.5, 4.0] {
            assert_eq!(i.support(&v(&[u])).unwrap(), s.support(&v(&[u])).unwrap());
        }
        assert_eq!(i.support_point(&v(&[-1.0])).unwrap(), v(&[1.0]));
    }

    #[test]
    fn minkowski_support_point_sums() {
        let combo = ConvexBody::minkowski(vec![
            (2.0, ConvexBody::ball(v(&[0.0, 0.0]), 1.0).unwrap()),
            (1.0, square()),
        ])
        .unwrap();
        let u = v(&[0.0, 1.0]);
        let x = combo.support_point(&u).unwrap();
        assert_eq!(x, v(&[-1.0, 3.0]));
        assert_eq!(x.dot(&u), combo.support(&u).unwrap());
    }

    #[test]
    fn generic_over_f32() {
        let b = ConvexBody::<f32>::ball(Vector::from_f64(&[1.0, 0.0]), 2.0).unwrap();
        assert_eq!(b.support(&Vector::from_f64(&[0.0, 1.0])).unwrap(), 2.0f32);
    }
}

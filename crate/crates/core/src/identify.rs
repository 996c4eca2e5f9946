//! Identification of discrete random bodies from one-dimensional marginals.
//!
//! The lift expectation determines, for each direction `u`, only the law of
//! `h_X(u)`. For a body with finitely many realizations this module
//! builds those laws ([`marginal_oracle`]) and tries to recover the joint
//! law from them:
//!
//! * [`reconstruct_distinct_probs`] matches atoms across directions by their
//!   probabilities, which works whenever some direction separates all
//!   realizations and all realization probabilities differ;
//! * [`reconstruct_continuation`] follows support-function branches around
//!   the circle (d = 2), resolving crossings by slope, which works for
//!   strictly convex realizations with distinct support points even when
//!   probabilities coincide;
//! * [`reconstruct_comonotonic`] couples the marginals by quantiles, which
//!   recovers samples whose signed support values are comonotonic.

use std::cmp::Ordering;
use std::fmt;

use crate::bodies::{ConvexBody, Vector};
use crate::error::{Error, Result};
use crate::lift::BodySample;
use crate::scalar::{Probability, Scalar};

/// Values closer than this are one atom.
pub const MERGE_TOL: f64 = 1e-9;
/// Probabilities closer than this are equal (floating probabilities only).
pub const PROB_TOL: f64 = 1e-9;
/// Smallest slope gap accepted when two branches meet.
pub const GRADIENT_TIE_TOL: f64 = 1e-7;
/// Sublinearity slack for reconstructed support values.
pub const SUBLINEAR_TOL: f64 = 1e-7;

const MAX_SPLITS: usize = 4096;
const PARALLEL_WORK: usize = 1 << 16;

/// Law of one support value: atoms sorted by value, equal values merged.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSupportDist<T, P> {
    atoms: Vec<(T, P)>,
}

impl<T: Scalar, P: Probability> FiniteSupportDist<T, P> {
    /// Sorts, merges values within `merge_tol` of the first value of their
    /// group (summing probabilities), and checks that probabilities are
    /// positive and sum to one.
    pub fn new(mut atoms: Vec<(T, P)>, merge_tol: T) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidWeights("distribution without atoms".into()));
        }
        if atoms.iter().any(|(v, _)| !v.is_finite()) {
            return Err(Error::NonFinite("atom value"));
        }
        if atoms.iter().any(|(_, p)| !p.is_positive()) {
            return Err(Error::InvalidWeights("atom probabilities must be positive".into()));
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut merged: Vec<(T, P)> = Vec::with_capacity(atoms.len());
        let mut head = T::nan();
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if v - head <= merge_tol => last.1 = last.1.clone() + p,
                _ => {
                    head = v;
                    merged.push((v, p));
                }
            }
        }
        let total = merged
            .iter()
            .fold(P::zero(), |acc, (_, p)| acc + p.clone());
        if !total.approx_eq(&P::one(), PROB_TOL) {
            return Err(Error::InvalidWeights(format!(
                "probabilities sum to {}",
                total.to_f64()
            )));
        }
        Ok(FiniteSupportDist { atoms: merged })
    }

    pub fn atoms(&self) -> &[(T, P)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Whether no two atoms carry equal probability.
    pub fn probs_distinct(&self) -> bool {
        self.atoms.iter().enumerate().all(|(i, (_, p))| {
            self.atoms[i + 1..]
                .iter()
                .all(|(_, q)| !p.approx_eq(q, PROB_TOL))
        })
    }
}

/// The one-dimensional laws of `h_X(u)` along an ordered path of directions.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalOracle<T, P> {
    directions: Vec<Vector<T>>,
    dists: Vec<FiniteSupportDist<T, P>>,
}

impl<T: Scalar, P: Probability> MarginalOracle<T, P> {
    pub fn new(directions: Vec<Vector<T>>, dists: Vec<FiniteSupportDist<T, P>>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::InvalidParameter("oracle without directions".into()));
        }
        if directions.len() != dists.len() {
            return Err(Error::InvalidParameter(format!(
                "{} directions but {} distributions",
                directions.len(),
                dists.len()
            )));
        }
        let dim = directions[0].dim();
        for u in &directions {
            u.check_dim(dim)?;
        }
        Ok(MarginalOracle { directions, dists })
    }

    pub fn directions(&self) -> &[Vector<T>] {
        &self.directions
    }

    pub fn dists(&self) -> &[FiniteSupportDist<T, P>] {
        &self.dists
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.directions[0].dim()
    }

    /// Polar angle of direction `k` (`atan2` of the first two coordinates;
    /// `0` or `pi` in dimension one).
    pub fn angle(&self, k: usize) -> T {
        let c = self.directions[k].coords();
        match c.len() {
            1 => T::zero().atan2(c[0]),
            _ => c[1].atan2(c[0]),
        }
    }
}

/// Per-direction laws of `h_X(u)` for a weighted sample.
pub fn marginal_oracle<T: Scalar + Probability>(
    sample: &BodySample<T>,
    path: &[Vector<T>],
) -> Result<MarginalOracle<T, T>> {
    marginal_oracle_with_probs(sample.bodies(), sample.weights(), path)
}

/// As [`marginal_oracle`], with probabilities of any [`Probability`] type
/// (e.g. exact rationals) supplied alongside the bodies.
pub fn marginal_oracle_with_probs<T: Scalar, P: Probability>(
    bodies: &[ConvexBody<T>],
    probs: &[P],
    path: &[Vector<T>],
) -> Result<MarginalOracle<T, P>> {
    if bodies.is_empty() || bodies.len() != probs.len() {
        return Err(Error::InvalidWeights(format!(
            "{} bodies but {} probabilities",
            bodies.len(),
            probs.len()
        )));
    }
    let dim = bodies[0].validate()?;
    for b in bodies {
        let d = b.validate()?;
        if d != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: d,
            });
        }
    }
    let merge = T::lit(MERGE_TOL);
    let law = |u: &Vector<T>| {
        u.check_dim(dim)?;
        let atoms = bodies
            .iter()
            .zip(probs)
            .map(|(b, p)| (b.support_unchecked(u.coords()), p.clone()))
            .collect();
        FiniteSupportDist::new(atoms, merge)
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let dists = if workers < 2 || path.len() * bodies.len() < PARALLEL_WORK {
        path.iter().map(law).collect::<Result<Vec<_>>>()?
    } else {
        let chunk = path.len().div_ceil(workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = path
                .chunks(chunk)
                .map(|part| scope.spawn(move || part.iter().map(law).collect::<Result<Vec<_>>>()))
                .collect();
            let mut all = Vec::with_capacity(path.len());
            for h in handles {
                all.extend(h.join().expect("oracle worker panicked")?);
            }
            Ok::<_, Error>(all)
        })?
    };
    MarginalOracle::new(path.to_vec(), dists)
}

/// One recovered realization: its support values along the oracle path.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization<T, P> {
    pub support_values: Vec<T>,
    pub prob: P,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult<T, P> {
    pub realizations: Vec<Realization<T, P>>,
    pub diagnostics: Vec<String>,
}

impl<T: Scalar, P: Probability> ReconstructionResult<T, P> {
    /// Probabilities sum to one and every realization is sublinear on the
    /// oracle path (see [`sublinear_on_path`]).
    pub fn validate(&self, directions: &[Vector<T>]) -> Result<()> {
        let total = self
            .realizations
            .iter()
            .fold(P::zero(), |acc, r| acc + r.prob.clone());
        if !total.approx_eq(&P::one(), PROB_TOL) {
            return Err(Error::OracleInconsistent(format!(
                "recovered probabilities sum to {}",
                total.to_f64()
            )));
        }
        for (i, r) in self.realizations.iter().enumerate() {
            if let Some(k) = sublinear_on_path(directions, &r.support_values, T::lit(SUBLINEAR_TOL)) {
                return Err(Error::OracleInconsistent(format!(
                    "realization {i} is not a support function near direction {k}"
                )));
            }
        }
        Ok(())
    }
}

/// Spot-checks that `values` can be the restriction of a sublinear function
/// to `directions`: for consecutive triples whose middle direction is a
/// nonnegative combination `a u_prev + b u_next`, requires
/// `h(u_mid) <= a h(u_prev) + b h(u_next) + tol * scale`, and for antipodal
/// pairs requires `h(u) + h(-u) >= -tol * scale`. Returns the index of the
/// first offending direction.
pub fn sublinear_on_path<T: Scalar>(directions: &[Vector<T>], values: &[T], tol: T) -> Option<usize> {
    let m = directions.len();
    let scale = values.iter().fold(T::one(), |a, v| a.max(v.abs()));
    let slack = tol * scale;
    if m >= 3 {
        for j in 0..m {
            let i = (j + m - 1) % m;
            let k = (j + 1) % m;
            if let Some((a, b)) = cone_coefficients(&directions[i], &directions[k], &directions[j]) {
                if values[j] > a * values[i] + b * values[k] + slack {
                    return Some(j);
                }
            }
        }
    }
    for i in 0..m {
        let neg = directions[i].scale(-T::one());
        for k in (i + 1)..m {
            if directions[k] == neg && values[i] + values[k] < -slack {
                return Some(i);
            }
        }
    }
    None
}

/// `(a, b)` with `a, b >= 0` and `a p + b q = w`, when such exist.
fn cone_coefficients<T: Scalar>(p: &Vector<T>, q: &Vector<T>, w: &Vector<T>) -> Option<(T, T)> {
    let pp = p.dot(p);
    let pq = p.dot(q);
    let qq = q.dot(q);
    let pw = p.dot(w);
    let qw = q.dot(w);
    let det = pp * qq - pq * pq;
    if det <= T::lit(1e-14) * pp * qq {
        return None;
    }
    let a = (pw * qq - qw * pq) / det;
    let b = (qw * pp - pw * pq) / det;
    if a < T::zero() || b < T::zero() {
        return None;
    }
    let resid = p.scale(a).add(&q.scale(b)).add(&w.scale(-T::one())).norm();
    if resid > T::lit(1e-9) * w.norm().max(T::one()) {
        return None;
    }
    Some((a, b))
}

/// Endpoints `(lo_i, hi_i)` can be sorted by one permutation, i.e. no pair
/// is strictly discordant.
pub fn is_comonotonic_endpoints<T: Scalar>(pairs: &[(T, T)], weights: &[T]) -> Result<bool> {
    if pairs.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} pairs but {} weights",
            pairs.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w <= T::zero()) {
        return Err(Error::InvalidWeights("weights must be positive".into()));
    }
    for &(lo, hi) in pairs {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite("interval endpoint"));
        }
        if lo > hi {
            return Err(Error::InvalidBody(format!("interval lo {lo} > hi {hi}")));
        }
    }
    let rows: Vec<Vec<T>> = pairs.iter().map(|&(lo, hi)| vec![lo, hi]).collect();
    Ok(rows_comonotonic(rows))
}

/// Rows are totally ordered coordinatewise: sort lexicographically and check
/// that every coordinate is then nondecreasing.
fn rows_comonotonic<T: Scalar>(mut rows: Vec<Vec<T>>) -> bool {
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    rows.windows(2)
        .all(|w| w[0].iter().zip(&w[1]).all(|(x, y)| x <= y))
}

/// Whether `g(u_k) h_i(u_k)` is a comonotonic vector over the directions,
/// for the sign assignment `signs` (each `+1` or `-1`).
pub fn is_comonotonic_under_signs<T: Scalar>(
    sample: &BodySample<T>,
    directions: &[Vector<T>],
    signs: &[i8],
) -> Result<bool> {
    if directions.len() != signs.len() {
        return Err(Error::InvalidParameter(
            "one sign per direction required".into(),
        ));
    }
    if signs.iter().any(|s| *s != 1 && *s != -1) {
        return Err(Error::InvalidParameter("signs must be +1 or -1".into()));
    }
    let mut rows = vec![Vec::with_capacity(directions.len()); sample.len()];
    for (u, &g) in directions.iter().zip(signs) {
        let g = if g > 0 { T::one() } else { -T::one() };
        for (row, h) in rows.iter_mut().zip(sample.support_values(u)?) {
            row.push(g * h);
        }
    }
    Ok(rows_comonotonic(rows))
}

/// Couples the marginals by quantiles of `g(u) h(u)`: the unique joint law
/// for which the signed support values are comonotonic.
pub fn reconstruct_comonotonic<T: Scalar, P: Probability>(
    oracle: &MarginalOracle<T, P>,
    signs: &[i8],
) -> Result<ReconstructionResult<T, P>> {
    if signs.len() != oracle.len() || signs.iter().any(|s| *s != 1 && *s != -1) {
        return Err(Error::InvalidParameter(
            "one sign (+1 or -1) per direction required".into(),
        ));
    }
    // per direction: atoms ordered by signed value with cumulative masses
    let ladders: Vec<Vec<(T, P)>> = oracle
        .dists
        .iter()
        .zip(signs)
        .map(|(d, &g)| {
            let mut atoms = d.atoms().to_vec();
            if g < 0 {
                atoms.reverse();
            }
            let mut acc = P::zero();
            atoms
                .into_iter()
                .map(|(v, p)| {
                    acc = acc.clone() + p;
                    (v, acc.clone())
                })
                .collect()
        })
        .collect();
    let mut cuts: Vec<P> = ladders
        .iter()
        .flat_map(|l| l.iter().map(|(_, c)| c.clone()))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut levels: Vec<P> = Vec::new();
    for c in cuts {
        let prev = levels.last().cloned().unwrap_or_else(P::zero);
        if !c.approx_eq(&prev, PROB_TOL) && c > prev {
            levels.push(c);
        }
    }
    if let Some(last) = levels.last_mut() {
        *last = P::one();
    }
    let mut realizations: Vec<Realization<T, P>> = Vec::new();
    let mut lower = P::zero();
    for upper in levels {
        let values = ladders
            .iter()
            .map(|l| {
                l.iter()
                    .find(|(_, c)| upper < *c || upper.approx_eq(c, PROB_TOL))
                    .map(|(v, _)| *v)
                    .unwrap_or_else(|| l.last().expect("nonempty ladder").0)
            })
            .collect();
        realizations.push(Realization {
            support_values: values,
            prob: upper.clone() - lower,
        });
        lower = upper;
    }
    let result = ReconstructionResult {
        realizations,
        diagnostics: Vec::new(),
    };
    result.validate(&oracle.directions)?;
    Ok(result)
}

/// Assigns each branch to an atom so that every atom's probability is the
/// sum of its branches' probabilities. Returns up to `MAX_SPLITS` solutions.
fn probability_splits<P: Probability>(branch_probs: &[P], atom_probs: &[P]) -> Vec<Vec<usize>> {
    let n = branch_probs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        branch_probs[b]
            .partial_cmp(&branch_probs[a])
            .unwrap_or(Ordering::Equal)
    });
    let mut filled = vec![P::zero(); atom_probs.len()];
    let mut counts = vec![0usize; atom_probs.len()];
    let mut assign = vec![usize::MAX; n];
    let mut out = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn go<P: Probability>(
        pos: usize,
        order: &[usize],
        branch_probs: &[P],
        atom_probs: &[P],
        filled: &mut [P],
        counts: &mut [usize],
        assign: &mut [usize],
        out: &mut Vec<Vec<usize>>,
    ) {
        if out.len() >= MAX_SPLITS {
            return;
        }
        let empty = counts.iter().filter(|&&c| c == 0).count();
        if empty > order.len() - pos {
            return;
        }
        if pos == order.len() {
            if filled
                .iter()
                .zip(atom_probs)
                .all(|(f, a)| f.approx_eq(a, PROB_TOL))
            {
                out.push(assign.to_vec());
            }
            return;
        }
        let b = order[pos];
        for a in 0..atom_probs.len() {
            let next = filled[a].clone() + branch_probs[b].clone();
            if next > atom_probs[a] && !next.approx_eq(&atom_probs[a], PROB_TOL) {
                continue;
            }
            let saved = std::mem::replace(&mut filled[a], next);
            counts[a] += 1;
            assign[b] = a;
            go(pos + 1, order, branch_probs, atom_probs, filled, counts, assign, out);
            assign[b] = usize::MAX;
            counts[a] -= 1;
            filled[a] = saved;
        }
    }

    go(
        0,
        &order,
        branch_probs,
        atom_probs,
        &mut filled,
        &mut counts,
        &mut assign,
        &mut out,
    );
    out
}

/// Recovers realizations and probabilities by matching atoms across
/// directions through their probabilities.
pub fn reconstruct_distinct_probs<T: Scalar, P: Probability>(
    oracle: &MarginalOracle<T, P>,
) -> Result<ReconstructionResult<T, P>> {
    let n = oracle.dists.iter().map(|d| d.len()).max().unwrap_or(0);
    let reference = oracle
        .dists
        .iter()
        .position(|d| d.len() == n && d.probs_distinct())
        .ok_or(Error::ProbabilitiesNotSeparating)?;
    let probs: Vec<P> = oracle.dists[reference]
        .atoms()
        .iter()
        .map(|(_, p)| p.clone())
        .collect();
    let m = oracle.len();
    let mut values = vec![vec![T::zero(); m]; n];
    for (b, (v, _)) in oracle.dists[reference].atoms().iter().enumerate() {
        values[b][reference] = *v;
    }
    let mut diagnostics = Vec::new();
    let mut prev = reference;
    for step in 1..m {
        let k = (reference + step) % m;
        let atoms = oracle.dists[k].atoms();
        let atom_probs: Vec<P> = atoms.iter().map(|(_, p)| p.clone()).collect();
        let splits = probability_splits(&probs, &atom_probs);
        let cost = |s: &Vec<usize>| {
            s.iter()
                .enumerate()
                .fold(T::zero(), |acc, (b, &a)| acc + (atoms[a].0 - values[b][prev]).abs())
        };
        let chosen = match splits.len() {
            0 => {
                return Err(Error::OracleInconsistent(format!(
                    "direction {k}: atom probabilities cannot be formed from the realization probabilities"
                )))
            }
            1 => splits[0].clone(),
            count => {
                diagnostics.push(format!(
                    "direction {k}: {count} probability splits, resolved by continuity with direction {prev}"
                ));
                splits
                    .iter()
                    .min_by(|x, y| cost(x).partial_cmp(&cost(y)).unwrap_or(Ordering::Equal))
                    .cloned()
                    .expect("nonempty")
            }
        };
        for (a, (v, _)) in atoms.iter().enumerate() {
            let sharing: Vec<usize> = (0..n).filter(|&b| chosen[b] == a).collect();
            if sharing.len() > 1 {
                diagnostics.push(format!(
                    "direction {k}: realizations {sharing:?} share value {v}"
                ));
            }
        }
        for (b, &a) in chosen.iter().enumerate() {
            values[b][k] = atoms[a].0;
        }
        prev = k;
    }
    let result = ReconstructionResult {
        realizations: values
            .into_iter()
            .zip(probs)
            .map(|(support_values, prob)| Realization {
                support_values,
                prob,
            })
            .collect(),
        diagnostics,
    };
    result.validate(&oracle.directions)?;
    Ok(result)
}

/// Crossing event reported by [`reconstruct_continuation`].
#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub direction: usize,
    pub angle: f64,
    pub branches: (usize, usize),
    pub slopes: (f64, f64),
}

impl fmt::Display for Crossing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "crossing at direction {} (angle {:.6}): branches {} and {} with slopes {:.6} and {:.6}",
            self.direction, self.angle, self.branches.0, self.branches.1, self.slopes.0, self.slopes.1
        )
    }
}

/// Order-preserving assignment of sorted branches to sorted atoms, each
/// atom taking a contiguous block whose probabilities sum to the atom's.
/// Minimizes the total distance between predictions and atom values.
fn block_assignment<T: Scalar, P: Probability>(
    predictions: &[T],
    branch_probs: &[P],
    atoms: &[(T, P)],
) -> Option<Vec<usize>> {
    let n = predictions.len();
    let c = atoms.len();
    if c > n {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        predictions[a]
            .partial_cmp(&predictions[b])
            .unwrap_or(Ordering::Equal)
    });
    // best[i][j]: first i sorted branches onto first j atoms
    let inf = T::infinity();
    let mut best = vec![vec![inf; c + 1]; n + 1];
    let mut back = vec![vec![0usize; c + 1]; n + 1];
    best[0][0] = T::zero();
    for j in 1..=c {
        let (value, ref prob) = atoms[j - 1];
        for i in j..=n {
            let mut mass = P::zero();
            let mut dist = T::zero();
            for start in (j - 1..i).rev() {
                let b = order[start];
                mass = mass + branch_probs[b].clone();
                dist += (predictions[b] - value).abs();
                if mass > *prob && !mass.approx_eq(prob, PROB_TOL) {
                    break;
                }
                if mass.approx_eq(prob, PROB_TOL) && best[start][j - 1] < inf {
                    let total = best[start][j - 1] + dist;
                    if total < best[i][j] {
                        best[i][j] = total;
                        back[i][j] = start;
                    }
                }
            }
        }
    }
    if best[n][c] == inf {
        return None;
    }
    let mut assign = vec![0usize; n];
    let (mut i, mut j) = (n, c);
    while j > 0 {
        let start = back[i][j];
        for &b in &order[start..i] {
            assign[b] = j - 1;
        }
        i = start;
        j -= 1;
    }
    Some(assign)
}

/// Follows support-function branches around a full circle of equally
/// spaced directions in the plane.
///
/// Branches start at the first direction where the number of atoms is
/// maximal. Each step predicts every branch by quadratic extrapolation
/// and matches predictions to atoms in sorted order, so branches that cross
/// between grid directions are carried through, and branches that approach
/// tangentially (separation of order h^2) keep their order. When branches
/// meet on a grid direction they share the atom; their one-sided slopes
/// (second-order backward differences) must then differ by at least
/// [`GRADIENT_TIE_TOL`], otherwise the realizations may share a support
/// point and cannot be told apart.
pub fn reconstruct_continuation<T: Scalar, P: Probability>(
    oracle: &MarginalOracle<T, P>,
) -> Result<ReconstructionResult<T, P>> {
    if oracle.dim() != 2 {
        return Err(Error::InvalidParameter(
            "continuation needs planar directions".into(),
        ));
    }
    let m = oracle.len();
    if m < 3 {
        return Err(Error::InvalidParameter(
            "continuation needs at least three directions".into(),
        ));
    }
    let step_angle = std::f64::consts::TAU / m as f64;
    let angles: Vec<f64> = (0..m).map(|k| oracle.angle(k).as_f64()).collect();
    for k in 0..m {
        let next = angles[(k + 1) % m];
        let delta = (next - angles[k]).rem_euclid(std::f64::consts::TAU);
        if (delta - step_angle).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "directions must be equally spaced counterclockwise on the circle (step {k})"
            )));
        }
    }
    let h = T::lit(step_angle);
    let n = oracle.dists.iter().map(|d| d.len()).max().unwrap_or(0);
    let start = oracle
        .dists
        .iter()
        .position(|d| d.len() == n)
        .expect("nonempty oracle");
    let probs: Vec<P> = oracle.dists[start]
        .atoms()
        .iter()
        .map(|(_, p)| p.clone())
        .collect();
    // history[b][s] = value of branch b after s steps from the start
    let mut history: Vec<Vec<T>> = oracle.dists[start]
        .atoms()
        .iter()
        .map(|(v, _)| {
            let mut h = Vec::with_capacity(m + 1);
            h.push(*v);
            h
        })
        .collect();
    let mut diagnostics = Vec::new();
    let two = T::lit(2.0);
    let slope_at = |hist: &[T]| -> T {
        let s = hist.len() - 1;
        if s >= 2 {
            (T::lit(3.0) * hist[s] - T::lit(4.0) * hist[s - 1] + hist[s - 2]) / (two * h)
        } else if s == 1 {
            (hist[1] - hist[0]) / h
        } else {
            T::zero()
        }
    };

    for step in 1..=m {
        let k = (start + step) % m;
        let predictions: Vec<T> = history
            .iter()
            .map(|hist| {
                let s = hist.len();
                match s {
                    1 => hist[0],
                    2 => two * hist[1] - hist[0],
                    _ => T::lit(3.0) * (hist[s - 1] - hist[s - 2]) + hist[s - 3],
                }
            })
            .collect();
        let atoms = oracle.dists[k].atoms();
        let assign = block_assignment(&predictions, &probs, atoms).ok_or_else(|| {
            Error::OracleInconsistent(format!(
                "direction {k}: atoms cannot be matched to the {n} traced branches"
            ))
        })?;
        for (b, &a) in assign.iter().enumerate() {
            history[b].push(atoms[a].0);
        }
        for a in 0..atoms.len() {
            let sharing: Vec<usize> = (0..n).filter(|&b| assign[b] == a).collect();
            match sharing.len() {
                0 | 1 => {}
                2 => {
                    let (i, j) = (sharing[0], sharing[1]);
                    let (si, sj) = (slope_at(&history[i]), slope_at(&history[j]));
                    let gap = (si - sj).abs();
                    if gap < T::lit(GRADIENT_TIE_TOL) {
                        return Err(Error::GradientTie {
                            direction: k,
                            gap: gap.as_f64(),
                        });
                    }
                    diagnostics.push(
                        Crossing {
                            direction: k,
                            angle: angles[k],
                            branches: (i, j),
                            slopes: (si.as_f64(), sj.as_f64()),
                        }
                        .to_string(),
                    );
                }
                count => {
                    return Err(Error::UnresolvableCrossing {
                        direction: k,
                        branches: count,
                    })
                }
            }
        }
    }
    let merge = T::lit(MERGE_TOL);
    for (b, hist) in history.iter().enumerate() {
        if (hist[m] - hist[0]).abs() > merge {
            return Err(Error::OracleInconsistent(format!(
                "branch {b} does not close up after a full turn ({} vs {})",
                hist[0], hist[m]
            )));
        }
    }
    let realizations = history
        .into_iter()
        .zip(probs)
        .map(|(hist, prob)| {
            let mut support_values = vec![T::zero(); m];
            for (s, v) in hist.into_iter().take(m).enumerate() {
                support_values[(start + s) % m] = v;
            }
            Realization {
                support_values,
                prob,
            }
        })
        .collect();
    let result = ReconstructionResult {
        realizations,
        diagnostics,
    };
    result.validate(&oracle.directions)?;
    Ok(result)
}

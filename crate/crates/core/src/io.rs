//! Reading and writing the text formats used by the command line tool.
//!
//! Everything here is `f64`. Numbers are written by [`fmt_g17`], so output
//! files are byte-for-byte reproducible.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::bodies::{ConvexBody, Vector};
use crate::error::{Error, Result};
use crate::identify::{FiniteSupportDist, MarginalOracle, ReconstructionResult, MERGE_TOL};
use crate::lift::{BodySample, Polygon2D};
use crate::scalar::parse_ratio;
use crate::tuples::CoupledTupleSample;

/// `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// only for very large or small magnitudes. Negative zero prints as `0`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        strip_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", strip_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// A body as written in JSON-lines input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodySpec {
    Singleton { point: Vec<f64> },
    Segment { a: Vec<f64>, b: Vec<f64> },
    Interval { lo: f64, hi: f64 },
    Polytope { vertices: Vec<Vec<f64>> },
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid { shape: Vec<Vec<f64>> },
    L1ball { scales: Vec<f64> },
    Minkowski { terms: Vec<MinkowskiTerm> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiTerm {
    pub coef: f64,
    pub body: BodySpec,
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody<f64>> {
        let v = |c: &[f64]| Vector::new(c.to_vec());
        match self {
            BodySpec::Singleton { point } => Ok(ConvexBody::singleton(v(point)?)),
            BodySpec::Segment { a, b } => ConvexBody::segment(v(a)?, v(b)?),
            BodySpec::Interval { lo, hi } => ConvexBody::interval(*lo, *hi),
            BodySpec::Polytope { vertices } => {
                ConvexBody::polytope(vertices.iter().map(|p| v(p)).collect::<Result<_>>()?)
            }
            BodySpec::Ball { center, radius } => ConvexBody::ball(v(center)?, *radius),
            BodySpec::Ellipsoid { shape } => ConvexBody::ellipsoid(shape.clone()),
            BodySpec::L1ball { scales } => ConvexBody::scaled_l1_ball(scales.clone()),
            BodySpec::Minkowski { terms } => ConvexBody::minkowski(
                terms
                    .iter()
                    .map(|t| Ok((t.coef, t.body.build()?)))
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

/// A weight given either as a number or as a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Number(f64),
    Text(String),
}

/// Group key tying bodies into one tuple observation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObsKey {
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyRecord {
    #[serde(flatten)]
    pub body: BodySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obs: Option<ObsKey>,
}

/// Parsed JSON-lines body file.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyFile {
    pub bodies: Vec<ConvexBody<f64>>,
    /// Raw weights; missing weights count as 1.
    pub raw_weights: Vec<f64>,
    /// Exact weights when every weight is a fraction string (or all are
    /// missing), normalized to sum to one.
    pub exact: Option<Vec<Ratio<i64>>>,
    pub obs: Vec<Option<ObsKey>>,
    /// Whether each line carried an explicit weight.
    pub weight_given: Vec<bool>,
}

/// Reads one body per non-empty line; `#` starts a comment line.
pub fn read_bodies_jsonl<R: Read>(mut reader: R) -> Result<BodyFile> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut bodies = Vec::new();
    let mut raw_weights = Vec::new();
    let mut exact: Option<Vec<Ratio<i64>>> = Some(Vec::new());
    let mut obs = Vec::new();
    let mut weight_given = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rec: BodyRecord = serde_json::from_str(line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        let body = rec
            .body
            .build()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        let (w, r) = match &rec.weight {
            None => (1.0, Some(Ratio::from_integer(1))),
            Some(WeightSpec::Number(x)) => (*x, None),
            Some(WeightSpec::Text(s)) => {
                let r = parse_ratio(s).ok_or_else(|| {
                    Error::Parse(format!("line {}: bad weight {s:?}", lineno + 1))
                })?;
                (r.to_f64().unwrap_or(f64::NAN), Some(r))
            }
        };
        match (exact.as_mut(), r) {
            (Some(ex), Some(r)) => ex.push(r),
            _ => exact = None,
        }
        bodies.push(body);
        raw_weights.push(w);
        obs.push(rec.obs);
        weight_given.push(rec.weight.is_some());
    }
    if bodies.is_empty() {
        return Err(Error::Parse("no bodies in input".into()));
    }
    let exact = match exact {
        Some(ex) => {
            let total = ex.iter().fold(Ratio::zero(), |a, b| a + b);
            if ex.iter().any(|r| *r <= Ratio::zero()) || total.is_zero() {
                return Err(Error::InvalidWeights("weights must be positive".into()));
            }
            Some(ex.into_iter().map(|r| r / total).collect())
        }
        None => None,
    };
    Ok(BodyFile {
        bodies,
        raw_weights,
        exact,
        obs,
        weight_given,
    })
}

impl BodyFile {
    /// The bodies with weights normalized to sum to one.
    pub fn sample(&self) -> Result<BodySample<f64>> {
        match &self.exact {
            Some(ex) => BodySample::normalized(
                self.bodies.clone(),
                ex.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect(),
            ),
            None => BodySample::normalized(self.bodies.clone(), self.raw_weights.clone()),
        }
    }

    /// Groups bodies by their `obs` key (first appearance order) into tuple
    /// observations. Each group's weight is the weight given on any of its
    /// lines (all given weights must agree), defaulting to 1.
    pub fn tuples(&self) -> Result<CoupledTupleSample<f64>> {
        let mut order: Vec<ObsKey> = Vec::new();
        let mut groups: HashMap<ObsKey, (Vec<ConvexBody<f64>>, Option<f64>)> = HashMap::new();
        for (i, body) in self.bodies.iter().enumerate() {
            let key = self.obs[i]
                .clone()
                .ok_or_else(|| Error::Parse(format!("body {i} has no \"obs\" key")))?;
            let entry = groups.entry(key.clone()).or_insert_with(|| {
                order.push(key.clone());
                (Vec::new(), None)
            });
            entry.0.push(body.clone());
            let explicit = self.raw_weights[i];
            if self.weight_given[i] {
                match entry.1 {
                    Some(w) if w != explicit => {
                        return Err(Error::Parse(format!(
                            "conflicting weights within observation {key:?}"
                        )))
                    }
                    _ => entry.1 = Some(explicit),
                }
            }
        }
        let mut rows = Vec::with_capacity(order.len());
        let mut weights = Vec::with_capacity(order.len());
        for key in order {
            let (bodies, w) = groups.remove(&key).expect("group recorded");
            rows.push(bodies);
            weights.push(w.unwrap_or(1.0));
        }
        CoupledTupleSample::normalized(rows, weights)
    }
}

/// Reads `lo,hi[,weight]` rows. A first row that does not parse as numbers
/// is taken as a header. Missing weights count as 1; weights are
/// normalized.
pub fn read_intervals_csv<R: Read>(reader: R) -> Result<BodySample<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let nums: Vec<Option<f64>> = rec.iter().map(|f| f.parse().ok()).collect();
        if i == 0 && nums.iter().any(Option::is_none) {
            continue;
        }
        let field = |k: usize| -> Result<f64> {
            nums.get(k)
                .copied()
                .flatten()
                .ok_or_else(|| Error::Parse(format!("row {}: expected lo,hi[,weight]", i + 1)))
        };
        if !(2..=3).contains(&rec.len()) {
            return Err(Error::Parse(format!("row {}: expected lo,hi[,weight]", i + 1)));
        }
        pairs.push((field(0)?, field(1)?));
        weights.push(if rec.len() == 3 { field(2)? } else { 1.0 });
    }
    if pairs.is_empty() {
        return Err(Error::Parse("no intervals in input".into()));
    }
    let bodies = pairs
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| {
            ConvexBody::interval(lo, hi).map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    BodySample::normalized(bodies, weights)
}

/// Income brackets: code `i` is `[a_i, a_i + width]` with `a_1 = origin`
/// and `a_i = b_{i-1} + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinnedCodeScheme {
    pub width: f64,
    pub origin: f64,
    pub max_code: u32,
}

impl Default for BinnedCodeScheme {
    fn default() -> Self {
        BinnedCodeScheme {
            width: 2499.0,
            origin: 0.0,
            max_code: 40,
        }
    }
}

impl BinnedCodeScheme {
    pub fn new(width: f64, origin: f64, max_code: u32) -> Result<Self> {
        if !width.is_finite() || width <= 0.0 || !origin.is_finite() || max_code == 0 {
            return Err(Error::InvalidParameter(
                "code scheme needs positive width and max_code".into(),
            ));
        }
        Ok(BinnedCodeScheme {
            width,
            origin,
            max_code,
        })
    }

    /// `[a_i, b_i]` for codes `1..=max_code`.
    pub fn interval(&self, code: u32) -> Option<(f64, f64)> {
        if code == 0 || code > self.max_code {
            return None;
        }
        let lo = self.origin + f64::from(code - 1) * (self.width + 1.0);
        Some((lo, lo + self.width))
    }
}

/// Rows dropped during code ingestion.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CodeReport {
    pub accepted: usize,
    /// `(data row number, raw field, reason)`.
    pub rejected: Vec<(usize, String, String)>,
}

impl CodeReport {
    /// One line per distinct reason with its count, sorted.
    pub fn summary(&self) -> Vec<String> {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for (_, _, reason) in &self.rejected {
            *counts.entry(reason.as_str()).or_default() += 1;
        }
        let mut lines: Vec<String> = counts
            .into_iter()
            .map(|(r, c)| format!("rejected {c} rows: {r}"))
            .collect();
        lines.sort();
        lines
    }
}

/// Reads a CSV with a `code` column into a uniform interval sample.
pub fn ingest_codes<R: Read>(
    reader: R,
    scheme: &BinnedCodeScheme,
) -> Result<(BodySample<f64>, CodeReport)> {
    ingest_codes_column(reader, scheme, "code")
}

/// As [`ingest_codes`], reading codes from the named column.
pub fn ingest_codes_column<R: Read>(
    reader: R,
    scheme: &BinnedCodeScheme,
    column: &str,
) -> Result<(BodySample<f64>, CodeReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let col = rdr
        .headers()?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Parse(format!("no {column:?} column")))?;
    let mut report = CodeReport::default();
    let mut bodies = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let raw = rec.get(col).unwrap_or("").to_string();
        let reason = match raw.parse::<u32>() {
            Err(_) => Some("not a positive integer code".to_string()),
            Ok(code) => match scheme.interval(code) {
                Some((lo, hi)) => {
                    bodies.push(ConvexBody::interval(lo, hi)?);
                    None
                }
                None => Some(format!("code outside 1..={}", scheme.max_code)),
            },
        };
        if let Some(reason) = reason {
            report.rejected.push((i + 1, raw, reason));
        }
    }
    report.accepted = bodies.len();
    if bodies.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no usable codes ({} rejected)",
            report.rejected.len()
        )));
    }
    Ok((BodySample::uniform(bodies)?, report))
}

/// Synthetic survey file in the `code` schema: log-normal incomes binned by
/// `scheme`, with incomes beyond the last bracket written as `max_code + 1`.
pub fn synth_codes(n: usize, seed: u64, scheme: &BinnedCodeScheme) -> Result<String> {
    let dist = LogNormal::new(10.0, 0.9)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = scheme.width + 1.0;
    let mut out = String::from("code\n");
    for _ in 0..n {
        let income: f64 = dist.sample(&mut rng);
        let bin = ((income - scheme.origin).max(0.0) / step).floor();
        let code = (bin as u64 + 1).min(u64::from(scheme.max_code) + 1);
        writeln!(out, "{code}").expect("write to string");
    }
    Ok(out)
}

/// `x,y` rows, one per vertex.
pub fn write_polygon_csv<W: Write>(mut w: W, poly: &Polygon2D<f64>) -> Result<()> {
    writeln!(w, "x,y")?;
    for &(x, y) in poly.vertices() {
        writeln!(w, "{},{}", fmt_g17(x), fmt_g17(y))?;
    }
    Ok(())
}

pub fn read_polygon_csv<R: Read>(reader: R) -> Result<Polygon2D<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut vertices = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad polygon row {rec:?}")))
        };
        vertices.push((num(0)?, num(1)?));
    }
    Ok(Polygon2D::new(vertices))
}

/// Filled polygon on a white background, 5% margin, y axis up.
pub fn polygon_svg(poly: &Polygon2D<f64>, size: u32) -> String {
    let vs = poly.vertices();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in vs {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let s = f64::from(size);
    let margin = 0.05 * s;
    let scale = (s - 2.0 * margin) / span;
    let points: Vec<String> = vs
        .iter()
        .map(|&(x, y)| {
            format!(
                "{:.3},{:.3}",
                margin + (x - x0) * scale,
                s - margin - (y - y0) * scale
            )
        })
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <polygon points=\"{}\" fill=\"#9ecae1\" stroke=\"#08519c\" stroke-width=\"1\"/>\n\
         </svg>\n",
        points.join(" ")
    )
}

/// `direction_index,angle,value,prob` rows, atoms in increasing value.
pub fn write_oracle_csv<W: Write>(mut w: W, oracle: &MarginalOracle<f64, f64>) -> Result<()> {
    writeln!(w, "direction_index,angle,value,prob")?;
    for (k, d) in oracle.dists().iter().enumerate() {
        let angle = if oracle.dim() <= 2 { oracle.angle(k) } else { f64::NAN };
        for &(v, p) in d.atoms() {
            writeln!(w, "{k},{},{},{}", fmt_g17(angle), fmt_g17(v), fmt_g17(p))?;
        }
    }
    Ok(())
}

/// Reads an oracle written by [`write_oracle_csv`]. Directions are rebuilt
/// from the angle: `(cos, sin)` for `dim = 2`, the sign of `cos` for
/// `dim = 1`. Probabilities may be decimals or `p/q`.
pub fn read_oracle_csv<R: Read>(reader: R, dim: usize) -> Result<MarginalOracle<f64, f64>> {
    if !(1..=2).contains(&dim) {
        return Err(Error::InvalidParameter(
            "oracle files carry angles, so only dimensions 1 and 2 can be read".into(),
        ));
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("oracle file lacks column {name:?}")))
    };
    let (ci, ca, cv, cp) = (col("direction_index")?, col("angle")?, col("value")?, col("prob")?);
    let mut rows: Vec<(usize, f64, f64, f64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |c: usize| rec.get(c).unwrap_or("");
        let bad = || Error::Parse(format!("bad oracle row {rec:?}"));
        let k: usize = get(ci).parse().map_err(|_| bad())?;
        let a: f64 = get(ca).parse().map_err(|_| bad())?;
        let v: f64 = get(cv).parse().map_err(|_| bad())?;
        let p = get(cp)
            .parse::<f64>()
            .ok()
            .or_else(|| parse_ratio(get(cp)).and_then(|r| r.to_f64()))
            .ok_or_else(bad)?;
        rows.push((k, a, v, p));
    }
    let count = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
    let mut angles = vec![None; count];
    let mut atoms: Vec<Vec<(f64, f64)>> = vec![Vec::new(); count];
    for (k, a, v, p) in rows {
        match angles[k] {
            Some(prev) if prev != a => {
                return Err(Error::Parse(format!("direction {k} has two angles")))
            }
            _ => angles[k] = Some(a),
        }
        atoms[k].push((v, p));
    }
    let mut directions = Vec::with_capacity(count);
    let mut dists = Vec::with_capacity(count);
    for (k, (angle, atoms)) in angles.into_iter().zip(atoms).enumerate() {
        let a = angle.ok_or_else(|| Error::Parse(format!("direction {k} missing")))?;
        directions.push(match dim {
            1 => Vector::scalar(if a.cos() >= 0.0 { 1.0 } else { -1.0 }),
            _ => Vector::new(vec![a.cos(), a.sin()])?,
        });
        dists.push(FiniteSupportDist::new(atoms, MERGE_TOL)?);
    }
    MarginalOracle::new(directions, dists)
}

/// `realization_index,direction_index,value,prob` rows.
pub fn write_reconstruction_csv<W: Write>(
    mut w: W,
    result: &ReconstructionResult<f64, f64>,
) -> Result<()> {
    writeln!(w, "realization_index,direction_index,value,prob")?;
    for (i, r) in result.realizations.iter().enumerate() {
        for (k, &v) in r.support_values.iter().enumerate() {
            writeln!(w, "{i},{k},{},{}", fmt_g17(v), fmt_g17(r.prob))?;
        }
    }
    Ok(())
}

/// As [`write_reconstruction_csv`] with exact probabilities printed `p/q`.
pub fn write_reconstruction_csv_exact<W: Write>(
    mut w: W,
    result: &ReconstructionResult<f64, Ratio<i64>>,
) -> Result<()> {
    writeln!(w, "realization_index,direction_index,value,prob")?;
    for (i, r) in result.realizations.iter().enumerate() {
        for (k, &v) in r.support_values.iter().enumerate() {
            writeln!(w, "{i},{k},{},{}", fmt_g17(v), r.prob)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identify::marginal_oracle;
    use crate::order::angle_path;

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_g17(1.5), "1.5");
        assert_eq!(fmt_g17(3.5), "3.5");
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(-0.0), "0");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(-2.0), "-2");
        assert_eq!(fmt_g17(4.0 / 9.0), "0.44444444444444442");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(27204.4), "27204.400000000001");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(1.25e-7), "1.2499999999999999e-07");
        assert_eq!(fmt_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_g17(123456789012345680.0), "1.2345678901234568e+17");
        assert_eq!(fmt_g17(f64::INFINITY), "inf");
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 4.0 / 9.0, 12345.678] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn bin_map() {
        let s = BinnedCodeScheme::default();
        assert_eq!(s.interval(1), Some((0.0, 2499.0)));
        assert_eq!(s.interval(2), Some((2500.0, 4999.0)));
        assert_eq!(s.interval(40), Some((97500.0, 99999.0)));
        assert_eq!(s.interval(41), None);
        assert_eq!(s.interval(0), None);
    }

    #[test]
    fn code_ingestion_reports_rejections() {
        let csv = "id,code\n1,1\n2,2\n3,41\n4,x\n5,2\n6,-3\n";
        let (sample, report) = ingest_codes(csv.as_bytes(), &BinnedCodeScheme::default()).unwrap();
        assert_eq!(report.accepted, 3);
        assert_eq!(report.rejected.len(), 3);
        assert_eq!(report.rejected[0], (3, "41".into(), "code outside 1..=40".into()));
        assert_eq!(
            sample.interval_endpoints().unwrap(),
            vec![(0.0, 2499.0), (2500.0, 4999.0), (2500.0, 4999.0)]
        );
        assert!(ingest_codes("code\n41\n".as_bytes(), &BinnedCodeScheme::default()).is_err());
        assert!(ingest_codes("income\n1\n".as_bytes(), &BinnedCodeScheme::default()).is_err());
    }

    #[test]
    fn synthetic_codes_are_reproducible() {
        let s = BinnedCodeScheme::default();
        let a = synth_codes(500, 7, &s).unwrap();
        assert_eq!(a, synth_codes(500, 7, &s).unwrap());
        assert_ne!(a, synth_codes(500, 8, &s).unwrap());
        let (sample, report) = ingest_codes(a.as_bytes(), &s).unwrap();
        assert_eq!(sample.len() + report.rejected.len(), 500);
        assert!(report.rejected.iter().all(|r| r.1 == "41"));
    }

    #[test]
    fn interval_csv() {
        let s = read_intervals_csv("lo,hi\n1,3\n2,4\n".as_bytes()).unwrap();
        assert_eq!(s.weights(), &[0.5, 0.5]);
        let s = read_intervals_csv("1,3,1\n2,4,3\n".as_bytes()).unwrap();
        assert_eq!(s.weights(), &[0.25, 0.75]);
        assert!(read_intervals_csv("3,1\n".as_bytes()).is_err());
        assert!(read_intervals_csv("lo,hi\n".as_bytes()).is_err());
        assert!(read_intervals_csv("1,2\n1,x\n".as_bytes()).is_err());
    }

    #[test]
    fn jsonl_bodies() {
        let text = r#"
# a comment
{"type":"interval","lo":1,"hi":3,"weight":"1/3"}
{"type":"interval","lo":2,"hi":4,"weight":"2/3"}
"#;
        let f = read_bodies_jsonl(text.as_bytes()).unwrap();
        assert_eq!(f.exact, Some(vec![Ratio::new(1, 3), Ratio::new(2, 3)]));
        let s = f.sample().unwrap();
        assert_eq!(s.weights(), &[1.0 / 3.0, 2.0 / 3.0]);

        let text = r#"{"type":"ball","center":[0,0],"radius":1,"weight":2}
{"type":"polytope","vertices":[[0,0],[1,0],[0,1]]}
{"type":"ellipsoid","shape":[[2,0],[0,1]]}
{"type":"l1ball","scales":[1,2]}
{"type":"singleton","point":[1,1]}
{"type":"segment","a":[0,0],"b":[1,1]}
{"type":"minkowski","terms":[{"coef":0.5,"body":{"type":"ball","center":[1,0],"radius":1}}]}"#;
        let f = read_bodies_jsonl(text.as_bytes()).unwrap();
        assert_eq!(f.bodies.len(), 7);
        assert!(f.exact.is_none());
        let s = f.sample().unwrap();
        assert_eq!(s.weights()[0], 0.25);

        assert!(read_bodies_jsonl(r#"{"type":"cube","side":1}"#.as_bytes()).is_err());
        assert!(read_bodies_jsonl(r#"{"type":"interval","lo":3,"hi":1}"#.as_bytes()).is_err());
        assert!(read_bodies_jsonl(r#"{"type":"interval","lo":1,"hi":2,"weight":"x"}"#.as_bytes()).is_err());
        assert!(read_bodies_jsonl("".as_bytes()).is_err());
    }

    #[test]
    fn jsonl_tuples() {
        let text = r#"{"type":"interval","lo":1,"hi":3,"obs":1}
{"type":"interval","lo":1,"hi":3,"obs":1}
{"type":"interval","lo":2,"hi":4,"obs":"b","weight":3}
{"type":"interval","lo":2,"hi":4,"obs":"b"}"#;
        let f = read_bodies_jsonl(text.as_bytes()).unwrap();
        let t = f.tuples().unwrap();
        assert_eq!(t.arity(), 2);
        assert_eq!(t.weights(), &[0.25, 0.75]);
        let ragged = r#"{"type":"interval","lo":1,"hi":3,"obs":1}
{"type":"interval","lo":2,"hi":4,"obs":2}
{"type":"interval","lo":2,"hi":4,"obs":2}"#;
        assert!(read_bodies_jsonl(ragged.as_bytes()).unwrap().tuples().is_err());
        let unkeyed = r#"{"type":"interval","lo":1,"hi":3}"#;
        assert!(read_bodies_jsonl(unkeyed.as_bytes()).unwrap().tuples().is_err());
    }

    #[test]
    fn oracle_round_trip() {
        let s = BodySample::new(
            vec![
                ConvexBody::ball(Vector::from_f64(&[1.0, 0.0]), 1.0).unwrap(),
                ConvexBody::ball(Vector::from_f64(&[-1.0, 0.5]), 0.5).unwrap(),
            ],
            vec![0.25, 0.75],
        )
        .unwrap();
        let o = marginal_oracle(&s, &angle_path(36)).unwrap();
        let mut buf = Vec::new();
        write_oracle_csv(&mut buf, &o).unwrap();
        let back = read_oracle_csv(buf.as_slice(), 2).unwrap();
        assert_eq!(back.dists(), o.dists());
        for (a, b) in back.directions().iter().zip(o.directions()) {
            assert!(a.add(&b.scale(-1.0)).norm() < 1e-15);
        }
        let o1 = marginal_oracle(
            &BodySample::points_1d(&[1.0, 2.0]).unwrap(),
            &[Vector::scalar(1.0), Vector::scalar(-1.0)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_oracle_csv(&mut buf, &o1).unwrap();
        assert_eq!(read_oracle_csv(buf.as_slice(), 1).unwrap(), o1);
    }

    #[test]
    fn polygon_csv_round_trip() {
        let p = Polygon2D::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]);
        let mut buf = Vec::new();
        write_polygon_csv(&mut buf, &p).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "x,y\n0,0\n1,0\n1,1\n");
        assert_eq!(read_polygon_csv(buf.as_slice()).unwrap(), p);
        assert!(polygon_svg(&p, 200).contains("<polygon points=\"10.000,190.000 190.000,190.000 190.000,10.000\""));
    }
}

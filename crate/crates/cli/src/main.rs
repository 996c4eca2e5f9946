//! `liftexp`: lift expectations of random convex bodies from the command line.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lift_core::identify::{
    marginal_oracle, marginal_oracle_with_probs, reconstruct_continuation,
    reconstruct_distinct_probs, MarginalOracle, ReconstructionResult,
};
use lift_core::io::{
    fmt_g17, ingest_codes_column, polygon_svg, read_bodies_jsonl, read_intervals_csv, read_oracle_csv,
    synth_codes, write_oracle_csv, write_polygon_csv, write_reconstruction_csv,
    write_reconstruction_csv_exact, BinnedCodeScheme, BodyFile,
};
use lift_core::lift::{
    avar_interval, expectation_support, gini_area, hoeffding_support, outlier_witness,
    polygon_1d, trimmed_region_support,
};
use lift_core::order::{angle_path, inclusion_witness, DirectionGrid};
use lift_core::tuples::{tuple_lift_support, CoupledTupleSample};
use lift_core::{Error, Sample, Vec64};

#[derive(Parser, Debug)]
#[command(name = "liftexp", version, about = "Lift expectations of random convex bodies")]
struct Cli {
    /// Seed for random direction grids (dimension 3 and up).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance for inclusion and outlier checks.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// Number of directions (angles in the plane, random directions in
    /// higher dimension; dimension one always uses +1 and -1).
    #[arg(long, global = true, default_value_t = 360)]
    dirs: usize,
    /// Bracket width for code files.
    #[arg(long, global = true, default_value_t = 2499.0)]
    width: f64,
    /// Lower end of the first bracket for code files.
    #[arg(long, global = true, default_value_t = 0.0)]
    origin: f64,
    /// Largest valid code; larger codes are rejected.
    #[arg(long, global = true, default_value_t = 40)]
    max_code: u32,
    /// Column holding bracket codes; a CSV with this header field is read
    /// as codes rather than intervals.
    #[arg(long, global = true, default_value = "code")]
    code_column: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Selection expectation: `lo,hi` in dimension one, support values otherwise.
    Mean { input: PathBuf },
    /// Lift expectation polygon of a one-dimensional sample.
    Polygon {
        input: PathBuf,
        /// Write vertices here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Zonoid-trimmed region at level alpha.
    Trim {
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
    },
    /// Flags sample bodies sticking out of the alpha-trimmed region.
    Outliers {
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
    },
    /// Whether the lift expectation of A lies inside that of B.
    Order { a: PathBuf, b: PathBuf },
    /// Lorenz-polygon area and the Gini mean difference bound.
    Gini { input: PathBuf },
    /// Average value-at-risk interval at level alpha.
    Avar {
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
    },
    /// Expected convex hull of 1..=n independent copies.
    Hoeffding {
        input: PathBuf,
        #[arg(long)]
        n: u32,
    },
    /// Recovers realizations from one-dimensional support laws.
    Reconstruct {
        /// Body file (JSON lines or interval CSV).
        input: Option<PathBuf>,
        /// Read the laws from an oracle CSV instead of bodies.
        #[arg(long, conflicts_with = "input")]
        oracle: Option<PathBuf>,
        /// Dimension of the directions in an oracle file (1 or 2).
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Also write the oracle built from the bodies.
        #[arg(long)]
        emit_oracle: Option<PathBuf>,
    },
    /// Tuple lift support on a grid; bodies grouped by "obs", or self-tuples.
    TupleEval {
        input: PathBuf,
        /// Comma-separated u0 values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,0,1")]
        u0: Vec<f64>,
        /// Tuple length for inputs without "obs" keys.
        #[arg(long, default_value_t = 1)]
        arity: usize,
    },
    /// Synthetic survey file with a "code" column.
    SynthCodes {
        #[arg(long)]
        n: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Mode {
    Distinct,
    Continuation,
}

enum Failure {
    Lib(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    match run(&cli, &mut out) {
        Ok(()) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_algorithmic() { 3 } else { 2 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_input(path: &Path) -> Outcome<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
    }
}

enum Input {
    Bodies(BodyFile),
    Sample(Sample),
}

/// JSON lines by extension or leading `{`; otherwise CSV, as codes when a
/// header field names the code column, else intervals.
fn load(cli: &Cli, path: &Path) -> Outcome<Input> {
    let text = read_input(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
    if ext == "jsonl" || ext == "json" || first.is_some_and(|l| l.starts_with('{')) {
        return Ok(Input::Bodies(read_bodies_jsonl(text.as_bytes())?));
    }
    let is_codes = first.is_some_and(|l| {
        l.split(',')
            .any(|f| f.trim().trim_matches('"') == cli.code_column)
    });
    if is_codes {
        let scheme = BinnedCodeScheme::new(cli.width, cli.origin, cli.max_code)?;
        let (sample, report) = ingest_codes_column(text.as_bytes(), &scheme, &cli.code_column)?;
        for line in report.summary() {
            eprintln!("{line}");
        }
        return Ok(Input::Sample(sample));
    }
    Ok(Input::Sample(read_intervals_csv(text.as_bytes())?))
}

fn load_sample(cli: &Cli, path: &Path) -> Outcome<Sample> {
    match load(cli, path)? {
        Input::Bodies(f) => Ok(f.sample()?),
        Input::Sample(s) => Ok(s),
    }
}

fn grid(cli: &Cli, dim: usize) -> Outcome<DirectionGrid<f64>> {
    Ok(DirectionGrid::for_dim(dim, cli.dirs, cli.seed)?)
}

fn push_row(out: &mut String, fields: impl IntoIterator<Item = String>) {
    let row: Vec<String> = fields.into_iter().collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

fn direction_header(dim: usize) -> impl Iterator<Item = String> {
    (1..=dim).map(|c| format!("u{c}"))
}

fn coords(u: &Vec64) -> impl Iterator<Item = String> + '_ {
    u.coords().iter().map(|&x| fmt_g17(x))
}

/// `lo,hi` from the supports at `-1` and `+1`.
fn interval_line(
    out: &mut String,
    f: impl Fn(&Vec64) -> lift_core::Result<f64>,
) -> Outcome<()> {
    let hi = f(&Vec64::scalar(1.0))?;
    let lo = -f(&Vec64::scalar(-1.0))?;
    push_row(out, [fmt_g17(lo), fmt_g17(hi)]);
    Ok(())
}

/// `direction_index,u1..ud,value` over the grid.
fn support_table(
    cli: &Cli,
    out: &mut String,
    dim: usize,
    f: impl Fn(&Vec64) -> lift_core::Result<f64>,
) -> Outcome<()> {
    let g = grid(cli, dim)?;
    push_row(
        out,
        std::iter::once("direction_index".to_string())
            .chain(direction_header(dim))
            .chain(std::iter::once("value".to_string())),
    );
    for (k, u) in g.vectors().iter().enumerate() {
        let v = f(u)?;
        push_row(
            out,
            std::iter::once(k.to_string())
                .chain(coords(u))
                .chain(std::iter::once(fmt_g17(v))),
        );
    }
    Ok(())
}

fn run(cli: &Cli, out: &mut String) -> Outcome<()> {
    match &cli.command {
        Command::Mean { input } => {
            let s = load_sample(cli, input)?;
            if s.dim() == 1 {
                interval_line(out, |u| expectation_support(&s, u))
            } else {
                support_table(cli, out, s.dim(), |u| expectation_support(&s, u))
            }
        }
        Command::Polygon { input, csv, svg } => {
            let s = load_sample(cli, input)?;
            let poly = polygon_1d(&s)?;
            let mut buf = Vec::new();
            write_polygon_csv(&mut buf, &poly)?;
            match csv {
                Some(path) => fs::write(path, &buf)?,
                None => out.push_str(&String::from_utf8(buf).expect("utf-8 csv")),
            }
            if let Some(path) = svg {
                fs::write(path, polygon_svg(&poly, 400))?;
            }
            Ok(())
        }
        Command::Trim { input, alpha } => {
            let s = load_sample(cli, input)?;
            if s.dim() == 1 {
                interval_line(out, |u| trimmed_region_support(&s, *alpha, u))
            } else {
                support_table(cli, out, s.dim(), |u| trimmed_region_support(&s, *alpha, u))
            }
        }
        Command::Outliers { input, alpha } => {
            let s = load_sample(cli, input)?;
            let g = grid(cli, s.dim())?;
            push_row(out, ["index", "outlier", "direction_index"].map(String::from));
            for (i, body) in s.bodies().iter().enumerate() {
                let w = outlier_witness(&s, *alpha, body, g.vectors(), cli.tol)?;
                push_row(
                    out,
                    [
                        i.to_string(),
                        w.is_some().to_string(),
                        w.map(|k| k.to_string()).unwrap_or_default(),
                    ],
                );
            }
            Ok(())
        }
        Command::Order { a, b } => {
            let sa = load_sample(cli, a)?;
            let sb = load_sample(cli, b)?;
            let g = grid(cli, sa.dim())?;
            let w = inclusion_witness(&sa, &sb, &g, cli.tol)?;
            push_row(out, ["included".to_string(), w.is_none().to_string()]);
            if let Some(w) = w {
                push_row(
                    out,
                    std::iter::once("direction_index".to_string())
                        .chain(direction_header(sa.dim()))
                        .chain(["t".to_string(), "excess".to_string()]),
                );
                push_row(
                    out,
                    std::iter::once(w.direction_index.to_string())
                        .chain(coords(&w.direction))
                        .chain([
                            w.t.map(fmt_g17).unwrap_or_else(|| "inf".into()),
                            fmt_g17(w.excess),
                        ]),
                );
            }
            Ok(())
        }
        Command::Gini { input } => {
            let g = gini_area(&load_sample(cli, input)?)?;
            push_row(out, ["area", "gmd_upper"].map(String::from));
            push_row(out, [fmt_g17(g.area), fmt_g17(g.gmd_upper)]);
            Ok(())
        }
        Command::Avar { input, alpha } => {
            let (lo, hi) = avar_interval(&load_sample(cli, input)?, *alpha)?;
            push_row(out, [fmt_g17(lo), fmt_g17(hi)]);
            Ok(())
        }
        Command::Hoeffding { input, n } => {
            if *n == 0 {
                return Err(Failure::Usage("--n must be positive".into()));
            }
            let s = load_sample(cli, input)?;
            let g = grid(cli, s.dim())?;
            push_row(
                out,
                ["n".to_string(), "direction_index".to_string()]
                    .into_iter()
                    .chain(direction_header(s.dim()))
                    .chain(std::iter::once("value".to_string())),
            );
            for k in 1..=*n {
                for (j, u) in g.vectors().iter().enumerate() {
                    let v = hoeffding_support(&s, k, u)?;
                    push_row(
                        out,
                        [k.to_string(), j.to_string()]
                            .into_iter()
                            .chain(coords(u))
                            .chain(std::iter::once(fmt_g17(v))),
                    );
                }
            }
            Ok(())
        }
        Command::Reconstruct {
            input,
            oracle,
            dim,
            mode,
            emit_oracle,
        } => reconstruct(cli, out, input.as_deref(), oracle.as_deref(), *dim, *mode, emit_oracle.as_deref()),
        Command::TupleEval { input, u0, arity } => tuple_eval(cli, out, input, u0, *arity),
        Command::SynthCodes { n } => {
            let scheme = BinnedCodeScheme::new(cli.width, cli.origin, cli.max_code)?;
            out.push_str(&synth_codes(*n, cli.seed, &scheme)?);
            Ok(())
        }
    }
}

fn path_for(cli: &Cli, dim: usize) -> Outcome<Vec<Vec64>> {
    match dim {
        1 => Ok(vec![Vec64::scalar(1.0), Vec64::scalar(-1.0)]),
        2 => Ok(angle_path(cli.dirs)),
        _ => Ok(grid(cli, dim)?.vectors().to_vec()),
    }
}

fn report<P>(result: &ReconstructionResult<f64, P>) {
    for d in &result.diagnostics {
        eprintln!("{d}");
    }
}

fn reconstruct(
    cli: &Cli,
    out: &mut String,
    input: Option<&Path>,
    oracle_path: Option<&Path>,
    dim: usize,
    mode: Mode,
    emit_oracle: Option<&Path>,
) -> Outcome<()> {
    let solve = |o: &MarginalOracle<f64, f64>| match mode {
        Mode::Distinct => reconstruct_distinct_probs(o),
        Mode::Continuation => reconstruct_continuation(o),
    };
    let mut buf = Vec::new();
    if let Some(p) = oracle_path {
        let o = read_oracle_csv(read_input(p)?.as_bytes(), dim)?;
        let r = solve(&o)?;
        report(&r);
        write_reconstruction_csv(&mut buf, &r)?;
    } else {
        let p = input.ok_or_else(|| Failure::Usage("give a body file or --oracle".into()))?;
        let (sample, exact) = match load(cli, p)? {
            Input::Bodies(f) => (f.sample()?, f.exact.clone()),
            Input::Sample(s) => (s, None),
        };
        let path = path_for(cli, sample.dim())?;
        let o = marginal_oracle(&sample, &path)?;
        if let Some(e) = emit_oracle {
            let mut ob = Vec::new();
            write_oracle_csv(&mut ob, &o)?;
            fs::write(e, ob)?;
        }
        match (mode, exact) {
            (Mode::Distinct, Some(probs)) => {
                let o = marginal_oracle_with_probs(sample.bodies(), &probs, &path)?;
                let r = reconstruct_distinct_probs(&o)?;
                report(&r);
                write_reconstruction_csv_exact(&mut buf, &r)?;
            }
            _ => {
                let r = solve(&o)?;
                report(&r);
                write_reconstruction_csv(&mut buf, &r)?;
            }
        }
    }
    out.push_str(&String::from_utf8(buf).expect("utf-8 csv"));
    Ok(())
}

fn tuple_eval(cli: &Cli, out: &mut String, input: &Path, u0s: &[f64], arity: usize) -> Outcome<()> {
    let tuples = match load(cli, input)? {
        Input::Bodies(f) if f.obs.iter().all(Option::is_some) => f.tuples()?,
        Input::Bodies(f) => CoupledTupleSample::self_tuple(&f.sample()?, arity)?,
        Input::Sample(s) => CoupledTupleSample::self_tuple(&s, arity)?,
    };
    let grids = tuples
        .slot_dims()
        .iter()
        .map(|&d| grid(cli, d))
        .collect::<Outcome<Vec<_>>>()?;
    let mut header = vec!["u0".to_string()];
    for (j, &d) in tuples.slot_dims().iter().enumerate() {
        header.extend((1..=d).map(|c| format!("u{}_{c}", j + 1)));
    }
    header.push("value".into());
    push_row(out, header);
    let n = grids.len();
    let mut idx = vec![0usize; n];
    'outer: loop {
        let us: Vec<Vec64> = idx.iter().zip(&grids).map(|(&k, g)| g.vectors()[k].clone()).collect();
        for &u0 in u0s {
            let v = tuple_lift_support(&tuples, u0, &us)?;
            let mut row = vec![fmt_g17(u0)];
            for u in &us {
                row.extend(coords(u));
            }
            row.push(fmt_g17(v));
            push_row(out, row);
        }
        for slot in (0..n).rev() {
            idx[slot] += 1;
            if idx[slot] < grids[slot].len() {
                continue 'outer;
            }
            idx[slot] = 0;
        }
        break;
    }
    Ok(())
}

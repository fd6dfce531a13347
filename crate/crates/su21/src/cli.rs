//! Command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure, 2 invalid input,
//! 3 transition parameter, 4 not decomposable within the bound,
//! 5 decomposability unknown.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::atlas::{self, Atlas, Basis, Status};
use crate::decomposer::{self, AlphaLength, Decomposition, Length};
use crate::hermitian::form_matrix;
use crate::isometry::{deltoid_f, negative_type_eigenvalue, normalize_lift, ClassKey, Isometry, Parameter};
use crate::unfolded::{qf, QPoint, WallSegment, Q};
use crate::{omega_powers, Error, Mat3, C64};

#[derive(Parser, Debug)]
#[command(name = "su21", version, about = "Isometries of the complex hyperbolic plane")]
pub struct Cli {
    /// Residual bound for emitted decompositions.
    #[arg(long, global = true, default_value_t = decomposer::RESIDUAL_TOL)]
    pub tol: f64,
    /// Sample budget for bounded searches.
    #[arg(long, global = true, default_value_t = decomposer::DEFAULT_BUDGET)]
    pub budget: usize,
    /// Seed recorded in reports; searches are deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify a matrix given as JSON `{"re": [[..]], "im": [[..]]}` (path or `-`).
    Classify { matrix: PathBuf },
    /// Chambers and walls for `alpha = e^{i pi p/q}`.
    Atlas {
        /// Angle as `p/q` (multiple of pi).
        a: String,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Shortest decomposition into special elliptic factors.
    Decompose {
        matrix: PathBuf,
        /// Angle as `p/q` (multiple of pi).
        a: String,
        #[arg(long, default_value_t = 4)]
        max_length: usize,
    },
    /// Atlas summaries over a grid of parameters.
    Sweep {
        from: String,
        to: String,
        /// Number of grid points.
        steps: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn invalid(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: msg.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::TransitionParameter(_) => 3,
            Error::NotDecomposable => 4,
            Error::Unknown(_) => 5,
            Error::SearchExhausted { .. } | Error::ConjugationFailed(_) | Error::IllConditioned(_) => 1,
            _ => 2,
        };
        let mut message = e.to_string();
        if code == 3 {
            message.push_str(" (try a nearby p/q)");
        }
        CliError { code, message }
    }
}

fn io_err(p: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: 1,
        message: format!("{}: {e}", p.display()),
    }
}

/// Parses `p/q`, `p/q pi` or an integer as a rational multiple of `pi`.
pub fn parse_pi_fraction(s: &str) -> Result<Q, CliError> {
    let t = s.trim();
    let t = t
        .strip_suffix("pi")
        .map(|x| x.trim_end().trim_end_matches('*').trim_end())
        .unwrap_or(t);
    let bad = || CliError::invalid(format!("angle {s:?} must be p/q (a rational multiple of pi)"));
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim().parse::<i64>().map_err(|_| bad())?, d.trim().parse::<i64>().map_err(|_| bad())?),
        None => (t.parse::<i64>().map_err(|_| bad())?, 1),
    };
    if d == 0 {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

fn parameter_of(a: Q) -> Result<Parameter, CliError> {
    Ok(Parameter::from_pi_fraction(*a.numer(), *a.denom())?)
}

/// Row-major real and imaginary parts of a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixInput {
    pub re: [[f64; 3]; 3],
    pub im: [[f64; 3]; 3],
}

impl MatrixInput {
    pub fn from_matrix(m: &Mat3) -> Self {
        let mut re = [[0.0; 3]; 3];
        let mut im = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                re[i][j] = m[(i, j)].re;
                im[i][j] = m[(i, j)].im;
            }
        }
        MatrixInput { re, im }
    }

    pub fn to_matrix(&self) -> Mat3 {
        Mat3::from_fn(|i, j| C64::new(self.re[i][j], self.im[i][j]))
    }

    /// Normalized `SU(2,1)` lift.
    pub fn isometry(&self) -> Result<Isometry, CliError> {
        let m = self.to_matrix();
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CliError::invalid("matrix entries must be finite"));
        }
        normalize_lift(&m).map(|(f, _)| f).map_err(|e| {
            CliError::invalid(format!("{e}: expected M* J M = l J with l > 0 for J = diag(1,1,-1)"))
        })
    }
}

fn read_matrix(p: &Path) -> Result<MatrixInput, CliError> {
    let text = if p == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| io_err(p, e))?;
        s
    } else {
        std::fs::read_to_string(p).map_err(|e| io_err(p, e))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("matrix JSON: {e}")))
}

fn cpx(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Classification report.
pub fn cmd_classify(input: &MatrixInput) -> Result<Value, CliError> {
    let f = input.isometry()?;
    let key: ClassKey = f.classify()?;
    let tr = f.trace();
    Ok(json!({
        "kind": key.kind,
        "key": key,
        "trace": cpx(tr),
        "eigenvalues": f.eigenvalues().map(cpx),
        "angle_pair_over_pi": key.angle_pair.map(|(x, y)| [x / std::f64::consts::PI, y / std::f64::consts::PI]),
        "deltoid_f": deltoid_f(tr),
        "negative_type_eigenvalue": negative_type_eigenvalue(&f).map(cpx),
    }))
}

/// Serialized chamber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChamberReport {
    pub vertices: Vec<QPoint>,
    pub status: Status,
    pub basis: Basis,
    pub witness: Option<QPoint>,
}

/// Serialized atlas with exact coordinates in units of `pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasReport {
    pub schema: u32,
    pub alpha: Q,
    pub chambers: Vec<ChamberReport>,
    pub walls: Vec<WallSegment>,
}

impl AtlasReport {
    pub fn new(at: &Atlas) -> Self {
        AtlasReport {
            schema: 1,
            alpha: at.a,
            chambers: at
                .chambers
                .iter()
                .map(|c| ChamberReport {
                    vertices: c.polygon.clone(),
                    status: c.status,
                    basis: c.basis,
                    witness: c.witness,
                })
                .collect(),
            walls: at.walls.clone(),
        }
    }
}

/// CSV of wall segments.
pub fn walls_csv(walls: &[WallSegment]) -> String {
    let mut s = String::from("seg_id,line_label,x1_num,x1_den,y1_num,y1_den,x2_num,x2_den,y2_num,y2_den\n");
    for (i, w) in walls.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{},{},{},{}",
            w.label,
            w.p.x.numer(),
            w.p.x.denom(),
            w.p.y.numer(),
            w.p.y.denom(),
            w.q.x.numer(),
            w.q.x.denom(),
            w.q.y.numer(),
            w.q.y.denom()
        );
    }
    s
}

/// SVG drawing of `T` with `theta1` horizontal and `theta2` vertical.
pub fn atlas_svg(at: &Atlas) -> String {
    const S: f64 = 200.0;
    const M: f64 = 40.0;
    let px = |p: &QPoint| (M + qf(p.x) * S, M + (2.0 - qf(p.y)) * S);
    let size = 2.0 * S + 2.0 * M;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size:.0}\" height=\"{size:.0}\" viewBox=\"0 0 {size:.0} {size:.0}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");
    for (i, c) in at.chambers.iter().enumerate() {
        let fill = match c.status {
            Status::Full => "#cccccc",
            Status::Empty => "#ffffff",
            Status::Unknown => "#f4d03f",
        };
        let pts: Vec<String> = c
            .polygon
            .iter()
            .map(|p| {
                let (x, y) = px(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            s,
            "<polygon id=\"chamber-{i}\" points=\"{}\" fill=\"{fill}\" stroke=\"none\"/>",
            pts.join(" ")
        );
    }
    let z = Q::from_integer(0);
    let two = Q::from_integer(2);
    let corners = [QPoint::new(z, z), QPoint::new(two, z), QPoint::new(two, two)];
    let pts: Vec<String> = corners
        .iter()
        .map(|p| {
            let (x, y) = px(p);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let _ = writeln!(
        s,
        "<polygon points=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>",
        pts.join(" ")
    );
    for (i, w) in at.walls.iter().enumerate() {
        let (x1, y1) = px(&w.p);
        let (x2, y2) = px(&w.q);
        let _ = writeln!(
            s,
            "<line id=\"wall-{i}\" x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"#000000\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\" font-family=\"sans-serif\">{}</text>",
            (x1 + x2) / 2.0 + 3.0,
            (y1 + y2) / 2.0 - 3.0,
            w.label
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{M:.0}\" y=\"{:.0}\" font-size=\"13\" font-family=\"sans-serif\">a = {} pi</text>",
        M - 15.0,
        at.a
    );
    s.push_str("</svg>\n");
    s
}

fn write_file(p: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(p, contents).map_err(|e| io_err(p, e))
}

pub fn cmd_atlas(a: Q, svg: Option<&Path>, json_out: Option<&Path>, csv: Option<&Path>) -> Result<Value, CliError> {
    let two_thirds = Q::new(2, 3);
    if a <= Q::from_integer(0) || a >= two_thirds {
        return Err(Error::ParameterOutOfRange(format!("a = {a} pi must lie in (0, 2/3)")).into());
    }
    let at = atlas::chambers(&parameter_of(a)?)?;
    let report = AtlasReport::new(&at);
    if let Some(p) = svg {
        write_file(p, &atlas_svg(&at))?;
    }
    if let Some(p) = json_out {
        let text = serde_json::to_string_pretty(&report).expect("serializable report");
        write_file(p, &text)?;
    }
    if let Some(p) = csv {
        write_file(p, &walls_csv(&at.walls))?;
    }
    Ok(json!({
        "schema": 1,
        "alpha": a,
        "summary": at.summary(),
        "report": report,
    }))
}

/// `M = a I + (a^{-2} - a) p p* J / <p,p>` recomputed from raw coordinates.
fn reflection_matrix(a: C64, p: &[C64; 3]) -> Mat3 {
    let j = form_matrix();
    let v = crate::Vec3::new(p[0], p[1], p[2]);
    let n = (v.adjoint() * j * v)[(0, 0)];
    let outer = v * v.adjoint() * j;
    Mat3::identity() * a + outer * ((a.powi(-2) - a) / n)
}

/// Residual of a decomposition recomputed from its emitted numbers.
pub fn reverify(target: &Isometry, d: &Decomposition) -> f64 {
    let mut m = Mat3::identity();
    for (a, p) in d.params.iter().zip(&d.centers) {
        let c = [p.coords[0], p.coords[1], p.coords[2]];
        m = reflection_matrix(a.value(), &c) * m;
    }
    omega_powers()
        .iter()
        .map(|w| (target.matrix() - m * *w).norm())
        .fold(f64::INFINITY, f64::min)
}

pub fn cmd_decompose(input: &MatrixInput, a: Q, max_length: usize, cli: &Cli) -> Result<Value, CliError> {
    let f = input.isometry()?;
    let alpha = parameter_of(a)?;
    let AlphaLength { length, decomposition: d } = decomposer::shortest(&f, &alpha, max_length, cli.budget)?;
    let check = reverify(&f, &d);
    if !(check <= cli.tol) || !(d.residual <= cli.tol) {
        return Err(CliError {
            code: 1,
            message: format!("certificate failed: residual {check:e} exceeds {:e}", cli.tol),
        });
    }
    let centers: Vec<[[f64; 2]; 3]> = d
        .centers
        .iter()
        .map(|p| [cpx(p.coords[0]), cpx(p.coords[1]), cpx(p.coords[2])])
        .collect();
    Ok(json!({
        "n": d.len(),
        "length": match length { Length::Exact(n) => json!(n), Length::Unknown => json!("3 or 4") },
        "alpha": a,
        "delta": d.delta,
        "delta_value": cpx(d.delta_value()),
        "centers": centers,
        "center_signs": d.centers.iter().map(|p| p.sig).collect::<Vec<_>>(),
        "residual": d.residual,
        "reverified_residual": check,
        "tol": cli.tol,
        "seed": cli.seed,
    }))
}

pub fn cmd_sweep(from: Q, to: Q, steps: usize, csv: Option<&Path>, json_out: Option<&Path>) -> Result<Value, CliError> {
    let s = atlas::sweep(from, to, steps)?;
    let value = serde_json::to_value(&s).expect("serializable sweep");
    if let Some(p) = csv {
        let mut out = String::from("a_num,a_den,chambers,full,empty,unknown\n");
        for pt in &s.points {
            let _ = match pt.summary {
                Some(sm) => writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    pt.a.numer(),
                    pt.a.denom(),
                    sm.chambers,
                    sm.full,
                    sm.empty,
                    sm.unknown
                ),
                None => writeln!(out, "{},{},,,,", pt.a.numer(), pt.a.denom()),
            };
        }
        write_file(p, &out)?;
    }
    if let Some(p) = json_out {
        write_file(p, &serde_json::to_string_pretty(&value).expect("serializable sweep"))?;
    }
    Ok(value)
}

fn dispatch(cli: &Cli) -> Result<Value, CliError> {
    match &cli.command {
        Command::Classify { matrix } => cmd_classify(&read_matrix(matrix)?),
        Command::Atlas { a, svg, json, csv } => {
            cmd_atlas(parse_pi_fraction(a)?, svg.as_deref(), json.as_deref(), csv.as_deref())
        }
        Command::Decompose { matrix, a, max_length } => {
            if !(1..=4).contains(max_length) {
                return Err(CliError::invalid("--max-length must be between 1 and 4"));
            }
            cmd_decompose(&read_matrix(matrix)?, parse_pi_fraction(a)?, *max_length, cli)
        }
        Command::Sweep {
            from,
            to,
            steps,
            csv,
            json,
        } => cmd_sweep(
            parse_pi_fraction(from)?,
            parse_pi_fraction(to)?,
            *steps,
            csv.as_deref(),
            json.as_deref(),
        ),
    }
}

/// Runs the CLI, printing JSON to `out` and diagnostics to `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(v) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializable"));
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

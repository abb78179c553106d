use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use trunclag::identities::{
    algebraic_reports, algebraic_table_size, exterior_reports, hankel_sigma_residual, ladder_rr_residuals,
    lf_residuals, sigma_ode_residual, symmetric_lf_residuals, toda_residual, ResidualReport,
};
use trunclag::moments::{moment_table, FunctionalParams, Variant};
use trunclag::numerics::make_context;
use trunclag::polyeval::{
    eval_p, eval_q, eval_s, holonomic_residual, ladder_residual, lowering_s_residual, probe_points,
    structure_residual, Family,
};
use trunclag::recurrence::{
    default_bits, recurrence_both, recurrence_discretized, recurrence_from_moments, Backend, RecurrenceTable, Tables,
};
use trunclag::series::{parse_rational, snk_table, Field};
use trunclag::zeros::{gauss_rule, zero_flow, zeros, zeros_s};
use trunclag::{Error, PrecisionContext, Real};

/// Environment variable read for the default mantissa width.
const BITS_ENV: &str = "TRUNCLAG_BITS";
const DIGITS: usize = 40;

#[derive(Parser)]
#[command(name = "trunclag", version, about = "Truncated Laguerre orthogonal polynomials: tables and identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    alpha: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    z: String,
    /// Mantissa bits; falls back to $TRUNCLAG_BITS, then a size-based default.
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Moment,
    Discretized,
    Both,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    L,
    Xl,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    P,
    Q,
    S,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::P => Family::P,
            FamilyArg::Q => Family::Q,
            FamilyArg::S => Family::S,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Suite {
    Lf,
    Symmetric,
    Ladder,
    Ode,
    Toda,
    Hankel,
    All,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Operator {
    Structure,
    Ladder,
    Holonomic,
    LoweringS,
}

#[derive(Subcommand)]
enum Command {
    /// Moments ℓ_0 … ℓ_N.
    Moments {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::L)]
        variant: VariantArg,
    },
    /// Recurrence coefficients a_n, b_n, h_n, σ_n.
    Recurrence {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::Moment)]
        backend: BackendArg,
        #[arg(long, value_enum, default_value_t = VariantArg::L)]
        variant: VariantArg,
    },
    /// P_n, Q_n or S_n and two x-derivatives at a point.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Identity residuals: a coefficient suite, or an operator at probe points.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, conflicts_with = "identity")]
        suite: Option<Suite>,
        #[arg(long, value_enum)]
        identity: Option<Operator>,
        /// Family for --identity structure.
        #[arg(long, value_enum, default_value_t = FamilyArg::P)]
        family: FamilyArg,
        /// Highest degree for --suite.
        #[arg(long, default_value_t = 10)]
        nmax: usize,
        /// Degree for --identity.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = BackendArg::Moment)]
        backend: BackendArg,
        /// Seed of the pseudo-random probe points.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Small-z Taylor coefficients s_{n,k}, A_{n,k}, B_{n,k}.
    Series {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        kmax: usize,
    },
    /// Zeros of P_n or S_n.
    Zeros {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = FamilyArg::P)]
        family: FamilyArg,
    },
    /// n-point Gauss rule for the truncated weight.
    Quad {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
    },
    /// Trajectory of the k-th zero of P_n as z moves from z0 to z1.
    Flow {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        z0: String,
        #[arg(long)]
        z1: String,
        #[arg(long, default_value = "1e-10")]
        tol: String,
    },
    /// Verification suite over an (α, z) grid read from a TOML file.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        config: PathBuf,
    },
}

/// Failure categories mapped onto exit codes.
enum Fail {
    Config(String),
    Verification(String),
    Precision(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParam(_) | Error::OutOfRange(_) | Error::Resonance(_) => Fail::Config(msg),
            Error::PrecisionExhausted(_) | Error::NonConvergence { .. } | Error::BackendMismatch(_) => {
                Fail::Precision(msg)
            }
            Error::StepUnderflow { .. } | Error::Degenerate(_) => Fail::Verification(msg),
        }
    }
}

type Out<T> = std::result::Result<T, Fail>;

fn bits_for(flag: Option<u32>, n: usize) -> Out<u32> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BITS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Fail::Config(format!("{BITS_ENV} is not an integer: {v:?}"))),
        Err(_) => Ok(default_bits(n).max(128)),
    }
}

fn setup(c: &Common, n: usize, variant: Variant) -> Out<(FunctionalParams, PrecisionContext)> {
    let bits = bits_for(c.bits, n)?;
    let ctx = make_context(bits)?;
    let params = FunctionalParams::parse(&c.alpha, &c.z, variant, bits)?;
    Ok((params, ctx))
}

fn variant(v: VariantArg) -> Variant {
    match v {
        VariantArg::L => Variant::L,
        VariantArg::Xl => Variant::XL,
    }
}

fn dec(v: &Real) -> String {
    v.to_decimal(DIGITS)
}

fn emit(c: &Common, text: String) -> Out<()> {
    match &c.output {
        Some(p) => std::fs::write(p, text).map_err(|e| Fail::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| Fail::Config(e.to_string()))
        }
    }
}

fn csv(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 fields")
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Rows as JSON objects keyed by the CSV header.
fn table_out(c: &Common, header: &[&str], rows: Vec<Vec<String>>) -> Out<()> {
    let text = match c.format {
        Format::Csv => csv(header, rows),
        Format::Json => {
            let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .into_iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| (h.to_string(), serde_json::Value::String(v)))
                        .collect()
                })
                .collect();
            json(&objs)
        }
    };
    emit(c, text)
}

fn build_table(n: usize, params: &FunctionalParams, ctx: &PrecisionContext, b: BackendArg) -> Out<RecurrenceTable> {
    Ok(match b {
        BackendArg::Moment => recurrence_from_moments(n, params, ctx)?,
        BackendArg::Discretized => recurrence_discretized(n, params, ctx)?,
        BackendArg::Both => recurrence_both(n, params, ctx, &ctx.residual_tol)?.0,
    })
}

fn build_tables(n: usize, params: &FunctionalParams, ctx: &PrecisionContext, b: BackendArg) -> Out<Tables> {
    if b == BackendArg::Both {
        recurrence_both(n, params, ctx, &ctx.residual_tol)?;
    }
    let backend = if b == BackendArg::Discretized { Backend::Discretized } else { Backend::Moment };
    Ok(Tables::build(n, params, ctx, backend)?)
}

/// Reports for one suite on degrees 0..=nmax.
fn suite_reports(
    suite: Suite,
    nmax: usize,
    params: &FunctionalParams,
    ctx: &PrecisionContext,
    backend: BackendArg,
) -> Out<Vec<ResidualReport>> {
    let needs_table = matches!(suite, Suite::Lf | Suite::Symmetric | Suite::Ladder | Suite::All);
    let tb = if needs_table {
        Some(build_tables(algebraic_table_size(nmax), params, ctx, backend)?)
    } else {
        None
    };
    let mut out = Vec::new();
    match suite {
        Suite::Lf => {
            for n in 0..=nmax {
                out.extend(lf_residuals(n, tb.as_ref().unwrap())?);
            }
        }
        Suite::Symmetric => {
            for n in 0..=nmax {
                out.extend(symmetric_lf_residuals(n, tb.as_ref().unwrap())?);
            }
        }
        Suite::Ladder => {
            let tb = tb.as_ref().unwrap();
            for n in 0..=nmax {
                out.extend(ladder_rr_residuals(n, tb)?);
                out.extend(exterior_reports(n, tb, &ctx.residual_tol)?);
            }
        }
        Suite::Ode => {
            for n in 0..=nmax {
                out.extend(sigma_ode_residual(n, params, ctx)?);
            }
        }
        Suite::Toda => {
            for n in 0..=nmax {
                out.extend(toda_residual(n, params, ctx)?);
            }
        }
        Suite::Hankel => {
            for n in 1..=nmax.max(1) {
                out.extend(hankel_sigma_residual(n, params, ctx)?);
            }
        }
        Suite::All => {
            let tb = tb.as_ref().unwrap();
            out.extend(algebraic_reports(nmax, tb)?);
            for n in 0..=nmax {
                out.extend(ladder_rr_residuals(n, tb)?.into_iter().filter(|r| is_differential(&r.identity_name)));
                out.extend(sigma_ode_residual(n, params, ctx)?);
                out.extend(toda_residual(n, params, ctx)?);
                if n >= 1 {
                    out.extend(hankel_sigma_residual(n, params, ctx)?);
                }
            }
        }
    }
    Ok(out)
}

/// Names of the z-derivative checks inside the ladder suite (the algebraic
/// ones are already part of `algebraic_reports`).
fn is_differential(name: &str) -> bool {
    let base = name.split('~').next().unwrap_or(name);
    matches!(base, "theta-R" | "theta-r" | "toda-Rr-a" | "toda-Rr-b")
}

#[derive(Serialize)]
struct ProbeRow {
    identity: String,
    family: Family,
    n: usize,
    x: String,
    residual: String,
    tolerance: String,
    pass: bool,
}

fn operator_rows(
    op: Operator,
    family: Family,
    n: usize,
    params: &FunctionalParams,
    ctx: &PrecisionContext,
    backend: BackendArg,
    seed: u64,
) -> Out<Vec<ProbeRow>> {
    let on_s = matches!(op, Operator::LoweringS) || (op == Operator::Structure && family == Family::S);
    let size = if on_s { n / 2 + 4 } else { n + 3 };
    let tb = build_tables(size, params, ctx, backend)?;
    let scale = if on_s { tb.z().sqrt() } else { tb.z().clone() };
    let tol = &ctx.residual_tol;
    let (label, fam) = match op {
        Operator::Structure => ("structure", family),
        Operator::Ladder => ("ladder", Family::P),
        Operator::Holonomic => ("holonomic", Family::P),
        Operator::LoweringS => ("lowering-s", Family::S),
    };
    let mut rows = Vec::new();
    for x in probe_points(&scale, seed) {
        let r = match op {
            Operator::Structure => structure_residual(family, n, &x, &tb)?,
            Operator::Ladder => ladder_residual(n, &x, &tb.rec)?,
            Operator::Holonomic => holonomic_residual(n, &x, &tb.rec)?,
            Operator::LoweringS => lowering_s_residual(n, &x, &tb)?,
        };
        rows.push(ProbeRow {
            identity: label.to_string(),
            family: fam,
            n,
            x: dec(&x),
            residual: dec(&r),
            tolerance: dec(tol),
            pass: r <= *tol,
        });
    }
    Ok(rows)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Lit {
    Text(String),
    Int(i64),
    Float(f64),
}

impl Lit {
    fn text(&self) -> String {
        match self {
            Lit::Text(s) => s.clone(),
            Lit::Int(i) => i.to_string(),
            Lit::Float(f) => f.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    alpha: Vec<Lit>,
    z: Vec<Lit>,
    nmax: usize,
    bits: Option<u32>,
    suite: Option<Suite>,
}

#[derive(Serialize)]
struct SweepRow {
    alpha: String,
    z: String,
    reports: usize,
    passed: usize,
    corrected: usize,
    failed: usize,
    status: String,
}

fn run(cli: Cli) -> Out<bool> {
    match cli.command {
        Command::Moments { common, n, variant: v } => {
            let (params, ctx) = setup(&common, n, variant(v))?;
            let t = moment_table(n.max(1), &params, &ctx)?;
            let rows = (0..=n).map(|m| vec![m.to_string(), dec(&t.values[m])]).collect();
            table_out(&common, &["m", "value"], rows)?;
        }
        Command::Recurrence { common, n, backend, variant: v } => {
            let (params, ctx) = setup(&common, n, variant(v))?;
            let t = build_table(n, &params, &ctx, backend)?;
            let rows = (0..=n)
                .map(|k| vec![k.to_string(), dec(&t.a[k]), dec(&t.b[k]), dec(&t.h[k]), dec(&t.sigma[k])])
                .collect();
            table_out(&common, &["n", "a", "b", "h", "sigma"], rows)?;
        }
        Command::Eval { common, family, n, x } => {
            let (params, ctx) = setup(&common, n, Variant::L)?;
            let xv = Real::parse(ctx.bits(), &x).ok_or_else(|| Fail::Config(format!("x is not a number: {x:?}")))?;
            let tb = build_tables(n / 2 + n + 2, &params, &ctx, BackendArg::Moment)?;
            let e = match family {
                FamilyArg::P => eval_p(n, &xv, &tb.rec)?,
                FamilyArg::Q => eval_q(n, &xv, &tb.sym)?,
                FamilyArg::S => eval_s(n, &xv, &tb)?,
            };
            table_out(&common, &["n", "x", "value", "d1", "d2"], vec![vec![n.to_string(), dec(&xv), dec(&e.value), dec(&e.d1), dec(&e.d2)]])?;
        }
        Command::Verify { common, suite, identity, family, nmax, n, backend, seed } => {
            match (suite, identity) {
                (Some(s), None) => {
                    let (params, ctx) = setup(&common, algebraic_table_size(nmax), Variant::L)?;
                    let reports = suite_reports(s, nmax, &params, &ctx, backend)?;
                    let ok = reports.iter().all(|r| r.pass);
                    let text = match common.format {
                        Format::Json => json(&reports),
                        Format::Csv => csv(
                            &["identity_name", "n", "alpha", "z", "variant", "residual", "tolerance_used", "pass"],
                            reports
                                .iter()
                                .map(|r| {
                                    vec![
                                        r.identity_name.clone(),
                                        r.n.to_string(),
                                        r.params.alpha.clone(),
                                        r.params.z.clone(),
                                        variant_text(r.params.variant).into(),
                                        dec(&r.residual),
                                        dec(&r.tolerance_used),
                                        r.pass.to_string(),
                                    ]
                                })
                                .collect(),
                        ),
                    };
                    emit(&common, text)?;
                    return Ok(ok);
                }
                (None, Some(op)) => {
                    let n = n.ok_or_else(|| Fail::Config("--identity needs --n".into()))?;
                    let (params, ctx) = setup(&common, n + 3, Variant::L)?;
                    let rows = operator_rows(op, family.into(), n, &params, &ctx, backend, seed)?;
                    let ok = rows.iter().all(|r| r.pass);
                    let text = match common.format {
                        Format::Json => json(&rows),
                        Format::Csv => csv(
                            &["identity", "family", "n", "x", "residual", "tolerance", "pass"],
                            rows.iter()
                                .map(|r| {
                                    vec![
                                        r.identity.clone(),
                                        family_text(r.family).into(),
                                        r.n.to_string(),
                                        r.x.clone(),
                                        r.residual.clone(),
                                        r.tolerance.clone(),
                                        r.pass.to_string(),
                                    ]
                                })
                                .collect(),
                        ),
                    };
                    emit(&common, text)?;
                    return Ok(ok);
                }
                _ => return Err(Fail::Config("verify needs exactly one of --suite or --identity".into())),
            }
        }
        Command::Series { common, nmax, kmax } => {
            let header = ["n", "k", "s", "A", "B", "exact_s", "exact_A", "exact_B"];
            let rows = match parse_rational(&common.alpha) {
                Some(q) => {
                    if q <= num_rational_minus_one() {
                        return Err(Fail::Config("alpha > -1 is required".into()));
                    }
                    let bits = bits_for(common.bits, nmax)?;
                    series_rows(&snk_table(nmax, kmax, &q)?, bits)
                }
                None => {
                    let (params, ctx) = setup(&common, nmax, Variant::L)?;
                    series_rows(&snk_table(nmax, kmax, &params.alpha)?, ctx.bits())
                }
            };
            table_out(&common, &header, rows)?;
        }
        Command::Zeros { common, n, family } => {
            let (params, ctx) = setup(&common, n, Variant::L)?;
            let tb = build_tables(n / 2 + n + 2, &params, &ctx, BackendArg::Moment)?;
            let zs = match family {
                FamilyArg::P => zeros(n, &tb.rec)?,
                FamilyArg::S => zeros_s(n, &tb)?,
                FamilyArg::Q => return Err(Fail::Config("zeros are available for families p and s".into())),
            };
            let rows = zs.points.iter().enumerate().map(|(k, x)| vec![(k + 1).to_string(), dec(x)]).collect();
            table_out(&common, &["k", "x"], rows)?;
        }
        Command::Quad { common, n } => {
            let (params, ctx) = setup(&common, 2 * n, Variant::L)?;
            let t = recurrence_from_moments(n.max(1), &params, &ctx)?;
            let m = moment_table(2 * n.max(1), &params, &ctx)?;
            let rule = gauss_rule(n, &t, &m)?;
            let rows = rule
                .nodes
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| vec![dec(x), dec(w)])
                .collect();
            table_out(&common, &["node", "weight"], rows)?;
        }
        Command::Flow { common, n, k, z0, z1, tol } => {
            let (params, ctx) = setup(&common, n, Variant::L)?;
            let num = |s: &str, what: &str| {
                Real::parse(ctx.bits(), s).ok_or_else(|| Fail::Config(format!("{what} is not a number: {s:?}")))
            };
            let (a, b, t) = (num(&z0, "z0")?, num(&z1, "z1")?, num(&tol, "tol")?);
            let f = zero_flow(n, k, &params, &a, &b, &t, &ctx)?;
            let rows = f.trajectory.iter().map(|p| vec![dec(&p.z), dec(&p.x)]).collect();
            table_out(&common, &["z", "x"], rows)?;
            let ten_tol = &t * 10;
            eprintln!("endpoint error {}", f.endpoint_error.to_decimal(6));
            return Ok(f.endpoint_error <= ten_tol);
        }
        Command::Sweep { common, config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Fail::Config(format!("cannot read {}: {e}", config.display())))?;
            let cfg: SweepConfig = toml::from_str(&text).map_err(|e| Fail::Config(format!("bad sweep config: {e}")))?;
            let suite = cfg.suite.unwrap_or(Suite::All);
            let bits = match cfg.bits {
                Some(b) => Some(b),
                None => common.bits,
            };
            let cells: Vec<(String, String)> = cfg
                .alpha
                .iter()
                .flat_map(|a| cfg.z.iter().map(move |z| (a.text(), z.text())))
                .collect();
            let results: Vec<Out<SweepRow>> = cells
                .par_iter()
                .map(|(a, z)| {
                    let c = Common { alpha: a.clone(), z: z.clone(), bits, ..common.clone() };
                    let (params, ctx) = setup(&c, algebraic_table_size(cfg.nmax), Variant::L)?;
                    let reps = suite_reports(suite, cfg.nmax, &params, &ctx, BackendArg::Moment);
                    Ok(match reps {
                        Ok(r) => SweepRow {
                            alpha: a.clone(),
                            z: z.clone(),
                            reports: r.len(),
                            passed: r.iter().filter(|x| x.pass && !x.identity_name.contains('~')).count(),
                            corrected: r.iter().filter(|x| x.pass && x.identity_name.contains('~')).count(),
                            failed: r.iter().filter(|x| !x.pass).count(),
                            status: "ok".into(),
                        },
                        Err(Fail::Precision(m)) | Err(Fail::Verification(m)) | Err(Fail::Config(m)) => SweepRow {
                            alpha: a.clone(),
                            z: z.clone(),
                            reports: 0,
                            passed: 0,
                            corrected: 0,
                            failed: 1,
                            status: m,
                        },
                    })
                })
                .collect();
            let rows: Vec<SweepRow> = results.into_iter().collect::<Out<_>>()?;
            let ok = rows.iter().all(|r| r.failed == 0);
            let text = match common.format {
                Format::Json => json(&rows),
                Format::Csv => csv(
                    &["alpha", "z", "reports", "passed", "corrected", "failed", "status"],
                    rows.iter()
                        .map(|r| {
                            vec![
                                r.alpha.clone(),
                                r.z.clone(),
                                r.reports.to_string(),
                                r.passed.to_string(),
                                r.corrected.to_string(),
                                r.failed.to_string(),
                                r.status.clone(),
                            ]
                        })
                        .collect(),
                ),
            };
            emit(&common, text)?;
            return Ok(ok);
        }
    }
    Ok(true)
}

fn num_rational_minus_one() -> num_rational::BigRational {
    num_rational::BigRational::from_integer((-1).into())
}

fn series_rows<F: Field>(t: &trunclag::series::SeriesTable<F>, bits: u32) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for n in 0..=t.nmax {
        for k in 0..=t.kmax {
            let (s, a, b) = (&t.s[n][k], &t.a[n][k], &t.b[n][k]);
            rows.push(vec![
                n.to_string(),
                k.to_string(),
                dec(&s.to_real(bits)),
                dec(&a.to_real(bits)),
                dec(&b.to_real(bits)),
                s.exact().unwrap_or_default(),
                a.exact().unwrap_or_default(),
                b.exact().unwrap_or_default(),
            ]);
        }
    }
    rows
}

fn variant_text(v: Variant) -> &'static str {
    match v {
        Variant::L => "l",
        Variant::XL => "xl",
    }
}

fn family_text(f: Family) -> &'static str {
    match f {
        Family::P => "p",
        Family::Q => "q",
        Family::S => "s",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Fail::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Precision(m)) => {
            eprintln!("precision exhausted: {m}");
            ExitCode::from(3)
        }
    }
}

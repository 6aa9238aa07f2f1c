//! Command-line front end: parse curves, run BSD verifications and sweeps,
//! evaluate L-values, periods and Gross's formula, and emit JSON/CSV/text
//! reports.
//!
//! Exit codes: 0 for a PASS or an honest non-verdict, 2 when a quantity
//! could not be recognized exactly (UNRECOGNIZED), 3 when a verification
//! actually failed, 1 for malformed input.  Identical inputs and flags give
//! byte-identical output except for `runtime_ms` fields.

use clap::{Parser, Subcommand, ValueEnum};
use cmbsd::bsd::{
    congruent_sweep, descend_to_q, gross_curve_model, gross_sha, parse_t_values,
    sweep_summary, verify_bsd_equivariant_k, verify_bsd_q, GrossInput, Verdict,
};
use cmbsd::cm::HeckeChar;
use cmbsd::curve::{parse_curve, CurveModel};
use cmbsd::curve::tate::{minimal_model_k, minimal_model_q};
use cmbsd::qfield::class_group;
use cmbsd::{lfun, periods, Error, Result};
use rug::ops::Pow;
use rug::{Float, Integer};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cmbsd",
    version,
    about = "BSD verification toolkit for CM elliptic curves",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Working precision in bits (>= 64)
    #[arg(long, global = true, default_value_t = 128)]
    prec: u32,

    /// Denominator bound when recognizing L/Omega as an element of K
    #[arg(long = "denom-bound", global = true, default_value_t = 10_000)]
    denom_bound: u64,

    /// Target for the smoothed-sum tail bound of the lvalue command;
    /// accepts "2^-80" or a decimal like "1e-30"
    #[arg(long = "tail-eps", global = true, default_value = "2^-80")]
    tail_eps: String,

    /// Worker threads for the sweep (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify the BSD formula for one curve: classical over Q for
    /// "a1,a2,a3,a4,a6", equivariant over K for "a1,a2,a3,a4,a6@K:D"
    Verify { curve: String },
    /// Run the congruent-number sweep over y^2 = x^3 - n^2 x for
    /// squarefree n = 1,2,3 (mod 8) in [n_min, n_max]
    Sweep { n_min: u64, n_max: u64 },
    /// Evaluate Gross's formula for |Sha(A(p))| from a t-value file
    /// (CSV lines "class_index,t_value_decimal", one per ideal class)
    Gross {
        p: u64,
        t_file: std::path::PathBuf,
    },
    /// Central L-value L(E,1) (over Q) or L(psibar,1) (with @K:D)
    Lvalue { curve: String },
    /// Period lattice over Q, or the K-period with its lattice ideal
    Periods { curve: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // ignore the error when a pool already exists (e.g. repeated init in tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if cli.prec < 64 {
        return Err(Error::BadInput(format!(
            "--prec {} is below the minimum of 64 bits",
            cli.prec
        )));
    }
    if cli.denom_bound == 0 {
        return Err(Error::BadInput("--denom-bound must be at least 1".into()));
    }
    let tail_eps = parse_eps(&cli.tail_eps, cli.prec)?;
    match &cli.cmd {
        Cmd::Verify { curve } => cmd_verify(curve, cli),
        Cmd::Sweep { n_min, n_max } => cmd_sweep(*n_min, *n_max, cli),
        Cmd::Gross { p, t_file } => cmd_gross(*p, t_file, cli),
        Cmd::Lvalue { curve } => cmd_lvalue(curve, cli, &tail_eps),
        Cmd::Periods { curve } => cmd_periods(curve, cli),
    }
}

/// Parse "2^-80", "1e-30" or a plain decimal into a positive Float.
fn parse_eps(s: &str, prec: u32) -> Result<Float> {
    let bad = || Error::BadInput(format!("cannot parse --tail-eps value {:?}", s));
    let v = if let Some((base, exp)) = s.split_once('^') {
        let b: u32 = base.trim().parse().map_err(|_| bad())?;
        let e: i32 = exp.trim().parse().map_err(|_| bad())?;
        Float::with_val(prec, b).pow(e)
    } else {
        Float::with_val(prec, Float::parse(s.trim()).map_err(|_| bad())?)
    };
    if !(v.is_finite() && v.is_sign_positive() && !v.is_zero()) {
        return Err(bad());
    }
    Ok(v)
}

fn exit_for(verdict: &Verdict) -> ExitCode {
    match verdict {
        Verdict::Pass | Verdict::NonVerdict(_) => ExitCode::SUCCESS,
        Verdict::Unrecognized(_) => ExitCode::from(2),
        Verdict::Fail(_) => ExitCode::from(3),
    }
}

fn fl(x: &Float) -> String {
    x.to_string_radix(10, Some(40))
}

fn structure_str(s: (u64, u64)) -> String {
    if s.1 <= 1 {
        format!("Z/{}", s.0)
    } else {
        format!("Z/{} x Z/{}", s.0, s.1)
    }
}

fn cmd_verify(curve: &str, cli: &Cli) -> Result<ExitCode> {
    match parse_curve(curve)? {
        CurveModel::Q(e) => {
            let r = verify_bsd_q(&e, cli.prec)?;
            match cli.format {
                Format::Json => println!("{}", r.to_json()),
                Format::Csv => {
                    println!("curve,N,verdict,sha,w,sha_pred");
                    println!(
                        "\"{}\",{},{},{},{},{}",
                        curve_str_q(&r.curve),
                        r.n_cond,
                        r.verdict.label(),
                        r.sha_rounded
                            .as_ref()
                            .map(|s| s.to_string())
                            .unwrap_or_default(),
                        r.lvalue
                            .root_number
                            .map(|w| w.to_string())
                            .unwrap_or_default(),
                        fl(&r.sha_pred)
                    );
                }
                Format::Text => {
                    let wp = r.lvalue.value.prec().0;
                    println!("curve      {}   (conductor {})", curve_str_q(&r.curve), r.n_cond);
                    println!(
                        "L(E,1)     {}   +- {}   w = {}",
                        fl(&Float::with_val(wp, r.lvalue.value.real())),
                        fl(&r.lvalue.abs_err),
                        r.lvalue
                            .root_number
                            .map(|w| format!("{:+}", w))
                            .unwrap_or_else(|| "?".into())
                    );
                    println!("Omega      {}", fl(&r.omega));
                    println!(
                        "torsion    {} = {}",
                        r.torsion.order,
                        structure_str(r.torsion.structure)
                    );
                    for d in &r.locals {
                        println!(
                            "place      v = {}   {}   f = {}   c = {}",
                            d.place, d.kodaira, d.f, d.c
                        );
                    }
                    println!("sha_pred   {}", fl(&r.sha_pred));
                    match &r.sha_rounded {
                        Some(s) => println!(
                            "sha        {}{}",
                            s,
                            if r.is_square { "  (perfect square)" } else { "  (NOT a square)" }
                        ),
                        None => println!("sha        -"),
                    }
                    println!("verdict    {}", r.verdict);
                }
            }
            Ok(exit_for(&r.verdict))
        }
        CurveModel::K(e) => {
            let r = verify_bsd_equivariant_k(&e, cli.prec, &Integer::from(cli.denom_bound))?;
            match cli.format {
                Format::Json => println!("{}", r.to_json()),
                Format::Csv => {
                    println!("curve,field,N,verdict,sha_norm,lhs");
                    let (norm, lhs) = match &r.equivariant {
                        Some(eq) => (eq.sha_norm.to_string(), eq.lhs_elem.to_string()),
                        None => (String::new(), String::new()),
                    };
                    println!(
                        "\"{}\",{},{},{},{},\"{}\"",
                        curve_str_k(&r.curve),
                        r.curve.field().disc(),
                        r.n_cond,
                        r.verdict.label(),
                        norm,
                        lhs
                    );
                }
                Format::Text => {
                    println!(
                        "curve      {}   over Q(sqrt({}))   (level {})",
                        curve_str_k(&r.curve),
                        r.curve.field().disc(),
                        r.n_cond
                    );
                    println!(
                        "L(psi-,1)  {}   +- {}",
                        r.lvalue.value.clone(),
                        fl(&r.lvalue.abs_err)
                    );
                    println!("Omega_K    {}", r.period.omega_k.clone());
                    println!(
                        "a(Omega)   {}   (norm {})",
                        r.period.ideal,
                        r.period.ideal.norm()
                    );
                    println!(
                        "torsion    {} = {}",
                        r.torsion.order,
                        structure_str(r.torsion.structure)
                    );
                    for d in &r.locals {
                        let ideal = d
                            .c_ideal
                            .as_ref()
                            .map(|i| format!("   |Phi|_K = {}", i))
                            .unwrap_or_default();
                        println!(
                            "place      v = {}   {}   f = {}   c = {}{}",
                            d.place, d.kodaira, d.f, d.c, ideal
                        );
                    }
                    if let Some(eq) = &r.equivariant {
                        println!("L/Omega    {}   (exact in K)", eq.lhs_elem);
                        println!("sha_ideal  {}   (norm {})", eq.sha_ideal, eq.sha_norm);
                        if let Some(g) = &eq.generator {
                            println!("generator  {}", g);
                        }
                    }
                    println!("verdict    {}", r.verdict);
                }
            }
            Ok(exit_for(&r.verdict))
        }
    }
}

fn cmd_sweep(n_min: u64, n_max: u64, cli: &Cli) -> Result<ExitCode> {
    if n_min < 1 || n_min > n_max || n_max > 10_000 {
        return Err(Error::BadInput(format!(
            "sweep range must satisfy 1 <= n_min <= n_max <= 10000, got [{}, {}]",
            n_min, n_max
        )));
    }
    let items = congruent_sweep(n_min, n_max, cli.prec)?;
    let summary = sweep_summary(&items);
    match cli.format {
        Format::Json => {
            let rows: Vec<serde_json::Value> = items
                .iter()
                .map(|it| {
                    serde_json::json!({
                        "n": it.n,
                        "verdict": it.report.verdict.label(),
                        "sha": it.report.sha_rounded.as_ref().map(|s| s.to_string()),
                        "w": it.report.lvalue.root_number,
                        "runtime_ms": it.runtime_ms,
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::json!({
                    "rows": rows,
                    "summary": {
                        "pass": summary.pass,
                        "non_verdict": summary.non_verdict,
                        "unrecognized": summary.unrecognized,
                        "fail": summary.fail,
                    }
                })
            );
        }
        Format::Csv | Format::Text => {
            println!("n,verdict,sha,w,runtime_ms");
            for it in &items {
                println!("{}", it.csv_line());
            }
            println!(
                "# processed={} pass={} non_verdict={} unrecognized={} fail={}",
                items.len(),
                summary.pass,
                summary.non_verdict,
                summary.unrecognized,
                summary.fail
            );
        }
    }
    if summary.fail > 0 {
        Ok(ExitCode::from(3))
    } else if summary.unrecognized > 0 {
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn cmd_gross(p: u64, t_file: &std::path::Path, cli: &Cli) -> Result<ExitCode> {
    if p % 8 != 7 {
        return Err(Error::BadInput(format!("p = {} is not 7 mod 8", p)));
    }
    let h = class_group(-(p as i64))?.h();
    let text = std::fs::read_to_string(t_file)
        .map_err(|e| Error::BadInput(format!("cannot read {}: {}", t_file.display(), e)))?;
    let t = parse_t_values(&text, h, cli.prec)?;
    let inp = GrossInput::new(p, t)?;
    let val = gross_sha(&inp)?;
    let model = gross_curve_model(p, cli.prec)?;
    match cli.format {
        Format::Json => {
            println!(
                "{}",
                serde_json::json!({
                    "p": p,
                    "h": h,
                    "value": fl(&val.value),
                    "rounded": val.rounded.as_ref().map(|r| r.to_string()),
                    "degenerate": val.degenerate,
                    "model": model.curve.as_ref().map(curve_str_q),
                    "model_exact": model.exact,
                    "model_a4": fl(&model.a4),
                    "model_a6": fl(&model.a6),
                })
            );
        }
        Format::Csv => {
            println!("p,h,value,rounded,degenerate");
            println!(
                "{},{},{},{},{}",
                p,
                h,
                fl(&val.value),
                val.rounded
                    .as_ref()
                    .map(|r| r.to_string())
                    .unwrap_or_default(),
                val.degenerate
            );
        }
        Format::Text => {
            println!("p          {}   (h = {})", p, h);
            println!("|Sha|      {}", fl(&val.value));
            match &val.rounded {
                Some(r) => println!("rounded    {}{}", r, if val.degenerate { "  (degenerate)" } else { "" }),
                None => println!("rounded    -  (not within tolerance of an integer)"),
            }
            match &model.curve {
                Some(e) => println!("A({})       {}   (exact)", p, curve_str_q(e)),
                None => println!(
                    "A({})      y^2 = x^3 + ({})x + ({})   (floating, h = {} > 1)",
                    p,
                    fl(&model.a4),
                    fl(&model.a6),
                    h
                ),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_lvalue(curve: &str, cli: &Cli, tail_eps: &Float) -> Result<ExitCode> {
    let (chi, equivariant) = match parse_curve(curve)? {
        CurveModel::Q(e) => (HeckeChar::new(&e)?, false),
        CurveModel::K(e) => {
            let (em, _) = minimal_model_k(&e)?;
            (HeckeChar::new(&descend_to_q(&em)?)?, true)
        }
    };
    let n_cond = chi.level().clone();
    let lv = if equivariant {
        lfun::equivariant_l_value(&chi, cli.prec)?
    } else {
        let terms = lfun::terms_needed(&n_cond, cli.prec).max(eps_terms(&n_cond, tail_eps)?);
        let coeffs = chi.dirichlet_coeffs(terms)?;
        lfun::l_value_rank0(&coeffs, &n_cond, cli.prec)?
    };
    let wp = lv.value.prec().0;
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "curve": curve,
                "N": n_cond.to_string(),
                "L1": {
                    "re": fl(&Float::with_val(wp, lv.value.real())),
                    "im": fl(&Float::with_val(wp, lv.value.imag())),
                    "err": fl(&lv.abs_err),
                    "w": lv.root_number,
                },
                "terms": lv.terms_used,
            })
        ),
        Format::Csv => {
            println!("curve,N,re,im,err,w,terms");
            println!(
                "\"{}\",{},{},{},{},{},{}",
                curve,
                n_cond,
                fl(&Float::with_val(wp, lv.value.real())),
                fl(&Float::with_val(wp, lv.value.imag())),
                fl(&lv.abs_err),
                lv.root_number.map(|w| w.to_string()).unwrap_or_default(),
                lv.terms_used
            );
        }
        Format::Text => {
            println!("curve      {}   (level {})", curve, n_cond);
            println!("L(1)       {}", lv.value.clone());
            println!("error      {}", fl(&lv.abs_err));
            println!(
                "w          {}",
                lv.root_number
                    .map(|w| format!("{:+}", w))
                    .unwrap_or_else(|| "undetermined".into())
            );
            println!("terms      {}", lv.terms_used);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_periods(curve: &str, cli: &Cli) -> Result<ExitCode> {
    match parse_curve(curve)? {
        CurveModel::Q(e) => {
            let (em, _) = minimal_model_q(&e)?;
            let lat = periods::period_lattice(&em, cli.prec)?;
            let omega = periods::neron_real_period(&em, cli.prec)?;
            let wp = lat.w1.prec();
            match cli.format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "curve": curve_str_q(&em),
                        "w1": fl(&lat.w1),
                        "w2_re": fl(&Float::with_val(wp, lat.w2.real())),
                        "w2_im": fl(&Float::with_val(wp, lat.w2.imag())),
                        "components": lat.components,
                        "omega": fl(&omega),
                    })
                ),
                Format::Csv => {
                    println!("curve,w1,w2_re,w2_im,components,omega");
                    println!(
                        "\"{}\",{},{},{},{},{}",
                        curve_str_q(&em),
                        fl(&lat.w1),
                        fl(&Float::with_val(wp, lat.w2.real())),
                        fl(&Float::with_val(wp, lat.w2.imag())),
                        lat.components,
                        fl(&omega)
                    );
                }
                Format::Text => {
                    println!("curve      {}   (minimal model)", curve_str_q(&em));
                    println!("w1         {}", fl(&lat.w1));
                    println!("w2         {}", lat.w2.clone());
                    println!("components {}", lat.components);
                    println!("Omega      {}", fl(&omega));
                }
            }
        }
        CurveModel::K(e) => {
            let (em, _) = minimal_model_k(&e)?;
            let pd = periods::equivariant_period(&em, cli.prec)?;
            let resid = periods::period_norm_check(&em, cli.prec)?;
            let wp = pd.omega_e.prec();
            match cli.format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "curve": curve_str_k(&em),
                        "field": em.field().disc(),
                        "omega_e": fl(&pd.omega_e),
                        "omega_k_re": fl(&Float::with_val(wp, pd.omega_k.real())),
                        "omega_k_im": fl(&Float::with_val(wp, pd.omega_k.imag())),
                        "lattice_ideal": pd.ideal.to_json(),
                        "ideal_norm": pd.ideal.norm().to_string(),
                        "norm_residual": fl(&resid),
                    })
                ),
                Format::Csv => {
                    println!("curve,field,omega_e,omega_k_re,omega_k_im,ideal_norm,norm_residual");
                    println!(
                        "\"{}\",{},{},{},{},{},{}",
                        curve_str_k(&em),
                        em.field().disc(),
                        fl(&pd.omega_e),
                        fl(&Float::with_val(wp, pd.omega_k.real())),
                        fl(&Float::with_val(wp, pd.omega_k.imag())),
                        pd.ideal.norm(),
                        fl(&resid)
                    );
                }
                Format::Text => {
                    println!(
                        "curve      {}   over Q(sqrt({}))",
                        curve_str_k(&em),
                        em.field().disc()
                    );
                    println!("Omega(E)   {}", fl(&pd.omega_e));
                    println!("Omega      {}", pd.omega_k.clone());
                    println!("a(Omega)   {}   (norm {})", pd.ideal, pd.ideal.norm());
                    println!("Omega(E) - |Omega|^2 N(a):  {}", fl(&resid));
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Terms needed so the truncation part of the reported error bound drops
/// below eps.  The discarded tail obeys
/// sqrt(3) e^{-c(X+1)} / (1 - e^{-c})  with c = 2 pi / sqrt(N),
/// and enters the error doubled (L = (1+w) s), hence the target eps/2.
fn eps_terms(n_cond: &Integer, eps: &Float) -> Result<usize> {
    let c = 2.0 * std::f64::consts::PI / n_cond.to_f64().sqrt();
    let ln_eps = (eps.clone() / 2u32).ln().to_f64();
    let ln_pref = (3f64.sqrt() / (-(-c).exp_m1())).ln();
    let x = ((ln_pref - ln_eps) / c - 1.0).ceil().max(0.0);
    if x > 1e7 {
        return Err(Error::BadInput(format!(
            "--tail-eps needs {} terms at conductor {}; refusing beyond 10^7",
            x, n_cond
        )));
    }
    Ok(x as usize)
}

fn curve_str_q(e: &cmbsd::curve::CurveQ) -> String {
    e.coeffs()
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn curve_str_k(e: &cmbsd::curve::CurveK) -> String {
    e.coeffs()
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

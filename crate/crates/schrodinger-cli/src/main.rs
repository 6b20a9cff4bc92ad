//! Command line front end: exact computations in the Schrodinger Lie algebra,
//! its enveloping algebra, the Weyl realization, weight modules, and the
//! localization twist. All scalars are printed exactly, as fractions.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use schrodinger::lie::{
    parse_lie_element, parse_words, verify_structure_with_fault, Fault, Generator,
};
use schrodinger::localization::{gamma_properties_check, gamma_uea};
use schrodinger::modules::{
    classify, dense_module, nilpotency_probe, simple_quotient, singular_vectors, tensor_module,
    twist_by_tau, verma, Sl2WeightModule, SoModule, verify_verma_factorization,
};
use schrodinger::pbw::normal_order;
use schrodinger::scalar::{parse_scalar, Qi, Scalar, Tower};
use schrodinger::weyl::{
    d1_cyclicity_check, phi_homomorphism_check, phi_injectivity_check, theta_central,
    theta_homomorphism_check, PolyKind,
};
use schrodinger::Error;

#[derive(Parser)]
#[command(name = "schrodinger", version, about = "exact Schrodinger algebra toolkit")]
struct Cli {
    /// Spatial rank n of the algebra s_n
    #[arg(long, global = true, default_value_t = 1)]
    n: usize,
    /// Central charge (rational or Gaussian rational, e.g. "2", "-1/3", "1+2i")
    #[arg(long, global = true, allow_hyphen_values = true)]
    zdot: Option<String>,
    /// Square root of the central charge, given directly (sets zdot = s^2)
    #[arg(long, global = true, allow_hyphen_values = true)]
    s: Option<String>,
    /// Truncation depth for module windows
    #[arg(long, global = true, default_value_t = 6)]
    depth: u32,
    /// Seed for randomized sampling where applicable
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check all bracket axioms against the matrix realization
    VerifyAxioms {
        /// Inject a deliberate fault to demonstrate detection
        #[arg(long, value_enum)]
        fault: Option<FaultArg>,
    },
    /// Run the whole structural battery: axioms, realizations, twist, cyclicity
    VerifyAll,
    /// Normally order a product of generators, e.g. "x1 y1" or "e f^2"
    NormalOrder { expr: String },
    /// Image of a Lie element under the differential operator realization
    Theta { expr: String },
    /// Image of a Lie element under the localization twist gamma_b
    Gamma {
        /// Lie element to twist, e.g. "e" or "x(1) + 2*y(1)"
        #[arg(long)]
        gen: String,
        /// Twist parameter b
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Also run the structural checks for gamma
        #[arg(long)]
        check: bool,
    },
    /// Weight space table of a truncated Verma module
    Verma {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Input so_n-module: trivial, natural, so2+ or so2-
        #[arg(long, default_value = "trivial")]
        v: String,
    },
    /// Singular vectors of a truncated Verma module, per level
    Singular {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value = "trivial")]
        v: String,
    },
    /// Verma vs tensor character table, with the intertwiner check
    CharacterTable {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value = "trivial")]
        v: String,
    },
    /// Probe a module and name its family in the classification
    Classify {
        /// Module to probe
        #[arg(long, value_enum)]
        source: SourceArg,
        /// Highest weight (verma) or Laurent shift (dense)
        #[arg(long, default_value = "1/3", allow_hyphen_values = true)]
        lambda: String,
        /// sl_2 level k of the dense family
        #[arg(long, default_value_t = 0)]
        k: u32,
    },
    /// Weight space table of the dense rank-one family
    Dense {
        #[arg(long, default_value_t = 0)]
        k: u32,
        /// Laurent shift, must not be an integer
        #[arg(long, default_value = "1/2", allow_hyphen_values = true)]
        lambda1: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    FlipEf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Verma,
    TauTwist,
    Dense,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, ok)) => {
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text + "\n") {
                        eprintln!("error: {}", e);
                        return ExitCode::FAILURE;
                    }
                }
                None => println!("{}", text),
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::FAILURE
        }
    }
}

fn tower_of(cli: &Cli) -> Result<Arc<Tower>, Error> {
    match (&cli.zdot, &cli.s) {
        (Some(_), Some(_)) => Err(Error::InvalidArgument(
            "give either --zdot or --s, not both".into(),
        )),
        (None, Some(s)) => {
            let v = parse_scalar(s, None)?;
            Ok(Tower::from_s(v.as_qi()?.clone()))
        }
        (Some(z), None) => {
            let v = parse_scalar(z, None)?;
            Ok(Tower::from_zdot(v.as_qi()?.clone()))
        }
        (None, None) => Ok(Tower::from_zdot(Qi::from_int(1))),
    }
}

fn so_module(name: &str, n: usize) -> Result<SoModule, Error> {
    match name {
        "trivial" => Ok(SoModule::trivial(n)),
        "natural" => Ok(SoModule::natural(n)),
        "so2+" if n == 2 => Ok(SoModule::so2_eigenline(1)),
        "so2-" if n == 2 => Ok(SoModule::so2_eigenline(-1)),
        other => Err(Error::InvalidArgument(format!(
            "unknown so_{}-module '{}'",
            n, other
        ))),
    }
}

fn json<T: Serialize>(v: &T) -> Result<String, Error> {
    serde_json::to_string_pretty(v).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn run(cli: &Cli) -> Result<(String, bool), Error> {
    let tower = tower_of(cli)?;
    let n = cli.n;
    match &cli.cmd {
        Cmd::VerifyAxioms { fault } => {
            let fault = fault.map(|FaultArg::FlipEf| Fault::FlipEF);
            let report = verify_structure_with_fault(n, fault);
            let ok = report.violations.is_empty();
            let text = match cli.format {
                Format::Json => json(&report)?,
                _ => {
                    let mut s = format!(
                        "n = {}: {} bracket pairs vs matrix oracle, {} Jacobi triples, {} violations",
                        report.n,
                        report.pairs_checked,
                        report.triples_checked,
                        report.violations.len()
                    );
                    for v in &report.violations {
                        s.push_str(&format!(
                            "\n  {} on {}: {}",
                            v.kind,
                            v.generators.join(", "),
                            v.detail
                        ));
                    }
                    s
                }
            };
            Ok((text, ok))
        }
        Cmd::VerifyAll => verify_all(n, &tower),
        Cmd::NormalOrder { expr } => {
            let words = parse_words(expr, n, Some(&tower))?;
            let ordered = normal_order(&words, n);
            Ok((ordered.to_string(), true))
        }
        Cmd::Theta { expr } => {
            let elem = parse_lie_element(expr, n, Some(&tower))?;
            let op = theta_central(&elem, &tower);
            Ok((op.to_string(), true))
        }
        Cmd::Gamma { gen, b, check } => {
            let b = parse_scalar(b, Some(&tower))?;
            let mut out = Vec::new();
            let elem = parse_lie_element(gen, n, Some(&tower))?;
            let mut acc = schrodinger::localization::LocalizedElement::zero(n);
            for (g, c) in elem.terms() {
                let img = gamma_uea(
                    &schrodinger::pbw::UEAElement::generator(*g, n)?,
                    &b,
                )?;
                acc = acc.add(&img.scale(c));
            }
            out.push(acc.to_string());
            let mut ok = true;
            if *check {
                let report =
                    gamma_properties_check(n, &b, &b.add(&Scalar::from_ratio(1, 2)))?;
                ok = report.pass;
                out.push(match cli.format {
                    Format::Json => json(&report)?,
                    _ => report
                        .checks
                        .iter()
                        .map(|c| format!("{}: {}", c.name, if c.pass { "ok" } else { "FAIL" }))
                        .collect::<Vec<_>>()
                        .join("\n"),
                });
            }
            Ok((out.join("\n"), ok))
        }
        Cmd::Verma { lambda, v } => {
            let lambda = parse_scalar(lambda, Some(&tower))?;
            let v_mod = so_module(v, n)?;
            let m = verma(&v_mod, &lambda, &Scalar::zdot(&tower), cli.depth);
            let mut rows = vec!["weight,offset,dimension".to_string()];
            for &d in m.offsets().iter().rev() {
                rows.push(format!("{},{},{}", m.weight(d), d, m.dim(d)));
            }
            Ok((rows.join("\n"), true))
        }
        Cmd::Singular { lambda, v } => {
            let lambda = parse_scalar(lambda, Some(&tower))?;
            let v_mod = so_module(v, n)?;
            let m = verma(&v_mod, &lambda, &Scalar::zdot(&tower), cli.depth);
            #[derive(Serialize)]
            struct Level {
                level: u32,
                weight: String,
                vectors: Vec<Vec<String>>,
            }
            let mut levels = Vec::new();
            for k in 1..=cli.depth {
                let vs = singular_vectors(&m, -(k as i64))?;
                if vs.is_empty() {
                    continue;
                }
                levels.push(Level {
                    level: k,
                    weight: m.weight(-(k as i64)).to_string(),
                    vectors: vs
                        .into_iter()
                        .map(|v| v.into_iter().map(|c| c.to_string()).collect())
                        .collect(),
                });
            }
            Ok((json(&levels)?, true))
        }
        Cmd::CharacterTable { lambda, v } => {
            let lambda = parse_scalar(lambda, Some(&tower))?;
            let v_mod = so_module(v, n)?;
            let report = verify_verma_factorization(&v_mod, &lambda, &tower, cli.depth)?;
            let text = match cli.format {
                Format::Json => json(&report)?,
                _ => {
                    let mut rows = vec!["level,dim_verma,dim_tensor,equal".to_string()];
                    for r in &report.rows {
                        rows.push(format!(
                            "{},{},{},{}",
                            r.level, r.verma_dim, r.tensor_dim, r.equal
                        ));
                    }
                    rows.push(format!("intertwiner,{}", report.psi_intertwines));
                    rows.join("\n")
                }
            };
            Ok((text, report.passed()))
        }
        Cmd::Classify { source, lambda, k } => {
            let lambda = parse_scalar(lambda, Some(&tower))?;
            let zdot = Scalar::zdot(&tower);
            let m = match source {
                SourceArg::Verma => verma(&SoModule::trivial(n), &lambda, &zdot, cli.depth),
                SourceArg::TauTwist => twist_by_tau(&verma(
                    &SoModule::trivial(n),
                    &lambda,
                    &zdot,
                    cli.depth,
                )),
                SourceArg::Dense => dense_module(*k, &lambda, &tower, cli.depth as i64)?,
            };
            let e = nilpotency_probe(&m, Generator::E);
            let f = nilpotency_probe(&m, Generator::F);
            let label = classify(zdot.is_zero(), e, f, n)?;
            #[derive(Serialize)]
            struct Outcome {
                n: usize,
                zdot: String,
                e_behavior: schrodinger::modules::Behavior,
                f_behavior: schrodinger::modules::Behavior,
                label: schrodinger::modules::ClassLabel,
            }
            let outcome = Outcome {
                n,
                zdot: zdot.to_string(),
                e_behavior: e,
                f_behavior: f,
                label,
            };
            Ok((json(&outcome)?, true))
        }
        Cmd::Dense { k, lambda1 } => {
            let lambda1 = parse_scalar(lambda1, Some(&tower))?;
            let m = dense_module(*k, &lambda1, &tower, cli.depth as i64)?;
            let mut rows = vec!["weight,offset,dimension".to_string()];
            for &d in m.offsets().iter().rev() {
                rows.push(format!("{},{},{}", m.weight(d), d, m.dim(d)));
            }
            Ok((rows.join("\n"), true))
        }
    }
}

fn verify_all(n_max: usize, tower: &Arc<Tower>) -> Result<(String, bool), Error> {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut push = |name: &str, pass: bool, detail: String, ok: &mut bool| {
        *ok &= pass;
        lines.push(format!(
            "[{}] {}: {}",
            if pass { "ok" } else { "FAIL" },
            name,
            detail
        ));
    };
    for n in 1..=n_max.max(1) {
        let r = verify_structure_with_fault(n, None);
        push(
            "axioms",
            r.violations.is_empty(),
            format!("n={}, {} pairs, {} triples", n, r.pairs_checked, r.triples_checked),
            &mut ok,
        );
        let r = theta_homomorphism_check(n, tower);
        push(
            "theta",
            r.passed(),
            format!("n={}, {} pairs", n, r.pairs_checked),
            &mut ok,
        );
        let r = phi_homomorphism_check(n, tower);
        push(
            "phi",
            r.passed(),
            format!("n={}, {} pairs", n, r.pairs_checked),
            &mut ok,
        );
        if n <= 2 {
            let r = phi_injectivity_check(3, n, tower)?;
            push(
                "phi-injective",
                r.pass,
                format!("n={}, rank {}/{}", n, r.rank, r.monomial_count),
                &mut ok,
            );
            let r = gamma_properties_check(
                n,
                &Scalar::from_ratio(1, 3),
                &Scalar::from_ratio(-2, 5),
            )?;
            push("gamma", r.pass, format!("n={}, {} checks", n, r.checks.len()), &mut ok);
        }
    }
    for (kind, name) in [
        (PolyKind::Poly, "poly"),
        (
            PolyKind::TwistedLaurent { lambda: Scalar::from_ratio(1, 2), window: 6 },
            "twisted-laurent",
        ),
        (PolyKind::LaurentQuotient { window: 6 }, "laurent-quotient"),
    ] {
        let r = d1_cyclicity_check(&kind, 6)?;
        push(
            "cyclicity",
            r.cyclic,
            format!("{}: orbit {}/{}", name, r.min_orbit_dim, r.basis_dim),
            &mut ok,
        );
    }
    // one quick module-level identity: zero charge kills the Heisenberg part
    let m = verma(&SoModule::trivial(1), &Scalar::from_int(1), &Scalar::zero(), 6);
    let l = simple_quotient(&m)?;
    let heis_zero = l
        .offsets()
        .iter()
        .all(|&d| {
            [Generator::X(1), Generator::Y(1)].iter().all(|&g| {
                l.action(g, d).map(|mat| mat.is_zero()).unwrap_or(true)
            })
        });
    push("zero-charge-quotient", heis_zero, "n=1, depth 6".into(), &mut ok);
    // and the character identity at a generic weight
    let lam = Scalar::from_ratio(1, 3);
    let m = verma(&SoModule::trivial(1), &lam, &Scalar::zdot(tower), 6);
    let sl2 = Sl2WeightModule::verma(lam.add(&Scalar::from_ratio(1, 2)), 6);
    let t = tensor_module(&SoModule::trivial(1), &sl2, tower, 6);
    let chars = (0..=6i64).all(|k| m.dim(-k) == t.dim(-k));
    push("characters", chars, "n=1, depth 6".into(), &mut ok);
    Ok((lines.join("\n"), ok))
}

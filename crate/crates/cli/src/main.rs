use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use readk::construct::{self, S42Classification};
use readk::error::{Error, Result};
use readk::field::{FieldSpec, FieldValue};
use readk::poly::{Assignment, Polynomial};
use readk::search::{self, SearchConfig, SearchOutcome, SearchTarget, Verdict};
use readk::symmat::{symbolic_det, Entry, SymbolicMatrix};
use readk::transform::{self, Abp, DerivativeMinor};

#[derive(Parser)]
#[command(name = "readk", version, about = "Read-once and read-k determinant toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Determinant of a matrix, as text and JSON.
    Det { matrix: PathBuf },
    /// Check the read bound, or compare the determinant with a polynomial.
    Verify {
        #[arg(long = "read-k")]
        read_k: Option<usize>,
        /// Compare against the polynomial in the second file.
        #[arg(long)]
        equals: bool,
        matrix: PathBuf,
        poly: Option<PathBuf>,
    },
    /// Print one of the built-in matrices.
    Construct {
        #[command(subcommand)]
        which: Construction,
        #[arg(long, default_value = "Q", global = true)]
        field: FieldSpec,
    },
    /// Affine or read-once normal forms
    Reduce {
        #[command(subcommand)]
        how: Reduction,
    },
    /// Partial derivative as a minor.
    Derive {
        matrix: PathBuf,
        /// Comma-separated variable indices.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<usize>,
    },
    /// Substitute constants, e.g. `--set x1=3 --set x2=1/2`.
    Subst {
        matrix: PathBuf,
        #[arg(long = "set", value_delimiter = ',')]
        set: Vec<String>,
    },
    /// Read-once matrix of an occurrence-one branching program.
    Abp2det {
        abp: PathBuf,
        #[arg(long, default_value = "Q")]
        field: FieldSpec,
    },
    /// Does the field carry a read-once S_4^2?
    Classify {
        #[arg(long)]
        field: FieldSpec,
    },
    /// Exhaustive witness search over a small prime field.
    Search {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        field: FieldSpec,
        #[arg(long = "max-size")]
        max_size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Match the support instead of the exact polynomial.
        #[arg(long = "support-only")]
        support_only: bool,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Support-based non-expressibility certificate.
    Certify {
        mon: PathBuf,
        #[arg(long)]
        nvars: Option<usize>,
    },
}

#[derive(Subcommand)]
enum Construction {
    /// Elementary symmetric polynomial e_d in n variables
    Sym { n: usize, d: usize },
    /// Read-once matrix with the support of e_d in n variables
    Mon { n: usize, d: usize },
    /// 6x6 read-once matrix for e_2 in 4 variables
    S42,
    /// Read-once matrix whose permanent is 4·e_2 in 4 variables
    Perm6,
}

#[derive(Subcommand)]
enum Reduction {
    /// Affine matrix of order at most k·n.
    Affine {
        #[arg(long)]
        k: usize,
        matrix: PathBuf,
    },
    /// Read-once matrix of order at most 3n.
    Compress { matrix: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> Result<SymbolicMatrix> {
    SymbolicMatrix::from_json(&read(path)?)
}

fn parse_assignment(spec: FieldSpec, items: &[String]) -> Result<Assignment> {
    let mut out = Assignment::new();
    for item in items {
        let (lhs, rhs) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected x<i>=<value>, got {item:?}")))?;
        let var = lhs
            .trim()
            .strip_prefix('x')
            .and_then(|i| i.parse::<usize>().ok())
            .filter(|&i| i > 0)
            .ok_or_else(|| Error::Parse(format!("bad variable {lhs:?}")))?;
        out.insert(var, FieldValue::parse(spec, rhs.trim())?);
    }
    Ok(out)
}

/// 0 on success or a positive answer, 1 on a verified negative.
fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Det { matrix } => {
            let m = load_matrix(&matrix)?;
            let det = symbolic_det(&m)?;
            println!("{det}");
            println!(
                "{}",
                json!({"field": m.spec().to_string(), "nvars": m.nvars(), "det": det.to_string()})
            );
            Ok(0)
        }
        Command::Verify {
            read_k,
            equals,
            matrix,
            poly,
        } => {
            let m = load_matrix(&matrix)?;
            if equals {
                let path = poly.ok_or_else(|| Error::Parse("--equals needs a polynomial file".into()))?;
                let target = Polynomial::parse(m.spec(), m.nvars(), read(&path)?.trim())?;
                let det = symbolic_det(&m)?;
                let n = det.nvars().max(target.nvars());
                let equal = det.clone().with_nvars(n) == target.with_nvars(n);
                println!("{}", json!({"equal": equal, "det": det.to_string()}));
                return Ok(if equal { 0 } else { 1 });
            }
            let k = read_k.ok_or_else(|| Error::Parse("give --read-k <k> or --equals".into()))?;
            let multiplicity: BTreeMap<String, usize> = m
                .var_cells()
                .into_iter()
                .map(|(v, cells)| (format!("x{v}"), cells.len()))
                .collect();
            let ok = m.verify_read_k(k);
            println!(
                "{}",
                json!({"k": k, "max_read": m.max_read(), "read_k": ok, "multiplicity": multiplicity})
            );
            Ok(if ok { 0 } else { 1 })
        }
        Command::Construct { which, field } => {
            let m = match which {
                Construction::Sym { n, d } => construct::sym_read_once(n, d, field)?,
                Construction::Mon { n, d } => construct::mon_snd_matrix(n, d, field, None)?,
                Construction::S42 => match construct::s42_witness(field) {
                    Err(Error::FieldNotAdmitting(why)) => {
                        eprintln!("not admitting: {why}");
                        return Ok(1);
                    }
                    other => other?,
                },
                Construction::Perm6 => {
                    let (m, verified) = construct::perm6_projection();
                    if !verified {
                        return Err(Error::SelfCheckFailed("permanent identity".into()));
                    }
                    m
                }
            };
            println!("{}", m.to_json());
            Ok(0)
        }
        Command::Reduce { how } => {
            match how {
                Reduction::Affine { k, matrix } => {
                    println!("{}", transform::reduce_to_affine(&load_matrix(&matrix)?, k)?.to_json())
                }
                Reduction::Compress { matrix } => {
                    println!("{}", transform::compress_read_once(&load_matrix(&matrix)?)?.to_json())
                }
            }
            Ok(0)
        }
        Command::Derive { matrix, vars } => {
            let m = load_matrix(&matrix)?;
            let vars: BTreeSet<usize> = vars.into_iter().collect();
            let out = match transform::derivative_minor(&m, &vars)? {
                DerivativeMinor::Matrix(d) => d,
                DerivativeMinor::Zero => SymbolicMatrix::new(
                    m.spec(),
                    m.nvars(),
                    vec![vec![Entry::Const(FieldValue::zero(m.spec()))]],
                )?,
            };
            println!("{}", out.to_json());
            Ok(0)
        }
        Command::Subst { matrix, set } => {
            let m = load_matrix(&matrix)?;
            let a = parse_assignment(m.spec(), &set)?;
            println!("{}", transform::substitute_matrix(&m, &a)?.to_json());
            Ok(0)
        }
        Command::Abp2det { abp, field } => {
            let abp = Abp::from_json(field, &read(&abp)?)?;
            println!("{}", transform::abp_to_read_once(&abp)?.to_json());
            Ok(0)
        }
        Command::Classify { field } => {
            let (code, out) = match construct::classify_field_s42(field) {
                S42Classification::Admitting(r) => {
                    (0, json!({"field": field.to_string(), "verdict": "Admitting", "r": r.to_string()}))
                }
                S42Classification::NotAdmitting(why) => {
                    (1, json!({"field": field.to_string(), "verdict": "NotAdmitting", "reason": why}))
                }
            };
            println!("{out}");
            Ok(code)
        }
        Command::Search {
            target,
            field,
            max_size,
            seed,
            support_only,
            budget,
        } => {
            let text = read(&target)?;
            let target = if support_only {
                SearchTarget::Support(Polynomial::parse(FieldSpec::Rationals, 0, text.trim())?.support())
            } else {
                SearchTarget::Exact(Polynomial::parse(field, 0, text.trim())?)
            };
            let mut cfg = SearchConfig::new(target, field);
            if let Some(m) = max_size {
                cfg.max_size = m;
            }
            if let Some(b) = budget {
                cfg.node_budget = b;
            }
            cfg.seed = seed;
            let (code, out) = match search::search_rod(&cfg)? {
                SearchOutcome::Found(w) => (0, format!(r#"{{"outcome":"Found","witness":{}}}"#, w.to_json())),
                SearchOutcome::ExhaustedUpTo(m) => (1, json!({"outcome": "ExhaustedUpTo", "size": m}).to_string()),
                SearchOutcome::BudgetExceeded(nodes) => {
                    (2, json!({"outcome": "BudgetExceeded", "nodes": nodes}).to_string())
                }
            };
            println!("{out}");
            Ok(code)
        }
        Command::Certify { mon, nvars } => {
            let mut support = Polynomial::parse(FieldSpec::Rationals, nvars.unwrap_or(0), read(&mon)?.trim())?.support();
            if let Some(n) = nvars {
                support.nvars = support.nvars.max(n);
            }
            let cert = search::fullness_certificate(&support);
            println!("{}", serde_json::to_string(&cert).expect("certificate serializes"));
            Ok(match cert.verdict {
                Verdict::NotExpressible => 0,
                Verdict::Inapplicable => 1,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

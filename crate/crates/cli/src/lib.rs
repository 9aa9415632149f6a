//! Argument parsing and report assembly for the `l2inv` binary. Every number
//! in a report comes from a library call; this layer only routes and wraps.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use l2inv_core::certificate::Certificate;
use l2inv_core::ns_calculus::{olbrich_profile, rank_one_bound};
use l2inv_core::parabolic::{enumerate_parabolics, minimal_parabolic};
use l2inv_core::qforms::{senary_pipeline, isotropy_search, DiagonalForm};
use l2inv_core::real_forms::{derive, middle_dimension, FormSpec};
use l2inv_core::tits_index::{restrict, TitsIndexFile};
use l2inv_core::torsion_ledger::{corner_euler_sum, corner_strata, torsion_verdict};
use l2inv_spectral::complex::{circle, gapped_circle, z2, AbelianCWComplex};
use l2inv_spectral::density::{default_grid, estimate_density, DEFAULT_SEED};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("malformed {path}: {reason}")]
    Malformed { path: String, reason: String },
    #[error(transparent)]
    Core(#[from] l2inv_core::Error),
    #[error("spectral_density: {0}")]
    Spectral(#[from] l2inv_spectral::SpectralError),
}

impl CliError {
    /// Module whose precondition failed.
    pub fn module(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "cli",
            CliError::Io { .. } | CliError::Malformed { .. } => "input",
            CliError::Core(e) => e.module(),
            CliError::Spectral(_) => "spectral_density",
        }
    }

    pub fn to_json(&self, argv: &[String]) -> Value {
        json!({
            "command": argv,
            "error": { "module": self.module(), "message": self.to_string() },
            "version": VERSION,
        })
    }
}

fn core<E: Into<l2inv_core::Error>>(e: E) -> CliError {
    CliError::Core(e.into())
}

#[derive(Debug, Parser)]
#[command(name = "l2inv", version, about = "L²-invariant calculators for arithmetic groups")]
pub struct Cli {
    /// Render results as a plain table instead of JSON.
    #[arg(long, global = true)]
    pub table: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Real-form data of a semisimple group.
    Group {
        #[command(subcommand)]
        action: GroupCmd,
    },
    /// Standard ℚ-parabolics of a Tits index.
    Parabolic {
        #[command(subcommand)]
        action: ParabolicCmd,
    },
    /// Novikov–Shubin bounds.
    Ns {
        #[command(subcommand)]
        action: NsCmd,
    },
    /// L²-torsion verdicts.
    Torsion {
        #[command(subcommand)]
        action: TorsionCmd,
    },
    /// Corner strata of the half-open cube.
    Corner {
        #[command(subcommand)]
        action: CornerCmd,
    },
    /// Spectral density estimation on free abelian complexes.
    Density {
        #[command(subcommand)]
        action: DensityCmd,
    },
    /// Rational quadratic forms.
    Qform {
        #[command(subcommand)]
        action: QformCmd,
    },
}

#[derive(Debug, Args)]
pub struct FormArgs {
    /// Family: SL, SO, SU, Sp, SOstar, complex, compact, euclidean.
    pub family: String,
    pub params: Vec<String>,
}

impl FormArgs {
    fn spec(&self) -> Result<FormSpec, CliError> {
        let params: Vec<&str> = self.params.iter().map(String::as_str).collect();
        FormSpec::parse_parts(&self.family, &params).map_err(core)
    }
}

#[derive(Debug, Subcommand)]
pub enum GroupCmd {
    Describe(FormArgs),
}

#[derive(Debug, Subcommand)]
pub enum ParabolicCmd {
    List {
        #[arg(long)]
        index: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum NsCmd {
    /// α̃_q bound for a ℚ-rank-one lattice from its minimal parabolic.
    Bound {
        #[arg(long)]
        index: PathBuf,
        /// Real form of the Levi quotient M_P, e.g. `SO,2,2`.
        #[arg(long)]
        levi: String,
        /// Real form of G; overrides the `real_form` field of the index file.
        #[arg(long)]
        group: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum TorsionCmd {
    Verdict(FormArgs),
}

#[derive(Debug, Subcommand)]
pub enum CornerCmd {
    Strata {
        #[arg(long)]
        l: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum DensityCmd {
    Estimate {
        /// Path to a complex JSON file, or one of `circle`, `z2`, `gapped`.
        #[arg(long)]
        complex: String,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Worker threads; results do not depend on this.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum QformCmd {
    /// Search for a primitive zero of a diagonal form.
    Isotropy {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coeffs: Vec<i64>,
        #[arg(long)]
        height: u32,
    },
    /// Full chain for ⟨1,1,1,−1,−p,−p⟩: form, index, parabolic, bound, torsion.
    Pipeline {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 100)]
        search_height: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Vec<String>,
    /// sha256 over the argument vector and the bytes of every input file.
    pub inputs_digest: String,
    pub results: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    /// Library operations that produced `results`.
    pub provenance: Vec<String>,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new(argv: &[String]) -> Self {
        let mut hasher = Sha256::new();
        for a in argv {
            hasher.update((a.len() as u64).to_le_bytes());
            hasher.update(a.as_bytes());
        }
        Inputs { hasher }
    }

    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.display().to_string(), reason: e.to_string() })?;
        self.hasher.update((text.len() as u64).to_le_bytes());
        self.hasher.update(text.as_bytes());
        Ok(text)
    }

    fn digest(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn read_index(inputs: &mut Inputs, path: &Path) -> Result<TitsIndexFile, CliError> {
    let text = inputs.read(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Malformed { path: path.display().to_string(), reason: e.to_string() })
}

fn parse_form(text: &str) -> Result<FormSpec, CliError> {
    text.parse::<FormSpec>().map_err(core)
}

/// Parses `argv` (including the program name) and runs the command.
pub fn dispatch(argv: &[String]) -> Result<Report, CliError> {
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli, argv)
}

pub fn run(cli: &Cli, argv: &[String]) -> Result<Report, CliError> {
    let echo: Vec<String> = argv.iter().skip(1).cloned().collect();
    let mut inputs = Inputs::new(&echo);
    let mut certificate = None;
    let mut seed = None;
    let (results, provenance): (Value, Vec<&str>) = match &cli.command {
        Command::Group { action: GroupCmd::Describe(form) } => {
            let g = derive(&form.spec()?).map_err(core)?;
            let mut r = to_value(&g);
            r["middle_dimension"] = json!(middle_dimension(&g));
            let mut prov = vec!["real_forms::derive", "real_forms::middle_dimension"];
            if g.factors.is_empty() && g.is_noncompact_nonabelian() {
                r["olbrich_profile"] = to_value(&olbrich_profile(g.dim_x, g.deficiency));
                prov.push("ns_calculus::olbrich_profile");
            }
            (r, prov)
        }
        Command::Parabolic { action: ParabolicCmd::List { index } } => {
            let file = read_index(&mut inputs, index)?;
            let rrs = restrict(&file.into_index().map_err(core)?);
            let ps = enumerate_parabolics(&rrs);
            (
                json!({ "label": file.label, "restricted": rrs, "parabolics": ps }),
                vec!["tits_index::restrict", "parabolic::enumerate_parabolics"],
            )
        }
        Command::Ns { action: NsCmd::Bound { index, levi, group } } => {
            let file = read_index(&mut inputs, index)?;
            let spec = match (group, &file.real_form) {
                (Some(g), _) => parse_form(g)?,
                (None, Some(s)) => s.clone(),
                (None, None) => {
                    return Err(CliError::Usage(
                        "ns bound needs the real form of G: add \"real_form\" to the index file or pass --group".into(),
                    ))
                }
            };
            let g = derive(&spec).map_err(core)?;
            let rrs = restrict(&file.into_index().map_err(core)?);
            let levi = derive(&parse_form(levi)?).map_err(core)?;
            let p_min = minimal_parabolic(&rrs).with_annotation(levi);
            let report = rank_one_bound(&g, &rrs, &p_min).map_err(core)?;
            certificate = Some(report.certificate.clone());
            let mut r = to_value(&report);
            r.as_object_mut().expect("struct").remove("certificate");
            r["group"] = json!(g.name);
            r["parabolic"] = json!(p_min.name);
            (r, vec!["tits_index::restrict", "parabolic::minimal_parabolic", "ns_calculus::rank_one_bound"])
        }
        Command::Torsion { action: TorsionCmd::Verdict(form) } => {
            let g = derive(&form.spec()?).map_err(core)?;
            (to_value(&torsion_verdict(&g)), vec!["real_forms::derive", "torsion_ledger::torsion_verdict"])
        }
        Command::Corner { action: CornerCmd::Strata { l } } => {
            let strata = corner_strata(*l);
            let sum = corner_euler_sum(&strata);
            (
                json!({ "l": l, "count": strata.len(), "sum": sum, "strata": strata }),
                vec!["torsion_ledger::corner_strata", "torsion_ledger::corner_euler_sum"],
            )
        }
        Command::Density { action: DensityCmd::Estimate { complex, degree, samples, seed: s, workers } } => {
            let c = match complex.as_str() {
                "circle" => circle(),
                "z2" => z2(),
                "gapped" => gapped_circle(),
                path => {
                    let text = inputs.read(Path::new(path))?;
                    AbelianCWComplex::from_json(&text)?
                }
            };
            seed = Some(*s);
            let e = estimate_density(&c, *degree, &default_grid(&c, *degree), *samples, *s, *workers)?;
            let mut r = to_value(&e);
            r["complex"] = json!(c.name);
            r["ns_value"] = e.exponent.as_ref().map(|x| to_value(&x.ns_value())).unwrap_or(Value::Null);
            (r, vec!["spectral_density::estimate_density", "spectral_density::estimate_ns"])
        }
        Command::Qform { action: QformCmd::Isotropy { coeffs, height } } => {
            let f = DiagonalForm::from_ints(coeffs).map_err(core)?;
            (to_value(&isotropy_search(&f, *height).map_err(core)?), vec!["qforms::isotropy_search"])
        }
        Command::Qform { action: QformCmd::Pipeline { p, search_height } } => {
            let report = senary_pipeline(*p, *search_height)?;
            certificate = Some(report.bound.certificate.clone());
            let mut r = to_value(&report);
            r["bound"].as_object_mut().expect("struct").remove("certificate");
            r["invariants"] = report.invariants();
            (r, vec!["qforms::senary_pipeline"])
        }
    };
    Ok(Report {
        command: echo,
        inputs_digest: inputs.digest(),
        results,
        certificate,
        provenance: provenance.into_iter().map(String::from).collect(),
        version: VERSION.to_string(),
        seed,
    })
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") }, x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Two-column plain-text rendering of a report. Density estimates get a
/// λ / F̂ table instead.
pub fn render_table(report: &Report) -> String {
    let r = &report.results;
    let mut s = String::new();
    if let (Some(grid), Some(values)) = (r["grid"].as_array(), r["values"].as_array()) {
        s.push_str(&format!("{:>14}  {:>10}\n", "lambda", "F"));
        for (g, v) in grid.iter().zip(values) {
            s.push_str(&format!("{:>14.6e}  {:>10.6}\n", g.as_f64().unwrap_or(f64::NAN), v.as_f64().unwrap_or(f64::NAN)));
        }
        s.push_str(&format!("betti {}\nexponent {}\n", r["betti"], r["exponent"]));
        return s;
    }
    let mut rows = Vec::new();
    flatten("", r, &mut rows);
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    for (k, v) in rows {
        s.push_str(&format!("{k:<width$}  {v}\n"));
    }
    s
}

//! `sembed`: build, check, weld, sample and render s-embeddings.
//!
//! Exit codes: 0 success, 2 validation failure, 3 schema error, 4 I/O.

mod pipeline;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sembed::constructions::{build, ConstructionSpec};
use sembed::embedding::io::{
    embedding_from_json, embedding_to_json, render_svg, EmbeddingRecord, SvgOptions,
};
use sembed::embedding::SEmbedding;
use sembed::fk::{
    batches_to_csv, run_experiment, sample_fk, Algorithm, BoundaryConditions, FkDomain, McConfig,
    SamplerParams,
};
use sembed::graph::json::{graph_from_json, graph_to_json, GraphRecord};
use sembed::surgery::{render_weld_svg, weld_square_district, WeldParams};
use sembed::{schema, Error};

use pipeline::{run_checks, Checks, ExpFatCheck, LipCheck};

#[derive(Parser)]
#[command(
    name = "sembed",
    version,
    about = "s-embeddings of planar Ising models"
)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an embedding from a construction spec (JSON).
    Build {
        spec: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Apply boost(t) to the result.
        #[arg(long)]
        boost: Option<f64>,
        /// Also write the weighted graph G.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Validate an embedding; exit 2 when a requested check fails.
    Check {
        embedding: PathBuf,
        /// Require Lip(κ, δ) at the given κ.
        #[arg(long)]
        lip: Option<f64>,
        /// Scale δ for --lip (default: the domain diameter).
        #[arg(long, requires = "lip")]
        lip_delta: Option<f64>,
        /// Require Exp-Fat(δ, ρ).
        #[arg(long, num_args = 2, value_names = ["DELTA", "RHO"])]
        exp_fat: Option<Vec<f64>>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Weld a square district into an embedding.
    Surgery {
        embedding: PathBuf,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Full weld parameters (JSON); overrides --kappa/--delta.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run a crossing or annulus experiment (JSON config).
    Mc {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Per-batch frequencies as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Draw an embedding as SVG.
    Render {
        embedding: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Colour quads by Q.
        #[arg(long)]
        q_heat: bool,
        /// Overlay one FK sample drawn with this seed.
        #[arg(long)]
        fk_seed: Option<u64>,
        #[arg(long, default_value_t = 800.0)]
        width: f64,
    },
    /// Load, save and reload a graph or embedding file and compare.
    Roundtrip { path: PathBuf },
    /// Full pipeline from an experiment config.
    Run { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        set_threads(n);
    }
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) {
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build_global();
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_: usize) {}

pub(crate) const OK: u8 = 0;
pub(crate) const VALIDATION: u8 = 2;
const SCHEMA: u8 = 3;
const IO: u8 = 4;

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return IO;
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Io(_) => IO,
                Error::Schema { .. } | Error::Parameter(_) => SCHEMA,
                _ => VALIDATION,
            };
        }
    }
    VALIDATION
}

pub(crate) fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub(crate) fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read(path)?;
    schema::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub(crate) fn load_embedding(path: &Path) -> Result<SEmbedding> {
    embedding_from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub(crate) fn build_embedding(
    spec: &ConstructionSpec,
    boost: Option<f64>,
) -> Result<(SEmbedding, Option<String>)> {
    let c = build(spec)?;
    let graph = c.graph.as_ref().map(|g| graph_to_json(&g.graph));
    let e = match boost {
        Some(t) => c.embedding.boost(t)?,
        None => c.embedding,
    };
    Ok((e, graph))
}

/// One FK sample on all quads of `e`, drawn as segments between white sites.
pub(crate) fn fk_overlay(e: &SEmbedding, seed: u64) -> Result<Vec<(sembed::C64, sembed::C64)>> {
    let quads: Vec<usize> = (0..e.n_quads()).collect();
    let dom = FkDomain::from_mesh(&e.mesh, &e.s, &quads)?;
    let bc = BoundaryConditions::rectangle(&dom).unwrap_or(BoundaryConditions::Free);
    let params = SamplerParams {
        seed,
        samples: 1,
        burn_in: 100,
        thin: 1,
        algorithm: Algorithm::SwendsenWang,
    };
    let s = sample_fk(&dom, &bc, &params)?.remove(0);
    Ok(dom
        .edges
        .iter()
        .zip(&s.open)
        .filter(|(_, &o)| o)
        .map(|(ed, _)| (dom.site_pos[ed.u], dom.site_pos[ed.v]))
        .collect())
}

fn dispatch(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Build {
            spec,
            out,
            boost,
            graph,
        } => {
            let spec: ConstructionSpec = load(&spec)?;
            let (e, g) = build_embedding(&spec, boost)?;
            write(&out, &embedding_to_json(&e))?;
            if let Some(path) = graph {
                let g =
                    g.ok_or_else(|| Error::Parameter("the construction has no graph G".into()))?;
                write(&path, &g)?;
            }
            Ok(OK)
        }
        Command::Check {
            embedding,
            lip,
            lip_delta,
            exp_fat,
            out,
        } => {
            let e = load_embedding(&embedding)?;
            let checks = Checks {
                properness: true,
                lip: lip.map(|kappa| LipCheck {
                    kappa,
                    delta: lip_delta,
                }),
                exp_fat: exp_fat.map(|v| ExpFatCheck {
                    delta: v[0],
                    rho: v[1],
                }),
            };
            let report = run_checks(&e, &checks);
            emit(out.as_deref(), &schema::to_string(&report))?;
            Ok(if report.pass { OK } else { VALIDATION })
        }
        Command::Surgery {
            embedding,
            kappa,
            delta,
            params,
            out,
            report,
            svg,
        } => {
            let e = load_embedding(&embedding)?;
            let params: WeldParams = match (params, kappa, delta) {
                (Some(p), _, _) => load(&p)?,
                (None, Some(k), Some(d)) => WeldParams::new(k, d),
                _ => {
                    return Err(Error::Parameter(
                        "surgery needs --params or both --kappa and --delta".into(),
                    )
                    .into())
                }
            };
            let w = weld_square_district(&e, &[], &params)?;
            write(&out, &embedding_to_json(&w.embedding))?;
            if let Some(p) = report {
                write(&p, &schema::to_string(&w))?;
            }
            if let Some(p) = svg {
                write(&p, &render_weld_svg(&e, &w))?;
            }
            Ok(if w.proper && w.lip_ok { OK } else { VALIDATION })
        }
        Command::Mc {
            config,
            seed,
            samples,
            out,
            csv,
        } => {
            let mut cfg: McConfig = load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = samples {
                cfg.samples = n;
            }
            let report = run_experiment(&cfg)?;
            emit(out.as_deref(), &schema::to_string(&report))?;
            if let Some(p) = csv {
                write(&p, &batches_to_csv(&report))?;
            }
            Ok(OK)
        }
        Command::Render {
            embedding,
            out,
            q_heat,
            fk_seed,
            width,
        } => {
            let e = load_embedding(&embedding)?;
            let overlay = match fk_seed {
                Some(seed) => fk_overlay(&e, seed)?,
                None => Vec::new(),
            };
            write(
                &out,
                &render_svg(
                    &e,
                    &SvgOptions {
                        q_heat,
                        overlay,
                        width,
                        ..Default::default()
                    },
                ),
            )?;
            Ok(OK)
        }
        Command::Roundtrip { path } => roundtrip(&path),
        Command::Run { config } => pipeline::run(&config),
    }
}

/// Graph files carry `rotations`, embedding files `quads`.
fn roundtrip(path: &Path) -> Result<u8> {
    let text = read(path)?;
    let value: serde_json::Value = schema::from_str(&text)?;
    let same = if value.get("rotations").is_some() {
        let a = graph_from_json(&text)?;
        let b = graph_from_json(&graph_to_json(&a))?;
        GraphRecord::from_graph(&a) == GraphRecord::from_graph(&b)
    } else if value.get("quads").is_some() {
        let a = embedding_from_json(&text)?;
        let b = embedding_from_json(&embedding_to_json(&a))?;
        EmbeddingRecord::from_embedding(&a) == EmbeddingRecord::from_embedding(&b)
    } else {
        return Err(
            Error::schema("", "neither a graph (rotations) nor an embedding (quads)").into(),
        );
    };
    if same {
        println!("roundtrip ok: {}", path.display());
        Ok(OK)
    } else {
        eprintln!("roundtrip changed {}", path.display());
        Ok(VALIDATION)
    }
}

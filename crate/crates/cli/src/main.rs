use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use tropsurf::dual_complex::{build_complex, render_off, Marker};
use tropsurf::lattice::{catalog_e_cases, catalog_tetrahedra, catalog_triangles, catalogs};
use tropsurf::linalg::format_rational;
use tropsurf::matroid::{
    chains_case, enumerate_flags_of_flats, flag_of_subsets, gale_dual, is_flat, DEFAULT_ENUMERATION_BOUND,
};
use tropsurf::oracle::singular_locus;
use tropsurf::polyhedron::Piece;
use tropsurf::singular::{Certificate, Metric, SingularityReport};
use tropsurf::subdivision::{
    extract_circuit, is_maximal_dimensional_type, label, regular_subdivision, total_volume, HeightVector, PointConfig,
};
use tropsurf::{classify_with, ClassifyOptions, Flag, Rational};

#[derive(Parser)]
#[command(name = "tropsurf", version, about = "Singular points of tropical surfaces")]
struct Cli {
    /// Write the result here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regular marked subdivision induced by the heights.
    Subdivide { input: PathBuf },
    /// Vertices, edges and 2-cells of the tropical surface.
    Surface { input: PathBuf },
    /// Flag of the height vector and its classification.
    Flags { input: PathBuf },
    /// Singular points with case labels.
    Singular {
        input: PathBuf,
        /// Include shifted heights and flags.
        #[arg(long)]
        certificate: bool,
        /// Report the solution families when the cone is not of codimension one.
        #[arg(long)]
        lift_codim_gate: bool,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BOUND)]
        oracle_bound: usize,
    },
    /// Normal-form catalogs: a1, a2, triangles or e.
    Catalog {
        #[arg(long)]
        id: Option<String>,
    },
    /// Brute-force enumeration.
    Oracle {
        #[command(subcommand)]
        what: OracleCommand,
    },
    /// OFF mesh of the surface with singular points in the header.
    Render {
        input: PathBuf,
        #[arg(long, default_value_t = 20.0)]
        bound: f64,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Maximal flags of flats accepted by the chain classification.
    Flags {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BOUND)]
        bound: usize,
    },
    /// Singular locus as a union of polyhedra, one per maximal flag.
    Locus {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BOUND)]
        bound: usize,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum HeightValue {
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Input {
    points: Vec<[i64; 3]>,
    heights: Option<Vec<HeightValue>>,
}

struct Job {
    cfg: PointConfig,
    u: Option<HeightVector>,
}

impl Job {
    fn heights(&self) -> Result<&HeightVector> {
        self.u.as_ref().context("input has no \"heights\" field")
    }
}

fn load(path: &Path) -> Result<Job> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let input: Input = serde_json::from_str(&text).with_context(|| {
        format!(
            "{}: expected {{\"points\": [[i,j,k],...], \"heights\": [\"p/q\",...]}}",
            path.display()
        )
    })?;
    let cfg = PointConfig::new(input.points).context("invalid point configuration")?;
    let u = match input.heights {
        None => None,
        Some(values) => {
            let text: Vec<String> = values
                .into_iter()
                .map(|v| match v {
                    HeightValue::Int(i) => i.to_string(),
                    HeightValue::Text(s) => s,
                })
                .collect();
            let u = HeightVector::parse(&text).context("invalid height")?;
            u.check(&cfg).context("invalid heights")?;
            Some(u)
        }
    };
    Ok(Job { cfg, u })
}

fn rationals(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(format_rational(x))).collect())
}

fn label_list(idx: &[usize]) -> Value {
    Value::Array(idx.iter().map(|&i| Value::String(label(i))).collect())
}

fn flag_json(flag: &Flag) -> Value {
    Value::Array(flag.differences().iter().map(|d| label_list(d)).collect())
}

fn piece_json(p: &Piece) -> Value {
    json!({
        "dim": p.dim,
        "bounded": p.is_bounded(),
        "vertices": p.vertices.iter().map(|v| rationals(v)).collect::<Vec<_>>(),
        "rays": p.rays.iter().map(|v| rationals(v)).collect::<Vec<_>>(),
        "lineality": p.lineality.iter().map(|v| rationals(v)).collect::<Vec<_>>(),
    })
}

fn metric_json(m: &Metric) -> Value {
    match m {
        Metric::Vertex { multiplicity } => json!({"kind": "vertex", "multiplicity": multiplicity.to_string()}),
        Metric::Edge(e) => json!({
            "kind": "edge",
            "endpoints": e.endpoints.iter().map(|v| rationals(v)).collect::<Vec<_>>(),
            "apexes": label_list(&e.apexes),
            "apex_heights": e.apex_heights.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
            "ray": e.ray.as_ref().map(|r| rationals(r)),
            "ratio": e.ratio,
            "distance": e.distance.as_ref().map(format_rational),
            "consistent": e.consistent,
        }),
        Metric::Barycenter(b) => json!({
            "kind": "barycenter",
            "pairs": b.pairs.iter().map(|p| label_list(p)).collect::<Vec<_>>(),
            "vertices": b.vertices.iter().map(|v| rationals(v)).collect::<Vec<_>>(),
            "weights": b.weights.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "identity": b.identity,
        }),
        Metric::Trapeze(t) => json!({
            "kind": "trapeze",
            "corners": t.corners.iter().map(|v| rationals(v)).collect::<Vec<_>>(),
            "average": t.average,
        }),
    }
}

fn certificate_json(c: &Certificate) -> Value {
    json!({
        "shifted": rationals(&c.shifted.0),
        "flag": flag_json(&c.flag),
        "case": c.case.tag.to_string(),
        "boundary_of": c.boundary_of.as_ref().map(flag_json),
    })
}

fn report_json(r: &SingularityReport, certificate: bool) -> Value {
    let points: Vec<Value> = r
        .points
        .iter()
        .map(|p| {
            let mut v = json!({
                "location": rationals(&p.location),
                "case": p.label.to_string(),
                "metric": metric_json(&p.metric),
                "sources": p.sources.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            });
            if certificate {
                v["certificate"] = certificate_json(&p.certificate);
            }
            v
        })
        .collect();
    json!({
        "generic": r.generic,
        "codim": r.codim,
        "circuit": r.circuit.as_ref().map(|(idx, t)| json!({"points": label_list(idx), "type": format!("{t:?}")})),
        "points": points,
        "families": r.families.iter().map(|f| {
            let mut v = piece_json(&f.piece);
            v["flag"] = flag_json(&f.flag);
            v
        }).collect::<Vec<_>>(),
        "refusals": r.refusals.iter().map(|x| json!({"kind": x.kind.to_string(), "message": x.message})).collect::<Vec<_>>(),
    })
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Subdivide { input } => {
            let job = load(&input)?;
            let u = job.heights()?;
            let t = regular_subdivision(&job.cfg, u);
            let circuit = extract_circuit(&job.cfg, &t).ok();
            let v = json!({
                "codim": t.dim_l_t,
                "maximal_type": is_maximal_dimensional_type(&job.cfg, &t),
                "volume": total_volume(&job.cfg, &t).to_string(),
                "cells": t.cells.iter().map(|c| json!({
                    "vertices": label_list(&c.vertices),
                    "marked": label_list(&c.marked),
                    "dual_vertex": rationals(&c.dual_vertex),
                })).collect::<Vec<_>>(),
                "circuit": circuit.map(|c| json!({"points": label_list(&c.indices), "type": format!("{:?}", c.circuit_type)})),
            });
            emit(&cli.output, &pretty(&v))?;
            Ok(0)
        }
        Command::Surface { input } => {
            let job = load(&input)?;
            let u = job.heights()?;
            let t = regular_subdivision(&job.cfg, u);
            let s = build_complex(&job.cfg, u, &t);
            emit(&cli.output, &pretty(&serde_json::to_value(&s)?))?;
            Ok(0)
        }
        Command::Flags { input } => {
            let job = load(&input)?;
            let u = job.heights()?;
            let b = gale_dual(&job.cfg);
            let flag = flag_of_subsets(u);
            let verdict = match chains_case(&job.cfg, &b, &flag) {
                Ok(case) => json!({
                    "accepted": true,
                    "case": case.tag.to_string(),
                    "j": case.j,
                    "i": case.i,
                    "circuit": label_list(&case.circuit),
                }),
                Err(r) => json!({"accepted": false, "reason": r.to_string()}),
            };
            let v = json!({
                "flag": flag_json(&flag),
                "levels_are_flats": flag.levels.iter().map(|l| is_flat(&b, l)).collect::<Vec<_>>(),
                "verdict": verdict,
            });
            emit(&cli.output, &pretty(&v))?;
            Ok(0)
        }
        Command::Singular {
            input,
            certificate,
            lift_codim_gate,
            oracle_bound,
        } => {
            let job = load(&input)?;
            let u = job.heights()?;
            let opts = ClassifyOptions {
                lift_codim_gate,
                oracle_bound,
            };
            let report = classify_with(&job.cfg, u, &opts);
            emit(&cli.output, &pretty(&report_json(&report, certificate)))?;
            Ok(if report.is_refused() { 1 } else { 0 })
        }
        Command::Catalog { id } => {
            let v = match id.as_deref() {
                None => serde_json::to_value(catalogs())?,
                Some("a1") => json!({"pentatope": catalogs().pentatope}),
                Some("a2") => serde_json::to_value(catalog_tetrahedra())?,
                Some("triangles") => serde_json::to_value(catalog_triangles())?,
                Some("e") => serde_json::to_value(catalog_e_cases())?,
                Some(other) => bail!("unknown catalog id {other:?}; expected a1, a2, triangles or e"),
            };
            emit(&cli.output, &pretty(&v))?;
            Ok(0)
        }
        Command::Oracle { what } => match what {
            OracleCommand::Flags { input, bound } => {
                let job = load(&input)?;
                let b = gale_dual(&job.cfg);
                let flags = enumerate_flags_of_flats(&job.cfg, &b, bound)?;
                let list: Vec<Value> = flags
                    .iter()
                    .map(|f| {
                        let case = chains_case(&job.cfg, &b, f).expect("enumerated flags are accepted");
                        json!({"flag": flag_json(f), "case": case.tag.to_string()})
                    })
                    .collect();
                emit(&cli.output, &pretty(&json!({"count": list.len(), "flags": list})))?;
                Ok(0)
            }
            OracleCommand::Locus { input, bound } => {
                let job = load(&input)?;
                let u = job.heights()?;
                let pieces = singular_locus(&job.cfg, u, bound)?;
                let list: Vec<Value> = pieces
                    .iter()
                    .map(|p| {
                        let mut v = piece_json(&p.piece);
                        v["flag"] = flag_json(&p.flag);
                        v
                    })
                    .collect();
                emit(&cli.output, &pretty(&json!({"pieces": list})))?;
                Ok(0)
            }
        },
        Command::Render { input, bound } => {
            let job = load(&input)?;
            let u = job.heights()?;
            let t = regular_subdivision(&job.cfg, u);
            let s = build_complex(&job.cfg, u, &t);
            let report = classify_with(&job.cfg, u, &ClassifyOptions::default());
            let markers: Vec<Marker> = report
                .points
                .iter()
                .map(|p| Marker {
                    point: p.location.clone(),
                    label: p.label.to_string(),
                })
                .collect();
            emit(&cli.output, &render_off(&s, &markers, bound))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

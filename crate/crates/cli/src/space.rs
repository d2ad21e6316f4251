use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Subcommand};
use pcap::radial::RadialWeight;
use pcap::space::{build_grid, build_path, GridBox, GridWeight};

use crate::output::Output;
use crate::specs::{load_graph, parse_weight};
use crate::{Global, Status};

#[derive(Subcommand)]
pub enum SpaceCommand {
    /// Lattice discretization of a weighted box
    BuildGrid(BuildGrid),
    /// Path graph 0 - 1 - ... - N
    BuildPath(BuildPath),
    /// Print vertex and edge counts and basic statistics
    Info(Info),
}

#[derive(Args)]
pub struct BuildGrid {
    /// Lower corner then upper corner, e.g. 0,0,1,1
    #[arg(long, value_delimiter = ',', required = true)]
    bounds: Vec<f64>,
    /// Lattice spacing
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Weight: const:C, power:SCALE:EXP or powlog:BETA:GAMMA (radial ones about --center)
    #[arg(long, default_value = "const:1")]
    weight: String,
    /// Center for radial weights; defaults to the box center
    #[arg(long, value_delimiter = ',')]
    center: Option<Vec<f64>>,
    /// Graph file (default: graph.json in the output directory)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct BuildPath {
    #[arg(long, value_delimiter = ',', required = true)]
    conductances: Vec<f64>,
    /// Edge lengths (default: all 1)
    #[arg(long, value_delimiter = ',')]
    lengths: Option<Vec<f64>>,
    /// Vertex measures, one more than edges (default: all 1)
    #[arg(long, value_delimiter = ',')]
    measures: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct Info {
    graph: PathBuf,
    /// Also write the per-vertex table here
    #[arg(long)]
    vertices: Option<PathBuf>,
}

pub fn run(cmd: &SpaceCommand, global: &Global) -> Result<Status> {
    match cmd {
        SpaceCommand::BuildGrid(a) => {
            if a.bounds.is_empty() || a.bounds.len() % 2 != 0 {
                bail!("--bounds needs a lower and an upper corner of equal dimension");
            }
            let dim = a.bounds.len() / 2;
            let bounds = GridBox::new(a.bounds[..dim].to_vec(), a.bounds[dim..].to_vec())?;
            let weight = match parse_weight(&a.weight)? {
                RadialWeight::Constant(c) => GridWeight::Constant(c),
                weight => {
                    let center = a.center.clone().unwrap_or_else(|| bounds.center());
                    if center.len() != dim {
                        bail!("--center has {} coordinates, the box has {dim}", center.len());
                    }
                    GridWeight::Radial { center, weight }
                }
            };
            let space = build_grid(&bounds, a.h, &weight, a.p)?;
            let out = Output::new(&global.out_dir)?;
            let path = out.path(a.out.as_deref(), "graph.json");
            space.save(&path)?;
            println!("{} vertices, {} edges -> {}", space.vertex_count(), space.edge_count(), path.display());
        }
        SpaceCommand::BuildPath(a) => {
            let m = a.conductances.len();
            let lengths = a.lengths.clone().unwrap_or_else(|| vec![1.0; m]);
            let measures = a.measures.clone().unwrap_or_else(|| vec![1.0; m + 1]);
            let space = build_path(&a.conductances, &lengths, &measures, a.p)?;
            let out = Output::new(&global.out_dir)?;
            let path = out.path(a.out.as_deref(), "graph.json");
            space.save(&path)?;
            println!("{} vertices, {} edges -> {}", space.vertex_count(), space.edge_count(), path.display());
        }
        SpaceCommand::Info(a) => {
            let space = load_graph(&a.graph, None)?;
            let c = space.edges().iter().map(|e| e.conductance);
            let (cmin, cmax) = c.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            println!("key,value");
            println!("vertices,{}", space.vertex_count());
            println!("edges,{}", space.edge_count());
            println!("p,{}", space.p());
            println!("total_measure,{:e}", space.measure().iter().sum::<f64>());
            println!("min_conductance,{cmin:e}");
            println!("max_conductance,{cmax:e}");
            println!("max_degree,{}", (0..space.vertex_count()).map(|v| space.degree(v)).max().unwrap_or(0));
            if let Some(coords) = space.coordinates() {
                println!("dimension,{}", coords[0].len());
            }
            if let Some(h) = space.spacing() {
                println!("spacing,{h}");
            }
            if let Some(path) = &a.vertices {
                Output::new(&global.out_dir)?.write(path, |w| Ok(space.write_vertex_csv(w)?))?;
            }
        }
    }
    Ok(Status::Pass)
}

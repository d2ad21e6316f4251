use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Subcommand};
use pcap::radial::{
    annulus_capacity, point_capacity_class, radial_green_profile, radial_to_path, write_profile_csv, RadialProfile,
};

use crate::output::{display, Output};
use crate::plot::{log_log, Series};
use crate::specs::parse_weight;
use crate::{Global, Status};

#[derive(Subcommand)]
pub enum RadialCommand {
    /// Capacity of the annulus (B_r, B_R)
    Cap(CapArgs),
    /// Sampled radial Green profile g(rho) = cap(B_rho, B_R)^(1/(1-p))
    Green(GreenArgs),
    /// Whether the origin has zero or positive capacity
    Classify(ClassifyArgs),
    /// Discretize [r_min, R] into a path graph of shells
    ToPath(ToPathArgs),
}

#[derive(Args)]
struct ProfileArgs {
    /// Dimension
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    /// Weight: const:C, power:SCALE:EXP or powlog:BETA:GAMMA
    #[arg(long, default_value = "const:1")]
    weight: String,
    /// In one dimension, use the half line instead of the line
    #[arg(long)]
    one_sided: bool,
}

impl ProfileArgs {
    fn profile(&self) -> Result<RadialProfile> {
        let profile = RadialProfile::new(self.n, self.p, parse_weight(&self.weight)?)?;
        Ok(if self.one_sided { profile.one_sided() } else { profile })
    }
}

#[derive(Args)]
pub struct CapArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    /// Inner radius
    #[arg(long)]
    r: f64,
    /// Outer radius
    #[arg(long = "R")]
    big_r: f64,
}

#[derive(Args)]
pub struct GreenArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    /// Outer radius
    #[arg(long = "R")]
    big_r: f64,
    /// Sample radii (default: geometric from --r-min to R)
    #[arg(long, value_delimiter = ',')]
    rho: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    r_min: f64,
    #[arg(long, default_value_t = 32)]
    samples: usize,
    /// Profile table (default: radial_green.csv in the output directory)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    /// Radius of the neighbourhood of the origin
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
}

#[derive(Args)]
pub struct ToPathArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    #[arg(long)]
    r_min: f64,
    #[arg(long = "R")]
    big_r: f64,
    #[arg(long, default_value_t = 100)]
    shells: usize,
    /// Graph file (default: radial_path.json in the output directory)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn geometric(lo: f64, hi: f64, k: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo < hi) || k < 2 {
        bail!("need 0 < r-min < R and at least 2 samples");
    }
    let ratio = (hi / lo).ln() / (k - 1) as f64;
    let mut rho: Vec<f64> = (0..k).map(|i| lo * (ratio * i as f64).exp()).collect();
    rho[k - 1] = hi;
    Ok(rho)
}

pub fn run(cmd: &RadialCommand, global: &Global) -> Result<Status> {
    match cmd {
        RadialCommand::Cap(a) => {
            println!("{}", display(annulus_capacity(&a.profile.profile()?, a.r, a.big_r)?));
        }
        RadialCommand::Green(a) => {
            let profile = a.profile.profile()?;
            let rho = if a.rho.is_empty() { geometric(a.r_min, a.big_r, a.samples)? } else { a.rho.clone() };
            let out = Output::new(&global.out_dir)?;
            let path = out.path(a.out.as_deref(), "radial_green.csv");
            out.write(&path, |w| Ok(write_profile_csv(&profile, a.big_r, &rho, w)?))?;
            let g = radial_green_profile(&profile, a.big_r, true, &rho)?;
            let svg = log_log(
                &format!("radial Green profile, n = {}, p = {}, weight {}", profile.n, profile.p, profile.weight),
                "rho",
                "g(rho)",
                &[Series::line("g", rho.iter().copied().zip(g).collect())],
            );
            out.write_str(&path.with_extension("svg"), &svg)?;
        }
        RadialCommand::Classify(a) => {
            let profile = a.profile.profile()?;
            let report = point_capacity_class(&profile, a.delta)?;
            println!("n,p,weight,delta,class,exponent");
            println!("{}", report.report_line(&profile));
        }
        RadialCommand::ToPath(a) => {
            let radial = radial_to_path(&a.profile.profile()?, a.r_min, a.big_r, a.shells)?;
            let out = Output::new(&global.out_dir)?;
            let path = out.path(a.out.as_deref(), "radial_path.json");
            radial.space.save(&path)?;
            out.write(&path.with_extension("radii.csv"), |w| {
                writeln!(w, "index,radius")?;
                for (k, r) in radial.radii.iter().enumerate() {
                    writeln!(w, "{k},{r:e}")?;
                }
                Ok(())
            })?;
            println!(
                "{} vertices, {} edges -> {}",
                radial.space.vertex_count(),
                radial.space.edge_count(),
                path.display()
            );
        }
    }
    Ok(Status::Pass)
}

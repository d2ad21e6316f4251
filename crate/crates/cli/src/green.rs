use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use pcap::green::{
    green_ball_limit, green_capacitary_with, green_delta_with, is_singular, normalization_constant,
    singularity_profile, GreenFunction, PoleCapacity, Route, SingularityProfile,
};
use pcap::penergy::{PotentialField, SolverSettings};
use pcap::space::{VertexSet, WeightedGraphSpace};

use crate::output::Output;
use crate::plot::{log_log, Series};
use crate::specs::{load_graph, parse_set, parse_vertex};
use crate::{Global, Status};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RouteArg {
    /// Scaled capacitary potential of the pole
    Capacitary,
    /// Unit point charge at the pole
    Delta,
    /// Shrinking-ball capacitary potentials
    BallLimit,
}

/// Domain, pole and route of a Green function.
#[derive(Args, Clone)]
pub struct DomainArgs {
    /// Domain set omega
    #[arg(long)]
    pub omega: Option<String>,
    /// Pole: index, `center` or `at:x,y,...`
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long, value_enum, default_value_t = RouteArg::Capacitary)]
    pub route: RouteArg,
    /// Ball radii for the ball-limit route, strictly decreasing
    #[arg(long, value_delimiter = ',')]
    pub ball_radii: Vec<f64>,
    /// Normalizing sphere radius for the ball-limit route (default: twice the largest ball radius)
    #[arg(long)]
    pub r0: Option<f64>,
}

#[derive(Args)]
pub struct GreenArgs {
    graph: PathBuf,
    #[command(flatten)]
    domain: DomainArgs,
    /// Override the graph's exponent
    #[arg(long)]
    p: Option<f64>,
    /// Profile radii (default: doubling from the shortest edge while the ball stays in omega)
    #[arg(long, value_delimiter = ',')]
    radii: Vec<f64>,
    /// Profile rows count as inside the domain when the ball of margin * r is
    #[arg(long, default_value_t = 2.0)]
    margin: f64,
    /// File name prefix inside the output directory
    #[arg(long, default_value = "green")]
    prefix: String,
}

pub struct Domain {
    pub omega: VertexSet,
    pub x0: usize,
}

impl DomainArgs {
    pub fn resolve(&self, space: &WeightedGraphSpace) -> Result<Domain> {
        let (Some(omega), Some(x0)) = (&self.omega, &self.x0) else {
            bail!("a Green function needs --omega and --x0");
        };
        Ok(Domain { omega: parse_set(space, omega)?, x0: parse_vertex(space, x0)? })
    }

    /// Computes the Green function by the chosen route. For the ball limit
    /// the smallest ball's field is normalized through the pole capacity.
    pub fn compute(&self, space: &WeightedGraphSpace, settings: SolverSettings) -> Result<GreenFunction> {
        let Domain { omega, x0 } = self.resolve(space)?;
        Ok(match self.route {
            RouteArg::Capacitary => green_capacitary_with(space, &omega, x0, settings)?,
            RouteArg::Delta => green_delta_with(space, &omega, x0, settings)?,
            RouteArg::BallLimit => {
                if self.ball_radii.is_empty() {
                    bail!("the ball-limit route needs --ball-radii");
                }
                let max_r = self.ball_radii.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let r0 = self.r0.unwrap_or(2.0 * max_r);
                let steps = green_ball_limit(space, &omega, x0, &self.ball_radii, r0, settings)?;
                let last = steps.last().expect("radii checked nonempty");
                let alpha = normalization_constant(space, &last.values, &omega, x0, PoleCapacity::Positive, settings)?;
                let values: Vec<f64> = last.values.iter().map(|v| alpha * v).collect();
                let pole_value = values[x0];
                GreenFunction {
                    field: PotentialField::from_values(space, values),
                    x0,
                    omega,
                    alpha,
                    pole_value,
                    route: Route::BallLimit,
                }
            }
        })
    }
}

/// Doubling radii from the shortest edge whose closed balls stay in omega.
pub fn default_radii(space: &WeightedGraphSpace, green: &GreenFunction) -> Result<Vec<f64>> {
    let dist = space.distances_from(green.x0);
    let reach = green.omega.iter().map(|v| dist[v]).fold(0.0, f64::max);
    let mut radii = Vec::new();
    let mut r = space.min_edge_length();
    while r <= reach {
        if space.metric_ball(green.x0, r, true)?.is_subset(&green.omega) {
            radii.push(r);
        }
        r *= 2.0;
    }
    Ok(radii)
}

pub fn profile_plot(profile: &SingularityProfile, p: f64) -> String {
    let lo: Vec<(f64, f64)> = profile.rows.iter().map(|r| (r.cap_inv, r.min_sphere)).collect();
    let hi: Vec<(f64, f64)> = profile.rows.iter().map(|r| (r.cap_inv, r.max_sphere)).collect();
    let diag: Vec<(f64, f64)> = profile.rows.iter().map(|r| (r.cap_inv, r.cap_inv)).collect();
    log_log(
        &format!("Green function on spheres, p = {p}"),
        "cap(B_r, omega)^(1/(1-p))",
        "G on the sphere of radius r",
        &[Series::markers("min over sphere", lo), Series::markers("max over sphere", hi), Series::line("identity", diag)],
    )
}

pub fn run(args: &GreenArgs, global: &Global) -> Result<Status> {
    let space = load_graph(&args.graph, args.p)?;
    let settings = global.settings();
    let green = args.domain.compute(&space, settings)?;
    let out = Output::new(&global.out_dir)?;
    let name = |suffix: &str| out.path(None, &format!("{}_{suffix}", args.prefix));

    let singular = is_singular(&space, green.values(), &green.omega, green.x0, 1e-6 * green.pole_value.max(1.0));
    out.write(&name("field.csv"), |w| Ok(green.field.write_csv(w)?))?;
    out.write(&name("summary.csv"), |w| {
        writeln!(w, "x0,alpha,pole,route,energy,singular,max_harmonic_residual")?;
        writeln!(
            w,
            "{},{:e},{:e},{},{:e},{},{:e}",
            green.x0,
            green.alpha,
            green.pole_value,
            green.route,
            green.field.energy,
            singular.all_pass(),
            singular.max_harmonic_residual
        )?;
        Ok(())
    })?;

    let radii = if args.radii.is_empty() { default_radii(&space, &green)? } else { args.radii.clone() };
    if radii.is_empty() {
        eprintln!("note: no ball around the pole fits in omega; profile skipped");
    } else {
        let profile = singularity_profile(&space, &green, &radii, None, args.margin, settings)?;
        out.write(&name("profile.csv"), |w| Ok(profile.write_csv(w)?))?;
        out.write_str(&name("profile.svg"), &profile_plot(&profile, space.p()))?;
        if profile.rows.iter().any(|r| !r.within_margin) {
            eprintln!("note: some profile radii violate the margin {}", args.margin);
        }
    }
    println!(
        "route {} pole {} value {} alpha {} singular {}",
        green.route,
        green.x0,
        green.pole_value,
        green.alpha,
        if singular.all_pass() { "yes" } else { "no" }
    );
    Ok(Status::Pass)
}

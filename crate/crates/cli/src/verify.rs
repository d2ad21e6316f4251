use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use pcap::capacity::{capacity_with, CapacityResult, Condenser};
use pcap::green::{singularity_profile, sphere_harnack, GreenFunction, Route};
use pcap::penergy::{weak_form, PotentialField, SolverSettings};
use pcap::space::WeightedGraphSpace;
use pcap::superlevel::{achieved_levels, default_levels, hs_window_check, identity_sweep, lambda_estimate_at};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::green::{default_radii, profile_plot, DomainArgs};
use crate::output::Output;
use crate::plot::{log_log, Series};
use crate::specs::{load_graph, parse_set, read_field};
use crate::{Global, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Band identity cap({u >= b}, {u > a}) = (b - a)^(1-p) cap(E, A)
    Superlevel,
    /// Level normalization b^(p-1) cap({G >= b}, omega) = 1 and the weak identity
    GreenNorm,
    /// Capacities of level bands against the two-sided window
    HsWindow,
    /// Annulus Harnack constants across radii
    Harnack,
    /// Green function on spheres against cap(B_r)^(1/(1-p))
    Profile,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Superlevel => "superlevel",
            Suite::GreenNorm => "green-norm",
            Suite::HsWindow => "hs-window",
            Suite::Harnack => "harnack",
            Suite::Profile => "profile",
        }
    }

    fn default_tol(self) -> f64 {
        match self {
            Suite::Superlevel => 1e-8,
            Suite::GreenNorm => 1e-6,
            Suite::HsWindow => 0.0,
            Suite::Harnack => 0.2,
            Suite::Profile => 4.0,
        }
    }

    fn header(self) -> &'static str {
        match self {
            Suite::Superlevel => "a,b,set_b_size,set_a_size,measured,predicted,rel_error,status",
            Suite::GreenNorm => "check,param,measured,expected,error,status",
            Suite::HsWindow => "a,b,lower,upper,measured,status",
            Suite::Harnack => "r,tau,constant,min_annulus,max_annulus,min_on_sphere",
            Suite::Profile => "r,sphere_size,min_sphere,max_sphere,cap_inv,ratio_min,ratio_max,within_margin",
        }
    }

    /// Suites whose worst value is an error expected to shrink under refinement.
    fn refines(self) -> bool {
        matches!(self, Suite::Superlevel | Suite::GreenNorm)
    }
}

#[derive(Args)]
pub struct VerifyArgs {
    /// One graph, or several (e.g. an h-sweep of grids) to compare
    #[arg(required = true)]
    graphs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    suite: Suite,
    /// Override the graphs' exponent
    #[arg(long)]
    p: Option<f64>,
    /// Inner set E (superlevel suite)
    #[arg(long)]
    e: Option<String>,
    /// Outer set A (superlevel suite)
    #[arg(long)]
    a: Option<String>,
    #[command(flatten)]
    domain: DomainArgs,
    /// Use this field instead of solving: the potential of (E, A) or the Green function
    #[arg(long)]
    field: Option<PathBuf>,
    /// Levels to test (default: values the field attains)
    #[arg(long, value_delimiter = ',')]
    levels: Vec<f64>,
    /// Evenly subsample attained levels down to this many
    #[arg(long, default_value_t = 12)]
    max_levels: usize,
    /// Superlevel suite: every pair a < b instead of (0, b) and neighbours
    #[arg(long)]
    all_pairs: bool,
    /// Radii for the harnack and profile suites
    #[arg(long, value_delimiter = ',')]
    radii: Vec<f64>,
    /// Inner radius fraction of the Harnack annulus
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    #[arg(long, default_value_t = 2.0)]
    margin: f64,
    /// Tolerance: relative error (superlevel 1e-8, green-norm 1e-6), relative
    /// variation (harnack 0.2) or bracket width (profile 4)
    #[arg(long)]
    tol: Option<f64>,
    /// Random test fields for the weak identity
    #[arg(long, default_value_t = 20)]
    test_fields: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report table (default: verify_<suite>.csv in the output directory)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

struct SuiteRun {
    rows: Vec<String>,
    checks: Vec<Check>,
    worst: f64,
}

fn status(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

fn subsample(levels: Vec<f64>, m: usize) -> Vec<f64> {
    if levels.len() <= m || m == 0 {
        return levels;
    }
    if m == 1 {
        return vec![levels[levels.len() - 1]];
    }
    let last = levels.len() - 1;
    let mut picked: Vec<f64> = (0..m).map(|k| levels[(k * last + (m - 1) / 2) / (m - 1)]).collect();
    picked.dedup();
    picked
}

struct Context<'a> {
    args: &'a VerifyArgs,
    space: &'a WeightedGraphSpace,
    settings: SolverSettings,
    tol: f64,
}

impl Context<'_> {
    fn field(&self) -> Result<Option<Vec<f64>>> {
        self.args.field.as_deref().map(|f| read_field(f, self.space.vertex_count())).transpose()
    }

    fn green(&self) -> Result<GreenFunction> {
        match self.field()? {
            Some(values) => {
                let d = self.args.domain.resolve(self.space)?;
                let pole_value = values[d.x0];
                Ok(GreenFunction {
                    field: PotentialField::from_values(self.space, values),
                    x0: d.x0,
                    omega: d.omega,
                    alpha: 1.0,
                    pole_value,
                    route: Route::Capacitary,
                })
            }
            None => self.args.domain.compute(self.space, self.settings),
        }
    }

    /// Requested levels, or the positive values `u` attains on omega.
    fn green_levels(&self, green: &GreenFunction) -> Vec<f64> {
        if !self.args.levels.is_empty() {
            return self.args.levels.clone();
        }
        let levels = achieved_levels(green.values(), &green.omega).into_iter().filter(|&b| b > 0.0).collect();
        subsample(levels, self.args.max_levels)
    }

    fn superlevel(&self) -> Result<SuiteRun> {
        let (Some(e), Some(a)) = (&self.args.e, &self.args.a) else {
            bail!("the superlevel suite needs --e and --a");
        };
        let space = self.space;
        let condenser = Condenser::new(space, parse_set(space, e)?, parse_set(space, a)?)?;
        let base = match self.field()? {
            Some(values) => {
                let potential = PotentialField::from_values(space, values);
                CapacityResult { value: potential.energy, potential, empty_inner: false, whole_outer: false }
            }
            None => capacity_with(space, &condenser, self.settings)?,
        };
        let levels = if self.args.levels.is_empty() {
            subsample(default_levels(&base, &condenser), self.args.max_levels)
        } else {
            self.args.levels.clone()
        };
        if levels.is_empty() {
            bail!("no levels to test");
        }
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        if self.args.all_pairs {
            let with_zero: Vec<f64> = std::iter::once(0.0).chain(levels.iter().copied()).collect();
            for (i, &a) in with_zero.iter().enumerate() {
                pairs.extend(with_zero[i + 1..].iter().map(|&b| (a, b)));
            }
        } else {
            pairs.extend(levels.iter().map(|&b| (0.0, b)));
            pairs.extend(levels.windows(2).map(|w| (w[0], w[1])));
        }
        let reports = identity_sweep(space, &condenser, &base, &pairs, false, true, self.settings)?;
        let mut worst = 0.0f64;
        let (mut failed, mut counted) = (0, 0);
        let rows = reports
            .iter()
            .map(|r| {
                let state = if r.degenerate {
                    "degenerate"
                } else {
                    counted += 1;
                    worst = worst.max(r.relative_error);
                    let pass = r.relative_error <= self.tol;
                    failed += usize::from(!pass);
                    status(pass)
                };
                format!(
                    "{:e},{:e},{},{},{:e},{:e},{:e},{state}",
                    r.a, r.b, r.set_b_size, r.set_a_size, r.measured, r.predicted, r.relative_error
                )
            })
            .collect();
        let check = Check {
            name: "identity",
            pass: failed == 0 && counted > 0,
            detail: format!("{}/{counted} pairs within {:e}, max rel_error {worst:.3e}", counted - failed, self.tol),
        };
        Ok(SuiteRun { rows, checks: vec![check], worst })
    }

    fn green_norm(&self) -> Result<SuiteRun> {
        let green = self.green()?;
        let u = green.values();
        let levels = self.green_levels(&green);
        let estimate = lambda_estimate_at(self.space, u, &green.omega, &levels, self.settings)?;
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        let mut lambda_failed = 0;
        for r in &estimate.rows {
            let error = (r.lambda - 1.0).abs();
            worst = worst.max(error);
            lambda_failed += usize::from(error > self.tol);
            rows.push(format!("lambda,{:e},{:e},1,{error:e},{}", r.level, r.lambda, status(error <= self.tol)));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.args.seed);
        let n = self.space.vertex_count();
        let mut weak_failed = 0;
        let mut weak_worst = 0.0f64;
        for k in 0..self.args.test_fields {
            let test: Vec<f64> =
                (0..n).map(|v| if green.omega.contains(v) { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect();
            let lhs = weak_form(self.space, u, &test);
            let rhs = test[green.x0];
            let error = (lhs - rhs).abs() / (1.0 + rhs.abs());
            weak_worst = weak_worst.max(error);
            weak_failed += usize::from(error > self.tol);
            rows.push(format!("weak,{k},{lhs:e},{rhs:e},{error:e},{}", status(error <= self.tol)));
        }
        let checks = vec![
            Check {
                name: "lambda",
                pass: lambda_failed == 0,
                detail: format!(
                    "{}/{} levels within {:e}, max |lambda - 1| {worst:.3e}",
                    estimate.rows.len() - lambda_failed,
                    estimate.rows.len(),
                    self.tol
                ),
            },
            Check {
                name: "weak",
                pass: weak_failed == 0,
                detail: format!(
                    "{}/{} test fields within {:e} (seed {}), max error {weak_worst:.3e}",
                    self.args.test_fields - weak_failed,
                    self.args.test_fields,
                    self.tol,
                    self.args.seed
                ),
            },
        ];
        Ok(SuiteRun { rows, checks, worst })
    }

    fn hs_window(&self) -> Result<SuiteRun> {
        let green = self.green()?;
        let levels: Vec<f64> = std::iter::once(0.0).chain(self.green_levels(&green)).collect();
        let mut rows = Vec::new();
        let (mut failed, mut total) = (0, 0);
        let mut worst = 0.0f64;
        for (i, &a) in levels.iter().enumerate() {
            for &b in &levels[i + 1..] {
                let w = hs_window_check(self.space, green.values(), &green.omega, a, b, self.settings)?;
                let excess = (w.lower / w.measured).max(w.measured / w.upper);
                worst = worst.max(excess);
                total += 1;
                failed += usize::from(!w.pass);
                rows.push(format!("{:e},{:e},{:e},{:e},{:e},{}", a, b, w.lower, w.upper, w.measured, status(w.pass)));
            }
        }
        let check = Check {
            name: "window",
            pass: failed == 0 && total > 0,
            detail: format!("{}/{total} level pairs inside the window, worst bound ratio {worst:.3e}", total - failed),
        };
        Ok(SuiteRun { rows, checks: vec![check], worst })
    }

    fn harnack(&self) -> Result<SuiteRun> {
        if self.args.radii.is_empty() {
            bail!("the harnack suite needs --radii");
        }
        let green = self.green()?;
        let mut rows = Vec::new();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &r in &self.args.radii {
            let h = sphere_harnack(self.space, green.values(), green.x0, r, self.args.tau)?;
            lo = lo.min(h.constant);
            hi = hi.max(h.constant);
            rows.push(format!(
                "{r:e},{},{:e},{:e},{:e},{}",
                self.args.tau, h.constant, h.min_annulus, h.max_annulus, h.min_on_sphere
            ));
        }
        let variation = hi / lo - 1.0;
        let check = Check {
            name: "variation",
            pass: variation <= self.tol,
            detail: format!("constants in [{lo:.4}, {hi:.4}], variation {variation:.3e} (bound {:e})", self.tol),
        };
        Ok(SuiteRun { rows, checks: vec![check], worst: variation })
    }

    fn profile(&self, out: &Output, tag: &str) -> Result<SuiteRun> {
        let green = self.green()?;
        let radii = if self.args.radii.is_empty() { default_radii(self.space, &green)? } else { self.args.radii.clone() };
        if radii.is_empty() {
            bail!("no radii: pass --radii");
        }
        let profile = singularity_profile(self.space, &green, &radii, None, self.args.margin, self.settings)?;
        out.write_str(&out.path(None, &format!("verify_profile{tag}.svg")), &profile_plot(&profile, self.space.p()))?;
        let rows = profile
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{:e},{},{:e},{:e},{:e},{:e},{:e},{}",
                    r.r, r.sphere_size, r.min_sphere, r.max_sphere, r.cap_inv, r.ratio_min, r.ratio_max, r.within_margin
                )
            })
            .collect();
        let inside = profile.rows.iter().filter(|r| r.within_margin).count();
        let width = profile.bracket_width();
        let check = Check {
            name: "bracket",
            pass: inside > 0 && width <= self.tol,
            detail: format!("{inside} radii inside the margin, bracket width {width:.4} (bound {})", self.tol),
        };
        Ok(SuiteRun { rows, checks: vec![check], worst: width })
    }
}

fn sweep_plot(suite: Suite, points: Vec<(f64, f64)>) -> String {
    log_log(
        &format!("{} sweep", suite.name()),
        "lattice spacing h",
        "worst error",
        &[Series::line("worst", points.clone()), Series::markers("", points)],
    )
}

pub fn run(args: &VerifyArgs, global: &Global) -> Result<Status> {
    if args.field.is_some() && args.graphs.len() > 1 {
        bail!("--field applies to a single graph");
    }
    let suite = args.suite;
    let tol = args.tol.unwrap_or(suite.default_tol());
    let out = Output::new(&global.out_dir)?;
    let mut report = vec![format!("graph,{}", suite.header())];
    let mut sweep: Vec<(usize, &Path, Option<f64>, f64)> = Vec::new();
    let mut all_pass = true;
    let (mut passed, mut total) = (0, 0);

    for (g, path) in args.graphs.iter().enumerate() {
        let space = load_graph(path, args.p)?;
        let ctx = Context { args, space: &space, settings: global.settings(), tol };
        let tag = if args.graphs.len() > 1 { format!("_{g}") } else { String::new() };
        let run = match suite {
            Suite::Superlevel => ctx.superlevel()?,
            Suite::GreenNorm => ctx.green_norm()?,
            Suite::HsWindow => ctx.hs_window()?,
            Suite::Harnack => ctx.harnack()?,
            Suite::Profile => ctx.profile(&out, &tag)?,
        };
        report.extend(run.rows.iter().map(|r| format!("{g},{r}")));
        for c in &run.checks {
            println!("{}[{g}] {}: {} ({})", suite.name(), c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail);
            all_pass &= c.pass;
            passed += usize::from(c.pass);
            total += 1;
        }
        sweep.push((g, path, space.spacing(), run.worst));
    }

    let report_path = out.path(args.out.as_deref(), &format!("verify_{}.csv", suite.name()));
    out.write(&report_path, |w| {
        for line in &report {
            writeln!(w, "{line}")?;
        }
        Ok(())
    })?;

    if sweep.len() > 1 {
        out.write(&out.path(None, &format!("verify_{}_sweep.csv", suite.name())), |w| {
            writeln!(w, "graph,file,h,worst")?;
            for (g, path, h, worst) in &sweep {
                let h = h.map_or(String::new(), |h| h.to_string());
                writeln!(w, "{g},{},{h},{worst:e}", path.display())?;
            }
            Ok(())
        })?;
        let mut by_h: Vec<(f64, f64)> = sweep.iter().filter_map(|s| s.2.map(|h| (h, s.3))).collect();
        if by_h.len() == sweep.len() {
            by_h.sort_by(|x, y| y.0.total_cmp(&x.0));
            out.write_str(&out.path(None, &format!("verify_{}_sweep.svg", suite.name())), &sweep_plot(suite, by_h.clone()))?;
            if suite.refines() {
                let monotone = by_h.windows(2).all(|w| w[1].1 <= w[0].1);
                let column: Vec<String> = by_h.iter().map(|(h, e)| format!("h={h}: {e:.3e}")).collect();
                println!(
                    "{} sweep monotone: {} ({})",
                    suite.name(),
                    if monotone { "PASS" } else { "FAIL" },
                    column.join(", ")
                );
                all_pass &= monotone;
                passed += usize::from(monotone);
                total += 1;
            }
        } else {
            eprintln!("note: some graphs have no lattice spacing; sweep plot skipped");
        }
    }
    println!("{}: {passed}/{total} checks passed", suite.name());
    Ok(if all_pass { Status::Pass } else { Status::Fail })
}

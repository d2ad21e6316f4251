use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use pcap::capacity::{capacity_with, CapacityResult, Condenser};

use crate::output::{display, Output};
use crate::specs::{load_graph, parse_set};
use crate::{Global, Status};

#[derive(Args)]
pub struct CapArgs {
    graph: PathBuf,
    /// Inner set E
    #[arg(long)]
    e: String,
    /// Outer set A, containing E
    #[arg(long)]
    a: String,
    /// Override the graph's exponent
    #[arg(long)]
    p: Option<f64>,
    /// Result table (default: cap.csv in the output directory)
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Capacitary potential (default: cap_field.csv in the output directory)
    #[arg(long)]
    field_out: Option<PathBuf>,
}

fn warning(result: &CapacityResult) -> &'static str {
    if result.empty_inner {
        "empty_E"
    } else if result.whole_outer {
        "whole_A"
    } else {
        ""
    }
}

pub fn run(args: &CapArgs, global: &Global) -> Result<Status> {
    let space = load_graph(&args.graph, args.p)?;
    let condenser = Condenser::new(&space, parse_set(&space, &args.e)?, parse_set(&space, &args.a)?)?;
    let result = capacity_with(&space, &condenser, global.settings())?;

    let out = Output::new(&global.out_dir)?;
    out.write(&out.path(args.out.as_deref(), "cap.csv"), |w| {
        let mut row = Vec::new();
        result.write_csv_row(&mut row, &condenser, space.p())?;
        writeln!(w, "{},warning", CapacityResult::csv_header())?;
        writeln!(w, "{},{}", String::from_utf8_lossy(&row).trim_end(), warning(&result))?;
        Ok(())
    })?;
    out.write(&out.path(args.field_out.as_deref(), "cap_field.csv"), |w| Ok(result.potential.write_csv(w)?))?;

    println!("{}", display(result.value));
    match warning(&result) {
        "empty_E" => eprintln!("warning: E is empty; capacity 0 by convention"),
        "whole_A" => eprintln!("warning: A is the whole graph; u = 1 is admissible and the capacity is 0"),
        _ => {}
    }
    Ok(Status::Pass)
}

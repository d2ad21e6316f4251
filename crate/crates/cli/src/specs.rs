//! Command-line syntax for vertices, vertex sets, weights and field files.
//!
//! Sets:
//! `all`, `empty`, `interior` (grid vertices off the box faces),
//! `list:0,1,5`, `ball:X0:R` (closed metric ball), `level:FILE:OP:VALUE`
//! with `OP` one of `>=`, `>`, `<=`, `<`, and `not:SET`.
//!
//! Vertices: an index, `center` (grid vertex nearest the box center) or
//! `at:x,y,...` (nearest grid vertex).

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pcap::green::{lattice_interior, nearest_vertex};
use pcap::radial::RadialWeight;
use pcap::space::{VertexSet, WeightedGraphSpace};

pub fn load_graph(path: &Path, p: Option<f64>) -> Result<WeightedGraphSpace> {
    let space = WeightedGraphSpace::load(path).with_context(|| format!("cannot read graph {}", path.display()))?;
    Ok(match p {
        Some(p) => space.with_exponent(p)?,
        None => space,
    })
}

fn numbers(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow!("not a number: {s:?}")))
        .collect()
}

pub fn parse_vertex(space: &WeightedGraphSpace, spec: &str) -> Result<usize> {
    let spec = spec.trim();
    if spec == "center" {
        let coords = space.coordinates().ok_or_else(|| anyhow!("`center` needs a graph with coordinates"))?;
        let dim = coords[0].len();
        let mid: Vec<f64> = (0..dim)
            .map(|d| {
                let (lo, hi) = coords
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x[d]), hi.max(x[d])));
                0.5 * (lo + hi)
            })
            .collect();
        return Ok(nearest_vertex(space, &mid)?);
    }
    if let Some(point) = spec.strip_prefix("at:") {
        let point = numbers(point)?;
        let dim = space.coordinates().map(|c| c[0].len());
        if dim != Some(point.len()) {
            bail!("point {point:?} does not match the graph's coordinates");
        }
        return Ok(nearest_vertex(space, &point)?);
    }
    let v: usize = spec.parse().map_err(|_| anyhow!("bad vertex {spec:?}: expected an index, `center` or `at:x,y,...`"))?;
    space.check_vertex(v)?;
    Ok(v)
}

pub fn parse_set(space: &WeightedGraphSpace, spec: &str) -> Result<VertexSet> {
    let n = space.vertex_count();
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let set = match kind {
        "all" => space.all_vertices(),
        "empty" => VertexSet::new(),
        "interior" => lattice_interior(space)?,
        "not" => parse_set(space, rest)?.complement(n),
        "list" => {
            let indices = rest
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<usize>().map_err(|_| anyhow!("bad vertex index {s:?}")))
                .collect::<Result<Vec<_>>>()?;
            VertexSet::checked(indices, n)?
        }
        "ball" => {
            let (center, r) = rest.rsplit_once(':').ok_or_else(|| anyhow!("ball spec is `ball:X0:R`"))?;
            let r: f64 = r.parse().map_err(|_| anyhow!("bad ball radius {r:?}"))?;
            space.metric_ball(parse_vertex(space, center)?, r, true)?
        }
        "level" => {
            let mut parts = rest.rsplitn(3, ':');
            let (value, op, file) = match (parts.next(), parts.next(), parts.next()) {
                (Some(v), Some(o), Some(f)) => (v, o, f),
                _ => bail!("level spec is `level:FILE:OP:VALUE`"),
            };
            let t: f64 = value.parse().map_err(|_| anyhow!("bad level {value:?}"))?;
            let test: fn(f64, f64) -> bool = match op {
                ">=" => |x, t| x >= t,
                ">" => |x, t| x > t,
                "<=" => |x, t| x <= t,
                "<" => |x, t| x < t,
                _ => bail!("unknown comparison {op:?}"),
            };
            let u = read_field(Path::new(file), n)?;
            u.iter().enumerate().filter(|(_, &x)| test(x, t)).map(|(k, _)| k).collect()
        }
        _ => bail!("unknown set spec {spec:?}"),
    };
    Ok(set)
}

/// Reads the `index,value` table of a field file, skipping any header
/// block before it. Indices must run through `0..n` in order.
pub fn read_field(path: &Path, n: usize) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read field {}", path.display()))?;
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let start = lines.iter().position(|l| *l == "index,value").map_or(0, |k| k + 1);
    let mut values = Vec::with_capacity(n);
    for (row, line) in lines[start..].iter().enumerate() {
        let parsed = line
            .split_once(',')
            .and_then(|(k, v)| Some((k.trim().parse::<usize>().ok()?, v.trim().parse::<f64>().ok()?)));
        match parsed {
            Some((k, v)) if k == row && v.is_finite() => values.push(v),
            _ => bail!("{}: malformed field row {line:?}", path.display()),
        }
    }
    if values.len() != n {
        bail!("{}: field has {} values, graph has {n} vertices", path.display(), values.len());
    }
    Ok(values)
}

/// `const:C`, `power:SCALE:EXPONENT` or `powlog:BETA:GAMMA` for
/// `rho^beta (1 + |ln rho|)^gamma`.
pub fn parse_weight(spec: &str) -> Result<RadialWeight> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| anyhow!("bad number {s:?} in weight {spec:?}"));
    Ok(match parts.as_slice() {
        ["const", c] => RadialWeight::Constant(num(c)?),
        ["power", scale, exponent] => RadialWeight::Power { scale: num(scale)?, exponent: num(exponent)? },
        ["powlog", beta, gamma] => {
            let (beta, gamma) = (num(beta)?, num(gamma)?);
            RadialWeight::custom(format!("powlog:{beta}:{gamma}"), move |rho: f64| {
                rho.powf(beta) * (1.0 + rho.ln().abs()).powf(gamma)
            })
        }
        _ => bail!("unknown weight {spec:?}: expected const:C, power:S:E or powlog:B:G"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use pcap::space::unit_path;

    #[test]
    fn list_and_complement() {
        let g = unit_path(&[1.0, 1.0, 1.0], 2.0).unwrap();
        assert_eq!(parse_set(&g, "list:3,1").unwrap().as_slice(), &[1, 3]);
        assert_eq!(parse_set(&g, "not:list:0").unwrap().as_slice(), &[1, 2, 3]);
        assert!(parse_set(&g, "list:").unwrap().is_empty());
        assert!(parse_set(&g, "list:9").is_err());
        assert!(parse_set(&g, "disc:0").is_err());
    }

    #[test]
    fn balls_use_the_path_metric() {
        let g = unit_path(&[1.0, 1.0, 1.0], 2.0).unwrap();
        assert_eq!(parse_set(&g, "ball:1:1").unwrap().as_slice(), &[0, 1, 2]);
        assert!(parse_set(&g, "ball:center:1").is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(parse_weight("power:2:-0.5").unwrap().power_law(), Some((2.0, -0.5)));
        let w = parse_weight("powlog:1:2").unwrap();
        assert!((w.eval(std::f64::consts::E.recip()) - 4.0 / std::f64::consts::E).abs() < 1e-14);
        assert!(parse_weight("power:1").is_err());
    }
}

//! Text format for grid functions.
//!
//! First line: `# n=<n> h=<h> origin=<a,b> dims=<p,q>`. Then one line per
//! node, `x1,...,xn,value`, in row-major node order (last axis fastest).
//! Numbers are written with [`crate::numfmt::format_sig10`], so writing,
//! reading, and writing again is byte-identical.

use crate::error::{Error, Result};
use crate::geometry::UniformGrid;
use crate::numfmt::format_sig10;
use crate::operator::GridFunction;
use std::io::{BufRead, Write};
use std::path::Path;

pub fn write_grid_function(u: &GridFunction, mut out: impl Write) -> Result<()> {
    let g = u.grid();
    let origin = g
        .origin()
        .iter()
        .map(|&v| format_sig10(v))
        .collect::<Vec<_>>()
        .join(",");
    let dims = g
        .dims()
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(",");
    writeln!(
        out,
        "# n={} h={} origin={} dims={}",
        g.n(),
        format_sig10(g.h()),
        origin,
        dims
    )?;
    for i in 0..g.len() {
        let mut line = String::new();
        for c in g.coord(i) {
            line.push_str(&format_sig10(c));
            line.push(',');
        }
        line.push_str(&format_sig10(u.value(i)));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_grid_function(input: impl BufRead) -> Result<GridFunction> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty grid-function file".into()))??;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Format("header must start with '#'".into()))?
        .trim();
    let mut n = None;
    let mut h = None;
    let mut origin = None;
    let mut dims = None;
    for field in header.split_whitespace() {
        let (key, val) = field
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header field `{field}`")))?;
        match key {
            "n" => n = Some(parse::<usize>(val, "n")?),
            "h" => h = Some(parse::<f64>(val, "h")?),
            "origin" => {
                origin = Some(
                    val.split(',')
                        .map(|s| parse::<f64>(s, "origin"))
                        .collect::<Result<Vec<f64>>>()?,
                )
            }
            "dims" => {
                dims = Some(
                    val.split(',')
                        .map(|s| parse::<usize>(s, "dims"))
                        .collect::<Result<Vec<usize>>>()?,
                )
            }
            other => return Err(Error::Format(format!("unknown header key `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| Error::Format("header missing n".into()))?;
    let h = h.ok_or_else(|| Error::Format("header missing h".into()))?;
    let origin = origin.ok_or_else(|| Error::Format("header missing origin".into()))?;
    let dims = dims.ok_or_else(|| Error::Format("header missing dims".into()))?;
    if origin.len() != n || dims.len() != n {
        return Err(Error::Format(format!(
            "header inconsistent: n={n} but origin has {} and dims {} entries",
            origin.len(),
            dims.len()
        )));
    }
    let grid = UniformGrid::new(origin, h, dims)?;
    let mut values = Vec::with_capacity(grid.len());
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != n + 1 {
            return Err(Error::Format(format!(
                "node line {} has {} fields, expected {}",
                k + 2,
                parts.len(),
                n + 1
            )));
        }
        let i = values.len();
        if i >= grid.len() {
            return Err(Error::Format("more node lines than grid nodes".into()));
        }
        let expect = grid.coord(i);
        for (d, want) in expect.iter().enumerate() {
            let got = parse::<f64>(parts[d], "coordinate")?;
            if (got - want).abs() > 1e-9 * (1.0 + want.abs()) {
                return Err(Error::Format(format!(
                    "node line {}: coordinate {d} is {got}, expected {want} (row-major order)",
                    k + 2
                )));
            }
        }
        values.push(parse::<f64>(parts[n], "value")?);
    }
    if values.len() != grid.len() {
        return Err(Error::Format(format!(
            "file has {} node lines, grid needs {}",
            values.len(),
            grid.len()
        )));
    }
    GridFunction::new(grid, values)
}

pub fn save_grid_function(u: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_grid_function(u, std::io::BufWriter::new(file))
}

pub fn load_grid_function(path: impl AsRef<Path>) -> Result<GridFunction> {
    let file = std::fs::File::open(path)?;
    read_grid_function(std::io::BufReader::new(file))
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("cannot parse {what} from `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GridFunction {
        let g = UniformGrid::new(vec![-0.2, 0.0], 0.1, vec![3, 4]).unwrap();
        GridFunction::from_fn(g, |x| x[0] + 10.0 * x[1]).unwrap()
    }

    #[test]
    fn roundtrip_is_idempotent() {
        // the format carries 10 significant digits; after one write-read
        // normalization everything is stable byte for byte
        let u = sample();
        let mut buf = Vec::new();
        write_grid_function(&u, &mut buf).unwrap();
        let v = read_grid_function(buf.as_slice()).unwrap();
        assert_eq!(u.grid(), v.grid());
        for (a, b) in u.values().iter().zip(v.values()) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
        let mut buf2 = Vec::new();
        write_grid_function(&v, &mut buf2).unwrap();
        assert_eq!(buf, buf2, "write-read-write must be byte identical");
        let w = read_grid_function(buf2.as_slice()).unwrap();
        assert_eq!(v.values(), w.values(), "normalized values are exact");
    }

    #[test]
    fn header_and_shape_errors() {
        assert!(read_grid_function("".as_bytes()).is_err());
        assert!(read_grid_function("n=2\n".as_bytes()).is_err());
        assert!(read_grid_function("# n=2 h=0.1 origin=0,0 dims=2\n".as_bytes()).is_err());
        let ok_header = "# n=1 h=0.5 origin=0 dims=2\n";
        // wrong field count
        let bad = format!("{ok_header}0,0,7\n");
        assert!(read_grid_function(bad.as_bytes()).is_err());
        // missing lines
        let short = format!("{ok_header}0,1.5\n");
        assert!(read_grid_function(short.as_bytes()).is_err());
        // out-of-order coordinates rejected
        let misordered = format!("{ok_header}0.5,1.0\n0,2.0\n");
        assert!(read_grid_function(misordered.as_bytes()).is_err());
    }
}

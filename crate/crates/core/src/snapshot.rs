//! Plain-text snapshots of sampled fields.
//!
//! Star-graph fields:
//! ```text
//! # graphfield N=<n> M=<m> h=<h>
//! x re(u_1) im(u_1) ... re(u_N) im(u_N)
//! ```
//! Line fields (δ′ problems) store the right half `u(s)` and the mirrored left
//! half `u(−s)`:
//! ```text
//! # linefield M=<m> h=<h>
//! s re(u(s)) im(u(s)) re(u(-s)) im(u(-s))
//! ```
//! Numbers are written with 17 significant digits so that a round trip is exact.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{EdgeSamples, GraphField, LineField, StarGraphGrid};

fn write_rows(out: &mut String, samples: &EdgeSamples) {
    let grid = samples.grid();
    for i in 0..grid.n_points() {
        let _ = write!(out, "{:.16e}", grid.x(i));
        for j in 0..grid.n_edges() {
            let v = samples.edge(j)[i];
            let _ = write!(out, " {:.16e} {:.16e}", v.re, v.im);
        }
        out.push('\n');
    }
}

pub fn graph_field_to_string(field: &GraphField) -> String {
    let g = field.grid();
    let mut s = format!("# graphfield N={} M={} h={:.16e}\n", g.n_edges(), g.n_points(), g.h());
    write_rows(&mut s, field.samples());
    s
}

pub fn line_field_to_string(field: &LineField) -> String {
    let g = field.grid();
    let mut s = format!("# linefield M={} h={:.16e}\n", g.n_points(), g.h());
    write_rows(&mut s, field.samples());
    s
}

struct Header {
    kind: String,
    n_edges: usize,
    n_points: usize,
    h: f64,
}

fn parse_header(line: &str) -> Result<Header> {
    let rest = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Format(format!("missing header line, got '{line}'")))?;
    let mut words = rest.split_whitespace();
    let kind = words.next().unwrap_or_default().to_string();
    let mut n_edges = None;
    let mut n_points = None;
    let mut h = None;
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header token '{w}'")))?;
        let bad = |_| Error::Format(format!("bad value in header token '{w}'"));
        match k {
            "N" => n_edges = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "M" => n_points = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "h" => h = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            _ => return Err(Error::Format(format!("unknown header key '{k}'"))),
        }
    }
    let n_edges = match kind.as_str() {
        "graphfield" => n_edges.ok_or_else(|| Error::Format("header lacks N".into()))?,
        "linefield" => 2,
        other => return Err(Error::Format(format!("unknown snapshot kind '{other}'"))),
    };
    Ok(Header {
        kind,
        n_edges,
        n_points: n_points.ok_or_else(|| Error::Format("header lacks M".into()))?,
        h: h.ok_or_else(|| Error::Format("header lacks h".into()))?,
    })
}

fn parse_samples<R: BufRead>(reader: R, expect: &str) -> Result<EdgeSamples> {
    let mut lines = reader.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty snapshot".into()))??;
    let header = parse_header(first.trim())?;
    if header.kind != expect {
        return Err(Error::Format(format!("expected a {expect} snapshot, found {}", header.kind)));
    }
    let grid = StarGraphGrid::uniform(header.n_edges, header.n_points, header.h)?;
    let mut samples = EdgeSamples::zeros(grid);
    let mut row = 0;
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if row >= header.n_points {
            return Err(Error::Format(format!("more than M = {} data rows", header.n_points)));
        }
        let nums = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::Format(format!("row {row}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if nums.len() != 1 + 2 * header.n_edges {
            return Err(Error::Format(format!(
                "row {row}: expected {} columns, found {}",
                1 + 2 * header.n_edges,
                nums.len()
            )));
        }
        for j in 0..header.n_edges {
            samples.edge_mut(j)[row] = Complex64::new(nums[1 + 2 * j], nums[2 + 2 * j]);
        }
        row += 1;
    }
    if row != header.n_points {
        return Err(Error::Format(format!("expected {} data rows, found {row}", header.n_points)));
    }
    Ok(samples)
}

pub fn graph_field_from_reader<R: BufRead>(reader: R) -> Result<GraphField> {
    GraphField::from_samples(parse_samples(reader, "graphfield")?)
}

pub fn line_field_from_reader<R: BufRead>(reader: R) -> Result<LineField> {
    LineField::from_samples(parse_samples(reader, "linefield")?)
}

pub fn write_graph_field(path: &Path, field: &GraphField) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(graph_field_to_string(field).as_bytes())?;
    Ok(())
}

pub fn write_line_field(path: &Path, field: &LineField) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(line_field_to_string(field).as_bytes())?;
    Ok(())
}

pub fn read_graph_field(path: &Path) -> Result<GraphField> {
    graph_field_from_reader(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn read_line_field(path: &Path) -> Result<LineField> {
    line_field_from_reader(std::io::BufReader::new(std::fs::File::open(path)?))
}

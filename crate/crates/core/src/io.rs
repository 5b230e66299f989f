//! CSV import and export for curves, measures and per-probe results.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::checkers::Probe;
use crate::domain::BoundaryCurve;
use crate::embedding::TestFunction;
use crate::error::{Error, Result};
use crate::measure::{Atom, GridDensity, GridSpec, PlanarMeasure};
use crate::qns::BallRatio;

#[derive(Serialize, Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct AtomRow {
    x: f64,
    y: f64,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct GridHeader {
    origin_x: f64,
    origin_y: f64,
    cell: f64,
    nx: usize,
    ny: usize,
}

#[derive(Serialize)]
struct BallRow {
    center_x: f64,
    center_y: f64,
    radius: f64,
    value: f64,
    integral: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct RatioRow {
    function: String,
    ratio: Option<f64>,
}

/// Vertices with header `x,y`.
pub fn read_curve<R: Read>(reader: R) -> Result<BoundaryCurve> {
    let mut rdr = csv::Reader::from_reader(reader);
    let pts: std::result::Result<Vec<PointRow>, _> = rdr.deserialize().collect();
    BoundaryCurve::new(pts?.into_iter().map(|p| Complex64::new(p.x, p.y)).collect())
}

pub fn write_curve<W: Write>(writer: W, curve: &BoundaryCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for v in curve.vertices() {
        w.serialize(PointRow { x: v.re, y: v.im })?;
    }
    w.flush()?;
    Ok(())
}

/// Atoms with header `x,y,weight`.
pub fn read_atoms<R: Read>(reader: R) -> Result<PlanarMeasure> {
    let mut rdr = csv::Reader::from_reader(reader);
    let rows: std::result::Result<Vec<AtomRow>, _> = rdr.deserialize().collect();
    PlanarMeasure::atomic(
        rows?
            .into_iter()
            .map(|a| Atom::new(Complex64::new(a.x, a.y), a.weight))
            .collect(),
    )
}

pub fn write_atoms<W: Write>(writer: W, atoms: &[Atom]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for a in atoms {
        w.serialize(AtomRow {
            x: a.point.re,
            y: a.point.im,
            weight: a.weight,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Cartesian grid density: a header record `origin_x,origin_y,cell,nx,ny`,
/// one record with those values, then `ny` rows of `nx` cell values.
pub fn read_grid<R: Read>(reader: R) -> Result<GridDensity> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let head: GridHeader = records
        .next()
        .ok_or_else(|| Error::Parse("grid header record missing".into()))??
        .deserialize(Some(&csv::StringRecord::from(vec![
            "origin_x", "origin_y", "cell", "nx", "ny",
        ])))?;
    let mut values = Vec::with_capacity(head.nx * head.ny);
    for (row, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != head.nx {
            return Err(Error::Parse(format!(
                "grid row {row} has {} values, expected {}",
                rec.len(),
                head.nx
            )));
        }
        for field in rec.iter() {
            values.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("grid row {row}: {field:?}: {e}")))?,
            );
        }
    }
    GridDensity::new(
        GridSpec::Cartesian {
            origin: Complex64::new(head.origin_x, head.origin_y),
            cell: head.cell,
            nx: head.nx,
            ny: head.ny,
        },
        values,
    )
}

pub fn write_grid<W: Write>(writer: W, grid: &GridDensity) -> Result<()> {
    let GridSpec::Cartesian { origin, cell, nx, ny } = grid.spec else {
        return Err(Error::Unsupported("only cartesian grids are exported"));
    };
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    w.serialize(GridHeader {
        origin_x: origin.re,
        origin_y: origin.im,
        cell,
        nx,
        ny,
    })?;
    for row in grid.values.chunks(nx) {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Header `probe_id,parameter,measure,ratio`.
pub fn write_probes<W: Write>(writer: W, probes: &[Probe]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in probes {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_probes<R: Read>(reader: R) -> Result<Vec<Probe>> {
    let mut rdr = csv::Reader::from_reader(reader);
    Ok(rdr.deserialize().collect::<std::result::Result<Vec<Probe>, _>>()?)
}

pub fn write_ball_ratios<W: Write>(writer: W, balls: &[BallRatio]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for b in balls {
        w.serialize(BallRow {
            center_x: b.center.re,
            center_y: b.center.im,
            radius: b.radius,
            value: b.value,
            integral: b.integral,
            ratio: b.ratio,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// One row per family member; the function column holds its JSON form.
pub fn write_embedding_ratios<W: Write>(writer: W, family: &[TestFunction], ratios: &[Option<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (f, r) in family.iter().zip(ratios) {
        w.serialize(RatioRow {
            function: serde_json::to_string(f).map_err(|e| Error::Parse(e.to_string()))?,
            ratio: *r,
        })?;
    }
    w.flush()?;
    Ok(())
}

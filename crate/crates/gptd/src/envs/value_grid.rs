//! Regular value grids with bilinear interpolation and CSV serialization.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::fmt_float;

/// One grid axis: `n` sample positions spanning [min, max]. A periodic axis
/// treats max as identified with min (samples exclude max); a clamped axis
/// includes both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub n: usize,
    pub periodic: bool,
}

impl AxisSpec {
    pub fn clamped(min: f64, max: f64, n: usize) -> Self {
        Self {
            min,
            max,
            n,
            periodic: false,
        }
    }

    pub fn periodic(min: f64, max: f64, n: usize) -> Self {
        Self {
            min,
            max,
            n,
            periodic: true,
        }
    }

    pub fn step(&self) -> f64 {
        if self.periodic {
            (self.max - self.min) / self.n as f64
        } else {
            (self.max - self.min) / (self.n - 1) as f64
        }
    }

    /// Coordinate of grid index i.
    pub fn coord(&self, i: usize) -> f64 {
        self.min + self.step() * i as f64
    }

    /// Lower cell index and fractional offset for interpolation.
    fn locate(&self, x: f64) -> (usize, usize, f64) {
        let step = self.step();
        if self.periodic {
            let span = self.max - self.min;
            let mut t = (x - self.min).rem_euclid(span) / step;
            if t >= self.n as f64 {
                t = 0.0;
            }
            let i0 = t.floor() as usize;
            let frac = t - i0 as f64;
            let i0 = i0.min(self.n - 1);
            let i1 = (i0 + 1) % self.n;
            (i0, i1, frac)
        } else {
            let t = ((x - self.min) / step).clamp(0.0, (self.n - 1) as f64);
            let i0 = (t.floor() as usize).min(self.n - 2);
            let frac = t - i0 as f64;
            (i0, i0 + 1, frac.clamp(0.0, 1.0))
        }
    }
}

/// Values sampled on the tensor grid of two axes.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueGrid {
    pub x_axis: AxisSpec,
    pub y_axis: AxisSpec,
    /// values[(ix, iy)].
    pub values: DMatrix<f64>,
}

impl ValueGrid {
    pub fn zeros(x_axis: AxisSpec, y_axis: AxisSpec) -> Result<Self> {
        if x_axis.n < 2 || y_axis.n < 2 {
            return Err(Error::InvalidParameter {
                name: "resolution".into(),
                reason: "each axis needs at least 2 samples".into(),
            });
        }
        Ok(Self {
            x_axis,
            y_axis,
            values: DMatrix::zeros(x_axis.n, y_axis.n),
        })
    }

    pub fn value_at_index(&self, ix: usize, iy: usize) -> f64 {
        self.values[(ix, iy)]
    }

    /// Bilinear interpolation; clamped axes saturate outside their range.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let (x0, x1, fx) = self.x_axis.locate(x);
        let (y0, y1, fy) = self.y_axis.locate(y);
        let v00 = self.values[(x0, y0)];
        let v10 = self.values[(x1, y0)];
        let v01 = self.values[(x0, y1)];
        let v11 = self.values[(x1, y1)];
        v00 * (1.0 - fx) * (1.0 - fy)
            + v10 * fx * (1.0 - fy)
            + v01 * (1.0 - fx) * fy
            + v11 * fx * fy
    }

    /// All grid points as rows (x, y), column-by-column in y-major order.
    pub fn points(&self) -> DMatrix<f64> {
        let total = self.x_axis.n * self.y_axis.n;
        let mut pts = DMatrix::zeros(total, 2);
        let mut r = 0;
        for iy in 0..self.y_axis.n {
            for ix in 0..self.x_axis.n {
                pts[(r, 0)] = self.x_axis.coord(ix);
                pts[(r, 1)] = self.y_axis.coord(iy);
                r += 1;
            }
        }
        pts
    }

    /// Values flattened in the same order as [`Self::points`].
    pub fn values_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.x_axis.n * self.y_axis.n);
        for iy in 0..self.y_axis.n {
            for ix in 0..self.x_axis.n {
                v.push(self.values[(ix, iy)]);
            }
        }
        v
    }

    /// Write as CSV: a comment line carrying the axis ranges, then
    /// `x_index,y_index,value` rows.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(
            f,
            "# x_axis,{},{},{},{} y_axis,{},{},{},{}",
            fmt_float(self.x_axis.min),
            fmt_float(self.x_axis.max),
            self.x_axis.n,
            self.x_axis.periodic,
            fmt_float(self.y_axis.min),
            fmt_float(self.y_axis.max),
            self.y_axis.n,
            self.y_axis.periodic,
        )?;
        writeln!(f, "x_index,y_index,value")?;
        for iy in 0..self.y_axis.n {
            for ix in 0..self.x_axis.n {
                writeln!(f, "{ix},{iy},{}", fmt_float(self.values[(ix, iy)]))?;
            }
        }
        Ok(())
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let f = BufReader::new(std::fs::File::open(path)?);
        let mut lines = f.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty value-grid file".into()))??;
        let parse_axis = |chunk: &str| -> Result<AxisSpec> {
            let parts: Vec<&str> = chunk.split(',').collect();
            if parts.len() != 5 {
                return Err(Error::Config(format!("bad axis header: {chunk}")));
            }
            Ok(AxisSpec {
                min: parts[1].parse().map_err(|_| Error::Config("axis min".into()))?,
                max: parts[2].parse().map_err(|_| Error::Config("axis max".into()))?,
                n: parts[3].parse().map_err(|_| Error::Config("axis n".into()))?,
                periodic: parts[4]
                    .parse()
                    .map_err(|_| Error::Config("axis periodic".into()))?,
            })
        };
        let body = header
            .strip_prefix("# ")
            .ok_or_else(|| Error::Config("missing axis header".into()))?;
        let (x_part, y_part) = body
            .split_once(" y_axis")
            .ok_or_else(|| Error::Config("missing y_axis header".into()))?;
        let x_axis = parse_axis(x_part)?;
        let y_axis = parse_axis(&format!("y_axis{y_part}"))?;
        let mut grid = Self::zeros(x_axis, y_axis)?;
        for line in lines {
            let line = line?;
            if line.starts_with("x_index") || line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Config(format!("bad value row: {line}")));
            }
            let ix: usize = parts[0].parse().map_err(|_| Error::Config("x_index".into()))?;
            let iy: usize = parts[1].parse().map_err(|_| Error::Config("y_index".into()))?;
            let v: f64 = parts[2].parse().map_err(|_| Error::Config("value".into()))?;
            grid.values[(ix, iy)] = v;
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interpolation_is_exact_on_nodes_and_linear_between() {
        let mut g = ValueGrid::zeros(
            AxisSpec::clamped(0.0, 2.0, 3),
            AxisSpec::clamped(0.0, 1.0, 2),
        )
        .unwrap();
        for ix in 0..3 {
            for iy in 0..2 {
                g.values[(ix, iy)] = (ix as f64) + 10.0 * (iy as f64);
            }
        }
        assert_relative_eq!(g.interpolate(1.0, 0.0), 1.0);
        assert_relative_eq!(g.interpolate(0.5, 0.0), 0.5);
        assert_relative_eq!(g.interpolate(1.0, 0.5), 1.0 + 5.0);
        // Clamps outside the range.
        assert_relative_eq!(g.interpolate(-5.0, 0.0), 0.0);
        assert_relative_eq!(g.interpolate(5.0, 1.0), 12.0);
    }

    #[test]
    fn periodic_axis_wraps() {
        let mut g = ValueGrid::zeros(
            AxisSpec::periodic(-1.0, 1.0, 4),
            AxisSpec::clamped(0.0, 1.0, 2),
        )
        .unwrap();
        // Nodes at -1, -0.5, 0, 0.5.
        for ix in 0..4 {
            g.values[(ix, 0)] = ix as f64;
            g.values[(ix, 1)] = ix as f64;
        }
        assert_relative_eq!(g.interpolate(-1.0, 0.0), 0.0);
        assert_relative_eq!(g.interpolate(0.75, 0.0), 1.5); // between node 3 and wrapped node 0
        assert_relative_eq!(g.interpolate(1.0, 0.0), 0.0); // identified with -1
    }

    #[test]
    fn csv_round_trip() {
        let mut g = ValueGrid::zeros(
            AxisSpec::periodic(-3.0, 3.0, 5),
            AxisSpec::clamped(-10.0, 10.0, 4),
        )
        .unwrap();
        for ix in 0..5 {
            for iy in 0..4 {
                g.values[(ix, iy)] = (ix * 7) as f64 - 0.25 * (iy as f64);
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        g.write_csv(&path).unwrap();
        let back = ValueGrid::read_csv(&path).unwrap();
        assert_eq!(g, back);
    }
}

//! Windows, points and rasterized disc unions.
//!
//! Every area in the crate (normalizing constants, proper zones, coverage)
//! comes from a [`CoverageRaster`]: a midpoint-rule discretization of the
//! window in which a cell is covered iff its midpoint lies in some closed
//! disc. Cells on the upper/right border are clipped to the window, so the
//! cell areas sum exactly to the window area.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of cells along the shorter window side used by default.
pub const DEFAULT_CELLS_PER_SIDE: f64 = 200.0;

/// Axis-aligned rectangular observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    xmin: f64,
    ymin: f64,
    xmax: f64,
    ymax: f64,
}

impl Window {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        let finite = [xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite());
        if !finite || xmax <= xmin || ymax <= ymin {
            return Err(Error::InvalidWindow(format!(
                "need finite bounds with xmax > xmin and ymax > ymin, got ({xmin}, {ymin}, {xmax}, {ymax})"
            )));
        }
        Ok(Self {
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }

    /// `[0, 1] x [0, 1]`.
    pub fn unit() -> Self {
        Self {
            xmin: 0.0,
            ymin: 0.0,
            xmax: 1.0,
            ymax: 1.0,
        }
    }

    /// `[0, side] x [0, side]`.
    pub fn square(side: f64) -> Result<Self> {
        Self::new(0.0, 0.0, side, side)
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }
    pub fn ymin(&self) -> f64 {
        self.ymin
    }
    pub fn xmax(&self) -> f64 {
        self.xmax
    }
    pub fn ymax(&self) -> f64 {
        self.ymax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn shorter_side(&self) -> f64 {
        self.width().min(self.height())
    }

    /// Shorter side divided by 200; a 25 m plot gets 0.125 m cells.
    pub fn default_cell_size(&self) -> f64 {
        self.shorter_side() / DEFAULT_CELLS_PER_SIDE
    }

    /// Closed containment test.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn check_contains(&self, p: Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideWindow { x: p.x, y: p.y })
        }
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{},{}", self.xmin, self.ymin, self.xmax, self.ymax)
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    /// Parses `xmin,ymin,xmax,ymax`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!(
                "window spec must be 'xmin,ymin,xmax,ymax', got '{s}'"
            )));
        }
        let mut v = [0.0; 4];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| Error::Parse(format!("window spec: '{part}' is not a number")))?;
        }
        Window::new(v[0], v[1], v[2], v[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_sq(&self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Euclidean distance.
pub fn distance(a: Point, b: Point) -> f64 {
    a.distance(b)
}

/// Area bookkeeping for one [`CoverageRaster::add_disc`] call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscUpdate {
    /// Area that was uncovered before and is covered now.
    pub delta_area: f64,
    /// Rasterized area of the disc clipped to the window.
    pub disc_area: f64,
}

/// Midpoint-rule raster of a union of discs intersected with a window.
///
/// Covered area is tracked by per-cell-class counters (interior, clipped
/// column, clipped row, clipped corner) so it does not depend on the
/// order in which discs were added.
#[derive(Debug, Clone)]
pub struct CoverageRaster {
    window: Window,
    cell_size: f64,
    nx: usize,
    ny: usize,
    last_width: f64,
    last_height: f64,
    cells: Vec<bool>,
    covered_count: usize,
    class_counts: [usize; 4],
}

impl CoverageRaster {
    pub fn new(window: Window, cell_size: f64) -> Result<Self> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::InvalidDiscretization(format!(
                "cell size must be positive, got {cell_size}"
            )));
        }
        if cell_size >= window.shorter_side() {
            return Err(Error::InvalidDiscretization(format!(
                "cell size {cell_size} must be smaller than the shorter window side {}",
                window.shorter_side()
            )));
        }
        let nx = cell_count(window.width(), cell_size);
        let ny = cell_count(window.height(), cell_size);
        let last_width = window.width() - (nx - 1) as f64 * cell_size;
        let last_height = window.height() - (ny - 1) as f64 * cell_size;
        Ok(Self {
            window,
            cell_size,
            nx,
            ny,
            last_width,
            last_height,
            cells: vec![false; nx * ny],
            covered_count: 0,
            class_counts: [0; 4],
        })
    }

    /// Raster with the window's default cell size.
    pub fn with_default_cells(window: Window) -> Self {
        Self::new(window, window.default_cell_size()).expect("default cell size is always valid")
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// `(columns, rows)`.
    pub fn dimensions(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn covered_count(&self) -> usize {
        self.covered_count
    }

    pub fn covered_area(&self) -> f64 {
        let h = self.cell_size;
        let [interior, column, row, corner] = self.class_counts;
        interior as f64 * h * h
            + column as f64 * self.last_width * h
            + row as f64 * h * self.last_height
            + corner as f64 * self.last_width * self.last_height
    }

    pub fn covered_fraction(&self) -> f64 {
        self.covered_area() / self.window.area()
    }

    pub fn is_covered(&self, col: usize, row: usize) -> bool {
        self.cells[row * self.nx + col]
    }

    /// Marks every cell whose midpoint lies in the closed disc as covered.
    pub fn add_disc(&mut self, center: Point, radius: f64) -> Result<DiscUpdate> {
        check_radius(radius)?;
        let mut update = DiscUpdate {
            delta_area: 0.0,
            disc_area: 0.0,
        };
        let mut delta = [0usize; 4];
        let mut disc = [0usize; 4];
        let r2 = radius * radius;
        let (rows, cols_of) = self.disc_rows(center, radius);
        for row in rows {
            let dy = self.row_mid(row) - center.y;
            let rem = r2 - dy * dy;
            if rem < 0.0 {
                continue;
            }
            let half = rem.sqrt();
            for col in cols_of(center.x - half, center.x + half) {
                let dx = self.col_mid(col) - center.x;
                if dx * dx + dy * dy > r2 {
                    continue;
                }
                let class = self.class_of(col, row);
                disc[class] += 1;
                let cell = &mut self.cells[row * self.nx + col];
                if !*cell {
                    *cell = true;
                    delta[class] += 1;
                }
            }
        }
        for (count, d) in self.class_counts.iter_mut().zip(delta) {
            *count += d;
            self.covered_count += d;
        }
        update.delta_area = self.area_of(delta);
        update.disc_area = self.area_of(disc);
        Ok(update)
    }

    /// Rasterized area of `B(center, radius) ∩ W` and the part of it that is
    /// already covered, without modifying the raster.
    pub fn disc_overlap(&self, center: Point, radius: f64) -> Result<(f64, f64)> {
        check_radius(radius)?;
        let mut disc = [0usize; 4];
        let mut covered = [0usize; 4];
        let r2 = radius * radius;
        let (rows, cols_of) = self.disc_rows(center, radius);
        for row in rows {
            let dy = self.row_mid(row) - center.y;
            let rem = r2 - dy * dy;
            if rem < 0.0 {
                continue;
            }
            let half = rem.sqrt();
            for col in cols_of(center.x - half, center.x + half) {
                let dx = self.col_mid(col) - center.x;
                if dx * dx + dy * dy > r2 {
                    continue;
                }
                let class = self.class_of(col, row);
                disc[class] += 1;
                if self.cells[row * self.nx + col] {
                    covered[class] += 1;
                }
            }
        }
        Ok((self.area_of(disc), self.area_of(covered)))
    }

    /// Clears all cells.
    pub fn reset(&mut self) {
        self.cells.iter_mut().for_each(|c| *c = false);
        self.covered_count = 0;
        self.class_counts = [0; 4];
    }

    /// Candidate rows for a disc, plus a closure giving candidate columns for
    /// an x-interval. Candidates are a superset; callers test midpoints.
    fn disc_rows(
        &self,
        center: Point,
        radius: f64,
    ) -> (
        std::ops::RangeInclusive<usize>,
        impl Fn(f64, f64) -> std::ops::RangeInclusive<usize>,
    ) {
        let h = self.cell_size;
        let nx = self.nx;
        let xmin = self.window.xmin;
        let rows = candidate_range(
            center.y - radius,
            center.y + radius,
            self.window.ymin,
            h,
            self.ny,
        );
        let cols = move |lo: f64, hi: f64| candidate_range(lo, hi, xmin, h, nx);
        (rows, cols)
    }

    fn col_mid(&self, col: usize) -> f64 {
        if col + 1 == self.nx {
            self.window.xmin + col as f64 * self.cell_size + 0.5 * self.last_width
        } else {
            self.window.xmin + (col as f64 + 0.5) * self.cell_size
        }
    }

    fn row_mid(&self, row: usize) -> f64 {
        if row + 1 == self.ny {
            self.window.ymin + row as f64 * self.cell_size + 0.5 * self.last_height
        } else {
            self.window.ymin + (row as f64 + 0.5) * self.cell_size
        }
    }

    fn class_of(&self, col: usize, row: usize) -> usize {
        let last_col = col + 1 == self.nx;
        let last_row = row + 1 == self.ny;
        match (last_col, last_row) {
            (false, false) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (true, true) => 3,
        }
    }

    fn area_of(&self, counts: [usize; 4]) -> f64 {
        let h = self.cell_size;
        counts[0] as f64 * h * h
            + counts[1] as f64 * self.last_width * h
            + counts[2] as f64 * h * self.last_height
            + counts[3] as f64 * self.last_width * self.last_height
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )))
    }
}

fn cell_count(length: f64, h: f64) -> usize {
    let n = (length / h).ceil() as usize;
    // guard against ratios like 1.0000000000000002 producing a sliver column
    if n > 1 && length - (n - 1) as f64 * h <= 1e-12 * length {
        n - 1
    } else {
        n.max(1)
    }
}

/// Indices whose midpoint may fall inside `[lo, hi]`. A cell `i` has its
/// midpoint in `[origin + i h, origin + (i + 0.5) h]`.
fn candidate_range(
    lo: f64,
    hi: f64,
    origin: f64,
    h: f64,
    n: usize,
) -> std::ops::RangeInclusive<usize> {
    let first = ((lo - origin) / h - 0.5).ceil() - 1.0;
    let last = ((hi - origin) / h).floor() + 1.0;
    if last < 0.0 || first > (n - 1) as f64 {
        #[allow(clippy::reversed_empty_ranges)]
        return 1..=0;
    }
    let first = first.max(0.0) as usize;
    let last = (last as usize).min(n - 1);
    first..=last
}

/// Area of `∪ B(p, radius) ∩ W` on a raster with the given cell size.
pub fn union_disc_area(
    points: &[Point],
    radius: f64,
    window: Window,
    cell_size: f64,
) -> Result<f64> {
    let mut raster = CoverageRaster::new(window, cell_size)?;
    check_radius(radius)?;
    for &p in points {
        raster.add_disc(p, radius)?;
    }
    Ok(raster.covered_area())
}

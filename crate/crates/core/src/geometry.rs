//! Planar geometry, finite Poisson point processes and germ-grain blockage.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2D<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Direction of `other` as seen from `self`, in `(-π, π]`.
    pub fn bearing_to(&self, other: &Self) -> T {
        (other.y - self.y).atan2(other.x - self.x)
    }

    pub fn midpoint(&self, other: &Self) -> Self {
        let half = T::lit(0.5);
        Self::new((self.x + other.x) * half, (self.y + other.y) * half)
    }
}

/// Square region `[0, side) x [0, side)`, optionally wrapped into a torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region<T> {
    pub side_length: T,
    pub wrap_around: bool,
}

impl<T: Real> Region<T> {
    pub fn new(side_length: T, wrap_around: bool) -> Result<Self> {
        if !(side_length > T::zero()) || !side_length.is_finite() {
            return Err(Error::arg("side_length", "must be positive and finite"));
        }
        Ok(Self {
            side_length,
            wrap_around,
        })
    }

    pub fn area_km2(&self) -> T {
        let s = self.side_length / T::lit(1000.0);
        s * s
    }

    pub fn contains(&self, p: &Point2D<T>) -> bool {
        p.x >= T::zero() && p.y >= T::zero() && p.x < self.side_length && p.y < self.side_length
    }

    /// Distance under the region metric: minimum image over the nine
    /// translated copies when wrapped, Euclidean otherwise.
    pub fn distance(&self, a: &Point2D<T>, b: &Point2D<T>) -> T {
        wrap_distance(a, b, self)
    }

    pub fn uniform_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2D<T> {
        let x: f64 = rng.random();
        let y: f64 = rng.random();
        let mut p = Point2D::new(T::lit(x) * self.side_length, T::lit(y) * self.side_length);
        // f32 rounding can land exactly on the upper edge
        if p.x >= self.side_length {
            p.x = T::zero();
        }
        if p.y >= self.side_length {
            p.y = T::zero();
        }
        p
    }
}

pub fn wrap_distance<T: Real>(a: &Point2D<T>, b: &Point2D<T>, region: &Region<T>) -> T {
    if !region.wrap_around {
        return a.distance(b);
    }
    let l = region.side_length;
    let offsets = [-l, T::zero(), l];
    let mut best = T::infinity();
    for ox in offsets {
        for oy in offsets {
            let d = (a.x - b.x - ox).hypot(a.y - b.y - oy);
            if d < best {
                best = d;
            }
        }
    }
    best
}

/// Draws the point count of a finite homogeneous PPP with `density` points per
/// km² over `region`.
pub fn poisson_count<T: Real, R: Rng + ?Sized>(density: T, region: &Region<T>, rng: &mut R) -> Result<usize> {
    if !(density >= T::zero()) || !density.is_finite() {
        return Err(Error::arg("density", "must be non-negative and finite"));
    }
    let mean = (density * region.area_km2()).as_f64();
    if mean == 0.0 {
        return Ok(0);
    }
    let poisson = Poisson::new(mean).map_err(|e| Error::arg("density", e.to_string()))?;
    Ok(poisson.sample(rng) as usize)
}

/// Finite homogeneous Poisson point process: Poisson count, i.i.d. uniform
/// positions.
pub fn sample_fhppp<T: Real, R: Rng + ?Sized>(density: T, region: &Region<T>, rng: &mut R) -> Result<Vec<Point2D<T>>> {
    let n = poisson_count(density, region, rng)?;
    Ok((0..n).map(|_| region.uniform_point(rng)).collect())
}

/// A straight wall of the germ-grain blockage model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wall<T> {
    pub center: Point2D<T>,
    pub length: T,
    /// Orientation in `[0, 2π)`.
    pub orientation: T,
}

impl<T: Real> Wall<T> {
    pub fn endpoints(&self) -> (Point2D<T>, Point2D<T>) {
        let h = self.length * T::lit(0.5);
        let (s, c) = self.orientation.sin_cos();
        (
            Point2D::new(self.center.x - h * c, self.center.y - h * s),
            Point2D::new(self.center.x + h * c, self.center.y + h * s),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BlockageField<T> {
    pub walls: Vec<Wall<T>>,
}

impl<T: Real> BlockageField<T> {
    pub fn empty() -> Self {
        Self { walls: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.walls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walls.is_empty()
    }
}

pub fn sample_blockages<T: Real, R: Rng + ?Sized>(
    density: T,
    wall_length: T,
    region: &Region<T>,
    rng: &mut R,
) -> Result<BlockageField<T>> {
    if !(wall_length > T::zero()) {
        return Err(Error::arg("wall_length", "must be positive"));
    }
    let centers = sample_fhppp(density, region, rng)?;
    let walls = centers
        .into_iter()
        .map(|center| {
            let u: f64 = rng.random();
            Wall {
                center,
                length: wall_length,
                orientation: crate::scalar::wrap_two_pi(T::lit(u) * T::TAU()),
            }
        })
        .collect();
    Ok(BlockageField { walls })
}

fn orientation<T: Real>(p: &Point2D<T>, q: &Point2D<T>, r: &Point2D<T>) -> i8 {
    let v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    if v > T::zero() {
        1
    } else if v < T::zero() {
        -1
    } else {
        0
    }
}

fn on_segment<T: Real>(p: &Point2D<T>, q: &Point2D<T>, r: &Point2D<T>) -> bool {
    // r collinear with p-q: inside the bounding box
    r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
}

/// Closed-segment intersection test from orientation predicates. Touching and
/// collinear overlap count as intersecting.
pub fn segments_intersect<T: Real>(a: &Point2D<T>, b: &Point2D<T>, c: &Point2D<T>, d: &Point2D<T>) -> bool {
    let o1 = orientation(a, b, c);
    let o2 = orientation(a, b, d);
    let o3 = orientation(c, d, a);
    let o4 = orientation(c, d, b);
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

/// True iff the segment `a`-`b` crosses no wall.
pub fn is_los<T: Real>(a: &Point2D<T>, b: &Point2D<T>, field: &BlockageField<T>) -> bool {
    let (min_x, max_x) = (a.x.min(b.x), a.x.max(b.x));
    let (min_y, max_y) = (a.y.min(b.y), a.y.max(b.y));
    for wall in &field.walls {
        let h = wall.length * T::lit(0.5);
        if wall.center.x + h < min_x || wall.center.x - h > max_x || wall.center.y + h < min_y || wall.center.y - h > max_y {
            continue;
        }
        let (p, q) = wall.endpoints();
        if segments_intersect(a, b, &p, &q) {
            return false;
        }
    }
    true
}

/// Uniform-grid index over a wall field for fast line-of-sight queries.
/// Answers exactly as [`is_los`].
#[derive(Debug, Clone)]
pub struct BlockageIndex<T> {
    walls: Vec<(Point2D<T>, Point2D<T>)>,
    cell: T,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl<T: Real> BlockageIndex<T> {
    /// Builds the index over `region`; walls poking outside the region are
    /// clamped to the border cells.
    pub fn new(field: &BlockageField<T>, region: &Region<T>, cell: T) -> Result<Self> {
        if !(cell > T::zero()) {
            return Err(Error::arg("cell", "must be positive"));
        }
        let n = (region.side_length / cell).ceil().as_f64().max(1.0) as usize;
        let mut idx = Self {
            walls: field.walls.iter().map(|w| w.endpoints()).collect(),
            cell,
            nx: n,
            ny: n,
            cells: vec![Vec::new(); n * n],
        };
        for k in 0..idx.walls.len() {
            let (p, q) = idx.walls[k];
            let (x0, y0) = idx.cell_of(p.x.min(q.x), p.y.min(q.y));
            let (x1, y1) = idx.cell_of(p.x.max(q.x), p.y.max(q.y));
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    idx.cells[iy * idx.nx + ix].push(k as u32);
                }
            }
        }
        Ok(idx)
    }

    fn axis(&self, v: T, n: usize) -> usize {
        let f = (v / self.cell).floor().as_f64();
        if f <= 0.0 {
            0
        } else {
            (f as usize).min(n - 1)
        }
    }

    fn cell_of(&self, x: T, y: T) -> (usize, usize) {
        (self.axis(x, self.nx), self.axis(y, self.ny))
    }

    /// True iff the segment `a`-`b` crosses no wall.
    pub fn is_los(&self, a: &Point2D<T>, b: &Point2D<T>) -> bool {
        // every cell overlapped by the segment's bounding box, row by row,
        // restricted to the column span the segment can touch on that row
        let (cx0, cy0) = self.cell_of(a.x, a.y);
        let (cx1, cy1) = self.cell_of(b.x, b.y);
        let (ylo, yhi) = (cy0.min(cy1), cy0.max(cy1));
        let dx = b.x - a.x;
        let dy = b.y - a.y;
        let mut seen: Vec<u32> = Vec::new();
        for iy in ylo..=yhi {
            let (xlo, xhi) = if ylo == yhi || dy == T::zero() {
                (cx0.min(cx1), cx0.max(cx1))
            } else {
                // x range of the segment clipped to this row, widened by one cell
                let row_lo = T::count(iy) * self.cell;
                let row_hi = row_lo + self.cell;
                let t0 = ((row_lo - a.y) / dy).max(T::zero()).min(T::one());
                let t1 = ((row_hi - a.y) / dy).max(T::zero()).min(T::one());
                let xa = a.x + dx * t0;
                let xb = a.x + dx * t1;
                let (ca, _) = self.cell_of(xa.min(xb), a.y);
                let (cb, _) = self.cell_of(xa.max(xb), a.y);
                (ca.saturating_sub(1), (cb + 1).min(self.nx - 1))
            };
            for ix in xlo..=xhi {
                for &k in &self.cells[iy * self.nx + ix] {
                    if seen.contains(&k) {
                        continue;
                    }
                    seen.push(k);
                    let (p, q) = &self.walls[k as usize];
                    if segments_intersect(a, b, p, q) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

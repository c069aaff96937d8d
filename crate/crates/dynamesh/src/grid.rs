//! Axis-aligned regular 3D grids and trilinear interpolation.
//!
//! Grids are cubical (`n` nodes per axis) with one uniform spacing `h`.
//! Values are stored flat with `z` contiguous: `index = (i*n + j)*n + k`.

use nalgebra::Vector3;

use crate::{Error, Result};

/// Geometry of a regular cubical grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Nodes per axis.
    pub resolution: usize,
    /// Position of node `(0, 0, 0)`.
    pub origin: Vector3<f64>,
    /// Uniform node spacing on all axes.
    pub spacing: f64,
}

impl GridSpec {
    pub fn new(resolution: usize, origin: Vector3<f64>, spacing: f64) -> Self {
        assert!(resolution >= 8, "resolution must be at least 8");
        assert!(spacing > 0.0, "spacing must be positive");
        Self {
            resolution,
            origin,
            spacing,
        }
    }

    /// Cubical grid spanning `[lo, hi]` per axis with `resolution` nodes.
    pub fn from_bounds(resolution: usize, lo: f64, hi: f64) -> Self {
        assert!(hi > lo);
        let spacing = (hi - lo) / (resolution - 1) as f64;
        Self::new(resolution, Vector3::new(lo, lo, lo), spacing)
    }

    /// Smallest cube that contains every point with at least `margin` cells
    /// of clearance on each side.
    pub fn containing(points: &[Vector3<f64>], resolution: usize, margin: usize) -> Self {
        assert!(!points.is_empty());
        assert!(resolution > 2 * margin + 2);
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let extent = (hi - lo).max().max(1e-9);
        let usable = (resolution - 1 - 2 * margin) as f64;
        let spacing = extent / usable * (1.0 + 1e-9);
        let side = (resolution - 1) as f64 * spacing;
        let center = (lo + hi) * 0.5;
        let origin = center - Vector3::new(side, side, side) * 0.5;
        Self::new(resolution, origin, spacing)
    }

    pub fn node_count(&self) -> usize {
        self.resolution * self.resolution * self.resolution
    }

    pub fn linear_index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.resolution && j < self.resolution && k < self.resolution);
        (i * self.resolution + j) * self.resolution + k
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        self.origin + Vector3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    /// True when `p` lies at least `margin` cells inside the node box.
    pub fn contains_with_margin(&self, p: &Vector3<f64>, margin: f64) -> bool {
        let lo = self.origin + Vector3::repeat(margin * self.spacing);
        let hi = self.origin
            + Vector3::repeat(((self.resolution - 1) as f64 - margin) * self.spacing);
        (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a])
    }

    /// Cell base node and fractional coordinates of a point.
    ///
    /// A point lying exactly on an interior cell boundary is assigned to the
    /// left cell (fraction 1.0), which fixes the subgradient convention for
    /// position derivatives.
    pub fn locate(&self, p: &Vector3<f64>) -> Result<([usize; 3], Vector3<f64>)> {
        let mut base = [0usize; 3];
        let mut frac = Vector3::zeros();
        for a in 0..3 {
            let x = (p[a] - self.origin[a]) / self.spacing;
            if x < 0.0 || x > (self.resolution - 1) as f64 {
                return Err(Error::OutsideGrid);
            }
            let mut b = x.floor();
            let mut f = x - b;
            if f == 0.0 && b > 0.0 {
                b -= 1.0;
                f = 1.0;
            }
            if b as usize >= self.resolution - 1 {
                b = (self.resolution - 2) as f64;
                f = x - b;
            }
            base[a] = b as usize;
            frac[a] = f;
        }
        Ok((base, frac))
    }
}

/// The eight trilinear corner weights of a fractional cell coordinate, in
/// lexicographic corner order `(di, dj, dk)`.
pub fn trilinear_weights(frac: &Vector3<f64>) -> [([usize; 3], f64); 8] {
    let wx = [1.0 - frac.x, frac.x];
    let wy = [1.0 - frac.y, frac.y];
    let wz = [1.0 - frac.z, frac.z];
    let mut out = [([0usize; 3], 0.0); 8];
    let mut idx = 0;
    for di in 0..2 {
        for dj in 0..2 {
            for dk in 0..2 {
                out[idx] = ([di, dj, dk], wx[di] * wy[dj] * wz[dk]);
                idx += 1;
            }
        }
    }
    out
}

/// Gradient of each trilinear corner weight with respect to the point
/// position (world units), in the same corner order as [`trilinear_weights`].
pub fn trilinear_weight_gradients(frac: &Vector3<f64>, spacing: f64) -> [([usize; 3], Vector3<f64>); 8] {
    let w = [
        [1.0 - frac.x, frac.x],
        [1.0 - frac.y, frac.y],
        [1.0 - frac.z, frac.z],
    ];
    // d/dfrac of (1-f) is -1, of f is +1; chain rule brings in 1/spacing.
    let d = [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]];
    let mut out = [([0usize; 3], Vector3::zeros()); 8];
    let mut idx = 0;
    for di in 0..2 {
        for dj in 0..2 {
            for dk in 0..2 {
                let g = Vector3::new(
                    d[0][di] * w[1][dj] * w[2][dk],
                    w[0][di] * d[1][dj] * w[2][dk],
                    w[0][di] * w[1][dj] * d[2][dk],
                ) / spacing;
                out[idx] = ([di, dj, dk], g);
                idx += 1;
            }
        }
    }
    out
}

/// Scalar field sampled on a [`GridSpec`], e.g. the indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            values: vec![0.0; spec.node_count()],
            spec,
        }
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(Vector3<f64>) -> f64) -> Self {
        let n = spec.resolution;
        let mut values = Vec::with_capacity(spec.node_count());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    values.push(f(spec.node_position(i, j, k)));
                }
            }
        }
        Self { spec, values }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.spec.linear_index(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.spec.linear_index(i, j, k);
        self.values[idx] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Trilinear interpolation at a point inside the domain.
    pub fn interpolate(&self, p: &Vector3<f64>) -> Result<f64> {
        let (base, frac) = self.spec.locate(p)?;
        let mut acc = 0.0;
        for (corner, w) in trilinear_weights(&frac) {
            acc += w * self.get(base[0] + corner[0], base[1] + corner[1], base[2] + corner[2]);
        }
        Ok(acc)
    }

    /// Spatial gradient of the trilinear interpolant at a point.
    pub fn interpolate_gradient(&self, p: &Vector3<f64>) -> Result<Vector3<f64>> {
        let (base, frac) = self.spec.locate(p)?;
        let mut acc = Vector3::zeros();
        for (corner, g) in trilinear_weight_gradients(&frac, self.spec.spacing) {
            acc += g * self.get(base[0] + corner[0], base[1] + corner[1], base[2] + corner[2]);
        }
        Ok(acc)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Vector field sampled on a [`GridSpec`], e.g. the splatted normal field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorGrid {
    pub spec: GridSpec,
    pub values: Vec<Vector3<f64>>,
}

impl VectorGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            values: vec![Vector3::zeros(); spec.node_count()],
            spec,
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        self.values[self.spec.linear_index(i, j, k)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.x.is_finite() && v.y.is_finite() && v.z.is_finite())
    }

    /// One scalar component as a contiguous array (for the spectral solver).
    pub fn component(&self, axis: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[axis]).collect()
    }
}

//! Differentiable Poisson surface reconstruction.
//!
//! Oriented points are splatted onto a vector grid by trilinear weights, the
//! Poisson equation `laplace(chi) = div(n_smoothed)` is solved spectrally
//! under periodic boundary conditions, and the iso level is shifted so the
//! input points sit at level 0 on average. The whole map is linear in the
//! normals and piecewise smooth in the positions, so the adjoint pass yields
//! exact gradients for both.
//!
//! Sign convention: [`solve_poisson`] returns the raw solution of the
//! equation, which increases along the input normal direction. [`psr_forward`]
//! negates it so the final indicator is positive inside the surface
//! (outward-oriented input normals assumed), matching the mesh extraction
//! convention downstream.

use nalgebra::Vector3;
use rustfft::num_complex::Complex;

use crate::fft::{signed_frequency, Fft3};
use crate::gauss::OrientedPointCloud;
use crate::grid::{trilinear_weight_gradients, trilinear_weights, GridSpec, ScalarGrid, VectorGrid};
use crate::{Error, Result};

/// Cells of clearance every splatted point must keep from the domain faces.
pub const SPLAT_MARGIN_CELLS: f64 = 2.0;

/// How the iso level is fixed after the spectral solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IsoShiftMode {
    /// Subtract the mean indicator value interpolated at the input points.
    #[default]
    MeanAtPoints,
}

/// Parameters of the spectral reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsrConfig {
    pub grid: GridSpec,
    /// Gaussian smoothing width applied to the splatted normal field,
    /// measured in cells.
    pub sigma: f64,
    pub iso_shift_mode: IsoShiftMode,
}

impl PsrConfig {
    pub fn new(grid: GridSpec, sigma: f64) -> Self {
        assert!(sigma >= 0.0, "sigma must be nonnegative");
        Self {
            grid,
            sigma,
            iso_shift_mode: IsoShiftMode::MeanAtPoints,
        }
    }
}

/// Cached intermediates of a forward pass, sufficient for the adjoint map.
#[derive(Debug, Clone)]
pub struct PsrAdjoint {
    cfg: PsrConfig,
    positions: Vec<Vector3<f64>>,
    normals: Vec<Vector3<f64>>,
    /// Sign-fixed indicator before the iso shift; the mean-shift position
    /// gradient interpolates this grid.
    chi_preshift: ScalarGrid,
    /// Splat of a unit scalar per point (sum of per-point weight stamps).
    point_weight_sum: ScalarGrid,
    checksum: u64,
}

fn input_checksum(cloud: &OrientedPointCloud, cfg: &PsrConfig) -> u64 {
    // FNV-1a over the raw bit patterns; only used to detect stale caches.
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |bits: u64| {
        h ^= bits;
        h = h.wrapping_mul(0x100000001b3);
    };
    eat(cfg.grid.resolution as u64);
    eat(cfg.grid.spacing.to_bits());
    for a in 0..3 {
        eat(cfg.grid.origin[a].to_bits());
    }
    eat(cfg.sigma.to_bits());
    for (p, n) in cloud.positions.iter().zip(&cloud.normals) {
        for a in 0..3 {
            eat(p[a].to_bits());
            eat(n[a].to_bits());
        }
    }
    h
}

/// Distributes each point's normal to its 8 enclosing grid nodes by
/// trilinear weights. Points are processed in index order with compensated
/// accumulation, so the result is deterministic and permutation-stable.
pub fn splat_points(cloud: &OrientedPointCloud, spec: &GridSpec) -> Result<VectorGrid> {
    let mut grid = VectorGrid::zeros(*spec);
    let mut comp = vec![Vector3::<f64>::zeros(); spec.node_count()];
    for (idx, (p, n)) in cloud.positions.iter().zip(&cloud.normals).enumerate() {
        if !spec.contains_with_margin(p, SPLAT_MARGIN_CELLS) {
            return Err(Error::OutOfDomain(idx));
        }
        let (base, frac) = spec.locate(p)?;
        for (corner, w) in trilinear_weights(&frac) {
            let node = spec.linear_index(base[0] + corner[0], base[1] + corner[1], base[2] + corner[2]);
            // Kahan step, per component.
            let term = n * w;
            let y = term - comp[node];
            let t = grid.values[node] + y;
            comp[node] = (t - grid.values[node]) - y;
            grid.values[node] = t;
        }
    }
    Ok(grid)
}

/// Splat of a unit scalar per point; the row sums of the splat operator.
fn splat_unit_weights(positions: &[Vector3<f64>], spec: &GridSpec) -> Result<ScalarGrid> {
    let mut grid = ScalarGrid::zeros(*spec);
    for p in positions {
        let (base, frac) = spec.locate(p)?;
        for (corner, w) in trilinear_weights(&frac) {
            let node = spec.linear_index(base[0] + corner[0], base[1] + corner[1], base[2] + corner[2]);
            grid.values[node] += w;
        }
    }
    Ok(grid)
}

fn require_power_of_two(n: usize) -> Result<()> {
    if !n.is_power_of_two() {
        return Err(Error::UnsupportedResolution(n));
    }
    Ok(())
}

/// Angular frequency of DFT bin `k` on a periodic domain of `n` cells of
/// width `h` (period `n*h`).
fn omega(k: usize, n: usize, h: f64) -> f64 {
    2.0 * std::f64::consts::PI * signed_frequency(k, n) / (n as f64 * h)
}

/// Solves `laplace(chi) = div(v_smoothed)` spectrally on the periodic domain.
///
/// The vector field is first smoothed by a Gaussian of width `sigma` cells
/// (applied as a spectral multiplier); the zero-frequency component of the
/// solution is pinned to 0. The map is linear in `v`.
pub fn solve_poisson(v: &VectorGrid, cfg: &PsrConfig) -> Result<ScalarGrid> {
    let n = cfg.grid.resolution;
    require_power_of_two(n)?;
    assert_eq!(v.spec.resolution, n, "field/config resolution mismatch");
    if !v.is_finite() {
        return Err(Error::Config("non-finite vector field".into()));
    }
    let fft = Fft3::new(n);
    let mut components: Vec<Vec<Complex<f64>>> = (0..3)
        .map(|a| {
            let mut data: Vec<Complex<f64>> =
                v.component(a).into_iter().map(|x| Complex::new(x, 0.0)).collect();
            fft.forward(&mut data);
            data
        })
        .collect();

    let h = cfg.grid.spacing;
    let sigma_w = cfg.sigma * h;
    let mut chi_hat = vec![Complex::default(); n * n * n];
    for i in 0..n {
        let wi = omega(i, n, h);
        for j in 0..n {
            let wj = omega(j, n, h);
            for k in 0..n {
                let wk = omega(k, n, h);
                let idx = (i * n + j) * n + k;
                let w2 = wi * wi + wj * wj + wk * wk;
                if w2 == 0.0 {
                    chi_hat[idx] = Complex::default();
                    continue;
                }
                let smooth = (-0.5 * sigma_w * sigma_w * w2).exp();
                let div = (components[0][idx] * wi + components[1][idx] * wj
                    + components[2][idx] * wk)
                    * Complex::new(0.0, 1.0);
                chi_hat[idx] = div * (-smooth / w2);
            }
        }
    }
    components.clear();
    fft.inverse(&mut chi_hat);
    Ok(ScalarGrid {
        spec: cfg.grid,
        values: chi_hat.into_iter().map(|c| c.re).collect(),
    })
}

/// Adjoint of [`solve_poisson`] as a map from vector fields to scalar fields:
/// takes a scalar cotangent and returns the vector-field cotangent.
fn solve_poisson_adjoint(g: &ScalarGrid, cfg: &PsrConfig) -> Result<VectorGrid> {
    let n = cfg.grid.resolution;
    require_power_of_two(n)?;
    let fft = Fft3::new(n);
    let mut g_hat: Vec<Complex<f64>> = g.values.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fft.forward(&mut g_hat);

    let h = cfg.grid.spacing;
    let sigma_w = cfg.sigma * h;
    let mut out = VectorGrid::zeros(cfg.grid);
    for axis in 0..3 {
        let mut comp = vec![Complex::default(); n * n * n];
        for i in 0..n {
            let wi = omega(i, n, h);
            for j in 0..n {
                let wj = omega(j, n, h);
                for k in 0..n {
                    let wk = omega(k, n, h);
                    let idx = (i * n + j) * n + k;
                    let w2 = wi * wi + wj * wj + wk * wk;
                    if w2 == 0.0 {
                        continue;
                    }
                    let smooth = (-0.5 * sigma_w * sigma_w * w2).exp();
                    let w_axis = [wi, wj, wk][axis];
                    // Conjugate of the forward multiplier -i*w*smooth/w2.
                    comp[idx] = g_hat[idx] * Complex::new(0.0, w_axis * smooth / w2);
                }
            }
        }
        fft.inverse(&mut comp);
        for (slot, c) in out.values.iter_mut().zip(&comp) {
            slot[axis] = c.re;
        }
    }
    Ok(out)
}

/// Shifts the indicator so the mean interpolated value at the input points
/// is exactly zero; the surface points then sit at iso level 0 on average.
pub fn normalize_indicator(chi: &ScalarGrid, cloud: &OrientedPointCloud) -> Result<ScalarGrid> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut mean = 0.0;
    for p in &cloud.positions {
        mean += chi.interpolate(p)?;
    }
    mean /= cloud.len() as f64;
    Ok(chi.map(|v| v - mean))
}

/// Full forward pass: splat, solve, fix the sign so the interior is
/// positive, and shift the iso level. Returns the indicator and the adjoint
/// cache for [`psr_gradient`].
pub fn psr_forward(cloud: &OrientedPointCloud, cfg: &PsrConfig) -> Result<(ScalarGrid, PsrAdjoint)> {
    let splatted = splat_points(cloud, &cfg.grid)?;
    let raw = solve_poisson(&splatted, cfg)?;
    // Raw solution increases along the normals, i.e. is negative inside for
    // outward normals; negate so the interior is positive.
    let chi_preshift = raw.map(|v| -v);
    let chi = normalize_indicator(&chi_preshift, cloud)?;
    let point_weight_sum = splat_unit_weights(&cloud.positions, &cfg.grid)?;
    let adjoint = PsrAdjoint {
        cfg: *cfg,
        positions: cloud.positions.clone(),
        normals: cloud.normals.clone(),
        chi_preshift,
        point_weight_sum,
        checksum: input_checksum(cloud, cfg),
    };
    Ok((chi, adjoint))
}

impl PsrAdjoint {
    pub fn grid_spec(&self) -> &GridSpec {
        &self.cfg.grid
    }

    /// Verifies the cache still matches a cloud/config pair.
    pub fn matches(&self, cloud: &OrientedPointCloud, cfg: &PsrConfig) -> bool {
        self.checksum == input_checksum(cloud, cfg)
    }
}

/// Gradient of a scalar loss through the full forward pass.
///
/// Returns `(dL/dpositions, dL/dnormals)`. The normals path is exactly
/// linear; the positions path is exact away from cell boundaries.
pub fn psr_gradient(
    adjoint: &PsrAdjoint,
    dl_dchi: &ScalarGrid,
) -> Result<(Vec<Vector3<f64>>, Vec<Vector3<f64>>)> {
    if dl_dchi.spec != adjoint.cfg.grid {
        return Err(Error::GridMismatch);
    }
    let n_points = adjoint.positions.len() as f64;
    let total: f64 = dl_dchi.values.iter().sum();

    // Adjoint of the iso shift: g - (G/N) * splat(1).
    let mut shifted = dl_dchi.clone();
    for (slot, w) in shifted.values.iter_mut().zip(&adjoint.point_weight_sum.values) {
        *slot -= total / n_points * w;
    }
    // Adjoint of the sign fix.
    let negated = shifted.map(|v| -v);
    // Adjoint of the spectral solve: cotangent on the splatted field.
    let field_cotangent = solve_poisson_adjoint(&negated, &adjoint.cfg)?;

    let spec = &adjoint.cfg.grid;
    let mut d_positions = Vec::with_capacity(adjoint.positions.len());
    let mut d_normals = Vec::with_capacity(adjoint.positions.len());
    for (p, nrm) in adjoint.positions.iter().zip(&adjoint.normals) {
        let (base, frac) = spec.locate(p)?;
        let mut dn = Vector3::zeros();
        let mut dp = Vector3::zeros();
        let weights = trilinear_weights(&frac);
        let grads = trilinear_weight_gradients(&frac, spec.spacing);
        for c in 0..8 {
            let (corner, w) = weights[c];
            let (_, gw) = grads[c];
            let node =
                spec.linear_index(base[0] + corner[0], base[1] + corner[1], base[2] + corner[2]);
            let cot = field_cotangent.values[node];
            // Splat adjoint: interpolation of the cotangent field.
            dn += cot * w;
            // Position path through the splat weights.
            dp += gw * cot.dot(nrm);
        }
        // Position path through the iso-shift mean.
        dp -= adjoint.chi_preshift.interpolate_gradient(p)? * (total / n_points);
        d_positions.push(dp);
        d_normals.push(dn);
    }
    Ok((d_positions, d_normals))
}

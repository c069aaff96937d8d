//! Gaussian primitives and the algebra shared by the rest of the library.
//!
//! A Gaussian is the atom of both the canonical and deformed frames: a
//! position, a unit rotation quaternion stored as `(w, x, y, z)`, a strictly
//! positive per-axis scale and an opacity in `[0, 1]`. Its covariance is the
//! conjugation `R S S^T R^T` of the squared scales by the rotation.

use nalgebra::{Matrix3, Quaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Stable identity of a Gaussian within a [`CanonicalSet`].
pub type GaussianId = u64;

/// Anisotropic point primitive.
///
/// Quaternion component order is `(w, x, y, z)` everywhere, including I/O.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub id: GaussianId,
    pub position: Vector3<f64>,
    /// Unit quaternion `(w, x, y, z)`.
    pub rotation: Quaternion<f64>,
    /// Per-axis scale, strictly positive.
    pub scale: Vector3<f64>,
    /// Opacity in `[0, 1]`. Carried through deformation; geometrically inert
    /// in the reconstruction pipeline.
    pub opacity: f64,
}

impl Gaussian {
    /// Builds a Gaussian, renormalizing the quaternion and validating scale
    /// and opacity.
    pub fn new(
        id: GaussianId,
        position: Vector3<f64>,
        rotation: Quaternion<f64>,
        scale: Vector3<f64>,
        opacity: f64,
    ) -> Result<Self> {
        let norm = rotation.norm();
        if norm < 1e-9 {
            return Err(Error::InvalidRotation);
        }
        for &s in scale.iter() {
            if !(s > 0.0) {
                return Err(Error::InvalidScale(s));
            }
        }
        Ok(Self {
            id,
            position,
            rotation: rotation / norm,
            scale,
            opacity: opacity.clamp(0.0, 1.0),
        })
    }

    /// Unit Gaussian at a position: identity rotation, isotropic scale.
    pub fn isotropic(id: GaussianId, position: Vector3<f64>, scale: f64, opacity: f64) -> Self {
        Self::new(
            id,
            position,
            Quaternion::new(1.0, 0.0, 0.0, 0.0),
            Vector3::new(scale, scale, scale),
            opacity,
        )
        .expect("positive isotropic scale")
    }

    /// Rotation matrix of this Gaussian.
    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        quat_to_rotation(&self.rotation).expect("stored rotation is unit")
    }

    /// Covariance `R S S^T R^T`.
    pub fn covariance(&self) -> Matrix3<f64> {
        build_covariance(&self.rotation, &self.scale).expect("stored scale is positive")
    }
}

/// Ordered set of Gaussians with strictly unique ids.
///
/// Insertion order is stable so that downstream accumulation is
/// deterministic.
#[derive(Debug, Clone, Default)]
pub struct CanonicalSet {
    gaussians: Vec<Gaussian>,
    next_id: GaussianId,
}

impl CanonicalSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of Gaussians in the set.
    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Gaussian> {
        self.gaussians.iter()
    }

    pub fn gaussians(&self) -> &[Gaussian] {
        &self.gaussians
    }

    pub fn gaussians_mut(&mut self) -> &mut [Gaussian] {
        &mut self.gaussians
    }

    /// Reserves a fresh identity.
    pub fn fresh_id(&mut self) -> GaussianId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Appends a Gaussian built by the caller from a [`Self::fresh_id`].
    ///
    /// Panics if the id collides with an existing one.
    pub fn push(&mut self, g: Gaussian) {
        assert!(
            self.gaussians.iter().all(|x| x.id != g.id),
            "duplicate gaussian id {}",
            g.id
        );
        self.next_id = self.next_id.max(g.id + 1);
        self.gaussians.push(g);
    }

    /// Removes Gaussians by id, preserving the order of the survivors.
    pub fn remove_ids(&mut self, ids: &[GaussianId]) {
        self.gaussians.retain(|g| !ids.contains(&g.id));
    }

    pub fn get(&self, id: GaussianId) -> Option<&Gaussian> {
        self.gaussians.iter().find(|g| g.id == id)
    }
}

impl FromIterator<Gaussian> for CanonicalSet {
    fn from_iter<T: IntoIterator<Item = Gaussian>>(iter: T) -> Self {
        let mut set = CanonicalSet::new();
        for g in iter {
            set.push(g);
        }
        set
    }
}

/// Point cloud with unit normals, the input of Poisson reconstruction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OrientedPointCloud {
    pub positions: Vec<Vector3<f64>>,
    pub normals: Vec<Vector3<f64>>,
}

impl OrientedPointCloud {
    pub fn new(positions: Vec<Vector3<f64>>, normals: Vec<Vector3<f64>>) -> Self {
        assert_eq!(positions.len(), normals.len(), "position/normal count");
        debug_assert!(normals.iter().all(|n| (n.norm() - 1.0).abs() < 1e-6));
        Self { positions, normals }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn centroid(&self) -> Vector3<f64> {
        let mut c = Vector3::zeros();
        for p in &self.positions {
            c += p;
        }
        c / self.positions.len().max(1) as f64
    }
}

/// All randomness in the library flows from one explicit 64-bit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Converts a quaternion `(w, x, y, z)` to a rotation matrix.
///
/// The quaternion is renormalized internally; `q` and `-q` map to the same
/// matrix. A near-zero quaternion is rejected.
pub fn quat_to_rotation(q: &Quaternion<f64>) -> Result<Matrix3<f64>> {
    let norm = q.norm();
    if norm < 1e-9 {
        return Err(Error::InvalidRotation);
    }
    let w = q.w / norm;
    let x = q.i / norm;
    let y = q.j / norm;
    let z = q.k / norm;
    Ok(Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    ))
}

/// Covariance factorization `R S S^T R^T` from rotation and per-axis scale.
///
/// The eigenvalues of the result are exactly the squared scale components.
pub fn build_covariance(r: &Quaternion<f64>, s: &Vector3<f64>) -> Result<Matrix3<f64>> {
    for &c in s.iter() {
        if !(c > 0.0) {
            return Err(Error::InvalidScale(c));
        }
    }
    let rot = quat_to_rotation(r)?;
    let d = Matrix3::from_diagonal(&Vector3::new(s.x * s.x, s.y * s.y, s.z * s.z));
    Ok(rot * d * rot.transpose())
}

/// Surface normal of a Gaussian: the rotation column of the shortest axis.
///
/// Ties are broken by the lowest axis index, so the result is deterministic
/// and invariant under uniform rescaling of `scale`.
pub fn gaussian_normal(g: &Gaussian) -> Vector3<f64> {
    let mut axis = 0;
    for i in 1..3 {
        if g.scale[i] < g.scale[axis] {
            axis = i;
        }
    }
    g.rotation_matrix().column(axis).into_owned()
}

/// How [`orient_normals`] orients against the cloud centroid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentroidMode {
    /// Normals point away from the centroid.
    Outward,
    /// Normals point toward the centroid.
    Inward,
}

/// Flips normals so they agree with the direction away from (or toward) the
/// cloud centroid. Idempotent; zero dot products are left unflipped.
pub fn orient_normals(cloud: &OrientedPointCloud, mode: CentroidMode) -> OrientedPointCloud {
    assert!(!cloud.is_empty(), "cannot orient an empty cloud");
    let centroid = cloud.centroid();
    let normals = cloud
        .positions
        .iter()
        .zip(&cloud.normals)
        .map(|(p, n)| {
            let outward = (p - centroid).dot(n);
            let flip = match mode {
                CentroidMode::Outward => outward < 0.0,
                CentroidMode::Inward => outward > 0.0,
            };
            if flip {
                -n
            } else {
                *n
            }
        })
        .collect();
    OrientedPointCloud {
        positions: cloud.positions.clone(),
        normals,
    }
}

//! Receive-sensitivity maps of a ring of rectangular coils.
//!
//! Each coil is a closed rectangle of four straight filaments. The field of a
//! straight segment from `a` to `b` at `p` has the closed form
//!
//! ```text
//! B = μ0 I / 4π · (d × r1) / |d × r1|² · (d·r1/|r1| − d·r2/|r2|)
//! ```
//!
//! with `d = b − a`, `r1 = p − a`, `r2 = p − b`. Maps are evaluated on the
//! `z = 0` imaging plane and reported as the transverse component `Bx − i·By`.

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::image::{ComplexImage, Grid, Mask};

/// Vacuum permeability, H/m.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Grid points closer than this to a conductor are rejected.
pub const MIN_CONDUCTOR_DISTANCE: f64 = 1e-6;

type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilGeometry {
    corners: [Vec3; 4],
    /// amperes
    pub current: f64,
}

impl CoilGeometry {
    /// `corners` must be ordered around a planar rectangle; current flows corner 0 → 1 → 2 → 3 → 0.
    pub fn new(corners: [Vec3; 4], current: f64) -> Result<Self> {
        if !current.is_finite() {
            return Err(invalid("coil current must be finite"));
        }
        let edges: Vec<Vec3> = (0..4).map(|i| sub(corners[(i + 1) % 4], corners[i])).collect();
        let lengths: Vec<f64> = edges.iter().map(|e| norm(*e)).collect();
        if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(invalid("coil corners must be distinct and finite"));
        }
        for i in 0..4 {
            let cos = dot(edges[i], edges[(i + 1) % 4]) / (lengths[i] * lengths[(i + 1) % 4]);
            if cos.abs() > 1e-9 {
                return Err(invalid(format!("coil edges {i} and {} are not perpendicular", (i + 1) % 4)));
            }
        }
        let normal = cross(edges[0], edges[1]);
        let off_plane = dot(sub(corners[3], corners[0]), normal) / norm(normal);
        if off_plane.abs() > 1e-9 {
            return Err(invalid("coil corners are not coplanar"));
        }
        Ok(Self { corners, current })
    }

    /// Square loop of side `side` in a plane of constant `z`, centered at `center`.
    pub fn square(center: Vec3, side: f64, current: f64) -> Result<Self> {
        let h = side / 2.0;
        let [x, y, z] = center;
        Self::new([[x - h, y - h, z], [x + h, y - h, z], [x + h, y + h, z], [x - h, y + h, z]], current)
    }

    pub fn corners(&self) -> &[Vec3; 4] {
        &self.corners
    }

    pub fn center(&self) -> Vec3 {
        let mut c = [0.0; 3];
        for p in &self.corners {
            for k in 0..3 {
                c[k] += p[k] / 4.0;
            }
        }
        c
    }

    pub fn with_current(mut self, current: f64) -> Self {
        self.current = current;
        self
    }
}

/// `n_coils` rectangles evenly spaced on a circle of diameter `opposite_distance`
/// in the `z = plane_offset` plane, each tangent to the circle and facing its center.
pub fn place_coils_ring(
    n_coils: usize,
    opposite_distance: f64,
    coil_width: f64,
    coil_height: f64,
    plane_offset: f64,
) -> Result<Vec<CoilGeometry>> {
    if n_coils == 0 {
        return Err(invalid("ring needs at least one coil"));
    }
    for (name, v) in [("opposite distance", opposite_distance), ("coil width", coil_width), ("coil height", coil_height)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(format!("{name} must be positive, got {v}")));
        }
    }
    if !plane_offset.is_finite() {
        return Err(invalid("plane offset must be finite"));
    }
    let radius = opposite_distance / 2.0;
    (0..n_coils)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n_coils as f64;
            let (s, c) = theta.sin_cos();
            let center = [radius * c, radius * s, plane_offset];
            let tangent = [-s * coil_width / 2.0, c * coil_width / 2.0, 0.0];
            let up = [0.0, 0.0, coil_height / 2.0];
            let at = |t: f64, u: f64| {
                [center[0] + t * tangent[0], center[1] + t * tangent[1], center[2] + u * up[2]]
            };
            CoilGeometry::new([at(-1.0, -1.0), at(1.0, -1.0), at(1.0, 1.0), at(-1.0, 1.0)], 1.0)
        })
        .collect()
}

fn distance_to_segment(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let d = sub(b, a);
    let t = (dot(sub(p, a), d) / dot(d, d)).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]]))
}

/// Field of a unit-current straight filament from `a` to `b`, without the μ0/4π factor.
fn segment_field(p: Vec3, a: Vec3, b: Vec3) -> Result<Vec3> {
    let dist = distance_to_segment(p, a, b);
    if dist < MIN_CONDUCTOR_DISTANCE {
        return Err(Error::SingularGeometry { x: p[0], y: p[1], z: p[2], distance: dist });
    }
    let d = sub(b, a);
    let r1 = sub(p, a);
    let r2 = sub(p, b);
    let c = cross(d, r1);
    let c2 = dot(c, c);
    // on the segment's line but outside it: the contribution vanishes
    if c2 <= 1e-30 * dot(d, d) * dot(r1, r1) {
        return Ok([0.0; 3]);
    }
    let k = (dot(d, r1) / norm(r1) - dot(d, r2) / norm(r2)) / c2;
    Ok([c[0] * k, c[1] * k, c[2] * k])
}

/// Magnetic flux density (T) of the coil at `point`.
pub fn biot_savart_field(coil: &CoilGeometry, point: Vec3) -> Result<Vec3> {
    let mut b = [0.0; 3];
    for i in 0..4 {
        let f = segment_field(point, coil.corners[i], coil.corners[(i + 1) % 4])?;
        for k in 0..3 {
            b[k] += f[k];
        }
    }
    let scale = MU0 / (4.0 * std::f64::consts::PI) * coil.current;
    Ok([b[0] * scale, b[1] * scale, b[2] * scale])
}

/// Complex transverse sensitivity `Bx − i·By` of one coil on the `z = 0` grid plane.
pub fn biot_savart_map(coil: &CoilGeometry, grid: &Grid) -> Result<ComplexImage> {
    let mut samples = Array2::zeros(grid.shape());
    for ((row, col), v) in samples.indexed_iter_mut() {
        let (x, y) = grid.coords(row, col);
        let b = biot_savart_field(coil, [x, y, 0.0])?;
        *v = Complex64::new(b[0], -b[1]);
    }
    ComplexImage::new(*grid, samples)
}

/// Per-coil complex maps on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoilSensitivitySet {
    maps: Vec<ComplexImage>,
    normalized: bool,
}

impl CoilSensitivitySet {
    pub fn new(maps: Vec<ComplexImage>) -> Result<Self> {
        let first = maps.first().ok_or_else(|| invalid("sensitivity set needs at least one coil"))?;
        for m in &maps[1..] {
            first.grid.ensure_compatible(&m.grid, "coil sensitivity set")?;
        }
        Ok(Self { maps, normalized: false })
    }

    pub fn simulate(coils: &[CoilGeometry], grid: &Grid) -> Result<Self> {
        Self::new(coils.iter().map(|c| biot_savart_map(c, grid)).collect::<Result<_>>()?)
    }

    pub fn zeros(n_coils: usize, grid: Grid) -> Result<Self> {
        Self::new(vec![ComplexImage::zeros(grid); n_coils])
    }

    pub fn n_coils(&self) -> usize {
        self.maps.len()
    }

    pub fn grid(&self) -> &Grid {
        &self.maps[0].grid
    }

    pub fn maps(&self) -> &[ComplexImage] {
        &self.maps
    }

    pub fn map(&self, coil: usize) -> &ComplexImage {
        &self.maps[coil]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Coil vector at flat voxel index `voxel`.
    pub fn voxel(&self, voxel: usize) -> Vec<Complex64> {
        let w = self.grid().width;
        self.maps.iter().map(|m| m.samples[[voxel / w, voxel % w]]).collect()
    }

    pub fn to_matrix(&self) -> SensitivityMatrix {
        let v = self.grid().n_voxels();
        let mut data = Array2::zeros((v, self.n_coils()));
        for (c, m) in self.maps.iter().enumerate() {
            for (i, s) in m.samples.iter().enumerate() {
                data[[i, c]] = *s;
            }
        }
        SensitivityMatrix { data }
    }

    pub fn from_matrix(matrix: &SensitivityMatrix, grid: Grid) -> Result<Self> {
        if matrix.rows() != grid.n_voxels() {
            return Err(invalid(format!("matrix has {} rows, grid has {} voxels", matrix.rows(), grid.n_voxels())));
        }
        let maps = (0..matrix.cols())
            .map(|c| {
                let col: Vec<Complex64> = matrix.data.column(c).to_vec();
                ComplexImage::new(grid, Array2::from_shape_vec(grid.shape(), col).expect("shape checked"))
            })
            .collect::<Result<_>>()?;
        Self::new(maps)
    }

    /// Zero every map outside `support`.
    pub fn masked(mut self, support: &Mask) -> Result<Self> {
        self.grid().ensure_compatible(&support.grid, "support mask")?;
        for m in &mut self.maps {
            m.samples.zip_mut_with(&support.data, |v, &keep| {
                if !keep {
                    *v = Complex64::default();
                }
            });
        }
        Ok(self)
    }

    pub fn conj(mut self) -> Self {
        for m in &mut self.maps {
            m.samples.mapv_inplace(|v| v.conj());
        }
        self
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        for m in &mut self.maps {
            m.samples.mapv_inplace(|v| v * factor);
        }
        self
    }

    /// Apply `f` to each voxel's coil vector in place.
    pub fn map_voxels(&mut self, mut f: impl FnMut(usize, &mut [Complex64])) {
        let w = self.grid().width;
        let n = self.grid().n_voxels();
        let mut buf = vec![Complex64::default(); self.n_coils()];
        for voxel in 0..n {
            let idx = [voxel / w, voxel % w];
            for (b, m) in buf.iter_mut().zip(&self.maps) {
                *b = m.samples[idx];
            }
            f(voxel, &mut buf);
            for (b, m) in buf.iter().zip(&mut self.maps) {
                m.samples[idx] = *b;
            }
        }
    }
}

/// Voxels × coils matrix; column `c` is map `c` flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityMatrix {
    pub data: Array2<Complex64>,
}

impl SensitivityMatrix {
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    fn gram(&self) -> DMatrix<Complex64> {
        let c = self.cols();
        let mut g = DMatrix::zeros(c, c);
        for i in 0..c {
            for j in i..c {
                let s: Complex64 = self.data.column(i).iter().zip(self.data.column(j).iter()).map(|(a, b)| a.conj() * b).sum();
                g[(i, j)] = s;
                g[(j, i)] = s.conj();
            }
        }
        g
    }

    /// Right singular vectors (columns) and singular values, descending,
    /// from the eigen-decomposition of the coil Gram matrix `SᴴS`.
    pub fn right_singular_pairs(&self) -> (DMatrix<Complex64>, Vec<f64>) {
        let eig = self.gram().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.cols()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let vectors = DMatrix::from_fn(self.cols(), self.cols(), |r, k| eig.eigenvectors[(r, order[k])]);
        let values = order.iter().map(|&k| eig.eigenvalues[k].max(0.0).sqrt()).collect();
        (vectors, values)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.right_singular_pairs().1
    }

    /// Frobenius-closest matrix of rank `rank`: `S · V_r · V_rᴴ`.
    pub fn truncate(&self, rank: usize) -> Result<Self> {
        if rank == 0 || rank > self.cols() {
            return Err(invalid(format!("rank must be in 1..={}, got {rank}", self.cols())));
        }
        let (v, _) = self.right_singular_pairs();
        let vr = v.columns(0, rank);
        let proj = &vr * vr.adjoint();
        let c = self.cols();
        let mut out = Array2::zeros(self.data.dim());
        let mut row_buf = vec![Complex64::default(); c];
        for (i, row) in self.data.rows().into_iter().enumerate() {
            for j in 0..c {
                row_buf[j] = (0..c).map(|k| row[k] * proj[(k, j)]).sum();
            }
            for j in 0..c {
                out[[i, j]] = row_buf[j];
            }
        }
        Ok(Self { data: out })
    }
}

/// Simulate coil coupling by projecting the sensitivity matrix onto its best rank-`rank` approximation.
pub fn couple_coils(maps: &CoilSensitivitySet, rank: usize) -> Result<CoilSensitivitySet> {
    if rank == 0 || rank > maps.n_coils() {
        return Err(invalid(format!("coupling rank must be in 1..={}, got {rank}", maps.n_coils())));
    }
    let truncated = maps.to_matrix().truncate(rank)?;
    CoilSensitivitySet::from_matrix(&truncated, *maps.grid())
}

/// Scale each supported voxel's coil vector to unit Euclidean norm; zero the rest.
pub fn normalize_maps(maps: &CoilSensitivitySet, support: &Mask) -> Result<CoilSensitivitySet> {
    maps.grid().ensure_compatible(&support.grid, "normalize_maps")?;
    let mut out = maps.clone();
    let inside = support.data.as_slice().expect("standard layout").to_vec();
    let mut degenerate = Vec::new();
    out.map_voxels(|voxel, coils| {
        if !inside[voxel] {
            coils.iter_mut().for_each(|v| *v = Complex64::default());
            return;
        }
        let n = coils.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 && n.is_finite() {
            coils.iter_mut().for_each(|v| *v /= n);
        } else {
            degenerate.push(voxel);
        }
    });
    if !degenerate.is_empty() {
        return Err(Error::DegenerateVoxel { voxels: degenerate });
    }
    out.normalized = true;
    Ok(out)
}

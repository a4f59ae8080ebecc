//! Single-layer Cartesian grid with per-cell rock properties.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;

/// m² per millidarcy.
pub const MILLIDARCY: f64 = 9.869233e-16;

/// `nx × ny` cells of size `dx × dy × dz`, indexed `i + nx j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianGrid {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    dz: f64,
    depth: Vec<f64>,
    porosity: Vec<f64>,
    permeability: Vec<f64>,
}

/// An interior face between cells `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub i: usize,
    pub j: usize,
    pub area: f64,
    /// Face center.
    pub center: [f64; 3],
    /// Unit normal pointing from `i` to `j`.
    pub normal: [f64; 3],
}

impl CartesianGrid {
    pub fn new(
        nx: usize,
        ny: usize,
        [dx, dy, dz]: [f64; 3],
        depth: Vec<f64>,
        porosity: Vec<f64>,
        permeability: Vec<f64>,
    ) -> Result<Self, ScenarioError> {
        let n = nx * ny;
        if n == 0 {
            return Err(ScenarioError::Invalid("grid needs at least one cell".into()));
        }
        if [dx, dy, dz].iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(ScenarioError::Invalid("cell dimensions must be positive".into()));
        }
        for (name, len) in [("depth", depth.len()), ("porosity", porosity.len()), ("permeability", permeability.len())] {
            if len != n {
                return Err(ScenarioError::Invalid(format!("{name} has {len} values for {n} cells")));
            }
        }
        if let Some(c) = porosity.iter().position(|p| !(*p > 0.0 && *p <= 1.0)) {
            return Err(ScenarioError::Invalid(format!("porosity {} in cell {c} outside (0, 1]", porosity[c])));
        }
        if let Some(c) = permeability.iter().position(|k| !(*k > 0.0 && k.is_finite())) {
            return Err(ScenarioError::Invalid(format!("permeability {} in cell {c} not positive", permeability[c])));
        }
        if depth.iter().any(|z| !z.is_finite()) {
            return Err(ScenarioError::Invalid("depth must be finite".into()));
        }
        Ok(Self { nx, ny, dx, dy, dz, depth, porosity, permeability })
    }

    /// Flat grid with uniform properties.
    pub fn uniform(nx: usize, ny: usize, size: [f64; 3], porosity: f64, permeability: f64) -> Result<Self, ScenarioError> {
        let n = nx * ny;
        Self::new(nx, ny, size, vec![0.0; n], vec![porosity; n], vec![permeability; n])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_size(&self) -> [f64; 3] {
        [self.dx, self.dy, self.dz]
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dy * self.dz
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        assert!(i < self.nx && j < self.ny);
        i + self.nx * j
    }

    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx, cell / self.nx)
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    pub fn porosity(&self) -> &[f64] {
        &self.porosity
    }

    pub fn permeability(&self) -> &[f64] {
        &self.permeability
    }

    pub fn cell_center(&self, cell: usize) -> [f64; 3] {
        let (i, j) = self.coords(cell);
        [(i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy, self.depth[cell]]
    }

    /// Interior faces: x-faces row by row, then y-faces.
    pub fn faces(&self) -> Vec<Face> {
        let mut out = Vec::new();
        for j in 0..self.ny {
            for i in 0..self.nx.saturating_sub(1) {
                out.push(self.face(self.index(i, j), self.index(i + 1, j), self.dy * self.dz, [1.0, 0.0, 0.0]));
            }
        }
        for j in 0..self.ny.saturating_sub(1) {
            for i in 0..self.nx {
                out.push(self.face(self.index(i, j), self.index(i, j + 1), self.dx * self.dz, [0.0, 1.0, 0.0]));
            }
        }
        out
    }

    fn face(&self, i: usize, j: usize, area: f64, normal: [f64; 3]) -> Face {
        let (a, b) = (self.cell_center(i), self.cell_center(j));
        let center = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])];
        Face { i, j, area, center, normal }
    }

    /// `Γ_ij = A (Γ̂_ij⁻¹ + Γ̂_ji⁻¹)⁻¹`, `Γ̂_ij = K_i (c_f - c_i)·n / |c_f - c_i|²`,
    /// with distances measured in the layer plane.
    pub fn geometric_transmissibility(&self, face: &Face) -> f64 {
        let half = |cell: usize, sign: f64| {
            let c = self.cell_center(cell);
            let d = [face.center[0] - c[0], face.center[1] - c[1]];
            let along = sign * (d[0] * face.normal[0] + d[1] * face.normal[1]);
            self.permeability[cell] * along / (d[0] * d[0] + d[1] * d[1])
        };
        half_transmissibility_sum(face.area, half(face.i, 1.0), half(face.j, -1.0))
    }
}

/// `A (1/g_i + 1/g_j)⁻¹`, zero if either half is zero.
pub fn half_transmissibility_sum(area: f64, g_i: f64, g_j: f64) -> f64 {
    if g_i == 0.0 || g_j == 0.0 {
        return 0.0;
    }
    area / (1.0 / g_i + 1.0 / g_j)
}

/// Rock property source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// Uniform properties.
    Uniform { porosity: f64, permeability_md: f64 },
    /// Smoothed log-normal permeability on a wide base field; a grid with
    /// `nx` columns takes the left-most `nx` columns.
    Synthetic {
        seed: u64,
        #[serde(default = "default_base_columns")]
        base_columns: usize,
        #[serde(default = "default_median_md")]
        median_permeability_md: f64,
        #[serde(default = "default_log_std")]
        log_std: f64,
        /// Moving-average radius in cells.
        #[serde(default = "default_correlation")]
        correlation_cells: usize,
        #[serde(default = "default_porosity_mean")]
        porosity_mean: f64,
        #[serde(default = "default_porosity_std")]
        porosity_std: f64,
    },
    /// CSV with columns `porosity,permeability_md` in row-major cell order
    /// of a base field `columns` wide.
    File { path: String, columns: usize },
}

fn default_base_columns() -> usize {
    220
}
fn default_median_md() -> f64 {
    100.0
}
fn default_log_std() -> f64 {
    1.0
}
fn default_correlation() -> usize {
    2
}
fn default_porosity_mean() -> f64 {
    0.2
}
fn default_porosity_std() -> f64 {
    0.03
}

impl FieldSpec {
    pub fn synthetic(seed: u64) -> Self {
        Self::Synthetic {
            seed,
            base_columns: default_base_columns(),
            median_permeability_md: default_median_md(),
            log_std: default_log_std(),
            correlation_cells: default_correlation(),
            porosity_mean: default_porosity_mean(),
            porosity_std: default_porosity_std(),
        }
    }

    /// `(porosity, permeability in m²)` for an `nx × ny` grid, row-major.
    /// Relative paths are resolved against `base_dir`.
    pub fn generate(&self, nx: usize, ny: usize, base_dir: &Path) -> Result<(Vec<f64>, Vec<f64>), ScenarioError> {
        match self {
            FieldSpec::Uniform { porosity, permeability_md } => {
                Ok((vec![*porosity; nx * ny], vec![permeability_md * MILLIDARCY; nx * ny]))
            }
            FieldSpec::Synthetic {
                seed,
                base_columns,
                median_permeability_md,
                log_std,
                correlation_cells,
                porosity_mean,
                porosity_std,
            } => {
                if nx > *base_columns {
                    return Err(ScenarioError::Invalid(format!("{nx} columns exceed base field width {base_columns}")));
                }
                let g = smoothed_gaussian_field(*seed, *base_columns, ny, *correlation_cells);
                let mut phi = Vec::with_capacity(nx * ny);
                let mut k = Vec::with_capacity(nx * ny);
                for j in 0..ny {
                    for i in 0..nx {
                        let z = g[i + base_columns * j];
                        k.push(median_permeability_md * MILLIDARCY * (log_std * z).exp());
                        phi.push((porosity_mean + porosity_std * z).clamp(0.05, 0.45));
                    }
                }
                Ok((phi, k))
            }
            FieldSpec::File { path, columns } => {
                let path = base_dir.join(path);
                let (phi, k_md) = read_field_csv(&path)?;
                let rows = phi.len() / columns.max(&1);
                if phi.len() != rows * columns || nx > *columns || ny > rows {
                    return Err(ScenarioError::Invalid(format!(
                        "field file {} has {} cells, not enough for {nx}x{ny} with {columns} columns",
                        path.display(),
                        phi.len()
                    )));
                }
                let pick = |v: &[f64]| (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| v[i + columns * j]).collect::<Vec<_>>();
                Ok((pick(&phi), pick(&k_md).into_iter().map(|k| k * MILLIDARCY).collect()))
            }
        }
    }
}

/// Standard normal noise smoothed by a `(2r+1)²` box filter (clamped at
/// the edges) and rescaled to zero mean and unit variance.
pub fn smoothed_gaussian_field(seed: u64, width: usize, height: usize, radius: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..width * height).map(|_| StandardNormal.sample(&mut rng)).collect();
    let r = radius as isize;
    let mut out = vec![0.0; width * height];
    for j in 0..height as isize {
        for i in 0..width as isize {
            let mut sum = 0.0;
            let mut count = 0.0;
            for dj in -r..=r {
                for di in -r..=r {
                    let (ii, jj) = (i + di, j + dj);
                    if ii >= 0 && jj >= 0 && (ii as usize) < width && (jj as usize) < height {
                        sum += noise[ii as usize + width * jj as usize];
                        count += 1.0;
                    }
                }
            }
            out[i as usize + width * j as usize] = sum / count;
        }
    }
    let n = out.len() as f64;
    let mean = out.iter().sum::<f64>() / n;
    let var = out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
    out.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    out
}

#[derive(Debug, Deserialize)]
struct FieldRow {
    porosity: f64,
    permeability_md: f64,
}

pub fn read_field_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), ScenarioError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut phi = Vec::new();
    let mut k = Vec::new();
    for row in reader.deserialize() {
        let row: FieldRow = row?;
        phi.push(row.porosity);
        k.push(row.permeability_md);
    }
    Ok((phi, k))
}

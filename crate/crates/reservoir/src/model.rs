//! Finite-volume discretization of water and oil-component conservation
//! with two-point fluxes, exposed as an [`OdeSystem`].
//!
//! State layout: per cell `[n_w, n_CH4, n_nC10, n_CO2]` in mol. Inputs `u`
//! are the per-well volumetric injection rates in m³/day (empty means the
//! scheduled rates); there are no disturbances.

use std::sync::Arc;

use podnewton::{EvalError, OdeSystem, SparseMatrix, SparsityPattern};

use crate::components::{ComponentTable, NC};
use crate::dual::{Dual, Scalar};
use crate::error::ThermoError;
use crate::grid::CartesianGrid;
use crate::thermo::{
    corey_relative_permeability, oil_molar_volume_from_balance, water_volume, CoreyParams, Lbc, OilViscosityModel,
    PengRobinson,
};

/// States per cell.
pub const NV: usize = 1 + NC;
pub const GRAVITY: f64 = 9.81;
pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Phase and component properties at a fixed temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct Fluid {
    pub components: ComponentTable,
    pub temperature: f64,
    pub water_molar_volume: f64,
    pub water_viscosity: f64,
    /// kg/m³, used in the gravity term only.
    pub water_density: f64,
    pub corey: CoreyParams,
    pub oil_viscosity: OilViscosityModel,
    pr: PengRobinson,
    lbc: Lbc,
}

impl Fluid {
    pub fn new(
        components: ComponentTable,
        temperature: f64,
        water_molar_volume: f64,
        water_viscosity: f64,
        water_density: f64,
        corey: CoreyParams,
        oil_viscosity: OilViscosityModel,
    ) -> Self {
        Self {
            pr: PengRobinson::new(&components, temperature),
            lbc: Lbc::new(&components, temperature),
            components,
            temperature,
            water_molar_volume,
            water_viscosity,
            water_density,
            corey,
            oil_viscosity,
        }
    }

    pub fn peng_robinson(&self) -> &PengRobinson {
        &self.pr
    }

    pub fn lbc(&self) -> &Lbc {
        &self.lbc
    }

    /// Oil viscosity in Pa s under the configured model.
    pub fn oil_phase_viscosity<S: Scalar>(&self, y: &[S; NC], molar_density: S) -> Result<S, ThermoError> {
        match self.oil_viscosity {
            OilViscosityModel::Lbc => self.lbc.viscosity(y, molar_density),
            OilViscosityModel::Constant { value } => Ok(S::cst(value)),
        }
    }
}

impl Default for Fluid {
    fn default() -> Self {
        use crate::thermo::{DEFAULT_TEMPERATURE, DEFAULT_WATER_MOLAR_VOLUME, DEFAULT_WATER_VISCOSITY};
        Self::new(
            ComponentTable::default(),
            DEFAULT_TEMPERATURE,
            DEFAULT_WATER_MOLAR_VOLUME,
            DEFAULT_WATER_VISCOSITY,
            1000.0,
            CoreyParams::default(),
            OilViscosityModel::Lbc,
        )
    }
}

/// An injector in one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Well {
    pub cell: usize,
    /// m³/day at the reference pressure.
    pub rate: f64,
    /// Injected mole fractions of CH4, nC10, CO2.
    pub composition: [f64; NC],
    /// Molar volume of the injected fluid at the reference pressure, m³/mol.
    pub reference_molar_volume: f64,
}

/// `Q = rate / 86400 / v_ref` in mol/s for a rate in m³/day.
pub fn molar_injection_rate(rate_m3_per_day: f64, reference_molar_volume: f64) -> f64 {
    rate_m3_per_day / SECONDS_PER_DAY / reference_molar_volume
}

/// `ΔΦ = (P_j - P_i) - ½(ρ_i + ρ_j) g (z_j - z_i)`.
pub fn potential_difference<S: Scalar>(p_i: S, p_j: S, rho_i: S, rho_j: S, z_i: f64, z_j: f64) -> S {
    (p_j - p_i) - (rho_i + rho_j) * (0.5 * GRAVITY * (z_j - z_i))
}

/// Donor-cell value: `i` if `ΔΦ < 0`, else `j`.
pub fn upwinded_mobility<S: Scalar>(dphi: f64, h_i: S, h_j: S) -> S {
    if dphi < 0.0 {
        h_i
    } else {
        h_j
    }
}

/// Cell quantities entering the face fluxes.
#[derive(Debug, Clone, Copy)]
pub struct CellProps<S> {
    pub pressure: S,
    /// Oil mass density, kg/m³.
    pub oil_density: S,
    /// `ρ k_r / μ` with molar density, water.
    pub water_mobility: S,
    pub oil_mobility: S,
    pub mole_fractions: [S; NC],
}

impl<const N: usize> CellProps<Dual<N>> {
    fn lift<const M: usize>(&self, offset: usize) -> CellProps<Dual<M>> {
        CellProps {
            pressure: self.pressure.lift(offset),
            oil_density: self.oil_density.lift(offset),
            water_mobility: self.water_mobility.lift(offset),
            oil_mobility: self.oil_mobility.lift(offset),
            mole_fractions: self.mole_fractions.map(|y| y.lift(offset)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct FaceData {
    i: usize,
    j: usize,
    trans: f64,
    z_i: f64,
    z_j: f64,
}

#[derive(Debug, Clone)]
pub struct ReservoirModel {
    grid: CartesianGrid,
    fluid: Fluid,
    wells: Vec<Well>,
    faces: Vec<FaceData>,
    pore_volume: Vec<f64>,
    pattern: Arc<SparsityPattern>,
    diag_blocks: Vec<[usize; NV * NV]>,
    /// Positions of the `(i, j)` and `(j, i)` blocks of each face.
    face_blocks: Vec<([usize; NV * NV], [usize; NV * NV])>,
}

impl ReservoirModel {
    pub fn new(grid: CartesianGrid, fluid: Fluid, wells: Vec<Well>) -> Self {
        for w in &wells {
            assert!(w.cell < grid.cell_count() && w.rate >= 0.0 && w.reference_molar_volume > 0.0);
        }
        let faces: Vec<FaceData> = grid
            .faces()
            .iter()
            .map(|f| FaceData {
                i: f.i,
                j: f.j,
                trans: grid.geometric_transmissibility(f),
                z_i: grid.depth()[f.i],
                z_j: grid.depth()[f.j],
            })
            .collect();
        let nc = grid.cell_count();
        let block = |a: usize, b: usize| (0..NV).flat_map(move |r| (0..NV).map(move |c| (NV * a + r, NV * b + c)));
        let entries = (0..nc)
            .flat_map(|c| block(c, c))
            .chain(faces.iter().flat_map(|f| block(f.i, f.j).chain(block(f.j, f.i))));
        let pattern = Arc::new(SparsityPattern::from_entries(NV * nc, entries));
        let positions = |a: usize, b: usize| -> [usize; NV * NV] {
            let mut out = [0; NV * NV];
            for (k, (r, c)) in block(a, b).enumerate() {
                out[k] = pattern.find(r, c).expect("block in pattern");
            }
            out
        };
        let diag_blocks = (0..nc).map(|c| positions(c, c)).collect();
        let face_blocks = faces.iter().map(|f| (positions(f.i, f.j), positions(f.j, f.i))).collect();
        let pore_volume = grid.porosity().iter().map(|phi| phi * grid.cell_volume()).collect();
        Self { grid, fluid, wells, faces, pore_volume, pattern, diag_blocks, face_blocks }
    }

    pub fn grid(&self) -> &CartesianGrid {
        &self.grid
    }

    pub fn fluid(&self) -> &Fluid {
        &self.fluid
    }

    pub fn wells(&self) -> &[Well] {
        &self.wells
    }

    /// Scheduled per-well rates in m³/day, the default input signal.
    pub fn scheduled_rates(&self) -> Vec<f64> {
        self.wells.iter().map(|w| w.rate).collect()
    }

    /// Per-cell properties from the cell's four mole numbers.
    pub fn cell_properties<S: Scalar>(&self, cell: usize, x: &[S; NV]) -> Result<CellProps<S>, ThermoError> {
        let f = &self.fluid;
        let pore = self.pore_volume[cell];
        let n_w = x[0];
        let oil = [x[1], x[2], x[3]];
        let n_o = oil[0] + oil[1] + oil[2];
        let v_water = water_volume(n_w, f.water_molar_volume);
        // rock volume is V - V_pore
        let v_o = oil_molar_volume_from_balance(pore, 0.0, v_water, n_o)?;
        let y = oil.map(|n| n / n_o);
        let pressure = f.pr.pressure(v_o, &y)?;
        let (krw, kro) = corey_relative_permeability(v_water / pore, &f.corey);
        let rho_o = v_o.recip();
        let mu_o = f.oil_phase_viscosity(&y, rho_o)?;
        let mut molar_mass = S::cst(0.0);
        for k in 0..NC {
            molar_mass += y[k] * f.components.0[k].molar_mass;
        }
        Ok(CellProps {
            pressure,
            oil_density: molar_mass * rho_o,
            water_mobility: krw * (1.0 / (f.water_molar_volume * f.water_viscosity)),
            oil_mobility: kro * rho_o / mu_o,
            mole_fractions: y,
        })
    }

    /// Molar flux into cell `i` across the face (water, then components);
    /// cell `j` receives the negative.
    fn face_flux<S: Scalar>(&self, face: &FaceData, a: &CellProps<S>, b: &CellProps<S>) -> [S; NV] {
        let rho_w = S::cst(self.fluid.water_density);
        let dphi_w = potential_difference(a.pressure, b.pressure, rho_w, rho_w, face.z_i, face.z_j);
        let dphi_o = potential_difference(a.pressure, b.pressure, a.oil_density, b.oil_density, face.z_i, face.z_j);
        let h_w = upwinded_mobility(dphi_w.value(), a.water_mobility, b.water_mobility);
        let oil_donor = if dphi_o.value() < 0.0 { a } else { b };
        let oil = oil_donor.oil_mobility * dphi_o * face.trans;
        let mut out = [h_w * dphi_w * face.trans; NV];
        for k in 0..NC {
            out[1 + k] = oil_donor.mole_fractions[k] * oil;
        }
        out
    }

    fn cell_state<S: Copy>(x: &[S], cell: usize) -> [S; NV] {
        x[NV * cell..NV * cell + NV].try_into().unwrap()
    }

    /// Pressures of all cells, Pa.
    pub fn pressures(&self, x: &[f64]) -> Result<Vec<f64>, ThermoError> {
        (0..self.grid.cell_count())
            .map(|c| self.cell_properties(c, &Self::cell_state(x, c)).map(|p| p.pressure))
            .collect()
    }

    /// Per-well molar rates in mol/s for volumetric rates `u` (m³/day).
    pub fn well_molar_rates(&self, u: &[f64]) -> Result<Vec<f64>, EvalError> {
        let rates = if u.is_empty() { self.scheduled_rates() } else { u.to_vec() };
        if rates.len() != self.wells.len() {
            return Err(EvalError::DimensionMismatch { expected: self.wells.len(), found: rates.len() });
        }
        Ok(rates.iter().zip(&self.wells).map(|(r, w)| molar_injection_rate(*r, w.reference_molar_volume)).collect())
    }

    /// Total injection rate of water and each component, mol/s.
    pub fn total_injection(&self, u: &[f64]) -> Result<[f64; NV], EvalError> {
        let mut out = [0.0; NV];
        for (w, q) in self.wells.iter().zip(self.well_molar_rates(u)?) {
            for k in 0..NC {
                out[1 + k] += w.composition[k] * q;
            }
        }
        Ok(out)
    }

    /// Sums of each state variable over all cells.
    pub fn total_moles(x: &[f64]) -> [f64; NV] {
        let mut out = [0.0; NV];
        for cell in x.chunks(NV) {
            for (o, v) in out.iter_mut().zip(cell) {
                *o += v;
            }
        }
        out
    }

    /// Net molar flux from cell `i` into cell `j` for every face, as
    /// `(i, j, flux into i, flux into j)` pairs.
    pub fn face_fluxes(&self, x: &[f64]) -> Result<Vec<(usize, usize, [f64; NV], [f64; NV])>, ThermoError> {
        let props = self.all_properties::<f64>(x)?;
        Ok(self
            .faces
            .iter()
            .map(|f| {
                let into_i = self.face_flux(f, &props[f.i], &props[f.j]);
                let into_j = self.face_flux(&FaceData { i: f.j, j: f.i, z_i: f.z_j, z_j: f.z_i, ..*f }, &props[f.j], &props[f.i]);
                (f.i, f.j, into_i, into_j)
            })
            .collect())
    }

    fn all_properties<S: Scalar>(&self, x: &[f64]) -> Result<Vec<CellProps<S>>, ThermoError>
    where
        S: From<DualSeed>,
    {
        (0..self.grid.cell_count())
            .map(|c| {
                let xs = Self::cell_state(x, c);
                let seeded: [S; NV] = std::array::from_fn(|k| S::from(DualSeed { value: xs[k], index: k }));
                self.cell_properties(c, &seeded)
            })
            .collect()
    }

    fn check(&self, x: &[f64]) -> Result<(), EvalError> {
        let n = NV * self.grid.cell_count();
        if x.len() != n {
            return Err(EvalError::DimensionMismatch { expected: n, found: x.len() });
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite { what: "reservoir state", index });
        }
        Ok(())
    }
}

/// A state entry with its position in the cell block, used to seed either
/// plain values or dual variables.
#[derive(Debug, Clone, Copy)]
pub struct DualSeed {
    value: f64,
    index: usize,
}

impl From<DualSeed> for f64 {
    fn from(s: DualSeed) -> f64 {
        s.value
    }
}

impl From<DualSeed> for Dual<NV> {
    fn from(s: DualSeed) -> Self {
        Dual::variable(s.value, s.index)
    }
}

impl OdeSystem for ReservoirModel {
    fn dim(&self) -> usize {
        NV * self.grid.cell_count()
    }

    fn pattern(&self) -> Arc<SparsityPattern> {
        self.pattern.clone()
    }

    fn rhs(&self, x: &[f64], u: &[f64], _d: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        self.check(x)?;
        let props = self.all_properties::<f64>(x)?;
        out.fill(0.0);
        for f in &self.faces {
            let flux = self.face_flux(f, &props[f.i], &props[f.j]);
            for k in 0..NV {
                out[NV * f.i + k] += flux[k];
                out[NV * f.j + k] -= flux[k];
            }
        }
        for (w, q) in self.wells.iter().zip(self.well_molar_rates(u)?) {
            for k in 0..NC {
                out[NV * w.cell + 1 + k] += w.composition[k] * q;
            }
        }
        Ok(())
    }

    fn jacobian(&self, x: &[f64], _u: &[f64], _d: &[f64], jac: &mut SparseMatrix) -> Result<(), EvalError> {
        self.check(x)?;
        let props = self.all_properties::<Dual<NV>>(x)?;
        jac.fill_zero();
        let values = jac.values_mut();
        for (f, (ij, ji)) in self.faces.iter().zip(&self.face_blocks) {
            let a: CellProps<Dual<{ 2 * NV }>> = props[f.i].lift(0);
            let b: CellProps<Dual<{ 2 * NV }>> = props[f.j].lift(NV);
            let flux = self.face_flux(f, &a, &b);
            let (di, dj) = (&self.diag_blocks[f.i], &self.diag_blocks[f.j]);
            for r in 0..NV {
                for c in 0..NV {
                    let k = r * NV + c;
                    let (wrt_i, wrt_j) = (flux[r].d[c], flux[r].d[NV + c]);
                    values[di[k]] += wrt_i;
                    values[ij[k]] += wrt_j;
                    values[ji[k]] -= wrt_i;
                    values[dj[k]] -= wrt_j;
                }
            }
        }
        Ok(())
    }
}

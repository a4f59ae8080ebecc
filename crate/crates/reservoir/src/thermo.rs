//! Fluid properties: volume balance, Peng-Robinson pressure, Corey relative
//! permeabilities and oil viscosity. Functions are generic over [`Scalar`]
//! so the same code yields values and derivatives.

use serde::{Deserialize, Serialize};

use crate::components::{ComponentProperties, ComponentTable, NC};
use crate::dual::{Dual, Scalar};
use crate::error::ThermoError;

/// J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314462618;
pub const ATMOSPHERE: f64 = 101_325.0;
/// 60 °C.
pub const DEFAULT_TEMPERATURE: f64 = 333.15;
/// m³/mol.
pub const DEFAULT_WATER_MOLAR_VOLUME: f64 = 1.8e-5;
/// Pa s (0.3 cP).
pub const DEFAULT_WATER_VISCOSITY: f64 = 3.0e-4;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// `V^w = n_w v_w`.
pub fn water_volume<S: Scalar>(n_w: S, molar_volume: f64) -> S {
    n_w * molar_volume
}

/// `v^o = (V - V^w - V^r) / N^o`.
pub fn oil_molar_volume_from_balance<S: Scalar>(
    cell_volume: f64,
    rock_volume: f64,
    water_volume: S,
    oil_moles: S,
) -> Result<S, ThermoError> {
    if !(oil_moles.value() > 0.0) {
        return Err(ThermoError::NoOil);
    }
    let oil_volume = S::cst(cell_volume - rock_volume) - water_volume;
    if !(oil_volume.value() > 0.0) {
        return Err(ThermoError::NonPositiveOilVolume(oil_volume.value()));
    }
    Ok(oil_volume / oil_moles)
}

/// Peng-Robinson parameters of the three components at a fixed temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PengRobinson {
    temperature: f64,
    sqrt_a: [f64; NC],
    b: [f64; NC],
}

impl PengRobinson {
    pub fn new(table: &ComponentTable, temperature: f64) -> Self {
        let mut sqrt_a = [0.0; NC];
        let mut b = [0.0; NC];
        for (i, c) in table.0.iter().enumerate() {
            let (a_i, b_i) = component_parameters(c, temperature);
            sqrt_a[i] = a_i.sqrt();
            b[i] = b_i;
        }
        Self { temperature, sqrt_a, b }
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// One-fluid mixing with zero interaction parameters:
    /// `a_m = (Σ y_i √a_i)²`, `b_m = Σ y_i b_i`.
    pub fn mixture<S: Scalar>(&self, y: &[S; NC]) -> (S, S) {
        let mut sa = S::cst(0.0);
        let mut b = S::cst(0.0);
        for i in 0..NC {
            sa += y[i] * self.sqrt_a[i];
            b += y[i] * self.b[i];
        }
        (sa * sa, b)
    }

    /// `P = RT/(v - b) - a/(v² + 2bv - b²)`.
    pub fn pressure<S: Scalar>(&self, v: S, y: &[S; NC]) -> Result<S, ThermoError> {
        let (a, b) = self.mixture(y);
        eos_pressure(v, self.temperature, a, b)
    }

    /// Smallest molar volume above the co-volume at which the mixture has
    /// pressure `p`.
    pub fn liquid_molar_volume(&self, p: f64, y: &[f64; NC]) -> Result<f64, ThermoError> {
        if !(p > 0.0) {
            return Err(ThermoError::NoLiquidRoot(p));
        }
        let (a, b) = self.mixture(y);
        let rt = GAS_CONSTANT * self.temperature;
        let big_a = a * p / (rt * rt);
        let big_b = b * p / rt;
        let roots = roots::find_roots_cubic(
            1.0,
            -(1.0 - big_b),
            big_a - 3.0 * big_b * big_b - 2.0 * big_b,
            -(big_a * big_b - big_b * big_b - big_b.powi(3)),
        );
        let z = roots
            .as_ref()
            .iter()
            .copied()
            .filter(|z| *z > big_b)
            .fold(f64::INFINITY, f64::min);
        if !z.is_finite() {
            return Err(ThermoError::NoLiquidRoot(p));
        }
        // polish against the pressure form used by the model
        let mut v = z * rt / p;
        for _ in 0..3 {
            let pv = eos_pressure(Dual::<1>::variable(v, 0), self.temperature, Dual::constant(a), Dual::constant(b))?;
            if pv.d[0] == 0.0 {
                break;
            }
            let next = v - (pv.v - p) / pv.d[0];
            if !(next > b) {
                break;
            }
            v = next;
        }
        Ok(v)
    }
}

/// `(a_i(T), b_i)` with the Peng-Robinson alpha function.
pub fn component_parameters(c: &ComponentProperties, temperature: f64) -> (f64, f64) {
    let (tc, pc, w) = (c.critical_temperature, c.critical_pressure, c.acentric_factor);
    let kappa = 0.37464 + 1.54226 * w - 0.26992 * w * w;
    let alpha = (1.0 + kappa * (1.0 - (temperature / tc).sqrt())).powi(2);
    let a = 0.45724 * GAS_CONSTANT * GAS_CONSTANT * tc * tc / pc * alpha;
    let b = 0.07780 * GAS_CONSTANT * tc / pc;
    (a, b)
}

fn eos_pressure<S: Scalar>(v: S, temperature: f64, a: S, b: S) -> Result<S, ThermoError> {
    if !(v.value() > b.value()) {
        return Err(ThermoError::BelowCovolume { v: v.value(), b: b.value() });
    }
    // v² + 2bv - b² = (v + (1-√2) b)(v + (1+√2) b)
    let denom = (v + b * (1.0 - SQRT2)) * (v + b * (1.0 + SQRT2));
    Ok((v - b).recip() * (GAS_CONSTANT * temperature) - a / denom)
}

/// Peng-Robinson pressure of a mixture with mole fractions `y`.
pub fn peng_robinson_pressure<S: Scalar>(
    v: S,
    temperature: f64,
    y: &[S; NC],
    table: &ComponentTable,
) -> Result<S, ThermoError> {
    PengRobinson::new(table, temperature).pressure(v, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreyParams {
    pub residual_water: f64,
    pub residual_oil: f64,
    pub water_exponent: f64,
    pub oil_exponent: f64,
}

impl Default for CoreyParams {
    fn default() -> Self {
        Self { residual_water: 0.1, residual_oil: 0.1, water_exponent: 2.0, oil_exponent: 2.0 }
    }
}

/// `(k_r^w, k_r^o) = (S_e^{n_w}, (1 - S_e)^{n_o})` with the effective
/// saturation clamped to `[0, 1]`.
pub fn corey_relative_permeability<S: Scalar>(water_saturation: S, p: &CoreyParams) -> (S, S) {
    let mobile = 1.0 - p.residual_water - p.residual_oil;
    let se = (water_saturation - p.residual_water) / mobile;
    let se = if se.value() <= 0.0 {
        S::cst(0.0)
    } else if se.value() >= 1.0 {
        S::cst(1.0)
    } else {
        se
    };
    let one_minus = S::cst(1.0) - se;
    (pow_nonneg(se, p.water_exponent), pow_nonneg(one_minus, p.oil_exponent))
}

fn pow_nonneg<S: Scalar>(x: S, n: f64) -> S {
    if n == n.round() && n.abs() < 64.0 {
        x.powi(n as i32)
    } else if x.value() == 0.0 {
        S::cst(0.0)
    } else {
        x.powf(n)
    }
}

/// Dilute-gas viscosity of a pure component (Stiel-Thodos), Pa s.
pub fn stiel_thodos_viscosity(c: &ComponentProperties, temperature: f64) -> f64 {
    let xi = reducing_parameter(c.critical_temperature, c.molar_mass * 1e3, c.critical_pressure / ATMOSPHERE);
    let tr = temperature / c.critical_temperature;
    let mu_xi = if tr <= 1.5 { 34.0e-5 * tr.powf(0.94) } else { 17.78e-5 * (4.58 * tr - 1.67).powf(0.625) };
    mu_xi / xi * 1e-3
}

/// `ξ = T_c^{1/6} M^{-1/2} P_c^{-2/3}` with M in g/mol and P_c in atm.
fn reducing_parameter<S: Scalar>(tc: S, molar_mass_g: S, pc_atm: S) -> S {
    tc.powf(1.0 / 6.0) / (molar_mass_g.sqrt() * pc_atm.powf(2.0 / 3.0))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum OilViscosityModel {
    /// Lohrenz-Bray-Clark correlation.
    #[default]
    Lbc,
    /// A fixed value in Pa s.
    Constant { value: f64 },
}

/// Lohrenz-Bray-Clark oil viscosity with precomputed component data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lbc {
    dilute: [f64; NC],
    sqrt_m: [f64; NC],
    components: [ComponentProperties; NC],
}

pub const LBC_COEFFICIENTS: [f64; 5] = [0.1023, 0.023364, 0.058533, -0.040758, 0.0093324];

impl Lbc {
    pub fn new(table: &ComponentTable, temperature: f64) -> Self {
        let mut dilute = [0.0; NC];
        let mut sqrt_m = [0.0; NC];
        for (i, c) in table.0.iter().enumerate() {
            dilute[i] = stiel_thodos_viscosity(c, temperature);
            sqrt_m[i] = (c.molar_mass * 1e3).sqrt();
        }
        Self { dilute, sqrt_m, components: table.0 }
    }

    /// Herning-Zipperer mixture of the dilute-gas viscosities, Pa s.
    pub fn dilute_gas_viscosity<S: Scalar>(&self, y: &[S; NC]) -> S {
        let mut num = S::cst(0.0);
        let mut den = S::cst(0.0);
        for i in 0..NC {
            num += y[i] * (self.dilute[i] * self.sqrt_m[i]);
            den += y[i] * self.sqrt_m[i];
        }
        num / den
    }

    /// `ρ_r = ρ Σ y_i V_c,i` for molar density `ρ` in mol/m³.
    pub fn reduced_density<S: Scalar>(&self, y: &[S; NC], molar_density: S) -> S {
        let mut vc = S::cst(0.0);
        for i in 0..NC {
            vc += y[i] * self.components[i].critical_volume;
        }
        molar_density * vc
    }

    /// Mixture reducing parameter `ξ` from Kay's pseudo-critical properties.
    pub fn mixture_reducing_parameter<S: Scalar>(&self, y: &[S; NC]) -> S {
        let (mut tc, mut pc, mut m) = (S::cst(0.0), S::cst(0.0), S::cst(0.0));
        for i in 0..NC {
            let c = &self.components[i];
            tc += y[i] * c.critical_temperature;
            pc += y[i] * (c.critical_pressure / ATMOSPHERE);
            m += y[i] * (c.molar_mass * 1e3);
        }
        reducing_parameter(tc, m, pc)
    }

    /// Oil viscosity in Pa s.
    pub fn viscosity<S: Scalar>(&self, y: &[S; NC], molar_density: S) -> Result<S, ThermoError> {
        let rho_r = self.reduced_density(y, molar_density);
        if rho_r.value() < 0.0 {
            return Err(ThermoError::NegativeReducedDensity(rho_r.value()));
        }
        let c = LBC_COEFFICIENTS;
        let poly = (((rho_r * c[4] + c[3]) * rho_r + c[2]) * rho_r + c[1]) * rho_r + c[0];
        let xi = self.mixture_reducing_parameter(y);
        // the correlation is in centipoise
        let excess_cp = (poly.powi(4) - 1e-4) / xi;
        Ok(self.dilute_gas_viscosity(y) + excess_cp * 1e-3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ComponentTable {
        ComponentTable::default()
    }

    #[test]
    fn water_volume_examples() {
        assert_eq!(water_volume(0.0, DEFAULT_WATER_MOLAR_VOLUME), 0.0);
        assert!((water_volume(1.0 / DEFAULT_WATER_MOLAR_VOLUME, DEFAULT_WATER_MOLAR_VOLUME) - 1.0).abs() < 1e-15);
        assert!((water_volume(1000.0, DEFAULT_WATER_MOLAR_VOLUME) - 0.018).abs() < 1e-15);
    }

    #[test]
    fn volume_balance_examples() {
        let v = oil_molar_volume_from_balance(1.0, 0.8, 0.1, 10.0).unwrap();
        assert!((v - 0.01).abs() < 1e-15);
        assert!(oil_molar_volume_from_balance(1.0, 0.8, 0.2, 10.0).is_err());
        assert_eq!(oil_molar_volume_from_balance(1.0, 0.5, 0.1, 0.0), Err(ThermoError::NoOil));
    }

    #[test]
    fn ideal_gas_limit() {
        let p = eos_pressure(0.024, DEFAULT_TEMPERATURE, 0.0, 0.0).unwrap();
        // 8.314462618 * 333.15 / 0.024 = 115415.13...
        assert!((p / 1.15408e5 - 1.0).abs() < 1e-4, "{p}");
        assert!((p - GAS_CONSTANT * DEFAULT_TEMPERATURE / 0.024).abs() < 1e-9);
    }

    #[test]
    fn below_covolume_is_rejected() {
        let pr = PengRobinson::new(&table(), DEFAULT_TEMPERATURE);
        let y = [0.0, 1.0, 0.0];
        let (_, b) = pr.mixture(&y);
        assert!(pr.pressure(b, &y).is_err());
        assert!(pr.pressure(0.5 * b, &y).is_err());
    }

    #[test]
    fn liquid_root_reproduces_pressure() {
        let pr = PengRobinson::new(&table(), DEFAULT_TEMPERATURE);
        for y in [[0.2, 0.8, 0.0], [0.001, 0.001, 0.998], [0.0, 1.0, 0.0], [0.3, 0.4, 0.3]] {
            for p in [5e6, 1e7, 3e7] {
                let v = pr.liquid_molar_volume(p, &y).unwrap();
                let back = pr.pressure(v, &y).unwrap();
                assert!((back - p).abs() < 1e-9 * p, "{y:?} {p}: {back}");
            }
        }
    }

    #[test]
    fn corey_examples() {
        let p = CoreyParams::default();
        assert_eq!(corey_relative_permeability(0.1, &p), (0.0, 1.0));
        assert_eq!(corey_relative_permeability(0.9, &p), (1.0, 0.0));
        assert_eq!(corey_relative_permeability(0.0, &p), (0.0, 1.0));
        assert_eq!(corey_relative_permeability(1.0, &p), (1.0, 0.0));
        let zero = CoreyParams { residual_water: 0.0, residual_oil: 0.0, ..p };
        assert_eq!(corey_relative_permeability(0.5, &zero), (0.25, 0.25));
    }

    #[test]
    fn lbc_rejects_negative_density() {
        let lbc = Lbc::new(&table(), DEFAULT_TEMPERATURE);
        assert!(lbc.viscosity(&[0.2, 0.8, 0.0], -1.0).is_err());
    }
}

use std::path::Path;

use podnewton_reservoir::dual::{Dual, Scalar};
use podnewton_reservoir::thermo::{
    oil_molar_volume_from_balance, water_volume, OilViscosityModel, PengRobinson, ATMOSPHERE, DEFAULT_TEMPERATURE,
    DEFAULT_WATER_MOLAR_VOLUME, LBC_COEFFICIENTS,
};
use podnewton_reservoir::{ComponentTable, Fluid, Scenario, NV};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const R: f64 = 8.314462618;
const T: f64 = 333.15;

/// Single-component Peng-Robinson written out from the textbook form.
fn co2_pressure(v: f64) -> f64 {
    let (tc, pc, w) = (304.12, 7.374e6, 0.225);
    let kappa = 0.37464 + 1.54226 * w - 0.26992 * w * w;
    let alpha = (1.0 + kappa * (1.0 - (T / tc).sqrt())).powi(2);
    let a = 0.45724 * R * R * tc * tc / pc * alpha;
    let b = 0.07780 * R * tc / pc;
    R * T / (v - b) - a / (v * (v + b) + b * (v - b))
}

#[test]
fn component_table_matches_reference_constants() {
    let t = ComponentTable::default();
    let expected = [(190.56, 4.599e6, 0.011, 0.016043), (617.7, 2.110e6, 0.490, 0.142285), (304.12, 7.374e6, 0.225, 0.04401)];
    for (c, (tc, pc, w, m)) in t.0.iter().zip(expected) {
        assert_eq!((c.critical_temperature, c.critical_pressure, c.acentric_factor, c.molar_mass), (tc, pc, w, m));
    }
    assert_eq!(ComponentTable::from_json(&t.to_json()).unwrap(), t);
}

#[test]
fn pure_co2_matches_standalone_oracle() {
    let pr = PengRobinson::new(&ComponentTable::default(), T);
    let y = [0.0, 0.0, 1.0];
    let b = 0.07780 * R * 304.12 / 7.374e6;
    for f in [1.1, 1.5, 2.0, 3.0, 10.0, 100.0] {
        let v = f * b;
        let p = pr.pressure(v, &y).unwrap();
        let oracle = co2_pressure(v);
        assert!((p - oracle).abs() <= 1e-12 * oracle.abs().max(1e5), "{f}: {p} vs {oracle}");
    }
}

#[test]
fn pressure_decreases_along_the_liquid_branch() {
    let pr = PengRobinson::new(&ComponentTable::default(), T);
    for y in [[0.2, 0.8, 0.0], [0.1, 0.6, 0.3], [0.001, 0.001, 0.998]] {
        let (_, b) = pr.mixture(&y);
        let v_max = pr.liquid_molar_volume(5e6, &y).unwrap();
        let n = 50;
        let vs: Vec<f64> = (0..=n).map(|i| 1.05 * b + (v_max - 1.05 * b) * i as f64 / n as f64).collect();
        for w in vs.windows(2) {
            let (p0, p1) = (pr.pressure(w[0], &y).unwrap(), pr.pressure(w[1], &y).unwrap());
            assert!(p1 < p0, "{y:?} at v = {}", w[1]);
        }
        for &v in &vs {
            let d = pr.pressure(Dual::<1>::variable(v, 0), &y.map(Dual::constant)).unwrap();
            assert!(d.d[0] < 0.0);
        }
    }
}

#[test]
fn constant_viscosity_mode_ignores_state() {
    let mut fluid = Fluid::default();
    fluid.oil_viscosity = OilViscosityModel::Constant { value: 5e-4 };
    for (y, rho) in [([0.2, 0.8, 0.0], 5000.0), ([0.0, 0.0, 1.0], 100.0), ([0.3, 0.3, 0.4], 0.0)] {
        assert_eq!(fluid.oil_phase_viscosity(&y, rho).unwrap(), 5e-4);
    }
}

/// Stiel-Thodos dilute-gas viscosity in cP, with M in g/mol and Pc in atm.
fn dilute_cp(tc: f64, pc_pa: f64, m_kg: f64) -> f64 {
    let xi = tc.powf(1.0 / 6.0) / ((m_kg * 1e3).sqrt() * (pc_pa / ATMOSPHERE).powf(2.0 / 3.0));
    let tr = T / tc;
    let mu_xi = if tr <= 1.5 { 34.0e-5 * tr.powf(0.94) } else { 17.78e-5 * (4.58 * tr - 1.67).powf(0.625) };
    mu_xi / xi
}

#[test]
fn lbc_at_vanishing_density_is_the_dilute_gas_mixture() {
    let table = ComponentTable::default();
    let fluid = Fluid::default();
    for y in [[0.2, 0.8, 0.0], [0.5, 0.2, 0.3], [0.0, 0.0, 1.0]] {
        let (mut num, mut den) = (0.0, 0.0);
        let (mut tc, mut pc, mut m) = (0.0, 0.0, 0.0);
        for (yi, c) in y.iter().zip(&table.0) {
            let sm = (c.molar_mass * 1e3).sqrt();
            num += yi * dilute_cp(c.critical_temperature, c.critical_pressure, c.molar_mass) * sm;
            den += yi * sm;
            tc += yi * c.critical_temperature;
            pc += yi * c.critical_pressure / ATMOSPHERE;
            m += yi * c.molar_mass * 1e3;
        }
        let dilute = num / den * 1e-3;
        // the correlation polynomial is 0.1023 at zero density, not exactly 1e-4^(1/4)
        let xi = tc.powf(1.0 / 6.0) / (m.sqrt() * pc.powf(2.0 / 3.0));
        let offset = (LBC_COEFFICIENTS[0].powi(4) - 1e-4) / xi * 1e-3;
        let mu = fluid.lbc().viscosity(&y, 0.0).unwrap();
        assert!((fluid.lbc().dilute_gas_viscosity(&y) - dilute).abs() <= 1e-12 * dilute);
        assert!((mu - dilute - offset).abs() <= 1e-12 * mu, "{y:?}: {mu} vs {}", dilute + offset);
    }
}

#[test]
fn lbc_increases_with_density() {
    let lbc = *Fluid::default().lbc();
    for y in [[0.2, 0.8, 0.0], [0.1, 0.4, 0.5]] {
        let mut prev = lbc.viscosity(&y, 0.0).unwrap();
        for i in 1..=60 {
            let rho = 100.0 * i as f64;
            let mu = lbc.viscosity(&y, rho).unwrap();
            assert!(mu > prev, "{y:?} at {rho}");
            prev = mu;
        }
    }
}

#[test]
fn oil_viscosity_is_liquid_like_at_initial_conditions() {
    let fluid = Fluid::default();
    let y = [0.2, 0.8, 0.0];
    let v = fluid.peng_robinson().liquid_molar_volume(1e7, &y).unwrap();
    let mu = fluid.lbc().viscosity(&y, 1.0 / v).unwrap();
    // between 0.1 and 10 cP
    assert!(mu > 1e-4 && mu < 1e-2, "{mu}");
}

#[test]
fn volume_balance_identity_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let cell: f64 = rng.random_range(0.5..5.0);
        let rock = cell * rng.random_range(0.5..0.9);
        let pore = cell - rock;
        let n_w = rng.random_range(0.0..0.8) * pore / DEFAULT_WATER_MOLAR_VOLUME;
        let n_o: f64 = rng.random_range(1.0..1e4);
        let vw = water_volume(n_w, DEFAULT_WATER_MOLAR_VOLUME);
        let v_o = oil_molar_volume_from_balance(cell, rock, vw, n_o).unwrap();
        let total = vw + n_o * v_o + rock;
        assert!((total - cell).abs() <= 4.0 * f64::EPSILON * cell, "{total} vs {cell}");
    }
}

#[test]
fn cell_property_derivatives_match_central_differences() {
    let b = Scenario::with_size(2, 2).build(Path::new(".")).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let cell = rng.random_range(0..4);
        let mut x: [f64; NV] = b.x0[NV * cell..NV * cell + NV].try_into().unwrap();
        for v in x.iter_mut() {
            *v *= 1.0 + 2e-3 * rng.random_range(-1.0..1.0);
        }
        let moved = x[2] * rng.random_range(0.05..0.3);
        x[2] -= moved;
        x[3] += moved;
        let seeded: [Dual<NV>; NV] = std::array::from_fn(|k| Dual::variable(x[k], k));
        let d = b.model.cell_properties(cell, &seeded).unwrap();
        let values = |x: &[f64; NV]| {
            let p = b.model.cell_properties(cell, x).unwrap();
            [p.pressure, p.oil_density, p.water_mobility, p.oil_mobility, p.mole_fractions[0], p.mole_fractions[2]]
        };
        let duals = [d.pressure, d.oil_density, d.water_mobility, d.oil_mobility, d.mole_fractions[0], d.mole_fractions[2]];
        for k in 0..NV {
            let h = 1e-6 * x[k];
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            let (fp, fm) = (values(&xp), values(&xm));
            for q in 0..duals.len() {
                let fd = (fp[q] - fm[q]) / (2.0 * h);
                let an = duals[q].d[k];
                let scale = an.abs().max(fd.abs()).max(1e-300);
                assert!((fd - an).abs() <= 1e-6 * scale, "quantity {q}, variable {k}: {an} vs {fd}");
            }
        }
        assert_eq!(d.pressure.value(), values(&x)[0]);
    }
}

#[test]
fn initial_state_is_at_the_configured_pressure() {
    let s = Scenario::with_size(3, 2);
    let b = s.build(Path::new(".")).unwrap();
    for p in b.model.pressures(&b.x0).unwrap() {
        assert!((p - s.initial.pressure).abs() <= 1e-6 * s.initial.pressure);
    }
    assert_eq!(DEFAULT_TEMPERATURE, T);
}

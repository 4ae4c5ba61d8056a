//! Per-cell layer selection and the state conversions between layers.

use crate::error::{Result, SolverError};
use crate::euler::{ConservedState, GAMMA};
use crate::indicators::{IndicatorSet, Thresholds};
use crate::mesh::{Layer, VelocityGrid};
use crate::moments::{conservative_maxwellian, moments_of};

/// One regime update for a cell currently in layer `r`.
pub fn regime_update(r: Layer, ind: &IndicatorSet, th: &Thresholds) -> Result<Layer> {
    let near_one = ind.eigenvalues().iter().all(|l| (l - 1.0).abs() <= th.eta0);
    Ok(match r {
        Layer::Boltzmann => {
            if ind.lambda_burnett.abs() > th.eta1 {
                Layer::Boltzmann
            } else {
                Layer::Esbgk
            }
        }
        Layer::Esbgk => {
            let xi = ind
                .xi_l1
                .ok_or_else(|| SolverError::Contract("ES-BGK cell updated without its L1 distance".into()))?;
            if ind.lambda_burnett.abs() > th.eta1 {
                Layer::Boltzmann
            } else if near_one && xi <= th.delta0 {
                Layer::Euler
            } else {
                Layer::Esbgk
            }
        }
        Layer::Euler => {
            if near_one {
                Layer::Euler
            } else {
                Layer::Esbgk
            }
        }
    })
}

/// Stored per-cell solution.
#[derive(Clone, Debug, PartialEq)]
pub enum CellData {
    Hydro(ConservedState),
    Kinetic(Vec<f64>),
}

/// Converts the stored solution of a cell moving from `old` to `new`.
pub fn convert_on_transition(old: Layer, new: Layer, data: CellData, vg: &VelocityGrid) -> Result<CellData> {
    match (old, new, data) {
        (o, n, d) if o == n => Ok(d),
        (Layer::Euler, Layer::Esbgk, CellData::Hydro(u)) => {
            Ok(CellData::Kinetic(conservative_maxwellian(&u.to_moments(GAMMA)?, vg)?))
        }
        (Layer::Esbgk, Layer::Euler, CellData::Kinetic(f)) => {
            Ok(CellData::Hydro(ConservedState::from_moments(&moments_of(&f, vg)?)))
        }
        (Layer::Esbgk, Layer::Boltzmann, d @ CellData::Kinetic(_)) | (Layer::Boltzmann, Layer::Esbgk, d @ CellData::Kinetic(_)) => Ok(d),
        (o, n, d) => Err(SolverError::Contract(format!(
            "invalid transition {o:?} -> {n:?} with {} data",
            if matches!(d, CellData::Hydro(_)) { "hydrodynamic" } else { "kinetic" }
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{maxwellian, Moments};

    fn th() -> Thresholds {
        Thresholds::new(1e-3, 2.8e-5, 1e-4).unwrap()
    }

    fn ind(burnett_high: bool, eig_far: bool, xi_high: bool) -> IndicatorSet {
        let t = th();
        let eig = if eig_far { 1.0 + 2.0 * t.eta0 } else { 1.0 - 0.5 * t.eta0 };
        IndicatorSet {
            lambda_a: 1.0,
            lambda_b: eig,
            lambda_c: 1.0,
            lambda_burnett: if burnett_high { 2.0 * t.eta1 } else { 0.5 * t.eta1 },
            xi_l1: Some(if xi_high { 2.0 * t.delta0 } else { 0.5 * t.delta0 }),
        }
    }

    #[test]
    fn examples() {
        assert_eq!(regime_update(Layer::Boltzmann, &ind(true, false, false), &th()).unwrap(), Layer::Boltzmann);
        assert_eq!(regime_update(Layer::Esbgk, &ind(false, false, false), &th()).unwrap(), Layer::Euler);
        assert_eq!(regime_update(Layer::Euler, &ind(false, true, false), &th()).unwrap(), Layer::Esbgk);
    }

    #[test]
    fn truth_table() {
        for r in [Layer::Euler, Layer::Esbgk, Layer::Boltzmann] {
            for bh in [false, true] {
                for ef in [false, true] {
                    for xh in [false, true] {
                        let got = regime_update(r, &ind(bh, ef, xh), &th()).unwrap();
                        let want = match r {
                            Layer::Boltzmann => if bh { Layer::Boltzmann } else { Layer::Esbgk },
                            Layer::Esbgk => if bh { Layer::Boltzmann } else if !ef && !xh { Layer::Euler } else { Layer::Esbgk },
                            Layer::Euler => if ef { Layer::Esbgk } else { Layer::Euler },
                        };
                        assert_eq!(got, want, "{r:?} {bh} {ef} {xh}");
                    }
                }
            }
        }
    }

    #[test]
    fn esbgk_requires_l1_distance() {
        let mut i = ind(false, false, false);
        i.xi_l1 = None;
        assert!(matches!(regime_update(Layer::Esbgk, &i, &th()), Err(SolverError::Contract(_))));
    }

    #[test]
    fn conversions() {
        let vg = VelocityGrid::new(16, 8.0).unwrap();
        let m = Moments::new(1.0, [0.125, 0.0, 0.0], 1.0);
        let u = ConservedState::from_moments(&m);
        let CellData::Kinetic(f) = convert_on_transition(Layer::Euler, Layer::Esbgk, CellData::Hydro(u), &vg).unwrap() else {
            panic!()
        };
        let pointwise = maxwellian(&m, &vg).unwrap();
        for (a, b) in f.iter().zip(&pointwise) {
            assert!((a - b).abs() < 1e-3 * 0.0635);
        }
        let back = moments_of(&f, &vg).unwrap();
        assert!((back.rho - 1.0).abs() < 1e-12 && (back.u[0] - 0.125).abs() < 1e-12 && (back.temp - 1.0).abs() < 1e-12);

        let CellData::Hydro(u2) = convert_on_transition(Layer::Esbgk, Layer::Euler, CellData::Kinetic(pointwise.clone()), &vg).unwrap() else {
            panic!()
        };
        for k in 0..4 {
            assert!((u2.0[k] - u.0[k]).abs() < 1e-3);
        }
        let same = convert_on_transition(Layer::Esbgk, Layer::Boltzmann, CellData::Kinetic(f.clone()), &vg).unwrap();
        assert_eq!(same, CellData::Kinetic(f.clone()));
        let same = convert_on_transition(Layer::Boltzmann, Layer::Esbgk, CellData::Kinetic(f.clone()), &vg).unwrap();
        assert_eq!(same, CellData::Kinetic(f.clone()));
    }

    #[test]
    fn non_adjacent_transitions_are_rejected() {
        let vg = VelocityGrid::new(8, 8.0).unwrap();
        let u = ConservedState::from_primitive(1.0, 0.0, 0.0, 1.0, GAMMA);
        assert!(matches!(
            convert_on_transition(Layer::Euler, Layer::Boltzmann, CellData::Hydro(u), &vg),
            Err(SolverError::Contract(_))
        ));
        let f = maxwellian(&Moments::new(1.0, [0.0; 3], 1.0), &vg).unwrap();
        assert!(convert_on_transition(Layer::Boltzmann, Layer::Euler, CellData::Kinetic(f.clone()), &vg).is_err());
        assert!(convert_on_transition(Layer::Euler, Layer::Esbgk, CellData::Kinetic(f), &vg).is_err());
    }
}

//! Pressure of weights on the Schottky pair and its cube: level tables,
//! the pressure root, the derivative identity and strict convexity.

use conelab::counting::exponent_from_classes;
use conelab::pressure::{
    extrapolated_gibbs_mean, pressure_derivative_check_from, pressure_root_from, pressure_second_differences,
    PressureTable,
};
use conelab::repgen::{make_schottky, perturb, sym_power_embed};
use conelab::sample::PeriodData;
use conelab::spectra::plane;
use conelab::Functional;

fn main() -> conelab::Result<()> {
    let s2 = make_schottky(&[2.0, 2.0], &[0.0, std::f64::consts::FRAC_PI_2])?;
    let data = PeriodData::from_rep(&s2, 12)?;
    let phi = Functional::new(vec![1.0, -1.0]);

    let root = pressure_root_from(&data, &phi, 1e-9)?;
    let count = exponent_from_classes(&data, &phi, 12)?;
    println!("S2 root {:.5} (fallback {}), direct count {:.5}", root.root, root.extrapolation_flag, count.exponent);
    print!("{}", PressureTable::build(&data, &phi, root.root)?.to_csv());

    let p3 = perturb(&sym_power_embed(&s2, 3)?, 0.05, 1)?;
    let data = PeriodData::from_rep(&p3, 10)?;
    let phi0 = Functional::spread(3);
    for phi1 in [Functional::new(vec![0.3, -0.7, 0.4]), Functional::new(vec![1.0, 0.0, 0.0])] {
        let (analytic, numeric) = pressure_derivative_check_from(&data, &phi0, &phi1, 10, 1e-4)?;
        println!("dP along {:?}: analytic {analytic:.8}, central difference {numeric:.8}", phi1.coeffs());
    }
    let mean = extrapolated_gibbs_mean(&data, &phi0)?;
    let across = plane::unit_functional(plane::angle(mean.coords()) + std::f64::consts::FRAC_PI_2);
    println!("second differences across the Gibbs mean: {:?}", pressure_second_differences(&data, &phi0, &across, 0.05)?);
    Ok(())
}

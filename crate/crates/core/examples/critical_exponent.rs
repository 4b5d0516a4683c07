//! Critical exponent of the root functional on the Schottky pair by direct
//! counting, compared with the free-group entropy hook, plus the orbit-count
//! ratio along the first root.

use conelab::counting::{exponent_from_classes, orbit_count_ratio_from};
use conelab::repgen::make_schottky;
use conelab::sample::PeriodData;
use conelab::Functional;

fn main() -> conelab::Result<()> {
    let n = 12;
    let phi = Functional::new(vec![1.0, -1.0]);

    let hook = exponent_from_classes(&PeriodData::word_length(2, n), &phi, n)?;
    println!("word-length hook: exponent {:.4} (log 3 = {:.4})", hook.exponent, 3f64.ln());

    let s2 = make_schottky(&[2.0, 2.0], &[0.0, std::f64::consts::FRAC_PI_2])?;
    let data = PeriodData::from_rep(&s2, n)?;
    let fit = exponent_from_classes(&data, &phi, n)?;
    println!("S2: exponent {:.4} +- {:.4}", fit.exponent, fit.std_error);

    let ratio = orbit_count_ratio_from(&data, 1, n)?;
    let (first, last) = ratio.third_deviations();
    println!("orbit-count ratio: mean |ratio - 1| {first:.3} on the first third, {last:.3} on the last");
    for r in ratio.rows.iter().step_by(ratio.rows.len().div_ceil(6)) {
        println!("  t = {:7.3}  ratio {:.3}", r.t, r.ratio);
    }
    Ok(())
}

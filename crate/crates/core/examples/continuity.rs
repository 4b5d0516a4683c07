//! How cone, growth indicator and growth form move as the Fuchsian cube is
//! perturbed away from the principal ray.

use conelab::growth::{continuity_scan, continuity_trend};
use conelab::repgen::{make_schottky, sym_power_embed};
use conelab::CartanVector;

fn main() -> conelab::Result<()> {
    let s2 = make_schottky(&[2.0, 2.0], &[0.0, std::f64::consts::FRAC_PI_2])?;
    let f3 = sym_power_embed(&s2, 3)?;
    let r = 0.5f64.sqrt();
    let probe = CartanVector::new(vec![r, 0.0, -r])?;

    let tables = (1..=2)
        .map(|seed| continuity_scan(&f3, &[0.0, 1e-4, 1e-3, 1e-2, 5e-2], seed, std::slice::from_ref(&probe), 16, 9))
        .collect::<conelab::Result<Vec<_>>>()?;
    for t in &tables {
        println!("seed {}\n{}", t.seed, t.to_csv());
    }
    println!("spearman(epsilon, aggregate delta) = {:?}", continuity_trend(&tables));
    Ok(())
}

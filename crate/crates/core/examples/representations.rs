//! Build the Schottky pair, its symmetric cube, a perturbation and the dual,
//! then save and reload one of them.

use conelab::repgen::{dual_rep, make_schottky, perturb, sym_power_embed};
use conelab::spectra::{gap_ratio, is_proximal};
use conelab::words::{evaluate, parse_word};
use conelab::Representation;

fn main() -> conelab::Result<()> {
    let s2 = make_schottky(&[2.0, 2.0], &[0.0, std::f64::consts::FRAC_PI_2])?;
    let f3 = sym_power_embed(&s2, 3)?;
    let p3 = perturb(&f3, 0.05, 1)?;
    let dual = dual_rep(&p3)?;

    for (name, rep) in [("S2", &s2), ("F3", &f3), ("P3", &p3), ("P3 dual", &dual)] {
        let w = parse_word("a b a^-1 b^-1", rep.labels())?;
        let m = evaluate(rep, &w)?;
        println!(
            "{name:8} d={} rank={} commutator proximal={} gap ratio {:.3e}",
            rep.dim(),
            rep.rank(),
            is_proximal(&m, 1e-9)?,
            gap_ratio(&m, 1)?
        );
    }

    let dir = std::env::temp_dir().join("conelab-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("p3.rep");
    p3.save(&path)?;
    let back = Representation::load(&path)?;
    println!("saved {} and reloaded it unchanged: {}", path.display(), back.to_text() == p3.to_text());
    Ok(())
}

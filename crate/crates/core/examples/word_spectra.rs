//! Cartan and Jordan projections of short words, and the convergence
//! a(w^n)/n -> lambda(w) for one class.

use conelab::repgen::{make_schottky, perturb, sym_power_embed};
use conelab::sample::word_spectra;
use conelab::spectra::{jordan, power_consistency};
use conelab::words::{canonical_conj, cyclic_word_count, enumerate_conj_classes, evaluate, parse_word, reduce};

fn main() -> conelab::Result<()> {
    let s2 = make_schottky(&[2.0, 2.0], &[0.0, std::f64::consts::FRAC_PI_2])?;
    let p3 = perturb(&sym_power_embed(&s2, 3)?, 0.05, 1)?;

    for n in 1..=6 {
        println!(
            "length {n}: {} conjugacy classes, {} cyclically reduced words",
            enumerate_conj_classes(2, n).len(),
            cyclic_word_count(2, n)
        );
    }

    let spectra = word_spectra(&p3, 3)?;
    println!("\n{} reduced words up to length 3; the first five:", spectra.len());
    for s in spectra.iter().take(5) {
        let w = reduce(s.word.iter().copied());
        println!("  {:8} cartan {:?}  jordan {:?}", w.display(p3.labels()).to_string(), s.cartan.coords(), s.jordan.coords());
    }

    let w = parse_word("a b^-1 a^-1 b", p3.labels())?;
    let class = canonical_conj(&w)?;
    let m = evaluate(&p3, &w)?;
    println!("\nclass {} (period {}), jordan {:?}", class.word().display(p3.labels()), class.period(), jordan(&m)?.coords());
    for n in [1, 4, 16, 64, 256] {
        println!("  n = {n:3}: |a(w^n)/n - lambda(w)| = {:.3e}", power_consistency(&m, n)?);
    }
    Ok(())
}

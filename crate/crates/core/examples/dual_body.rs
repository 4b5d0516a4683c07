//! Trace the boundary of the dual body of the perturbed cube, recover the
//! growth indicator by duality and compare with direct counting.

use conelab::counting::growth_indicator_from;
use conelab::growth::{boundary_curve_from, concavity_audit, growth_form, psi_from_duality, refinement_error};
use conelab::repgen::{make_schottky, perturb, sym_power_embed};
use conelab::sample::{ElementData, PeriodData};
use conelab::spectra::plane;

fn main() -> conelab::Result<()> {
    let n = 10;
    let s2 = make_schottky(&[2.0, 2.0], &[0.0, std::f64::consts::FRAC_PI_2])?;
    let p3 = perturb(&sym_power_embed(&s2, 3)?, 0.05, 1)?;
    let data = PeriodData::from_rep(&p3, n)?;

    let body = boundary_curve_from(&data, 16)?;
    let coarse = boundary_curve_from(&data, 8)?;
    println!("{} boundary points, refinement error {:.2e}", body.boundary().len(), refinement_error(&coarse, &body)?);
    for p in body.boundary().iter().step_by(3) {
        println!(
            "  angle {:+.3}  s* {:.4}  gibbs angle {:+.4}  entropy {:.4}",
            p.angle(),
            p.s_star,
            plane::angle(p.gibbs_dir.coords()),
            p.entropy
        );
    }

    let form = growth_form(&body)?;
    println!("growth form: h = {:.4}, tau = {:?}", form.h, form.tau.coords());

    let audit = concavity_audit(&body, 16)?;
    println!("concavity: passed {}, strict on {:.1}% of pairs", audit.passed, 100.0 * audit.strict_fraction());

    let elements = ElementData::from_rep(&p3, n)?;
    for theta in [-0.02, 0.0, 0.02, 0.2] {
        let v = plane::unit_vector(theta);
        let direct = growth_indicator_from(&elements, &v, 0.15, n)?;
        println!("psi({theta:+.2}): duality {:?}, direct {:?}", psi_from_duality(&body, &v), direct.value);
    }
    Ok(())
}

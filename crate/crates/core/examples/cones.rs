//! Limit cone (Jordan projections) and asymptotic cone (Cartan projections)
//! of the perturbed symmetric cube, with their wall margins.

use conelab::counting::{asymptotic_cone_from, limit_cone_from, wall_margins, HullShape};
use conelab::repgen::{make_schottky, perturb, sym_power_embed};
use conelab::sample::{ElementData, PeriodData};

fn main() -> conelab::Result<()> {
    let n = 10;
    let s2 = make_schottky(&[2.0, 2.0], &[0.0, std::f64::consts::FRAC_PI_2])?;
    let f3 = sym_power_embed(&s2, 3)?;
    let p3 = perturb(&f3, 0.05, 1)?;

    let fuchsian = limit_cone_from(&PeriodData::from_rep(&f3, n)?, n)?;
    println!("F3 limit cone degenerate: {}, ray {:?}", fuchsian.is_degenerate(), fuchsian.extreme_directions()[0].coords());

    let classes = PeriodData::from_rep(&p3, n)?;
    let elements = ElementData::from_rep(&p3, n)?;
    let limit = limit_cone_from(&classes, n)?;
    for floor in [1.0, 5.0, 10.0] {
        let asym = asymptotic_cone_from(&elements, n, floor)?;
        println!(
            "P3 floor {floor:4}: asymptotic width {:.4}, hausdorff to limit cone {:.4}",
            asym.width(),
            limit.hausdorff(&asym)?
        );
    }
    if let HullShape::Arc { min, max } = limit.shape() {
        println!("P3 limit cone angles [{min:.4}, {max:.4}], area {:.4}", limit.area());
    }
    for m in [8, 10] {
        println!("wall margins up to length {m}: {:?}", wall_margins(&classes, m));
    }
    Ok(())
}

use std::sync::OnceLock;

use conelab::counting::{limit_cone_from, Psi};
use conelab::growth::{boundary_curve_from, psi_from_duality, DualBody};
use conelab::pressure::pressure_root_from;
use conelab::repgen::{dual_rep, make_schottky, perturb, sym_power_embed};
use conelab::sample::PeriodData;
use conelab::spectra::{cartan, jordan, plane, Functional};
use conelab::words::{canonical_conj, evaluate, reduce, Letter};
use conelab::Representation;
use proptest::prelude::*;

fn p3() -> &'static Representation {
    static REP: OnceLock<Representation> = OnceLock::new();
    REP.get_or_init(|| {
        let s2 = make_schottky(&[2.0, 2.0], &[0.0, std::f64::consts::FRAC_PI_2]).unwrap();
        perturb(&sym_power_embed(&s2, 3).unwrap(), 0.05, 1).unwrap()
    })
}

fn p3_body() -> &'static DualBody {
    static BODY: OnceLock<DualBody> = OnceLock::new();
    BODY.get_or_init(|| boundary_curve_from(&PeriodData::from_rep(p3(), 8).unwrap(), 16).unwrap())
}

fn word() -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0usize..4).prop_map(Letter::from_index), 1..7)
}

#[test]
fn dual_limit_cone_is_the_opposition() {
    let data = PeriodData::from_rep(p3(), 8).unwrap();
    let dual = PeriodData::from_rep(&dual_rep(p3()).unwrap(), 8).unwrap();
    let a = limit_cone_from(&data, 8).unwrap();
    let b = limit_cone_from(&dual, 8).unwrap();
    let flipped: Vec<_> = b.extreme_directions().iter().map(|v| v.opposition()).collect();
    for v in a.extreme_directions() {
        assert!(flipped.iter().any(|w| v.angle_to(w) < 1e-9), "{v:?} not in {flipped:?}");
    }
}

#[test]
fn rep_files_round_trip_through_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p3.rep");
    p3().save(&path).unwrap();
    let back = Representation::load(&path).unwrap();
    let phi = Functional::new(vec![1.0, 0.0, -1.0]);
    let r1 = pressure_root_from(&PeriodData::from_rep(p3(), 6).unwrap(), &phi, 1e-9).unwrap();
    let r2 = pressure_root_from(&PeriodData::from_rep(&back, 6).unwrap(), &phi, 1e-9).unwrap();
    assert_eq!(r1.root.to_bits(), r2.root.to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jordan_is_dominated_by_cartan(letters in word()) {
        let w = reduce(letters);
        prop_assume!(!w.is_empty());
        let m = evaluate(p3(), &w).unwrap();
        let (a, l) = (cartan(&m).unwrap(), jordan(&m).unwrap());
        prop_assert!(l.coords()[0] <= a.coords()[0] + 1e-9);
        prop_assert!(l.coords()[2] >= a.coords()[2] - 1e-9);
    }

    #[test]
    fn jordan_is_a_class_invariant(letters in word(), shift in 0usize..10) {
        let w = reduce(letters);
        prop_assume!(w.is_cyclically_reduced() && !w.is_empty());
        let rotated = w.rotate(shift % w.len());
        prop_assert_eq!(canonical_conj(&w).unwrap(), canonical_conj(&rotated).unwrap());
        let a = jordan(&evaluate(p3(), &w).unwrap()).unwrap();
        let b = jordan(&evaluate(p3(), &rotated).unwrap()).unwrap();
        for (x, y) in a.coords().iter().zip(b.coords()) {
            prop_assert!((x - y).abs() < 1e-7, "{} vs {}", x, y);
        }
    }

    #[test]
    fn root_scales_inversely(c in 0.2f64..5.0) {
        let data = PeriodData::from_rep(p3(), 6).unwrap();
        let phi = Functional::new(vec![1.0, 0.0, -1.0]);
        let r1 = pressure_root_from(&data, &phi, 1e-10).unwrap().root;
        let rc = pressure_root_from(&data, &phi.scaled(c), 1e-10).unwrap().root;
        prop_assert!((rc * c - r1).abs() < 1e-7 * (1.0 + r1));
    }

    #[test]
    fn psi_is_homogeneous(theta in -0.02f64..0.02, c in 0.1f64..10.0) {
        let v = plane::unit_vector(theta);
        let (a, b) = (psi_from_duality(p3_body(), &v), psi_from_duality(p3_body(), &v.scaled(c)));
        match (a, b) {
            (Psi::Value(x), Psi::Value(y)) | (Psi::EdgeFlagged(x), Psi::EdgeFlagged(y)) => {
                prop_assert!((c * x - y).abs() < 1e-9 * (1.0 + y.abs()));
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

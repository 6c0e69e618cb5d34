//! Base geometry, lifted structure and connection invariants over every
//! family constructor.

mod common;

use nalgebra::DMatrix;
use norden::classify::point_diagnostics;
use norden::connection::{analyze_point, analyze_point_fd, FD_STEP};
use norden::families;
use norden::lift::{check_family, frame_at, CheckKind, Coeff};
use norden::scalarfn::Domain;
use norden::spaceform::{curvature_from, SpaceForm};
use proptest::prelude::*;

use common::{all_families, points};

const CURVATURES: [f64; 3] = [-1.0, 0.0, 1.0];

fn base_points(sf: &SpaceForm, count: usize) -> Vec<Vec<f64>> {
    let cfg = norden::sampling::SamplingConfig {
        num_points: count,
        seed: 7,
        ..Default::default()
    };
    norden::sampling::sample_points(sf, &Domain::UNBOUNDED, &cfg)
        .unwrap()
        .into_iter()
        .map(|p| p.x)
        .collect()
}

#[test]
fn space_form_metricity_bianchi_and_curvature() {
    for n in [2, 3] {
        for c in CURVATURES {
            let sf = SpaceForm::new(n, c).unwrap();
            for x in base_points(&sf, 50) {
                let base = sf.metric_at(&x).unwrap();
                assert!(base.metricity_residual() < 1e-10, "n={n} c={c}");
                let r = curvature_from(&base);
                assert!(r.bianchi_residual() < 1e-9, "n={n} c={c}");
                assert!(r.space_form_residual(c, &base) < 1e-7, "n={n} c={c}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Christoffel symbols against central differences of the metric.
    #[test]
    fn base_christoffels_match_metric_differences(
        c in prop_oneof![Just(-1.0), Just(0.0), Just(1.0), -2.0f64..2.0],
        x in prop::collection::vec(-0.4f64..0.4, 3),
    ) {
        let sf = SpaceForm::new(3, c).unwrap();
        prop_assume!(sf.in_chart(&x));
        let base = sf.metric_at(&x).unwrap();
        let h = 1e-5;
        let dg = |k: usize, i: usize, j: usize| {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[k] += h;
            xm[k] -= h;
            (sf.metric_at(&xp).unwrap().g(i, j) - sf.metric_at(&xm).unwrap().g(i, j)) / (2.0 * h)
        };
        for a in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let fd: f64 = (0..3)
                        .map(|l| 0.5 * base.g_inv(a, l) * (dg(i, l, j) + dg(j, i, l) - dg(l, i, j)))
                        .sum();
                    prop_assert!((fd - base.gamma(a, i, j)).abs() < 1e-7);
                }
            }
        }
    }
}

#[test]
fn lifted_structure_is_norden_at_machine_precision() {
    for n in [2, 3] {
        for c in CURVATURES {
            let sf = SpaceForm::new(n, c).unwrap();
            for fam in all_families(&sf) {
                for p in points(&sf, &fam, 100, 3) {
                    let fr = frame_at(&fam, &sf, &p).unwrap();
                    let scale = 1.0 + fr.g.amax();
                    assert!(fr.complex_residual() < 1e-10, "{} n={n} c={c}", fam.label());
                    assert!(
                        fr.norden_residual() / scale < 1e-10,
                        "{} n={n} c={c}",
                        fam.label()
                    );
                    assert!(fr.inverse_residual() < 1e-9, "{}", fam.label());
                    // H blocks reassemble G⁻¹
                    let mut h = DMatrix::zeros(2 * n, 2 * n);
                    h.view_mut((0, 0), (n, n)).copy_from(&fr.h1());
                    h.view_mut((n, n), (n, n)).copy_from(&fr.h2());
                    h.view_mut((0, n), (n, n)).copy_from(&fr.h3());
                    h.view_mut((n, 0), (n, n)).copy_from(&fr.h3().transpose());
                    assert!((h - &fr.h).amax() < 1e-12 * (1.0 + fr.h.amax()));
                }
            }
        }
    }
}

#[test]
fn constructors_pass_check_family() {
    for c in CURVATURES {
        let sf = SpaceForm::new(2, c).unwrap();
        for fam in all_families(&sf) {
            let hi = fam.domain().t_max.min(1.0) * 0.98;
            let ts: Vec<f64> = (0..=50).map(|i| hi * i as f64 / 50.0).collect();
            let rep = check_family(&fam, &ts).unwrap();
            assert!(
                rep.pass,
                "{} c={c}: {:?}",
                fam.label(),
                rep.failures().collect::<Vec<_>>()
            );
        }
    }
}

#[test]
fn raw_single_coefficient_offsets_are_rejected() {
    let fam = families::generic_norden(1.0).unwrap();
    let ts: Vec<f64> = (0..=20).map(|i| 0.9 * i as f64 / 20.0).collect();
    for coeff in Coeff::ALL {
        let rep = check_family(&fam.offset_raw(coeff, 0.1), &ts).unwrap();
        let worst = rep
            .checks
            .iter()
            .filter(|k| k.kind == CheckKind::Identity)
            .map(|k| k.value)
            .fold(0.0, f64::max);
        assert!(!rep.pass && worst > 1e-3, "{coeff}: {worst}");
    }
}

#[test]
fn connection_metricity_and_f_symmetries() {
    for n in [2, 3] {
        for c in CURVATURES {
            let sf = SpaceForm::new(n, c).unwrap();
            for fam in all_families(&sf) {
                for p in points(&sf, &fam, 20, 11) {
                    let pa = analyze_point(&fam, &sf, &p).unwrap();
                    assert!(pa.connection.metricity_residual() < 1e-8, "{}", fam.label());
                    let d = point_diagnostics(&pa);
                    assert!(d.f_swap < 1e-6, "{} n={n} c={c}: {}", fam.label(), d.f_swap);
                    assert!(
                        d.f_j_invariance < 1e-6,
                        "{} n={n} c={c}: {}",
                        fam.label(),
                        d.f_j_invariance
                    );
                    assert!(
                        d.phi_shape < 1e-6,
                        "{} n={n} c={c}: {}",
                        fam.label(),
                        d.phi_shape
                    );
                }
            }
        }
    }
}

#[test]
fn analytic_f_matches_finite_differences() {
    for c in [0.0, 1.0] {
        let sf = SpaceForm::new(2, c).unwrap();
        for fam in all_families(&sf) {
            for p in points(&sf, &fam, 10, 5) {
                let a = analyze_point(&fam, &sf, &p).unwrap();
                let b = analyze_point_fd(&fam, &sf, &p, FD_STEP).unwrap();
                let scale = 1.0 + a.f.max_abs();
                let dev =
                    a.f.components
                        .iter()
                        .zip(&b.f.components)
                        .fold(0.0f64, |w, (x, y)| w.max((x - y).abs()));
                assert!(dev / scale < 1e-4, "{} c={c}: {dev}", fam.label());
            }
        }
    }
}

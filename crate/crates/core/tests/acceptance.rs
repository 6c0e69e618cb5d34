//! Acceptance suite: runs every criterion at its stated tolerance and
//! prints one line per criterion. Exits nonzero if any criterion fails.

mod common;

use norden::classify::{classify, point_diagnostics, point_residual, Class, Tolerances, Verdict};
use norden::cli::{cmd_classify, cmd_verify, FamilySpec, RunConfig};
use norden::connection::{analyze_point, analyze_point_fd, PointAnalysis, FD_STEP};
use norden::families::{self, check_necessary, Necessary};
use norden::lift::{frame_at, Coeff, CoefficientFamily};
use norden::sampling::SamplingConfig;
use norden::spaceform::SpaceForm;

use common::{all_families, conformal, expr, general_ak, integrable, points};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn analyses(fam: &CoefficientFamily, sf: &SpaceForm, count: usize) -> Vec<PointAnalysis> {
    points(sf, fam, count, 1)
        .iter()
        .map(|p| analyze_point(fam, sf, p).unwrap())
        .collect()
}

fn worst(pas: &[PointAnalysis], f: impl Fn(&PointAnalysis) -> f64) -> f64 {
    pas.iter().map(f).fold(0.0, f64::max)
}

fn class_residual(fam: &CoefficientFamily, sf: &SpaceForm, class: Class, count: usize) -> f64 {
    worst(&analyses(fam, sf, count), |pa| point_residual(class, pa))
}

fn algebraic_structure() -> Outcome {
    let mut jj: f64 = 0.0;
    let mut nd: f64 = 0.0;
    for n in [2, 3] {
        let flat = SpaceForm::new(n, 0.0).unwrap();
        let sf = SpaceForm::new(n, 1.0).unwrap();
        let cases = [
            (families::trivial_flat(), &flat),
            (families::diagonal_ak(1.0, 1.0, 1.0, 1.0).unwrap(), &sf),
            (general_ak(1.0, 1e-3), &sf),
            (conformal(1.0), &sf),
            (families::generic_norden(1.0).unwrap(), &sf),
        ];
        for (fam, base) in &cases {
            for p in points(base, fam, 100, 1) {
                let fr = frame_at(fam, base, &p).unwrap();
                jj = jj.max(fr.complex_residual());
                nd = nd.max(fr.norden_residual() / (1.0 + fr.g.amax()));
            }
        }
    }
    outcome(
        jj < 1e-10 && nd < 1e-10,
        format!(
            "max |J²+I| = {jj:.2e}, max |JᵀGJ+G| = {nd:.2e} (5 families, 100 points, n = 2, 3)"
        ),
    )
}

fn f_symmetries() -> Outcome {
    let (mut swap, mut jinv): (f64, f64) = (0.0, 0.0);
    let mut count = 0;
    for n in [2, 3] {
        for c in [-1.0, 0.0, 1.0] {
            let sf = SpaceForm::new(n, c).unwrap();
            for fam in all_families(&sf) {
                count += 1;
                for pa in analyses(&fam, &sf, 20) {
                    let d = point_diagnostics(&pa);
                    swap = swap.max(d.f_swap);
                    jinv = jinv.max(d.f_j_invariance);
                }
            }
        }
    }
    outcome(
        swap < 1e-6 && jinv < 1e-6,
        format!(
            "F(X,Y,Z)=F(X,Z,Y): {swap:.2e}, F(X,Y,Z)=F(X,JY,JZ): {jinv:.2e} over {count} families"
        ),
    )
}

fn diagonal_anti_kahler() -> Outcome {
    let mut ak: f64 = 0.0;
    let mut witness = f64::INFINITY;
    for c in [1.0, -1.0] {
        for n in [2, 3] {
            let sf = SpaceForm::new(n, c).unwrap();
            let fam = families::diagonal_ak(1.0, 1.0, c, 1.0).unwrap();
            ak = ak.max(class_residual(&fam, &sf, Class::AntiKahler, 50));
            let bad = fam.perturbed(Coeff::D1, 0.05).unwrap();
            witness = witness.min(class_residual(&bad, &sf, Class::AntiKahler, 50));
        }
    }
    outcome(
        ak < 1e-6 && witness > 1e-3,
        format!("AK residual {ak:.2e}; with d1 + 0.05 at least {witness:.2e}"),
    )
}

fn general_anti_kahler() -> Outcome {
    let sf = SpaceForm::new(2, 1.0).unwrap();
    let r1 = class_residual(&general_ak(1.0, 1e-3), &sf, Class::AntiKahler, 50);
    let r2 = class_residual(&general_ak(1.0, 5e-4), &sf, Class::AntiKahler, 50);
    let halving = r1 < 1e-8 || r2 <= r1 / 4.0;
    outcome(
        r1 < 1e-5 && halving,
        format!(
            "AK residual {r1:.2e} at step 1e-3, {r2:.2e} at 5e-4 (floor 1e-8 {})",
            if r1 < 1e-8 { "reached" } else { "not reached" }
        ),
    )
}

fn integrability_equivalence() -> Outcome {
    let sf = SpaceForm::new(2, 1.0).unwrap();
    let fam = integrable(1.0);
    let pas = analyses(&fam, &sf, 50);
    let nij = worst(&pas, |pa| point_diagnostics(pa).nijenhuis);
    let w12 = worst(&pas, |pa| point_residual(Class::W1W2, pa));
    let bad = fam.perturbed(Coeff::B1, 0.1).unwrap();
    let pas = analyses(&bad, &sf, 50);
    let nij_b = worst(&pas, |pa| point_diagnostics(pa).nijenhuis);
    let w12_b = worst(&pas, |pa| point_residual(Class::W1W2, pa));
    outcome(
        nij < 1e-6 && w12 < 1e-5 && nij_b > 1e-2 && w12_b > 1e-2,
        format!("Nijenhuis {nij:.2e}, ω₁⊕ω₂ {w12:.2e}; with b1 + 0.1: {nij_b:.2e}, {w12_b:.2e}"),
    )
}

fn conformal_strictness() -> Outcome {
    let sf = SpaceForm::new(2, 1.0).unwrap();
    let pas = analyses(&conformal(1.0), &sf, 50);
    let w1 = worst(&pas, |pa| point_residual(Class::W1, pa));
    let ak = worst(&pas, |pa| point_residual(Class::AntiKahler, pa));
    let phi = worst(&pas, |pa| point_residual(Class::W2W3, pa));
    outcome(
        w1 < 1e-5 && ak > 1e-3 && phi > 1e-3,
        format!("ω₁ {w1:.2e}, AK {ak:.2e}, Φ {phi:.2e}"),
    )
}

fn lattice_consistency() -> Outcome {
    let sf = SpaceForm::new(2, 1.0).unwrap();
    let fam = general_ak(1.0, 1e-3);
    let rep = classify(
        &fam,
        &sf,
        &points(&sf, &fam, 50, 1),
        Tolerances::for_family(&fam),
    )
    .unwrap();
    let all_members = rep.classes.iter().all(|e| e.verdict == Verdict::Member);
    let mut tested = 0;
    let mut problems = Vec::new();
    for c in [-1.0, 0.0, 1.0] {
        let sf = SpaceForm::new(2, c).unwrap();
        let mut fams = all_families(&sf);
        fams.push(fams[1].perturbed(Coeff::B1, 0.1).unwrap());
        for f in fams {
            tested += 1;
            match classify(&f, &sf, &points(&sf, &f, 30, 1), Tolerances::for_family(&f)) {
                Ok(r) if r.lattice_violations().is_empty() => {}
                Ok(_) => problems.push(format!("{} (unflagged)", f.label())),
                Err(e) => problems.push(format!("{}: {e}", f.label())),
            }
        }
    }
    outcome(
        all_members && problems.is_empty(),
        format!(
            "AK family in all eight classes: {all_members}; monotone for {}/{tested} families{}",
            tested - problems.len(),
            if problems.is_empty() {
                String::new()
            } else {
                format!(" ({})", problems.join("; "))
            }
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut worst_gamma: f64 = 0.0;
    let mut worst_dj: f64 = 0.0;
    for c in [0.0, 1.0] {
        let sf = SpaceForm::new(2, c).unwrap();
        for fam in [families::generic_norden(1.0).unwrap(), general_ak(c, 1e-3)] {
            for p in points(&sf, &fam, 20, 8) {
                let a = analyze_point(&fam, &sf, &p).unwrap();
                let b = analyze_point_fd(&fam, &sf, &p, FD_STEP).unwrap();
                let scale = 1.0
                    + a.connection
                        .christoffel
                        .iter()
                        .fold(0.0f64, |m, x| m.max(x.abs()));
                let dev = a
                    .connection
                    .christoffel
                    .iter()
                    .zip(&b.connection.christoffel)
                    .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                worst_gamma = worst_gamma.max(dev / scale);
                let (_, dj) = a.coords.derivative_deviation(&b.coords);
                let jscale = 1.0 + a.coords.dj.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                worst_dj = worst_dj.max(dj / jscale);
            }
        }
    }
    outcome(
        worst_gamma < 1e-4 && worst_dj < 1e-4,
        format!("Christoffel {worst_gamma:.2e}, ∂J {worst_dj:.2e} vs central differences h = 1e-5"),
    )
}

fn phi_shape_and_ricci_flat() -> Outcome {
    let mut shape: f64 = 0.0;
    for n in [2, 3] {
        for c in [-1.0, 0.0, 1.0] {
            let sf = SpaceForm::new(n, c).unwrap();
            for fam in all_families(&sf) {
                shape = shape.max(worst(&analyses(&fam, &sf, 20), |pa| {
                    point_diagnostics(pa).phi_shape
                }));
            }
        }
    }
    let flat = SpaceForm::new(2, 0.0).unwrap();
    let mut rates = Vec::new();
    for fam in all_families(&flat) {
        let phi = class_residual(&fam, &flat, Class::W2W3, 30);
        if phi >= 1e-6 {
            continue;
        }
        let hi = 0.98 * fam.domain().t_max.min(0.5);
        let ts: Vec<f64> = (0..=20).map(|i| hi * i as f64 / 20.0).collect();
        let r = check_necessary(Necessary::RicciFlat, &fam, 0.0, &ts).unwrap();
        rates.push((fam.label().to_string(), r.max_residual));
    }
    let worst_rate = rates.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    let listed: Vec<String> = rates.iter().map(|(l, r)| format!("{l} {r:.2e}")).collect();
    outcome(
        shape < 1e-6 && worst_rate < 1e-5,
        format!(
            "Φδ off g₀ {shape:.2e}; flat-base a1' rate on Φ = 0 families: {}",
            listed.join(", ")
        ),
    )
}

fn internal_consistency() -> Outcome {
    let mut table: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for (c, t_max) in [(1.0, 1.0), (-1.0, 0.45)] {
        let fam = families::ak_family(
            &expr(&format!("sqrt(1 + 2*({c})*t)")),
            &expr("0"),
            1.0,
            0.0,
            c,
            t_max,
            1e-3,
        )
        .unwrap();
        let diag = families::diagonal_ak(1.0, 1.0, c, t_max).unwrap();
        for i in 0..=100 {
            let t = 0.98 * t_max * i as f64 / 100.0;
            let (a, b) = (fam.values(t).unwrap(), diag.values(t).unwrap());
            for (k, x) in a.iter() {
                table = table.max((x - b.get(k)).abs());
            }
            d1 = d1
                .max((a.d1 - c * a.c2).abs())
                .max((a.d1 + c * a.c1 / (a.a1 * a.a1)).abs());
        }
    }
    outcome(
        table < 1e-8 && d1 < 1e-8,
        format!("table gap {table:.2e}, d1 = c c2 = -c c1/a1² gap {d1:.2e}"),
    )
}

fn determinism() -> Outcome {
    let cfg = RunConfig {
        family: FamilySpec::GeneralAk {
            a1: "1+t".into(),
            a3: "t/2".into(),
            c1_0: 2.0,
            c3_0: 0.1,
            t_max: 0.5,
            step: 1e-3,
        },
        sampling: SamplingConfig {
            num_points: 30,
            seed: 42,
            ..Default::default()
        },
        ..Default::default()
    };
    let a = cmd_classify(&cfg).unwrap().canonical_json();
    let b = cmd_classify(&cfg).unwrap().canonical_json();
    let v1 = cmd_verify("6.1", &cfg).unwrap().canonical_json();
    let v2 = cmd_verify("6.1", &cfg).unwrap().canonical_json();
    outcome(
        a == b && v1 == v2,
        format!(
            "classify and verify reports identical across runs ({} and {} bytes)",
            a.len(),
            v1.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("algebraic structure", algebraic_structure),
        ("F symmetries", f_symmetries),
        ("diagonal anti-Kähler", diagonal_anti_kahler),
        ("general anti-Kähler", general_anti_kahler),
        ("integrability equivalence", integrability_equivalence),
        ("conformal strictness", conformal_strictness),
        ("class lattice", lattice_consistency),
        ("analytic vs finite differences", oracle_equivalence),
        ("Φ shape and flat-base a1' rate", phi_shape_and_ricci_flat),
        ("integrated vs closed form", internal_consistency),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{}] {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

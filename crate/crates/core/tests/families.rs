use morse_spectrum::analytic::bessel_zero;
use morse_spectrum::morse::{detect_events, spectrum_at, trace_curves, uniform_grid, verify, EventKind, Resolution};
use morse_spectrum::surfaces::{domain_at, family_metadata, DomainFamily, FamilyKind};
use std::f64::consts::PI;

#[test]
fn domains_are_nested() {
    for kind in FamilyKind::ALL {
        let fam = DomainFamily::builtin(kind);
        let grid = uniform_grid(fam.t_min, fam.t_max, 25).unwrap();
        for w in grid.windows(2) {
            let a = domain_at(&fam, w[0]).unwrap();
            let b = domain_at(&fam, w[1]).unwrap();
            assert!(a.is_contained_in(&b), "{kind} at {} not inside {}", w[0], w[1]);
            assert!(a.volume < b.volume);
        }
        let meta = family_metadata(&fam, &grid).unwrap();
        assert_eq!(meta.set_continuous, kind != FamilyKind::FlatGap);
    }
}

#[test]
fn out_of_range_parameters() {
    let fam = DomainFamily::builtin(FamilyKind::SphereCap);
    assert!(domain_at(&fam, 0.01).is_err());
    assert!(fam.clone().with_range(0.5, PI).is_err());
    let gap = DomainFamily::builtin(FamilyKind::FlatGap);
    assert!(gap.with_range(0.5, 1.2).is_err());
}

#[test]
fn hemisphere_is_extremal() {
    let fam = DomainFamily::builtin(FamilyKind::SphereCap);
    let s = spectrum_at(&fam, PI / 2.0, 3, Resolution { n_per_unit: 600, m_max: 4 }).unwrap();
    assert!(s.dirichlet[0].abs() < 1e-3, "{}", s.dirichlet[0]);
    // the next eigenvalue is the double m = 1 mode
    assert!((s.dirichlet[1] - s.dirichlet[2]).abs() < 1e-12);
}

#[test]
fn cylinder_disk_follows_bessel_zeros() {
    let fam = DomainFamily::builtin(FamilyKind::CylinderDisk);
    let res = Resolution { n_per_unit: 400, m_max: 4 };
    let j01 = bessel_zero(0, 1).unwrap();
    let j11 = bessel_zero(1, 1).unwrap();
    for t in [1.5, 3.0, 4.5] {
        let s = spectrum_at(&fam, t, 3, res).unwrap();
        let e1 = (j01 / t).powi(2) - 1.0;
        let e2 = (j11 / t).powi(2) - 1.0;
        assert!((s.dirichlet[0] - e1).abs() < 1e-3 * (1.0 + e1.abs()));
        assert!((s.dirichlet[1] - e2).abs() < 1e-3 * (1.0 + e2.abs()));
        assert_eq!(s.dirichlet[1], s.dirichlet[2]);
    }
}

#[test]
fn gap_family_jumps_at_the_merge() {
    let fam = DomainFamily::builtin(FamilyKind::FlatGap);
    let res = Resolution { n_per_unit: 600, m_max: 0 };
    let before = spectrum_at(&fam, 0.999, 2, res).unwrap().dirichlet[0];
    let after = spectrum_at(&fam, 1.0, 2, res).unwrap().dirichlet[0];
    assert!((0.99..=1.01).contains(&before), "{before}");
    assert!((after - 0.25).abs() < 0.02, "{after}");

    let fam = fam.with_range(0.9, 1.0).unwrap();
    let grid = uniform_grid(0.9, 1.0, 21).unwrap();
    let curve = trace_curves(&fam, &grid, 2, Resolution { n_per_unit: 200, m_max: 0 }).unwrap();
    let scan = detect_events(&curve, false).unwrap();
    let report = verify(&curve, &scan).unwrap();
    let c = report.check("continuity").unwrap();
    assert!(!c.ok && c.expected);
    assert!(report.all_acceptable());
}

#[test]
fn cylinder_curves_pass_through_pi() {
    let fam = DomainFamily::builtin(FamilyKind::CylinderDisk);
    let grid = uniform_grid(2.0, 4.5, 26).unwrap();
    let curve = trace_curves(&fam, &grid, 4, Resolution { n_per_unit: 150, m_max: 4 }).unwrap();
    let scan = detect_events(&curve, true).unwrap();
    let report = verify(&curve, &scan).unwrap();
    for c in &report.checks {
        assert!(c.ok, "{}: {}", c.name, c.detail);
    }
    let first = scan
        .events
        .iter()
        .find(|e| e.kind == EventKind::DirichletZero)
        .unwrap();
    assert!((first.t_star - 2.404825557695773).abs() < 1e-2);
}

#[test]
fn sweeps_do_not_depend_on_thread_count() {
    let fam = DomainFamily::builtin(FamilyKind::CircleInterval);
    let grid = uniform_grid(0.5, 8.0, 16).unwrap();
    let res = Resolution { n_per_unit: 100, m_max: 0 };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let curve = trace_curves(&fam, &grid, 3, res).unwrap();
                let scan = detect_events(&curve, true).unwrap();
                (curve, scan)
            })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn circle_events_sit_at_multiples_of_pi() {
    let fam = DomainFamily::builtin(FamilyKind::CircleInterval);
    let grid = uniform_grid(0.5, 10.0, 40).unwrap();
    let curve = trace_curves(&fam, &grid, 4, Resolution { n_per_unit: 300, m_max: 0 }).unwrap();
    let scan = detect_events(&curve, true).unwrap();
    let dir: Vec<f64> = scan
        .events
        .iter()
        .filter(|e| e.kind == EventKind::DirichletZero)
        .map(|e| e.t_star)
        .collect();
    assert_eq!(dir.len(), 3);
    for (k, t) in dir.iter().enumerate() {
        assert!((t - (k + 1) as f64 * PI).abs() < 1e-4, "{t}");
    }
}

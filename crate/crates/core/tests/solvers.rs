use morse_spectrum::analytic::{circle_dirichlet_lambda, circle_twisted_lambda};
use morse_spectrum::discretize::{assemble_interval, assemble_radial, points_for_length, AssembledOperator};
use morse_spectrum::eig::{
    rayleigh, solve_dirichlet, solve_dirichlet_full, solve_twisted, solve_twisted_full, solve_twisted_projected,
};
use morse_spectrum::surfaces::{domain_at, DomainFamily, FamilyKind};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn interval_op(kind: FamilyKind, t: f64, n: usize) -> AssembledOperator {
    let fam = DomainFamily::builtin(kind);
    assemble_interval(&domain_at(&fam, t).unwrap(), fam.surface.b_norm_sq, n).unwrap()
}

fn radial_op(kind: FamilyKind, t: f64, m: u32, n: usize) -> AssembledOperator {
    let fam = DomainFamily::builtin(kind);
    assemble_radial(&domain_at(&fam, t).unwrap(), &fam.surface, m, n).unwrap()
}

/// Twisted spectrum by an independent dense route: nalgebra eigensolver on
/// the restriction of M^{-1/2} A M^{-1/2} to an orthonormal complement of
/// M^{-1/2} w obtained from a QR factorization.
fn nalgebra_twisted(op: &AssembledOperator) -> Vec<f64> {
    let n = op.dim();
    let s: Vec<f64> = op.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let a = DMatrix::from_fn(n, n, |i, j| op.stiffness_entry(i, j) * s[i] * s[j]);
    let w = DVector::from_iterator(n, op.mean.iter().zip(&s).map(|(w, si)| w * si));
    let mut cols = DMatrix::<f64>::identity(n, n);
    cols.set_column(0, &w);
    let q = cols.qr().q();
    let basis = q.columns(1, n - 1).into_owned();
    let projected = basis.transpose() * &a * &basis;
    let projected = 0.5 * (&projected + projected.transpose());
    let mut vals: Vec<f64> = SymmetricEigen::new(projected).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

#[test]
fn circle_dirichlet_matches_closed_form() {
    for t in [2.0, std::f64::consts::PI, 7.0, 15.0] {
        let op = interval_op(FamilyKind::CircleInterval, t, points_for_length(t, 600));
        let vals = solve_dirichlet(&op, 6).unwrap().values;
        for (k, v) in vals.iter().enumerate() {
            let exact = circle_dirichlet_lambda(k + 1, t);
            let err = (v - exact).abs() / exact.abs().max(1e-300);
            assert!(err < 1e-3 || (v - exact).abs() < 1e-6, "t = {t}, k = {}: {v} vs {exact}", k + 1);
        }
    }
}

#[test]
fn circle_twisted_matches_closed_form() {
    for t in [3.0, 7.0, 15.0] {
        let op = interval_op(FamilyKind::CircleInterval, t, points_for_length(t, 600));
        let vals = solve_twisted(&op, 6).unwrap().values;
        for (k, v) in vals.iter().enumerate() {
            let exact = circle_twisted_lambda(k + 1, t).unwrap();
            assert!((v - exact).abs() <= 1e-3 * exact.abs(), "t = {t}, k = {}: {v} vs {exact}", k + 1);
        }
    }
}

#[test]
fn second_order_convergence() {
    let t = 5.0;
    let exact = circle_dirichlet_lambda(1, t);
    let err = |n: usize| {
        let op = interval_op(FamilyKind::CircleInterval, t, n);
        (solve_dirichlet(&op, 1).unwrap().values[0] - exact).abs()
    };
    let (e1, e2) = (err(99), err(199));
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() < 0.1, "observed order {order}");
}

#[test]
fn dense_routes_agree_with_secular_solver() {
    let cases = [
        interval_op(FamilyKind::CircleInterval, 7.3, 120),
        interval_op(FamilyKind::CircleInterval, 2.0 * std::f64::consts::PI, 199),
        interval_op(FamilyKind::FlatGap, 0.6, 80),
        radial_op(FamilyKind::CylinderDisk, 2.0, 0, 150),
        radial_op(FamilyKind::SphereCap, 1.4, 0, 180),
    ];
    for op in &cases {
        let reference = nalgebra_twisted(op);
        let projected = solve_twisted_projected(op).unwrap();
        let k = 8;
        let secular = solve_twisted_full(op, k).unwrap().values;
        let counted = solve_twisted(op, k).unwrap().values;
        for j in 0..k {
            let tol = 1e-8 * (1.0 + reference[j].abs());
            assert!((projected[j] - reference[j]).abs() <= tol);
            assert!((secular[j] - reference[j]).abs() <= tol, "{} vs {}", secular[j], reference[j]);
            assert!((counted[j] - reference[j]).abs() <= tol);
        }
    }
}

#[test]
fn min_max_over_random_mean_zero_vectors() {
    let op = interval_op(FamilyKind::CircleInterval, 9.0, 300);
    let lam1 = solve_twisted(&op, 1).unwrap().values[0];
    let wsq: f64 = op.mean.iter().map(|w| w * w).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let mut f: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: f64 = op.mean.iter().zip(&f).map(|(w, x)| w * x).sum::<f64>() / wsq;
        f.iter_mut().zip(&op.mean).for_each(|(x, w)| *x -= c * w);
        let q = rayleigh(&op, &f).unwrap();
        assert!(q >= lam1 - 1e-9 * (1.0 + lam1.abs()), "{q} < {lam1}");
    }
    // the minimizer attains it
    let v = solve_twisted_full(&op, 1).unwrap().vectors.unwrap().remove(0);
    assert!((rayleigh(&op, &v).unwrap() - lam1).abs() < 1e-9 * (1.0 + lam1.abs()));
}

#[test]
fn nonzero_modes_have_no_constraint() {
    let op = radial_op(FamilyKind::CylinderDisk, 3.0, 2, 200);
    let d = solve_dirichlet(&op, 4).unwrap().values;
    let t = solve_twisted(&op, 4).unwrap();
    assert!(t.constrained);
    assert_eq!(d, t.values);
}

#[test]
fn full_and_bisection_dirichlet_agree() {
    let op = interval_op(FamilyKind::FlatGap, 0.8, 150);
    let a = solve_dirichlet(&op, 6).unwrap().values;
    let b = solve_dirichlet_full(&op, 6).unwrap().values;
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
    }
    // two equal components: every eigenvalue is double
    assert!((a[0] - a[1]).abs() < 1e-10 * a[0].abs());
}

#[test]
fn oversized_requests_are_rejected() {
    let op = interval_op(FamilyKind::CircleInterval, 2.0, 5);
    assert!(solve_dirichlet(&op, 6).is_err());
    assert!(solve_twisted(&op, 5).is_err());
    assert!(solve_twisted(&op, 4).is_ok());
}

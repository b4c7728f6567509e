use mps_core::disc_oracle::{disc_spectrum, DiscBc};
use mps_core::geometry::DomainSpec;
use mps_core::scanner::{
    estimate_slope, find_minima, refine_minimum, render_mode, scan, solve, BasisConfig, Problem,
    ProblemSpec,
};
use mps_core::specfun::{bessel_j_zero, bessel_jprime_zero};
use mps_core::tension::BoundaryCondition;
use mps_core::Exec;

fn disc(bc: BoundaryCondition, order: usize) -> Problem {
    let mut spec = ProblemSpec::new(
        DomainSpec::unit_disc(),
        BasisConfig::FourierBessel { max_order: order },
        bc,
    );
    spec.n_boundary = 256;
    spec.prepare(Exec::default()).unwrap()
}

fn nearest(energies: &[f64], target: f64) -> f64 {
    *energies
        .iter()
        .min_by(|a, b| (*a - target).abs().total_cmp(&(*b - target).abs()))
        .unwrap()
}

#[test]
fn dirichlet_ground_state_minimum_on_nearest_grid_point() {
    let p = disc(BoundaryCondition::Dirichlet, 20);
    let s = scan(&p, 5.0, 6.0, 50).unwrap();
    assert_eq!(s.energies.len(), 50);
    let b = find_minima(&s);
    assert_eq!(b.len(), 1);
    let oracle = bessel_j_zero(0, 1).unwrap().powi(2);
    assert_eq!(b[0].mid, nearest(&s.energies, oracle));
}

#[test]
fn neumann_filtered_minimum_near_first_derivative_zero() {
    let p = disc(BoundaryCondition::NeumannFiltered, 20);
    let s = scan(&p, 3.0, 4.0, 40).unwrap();
    let b = find_minima(&s);
    assert_eq!(b.len(), 1);
    let oracle = bessel_jprime_zero(1, 1).unwrap().powi(2);
    assert!((b[0].mid - 3.39).abs() < 0.03);
    assert_eq!(b[0].mid, nearest(&s.energies, oracle));
}

#[test]
fn spectral_gap_has_no_minimum() {
    // j_{0,1}² ≈ 5.78 and j_{1,1}² ≈ 14.68.
    let p = disc(BoundaryCondition::Dirichlet, 20);
    let s = scan(&p, 7.0, 13.5, 40).unwrap();
    assert!(find_minima(&s).is_empty());
}

#[test]
fn one_minimum_per_distinct_dirichlet_eigenvalue() {
    let p = disc(BoundaryCondition::Dirichlet, 20);
    let s = scan(&p, 2.0, 30.0, 200).unwrap();
    let expected = disc_spectrum(DiscBc::Dirichlet, 30f64.sqrt())
        .unwrap()
        .into_iter()
        .filter(|m| m.eigenvalue >= 2.0)
        .count();
    assert_eq!(find_minima(&s).len(), expected);
}

#[test]
fn refinement_reaches_oracle_accuracy() {
    let p = disc(BoundaryCondition::Dirichlet, 20);
    let oracle = bessel_j_zero(0, 1).unwrap().powi(2);
    let b = find_minima(&scan(&p, 5.0, 6.0, 20).unwrap())[0];
    let r = refine_minimum(&p, &b).unwrap();
    assert!(r.converged);
    assert!((r.e_star - oracle).abs() / oracle <= 1e-9, "{}", r.e_star);

    let p = disc(BoundaryCondition::NeumannFiltered, 20);
    let oracle = bessel_jprime_zero(1, 1).unwrap().powi(2);
    let b = find_minima(&scan(&p, 3.0, 4.0, 20).unwrap())[0];
    let r = refine_minimum(&p, &b).unwrap();
    assert!((r.e_star - oracle).abs() / oracle <= 1e-8, "{}", r.e_star);
}

#[test]
fn dirichlet_slope_matches_trace_norm() {
    let p = disc(BoundaryCondition::Dirichlet, 20);
    for (n, l) in [(0, 1), (1, 1), (2, 1)] {
        let e = bessel_j_zero(n, l).unwrap().powi(2);
        let b = find_minima(&scan(&p, e - 0.4, e + 0.4, 9).unwrap())[0];
        let r = refine_minimum(&p, &b).unwrap();
        let s = estimate_slope(&p, r.e_star, r.t_star).unwrap();
        let expected = 1.0 / (2.0 * e).sqrt();
        assert!(
            (s.slope - expected).abs() / expected < 0.02,
            "n={n}: {} vs {expected}",
            s.slope
        );
        assert!(
            (s.left.abs() - s.right.abs()).abs() <= 0.1 * s.slope,
            "{s:?}"
        );
    }
}

#[test]
fn solve_is_deterministic_and_certifies() {
    let p = disc(BoundaryCondition::Dirichlet, 20);
    let a = solve(&p, 14.0, 15.5, 12).unwrap();
    let b = solve(&disc(BoundaryCondition::Dirichlet, 20), 14.0, 15.5, 12).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.records.len(), 1);
    let cert = a.records[0].certificate.as_ref().unwrap();
    let oracle = bessel_j_zero(1, 1).unwrap().powi(2);
    assert!(cert.contains_inflated(oracle, 3.0));
    // cos θ and sin θ share the eigenvalue.
    assert_eq!(a.records[0].multiplicity, 2);

    let seq = {
        let mut spec = p.spec.clone();
        spec.n_higher = 5;
        spec.prepare(Exec::Sequential).unwrap()
    };
    assert_eq!(solve(&seq, 14.0, 15.5, 12).unwrap().records, a.records);
}

#[test]
fn rendered_ground_mode_is_symmetric_and_normalized() {
    let p = disc(BoundaryCondition::Dirichlet, 20);
    let b = find_minima(&scan(&p, 5.0, 6.0, 20).unwrap())[0];
    let r = refine_minimum(&p, &b).unwrap();
    let n = 200;
    let g = render_mode(&p, r.e_star, &r.result.coeffs, n).unwrap();
    assert_eq!(g.density.len(), n * n);

    let mut worst: f64 = 0.0;
    let peak = g.density.iter().cloned().fold(0.0, f64::max);
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            if !g.inside[k] {
                continue;
            }
            for (ii, jj) in [(j, i), (n - 1 - i, j), (i, n - 1 - j)] {
                let m = jj * n + ii;
                if g.inside[m] {
                    worst = worst.max((g.density[k] - g.density[m]).abs() / peak);
                }
            }
        }
    }
    assert!(worst <= 1e-10, "{worst}");

    let masked = g.inside.iter().filter(|x| !**x).count() as f64 / (n * n) as f64;
    let expected = 1.0 - std::f64::consts::PI / 4.0;
    assert!((masked - expected).abs() <= 0.02, "{masked}");

    let mass: f64 = g.density.iter().sum::<f64>() * g.cell_area();
    assert!((mass - 1.0).abs() <= 0.02, "{mass}");
}

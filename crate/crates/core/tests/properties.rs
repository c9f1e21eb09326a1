use cmetric::contraction::{diameter, witness_lower_bound, DiameterMethod, DiameterOptions};
use cmetric::domains::{pullback_isometry_check, Affine};
use cmetric::fixed_point::solve;
use cmetric::holomaps::{random_selfmap, schwarz_pick_gap};
use cmetric::metric::{atanh_stable, convexity_margin, mobius_apply, poincare_distance};
use cmetric::{CPoint, Complex, Domain, FixedPointProblem, HoloMap, SampleStream};
use proptest::prelude::*;

/// Poincaré distance through the hyperboloid formula
/// `ω = ½ arccosh(1 + 2|z − w|² / ((1 − |z|²)(1 − |w|²)))`.
fn omega_oracle(z: Complex, w: Complex) -> f64 {
    let num = 2.0 * (z - w).norm_sqr();
    let den = (1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr());
    0.5 * (1.0 + num / den).acosh()
}

fn disk_point(max: f64) -> impl Strategy<Value = Complex> {
    (0.0..max, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn poincare_metric_axioms(z in disk_point(0.99), w in disk_point(0.99), v in disk_point(0.99)) {
        let zw = poincare_distance(z, w).unwrap();
        prop_assert_eq!(zw.to_bits(), poincare_distance(w, z).unwrap().to_bits());
        prop_assert!(zw >= 0.0);
        let zv = poincare_distance(z, v).unwrap();
        let vw = poincare_distance(v, w).unwrap();
        prop_assert!(zw <= zv + vw + 1e-12);
        prop_assert_eq!(poincare_distance(z, z).unwrap(), 0.0);
        if (z - w).norm() > 1e-15 {
            prop_assert!(zw > 0.0);
        }
    }

    #[test]
    fn poincare_matches_hyperboloid_oracle(z in disk_point(0.95), w in disk_point(0.95)) {
        let d = poincare_distance(z, w).unwrap();
        let o = omega_oracle(z, w);
        // the arccosh route loses accuracy for nearby points
        prop_assert!((d - o).abs() <= 1e-9 * (1.0 + o), "{} vs {}", d, o);
    }

    #[test]
    fn mobius_is_isometry(a in disk_point(0.95), z in disk_point(0.95), w in disk_point(0.95)) {
        let before = poincare_distance(z, w).unwrap();
        let after = poincare_distance(mobius_apply(a, z), mobius_apply(a, w)).unwrap();
        prop_assert!((before - after).abs() <= 1e-10 * before.max(1e-300) + 1e-15);
    }

    #[test]
    fn convexity_inequality(r in 0.0..(1.0 - 1e-6), x in 0.0..20.0f64) {
        prop_assert!(convexity_margin(r, x).unwrap() >= -1e-12);
    }

    #[test]
    fn convexity_quotient_nondecreasing(x in 1e-3..20.0f64, r1 in 1e-3..0.999f64, r2 in 1e-3..0.999f64) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let q = |r: f64| atanh_stable(r * x.tanh()).unwrap() / r;
        prop_assert!(q(lo) <= q(hi) * (1.0 + 1e-12));
    }

    #[test]
    fn double_angle_identity(r in 0.0..0.99f64) {
        let lhs = atanh_stable(2.0 * r / (1.0 + r * r)).unwrap();
        prop_assert!((lhs - 2.0 * atanh_stable(r).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn inclusion_monotonicity(r in 0.05..0.99f64, seed in any::<u64>()) {
        let u = Domain::scaled_disk(r).unwrap();
        for (x, y) in u.sample_pairs(&SampleStream::new(seed, 1e-3, 20)).unwrap() {
            let cx = Domain::UnitDisk.caratheodory(&x, &y).unwrap();
            let cu = u.caratheodory(&x, &y).unwrap();
            prop_assert!(cx <= cu + 1e-12);
        }
    }

    #[test]
    fn closed_forms_are_metrics(seed in any::<u64>(), kind in 0usize..4) {
        let d = match kind {
            0 => Domain::UnitDisk,
            1 => Domain::scaled_disk(0.4).unwrap(),
            2 => Domain::affine_disk(Complex::new(1.0, -2.0), 3.0).unwrap(),
            _ => Domain::polydisk(vec![0.5, 2.0]).unwrap(),
        };
        let pts = d.sample(&SampleStream::new(seed, 1e-3, 3)).unwrap();
        let (a, b, c) = (&pts[0], &pts[1], &pts[2]);
        let ab = d.caratheodory(a, b).unwrap();
        prop_assert_eq!(ab, d.caratheodory(b, a).unwrap());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(d.caratheodory(a, a).unwrap(), 0.0);
        prop_assert!(ab <= d.caratheodory(a, c).unwrap() + d.caratheodory(c, b).unwrap() + 1e-12);
    }

    #[test]
    fn affine_image_pullback_is_isometric(
        entries in proptest::collection::vec(-2.0..2.0f64, 8),
        seed in any::<u64>(),
    ) {
        let z = |i: usize| Complex::new(entries[2 * i], entries[2 * i + 1]);
        // keep the matrix comfortably invertible
        let linear = vec![vec![z(0) + Complex::new(3.0, 0.0), z(1)], vec![z(2), z(3) + Complex::new(0.0, 3.0)]];
        let map = Affine::new(linear, vec![Complex::new(0.5, -1.0), Complex::new(2.0, 0.0)]).unwrap();
        let d = Domain::affine_image(Domain::polydisk(vec![1.0, 0.5]).unwrap(), map).unwrap();
        for (x, y) in d.sample_pairs(&SampleStream::new(seed, 1e-3, 5)).unwrap() {
            prop_assert!(pullback_isometry_check(&d, &x, &y).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn composition_is_exact(a in disk_point(0.9), b in disk_point(0.9), z in disk_point(0.9)) {
        let f = HoloMap::mobius(a).unwrap();
        let g = HoloMap::compose(HoloMap::scale(0.5, 1).unwrap(), HoloMap::mobius(b).unwrap()).unwrap();
        let fg = HoloMap::compose(f.clone(), g.clone()).unwrap();
        let direct = fg.eval1(z).unwrap();
        let nested = f.eval1(g.eval1(z).unwrap()).unwrap();
        prop_assert_eq!(direct.re.to_bits(), nested.re.to_bits());
        prop_assert_eq!(direct.im.to_bits(), nested.im.to_bits());
    }

    #[test]
    fn random_selfmap_stays_in_scaled_copy(seed in any::<u64>(), bias in 0.05..0.95f64) {
        let f = random_selfmap(&Domain::UnitDisk, seed, bias).unwrap();
        for p in Domain::UnitDisk.sample(&SampleStream::new(seed ^ 1, 1e-6, 50)).unwrap() {
            prop_assert!(f.evaluate(&p).unwrap().coords()[0].norm() <= bias * (1.0 + 1e-12));
        }
        let poly = Domain::polydisk(vec![2.0, 0.5]).unwrap();
        let g = random_selfmap(&poly, seed, bias).unwrap();
        for p in poly.sample(&SampleStream::new(seed ^ 2, 1e-6, 50)).unwrap() {
            let q = g.evaluate(&p).unwrap();
            prop_assert!(q.coords()[0].norm() <= 2.0 * bias * (1.0 + 1e-12));
            prop_assert!(q.coords()[1].norm() <= 0.5 * bias * (1.0 + 1e-12));
        }
    }

    #[test]
    fn schwarz_pick_for_generated_maps(seed in any::<u64>(), z in disk_point(0.99), w in disk_point(0.99)) {
        let f = random_selfmap(&Domain::UnitDisk, seed, 0.9).unwrap();
        let gap = schwarz_pick_gap(&f, z, w).unwrap();
        prop_assert!(gap >= -1e-10);
        // image margin 0.1: strict contraction away from the diagonal
        if poincare_distance(z, w).unwrap() > 1e-6 {
            prop_assert!(gap > 0.0);
        }
    }

    #[test]
    fn certificate_consistency(r1 in 0.01..0.98f64, r2 in 0.01..0.98f64) {
        let cert = |r: f64| {
            diameter(&Domain::UnitDisk, &Domain::scaled_disk(r).unwrap(), &DiameterMethod::ClosedForm, &DiameterOptions::default()).unwrap()
        };
        let (a, b) = (cert(r1), cert(r2));
        prop_assert!((a.m.tanh() - a.k).abs() <= 1e-15);
        prop_assert!(a.k < 1.0);
        if r1 < r2 {
            prop_assert!(a.k < b.k);
        }
    }

    #[test]
    fn witness_bound_is_below_closed_form(r in 0.1..0.95f64, seed in any::<u64>()) {
        let u = Domain::scaled_disk(r).unwrap();
        let cert = diameter(&Domain::UnitDisk, &u, &DiameterMethod::ClosedForm, &DiameterOptions::default()).unwrap();
        let f = HoloMap::identity(1).unwrap();
        for (x, y) in u.sample_pairs(&SampleStream::new(seed, 1e-3, 10)).unwrap() {
            let lb = witness_lower_bound(&f, &x, &y, cert.k).unwrap();
            prop_assert!(lb <= u.caratheodory(&x, &y).unwrap() + 1e-12);
        }
    }
}

#[test]
fn cardinal_limits_of_k() {
    let k = |r: f64| {
        diameter(&Domain::UnitDisk, &Domain::scaled_disk(r).unwrap(), &DiameterMethod::ClosedForm, &DiameterOptions::default())
            .unwrap()
            .k
    };
    assert!(k(1e-9) < 1e-8);
    assert!(k(1.0 - 1e-5) > 1.0 - 1e-9);
}

#[test]
fn fixed_point_trace_properties() {
    let u = Domain::scaled_disk(0.6).unwrap();
    let cert = diameter(&Domain::UnitDisk, &u, &DiameterMethod::ClosedForm, &DiameterOptions::default()).unwrap();
    for seed in 0..25u64 {
        let f = random_selfmap(&Domain::UnitDisk, seed, 0.6).unwrap();
        let start = Domain::UnitDisk.sample(&SampleStream::new(seed, 1e-3, 1)).unwrap().remove(0);
        let p = FixedPointProblem {
            ambient: Domain::UnitDisk,
            image: u.clone(),
            map: f.clone(),
            start: start.clone(),
            tolerance: 1e-12,
            max_iter: None,
        };
        let r = solve(&p, &cert).unwrap();
        assert!(r.residual <= p.tolerance);
        let t0 = r.trace[0];
        // geometric step bound and monotone trace
        for (n, &t) in r.trace.iter().enumerate() {
            assert!(t <= cert.k.powi(n as i32) * t0 * (1.0 + 1e-9) + 1e-300, "seed {seed} n {n}");
        }
        for w in r.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        // Cauchy tail on the stored iterates
        let mut iterates = vec![start];
        for _ in 0..r.trace.len() {
            let next = f.evaluate(iterates.last().unwrap()).unwrap();
            iterates.push(next);
        }
        for n in 0..iterates.len() {
            for m in n + 1..iterates.len() {
                let d = Domain::UnitDisk.caratheodory(&iterates[n], &iterates[m]).unwrap();
                if n < r.trace.len() {
                    assert!(d <= r.trace[n] / (1.0 - cert.k) * (1.0 + 1e-9) + 1e-12);
                }
            }
        }
        assert_eq!(iterates.last().unwrap(), &r.b);
    }
}

#[test]
fn polydisk_witness_family_reaches_closed_form() {
    // the projection witnesses realise c_X on polydisks exactly
    let x_dom = Domain::polydisk(vec![1.0, 2.0]).unwrap();
    for (p, q) in x_dom.sample_pairs(&SampleStream::new(3, 1e-3, 200)).unwrap() {
        let mut best = 0.0_f64;
        for w in x_dom.witnesses().unwrap() {
            let a = w.evaluate(&p).unwrap().coords()[0];
            let b = w.evaluate(&q).unwrap().coords()[0];
            best = best.max(omega_oracle(a, b));
        }
        let exact = x_dom.caratheodory(&p, &q).unwrap();
        assert!((best - exact).abs() <= 1e-9 * (1.0 + exact));
    }
    let _ = CPoint::from_re(0.0);
}

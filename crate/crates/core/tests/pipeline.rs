mod common;

use glaeser::fibers::{Fiber, FiberField};
use glaeser::geometry::SampleSet;
use glaeser::refinement::{decide, refine_round, select_jets, RefinementConfig, VerdictStatus, STABILITY_TOL};
use glaeser::verify::{check_whitney_field, verify_extension, VerifyOptions};
use glaeser::whitney::{classical_extend_finite, extend, DomainBox, ExtendOptions, Region};
use glaeser::Jet;
use proptest::prelude::*;

fn domain(s: &SampleSet) -> DomainBox {
    DomainBox::around(s.points(), s.dim(), 0.5)
}

#[test]
fn quadratic_ek_extension_interpolates() {
    let s = common::e_k(200, 2, 1.0);
    let cfg = RefinementConfig::default();
    let d = decide(&s, &cfg);
    assert_eq!(d.verdict.status, VerdictStatus::Extendable);
    let jets = select_jets(&d.field, &s, &cfg).unwrap();
    assert_eq!(jets[0], Jet::zero(vec![0.0]));
    for k in [20usize, 50, 100] {
        let g = jets[k].gradient()[0];
        assert!((g - 2.0 / k as f64).abs() < 0.5 / k as f64, "slope at 1/{k}: {g}");
    }
    let f = extend(&s, &jets, &domain(&s), &ExtendOptions::from_config(&cfg)).unwrap();
    for i in 0..s.len() {
        assert!((f.value(s.point(i)).unwrap() - s.value(i)).abs() <= 1e-9);
    }
    let r = verify_extension(&f, &s, &jets, &cfg, &VerifyOptions::defaults(&f, &s, 3));
    assert!(r.passed(), "{}", r.summary());
}

#[test]
fn selected_jets_pass_the_field_check() {
    let cfg = RefinementConfig::default();
    for (name, s) in common::suite() {
        let d = decide(&s, &cfg);
        if d.verdict.status != VerdictStatus::Extendable {
            continue;
        }
        let jets = select_jets(&d.field, &s, &cfg).unwrap();
        for (i, j) in jets.iter().enumerate() {
            assert!(d.field.fibers[i].contains(j, 1e-8), "{name}: jet {i} outside its fiber");
        }
        let r = check_whitney_field(&jets, &s, &cfg);
        assert!(r.pass, "{name}: field statistic {}", r.stat);
    }
}

#[test]
fn refinement_is_monotone_and_glaeser_on_the_suite() {
    let cfg = RefinementConfig::default();
    for (name, s) in common::suite() {
        let mut field = FiberField::gamma_initial(&s);
        for _ in 0..cfg.max_rounds_for(s.dim()) {
            let next = refine_round(&field, &s, &cfg);
            for (i, (a, b)) in field.fibers.iter().zip(&next.fibers).enumerate() {
                assert!(b.is_glaeser(1e-8), "{name}: fiber {i}");
                match (a, b) {
                    (Fiber::Empty, b) => assert!(b.is_empty(), "{name}: fiber {i} revived"),
                    (Fiber::Affine(pa), Fiber::Affine(pb)) => {
                        assert!(pb.dim() <= pa.dim(), "{name}: fiber {i} grew");
                        assert!(a.contains(pb.base(), 1e-8), "{name}: fiber {i} left its parent");
                    }
                    (Fiber::Affine(_), Fiber::Empty) => {}
                }
            }
            let stable = next.equal(&field, STABILITY_TOL);
            field = next;
            if stable {
                break;
            }
        }
        assert!(refine_round(&field, &s, &cfg).equal(&field, STABILITY_TOL), "{name}: not a fixed point");
    }
}

#[test]
fn positive_data_matches_the_sign_free_pipeline() {
    let cfg = RefinementConfig::default();
    for seed in 0..4 {
        let s = common::random_positive(2, 30, seed, 0.5);
        let cmp = glaeser::cli::oracle_compare(&s, &cfg);
        assert!(cmp.verdicts_agree && cmp.pass, "seed {seed}: {cmp:?}");
    }
    let cmp = glaeser::cli::oracle_compare(&common::e_k(50, 1, 1.0), &cfg);
    assert_eq!(cmp.nonnegative, VerdictStatus::NotExtendable);
    assert_eq!(cmp.classical, VerdictStatus::Extendable);
}

#[test]
fn classical_and_nonnegative_extensions_agree_near_e() {
    let s = common::samples(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], vec![5.0, 6.0, 5.5]);
    let jets: Vec<Jet> = (0..3).map(|i| Jet::new(s.point(i).to_vec(), s.value(i), vec![0.1, -0.05]).unwrap()).collect();
    let b = domain(&s);
    let mut opts = ExtendOptions::from_config(&RefinementConfig::default());
    opts.force = true;
    let f = extend(&s, &jets, &b, &opts).unwrap();
    let g = classical_extend_finite(s.points(), &jets, &b, opts.max_generation).unwrap();
    for i in 0..s.len() {
        let x = s.point(i);
        assert_eq!(f.value(x).unwrap(), g.value(x).unwrap());
        for h in [1e-3, 1e-2, 5e-2] {
            let y = [x[0] + h, x[1] - 0.5 * h];
            assert!((f.value(&y).unwrap() - g.value(&y).unwrap()).abs() <= 1e-6, "{y:?}");
        }
    }
}

#[test]
fn forced_extension_of_slope_data_fails_verification() {
    let s = common::e_k(200, 1, 1.0);
    let cfg = RefinementConfig::default();
    let d = decide(&s, &cfg);
    assert_eq!(d.verdict.status, VerdictStatus::NotExtendable);
    let jets = glaeser::refinement::select_jets_forced(&d.field, &s, &cfg);
    let b = domain(&s);
    let opts = ExtendOptions::from_config(&cfg);
    assert!(extend(&s, &jets, &b, &opts).is_err());
    let f = extend(&s, &jets, &b, &ExtendOptions { force: true, ..opts }).unwrap();
    let r = verify_extension(&f, &s, &jets, &cfg, &VerifyOptions::defaults(&f, &s, 3));
    assert!(!r.passed());
    assert!(!r.check("whitney_field").unwrap().pass);
    assert!(r.grid_min >= 0.0);
}

#[test]
fn collar_evaluation_uses_the_nearest_witness() {
    let s = common::e_k(50, 2, 1.0);
    let cfg = RefinementConfig::default();
    let jets = select_jets(&decide(&s, &cfg).field, &s, &cfg).unwrap();
    let f = extend(&s, &jets, &domain(&s), &ExtendOptions { max_generation: 8, ..ExtendOptions::from_config(&cfg) }).unwrap();
    let x = s.point(5)[0];
    let e = f.eval(&[x + 1e-5]).unwrap();
    assert_eq!(e.region, Region::Collar(5));
    assert!((e.value - f.witnesses()[5].eval(&[x + 1e-5]).0).abs() < 1e-15);
}

fn point_set(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, dim), 1..8)
}

fn brute_box_distance(points: &[Vec<f64>], lo: &[f64], hi: &[f64]) -> f64 {
    points
        .iter()
        .map(|p| p.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| (l - v).max(v - h).max(0.0).powi(2)).sum::<f64>().sqrt())
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cubes_satisfy_the_ratio_bounds(pts in point_set(2)) {
        let b = DomainBox::around(&pts, 2, 0.5);
        let dec = glaeser::whitney::Decomposition::build(&pts, &b, 10).unwrap();
        for q in dec.cubes() {
            let d = brute_box_distance(&pts, &q.lo(), &q.hi());
            prop_assert!((d - q.dist_to_e).abs() <= 1e-12 * (1.0 + d));
            prop_assert!(0.25 * q.diam() <= q.dist_to_e && q.dist_to_e <= 4.0 * q.diam());
            let rep = &pts[q.rep_index.unwrap()];
            prop_assert!((brute_box_distance(std::slice::from_ref(rep), &q.lo(), &q.hi()) - d).abs() <= 1e-10 * (1.0 + d));
        }
    }

    #[test]
    fn partition_sums_to_one(pts in point_set(2), probes in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 40)) {
        let b = DomainBox::around(&pts, 2, 0.5);
        let dec = glaeser::whitney::Decomposition::build(&pts, &b, 12).unwrap();
        for (u, v) in probes {
            let y = [b.lo[0] + u * (b.hi[0] - b.lo[0]), b.lo[1] + v * (b.hi[1] - b.lo[1])];
            if let Some(p) = dec.partition_at(&y) {
                prop_assert!((p.sum() - 1.0).abs() <= 1e-9);
                let side = p.terms.iter().map(|t| dec.cubes()[t.0].side).fold(f64::INFINITY, f64::min);
                prop_assert!(p.gradient_sum().iter().all(|g| g.abs() <= 1e-6 / side));
            }
        }
    }

    #[test]
    fn forced_extensions_are_nonnegative(
        pts in point_set(1),
        vals in prop::collection::vec(0.0..2.0f64, 8),
        slopes in prop::collection::vec(-5.0..5.0f64, 8),
        probes in prop::collection::vec(0.0..1.0f64, 200),
    ) {
        let Ok(s) = SampleSet::new(1, pts.clone(), vals[..pts.len()].to_vec(), 1e-9) else { return Ok(()) };
        let jets: Vec<Jet> = (0..s.len())
            .map(|i| if s.value(i) == 0.0 { Jet::zero(s.point(i).to_vec()) } else { Jet::new(s.point(i).to_vec(), s.value(i), vec![slopes[i]]).unwrap() })
            .collect();
        let b = DomainBox::around(s.points(), 1, 0.5);
        let mut opts = ExtendOptions::from_config(&RefinementConfig::default());
        opts.force = true;
        let f = extend(&s, &jets, &b, &opts).unwrap();
        prop_assert!(f.analytic_nonnegativity());
        for u in probes {
            let y = [b.lo[0] + u * (b.hi[0] - b.lo[0])];
            prop_assert!(f.value(&y).unwrap() >= 0.0);
        }
        for i in 0..s.len() {
            prop_assert_eq!(f.value(s.point(i)).unwrap(), s.value(i));
        }
    }

    #[test]
    fn classical_extension_reproduces_jets(
        pts in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 2), 1..10),
        data in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), 10),
    ) {
        let mut uniq: Vec<Vec<f64>> = Vec::new();
        for p in pts {
            if uniq.iter().all(|q| (q[0] - p[0]).hypot(q[1] - p[1]) > 1e-3) {
                uniq.push(p);
            }
        }
        let jets: Vec<Jet> = uniq.iter().zip(&data).map(|(p, (v, a, b))| Jet::new(p.clone(), *v, vec![*a, *b]).unwrap()).collect();
        let b = DomainBox::around(&uniq, 2, 0.5);
        let f = classical_extend_finite(&uniq, &jets, &b, 20).unwrap();
        let h = 1e-6;
        for j in &jets {
            let x = j.base();
            prop_assert!((f.value(x).unwrap() - j.value()).abs() <= 1e-12);
            for k in 0..2 {
                let mut a = x.to_vec();
                let mut c = x.to_vec();
                a[k] += h;
                c[k] -= h;
                let fd = (f.value(&a).unwrap() - f.value(&c).unwrap()) / (2.0 * h);
                prop_assert!((fd - j.gradient()[k]).abs() <= 1e-6, "{} vs {}", fd, j.gradient()[k]);
            }
        }
    }
}

use kframe::generators::{
    commuting_pair, complex_gaussian, gaussian_matrix, joint_instance, random_frame, random_unitary, seeded_rng,
    GenSpec,
};
use kframe::operator::{hermitian_spectrum, inner, operator_norm, pseudo_inverse};
use kframe::{
    certify_controlled_kframe, certify_kframe, frame_operator, frame_sum, kframe_perturb_predict, optimal_frame_bounds,
    optimal_kframe_bounds, optimal_kframe_lower, transfer_controlled_to_k, transfer_k_to_controlled, Controlled,
    DenseOperator, Frame, FrameBounds, KFrame, PerturbationSpec, Tol, Vector,
};
use proptest::prelude::*;

fn tol() -> Tol {
    Tol::default()
}

fn frame(d: usize, n: usize, seed: u64) -> Frame {
    random_frame(&GenSpec::new(d, n, seed, 1.0).unwrap()).unwrap()
}

/// Largest `a` with `λ_min(S - a·W) ≥ -1e-13·scale`, by bisection.
fn bisect_pencil(s: &DenseOperator<f64>, w: &DenseOperator<f64>) -> f64 {
    let t = tol();
    let scale = operator_norm(s);
    let ok = |a: f64| {
        hermitian_spectrum(&(s - &w.scale(a)).hermitian_part(), &t)
            .unwrap()
            .min()
            >= -1e-13 * scale
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while ok(hi) {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn frame_operator_is_hermitian_psd(d in 1usize..7, extra in 0usize..6, seed in 0u64..10_000) {
        let f = frame(d, d + extra, seed);
        let s = frame_operator(&f);
        prop_assert!(s.hermitian_defect() <= 1e-14 * s.frobenius_norm());
        prop_assert!(hermitian_spectrum(&s, &tol()).unwrap().min() >= -1e-12);
    }

    #[test]
    fn rayleigh_quotients_bracketed(d in 1usize..6, extra in 0usize..6, seed in 0u64..10_000) {
        let f = frame(d, d + extra, seed);
        let b = optimal_frame_bounds(&f, &tol());
        let mut rng = seeded_rng(seed, 900);
        for _ in 0..50 {
            let x: Vector<f64> = (0..d).map(|_| complex_gaussian(&mut rng)).collect();
            let q = frame_sum(&f, &x) / inner(&x, &x).re;
            prop_assert!(q >= b.lower - 1e-9 && q <= b.upper + 1e-9);
        }
    }

    #[test]
    fn bounds_scale_quadratically(d in 1usize..6, seed in 0u64..10_000, t in 0.1f64..10.0) {
        let f = frame(d, d + 2, seed);
        let b = optimal_frame_bounds(&f, &tol());
        let bs = optimal_frame_bounds(&f.scaled(t), &tol());
        prop_assert!((bs.lower - t * t * b.lower).abs() <= 1e-10 * t * t * b.upper);
        prop_assert!((bs.upper - t * t * b.upper).abs() <= 1e-10 * t * t * b.upper);
    }

    #[test]
    fn bounds_unitarily_invariant(d in 1usize..6, seed in 0u64..10_000) {
        let f = frame(d, d + 3, seed);
        let u = random_unitary::<f64>(d, &mut seeded_rng(seed, 901));
        let g = Frame::new(d, f.vectors().iter().map(|v| u.apply(v)).collect()).unwrap();
        let (b1, b2) = (optimal_frame_bounds(&f, &tol()), optimal_frame_bounds(&g, &tol()));
        prop_assert!((b1.lower - b2.lower).abs() <= 1e-10 * b1.upper);
        prop_assert!((b1.upper - b2.upper).abs() <= 1e-10 * b1.upper);
    }

    #[test]
    fn identity_k_reproduces_frame_bounds(d in 1usize..6, seed in 0u64..10_000) {
        let f = frame(d, d + 2, seed);
        let b = optimal_frame_bounds(&f, &tol());
        let kb = optimal_kframe_bounds(&KFrame::new(f, DenseOperator::identity(d)).unwrap(), &tol()).unwrap();
        prop_assert!((b.lower - kb.lower).abs() <= 1e-10 * b.upper);
        prop_assert_eq!(b.upper, kb.upper);
    }

    #[test]
    fn pencil_matches_bisection(d in 1usize..5, extra in 0usize..4, seed in 0u64..10_000) {
        // rank-deficient K and n < d both allowed
        let f = frame(d, (d + extra).saturating_sub(1).max(1), seed);
        let mut k = gaussian_matrix::<f64>(d, d, &mut seeded_rng(seed, 902));
        if seed % 2 == 0 {
            k = k.matmul(&DenseOperator::diag(&(0..d).map(|i| if i == 0 { 0.0 } else { 1.0 }).collect::<Vec<_>>()));
        }
        let p = KFrame::new(f.clone(), k.clone()).unwrap();
        let a = match optimal_kframe_lower(&p, &tol()) {
            Ok(a) => a,
            Err(_) => return Ok(()),
        };
        let oracle = bisect_pencil(&frame_operator(&f), &k.matmul(&k.adjoint()));
        let scale = operator_norm(&frame_operator(&f)) / operator_norm(&k).powi(2);
        prop_assert!((a - oracle).abs() <= 1e-7 * scale.max(oracle), "{} vs {}", a, oracle);
    }

    #[test]
    fn pencil_equals_pinv_norm_oracle(d in 1usize..6, seed in 0u64..10_000) {
        // ‖T† K‖⁻² is the sharp lower constant whenever R(K) ⊂ R(T)
        let f = frame(d, d + 2, seed);
        let k = gaussian_matrix::<f64>(d, d, &mut seeded_rng(seed, 903));
        let a = optimal_kframe_lower(&KFrame::new(f.clone(), k.clone()).unwrap(), &tol()).unwrap();
        let t = kframe::synthesis(&f);
        let oracle = operator_norm(&pseudo_inverse(&t, &tol()).matmul(&k)).powi(-2);
        prop_assert!((a - oracle).abs() <= 1e-9 * oracle.max(1e-3));
    }

    #[test]
    fn certification_monotone_in_a(d in 1usize..5, seed in 0u64..10_000, u in 0.0f64..1.0) {
        let f = frame(d, d + 2, seed);
        let k = gaussian_matrix::<f64>(d, d, &mut seeded_rng(seed, 904));
        let p = KFrame::new(f, k).unwrap();
        let opt = optimal_kframe_bounds(&p, &tol()).unwrap();
        let a = opt.lower * u.max(1e-6) * (1.0 - 1e-6);
        prop_assert!(certify_kframe(&p, a, opt.upper, &tol()).unwrap().verdict.is_certified());
    }

    #[test]
    fn transfers_preserve_certification(d in 1usize..6, seed in 0u64..10_000, rank in 1usize..6) {
        let rank = rank.min(d);
        let inst = joint_instance(&GenSpec::new(d, d + 2, seed, 1.0).unwrap(), rank, seed % 3 != 0).unwrap();
        let (f, k, c) = (inst.family, inst.pair.k, inst.pair.c);
        let cp = Controlled::new(f.clone(), k.clone(), c.clone(), &tol()).unwrap();
        let kp = KFrame::new(f, k).unwrap();
        let copt = kframe::optimal_controlled_kframe_bounds(&cp, &tol()).unwrap();
        let kb = transfer_controlled_to_k(&copt, &c, &tol()).unwrap();
        // the lower constant A/λ_max(C) overshoots the K-frame optimum exactly when λ_max(C) < 1
        let c_top = inst.pair.c_diag.iter().cloned().fold(0.0, f64::max);
        let certified = certify_kframe(&kp, kb.lower, kb.upper, &tol()).unwrap().verdict.is_certified();
        prop_assert_eq!(certified, c_top >= 1.0);
        let upper_only = certify_kframe(&kp, kb.lower.min(copt.lower), kb.upper, &tol()).unwrap();
        prop_assert!(upper_only.verdict.is_certified());
        let kopt = optimal_kframe_bounds(&kp, &tol()).unwrap();
        let cb = transfer_k_to_controlled(&kopt, &c, &tol()).unwrap();
        prop_assert!(certify_controlled_kframe(&cp, cb.lower, cb.upper, &tol()).unwrap().verdict.is_certified());
    }

    #[test]
    fn scalar_control_scales_bounds(d in 1usize..5, seed in 0u64..10_000, c in 0.2f64..5.0) {
        let f = frame(d, d + 1, seed);
        let k = commuting_pair(&GenSpec::new(d, d, seed, 1.0).unwrap(), d).unwrap().k;
        let plain = optimal_kframe_bounds(&KFrame::new(f.clone(), k.clone()).unwrap(), &tol()).unwrap();
        let cp = Controlled::new(f, k, DenseOperator::identity(d).scale(c), &tol()).unwrap();
        let ctrl = kframe::optimal_controlled_kframe_bounds(&cp, &tol()).unwrap();
        // H = cS and the lower operator is cKK*, so A is unchanged and B scales
        prop_assert!((ctrl.lower - plain.lower).abs() <= 1e-8 * plain.upper);
        prop_assert!((ctrl.upper - c * plain.upper).abs() <= 1e-10 * c * plain.upper);
    }

    #[test]
    fn gate_monotone(a in 0.0f64..0.5, b in 0.0f64..0.9, g in 0.0f64..0.5, shrink in 0.0f64..1.0) {
        let k = DenseOperator::<f64>::identity(3);
        let big = PerturbationSpec::new(a, b, g).unwrap();
        let small = PerturbationSpec::new(a * shrink, b * shrink, g * shrink).unwrap();
        let pb = kframe_perturb_predict(1.0, 2.0, &k, &big, &tol()).unwrap();
        let ps = kframe_perturb_predict(1.0, 2.0, &k, &small, &tol()).unwrap();
        prop_assert!(ps.gate_value <= pb.gate_value);
        if pb.admissible {
            prop_assert!(ps.admissible);
            let (lb, ls): (FrameBounds<f64>, FrameBounds<f64>) = (pb.bounds.unwrap(), ps.bounds.unwrap());
            prop_assert!(lb.lower > 0.0);
            prop_assert!(ls.lower >= lb.lower);
        }
    }
}

#[test]
fn f32_agrees_with_f64() {
    let f = frame(4, 7, 12);
    let k = gaussian_matrix::<f64>(4, 4, &mut seeded_rng(12, 905));
    let b64 = optimal_kframe_bounds(&KFrame::new(f.clone(), k.clone()).unwrap(), &tol()).unwrap();
    let f32_family = kframe::Frame32::from_synthesis(&kframe::synthesis(&f).cast::<f32>());
    let p32 = kframe::KFrame32::new(f32_family, k.cast::<f32>()).unwrap();
    let b32 = optimal_kframe_bounds(&p32, &kframe::Tol32::default()).unwrap();
    assert!(((b32.lower as f64) - b64.lower).abs() <= 1e-4 * b64.upper);
    assert!(((b32.upper as f64) - b64.upper).abs() <= 1e-4 * b64.upper);
    assert!(
        certify_kframe(&p32, b32.lower * 0.99, b32.upper * 1.01, &kframe::Tol32::default())
            .unwrap()
            .verdict
            .is_certified()
    );
}

use super::*;
use crate::bilinear::BilinearSymbol;
use crate::group::FiniteAbelianGroup;
use crate::norm::{Budget, SpaceTriple};
use crate::transform::{inverse_fourier, naive_inverse_fourier, Signal};
use num_complex::Complex;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

fn random_symbol(dg: &FiniteAbelianGroup, seed: u64) -> BilinearSymbol<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BilinearSymbol::from_index_fn(dg, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn sign_p(n: usize) -> Signal<f64> {
    let g = FiniteAbelianGroup::cyclic(n);
    Signal::from_fn(&g, |x| {
        let c = g.centered(x)[0];
        C::new(0.0, -(c.signum() as f64))
    })
}

fn groups() -> Vec<FiniteAbelianGroup> {
    vec![
        FiniteAbelianGroup::cyclic(1),
        FiniteAbelianGroup::cyclic(2),
        FiniteAbelianGroup::cyclic(5),
        FiniteAbelianGroup::cyclic(8),
        FiniteAbelianGroup::cyclic(32),
        FiniteAbelianGroup::product(&[2, 3]).unwrap(),
        FiniteAbelianGroup::product(&[4, 4]).unwrap(),
        FiniteAbelianGroup::cyclic(6).with_weight(Rational64::new(1, 2)).unwrap(),
    ]
}

#[test]
fn fejer_stages_are_nonnegative_unit_mass() {
    for g in groups() {
        let dg = g.dual();
        for stages in [1, 3, 8] {
            let phi = ApproxIdentity::<f64>::fejer(&dg, stages).unwrap();
            assert_eq!(phi.len(), stages);
            let r = phi.check();
            assert!(r.nonnegative && r.unit_mass && r.monotone, "{g} S={stages}: {r:?}");
            for s in phi.stages() {
                assert!(s.values().iter().all(|z| z.re >= 0.0 && z.im == 0.0));
                assert!((s.integral().re - 1.0).abs() < 1e-12);
            }
        }
    }
    assert!(ApproxIdentity::<f64>::fejer(&FiniteAbelianGroup::cyclic(4), 0).is_err());
}

#[test]
fn fejer_first_stage_matches_closed_form() {
    // window 2 on Z_4: |1 + i^k|²/2 = [2, 1, 0, 1], dual weight 1/4
    let dg = FiniteAbelianGroup::cyclic(4).dual();
    let phi = ApproxIdentity::<f64>::fejer(&dg, 8).unwrap();
    assert_eq!(phi.windows()[0], vec![2]);
    for (z, want) in phi.stages()[0].values().iter().zip([2.0, 1.0, 0.0, 1.0]) {
        assert!((z.re - want).abs() < 1e-14);
    }
    // window 3 on Z_4 would put mass on ξ = 2 after window 2 did not; it is skipped
    assert!(phi.windows().iter().all(|w| w[0] != 3));
}

#[test]
fn fejer_concentrates_at_identity() {
    for n in [5, 9, 16, 27, 32] {
        let dg = FiniteAbelianGroup::cyclic(n).dual();
        let phi = ApproxIdentity::<f64>::fejer(&dg, 8).unwrap();
        let last = phi.stages().last().unwrap();
        let w = dg.weight_f64();
        assert!(last.values()[0].re * w > 0.9, "n={n}");
        // the spatial side has the announced window
        let spatial = naive_inverse_fourier(&phi.stages()[2]);
        let allowed = phi.spatial_support(3);
        for (i, z) in spatial.values().iter().enumerate() {
            if !allowed.contains(&i) {
                assert!(z.norm() < 1e-12, "n={n} i={i}");
            }
        }
    }
}

#[test]
fn ladder_is_monotone_for_many_cyclic_groups() {
    for n in 2..=40 {
        for s in 1..=10 {
            let phi = ApproxIdentity::<f64>::fejer(&FiniteAbelianGroup::cyclic(n).dual(), s).unwrap();
            let lad = phi.outside_mass_ladder();
            for k in 0..lad[0].len() {
                for j in 1..lad.len() {
                    assert!(lad[j][k] <= lad[j - 1][k] + 1e-12, "n={n} S={s} j={j} k={k}");
                }
            }
        }
    }
}

#[test]
fn custom_identity_validation() {
    let dg = FiniteAbelianGroup::cyclic(4).dual();
    let ok = Signal::from_real(&dg, &[4.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(ApproxIdentity::custom(&dg, vec![ok.clone()]).is_ok());
    let neg = Signal::from_real(&dg, &[5.0, -1.0, 0.0, 0.0]).unwrap();
    assert!(ApproxIdentity::custom(&dg, vec![neg]).is_err());
    let heavy = Signal::from_real(&dg, &[8.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(ApproxIdentity::custom(&dg, vec![heavy]).is_err());
}

#[test]
fn cutoffs_are_admissible_and_shrink() {
    for g in groups() {
        let h = CutoffFamily::<f64>::shrinking(&g, 8).unwrap();
        let mut prev = usize::MAX;
        for (j, s) in h.stages().iter().enumerate() {
            assert!(s.values().iter().all(|z| z.re >= 0.0 && z.re <= 1.0 + 1e-15 && z.im == 0.0));
            assert!((s.integral().re - 1.0).abs() < 1e-12, "{g} stage {j}");
            let size = h.support(j + 1).len();
            assert!(size <= prev);
            prev = size;
        }
        let hat = h.transforms();
        let last = hat.last().unwrap();
        if g.haar_weight() == Rational64::from_integer(1) {
            assert!(last.values().iter().all(|z| (z - C::new(1.0, 0.0)).norm() < 1e-12), "{g}");
        }
    }
    // total mass below one leaves no admissible cutoff
    let tiny = FiniteAbelianGroup::cyclic(4).with_weight(Rational64::new(1, 8)).unwrap();
    assert!(CutoffFamily::<f64>::shrinking(&tiny, 3).is_err());
}

#[test]
fn cutoff_transforms_match_binomial_closed_form() {
    for n in [5usize, 8, 13, 32] {
        let g = FiniteAbelianGroup::cyclic(n);
        let h = CutoffFamily::<f64>::shrinking(&g, 6).unwrap();
        let hat = h.transforms();
        for (j, t) in hat.iter().enumerate() {
            let k = h.lengths()[j][0] as i32;
            for (xi, z) in t.values().iter().enumerate() {
                let want = (std::f64::consts::PI * xi as f64 / n as f64).cos().powi(2 * k);
                assert!((z - C::new(want, 0.0)).norm() < 1e-12, "n={n} j={j} xi={xi}");
            }
            if j > 0 {
                assert!(t.values().iter().zip(hat[j - 1].values()).all(|(a, b)| a.re >= b.re - 1e-15));
            }
        }
    }
}

#[test]
fn cutoffs_for_small_haar_weights() {
    // w|G| = 2: the radius floor keeps h_j <= 1 and the transforms still increase
    let g = FiniteAbelianGroup::cyclic(8).with_weight(Rational64::new(1, 4)).unwrap();
    let h = CutoffFamily::<f64>::shrinking(&g, 4).unwrap();
    assert!(h.lengths().iter().all(|k| k[0] >= 1));
    for s in h.stages() {
        assert!(s.values().iter().all(|z| z.re >= 0.0 && z.re <= 1.0 + 1e-12));
        assert!((s.integral().re - 1.0).abs() < 1e-12);
    }
    // w|G| = 1 admits only the constant 1
    let unit = FiniteAbelianGroup::cyclic(8).with_weight(Rational64::new(1, 8)).unwrap();
    let h = CutoffFamily::<f64>::shrinking(&unit, 3).unwrap();
    assert!(h.stages().iter().all(|s| s.values().iter().all(|z| (z - C::new(1.0, 0.0)).norm() < 1e-15)));
}

#[test]
fn build_mj_constant_symbol_is_tensor_of_cutoff_transforms() {
    let g = FiniteAbelianGroup::cyclic(8);
    let dg = g.dual();
    let one = BilinearSymbol::constant(&dg, C::new(1.0, 0.0));
    let h = CutoffFamily::shrinking(&g, 5).unwrap();
    let phi = ApproxIdentity::fejer(&dg, 5).unwrap();
    for j in 1..=5 {
        let mj = build_mj(&one, &h, &phi, j).unwrap();
        let hat = &h.transforms()[j - 1];
        for a in 0..8 {
            for b in 0..8 {
                let want = hat.values()[a] * hat.values()[b];
                assert!((mj.get(a, b) - want).norm() < 1e-12);
            }
        }
    }
    assert!(build_mj(&one, &h, &phi, 0).is_err());
    assert!(build_mj(&one, &h, &phi, 6).is_err());
}

#[test]
fn build_mj_identity_stage_returns_symbol() {
    let g = FiniteAbelianGroup::cyclic(6);
    let dg = g.dual();
    let m = random_symbol(&dg, 3);
    let h = CutoffFamily::custom(&g, vec![Signal::<f64>::delta(&g, &g.zero())]).unwrap();
    // unit mass on the dual side
    let delta = Signal::<f64>::delta(&dg, &dg.zero());
    assert!((delta.values()[0].re - 6.0).abs() < 1e-12);
    let phi = ApproxIdentity::custom(&dg, vec![delta]).unwrap();
    let mj = build_mj(&m, &h, &phi, 1).unwrap();
    assert!(mj.max_abs_diff(&m) < 1e-12);
}

#[test]
fn build_mj_matches_direct_convolution() {
    for g in [
        FiniteAbelianGroup::cyclic(6),
        FiniteAbelianGroup::product(&[2, 3]).unwrap(),
        FiniteAbelianGroup::cyclic(8),
        FiniteAbelianGroup::cyclic(4).with_weight(Rational64::new(1, 2)).unwrap(),
    ] {
        let dg = g.dual();
        let m = random_symbol(&dg, 11);
        let h = CutoffFamily::shrinking(&g, 4).unwrap();
        let phi = ApproxIdentity::fejer(&dg, 4).unwrap();
        for j in 1..=4 {
            let fast = build_mj(&m, &h, &phi, j).unwrap();
            let slow = build_mj_direct(&m, &h, &phi, j).unwrap();
            assert!(fast.max_abs_diff(&slow) < 1e-10, "{g} j={j}");
        }
    }
}

#[test]
fn build_mj_rejects_mismatched_groups() {
    let g = FiniteAbelianGroup::cyclic(6);
    let m = random_symbol(&FiniteAbelianGroup::cyclic(5).dual(), 1);
    let h = CutoffFamily::<f64>::shrinking(&g, 2).unwrap();
    let phi = ApproxIdentity::<f64>::fejer(&g.dual(), 2).unwrap();
    assert!(build_mj(&m, &h, &phi, 1).is_err());
}

fn check_options(spaces: SpaceTriple, continuous: bool) -> VerifyOptions {
    VerifyOptions { spaces, budget: Budget::new(4, 30).unwrap(), seed: 7, continuous, d: 1.0, bound: None }
}

#[test]
fn verify_constant_symbol() {
    let g = FiniteAbelianGroup::cyclic(8);
    let dg = g.dual();
    let one = BilinearSymbol::constant(&dg, C::new(1.0, 0.0));
    let seq = ApproxSequence::standard(&one, 6).unwrap();
    let spaces = SpaceTriple::lebesgue(2.0, 2.0, 1.0).unwrap();
    let mut opts = check_options(spaces, true);
    opts.bound = crate::norm::reference_bound(&one, &spaces).unwrap();
    let r = verify_p(&one, &seq, &opts).unwrap();
    assert!(r.p1 && r.p3 && r.p4_violations == 0, "{r:?}");
    for s in &r.stages {
        assert!(s.sup_norm <= 1.0 + 1e-12);
        assert_eq!(s.p4, Verdict::Pass);
    }
    assert!(r.stages.last().unwrap().sup_deviation < 1e-12);
}

#[test]
fn verify_modulation_converges() {
    let g = FiniteAbelianGroup::cyclic(32);
    let dg = g.dual();
    let m = BilinearSymbol::modulation(&dg, &g.element(&[3]).unwrap(), &g.element(&[-5]).unwrap(), C::new(0.0, 1.0))
        .unwrap();
    let seq = ApproxSequence::standard(&m, 8).unwrap();
    let spaces = SpaceTriple::lebesgue(2.0, 2.0, 1.0).unwrap();
    let mut opts = check_options(spaces, true);
    opts.bound = crate::norm::reference_bound(&m, &spaces).unwrap();
    let r = verify_p(&m, &seq, &opts).unwrap();
    assert!(r.stages.last().unwrap().sup_deviation < 1e-6);
    assert_eq!(r.p2_monotone, Some(true));
    assert!(r.p1 && r.p3 && r.p4_violations == 0);
}

#[test]
fn support_containment_against_interval_arithmetic() {
    // Z_8: supp h_j is |t| <= k_j, supp φ_j is |t| < L_j, so supp m_j^∨ lies in the
    // product of the summed intervals
    let g = FiniteAbelianGroup::cyclic(8);
    let dg = g.dual();
    for seed in 0..5 {
        let m = random_symbol(&dg, seed);
        let seq = ApproxSequence::standard(&m, 6).unwrap();
        for j in 1..=6 {
            let mj = build_mj_direct(&m, &seq.cutoffs, &seq.identity, j).unwrap();
            let k = naive_inverse_fourier(&mj.as_signal());
            let r = seq.cutoffs.lengths()[j - 1][0] as i64;
            let win = seq.identity.windows()[j - 1][0] as i64;
            let lo = -r - (win - 1);
            let hi = r + (win - 1);
            let inside = |c: i64| (lo..=hi).any(|t| (t - c).rem_euclid(8) == 0);
            let g2 = g.square();
            for (i, z) in k.values().iter().enumerate() {
                let x = g2.element_at(i);
                let c = g2.centered(&x);
                if !(inside(c[0]) && inside(c[1])) {
                    assert!(z.norm() < 1e-12, "seed={seed} j={j} x={c:?}");
                }
            }
        }
        let r = verify_p(&m, &seq, &check_options(SpaceTriple::lebesgue(2.0, 2.0, 1.0).unwrap(), false)).unwrap();
        assert!(r.p1 && r.p3);
        assert_eq!(r.p2_monotone, None);
        assert!(r.stages.iter().all(|s| s.p4 == Verdict::Unchecked));
    }
    // the containment is not vacuous at the middle stages of a larger group
    let g = FiniteAbelianGroup::cyclic(16);
    let m = random_symbol(&g.dual(), 7);
    let seq = ApproxSequence::standard(&m, 8).unwrap();
    let r = verify_p(&m, &seq, &check_options(SpaceTriple::lebesgue(2.0, 2.0, 1.0).unwrap(), false)).unwrap();
    assert!(r.p1);
    assert!(r.stages[4].allowed_size < 256 && r.stages[4].support_size > 1);
}

#[test]
fn p4_flags_a_violation_against_a_false_bound() {
    let g = FiniteAbelianGroup::cyclic(4);
    let dg = g.dual();
    let one = BilinearSymbol::constant(&dg, C::new(1.0, 0.0));
    let seq = ApproxSequence::standard(&one, 3).unwrap();
    let mut opts = check_options(SpaceTriple::lebesgue(2.0, 2.0, 1.0).unwrap(), true);
    opts.bound = Some(crate::norm::ReferenceBound {
        value: 0.5,
        slack: 0.0,
        source: crate::norm::BoundSource::Oracle { levels: 2 },
    });
    let r = verify_p(&one, &seq, &opts).unwrap();
    assert!(r.p4_violations > 0);
    assert!(!r.passed());
}

#[test]
fn stage_table_csv() {
    let g = FiniteAbelianGroup::cyclic(4);
    let one = BilinearSymbol::constant(&g.dual(), C::new(1.0, 0.0));
    let seq = ApproxSequence::standard(&one, 2).unwrap();
    let r = verify_p(&one, &seq, &check_options(SpaceTriple::lebesgue(2.0, 2.0, 1.0).unwrap(), true)).unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "stage,sup_deviation,sup_norm,p1_support_size,p4_estimate");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,"));
}

#[test]
fn normalized_check_constant_symbol() {
    let dg = FiniteAbelianGroup::cyclic(9).dual();
    let m = BilinearSymbol::constant(&dg, C::new(2.0, -1.0));
    let phi = ApproxIdentity::fejer(&dg, 5).unwrap();
    let r = normalized_check(&m, &phi).unwrap();
    assert!(r.stage_deviation.iter().all(|d| *d < 1e-12));
    assert!(r.factorization_residual.unwrap() < 1e-10);
}

#[test]
fn difference_factorization_for_sign_symbol() {
    let profile = sign_p(9);
    let dg = profile.group().clone();
    let m = BilinearSymbol::difference(&profile);
    let phi = ApproxIdentity::fejer(&dg, 4).unwrap();
    for s in phi.stages() {
        let res = difference_factorization(&profile, s, s).unwrap();
        assert!(res < 1e-10);
    }
    // distinct factors: the reflection matters
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = Signal::from_fn(&dg, |_| C::new(rng.random_range(0.0..1.0), 0.0));
    let b = Signal::from_fn(&dg, |_| C::new(rng.random_range(0.0..1.0), rng.random_range(-1.0..1.0)));
    assert!(difference_factorization(&profile, &a, &b).unwrap() < 1e-10);
    let r = normalized_check(&m, &phi).unwrap();
    assert!(r.factorization_residual.unwrap() < 1e-10);
    assert!(r.difference_symbol);
}

#[test]
fn normalized_check_reports_discontinuity() {
    let dg = FiniteAbelianGroup::cyclic(8).dual();
    let m = BilinearSymbol::from_index_fn(&dg, |i, j| C::new(if i == 0 && j == 0 { 1.0 } else { 0.0 }, 0.0));
    let phi = ApproxIdentity::fejer(&dg, 3).unwrap();
    let r = normalized_check(&m, &phi).unwrap();
    assert_eq!(r.final_pointwise.len(), 64);
    assert!(!r.difference_symbol);
    assert!(r.factorization_residual.is_none());
    // the finite model's last stage is the identity
    assert!(r.stage_deviation.last().unwrap() < &1e-12);
    assert!(r.stage_deviation[0] > 0.1);
    assert_eq!(r.worst_point.0, 0);
}

#[test]
fn sequence_inverse_transform_is_supported_near_origin() {
    let g = FiniteAbelianGroup::cyclic(16);
    let m = random_symbol(&g.dual(), 2);
    let seq = ApproxSequence::standard(&m, 8).unwrap();
    let k = inverse_fourier(&seq.symbols[4].as_signal());
    assert!(k.support(1e-12).len() < 256);
}

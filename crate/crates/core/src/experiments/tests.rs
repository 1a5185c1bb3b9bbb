use super::*;
use crate::bilinear::Kernel;
use crate::norm::exhaustive_oracle;

fn budget() -> Budget {
    Budget::new(4, 20).unwrap()
}

fn cfg(p1: f64, p2: f64, p: f64) -> ExperimentConfig {
    ExperimentConfig::new(SpaceTriple::lebesgue(p1, p2, p).unwrap(), budget(), 7).unwrap()
}

fn ones(dg: &FiniteAbelianGroup) -> BilinearSymbol<f64> {
    BilinearSymbol::from_index_fn(dg, |_, _| C::new(1.0, 0.0))
}

#[test]
fn order_cone_n5() {
    let cone = OrderCone::new(5).unwrap();
    assert_eq!(cone.positive(), vec![1, 2]);
    assert_eq!((0..5).map(|k| cone.sign(k)).collect::<Vec<_>>(), vec![0, 1, 1, -1, -1]);
    // 1+1=2 stays in P; 1+2, 2+1, 2+2 wrap out.
    assert_eq!(cone.closure_failures(), 3);
    assert!(OrderCone::new(4).is_err());
    assert!(OrderCone::new(1).is_err());
}

#[test]
fn trichotomy_for_odd_orders() {
    for n in (3..=1001).step_by(2) {
        assert!(OrderCone::new(n).unwrap().trichotomy_holds(), "N={n}");
    }
}

#[test]
fn bht_symmetries() {
    for n in [3, 5, 9] {
        let m = bht_symbol(n).unwrap();
        for a in 0..n {
            assert_eq!(m.get(a, a), C::new(0.0, 0.0));
            for b in 0..n {
                assert!((m.get(a, b) - m.get(b, a).conj()).norm() < 1e-15);
                assert!((m.get(a, b) + m.get(b, a)).norm() < 1e-15);
                assert!((m.get(a, b).norm() - if a == b { 0.0 } else { 1.0 }).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn bht_n3_estimate_matches_oracle() {
    let m = bht_symbol(3).unwrap();
    let sp = SpaceTriple::lebesgue(2.0, 2.0, 1.0).unwrap();
    let est = estimate_norm(&m, &sp, Budget::new(8, 40).unwrap(), 1).unwrap();
    let oracle = exhaustive_oracle(&m, &sp, crate::norm::default_oracle_levels(3)).unwrap();
    assert!(est.value <= oracle.value + 1e-6, "{} vs {}", est.value, oracle.value);
    assert!(est.value >= oracle.value - 1e-3, "{} vs {}", est.value, oracle.value);
}

#[test]
fn bht_experiment_rows() {
    let sp = [SpaceTriple::lebesgue(2.0, 2.0, 1.0).unwrap()];
    let r = bht_experiment(&[3, 5], &sp, budget(), 3).unwrap();
    assert_eq!(r.rows.len(), 3);
    assert!(r.passed());
    let g = r.row("growth L(2, 2, 1)").or_else(|| r.rows.last()).unwrap();
    assert!(g.get("growth").unwrap() > 0.0);
    assert!(r.rows[0].detail.is_some());
    assert!(bht_experiment(&[4], &sp, budget(), 3).is_err());
}

#[test]
fn deleeuw_trivial_subgroup_keeps_norm() {
    let g = FiniteAbelianGroup::cyclic(6);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = random_symbol(&g.dual(), &mut rng);
    let c = cfg(2.0, 2.0, 1.0);
    let r = deleeuw_restrict(&m, &Subgroup::trivial(&g), None, &c).unwrap();
    let row = r.row("restriction").unwrap();
    let (a, b) = (row.get("estimate").unwrap(), row.get("estimate_m").unwrap());
    assert!((a - b).abs() <= 1e-9 * b.max(1.0), "{a} vs {b}");
    assert!(r.passed());
}

#[test]
fn deleeuw_constant_on_z8() {
    let g = FiniteAbelianGroup::cyclic(8);
    let h = Subgroup::new(g.clone(), vec![g.element(&[4]).unwrap()]).unwrap();
    let m = ones(&g.dual());
    let c = cfg(2.0, 2.0, 1.0);
    let r = deleeuw_restrict(&m, &h, None, &c).unwrap();
    let row = r.row("restriction").unwrap();
    assert!((row.get("estimate").unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(row.get("annihilator_order"), Some(4.0));
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
}

#[test]
fn deleeuw_random_on_z12() {
    let g = FiniteAbelianGroup::cyclic(12);
    let h = Subgroup::new(g.clone(), vec![g.element(&[4]).unwrap()]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = random_symbol(&g.dual(), &mut rng);
    let r = deleeuw_restrict(&m, &h, None, &cfg(2.0, 2.0, 1.0)).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    let wrong = Subgroup::trivial(&FiniteAbelianGroup::cyclic(5));
    assert!(deleeuw_restrict(&m, &wrong, None, &cfg(2.0, 2.0, 1.0)).is_err());
}

#[test]
fn aniso_constant_symbol() {
    let dg = FiniteAbelianGroup::product(&[4, 6]).unwrap().dual();
    let m = ones(&dg);
    let eps = vec![vec![1, 1], vec![2, 3], vec![0, 5]];
    let r = anisotropic_family(&m, &eps, &cfg(2.0, 2.0, 1.0)).unwrap();
    assert_eq!(r.rows.len(), 4);
    for row in &r.rows {
        assert!((row.get("estimate").unwrap() - 1.0).abs() < 1e-6, "{}", row.case);
    }
    assert!(r.passed());
}

#[test]
fn aniso_modulation_non_invertible_dilations() {
    let g = FiniteAbelianGroup::cyclic(12);
    let dg = g.dual();
    let m = BilinearSymbol::modulation(&dg, &g.element(&[1]).unwrap(), &g.element(&[5]).unwrap(), C::new(0.0, 1.0))
        .unwrap();
    let eps: Vec<Vec<i64>> = [1, 2, 3, 4, 6].iter().map(|&e| vec![e]).collect();
    let r = anisotropic_family(&m, &eps, &cfg(2.0, 2.0, 1.0)).unwrap();
    // A pulled-back modulation is again a unimodular modulation.
    for row in r.rows.iter().take(eps.len()) {
        assert!((row.get("estimate").unwrap() - 1.0).abs() < 1e-6, "{}", row.case);
    }
    assert!(r.passed());
}

#[test]
fn pack_exponents() {
    let setup = PackSetup::standard();
    let js: Vec<usize> = (1..=8).collect();
    let r = necessity_pack(&setup, &js, &SpaceTriple::lebesgue(2.0, 2.0, 1.0).unwrap(), 0.02).unwrap();
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    assert!(r.row("fit").unwrap().get("slope").unwrap().abs() < 0.02);
    let r = necessity_pack(&setup, &js, &SpaceTriple::lebesgue(2.0, 2.0, 0.5).unwrap(), 0.05).unwrap();
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    assert!((r.row("fit").unwrap().get("slope").unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn pack_rejects_overlap() {
    let mut setup = PackSetup::standard();
    setup.spacing = Some(setup.required_spacing() - 1);
    assert!(matches!(
        necessity_pack(&setup, &[1, 2], &SpaceTriple::lebesgue(2.0, 2.0, 1.0).unwrap(), 0.05),
        Err(Error::TranslatesOverlap(_))
    ));
    assert!(necessity_pack(&PackSetup::standard(), &[3], &SpaceTriple::lebesgue(2.0, 2.0, 1.0).unwrap(), 0.05).is_err());
}

#[test]
fn log_slope_exact_power() {
    let pts: Vec<(f64, f64)> = (1..6).map(|x| (x as f64, 3.0 * (x as f64).powf(0.7))).collect();
    assert!((pack::log_slope(&pts) - 0.7).abs() < 1e-12);
}

fn bump(g: &FiniteAbelianGroup) -> Kernel<f64> {
    Kernel::from_index_fn(g, |u, v| {
        let cu = g.centered(&g.element_at(u))[0] as f64;
        let cv = g.centered(&g.element_at(v))[0] as f64;
        C::new((-(cu * cu + cv * cv) / 2.0).exp(), 0.0)
    })
}

#[test]
fn positive_kernel_boxes() {
    let g = FiniteAbelianGroup::cyclic(6);
    let k = bump(&g);
    let boxes = vec![KernelBox::full(&g), KernelBox::centered(&g, 1), KernelBox::empty(&g)];
    let r = positive_kernel_truncation(&k, &boxes, &[1, 2, 3, 4], &cfg(2.0, 2.0, 1.0), 0.05).unwrap();
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    let full = r.row("full").unwrap().get("estimate").unwrap();
    let b0 = r.row("box 0").unwrap();
    assert_eq!(b0.get("kernel_mass"), Some(k.l1_norm()));
    assert!(b0.get("estimate").unwrap() <= full + 1e-12);
    let empty = r.row("box 2").unwrap();
    assert_eq!(empty.get("estimate"), Some(0.0));
    assert_eq!(empty.get("kernel_mass"), Some(0.0));
    assert!(r.row("box 1 pack fit").is_some());
    assert!(r.row("box 2 pack fit").is_none());
}

#[test]
fn separable_bump_norm_on_l1_target() {
    // K = a⊗b is separable, so the L²×L²→L¹ norm is at most ‖a‖₁‖b‖₁ = ‖K‖₁.
    let g = FiniteAbelianGroup::cyclic(5);
    let k = bump(&g);
    let r = positive_kernel_truncation(&k, &[KernelBox::full(&g)], &[], &cfg(2.0, 2.0, 1.0), 0.05).unwrap();
    let full = r.row("full").unwrap().get("estimate").unwrap();
    assert!(full <= k.l1_norm() + 1e-10, "{full} vs {}", k.l1_norm());
    assert!(full > 0.0);
}

#[test]
fn corpus_is_deterministic_and_named() {
    let a = corpus_generate(CorpusKind::RandomSymbol, &[4, 6], 3, 9).unwrap();
    let b = corpus_generate(CorpusKind::RandomSymbol, &[4, 6], 3, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 6);
    assert_eq!(a[4].name, "random-symbol-n6-001");
    assert_ne!(a[0].symbol, a[1].symbol);
    for e in &a {
        assert!(e.symbol.values().iter().all(|z| z.re.abs() <= 1.0 && z.im.abs() <= 1.0));
    }
    assert_eq!(corpus_generate(CorpusKind::Bht, &[5, 7], 4, 0).unwrap().len(), 2);
    assert!(corpus_symbol(CorpusKind::Bht, 6, 0, 0).is_err());
}

#[test]
fn corpus_kinds_parse_and_shape() {
    for k in CorpusKind::ALL {
        assert_eq!(k.to_string().parse::<CorpusKind>().unwrap(), k);
        assert_eq!(serde_json::to_value(k).unwrap(), json!(k.to_string()));
    }
    assert!("nope".parse::<CorpusKind>().is_err());
    for i in 0..4 {
        let m = corpus_symbol(CorpusKind::Modulation, 8, i, 1).unwrap();
        assert!(m.values().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        let t = corpus_symbol(CorpusKind::Tensor, 8, i, 1).unwrap();
        assert!(t.values().iter().all(|z| z.norm() <= 1.0 + 1e-12));
        let kb = corpus_symbol(CorpusKind::KernelBump, 8, i, 1).unwrap();
        assert!((kb.get(0, 0) - C::new(1.0, 0.0)).norm() < 1e-12);
        assert!(kb.values().iter().all(|z| z.norm() <= 1.0 + 1e-12));
    }
}

#[test]
fn report_round_trip_and_csv() {
    let mut r = ExperimentReport::new("demo", 3).parameter("N", [3, 5]);
    r.push(ExperimentRow::new("a").input("N", 3).metric("x", 0.1 + 0.2).assert(true));
    r.push(ExperimentRow::new("b").metric("y", 1e-300).assert(false).detail(json!({"w": [1, 2]})));
    let text = serde_json::to_string(&r).unwrap();
    let back: ExperimentReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    assert!(!r.passed());
    assert_eq!(r.failures().count(), 1);
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let csv = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "case,status,N,x,y");
    assert_eq!(lines[1], "a,pass,3,0.30000000000000004,");
    assert_eq!(lines[2], "b,fail,,,1e-300");
}

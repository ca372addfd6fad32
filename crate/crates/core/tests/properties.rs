use ferdisc_core::decomp::walgate_in_subspace;
use ferdisc_core::linalg::c64;
use ferdisc_core::random::{random_even_state, random_instance, random_orthogonal_pair};
use ferdisc_core::statefile::{parse_state_file, write_states};
use ferdisc_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn partition() -> impl Strategy<Value = ModePartition> {
    (1usize..=3, 1usize..=3).prop_map(|(a, b)| ModePartition::new(a, b).unwrap())
}

fn subspace() -> impl Strategy<Value = Subspace> {
    prop_oneof![Just(Subspace::E), Just(Subspace::O)]
}

fn roomy(p: &ModePartition, s: Subspace) -> bool {
    p.subspace_indices(s).len() >= 2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decomposition_invariants(p in partition(), s in subspace(), seed in any::<u64>()) {
        prop_assume!(roomy(&p, s));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = random_orthogonal_pair(&mut rng, p, s);
        let w = walgate_in_subspace(&p, s, a.amplitudes(), b.amplitudes(), DEFAULT_TOL).unwrap();
        prop_assert!((w.reconstruct_psi() - a.amplitudes()).norm() < 1e-10);
        prop_assert!((w.reconstruct_phi() - b.amplitudes()).norm() < 1e-10);
        prop_assert!(w.max_pair_overlap() < 1e-10);
        for (i, x) in w.alice_basis.iter().enumerate() {
            for (j, y) in w.alice_basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((x.dotc(y) - c64(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn split_is_idempotent_and_complete(p in partition(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_even_state(&mut rng, p);
        let s = sector_split(&psi).unwrap();
        prop_assert!((s.norm_e.powi(2) + s.norm_o.powi(2) - 1.0).abs() < 1e-12);
        let sum = s.psi_e.amplitudes() + s.psi_o.amplitudes();
        prop_assert_eq!(&sum, psi.amplitudes());
        let again = sector_split(&s.psi_e).unwrap();
        prop_assert_eq!(again.norm_o, 0.0);
        prop_assert_eq!(again.psi_e, s.psi_e);
    }

    #[test]
    fn ancilla_reweights_overlaps(p in partition(), seed in any::<u64>(), w in 0.0f64..=1.0, t in 0.0f64..6.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (psi, phi) = (random_even_state(&mut rng, p), random_even_state(&mut rng, p));
        let a = c64(w.sqrt(), 0.0);
        let b = c64(0.0, t).exp() * (1.0 - w).sqrt();
        let (se, so) = sector_overlaps(&psi, &phi).unwrap();
        let (pa, fa) = (attach_ancilla(&psi, a, b).unwrap(), attach_ancilla(&phi, a, b).unwrap());
        let (se2, so2) = sector_overlaps(&pa, &fa).unwrap();
        prop_assert!((se2 - (se * w + so * (1.0 - w))).norm() < 1e-12);
        prop_assert!((so2 - (so * w + se * (1.0 - w))).norm() < 1e-12);
    }

    #[test]
    fn ancilla_on_orthogonal_pairs(p in partition(), seed in any::<u64>(), w in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_even_state(&mut rng, p);
        let raw = random_even_state(&mut rng, p);
        // Gram-Schmidt a second state against the first.
        let phi = FockVector::new(p, raw.amplitudes() - psi.amplitudes() * psi.inner(&raw)).unwrap().normalized().unwrap();
        let (se, _) = sector_overlaps(&psi, &phi).unwrap();
        let a = c64(w.sqrt(), 0.0);
        let b = c64((1.0 - w).sqrt(), 0.0);
        let (pa, fa) = (attach_ancilla(&psi, a, b).unwrap(), attach_ancilla(&phi, a, b).unwrap());
        let (se2, _) = sector_overlaps(&pa, &fa).unwrap();
        prop_assert!((se2 - se * (2.0 * w - 1.0)).norm() < 1e-12);
    }

    #[test]
    fn global_phases_change_nothing(p in partition(), seed in any::<u64>(), t1 in 0.0f64..6.3, t2 in 0.0f64..6.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, p);
        let rotated = DiscriminationInstance::new(
            inst.psi.scaled(c64(0.0, t1).exp()),
            inst.phi.scaled(c64(0.0, t2).exp()),
            inst.prior_p,
        ).unwrap();
        let sp = sector_projectors(&p);
        let (d1, d2) = (delta(&inst), delta(&rotated));
        prop_assert!((helstrom_error(&d1) - helstrom_error(&d2)).abs() < 1e-12);
        prop_assert!((locc_error(&d1, &sp).unwrap() - locc_error(&d2, &sp).unwrap()).abs() < 1e-12);
        prop_assert_eq!(is_locc_optimal(&d1, &sp, DEFAULT_TOL), is_locc_optimal(&d2, &sp, DEFAULT_TOL));
    }

    #[test]
    fn error_ordering(p in partition(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, p);
        let d = delta(&inst);
        let (hel, locc) = (helstrom_error(&d), locc_error(&d, &sector_projectors(&p)).unwrap());
        let guess = inst.prior_p.min(inst.prior_q());
        prop_assert!(hel >= -1e-12);
        prop_assert!(hel <= locc + 1e-12);
        prop_assert!(locc <= guess + 1e-12);
        prop_assert!(guess <= 0.5);
    }

    #[test]
    fn same_subspace_pairs_are_perfect(p in partition(), s in subspace(), seed in any::<u64>()) {
        prop_assume!(roomy(&p, s));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = random_orthogonal_pair(&mut rng, p, s);
        let verdict = classify_perfect(&a, &b, DEFAULT_TOL).unwrap();
        prop_assert_eq!(verdict.case, VerdictCase::SingleSubspace);
        let proto = build_perfect_protocol(&verdict, &a, &b, DEFAULT_TOL).unwrap();
        let inst = DiscriminationInstance::new(a, b, 0.5).unwrap();
        prop_assert!(proto.analytic_error(&inst) < 1e-10);
    }

    #[test]
    fn optimal_protocol_round_trips(p in partition(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, p);
        let d = delta(&inst);
        let sp = sector_projectors(&p);
        let proto = build_optimal_locc_protocol(&d, &sp, DEFAULT_TOL).unwrap();
        proto.validate(1e-9).unwrap();
        let back = LoccProtocol::from_json(&proto.to_json().unwrap()).unwrap();
        prop_assert!((back.analytic_error(&inst) - locc_error(&d, &sp).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn state_files_round_trip(p in partition(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_even_state(&mut rng, p), random_even_state(&mut rng, p));
        let text = write_states(&[(Some("psi"), &a), (Some("phi"), &b)]).unwrap();
        let back = parse_state_file(&text, "mem").unwrap().fock_states(false).unwrap();
        prop_assert_eq!(&back[0], &a);
        prop_assert_eq!(&back[1], &b);
    }
}

use proptest::prelude::*;
use qwiretap_core::channels::{amplitude_damping, apply_to_subsystem, isometric_extension, WiretapChannel};
use qwiretap_core::codec::maxerror::{draw_permutations, permuted_max_error, spiky_fixture};
use qwiretap_core::codec::secrecy::SecrecyModel;
use qwiretap_core::codec::{
    conditional_types, generate_codebook, heisenberg_weyl, keyed_unitary, ErrorMatrix, GammaKey, KeyCount, Provenance,
};
use qwiretap_core::ensembles::Ensemble;
use qwiretap_core::linalg::{
    partial_trace, tensor_product, trace_distance, ComplexMatrix, DimensionList, C64, ZERO,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn channel(gamma: f64) -> WiretapChannel {
    isometric_extension(&amplitude_damping(gamma).unwrap()).unwrap()
}

fn all_sequences(n: usize) -> Vec<Vec<usize>> {
    (0..1usize << n).map(|i| (0..n).map(|b| i >> (n - 1 - b) & 1).collect()).collect()
}

/// `U(γ)` on `Aⁿ` assembled directly from Schmidt vectors and Weyl blocks.
fn oracle_unitary(model: &SecrecyModel, x_n: &[usize], key: &GammaKey) -> ComplexMatrix {
    let d = conditional_types(x_n, 2).unwrap();
    let dim = 1 << x_n.len();
    let mut u = ComplexMatrix::zeros(dim, dim);
    for (class, &(a, b, c)) in d.classes.iter().zip(&key.triples) {
        let v = heisenberg_weyl(class.size(), a, b).unwrap();
        let sign = if c == 1 { -1.0 } else { 1.0 };
        let kets: Vec<Vec<C64>> = class
            .members
            .iter()
            .map(|y| {
                let mut k = vec![C64::new(1.0, 0.0)];
                for (&x, &yy) in x_n.iter().zip(y) {
                    let col = model.schmidt(x).a_basis.column(yy);
                    k = k.iter().flat_map(|p| col.iter().map(move |q| p * q)).collect();
                }
                k
            })
            .collect();
        for i in 0..class.size() {
            for j in 0..class.size() {
                u.add_scaled(&ComplexMatrix::outer(&kets[i], &kets[j]).scale_complex(v[(i, j)]), sign).unwrap();
            }
        }
    }
    u
}

/// Explicit density-matrix construction of Eve's state on `E₁E₂G₂₁G₂₂` for n = 2.
fn oracle_eve_state(model: &SecrecyModel, chan: &WiretapChannel, x_n: &[usize; 2], key: &GammaKey) -> ComplexMatrix {
    let ens = model.ensemble();
    let (p0, p1) = (ens.psi_ag2(x_n[0]).unwrap(), ens.psi_ag2(x_n[1]).unwrap());
    // ordering A1 A2 G1 G2
    let mut psi = vec![ZERO; 16];
    for a1 in 0..2 {
        for a2 in 0..2 {
            for g1 in 0..2 {
                for g2 in 0..2 {
                    psi[((a1 * 2 + a2) * 2 + g1) * 2 + g2] = p0[a1 * 2 + g1] * p1[a2 * 2 + g2];
                }
            }
        }
    }
    let rho = ComplexMatrix::projector(&psi);
    let u = tensor_product(&oracle_unitary(model, x_n, key), &ComplexMatrix::identity(4));
    let rho = rho.conjugate_by(&u).unwrap();
    let dims = DimensionList::new(vec![2, 2, 2, 2]).unwrap();
    let (rho, dims) = apply_to_subsystem(chan, &rho, &dims, 0).unwrap();
    let (rho, dims) = apply_to_subsystem(chan, &rho, &dims, 2).unwrap();
    // B1 E1 B2 E2 G1 G2 -> keep E1 E2 G1 G2
    partial_trace(&rho, &dims, &[1, 3, 4, 5]).unwrap().symmetrized()
}

#[test]
fn keyed_unitaries_are_unitary_for_every_key_up_to_three_letters() {
    for n in 1..=3 {
        for x_n in all_sequences(n) {
            let d = conditional_types(&x_n, 2).unwrap();
            let size = d.key_space_size().unwrap();
            for i in 0..size {
                let u = keyed_unitary(&d, &GammaKey::from_index(&d, i).unwrap()).unwrap();
                assert!(u.is_unitary(1e-10), "x_n {x_n:?}, key {i}");
            }
        }
    }
}

#[test]
fn eve_state_matches_explicit_sixteen_dimensional_construction() {
    let chan = channel(0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for beta in [1.0, 0.4] {
        let model = SecrecyModel::new(&chan, &Ensemble::bitflip_family(beta).unwrap()).unwrap();
        for x_n in [[0, 0], [0, 1], [1, 1]] {
            let d = model.type_decomposition(&x_n).unwrap();
            let id = GammaKey::identity(&d);
            let oracle_id = oracle_eve_state(&model, &chan, &x_n, &id);
            let ours_id = model.eve_state(&x_n, &id).unwrap();
            for _ in 0..5 {
                let key = GammaKey::random(&d, &mut rng);
                let oracle = trace_distance(&oracle_eve_state(&model, &chan, &x_n, &key), &oracle_id).unwrap();
                let ours = trace_distance(&model.eve_state(&x_n, &key).unwrap(), &ours_id).unwrap();
                assert!((oracle - ours).abs() < 1e-10, "{x_n:?}: {oracle} vs {ours}");
            }
            let seq = model.keyed_sequence(&x_n).unwrap();
            let key = GammaKey::random(&d, &mut rng);
            let diff = seq.computational_unitary(&key).unwrap().max_abs_diff(&oracle_unitary(&model, &x_n, &key)).unwrap();
            assert!(diff < 1e-10);
        }
    }
}

#[test]
fn zeta_matches_analytic_twirl() {
    // Averaging over all keys projects onto each class and depolarizes it:
    // ζ = Σ_t N(Π_t/|T_t| ⊗ tr_A[(Π_t ⊗ 1)ψψ†]) with N the channel on each A.
    let chan = channel(0.3);
    for beta in [1.0, 0.25] {
        let model = SecrecyModel::new(&chan, &Ensemble::bitflip_family(beta).unwrap()).unwrap();
        for x_n in [vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 0]] {
            let n = x_n.len();
            let seq = model.keyed_sequence(&x_n).unwrap();
            let zeta = model.zeta(&x_n, 0).unwrap();
            assert!(zeta.provenance.exhaustive);
            let dim_a = 1 << n;
            let mut psi = vec![C64::new(1.0, 0.0)];
            let mut a_psi = Vec::new();
            for &x in &x_n {
                a_psi.push(model.ensemble().psi_ag2(x).unwrap());
            }
            // ordering A^n G2^n
            psi = {
                let mut v = vec![ZERO; dim_a * dim_a];
                for a in 0..dim_a {
                    for g in 0..dim_a {
                        let mut amp = psi[0];
                        for i in 0..n {
                            let (ai, gi) = (a >> (n - 1 - i) & 1, g >> (n - 1 - i) & 1);
                            amp *= a_psi[i][ai * 2 + gi];
                        }
                        v[a * dim_a + g] = amp;
                    }
                }
                v
            };
            let rho = ComplexMatrix::projector(&psi);
            let basis = seq.basis();
            let mut twirled = ComplexMatrix::zeros(dim_a * dim_a, dim_a * dim_a);
            let mut offset = 0;
            for class in &seq.decomposition().classes {
                let s = class.size();
                let mut proj = ComplexMatrix::zeros(dim_a, dim_a);
                for j in offset..offset + s {
                    let col = basis.column(j);
                    proj.add_scaled(&ComplexMatrix::outer(&col, &col), 1.0).unwrap();
                }
                let cut = tensor_product(&proj, &ComplexMatrix::identity(dim_a));
                let projected = cut.matmul(&rho).unwrap().matmul(&cut).unwrap();
                let dims = DimensionList::new(vec![dim_a, dim_a]).unwrap();
                let g_part = partial_trace(&projected, &dims, &[1]).unwrap();
                twirled.add_scaled(&tensor_product(&proj.scale(1.0 / s as f64), &g_part), 1.0).unwrap();
                offset += s;
            }
            let mut dims = DimensionList::new(vec![2; 2 * n]).unwrap();
            let mut state = twirled;
            for i in 0..n {
                let (s, d) = apply_to_subsystem(&chan, &state, &dims, 2 * i).unwrap();
                state = s;
                dims = d;
            }
            // B1 E1 .. Bn En G1 .. Gn; keep E's and G's
            let keep: Vec<usize> = (0..n).map(|i| 2 * i + 1).chain(2 * n..3 * n).collect();
            let oracle = partial_trace(&state, &dims, &keep).unwrap().symmetrized();
            // ours is ordered (G1 E1 G2 E2); compare spectra-independent of ordering via
            // trace distance to the (ordering-matched) identity-key state
            let id = GammaKey::identity(seq.decomposition());
            let ours_gap = trace_distance(&zeta.state, &seq.eve_state(&id).unwrap()).unwrap();
            let oracle_id = {
                let mut dims = DimensionList::new(vec![2; 2 * n]).unwrap();
                let mut st = rho.clone();
                for i in 0..n {
                    let (s, d) = apply_to_subsystem(&chan, &st, &dims, 2 * i).unwrap();
                    st = s;
                    dims = d;
                }
                partial_trace(&st, &dims, &keep).unwrap().symmetrized()
            };
            let oracle_gap = trace_distance(&oracle, &oracle_id).unwrap();
            assert!((ours_gap - oracle_gap).abs() < 1e-10, "beta {beta}, {x_n:?}: {ours_gap} vs {oracle_gap}");
            let mut e1 = qwiretap_core::linalg::hermitian_eigenvalues(&zeta.state).unwrap();
            let mut e2 = qwiretap_core::linalg::hermitian_eigenvalues(&oracle).unwrap();
            e1.sort_by(f64::total_cmp);
            e2.sort_by(f64::total_cmp);
            for (a, b) in e1.iter().zip(&e2) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn delta_star_depends_only_on_each_message_row() {
    let chan = channel(0.3);
    let model = SecrecyModel::new(&chan, &Ensemble::bitflip_family(0.7).unwrap()).unwrap();
    let cb = generate_codebook(3, 1.0, 0.5, &[0.5, 0.5], 77).unwrap();
    let perm = [3, 0, 7, 1, 6, 2, 5, 4];
    let relabelled = cb.relabel_messages(&perm);
    for (new, &old) in perm.iter().enumerate() {
        let a = model.delta_star(&cb, old).unwrap();
        let b = model.delta_star(&relabelled, new).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn covering_and_excess_trends_on_a_small_seed_set() {
    let chan = channel(0.3);
    let model = SecrecyModel::new(&chan, &Ensemble::bitflip_family(1.0).unwrap()).unwrap();
    let seeds = 0..30u64;
    let means: Vec<f64> = [0.0, 1.0, 2.0]
        .iter()
        .map(|&r0| seeds.clone().map(|s| model.covering_sample(3, 0.0, r0, s).unwrap().mean()).sum::<f64>() / 30.0)
        .collect();
    assert!(means.windows(2).all(|w| w[0] > w[1]), "{means:?}");
    let excess: Vec<f64> = [KeyCount::Sampled(1), KeyCount::Sampled(16), KeyCount::Full]
        .iter()
        .map(|&k| seeds.clone().map(|s| model.excess_sample(2, k, 0.0, s).unwrap().mean()).sum::<f64>() / 30.0)
        .collect();
    assert!(excess.windows(2).all(|w| w[0] > w[1]), "{excess:?}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn permuted_max_is_sandwiched(seed in any::<u64>(), rows in 1usize..12, cols in 1usize..12, count in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries: Vec<f64> = (0..rows * cols).map(|_| rand::Rng::random_range(&mut rng, 0.0..=1.0)).collect();
        let e = ErrorMatrix::new(rows, cols, entries, Provenance::Synthetic).unwrap();
        let perms = draw_permutations(cols, count, &mut rng);
        let m = permuted_max_error(&e, &perms).unwrap();
        prop_assert!(m <= e.max());
        prop_assert!(m >= e.grand_mean() - 1e-12);
    }

    #[test]
    fn spiky_fixtures_are_valid(seed in any::<u64>()) {
        let e = spiky_fixture(64, 64, 0.05, seed).unwrap();
        prop_assert!(e.row_means().iter().all(|&r| r <= 0.05));
    }
}

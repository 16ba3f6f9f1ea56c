mod common;

use vibefactor::decomp::{cp_reconstruct, CpOptions};
use vibefactor::hamiltonian::{
    factorize, one_norm_factorized, one_norm_unfactorized, FactorMethod, FactorizedModel,
    HamiltonianModel, ModelHeader, NormMode,
};
use vibefactor::oracle::{
    block_norm_check, dense_from_factorized, dense_hamiltonian, DenseOperator,
};

fn rank_one_model(seed: u64, orbitals: usize) -> HamiltonianModel {
    let base = common::random_model(seed, 2, 2, 0, 0, 0.0);
    let mut h = HamiltonianModel::new(ModelHeader {
        orbitals,
        lv: 4,
        lvc: if orbitals > 0 { 3 } else { 0 },
        ..base.header.clone()
    })
    .unwrap();
    let v = common::unit(&[1.0, 0.3 + seed as f64 * 0.1]);
    for k in 3..=4 {
        h.insert_vib(cp_reconstruct(&common::cp(k, &[0.2 / k as f64], &[&v])).unwrap())
            .unwrap();
    }
    if orbitals > 0 {
        let w = common::unit(&[-0.4, 1.0]);
        h.insert_vibc(
            0,
            orbitals - 1,
            cp_reconstruct(&common::cp(3, &[0.05], &[&w])).unwrap(),
        )
        .unwrap();
    }
    h
}

#[test]
fn exact_factorizations_reproduce_the_operator() {
    for seed in 0..4 {
        for orbitals in 0..=2 {
            let h = rank_one_model(seed, orbitals);
            let raw = dense_hamiltonian(&h).unwrap();
            assert!(raw.asymmetry() < 1e-12);
            for method in [FactorMethod::Cp, FactorMethod::Tucker] {
                let f = factorize(&h, method, 1e-9, seed, &CpOptions::default()).unwrap();
                let diff = dense_from_factorized(&f)
                    .unwrap()
                    .relative_difference(&raw)
                    .unwrap();
                assert!(diff < 1e-10, "seed {seed} N={orbitals} {method}: {diff}");
            }
        }
    }
}

#[test]
fn tucker_matches_on_generic_models() {
    for seed in 0..5 {
        let h = common::random_model(seed, 2, 2, 4, 1, 0.1);
        let f = factorize(&h, FactorMethod::Tucker, 0.0, 0, &CpOptions::default()).unwrap();
        let diff = dense_from_factorized(&f)
            .unwrap()
            .relative_difference(&dense_hamiltonian(&h).unwrap())
            .unwrap();
        assert!(diff < 1e-10, "{diff}");
    }
}

#[test]
fn harmonic_part_alone_is_exact() {
    let h = common::random_model(1, 2, 2, 0, 0, 0.0);
    let f = FactorizedModel::empty(h.header.clone(), FactorMethod::Cp);
    assert_eq!(
        dense_from_factorized(&f).unwrap(),
        dense_hamiltonian(&h).unwrap()
    );
}

#[test]
fn encoding_lambda_bounds_the_spectrum() {
    for seed in 0..6 {
        for orbitals in [0, 1, 2] {
            let h = common::random_model(seed, 2, 2, 4, orbitals, 0.3);
            let lambda = one_norm_unfactorized(&h, NormMode::Encoding);
            let ratio = block_norm_check(&h, lambda).unwrap();
            assert!(ratio <= 1.0 + 1e-10, "{ratio}");
            let halved = block_norm_check(&h, 2.0 * lambda).unwrap();
            assert!((halved - ratio / 2.0).abs() < 1e-14);

            for method in [FactorMethod::Cp, FactorMethod::Tucker] {
                let f = factorize(&h, method, 0.05, seed, &CpOptions::default()).unwrap();
                let op = dense_from_factorized(&f).unwrap();
                let lf = one_norm_factorized(&f, NormMode::Encoding);
                assert!(op.spectral_norm() / lf <= 1.0 + 1e-10);
            }
        }
    }
    let h = HamiltonianModel::harmonic(vec![0.3, 0.7], 3).unwrap();
    let lambda = one_norm_unfactorized(&h, NormMode::Encoding);
    assert!(block_norm_check(&h, lambda).unwrap() <= 1.0);
}

#[test]
fn small_tensor_errors_give_small_operator_errors() {
    for seed in 0..6 {
        let h = common::random_model(seed, 2, 2, 4, 1, 0.2);
        let f = factorize(&h, FactorMethod::Cp, 1e-3, seed, &CpOptions::default()).unwrap();
        assert!(f.max_eps_f() <= 1e-3);
        let full = dense_hamiltonian(&h).unwrap();
        let anh = DenseOperator {
            matrix: &full.matrix
                - dense_hamiltonian(&HamiltonianModel::new(h.header.clone()).unwrap())
                    .unwrap()
                    .matrix,
        };
        let op = dense_from_factorized(&f).unwrap();
        let diff = op.relative_difference(&full).unwrap();
        assert!(diff <= 1e-2, "seed {seed}: {diff}");
        // also against the anharmonic part alone
        let d_anh = (&op.matrix - &full.matrix).norm() / anh.frobenius();
        assert!(d_anh <= 1e-2, "seed {seed}: {d_anh}");
    }
}

#[test]
fn distinct_mode_operators_commute() {
    let q = vibefactor::oracle::dense_q(2).unwrap().matrix;
    let i3 = nalgebra::DMatrix::<f64>::identity(3, 3);
    let q0 = q.kronecker(&i3);
    let q1 = i3.kronecker(&q);
    assert_eq!(&q0 * &q1, &q1 * &q0);
}

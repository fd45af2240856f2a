mod common;

use std::sync::Arc;

use common::*;
use mfl_core::fock::*;
use mfl_core::hartree::{evolve, Interaction};
use mfl_core::manybody::Marginal;
use mfl_core::pairexc::{pair_step, PairState};
use mfl_core::potential::{Profile, ScaledPotential};
use mfl_core::spectral::{Field, Grid, Kernel};
use mfl_core::C64;
use proptest::prelude::*;

fn orbital(grid: Grid, norm: f64) -> Field {
    Field::from_fn(grid, |x| C64::from_polar((-(x[0] - 0.2).powi(2) / 2.0).exp(), 0.3 * x[0]))
        .normalized()
        .unwrap()
        .scaled(C64::new(norm, 0.0))
}

#[test]
fn basis_enumeration_is_bijective_with_binomial_dimension() {
    for (m, n) in [(1, 5), (3, 4), (4, 8), (6, 6)] {
        let b = FockBasis::new(m, n).unwrap();
        assert_eq!(b.dim(), fock_dimension(m, n));
        for i in 0..b.dim() {
            assert_eq!(b.index_of(b.occupation(i)), Some(i));
        }
        assert_eq!(b.occupation(0).iter().map(|&x| x as usize).sum::<usize>(), 0);
    }
    assert_eq!(fock_dimension(6, 12), 18564);
    assert!(FockBasis::new(13, 2).is_err());
    assert!(FockBasis::new(4, 17).is_err());
}

#[test]
fn ladder_operators() {
    let basis = Arc::new(FockBasis::new(3, 5).unwrap());
    let ops = build_ops(&basis);
    let vac = FockState::vacuum(basis.clone());
    let num = number_operator(&basis);
    for j in 0..3 {
        let a = &ops.annihilation[j];
        let ad = &ops.creation[j];
        assert!(a.matvec(vac.coeffs()).iter().all(|z| z.norm() == 0.0));
        let n_j = ad.mul(a);
        for i in 0..basis.dim() {
            assert!((n_j.get(i, i) - f64::from(basis.occupation(i)[j])).norm() < 1e-14);
        }
        // [a_j, a†_j] = 1 below the cutoff shell, entrywise.
        let comm = a.commutator(ad);
        for i in basis.shell(0).start..basis.shell(4).end {
            for k in 0..basis.dim() {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((comm.get(i, k) - want).norm() < 1e-14);
            }
        }
        assert_eq!(ad.sub(&a.adjoint()).max_abs(), 0.0);
    }
    for i in 0..basis.dim() {
        assert_eq!(num.get(i, i).re, basis.particles(i) as f64);
    }
}

#[test]
fn hamiltonian_conserves_particle_number_exactly() {
    let grid = Grid::line(6, 6.0).unwrap();
    let v = ScaledPotential::sample_lattice(Profile::attractive(2.0, 1.5).unwrap(), 4, 0.0, grid).unwrap();
    let basis = FockBasis::new(6, 6).unwrap();
    let h = fock_hamiltonian(&basis, &v, 4).unwrap();
    assert_eq!(h.commutator(&number_operator(&basis)).max_abs(), 0.0);
    assert!(h.hermiticity_defect() < 1e-14);
}

#[test]
fn sector_restriction_matches_tensor_hamiltonian() {
    for (m, n) in [(4, 2), (6, 2), (6, 3)] {
        let grid = Grid::line(m, 6.0).unwrap();
        let v = ScaledPotential::sample_lattice(Profile::attractive(1.5, 2.0).unwrap(), n, 0.0, grid).unwrap();
        let d = sector_restriction_defect(&v, n);
        assert!(d < 1e-10, "m={m}, N={n}: {d:e}");
    }
}

#[test]
fn free_single_particle_spectrum_is_the_laplacian_symbol() {
    let grid = Grid::line(6, 6.0).unwrap();
    let basis = FockBasis::new(6, 2).unwrap();
    let h = fock_hamiltonian(&basis, &ScaledPotential::zero(grid), 1).unwrap();
    let r = basis.shell(1);
    let mut block = Vec::new();
    for i in r.clone() {
        for j in r.clone() {
            block.push(h.get(i, j));
        }
    }
    let eig = mfl_core::linalg::eigh(&block, 6).unwrap();
    let mut want: Vec<f64> = grid.wavenumbers().iter().map(|k| -k * k).collect();
    want.sort_by(f64::total_cmp);
    for (a, b) in eig.values.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn coherent_state_is_poissonian() {
    let grid = Grid::line(4, 4.0).unwrap();
    let basis = Arc::new(FockBasis::new(4, 16).unwrap());
    let phi = orbital(grid, 0.5);
    let n = 8;
    let psi = coherent_state(basis.clone(), &phi, n).unwrap();
    let mean = n as f64 * phi.mass();
    assert!((psi.number_expectation() - mean).abs() / mean < 1e-3);
    // Direct product formula c(n₁..n_m) = e^{-|α|²/2} Π α_j^{n_j}/√(n_j!).
    let dx = grid.spacing();
    let alpha: Vec<C64> = phi.values().iter().map(|z| z * (n as f64 * dx).sqrt()).collect();
    let total: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    for i in 0..basis.shell(10).end {
        let mut c = C64::new((-total / 2.0).exp(), 0.0);
        for (a, &k) in alpha.iter().zip(basis.occupation(i)) {
            let fact: f64 = (1..=k as u32).map(f64::from).product();
            c *= a.powu(u32::from(k)) / fact.sqrt();
        }
        assert!((psi.coeffs()[i] - c).norm() < 1e-6, "state {i}");
    }
    assert!(weyl_displace(&psi, &Field::zeros(grid), 1.0).unwrap().coeffs() == psi.coeffs());
}

#[test]
fn weyl_conjugation_shifts_annihilators() {
    let grid = Grid::line(4, 4.0).unwrap();
    let basis = Arc::new(FockBasis::new(4, 14).unwrap());
    let phi = orbital(grid, 0.5);
    let d = weyl_shift_defect(&basis, &phi, 1.0, 2);
    assert!(d < 1e-8, "{d:e}");
}

#[test]
fn bogoliubov_conjugation_matches_series_kernels() {
    let grid = Grid::line(4, 4.0).unwrap();
    let basis = Arc::new(FockBasis::new(4, 8).unwrap());
    let k = random_symmetric_kernel(grid, 0.05, 7);
    let d = bogoliubov_conjugation_defect(&basis, &k, 2);
    assert!(d < 1e-6, "{d:e}");
}

#[test]
fn pair_excited_vacuum_counts_sh_norm() {
    let grid = Grid::line(4, 4.0).unwrap();
    let basis = Arc::new(FockBasis::new(4, 10).unwrap());
    let k = random_symmetric_kernel(grid, 0.05, 11);
    let psi = bogoliubov_apply(&FockState::vacuum(basis), &k, 1.0).unwrap();
    let sh = mfl_core::spectral::sh_series(&k, mfl_core::spectral::DEFAULT_SERIES_TOL).unwrap();
    let want = sh.l2().powi(2);
    assert!((psi.number_expectation() - want).abs() / want < 1e-2);
    assert!((psi.norm() - 1.0).abs() < 1e-10);
    let zero = bogoliubov_apply(&psi, &Kernel::zeros(grid).unwrap(), 1.0).unwrap();
    assert_eq!(zero.coeffs(), psi.coeffs());
}

#[test]
fn free_coherent_flow_stays_coherent() {
    let grid = Grid::line(4, 4.0).unwrap();
    let basis = Arc::new(FockBasis::new(4, 16).unwrap());
    let phi = orbital(grid, 0.5);
    let n = 8;
    let h = fock_hamiltonian(&basis, &ScaledPotential::zero(grid), n).unwrap();
    let psi0 = coherent_state(basis.clone(), &phi, n).unwrap();
    assert_eq!(evolve_exact(&psi0, &h, 0.0).unwrap().coeffs(), psi0.coeffs());
    let t = 0.7;
    let psi = evolve_exact(&psi0, &h, t).unwrap();
    let phit = evolve(&phi, &Interaction::Contact(0.0), t, 1).unwrap();
    let want = coherent_state(basis, &phit, n).unwrap();
    assert!(want.inner(&psi).norm() > 1.0 - 1e-6);
    assert!((psi.norm() - 1.0).abs() < 1e-9);
}

#[test]
fn exact_evolution_conserves_energy() {
    let grid = Grid::line(4, 4.0).unwrap();
    let basis = Arc::new(FockBasis::new(4, 12).unwrap());
    let v = ScaledPotential::sample_lattice(Profile::attractive(2.0, 1.5).unwrap(), 8, 0.0, grid).unwrap();
    let h = fock_hamiltonian(&basis, &v, 8).unwrap();
    let psi0 = coherent_state(basis, &orbital(grid, 0.5), 8).unwrap();
    let e0 = psi0.expectation(&h).re;
    let mut psi = psi0;
    for _ in 0..5 {
        psi = evolve_exact(&psi, &h, 0.2).unwrap();
        assert!((psi.expectation(&h).re - e0).abs() < 1e-9 * e0.abs().max(1.0));
        assert!((psi.norm() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn free_ansatz_is_exact() {
    let grid = Grid::line(4, 4.0).unwrap();
    let basis = Arc::new(FockBasis::new(4, 16).unwrap());
    let phi = orbital(grid, 0.5);
    let n = 8;
    let v = ScaledPotential::zero(grid);
    let h = fock_hamiltonian(&basis, &v, n).unwrap();
    let exact = evolve_exact(&coherent_state(basis.clone(), &phi, n).unwrap(), &h, 0.5).unwrap();
    let mut pair = PairState::new(phi, v).unwrap();
    for _ in 0..50 {
        pair = pair_step(&pair, 0.01).unwrap();
    }
    let (approx, ill) = approx_state(basis, &pair.phi, &pair.s2, &pair.p2, n).unwrap();
    assert!(!ill);
    assert!(fock_distance(&exact, &approx) < 1e-6);
}

#[test]
fn phase_optimized_distance() {
    let basis = Arc::new(FockBasis::new(2, 2).unwrap());
    let a = basis_vector(&basis, 1);
    let b = basis_vector(&basis, 2);
    assert_eq!(fock_distance(&a, &a), 0.0);
    let rotated = FockState::from_coeffs(basis, a.coeffs().iter().map(|z| z * C64::from_polar(1.0, 0.7)).collect()).unwrap();
    assert!(fock_distance(&a, &rotated) < 1e-7);
    assert!((fock_distance(&a, &b) - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn coherent_marginal_is_rank_one() {
    let grid = Grid::line(4, 4.0).unwrap();
    let basis = Arc::new(FockBasis::new(4, 16).unwrap());
    let phi = orbital(grid, 0.5);
    let psi = coherent_state(basis, &phi, 8).unwrap();
    let g = fock_marginal(&psi, grid).unwrap();
    let unit = phi.normalized().unwrap();
    let d = g.kernel().sub(Marginal::pure(&unit).unwrap().kernel()).unwrap().max_abs();
    assert!(d < 1e-6, "{d:e}");
    assert!((g.trace() - 1.0).abs() < 1e-8);
}

#[test]
fn one_particle_state_marginal() {
    let grid = Grid::line(4, 4.0).unwrap();
    let basis = Arc::new(FockBasis::new(4, 3).unwrap());
    for i in basis.shell(1) {
        let site = basis.occupation(i).iter().position(|&x| x == 1).unwrap();
        let g = fock_marginal(&basis_vector(&basis, i), grid).unwrap();
        let m = g.kernel().operator_matrix();
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == site && c == site { 1.0 } else { 0.0 };
                assert!((m[r * 4 + c] - want).norm() < 1e-14);
            }
        }
    }
    assert!(fock_marginal(&FockState::vacuum(basis), grid).is_err());
}

#[test]
fn leakage_guard_fires_for_small_cutoff() {
    let grid = Grid::line(4, 4.0).unwrap();
    let basis = Arc::new(FockBasis::new(4, 4).unwrap());
    let err = coherent_state(basis, &orbital(grid, 1.0), 16).unwrap_err();
    assert!(matches!(err, mfl_core::Error::Leakage { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fock_marginals_are_hermitian_psd_unit_trace(seed in 0u64..500) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::line(4, 4.0).unwrap();
        let basis = Arc::new(FockBasis::new(4, 4).unwrap());
        let c: Vec<C64> = (0..basis.dim()).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let psi = FockState::from_coeffs(basis, c).unwrap();
        let g = fock_marginal(&psi, grid).unwrap();
        prop_assert!(g.hermiticity_defect() < 1e-12);
        prop_assert!((g.trace() - 1.0).abs() < 1e-12);
        prop_assert!(g.min_eigenvalue().unwrap() > -1e-12);
    }

    #[test]
    fn weyl_displacement_is_unitary(seed in 0u64..500) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::line(4, 4.0).unwrap();
        let basis = Arc::new(FockBasis::new(4, 12).unwrap());
        let vals: Vec<C64> = (0..4).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let phi = Field::new(grid, vals).unwrap().scaled(C64::new(0.5, 0.0));
        let psi = weyl_displace(&FockState::vacuum(basis), &phi, 1.0).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
    }
}

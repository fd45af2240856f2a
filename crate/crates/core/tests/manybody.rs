use mfl_core::linalg::dense::{matvec, Lu};
use mfl_core::manybody::*;
use mfl_core::potential::{Profile, ScaledPotential};
use mfl_core::spectral::{Field, Grid};
use mfl_core::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(m: usize, l: f64) -> (Grid, Field, ScaledPotential) {
    let grid = Grid::line(m, l).unwrap();
    let phi = Field::from_fn(grid, |x| C64::from_polar((-(x[0] - 0.3).powi(2) / 2.0).exp(), 0.4 * x[0])).normalized().unwrap();
    let v = ScaledPotential::sample_scaled(Profile::attractive(2.0, 1.5).unwrap(), 2, 0.0, grid).unwrap();
    (grid, phi, v)
}

fn random_state(grid: Grid, n: usize, seed: u64) -> ManyBodyState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = grid.points().pow(n as u32);
    let vals: Vec<C64> = (0..len).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let psi = ManyBodyState::new(grid, n, vals).unwrap();
    let s = 1.0 / psi.norm();
    ManyBodyState::new(grid, n, psi.values().iter().map(|z| z * s).collect()).unwrap()
}

#[test]
fn marginal_of_product_is_rank_one() {
    let (_, phi, _) = setup(16, 6.0);
    for n in 2..=4 {
        let gamma = marginal(&factorized_state(&phi, n).unwrap());
        let pure = Marginal::pure(&phi).unwrap();
        let d = gamma.kernel().sub(pure.kernel()).unwrap().max_abs();
        assert!(d < 1e-10, "N={n}: {d:e}");
        assert!(trace_distance(&gamma, &phi).unwrap() < 1e-10);
    }
}

#[test]
fn two_body_solver_matches_crank_nicolson() {
    let (grid, phi, v) = setup(32, 12.0);
    let h = dense_hamiltonian(&grid, 2, &v).unwrap();
    let dim = 32 * 32;
    let dt = 1e-3;
    let steps = 100;
    // (I + i dt/2 h) ψ⁺ = (I − i dt/2 h) ψ.
    let half = C64::new(0.0, 0.5 * dt);
    let mut lhs = h.iter().map(|z| z * half).collect::<Vec<_>>();
    let rhs_op: Vec<C64> = h.iter().map(|z| -z * half).collect::<Vec<_>>();
    let mut rhs_op = rhs_op;
    for i in 0..dim {
        lhs[i * dim + i] += 1.0;
        rhs_op[i * dim + i] += 1.0;
    }
    let lu = Lu::factor(lhs, dim).unwrap();
    let psi0 = factorized_state(&phi, 2).unwrap();
    let mut cn = psi0.values().to_vec();
    for _ in 0..steps {
        cn = lu.solve(&matvec(&rhs_op, &cn));
    }
    let mut psi = psi0.clone();
    MbPropagator::new(&v, 2, dt).unwrap().evolve_in_place(&mut psi, steps).unwrap();
    let reference = ManyBodyState::new(grid, 2, cn).unwrap();
    let d = psi.l2_distance(&reference).unwrap();
    assert!(d < 1e-4, "distance {d:e}");
}

#[test]
fn factorized_state_has_no_excitations() {
    let (_, phi, _) = setup(16, 6.0);
    for n in 2..=4 {
        let psi = factorized_state(&phi, n).unwrap();
        let a = pickl_alpha(&psi, &phi, 0.5).unwrap();
        assert_eq!(a.alpha_lambda, 0.0);
        assert!(a.alpha < 1e-28);
        assert!((a.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

/// `P_k = Σ_{|S|=k} Π_{i∈S} q_i Π_{i∉S} p_i` applied by brute force over all
/// `2^N` subsets, with `p = |φ⟩⟨φ|` as a matrix.
fn brute_force_weights(psi: &ManyBodyState, phi: &Field) -> Vec<f64> {
    let m = psi.grid().points();
    let n = psi.n();
    let dx = psi.grid().spacing();
    let u: Vec<C64> = phi.values().iter().map(|z| z * dx.sqrt()).collect();
    let mut p = vec![C64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            p[i * m + j] = u[i] * u[j].conj();
        }
    }
    let mut q = p.iter().map(|z| -z).collect::<Vec<_>>();
    for i in 0..m {
        q[i * m + i] += 1.0;
    }
    let apply = |data: &[C64], axis: usize, op: &[C64]| -> Vec<C64> {
        let stride = m.pow((n - 1 - axis) as u32);
        let mut out = vec![C64::new(0.0, 0.0); data.len()];
        for (idx, o) in out.iter_mut().enumerate() {
            let digit = (idx / stride) % m;
            let base = idx - digit * stride;
            *o = (0..m).map(|j| op[digit * m + j] * data[base + j * stride]).sum();
        }
        out
    };
    let mut w = vec![0.0; n + 1];
    for mask in 0u32..(1 << n) {
        let mut t = psi.values().to_vec();
        for axis in 0..n {
            t = apply(&t, axis, if mask & (1 << axis) != 0 { &q } else { &p });
        }
        let val: f64 = psi.values().iter().zip(&t).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * dx.powi(n as i32);
        w[mask.count_ones() as usize] += val;
    }
    w
}

#[test]
fn excitation_weights_match_brute_force_projectors() {
    let grid = Grid::line(6, 6.0).unwrap();
    let phi = Field::from_fn(grid, |x| C64::from_polar(1.0 + 0.2 * x[0], 0.3 * x[0])).normalized().unwrap();
    for (n, seed) in [(2, 1), (3, 2), (4, 3)] {
        let psi = random_state(grid, n, seed);
        let (w, q1) = excitation_weights(&psi, &phi).unwrap();
        let want = brute_force_weights(&psi, &phi);
        for (a, b) in w.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "N={n}: {a} vs {b}");
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // ‖q₁Ψ‖² = Σ_k (k/N) w_k for symmetric Ψ; random Ψ is not symmetric, so
        // only the bound q₁ ≤ 1 − w₀ is generic.
        assert!(q1 <= 1.0 - w[0] + 1e-12);
    }
}

#[test]
fn alpha_one_is_mean_excitation_fraction_for_symmetric_states() {
    let (_, phi, v) = setup(16, 6.0);
    let mut psi = factorized_state(&phi, 3).unwrap();
    MbPropagator::new(&v, 3, 1e-2).unwrap().evolve_in_place(&mut psi, 50).unwrap();
    let a = pickl_alpha(&psi, &phi, 1.0).unwrap();
    assert!(a.alpha > 0.0);
    assert!((a.alpha - a.alpha_lambda).abs() < 1e-12, "{} vs {}", a.alpha, a.alpha_lambda);
}

#[test]
fn trace_norm_is_twice_operator_norm_for_pure_differences() {
    let (grid, phi, _) = setup(16, 6.0);
    let other = Field::from_fn(grid, |x| C64::new((-(x[0] + 1.0).powi(2)).exp(), 0.0)).normalized().unwrap();
    let gamma = Marginal::pure(&other).unwrap();
    let tr = trace_distance(&gamma, &phi).unwrap();
    let op = operator_distance(&gamma, &phi).unwrap();
    assert!((tr - 2.0 * op).abs() < 1e-10, "{tr} vs 2·{op}");
}

#[test]
fn norm_energy_and_symmetry_are_conserved() {
    let (_, phi, v) = setup(16, 6.0);
    let mut psi = factorized_state(&phi, 3).unwrap();
    let e0 = many_body_energy(&psi, &v);
    let prop = MbPropagator::new(&v, 3, 1e-3).unwrap();
    for _ in 0..10 {
        prop.evolve_in_place(&mut psi, 100).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!(((many_body_energy(&psi, &v) - e0) / e0).abs() < 1e-6);
    }
    assert!(psi.symmetry_defect() < 1e-12);
}

#[test]
fn memory_guard_reports_bytes() {
    let grid = Grid::line(64, 10.0).unwrap();
    let phi = Field::gaussian(grid, 1.0).normalized().unwrap();
    let err = factorized_state_capped(&phi, 5, 1 << 30).unwrap_err();
    assert!(err.is_guard());
    assert!(err.to_string().contains(&(16u64 * 64u64.pow(5)).to_string()));
}

#[test]
fn delta_lambda_feasibility() {
    for beta in [0.05, 0.10, 0.15] {
        assert!(infimum_delta(beta).1 < 0.0, "beta={beta}");
    }
    let (lam, d) = infimum_delta(1.0 / 6.0);
    assert!(d.abs() < 1e-12 && (lam - 0.5).abs() < 1e-12);
    assert_eq!(delta_lambda(0.0, 1.0), 0.0);
}

#[test]
fn pickl_bound_calibrates_to_target() {
    let mut trace = PicklTrace::default();
    let grid = Grid::line(16, 10.0).unwrap();
    let phi = Field::gaussian(grid, 1.0);
    for i in 0..=10 {
        trace.push(0.05 * i as f64, &phi);
    }
    let c = calibrate_cv(&trace, 0.0, 0.01, 2, 0.0, 1.0).unwrap();
    assert!((pickl_bound(&trace, c, 0.0, 2, 0.0, 1.0) - 0.01).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn marginals_are_hermitian_psd_unit_trace(seed in 0u64..1000, n in 2usize..=3) {
        let grid = Grid::line(8, 6.0).unwrap();
        let psi = random_state(grid, n, seed);
        let g = marginal(&psi);
        prop_assert!(g.hermiticity_defect() < 1e-12);
        prop_assert!((g.trace() - 1.0).abs() < 1e-12);
        prop_assert!(g.min_eigenvalue().unwrap() > -1e-12);
    }

    #[test]
    fn weights_are_a_distribution(seed in 0u64..1000, lambda in 0.05f64..1.0) {
        let grid = Grid::line(6, 6.0).unwrap();
        let phi = Field::gaussian(grid, 1.0).normalized().unwrap();
        let psi = random_state(grid, 3, seed);
        let a = pickl_alpha(&psi, &phi, lambda).unwrap();
        prop_assert!(a.weights.iter().all(|&w| w >= -1e-15));
        prop_assert!((a.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(a.alpha_lambda >= -1e-15 && a.alpha_lambda <= 1.0 + 1e-12);
    }

    #[test]
    fn weight_m_is_monotone_and_capped(n in 1usize..64, lambda in 0.01f64..1.0) {
        let mut prev = 0.0;
        for k in 0..=n {
            let w = weight_m(k, n, lambda);
            prop_assert!(w >= prev && w <= 1.0);
            prev = w;
        }
    }
}

use mfl_core::hartree::*;
use mfl_core::potential::{Profile, ScaledPotential};
use mfl_core::spectral::{Field, Grid};
use mfl_core::C64;
use proptest::prelude::*;

fn datum(grid: Grid) -> Field {
    Field::from_fn(grid, |x| C64::from_polar((-x[0] * x[0] / 2.0).exp(), 0.4 * x[0])).normalized().unwrap()
}

fn attractive(grid: Grid) -> ScaledPotential {
    ScaledPotential::sample_scaled(Profile::attractive(2.0, 1.5).unwrap(), 1, 0.0, grid).unwrap()
}

#[test]
fn zero_interaction_is_free_flight() {
    let grid = Grid::line(256, 40.0).unwrap();
    let phi = datum(grid);
    let a = hartree_step(&phi, &ScaledPotential::zero(grid), 0.01).unwrap();
    assert!(a.max_abs_diff(&phi.free_propagate(0.01)).unwrap() < 1e-14);
    let b = nls_step(&phi, 0.0, 0.01).unwrap();
    assert!(b.max_abs_diff(&phi.free_propagate(0.01)).unwrap() < 1e-14);
}

#[test]
fn step_then_reverse_returns() {
    let grid = Grid::line(256, 40.0).unwrap();
    let phi = datum(grid);
    let v = attractive(grid);
    let back = hartree_step(&hartree_step(&phi, &v, 0.01).unwrap(), &v, -0.01).unwrap();
    assert!(back.max_abs_diff(&phi).unwrap() < 1e-10);
}

#[test]
fn self_convergence_is_second_order() {
    let grid = Grid::line(256, 40.0).unwrap();
    let phi = datum(grid);
    let inter = Interaction::Potential(attractive(grid));
    let reference = evolve(&phi, &inter, 0.05 / 16.0, 16 * 20).unwrap();
    let err = |dt: f64| evolve(&phi, &inter, dt, (1.0 / dt).round() as usize).unwrap().l2_distance(&reference).unwrap();
    let r = err(0.05) / err(0.025);
    assert!((3.3..=4.7).contains(&r), "ratio {r}");
}

#[test]
fn soliton_modulus_is_stationary() {
    // i∂tφ = −φ_xx − 2|φ|²φ has φ = sech(x)e^{it}; here g = −2.
    let grid = Grid::line(512, 40.0).unwrap();
    let phi = Field::from_real_fn(grid, |x| 1.0 / x[0].cosh());
    let out = evolve(&phi, &Interaction::Contact(-2.0), 1e-3, 1000).unwrap();
    let drift = out.values().iter().zip(phi.values()).map(|(a, b)| (a.norm() - b.norm()).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-6, "{drift:e}");
    assert!((out.mass() - phi.mass()).abs() < 1e-12);
}

#[test]
fn energy_values() {
    let grid = Grid::line(1024, 40.0).unwrap();
    let g = Field::gaussian(grid, 1.0);
    assert!((energy(&g, &Interaction::Contact(0.0)).unwrap() - 0.5).abs() < 1e-6);
    let c = Field::from_fn(grid, |_| C64::new(0.3, 0.0));
    assert!(energy(&c, &Interaction::Contact(0.0)).unwrap().abs() < 1e-14);
}

#[test]
fn strichartz_norms() {
    let grid = Grid::line(1024, 200.0).unwrap();
    let phi = Field::gaussian(grid, 1.0);
    let mut run = HartreeRun::new(Interaction::Contact(0.0), phi.clone(), 0.05, 10.0);
    run.record_lr = vec![6.0];
    let traj = run.run().unwrap();
    let sup = strichartz_window_norm(&traj, f64::INFINITY, 2.0, (0.0, 10.0)).unwrap();
    assert!((sup - 1.0).abs() < 1e-12);
    // (q, r) = (4, ∞) in 1D is admissible; (4, 4) is not.
    assert!(is_admissible(4.0, f64::INFINITY, 1));
    assert!(strichartz_window_norm(&traj, 4.0, 4.0, (0.0, 1.0)).is_err());
    let short = strichartz_window_norm(&traj, 4.0, f64::INFINITY, (0.0, 5.0)).unwrap();
    let long = strichartz_window_norm(&traj, 4.0, f64::INFINITY, (0.0, 10.0)).unwrap();
    // ∫₀^∞ ‖φ(t)‖∞⁴ dt = π^{-1} ∫ (1+4t²)^{-1} dt = 1/4 for the free Gaussian.
    let limit = 0.25f64.powf(0.25);
    assert!(short < long && long < 1.05 * limit, "{short} {long} {limit}");

    let zero = HartreeRun::new(Interaction::Contact(0.0), Field::zeros(grid), 0.05, 1.0).run().unwrap();
    assert_eq!(strichartz_window_norm(&zero, f64::INFINITY, 2.0, (0.0, 1.0)).unwrap(), 0.0);
}

#[test]
fn decay_fit_guards_the_horizon() {
    let grid = Grid::line(1024, 150.0).unwrap();
    let phi = Field::gaussian(grid, 1.0);
    let h = wraparound_horizon(&phi);
    let traj = HartreeRun::new(Interaction::Contact(0.0), phi, 0.05, h).run().unwrap();
    let fit = decay_fit(&traj.linf_series(), (5.0, h), Some(h)).unwrap();
    assert!((fit.exponent + 0.5).abs() < 0.05);
    assert!(decay_fit(&traj.linf_series(), (5.0, 2.0 * h), Some(h)).is_err());
}

#[test]
fn nls_limit() {
    let grid = Grid::line(4096, 40.0).unwrap();
    let phi = datum(grid);
    let p = Profile::attractive(1.0, 1.0).unwrap();
    let fixed = hartree_to_nls_distance(&phi, &p, 0.0, &[1, 16], 0.5, 1e-3).unwrap();
    assert!(fixed[0].1 > 1e-3 && (fixed[0].1 - fixed[1].1).abs() < 1e-14);
    let d = hartree_to_nls_distance(&phi, &p, 0.4, &[16, 64, 256], 0.5, 1e-3).unwrap();
    assert!(d[0].1 > d[1].1 && d[1].1 > d[2].1, "{d:?}");
    let free = hartree_to_nls_distance(&phi, &Profile::Zero, 0.4, &[16, 64], 0.5, 1e-3).unwrap();
    assert!(free.iter().all(|x| x.1 == 0.0));
}

#[test]
fn large_data_is_labeled() {
    let grid = Grid::line(256, 40.0).unwrap();
    let phi = datum(grid).scaled(C64::new(3.0, 0.0));
    let run = HartreeRun::new(Interaction::Potential(attractive(grid)), phi, 0.01, 0.02);
    assert!(run.run().unwrap().warnings.iter().any(|w| w.starts_with("exploratory")));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mass_is_conserved_per_step(amp in 0.0f64..3.0, k in -1.0f64..1.0, dt in 1e-4f64..0.05) {
        let grid = Grid::line(128, 30.0).unwrap();
        let phi = Field::from_fn(grid, |x| C64::from_polar((-x[0] * x[0]).exp(), k * x[0])).scaled(C64::new(amp, 0.0));
        let v = attractive(grid);
        let next = hartree_step(&phi, &v, dt).unwrap();
        prop_assert!((next.mass() - phi.mass()).abs() < 1e-12 * phi.mass().max(1.0));
    }
}

use std::f64::consts::PI;

use mfl_core::spectral::checkpoint;
use mfl_core::spectral::{ch_series, hyperbolic_residual, sh_series, Field, Grid, Kernel};
use mfl_core::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals = (0..grid.len()).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    Field::new(grid, vals).unwrap()
}

fn random_kernel(grid: Grid, scale: f64, seed: u64, symmetric: bool) -> Kernel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = grid.points();
    let mut v = vec![C64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            if symmetric && j < i {
                v[i * m + j] = v[j * m + i];
            } else {
                v[i * m + j] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * scale;
            }
        }
    }
    Kernel::new(grid, v).unwrap()
}

#[test]
fn round_trip_transform() {
    for grid in [Grid::line(64, 7.0).unwrap(), Grid::new(3, 8, 2.0).unwrap()] {
        let f = random_field(grid, 1);
        let back = f.forward().inverse();
        assert!(f.max_abs_diff(&back).unwrap() < 1e-12);
        // Parseval.
        assert!((f.mass() - f.forward().mass()).abs() < 1e-12 * f.mass());
    }
}

#[test]
fn free_gaussian_closed_form() {
    // e^{-i|ξ|²t} on π^{-1/4}e^{-x²/2}: ‖φ(t)‖∞ = π^{-1/4}(1+4t²)^{-1/4}.
    let grid = Grid::line(2048, 200.0).unwrap();
    let phi = Field::gaussian(grid, 1.0);
    assert_eq!(phi.free_propagate(0.0).values(), phi.values());
    for t in [0.5f64, 1.0, 3.0] {
        let want = PI.powf(-0.25) * (1.0 + 4.0 * t * t).powf(-0.25);
        let got = phi.free_propagate(t);
        assert!((got.linf() - want).abs() < 1e-6, "t={t}");
        assert!((got.l2() - phi.l2()).abs() < 1e-12);
    }
    assert!((phi.linf() - PI.powf(-0.25)).abs() < 1e-12);
}

#[test]
fn free_flow_reverses() {
    let f = random_field(Grid::new(2, 16, 5.0).unwrap(), 4);
    let back = f.free_propagate(0.37).free_propagate(-0.37);
    assert!(f.max_abs_diff(&back).unwrap() < 1e-12);
}

#[test]
fn convolution_with_constant_and_unit_mass() {
    let grid = Grid::line(128, 10.0).unwrap();
    let bump = Field::from_real_fn(grid, |x| (1.0 - x[0] * x[0]).max(0.0));
    let total: f64 = bump.values().iter().map(|z| z.re).sum::<f64>() * grid.spacing();
    let c = Field::from_fn(grid, |_| C64::new(0.7, 0.0));
    let out = bump.convolve(&c).unwrap();
    assert!(out.values().iter().all(|z| (z - 0.7 * total).norm() < 1e-10));

    let mut delta = Field::zeros(grid);
    delta.values_mut()[64] = C64::new(1.0 / grid.spacing(), 0.0);
    let b = random_field(grid, 2);
    assert!(delta.convolve(&b).unwrap().max_abs_diff(&b).unwrap() < 1e-12);
}

#[test]
fn norms() {
    let grid = Grid::line(64, 1.0).unwrap();
    let one = Field::from_fn(grid, |_| C64::new(1.0, 0.0));
    assert!((one.norm(2.0).unwrap() - 1.0).abs() < 1e-14);
    let l = 6.0;
    let grid = Grid::line(64, l).unwrap();
    let wave = Field::from_fn(grid, |x| C64::from_polar(l.powf(-0.5), 2.0 * PI * x[0] / l));
    assert!((wave.half_deriv_norm() - (2.0 * PI / l).sqrt()).abs() < 1e-12);
    assert!(Field::zeros(grid).norm(0.5).is_err());
}

#[test]
fn kernel_algebra() {
    let grid = Grid::line(12, 3.0).unwrap();
    let (a, b, c) = (random_kernel(grid, 1.0, 1, false), random_kernel(grid, 1.0, 2, false), random_kernel(grid, 1.0, 3, false));
    let left = a.compose(&b).unwrap().compose(&c).unwrap();
    let right = a.compose(&b.compose(&c).unwrap()).unwrap();
    assert!(left.sub(&right).unwrap().max_abs() < 1e-10 * left.max_abs());
    let d = Kernel::delta(grid).unwrap();
    assert!(a.compose(&d).unwrap().sub(&a).unwrap().max_abs() < 1e-12);
    assert_eq!(a.transpose().transpose().values(), a.values());
}

#[test]
fn series_of_zero_and_rank_one() {
    let grid = Grid::line(16, 4.0).unwrap();
    let z = Kernel::zeros(grid).unwrap();
    assert_eq!(sh_series(&z, 1e-12).unwrap().max_abs(), 0.0);
    assert_eq!(ch_series(&z, 1e-12).unwrap().max_abs(), 0.0);

    // k = c φ⊗φ with real unit φ: sh(k) = sinh(c) φ⊗φ.
    let phi = Field::gaussian(grid, 0.7).normalized().unwrap();
    let c = 0.8;
    let k = Kernel::outer(&phi, &phi, C64::new(c, 0.0)).unwrap();
    let sh = sh_series(&k, 1e-14).unwrap();
    let want = k.scaled(C64::new(c.sinh() / c, 0.0));
    assert!(sh.sub(&want).unwrap().max_abs() < 1e-12);
    let ch = ch_series(&k, 1e-14).unwrap();
    let want = k.scaled(C64::new((c.cosh() - 1.0) / c, 0.0));
    assert!(ch.sub(&want).unwrap().max_abs() < 1e-12);
}

#[test]
fn checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.mflb");
    let f = random_field(Grid::new(2, 8, 3.5).unwrap(), 9);
    checkpoint::save(&path, &f).unwrap();
    let g = checkpoint::load(&path).unwrap();
    assert_eq!(f.values(), g.values());
    assert_eq!(f.grid(), g.grid());
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], checkpoint::MAGIC);
    assert_eq!(bytes.len(), checkpoint::HEADER_LEN + 16 * 64);
    assert!(checkpoint::read_field(&bytes[..20]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn free_flow_is_unitary(seed in 0u64..1000, t in -3.0f64..3.0) {
        let f = random_field(Grid::line(32, 6.0).unwrap(), seed);
        prop_assert!((f.free_propagate(t).mass() - f.mass()).abs() < 1e-12 * f.mass());
    }

    #[test]
    fn hyperbolic_identity_for_small_symmetric(seed in 0u64..1000) {
        let grid = Grid::line(10, 3.0).unwrap();
        let k = random_kernel(grid, 0.05, seed, true);
        let tol = mfl_core::spectral::DEFAULT_SERIES_TOL;
        let two_k = k.scaled(C64::new(2.0, 0.0));
        let s = sh_series(&two_k, tol).unwrap();
        let p = ch_series(&two_k, tol).unwrap();
        prop_assert!(hyperbolic_residual(&s, &p).unwrap() <= 10.0 * tol);
    }
}

//! The uncoupled pair-excitation system.
//!
//! Along a Hartree trajectory `φ_t`, the kernels `s₂ = sh(2k)` and
//! `p₂ = ch(2k) − δ` obey
//!
//! ```text
//! (1/i)∂t s₂ + gᵀ∘s₂ + s₂∘g = m∘ch(2k) + ch̄(2k)∘m
//! (1/i)∂t p₂ − [g, p₂]       = s̄₂∘m − m̄∘s₂
//! ```
//!
//! with `g = −Δ + (v_N∗|φ|²) + v_N(x−y)φ̄(x)φ(y)` and
//! `m = −v_N(x−y)φ(x)φ(y)`. The Laplacian parts are integrated exactly in
//! Fourier space; the bounded remainder is advanced by classical RK4 inside
//! a Strang splitting.

mod error_terms;
mod halfangle;

pub use error_terms::{c1_chain_bound, error_term_norms, error_terms_for, ErrorTerms};
pub use halfangle::{half_angle, HalfAngle, CONDITIONING_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hartree::{self, Interaction};
use crate::potential::ScaledPotential;
use crate::spectral::{hyperbolic_residual, laplacian_matrix, Field, Kernel};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// `m_N(x,y) = −v_N(x−y)φ(x)φ(y)`.
pub fn build_mn(phi: &Field, v: &ScaledPotential) -> Result<Kernel> {
    phi.grid().ensure_same(v.grid())?;
    phi.grid().ensure_line()?;
    let m = phi.grid().points();
    let f = phi.values();
    let mut out = vec![C64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            out[i * m + j] = -v.at_offset(i, j) * (f[i] * f[j]);
        }
    }
    Ok(Kernel::from_raw(*phi.grid(), out))
}

/// Which side `g_N` acts on in [`apply_gn`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `gᵀ∘K`.
    LeftTranspose,
    /// `K∘g`.
    Right,
}

/// Apply `g_N` without materializing it: spectral Laplacian along the
/// contracted index, multiplication by `v_N∗|φ|²`, and the exchange part as a
/// convolution along that index.
pub fn apply_gn(phi: &Field, v: &ScaledPotential, k: &Kernel, side: Side) -> Result<Kernel> {
    phi.grid().ensure_same(k.grid())?;
    phi.grid().ensure_same(v.grid())?;
    let m = k.points();
    let axis = match side {
        Side::LeftTranspose => 0,
        Side::Right => 1,
    };
    // −Δ along the chosen index.
    let mut lap = k.values().to_vec();
    let kk: Vec<f64> = phi.grid().wavenumbers().iter().map(|x| x * x / m as f64).collect();
    crate::spectral::transform_axis(&mut lap, m, 2, axis, false);
    for (r, row) in lap.chunks_mut(m).enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x *= kk[if axis == 0 { r } else { c }];
        }
    }
    crate::spectral::transform_axis(&mut lap, m, 2, axis, true);

    let vmf = Interaction::Potential(v.clone()).mean_field(phi)?;
    let f = phi.values();
    let conv = v.convolver();
    let mut out = lap;
    match side {
        Side::LeftTranspose => {
            // gᵀ(x,z) = g(z,x); exchange part v(z−x)φ̄(z)φ(x).
            let mut tmp: Vec<C64> = k.values().to_vec();
            for (z, row) in tmp.chunks_mut(m).enumerate() {
                row.iter_mut().for_each(|x| *x *= f[z].conj());
            }
            conv.apply_along(&mut tmp, 0);
            for (x, (orow, trow)) in out.chunks_mut(m).zip(tmp.chunks(m)).enumerate() {
                let krow = &k.values()[x * m..(x + 1) * m];
                for ((o, t), kv) in orow.iter_mut().zip(trow).zip(krow) {
                    *o += vmf[x] * kv + f[x] * t;
                }
            }
        }
        Side::Right => {
            let mut tmp: Vec<C64> = k.values().to_vec();
            for row in tmp.chunks_mut(m) {
                row.iter_mut().zip(f).for_each(|(x, p)| *x *= p.conj());
            }
            conv.apply_along(&mut tmp, 1);
            for (x, (orow, trow)) in out.chunks_mut(m).zip(tmp.chunks(m)).enumerate() {
                let krow = &k.values()[x * m..(x + 1) * m];
                for (y, ((o, t), kv)) in orow.iter_mut().zip(trow).zip(krow).enumerate() {
                    *o += vmf[y] * kv + f[y] * t;
                }
            }
        }
    }
    Ok(Kernel::from_raw(*k.grid(), out))
}

/// Dense kernel of `g_N`; only meant as a reference for small grids.
pub fn assemble_gn_dense(phi: &Field, v: &ScaledPotential) -> Result<Kernel> {
    let grid = *phi.grid();
    let m = grid.points();
    let dx = grid.spacing();
    let lap = laplacian_matrix(&grid)?;
    let vmf = Interaction::Potential(v.clone()).mean_field(phi)?;
    let f = phi.values();
    let mut out = vec![C64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            let mut g = -lap[i * m + j] / dx + v.at_offset(i, j) * f[i].conj() * f[j];
            if i == j {
                g += vmf[i] / dx;
            }
            out[i * m + j] = g;
        }
    }
    Ok(Kernel::from_raw(grid, out))
}

/// Bogoliubov consistency defect `‖ch∘ch − s̄h∘sh − δ‖` for `ch = δ + p₂`,
/// `sh = s₂`.
pub fn bogoliubov_residual(s2: &Kernel, p2: &Kernel) -> Result<f64> {
    hyperbolic_residual(s2, p2)
}

/// `(‖s₂‖, ‖p₂‖)` in the Hilbert–Schmidt norm.
pub fn pair_norms(state: &PairState) -> (f64, f64) {
    (state.s2.l2(), state.p2.l2())
}

#[derive(Clone, Debug)]
pub struct PairState {
    pub t: f64,
    pub phi: Field,
    pub s2: Kernel,
    pub p2: Kernel,
    pub potential: ScaledPotential,
}

impl PairState {
    /// Initial data `k(0) = 0`, i.e. `s₂ = p₂ = 0`.
    pub fn new(phi: Field, potential: ScaledPotential) -> Result<Self> {
        phi.grid().ensure_same(potential.grid())?;
        phi.grid().ensure_line()?;
        let g = *phi.grid();
        Ok(PairState {
            t: 0.0,
            phi,
            s2: Kernel::zeros(g)?,
            p2: Kernel::zeros(g)?,
            potential,
        })
    }

    pub fn residual(&self) -> Result<f64> {
        bogoliubov_residual(&self.s2, &self.p2)
    }
}

/// Products of the bounded part, evaluated as convolutions along one index.
struct Bounded<'a> {
    phi: &'a [C64],
    vmf: Vec<f64>,
    v: &'a ScaledPotential,
    m: usize,
}

impl<'a> Bounded<'a> {
    fn new(phi: &'a Field, v: &'a ScaledPotential) -> Result<Self> {
        Ok(Bounded {
            phi: phi.values(),
            vmf: Interaction::Potential(v.clone()).mean_field(phi)?,
            v,
            m: phi.grid().points(),
        })
    }

    /// `Conv_axis[ f(z) K(z,y) ]` (axis 0) or `Conv_axis[ K(x,z) f(z) ]` (axis 1).
    fn conv(&self, k: &[C64], weight: impl Fn(usize) -> C64, axis: usize) -> Vec<C64> {
        let m = self.m;
        let mut t = k.to_vec();
        if axis == 0 {
            for (z, row) in t.chunks_mut(m).enumerate() {
                let w = weight(z);
                row.iter_mut().for_each(|x| *x *= w);
            }
        } else {
            for row in t.chunks_mut(m) {
                row.iter_mut().enumerate().for_each(|(z, x)| *x *= weight(z));
            }
        }
        self.v.convolver().apply_along(&mut t, axis);
        t
    }

    /// Right-hand sides `(ṡ, ṗ)` of the bounded part.
    fn rhs(&self, s: &[C64], p: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let m = self.m;
        let f = self.phi;
        let fb: Vec<C64> = f.iter().map(|z| z.conj()).collect();
        let ps: Vec<C64> = p.iter().map(|z| z.conj()).collect();
        let sb: Vec<C64> = s.iter().map(|z| z.conj()).collect();

        let c0_fp = self.conv(p, |z| f[z], 0); // R∘p = φ̄(x)·c, m∘p = −φ(x)·c
        let c0_fbs = self.conv(s, |z| fb[z], 0); // Rᵀ∘s = φ(x)·c, m̄∘s = −φ̄(x)·c
        let c1_sfb = self.conv(s, |z| fb[z], 1); // s∘R = φ(y)·c
        let c1_pfb = self.conv(p, |z| fb[z], 1); // p∘R = φ(y)·c
        let c1_pbf = self.conv(&ps, |z| f[z], 1); // p̄∘m = −φ(y)·c
        let c1_sbf = self.conv(&sb, |z| f[z], 1); // s̄∘m = −φ(y)·c

        let mut ds = vec![C64::new(0.0, 0.0); m * m];
        let mut dp = vec![C64::new(0.0, 0.0); m * m];
        for x in 0..m {
            for y in 0..m {
                let i = x * m + y;
                let vxy = self.v.at_offset(x, y);
                let mxy = -vxy * f[x] * f[y];
                let rts = f[x] * c0_fbs[i];
                let sr = f[y] * c1_sfb[i];
                let mp = -f[x] * c0_fp[i];
                let pbm = -f[y] * c1_pbf[i];
                ds[i] = I * (-(self.vmf[x] + self.vmf[y]) * s[i] - rts - sr + 2.0 * mxy + mp + pbm);

                let rp = fb[x] * c0_fp[i];
                let pr = f[y] * c1_pfb[i];
                let mbs = -fb[x] * c0_fbs[i];
                let sbm = -f[y] * c1_sbf[i];
                dp[i] = I * ((self.vmf[x] - self.vmf[y]) * p[i] + rp - pr - mbs + sbm);
            }
        }
        (ds, dp)
    }
}

fn axpy(y: &[C64], a: f64, x: &[C64]) -> Vec<C64> {
    y.iter().zip(x).map(|(u, v)| u + a * v).collect()
}

/// One Strang step of the coupled `(φ, s₂, p₂)` system.
pub fn pair_step(state: &PairState, dt: f64) -> Result<PairState> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be finite and nonzero, got {dt}")));
    }
    let v = &state.potential;
    let phi0 = &state.phi;
    let phi_half = hartree::hartree_step(phi0, v, 0.5 * dt)?;
    let phi1 = hartree::hartree_step(phi0, v, dt)?;

    let mut s = state.s2.clone();
    let mut p = state.p2.clone();
    s.free_flow_in_place(0.5 * dt, 1.0);
    p.free_flow_in_place(-0.5 * dt, -1.0);

    if !v.is_zero() {
        let b0 = Bounded::new(phi0, v)?;
        let bh = Bounded::new(&phi_half, v)?;
        let b1 = Bounded::new(&phi1, v)?;
        let (s0, p0) = (s.values(), p.values());
        let (k1s, k1p) = b0.rhs(s0, p0);
        let (k2s, k2p) = bh.rhs(&axpy(s0, 0.5 * dt, &k1s), &axpy(p0, 0.5 * dt, &k1p));
        let (k3s, k3p) = bh.rhs(&axpy(s0, 0.5 * dt, &k2s), &axpy(p0, 0.5 * dt, &k2p));
        let (k4s, k4p) = b1.rhs(&axpy(s0, dt, &k3s), &axpy(p0, dt, &k3p));
        let w = dt / 6.0;
        let combine = |y: &[C64], a: &[C64], b: &[C64], c: &[C64], d: &[C64]| -> Vec<C64> {
            (0..y.len())
                .map(|i| y[i] + w * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
                .collect()
        };
        let sn = combine(s0, &k1s, &k2s, &k3s, &k4s);
        let pn = combine(p0, &k1p, &k2p, &k3p, &k4p);
        s = Kernel::from_raw(*s.grid(), sn);
        p = Kernel::from_raw(*p.grid(), pn);
    }

    s.free_flow_in_place(0.5 * dt, 1.0);
    p.free_flow_in_place(-0.5 * dt, -1.0);
    if !(s.is_finite() && p.is_finite()) {
        return Err(Error::Numerical(format!("pair kernels became non-finite at t={}", state.t + dt)));
    }
    Ok(PairState {
        t: state.t + dt,
        phi: phi1,
        s2: s,
        p2: p,
        potential: state.potential.clone(),
    })
}

/// One recorded row of a pair run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub t: f64,
    pub s2_l2: f64,
    pub p2_l2: f64,
    pub bog_residual: f64,
    pub errors: Option<ErrorTerms>,
}

#[derive(Clone, Debug)]
pub struct PairRun {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    /// Abort when the Bogoliubov residual exceeds `100 × tolerance`.
    pub tolerance: f64,
    /// Evaluate the error-term norms (with this `N`) at each record.
    pub error_terms_n: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct PairTrajectory {
    pub samples: Vec<PairSample>,
    pub final_state: PairState,
    pub warnings: Vec<String>,
}

impl PairRun {
    pub fn run(&self, initial: PairState) -> Result<PairTrajectory> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        let steps = (self.t_end / self.dt).round() as usize;
        let every = self.record_every.max(1);
        let mut state = initial;
        let mut samples = Vec::new();
        let mut warnings = Vec::new();
        let record = |st: &PairState, samples: &mut Vec<PairSample>, warnings: &mut Vec<String>| -> Result<()> {
            let res = st.residual()?;
            if res > 100.0 * self.tolerance {
                return Err(Error::Numerical(format!(
                    "Bogoliubov residual {res:.3e} exceeds 100x tolerance at t={:.4}",
                    st.t
                )));
            }
            let errors = match self.error_terms_n {
                Some(n) => {
                    let e = error_term_norms(st, n)?;
                    if e.ill_conditioned && warnings.iter().all(|w| !w.starts_with("half-angle")) {
                        warnings.push(format!("half-angle recovery ill-conditioned at t={:.4}", st.t));
                    }
                    Some(e)
                }
                None => None,
            };
            let (a, b) = pair_norms(st);
            samples.push(PairSample { t: st.t, s2_l2: a, p2_l2: b, bog_residual: res, errors });
            Ok(())
        };
        record(&state, &mut samples, &mut warnings)?;
        for step in 1..=steps {
            state = pair_step(&state, self.dt)?;
            if step % every == 0 || step == steps {
                record(&state, &mut samples, &mut warnings)?;
            }
        }
        Ok(PairTrajectory { samples, final_state: state, warnings })
    }
}

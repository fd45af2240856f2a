//! Recovery of `sh(k)`, `ch(k)` and `k` from `s₂ = sh(2k)`, `p₂ = ch(2k) − δ`.
//!
//! With `X = k̄∘k` (a non-negative operator), `ch(2k) = cosh(2√X)` and
//! `sh(2k) = k·sinh(2√X)/√X`. Hence, with `C = ch(2k)` as an operator,
//!
//! * `sh(k) = s₂ ∘ (2(1 + C))^{-1/2}`,
//! * `ch(k) = ((1 + C)/2)^{1/2}`,
//! * `k = s₂ ∘ F(C)`, `F(λ) = acosh(λ) / (2√(λ² − 1))`.
//!
//! The functions of `C` are evaluated by Hermitian functional calculus.
//! `C ≥ 1` must hold; eigenvalues of `C − 1` below `−CONDITIONING_TOL`
//! mean the state has left the Bogoliubov manifold and are flagged.

use crate::error::Result;
use crate::linalg::eigh;
use crate::spectral::Kernel;
use crate::C64;

pub const CONDITIONING_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct HalfAngle {
    pub sh: Kernel,
    /// `ch(k) − δ`.
    pub ch: Kernel,
    pub k: Kernel,
    /// Smallest eigenvalue of `C − 1` before clamping.
    pub min_eigenvalue: f64,
    pub ill_conditioned: bool,
}

/// `acosh(1+μ) / (2 sinh(acosh(1+μ)))`, stable near `μ = 0`.
fn f_half(mu: f64) -> f64 {
    if mu < 1e-7 {
        return 0.5 * (1.0 - mu / 3.0);
    }
    let root = (mu * (2.0 + mu)).sqrt();
    (mu + root).ln_1p() / (2.0 * root)
}

/// Right-multiply kernel values by a dimensionless matrix (no `dx`).
fn mul_plain(k: &Kernel, f: &[C64]) -> Kernel {
    let m = k.points();
    let mut out = vec![C64::new(0.0, 0.0); m * m];
    for i in 0..m {
        let row = &k.values()[i * m..(i + 1) * m];
        let orow = &mut out[i * m..(i + 1) * m];
        for (z, &a) in row.iter().enumerate() {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, b) in orow.iter_mut().zip(&f[z * m..(z + 1) * m]) {
                *o += a * b;
            }
        }
    }
    Kernel::from_raw(*k.grid(), out)
}

pub fn half_angle(s2: &Kernel, p2: &Kernel) -> Result<HalfAngle> {
    s2.grid().ensure_same(p2.grid())?;
    let m = s2.points();
    let dx = s2.grid().spacing();
    let eig = eigh(&p2.operator_matrix(), m)?;
    let min_eigenvalue = eig.min();
    let ill_conditioned = min_eigenvalue < -CONDITIONING_TOL;
    let clamp = |mu: f64| mu.max(0.0);

    let g_sh = eig.apply_fn(|mu| C64::new(1.0 / (2.0 * (2.0 + clamp(mu))).sqrt(), 0.0));
    let g_k = eig.apply_fn(|mu| C64::new(f_half(clamp(mu)), 0.0));
    let ch_op = eig.apply_fn(|mu| C64::new((1.0 + 0.5 * clamp(mu)).sqrt() - 1.0, 0.0));
    let ch = Kernel::from_raw(*s2.grid(), ch_op.iter().map(|v| v / dx).collect());

    Ok(HalfAngle {
        sh: mul_plain(s2, &g_sh),
        ch,
        k: mul_plain(s2, &g_k),
        min_eigenvalue,
        ill_conditioned,
    })
}

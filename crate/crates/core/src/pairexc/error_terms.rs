//! Representative error-term norms.
//!
//! For `s = sh(k)`, `a(y) = (s̄∘s)(y,y)`, `b(y) = (s∘s̄)(y,y)`:
//!
//! * quartic: `q1 = N⁻¹ (∫|v_N(y₁−y₂)|² a(y₁) b(y₂))^{1/2}`
//! * quadratic: `qd6 = N⁻¹ ‖s(y₁,y₂) v_N(y₁−y₂)‖`
//! * cubic: `c1 = N^{-1/2} (∫|v_N(y₁−y₂)|² |φ(y₂)|² a(y₁))^{1/2}`
//! * linear: `l3 = N^{-1/2} ‖∫ s(y,x) φ̄(x) v_N(y−x) dx‖`
//!
//! Each is a contraction of at most two-index objects; no four-index tensor
//! is formed.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pairexc::{half_angle, PairState};
use crate::potential::ScaledPotential;
use crate::spectral::{Field, Kernel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorTerms {
    pub q1: f64,
    pub qd6: f64,
    pub c1: f64,
    pub l3: f64,
    pub ill_conditioned: bool,
}

/// Evaluate the four norms for a given `sh(k)`, condensate and `v_N`.
pub fn error_terms_for(sh: &Kernel, phi: &Field, v: &ScaledPotential) -> Result<ErrorTerms> {
    sh.grid().ensure_same(phi.grid())?;
    sh.grid().ensure_same(v.grid())?;
    let m = sh.points();
    let dx = sh.grid().spacing();
    let n = v.n() as f64;
    let s = sh.values();

    let mut a = vec![0.0; m]; // column sums Σ_z |s(z,y)|² dx
    let mut b = vec![0.0; m]; // row sums Σ_z |s(y,z)|² dx
    for x in 0..m {
        for y in 0..m {
            let w = s[x * m + y].norm_sqr() * dx;
            b[x] += w;
            a[y] += w;
        }
    }
    let rho: Vec<f64> = phi.values().iter().map(|z| z.norm_sqr()).collect();

    let mut q1 = 0.0;
    let mut c1 = 0.0;
    let mut qd6 = 0.0;
    let mut u = vec![crate::C64::new(0.0, 0.0); m];
    let f = phi.values();
    for y1 in 0..m {
        for y2 in 0..m {
            let vv = v.at_offset(y1, y2);
            if vv == 0.0 {
                continue;
            }
            let v2 = vv * vv;
            q1 += v2 * a[y1] * b[y2];
            c1 += v2 * rho[y2] * a[y1];
            qd6 += s[y1 * m + y2].norm_sqr() * v2;
            u[y1] += s[y1 * m + y2] * f[y2].conj() * vv * dx;
        }
    }
    let w2 = dx * dx;
    let l3 = (u.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt();
    Ok(ErrorTerms {
        q1: (q1 * w2).sqrt() / n,
        qd6: (qd6 * w2).sqrt() / n,
        c1: (c1 * w2).sqrt() / n.sqrt(),
        l3: l3 / n.sqrt(),
        ill_conditioned: false,
    })
}

/// Norms for a pair state with the interaction resampled at `n`
/// (same profile and `β`), using the half-angle recovery of `sh(k)`.
pub fn error_term_norms(state: &PairState, n: usize) -> Result<ErrorTerms> {
    let v = &state.potential;
    let vn = if n == v.n() {
        v.clone()
    } else {
        ScaledPotential::sample_scaled(*v.profile(), n, v.beta(), *v.grid())?
    };
    let ha = half_angle(&state.s2, &state.p2)?;
    let mut e = error_terms_for(&ha.sh, &state.phi, &vn)?;
    e.ill_conditioned = ha.ill_conditioned;
    Ok(e)
}

/// `‖φ‖_∞ ‖v_N‖_{L²} ‖sh(k)‖ / √N`, the bound on the cubic representative.
pub fn c1_chain_bound(sh: &Kernel, phi: &Field, v: &ScaledPotential) -> f64 {
    phi.linf() * v.l2() * sh.l2() / (v.n() as f64).sqrt()
}

//! Ladder operators, number operator and the Fock Hamiltonian as sparse matrices.

use crate::error::Result;
use crate::fock::FockBasis;
use crate::linalg::Csr;
use crate::potential::ScaledPotential;
use crate::spectral::laplacian_matrix;
use crate::C64;

/// Per-mode `a_j` and `a†_j`, with `a_j ≈ √dx·a_{x_j}`.
#[derive(Clone, Debug)]
pub struct LadderOps {
    pub annihilation: Vec<Csr>,
    pub creation: Vec<Csr>,
}

pub fn build_ops(basis: &FockBasis) -> LadderOps {
    let d = basis.dim();
    let annihilation: Vec<Csr> = (0..basis.modes())
        .map(|j| {
            let trip = (0..d)
                .filter_map(|i| basis.annihilate(i, j).map(|(t, a)| (t, i, C64::new(a, 0.0))))
                .collect();
            Csr::from_triplets(d, d, trip)
        })
        .collect();
    let creation = annihilation.iter().map(Csr::adjoint).collect();
    LadderOps { annihilation, creation }
}

/// `N̂`, diagonal with entry `Σ n_j`.
pub fn number_operator(basis: &FockBasis) -> Csr {
    let d: Vec<C64> = (0..basis.dim()).map(|i| C64::new(basis.particles(i) as f64, 0.0)).collect();
    Csr::from_diagonal(&d)
}

/// `H = H₁ − V/N` with `H₁ = Σ_{jk} Δ_{jk} a†_j a_k` and
/// `V = ½ Σ_{jk} v_N(x_j − x_k) a†_j a†_k a_k a_j`.
///
/// `v` is sampled on the line grid whose sites are the modes; `n` is the
/// mean-field parameter, not a particle number (`H` acts on every sector).
pub fn fock_hamiltonian(basis: &FockBasis, v: &ScaledPotential, n: usize) -> Result<Csr> {
    let grid = v.grid();
    grid.ensure_line()?;
    let m = basis.modes();
    if grid.points() != m {
        return Err(crate::Error::GridMismatch(format!(
            "potential has {} sites, basis has {m} modes",
            grid.points()
        )));
    }
    let lap = laplacian_matrix(grid)?;
    let d = basis.dim();
    let inv_n = 1.0 / n as f64;
    let mut trip = Vec::new();
    for i in 0..d {
        let occ = basis.occupation(i);
        let mut pot = 0.0;
        for j in 0..m {
            let nj = f64::from(occ[j]);
            for k in 0..m {
                let nk = f64::from(occ[k]);
                let pairs = if j == k { nj * (nj - 1.0) } else { nj * nk };
                pot += 0.5 * v.at_offset(j, k) * pairs;
            }
        }
        if pot != 0.0 {
            trip.push((i, i, C64::new(-inv_n * pot, 0.0)));
        }
        for j in 0..m {
            for k in 0..m {
                let l = lap[j * m + k];
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                if let Some((t, a)) = basis.hop(i, j, k) {
                    trip.push((t, i, l * a));
                }
            }
        }
    }
    Ok(Csr::from_triplets(d, d, trip))
}

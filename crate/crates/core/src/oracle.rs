//! Brute-force fidelity from explicit density matrices.
//!
//! Builds the Hamiltonian as a matrix, forms `sqrt(rho)` from its
//! eigendecomposition (or the ground projector at zero temperature) and
//! evaluates `Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))` as the trace norm of
//! `sqrt(rho1) sqrt(rho2)`. Finite-temperature states of `d = 3` vectors are
//! built in the four-level Fock space of the fermion pair `(a, b)` with
//! `H = psi^dag (h . sigma) psi`, `psi = (a, b^dag)`.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::fidelity::{Beta, Fidelity};
use crate::model::HVector;

type C = Complex<f64>;
type M = DMatrix<C>;

fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

fn pauli() -> [M; 4] {
    let m = |v: [C; 4]| M::from_row_slice(2, 2, &v);
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    [
        m([l, o, o, l]),
        m([o, l, l, o]),
        m([o, -i, i, o]),
        m([l, o, o, -l]),
    ]
}

/// `gamma_1..3 = tau^z (x) sigma^{x,y,z}`, `gamma_4 = tau^x (x) 1`.
pub fn gamma_matrices() -> [M; 4] {
    let [id, sx, sy, sz] = pauli();
    [
        sz.kronecker(&sx),
        sz.kronecker(&sy),
        sz.kronecker(&sz),
        sx.kronecker(&id),
    ]
}

fn clifford_matrix(h: &HVector) -> M {
    let comps = h.components();
    let gens: Vec<M> = if comps.len() == 4 {
        gamma_matrices().to_vec()
    } else {
        pauli()[1..].to_vec()
    };
    let n = gens[0].nrows();
    let mut out = M::zeros(n, n);
    for (g, x) in gens.iter().zip(comps) {
        out += g * c(*x, 0.0);
    }
    out
}

/// Pair Hamiltonian in the Fock basis `|n_a n_b>` with Jordan-Wigner
/// operators `a = sigma^- (x) 1`, `b = sigma^z (x) sigma^-`.
fn fock_hamiltonian(h: &HVector) -> M {
    let [id, _, _, sz] = pauli();
    let lower = M::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let a = lower.kronecker(&id);
    let b = sz.kronecker(&lower);
    let bd = b.adjoint();
    let k = clifford_matrix(h);
    let psi = [a.clone(), bd.clone()];
    let mut out = M::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            out += psi[i].adjoint() * &psi[j] * k[(i, j)];
        }
    }
    out
}

/// `sqrt(exp(-beta H) / Z)`, shifted by the ground energy so large beta
/// cannot overflow.
fn sqrt_gibbs(h: &M, beta: f64) -> M {
    let eig = h.clone().symmetric_eigen();
    let e0 = eig.eigenvalues.min();
    let w: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|e| (-beta * (e - e0)).exp())
        .collect();
    let z: f64 = w.iter().sum();
    let d = M::from_diagonal(&nalgebra::DVector::from_iterator(
        w.len(),
        w.iter().map(|x| c((x / z).sqrt(), 0.0)),
    ));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// `sqrt(P / Tr P)` for the negative-energy projector `P = (1 - n . gamma)/2`.
fn sqrt_ground(h: &HVector) -> Result<M> {
    let n = h.norm();
    if n <= crate::model::GAPLESS_TOLERANCE {
        return Err(Error::GaplessInput { norm: n });
    }
    let k = clifford_matrix(&h.scaled(1.0 / n));
    let dim = k.nrows();
    let p = (M::identity(dim, dim) - k) * c(0.5, 0.0);
    let rank = dim as f64 / 2.0;
    Ok(p * c(1.0 / rank.sqrt(), 0.0))
}

fn trace_norm(m: &M) -> f64 {
    m.clone().singular_values().iter().sum()
}

/// Uhlmann fidelity from explicit matrices. `d = 2` inputs are treated as
/// `d = 3` with `h_z = 0`; finite beta requires `d <= 3`.
pub fn fidelity_oracle(h1: &HVector, h2: &HVector, beta: &Beta) -> Result<Fidelity> {
    if h1.dim() != h2.dim() {
        return Err(Error::VectorDimension {
            expected: "equal dimensions",
            got: h2.dim(),
        });
    }
    let h1 = if h1.dim() == 2 { h1.padded(3)? } else { *h1 };
    let h2 = if h2.dim() == 2 { h2.padded(3)? } else { *h2 };
    let (r1, r2) = match beta {
        Beta::Infinite => (sqrt_ground(&h1)?, sqrt_ground(&h2)?),
        Beta::Finite(ctx) => {
            if h1.dim() != 3 {
                return Err(Error::VectorDimension {
                    expected: "3 for Gibbs states",
                    got: h1.dim(),
                });
            }
            (
                sqrt_gibbs(&fock_hamiltonian(&h1), ctx.beta()),
                sqrt_gibbs(&fock_hamiltonian(&h2), ctx.beta()),
            )
        }
    };
    Ok(Fidelity::clamped(trace_norm(&(r1 * r2))))
}

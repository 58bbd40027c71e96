//! Quantum-state data model in a fixed preferred basis, dense complex
//! linear algebra, and seeded random-instance generation.
//!
//! Every operator in this crate is expressed in one fixed orthonormal
//! basis (the *preferred basis*, indexed `0..d` in code and serialized
//! form). A state is incoherent exactly when its matrix is diagonal in
//! that basis. All constructors validate their invariants eagerly, so the
//! rest of the crate can treat a [`DensityMatrix`] as trusted data.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// Dense complex matrix: the carrier for states, Kraus operators, and
/// derivatives throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Marker for the fixed basis in which coherence is assessed.
///
/// The basis itself is implicit — it is whatever basis the matrices are
/// written in — so this type only pins the dimension and offers the basis
/// vectors for constructions that need them explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreferredBasis {
    /// Dimension of the space the basis spans.
    pub dim: usize,
}

impl PreferredBasis {
    /// The `n`-th basis vector (0-based).
    pub fn vector(&self, n: usize) -> CVector {
        let mut v = CVector::zeros(self.dim);
        v[n] = Complex64::new(1.0, 0.0);
        v
    }
}

/// Largest entrywise modulus of `m − m†`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let adj = m.adjoint();
    (m - adj)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Largest modulus among strictly off-diagonal entries.
pub fn max_offdiagonal_modulus(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Index pair `(j, k)` with `j < k` of the largest-modulus off-diagonal
/// entry, together with that entry, or `None` for a 1×1 matrix.
pub fn largest_offdiagonal(m: &CMatrix) -> Option<(usize, usize, Complex64)> {
    let d = m.nrows();
    let mut best: Option<(usize, usize, Complex64)> = None;
    for j in 0..d {
        for k in (j + 1)..d {
            let z = m[(j, k)];
            if best.is_none_or(|(_, _, b)| z.norm() > b.norm()) {
                best = Some((j, k, z));
            }
        }
    }
    best
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Real eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Matrix whose `i`-th column is the orthonormal eigenvector paired
    /// with `values[i]`.
    pub vectors: CMatrix,
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Rejects non-square and non-Hermitian (beyond the exact-arithmetic
/// tolerance) inputs. Eigenvalues are sorted descending; the decomposition
/// reconstructs the input to eigensolver accuracy.
pub fn eig_hermitian(a: &CMatrix) -> Result<EigenSystem> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let residual = hermiticity_residual(a);
    if residual > tol::EXACT {
        return Err(Error::NotHermitian { residual });
    }
    // Symmetrize before decomposing so roundoff in the input cannot leak
    // non-Hermitian parts into the eigenvectors.
    let sym = (a + a.adjoint()).scale(0.5);
    let se = sym.symmetric_eigen();
    let d = a.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .expect("eigenvalues of a Hermitian matrix are finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok(EigenSystem { values, vectors })
}

/// A validated density matrix in the preferred basis.
///
/// Construction enforces Hermiticity and unit trace at exact-arithmetic
/// tolerance and positive semidefiniteness at eigensolver tolerance; the
/// matrix is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validate and wrap a matrix as a quantum state.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let residual = hermiticity_residual(&mat);
        if residual > tol::EXACT {
            return Err(Error::NotHermitian { residual });
        }
        let trace = mat.trace();
        if (trace.re - 1.0).abs() > tol::EXACT || trace.im.abs() > tol::EXACT {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        let eig = eig_hermitian(&mat)?;
        let min_eigenvalue = eig.values.last().copied().unwrap_or(0.0);
        if min_eigenvalue < -tol::SPECTRAL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { mat })
    }

    /// Rank-1 projector onto `psi` (normalized internally).
    pub fn from_pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm <= 0.0 {
            return Err(Error::MalformedPayload {
                what: "pure-state vector has zero norm".into(),
            });
        }
        let unit = psi.unscale(norm);
        let mat = &unit * unit.adjoint();
        Self::new(mat)
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// The validated matrix.
    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Entry `(i, j)` in the preferred basis.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    /// Purity `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// The state with all off-diagonal entries zeroed (full dephasing).
    pub fn dephased(&self) -> Self {
        let d = self.dim();
        let mut mat = CMatrix::zeros(d, d);
        for n in 0..d {
            mat[(n, n)] = Complex64::new(self.mat[(n, n)].re, 0.0);
        }
        Self { mat }
    }

    /// Eigendecomposition of the state.
    pub fn eigensystem(&self) -> Result<EigenSystem> {
        eig_hermitian(&self.mat)
    }
}

/// True iff every off-diagonal entry of the state has modulus ≤ `tol`.
///
/// `tol` must be positive; the user-facing classification threshold is
/// [`tol::CLASSIFY`].
pub fn is_incoherent(rho: &DensityMatrix, tol: f64) -> bool {
    max_offdiagonal_modulus(rho.matrix()) <= tol
}

/// The d-dimensional state with every entry `1/d` (the projector onto the
/// uniform superposition of the preferred basis).
pub fn maximally_coherent_state(dim: usize) -> DensityMatrix {
    let psi = CVector::from_element(dim, Complex64::new(1.0, 0.0));
    DensityMatrix::from_pure(&psi).expect("uniform superposition is a valid state")
}

// ---------------------------------------------------------------------------
// Random instance generation.
//
// All generators are ChaCha8 streams: the algorithm is stable across
// platforms and versions, so seeded values are reproducible everywhere.
// Independent sampling contexts split one seed by stream index.
// ---------------------------------------------------------------------------

/// Deterministic generator for a seed (stream 0).
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic generator for a (seed, stream) pair; distinct streams of
/// one seed are independent. This is the crate-wide seed-splitting rule.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One complex number with independent standard-normal real and imaginary
/// parts.
pub fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Matrix of independent complex-normal entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-random pure state as a rank-1 projector; deterministic per seed.
pub fn random_pure_state(dim: usize, seed: u64) -> DensityMatrix {
    let mut rng = seeded_rng(seed);
    let psi = CVector::from_fn(dim, |_, _| complex_normal(&mut rng));
    DensityMatrix::from_pure(&psi)
        .expect("a normalized complex-normal vector yields a valid projector")
}

/// Full-rank random mixed state `ρ = GG†/tr(GG†)` with `G` square
/// complex-normal; deterministic per seed.
pub fn random_mixed_state(dim: usize, seed: u64) -> DensityMatrix {
    let mut rng = seeded_rng(seed);
    let g = ginibre(dim, dim, &mut rng);
    let w = &g * g.adjoint();
    let trace = w.trace().re;
    DensityMatrix::new(w.unscale(trace))
        .expect("a normalized Gram matrix yields a valid state")
}

/// Random diagonal (incoherent) state with flat-simplex eigenvalues;
/// deterministic per seed.
pub fn random_incoherent_state(dim: usize, seed: u64) -> DensityMatrix {
    let mut rng = seeded_rng(seed);
    let mut q: Vec<f64> = (0..dim)
        .map(|_| -f64::ln(1.0 - rng.random::<f64>()))
        .collect();
    let total: f64 = q.iter().sum();
    for v in &mut q {
        *v /= total;
    }
    let mut mat = CMatrix::zeros(dim, dim);
    for (n, v) in q.iter().enumerate() {
        mat[(n, n)] = Complex64::new(*v, 0.0);
    }
    DensityMatrix::new(mat).expect("a normalized diagonal matrix yields a valid state")
}

/// Matrix with orthonormal columns (`rows ≥ cols`) from the unitarily
/// invariant distribution: thin QR of a complex-normal matrix with the
/// diagonal-phase correction that makes the factorization unique.
pub fn random_frame(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    assert!(rows >= cols, "frame needs at least as many rows as columns");
    let qr = ginibre(rows, cols, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

/// Haar-random unitary.
pub fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    random_frame(dim, dim, rng)
}

/// Random Hermitian matrix `(A + A†)/2` with complex-normal `A`.
pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = ginibre(dim, dim, rng);
    (&a + a.adjoint()).scale(0.5)
}

// ---------------------------------------------------------------------------
// Serialized state format.
// ---------------------------------------------------------------------------

/// On-disk state layout: `{"dim": d, "matrix": [[[re,im], …], …]}`,
/// row-major, 0-based.
#[derive(Debug, Serialize, Deserialize)]
struct StateFile {
    dim: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl DensityMatrix {
    /// Serialize to the JSON state format.
    pub fn to_json_string(&self) -> String {
        let d = self.dim();
        let matrix = (0..d)
            .map(|i| (0..d).map(|j| [self.mat[(i, j)].re, self.mat[(i, j)].im]).collect())
            .collect();
        serde_json::to_string_pretty(&StateFile { dim: d, matrix })
            .expect("state serialization cannot fail")
    }

    /// Parse and validate the JSON state format. Violations are reported
    /// with the failed invariant's name.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text)?;
        if file.dim == 0 {
            return Err(Error::MalformedPayload {
                what: "dim must be positive".into(),
            });
        }
        if file.matrix.len() != file.dim {
            return Err(Error::MalformedPayload {
                what: format!(
                    "matrix has {} rows, declared dim is {}",
                    file.matrix.len(),
                    file.dim
                ),
            });
        }
        for (i, row) in file.matrix.iter().enumerate() {
            if row.len() != file.dim {
                return Err(Error::MalformedPayload {
                    what: format!(
                        "row {i} has {} entries, declared dim is {}",
                        row.len(),
                        file.dim
                    ),
                });
            }
        }
        let mat = CMatrix::from_fn(file.dim, file.dim, |i, j| {
            Complex64::new(file.matrix[i][j][0], file.matrix[i][j][1])
        });
        Self::new(mat)
    }
}

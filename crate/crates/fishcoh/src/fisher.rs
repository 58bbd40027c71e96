//! Classical and quantum Fisher information at a reference parameter.
//!
//! The classical side scores an outcome distribution together with its
//! parameter derivative ([`FisherDatum`]); the quantum side scores a state
//! together with its parameter derivative ([`StateDerivativePair`]) via
//! the symmetric-logarithmic-derivative closed form. The two meet in the
//! measurement maximum: quantum Fisher information is the supremum of
//! classical Fisher information over all measurements of the family,
//! which the property tests sample directly through
//! [`povm_distribution`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iochannel::ParametrizedIO;
use crate::qcore::{eig_hermitian, hermiticity_residual, CMatrix, DensityMatrix};
use crate::tol;

/// An outcome distribution and its parameter derivative at the reference
/// point: `p_x` and `∂_θ p_x` per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherDatum {
    p: Vec<f64>,
    d: Vec<f64>,
}

impl FisherDatum {
    /// Validate and wrap a (probabilities, derivatives) pair: equal
    /// lengths, probabilities nonnegative to exact tolerance, total
    /// probability 1 and total derivative 0 (trace preservation,
    /// differentiated).
    pub fn new(p: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        if p.len() != d.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                got: d.len(),
            });
        }
        if let Some((x, &bad)) = p.iter().enumerate().find(|(_, &v)| v < -tol::EXACT) {
            return Err(Error::InvariantViolated {
                what: format!("probability {x} is negative: {bad:e}"),
            });
        }
        let psum: f64 = p.iter().sum();
        if (psum - 1.0).abs() > tol::SPECTRAL {
            return Err(Error::InvariantViolated {
                what: format!("probabilities sum to {psum}, not 1"),
            });
        }
        let dsum: f64 = d.iter().sum();
        if dsum.abs() > tol::SPECTRAL {
            return Err(Error::InvariantViolated {
                what: format!("derivatives sum to {dsum:e}, not 0"),
            });
        }
        Ok(Self { p, d })
    }

    /// Outcome probabilities at the reference parameter.
    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// Outcome-probability derivatives at the reference parameter.
    pub fn derivatives(&self) -> &[f64] {
        &self.d
    }

    /// Number of outcomes.
    pub fn len(&self) -> usize {
        self.p.len()
    }

    /// True when there are no outcomes (never holds for validated data).
    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Classical Fisher information `Σ_x d_x²/p_x` of an outcome datum.
///
/// Outcomes with probability at or below the probability floor contribute
/// nothing when their derivative is also below the derivative floor (a
/// removable `0/0`); a vanishing probability with a live derivative means
/// the information diverges and is reported as [`Error::SingularOutcome`]
/// rather than clipped.
pub fn classical_fi(fd: &FisherDatum) -> Result<f64> {
    let mut total = 0.0;
    for (x, (&p, &d)) in fd.p.iter().zip(&fd.d).enumerate() {
        if p <= tol::PROB_FLOOR {
            if d.abs() <= tol::DERIV_FLOOR {
                continue;
            }
            return Err(Error::SingularOutcome {
                index: x,
                probability: p,
                derivative: d,
            });
        }
        total += d * d / p;
    }
    Ok(total)
}

/// A state family at the reference parameter: the state itself and its
/// exact parameter derivative (Hermitian, traceless).
#[derive(Debug, Clone)]
pub struct StateDerivativePair {
    rho_theta0: DensityMatrix,
    drho: CMatrix,
}

impl StateDerivativePair {
    /// Validate and wrap a (state, derivative) pair.
    pub fn new(rho_theta0: DensityMatrix, drho: CMatrix) -> Result<Self> {
        if drho.nrows() != rho_theta0.dim() || drho.ncols() != rho_theta0.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho_theta0.dim(),
                got: drho.nrows(),
            });
        }
        let residual = hermiticity_residual(&drho);
        if residual > tol::EXACT {
            return Err(Error::NotHermitian { residual });
        }
        let trace = drho.trace();
        if trace.norm() > tol::EXACT {
            return Err(Error::InvariantViolated {
                what: format!("state derivative has trace {:e}, not 0", trace.norm()),
            });
        }
        Ok(Self { rho_theta0, drho })
    }

    /// The state at the reference parameter.
    pub fn state(&self) -> &DensityMatrix {
        &self.rho_theta0
    }

    /// The parameter derivative of the state at the reference parameter.
    pub fn derivative(&self) -> &CMatrix {
        &self.drho
    }
}

/// State and exact derivative of the family a channel generates:
/// `ρ_θ = Σ_x E_x(θ) ρ E_x(θ)†`, differentiated analytically at the
/// channel's anchor parameter (no finite differences).
pub fn state_derivative(io: &ParametrizedIO, rho: &DensityMatrix) -> Result<StateDerivativePair> {
    if rho.dim() != io.dim() {
        return Err(Error::DimensionMismatch {
            expected: io.dim(),
            got: rho.dim(),
        });
    }
    let out = io.output_dim();
    let mut rho0 = CMatrix::zeros(out, out);
    let mut drho = CMatrix::zeros(out, out);
    for k in io.kraus() {
        let e = k.matrix(out, 0.0);
        let edot = k.rate_derivative_matrix(out, 0.0);
        let e_rho = &e * rho.matrix();
        rho0 += &e_rho * e.adjoint();
        let term = &edot * rho.matrix() * e.adjoint() + &e_rho * edot.adjoint();
        drho += term;
    }
    // Symmetrize away roundoff so the pair's exact-tolerance invariants
    // reflect the math, not accumulation order.
    let rho0 = (&rho0 + rho0.adjoint()).scale(0.5);
    let drho = (&drho + drho.adjoint()).scale(0.5);
    StateDerivativePair::new(DensityMatrix::new(rho0)?, drho)
}

/// Quantum Fisher information of a state family via the symmetric
/// logarithmic derivative: `2 Σ_{i,j} |⟨i|∂ρ|j⟩|² / (λ_i + λ_j)` over the
/// state's eigensystem, restricted to eigenvalue pairs above the support
/// cutoff.
///
/// Derivative weight on excluded (kernel–kernel) pairs means the family
/// leaves the state's support and the quotient cannot score it; that is
/// reported as [`Error::SingularFamily`] with the leaked block norm.
pub fn qfi_sld(sd: &StateDerivativePair) -> Result<f64> {
    let es = eig_hermitian(sd.state().matrix())?;
    let d = es.values.len();
    let m = es.vectors.adjoint() * sd.derivative() * &es.vectors;
    let mut total = 0.0;
    let mut leak_sq = 0.0;
    for i in 0..d {
        for j in 0..d {
            let weight = es.values[i] + es.values[j];
            let amp_sq = m[(i, j)].norm_sqr();
            if weight > tol::SLD_SUPPORT {
                total += 2.0 * amp_sq / weight;
            } else {
                leak_sq += amp_sq;
            }
        }
    }
    let kernel_block_norm = leak_sq.sqrt();
    if kernel_block_norm > tol::KERNEL_LEAK {
        return Err(Error::SingularFamily { kernel_block_norm });
    }
    Ok(total)
}

/// Diagonal phase generator: eigenvalues of a diagonal Hamiltonian in the
/// preferred basis, each confined to `[0, 1]` like the channel phase
/// rates they generalize.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGenerator {
    h: Vec<f64>,
}

impl DiagonalGenerator {
    /// Validate and wrap generator eigenvalues.
    pub fn new(h: Vec<f64>) -> Result<Self> {
        for (index, &value) in h.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::RateOutOfRange { index, value });
            }
        }
        Ok(Self { h })
    }

    /// Generator eigenvalues.
    pub fn entries(&self) -> &[f64] {
        &self.h
    }

    /// Dimension the generator acts on.
    pub fn dim(&self) -> usize {
        self.h.len()
    }

    /// The generator as a diagonal matrix.
    pub fn matrix(&self) -> CMatrix {
        let d = self.h.len();
        CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(self.h[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// The unitary phase family `ρ_θ = e^{iθH} ρ e^{−iθH}` with diagonal `H`,
/// differentiated at the anchor: state `ρ`, derivative `i[H, ρ]`.
///
/// The family is translation-homogeneous — conjugation at the anchor is
/// absorbed — so the pair is identical at every anchor parameter and no
/// anchor argument is needed; downstream anchor-invariance is bitwise.
pub fn unitary_family(rho: &DensityMatrix, gen: &DiagonalGenerator) -> Result<StateDerivativePair> {
    if gen.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: gen.dim(),
        });
    }
    let h = gen.matrix();
    let commutator = &h * rho.matrix() - rho.matrix() * &h;
    let drho = commutator.map(|z| Complex64::new(0.0, 1.0) * z);
    StateDerivativePair::new(rho.clone(), drho)
}

/// Exact qubit coherence value: the quantum Fisher information of the
/// qubit under the phase family generated by `h = (1, 0)`. Equals
/// `4|ρ_01|²` for every qubit state; the test suite verifies that closed
/// form against this SLD evaluation on a large random sample.
pub fn qubit_coherence_analytic(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::NotQubit { dim: rho.dim() });
    }
    let gen = DiagonalGenerator::new(vec![1.0, 0.0])?;
    qfi_sld(&unitary_family(rho, &gen)?)
}

/// Dimension ceiling for the exhaustive vertex search of
/// [`max_unitary_qfi_pure`] (2^d vertices are enumerated).
pub const VERTEX_SEARCH_MAX_DIM: usize = 20;

/// Maximum of `4·Var_φ(H)` over diagonal generators `H` with eigenvalues
/// in `[0, 1]`, for a pure state.
///
/// The variance is convex in `h`, so the box maximum is attained at a
/// vertex; the search enumerates all `2^d` binary generators exactly and
/// returns the maximum and an attaining generator.
pub fn max_unitary_qfi_pure(phi: &DensityMatrix) -> Result<(f64, DiagonalGenerator)> {
    let d = phi.dim();
    if d > VERTEX_SEARCH_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: d,
            max: VERTEX_SEARCH_MAX_DIM,
        });
    }
    let purity = phi.purity();
    if (purity - 1.0).abs() > tol::SPECTRAL {
        return Err(Error::NotPure { purity });
    }
    let q: Vec<f64> = (0..d).map(|n| phi.entry(n, n).re).collect();
    let mut best_value = 0.0;
    let mut best_mask = 0usize;
    for mask in 0..(1usize << d) {
        let s: f64 = (0..d).filter(|n| mask & (1 << n) != 0).map(|n| q[n]).sum();
        let value = 4.0 * s * (1.0 - s);
        if value > best_value {
            best_value = value;
            best_mask = mask;
        }
    }
    let h: Vec<f64> = (0..d)
        .map(|n| if best_mask & (1 << n) != 0 { 1.0 } else { 0.0 })
        .collect();
    Ok((best_value, DiagonalGenerator::new(h)?))
}

/// Outcome datum of measuring a state family with a POVM: per effect,
/// probability `tr(M ρ)` and derivative `tr(M ∂ρ)`.
pub fn povm_distribution(sd: &StateDerivativePair, effects: &[CMatrix]) -> Result<FisherDatum> {
    let d = sd.state().dim();
    let mut sum = CMatrix::zeros(d, d);
    for m in effects {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: m.nrows(),
            });
        }
        sum += m;
    }
    let resolution_err = (&sum - CMatrix::identity(d, d))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if resolution_err > tol::COMPLETENESS_ANCHOR {
        return Err(Error::InvariantViolated {
            what: format!("POVM effects sum off identity by {resolution_err:e}"),
        });
    }
    let mut p = Vec::with_capacity(effects.len());
    let mut der = Vec::with_capacity(effects.len());
    for m in effects {
        p.push((m * sd.state().matrix()).trace().re);
        der.push((m * sd.derivative()).trace().re);
    }
    FisherDatum::new(p, der)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iochannel::{random_io, IncoherentKraus, ParametrizedIO};
    use crate::qcore::{
        ginibre, maximally_coherent_state, random_mixed_state, random_pure_state,
        random_unitary, seeded_rng, CVector,
    };
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cplx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classical_fi_direct_substitution() {
        let fd = FisherDatum::new(vec![0.5, 0.5], vec![0.5, -0.5]).unwrap();
        assert_abs_diff_eq!(classical_fi(&fd).unwrap(), 1.0, epsilon = tol::EXACT);
    }

    #[test]
    fn classical_fi_zero_derivative_scores_zero() {
        let fd = FisherDatum::new(vec![0.3, 0.2, 0.5], vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(classical_fi(&fd).unwrap(), 0.0);
    }

    #[test]
    fn classical_fi_flags_singular_outcomes_and_skips_removable_ones() {
        let singular = FisherDatum::new(vec![1.0, 0.0], vec![-1e-3, 1e-3]).unwrap();
        assert!(matches!(
            classical_fi(&singular),
            Err(Error::SingularOutcome { index: 1, .. })
        ));
        let removable = FisherDatum::new(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(classical_fi(&removable).unwrap(), 0.0);
    }

    #[test]
    fn fisher_datum_rejects_broken_invariants() {
        assert!(matches!(
            FisherDatum::new(vec![0.5], vec![0.1, -0.1]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            FisherDatum::new(vec![1.2, -0.2], vec![0.0, 0.0]),
            Err(Error::InvariantViolated { .. })
        ));
        assert!(matches!(
            FisherDatum::new(vec![0.6, 0.6], vec![0.0, 0.0]),
            Err(Error::InvariantViolated { .. })
        ));
        assert!(matches!(
            FisherDatum::new(vec![0.5, 0.5], vec![0.5, 0.0]),
            Err(Error::InvariantViolated { .. })
        ));
    }

    /// Strategy: a probability vector bounded away from 0 and a matching
    /// zero-sum derivative vector.
    fn datum_strategy(len: usize) -> impl Strategy<Value = FisherDatum> {
        (
            proptest::collection::vec(0.05f64..1.0, len),
            proptest::collection::vec(-1.0f64..1.0, len),
        )
            .prop_map(move |(raw_p, raw_d)| {
                let total: f64 = raw_p.iter().sum();
                let p: Vec<f64> = raw_p.iter().map(|v| v / total).collect();
                let mean: f64 = raw_d.iter().sum::<f64>() / len as f64;
                let d: Vec<f64> = raw_d.iter().map(|v| v - mean).collect();
                FisherDatum::new(p, d).expect("constructed datum is valid")
            })
    }

    proptest! {
        /// Mixing distributions never increases Fisher information beyond
        /// the mixture of the informations (convexity).
        #[test]
        fn classical_fi_is_convex(
            a in datum_strategy(4),
            b in datum_strategy(4),
            lambda in 0.0f64..=1.0,
        ) {
            let mix_p: Vec<f64> = a.probabilities().iter().zip(b.probabilities())
                .map(|(&x, &y)| lambda * x + (1.0 - lambda) * y).collect();
            let mix_d: Vec<f64> = a.derivatives().iter().zip(b.derivatives())
                .map(|(&x, &y)| lambda * x + (1.0 - lambda) * y).collect();
            let mix = FisherDatum::new(mix_p, mix_d).unwrap();
            let lhs = classical_fi(&mix).unwrap();
            let rhs = lambda * classical_fi(&a).unwrap()
                + (1.0 - lambda) * classical_fi(&b).unwrap();
            prop_assert!(lhs <= rhs + tol::SPECTRAL);
        }

        /// Merging outcomes (coarse-graining) never increases Fisher
        /// information — the data-processing direction of the refinement
        /// inequality.
        #[test]
        fn classical_fi_drops_under_outcome_merging(fd in datum_strategy(6)) {
            let p = fd.probabilities();
            let d = fd.derivatives();
            let merged = FisherDatum::new(
                vec![p[0] + p[1], p[2] + p[3], p[4] + p[5]],
                vec![d[0] + d[1], d[2] + d[3], d[4] + d[5]],
            ).unwrap();
            let coarse = classical_fi(&merged).unwrap();
            let fine = classical_fi(&fd).unwrap();
            prop_assert!(coarse <= fine + tol::SPECTRAL);
        }
    }

    #[test]
    fn state_derivative_of_rate_free_identity_is_zero() {
        let io = ParametrizedIO::identity(3, 0.0);
        let rho = random_mixed_state(3, 4);
        let sd = state_derivative(&io, &rho).unwrap();
        let worst = sd.derivative().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(worst <= tol::EXACT);
        assert_eq!(sd.state().matrix(), rho.matrix());
    }

    #[test]
    fn state_derivative_vanishes_on_incoherent_states() {
        for seed in 0..20u64 {
            let io = random_io(3, 0.0, seed);
            let rho = random_mixed_state(3, seed).dephased();
            let sd = state_derivative(&io, &rho).unwrap();
            let worst = sd.derivative().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(worst <= tol::EXACT, "seed {seed}: residual {worst:e}");
        }
    }

    #[test]
    fn state_derivative_matches_central_finite_difference() {
        use crate::iochannel::apply_io;
        let step = 1e-5;
        for seed in 0..20u64 {
            let theta0 = 0.3;
            let io = random_io(3, theta0, seed);
            let rho = random_pure_state(3, seed + 1000);
            let sd = state_derivative(&io, &rho).unwrap();
            let plus = apply_io(&io, &rho, theta0 + step).unwrap();
            let minus = apply_io(&io, &rho, theta0 - step).unwrap();
            let fd = (plus.matrix() - minus.matrix()).unscale(2.0 * step);
            let err = (sd.derivative() - fd)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(err <= 1e-8, "seed {seed}: derivative mismatch {err:e}");
        }
    }

    #[test]
    fn qfi_of_zero_derivative_is_zero() {
        let rho = random_mixed_state(2, 9);
        let sd = StateDerivativePair::new(rho, CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(qfi_sld(&sd).unwrap(), 0.0);
    }

    #[test]
    fn qfi_of_maximally_coherent_qubit_phase_family_is_one() {
        let plus = maximally_coherent_state(2);
        let gen = DiagonalGenerator::new(vec![1.0, 0.0]).unwrap();
        let sd = unitary_family(&plus, &gen).unwrap();
        assert_abs_diff_eq!(qfi_sld(&sd).unwrap(), 1.0, epsilon = tol::CLASSIFY);
    }

    /// Haar-random rank-`k` POVM with `k` effects.
    fn random_povm(dim: usize, effects: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<CMatrix> {
        let parts: Vec<CMatrix> = (0..effects)
            .map(|_| {
                let g = ginibre(dim, dim, rng);
                &g * g.adjoint()
            })
            .collect();
        let mut total = CMatrix::zeros(dim, dim);
        for p in &parts {
            total += p;
        }
        // total^{-1/2}, via the eigensystem (total is positive definite
        // with probability 1).
        let es = eig_hermitian(&(&total + total.adjoint()).scale(0.5)).unwrap();
        let isqrt = CMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                cplx(1.0 / es.values[i].sqrt(), 0.0)
            } else {
                cplx(0.0, 0.0)
            }
        });
        let w = &es.vectors * isqrt * es.vectors.adjoint();
        parts.into_iter().map(|p| &w * p * &w).collect()
    }

    /// Projective measurement in the eigenbasis of the symmetric
    /// logarithmic derivative — the measurement that attains QFI.
    fn sld_eigenbasis_povm(sd: &StateDerivativePair) -> Vec<CMatrix> {
        let es = eig_hermitian(sd.state().matrix()).unwrap();
        let d = es.values.len();
        let m = es.vectors.adjoint() * sd.derivative() * &es.vectors;
        let mut sld = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let weight = es.values[i] + es.values[j];
                if weight > tol::SLD_SUPPORT {
                    sld[(i, j)] = 2.0 * m[(i, j)] / weight;
                }
            }
        }
        let sld = &es.vectors * sld * es.vectors.adjoint();
        let les = eig_hermitian(&(&sld + sld.adjoint()).scale(0.5)).unwrap();
        (0..d)
            .map(|i| {
                let v = les.vectors.column(i).clone_owned();
                &v * v.adjoint()
            })
            .collect()
    }

    #[test]
    fn qfi_dominates_sampled_measurements_and_sld_basis_attains_it() {
        for seed in 0..10u64 {
            let rho = random_mixed_state(2, seed);
            let gen = DiagonalGenerator::new(vec![1.0, 0.0]).unwrap();
            let sd = unitary_family(&rho, &gen).unwrap();
            let qfi = qfi_sld(&sd).unwrap();

            // 50 random projective bases never beat the QFI.
            let mut rng = seeded_rng(seed * 31 + 7);
            for _ in 0..50 {
                let u = random_unitary(2, &mut rng);
                let projectors: Vec<CMatrix> = (0..2)
                    .map(|i| {
                        let v = u.column(i).clone_owned();
                        &v * v.adjoint()
                    })
                    .collect();
                let fi = classical_fi(&povm_distribution(&sd, &projectors).unwrap()).unwrap();
                assert!(fi <= qfi + tol::CLASSIFY, "seed {seed}: projective {fi} > {qfi}");
            }

            // 200 random POVMs never beat it either…
            let mut sampled_max = 0.0f64;
            for _ in 0..200 {
                let povm = random_povm(2, 3, &mut rng);
                let fi = classical_fi(&povm_distribution(&sd, &povm).unwrap()).unwrap();
                assert!(fi <= qfi + tol::CLASSIFY);
                sampled_max = sampled_max.max(fi);
            }

            // …and the SLD eigenbasis closes the gap exactly.
            let attained = classical_fi(
                &povm_distribution(&sd, &sld_eigenbasis_povm(&sd)).unwrap(),
            )
            .unwrap();
            assert_abs_diff_eq!(attained, qfi, epsilon = tol::CLASSIFY);
            assert!(sampled_max <= attained + tol::CLASSIFY);
        }
    }

    #[test]
    fn unitary_family_commutator_cases() {
        // Incoherent state commutes with any diagonal generator.
        let rho = random_mixed_state(3, 2).dephased();
        let gen = DiagonalGenerator::new(vec![1.0, 0.3, 0.0]).unwrap();
        let sd = unitary_family(&rho, &gen).unwrap();
        assert!(sd.derivative().iter().map(|z| z.norm()).fold(0.0, f64::max) <= tol::EXACT);

        // Maximally coherent qubit with h = (1, 0): i[H, ρ] has ±i/2 off
        // the diagonal.
        let plus = maximally_coherent_state(2);
        let gen = DiagonalGenerator::new(vec![1.0, 0.0]).unwrap();
        let sd = unitary_family(&plus, &gen).unwrap();
        assert_abs_diff_eq!(sd.derivative()[(0, 1)].im, 0.5, epsilon = tol::EXACT);
        assert_abs_diff_eq!(sd.derivative()[(1, 0)].im, -0.5, epsilon = tol::EXACT);
        assert_abs_diff_eq!(sd.derivative()[(0, 0)].norm(), 0.0, epsilon = tol::EXACT);

        // A constant generator is a global phase: derivative zero.
        let gen = DiagonalGenerator::new(vec![0.6, 0.6, 0.6]).unwrap();
        let rho = random_mixed_state(3, 8);
        let sd = unitary_family(&rho, &gen).unwrap();
        assert!(sd.derivative().iter().map(|z| z.norm()).fold(0.0, f64::max) <= tol::EXACT);
    }

    #[test]
    fn generator_shifts_leave_qfi_unchanged() {
        // QFI depends only on differences of generator eigenvalues.
        let rho = random_mixed_state(2, 5);
        let a = DiagonalGenerator::new(vec![0.7, 0.2]).unwrap();
        let b = DiagonalGenerator::new(vec![0.5, 0.0]).unwrap();
        let qa = qfi_sld(&unitary_family(&rho, &a).unwrap()).unwrap();
        let qb = qfi_sld(&unitary_family(&rho, &b).unwrap()).unwrap();
        assert_abs_diff_eq!(qa, qb, epsilon = tol::EXACT);
    }

    #[test]
    fn qubit_value_closed_form_cases() {
        assert_abs_diff_eq!(
            qubit_coherence_analytic(&maximally_coherent_state(2)).unwrap(),
            1.0,
            epsilon = tol::CLASSIFY
        );

        let mut diag = CMatrix::zeros(2, 2);
        diag[(0, 0)] = cplx(0.3, 0.0);
        diag[(1, 1)] = cplx(0.7, 0.0);
        let rho = DensityMatrix::new(diag).unwrap();
        assert_abs_diff_eq!(qubit_coherence_analytic(&rho).unwrap(), 0.0, epsilon = tol::CLASSIFY);

        // (I + 0.5 σ_x)/2 has ρ_01 = 1/4, so the value is 4·(1/4)² = 1/4.
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = cplx(0.5, 0.0);
        m[(1, 1)] = cplx(0.5, 0.0);
        m[(0, 1)] = cplx(0.25, 0.0);
        m[(1, 0)] = cplx(0.25, 0.0);
        let rho = DensityMatrix::new(m).unwrap();
        let value = qubit_coherence_analytic(&rho).unwrap();
        assert_abs_diff_eq!(value, 0.25, epsilon = tol::CLASSIFY);

        // Projective measurements sampled across 50 bases stay below it.
        let gen = DiagonalGenerator::new(vec![1.0, 0.0]).unwrap();
        let sd = unitary_family(&rho, &gen).unwrap();
        let mut rng = seeded_rng(99);
        let mut best = 0.0f64;
        for _ in 0..50 {
            let u = random_unitary(2, &mut rng);
            let projectors: Vec<CMatrix> = (0..2)
                .map(|i| {
                    let v = u.column(i).clone_owned();
                    &v * v.adjoint()
                })
                .collect();
            best = best.max(
                classical_fi(&povm_distribution(&sd, &projectors).unwrap()).unwrap(),
            );
        }
        assert!(best <= value + tol::CLASSIFY);

        assert!(matches!(
            qubit_coherence_analytic(&random_mixed_state(3, 0)),
            Err(Error::NotQubit { dim: 3 })
        ));
    }

    #[test]
    fn qubit_value_matches_four_offdiagonal_squared() {
        for seed in 0..1000u64 {
            let rho = if seed % 3 == 0 {
                random_pure_state(2, seed)
            } else {
                random_mixed_state(2, seed)
            };
            let analytic = qubit_coherence_analytic(&rho).unwrap();
            let closed = 4.0 * rho.entry(0, 1).norm_sqr();
            assert!(
                (analytic - closed).abs() <= tol::SPECTRAL,
                "seed {seed}: SLD {analytic} vs closed form {closed}"
            );
        }
    }

    #[test]
    fn vertex_search_on_uniform_qutrit_recovers_eight_ninths() {
        let phi = maximally_coherent_state(3);
        let (value, gen) = max_unitary_qfi_pure(&phi).unwrap();
        assert!((value - 8.0 / 9.0).abs() <= tol::EXACT, "value {value}");
        // Argmax splits the uniform weights 1/3 vs 2/3 in either
        // orientation.
        let s: f64 = gen.entries().iter().sum();
        assert!((s - 1.0).abs() <= tol::EXACT || (s - 2.0).abs() <= tol::EXACT);
    }

    #[test]
    fn vertex_search_qubit_and_basis_state_cases() {
        let plus = maximally_coherent_state(2);
        let (value, gen) = max_unitary_qfi_pure(&plus).unwrap();
        assert_abs_diff_eq!(value, 1.0, epsilon = tol::EXACT);
        let s: f64 = gen.entries().iter().sum();
        assert!((s - 1.0).abs() <= tol::EXACT);

        let basis = DensityMatrix::from_pure(&CVector::from_fn(3, |i, _| {
            if i == 0 {
                cplx(1.0, 0.0)
            } else {
                cplx(0.0, 0.0)
            }
        }))
        .unwrap();
        let (value, _) = max_unitary_qfi_pure(&basis).unwrap();
        assert_eq!(value, 0.0);
    }

    #[test]
    fn vertex_search_rejects_mixed_states_and_large_dims() {
        assert!(matches!(
            max_unitary_qfi_pure(&random_mixed_state(2, 1)),
            Err(Error::NotPure { .. })
        ));
        let big = DensityMatrix::from_pure(&CVector::from_element(21, cplx(1.0, 0.0))).unwrap();
        assert!(matches!(
            max_unitary_qfi_pure(&big),
            Err(Error::DimensionTooLarge { dim: 21, max: 20 })
        ));
    }

    #[test]
    fn vertex_search_beats_random_generators() {
        // The exhaustive vertex maximum dominates random interior
        // generators (convexity of the variance in h).
        let mut rng = seeded_rng(12);
        for seed in 0..20u64 {
            let phi = random_pure_state(4, seed);
            let (best, _) = max_unitary_qfi_pure(&phi).unwrap();
            for _ in 0..20 {
                let h: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
                let gen = DiagonalGenerator::new(h).unwrap();
                let qfi = qfi_sld(&unitary_family(&phi, &gen).unwrap()).unwrap();
                assert!(qfi <= best + tol::CLASSIFY, "seed {seed}: {qfi} > {best}");
            }
        }
    }

    #[test]
    fn povm_distribution_rejects_non_resolutions() {
        let rho = random_mixed_state(2, 3);
        let sd = StateDerivativePair::new(rho, CMatrix::zeros(2, 2)).unwrap();
        let half = CMatrix::identity(2, 2).scale(0.5);
        assert!(matches!(
            povm_distribution(&sd, &[half]),
            Err(Error::InvariantViolated { .. })
        ));
    }

    #[test]
    fn projective_readout_of_rank1_channel_matches_postselection() {
        // Measuring the output of a rank-one channel in its (diagonal)
        // output basis reproduces the post-selection datum exactly: the
        // classical FI and the family QFI coincide.
        use crate::iochannel::postselect_distribution;
        let plus = maximally_coherent_state(2);
        let ops = vec![
            IncoherentKraus::new(
                vec![0, 0],
                vec![cplx(0.5f64.sqrt(), 0.0), cplx(0.0, 0.5f64.sqrt())],
                vec![1.0, 0.0],
            )
            .unwrap(),
            IncoherentKraus::new(
                vec![1, 1],
                vec![cplx(0.5f64.sqrt(), 0.0), cplx(0.0, -(0.5f64.sqrt()))],
                vec![1.0, 0.0],
            )
            .unwrap(),
        ];
        let io = ParametrizedIO::new(2, 0.0, ops).unwrap();
        let datum = postselect_distribution(&io, &plus).unwrap();
        let fi = classical_fi(&datum).unwrap();
        let sd = state_derivative(&io, &plus).unwrap();
        let qfi = qfi_sld(&sd).unwrap();
        assert_abs_diff_eq!(fi, qfi, epsilon = tol::CLASSIFY);
        assert_abs_diff_eq!(fi, 1.0, epsilon = tol::CLASSIFY);
    }
}

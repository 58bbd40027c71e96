//! Golden reproduction suite.
//!
//! This module pins the library to its reference numbers.  The
//! centerpiece is a three-dimensional construction that separates the
//! coherence measure from the best unitary-encoding quantum Fisher
//! information: a nine-operator rank-one channel whose post-selection
//! FI on the maximally coherent qutrit is ≈ 0.9410, strictly above the
//! 8/9 ≈ 0.8889 ceiling of every diagonal-generator unitary family on
//! the same state.  Coherence measured through channels with
//! θ-dependent operators is therefore a genuinely stronger resource
//! than phase-encoding alone — the construction witnesses the gap.
//!
//! Everything here is bit-deterministic: coefficients are derived from
//! closed-form expressions (√0.4, √0.6, third-roots-of-unity phases,
//! 1/√3), never from decimal literals, and the qubit consistency case
//! runs the optimizer with fixed seeds.  The suite is cheap enough to
//! run on every commit.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::fisher::{classical_fi, max_unitary_qfi_pure};
use crate::iochannel::{postselect_distribution, ParametrizedIO};
use crate::optimize::{
    family_to_io, maximize_coherence, FamilyGroup, OptimizerBudget, StructuredFamilyPoint,
};
use crate::qcore::{maximally_coherent_state, random_mixed_state, CMatrix};

/// The published four-decimal value of the counterexample channel's
/// classical FI on the maximally coherent qutrit.
pub const COUNTEREXAMPLE_FI: f64 = 0.9410;

/// Rounding tolerance for [`COUNTEREXAMPLE_FI`] (four decimals).
pub const COUNTEREXAMPLE_FI_TOL: f64 = 5e-4;

/// The published four-decimal value of the unitary-encoding ceiling on
/// the same state; the exact value is 8/9.
pub const UNITARY_CEILING: f64 = 0.8889;

/// Rounding tolerance for [`UNITARY_CEILING`].
pub const UNITARY_CEILING_TOL: f64 = 1e-4;

/// Required minimum for the gap between the two values above.
pub const REQUIRED_GAP: f64 = 0.05;

/// The three-group structured point behind the counterexample channel.
///
/// Group `g` has diagonal weights `delta_g` — (0, 0.4, 0.6) cyclically
/// shifted — the 3×3 discrete-Fourier frame `F[x, n] = e^{2πi·xn/3}/√3`,
/// and rate vector (0, 1, 0) for the first group, (1, 0, 0) for the
/// other two.  Per-slot weights sum to one by construction, and every
/// coefficient is derived from the closed forms, not decimal literals.
pub fn counterexample_point() -> StructuredFamilyPoint {
    let third = 2.0 * std::f64::consts::PI / 3.0;
    let frame = CMatrix::from_fn(3, 3, |x, n| {
        Complex64::from_polar(1.0 / 3.0_f64.sqrt(), third * (x * n) as f64)
    });
    let deltas = [
        vec![0.0, 0.4, 0.6],
        vec![0.4, 0.6, 0.0],
        vec![0.6, 0.0, 0.4],
    ];
    let rates = [
        vec![0.0, 1.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0],
    ];
    let groups = deltas
        .into_iter()
        .zip(rates)
        .map(|(delta, rate)| {
            FamilyGroup::new(delta, frame.clone(), rate).expect("closed-form group")
        })
        .collect();
    StructuredFamilyPoint::new(3, groups).expect("closed-form point")
}

/// The nine-operator rank-one counterexample channel, anchored at
/// offset zero: operator `x` writes row
/// `c_n = F[x mod 3, n]·√delta_{x/3}[n]` to the fresh output label `x`.
///
/// The channel passes validation with the group-diagonal certificate
/// (the rate partition has two groups: the first three operators and
/// the remaining six), while the finer construction groups of three sum
/// to the diagonals diag(0, 0.4, 0.6), diag(0.4, 0.6, 0) and
/// diag(0.6, 0, 0.4).
pub fn build_counterexample_io() -> ParametrizedIO {
    family_to_io(&counterexample_point(), 0.0).expect("closed-form channel is valid")
}

/// How a golden case compares its recomputed value to the expectation.
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// Pass when |recomputed − expected| ≤ tolerance.
    Within,
    /// Pass when recomputed ≥ expected (tolerance unused).
    AtLeast,
}

/// One golden case: a frozen expectation, the freshly recomputed
/// full-precision value, and the verdict.
#[derive(Clone, Debug, Serialize)]
pub struct GoldenCase {
    pub name: String,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    /// Where the expected value comes from: a published reference
    /// number, an exact closed form, or a value derived from either.
    pub provenance: String,
    pub recomputed: f64,
    pub passed: bool,
    pub detail: String,
}

impl GoldenCase {
    fn judge(mut self) -> Self {
        self.passed = match self.comparison {
            Comparison::Within => (self.recomputed - self.expected).abs() <= self.tolerance,
            Comparison::AtLeast => self.recomputed >= self.expected,
        };
        self
    }
}

/// Full report of the golden suite.
#[derive(Clone, Debug, Serialize)]
pub struct GoldenReport {
    pub cases: Vec<GoldenCase>,
    pub all_passed: bool,
}

fn classical_value_of_counterexample() -> Result<f64> {
    let psi = maximally_coherent_state(3);
    let io = build_counterexample_io();
    classical_fi(&postselect_distribution(&io, &psi)?)
}

fn unitary_ceiling_value() -> Result<f64> {
    let psi = maximally_coherent_state(3);
    Ok(max_unitary_qfi_pure(&psi)?.0)
}

/// Budget for the qubit consistency case: fixed seed, enough restarts
/// and iterations to land within 1e-2 relative of the closed form on
/// every sampled state.
fn consistency_budget() -> OptimizerBudget {
    OptimizerBudget {
        restarts: 20,
        max_iters: 40,
        seed: 0,
        ..OptimizerBudget::default()
    }
}

fn qubit_consistency_value() -> Result<(f64, f64)> {
    let budget = consistency_budget();
    let mut worst_rel = 0.0f64;
    let mut worst_overshoot = 0.0f64;
    for seed in 0..50u64 {
        let rho = random_mixed_state(2, seed);
        let report = maximize_coherence(&rho, 0.0, &budget)?;
        let analytic = report
            .analytic_value
            .as_ref()
            .expect("qubit reports carry the closed form")
            .value;
        worst_rel = worst_rel.max((analytic - report.lower_bound).abs() / analytic);
        worst_overshoot = worst_overshoot.max(report.lower_bound - analytic);
    }
    Ok((worst_rel, worst_overshoot))
}

/// Runs the four golden cases and reports every comparison.
///
/// The suite never fails as a function — mismatches and internal
/// errors alike are reported per case — and it is fully deterministic:
/// fixed constructions, fixed seeds, no environment dependence.
pub fn run_golden_suite() -> GoldenReport {
    let mut cases = Vec::with_capacity(4);

    let f1 = classical_value_of_counterexample();
    cases.push(
        GoldenCase {
            name: "counterexample-classical-fi".into(),
            expected: COUNTEREXAMPLE_FI,
            tolerance: COUNTEREXAMPLE_FI_TOL,
            comparison: Comparison::Within,
            provenance: "published".into(),
            recomputed: *f1.as_ref().unwrap_or(&f64::NAN),
            passed: false,
            detail: match &f1 {
                Ok(v) => format!("full-precision value {v:.16}"),
                Err(e) => format!("evaluation failed: {e}"),
            },
        }
        .judge(),
    );

    let f2 = unitary_ceiling_value();
    cases.push(
        GoldenCase {
            name: "unitary-encoding-ceiling".into(),
            expected: UNITARY_CEILING,
            tolerance: UNITARY_CEILING_TOL,
            comparison: Comparison::Within,
            provenance: "published".into(),
            recomputed: *f2.as_ref().unwrap_or(&f64::NAN),
            passed: false,
            detail: match &f2 {
                Ok(v) => format!(
                    "full-precision value {v:.16}; distance from exact 8/9 is {:.3e}",
                    (v - 8.0 / 9.0).abs()
                ),
                Err(e) => format!("evaluation failed: {e}"),
            },
        }
        .judge(),
    );

    let gap = match (&f1, &f2) {
        (Ok(a), Ok(b)) => a - b,
        _ => f64::NAN,
    };
    cases.push(
        GoldenCase {
            name: "coherence-exceeds-unitary-encoding".into(),
            expected: REQUIRED_GAP,
            tolerance: 0.0,
            comparison: Comparison::AtLeast,
            provenance: "derived".into(),
            recomputed: gap,
            passed: false,
            detail: "gap between the two values above; pass requires recomputed ≥ expected"
                .into(),
        }
        .judge(),
    );

    let consistency = qubit_consistency_value();
    cases.push(
        GoldenCase {
            name: "qubit-closed-form-consistency".into(),
            expected: 0.0,
            tolerance: 1e-2,
            comparison: Comparison::Within,
            provenance: "closed-form".into(),
            recomputed: *consistency.as_ref().map(|(rel, _)| rel).unwrap_or(&f64::NAN),
            passed: false,
            detail: match &consistency {
                Ok((rel, over)) => format!(
                    "50 random qubit states: worst relative gap {rel:.3e}, \
                     worst overshoot above the closed form {over:.3e}"
                ),
                Err(e) => format!("evaluation failed: {e}"),
            },
        }
        .judge(),
    );

    let all_passed = cases.iter().all(|c| c.passed);
    GoldenReport { cases, all_passed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::{qfi_sld, state_derivative};
    use crate::iochannel::{rank1_certificate, validate_io, ValidityCertificate};
    use crate::optimize::qfi_of_best;
    use crate::tol;
    use approx::assert_abs_diff_eq;

    /// The frozen full-precision classical FI of the counterexample
    /// channel on the maximally coherent qutrit.
    const FROZEN_F1: f64 = 0.940_988_178_035_770_5;

    #[test]
    fn counterexample_channel_has_the_published_structure() {
        let io = build_counterexample_io();
        assert_eq!(io.outcomes(), 9);
        assert_eq!(io.dim(), 3);
        // Anchored completeness is exact up to rounding.
        assert!(io.completeness_residual(0.0) <= 1e-12);
        // Every operator is rank one.
        assert!(rank1_certificate(&io).unwrap().all());
        // The rate partition certifies validity with two groups: the
        // three operators with rates (0,1,0), then the six with
        // (1,0,0).
        let report = validate_io(&io).unwrap();
        match report.certificate {
            ValidityCertificate::GroupDiagonal { ref groups } => {
                assert_eq!(groups.len(), 2);
                assert_eq!(groups[0].members, vec![0, 1, 2]);
                assert_eq!(groups[1].members, (3..9).collect::<Vec<_>>());
            }
            _ => panic!("counterexample must certify via the group rule"),
        }
    }

    #[test]
    fn construction_groups_sum_to_the_published_diagonals() {
        let io = build_counterexample_io();
        let expected = [
            [0.0, 0.4, 0.6],
            [0.4, 0.6, 0.0],
            [0.6, 0.0, 0.4],
        ];
        for (g, diag) in expected.iter().enumerate() {
            let mut total = CMatrix::zeros(3, 3);
            for x in 3 * g..3 * g + 3 {
                let e = io.kraus()[x].matrix(9, 0.0);
                total += e.adjoint() * e;
            }
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { diag[i] } else { 0.0 };
                    assert_abs_diff_eq!(total[(i, j)].re, want, epsilon = 1e-12);
                    assert_abs_diff_eq!(total[(i, j)].im, 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn coefficient_rows_match_the_closed_forms() {
        // Rebuild each row through an independent arithmetic path:
        // polar form with the weight folded into the modulus.
        let io = build_counterexample_io();
        let third = 2.0 * std::f64::consts::PI / 3.0;
        let deltas: [[f64; 3]; 3] = [
            [0.0, 0.4, 0.6],
            [0.4, 0.6, 0.0],
            [0.6, 0.0, 0.4],
        ];
        for x in 0..9 {
            let (g, row) = (x / 3, x % 3);
            let k = &io.kraus()[x];
            assert_eq!(k.labels(), vec![x; 3], "fresh output label per operator");
            for (n, (&actual, &weight)) in
                k.coefficients().iter().zip(&deltas[g]).enumerate()
            {
                let expected =
                    Complex64::from_polar((weight / 3.0).sqrt(), third * (row * n) as f64);
                assert!(
                    (actual - expected).norm() <= 1e-12,
                    "operator {x}, column {n}"
                );
            }
            let want_rates = if x < 3 {
                vec![0.0, 1.0, 0.0]
            } else {
                vec![1.0, 0.0, 0.0]
            };
            assert_eq!(k.rates(), want_rates.as_slice());
        }
    }

    #[test]
    fn classical_value_matches_the_frozen_number() {
        let value = classical_value_of_counterexample().unwrap();
        assert_abs_diff_eq!(value, FROZEN_F1, epsilon = 1e-12);
        assert_abs_diff_eq!(value, COUNTEREXAMPLE_FI, epsilon = COUNTEREXAMPLE_FI_TOL);
    }

    #[test]
    fn unitary_ceiling_matches_the_exact_fraction() {
        let value = unitary_ceiling_value().unwrap();
        assert_abs_diff_eq!(value, 8.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(value, UNITARY_CEILING, epsilon = UNITARY_CEILING_TOL);
    }

    #[test]
    fn the_gap_is_strict() {
        let f1 = classical_value_of_counterexample().unwrap();
        let f2 = unitary_ceiling_value().unwrap();
        assert!(
            f1 - f2 >= REQUIRED_GAP,
            "gap {} under the required {REQUIRED_GAP}",
            f1 - f2
        );
    }

    #[test]
    fn seeding_the_optimizer_with_the_point_reaches_the_value() {
        let psi = maximally_coherent_state(3);
        let budget = OptimizerBudget {
            restarts: 5,
            max_iters: 25,
            init_points: vec![counterexample_point()],
            ..OptimizerBudget::default()
        };
        let report = maximize_coherence(&psi, 0.0, &budget).unwrap();
        assert!(
            report.lower_bound >= COUNTEREXAMPLE_FI - 1e-3,
            "seeded bound {}",
            report.lower_bound
        );
        // The winner's quantum value dominates its classical one.
        let q = qfi_of_best(&report, &psi).unwrap();
        assert!(q >= report.lower_bound - 1e-9);
    }

    #[test]
    fn quantum_value_of_the_counterexample_dominates() {
        let psi = maximally_coherent_state(3);
        let io = build_counterexample_io();
        let classical = classical_value_of_counterexample().unwrap();
        let quantum = qfi_sld(&state_derivative(&io, &psi).unwrap()).unwrap();
        assert!(
            quantum >= classical - 1e-9,
            "quantum {quantum} below classical {classical}"
        );
    }

    #[test]
    fn golden_suite_passes_and_is_deterministic() {
        let report = run_golden_suite();
        assert!(
            report.all_passed,
            "failed cases: {:?}",
            report
                .cases
                .iter()
                .filter(|c| !c.passed)
                .map(|c| (&c.name, c.recomputed))
                .collect::<Vec<_>>()
        );
        assert_eq!(report.cases.len(), 4);
        let names: Vec<&str> = report.cases.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "counterexample-classical-fi",
                "unitary-encoding-ceiling",
                "coherence-exceeds-unitary-encoding",
                "qubit-closed-form-consistency",
            ]
        );
        assert_abs_diff_eq!(report.cases[0].recomputed, FROZEN_F1, epsilon = tol::EXACT);
        // Bit-determinism across runs.
        let again = run_golden_suite();
        let a = serde_json::to_string(&report).unwrap();
        let b = serde_json::to_string(&again).unwrap();
        assert_eq!(a, b);
    }
}

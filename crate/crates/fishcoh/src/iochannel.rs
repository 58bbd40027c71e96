//! Incoherent parametrized measurement channels.
//!
//! A channel here is a finite family of Kraus operators, each of which
//! maps every preferred-basis vector to (a multiple of) a single
//! preferred-basis vector — the defining property of an incoherent
//! operation — and carries a phase that grows linearly in the parameter:
//! column `n` of operator `x` holds `c_n e^{i r_n (θ−θ0)}` at output row
//! `g(n)`, with the phase rate `r_n ∈ [0, 1]`.
//!
//! Because only the value (absorbed into `c`) and the first derivative
//! (the rate `r`) at the anchor `θ0` enter any Fisher-information
//! quantity, linear phases lose no generality for the measure while
//! making trace preservation for *all* parameter values decidable: if the
//! operators are grouped by identical rate vector and every group's
//! summed Gram matrix is diagonal, the parameter-dependent phases cancel
//! groupwise at every θ (the group-diagonal certificate). A numeric
//! parameter-grid check covers channels outside that sufficient
//! condition.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::FisherDatum;
use crate::qcore::{
    eig_hermitian, largest_offdiagonal, max_offdiagonal_modulus, seeded_rng, CMatrix,
    DensityMatrix,
};
use crate::tol;

/// One incoherent Kraus operator with linear phase rates, stored
/// column-wise: column `n` maps `|n⟩` to `c[n]·e^{i r[n] (θ−θ0)} |g[n]⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncoherentKraus {
    g: Vec<usize>,
    c: Vec<Complex64>,
    r: Vec<f64>,
}

impl IncoherentKraus {
    /// Validate and wrap the column data: equal lengths, rates in [0, 1].
    pub fn new(g: Vec<usize>, c: Vec<Complex64>, r: Vec<f64>) -> Result<Self> {
        if g.len() != c.len() || g.len() != r.len() || g.is_empty() {
            return Err(Error::MalformedPayload {
                what: format!(
                    "operator columns disagree: {} labels, {} coefficients, {} rates",
                    g.len(),
                    c.len(),
                    r.len()
                ),
            });
        }
        for (index, &value) in r.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::RateOutOfRange { index, value });
            }
        }
        Ok(Self { g, c, r })
    }

    /// Input dimension (number of columns).
    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// Output label per input column.
    pub fn labels(&self) -> &[usize] {
        &self.g
    }

    /// Coefficient per input column (value of the operator entry at θ0).
    pub fn coefficients(&self) -> &[Complex64] {
        &self.c
    }

    /// Phase rate per input column.
    pub fn rates(&self) -> &[f64] {
        &self.r
    }

    /// Total weight `Σ_n |c_n|²`.
    pub fn weight(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest output label carrying nonzero coefficient, if any.
    fn max_support_label(&self) -> Option<usize> {
        self.g
            .iter()
            .zip(&self.c)
            .filter(|(_, z)| z.norm_sqr() > 0.0)
            .map(|(&label, _)| label)
            .max()
    }

    /// Dense matrix of the operator at parameter offset `delta = θ − θ0`,
    /// with `out_dim` output rows.
    pub fn matrix(&self, out_dim: usize, delta: f64) -> CMatrix {
        let mut m = CMatrix::zeros(out_dim, self.dim());
        for n in 0..self.dim() {
            let phase = Complex64::from_polar(1.0, self.r[n] * delta);
            m[(self.g[n], n)] += self.c[n] * phase;
        }
        m
    }

    /// Dense matrix of the operator's parameter derivative at offset
    /// `delta`: column `n` holds `i r_n c_n e^{i r_n delta}`.
    pub fn rate_derivative_matrix(&self, out_dim: usize, delta: f64) -> CMatrix {
        let mut m = CMatrix::zeros(out_dim, self.dim());
        for n in 0..self.dim() {
            let phase = Complex64::from_polar(1.0, self.r[n] * delta);
            m[(self.g[n], n)] += Complex64::new(0.0, self.r[n]) * self.c[n] * phase;
        }
        m
    }

    /// The operator frozen at parameter offset `delta`: phases absorbed
    /// into the coefficients, rates zeroed. The result is a static
    /// (parameter-independent) incoherent operator.
    pub fn at_offset(&self, delta: f64) -> IncoherentKraus {
        let c = self
            .c
            .iter()
            .zip(&self.r)
            .map(|(z, &r)| z * Complex64::from_polar(1.0, r * delta))
            .collect();
        IncoherentKraus {
            g: self.g.clone(),
            c,
            r: vec![0.0; self.dim()],
        }
    }

    /// True when every rate is exactly zero (a static operator).
    pub fn is_static(&self) -> bool {
        self.r.iter().all(|&r| r == 0.0)
    }

    /// Gram matrix `E(θ0+delta)† E(θ0+delta)` on the input space.
    fn gram(&self, delta: f64) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |n, m| {
            if self.g[n] == self.g[m] {
                let phase = Complex64::from_polar(1.0, (self.r[m] - self.r[n]) * delta);
                self.c[n].conj() * self.c[m] * phase
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// A complete incoherent parametrized channel: an ordered family of
/// [`IncoherentKraus`] anchored at `theta0`.
///
/// Construction drops operators with total weight below the weight floor
/// and enforces trace preservation at the anchor; the all-θ certificate
/// is the job of [`validate_io`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParametrizedIO {
    dim: usize,
    theta0: f64,
    kraus: Vec<IncoherentKraus>,
}

impl ParametrizedIO {
    /// Validate and wrap a Kraus family.
    pub fn new(dim: usize, theta0: f64, kraus: Vec<IncoherentKraus>) -> Result<Self> {
        for k in &kraus {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: k.dim(),
                });
            }
        }
        let kraus: Vec<IncoherentKraus> = kraus
            .into_iter()
            .filter(|k| k.weight() > tol::WEIGHT_FLOOR)
            .collect();
        if kraus.is_empty() {
            return Err(Error::EmptyChannel);
        }
        let io = Self { dim, theta0, kraus };
        let residual = io.completeness_residual(0.0);
        if residual > tol::COMPLETENESS_ANCHOR {
            return Err(Error::Incomplete {
                residual,
                at_offset: 0.0,
            });
        }
        Ok(io)
    }

    /// Input dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Anchor parameter value.
    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// The Kraus family, in outcome order.
    pub fn kraus(&self) -> &[IncoherentKraus] {
        &self.kraus
    }

    /// Number of outcomes.
    pub fn outcomes(&self) -> usize {
        self.kraus.len()
    }

    /// Dimension of the output space: spans the input space and every
    /// output label in use.
    pub fn output_dim(&self) -> usize {
        let max_label = self
            .kraus
            .iter()
            .filter_map(IncoherentKraus::max_support_label)
            .max()
            .unwrap_or(0);
        self.dim.max(max_label + 1)
    }

    /// Largest entrywise deviation of `Σ_x E_x(θ)†E_x(θ)` from the
    /// identity at parameter offset `delta = θ − θ0`.
    pub fn completeness_residual(&self, delta: f64) -> f64 {
        let mut total = CMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            total += k.gram(delta);
        }
        (total - CMatrix::identity(self.dim, self.dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// The channel's operators frozen at `theta` (phases absorbed,
    /// rates zeroed) — the static Kraus set an observer at that parameter
    /// value would hold.
    pub fn static_kraus_at(&self, theta: f64) -> Vec<IncoherentKraus> {
        let delta = theta - self.theta0;
        self.kraus.iter().map(|k| k.at_offset(delta)).collect()
    }

    /// Single-operator identity channel.
    pub fn identity(dim: usize, theta0: f64) -> Self {
        let op = IncoherentKraus::new(
            (0..dim).collect(),
            vec![Complex64::new(1.0, 0.0); dim],
            vec![0.0; dim],
        )
        .expect("identity operator is well-formed");
        Self::new(dim, theta0, vec![op]).expect("identity channel is complete")
    }

    /// Fully dephasing channel `{|n⟩⟨n|}`.
    pub fn dephasing(dim: usize, theta0: f64) -> Self {
        let ops = (0..dim)
            .map(|n| {
                let mut c = vec![Complex64::new(0.0, 0.0); dim];
                c[n] = Complex64::new(1.0, 0.0);
                IncoherentKraus::new(vec![n; dim], c, vec![0.0; dim])
                    .expect("projector operator is well-formed")
            })
            .collect();
        Self::new(dim, theta0, ops).expect("dephasing channel is complete")
    }
}

/// Per-operator rank-one flags: operator `x` is rank-one when its Gram
/// matrix at the anchor has exactly one eigenvalue above the spectral
/// tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Rank1Certificate {
    /// Flag per Kraus operator, in outcome order.
    pub flags: Vec<bool>,
}

impl Rank1Certificate {
    /// True when every operator is rank-one.
    pub fn all(&self) -> bool {
        self.flags.iter().all(|&f| f)
    }
}

/// Compute the per-operator rank-one flags of a channel.
pub fn rank1_certificate(io: &ParametrizedIO) -> Result<Rank1Certificate> {
    let mut flags = Vec::with_capacity(io.kraus.len());
    for k in &io.kraus {
        let es = eig_hermitian(&k.gram(0.0))?;
        let above = es.values.iter().filter(|&&v| v > tol::SPECTRAL).count();
        flags.push(above == 1);
    }
    Ok(Rank1Certificate { flags })
}

/// One group of the group-diagonal validity certificate: the operators
/// sharing a rate vector, their summed Gram diagonal, and how far that
/// sum is from diagonal.
#[derive(Debug, Clone, Serialize)]
pub struct GroupCertificateEntry {
    /// The shared rate vector.
    pub rates: Vec<f64>,
    /// Outcome indices of the member operators.
    pub members: Vec<usize>,
    /// Real diagonal of the group's summed Gram matrix.
    pub diagonal: Vec<f64>,
    /// Largest off-diagonal modulus of the group's summed Gram matrix.
    pub offdiagonal_residual: f64,
}

/// Which check certified completeness for all parameter values.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidityCertificate {
    /// Exact certificate: every rate-vector group has a diagonal Gram
    /// sum, so the parameter-dependent phases cancel at every θ.
    GroupDiagonal { groups: Vec<GroupCertificateEntry> },
    /// Numeric certificate: completeness verified on an equispaced
    /// parameter grid spanning one full phase period around the anchor.
    ThetaGrid { points: usize, max_residual: f64 },
}

/// Result of [`validate_io`]: the anchor residual, the certificate that
/// established all-θ completeness, and per-operator rank-one flags.
#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    pub dim: usize,
    pub operators: usize,
    pub theta0: f64,
    /// Exact completeness residual at the anchor parameter.
    pub completeness_residual_theta0: f64,
    pub certificate: ValidityCertificate,
    /// Rank-one flag per operator (informational; not required for
    /// validity).
    pub rank1_flags: Vec<bool>,
}

/// Number of grid points used by the numeric fallback certificate.
const GRID_POINTS: usize = 11;

/// Certify that a channel is trace preserving for every parameter value.
///
/// First the exact route: partition the operators by identical rate
/// vector and check each group's summed Gram matrix is diagonal — a
/// sufficient condition, since conjugation by the group's common diagonal
/// phase unitary then leaves each group sum invariant at every θ. If some
/// group sum is not diagonal, fall back to a numeric completeness check
/// on [`GRID_POINTS`] equispaced parameter offsets in `[−π, π]`.
pub fn validate_io(io: &ParametrizedIO) -> Result<ValidityReport> {
    let completeness_residual_theta0 = io.completeness_residual(0.0);
    if completeness_residual_theta0 > tol::COMPLETENESS_ANCHOR {
        return Err(Error::Incomplete {
            residual: completeness_residual_theta0,
            at_offset: 0.0,
        });
    }

    // Group operators by bit-identical rate vector, preserving first-seen
    // order. Rates come from shared construction paths, so exact equality
    // is the right notion; a channel whose equal rates differ in the last
    // bit simply falls through to the grid check.
    let mut groups: Vec<(Vec<u64>, Vec<usize>)> = Vec::new();
    for (x, k) in io.kraus.iter().enumerate() {
        let key: Vec<u64> = k.rates().iter().map(|r| r.to_bits()).collect();
        match groups.iter_mut().find(|(existing, _)| *existing == key) {
            Some((_, members)) => members.push(x),
            None => groups.push((key, vec![x])),
        }
    }

    let mut entries = Vec::with_capacity(groups.len());
    let mut all_diagonal = true;
    for (_, members) in &groups {
        let mut sum = CMatrix::zeros(io.dim, io.dim);
        for &x in members {
            sum += io.kraus[x].gram(0.0);
        }
        let offdiagonal_residual = max_offdiagonal_modulus(&sum);
        if offdiagonal_residual > tol::COMPLETENESS_ANCHOR {
            all_diagonal = false;
        }
        entries.push(GroupCertificateEntry {
            rates: io.kraus[members[0]].rates().to_vec(),
            members: members.clone(),
            diagonal: (0..io.dim).map(|n| sum[(n, n)].re).collect(),
            offdiagonal_residual,
        });
    }

    let certificate = if all_diagonal {
        ValidityCertificate::GroupDiagonal { groups: entries }
    } else {
        let mut max_residual = 0.0f64;
        for k in 0..GRID_POINTS {
            let offset =
                -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / (GRID_POINTS - 1) as f64;
            let residual = io.completeness_residual(offset);
            if residual > tol::COMPLETENESS_GRID {
                return Err(Error::Incomplete {
                    residual,
                    at_offset: offset,
                });
            }
            max_residual = max_residual.max(residual);
        }
        ValidityCertificate::ThetaGrid {
            points: GRID_POINTS,
            max_residual,
        }
    };

    Ok(ValidityReport {
        dim: io.dim,
        operators: io.kraus.len(),
        theta0: io.theta0,
        completeness_residual_theta0,
        certificate,
        rank1_flags: rank1_certificate(io)?.flags,
    })
}

/// Apply the channel at parameter value `theta`: `Σ_x E_x(θ) ρ E_x(θ)†`.
pub fn apply_io(io: &ParametrizedIO, rho: &DensityMatrix, theta: f64) -> Result<DensityMatrix> {
    if rho.dim() != io.dim {
        return Err(Error::DimensionMismatch {
            expected: io.dim,
            got: rho.dim(),
        });
    }
    let delta = theta - io.theta0;
    let out = io.output_dim();
    let mut result = CMatrix::zeros(out, out);
    for k in &io.kraus {
        let e = k.matrix(out, delta);
        result += &e * rho.matrix() * e.adjoint();
    }
    let result = (&result + result.adjoint()).scale(0.5);
    DensityMatrix::new(result)
}

/// Outcome probabilities and their exact parameter derivatives at the
/// anchor: `p_x = tr(E_x ρ E_x†)` and
/// `d_x = Re[i Σ_{n,m: g(n)=g(m)} (r_n − r_m) c_n c_m* ρ_nm]` — the
/// analytic derivative of the phase-twisted Gram form, no finite
/// differences.
pub fn postselect_distribution(io: &ParametrizedIO, rho: &DensityMatrix) -> Result<FisherDatum> {
    if rho.dim() != io.dim {
        return Err(Error::DimensionMismatch {
            expected: io.dim,
            got: rho.dim(),
        });
    }
    let mut p = Vec::with_capacity(io.kraus.len());
    let mut d = Vec::with_capacity(io.kraus.len());
    for k in &io.kraus {
        let mut prob = 0.0;
        let mut deriv = 0.0;
        for n in 0..io.dim {
            for m in 0..io.dim {
                if k.g[n] != k.g[m] {
                    continue;
                }
                // tr(E ρ E†) accumulates c_n ρ_nm c_m*; its θ-derivative
                // inserts i(r_n − r_m) from the linear phases.
                let core = k.c[n] * rho.entry(n, m) * k.c[m].conj();
                prob += core.re;
                deriv += (Complex64::new(0.0, k.r[n] - k.r[m]) * core).re;
            }
        }
        p.push(prob);
        d.push(deriv);
    }
    FisherDatum::new(p, d)
}

/// A weighted list of post-measurement states.
#[derive(Debug, Clone)]
pub struct ClassicalEnsemble {
    members: Vec<(f64, DensityMatrix)>,
}

impl ClassicalEnsemble {
    /// Validate and wrap ensemble members: weights in [0, 1] summing
    /// to 1.
    pub fn new(members: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        let total: f64 = members.iter().map(|(t, _)| t).sum();
        if (total - 1.0).abs() > tol::SPECTRAL {
            return Err(Error::InvariantViolated {
                what: format!("ensemble weights sum to {total}, not 1"),
            });
        }
        if let Some((t, _)) = members
            .iter()
            .find(|(t, _)| !(-tol::EXACT..=1.0 + tol::EXACT).contains(t))
        {
            return Err(Error::InvariantViolated {
                what: format!("ensemble weight {t} outside [0, 1]"),
            });
        }
        Ok(Self { members })
    }

    /// The (weight, state) members.
    pub fn members(&self) -> &[(f64, DensityMatrix)] {
        &self.members
    }
}

/// Measure with a static (parameter-independent) complete Kraus set and
/// keep the record: weights `t_l = tr(K_l ρ K_l†)` and normalized
/// post-measurement states `ρ_l`; members below the weight floor are
/// dropped.
pub fn postmeasurement_ensemble(
    kraus_set: &[IncoherentKraus],
    rho: &DensityMatrix,
) -> Result<ClassicalEnsemble> {
    let dim = rho.dim();
    for k in kraus_set {
        if k.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: k.dim(),
            });
        }
    }
    let mut total = CMatrix::zeros(dim, dim);
    for k in kraus_set {
        total += k.gram(0.0);
    }
    let residual = (total - CMatrix::identity(dim, dim))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if residual > tol::COMPLETENESS_ANCHOR {
        return Err(Error::Incomplete {
            residual,
            at_offset: 0.0,
        });
    }
    let out = kraus_set
        .iter()
        .filter_map(IncoherentKraus::max_support_label)
        .max()
        .unwrap_or(0)
        .max(dim - 1)
        + 1;
    let mut members = Vec::new();
    for k in kraus_set {
        let e = k.matrix(out, 0.0);
        let raw = &e * rho.matrix() * e.adjoint();
        let weight = raw.trace().re;
        if weight < tol::WEIGHT_FLOOR {
            continue;
        }
        let state = (&raw + raw.adjoint()).scale(0.5).unscale(weight);
        members.push((weight, DensityMatrix::new(state)?));
    }
    ClassicalEnsemble::new(members)
}

/// Split every operator into rank-one components (with fresh output
/// labels) without changing the channel's action on diagonal data.
///
/// Each operator factors as `E_x(θ) = E_x(θ0) · D_x(θ)` with `D_x` the
/// diagonal phase unitary of its rates. Eigendecomposing the static Gram
/// `E_x(θ0)†E_x(θ0) = Σ_i λ_i |v_i⟩⟨v_i|` yields rank-one components
/// `√λ_i |fresh⟩⟨v_i| D_x(θ)` over fresh output labels (flattened in
/// `(x, i)` order); components with `λ_i` below the weight floor are
/// discarded. The refined channel is complete at every θ whenever the
/// original is, every operator passes the rank-one certificate, and
/// post-selection Fisher information never decreases.
pub fn refine_to_rank1(io: &ParametrizedIO) -> Result<ParametrizedIO> {
    let mut refined = Vec::new();
    let mut fresh = 0usize;
    for k in &io.kraus {
        let es = eig_hermitian(&k.gram(0.0))?;
        for (i, &lambda) in es.values.iter().enumerate() {
            if lambda < tol::WEIGHT_FLOOR {
                continue;
            }
            let root = lambda.sqrt();
            let c: Vec<Complex64> = (0..io.dim)
                .map(|n| es.vectors[(n, i)].conj() * root)
                .collect();
            refined.push(IncoherentKraus::new(
                vec![fresh; io.dim],
                c,
                k.rates().to_vec(),
            )?);
            fresh += 1;
        }
    }
    ParametrizedIO::new(io.dim, io.theta0, refined)
}

/// The explicit three-operator channel that certifies strictly positive
/// coherence for any coherent state.
///
/// Built on the largest-modulus off-diagonal pair `(j, k)`: two
/// interfering operators mix columns `j` (rate 1) and `k` (rate 0) into
/// output rows `j` and `k` with the phase of `c_j` aligned so that
/// `arg(ρ_jk) + θ0 + γ = π/4` (the most derivative-robust alignment), and
/// one static identity operator on the complementary columns. On the pair
/// `(j, k)` the outcome probabilities are
/// `(ρ_jj + ρ_kk)/2 ± (√2/2)|ρ_jk|` with derivatives `∓(√2/2)|ρ_jk|`, so
/// the information is strictly positive whenever `ρ_jk ≠ 0`.
pub fn witness_io(rho: &DensityMatrix, theta0: f64) -> Result<ParametrizedIO> {
    let d = rho.dim();
    let max_offdiagonal = max_offdiagonal_modulus(rho.matrix());
    let Some((j, k, entry)) = largest_offdiagonal(rho.matrix()) else {
        return Err(Error::StateIncoherent { max_offdiagonal });
    };
    if entry.norm() <= tol::CLASSIFY {
        return Err(Error::StateIncoherent { max_offdiagonal });
    }
    let alpha = entry.arg();
    let gamma = std::f64::consts::FRAC_PI_4 - alpha - theta0;
    let half_root = Complex64::new(0.5f64.sqrt(), 0.0);
    let cj = half_root * Complex64::from_polar(1.0, theta0 + gamma);

    let zero = Complex64::new(0.0, 0.0);
    let mut c1 = vec![zero; d];
    let mut c2 = vec![zero; d];
    let mut rates = vec![0.0; d];
    let mut labels1 = vec![j; d];
    let mut labels2 = vec![k; d];
    c1[j] = cj;
    c1[k] = half_root;
    c2[j] = cj;
    c2[k] = -half_root;
    rates[j] = 1.0;
    // The mixing operators send both columns to a single output row;
    // complementary columns carry zero weight there.
    for n in 0..d {
        if n != j && n != k {
            labels1[n] = j;
            labels2[n] = k;
        }
    }
    let mut ops = vec![
        IncoherentKraus::new(labels1, c1, rates.clone())?,
        IncoherentKraus::new(labels2, c2, rates.clone())?,
    ];
    if d > 2 {
        let mut c3 = vec![Complex64::new(1.0, 0.0); d];
        c3[j] = zero;
        c3[k] = zero;
        ops.push(IncoherentKraus::new(
            (0..d).collect(),
            c3,
            vec![0.0; d],
        )?);
    }
    ParametrizedIO::new(d, theta0, ops)
}

/// Compose a parametrized channel with a static incoherent Kraus set:
/// the family `{E_x K_l}` over lexicographic `(x, l)` outcomes.
///
/// Every `K_l` must be static (zero rates) with output labels inside the
/// channel's input space. The composition stays inside the incoherent
/// class and stays complete at every θ when both factors are complete.
pub fn compose_with_static(
    io: &ParametrizedIO,
    kraus_set: &[IncoherentKraus],
) -> Result<ParametrizedIO> {
    let d = io.dim();
    let mut composed = Vec::new();
    for kl in kraus_set {
        if kl.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: kl.dim(),
            });
        }
        if !kl.is_static() {
            return Err(Error::InvariantViolated {
                what: "composition requires static (zero-rate) operators".into(),
            });
        }
        if let Some(&bad) = kl.labels().iter().find(|&&label| label >= d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad + 1,
            });
        }
    }
    for ex in io.kraus() {
        for kl in kraus_set {
            let mut g = Vec::with_capacity(d);
            let mut c = Vec::with_capacity(d);
            let mut r = Vec::with_capacity(d);
            for n in 0..d {
                let mid = kl.labels()[n];
                g.push(ex.labels()[mid]);
                c.push(kl.coefficients()[n] * ex.coefficients()[mid]);
                r.push(ex.rates()[mid]);
            }
            composed.push(IncoherentKraus::new(g, c, r)?);
        }
    }
    ParametrizedIO::new(d, io.theta0(), composed)
}

/// Random valid channel with genuine parameter sensitivity; deterministic
/// per seed.
///
/// Construction: one or two groups, each with `dim` operators sharing a
/// non-injective column map `g`, a common rate vector, and coefficients
/// `√(δ_n/dim) e^{iφ_n} ω^{x·a_n}` where `ω = e^{2πi/dim}` and the
/// twists `a_n` are distinct within every output-collision class. Summing
/// a group's Grams cancels all off-diagonal terms by roots-of-unity
/// orthogonality, leaving exactly `diag(δ)`; the group weights `δ` split
/// the identity across groups, so the channel is complete at every θ with
/// the group-diagonal certificate. Colliding columns with unequal rates
/// make outcome probabilities genuinely θ-dependent, so these channels
/// exercise interference rather than degenerating to flat distributions.
pub fn random_io(dim: usize, theta0: f64, seed: u64) -> ParametrizedIO {
    assert!(dim >= 2, "interference needs at least two columns");
    let mut rng = seeded_rng(seed);
    let n_groups = 1 + (rng.random::<u32>() % 2) as usize;

    // Flat-simplex split of each diagonal slot across groups: draws
    // are slot-major, then regrouped.
    let slot_shares: Vec<Vec<f64>> = (0..dim)
        .map(|_| {
            let parts: Vec<f64> = (0..n_groups)
                .map(|_| -f64::ln(1.0 - rng.random::<f64>()))
                .collect();
            let total: f64 = parts.iter().sum();
            parts.into_iter().map(|p| p / total).collect()
        })
        .collect();
    let delta: Vec<Vec<f64>> = (0..n_groups)
        .map(|h| slot_shares.iter().map(|shares| shares[h]).collect())
        .collect();

    let omega = 2.0 * std::f64::consts::PI / dim as f64;
    let mut ops = Vec::with_capacity(n_groups * dim);
    for group_delta in &delta {
        // Non-injective column map: guarantees colliding columns whose
        // relative phases carry the parameter.
        let g: Vec<usize> = loop {
            let candidate: Vec<usize> = (0..dim)
                .map(|_| (rng.random::<u32>() as usize) % dim)
                .collect();
            let mut seen = vec![false; dim];
            let mut collision = false;
            for &label in &candidate {
                if seen[label] {
                    collision = true;
                }
                seen[label] = true;
            }
            if collision {
                break candidate;
            }
        };
        // Distinct twists within every collision class.
        let mut class_counter = vec![0usize; dim];
        let twists: Vec<usize> = g
            .iter()
            .map(|&label| {
                let t = class_counter[label];
                class_counter[label] += 1;
                t
            })
            .collect();
        let phases: Vec<f64> = (0..dim)
            .map(|_| rng.random::<f64>() * 2.0 * std::f64::consts::PI)
            .collect();
        let rates: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        for x in 0..dim {
            let c: Vec<Complex64> = (0..dim)
                .map(|n| {
                    Complex64::from_polar(
                        (group_delta[n] / dim as f64).sqrt(),
                        phases[n] + omega * (x * twists[n]) as f64,
                    )
                })
                .collect();
            ops.push(
                IncoherentKraus::new(g.clone(), c, rates.clone())
                    .expect("sampler emits well-formed operators"),
            );
        }
    }
    ParametrizedIO::new(dim, theta0, ops)
        .expect("roots-of-unity construction is complete by design")
}

// ---------------------------------------------------------------------------
// Serialized channel format.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct KrausFile {
    g: Vec<usize>,
    c: Vec<[f64; 2]>,
    r: Vec<f64>,
}

/// On-disk channel layout:
/// `{"dim": d, "theta0": t, "kraus": [{"g": […], "c": [[re,im], …], "r": […]}, …]}`,
/// 0-based labels.
#[derive(Debug, Serialize, Deserialize)]
struct IoFile {
    dim: usize,
    theta0: f64,
    kraus: Vec<KrausFile>,
}

impl ParametrizedIO {
    /// Serialize to the JSON channel format.
    pub fn to_json_string(&self) -> String {
        let kraus = self
            .kraus
            .iter()
            .map(|k| KrausFile {
                g: k.g.clone(),
                c: k.c.iter().map(|z| [z.re, z.im]).collect(),
                r: k.r.clone(),
            })
            .collect();
        serde_json::to_string_pretty(&IoFile {
            dim: self.dim,
            theta0: self.theta0,
            kraus,
        })
        .expect("channel serialization cannot fail")
    }

    /// Parse and validate the JSON channel format. Violations are
    /// reported with the failed invariant's name.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: IoFile = serde_json::from_str(text)?;
        let mut kraus = Vec::with_capacity(file.kraus.len());
        for entry in file.kraus {
            let c = entry.c.iter().map(|z| Complex64::new(z[0], z[1])).collect();
            kraus.push(IncoherentKraus::new(entry.g, c, entry.r)?);
        }
        Self::new(file.dim, file.theta0, kraus)
    }
}

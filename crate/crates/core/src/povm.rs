//! The five-element POVM built from four sign-patterned two-qubit states.
//!
//! For nonzero reals `alpha..delta` with `1/alpha^2 + 1/beta^2 + 1/gamma^2 +
//! 1/delta^2 = 1`, the states
//!
//! ```text
//! |Psi_1> = (1/alpha, 1/beta, 1/gamma, 1/delta)
//! |Psi_2> = (1/alpha, 1/beta, -1/gamma, -1/delta)
//! |Psi_3> = (1/alpha, -1/beta, 1/gamma, -1/delta)
//! |Psi_4> = (1/alpha, -1/beta, -1/gamma, 1/delta)
//! ```
//!
//! give `P_i = q^2 |Psi_i><Psi_i|` for `i = 1..4` and `P_5 = I - sum P_i`.
//! Because the sign patterns cancel off the diagonal, `P_5 = diag(u^2, v^2,
//! w^2, p^2)` with `u = sqrt(1 - 4 q^2 / alpha^2)` and so on.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matkernel::{eig_hermitian, matrix_to_pairs, CMatrix, CVector, MatError, C64};

/// Tolerance on the reciprocal-squares normalization.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Slack on `4 q^2 <= mu^2` and on the `1/q^2` range.
pub const CONSTRAINT_TOL: f64 = 1e-12;
/// Probabilities within this of `[0, 1]` are clamped; further out is an error.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// Sign of `|Psi_k>` on basis state `|j>`, `SIGNS[k][j]`.
pub const SIGNS: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, 1.0, -1.0],
    [1.0, -1.0, -1.0, 1.0],
];

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PovmError {
    #[error("parameters must be finite")]
    NonFinite,
    #[error("alpha, beta, gamma, delta must be nonzero")]
    ZeroAmplitude,
    #[error("normalization violated: 1/alpha^2 + 1/beta^2 + 1/gamma^2 + 1/delta^2 = {sum} (must be 1)")]
    Normalization { sum: f64 },
    #[error("q range violated: 1/q^2 = {inv_q_sq} lies outside [1, 4]")]
    Range { inv_q_sq: f64 },
    #[error("positivity violated: 4q^2 = {four_q_sq} exceeds mu^2 = {mu_sq}, P5 would be indefinite")]
    Positivity { four_q_sq: f64, mu_sq: f64 },
    #[error("input state is not normalized (norm {norm})")]
    UnnormalizedState { norm: f64 },
    #[error("input state has dimension {0}, expected 4")]
    StateDimension(usize),
    #[error("outcome probability {value} outside [0, 1] beyond rounding")]
    ProbabilityOutOfRange { value: f64 },
    #[error(transparent)]
    Matrix(#[from] MatError),
}

/// How `q` is chosen when building parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QChoice {
    /// `q^2 = mu^2 / 4`, which maximizes the conclusive-outcome probability.
    Optimal,
    Explicit(f64),
}

/// Validated POVM parameters together with every derived quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PovmParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    q: f64,
    u: f64,
    v: f64,
    w: f64,
    p: f64,
    s: f64,
    y: f64,
    z: f64,
    t: f64,
}

impl PovmParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64, q: f64) -> Result<Self, PovmError> {
        validate_params(alpha, beta, gamma, delta, q)
    }

    pub fn with_q(amplitudes: [f64; 4], q: QChoice) -> Result<Self, PovmError> {
        let [a, b, g, d] = amplitudes;
        let q = match q {
            QChoice::Optimal => optimal_q(a, b, g, d)?,
            QChoice::Explicit(q) => q,
        };
        validate_params(a, b, g, d, q)
    }

    /// Builds from `(1/alpha^2, ..., 1/delta^2)`, taking positive roots.
    pub fn from_inverse_squares(inv_sq: [f64; 4], q: QChoice) -> Result<Self, PovmError> {
        if inv_sq.iter().any(|x| !x.is_finite()) {
            return Err(PovmError::NonFinite);
        }
        if inv_sq.iter().any(|&x| x <= 0.0) {
            return Err(PovmError::ZeroAmplitude);
        }
        PovmParams::with_q(inv_sq.map(|x| 1.0 / x.sqrt()), q)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn u(&self) -> f64 {
        self.u
    }
    pub fn v(&self) -> f64 {
        self.v
    }
    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }
    pub fn t(&self) -> f64 {
        self.t
    }

    /// `[alpha, beta, gamma, delta]`
    pub fn amplitudes(&self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    /// `[u, v, w, p]`, the square roots of the diagonal of `P_5`.
    pub fn residuals(&self) -> [f64; 4] {
        [self.u, self.v, self.w, self.p]
    }

    /// `mu^2 = min(alpha^2, beta^2, gamma^2, delta^2)`
    pub fn mu_squared(&self) -> f64 {
        mu_squared(self.amplitudes())
    }

    /// Random valid parameters: random positive reciprocal squares, random
    /// signs, `q` uniform on the admissible interval `[1/2, mu/2]`.
    pub fn random(rng: &mut impl Rng) -> PovmParams {
        loop {
            let weights: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.05..1.0));
            let total: f64 = weights.iter().sum();
            let amps: [f64; 4] = std::array::from_fn(|k| {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign / (weights[k] / total).sqrt()
            });
            let q_max = mu_squared(amps).sqrt() / 2.0;
            let q = rng.random_range(0.5..=q_max.max(0.5));
            if let Ok(p) = validate_params(amps[0], amps[1], amps[2], amps[3], q) {
                return p;
            }
        }
    }
}

fn mu_squared(amps: [f64; 4]) -> f64 {
    amps.iter().map(|a| a * a).fold(f64::INFINITY, f64::min)
}

fn check_normalization(amps: [f64; 4]) -> Result<(), PovmError> {
    if amps.iter().any(|a| !a.is_finite()) {
        return Err(PovmError::NonFinite);
    }
    if amps.contains(&0.0) {
        return Err(PovmError::ZeroAmplitude);
    }
    let sum: f64 = amps.iter().map(|a| 1.0 / (a * a)).sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(PovmError::Normalization { sum });
    }
    Ok(())
}

pub fn validate_params(
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    q: f64,
) -> Result<PovmParams, PovmError> {
    let amps = [alpha, beta, gamma, delta];
    check_normalization(amps)?;
    if !q.is_finite() {
        return Err(PovmError::NonFinite);
    }
    if q <= 0.0 {
        return Err(PovmError::Range {
            inv_q_sq: if q == 0.0 { f64::INFINITY } else { 1.0 / (q * q) },
        });
    }
    let inv_q_sq = 1.0 / (q * q);
    if !(1.0 - CONSTRAINT_TOL..=4.0 + CONSTRAINT_TOL).contains(&inv_q_sq) {
        return Err(PovmError::Range { inv_q_sq });
    }
    let mu_sq = mu_squared(amps);
    let four_q_sq = 4.0 * q * q;
    if four_q_sq > mu_sq + CONSTRAINT_TOL {
        return Err(PovmError::Positivity { four_q_sq, mu_sq });
    }

    let residual = |a: f64| (1.0 - four_q_sq / (a * a)).max(0.0).sqrt();
    let hyp = |a: f64, b: f64| (a * a + b * b).sqrt();
    Ok(PovmParams {
        alpha,
        beta,
        gamma,
        delta,
        q,
        u: residual(alpha),
        v: residual(beta),
        w: residual(gamma),
        p: residual(delta),
        s: hyp(alpha, beta),
        y: hyp(alpha, delta),
        z: hyp(beta, gamma),
        t: hyp(gamma, delta),
    })
}

/// `q = mu / 2` with `mu^2 = min(alpha^2, beta^2, gamma^2, delta^2)`.
pub fn optimal_q(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<f64, PovmError> {
    let amps = [alpha, beta, gamma, delta];
    check_normalization(amps)?;
    // min|a| / 2 rather than sqrt(mu^2) / 2: then 4q^2 == mu^2 exactly and the
    // smallest residual comes out as exactly zero
    let mu = amps.iter().map(|a| a.abs()).fold(f64::INFINITY, f64::min);
    Ok(mu / 2.0)
}

/// `|Psi_1> .. |Psi_4>` in the basis order `|00>, |01>, |10>, |11>`.
pub fn build_states(params: &PovmParams) -> [CVector; 4] {
    let amps = params.amplitudes();
    std::array::from_fn(|k| {
        CVector::from_real(&std::array::from_fn::<f64, 4, _>(|j| SIGNS[k][j] / amps[j]))
    })
}

/// The five POVM elements and the parameters that produced them.
#[derive(Clone, Debug)]
pub struct PovmSet {
    pub params: PovmParams,
    pub elements: [CMatrix; 5],
}

pub fn build_povm(params: &PovmParams) -> PovmSet {
    let q_sq = params.q * params.q;
    let states = build_states(params);
    let conclusive: [CMatrix; 4] =
        std::array::from_fn(|k| states[k].outer().scale(C64::new(q_sq, 0.0)));
    let mut p5 = CMatrix::identity(4);
    for pk in &conclusive {
        p5 = &p5 - pk;
    }
    let [p1, p2, p3, p4] = conclusive;
    PovmSet {
        params: *params,
        elements: [p1, p2, p3, p4, p5],
    }
}

impl PovmSet {
    /// `‖sum P_i - I‖_F`
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = CMatrix::zeros(4, 4);
        for p in &self.elements {
            sum = &sum + p;
        }
        sum.distance(&CMatrix::identity(4))
    }

    /// Ascending eigenvalues of each element.
    pub fn spectra(&self) -> Result<[Vec<f64>; 5], MatError> {
        let mut out: [Vec<f64>; 5] = Default::default();
        for (slot, p) in out.iter_mut().zip(&self.elements) {
            *slot = eig_hermitian(p)?.values;
        }
        Ok(out)
    }

    /// `‖P_5 - diag(u^2, v^2, w^2, p^2)‖_F`
    pub fn p5_diagonal_defect(&self) -> f64 {
        let diag = CMatrix::diag(&self.params.residuals().map(|r| C64::new(r * r, 0.0)));
        self.elements[4].distance(&diag)
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsJson {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    q: f64,
}

impl Serialize for PovmParams {
    /// The five free values; everything else is derived.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ParamsJson {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            delta: self.delta,
            q: self.q,
        }
        .serialize(serializer)
    }
}

#[derive(Serialize, Deserialize)]
struct PovmSetJson {
    params: ParamsJson,
    elements: Vec<Vec<Vec<[f64; 2]>>>,
}

impl Serialize for PovmSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let p = &self.params;
        PovmSetJson {
            params: ParamsJson {
                alpha: p.alpha,
                beta: p.beta,
                gamma: p.gamma,
                delta: p.delta,
                q: p.q,
            },
            elements: self.elements.iter().map(matrix_to_pairs).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PovmSet {
    /// Rebuilds from the parameters; the stored elements must agree with them.
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = PovmSetJson::deserialize(deserializer)?;
        let p = raw.params;
        let params =
            validate_params(p.alpha, p.beta, p.gamma, p.delta, p.q).map_err(D::Error::custom)?;
        let set = build_povm(&params);
        if raw.elements.len() != 5 {
            return Err(D::Error::custom("expected five POVM elements"));
        }
        for (stored, built) in raw.elements.iter().zip(&set.elements) {
            let stored = crate::matkernel::matrix_from_pairs(stored)
                .filter(|m| m.shape() == (4, 4))
                .ok_or_else(|| D::Error::custom("POVM elements must be 4x4"))?;
            if stored.max_abs_diff(built) > 1e-12 {
                return Err(D::Error::custom("stored elements disagree with params"));
            }
        }
        Ok(set)
    }
}

/// Born-rule probabilities of the five outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub probs: [f64; 5],
}

pub fn outcome_probabilities(
    povm: &PovmSet,
    state: &CVector,
) -> Result<OutcomeDistribution, PovmError> {
    if state.dim() != 4 {
        return Err(PovmError::StateDimension(state.dim()));
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(PovmError::UnnormalizedState { norm });
    }
    let mut probs = [0.0; 5];
    for (slot, p) in probs.iter_mut().zip(&povm.elements) {
        let value = state.inner(&p.mul_vec(state)?).re;
        if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&value) {
            return Err(PovmError::ProbabilityOutOfRange { value });
        }
        *slot = value.clamp(0.0, 1.0);
    }
    Ok(OutcomeDistribution { probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_state, seeded};
    use proptest::prelude::*;

    fn set_a() -> PovmParams {
        PovmParams::new(2.0, 2.0, 2.0, 2.0, 1.0).unwrap()
    }

    fn set_b() -> PovmParams {
        PovmParams::from_inverse_squares([0.5, 0.25, 0.125, 0.125], QChoice::Optimal).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn set_a_has_zero_residuals() {
        let p = set_a();
        assert_eq!(p.residuals(), [0.0; 4]);
        assert!(close(p.s(), 8f64.sqrt(), 1e-15));
    }

    #[test]
    fn unnormalized_amplitudes_rejected() {
        let err = PovmParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, PovmError::Normalization { sum } if close(sum, 4.0, 1e-15)));
    }

    #[test]
    fn set_b_with_unit_q_is_indefinite() {
        let amps = set_b().amplitudes();
        let err = PovmParams::with_q(amps, QChoice::Explicit(1.0)).unwrap_err();
        match err {
            PovmError::Positivity { four_q_sq, mu_sq } => {
                assert!(close(four_q_sq / mu_sq, 2.0, 1e-12));
            }
            other => panic!("expected positivity error, got {other:?}"),
        }
    }

    #[test]
    fn q_range_checked_independently() {
        let a = set_a().amplitudes();
        // 1/q^2 = 16 > 4
        assert!(matches!(
            PovmParams::with_q(a, QChoice::Explicit(0.25)),
            Err(PovmError::Range { .. })
        ));
        assert!(matches!(
            PovmParams::with_q(a, QChoice::Explicit(-0.5)),
            Err(PovmError::Range { .. })
        ));
        assert!(matches!(
            PovmParams::new(f64::NAN, 2.0, 2.0, 2.0, 1.0),
            Err(PovmError::NonFinite)
        ));
        assert!(matches!(
            PovmParams::new(0.0, 2.0, 2.0, 2.0, 1.0),
            Err(PovmError::ZeroAmplitude)
        ));
    }

    #[test]
    fn optimal_q_values() {
        assert!(close(optimal_q(2.0, 2.0, 2.0, 2.0).unwrap(), 1.0, 1e-15));
        assert!(close(set_b().q(), 0.5f64.sqrt(), 1e-15));
        assert!(matches!(optimal_q(1.0, 1.0, 1.0, 1.0), Err(PovmError::Normalization { .. })));
    }

    #[test]
    fn negative_amplitudes_only_flip_signs() {
        let p = PovmParams::new(-2.0, 2.0, 2.0, -2.0, 1.0).unwrap();
        assert_eq!(p.residuals(), [0.0; 4]);
        let states = build_states(&p);
        assert!(close(states[0][0].re, -0.5, 1e-15));
        assert!(close(states[0][3].re, -0.5, 1e-15));
    }

    #[test]
    fn states_values() {
        let a = build_states(&set_a());
        assert_eq!(a[0], CVector::from_real(&[0.5; 4]));
        let b = build_states(&set_b());
        for s in &b {
            assert!(close(s.norm(), 1.0, 1e-15));
        }
        assert!(close(b[0].inner(&b[1]).re, 0.5, 1e-15));
    }

    #[test]
    fn set_a_is_projective() {
        let povm = build_povm(&set_a());
        assert!(povm.elements[4].max_abs() < 1e-15);
        assert!(povm.completeness_defect() < 1e-12);
    }

    #[test]
    fn set_b_p5_is_diagonal() {
        let povm = build_povm(&set_b());
        let expected = CMatrix::diag(&[0.0, 0.5, 0.75, 0.75].map(|x| C64::new(x, 0.0)));
        assert!(povm.elements[4].distance(&expected) < 1e-12);
        assert!(povm.p5_diagonal_defect() < 1e-12);
        let spectrum = &povm.spectra().unwrap()[4];
        for (got, want) in spectrum.iter().zip([0.0, 0.5, 0.75, 0.75]) {
            assert!(close(*got, want, 1e-12), "{spectrum:?}");
        }
    }

    #[test]
    fn probabilities_for_reference_inputs() {
        let povm_a = build_povm(&set_a());
        let psi1 = build_states(&set_a())[0].clone();
        let dist = outcome_probabilities(&povm_a, &psi1).unwrap();
        for (got, want) in dist.probs.iter().zip([1.0, 0.0, 0.0, 0.0, 0.0]) {
            assert!(close(*got, want, 1e-12));
        }

        let povm_b = build_povm(&set_b());
        let d00 = outcome_probabilities(&povm_b, &CVector::basis(4, 0)).unwrap();
        for (got, want) in d00.probs.iter().zip([0.25, 0.25, 0.25, 0.25, 0.0]) {
            assert!(close(*got, want, 1e-12));
        }
        let d01 = outcome_probabilities(&povm_b, &CVector::basis(4, 1)).unwrap();
        for (got, want) in d01.probs.iter().zip([0.125, 0.125, 0.125, 0.125, 0.5]) {
            assert!(close(*got, want, 1e-12));
        }
    }

    #[test]
    fn probabilities_reject_bad_states() {
        let povm = build_povm(&set_a());
        assert!(matches!(
            outcome_probabilities(&povm, &CVector::from_real(&[1.0, 1.0, 0.0, 0.0])),
            Err(PovmError::UnnormalizedState { .. })
        ));
        assert!(matches!(
            outcome_probabilities(&povm, &CVector::basis(2, 0)),
            Err(PovmError::StateDimension(2))
        ));
    }

    #[test]
    fn json_shape() {
        let povm = build_povm(&set_a());
        let value = serde_json::to_value(&povm).unwrap();
        assert_eq!(value["params"]["alpha"], 2.0);
        assert_eq!(value["elements"].as_array().unwrap().len(), 5);
        assert_eq!(value["elements"][0][0][0], serde_json::json!([0.25, 0.0]));
        let back: PovmSet = serde_json::from_value(value).unwrap();
        assert_eq!(back.params, povm.params);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn povm_invariants(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let params = PovmParams::random(&mut rng);
            let inv = 1.0 / (params.q() * params.q());
            prop_assert!((1.0..=4.0).contains(&inv));
            let povm = build_povm(&params);
            prop_assert!(povm.completeness_defect() < 1e-12);
            prop_assert!(povm.p5_diagonal_defect() < 1e-12);

            let states = build_states(&params);
            let mut projector_sum = CMatrix::zeros(4, 4);
            for s in &states {
                projector_sum = &projector_sum + &s.outer();
            }
            let expected = CMatrix::diag(&params.amplitudes().map(|a| C64::new(4.0 / (a * a), 0.0)));
            prop_assert!(projector_sum.distance(&expected) < 1e-12);

            for (k, p) in povm.elements.iter().enumerate() {
                prop_assert!(p.hermiticity_defect() < 1e-12);
                let spectrum = eig_hermitian(p).unwrap().values;
                prop_assert!(spectrum[0] >= -1e-10);
                if k < 4 {
                    prop_assert!(spectrum[2].abs() < 1e-10, "rank-1 element {k}: {spectrum:?}");
                }
            }

            let psi = random_state(4, &mut rng);
            let dist = outcome_probabilities(&povm, &psi).unwrap();
            prop_assert!((dist.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn optimal_q_zeroes_smallest_p5_eigenvalue(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let params = PovmParams::random(&mut rng);
            let opt = PovmParams::with_q(params.amplitudes(), QChoice::Optimal).unwrap();
            let inv = 1.0 / (opt.q() * opt.q());
            prop_assert!((1.0 - 1e-12..=4.0 + 1e-12).contains(&inv));
            let spectrum = eig_hermitian(&build_povm(&opt).elements[4]).unwrap().values;
            prop_assert!(spectrum[0].abs() < 1e-12);
        }
    }
}

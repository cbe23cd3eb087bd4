//! Classification of initial data by the sign structure of the twisted
//! momentum `m̃0 = 2(2 - ∂x)(u0 - u0_xx)`, and the explicit wave-breaking
//! threshold with its bound on the maximal existence time.
//!
//! Decision table (`m̃0` pattern, sign change of `m0` → verdict):
//!
//! | pattern of `m̃0`              | `m0` changes sign | verdict          |
//! |------------------------------|-------------------|------------------|
//! | `NonNegative`/`NonPositive`  | any               | `GlobalThm31`    |
//! | `NegThenPos`                 | any               | `GlobalThm32`    |
//! | `PosThenNeg`                 | yes               | `BlowUpThm33`    |
//! | `PosThenNeg`                 | no                | `Inconclusive`   |
//! | `Mixed`                      | any               | `Inconclusive`   |

use serde::{Deserialize, Serialize};

use crate::dp_bridge::to_dp;
use crate::dynamics::{momentum, twisted_momentum};
use crate::error::{invalid, GchError, Result};
use crate::grid::{BackendKind, Field};
use crate::ops::{derivative, norm, NormKind};

pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignKind {
    NonNegative,
    NonPositive,
    NegThenPos,
    PosThenNeg,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignPattern {
    pub kind: SignKind,
    /// Sign-change location, present only for the one-crossing kinds.
    pub crossing: Option<f64>,
    pub zero_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    GlobalThm31,
    GlobalThm32,
    BlowUpThm33,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub epsilon: f64,
    /// Grid minimum of `ũ0'`.
    pub min_slope: f64,
    pub rhs_threshold: f64,
    pub satisfied: bool,
    /// Upper bound on the maximal existence time, present iff `satisfied`.
    pub t_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub pattern_m_twisted: SignPattern,
    pub pattern_m0: SignPattern,
    pub m0_changes_sign: bool,
    pub verdict: Verdict,
    pub threshold34: Option<ThresholdRecord>,
}

/// Sign structure of `f`, treating `|f_i| <= zero_tol·‖f‖_∞` as zero.
pub fn sign_pattern(f: &Field, zero_tol: f64) -> Result<SignPattern> {
    f.check_finite("sign_pattern input")?;
    if zero_tol.is_nan() || zero_tol < 0.0 {
        return Err(invalid("zero_tol", "must be nonnegative"));
    }
    let scale = f.max_abs();
    if scale == 0.0 {
        return Err(GchError::Degenerate("field is identically zero"));
    }
    let band = zero_tol * scale;
    let signs: Vec<i8> = f
        .values()
        .iter()
        .map(|&v| {
            if v > band {
                1
            } else if v < -band {
                -1
            } else {
                0
            }
        })
        .collect();

    // Runs of strict signs, ignoring the dead zone.
    let mut runs: Vec<(i8, usize, usize)> = Vec::new();
    for (i, &s) in signs.iter().enumerate() {
        if s == 0 {
            continue;
        }
        match runs.last_mut() {
            Some((sign, _, last)) if *sign == s => *last = i,
            _ => runs.push((s, i, i)),
        }
    }

    let grid = f.grid();
    let (kind, crossing) = match runs.as_slice() {
        [(1, _, _)] => (SignKind::NonNegative, None),
        [(-1, _, _)] => (SignKind::NonPositive, None),
        [(first, _, end_first), (_, start_second, _)] => {
            // Midpoint between the last node of the first sign and the first
            // node of the second; both bracket the dead zone, if any.
            let left = grid.node(end_first + 1);
            let right = grid.node(start_second - 1);
            let x0 = 0.5 * (left + right);
            let kind = if *first < 0 {
                SignKind::NegThenPos
            } else {
                SignKind::PosThenNeg
            };
            (kind, Some(x0))
        }
        _ => (SignKind::Mixed, None),
    };
    Ok(SignPattern {
        kind,
        crossing,
        zero_tol,
    })
}

/// Verdict as a pure function of the twisted-momentum pattern and whether `m0`
/// changes sign.
pub fn verdict_for(pattern: SignKind, m0_changes_sign: bool) -> Verdict {
    match pattern {
        SignKind::NonNegative | SignKind::NonPositive => Verdict::GlobalThm31,
        SignKind::NegThenPos => Verdict::GlobalThm32,
        SignKind::PosThenNeg if m0_changes_sign => Verdict::BlowUpThm33,
        SignKind::PosThenNeg | SignKind::Mixed => Verdict::Inconclusive,
    }
}

/// Classifies `u0`. With `epsilon` set, the breaking threshold is also
/// evaluated on `ũ0 = to_dp(u0)`.
pub fn classify_initial(
    u0: &Field,
    backend: BackendKind,
    epsilon: Option<f64>,
) -> Result<ClassificationReport> {
    if u0.max_abs() == 0.0 {
        return Err(GchError::Degenerate("initial data is identically zero"));
    }
    let m0 = momentum(u0, backend)?;
    let twisted = twisted_momentum(u0, backend)?;
    let pattern_m_twisted = sign_pattern(&twisted, DEFAULT_ZERO_TOL)?;
    let pattern_m0 = sign_pattern(&m0, DEFAULT_ZERO_TOL)?;
    let m0_changes_sign = !matches!(
        pattern_m0.kind,
        SignKind::NonNegative | SignKind::NonPositive
    );
    let threshold34 = match epsilon {
        Some(eps) => {
            let v0 = to_dp(u0, backend)?;
            let mut record = breaking_threshold(&v0, eps, backend)?;
            if record.satisfied {
                record.t_star = Some(blowup_time_bound(&v0, eps, backend)?);
            }
            Some(record)
        }
        None => None,
    };
    Ok(ClassificationReport {
        pattern_m_twisted,
        pattern_m0,
        m0_changes_sign,
        verdict: verdict_for(pattern_m_twisted.kind, m0_changes_sign),
        threshold34,
    })
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(
            "epsilon",
            format!("must be positive, got {epsilon}"),
        ));
    }
    Ok(())
}

/// `(2√6 ‖ũ0‖²_{L²} ln(1 + 2/ε) + ‖ũ0‖²_∞)^{1/2}`.
fn breaking_radical(l2_sq: f64, linf: f64, epsilon: f64) -> f64 {
    (2.0 * 6f64.sqrt() * l2_sq * (2.0 / epsilon).ln_1p() + linf * linf).sqrt()
}

/// Slope level the steepest descent of `ũ0` must undercut:
/// `((1+ε)√6/4)·(‖ũ0‖_∞ + radical)`.
pub fn threshold_from_norms(l2_sq: f64, linf: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok((1.0 + epsilon) * 6f64.sqrt() / 4.0 * (linf + breaking_radical(l2_sq, linf, epsilon)))
}

/// `(radical - ‖ũ0‖_∞) / (6‖ũ0‖²_{L²})`.
pub fn time_bound_from_norms(l2_sq: f64, linf: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if l2_sq.is_nan() || l2_sq <= 0.0 {
        return Err(GchError::Degenerate("zero L2 norm"));
    }
    Ok((breaking_radical(l2_sq, linf, epsilon) - linf) / (6.0 * l2_sq))
}

/// Evaluates the breaking condition `min ũ0' < -threshold` on `v0 = ũ0`.
/// `t_star` is left empty; see [`blowup_time_bound`].
pub fn breaking_threshold(
    v0: &Field,
    epsilon: f64,
    backend: BackendKind,
) -> Result<ThresholdRecord> {
    check_epsilon(epsilon)?;
    if v0.max_abs() == 0.0 {
        return Err(GchError::Degenerate("ũ0 is identically zero"));
    }
    let min_slope = derivative(v0, backend)?.min();
    let l2 = norm(v0, NormKind::L2, backend)?;
    let rhs_threshold = threshold_from_norms(l2 * l2, v0.max_abs(), epsilon)?;
    Ok(ThresholdRecord {
        epsilon,
        min_slope,
        rhs_threshold,
        satisfied: min_slope < -rhs_threshold,
        t_star: None,
    })
}

/// Upper bound on the maximal existence time for data meeting
/// [`breaking_threshold`]. The caller checks the hypothesis.
pub fn blowup_time_bound(v0: &Field, epsilon: f64, backend: BackendKind) -> Result<f64> {
    let l2 = norm(v0, NormKind::L2, backend)?;
    time_bound_from_norms(l2 * l2, v0.max_abs(), epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::ops::helmholtz_inverse;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const SP: BackendKind = BackendKind::Spectral;

    fn from_momentum(g: &Grid, m: impl Fn(f64) -> f64) -> Field {
        helmholtz_inverse(&g.sample(m).unwrap(), SP).unwrap()
    }

    #[test]
    fn sign_pattern_examples() {
        let g = Grid::new(30.0, 1024).unwrap();
        let p = sign_pattern(&g.sample(|x| 1.0 / x.cosh()).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(p.kind, SignKind::NonNegative);
        assert_eq!(p.crossing, None);

        let p = sign_pattern(&g.sample(f64::tanh).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(p.kind, SignKind::NegThenPos);
        assert!(p.crossing.unwrap().abs() <= g.spacing());

        let g = Grid::new(PI, 64).unwrap();
        let p = sign_pattern(&g.sample(|x| (2.0 * x).sin()).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(p.kind, SignKind::Mixed);

        assert!(matches!(
            sign_pattern(&g.zeros(), DEFAULT_ZERO_TOL),
            Err(GchError::Degenerate(_))
        ));
    }

    #[test]
    fn curated_classifications() {
        let g = Grid::new(30.0, 1024).unwrap();
        let h = g.spacing();

        let r = classify_initial(&from_momentum(&g, |x| 1.0 / x.cosh()), SP, None).unwrap();
        assert_eq!(r.pattern_m_twisted.kind, SignKind::NonNegative);
        assert_eq!(r.verdict, Verdict::GlobalThm31);

        // m̃0 = 2 sech (2s² + 2s - 1), s = tanh x: root s = (√3 - 1)/2.
        let x0 = ((3f64.sqrt() - 1.0) / 2.0).atanh();
        let r = classify_initial(&from_momentum(&g, |x| x.tanh() / x.cosh()), SP, None).unwrap();
        assert_eq!(r.pattern_m_twisted.kind, SignKind::NegThenPos);
        assert_eq!(r.verdict, Verdict::GlobalThm32);
        assert!((r.pattern_m_twisted.crossing.unwrap() - x0).abs() <= 2.0 * h);

        let r = classify_initial(&from_momentum(&g, |x| -x.tanh() / x.cosh()), SP, None).unwrap();
        assert_eq!(r.pattern_m_twisted.kind, SignKind::PosThenNeg);
        assert!(r.m0_changes_sign);
        assert_eq!(r.verdict, Verdict::BlowUpThm33);
    }

    #[test]
    fn pos_then_neg_with_single_signed_momentum_is_inconclusive() {
        assert_eq!(
            verdict_for(SignKind::PosThenNeg, false),
            Verdict::Inconclusive
        );
    }

    #[test]
    fn classify_rejects_zero_data() {
        let g = Grid::new(5.0, 64).unwrap();
        assert!(classify_initial(&g.zeros(), SP, None).is_err());
    }

    #[test]
    fn threshold_formula_unit_norms() {
        // 30-digit evaluation: 4.318790539633..., 0.254379618225...
        let rhs = threshold_from_norms(1.0, 1.0, 1.0).unwrap();
        assert!((rhs - 4.318_790_539_633_13).abs() <= 1e-12, "{rhs}");
        let t = time_bound_from_norms(1.0, 1.0, 1.0).unwrap();
        assert!((t - 0.254_379_618_225_577).abs() <= 1e-12, "{t}");
    }

    #[test]
    fn threshold_grows_with_epsilon_beyond_one_half() {
        // The (1 + ε) prefactor outweighs the shrinking logarithm here.
        let values: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&e| threshold_from_norms(1.0, 1.0, e).unwrap())
            .collect();
        let expected = [
            3.656_511_182_009_875,
            4.318_790_539_633_13,
            5.688_809_680_043_652,
            8.353_097_779_748_221,
        ];
        for (v, e) in values.iter().zip(expected) {
            assert!((v - e).abs() <= 1e-12, "{values:?}");
        }
    }

    #[test]
    fn threshold_rejects_bad_input() {
        let g = Grid::new(5.0, 64).unwrap();
        let v = g.sample(|x| (-x * x).exp()).unwrap();
        assert!(breaking_threshold(&v, 0.0, SP).is_err());
        assert!(breaking_threshold(&v, -1.0, SP).is_err());
        assert!(breaking_threshold(&g.zeros(), 1.0, SP).is_err());
        assert!(time_bound_from_norms(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn nondescending_profile_never_satisfies() {
        // On a periodic grid a profile with ũ0' >= 0 everywhere is constant.
        let g = Grid::new(10.0, 256).unwrap();
        let v = g.constant(2.0).unwrap();
        for eps in [0.1, 1.0, 10.0] {
            let r = breaking_threshold(&v, eps, SP).unwrap();
            assert!(r.rhs_threshold > 0.0);
            assert!(r.min_slope.abs() <= 1e-12);
            assert!(!r.satisfied);
        }
    }

    #[test]
    fn narrow_slope_profile() {
        // v0 = -(x/δ)e^{-x²/δ²}: ‖v0‖_∞ = e^{-1/2}/√2, ‖v0‖²_{L²} = δ√(π/2)/4.
        let delta = 0.1;
        // The sup norm is a grid maximum, so the peak at δ/√2 must be well sampled.
        let g = Grid::new(5.0, 16384).unwrap();
        let v0 = g
            .sample(|x| -(x / delta) * (-(x * x) / (delta * delta)).exp())
            .unwrap();
        let r = breaking_threshold(&v0, 1.0, SP).unwrap();
        assert!((r.min_slope + 10.0).abs() <= 1e-6);
        assert!(
            (r.rhs_threshold - 1.252_500).abs() <= 1e-4,
            "{}",
            r.rhs_threshold
        );
        assert!(r.satisfied);
        let t = blowup_time_bound(&v0, 1.0, SP).unwrap();
        assert!((t - 0.877_15).abs() <= 1e-4, "{t}");

        // A coarse grid underestimates the sup norm but keeps the verdict.
        let coarse = Grid::new(30.0, 2048).unwrap();
        let v0 = coarse
            .sample(|x| -(x / delta) * (-(x * x) / (delta * delta)).exp())
            .unwrap();
        assert!(breaking_threshold(&v0, 1.0, SP).unwrap().satisfied);
    }

    #[test]
    fn time_bound_scaling() {
        let g = Grid::new(30.0, 1024).unwrap();
        let v = g.sample(|x| -x * (-(x * x)).exp()).unwrap();
        let l2 = norm(&v, NormKind::L2, SP).unwrap();
        let linf = v.max_abs();
        let direct = blowup_time_bound(&v.scale(2.0), 0.5, SP).unwrap();
        let formula = time_bound_from_norms(4.0 * l2 * l2, 2.0 * linf, 0.5).unwrap();
        assert!((direct - formula).abs() <= 1e-12);
    }

    fn kind_strategy() -> impl Strategy<Value = SignKind> {
        prop_oneof![
            Just(SignKind::NonNegative),
            Just(SignKind::NonPositive),
            Just(SignKind::NegThenPos),
            Just(SignKind::PosThenNeg),
            Just(SignKind::Mixed),
        ]
    }

    proptest! {
        #[test]
        fn decision_table_is_pure(kind in kind_strategy(), changes in any::<bool>()) {
            let v = verdict_for(kind, changes);
            prop_assert_eq!(v, verdict_for(kind, changes));
            let expected = match (kind, changes) {
                (SignKind::NonNegative | SignKind::NonPositive, _) => Verdict::GlobalThm31,
                (SignKind::NegThenPos, _) => Verdict::GlobalThm32,
                (SignKind::PosThenNeg, true) => Verdict::BlowUpThm33,
                _ => Verdict::Inconclusive,
            };
            prop_assert_eq!(v, expected);
        }

        #[test]
        fn time_bound_decreases_with_epsilon(
            l2_sq in 1e-3f64..10.0,
            linf in 1e-3f64..10.0,
            e1 in 0.01f64..10.0,
            factor in 1.01f64..10.0,
        ) {
            let a = time_bound_from_norms(l2_sq, linf, e1).unwrap();
            let b = time_bound_from_norms(l2_sq, linf, e1 * factor).unwrap();
            prop_assert!(a > 0.0);
            prop_assert!(b < a);
            prop_assert!(threshold_from_norms(l2_sq, linf, e1).unwrap() > 0.0);
        }
    }
}

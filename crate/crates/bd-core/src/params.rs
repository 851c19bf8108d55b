//! Construction parameters for the space `X_{a,b}`.
//!
//! The triple `(a, b, lambda)` must satisfy three feasibility conditions:
//!
//! 1. `0 < b < a < 1`
//! 2. `a + 2*b*lambda <= lambda`
//! 3. `a + b > 1`
//!
//! Condition (2) forces `b < 1/2` and `lambda >= a / (1 - 2b)`; [`min_lambda`]
//! computes that threshold. The growth exponent `alpha` attached to the pair
//! is the unique solution of `a^(1/(1-alpha)) + b^(1/(1-alpha)) = 1`, solved
//! by [`solve_alpha`] via bisection in `p = 1/(1-alpha)`.
//!
//! Note on the cube condition `a^3 + b^3 = 1` used by the compactness demos:
//! no rational pair satisfies it exactly (a classical Diophantine fact for
//! exponent 3), so exact-rational parameters carry a cube residual
//! `|a^3 + b^3 - 1|` and demos accept it up to a declared tolerance.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

// resolves float intrinsics (powf/log2) in builds without the standard
// library; the inherent methods shadow it otherwise
#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

use crate::scalar::Scalar;

/// Range convention for the second entry `i` of an extension tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// `1 <= i <= d_m`. Default; the construction is nondegenerate.
    Inclusive,
    /// `1 <= i < d_m` as literally written in the original construction.
    /// Since `d_1 = 1`, every tuple set is empty and all dimensions stay 1;
    /// kept behind this flag and covered by a degeneracy test.
    PaperStrict,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::Inclusive => "inclusive",
            Convention::PaperStrict => "paper-strict",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Validated construction parameters.
///
/// The arithmetic mode is the type parameter: `Params<f64>` is float64 mode,
/// `Params<BigRational>` is exact-rational mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Params<S: Scalar> {
    a: S,
    b: S,
    lambda: S,
    convention: Convention,
}

impl<S: Scalar> Params<S> {
    /// Builds params, enforcing conditions (1)-(3).
    pub fn new(a: S, b: S, lambda: S, convention: Convention) -> Result<Self, ParamsError> {
        let report = validate(&a, &b, &lambda)?;
        if !report.verdict {
            return Err(ParamsError::Infeasible(report.failure_summary()));
        }
        Ok(Params {
            a,
            b,
            lambda,
            convention,
        })
    }

    pub fn a(&self) -> &S {
        &self.a
    }

    pub fn b(&self) -> &S {
        &self.b
    }

    pub fn lambda(&self) -> &S {
        &self.lambda
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn mode_name(&self) -> &'static str {
        S::MODE_NAME
    }

    /// `|a^3 + b^3 - 1|`, the defect of the cube condition the compactness
    /// demos assume. Exact in rational mode.
    pub fn cube_residual(&self) -> S {
        let cube = |s: &S| s.clone() * s.clone() * s.clone();
        (cube(&self.a) + cube(&self.b) - S::one()).abs()
    }
}

/// One feasibility condition, checked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionCheck {
    /// Condition number 1, 2, or 3.
    pub id: u8,
    /// Human-readable statement of the condition.
    pub statement: &'static str,
    pub holds: bool,
}

/// Outcome of [`validate`]: per-condition verdicts plus derived quantities.
/// A failing condition is data, not an error.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<S: Scalar> {
    pub conditions: [ConditionCheck; 3],
    /// `1 - 2b`; condition (2) is satisfiable for some lambda iff this is positive.
    pub one_minus_two_b: S,
    /// `a + 2*b*lambda`, the left side of condition (2) at the given lambda.
    pub a_plus_two_b_lambda: S,
    /// `a / (1 - 2b)` when `b < 1/2`, the smallest feasible lambda.
    pub min_lambda: Option<S>,
    /// True iff all three conditions hold.
    pub verdict: bool,
}

impl<S: Scalar> ValidationReport<S> {
    fn failure_summary(&self) -> String {
        let failed: Vec<String> = self
            .conditions
            .iter()
            .filter(|c| !c.holds)
            .map(|c| format!("({}) {}", c.id, c.statement))
            .collect();
        failed.join("; ")
    }
}

/// Root of the alpha equation `a^p + b^p = 1` with `p = 1/(1-alpha)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaResult {
    /// `1 - 1/p`, in `[0, 1)`.
    pub alpha: f64,
    /// The located root `p >= 1`.
    pub p: f64,
    /// `|a^p + b^p - 1|` at the returned `p`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamsError {
    /// An input was non-finite or not strictly positive.
    InvalidInput(String),
    /// Constructor rejected parameters that fail a condition.
    Infeasible(String),
    /// `solve_alpha` preconditions (`0 < b < a < 1`, `a + b > 1`) violated.
    Domain(String),
    /// Bisection hit its iteration cap before meeting the tolerance.
    ToleranceNotReached { best_residual_exp2: i32 },
}

impl fmt::Display for ParamsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamsError::InvalidInput(s) => write!(f, "invalid input: {s}"),
            ParamsError::Infeasible(s) => write!(f, "infeasible parameters: {s}"),
            ParamsError::Domain(s) => write!(f, "domain error: {s}"),
            ParamsError::ToleranceNotReached { best_residual_exp2 } => write!(
                f,
                "bisection could not meet the tolerance (best residual ~ 2^{best_residual_exp2})"
            ),
        }
    }
}

impl core::error::Error for ParamsError {}

fn require_positive_finite<S: Scalar>(name: &str, v: &S) -> Result<(), ParamsError> {
    if !v.is_finite_scalar() {
        return Err(ParamsError::InvalidInput(format!("{name} is not finite")));
    }
    if *v <= S::zero() {
        return Err(ParamsError::InvalidInput(format!(
            "{name} must be strictly positive, got {v}"
        )));
    }
    Ok(())
}

/// Checks conditions (1)-(3) on `(a, b, lambda)`.
///
/// Failing conditions are reported, never raised; only garbage inputs
/// (non-finite or non-positive) produce an error.
pub fn validate<S: Scalar>(a: &S, b: &S, lambda: &S) -> Result<ValidationReport<S>, ParamsError> {
    require_positive_finite("a", a)?;
    require_positive_finite("b", b)?;
    require_positive_finite("lambda", lambda)?;

    let one = S::one();
    let two = S::from_int(2);

    let cond1 = *b < *a && *a < one;
    let a_plus_two_b_lambda = a.clone() + two.clone() * b.clone() * lambda.clone();
    let cond2 = a_plus_two_b_lambda <= *lambda;
    let cond3 = a.clone() + b.clone() > one;

    let one_minus_two_b = one - two * b.clone();
    let min_lambda = if one_minus_two_b > S::zero() {
        Some(a.clone() / one_minus_two_b.clone())
    } else {
        None
    };

    let conditions = [
        ConditionCheck {
            id: 1,
            statement: "0 < b < a < 1",
            holds: cond1,
        },
        ConditionCheck {
            id: 2,
            statement: "a + 2*b*lambda <= lambda",
            holds: cond2,
        },
        ConditionCheck {
            id: 3,
            statement: "a + b > 1",
            holds: cond3,
        },
    ];
    let verdict = cond1 && cond2 && cond3;

    Ok(ValidationReport {
        conditions,
        one_minus_two_b,
        a_plus_two_b_lambda,
        min_lambda,
        verdict,
    })
}

/// Smallest lambda satisfying condition (2): `a / (1 - 2b)` when `b < 1/2`.
///
/// Returns `Ok(None)` when `b >= 1/2` (condition (2) is then unsatisfiable
/// for every lambda). Exact in rational mode.
pub fn min_lambda<S: Scalar>(a: &S, b: &S) -> Result<Option<S>, ParamsError> {
    require_positive_finite("a", a)?;
    require_positive_finite("b", b)?;
    let one = S::one();
    if *a >= one || *b >= one {
        return Err(ParamsError::InvalidInput(String::from(
            "min_lambda requires 0 < a < 1 and 0 < b < 1",
        )));
    }
    let denom = one - S::from_int(2) * b.clone();
    if denom <= S::zero() {
        return Ok(None);
    }
    Ok(Some(a.clone() / denom))
}

/// Maximum bisection iterations for [`solve_alpha`]. The bracket is at most
/// `[1, 2^64]` wide, so 300 halvings exhaust f64 resolution with a wide margin.
const ALPHA_MAX_ITER: usize = 300;

/// Solves `a^p + b^p = 1` for `p >= 1` by bisection and returns
/// `alpha = 1 - 1/p`.
///
/// Requires `0 < b < a < 1` and `a + b > 1`, which make `g(p) = a^p + b^p`
/// strictly decreasing with `g(1) > 1` and `g(p) -> 0`, so a unique root
/// `p* > 1` exists. The bracket `[1, P]` is grown by doubling `P` until
/// `g(P) < 1`; bisection then runs until `|g(p) - 1| <= tol`. Deterministic.
pub fn solve_alpha(a: f64, b: f64, tol: f64) -> Result<AlphaResult, ParamsError> {
    if !(a.is_finite() && b.is_finite() && tol.is_finite()) || tol <= 0.0 {
        return Err(ParamsError::InvalidInput(String::from(
            "solve_alpha needs finite a, b and a positive tolerance",
        )));
    }
    if !(0.0 < b && b < a && a < 1.0) {
        return Err(ParamsError::Domain(format!(
            "need 0 < b < a < 1, got a={a}, b={b}"
        )));
    }
    if a + b <= 1.0 {
        return Err(ParamsError::Domain(format!(
            "need a + b > 1 (the root would satisfy p <= 1), got a+b={}",
            a + b
        )));
    }

    let g = |p: f64| a.powf(p) + b.powf(p);

    let mut hi = 2.0;
    while g(hi) >= 1.0 {
        hi *= 2.0;
        if hi > 2f64.powi(64) {
            return Err(ParamsError::ToleranceNotReached {
                best_residual_exp2: (g(hi) - 1.0).abs().log2() as i32,
            });
        }
    }
    let mut lo = 1.0;

    let mut p = 0.5 * (lo + hi);
    for _ in 0..ALPHA_MAX_ITER {
        p = 0.5 * (lo + hi);
        let gp = g(p);
        if (gp - 1.0).abs() <= tol {
            return Ok(AlphaResult {
                alpha: 1.0 - 1.0 / p,
                p,
                residual: (gp - 1.0).abs(),
            });
        }
        if gp > 1.0 {
            lo = p;
        } else {
            hi = p;
        }
    }
    Err(ParamsError::ToleranceNotReached {
        best_residual_exp2: (g(p) - 1.0).abs().log2() as i32,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn rat(n: i64, d: u64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn validate_passing_triple() {
        // 0.9 + 1.8 = 2.7 <= 3
        let r = validate(&0.9, &0.3, &3.0).unwrap();
        assert!(r.conditions.iter().all(|c| c.holds));
        assert!(r.verdict);
        assert!((r.a_plus_two_b_lambda - 2.7).abs() < 1e-15);
    }

    #[test]
    fn validate_condition_two_unsatisfiable() {
        // b >= 1/2 makes a + 2b*lambda <= lambda impossible for every lambda
        let r = validate(&0.8, &0.6, &7.0).unwrap();
        assert!(r.conditions[0].holds);
        assert!(!r.conditions[1].holds);
        assert!(r.conditions[2].holds);
        assert!(!r.verdict);
        assert!(r.one_minus_two_b < 0.0);
        assert!(r.min_lambda.is_none());
    }

    #[test]
    fn validate_boundary_a_equals_b() {
        let r = validate(&0.5, &0.5, &2.0).unwrap();
        assert!(!r.conditions[0].holds);
        assert!(!r.verdict);
    }

    #[test]
    fn validate_rejects_garbage() {
        assert!(matches!(
            validate(&f64::NAN, &0.3, &3.0),
            Err(ParamsError::InvalidInput(_))
        ));
        assert!(matches!(
            validate(&0.9, &-0.3, &3.0),
            Err(ParamsError::InvalidInput(_))
        ));
    }

    #[test]
    fn min_lambda_exact() {
        // 0.9 / (1 - 0.6) = 9/4 exactly in rational mode
        let got = min_lambda(&rat(9, 10), &rat(3, 10)).unwrap().unwrap();
        assert_eq!(got, rat(9, 4));
        let f = min_lambda(&0.9f64, &0.3).unwrap().unwrap();
        assert!((f - 2.25).abs() < 1e-12);
    }

    #[test]
    fn min_lambda_demo_pair() {
        let got = min_lambda(&0.97f64, &0.443648).unwrap().unwrap();
        let expected = 0.97 / (1.0 - 2.0 * 0.443648);
        assert!((got - expected).abs() < 1e-12);
        // lands just under the rounded-up default lambda 8.61
        assert!(got < 8.61 && got > 8.60);
        // any lambda at or above the threshold passes condition (2)
        let r = validate(&0.97, &0.443648, &8.61).unwrap();
        assert!(r.conditions[1].holds);
    }

    #[test]
    fn min_lambda_infeasible_at_half() {
        assert_eq!(min_lambda(&rat(4, 5), &rat(1, 2)).unwrap(), None);
        assert_eq!(min_lambda(&0.8f64, &0.55).unwrap(), None);
    }

    #[test]
    fn min_lambda_consistency_exact() {
        // validate(a, b, min_lambda(a,b)) passes (2) exactly in rational mode
        let pairs = [
            (rat(9, 10), rat(3, 10)),
            (rat(97, 100), rat(2, 5)),
            (rat(99, 100), rat(49, 100)),
        ];
        for (a, b) in pairs {
            let lam = min_lambda(&a, &b).unwrap().unwrap();
            let r = validate(&a, &b, &lam).unwrap();
            assert!(r.conditions[1].holds, "condition (2) at a={a}, b={b}");
            assert_eq!(r.a_plus_two_b_lambda, lam);
        }
    }

    #[test]
    fn solve_alpha_cube_pair() {
        // b = (1 - a^3)^(1/3) puts the root at p = 3, alpha = 2/3
        let a = 0.97f64;
        let b = (1.0 - a * a * a).cbrt();
        let r = solve_alpha(a, b, 1e-12).unwrap();
        assert!((r.alpha - 2.0 / 3.0).abs() < 1e-10, "alpha = {}", r.alpha);
        assert!((r.p - 3.0).abs() < 1e-10);
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn solve_alpha_square_pair() {
        // 0.8^2 + 0.6^2 = 1: root p = 2, alpha = 1/2
        let r = solve_alpha(0.8, 0.6, 1e-12).unwrap();
        assert!((r.alpha - 0.5).abs() < 1e-10);
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn solve_alpha_agrees_with_grid_scan() {
        // independent oracle: fine-grid sign-change scan of g(p) = 0.9^p + 0.6^p
        let (a, b) = (0.9f64, 0.6f64);
        let g = |p: f64| a.powf(p) + b.powf(p);
        let step = 1e-5;
        let mut bracket = None;
        let mut p = 1.0;
        while p < 16.0 {
            if g(p) >= 1.0 && g(p + step) < 1.0 {
                bracket = Some((p, p + step));
                break;
            }
            p += step;
        }
        let (lo, hi) = bracket.expect("grid scan must bracket the root");
        let r = solve_alpha(a, b, 1e-12).unwrap();
        assert!(r.p >= lo - 1e-9 && r.p <= hi + 1e-9, "p={} not in [{lo},{hi}]", r.p);
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn solve_alpha_rejects_flat_pairs() {
        // a + b <= 1 pushes the root to p <= 1
        assert!(matches!(
            solve_alpha(0.6, 0.3, 1e-12),
            Err(ParamsError::Domain(_))
        ));
        assert!(matches!(
            solve_alpha(0.5, 0.5, 1e-12),
            Err(ParamsError::Domain(_))
        ));
    }

    #[test]
    fn solve_alpha_residual_brackets_one() {
        // g is strictly decreasing; g at the returned root stays within tol of 1
        for (a, mb) in [(0.95f64, 0.5f64), (0.9, 0.7), (0.99, 0.2)] {
            let r = solve_alpha(a, mb, 1e-12).unwrap();
            let g = |p: f64| a.powf(p) + mb.powf(p);
            assert!((g(r.p) - 1.0).abs() <= 1e-12);
            assert!(g(r.p - 1e-6) > g(r.p));
            assert!(g(r.p + 1e-6) < g(r.p));
        }
    }

    #[test]
    fn params_constructor_enforces_conditions() {
        let p = Params::new(0.97, 0.443648, 8.61, Convention::Inclusive).unwrap();
        assert_eq!(p.mode_name(), "float64");
        assert!(Params::new(0.8, 0.6, 8.61, Convention::Inclusive).is_err());
    }

    #[test]
    fn cube_residual_exact() {
        // a = 9/10, b = 3/5: a^3 + b^3 = 729/1000 + 216/1000 = 945/1000
        let p = Params::new(rat(9, 10), rat(3, 5), rat(9, 2), Convention::Inclusive);
        // condition (2): 9/10 + 2*(3/5)*lambda <= lambda fails for b >= 1/2
        assert!(p.is_err());
        let p = Params::new(rat(97, 100), rat(443648, 1000000), rat(861, 100), Convention::Inclusive)
            .unwrap();
        let res = p.cube_residual();
        assert!(res > BigRational::from_int(0));
        // the 6-decimal b leaves a cube defect of ~6.6e-6
        assert!(res.to_f64() < 1e-5);
    }
}

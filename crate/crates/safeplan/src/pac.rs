//! Closed-form calculators for the sample-complexity guarantee and the
//! solvability probability table.
//!
//! The trajectory bound is
//!
//! ```text
//! m >= (2 ln d) * |A| / eps * (|X| + log2(2|A| / delta))
//! ```
//!
//! Note the mixed logarithm bases — natural log of the domain size, base-2
//! log in the inner term — a classic implementation trap. The bound is
//! evaluated in software fixed-point arithmetic over big integers (scale
//! 10^60, roughly 50+ correct decimal digits) so that taking the ceiling is
//! exact for every result up to 10^12 trajectories.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PacError {
    #[error("parameter {name} = {value} out of range: need {requirement}")]
    OutOfRange { name: &'static str, value: f64, requirement: &'static str },
}

fn require(ok: bool, name: &'static str, value: f64, requirement: &'static str) -> Result<(), PacError> {
    if ok {
        Ok(())
    } else {
        Err(PacError::OutOfRange { name, value, requirement })
    }
}

/// Inputs of the sample-complexity bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PacParams {
    /// Largest domain size over the state variables.
    pub d: u64,
    pub num_actions: u64,
    pub num_vars: u64,
    pub epsilon: f64,
    pub delta: f64,
}

impl PacParams {
    pub fn validate(&self) -> Result<(), PacError> {
        require(self.d >= 2, "d", self.d as f64, "d >= 2")?;
        require(self.num_actions >= 1, "num_actions", self.num_actions as f64, ">= 1")?;
        require(self.num_vars >= 1, "num_vars", self.num_vars as f64, ">= 1")?;
        require(
            self.epsilon > 0.0 && self.epsilon <= 1.0 && self.epsilon.is_finite(),
            "epsilon",
            self.epsilon,
            "0 < epsilon <= 1",
        )?;
        require(
            self.delta > 0.0 && self.delta < 1.0,
            "delta",
            self.delta,
            "0 < delta < 1",
        )
    }
}

/// Fixed-point arithmetic over `BigInt` at scale 10^60: a value `x` is
/// stored as `round(x * 10^60)` with truncation per operation, so the
/// accumulated error over the handful of operations below stays far under
/// one unit in the 50th decimal place.
mod fixed {
    use super::*;

    pub const DIGITS: u32 = 60;

    pub fn scale() -> BigInt {
        BigInt::from(10u32).pow(DIGITS)
    }

    pub fn from_u64(n: u64) -> BigInt {
        BigInt::from(n) * scale()
    }

    /// Exact conversion of a positive finite f64 (every f64 is a dyadic
    /// rational), truncated to the fixed-point grid.
    pub fn from_f64(x: f64) -> Option<BigInt> {
        if !x.is_finite() || x <= 0.0 {
            return None;
        }
        let bits = x.to_bits();
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) =
            if exp_bits == 0 { (frac, -1074i64) } else { (frac | (1 << 52), exp_bits - 1075) };
        let m = BigInt::from(mantissa) * scale();
        Some(if exp >= 0 { m << exp as usize } else { m >> (-exp) as usize })
    }

    pub fn mul(a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) / scale()
    }

    pub fn div(a: &BigInt, b: &BigInt) -> BigInt {
        (a * scale()) / b
    }

    pub fn to_f64(a: &BigInt) -> f64 {
        a.to_f64().unwrap_or(f64::INFINITY) / 1e60
    }

    /// atanh via its odd power series; requires 0 <= z <= 1/3 (guaranteed
    /// by the ln argument reduction), where convergence is ~ 9x per term.
    fn atanh(z: &BigInt) -> BigInt {
        let z2 = mul(z, z);
        let mut term = z.clone();
        let mut sum = z.clone();
        let mut k = BigInt::from(3u32);
        loop {
            term = mul(&term, &z2);
            let add = &term / &k;
            if add == BigInt::ZERO {
                return sum;
            }
            sum += add;
            k += 2;
        }
    }

    pub fn ln2() -> BigInt {
        // ln 2 = 2 atanh(1/3)
        let third = div(&scale(), &(BigInt::from(3u32) * scale()));
        atanh(&third) * 2
    }

    /// Natural log of a positive fixed-point value: reduce by powers of two
    /// into [1, 2), then ln(y) = 2 atanh((y-1)/(y+1)).
    pub fn ln(x: &BigInt) -> BigInt {
        assert!(*x > BigInt::ZERO, "ln of a non-positive value");
        let one = scale();
        let two = &one * 2;
        let mut y = x.clone();
        let mut k = 0i64;
        while y >= two {
            y >>= 1;
            k += 1;
        }
        while y < one {
            y <<= 1;
            k -= 1;
        }
        let z = div(&(&y - &one), &(&y + &one));
        atanh(&z) * 2 + ln2() * k
    }

    pub fn log2(x: &BigInt) -> BigInt {
        div(&ln(x), &ln2())
    }
}

fn bound_fx(p: &PacParams) -> Result<BigInt, PacError> {
    p.validate()?;
    let ln_d = fixed::ln(&fixed::from_u64(p.d));
    let outer = ln_d * 2 * p.num_actions; // (2 ln d) |A|, exact integer scaling
    let ratio = fixed::div(
        &fixed::from_u64(2 * p.num_actions),
        &fixed::from_f64(p.delta).expect("validated delta"),
    );
    let inner = fixed::from_u64(p.num_vars) + fixed::log2(&ratio);
    let eps = fixed::from_f64(p.epsilon).expect("validated epsilon");
    Ok(fixed::div(&fixed::mul(&outer, &inner), &eps))
}

/// The least integer trajectory count satisfying the bound. Exact for all
/// results up to 10^12 (and far beyond).
pub fn sample_complexity(p: &PacParams) -> Result<u128, PacError> {
    let m = bound_fx(p)?;
    let scale = fixed::scale();
    let ceil: BigInt = (&m + (&scale - 1u32)) / &scale;
    Ok(ceil.to_u128().unwrap_or(u128::MAX))
}

/// The pre-ceiling real value of the bound, for display and scaling checks.
pub fn sample_complexity_real(p: &PacParams) -> Result<f64, PacError> {
    Ok(fixed::to_f64(&bound_fx(p)?))
}

/// Conditional and marginal outcome probabilities of the conservative
/// planner, given the prior `mu` that a drawn instance is solvable and the
/// per-draw failure bound `epsilon` on solvable instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolvabilityTable {
    pub mu: f64,
    pub epsilon: f64,
    pub p_plan_given_solvable: f64,
    pub p_no_plan_given_solvable: f64,
    pub p_plan_given_unsolvable: f64,
    pub p_no_plan_given_unsolvable: f64,
    pub p_plan: f64,
    pub p_no_plan: f64,
}

pub fn solvability_table(mu: f64, epsilon: f64) -> Result<SolvabilityTable, PacError> {
    require((0.0..=1.0).contains(&mu), "mu", mu, "0 <= mu <= 1")?;
    require((0.0..=1.0).contains(&epsilon), "epsilon", epsilon, "0 <= epsilon <= 1")?;
    let p_plan = mu * (1.0 - epsilon);
    Ok(SolvabilityTable {
        mu,
        epsilon,
        p_plan_given_solvable: 1.0 - epsilon,
        p_no_plan_given_solvable: epsilon,
        p_plan_given_unsolvable: 0.0,
        p_no_plan_given_unsolvable: 1.0,
        p_plan,
        p_no_plan: 1.0 - p_plan,
    })
}

/// P(solvable | planner reports no plan): the probability that a "no plan"
/// answer is wrong. Written as eps*mu / ((1-mu) + eps*mu), which is
/// algebraically 1 - mu*(1-eps) in the denominator but avoids the
/// cancellation that form suffers near mu = 1.
pub fn gamma_for_epsilon(epsilon: f64, mu: f64) -> Result<f64, PacError> {
    require((0.0..=1.0).contains(&mu), "mu", mu, "0 <= mu <= 1")?;
    require(epsilon >= 0.0 && epsilon.is_finite(), "epsilon", epsilon, "epsilon >= 0")?;
    let wrong = epsilon * mu;
    if wrong == 0.0 {
        return Ok(0.0);
    }
    Ok(wrong / ((1.0 - mu) + wrong))
}

/// The largest failure bound `epsilon` keeping P(solvable | no plan) at or
/// below `gamma`: gamma*(1-mu) / (mu*(1-gamma)).
///
/// This is the exact algebraic inverse of [`gamma_for_epsilon`], so the
/// round trip reproduces `gamma`. Values above 1 mean the constraint does
/// not bind; `gamma >= 1` is vacuous and maps to infinity.
pub fn epsilon_for_gamma(gamma: f64, mu: f64) -> Result<f64, PacError> {
    require(gamma > 0.0, "gamma", gamma, "gamma > 0")?;
    require(mu > 0.0 && mu <= 1.0, "mu", mu, "0 < mu <= 1 (mu = 0 leaves epsilon unconstrained)")?;
    if mu == 1.0 {
        return Ok(0.0);
    }
    if gamma >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(gamma * (1.0 - mu) / (mu * (1.0 - gamma)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(epsilon: f64, delta: f64) -> PacParams {
        PacParams { d: 4, num_actions: 12, num_vars: 2, epsilon, delta }
    }

    #[test]
    fn anchor_values_match_the_independent_oracle() {
        // mpmath at 80 digits: 3628.8386..., 1185.3669...
        assert_eq!(sample_complexity(&params(0.1, 0.05)).unwrap(), 3629);
        assert_eq!(sample_complexity(&params(0.25, 0.2)).unwrap(), 1186);
        let real = sample_complexity_real(&params(0.1, 0.05)).unwrap();
        assert!((real - 3628.8386232104768).abs() < 1e-9, "got {real}");
    }

    #[test]
    fn halving_epsilon_doubles_the_pre_ceiling_value() {
        assert_eq!(sample_complexity(&params(0.05, 0.05)).unwrap(), 7258);
        let r1 = sample_complexity_real(&params(0.1, 0.05)).unwrap();
        let r2 = sample_complexity_real(&params(0.05, 0.05)).unwrap();
        assert!((r2 - 2.0 * r1).abs() < 1e-6);
    }

    #[test]
    fn bound_is_linear_in_the_variable_count() {
        let slope = 2.0 * 4f64.ln() * 12.0 / 0.1;
        let a = sample_complexity_real(&PacParams { num_vars: 2, ..params(0.1, 0.05) }).unwrap();
        let b = sample_complexity_real(&PacParams { num_vars: 3, ..params(0.1, 0.05) }).unwrap();
        assert!((b - a - slope).abs() < 1e-6);
    }

    #[test]
    fn monotonicity_in_each_parameter() {
        let base = sample_complexity_real(&params(0.1, 0.05)).unwrap();
        let eps_up = sample_complexity_real(&params(0.2, 0.05)).unwrap();
        let delta_up = sample_complexity_real(&params(0.1, 0.1)).unwrap();
        assert!(eps_up < base && delta_up < base);
        let more_d =
            sample_complexity_real(&PacParams { d: 5, ..params(0.1, 0.05) }).unwrap();
        let more_a =
            sample_complexity_real(&PacParams { num_actions: 13, ..params(0.1, 0.05) })
                .unwrap();
        assert!(more_d > base && more_a > base);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(sample_complexity(&PacParams { d: 1, ..params(0.1, 0.05) }).is_err());
        assert!(sample_complexity(&params(0.0, 0.05)).is_err());
        assert!(sample_complexity(&params(1.5, 0.05)).is_err());
        assert!(sample_complexity(&params(0.1, 1.0)).is_err());
        assert!(solvability_table(1.2, 0.1).is_err());
        assert!(epsilon_for_gamma(0.0, 0.5).is_err());
        assert!(epsilon_for_gamma(0.1, 0.0).is_err());
    }

    #[test]
    fn table_follows_the_marginal_formulas() {
        let t = solvability_table(1.0, 0.0).unwrap();
        assert_eq!(t.p_plan, 1.0);
        let t = solvability_table(0.8, 0.1).unwrap();
        assert!((t.p_plan - 0.72).abs() < 1e-15);
        assert!((t.p_no_plan - 0.28).abs() < 1e-15);
        let t = solvability_table(0.0, 0.7).unwrap();
        assert_eq!(t.p_plan, 0.0);
        assert_eq!(t.p_no_plan, 1.0);
    }

    #[test]
    fn table_rows_and_marginals_sum_to_one_exactly() {
        for (mu, eps) in [(0.3, 0.01), (0.9999, 1e-9), (0.5, 0.5), (1.0, 1.0), (0.0, 0.0)] {
            let t = solvability_table(mu, eps).unwrap();
            assert_eq!(t.p_plan_given_solvable + t.p_no_plan_given_solvable, 1.0);
            assert_eq!(t.p_plan_given_unsolvable + t.p_no_plan_given_unsolvable, 1.0);
            assert_eq!(t.p_plan + t.p_no_plan, 1.0);
        }
    }

    #[test]
    fn gamma_conversion_round_trips() {
        // The gamma = 0.1, mu = 0.5 case: the exact inverse gives 1/9.
        let eps = epsilon_for_gamma(0.1, 0.5).unwrap();
        assert!((eps - 1.0 / 9.0).abs() < 1e-16);
        let back = gamma_for_epsilon(eps, 0.5).unwrap();
        assert!((back - 0.1).abs() <= f64::EPSILON);

        assert_eq!(epsilon_for_gamma(0.3, 1.0).unwrap(), 0.0);
        assert_eq!(epsilon_for_gamma(1.0, 0.5).unwrap(), f64::INFINITY);

        // Near-one mu exercises the cancellation the stable form avoids.
        for (gamma, mu) in [(1e-8, 0.999_999), (0.9, 0.1), (0.5, 0.5), (0.01, 0.97)] {
            let eps = epsilon_for_gamma(gamma, mu).unwrap();
            let back = gamma_for_epsilon(eps, mu).unwrap();
            assert!(
                (back - gamma).abs() <= 4.0 * f64::EPSILON * gamma,
                "gamma {gamma} mu {mu} -> eps {eps} -> {back}"
            );
        }
    }
}

//! Closed-form exponent thresholds of the weighted fractional Poincaré
//! inequality, generic over the scalar so they can be evaluated exactly.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field the formulas are evaluated in: `f64`, or [`BigRational`] for exact
/// comparisons at equality.
pub trait Scalar: Num + Signed + FromPrimitive + Clone + PartialOrd + Debug {}

impl<T: Num + Signed + FromPrimitive + Clone + PartialOrd + Debug> Scalar for T {}

/// Exact `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"a/b"`, an integer or a plain decimal such as `"-1.25"` exactly.
pub fn parse_ratio(text: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParams(format!("not an exact number: {text:?}"));
    let text = text.trim();
    if text.contains('/') {
        return text.parse().map_err(|_| bad());
    }
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() || !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let numer: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let value = BigRational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

fn dim<T: Scalar>(n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidParams("dimension must be positive".into()));
    }
    Ok(T::from_usize(n).expect("dimension is representable"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideCondition {
    pub name: String,
    pub satisfied: bool,
}

impl SideCondition {
    fn new(name: &str, satisfied: bool) -> Self {
        Self {
            name: name.to_string(),
            satisfied,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport<T> {
    pub theorem: String,
    /// `"b_max"`, `"b_sup"` or `"q_max"`.
    pub quantity: String,
    /// `None` when there is no finite threshold.
    pub value: Option<T>,
    /// Whether the admissible range excludes the threshold itself.
    pub strict: bool,
    pub side_conditions: Vec<SideCondition>,
}

impl<T: Scalar> ThresholdReport<T> {
    fn new(theorem: &str, quantity: &str, value: Option<T>, strict: bool, side_conditions: Vec<SideCondition>) -> Self {
        Self {
            theorem: theorem.to_string(),
            quantity: quantity.to_string(),
            value,
            strict,
            side_conditions,
        }
    }

    /// Whether `x` lies on the admissible side of the threshold.
    pub fn admits(&self, x: &T) -> bool {
        match &self.value {
            None => true,
            Some(v) if self.strict => x < v,
            Some(v) => x <= v,
        }
    }

    pub fn side_conditions_hold(&self) -> bool {
        self.side_conditions.iter().all(|c| c.satisfied)
    }

    pub fn to_f64(&self) -> ThresholdReport<f64>
    where
        T: num_traits::ToPrimitive,
    {
        ThresholdReport {
            theorem: self.theorem.clone(),
            quantity: self.quantity.clone(),
            value: self.value.as_ref().and_then(|v| v.to_f64()),
            strict: self.strict,
            side_conditions: self.side_conditions.clone(),
        }
    }
}

fn check_s<T: Scalar>(s: &T) -> Result<()> {
    if !(*s > T::zero() && *s < T::one()) {
        return Err(Error::InvalidParams(format!("s must lie in (0,1), got {s:?}")));
    }
    Ok(())
}

fn check_a<T: Scalar>(a: &T) -> Result<()> {
    if *a < T::zero() {
        return Err(Error::InvalidParams(format!("a must be >= 0, got {a:?}")));
    }
    Ok(())
}

fn check_pq<T: Scalar>(p: &T, q: &T, strict_p: bool) -> Result<()> {
    let p_ok = if strict_p { *p > T::one() } else { *p >= T::one() };
    if !p_ok || q < p {
        let bound = if strict_p { "1 < p" } else { "1 <= p" };
        return Err(Error::InvalidParams(format!("need {bound} <= q, got p={p:?}, q={q:?}")));
    }
    Ok(())
}

fn check_beta<T: Scalar>(beta: &T) -> Result<()> {
    if *beta < T::one() {
        return Err(Error::InvalidParams(format!("beta must be >= 1, got {beta:?}")));
    }
    Ok(())
}

fn check_alpha<T: Scalar>(alpha: &T) -> Result<()> {
    if !(*alpha > T::zero() && *alpha <= T::one()) {
        return Err(Error::InvalidParams(format!("alpha must lie in (0,1], got {alpha:?}")));
    }
    Ok(())
}

/// `q <= bound` whenever `p < n/s`.
fn sobolev_side<T: Scalar>(name: &str, n: &T, p: &T, q: &T, s: &T, numerator: T) -> SideCondition {
    let applies = p.clone() * s.clone() < n.clone();
    let denom = n.clone() - s.clone() * p.clone();
    SideCondition::new(name, !applies || *q <= numerator / denom)
}

/// Upper limit on `b` for John domains, `(n+a)p/q + sp - n`.
pub fn john_b_max<T: Scalar>(n: usize, p: T, q: T, a: T, s: T) -> Result<ThresholdReport<T>> {
    check_pq(&p, &q, true)?;
    check_a(&a)?;
    check_s(&s)?;
    let nn: T = dim(n)?;
    let value = (nn.clone() + a) * p.clone() / q.clone() + s.clone() * p.clone() - nn.clone();
    let side = sobolev_side("q <= np/(n-sp) when p < n/s", &nn, &p, &q, &s, nn.clone() * p.clone());
    Ok(ThresholdReport::new("3.3", "b_max", Some(value), false, vec![side]))
}

/// The `p = 1` John-domain limit, `(n+a)/q - n + s`.
pub fn john_p1_b_max<T: Scalar>(n: usize, q: T, a: T, s: T) -> Result<ThresholdReport<T>> {
    check_pq(&T::one(), &q, false)?;
    check_a(&a)?;
    check_s(&s)?;
    let nn: T = dim(n)?;
    let value = (nn.clone() + a) / q.clone() - nn.clone() + s.clone();
    let side = SideCondition::new("1 <= q <= n/(n-s)", q <= nn.clone() / (nn - s));
    Ok(ThresholdReport::new("3.5", "b_max", Some(value), false, vec![side]))
}

/// Supremum of admissible `b` on β-John domains (strict):
/// `(n+a)p/(qβ) + (p-1)/β + sp - p + 1 - n`.
pub fn beta_john_b_sup<T: Scalar>(n: usize, p: T, q: T, a: T, s: T, beta: T) -> Result<ThresholdReport<T>> {
    check_pq(&p, &q, true)?;
    check_a(&a)?;
    check_s(&s)?;
    check_beta(&beta)?;
    let nn: T = dim(n)?;
    let one = T::one();
    let value = (nn.clone() + a) * p.clone() / (q.clone() * beta.clone()) + (p.clone() - one.clone()) / beta
        + s.clone() * p.clone()
        - p.clone()
        + one
        - nn.clone();
    let sides = vec![
        sobolev_side("q <= (n-p)/(n-sp) when p < n/s", &nn, &p, &q, &s, nn.clone() - p.clone()),
        sobolev_side("q <= np/(n-sp) when p < n/s", &nn, &p, &q, &s, nn.clone() * p.clone()),
    ];
    Ok(ThresholdReport::new("4.2", "b_sup", Some(value), true, sides))
}

/// The `p = 1` β-John limit, `(n+a)/(qβ) + s - n`.
pub fn beta_john_p1_b_max<T: Scalar>(n: usize, q: T, a: T, s: T, beta: T) -> Result<ThresholdReport<T>> {
    check_pq(&T::one(), &q, false)?;
    check_a(&a)?;
    check_s(&s)?;
    check_beta(&beta)?;
    let nn: T = dim(n)?;
    let value = (nn.clone() + a) / (q.clone() * beta) + s.clone() - nn.clone();
    let side = SideCondition::new(
        "1 <= q <= (n-1)/(n-s)",
        q <= (nn.clone() - T::one()) / (nn - s),
    );
    Ok(ThresholdReport::new("4.3", "b_max", Some(value), false, vec![side]))
}

/// Largest `q` the mushroom counterexample allows,
/// `(n+a)p / (1 - p + β(b + n - 1 + p - sp))`.
pub fn mushroom_q_max<T: Scalar>(n: usize, a: T, p: T, b: T, s: T, beta: T) -> Result<ThresholdReport<T>> {
    check_pq(&p, &p, false)?;
    check_a(&a)?;
    check_s(&s)?;
    check_beta(&beta)?;
    let nn: T = dim(n)?;
    let one = T::one();
    let denom = one.clone() - p.clone() + beta * (b + nn.clone() - one + p.clone() - s * p.clone());
    let finite = denom > T::zero();
    let value = finite.then(|| (nn + a) * p / denom);
    let side = SideCondition::new("finite threshold", finite);
    Ok(ThresholdReport::new("4.4", "q_max", value, false, vec![side]))
}

/// Sufficient `b` limit for Hölder-α domains,
/// `p(s-n) + p(n-1+α)(1 + 1/q - 1/p)`.
pub fn holder_b_max<T: Scalar>(n: usize, p: T, q: T, alpha: T, s: T) -> Result<ThresholdReport<T>> {
    check_pq(&p, &q, false)?;
    check_alpha(&alpha)?;
    check_s(&s)?;
    let nn: T = dim(n)?;
    let one = T::one();
    let value = p.clone() * (s.clone() - nn.clone())
        + p.clone() * (nn.clone() - one.clone() + alpha) * (one.clone() + one.clone() / q.clone() - one / p.clone());
    let sides = vec![
        sobolev_side("q <= (n-p)/(n-sp) when p < n/s", &nn, &p, &q, &s, nn.clone() - p.clone()),
        sobolev_side("q <= np/(n-sp) when p < n/s", &nn, &p, &q, &s, nn.clone() * p.clone()),
    ];
    Ok(ThresholdReport::new("5.1", "b_max", Some(value), false, sides))
}

/// Necessary `b` limit shown sharp by the cusp,
/// `p(s-1+α) + p(n-1+α)(1/q - 1/p)`.
pub fn holder_b_sharp<T: Scalar>(n: usize, p: T, q: T, alpha: T, s: T) -> Result<ThresholdReport<T>> {
    check_pq(&p, &q, false)?;
    check_alpha(&alpha)?;
    check_s(&s)?;
    let nn: T = dim(n)?;
    let one = T::one();
    let value = p.clone() * (s - one.clone() + alpha.clone())
        + p.clone() * (nn - one.clone() + alpha) * (one.clone() / q - one / p);
    Ok(ThresholdReport::new("5.2", "b_max", Some(value), false, Vec::new()))
}

/// Exponents `ν` for which `x_n^(-ν)` on the cusp has an infinite
/// `L^q` norm but a finite weighted seminorm: `lower <= ν < upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuWindow<T> {
    /// `((n-1)/α + 1)/q`, attained.
    pub lower: T,
    /// `((b + (1-s)p + n-1)/α + 1)/p - 1`, excluded.
    pub upper: T,
}

impl<T: Scalar> NuWindow<T> {
    pub fn contains(&self, nu: &T) -> bool {
        *nu >= self.lower && *nu < self.upper
    }
}

/// The window of blow-up exponents, or `None` when it is empty.
pub fn cusp_nu_window<T: Scalar>(n: usize, alpha: T, p: T, q: T, s: T, b: T) -> Result<Option<NuWindow<T>>> {
    check_pq(&p, &q, false)?;
    check_alpha(&alpha)?;
    check_s(&s)?;
    let nn: T = dim(n)?;
    let one = T::one();
    let lower = ((nn.clone() - one.clone()) / alpha.clone() + one.clone()) / q;
    let upper = ((b + (one.clone() - s) * p.clone() + nn - one.clone()) / alpha + one.clone()) / p - one;
    Ok((lower < upper).then_some(NuWindow { lower, upper }))
}

/// Power-law exponents in the mushroom size `r` of the two sides of the
/// inequality for the bump supported in one mushroom. Any `q >= 1` is
/// accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingExponents<T> {
    /// `(n+a)/q`, exponent of the `L^q(d^a)` norm.
    pub lhs: T,
    /// `(1 - p + β(b + n - 1 + p - sp))/p`, exponent of the seminorm
    /// (dominated by the stem).
    pub rhs: T,
    /// `(-p + β(b + n - sp + p))/p`, the non-dominant cap/junction exponent.
    pub junction: T,
}

impl<T: Scalar> ScalingExponents<T> {
    /// Exponent of the quotient; negative means it blows up as `r -> 0`.
    pub fn quotient(&self) -> T {
        self.lhs.clone() - self.rhs.clone()
    }
}

pub fn mushroom_scaling_exponents<T: Scalar>(
    n: usize,
    p: T,
    q: T,
    s: T,
    beta: T,
    a: T,
    b: T,
) -> Result<ScalingExponents<T>> {
    check_pq(&p, &p, false)?;
    check_pq(&T::one(), &q, false)?;
    check_a(&a)?;
    check_s(&s)?;
    check_beta(&beta)?;
    let nn: T = dim(n)?;
    let one = T::one();
    let sp = s * p.clone();
    let lhs = (nn.clone() + a) / q;
    let rhs = (one.clone() - p.clone()
        + beta.clone() * (b.clone() + nn.clone() - one + p.clone() - sp.clone()))
        / p.clone();
    let junction = (-p.clone() + beta * (b + nn - sp + p.clone())) / p;
    Ok(ScalingExponents { lhs, rhs, junction })
}

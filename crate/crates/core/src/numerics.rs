//! Special functions and the density solver behind the analytic bounds.
//!
//! The outage lower bound has the shape `w · γ(a, λπΩ) / Γ(a)`, where `a` is
//! the order of the nearest-neighbour distance law (`l/2 + 1` in full duplex)
//! and `w` a constant weight (one, except for the literal half-duplex form).
//! [`OutageCurve`] captures that shape; the solvers invert it for the density
//! `λ` at a permitted outage `ε`.

use std::f64::consts::PI;

use thiserror::Error;

/// Errors raised by the special functions and the density solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("argument `{name}` out of domain: {value}")]
    Domain { name: &'static str, value: f64 },
    #[error(
        "Newton iteration did not converge after {iterations} iterations \
         (last iterate {lambda}, residual {residual})"
    )]
    NoConvergence {
        iterations: usize,
        lambda: f64,
        residual: f64,
    },
    #[error("could not bracket the density root (outage {outage} at density {lambda})")]
    Bracket { lambda: f64, outage: f64 },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

fn domain(name: &'static str, value: f64) -> NumericsError {
    NumericsError::Domain { name, value }
}

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: f64) -> f64 {
    LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (z + i as f64 + 1.0))
}

/// Γ(a) for a > 0.
pub fn gamma_fn(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("a", a));
    }
    if a < 0.5 {
        // Γ(a) = Γ(a + 1) / a keeps the Lanczos sum in its accurate range.
        return Ok(gamma_fn(a + 1.0)? / a);
    }
    let z = a - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z))
}

/// ln Γ(a) for a > 0.
pub fn ln_gamma(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("a", a));
    }
    if a < 0.5 {
        return Ok(ln_gamma(a + 1.0)? - a.ln());
    }
    let z = a - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

const INC_GAMMA_MAX_ITER: usize = 1_000;
const INC_GAMMA_EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Regularized pair `(P(a, x), Q(a, x))` with `P + Q = 1`.
///
/// The series is used below `x = a + 1` and the Lentz continued fraction
/// above it, so whichever of the two is small is computed directly.
pub fn regularized_gamma_pair(a: f64, x: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("a", a));
    }
    if !(x >= 0.0) {
        return Err(domain("x", x));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a)?;
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denom = a;
        for _ in 0..INC_GAMMA_MAX_ITER {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < sum.abs() * INC_GAMMA_EPS {
                break;
            }
        }
        let p = (sum * log_prefactor.exp()).min(1.0);
        Ok((p, 1.0 - p))
    } else {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..INC_GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < INC_GAMMA_EPS {
                break;
            }
        }
        let q = (log_prefactor.exp() * h).min(1.0);
        Ok((1.0 - q, q))
    }
}

/// Lower incomplete gamma function γ(a, x).
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    let (p, _) = regularized_gamma_pair(a, x)?;
    Ok(p * gamma_fn(a)?)
}

/// Upper incomplete gamma function Γ(a, x).
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    let (_, q) = regularized_gamma_pair(a, x)?;
    Ok(q * gamma_fn(a)?)
}

/// Jensen-approximated outage lower bound `γ(n, λπΩ) / Γ(n)`.
///
/// `n` is the nearest-neighbour order of the first uncancelled pair.
pub fn op_lb_approx(lambda: f64, n: u32, omega: f64) -> Result<f64> {
    OutageCurve::nearest_neighbor(n)?.evaluate(lambda, omega)
}

/// Outage-versus-density curve `q(λ) = weight · γ(order, λπΩ) / Γ(order)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageCurve {
    order: f64,
    weight: f64,
}

impl OutageCurve {
    /// The nearest-neighbour distance law of order `n`: `γ(n, ·) / Γ(n)`.
    pub fn nearest_neighbor(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(domain("n", 0.0));
        }
        Ok(Self {
            order: n as f64,
            weight: 1.0,
        })
    }

    /// The half-duplex form as printed, `γ(l, ·) / Γ(l + 1)`.
    pub fn hd_literal(l: u32) -> Result<Self> {
        if l == 0 {
            return Err(domain("l", 0.0));
        }
        Ok(Self {
            order: l as f64,
            weight: 1.0 / l as f64,
        })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    /// Supremum of the curve as λ → ∞.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    fn check(lambda: f64, omega: f64) -> Result<()> {
        if !(lambda >= 0.0) {
            return Err(domain("lambda", lambda));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(domain("omega", omega));
        }
        Ok(())
    }

    pub fn evaluate(&self, lambda: f64, omega: f64) -> Result<f64> {
        Self::check(lambda, omega)?;
        let (p, _) = regularized_gamma_pair(self.order, lambda * PI * omega)?;
        Ok(self.weight * p)
    }

    /// dq/dλ.
    pub fn derivative(&self, lambda: f64, omega: f64) -> Result<f64> {
        Self::check(lambda, omega)?;
        let x = lambda * PI * omega;
        if x == 0.0 {
            return Ok(if self.order == 1.0 {
                self.weight * PI * omega
            } else {
                0.0
            });
        }
        let log_density = (self.order - 1.0) * x.ln() - x - ln_gamma(self.order)?;
        Ok(self.weight * PI * omega * log_density.exp())
    }

    /// Closed-form start: the density at which the leading series term alone
    /// reaches ε, `(1/(πΩ)) · (ε a Γ(a) / w)^{1/a}`.
    pub fn initial_guess(&self, epsilon: f64, omega: f64) -> Result<f64> {
        Self::check(0.0, omega)?;
        let a = self.order;
        Ok((epsilon * a * gamma_fn(a)? / self.weight).powf(1.0 / a) / (PI * omega))
    }

    /// One Newton step written with the upper incomplete gamma function:
    ///
    /// `λ' = λ + λ e^{x} x^{-a} (Γ(a, x) + (ε/w − 1) Γ(a))`, `x = λπΩ`.
    ///
    /// For `w = 1` this is algebraically `λ − (q(λ) − ε) / q'(λ)`; the sign
    /// of the printed update agrees with the textbook Newton step.
    pub fn newton_step(&self, lambda: f64, omega: f64, epsilon: f64) -> Result<f64> {
        Self::check(lambda, omega)?;
        let a = self.order;
        let x = lambda * PI * omega;
        let (_, q) = regularized_gamma_pair(a, x)?;
        // e^{x} x^{-a} Γ(a) evaluated in log space, Γ(a, x) = Q(a, x) Γ(a).
        let scale = (x - a * x.ln() + ln_gamma(a)?).exp();
        Ok(lambda + lambda * scale * (q + epsilon / self.weight - 1.0))
    }

    /// Jensen convexity side condition `a − 1 ≤ λπΩ` (i.e. `l/2 ≤ λπΩ`).
    pub fn convexity_holds(&self, lambda: f64, omega: f64) -> bool {
        self.order - 1.0 <= lambda * PI * omega
    }
}

/// Stopping rule and numerical floor for the density solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Tolerance on `|q(λ) − ε|`.
    pub abs_tolerance: f64,
    /// Floor that replaces non-positive Newton iterates.
    pub min_density: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            abs_tolerance: 1e-10,
            min_density: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(domain("max_iterations", self.max_iterations as f64));
        }
        if !(self.abs_tolerance > 0.0) {
            return Err(domain("abs_tolerance", self.abs_tolerance));
        }
        if !(self.min_density > 0.0) {
            return Err(domain("min_density", self.min_density));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Newton,
    Bisection,
}

/// A solved density together with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySolution {
    pub lambda: f64,
    pub iterations: usize,
    /// `|q(λ) − ε|` at the returned λ.
    pub residual: f64,
    pub method: SolveMethod,
    /// Set when the convexity side condition fails at the returned λ.
    pub convexity_warning: bool,
}

fn check_target(curve: &OutageCurve, omega: f64, epsilon: f64) -> Result<()> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(domain("omega", omega));
    }
    if !(epsilon > 0.0 && epsilon < curve.weight()) {
        return Err(domain("epsilon", epsilon));
    }
    Ok(())
}

fn solution(
    curve: &OutageCurve,
    omega: f64,
    lambda: f64,
    iterations: usize,
    residual: f64,
    method: SolveMethod,
) -> DensitySolution {
    DensitySolution {
        lambda,
        iterations,
        residual,
        method,
        convexity_warning: !curve.convexity_holds(lambda, omega),
    }
}

/// Newton–Raphson inversion of an arbitrary [`OutageCurve`].
pub fn newton_density(
    curve: &OutageCurve,
    omega: f64,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<DensitySolution> {
    cfg.validate()?;
    check_target(curve, omega, epsilon)?;
    let mut lambda = curve.initial_guess(epsilon, omega)?.max(cfg.min_density);
    let mut residual = (curve.evaluate(lambda, omega)? - epsilon).abs();
    let mut iterations = 0;
    while residual > cfg.abs_tolerance {
        if iterations == cfg.max_iterations {
            return Err(NumericsError::NoConvergence {
                iterations,
                lambda,
                residual,
            });
        }
        let next = curve.newton_step(lambda, omega, epsilon)?;
        if !next.is_finite() {
            return Err(NumericsError::NoConvergence {
                iterations,
                lambda,
                residual,
            });
        }
        lambda = if next <= 0.0 { cfg.min_density } else { next };
        residual = (curve.evaluate(lambda, omega)? - epsilon).abs();
        iterations += 1;
    }
    Ok(solution(
        curve,
        omega,
        lambda,
        iterations,
        residual,
        SolveMethod::Newton,
    ))
}

/// Newton–Raphson density for `l` cancelled interferers (`l` even), i.e. the
/// root of `γ(l/2 + 1, λπΩ) / Γ(l/2 + 1) = ε`.
pub fn newton_raphson_density(
    omega: f64,
    l: u32,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<DensitySolution> {
    if l % 2 != 0 {
        return Err(domain("l", l as f64));
    }
    newton_density(
        &OutageCurve::nearest_neighbor(l / 2 + 1)?,
        omega,
        epsilon,
        cfg,
    )
}

/// Bisection on `[min_density, λ_hi]`, with `λ_hi` doubled until `q(λ_hi) > ε`.
pub fn bisection_density(
    curve: &OutageCurve,
    omega: f64,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<DensitySolution> {
    cfg.validate()?;
    check_target(curve, omega, epsilon)?;
    let mut lo = cfg.min_density;
    let mut hi = curve.initial_guess(epsilon, omega)?.max(2.0 * lo);
    let mut q_hi = curve.evaluate(hi, omega)?;
    let mut doublings = 0;
    while q_hi <= epsilon {
        if doublings == 2_000 || !hi.is_finite() {
            return Err(NumericsError::Bracket {
                lambda: hi,
                outage: q_hi,
            });
        }
        lo = hi;
        hi *= 2.0;
        q_hi = curve.evaluate(hi, omega)?;
        doublings += 1;
    }
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        let value = curve.evaluate(mid, omega)? - epsilon;
        iterations += 1;
        if value.abs() <= cfg.abs_tolerance || mid == lo || mid == hi || iterations >= 10_000 {
            return Ok(solution(
                curve,
                omega,
                mid,
                iterations,
                value.abs(),
                SolveMethod::Bisection,
            ));
        }
        if value > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Newton first, bisection when Newton fails to converge.
pub fn solve_density(
    curve: &OutageCurve,
    omega: f64,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<DensitySolution> {
    match newton_density(curve, omega, epsilon, cfg) {
        Ok(sol) => Ok(sol),
        Err(NumericsError::NoConvergence { .. }) => bisection_density(curve, omega, epsilon, cfg),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Γ on integers and half integers from their closed forms.
    fn gamma_oracle(a: f64) -> f64 {
        let twice = (2.0 * a).round() as u64;
        if twice % 2 == 0 {
            (1..(twice / 2)).map(|k| k as f64).product()
        } else {
            // Γ(k + 1/2) = (2k)! √π / (4^k k!)
            let k = (twice - 1) / 2;
            let mut v = PI.sqrt();
            for j in 0..k {
                v *= j as f64 + 0.5;
            }
            v
        }
    }

    #[test]
    fn gamma_examples() {
        assert!(rel(gamma_fn(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma_fn(5.0).unwrap(), 24.0) < 1e-14);
        assert!(rel(gamma_fn(2.5).unwrap(), 1.5 * 0.5 * PI.sqrt()) < 1e-14);
        assert!(rel(gamma_fn(2.5).unwrap(), 1.329_340_388_179_137) < 1e-14);
    }

    #[test]
    fn gamma_accuracy_on_grid() {
        let mut a = 0.5;
        while a <= 50.0 {
            let got = gamma_fn(a).unwrap();
            assert!(rel(got, gamma_oracle(a)) < 1e-12, "a={a} got={got}");
            let ln = gamma_oracle(a).ln();
            assert!(
                (ln_gamma(a).unwrap() - ln).abs() < 1e-12 * ln.abs().max(1.0),
                "a={a}"
            );
            a += 0.5;
        }
        // recurrence at non-half-integer points
        for &a in &[0.3, 0.77, 3.14, 17.9, 41.2] {
            let lhs = gamma_fn(a + 1.0).unwrap();
            assert!(rel(lhs, a * gamma_fn(a).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(matches!(gamma_fn(0.0), Err(NumericsError::Domain { .. })));
        assert!(gamma_fn(-1.5).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
    }

    #[test]
    fn incomplete_gamma_examples() {
        assert_eq!(lower_incomplete_gamma(2.0, 0.0).unwrap(), 0.0);
        assert!((lower_incomplete_gamma(1.0, 0.693_147).unwrap() - 0.5).abs() < 1e-6);
        // closed form 1 − e^{−x}(1 + x); at x = 0.5314 this is 0.09987, the
        // 0.1 crossing sits at x ≈ 0.53181
        let closed = |x: f64| 1.0 - (-x).exp() * (1.0 + x);
        assert!((lower_incomplete_gamma(2.0, 0.5314).unwrap() - closed(0.5314)).abs() < 1e-14);
        assert!((lower_incomplete_gamma(2.0, 0.5314).unwrap() - 0.1).abs() < 2e-4);
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if closed(mid) < 0.1 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((lower_incomplete_gamma(2.0, lo).unwrap() - 0.1).abs() < 1e-12);
        assert!((lo - 0.53181).abs() < 1e-5);
        assert!((upper_incomplete_gamma(1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(rel(upper_incomplete_gamma(1.0, 1.0).unwrap(), (-1.0f64).exp()) < 1e-13);
        assert!(rel(upper_incomplete_gamma(3.0, 0.0).unwrap(), 2.0) < 1e-14);
        assert!(rel(lower_incomplete_gamma(3.0, f64::INFINITY).unwrap(), 2.0) < 1e-14);
        assert!(lower_incomplete_gamma(0.0, 1.0).is_err());
        assert!(upper_incomplete_gamma(1.0, -1.0).is_err());
    }

    #[test]
    fn incomplete_gamma_complement_identity() {
        for &a in &[0.5, 1.0, 2.0, 3.5, 10.0] {
            for &x in &[0.0, 0.1, 1.0, 10.0] {
                let sum =
                    lower_incomplete_gamma(a, x).unwrap() + upper_incomplete_gamma(a, x).unwrap();
                assert!(rel(sum, gamma_fn(a).unwrap()) < 1e-12, "a={a} x={x}");
            }
        }
    }

    #[test]
    fn regularized_matches_integer_closed_form() {
        // P(n, x) = 1 − e^{−x} Σ_{k<n} x^k / k!
        for n in 1..8u32 {
            for &x in &[0.01, 0.3, 1.0, 2.5, 7.0, 20.0] {
                let mut term = 1.0;
                let mut sum = 0.0;
                for k in 0..n {
                    if k > 0 {
                        term *= x / k as f64;
                    }
                    sum += term;
                }
                let expected = 1.0 - (-x).exp() * sum;
                let (p, _) = regularized_gamma_pair(n as f64, x).unwrap();
                assert!((p - expected).abs() < 1e-13, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn op_lb_examples() {
        assert_eq!(op_lb_approx(0.0, 2, 1.0).unwrap(), 0.0);
        assert!((op_lb_approx(0.16915, 2, 1.0).unwrap() - 0.1).abs() < 1e-3);
        assert!((op_lb_approx(f64::INFINITY, 2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((op_lb_approx(1e6, 2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(op_lb_approx(0.1, 2, 0.0).is_err());
        assert!(op_lb_approx(-0.1, 2, 1.0).is_err());
    }

    #[test]
    fn newton_examples() {
        let cfg = SolverConfig::default();
        let curve = OutageCurve::nearest_neighbor(2).unwrap();
        let guess = curve.initial_guess(0.1, 1.0).unwrap();
        assert!((guess - 0.2f64.sqrt() / PI).abs() < 1e-12);
        assert!((guess - 0.14235).abs() < 1e-5);

        let sol = newton_raphson_density(1.0, 2, 0.1, &cfg).unwrap();
        assert_eq!(sol.method, SolveMethod::Newton);
        assert!((sol.lambda - 0.16915).abs() < 1e-3);
        // test-side bisection on 1 − e^{−πλ}(1 + πλ) = 0.1
        let f = |l: f64| 1.0 - (-PI * l).exp() * (1.0 + PI * l) - 0.1;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((sol.lambda - lo).abs() < 1e-9, "{} vs {lo}", sol.lambda);
        assert!(sol.residual <= cfg.abs_tolerance);
        assert!(sol.iterations >= 1);

        let tiny = newton_raphson_density(1.0, 2, 1e-12, &cfg).unwrap();
        assert!(tiny.lambda > 0.0 && tiny.lambda < 1e-5);
    }

    #[test]
    fn newton_step_is_textbook_newton() {
        let curve = OutageCurve::nearest_neighbor(3).unwrap();
        for &lambda in &[0.05, 0.2, 0.9] {
            let q = curve.evaluate(lambda, 1.3).unwrap();
            let dq = curve.derivative(lambda, 1.3).unwrap();
            let textbook = lambda - (q - 0.1) / dq;
            let step = curve.newton_step(lambda, 1.3, 0.1).unwrap();
            assert!(rel(step, textbook) < 1e-10, "lambda={lambda}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let curve = OutageCurve::hd_literal(2).unwrap();
        let h = 1e-6;
        for &lambda in &[0.1, 0.5, 2.0] {
            let fd = (curve.evaluate(lambda + h, 0.7).unwrap()
                - curve.evaluate(lambda - h, 0.7).unwrap())
                / (2.0 * h);
            assert!(rel(curve.derivative(lambda, 0.7).unwrap(), fd) < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_solver_inputs() {
        let cfg = SolverConfig::default();
        assert!(matches!(
            newton_raphson_density(0.0, 2, 0.1, &cfg),
            Err(NumericsError::Domain { .. })
        ));
        assert!(newton_raphson_density(1.0, 3, 0.1, &cfg).is_err());
        assert!(newton_raphson_density(1.0, 2, 1.0, &cfg).is_err());
        let bad = SolverConfig {
            max_iterations: 0,
            ..cfg
        };
        assert!(newton_raphson_density(1.0, 2, 0.1, &bad).is_err());
        // the literal HD curve never exceeds 1/l
        let lit = OutageCurve::hd_literal(4).unwrap();
        assert!(solve_density(&lit, 1.0, 0.3, &cfg).is_err());
    }

    #[test]
    fn non_convergence_reports_last_iterate_and_falls_back() {
        let cfg = SolverConfig {
            max_iterations: 1,
            abs_tolerance: 1e-15,
            ..SolverConfig::default()
        };
        let curve = OutageCurve::nearest_neighbor(4).unwrap();
        match newton_density(&curve, 2.0, 0.05, &cfg) {
            Err(NumericsError::NoConvergence {
                iterations,
                lambda,
                residual,
            }) => {
                assert_eq!(iterations, 1);
                assert!(lambda > 0.0 && residual > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
        let sol = solve_density(
            &curve,
            2.0,
            0.05,
            &SolverConfig {
                max_iterations: 1,
                ..SolverConfig::default()
            },
        )
        .unwrap();
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn bisection_agrees_with_newton() {
        let cfg = SolverConfig::default();
        let curve = OutageCurve::nearest_neighbor(3).unwrap();
        let a = newton_density(&curve, 0.4, 0.2, &cfg).unwrap();
        let b = bisection_density(&curve, 0.4, 0.2, &cfg).unwrap();
        assert_eq!(b.method, SolveMethod::Bisection);
        assert!(rel(a.lambda, b.lambda) < 1e-8);
    }

    #[test]
    fn convexity_flag() {
        let cfg = SolverConfig::default();
        // ε small forces λπΩ well below l/2 = 3
        let sol = newton_raphson_density(1.0, 6, 0.01, &cfg).unwrap();
        assert!(sol.convexity_warning);
        let sol = newton_raphson_density(1.0, 0, 0.5, &cfg).unwrap();
        assert!(!sol.convexity_warning);
    }
}

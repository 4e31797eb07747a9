//! Problem instances: drift and diffusion nonlinearities, the ledger of
//! structural constants, and the runtime checks of the hypotheses that
//! gate moment stability, coupling contraction and mixing.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::polynomial::Polynomial;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// First Dirichlet eigenvalue of `-d²/dξ²` on the unit interval.
pub const LAMBDA1_UNIT_INTERVAL: f64 = PI * PI;

/// The drift nonlinearity `f` of `dX = (ΔX + f(X)) dt + g(X) dW`.
#[derive(Clone)]
pub struct DriftSpec {
    f: ScalarFn,
    f_prime: ScalarFn,
    polynomial: Option<Polynomial>,
    q: f64,
}

impl fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriftSpec")
            .field("polynomial", &self.polynomial)
            .field("q", &self.q)
            .finish_non_exhaustive()
    }
}

impl DriftSpec {
    /// Polynomial drift with ascending coefficients. The growth order is
    /// `max(degree, 1)`, so that `|f'|` grows like `|x|^{q-1}`.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let p = Polynomial::new(coeffs);
        let dp = p.derivative();
        let q = (p.degree().max(1)) as f64;
        let (p1, p2) = (p.clone(), dp);
        Self {
            f: Arc::new(move |x| p1.eval(x)),
            f_prime: Arc::new(move |x| p2.eval(x)),
            polynomial: Some(p),
            q,
        }
    }

    /// `f(x) = α⁻²(x − x³)`.
    pub fn allen_cahn(alpha: f64) -> Self {
        let a = alpha.powi(-2);
        Self::polynomial(vec![0.0, a, 0.0, -a])
    }

    pub fn linear(c: f64) -> Self {
        Self::polynomial(vec![0.0, c])
    }

    pub fn zero() -> Self {
        Self::polynomial(vec![0.0])
    }

    pub fn custom(f: ScalarFn, f_prime: ScalarFn, q: f64) -> Self {
        Self {
            f,
            f_prime,
            polynomial: None,
            q,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        (self.f_prime)(x)
    }

    /// `f(base + delta) − f(base)`, exact up to rounding for polynomials.
    pub fn increment(&self, base: f64, delta: f64) -> f64 {
        match &self.polynomial {
            Some(p) => p.increment(base, delta),
            None => self.eval(base + delta) - self.eval(base),
        }
    }

    pub fn polynomial_coeffs(&self) -> Option<&Polynomial> {
        self.polynomial.as_ref()
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.polynomial
            .as_ref()
            .is_some_and(|p| p.degree() == 0 && p.coeffs()[0] == 0.0)
    }

    /// Largest relative mismatch between `f'` and a central difference of
    /// `f` on the grid.
    pub fn derivative_mismatch(&self, grid: &SampleGrid) -> f64 {
        derivative_mismatch(&self.f, &self.f_prime, grid)
    }
}

/// The diffusion nonlinearity `g`, lifted to `G(x) g_k = g(x(·)) g_k`.
#[derive(Clone)]
pub struct DiffusionSpec {
    g: ScalarFn,
    g_prime: ScalarFn,
    polynomial: Option<Polynomial>,
    additive: bool,
}

impl fmt::Debug for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionSpec")
            .field("polynomial", &self.polynomial)
            .field("additive", &self.additive)
            .finish_non_exhaustive()
    }
}

impl DiffusionSpec {
    /// `g ≡ sigma`.
    pub fn additive(sigma: f64) -> Self {
        Self::linear(sigma, 0.0)
    }

    /// `g ≡ 0`: the deterministic equation.
    pub fn zero() -> Self {
        Self::additive(0.0)
    }

    /// `g(x) = offset + slope · x`.
    pub fn linear(offset: f64, slope: f64) -> Self {
        let p = Polynomial::new(vec![offset, slope]);
        let dp = p.derivative();
        let additive = p.degree() == 0;
        let (p1, p2) = (p.clone(), dp);
        Self {
            g: Arc::new(move |x| p1.eval(x)),
            g_prime: Arc::new(move |x| p2.eval(x)),
            polynomial: Some(p),
            additive,
        }
    }

    /// User-supplied `g`. `additive` must agree with `g' ≡ 0`; see
    /// [`DiffusionSpec::additive_flag_consistent`].
    pub fn custom(g: ScalarFn, g_prime: ScalarFn, additive: bool) -> Self {
        Self {
            g,
            g_prime,
            polynomial: None,
            additive,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        (self.g_prime)(x)
    }

    pub fn increment(&self, base: f64, delta: f64) -> f64 {
        match &self.polynomial {
            Some(p) => p.increment(base, delta),
            None => self.eval(base + delta) - self.eval(base),
        }
    }

    pub fn is_additive(&self) -> bool {
        self.additive
    }

    pub fn is_zero(&self) -> bool {
        self.polynomial
            .as_ref()
            .is_some_and(|p| p.degree() == 0 && p.coeffs()[0] == 0.0)
    }

    pub fn polynomial_coeffs(&self) -> Option<&Polynomial> {
        self.polynomial.as_ref()
    }

    pub fn additive_flag_consistent(&self, grid: &SampleGrid) -> bool {
        let flat = grid.points().all(|x| self.derivative(x) == 0.0);
        flat == self.additive
    }

    pub fn derivative_mismatch(&self, grid: &SampleGrid) -> f64 {
        derivative_mismatch(&self.g, &self.g_prime, grid)
    }
}

fn derivative_mismatch(f: &ScalarFn, fp: &ScalarFn, grid: &SampleGrid) -> f64 {
    grid.points()
        .map(|x| {
            let h = 1e-5 * (1.0 + x.abs());
            let fd = (f(x + h) - f(x - h)) / (2.0 * h);
            let exact = fp(x);
            (fd - exact).abs() / (1.0 + exact.abs())
        })
        .fold(0.0, f64::max)
}

/// Structural constants `L₁ … L₁₀`, growth order `q` and Poincaré constant `λ₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsLedger {
    /// One-sided Lipschitz constant of `f`.
    pub l1: f64,
    /// Coercivity slope: `f(ξ)ξ ≤ L₂ξ² + L₃`.
    pub l2: f64,
    pub l3: f64,
    /// Growth of `f'`: `|f'(ξ)| ≤ L₄|ξ|^{q−1} + L₅`.
    pub l4: f64,
    pub l5: f64,
    /// Lipschitz constant of `G`.
    pub l6: f64,
    /// Linear growth of `G`: `‖G(x)‖² ≤ L₇‖x‖² + L₈`.
    pub l7: f64,
    pub l8: f64,
    /// Growth of `G` into `Ḣ¹`: `‖G(z)‖²_{L₂¹} ≤ L₉‖z‖₁² + L₁₀`.
    pub l9: f64,
    pub l10: f64,
    pub lambda1: f64,
    pub q: f64,
}

impl Default for ConstantsLedger {
    fn default() -> Self {
        Self {
            l1: 0.0,
            l2: 0.0,
            l3: 0.0,
            l4: 0.0,
            l5: 0.0,
            l6: 0.0,
            l7: 0.0,
            l8: 0.0,
            l9: 0.0,
            l10: 0.0,
            lambda1: LAMBDA1_UNIT_INTERVAL,
            q: 1.0,
        }
    }
}

impl ConstantsLedger {
    /// Sign and range checks. `L₁ ≤ L₂` is not enforced: it is a
    /// normalization of the general theory, and the Allen–Cahn ledger takes
    /// `L₂ < 0 < L₁`. See [`ConstantsLedger::ordered`].
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("L3", self.l3),
            ("L4", self.l4),
            ("L5", self.l5),
            ("L6", self.l6),
            ("L7", self.l7),
            ("L8", self.l8),
            ("L9", self.l9),
            ("L10", self.l10),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) {
                return Err(Error::invalid(format!("{name} = {v} must be nonnegative")));
            }
        }
        if !(self.lambda1 > 0.0) {
            return Err(Error::invalid("lambda1 must be positive"));
        }
        if !(self.q >= 1.0) {
            return Err(Error::invalid("growth order q must be at least 1"));
        }
        Ok(())
    }

    /// `L₁ ≤ L₂`.
    pub fn ordered(&self) -> bool {
        self.l1 <= self.l2
    }

    /// Sharp `L₁`, `L₃` and valid `L₄`, `L₅`, `q` for a polynomial drift
    /// that is affine or of odd degree with negative leading coefficient.
    /// `L₂` defaults to `L₁` (to `L₁ + 1` for affine drifts with an offset,
    /// where `L₂ = L₁` admits no finite `L₃`). Diffusion constants are left
    /// at zero.
    pub fn for_polynomial_drift(p: &Polynomial, l2: Option<f64>) -> Result<Self> {
        let d = p.degree();
        if d >= 2 && (d.is_multiple_of(2) || p.leading() >= 0.0) {
            return Err(Error::invalid(
                "drift must be affine or an odd-degree polynomial with negative leading coefficient",
            ));
        }
        let dp = p.derivative();
        let l1 = dp.sup();
        if d <= 1 {
            let (c0, c1) = (p.coeffs()[0], p.coeffs().get(1).copied().unwrap_or(0.0));
            let l2 = l2.unwrap_or(if c0 == 0.0 { c1 } else { c1 + 1.0 });
            // sup_x c0 x + (c1 − L₂) x²
            let l3 = if c0 == 0.0 && l2 >= c1 {
                0.0
            } else if l2 > c1 {
                c0 * c0 / (4.0 * (l2 - c1))
            } else {
                return Err(Error::invalid(format!(
                    "no finite L3 for an affine drift with L2 = {l2}"
                )));
            };
            return Ok(Self {
                l1: c1,
                l2,
                l3,
                l4: 0.0,
                l5: c1.abs(),
                q: 1.0,
                ..Self::default()
            });
        }
        let l2 = l2.unwrap_or(l1);
        // sup_x f(x) x − L₂ x²
        let coer = p.shift_up(1).sub(&Polynomial::new(vec![0.0, 0.0, l2]));
        let l3 = coer.sup().max(0.0);
        let l4: f64 = dp.coeffs().iter().skip(1).map(|c| c.abs()).sum();
        let l5: f64 = dp.coeffs().iter().map(|c| c.abs()).sum();
        Ok(Self {
            l1,
            l2,
            l3,
            l4,
            l5,
            q: d as f64,
            ..Self::default()
        })
    }
}

/// Initial datum `X₀` on `(0,1)`, vanishing at both endpoints.
#[derive(Clone)]
pub enum InitialCondition {
    Zero,
    /// `amplitude · sin(mode · π ξ)`.
    SineMode { amplitude: f64, mode: u32 },
    Custom { name: String, f: ScalarFn },
}

impl fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::SineMode { amplitude, mode } => f
                .debug_struct("SineMode")
                .field("amplitude", amplitude)
                .field("mode", mode)
                .finish(),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl InitialCondition {
    pub fn sine(amplitude: f64, mode: u32) -> Self {
        Self::SineMode { amplitude, mode }
    }

    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::SineMode { amplitude, mode } => amplitude * (*mode as f64 * PI * xi).sin(),
            Self::Custom { f, .. } => f(xi),
        }
    }

    pub fn vanishes_on_boundary(&self) -> bool {
        self.eval(0.0).abs() <= 1e-12 && self.eval(1.0).abs() <= 1e-12
    }
}

/// Full coefficient set of one SPDE instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub drift: DriftSpec,
    pub diffusion: DiffusionSpec,
    pub constants: ConstantsLedger,
    pub initial: InitialCondition,
}

impl ProblemSpec {
    pub fn new(
        drift: DriftSpec,
        diffusion: DiffusionSpec,
        constants: ConstantsLedger,
        initial: InitialCondition,
    ) -> Result<Self> {
        if !initial.vanishes_on_boundary() {
            return Err(Error::invalid(
                "initial condition must vanish at ξ = 0 and ξ = 1",
            ));
        }
        constants.validate()?;
        Ok(Self {
            drift,
            diffusion,
            constants,
            initial,
        })
    }

    /// Deterministic heat equation `dX = ΔX dt`.
    pub fn heat(initial: InitialCondition) -> Result<Self> {
        Self::new(
            DriftSpec::zero(),
            DiffusionSpec::zero(),
            ConstantsLedger::default(),
            initial,
        )
    }

    pub fn with_diffusion(mut self, diffusion: DiffusionSpec, l6: f64, l7: f64, l8: f64) -> Self {
        self.diffusion = diffusion;
        self.constants.l6 = l6;
        self.constants.l7 = l7;
        self.constants.l8 = l8;
        self
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Result<Self> {
        if !initial.vanishes_on_boundary() {
            return Err(Error::invalid(
                "initial condition must vanish at ξ = 0 and ξ = 1",
            ));
        }
        self.initial = initial;
        Ok(self)
    }
}

/// Stochastic Allen–Cahn equation `dX = (ΔX + α⁻²(X − X³)) dt + dW`.
///
/// `L₂` is fixed to `−1`, which makes `L₃ = (1 + α²)² / (4α²)` the sharp
/// maximum of `(α⁻² + 1)x² − α⁻²x⁴`. `L₄ = 3α⁻²` is the smallest constant
/// with `α⁻²|1 − 3x²| ≤ L₄x² + α⁻²` for all `x`.
pub fn allen_cahn_spec(alpha: f64, noise_trace_l8: f64, noise_h1_l10: f64) -> Result<ProblemSpec> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    if !(noise_trace_l8 >= 0.0) || !(noise_h1_l10 >= 0.0) {
        return Err(Error::invalid("noise constants must be nonnegative"));
    }
    let a2 = alpha * alpha;
    let constants = ConstantsLedger {
        l1: 1.0 / a2,
        l2: -1.0,
        l3: (1.0 + a2).powi(2) / (4.0 * a2),
        l4: 3.0 / a2,
        l5: 1.0 / a2,
        l6: 0.0,
        l7: 0.0,
        l8: noise_trace_l8,
        l9: 0.0,
        l10: noise_h1_l10,
        lambda1: LAMBDA1_UNIT_INTERVAL,
        q: 3.0,
    };
    Ok(ProblemSpec {
        drift: DriftSpec::allen_cahn(alpha),
        diffusion: DiffusionSpec::additive(1.0),
        constants,
        initial: InitialCondition::sine(1.0, 1),
    })
}

/// Uniform sample grid on `[−radius, radius]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub radius: f64,
    pub n_points: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self {
            radius: 10.0,
            n_points: 2001,
        }
    }
}

impl SampleGrid {
    pub fn new(radius: f64, n_points: usize) -> Result<Self> {
        if !(radius > 0.0) || n_points == 0 {
            return Err(Error::invalid("sample grid needs radius > 0 and at least one point"));
        }
        Ok(Self { radius, n_points })
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n_points;
        let r = self.radius;
        (0..n).map(move |i| {
            if n == 1 {
                0.0
            } else {
                -r + 2.0 * r * i as f64 / (n - 1) as f64
            }
        })
    }
}

/// Outcome of one inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub passed: bool,
    /// Largest amount by which the inequality is exceeded (0 when it holds).
    pub max_violation: f64,
    /// `true` when the check was decided over all of ℝ from the polynomial
    /// coefficients rather than on the sample grid alone.
    pub exact: bool,
}

impl Check {
    fn from_violation(v: f64, scale: f64, exact: bool) -> Self {
        let v = v.max(0.0);
        Self {
            passed: v <= 1e-9 * scale.max(1.0),
            max_violation: v,
            exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    pub monotonicity: Check,
    pub coercivity: Check,
    pub growth: Check,
    pub diffusion_lipschitz: Check,
    pub diffusion_growth: Check,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.entries().iter().all(|(_, c)| c.passed)
    }

    pub fn entries(&self) -> [(&'static str, Check); 5] {
        [
            ("monotonicity", self.monotonicity),
            ("coercivity", self.coercivity),
            ("growth", self.growth),
            ("diffusion_lipschitz", self.diffusion_lipschitz),
            ("diffusion_growth", self.diffusion_growth),
        ]
    }
}

/// Check the scalar forms of the drift and diffusion conditions.
///
/// Two-point conditions (monotonicity, Lipschitz) report violations
/// normalized by `(ξ − η)²`; one-point conditions report absolute excess.
/// With polynomial coefficients the monotonicity, coercivity and (for odd
/// integer `q`) growth checks are also decided over the whole real line.
pub fn verify_conditions(spec: &ProblemSpec, grid: &SampleGrid) -> ConditionReport {
    let c = &spec.constants;
    let drift = &spec.drift;
    let diff = &spec.diffusion;
    let xs: Vec<f64> = grid.points().collect();
    let fx: Vec<f64> = xs.iter().map(|&x| drift.eval(x)).collect();
    let gx: Vec<f64> = xs.iter().map(|&x| diff.eval(x)).collect();

    let mut mono = f64::NEG_INFINITY;
    let mut mono_scale: f64 = 0.0;
    let mut lip = f64::NEG_INFINITY;
    let mut lip_scale: f64 = 0.0;
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            let d = xs[i] - xs[j];
            let d2 = d * d;
            let slope = (fx[i] - fx[j]) * d / d2;
            mono = mono.max(slope - c.l1);
            mono_scale = mono_scale.max(slope.abs());
            let gs = (gx[i] - gx[j]).powi(2) / d2;
            lip = lip.max(gs - c.l6);
            lip_scale = lip_scale.max(gs);
        }
    }
    if xs.len() < 2 {
        mono = 0.0;
        lip = 0.0;
    }

    let mut coer = f64::NEG_INFINITY;
    let mut coer_scale: f64 = 0.0;
    let mut growth = f64::NEG_INFINITY;
    let mut growth_scale: f64 = 0.0;
    let mut ggrowth = f64::NEG_INFINITY;
    let mut gg_scale: f64 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let lhs = fx[k] * x;
        let rhs = c.l2 * x * x + c.l3;
        coer = coer.max(lhs - rhs);
        coer_scale = coer_scale.max(lhs.abs()).max(rhs.abs());
        let dp = drift.derivative(x).abs();
        let bound = c.l4 * x.abs().powf(c.q - 1.0) + c.l5;
        growth = growth.max(dp - bound);
        growth_scale = growth_scale.max(dp).max(bound);
        let g2 = gx[k] * gx[k];
        let gb = c.l7 * x * x + c.l8;
        ggrowth = ggrowth.max(g2 - gb);
        gg_scale = gg_scale.max(g2).max(gb);
    }

    let mut report = ConditionReport {
        monotonicity: Check::from_violation(mono, mono_scale, false),
        coercivity: Check::from_violation(coer, coer_scale, false),
        growth: Check::from_violation(growth, growth_scale, false),
        diffusion_lipschitz: Check::from_violation(lip, lip_scale, false),
        diffusion_growth: Check::from_violation(ggrowth, gg_scale, false),
    };

    if let Some(p) = drift.polynomial_coeffs() {
        let dp = p.derivative();
        let scale = 1.0 + c.l1.abs();
        report.monotonicity = Check::from_violation(dp.sup() - c.l1, scale, true);
        let coer_poly = p.shift_up(1).sub(&Polynomial::new(vec![c.l3, 0.0, c.l2]));
        report.coercivity = Check::from_violation(coer_poly.sup(), 1.0 + c.l3.abs(), true);
        let qm1 = c.q - 1.0;
        if qm1.fract() == 0.0 && (qm1 as i64) % 2 == 0 {
            let mut bound = vec![0.0; qm1 as usize + 1];
            bound[0] += c.l5;
            bound[qm1 as usize] += c.l4;
            let bound = Polynomial::new(bound);
            let upper = dp.sub(&bound).sup();
            let lower = dp.scale(-1.0).sub(&bound).sup();
            report.growth = Check::from_violation(upper.max(lower), 1.0 + c.l5, true);
        }
    }
    report
}

/// Slack of the two mixing hypotheses, `λ₁ − (L₁ + L₆/2)` and `λ₁ − (L₂ + L₇/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    pub contraction: f64,
    pub stability: f64,
}

impl Margins {
    pub fn both_positive(&self) -> bool {
        self.contraction > 0.0 && self.stability > 0.0
    }
}

pub fn ergodicity_margins(c: &ConstantsLedger) -> Margins {
    Margins {
        contraction: c.lambda1 - (c.l1 + c.l6 / 2.0),
        stability: c.lambda1 - (c.l2 + c.l7 / 2.0),
    }
}

/// Coupling contraction rate `γ₆ = (2(λ₁ − L₁) − L₆) / (2(λ₁ − L₁) + 1)`.
pub fn contraction_rate_gamma6(c: &ConstantsLedger) -> Result<f64> {
    let margin = ergodicity_margins(c).contraction;
    if !(margin > 0.0) {
        return Err(Error::Precondition {
            what: "L1 + L6/2 < lambda1".into(),
            margin,
        });
    }
    let a = 2.0 * (c.lambda1 - c.l1);
    Ok((a - c.l6) / (a + 1.0))
}

/// Constants of the discrete mean-square stability envelope
/// `E‖X_m‖² ≤ e^{−γ₅ t_m}‖X₀‖² + C_γ₅`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRate {
    pub gamma5: f64,
    pub c_gamma5: f64,
}

impl StabilityRate {
    pub fn envelope(&self, t: f64, x0_sq: f64) -> f64 {
        (-self.gamma5 * t).exp() * x0_sq + self.c_gamma5
    }
}

pub fn stability_rate_gamma5(c: &ConstantsLedger, tau: f64) -> Result<StabilityRate> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!("tau = {tau} must lie in (0, 1)")));
    }
    let margin = ergodicity_margins(c).stability;
    if !(margin > 0.0) {
        return Err(Error::Precondition {
            what: "L2 + L7/2 < lambda1".into(),
            margin,
        });
    }
    let a = 2.0 * (c.lambda1 - c.l2);
    Ok(StabilityRate {
        gamma5: (a - c.l7) / (1.0 + a * tau),
        c_gamma5: (2.0 * c.l3 + c.l8) / (a - c.l7),
    })
}

/// Upper limit on the step size for which the implicit equation is uniquely solvable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WellposedBound {
    Unbounded,
    Below(f64),
}

impl WellposedBound {
    pub fn admits(&self, tau: f64) -> bool {
        match self {
            Self::Unbounded => true,
            Self::Below(b) => tau < *b,
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Self::Unbounded => f64::INFINITY,
            Self::Below(b) => *b,
        }
    }
}

fn bound_from_coefficient(k: f64) -> WellposedBound {
    if k <= 0.0 {
        WellposedBound::Unbounded
    } else {
        WellposedBound::Below(1.0 / k)
    }
}

/// Step-size bound `(L₁ − λ₁/(λ₁+1)) τ < 1` for the semi-discrete scheme.
pub fn max_wellposed_tau(c: &ConstantsLedger) -> WellposedBound {
    bound_from_coefficient(c.l1 - c.lambda1 / (c.lambda1 + 1.0))
}

/// Step-size bound `(L₁ − λ₁) τ < 1` for the Galerkin scheme.
pub fn max_wellposed_tau_galerkin(c: &ConstantsLedger) -> WellposedBound {
    bound_from_coefficient(c.l1 - c.lambda1)
}

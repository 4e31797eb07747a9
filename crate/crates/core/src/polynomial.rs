//! Real polynomials in ascending-coefficient form, with the root finding
//! needed to compute sharp constants for polynomial drifts.

/// `c[0] + c[1] x + ... + c[d] x^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::new(vec![0.0]);
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| j as f64 * c)
                .collect(),
        )
    }

    /// Coefficients of `t ↦ p(base + t)`.
    pub fn taylor_at(&self, base: f64) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        // Repeated synthetic division by (x - base).
        for i in 0..n {
            for j in (i..n - 1).rev() {
                c[j] += base * c[j + 1];
            }
        }
        c
    }

    /// `p(base + delta) - p(base)` without the cancellation of the naive
    /// difference when `delta` is small relative to `base`.
    pub fn increment(&self, base: f64, delta: f64) -> f64 {
        let t = self.taylor_at(base);
        t[1..].iter().rev().fold(0.0, |acc, c| acc * delta + c) * delta
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        - other.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Multiply by `x^k`.
    pub fn shift_up(&self, k: usize) -> Polynomial {
        let mut c = vec![0.0; k];
        c.extend_from_slice(&self.coeffs);
        Polynomial::new(c)
    }

    /// Sorted real roots. Roots of `p'` bracket the roots of `p`, so the
    /// search recurses on the derivative and bisects each sign change.
    pub fn real_roots(&self) -> Vec<f64> {
        let d = self.degree();
        if d == 0 {
            return Vec::new();
        }
        if d == 1 {
            return vec![-self.coeffs[0] / self.coeffs[1]];
        }
        let lead = self.leading();
        let bound = 1.0
            + self.coeffs[..d]
                .iter()
                .map(|c| (c / lead).abs())
                .fold(0.0, f64::max);
        let mut knots = vec![-bound];
        knots.extend(self.derivative().real_roots().into_iter().filter(|r| r.abs() < bound));
        knots.push(bound);

        let mut roots: Vec<f64> = Vec::new();
        let scale = self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa.abs() <= 1e-14 * scale * (1.0 + a.abs().powi(d as i32)) {
                push_unique(&mut roots, a);
            }
            if fa * fb < 0.0 {
                push_unique(&mut roots, bisect(|x| self.eval(x), a, b, fa));
            }
        }
        if let Some(&last) = knots.last() {
            if self.eval(last) == 0.0 {
                push_unique(&mut roots, last);
            }
        }
        roots
    }

    /// `sup_{x ∈ ℝ} p(x)`, or `+∞` when the polynomial is unbounded above.
    pub fn sup(&self) -> f64 {
        let d = self.degree();
        if d == 0 {
            return self.coeffs[0];
        }
        if d % 2 == 1 || self.leading() > 0.0 {
            return f64::INFINITY;
        }
        self.derivative()
            .real_roots()
            .into_iter()
            .map(|r| self.eval(r))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn push_unique(roots: &mut Vec<f64>, r: f64) {
    if roots
        .last()
        .is_none_or(|&prev| (r - prev).abs() > 1e-12 * (1.0 + r.abs()))
    {
        roots.push(r);
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

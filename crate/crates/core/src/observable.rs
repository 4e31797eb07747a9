//! Scalar functionals of a discrete state.

use std::fmt;
use std::sync::Arc;

use crate::fem::FemSpace;

pub type StateFn = Arc<dyn Fn(&FemSpace, &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Observable {
    /// `‖x‖`
    L2Norm,
    /// `‖x‖²`; not globally Lipschitz.
    L2NormSq,
    H1Semi,
    H1SemiSq,
    /// `min(‖x‖, cap)`: bounded and 1-Lipschitz.
    ClampedNorm { cap: f64 },
    /// `⟨x, direction⟩` in the discrete L² inner product.
    Projection { name: String, direction: Vec<f64> },
    Constant(f64),
    Custom {
        name: String,
        lipschitz: Option<f64>,
        f: StateFn,
    },
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Observable({})", self.name())
    }
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Self::L2Norm => "l2".into(),
            Self::L2NormSq => "l2_sq".into(),
            Self::H1Semi => "h1".into(),
            Self::H1SemiSq => "h1_sq".into(),
            Self::ClampedNorm { cap } => format!("clamped_l2_{cap}"),
            Self::Projection { name, .. } => name.clone(),
            Self::Constant(c) => format!("const_{c}"),
            Self::Custom { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, space: &FemSpace, x: &[f64]) -> f64 {
        match self {
            Self::L2Norm => space.l2_norm(x),
            Self::L2NormSq => space.l2_norm_sq(x),
            Self::H1Semi => space.h1_semi_sq(x).sqrt(),
            Self::H1SemiSq => space.h1_semi_sq(x),
            Self::ClampedNorm { cap } => space.l2_norm(x).min(*cap),
            Self::Projection { direction, .. } => space.inner(x, direction),
            Self::Constant(c) => *c,
            Self::Custom { f, .. } => f(space, x),
        }
    }

    /// Lipschitz constant with respect to the L² norm, when finite.
    pub fn lipschitz(&self, space: &FemSpace) -> Option<f64> {
        match self {
            Self::L2Norm | Self::ClampedNorm { .. } => Some(1.0),
            Self::Projection { direction, .. } => Some(space.l2_norm(direction)),
            Self::Constant(_) => Some(0.0),
            Self::Custom { lipschitz, .. } => *lipschitz,
            Self::L2NormSq | Self::H1Semi | Self::H1SemiSq => None,
        }
    }

    /// Bounded and Lipschitz, the test-function class of the mixing estimate.
    pub fn in_lip_b(&self) -> bool {
        matches!(self, Self::ClampedNorm { .. } | Self::Constant(_))
    }
}

//! Mirror maps defining the separable Bregman data term.
//!
//! A link is the gradient `u = ∇φ(x)` of a strictly convex potential. All
//! univariate lasso-family solvers work in link space, so the squared link
//! (`∇φ(x) = x`) is the identity and costs nothing.

use std::fmt;
use std::sync::Arc;

/// User-supplied potential together with its gradient and inverse gradient.
pub trait Potential: Send + Sync {
    /// φ(x)
    fn value(&self, x: f64) -> f64;
    /// ∇φ(x), strictly increasing on the domain.
    fn grad(&self, x: f64) -> f64;
    /// (∇φ)⁻¹(u)
    fn grad_inv(&self, u: f64) -> f64;
    /// Open interval of admissible x.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

#[derive(Clone, Default)]
pub enum BregmanLink {
    /// φ(x) = x²/2
    #[default]
    Squared,
    /// φ(x) = x log x + (1 − x) log(1 − x) on (0, 1).
    Entropy,
    Custom(Arc<dyn Potential>),
}

impl fmt::Debug for BregmanLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BregmanLink::Squared => f.write_str("Squared"),
            BregmanLink::Entropy => f.write_str("Entropy"),
            BregmanLink::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl BregmanLink {
    pub fn custom(p: impl Potential + 'static) -> Self {
        BregmanLink::Custom(Arc::new(p))
    }

    pub fn is_squared(&self) -> bool {
        matches!(self, BregmanLink::Squared)
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            BregmanLink::Squared => (f64::NEG_INFINITY, f64::INFINITY),
            BregmanLink::Entropy => (0.0, 1.0),
            BregmanLink::Custom(p) => p.domain(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x.is_finite() && x > lo && x < hi
    }

    pub fn forward(&self, x: f64) -> f64 {
        match self {
            BregmanLink::Squared => x,
            BregmanLink::Entropy => (x / (1.0 - x)).ln(),
            BregmanLink::Custom(p) => p.grad(x),
        }
    }

    pub fn inverse(&self, u: f64) -> f64 {
        match self {
            BregmanLink::Squared => u,
            BregmanLink::Entropy => {
                if u >= 0.0 {
                    1.0 / (1.0 + (-u).exp())
                } else {
                    let e = u.exp();
                    e / (1.0 + e)
                }
            }
            BregmanLink::Custom(p) => p.grad_inv(u),
        }
    }

    /// D_φ(x, y) = φ(x) − φ(y) − ∇φ(y)(x − y).
    pub fn divergence(&self, x: f64, y: f64) -> f64 {
        match self {
            BregmanLink::Squared => 0.5 * (x - y) * (x - y),
            BregmanLink::Entropy => xlogy_ratio(x, y) + xlogy_ratio(1.0 - x, 1.0 - y),
            BregmanLink::Custom(p) => p.value(x) - p.value(y) - p.grad(y) * (x - y),
        }
    }
}

fn xlogy_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).ln()
    }
}

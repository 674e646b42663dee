//! Power-law interaction kernels and their truncations.
//!
//! The singular kernel is `phi_s(z) = C_s / |z|^(1+2s)` with
//! `C_s = 4^s s Gamma(s+1/2) / (sqrt(pi) Gamma(1-s))`. Two modifications are
//! supported: the spatial support may be truncated at a horizon `delta`
//! (kernel is zero beyond it), and the singularity may be truncated at a
//! radius `eps` (kernel is held flat at `phi_s(eps)` inside it).
//!
//! Everything here is a pure function of an immutable spec, so concurrent
//! evaluation is safe without synchronization.

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// Fractional order `s`, confined to the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s > 0.0 && s < 1.0 {
            Ok(Self(s))
        } else {
            Err(Error::FractionalOrderOutOfRange(s))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Interaction horizon: an explicit flag rather than a sentinel float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

impl Horizon {
    #[inline]
    pub fn finite(self) -> Option<f64> {
        match self {
            Horizon::Finite(d) => Some(d),
            Horizon::Infinite => None,
        }
    }
}

/// Result of a pointwise kernel evaluation. The singular kernel has no finite
/// value at the origin; callers must branch rather than receive an `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelValue {
    Finite(f64),
    Singular,
}

impl KernelValue {
    #[inline]
    pub fn finite(self) -> Option<f64> {
        match self {
            KernelValue::Finite(v) => Some(v),
            KernelValue::Singular => None,
        }
    }

    #[inline]
    pub fn is_singular(self) -> bool {
        matches!(self, KernelValue::Singular)
    }
}

/// A fully specified kernel: order, horizon, singularity-truncation radius.
///
/// `eps = 0` means the singularity is kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    order: FractionalOrder,
    horizon: Horizon,
    eps: f64,
    constant: f64,
}

impl KernelSpec {
    pub fn new(order: FractionalOrder, horizon: Horizon, eps: f64) -> Result<Self> {
        if let Horizon::Finite(d) = horizon {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidKernel(format!(
                    "finite horizon must be positive, got {d}"
                )));
            }
            if eps > d {
                return Err(Error::InvalidKernel(format!(
                    "eps = {eps} exceeds the horizon delta = {d}"
                )));
            }
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidKernel(format!(
                "eps must be a nonnegative finite length, got {eps}"
            )));
        }
        Ok(Self {
            order,
            horizon,
            eps,
            constant: kernel_constant(order),
        })
    }

    /// Singular kernel with truncated support: `phi_{s,delta}`.
    pub fn singular(order: FractionalOrder, delta: f64) -> Result<Self> {
        Self::new(order, Horizon::Finite(delta), 0.0)
    }

    /// Bounded kernel, truncated both in support and at the singularity:
    /// `phi_{s,delta,eps}`.
    pub fn truncated(order: FractionalOrder, delta: f64, eps: f64) -> Result<Self> {
        if eps <= 0.0 {
            return Err(Error::InvalidKernel(format!(
                "truncated kernel needs eps > 0, got {eps}"
            )));
        }
        Self::new(order, Horizon::Finite(delta), eps)
    }

    /// Untruncated singular kernel `phi_s` on the whole line.
    pub fn whole_line(order: FractionalOrder) -> Self {
        Self::new(order, Horizon::Infinite, 0.0).expect("whole-line spec is always valid")
    }

    #[inline]
    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    #[inline]
    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    #[inline]
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Total kernel mass beyond the horizon, `2 * int_delta^inf phi_s(z) dz
    /// = (C_s / s) delta^(-2s)`. This is exactly the interaction mass removed
    /// by the support truncation; on fields supported inside the solution
    /// domain (horizon >= 2L) the truncated operator differs from the
    /// whole-line one by this multiple of the identity.
    pub fn tail_mass(&self) -> Option<f64> {
        let d = self.horizon.finite()?;
        let s = self.order.value();
        Some(self.constant / s * d.powf(-2.0 * s))
    }
}

/// The normalization constant `C_s`, evaluated in log space so that
/// `Gamma(1-s)` blowing up near `s = 1` cannot overflow.
pub fn kernel_constant(order: FractionalOrder) -> f64 {
    let s = order.value();
    let ln_c = s * 4.0f64.ln() + s.ln() + ln_gamma(s + 0.5)
        - 0.5 * std::f64::consts::PI.ln()
        - ln_gamma(1.0 - s);
    ln_c.exp()
}

/// Pointwise kernel value at signed offset `z`.
pub fn kernel_eval(spec: &KernelSpec, z: f64) -> KernelValue {
    let az = z.abs();
    if let Horizon::Finite(d) = spec.horizon {
        if az > d {
            return KernelValue::Finite(0.0);
        }
    }
    let s = spec.order.value();
    if spec.eps > 0.0 && az <= spec.eps {
        return KernelValue::Finite(spec.constant / spec.eps.powf(1.0 + 2.0 * s));
    }
    if az == 0.0 {
        return KernelValue::Singular;
    }
    KernelValue::Finite(spec.constant / az.powf(1.0 + 2.0 * s))
}

/// Maximum of the bounded kernel, `C_s / eps^(1+2s)`. Rejects `eps = 0`,
/// where the kernel is unbounded.
pub fn kernel_max(spec: &KernelSpec) -> Result<f64> {
    if spec.eps <= 0.0 {
        return Err(Error::InvalidKernel(
            "kernel maximum is unbounded for eps = 0".into(),
        ));
    }
    let s = spec.order.value();
    Ok(spec.constant / spec.eps.powf(1.0 + 2.0 * s))
}

/// `int_a^b z^k phi(z) dz` by closed-form antiderivatives on each smooth
/// piece of the kernel (flat piece below `eps`, power-law piece up to the
/// horizon, zero beyond), splitting at `eps` and `delta` as needed.
///
/// For the singular kernel (`eps = 0`) the k = 0 and k = 1 moments are
/// rejected at `a = 0`; the k = 2 moment is finite there for every
/// `s` in (0, 1) and is what removes the principal value in the operator
/// quadrature.
pub fn cell_moments(spec: &KernelSpec, a: f64, b: f64, k: u8) -> Result<f64> {
    if k > 2 {
        return Err(Error::Invalid {
            what: "moment order",
            detail: format!("k must be 0, 1 or 2, got {k}"),
        });
    }
    if !(a >= 0.0 && a < b && b.is_finite()) {
        return Err(Error::Invalid {
            what: "moment interval",
            detail: format!("need 0 <= a < b, got [{a}, {b}]"),
        });
    }
    if spec.eps == 0.0 && a == 0.0 && k < 2 {
        return Err(Error::NonIntegrableMoment { k, a, b });
    }

    let s = spec.order.value();
    let c = spec.constant;
    let mut total = 0.0;

    // Flat piece [0, eps]: constant height C_s / eps^(1+2s).
    if spec.eps > 0.0 && a < spec.eps {
        let hi = b.min(spec.eps);
        let height = c / spec.eps.powf(1.0 + 2.0 * s);
        let p = f64::from(k) + 1.0;
        total += height * (hi.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / p;
    }

    // Power-law piece (eps, delta]: C_s z^(k - 1 - 2s).
    let lo = a.max(spec.eps);
    let hi = match spec.horizon {
        Horizon::Finite(d) => b.min(d),
        Horizon::Infinite => b,
    };
    if lo < hi {
        total += c * power_integral(lo, hi, f64::from(k) - 1.0 - 2.0 * s);
    }

    Ok(total)
}

/// `int_a^b z^p dz` with the three branches around the logarithmic case
/// `p = -1` (hit exactly at k = 1, s = 1/2). Near the log case the closed
/// form `(b^q - a^q)/q` with `q = p + 1` cancels catastrophically, so a short
/// series in `q` is used instead.
fn power_integral(a: f64, b: f64, p: f64) -> f64 {
    let q = p + 1.0;
    if a == 0.0 {
        // Only reachable for q > 0 (enforced by the moment preconditions).
        return b.powf(q) / q;
    }
    if q == 0.0 {
        return (b / a).ln();
    }
    if q.abs() < 1e-8 {
        // (b^q - a^q)/q = (B - A) + q (B^2 - A^2)/2 + q^2 (B^3 - A^3)/6 + ...
        let (la, lb) = (a.ln(), b.ln());
        return (lb - la) + q * (lb * lb - la * la) / 2.0 + q * q * (lb.powi(3) - la.powi(3)) / 6.0;
    }
    (b.powf(q) - a.powf(q)) / q
}

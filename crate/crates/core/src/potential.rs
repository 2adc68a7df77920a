//! Double-well potentials with a convex/smooth split, and the
//! proliferation function.

use crate::error::{Error, Result};

/// Double-well potential `F = B̂ + π̂` with `B̂` convex and `B̂(0) = 0`.
///
/// * quartic: `F(r) = (r² - 1)² / 4`, `B̂(r) = r⁴/4`, `π̂(r) = 1/4 - r²/2`
/// * logarithmic: `F(r) = (1-r)ln(1-r) + (1+r)ln(1+r) - λr²` on `(-1, 1)`,
///   `B̂` the entropy terms, `π̂(r) = -λr²`
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Quartic,
    Logarithmic { lambda: f64 },
}

/// Which half of the split to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPart {
    Convex,
    Smooth,
}

impl Potential {
    pub const DEFAULT_LAMBDA: f64 = 2.0;

    /// Open domain `(r-, r+)` of the convex part.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Potential::Quartic => (f64::NEG_INFINITY, f64::INFINITY),
            Potential::Logarithmic { .. } => (-1.0, 1.0),
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, Potential::Logarithmic { .. })
    }

    pub fn check_domain(&self, r: f64) -> Result<()> {
        let (lower, upper) = self.domain();
        if !(r > lower && r < upper) {
            return Err(Error::Domain {
                value: r,
                lower,
                upper,
            });
        }
        Ok(())
    }

    /// `F⁽ᵒʳᵈᵉʳ⁾(r)` for `order` in `0..=3`.
    pub fn eval(&self, r: f64, order: u8) -> Result<f64> {
        self.check_domain(r)?;
        let value = match *self {
            Potential::Quartic => match order {
                0 => {
                    let s = r * r - 1.0;
                    0.25 * s * s
                }
                1 => r * r * r - r,
                2 => 3.0 * r * r - 1.0,
                3 => 6.0 * r,
                _ => return Err(order_error()),
            },
            Potential::Logarithmic { lambda } => match order {
                0 => entropy(r) - lambda * r * r,
                1 => log_ratio(r) - 2.0 * lambda * r,
                2 => 2.0 / (1.0 - r * r) - 2.0 * lambda,
                3 => {
                    let d = 1.0 - r * r;
                    4.0 * r / (d * d)
                }
                _ => return Err(order_error()),
            },
        };
        Ok(value)
    }

    /// Derivatives of `B̂` (convex) or `π̂` (smooth), `order` in `0..=2`.
    pub fn split_eval(&self, r: f64, part: SplitPart, order: u8) -> Result<f64> {
        self.check_domain(r)?;
        let value = match (*self, part) {
            (Potential::Quartic, SplitPart::Convex) => match order {
                0 => 0.25 * r * r * r * r,
                1 => r * r * r,
                2 => 3.0 * r * r,
                _ => return Err(order_error()),
            },
            (Potential::Quartic, SplitPart::Smooth) => match order {
                0 => 0.25 - 0.5 * r * r,
                1 => -r,
                2 => -1.0,
                _ => return Err(order_error()),
            },
            (Potential::Logarithmic { .. }, SplitPart::Convex) => match order {
                0 => entropy(r),
                1 => log_ratio(r),
                2 => 2.0 / (1.0 - r * r),
                _ => return Err(order_error()),
            },
            (Potential::Logarithmic { lambda }, SplitPart::Smooth) => match order {
                0 => -lambda * r * r,
                1 => -2.0 * lambda * r,
                2 => -2.0 * lambda,
                _ => return Err(order_error()),
            },
        };
        Ok(value)
    }
}

fn order_error() -> Error {
    Error::InvalidParameter {
        name: "order",
        reason: "derivative order out of range",
    }
}

fn entropy(r: f64) -> f64 {
    (1.0 - r) * libm::log(1.0 - r) + (1.0 + r) * libm::log(1.0 + r)
}

fn log_ratio(r: f64) -> f64 {
    // ln((1+r)/(1-r)) without cancellation near 0
    libm::log1p(r) - libm::log1p(-r)
}

/// Proliferation function `P`: non-negative, bounded, smooth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Proliferation {
    Constant { p0: f64 },
    /// `P(r) = p0 (1 + tanh(r / width)) / 2`
    SmoothRamp { p0: f64, width: f64 },
}

impl Proliferation {
    pub const DEFAULT_WIDTH: f64 = 0.5;

    pub fn validate(&self) -> Result<()> {
        let (p0, width) = match *self {
            Proliferation::Constant { p0 } => (p0, 1.0),
            Proliferation::SmoothRamp { p0, width } => (p0, width),
        };
        if !(p0.is_finite() && p0 >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "proliferation.p0",
                reason: "must be non-negative and finite",
            });
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter {
                name: "proliferation.width",
                reason: "must be positive",
            });
        }
        Ok(())
    }

    /// `P⁽ᵒʳᵈᵉʳ⁾(r)` for `order` in `0..=2`; higher orders return zero for
    /// the constant kind and an error otherwise.
    pub fn eval(&self, r: f64, order: u8) -> Result<f64> {
        match *self {
            Proliferation::Constant { p0 } => Ok(if order == 0 { p0 } else { 0.0 }),
            Proliferation::SmoothRamp { p0, width } => {
                let t = libm::tanh(r / width);
                let sech2 = 1.0 - t * t;
                match order {
                    0 => Ok(0.5 * p0 * (1.0 + t)),
                    1 => Ok(0.5 * p0 * sech2 / width),
                    2 => Ok(-p0 * sech2 * t / (width * width)),
                    _ => Err(order_error()),
                }
            }
        }
    }
}

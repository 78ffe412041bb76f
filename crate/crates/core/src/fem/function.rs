use std::fmt;
use std::sync::Arc;

use super::mesh::Point;
use crate::error::{domain, Result};
use crate::special::pow_plus;

type SpaceFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
type SpaceTimeFn = Arc<dyn Fn(&Point, f64) -> f64 + Send + Sync>;

/// `x ↦ x₁^p · g(x)` with `g` smooth; the power may be singular at `x₁ = 0`.
#[derive(Clone)]
pub struct SpaceFunction {
    x_power: f64,
    smooth: SpaceFn,
}

impl SpaceFunction {
    pub fn new(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Self::with_x_power(0.0, f)
    }

    pub fn with_x_power(p: f64, g: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            x_power: p,
            smooth: Arc::new(g),
        }
    }

    /// `x₁^p`.
    pub fn power_of_x(p: f64) -> Self {
        Self::with_x_power(p, |_| 1.0)
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0)
    }

    pub fn x_power(&self) -> f64 {
        self.x_power
    }

    pub fn smooth_part(&self, x: &Point) -> f64 {
        (self.smooth)(x)
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let s = (self.smooth)(x);
        if self.x_power == 0.0 {
            s
        } else {
            pow_plus(x[0], self.x_power) * s
        }
    }
}

impl fmt::Debug for SpaceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceFunction")
            .field("x_power", &self.x_power)
            .finish_non_exhaustive()
    }
}

/// Power law `c · t^p` in time, `p > -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeFactor {
    coefficient: f64,
    power: f64,
}

impl TimeFactor {
    pub fn power(p: f64) -> Result<Self> {
        Self::scaled(1.0, p)
    }

    pub fn scaled(coefficient: f64, power: f64) -> Result<Self> {
        if !(power > -1.0) {
            return domain(format!("time exponent {power} is not integrable at 0"));
        }
        Ok(Self { coefficient, power })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            coefficient: c,
            power: 0.0,
        }
    }

    pub fn exponent(&self) -> f64 {
        self.power
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.power == 0.0 {
            self.coefficient
        } else {
            self.coefficient * pow_plus(t, self.power)
        }
    }

    /// `∫_a^b c t^p dt` in closed form.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let q = self.power + 1.0;
        self.coefficient * (pow_plus(b, q) - pow_plus(a, q)) / q
    }
}

/// Source term `f(x, t)`.
#[derive(Clone)]
pub enum SpaceTimeFunction {
    Separable {
        time: TimeFactor,
        space: SpaceFunction,
    },
    /// `t^tp · x₁^xp · g(x, t)` with `g` smooth.
    General {
        t_power: f64,
        x_power: f64,
        g: SpaceTimeFn,
    },
}

impl SpaceTimeFunction {
    pub fn separable(time: TimeFactor, space: SpaceFunction) -> Self {
        Self::Separable { time, space }
    }

    pub fn general(
        t_power: f64,
        x_power: f64,
        g: impl Fn(&Point, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(t_power > -1.0) {
            return domain(format!("time exponent {t_power} is not integrable at 0"));
        }
        Ok(Self::General {
            t_power,
            x_power,
            g: Arc::new(g),
        })
    }

    pub fn eval(&self, x: &Point, t: f64) -> f64 {
        match self {
            Self::Separable { time, space } => time.eval(t) * space.eval(x),
            Self::General {
                t_power,
                x_power,
                g,
            } => {
                let mut v = g(x, t);
                if *t_power != 0.0 {
                    v *= pow_plus(t, *t_power);
                }
                if *x_power != 0.0 {
                    v *= pow_plus(x[0], *x_power);
                }
                v
            }
        }
    }
}

impl fmt::Debug for SpaceTimeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Separable { time, space } => f
                .debug_struct("Separable")
                .field("time", time)
                .field("space", space)
                .finish(),
            Self::General {
                t_power, x_power, ..
            } => f
                .debug_struct("General")
                .field("t_power", t_power)
                .field("x_power", x_power)
                .finish_non_exhaustive(),
        }
    }
}

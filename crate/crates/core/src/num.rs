//! Log-domain scalars.
//!
//! Deep constructions produce radii like `e^{-10^12}` and rotation
//! strengths like `e^{10^11}`; both are carried as logarithms and only
//! collapsed to `f64` at the edges.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a >= b`; `-inf` when equal.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b);
    if b == f64::NEG_INFINITY {
        return a;
    }
    let d = b - a;
    if d >= 0.0 {
        return f64::NEG_INFINITY;
    }
    // ln(1 - e^d), two-branch form for accuracy
    let tail = if d > -std::f64::consts::LN_2 {
        (-d.exp_m1()).ln()
    } else {
        (-d.exp()).ln_1p()
    };
    a + tail
}

/// A strictly positive real stored as its natural logarithm.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct Positive(f64);

impl Positive {
    pub fn new(x: f64) -> Result<Self> {
        if x > 0.0 && x.is_finite() {
            Ok(Positive(x.ln()))
        } else {
            Err(Error::invalid(format!("expected a finite positive number, got {x}")))
        }
    }

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(ln.is_finite(), "non-finite log {ln}");
        Positive(ln)
    }

    pub const ONE: Positive = Positive(0.0);

    pub fn ln(self) -> f64 {
        self.0
    }

    /// `exp(ln)`; underflows to 0 and overflows to `inf`.
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_representable(self) -> bool {
        let v = self.value();
        v > 0.0 && v.is_finite()
    }

    pub fn mul(self, o: Positive) -> Positive {
        Positive(self.0 + o.0)
    }

    pub fn div(self, o: Positive) -> Positive {
        Positive(self.0 - o.0)
    }

    pub fn powf(self, e: f64) -> Positive {
        Positive(self.0 * e)
    }

    pub fn add(self, o: Positive) -> Positive {
        Positive(log_add_exp(self.0, o.0))
    }
}

impl fmt::Debug for Positive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.0)
    }
}

/// A signed real stored as sign and `ln|x|`.
#[derive(Clone, Copy, PartialEq)]
pub struct LogReal {
    sign: i8,
    ln_abs: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_f64(x: f64) -> Self {
        debug_assert!(x.is_finite());
        if x == 0.0 {
            Self::ZERO
        } else {
            LogReal {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    pub fn from_parts(negative: bool, ln_abs: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        debug_assert!(ln_abs.is_finite());
        LogReal {
            sign: if negative { -1 } else { 1 },
            ln_abs,
        }
    }

    pub fn positive(p: Positive) -> Self {
        LogReal {
            sign: 1,
            ln_abs: p.ln(),
        }
    }

    pub fn signum(self) -> i8 {
        self.sign
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// `ln|x|`, `-inf` for zero.
    pub fn ln_abs(self) -> f64 {
        self.ln_abs
    }

    pub fn abs(self) -> Option<Positive> {
        (self.sign != 0).then(|| Positive::from_ln(self.ln_abs))
    }

    /// Saturates to `±inf` when out of range.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    pub fn neg(self) -> Self {
        LogReal {
            sign: -self.sign,
            ln_abs: self.ln_abs,
        }
    }

    pub fn add(self, o: LogReal) -> LogReal {
        if self.sign == 0 {
            return o;
        }
        if o.sign == 0 {
            return self;
        }
        if self.sign == o.sign {
            return LogReal {
                sign: self.sign,
                ln_abs: log_add_exp(self.ln_abs, o.ln_abs),
            };
        }
        let (big, small) = if self.ln_abs >= o.ln_abs { (self, o) } else { (o, self) };
        let l = log_sub_exp(big.ln_abs, small.ln_abs);
        if l == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogReal {
                sign: big.sign,
                ln_abs: l,
            }
        }
    }

    pub fn sub(self, o: LogReal) -> LogReal {
        self.add(o.neg())
    }

    /// Multiply by a plain finite real.
    pub fn scale(self, c: f64) -> LogReal {
        if c == 0.0 || self.sign == 0 {
            return Self::ZERO;
        }
        LogReal {
            sign: if c > 0.0 { self.sign } else { -self.sign },
            ln_abs: self.ln_abs + c.abs().ln(),
        }
    }

    pub fn mul_pos(self, p: Positive) -> LogReal {
        if self.sign == 0 {
            return self;
        }
        LogReal {
            sign: self.sign,
            ln_abs: self.ln_abs + p.ln(),
        }
    }

    pub fn cmp_value(self, o: LogReal) -> Ordering {
        match self.sign.cmp(&o.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.ln_abs.total_cmp(&o.ln_abs),
                _ => o.ln_abs.total_cmp(&self.ln_abs),
            },
            ord => ord,
        }
    }
}

impl fmt::Debug for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "+exp({})", self.ln_abs),
            _ => write!(f, "-exp({})", self.ln_abs),
        }
    }
}

impl From<f64> for LogReal {
    fn from(x: f64) -> Self {
        LogReal::from_f64(x)
    }
}

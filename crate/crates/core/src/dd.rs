//! Double-double arithmetic (about 32 significant digits).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };

    pub const fn new(x: f64) -> DD {
        DD { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> DD {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    pub fn recip(self) -> DD {
        DD::ONE / self
    }

    pub fn sqr(self) -> DD {
        self * self
    }

    pub fn sqrt(self) -> DD {
        if self.hi <= 0.0 {
            return DD::new(self.hi.sqrt());
        }
        let x = self.hi.sqrt();
        let xd = DD::new(x);
        // one Newton step on the f64 root
        let r = self - xd * xd;
        xd + DD::new(r.hi / (2.0 * x))
    }

    pub fn powi(self, n: u32) -> DD {
        let mut base = self;
        let mut acc = DD::ONE;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn mul_f64(self, b: f64) -> DD {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        DD { hi, lo }
    }

    /// Decimal scientific notation with `digits` significant digits.
    pub fn to_sci_string(self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.hi == 0.0 {
            return format!("0.{}e0", "0".repeat(digits - 1));
        }
        if !self.hi.is_finite() {
            return format!("{}", self.hi);
        }
        let neg = self.hi < 0.0;
        let mut v = self.abs();
        let mut exp = v.hi.log10().floor() as i32;
        let ten = DD::new(10.0);
        if exp > 0 {
            v = v / ten.powi(exp as u32);
        } else if exp < 0 {
            v = v * ten.powi((-exp) as u32);
        }
        while v.hi >= 10.0 {
            v = v / ten;
            exp += 1;
        }
        while v.hi < 1.0 {
            v = v * ten;
            exp -= 1;
        }
        let mut ds: Vec<u8> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = v.hi.floor().clamp(0.0, 9.0);
            ds.push(d as u8);
            v = (v - DD::new(d)) * ten;
            if v.hi < 0.0 {
                v = DD::ZERO;
            }
        }
        // round half up on the guard digit
        let guard = ds.pop().unwrap_or(0);
        if guard >= 5 {
            let mut i = ds.len();
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.pop();
                    exp += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push((b'0' + ds[0]) as char);
        if ds.len() > 1 {
            out.push('.');
            for d in &ds[1..] {
                out.push((b'0' + d) as char);
            }
        }
        out.push('e');
        out.push_str(&exp.to_string());
        out
    }

    /// Parse a decimal string produced by `to_sci_string` (or any plain decimal).
    pub fn parse(s: &str) -> Option<DD> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (mant, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i32>().ok()?),
            None => (body, 0),
        };
        let mut v = DD::ZERO;
        let mut frac_digits = 0i32;
        let mut seen_dot = false;
        let mut any = false;
        for c in mant.chars() {
            match c {
                '.' if !seen_dot => seen_dot = true,
                '0'..='9' => {
                    any = true;
                    v = v.mul_f64(10.0) + DD::new((c as u8 - b'0') as f64);
                    if seen_dot {
                        frac_digits += 1;
                    }
                }
                _ => return None,
            }
        }
        if !any {
            return None;
        }
        let e = exp - frac_digits;
        let ten = DD::new(10.0);
        if e > 0 {
            v = v * ten.powi(e as u32);
        } else if e < 0 {
            v = v / ten.powi((-e) as u32);
        }
        Some(if neg { -v } else { v })
    }
}

impl From<f64> for DD {
    fn from(x: f64) -> DD {
        DD::new(x)
    }
}

impl Add for DD {
    type Output = DD;
    #[inline]
    fn add(self, b: DD) -> DD {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        DD { hi, lo }
    }
}

impl Sub for DD {
    type Output = DD;
    #[inline]
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Neg for DD {
    type Output = DD;
    #[inline]
    fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for DD {
    type Output = DD;
    #[inline]
    fn mul(self, b: DD) -> DD {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    #[inline]
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::new(q3)
    }
}

impl AddAssign for DD {
    fn add_assign(&mut self, b: DD) {
        *self = *self + b;
    }
}

impl SubAssign for DD {
    fn sub_assign(&mut self, b: DD) {
        *self = *self - b;
    }
}

impl MulAssign for DD {
    fn mul_assign(&mut self, b: DD) {
        *self = *self * b;
    }
}

impl PartialOrd for DD {
    fn partial_cmp(&self, other: &DD) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl fmt::Display for DD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(32))
    }
}

/// Cholesky factor of a symmetric positive-definite matrix; `None` on breakdown.
pub fn cholesky(a: &[Vec<DD>]) -> Option<Vec<Vec<DD>>> {
    let n = a.len();
    let mut l = vec![vec![DD::ZERO; n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d.hi > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l[j][j] = djj;
        for i in j + 1..n {
            let mut v = a[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k];
            }
            l[i][j] = v / djj;
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &[Vec<DD>]) -> Vec<Vec<DD>> {
    let n = l.len();
    let mut inv = vec![vec![DD::ZERO; n]; n];
    for i in 0..n {
        inv[i][i] = l[i][i].recip();
        for j in (0..i).rev() {
            let mut acc = DD::ZERO;
            for k in j..i {
                acc += l[i][k] * inv[k][j];
            }
            inv[i][j] = -acc / l[i][i];
        }
    }
    inv
}

//! Dense real polynomials in ascending-coefficient form, with the deterministic
//! scan-and-bisect root finder used for equilibrium enumeration.

use crate::error::{Error, Result};

/// Number of uniform sub-intervals used by the sign-change scan.
pub const SCAN_RESOLUTION: usize = 10_000;

/// `coeffs[k]` multiplies `x^k`. Trailing zeros are trimmed on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial::new(vec![0.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        let d: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Polynomial::new(d)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c: Vec<f64> = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(0.0)
                    + other.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        Polynomial::new(c)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect::<Vec<_>>())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut c = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial::new(c)
    }

    /// Returns `x -> self(offset + slope * x)`.
    pub fn compose_affine(&self, offset: f64, slope: f64) -> Polynomial {
        let inner = Polynomial::new(vec![offset, slope]);
        self.coeffs
            .iter()
            .rev()
            .fold(Polynomial::zero(), |acc, &c| {
                acc.mul(&inner).add(&Polynomial::new(vec![c]))
            })
    }

    /// Cauchy bound: every real root lies in `[-r, r]`.
    pub fn root_bound(&self) -> f64 {
        let lead = *self.coeffs.last().unwrap();
        if lead == 0.0 {
            return 0.0;
        }
        1.0 + self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max)
    }

    fn scale_at(&self, x: f64) -> f64 {
        let ax = x.abs().max(1.0);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * ax.powi(k as i32))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE)
    }

    /// Real roots in `[lo, hi]`, ascending.
    ///
    /// Simple roots come from a sign-change scan at `(hi-lo)/SCAN_RESOLUTION`
    /// followed by bisection. Even-multiplicity roots do not change sign, so
    /// the derivative is scanned the same way and its roots are kept where the
    /// polynomial itself vanishes to rounding.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!("empty search interval [{lo}, {hi}]")));
        }
        if self.is_zero() {
            return Err(Error::invalid("polynomial is identically zero"));
        }
        if self.degree() == 0 {
            return Ok(Vec::new());
        }
        let mut roots = sign_change_roots(|x| self.eval(x), lo, hi);

        let dp = self.derivative();
        if !dp.is_zero() {
            for c in sign_change_roots(|x| dp.eval(x), lo, hi) {
                if self.eval(c).abs() <= 1e-12 * self.scale_at(c) {
                    roots.push(c);
                }
            }
        }

        roots.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::with_capacity(roots.len());
        for r in roots {
            match out.last_mut() {
                Some(prev) if (r - *prev).abs() < 1e-9 => {
                    if self.eval(r).abs() < self.eval(*prev).abs() {
                        *prev = r;
                    }
                }
                _ => out.push(r),
            }
        }
        Ok(out)
    }
}

fn sign_change_roots(p: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let h = (hi - lo) / SCAN_RESOLUTION as f64;
    let node = |k: usize| {
        if k == SCAN_RESOLUTION {
            hi
        } else {
            lo + k as f64 * h
        }
    };
    let mut roots = Vec::new();
    let mut a = lo;
    let mut pa = p(a);
    for k in 1..=SCAN_RESOLUTION {
        let b = node(k);
        let pb = p(b);
        if pa == 0.0 {
            roots.push(a);
        } else if pb != 0.0 && (pa < 0.0) != (pb < 0.0) {
            roots.push(bisect(&p, a, b, pa));
        }
        a = b;
        pa = pb;
    }
    if pa == 0.0 {
        roots.push(a);
    }
    roots
}

fn bisect(p: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut pa: f64) -> f64 {
    // bisect down to adjacent floats
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let pm = p(m);
        if pm == 0.0 {
            return m;
        }
        if (pm < 0.0) == (pa < 0.0) {
            a = m;
            pa = pm;
        } else {
            b = m;
        }
    }
    if p(a).abs() <= p(b).abs() {
        a
    } else {
        b
    }
}

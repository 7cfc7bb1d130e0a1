use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default number of coefficients beyond the leading one.
pub const DEFAULT_ORDER: usize = 8;

/// Truncated Laurent expansion `Σ_{j=0..=K} c_j h^{lead+j}` with
/// `h = λ - center`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentJet {
    pub center: Complex64,
    pub lead: i32,
    pub coeffs: Vec<Complex64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl LaurentJet {
    pub fn constant(center: Complex64, value: Complex64, order: usize) -> Self {
        let mut coeffs = vec![zero(); order + 1];
        coeffs[0] = value;
        Self {
            center,
            lead: 0,
            coeffs,
        }
        .normalized()
    }

    /// `a + b h`.
    pub fn linear(center: Complex64, a: Complex64, b: Complex64, order: usize) -> Self {
        let mut coeffs = vec![zero(); order + 1];
        coeffs[0] = a;
        if order >= 1 {
            coeffs[1] = b;
        }
        Self {
            center,
            lead: 0,
            coeffs,
        }
        .normalized()
    }

    /// Number of coefficients after the leading one.
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == zero())
    }

    /// Drops exactly vanishing leading coefficients, raising `lead` and
    /// keeping the number of coefficients (trailing ones become zero-padded
    /// only when the input was exact, as for polynomial factors).
    fn normalized(mut self) -> Self {
        let shift = self.coeffs.iter().take_while(|c| **c == zero()).count();
        if shift > 0 && shift < self.coeffs.len() {
            self.coeffs.drain(..shift);
            self.lead += shift as i32;
        }
        self
    }

    /// Like [`Self::normalized`] but pads with zeros so the order is kept;
    /// only valid for jets whose tail beyond the truncation is exactly zero.
    fn normalized_exact(self) -> Self {
        let len = self.coeffs.len();
        let mut out = self.normalized();
        out.coeffs.resize(len, zero());
        out
    }

    /// Coefficient of `h^n`; `None` beyond the truncation order.
    pub fn coefficient(&self, n: i32) -> Option<Complex64> {
        if n < self.lead {
            return Some(zero());
        }
        self.coeffs.get((n - self.lead) as usize).copied()
    }

    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        let h = lambda - self.center;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * h.powi(self.lead + j as i32))
            .sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        let mut coeffs = vec![zero(); k + 1];
        for (i, slot) in coeffs.iter_mut().enumerate() {
            for j in 0..=i {
                *slot += self.coeffs[j] * other.coeffs[i - j];
            }
        }
        Self {
            center: self.center,
            lead: self.lead + other.lead,
            coeffs,
        }
        .normalized()
    }

    /// Reciprocal; fails when the leading coefficient vanishes.
    pub fn recip(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0 == zero() {
            return Err(Error::JetDivisionByZero);
        }
        let k = self.order();
        let mut inv = vec![zero(); k + 1];
        inv[0] = c0.inv();
        for n in 1..=k {
            let s: Complex64 = (1..=n).map(|j| self.coeffs[j] * inv[n - j]).sum();
            inv[n] = -s / c0;
        }
        Ok(Self {
            center: self.center,
            lead: -self.lead,
            coeffs: inv,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn add(&self, other: &Self) -> Self {
        let lead = self.lead.min(other.lead);
        let top = (self.lead + self.order() as i32).min(other.lead + other.order() as i32);
        let len = (top - lead + 1).max(1) as usize;
        let coeffs = (0..len as i32)
            .map(|j| {
                let n = lead + j;
                self.coefficient(n).unwrap_or_default() + other.coefficient(n).unwrap_or_default()
            })
            .collect();
        Self {
            center: self.center,
            lead,
            coeffs,
        }
        .normalized()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            center: self.center,
            lead: self.lead,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn powi(&self, n: i32) -> Result<Self> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut out = Self::constant(self.center, Complex64::new(1.0, 0.0), self.order());
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    /// `d/dλ`.
    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * (self.lead + j as i32) as f64)
            .collect();
        Self {
            center: self.center,
            lead: self.lead - 1,
            coeffs,
        }
        .normalized()
    }

    /// Multiplies by `h^n`.
    pub fn shift(&self, n: i32) -> Self {
        Self {
            center: self.center,
            lead: self.lead + n,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Jet of the Möbius factor `(1 + cλ)/(1 - cλ)`. Values of `1 ± cλ0`
    /// below `snap` in modulus are treated as exact zeros.
    pub fn mobius_factor(center: Complex64, c: Complex64, order: usize, snap: f64) -> Self {
        let snapped = |z: Complex64| if z.norm() < snap { zero() } else { z };
        let num = Self::linear(center, snapped(1.0 + c * center), c, order + 1).normalized_exact();
        let den = Self::linear(center, snapped(1.0 - c * center), -c, order + 1).normalized_exact();
        let mut out = num
            .div(&den)
            .expect("linear factor has a nonzero coefficient");
        out.coeffs.truncate(order + 1);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn geometric_series() {
        // 1/(1-h) = Σ h^k
        let one_minus_h = LaurentJet::linear(c(0., 0.), c(1., 0.), c(-1., 0.), 6);
        let inv = one_minus_h.recip().unwrap();
        assert_eq!(inv.lead, 0);
        assert!(inv.coeffs.iter().all(|&x| (x - c(1., 0.)).norm() < 1e-15));
    }

    #[test]
    fn simple_pole() {
        // 1/h has lead -1
        let h = LaurentJet::linear(c(2., 0.), c(0., 0.), c(1., 0.), 4);
        assert_eq!(h.lead, 1);
        let inv = h.recip().unwrap();
        assert_eq!(inv.lead, -1);
        assert!((inv.eval(c(2.5, 0.)) - c(2., 0.)).norm() < 1e-15);
    }

    #[test]
    fn division_by_zero_jet() {
        let z = LaurentJet::constant(c(0., 0.), c(0., 0.), 3);
        assert!(matches!(z.recip(), Err(Error::JetDivisionByZero)));
    }

    #[test]
    fn derivative_and_add() {
        // f = 1/h + 2 + 3h, f' = -1/h^2 + 3
        let f = LaurentJet {
            center: c(0., 0.),
            lead: -1,
            coeffs: vec![c(1., 0.), c(2., 0.), c(3., 0.)],
        };
        let d = f.derivative();
        assert_eq!(d.lead, -2);
        assert_eq!(d.coeffs, vec![c(-1., 0.), c(0., 0.), c(3., 0.)]);
        let s = f.add(&LaurentJet::constant(c(0., 0.), c(-2., 0.), 4));
        assert_eq!(s.coefficient(0), Some(c(0., 0.)));
        assert_eq!(s.coefficient(-1), Some(c(1., 0.)));
    }

    #[test]
    fn mobius_pole_and_zero() {
        let cf = c(0.5, 0.);
        let pole = LaurentJet::mobius_factor(c(2., 0.), cf, 5, 1e-9);
        assert_eq!(pole.lead, -1);
        let zero = LaurentJet::mobius_factor(c(-2., 0.), cf, 5, 1e-9);
        assert_eq!(zero.lead, 1);
        let regular = LaurentJet::mobius_factor(c(1., 0.), cf, 5, 1e-9);
        assert_eq!(regular.lead, 0);
        assert!((regular.coeffs[0] - c(3., 0.)).norm() < 1e-15);
        for (jet, l0) in [(pole, 2.0), (zero, -2.0), (regular, 1.0)] {
            let lam = c(l0 + 1e-2, 1e-2);
            let exact = (1.0 + cf * lam) / (1.0 - cf * lam);
            assert!((jet.eval(lam) - exact).norm() < 1e-10 * exact.norm().max(1.0));
        }
    }

    #[test]
    fn powers() {
        let f = LaurentJet::linear(c(0., 0.), c(1., 0.), c(1., 0.), 4);
        let sq = f.powi(2).unwrap();
        assert_eq!(sq.coeffs[..3], [c(1., 0.), c(2., 0.), c(1., 0.)]);
        let back = sq.mul(&f.powi(-2).unwrap());
        assert!((back.coeffs[0] - c(1., 0.)).norm() < 1e-15);
        assert!(back.coeffs[1..].iter().all(|x| x.norm() < 1e-14));
    }
}

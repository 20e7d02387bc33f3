//! Sums of monomials `coeff · sn^p cn^q dn^r` with real exponents, closed
//! under multiplication and differentiation in `y`.

use crate::elliptic::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub coeff: C64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Expr {
    terms: Vec<Monomial>,
}

const EXP_TOL: f64 = 1e-12;

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() < EXP_TOL
}

/// Principal power. Integer exponents avoid the logarithm.
#[inline]
pub(crate) fn cpow(z: C64, e: f64) -> C64 {
    if e == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let r = e.round();
    if same(e, r) && r.abs() < 64.0 {
        z.powi(r as i32)
    } else {
        (z.ln() * e).exp()
    }
}

impl Expr {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(c, 0.0, 0.0, 0.0)
    }

    pub fn real(c: f64) -> Self {
        Self::constant(C64::new(c, 0.0))
    }

    pub fn monomial(coeff: C64, p: f64, q: f64, r: f64) -> Self {
        let mut e = Self::zero();
        e.push(Monomial { coeff, p, q, r });
        e
    }

    pub fn sn() -> Self {
        Self::monomial(C64::new(1.0, 0.0), 1.0, 0.0, 0.0)
    }
    pub fn cn() -> Self {
        Self::monomial(C64::new(1.0, 0.0), 0.0, 1.0, 0.0)
    }
    pub fn dn() -> Self {
        Self::monomial(C64::new(1.0, 0.0), 0.0, 0.0, 1.0)
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn push(&mut self, t: Monomial) {
        if t.coeff == C64::new(0.0, 0.0) {
            return;
        }
        if let Some(x) = self
            .terms
            .iter_mut()
            .find(|x| same(x.p, t.p) && same(x.q, t.q) && same(x.r, t.r))
        {
            x.coeff += t.coeff;
        } else {
            self.terms.push(t);
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(*t);
        }
        out.terms.retain(|t| t.coeff.norm() > 0.0);
        out
    }

    pub fn scale(&self, c: C64) -> Expr {
        let mut out = Expr::zero();
        for t in &self.terms {
            out.push(Monomial { coeff: t.coeff * c, ..*t });
        }
        out
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        let mut out = Expr::zero();
        for a in &self.terms {
            for b in &other.terms {
                out.push(Monomial {
                    coeff: a.coeff * b.coeff,
                    p: a.p + b.p,
                    q: a.q + b.q,
                    r: a.r + b.r,
                });
            }
        }
        out
    }

    /// d/dy, using sn' = cn dn, cn' = -sn dn, dn' = -m sn cn.
    pub fn derivative(&self, m: f64) -> Expr {
        let mut out = Expr::zero();
        for t in &self.terms {
            if t.p != 0.0 {
                out.push(Monomial { coeff: t.coeff * t.p, p: t.p - 1.0, q: t.q + 1.0, r: t.r + 1.0 });
            }
            if t.q != 0.0 {
                out.push(Monomial { coeff: -t.coeff * t.q, p: t.p + 1.0, q: t.q - 1.0, r: t.r + 1.0 });
            }
            if t.r != 0.0 {
                out.push(Monomial { coeff: -t.coeff * (m * t.r), p: t.p + 1.0, q: t.q + 1.0, r: t.r - 1.0 });
            }
        }
        out.terms.retain(|t| t.coeff.norm() > 0.0);
        out
    }

    pub fn eval(&self, s: C64, c: C64, d: C64) -> C64 {
        self.terms
            .iter()
            .map(|t| t.coeff * cpow(s, t.p) * cpow(c, t.q) * cpow(d, t.r))
            .sum()
    }
}

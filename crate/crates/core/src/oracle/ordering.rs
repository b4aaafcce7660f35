//! Numerical check of the single-mode ordering identity
//!
//! ```text
//! N{exp(-ξ b†b)} = A{exp(-λ b†b)} / (1 - ξ),    λ = ξ / (1 - ξ)
//! ```
//!
//! on truncated matrices. The normal-ordered side is
//! `Σ_k (-ξ)^k / k! b†^k b^k` and the anti-normal side
//! `Σ_k (-λ)^k / k! b^k b†^k`. The anti-normal series alternates with terms
//! that grow to about `10^6` before decaying when `ξ` approaches `1/2`, so
//! both sides are accumulated in double-double arithmetic.

use crate::{Error, Result};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(Dd { hi: -o.hi, lo: -o.lo })
    }

    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::new(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::new(q2)));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::new(q3))
    }

    fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = Dd::new(self.hi.sqrt());
        // one Newton step: x + (a - x²) / (2x)
        x.add(self.sub(x.mul(x)).div(x.add(x)))
    }

    fn powi(self, n: usize) -> Dd {
        (0..n).fold(Dd::new(1.0), |acc, _| acc.mul(self))
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Outcome of [`ordering_identity_check`] on the `(n_max + 1)²` leading block.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderingReport {
    pub n_max: usize,
    pub xi: f64,
    pub lambda: f64,
    /// Series terms summed on each side.
    pub terms: usize,
    /// Dimension of the truncated matrices.
    pub dimension: usize,
    /// `max |N{..}_{mn} - δ_mn (1-ξ)^n|`
    pub normal_deviation: f64,
    /// `max |A{..}_{mn} - δ_mn (1+λ)^{-n-1}|`
    pub anti_normal_deviation: f64,
    /// `max |N{..} - A{..}/(1-ξ)|`
    pub relation_deviation: f64,
}

impl OrderingReport {
    pub fn max_deviation(&self) -> f64 {
        self.normal_deviation.max(self.anti_normal_deviation).max(self.relation_deviation)
    }
}

/// Smallest series length after which every anti-normal term on the leading
/// block is below `1e-25` (bounded by `λ^k C(n_max + k, k)`).
fn required_terms(n_max: usize, lambda: f64) -> usize {
    let mut term = 1.0f64;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= lambda * (n_max + k) as f64 / k as f64;
        if k > n_max && term < 1e-25 {
            return k;
        }
    }
}

type DdMatrix = Vec<Vec<Dd>>;

/// Verifies the identity for `0 < ξ < 1/2`; the anti-normal series diverges
/// for `λ >= 1`.
pub fn ordering_identity_check(n_max: usize, xi: f64) -> Result<OrderingReport> {
    if !(xi > 0.0 && xi < 0.5) {
        return Err(Error::Domain(format!(
            "ξ = {xi} is outside (0, 1/2), where the anti-normal series converges"
        )));
    }
    let xi_dd = Dd::new(xi);
    let one_minus_xi = Dd::new(1.0).sub(xi_dd);
    let lambda = xi_dd.div(one_minus_xi);
    let terms = required_terms(n_max, lambda.to_f64());
    let dim = n_max + terms + 2;

    let sqrt_n: Vec<Dd> = (0..=dim).map(|n| Dd::new(n as f64).sqrt()).collect();
    let identity: DdMatrix =
        (0..dim).map(|i| (0..dim).map(|j| if i == j { Dd::new(1.0) } else { Dd::ZERO }).collect()).collect();

    // normal: X_k = (-ξ/k) b† X_{k-1} b, entries (i, j) <- sqrt(i) sqrt(j) X_{i-1, j-1}
    let mut normal = identity.clone();
    let mut x = identity.clone();
    for k in 1..=terms {
        let c = Dd::new(0.0).sub(xi_dd).div(Dd::new(k as f64));
        let mut next = vec![vec![Dd::ZERO; dim]; dim];
        for i in 1..dim {
            for j in 1..dim {
                let v = x[i - 1][j - 1];
                if v.hi != 0.0 {
                    next[i][j] = c.mul(sqrt_n[i]).mul(sqrt_n[j]).mul(v);
                }
            }
        }
        x = next;
        add_into(&mut normal, &x);
    }

    // anti-normal: Y_k = (-λ/k) b Y_{k-1} b†, entries (i, j) <- sqrt(i+1) sqrt(j+1) Y_{i+1, j+1}
    let mut anti = identity.clone();
    let mut y = identity;
    for k in 1..=terms {
        let c = Dd::new(0.0).sub(lambda).div(Dd::new(k as f64));
        let mut next = vec![vec![Dd::ZERO; dim]; dim];
        for i in 0..dim - 1 {
            for j in 0..dim - 1 {
                let v = y[i + 1][j + 1];
                if v.hi != 0.0 {
                    next[i][j] = c.mul(sqrt_n[i + 1]).mul(sqrt_n[j + 1]).mul(v);
                }
            }
        }
        y = next;
        add_into(&mut anti, &y);
    }

    let one_plus_lambda = Dd::new(1.0).add(lambda);
    let (mut dn, mut da, mut dr) = (0.0f64, 0.0f64, 0.0f64);
    for m in 0..=n_max {
        for n in 0..=n_max {
            let (expect_n, expect_a) = if m == n {
                (one_minus_xi.powi(n), Dd::new(1.0).div(one_plus_lambda.powi(n + 1)))
            } else {
                (Dd::ZERO, Dd::ZERO)
            };
            dn = dn.max(normal[m][n].sub(expect_n).to_f64().abs());
            da = da.max(anti[m][n].sub(expect_a).to_f64().abs());
            dr = dr.max(normal[m][n].sub(anti[m][n].div(one_minus_xi)).to_f64().abs());
        }
    }
    Ok(OrderingReport {
        n_max,
        xi,
        lambda: lambda.to_f64(),
        terms,
        dimension: dim,
        normal_deviation: dn,
        anti_normal_deviation: da,
        relation_deviation: dr,
    })
}

fn add_into(acc: &mut DdMatrix, x: &DdMatrix) {
    for (ra, rx) in acc.iter_mut().zip(x) {
        for (a, &v) in ra.iter_mut().zip(rx) {
            if v.hi != 0.0 {
                *a = a.add(v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_double_arithmetic() {
        let third = Dd::new(1.0).div(Dd::new(3.0));
        let back = third.mul(Dd::new(3.0)).sub(Dd::new(1.0));
        assert!(back.to_f64().abs() < 1e-31);
        let r2 = Dd::new(2.0).sqrt();
        assert!(r2.mul(r2).sub(Dd::new(2.0)).to_f64().abs() < 1e-31);
        // 1 + 2^-80 survives in the low word
        let tiny = Dd::new(1.0).add(Dd::new(2f64.powi(-80)));
        assert_eq!(tiny.sub(Dd::new(1.0)).to_f64(), 2f64.powi(-80));
    }

    #[test]
    fn half_xi_example_values() {
        // ξ = 0.5 lies outside the convergent range, but the quoted
        // values are the closed forms: (1-ξ)² = 0.25 and 2 · (1+1)^-3 = 0.25.
        assert_eq!(0.5f64.powi(2), 0.25);
        assert_eq!(2.0 * 2.0f64.powi(-3), 0.25);
        assert!(matches!(ordering_identity_check(2, 0.5), Err(Error::Domain(_))));
        assert!(matches!(ordering_identity_check(2, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn small_identity_holds() {
        let r = ordering_identity_check(3, 0.2).unwrap();
        assert!(r.max_deviation() < 1e-13, "{r:?}");
        assert!((r.lambda - 0.25).abs() < 1e-16);
    }
}

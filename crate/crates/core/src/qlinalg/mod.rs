//! Exact linear algebra over ℚ and ℤ.
//!
//! Everything here is dense and arbitrary precision. Matrices in this crate
//! stay small (a dozen rows, a couple dozen columns), so intermediate
//! coefficient growth is accepted rather than managed.

mod hnf;
mod matrix;

pub use hnf::{hnf, hnf_with_transform, lattice_contains, left_kernel, saturate};
pub use matrix::{q_rank, IntMatrix, QMatrix};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational scalar, always stored in lowest terms with a positive
/// denominator.
pub type Rat = BigRational;

/// Rational from a machine integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `p/q`. Panics if `q == 0`.
pub fn ratio(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"` or `"p"`; whitespace around the parts is ignored.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q == BigInt::from(0) {
                return None;
            }
            Some(Rat::new(p, q))
        }
        None => s.parse::<BigInt>().ok().map(Rat::from_integer),
    }
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn rat_is_canonical() {
        let r = ratio(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        let z = ratio(0, -7);
        assert!(z.is_zero());
        assert_eq!(z.denom(), &BigInt::from(1));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat(" -3/6 "), Some(ratio(-1, 2)));
        assert_eq!(parse_rat("5"), Some(rat(5)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("x"), None);
        assert_eq!(fmt_rat(&ratio(4, 2)), "2");
        assert_eq!(fmt_rat(&ratio(-1, 3)), "-1/3");
    }
}

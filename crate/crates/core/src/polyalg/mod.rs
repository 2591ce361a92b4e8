//! Univariate polynomial algebra over exact rationals, with binary64 only at
//! the complex root-finding boundary.

mod common;
mod poly;
mod roots;
mod sturm;

pub use common::{common_roots, resultant, CommonRoots, SharedRoot};
pub use poly::{
    int, parse_rational, rat, rational_from_f64, rational_to_f64, Rational, RationalPolynomial,
};
pub use roots::{
    complex_roots, complex_roots_f64, complex_roots_with, eval_complex, ComplexRoot,
    ComplexRootSet, RootFinderOptions,
};
pub use sturm::{
    count_real_roots, is_nonnegative_on, is_positive_on, max_on_interval, min_on_interval,
    real_roots_in_interval, IsolatingInterval, SignCertificate, SturmSequence,
};

/// Chebyshev polynomial of the first kind `T_m`.
pub fn chebyshev_t(m: usize) -> RationalPolynomial {
    let mut prev = RationalPolynomial::one();
    if m == 0 {
        return prev;
    }
    let mut cur = RationalPolynomial::from_i64(&[0, 1]);
    let two_x = RationalPolynomial::from_i64(&[0, 2]);
    for _ in 1..m {
        let next = &(&two_x * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

//! High-precision re-evaluation of the closed-form distance formulas.
//!
//! The oracle reimplements the class-1 distance expressions in exact
//! rational arithmetic (`BigRational`); the single irrational quantity, the
//! eigenvalue discriminant, is computed by Newton's method at ~500
//! fractional bits. Everything here is independent of the f64 code path it
//! checks, down to using the other eigenvector branch.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use blockspec::sbm::{analytic_distances, BlockModelParams};

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

fn rat_int(x: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Rounds to `bits` fractional bits to keep Newton iterates small.
fn round_bits(x: &BigRational, bits: u64) -> BigRational {
    let scale = BigRational::from_integer(BigInt::one() << bits);
    BigRational::new((x * &scale).round().to_integer(), scale.to_integer())
}

/// Square root by Newton iteration; exact enough that the final error is
/// far below the 1e-10 comparison tolerance.
fn sqrt_rat(r: &BigRational) -> BigRational {
    assert!(!r.is_negative());
    if r.is_zero() {
        return BigRational::zero();
    }
    let mut x = rat(r.to_f64().unwrap().sqrt().max(f64::MIN_POSITIVE));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for _ in 0..12 {
        x = round_bits(&(&half * (&x + r / &x)), 512);
    }
    x
}

struct OracleDistances {
    d11_un: BigRational,
    d11_no: BigRational,
    d12: BigRational,
}

/// Evaluates the class-1 formulas on exact dyadic inputs. Uses the
/// `(lambda - b, c)` eigenvector branch unconditionally (valid whenever the
/// cross rate is positive), unlike the f64 path which picks a branch for
/// stability.
fn oracle(n: usize, pi_nominal: f64, alpha: f64, beta: f64, gamma: f64) -> OracleDistances {
    assert!(gamma > 0.0);
    let n1 = (n as f64 * pi_nominal).round() as usize;
    let nr = rat_int(n);
    let pi = rat_int(n1) / &nr;
    let one = BigRational::one();
    let om_pi = &one - &pi;
    let (al, be, ga) = (rat(alpha), rat(beta), rat(gamma));

    // Reduced 2x2 matrix entries; c^2 is rational.
    let a = &nr * &pi * &al;
    let b = &nr * &om_pi * &be;
    let c_sq = &nr * &nr * &pi * &om_pi * &ga * &ga;
    let tr = &a + &b;
    let disc = sqrt_rat(&((&a - &b) * (&a - &b) + rat(4.0) * &c_sq));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let lp = &half * (&tr + &disc);
    let lm = &half * (&tr - &disc);
    // Order by |lambda| descending, signed descending on ties.
    let (l1, l2) = if lp.abs() > lm.abs() || (lp.abs() == lm.abs() && lp >= lm) {
        (lp, lm)
    } else {
        (lm, lp)
    };

    // Squared blockwise eigenvector entries from the (lambda - b, c) branch:
    // x_i^2 = (l_i - b)^2 / (((l_i - b)^2 + c^2) n pi), y analogous.
    let comp = |l: &BigRational| -> (BigRational, BigRational) {
        let u = l - &b;
        let denom = &u * &u + &c_sq;
        let x_sq = (&u * &u) / (&denom * &nr * &pi);
        let y_sq = &c_sq / (&denom * &nr * &om_pi);
        (x_sq, y_sq)
    };
    let (x1_sq, y1_sq) = comp(&l1);
    let (x2_sq, y2_sq) = comp(&l2);

    let d11_un = (&x1_sq / (&l1 * &l1) + &x2_sq / (&l2 * &l2))
        * &nr
        * &pi
        * &al
        * (&one - &al)
        + (&y1_sq / (&l1 * &l1) + &y2_sq / (&l2 * &l2)) * &nr * &om_pi * &ga * (&one - &ga);

    // Normalized side: fully rational.
    let mu1 = &pi * &al + &om_pi * &ga - &al / &nr;
    let mu2 = &pi * &ga + &om_pi * &be - &be / &nr;
    let mu = &pi * &mu1 + &om_pi * &mu2;
    let nu2 = &one - &ga * &mu / (&mu1 * &mu2);
    let nu2_sq = &nu2 * &nu2;
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    let n3 = &nr * &nr * &nr;
    let d11_no = (&nr * &pi * &al * (&one - &al)) / (&n3 * &pi * &mu1 * &mu1)
        * (&quarter + &om_pi * &ga / (&mu1 * &nu2_sq))
        + (&nr * &om_pi * &ga * (&one - &ga)) / (&n3 * &mu1 * &mu1)
            * (&quarter / &pi + &pi * &al / (&om_pi * &mu2 * &nu2_sq));

    let d12 = &one / (&nr * &pi * &om_pi);
    OracleDistances {
        d11_un,
        d11_no,
        d12,
    }
}

fn rel_err(f: f64, r: &BigRational) -> f64 {
    let rv = r.to_f64().unwrap();
    ((f - rv) / rv).abs()
}

#[test]
fn f64_formulas_match_high_precision_oracle() {
    let cases = [
        (1000usize, 0.5, 0.5, 0.5, 0.25),
        (1000, 0.5, 0.4, 0.9, 0.28),
        (937, 0.37, 0.43, 0.81, 0.2),
        (1000, 0.5, 1.0, 1.0, 0.24),
        (250, 0.62, 0.05, 0.07, 0.011),
        (100_000, 0.5, 0.001, 0.001, 0.0005),
    ];
    for &(n, pi, alpha, beta, gamma) in &cases {
        let params = BlockModelParams::new(n, pi, alpha, beta, gamma).unwrap();
        let got = analytic_distances(&params).unwrap();
        let want = oracle(n, pi, alpha, beta, gamma);
        assert!(
            rel_err(got.d11_sq_unnorm, &want.d11_un) < 1e-10,
            "d11 unnorm at {n},{pi},{alpha},{beta},{gamma}: {} vs {}",
            got.d11_sq_unnorm,
            want.d11_un.to_f64().unwrap()
        );
        assert!(
            rel_err(got.d11_sq_norm, &want.d11_no) < 1e-10,
            "d11 norm at {n},{pi},{alpha},{beta},{gamma}"
        );
        assert!(rel_err(got.d12_sq_unnorm, &want.d12) < 1e-12);
        assert!(rel_err(got.d12_sq_norm, &want.d12) < 1e-12);
        let ratio = &want.d11_no / &want.d11_un;
        assert!(
            rel_err(got.ratio_d11, &ratio) < 1e-10,
            "ratio at {n},{pi},{alpha},{beta},{gamma}"
        );
    }
}

#[test]
fn oracle_sqrt_is_accurate() {
    for v in [2.0f64, 0.5, 1e-6, 123456.789] {
        let s = sqrt_rat(&rat(v));
        let back = (&s * &s).to_f64().unwrap();
        assert!(((back - v) / v).abs() < 1e-30_f64.max(f64::EPSILON));
    }
}

//! High-precision kernels: arithmetic-geometric means and algebraic
//! recognition of floating-point values.
//!
//! The AGM iteration
//!
//! ```text
//! a_{n+1} = (a_n + b_n)/2,   b_{n+1} = sqrt(a_n b_n)
//! ```
//!
//! converges quadratically; for complex arguments the square root is
//! normalized by the *right choice*: among the two roots r of a_n b_n, take
//! the one with |a_{n+1} - r| <= |a_{n+1} + r|, breaking ties towards
//! Im(r/a_{n+1}) > 0.  With this choice M(a,b) is the optimal limit and the
//! period formulas of the lattice module hold verbatim for complex branch
//! data.  M is homogeneous, M(ka, kb) = k M(a,b), which several tests lean on.
//!
//! Recognition inverts the complex embedding of K = Q(sqrt(D)): a float z is
//! matched to x = a + b*omega by solving the 2x2 real system for (a,b) and
//! running continued-fraction rational recognition on each coordinate, then
//! re-embedding and accepting only when |z - x| clears the caller's residual
//! bound.  Everything downstream (the equivariant BSD verdict in particular)
//! treats a recognition miss as a first-class outcome, never as a panic.

use rug::{Complex, Float, Integer};

use crate::arith;
use crate::qfield::{QElem, QuadField};
use crate::{Error, Result};

/// AGM of two positive reals at the precision of the inputs.
pub fn agm_real(a: &Float, b: &Float) -> Float {
    assert!(
        a.is_finite() && b.is_finite() && a.is_sign_positive() && b.is_sign_positive(),
        "agm_real needs positive finite inputs"
    );
    let prec = a.prec().max(b.prec());
    let mut x = Float::with_val(prec, a);
    let mut y = Float::with_val(prec, b);
    // quadratic convergence: digits double every round
    for _ in 0..(64 + prec) {
        let diff = Float::with_val(prec, &x - &y).abs();
        let scale = Float::with_val(prec, &x).abs();
        if diff <= scale >> (prec - 4) {
            break;
        }
        let am = Float::with_val(prec, &x + &y) / 2u32;
        let gm = Float::with_val(prec, &x * &y).sqrt();
        x = am;
        y = gm;
    }
    x
}

/// Complex AGM with the right-choice square root.
///
/// Returns zero when either argument is zero (the degenerate limit).
pub fn agm_complex(a: &Complex, b: &Complex) -> Complex {
    let prec = a.prec().0.max(b.prec().0);
    let mut x = Complex::with_val(prec, a);
    let mut y = Complex::with_val(prec, b);
    if x.real().is_zero() && x.imag().is_zero() {
        return x;
    }
    if y.real().is_zero() && y.imag().is_zero() {
        return y;
    }
    for _ in 0..(64 + prec) {
        let diff = Float::with_val(prec, Complex::with_val(prec, &x - &y).abs_ref());
        let scale = Float::with_val(prec, x.abs_ref());
        if diff <= scale >> (prec - 4) {
            break;
        }
        let am = Complex::with_val(prec, &x + &y) / 2u32;
        let mut gm = Complex::with_val(prec, &x * &y).sqrt();
        // right choice: |am - gm| <= |am + gm|, ties to Im(gm/am) > 0
        let d_minus = Float::with_val(prec, Complex::with_val(prec, &am - &gm).abs_ref());
        let d_plus = Float::with_val(prec, Complex::with_val(prec, &am + &gm).abs_ref());
        if d_minus > d_plus {
            gm = -gm;
        } else if d_minus == d_plus {
            let ratio = Complex::with_val(prec, &gm / &am);
            if ratio.imag().is_sign_negative() {
                gm = -gm;
            }
        }
        x = am;
        y = gm;
    }
    x
}

/// The default recognition residual 2^(-prec/3) used by the BSD driver.
pub fn recognition_tol(prec: u32) -> Float {
    Float::with_val(prec, 1) >> (prec / 3)
}

/// Normalized Eisenstein series E4(tau), E6(tau) by q-expansion,
///
/// ```text
/// E4 = 1 + 240 sum n^3 q^n/(1-q^n),   E6 = 1 - 504 sum n^5 q^n/(1-q^n),
/// ```
///
/// truncated once |q|^n falls below 2^(-prec-16).  Callers keep Im(tau)
/// comfortably positive (lattice bases are reduced first), so the series
/// converge in a handful of terms.
pub fn eisenstein_e4_e6(tau: &Complex) -> (Complex, Complex) {
    let prec = tau.prec().0;
    assert!(
        tau.imag().is_sign_positive() && !tau.imag().is_zero(),
        "tau must lie in the upper half-plane"
    );
    let two_pi = Float::with_val(prec, rug::float::Constant::Pi) * 2u32;
    let two_pi_i = Complex::with_val(prec, (Float::new(prec), two_pi));
    let q = Complex::with_val(prec, &two_pi_i * tau).exp();
    let q_abs = Float::with_val(prec, q.abs_ref());
    assert!(
        q_abs < Float::with_val(prec, 0.5),
        "q-expansion needs Im(tau) > log(2)/(2 pi)"
    );
    // |q|^n < 2^(-prec-16)  <=>  n > (prec+16) ln 2 / (-ln|q|)
    let ln2 = Float::with_val(prec, rug::float::Constant::Log2);
    let n_max = (Float::with_val(prec, &ln2 * (prec + 16)) / -q_abs.ln())
        .ceil()
        .to_f64() as u64
        + 1;
    let mut s3 = Complex::new(prec);
    let mut s5 = Complex::new(prec);
    let mut qn = Complex::with_val(prec, 1);
    for n in 1..=n_max {
        qn *= &q;
        let frac = Complex::with_val(prec, &qn / Complex::with_val(prec, 1 - &qn));
        let n2 = n * n;
        s3 += Complex::with_val(prec, &frac * (n * n2));
        s5 += Complex::with_val(prec, &frac * (n2 * n2 * n));
    }
    let e4 = Complex::with_val(prec, 1 + Complex::with_val(prec, &s3 * 240u32));
    let e6 = Complex::with_val(prec, 1 - Complex::with_val(prec, &s5 * 504u32));
    (e4, e6)
}

/// The modular j-function, j = 1728 E4^3 / (E4^3 - E6^2).
pub fn j_from_tau(tau: &Complex) -> Complex {
    let prec = tau.prec().0;
    let (e4, e6) = eisenstein_e4_e6(tau);
    let e4c = Complex::with_val(prec, e4.square_ref()) * &e4;
    let e6s = Complex::with_val(prec, e6.square_ref());
    let denom = Complex::with_val(prec, &e4c - &e6s);
    Complex::with_val(prec, 1728 * e4c / denom)
}

/// All complex roots of a polynomial (low-first coefficients, nonzero lead)
/// by the Durand--Kerner simultaneous iteration.
///
/// The polynomial is monicized first; starting points sit on a Fujiwara-bound
/// circle with an irrational twist so no root direction is special.  The
/// iteration stops when every correction falls below 2^(-2 prec/3) relative
/// to the circle scale; convergence is not certified here — callers verify
/// candidate roots exactly (recognition + exact re-evaluation), so a
/// straggling root costs completeness, never soundness.
pub fn complex_roots(coeffs: &[Complex]) -> Vec<Complex> {
    let d = coeffs.len() - 1;
    let prec = coeffs.iter().map(|c| c.prec().0).max().unwrap();
    assert!(d >= 1, "constant polynomial");
    assert!(d <= 256, "degree beyond the desk bound");
    let lead = &coeffs[d];
    assert!(!(lead.real().is_zero() && lead.imag().is_zero()));
    let monic: Vec<Complex> = coeffs
        .iter()
        .map(|c| Complex::with_val(prec, c / lead))
        .collect();
    // Fujiwara: every root has |z| <= 2 max_k |c_{d-k}|^(1/k)
    let mut radius = Float::with_val(prec, 1e-6);
    for k in 1..=d {
        let m = Float::with_val(prec, monic[d - k].abs_ref());
        if !m.is_zero() {
            let root = m.root(k as u32);
            if root > radius {
                radius = root;
            }
        }
    }
    radius *= 2u32;
    let tau = Float::with_val(prec, rug::float::Constant::Pi) * 2u32;
    let mut z: Vec<Complex> = (0..d)
        .map(|k| {
            let angle = Float::with_val(prec, &tau * (k as u32)) / (d as u32)
                + Float::with_val(prec, 0.377);
            let (s, c) = angle.sin_cos(Float::new(prec));
            Complex::with_val(prec, (c * &radius, s * &radius))
        })
        .collect();
    let eval = |x: &Complex| -> Complex {
        let mut acc = Complex::new(prec);
        for c in monic.iter().rev() {
            acc = Complex::with_val(prec, acc * x + c);
        }
        acc
    };
    let stop = Float::with_val(prec, &radius + 1u32) >> (2 * prec / 3);
    for _ in 0..600 {
        let mut worst = Float::new(prec);
        for k in 0..d {
            let num = eval(&z[k]);
            let mut den = Complex::with_val(prec, 1);
            for j in 0..d {
                if j != k {
                    den *= Complex::with_val(prec, &z[k] - &z[j]);
                }
            }
            let delta = Complex::with_val(prec, num / den);
            let step = Float::with_val(prec, delta.abs_ref());
            if step > worst {
                worst = step;
            }
            z[k] -= delta;
        }
        if worst < stop {
            break;
        }
    }
    z
}

/// Recognize a complex float as an element a + b*omega of K.
///
/// Both rational coordinates must have denominator at most `max_den`, and the
/// re-embedded candidate must land within `tol` of `z`.
pub fn recognize_k_element(
    k: &QuadField,
    z: &Complex,
    max_den: &Integer,
    tol: &Float,
) -> Result<QElem> {
    let prec = z.prec().0;
    let om = k.omega_embedded(prec);
    // z = a + b*omega with a, b real: solve the triangular system
    let b_f = Float::with_val(prec, z.imag() / om.imag());
    let a_f = Float::with_val(prec, z.real() - Float::with_val(prec, &b_f * om.real()));
    let miss = || Error::Recognition(format!("{:.20} in Q(sqrt({}))", z, k.disc()));
    let a = arith::recognize_rational(&a_f, max_den, tol).ok_or_else(miss)?;
    let b = arith::recognize_rational(&b_f, max_den, tol).ok_or_else(miss)?;
    let cand = k.elem(a, b);
    let residual = Float::with_val(prec, Complex::with_val(prec, cand.embed(prec) - z).abs_ref());
    if residual < *tol {
        Ok(cand)
    } else {
        Err(miss())
    }
}

/// Recognize a real float as a rational, reusing the continued-fraction
/// machinery and returning the library error type.
pub fn recognize_rational(x: &Float, max_den: &Integer, tol: &Float) -> Result<rug::Rational> {
    arith::recognize_rational(x, max_den, tol)
        .ok_or_else(|| Error::Recognition(format!("{:.20} in Q", x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::CompleteRound;
    use rug::Rational;

    const PREC: u32 = 160;

    #[test]
    fn lemniscatic_agm() {
        // Gauss: pi / M(1, sqrt 2) is the lemniscate constant
        let one = Float::with_val(PREC, 1);
        let rt2 = Float::with_val(PREC, 2).sqrt();
        let m = agm_real(&one, &rt2);
        let pi = Float::with_val(PREC, rug::float::Constant::Pi);
        let value = pi / &m;
        let reference = Float::parse("2.62205755429211981046483958989111941368275495")
            .unwrap()
            .complete(PREC);
        let err = Float::with_val(PREC, &value - &reference).abs();
        assert!(err < Float::with_val(PREC, 1e-40), "err = {:?}", err);
    }

    #[test]
    fn agm_symmetry_and_mean_inequality() {
        let a = Float::with_val(PREC, 355) / 113u32;
        let b = Float::with_val(PREC, 7) / 3u32;
        let m1 = agm_real(&a, &b);
        let m2 = agm_real(&b, &a);
        assert_eq!(m1, m2);
        // geometric mean <= AGM <= arithmetic mean
        let gm = Float::with_val(PREC, &a * &b).sqrt();
        let am = Float::with_val(PREC, &a + &b) / 2u32;
        assert!(gm <= m1 && m1 <= am);
        // one AGM step is absorbed
        let m3 = agm_real(&am, &Float::with_val(PREC, gm));
        let err = Float::with_val(PREC, &m1 - &m3).abs();
        assert!(err < Float::with_val(PREC, 1) >> (PREC - 16));
    }

    #[test]
    fn complex_agm_matches_real_on_positive_axis() {
        let a = Complex::with_val(PREC, (3, 0));
        let b = Complex::with_val(PREC, (5, 0));
        let m = agm_complex(&a, &b);
        let mr = agm_real(&Float::with_val(PREC, 3), &Float::with_val(PREC, 5));
        let err = Float::with_val(PREC, m.real() - &mr).abs();
        assert!(err < Float::with_val(PREC, 1) >> (PREC - 16));
        assert!(m.imag().clone().abs() < Float::with_val(PREC, 1) >> (PREC - 16));
    }

    #[test]
    fn complex_agm_is_homogeneous() {
        let a = Complex::with_val(PREC, (2, 1));
        let b = Complex::with_val(PREC, (1, -3));
        let lambda = Complex::with_val(PREC, (-4, 7));
        let lhs = agm_complex(
            &Complex::with_val(PREC, &a * &lambda),
            &Complex::with_val(PREC, &b * &lambda),
        );
        let rhs = Complex::with_val(PREC, agm_complex(&a, &b) * &lambda);
        let err = Float::with_val(PREC, Complex::with_val(PREC, &lhs - &rhs).abs_ref());
        let scale = Float::with_val(PREC, rhs.abs_ref());
        assert!(err < scale >> (PREC - 24), "err = {:?}", err);
    }

    #[test]
    fn conjugate_pair_agm_is_real() {
        // M(z, conj z) stays real after one step: ((z + conj z)/2, |z|)
        let z = Complex::with_val(PREC, (5, 2));
        let zb = Complex::with_val(PREC, (5, -2));
        let m = agm_complex(&z, &zb);
        assert!(m.imag().clone().abs() < Float::with_val(PREC, 1) >> (PREC - 16));
        let mr = agm_real(
            &Float::with_val(PREC, 5),
            &Float::with_val(PREC, Float::with_val(PREC, 29).sqrt()),
        );
        let err = Float::with_val(PREC, m.real() - &mr).abs();
        assert!(err < Float::with_val(PREC, 1) >> (PREC - 16));
    }

    #[test]
    fn eisenstein_at_the_square_lattice() {
        // E6(i) = 0 by the S-symmetry E6(-1/tau) = tau^6 E6(tau)
        let tau = Complex::with_val(PREC, (0, 1));
        let (e4, e6) = eisenstein_e4_e6(&tau);
        assert!(Float::with_val(PREC, e6.abs_ref()) < Float::with_val(PREC, 1e-40));
        // and j(i) = 1728 follows; E4(i) = 3 (Gamma(1/4)^8 / (2 pi)^6) != 0
        let j = j_from_tau(&tau);
        let err = Float::with_val(PREC, Complex::with_val(PREC, &j - 1728u32).abs_ref());
        assert!(err < Float::with_val(PREC, 1e-38), "j(i) = {:.6}", j);
        assert!(Float::with_val(PREC, e4.abs_ref()) > Float::with_val(PREC, 1));
        // E4 vanishes at the hexagonal point, so j(zeta_3) = 0
        let half = Float::with_val(PREC, 0.5);
        let rt3 = Float::with_val(PREC, 3).sqrt() / 2u32;
        let zeta = Complex::with_val(PREC, (-half, rt3));
        let j0 = j_from_tau(&zeta);
        assert!(Float::with_val(PREC, j0.abs_ref()) < Float::with_val(PREC, 1e-38));
    }

    #[test]
    fn durand_kerner_finds_integer_roots() {
        // (x-1)(x-2)(x-3)(x+5) = x^4 - x^3 - 19x^2 + 49x - 30
        let c = |n: i64| Complex::with_val(PREC, n);
        let poly = [c(-30), c(49), c(-19), c(-1), c(1)];
        let mut roots: Vec<f64> = complex_roots(&poly)
            .into_iter()
            .map(|z| {
                assert!(z.imag().clone().abs() < 1e-30);
                z.real().to_f64()
            })
            .collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [-5.0, 1.0, 2.0, 3.0];
        for (r, e) in roots.iter().zip(expect) {
            assert!((r - e).abs() < 1e-12, "{} vs {}", r, e);
        }
        // complex pair: x^2 + 1
        let quad = [c(1), c(0), c(1)];
        let rts = complex_roots(&quad);
        for z in rts {
            let sq = Complex::with_val(PREC, z.square_ref());
            let err = Float::with_val(PREC, Complex::with_val(PREC, sq + 1u32).abs_ref());
            assert!(err < Float::with_val(PREC, 1e-30));
        }
    }

    #[test]
    fn recognizes_gaussian_element() {
        let k = QuadField::new(-4).unwrap();
        let x = k.elem(Rational::from((3, 7)), Rational::from((-2, 5)));
        let z = x.embed(PREC);
        let tol = recognition_tol(PREC);
        let bound = Integer::from(10_000);
        let back = recognize_k_element(&k, &z, &bound, &tol).unwrap();
        assert_eq!(back, x);
        // survives a perturbation well below the tolerance
        let dz = Complex::with_val(PREC, (1e-40, -1e-41));
        let z2 = Complex::with_val(PREC, &z + &dz);
        assert_eq!(recognize_k_element(&k, &z2, &bound, &tol).unwrap(), x);
    }

    #[test]
    fn recognizes_in_odd_discriminant_field() {
        // omega = (-7 + sqrt(-7))/2 has irrational real part, so both
        // coordinates genuinely mix
        let k = QuadField::new(-7).unwrap();
        let x = k.elem(Rational::from((11, 3)), Rational::from((5, 6)));
        let z = x.embed(PREC);
        let back = recognize_k_element(&k, &z, &Integer::from(100), &recognition_tol(PREC)).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn rejects_transcendental_input() {
        let k = QuadField::new(-4).unwrap();
        let z = Complex::with_val(PREC, (Float::with_val(PREC, rug::float::Constant::Pi), 0));
        let r = recognize_k_element(&k, &z, &Integer::from(10_000), &recognition_tol(PREC));
        assert!(matches!(r, Err(Error::Recognition(_))));
        // and a denominator fence: 1/10007 is recognizable only with room
        let q = Rational::from((1, 10007));
        let zq = Complex::with_val(PREC, Float::with_val(PREC, &q));
        assert!(recognize_k_element(&k, &zq, &Integer::from(10_000), &recognition_tol(PREC)).is_err());
        assert!(recognize_k_element(&k, &zq, &Integer::from(20_000), &recognition_tol(PREC)).is_ok());
    }
}

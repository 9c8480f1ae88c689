//! Standard normal quantile, survival, distribution, and density functions.
//!
//! The quantile uses Wichura's PPND16 rational approximations; the tails of
//! the distribution function go through Cody's rational erfc. Both are
//! accurate to well below the 1e-9 absolute error this crate relies on.

// coefficient tables are kept exactly as published
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::num::{real, Real};

const PPND_A: [f64; 8] = [
    3.3871328727963666080e0,
    1.3314166789178437745e2,
    1.9715909503065514427e3,
    1.3731693765509461125e4,
    4.5921953931549871457e4,
    6.7265770927008700853e4,
    3.3430575583588128105e4,
    2.5090809287301226727e3,
];
const PPND_B: [f64; 7] = [
    4.2313330701600911252e1,
    6.8718700749205790830e2,
    5.3941960214247511077e3,
    2.1213794301586595867e4,
    3.9307895800092710610e4,
    2.8729085735721942674e4,
    5.2264952788528545610e3,
];
const PPND_C: [f64; 8] = [
    1.42343711074968357734e0,
    4.63033784615654529590e0,
    5.76949722146069140550e0,
    3.64784832476320460504e0,
    1.27045825245236838258e0,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
];
const PPND_D: [f64; 7] = [
    2.05319162663775882187e0,
    1.67638483018380384940e0,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
];
const PPND_E: [f64; 8] = [
    6.65790464350110377720e0,
    5.46378491116411436990e0,
    1.78482653991729133580e0,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
];
const PPND_F: [f64; 7] = [
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
];

#[inline]
fn ratio<T: Real>(num: &[f64; 8], den: &[f64; 7], r: T) -> T {
    let mut xnum = real::<T>(num[7]);
    for &c in num[..7].iter().rev() {
        xnum = xnum * r + real(c);
    }
    let mut xden = real::<T>(den[6]);
    for &c in den[..6].iter().rev() {
        xden = xden * r + real(c);
    }
    xnum / (xden * r + T::one())
}

/// Inverse of the standard normal distribution function.
///
/// Errors unless `p` lies strictly inside (0, 1).
pub fn std_normal_quantile<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::InvalidProbability(
            p.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let half = real::<T>(0.5);
    let q = p - half;
    if q.abs() <= real(0.425) {
        let r = real::<T>(0.180625) - q * q;
        return Ok(q * ratio(&PPND_A, &PPND_B, r));
    }
    let r = if q < T::zero() { p } else { T::one() - p };
    let r = (-r.ln()).sqrt();
    let x = if r <= real(5.0) {
        ratio(&PPND_C, &PPND_D, r - real(1.6))
    } else {
        ratio(&PPND_E, &PPND_F, r - real(5.0))
    };
    Ok(if q < T::zero() { -x } else { x })
}

const ERF_A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const ERF_B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];
const ERF_C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const ERF_D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];
const ERF_P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const ERF_Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];
const ONE_OVER_SQRT_PI: f64 = 5.6418958354775628695e-1;
const ERFC_XBIG: f64 = 26.543;

/// `exp(-y^2)` split as Cody does to limit argument-reduction error.
#[inline]
fn exp_neg_sq<T: Real>(y: T) -> T {
    let sixteen = real::<T>(16.0);
    let ysq = (y * sixteen).trunc() / sixteen;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// Complementary error function.
pub fn erfc<T: Real>(x: T) -> T {
    let y = x.abs();
    let result = if y <= real(0.46875) {
        let ysq = if y > real(1e-300) { y * y } else { T::zero() };
        let mut xnum = real::<T>(ERF_A[4]) * ysq;
        let mut xden = ysq;
        for i in 0..3 {
            xnum = (xnum + real(ERF_A[i])) * ysq;
            xden = (xden + real(ERF_B[i])) * ysq;
        }
        let erf = x * (xnum + real(ERF_A[3])) / (xden + real(ERF_B[3]));
        return T::one() - erf;
    } else if y <= real(4.0) {
        let mut xnum = real::<T>(ERF_C[8]) * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + real(ERF_C[i])) * y;
            xden = (xden + real(ERF_D[i])) * y;
        }
        let r = (xnum + real(ERF_C[7])) / (xden + real(ERF_D[7]));
        exp_neg_sq(y) * r
    } else if y < real(ERFC_XBIG) {
        let ysq = (y * y).recip();
        let mut xnum = real::<T>(ERF_P[5]) * ysq;
        let mut xden = ysq;
        for i in 0..4 {
            xnum = (xnum + real(ERF_P[i])) * ysq;
            xden = (xden + real(ERF_Q[i])) * ysq;
        }
        let mut r = ysq * (xnum + real(ERF_P[4])) / (xden + real(ERF_Q[4]));
        r = (real::<T>(ONE_OVER_SQRT_PI) - r) / y;
        exp_neg_sq(y) * r
    } else {
        T::zero()
    };
    if x < T::zero() {
        real::<T>(2.0) - result
    } else {
        result
    }
}

/// Upper tail probability P(Z > z) for a standard normal Z.
pub fn std_normal_sf<T: Real>(z: T) -> T {
    let half = real::<T>(0.5);
    half * erfc(z / real(std::f64::consts::SQRT_2))
}

/// Distribution function P(Z <= z).
pub fn std_normal_cdf<T: Real>(z: T) -> T {
    let half = real::<T>(0.5);
    half * erfc(-z / real(std::f64::consts::SQRT_2))
}

/// Standard normal density.
pub fn std_normal_pdf<T: Real>(z: T) -> T {
    let c = real::<T>(0.39894228040143267794);
    c * (-z * z / real(2.0)).exp()
}

//! Thin wrappers over `libm` plus an adaptive Simpson quadrature.
//!
//! Routing every transcendental through `libm` keeps the crate `no_std`
//! and makes results bit-identical across platforms and toolchains.

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn log10(x: f64) -> f64 {
    libm::log10(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Adaptive Simpson quadrature of `f` over `[lo, hi]` to absolute
/// tolerance `tol`.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
    let whole = simpson(lo, hi, flo, fmid, fhi);
    simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol, 48)
}

#[inline]
fn simpson(lo: f64, hi: f64, flo: f64, fmid: f64, fhi: f64) -> f64 {
    (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let lmid = 0.5 * (lo + mid);
    let rmid = 0.5 * (mid + hi);
    let (flmid, frmid) = (f(lmid), f(rmid));
    let left = simpson(lo, mid, flo, flmid, fmid);
    let right = simpson(mid, hi, fmid, frmid, fhi);
    let delta = left + right - whole;
    if depth == 0 || abs(delta) <= 15.0 * tol {
        // Richardson correction: Simpson's rule error shrinks 16x per halving.
        left + right + delta / 15.0
    } else {
        let half_tol = 0.5 * tol;
        simpson_step(f, lo, mid, flo, flmid, fmid, left, half_tol, depth - 1)
            + simpson_step(f, mid, hi, fmid, frmid, fhi, right, half_tol, depth - 1)
    }
}

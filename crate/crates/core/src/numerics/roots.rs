use crate::error::{Error, Result};

/// Outcome of a bisection search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    pub iterations: usize,
    /// Width of the final bracket.
    pub width: f64,
}

/// Bisection on `[a, b]`; `f(a)` and `f(b)` must have opposite signs.
///
/// Terminates when the bracket is narrower than `xtol` or stops shrinking in
/// floating point.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<Bisection> {
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    let mut flo = f(lo);
    let fhi = f(hi);
    if !(flo.is_finite() && fhi.is_finite()) {
        return Err(Error::NoRoot(format!("non-finite end values f({lo})={flo}, f({hi})={fhi}")));
    }
    if flo == 0.0 {
        return Ok(Bisection { root: lo, iterations: 0, width: 0.0 });
    }
    if fhi == 0.0 {
        return Ok(Bisection { root: hi, iterations: 0, width: 0.0 });
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot(format!(
            "no sign change on [{lo}, {hi}]: f = {flo:e}, {fhi:e}"
        )));
    }
    let mut iterations = 0;
    while hi - lo > xtol && iterations < 2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        iterations += 1;
        if fm == 0.0 {
            return Ok(Bisection { root: mid, iterations, width: 0.0 });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(Bisection { root: 0.5 * (lo + hi), iterations, width: hi - lo })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r.root - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_same_sign() {
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12), Err(Error::NoRoot(_))));
    }

    #[test]
    fn reversed_bracket() {
        let r = bisect(|x| x - 0.25, 1.0, 0.0, 1e-14).unwrap();
        assert!((r.root - 0.25).abs() < 1e-14);
    }
}

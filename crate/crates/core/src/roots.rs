//! Bracketing scalar root finding.

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Returns `None` when `f(a)` and `f(b)` have the same sign. The bracket is
/// shrunk until its width falls below `xtol` or `f` hits zero exactly.
pub fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() < xtol {
            return Some(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let (lo, hi) = if lo < b { (lo, b) } else { (b, lo) };
        let reject = !(s > lo && s < hi)
            || (bisected && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!bisected && (s - b).abs() >= (c - d).abs() / 2.0)
            || (bisected && (b - c).abs() < xtol)
            || (!bisected && (c - d).abs() < xtol);
        if reject {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Some(b)
}

/// Scans `[a, b]` on `samples` uniform intervals and refines every sign change.
///
/// Sign changes across non-finite samples, or ones that refine onto a pole,
/// are skipped.
pub fn all_roots<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize, xtol: f64) -> Vec<f64> {
    let n = samples.max(2);
    let h = (b - a) / n as f64;
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = if i == n { b } else { a + h * i as f64 };
        let f1 = f(x1);
        if f0.is_finite() && f1.is_finite() && f0.signum() != f1.signum() && f0 != 0.0 {
            if let Some(r) = brent(&f, x0, x1, xtol) {
                // a sign flip through a pole converges onto the pole itself
                if f(r).abs() <= f0.abs().min(f1.abs()) {
                    roots.push(r);
                }
            }
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn scan_skips_poles() {
        // tan has poles at ±π/2 and roots at 0, ±π
        let roots = all_roots(f64::tan, -3.5, 3.5, 701, 1e-13);
        assert_eq!(roots.len(), 3, "{roots:?}");
    }
}

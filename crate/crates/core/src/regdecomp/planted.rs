use crate::error::{precondition, Error, Result};

/// Typical intra- and inter-community distances `(d1, d2)` in a two-block
/// planted partition graph, the roots in `d` of
/// `λ₁^{d+1}/(λ₁−1) ± λ₂^{d+1}/(λ₂−1) − 2 = n` with `λ₁ = (a+b)/2` and
/// `λ₂ = (a−b)/2`. The `+` branch gives `d1`.
pub fn expected_planted_distances(n: usize, a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a > b && b > 0.0) {
        return precondition(format!("need a > b > 0, got a = {a}, b = {b}"));
    }
    let (l1, l2) = ((a + b) / 2.0, (a - b) / 2.0);
    if l1 <= 1.0 {
        return precondition(format!("(a + b)/2 = {l1} must exceed 1"));
    }
    if (l2 - 1.0).abs() < 1e-12 {
        return precondition("(a − b)/2 = 1 makes the distance equation singular");
    }
    let n = n as f64;
    let upper = 10.0 * n.ln();
    let solve = |sign: f64| -> Result<f64> {
        let f = |d: f64| l1.powf(d + 1.0) / (l1 - 1.0) + sign * l2.powf(d + 1.0) / (l2 - 1.0) - 2.0 - n;
        let steps = 4000;
        let h = upper / steps as f64;
        let mut lo = 0.0;
        let mut f_lo = f(lo);
        for s in 1..=steps {
            let hi = s as f64 * h;
            let f_hi = f(hi);
            if f_lo == 0.0 {
                return Ok(lo);
            }
            if f_lo.signum() != f_hi.signum() {
                let (mut a, mut b, mut fa) = (lo, hi, f_lo);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    let fm = f(mid);
                    if fm == 0.0 || b - a < 1e-14 {
                        return Ok(mid);
                    }
                    if fm.signum() == fa.signum() {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                return Ok(0.5 * (a + b));
            }
            lo = hi;
            f_lo = f_hi;
        }
        Err(Error::Numeric(format!("no root in [0, {upper:.3}]")))
    };
    Ok((solve(1.0)?, solve(-1.0)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_scale_instance() {
        let (d1, d2) = expected_planted_distances(2000, 20.0, 2.0).unwrap();
        let l1: f64 = 11.0;
        let leading = ((l1 - 1.0) / l1 * 2000.0).ln() / l1.ln();
        // the λ₂ term pulls d1 below and d2 above the single-branch estimate
        assert!(d1 < leading && leading < d2, "{d1} {leading} {d2}");
        assert!((d1 - 2.94).abs() < 0.01, "{d1}");
    }

    #[test]
    fn residuals_vanish() {
        let (n, a, b) = (10_000usize, 20.0f64, 2.0f64);
        let (d1, d2) = expected_planted_distances(n, a, b).unwrap();
        let (l1, l2) = ((a + b) / 2.0, (a - b) / 2.0);
        let f = |d: f64, s: f64| l1.powf(d + 1.0) / (l1 - 1.0) + s * l2.powf(d + 1.0) / (l2 - 1.0) - 2.0 - n as f64;
        assert!(f(d1, 1.0).abs() < 1e-6 * n as f64);
        assert!(f(d2, -1.0).abs() < 1e-6 * n as f64);
    }

    #[test]
    fn ill_posed_inputs() {
        assert!(expected_planted_distances(2000, 5.0, 5.0).is_err());
        assert!(expected_planted_distances(2000, 3.0, 1.0).is_err());
        assert!(expected_planted_distances(2000, 1.0, 0.5).is_err());
    }
}

//! Root finding and curve comparison helpers.

use crate::error::{Error, Result};

pub const ROOT_REL_TOL: f64 = 1e-10;
pub const ROOT_MAX_ITER: usize = 200;

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// If `f(lo)` and `f(hi)` share a sign, `hi` is pushed outward (doubling
/// its distance from `lo`) until the sign changes or `limit` is reached.
pub fn bisect<F>(mut f: F, lo: f64, mut hi: f64, limit: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let mut f_hi = f(hi)?;
    let mut expansions = 0;
    while f_lo.signum() == f_hi.signum() {
        if f_hi == 0.0 {
            return Ok(hi);
        }
        let next = lo + 2.0 * (hi - lo);
        if (limit - lo).abs() <= (hi - lo).abs() || expansions >= ROOT_MAX_ITER {
            return Err(Error::Root(format!(
                "no sign change between {lo:e} and {hi:e} (expansion limit {limit:e})"
            )));
        }
        hi = if (next - lo).abs() > (limit - lo).abs() {
            limit
        } else {
            next
        };
        f_hi = f(hi)?;
        expansions += 1;
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = f_lo;
    for _ in 0..ROOT_MAX_ITER {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= ROOT_REL_TOL * mid.abs().max(f64::MIN_POSITIVE) {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Err(Error::Root(format!(
        "bisection did not converge within {ROOT_MAX_ITER} iterations"
    )))
}

/// Zero-normalized (Pearson) cross-correlation of two equally sampled curves.
pub fn normalized_cross_correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "curves must have equal length");
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return if saa == sbb { 1.0 } else { 0.0 };
    }
    sab / (saa * sbb).sqrt()
}

/// Linear interpolation of `ys` sampled at strictly increasing `xs`.
/// Returns 0 outside the sampled range.
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let hi = xs.partition_point(|&v| v < x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[hi - 1], xs[hi]);
    let t = (x - x0) / (x1 - x0);
    ys[hi - 1] + t * (ys[hi] - ys[hi - 1])
}

/// Positions of interior local maxima above `min_height·max(ys)`, refined by
/// a parabola through the three samples around each peak.
pub fn peak_positions(xs: &[f64], ys: &[f64], min_height: f64) -> Vec<f64> {
    let top = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut peaks = Vec::new();
    for i in 1..ys.len().saturating_sub(1) {
        let (l, c, r) = (ys[i - 1], ys[i], ys[i + 1]);
        if c > l && c >= r && c >= min_height * top {
            let denom = l - 2.0 * c + r;
            let shift = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
            let dx = xs[i + 1] - xs[i];
            peaks.push(xs[i] + shift * dx);
        }
    }
    peaks
}

/// Mean spacing between successive peaks, `None` with fewer than two peaks.
pub fn fringe_period(xs: &[f64], ys: &[f64], min_height: f64) -> Option<f64> {
    let peaks = peak_positions(xs, ys, min_height);
    if peaks.len() < 2 {
        return None;
    }
    Some((peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64)
}

/// Positions of interior local minima below `max_level·max(ys)`, refined by
/// a parabola through the three samples around each valley.
pub fn valley_positions(xs: &[f64], ys: &[f64], max_level: f64) -> Vec<f64> {
    let top = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut valleys = Vec::new();
    for i in 1..ys.len().saturating_sub(1) {
        let (l, c, r) = (ys[i - 1], ys[i], ys[i + 1]);
        if c < l && c <= r && c <= max_level * top {
            let denom = l - 2.0 * c + r;
            let shift = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
            valleys.push(xs[i] + shift * (xs[i + 1] - xs[i]));
        }
    }
    valleys
}

/// Mean spacing between successive minima. Unlike peak spacing this is not
/// biased by a slowly varying envelope, since multiplying by the envelope
/// leaves the zeros of the fringe factor in place.
pub fn fringe_period_from_minima(xs: &[f64], ys: &[f64], max_level: f64) -> Option<f64> {
    let v = valley_positions(xs, ys, max_level);
    if v.len() < 2 {
        return None;
    }
    Some((v[v.len() - 1] - v[0]) / (v.len() - 1) as f64)
}

/// `1/e²` intensity radius from the second moment, `w = 2σ`.
pub fn second_moment_radius(xs: &[f64], intensity: &[f64]) -> f64 {
    let total: f64 = intensity.iter().sum();
    let mean: f64 = xs.iter().zip(intensity).map(|(x, i)| x * i).sum::<f64>() / total;
    let var: f64 = xs
        .iter()
        .zip(intensity)
        .map(|(x, i)| (x - mean) * (x - mean) * i)
        .sum::<f64>()
        / total;
    2.0 * var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 1.0, 10.0).unwrap();
        assert_relative_eq!(r, 2f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn bisect_reports_missing_bracket() {
        assert!(bisect(|x| Ok(x * x + 1.0), 0.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn ncc_properties() {
        let a = [0.0, 1.0, 2.0, 1.0, 0.0];
        let b: Vec<f64> = a.iter().map(|v| 3.0 * v + 2.0).collect();
        assert_relative_eq!(normalized_cross_correlation(&a, &b), 1.0, max_relative = 1e-14);
        let c: Vec<f64> = a.iter().map(|v| -v).collect();
        assert_relative_eq!(normalized_cross_correlation(&a, &c), -1.0, max_relative = 1e-14);
    }

    #[test]
    fn fringe_period_of_cosine() {
        let xs: Vec<f64> = (0..=400).map(|i| -2.0 + i as f64 * 0.01).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| (std::f64::consts::PI * x / 0.7).cos().powi(2))
            .collect();
        let p = fringe_period(&xs, &ys, 0.5).unwrap();
        assert_relative_eq!(p, 0.7, max_relative = 1e-3);
    }

    #[test]
    fn minima_period_ignores_envelope() {
        let xs: Vec<f64> = (0..=2000).map(|i| -2.0 + i as f64 * 0.002).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| (std::f64::consts::PI * x / 0.7).cos().powi(2) * (-x * x / 2.0).exp())
            .collect();
        let p = fringe_period_from_minima(&xs, &ys, 0.5).unwrap();
        assert_relative_eq!(p, 0.7, max_relative = 1e-4);
        // Peak spacing is pulled inward by the envelope.
        assert!(fringe_period(&xs, &ys, 0.05).unwrap() < 0.7);
    }

    #[test]
    fn interpolation_edges() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 10.0, 20.0];
        assert_eq!(interp_linear(&xs, &ys, 1.5), 15.0);
        assert_eq!(interp_linear(&xs, &ys, 2.0), 20.0);
        assert_eq!(interp_linear(&xs, &ys, -0.1), 0.0);
    }
}

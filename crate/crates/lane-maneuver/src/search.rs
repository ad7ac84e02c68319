//! Scalar search utilities: bracketing grid scans, golden-section
//! refinement, bisection, and quadratic-inequality frontier helpers used by
//! the minimal-time solver.

/// Golden-section minimization of a unimodal function on `[a, b]` down to an
/// interval of width `tol`. Returns `(x, f(x))` at the final midpoint.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    if b < a {
        std::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Coarse-to-fine scalar minimization: an `n + 1`-point uniform scan of
/// `[a, b]` brackets the best sample, then golden-section refines within the
/// two neighboring cells. Handles multimodal objectives whose global basin
/// is wider than one grid cell. Returns `(x, f(x))`.
pub fn grid_then_golden<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
    tol: f64,
) -> (f64, f64) {
    let n = n.max(2);
    let mut best_k = 0usize;
    let mut best_v = f64::INFINITY;
    for k in 0..=n {
        let x = a + (b - a) * (k as f64) / (n as f64);
        let v = f(x);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    let lo = a + (b - a) * (best_k.saturating_sub(1) as f64) / (n as f64);
    let hi = a + (b - a) * ((best_k + 1).min(n) as f64) / (n as f64);
    let (x, v) = golden_min(&mut f, lo, hi, tol);
    if v <= best_v {
        (x, v)
    } else {
        (a + (b - a) * (best_k as f64) / (n as f64), best_v)
    }
}

/// Bisection root of a continuous function on `[a, b]` with `f(a)` and
/// `f(b)` of opposite sign (or zero). Returns the midpoint of the final
/// bracket of width `tol`, or `None` when the endpoints do not bracket.
pub fn bisect_root<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// The subset of `[lo, hi]` on which `q(t) = a t² + b t + c ≥ 0`, as at most
/// two closed intervals in increasing order.
pub fn nonneg_intervals_quadratic(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    if hi < lo {
        return vec![];
    }
    let clamp = |(s, e): (f64, f64)| -> Option<(f64, f64)> {
        let s = s.max(lo);
        let e = e.min(hi);
        (s <= e).then_some((s, e))
    };
    if a.abs() < 1e-300 {
        if b.abs() < 1e-300 {
            return if c >= 0.0 { vec![(lo, hi)] } else { vec![] };
        }
        let r = -c / b;
        return if b > 0.0 {
            clamp((r, f64::INFINITY)).into_iter().collect()
        } else {
            clamp((f64::NEG_INFINITY, r)).into_iter().collect()
        };
    }
    let mut roots = crate::trajectory::real_roots_quadratic(a, b, c);
    roots.sort_by(f64::total_cmp);
    if roots.len() < 2 {
        // No real roots (or a double root): the sign of `a` decides.
        return if a > 0.0 { vec![(lo, hi)] } else { vec![] };
    }
    let (r1, r2) = (roots[0], roots[1]);
    if a > 0.0 {
        // Nonnegative outside (r1, r2).
        [
            clamp((f64::NEG_INFINITY, r1)),
            clamp((r2, f64::INFINITY)),
        ]
        .into_iter()
        .flatten()
        .collect()
    } else {
        // Nonnegative inside [r1, r2].
        clamp((r1, r2)).into_iter().collect()
    }
}

/// Intersects two interval unions (each sorted, disjoint).
pub fn intersect_intervals(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        let s = a[i].0.max(b[j].0);
        let e = a[i].1.min(b[j].1);
        if s <= e {
            out.push((s, e));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, v) = golden_min(|t| (t - 2.7).powi(2) + 1.0, 0.0, 10.0, 1e-9);
        assert_relative_eq!(x, 2.7, epsilon = 1e-7);
        assert_relative_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_then_golden_escapes_local_basins() {
        // Two valleys; the deeper one is narrow and off-center.
        let f = |t: f64| {
            let a = (t - 1.0).powi(2);
            let b = 4.0 * (t - 7.9).powi(2) - 0.5;
            a.min(b)
        };
        let (x, v) = grid_then_golden(f, 0.0, 10.0, 100, 1e-10);
        assert_relative_eq!(x, 7.9, epsilon = 1e-6);
        assert_relative_eq!(v, -0.5, epsilon = 1e-10);
    }

    #[test]
    fn bisection_locates_root() {
        let r = bisect_root(|t| t * t - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-10);
        assert!(bisect_root(|t| t * t + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn quadratic_nonneg_regions_cover_all_shapes() {
        // Upward parabola with roots 1 and 3 inside [0, 10].
        let up = nonneg_intervals_quadratic(1.0, -4.0, 3.0, 0.0, 10.0);
        assert_eq!(up.len(), 2);
        assert_relative_eq!(up[0].1, 1.0, epsilon = 1e-12);
        assert_relative_eq!(up[1].0, 3.0, epsilon = 1e-12);

        // Downward parabola: nonnegative only between the roots.
        let down = nonneg_intervals_quadratic(-1.0, 4.0, -3.0, 0.0, 10.0);
        assert_eq!(down, vec![(1.0, 3.0)]);

        // Affine increasing: tail interval.
        let aff = nonneg_intervals_quadratic(0.0, 2.0, -4.0, 0.0, 10.0);
        assert_eq!(aff, vec![(2.0, 10.0)]);

        // Always negative.
        assert!(nonneg_intervals_quadratic(-1.0, 0.0, -1.0, 0.0, 10.0).is_empty());

        // Always nonnegative constant.
        assert_eq!(
            nonneg_intervals_quadratic(0.0, 0.0, 5.0, 0.0, 1.0),
            vec![(0.0, 1.0)]
        );
    }

    #[test]
    fn interval_intersection_is_pairwise() {
        let a = [(0.0, 2.0), (4.0, 8.0)];
        let b = [(1.0, 5.0), (7.0, 9.0)];
        assert_eq!(
            intersect_intervals(&a, &b),
            vec![(1.0, 2.0), (4.0, 5.0), (7.0, 8.0)]
        );
        assert!(intersect_intervals(&a, &[]).is_empty());
    }
}

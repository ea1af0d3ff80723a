//! Euclidean projections onto the probability simplex, optionally cut by a
//! single linear half-space.

/// Projection of `v` onto { w : w >= 0, sum w = 1 } by the sort-and-threshold
/// method.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Closest point to `w0` on the simplex that satisfies `g . w >= c`.
///
/// Returns `None` when no simplex point satisfies the constraint, i.e. when
/// `max g < c`. The minimiser has the form `P(w0 + lambda g)` with
/// `lambda >= 0`, where `P` is the simplex projection; `lambda` is bracketed
/// by bisection and then solved exactly on the detected support.
pub fn project_simplex_halfspace(w0: &[f64], g: &[f64], c: f64) -> Option<Vec<f64>> {
    assert_eq!(w0.len(), g.len());
    let start = project_simplex(w0);
    if dot(g, &start) >= c {
        return Some(start);
    }
    let max_g = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max_g < c {
        return None;
    }
    let at = |lambda: f64| {
        let shifted: Vec<f64> = w0.iter().zip(g).map(|(w, gi)| w + lambda * gi).collect();
        project_simplex(&shifted)
    };

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while dot(g, &at(hi)) < c {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 1100 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dot(g, &at(mid)) < c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let approx = at(hi);
    Some(refine_on_support(w0, g, c, &approx).unwrap_or(approx))
}

/// Solves the two KKT equations on the support of `approx` and keeps the
/// result only if it satisfies the full optimality conditions.
fn refine_on_support(w0: &[f64], g: &[f64], c: f64, approx: &[f64]) -> Option<Vec<f64>> {
    let support: Vec<usize> = (0..w0.len()).filter(|&i| approx[i] > 0.0).collect();
    let m = support.len() as f64;
    let sum_w: f64 = support.iter().map(|&i| w0[i]).sum();
    let sum_g: f64 = support.iter().map(|&i| g[i]).sum();
    let sum_gw: f64 = support.iter().map(|&i| g[i] * w0[i]).sum();
    let sum_gg: f64 = support.iter().map(|&i| g[i] * g[i]).sum();
    let denom = sum_gg - sum_g * sum_g / m;
    if denom.abs() < 1e-14 {
        return None;
    }
    let lambda = (c - sum_gw - sum_g * (1.0 - sum_w) / m) / denom;
    let mu = (1.0 - sum_w - lambda * sum_g) / m;
    if lambda < 0.0 {
        return None;
    }
    let mut w = vec![0.0; w0.len()];
    for i in 0..w0.len() {
        let v = w0[i] + lambda * g[i] + mu;
        if support.contains(&i) {
            if v < -1e-12 {
                return None;
            }
            w[i] = v.max(0.0);
        } else if v > 1e-12 {
            return None;
        }
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return None;
    }
    Some(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection_basics() {
        assert_eq!(project_simplex(&[0.3, 0.7]), vec![0.3, 0.7]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[1.0, 1.0, 1.0]);
        for x in p {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn canonical_beta_moves_to_the_diagonal() {
        let w = project_simplex_halfspace(&[0.3, 0.7], &[6.0, -6.0], 0.0).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn satisfied_constraint_is_untouched() {
        let w = project_simplex_halfspace(&[0.8, 0.2], &[6.0, -6.0], 0.0).unwrap();
        assert_eq!(w, vec![0.8, 0.2]);
    }

    #[test]
    fn infeasible_when_constraint_exceeds_best_vertex() {
        assert!(project_simplex_halfspace(&[0.8, 0.2], &[-1e6, 1.0], 1.5).is_none());
    }

    #[test]
    fn vertex_solution_when_bound_is_tight() {
        let w = project_simplex_halfspace(&[0.8, 0.2], &[-1e6, 1.0], 1.0).unwrap();
        assert!((w[1] - 1.0).abs() < 1e-9);
        assert!(w[0].abs() < 1e-9);
    }
}

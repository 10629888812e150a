//! Cox-de Boor evaluation of B-splines on a clamped knot vector.

/// Values of the `degree + 1` B-splines that are nonzero at `x`.
///
/// Returns the index of the first such B-spline together with the values.
/// `knots` must be clamped (first and last knots repeated `degree + 1`
/// times) and `x` must lie in `[knots[0], knots[last])`.
pub fn bspline_values(knots: &[f64], degree: usize, x: f64) -> (usize, Vec<f64>) {
    let n_basis = knots.len() - degree - 1;
    // span index i with knots[i] <= x < knots[i + 1], degree <= i < n_basis
    let span = (knots.partition_point(|&k| k <= x).saturating_sub(1)).clamp(degree, n_basis - 1);
    let mut vals = vec![0.0; degree + 1];
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    vals[0] = 1.0;
    for j in 1..=degree {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = vals[r] / (right[r + 1] + left[j - r]);
            vals[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        vals[j] = saved;
    }
    (span - degree, vals)
}

/// Clamped uniform knot vector for `cells` subintervals of `[0, 1]`.
pub(crate) fn clamped_uniform_knots(degree: usize, cells: usize) -> Vec<f64> {
    let mut k = vec![0.0; degree + 1];
    k.extend((1..cells).map(|i| i as f64 / cells as f64));
    k.extend(std::iter::repeat_n(1.0, degree + 1));
    k
}

use super::{Row, RowSense, CUT_TOL};
use crate::num::Scalar;

/// A smooth convex constraint `g(x) ≤ 0` enforced by tangent cuts.
pub trait ConvexConstraint<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn value(&self, x: &[T]) -> T;

    /// Sparse gradient at `x`, or `None` where `g` is not differentiable.
    fn gradient(&self, x: &[T]) -> Option<Vec<(usize, T)>>;
}

#[derive(Debug, Clone, PartialEq)]
pub enum CutOutcome<T> {
    Satisfied,
    Cut(Row<T>),
}

/// Tangent cut `g(x̂) + ∇g(x̂)ᵀ(x − x̂) ≤ 0` when `g(x̂)` exceeds the cut
/// tolerance. By convexity the cut never removes a point with `g ≤ 0`.
pub fn oa_cut<T: Scalar, C: ConvexConstraint<T> + ?Sized>(oracle: &C, point: &[T]) -> CutOutcome<T> {
    if oracle.value(point) <= T::lit(CUT_TOL) {
        return CutOutcome::Satisfied;
    }
    match tangent_cut(oracle, point) {
        Some(row) => CutOutcome::Cut(row),
        None => CutOutcome::Satisfied,
    }
}

/// Linearisation of `g` at `point` as a `≤` row, regardless of violation.
/// Kinks are handled by evaluating at a slightly perturbed point.
pub fn tangent_cut<T: Scalar, C: ConvexConstraint<T> + ?Sized>(oracle: &C, point: &[T]) -> Option<Row<T>> {
    let (at, grad) = match oracle.gradient(point) {
        Some(grad) => (point.to_vec(), grad),
        None => {
            let mut shifted = point.to_vec();
            for v in shifted.iter_mut() {
                *v += T::lit(1e-7) * (T::one() + v.abs());
            }
            let grad = oracle.gradient(&shifted)?;
            (shifted, grad)
        }
    };
    let g_at = oracle.value(&at);
    // g(x̂) + ∇g·(x − x̂) ≤ 0  ⇔  ∇g·x ≤ ∇g·x̂ − g(x̂)
    let rhs = grad.iter().map(|&(j, v)| v * at[j]).sum::<T>() - g_at;
    Some(Row {
        name: format!("oa_{}", oracle.name()),
        coeffs: grad,
        sense: RowSense::Le,
        rhs,
    })
}

use crate::error::Result;
use crate::family::MatrixFamily;
use crate::linalg::{operator_norm, ComplexMatrix, EllipsoidalShape, NormKind};

/// Initial mixing weight of the refinement step.
pub const CSR_STEP: f64 = 0.1;
/// Consecutive rejected (halved) steps after which refinement stops.
pub const CSR_REJECTION_LIMIT: usize = 20;

/// `max_i ‖A_i‖_P` together with the lowest maximizing index.
pub fn family_norm(family: &MatrixFamily, shape: &EllipsoidalShape) -> Result<(f64, usize)> {
    let kind = NormKind::Ellipsoidal(shape.clone());
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, a) in family.members().iter().enumerate() {
        let v = operator_norm(a, &kind)?;
        if v > best.0 {
            best = (v, i);
        }
    }
    Ok(best)
}

fn trace_normalized(p: &ComplexMatrix) -> ComplexMatrix {
    let n = p.dim() as f64;
    let tr = p.trace().re;
    let herm = p.add(&p.adjoint()).scale_real(0.5);
    if tr > 0.0 && tr.is_finite() {
        herm.scale_real(n / tr)
    } else {
        herm
    }
}

/// Greedy improvement of an ellipsoidal norm for the family: the shape is
/// pulled towards `A_j* P A_j / ‖A_j‖_P²` for the currently worst member, a
/// step being kept only if it lowers `max_i ‖A_i‖_P`.
///
/// Returns the best shape and its family norm, an upper bound on ρ(F).
pub fn csr_refine(family: &MatrixFamily, start: &EllipsoidalShape, iters: usize) -> Result<(EllipsoidalShape, f64)> {
    let mut shape = start.clone();
    let (mut value, mut worst) = family_norm(family, &shape)?;
    'outer: for _ in 0..iters {
        if value == 0.0 {
            break;
        }
        let a = family.member(worst);
        let p = shape.p().clone();
        let target = a.adjoint().mul(&p).mul(a).scale_real(1.0 / (value * value));
        let mut eta = CSR_STEP;
        let mut rejections = 0;
        loop {
            let mixed = p.scale_real(1.0 - eta).add(&target.scale_real(eta));
            let accepted = match EllipsoidalShape::new(trace_normalized(&mixed)) {
                Ok(candidate) => {
                    let (v, w) = family_norm(family, &candidate)?;
                    if v < value {
                        shape = candidate;
                        value = v;
                        worst = w;
                        true
                    } else {
                        false
                    }
                }
                Err(_) => false,
            };
            if accepted {
                break;
            }
            rejections += 1;
            if rejections >= CSR_REJECTION_LIMIT {
                break 'outer;
            }
            eta /= 2.0;
        }
    }
    Ok((shape, value))
}

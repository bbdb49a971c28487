//! Grid-field operations: remainder `U - P` and vorticity.

use super::polynomial::VectorPolynomial;
use super::ExpansionError;
use crate::grid::GridField;

/// Pointwise `U - P` on every time slice of `u`; every slice must be stored in `p`.
pub fn remainder_field(u: &GridField, p: &VectorPolynomial) -> Result<GridField, ExpansionError> {
    u.validate()?;
    let n = u.dim();
    if u.components() != n || p.n != n {
        return Err(ExpansionError::Shape(format!("field has {} components, polynomial dimension {}", u.components(), p.n)));
    }
    let mut out = u.clone();
    out.header.divergence_free = false;
    let space = u.header.space.clone();
    for k in 0..u.header.time.count {
        let t = u.header.time.time(k);
        let slice = p.slice_at(t).ok_or(ExpansionError::MissingSlice(t))?;
        for q in 0..space.len() {
            let v = slice.eval(&space.point(q));
            for (c, pv) in v.iter().enumerate() {
                let i = out.index(c, k, q);
                out.values[i] -= pv;
            }
        }
    }
    Ok(out)
}

/// Fourth-order finite-difference derivative along `axis` of one row-major
/// slice; one-sided five-point stencils at the two nodes nearest each end.
pub fn derivative(values: &[f64], points: usize, n: usize, axis: usize, h: f64) -> Vec<f64> {
    let stride = points.pow((n - 1 - axis) as u32);
    let mut out = vec![0.0; values.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let i = (flat / stride) % points;
        let at = |k: isize| values[(flat as isize + (k - i as isize) * stride as isize) as usize];
        let i = i as isize;
        let last = points as isize - 1;
        *o = if i >= 2 && i <= last - 2 {
            (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h)
        } else if i == 0 {
            (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) / (12.0 * h)
        } else if i == 1 {
            (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) / (12.0 * h)
        } else if i == last {
            (25.0 * at(last) - 48.0 * at(last - 1) + 36.0 * at(last - 2) - 16.0 * at(last - 3) + 3.0 * at(last - 4)) / (12.0 * h)
        } else {
            (3.0 * at(last) + 10.0 * at(last - 1) - 18.0 * at(last - 2) + 6.0 * at(last - 3) - at(last - 4)) / (12.0 * h)
        };
    }
    out
}

/// `W_ij = d_i U_j - d_j U_i` as `n * n` row-major components.
pub fn curl(u: &GridField) -> Result<GridField, ExpansionError> {
    u.validate()?;
    let n = u.dim();
    if u.components() != n || n < 2 {
        return Err(ExpansionError::Shape(format!("curl needs an {n}-vector field with n >= 2, got {} components", u.components())));
    }
    let space = &u.header.space;
    if space.points < 5 {
        return Err(ExpansionError::Shape(format!("{} points per axis (need >= 5)", space.points)));
    }
    let h = space.spacing();
    let mut out = GridField::zeros(n * n, space.clone(), u.header.time.clone(), u.header.provenance.clone());
    for k in 0..u.header.time.count {
        for i in 0..n {
            for j in (i + 1)..n {
                let a = derivative(u.slice(j, k), space.points, n, i, h);
                let b = derivative(u.slice(i, k), space.points, n, j, h);
                let w: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
                out.slice_mut(i * n + j, k).copy_from_slice(&w);
                let neg: Vec<f64> = w.iter().map(|v| -v).collect();
                out.slice_mut(j * n + i, k).copy_from_slice(&neg);
            }
        }
    }
    Ok(out)
}

/// Finite-difference heat residual `d_t W - Delta W` of every component at
/// interior time slices `1..count-1` (second order in time, fourth in space).
pub fn heat_residual(w: &GridField) -> Result<GridField, ExpansionError> {
    w.validate()?;
    let time = &w.header.time;
    if time.count < 3 {
        return Err(ExpansionError::InsufficientSlices(time.count));
    }
    let space = &w.header.space;
    let n = w.dim();
    let h = space.spacing();
    let mut inner = time.clone();
    inner.start += inner.step;
    inner.count -= 2;
    let mut out = GridField::zeros(w.components(), space.clone(), inner, w.header.provenance.clone());
    for c in 0..w.components() {
        for k in 1..time.count - 1 {
            let mut r: Vec<f64> = w.slice(c, k + 1).iter().zip(w.slice(c, k - 1)).map(|(a, b)| (a - b) / (2.0 * time.step)).collect();
            for axis in 0..n {
                let d1 = derivative(w.slice(c, k), space.points, n, axis, h);
                let d2 = derivative(&d1, space.points, n, axis, h);
                r.iter_mut().zip(d2).for_each(|(a, b)| *a -= b);
            }
            out.slice_mut(c, k - 1).copy_from_slice(&r);
        }
    }
    Ok(out)
}

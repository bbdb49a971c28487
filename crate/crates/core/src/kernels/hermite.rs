//! Physicists' Hermite polynomials, `H_{k+1}(u) = 2u H_k(u) - 2k H_{k-1}(u)`.

/// Values `H_0(u), ..., H_kmax(u)` written into `out[..=kmax]`.
#[inline]
pub fn hermite_values(u: f64, kmax: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if kmax == 0 {
        return;
    }
    out[1] = 2.0 * u;
    for k in 1..kmax {
        out[k + 1] = 2.0 * u * out[k] - 2.0 * k as f64 * out[k - 1];
    }
}

/// Monomial coefficients: `table[k][i]` is the coefficient of `u^i` in `H_k`.
pub fn hermite_coefficients(kmax: usize) -> Vec<Vec<f64>> {
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(kmax + 1);
    table.push(vec![1.0]);
    if kmax >= 1 {
        table.push(vec![0.0, 2.0]);
    }
    for k in 1..kmax {
        let mut next = vec![0.0; k + 2];
        for (i, c) in table[k].iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, c) in table[k - 1].iter().enumerate() {
            next[i] -= 2.0 * k as f64 * c;
        }
        table.push(next);
    }
    table
}

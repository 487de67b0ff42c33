use crate::scalar::{c, cu, Real};

/// Normalized Gegenbauer polynomial `C_l^λ(t) / C_l^λ(1)`.
///
/// Uses the three-term recurrence rewritten for the normalized values,
/// `(n + 2λ) P_{n+1} = 2 (n + λ) t P_n - n P_{n-1}`, so nothing grows with `l`.
/// `λ = 0` is the Chebyshev limit `cos(l arccos t)`.
pub fn gegenbauer_normalized<T: Real>(l: usize, lambda: T, t: T) -> T {
    if l == 0 {
        return T::one();
    }
    if lambda == T::zero() {
        let t = t.max(-T::one()).min(T::one());
        return (cu::<T>(l) * t.acos()).cos();
    }
    let two = c::<T>(2.0);
    let mut prev = T::one();
    let mut cur = t;
    for n in 1..l {
        let nf = cu::<T>(n);
        let next = (two * (nf + lambda) * t * cur - nf * prev) / (nf + two * lambda);
        prev = cur;
        cur = next;
    }
    cur
}

/// All normalized values `P_0(t), ..., P_lmax(t)` in one recurrence pass.
pub fn gegenbauer_normalized_table<T: Real>(lmax: usize, lambda: T, t: T) -> Vec<T> {
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(T::one());
    if lmax == 0 {
        return out;
    }
    if lambda == T::zero() {
        let theta = t.max(-T::one()).min(T::one()).acos();
        out.extend((1..=lmax).map(|l| (cu::<T>(l) * theta).cos()));
        return out;
    }
    out.push(t);
    let two = c::<T>(2.0);
    for n in 1..lmax {
        let nf = cu::<T>(n);
        let next = (two * (nf + lambda) * t * out[n] - nf * out[n - 1]) / (nf + two * lambda);
        out.push(next);
    }
    out
}

/// `ln C_l^λ(1) = ln Γ(l + 2λ) - ln Γ(2λ) - ln l!` for `λ > 0`.
pub fn gegenbauer_ln_at_one<T: Real>(l: usize, lambda: T) -> T {
    use super::gamma::ln_gamma_positive;
    let two_lambda = c::<T>(2.0) * lambda;
    ln_gamma_positive(cu::<T>(l) + two_lambda) - ln_gamma_positive(two_lambda) - ln_gamma_positive(cu::<T>(l + 1))
}

/// Dimension of the space `H_l` of degree-`l` spherical harmonics on `S^N`.
///
/// `(2l + N - 1) (l + N - 2)! / (l! (N - 1)!)` for `l >= 1`, and 1 for `l = 0`.
/// `n` is the sphere dimension (`S^N ⊂ R^{N+1}`), so `dim_harmonic(n, 1) = n + 1`.
pub fn dim_harmonic(n: usize, l: usize) -> u128 {
    assert!(n >= 1, "sphere dimension must be at least 1");
    if l == 0 {
        return 1;
    }
    // (l + N - 2)! / ((l - 1)! (N - 1)!) = binom(l + N - 2, l - 1)
    let b = binomial((l + n - 2) as u128, (l - 1) as u128);
    (2 * l as u128 + n as u128 - 1) * b / l as u128
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(dim_harmonic(3, 0), 1);
        for n in 1..10 {
            assert_eq!(dim_harmonic(n, 1), n as u128 + 1);
        }
        assert_eq!(dim_harmonic(2, 2), 5);
        // circle: cos(lθ), sin(lθ)
        for l in 1..20 {
            assert_eq!(dim_harmonic(1, l), 2);
        }
        // S^2: 2l + 1
        for l in 0..20 {
            assert_eq!(dim_harmonic(2, l), 2 * l as u128 + 1);
        }
    }

    #[test]
    fn difference_of_polynomial_space_dimensions() {
        // dim H_l = dim P_l - dim P_{l-2} in N + 1 variables
        let poly = |vars: u128, deg: i64| -> u128 {
            if deg < 0 {
                0
            } else {
                binomial(deg as u128 + vars - 1, vars - 1)
            }
        };
        for n in 1..8usize {
            for l in 0..15usize {
                let want = poly(n as u128 + 1, l as i64) - poly(n as u128 + 1, l as i64 - 2);
                assert_eq!(dim_harmonic(n, l), want, "N = {n}, l = {l}");
            }
        }
    }
}

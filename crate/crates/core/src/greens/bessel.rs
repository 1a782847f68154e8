//! Exponentially scaled modified Bessel functions of the first kind,
//! `e^{-s} I_n(s)`, for integer order.

use std::f64::consts::PI;

/// Argument above which the large-argument expansion is used for orders up
/// to `n_max`. At the switch the leading ratio `4 n^2 / (8 s)` is at most 1,
/// so the alternating terms never exceed `e` in size.
pub fn asymptotic_switch(n_max: usize) -> f64 {
    let n = n_max as f64;
    (n * n / 2.0).max(100.0)
}

/// `e^{-s} I_k(s)` for `k = 0..=n_max`.
pub fn scaled_i_all(s: f64, n_max: usize) -> Vec<f64> {
    if s >= asymptotic_switch(n_max) {
        (0..=n_max).map(|n| scaled_i_asymptotic(s, n)).collect()
    } else {
        scaled_i_miller(s, n_max)
    }
}

/// Miller's backward recurrence `I_{k-1} = (2k/s) I_k + I_{k+1}`, normalised
/// with `e^{-s} (I_0 + 2 sum_{k>=1} I_k) = 1`.
pub fn scaled_i_miller(s: f64, n_max: usize) -> Vec<f64> {
    assert!(s >= 0.0, "negative argument");
    let mut out = vec![0.0; n_max + 1];
    if s == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = n_max + 50 + (12.0 * s.sqrt()).ceil() as usize;
    let two_over_s = 2.0 / s;
    let mut above = 0.0f64;
    let mut cur = 1e-280f64;
    let mut sum = 0.0f64;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = cur;
        }
        sum += 2.0 * cur;
        let below = k as f64 * two_over_s * cur + above;
        above = cur;
        cur = below;
        if cur > 1e250 {
            let scale = 1e-250;
            cur *= scale;
            above *= scale;
            sum *= scale;
            for v in out.iter_mut() {
                *v *= scale;
            }
        }
    }
    out[0] = cur;
    sum += cur;
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

/// Large-argument expansion
/// `e^{-s} I_n(s) ~ (2 pi s)^{-1/2} sum_k (-1)^k a_k(n) s^{-k}`,
/// `a_k = prod_{j<=k} (4n^2 - (2j-1)^2) / (k! 8^k)`, summed until the terms are
/// negligible or start to grow.
pub fn scaled_i_asymptotic(s: f64, n: usize) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let turn = (mu.sqrt() / 2.0).ceil() as usize + 1;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..400usize {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64 * s);
        if k > turn && next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * s).sqrt()
}

/// Coefficients of the expansion above as a polynomial in `u = 1/s`,
/// truncated at degree `order`: `c_k = (-1)^k a_k(n)`.
pub fn asymptotic_coefficients(n: usize, order: usize) -> Vec<f64> {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut c = Vec::with_capacity(order + 1);
    let mut term = 1.0f64;
    c.push(term);
    for k in 1..=order {
        let odd = (2 * k - 1) as f64;
        term = -term * (mu - odd * odd) / (8.0 * k as f64);
        c.push(term);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // e^{-1} I_0(1), e^{-1} I_1(1), e^{-10} I_0(10), e^{-10} I_5(10)
        let v = scaled_i_miller(1.0, 1);
        assert!((v[0] - 0.465_759_607_593_640_4).abs() < 1e-14);
        assert!((v[1] - 0.207_910_415_349_708_5).abs() < 1e-14);
        let v = scaled_i_miller(10.0, 5);
        assert!((v[0] - 0.127_833_337_163_428_6).abs() < 1e-14);
        // I_5(10) = 777.188286403259
        assert!((v[5] - 777.188_286_403_259 * (-10f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn miller_and_asymptotic_agree_past_the_switch() {
        for &n_max in &[0usize, 3, 14, 50] {
            let s = asymptotic_switch(n_max) * 1.3;
            let m = scaled_i_miller(s, n_max);
            for n in 0..=n_max {
                let a = scaled_i_asymptotic(s, n);
                assert!(
                    ((a - m[n]) / m[n]).abs() < 1e-11,
                    "n={n} s={s}: {a} vs {}",
                    m[n]
                );
            }
        }
    }

    #[test]
    fn normalisation_identity() {
        for &s in &[1e-6, 0.3, 7.0, 80.0] {
            let v = scaled_i_miller(s, 400);
            let total: f64 = v[0] + 2.0 * v[1..].iter().sum::<f64>();
            assert!((total - 1.0).abs() < 1e-13);
        }
    }
}

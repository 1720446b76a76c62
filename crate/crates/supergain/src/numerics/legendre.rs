//! Legendre polynomials via the three-term recurrence
//! (n+1) P_{n+1}(y) = (2n+1) y P_n(y) - n P_{n-1}(y),
//! stable on [-1, 1].

/// P_n(y).
pub fn legendre(n: usize, y: f64) -> f64 {
    legendre_with_derivative(n, y).0
}

/// (P_n(y), P'_n(y)). The derivative uses
/// P'_n(y) = n (y P_n - P_{n-1}) / (y^2 - 1), with the endpoint limits
/// P'_n(±1) = (±1)^{n+1} n(n+1)/2.
pub fn legendre_with_derivative(n: usize, y: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0; // P_0
    let mut p = y; // P_1
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * y * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let dp = if (y * y - 1.0).abs() < 1e-14 {
        let mag = (n * (n + 1)) as f64 / 2.0;
        if y > 0.0 {
            mag
        } else if n % 2 == 0 {
            -mag
        } else {
            mag
        }
    } else {
        n as f64 * (y * p - p_prev) / (y * y - 1.0)
    };
    (p, dp)
}

/// P_{2n}(0)^2, from the ratio P_{2(n+1)}(0) = -P_{2n}(0) (2n+1)/(2n+2).
/// Iterative to avoid factorial overflow.
pub fn legendre_even_at_zero_sq(n: usize) -> f64 {
    let mut p_sq = 1.0; // P_0(0)^2
    for m in 0..n {
        let r = (2 * m + 1) as f64 / (2 * m + 2) as f64;
        p_sq *= r * r;
    }
    p_sq
}

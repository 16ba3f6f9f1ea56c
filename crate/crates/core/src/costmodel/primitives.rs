//! T-count laws of the circuit building blocks.

use crate::error::{Error, Result};

/// Smallest `b` with `2^b >= x` (0 for `x <= 1`).
pub(crate) fn ceil_log2_f(x: f64) -> u64 {
    if x <= 1.0 {
        return 0;
    }
    let mut b = x.log2().ceil() as u64;
    while b > 0 && 2f64.powi(b as i32 - 1) >= x {
        b -= 1;
    }
    while 2f64.powi(b as i32) < x {
        b += 1;
    }
    b
}

/// `⌈log₂ n⌉` for integers, 0 for `n <= 1`.
pub(crate) fn ceil_log2(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros() as u64
    }
}

/// Unary iteration over `l` elements: `(4l − 4 T gates, ⌈log₂ l⌉ ancillas)`.
pub fn select_cost(l: u64) -> (u64, u64) {
    ((4 * l).saturating_sub(4), ceil_log2(l))
}

/// Toffoli-ladder multi-controlled X: `4(n − 1)` T gates, free for `n <= 1`.
pub fn multicontrolled_x_cost(n_controls: u64) -> u64 {
    if n_controls <= 1 {
        0
    } else {
        4 * (n_controls - 1)
    }
}

/// SELECT-SWAP state preparation over `n` amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QromCost {
    pub t: u64,
    /// Index register plus `bits · block` swap register.
    pub ancilla: u64,
    pub bits: u64,
    /// Minimizing swap block size `k*`.
    pub block: u64,
}

/// `b = ⌈log₂(n/ε′)⌉`, `T = min_k 4⌈n/k⌉ − 4 + 4b(k − 1)` over powers of two
/// `k <= n`; ties go to the smaller `k`.
pub fn qrom_prepare_cost(n: u64, eps_prime: f64) -> Result<QromCost> {
    if n == 0 {
        return Err(Error::InvalidArgument("prepare over zero terms".into()));
    }
    if !(eps_prime > 0.0 && eps_prime < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps' {eps_prime} outside (0, 1)"
        )));
    }
    let bits = ceil_log2_f(n as f64 / eps_prime);
    let mut best = (u64::MAX, 1);
    let mut k = 1u64;
    while k <= n {
        let t = 4 * n.div_ceil(k) - 4 + 4 * bits * (k - 1);
        if t < best.0 {
            best = (t, k);
        }
        k *= 2;
    }
    Ok(QromCost {
        t: best.0,
        ancilla: ceil_log2(n) + bits * best.1,
        bits,
        block: best.1,
    })
}

/// `(select T, prepare T, ancilla)` of an LCU over `n` unitaries. Prepare is
/// counted once; the caller doubles it.
pub fn linear_combo_encoding_cost(n: u64, eps_prime: f64) -> Result<(u64, u64, u64)> {
    let q = qrom_prepare_cost(n, eps_prime)?;
    Ok((select_cost(n).0, q.t, q.ancilla))
}

/// `(select T, prepare T, ancilla)` of a product of `j` identical block
/// encodings, with one flag qubit per factor.
pub fn product_encoding_cost(
    j: u64,
    sub_ancilla: u64,
    sub_select_t: u64,
    sub_prepare_t: u64,
) -> (u64, u64, u64) {
    (
        j * sub_select_t + j * multicontrolled_x_cost(sub_ancilla),
        j * sub_prepare_t,
        sub_ancilla + j,
    )
}

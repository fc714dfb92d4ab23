// Radix-2 transform used by QuadratureGrid when the node count is a power of
// two. Not a public FFT surface: the grid owns the twiddle table.

use num_complex::Complex64;

/// In-place transform `out_j = Σ_k data_k · ω^{±jk}` where `ω = roots[1]`.
/// `positive` selects the sign of the exponent. `data.len()` must equal
/// `roots.len()` and be a power of two.
pub(crate) fn radix2(data: &mut [Complex64], roots: &[Complex64], positive: bool) {
    let m = data.len();
    debug_assert!(m.is_power_of_two() && roots.len() == m);
    if m <= 1 {
        return;
    }
    let bits = m.trailing_zeros();
    for i in 0..m {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= m {
        let half = len / 2;
        let stride = m / len;
        for start in (0..m).step_by(len) {
            for k in 0..half {
                let w = roots[k * stride];
                let w = if positive { w } else { w.conj() };
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

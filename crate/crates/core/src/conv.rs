//! Separable discrete convolution on rectangular lattices.
//!
//! A 2D/3D mollification with a tensor-product kernel factors into one 1D
//! pass per axis. Each pass convolves with a symmetric, normalized weight
//! vector `w[-m..m]` (Σw = 1), so a single pass — and therefore the whole
//! mollification — preserves the lattice sum exactly whenever the data's
//! support stays `m` nodes away from the boundary (zero padding), or always
//! (periodic padding).

/// Boundary handling for convolution passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadMode {
    /// Data is extended by zero outside the lattice.
    Zero,
    /// Data wraps around per axis.
    Periodic,
}

/// Convolve one axis of a flat lattice in place.
///
/// `dims` are the lattice extents, `axis` selects the direction, and `w` is
/// the full symmetric weight vector of odd length `2m+1` (center at `m`).
pub(crate) fn conv_axis(data: &mut [f64], dims: &[usize], axis: usize, w: &[f64], pad: PadMode) {
    debug_assert_eq!(data.len(), dims.iter().product::<usize>());
    debug_assert!(w.len() % 2 == 1);
    let m = (w.len() - 1) / 2;
    if m == 0 {
        return;
    }
    let n = dims[axis];
    // stride of the axis and number of independent 1D lines
    let stride: usize = dims[..axis].iter().product();
    let lines = data.len() / n;
    let mut line = vec![0.0f64; n];
    let mut out = vec![0.0f64; n];
    for l in 0..lines {
        // Decompose the line index into (inner, outer) around the axis.
        let inner = l % stride;
        let outer = l / stride;
        let base = outer * stride * n + inner;
        for i in 0..n {
            line[i] = data[base + i * stride];
        }
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &wk) in w.iter().enumerate() {
                let off = i as isize + k as isize - m as isize;
                let v = match pad {
                    PadMode::Zero => {
                        if off < 0 || off >= n as isize {
                            0.0
                        } else {
                            line[off as usize]
                        }
                    }
                    PadMode::Periodic => {
                        let idx = off.rem_euclid(n as isize) as usize;
                        line[idx]
                    }
                };
                acc += wk * v;
            }
            *o = acc;
        }
        for i in 0..n {
            data[base + i * stride] = out[i];
        }
    }
}

/// Convolve every axis of a flat lattice with per-axis kernels.
pub(crate) fn conv_separable(
    data: &mut [f64],
    dims: &[usize],
    kernels: &[Vec<f64>],
    pad: PadMode,
) {
    debug_assert_eq!(dims.len(), kernels.len());
    for (axis, w) in kernels.iter().enumerate() {
        conv_axis(data, dims, axis, w, pad);
    }
}

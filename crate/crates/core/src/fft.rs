//! Unitary 2-D discrete Fourier transform over image-shaped arrays.

use std::sync::Arc;

use ndarray::{ArrayViewMut2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward and inverse transforms for one image shape.
pub struct Fft2 {
    height: usize,
    width: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl Fft2 {
    pub fn new(height: usize, width: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            height,
            width,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
            scale: 1.0 / ((height * width) as f64).sqrt(),
        }
    }

    pub fn forward(&self, image: ArrayViewMut2<Complex64>) {
        self.apply(image, false);
    }

    pub fn inverse(&self, image: ArrayViewMut2<Complex64>) {
        self.apply(image, true);
    }

    fn apply(&self, mut image: ArrayViewMut2<Complex64>, inverse: bool) {
        assert_eq!(image.dim(), (self.height, self.width), "plan shape mismatch");
        let (rows, cols) = if inverse { (&self.row_inv, &self.col_inv) } else { (&self.row_fwd, &self.col_fwd) };

        let mut line = vec![Complex64::default(); self.width.max(self.height)];
        for mut row in image.axis_iter_mut(Axis(0)) {
            let buf = &mut line[..self.width];
            buf.iter_mut().zip(row.iter()).for_each(|(b, v)| *b = *v);
            rows.process(buf);
            row.iter_mut().zip(buf.iter()).for_each(|(v, b)| *v = *b);
        }
        for mut col in image.axis_iter_mut(Axis(1)) {
            let buf = &mut line[..self.height];
            buf.iter_mut().zip(col.iter()).for_each(|(b, v)| *b = *v);
            cols.process(buf);
            col.iter_mut().zip(buf.iter()).for_each(|(v, b)| *v = *b * self.scale);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn matches_direct_dft() {
        let (h, w) = (5, 6);
        let img = Array2::from_shape_fn((h, w), |(i, j)| Complex64::new((i * 7 + j) as f64 * 0.3, (i as f64) - (j as f64).sin()));
        let mut k = img.clone();
        Fft2::new(h, w).forward(k.view_mut());
        let norm = 1.0 / ((h * w) as f64).sqrt();
        for ky in 0..h {
            for kx in 0..w {
                let mut acc = Complex64::default();
                for y in 0..h {
                    for x in 0..w {
                        let phase = -2.0 * std::f64::consts::PI * ((ky * y) as f64 / h as f64 + (kx * x) as f64 / w as f64);
                        acc += img[[y, x]] * Complex64::from_polar(1.0, phase);
                    }
                }
                assert!((acc * norm - k[[ky, kx]]).norm() < 1e-12);
            }
        }
    }
}

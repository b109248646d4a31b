//! Two-dimensional discrete Fourier transforms on the periodic grid.
//!
//! Spectra hold Fourier-series coefficients: the forward transform divides by
//! `n²`, so a constant field `c` has spectrum `c` at the zero mode and
//! `mean(|f|²) = Σ|f̂|²`.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use super::Grid;
use crate::error::{Error, Result};

pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check_len(&self, got: usize) -> Result<()> {
        let expected = self.n * self.n;
        if got != expected {
            return Err(Error::DimensionMismatch { expected, got });
        }
        Ok(())
    }

    fn transpose(&self, buf: &mut [C64]) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                buf.swap(i * n + j, j * n + i);
            }
        }
    }

    fn pass(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [C64]) {
        let mut scratch = vec![C64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(buf, &mut scratch);
        self.transpose(buf);
        plan.process_with_scratch(buf, &mut scratch);
        self.transpose(buf);
    }

    /// Forward transform in place, normalized by `1/n²`.
    pub fn forward_in_place(&self, buf: &mut [C64]) -> Result<()> {
        self.check_len(buf.len())?;
        self.pass(&self.forward, buf);
        let scale = 1.0 / (self.n * self.n) as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        Ok(())
    }

    /// Inverse transform in place (plain synthesis sum, no scaling).
    pub fn inverse_in_place(&self, buf: &mut [C64]) -> Result<()> {
        self.check_len(buf.len())?;
        self.pass(&self.inverse, buf);
        Ok(())
    }

    pub fn forward_real(&self, phys: &[f64]) -> Result<Vec<C64>> {
        self.check_len(phys.len())?;
        let mut buf: Vec<C64> = phys.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.forward_in_place(&mut buf)?;
        Ok(buf)
    }

    /// Synthesizes a real field; the imaginary part of the synthesis is dropped.
    pub fn inverse_real(&self, spec: &[C64]) -> Result<Vec<f64>> {
        let mut buf = spec.to_vec();
        self.inverse_in_place(&mut buf)?;
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    /// Synthesizes two real fields with one complex transform (`a + i b`).
    /// Both spectra must be Hermitian.
    pub fn inverse_pair(&self, a: &[C64], b: &[C64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        let i = C64::i();
        let mut buf: Vec<C64> = a.iter().zip(b).map(|(x, y)| x + i * y).collect();
        self.inverse_in_place(&mut buf)?;
        Ok(buf.into_iter().map(|c| (c.re, c.im)).unzip())
    }

    /// Analyzes two real fields with one complex transform and separates the
    /// spectra using Hermitian symmetry.
    pub fn forward_pair(&self, p: &[f64], q: &[f64]) -> Result<(Vec<C64>, Vec<C64>)> {
        self.check_len(p.len())?;
        self.check_len(q.len())?;
        let mut z: Vec<C64> = p.iter().zip(q).map(|(&x, &y)| C64::new(x, y)).collect();
        self.forward_in_place(&mut z)?;
        let n = self.n;
        let mut a = vec![C64::default(); n * n];
        let mut b = vec![C64::default(); n * n];
        for row in 0..n {
            let mrow = (n - row) % n;
            for col in 0..n {
                let mcol = (n - col) % n;
                let zk = z[row * n + col];
                let zm = z[mrow * n + mcol].conj();
                a[row * n + col] = (zk + zm) * 0.5;
                b[row * n + col] = (zk - zm) * C64::new(0.0, -0.5);
            }
        }
        Ok((a, b))
    }
}

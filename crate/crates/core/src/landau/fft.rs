//! Linear convolution of lattice data with real even kernels through 3D FFTs.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Smallest `P ≥ min` whose prime factors are 2, 3 and 5.
pub(crate) fn fft_size(min: usize) -> usize {
    let mut p = min.max(1);
    loop {
        let mut q = p;
        for f in [2, 3, 5] {
            while q % f == 0 {
                q /= f;
            }
        }
        if q == 1 {
            return p;
        }
        p += 1;
    }
}

struct Fft3 {
    p: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    fn new(p: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            p,
            fwd: planner.plan_fft_forward(p),
            inv: planner.plan_fft_inverse(p),
        }
    }

    /// Transform along all three axes; the data layout is restored on return.
    fn run(&self, data: &mut Vec<Complex64>, inverse: bool) {
        let fft = if inverse { &self.inv } else { &self.fwd };
        let p = self.p;
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let mut tmp = vec![Complex64::new(0.0, 0.0); data.len()];
        for _ in 0..3 {
            fft.process_with_scratch(data, &mut scratch);
            // (i, j, k) -> (k, i, j): the next pass transforms the old middle axis
            for i in 0..p {
                for j in 0..p {
                    let src = &data[(i * p + j) * p..(i * p + j + 1) * p];
                    for (k, &x) in src.iter().enumerate() {
                        tmp[(k * p + i) * p + j] = x;
                    }
                }
            }
            std::mem::swap(data, &mut tmp);
        }
    }
}

/// One contribution `coeff · (K_kernel ∗ source_src)` to output `out`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Term {
    pub out: usize,
    pub kernel: usize,
    pub src: usize,
    pub coeff: f64,
}

/// Convolves data on a source lattice of `ns³` points with kernels
/// `K(d)` (`d` integer offset) and reads the result on an output lattice of
/// `no³` points, whose node `b` sits at source node `b + c` on every axis.
pub(crate) struct LatticeConvolver {
    ns: usize,
    no: usize,
    c: i64,
    fft: Fft3,
    parity: Vec<Parity>,
    /// Real part of even spectra, imaginary part of odd ones.
    spectra: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Parity {
    Even,
    Odd,
}

impl LatticeConvolver {
    /// Kernels must be even or odd, so their spectra are real or imaginary.
    pub fn new(ns: usize, no: usize, c: i64, kernels: &[(Parity, &(dyn Fn([i64; 3]) -> f64 + Sync))]) -> Self {
        let p = fft_size(ns + no - 1);
        let fft = Fft3::new(p);
        let lo = c - (ns as i64 - 1);
        let hi = c + no as i64 - 1;
        let wrap = |d: i64| d.rem_euclid(p as i64) as usize;
        let mut spectra = Vec::with_capacity(kernels.len());
        let parity: Vec<Parity> = kernels.iter().map(|k| k.0).collect();
        let mut start = 0;
        while start < kernels.len() {
            // two even kernels share one transform: the spectrum of re + i·im is K̂_re + i K̂_im
            let paired = start + 1 < kernels.len()
                && parity[start] == Parity::Even
                && parity[start + 1] == Parity::Even;
            let mut data = vec![Complex64::new(0.0, 0.0); p * p * p];
            for d0 in lo..=hi {
                for d1 in lo..=hi {
                    for d2 in lo..=hi {
                        let idx = (wrap(d0) * p + wrap(d1)) * p + wrap(d2);
                        let re = kernels[start].1([d0, d1, d2]);
                        let im = if paired { kernels[start + 1].1([d0, d1, d2]) } else { 0.0 };
                        data[idx] = Complex64::new(re, im);
                    }
                }
            }
            fft.run(&mut data, false);
            match parity[start] {
                Parity::Even => spectra.push(data.iter().map(|z| z.re).collect()),
                Parity::Odd => spectra.push(data.iter().map(|z| z.im).collect()),
            }
            if paired {
                spectra.push(data.iter().map(|z| z.im).collect());
                start += 2;
            } else {
                start += 1;
            }
        }
        Self {
            parity,
            ns,
            no,
            c,
            fft,
            spectra,
        }
    }

    pub fn source_len(&self) -> usize {
        self.ns * self.ns * self.ns
    }

    /// Evaluate all `terms`, returning `n_out` fields of `no³` values.
    pub fn convolve(&self, sources: &[&[f64]], terms: &[Term], n_out: usize) -> Vec<Vec<f64>> {
        let p = self.fft.p;
        let len = p * p * p;
        let ns = self.ns;
        let neg: Vec<usize> = (0..p).map(|k| (p - k) % p).collect();
        let mut acc = vec![vec![Complex64::new(0.0, 0.0); len]; n_out.div_ceil(2)];
        for (pair_idx, pair) in sources.chunks(2).enumerate() {
            let s0 = 2 * pair_idx;
            let active: Vec<&Term> = terms
                .iter()
                .filter(|t| t.src == s0 || t.src == s0 + 1)
                .collect();
            if active.is_empty() {
                continue;
            }
            let mut data = vec![Complex64::new(0.0, 0.0); len];
            for i in 0..ns {
                for j in 0..ns {
                    for k in 0..ns {
                        let sidx = (i * ns + j) * ns + k;
                        let re = pair[0][sidx];
                        let im = pair.get(1).map_or(0.0, |s| s[sidx]);
                        data[(i * p + j) * p + k] = Complex64::new(re, im);
                    }
                }
            }
            self.fft.run(&mut data, false);
            for a in 0..p {
                for b in 0..p {
                    for c in 0..p {
                        let idx = (a * p + b) * p + c;
                        let z = data[idx];
                        let zm = data[(neg[a] * p + neg[b]) * p + neg[c]].conj();
                        let spec = [(z + zm) * 0.5, (z - zm) * Complex64::new(0.0, -0.5)];
                        for t in &active {
                            let k = t.coeff * self.spectra[t.kernel][idx];
                            let s = spec[t.src - s0];
                            let v = match self.parity[t.kernel] {
                                Parity::Even => s * k,
                                Parity::Odd => Complex64::new(-s.im * k, s.re * k),
                            };
                            let slot = &mut acc[t.out / 2][idx];
                            if t.out % 2 == 0 {
                                *slot += v;
                            } else {
                                *slot += Complex64::new(-v.im, v.re);
                            }
                        }
                    }
                }
            }
        }
        let no = self.no;
        let scale = 1.0 / len as f64;
        let wrap = |x: i64| x.rem_euclid(p as i64) as usize;
        let mut outs = vec![vec![0.0; no * no * no]; n_out];
        for (q, mut data) in acc.into_iter().enumerate() {
            self.fft.run(&mut data, true);
            for i in 0..no {
                for j in 0..no {
                    for k in 0..no {
                        let z = data[(wrap(i as i64 + self.c) * p + wrap(j as i64 + self.c)) * p
                            + wrap(k as i64 + self.c)]
                            * scale;
                        let oidx = (i * no + j) * no + k;
                        outs[2 * q][oidx] = z.re;
                        if 2 * q + 1 < n_out {
                            outs[2 * q + 1][oidx] = z.im;
                        }
                    }
                }
            }
        }
        outs
    }
}

//! Mixed-radix FFT for arbitrary lengths, Bluestein for large prime factors.

use num_complex::Complex;

use crate::scalar::{unit_root, Real};

const NAIVE_PRIME_LIMIT: usize = 31;

/// Forward transform `X_k = Σ_j x_j e^{-2πi jk/n}` for a fixed length.
#[derive(Clone, Debug)]
pub struct FftPlan<T: Real> {
    len: usize,
    algo: Algo<T>,
}

#[derive(Clone, Debug)]
enum Algo<T: Real> {
    Trivial,
    Naive { roots: Vec<Complex<T>> },
    Mixed { radix: usize, inner: Box<FftPlan<T>>, radix_plan: Box<FftPlan<T>>, twiddles: Vec<Complex<T>> },
    Bluestein { inner: Box<FftPlan<T>>, chirp: Vec<Complex<T>>, kernel: Vec<Complex<T>> },
}

fn smallest_prime_factor(n: usize) -> usize {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut p = 3;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return p;
        }
        p += 2;
    }
    n
}

fn forward_root<T: Real>(k: usize, n: usize) -> Complex<T> {
    unit_root::<T>(k as u64, n as u64).conj()
}

impl<T: Real> FftPlan<T> {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let algo = if len == 1 {
            Algo::Trivial
        } else {
            let p = smallest_prime_factor(len);
            if p == len {
                if len <= NAIVE_PRIME_LIMIT {
                    Algo::Naive { roots: (0..len).map(|k| forward_root(k, len)).collect() }
                } else {
                    Self::bluestein(len)
                }
            } else {
                Algo::Mixed {
                    radix: p,
                    inner: Box::new(FftPlan::new(len / p)),
                    radix_plan: Box::new(FftPlan::new(p)),
                    twiddles: (0..len).map(|k| forward_root(k, len)).collect(),
                }
            }
        };
        FftPlan { len, algo }
    }

    fn bluestein(n: usize) -> Algo<T> {
        let m = (2 * n - 1).next_power_of_two();
        let inner = FftPlan::new(m);
        // w_k = exp(-πi k²/n); k² is reduced mod 2n to keep the phase exact
        let chirp: Vec<Complex<T>> = (0..n)
            .map(|k| {
                let k2 = (k as u128 * k as u128 % (2 * n as u128)) as u64;
                unit_root::<T>(k2, 2 * n as u64).conj()
            })
            .collect();
        let mut kernel = vec![Complex::new(T::zero(), T::zero()); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.forward(&mut kernel);
        Algo::Bluestein { inner: Box::new(inner), chirp, kernel }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        assert_eq!(data.len(), self.len);
        match &self.algo {
            Algo::Trivial => {}
            Algo::Naive { roots } => {
                let n = self.len;
                let input = data.to_vec();
                for (k, out) in data.iter_mut().enumerate() {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for (j, &x) in input.iter().enumerate() {
                        acc = acc + x * roots[(j * k) % n];
                    }
                    *out = acc;
                }
            }
            Algo::Mixed { radix, inner, radix_plan, twiddles } => {
                let r = *radix;
                let m = self.len / r;
                let mut sub = vec![Complex::new(T::zero(), T::zero()); self.len];
                for s in 0..r {
                    let chunk = &mut sub[s * m..(s + 1) * m];
                    for t in 0..m {
                        chunk[t] = data[t * r + s];
                    }
                    inner.forward(chunk);
                }
                let mut z = vec![Complex::new(T::zero(), T::zero()); r];
                for k in 0..m {
                    for s in 0..r {
                        z[s] = sub[s * m + k] * twiddles[(s * k) % self.len];
                    }
                    radix_plan.forward(&mut z);
                    for q in 0..r {
                        data[k + m * q] = z[q];
                    }
                }
            }
            Algo::Bluestein { inner, chirp, kernel } => {
                let n = self.len;
                let m = kernel.len();
                let mut a = vec![Complex::new(T::zero(), T::zero()); m];
                for k in 0..n {
                    a[k] = data[k] * chirp[k];
                }
                inner.forward(&mut a);
                for (x, &b) in a.iter_mut().zip(kernel) {
                    *x = *x * b;
                }
                inner.inverse_unnormalized(&mut a);
                let scale = T::one() / T::of_usize(m);
                for k in 0..n {
                    data[k] = a[k] * chirp[k] * scale;
                }
            }
        }
    }

    /// In-place `x_j = Σ_k X_k e^{+2πi jk/n}` (no `1/n` factor).
    pub fn inverse_unnormalized(&self, data: &mut [Complex<T>]) {
        for x in data.iter_mut() {
            *x = x.conj();
        }
        self.forward(data);
        for x in data.iter_mut() {
            *x = x.conj();
        }
    }
}

/// Factor-wise FFT over a row-major multidimensional array.
#[derive(Clone, Debug)]
pub struct MultiFft<T: Real> {
    shape: Vec<usize>,
    plans: Vec<FftPlan<T>>,
}

impl<T: Real> MultiFft<T> {
    pub fn new(shape: &[usize]) -> Self {
        MultiFft { shape: shape.to_vec(), plans: shape.iter().map(|&n| FftPlan::new(n)).collect() }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.run(data, false);
    }

    pub fn inverse_unnormalized(&self, data: &mut [Complex<T>]) {
        self.run(data, true);
    }

    fn run(&self, data: &mut [Complex<T>], inverse: bool) {
        let total: usize = self.shape.iter().product();
        assert_eq!(data.len(), total);
        let mut stride = total;
        let mut line = Vec::new();
        for (axis, plan) in self.plans.iter().enumerate() {
            let n = self.shape[axis];
            stride /= n;
            if n == 1 {
                continue;
            }
            line.resize(n, Complex::new(T::zero(), T::zero()));
            let block = n * stride;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + k * stride];
                    }
                    if inverse {
                        plan.inverse_unnormalized(&mut line);
                    } else {
                        plan.forward(&mut line);
                    }
                    for (k, &v) in line.iter().enumerate() {
                        data[base + k * stride] = v;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(x: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let n = x.len();
        (0..n).map(|k| x.iter().enumerate().map(|(j, &v)| v * forward_root::<f64>((j * k) % n, n)).sum()).collect()
    }

    #[test]
    fn matches_naive_for_many_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in (1..=70).chain([97, 128, 210, 256, 257, 343, 1000, 1021]) {
            let x: Vec<Complex<f64>> =
                (0..n).map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let mut y = x.clone();
            FftPlan::new(n).forward(&mut y);
            let z = naive(&x);
            let err = y.iter().zip(&z).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-9 * (n as f64).max(1.0), "n = {n}: err {err}");
        }
    }

    #[test]
    fn inverse_roundtrip_f32() {
        let n = 60;
        let x: Vec<Complex<f32>> = (0..n).map(|k| Complex::new((k as f32).sin(), (k as f32 * 0.3).cos())).collect();
        let plan = FftPlan::<f32>::new(n);
        let mut y = x.clone();
        plan.forward(&mut y);
        plan.inverse_unnormalized(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b / n as f32).norm() < 1e-4);
        }
    }
}

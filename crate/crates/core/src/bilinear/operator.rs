use super::{apply_symbol_direct, apply_symbol_with, symbol_from_kernel, transferred_apply, BilinearSymbol, Kernel};
use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupHom};
use crate::scalar::Real;
use crate::transform::{ensure_same_group, MultiFft, Signal};

/// Anything that maps a pair of signals on one group to a signal on the same group.
pub trait BilinearOperator<T: Real>: Send + Sync {
    fn source_group(&self) -> &FiniteAbelianGroup;

    fn apply(&self, f: &Signal<T>, g: &Signal<T>) -> Result<Signal<T>>;

    /// Whether the map is linear in each argument, so changes can be tracked by columns.
    fn is_bilinear(&self) -> bool {
        true
    }

    fn check(&self, f: &Signal<T>, g: &Signal<T>) -> Result<()> {
        ensure_same_group(self.source_group(), f.group())?;
        ensure_same_group(self.source_group(), g.group())
    }
}

/// `B_m` through the fast path, with a cached FFT plan.
pub struct SymbolOperator<T: Real> {
    symbol: BilinearSymbol<T>,
    group: FiniteAbelianGroup,
    fft: MultiFft<T>,
}

impl<T: Real> SymbolOperator<T> {
    pub fn new(symbol: BilinearSymbol<T>) -> Self {
        let group = symbol.spatial_group();
        let fft = MultiFft::new(group.orders());
        SymbolOperator { symbol, group, fft }
    }

    pub fn symbol(&self) -> &BilinearSymbol<T> {
        &self.symbol
    }
}

impl<T: Real> BilinearOperator<T> for SymbolOperator<T> {
    fn source_group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    fn apply(&self, f: &Signal<T>, g: &Signal<T>) -> Result<Signal<T>> {
        self.check(f, g)?;
        Ok(apply_symbol_with(&self.fft, &self.symbol, f, g))
    }
}

/// `B_m` by direct summation; a reference for small groups.
pub struct DirectSymbolOperator<T: Real> {
    symbol: BilinearSymbol<T>,
    group: FiniteAbelianGroup,
}

impl<T: Real> DirectSymbolOperator<T> {
    pub fn new(symbol: BilinearSymbol<T>) -> Self {
        let group = symbol.spatial_group();
        DirectSymbolOperator { symbol, group }
    }
}

impl<T: Real> BilinearOperator<T> for DirectSymbolOperator<T> {
    fn source_group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    fn apply(&self, f: &Signal<T>, g: &Signal<T>) -> Result<Signal<T>> {
        apply_symbol_direct(&self.symbol, f, g)
    }
}

/// `B_K(f,g)(x) = ∬ K(u,v) f(x−u) g(x−v)`, evaluated through `K̂`.
pub struct KernelOperator<T: Real> {
    kernel: Kernel<T>,
    inner: SymbolOperator<T>,
}

impl<T: Real> KernelOperator<T> {
    pub fn new(kernel: Kernel<T>) -> Self {
        let inner = SymbolOperator::new(symbol_from_kernel(&kernel));
        KernelOperator { kernel, inner }
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn symbol(&self) -> &BilinearSymbol<T> {
        self.inner.symbol()
    }
}

impl<T: Real> BilinearOperator<T> for KernelOperator<T> {
    fn source_group(&self) -> &FiniteAbelianGroup {
        self.kernel.group()
    }

    fn apply(&self, f: &Signal<T>, g: &Signal<T>) -> Result<Signal<T>> {
        self.inner.apply(f, g)
    }
}

/// `P_K(f,g) = B_K(|f|,|g|)` for a nonnegative kernel.
pub struct PositiveKernelOperator<T: Real> {
    inner: KernelOperator<T>,
}

impl<T: Real> PositiveKernelOperator<T> {
    pub fn new(kernel: Kernel<T>) -> Result<Self> {
        let tol = T::of(1e-12) * kernel.values().iter().map(|z| z.norm()).fold(T::zero(), T::max);
        if let Some(i) = kernel.values().iter().position(|z| z.re < -tol || z.im.abs() > tol) {
            return Err(Error::NegativeKernel(i));
        }
        Ok(PositiveKernelOperator { inner: KernelOperator::new(kernel) })
    }

    pub fn kernel(&self) -> &Kernel<T> {
        self.inner.kernel()
    }
}

impl<T: Real> BilinearOperator<T> for PositiveKernelOperator<T> {
    fn source_group(&self) -> &FiniteAbelianGroup {
        self.inner.source_group()
    }

    fn apply(&self, f: &Signal<T>, g: &Signal<T>) -> Result<Signal<T>> {
        self.inner.apply(&f.abs(), &g.abs())
    }

    fn is_bilinear(&self) -> bool {
        false
    }
}

/// `T_K` for a kernel on `Γ` carried to `G` by `π̃ : Γ → G`.
pub struct TransferredOperator<T: Real> {
    kernel: Kernel<T>,
    pi_tilde: GroupHom,
}

impl<T: Real> TransferredOperator<T> {
    pub fn new(kernel: Kernel<T>, pi_tilde: GroupHom) -> Result<Self> {
        if pi_tilde.source() != kernel.group() {
            return Err(Error::GroupMismatch(format!(
                "π̃ starts at {} but K lives on {}",
                pi_tilde.source(),
                kernel.group()
            )));
        }
        Ok(TransferredOperator { kernel, pi_tilde })
    }
}

impl<T: Real> BilinearOperator<T> for TransferredOperator<T> {
    fn source_group(&self) -> &FiniteAbelianGroup {
        self.pi_tilde.target()
    }

    fn apply(&self, f: &Signal<T>, g: &Signal<T>) -> Result<Signal<T>> {
        transferred_apply(&self.kernel, &self.pi_tilde, f, g)
    }
}

impl<T: Real, O: BilinearOperator<T> + ?Sized> BilinearOperator<T> for &O {
    fn source_group(&self) -> &FiniteAbelianGroup {
        (**self).source_group()
    }

    fn apply(&self, f: &Signal<T>, g: &Signal<T>) -> Result<Signal<T>> {
        (**self).apply(f, g)
    }

    fn is_bilinear(&self) -> bool {
        (**self).is_bilinear()
    }
}

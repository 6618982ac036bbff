"""Periodic 2-D Fourier collocation grid.

Grid functions are plain ``(N, N)`` float arrays with ``values[i, j]`` the
value at ``(x_i, y_j) = (i h, j h)``.  Spectral coefficients are stored in
the real-to-complex layout of :func:`scipy.fft.rfft2`: shape
``(N, N // 2 + 1)``, axis 0 holds ``k`` in FFT order and axis 1 holds
``l >= 0``.  Coefficients follow the normalization

    f[i, j] = sum_{k, l} F[k, l] exp(2 pi i (k x_i + l y_j) / L)

so that ``F[0, 0]`` is the grid mean and Parseval reads
``||f||_2^2 = L^2 sum |F|^2`` (sum over the full, not the half, spectrum).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft


@dataclass(frozen=True)
class Norms:
    l1: float
    l2: float
    linf: float
    mean: float


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Uniform ``N x N`` collocation grid on ``(0, L)^2`` with eigenvalue tables.

    Attributes
    ----------
    N, L, h : int, float, float
        Points per dimension, edge length and spacing ``L / N``.
    kx, ky : ndarray
        First-derivative multipliers ``2 pi k / L`` broadcastable against the
        spectral layout.  For even ``N`` the Nyquist entry is zero.
    lam : ndarray
        Eigenvalues of ``-Delta_N``: ``(2 pi k / L)^2 + (2 pi l / L)^2``,
        using the full Nyquist wavenumber.
    weight : ndarray
        Multiplicity of each stored half-spectrum column (1 or 2), so that
        ``sum(weight * |F|^2)`` equals the sum over the full spectrum.
    """

    N: int
    L: float = 1.0
    workers: int = 1
    h: float = field(init=False)
    kx: np.ndarray = field(init=False, repr=False)
    ky: np.ndarray = field(init=False, repr=False)
    lam: np.ndarray = field(init=False, repr=False)
    weight: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        N, L = self.N, self.L
        if int(N) != N or N < 4:
            raise ValueError(f"grid needs an integer N >= 4, got {N!r}")
        if not (np.isfinite(L) and L > 0):
            raise ValueError(f"domain length must be positive, got {L!r}")
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "L", float(L))
        object.__setattr__(self, "h", self.L / self.N)

        k_full = sfft.fftfreq(N, 1.0 / N)
        l_half = sfft.rfftfreq(N, 1.0 / N)
        scale = 2.0 * np.pi / self.L
        kx = scale * k_full
        ky = scale * l_half
        lam = kx[:, None] ** 2 + ky[None, :] ** 2
        # fftfreq labels the even-N Nyquist index -N/2, rfftfreq +N/2; both
        # carry the full wavenumber in lam but no first derivative.
        if N % 2 == 0:
            kx = kx.copy()
            ky = ky.copy()
            kx[N // 2] = 0.0
            ky[-1] = 0.0

        weight = np.full(l_half.shape, 2.0)
        weight[0] = 1.0
        if N % 2 == 0:
            weight[-1] = 1.0

        for name, arr in (
            ("kx", kx[:, None]),
            ("ky", ky[None, :]),
            ("lam", lam),
            ("weight", weight[None, :]),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # -- geometry -------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    @property
    def spectral_shape(self) -> tuple[int, int]:
        return (self.N, self.N // 2 + 1)

    @property
    def x(self) -> np.ndarray:
        return self.h * np.arange(self.N)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Collocation coordinates ``(X, Y)`` with ``X[i, j] = x_i``."""
        return np.meshgrid(self.x, self.x, indexing="ij")

    def sample(self, fn, *args) -> np.ndarray:
        """Evaluate ``fn(X, Y, *args)`` on the grid."""
        X, Y = self.mesh()
        return np.asarray(fn(X, Y, *args), dtype=float)

    # -- transforms -------------------------------------------------------------

    def _check(self, f: np.ndarray, spectral: bool = False) -> None:
        expected = self.spectral_shape if spectral else self.shape
        if f.shape != expected:
            raise ValueError(f"array of shape {f.shape} does not match grid {expected}")

    def transform(self, f: np.ndarray) -> np.ndarray:
        self._check(f)
        return sfft.rfft2(f, norm="forward", workers=self.workers)

    def inverse_transform(self, F: np.ndarray) -> np.ndarray:
        self._check(F, spectral=True)
        return sfft.irfft2(F, s=self.shape, norm="forward", workers=self.workers)

    def full_coefficients(self, F: np.ndarray) -> np.ndarray:
        """Expand half-spectrum coefficients to the full ``(N, N)`` FFT layout."""
        self._check(F, spectral=True)
        N = self.N
        full = np.empty(self.shape, dtype=complex)
        m = F.shape[1]
        full[:, :m] = F
        # F[-k, -l] = conj(F[k, l]) fills the negative l columns
        neg_k = (-np.arange(N)) % N
        for col in range(m, N):
            full[:, col] = np.conj(F[neg_k, N - col])
        return full

    def coefficient(self, F: np.ndarray, k: int, l: int) -> complex:
        """Coefficient of mode ``(k, l)`` for signed wavenumber indices."""
        N = self.N
        return complex(self.full_coefficients(F)[k % N, l % N])

    # -- diagonal operators -----------------------------------------------------

    def apply_diagonal(self, F: np.ndarray, m: np.ndarray) -> np.ndarray:
        self._check(F, spectral=True)
        if np.shape(m) != self.spectral_shape:
            m = np.broadcast_to(m, self.spectral_shape)
        return m * F

    def grad(self, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        F = self.transform(f)
        return self.grad_hat(F)

    def grad_hat(self, F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return (
            self.inverse_transform(1j * self.kx * F),
            self.inverse_transform(1j * self.ky * F),
        )

    def div_hat(self, fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
        """Spectral coefficients of ``D_x fx + D_y fy``."""
        return 1j * self.kx * self.transform(fx) + 1j * self.ky * self.transform(fy)

    def div(self, fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
        return self.inverse_transform(self.div_hat(fx, fy))

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        return self.inverse_transform(-self.lam * self.transform(f))

    def bilaplacian(self, f: np.ndarray) -> np.ndarray:
        return self.inverse_transform(self.lam**2 * self.transform(f))

    # -- resampling (zero padding / truncation) ---------------------------------

    def resample_hat(self, F: np.ndarray, M: int) -> np.ndarray:
        """Coefficients of the same trigonometric interpolant on an ``M`` grid.

        With ``M > N`` this is exact zero padding; with ``M < N`` modes beyond
        the coarse grid are dropped.  A split Nyquist mode is never created:
        the even-``N`` Nyquist row/column is discarded when padding.
        """
        N = self.N
        out = np.zeros((M, M // 2 + 1), dtype=complex)
        kmax = (min(N, M) - 1) // 2  # modes representable on both grids
        rows = np.r_[0 : kmax + 1, -kmax:0]
        cols = np.arange(kmax + 1)
        out[np.ix_(rows % M, cols)] = F[np.ix_(rows % N, cols)]
        return out

    # -- inner products and norms -------------------------------------------------

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(self.h**2 * np.sum(f * g))

    def mean(self, f: np.ndarray) -> float:
        return float(self.h**2 * np.sum(f) / self.L**2)

    def norms(self, f: np.ndarray) -> Norms:
        h2 = self.h**2
        return Norms(
            l1=float(h2 * np.sum(np.abs(f))),
            l2=float(np.sqrt(h2 * np.sum(f * f))),
            linf=float(np.max(np.abs(f))) if f.size else 0.0,
            mean=float(h2 * np.sum(f) / self.L**2),
        )

    def spectral_sum(self, F: np.ndarray, m: np.ndarray | float = 1.0) -> float:
        """``L^2 sum_{k,l} m_{k,l} |F_{k,l}|^2`` over the full spectrum."""
        self._check(F, spectral=True)
        power = F.real**2 + F.imag**2
        return float(self.L**2 * np.sum(self.weight * m * power))


def make_grid(N: int, L: float = 1.0, workers: int = 1) -> SpectralGrid:
    return SpectralGrid(N, L, workers)

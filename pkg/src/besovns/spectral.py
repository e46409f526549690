"""Spectral fields on the periodic torus and the dyadic-shell calculus.

Conventions, fixed once for the whole package:

* The physical domain is the torus [0, 2*pi)^n sampled at N points per
  axis (N a power of two, N >= 8), so samples sit on x = 2*pi*a/N.
* ``coeffs[c, a1, ..., an]`` holds the Fourier coefficient of
  exp(i k.x) for component c.  Array index a on each axis maps to the
  integer frequency k = a for a <= N/2 and k = a - N otherwise, so
  frequency components lie in (-N/2, N/2] and the enumeration is the
  row-major bijection with array index.
* The forward transform divides by N^n, making coefficients literal
  Fourier coefficients; with this normalisation Parseval reads
  ``integral |u|^2 dx = (2*pi)^n * sum_k |coeff(k)|^2`` and collocation
  quadrature of band-limited fields is exact.
* ``phi(|k|/2^j)`` restricts a field to the frequency annulus
  2^j * (3/4, 8/3); ``chi(|k|/2^j)`` is the matching low-pass with
  plateau |k| <= (3/4) 2^j and support |k| < (4/3) 2^j.  By construction
  phi(r) = chi(r/2) - chi(r), so the shells telescope to a partition of
  unity on nonzero frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

#: Transition radii of the low-pass profile: 1 on [0, CHI_FLAT], 0 beyond CHI_ZERO.
CHI_FLAT = 0.75
CHI_ZERO = 4.0 / 3.0
#: Resulting support of the shell profile phi.
SHELL_INNER = 0.75
SHELL_OUTER = 8.0 / 3.0

DEFAULT_SMOOTHSTEP_ORDER = 4


# ---------------------------------------------------------------------------
# grid and frequency bookkeeping


@dataclass(frozen=True)
class Grid:
    """Periodic collocation grid: ``n`` spatial dimensions, ``N`` points per axis."""

    n: int
    N: int

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"spatial dimension must be 2 or 3, got {self.n}")
        if self.N < 8 or (self.N & (self.N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 8, got {self.N}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def cell_volume(self) -> float:
        """Quadrature weight of one collocation cell, (2*pi/N)^n."""
        return (2.0 * np.pi / self.N) ** self.n

    def frequencies(self) -> np.ndarray:
        """Integer frequency vectors, shape ``(n,) + shape``."""
        return _frequency_grid(self.n, self.N)

    def frequency_norm(self) -> np.ndarray:
        return _frequency_norm(self.n, self.N)

    def frequency_norm_sq(self) -> np.ndarray:
        return _frequency_norm_sq(self.n, self.N)

    def coordinates(self) -> np.ndarray:
        """Collocation points, shape ``(n,) + shape``."""
        axis = 2.0 * np.pi * np.arange(self.N) / self.N
        mesh = np.meshgrid(*([axis] * self.n), indexing="ij")
        return np.stack(mesh)


@lru_cache(maxsize=None)
def _frequency_axis(N: int) -> np.ndarray:
    k = np.arange(N)
    k = np.where(k > N // 2, k - N, k)
    k.setflags(write=False)
    return k


@lru_cache(maxsize=None)
def _frequency_grid(n: int, N: int) -> np.ndarray:
    axis = _frequency_axis(N)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    out = np.stack(mesh).astype(np.float64)
    out.setflags(write=False)
    return out

@lru_cache(maxsize=None)
def _frequency_norm_sq(n: int, N: int) -> np.ndarray:
    out = np.sum(_frequency_grid(n, N) ** 2, axis=0)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _frequency_norm(n: int, N: int) -> np.ndarray:
    out = np.sqrt(_frequency_norm_sq(n, N))
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# cutoff profiles


def _smoothstep_lower(x: np.ndarray, order: int) -> np.ndarray:
    acc = np.zeros_like(x)
    for i in range(order + 1):
        c = math.comb(order + i, i) * math.comb(2 * order + 1, order - i)
        acc = acc + c * (-x) ** i
    return x ** (order + 1) * acc


def smoothstep(x, order: int):
    """Polynomial smoothstep of the given order: 0 at 0, 1 at 1, with the
    first ``order`` derivatives vanishing at both endpoints.

    Evaluated through the symmetry S(x) = 1 - S(1-x) on the upper half so
    the alternating polynomial never loses accuracy to cancellation.
    """
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    lower = _smoothstep_lower(np.minimum(x, 0.5), order)
    upper = 1.0 - _smoothstep_lower(np.minimum(1.0 - x, 0.5), order)
    return np.where(x <= 0.5, lower, upper)


@dataclass(frozen=True)
class CutoffPair:
    """Radial low-pass profile chi and shell profile phi(r) = chi(r/2) - chi(r).

    chi is 1 on [0, 3/4], 0 on [4/3, inf), and a monotone C^order
    smoothstep in between; phi is then supported in [3/4, 8/3], takes
    values in [0, 1], and its dyadic dilates sum to 1 away from zero.
    """

    order: int = DEFAULT_SMOOTHSTEP_ORDER

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("smoothstep order must be >= 1")

    def chi(self, r):
        r = np.asarray(r, dtype=np.float64)
        t = (r - CHI_FLAT) / (CHI_ZERO - CHI_FLAT)
        return 1.0 - smoothstep(t, self.order)

    def phi(self, r):
        r = np.asarray(r, dtype=np.float64)
        return self.chi(r / 2.0) - self.chi(r)


def build_cutoffs(order: int = DEFAULT_SMOOTHSTEP_ORDER) -> CutoffPair:
    return CutoffPair(order=order)


@dataclass(frozen=True)
class DyadicRange:
    """Shell indices [j_min, j_max] covering every nonzero grid frequency."""

    j_min: int
    j_max: int

    def shells(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def __len__(self) -> int:
        return self.j_max - self.j_min + 1


def dyadic_range(grid: Grid) -> DyadicRange:
    # phi(2^-j r) != 0 requires j in (log2(r/SHELL_OUTER), log2(r/SHELL_INNER));
    # cover radii from 1 to the grid's corner frequency.
    r_min = 1.0
    r_max = math.sqrt(grid.n) * (grid.N / 2.0)
    j_min = math.floor(math.log2(r_min / SHELL_OUTER)) + 1
    j_max = math.ceil(math.log2(r_max / SHELL_INNER)) - 1
    return DyadicRange(j_min, j_max)


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class SpectralField:
    """An m-component field stored as Fourier coefficients.

    ``coeffs`` has shape (m,) + grid.shape.  Treated as immutable: every
    operation returns a fresh field.  ``homogeneous`` asserts that the
    zero mode vanishes identically (checked at construction).
    """

    grid: Grid
    coeffs: np.ndarray
    homogeneous: bool = False

    def __post_init__(self):
        expected = self.grid.shape
        if self.coeffs.ndim != self.grid.n + 1 or self.coeffs.shape[1:] != expected:
            raise ValueError(
                f"coefficient array shape {self.coeffs.shape} does not match "
                f"(m,) + {expected}"
            )
        if self.coeffs.dtype != np.complex128:
            raise ValueError("coefficients must be complex128")
        if self.homogeneous:
            zero = self.coeffs[(slice(None),) + (0,) * self.grid.n]
            if np.any(zero != 0):
                raise ValueError("homogeneous flag set but zero mode is nonzero")

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    def mean_coefficient(self) -> np.ndarray:
        return self.coeffs[(slice(None),) + (0,) * self.grid.n].copy()

    def component(self, i: int) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs[i : i + 1].copy(), self.homogeneous)

    def zero_like(self) -> "SpectralField":
        return SpectralField(self.grid, np.zeros_like(self.coeffs), True)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(
            self.grid, self.coeffs + other.coeffs, self.homogeneous and other.homogeneous
        )

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(
            self.grid, self.coeffs - other.coeffs, self.homogeneous and other.homogeneous
        )

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * complex(scalar), self.homogeneous)

    __rmul__ = __mul__

    def l2_norm(self) -> float:
        """Plancherel L2 norm, sqrt((2*pi)^n sum |coeff|^2)."""
        return float(
            np.sqrt((2.0 * np.pi) ** self.grid.n * np.sum(np.abs(self.coeffs) ** 2))
        )

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        mirrored = np.conj(_reverse_spectrum(self.coeffs))
        scale = np.max(np.abs(self.coeffs)) or 1.0
        return bool(np.max(np.abs(self.coeffs - mirrored)) <= tol * scale)


def _check_same_grid(a: SpectralField, b: SpectralField):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def _reverse_spectrum(coeffs: np.ndarray) -> np.ndarray:
    """Map coeff(k) -> coeff(-k) using the index negation a -> (-a) mod N."""
    out = coeffs
    for axis in range(1, coeffs.ndim):
        out = np.roll(np.flip(out, axis), 1, axis)
    return out


def hermitian_symmetrize(coeffs: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian-symmetric part (real physical field)."""
    return 0.5 * (coeffs + np.conj(_reverse_spectrum(coeffs)))


def field_from_coeffs(grid: Grid, coeffs: np.ndarray, homogeneous: bool = False) -> SpectralField:
    coeffs = np.array(coeffs, dtype=np.complex128)
    if coeffs.ndim == grid.n:
        coeffs = coeffs[None]
    return SpectralField(grid, coeffs, homogeneous)


def forward_transform(grid: Grid, samples: np.ndarray) -> SpectralField:
    """Physical samples -> Fourier coefficients (forward divides by N^n)."""
    samples = np.asarray(samples)
    if samples.ndim == grid.n:
        samples = samples[None]
    if samples.shape[1:] != grid.shape:
        raise ValueError(f"sample array shape {samples.shape} does not match grid {grid.shape}")
    axes = tuple(range(1, grid.n + 1))
    coeffs = np.fft.fftn(samples, axes=axes) / grid.N**grid.n
    return SpectralField(grid, coeffs.astype(np.complex128), False)


def inverse_transform(field: SpectralField) -> np.ndarray:
    """Fourier coefficients -> complex physical samples."""
    axes = tuple(range(1, field.grid.n + 1))
    return np.fft.ifftn(field.coeffs, axes=axes) * field.grid.N**field.grid.n


def to_physical(field: SpectralField, imag_tol: float = 1e-10) -> np.ndarray:
    """Real physical samples; raises if the field is not real to tolerance."""
    samples = inverse_transform(field)
    scale = np.max(np.abs(samples)) or 1.0
    worst = np.max(np.abs(samples.imag))
    if worst > imag_tol * scale:
        raise ValueError(f"field is not real in physical space (imag residue {worst:.3e})")
    return np.ascontiguousarray(samples.real)


def lp_norm(field: SpectralField, p: float) -> float:
    """Collocation L^p norm of the pointwise Euclidean magnitude over components.

    The magnitude uses complex moduli, so real fields get the usual norm
    and a single complex exponential has sup norm one.  p = 2 agrees with
    Plancherel; p = inf is the max over collocation points; other p are
    quadratures on the N^n grid (exact for band-limited integrands).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    samples = inverse_transform(field)
    mag = np.sqrt(np.sum(np.abs(samples) ** 2, axis=0))
    if math.isinf(p):
        return float(np.max(mag))
    return float((field.grid.cell_volume * np.sum(mag**p)) ** (1.0 / p))


# ---------------------------------------------------------------------------
# diagonal operators


@lru_cache(maxsize=None)
def _shell_multiplier(n: int, N: int, order: int, j: int) -> np.ndarray:
    pair = build_cutoffs(order)
    out = pair.phi(_frequency_norm(n, N) / 2.0**j)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _lowpass_multiplier(n: int, N: int, order: int, j: int) -> np.ndarray:
    pair = build_cutoffs(order)
    out = pair.chi(_frequency_norm(n, N) / 2.0**j)
    out.setflags(write=False)
    return out


def dyadic_block(u: SpectralField, j: int, cutoffs: CutoffPair | None = None) -> SpectralField:
    """Restrict to the dyadic frequency shell 2^j * (3/4, 8/3)."""
    order = (cutoffs or build_cutoffs()).order
    mult = _shell_multiplier(u.grid.n, u.grid.N, order, j)
    return SpectralField(u.grid, u.coeffs * mult, True)


def low_pass(u: SpectralField, j: int, cutoffs: CutoffPair | None = None) -> SpectralField:
    """Keep frequencies below the shell at index j (multiplier chi(|k|/2^j))."""
    order = (cutoffs or build_cutoffs()).order
    mult = _lowpass_multiplier(u.grid.n, u.grid.N, order, j)
    zero = u.coeffs[(slice(None),) + (0,) * u.grid.n]
    homogeneous = u.homogeneous or bool(np.all(zero == 0))
    return SpectralField(u.grid, u.coeffs * mult, homogeneous)


def heat_flow(u: SpectralField, t: float) -> SpectralField:
    """Heat semigroup at time t >= 0: multiply coeff(k) by exp(-t |k|^2)."""
    if t < 0:
        raise ValueError("heat flow time must be nonnegative")
    mult = np.exp(-t * u.grid.frequency_norm_sq())
    return SpectralField(u.grid, u.coeffs * mult, u.homogeneous)


def leray_project(u: SpectralField) -> SpectralField:
    """Project an n-component field onto divergence-free fields.

    Per mode k != 0 the coefficient vector is replaced by
    (I - k k^T / |k|^2) coeff(k); the zero mode is set to zero.
    """
    grid = u.grid
    if u.m != grid.n:
        raise ValueError(f"Leray projection needs {grid.n} components, got {u.m}")
    k = grid.frequencies()
    k2 = grid.frequency_norm_sq().copy()
    k2[(0,) * grid.n] = 1.0  # avoid 0/0; zero mode is overwritten below
    dot = np.sum(k * u.coeffs, axis=0)
    out = u.coeffs - k * (dot / k2)
    out[(slice(None),) + (0,) * grid.n] = 0.0
    return SpectralField(grid, out, True)


def spectral_divergence(u: SpectralField) -> SpectralField:
    """Scalar field i k . coeff(k) (divergence of an n-component field)."""
    grid = u.grid
    if u.m != grid.n:
        raise ValueError(f"divergence needs {grid.n} components, got {u.m}")
    k = grid.frequencies()
    out = 1j * np.sum(k * u.coeffs, axis=0)[None]
    return SpectralField(grid, out, u.homogeneous)


def projected_divergence(W: SpectralField) -> SpectralField:
    """Leray-projected divergence of an n x n tensor field.

    ``W`` carries m = n^2 components in row-major order (i, l) -> i*n + l.
    Output component i is  i (delta_ij - k_i k_j / |k|^2) k_l W_jl  per
    mode; the zero mode is discarded, so the result is always mean-zero
    and divergence-free regardless of the mean of ``W``.
    """
    grid = W.grid
    n = grid.n
    if W.m != n * n:
        raise ValueError(f"projected divergence needs {n * n} components, got {W.m}")
    k = grid.frequencies()
    tensor = W.coeffs.reshape((n, n) + grid.shape)
    div = 1j * np.sum(k[None, :] * tensor, axis=1)
    return leray_project(SpectralField(grid, div, False))


def apply_first_order_symbol(symbol, u: SpectralField) -> SpectralField:
    """Apply a Fourier multiplier smooth away from 0 and homogeneous of degree 1.

    ``symbol`` maps the frequency array of shape (n,) + grid.shape to a
    complex multiplier; it is never evaluated at k = 0, so the input must
    be mean-zero.
    """
    grid = u.grid
    if np.any(u.mean_coefficient() != 0):
        raise ValueError("symbol undefined at k = 0: input must be mean-zero")
    k = grid.frequencies().copy()
    origin = (slice(None),) + (0,) * grid.n
    k[origin] = 1.0  # placeholder, output at k=0 forced to zero below
    mult = np.asarray(symbol(k))
    out = u.coeffs * mult
    out[(slice(None),) + (0,) * grid.n] = 0.0
    return SpectralField(grid, out, True)


def partial_derivative_symbol(axis: int):
    """Degree-1 symbol of the partial derivative along ``axis``: i k_axis."""
    return lambda k: 1j * k[axis]


def gradient(u: SpectralField) -> SpectralField:
    """Stack of all first partials: component (c, axis) -> c*n + axis."""
    grid = u.grid
    k = grid.frequencies()
    out = 1j * u.coeffs[:, None] * k[None]
    return SpectralField(
        grid, out.reshape((u.m * grid.n,) + grid.shape), u.homogeneous
    )


def bernstein_ratio(u: SpectralField, j: int, p: float, q: float, deriv: int) -> float:
    """Measured constant of the derivative/integrability estimate on one shell:

        || grad^deriv block ||_q / (2^(j*deriv) 2^(j(n/p - n/q)) || block ||_p).
    """
    block = dyadic_block(u, j)
    denom = lp_norm(block, p)
    if denom == 0.0:
        raise ValueError(f"dyadic block at j={j} vanishes")
    top = block
    for _ in range(deriv):
        top = gradient(top)
    n = u.grid.n
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    scale = 2.0 ** (j * deriv) * 2.0 ** (j * (n * inv_p - n * inv_q))
    return lp_norm(top, q) / (scale * denom)


def reconstruct_from_shells(u: SpectralField, cutoffs: CutoffPair | None = None) -> SpectralField:
    """Sum of all dyadic blocks over the grid's shell range."""
    rng = dyadic_range(u.grid)
    total = np.zeros_like(u.coeffs)
    for j in rng.shells():
        total = total + dyadic_block(u, j, cutoffs).coeffs
    return SpectralField(u.grid, total, True)

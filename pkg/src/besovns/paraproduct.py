"""Dealiased collocation products and the Bony shell decomposition.

All pointwise products go through a 3/2-rule zero-padded transform: both
factors are embedded into a grid of 3N/2 points per axis, multiplied in
physical space, and truncated back.  For factors supported strictly
inside the Nyquist planes the retained modes are exact; any discarded
tail beyond the retained band is measured and reported via a warning
when its relative mass exceeds 1e-13.

The shell decomposition of a product splits u*v into low-high, high-low
and comparable-frequency parts,

    u*v = paraproduct(u, v) + paraproduct(v, u) + remainder(u, v),

which for band-limited mean-zero fields reproduces the pointwise product
exactly (every shell pair lands in exactly one of the three sums).
Products of mean-zero fields generally have a nonzero mean; the mean is
retained here and only the projected divergence discards it.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import (
    SpectralField,
    _check_same_grid,
    _frequency_axis,
    dyadic_block,
    dyadic_range,
    low_pass,
    projected_divergence,
)

TAIL_WARN_THRESHOLD = 1e-13


class DealiasingTailWarning(RuntimeWarning):
    """A pointwise product lost noticeable spectral mass beyond the retained band."""


class TailMassRecorder:
    """Context manager that absorbs per-product tail warnings into a maximum.

    While active, truncation tails are accumulated here instead of being
    warned about one product at a time; orchestration loops record the
    maximum in their traces.
    """

    _active: list["TailMassRecorder"] = []

    def __init__(self):
        self.max_tail = 0.0

    def __enter__(self):
        TailMassRecorder._active.append(self)
        return self

    def __exit__(self, *exc):
        TailMassRecorder._active.remove(self)
        return False


def _report_tail(tail: float) -> bool:
    """Give the tail to active recorders; return True if someone took it."""
    for rec in TailMassRecorder._active:
        rec.max_tail = max(rec.max_tail, tail)
    return bool(TailMassRecorder._active)


def _flush_tail(tail: float, label: str) -> None:
    """Pass an aggregated tail outward, warning only at the outermost level."""
    if tail > TAIL_WARN_THRESHOLD and not _report_tail(tail):
        warnings.warn(
            f"{label} discarded up to {tail:.3e} relative spectral mass per term",
            DealiasingTailWarning,
            stacklevel=3,
        )


@lru_cache(maxsize=None)
def _pad_indices(N: int, Np: int) -> np.ndarray:
    """Positions of the N-grid frequencies inside the Np-grid spectrum."""
    freqs = np.asarray(_frequency_axis(N))
    return (freqs % Np).astype(np.intp)


def padded_grid_size(N: int) -> int:
    Np = (3 * N) // 2
    return Np + (Np % 2)


def _embed(coeffs: np.ndarray, N: int, Np: int, n: int) -> np.ndarray:
    out = np.zeros(coeffs.shape[:1] + (Np,) * n, dtype=np.complex128)
    idx = _pad_indices(N, Np)
    sel = np.ix_(np.arange(coeffs.shape[0]), *([idx] * n))
    out[sel] = coeffs
    return out


def _extract(coeffs: np.ndarray, N: int, Np: int, n: int) -> tuple[np.ndarray, float]:
    """Truncate a padded spectrum back to the N grid; return relative tail mass.

    The self-paired Nyquist planes |k_i| = N/2 are part of the discarded
    tail: they cannot carry the odd symbols applied downstream while
    keeping fields real, so the retained band is |k_i| <= N/2 - 1.
    """
    idx = _pad_indices(N, Np)
    sel = np.ix_(np.arange(coeffs.shape[0]), *([idx] * n))
    kept = coeffs[sel].copy()
    for axis in range(n):
        sl = [slice(None)] * (n + 1)
        sl[axis + 1] = N // 2
        kept[tuple(sl)] = 0.0
    total = float(np.sum(np.abs(coeffs) ** 2))
    inside = float(np.sum(np.abs(kept) ** 2))
    tail = 0.0 if total == 0.0 else max(total - inside, 0.0) / total
    return kept, tail


def _physical_padded(u: SpectralField, Np: int) -> np.ndarray:
    grid = u.grid
    big = _embed(u.coeffs, grid.N, Np, grid.n)
    axes = tuple(range(1, grid.n + 1))
    return np.fft.ifftn(big, axes=axes) * Np**grid.n


def pointwise_tensor(u: SpectralField, v: SpectralField) -> SpectralField:
    """Dealiased tensor product; component (i, j) of the output is u_i * v_j
    stored at index i * v.m + j."""
    _check_same_grid(u, v)
    grid = u.grid
    Np = padded_grid_size(grid.N)
    pu = _physical_padded(u, Np)
    pv = _physical_padded(v, Np)
    prod = pu[:, None] * pv[None, :]
    prod = prod.reshape((u.m * v.m,) + (Np,) * grid.n)
    axes = tuple(range(1, grid.n + 1))
    spec = np.fft.fftn(prod, axes=axes) / Np**grid.n
    kept, tail = _extract(spec, grid.N, Np, grid.n)
    if tail > TAIL_WARN_THRESHOLD and not _report_tail(tail):
        warnings.warn(
            f"pointwise product discarded {tail:.3e} relative spectral mass",
            DealiasingTailWarning,
            stacklevel=2,
        )
    return SpectralField(grid, np.ascontiguousarray(kept), False)


def _scalar_product(a: SpectralField, b: SpectralField) -> SpectralField:
    return pointwise_tensor(a, b)  # m = 1 factors give a single component


def paraproduct(u: SpectralField, v: SpectralField) -> SpectralField:
    """Low-high interaction: sum over shells j of (low-pass_{j-1} u) * (block_j v).

    Scalar mean-zero inputs on one grid; each summand is spectrally
    supported in a fattened annulus around 2^j.
    """
    _check_same_grid(u, v)
    if u.m != 1 or v.m != 1:
        raise ValueError("paraproduct acts on scalar fields")
    rng = dyadic_range(u.grid)
    acc = np.zeros_like(u.coeffs)
    with TailMassRecorder() as tails:
        for j in rng.shells():
            lo = low_pass(u, j - 1)
            hi = dyadic_block(v, j)
            if not np.any(lo.coeffs) or not np.any(hi.coeffs):
                continue
            acc = acc + _scalar_product(lo, hi).coeffs
    _flush_tail(tails.max_tail, "paraproduct")
    return SpectralField(u.grid, acc, False)


def remainder(u: SpectralField, v: SpectralField) -> SpectralField:
    """Comparable-frequency interaction: sum over j of block_j u times the
    three neighbouring blocks of v."""
    _check_same_grid(u, v)
    if u.m != 1 or v.m != 1:
        raise ValueError("remainder acts on scalar fields")
    rng = dyadic_range(u.grid)
    acc = np.zeros_like(u.coeffs)
    with TailMassRecorder() as tails:
        for j in rng.shells():
            bu = dyadic_block(u, j)
            if not np.any(bu.coeffs):
                continue
            near = np.zeros_like(v.coeffs)
            for nu in (-1, 0, 1):
                near = near + dyadic_block(v, j - nu).coeffs
            if not np.any(near):
                continue
            acc = acc + _scalar_product(bu, SpectralField(v.grid, near, True)).coeffs
    _flush_tail(tails.max_tail, "remainder")
    return SpectralField(u.grid, acc, False)


def bony_product(u: SpectralField, v: SpectralField) -> SpectralField:
    """Componentwise shell decomposition of the tensor product of two
    mean-zero vector fields.  Output component (i, j) sits at i * v.m + j;
    the zero mode of the product is retained."""
    _check_same_grid(u, v)
    grid = u.grid
    out = np.zeros((u.m * v.m,) + grid.shape, dtype=np.complex128)
    with TailMassRecorder() as tails:
        for i in range(u.m):
            ui = u.component(i)
            for j in range(v.m):
                vj = v.component(j)
                s = (
                    paraproduct(ui, vj).coeffs
                    + paraproduct(vj, ui).coeffs
                    + remainder(ui, vj).coeffs
                )
                out[i * v.m + j] = s[0]
    _flush_tail(tails.max_tail, "shell-decomposed product")
    return SpectralField(grid, out, False)


def projected_divergence_blockwise(W: SpectralField) -> SpectralField:
    """Shell-by-shell projected divergence, summed over the dyadic range.

    Agrees with the direct operator on band-limited tensors because the
    shells form a partition of unity away from the (discarded) zero mode.
    """
    rng = dyadic_range(W.grid)
    acc = None
    for j in rng.shells():
        piece = projected_divergence(dyadic_block(W, j))
        acc = piece if acc is None else acc + piece
    return acc


@dataclass
class ProductReport:
    """Comparison of the shell-decomposed and pointwise products."""

    bony_result: SpectralField
    pointwise_result: SpectralField
    discrepancy: float
    term_norms: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "product_comparison",
                "discrepancy": self.discrepancy,
                "term_norms": self.term_norms,
            },
            sort_keys=True,
        )


def bony_vs_pointwise(u: SpectralField, v: SpectralField, floor: float = 1e-300) -> ProductReport:
    """Compute both products of two vector fields and their relative gap."""
    grid = u.grid
    parts = {
        name: np.zeros((u.m * v.m,) + grid.shape, dtype=np.complex128)
        for name in ("low_high", "high_low", "comparable")
    }
    with TailMassRecorder() as tails:
        for i in range(u.m):
            ui = u.component(i)
            for j in range(v.m):
                vj = v.component(j)
                parts["low_high"][i * v.m + j] = paraproduct(ui, vj).coeffs[0]
                parts["high_low"][i * v.m + j] = paraproduct(vj, ui).coeffs[0]
                parts["comparable"][i * v.m + j] = remainder(ui, vj).coeffs[0]
        point = pointwise_tensor(u, v)
    _flush_tail(tails.max_tail, "product comparison")
    bony = SpectralField(grid, sum(parts.values()), False)
    gap = (bony - point).l2_norm()
    ref = max(point.l2_norm(), floor)
    norms = {
        name: SpectralField(grid, arr, False).l2_norm() for name, arr in parts.items()
    }
    return ProductReport(bony, point, gap / ref, norms)

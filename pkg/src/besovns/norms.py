"""Lebesgue, Besov and time-space norms on fields and time series.

A homogeneous Besov seminorm is the l^q aggregate over shells j of
2^(j*s) * ||block_j u||_{L^p}.  Time-space ("Chemin-Lerner") norms take
the time norm per shell first and aggregate over shells afterwards;
the opposite order gives the usual Lebesgue-in-time Besov norm.  Time
integrals use trapezoid quadrature on the uniform grid; alpha = inf and
the sup-norm variant both reduce to the node max on a finite grid.

Composite path-space norms are maxima of their constituents:

* ``x_norm``: the admissible-range path norm, which degenerates to a
  Lebesgue norm L^alpha_T L^ell exactly on the critical index surface.
* ``y_norm``: max of a shell-summed norm of smoothness eps and a
  Lebesgue-in-time sup norm.
* ``z_norm``: max of the smoothing (L~^1, s+2) and persistence
  (sup-in-time, s) constituents.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    Grid,
    SpectralField,
    dyadic_block,
    dyadic_range,
    heat_flow,
    lp_norm,
)

INF = float("inf")


@dataclass(frozen=True)
class BesovIndex:
    s: float
    p: float
    q: float

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError("integrability indices must lie in [1, inf]")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform nodes t_m = m*T/M for m = 0..M."""

    T: float
    M: int

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("horizon must be positive")
        if self.M < 2:
            raise ValueError("need at least 2 steps")

    @property
    def h(self) -> float:
        return self.T / self.M

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.M + 1)

    def node_index(self, t: float, tol: float = 1e-12) -> int:
        idx = round(t / self.h)
        if not (0 <= idx <= self.M) or abs(idx * self.h - t) > tol * max(self.T, 1.0):
            raise ValueError(f"t={t} is not a node of the time grid")
        return idx


@dataclass(frozen=True)
class TimeSeriesField:
    """One spectral field per node of a uniform time grid.

    ``values`` has shape (M+1, m) + grid.shape and is treated as immutable.
    """

    grid: Grid
    tgrid: TimeGrid
    values: np.ndarray
    homogeneous: bool = False

    def __post_init__(self):
        want = (self.tgrid.M + 1,)
        if self.values.shape[:1] != want or self.values.shape[2:] != self.grid.shape:
            raise ValueError(
                f"value array shape {self.values.shape} does not match "
                f"(M+1, m) + {self.grid.shape}"
            )

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def node(self, i: int) -> SpectralField:
        return SpectralField(self.grid, self.values[i].copy(), self.homogeneous)

    @classmethod
    def from_fields(cls, tgrid: TimeGrid, fields: list[SpectralField]) -> "TimeSeriesField":
        if len(fields) != tgrid.M + 1:
            raise ValueError("need one field per node")
        grid = fields[0].grid
        values = np.stack([f.coeffs for f in fields])
        return cls(grid, tgrid, values, all(f.homogeneous for f in fields))

    def shifted(self, m0: int) -> "TimeSeriesField":
        """Restriction to nodes m0..M, re-anchored at time zero."""
        if not (0 < m0 < self.tgrid.M):
            raise ValueError("shift node must be interior")
        sub = TimeGrid(self.tgrid.T - m0 * self.tgrid.h, self.tgrid.M - m0)
        return TimeSeriesField(self.grid, sub, self.values[m0:].copy(), self.homogeneous)

    def __add__(self, other: "TimeSeriesField") -> "TimeSeriesField":
        _check_compatible(self, other)
        return TimeSeriesField(
            self.grid, self.tgrid, self.values + other.values,
            self.homogeneous and other.homogeneous,
        )

    def __sub__(self, other: "TimeSeriesField") -> "TimeSeriesField":
        _check_compatible(self, other)
        return TimeSeriesField(
            self.grid, self.tgrid, self.values - other.values,
            self.homogeneous and other.homogeneous,
        )

    def __mul__(self, scalar) -> "TimeSeriesField":
        return TimeSeriesField(self.grid, self.tgrid, self.values * complex(scalar), self.homogeneous)

    __rmul__ = __mul__


def _check_compatible(a: TimeSeriesField, b: TimeSeriesField):
    if a.grid != b.grid or a.tgrid != b.tgrid:
        raise ValueError("time series are not on matching grids")


def constant_series(f: SpectralField, tgrid: TimeGrid) -> TimeSeriesField:
    values = np.broadcast_to(f.coeffs, (tgrid.M + 1,) + f.coeffs.shape).copy()
    return TimeSeriesField(f.grid, tgrid, values, f.homogeneous)


# ---------------------------------------------------------------------------
# reports


def _json_num(x):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


@dataclass
class NormReport:
    """A computed (semi)norm with its per-shell / per-time breakdown."""

    kind: str
    value: float
    index: dict
    per_shell: list = field(default_factory=list)
    per_time: list | None = None
    parts: list = field(default_factory=list)  # constituent reports of composites

    def to_json(self) -> str:
        payload = {
            "norm_kind": self.kind,
            "index": {k: _json_num(v) if isinstance(v, float) else v for k, v in self.index.items()},
            "value": self.value,
            "per_shell": [[int(j), float(v)] for j, v in self.per_shell],
            "per_time": None
            if self.per_time is None
            else [[float(t), float(v)] for t, v in self.per_time],
        }
        return json.dumps(payload, sort_keys=True)

    def check_consistency(self, tol: float = 1e-12):
        """Re-aggregate the breakdown and compare with the stored value."""
        if self.parts:
            agg = max(p.value for p in self.parts)
        elif self.per_shell:
            agg = _lq([v for _, v in self.per_shell], self.index.get("q", INF))
        elif self.per_time is not None:
            agg = _time_lp(
                np.array([v for _, v in self.per_time]),
                self.index.get("alpha", INF),
                self.index.get("h", 1.0),
            )
        else:
            agg = 0.0
        if abs(agg - self.value) > tol * max(self.value, 1.0):
            raise AssertionError(f"norm breakdown inconsistent: {agg} vs {self.value}")
        return True


def _lq(vals, q: float) -> float:
    vals = np.asarray(vals, dtype=np.float64)
    if vals.size == 0:
        return 0.0
    if math.isinf(q):
        return float(np.max(vals))
    return float(np.sum(vals**q) ** (1.0 / q))


def _time_lp(samples: np.ndarray, alpha: float, h: float) -> float:
    """Trapezoid L^alpha norm of nodal samples; node max for alpha = inf."""
    if math.isinf(alpha):
        return float(np.max(samples))
    powed = samples**alpha
    integral = h * (np.sum(powed) - 0.5 * (powed[0] + powed[-1]))
    return float(integral ** (1.0 / alpha))


# ---------------------------------------------------------------------------
# spatial norms


def besov_norm(u: SpectralField, idx: BesovIndex) -> NormReport:
    """l^q over shells of 2^(j s) ||block_j u||_{L^p}."""
    rng = dyadic_range(u.grid)
    per_shell = []
    for j in rng.shells():
        v = lp_norm(dyadic_block(u, j), idx.p)
        per_shell.append((j, 2.0 ** (j * idx.s) * v))
    value = _lq([v for _, v in per_shell], idx.q)
    return NormReport(
        kind="besov",
        value=value,
        index={"s": idx.s, "p": idx.p, "q": idx.q},
        per_shell=per_shell,
    )


def heat_char_norm(u: SpectralField, s: float, probe_times: np.ndarray | None = None) -> float:
    """sup over probe times of t^(-s/2) ||heat_flow(u, t)||_inf, for s < 0."""
    if s >= 0:
        raise ValueError("heat characterisation requires s < 0")
    if probe_times is None:
        rng = dyadic_range(u.grid)
        lo = 2.0 ** (-2 * rng.j_max - 2)
        hi = 2.0 ** (-2 * rng.j_min + 2)
        probe_times = np.geomspace(lo, hi, 64)
    best = 0.0
    for t in probe_times:
        best = max(best, float(t) ** (-s / 2.0) * lp_norm(heat_flow(u, float(t)), INF))
    return best


# ---------------------------------------------------------------------------
# time-series norms


def block_norm_table(ts: TimeSeriesField, p: float) -> tuple[list[int], np.ndarray]:
    """||block_j u(t_m)||_{L^p} for every shell j and node m."""
    rng = dyadic_range(ts.grid)
    js = list(rng.shells())
    table = np.zeros((len(js), ts.tgrid.M + 1))
    for mi in range(ts.tgrid.M + 1):
        u = ts.node(mi)
        for ji, j in enumerate(js):
            table[ji, mi] = lp_norm(dyadic_block(u, j), p)
    return js, table


def chemin_lerner_norm(ts: TimeSeriesField, alpha: float, idx: BesovIndex) -> NormReport:
    """Shell-wise time norm first, then the weighted l^q shell aggregate."""
    js, table = block_norm_table(ts, idx.p)
    return chemin_lerner_from_table(js, table, ts.tgrid, alpha, idx)


def chemin_lerner_from_table(
    js: list[int], table: np.ndarray, tgrid: TimeGrid, alpha: float, idx: BesovIndex
) -> NormReport:
    per_shell = []
    for ji, j in enumerate(js):
        tn = _time_lp(table[ji], alpha, tgrid.h)
        per_shell.append((j, 2.0 ** (j * idx.s) * tn))
    value = _lq([v for _, v in per_shell], idx.q)
    return NormReport(
        kind="chemin_lerner",
        value=value,
        index={"alpha": alpha, "s": idx.s, "p": idx.p, "q": idx.q},
        per_shell=per_shell,
    )


def time_lebesgue_norm(ts: TimeSeriesField, alpha: float, p: float) -> NormReport:
    """L^alpha in time of the spatial L^p norm (norms in the opposite order)."""
    per_time = [
        (float(t), lp_norm(ts.node(mi), p)) for mi, t in enumerate(ts.tgrid.nodes)
    ]
    value = _time_lp(np.array([v for _, v in per_time]), alpha, ts.tgrid.h)
    return NormReport(
        kind="time_lebesgue",
        value=value,
        index={"alpha": alpha, "p": p, "h": ts.tgrid.h},
        per_time=per_time,
    )


def time_besov_norm(ts: TimeSeriesField, alpha: float, idx: BesovIndex) -> NormReport:
    """L^alpha in time of the nodal Besov norms (for order-of-norms comparisons)."""
    per_time = [
        (float(t), besov_norm(ts.node(mi), idx).value)
        for mi, t in enumerate(ts.tgrid.nodes)
    ]
    value = _time_lp(np.array([v for _, v in per_time]), alpha, ts.tgrid.h)
    return NormReport(
        kind="time_besov",
        value=value,
        index={"alpha": alpha, "s": idx.s, "p": idx.p, "q": idx.q, "h": ts.tgrid.h},
        per_time=per_time,
    )


# ---------------------------------------------------------------------------
# admissible path spaces


@dataclass(frozen=True)
class AdmissibilityVerdict:
    ok: bool
    critical: bool
    p_alpha_eps: float
    s_ell: float
    reason: str


def critical_integrability(alpha: float, eps: float, n: int) -> float:
    """The integrability exponent on the critical surface, n/(1 - eps - 2/alpha)."""
    inv_alpha = 0.0 if math.isinf(alpha) else 1.0 / alpha
    denom = 1.0 - eps - 2.0 * inv_alpha
    if abs(denom) < 1e-14:
        return INF
    if denom < 0:
        return -1.0  # no admissible exponent
    return n / denom


def check_ale(alpha: float, ell: float, eps: float, n: int) -> AdmissibilityVerdict:
    """Decide whether (alpha, ell, eps) index an admissible path space."""
    inv_alpha = 0.0 if math.isinf(alpha) else 1.0 / alpha
    s_ell = -1.0 + (0.0 if math.isinf(ell) else n / ell)
    p_crit = critical_integrability(alpha, eps, n)
    if not (1 <= alpha) or not (1 <= ell) or not (0 < eps <= 1):
        return AdmissibilityVerdict(False, False, p_crit, s_ell,
                                    "need alpha, ell >= 1 and eps in (0, 1]")
    gap = s_ell + eps + 2.0 * inv_alpha
    if abs(gap) <= 1e-12:
        if p_crit != INF and p_crit < 2 - 1e-12:
            return AdmissibilityVerdict(
                False, True, p_crit, s_ell,
                f"critical exponent {p_crit:.6g} lies below 2")
        return AdmissibilityVerdict(True, True, p_crit, s_ell, "critical index surface")
    if gap > 0:
        if p_crit == INF or p_crit < 0 or math.isinf(ell) or not (ell < p_crit):
            return AdmissibilityVerdict(
                False, False, p_crit, s_ell,
                "subcritical case needs ell < critical exponent < inf")
        if not (2 < p_crit < INF):
            return AdmissibilityVerdict(
                False, False, p_crit, s_ell,
                f"critical exponent {p_crit:.6g} outside (2, inf)")
        s2 = -1.0 + n / 2.0
        if not (-s2 < eps + 2.0 * inv_alpha < 1.0):
            return AdmissibilityVerdict(
                False, False, p_crit, s_ell,
                "eps + 2/alpha outside the admissible open interval")
        return AdmissibilityVerdict(True, False, p_crit, s_ell, "subcritical regularity")
    return AdmissibilityVerdict(
        False, False, p_crit, s_ell,
        "regularity gap s_ell + eps + 2/alpha is negative")


def x_norm(ts: TimeSeriesField, alpha: float, ell: float, eps: float) -> NormReport:
    """Path-space norm for an admissible (alpha, ell, eps) triple."""
    verdict = check_ale(alpha, ell, eps, ts.grid.n)
    if not verdict.ok:
        raise ValueError(f"inadmissible (alpha, ell, eps): {verdict.reason}")
    if verdict.critical:
        rep = time_lebesgue_norm(ts, alpha, ell)
        rep.kind = "x_critical"
        rep.index.update({"ell": ell, "eps": eps})
        return rep
    inv_alpha = 0.0 if math.isinf(alpha) else 1.0 / alpha
    s = verdict.s_ell + eps + 2.0 * inv_alpha
    rep = chemin_lerner_norm(ts, alpha, BesovIndex(s, ell, INF))
    rep.kind = "x_subcritical"
    rep.index.update({"ell": ell, "eps": eps})
    return rep


def y_norm(ts: TimeSeriesField, eps: float) -> NormReport:
    """max of the eps-smoothness shell norm and the Lebesgue-in-time sup norm."""
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    smooth = chemin_lerner_norm(ts, 4.0 / (2.0 + eps), BesovIndex(eps, INF, INF))
    flat = time_lebesgue_norm(ts, 4.0 / (2.0 - eps), INF)
    rep = NormReport(
        kind="y",
        value=max(smooth.value, flat.value),
        index={"eps": eps},
        per_shell=(smooth if smooth.value >= flat.value else flat).per_shell,
        parts=[smooth, flat],
    )
    rep.per_time = flat.per_time
    return rep


def z_norm(ts: TimeSeriesField, s: float, p: float, q: float) -> NormReport:
    """max of the L~^1 (smoothing, s+2) and sup-in-time (s) constituents."""
    if s <= -1:
        raise ValueError("persistence regularity must exceed -1")
    smooth = chemin_lerner_norm(ts, 1.0, BesovIndex(s + 2.0, p, q))
    flat = chemin_lerner_norm(ts, INF, BesovIndex(s, p, q))
    winner = smooth if smooth.value >= flat.value else flat
    return NormReport(
        kind="z",
        value=max(smooth.value, flat.value),
        index={"s": s, "p": p, "q": q},
        per_shell=winner.per_shell,
        parts=[smooth, flat],
    )


def z_norm_from_table(
    js: list[int], table: np.ndarray, tgrid: TimeGrid, s: float, p: float, q: float
) -> float:
    smooth = chemin_lerner_from_table(js, table, tgrid, 1.0, BesovIndex(s + 2.0, p, q))
    flat = chemin_lerner_from_table(js, table, tgrid, INF, BesovIndex(s, p, q))
    return max(smooth.value, flat.value)


# ---------------------------------------------------------------------------
# inequality suite


def _ratio(num: float, den: float, floor: float = 1e-300) -> float:
    return num / max(den, floor)


def inequality_suite(corpus: list[SpectralField]) -> dict:
    """Worst-case constants of the embedding/interpolation inequalities.

    Exact-constant inequalities (Lebesgue-from-shell-sum and the Hoelder
    interpolation of indices) must come out <= 1 up to rounding; the
    implicit-constant ones just get their corpus maximum recorded so that
    refinement studies can compare them across resolutions.
    """
    if not corpus:
        raise ValueError("corpus must be nonempty")
    out: dict[str, dict] = {}

    # Lebesgue norm below the shell-sum norm (exact constant 1).
    for p in (1.0, 2.0, INF):
        worst = 0.0
        for u in corpus:
            worst = max(worst, _ratio(lp_norm(u, p), besov_norm(u, BesovIndex(0.0, p, 1.0)).value))
        out[f"lebesgue_le_shell_sum_p{p:g}"] = {"ratio": worst, "exact": True}

    # Hoelder interpolation across indices (exact constant 1).
    for lam, (s1, p1, q1), (s2, p2, q2) in (
        (0.5, (-1.0, 2.0, 2.0), (1.0, 2.0, 2.0)),
        (0.3, (0.0, 1.0, 1.0), (0.5, INF, INF)),
        (0.5, (-0.5, 2.0, 1.0), (0.75, 4.0, 4.0)),
    ):
        s = lam * s1 + (1 - lam) * s2
        p = 1.0 / (lam / p1 + (1 - lam) / p2)
        q = 1.0 / (lam / q1 + (1 - lam) / q2)
        worst = 0.0
        for u in corpus:
            lhs = besov_norm(u, BesovIndex(s, p, q)).value
            rhs = (
                besov_norm(u, BesovIndex(s1, p1, q1)).value ** lam
                * besov_norm(u, BesovIndex(s2, p2, q2)).value ** (1 - lam)
            )
            worst = max(worst, _ratio(lhs, rhs))
        out[f"holder_interpolation_lam{lam:g}_s{s1:g}_{s2:g}"] = {"ratio": worst, "exact": True}

    # Besov embedding with increasing integrability (implicit constant).
    for (p1, p2), (q1, q2), sigma in (
        ((1.0, 2.0), (1.0, 2.0), 0.4),
        ((2.0, INF), (2.0, INF), -0.3),
        ((2.0, 4.0), (1.0, 1.0), 0.0),
    ):
        n = corpus[0].grid.n
        inv = lambda r: 0.0 if math.isinf(r) else 1.0 / r
        worst = 0.0
        for u in corpus:
            lhs = besov_norm(u, BesovIndex(n * inv(p2) + sigma, p2, q2)).value
            rhs = besov_norm(u, BesovIndex(n * inv(p1) + sigma, p1, q1)).value
            worst = max(worst, _ratio(lhs, rhs))
        out[f"embedding_p{p1:g}to{p2:g}_sigma{sigma:g}"] = {"ratio": worst, "exact": False}

    # Shell-sup norm below the Lebesgue norm (implicit constant).
    for p in (1.0, 2.0, INF):
        worst = 0.0
        for u in corpus:
            worst = max(worst, _ratio(besov_norm(u, BesovIndex(0.0, p, INF)).value, lp_norm(u, p)))
        out[f"shell_sup_le_lebesgue_p{p:g}"] = {"ratio": worst, "exact": False}

    # Geometric interpolation: ratio times lam(1-lam)(s2-s1) recorded.
    for lam, s1, s2, p in (
        (0.5, -1.0, 1.0, 2.0),
        (0.3, -0.5, 0.75, INF),
        (0.7, 0.0, 0.8, 2.0),
    ):
        s = lam * s1 + (1 - lam) * s2
        worst = 0.0
        for u in corpus:
            lhs = besov_norm(u, BesovIndex(s, p, 1.0)).value
            rhs = (
                besov_norm(u, BesovIndex(s1, p, INF)).value ** lam
                * besov_norm(u, BesovIndex(s2, p, INF)).value ** (1 - lam)
            )
            worst = max(worst, _ratio(lhs, rhs) * lam * (1 - lam) * (s2 - s1))
        out[f"geometric_interpolation_lam{lam:g}_s{s1:g}_{s2:g}"] = {"ratio": worst, "exact": False}

    # Heat-flow characterisation band of negative-smoothness norms.
    for s in (-0.5, -0.25):
        lo, hi = INF, 0.0
        for u in corpus:
            r = _ratio(heat_char_norm(u, s), besov_norm(u, BesovIndex(s, INF, INF)).value)
            lo, hi = min(lo, r), max(hi, r)
        out[f"heat_characterisation_s{s:g}"] = {"band_low": lo, "band_high": hi, "exact": False,
                                                "ratio": hi}
    return out

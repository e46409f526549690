"""Mild-solution machinery: heat source, Duhamel integral, bilinear terms,
and the Picard fixed-point construction with contraction tracking.

The velocity field solves the fixed-point problem

    u = heat_source(f) - bilinear(u, u),

where ``bilinear`` chains the dealiased tensor product, the projected
divergence and the Duhamel integral.  The Duhamel integral is evaluated
per Fourier mode with an integrating-factor quadrature that treats the
source as piecewise linear in time and the heat factor exactly, so it is
unconditionally stable, exact on per-mode affine sources, and satisfies
the restart identity exactly at grid nodes.

Contraction bookkeeping follows the classical quadratic-root argument:
with g0 the rescaled size of the first iterate and g0 <= 1/4, iterates
stay inside the ball of radius lambda_root(g0).smaller and successive
differences contract at rate at most twice that root.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .norms import (
    INF,
    BesovIndex,
    NormReport,
    TimeGrid,
    TimeSeriesField,
    _lq,
    _time_lp,
    besov_norm,
    block_norm_table,
    chemin_lerner_from_table,
    lp_norm,
    time_lebesgue_norm,
    y_norm,
    z_norm,
    z_norm_from_table,
)
from .paraproduct import (
    TailMassRecorder,
    _flush_tail,
    bony_product,
    pointwise_tensor,
    projected_divergence_blockwise,
)
from .spectral import Grid, SpectralField, heat_flow, leray_project, projected_divergence


class SmallnessError(RuntimeError):
    """Raised when the solvability gate fails and no override is requested."""


class PicardDivergenceError(RuntimeError):
    """Raised when iterates blow past the divergence guard."""


# ---------------------------------------------------------------------------
# calibration table


@dataclass
class CalibrationTable:
    """Empirically calibrated constants for the smallness and contraction gates.

    ``bilinear_z`` bounds the bilinear term in the critical-regularity
    space; ``y_embedding[eps]`` bounds the path norm by the horizon-scaled
    critical norm; ``heat_z`` and ``heat_y`` bound the heat flow of the
    initial data in the two gated norms.  Every entry is the corpus
    maximum of the corresponding ratio times a safety factor.
    """

    bilinear_z: float
    heat_z: float
    heat_y: float
    y_embedding: dict[float, float]
    extras: dict = field(default_factory=dict)
    corpus_digest: str = ""
    safety_factor: float = 1.5

    def y_embedding_at(self, eps: float) -> float:
        keys = sorted(self.y_embedding)
        if not keys:
            raise ValueError("calibration table has no path-embedding entries")
        for k in keys:
            if abs(k - eps) < 1e-12:
                return self.y_embedding[k]
        if eps < keys[0] or eps > keys[-1]:
            raise ValueError(
                f"eps={eps} outside calibrated range [{keys[0]}, {keys[-1]}]"
            )
        hi = next(k for k in keys if k > eps)
        lo = max(k for k in keys if k < eps)
        w = (eps - lo) / (hi - lo)
        return (1 - w) * self.y_embedding[lo] + w * self.y_embedding[hi]

    def smallness_constant_besov(self) -> float:
        """Constant of the first smallness clause (critical Besov datum)."""
        return 4.0 * self.bilinear_z * self.heat_z

    def smallness_constant_linf(self, eps: float) -> float:
        """Constant of the second smallness clause (bounded datum)."""
        return 4.0 * self.bilinear_z * self.y_embedding_at(eps) * self.heat_y / eps

    def to_json(self) -> str:
        return json.dumps(
            {
                "bilinear_z": self.bilinear_z,
                "heat_z": self.heat_z,
                "heat_y": self.heat_y,
                "y_embedding": {f"{k:.6g}": v for k, v in sorted(self.y_embedding.items())},
                "extras": self.extras,
                "corpus_digest": self.corpus_digest,
                "safety_factor": self.safety_factor,
            },
            sort_keys=True,
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "CalibrationTable":
        data = json.loads(text)
        return cls(
            bilinear_z=data["bilinear_z"],
            heat_z=data["heat_z"],
            heat_y=data["heat_y"],
            y_embedding={float(k): v for k, v in data["y_embedding"].items()},
            extras=data.get("extras", {}),
            corpus_digest=data.get("corpus_digest", ""),
            safety_factor=data.get("safety_factor", 1.5),
        )


@dataclass
class SolverConfig:
    eps: float
    T: float
    M: int
    s: float = 0.0
    p: float = INF
    q: float = INF
    tol: float = 1e-10
    max_iter: int = 100
    calibration: CalibrationTable | None = None
    leray_project_data: bool = True
    override_smallness: bool = False
    keep_differences: bool = True

    def __post_init__(self):
        if not (0 < self.eps < 1):
            raise ValueError("eps must lie in (0, 1)")
        if self.s <= -1:
            raise ValueError("persistence regularity must exceed -1")
        if self.T <= 0 or self.M < 2:
            raise ValueError("need T > 0 and M >= 2")


# ---------------------------------------------------------------------------
# heat source and Duhamel integral


def heat_source(f: SpectralField, tgrid: TimeGrid) -> TimeSeriesField:
    """Heat flow of the initial datum sampled at the grid nodes."""
    values = np.empty((tgrid.M + 1,) + f.coeffs.shape, dtype=np.complex128)
    k2 = f.grid.frequency_norm_sq()
    for mi, t in enumerate(tgrid.nodes):
        values[mi] = f.coeffs * np.exp(-t * k2)
    return TimeSeriesField(f.grid, tgrid, values, f.homogeneous)


def _phi1(z: np.ndarray) -> np.ndarray:
    out = np.ones_like(z)
    nz = z != 0
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


def _phi2(z: np.ndarray) -> np.ndarray:
    # (e^z - 1 - z)/z^2 with a series fallback where the subtraction cancels
    out = np.full_like(z, 0.5)
    big = np.abs(z) > 1e-4
    zb = z[big]
    out[big] = (np.expm1(zb) - zb) / zb**2
    small = ~big & (z != 0)
    zs = z[small]
    out[small] = 0.5 + zs / 6.0 + zs**2 / 24.0 + zs**3 / 120.0
    return out


def duhamel(w: TimeSeriesField) -> TimeSeriesField:
    """Time convolution with the heat semigroup, node by node.

    Per mode k the integral of exp(-(t-s)|k|^2) w(s, k) ds is accumulated
    with the recursion G(t+h) = E G(t) + w1 w(t) + w2 w(t+h), where E is
    the exact heat factor over one step and (w1, w2) are the exact weights
    of a source linear on the step.  Requires a mean-zero source at every
    node.
    """
    grid = w.grid
    origin = (slice(None), slice(None)) + (0,) * grid.n
    if np.any(w.values[origin] != 0):
        raise ValueError("Duhamel integral needs a mean-zero source at every node")
    k2 = grid.frequency_norm_sq()
    h = w.tgrid.h
    z = -h * k2
    E = np.exp(z)
    w2 = h * _phi2(z)
    w1 = h * _phi1(z) - w2
    out = np.zeros_like(w.values)
    for mi in range(1, w.tgrid.M + 1):
        out[mi] = E * out[mi - 1] + w1 * w.values[mi - 1] + w2 * w.values[mi]
    return TimeSeriesField(grid, w.tgrid, out, True)


def bilinear_term(u: TimeSeriesField, v: TimeSeriesField) -> TimeSeriesField:
    """Duhamel integral of the projected divergence of the tensor product."""
    if u.grid != v.grid or u.tgrid != v.tgrid:
        raise ValueError("operands live on different grids")
    src = np.empty(
        (u.tgrid.M + 1, u.grid.n) + u.grid.shape, dtype=np.complex128
    )
    with TailMassRecorder() as tails:
        for mi in range(u.tgrid.M + 1):
            W = pointwise_tensor(u.node(mi), v.node(mi))
            src[mi] = projected_divergence(W).coeffs
    _flush_tail(tails.max_tail, "bilinear term")
    return duhamel(TimeSeriesField(u.grid, u.tgrid, src, True))


def bilinear_term_bony(u: TimeSeriesField, v: TimeSeriesField) -> TimeSeriesField:
    """Same as bilinear_term but through the shell-decomposed product and the
    blockwise projected divergence."""
    if u.grid != v.grid or u.tgrid != v.tgrid:
        raise ValueError("operands live on different grids")
    src = np.empty(
        (u.tgrid.M + 1, u.grid.n) + u.grid.shape, dtype=np.complex128
    )
    with TailMassRecorder() as tails:
        for mi in range(u.tgrid.M + 1):
            W = bony_product(u.node(mi), v.node(mi))
            src[mi] = projected_divergence_blockwise(W).coeffs
    _flush_tail(tails.max_tail, "bilinear term (shell form)")
    return duhamel(TimeSeriesField(u.grid, u.tgrid, src, True))


# ---------------------------------------------------------------------------
# smallness, contraction roots, gated norms


@dataclass
class SmallnessResult:
    holds: bool
    margin: float
    guaranteed_T: float
    clause_besov: float
    clause_linf: float
    horizon_besov: float
    horizon_linf: float


def smallness_condition(
    f: SpectralField, T: float, eps: float, calib: CalibrationTable
) -> SmallnessResult:
    """Evaluate the two-clause solvability gate at horizon T.

    Clause one scales the critical Besov norm of the datum by T^(eps/2),
    clause two the sup norm by T^(1/2); the gate holds when the smaller
    clause is below one.  ``guaranteed_T`` is the supremum horizon at
    which the gate still holds (the larger of the two clause horizons).
    """
    if calib is None:
        raise ValueError("smallness gate needs a calibration table")
    c1 = calib.smallness_constant_besov() / (eps * (1.0 - eps))
    c2 = calib.smallness_constant_linf(eps)
    nb = besov_norm(f, BesovIndex(-1.0 + eps, INF, INF)).value
    ni = lp_norm(f, INF)
    clause1 = c1 * T ** (eps / 2.0) * nb
    clause2 = c2 * math.sqrt(T) * ni
    horizon1 = INF if nb == 0 else (1.0 / (c1 * nb)) ** (2.0 / eps)
    horizon2 = INF if ni == 0 else (1.0 / (c2 * ni)) ** 2
    smaller = min(clause1, clause2)
    return SmallnessResult(
        holds=smaller < 1.0,
        margin=1.0 - smaller,
        guaranteed_T=max(horizon1, horizon2),
        clause_besov=clause1,
        clause_linf=clause2,
        horizon_besov=horizon1,
        horizon_linf=horizon2,
    )


@dataclass(frozen=True)
class ContractionRoots:
    smaller: float
    larger: float


def lambda_root(g0: float) -> ContractionRoots:
    """Roots of x = g0 + x^2; the smaller root bounds every Picard iterate."""
    if g0 < 0:
        raise ValueError("g0 must be nonnegative")
    if g0 > 0.25:
        raise ValueError(f"no real contraction root: g0={g0} exceeds 1/4")
    disc = math.sqrt(1.0 - 4.0 * g0)
    return ContractionRoots(smaller=(1.0 - disc) / 2.0, larger=(1.0 + disc) / 2.0)


def gated_norms(
    ts: TimeSeriesField, eps: float, T: float, calib: CalibrationTable
) -> tuple[float, float]:
    """The two rescaled smallness functionals (critical-norm and path-norm
    flavours) whose unit ball makes the bilinear term submultiplicative."""
    a = calib.bilinear_z
    v0 = a / (eps * (1.0 - eps)) * T ** (eps / 2.0) * z_norm(ts, -1.0 + eps, INF, INF).value
    v1 = (
        a
        * calib.y_embedding_at(eps)
        / eps
        * T ** (eps / 4.0)
        * y_norm(ts, eps).value
    )
    return v0, v1


# ---------------------------------------------------------------------------
# Picard iteration


@dataclass
class PicardTrace:
    eps: float
    g0: float
    gate_index: int  # 0: critical-norm gate, 1: path-norm gate
    contraction_root: float | None
    smallness_held: bool
    proof_gate_held: bool
    iterations: int = 0
    v0_norms: list = field(default_factory=list)
    v1_norms: list = field(default_factory=list)
    diff_z: list = field(default_factory=list)
    diff_v: list = field(default_factory=list)
    ratios_v: list = field(default_factory=list)
    residual_z: float = math.nan
    verdict: str = "pending"
    max_dealiasing_tail: float = 0.0
    initial: TimeSeriesField | None = None
    differences: list = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "eps": self.eps,
            "g0": self.g0,
            "gate_index": self.gate_index,
            "contraction_root": self.contraction_root,
            "smallness_held": self.smallness_held,
            "proof_gate_held": self.proof_gate_held,
            "iterations": self.iterations,
            "v0_norms": self.v0_norms,
            "v1_norms": self.v1_norms,
            "diff_z": self.diff_z,
            "diff_v": self.diff_v,
            "ratios_v": self.ratios_v,
            "residual_z": self.residual_z,
            "verdict": self.verdict,
            "max_dealiasing_tail": self.max_dealiasing_tail,
        }
        return json.dumps(payload, sort_keys=True, indent=2)


@dataclass
class SolutionRecord:
    u: TimeSeriesField
    eps: float
    besov_series: np.ndarray  # critical Besov norm per node
    linf_series: np.ndarray
    z_running: np.ndarray  # persistence-index norm of the restriction to (0, t]
    rho_series: np.ndarray | None = None
    guaranteed_series: np.ndarray | None = None
    restart_metadata: dict = field(default_factory=dict)


def solution_record(
    u: TimeSeriesField, eps: float, s: float, p: float, q: float
) -> SolutionRecord:
    nodes = u.tgrid.nodes
    besov_series = np.array(
        [besov_norm(u.node(mi), BesovIndex(-1.0 + eps, INF, INF)).value for mi in range(len(nodes))]
    )
    linf_series = np.array([lp_norm(u.node(mi), INF) for mi in range(len(nodes))])
    js, table = block_norm_table(u, p)
    h = u.tgrid.h
    z_running = np.zeros(len(nodes))
    for mi in range(1, len(nodes)):
        sub = table[:, : mi + 1]
        smooth = _lq(
            [2.0 ** (j * (s + 2.0)) * _time_lp(sub[ji], 1.0, h) for ji, j in enumerate(js)], q
        )
        flat = _lq(
            [2.0 ** (j * s) * _time_lp(sub[ji], INF, h) for ji, j in enumerate(js)], q
        )
        z_running[mi] = max(smooth, flat)
    return SolutionRecord(u, eps, besov_series, linf_series, z_running)


def picard_solve(
    f: SpectralField, config: SolverConfig
) -> tuple[SolutionRecord, PicardTrace]:
    """Construct the mild solution by Picard iteration and track contraction.

    The first iterate is the heat flow of the datum; each step maps
    m -> heat_source(f) - bilinear_term(m, m).  Iteration stops when the
    successive difference in the critical-regularity norm drops below the
    configured tolerance.  Refuses to run when the smallness gate fails,
    unless ``override_smallness`` is set, in which case a divergence guard
    at four times the initial norm is armed.
    """
    if config.calibration is None:
        raise ValueError("picard_solve needs a calibration table (run calibrate first)")
    grid = f.grid
    if config.leray_project_data and f.m == grid.n:
        f = leray_project(f)
    tgrid = TimeGrid(config.T, config.M)
    eps = config.eps

    small = smallness_condition(f, config.T, eps, config.calibration)
    u0 = heat_source(f, tgrid)
    v0, v1 = gated_norms(u0, eps, config.T, config.calibration)
    gate_index = 0 if v0 <= v1 else 1
    g0 = min(v0, v1)
    proof_gate = 4.0 * g0 < 1.0
    if not small.holds and not config.override_smallness:
        raise SmallnessError(
            f"smallness gate fails (clauses {small.clause_besov:.3g}, "
            f"{small.clause_linf:.3g}); pass override_smallness to run anyway"
        )
    root = lambda_root(g0).smaller if g0 <= 0.25 else None

    trace = PicardTrace(
        eps=eps,
        g0=g0,
        gate_index=gate_index,
        contraction_root=root,
        smallness_held=small.holds,
        proof_gate_held=proof_gate,
        initial=u0 if config.keep_differences else None,
    )
    trace.v0_norms.append(v0)
    trace.v1_norms.append(v1)

    z0 = z_norm(u0, -1.0 + eps, INF, INF).value
    guard = 4.0 * max(z0, 1e-300)

    current = u0
    verdict = "max_iterations"
    with TailMassRecorder() as tails:
        for it in range(1, config.max_iter + 1):
            nxt = u0 - bilinear_term(current, current)
            diff = nxt - current
            dz = z_norm(diff, -1.0 + eps, INF, INF).value
            dv = gated_norms(diff, eps, config.T, config.calibration)[gate_index]
            nv0, nv1 = gated_norms(nxt, eps, config.T, config.calibration)
            trace.v0_norms.append(nv0)
            trace.v1_norms.append(nv1)
            trace.diff_z.append(dz)
            trace.diff_v.append(dv)
            if len(trace.diff_v) >= 2 and trace.diff_v[-2] > 0:
                trace.ratios_v.append(trace.diff_v[-1] / trace.diff_v[-2])
            if config.keep_differences:
                trace.differences.append(diff)
            trace.iterations = it
            current = nxt
            zc = z_norm(current, -1.0 + eps, INF, INF).value
            if zc > guard:
                trace.verdict = "diverged"
                trace.max_dealiasing_tail = tails.max_tail
                raise PicardDivergenceError(
                    f"iterate norm {zc:.3g} exceeded guard {guard:.3g} at iteration {it}"
                )
            if dz < config.tol:
                verdict = "converged"
                break

        residual = z_norm(
            current - u0 + bilinear_term(current, current), -1.0 + eps, INF, INF
        ).value
    trace.residual_z = residual
    trace.verdict = verdict
    trace.max_dealiasing_tail = tails.max_tail

    record = solution_record(current, eps, config.s, config.p, config.q)
    if config.calibration is not None:
        rho, guaranteed = blowup_monitor_series(record, config.T, eps, config.calibration)
        record.rho_series = rho
        record.guaranteed_series = guaranteed
    return record, trace


# ---------------------------------------------------------------------------
# persistence recursion


@dataclass
class PersistenceTrace:
    s: float
    p: float
    q: float
    lam: float
    alpha: list
    cumulative: list
    beta: list
    gamma: list
    plateaued: bool
    limit_z: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "s": self.s,
                "p": _num(self.p),
                "q": _num(self.q),
                "lambda": self.lam,
                "alpha": self.alpha,
                "cumulative": self.cumulative,
                "beta": self.beta,
                "gamma": self.gamma,
                "plateaued": self.plateaued,
                "limit_z": self.limit_z,
            },
            sort_keys=True,
            indent=2,
        )


def _num(x):
    return x if math.isfinite(x) else "inf"


def admissible_lambda(s: float, eps: float) -> float:
    """A valid interpolation weight for the persistence recursion."""
    gap = s + 1.0 - eps
    if gap <= 0:
        return 0.5
    return 0.5 * min(1.0, (1.0 - eps) / gap)


def persistence_check(
    trace: PicardTrace, s: float, p: float, q: float, lam: float,
    plateau_tol: float = 1e-9,
) -> PersistenceTrace:
    """Evaluate the persistence quantities of a stored Picard run.

    alpha_m is the persistence-index norm of the m-th increment, the
    cumulative sums must plateau (empirical finiteness of the limit),
    beta_m tracks the rescaled critical norms of the iterates, and
    gamma_m the rescaled critical norms of the increments.
    """
    if trace.initial is None or not trace.differences and trace.iterations > 0:
        raise ValueError("picard run was not stored with kept differences")
    if not (0 < lam < 1) or lam * (s + 1.0 - eps_of(trace)) >= 1.0 - eps_of(trace):
        raise ValueError(
            f"lambda={lam} violates the interpolation admissibility constraint"
        )
    T = trace.initial.tgrid.T
    eps = trace.eps
    alpha = [z_norm(trace.initial, s, p, q).value]
    gamma = [T ** (eps / 2.0) * z_norm(trace.initial, -1.0 + eps, INF, INF).value]
    beta = [gamma[0]]
    acc = trace.initial
    for diff in trace.differences:
        alpha.append(z_norm(diff, s, p, q).value)
        gamma.append(T ** (eps / 2.0) * z_norm(diff, -1.0 + eps, INF, INF).value)
        acc = acc + diff
        beta.append(max(beta[-1], T ** (eps / 2.0) * z_norm(acc, -1.0 + eps, INF, INF).value))
    cumulative = [float(c) for c in np.cumsum(alpha)]
    tail = cumulative[-3:]
    plateaued = bool(
        len(tail) < 2 or (tail[-1] - tail[0]) < plateau_tol * max(tail[-1], 1.0)
    )
    limit_z = z_norm(acc, s, p, q).value
    return PersistenceTrace(
        s=s, p=p, q=q, lam=lam,
        alpha=alpha, cumulative=cumulative, beta=beta, gamma=gamma,
        plateaued=plateaued, limit_z=limit_z,
    )


def eps_of(trace: PicardTrace) -> float:
    return trace.eps


# ---------------------------------------------------------------------------
# restart identity, blowup monitor, uniqueness


def semigroup_check(u: TimeSeriesField, v: TimeSeriesField, t0: float) -> float:
    """Relative gap in the bilinear restart identity at an interior node:
    shifting the bilinear term must equal heat flow of its value at t0 plus
    the bilinear term of the shifted inputs."""
    m0 = u.tgrid.node_index(t0)
    if not (0 < m0 < u.tgrid.M):
        raise ValueError("t0 must be an interior node")
    with TailMassRecorder():
        buv = bilinear_term(u, v)
        lhs = buv.shifted(m0)
        rhs = heat_source(buv.node(m0), lhs.tgrid) + bilinear_term(
            u.shifted(m0), v.shifted(m0)
        )
    num = z_norm(lhs - rhs, 0.0, 2.0, 2.0).value
    den = max(z_norm(lhs, 0.0, 2.0, 2.0).value, 1e-300)
    return num / den


def blowup_monitor_series(
    record: SolutionRecord, candidate_T: float, eps: float, calib: CalibrationTable
) -> tuple[np.ndarray, np.ndarray]:
    """Per node: the blowup functional at the remaining horizon, and the
    guaranteed continuation horizon from the smallness gate at that node."""
    c1 = calib.smallness_constant_besov() / (eps * (1.0 - eps))
    c2 = calib.smallness_constant_linf(eps)
    nodes = record.u.tgrid.nodes
    rho = np.zeros(len(nodes))
    guaranteed = np.zeros(len(nodes))
    for mi, t in enumerate(nodes):
        remaining = max(candidate_T - t, 0.0)
        nb = record.besov_series[mi]
        ni = record.linf_series[mi]
        rho[mi] = min(
            c1 * remaining ** (eps / 2.0) * nb,
            c2 * math.sqrt(remaining) * ni,
        )
        h1 = INF if nb == 0 else (1.0 / (c1 * nb)) ** (2.0 / eps)
        h2 = INF if ni == 0 else (1.0 / (c2 * ni)) ** 2
        guaranteed[mi] = max(h1, h2)
    return rho, guaranteed


def blowup_monitor(
    record: SolutionRecord, candidate_T: float, eps: float, calib: CalibrationTable
) -> dict:
    """Blowup functional series plus the continuation-consistency verdict:
    on a completed run the guaranteed horizon from every node must cover
    the remaining computed lifespan."""
    if record.rho_series is None or len(record.besov_series) != record.u.tgrid.M + 1:
        rho, guaranteed = blowup_monitor_series(record, candidate_T, eps, calib)
    else:
        rho, guaranteed = record.rho_series, record.guaranteed_series
    nodes = record.u.tgrid.nodes
    remaining = candidate_T - nodes
    consistent = bool(np.all(guaranteed >= remaining * (1.0 - 1e-9)))
    return {
        "t": nodes.tolist(),
        "rho": np.asarray(rho).tolist(),
        "guaranteed_T": np.asarray(guaranteed).tolist(),
        "continuation_consistent": consistent,
    }


def uniqueness_check(
    f: SpectralField,
    config: SolverConfig,
    delta: float,
    seed: int = 0,
) -> dict:
    """Run the Picard construction twice, once from the heat flow of the
    datum and once from a delta-perturbed first iterate; both must land on
    the same fixed point."""
    if not (0 <= delta <= 0.1):
        raise ValueError("perturbation scale must lie in [0, 0.1]")
    record_a, trace_a = picard_solve(f, config)

    grid = f.grid
    if config.leray_project_data and f.m == grid.n:
        f = leray_project(f)
    tgrid = TimeGrid(config.T, config.M)
    u0 = heat_source(f, tgrid)
    if delta > 0:
        rng = np.random.default_rng(seed)
        from .spectral import hermitian_symmetrize  # local import to avoid cycle at module load

        raw = rng.standard_normal(f.coeffs.shape) + 1j * rng.standard_normal(f.coeffs.shape)
        pert = hermitian_symmetrize(raw)
        pert[(slice(None),) + (0,) * grid.n] = 0.0
        pf = SpectralField(grid, pert, True)
        pseries = heat_source(pf, tgrid)
        scale = z_norm(u0, -1.0 + config.eps, INF, INF).value
        pnorm = z_norm(pseries, -1.0 + config.eps, INF, INF).value
        start = u0 + (delta * scale / max(pnorm, 1e-300)) * pseries
    else:
        start = u0

    current = start
    with TailMassRecorder():
        for _ in range(config.max_iter):
            nxt = u0 - bilinear_term(current, current)
            dz = z_norm(nxt - current, -1.0 + config.eps, INF, INF).value
            current = nxt
            if dz < config.tol:
                break
    diff = z_norm(record_a.u - current, -1.0 + config.eps, INF, INF).value
    ref = max(z_norm(record_a.u, -1.0 + config.eps, INF, INF).value, 1e-300)
    return {
        "z_difference": diff,
        "z_difference_relative": diff / ref,
        "baseline_iterations": trace_a.iterations,
        "converged": trace_a.verdict == "converged",
    }

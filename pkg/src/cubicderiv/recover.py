"""Recovery engines: direct forward (f(2^n a)/8^n), direct backward
(8^n f(a/2^n)), and the fixed-point iteration of Jh(a) = h(2a)/8 under the
generalized metric d(g, h) = sup ||g(a) - h(a)|| / phi(a, 0)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .control import ControlFunction, contraction_constant
from .errors import CertificateViolationError, DivergenceError, HypothesisFailure, ScaleLimitError
from .maps import MapExpr
from .probes import ProbeSet

SCALE_MAX = 1e100
SCALE_MIN = 1e-100
MAX_STEPS = 2000


@dataclass(eq=False)
class RecoveryReport:
    engine: str  # "forward" | "backward" | "fixed-point"
    f: MapExpr = field(repr=False)
    control: ControlFunction
    N: int
    points: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    tails: np.ndarray = field(repr=False)
    trace: list = field(default_factory=list, repr=False)  # per-step max change per probe
    k_hat: Optional[float] = None
    step_distances: list = field(default_factory=list)
    contraction_ratios: list = field(default_factory=list)
    step_ratios: list = field(default_factory=list)
    iterates: list = field(default_factory=list, repr=False)
    distance_f_Jf: Optional[float] = None
    certified_distance: Optional[float] = None
    n0_finite: bool = True
    exact_deviation: Optional[np.ndarray] = field(default=None, repr=False)

    def evaluate(self, P: np.ndarray, n: Optional[int] = None) -> np.ndarray:
        """The recovered closure at new points, with the same number of steps."""
        n = self.N if n is None else n
        P = np.atleast_2d(np.asarray(P, dtype=complex))
        if self.engine == "backward":
            return 8.0 ** n * self.f.values(P / 2.0 ** n)
        return self.f.values(P * 2.0 ** n) / 8.0 ** n

    @property
    def max_tail(self) -> float:
        return float(self.tails.max(initial=0.0))

    def attach_exact(self, D: MapExpr) -> "RecoveryReport":
        dev = self.f.codomain.norm(self.values - D.values(self.points))
        self.exact_deviation = np.asarray(dev, dtype=float)
        return self

    def to_dict(self) -> dict:
        norms = np.asarray(self.f.domain.norm(self.points), dtype=float)
        rows = []
        for i, (nrm, tail) in enumerate(zip(norms, self.tails)):
            row = {"probe_id": i, "norm": float(nrm), "tail": float(tail)}
            if self.exact_deviation is not None:
                row["deviation_from_exact"] = float(self.exact_deviation[i])
            rows.append(row)
        out = {
            "engine": self.engine,
            "N": self.N,
            "k_hat": self.k_hat,
            "control": self.control.to_dict(),
            "max_tail": self.max_tail,
            "probes": rows,
            "verdicts": {"n0_finite": self.n0_finite},
        }
        if self.exact_deviation is not None:
            out["verdicts"]["tails_sound"] = bool(
                np.all(self.exact_deviation <= self.tails + 1e-12 * np.maximum(1.0, norms ** 3)))
        if self.engine == "fixed-point":
            out.update(
                step_distances=[_finite(v) for v in self.step_distances],
                contraction_ratios=[_finite(v) for v in self.contraction_ratios],
                distance_f_Jf=_finite(self.distance_f_Jf),
                certified_distance=_finite(self.certified_distance),
            )
        return out


def _finite(v):
    if v is None:
        return None
    return float(v) if math.isfinite(v) else "inf"


def _phi_a0(phi: ControlFunction, f: MapExpr, P: np.ndarray) -> np.ndarray:
    return np.asarray(phi(np.asarray(f.domain.norm(P), dtype=float)), dtype=float)


def direct_forward(f: MapExpr, phi: ControlFunction, probes: ProbeSet, tol: float = 1e-10) -> RecoveryReport:
    """D(a) ~ f(2^N a)/8^N with N the first index where the telescoping tail
    (1/16) sum_{k>=N} 8^-k phi(2^k a, 0, 0, 0) is <= tol on every probe.

    ``phi`` must carry the measured control level."""
    q = phi.forward_ratio()
    if q >= 1:
        raise DivergenceError(f"forward recovery needs ratio < 1, got {q:.6g}")
    P = probes.points
    norms = np.asarray(f.domain.norm(P), dtype=float)

    def tail(n):
        return np.asarray(phi(norms * 2.0 ** n), dtype=float) / 8.0 ** n / (16 * (1 - q))

    N = 0
    while tail(N).max(initial=0.0) > tol:
        N += 1
        if N > MAX_STEPS or norms.max() * 2.0 ** N > SCALE_MAX:
            raise ScaleLimitError(f"2^{N} |a| leaves the scale window before tail <= {tol}")
    values, trace = f.values(P), []
    for n in range(1, N + 1):
        nxt = f.values(P * 2.0 ** n) / 8.0 ** n
        trace.append(np.asarray(f.codomain.norm(nxt - values), dtype=float))
        values = nxt
    return RecoveryReport("forward", f, phi, N, P, values, tail(N), trace)


def direct_backward(f: MapExpr, phi: ControlFunction, probes: ProbeSet, tol: float = 1e-10) -> RecoveryReport:
    """D(a) ~ 8^N f(a/2^N) with tail (1/16) sum_{k>N} 8^k phi(a/2^k, 0, 0, 0) <= tol."""
    q = phi.backward_ratio()
    if q >= 1:
        raise DivergenceError(f"backward recovery needs ratio < 1, got {q:.6g}")
    P = probes.points
    norms = np.asarray(f.domain.norm(P), dtype=float)
    nonzero = norms[norms > 0]

    def tail(n):
        k = n + 1
        return np.asarray(phi(norms / 2.0 ** k), dtype=float) * 8.0 ** k / (16 * (1 - q))

    N = 0
    while tail(N).max(initial=0.0) > tol:
        N += 1
        if N > MAX_STEPS or (len(nonzero) and nonzero.min() / 2.0 ** N < SCALE_MIN):
            raise ScaleLimitError(f"|a|/2^{N} leaves the scale window before tail <= {tol}")
    values, trace = f.values(P), []
    for n in range(1, N + 1):
        nxt = 8.0 ** n * f.values(P / 2.0 ** n)
        trace.append(np.asarray(f.codomain.norm(nxt - values), dtype=float))
        values = nxt
    return RecoveryReport("backward", f, phi, N, P, values, tail(N), trace)


def generalized_metric(G: np.ndarray, H: np.ndarray, phi: ControlFunction, probes, f_or_norm=None) -> float:
    """max over probes of ||g(a) - h(a)|| / phi(a, 0); +inf when phi(a, 0) = 0
    at a probe where g(a) != h(a).  0/0 probes are skipped.

    ``probes`` is a ProbeSet or a coordinate array; ``f_or_norm`` supplies the
    codomain norm (a MapExpr or a NormDescriptor)."""
    P = getattr(probes, "points", probes)
    alg = getattr(probes, "algebra", None)
    if f_or_norm is None:
        raise ValueError("generalized_metric needs the codomain (MapExpr or norm)")
    cod_norm = getattr(getattr(f_or_norm, "codomain", None), "norm", f_or_norm)
    dom_norm = alg.norm if alg is not None else f_or_norm.domain.norm
    diff = np.asarray(cod_norm(np.asarray(G) - np.asarray(H)), dtype=float)
    den = np.asarray(phi(np.asarray(dom_norm(P), dtype=float)), dtype=float)
    if np.any((den == 0) & (diff > 0)):
        return math.inf
    keep = den > 0
    return float((diff[keep] / den[keep]).max(initial=0.0))


def doubling_operator(h: Callable) -> Callable:
    """J h (a) = h(2a) / 8."""
    return lambda P: h(2.0 * P) / 8.0


def fixed_point_recover(
    f: MapExpr, phi: ControlFunction, probes: ProbeSet, tol: float = 1e-10, max_iter: int = 500
) -> RecoveryReport:
    """Iterate J^n f until d(J^n f, J^{n+1} f) <= tol (1 - k).

    Records, per step, the probe-restricted Lipschitz ratio
    d_P(J g, J h) / d_{2P}(g, h) for g = J^n f, h = J^{n+1} f, which is the
    quantity the contraction property bounds by k; the plain ratio of
    consecutive step distances is kept as a diagnostic (``step_ratios``)."""
    k = contraction_constant(phi, probes)
    P = probes.points
    P2 = 2.0 * P
    cod = f.codomain.norm
    norms = np.asarray(f.domain.norm(P), dtype=float)
    phi0 = np.asarray(phi(norms), dtype=float)

    def metric(G, H, den):
        diff = np.asarray(cod(G - H), dtype=float)
        if np.any((den == 0) & (diff > 0)):
            return math.inf
        keep = den > 0
        return float((diff[keep] / den[keep]).max(initial=0.0))

    phi2 = np.asarray(phi(2.0 * norms), dtype=float)
    h = f.values
    cur = h(P)
    iterates = [cur]
    steps, lips, step_ratios, trace = [], [], [], []
    prev_wide = None
    n = 0
    while True:
        h_next = doubling_operator(h)
        nxt = h_next(P)
        step = metric(cur, nxt, phi0)
        steps.append(step)
        if not math.isfinite(step):
            raise HypothesisFailure(f"d(J^{n} f, J^{n+1} f) = inf: the n0 = 0 claim fails")
        if prev_wide is not None:
            ratio = step / prev_wide if prev_wide > 0 else 0.0
            lips.append(ratio)
            if ratio > k + 1e-9:
                raise CertificateViolationError(
                    f"measured contraction {ratio:.12g} exceeds k = {k:.12g} at step {n}")
            if steps[-2] > 0:
                step_ratios.append(step / steps[-2])
        if step <= tol * (1 - k) or n >= max_iter:
            break
        # d_{2P}(J^n f, J^{n+1} f), paired with d_P(J^{n+1} f, J^{n+2} f) next round
        prev_wide = metric(h(P2), h_next(P2), phi2)
        trace.append(np.asarray(cod(nxt - cur), dtype=float))
        h, cur = h_next, nxt
        iterates.append(cur)
        n += 1
    tails = phi0 * k ** n / (16 * (1 - k))
    d_f_Jf = steps[0]
    rep = RecoveryReport(
        "fixed-point", f, phi, n, P, cur, tails, trace, k_hat=k,
        step_distances=steps, contraction_ratios=lips, step_ratios=step_ratios,
        iterates=iterates, distance_f_Jf=d_f_Jf,
        certified_distance=d_f_Jf / (1 - k), n0_finite=all(math.isfinite(s) for s in steps),
    )
    return rep


def uniqueness_check(R1: RecoveryReport, R2: RecoveryReport, probes: Optional[ProbeSet] = None) -> dict:
    """Max deviation between two recovered maps on common probes, against the
    sum of their reported tails."""
    if probes is None:
        if R1.points.shape != R2.points.shape or not np.array_equal(R1.points, R2.points):
            raise ValueError("recoveries use different probes; pass a common ProbeSet")
        V1, V2, T1, T2 = R1.values, R2.values, R1.tails, R2.tails
        P = R1.points
    else:
        P = probes.points
        V1, V2 = R1.evaluate(P), R2.evaluate(P)
        T1 = _tails_at(R1, P)
        T2 = _tails_at(R2, P)
    dev = np.asarray(R1.f.codomain.norm(V1 - V2), dtype=float)
    allowed = T1 + T2
    return {
        "max_deviation": float(dev.max(initial=0.0)),
        "deviations": dev,
        "allowed": allowed,
        "passed": bool(np.all(dev <= allowed + 1e-10)),
    }


def _tails_at(R: RecoveryReport, P: np.ndarray) -> np.ndarray:
    if P.shape == R.points.shape and np.array_equal(P, R.points):
        return R.tails
    norms = np.asarray(R.f.domain.norm(P), dtype=float)
    phi = R.control
    if R.engine == "backward":
        q = phi.backward_ratio()
        k = R.N + 1
        return np.asarray(phi(norms / 2.0 ** k), dtype=float) * 8.0 ** k / (16 * (1 - q))
    if R.engine == "fixed-point":
        return np.asarray(phi(norms), dtype=float) * R.k_hat ** R.N / (16 * (1 - R.k_hat))
    q = phi.forward_ratio()
    return np.asarray(phi(norms * 2.0 ** R.N), dtype=float) / 8.0 ** R.N / (16 * (1 - q))

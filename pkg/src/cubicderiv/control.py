"""Control functions, their dyadic series, closed-form power bounds,
contraction constants, and the measured control level of a perturbed map."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import (
    CertificateViolationError,
    ConfigurationError,
    DivergenceError,
    NoContractionError,
    ScaleLimitError,
    UndefinedBoundError,
)
from .maps import (
    MapExpr,
    PerturbationSpec,
    _roundoff_floor,
    cubic_residual_terms,
    derivation_residual_terms,
)
from .probes import ProbeSet, dyadic_orbit

MAX_SERIES_TERMS = 10_000
SCALE_MIN, SCALE_MAX = 1e-100, 1e100


def _pow(t, e):
    """t**e with the convention 0**0 = 0 (zero slots never contribute)."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(t > 0, np.power(t, e), 0.0)


@dataclass(frozen=True)
class ControlFunction:
    """phi(a, b, c, d) evaluated on the norms of its arguments.

    power:   delta (|a|^r + |b|^r + |c|^r + |d|^r)
    product: delta (|a|^p |b|^q + |c|^p |d|^q)
    custom:  delta * hook(na, nb, nc, nd) with declared dyadic ratio
             certificates sup phi(2x)/(8 phi(x)) and sup 8 phi(x/2)/phi(x).
    """

    kind: str
    delta: float = 1.0
    r: float = 0.0
    p: float = 0.0
    q: float = 0.0
    hook: Optional[Callable] = field(default=None, compare=False)
    forward_certificate: Optional[float] = None
    backward_certificate: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("power", "product", "custom"):
            raise ConfigurationError(f"unknown control kind {self.kind!r}")
        if self.delta < 0 or min(self.r, self.p, self.q) < 0:
            raise ConfigurationError("control parameters must be nonnegative")
        if self.kind == "custom" and self.hook is None:
            raise ConfigurationError("custom control needs an evaluation hook")

    def __call__(self, na, nb=0.0, nc=0.0, nd=0.0):
        if self.kind == "power":
            v = _pow(na, self.r) + _pow(nb, self.r) + _pow(nc, self.r) + _pow(nd, self.r)
        elif self.kind == "product":
            v = _pow(na, self.p) * _pow(nb, self.q) + _pow(nc, self.p) * _pow(nd, self.q)
        else:
            v = np.asarray(self.hook(na, nb, nc, nd), dtype=float)
        out = self.delta * v
        return float(out) if np.ndim(out) == 0 else out

    @property
    def exponent(self) -> float:
        """Homogeneity degree under dyadic scaling (power / product kinds)."""
        return self.r if self.kind == "power" else self.p + self.q

    def with_delta(self, delta: float) -> "ControlFunction":
        return replace(self, delta=float(delta))

    def forward_ratio(self) -> float:
        if self.kind == "custom":
            if self.forward_certificate is None:
                raise DivergenceError("custom control declares no forward certificate")
            return float(self.forward_certificate)
        return 2.0 ** self.exponent / 8.0

    def backward_ratio(self) -> float:
        if self.kind == "custom":
            if self.backward_certificate is None:
                raise DivergenceError("custom control declares no backward certificate")
            return float(self.backward_certificate)
        return 8.0 / 2.0 ** self.exponent

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "delta": self.delta}
        if self.kind == "power":
            d["r"] = self.r
        elif self.kind == "product":
            d.update(p=self.p, q=self.q)
        else:
            d.update(forward_certificate=self.forward_certificate,
                     backward_certificate=self.backward_certificate)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ControlFunction":
        kind = d.get("kind")
        if kind == "custom":
            raise ConfigurationError("custom controls cannot be loaded from config")
        return cls(kind, float(d.get("delta", 1.0)), float(d.get("r", 0.0)),
                   float(d.get("p", 0.0)), float(d.get("q", 0.0)))


def _norm(x) -> float:
    if x is None:
        return 0.0
    if hasattr(x, "norm"):
        return float(x.norm)
    return float(x)


def eval_phi(phi: ControlFunction, a, b=None, c=None, d=None) -> float:
    """phi at Elements (or plain norms); missing slots are the zero element."""
    return phi(_norm(a), _norm(b), _norm(c), _norm(d))


class SeriesValue(NamedTuple):
    value: float
    tail_bound: float
    terms: int


def _series(phi, norms, tol, max_terms, forward: bool) -> SeriesValue:
    q = phi.forward_ratio() if forward else phi.backward_ratio()
    if q >= 1:
        kind = "forward" if forward else "backward"
        raise DivergenceError(f"{kind} series diverges: ratio certificate {q:.6g} >= 1")
    scale, log2_weight = (2.0, -3) if forward else (0.5, 3)
    k = 0 if forward else 1
    nonzero = [n for n in norms if n > 0]
    terms = []
    while True:
        scaled = [n * scale ** k for n in norms]
        if any(not SCALE_MIN <= n * scale ** k <= SCALE_MAX for n in nonzero):
            raise ScaleLimitError(f"series needs 2^{k if forward else -k} |a| outside the scale window")
        term = math.ldexp(float(phi(*scaled)), log2_weight * k)
        tail = term / (1 - q)
        K = len(terms)
        if (max_terms is not None and K >= max_terms) or (max_terms is None and tail <= tol):
            return SeriesValue(math.fsum(terms), tail, K)
        if K >= MAX_SERIES_TERMS:
            raise DivergenceError(f"series did not reach tol {tol} in {K} terms")
        terms.append(term)
        k += 1


def tilde_series_forward(phi, a, b=None, c=None, d=None, tol=1e-14, max_terms=None) -> SeriesValue:
    """sum_{k>=0} 8^-k phi(2^k a, 2^k b, 2^k c, 2^k d), truncated when the
    geometric tail (first omitted term)/(1 - q) is <= tol."""
    norms = tuple(_norm(x) for x in (a, b, c, d))
    return _series(phi, norms, tol, max_terms, True)


def tilde_series_backward(phi, a, b=None, c=None, d=None, tol=1e-14, max_terms=None) -> SeriesValue:
    """sum_{k>=1} 8^k phi(2^-k a, ...), truncated the same way."""
    norms = tuple(_norm(x) for x in (a, b, c, d))
    return _series(phi, norms, tol, max_terms, False)


def closed_form_power_bound(delta: float, r: float, norm_a, direction: str = "forward"):
    """delta |a|^r / (2 |8 - 2^r|) for r < 3 (forward) or r > 3 (backward)."""
    if r == 3:
        raise UndefinedBoundError("the power bound is undefined at r = 3")
    if direction == "forward" and r > 3:
        raise DivergenceError(f"forward bound needs r < 3, got {r}")
    if direction == "backward" and r < 3:
        raise DivergenceError(f"backward bound needs r > 3, got {r}")
    return delta * _pow(norm_a, r) / (2 * abs(8 - 2.0 ** r))


def contraction_constant(phi: ControlFunction, probes: Optional[ProbeSet] = None) -> float:
    """k with phi(2a, 2b) <= 8 k phi(a, b).  Analytic 2^(r-3) or 2^(p+q-3) for
    power/product controls; the declared certificate for custom ones, after
    checking it against the probe pairs."""
    if phi.kind == "custom":
        k = phi.forward_ratio()
        if probes is not None:
            measured = measured_contraction(phi, probes)
            if measured > k + 1e-12:
                raise CertificateViolationError(
                    f"custom control ratio {measured:.6g} exceeds certificate {k:.6g}")
    else:
        k = 2.0 ** (phi.exponent - 3)
    if k >= 1:
        raise NoContractionError(f"contraction constant {k:.6g} >= 1")
    return k


def measured_contraction(phi: ControlFunction, probes: ProbeSet) -> float:
    A, B = probes.pair_coords()
    norm = probes.algebra.norm
    na, nb = norm(A), norm(B)
    base = phi(na, nb)
    doubled = phi(2 * na, 2 * nb)
    keep = base > 0
    return float((doubled[keep] / (8 * base[keep])).max(initial=0.0))


# --- perturbed maps and the measured control level --------------------------------


def make_perturbed_map(D: MapExpr, spec: PerturbationSpec) -> MapExpr:
    if not D.is_exact:
        raise ConfigurationError("the base map already carries a perturbation")
    return D.with_perturbation(spec, f"{D.name}+{spec.kind}")


@dataclass
class DeltaEstimate:
    delta: float
    by_family: dict
    witness: Optional[str] = None
    orbit_levels: int = 0

    @property
    def finite(self) -> bool:
        return math.isfinite(self.delta)

    def to_dict(self) -> dict:
        return {
            "delta_hat": self.delta if self.finite else "inf",
            "by_family": {k: (v if math.isfinite(v) else "inf") for k, v in self.by_family.items()},
            "witness": self.witness,
            "orbit_levels": self.orbit_levels,
        }


def _ratios(res, scale, phi_vals):
    res = np.where(res <= _roundoff_floor(scale), 0.0, res)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(phi_vals > 0, res / np.where(phi_vals > 0, phi_vals, 1.0),
                       np.where(res > 0, np.inf, 0.0))
    return out


def measure_delta(
    f: MapExpr,
    phi: ControlFunction,
    probes: ProbeSet,
    orbit_levels: int = 0,
    direction: str = "forward",
) -> DeltaEstimate:
    """Smallest delta for which both residual hypotheses hold on the probes.

    Cubic residuals are taken over probe pairs and arc scalars against
    phi(a, b, 0, 0); derivation residuals against phi(0, 0, c, d).  With
    ``orbit_levels`` > 0 the b = 0, lambda = 1 residual is also measured on
    the dyadic orbit of every probe point, which is where the stability
    bounds consume the hypothesis.  Residuals below the roundoff floor count
    as zero; phi = 0 with a nonzero residual gives delta = inf.
    """
    unit = phi.with_delta(1.0)
    dom, cod = f.domain, f.codomain
    A, B = probes.pair_coords()
    na, nb = dom.norm(A), dom.norm(B)
    best = {"cubic": 0.0, "derivation": 0.0, "orbit": 0.0}
    witness = None

    def update(family, ratios, labels):
        nonlocal witness
        if len(ratios) == 0:
            return
        i = int(np.argmax(ratios))
        if ratios[i] > best[family]:
            best[family] = float(ratios[i])
            if best[family] >= max(best.values()):
                witness = labels(i)

    phi_ab = unit(na, nb)
    for li, lam in enumerate(probes.scalars):
        R, scale, _ = cubic_residual_terms(f, A, B, lam.value)
        update("cubic", _ratios(cod.norm(R), scale, phi_ab), lambda i, li=li: f"c{i}/{li}")
    R, scale = derivation_residual_terms(f, A, B)
    update("derivation", _ratios(cod.norm(R), scale, unit(0.0, 0.0, na, nb)), lambda i: f"d{i}")
    if orbit_levels > 0:
        O = dyadic_orbit(probes.points, orbit_levels, direction)
        Z = np.zeros_like(O)
        R, scale, _ = cubic_residual_terms(f, O, Z, 1.0)
        n = len(probes.points)
        update("orbit", _ratios(cod.norm(R), scale, unit(dom.norm(O))),
               lambda i: f"o{i % n}/{i // n + 1}")
    return DeltaEstimate(max(best.values()), best, witness, orbit_levels)

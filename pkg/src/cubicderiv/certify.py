"""Pass/fail certificates for the closed-form stability bounds and the
superstability verdict.  Every certificate embeds the measured constants it
used; a probe passes when deviation <= bound + tail + 1e-10."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .control import (
    ControlFunction,
    closed_form_power_bound,
    tilde_series_backward,
    tilde_series_forward,
)
from .errors import ConfigurationError, NoContractionError, UndefinedBoundError
from .maps import (
    MapExpr,
    cubic_residual_terms,
    derivation_residual_terms,
    _roundoff_floor,
    homogeneity_residual_terms,
)
from .probes import ProbeSet
from .recover import RecoveryReport

SLACK = 1e-10
SUPERSTABLE_TOL = 1e-10
SUPERSTABLE_VERDICT = "superstable: f itself is a cubic derivation"
CSV_COLUMNS = ("probe_id", "norm_a", "deviation", "bound", "margin")


@dataclass
class CertificateReport:
    scenario: str
    family: str  # "stability" | "power-corollary" | "fixed-point" | "superstability"
    norms: np.ndarray = field(repr=False)
    deviations: np.ndarray = field(repr=False)
    bounds: np.ndarray = field(repr=False)
    tails: np.ndarray = field(repr=False)
    constants: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    witness: Optional[dict] = None
    verdict_text: Optional[str] = None
    slack: float = SLACK

    @property
    def margins(self) -> np.ndarray:
        return self.bounds - self.deviations

    @property
    def violations(self) -> np.ndarray:
        return np.flatnonzero(self.margins < -(self.tails + self.slack))

    @property
    def passed(self) -> bool:
        if self.family == "superstability":
            return self.witness is None
        return len(self.violations) == 0

    @property
    def min_margin(self) -> float:
        return float(self.margins.min(initial=math.inf))

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "family": self.family,
            "passed": self.passed,
            "verdict": self.verdict_text or ("pass" if self.passed else "fail"),
            "min_margin": _json_float(self.min_margin),
            "violations": [int(i) for i in self.violations] if self.family != "superstability" else [],
            "constants": self.constants,
            "notes": list(self.notes),
            "witness": self.witness,
            "table": self.rows(),
        }

    def rows(self) -> list:
        return [
            {"probe_id": i, "norm_a": float(n), "deviation": float(d), "bound": float(b), "margin": float(b - d)}
            for i, (n, d, b) in enumerate(zip(self.norms, self.deviations, self.bounds))
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows():
            w.writerow([row["probe_id"]] + [repr(row[c]) for c in CSV_COLUMNS[1:]])
        return buf.getvalue()


def _json_float(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def _deviations(f: MapExpr, rec: RecoveryReport) -> np.ndarray:
    return np.asarray(f.codomain.norm(f.values(rec.points) - rec.values), dtype=float)


def _constants(rec: RecoveryReport, **extra) -> dict:
    out = {"delta_hat": rec.control.delta, "N": rec.N, "engine": rec.engine,
           "max_tail": rec.max_tail, "control": rec.control.to_dict()}
    if rec.k_hat is not None:
        out["k_hat"] = rec.k_hat
    out.update(extra)
    return out


def check_stability_bound(f: MapExpr, rec: RecoveryReport, phi: Optional[ControlFunction] = None,
                          scenario: str = "") -> CertificateReport:
    """||f(a) - D(a)|| <= (1/16) phi~(a, 0, 0, 0) with the forward series for
    forward / fixed-point recoveries and the backward series otherwise."""
    phi = phi if phi is not None else rec.control
    norms = np.asarray(f.domain.norm(rec.points), dtype=float)
    series = tilde_series_backward if rec.engine == "backward" else tilde_series_forward
    bounds = np.array([series(phi, n, tol=1e-16 * max(1.0, n ** 3)).value / 16 for n in norms])
    return CertificateReport(
        scenario, "stability", norms, _deviations(f, rec), bounds, rec.tails,
        _constants(rec, series=("backward" if rec.engine == "backward" else "forward")),
    )


def check_power_corollary(f: MapExpr, rec: RecoveryReport, delta_hat: float, r: float,
                          direction: Optional[str] = None, scenario: str = "") -> CertificateReport:
    """||f(a) - D(a)|| <= delta |a|^r / (2 |8 - 2^r|)."""
    if r == 3:
        raise UndefinedBoundError("r = 3 is excluded")
    direction = direction or ("backward" if rec.engine == "backward" else "forward")
    norms = np.asarray(f.domain.norm(rec.points), dtype=float)
    bounds = np.asarray(closed_form_power_bound(delta_hat, r, norms, direction), dtype=float)
    return CertificateReport(
        scenario, "power-corollary", norms, _deviations(f, rec), bounds, rec.tails,
        _constants(rec, r=r, direction=direction, coefficient=1 / (2 * abs(8 - 2.0 ** r))),
    )


def check_fixed_point_bound(f: MapExpr, rec: RecoveryReport, phi: Optional[ControlFunction] = None,
                            k_hat: Optional[float] = None, scenario: str = "") -> CertificateReport:
    """||f(a) - D(a)|| <= phi(a, 0) / (16 (1 - k))."""
    phi = phi if phi is not None else rec.control
    k = rec.k_hat if k_hat is None else k_hat
    if k is None or k >= 1:
        raise NoContractionError(f"fixed-point bound needs k < 1, got {k}")
    norms = np.asarray(f.domain.norm(rec.points), dtype=float)
    bounds = np.asarray(phi(norms), dtype=float) / (16 * (1 - k))
    cert = CertificateReport(
        scenario, "fixed-point", norms, _deviations(f, rec), bounds, rec.tails,
        _constants(rec, coefficient=1 / (16 * (1 - k)),
                   certified_distance=rec.certified_distance,
                   distance_bound=1 / (16 * (1 - k))),
    )
    return cert


def superstability_check(f: MapExpr, delta_hat: float, p: float, q: float, probes: ProbeSet,
                         scenario: str = "") -> CertificateReport:
    """Product-control superstability: (i) f(2a) = 8 f(a) to relative 1e-10 on
    every probe and (ii) all residual families vanish to the same tolerance.
    The witness is the first failing probe in probe order."""
    if p + q == 3:
        raise UndefinedBoundError("p + q = 3 is excluded")
    if p + q <= 0 or (p + q > 3 and p <= 0):
        raise ConfigurationError(f"superstability needs 0 < p+q < 3, or p+q > 3 with p > 0 (p={p}, q={q})")
    norm = f.codomain.norm
    P = probes.points
    F1, F2 = f.values(P), f.values(2.0 * P)
    eig = np.asarray(norm(F2 - 8 * F1), dtype=float)
    allow = SUPERSTABLE_TOL * np.maximum(1.0, np.asarray(norm(F1), dtype=float))
    witness = None
    bad = np.flatnonzero(eig > allow)
    if len(bad):
        i = int(bad[0])
        witness = {"condition": "scaling", "probe_id": i,
                   "point": [[float(z.real), float(z.imag)] for z in P[i]],
                   "defect": float(eig[i])}
    A, B = probes.pair_coords()
    families = {}
    for li, lam in enumerate(probes.scalars):
        R, scale, _ = cubic_residual_terms(f, A, B, lam.value)
        families.setdefault("cubic", []).append(np.asarray(norm(R), dtype=float) / np.maximum(1.0, scale))
    R, scale = derivation_residual_terms(f, A, B)
    families["derivation"] = [np.asarray(norm(R), dtype=float) / np.maximum(1.0, scale)]
    for lam in probes.homogeneity_scalars:
        R, scale, _ = homogeneity_residual_terms(f, P, lam.value)
        families.setdefault("homogeneity", []).append(np.asarray(norm(R), dtype=float) / np.maximum(1.0, scale))
    maxima = {}
    for fam, arrs in families.items():
        arr = np.concatenate(arrs)
        maxima[fam] = float(arr.max(initial=0.0))
        if witness is None and maxima[fam] > SUPERSTABLE_TOL:
            witness = {"condition": fam, "index": int(np.argmax(arr > SUPERSTABLE_TOL)),
                       "defect": maxima[fam]}
    norms = np.asarray(probes.algebra.norm(P), dtype=float)
    cert = CertificateReport(
        scenario, "superstability", norms, eig, allow, np.zeros(len(P)),
        {"delta_hat": delta_hat if math.isfinite(delta_hat) else "inf", "p": p, "q": q,
         "residual_maxima": maxima, "tolerance": SUPERSTABLE_TOL,
         "regime": "p+q<3" if p + q < 3 else "p+q>3"},
        notes=[f"lambda hypotheses checked on {len(probes.scalars)} arc samples only"],
        witness=witness,
    )
    cert.verdict_text = SUPERSTABLE_VERDICT if witness is None else "fail: f is not a cubic derivation"
    return cert


def check_recovered_structure(f: MapExpr, rec: RecoveryReport, probes: ProbeSet) -> dict:
    """Structural checks on a recovered closure, each as a max ratio of the
    defect to its allowance (<= 1 means the check holds):

    scaling        ||D(2a) - 8 D(a)||  vs 4 tail(a)
    scaling_sharp  the same defect vs the telescoping constant
                   8 (1 - q) tail (forward) or 8 (1 - q)/q tail (backward)
    homogeneity    ||D(la) - l^3 D(a)|| vs 2 tail(a) over arc scalars
    derivation     limiting-step residual vs phi(2^n c, 2^n d)/8^n
                   (forward) or 64^n phi(c/2^n, d/2^n) (backward)

    Each allowance is widened only by the float64 roundoff floor of the
    compared terms, never by the certificate slack.
    """
    norm = f.codomain.norm
    P, T = rec.points, rec.tails

    def worst(defect, allow, scale):
        # allowance plus the float64 roundoff floor of the compared terms
        defect = np.asarray(defect, dtype=float)
        allow = np.asarray(allow, dtype=float) + _roundoff_floor(np.asarray(scale, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(defect > 0, defect / allow, 0.0)
        return float(ratio.max(initial=0.0))

    V2 = rec.evaluate(2.0 * P)
    scale_def = norm(V2 - 8.0 * rec.values)
    scale_terms = norm(V2) + 8.0 * norm(rec.values)
    phi = rec.control
    if rec.engine == "backward":
        q = phi.backward_ratio()
        sharp = 8 * (1 - q) / q
    else:
        q = rec.k_hat if rec.engine == "fixed-point" else phi.forward_ratio()
        sharp = 8 * (1 - q)
    hom = 0.0
    for lam in probes.scalars:
        VL = rec.evaluate(lam.value * P)
        d = norm(VL - lam.value ** 3 * rec.values)
        hom = max(hom, worst(d, 2 * T, norm(VL) + norm(rec.values)))

    A, B = probes.pair_coords()
    alg, mod = f.domain, f.codomain
    n = rec.N
    na, nb = np.asarray(alg.norm(A), dtype=float), np.asarray(alg.norm(B), dtype=float)
    DA, DB = rec.evaluate(A), rec.evaluate(B)
    DAB = rec.evaluate(alg.product(A, B), 2 * n)
    T1, T2 = mod.act_right(DA, alg.cube(B)), mod.act_left(alg.cube(A), DB)
    R = DAB - T1 - T2
    der_terms = norm(DAB) + norm(T1) + norm(T2)
    if rec.engine == "backward":
        env = 64.0 ** n * np.asarray(phi(0.0, 0.0, na / 2.0 ** n, nb / 2.0 ** n), dtype=float)
    else:
        env = np.asarray(phi(0.0, 0.0, na * 2.0 ** n, nb * 2.0 ** n), dtype=float) / 8.0 ** n
    out = {
        "scaling": worst(scale_def, 4 * T, scale_terms),
        "scaling_sharp": worst(scale_def, sharp * T, scale_terms),
        "homogeneity": hom,
        "derivation": worst(norm(R), env, der_terms),
    }
    out["passed"] = {k: v <= 1.0 for k, v in out.items()}
    return out

"""Maps f: A -> X as a symmetric cubic tensor plus an optional perturbation,
and the three residual families (cubic equation, derivation identity,
cubic homogeneity)."""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .algebra import AlgebraSpec, BimoduleSpec, Element, ScalarSample
from .errors import ConfigurationError, DimensionError

SYMMETRY_TOL = 1e-14
# residuals below ROUNDOFF_FACTOR * eps * (sum of term norms) are roundoff
ROUNDOFF_FACTOR = 64.0


def symmetrize(T: np.ndarray) -> np.ndarray:
    """Average a (L, d, d, d) tensor over the six permutations of its last three axes."""
    perms = itertools.permutations((1, 2, 3))
    return sum(np.transpose(T, (0,) + p) for p in perms) / 6.0


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    """Smooth, seeded, envelope-certified perturbation h with h(0) = 0.

    kinds and envelopes ||h(a)|| <= epsilon * s(a):
      bounded        h = eps u 2s/(1+|s|^2),  s = <w, a>       s(a) = 1
      power-decay    h = eps u t^r/(1+t^r),   t = ||a||        s(a) = min(1, t)^r
      product-pq     h = eps u t^(p+q)                         s(a) = t^(p+q)
      linear         h = eps u <w, a>                          s(a) = |<w, a>|
    """

    kind: str
    epsilon: float
    domain: AlgebraSpec
    codomain: BimoduleSpec
    direction: np.ndarray = None
    weights: np.ndarray = None
    r: float = 0.0
    p: float = 0.0
    q: float = 0.0
    seed: int = 0
    support: str = "annihilator"

    KINDS = ("bounded", "power-decay", "product-pq", "linear")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigurationError(f"unknown perturbation kind {self.kind!r}")
        if self.epsilon < 0:
            raise ConfigurationError("epsilon must be nonnegative")
        rng = np.random.default_rng(self.seed)
        real = self.domain.real
        if self.direction is None:
            basis = _support_basis(self.codomain, self.support)
            g = rng.standard_normal(basis.shape[1])
            if not real:
                g = g + 1j * rng.standard_normal(basis.shape[1])
            u = basis @ g
        else:
            u = np.asarray(self.direction, dtype=complex)
            if u.shape != (self.codomain.dim,):
                raise DimensionError("perturbation direction has wrong length")
        u = u / self.codomain.norm(u)
        u.setflags(write=False)
        object.__setattr__(self, "direction", u)
        if self.weights is None:
            w = rng.standard_normal(self.domain.dim)
            w = w / np.linalg.norm(w)
        else:
            w = np.asarray(self.weights, dtype=complex)
        w = np.asarray(w, dtype=complex)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def profile(self, P: np.ndarray) -> np.ndarray:
        """Scalar factor multiplying epsilon * direction, one per row of P."""
        if self.kind in ("bounded", "linear"):
            s = P @ self.weights
            return 2 * s / (1 + np.abs(s) ** 2) if self.kind == "bounded" else s
        t = np.asarray(self.domain.norm(P), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "power-decay":
                tr = np.where(t > 0, t ** self.r, 0.0)
                return np.where(t > 0, tr / (1 + tr), 0.0)
            return np.where(t > 0, t ** (self.p + self.q), 0.0)

    def envelope(self, P: np.ndarray) -> np.ndarray:
        t = np.asarray(self.domain.norm(P), dtype=float)
        if self.kind == "bounded":
            s = np.ones_like(t)
        elif self.kind == "power-decay":
            s = np.where(t > 0, np.minimum(1.0, t) ** self.r, 0.0)
        elif self.kind == "product-pq":
            s = np.where(t > 0, t ** (self.p + self.q), 0.0)
        else:
            s = np.abs(P @ self.weights)
        return self.epsilon * np.where(t > 0, s, 0.0)

    def __call__(self, P: np.ndarray) -> np.ndarray:
        return self.epsilon * self.profile(P)[:, None] * self.direction[None, :]

    def scaled(self, factor: float) -> "PerturbationSpec":
        return PerturbationSpec(
            self.kind, self.epsilon * factor, self.domain, self.codomain, self.direction,
            self.weights, self.r, self.p, self.q, self.seed, self.support,
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "epsilon": self.epsilon, "r": self.r, "p": self.p,
            "q": self.q, "seed": self.seed, "support": self.support,
        }


def two_sided_annihilator(module: BimoduleSpec, tol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis (columns) of {x : a.x = x.a = 0 for all a}."""
    m = module.dim
    K = np.concatenate(
        [np.transpose(module.left, (0, 2, 1)).reshape(-1, m),
         np.transpose(module.right, (0, 2, 1)).reshape(-1, m)]
    )
    _, s, vh = np.linalg.svd(K)
    rank = int((s > tol * max(1.0, s.max(initial=0.0))).sum())
    return vh[rank:].conj().T


def _support_basis(module: BimoduleSpec, support: str) -> np.ndarray:
    if support == "annihilator":
        basis = two_sided_annihilator(module)
        if basis.shape[1] > 0:
            # real annihilators stay real so real-probe scenarios stay real
            return np.real_if_close(basis)
        return np.eye(module.dim)
    if support == "full":
        return np.eye(module.dim)
    raise ConfigurationError(f"unknown perturbation support {support!r}")


@dataclass(frozen=True, eq=False)
class MapExpr:
    """f(a) = sum T[l, i, j, k] a_i a_j a_k e_l + h(a) with f(0) = 0 exactly."""

    cubic_part: np.ndarray
    domain: AlgebraSpec
    codomain: BimoduleSpec
    perturb_part: Optional[Callable] = None
    name: str = "map"
    _compressed: tuple = field(default=None, repr=False)

    def __post_init__(self):
        T = np.array(self.cubic_part, dtype=complex)
        d, L = self.domain.dim, self.codomain.dim
        if T.shape != (L, d, d, d):
            raise DimensionError(f"cubic part must be {(L, d, d, d)}, got {T.shape}")
        if T.size and np.abs(T - symmetrize(T)).max() > SYMMETRY_TOL * max(1.0, np.abs(T).max()):
            raise ConfigurationError("cubic part is not symmetric in its input indices")
        T.setflags(write=False)
        object.__setattr__(self, "cubic_part", T)
        nz = T != 0
        ins = np.flatnonzero(nz.any(axis=(0, 2, 3)))
        outs = np.flatnonzero(nz.any(axis=(1, 2, 3)))
        Tc = np.ascontiguousarray(T[np.ix_(outs, ins, ins, ins)])
        object.__setattr__(self, "_compressed", (ins, outs, Tc))

    @property
    def is_exact(self) -> bool:
        return self.perturb_part is None

    def cubic_values(self, P: np.ndarray) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=complex))
        ins, outs, Tc = self._compressed
        out = np.zeros((len(P), self.codomain.dim), dtype=complex)
        if len(ins) == 0 or len(P) == 0:
            return out
        A = P[:, ins]
        m = len(ins)
        chunk = max(1, int(4_000_000 // max(1, Tc.size // m)))
        T2 = Tc.reshape(-1, m)
        for s in range(0, len(A), chunk):
            a = A[s:s + chunk]
            Y = (T2 @ a.T).reshape(len(outs), m, m, len(a))
            Y = np.einsum("lijn,jn->lin", Y, a.T)
            out[s:s + chunk, outs] = np.einsum("lin,in->nl", Y, a.T)
        return out

    def values(self, P: np.ndarray) -> np.ndarray:
        """Evaluate f on each row of P (n, dim) -> (n, codim)."""
        P = np.atleast_2d(np.asarray(P, dtype=complex))
        if P.shape[1] != self.domain.dim:
            raise DimensionError(f"points of width {P.shape[1]} not in {self.domain!r}")
        out = self.cubic_values(P)
        if self.perturb_part is not None:
            out = out + self.perturb_part(P)
            out[~P.any(axis=1)] = 0.0
        return out

    def with_perturbation(self, h: Optional[Callable], name: Optional[str] = None) -> "MapExpr":
        return MapExpr(self.cubic_part, self.domain, self.codomain, h, name or self.name)

    def __call__(self, a: Element) -> Element:
        return eval_map(self, a)


def eval_map(f: MapExpr, a: Element) -> Element:
    if a.parent is not f.domain:
        raise DimensionError(f"{a.parent!r} is not the domain {f.domain!r}")
    return Element(f.values(a.coords[None, :])[0], f.codomain)


def cubic_map_from_trilinear(domain, codomain, T_raw, name="map", perturb=None) -> MapExpr:
    return MapExpr(symmetrize(np.asarray(T_raw, dtype=complex)), domain, codomain, perturb, name)


def cube_tensor(alg: AlgebraSpec) -> np.ndarray:
    """C[i, j, k, p] = coefficient of e_p in e_i e_j e_k."""
    return np.einsum("ijq,qkp->ijkp", alg.mul, alg.mul)


def inner_cubic_map(module: BimoduleSpec, g0: Element) -> MapExpr:
    """D(a) = g0.a^3 - a^3.g0 as a symmetric cubic tensor."""
    if g0.parent is not module:
        raise DimensionError("g0 must be an element of the module")
    C = cube_tensor(module.algebra)
    # (g0.y)_l = sum_i y_i R_g[i, l],  (y.g0)_l = sum_i y_i L_g[i, l]
    R_g = np.einsum("m,iml->il", g0.coords, module.right)
    L_g = np.einsum("m,iml->il", g0.coords, module.left)
    T_raw = np.einsum("ijkp,pl->lijk", C, R_g - L_g)
    return cubic_map_from_trilinear(module.algebra, module, T_raw, "inner-cubic")


def cube_map(module: BimoduleSpec) -> MapExpr:
    """a -> a^3 on an algebra viewed as a bimodule over itself."""
    alg = module.algebra
    if module.dim != alg.dim:
        raise DimensionError("cube_map needs the regular bimodule")
    return cubic_map_from_trilinear(alg, module, np.transpose(cube_tensor(alg), (3, 0, 1, 2)), "cube")


def zero_map(module: BimoduleSpec) -> MapExpr:
    d, L = module.algebra.dim, module.dim
    return MapExpr(np.zeros((L, d, d, d)), module.algebra, module, None, "zero")


# --- residuals -------------------------------------------------------------------


def _roundoff_floor(scale: np.ndarray) -> np.ndarray:
    return ROUNDOFF_FACTOR * np.finfo(float).eps * scale


def cubic_residual_terms(f: MapExpr, A: np.ndarray, B: np.ndarray, lam: complex):
    """Residual vectors and term-norm scale for
    f(2la + lb) + f(2la - lb) - 2l^3 f(a+b) - 2l^3 f(a-b) - 12 l^3 f(a)."""
    l3 = lam ** 3
    F1 = f.values(lam * (2 * A + B))
    F2 = f.values(lam * (2 * A - B))
    F3, F4, F5 = f.values(A + B), f.values(A - B), f.values(A)
    R = F1 + F2 - 2 * l3 * F3 - 2 * l3 * F4 - 12 * l3 * F5
    n = f.codomain.norm
    scale = n(F1) + n(F2) + abs(l3) * (2 * n(F3) + 2 * n(F4) + 12 * n(F5))
    return R, scale, F5


def cubic_residuals(f: MapExpr, A, B, lam: complex) -> np.ndarray:
    R, _, _ = cubic_residual_terms(f, np.atleast_2d(A), np.atleast_2d(B), lam)
    return np.asarray(f.codomain.norm(R), dtype=float)


def derivation_residual_terms(f: MapExpr, C: np.ndarray, D: np.ndarray):
    """f(cd) - f(c).d^3 - c^3.f(d) and its term-norm scale."""
    alg, mod = f.domain, f.codomain
    Fcd = f.values(alg.product(C, D))
    Fc, Fd = f.values(C), f.values(D)
    T1 = mod.act_right(Fc, alg.cube(D))
    T2 = mod.act_left(alg.cube(C), Fd)
    n = mod.norm
    return Fcd - T1 - T2, n(Fcd) + n(T1) + n(T2)


def derivation_residuals(f: MapExpr, C, D) -> np.ndarray:
    R, _ = derivation_residual_terms(f, np.atleast_2d(C), np.atleast_2d(D))
    return np.asarray(f.codomain.norm(R), dtype=float)


def homogeneity_residual_terms(f: MapExpr, A: np.ndarray, lam: complex):
    Fl = f.values(lam * A)
    Fa = f.values(A)
    R = Fl - lam ** 3 * Fa
    n = f.codomain.norm
    return R, n(Fl) + abs(lam) ** 3 * n(Fa), Fa


def homogeneity_residuals(f: MapExpr, A, lam: complex) -> np.ndarray:
    R, _, _ = homogeneity_residual_terms(f, np.atleast_2d(A), lam)
    return np.asarray(f.codomain.norm(R), dtype=float)


def _value(lam) -> complex:
    return complex(lam.value if isinstance(lam, ScalarSample) else lam)


def cubic_residual(f: MapExpr, a: Element, b: Element, lam=1.0) -> float:
    return float(cubic_residuals(f, a.coords, b.coords, _value(lam))[0])


def derivation_residual(f: MapExpr, c: Element, d: Element) -> float:
    return float(derivation_residuals(f, c.coords, d.coords)[0])


def homogeneity_residual(f: MapExpr, lam, a: Element) -> float:
    return float(homogeneity_residuals(f, a.coords, _value(lam))[0])


# --- sweeps ----------------------------------------------------------------------

FAMILIES = ("cubic", "derivation", "homogeneity")


@dataclass
class ResidualSummary:
    """Per-probe residuals; ``records`` rows are (probe_id, family, value, relative)."""

    records: list
    seed: int

    def maxima(self, relative: bool = False) -> dict:
        col = 3 if relative else 2
        out = {fam: 0.0 for fam in FAMILIES}
        for rec in self.records:
            out[rec[1]] = max(out[rec[1]], rec[col])
        return out

    @property
    def max_cubic(self) -> float:
        return self.maxima()["cubic"]

    @property
    def max_derivation(self) -> float:
        return self.maxima()["derivation"]

    @property
    def max_homogeneity(self) -> float:
        return self.maxima()["homogeneity"]

    def to_records(self) -> list:
        return [{"probe_id": r[0], "family": r[1], "value": r[2], "relative": r[3]} for r in self.records]

    def to_json(self) -> str:
        return json.dumps({"seed": self.seed, "maxima": self.maxima(), "records": self.to_records()})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["probe_id", "family", "value", "relative"])
        for r in self.records:
            w.writerow([r[0], r[1], repr(r[2]), repr(r[3])])
        return buf.getvalue()


def residual_sweep(f: MapExpr, probes) -> ResidualSummary:
    """All three residual families over the probe pairs and scalar samples.

    Probe ids: ``c<pair>/<lambda>`` for the cubic family, ``d<pair>`` for the
    derivation identity, ``h<point>/<lambda>`` for homogeneity.  Relative
    values divide by max(1, sum of the term norms)."""
    A, B = probes.pair_coords()
    norm = f.codomain.norm
    records = []
    for li, lam in enumerate(probes.scalars):
        R, scale, _ = cubic_residual_terms(f, A, B, lam.value)
        vals = np.asarray(norm(R), dtype=float)
        rel = vals / np.maximum(1.0, scale)
        records += [(f"c{i}/{li}", "cubic", float(v), float(q)) for i, (v, q) in enumerate(zip(vals, rel))]
    R, scale = derivation_residual_terms(f, A, B)
    vals = np.asarray(norm(R), dtype=float)
    rel = vals / np.maximum(1.0, scale)
    records += [(f"d{i}", "derivation", float(v), float(q)) for i, (v, q) in enumerate(zip(vals, rel))]
    for li, lam in enumerate(probes.homogeneity_scalars):
        R, scale, _ = homogeneity_residual_terms(f, probes.points, lam.value)
        vals = np.asarray(norm(R), dtype=float)
        rel = vals / np.maximum(1.0, scale)
        records += [(f"h{i}/{li}", "homogeneity", float(v), float(q)) for i, (v, q) in enumerate(zip(vals, rel))]
    return ResidualSummary(records, probes.seed)

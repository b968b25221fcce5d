"""Finite-dimensional Banach algebras and bimodules given by structure constants.

Elements are coordinate vectors over a fixed basis.  An algebra carries a
rank-3 tensor ``mul`` with ``mul[i, j, k]`` the coefficient of ``e_k`` in
``e_i e_j``; a bimodule carries ``left[i, m, n]`` (coefficient of ``x_n`` in
``e_i . x_m``) and ``right[i, m, n]`` (coefficient of ``x_n`` in ``x_m . e_i``).

The strictly upper triangular 4x4 algebra over a base algebra, together with
a dual bimodule on which the inner cubic map ``G0.A^3 - A^3.G0`` is a
nonzero cubic derivation, is built by :func:`build_triangular_example`.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConfigurationError, DimensionError, ValidationError

BASIS_TOL = 1e-10

# (row, col) of the six slots a1..a6 in the strictly upper 4x4 layout
TRIANGULAR_SLOTS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _frozen(arr, dtype=complex) -> np.ndarray:
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class NormDescriptor:
    """A norm on coordinate vectors.

    kinds: ``weighted-sum`` (sum of w_i |c_i|), ``max`` (max of w_i |c_i|),
    ``frobenius`` (Euclidean), ``block-sum`` / ``block-max`` (sum / max over
    consecutive blocks of size ``block`` of the ``inner`` norm of each block).
    """

    kind: str
    weights: Optional[tuple] = None
    block: int = 1
    inner: str = "frobenius"

    KINDS = ("weighted-sum", "max", "frobenius", "block-sum", "block-max")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigurationError(f"unknown norm kind {self.kind!r}")
        if self.inner not in ("frobenius", "weighted-sum", "max"):
            raise ConfigurationError(f"unknown inner norm {self.inner!r}")

    def __call__(self, coords) -> Union[float, np.ndarray]:
        """Norm over the last axis; returns a float for 1-d input."""
        x = np.abs(np.asarray(coords, dtype=complex))
        if self.kind in ("weighted-sum", "max"):
            if self.weights is not None:
                x = x * np.asarray(self.weights, dtype=float)
            out = x.sum(axis=-1) if self.kind == "weighted-sum" else x.max(axis=-1)
        elif self.kind == "frobenius":
            out = np.sqrt((x * x).sum(axis=-1))
        else:
            blocks = x.reshape(x.shape[:-1] + (-1, self.block))
            if self.inner == "frobenius":
                per = np.sqrt((blocks * blocks).sum(axis=-1))
            elif self.inner == "weighted-sum":
                per = blocks.sum(axis=-1)
            else:
                per = blocks.max(axis=-1)
            out = per.sum(axis=-1) if self.kind == "block-sum" else per.max(axis=-1)
        return float(out) if np.ndim(out) == 0 else out

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.weights is not None:
            d["weights"] = list(self.weights)
        if self.kind.startswith("block"):
            d["block"] = self.block
            d["inner"] = self.inner
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NormDescriptor":
        w = d.get("weights")
        return cls(
            kind=d["kind"],
            weights=tuple(float(v) for v in w) if w is not None else None,
            block=int(d.get("block", 1)),
            inner=d.get("inner", "frobenius"),
        )


@dataclass(frozen=True, eq=False)
class AlgebraSpec:
    name: str
    mul: np.ndarray
    norm: NormDescriptor
    submult_const: float = 1.0
    real: bool = False  # sample real probes only

    def __post_init__(self):
        mul = _frozen(self.mul)
        if mul.ndim != 3 or len(set(mul.shape)) != 1:
            raise DimensionError(f"structure tensor must be (d, d, d), got {mul.shape}")
        object.__setattr__(self, "mul", mul)
        if not self.submult_const > 0:
            raise ConfigurationError("submult_const must be positive")

    @property
    def dim(self) -> int:
        return self.mul.shape[0]

    def zero(self) -> "Element":
        return Element(np.zeros(self.dim, dtype=complex), self)

    def basis(self, i: int) -> "Element":
        c = np.zeros(self.dim, dtype=complex)
        c[i] = 1.0
        return Element(c, self)

    def element(self, coords) -> "Element":
        return Element(coords, self)

    def product(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Batched product of coordinate arrays (..., d) x (..., d)."""
        return np.einsum("...i,...j,ijk->...k", A, B, self.mul)

    def cube(self, A: np.ndarray) -> np.ndarray:
        return self.product(self.product(A, A), A)

    def __repr__(self):
        return f"AlgebraSpec({self.name!r}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class BimoduleSpec:
    name: str
    algebra: AlgebraSpec
    left: np.ndarray
    right: np.ndarray
    norm: NormDescriptor
    action_const: float = 1.0

    def __post_init__(self):
        left, right = _frozen(self.left), _frozen(self.right)
        d = self.algebra.dim
        if left.ndim != 3 or left.shape[0] != d or left.shape[1] != left.shape[2]:
            raise DimensionError(f"left action must be ({d}, m, m), got {left.shape}")
        if right.shape != left.shape:
            raise DimensionError(f"right action shape {right.shape} != {left.shape}")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def dim(self) -> int:
        return self.left.shape[1]

    def zero(self) -> "Element":
        return Element(np.zeros(self.dim, dtype=complex), self)

    def basis(self, i: int) -> "Element":
        c = np.zeros(self.dim, dtype=complex)
        c[i] = 1.0
        return Element(c, self)

    def element(self, coords) -> "Element":
        return Element(coords, self)

    def act_left(self, A: np.ndarray, X: np.ndarray) -> np.ndarray:
        """Batched a.x for coordinate arrays (..., d) and (..., m)."""
        return np.einsum("...i,...m,imn->...n", A, X, self.left)

    def act_right(self, X: np.ndarray, A: np.ndarray) -> np.ndarray:
        """Batched x.a for coordinate arrays (..., m) and (..., d)."""
        return np.einsum("...m,...i,imn->...n", X, A, self.right)

    def __repr__(self):
        return f"BimoduleSpec({self.name!r}, dim={self.dim}, over {self.algebra.name!r})"


Parent = Union[AlgebraSpec, BimoduleSpec]


@dataclass(frozen=True, eq=False)
class Element:
    coords: np.ndarray
    parent: Parent = field(repr=False)

    def __post_init__(self):
        c = _frozen(self.coords)
        if c.shape != (self.parent.dim,):
            raise DimensionError(
                f"coords of length {c.shape} do not match {self.parent!r}"
            )
        if not np.all(np.isfinite(c)):
            raise ValidationError("element has non-finite coordinates")
        object.__setattr__(self, "coords", c)

    @property
    def norm(self) -> float:
        return self.parent.norm(self.coords)

    def _check(self, other: "Element"):
        if other.parent is not self.parent:
            raise DimensionError(f"{self.parent!r} and {other.parent!r} differ")

    def __add__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.coords + other.coords, self.parent)

    def __sub__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.coords - other.coords, self.parent)

    def __neg__(self) -> "Element":
        return Element(-self.coords, self.parent)

    def __mul__(self, scalar) -> "Element":
        if isinstance(scalar, Element):
            return NotImplemented
        return Element(complex(scalar) * self.coords, self.parent)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Element":
        return Element(self.coords / complex(scalar), self.parent)

    def allclose(self, other: "Element", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.coords, other.coords, rtol=0, atol=atol))


@dataclass(frozen=True)
class ScalarSample:
    value: complex
    kind: str = "general"  # "unit-arc" | "real" | "general"
    n0: int = 1

    def __post_init__(self):
        if self.kind == "unit-arc":
            theta = np.angle(self.value) % (2 * np.pi)
            if abs(abs(self.value) - 1.0) > 1e-14:
                raise ValidationError(f"arc sample {self.value} is not unimodular")
            if theta > 2 * np.pi / self.n0 + 1e-12 and not np.isclose(theta, 2 * np.pi):
                raise ValidationError(f"arc sample {self.value} outside T_1/{self.n0}")


def arc_samples(n0: int = 1, count: int = 16) -> tuple:
    """``count`` points uniformly spaced on the closed arc [0, 2 pi / n0]."""
    thetas = np.linspace(0.0, 2 * np.pi / n0, count)
    vals = [complex(np.cos(t), np.sin(t)) for t in thetas]
    vals[0] = 1.0 + 0.0j
    return tuple(ScalarSample(v, "unit-arc", n0) for v in vals)


def homogeneity_samples(n0: int = 1) -> tuple:
    extra = (
        ScalarSample(1.0 + 0j, "real", n0),
        ScalarSample(-1.0 + 0j, "real", n0),
        ScalarSample(1j, "general", n0),
        ScalarSample(2.0 + 0j, "real", n0),
        ScalarSample(0.5 + 0j, "real", n0),
    )
    return arc_samples(n0) + extra


# --- element-level operations -------------------------------------------------


def mul(a: Element, b: Element) -> Element:
    a._check(b)
    if not isinstance(a.parent, AlgebraSpec):
        raise DimensionError("mul needs algebra elements")
    return Element(a.parent.product(a.coords, b.coords), a.parent)


def cube(a: Element) -> Element:
    return mul(mul(a, a), a)


def _check_action(a: Element, x: Element):
    if not isinstance(a.parent, AlgebraSpec) or not isinstance(x.parent, BimoduleSpec):
        raise ConfigurationError("action needs an algebra element and a module element")
    if x.parent.algebra is not a.parent:
        raise ConfigurationError(f"{x.parent!r} is not attached to {a.parent!r}")


def left_action(a: Element, x: Element) -> Element:
    _check_action(a, x)
    return Element(x.parent.act_left(a.coords, x.coords), x.parent)


def right_action(x: Element, a: Element) -> Element:
    _check_action(a, x)
    return Element(x.parent.act_right(x.coords, a.coords), x.parent)


# --- constructors ----------------------------------------------------------------


def scalar_algebra() -> AlgebraSpec:
    return AlgebraSpec("scalar-complex", np.ones((1, 1, 1)), NormDescriptor("weighted-sum"))


def matrix_algebra(n: int = 2, real: bool = False) -> AlgebraSpec:
    """M_n with matrix units e_{rc} at index r*n + c and the Frobenius norm."""
    d = n * n
    t = np.zeros((d, d, d))
    for r, c, s in itertools.product(range(n), repeat=3):
        # e_{rc} e_{cs} = e_{rs}
        t[r * n + c, c * n + s, r * n + s] = 1.0
    name = f"mat{n}-{'real' if real else 'complex'}"
    return AlgebraSpec(name, t, NormDescriptor("frobenius"), 1.0, real)


def regular_bimodule(alg: AlgebraSpec) -> BimoduleSpec:
    """The algebra as a bimodule over itself."""
    right = np.transpose(alg.mul, (1, 0, 2))
    return BimoduleSpec(alg.name, alg, alg.mul, right, alg.norm, alg.submult_const)


def _block_norm(base: AlgebraSpec, kind: str) -> NormDescriptor:
    inner = base.norm.kind if base.norm.kind in ("frobenius", "weighted-sum", "max") else None
    if inner is None or base.norm.weights is not None:
        raise ConfigurationError(f"base norm {base.norm} cannot be lifted blockwise")
    return NormDescriptor(kind, block=base.dim, inner=inner)


def triangular_algebra(base: AlgebraSpec) -> AlgebraSpec:
    """Strictly upper triangular 4x4 matrices over ``base`` with the sum norm.

    Coordinates: slot j (a1..a6 in TRIANGULAR_SLOTS order) occupies
    ``[j*m, (j+1)*m)`` where m = base.dim.
    """
    m = base.dim
    pos = {rc: j for j, rc in enumerate(TRIANGULAR_SLOTS)}
    t = np.zeros((6 * m, 6 * m, 6 * m), dtype=complex)
    for (j, (r, c)), (k, (r2, c2)) in itertools.product(enumerate(TRIANGULAR_SLOTS), repeat=2):
        if c != r2:
            continue
        out = pos[(r, c2)]
        t[j * m:(j + 1) * m, k * m:(k + 1) * m, out * m:(out + 1) * m] = base.mul
    return AlgebraSpec(
        f"triangular[{base.name}]", t, _block_norm(base, "block-sum"), base.submult_const, base.real
    )


def _predual_products(base: AlgebraSpec):
    """Left/right multiplication of T on U = {x I + N}: U-coordinates are the
    diagonal block x followed by the six strictly upper slots."""
    m = base.dim
    pos = {rc: j + 1 for j, rc in enumerate(TRIANGULAR_SLOTS)}
    du = 7 * m
    P_left = np.zeros((6 * m, du, du), dtype=complex)  # e_i . u_n -> u
    P_right = np.zeros((6 * m, du, du), dtype=complex)  # u_n . e_i -> u
    bt = np.transpose(base.mul, (1, 0, 2))  # bt[alpha, beta] = e_beta e_alpha
    for j, (r, c) in enumerate(TRIANGULAR_SLOTS):
        i_sl = slice(j * m, (j + 1) * m)
        s = pos[(r, c)]
        # diagonal block: e_alpha E_rc * x I = (e_alpha x) E_rc, and x I * e_alpha E_rc = (x e_alpha) E_rc
        P_left[i_sl, 0:m, s * m:(s + 1) * m] = base.mul
        P_right[i_sl, 0:m, s * m:(s + 1) * m] = bt
        for (r2, c2) in TRIANGULAR_SLOTS:
            n_sl = slice(pos[(r2, c2)] * m, (pos[(r2, c2)] + 1) * m)
            if c == r2:
                o = pos[(r, c2)]
                P_left[i_sl, n_sl, o * m:(o + 1) * m] = base.mul
            if c2 == r:
                o = pos[(r2, c)]
                P_right[i_sl, n_sl, o * m:(o + 1) * m] = bt
    return P_left, P_right


def triangular_dual_module(base: AlgebraSpec, tri: Optional[AlgebraSpec] = None) -> BimoduleSpec:
    """Dual bimodule of U = {x I + N : x in base, N in T} with the max norm.

    Coordinates: functional f0 (paired with the diagonal x) followed by
    f1..f6 paired with the slots of N; the pairing is sum_k f_k x_k.
    Actions are the dual ones, <F.A, X> = <F, A X> and <A.F, X> = <F, X A>,
    so on X = x I the right action reduces to sum_j f_j(a_j x).
    """
    tri = tri if tri is not None else triangular_algebra(base)
    P_left, P_right = _predual_products(base)
    right = np.transpose(P_left, (0, 2, 1))
    left = np.transpose(P_right, (0, 2, 1))
    return BimoduleSpec(
        f"triangular-dual[{base.name}]", tri, left, right, _block_norm(base, "block-max"),
        base.submult_const,
    )


def triangular_predual_multiply(base: AlgebraSpec, A: np.ndarray, X: np.ndarray, side: str) -> np.ndarray:
    """A X (side='left') or X A (side='right') for A in T and X in U, via
    dense 4x4 block matrices; independent of the structure tensors above."""
    m = base.dim
    MA = np.zeros((4, 4, m), dtype=complex)
    MX = np.zeros((4, 4, m), dtype=complex)
    for j, (r, c) in enumerate(TRIANGULAR_SLOTS):
        MA[r, c] = A[j * m:(j + 1) * m]
        MX[r, c] = X[(j + 1) * m:(j + 2) * m]
    for r in range(4):
        MX[r, r] = X[:m]
    L, R = (MA, MX) if side == "left" else (MX, MA)
    P = np.einsum("rsi,scj,ijk->rck", L, R, base.mul)
    out = np.zeros(7 * m, dtype=complex)
    out[:m] = P[0, 0]
    for j, (r, c) in enumerate(TRIANGULAR_SLOTS):
        out[(j + 1) * m:(j + 2) * m] = P[r, c]
    return out


def seeded_dual_functional(module: BimoduleSpec, seed: int, real: bool = True) -> Element:
    """Random G0 with f0 = 0 and g1..g6 seeded; G0 is an element of the dual module T*."""
    rng = np.random.default_rng(seed)
    m = module.dim // 7
    c = np.zeros(module.dim, dtype=complex)
    c[m:] = rng.standard_normal(6 * m)
    if not real:
        c[m:] = c[m:] + 1j * rng.standard_normal(6 * m)
    return Element(c, module)


def build_triangular_example(base: Optional[AlgebraSpec] = None, g0=None, seed: int = 0):
    """Return (T, T-dual bimodule, D) with D(A) = G0.A^3 - A^3.G0.

    ``g0`` may be an Element of the dual module, a coordinate vector, or None
    (seeded random functional).
    """
    from .maps import inner_cubic_map

    base = base if base is not None else matrix_algebra(2, real=True)
    report = validate_algebra(base)
    if not report.passed:
        raise ValidationError(f"base algebra {base.name} failed validation: {report.failures}")
    tri = triangular_algebra(base)
    dual = triangular_dual_module(base, tri)
    if g0 is None:
        g0 = seeded_dual_functional(dual, seed, real=base.real)
    elif not isinstance(g0, Element):
        g0 = Element(g0, dual)
    D = inner_cubic_map(dual, g0)
    return tri, dual, D


# --- validation --------------------------------------------------------------------


@dataclass
class ValidationReport:
    name: str
    associativity_defect: float
    measured_const: float
    declared_const: float
    norm_defect: float
    module_defect: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "associativity_defect": self.associativity_defect,
            "module_defect": self.module_defect,
            "measured_const": self.measured_const,
            "declared_const": self.declared_const,
            "norm_defect": self.norm_defect,
            "passed": self.passed,
            "failures": list(self.failures),
        }


def _probe_coords(dim: int, n: int, seed: int, real: bool) -> np.ndarray:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, dim))
    if not real:
        X = X + 1j * rng.standard_normal((n, dim))
    return X.astype(complex)


def _norm_defect(norm: NormDescriptor, X: np.ndarray, seed: int) -> float:
    """Worst violation of positivity, absolute homogeneity and the triangle
    inequality over the probe rows."""
    rng = np.random.default_rng(seed + 1)
    nx = norm(X)
    worst = 0.0
    if np.any(nx <= 0):
        worst = max(worst, 1.0)
    if norm(np.zeros(X.shape[-1])) != 0.0:
        worst = max(worst, 1.0)
    lam = rng.standard_normal(len(X)) + 1j * rng.standard_normal(len(X))
    hom = np.abs(norm(lam[:, None] * X) - np.abs(lam) * nx) / np.maximum(1.0, np.abs(lam) * nx)
    worst = max(worst, float(hom.max()))
    Y = np.roll(X, 1, axis=0)
    tri = norm(X + Y) - (nx + norm(Y))
    worst = max(worst, float(np.maximum(tri, 0.0).max()) / max(1.0, float(nx.max())))
    return worst


def validate_algebra(spec: Parent, probes=None, n_probes: int = 64, seed: int = 0) -> ValidationReport:
    """Basis-level associativity, probe-level norm axioms and measured
    submultiplicativity / action constant.  ``probes`` may be a ProbeSet or
    an array of coordinates of the algebra; defaults to seeded Gaussians."""
    alg = spec.algebra if isinstance(spec, BimoduleSpec) else spec
    if probes is None:
        A = _probe_coords(alg.dim, n_probes, seed, alg.real)
    else:
        A = np.asarray(getattr(probes, "points", probes), dtype=complex)
    M = alg.mul
    failures = []
    # (e_i e_j) e_k - e_i (e_j e_k)
    lhs = np.einsum("ijq,qkn->ijkn", M, M)
    rhs = np.einsum("jkq,iqn->ijkn", M, M)
    assoc = float(np.abs(lhs - rhs).max()) if alg.dim else 0.0
    if assoc > BASIS_TOL:
        failures.append(f"associativity defect {assoc:.3e}")

    if isinstance(spec, BimoduleSpec):
        X = _probe_coords(spec.dim, len(A), seed + 7, alg.real)
        L, R = spec.left, spec.right
        d1 = np.abs(np.einsum("ijq,qmn->ijmn", M, L) - np.einsum("jmq,iqn->ijmn", L, L)).max()
        d2 = np.abs(np.einsum("ijq,qmn->ijmn", M, R) - np.einsum("imq,jqn->ijmn", R, R)).max()
        # (a.x).b = a.(x.b)
        d3 = np.abs(np.einsum("imq,jqn->ijmn", L, R) - np.einsum("jmq,iqn->ijmn", R, L)).max()
        module_defect = float(max(d1, d2, d3))
        if module_defect > BASIS_TOL:
            failures.append(f"module action defect {module_defect:.3e}")
        na, nx = alg.norm(A), spec.norm(X)
        ratios = np.concatenate([
            spec.norm(spec.act_left(A, X)) / (na * nx),
            spec.norm(spec.act_right(X, A)) / (na * nx),
        ])
        measured = float(ratios.max())
        declared = spec.action_const
        norm_defect = max(_norm_defect(alg.norm, A, seed), _norm_defect(spec.norm, X, seed))
    else:
        module_defect = 0.0
        B = np.roll(A, 1, axis=0)
        na, nb = alg.norm(A), alg.norm(B)
        measured = float((alg.norm(alg.product(A, B)) / (na * nb)).max())
        declared = alg.submult_const
        norm_defect = _norm_defect(alg.norm, A, seed)
    if measured > declared * (1 + BASIS_TOL):
        failures.append(f"measured constant {measured:.6g} exceeds declared {declared:.6g}")
    if norm_defect > BASIS_TOL:
        failures.append(f"norm axiom defect {norm_defect:.3e}")
    return ValidationReport(spec.name, assoc, measured, declared, norm_defect, module_defect, failures)


# --- builtins and files --------------------------------------------------------------

BUILTIN_NAMES = ("scalar-complex", "mat2-real", "mat2-complex", "triangular-example")


def builtin(name: str):
    """Return (algebra, bimodule) for a builtin name."""
    if name == "scalar-complex":
        alg = scalar_algebra()
    elif name == "mat2-real":
        alg = matrix_algebra(2, real=True)
    elif name == "mat2-complex":
        alg = matrix_algebra(2, real=False)
    elif name == "triangular-example":
        base = matrix_algebra(2, real=True)
        tri = triangular_algebra(base)
        return tri, triangular_dual_module(base, tri)
    else:
        raise ConfigurationError(f"unknown builtin algebra {name!r}; choose from {BUILTIN_NAMES}")
    return alg, regular_bimodule(alg)


def _decode_complex(nested) -> np.ndarray:
    arr = np.asarray(nested, dtype=float)
    if arr.shape[-1] != 2:
        raise ConfigurationError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _encode_complex(arr: np.ndarray) -> list:
    arr = np.asarray(arr, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def algebra_to_dict(alg: AlgebraSpec) -> dict:
    return {
        "name": alg.name,
        "dim": alg.dim,
        "mul": _encode_complex(alg.mul.reshape(alg.dim, alg.dim, alg.dim)),
        "norm": alg.norm.to_dict(),
        "submult_const": alg.submult_const,
        "real": alg.real,
    }


def algebra_from_dict(d: dict) -> AlgebraSpec:
    try:
        dim = int(d["dim"])
        mul_t = _decode_complex(d["mul"])
    except KeyError as exc:
        raise ConfigurationError(f"algebra definition is missing {exc}") from None
    if mul_t.size != dim ** 3:
        raise DimensionError(f"mul has {mul_t.size} entries, expected {dim ** 3}")
    return AlgebraSpec(
        d.get("name", "file-algebra"),
        mul_t.reshape(dim, dim, dim),
        NormDescriptor.from_dict(d.get("norm", {"kind": "frobenius"})),
        float(d.get("submult_const", 1.0)),
        bool(d.get("real", False)),
    )


def load_algebra(path: Union[str, Path]):
    """Load a JSON algebra definition; returns (algebra, regular bimodule)."""
    with open(path) as fh:
        alg = algebra_from_dict(json.load(fh))
    return alg, regular_bimodule(alg)


def save_algebra(alg: AlgebraSpec, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        json.dump(algebra_to_dict(alg), fh)


def perturb_structure(alg: AlgebraSpec, index: Sequence[int], amount: float) -> AlgebraSpec:
    t = np.array(alg.mul)
    t[tuple(index)] += amount
    return AlgebraSpec(alg.name + "+perturbed", t, alg.norm, alg.submult_const, alg.real)

"""Config-driven scenarios: validate -> build -> perturb -> measure -> recover
-> certify, with deterministic JSON reports and CSV tables.

Exit codes: 0 all checks pass, 1 a certificate (or validation) fails,
2 configuration or hypothesis error.  Errors name the config path at fault.
"""

from __future__ import annotations

import copy
import json
import math
import os
import re
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .algebra import (
    BUILTIN_NAMES,
    Element,
    algebra_from_dict,
    builtin,
    perturb_structure,
    regular_bimodule,
    TRIANGULAR_SLOTS,
    build_triangular_example,
    matrix_algebra,
    seeded_dual_functional,
    validate_algebra,
)
from .certify import (
    check_fixed_point_bound,
    check_power_corollary,
    check_recovered_structure,
    check_stability_bound,
    superstability_check,
)
from .control import ControlFunction, contraction_constant, make_perturbed_map, measure_delta
from .errors import (
    CertificateViolationError,
    CubicLabError,
    DivergenceError,
    HypothesisFailure,
    NoContractionError,
)
from .maps import PerturbationSpec, cube_map, inner_cubic_map, residual_sweep, zero_map
from .probes import make_probes
from .recover import direct_backward, direct_forward, fixed_point_recover

SCHEMA = "cubicderiv.report/1"
ENGINES = ("forward", "backward", "fixed-point")
MAP_KINDS = ("inner", "cube", "zero")
FORMATS = ("json", "csv")
EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class ScenarioError(CubicLabError):
    """A failure tied to a config location."""

    def __init__(self, path: str, message: str, cause: Optional[BaseException] = None):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.cause = cause


# --- config ------------------------------------------------------------------------


@dataclass
class ScenarioConfig:
    name: str
    algebra: dict
    map: dict
    control: dict
    perturbation: Optional[dict]
    engine: str
    probes: dict
    tolerances: dict = field(default_factory=lambda: {"recover": 1e-10, "certify_slack": 1e-10})
    measure: dict = field(default_factory=lambda: {"orbit_levels": 60})
    output: dict = field(default_factory=lambda: {"directory": "reports", "formats": ["json", "csv"]})

    def to_dict(self) -> dict:
        return copy.deepcopy({
            "name": self.name, "algebra": self.algebra, "map": self.map,
            "control": self.control, "perturbation": self.perturbation,
            "engine": self.engine, "probes": self.probes, "tolerances": self.tolerances,
            "measure": self.measure, "output": self.output,
        })

    @property
    def exponent(self) -> float:
        c = self.control
        return c["r"] if c["kind"] == "power" else c["p"] + c["q"]


def _get(d: dict, key: str, path: str, kind=None, default=...):
    if not isinstance(d, dict):
        raise ScenarioError(path, "expected a table")
    if key not in d:
        if default is ...:
            raise ScenarioError(f"{path}.{key}" if path else key, "required field is missing")
        return default
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise ScenarioError(f"{path}.{key}" if path else key, f"expected {kind}, got {type(v).__name__}")
    return v


_NUM = (int, float)


def resolve_config(raw: dict) -> ScenarioConfig:
    """Validate a raw config dict, fill defaults, and check engine/control
    compatibility (r < 3 forward, r > 3 backward, k < 1 fixed-point)."""
    if not isinstance(raw, dict):
        raise ScenarioError("<root>", "config must be a JSON object")
    known = {"name", "algebra", "map", "control", "perturbation", "engine",
             "probes", "tolerances", "measure", "output"}
    for key in raw:
        if key not in known:
            raise ScenarioError(key, "unknown field")
    name = _get(raw, "name", "", str)

    alg = _get(raw, "algebra", "", dict)
    if ("builtin" in alg) == ("file" in alg):
        raise ScenarioError("algebra", "give exactly one of 'builtin' or 'file'")
    if "builtin" in alg and alg["builtin"] not in BUILTIN_NAMES:
        raise ScenarioError("algebra.builtin", f"unknown builtin {alg['builtin']!r}")
    alg = dict(alg)
    if "perturb_structure" in alg:
        ps = _get(alg, "perturb_structure", "algebra", dict)
        _get(ps, "index", "algebra.perturb_structure", list)
        _get(ps, "amount", "algebra.perturb_structure", _NUM)

    mp = dict(_get(raw, "map", "", dict, {"kind": "inner", "g0_seed": 1}))
    mp.setdefault("kind", "inner")
    if mp["kind"] not in MAP_KINDS:
        raise ScenarioError("map.kind", f"expected one of {MAP_KINDS}")
    if mp["kind"] == "inner":
        _get(mp, "g0_seed", "map", int)

    ctl = dict(_get(raw, "control", "", dict))
    kind = _get(ctl, "kind", "control", str)
    if kind not in ("power", "product"):
        raise ScenarioError("control.kind", "expected 'power' or 'product'")
    ctl.setdefault("delta", 1.0)
    if kind == "power":
        _get(ctl, "r", "control", _NUM)
        if ctl["r"] < 0:
            raise ScenarioError("control.r", "must be nonnegative")
    else:
        for k in ("p", "q"):
            _get(ctl, k, "control", _NUM)
            if ctl[k] < 0:
                raise ScenarioError(f"control.{k}", "must be nonnegative")

    engine = _get(raw, "engine", "", str, "forward")
    if engine not in ENGINES:
        raise ScenarioError("engine", f"expected one of {ENGINES}")

    pert = raw.get("perturbation")
    if pert is not None:
        pert = dict(_get(raw, "perturbation", "", dict))
        pk = _get(pert, "kind", "perturbation", str)
        if pk not in PerturbationSpec.KINDS:
            raise ScenarioError("perturbation.kind", f"expected one of {PerturbationSpec.KINDS}")
        _get(pert, "epsilon", "perturbation", _NUM)
        _get(pert, "seed", "perturbation", int)
        if pk == "power-decay":
            pert.setdefault("r", ctl.get("r", 0.0))
        if pk == "product-pq":
            pert.setdefault("p", ctl.get("p", 0.0))
            pert.setdefault("q", ctl.get("q", 0.0))
        pert.setdefault("support", "annihilator")

    pr = dict(_get(raw, "probes", "", dict))
    _get(pr, "seed", "probes", int)
    pr.setdefault("count", 100)
    pr.setdefault("norm_range", [1e-2, 1e2])
    pr.setdefault("n0", 1)
    lo, hi = pr["norm_range"]
    if not (0 < lo <= hi):
        raise ScenarioError("probes.norm_range", "expected 0 < low <= high")

    tol = {"recover": 1e-10, "certify_slack": 1e-10}
    tol.update(_get(raw, "tolerances", "", dict, {}))
    meas = {"orbit_levels": 60}
    meas.update(_get(raw, "measure", "", dict, {}))
    out = {"directory": "reports", "formats": ["json", "csv"]}
    out.update(_get(raw, "output", "", dict, {}))
    for fmt in out["formats"]:
        if fmt not in FORMATS:
            raise ScenarioError("output.formats", f"unknown format {fmt!r}")

    cfg = ScenarioConfig(name, alg, mp, ctl, pert, engine, pr, tol, meas, out)
    _check_compatibility(cfg)
    return cfg


def _check_compatibility(cfg: ScenarioConfig) -> None:
    e = cfg.exponent
    where = "control.r" if cfg.control["kind"] == "power" else "control.p"
    if e == 3:
        raise ScenarioError(where, "exponent 3 is excluded: the dyadic series diverges in both "
                                   "directions (ratio 2^3/8 = 1)", DivergenceError("ratio 1"))
    if cfg.engine in ("forward", "fixed-point") and e > 3:
        raise ScenarioError("engine", f"{cfg.engine} recovery needs exponent < 3, got {e}",
                            DivergenceError(f"forward ratio {2.0 ** e / 8:.6g} >= 1"))
    if cfg.engine == "backward" and e < 3:
        raise ScenarioError("engine", f"backward recovery needs exponent > 3, got {e}",
                            DivergenceError(f"backward ratio {8 / 2.0 ** e:.6g} >= 1"))


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ScenarioError("<file>", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return resolve_config(raw)


# --- builtin scenarios -----------------------------------------------------------------

_BASE = {
    "algebra": {"builtin": "triangular-example"},
    "map": {"kind": "inner", "g0_seed": 1},
    "probes": {"count": 100, "seed": 3, "norm_range": [1e-2, 1e2], "n0": 1},
}

_POWER = re.compile(r"^(power|fixed-point)-r([0-9.]+)-eps([0-9.e-]+)$")


def builtin_scenario(name: str) -> dict:
    """Raw config for a named builtin:

    triangular-exact        f = D, power control r = 1, forward engine
    power-r<R>-eps<E>       D + power-decay(E, r = R), direct engine by R
    fixed-point-r<R>-eps<E> the same perturbation, fixed-point engine
    superstable-exact       f = D under product control p = q = 1
    scalar-linear           f(t) = t^3 + 0.1 t under p = q = 1
    """
    raw = copy.deepcopy(_BASE)
    raw["name"] = name
    if name == "triangular-exact":
        raw.update(control={"kind": "power", "delta": 1.0, "r": 1.0}, perturbation=None, engine="forward")
        return raw
    if name == "superstable-exact":
        raw.update(control={"kind": "product", "delta": 1.0, "p": 1.0, "q": 1.0},
                   perturbation=None, engine="forward")
        return raw
    if name == "scalar-linear":
        raw.update(
            algebra={"builtin": "scalar-complex"}, map={"kind": "cube"},
            control={"kind": "product", "delta": 1.0, "p": 1.0, "q": 1.0},
            perturbation={"kind": "linear", "epsilon": 0.1, "seed": 0,
                          "direction": [1.0], "weights": [1.0], "support": "full"},
            engine="forward",
        )
        return raw
    m = _POWER.match(name)
    if m:
        r, eps = float(m.group(2)), float(m.group(3))
        engine = "fixed-point" if m.group(1) == "fixed-point" else ("forward" if r < 3 else "backward")
        raw.update(
            control={"kind": "power", "delta": 1.0, "r": r},
            perturbation={"kind": "power-decay", "epsilon": eps, "r": r, "seed": 11},
            engine=engine,
        )
        return raw
    raise ScenarioError("--scenario", f"unknown builtin scenario {name!r}")


# --- building blocks ---------------------------------------------------------------


def build_structures(cfg: ScenarioConfig):
    """(algebra, module, validation dicts) for the configured algebra."""
    spec = cfg.algebra
    try:
        if "builtin" in spec:
            alg, mod = builtin(spec["builtin"])
        else:
            with open(spec["file"]) as fh:
                alg = algebra_from_dict(json.load(fh))
            mod = None
        if "perturb_structure" in spec:
            ps = spec["perturb_structure"]
            alg = perturb_structure(alg, ps["index"], float(ps["amount"]))
            mod = None
        if mod is None:
            mod = regular_bimodule(alg)
    except OSError as exc:
        raise ScenarioError("algebra.file", f"cannot read {spec.get('file')}: {exc.strerror}") from None
    except (CubicLabError, ValueError, IndexError) as exc:
        raise ScenarioError("algebra", str(exc), exc) from None
    va = validate_algebra(alg)
    vm = validate_algebra(mod)
    return alg, mod, {"algebra": va.to_dict(), "module": vm.to_dict()}


def build_map(cfg: ScenarioConfig, mod):
    kind = cfg.map["kind"]
    try:
        if kind == "zero":
            return zero_map(mod)
        if kind == "cube":
            return cube_map(mod)
        seed = cfg.map["g0_seed"]
        if mod.name.startswith("triangular-dual"):
            g0 = seeded_dual_functional(mod, seed, real=mod.algebra.real)
        else:
            rng = np.random.default_rng(seed)
            c = rng.standard_normal(mod.dim)
            if not mod.algebra.real:
                c = c + 1j * rng.standard_normal(mod.dim)
            g0 = Element(c, mod)
        return inner_cubic_map(mod, g0)
    except CubicLabError as exc:
        raise ScenarioError("map", str(exc), exc) from None


def build_perturbation(cfg: ScenarioConfig, alg, mod) -> Optional[PerturbationSpec]:
    p = cfg.perturbation
    if p is None:
        return None
    try:
        return PerturbationSpec(
            p["kind"], float(p["epsilon"]), alg, mod,
            direction=None if p.get("direction") is None else np.asarray(p["direction"], dtype=complex),
            weights=None if p.get("weights") is None else np.asarray(p["weights"], dtype=complex),
            r=float(p.get("r", 0.0)), p=float(p.get("p", 0.0)), q=float(p.get("q", 0.0)),
            seed=int(p["seed"]), support=p.get("support", "annihilator"),
        )
    except CubicLabError as exc:
        raise ScenarioError("perturbation", str(exc), exc) from None


def build_probes(cfg: ScenarioConfig, alg):
    pr = cfg.probes
    return make_probes(alg, int(pr["count"]), int(pr["seed"]), tuple(pr["norm_range"]), int(pr["n0"]))


# --- pipeline ------------------------------------------------------------------------


@dataclass
class Outcome:
    name: str
    command: str
    exit_code: int
    report: dict
    tables: dict = field(default_factory=dict)  # filename suffix -> CSV text

    @property
    def status(self) -> str:
        return {EXIT_PASS: "pass", EXIT_FAIL: "fail"}.get(self.exit_code, "error")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _error_exit(exc: BaseException) -> int:
    cause = getattr(exc, "cause", None) or exc
    return EXIT_FAIL if isinstance(cause, CertificateViolationError) else EXIT_ERROR


def _recover(cfg, f, phi, probes):
    tol = float(cfg.tolerances["recover"])
    try:
        if cfg.engine == "forward":
            return direct_forward(f, phi, probes, tol)
        if cfg.engine == "backward":
            return direct_backward(f, phi, probes, tol)
        return fixed_point_recover(f, phi, probes, tol)
    except (DivergenceError, NoContractionError) as exc:
        raise ScenarioError("engine", str(exc), exc) from None
    except HypothesisFailure as exc:
        raise ScenarioError("control", str(exc), exc) from None
    except CertificateViolationError as exc:
        raise ScenarioError("engine", str(exc), exc) from None
    except CubicLabError as exc:
        raise ScenarioError("tolerances.recover", str(exc), exc) from None


def _certificates(cfg, f, rec, delta) -> list:
    name = cfg.name
    slack = float(cfg.tolerances["certify_slack"])
    certs = [check_stability_bound(f, rec, scenario=name)]
    if cfg.engine == "fixed-point":
        certs.append(check_fixed_point_bound(f, rec, scenario=name))
    if cfg.control["kind"] == "power" and cfg.engine != "fixed-point":
        certs.append(check_power_corollary(f, rec, delta, float(cfg.control["r"]), scenario=name))
    for c in certs:
        c.slack = slack
    return certs


def execute(cfg: ScenarioConfig, command: str = "certify") -> Outcome:
    """Run one scenario up to the stage the command needs."""
    report = {
        "schema": SCHEMA, "tool_version": __version__, "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": cfg.to_dict(), "error": None,
    }
    tables = {}
    try:
        alg, mod, validation = build_structures(cfg)
        report["validation"] = validation
        failed = [f"{k}: {msg}" for k, v in validation.items() for msg in v["failures"]]
        if failed or command == "validate":
            code = EXIT_FAIL if failed else EXIT_PASS
            return _finish(cfg, command, code, report, tables)

        D = build_map(cfg, mod)
        h = build_perturbation(cfg, alg, mod)
        f = D if h is None else make_perturbed_map(D, h)
        probes = build_probes(cfg, alg)
        report["probes"] = probes.describe()
        ctl = cfg.control
        shape = ControlFunction.from_dict({**ctl, "delta": 1.0})

        if command == "superstability":
            if ctl["kind"] != "product":
                raise ScenarioError("control.kind", "superstability needs a product control")
            est = measure_delta(f, shape, probes)
            report["delta"] = est.to_dict()
            cert = superstability_check(f, est.delta, float(ctl["p"]), float(ctl["q"]), probes, cfg.name)
            report["certificates"] = [cert.to_dict()]
            tables["superstability"] = cert.to_csv()
            return _finish(cfg, command, EXIT_PASS if cert.passed else EXIT_FAIL, report, tables)

        direction = "backward" if cfg.engine == "backward" else "forward"
        est = measure_delta(f, shape, probes, int(cfg.measure["orbit_levels"]), direction)
        report["delta"] = est.to_dict()
        if not est.finite:
            raise ScenarioError("control", f"measured control level is infinite (witness {est.witness})",
                                HypothesisFailure("delta = inf"))
        phi = shape.with_delta(est.delta)
        if cfg.engine == "fixed-point":
            report["k_hat"] = contraction_constant(phi, probes)
        rec = _recover(cfg, f, phi, probes)
        if h is not None:
            rec.attach_exact(D)
        report["recovery"] = rec.to_dict()
        if command == "recover":
            sound = report["recovery"]["verdicts"].get("tails_sound", True)
            return _finish(cfg, command, EXIT_PASS if sound else EXIT_FAIL, report, tables)

        try:
            certs = _certificates(cfg, f, rec, est.delta)
        except CubicLabError as exc:
            raise ScenarioError("control", str(exc), exc) from None
        report["certificates"] = [c.to_dict() for c in certs]
        report["structure"] = check_recovered_structure(f, rec, probes)
        for c in certs:
            tables[c.family] = c.to_csv()
        code = EXIT_PASS if all(c.passed for c in certs) else EXIT_FAIL
        return _finish(cfg, command, code, report, tables)
    except ScenarioError as exc:
        report["error"] = {"path": exc.path, "message": str(exc),
                           "type": type(exc.cause or exc).__name__}
        return _finish(cfg, command, _error_exit(exc), report, tables)


def _finish(cfg, command, code, report, tables) -> Outcome:
    out = Outcome(cfg.name, command, code, report, tables)
    report["exit_code"] = code
    report["status"] = out.status
    out.report = _jsonable(report)
    return out


# --- output ----------------------------------------------------------------------------


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1, allow_nan=False) + "\n"


def strip_timestamp(report: dict) -> dict:
    out = dict(report)
    out.pop("timestamp", None)
    return out


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.chmod(tmp, 0o644)
    os.replace(tmp, path)


def write_outcome(outcome: Outcome, directory, formats=("json", "csv")) -> list:
    """Write <name>.<command>.json and <name>.<family>.csv files; returns the paths."""
    directory = Path(directory)
    written = []
    if "json" in formats:
        p = directory / f"{outcome.name}.{outcome.command}.json"
        _atomic_write(p, dumps_report(outcome.report))
        written.append(p)
    if "csv" in formats:
        for family, text in sorted(outcome.tables.items()):
            p = directory / f"{outcome.name}.{family}.csv"
            _atomic_write(p, text)
            written.append(p)
    return written


# --- sweep -------------------------------------------------------------------------------

SWEEP_R = (0.0, 1.0, 2.0, 4.0, 5.0)
SWEEP_EPS = (0.3, 0.03, 0.003)
SWEEP_COLUMNS = ("scenario", "r", "epsilon", "engine", "delta_hat", "N", "max_tail",
                 "stability_min_margin", "corollary_min_margin", "status")


def sweep_configs(base: Optional[dict] = None, rs=SWEEP_R, epss=SWEEP_EPS) -> list:
    """Power-decay scenarios over the (r, epsilon) grid; ``base`` overrides the
    algebra, map and probe sections."""
    out = []
    for r in rs:
        for eps in epss:
            raw = builtin_scenario(f"power-r{r:g}-eps{eps:g}")
            if base:
                for key in ("algebra", "map", "probes", "tolerances", "measure"):
                    if key in base:
                        raw[key] = copy.deepcopy(base[key])
            out.append(resolve_config(raw))
    return out


def sweep_row(outcome: Outcome) -> dict:
    rep = outcome.report
    certs = {c["family"]: c for c in rep.get("certificates", [])}
    ctl = rep["config"]["control"]
    pert = rep["config"]["perturbation"] or {}
    return {
        "scenario": outcome.name,
        "r": ctl.get("r"),
        "epsilon": pert.get("epsilon"),
        "engine": rep["config"]["engine"],
        "delta_hat": rep.get("delta", {}).get("delta_hat"),
        "N": rep.get("recovery", {}).get("N"),
        "max_tail": rep.get("recovery", {}).get("max_tail"),
        "stability_min_margin": certs.get("stability", {}).get("min_margin"),
        "corollary_min_margin": certs.get("power-corollary", {}).get("min_margin"),
        "status": outcome.status,
    }


def sweep_csv(rows: list) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


# --- triangular example reproduction ------------------------------------------------------

REPRO_TOL = 1e-12


def triangular_pairing(g0: np.ndarray, A: np.ndarray, X: np.ndarray, n: int = 2) -> np.ndarray:
    """<D(A), x> = g3(c x) - g3(x c) with c = a1 a4 a6, computed with dense
    n x n blocks straight from the slot entries (independent of the tensors).

    ``A`` rows are triangular coordinates, ``X`` rows are diagonal predual
    entries x; g3 is the functional in the (0, 3) slot."""
    m = n * n
    blk = lambda v, j: v[..., j * m:(j + 1) * m].reshape(v.shape[:-1] + (n, n))  # noqa: E731
    pos = {s: j for j, s in enumerate(TRIANGULAR_SLOTS)}
    c = blk(A, pos[(0, 1)]) @ blk(A, pos[(1, 2)]) @ blk(A, pos[(2, 3)])
    g3 = blk(g0, 1 + pos[(0, 3)])
    x = X.reshape(X.shape[:-1] + (n, n))
    return np.sum(g3 * (c @ x), axis=(-2, -1)) - np.sum(g3 * (x @ c), axis=(-2, -1))


def triangular_reproduction(g0_seed: int = 1, probe_seed: int = 3, count: int = 200) -> dict:
    """Build the triangular example over real 2 x 2 matrices and check it end
    to end: structure validation, the slot pairing oracle, the cubic identity
    on oracle values, and the three residual families."""
    t0 = time.perf_counter()
    base = matrix_algebra(2, real=True)
    tri, dual, D = build_triangular_example(base, seed=g0_seed)
    g0 = seeded_dual_functional(dual, g0_seed, real=True).coords
    v_alg, v_mod = validate_algebra(tri), validate_algebra(dual)
    probes = make_probes(tri, count - tri.dim, probe_seed)
    P = probes.points
    m = base.dim
    rng = np.random.default_rng(probe_seed + 1)
    X = rng.standard_normal((len(P), m))

    V = D.values(P)
    direct = np.einsum("pi,pi->p", V[:, :m], X)
    oracle = triangular_pairing(g0, P, X)
    pair_defect = float(np.abs(direct - oracle).max() / max(1.0, np.abs(oracle).max()))
    off_slot = float(np.abs(V[:, m:]).max())

    A, B = probes.pair_coords()
    XA = rng.standard_normal((len(A), m))
    terms = [triangular_pairing(g0, 2 * A + B, XA), triangular_pairing(g0, 2 * A - B, XA),
             triangular_pairing(g0, A + B, XA), triangular_pairing(g0, A - B, XA),
             triangular_pairing(g0, A, XA)]
    combo = terms[0] + terms[1] - 2 * terms[2] - 2 * terms[3] - 12 * terms[4]
    scale = sum(np.abs(t) for t in terms[:2]) + 2 * np.abs(terms[2]) + 2 * np.abs(terms[3]) + 12 * np.abs(terms[4])
    oracle_cubic = float((np.abs(combo) / np.maximum(1.0, scale)).max())

    summary = residual_sweep(D, probes)
    absolute, relative = summary.maxima(), summary.maxima(relative=True)
    d_ab = float(np.abs(D.values(tri.product(A, B))).max())
    runtime = time.perf_counter() - t0

    rows = [
        ("algebra associativity defect", v_alg.associativity_defect, v_alg.passed),
        ("module action defect", v_mod.module_defect, v_mod.passed),
        ("pairing oracle vs tensor map (rel)", pair_defect, pair_defect <= REPRO_TOL),
        ("D(A) outside the diagonal slot", off_slot, off_slot == 0.0),
        ("cubic identity on oracle values (rel)", oracle_cubic, oracle_cubic <= REPRO_TOL),
    ]
    for fam in ("cubic", "derivation", "homogeneity"):
        rows.append((f"{fam} residual max (abs)", absolute[fam], None))
        rows.append((f"{fam} residual max (rel)", relative[fam], relative[fam] <= REPRO_TOL))
    rows.append(("D(AB) max |entry|", d_ab, d_ab == 0.0))
    return {
        "probes": len(P), "pairs": len(A), "arc_scalars": len(probes.scalars),
        "g0_seed": g0_seed, "probe_seed": probe_seed,
        "rows": [{"check": c, "value": float(v), "passed": p} for c, v, p in rows],
        "passed": all(p for _, _, p in rows if p is not None),
        "runtime_s": runtime,
    }

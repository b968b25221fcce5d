"""Seeded probe sets: the finite stand-in for "for all a in A"."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraSpec, arc_samples, homogeneity_samples


@dataclass(frozen=True, eq=False)
class ProbeSet:
    """Probe points (basis elements first, then seeded random directions with
    log-spaced norms) and index pairs into them; index -1 is the zero element."""

    algebra: AlgebraSpec
    points: np.ndarray
    pairs: np.ndarray
    scalars: tuple
    homogeneity_scalars: tuple
    seed: int
    norm_range: tuple = (1e-2, 1e2)

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def norms(self) -> np.ndarray:
        return np.asarray(self.algebra.norm(self.points), dtype=float)

    def pair_coords(self):
        Z = np.vstack([self.points, np.zeros((1, self.algebra.dim), dtype=complex)])
        return Z[self.pairs[:, 0]], Z[self.pairs[:, 1]]

    def describe(self) -> dict:
        return {
            "seed": self.seed,
            "size": self.size,
            "pairs": len(self.pairs),
            "norm_range": list(self.norm_range),
            "arc_scalars": len(self.scalars),
            "n0": self.scalars[0].n0 if self.scalars else 1,
        }


def make_probes(
    alg: AlgebraSpec,
    count: int = 100,
    seed: int = 0,
    norm_range=(1e-2, 1e2),
    n0: int = 1,
    include_basis: bool = True,
) -> ProbeSet:
    rng = np.random.default_rng(seed)
    d = alg.dim
    X = rng.standard_normal((count, d))
    if not alg.real:
        X = X + 1j * rng.standard_normal((count, d))
    X = X.astype(complex)
    X /= np.asarray(alg.norm(X), dtype=float)[:, None]
    lo, hi = norm_range
    X *= np.logspace(np.log10(lo), np.log10(hi), count)[:, None]
    pts = np.vstack([np.eye(d, dtype=complex), X]) if include_basis else X
    n = len(pts)
    perm = rng.permutation(n)
    pairs = [(i, int(perm[i])) for i in range(n)]
    pairs += [(i, -1) for i in range(0, n, 4)]
    pairs += [(-1, i) for i in range(1, n, 8)]
    pts.setflags(write=False)
    pairs = np.asarray(pairs, dtype=int)
    pairs.setflags(write=False)
    return ProbeSet(alg, pts, pairs, arc_samples(n0), homogeneity_samples(n0), seed, tuple(norm_range))


def dyadic_orbit(P: np.ndarray, levels: int, direction: str = "forward") -> np.ndarray:
    """Stack of 2^k P (forward) or 2^-k P (backward) for k = 1..levels."""
    if levels <= 0:
        return np.zeros((0, P.shape[1]), dtype=complex)
    f = 2.0 if direction == "forward" else 0.5
    return np.concatenate([P * f ** k for k in range(1, levels + 1)])

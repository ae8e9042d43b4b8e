"""Gaussian unitary ensemble with a rank-r external source.

For V(M) = M^2/2 the density exp(-n Tr(M^2/2 - A M)) factorizes into
independent Gaussian entries centred at A, so a draw is M = G + A with G a
GUE matrix scaled to the interval [-2, 2].
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .eigen import hermitian_eigenvalues
from .equilibrium import EquilibriumData, Potential, solve_one_cut

__all__ = ["EnsembleSpec", "EdgeSample", "EmpiricalCdf", "draw_rng",
           "sample_matrix", "sample_spiked_gue", "sample_many", "edge_rescale",
           "largest_eig_cdf", "ks_distance", "gaussian_equilibrium",
           "outlier_count", "draws_to_csv"]

TOP_K = 10


@dataclass(frozen=True)
class EnsembleSpec:
    n: int
    r: int = 0
    a: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0 <= self.r <= self.n:
            raise ValueError("need 0 <= r <= n")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class EdgeSample:
    eigenvalues: np.ndarray
    zeta_coords: np.ndarray
    draw_index: int


def draw_rng(seed: int, draw_index: int) -> np.random.Generator:
    """Counter-based stream for one draw: Philox keyed by (seed, draw_index),
    so draws are independent of evaluation order."""
    ss = np.random.SeedSequence([int(seed), int(draw_index)])
    return np.random.Generator(np.random.Philox(ss))


def sample_matrix(spec: EnsembleSpec, draw_index: int = 0) -> np.ndarray:
    """One matrix G + A.  G does not depend on (r, a), so equal seeds give
    the same G for every source."""
    n = spec.n
    rng = draw_rng(spec.seed, draw_index)
    diag = rng.standard_normal(n) / np.sqrt(n)
    m = n * (n - 1) // 2
    re = rng.standard_normal(m) / np.sqrt(2 * n)
    im = rng.standard_normal(m) / np.sqrt(2 * n)
    M = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n, 1)
    M[iu] = re + 1j * im
    M = M + M.conj().T
    M[np.diag_indices(n)] = diag
    M[np.arange(spec.r), np.arange(spec.r)] += spec.a
    return M


_GAUSS_EQ: list = []


def gaussian_equilibrium() -> EquilibriumData:
    if not _GAUSS_EQ:
        _GAUSS_EQ.append(solve_one_cut(Potential.gaussian()))
    return _GAUSS_EQ[0]


def edge_rescale(s_eigs: np.ndarray, eq: EquilibriumData, spec: EnsembleSpec,
                 k: int = TOP_K) -> np.ndarray:
    """zeta = c1 n^{2/3} (lambda - beta) - delta for the top k eigenvalues,
    largest first; delta = c1 beta_dot (r/n) n^{2/3}."""
    lam = np.sort(np.asarray(s_eigs, dtype=float))[::-1][:k]
    n23 = spec.n ** (2.0 / 3.0)
    delta = eq.c1 * eq.beta_dot * (spec.r / spec.n) * n23
    return eq.c1 * n23 * (lam - eq.beta) - delta


def sample_spiked_gue(spec: EnsembleSpec, draw_index: int = 0,
                      eq: EquilibriumData | None = None) -> EdgeSample:
    eq = gaussian_equilibrium() if eq is None else eq
    lam = hermitian_eigenvalues(sample_matrix(spec, draw_index))
    return EdgeSample(lam, edge_rescale(lam, eq, spec), draw_index)


def sample_many(spec: EnsembleSpec, draws: int, start: int = 0) -> list:
    eq = gaussian_equilibrium()
    return [sample_spiked_gue(spec, start + i, eq) for i in range(draws)]


def outlier_count(sample: EdgeSample, threshold: float) -> int:
    return int(np.sum(sample.eigenvalues > threshold))


@dataclass(frozen=True)
class EmpiricalCdf:
    x: np.ndarray          # sorted sample
    dkw_band: float        # half-width at the requested confidence

    def __call__(self, t):
        return np.searchsorted(self.x, t, side="right") / self.x.size


def largest_eig_cdf(samples: Sequence, alpha: float = 0.01) -> EmpiricalCdf:
    """Empirical CDF of the top rescaled eigenvalue with the
    Dvoretzky-Kiefer-Wolfowitz band sqrt(log(2/alpha)/(2N))."""
    if len(samples) == 0:
        raise ValueError("no samples")
    x = np.array([s.zeta_coords[0] if isinstance(s, EdgeSample) else s
                  for s in samples], dtype=float)
    x.sort()
    return EmpiricalCdf(x, float(np.sqrt(np.log(2 / alpha) / (2 * x.size))))


def ks_distance(ecdf: EmpiricalCdf, F) -> float:
    """sup |F_emp - F| for a continuous model CDF F (vectorized callable)."""
    x = ecdf.x
    N = x.size
    Fx = np.asarray(F(x), dtype=float)
    upper = np.arange(1, N + 1) / N - Fx
    lower = Fx - np.arange(N) / N
    return float(max(upper.max(), lower.max()))


def draws_to_csv(samples: Sequence[EdgeSample]) -> str:
    k = min(TOP_K, len(samples[0].eigenvalues)) if samples else TOP_K
    n = len(samples[0].eigenvalues) if samples else 0
    head = ["draw_index"] + [f"lambda_{n - k + 1 + i}" for i in range(k)]
    lines = ["# schema=1", ",".join(head)]
    for s in samples:
        top = s.eigenvalues[-k:]
        lines.append(",".join([str(s.draw_index)] + [repr(float(v)) for v in top]))
    return "\n".join(lines) + "\n"

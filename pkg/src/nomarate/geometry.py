"""Poisson base-station deployments and nearest-BS association.

Deployments live in a square window ``[-W, W]^2``. UEs are only dropped in
the inner square ``[-(1-g)W, (1-g)W]^2`` so that every UE sees at least a
``g W`` margin of interferers in each direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree

from .rate_control import LinkSpec

#: affine interferer-distance rules ``40 + step * j`` of the fixture deployments
FIXTURE_RULES = {"high": 10.0, "medium": 20.0, "low": 30.0}


class CoCellSamplingError(RuntimeError):
    """No second UE could be dropped in the tagged UE's cell."""


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent counter-based generator for ``(seed, *key)``.

    The stream only depends on the key, never on how work is split.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class DeploymentConfig:
    density: float = 1e-4
    half_width: float = 707.1067811865476
    guard_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError(f"BS density must be positive, got {self.density}")
        if not self.half_width > 0:
            raise ValueError(f"window half-width must be positive, got {self.half_width}")
        if not 0.0 <= self.guard_fraction < 1.0:
            raise ValueError(f"guard fraction must lie in [0, 1), got {self.guard_fraction}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_mean_count(cls, density: float, mean_count: float, **kw) -> DeploymentConfig:
        """Window sized so that ``density * area == mean_count``."""
        if not mean_count > 0:
            raise ValueError("mean BS count must be positive")
        return cls(density, 0.5 * math.sqrt(mean_count / density), **kw)

    @property
    def area(self) -> float:
        return (2.0 * self.half_width) ** 2

    @property
    def mean_count(self) -> float:
        return self.density * self.area

    @property
    def inner_half_width(self) -> float:
        return (1.0 - self.guard_fraction) * self.half_width

    @property
    def guard_distance(self) -> float:
        return self.guard_fraction * self.half_width

    def with_density(self, density: float) -> DeploymentConfig:
        """Same expected BS count at another density (window rescaled)."""
        return replace(self, density=density, half_width=self.half_width * math.sqrt(self.density / density))


@dataclass(frozen=True, eq=False)
class NetworkRealization:
    bs_positions: np.ndarray
    ue_positions: np.ndarray
    serving_index: np.ndarray
    serving_distance: np.ndarray
    interferer_distances: tuple[np.ndarray, ...]

    @property
    def n_bs(self) -> int:
        return len(self.bs_positions)

    def link(self, ue: int, epsilon: float, alpha: float = 4.0) -> LinkSpec:
        return LinkSpec(self.serving_distance[ue], self.interferer_distances[ue], epsilon, alpha)


def associate(bs_positions, ue_position):
    """Nearest-BS association; returns ``(index, r_serving, interferer distances)``."""
    bs = np.asarray(bs_positions, dtype=float).reshape(-1, 2)
    if len(bs) < 2:
        raise ValueError("association needs at least two BSs")
    d = np.hypot(*(bs - np.asarray(ue_position, dtype=float)).T)
    k = int(np.argmin(d))
    return k, float(d[k]), np.sort(np.delete(d, k))


def _draw_bs(config: DeploymentConfig, rng: np.random.Generator) -> np.ndarray:
    while True:
        n = rng.poisson(config.mean_count)
        if n >= 2:
            return rng.uniform(-config.half_width, config.half_width, size=(n, 2))


def _co_cell_ue(tree, serving, inner, rng, max_batches, batch=512):
    for _ in range(max_batches):
        cand = rng.uniform(-inner, inner, size=(batch, 2))
        _, idx = tree.query(cand)
        hit = np.flatnonzero(idx == serving)
        if hit.size:
            return cand[hit[0]]
    raise CoCellSamplingError(f"no co-cell UE position after {max_batches * batch} candidates")


def sample_ppp(
    config: DeploymentConfig,
    rng: np.random.Generator | None = None,
    n_ues: int = 1,
    co_cell: bool = False,
    ue_positions=None,
    max_batches: int = 20,
) -> NetworkRealization:
    """Draw one PPP deployment and drop ``n_ues`` UEs in the inner region.

    With ``co_cell=True`` every UE after the first is rejection-sampled
    uniformly inside the inner region until it falls into the first UE's
    Voronoi cell. Explicit ``ue_positions`` bypass the UE sampling.
    """
    if rng is None:
        rng = substream(config.seed)
    bs = _draw_bs(config, rng)
    inner = config.inner_half_width
    tree = cKDTree(bs)

    if ue_positions is not None:
        ues = np.asarray(ue_positions, dtype=float).reshape(-1, 2)
    else:
        ues = [rng.uniform(-inner, inner, size=2)]
        for _ in range(n_ues - 1):
            if co_cell:
                _, serving = tree.query(ues[0])
                ues.append(_co_cell_ue(tree, serving, inner, rng, max_batches))
            else:
                ues.append(rng.uniform(-inner, inner, size=2))
        ues = np.array(ues)

    links = [associate(bs, u) for u in ues]
    return NetworkRealization(
        bs_positions=bs,
        ue_positions=ues,
        serving_index=np.array([k for k, _, _ in links]),
        serving_distance=np.array([r for _, r, _ in links]),
        interferer_distances=tuple(d for _, _, d in links),
    )


def make_fixture(rule, n: int, r_serving: float = 30.0):
    """Deterministic interferer distances ``40 + step * j`` for ``j = 1..n``.

    ``rule`` is ``"high"``, ``"medium"`` or ``"low"`` (steps 10, 20, 30 m)
    or the step itself.
    """
    if n <= 0:
        raise ValueError(f"fixture needs at least one interferer, got n={n}")
    step = FIXTURE_RULES[rule] if isinstance(rule, str) else float(rule)
    return float(r_serving), 40.0 + step * np.arange(1, n + 1, dtype=float)


def fixture_link(rule, n: int, epsilon: float, r_serving: float = 30.0, alpha: float = 4.0) -> LinkSpec:
    r, d = make_fixture(rule, n, r_serving)
    return LinkSpec(r, d, epsilon, alpha)

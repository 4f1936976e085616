"""Cross-task elite neighborhoods ranked by grey relational grade.

Each generation, every task publishes its top members into a shared
elite pool; every individual then keeps the K foreign elites whose
genotype embeddings are most similar to its own. Those neighbors serve
as second parents and weight-mutation guides, steering tasks toward
fusion strategies that already work elsewhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Individual, TaskPopulation, vectorize_genotype
from .operators import EvoConfig

NeighborhoodMap = dict[int, dict[int, list["NeighborEntry"]]]


@dataclass(frozen=True, eq=False)
class NeighborEntry:
    elite: Individual
    source_task: int
    grade: float


def grg(x, y, rho: float) -> float:
    """Grey relational grade between two equal-length vectors.

    With deviations d_i = |y_i - x_i| and their min/max over dimensions,
    the per-dimension coefficient is
    (d_min + rho * d_max) / (d_i + rho * d_max) and the grade is the
    coefficient mean. Identical vectors grade 1 by convention.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 1:
        raise ValueError("inputs must be equal-length 1-D vectors")
    if rho <= 0:
        raise ValueError("rho must be > 0")
    delta = np.abs(y - x)
    d_max = delta.max()
    if d_max == 0.0:
        return 1.0
    d_min = delta.min()
    zeta = (d_min + rho * d_max) / (delta + rho * d_max)
    return float(zeta.mean())


def _grg_many(x: np.ndarray, others: np.ndarray, rho: float) -> np.ndarray:
    """Row-wise ``grg`` of x against each row of a 2-D array."""
    delta = np.abs(others - x)
    d_max = delta.max(axis=1, keepdims=True)
    d_min = delta.min(axis=1, keepdims=True)
    safe = np.where(d_max > 0.0, d_max, 1.0)
    zeta = (d_min + rho * safe) / (delta + rho * safe)
    grades = zeta.mean(axis=1)
    return np.where(d_max[:, 0] > 0.0, grades, 1.0)


def select_elites(pop: TaskPopulation, fraction: float) -> list[Individual]:
    """Top ceil(fraction * N) members by (g1, g2, id)."""
    if not pop.members:
        return []
    count = math.ceil(fraction * len(pop.members))
    return sorted(pop.members, key=Individual.sort_key)[:count]


def build_neighborhoods(pops: list[TaskPopulation], cfg: EvoConfig) -> NeighborhoodMap:
    """Build per-individual neighborhoods of foreign elites.

    Every task contributes its elite fraction to a global pool; each
    individual keeps the top-K most similar elites from other tasks,
    ranked by grey relational grade over the genotype embedding (ties by
    source task position, then elite id). With a single task every
    neighborhood is empty.
    """
    elites: list[tuple[Individual, int, np.ndarray]] = []
    for pop in pops:
        pool_size = pop.task.pool_size
        for elite in select_elites(pop, cfg.elite_fraction):
            vec = vectorize_genotype(elite.genotype, pool_size)
            elites.append((elite, pop.task.position, vec))
    result: NeighborhoodMap = {}
    k = cfg.neighborhood_k
    for pop in pops:
        t = pop.task.position
        foreign = [(e, src, vec) for e, src, vec in elites if src != t]
        task_map: dict[int, list[NeighborEntry]] = {}
        if foreign:
            matrix = np.stack([vec for _, _, vec in foreign])
            for ind in pop.members:
                x = vectorize_genotype(ind.genotype, pop.task.pool_size)
                grades = _grg_many(x, matrix, cfg.grg_rho)
                order = sorted(
                    range(len(foreign)),
                    key=lambda i: (-grades[i], foreign[i][1], foreign[i][0].id),
                )
                task_map[ind.id] = [
                    NeighborEntry(foreign[i][0], foreign[i][1], float(grades[i]))
                    for i in order[:k]
                ]
        else:
            task_map = {ind.id: [] for ind in pop.members}
        result[t] = task_map
    return result

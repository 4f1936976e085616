"""Column standardization and recursive weighted fusion of pool entries."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Genotype

# Repeated elementwise products can explode; every fusion step is clamped
# to this range so downstream arithmetic stays finite.
CLAMP_LIMIT = 1.0e6


class FusionOverflowError(ArithmeticError):
    """A fusion intermediate became non-finite."""


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Per-column mean/std fitted on training rows only."""

    means: np.ndarray
    stds: np.ndarray

    def transform(self, rows: np.ndarray) -> np.ndarray:
        return (np.asarray(rows, dtype=np.float64) - self.means) / self.stds


def fit_standardizer(train_rows: np.ndarray) -> Standardizer:
    """Fit per-column mean and population std; zero-variance columns get
    std 1 so constant columns transform to exact zeros."""
    rows = np.asarray(train_rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise ValueError("standardizer needs at least 2 training rows")
    means = rows.mean(axis=0)
    stds = rows.std(axis=0)
    stds = np.where(stds > 0.0, stds, 1.0)
    return Standardizer(means, stds)


def fuse_step(acc: np.ndarray, nxt: np.ndarray, op: str, w_c: float, w_f: float) -> np.ndarray:
    """One fusion step: elementwise combine w_c * acc with w_f * nxt.

    Supported operators: add, mul, max, min, diff (weighted difference),
    avg (weighted mean). Output is clamped to +-1e6 and checked finite.
    """
    a = np.asarray(acc, dtype=np.float64)
    f = np.asarray(nxt, dtype=np.float64)
    if a.shape != f.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {f.shape}")
    a = w_c * a
    f = w_f * f
    if op == "add":
        out = a + f
    elif op == "mul":
        out = a * f
    elif op == "max":
        out = np.maximum(a, f)
    elif op == "min":
        out = np.minimum(a, f)
    elif op == "diff":
        out = a - f
    elif op == "avg":
        out = (a + f) / 2.0
    else:
        raise ValueError(f"unknown operator {op!r}")
    if not np.isfinite(out).all():
        raise FusionOverflowError(f"non-finite values after {op!r} step")
    return np.clip(out, -CLAMP_LIMIT, CLAMP_LIMIT)


def fuse_genotype(g: Genotype, pool: list[np.ndarray]) -> np.ndarray:
    """Left-fold ``fuse_step`` over a genotype's genes.

    The accumulator starts as the first gene's pool entry, unweighted;
    every following gene combines its entry into the accumulator in gene
    order. Result has the common L x d pool shape, in float64.
    """
    first = g.genes[0].pool_index
    if first >= len(pool):
        raise IndexError(f"pool index {first} outside pool of {len(pool)} entries")
    acc = np.asarray(pool[first], dtype=np.float64)
    if not np.isfinite(acc).all():
        raise FusionOverflowError(f"non-finite values in pool entry {first}")
    for gene in g.genes[1:]:
        if gene.pool_index >= len(pool):
            raise IndexError(f"pool index {gene.pool_index} outside pool of {len(pool)} entries")
        acc = fuse_step(acc, pool[gene.pool_index], gene.op, gene.w_c, gene.w_f)
    return acc

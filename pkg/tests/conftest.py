import numpy as np
import pytest

from evofusion.model import FusionGene, Genotype


class ScriptedRng:
    """Stand-in rng replaying scripted draws, for exact-case operator tests.

    ``integers`` pops from ``ints`` (values are used as-is and must fall
    inside the requested range), ``random`` pops from ``floats``,
    ``normal`` pops from ``normals``, ``choice`` pops index lists from
    ``choices``.
    """

    def __init__(self, ints=(), floats=(), normals=(), choices=()):
        self.ints = list(ints)
        self.floats = list(floats)
        self.normals = list(normals)
        self.choices = list(choices)

    def integers(self, low, high=None, size=None):
        if size is not None:
            return np.array([self.integers(low, high) for _ in range(int(size))])
        value = self.ints.pop(0)
        lo, hi = (0, low) if high is None else (low, high)
        assert lo <= value < hi, f"scripted int {value} outside [{lo}, {hi})"
        return value

    def random(self, size=None):
        if size is not None:
            return np.array([self.random() for _ in range(int(size))])
        return self.floats.pop(0)

    def normal(self, loc=0.0, scale=1.0, size=None):
        if size is not None:
            return np.array([self.normal(loc, scale) for _ in range(int(size))])
        return loc + scale * self.normals.pop(0)

    def uniform(self, low, high, size=None):
        if size is not None:
            return np.array([self.uniform(low, high) for _ in range(int(size))])
        return low + (high - low) * self.random()

    def choice(self, n, size=None, replace=True):
        picks = self.choices.pop(0)
        assert size is None or len(picks) == size
        return np.array(picks)


def make_genotype(*specs) -> Genotype:
    """Genotype from (pool_index, op, w_c, w_f) tuples; defaults fill in."""
    genes = []
    for spec in specs:
        if isinstance(spec, int):
            spec = (spec,)
        k = spec[0]
        op = spec[1] if len(spec) > 1 else "add"
        w_c = spec[2] if len(spec) > 2 else 1.0
        w_f = spec[3] if len(spec) > 3 else 1.0
        genes.append(FusionGene(k, op, w_c, w_f))
    return Genotype(tuple(genes))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)

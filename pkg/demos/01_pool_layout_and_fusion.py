"""Walk through the building blocks: the aligned pool layout, fusion
genotypes, and the recursive weighted fusion they describe.

Run:  python3 demos/01_pool_layout_and_fusion.py
"""
import numpy as np

from evofusion import (
    FusionGene,
    Genotype,
    fuse_genotype,
    map_pool_index,
    random_genotype,
    vectorize_genotype,
)

T = 4  # tasks, lexicographically ordered; every pool has 2*T - 1 entries

print("=== pool layout for a 4-task setup ===")
for tau in range(T):
    roles = [map_pool_index(tau, k, T) for k in range(2 * T - 1)]
    rendered = ", ".join(
        f"{k}:{r.kind[0]}{r.partner}" for k, r in enumerate(roles)
    )
    print(f"target task {tau}: {rendered}")
print("legend: s=own single-task entry, p=partnered entry (target primary),")
print("        a=role-reversed entry (target auxiliary). Index k < T always")
print("        refers to the same global task no matter who the target is.\n")

# A genotype is an ordered list of (pool index, operator, w_c, w_f) genes.
# The first gene seeds the accumulator; each later gene folds its pool
# entry in, elementwise.
rng = np.random.default_rng(7)
L, d = 6, 4
pool = [rng.normal(size=(L, d)).astype(np.float32) for _ in range(2 * T - 1)]

genotype = Genotype(
    (
        FusionGene(0, "add", 1.0, 1.0),  # seed: inert op/weights
        FusionGene(3, "add", 1.0, 0.5),
        FusionGene(5, "max", 0.8, 1.2),
    )
)
fused = fuse_genotype(genotype, pool)
print("=== fusing a three-gene genotype ===")
print("genes:", [(g.pool_index, g.op, g.w_c, g.w_f) for g in genotype.genes])
print("fused matrix shape:", fused.shape)
p0, p3, p5 = (pool[k].astype(np.float64) for k in (0, 3, 5))
manual = np.maximum(0.8 * (1.0 * p0 + 0.5 * p3), 1.2 * p5)
print("matches the hand-expanded expression:", np.array_equal(fused, manual))

# The fixed-length embedding lines genotypes up across tasks so their
# similarity can be measured directly.
print("\n=== genotype embedding (3 components per pool slot) ===")
vec = vectorize_genotype(genotype, 2 * T - 1)
print(np.array2string(vec.reshape(-1, 3), precision=3))
other = random_genotype(rng, 2 * T - 1, 5)
print("random genotype for comparison:", [(g.pool_index, g.op) for g in other.genes])
print("its embedding lives in the same 21-dim space:", vectorize_genotype(other, 7).shape)

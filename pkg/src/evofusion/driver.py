"""Orchestration of the multi-task search.

Each task evolves its own population; once per generation the tasks
exchange elite genotypes through the neighborhood mechanism and then
advance independently (offspring generation, batch DE weight
refinement, evaluation, NSGA-III truncation). Every task owns an rng
stream spawned from (seed, task position), so serial and threaded
schedules produce identical results.
"""
from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import TaskData
from .fusion import fuse_genotype
from .model import (
    FusionGene,
    Genotype,
    Individual,
    ObjectiveVector,
    TaskPopulation,
    random_genotype,
)
from .neighborhood import build_neighborhoods
from .nsga3 import ReferenceSet, das_dennis, environmental_selection, nondominated_sort
from .operators import EvoConfig, batch_de, generate_offspring
from .proxy import ProxyConfig, evaluate_individual

# id space: each task owns a disjoint block, keeping ids unique and
# schedule-independent
ID_STRIDE = 10 ** 7


@dataclass(eq=False)
class GenerationStats:
    generation: int
    best_g1: float
    best_g2: float
    mean_g1: float
    transfers: dict[int, int]


@dataclass(eq=False)
class TaskResult:
    task_name: str
    task_position: int
    population: TaskPopulation
    pareto: list[Individual]
    strategy: Individual
    initial_best: ObjectiveVector
    history: list[GenerationStats]


@dataclass(eq=False)
class RunResult:
    tasks: list[TaskResult]


def _task_rng(seed: int, position: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(position,)))


def _population_stats(pop: TaskPopulation, generation: int, transfers) -> GenerationStats:
    g1s = [ind.objectives.g1 for ind in pop.members]
    g2s = [ind.objectives.g2 for ind in pop.members]
    return GenerationStats(
        generation=generation,
        best_g1=min(g1s),
        best_g2=min(g2s),
        mean_g1=float(np.mean(g1s)),
        transfers=dict(transfers),
    )


def _validate_tasks(tasks: list[TaskData]) -> None:
    if not tasks:
        raise ValueError("need at least one task")
    pool_size = 2 * len(tasks) - 1
    for task in tasks:
        d = task.descriptor
        if len(task.pool) != pool_size:
            raise ValueError(f"task {d.name}: expected {pool_size} pool entries")
        shapes = {entry.shape for entry in task.pool}
        if len(shapes) != 1:
            raise ValueError(f"task {d.name}: pool entries disagree on shape: {shapes}")
        (shape,) = shapes
        if shape[0] != d.residue_count:
            raise ValueError(f"task {d.name}: pool rows {shape[0]} != residues {d.residue_count}")
        if task.labels.shape != (d.residue_count,):
            raise ValueError(f"task {d.name}: label length mismatch")
        if not np.isin(task.labels, (0, 1)).all():
            raise ValueError(f"task {d.name}: labels must be 0/1")
        if not task.labels[task.val_idx].any():
            raise ValueError(f"task {d.name}: validation split has no positives")
        if np.intersect1d(task.train_idx, task.val_idx).size:
            raise ValueError(f"task {d.name}: train and validation indices overlap")


def _pareto_front(pop: TaskPopulation) -> list[Individual]:
    fronts = nondominated_sort([ind.objectives for ind in pop.members])
    return sorted((pop.members[i] for i in fronts[0]), key=lambda ind: ind.id)


def select_strategy(pareto: list[Individual]) -> Individual:
    """Pick the deployment strategy from a Pareto set: lowest g1, then
    lowest g2, then shortest genotype, then lowest id."""
    if not pareto:
        raise ValueError("empty Pareto set")
    return min(pareto, key=lambda ind: (*ind.sort_key()[:2], len(ind.genotype), ind.id))


def predict(strategy: Individual, pool: list[np.ndarray]) -> np.ndarray:
    """Score a pool with a trained strategy: fuse, standardize, apply
    the stored head, sigmoid. Returns one probability per row."""
    if strategy.proxy is None:
        raise ValueError("strategy has no trained head")
    d = strategy.proxy.coefficients.shape[0]
    for i, entry in enumerate(pool):
        if entry.ndim != 2 or entry.shape[1] != d:
            raise ValueError(f"pool entry {i} has {entry.shape[1]} columns, head expects {d}")
    fused = fuse_genotype(strategy.genotype, pool)
    return strategy.proxy.scores(fused)


def naive_mean_genotype(pool_size: int) -> Genotype:
    """Equal-weight aggregation of the whole pool: a unit-weight add
    chain over every entry. Standardization makes this equivalent to the
    arithmetic mean of the pool."""
    genes = [FusionGene(0, "add", 1.0, 1.0)]
    genes += [FusionGene(k, "add", 1.0, 1.0) for k in range(1, pool_size)]
    return Genotype(tuple(genes))


def evaluate_naive_mean(task: TaskData, proxy_cfg: ProxyConfig) -> Individual:
    """Evaluate the fixed all-entries mean baseline on one task."""
    ind = Individual(
        id=task.descriptor.position * ID_STRIDE,
        task=task.descriptor.position,
        genotype=naive_mean_genotype(task.descriptor.pool_size),
    )
    evaluate_individual(ind, task, proxy_cfg)
    return ind


class _TaskState:
    """Mutable per-task evolution state owned by one worker at a time."""

    def __init__(self, task: TaskData, cfg: EvoConfig):
        self.task = task
        self.rng = _task_rng(cfg.seed, task.descriptor.position)
        self.next_id = task.descriptor.position * ID_STRIDE
        self.population = TaskPopulation(task.descriptor, [])
        # evaluation is a pure function of the genotype, so identical
        # genotypes (crossover copies, DE no-ops) reuse their result
        self.eval_cache: dict[Genotype, tuple] = {}

    def take_id(self) -> int:
        self.next_id += 1
        return self.next_id

    def evaluate(self, ind: Individual, proxy_cfg: ProxyConfig) -> None:
        hit = self.eval_cache.get(ind.genotype)
        if hit is None:
            evaluate_individual(ind, self.task, proxy_cfg)
            self.eval_cache[ind.genotype] = (ind.objectives, ind.proxy, ind.failed)
        else:
            ind.objectives, ind.proxy, ind.failed = hit


def _init_task(state: _TaskState, cfg: EvoConfig, proxy_cfg: ProxyConfig) -> None:
    members = []
    for _ in range(cfg.population_size):
        genotype = random_genotype(state.rng, state.task.descriptor.pool_size, cfg.max_feature_length)
        ind = Individual(state.take_id(), state.task.descriptor.position, genotype)
        state.evaluate(ind, proxy_cfg)
        members.append(ind)
    state.population = TaskPopulation(state.task.descriptor, members)


def _advance_task(
    state: _TaskState,
    neighborhood: dict,
    Z: ReferenceSet,
    generation: int,
    cfg: EvoConfig,
    proxy_cfg: ProxyConfig,
    selector,
) -> GenerationStats:
    pop = state.population
    transfers: Counter = Counter()
    offspring_genotypes = []
    for _ in range(cfg.population_size):
        child, source = generate_offspring(pop, neighborhood, cfg, state.rng)
        if source is not None:
            transfers[source] += 1
        offspring_genotypes.append(child)
    parent_best = min(pop.members, key=Individual.sort_key).genotype
    offspring_genotypes = batch_de(offspring_genotypes, parent_best, cfg, state.rng)
    offspring = []
    for genotype in offspring_genotypes:
        ind = Individual(state.take_id(), pop.task.position, genotype)
        state.evaluate(ind, proxy_cfg)
        offspring.append(ind)
    union = pop.members + offspring
    survivors = selector(union, cfg.population_size, Z, state.rng)
    state.population = TaskPopulation(pop.task, survivors)
    return _population_stats(state.population, generation, transfers)


def run_evolution(
    tasks: list[TaskData],
    cfg: EvoConfig,
    proxy_cfg: ProxyConfig,
    threads: int = 1,
    selector=environmental_selection,
) -> RunResult:
    """Run the full multi-task search and return per-task results.

    Deterministic given cfg.seed, independent of the thread count:
    tasks only interact at the generation barrier where neighborhoods
    are rebuilt from all populations. ``selector`` is the environmental
    selection hook: any callable (union, N, reference_set, rng) ->
    survivors can stand in for the NSGA-III default.
    """
    _validate_tasks(tasks)
    states = [_TaskState(task, cfg) for task in tasks]
    workers = max(1, threads)

    def for_each(fn):
        if workers == 1 or len(states) == 1:
            return [fn(s) for s in states]
        with ThreadPoolExecutor(max_workers=min(workers, len(states))) as pool:
            return list(pool.map(fn, states))

    for_each(lambda s: _init_task(s, cfg, proxy_cfg))
    initial_best = {
        s.task.descriptor.position: min(
            (ind.objectives for ind in s.population.members), key=tuple
        )
        for s in states
    }
    Z = das_dennis(2, cfg.population_size - 1)
    histories: dict[int, list[GenerationStats]] = {s.task.descriptor.position: [] for s in states}
    use_neighbors = cfg.transfer_prob > 0 and len(tasks) > 1
    for generation in range(1, cfg.generations + 1):
        if use_neighbors:
            nmap = build_neighborhoods([s.population for s in states], cfg)
        else:
            nmap = {s.task.descriptor.position: {} for s in states}
        stats = for_each(
            lambda s: _advance_task(
                s, nmap[s.task.descriptor.position], Z, generation, cfg, proxy_cfg, selector
            )
        )
        for state, stat in zip(states, stats):
            histories[state.task.descriptor.position].append(stat)
    results = []
    for state in states:
        pos = state.task.descriptor.position
        pareto = _pareto_front(state.population)
        results.append(
            TaskResult(
                task_name=state.task.descriptor.name,
                task_position=pos,
                population=state.population,
                pareto=pareto,
                strategy=select_strategy(pareto),
                initial_best=initial_best[pos],
                history=histories[pos],
            )
        )
    return RunResult(results)

"""File formats and the synthetic multi-task benchmark generator.

FMAT matrix format (bit-exact contract)
    offset 0   magic bytes b"FMAT1\\x00"
    offset 6   rows, unsigned 32-bit little-endian
    offset 10  cols, unsigned 32-bit little-endian
    offset 14  rows*cols IEEE-754 float32 little-endian, row-major

Benchmark directory layout
    <root>/manifest                      JSON manifest (schema below)
    <root>/<task_name>/pool_<k>.fmat     pool entry k, shape L x d
    <root>/<task_name>/labels.txt        one '0' or '1' character per line

The manifest lists task names in fixed lexicographic order and, per
task: residue count, feature dimension, positive count, the 2T-1 pool
file names in pool-index order, the label file, and the validation
split specification. Generated benchmarks also record which pool
indices carry planted signal, for oracle tests.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fusion import Standardizer
from .model import (
    FusionGene,
    Genotype,
    Individual,
    ObjectiveVector,
    TaskDescriptor,
    map_pool_index,
)
from .proxy import ProxyModel

FMAT_MAGIC = b"FMAT1\x00"
FMAT_HEADER_LEN = len(FMAT_MAGIC) + 8
SCHEMA_VERSION = 1

SIGNAL_AMPLITUDE = 3.0
SHARED_LATENT_SCALE = 0.3
MAX_LABEL_RETRIES = 1000


class FormatError(ValueError):
    """Malformed binary or manifest data; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def write_fmat(m: np.ndarray, path) -> None:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"need a non-empty 2-D matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix values must be finite")
    rows, cols = m.shape
    if rows >= 2 ** 32 or cols >= 2 ** 32:
        raise ValueError("matrix dimensions exceed the u32 header range")
    payload = np.ascontiguousarray(m, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(FMAT_MAGIC)
        fh.write(struct.pack("<II", rows, cols))
        fh.write(payload)


def read_fmat(path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic = data[: len(FMAT_MAGIC)]
    if magic != FMAT_MAGIC[: len(magic)]:
        raise FormatError("bad magic bytes", 0)
    if len(data) < FMAT_HEADER_LEN:
        raise FormatError("truncated header", len(data))
    rows, cols = struct.unpack_from("<II", data, len(FMAT_MAGIC))
    if rows < 1 or cols < 1:
        raise FormatError(f"invalid dimensions {rows}x{cols}", len(FMAT_MAGIC))
    expected = FMAT_HEADER_LEN + rows * cols * 4
    if len(data) < expected:
        raise FormatError(f"truncated payload, expected {expected} bytes", len(data))
    if len(data) > expected:
        raise FormatError("trailing bytes after payload", expected)
    flat = np.frombuffer(data, dtype="<f4", offset=FMAT_HEADER_LEN)
    return flat.reshape(rows, cols).copy()


@dataclass(frozen=True)
class TaskEntry:
    name: str
    residues: int
    feature_dim: int
    positive_count: int
    pool_files: tuple[str, ...]
    label_file: str
    val_ratio: float
    split_rule: str = "tail"
    informative_indices: tuple[int, ...] = ()


@dataclass(frozen=True)
class PoolManifest:
    schema_version: int
    tasks: tuple[TaskEntry, ...]
    root: Path = field(compare=False)

    @property
    def task_count(self) -> int:
        return len(self.tasks)

    def descriptor(self, position: int) -> TaskDescriptor:
        entry = self.tasks[position]
        return TaskDescriptor(
            name=entry.name,
            position=position,
            residue_count=entry.residues,
            pool_size=2 * self.task_count - 1,
        )


def _validate_manifest(manifest: PoolManifest) -> None:
    names = [t.name for t in manifest.tasks]
    if not names:
        raise ValueError("manifest lists no tasks")
    if names != sorted(names) or len(set(names)) != len(names):
        raise ValueError("task names must be unique and lexicographically ordered")
    pool_size = 2 * len(names) - 1
    for entry in manifest.tasks:
        if len(entry.pool_files) != pool_size:
            raise ValueError(
                f"task {entry.name}: expected {pool_size} pool files, got {len(entry.pool_files)}"
            )
        if not 0.0 < entry.val_ratio < 1.0:
            raise ValueError(f"task {entry.name}: val_ratio must lie in (0, 1)")
        if entry.split_rule != "tail":
            raise ValueError(f"task {entry.name}: unknown split rule {entry.split_rule!r}")
        for rel in list(entry.pool_files) + [entry.label_file]:
            if not (manifest.root / rel).is_file():
                raise ValueError(f"task {entry.name}: missing file {rel}")


def write_manifest(manifest: PoolManifest) -> Path:
    doc = {
        "schema_version": manifest.schema_version,
        "tasks": [t.name for t in manifest.tasks],
        "entries": {
            t.name: {
                "residues": t.residues,
                "feature_dim": t.feature_dim,
                "positive_count": t.positive_count,
                "pool_files": list(t.pool_files),
                "label_file": t.label_file,
                "val_ratio": t.val_ratio,
                "split_rule": t.split_rule,
                "informative_indices": list(t.informative_indices),
            }
            for t in manifest.tasks
        },
    }
    path = manifest.root / "manifest"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_manifest(root) -> PoolManifest:
    root = Path(root)
    path = root / "manifest"
    if not path.is_file():
        raise ValueError(f"no manifest found under {root}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported manifest schema_version {doc.get('schema_version')}")
    tasks = []
    for name in doc["tasks"]:
        raw = doc["entries"][name]
        tasks.append(
            TaskEntry(
                name=name,
                residues=int(raw["residues"]),
                feature_dim=int(raw["feature_dim"]),
                positive_count=int(raw["positive_count"]),
                pool_files=tuple(raw["pool_files"]),
                label_file=raw["label_file"],
                val_ratio=float(raw["val_ratio"]),
                split_rule=raw.get("split_rule", "tail"),
                informative_indices=tuple(raw.get("informative_indices", ())),
            )
        )
    manifest = PoolManifest(doc["schema_version"], tuple(tasks), root)
    _validate_manifest(manifest)
    return manifest


def tail_split(residues: int, val_ratio: float) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic split: the last ceil(val_ratio * L) rows validate."""
    n_val = math.ceil(val_ratio * residues)
    if n_val < 1 or n_val >= residues:
        raise ValueError(f"val_ratio {val_ratio} leaves an empty split for L={residues}")
    return np.arange(residues - n_val), np.arange(residues - n_val, residues)


def read_labels(path, expected_len: int | None = None) -> np.ndarray:
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if any(ln not in ("0", "1") for ln in lines):
        raise ValueError(f"label file {path} must contain one 0/1 per line")
    labels = np.array([int(ln) for ln in lines], dtype=np.int8)
    if expected_len is not None and labels.size != expected_len:
        raise ValueError(f"label file {path} has {labels.size} rows, expected {expected_len}")
    return labels


def write_labels(labels: np.ndarray, path) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels), encoding="utf-8")


@dataclass(eq=False)
class TaskData:
    """Everything the optimizer needs for one task."""

    descriptor: TaskDescriptor
    pool: list[np.ndarray]
    labels: np.ndarray
    train_idx: np.ndarray
    val_idx: np.ndarray


def load_task(manifest: PoolManifest, task_position: int) -> TaskData:
    """Load one task's pool, labels and deterministic split."""
    entry = manifest.tasks[task_position]
    descriptor = manifest.descriptor(task_position)
    pool = []
    for rel in entry.pool_files:
        matrix = read_fmat(manifest.root / rel)
        if matrix.shape != (entry.residues, entry.feature_dim):
            raise ValueError(
                f"pool file {rel}: shape {matrix.shape} does not match "
                f"({entry.residues}, {entry.feature_dim})"
            )
        pool.append(matrix)
    labels = read_labels(manifest.root / entry.label_file, entry.residues)
    train_idx, val_idx = tail_split(entry.residues, entry.val_ratio)
    return TaskData(descriptor, pool, labels, train_idx, val_idx)


def load_all_tasks(manifest: PoolManifest) -> list[TaskData]:
    return [load_task(manifest, t) for t in range(manifest.task_count)]


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic benchmark shape. ``informative`` lists, per task, the
    pool indices that carry planted label signal (default: each task's
    own single-task entry). ``cross_correlation`` scales the signal of
    informative entries whose aligned partner is another task."""

    task_count: int = 4
    residues: int = 400
    feature_dim: int = 128
    positive_rate: float = 0.025
    informative: tuple[tuple[int, ...], ...] | None = None
    cross_correlation: float = 0.5
    noise_scale: float = 1.0
    val_ratio: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.task_count < 1 or self.residues < 4:
            raise ValueError("need task_count >= 1 and residues >= 4")
        if not 0.0 < self.positive_rate < 0.5:
            raise ValueError("positive_rate must lie in (0, 0.5)")
        if not 0.0 <= self.cross_correlation <= 1.0:
            raise ValueError("cross_correlation must lie in [0, 1]")
        if not 0.0 < self.val_ratio < 1.0:
            raise ValueError("val_ratio must lie in (0, 1)")
        pool_size = 2 * self.task_count - 1
        if self.informative is not None:
            if len(self.informative) != self.task_count:
                raise ValueError("informative must list indices for every task")
            for idx_list in self.informative:
                if any(not 0 <= k < pool_size for k in idx_list):
                    raise ValueError("informative index out of pool range")

    def informative_for(self, task_position: int) -> tuple[int, ...]:
        if self.informative is None:
            return (task_position,)
        return self.informative[task_position]


def _draw_labels(rng: np.random.Generator, cfg: SynthConfig) -> np.ndarray:
    """Place floor(rate * L) positives uniformly, retrying until both
    split halves contain at least one positive."""
    n_pos = int(cfg.positive_rate * cfg.residues)
    if n_pos < 1:
        raise ValueError("positive_rate * residues must be >= 1")
    train_idx, val_idx = tail_split(cfg.residues, cfg.val_ratio)
    boundary = train_idx.size
    for _ in range(MAX_LABEL_RETRIES):
        positions = rng.choice(cfg.residues, size=n_pos, replace=False)
        labels = np.zeros(cfg.residues, dtype=np.int8)
        labels[positions] = 1
        if labels[:boundary].any() and labels[boundary:].any():
            return labels
    raise ValueError("could not place positives in both splits; increase residues or rate")


def generate_synthetic(cfg: SynthConfig, out_dir) -> PoolManifest:
    """Write a deterministic synthetic benchmark tree and its manifest.

    Labels are uniform with an exact floor(rate * L) positive count.
    Informative pool entries carry the task's label signal in their
    first max(1, d // 4) columns (amplitude 3 per unit noise), plus a
    latent residue vector shared across tasks; entries aligned to a
    partner task have their label signal scaled by cross_correlation.
    Every other entry is pure Gaussian noise.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    T = cfg.task_count
    pool_size = 2 * T - 1
    names = [f"task_{t:02d}" for t in range(T)]
    shared_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
    shared_latent = shared_rng.standard_normal(cfg.residues)
    n_signal_cols = max(1, cfg.feature_dim // 4)
    entries = []
    for t, name in enumerate(names):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1 + t,)))
        labels = _draw_labels(rng, cfg)
        informative = cfg.informative_for(t)
        task_dir = out_dir / name
        task_dir.mkdir(exist_ok=True)
        pool_files = []
        for k in range(pool_size):
            matrix = rng.normal(0.0, cfg.noise_scale, size=(cfg.residues, cfg.feature_dim))
            if k in informative:
                role = map_pool_index(t, k, T)
                strength = 1.0 if role.partner == t else cfg.cross_correlation
                signal = SIGNAL_AMPLITUDE * strength * labels
                matrix[:, :n_signal_cols] += signal[:, None]
                matrix[:, :n_signal_cols] += SHARED_LATENT_SCALE * shared_latent[:, None]
            rel = f"{name}/pool_{k}.fmat"
            write_fmat(matrix.astype(np.float32), out_dir / rel)
            pool_files.append(rel)
        label_rel = f"{name}/labels.txt"
        write_labels(labels, out_dir / label_rel)
        entries.append(
            TaskEntry(
                name=name,
                residues=cfg.residues,
                feature_dim=cfg.feature_dim,
                positive_count=int(labels.sum()),
                pool_files=tuple(pool_files),
                label_file=label_rel,
                val_ratio=cfg.val_ratio,
                informative_indices=tuple(sorted(informative)),
            )
        )
    manifest = PoolManifest(SCHEMA_VERSION, tuple(entries), out_dir)
    write_manifest(manifest)
    return manifest


def save_strategy(path, ind: Individual, task_name: str, feature_dim: int, pool_size: int) -> None:
    """Serialize a selected strategy (genotype plus trained head) as JSON."""
    if ind.objectives is None or ind.proxy is None:
        raise ValueError("strategy must be evaluated before saving")
    model: ProxyModel = ind.proxy
    doc = {
        "task": task_name,
        "pool_size": pool_size,
        "feature_dim": feature_dim,
        "genes": [[g.pool_index, g.op, g.w_c, g.w_f] for g in ind.genotype.genes],
        "objectives": [ind.objectives.g1, ind.objectives.g2],
        "coefficients": [float(v) for v in model.coefficients],
        "intercept": float(model.intercept),
        "standardizer": {
            "means": [float(v) for v in model.standardizer.means],
            "stds": [float(v) for v in model.standardizer.stds],
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_strategy(path) -> Individual:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    genes = tuple(FusionGene(int(k), op, float(wc), float(wf)) for k, op, wc, wf in doc["genes"])
    model = ProxyModel(
        coefficients=np.asarray(doc["coefficients"], dtype=np.float64),
        intercept=float(doc["intercept"]),
        standardizer=Standardizer(
            means=np.asarray(doc["standardizer"]["means"], dtype=np.float64),
            stds=np.asarray(doc["standardizer"]["stds"], dtype=np.float64),
        ),
    )
    g1, g2 = doc["objectives"]
    return Individual(
        id=0,
        task=-1,
        genotype=Genotype(genes),
        objectives=ObjectiveVector(float(g1), float(g2)),
        proxy=model,
    )

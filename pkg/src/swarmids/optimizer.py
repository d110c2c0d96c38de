"""Grasshopper-style swarm optimization over a bounded box, with a binary
adapter for feature masks.

Each agent's next position is a socially weighted sum of pairwise
interactions plus attraction to the best position found so far, under a
linearly decaying coefficient. Binary mode thresholds positions at 0.5
and applies SWAP / span-reversal diversity operators; equal-fitness
incumbent updates let the swarm drift across plateaus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, ObjectiveError


@dataclass(frozen=True)
class GoaConfig:
    """Swarm parameters. Bounds may be scalars or per-dimension arrays."""

    population_size: int = 30
    dim: int = 41
    max_iterations: int = 40
    fitness_delta_stop: float = 1e-3
    c_max: float = 1.0
    c_min: float = 1e-5
    s_f: float = 0.5
    s_l: float = 1.5
    swap_prob: float = 0.2
    reversion_prob: float = 1.0
    lower: float | Sequence[float] = 0.0
    upper: float | Sequence[float] = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.population_size < 2:
            raise ConfigError("population_size must be at least 2")
        if self.dim < 1:
            raise ConfigError("dim must be at least 1")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")
        if not self.c_min < self.c_max:
            raise ConfigError("c_min must be strictly below c_max")
        for name in ("swap_prob", "reversion_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        lb, ub = self.bounds()
        if not np.all(lb < ub):
            raise ConfigError("lower bound must be strictly below upper bound")

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lb = np.broadcast_to(np.asarray(self.lower, dtype=np.float64), (self.dim,)).copy()
        ub = np.broadcast_to(np.asarray(self.upper, dtype=np.float64), (self.dim,)).copy()
        return lb, ub


@dataclass
class Swarm:
    """Population state: continuous positions, their binary masks, last
    fitness values, and the best-so-far record."""

    positions: np.ndarray
    masks: np.ndarray
    fitness: np.ndarray
    best_position: np.ndarray | None = None
    best_mask: np.ndarray | None = None
    best_fitness: float = -np.inf
    iteration: int = 0
    c: float = np.nan

    @property
    def size(self) -> int:
        return self.positions.shape[0]


class IterationRecord(NamedTuple):
    iteration: int
    c: float
    best_fitness: float
    best_popcount: int | None


@dataclass(frozen=True)
class GoaResult:
    best_mask: np.ndarray | None
    best_position: np.ndarray
    best_fitness: float
    history: tuple[IterationRecord, ...]
    stop_reason: str


def mask_to_bitstring(mask: np.ndarray) -> str:
    return "".join("1" if bit else "0" for bit in np.asarray(mask, dtype=bool))


def bitstring_to_mask(bits: str) -> np.ndarray:
    if set(bits) - {"0", "1"}:
        raise ConfigError(f"mask bitstring must contain only 0/1: {bits!r}")
    return np.array([ch == "1" for ch in bits], dtype=bool)


def s_social(r, f: float = 0.5, l: float = 1.5):
    """Social interaction kernel f*exp(-r/l) - exp(-r): short-range
    repulsion, long-range attraction, s(0) = f - 1."""
    r = np.asarray(r, dtype=np.float64)
    out = f * np.exp(-r / l) - np.exp(-r)
    return float(out) if out.ndim == 0 else out


def update_c(t: int, config: GoaConfig) -> float:
    """Linear decay from c_max at t=0 to exactly c_min at t=max_iterations."""
    if not 0 <= t <= config.max_iterations:
        raise ConfigError(f"iteration {t} outside [0, {config.max_iterations}]")
    if t == config.max_iterations:
        return config.c_min
    return config.c_max - (t / config.max_iterations) * (config.c_max - config.c_min)


def binarize(position: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
    """Threshold at 0.5 (inclusive); an all-zero result is repaired by
    setting one bit (uniformly random with an rng, argmax otherwise)."""
    position = np.asarray(position, dtype=np.float64)
    mask = position >= 0.5
    if not mask.any():
        index = int(rng.integers(mask.size)) if rng is not None else int(np.argmax(position))
        mask = mask.copy()
        mask[index] = True
    return mask


def swap_mutation(mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Exchange the bits at two distinct uniformly chosen positions."""
    out = np.asarray(mask, dtype=bool).copy()
    i, j = rng.choice(out.size, size=2, replace=False)
    out[[i, j]] = out[[j, i]]
    return out


def flip_span(mask: np.ndarray, i: int, j: int) -> np.ndarray:
    """Invert every bit in positions [i, j] inclusive."""
    if not 0 <= i <= j < mask.size:
        raise ConfigError(f"span ({i}, {j}) out of range for {mask.size} bits")
    out = np.asarray(mask, dtype=bool).copy()
    out[i : j + 1] = ~out[i : j + 1]
    return out


def reversion_mutation(mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Invert a random span: start uniform, end uniform from the start.

    Single-index spans flip one bit, so the operator doubles as a local
    refinement move alongside its long-range jumps.
    """
    mask = np.asarray(mask, dtype=bool)
    i = int(rng.integers(mask.size))
    j = int(rng.integers(i, mask.size))
    return flip_span(mask, i, j)


def init_swarm(config: GoaConfig, rng: np.random.Generator | None = None) -> Swarm:
    """Uniform random positions in bounds; masks binarized; fitness unset."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    lb, ub = config.bounds()
    positions = rng.uniform(lb, ub, (config.population_size, config.dim))
    masks = np.stack([binarize(p, rng) for p in positions])
    fitness = np.full(config.population_size, np.nan)
    return Swarm(positions=positions, masks=masks, fitness=fitness, c=config.c_max)


def social_step(
    positions: np.ndarray,
    best_position: np.ndarray,
    c: float,
    config: GoaConfig,
    eps: float = 1e-12,
) -> np.ndarray:
    """One synchronous position update:

        x_i <- c * sum_j c * (ub-lb)/2 * s(|x_j - x_i|) * (x_j - x_i)/d_ij
               + best

    with pairs closer than ``eps`` skipped, then clamped to bounds.
    """
    lb, ub = config.bounds()
    diff = positions[None, :, :] - positions[:, None, :]  # diff[i, j] = x_j - x_i
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    keep = dist >= eps
    np.fill_diagonal(keep, False)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = ((ub - lb) / 2.0) * s_social(dist, config.s_f, config.s_l)[:, :, None] * diff / dist[:, :, None]
    terms[~keep] = 0.0
    moved = c * (c * terms.sum(axis=1)) + best_position[None, :]
    return np.clip(moved, lb, ub)


def update_positions(
    swarm: Swarm, c: float, config: GoaConfig, rng: np.random.Generator
) -> Swarm:
    """Apply the social step to every member, re-binarize, then mutate.

    Mutated masks are written back into positions as 0.0/1.0 so the
    mutation survives the next binarization. RNG draws happen in member
    order: binarize repair, swap gate (+indices), reversion gate
    (+span), empty-mask repair.
    """
    swarm.positions = social_step(swarm.positions, swarm.best_position, c, config)
    for i in range(swarm.size):
        mask = binarize(swarm.positions[i], rng)
        mutated = False
        if rng.random() < config.swap_prob:
            mask = swap_mutation(mask, rng)
            mutated = True
        if rng.random() < config.reversion_prob:
            mask = reversion_mutation(mask, rng)
            mutated = True
        if mutated and not mask.any():
            mask = mask.copy()
            mask[int(rng.integers(mask.size))] = True
        swarm.masks[i] = mask
        if mutated:
            swarm.positions[i] = mask.astype(np.float64)
    return swarm


def _evaluate(objective: Callable, argument: np.ndarray, mask_bits: str | None) -> float:
    try:
        return float(objective(argument))
    except Exception as exc:  # noqa: BLE001 - re-raised with context
        raise ObjectiveError(mask_bits if mask_bits is not None else "<continuous>", exc) from exc


def _run(objective: Callable, config: GoaConfig, binary: bool) -> GoaResult:
    config.validate()
    rng = np.random.default_rng(config.seed)
    swarm = init_swarm(config, rng)
    history: list[IterationRecord] = []
    stop_reason = "max_iterations"
    while True:
        t = swarm.iteration + 1
        swarm.iteration = t
        swarm.c = update_c(t - 1, config)
        for i in range(swarm.size):
            if binary:
                mask = swarm.masks[i]
                value = _evaluate(objective, mask.copy(), mask_to_bitstring(mask))
            else:
                value = _evaluate(objective, swarm.positions[i].copy(), None)
            swarm.fitness[i] = value
            # >= lets the incumbent drift across equal-fitness plateaus.
            if value >= swarm.best_fitness:
                swarm.best_fitness = value
                swarm.best_position = swarm.positions[i].copy()
                swarm.best_mask = swarm.masks[i].copy() if binary else None
        history.append(
            IterationRecord(
                iteration=t,
                c=swarm.c,
                best_fitness=swarm.best_fitness,
                best_popcount=int(swarm.best_mask.sum()) if binary else None,
            )
        )
        if len(history) >= 2 and (
            history[-1].best_fitness - history[-2].best_fitness < config.fitness_delta_stop
        ):
            stop_reason = "fitness_delta"
            break
        if t >= config.max_iterations:
            break
        if binary:
            update_positions(swarm, swarm.c, config, rng)
        else:
            swarm.positions = social_step(swarm.positions, swarm.best_position, swarm.c, config)
    return GoaResult(
        best_mask=swarm.best_mask if binary else None,
        best_position=swarm.best_position,
        best_fitness=swarm.best_fitness,
        history=tuple(history),
        stop_reason=stop_reason,
    )


def run(objective: Callable[[np.ndarray], float], config: GoaConfig) -> GoaResult:
    """Maximize ``objective(mask)`` over non-empty binary masks.

    Stops at ``max_iterations`` or when the best fitness improves by less
    than ``fitness_delta_stop`` between consecutive iterations (checked
    once two iterations exist). History records one row per iteration and
    is monotone non-decreasing in best fitness.
    """
    return _run(objective, config, binary=True)


def run_continuous(objective: Callable[[np.ndarray], float], config: GoaConfig) -> GoaResult:
    """Maximize ``objective(position)`` over the continuous box; no
    binarization and no mutation operators."""
    return _run(objective, config, binary=False)


def history_csv(history: Sequence[IterationRecord]) -> str:
    """Render history rows as CSV (iteration, c, best_fitness, best_popcount)."""
    lines = ["iteration,c,best_fitness,best_popcount"]
    for rec in history:
        pop = "" if rec.best_popcount is None else str(rec.best_popcount)
        lines.append(f"{rec.iteration},{float(rec.c)!r},{float(rec.best_fitness)!r},{pop}")
    return "\n".join(lines) + "\n"

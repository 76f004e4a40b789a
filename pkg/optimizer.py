"""Bounded differential evolution (rand/1/bin) for maximising a batched objective."""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from loguru import logger

from designs import SeedLike, latin_hypercube
from errors import InvalidArgumentError
from models import Bounds

# fun(X) -> (scores (m,), payload (m, r)); payload rows are recorded with the best point
BatchObjective = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


def default_pop_size(k: int) -> int:
    return max(4, min(10 * k, 150))


def reflect(X: np.ndarray, low: np.ndarray, high: np.ndarray) -> np.ndarray:
    """Mirror coordinates that left the box back inside; clip what still overshoots."""
    X = np.where(X < low, 2 * low - X, X)
    X = np.where(X > high, 2 * high - X, X)
    return np.clip(X, low, high)


@dataclass
class DeResult:
    x_best: np.ndarray
    score_best: float
    payload_best: np.ndarray
    evaluations: int
    # (iteration, best score so far, payload of that best)
    trace: List[Tuple[int, float, np.ndarray]] = field(default_factory=list)


class DifferentialEvolution:
    """rand/1/bin DE with reflection at the bounds.

    The population of every restart starts from a Latin hypercube scaled to the
    box. A trial replaces its parent when it scores at least as well. The best
    point across all restarts is kept with its score and payload.
    """

    def __init__(self, fun: BatchObjective, bounds: Bounds, budget: int, pop_size: Optional[int] = None,
                 F: float = 0.8, CR: float = 0.9, seed: SeedLike = None, restarts: int = 1):
        self.fun = fun
        self.bounds = bounds
        self.k = bounds.k
        self.pop_size = pop_size or default_pop_size(self.k)
        self.F = F
        self.CR = CR
        self.seed = seed
        self.restarts = restarts
        self.budget = budget

        if self.pop_size < 4:
            raise InvalidArgumentError("rand/1 mutation needs a population of at least 4")
        if restarts < 1:
            raise InvalidArgumentError("restarts must be >= 1")
        if budget // restarts < self.pop_size:
            raise InvalidArgumentError(
                f"budget {budget} over {restarts} restart(s) cannot fill a population of {self.pop_size}"
            )
        if not 0 <= CR <= 1 or F <= 0:
            raise InvalidArgumentError(f"need F > 0 and 0 <= CR <= 1, got F={F}, CR={CR}")

        self._best_x: Optional[np.ndarray] = None
        self._best_score = -np.inf
        self._best_payload: Optional[np.ndarray] = None
        self._trace: List[Tuple[int, float, np.ndarray]] = []
        self._iteration = 0
        self._evaluations = 0

    def _evaluate(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        scores, payload = self.fun(X)
        self._evaluations += X.shape[0]
        scores = np.asarray(scores, dtype=float)
        payload = np.asarray(payload, dtype=float).reshape(X.shape[0], -1)
        return scores, payload

    def _record(self, X: np.ndarray, scores: np.ndarray, payload: np.ndarray) -> None:
        i = int(np.argmax(scores))
        if self._best_x is None or scores[i] > self._best_score:
            self._best_x = X[i].copy()
            self._best_score = float(scores[i])
            self._best_payload = payload[i].copy()
        self._trace.append((self._iteration, self._best_score, self._best_payload.copy()))
        self._iteration += 1

    def _mutation_indices(self, rng: np.random.Generator) -> np.ndarray:
        NP = self.pop_size
        idx = np.empty((NP, 3), dtype=np.int64)
        for i in range(NP):
            others = np.delete(np.arange(NP), i)
            idx[i] = rng.choice(others, size=3, replace=False)
        return idx

    def _run_once(self, rng: np.random.Generator, budget: int) -> None:
        low, high = self.bounds.low, self.bounds.high
        NP = self.pop_size
        pop = low + latin_hypercube(NP, self.k, rng, centered=False) * self.bounds.width
        scores, payload = self._evaluate(pop)
        used = NP
        self._record(pop, scores, payload)

        while used + NP <= budget:
            r = self._mutation_indices(rng)
            mutant = pop[r[:, 0]] + self.F * (pop[r[:, 1]] - pop[r[:, 2]])
            cross = rng.random((NP, self.k)) < self.CR
            cross[np.arange(NP), rng.integers(self.k, size=NP)] = True
            trial = reflect(np.where(cross, mutant, pop), low, high)

            t_scores, t_payload = self._evaluate(trial)
            used += NP
            keep = t_scores >= scores
            pop[keep] = trial[keep]
            scores[keep] = t_scores[keep]
            payload[keep] = t_payload[keep]
            self._record(pop, scores, payload)

    def run(self) -> DeResult:
        per_restart = [self.budget // self.restarts] * self.restarts
        per_restart[-1] += self.budget % self.restarts
        seeds = np.random.SeedSequence(self.seed).spawn(self.restarts)
        for r, (child, budget) in enumerate(zip(seeds, per_restart)):
            self._run_once(np.random.default_rng(child), budget)
            logger.debug(f"🧬 DE restart {r + 1}/{self.restarts}: best score {self._best_score:.6g}")
        return DeResult(
            x_best=self._best_x,
            score_best=self._best_score,
            payload_best=self._best_payload,
            evaluations=self._evaluations,
            trace=list(self._trace),
        )

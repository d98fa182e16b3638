"""
Particle Swarm Optimization
===========================

Box-constrained global-best particle swarm with constriction-style
coefficients. Positions leaving the box are clamped to it and the velocity
of every clamped coordinate is zeroed.

Objective evaluations of one iteration may run on a thread pool
(``PsoConfig.workers > 1``); the velocity/position update is a single
threaded reduction. All random draws come from one seeded generator in a
fixed order, so a serial run is bitwise reproducible.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from fotune.config import TuningDefaults
from fotune.exceptions import InvalidParameterError, OptimizerError

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]


@dataclass(frozen=True, eq=False)
class Bounds:
    """Search box lower <= x <= upper."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=float).reshape(-1)
        upper = np.array(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise InvalidParameterError(
                f"bounds dimension mismatch: {lower.size} lower vs {upper.size} upper values")
        if lower.size == 0:
            raise InvalidParameterError("bounds must have at least one dimension")
        if np.any(lower > upper):
            bad = int(np.argmax(lower > upper))
            raise InvalidParameterError(
                f"lower bound {lower[bad]} exceeds upper bound {upper[bad]} in dimension {bad}")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def is_degenerate(self) -> bool:
        return bool(np.all(self.span == 0))

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True)
class PsoConfig:
    """
    Swarm settings.

    Attributes:
        population (int): Particles per iteration
        max_evaluations (int): Total objective evaluation budget
        seed (int): Seed of the random generator
        inertia (float): Velocity carry-over
        cognitive (float): Pull toward each particle's best
        social (float): Pull toward the swarm best
        workers (int): Concurrent objective evaluations; 1 = serial
    """

    population: int = TuningDefaults.PSO_POPULATION
    max_evaluations: int = TuningDefaults.PSO_MAX_EVALUATIONS
    seed: int = TuningDefaults.PSO_SEED
    inertia: float = TuningDefaults.PSO_INERTIA
    cognitive: float = TuningDefaults.PSO_COGNITIVE
    social: float = TuningDefaults.PSO_SOCIAL
    workers: int = TuningDefaults.PSO_WORKERS

    def __post_init__(self):
        if self.population < 2:
            raise InvalidParameterError(f"population must be at least 2, got {self.population}")
        if self.max_evaluations < self.population:
            raise InvalidParameterError(
                f"max_evaluations ({self.max_evaluations}) must be at least the population ({self.population})")
        if self.workers < 1:
            raise InvalidParameterError(f"workers must be at least 1, got {self.workers}")


@dataclass
class OptimizationTrace:
    """Per-iteration best objective, best position and evaluation count."""

    best_objective: List[float] = field(default_factory=list)
    best_position: List[np.ndarray] = field(default_factory=list)
    evaluations: List[int] = field(default_factory=list)

    def record(self, best_f: float, best_x: np.ndarray, evaluations: int) -> None:
        self.best_objective.append(float(best_f))
        self.best_position.append(np.array(best_x, dtype=float))
        self.evaluations.append(int(evaluations))

    @property
    def iterations(self) -> int:
        return len(self.best_objective)

    @property
    def total_evaluations(self) -> int:
        return self.evaluations[-1] if self.evaluations else 0


class PsoResult(NamedTuple):
    best_x: np.ndarray
    best_f: float
    trace: OptimizationTrace


class ParticleSwarm:
    """
    Global-best particle swarm over a box.

    Args:
        objective: Total function vector -> float (finite or a barrier value)
        bounds (Bounds): Search box
        cfg (PsoConfig): Swarm settings
        initial_positions (np.ndarray, optional): Rows injected into the
            initial swarm (clipped into the box), e.g. a known incumbent
    """

    def __init__(self, objective: Objective, bounds: Bounds, cfg: PsoConfig,
                 initial_positions: Optional[np.ndarray] = None):
        self.objective = objective
        self.bounds = bounds
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.trace = OptimizationTrace()
        self.evaluations = 0
        self.initial_positions = None
        if initial_positions is not None:
            seeds = np.atleast_2d(np.asarray(initial_positions, dtype=float))
            if seeds.shape[1] != bounds.dimension:
                raise InvalidParameterError(
                    f"initial positions have dimension {seeds.shape[1]}, bounds have {bounds.dimension}")
            self.initial_positions = bounds.clip(seeds[:cfg.population])

    def _evaluate(self, positions: np.ndarray) -> np.ndarray:
        try:
            if self.cfg.workers > 1:
                with ThreadPoolExecutor(max_workers=self.cfg.workers,
                                        thread_name_prefix="pso-eval") as pool:
                    values = list(pool.map(self.objective, positions))
            else:
                values = [self.objective(x) for x in positions]
        except Exception as e:
            raise OptimizerError(f"objective evaluation failed: {e}", trace=self.trace) from e
        values = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise OptimizerError("objective returned a non-finite value; it must return a "
                                 "finite value or a barrier for every point in the box",
                                 trace=self.trace)
        self.evaluations += positions.shape[0]
        return values

    def minimize(self) -> PsoResult:
        """
        Run the swarm until the evaluation budget is spent.

        Returns:
            PsoResult: (best_x, best_f, trace)

        Raises:
            OptimizerError: If the objective raises or returns a non-finite value
        """
        cfg, bounds = self.cfg, self.bounds
        pop, dim = cfg.population, bounds.dimension
        span = bounds.span
        logger.info(f"PSO started: population {pop}, budget {cfg.max_evaluations} evaluations, "
                    f"dimension {dim}, seed {cfg.seed}, workers {cfg.workers}")

        x = bounds.lower + self.rng.random((pop, dim)) * span
        if self.initial_positions is not None:
            x[:self.initial_positions.shape[0]] = self.initial_positions
        v = (2.0 * self.rng.random((pop, dim)) - 1.0) * span

        f = self._evaluate(x)
        pbest_x, pbest_f = x.copy(), f.copy()
        g = int(np.argmin(pbest_f))
        gbest_x, gbest_f = pbest_x[g].copy(), float(pbest_f[g])
        self.trace.record(gbest_f, gbest_x, self.evaluations)

        if bounds.is_degenerate:
            logger.info("PSO search box is a single point; stopping after the first round")
            return PsoResult(gbest_x, gbest_f, self.trace)

        while self.evaluations + pop <= cfg.max_evaluations:
            r1 = self.rng.random((pop, dim))
            r2 = self.rng.random((pop, dim))
            v = (cfg.inertia * v
                 + cfg.cognitive * r1 * (pbest_x - x)
                 + cfg.social * r2 * (gbest_x - x))
            v = np.clip(v, -span, span)
            x = x + v
            clamped = (x < bounds.lower) | (x > bounds.upper)
            x = bounds.clip(x)
            v[clamped] = 0.0

            f = self._evaluate(x)
            improved = f < pbest_f
            pbest_x[improved] = x[improved]
            pbest_f[improved] = f[improved]
            g = int(np.argmin(pbest_f))
            if pbest_f[g] < gbest_f:
                gbest_x, gbest_f = pbest_x[g].copy(), float(pbest_f[g])
            self.trace.record(gbest_f, gbest_x, self.evaluations)
            logger.debug(f"PSO iteration {self.trace.iterations - 1}: best {gbest_f:.6g} "
                         f"after {self.evaluations} evaluations")

        logger.info(f"PSO finished: best objective {gbest_f:.6g} after {self.evaluations} evaluations")
        return PsoResult(gbest_x, gbest_f, self.trace)


def pso_minimize(objective: Objective, bounds: Bounds, cfg: PsoConfig,
                 initial_positions: Optional[np.ndarray] = None) -> PsoResult:
    """
    Minimize ``objective`` over ``bounds`` with a particle swarm.

    Args:
        objective: Pure function vector -> float
        bounds (Bounds): Search box
        cfg (PsoConfig): Swarm settings
        initial_positions (np.ndarray, optional): Rows seeded into the swarm

    Returns:
        PsoResult: (best_x, best_f, trace)
    """
    return ParticleSwarm(objective, bounds, cfg, initial_positions).minimize()

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Any, Optional, Tuple

import numpy as np

from config import MONOTONE_SLACK_REL, SOLVER_CONFIGS
from models.link_models import spectral_efficiency
from models.system_config import Scheme, SystemConfig
from optimization.wmmse import WmmseState, fresh_state, mse_matrix, wmmse_objective
from utils.exceptions import ConfigError, NonMonotone

logger = logging.getLogger(__name__)


class InitMode(Enum):
    DETERMINISTIC = "deterministic"
    RANDOM_PHASE = "random_phase"


@dataclass
class SolverOptions:
    max_outer_iters: int = 500
    eps_rel: float = 1e-4
    init_mode: InitMode = InitMode.DETERMINISTIC
    init_seed: int = 0
    check_monotone: bool = True

    def validate(self) -> "SolverOptions":
        if not isinstance(self.max_outer_iters, int) or self.max_outer_iters < 1:
            raise ConfigError(f"max_outer_iters must be >= 1, got {self.max_outer_iters!r}")
        if not (isinstance(self.eps_rel, (int, float)) and self.eps_rel > 0):
            raise ConfigError(f"eps_rel must be positive, got {self.eps_rel!r}")
        if not isinstance(self.init_mode, InitMode):
            try:
                self.init_mode = InitMode(self.init_mode)
            except ValueError:
                raise ConfigError(f"Unknown init_mode: {self.init_mode}")
        return self

    @classmethod
    def for_scheme(cls, scheme: Scheme, **overrides) -> "SolverOptions":
        """Defaults of SOLVER_CONFIGS for the scheme, with keyword overrides"""
        defaults = dict(SOLVER_CONFIGS.get(scheme.value.lower(), SOLVER_CONFIGS["ris"]))
        defaults.update(overrides)
        return cls(**defaults).validate()

    def with_restart(self, init_seed: int) -> "SolverOptions":
        return replace(self, init_mode=InitMode.RANDOM_PHASE, init_seed=init_seed)


@dataclass
class IterationRecord:
    objective: float
    spectral_efficiency: float
    max_violation: float


@dataclass
class IterationTrace:
    """
    Per outer iteration: WMMSE objective at fresh (U, W), spectral efficiency
    as delivered by the scheme (duplex factor applied) and constraint violation.
    block_objectives holds the objective after every block update.
    """
    records: List[IterationRecord] = field(default_factory=list)
    block_objectives: List[float] = field(default_factory=list)
    converged: bool = False
    iters: int = 0
    duplex_factor: float = 1.0

    @property
    def objectives(self) -> List[float]:
        return [record.objective for record in self.records]

    @property
    def spectral_efficiencies(self) -> List[float]:
        return [record.spectral_efficiency for record in self.records]

    @property
    def final_spectral_efficiency(self) -> float:
        return self.records[-1].spectral_efficiency if self.records else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "objectives": self.objectives,
            "spectral_efficiencies": self.spectral_efficiencies,
            "max_violations": [record.max_violation for record in self.records],
            "block_objectives": list(self.block_objectives),
            "converged": self.converged,
            "iters": self.iters,
            "duplex_factor": self.duplex_factor,
        }


class BaseOptimizer(ABC):
    """
    Alternating WMMSE loop shared by every scheme.

    One outer iteration is: transmit beamformer, assisting-node variables,
    then the closed-form receiver and weight. Subclasses hold the scheme
    state and provide the two block updates.
    """

    duplex_factor = 1.0

    def __init__(self, scheme: Scheme, cfg: SystemConfig, opts: Optional[SolverOptions] = None):
        self.scheme = scheme
        self.cfg = cfg.validate()
        self.opts = (opts or SolverOptions.for_scheme(scheme)).validate()

    @property
    def name(self) -> str:
        return self.scheme.value

    @abstractmethod
    def initialize(self, ch, warm_start: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> Dict[str, np.ndarray]:
        """Return a feasible starting state for the drop"""
        pass

    @abstractmethod
    def link(self, ch, state: Dict[str, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
        """Effective channel and destination noise covariance for the state"""
        pass

    @abstractmethod
    def transmit_step(self, ch, state: Dict[str, np.ndarray], wm: WmmseState):
        """Update state["V"] for fixed receiver and weight"""
        pass

    @abstractmethod
    def node_step(self, ch, state: Dict[str, np.ndarray], wm: WmmseState):
        """Update the assisting-node variables for fixed receiver and weight"""
        pass

    @abstractmethod
    def max_violation(self, ch, state: Dict[str, np.ndarray]) -> float:
        pass

    @abstractmethod
    def build_solution(self, ch, state: Dict[str, np.ndarray], wm: WmmseState):
        pass

    def refresh(self, ch, state: Dict[str, np.ndarray]) -> WmmseState:
        H, R_n = self.link(ch, state)
        return fresh_state(H, state["V"], R_n)

    def block_objective(self, ch, state: Dict[str, np.ndarray], wm: WmmseState) -> float:
        """WMMSE objective of the state with the receiver and weight held fixed"""
        H, R_n = self.link(ch, state)
        return wmmse_objective(wm.W, mse_matrix(wm.U, H, state["V"], R_n))

    def delivered_spectral_efficiency(self, ch, state: Dict[str, np.ndarray]) -> float:
        H, R_n = self.link(ch, state)
        return spectral_efficiency(H, state["V"], R_n, self.duplex_factor)

    def run(self, ch, warm_start: Optional[Tuple[np.ndarray, np.ndarray]] = None):
        """Alternate the block updates until the relative objective change drops below eps_rel"""
        ch.check_shapes(self.cfg)
        state = self.initialize(ch, warm_start)
        trace = IterationTrace(duplex_factor=self.duplex_factor)

        wm = self.refresh(ch, state)
        previous = wm.objective
        trace.block_objectives.append(previous)

        for iteration in range(1, self.opts.max_outer_iters + 1):
            self.transmit_step(ch, state, wm)
            self._record_block(trace, self.block_objective(ch, state, wm), "transmit")

            self.node_step(ch, state, wm)
            self._record_block(trace, self.block_objective(ch, state, wm), "node")

            wm = self.refresh(ch, state)
            self._record_block(trace, wm.objective, "receiver")

            trace.records.append(IterationRecord(
                objective=wm.objective,
                spectral_efficiency=self.delivered_spectral_efficiency(ch, state),
                max_violation=self.max_violation(ch, state),
            ))
            trace.iters = iteration
            logger.debug("%s iteration %d: objective %.12g", self.name, iteration, wm.objective)

            if abs(previous - wm.objective) <= self.opts.eps_rel * abs(wm.objective):
                trace.converged = True
                break
            previous = wm.objective

        logger.info("%s finished after %d iterations (converged=%s, SE=%.4f bits/s/Hz)",
                    self.name, trace.iters, trace.converged, trace.final_spectral_efficiency)
        return self.build_solution(ch, state, wm), trace

    def _record_block(self, trace: IterationTrace, objective: float, block: str):
        last = trace.block_objectives[-1]
        if self.opts.check_monotone and objective > last + MONOTONE_SLACK_REL * max(abs(last), 1.0):
            raise NonMonotone(f"{self.name} objective rose from {last:.12g} to {objective:.12g} "
                              f"in the {block} update")
        trace.block_objectives.append(objective)

    def _initial_beamformer(self, P_s: float) -> np.ndarray:
        """sqrt(P_s / l) times the first l columns of the identity"""
        return math.sqrt(P_s / self.cfg.l) * np.eye(self.cfg.M, self.cfg.l, dtype=complex)

    def _random_phases(self, count: int) -> np.ndarray:
        rng = np.random.default_rng(self.opts.init_seed)
        return np.exp(2j * np.pi * rng.random(count))

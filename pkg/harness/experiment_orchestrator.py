"""
Monte Carlo sweeps over channel drops.

Each (scheme, sweep value, drop) is an independent work item. Drops are
seeded from (master_seed, sweep index, drop index), and every scheme sees
the same channels for the same drop.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Any, Optional, Tuple

import numpy as np

from channel.fading import AssistNode, generate_drop
from channel.geometry import dbm_to_watts
from config import DEFAULT_SEED, WORKERS
from models.link_models import energy_efficiency
from models.system_config import Scheme, SystemConfig
from optimizers.base_optimizer import SolverOptions
from optimizers.relay_optimizer import FdrOptimizer, HdrOptimizer
from optimizers.ris_optimizer import DirectOptimizer, RisOptimizer
from utils.exceptions import ConfigError, LinkOptError
from utils.result_logger import ResultLogger, ResultRow

logger = logging.getLogger(__name__)

OPTIMIZERS = {
    Scheme.RIS: RisOptimizer,
    Scheme.FDR: FdrOptimizer,
    Scheme.HDR: HdrOptimizer,
    Scheme.DIRECT: DirectOptimizer,
}


class SweepParam(Enum):
    K = "K"
    D1 = "d_1"
    DR = "d_r"
    PS = "P_s"
    NONE = "none"

    @classmethod
    def parse(cls, name: str) -> "SweepParam":
        aliases = {"k": cls.K, "d1": cls.D1, "d_1": cls.D1, "dr": cls.DR, "d_r": cls.DR,
                   "ps": cls.PS, "p_s": cls.PS, "none": cls.NONE}
        try:
            return aliases[name.strip().lower()]
        except KeyError:
            raise ConfigError(f"Unknown sweep parameter: {name}")


def derive_drop_seed(master_seed: int, sweep_index: int, drop_index: int) -> int:
    """32-bit drop seed mixed by SeedSequence from the three indices"""
    sequence = np.random.SeedSequence([master_seed, sweep_index, drop_index])
    return int(sequence.generate_state(1, np.uint32)[0])


def derive_restart_seed(drop_seed: int, restart: int) -> int:
    return int(np.random.SeedSequence([drop_seed, restart]).generate_state(1, np.uint32)[0])


@dataclass
class ExperimentSpec:
    """
    Sweep definition. P_s sweep values are in dBm, the other parameters in
    their natural units (elements, meters). `options` overrides the solver
    defaults for every scheme.
    """
    base_config: SystemConfig = field(default_factory=SystemConfig)
    schemes: List[Scheme] = field(default_factory=lambda: [Scheme.RIS, Scheme.FDR, Scheme.HDR, Scheme.DIRECT])
    sweep_param: SweepParam = SweepParam.NONE
    sweep_values: List[float] = field(default_factory=list)
    drops: int = 1
    master_seed: int = DEFAULT_SEED
    restarts: int = 1
    options: Dict[str, Any] = field(default_factory=dict)
    paired_sweep: bool = True

    def validate(self) -> "ExperimentSpec":
        if not isinstance(self.drops, int) or self.drops < 1:
            raise ConfigError(f"drops must be >= 1, got {self.drops!r}")
        if not isinstance(self.restarts, int) or self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts!r}")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        if self.sweep_param != SweepParam.NONE and not self.sweep_values:
            raise ConfigError(f"sweep over {self.sweep_param.value} needs values")
        self.base_config.validate()
        for scheme in self.schemes:
            SolverOptions.for_scheme(scheme, **self.options)
        for value in self.sweep_values if self.sweep_param != SweepParam.NONE else []:
            self.config_at(value).validate()
        return self

    def points(self) -> List[Tuple[int, float]]:
        if self.sweep_param == SweepParam.NONE:
            return [(0, 0.0)]
        return list(enumerate(float(value) for value in self.sweep_values))

    def config_at(self, value: float) -> SystemConfig:
        cfg = self.base_config
        if self.sweep_param == SweepParam.K:
            if float(value) != int(value):
                raise ConfigError(f"K must be an integer, got {value}")
            return replace(cfg, K=int(value))
        if self.sweep_param == SweepParam.D1:
            return replace(cfg, geometry=replace(cfg.geometry, d_1=float(value)))
        if self.sweep_param == SweepParam.DR:
            return replace(cfg, geometry=replace(cfg.geometry, d_r=float(value)))
        if self.sweep_param == SweepParam.PS:
            return replace(cfg, P_s=dbm_to_watts(float(value)))
        return cfg

    def row_count(self) -> int:
        return len(self.schemes) * len(self.points()) * self.drops


def run_point(spec: ExperimentSpec, scheme: Scheme, sweep_index: int, sweep_value: float, drop: int) -> ResultRow:
    """One optimizer run (best of spec.restarts); failures become non-converged rows"""
    cfg = spec.config_at(sweep_value)
    drop_seed = derive_drop_seed(spec.master_seed, 0 if spec.paired_sweep else sweep_index, drop)
    row = ResultRow(scheme=scheme.value, sweep_param=spec.sweep_param.value, sweep_value=sweep_value,
                    drop=drop, rate_bps=0.0, spectral_efficiency_bphz=0.0, energy_efficiency_bpj=0.0,
                    iterations=0, converged=False)
    logger.debug("%s %s=%s drop %d (seed %d)", scheme.value, spec.sweep_param.value, sweep_value, drop, drop_seed)
    try:
        node = AssistNode.RIS if scheme in (Scheme.RIS, Scheme.DIRECT) else AssistNode.RELAY
        ch = generate_drop(cfg, drop_seed, node, with_self_interference=(scheme == Scheme.FDR))
        opts = SolverOptions.for_scheme(scheme, **spec.options)

        best = None
        for restart in range(spec.restarts):
            run_opts = opts if restart == 0 else opts.with_restart(derive_restart_seed(drop_seed, restart))
            _, trace = OPTIMIZERS[scheme](cfg, run_opts).run(ch)
            if best is None or trace.final_spectral_efficiency > best.final_spectral_efficiency:
                best = trace

        se = best.final_spectral_efficiency
        rate = se * cfg.bandwidth_hz
        row.spectral_efficiency_bphz = se
        row.rate_bps = rate
        row.energy_efficiency_bpj = energy_efficiency(rate, scheme, cfg.P_s, cfg.P_r)
        row.iterations = best.iters
        row.converged = best.converged
    except (LinkOptError, ArithmeticError, np.linalg.LinAlgError) as e:
        row.error = f"{type(e).__name__}: {e}"
    return row


def _run_item(item: Tuple[ExperimentSpec, Scheme, int, float, int]) -> ResultRow:
    return run_point(*item)


class ExperimentOrchestrator:
    """Expands a spec into work items, runs them and collects the rows"""

    def __init__(self, spec: ExperimentSpec, workers: Optional[int] = None):
        self.spec = spec.validate()
        self.workers = WORKERS if workers is None else workers
        self.results = ResultLogger()

    def work_items(self) -> List[Tuple[ExperimentSpec, Scheme, int, float, int]]:
        return [(self.spec, scheme, index, value, drop)
                for scheme in self.spec.schemes
                for index, value in self.spec.points()
                for drop in range(self.spec.drops)]

    def run(self) -> List[ResultRow]:
        items = self.work_items()
        logger.info("Running %d work items on %d worker(s)", len(items), max(self.workers, 1))
        if self.workers > 1:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                rows = list(pool.map(_run_item, items))
        else:
            rows = [_run_item(item) for item in items]

        self.results.extend(rows)
        failed = len(self.results.get_failed_rows())
        if failed:
            logger.warning("%d of %d rows failed", failed, len(rows))
        return self.results.sorted_rows()


def run_experiment(spec: ExperimentSpec, workers: Optional[int] = None) -> List[ResultRow]:
    """
    Run every (scheme, sweep value, drop) and return the rows in canonical order.

    With the default paired_sweep=True the drop seed is derived with sweep index 0,
    so every sweep value reuses the same channels. Set paired_sweep=False to mix
    the sweep index into the seed instead.
    """
    return ExperimentOrchestrator(spec, workers).run()

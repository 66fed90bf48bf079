from typing import Dict, Optional, Tuple

import numpy as np

from channel.fading import ChannelSet
from models.link_models import effective_channel_ris
from models.solutions import RisSolution
from models.system_config import Scheme, SystemConfig
from optimization import subsolvers
from optimization.linalg import hermitize
from optimization.wmmse import WmmseState
from optimizers.base_optimizer import BaseOptimizer, InitMode, IterationTrace, SolverOptions


def transmit_quadratic(H: np.ndarray, wm: WmmseState) -> Tuple[np.ndarray, np.ndarray]:
    """A = H^H U W U^H H and B = H^H U W of the transmit-beamformer step"""
    UH = wm.U.conj().T @ H
    A = UH.conj().T @ wm.W @ UH
    B = H.conj().T @ wm.U @ wm.W
    return hermitize(A), B


class RisOptimizer(BaseOptimizer):
    """Transmit beamformer and reflection vector of a surface-assisted link"""

    def __init__(self, cfg: SystemConfig, opts: Optional[SolverOptions] = None, scheme: Scheme = Scheme.RIS):
        super().__init__(scheme, cfg, opts)

    def initialize(self, ch: ChannelSet, warm_start=None) -> Dict[str, np.ndarray]:
        if warm_start is not None:
            V, Phi = warm_start
            return {"V": np.array(V, dtype=complex), "Phi": np.array(Phi, dtype=complex)}
        V = self._initial_beamformer(self.cfg.P_s)
        if self.opts.init_mode == InitMode.RANDOM_PHASE:
            Phi = self._random_phases(ch.n_elements)
        else:
            Phi = np.ones(ch.n_elements, dtype=complex)
        return {"V": V, "Phi": Phi}

    def link(self, ch: ChannelSet, state):
        H = effective_channel_ris(ch.H_d, ch.H_1, ch.H_2, state["Phi"])
        return H, self.cfg.sigma2_D * np.eye(self.cfg.N)

    def transmit_step(self, ch: ChannelSet, state, wm: WmmseState):
        H, _ = self.link(ch, state)
        A, B = transmit_quadratic(H, wm)
        state["V"] = subsolvers.solve_v_power_constrained(A, B, self.cfg.P_s)

    def node_step(self, ch: ChannelSet, state, wm: WmmseState):
        q = subsolvers.build_phi_quadratic(ch.H_d, ch.H_1, ch.H_2, wm.U, wm.W, state["V"])
        state["Phi"] = subsolvers.solve_phi(q, state["Phi"])

    def max_violation(self, ch: ChannelSet, state) -> float:
        return RisSolution(state["V"], state["Phi"], None, None).max_violation(self.cfg.P_s)

    def build_solution(self, ch: ChannelSet, state, wm: WmmseState) -> RisSolution:
        return RisSolution(V=state["V"], Phi=state["Phi"], U=wm.U, W=wm.W)


class DirectOptimizer(RisOptimizer):
    """Direct link only: reflection vector pinned to zero, surface step skipped"""

    def __init__(self, cfg: SystemConfig, opts: Optional[SolverOptions] = None):
        super().__init__(cfg, opts, Scheme.DIRECT)

    def initialize(self, ch: ChannelSet, warm_start=None) -> Dict[str, np.ndarray]:
        V = self._initial_beamformer(self.cfg.P_s) if warm_start is None else np.array(warm_start[0], dtype=complex)
        return {"V": V, "Phi": np.zeros(ch.n_elements, dtype=complex)}

    def node_step(self, ch: ChannelSet, state, wm: WmmseState):
        pass


def optimize_ris(ch: ChannelSet, cfg: SystemConfig,
                 opts: Optional[SolverOptions] = None) -> Tuple[RisSolution, IterationTrace]:
    return RisOptimizer(cfg, opts).run(ch)


def optimize_direct(ch: ChannelSet, cfg: SystemConfig,
                    opts: Optional[SolverOptions] = None) -> Tuple[RisSolution, IterationTrace]:
    return DirectOptimizer(cfg, opts).run(ch)

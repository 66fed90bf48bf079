"""
Amplify-and-forward relay links.

The full-duplex optimizer works on the effective relay matrix F; the
realizable matrix G = F (I + H_s F)^-1 is attached afterwards when the
drop carries a loop channel. The half-duplex link spends both budgets
over two slots, which is the full-duplex problem at doubled budgets with
half the rate.
"""

import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np

from channel.fading import ChannelSet
from config import FEASIBILITY_SLACK
from models.link_models import effective_channel_relay, noise_cov_relay, recover_g, relay_tx_power
from models.solutions import RelaySolution
from models.system_config import Scheme, SystemConfig
from optimization import subsolvers
from optimization.wmmse import WmmseState
from optimizers.base_optimizer import BaseOptimizer, InitMode, IterationTrace, SolverOptions
from optimizers.ris_optimizer import transmit_quadratic
from utils.exceptions import SingularRecovery

logger = logging.getLogger(__name__)


class FdrOptimizer(BaseOptimizer):
    def __init__(self, cfg: SystemConfig, opts: Optional[SolverOptions] = None, scheme: Scheme = Scheme.FDR):
        super().__init__(scheme, cfg, opts)

    def initialize(self, ch: ChannelSet, warm_start=None) -> Dict[str, np.ndarray]:
        if warm_start is not None:
            V, F = warm_start
            return {"V": np.array(V, dtype=complex), "F": np.array(F, dtype=complex)}
        V = self._initial_beamformer(self.cfg.P_s)
        H1V = ch.H_1 @ V
        D_trace = float(np.real(np.vdot(H1V, H1V))) + self.cfg.sigma2_R * self.cfg.L
        beta = math.sqrt(self.cfg.P_r / D_trace)
        if self.opts.init_mode == InitMode.RANDOM_PHASE:
            F = beta * np.diag(self._random_phases(self.cfg.L))
        else:
            F = beta * np.eye(self.cfg.L, dtype=complex)
        return {"V": V, "F": F}

    def link(self, ch: ChannelSet, state):
        H = effective_channel_relay(ch.H_d, ch.H_1, ch.H_2, state["F"])
        R_n = noise_cov_relay(ch.H_2, state["F"], self.cfg.sigma2_R, self.cfg.sigma2_D)
        return H, R_n

    def relay_budget_left(self, F: np.ndarray) -> float:
        """P_r - sigma2_R tr(F F^H), with rounding-level negatives clipped to zero"""
        left = self.cfg.P_r - self.cfg.sigma2_R * float(np.real(np.vdot(F, F)))
        if 0 > left >= -FEASIBILITY_SLACK * self.cfg.P_r:
            return 0.0
        return left

    def transmit_step(self, ch: ChannelSet, state, wm: WmmseState):
        H, _ = self.link(ch, state)
        A, B = transmit_quadratic(H, wm)
        FH1 = state["F"] @ ch.H_1
        J = FH1.conj().T @ FH1
        state["V"] = subsolvers.solve_v_two_constraints(A, B, J, self.cfg.P_s, self.relay_budget_left(state["F"]))

    def node_step(self, ch: ChannelSet, state, wm: WmmseState):
        q, D = subsolvers.build_f_quadratic(ch.H_d, ch.H_1, ch.H_2, wm.U, wm.W, state["V"], self.cfg.sigma2_R)
        state["F"] = subsolvers.solve_f(q, D, self.cfg.P_r)

    def max_violation(self, ch: ChannelSet, state) -> float:
        power = float(np.real(np.vdot(state["V"], state["V"])))
        relay_power = relay_tx_power(state["F"], ch.H_1, state["V"], self.cfg.sigma2_R)
        return max(power - self.cfg.P_s, relay_power - self.cfg.P_r, 0.0)

    def build_solution(self, ch: ChannelSet, state, wm: WmmseState) -> RelaySolution:
        solution = RelaySolution(V=state["V"], F=state["F"], U=wm.U, W=wm.W)
        if ch.H_s is not None:
            try:
                solution.G = recover_g(solution.F, ch.H_s)
            except SingularRecovery as exc:
                logger.warning("drop %s: relay matrix not realizable: %s", ch.drop_seed, exc)
        return solution


class HdrOptimizer(FdrOptimizer):
    """Half-duplex relay: budgets (2P_s, 2P_r) per slot, rate halved"""

    duplex_factor = 0.5

    def __init__(self, cfg: SystemConfig, opts: Optional[SolverOptions] = None):
        super().__init__(cfg.with_power_budgets(2.0 * cfg.P_s, 2.0 * cfg.P_r), opts, Scheme.HDR)

    def build_solution(self, ch: ChannelSet, state, wm: WmmseState) -> RelaySolution:
        # no loop channel in half duplex, the optimized matrix is realizable as is
        return RelaySolution(V=state["V"], F=state["F"], U=wm.U, W=wm.W, G=state["F"])


def optimize_fdr(ch: ChannelSet, cfg: SystemConfig,
                 opts: Optional[SolverOptions] = None) -> Tuple[RelaySolution, IterationTrace]:
    return FdrOptimizer(cfg, opts).run(ch)


def optimize_hdr(ch: ChannelSet, cfg: SystemConfig,
                 opts: Optional[SolverOptions] = None) -> Tuple[RelaySolution, IterationTrace]:
    return HdrOptimizer(cfg, opts).run(ch)

"""
Self-checks of the numerical core.

Every check returns its measured residual next to the tolerance it is held
to. Reports carry no timestamps, so equal seeds give equal bytes.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
from dataclasses_json import dataclass_json

from channel.fading import AssistNode, generate_drop
from config import DEFAULT_SEED
from harness import oracles
from harness.waterfilling import waterfilling_capacity
from models.link_models import (effective_channel_relay, effective_channel_ris, noise_cov_relay,
                                relay_tx_power, spectral_efficiency)
from models.system_config import Scheme, SystemConfig
from optimization import subsolvers
from optimization.wmmse import fresh_state, mmse_matrix, mmse_receiver, mse_matrix
from optimizers.base_optimizer import SolverOptions
from optimizers.relay_optimizer import FdrOptimizer, HdrOptimizer
from optimizers.ris_optimizer import DirectOptimizer, RisOptimizer

logger = logging.getLogger(__name__)

VALIDATION_CONFIG = {"K": 16}
# 3 optimizers x 34 drops covers at least 100 random drops
MONOTONE_DROPS_PER_OPTIMIZER = 34


@dataclass_json
@dataclass
class ValidationCheck:
    name: str
    residual: float
    tolerance: float
    passed: bool

    def to_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} residual={self.residual:.3e} tol={self.tolerance:.1e}"


@dataclass_json
@dataclass
class ValidationReport:
    seed: int
    checks: List[ValidationCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[ValidationCheck]:
        return [check for check in self.checks if not check.passed]

    def to_text(self) -> str:
        lines = [check.to_line() for check in self.checks]
        lines.append(f"SUMMARY passed={len(self.checks) - len(self.failures)} failed={len(self.failures)}")
        return "\n".join(lines) + "\n"


def _crandn(rng: np.random.Generator, *shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def _random_psd(rng: np.random.Generator, dim: int) -> np.ndarray:
    G = _crandn(rng, dim, dim)
    return G @ G.conj().T + 1e-3 * np.eye(dim)


def _in_disks(rng: np.random.Generator, count: int) -> np.ndarray:
    return np.sqrt(rng.random(count)) * np.exp(2j * np.pi * rng.random(count))


def _relative_gap(solver_value: float, oracle_value: float) -> float:
    return max(solver_value - oracle_value, 0.0) / max(abs(oracle_value), 1e-12)


class ValidationSuite:
    """Runs the checks in registration order"""

    def __init__(self, seed: int = DEFAULT_SEED, cfg: Optional[SystemConfig] = None):
        self.seed = seed
        self.cfg = (cfg or SystemConfig(**VALIDATION_CONFIG)).validate()
        self.checks: Dict[str, Callable[[np.random.Generator], float]] = {
            "wmmse_rate_identity": self._check_wmmse_rate_identity,
            "mmse_matrix_identity": self._check_mmse_matrix_identity,
            "surface_as_relay_identity": self._check_surface_as_relay,
            "phi_form_contract": self._check_phi_form,
            "f_form_contract": self._check_f_form,
            "solve_v_power_vs_oracle": self._check_v_power,
            "solve_v_two_vs_oracle": self._check_v_two,
            "solve_phi_vs_oracle": self._check_phi,
            "solve_f_vs_oracle": self._check_f,
            "hdr_fdr_identity": self._check_hdr_identity,
            "direct_waterfilling": self._check_waterfilling,
            "monotone_traces": self._check_monotone,
        }
        self.tolerances = {
            "wmmse_rate_identity": 1e-8,
            "mmse_matrix_identity": 1e-8,
            "surface_as_relay_identity": 1e-12,
            "phi_form_contract": 1e-8,
            "f_form_contract": 1e-8,
            "solve_v_power_vs_oracle": 1e-4,
            "solve_v_two_vs_oracle": 1e-4,
            "solve_phi_vs_oracle": 1e-4,
            "solve_f_vs_oracle": 1e-4,
            "hdr_fdr_identity": 1e-9,
            "direct_waterfilling": 5e-3,
            "monotone_traces": 1e-8,
        }

    def run(self, names: Optional[List[str]] = None) -> ValidationReport:
        report = ValidationReport(seed=self.seed)
        for index, (name, check) in enumerate(self.checks.items()):
            if names and name not in names:
                continue
            rng = np.random.default_rng([self.seed, index])
            tolerance = self.tolerances[name]
            try:
                residual = float(check(rng))
            except Exception as e:
                logger.warning("check %s raised %s: %s", name, type(e).__name__, e)
                residual = math.inf
            passed = bool(np.isfinite(residual) and residual <= tolerance)
            report.checks.append(ValidationCheck(name=name, residual=residual, tolerance=tolerance, passed=passed))
            logger.debug("%s residual %.3e", name, residual)
        return report

    # identities

    def _random_link(self, rng: np.random.Generator, M: int = 4, N: int = 4, K: int = 8, l: int = 4):
        H_d, H_1, H_2 = _crandn(rng, N, M), _crandn(rng, K, M), _crandn(rng, N, K)
        V = _crandn(rng, M, l)
        return H_d, H_1, H_2, V

    def _check_wmmse_rate_identity(self, rng: np.random.Generator) -> float:
        worst = 0.0
        for _ in range(50):
            H_d, H_1, H_2, V = self._random_link(rng)
            H = effective_channel_ris(H_d, H_1, H_2, _in_disks(rng, H_1.shape[0]))
            R_n = rng.uniform(0.1, 2.0) * np.eye(H.shape[0])
            wm = fresh_state(H, V, R_n)
            se = spectral_efficiency(H, V, R_n)
            from_objective = (V.shape[1] - wm.objective) / math.log(2.0)
            worst = max(worst, abs(from_objective - se) / max(se, 1.0))
        return worst

    def _check_mmse_matrix_identity(self, rng: np.random.Generator) -> float:
        worst = 0.0
        for _ in range(50):
            H_d, _, _, V = self._random_link(rng)
            R_n = _random_psd(rng, H_d.shape[0])
            E_closed = mmse_matrix(H_d, V, R_n)
            E_general = mse_matrix(mmse_receiver(H_d, V, R_n), H_d, V, R_n)
            worst = max(worst, np.linalg.norm(E_closed - E_general) / max(np.linalg.norm(E_closed), 1e-300))
        return worst

    def _check_surface_as_relay(self, rng: np.random.Generator) -> float:
        worst = 0.0
        for _ in range(20):
            H_d, H_1, H_2, _ = self._random_link(rng)
            Phi = _in_disks(rng, H_1.shape[0])
            surface = effective_channel_ris(H_d, H_1, H_2, Phi)
            relay = effective_channel_relay(H_d, H_1, H_2, np.diag(Phi))
            worst = max(worst, np.linalg.norm(surface - relay) / np.linalg.norm(surface))
        return worst

    # builder contracts

    def _check_phi_form(self, rng: np.random.Generator) -> float:
        worst = 0.0
        for _ in range(100):
            H_d, H_1, H_2, V = self._random_link(rng, K=int(rng.integers(1, 9)))
            U = _crandn(rng, H_d.shape[0], V.shape[1])
            W = _random_psd(rng, V.shape[1])
            R_n = rng.uniform(0.1, 2.0) * np.eye(H_d.shape[0])
            q = subsolvers.build_phi_quadratic(H_d, H_1, H_2, U, W, V)
            offsets, scale = [], 1.0
            for _ in range(20):
                phi = _in_disks(rng, H_1.shape[0])
                H = effective_channel_ris(H_d, H_1, H_2, phi)
                direct = float(np.real(np.trace(W @ mse_matrix(U, H, V, R_n))))
                offsets.append(direct - q.value(phi))
                scale = max(scale, abs(direct))
            worst = max(worst, (max(offsets) - min(offsets)) / scale)
        return worst

    def _check_f_form(self, rng: np.random.Generator) -> float:
        worst = 0.0
        for _ in range(100):
            L = int(rng.integers(1, 5))
            H_d, H_1, H_2, V = self._random_link(rng, K=L)
            U = _crandn(rng, H_d.shape[0], V.shape[1])
            W = _random_psd(rng, V.shape[1])
            sigma2_R, sigma2_D = rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)
            q, D = subsolvers.build_f_quadratic(H_d, H_1, H_2, U, W, V, sigma2_R)
            offsets, scale = [], 1.0
            for _ in range(20):
                F = _crandn(rng, L, L)
                H = effective_channel_relay(H_d, H_1, H_2, F)
                R_n = noise_cov_relay(H_2, F, sigma2_R, sigma2_D)
                direct = float(np.real(np.trace(W @ mse_matrix(U, H, V, R_n))))
                offsets.append(direct - q.value(subsolvers.vec(F)))
                scale = max(scale, abs(direct))
                power = float(np.real(np.vdot(subsolvers.vec(F), subsolvers.relay_constraint_matrix(D)
                                              @ subsolvers.vec(F))))
                worst = max(worst, abs(power - relay_tx_power(F, H_1, V, sigma2_R)) / max(power, 1e-300))
            worst = max(worst, (max(offsets) - min(offsets)) / scale)
        return worst

    # solvers against the projected-gradient reference

    def _check_v_power(self, rng: np.random.Generator) -> float:
        worst = 0.0
        for _ in range(50):
            M, l = int(rng.integers(1, 5)), int(rng.integers(1, 5))
            A, B, P = _random_psd(rng, M), _crandn(rng, M, l), rng.uniform(0.05, 5.0)
            V = subsolvers.solve_v_power_constrained(A, B, P)
            reference = oracles.oracle_v_power(A, B, P)
            violation = max(float(np.real(np.vdot(V, V))) - P, 0.0) / P
            gap = _relative_gap(subsolvers.v_step_objective(A, B, V), subsolvers.v_step_objective(A, B, reference))
            worst = max(worst, gap, violation)
        return worst

    def _check_v_two(self, rng: np.random.Generator) -> float:
        worst = 0.0
        for _ in range(50):
            M, l = int(rng.integers(1, 5)), int(rng.integers(1, 5))
            A, B, J = _random_psd(rng, M), _crandn(rng, M, l), _random_psd(rng, M)
            P1, c2 = rng.uniform(0.05, 5.0), rng.uniform(0.05, 5.0)
            V = subsolvers.solve_v_two_constraints(A, B, J, P1, c2)
            reference = oracles.oracle_v_two(A, B, J, P1, c2)
            load = float(np.real(np.trace(V.conj().T @ J @ V)))
            violation = max(float(np.real(np.vdot(V, V))) - P1, 0.0) / P1 + max(load - c2, 0.0) / c2
            gap = _relative_gap(subsolvers.v_step_objective(A, B, V), subsolvers.v_step_objective(A, B, reference))
            worst = max(worst, gap, violation)
        return worst

    def _check_phi(self, rng: np.random.Generator) -> float:
        worst = 0.0
        for _ in range(50):
            K = int(rng.integers(1, 5))
            H_d, H_1, H_2, V = self._random_link(rng, K=K)
            U = _crandn(rng, H_d.shape[0], V.shape[1])
            q = subsolvers.build_phi_quadratic(H_d, H_1, H_2, U, _random_psd(rng, V.shape[1]), V)
            phi = subsolvers.solve_phi(q, np.zeros(K, dtype=complex))
            reference = oracles.oracle_phi(q, np.zeros(K, dtype=complex))
            violation = max(float(np.max(np.abs(phi))) - 1.0, 0.0)
            worst = max(worst, _relative_gap(q.value(phi), q.value(reference)), violation)
        return worst

    def _check_f(self, rng: np.random.Generator) -> float:
        worst = 0.0
        for _ in range(50):
            L = int(rng.integers(1, 4))
            H_d, H_1, H_2, V = self._random_link(rng, K=L)
            U = _crandn(rng, H_d.shape[0], V.shape[1])
            sigma2_R = rng.uniform(0.1, 2.0)
            q, D = subsolvers.build_f_quadratic(H_d, H_1, H_2, U, _random_psd(rng, V.shape[1]), V, sigma2_R)
            P_r = rng.uniform(0.05, 5.0)
            F = subsolvers.solve_f(q, D, P_r)
            reference = oracles.oracle_f(q, D, P_r)
            power = relay_tx_power(F, H_1, V, sigma2_R)
            violation = max(power - P_r, 0.0) / P_r
            gap = _relative_gap(q.value(subsolvers.vec(F)), q.value(subsolvers.vec(reference)))
            worst = max(worst, gap, violation)
        return worst

    # optimizers

    def _drop(self, rng: np.random.Generator, node: AssistNode):
        return generate_drop(self.cfg, int(rng.integers(0, 2 ** 32)), node)

    def _check_hdr_identity(self, rng: np.random.Generator) -> float:
        worst = 0.0
        doubled = self.cfg.with_power_budgets(2.0 * self.cfg.P_s, 2.0 * self.cfg.P_r)
        opts = SolverOptions.for_scheme(Scheme.FDR)
        for _ in range(10):
            ch = self._drop(rng, AssistNode.RELAY)
            hdr, hdr_trace = HdrOptimizer(self.cfg, opts).run(ch)
            fdr, fdr_trace = FdrOptimizer(doubled, opts).run(ch)
            scale = max(np.linalg.norm(fdr.V), np.linalg.norm(fdr.F), 1e-300)
            worst = max(worst,
                        np.linalg.norm(hdr.V - fdr.V) / scale,
                        np.linalg.norm(hdr.F - fdr.F) / scale,
                        abs(hdr_trace.final_spectral_efficiency - 0.5 * fdr_trace.final_spectral_efficiency))
        return worst

    def _check_waterfilling(self, rng: np.random.Generator) -> float:
        worst = 0.0
        for _ in range(20):
            ch = self._drop(rng, AssistNode.RIS)
            _, trace = DirectOptimizer(self.cfg).run(ch)
            capacity = waterfilling_capacity(ch.H_d, self.cfg.sigma2_D, self.cfg.P_s, streams=self.cfg.l)
            worst = max(worst, abs(trace.final_spectral_efficiency - capacity) / capacity)
        return worst

    def _check_monotone(self, rng: np.random.Generator) -> float:
        worst = 0.0
        for optimizer_cls, node in ((RisOptimizer, AssistNode.RIS), (FdrOptimizer, AssistNode.RELAY),
                                    (HdrOptimizer, AssistNode.RELAY)):
            for _ in range(MONOTONE_DROPS_PER_OPTIMIZER):
                ch = self._drop(rng, node)
                optimizer = optimizer_cls(self.cfg)
                optimizer.opts.check_monotone = False
                _, trace = optimizer.run(ch)
                rises = np.diff(np.asarray(trace.block_objectives))
                worst = max(worst, float(np.max(rises, initial=0.0)))
        return worst


def validate(seed: int = DEFAULT_SEED, names: Optional[List[str]] = None) -> ValidationReport:
    return ValidationSuite(seed).run(names)

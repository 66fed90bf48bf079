import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from config import SELF_INTERFERENCE_ATTENUATION_DB
from channel.geometry import LinkCondition, PathLossParams, db_to_linear, hop_distances, pathloss_db
from models.system_config import SystemConfig
from utils.exceptions import ConfigError, ShapeMismatch

logger = logging.getLogger(__name__)


class AssistNode(Enum):
    RIS = "ris"
    RELAY = "relay"


@dataclass
class ChannelSet:
    """One fading drop: direct link, both hops and optional relay loop channel"""
    H_d: np.ndarray
    H_1: np.ndarray
    H_2: np.ndarray
    drop_seed: int
    H_s: Optional[np.ndarray] = None

    @property
    def n_elements(self) -> int:
        return self.H_1.shape[0]

    def check_shapes(self, cfg: SystemConfig, n_elements: Optional[int] = None):
        """Raise ShapeMismatch unless the matrices fit cfg"""
        n_el = self.n_elements if n_elements is None else n_elements
        expected = {
            "H_d": (cfg.N, cfg.M),
            "H_1": (n_el, cfg.M),
            "H_2": (cfg.N, n_el),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise ShapeMismatch(f"{name} has shape {actual}, expected {shape}")
        if self.H_s is not None and self.H_s.shape != (n_el, n_el):
            raise ShapeMismatch(f"H_s has shape {self.H_s.shape}, expected {(n_el, n_el)}")


def sample_fading(rows: int, cols: int, pl_db: float, rng: np.random.Generator) -> np.ndarray:
    """
    Rayleigh fading scaled by a path loss.

    Entries are i.i.d. CN(0, 10^(-pl_db/10)). Draws are laid out row by row,
    so the first r rows of a (R, cols) draw equal an (r, cols) draw from the
    same stream state.
    """
    if rows < 1 or cols < 1:
        raise ConfigError(f"fading matrix needs positive dimensions, got {rows}x{cols}")
    gain = db_to_linear(-pl_db)
    z = rng.standard_normal((rows, cols, 2))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(gain / 2.0)


def generate_drop(cfg: SystemConfig,
                  drop_seed: int,
                  node: AssistNode = AssistNode.RIS,
                  with_self_interference: bool = False) -> ChannelSet:
    """Draw H_d (NLOS), H_1 and H_2 (LOS) and optionally H_s for one drop"""
    cfg.validate()
    d_sr, d_rd, d_sd = hop_distances(cfg.geometry)

    los = PathLossParams(cfg.carrier_ghz, LinkCondition.LOS, cfg.bs_height_m, cfg.ut_height_m)
    nlos = PathLossParams(cfg.carrier_ghz, LinkCondition.NLOS, cfg.bs_height_m, cfg.ut_height_m)
    pl_direct = pathloss_db(d_sd, nlos)
    pl_first = pathloss_db(d_sr, los)
    pl_second = pathloss_db(d_rd, los)

    n_el = cfg.K if node == AssistNode.RIS else cfg.L
    direct_seq, first_seq, second_seq, loop_seq = np.random.SeedSequence(drop_seed).spawn(4)

    H_d = sample_fading(cfg.N, cfg.M, pl_direct, np.random.default_rng(direct_seq))
    H_1 = sample_fading(n_el, cfg.M, pl_first, np.random.default_rng(first_seq))
    # drawn element-major then transposed so surfaces stay nested across K
    H_2 = sample_fading(n_el, cfg.N, pl_second, np.random.default_rng(second_seq)).T

    H_s = None
    if with_self_interference:
        H_s = sample_fading(n_el, n_el, SELF_INTERFERENCE_ATTENUATION_DB, np.random.default_rng(loop_seq))

    logger.debug(
        "drop %d: PL direct=%.2f dB, first=%.2f dB, second=%.2f dB, %d elements",
        drop_seed, pl_direct, pl_first, pl_second, n_el,
    )
    return ChannelSet(H_d=H_d, H_1=H_1, H_2=H_2, drop_seed=drop_seed, H_s=H_s)

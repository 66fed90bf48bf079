import json
import logging
import os
from dataclasses import fields
from typing import Dict, Any

from channel.geometry import Geometry
from harness.experiment_orchestrator import ExperimentSpec, SweepParam
from models.system_config import Scheme, SystemConfig
from optimizers.base_optimizer import SolverOptions
from utils.exceptions import ConfigError

logger = logging.getLogger(__name__)

GEOMETRY_KEYS = {f.name for f in fields(Geometry)}
SYSTEM_KEYS = {f.name for f in fields(SystemConfig)} - {"geometry"}
SOLVER_KEYS = {f.name for f in fields(SolverOptions)}
SPEC_KEYS = {f.name for f in fields(ExperimentSpec)} - {"base_config", "options"}


class ExperimentLoader:
    """Reads flat JSON experiment documents; keys are the field names of the config dataclasses"""

    def __init__(self):
        self.allowed_keys = GEOMETRY_KEYS | SYSTEM_KEYS | SOLVER_KEYS | SPEC_KEYS

    def load_file(self, file_path: str) -> ExperimentSpec:
        if not os.path.exists(file_path):
            raise ConfigError(f"Config file not found: {file_path}")
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                document = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {file_path} is not valid JSON: {e}")
        logger.info("Loaded experiment config from %s", file_path)
        return self.build_spec(document)

    def build_spec(self, document: Dict[str, Any]) -> ExperimentSpec:
        if not isinstance(document, dict):
            raise ConfigError("Config document must be a JSON object")
        unknown = sorted(set(document) - self.allowed_keys)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")

        geometry = Geometry(**self._pick(document, GEOMETRY_KEYS))
        cfg = SystemConfig(geometry=geometry, **self._pick(document, SYSTEM_KEYS))
        options = self._pick(document, SOLVER_KEYS)
        spec_fields = self._pick(document, SPEC_KEYS)

        if "schemes" in spec_fields:
            spec_fields["schemes"] = self._parse_schemes(spec_fields["schemes"])
        if "sweep_param" in spec_fields:
            spec_fields["sweep_param"] = SweepParam.parse(str(spec_fields["sweep_param"]))
        if "sweep_values" in spec_fields:
            spec_fields["sweep_values"] = [float(value) for value in spec_fields["sweep_values"]]

        try:
            return ExperimentSpec(base_config=cfg, options=options, **spec_fields).validate()
        except TypeError as e:
            raise ConfigError(f"Invalid config value: {e}")

    def _pick(self, document: Dict[str, Any], keys) -> Dict[str, Any]:
        return {key: value for key, value in document.items() if key in keys}

    def _parse_schemes(self, value) -> list:
        if isinstance(value, str):
            value = [name for name in value.split(",") if name.strip()]
        return [Scheme.parse(str(name)) for name in value]


def load_experiment(file_path: str) -> ExperimentSpec:
    return ExperimentLoader().load_file(file_path)

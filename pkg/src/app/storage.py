"""Run-directory artifact store: per-trial results, tables and reports"""
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, ValidationError

from .errors import ConfigError
from .schemas.statistics import ScalingRow

logger = logging.getLogger(__name__)

# config fields that may change between resumed runs without invalidating trials
VOLATILE_CONFIG_KEYS = {
    "output_dir",
    "jobs",
    "alpha_scan",
    "slope_tolerance",
    "band_factor",
    "quorum",
    "quorum_band",
    "dimension_tolerance",
}


class RunStorage:
    """Files of one experiment run under a single output directory"""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.trials_dir = self.root / "trials"
        self.trials_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.root / name

    def write_text(self, name: str, text: str) -> Path:
        """
        Atomically write a text artifact

        Args:
            name: File name relative to the run directory (e.g., 'scaling.csv')
            text: Full file contents

        Returns:
            Path that was written
        """
        target = self.path(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        _atomic_write(target, text)
        return target

    def write_model(self, name: str, model: BaseModel) -> Path:
        """Write a pydantic model as indented JSON"""
        return self.write_text(name, model.model_dump_json(indent=2) + "\n")

    def trial_path(self, n: int, trial: int) -> Path:
        return self.trials_dir / f"n{n:07d}_t{trial:04d}.json"

    def save_trial(self, row: ScalingRow) -> Path:
        """
        Store one finished trial; the file appears only once fully written

        Args:
            row: Trial result

        Returns:
            Path of the trial file
        """
        target = self.trial_path(row.n, row.trial)
        _atomic_write(target, row.model_dump_json() + "\n")
        return target

    def load_trial(self, n: int, trial: int) -> Optional[ScalingRow]:
        """Return a stored trial, or None when it is missing or unreadable"""
        target = self.trial_path(n, trial)
        if not target.exists():
            return None
        try:
            return ScalingRow.model_validate_json(target.read_text())
        except (ValidationError, ValueError) as e:
            logger.warning(f"Ignoring unreadable trial file {target.name}: {e}")
            return None

    def bind_config(self, config: Dict[str, Any]) -> None:
        """
        Record the experiment config, refusing a directory that holds a different experiment

        Args:
            config: JSON-compatible config dump
        """
        target = self.path("config.json")
        stable = {k: v for k, v in config.items() if k not in VOLATILE_CONFIG_KEYS}
        if target.exists():
            try:
                previous = json.loads(target.read_text())
            except ValueError:
                previous = None
            if previous is not None:
                previous = {k: v for k, v in previous.items() if k not in VOLATILE_CONFIG_KEYS}
                if previous != stable:
                    raise ConfigError(
                        f"{self.root} already holds results of a different experiment; choose another --out"
                    )
        self.write_text("config.json", json.dumps(config, indent=2, sort_keys=True) + "\n")


def _atomic_write(target: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

"""
Checkpoint Store
Single torch archive holding the intent predictor, the ensemble network and
the fingerprint of the configuration that shaped them
"""
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Union

import torch

from ...domain.exceptions import FingerprintMismatchError, IntelValidationError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def save_checkpoint(
    path: Union[str, Path],
    fingerprint: str,
    config: Dict[str, Any],
    ensemble_state: Dict[str, torch.Tensor],
    predictor_state: Optional[Dict[str, torch.Tensor]] = None,
    seed: int = 0,
    epoch: int = 0,
    metrics: Optional[Dict[str, float]] = None
) -> Path:
    """Write atomically: temp file in the target directory, then os.replace"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    archive = {
        "format_version": FORMAT_VERSION,
        "fingerprint": fingerprint,
        "config": config,
        "ensemble": {k: v.detach().cpu() for k, v in ensemble_state.items()},
        "predictor": None if predictor_state is None else {k: v.detach().cpu() for k, v in predictor_state.items()},
        "seed": seed,
        "epoch": epoch,
        "metrics": dict(metrics or {}),
    }
    fd, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as f:
            torch.save(archive, f)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.remove(temp_name)
        raise
    logger.info(f"Saved checkpoint {path} (epoch {epoch}, seed {seed})")
    return path


def load_checkpoint(path: Union[str, Path], expected_fingerprint: Optional[str] = None) -> Dict[str, Any]:
    """Load an archive, checking its version and optionally its config fingerprint"""
    path = Path(path)
    if not path.exists():
        raise IntelValidationError(f"Checkpoint not found: {path}")
    archive = torch.load(path, map_location="cpu", weights_only=False)
    if not isinstance(archive, dict) or archive.get("format_version") != FORMAT_VERSION:
        raise IntelValidationError(f"Unsupported checkpoint format in {path}")
    if expected_fingerprint is not None and archive["fingerprint"] != expected_fingerprint:
        raise FingerprintMismatchError(
            f"Checkpoint {path} was trained with config {archive['fingerprint'][:12]}, "
            f"current config is {expected_fingerprint[:12]}"
        )
    return archive

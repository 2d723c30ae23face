"""
MDT Workbench - Artifact Store

Stage outputs live under the experiment output directory. Each finished
stage leaves a stamp: a hash of its own parameters chained with the stamps
of the stages it read from, so a stage is up to date exactly when its
recorded stamp equals the one recomputed from the current configuration.
"""

import hashlib
from pathlib import Path
from typing import Any

import orjson
from pydantic import BaseModel, ConfigDict

from mdt_workbench.layer.errors import FormatError, MissingArtifactError
from mdt_workbench.layer.logger import get_logger

logger = get_logger(__name__)

STAMP_DIR = "stamps"


class StageStamp(BaseModel):
    """Record written when a stage completes."""

    model_config = ConfigDict(frozen=True)

    stage: str
    digest: str
    upstream: dict[str, str]
    outputs: list[str]


def compute_digest(stage: str, params: Any, upstream: dict[str, str]) -> str:
    """sha256 over the stage name, its parameters and its upstream digests."""
    payload = orjson.dumps(
        {"stage": stage, "params": params, "upstream": upstream},
        option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY,
        default=str,
    )
    return hashlib.sha256(payload).hexdigest()


class ArtifactStore:
    """Paths and stamps of one experiment's artifacts."""

    def __init__(self, root: Path) -> None:
        self.root = Path(root)

    def path(self, *parts: str) -> Path:
        return self.root.joinpath(*parts)

    def _stamp_path(self, stage: str) -> Path:
        return self.root / STAMP_DIR / f"{stage}.json"

    def read_stamp(self, stage: str) -> StageStamp | None:
        path = self._stamp_path(stage)
        if not path.exists():
            return None
        try:
            return StageStamp.model_validate(orjson.loads(path.read_bytes()))
        except (orjson.JSONDecodeError, ValueError) as e:
            raise FormatError(f"{path}: unreadable stamp: {e}") from e

    def digest_of(self, stage: str, artifact: str) -> str:
        """Digest of a finished upstream stage.

        Raises:
            MissingArtifactError: The stage has not produced its artifact yet
        """
        stamp = self.read_stamp(stage)
        if stamp is None or not all(self.path(out).exists() for out in stamp.outputs):
            raise MissingArtifactError(artifact, stage)
        return stamp.digest

    def is_current(self, stage: str, digest: str) -> bool:
        stamp = self.read_stamp(stage)
        if stamp is None or stamp.digest != digest:
            return False
        return all(self.path(out).exists() for out in stamp.outputs)

    def invalidate(self, stage: str) -> None:
        self._stamp_path(stage).unlink(missing_ok=True)

    def record(self, stage: str, digest: str, upstream: dict[str, str], outputs: list[str]) -> StageStamp:
        stamp = StageStamp(stage=stage, digest=digest, upstream=upstream, outputs=outputs)
        path = self._stamp_path(stage)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(orjson.dumps(stamp.model_dump(), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS))
        logger.debug("Stamp recorded", stage=stage, digest=digest[:12])
        return stamp

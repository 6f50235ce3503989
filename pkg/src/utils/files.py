# File: src/utils/files.py

"""Atomic output files and the run manifest written by every CLI command."""

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union

PathLike = Union[str, Path]

TOOLKIT_VERSION = "1.0.0"


def atomic_write_bytes(path: PathLike, data: bytes) -> Path:
    """Write to a temp file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def read_input(path: PathLike) -> bytes:
    """Read an input file fully; the manifest digest is taken over exactly these bytes."""
    return Path(path).read_bytes()


@dataclass
class RunManifest:
    command: str
    config: Dict[str, Any] = field(default_factory=dict)
    seeds: Dict[str, int] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    version: str = TOOLKIT_VERSION

    def add_input(self, path: PathLike, data: bytes) -> None:
        self.inputs[Path(path).name] = sha256_bytes(data)

    def add_output(self, path: PathLike) -> None:
        name = Path(path).name
        if name not in self.outputs:
            self.outputs.append(name)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str) + "\n"

    def write(self, out_dir: PathLike) -> Path:
        path = Path(out_dir) / f"manifest_{self.command.replace('-', '_')}.json"
        return atomic_write_text(path, self.to_json())

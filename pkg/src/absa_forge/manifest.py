"""Run manifests: every command writes one beside its outputs.

A manifest records the toolkit version, the exact command line, every seed in
play, and SHA-256 digests of inputs and outputs, which makes any output file
auditable and re-derivable: same version + same inputs + same flags gives the
same bytes.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from pathlib import Path

from . import __version__


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(
    command: list[str],
    seeds: dict,
    inputs: list[str | Path],
    outputs: list[str | Path],
    details: dict | None = None,
) -> dict:
    return {
        "tool": "absa-forge",
        "version": __version__,
        "command": list(command),
        "seeds": seeds,
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": {str(p): sha256_file(p) for p in outputs},
        "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "details": details or {},
    }


def manifest_path_for(out: str | Path) -> Path:
    out = Path(out)
    return out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")


def write_manifest(manifest: dict, out: str | Path) -> Path:
    path = manifest_path_for(out)
    path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path

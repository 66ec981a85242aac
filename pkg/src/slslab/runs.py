"""Run directories: locking, manifests, and reproducibility records."""

from __future__ import annotations

import hashlib
import json
import os
from contextlib import contextmanager
from importlib.metadata import version, PackageNotFoundError


class RunDirError(RuntimeError):
    pass


@contextmanager
def run_directory(path):
    """Create and lock a run directory for a single owning process."""
    os.makedirs(path, exist_ok=True)
    lock = os.path.join(path, ".lock")
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise RunDirError(f"run directory {path} is locked (stale .lock?)")
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield path
    finally:
        os.unlink(lock)


def write_manifest(path, config: dict, seed) -> None:
    """Record config echo, seed, code version, and output checksums."""
    checksums = {}
    for name in sorted(os.listdir(path)):
        full = os.path.join(path, name)
        if name in ("manifest.json", ".lock") or not os.path.isfile(full):
            continue
        with open(full, "rb") as fh:
            checksums[name] = hashlib.sha256(fh.read()).hexdigest()
    try:
        code_version = version("slslab")
    except PackageNotFoundError:
        code_version = "unknown"
    manifest = {
        "config": config,
        "seed": seed,
        "code_version": code_version,
        "checksums": checksums,
    }
    with open(os.path.join(path, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)

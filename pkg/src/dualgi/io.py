"""File formats: binary PGM (P5, 8-bit), CSV tables, plain-text manifests.

All writers are deterministic: identical inputs produce byte-identical files,
so seeded experiment outputs can be diffed across runs.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np


def write_pgm(path, image: np.ndarray) -> None:
    """Write a 2-D array of 8-bit levels (values 0..255) as binary PGM (P5)."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError(f"PGM image must be 2-D, got shape {img.shape}")
    levels = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    height, width = levels.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + levels.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary PGM (P5) file, returning a 2-D uint8 array."""
    raw = Path(path).read_bytes()
    # Header: magic, width, height, maxval; comments (#...) allowed between tokens.
    m = re.match(rb"P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(\d+)\s+(\d+)\s", raw)
    if m is None:
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    width, height, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM supported (maxval 255), got {maxval}")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=width * height, offset=m.end())
    if pixels.size != width * height:
        raise ValueError(f"{path}: truncated pixel data")
    return pixels.reshape(height, width).copy()


def write_unit_pgm(path, values: np.ndarray) -> None:
    """Write values in [0, 1] as PGM with the direct linear mapping 1.0 -> 255."""
    write_pgm(path, np.asarray(values, dtype=float) * 255.0)


def read_unit_pgm(path) -> np.ndarray:
    """Read a PGM back to floats in [0, 1] (inverse of write_unit_pgm)."""
    return read_pgm(path).astype(float) / 255.0


def write_counts_pgm(path, counts: np.ndarray) -> None:
    """Write an integer count image as PGM auto-scaled to its maximum count.

    The scale is recorded in a sidecar text file ("<path>.scale.txt") so the
    raw count magnitude can be recovered from the 8-bit image.
    """
    counts = np.asarray(counts)
    max_count = int(counts.max()) if counts.size else 0
    scale = max_count if max_count > 0 else 1
    write_pgm(path, counts.astype(float) / scale * 255.0)
    Path(f"{path}.scale.txt").write_text(
        f"max_count={max_count}\nmapping=pixel_value = round(count / max_count * 255)\n"
    )


def write_counts_csv(path, counts: np.ndarray) -> None:
    """Write an integer count image as long-format CSV with header row,col,count."""
    counts = np.asarray(counts)
    lines = ["row,col,count"]
    for r in range(counts.shape[0]):
        for c in range(counts.shape[1]):
            lines.append(f"{r},{c},{int(counts[r, c])}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_values_csv(path, values: np.ndarray) -> None:
    """Write a 2-D array of floats as long-format CSV with header row,col,value."""
    values = np.asarray(values, dtype=float)
    lines = ["row,col,value"]
    for r in range(values.shape[0]):
        for c in range(values.shape[1]):
            lines.append(f"{r},{c},{values[r, c]:.10g}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_manifest(path, entries: dict) -> None:
    """Write a key=value manifest, one entry per line, in insertion order."""
    lines = [f"{key}={value}" for key, value in entries.items()]
    Path(path).write_text("\n".join(lines) + "\n")

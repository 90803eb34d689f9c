"""File formats and atomic write helpers.

All JSON written by the package goes through :func:`write_json_atomic`,
which stages the payload in a temporary file in the destination directory
and renames it into place, so a crashed run never leaves a partial file.
Keys are sorted and floats use Python repr, which makes byte-identical
reruns possible for identical inputs and seeds.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from typing import Any

import numpy as np

from .errors import ValidationError
from .harmonics import SO3Spectrum, SphereSpectrum, flat_index


def write_json_atomic(path: str, payload: dict) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------


def sphere_spectrum_to_dict(spec: SphereSpectrum) -> dict:
    coeffs = []
    for k in range(spec.degree_max + 1):
        for i in range(1, 2 * k + 2):
            coeffs.append([k, i, float(spec.coeffs[flat_index(k, i)])])
    return {"space": "s2", "degree_max": spec.degree_max, "coeffs": coeffs}


def sphere_spectrum_from_dict(d: dict) -> SphereSpectrum:
    if d.get("space") != "s2":
        raise ValidationError(f"expected space 's2', got {d.get('space')!r}")
    spec = SphereSpectrum(int(d["degree_max"]))
    for k, i, v in d["coeffs"]:
        spec.set(int(k), int(i), float(v))
    return spec


def so3_spectrum_to_dict(spec: SO3Spectrum) -> dict:
    blocks = []
    for k, b in enumerate(spec.blocks):
        blocks.append({"k": k, "re": b.real.tolist(), "im": b.imag.tolist()})
    return {"space": "so3", "degree_max": spec.degree_max, "blocks": blocks}


def so3_spectrum_from_dict(d: dict) -> SO3Spectrum:
    if d.get("space") != "so3":
        raise ValidationError(f"expected space 'so3', got {d.get('space')!r}")
    K = int(d["degree_max"])
    spec = SO3Spectrum(K)
    for entry in d["blocks"]:
        k = int(entry["k"])
        if k > K:
            raise ValidationError(f"block degree {k} beyond degree_max {K}")
        spec.blocks[k] = np.asarray(entry["re"], dtype=float) + 1j * np.asarray(
            entry["im"], dtype=float
        )
    return spec


def spectrum_from_dict(d: dict) -> SphereSpectrum | SO3Spectrum:
    space = d.get("space")
    if space == "s2":
        return sphere_spectrum_from_dict(d)
    if space == "so3":
        return so3_spectrum_from_dict(d)
    raise ValidationError(f"unknown spectrum space {space!r}")


# ---------------------------------------------------------------------------
# sample tables
# ---------------------------------------------------------------------------


def write_samples_csv(path: str, points: np.ndarray, values: np.ndarray) -> None:
    """Sample table: x,y,z,value rows on S2, or x1..z2,value on S2 x S2."""
    points = np.atleast_2d(points)
    if points.shape[1] == 3:
        header = ["x", "y", "z", "value"]
    elif points.shape[1] == 6:
        header = ["x1", "y1", "z1", "x2", "y2", "z2", "value"]
    else:
        raise ValidationError(f"unsupported point width {points.shape[1]}")
    rows = [header]
    for p, v in zip(points, values):
        rows.append([repr(float(c)) for c in p] + [repr(float(v))])
    write_text_atomic(path, "\n".join(",".join(map(str, r)) for r in rows) + "\n")


def read_samples_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        width = len(header) - 1
        if width not in (3, 6):
            raise ValidationError(f"unsupported sample row width {len(header)}")
        pts, vals = [], []
        for row in reader:
            if not row:
                continue
            pts.append([float(c) for c in row[:width]])
            vals.append(float(row[width]))
    return np.asarray(pts), np.asarray(vals)


def format_grid_csv(thetas: np.ndarray, phis: np.ndarray, values: np.ndarray) -> str:
    lines = ["theta,phi,value"]
    for t, p, v in zip(thetas, phis, values):
        lines.append(f"{float(t)!r},{float(p)!r},{float(v)!r}")
    return "\n".join(lines) + "\n"

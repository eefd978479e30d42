"""File formats: two-column spectra, CSV manifests, and JSON phase libraries.

Floats are written with ``repr`` (shortest string that parses back to the
same double), so every write/read cycle is lossless.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import AngleGrid, Composition, Dataset, PhaseLibrary, Spectrum, validate_dataset
from .errors import DataError, GridMismatch, MissingFile, ParseError, VersionMismatch

LIBRARY_FORMAT = "phasefrac-library"
LIBRARY_VERSION = 1


def atomic_write(path, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path``, then rename over it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_xy(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column (angle, intensity) file.

    Columns may be separated by whitespace or commas; ``#`` starts a
    comment. A leading non-numeric header line is tolerated.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"spectrum file not found: {path}")
    angles, values = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            try:
                if len(parts) != 2:
                    raise ValueError
                a, v = float(parts[0]), float(parts[1])
            except ValueError:
                if not angles and not any(c.isdigit() for c in line):
                    continue  # column header
                raise ParseError(f"{path}:{lineno}: expected two numeric columns, got {line!r}") from None
            angles.append(a)
            values.append(v)
    if not angles:
        raise ParseError(f"{path}: no data rows")
    return np.array(angles), np.array(values)


def format_xy(angles, intensities, header: str | None = None) -> str:
    buf = _io.StringIO()
    if header:
        for line in header.splitlines():
            buf.write(f"# {line}\n")
    for a, v in zip(angles, intensities):
        buf.write(f"{float(a)!r} {float(v)!r}\n")
    return buf.getvalue()


def write_xy(path, angles, intensities, header: str | None = None) -> None:
    atomic_write(path, format_xy(angles, intensities, header))


def read_manifest(path) -> tuple[list[str], list[tuple[str, str, list[float]]]]:
    """Parse ``sample_id,file,<phase_1>,...,<phase_M>`` rows.

    Returns the phase names and ``(sample_id, file, fractions)`` entries;
    file paths are left as written (relative to the manifest directory).
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    with open(path, newline="") as fh:
        rows = [(n, r) for n, r in enumerate(csv.reader(fh), start=1)]
    rows = [(n, [c.strip() for c in r]) for n, r in rows if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise ParseError(f"{path}: empty manifest")
    _, header = rows[0]
    if len(header) < 3 or [h.lower() for h in header[:2]] != ["sample_id", "file"]:
        raise ParseError(f"{path}:{rows[0][0]}: header must start with 'sample_id,file' and name at least one phase")
    phases = header[2:]
    if len(set(phases)) != len(phases):
        raise ParseError(f"{path}: duplicate phase names in header")
    entries, seen = [], set()
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        sid, fname = row[0], row[1]
        if sid in seen:
            raise ParseError(f"{path}:{lineno}: duplicate sample id {sid!r}")
        seen.add(sid)
        try:
            fracs = [float(v) for v in row[2:]]
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric fraction in {row[2:]}") from None
        entries.append((sid, fname, fracs))
    if not entries:
        raise ParseError(f"{path}: manifest has no samples")
    return phases, entries


def format_manifest(phase_names: Sequence[str], entries) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sample_id", "file", *phase_names])
    for sid, fname, fracs in entries:
        w.writerow([sid, fname, *(repr(float(f)) for f in fracs)])
    return buf.getvalue()


def load_dataset(manifest_path) -> Dataset:
    """Read a manifest and every spectrum it lists into a validated Dataset.

    All spectra must share the first file's angle column exactly.
    """
    manifest_path = Path(manifest_path)
    phases, entries = read_manifest(manifest_path)
    base = manifest_path.parent
    grid, first_file = None, None
    samples, ids = [], []
    for sid, fname, fracs in entries:
        fpath = base / fname
        angles, values = read_xy(fpath)
        if grid is None:
            try:
                grid = AngleGrid(angles)
            except ValueError as exc:
                raise ParseError(f"{fpath}: {exc}") from None
            first_file = fpath
        elif not np.array_equal(angles, grid.angles):
            raise GridMismatch(f"angle grid of {fpath} differs from {first_file}")
        samples.append((values, fracs))
        ids.append(sid)
    try:
        return validate_dataset(samples, grid, phases, ids)
    except DataError as exc:
        raise type(exc)(f"{manifest_path}: {exc}") from None


def save_dataset(dataset: Dataset, directory, manifest_name: str = "manifest.csv", spectra_dir: str = "spectra") -> Path:
    """Write one .xy file per sample plus a manifest that points at them."""
    directory = Path(directory)
    entries = []
    for sid, (spec, comp) in zip(dataset.sample_ids, dataset.samples):
        rel = f"{spectra_dir}/{sid}.xy"
        write_xy(directory / rel, dataset.grid.angles, spec.intensities)
        entries.append((sid, rel, comp.fractions))
    manifest = directory / manifest_name
    atomic_write(manifest, format_manifest(dataset.phase_names, entries))
    return manifest


def library_to_dict(library: PhaseLibrary) -> dict:
    return {
        "format": LIBRARY_FORMAT,
        "version": LIBRARY_VERSION,
        "phase_names": list(library.phase_names),
        "angles": library.grid.angles.tolist(),
        "patterns": library.patterns.tolist(),
    }


def save_library(library: PhaseLibrary, path) -> None:
    # json emits floats with repr, which round-trips exactly
    atomic_write(path, json.dumps(library_to_dict(library), indent=1) + "\n")


def load_library(path) -> PhaseLibrary:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"library file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("format") != LIBRARY_FORMAT:
        raise ParseError(f"{path}: not a {LIBRARY_FORMAT} file")
    if "version" not in doc:
        raise ParseError(f"{path}: missing version field")
    if doc["version"] != LIBRARY_VERSION:
        raise VersionMismatch(f"{path}: library format version {doc['version']!r}, expected {LIBRARY_VERSION}")
    try:
        grid = AngleGrid(np.array(doc["angles"], dtype=float))
        patterns = np.array(doc["patterns"], dtype=float)
        return PhaseLibrary(patterns, tuple(doc["phase_names"]), grid)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed library ({exc})") from None


def load_spectrum_for(path, grid: AngleGrid):
    """Read an .xy file and check it sits on ``grid`` exactly."""
    angles, values = read_xy(path)
    if not np.array_equal(angles, grid.angles):
        raise GridMismatch(f"angle grid of {path} does not match the library grid")
    return Spectrum(values, grid)


def format_compositions(rows: Sequence[tuple[str, Composition]]) -> str:
    """CSV with one row per sample, one column per phase."""
    names = rows[0][1].phase_names
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sample_id", *names])
    for sid, comp in rows:
        w.writerow([sid, *(repr(float(v)) for v in comp.fractions)])
    return buf.getvalue()

"""Deterministic CSV/JSON emission with provenance metadata.

Every file carries the config hash, the seed, and the tool version, so a
report can always be traced back to the run that produced it.  Floats are
printed with 17 significant digits ('.' decimal, no locale), which
round-trips exactly; identical config and seed therefore reproduce
byte-identical files.  Writes are atomic (temp file + rename), so a
failed run leaves no partial outputs.
"""

import hashlib
import json
import os

from . import __version__

__all__ = ["format_float", "config_digest", "metadata_comments",
           "write_csv", "write_json"]


def format_float(x):
    return f"{float(x):.17g}"


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_digest(config):
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def metadata_comments(config, seed):
    return [f"# config_sha256={config_digest(config)}",
            f"# seed={int(seed)}",
            f"# tool_version={__version__}"]


def _atomic_write(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _cell(value):
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def write_csv(path, columns, comments=()):
    """Write named columns as CSV below '#' comment lines.

    ``columns`` is a list of (name, values) pairs of equal length.
    """
    names = [name for name, _ in columns]
    series = [list(values) for _, values in columns]
    length = len(series[0]) if series else 0
    if any(len(s) != length for s in series):
        raise ValueError("columns must have equal length")
    lines = list(comments)
    lines.append(",".join(names))
    for row in range(length):
        lines.append(",".join(_cell(s[row]) for s in series))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path, payload, config, seed):
    """Write a JSON report with a meta block up front."""
    body = {"meta": {"config_sha256": config_digest(config),
                     "seed": int(seed),
                     "tool_version": __version__}}
    body.update(payload)
    _atomic_write(path, json.dumps(body, indent=2, sort_keys=True) + "\n")

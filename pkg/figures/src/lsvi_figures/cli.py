"""make-figures: render sweep output CSVs into image files.

Usage: ``make-figures <config>`` where the config is plain key=value text:

    sweep_dir =          directory holding *_trace.csv and *_summary.csv
    trace =              comma-separated trace CSV paths (overrides sweep_dir)
    summary =            comma-separated summary CSV paths (overrides sweep_dir)
    out_dir =            output directory (default: sweep_dir, else ".")
    format = png         image format
    log_iterations = false
    log_looseness = true

Exit codes: 0 success, 2 bad configuration or unreadable input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .plotting import FigureSpec, plot_convergence, plot_final_looseness

_BOOLS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


class ConfigError(ValueError):
    pass


def parse_config(path) -> FigureSpec:
    raw: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    known = {"sweep_dir", "trace", "summary", "out_dir", "format", "log_iterations", "log_looseness"}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        raw[key] = value.split("#", 1)[0].strip()

    sweep_dir = Path(raw["sweep_dir"]) if raw.get("sweep_dir") else None
    traces = tuple(p.strip() for p in raw.get("trace", "").split(",") if p.strip())
    summaries = tuple(p.strip() for p in raw.get("summary", "").split(",") if p.strip())
    if not traces and sweep_dir is not None:
        traces = tuple(sorted(str(p) for p in sweep_dir.glob("*_trace.csv")))
    if not summaries and sweep_dir is not None:
        summaries = tuple(sorted(str(p) for p in sweep_dir.glob("*_summary.csv")))
    if not traces and not summaries:
        raise ConfigError("no input CSVs: set sweep_dir or trace/summary paths")

    out_dir = raw.get("out_dir") or (str(sweep_dir) if sweep_dir is not None else ".")

    def flag(key, default):
        if key not in raw:
            return default
        try:
            return _BOOLS[raw[key].lower()]
        except KeyError:
            raise ConfigError(f"{key}: expected a boolean, got {raw[key]!r}") from None

    return FigureSpec(
        trace_paths=traces,
        summary_paths=summaries,
        out_dir=out_dir,
        image_format=raw.get("format", "png"),
        log_iterations=flag("log_iterations", False),
        log_looseness=flag("log_looseness", True),
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="make-figures", description=__doc__.split("\n\n")[0])
    parser.add_argument("config", help="key=value config file")
    args = parser.parse_args(argv)
    try:
        spec = parse_config(args.config)
        written = []
        if spec.trace_paths:
            path, manifest = plot_convergence(spec)
            written.append(path)
            for (dataset, method), count in sorted(manifest.items()):
                print(f"panel {dataset}/{method}: {count} curves")
        if spec.summary_paths:
            path, manifest = plot_final_looseness(spec)
            written.append(path)
            for dataset, count in sorted(manifest.items()):
                print(f"final-looseness {dataset}: {count} method curves")
        for path in written:
            print(f"wrote {path}")
        return 0
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

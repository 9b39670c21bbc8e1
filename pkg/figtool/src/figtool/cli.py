"""make-figures: render a batch of figure jobs described by a JSON file."""
import argparse
import json
import sys
from pathlib import Path

from .render import FigureJob, render
from .schemas import SchemaError


def _load_jobs(path: str) -> list[FigureJob]:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SchemaError(f"job file not found: {path}")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})")
    if isinstance(raw, dict):
        raw = [raw]
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"{path}: expected a job object or non-empty list of jobs")
    jobs = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise SchemaError(f"{path}: job {i} is not an object")
        missing = [k for k in ("kind", "inputs", "output") if k not in entry]
        if missing:
            raise SchemaError(f"{path}: job {i} missing keys {missing}")
        inputs = entry["inputs"]
        if isinstance(inputs, str):
            inputs = [inputs]
        jobs.append(
            FigureJob(
                kind=entry["kind"],
                inputs=list(inputs),
                output=entry["output"],
                style=dict(entry.get("style", {})),
            )
        )
    return jobs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="make-figures",
        description="Render figures from simulation CSV outputs.",
    )
    parser.add_argument("--job", required=True, help="JSON file describing figure jobs")
    args = parser.parse_args(argv)
    try:
        jobs = _load_jobs(args.job)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    failed = 0
    for job in jobs:
        try:
            out = render(job)
            print(f"wrote {out}")
        except SchemaError as exc:
            print(f"error: {job.kind} -> {job.output}: {exc}", file=sys.stderr)
            failed += 1
        except OSError as exc:
            print(f"error: {job.kind} -> {job.output}: {exc}", file=sys.stderr)
            failed += 1
    return 3 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

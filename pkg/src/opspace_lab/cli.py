"""Command line front end: ``opspace-lab COMMAND --space FILE [options]``.

Exit codes: 0 all checks pass, 1 a check failed, 2 inconclusive, 64 usage or
input error. Reports are JSON; the same seed gives byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cmatrix import ShapeError, as_matrix, fingerprint, matrix_from_json
from .discover import adjoint_intersection, find_unit, tro_closure
from .opspace import MembershipError, OperatorSpace, space_from_json
from .product import product_context
from .verify import condition_i_record, replay_report, verify_space

COMMANDS = ("verify-lemmas", "check-conditions", "find-unit", "classify", "report")
EXIT = {"pass": 0, "fail": 1, "inconclusive": 2}
EX_USAGE = 64
REPLAY_TOL = 1e-12


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    space_file: str
    v: str | None = None
    n_max: int = 3
    trials: int = 1000
    restarts: int | None = None
    steps: int = 200
    seed: int = 0
    tol: float = 1e-10
    output: str | None = None
    replay: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.n_max < 1:
            raise UsageError("--n-max must be >= 1")
        if self.trials < 1:
            raise UsageError("--trials must be >= 1")
        if self.steps < 0 or (self.restarts is not None and self.restarts < 1):
            raise UsageError("--restarts must be >= 1 and --steps >= 0")
        if not self.tol > 0:
            raise UsageError("--tol must be > 0")


def _read_json(path: str, what: str):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file {path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")


def _parse_matrix(data, what: str) -> np.ndarray:
    try:
        arr = np.asarray(data)
        if arr.ndim == 2 and arr.dtype != object:
            return as_matrix(arr.astype(np.float64))
        return matrix_from_json(data)
    except (ShapeError, ValueError, TypeError) as exc:
        raise UsageError(f"{what}: {exc}")


def load_inputs(cfg: RunConfig) -> tuple[OperatorSpace, object]:
    """The space and the v source: a matrix, or the string "search"."""
    data = _read_json(cfg.space_file, "space")
    try:
        space = space_from_json(data)
    except (ValueError, ShapeError) as exc:
        raise UsageError(f"space file {cfg.space_file}: {exc}")
    raw = cfg.v if cfg.v is not None else data.get("v", "search") if isinstance(data, dict) else "search"
    if isinstance(raw, str):
        if raw == "search":
            return space, "search"
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--v: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    v = _parse_matrix(raw, "v")
    if v.shape != space.shape:
        raise UsageError(f"v has shape {v.shape}, space is {space.shape}")
    return space, v


def _context(space, v, cfg: RunConfig):
    """ProductContext plus the search record (None for a user v)."""
    found = None
    if isinstance(v, str):
        kw = {"seed": cfg.seed, "steps": cfg.steps}
        if cfg.restarts is not None:
            kw["restarts"] = cfg.restarts
        found = find_unit(space, **kw)
        v = found.v
    try:
        ctx = product_context(space, v)
    except MembershipError as exc:
        raise UsageError(f"v is not in {space.name}: residual {exc.residual:.3e}")
    return ctx, found


def _budget(cfg: RunConfig):
    return (cfg.restarts if cfg.restarts is not None else 32, cfg.steps)


def _closure(space: OperatorSpace) -> dict:
    rep = tro_closure(space).to_json()
    if space.p == space.q:
        inter = adjoint_intersection(space)
        rep["adjoint_intersection_dim"] = inter.dim
    return rep


def run(cfg: RunConfig) -> tuple[int, dict]:
    space, v = load_inputs(cfg)
    if cfg.replay:
        return _run_replay(cfg, space, v)

    if cfg.command == "find-unit":
        kw = {"seed": cfg.seed, "steps": cfg.steps}
        if cfg.restarts is not None:
            kw["restarts"] = cfg.restarts
        cand = find_unit(space, **kw)
        ok = cand.cond_i_residual <= cfg.tol
        out = {"space": space.name, "command": cfg.command, "unit": cand.to_json(),
               "status": "pass" if ok else "fail"}
        return EXIT[out["status"]], out

    ctx, found = _context(space, v, cfg)
    common = dict(trials=cfg.trials, n_max=cfg.n_max, budget=_budget(cfg), seed=cfg.seed, tol=cfg.tol)
    if cfg.command == "verify-lemmas":
        ci = condition_i_record(ctx, cfg.tol)
        rep = verify_space(ctx, lemmas=True, conditions=False, force=True, **common)
        out = rep.to_json()
        out["condition_i"] = ci
    elif cfg.command == "check-conditions":
        out = verify_space(ctx, lemmas=False, conditions=True, **common).to_json()
    elif cfg.command == "classify":
        out = verify_space(ctx, lemmas=False, conditions=True, **common).to_json()
        out["closure"] = _closure(space)
    else:  # report
        out = verify_space(ctx, lemmas=True, conditions=True, **common).to_json()
        out["closure"] = _closure(space)
    out["command"] = cfg.command
    if found is not None:
        out["unit"] = found.to_json()
    return EXIT[out["status"]], out


def _run_replay(cfg: RunConfig, space, v) -> tuple[int, dict]:
    report = _read_json(cfg.replay, "replay")
    if not isinstance(report, dict):
        raise UsageError("replay file must hold a JSON object")
    if isinstance(v, str):
        if "v_matrix" not in report:
            raise UsageError("replay needs --v or a report carrying v_matrix")
        v = _parse_matrix(report["v_matrix"], "v_matrix")
    try:
        ctx = product_context(space, v)
    except MembershipError as exc:
        raise UsageError(f"v is not in {space.name}: residual {exc.residual:.3e}")
    if "kind" in report:  # a single witness
        report = {"cases": [{"witness": report}]}
    rows, worst = [], 0.0
    for w, diff in replay_report(ctx, report):
        rows.append({"kind": w["kind"], "id": w.get("id", w.get("n")), "recorded": w["residual"], "diff": diff})
        worst = max(worst, diff)
    status = "pass" if worst <= REPLAY_TOL else "fail"
    return EXIT[status], {"command": "replay", "space": space.name, "v": fingerprint(ctx.v),
                          "witnesses": rows, "max_diff": worst, "status": status}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="opspace-lab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--space", required=True, metavar="PATH", help="space definition (JSON)")
    ap.add_argument("--v", default=None, help='inline JSON matrix, or "search"')
    ap.add_argument("--n-max", type=int, default=3)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--restarts", type=int, default=None)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=None, help="default: $OPSPACE_LAB_SEED or 0")
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--output", metavar="PATH", default=None)
    ap.add_argument("--replay", metavar="WITNESS_FILE", default=None)
    return ap


def _seed(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("OPSPACE_LAB_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"OPSPACE_LAB_SEED must be an integer, got {env!r}")


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else EX_USAGE
    try:
        cfg = RunConfig(
            command=args.command, space_file=args.space, v=args.v, n_max=args.n_max, trials=args.trials,
            restarts=args.restarts, steps=args.steps, seed=_seed(args.seed), tol=args.tol,
            output=args.output, replay=args.replay,
        )
        code, out = run(cfg)
    except UsageError as exc:
        print(f"opspace-lab: error: {exc}", file=sys.stderr)
        return EX_USAGE
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``zxcut build | decompose | verify``.

Exit status is 0 on success, 1 for bad input (unknown circuit, bad flags,
missing or corrupt files) and 2 when an internal invariant fails, which
includes a verification that does not reach fidelity 1.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path

from .circuit import CircuitError, circuit_to_diagram, parse_circuit
from .decompose import (
    STRATEGIES,
    CutSchedule,
    DecompositionError,
    run_strategy,
)
from .graph import Diagram, t_count
from .rewrite import InvariantViolation, RewriteStep, full_reduce
from .tikz import to_tikz

log = logging.getLogger("zxcut")

OUT_ENV = "ZXCUT_OUT"
DEFAULT_OUT = "zxcut-out"
TOLERANCE = 1e-10
BUILTIN = {"msc-d3": "msc_d3.zxcirc", "msc-d5": "msc_d5.zxcirc"}


class UserError(Exception):
    pass


def _out_dir(args: argparse.Namespace) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def load_circuit_diagram(name: str) -> tuple[str, Diagram]:
    """Resolve a built-in circuit name or a ``.zxcirc`` path."""
    if name in BUILTIN:
        text = resources.files("zxcut.data").joinpath(BUILTIN[name]).read_text()
        return name, circuit_to_diagram(parse_circuit(text))
    p = Path(name)
    if not p.is_file():
        raise UserError(f"unknown circuit {name!r}: not one of {', '.join(BUILTIN)} and no such file")
    try:
        return p.stem, circuit_to_diagram(parse_circuit(p.read_text()))
    except CircuitError as e:
        raise UserError(f"{p}: {e}") from None


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as e:
        raise UserError(f"cannot write {path}: {e.strerror}") from None


def _dump(obj: object) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def cmd_build(args: argparse.Namespace) -> int:
    name, d = load_circuit_diagram(args.circuit)
    out = _out_dir(args)
    _write(out / f"{name}.json", d.dumps())
    if args.emit_tikz:
        _write(out / f"{name}.tikz", to_tikz(d))
    if args.trace:
        steps: list[RewriteStep] = []
        r = full_reduce(d, trace=steps)
        _write(out / f"{name}.trace.json", _dump({
            "version": 1,
            "t_count_before": t_count(d),
            "t_count_after": t_count(r),
            "steps": [s.to_json() for s in steps],
        }))
    print(json.dumps({"circuit": name, "t_count": t_count(d), "vertices": d.num_vertices(),
                      "outputs": len(d.outputs), "file": str(out / f"{name}.json")}))
    return 0


def cmd_decompose(args: argparse.Namespace) -> int:
    name, d = load_circuit_diagram(args.circuit)
    schedule = None
    if args.schedule:
        try:
            schedule = CutSchedule.load(args.schedule)
        except (OSError, ValueError) as e:
            raise UserError(f"cannot read schedule {args.schedule}: {e}") from None
    if args.jobs < 1:
        raise UserError("--jobs must be at least 1")
    result, report = run_strategy(
        args.strategy, d, circuit=name, schedule=schedule, target_t=args.target_t,
        naive=args.naive, bss_fallback=args.bss, jobs=args.jobs,
    )
    out = _out_dir(args)
    terms_dir = out / "terms"
    if terms_dir.is_dir():
        for old in terms_dir.iterdir():
            if old.suffix in (".json", ".tikz"):
                old.unlink()
    for i, t in enumerate(result.terms):
        _write(terms_dir / f"term_{i:04d}.json", t.dumps())
        if args.emit_tikz:
            _write(terms_dir / f"term_{i:04d}.tikz", to_tikz(t))
    rep = report.to_json()
    rep["term_files"] = len(result.terms)
    _write(out / "report.json", _dump(rep))
    _write(out / "timing.json", _dump({"wall_time_s": round(report.wall_time, 3)}))
    if args.trace:
        _write(out / "trace.json", _dump({"version": 1, "provenance": result.provenance}))
    print(json.dumps({k: rep[k] for k in ("strategy", "circuit", "cuts", "terms_after_dedup", "final_terms")}))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    from .evaluate import BudgetExceeded, contract_dense, fidelity, logical_T_state

    out = Path(args.dir) if args.dir else _out_dir(args)
    try:
        rep = json.loads((out / "report.json").read_text())
    except OSError:
        raise UserError(f"no report.json in {out}; run decompose first") from None
    except ValueError as e:
        raise UserError(f"{out / 'report.json'} is not valid JSON: {e}") from None
    files = sorted((out / "terms").glob("term_*.json"))
    if len(files) != rep.get("term_files"):
        raise UserError(f"expected {rep.get('term_files')} term files in {out / 'terms'}, found {len(files)}")
    terms = []
    for f in files:
        try:
            terms.append(Diagram.loads(f.read_text()))
        except (ValueError, KeyError, TypeError) as e:
            raise UserError(f"corrupt term file {f}: {e}") from None
    try:
        states = [contract_dense(full_reduce(t)) for t in terms]
    except BudgetExceeded as e:
        raise UserError(f"terms too large to evaluate: {e}") from None
    total = states[0]
    for s in states[1:]:
        total = total + s
    result: dict = {"circuit": rep["circuit"], "strategy": rep["strategy"], "terms": len(terms),
                    "norm_sq": total.norm_sq()}
    ok = True
    circuit = rep["circuit"]
    if circuit in ("msc-d3", "msc-d5"):
        dist = 3 if circuit == "msc-d3" else 5
        f = fidelity(total, logical_T_state(dist))
        result["fidelity_vs_logical_T"] = f
        ok &= f >= 1 - TOLERANCE
    if circuit != "msc-d5":
        _, d = load_circuit_diagram(circuit)
        if len(d.boundary_order) <= 22:
            orig = contract_dense(d)
            result["fidelity_vs_original"] = fidelity(total, orig)
            result["exact_equal_original"] = total.exact_equal(orig)
            ok &= result["exact_equal_original"]
    denom = total.norm_sq() or 1.0
    vt = total.to_complex()
    result["per_term_overlap"] = [
        float((s.to_complex().conj() @ vt).real / denom) for s in states
    ]
    result["ok"] = bool(ok)
    print(json.dumps(result, indent=1))
    return 0 if ok else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zxcut", description="ZX cutting decompositions of magic state cultivation")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        sp.add_argument("--emit-tikz", action="store_true", help="also write TikZ pictures")
        sp.add_argument("--trace", action="store_true", help="write a trace of rewrites or decomposition events")

    b = sub.add_parser("build", help="translate a circuit to a diagram")
    b.add_argument("--circuit", required=True, help="msc-d3, msc-d5 or a .zxcirc path")
    common(b)
    b.set_defaults(func=cmd_build)

    d = sub.add_parser("decompose", help="run a decomposition strategy")
    d.add_argument("--circuit", required=True)
    d.add_argument("--strategy", required=True, choices=STRATEGIES)
    d.add_argument("--schedule", help="JSON cut schedule")
    d.add_argument("--target-t", type=int, default=1, help="stop cutting once every term has at most this T-count")
    d.add_argument("--naive", action="store_true", help="two AUTO cuts on the full diagram")
    d.add_argument("--bss", action="store_true", help="finish the cut terms with repeated BSS")
    d.add_argument("--jobs", type=int, default=1)
    common(d)
    d.set_defaults(func=cmd_decompose)

    v = sub.add_parser("verify", help="check a decomposition against its references")
    v.add_argument("dir", nargs="?", help="decomposition output directory")
    v.add_argument("--out", help="same as DIR")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UserError, DecompositionError, CircuitError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (InvariantViolation, AssertionError) as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

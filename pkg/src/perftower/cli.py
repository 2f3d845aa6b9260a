"""Command-line front end.

Exit status is 0 when the requested property holds on the window, 1 when it
is verified to fail, and 2 on any operational error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Sequence

from .errors import ParseError, PerfTowerError, WindowUnstable
from .koszul import KoszulInput, default_sequence, dim_depth_compare, koszul_homology, tilt_koszul_compare
from .levelring import LevelRingSpec, Window
from .simplicial import (p_stanley_reisner_ideal, parse_cplx, reduced_homology, reisner_cm_check,
                         stanley_reisner_ideal)
from .tiltops import tilt_iso_check, tilt_level_truncated
from .tower import (TowerSpec, build_monomial_tower, check_axioms, check_cartesian_g,
                    check_gluing_conditions, decompose_tower, glue_towers, pillar_check)

SCHEMA_VERSION = 1
OK, FALSE, ERROR = 0, 1, 2


class Report:
    def __init__(self, command: str, window: Window | None):
        self.command = command
        self.window = window
        self.results: list[dict] = []
        self.witnesses: list[dict] = []
        self.lines: list[str] = []

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "command": self.command,
                "window": self.window.to_dict() if self.window else None,
                "results": self.results, "witnesses": self.witnesses}


def _read_json(path: str) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e.msg}", e.lineno, e.colno) from None


def _read_ring(path: str) -> LevelRingSpec:
    try:
        return LevelRingSpec.from_dict(_read_json(path))
    except (KeyError, TypeError) as e:
        raise ParseError(f"{path}: malformed ring spec ({e})") from None


def _read_tower(path: str) -> tuple[TowerSpec, dict]:
    data = _read_json(path)
    try:
        return TowerSpec.from_dict(data), data.get("window", {})
    except (KeyError, TypeError) as e:
        raise ParseError(f"{path}: malformed tower spec ({e})") from None


def _window(args, file_window: dict | None = None, tower: TowerSpec | None = None) -> Window:
    fw = file_window or {}
    levels = args.levels or fw.get("L") or (tower.L if tower else 3)
    return Window(levels=levels,
                  degree=args.depth or fw.get("D", 8),
                  precision=args.precision or fw.get("N", 4),
                  tilt_depth=args.tilt_depth or fw.get("m", 4))


def _tower_window(args) -> tuple[TowerSpec, Window]:
    tower, fw = _read_tower(args.tower)
    if args.levels and args.levels != tower.L:
        if not tower.is_standard:
            raise ValueError("--levels only applies to towers built from their level-0 ring")
        tower = build_monomial_tower(tower.levels[0], args.levels, tower.tilt_variable)
    return tower, _window(args, fw, tower)


def _write_output(args, data: dict) -> None:
    if args.output:
        Path(args.output).write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")


def cmd_reisner(args) -> tuple[int, Report]:
    delta = parse_cplx(Path(args.complex).read_text())
    rep = Report("reisner", None)
    res = reisner_cm_check(delta, args.p)
    out = {"cohen_macaulay": res.cohen_macaulay, "p": args.p, "dim": delta.dim,
           "reduced_homology": {str(q): r for q, r in reduced_homology(delta, args.p).items()}}
    rep.results.append(out)
    if res.witness:
        face, q = res.witness
        rep.witnesses.append({"face": list(face), "q": q})
        rep.lines.append(f"not CM, witness ({'{' + ','.join(face) + '}' if face else '∅'}, {q})")
    else:
        rep.lines.append(f"Cohen-Macaulay over F_{args.p}")
    return (OK if res else FALSE), rep


def cmd_sr(args) -> tuple[int, Report]:
    delta = parse_cplx(Path(args.complex).read_text())
    spec = stanley_reisner_ideal(delta, args.p)
    rep = Report("sr", None)
    rep.results.append(spec.to_dict())
    rep.lines.append(str(spec))
    _write_output(args, spec.to_dict())
    return OK, rep


def cmd_psr(args) -> tuple[int, Report]:
    delta = parse_cplx(Path(args.complex).read_text())
    spec = p_stanley_reisner_ideal(delta, args.p, args.precision or 4)
    tower = build_monomial_tower(spec, args.levels or 3, delta.vertices[0])
    rep = Report("psr", None)
    rep.results.append(tower.to_dict())
    rep.lines.append(str(spec))
    _write_output(args, tower.to_dict())
    return OK, rep


def cmd_check_tower(args) -> tuple[int, Report]:
    tower, window = _tower_window(args)
    rep = Report("check-tower", window)
    axioms = check_axioms(tower, window)
    squares = check_cartesian_g(tower, window=window)
    pillars = all(pillar_check(tower, i) for i in range(tower.L))
    rep.results.append({"axioms": axioms.to_dict()["axioms"], "cartesian_g": squares.to_dict(),
                        "pillars": pillars})
    for name, status in axioms.statuses:
        rep.lines.append(f"({name}) {status.status}")
        if status.witness:
            rep.witnesses.append({"axiom": name, **status.witness})
    if squares.witness:
        rep.witnesses.append(squares.witness)
    rep.lines.append(f"cartesian (g): {squares.cartesian}; pillars: {pillars}")
    return (OK if axioms.passed and squares.cartesian and pillars else FALSE), rep


def cmd_decompose(args) -> tuple[int, Report]:
    tower, window = _tower_window(args)
    rep = Report("decompose", window)
    d = decompose_tower(tower, window)
    out = d.to_dict()
    rep.results.append(out)
    for entry in out["squares"] + out["torsion_cap_radical"]:
        if "witness" in entry:
            rep.witnesses.append(entry["witness"])
    rep.lines.append(f"torsion-free part: {out['torsion_free'][0]}")
    rep.lines.append(f"reduced special fiber: {out['reduced'][0]}")
    rep.lines.append(f"certified: {d.certified}")
    return (OK if d.certified else FALSE), rep


def _parse_map(items: Sequence[str]) -> dict[str, str | None]:
    out: dict[str, str | None] = {}
    for item in items or ():
        name, sep, target = item.partition("=")
        if not sep or not name:
            raise ParseError(f"--map expects NAME=TARGET, got {item!r}")
        out[name] = None if target in ("", "0") else target
    return out


def cmd_glue(args) -> tuple[int, Report]:
    perfect = _read_ring(args.perfect)
    base, fw = _read_tower(args.tower)
    window = _window(args, fw, base)
    attaching = _parse_map(args.map)
    glued = glue_towers(perfect, base, attaching)
    conds = check_gluing_conditions(glued, perfect, base, attaching, window)
    rep = Report("glue", window)
    rep.results.append({"tower": glued.to_dict(), "levels": [str(s) for s in glued.levels],
                        "conditions": {k: v.to_dict() for k, v in conds.items()}})
    rep.witnesses += [{"condition": k, **v.witness} for k, v in conds.items() if v.witness]
    rep.lines += [str(s) for s in glued.levels]
    ok = all(v.ok for v in conds.values())
    return (OK if ok else FALSE), rep


def cmd_tilt(args) -> tuple[int, Report]:
    tower, window = _tower_window(args)
    rep = Report("tilt", window)
    depth = min(window.tilt_depth, tower.L - args.level)
    approx = tilt_level_truncated(tower, args.level, depth, window)
    iso = tilt_iso_check(tower, args.level, window, depth=depth)
    rep.results.append({"closed_form": approx.closed.to_dict(), "tilt": approx.to_dict(),
                        "isomorphism": iso.to_dict()})
    rep.witnesses += [{"check": k, **s.witness} for k, s in iso.checks if s.witness]
    rep.lines.append(str(approx.closed))
    rep.lines.append(f"isomorphism checks passed: {iso.passed} (principal kernel: {iso.principal})")
    return (OK if iso.passed else FALSE), rep


def cmd_koszul(args) -> tuple[int, Report]:
    data = _read_json(args.ring)
    if "levels" in data:
        tower, window = _tower_window(argparse.Namespace(**{**vars(args), "tower": args.ring}))
        ring = tower.levels[args.level]
    else:
        ring = _read_ring(args.ring)
        window = _window(args, data.get("window"))
    names = args.sequence or default_sequence(ring)
    h = koszul_homology(KoszulInput.from_names(ring, names), window)
    rep = Report("koszul", window)
    rep.results.append(h.to_dict())
    rep.lines += [f"H_{q} = {g}" for q, g in enumerate(h.group_strings())]
    return OK, rep


def cmd_compare_tilt(args) -> tuple[int, Report]:
    tower, window = _tower_window(args)
    rep = Report("compare-tilt", window)
    cmp = tilt_koszul_compare(tower, args.sequence or None, window, args.level)
    dd = dim_depth_compare(tower, window, args.level)
    rep.results.append({"koszul": cmp.to_dict(), "dim_depth": dd.to_dict()})
    for entry in cmp.to_dict()["per_q"]:
        rep.lines.append(f"H_{entry['q']}: {entry['mixed']} | {entry['tilt']}"
                         f"{'' if entry['match'] else '  MISMATCH'}")
        if not entry["match"]:
            rep.witnesses.append(entry)
    rep.lines.append(f"dim {dd.dim_mixed} | {dd.dim_tilt}; depth {dd.depth_mixed} | {dd.depth_tilt}; "
                     f"CM {dd.cm_mixed} | {dd.cm_tilt}")
    ok = cmp.equal and dd.dim_match and dd.depth_match and dd.cm_equiv
    return (OK if ok else FALSE), rep


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--depth", type=_positive, help="x-degree bound D")
    common.add_argument("--precision", type=_positive, help="p-adic precision N")
    common.add_argument("--levels", type=_positive, help="number of tower levels L")
    common.add_argument("--tilt-depth", type=_positive, help="tilt depth m")
    common.add_argument("--level", type=int, default=0, help="tower level to work at")

    parser = argparse.ArgumentParser(prog="perftower", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    for name, func, text in (("reisner", cmd_reisner, "Reisner's Cohen-Macaulay criterion"),
                             ("sr", cmd_sr, "Stanley-Reisner ring of a complex"),
                             ("psr", cmd_psr, "p-Stanley-Reisner tower of a complex")):
        p = add(name, func, text)
        p.add_argument("complex")
        p.add_argument("--p", type=int, required=True)
        p.add_argument("-o", "--output", help="also write the ring or tower file here")
    for name, func, text in (("check-tower", cmd_check_tower, "verify the tower axioms"),
                             ("decompose", cmd_decompose, "torsion-free / reduced decomposition"),
                             ("tilt", cmd_tilt, "closed-form small tilt and its isomorphisms")):
        add(name, func, text).add_argument("tower")
    p = add("glue", cmd_glue, "glue a reduced characteristic-p ring onto a tower")
    p.add_argument("perfect")
    p.add_argument("tower")
    p.add_argument("--map", action="append", default=[], metavar="NAME=TARGET")
    p = add("koszul", cmd_koszul, "Koszul homology of a monomial sequence")
    p.add_argument("ring")
    p.add_argument("sequence", nargs="*")
    p = add("compare-tilt", cmd_compare_tilt, "Koszul, dimension and depth across the tilt")
    p.add_argument("tower")
    p.add_argument("--sequence", nargs="+")
    return parser


def _emit(rep: Report, fmt: str, stream) -> None:
    if fmt == "json":
        stream.write(json.dumps(rep.to_dict(), sort_keys=True, indent=2) + "\n")
    else:
        stream.write("\n".join(rep.lines) + "\n")


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return OK if e.code == 0 else ERROR
    try:
        status, rep = args.func(args)
    except WindowUnstable as e:
        rep = Report(args.command, None)
        rep.results.append({"error": str(e), "first": e.first.to_dict(), "second": e.second.to_dict()})
        rep.lines.append(f"error: {e}")
        _emit(rep, args.format, stdout)
        return ERROR
    except (PerfTowerError, OSError, ValueError) as e:
        stderr.write(f"perftower {args.command}: {e}\n")
        return ERROR
    _emit(rep, args.format, stdout)
    return status


if __name__ == "__main__":
    sys.exit(main())

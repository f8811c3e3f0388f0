"""Command line front end: single computations, theorem comparisons and corpus scans."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from importlib import metadata

from . import __version__
from .arith import INF, is_squarefree
from .cassels import LocalPointError, gram_matrix
from .curves import CurveTriple, find_companions, is_companion
from .descent import InconclusiveError
from .genus import (
    ClassGroupCache,
    CriterionHypothesisError,
    congruent_criterion_even,
    congruent_criterion_odd,
)
from .selmer import Check, HypothesisError, hypothesis_checks, pure_selmer, selmer_matrix

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_HYPOTHESIS = 2
EXIT_INCONCLUSIVE = 3
EXIT_VIOLATION = 4

SCAN_COLUMNS = ["n", "hypotheses", "dimension", "direct_dimension", "agree", "gram", "verdict", "error"]


class TheoremViolation(RuntimeError):
    """Two computations a theorem says must agree did not."""


@dataclass
class RunConfig:
    command: str
    curve: tuple[int, int, int] | None = None
    n: int | None = None
    start: int | None = None
    stop: int | None = None
    companion: tuple[int, int, int] | None = None
    search_bound: int | None = None
    method: str = "matrix"
    variant: str = "odd"
    reading: str = "scoped"
    format: str = "json"
    seed: int | None = None
    jobs: int = 1
    unchecked: bool = False

    def validate(self) -> None:
        if self.curve is not None:
            CurveTriple(*self.curve)
        if self.n is not None and (self.n <= 0 or self.n % 2 == 0 or not is_squarefree(self.n)):
            raise ValueError(f"n = {self.n} must be a positive odd square-free integer")
        if self.start is not None and self.stop is not None and self.start > self.stop:
            raise ValueError("empty or reversed range")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")


# -- encoding -----------------------------------------------------------------------


def _enc(x):
    """Integers become decimal strings; containers are converted recursively."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return "inf" if x == INF else repr(x)
    if isinstance(x, dict):
        return {str(k): _enc(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_enc(v) for v in items]
    return str(x)


def _versions() -> dict:
    try:
        sympy_version = metadata.version("sympy")
    except metadata.PackageNotFoundError:  # pragma: no cover
        sympy_version = "unknown"
    return {"selmertwist": __version__, "sympy": sympy_version, "schema": str(SCHEMA_VERSION)}


def _rng(cfg: RunConfig) -> random.Random | None:
    return None if cfg.seed is None else random.Random(cfg.seed)


def _place_key(v) -> str:
    return "inf" if v == INF else str(v)


def _checks(checks) -> list[dict]:
    return [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in checks]


def _lam(lam) -> list[str]:
    return [str(d) for d in lam]


# -- single commands ---------------------------------------------------------------


def cmd_selmer(cfg: RunConfig) -> dict:
    c = CurveTriple(*cfg.curve)
    checks = hypothesis_checks(c, cfg.n)
    sel = pure_selmer(c, cfg.n, cfg.method, unchecked=cfg.unchecked)
    out = {
        "curve": list(c.e),
        "n": cfg.n,
        "case": c.parity_case.value,
        "method": cfg.method,
        "dimension": sel.dimension,
        "basis": [_lam(lam) for lam in sel.basis],
        "hypotheses": _checks(checks),
    }
    if cfg.method == "matrix":
        sm = selmer_matrix(c, cfg.n, unchecked=cfg.unchecked)
        out["theorem"] = sm.theorem
        out["matrix"] = sm.matrix.to_lists()
    return out


def _pairing_report(c: CurveTriple, n: int, basis, rng) -> dict:
    rep = gram_matrix(c, n, basis, rng=rng)
    ledger = {
        f"{i},{j}": {_place_key(v): b for v, b in led.items()}
        for (i, j), led in sorted(rep.ledger.items())
    }
    return {
        "basis": [_lam(lam) for lam in basis],
        "dimension": rep.dimension,
        "gram": rep.gram.to_lists(),
        "symmetric": rep.symmetric,
        "nondegenerate": rep.nondegenerate,
        "verdict": rep.verdict,
        "ledger": ledger,
    }


def cmd_pairing(cfg: RunConfig) -> dict:
    c = CurveTriple(*cfg.curve)
    sel = pure_selmer(c, cfg.n, cfg.method, unchecked=cfg.unchecked)
    out = {"curve": list(c.e), "n": cfg.n}
    out.update(_pairing_report(c, cfg.n, sel.basis, _rng(cfg)))
    return out


def _companion(cfg: RunConfig, c: CurveTriple) -> tuple[int, int, int]:
    if cfg.companion is not None:
        if not is_companion(c, *cfg.companion):
            raise ValueError(f"{cfg.companion} does not solve e1 a^2 + e2 b^2 + e3 c^2 = 0")
        return cfg.companion
    found = [t for t in find_companions(c, cfg.search_bound or 50) if tuple(t) != (1, 1, 1)]
    if not found:
        raise ValueError("no companion triple within the search bound")
    return tuple(found[0])


def cmd_compare(cfg: RunConfig) -> dict:
    c = CurveTriple(*cfg.curve)
    comp = _companion(cfg, c)
    big = c.companion_curve(*comp)
    if math.gcd(cfg.n, c.product * comp[0] * comp[1] * comp[2]) != 1:
        raise HypothesisError([Check("coprime", False, f"n = {cfg.n} shares a factor with e1 e2 e3 abc")])
    rng = _rng(cfg)
    sel = pure_selmer(c, cfg.n, cfg.method, unchecked=cfg.unchecked)
    sel_big = pure_selmer(big, cfg.n, cfg.method, unchecked=cfg.unchecked)
    left = _pairing_report(c, cfg.n, sel.basis, rng)
    right = _pairing_report(big, cfg.n, sel.basis, rng)
    same_selmer = sel.elements == sel_big.elements
    equal = same_selmer and left["gram"] == right["gram"]
    out = {
        "curve": list(c.e),
        "companion": list(comp),
        "companion_curve": list(big.e),
        "n": cfg.n,
        "selmer_equal": same_selmer,
        "gram_equal": equal,
        "curve_report": left,
        "companion_report": right,
    }
    if not equal:
        raise TheoremViolation(json.dumps(_enc(out), sort_keys=True))
    return out


def cmd_congruent(cfg: RunConfig, cache: ClassGroupCache | None = None) -> dict:
    comp = cfg.companion or (1, 1, 1)
    if cfg.variant == "odd":
        res = congruent_criterion_odd(cfg.n, comp, reading=cfg.reading, cache=cache)
        twist = cfg.n
    else:
        res = congruent_criterion_even(cfg.n, comp)
        twist = 2 * cfg.n
    out = {
        "n": cfg.n,
        "variant": cfg.variant,
        "companion": list(comp),
        "criterion": res.value,
        "h4": res.h4,
        "h8": res.h8,
        "d": res.d,
        "d_mod_16": None if res.d is None else res.d % 16,
        "candidates": res.choice.candidates,
        "ambiguous": res.choice.ambiguous,
        "twist": twist,
        "statement": res.statement if res.value else "criterion false",
        "hypotheses": [{"name": name, "ok": ok} for name, ok in res.checks],
    }
    if cfg.variant == "odd":
        out["reading"] = cfg.reading
    if res.choice.ambiguous:
        out["notice"] = (
            "the readings of the divisor condition disagree: "
            + "; ".join(f"{k}: {v}" for k, v in res.choice.candidates.items())
        )
    return out


# -- scans ------------------------------------------------------------------------------


def scan_record(curve: tuple[int, int, int], n: int, unchecked: bool = False,
                timings: bool = False) -> dict:
    t0 = time.perf_counter()
    c = CurveTriple(*curve)
    rec = {"schema": SCHEMA_VERSION, "n": n}
    try:
        checks = hypothesis_checks(c, n)
        rec["hypotheses"] = all(ch.ok for ch in checks)
        sel = pure_selmer(c, n, "matrix", unchecked=unchecked or not rec["hypotheses"])
        direct = pure_selmer(c, n, "direct")
        rep = gram_matrix(c, n, direct.basis, with_ledger=False)
        rec.update(
            dimension=sel.dimension,
            direct_dimension=direct.dimension,
            agree=sel.dimension == direct.dimension and sel.elements == direct.elements,
            gram=rep.gram.to_lists(),
            verdict=rep.verdict,
            error=None,
        )
    except (InconclusiveError, LocalPointError, ValueError) as exc:
        rec.update(dimension=None, direct_dimension=None, agree=None, gram=None,
                   verdict=None, error=f"{type(exc).__name__}: {exc}")
        rec.setdefault("hypotheses", None)
    if timings:
        rec["seconds"] = round(time.perf_counter() - t0, 6)
    return rec


def _scan_worker(args):
    return scan_record(*args)


def _scan_ns(start: int, stop: int, done: set[int]) -> list[int]:
    lo = max(start, 1)
    return [n for n in range(lo | 1, stop, 2) if is_squarefree(n) and n not in done]


def _read_checkpoint(path: str | None) -> set[int]:
    if not path or not os.path.exists(path):
        return set()
    with open(path) as fh:
        return {int(line) for line in fh if line.strip()}


def _format_scan_line(rec: dict, fmt: str) -> str:
    if fmt == "jsonl":
        return json.dumps(_enc(rec), sort_keys=True)
    buf = io.StringIO()
    row = []
    for col in SCAN_COLUMNS + (["seconds"] if "seconds" in rec else []):
        v = rec.get(col)
        row.append("" if v is None else json.dumps(v) if isinstance(v, list) else str(v))
    csv.writer(buf, lineterminator="").writerow(row)
    return buf.getvalue()


def cmd_scan(cfg: RunConfig, out, checkpoint: str | None = None, timings: bool = False) -> int:
    done = _read_checkpoint(checkpoint)
    ns = _scan_ns(cfg.start, cfg.stop, done)
    fmt = "jsonl" if cfg.format in ("json", "jsonl") else "csv"
    # an empty range writes nothing at all, not even a header
    if fmt == "csv" and ns and not done:
        out.write(",".join(SCAN_COLUMNS + (["seconds"] if timings else [])) + "\n")
    ck = open(checkpoint, "a") if checkpoint else None
    tasks = [(tuple(cfg.curve), n, cfg.unchecked, timings) for n in ns]
    try:
        if cfg.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
                results = pool.map(_scan_worker, tasks, chunksize=4)
                _emit(results, out, ck, fmt)
        else:
            _emit(map(_scan_worker, tasks), out, ck, fmt)
    finally:
        if ck:
            ck.close()
    return len(tasks)


def _emit(results, out, ck, fmt) -> None:
    # pool.map preserves input order, so records come out sorted by n
    for rec in results:
        out.write(_format_scan_line(rec, fmt) + "\n")
        out.flush()
        if ck:
            ck.write(f"{rec['n']}\n")
            ck.flush()


# -- argument handling -------------------------------------------------------------


def _triple(text: str) -> tuple[int, int, int]:
    parts = [int(x) for x in text.replace(" ", "").split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma separated integers, got {text!r}")
    return tuple(parts)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="selmertwist", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, curve=True, n=True):
        if curve:
            sp.add_argument("--curve", type=_triple, required=True, help="e1,e2,e3 with e1+e2+e3=0")
        if n:
            sp.add_argument("--n", type=int, required=True, help="odd square-free twist")
        sp.add_argument("--format", choices=["json", "text"], default="json")
        sp.add_argument("--timings", action="store_true", help="include wall-clock timings")

    s = sub.add_parser("selmer", help="pure 2-Selmer basis of a twist")
    common(s)
    s.add_argument("--method", choices=["matrix", "direct"], default="matrix")
    s.add_argument("--unchecked", action="store_true", help="use the matrix even if hypotheses fail")

    s = sub.add_parser("pairing", help="Cassels pairing Gram matrix and verdict")
    common(s)
    s.add_argument("--method", choices=["matrix", "direct"], default="matrix")
    s.add_argument("--seed", type=int, help="randomize auxiliary choices")
    s.add_argument("--unchecked", action="store_true")

    s = sub.add_parser("compare", help="compare a twist with its companion twist")
    common(s)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--companion", type=_triple, help="a,b,c with e1 a^2 + e2 b^2 + e3 c^2 = 0")
    g.add_argument("--search-bound", type=int, help="search companions up to this bound")
    s.add_argument("--method", choices=["matrix", "direct"], default="matrix")
    s.add_argument("--seed", type=int)
    s.add_argument("--unchecked", action="store_true")

    s = sub.add_parser("congruent", help="class group criteria for congruent-type twists")
    common(s, curve=False)
    s.add_argument("--variant", choices=["odd", "even"], default="odd",
                   help="odd: twist by n of (a^2, b^2, -2c^2); even: twist by 2n")
    s.add_argument("--reading", choices=["scoped", "strict"], default="scoped")
    s.add_argument("--companion", type=_triple, help="a,b,c with a^2 + b^2 = 2c^2")
    s.add_argument("--cache", help="class group cache file")

    s = sub.add_parser("scan", help="scan odd square-free n in [start, stop)")
    s.add_argument("--curve", type=_triple, required=True)
    s.add_argument("--start", type=int, default=1)
    s.add_argument("--stop", type=int, required=True)
    s.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    s.add_argument("--output", help="write records here instead of stdout")
    s.add_argument("--checkpoint", help="file of completed n, one per line")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--unchecked", action="store_true")
    s.add_argument("--timings", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in ("curve", "n", "start", "stop", "companion", "search_bound", "method",
                 "variant", "reading", "format", "seed", "jobs", "unchecked"):
        if hasattr(args, name) and getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    cfg.validate()
    return cfg


def _render_text(result: dict, indent: int = 0) -> str:
    lines = []
    pad = " " * indent
    width = max((len(k) for k in result), default=0)
    for k in sorted(result):
        v = result[k]
        if isinstance(v, dict) and v:
            lines.append(f"{pad}{k}:")
            lines.append(_render_text(v, indent + 2))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{k}:")
            lines += [f"{pad}  " + " ".join(f"{kk}={vv}" for kk, vv in sorted(item.items())) for item in v]
        else:
            lines.append(f"{pad}{k.ljust(width)}  {json.dumps(v)}")
    return "\n".join(lines)


def _emit_report(cfg: RunConfig, status: str, result: dict, out, timings: float | None) -> None:
    doc = {
        "config": asdict(cfg),
        "versions": _versions(),
        "status": status,
        "result": result,
    }
    if timings is not None:
        doc["seconds"] = round(timings, 6)
    if cfg.format == "text":
        out.write(_render_text(_enc(doc)) + "\n")
    else:
        out.write(json.dumps(_enc(doc), sort_keys=True, indent=2) + "\n")


def _glue_negative(argv: list[str]) -> list[str]:
    # "--curve -1,4,-3" would otherwise read the triple as an option
    out = []
    it = iter(argv)
    for a in it:
        if a in ("--curve", "--companion"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and "," in nxt:
                out.append(f"{a}={nxt}")
                continue
            out.append(a)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(a)
    return out


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(_glue_negative(sys.argv[1:] if argv is None else list(argv)))
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER

    if cfg.command == "scan":
        try:
            if args.output:
                with open(args.output, "a") as fh:
                    cmd_scan(cfg, fh, args.checkpoint, args.timings)
            else:
                cmd_scan(cfg, out, args.checkpoint, args.timings)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_OTHER
        return EXIT_OK

    t0 = time.perf_counter()
    handlers = {"selmer": cmd_selmer, "pairing": cmd_pairing, "compare": cmd_compare}
    code, status, result = EXIT_OK, "ok", {}
    try:
        if cfg.command == "congruent":
            cache = ClassGroupCache(args.cache) if args.cache else None
            result = cmd_congruent(cfg, cache)
        else:
            result = handlers[cfg.command](cfg)
    except HypothesisError as exc:
        code, status = EXIT_HYPOTHESIS, "hypothesis"
        result = {"failures": _checks(exc.failures)}
    except CriterionHypothesisError as exc:
        code, status, result = EXIT_HYPOTHESIS, "hypothesis", {"failures": str(exc)}
    except (InconclusiveError, LocalPointError) as exc:
        code, status, result = EXIT_INCONCLUSIVE, "inconclusive", {"message": str(exc)}
    except TheoremViolation as exc:
        code, status = EXIT_VIOLATION, "theorem-violation"
        result = json.loads(str(exc))
    except Exception as exc:  # noqa: BLE001
        code, status, result = EXIT_OTHER, "error", {"message": f"{type(exc).__name__}: {exc}"}
    _emit_report(cfg, status, result, out, time.perf_counter() - t0 if args.timings else None)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

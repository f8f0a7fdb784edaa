"""Command-line front end: finite-n errors next to their large-n predictions.

Examples::

    entcon info --state 0.8,0.2
    entcon conc-error --state 0.8,0.2 --n 10^2..10^4:log --b -0.8,0,0.8
    entcon dil-error --state @state.json --n 10000 --b 0 --b-prime 0
    entcon mcre --state random:3:7 --n 10,100 --loss 0,5 --verify
    entcon recovery-rate --state 0.8,0.2 --n 10000 --epsilon 0.1

Exit codes: 0 success, 1 usage error, 2 computational guard exceeded,
3 partial row failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .asymptotics import (
    RateParams,
    concentration_limit,
    dilution_limit,
    mcre_limit_predictor,
    recovery_rate,
)
from .fidelity import concentration_error, dilution_error, mcre, min_loss_for_epsilon
from .oracle import MAX_MCRE_DIM, brute_mcre
from .schmidt import AsymptoticProfile, SchmidtVector, StateError, validate_schmidt
from .spectrum import ClassBudgetError, build_spectrum

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_PARTIAL = 0, 1, 2, 3
INFO_EPSILONS = (0.01, 0.05, 0.1, 0.5)


class UsageError(Exception):
    pass


class RowError(Exception):
    pass


# -- state resolution ----------------------------------------------------------


def random_schmidt(rank: int, seed: int) -> SchmidtVector:
    """Uniform draw from the probability simplex, sorted non-increasing.

    Algorithm (pinned for reproducibility): ``numpy.random.Generator`` over
    ``PCG64(seed)`` draws ``rank - 1`` uniforms on [0, 1); with 0 and 1
    appended they are sorted and their consecutive gaps are the
    probabilities.
    """
    if rank < 1:
        raise StateError(f"rank must be >= 1, got {rank}")
    if not 0 <= seed < 2**64:
        raise StateError("seed must be an unsigned 64-bit integer")
    rng = np.random.Generator(np.random.PCG64(seed))
    cuts = np.sort(np.concatenate(([0.0], rng.random(rank - 1), [1.0])))
    gaps = np.diff(cuts)
    gaps = gaps / math.fsum(gaps.tolist())
    return validate_schmidt(gaps.tolist())


def resolve_state(source: str) -> SchmidtVector:
    """Resolve ``0.8,0.2``, ``@file.json`` or ``random:M:seed`` to a Schmidt vector.

    A JSON file holds either ``{"probs": [...]}`` or
    ``{"random": {"rank": M, "seed": s}}``.
    """
    source = source.strip()
    if source.startswith("@"):
        try:
            doc = json.loads(Path(source[1:]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise StateError(f"cannot read state file {source[1:]!r}: {exc}") from exc
        if "probs" in doc:
            return validate_schmidt(doc["probs"])
        if "random" in doc:
            spec = doc["random"]
            return random_schmidt(int(spec["rank"]), int(spec["seed"]))
        raise StateError("state file needs a 'probs' or 'random' entry")
    if source.startswith("random:"):
        parts = source.split(":")
        if len(parts) != 3:
            raise StateError("random state syntax is random:RANK:SEED")
        return random_schmidt(int(parts[1]), int(parts[2]))
    try:
        values = [float(x) for x in source.split(",") if x.strip()]
    except ValueError as exc:
        raise StateError(f"cannot parse state {source!r}") from exc
    return validate_schmidt(values)


# -- grid parsing --------------------------------------------------------------


def _number(token: str) -> float:
    token = token.strip()
    if "^" in token:
        base, exp = token.split("^", 1)
        return float(base) ** float(exp)
    return float(token)


def parse_grid(text: str, *, integer: bool = False) -> list:
    """Parse ``"1,2,3"``, ``"lo..hi"``, ``"lo..hi:step"`` or ``"lo..hi:log"``.

    ``:log`` steps by factors of ten; a bare integer range steps by one.
    """
    values: list[float] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ".." in chunk:
            rng, _, step = chunk.partition(":")
            lo_s, hi_s = rng.split("..", 1)
            lo, hi = _number(lo_s), _number(hi_s)
            if step == "log":
                if lo <= 0 or hi < lo:
                    raise UsageError(f"bad log range {chunk!r}")
                k = 0
                while lo * 10**k <= hi * (1 + 1e-12):
                    values.append(lo * 10**k)
                    k += 1
            else:
                dx = _number(step) if step else 1.0
                if dx <= 0 or hi < lo:
                    raise UsageError(f"bad range {chunk!r}")
                count = int(math.floor((hi - lo) / dx + 1e-9))
                values.extend(lo + i * dx for i in range(count + 1))
        else:
            values.append(_number(chunk))
    if not values:
        raise UsageError("empty grid")
    if integer:
        out = []
        for v in values:
            if v != round(v):
                raise UsageError(f"expected an integer, got {v}")
            out.append(int(round(v)))
        return out
    return [round(v, 12) + 0.0 for v in values]


# -- row computations ----------------------------------------------------------


@lru_cache(maxsize=64)
def _spectrum(probs: tuple, n: int):
    return build_spectrum(SchmidtVector(probs), n)


def _floor_rate(first: float, second: float, n: int) -> int:
    # small guard so that exact integers computed in floating point do not drop by one
    x = first * n + second * math.sqrt(n)
    return math.floor(x + 1e-12 * max(1.0, abs(x)))


def row_conc(p: SchmidtVector, prof: AsymptoticProfile, n: int, b: float) -> dict:
    ell = _floor_rate(prof.entropy_H, b, n)
    if ell < 0:
        raise RowError(f"ell = floor(H n + b sqrt n) = {ell} is negative")
    err = concentration_error(_spectrum(p.probs, n), ell)
    pred = concentration_limit(RateParams(a=prof.entropy_H, b=b), prof)
    return {"n": n, "b": b, "ell": ell, "error": err, "predictor": pred, "gap": abs(err - pred)}


def row_dil(p: SchmidtVector, prof: AsymptoticProfile, n: int, b: float, b_prime: float) -> dict:
    ell = _floor_rate(prof.entropy_H, b, n)
    M = _floor_rate(1.0, b_prime, n)
    if ell < 0:
        raise RowError(f"ell = floor(H n + b sqrt n) = {ell} is negative")
    if M < 1:
        raise RowError(f"target copies M = floor(n + b' sqrt n) = {M} < 1")
    err = dilution_error(_spectrum(p.probs, M), ell)
    pred = dilution_limit(RateParams(a=prof.entropy_H, b=b, b_prime=b_prime), prof)
    return {
        "n": n,
        "b": b,
        "b_prime": b_prime,
        "ell": ell,
        "M": M,
        "error": err,
        "predictor": pred,
        "gap": abs(err - pred),
    }


def _mcre_predictor(prof: AsymptoticProfile, beta: float) -> float:
    if prof.varentropy_V == 0.0:
        # maximally entangled: the round trip is lossless at every n
        return 0.0
    return mcre_limit_predictor(beta, prof)


def row_mcre(p: SchmidtVector, prof: AsymptoticProfile, n: int, loss: int, verify: bool) -> dict:
    if loss < 0 or loss >= n:
        raise RowError(f"loss must satisfy 0 <= loss < n, got loss={loss}, n={n}")
    M = n - loss
    res = mcre(p, n, M, source=_spectrum(p.probs, n), target=_spectrum(p.probs, M))
    row = {
        "n": n,
        "loss": loss,
        "M": M,
        "ell_star": res.ell_star,
        "e_C": res.e_C,
        "e_R": res.e_R,
        "delta": res.delta,
        "predictor": _mcre_predictor(prof, -loss / math.sqrt(n)),
    }
    if verify:
        if p.rank**n <= MAX_MCRE_DIM:
            ref = brute_mcre(p, n, M)
            if ref.ell_star != res.ell_star or abs(ref.delta - res.delta) > 1e-12:
                raise RowError(
                    f"oracle disagreement at n={n}, M={M}: engine (ell*={res.ell_star},"
                    f" delta={res.delta!r}) vs oracle (ell*={ref.ell_star}, delta={ref.delta!r})"
                )
            row["verified"] = "yes"
        else:
            row["verified"] = "skipped"
    return row


def row_recovery(p: SchmidtVector, prof: AsymptoticProfile, n: int, epsilon: float) -> dict:
    found = min_loss_for_epsilon(p, n, epsilon)
    rate = recovery_rate(prof, epsilon)
    per_root = found.loss / math.sqrt(n)
    gap = abs(per_root - rate)
    return {
        "n": n,
        "epsilon": epsilon,
        "loss": found.loss,
        "M": n - found.loss,
        "delta": found.result.delta,
        "achieved": "yes" if found.achieved else "no",
        "loss_per_sqrt_n": per_root,
        "rate": rate,
        "abs_gap": gap,
        "rel_gap": gap / rate if rate > 0 else gap,
    }


# -- output --------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render(rows: list[dict], fmt: str, meta: str | None) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    if meta:
        buf.write(f"# {meta}\n")
    if rows:
        columns = list(rows[0])
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def run_rows(tasks: list[tuple[dict, Callable[[], dict]]], threads: int):
    """Evaluate row tasks, preserving input order; returns (rows, failures)."""

    def attempt(item):
        key, fn = item
        try:
            return fn(), None
        except (RowError, ClassBudgetError, ValueError, StateError) as exc:
            return None, {"row": key, "error": str(exc), "guard": isinstance(exc, ClassBudgetError)}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(attempt, tasks))
    else:
        results = [attempt(t) for t in tasks]
    rows = [r for r, f in results if r is not None]
    failures = [f for r, f in results if f is not None]
    return rows, failures


# -- commands ------------------------------------------------------------------


def cmd_info(args, p, prof):
    rows = [
        {"quantity": "rank", "epsilon": "", "value": p.rank},
        {"quantity": "H", "epsilon": "", "value": prof.entropy_H},
        {"quantity": "V", "epsilon": "", "value": prof.varentropy_V},
    ]
    failures = []
    for eps in INFO_EPSILONS:
        try:
            rows.append({"quantity": "R", "epsilon": eps, "value": recovery_rate(prof, eps)})
        except ValueError as exc:
            failures.append({"row": {"quantity": "R", "epsilon": eps}, "error": str(exc), "guard": False})
    return rows, failures


def cmd_conc_error(args, p, prof):
    ns = parse_grid(args.n, integer=True)
    bs = parse_grid(args.b)
    tasks = [
        ({"n": n, "b": b}, (lambda n=n, b=b: row_conc(p, prof, n, b))) for n in ns for b in bs
    ]
    return run_rows(tasks, args.threads)


def cmd_dil_error(args, p, prof):
    ns = parse_grid(args.n, integer=True)
    bs = parse_grid(args.b)
    bp = args.b_prime
    tasks = [
        ({"n": n, "b": b}, (lambda n=n, b=b: row_dil(p, prof, n, b, bp))) for n in ns for b in bs
    ]
    return run_rows(tasks, args.threads)


def cmd_mcre(args, p, prof):
    ns = parse_grid(args.n, integer=True)
    losses = parse_grid(args.loss, integer=True)
    for n in ns:
        for loss in losses:
            if loss >= n:
                raise UsageError(f"loss {loss} >= n {n}: at least one copy must be recovered")
    tasks = [
        ({"n": n, "loss": loss}, (lambda n=n, loss=loss: row_mcre(p, prof, n, loss, args.verify)))
        for n in ns
        for loss in losses
    ]
    return run_rows(tasks, args.threads)


def cmd_recovery_rate(args, p, prof):
    eps = args.epsilon
    if eps <= 0.0:
        raise UsageError("epsilon must be > 0: the recovery rate diverges as epsilon -> 0")
    if eps >= 1.0:
        raise UsageError("epsilon must be < 1")
    if prof.entropy_H <= 0.0:
        raise UsageError("recovery rate undefined for a product state (H = 0)")
    ns = parse_grid(args.n, integer=True)
    tasks = [({"n": n, "epsilon": eps}, (lambda n=n: row_recovery(p, prof, n, eps))) for n in ns]
    return run_rows(tasks, args.threads)


COMMANDS = {
    "info": cmd_info,
    "conc-error": cmd_conc_error,
    "dil-error": cmd_dil_error,
    "mcre": cmd_mcre,
    "recovery-rate": cmd_recovery_rate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", required=True, help='"0.8,0.2" | @file.json | random:M:seed')
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", type=Path, default=None, help="write to file instead of stdout")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--no-meta", action="store_true", help="omit the CSV header comment")

    parser = argparse.ArgumentParser(prog="entcon", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"entcon {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("info", parents=[common], help="H, V, rank and recovery rates")
    for name in ("conc-error", "dil-error"):
        sp = sub.add_parser(name, parents=[common], help=f"finite-n {name.split('-')[0]} errors")
        sp.add_argument("--n", required=True, help='copies grid, e.g. "100,1000" or "10^2..10^4:log"')
        sp.add_argument("--b", required=True, help="second-order rate grid")
        if name == "dil-error":
            sp.add_argument("--b-prime", type=float, default=0.0)
    sp = sub.add_parser("mcre", parents=[common], help="minimum concentration-recovery error")
    sp.add_argument("--n", required=True)
    sp.add_argument("--loss", default="0", help="copy-loss grid, M = n - loss")
    sp.add_argument("--verify", action="store_true", help="cross-check rows against brute force")
    sp = sub.add_parser("recovery-rate", parents=[common], help="empirical vs asymptotic loss")
    sp.add_argument("--n", required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    return parser


_VALUE_FLAGS = ("--b", "--b-prime", "--n", "--loss", "--epsilon")


def _attach_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--b -0.8,0`` as ``--b=-0.8,0`` so argparse keeps the value."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in _VALUE_FLAGS and nxt and nxt.startswith("-") and nxt[1:2] in set("0123456789."):
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _attach_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.threads < 1:
        print("entcon: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        p = resolve_state(args.state)
        prof = AsymptoticProfile.of(p)
        rows, failures = COMMANDS[args.command](args, p, prof)
    except (UsageError, StateError) as exc:
        print(f"entcon: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ClassBudgetError as exc:
        print(f"entcon: {exc}", file=sys.stderr)
        return EXIT_GUARD

    meta = None
    if not args.no_meta:
        stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        meta = f"entcon {__version__} {args.command} state={args.state} generated {stamp}"
    text = render(rows, args.format, meta)
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    if failures:
        print(json.dumps({"failures": failures}, indent=2, default=str), file=sys.stderr)
        return EXIT_GUARD if any(f["guard"] for f in failures) else EXIT_PARTIAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

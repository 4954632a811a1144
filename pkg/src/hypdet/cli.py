"""Command-line entry point: ``hypdet <subcommand> ...``.

stdout carries data only; diagnostics go to stderr as one JSON line.  Exit
codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import __version__
from .errors import DomainError

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _emit_json(obj) -> None:
    print(json.dumps({"schema_version": SCHEMA_VERSION, **obj}, sort_keys=True))


def _emit_csv(header, rows) -> None:
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])


def _emit_table(args, header, rows) -> None:
    if args.format == "json":
        _emit_json({"rows": [dict(zip(header, r)) for r in rows]})
    else:
        _emit_csv(header, rows)


def _load_spectrum(path):
    from .spectrum import load_spectrum

    try:
        return load_spectrum(path)
    except OSError as exc:
        raise DomainError(f"cannot read spectrum {path}: {exc.strerror}") from None


def _load_hom(path):
    from .cover import HomSample

    try:
        return HomSample.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
    except OSError as exc:
        raise DomainError(f"cannot read homomorphism {path}: {exc.strerror}") from None


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------


def cmd_constants(args) -> None:
    from .constants import PrecisionPolicy, universal_constants

    if not 1 <= args.digits <= 15:
        raise DomainError("--digits must lie in 1..15 (decimal places)")
    c = universal_constants(PrecisionPolicy(1e-12))
    vals = [("E", c.E), ("zeta_prime_minus1", c.zeta_prime_minus1), ("log_A", c.log_A), ("euler_gamma", c.euler_gamma)]
    fmt = f"{{:.{args.digits}f}}"
    if args.format == "json":
        _emit_json({k: fmt.format(v) for k, v in vals})
    else:
        for k, v in vals:
            print(f"{k}={fmt.format(v)}")


def cmd_enumerate(args) -> None:
    from .fuchsian import catalog, enumerate_primitives
    from .spectrum import dumps_spectrum, save_spectrum

    s = enumerate_primitives(catalog(args.base), args.L, node_budget=args.node_budget)
    s = type(s)(s.classes, s.cutoff_L, s.volume, catalog(args.base).genus, args.base, s.meta)
    if args.out:
        save_spectrum(s, args.out)
        _emit_json({"classes": len(s), "oriented": s.oriented_count(), "L": s.cutoff_L, "out": str(args.out)})
    else:
        sys.stdout.write(dumps_spectrum(s))


def cmd_spectrum(args) -> None:
    from .spectrum import counting_rows

    s = _load_spectrum(args.spectrum)
    Ls = [float(x) for x in args.L.split(",")] if args.L else [s.cutoff_L]
    _emit_table(args, ["L", "N", "N0", "systole"], counting_rows(s, Ls))


def _genus(s, volume=None):
    if s.genus is not None:
        return s.genus
    return int(round((volume or s.volume) / (4 * math.pi))) + 1


def cmd_heat(args) -> None:
    from .heat import geodesic_tail_bound, geodesic_term, identity_term

    s = _load_spectrum(args.spectrum)
    L = s.cutoff_L if args.L is None else args.L
    rows = []
    for t in args.t:
        I = identity_term(t)
        S = geodesic_term(s, t, L)
        tail = geodesic_tail_bound(_genus(s), s, t, L)
        rows.append((t, I, S, tail, s.volume * I / (4 * math.pi) + S))
    _emit_table(args, ["t", "identity_term", "geodesic_term", "tail_bound", "trace_estimate"], rows)


def cmd_det(args) -> None:
    from .determinant import DetParams, log_det

    s = _load_spectrum(args.spectrum)
    res = log_det(s, args.volume, DetParams(L=args.L, R=args.R, eta=args.eta), genus=_genus(s, args.volume))
    _emit_json(res.to_json())


def cmd_cover(args) -> None:
    from . import cover
    from .fuchsian import catalog
    from .group import Word
    from .spectrum import dumps_spectrum, save_spectrum

    if args.action == "sample":
        h = cover.sample_hom(catalog(args.base), args.n, args.seed)
        _emit_json(h.to_json())
    elif args.action == "lift":
        s = _load_spectrum(args.spectrum)
        c = cover.lift_spectrum(s, _load_hom(args.hom), args.L or s.cutoff_L)
        if args.out:
            save_spectrum(c.spectrum, args.out)
            _emit_json({"classes": len(c.spectrum), "connected": c.connected, "out": str(args.out)})
        else:
            sys.stdout.write(dumps_spectrum(c.spectrum))
    elif args.action == "vz":
        s = _load_spectrum(args.spectrum)
        lhs, rhs = cover.vz_check(s, _load_hom(args.hom), args.L or s.cutoff_L)
        _emit_json({"lhs": lhs, "rhs": rhs, "difference": lhs - rhs})
    else:
        try:
            word = Word.parse(args.word)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        mean, err = cover.fix_statistics(catalog(args.base), word, args.q, args.n, args.samples, args.seed)
        _emit_json({"word": str(word), "q": args.q, "n": args.n, "mean": mean, "stderr": err, "divisor_target": cover.divisor_count(args.q)})


def cmd_bm(args) -> None:
    from . import bm

    if args.action == "sample":
        g = bm.sample_graph(args.n, args.seed)
        c = bm.leftright_cycles(g)
        _emit_json({
            "n": args.n, "seed": args.seed, "pairing": list(g.pairing), "rotation": list(g.rotation),
            "states": c.total_states(), "mixed_cycles": len(c.mixed), "pure_cycles": len(c.pure),
        })
    elif args.action == "census":
        g = bm.sample_graph(args.n, args.seed)
        counts = bm.census(g, args.L)
        rows = [(w, bm.word_trace(w), bm.word_length(w), z) for w, z in counts.items()]
        _emit_table(args, ["word", "trace", "length", "count"], rows)
    else:
        stats = bm.poisson_stats(args.n, args.L, args.samples, args.seed)
        rows = [(s.word, s.trace, s.length, s.mean, s.variance) for s in stats]
        _emit_table(args, ["word", "trace", "length", "mean", "variance"], rows)


def cmd_experiment(args) -> None:
    from .experiment import ExperimentConfig, run_experiment, run_hypothesis_report

    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DomainError(f"cannot read config {args.config}: {exc.strerror}") from None
    config = ExperimentConfig.from_json(raw)
    if args.action == "run":
        rows = run_experiment(config, args.out, workers=max(args.threads, 1))
        _emit_table(args, list(rows[0]) if rows else [], [list(r.values()) for r in rows])
    else:
        rows = run_hypothesis_report(config)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "hypotheses.json").write_text(json.dumps(rows, sort_keys=True) + "\n", encoding="utf-8")
        _emit_json({"rows": rows})


# ----------------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=0, help="experiment worker processes; 0 or 1 runs serially")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = _Parser(prog="hypdet", description="Determinants of Laplacians on hyperbolic surfaces.")
    p.add_argument("--version", action="version", version=f"hypdet {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("constants", parents=[common], help="universal constants")
    c.add_argument("--digits", type=int, default=12, help="decimal places")
    c.set_defaults(func=cmd_constants)

    c = sub.add_parser("enumerate", parents=[common], help="enumerate a catalog length spectrum")
    c.add_argument("--base", default="bolza")
    c.add_argument("--L", type=float, required=True)
    c.add_argument("--node-budget", type=int, default=None)
    c.add_argument("--out")
    c.set_defaults(func=cmd_enumerate)

    c = sub.add_parser("spectrum", parents=[common], help="counting functions of a spectrum file")
    c.add_argument("--spectrum", required=True)
    c.add_argument("--L", help="comma-separated cutoffs")
    c.set_defaults(func=cmd_spectrum)

    c = sub.add_parser("heat", parents=[common], help="heat trace ingredients")
    c.add_argument("--spectrum", required=True)
    c.add_argument("--t", type=float, nargs="+", required=True)
    c.add_argument("--L", type=float)
    c.set_defaults(func=cmd_heat)

    c = sub.add_parser("det", parents=[common], help="log det with certified error")
    c.add_argument("--spectrum", required=True)
    c.add_argument("--volume", type=float, required=True)
    c.add_argument("--eta", type=float, required=True)
    c.add_argument("--L", type=float)
    c.add_argument("--R", type=float)
    c.set_defaults(func=cmd_det)

    c = sub.add_parser("cover", parents=[common], help="random covers")
    c.add_argument("action", choices=("sample", "lift", "vz", "fix-stats"))
    c.add_argument("--base", default="bolza")
    c.add_argument("--n", type=int, default=3)
    c.add_argument("--spectrum")
    c.add_argument("--hom")
    c.add_argument("--L", type=float)
    c.add_argument("--out")
    c.add_argument("--word", default="a1")
    c.add_argument("--q", type=int, default=1)
    c.add_argument("--samples", type=int, default=1000)
    c.set_defaults(func=cmd_cover)

    c = sub.add_parser("bm", parents=[common], help="random oriented cubic graphs")
    c.add_argument("action", choices=("sample", "census", "stats"))
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--L", type=float, default=2 * math.acosh(3.5))
    c.add_argument("--samples", type=int, default=100)
    c.set_defaults(func=cmd_bm)

    c = sub.add_parser("experiment", parents=[common], help="ensemble experiments")
    c.add_argument("action", choices=("run", "hypotheses"))
    c.add_argument("--config", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_experiment)
    return p


_REQUIRED = {
    ("cover", "lift"): ("spectrum", "hom"),
    ("cover", "vz"): ("spectrum", "hom"),
    ("experiment", "run"): ("out",),
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        for name in _REQUIRED.get((args.command, getattr(args, "action", None)), ()):
            if getattr(args, name) is None:
                raise UsageError(f"{args.command} {args.action} needs --{name}")
        if args.threads < 0:
            raise UsageError("--threads must be >= 0")
        args.func(args)
    except UsageError as exc:
        print(json.dumps({"error": "usage", "message": str(exc)}), file=sys.stderr)
        return 2
    except DomainError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Every command reads an optional JSON config (``--config``) and applies flag
overrides on top of it; flags win.  With ``--out DIR`` the results go to
files in DIR, otherwise a summary is printed.  Exit status: 0 success or
pass, 1 verification failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import BlaschkeError, ExceptionalSetError
from .exceptional import (
    build_circular_E,
    build_radial_arcs,
    free_angle,
    measure_constant,
    radial_tail_measure,
    weighted_measure,
    write_arcs,
    write_intervals,
)
from .product import eval_B, eval_logderiv, eval_logderiv_split
from .verify import (
    DEFAULT_EPSILON,
    DEFAULT_FILL,
    GrowthReport,
    build_sequence,
    ladder,
    sweep,
    sweep_table,
    verify_circular,
    verify_radial,
    verify_remark1,
)
from .weights import check_admissible, weight_from_record
from .zeros import blaschke_sum, counting_decay_profile, export

COMMANDS = ("gen", "check", "eval", "logderiv", "exset-circular", "exset-radial",
            "verify-circular", "verify-radial", "verify-remark1", "sweep")


class UsageError(Exception):
    """Invalid configuration; the message names the offending field."""


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run")
    g.add_argument("--config", type=Path, help="JSON config file; flags override its fields")
    g.add_argument("--out", type=Path, help="output directory (default: print a summary)")
    g.add_argument("--workers", type=int, default=None, help="threads for sample evaluation (default 1)")
    g.add_argument("--seed", type=int, help="seed for the 'random' angle rule")
    s = common.add_argument_group("sequence")
    s.add_argument("--family", choices=["geometric", "power_law", "file"])
    s.add_argument("--c", type=float, help="geometric ratio, 1 - r_n = c^n")
    s.add_argument("--p", type=float, help="power-law exponent, 1 - r_n = n^-p")
    s.add_argument("--count", type=int, help="number of zeros")
    s.add_argument("--angles", help="angle rule: a number, constant, equidistributed, golden or random")
    s.add_argument("--zeros", type=Path, help="zero file (implies --family file)")
    w = common.add_argument_group("weight")
    w.add_argument("--alpha", type=float)
    w.add_argument("--log-exponents", type=float, nargs="*", dest="log_exponents")
    w.add_argument("--almost-constant", type=float, dest="almost_constant")
    v = common.add_argument_group("estimates")
    v.add_argument("--beta", type=float)
    v.add_argument("--aperture", type=float, help="Stolz aperture C > 1 of the radial regions")
    v.add_argument("--epsilon", type=float, help="slack added to the predicted exponent")
    v.add_argument("--kmin", type=int, help="first ladder rung, r = 1 - 2^-kmin")
    v.add_argument("--kmax", type=int, help="last ladder rung")
    v.add_argument("--n-angles", type=int, dest="n_angles", help="equispaced angles added to the zero angles")
    v.add_argument("--theta", type=float, help="ray for verify-radial (default: a free angle)")
    v.add_argument("--N", type=int, dest="N", help="first arc index of the radial tail")
    v.add_argument("--z", nargs="*", help="evaluation points, e.g. 0.3+0.4j")

    parser = argparse.ArgumentParser(prog="blaschke", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


# -- configuration -------------------------------------------------------

_SEQ_FLAGS = ("family", "c", "p", "count", "angles", "seed")
_WEIGHT_FLAGS = ("alpha", "log_exponents", "almost_constant")
_TOP_FLAGS = ("beta", "aperture", "epsilon", "n_angles", "theta", "N", "z", "workers")


def _number_or_name(x: str):
    try:
        return float(x)
    except ValueError:
        return x


def resolve_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config is not None:
        try:
            cfg = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"config: cannot read {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config: top level must be a JSON object")
    seq = dict(cfg.get("sequence", {}))
    for k in _SEQ_FLAGS:
        val = getattr(args, k)
        if val is not None:
            seq[k] = _number_or_name(val) if k == "angles" else val
    if args.zeros is not None:
        seq.update(family="file", path=str(args.zeros))
    weight = dict(cfg.get("weight", {}))
    for k in _WEIGHT_FLAGS:
        if getattr(args, k) is not None:
            weight[k] = getattr(args, k)
    lad = dict(cfg.get("ladder", {}))
    for k in ("kmin", "kmax"):
        if getattr(args, k) is not None:
            lad[k] = getattr(args, k)
    cfg.update(sequence=seq, weight=weight, ladder=lad)
    for k in _TOP_FLAGS:
        if getattr(args, k) is not None:
            cfg[k] = getattr(args, k)
    return cfg


def _field(cfg: dict, key: str, default, cast=float):
    val = cfg.get(key, default)
    try:
        return cast(val)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{key}: expected {cast.__name__}, got {val!r}") from exc


def _beta(cfg: dict) -> float:
    beta = _field(cfg, "beta", 1.0)
    if not beta >= 1.0:
        raise UsageError(f"beta: must satisfy beta >= 1, got {beta!r}")
    return beta


def _aperture(cfg: dict) -> float:
    c = _field(cfg, "aperture", 2.0)
    if not c > 1.0:
        raise UsageError(f"aperture: must satisfy C > 1, got {c!r}")
    return c


def _workers(cfg: dict) -> int:
    n = _field(cfg, "workers", 1, int)
    if n < 1:
        raise UsageError(f"workers: must be >= 1, got {n}")
    return n


def _weight(cfg: dict):
    rec = dict(cfg.get("weight", {}))
    rec.setdefault("alpha", 0.5)
    try:
        return weight_from_record(rec)
    except BlaschkeError as exc:
        raise UsageError(f"weight: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"weight: invalid record {rec!r}: {exc}") from exc


def _sequence(cfg: dict):
    spec = dict(cfg.get("sequence", {}))
    fam = spec.setdefault("family", "geometric")
    required = {"geometric": ("c", "count"), "power_law": ("p", "count"), "file": ("path",)}.get(fam)
    if required is None:
        raise UsageError(f"sequence.family: unknown family {fam!r}")
    for k in required:
        if k not in spec:
            raise UsageError(f"sequence.{k}: required for family {fam!r}")
    try:
        return build_sequence(spec)
    except BlaschkeError as exc:
        raise UsageError(f"sequence: {exc}") from exc
    except OSError as exc:
        raise UsageError(f"sequence.path: {exc}") from exc


def _radii(cfg: dict) -> np.ndarray:
    lad = cfg.get("ladder", {})
    kmin, kmax = int(lad.get("kmin", 4)), int(lad.get("kmax", 16))
    if not 1 <= kmin <= kmax:
        raise UsageError(f"ladder: need 1 <= kmin <= kmax, got kmin={kmin}, kmax={kmax}")
    if kmax - kmin + 1 < 4:
        raise UsageError("ladder: at least 4 rungs are needed for a slope fit")
    return ladder(kmin, kmax)


def _points(cfg: dict) -> list[complex]:
    raw = cfg.get("z")
    if not raw:
        raise UsageError("z: at least one evaluation point is required")
    try:
        return [complex(str(x).replace(" ", "")) for x in raw]
    except ValueError as exc:
        raise UsageError(f"z: {exc}") from exc


# -- output --------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _emit(out: Path | None, files: dict[str, str], summary: dict) -> None:
    if out is None:
        sys.stdout.write(_dump(summary))
        return
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
    (out / "summary.json").write_text(_dump(summary))


def _report_run(out, rep: GrowthReport, cfg: dict) -> int:
    summary = rep.summary()
    summary["config"] = cfg
    _emit(out, {"report.tsv": rep.table()}, summary)
    return 0 if rep.verdict else 1


def _tsv(header, rows) -> str:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


# -- commands ------------------------------------------------------------


def cmd_gen(cfg, out):
    seq = _sequence(cfg)
    if out is None:
        sys.stdout.write("".join(f"{r:.17g} {t:.17g}\n" for r, t in zip(seq.radii, seq.angles)))
        return 0
    out.mkdir(parents=True, exist_ok=True)
    export(seq, out / "zeros.txt")
    return 0


def cmd_check(cfg, out):
    h = _weight(cfg)
    adm = check_admissible(h)
    summary = {"weight": h.to_record(), "admissible": adm.admissible, "increasing": adm.increasing,
               "ratio_decreasing": adm.ratio_decreasing, "vanishes_at_zero": adm.vanishes_at_zero,
               "worst_increase": adm.worst_increase, "worst_ratio": adm.worst_ratio}
    ok = adm.admissible
    if cfg.get("sequence"):
        seq = _sequence(cfg)
        rep = blaschke_sum(seq, h)
        prof = counting_decay_profile(seq, h)
        summary.update(blaschke_sum=rep.partial_sum, tail_bound=rep.tail_bound, series=rep.verdict,
                       counting=prof.verdict)
        ok = ok and rep.verdict != "divergent"
    _emit(out, {}, summary)
    return 0 if ok else 1


def cmd_eval(cfg, out):
    seq = _sequence(cfg)
    rows = []
    for z in _points(cfg):
        ev = eval_B(seq, z)
        rows.append([z.real, z.imag, ev.value.real, ev.value.imag, abs(ev.value), ev.tail_bound, ev.terms_used])
    _emit(out, {"report.tsv": _tsv(["re_z", "im_z", "re_B", "im_B", "abs_B", "tail_bound", "terms"], rows)},
          {"points": len(rows), "max_tail_bound": max(r[5] for r in rows)})
    return 0


def cmd_logderiv(cfg, out):
    seq = _sequence(cfg)
    h = _weight(cfg)
    beta = _beta(cfg)
    rows = []
    for z in _points(cfg):
        ev = eval_logderiv(seq, z)
        sp = eval_logderiv_split(seq, z, (1.0 - abs(z)) / 2.0, h, beta)
        rows.append([z.real, z.imag, ev.value.real, ev.value.imag, abs(ev.value), ev.tail_bound,
                     abs(sp.far_sum), sp.far_bound, abs(sp.near_sum), sp.near_bound, sp.near_count,
                     str(sp.near_certified).lower()])
    header = ["re_z", "im_z", "re_L", "im_L", "abs_L", "tail_bound", "far", "far_bound", "near", "near_bound",
              "near_count", "near_certified"]
    _emit(out, {"report.tsv": _tsv(header, rows)}, {"points": len(rows)})
    return 0


def cmd_exset_circular(cfg, out):
    seq = _sequence(cfg)
    h = _weight(cfg)
    beta = _beta(cfg)
    E = build_circular_E(seq, h, beta)
    summary = {"beta": beta, "intervals": len(E), "raw_count": E.raw_count, "dropped": E.dropped,
               "weighted_measure": weighted_measure(E, beta), "measure_constant": measure_constant(seq, h, beta)}
    if out is None:
        _emit(None, {}, summary)
    else:
        out.mkdir(parents=True, exist_ok=True)
        write_intervals(E, out / "intervals.txt")
        (out / "summary.json").write_text(_dump(summary))
    return 0


def cmd_exset_radial(cfg, out):
    seq = _sequence(cfg)
    arcs = build_radial_arcs(seq, _aperture(cfg))
    N = _field(cfg, "N", 1, int)
    tm = radial_tail_measure(arcs, N)
    summary = {"aperture": arcs.aperture, "arcs": len(arcs.centers), "N": N,
               "projection_constant": arcs.projection_constant, "tail_measure": tm.measure,
               "tail_crude_bound": tm.crude_bound}
    try:
        summary["free_angle"] = free_angle(arcs, N)
    except ExceptionalSetError as exc:
        summary["free_angle"] = str(exc)
    if out is None:
        _emit(None, {}, summary)
    else:
        out.mkdir(parents=True, exist_ok=True)
        write_arcs(arcs, out / "arcs.txt")
        (out / "summary.json").write_text(_dump(summary))
    return 0


def cmd_verify_circular(cfg, out):
    seq, h, beta, radii = _sequence(cfg), _weight(cfg), _beta(cfg), _radii(cfg)
    rep = verify_circular(seq, h, beta, radii, _field(cfg, "n_angles", DEFAULT_FILL, int),
                          _field(cfg, "epsilon", DEFAULT_EPSILON), _workers(cfg))
    return _report_run(out, rep, cfg)


def cmd_verify_radial(cfg, out):
    seq, h, radii = _sequence(cfg), _weight(cfg), _radii(cfg)
    arcs = build_radial_arcs(seq, _aperture(cfg))
    N = _field(cfg, "N", 5, int)
    theta = _field(cfg, "theta", None) if cfg.get("theta") is not None else free_angle(arcs, N)
    rep = verify_radial(seq, h, theta, N, radii, arcs, arcs.aperture, _field(cfg, "epsilon", DEFAULT_EPSILON),
                        _workers(cfg))
    return _report_run(out, rep, cfg)


def cmd_verify_remark1(cfg, out):
    seq, h, beta, radii = _sequence(cfg), _weight(cfg), _beta(cfg), _radii(cfg)
    rep = verify_remark1(seq, h, beta, radii, _field(cfg, "n_angles", DEFAULT_FILL, int),
                         _field(cfg, "epsilon", DEFAULT_EPSILON), _workers(cfg))
    return _report_run(out, rep, cfg)


def cmd_sweep(cfg, out):
    if not cfg.get("families"):
        if not cfg.get("sequence"):
            raise UsageError("families: a sweep needs a 'families' list or a sequence")
        cfg = dict(cfg, families=[cfg["sequence"]])
    if "weights" not in cfg and cfg.get("weight"):
        cfg = dict(cfg, weights=[cfg["weight"]])
    if "betas" not in cfg and "beta" in cfg:
        cfg = dict(cfg, betas=[cfg["beta"]])
    for b in cfg.get("betas", []):
        _beta({"beta": b})
    rows = sweep(cfg, _workers(cfg))
    counts = {v: sum(r["verdict"] == v for r in rows) for v in ("pass", "fail", "error", "probe")}
    _emit(out, {"sweep.csv": sweep_table(rows)}, {"rows": len(rows), **counts})
    return 0 if counts["fail"] == 0 and counts["error"] == 0 else 1


DISPATCH = {
    "gen": cmd_gen,
    "check": cmd_check,
    "eval": cmd_eval,
    "logderiv": cmd_logderiv,
    "exset-circular": cmd_exset_circular,
    "exset-radial": cmd_exset_radial,
    "verify-circular": cmd_verify_circular,
    "verify-radial": cmd_verify_radial,
    "verify-remark1": cmd_verify_remark1,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        return DISPATCH[args.command](cfg, args.out)
    except UsageError as exc:
        print(f"blaschke {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except BlaschkeError as exc:
        print(f"blaschke {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ExceptionalSetError as exc:
        print(f"blaschke {args.command}: verification failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

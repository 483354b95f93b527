"""Command-line front end.

Curve output is CSV with columns ``ebno_db,bound,value,param_json`` (or the
same rows as JSON). Exit codes: 0 success, 2 configuration error, 3 numerical
failure, 4 size-guard rejection.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._mc import THREADS_ENV
from .channels import ChannelModel
from .codebook import LinearCode, enumerate_iowef, enumerate_spectrum, load_code, load_spectrum, spectrum_to_dict
from .curves import LOWER_BOUNDS, UPPER_BOUNDS, ebno_grid, lower_curve, upper_curve
from .density import DensityPoint, pb_lower_from_entropy
from .ensemble import conv_iowef, ensemble_spectrum, load_component, load_ensemble, uniform_interleaver_combine
from .errors import BoundsError, ConfigError, NumericalError, SizeGuardError
from .oracle import exact_ml_bsc, mc_ml_awgn, mc_ml_bsc
from .union_lower import cohen_merhav_bound, decaen_bound, load_events

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_SIZE = 0, 2, 3, 4
BUILTIN = {"hamming74": LinearCode.hamming74, "ext-hamming84": LinearCode.extended_hamming84}
CSV_FIELDS = ["ebno_db", "bound", "value", "param_json"]


# --- helpers ---------------------------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars plain numbers."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, separators=(",", ":"))


def _read_code(ref: str) -> LinearCode:
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        if name not in BUILTIN:
            raise ConfigError(f"unknown builtin code {name!r}; choose from {', '.join(BUILTIN)}")
        return BUILTIN[name]()
    if not Path(ref).is_file():
        raise ConfigError(f"code file {ref} not found")
    return load_code(ref)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _grid(text: str) -> list[float]:
    parts = text.split(":")
    try:
        if len(parts) == 3:
            return ebno_grid(*(float(p) for p in parts))
    except ValueError:
        raise ConfigError(f"bad grid {text!r}") from None
    if len(parts) == 1:
        return _floats(text)
    raise ConfigError(f"grid must be start:stop:step or a list, got {text!r}")


def _channels(args, rate: float | None) -> list[ChannelModel]:
    if args.channel == "bsc":
        if args.p is None:
            raise ConfigError("BSC needs --p")
        return [ChannelModel.bsc(p) for p in _floats(args.p)]
    if args.ebno is None and args.ebno_db is None:
        raise ConfigError("BIAWGN needs --ebno start:stop:step or --ebno-db")
    grid = _grid(args.ebno) if args.ebno is not None else [float(args.ebno_db)]
    if not grid:
        raise ConfigError("empty Eb/N0 grid")
    r = args.rate if args.rate is not None else rate
    if r is None:
        raise ConfigError("code rate unknown; pass --rate")
    return [ChannelModel.biawgn(x, r) for x in grid]


def _channel_key(ch: ChannelModel):
    return ch.ebno_db if ch.kind == "biawgn" else ""


def _emit_rows(rows: list[dict], fmt: str, out, config: dict) -> None:
    """rows carry ebno_db, bound, value, params."""
    if fmt == "json":
        doc = {"config": config, "rows": rows}
        out.write(_dumps(doc) + "\n")
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in rows:
        writer.writerow([_fmt_num(r["ebno_db"]), r["bound"], _fmt_num(r["value"]), _dumps(r["params"])])
    out.write(buf.getvalue())


def _fmt_num(x) -> str:
    if x == "" or x is None:
        return ""
    return repr(float(x))


def _write_doc(doc, out) -> None:
    out.write(json.dumps(_clean(doc), indent=1, sort_keys=True) + "\n")


def _curve_rows(curve, channels, extra=None) -> list[dict]:
    rows = []
    for ch, value, raw, params in zip(channels, curve.values, curve.raw, curve.params):
        p = dict(params)
        if raw != value:
            p["raw"] = raw
        if ch.kind == "bsc":
            p["p"] = ch.p
        if extra:
            p.setdefault("meta", {}).update(extra)
        rows.append({"ebno_db": _channel_key(ch), "bound": curve.name, "value": value, "params": p})
    return rows


# --- subcommands -------------------------------------------------------------------------------


def cmd_spectrum(args, out):
    code = _read_code(args.code)
    _write_doc(spectrum_to_dict(enumerate_iowef(code) if args.iowef else enumerate_spectrum(code)), out)


def cmd_conv_iowef(args, out):
    comp = load_component(args.component)
    table = conv_iowef(comp, args.N, args.w_max, args.j_max, exact=args.exact)
    _write_doc(spectrum_to_dict(table), out)


def cmd_turbo_iowef(args, out):
    spec = load_ensemble(args.ensemble)
    if args.marginal:
        res = ensemble_spectrum(spec, args.w_max, args.d_max)
        _write_doc(spectrum_to_dict(res.bit if args.metric == "bit" else res.block), out)
        return
    t1 = conv_iowef(spec.comp1, spec.N, args.w_max, exact=args.exact)
    t2 = t1 if spec.comp2 == spec.comp1 else conv_iowef(spec.comp2, spec.N, args.w_max, exact=args.exact)
    table = uniform_interleaver_combine(t1, t2, spec.N)
    table.metadata.update(spec.assumption_flags())
    _write_doc(spectrum_to_dict(table), out)


def _load_source(args):
    """(spectrum, code or None, rate or None, metadata flags)."""
    picked = [x for x in (args.code, args.spectrum, args.ensemble) if x]
    if len(picked) != 1:
        raise ConfigError("give exactly one of --code, --spectrum, --ensemble")
    if args.code:
        code = _read_code(args.code)
        if args.metric == "bit":
            return enumerate_iowef(code).bit_spectrum(), None, code.rate, {}
        return enumerate_spectrum(code), code, code.rate, {}
    if args.spectrum:
        spec = load_spectrum(args.spectrum)
        if hasattr(spec, "bit_spectrum"):
            spec = spec.bit_spectrum() if args.metric == "bit" else spec.to_spectrum()
        elif args.metric == "bit":
            raise ConfigError("bit metric needs an IOWEF file")
        rate = spec.k / spec.n if spec.k else None
        return spec, None, rate, {}
    ens = load_ensemble(args.ensemble)
    res = ensemble_spectrum(ens, args.w_max, args.d_max)
    spec = res.bit if args.metric == "bit" else res.block
    return spec, None, ens.rate, ens.assumption_flags()


def cmd_upper(args, out):
    names = [b.strip() for b in args.bounds.split(",") if b.strip()]
    if not names:
        raise ConfigError("no bounds selected")
    for b in names:
        if b not in UPPER_BOUNDS:
            raise ConfigError(f"unknown upper bound {b!r}; choose from {', '.join(UPPER_BOUNDS)}")
    spectrum, code, rate, flags = _load_source(args)
    channels = _channels(args, rate)
    rows = []
    for b in names:
        curve = upper_curve(b, spectrum, channels, code=code, workers=args.threads, starts=args.starts, seed=args.seed)
        rows.extend(_curve_rows(curve, channels, flags))
    if args.metric == "bit":
        for r in rows:
            r["params"].setdefault("meta", {})["metric"] = "bit"
    _emit_rows(rows, args.format, out, {"bounds": names, "metric": args.metric, "channel": args.channel})


def cmd_lower(args, out):
    names = [b.strip() for b in args.bound.split(",") if b.strip()]
    for b in names:
        if b not in LOWER_BOUNDS:
            raise ConfigError(f"unknown lower bound {b!r}; choose from {', '.join(LOWER_BOUNDS)}")
    rows = []
    if args.events:
        if args.code:
            raise ConfigError("give either --events or --code")
        events = load_events(args.events)
        for b in names:
            if b == "decaen":
                val, params = decaen_bound(events), {"weights": "one"}
            else:
                val = cohen_merhav_bound(events, "optimal" if args.weights == "optimal" else None)
                params = {"weights": args.weights}
            params["union"] = events.union_probability()
            rows.append({"ebno_db": "", "bound": b, "value": val, "params": params})
        _emit_rows(rows, args.format, out, {"bounds": names, "events": str(args.events)})
        return
    if not args.code:
        raise ConfigError("lower needs --code or --events")
    if args.channel != "biawgn":
        raise ConfigError("ML lower bounds are implemented for the BIAWGN channel only")
    code = _read_code(args.code)
    channels = _channels(args, code.rate)
    for b in names:
        rows.extend(_curve_rows(lower_curve(b, code, channels, workers=args.threads), channels))
    _emit_rows(rows, args.format, out, {"bounds": names, "channel": args.channel})


def cmd_density(args, out):
    eps = _floats(args.epsilon)
    ts = _floats(args.t)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["capacity", "epsilon", "rate", "t", "delta_min", "pb"]
    records = []
    for e in eps:
        for t in ts:
            point = DensityPoint(args.capacity, e, t, args.pb)
            row = point.as_row()
            if args.h_norm is not None:
                row["pb"] = pb_lower_from_entropy(args.h_norm, point.rate, not args.unnormalized)
            records.append(row)
    if args.format == "json":
        out.write(_dumps({"rows": records}) + "\n")
        return
    writer.writerow(header)
    for r in records:
        writer.writerow([_fmt_num(r[h]) if r[h] is not None else "" for h in header])
    out.write(buf.getvalue())


def cmd_oracle(args, out):
    code = _read_code(args.code)
    if args.channel == "bsc" and args.method == "exact":
        channels = _channels(args, code.rate)
        rows = [{"ebno_db": "", "bound": "oracle-exact", "value": exact_ml_bsc(code, ch.p).estimate,
                 "params": {"p": ch.p, "tie_policy": "uniform", "std_error": 0.0}} for ch in channels]
    elif args.method == "exact":
        raise ConfigError("exact ML oracle is implemented for the BSC only")
    else:
        if args.seed is None:
            raise ConfigError("Monte-Carlo oracle needs --seed")
        channels = _channels(args, code.rate)
        rows = []
        for ch in channels:
            fn = mc_ml_awgn if ch.kind == "biawgn" else mc_ml_bsc
            res = fn(code, ch, args.samples, args.seed, metric=args.metric, workers=args.threads)
            params = {k: v for k, v in res.as_dict().items() if k != "estimate"}
            if ch.kind == "bsc":
                params["p"] = ch.p
            rows.append({"ebno_db": _channel_key(ch), "bound": "oracle-mc", "value": res.estimate, "params": params})
    _emit_rows(rows, args.format, out, {"method": args.method, "channel": args.channel})


# --- parser ------------------------------------------------------------------------------------


def _add_channel(p, default="biawgn"):
    p.add_argument("--channel", choices=["biawgn", "bsc"], default=default)
    p.add_argument("--ebno", help="Eb/N0 grid in dB, start:stop:step or a comma list")
    p.add_argument("--ebno-db", type=float, help="single Eb/N0 point in dB")
    p.add_argument("--rate", type=float, help="code rate (defaults to the code's k/n)")
    p.add_argument("--p", help="BSC crossover probability (comma list allowed)")


def _add_output(p):
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--threads", type=int, default=None, help=f"worker count (default ${THREADS_ENV} or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlbounds", description="Bounds on ML decoding error probability.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="distance spectrum or IOWEF of an explicit code")
    p.add_argument("--code", required=True, help="code file or builtin:<name>")
    p.add_argument("--iowef", action="store_true")
    _add_output(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("conv-iowef", help="IOWEF of a terminated convolutional component")
    p.add_argument("--component", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--w-max", type=int)
    p.add_argument("--j-max", type=int)
    p.add_argument("--exact", action="store_true")
    _add_output(p)
    p.set_defaults(func=cmd_conv_iowef)

    p = sub.add_parser("turbo-iowef", help="uniform-interleaver ensemble IOWEF")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--w-max", type=int)
    p.add_argument("--d-max", type=int)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--marginal", action="store_true", help="emit the distance spectrum instead of the IOWEF")
    p.add_argument("--metric", choices=["block", "bit"], default="block")
    _add_output(p)
    p.set_defaults(func=cmd_turbo_iowef)

    p = sub.add_parser("upper", help="upper bounds over a channel grid")
    p.add_argument("--bounds", required=True, help=f"comma list from {', '.join(UPPER_BOUNDS)}")
    p.add_argument("--code")
    p.add_argument("--spectrum")
    p.add_argument("--ensemble")
    p.add_argument("--w-max", type=int)
    p.add_argument("--d-max", type=int)
    p.add_argument("--metric", choices=["block", "bit"], default="block")
    p.add_argument("--starts", type=int, default=5, help="optimizer starts for gallager-type bounds")
    p.add_argument("--seed", type=int, default=0, help="optimizer seed")
    _add_channel(p)
    _add_output(p)
    p.set_defaults(func=cmd_upper)

    p = sub.add_parser("lower", help="union lower bounds")
    p.add_argument("--bound", required=True, help=f"comma list from {', '.join(LOWER_BOUNDS)}")
    p.add_argument("--code")
    p.add_argument("--events", help="finite event system file")
    p.add_argument("--weights", choices=["optimal", "one"], default="optimal",
                   help="event-system weights for cohen-merhav: 1/deg or constant")
    _add_channel(p)
    _add_output(p)
    p.set_defaults(func=cmd_lower)

    p = sub.add_parser("density", help="parity-check density table")
    p.add_argument("--capacity", type=float, required=True)
    p.add_argument("--epsilon", required=True, help="gap(s) to capacity, comma list")
    p.add_argument("--t", required=True, help="normalized density value(s), comma list")
    p.add_argument("--pb", type=float, help="bit error probability the t values refer to")
    p.add_argument("--h-norm", type=float, help="lower bound on H(X|Y)/n; fills pb with the Fano bound")
    p.add_argument("--unnormalized", action="store_true", help="Fano bound without the rate factor")
    _add_output(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("oracle", help="exact or Monte-Carlo ML decoding")
    p.add_argument("--code", required=True)
    p.add_argument("--method", choices=["exact", "mc"], default="mc")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--metric", choices=["block", "bit"], default="block")
    _add_channel(p)
    _add_output(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "out", None):
            buf = io.StringIO()
            args.func(args, buf)
            Path(args.out).write_text(buf.getvalue())
        else:
            args.func(args, sys.stdout)
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, BoundsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

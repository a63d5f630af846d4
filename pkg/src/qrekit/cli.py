"""Command-line front end.

Subcommands: ``generate``, ``cwt``, ``detect``, ``discriminate`` and
``qre-eval``.  Exit status is 0 on success, 1 when a parameter or expression
fails validation and 2 on I/O or input-format errors.
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from . import discriminators as disc
from .costs import BOTTOM, TimeSet
from .detectors import (
    MdtParams,
    PeakAnnotation,
    WpbParams,
    WpmParams,
    detect_mdt,
    detect_wpb,
    detect_wpm,
    write_annotation,
)
from .qre import QreError, lift, make_split
from .streaming import compile_streaming
from .symbolic import Field, Schema, SchemaError, anything, atom, concat, eps, union, var
from .synthetic import generate_synthetic, spike_train_spec
from .textformat import ParseError, build_qre, parse_qre_syntax, string_constants
from .wavelet import (
    ScaleGrid,
    SignalFormatError,
    WaveletSpec,
    cwt,
    read_signal,
    write_signal,
    write_spectrogram_binary,
    write_spectrogram_text,
)

__all__ = ["ConfigError", "RunConfig", "PRESETS", "validate_config", "run_pipeline", "format_value", "main"]

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2

PRESETS = {"nominal-vt": {"sbar": 80.0, "bl": 150, "pbar": 400.0}}


class ConfigError(ValueError):
    """A configuration value breaks a named invariant."""

    def __init__(self, invariant: str, message: str):
        super().__init__(message)
        self.invariant = invariant


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    detector: str | None = None
    engine: str = "fast"
    sbar: float | None = None
    pbar: float | None = None
    eps: float = 1.0
    delta: int = 2
    bl: int = 150
    decay: float = math.log(2.0) / 300.0
    pmin: float = 20.0
    init: float = 200.0
    scales: str = "1:128"
    order: int = 2
    sigma: float = 1e-3
    fmt: str = "text"
    trace: str | None = None
    # discriminators
    kind: str | None = None
    window: int = 60
    lo: int | None = None
    hi: int | None = None
    pattern: str | None = None
    factor: float = 0.8
    length: int | None = None
    # qre-eval
    expr: str | None = None
    qre_file: str | None = None
    bindings: dict = field(default_factory=dict)
    prefixes: bool = False
    # generate
    seed: int = 0
    spikes: int = 5
    amplitude: float = 1.0
    spread: float = 0.0
    noise_ratio: float = 0.1
    width: float = 3.0
    min_gap: int = 300
    max_gap: int = 500
    margin: int = 200
    dt: float = 1e-3
    truth: str | None = None


# ---------------------------------------------------------------------------
# validation


def parse_scales(text: str) -> ScaleGrid:
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise ConfigError("scale-grid", f"scale grid {text!r} is not lo:hi[:step]") from None
    if len(nums) not in (2, 3):
        raise ConfigError("scale-grid", f"scale grid {text!r} is not lo:hi[:step]")
    lo, hi = nums[:2]
    step = nums[2] if len(nums) == 3 else 1.0
    if not (lo > 0 and hi >= lo and step > 0):
        raise ConfigError("scale-grid", f"scale grid needs 0 < lo <= hi and step > 0, got {text!r}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return ScaleGrid(tuple(lo + k * step for k in range(n)))


def _require(cond: bool, invariant: str, message: str):
    if not cond:
        raise ConfigError(invariant, message)


def _finite_pos(x) -> bool:
    return x is not None and math.isfinite(x) and x > 0


def validate_config(cfg: RunConfig) -> None:
    """Check every parameter the command will use; raises :class:`ConfigError`."""
    c = cfg.command
    if c in ("cwt", "detect"):
        grid = parse_scales(cfg.scales)
        _require(int(cfg.order) == cfg.order and cfg.order >= 1, "wavelet-order", f"wavelet order must be a positive integer, got {cfg.order}")
        _require(_finite_pos(cfg.sigma), "wavelet-sigma", f"wavelet sigma must be positive, got {cfg.sigma}")
        _require(cfg.fmt in ("text", "binary"), "output-format", f"unknown spectrogram format {cfg.fmt!r}")
    if c == "detect":
        _require(cfg.detector in ("wpm", "wpb", "mdt"), "detector-kind", f"unknown detector {cfg.detector!r}")
        _require(cfg.engine in ("fast", "qre"), "engine", f"unknown engine {cfg.engine!r}")
        if cfg.detector in ("wpm", "wpb"):
            _require(cfg.sbar is not None, "sbar-given", "--sbar is required (or use --preset)")
            _require(cfg.pbar is not None, "pbar-given", "--pbar is required (or use --preset)")
            _require(_finite_pos(cfg.sbar), "sbar-positive", f"sbar must be positive, got {cfg.sbar}")
            _require(_finite_pos(cfg.pbar), "pbar-positive", f"pbar must be positive, got {cfg.pbar}")
            try:
                k = grid.index(cfg.sbar)
            except ValueError:
                raise ConfigError("sbar-in-grid", f"sbar={cfg.sbar} is not a scale of the grid {cfg.scales}") from None
        if cfg.detector == "wpm":
            _require(_finite_pos(cfg.eps), "eps-positive", f"eps must be positive, got {cfg.eps}")
            below = grid.scales[: k + 1]
            step = max((b - a for a, b in zip(below, below[1:])), default=0.0)
            _require(step <= cfg.eps, "eps-covers-grid-step", f"eps={cfg.eps} is smaller than the grid step {step}")
            _require(int(cfg.delta) == cfg.delta and cfg.delta >= 0, "delta-nonnegative-integer", f"delta must be a nonnegative integer, got {cfg.delta}")
        if cfg.detector in ("wpb", "mdt"):
            _require(int(cfg.bl) == cfg.bl and cfg.bl >= 1, "blanking-positive", f"blanking length must be an integer >= 1, got {cfg.bl}")
        if cfg.detector == "mdt":
            _require(_finite_pos(cfg.decay), "decay-positive", f"decay must be positive, got {cfg.decay}")
            _require(_finite_pos(cfg.pmin), "pmin-positive", f"pmin must be positive, got {cfg.pmin}")
            _require(_finite_pos(cfg.init), "init-positive", f"initial threshold must be positive, got {cfg.init}")
            _require(cfg.pmin <= cfg.init, "pmin-le-init", f"pmin={cfg.pmin} exceeds the initial threshold {cfg.init}")
    if c == "discriminate":
        kinds = ("count", "onset", "pattern", "rate", "stability")
        _require(cfg.kind in kinds, "discriminator-kind", f"unknown discriminator {cfg.kind!r}; choose from {', '.join(kinds)}")
        _require(int(cfg.window) == cfg.window and cfg.window >= 1, "window-positive", f"window must be an integer >= 1, got {cfg.window}")
        if cfg.kind == "count":
            _require(cfg.lo is not None and cfg.hi is not None, "range-given", "--lo and --hi are required")
            _require(0 <= cfg.lo <= cfg.hi, "range-ordered", f"need 0 <= lo <= hi, got {cfg.lo}, {cfg.hi}")
        if cfg.kind == "pattern":
            parse_pattern(cfg.pattern)
        if cfg.kind == "onset":
            _require(_finite_pos(cfg.factor), "factor-positive", f"onset factor must be positive, got {cfg.factor}")
        if cfg.length is not None:
            _require(cfg.length >= 1, "length-positive", f"length must be >= 1, got {cfg.length}")
    if c == "qre-eval":
        _require((cfg.expr is None) != (cfg.qre_file is None), "expression-given", "give exactly one of an expression or --file")
    if c == "generate":
        _require(cfg.spikes >= 1, "spike-count", f"need at least one spike, got {cfg.spikes}")
        _require(_finite_pos(cfg.amplitude), "amplitude-positive", f"amplitude must be positive, got {cfg.amplitude}")
        _require(cfg.spread >= 0, "spread-nonnegative", f"amplitude spread must be >= 0, got {cfg.spread}")
        _require(cfg.noise_ratio >= 0, "noise-nonnegative", f"noise ratio must be >= 0, got {cfg.noise_ratio}")
        _require(_finite_pos(cfg.width), "width-positive", f"spike width must be positive, got {cfg.width}")
        _require(0 < cfg.min_gap <= cfg.max_gap, "gap-range", f"need 0 < min-gap <= max-gap, got {cfg.min_gap}, {cfg.max_gap}")
        _require(cfg.min_gap >= 3 * cfg.width, "gap-exceeds-3-widths", "spikes closer than 3 widths make the ground truth ambiguous")
        _require(cfg.margin > 0, "margin-positive", f"margin must be positive, got {cfg.margin}")
        _require(_finite_pos(cfg.dt), "dt-positive", f"dt must be positive, got {cfg.dt}")


def parse_pattern(text: str | None):
    if not text:
        raise ConfigError("pattern-bounds", "--pattern a:b,c:d,e:f,g:h is required")
    try:
        pairs = [tuple(int(x) for x in part.split(":")) for part in text.split(",")]
    except ValueError:
        raise ConfigError("pattern-bounds", f"bad pattern bounds {text!r}") from None
    if len(pairs) != 4 or any(len(p) != 2 or not 0 <= p[0] <= p[1] for p in pairs):
        raise ConfigError("pattern-bounds", f"need four ranges lo:hi with 0 <= lo <= hi, got {text!r}")
    return [x for p in pairs for x in p]


# ---------------------------------------------------------------------------
# formatting and tables


def format_value(v) -> str:
    if v is BOTTOM:
        return "undefined"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (TimeSet, set, frozenset)):
        return "{" + ", ".join(str(x) for x in sorted(v)) + "}"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    if isinstance(v, tuple):
        return "(" + ", ".join(format_value(x) for x in v) + ")"
    return str(v)


def _header(cfg: RunConfig, keys: Sequence[str]) -> list[str]:
    d = asdict(cfg)
    return [f"qrekit {cfg.command}"] + [f"{k}={d[k]!r}" for k in keys]


def _read_table(path: str):
    """Header plus rows of a comma-separated table with ``#`` comments."""
    header, rows = None, []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cols = [c.strip() for c in line.split(",")]
            if header is None:
                header = cols
                continue
            if len(cols) != len(header):
                raise SignalFormatError(f"line {lineno}: expected {len(header)} columns, got {len(cols)}")
            rows.append(cols)
    if header is None:
        raise SignalFormatError(f"{path}: missing header row")
    return header, rows


def _convert(col: list[str], name: str):
    try:
        ints = [int(x) for x in col]
        return "integer", ints
    except ValueError:
        pass
    try:
        reals = [float(x) for x in col]
        if all(math.isfinite(x) for x in reals):
            return "real", reals
    except ValueError:
        pass
    return "enum", list(col)


def read_items(path: str, extra_labels=()):
    """Items and schema of a generic table; a ``t`` column is dropped."""
    header, rows = _read_table(path)
    names = [h for h in header if h != "t"] or header
    cols = {h: [r[i] for r in rows] for i, h in enumerate(header)}
    fields, data = [], {}
    for name in names:
        kind, vals = _convert(cols[name], name)
        labels = ()
        if kind == "enum":
            labels = tuple(sorted(set(vals) | {str(x) for x in extra_labels}))
        fields.append((name, kind, labels))
        data[name] = vals
    if len(fields) == 1:
        name, kind, labels = fields[0]
        return Schema.single(name, kind, labels), data[name]
    schema = Schema.record(*(Field(n, k, l) for n, k, l in fields))
    items = [dict(zip(names, vs)) for vs in zip(*(data[n] for n in names))]
    return schema, items


def read_beats(path: str, length: int | None = None):
    """``(times, values, column)`` for a ``t,beat``, ``t,chamber`` or annotation table."""
    header, rows = _read_table(path)
    if header == ["index", "time", "detector"]:
        idx = [int(r[0]) for r in rows]
        n = length if length is not None else (max(idx) + 1 if idx else 0)
        if any(i >= n for i in idx):
            raise SignalFormatError(f"annotation index {max(idx)} beyond length {n}")
        times = {int(r[0]): float(r[1]) for r in rows}
        dt = 1e-3
        if len(idx) > 1:
            dt = (times[idx[-1]] - times[idx[0]]) / (idx[-1] - idx[0]) if idx[-1] != idx[0] else dt
        beats = [0] * n
        for i in idx:
            beats[i] = 1
        t0 = times[idx[0]] - idx[0] * dt if idx else 0.0
        return [t0 + k * dt for k in range(n)], beats, "beat"
    if header == ["t", "beat"]:
        try:
            vals = [int(r[1]) for r in rows]
        except ValueError:
            raise SignalFormatError("beat column must hold 0 or 1") from None
        if any(v not in (0, 1) for v in vals):
            raise SignalFormatError("beat column must hold 0 or 1")
        return [float(r[0]) for r in rows], vals, "beat"
    if header == ["t", "chamber"]:
        vals = [r[1] for r in rows]
        bad = sorted(set(vals) - {"0", "A", "V"})
        if bad:
            raise SignalFormatError(f"chamber labels must be 0, A or V, got {bad}")
        return [float(r[0]) for r in rows], vals, "chamber"
    raise SignalFormatError(f"expected a 't,beat', 't,chamber' or 'index,time,detector' table, got {','.join(header)}")


# ---------------------------------------------------------------------------
# commands


def _open_out(path: str | None, binary: bool = False):
    if path is None or path == "-":
        return None
    return open(path, "wb" if binary else "w", encoding=None if binary else "utf-8", newline=None if binary else "\n")


def _emit(cfg: RunConfig, write, stdout, binary=False):
    fh = _open_out(cfg.output, binary)
    if fh is None:
        if binary:
            buf = io.BytesIO()
            write(buf)
            stdout.buffer.write(buf.getvalue()) if hasattr(stdout, "buffer") else stdout.write(buf.getvalue().hex())
        else:
            write(stdout)
        return
    with fh:
        write(fh)


def _cmd_generate(cfg: RunConfig, stdout):
    spec = spike_train_spec(
        cfg.seed, cfg.spikes, amplitude=cfg.amplitude, spread=cfg.spread, noise_ratio=cfg.noise_ratio, width=cfg.width,
        min_gap=cfg.min_gap, max_gap=cfg.max_gap, margin=cfg.margin, dt=cfg.dt,
    )
    sig, centers = generate_synthetic(spec)
    head = _header(cfg, ["seed", "spikes", "amplitude", "spread", "noise_ratio", "width", "min_gap", "max_gap", "margin", "dt"])
    head.append(f"centers={list(centers)}")
    _emit(cfg, lambda fh: write_signal(sig, fh, head), stdout)
    if cfg.truth:
        ann = PeakAnnotation.from_indices(centers, sig.times, "truth", {})
        with open(cfg.truth, "w", encoding="utf-8") as fh:
            write_annotation(ann, fh, head)


def _cmd_cwt(cfg: RunConfig, stdout):
    sig = read_signal(cfg.input)
    sp = cwt(sig, parse_scales(cfg.scales), WaveletSpec(cfg.order, cfg.sigma))
    if cfg.fmt == "binary":
        _emit(cfg, lambda fh: write_spectrogram_binary(sp, fh), stdout, binary=True)
    else:
        head = _header(cfg, ["input", "scales", "order", "sigma"])
        _emit(cfg, lambda fh: write_spectrogram_text(sp, fh, head), stdout)


def _cmd_detect(cfg: RunConfig, stdout):
    sig = read_signal(cfg.input)
    keys = ["input", "detector", "engine"]
    if cfg.detector == "mdt":
        params = MdtParams(int(cfg.bl), cfg.decay, cfg.pmin, cfg.init)
        res = detect_mdt(sig, params, engine=cfg.engine)
        ann = res.annotation
        keys += ["bl", "decay", "pmin", "init"]
        if cfg.trace:
            with open(cfg.trace, "w", encoding="utf-8") as fh:
                for c in _header(cfg, keys):
                    fh.write(f"# {c}\n")
                fh.write("index,time,threshold\n")
                for k, (t, p) in enumerate(zip(sig.times, res.trace)):
                    fh.write(f"{k},{float(t):.12g},{'nan' if math.isnan(p) else repr(float(p))}\n")
    else:
        sp = cwt(sig, parse_scales(cfg.scales), WaveletSpec(cfg.order, cfg.sigma))
        keys += ["scales", "order", "sigma", "sbar", "pbar"]
        if cfg.detector == "wpm":
            ann = detect_wpm(sp, WpmParams(cfg.sbar, cfg.pbar, cfg.eps, int(cfg.delta)), engine=cfg.engine, wavelet_sigma=cfg.sigma)
            keys += ["eps", "delta"]
        else:
            ann = detect_wpb(sp, WpbParams(cfg.sbar, cfg.pbar, int(cfg.bl)), engine=cfg.engine, wavelet_sigma=cfg.sigma)
            keys += ["bl"]
    _emit(cfg, lambda fh: write_annotation(ann, fh, _header(cfg, keys)), stdout)


def _after_beat():
    """``ε | true*·(v = 1)``: empty, or ending on a beat."""
    S = disc.BEATS
    return union(eps(S), concat(anything(S), atom(var("v").eq(1), S)))


def discriminator_qre(cfg: RunConfig):
    """Streaming form of the chosen discriminator: one value per input item once defined."""
    k = cfg.kind
    if k == "count":
        f = disc.qre_count_in_range(cfg.lo, cfg.hi, cfg.window)
        return make_split("right", lift(anything(disc.BEATS), 0, "integer"), f), "beat"
    if k == "onset":
        f = disc.qre_sudden_onset(Fraction(str(cfg.factor)))
        return make_split("right", lift(_after_beat(), 0, "integer"), f), "beat"
    if k == "pattern":
        f = disc.qre_pattern(*parse_pattern(cfg.pattern))
        return make_split("right", lift(anything(disc.CHAMBERS), 0, "integer"), f), "chamber"
    if k == "rate":
        return disc.qre_heart_rate(cfg.window), "beat"
    return disc.qre_stability(cfg.window), "beat"


def _cmd_discriminate(cfg: RunConfig, stdout):
    times, values, column = read_beats(cfg.input, cfg.length)
    expr, want = discriminator_qre(cfg)
    if column != want:
        raise ConfigError("input-stream-kind", f"{cfg.kind} reads a {want} stream, got a {column} table")
    ev = compile_streaming(expr)

    def write(fh):
        for c in _header(cfg, ["input", "kind", "window", "lo", "hi", "pattern", "factor"]):
            fh.write(f"# {c}\n")
        fh.write("index,time,value\n")
        for i, (t, v) in enumerate(zip(times, values)):
            ev.step(v)
            out = ev.output()
            if out is not BOTTOM:
                fh.write(f"{i},{t:.12g},{format_value(out)}\n")

    _emit(cfg, write, stdout)


def _binding_type(v) -> str:
    if isinstance(v, bool):
        return "boolean"
    return "integer" if isinstance(v, int) else "real"


def _cmd_qre_eval(cfg: RunConfig, stdout):
    if cfg.qre_file is not None:
        with open(cfg.qre_file, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = cfg.expr
    tree = parse_qre_syntax(text)
    schema, items = read_items(cfg.input, string_constants(tree))
    types = {k: _binding_type(v) for k, v in cfg.bindings.items()}
    expr = build_qre(tree, schema, types)
    missing = sorted(set(expr.params) - set(cfg.bindings))
    if missing:
        raise ConfigError("complete-valuation", f"no value for parameter(s) {', '.join(missing)}; pass --init NAME=VALUE")
    valuation = {k: cfg.bindings[k] for k in expr.params}
    ev = compile_streaming(expr, valuation)
    for item in items:
        ev.step(item)
        if cfg.prefixes:
            stdout.write(format_value(ev.output()) + "\n")
    if not cfg.prefixes:
        stdout.write(format_value(ev.output()) + "\n")


_COMMANDS = {
    "generate": _cmd_generate,
    "cwt": _cmd_cwt,
    "detect": _cmd_detect,
    "discriminate": _cmd_discriminate,
    "qre-eval": _cmd_qre_eval,
}


def run_pipeline(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Validate and run one command; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        validate_config(cfg)
        _COMMANDS[cfg.command](cfg, stdout)
    except (ConfigError, QreError) as exc:
        stderr.write(f"qrekit: validation error [{exc.invariant}]: {exc}\n")
        return EXIT_VALIDATION
    except ParseError as exc:
        stderr.write(f"qrekit: validation error [syntax]: {exc}\n")
        return EXIT_VALIDATION
    except SchemaError as exc:
        stderr.write(f"qrekit: validation error [schema]: {exc}\n")
        return EXIT_VALIDATION
    except SignalFormatError as exc:
        stderr.write(f"qrekit: input error: {exc}\n")
        return EXIT_IO
    except OSError as exc:
        stderr.write(f"qrekit: I/O error: {exc}\n")
        return EXIT_IO
    except ValueError as exc:
        stderr.write(f"qrekit: validation error [parameter]: {exc}\n")
        return EXIT_VALIDATION
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _binding(text: str):
    name, sep, value = text.partition("=")
    if not sep or not name.isidentifier():
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    value = value.strip()
    if value in ("true", "false"):
        return name, value == "true"
    try:
        return name, int(value)
    except ValueError:
        try:
            return name, float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"value of {name} is not a number: {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qrekit", description="Quantitative regular expressions and cardiac peak detection.")
    sub = p.add_subparsers(dest="command", required=True)

    def out(sp):
        sp.add_argument("-o", "--output", help="output file (default: stdout)")

    def wavelet_args(sp):
        sp.add_argument("--scales", default="1:128", help="scale grid lo:hi[:step] (default 1:128)")
        sp.add_argument("--order", type=int, default=2, help="Gaussian derivative order (default 2)")
        sp.add_argument("--sigma", type=float, default=1e-3, help="mother wavelet deviation in seconds (default 1e-3)")

    g = sub.add_parser("generate", help="write a seeded synthetic spike train")
    out(g)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--spikes", type=int, default=5)
    g.add_argument("--amplitude", type=float, default=1.0)
    g.add_argument("--spread", type=float, default=0.0, help="amplitudes drawn from [A, (1+spread)A]")
    g.add_argument("--noise-ratio", type=float, default=0.1, help="noise half-width over amplitude")
    g.add_argument("--width", type=float, default=3.0, help="spike deviation in samples")
    g.add_argument("--min-gap", type=int, default=300)
    g.add_argument("--max-gap", type=int, default=500)
    g.add_argument("--margin", type=int, default=200)
    g.add_argument("--dt", type=float, default=1e-3)
    g.add_argument("--truth", help="also write the spike centres as an annotation table")

    c = sub.add_parser("cwt", help="spectrogram of a t,v signal")
    c.add_argument("input")
    out(c)
    wavelet_args(c)
    c.add_argument("--format", dest="fmt", choices=("text", "binary"), default="text")

    d = sub.add_parser("detect", help="peak detection with wpm, wpb or mdt")
    d.add_argument("detector", choices=("wpm", "wpb", "mdt"))
    d.add_argument("input")
    out(d)
    wavelet_args(d)
    d.add_argument("--engine", choices=("fast", "qre"), default="fast")
    d.add_argument("--preset", choices=sorted(PRESETS))
    d.add_argument("--sbar", type=float)
    d.add_argument("--pbar", type=float)
    d.add_argument("--eps", type=float, default=1.0)
    d.add_argument("--delta", type=int, default=2)
    d.add_argument("--bl", type=int)
    d.add_argument("--decay", type=float, default=math.log(2.0) / 300.0)
    d.add_argument("--pmin", type=float, default=20.0)
    d.add_argument("--init", type=float, default=200.0, help="initial MDT threshold")
    d.add_argument("--trace", help="mdt only: write the threshold trace here")

    r = sub.add_parser("discriminate", help="rhythm discriminators over a beat stream")
    r.add_argument("kind", choices=("count", "onset", "pattern", "rate", "stability"))
    r.add_argument("input", help="t,beat or t,chamber table, or a detector annotation")
    out(r)
    r.add_argument("--window", type=int, default=60)
    r.add_argument("--lo", type=int)
    r.add_argument("--hi", type=int)
    r.add_argument("--pattern", help="a:b,c:d,e:f,g:h repetition bounds")
    r.add_argument("--factor", type=float, default=0.8)
    r.add_argument("--length", type=int, help="stream length when reading an annotation")

    q = sub.add_parser("qre-eval", help="evaluate a QRE on a table of items")
    q.add_argument("expr", nargs="?", help="QRE text")
    q.add_argument("--file", dest="qre_file", help="read the QRE from a file")
    q.add_argument("--input", required=True, help="item table (header row; a t column is dropped)")
    q.add_argument("--init", dest="bindings", type=_binding, action="append", default=[], metavar="NAME=VALUE")
    q.add_argument("--prefixes", action="store_true", help="print the value after every item")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    d = {k: v for k, v in vars(ns).items() if v is not None}
    preset = d.pop("preset", None)
    if "bindings" in d:
        d["bindings"] = dict(d["bindings"])
    cfg = RunConfig(**d)
    if preset:
        vals = dict(PRESETS[preset])
        for k in list(vals):
            if getattr(ns, k, None) is not None:
                del vals[k]
        cfg = replace(cfg, **vals)
    return cfg


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    return run_pipeline(config_from_args(ns), stdout, stderr)


if __name__ == "__main__":
    sys.exit(main())

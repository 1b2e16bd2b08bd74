"""Experiment configs, batch runs and report serialization.

Config files are INI-style (``configparser``) with one section per concept::

    [system]        pairs, couplings, omega
    [initial]       preset = single-excitation | two-excitation | w-state | six-term | terms
    [protocol]      kind = swap | transfer   (generates the schedule)
    [phase.N]       duration, mode.K = free | frozen | zeno:SLICES[:A2=0]
    [observables]   concurrence, fidelity, excitation
    [sampling]      points
    [sweep]         parameter = slices | omega | time, values

See README.md for the full grammar.  Numbers accept ``pi`` and ``sqrt``
in simple arithmetic, e.g. ``duration = pi/4``.
"""

from __future__ import annotations

import ast
import configparser
import csv
import hashlib
import io
import json
import math
import operator
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .dynamics import PairSpec
from .metrics import concurrence_between, excitation_of
from .protocols import (single_excitation_limit_state, plan_swap, plan_transfer, pulse_target, six_term_output_state,
                        two_excitation_limit_state)
from .register import (BasisStateSpec, QubitId, RegisterError, as_qubit, single_excitation_state, fidelity, new_register,
                       prepare_superposition, six_term_state, two_excitation_state, w_state)
from .zeno import (FREE, FROZEN, Free, Phase, Projector, SlicedZeno, ZenoSchedule, run_schedule,
                   trace_schedule)

THREADS_ENV = "ZENOPAIRS_THREADS"
PRESETS = ("single-excitation", "two-excitation", "w-state", "six-term", "terms")
TARGETS = ("initial", "zeno-limit", "pulse-target", "transfer-display", "transfer-display-literal")
SWEEPABLE = ("slices", "omega", "time")
DEFAULT_POINTS = 200


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class ConfigParseError(ConfigError):
    """The text is not a well-formed config document."""


class ConfigValidationError(ConfigError):
    """The document parsed but describes an invalid experiment."""


# --- small arithmetic evaluator -------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi}
_FUNCS = {"sqrt": math.sqrt}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
            and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise ValueError("unsupported expression")


def number(text: str, path: str, allow_complex: bool = False):
    try:
        v = _eval_node(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, TypeError, OverflowError) as exc:
        raise ConfigParseError(path, f"cannot read number from {text!r} ({exc})") from None
    if isinstance(v, complex) and not allow_complex:
        raise ConfigValidationError(path, f"expected a real number, got {text!r}")
    if not np.isfinite(v):
        raise ConfigValidationError(path, f"value must be finite, got {text!r}")
    return v


def _numbers(text: str, path: str, allow_complex: bool = False) -> list:
    items = [s for s in text.split(",") if s.strip()]
    return [number(s, f"{path}[{i}]", allow_complex) for i, s in enumerate(items)]


def _integer(text: str, path: str) -> int:
    v = number(text, path)
    if v != int(v):
        raise ConfigValidationError(path, f"expected an integer, got {text!r}")
    return int(v)


# --- config model ----------------------------------------------------------

@dataclass(frozen=True)
class Observable:
    kind: str               # concurrence | fidelity | excitation
    args: tuple

    @property
    def name(self) -> str:
        if self.kind == "concurrence":
            return f"C({self.args[0]},{self.args[1]})"
        if self.kind == "fidelity":
            return f"F({self.args[0]})"
        return "N(" + ("all" if not self.args else " ".join(map(str, self.args))) + ")"


@dataclass(frozen=True)
class ExperimentConfig:
    num_pairs: int
    couplings: tuple
    omega: float
    preset: str
    preset_params: tuple            # (key, value) pairs, values as python numbers/tuples
    schedule: ZenoSchedule
    observables: tuple
    points: int = DEFAULT_POINTS
    sweep: Optional[tuple] = None   # (parameter, values)

    def pairs(self, omega: Optional[float] = None) -> list:
        w = self.omega if omega is None else omega
        return [PairSpec(k, g, w) for k, g in enumerate(self.couplings, start=1)]

    def param(self, key, default=None):
        return dict(self.preset_params).get(key, default)

    def canonical(self) -> str:
        """Stable text of every semantic field, used for the digest."""
        phases = [[repr(float(ph.duration)), sorted((k, str(md)) for k, md in ph.modes.items())]
                  for ph in self.schedule.phases]
        doc = {
            "num_pairs": self.num_pairs,
            "couplings": [repr(float(g)) for g in self.couplings],
            "omega": repr(float(self.omega)),
            "preset": self.preset,
            "preset_params": repr(self.preset_params),
            "phases": phases,
            "observables": [o.name for o in self.observables],
            "points": self.points,
            "sweep": repr(self.sweep),
        }
        return json.dumps(doc, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


# --- parsing ---------------------------------------------------------------

def _parse_mode(text: str, k: int, path: str):
    t = text.strip()
    low = t.lower()
    if low == "free":
        return FREE
    if low in ("frozen", "ideal", "ideal-frozen"):
        return FROZEN
    if low.startswith("zeno"):
        parts = t.split(":")
        if len(parts) not in (2, 3):
            raise ConfigParseError(path, f"expected zeno:SLICES[:QUBIT=VALUE], got {text!r}")
        slices = _integer(parts[1], path)
        if slices < 1:
            raise ConfigValidationError(path, f"slice count must be >= 1, got {slices}")
        target, kept = f"A{k}", 0
        if len(parts) == 3:
            if "=" not in parts[2]:
                raise ConfigParseError(path, f"projector must read QUBIT=VALUE, got {parts[2]!r}")
            target, kept_text = parts[2].split("=", 1)
            kept = _integer(kept_text, path)
        try:
            q = as_qubit(target)
            p = Projector(q, kept)
        except (RegisterError, ValueError) as exc:
            raise ConfigValidationError(path, str(exc)) from None
        if q.pair != k:
            raise ConfigValidationError(path, f"projector on {q} does not belong to pair {k}")
        return SlicedZeno(p, slices)
    raise ConfigParseError(path, f"unknown mode {text!r} (free | frozen | zeno:N[:A{k}=0])")


def _qubit(text: str, path: str, num_pairs: int) -> QubitId:
    try:
        q = as_qubit(text)
        q.bit(num_pairs)
    except RegisterError as exc:
        raise ConfigValidationError(path, str(exc)) from None
    return q


def _parse_terms(text: str, path: str, num_pairs: int) -> tuple:
    terms = []
    for i, chunk in enumerate(s for s in text.split(";") if s.strip()):
        if ":" not in chunk:
            raise ConfigParseError(f"{path}[{i}]", f"term must read COEFF : QUBITS, got {chunk!r}")
        coeff_text, qubits = chunk.split(":", 1)
        coeff = complex(number(coeff_text, f"{path}[{i}]", allow_complex=True))
        qs = tuple(str(_qubit(q, f"{path}[{i}]", num_pairs)) for q in qubits.split())
        terms.append((coeff, qs))
    if not terms:
        raise ConfigValidationError(path, "at least one term is required")
    return tuple(terms)


def _read_sections(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigParseError("<document>", str(exc).splitlines()[0]) from None
    return cp


def _check_keys(sec, allowed, path):
    for key in sec:
        if key not in allowed and not any(key.startswith(p) for p in allowed if p.endswith(".")):
            raise ConfigValidationError(f"{path}.{key}", "unknown key")


def parse_config(text: str) -> ExperimentConfig:
    cp = _read_sections(text)
    known = {"system", "initial", "protocol", "observables", "sampling", "sweep"}
    for name in cp.sections():
        if name not in known and not name.startswith("phase."):
            raise ConfigValidationError(name, "unknown section")

    if not cp.has_section("system"):
        raise ConfigValidationError("system", "section is required")
    sysec = cp["system"]
    _check_keys(sysec, ("pairs", "couplings", "omega"), "system")
    if "pairs" not in sysec:
        raise ConfigValidationError("system.pairs", "required")
    m = _integer(sysec["pairs"], "system.pairs")
    if not 1 <= m <= 13:
        raise ConfigValidationError("system.pairs", f"must be in [1, 13], got {m}")
    gs = _numbers(sysec.get("couplings", "1.0"), "system.couplings")
    if len(gs) == 1:
        gs = gs * m
    if len(gs) != m:
        raise ConfigValidationError("system.couplings", f"expected 1 or {m} values, got {len(gs)}")
    for i, g in enumerate(gs):
        if g < 0:
            raise ConfigValidationError(f"system.couplings[{i}]", f"coupling must be >= 0, got {g}")
    omega = float(number(sysec.get("omega", "0"), "system.omega"))

    preset, params = _parse_initial(cp, m)

    has_protocol = cp.has_section("protocol")
    phase_names = [s for s in cp.sections() if s.startswith("phase.")]
    if has_protocol and phase_names:
        raise ConfigValidationError("protocol", "give either [protocol] or [phase.N] sections, not both")
    if has_protocol:
        schedule = _protocol_schedule(cp["protocol"], m, gs)
    else:
        schedule = _explicit_schedule(cp, phase_names, m)

    observables = _parse_observables(cp, m, preset)

    points = DEFAULT_POINTS
    if cp.has_section("sampling"):
        _check_keys(cp["sampling"], ("points",), "sampling")
        points = _integer(cp["sampling"].get("points", str(DEFAULT_POINTS)), "sampling.points")
        if points < 1:
            raise ConfigValidationError("sampling.points", f"must be >= 1, got {points}")

    sweep = None
    if cp.has_section("sweep"):
        sec = cp["sweep"]
        _check_keys(sec, ("parameter", "values"), "sweep")
        param = sec.get("parameter", "").strip()
        if param not in SWEEPABLE:
            raise ConfigValidationError("sweep.parameter", f"must be one of {SWEEPABLE}, got {param!r}")
        values = _numbers(sec.get("values", ""), "sweep.values")
        if not values:
            raise ConfigValidationError("sweep.values", "at least one value is required")
        for i, v in enumerate(values):
            if not v > 0:
                raise ConfigValidationError(f"sweep.values[{i}]", f"sweep values must be positive, got {v}")
            if param == "slices" and v != int(v):
                raise ConfigValidationError(f"sweep.values[{i}]", f"slice counts must be integers, got {v}")
        if param == "time" and len(schedule.phases) != 1:
            raise ConfigValidationError("sweep.parameter", "time sweeps need a single-phase schedule")
        sweep = (param, tuple(int(v) if param == "slices" else float(v) for v in values))

    cfg = ExperimentConfig(m, tuple(float(g) for g in gs), omega, preset, params, schedule,
                           observables, points, sweep)
    for obs in observables:
        if obs.kind == "fidelity" and obs.args[0] == "pulse-target":
            _pulse_times(cfg, schedule, "observables.fidelity")
    return cfg


def _parse_initial(cp, m):
    if not cp.has_section("initial"):
        raise ConfigValidationError("initial", "section is required")
    sec = cp["initial"]
    _check_keys(sec, ("preset", "alpha", "beta", "c", "terms"), "initial")
    preset = sec.get("preset", "").strip()
    if preset not in PRESETS:
        raise ConfigValidationError("initial.preset", f"must be one of {PRESETS}, got {preset!r}")
    params = []
    if preset in ("single-excitation", "two-excitation"):
        if m != 2:
            raise ConfigValidationError("initial.preset", f"{preset} needs pairs = 2, got {m}")
        alpha = complex(number(sec.get("alpha", "sqrt(0.5)"), "initial.alpha", allow_complex=True))
        beta = complex(number(sec.get("beta", "sqrt(0.5)"), "initial.beta", allow_complex=True))
        n2 = abs(alpha) ** 2 + abs(beta) ** 2
        if n2 == 0:
            raise ConfigValidationError("initial.alpha", "alpha and beta cannot both vanish")
        s = math.sqrt(n2)
        params = [("alpha", alpha / s), ("beta", beta / s)]
    elif preset == "six-term":
        if m != 4:
            raise ConfigValidationError("initial.preset", f"six-term needs pairs = 4, got {m}")
        c = _numbers(sec.get("c", "1, 1, 1, 1, 1, 1"), "initial.c", allow_complex=True)
        if len(c) != 6:
            raise ConfigValidationError("initial.c", f"expected six coefficients, got {len(c)}")
        if all(x == 0 for x in c):
            raise ConfigValidationError("initial.c", "coefficients cannot all vanish")
        s = math.sqrt(sum(abs(x) ** 2 for x in c))
        params = [("c", tuple(complex(x) / s for x in c))]
    elif preset == "terms":
        if "terms" not in sec:
            raise ConfigValidationError("initial.terms", "required for preset = terms")
        params = [("terms", _parse_terms(sec["terms"], "initial.terms", m))]
    return preset, tuple(params)


def _protocol_schedule(sec, m, gs) -> ZenoSchedule:
    _check_keys(sec, ("kind", "slices", "active"), "protocol")
    kind = sec.get("kind", "").strip()
    slices_text = sec.get("slices", "ideal").strip()
    slices = None if slices_text.lower() == "ideal" else _integer(slices_text, "protocol.slices")
    if slices is not None and slices < 1:
        raise ConfigValidationError("protocol.slices", f"must be >= 1 or 'ideal', got {slices}")
    try:
        if kind == "swap":
            if m != 2:
                raise ConfigValidationError("protocol.kind", f"swap needs pairs = 2, got {m}")
            return plan_swap(gs[0], gs[1], slices).schedule()
        if kind == "transfer":
            active = [_integer(x, f"protocol.active[{i}]")
                      for i, x in enumerate(s for s in sec.get("active", "").split(",") if s.strip())]
            for i, k in enumerate(active):
                if not 1 <= k <= m:
                    raise ConfigValidationError(f"protocol.active[{i}]", f"pair index {k} out of range [1, {m}]")
            return plan_transfer(m, active, gs, slices).schedule()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigValidationError("protocol", str(exc)) from None
    raise ConfigValidationError("protocol.kind", f"must be swap or transfer, got {kind!r}")


def _explicit_schedule(cp, names, m) -> ZenoSchedule:
    def order(name):
        try:
            return int(name.split(".", 1)[1])
        except ValueError:
            raise ConfigValidationError(name, "phase sections are named phase.1, phase.2, ...") from None

    phases = []
    for name in sorted(names, key=order):
        sec = cp[name]
        _check_keys(sec, ("duration", "mode."), name)
        if "duration" not in sec:
            raise ConfigValidationError(f"{name}.duration", "required")
        d = float(number(sec["duration"], f"{name}.duration"))
        if d < 0:
            raise ConfigValidationError(f"{name}.duration", f"must be >= 0, got {d}")
        modes = {}
        for key, value in sec.items():
            if not key.startswith("mode."):
                continue
            path = f"{name}.{key}"
            k = _integer(key.split(".", 1)[1], path)
            if not 1 <= k <= m:
                raise ConfigValidationError(path, f"pair index {k} out of range [1, {m}]")
            modes[k] = _parse_mode(value, k, path)
        phases.append(Phase(d, modes))
    return ZenoSchedule(phases)


def _parse_observables(cp, m, preset) -> tuple:
    if not cp.has_section("observables"):
        raise ConfigValidationError("observables", "section is required")
    sec = cp["observables"]
    _check_keys(sec, ("concurrence", "fidelity", "excitation"), "observables")
    out = []
    for i, item in enumerate(s for s in sec.get("concurrence", "").split(",") if s.strip()):
        path = f"observables.concurrence[{i}]"
        bits = item.strip().split("-")
        if len(bits) != 2:
            raise ConfigParseError(path, f"expected QUBIT-QUBIT, got {item.strip()!r}")
        q1, q2 = (_qubit(b, path, m) for b in bits)
        if q1 == q2:
            raise ConfigValidationError(path, "concurrence needs two distinct qubits")
        out.append(Observable("concurrence", (q1, q2)))
    for i, item in enumerate(s.strip() for s in sec.get("fidelity", "").split(",") if s.strip()):
        path = f"observables.fidelity[{i}]"
        if item not in TARGETS:
            raise ConfigValidationError(path, f"target must be one of {TARGETS}, got {item!r}")
        if item == "zeno-limit" and preset not in ("single-excitation", "two-excitation"):
            raise ConfigValidationError(path, "zeno-limit needs preset single-excitation or two-excitation")
        if item.startswith("transfer-display") and preset != "six-term":
            raise ConfigValidationError(path, f"{item} needs preset six-term")
        out.append(Observable("fidelity", (item,)))
    for i, item in enumerate(s for s in sec.get("excitation", "").split(";") if s.strip()):
        path = f"observables.excitation[{i}]"
        words = item.split()
        if words == ["all"]:
            out.append(Observable("excitation", ()))
        else:
            out.append(Observable("excitation", tuple(_qubit(w, path, m) for w in words)))
    if not out:
        raise ConfigValidationError("observables", "at least one observable is required")
    return tuple(out)


# --- running ---------------------------------------------------------------

@dataclass(frozen=True)
class ReportRow:
    sample: float
    observable: str
    value: float
    survival: float


@dataclass
class ExperimentReport:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def value(self, observable: str, sample: Optional[float] = None) -> float:
        """Value of ``observable`` at ``sample`` (the last sample by default)."""
        rows = [r for r in self.rows if r.observable == observable]
        if sample is not None:
            rows = [r for r in rows if r.sample == sample]
        if not rows:
            raise KeyError(observable)
        return rows[-1].value


def initial_state(cfg: ExperimentConfig):
    if cfg.preset == "single-excitation":
        return single_excitation_state(cfg.param("alpha"), cfg.param("beta"))
    if cfg.preset == "two-excitation":
        return two_excitation_state(cfg.param("alpha"), cfg.param("beta"))
    if cfg.preset == "w-state":
        return w_state(cfg.num_pairs)
    if cfg.preset == "six-term":
        return six_term_state(cfg.param("c"))
    terms = [(c, BasisStateSpec.excited(cfg.num_pairs, qs)) for c, qs in cfg.param("terms")]
    try:
        return prepare_superposition(new_register(cfg.num_pairs), terms)
    except RegisterError as exc:
        raise ConfigValidationError("initial.terms", str(exc)) from None


def _free_time_until(schedule: ZenoSchedule, k: int, t: float) -> float:
    start, total = 0.0, 0.0
    for ph in schedule.phases:
        if isinstance(ph.mode(k), Free):
            total += max(0.0, min(t, start + ph.duration) - start)
        start += ph.duration
    return total


def _pulse_times(cfg, schedule, path="observables.fidelity") -> dict:
    times = {}
    for k, g in enumerate(cfg.couplings, start=1):
        t = schedule.free_time(k)
        phase = g * t
        if abs(phase) <= 1e-9:
            continue
        if abs(phase - 0.5 * math.pi) > 1e-9:
            raise ConfigValidationError(path, f"pulse-target needs g*t in {{0, pi/2}} for every pair; "
                                              f"pair {k} has g*t = {phase!r}")
        times[k] = t
    return times


def _target(cfg, schedule, name, psi0, t, omega):
    if name == "initial":
        return psi0
    if name == "pulse-target":
        return pulse_target(psi0, _pulse_times(cfg, schedule), omega)
    if name == "transfer-display":
        return six_term_output_state(cfg.param("c"), explicit_phases=True)
    if name == "transfer-display-literal":
        return six_term_output_state(cfg.param("c"), explicit_phases=False)
    t1, t2 = (_free_time_until(schedule, k, t) for k in (1, 2))
    g1, g2 = cfg.couplings
    alpha, beta = cfg.param("alpha"), cfg.param("beta")
    if cfg.preset == "single-excitation":
        return single_excitation_limit_state(alpha, beta, g1, g2, t1, t2)
    return two_excitation_limit_state(alpha, beta, g1, g2, t1, t2)


def _observe(cfg, schedule, state, psi0, t, omega):
    out = []
    for obs in cfg.observables:
        if obs.kind == "concurrence":
            v = concurrence_between(state, *obs.args)
        elif obs.kind == "fidelity":
            v = fidelity(state, _target(cfg, schedule, obs.args[0], psi0, t, omega))
        else:
            v = excitation_of(state, obs.args or None)
        out.append((obs.name, float(v)))
    return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _sweep_point(cfg: ExperimentConfig, param, value):
    schedule, omega = cfg.schedule, cfg.omega
    if param == "slices":
        schedule = schedule.with_slices(int(value))
    elif param == "omega":
        omega = float(value)
    else:
        schedule = ZenoSchedule([Phase(float(value), cfg.schedule.phases[0].modes)])
    psi0 = initial_state(cfg)
    rec = run_schedule(psi0, cfg.pairs(omega), schedule)
    t = schedule.total_duration
    return [ReportRow(float(value), name, v, rec.survival_probability)
            for name, v in _observe(cfg, schedule, rec.final_state, psi0, t, omega)]


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Execute ``cfg``.  Raises ZeroSurvivalError if a projection empties the state."""
    started = time.perf_counter()
    rows = []
    if cfg.sweep is not None:
        param, values = cfg.sweep
        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            for chunk in pool.map(lambda v: _sweep_point(cfg, param, v), values):
                rows.extend(chunk)
        kind = param
    else:
        psi0 = initial_state(cfg)
        total = cfg.schedule.total_duration
        times = [total] if cfg.points == 1 else list(np.linspace(0.0, total, cfg.points))
        for t, state, surv in trace_schedule(psi0, cfg.pairs(), cfg.schedule, times):
            for name, v in _observe(cfg, cfg.schedule, state, psi0, t, cfg.omega):
                rows.append(ReportRow(float(t), name, v, float(surv)))
        kind = "time"
    meta = {
        "config_digest": cfg.digest(),
        "tool_version": __version__,
        "sample_kind": kind,
        "wall_clock_seconds": time.perf_counter() - started,
    }
    return ExperimentReport(rows, meta)


# --- serialization ---------------------------------------------------------

CSV_HEADER = ("sample", "observable", "value", "survival")


def _fmt(x: float) -> str:
    return format(x, ".17g")


def emit_report(report: ExperimentReport, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in report.rows:
            w.writerow([_fmt(r.sample), r.observable, _fmt(r.value), _fmt(r.survival)])
        return buf.getvalue().encode()
    if fmt in ("jsonl", "json-lines"):
        lines = [json.dumps({"metadata": report.metadata}, sort_keys=True)]
        for r in report.rows:
            lines.append(json.dumps({"sample": r.sample, "observable": r.observable,
                                     "value": r.value, "survival": r.survival}))
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown format {fmt!r} (csv | jsonl)")


def parse_report(data: bytes, fmt: str = "csv") -> ExperimentReport:
    text = data.decode()
    if fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != CSV_HEADER:
            raise ValueError("missing CSV header")
        return ExperimentReport([ReportRow(float(s), o, float(v), float(p)) for s, o, v, p in rows[1:]])
    lines = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not lines or "metadata" not in lines[0]:
        raise ValueError("first JSON line must carry metadata")
    rows = [ReportRow(d["sample"], d["observable"], d["value"], d["survival"]) for d in lines[1:]]
    return ExperimentReport(rows, lines[0]["metadata"])

"""Command-line front end.

    sharpqm [global flags] <subcommand> [flags]

Configuration resolves as built-in defaults, then the subcommand's block of
the ``--config`` JSON file, then command-line flags.  The resolved block is
validated against a JSON schema before any computation starts.  Results are
held in memory and written only after the computation succeeds, so a failed
run leaves no output files.

Exit status: 0 success, 1 selftest ran with failing checks, 2 invalid input
(config, domain or precondition), 3 numerical non-convergence.  Errors are
reported on stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from . import __version__
from .errors import (
    ConvergenceError,
    DomainError,
    InvariantError,
    NodeProximityError,
    PreconditionError,
    SharpQMError,
    StepLimitError,
    UnsupportedError,
)
from .units import C_LIGHT, DEFAULT_SCALE

SCHEMA_VERSION = 1
COMMANDS = ("spectrum", "hartree", "fields", "trajectory", "radiate", "perturb", "photon", "audit", "selftest")

# --------------------------------------------------------------------------
# configuration

_VEC = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_VECS = {"type": "array", "items": _VEC}
_POS = {"type": "number", "exclusiveMinimum": 0}
_COEFF = {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}
_LABEL = {"type": "string", "pattern": "^[1-9][0-9]{2}[+-]?$"}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "additionalProperties": False, "required": list(required)}


_PULSE = _obj(
    {
        "coupling": _POS,
        "sigma_wavelengths": _POS,
        "z0_sigmas": {"type": "number", "maximum": -10},
        "amplitude": _POS,
        "sigma_z": _POS,
        "z0": {"type": "number"},
        "omega": _POS,
    }
)

BLOCK_SCHEMAS = {
    "spectrum": _obj({"n_max": {"type": "integer", "minimum": 1, "maximum": 40}}),
    "hartree": _obj(
        {
            "Z": {"type": "number", "minimum": 1},
            "r_max": _POS,
            "grid_count": {"type": "integer", "minimum": 100},
            "tol": _POS,
            "mixing": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            "orbital_stride": {"type": "integer", "minimum": 1},
        }
    ),
    "fields": _obj(
        {
            "electrons": _VECS,
            "nuclei": _VECS,
            "Z": {"type": "array", "items": _POS},
            "radius": _POS,
            "probes": _VECS,
            "quadrature_oracle": {"type": "boolean"},
        }
    ),
    "trajectory": _obj(
        {
            "state": {"type": "object", "additionalProperties": False, "patternProperties": {"^[1-9][0-9]{2}[+-]?$": _COEFF}, "minProperties": 1},
            "anchor": _VEC,
            "t_span": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            "direction": {"enum": ["forward", "backward"]},
            "rtol": _POS,
            "atol": _POS,
            "samples": {"type": "integer", "minimum": 2},
            "pushforward_samples": {"type": "integer", "minimum": 0},
            "pushforward_t": {"type": "number", "minimum": 0},
        }
    ),
    "radiate": _obj(
        {
            "source": {"enum": ["oscillator", "born"]},
            "amplitude": {"type": "number"},
            "omega": {"type": "number", "minimum": 0},
            "born_q": _VEC,
            "pulse": _PULSE,
            "a": {"type": "number", "minimum": 0},
            "c": _POS,
            "t": _POS,
            "probes": _VECS,
            "k_vectors": _VECS,
            "kernel_R": {"type": "array", "items": _POS},
            "kernel_ct": {"type": "array", "items": {"type": "number", "minimum": 0}},
            "kernel_eta": {"oneOf": [_POS, {"type": "null"}]},
        }
    ),
    "perturb": _obj(
        {
            "preset": {"enum": ["desk", "laboratory", "custom"]},
            "pulse": _PULSE,
            "initial": _LABEL,
            "n_max": {"type": "integer", "minimum": 1, "maximum": 6},
            "samples": {"type": "integer", "minimum": 2},
            "sourced": {"type": "boolean"},
        }
    ),
    "photon": _obj(
        {
            "field": {"enum": ["plane_wave", "coulomb"]},
            "amplitude": _POS,
            "k": _VEC,
            "helicity": {"enum": [1, -1]},
            "electrons": _VECS,
            "nuclei": _VECS,
            "Z": {"type": "array", "items": _POS},
            "radius": _POS,
            "starts": {"type": "array", "items": _VEC, "minItems": 1},
            "t_end": _POS,
            "samples": {"type": "integer", "minimum": 2},
        }
    ),
    "audit": _obj({"commutator_samples": {"type": "integer", "minimum": 1}}),
    "selftest": _obj({"criteria": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 12}, "uniqueItems": True}}),
}

CONFIG_SCHEMA = _obj(
    {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": list(COMMANDS)},
        "units": {"enum": ["hartree", "si"]},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "out": {"type": "string"},
        "figures": {"type": "boolean"},
        **BLOCK_SCHEMAS,
    }
)

DEFAULTS = {
    "spectrum": {"n_max": 4},
    "hartree": {"Z": 1.0, "r_max": 60.0, "grid_count": 4000, "tol": 1e-10, "mixing": 0.3, "orbital_stride": 4},
    "fields": {
        "electrons": [[1.0, 0.0, 0.0]],
        "nuclei": [[0.0, 0.0, 0.0]],
        "Z": [1.0],
        "radius": 0.1,
        "probes": [[0.0, 0.0, 0.5], [2.0, 0.0, 0.0], [0.0, 3.0, 0.0]],
        "quadrature_oracle": True,
    },
    "trajectory": {
        "state": {"100+": 1.0, "210+": 1.0},
        "anchor": [1.0, 0.5, 0.5],
        "t_span": [0.0, 16.755160819145562],
        "direction": "forward",
        "rtol": 1e-10,
        "atol": 1e-12,
        "samples": 201,
        "pushforward_samples": 0,
        "pushforward_t": 16.755160819145562,
    },
    "radiate": {
        "source": "oscillator",
        "amplitude": 0.3,
        "omega": 0.375,
        "born_q": [0.5, 0.0, 0.0],
        "pulse": {},
        "a": 0.0,
        "c": C_LIGHT,
        "t": 20.0,
        "probes": [[2.0, 0.0, 0.0], [0.0, 3.0, 0.0], [1.0, 1.0, 1.0]],
        "k_vectors": [[0.5, 0.0, 0.0], [0.0, 1.0, 0.0], [0.3, -0.4, 1.2]],
        "kernel_R": [0.5, 1.0, 2.0],
        "kernel_ct": [0.0, 1.0, 2.0],
        "kernel_eta": None,
    },
    "perturb": {"preset": "desk", "pulse": {}, "initial": "211+", "n_max": 4, "samples": 401, "sourced": False},
    "photon": {
        "field": "plane_wave",
        "amplitude": 1.0,
        "k": [0.0, 0.0, 1.0],
        "helicity": 1,
        "electrons": [[1.0, 0.0, 0.0]],
        "nuclei": [[0.0, 0.0, 0.0]],
        "Z": [1.0],
        "radius": 0.1,
        "starts": [[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]],
        "t_end": 1.0,
        "samples": 201,
    },
    "audit": {"commutator_samples": 21},
    "selftest": {"criteria": list(range(1, 13))},
}


class ValidationFailure(SharpQMError, ValueError):
    """Invalid command line or configuration."""


def _validate(instance, schema, where: str):
    try:
        jsonschema.validate(instance, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ValidationFailure(f"{where}{'/' + path if path else ''}: {exc.message}") from None


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationFailure(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"config {path} is not valid JSON: {exc.msg} at line {exc.lineno}") from None
    _validate(data, CONFIG_SCHEMA, "config")
    return data


def resolve(command: str, file_cfg: dict, flags: dict) -> dict:
    """defaults <- config block <- flags, validated."""
    block = copy.deepcopy(DEFAULTS[command])
    block.update(copy.deepcopy(file_cfg.get(command, {})))
    block.update({k: v for k, v in flags.items() if v is not None})
    _validate(block, BLOCK_SCHEMAS[command], command)
    return block


# --------------------------------------------------------------------------
# output


_SI_SYMBOL = {"energy": "J", "length": "m", "time": "s", "frequency": "rad/s", "velocity": "m/s"}


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v) + 0.0, ".17g")  # no negative zero


def emit_plotdata(series: dict, path: str | None = None) -> bytes:
    """UTF-8 CSV with a header row, '\\n' newlines and 17 significant digits.

    Args:
        series: Ordered mapping column name -> sequence (equal lengths).
        path: Optional file to write; the bytes are returned either way.

    Raises:
        DomainError: columns of unequal length.
        OSError: the file cannot be written (message includes the path).
    """
    names = list(series)
    lengths = {len(series[n]) for n in names}
    if len(lengths) > 1:
        raise DomainError(f"columns have unequal lengths {sorted(lengths)}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in zip(*(series[n] for n in names)):
        w.writerow([_fmt(v) for v in row])
    data = buf.getvalue().encode("utf-8")
    if path is not None:
        try:
            _atomic_write(path, data)
        except OSError as exc:
            raise OSError(f"{path}: {exc}") from exc
    return data


def _atomic_write(path: str, data: bytes):
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o).__name__}")


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=True) + "\n").encode("utf-8")


@dataclass
class Table:
    """Named columns with a unit kind per column for SI conversion."""

    columns: list = field(default_factory=list)  # (name, kind, values)

    def add(self, name: str, values, kind: str = "dimensionless"):
        self.columns.append((name, kind, list(np.asarray(values).tolist()) if not isinstance(values, list) else values))
        return self

    def series(self, units: str) -> dict:
        out = {}
        for name, kind, vals in self.columns:
            if units == "si" and kind in _SI_SYMBOL:
                f = DEFAULT_SCALE.unit_si(kind)
                out[f"{name}[{_SI_SYMBOL[kind]}]"] = [v * f for v in vals]
            elif units == "si" and kind == "atomic":
                out[f"{name}[a.u.]"] = vals
            else:
                out[name] = vals
        return out


@dataclass
class RunResult:
    files: dict = field(default_factory=dict)  # name -> bytes
    tables: dict = field(default_factory=dict)  # name -> (Table, x, ys, logy)
    checks: dict = field(default_factory=dict)
    stdout: str = ""
    exit_code: int = 0

    def table(self, name: str, table: Table, x: str | None = None, ys=None, logy: bool = False):
        self.tables[name] = (table, x, ys, logy)

    def json(self, name: str, obj):
        self.files[name] = _json_bytes(obj)


# --------------------------------------------------------------------------
# subcommands


def spectrum_tables(n_max: int):
    from .hydrogen import bohr_energy, transition_frequency

    levels = [{"n": n, "degeneracy": n * n, "E_n": bohr_energy(n)} for n in range(1, n_max + 1)]
    trans = [
        {"n_upper": nu, "n_lower": nl, "omega": transition_frequency(nu, nl)}
        for nu in range(2, n_max + 1)
        for nl in range(1, nu)
    ]
    return levels, trans


def cmd_spectrum(cfg: dict, ctx) -> RunResult:
    levels, trans = spectrum_tables(cfg["n_max"])
    res = RunResult()
    lv = Table().add("n", [r["n"] for r in levels]).add("degeneracy", [r["degeneracy"] for r in levels])
    lv.add("E_n", [r["E_n"] for r in levels], "energy")
    tr = Table().add("n_upper", [r["n_upper"] for r in trans]).add("n_lower", [r["n_lower"] for r in trans])
    tr.add("omega", [r["omega"] for r in trans], "frequency")
    res.table("levels.csv", lv, "n", ["E_n"])
    res.table("transitions.csv", tr)
    res.checks["E_1 = -0.5"] = levels[0]["E_n"] == -0.5
    if cfg["n_max"] >= 2:
        res.checks["omega_21 = 0.375"] = trans[0]["omega"] == 0.375
    return res


def cmd_hartree(cfg: dict, ctx) -> RunResult:
    from .hartree import RadialGrid, energy_relations, scf_ground_state

    grid = RadialGrid(r_max=cfg["r_max"], count=cfg["grid_count"])
    scf = scf_ground_state(cfg["Z"], grid, mixing=cfg["mixing"], tol=cfg["tol"])
    rel = energy_relations(scf)
    report = {"result": scf.as_dict(), "relations": rel, "iteration_log": list(scf.log)}
    if ctx.units == "si":
        f = DEFAULT_SCALE.unit_si("energy")
        report["si_joule"] = {k: scf.as_dict()[k] * f for k in ("E_g", "F", "T", "V", "U")}
    res = RunResult()
    res.json("hartree.json", report)
    k = cfg["orbital_stride"]
    r = grid.r[::k]
    u = scf.state.u[::k]
    tab = Table().add("r", r, "length").add("u", u, "atomic").add("psi", u / (r * math.sqrt(4 * math.pi)), "atomic")
    res.table("orbital.csv", tab, "r", ["u"])
    res.checks.update({f"relation:{k}": bool(v) for k, v in rel["flags"].items()})
    return res


def _charge_config(cfg: dict):
    from .electrostatics import charges_from_spec

    return charges_from_spec(cfg["electrons"], cfg["nuclei"], cfg["Z"], cfg["radius"])


def cmd_fields(cfg: dict, ctx) -> RunResult:
    from .electrostatics import config_field, config_potential, field_energy_components, field_energy_quadrature

    conf = _charge_config(cfg)
    comps = field_energy_components(conf)
    report = {"components": comps, "field_energy": comps["total"]}
    res = RunResult()
    if cfg["quadrature_oracle"] and conf.N + conf.K > 0:
        quad = field_energy_quadrature(conf)
        report["quadrature_oracle"] = quad
        report["oracle_relative_difference"] = abs(quad - comps["total"]) / max(abs(comps["total"]), 1e-300)
        res.checks["oracle within 0.5%"] = report["oracle_relative_difference"] < 5e-3
    res.json("fields.json", report)
    P = np.asarray(cfg["probes"], float).reshape(-1, 3)
    phi = config_potential(conf, P) if len(P) else np.empty(0)
    E = config_field(conf, P) if len(P) else np.empty((0, 3))
    tab = Table()
    for i, n in enumerate("xyz"):
        tab.add(n, P[:, i], "length")
    tab.add("phi", phi, "atomic")
    for i, n in enumerate("xyz"):
        tab.add(f"E_{n}", E[:, i], "atomic")
    res.table("fields.csv", tab)
    return res


def _state(coeffs: dict):
    from .hydrogen import BoundSuperposition

    return BoundSuperposition.from_labels({k: complex(*v) if isinstance(v, list) else v for k, v in coeffs.items()})


def cmd_trajectory(cfg: dict, ctx) -> RunResult:
    from .bohm import integrate_trajectory, pushforward_density, wavefunction_field

    state = _state(cfg["state"])
    vf = wavefunction_field(state)
    t0, t1 = cfg["t_span"]
    if t1 <= t0:
        raise DomainError("t_span must be increasing")
    t_anchor = t0 if cfg["direction"] == "forward" else t1
    traj = integrate_trajectory(vf, (t_anchor, np.asarray(cfg["anchor"], float)), (t0, t1), cfg["direction"], cfg["rtol"], cfg["atol"])
    ts = np.linspace(t0, t1, cfg["samples"])
    Q = traj.position(ts)
    speed = np.array([np.linalg.norm(vf(t, q)) for t, q in zip(ts, Q)])
    rho = np.array([float(np.abs(state.value(t, q)) ** 2) for t, q in zip(ts, Q)])
    tab = Table().add("tau", ts, "time")
    for i, n in enumerate("xyz"):
        tab.add(f"Q_{n}", Q[:, i], "length")
    tab.add("speed", speed, "velocity").add("rho", rho, "atomic")
    res = RunResult()
    res.table("trajectory.csv", tab, "tau", ["Q_x", "Q_y", "Q_z"])
    if cfg["pushforward_samples"] > 0:
        rep = pushforward_density(state, vf, cfg["pushforward_t"], cfg["pushforward_samples"], seed=ctx.seed)
        res.json("pushforward.json", rep)
        res.checks["pushforward p > 0.01"] = rep["p_value"] > 0.01
    return res


def _pulse(cfg_pulse: dict, preset: str):
    from .pulse import LYMAN_ALPHA, GaussianPulse

    p = dict(cfg_pulse)
    if preset == "laboratory":
        return GaussianPulse.laboratory_preset(**({"coupling": p["coupling"]} if "coupling" in p else {}))
    if preset == "custom":
        missing = [k for k in ("amplitude", "sigma_z", "z0") if k not in p]
        if missing:
            raise ValidationFailure(f"custom pulse needs {missing}")
        return GaussianPulse(p["amplitude"], p["sigma_z"], p["z0"], p.get("omega", LYMAN_ALPHA), C_LIGHT)
    rename = {"coupling": "coupling", "sigma_wavelengths": "sigma_in_wavelengths", "z0_sigmas": "z0_in_sigmas"}
    return GaussianPulse.desk_scale(**{rename[k]: v for k, v in p.items() if k in rename})


def cmd_radiate(cfg: dict, ctx) -> RunResult:
    from .bohm import Trajectory
    from .radiation import SourceContext, apot_position, bfield_position, born_context, efield_position, fourier_fields, kernel_table

    t = cfg["t"]
    if cfg["source"] == "oscillator":
        A, w = cfg["amplitude"], cfg["omega"]
        traj = Trajectory.from_functions(
            lambda s: np.stack([A * np.sin(w * s), 0 * s, 0 * s], -1),
            lambda s: np.stack([A * w * np.cos(w * s), 0 * s, 0 * s], -1),
            0.0,
            t + 1.0,
            samples=401,
        )
        src = SourceContext(traj, cfg["a"], cfg["c"])
    else:
        src = born_context(cfg["born_q"], t + 1.0, _pulse(cfg["pulse"], "desk"), a=cfg["a"])
    P = np.asarray(cfg["probes"], float).reshape(-1, 3)
    rows = [(apot_position(src, t, p), efield_position(src, t, p), bfield_position(src, t, p)) for p in P]
    tab = Table()
    for i, n in enumerate("xyz"):
        tab.add(n, P[:, i], "length")
    for j, f in enumerate("AEB"):
        for i, n in enumerate("xyz"):
            tab.add(f"{f}_{n}", [r[j][i] for r in rows], "atomic")
    res = RunResult()
    res.table("radiate.csv", tab)
    K = np.asarray(cfg["k_vectors"], float).reshape(-1, 3)
    ft = Table()
    for i, n in enumerate("xyz"):
        ft.add(f"k_{n}", K[:, i], "atomic")
    if len(K):
        smp = fourier_fields(src, t, K)
        for f in "EBA":
            arr = getattr(smp, f)
            for i, n in enumerate("xyz"):
                ft.add(f"Re_{f}_{n}", arr[:, i].real, "atomic").add(f"Im_{f}_{n}", arr[:, i].imag, "atomic")
        for f in "EBA":
            ft.add(f"transversality_{f}", getattr(smp, f"div_{f}"))
        res.checks["fourier transversality < 1e-8"] = bool(max(float(getattr(smp, f"div_{f}").max()) for f in "EBA") < 1e-8)
    res.table("fourier.csv", ft)
    kt = kernel_table(cfg["kernel_R"], cfg["kernel_ct"], cfg["kernel_eta"])
    kk = Table().add("R", [r["R"] for r in kt], "length").add("ct", [r["ct"] for r in kt], "length")
    kk.add("kernel", [r["kernel"] for r in kt])
    if cfg["kernel_eta"] is not None:
        kk.add("regularized", [r["regularized"] for r in kt])
    res.table("kernel.csv", kk)
    return res


def cmd_perturb(cfg: dict, ctx) -> RunResult:
    from .hydrogen import QuantumNumbers
    from .perturbation import amplitude_evolution, asymptotic_amplitude, default_basis, suppression_report

    pulse = _pulse(cfg["pulse"], cfg["preset"])
    initial = QuantumNumbers.parse(cfg["initial"])
    basis = [b for b in default_basis(cfg["n_max"]) if b.label != initial.label]
    sup = suppression_report(pulse)
    sup["ratio_symbolic"] = f"exp({sup['log_ratio']:.6g})"
    report = {
        "pulse": {"amplitude": pulse.amplitude, "sigma_z": pulse.sigma_z, "z0": pulse.z0, "omega": pulse.omega, "c": pulse.c, "coupling": pulse.coupling},
        "initial": initial.label,
        "suppression": sup,
        "asymptotic": {},
    }
    for b in basis:
        co, counter = asymptotic_amplitude(initial, b, pulse, split=True)
        report["asymptotic"][b.label] = {"co": [co.real, co.imag], "counter": [counter.real, counter.imag], "probability": abs(co + counter) ** 2}
    total = sum(v["probability"] for v in report["asymptotic"].values())
    report["asymptotic_total_probability"] = total
    report["first_order_budget_exceeded"] = total > 0.1
    res = RunResult()
    if cfg["preset"] == "laboratory":
        report["time_series"] = "closed form only at laboratory scale"
        res.json("perturb.json", report)
        return res
    amps = amplitude_evolution(initial, pulse, basis, times=None if cfg["samples"] == 401 else _times(pulse, cfg["samples"]), sourced={} if cfg["sourced"] else None)
    prob = amps.probabilities()
    tab = Table().add("t", amps.times, "time")
    for lab, row in zip(amps.labels, prob):
        tab.add(f"P_{lab}", row)
    res.table("perturb.csv", tab, "t", [f"P_{lab}" for lab in amps.labels], logy=False)
    dep = Table().add("t", amps.times, "time").add("depletion", amps.depletion())
    res.table("depletion.csv", dep, "t", ["depletion"])
    report["final"] = {lab: {"amplitude": [complex(amps.free[i, -1]).real, complex(amps.free[i, -1]).imag], "probability": float(prob[i, -1])} for i, lab in enumerate(amps.labels)}
    report["flags"] = list(amps.flags)
    worst = max((abs(abs(amps.final(lab)) ** 2 - report["asymptotic"][lab]["probability"]) for lab in amps.labels), default=0.0)
    report["max_asymptotic_deviation"] = worst
    res.checks["first-order budget sum|c|^2 <= 0.1"] = float(amps.depletion()[-1]) <= 0.1
    res.json("perturb.json", report)
    return res


def _times(pulse, n: int):
    t_end = pulse.flight_time() + 20 * pulse.sigma_z / pulse.c
    return np.linspace(0.0, t_end, n)


def cmd_photon(cfg: dict, ctx) -> RunResult:
    from .photon import WeberField, integrate_photon

    if cfg["field"] == "plane_wave":
        fld = WeberField.plane_wave(cfg["amplitude"], cfg["k"], cfg["helicity"])
    else:
        fld = WeberField.coulomb(_charge_config(cfg))
    res = RunResult()
    summary = []
    for i, start in enumerate(cfg["starts"]):
        path = integrate_photon(fld, start, None, (0.0, cfg["t_end"]), samples=cfg["samples"])
        Q = path.trajectory.position(path.times)
        tab = Table().add("t", path.times, "time")
        for j, n in enumerate("xyz"):
            tab.add(n, Q[:, j], "length")
        tab.add("speed", path.speeds, "velocity")
        res.table(f"photon_{i}.csv", tab, "t", ["x", "y", "z"])
        summary.append({"start": start, "max_speed_over_c": path.max_speed / C_LIGHT})
    res.json("photon.json", {"field": cfg["field"], "paths": summary})
    res.checks["speed <= c(1+1e-9)"] = all(s["max_speed_over_c"] <= 1 + 1e-9 for s in summary)
    return res


def cmd_audit(cfg: dict, ctx) -> RunResult:
    from . import audit_cases as ac

    report = ac.collect()
    report["commutator_zero"] = ac.commutator_zero_cases()
    series, ehr = ac.commutator_cases(cfg["commutator_samples"])
    report["commutator_series"] = series
    report["ehrenfest_deviation"] = ehr
    res = RunResult()
    res.json("audit.json", report)
    for name, ok, _ in ac.run_cases(report):
        res.checks[name] = ok
    res.checks["Ehrenfest oracle < 1e-5"] = ehr < 1e-5
    return res


def cmd_selftest(cfg: dict, ctx) -> RunResult:
    from .acceptance import format_table, run_all

    rows = run_all(cfg["criteria"])
    res = RunResult()
    res.stdout = format_table(rows) + "\n"
    res.json("selftest.json", [{"criterion": r.criterion, "name": r.name, "passed": r.passed, "detail": r.detail} for r in rows])
    for r in rows:
        res.checks[f"C{r.criterion:02d} {r.name}"] = r.passed
    res.exit_code = 0 if all(r.passed for r in rows) else 1
    return res


HANDLERS = {
    "spectrum": cmd_spectrum,
    "hartree": cmd_hartree,
    "fields": cmd_fields,
    "trajectory": cmd_trajectory,
    "radiate": cmd_radiate,
    "perturb": cmd_perturb,
    "photon": cmd_photon,
    "audit": cmd_audit,
    "selftest": cmd_selftest,
}


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationFailure(message)


def _vec(text: str) -> list[float]:
    parts = text.replace(",", " ").split()
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three numbers, got {text!r}")
    return [float(p) for p in parts]


def _state_arg(text: str) -> dict:
    out = {}
    for item in text.split(","):
        lab, _, val = item.partition(":")
        out[lab.strip()] = float(val) if val else 1.0
    return out


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--config", default=argparse.SUPPRESS, help="JSON run configuration")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (u64)")
    g.add_argument("--units", choices=["hartree", "si"], default=argparse.SUPPRESS)
    g.add_argument("--figures", action="store_true", default=argparse.SUPPRESS, help="also render PNG figures next to the CSVs")

    p = _Parser(prog="sharpqm", description="Sharp-field hydrogen laboratory.", parents=[common])
    p.add_argument("--version", action="version", version=f"sharpqm {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("spectrum", parents=[common], help="Bohr levels and transition frequencies")
    s.add_argument("--n-max", dest="n_max", type=int)

    s = sub.add_parser("hartree", parents=[common], help="Hartree self-consistent ground state")
    s.add_argument("--Z", dest="Z", type=float)
    s.add_argument("--tol", type=float)

    s = sub.add_parser("fields", parents=[common], help="electrostatic fields and energy of ball charges")
    s.add_argument("--radius", type=float)
    s.add_argument("--electron", dest="electrons", type=_vec, action="append")
    s.add_argument("--probe", dest="probes", type=_vec, action="append")

    s = sub.add_parser("trajectory", parents=[common], help="guided trajectory of a bound superposition")
    s.add_argument("--state", type=_state_arg, help='e.g. "100+:1,210+:1"')
    s.add_argument("--anchor", type=_vec)
    s.add_argument("--t-end", dest="t_end", type=float)
    s.add_argument("--direction", choices=["forward", "backward"])
    s.add_argument("--pushforward", dest="pushforward_samples", type=int)

    s = sub.add_parser("radiate", parents=[common], help="radiation fields of a moving source")
    s.add_argument("--source", choices=["oscillator", "born"])
    s.add_argument("--t", type=float)
    s.add_argument("--a", type=float)
    s.add_argument("--probe", dest="probes", type=_vec, action="append")

    s = sub.add_parser("perturb", parents=[common], help="first-order amplitudes under a Gaussian pulse")
    s.add_argument("--preset", choices=["desk", "laboratory", "custom"])
    s.add_argument("--initial")
    s.add_argument("--n-max", dest="n_max", type=int)
    s.add_argument("--samples", type=int)
    s.add_argument("--sourced", action="store_true", default=None)

    s = sub.add_parser("photon", parents=[common], help="guided photon paths")
    s.add_argument("--field", choices=["plane_wave", "coulomb"])
    s.add_argument("--start", dest="starts", type=_vec, action="append")
    s.add_argument("--t-end", dest="t_end", type=float)

    s = sub.add_parser("audit", parents=[common], help="energy-momentum audits and diagnostics")
    s.add_argument("--commutator-samples", dest="commutator_samples", type=int)

    s = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    s.add_argument("--criteria", type=lambda x: [int(v) for v in x.split(",")])
    return p


_GLOBAL = ("config", "out", "seed", "units", "figures", "command")


@dataclass
class RunContext:
    command: str
    units: str
    seed: int
    out: str
    figures: bool


def _flags(ns: argparse.Namespace) -> dict:
    flags = {k: v for k, v in vars(ns).items() if k not in _GLOBAL}
    if ns.command == "trajectory" and flags.pop("t_end", None) is not None:
        flags["t_span"] = [0.0, ns.t_end]
    return flags


def _error(exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}) + "\n")
    return code


def run(argv=None) -> int:
    t_start = time.perf_counter()
    try:
        ns = build_parser().parse_args(argv)
        file_cfg = load_config(getattr(ns, "config", None))
        command = ns.command
        if "command" in file_cfg and file_cfg["command"] != command:
            raise ValidationFailure(f"config is for {file_cfg['command']!r}, not {command!r}")
        ctx = RunContext(
            command,
            getattr(ns, "units", file_cfg.get("units", "hartree")),
            getattr(ns, "seed", file_cfg.get("seed", 0)),
            getattr(ns, "out", file_cfg.get("out", "sharpqm-out")),
            getattr(ns, "figures", file_cfg.get("figures", False)),
        )
        if not 0 <= ctx.seed < 2**64:
            raise ValidationFailure("seed must be an unsigned 64-bit integer")
        block = resolve(command, file_cfg, _flags(ns))
        result = HANDLERS[command](block, ctx)
    except (ValidationFailure, DomainError, PreconditionError, UnsupportedError) as exc:
        return _error(exc, 2)
    except (ConvergenceError, StepLimitError, NodeProximityError, InvariantError) as exc:
        # numerical failures of an otherwise valid run
        return _error(exc, 3)

    files = dict(result.files)
    for name, (table, x, ys, logy) in result.tables.items():
        series = table.series(ctx.units)
        files[name] = emit_plotdata(series)
        if ctx.figures and x is not None and ys and len(series[next(iter(series))]) > 0:
            from .plotting import render_png

            keys = list(series)
            names = [c[0] for c in table.columns]
            files[name[:-4] + ".png"] = render_png(series, keys[names.index(x)], [keys[names.index(y)] for y in ys], name, logy)
    os.makedirs(ctx.out, exist_ok=True)
    inventory = []
    for name in sorted(files):
        _atomic_write(os.path.join(ctx.out, name), files[name])
        inventory.append({"path": name, "sha256": hashlib.sha256(files[name]).hexdigest(), "bytes": len(files[name])})
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool": "sharpqm",
        "version": __version__,
        "command": ctx.command,
        "config": {
            "schema_version": SCHEMA_VERSION,
            "command": ctx.command,
            "units": ctx.units,
            "seed": ctx.seed,
            "figures": ctx.figures,
            ctx.command: block,
        },
        "wall_clock_seconds": time.perf_counter() - t_start,
        "checks": result.checks,
        "outputs": inventory,
    }
    _atomic_write(os.path.join(ctx.out, "manifest.json"), _json_bytes(manifest))
    if result.stdout:
        sys.stdout.write(result.stdout)
    return result.exit_code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

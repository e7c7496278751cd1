"""Experiment harness: config ingestion, dispatch, and run persistence.

A run is fully determined by a JSON config document.  The harness parses
it strictly (unknown keys are errors), fills documented defaults, runs
the corresponding pipeline, and always writes a manifest -- even when the
pipeline fails, in which case the error is recorded in it.  Output layout
under `<out>/<run-id>/`:

* ``manifest.json``   config echo, code version, wall time, criteria,
                      value table, file inventory, error (if any);
* ``data/*.csv``      full-precision tables (one row per snapshot/window);
* ``plots/*.csv``     two-column (x, y) series ready for any plotting tool.

Experiment kinds: ``mean``, ``corrector``, ``wave``, ``spread``,
``random``, ``validate-solver``, ``bump``.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .barriers import build_bump, halton_triples
from .errors import ConfigError, KppLabError, RejectionError
from .randomenv import (RandomEnvironmentModel, least_mean_concentration,
                        shift_covariance_check)
from .reactions import (CubicPerturbed, ExactWaveFamily, Logistic,
                        load_tabulated_reaction)
from .signals import (BlockRandom, Constant, PiecewiseConstant, Sinusoid,
                      build_corrector, least_mean, no_uniform_mean_signal)
from .solver import Grid1D, solve_profile_frame
from .spreading import spreading_experiment
from .waves import construct_wave, wave_diagnostics

KINDS = ("mean", "corrector", "wave", "spread", "random", "validate-solver",
         "bump")

_TOP_KEYS = {"kind", "environment", "reaction", "settings", "out", "seed",
             "run_id"}

_SIGNAL_KEYS = {
    "constant": {"value"},
    "sinusoid": {"offset", "amp", "omega", "phase"},
    "piecewise": {"knots", "values"},
    "blocks": {"dist", "lo", "hi", "block"},
    "no-uniform-mean": {"n_stages", "lo", "mid", "hi"},
}

_REACTION_KEYS = {
    "logistic": set(),
    "cubic": {"alpha"},
    "table": {"path"},
}

_DEFAULT_SETTINGS = {
    "mean": {"domain": "whole-line", "horizon": 256.0,
             "window_schedule": None, "stride_divisor": 64},
    "corrector": {"block_length": 1.0, "n_blocks": 8, "shift": 0.0,
                  "residual_tol": 1e-8},
    "wave": {"gamma": 3.2, "window": [20.0, 30.0], "snap_dt": 0.5,
             "n_schedule": [10, 20, 40, 80], "threshold": 1e-4,
             "z_halfspan": 60.0, "dz": None, "comparison_tol": 1e-4,
             "decay_tol": 0.05},
    "spread": {"t_end": 100.0, "r_max": 500.0, "dz": 0.1,
               "datum_radius": 10.0, "snap_dt": 1.0, "inner_speeds": [2.5],
               "envelope_sigma": 0.5, "inner_target": 0.99,
               "outer_tol": 1e-3, "overlay": None, "overlay_tol": 1e-4},
    "random": {"lo": 1.5, "hi": 2.5, "block": 1.0, "gamma": 3.2,
               "shift": 3.5, "horizons": [1.0e3, 4.0e3], "n_seeds": 20,
               "window": [20.0, 30.0], "n_schedule": [10, 20, 40, 80],
               "profile_factor": 5.0},
    "validate-solver": {"alpha": 2.0, "xi_amp": 0.3, "xi_omega": 1.0,
                        "t_end": 4.0 * math.pi, "dz_list": [0.05, 0.025],
                        "halfspan": 30.0, "error_tol": 1e-3,
                        "ratio_range": [3.0, 5.0]},
    "bump": {"beta": 1.0, "sigma": 3.0, "theta": 0.5, "n_samples": 1000,
             "n_check": 10000, "join_tol": 1e-8},
}

_OVERLAY_KEYS = {"epsilon", "gamma_run", "t_launch", "block_length",
                 "n_blocks"}


def _check_keys(d, allowed, where):
    for k in d:
        if k not in allowed:
            raise ConfigError(f"unknown key {k!r} in {where}")


@dataclass
class RunConfig:
    """Everything a run needs; two runs of equal configs agree."""

    kind: str
    environment: dict = field(default_factory=lambda: {"signal": "constant",
                                                       "value": 1.0})
    reaction: dict = field(default_factory=lambda: {"kind": "logistic"})
    settings: dict = field(default_factory=dict)
    out: str = "out"
    seed: int = 0
    run_id: str | None = None

    def emit(self):
        doc = {"kind": self.kind, "environment": self.environment,
               "reaction": self.reaction, "settings": self.settings,
               "out": self.out, "seed": self.seed}
        if self.run_id is not None:
            doc["run_id"] = self.run_id
        return json.dumps(doc, indent=2, sort_keys=True)

    def resolved_run_id(self):
        if self.run_id:
            return self.run_id
        doc = json.loads(self.emit())
        doc.pop("out", None)  # where results land must not rename the run
        digest = hashlib.sha1(
            json.dumps(doc, sort_keys=True).encode()).hexdigest()[:10]
        return f"{self.kind}-{digest}"


def parse_config(text):
    """Strict parse: unknown keys raise, defaults are filled and echoed."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(doc, _TOP_KEYS, "config")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}; "
                          f"expected one of {KINDS}")
    env = dict(doc.get("environment", {"signal": "constant", "value": 1.0}))
    sig_kind = env.get("signal")
    if sig_kind not in _SIGNAL_KEYS:
        raise ConfigError(f"unknown signal {sig_kind!r} in environment")
    _check_keys(env, _SIGNAL_KEYS[sig_kind] | {"signal"}, "environment")

    rx = dict(doc.get("reaction", {"kind": "logistic"}))
    rx_kind = rx.get("kind")
    if rx_kind not in _REACTION_KEYS:
        raise ConfigError(f"unknown reaction kind {rx_kind!r}")
    _check_keys(rx, _REACTION_KEYS[rx_kind] | {"kind"}, "reaction")

    settings = dict(_DEFAULT_SETTINGS[kind])
    user = doc.get("settings", {})
    _check_keys(user, set(settings), f"settings of kind {kind!r}")
    settings.update(user)
    if kind == "spread" and settings["overlay"] is not None:
        _check_keys(settings["overlay"], _OVERLAY_KEYS, "settings.overlay")

    return RunConfig(kind=kind, environment=env, reaction=rx,
                     settings=settings, out=str(doc.get("out", "out")),
                     seed=int(doc.get("seed", 0)),
                     run_id=doc.get("run_id"))


def signal_from_config(env, seed=0):
    kind = env["signal"]
    if kind == "constant":
        return Constant(float(env.get("value", 1.0)))
    if kind == "sinusoid":
        return Sinusoid(float(env.get("offset", 2.0)),
                        float(env.get("amp", 1.0)),
                        float(env.get("omega", 1.0)),
                        float(env.get("phase", 0.0)))
    if kind == "piecewise":
        return PiecewiseConstant(tuple(env["knots"]), tuple(env["values"]))
    if kind == "blocks":
        return BlockRandom(env.get("dist", "uniform"),
                           float(env.get("lo", 1.5)),
                           float(env.get("hi", 2.5)), int(seed),
                           float(env.get("block", 1.0)))
    if kind == "no-uniform-mean":
        return no_uniform_mean_signal(int(env.get("n_stages", 5)),
                                      float(env.get("lo", 1.0)),
                                      float(env.get("mid", 2.0)),
                                      float(env.get("hi", 3.0)))
    raise ConfigError(f"unknown signal {kind!r}")


def reaction_from_config(rx, env_signal):
    kind = rx["kind"]
    if kind == "logistic":
        return Logistic(env_signal)
    if kind == "cubic":
        return CubicPerturbed(float(rx.get("alpha", 2.0)), env_signal)
    if kind == "table":
        return load_tabulated_reaction(rx["path"], env_signal)
    raise ConfigError(f"unknown reaction kind {kind!r}")


@dataclass
class RunManifest:
    """Always emitted; records everything needed to audit the run."""

    run_id: str
    config: dict
    version: str
    wall_time: float
    criteria: dict
    values: dict
    files: list
    error: dict | None = None

    @property
    def passed(self):
        return self.error is None and all(self.criteria.values())

    @property
    def exit_code(self):
        if self.error is not None:
            return 2
        return 0 if self.passed else 1

    def to_json(self):
        doc = {"run_id": self.run_id, "config": self.config,
               "version": self.version, "wall_time": self.wall_time,
               "criteria": self.criteria, "passed": self.passed,
               "values": self.values, "files": self.files,
               "error": self.error}
        return json.dumps(doc, indent=2, sort_keys=True, default=float)


def _write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _write_series(path, x, y, names=("x", "y")):
    _write_csv(path, names, zip((float(v) for v in x),
                                (float(v) for v in y)))


class _Emitter:
    def __init__(self, root):
        self.root = Path(root)
        self.files = []

    def csv(self, rel, header, rows):
        path = self.root / rel
        _write_csv(path, header, rows)
        self.files.append(rel)

    def series(self, rel, x, y, names=("x", "y")):
        path = self.root / rel
        _write_series(path, x, y, names)
        self.files.append(rel)


def run(config, out=None, seed=None):
    """Execute one experiment; emit manifest + CSVs; never raise on
    pipeline failure (the manifest records it instead)."""
    if isinstance(config, str):
        config = parse_config(config)
    if out is not None:
        config.out = str(out)
    if seed is not None:
        config.seed = int(seed)
    if config.kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {config.kind!r}")
    config.settings = {**_DEFAULT_SETTINGS[config.kind], **config.settings}
    run_id = config.resolved_run_id()
    root = Path(config.out) / run_id
    root.mkdir(parents=True, exist_ok=True)
    em = _Emitter(root)
    t0 = time.perf_counter()
    criteria, values, error = {}, {}, None
    try:
        pipeline = _PIPELINES[config.kind]
        criteria, values = pipeline(config, em)
    except KppLabError as exc:
        error = {"type": type(exc).__name__, "message": str(exc)}
    except Exception as exc:  # noqa: BLE001 - recorded, not swallowed silently
        error = {"type": type(exc).__name__, "message": str(exc)}
    manifest = RunManifest(run_id=run_id,
                           config=json.loads(config.emit()),
                           version=__version__,
                           wall_time=time.perf_counter() - t0,
                           criteria=criteria, values=values,
                           files=sorted(em.files), error=error)
    (root / "manifest.json").write_text(manifest.to_json())
    return manifest


# --- pipelines ------------------------------------------------------------

def _run_mean(config, em):
    sig = signal_from_config(config.environment, config.seed)
    s = config.settings
    rep = least_mean(sig, domain=s["domain"], horizon=float(s["horizon"]),
                     window_schedule=s["window_schedule"],
                     stride_divisor=int(s["stride_divisor"]))
    table = rep.window_table
    em.csv("data/least_mean.csv",
           ["window", "inf_window_mean", "sup_window_mean"],
           [(float(T), float(lo), float(hi)) for T, lo, hi in table])
    em.series("plots/window_means.csv", [T for T, _, _ in table],
              [lo for _, lo, _ in table], names=("window", "inf_mean"))
    values = {"lower_least_mean": rep.lower_least_mean,
              "upper_mean": rep.upper_mean, "horizon": rep.horizon}
    return {"measured": True}, values


def _run_corrector(config, em):
    sig = signal_from_config(config.environment, config.seed)
    s = config.settings
    T = float(s["block_length"])
    cor = build_corrector(sig, T, n_blocks=int(s["n_blocks"]),
                          shift=float(s["shift"]))
    t, a = cor.samples(0.0, int(s["n_blocks"]) * T)
    em.series("data/corrector.csv", t, a, names=("t", "A"))
    em.series("plots/corrector.csv", t, a, names=("t", "A"))
    em.series("data/residual.csv", t, cor.residual(t), names=("t", "Apluss"))
    b_sup = max(abs(sig.ess_lo), abs(sig.ess_hi))
    values = {"sup_norm": cor.sup_norm, "bound": 2.0 * T * b_sup,
              "ess_inf_residual": cor.ess_inf_residual,
              "min_block_mean": float(np.min(cor.block_means))}
    criteria = {
        "sup-norm-within-bound": cor.sup_norm <= 2.0 * T * b_sup + 1e-12,
        "residual-floor-matches": abs(cor.ess_inf_residual
                                      - values["min_block_mean"])
                                  <= float(s["residual_tol"]),
    }
    return criteria, values


def _run_wave(config, em):
    sig = signal_from_config(config.environment, config.seed)
    rx = reaction_from_config(config.reaction, sig)
    s = config.settings
    try:
        bundle = construct_wave(rx, float(s["gamma"]),
                                window=tuple(s["window"]),
                                snap_dt=float(s["snap_dt"]),
                                n_schedule=list(s["n_schedule"]),
                                z_halfspan=float(s["z_halfspan"]),
                                dz=s["dz"], threshold=float(s["threshold"]))
    except RejectionError as exc:
        # an inadmissible speed is a verdict, not a failure of the run
        return {}, {"rejected": True, "reason": str(exc)}
    diag = wave_diagnostics(bundle)
    z = bundle.grid.nodes()
    em.csv("data/profile.csv",
           ["t"] + [f"z={zz:.6g}" for zz in z],
           [(float(t),) + tuple(float(v) for v in row)
            for t, row in zip(bundle.times, bundle.profile)])
    em.series("plots/profile.csv", z, bundle.profile[-1], names=("z", "u"))
    ts = np.linspace(bundle.times[0], bundle.times[-1], 257)
    em.series("plots/speed.csv", ts, bundle.speed(ts), names=("t", "c"))
    em.csv("data/convergence.csv", ["n_prev", "n", "gap"],
           [(a, b, float(g)) for a, b, g in bundle.convergence_table])
    tol = float(s["comparison_tol"])
    values = {"rejected": False, "kappa": bundle.kappa,
              "final_gap": bundle.convergence_table[-1][2],
              "decay_rate": diag.decay_rate,
              "monotone_defect": diag.monotone_defect,
              "lower_violation": diag.comparison.lower_violation,
              "upper_violation": diag.comparison.upper_violation}
    criteria = {
        "converged": bundle.converged,
        "is-front": diag.is_front(),
        "ordered-between-barriers": diag.comparison.within(tol),
        "tail-decay-matches-kappa":
            abs(diag.decay_rate - bundle.kappa)
            <= float(s["decay_tol"]) * bundle.kappa,
    }
    return criteria, values


def _run_spread(config, em):
    sig = signal_from_config(config.environment, config.seed)
    rx = reaction_from_config(config.reaction, sig)
    s = config.settings
    rep = spreading_experiment(rx, t_end=float(s["t_end"]),
                               r_max=float(s["r_max"]), dz=float(s["dz"]),
                               datum_radius=float(s["datum_radius"]),
                               snap_dt=float(s["snap_dt"]),
                               inner_speeds=tuple(s["inner_speeds"]),
                               envelope_sigma=float(s["envelope_sigma"]),
                               overlay=s["overlay"])
    ts = rep.trace.times
    em.series("data/front.csv", ts, rep.trace.positions,
              names=("t", "front_position"))
    em.series("plots/front.csv", ts, rep.trace.positions,
              names=("t", "front_position"))
    em.series("data/outer_sup.csv", rep.trajectory.times[1:], rep.outer_sup,
              names=("t", "sup_outside_envelope"))
    grid = rep.trajectory.grid
    em.series("plots/final_profile.csv", grid.nodes(),
              rep.trajectory.states[-1], names=("r", "u"))
    values = {"lower_threshold": rep.lower_threshold,
              "final_outer_sup": float(rep.outer_sup[-1]),
              "final_front": float(rep.trace.positions[-1])}
    criteria = {"outer-tail-below-envelope":
                float(rep.outer_sup[-1]) <= float(s["outer_tol"])}
    for c, inf_v in zip(rep.inner_speeds, rep.inner_inf):
        values[f"inner_inf_{c:g}"] = float(inf_v)
        criteria[f"filled-behind-speed-{c:g}"] = \
            float(inf_v) >= float(s["inner_target"])
    if rep.overlay is not None:
        values["overlay_violation"] = rep.overlay.max_violation
        values["overlay_scale"] = rep.overlay.scale
        criteria["subsolution-stays-below"] = \
            rep.overlay.max_violation <= float(s["overlay_tol"])
    return criteria, values


def _run_random(config, em):
    s = config.settings
    model = RandomEnvironmentModel("uniform", float(s["lo"]), float(s["hi"]),
                                   float(s["block"]))
    cov = shift_covariance_check(model, float(s["gamma"]), float(s["shift"]),
                                 seed=config.seed,
                                 window=tuple(s["window"]),
                                 n_schedule=list(s["n_schedule"]))
    seeds = range(config.seed, config.seed + int(s["n_seeds"]))
    conc = least_mean_concentration(model, seeds=seeds,
                                    horizons=tuple(s["horizons"]))
    em.csv("data/concentration.csv",
           ["horizon"] + [f"seed{j}" for j in conc.seeds],
           [(float(h),) + tuple(float(v) for v in conc.estimates[i])
            for i, h in enumerate(conc.horizons)])
    em.series("plots/spread_vs_horizon.csv", conc.horizons, conc.spreads,
              names=("horizon", "across_seed_spread"))
    z = cov.shifted.grid.nodes()
    em.series("plots/profile.csv", z, cov.shifted.profile[-1],
              names=("z", "u"))
    values = {"speed_defect": cov.speed_defect,
              "profile_defect": cov.profile_defect,
              "spreads": [float(v) for v in conc.spreads]}
    criteria = {
        "speed-shift-exact": cov.speed_defect == 0.0,
        "profile-shift-within-tolerance":
            cov.profile_defect <= float(s["profile_factor"]) * cov.threshold,
        "estimates-concentrate": conc.narrows(),
    }
    return criteria, values


def _run_validate_solver(config, em):
    s = config.settings
    xi = Sinusoid(0.0, float(s["xi_amp"]), float(s["xi_omega"]), 0.0)
    fam = ExactWaveFamily(float(s["alpha"]), xi)
    rx = fam.reaction()
    speed = xi.affine(1.0, fam.c0)
    t_end = float(s["t_end"])
    half = float(s["halfspan"])
    rows = []
    for dz in s["dz_list"]:
        dz = float(dz)
        n = int(round(2 * half / dz)) + 1
        grid = Grid1D(-half, half, n)
        z = grid.nodes()
        u0 = fam.profile(z)
        snaps = np.linspace(0.0, t_end, 9)
        traj = solve_profile_frame(rx, speed, grid, 0.0, t_end, u0,
                                   snaps, dt=dz * dz,
                                   left=1.0, right=float(fam.profile(half)),
                                   correct_advection=True)
        # in the frame moving with the full speed the exact profile is fixed
        err = float(np.max(np.abs(traj.states - fam.profile(z)[None, :])))
        rows.append((dz, err))
    ratios = [rows[i][1] / rows[i + 1][1] for i in range(len(rows) - 1)]
    em.csv("data/order.csv", ["dz", "max_error"], rows)
    em.series("plots/order.csv", [r[0] for r in rows], [r[1] for r in rows],
              names=("dz", "max_error"))
    lo, hi = (float(v) for v in s["ratio_range"])
    values = {"errors": [float(e) for _, e in rows],
              "ratios": [float(r) for r in ratios]}
    criteria = {
        "finest-error-within-tolerance":
            rows[0][1] <= float(s["error_tol"]),
        "second-order-refinement":
            all(lo <= r <= hi for r in ratios) if ratios else False,
    }
    return criteria, values


def _run_bump(config, em):
    s = config.settings
    beta, sigma, theta = (float(s[k]) for k in ("beta", "sigma", "theta"))
    bump = build_bump(beta, sigma, theta)
    r_nodes = np.linspace(0.0, bump.r, int(s["n_check"]) + 2)[1:-1]
    worst = bump.worst_operator_value(r_nodes)
    em.series("plots/bump.csv", r_nodes, bump.value(r_nodes), names=("r", "h"))
    em.series("data/worst_operator.csv", r_nodes, worst,
              names=("r", "worst_case_operator"))
    # C2 joins at the cutoff onset, the plateau edge, and the origin
    step = 1e-7
    join_defect = 0.0
    for r0 in (bump.s0 / bump.eps, bump.r, 0.0):
        for f in (bump.value, bump.prime, bump.second):
            join_defect = max(join_defect,
                              abs(float(f(r0 + step)) - float(f(r0 - step))))
    triples = halton_triples(int(s["n_samples"]), beta, sigma, theta)
    min_sample = math.inf
    for a, q, c in triples:
        min_sample = min(min_sample,
                         float(np.min(bump.operator_value(a, q, c, r_nodes))))
    values = {"n": bump.n, "eps": bump.eps, "r": bump.r,
              "margin": bump.margin, "min_worst_operator": float(np.min(worst)),
              "min_sampled_operator": min_sample,
              "join_defect": join_defect}
    criteria = {
        "strictly-positive-operator": float(np.min(worst)) > 0.0
                                      and min_sample > 0.0,
        "c2-joins": join_defect <= float(s["join_tol"]),
    }
    return criteria, values


_PIPELINES = {
    "mean": _run_mean,
    "corrector": _run_corrector,
    "wave": _run_wave,
    "spread": _run_spread,
    "random": _run_random,
    "validate-solver": _run_validate_solver,
    "bump": _run_bump,
}

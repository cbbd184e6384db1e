"""Command-line front end.

Four commands drive the pipeline on a strict key-value config file:

    vacmirror analyze    --config run.cfg --out outdir
    vacmirror stability  --config run.cfg --out outdir
    vacmirror simulate   --config run.cfg --out outdir
    vacmirror crosscheck --config run.cfg --out outdir

Exit codes: 0 success (including scientifically expected divergence),
2 config error, 3 numerical failure.  Outputs are deterministic: no
timestamps inside data files (metadata carries one only under
--timestamps).

Config format: INI-like sections of ``key = value`` lines, ``#``
comments.  Unknown sections or keys are errors; silent defaults for
physics parameters are how reproductions go wrong.
"""

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, dispersion, dynamics, scattering
from .susceptibility import (
    MirrorMechanics,
    ResponseCurve,
    compute_susceptibility,
    gamma,
    induced_mass,
    lorentzian_gamma,
    reflection_cutoff,
)
from .errors import ConfigError, CutoffDivergenceError, FitError, VacMirrorError

_CHOICES = {
    ("model", "kind"): {"perfect", "lorentzian", "tabulated"},
    ("grid", "spacing"): {"log", "linear"},
    ("simulation", "force"): {"none", "gaussian", "step", "sine"},
    ("simulation", "regime"): {"auto", "perfect", "memory"},
}

# (type, default, positive-required); default None means "required"
_SCHEMA = {
    "model": {
        "kind": (str, None, False),
        "omega": (float, 1.0, True),
        "table": (str, "", False),
    },
    "mechanics": {
        "tau_omega": (float, 1e-3, False),
        "k_over_m": (float, 0.0, False),
    },
    "grid": {
        "omega_min": (float, 1e-2, True),
        "omega_max": (float, 1e3, True),
        "points": (int, 400, True),
        "spacing": (str, "log", False),
    },
    "analysis": {
        "contour_delta": (float, 1e-6, True),
        "contour_max": (float, 0.0, False),  # 0 = auto
        "probe_points": (int, 1000, True),
        "probe_min": (float, 1e-3, True),
        "probe_max": (float, 1e3, True),
        "spectral_points": (int, 100, True),
        "kk_threshold": (float, 1e-3, True),
        "spectral_threshold": (float, 1e-4, True),
        "consistency_threshold": (float, 1e-2, True),
    },
    "simulation": {
        "force": (str, "gaussian", False),
        "amplitude": (float, 1e-3, False),
        "center": (float, 5.0, False),
        "width": (float, 1.5, True),
        "frequency": (float, 1.0, True),
        "t_final": (float, 60.0, True),
        "dt": (float, 1e-3, True),
        "regime": (str, "auto", False),
        "q0": (float, 0.0, False),
        "v0": (float, 0.0, False),
        "a0": (float, 0.0, False),
    },
    "output": {
        "directory": (str, "out", False),
        "formats": (str, "csv,json", False),
    },
}


@dataclass
class RunConfig:
    values: dict
    path: str

    def __getitem__(self, section):
        return self.values[section]


def parse_config(path):
    """Parse and validate a config file; raises ConfigError with line anchors."""
    path = Path(path)
    if not path.exists():
        raise ConfigError("config file not found", path=str(path))
    values = {s: {k: v[1] for k, v in keys.items()} for s, keys in _SCHEMA.items()}
    seen = {}
    section = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]", str(path), lineno)
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", str(path), lineno)
        if section is None:
            raise ConfigError("key outside any [section]", str(path), lineno)
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key '{key}' in [{section}]", str(path), lineno)
        if (section, key) in seen:
            raise ConfigError(f"duplicate key '{key}'", str(path), lineno)
        seen[(section, key)] = lineno
        typ, _, positive = _SCHEMA[section][key]
        try:
            parsed = typ(val)
        except ValueError:
            raise ConfigError(
                f"cannot parse '{val}' as {typ.__name__} for {section}.{key}",
                str(path), lineno,
            ) from None
        if positive and isinstance(parsed, (int, float)) and parsed <= 0:
            raise ConfigError(f"{section}.{key} must be positive", str(path), lineno)
        choices = _CHOICES.get((section, key))
        if choices and parsed not in choices:
            raise ConfigError(
                f"{section}.{key} must be one of {sorted(choices)}", str(path), lineno
            )
        values[section][key] = parsed

    if values["model"]["kind"] is None:
        raise ConfigError("model.kind is required", str(path))
    if values["mechanics"]["tau_omega"] < 0 or values["mechanics"]["k_over_m"] < 0:
        raise ConfigError("mechanics parameters must be nonnegative", str(path))
    if values["model"]["kind"] == "tabulated":
        table = values["model"]["table"]
        if not table:
            raise ConfigError("tabulated model needs model.table", str(path))
        tpath = Path(table)
        if not tpath.is_absolute():
            tpath = path.parent / tpath
        if not tpath.exists():
            raise ConfigError(f"table file not found: {tpath}", str(path))
        values["model"]["table"] = str(tpath)
    if values["grid"]["omega_min"] >= values["grid"]["omega_max"]:
        raise ConfigError("grid.omega_min must be below grid.omega_max", str(path))
    return RunConfig(values=values, path=str(path))


def build_model(cfg):
    m = cfg["model"]
    if m["kind"] == "perfect":
        return scattering.perfect_mirror()
    if m["kind"] == "lorentzian":
        return scattering.lorentzian_mirror(m["omega"])
    return scattering.load_table(m["table"])


def build_mechanics(cfg):
    mech = cfg["mechanics"]
    return MirrorMechanics(m=1.0, k=mech["k_over_m"], tau=mech["tau_omega"])


def build_grid(cfg):
    g = cfg["grid"]
    if g["spacing"] == "log":
        return np.geomspace(g["omega_min"], g["omega_max"], g["points"])
    return np.linspace(g["omega_min"], g["omega_max"], g["points"])


def _model_omega_cap(model, default=1.0e3):
    if model.kind == scattering.TABULATED:
        return min(default, model.omega_range[1])
    return default


def _json_num(x):
    if x is None:
        return None
    x = float(x)
    return x if np.isfinite(x) else None


def _write_json(path, doc):
    with open(path, "w") as fh:
        fh.write(json.dumps(doc, indent=2) + "\n")


def _meta(args):
    meta = {"threads": args.threads, "seed": args.seed}
    if args.timestamps:
        import datetime

        meta["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return meta


def cmd_analyze(cfg, out, args):
    model = build_model(cfg)
    mech = build_mechanics(cfg)
    grid = build_grid(cfg)
    validation = scattering.validate_model(model, grid)
    cap = _model_omega_cap(model)
    result = compute_susceptibility(
        model, mech, grid, omega_max_cutoff=cap
    )
    result.to_csv(out / "gamma.csv")
    with open(out / "chi.csv", "w") as fh:
        fh.write("omega,chi_re,chi_im\n")
        for w, x in zip(grid, result.chi.values):
            fh.write(f"{w:.11e},{x.real:.11e},{x.imag:.11e}\n")
    k, m = mech.k, mech.m
    z = (k - m * grid**2 - result.chi.values) / (-1j * grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = 1.0 / z
    with open(out / "impedance.csv", "w") as fh:
        fh.write("omega,z_re,z_im,y_re,y_im\n")
        for w, zz, yy in zip(grid, z, y):
            fh.write(
                f"{w:.11e},{zz.real:.11e},{zz.imag:.11e},{yy.real:.11e},{yy.imag:.11e}\n"
            )
    gamma0 = complex(result.gamma.values[0]) if grid[0] == 0 else gamma(model, 0.0)
    doc = {
        "model": model.kind,
        "tau_omega": mech.tau,
        "k_over_m": mech.k / mech.m,
        "omega_C": _json_num(result.omega_c),
        "mu_over_m": _json_num(result.mu / mech.m if np.isfinite(result.mu) else None),
        "gamma0": {"re": gamma0.real, "im": gamma0.imag},
        "cutoff_divergent": bool(result.cutoff_divergent),
        "validation": {
            "unitarity_defect": validation.unitarity_defect,
            "transparency_tail": validation.transparency_tail,
            "transparency_slope": validation.transparency_slope,
            "causality_defect": _json_num(validation.causality_defect),
            "has_cutoff": validation.has_cutoff,
        },
        "grid": dict(cfg["grid"]),
        "meta": _meta(args),
    }
    _write_json(out / "summary.json", doc)
    return 0


def cmd_stability(cfg, out, args):
    model = build_model(cfg)
    mech = build_mechanics(cfg)
    a = cfg["analysis"]
    gamma_curve = None
    if model.kind == scattering.TABULATED:
        gamma_curve = analysis.sample_gamma_real(
            model, omega_max=_model_omega_cap(model)
        )
    contour = None
    if a["contour_max"] > 0:
        contour = analysis.Rectangle(a["contour_delta"], a["contour_max"], a["contour_max"])
    probes = analysis.default_probes(
        a["probe_min"], a["probe_max"],
        n_mag=max(4, a["probe_points"] // 25), n_arg=25,
    )
    report = analysis.stability_report(
        model, mech, contour=contour, gamma_curve=gamma_curve, probes=probes,
        omega_max_cutoff=_model_omega_cap(model),
    )
    report.to_json(out / "stability.json")
    return 0


def cmd_simulate(cfg, out, args):
    model = build_model(cfg)
    mech = build_mechanics(cfg)
    sim = cfg["simulation"]
    force = dynamics.ForceProfile(
        kind=sim["force"], amplitude=sim["amplitude"], center=sim["center"],
        width=sim["width"], frequency=sim["frequency"],
    )
    regime = sim["regime"]
    if regime == "auto":
        regime = "perfect" if model.kind == scattering.PERFECT else "memory"

    fitted = None
    if regime == "perfect":
        dt = sim["dt"] if mech.tau == 0 else min(sim["dt"], mech.tau / 50.0)
        traj = dynamics.simulate_perfect_mirror(
            mech, force, sim["t_final"], dt=dt,
            q0=sim["q0"], v0=sim["v0"], a0=sim["a0"],
        )
        try:
            fit = dynamics.fit_runaway_rate(traj)
            fitted = {"rate": fit.rate, "ci95": fit.ci95, "efolds": fit.efolds}
        except FitError:
            fitted = None
    else:
        dt = sim["dt"]
        omega_c = reflection_cutoff(
            model, omega_max=_model_omega_cap(model)
        )
        mu = induced_mass(mech, omega_c)
        if mu >= mech.m:
            raise ConfigError(
                f"mu/m = {mu / mech.m:.3f} >= 1: memory integrator refuses the "
                "non-passive regime", cfg.path,
            )
        band = np.pi / dt
        cap = _model_omega_cap(model, default=np.inf)
        curve_max = min(band, cap)
        cg = np.concatenate([[0.0], np.geomspace(1e-3, curve_max, 1600)])
        if model.kind == scattering.LORENTZIAN:
            gam = lorentzian_gamma(cg, model.omega_scale)
        else:
            gam = np.array([gamma(model, float(w)) for w in cg])
        chi_curve = ResponseCurve(
            cg, 1j * mech.m * mech.tau * cg**3 * gam, label="chi"
        )
        kernel = dispersion.build_time_kernel(
            chi_curve, mu, window=sim["t_final"], dt=dt, omega_max=curve_max
        )
        kernel.to_csv(out / "kernel.csv")
        traj = dynamics.simulate_with_memory(
            mech, kernel, force, sim["t_final"], q0=sim["q0"]
        )

    ledger = dynamics.energy_ledger(traj, mech)
    dynamics.export_run_csv(out / "trajectory.csv", traj, ledger)
    dynamics.export_energy_csv(out / "energy.csv", ledger)
    doc = {
        "model": model.kind,
        "regime": regime,
        "method": traj.method,
        "dt": traj.dt,
        "t_final": sim["t_final"],
        "force": {k: sim[k] for k in ("force", "amplitude", "center", "width", "frequency")},
        "diverged": bool(traj.diverged),
        "t_diverged": _json_num(traj.t_diverged),
        "fitted_runaway": fitted,
        "W_a_final": ledger.w_applied[-1],
        "W_m_final": ledger.w_radiated[-1],
        "delta_E_final": ledger.delta_energy[-1],
        "max_ledger_residual": ledger.max_residual,
        "meta": _meta(args),
    }
    _write_json(out / "run.json", doc)
    return 0


def cmd_crosscheck(cfg, out, args):
    model = build_model(cfg)
    mech = build_mechanics(cfg)
    a = cfg["analysis"]
    doc = {"model": model.kind, "tau_omega": mech.tau, "meta": _meta(args)}

    if model.kind == scattering.TABULATED:
        lo, hi = model.omega_range
        vgrid = np.geomspace(max(1e-2, lo + 1e-12), min(1e2, hi), 800)
        validation = scattering.validate_model(model, vgrid)
        if validation.unitarity_defect > 1e-6:
            doc["validation_failure"] = {
                "unitarity_defect": validation.unitarity_defect,
            }
            _write_json(out / "crosscheck.json", doc)
            print("validation failed before crosscheck", file=sys.stderr)
            return 3

    if model.kind == scattering.PERFECT:
        doc["kk"] = {"status": "divergent", "defect": None}
        doc["spectral_rep"] = {"status": "divergent", "defect": None}
        doc["consistency"] = {"status": "divergent", "defect": None}
        _write_json(out / "crosscheck.json", doc)
        return 0

    cap = _model_omega_cap(model, default=1.0e3)
    # Kramers-Kronig: reconstructed Gamma_I vs direct quadrature
    L = min(400.0, cap)
    kk_grid = np.linspace(0.0, L, 4001)
    gam_r = np.array([gamma(model, float(w)).real for w in kk_grid])
    curve = ResponseCurve(kk_grid, gam_r, label="gamma")
    probes = np.linspace(0.1, 5.0, 40)
    kk_defect = 0.0
    for w in probes:
        rec = dispersion.kk_reconstruct(curve, w)
        direct = gamma(model, float(w))
        kk_defect = max(kk_defect, abs(rec.imag - direct.imag))
    doc["kk"] = {"defect": kk_defect, "threshold": a["kk_threshold"],
                 "passed": bool(kk_defect < a["kk_threshold"])}

    # spectral representation vs direct Laplace impedance
    gamma_curve = analysis.sample_gamma_real(model, omega_max=cap)
    try:
        mu = induced_mass(
            mech, reflection_cutoff(model, omega_max=cap)
        )
        ps = np.geomspace(1e-2, 1e2, a["spectral_points"])
        rel = 0.0
        for p in ps:
            direct = analysis.laplace_impedance(model, mech, complex(p), gamma_curve)
            spectral = analysis.spectral_impedance(
                model, mech, complex(p), gamma_curve=gamma_curve, mu=mu
            )
            rel = max(rel, abs(spectral - direct) / abs(direct))
        doc["spectral_rep"] = {"defect": rel, "threshold": a["spectral_threshold"],
                               "passed": bool(rel < a["spectral_threshold"])}
    except CutoffDivergenceError:
        doc["spectral_rep"] = {"status": "divergent", "defect": None}

    report = dispersion.consistency_check(model, mech)
    doc["consistency"] = {"defect": report.defect,
                          "threshold": a["consistency_threshold"],
                          "passed": bool(report.defect < a["consistency_threshold"])}
    _write_json(out / "crosscheck.json", doc)
    return 0


_COMMANDS = {
    "analyze": cmd_analyze,
    "stability": cmd_stability,
    "simulate": cmd_simulate,
    "crosscheck": cmd_crosscheck,
}


def make_parser():
    parser = argparse.ArgumentParser(
        prog="vacmirror",
        description="Vacuum radiation-pressure response and stability of a scattering mirror",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to run config")
        p.add_argument("--out", default=None, help="output directory (default from config)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker hint, recorded in metadata")
        p.add_argument("--seed", type=int, default=0,
                       help="reserved for stochastic extensions, recorded only")
        p.add_argument("--timestamps", action="store_true",
                       help="include a timestamp in metadata sidecars")
    return parser


def run(argv=None):
    args = make_parser().parse_args(argv)
    cfg = parse_config(args.config)
    out = Path(args.out) if args.out else Path(cfg["output"]["directory"])
    out.mkdir(parents=True, exist_ok=True)
    return _COMMANDS[args.command](cfg, out, args)


def main(argv=None):
    try:
        code = run(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        code = 2
    except VacMirrorError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        code = 3
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()

"""Command-line interface: one subcommand per pipeline stage.

    impactdde <subcommand> --config cfg.json [--out-dir DIR] [--override k=v]...

Subcommands: modes, kernel, regularity, simulate, compare-cor, asymptotics.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asym
from .config import RunConfig, apply_overrides, load_config, parse_config
from .cor import chatter_metrics, simulate_cor
from .errors import ConfigurationError, NumericalError
from .reduction import build_projection, forcing_term, memory_kernel, regularity_sweep
from .simulate import ContactConfig, SimulationResult, simulate
from .structures import (
    HarmonicForcing,
    assemble_first_order,
    eb_frequencies,
    eb_structure,
    string_structure,
    timoshenko_collocation,
    tip_normalized_ic,
    to_modal,
)

__all__ = ["main", "build_structure", "build_system", "contact_config"]


def build_structure(cfg: RunConfig):
    m = cfg.model
    if cfg.model_type == "euler-bernoulli":
        return eb_structure(m["size"], m["damping"])
    if cfg.model_type == "timoshenko":
        return to_modal(timoshenko_collocation(m["size"], m["beta"], m["gamma"]),
                        m["damping"])
    return string_structure(m["size"], m["wave_speed"], m["damping"])


def build_system(cfg: RunConfig):
    ms = build_structure(cfg)
    f = cfg.forcing
    forcing = HarmonicForcing(f["mode"], f["amplitude"], f["frequency"]) \
        if f["amplitude"] != 0.0 else HarmonicForcing()
    ic = tip_normalized_ic(ms, cfg.ic["mode"], cfg.ic["displacement"],
                           cfg.ic["velocity"])
    return assemble_first_order(ms, forcing, ic)


def contact_config(cfg: RunConfig) -> ContactConfig:
    return ContactConfig(
        stop_position=cfg.contact["stop"],
        eps=cfg.run["eps"],
        t_end=cfg.run["t_end"],
        restitution=cfg.contact["restitution"],
        kernel_horizon=cfg.run["kernel_horizon"],
        truncation_tol=cfg.run["truncation_tol"],
        plateau_window=cfg.run["plateau_window"],
    )


def _round15(obj):
    if isinstance(obj, float):
        return float(f"{obj:.15g}")
    if isinstance(obj, dict):
        return {k: _round15(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round15(v) for v in obj]
    return obj


def _write_json(path: Path, payload):
    path.write_text(json.dumps(_round15(payload), indent=2) + "\n",
                    encoding="utf-8")


def _write_csv(path: Path, header: list[str], columns):
    with path.open("w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(f"{v:.15g}" if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _events_payload(result: SimulationResult):
    return [{"kind": e.kind, "t": e.time, "fc_before": e.fc_before,
             "fc_after": e.fc_after} for e in result.events]


def _write_trajectory(path: Path, res: SimulationResult):
    _write_csv(path, ["t", "y1", "y2", "fc", "in_contact"],
               (res.times.tolist(), res.y[:, 0].tolist(), res.y[:, 1].tolist(),
                res.fc.tolist(), res.in_contact.astype(int).tolist()))


def _cmd_modes(cfg: RunConfig, out: Path) -> None:
    ms = build_structure(cfg)
    ks = list(range(1, ms.n_modes + 1))
    _write_csv(out / "modes.csv", ["k", "omega", "damping", "tip_value"],
               (ks, ms.omegas.tolist(), ms.dampings.tolist(),
                ms.tip_values.tolist()))


def _cmd_kernel(cfg: RunConfig, out: Path) -> None:
    sys_ = build_system(cfg)
    proj = build_projection(sys_)
    eps = cfg.run["eps"]
    horizon = cfg.run["kernel_horizon"] or 60 * eps
    kern = memory_kernel(sys_, proj, eps, horizon,
                         truncation_tol=cfg.run["truncation_tol"],
                         plateau_window=cfg.run["plateau_window"])
    _write_csv(out / "kernel.csv", ["tau", "L1", "L2"],
               (kern.taus.tolist(), kern.values[:, 0].tolist(),
                kern.values[:, 1].tolist()))
    _write_json(out / "kernel_summary.json", {
        "L_plus": kern.L_plus.tolist(),
        "L_infty": kern.L_infty.tolist(),
        "verdict": kern.verdict,
        "eps": kern.eps,
        "plateau_window": list(kern.plateau_window),
        "truncation_index": kern.truncation_index,
        "jumps": [{"tau": j.tau, "dL1": j.dL1, "dL2": j.dL2}
                  for j in kern.jump_table],
    })


_SWEEP_DEFAULTS = {
    "euler-bernoulli": [25, 50, 100],
    "timoshenko": [20, 40],
    "string": [32, 64],
}


def _cmd_regularity(cfg: RunConfig, out: Path) -> None:
    sizes = cfg.run["sweep_sizes"] or _SWEEP_DEFAULTS[cfg.model_type]
    rep = regularity_sweep(
        cfg.model_type, sizes,
        damping=cfg.model["damping"],
        beta=cfg.model["beta"], gamma=cfg.model["gamma"],
        wave_speed=cfg.model["wave_speed"],
    )
    _write_json(out / "regularity.json", {
        "family": rep.family,
        "sizes": list(rep.sizes),
        "estimates": list(rep.estimates),
        "windows": [list(w) for w in rep.windows],
        "common_window": list(rep.common_window),
        "common_estimates": list(rep.common_estimates),
        "agreement": rep.agreement,
        "decay_ratios": list(rep.decay_ratios),
        "fitted_alpha": rep.fitted_alpha,
        "alpha_fit_range": list(rep.alpha_fit_range),
        "verdict": rep.verdict,
        "floor": rep.floor,
    })


def _cmd_simulate(cfg: RunConfig, out: Path) -> None:
    sys_ = build_system(cfg)
    res = simulate(sys_, contact_config(cfg))
    _write_trajectory(out / "trajectory.csv", res)
    _write_json(out / "events.json", _events_payload(res))


def _cmd_compare_cor(cfg: RunConfig, out: Path) -> None:
    sys_ = build_system(cfg)
    ccfg = contact_config(cfg)
    red = simulate(sys_, ccfg)
    _write_trajectory(out / "reduced_trajectory.csv", red)
    _write_json(out / "reduced_events.json", _events_payload(red))
    cor = simulate_cor(sys_, ccfg)
    _write_trajectory(out / "cor_trajectory.csv", cor)
    _write_json(out / "cor_events.json", _events_payload(cor))
    metrics = chatter_metrics(cor)
    metrics["reduced_onset_count"] = len(red.onsets())
    _write_json(out / "chatter.json", metrics)


def _cmd_asymptotics(cfg: RunConfig, out: Path) -> None:
    # the study needs mode counts far beyond any collocation grid, so it is
    # limited to the families with analytic frequencies; damping is zero by
    # construction of the active-mode estimate
    if cfg.model_type == "euler-bernoulli":
        builder = lambda m: eb_structure(m, 0.0)  # noqa: E731
        omega1 = float(eb_frequencies(1)[0])
        alpha = 2.0
    elif cfg.model_type == "string":
        c = cfg.model["wave_speed"]
        builder = lambda m: string_structure(m, c, 0.0)  # noqa: E731
        omega1 = np.pi * c / 2.0
        alpha = 1.0
    else:
        raise ConfigurationError(
            "asymptotics requires model.type euler-bernoulli or string "
            "(collocation grids cannot reach the required mode counts)")
    rep = asym.asymptotics_report(builder, omega1, alpha, family=cfg.model_type)
    _write_json(out / "asymptotics.json", {
        "family": rep.family,
        "alpha": rep.alpha,
        "eta": rep.eta,
        "delta_t": list(rep.delta_t),
        "fc": list(rep.fc),
        "fitted_exponent": rep.fitted_exponent,
        "prefactor": rep.prefactor,
        "n_estimated": list(rep.n_estimated),
        "n_measured": list(rep.n_measured),
        "reversal_defect": list(rep.reversal_defect),
        "mode_counts": list(rep.mode_counts),
    })
    _write_csv(out / "asymptotics.csv",
               ["delta_t", "fc", "n_estimated", "n_measured", "reversal_defect"],
               (list(rep.delta_t), list(rep.fc), list(rep.n_estimated),
                list(rep.n_measured), list(rep.reversal_defect)))


_COMMANDS = {
    "modes": _cmd_modes,
    "kernel": _cmd_kernel,
    "regularity": _cmd_regularity,
    "simulate": _cmd_simulate,
    "compare-cor": _cmd_compare_cor,
    "asymptotics": _cmd_asymptotics,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="impactdde",
        description="Impact simulation of elastic structures via "
                    "memory-kernel delay equations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out-dir", default=".", help="output directory")
        p.add_argument("--override", action="append", default=[],
                       metavar="SECTION.KEY=VALUE",
                       help="override a configuration entry")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
        raw = json.loads(text) if text.strip() else {}
        if not isinstance(raw, dict):
            raise ConfigurationError("configuration must be a JSON object")
        raw = apply_overrides(raw, args.override)
        cfg = parse_config(raw)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _COMMANDS[args.command](cfg, out)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"configuration error: invalid JSON: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line front end: experiment configs in, curves/reports/CSV out.

Exit codes: 0 success, 1 verification failure, 2 invalid input.
Given the same config and seed, every command reproduces byte-identical
output; timing diagnostics go to stderr only.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import acceptance
from .alphabets import GapSchedule, GappedAlphabet, ScheduleError
from .certificates import (InfeasibleCertificateError, check_feasibility,
                           cluster_shift_certificate, gapped_shift_certificate,
                           grid_shift_certificate)
from .constructions import (ClusterMixtureParams, build_gapped_shift,
                            build_periodic_discontinuity_demo, cluster_mixture,
                            cluster_mixture_report, desk_gap_schedule,
                            desk_interleaved_base, interleaved_experiment)
from .dimension import (CoveringInexactError, covering_bounds, covering_number,
                        dimension_report, rdim_estimates)
from .metricspace import (FiniteMetricSpace, InvalidDistributionError,
                          InvalidMetricError, load_space_json)
from .mixture import (MeasureMixture, decomposition_experiment,
                      mixture_formula_check)
from .ratedistortion import (IIDModel, MarkovModel, MixtureModel, PeriodicModel,
                             ShiftSystem, rd_curve)


class ConfigError(ValueError):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def emit(doc, out_path: str | None) -> None:
    if isinstance(doc, str):
        text = doc
    else:
        text = json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read JSON config {path}: {exc}") from exc


def parse_model(doc: dict):
    try:
        kind = doc["type"]
    except (TypeError, KeyError) as exc:
        raise ConfigError("model needs a 'type' field") from exc
    if kind == "iid":
        probs = doc.get("probs")
        return IIDModel(None if probs is None else np.asarray(probs, dtype=float))
    if kind == "markov":
        return MarkovModel(np.asarray(doc["transition"], dtype=float),
                           np.asarray(doc["stationary"], dtype=float))
    if kind == "periodic":
        return PeriodicModel(tuple(doc["word"]))
    if kind == "mixture":
        comps = tuple((float(c["weight"]), parse_model(c["model"]))
                      for c in doc["components"])
        return MixtureModel(comps)
    raise ConfigError(f"unknown model type {kind!r}")


def parse_system(doc: dict) -> ShiftSystem:
    if "alphabet" not in doc or "model" not in doc:
        raise ConfigError("system needs 'alphabet' and 'model' fields")
    alpha_doc = doc["alphabet"]
    if "labels" in alpha_doc:
        space, _ = load_space_json(alpha_doc)
    else:
        raise ConfigError("alphabet must carry inline 'labels' and 'dist'")
    return ShiftSystem(space, parse_model(doc["model"]),
                       int(doc.get("d", 1)), float(doc.get("decay", 0.5)),
                       name=doc.get("name", ""))


def system_to_json(sys_obj: ShiftSystem) -> dict:
    def model_doc(model):
        if isinstance(model, IIDModel):
            return {"type": "iid",
                    "probs": None if model.probs is None else model.probs.tolist()}
        if isinstance(model, MarkovModel):
            return {"type": "markov", "transition": model.transition.tolist(),
                    "stationary": model.stationary.tolist()}
        if isinstance(model, PeriodicModel):
            return {"type": "periodic", "word": list(model.word)}
        if isinstance(model, MixtureModel):
            return {"type": "mixture",
                    "components": [{"weight": w, "model": model_doc(m)}
                                   for w, m in model.components]}
        raise ConfigError(f"cannot serialize model {type(model)!r}")

    if isinstance(sys_obj.alphabet, FiniteMetricSpace):
        alpha = sys_obj.alphabet.to_json_dict()
    else:
        alpha = sys_obj.alphabet.describe()
    return {"name": sys_obj.name, "d": sys_obj.lattice_dim, "decay": sys_obj.decay,
            "alphabet": alpha, "model": model_doc(sys_obj.model)}


def parse_mixture(doc: dict) -> MeasureMixture:
    if "alphabet" not in doc or "components" not in doc:
        raise ConfigError("mixture needs 'alphabet' and 'components' fields")
    space, _ = load_space_json(doc["alphabet"])
    d = int(doc.get("d", 1))
    decay = float(doc.get("decay", 0.5))
    comps = []
    for i, comp in enumerate(doc["components"]):
        model = parse_model(comp["model"])
        comps.append((float(comp["weight"]),
                      ShiftSystem(space, model, d, decay,
                                  name=comp.get("name", f"component-{i}"))))
    return MeasureMixture(tuple(comps), name=doc.get("name", "mixture"))


def parse_t_range(spec: str) -> list:
    try:
        if ".." in spec:
            lo, hi = spec.split("..")
            return [float(t) for t in range(int(lo), int(hi) + 1)]
        return [float(x) for x in spec.split(",") if x]
    except ValueError as exc:
        raise ConfigError(f"cannot parse t range {spec!r} (use A..B or a comma list)") from exc


def eps_grid_from_args(args) -> list:
    if getattr(args, "eps", None):
        grid = [float(x) for x in args.eps.split(",") if x]
    elif getattr(args, "t", None):
        grid = [2.0 ** (-t) for t in parse_t_range(args.t)]
    else:
        raise ConfigError("need --t A..B or --eps list")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("eps grid must be strictly decreasing")
    return grid


def parse_window_list(spec: str) -> list:
    try:
        return [int(x) for x in spec.split(",") if x]
    except ValueError as exc:
        raise ConfigError(f"cannot parse window list {spec!r}") from exc


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def cmd_rd_curve(args) -> int:
    sys_obj = parse_system(load_json(args.system))
    grid = eps_grid_from_args(args)
    windows = parse_window_list(args.L)
    curve = rd_curve(sys_obj, grid, windows, jobs=args.jobs)
    if args.out and args.out.endswith(".json"):
        emit(curve.to_json_dict(), args.out)
    else:
        emit(curve.to_csv(), args.out)
    return 0


def cmd_rd_dim(args) -> int:
    sys_obj = parse_system(load_json(args.system))
    grid = eps_grid_from_args(args)
    windows = parse_window_list(args.L)
    curve = rd_curve(sys_obj, grid, windows, jobs=args.jobs)
    est = rdim_estimates(curve, args.tail)
    emit({"rdim_upper": est.upper, "rdim_lower": est.lower,
          "converged": est.converged, "tail_t": list(est.t_values),
          "ratios": list(est.ratios)}, args.out)
    return 0


def cmd_mix_check(args) -> int:
    cfg = load_json(args.config)
    mix = parse_mixture(cfg.get("mixture", {}))
    eps_list = cfg.get("eps") or [0.1]
    windows = cfg.get("L") or [1, 2]
    reports = [mixture_formula_check(mix, float(eps), windows,
                                     component_window=cfg.get("component_window"))
               for eps in eps_list]
    emit({"reports": [r.to_json_dict() for r in reports],
          "passed": all(r.passed for r in reports)}, args.out)
    return 0 if all(r.passed for r in reports) else 1


def cmd_mix_decompose(args) -> int:
    cfg = load_json(args.config)
    mix = parse_mixture(cfg.get("mixture", {}))
    t_grid = cfg.get("t") or [2, 3, 4, 5, 6]
    windows = cfg.get("L") or [1, 2]
    report = decomposition_experiment(mix, t_grid, windows,
                                      tail_fraction=cfg.get("tail_fraction", 0.5))
    emit(report.to_json_dict(), args.out)
    return 0 if report.passed else 1


def cmd_cover(args) -> int:
    space, _ = load_space_json(load_json(args.space))
    try:
        count = covering_number(space, args.eps)
        emit({"eps": args.eps, "covering_number": count, "exact": True}, args.out)
        return 0
    except CoveringInexactError:
        lower, upper = covering_bounds(space, args.eps)
        emit({"eps": args.eps, "lower": lower, "upper": upper, "exact": False},
             args.out)
        return 0


def cmd_dim(args) -> int:
    sys_obj = parse_system(load_json(args.system))
    t_grid = parse_t_range(args.t)
    curve = None
    if args.L:
        windows = parse_window_list(args.L)
        curve = rd_curve(sys_obj, [2.0 ** (-t) for t in t_grid], windows,
                         jobs=args.jobs)
    report = dimension_report(sys_obj, t_grid, curve=curve, tail_fraction=args.tail)
    if args.out and args.out.endswith(".csv"):
        emit(report.to_csv(), args.out)
    else:
        emit(report.to_json_dict(), args.out)
    return 0


def _cert_from_doc(doc: dict):
    family = doc.get("family")
    window = int(doc.get("L", 1))
    if family == "cluster":
        return cluster_shift_certificate(int(doc["m"]), int(doc["g"]), window)
    if family == "grid":
        return grid_shift_certificate(int(doc["q"]), window)
    if family == "gapped":
        sched_doc = doc.get("schedule") or {}
        if sched_doc:
            schedule = GapSchedule(tuple(sched_doc["a"]), tuple(sched_doc["b"]),
                                   int(sched_doc["truncation"]))
        else:
            schedule = desk_gap_schedule()
        return gapped_shift_certificate(GappedAlphabet(schedule), int(doc.get("k", 2)),
                                        window)
    raise ConfigError("certificate config needs family cluster|grid|gapped")


def cmd_cert_check(args) -> int:
    doc = load_json(args.config)
    cert = _cert_from_doc(doc)
    try:
        report = check_feasibility(cert, mode=args.mode, mc_samples=args.samples,
                                   mc_seed=args.seed)
    except InfeasibleCertificateError as exc:
        emit({"certificate": cert.to_json_dict(), "feasible": False,
              "error": str(exc)}, args.out)
        return 1
    out = cert.to_json_dict()
    out["feasible"] = True
    out["margin"] = report.margin
    out["mode"] = report.mode
    out["worst_case"] = report.worst_case
    emit(out, args.out)
    return 0


def cmd_example(args) -> int:
    name = args.name
    if name == "section4":
        params = ClusterMixtureParams.desk(3)
        mix = cluster_mixture(params)
        report = cluster_mixture_report(params)
        doc = {"systems": [system_to_json(s) for s in mix.systems],
               "weights": list(mix.weights),
               "report": report.to_json_dict()}
    elif name == "section5":
        sys_obj = build_gapped_shift(desk_gap_schedule())
        from .certificates import certified_lower_bound
        from .constructions import gapped_certificates
        certs = gapped_certificates(sys_obj)
        rows = [cert.to_json_dict() for cert in certs]
        t_grid = list(range(2, 28))
        s_vals = [sys_obj.alphabet.prefix_depth(2.0 ** (-t)) for t in t_grid]
        doc = {"system": system_to_json(sys_obj),
               "certificates": rows,
               "scale_entropy": [{"t": t, "S": s} for t, s in zip(t_grid, s_vals)],
               "certified": [{"t": 24,
                              "bound": certified_lower_bound(certs[-1], 2.0 ** (-24))}]}
    elif name == "interleaved":
        report = interleaved_experiment()
        base = desk_interleaved_base()
        doc = {"base_schedule": base.describe(), "report": report.to_json_dict()}
    elif name == "discontinuity":
        demo = build_periodic_discontinuity_demo(4, (1, 2, 3))
        doc = {"systems": {str(n): system_to_json(s)
                           for n, s in demo.periodic_systems.items()},
               "iid": system_to_json(demo.iid_system),
               "report": demo.report()}
    else:
        raise ConfigError(
            "unknown example; choose section4|section5|interleaved|discontinuity")
    emit(doc, args.out)
    return 0


def cmd_verify_all(args) -> int:
    results = acceptance.run_acceptance(args.seed)
    sys.stdout.write(acceptance.format_report(results))
    for res in results:
        print(f"criterion {res.index}: {res.elapsed:.2f}s", file=sys.stderr)
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdimlab",
        description="Rate distortion functions, dimensions, and metric mean "
                    "dimension for shift systems over finite metric alphabets.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, system=True):
        if system:
            p.add_argument("--system", required=True, help="system JSON file")
        p.add_argument("--t", help="dyadic scale range A..B (eps = 2^-t)")
        p.add_argument("--eps", help="comma list of eps values (decreasing)")
        p.add_argument("--L", default="1,2", help="comma list of window sizes")
        p.add_argument("--out", help="output path (.csv or .json)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--tail", type=float, default=0.5, help="tail fraction")

    p_rd = sub.add_parser("rd", help="rate distortion curves and dimensions")
    rd_sub = p_rd.add_subparsers(dest="rd_command", required=True)
    common(rd_sub.add_parser("curve", help="emit an R(eps) curve"))
    common(rd_sub.add_parser("dim", help="rate distortion dimension estimates"))

    p_mix = sub.add_parser("mix", help="mixture allocation checks")
    mix_sub = p_mix.add_subparsers(dest="mix_command", required=True)
    for nm, hlp in (("check", "allocation-formula sandwich"),
                    ("decompose", "decomposition experiment")):
        q = mix_sub.add_parser(nm, help=hlp)
        q.add_argument("--config", required=True, help="mixture config JSON")
        q.add_argument("--out")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--jobs", type=int, default=1)

    p_cover = sub.add_parser("cover", help="covering number of a finite space")
    p_cover.add_argument("--space", required=True, help="space JSON file")
    p_cover.add_argument("--eps", type=float, required=True)
    p_cover.add_argument("--out")

    p_dim = sub.add_parser("dim", help="entropy at scale and dimension report")
    p_dim.add_argument("--system", required=True)
    p_dim.add_argument("--t", required=True, help="dyadic scale range A..B")
    p_dim.add_argument("--L", help="optional window list for the rate curve")
    p_dim.add_argument("--out")
    p_dim.add_argument("--tail", type=float, default=0.5)
    p_dim.add_argument("--jobs", type=int, default=1)

    p_cert = sub.add_parser("cert", help="witness certificates")
    cert_sub = p_cert.add_subparsers(dest="cert_command", required=True)
    q = cert_sub.add_parser("check", help="verify certificate feasibility")
    q.add_argument("--config", required=True, help="certificate JSON")
    q.add_argument("--mode", default="closed_form",
                   choices=["closed_form", "exhaustive", "monte_carlo"])
    q.add_argument("--samples", type=int, default=100_000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")

    p_ex = sub.add_parser("example", help="emit a bundled example system + report")
    p_ex.add_argument("name", help="section4|section5|interleaved|discontinuity")
    p_ex.add_argument("--out")

    p_verify = sub.add_parser("verify", help="verification suites")
    verify_sub = p_verify.add_subparsers(dest="verify_command", required=True)
    q = verify_sub.add_parser("all", help="run the full acceptance suite")
    q.add_argument("--seed", type=int, default=7)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rd":
            return cmd_rd_curve(args) if args.rd_command == "curve" else cmd_rd_dim(args)
        if args.command == "mix":
            return (cmd_mix_check(args) if args.mix_command == "check"
                    else cmd_mix_decompose(args))
        if args.command == "cover":
            return cmd_cover(args)
        if args.command == "dim":
            return cmd_dim(args)
        if args.command == "cert":
            return cmd_cert_check(args)
        if args.command == "example":
            return cmd_example(args)
        if args.command == "verify":
            return cmd_verify_all(args)
        parser.error(f"unknown command {args.command}")
    except (ConfigError, InvalidMetricError, InvalidDistributionError,
            ScheduleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())

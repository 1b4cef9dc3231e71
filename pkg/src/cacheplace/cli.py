"""Experiment runner: parameter sweeps, analytic-vs-simulation validation,
and single-instance placement solving, with reproducible CSV/JSON outputs.

Config files are JSON documents; lengths are in meters, densities per square
meter, and SIR thresholds in dB (converted to linear exactly once, here at
the boundary). The CACHEPLACE_THREADS environment variable controls how many
sweep points run concurrently; output row order never depends on it.
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import (
    NetworkParams,
    conditional_hit_probability,
    hit_probability,
    secrecy_probability_exact,
    secrecy_probability_lower_bound,
)
from .catalog import FileCatalog, PlacementPolicy, make_catalog, sample_secrecy_levels
from .optimizer import lcc_placement, mpc_placement, placement_caps, solve_ocp
from .simulator import SimConfig, simulate_hit, simulate_secrecy

CSV_COLUMNS = [
    "sweep_var",
    "sweep_value",
    "scheme",
    "file_index",
    "p_star",
    "psi_cap",
    "hit_analytic",
    "hit_sim",
    "hit_ci",
    "secrecy_lb",
    "secrecy_exact",
    "secrecy_sim",
    "secrecy_ci",
]

# Reference defaults: alpha=3, lambda=1/800^2 per m^2, lambda_e=lambda/5,
# C=5, F=10, D=200 m, gamma_u=-5 dB, gamma_e=-7 dB.
DEFAULT_PARAMS = {
    "alpha": 3.0,
    "bs_density": 1.0 / 800.0**2,
    "eaves_density": 1.0 / 800.0**2 / 5.0,
    "guard_radius": 200.0,
    "gamma_u_db": -5.0,
    "gamma_e_db": -7.0,
    "tx_power": 1.0,
}
DEFAULT_CATALOG = {"source": "sampled", "F": 10, "beta": 0.7, "C": 5,
                   "epsilon_max": 0.5, "seed": 1}

SWEEP_VARIABLES = ("beta", "D", "gamma_e", "p_i")
SCHEMES = ("OCP", "MPC", "LCC", "FIXED")


class SpecError(ValueError):
    """The experiment specification is invalid or unreadable."""


@dataclass
class ExperimentSpec:
    """Fully resolved experiment description."""

    params: NetworkParams
    params_db: dict
    catalog: FileCatalog
    catalog_doc: dict
    sweep_var: str | None
    sweep_values: list
    schemes: list
    fixed_policy: np.ndarray | None
    sim: SimConfig | None
    output: str | None
    validate: dict = field(default_factory=dict)

    def resolved_dict(self):
        """Echo of the spec with every derived quantity filled in."""
        return {
            "params": {
                **self.params_db,
                "gamma_u_linear": self.params.gamma_u,
                "gamma_e_linear": self.params.gamma_e,
            },
            "catalog": {
                **self.catalog_doc,
                "epsilon": [float(e) for e in self.catalog.secrecy_levels],
                "popularity": [float(q) for q in self.catalog.popularity],
            },
            "sweep": (
                {"variable": self.sweep_var, "values": list(self.sweep_values)}
                if self.sweep_var
                else None
            ),
            "schemes": list(self.schemes),
            "fixed_policy": (
                [float(p) for p in self.fixed_policy]
                if self.fixed_policy is not None
                else None
            ),
            "sim": (
                {"trials": self.sim.trials, "seed": self.sim.seed}
                if self.sim
                else None
            ),
            "validate": self.validate,
            "output": self.output,
        }


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"config file {path} is not valid JSON: {exc}") from exc


def _build_catalog(doc, config_dir):
    source = doc.get("source", "sampled")
    if source == "file":
        path = doc.get("path")
        if not path:
            raise SpecError("catalog source 'file' requires a 'path'")
        if not os.path.isabs(path):
            path = os.path.join(config_dir, path)
        try:
            with open(path) as fh:
                file_doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot read catalog file {path}: {exc}") from exc
        return FileCatalog.from_json_dict(file_doc)
    merged = {**DEFAULT_CATALOG, **doc}
    if source == "inline":
        if "epsilon" not in doc:
            raise SpecError("catalog source 'inline' requires an 'epsilon' list")
        epsilon = doc["epsilon"]
    elif source == "sampled":
        epsilon = sample_secrecy_levels(
            int(merged["F"]), float(merged["epsilon_max"]), int(merged["seed"])
        )
    else:
        raise SpecError(f"unknown catalog source {source!r}")
    return make_catalog(
        int(merged["F"]), float(merged["beta"]), epsilon, int(merged["C"])
    )


def parse_spec(doc, config_dir=".", seed=None, trials=None, out=None, no_sim=False):
    """Validate a raw config document into an ExperimentSpec."""
    params_db = {**DEFAULT_PARAMS, **doc.get("params", {})}
    params = NetworkParams.with_db_thresholds(
        bs_density=float(params_db["bs_density"]),
        eaves_density=float(params_db["eaves_density"]),
        alpha=float(params_db["alpha"]),
        guard_radius=float(params_db["guard_radius"]),
        gamma_u_db=float(params_db["gamma_u_db"]),
        gamma_e_db=float(params_db["gamma_e_db"]),
        tx_power=float(params_db["tx_power"]),
    )
    catalog_doc = doc.get("catalog", {})
    catalog = _build_catalog(catalog_doc, config_dir)

    sweep_var, sweep_values = None, []
    if doc.get("sweep"):
        sweep_var = doc["sweep"].get("variable")
        sweep_values = [float(v) for v in doc["sweep"].get("values", [])]
        if sweep_var not in SWEEP_VARIABLES:
            raise SpecError(
                f"sweep variable must be one of {SWEEP_VARIABLES}, got {sweep_var!r}"
            )
        if not sweep_values:
            raise SpecError("sweep values must be non-empty")
        if any(b <= a for a, b in zip(sweep_values, sweep_values[1:])):
            raise SpecError("sweep values must be strictly increasing")

    schemes = list(doc.get("schemes", ["OCP", "MPC", "LCC"]))
    if not schemes:
        raise SpecError("schemes must be non-empty")
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise SpecError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")

    fixed_policy = None
    if doc.get("fixed_policy") is not None:
        raw = doc["fixed_policy"]
        if isinstance(raw, (int, float)):
            fixed_policy = np.full(catalog.file_count, float(raw))
        else:
            fixed_policy = np.asarray([float(v) for v in raw])
        if len(fixed_policy) != catalog.file_count:
            raise SpecError("fixed_policy length must equal the catalog size")
        if np.any(fixed_policy < 0) or np.any(fixed_policy > 1):
            raise SpecError("fixed_policy entries must lie in [0, 1]")
    if "FIXED" in schemes and fixed_policy is None:
        raise SpecError("scheme FIXED requires a fixed_policy")

    sim = None
    if not no_sim and (doc.get("sim") or trials is not None or seed is not None):
        sim_doc = doc.get("sim") or {}
        sim = SimConfig(
            trials=int(trials if trials is not None else sim_doc.get("trials", 10_000)),
            seed=int(seed if seed is not None else sim_doc.get("seed", 0)),
        )

    return ExperimentSpec(
        params=params,
        params_db=params_db,
        catalog=catalog,
        catalog_doc={**catalog_doc},
        sweep_var=sweep_var,
        sweep_values=sweep_values,
        schemes=schemes,
        fixed_policy=fixed_policy,
        sim=sim,
        output=out if out is not None else doc.get("output"),
        validate=doc.get("validate", {}),
    )


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _derive_seed(master, *path):
    seq = np.random.SeedSequence([int(master)] + [int(x) for x in path])
    return int(seq.generate_state(1, np.uint64)[0])


def _point_params(spec, value):
    params = spec.params
    if spec.sweep_var == "D":
        return NetworkParams(
            bs_density=params.bs_density,
            eaves_density=params.eaves_density,
            alpha=params.alpha,
            guard_radius=value,
            gamma_u=params.gamma_u,
            gamma_e=params.gamma_e,
            tx_power=params.tx_power,
        )
    if spec.sweep_var == "gamma_e":  # sweep values quoted in dB
        return NetworkParams(
            bs_density=params.bs_density,
            eaves_density=params.eaves_density,
            alpha=params.alpha,
            guard_radius=params.guard_radius,
            gamma_u=params.gamma_u,
            gamma_e=10.0 ** (value / 10.0),
            tx_power=params.tx_power,
        )
    return params


def _point_catalog(spec, value):
    if spec.sweep_var == "beta":
        return make_catalog(
            spec.catalog.file_count,
            value,
            spec.catalog.secrecy_levels,
            spec.catalog.cache_size,
        )
    return spec.catalog


def _scheme_policy(scheme, catalog, params, caps, fixed_policy):
    if scheme == "OCP":
        return solve_ocp(catalog, params, caps).policy
    if scheme == "MPC":
        return mpc_placement(catalog, params, caps)
    if scheme == "LCC":
        return lcc_placement(catalog, params, caps)
    return PlacementPolicy(fixed_policy)  # FIXED: budget deliberately unchecked


def _sweep_point_rows(spec, point_idx, value):
    """All CSV rows for one sweep point, in deterministic order."""
    params = _point_params(spec, value)
    catalog = _point_catalog(spec, value)
    rows = []

    if spec.sweep_var == "p_i":
        # Per-file quantities at a single caching probability; scheme labels
        # do not apply, so a single FIXED-style row is emitted per point.
        p = value
        hit_sim = hit_ci = sec_sim = sec_ci = None
        if spec.sim is not None:
            single = np.zeros(catalog.file_count)
            single[0] = p
            hit_res = simulate_hit(
                PlacementPolicy(single),
                catalog,
                params,
                SimConfig(
                    trials=spec.sim.trials,
                    seed=_derive_seed(spec.sim.seed, point_idx, 0, 0),
                ),
            )
            hit_sim = hit_res.per_file[0].estimate
            hit_ci = hit_res.per_file[0].ci95_halfwidth
            sec = simulate_secrecy(
                p,
                params,
                SimConfig(
                    trials=spec.sim.trials,
                    seed=_derive_seed(spec.sim.seed, point_idx, 0, 1),
                ),
            )
            sec_sim = sec.estimate
            sec_ci = sec.ci95_halfwidth
        rows.append(
            {
                "sweep_var": "p_i",
                "sweep_value": value,
                "scheme": "FIXED",
                "file_index": 0,
                "p_star": p,
                "psi_cap": None,
                "hit_analytic": conditional_hit_probability(p, params),
                "hit_sim": hit_sim,
                "hit_ci": hit_ci,
                "secrecy_lb": secrecy_probability_lower_bound(p, params),
                "secrecy_exact": secrecy_probability_exact(p, params),
                "secrecy_sim": sec_sim,
                "secrecy_ci": sec_ci,
            }
        )
        return rows

    caps = placement_caps(catalog, params)
    for scheme_idx, scheme in enumerate(spec.schemes):
        policy = _scheme_policy(scheme, catalog, params, caps, spec.fixed_policy)
        hit_res = None
        if spec.sim is not None:
            hit_res = simulate_hit(
                policy,
                catalog,
                params,
                SimConfig(
                    trials=spec.sim.trials,
                    seed=_derive_seed(spec.sim.seed, point_idx, scheme_idx, 0),
                ),
            )
        for i in range(catalog.file_count):
            p_i = float(policy.p[i])
            sec_sim = sec_ci = None
            if spec.sim is not None:
                sec = simulate_secrecy(
                    p_i,
                    params,
                    SimConfig(
                        trials=spec.sim.trials,
                        seed=_derive_seed(
                            spec.sim.seed, point_idx, scheme_idx, 1, i
                        ),
                    ),
                )
                sec_sim = sec.estimate
                sec_ci = sec.ci95_halfwidth
            rows.append(
                {
                    "sweep_var": spec.sweep_var,
                    "sweep_value": value,
                    "scheme": scheme,
                    "file_index": i + 1,
                    "p_star": p_i,
                    "psi_cap": float(caps[i]),
                    "hit_analytic": conditional_hit_probability(p_i, params),
                    "hit_sim": hit_res.per_file[i].estimate if hit_res else None,
                    "hit_ci": hit_res.per_file[i].ci95_halfwidth if hit_res else None,
                    "secrecy_lb": secrecy_probability_lower_bound(p_i, params),
                    "secrecy_exact": secrecy_probability_exact(p_i, params),
                    "secrecy_sim": sec_sim,
                    "secrecy_ci": sec_ci,
                }
            )
        # Aggregate row: file_index 0, popularity-weighted hit probability.
        rows.append(
            {
                "sweep_var": spec.sweep_var,
                "sweep_value": value,
                "scheme": scheme,
                "file_index": 0,
                "p_star": float(policy.p.sum()),
                "psi_cap": float(caps.sum()),
                "hit_analytic": hit_probability(policy, catalog, params),
                "hit_sim": hit_res.aggregate.estimate if hit_res else None,
                "hit_ci": hit_res.aggregate.ci95_halfwidth if hit_res else None,
                "secrecy_lb": None,
                "secrecy_exact": None,
                "secrecy_sim": None,
                "secrecy_ci": None,
            }
        )
    return rows


def _thread_count():
    raw = os.environ.get("CACHEPLACE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise SpecError(f"CACHEPLACE_THREADS must be an integer, got {raw!r}")
    return max(1, n)


def run_sweep(spec):
    """Evaluate every (sweep value, scheme) combination; returns CSV rows."""
    if spec.sweep_var is None:
        raise SpecError("sweep command requires a 'sweep' section in the config")
    points = list(enumerate(spec.sweep_values))
    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(
                pool.map(lambda pv: _sweep_point_rows(spec, *pv), points)
            )
    else:
        chunks = [_sweep_point_rows(spec, idx, v) for idx, v in points]
    rows = [row for chunk in chunks for row in chunk]
    return rows


def write_rows(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[col]) for col in CSV_COLUMNS])


def write_sidecar(spec, path):
    with open(path, "w") as fh:
        json.dump(spec.resolved_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_validate(spec):
    """Compare closed forms against Monte Carlo; returns (report_rows, ok)."""
    if spec.sim is None:
        raise SpecError("validate requires simulation (remove --no-sim / add 'sim')")
    hit_grid = [float(v) for v in spec.validate.get("hit_p", [0.2, 0.5, 1.0])]
    secrecy_grid = [float(v) for v in spec.validate.get("secrecy_p", [0.2, 0.5, 0.8])]
    hit_tol = float(spec.validate.get("hit_tol", 0.01))
    secrecy_tol = float(spec.validate.get("secrecy_tol", 0.015))
    params = spec.params
    catalog = spec.catalog
    report = []

    for k, p in enumerate(hit_grid):
        policy = PlacementPolicy.uniform(catalog.file_count, p)
        res = simulate_hit(
            policy,
            catalog,
            params,
            SimConfig(trials=spec.sim.trials, seed=_derive_seed(spec.sim.seed, 0, k)),
        )
        for i in range(catalog.file_count):
            analytic = conditional_hit_probability(p, params)
            sim = res.per_file[i]
            tol = max(sim.ci95_halfwidth, hit_tol)
            gap = abs(analytic - sim.estimate)
            report.append(
                {
                    "quantity": "hit",
                    "point": f"p={p:g} file={i + 1}",
                    "analytic": analytic,
                    "simulated": sim.estimate,
                    "ci": sim.ci95_halfwidth,
                    "tolerance": tol,
                    "gap": gap,
                    "status": "pass" if gap <= tol else "fail",
                    "note": "ci-wide" if sim.ci95_halfwidth > hit_tol else "",
                }
            )

    for k, p in enumerate(secrecy_grid):
        sim = simulate_secrecy(
            p,
            params,
            SimConfig(trials=spec.sim.trials, seed=_derive_seed(spec.sim.seed, 1, k)),
        )
        for name, analytic in (
            ("secrecy_lb", secrecy_probability_lower_bound(p, params)),
            ("secrecy_exact", secrecy_probability_exact(p, params)),
        ):
            tol = max(sim.ci95_halfwidth, secrecy_tol)
            gap = abs(analytic - sim.estimate)
            report.append(
                {
                    "quantity": name,
                    "point": f"p={p:g}",
                    "analytic": analytic,
                    "simulated": sim.estimate,
                    "ci": sim.ci95_halfwidth,
                    "tolerance": tol,
                    "gap": gap,
                    "status": "pass" if gap <= tol else "fail",
                    "note": "ci-wide" if sim.ci95_halfwidth > secrecy_tol else "",
                }
            )

    ok = all(row["status"] == "pass" for row in report)
    return report, ok


VALIDATE_COLUMNS = [
    "quantity", "point", "analytic", "simulated", "ci", "tolerance",
    "gap", "status", "note",
]


def write_validate_rows(report, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(VALIDATE_COLUMNS)
        for row in report:
            writer.writerow([_fmt(row[col]) for col in VALIDATE_COLUMNS])


def run_solve(spec):
    """Solve the single-instance placement problem; returns a JSON-able dict."""
    solution = solve_ocp(spec.catalog, spec.params)
    mpc = mpc_placement(spec.catalog, spec.params, solution.caps)
    lcc = lcc_placement(spec.catalog, spec.params, solution.caps)
    return {
        "p_star": [float(v) for v in solution.policy.p],
        "caps": [float(v) for v in solution.caps],
        "dual": solution.dual,
        "active_set": list(solution.active_set),
        "objective": solution.objective,
        "hit_probability": {
            "OCP": solution.objective,
            "MPC": hit_probability(mpc, spec.catalog, spec.params),
            "LCC": hit_probability(lcc, spec.catalog, spec.params),
        },
    }


def _add_common_flags(sub):
    sub.add_argument("--config", required=True, help="path to a JSON config file")
    sub.add_argument("--seed", type=int, default=None, help="override the sim seed")
    sub.add_argument(
        "--trials", type=int, default=None, help="override the sim trial count"
    )
    sub.add_argument("--out", default=None, help="output file path")
    sub.add_argument(
        "--no-sim", action="store_true", help="skip Monte Carlo simulation"
    )


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cacheplace",
        description=(
            "Hit/secrecy analysis and optimal content placement for "
            "cache-enabled stochastic networks"
        ),
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("sweep", "run a parameter sweep and write a CSV result table"),
        ("validate", "compare closed forms against Monte Carlo estimates"),
        ("solve", "solve one placement instance and dump the solution"),
    ):
        _add_common_flags(subparsers.add_parser(name, help=help_text))
    args = parser.parse_args(argv)

    try:
        doc = _load_config(args.config)
        spec = parse_spec(
            doc,
            config_dir=os.path.dirname(os.path.abspath(args.config)),
            seed=args.seed,
            trials=args.trials,
            out=args.out,
            no_sim=args.no_sim,
        )
        if args.command == "sweep":
            rows = run_sweep(spec)
            if not spec.output:
                raise SpecError("sweep requires an output path (--out or 'output')")
            write_rows(rows, spec.output)
            write_sidecar(spec, spec.output + ".spec.json")
            print(f"wrote {len(rows)} rows to {spec.output}")
            return 0
        if args.command == "validate":
            report, ok = run_validate(spec)
            if spec.output:
                write_validate_rows(report, spec.output)
                write_sidecar(spec, spec.output + ".spec.json")
            for row in report:
                print(
                    f"{row['status']:4s} {row['quantity']:14s} {row['point']:18s} "
                    f"analytic={row['analytic']:.4f} sim={row['simulated']:.4f} "
                    f"gap={row['gap']:.4f} tol={row['tolerance']:.4f} {row['note']}"
                )
            return 0 if ok else 1
        result = run_solve(spec)
        text = json.dumps(result, indent=2)
        if spec.output:
            with open(spec.output, "w") as fh:
                fh.write(text + "\n")
        print(text)
        return 0
    except (SpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``kaclab <subcommand> ...``.

Exit status: 0 on success, 2 when a hypothesis check refuses the run, 1 on
any other error (including usage errors).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .cfgrid import CfGrid
from .convergence_lab import HypothesisRefusal, RelaxationConfig, run_relaxation
from .initial_data import build_appendix_b, classify_sda, parse_initial, tail_functional
from .kernels import HypothesisError, check_smallness, find_alpha, find_roots, parse_kernel, s_moment
from .prescribed_trees import build_plan
from .rng import WORKERS_ENV, default_workers
from .stable_laws import attraction_params, invert_cf_to_cdf, stable_cf
from .tree_engine import sample_m_infinity, simulate_velocities
from .wild_solver import wild_cf

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_REFUSED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]


# -- output helpers ---------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def _csv_text(header: list[str], rows, config: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _json_text(payload: dict, config: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "config": config, **payload}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    return obj


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def load_config(path: str) -> dict:
    """Read a JSON config, or the config echoed into a JSON or CSV output."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return doc.get("config", doc)
    for line in text.splitlines():
        if line.startswith("# config: "):
            return json.loads(line[len("# config: "):])
    raise ValueError(f"no config found in {path}")


# -- subcommands --------------------------------------------------------------------

def cmd_simulate(a, cfg):
    kernel = parse_kernel(a.kernel)
    initial = parse_initial(a.initial)
    alpha = a.alpha
    if alpha is None:
        try:
            alpha = find_alpha(kernel)
        except HypothesisError:
            alpha = math.nan
    rows = []
    for t in _floats(a.t):
        sim = simulate_velocities(t, kernel, initial, a.replicates, a.seed,
                                  alpha if math.isfinite(alpha) else 1.0, a.workers)
        mass = sim.mass_alpha if math.isfinite(alpha) else np.full(sim.v.size, math.nan)
        rows.extend((t, r, sim.v[r], sim.nu[r], mass[r]) for r in range(sim.v.size))
    _emit(_csv_text(["t", "replicate", "v", "nu", "mass_alpha"], rows, cfg), a.out)


def cmd_wild(a, cfg):
    kernel = parse_kernel(a.kernel)
    initial = parse_initial(a.initial)
    n = a.grid
    if n < 5 or (n - 1) & (n - 2):
        raise ValueError("--grid must be 2^m + 1")
    phi0 = CfGrid.from_function(initial.cf, a.xi_max, int(round(math.log2(n - 1))))
    res = wild_cf(a.t, phi0, kernel, a.ntrunc, a.quad_nodes)
    g = res.grid
    rows = [(x, v.real, v.imag, res.truncation_bound) for x, v in zip(g.xi, g.values)]
    _emit(_csv_text(["xi", "re", "im", "bound"], rows, cfg), a.out)


def cmd_equilibrium(a, cfg):
    params = attraction_params(a.alpha, a.c1, a.c2, a.m01, a.m02, chi=a.chi)
    if a.kernel:
        from .convergence_lab import EquilibriumSpec
        m = sample_m_infinity(parse_kernel(a.kernel), a.alpha, a.n_big, a.ensemble, seed=a.seed,
                              workers=a.workers).values
        spec = EquilibriumSpec(a.alpha, params, m)
        f = spec.cf
    else:
        def f(xi):
            return stable_cf(xi, params)
    grid = CfGrid.from_function(f, a.xi_max, a.log2_nodes)
    lo, hi, npts = a.x_range
    x = np.linspace(lo, hi, int(npts))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        inv = invert_cf_to_cdf(grid, x)
    rows = [("cf", xi, v.real, v.imag) for xi, v in zip(grid.xi, grid.values)]
    rows += [("cdf", xv, F, inv.budget) for xv, F in zip(x, inv.cdf)]
    cfg = {**cfg, "resolved_params": {"alpha": params.alpha, "chi": params.chi, "k": params.k,
                                      "gamma": params.gamma}}
    _emit(_csv_text(["table", "abscissa", "value", "aux"], rows, cfg), a.out)


def cmd_classify(a, cfg):
    law = parse_initial(a.initial)
    res = classify_sda(law, a.alpha, a.tol)
    tf = tail_functional(law, min(a.alpha, 2.0), tol=a.tol)
    payload = {"member": res.member, "c1": res.c1, "c2": res.c2, "basis": res.basis, "detail": res.detail,
               "tail": {"liminf": tf.liminf_est, "limsup": tf.limsup_est, "spread": tf.spread,
                        "notice": tf.notice}}
    if a.tail_out:
        rows = list(zip(tf.x, tf.upper, tf.lower))
        _emit(_csv_text(["x", "upper", "lower"], rows, cfg), a.tail_out)
    _emit(_json_text(payload, cfg), a.out)


def cmd_appendix_b(a, cfg):
    law = build_appendix_b(a.I, a.S, a.k, a.s1, a.alpha, a.m_max, require_cdf=not a.positive_side_only)
    s, i = law.breakpoints.s, law.breakpoints.i
    payload = {
        "c": law.c, "is_cdf": law.is_cdf, "boundary_case": law.boundary_case,
        "s": s, "i": i,
        "check_s": s ** a.alpha * law.sf(s), "check_i": i ** a.alpha * law.sf(i),
    }
    _emit(_json_text(payload, cfg), a.out)


def cmd_prescribe_tree(a, cfg):
    plan = build_plan(_floats(a.y), a.eps, a.alpha)
    _emit(_json_text(plan.to_dict(), cfg), a.out)


def cmd_find_alpha(a, cfg):
    kernel = parse_kernel(a.kernel)
    alpha = find_alpha(kernel, a.p_max, a.tol)
    if a.out:
        sm = check_smallness(kernel, np.linspace(alpha, 4 * alpha, 13)[1:])
        payload = {"alpha": alpha, "S_at_alpha": s_moment(kernel, alpha).value,
                   "roots": find_roots(kernel, max(a.p_max, 2 * alpha)),
                   "smallness": {"holds": sm.holds, "witness_p": sm.witness_p}}
        _emit(_json_text(payload, cfg), a.out)
    print(repr(alpha))


def cmd_report(a, cfg):
    fields = set(RelaxationConfig.__dataclass_fields__)
    raw = {k: v for k, v in cfg.items() if k in fields}
    raw["t_list"] = tuple(raw.get("t_list", RelaxationConfig.t_list))
    rc = RelaxationConfig(**raw, workers=a.workers)
    rep = run_relaxation(rc)
    out = Path(a.out or "report")
    out.mkdir(parents=True, exist_ok=True)
    echo = rc.resolved()
    cols = ["t", "n", "ks", "ks_critical", "cf_dist", "cf_se_max", "cf_within", "mean", "median", "var", "q25",
            "q75", "nu_mean", "mass_mean"]
    series = [[row.get(c, "") for c in cols] for row in rep.rows]
    (out / "series.csv").write_text(_csv_text(cols, series, echo))
    tails = []
    for row in rep.rows:
        for x, up, lo in zip(row["tail_x"], row["tail_upper"], row["tail_lower"]):
            tails.append((row["t"], x, "upper", up))
            tails.append((row["t"], x, "lower", lo))
    (out / "tails.csv").write_text(_csv_text(["t", "x", "side", "value"], tails, echo))
    meta = {"alpha": rep.alpha, "regime": rep.regime, "hypotheses_ok": rep.hypotheses_ok,
            "failures": rep.failures, "annotation": rep.annotation, "equilibrium": rep.equilibrium,
            "version": __version__}
    (out / "metadata.json").write_text(_json_text(meta, echo))
    if rep.annotation:
        print(rep.annotation)


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kaclab", description="Inelastic Kac-type kinetic equation laboratory.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=None,
                        help=f"worker processes (default ${WORKERS_ENV} or 1); results do not depend on it")
        sp.add_argument("--out", default=None, help="output path (stdout when omitted)")
        sp.add_argument("--config", default=None, help="JSON config (or a previous output); overrides flags")
        return sp

    sp = common(sub.add_parser("simulate", help="sample V_t through random McKean trees"))
    sp.add_argument("--t", default="1", help="comma-separated times")
    sp.add_argument("--kernel", default="kac")
    sp.add_argument("--initial", default="gaussian:0,1")
    sp.add_argument("--replicates", type=int, default=1000)
    sp.add_argument("--alpha", type=float, default=None, help="exponent of the mass column (default: index)")
    sp.set_defaults(func=cmd_simulate)

    sp = common(sub.add_parser("wild", help="CF at time t from the truncated Wild series"))
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--kernel", default="kac")
    sp.add_argument("--initial", default="gaussian:0,1")
    sp.add_argument("--ntrunc", type=int, default=None)
    sp.add_argument("--grid", type=int, default=2 ** 11 + 1, help="number of xi nodes, 2^m + 1")
    sp.add_argument("--xi-max", type=float, default=16.0)
    sp.add_argument("--quad-nodes", type=int, default=64)
    sp.set_defaults(func=cmd_wild)

    sp = common(sub.add_parser("equilibrium", help="stable (mixture) CF table and inverted CDF"))
    sp.add_argument("--alpha", type=float, required=False, default=2.0)
    sp.add_argument("--c1", type=float, default=0.0)
    sp.add_argument("--c2", type=float, default=0.0)
    sp.add_argument("--m01", type=float, default=0.0)
    sp.add_argument("--m02", type=float, default=1.0, help="second moment (used when alpha = 2)")
    sp.add_argument("--chi", type=float, default=None)
    sp.add_argument("--kernel", default=None, help="mix over the M ensemble of this kernel")
    sp.add_argument("--n-big", type=int, default=2 ** 10)
    sp.add_argument("--ensemble", type=int, default=10 ** 4)
    sp.add_argument("--xi-max", type=float, default=64.0)
    sp.add_argument("--log2-nodes", type=int, default=14)
    sp.add_argument("--x-range", type=float, nargs=3, default=[-5.0, 5.0, 201], metavar=("LO", "HI", "N"))
    sp.set_defaults(func=cmd_equilibrium)

    sp = common(sub.add_parser("classify", help="domain-of-attraction membership of an initial law"))
    sp.add_argument("--initial", default="gaussian:0,1")
    sp.add_argument("--alpha", type=float, default=2.0)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--tail-out", default=None, help="CSV dump of the tail functionals")
    sp.set_defaults(func=cmd_classify)

    sp = common(sub.add_parser("appendix-b", help="oscillating-tail law and its breakpoints"))
    sp.add_argument("--I", type=float, default=1.0)
    sp.add_argument("--S", type=float, default=2.0)
    sp.add_argument("--k", type=float, default=2.5)
    sp.add_argument("--s1", type=float, default=3.0)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--m-max", type=int, default=20)
    sp.add_argument("--positive-side-only", action="store_true",
                    help="allow s1^alpha < S + I (breakpoints only; F is then not a CDF)")
    sp.set_defaults(func=cmd_appendix_b)

    sp = common(sub.add_parser("prescribe-tree", help="nested comb trees with prescribed weights"))
    sp.add_argument("--y", default="3,10")
    sp.add_argument("--eps", type=float, default=0.5)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.set_defaults(func=cmd_prescribe_tree)

    sp = common(sub.add_parser("find-alpha", help="smallest root of S(p) = 0"))
    sp.add_argument("--kernel", default="kac")
    sp.add_argument("--p-max", type=float, default=8.0)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_find_alpha)

    sp = common(sub.add_parser("report", help="relaxation experiment from a config file"))
    sp.set_defaults(func=cmd_report)
    return p


_SKIP = {"config", "out", "workers", "func", "tail_out"}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        if not argv:
            parser.print_help(sys.stderr)
            return EXIT_ERROR
        a = parser.parse_args(argv)
        if a.command is None:
            parser.print_help(sys.stderr)
            return EXIT_ERROR
        overrides = load_config(a.config) if a.config else {}
        if a.command == "report":
            if not a.config:
                raise UsageError("report needs --config")
            cfg = overrides
        else:
            for k, v in overrides.items():
                key = k.replace("-", "_")
                if key in vars(a) and key not in _SKIP | {"command"}:
                    setattr(a, key, v)
            cfg = {k: v for k, v in sorted(vars(a).items()) if k not in _SKIP}
        if a.workers is None:
            a.workers = default_workers()
        a.func(a, cfg)
        return EXIT_OK
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    except (HypothesisRefusal, HypothesisError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        if os.environ.get("KACLAB_DEBUG"):
            raise
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())

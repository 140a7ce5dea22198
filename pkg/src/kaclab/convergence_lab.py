"""Relaxation experiments against the predicted stable-mixture equilibria."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .cfgrid import CfGrid
from .initial_data import InitialLaw, classify_sda, parse_initial, symmetrize
from .kernels import HypothesisError, KernelModel, check_smallness, find_alpha, find_roots, parse_kernel, \
    support_conditions
from .rng import substream
from .stable_laws import StableParams, attraction_params, invert_cf_to_cdf, sample_stable, stable_cf
from .tree_engine import MInfinity, sample_m_infinity, simulate_velocities

VIOLATED_NOTE = "hypothesis violated: convergence not predicted"
DEFAULT_SCHEDULE = (0.5, 1.0, 2.0, 4.0, 8.0)
_TAG_EQUILIBRIUM = 21


class HypothesisRefusal(RuntimeError):
    """A run was refused because a named hypothesis of the selected regime fails."""

    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        super().__init__(f"hypothesis '{hypothesis}' fails" + (f": {detail}" if detail else ""))


@dataclass
class EquilibriumSpec:
    alpha: float
    params: StableParams
    m_ensemble: np.ndarray

    @property
    def scale_power(self) -> float:
        return 1.0 if self.alpha == 1 else 1.0 / self.alpha

    def cf(self, xi) -> np.ndarray:
        """Mixture CF at arbitrary points."""
        xi = np.asarray(xi, dtype=float)
        m, counts = np.unique(self.m_ensemble, return_counts=True)
        scale = m ** self.scale_power
        out = np.zeros(xi.shape, dtype=complex)
        for lo in range(0, m.size, 64):
            s, c = scale[lo:lo + 64], counts[lo:lo + 64]
            out += np.tensordot(c, stable_cf(np.multiply.outer(s, xi), self.params), axes=1)
        return out / counts.sum()


def equilibrium_cf(xi_grid, spec: EquilibriumSpec) -> CfGrid:
    """Ensemble average of stable_cf(xi m^(1/alpha)) (xi m when alpha = 1) on a CF grid."""
    xi = np.asarray(xi_grid, dtype=float)
    return CfGrid(xi, spec.cf(xi))


def sample_equilibrium(spec: EquilibriumSpec, rng: np.random.Generator, size: int | None = None):
    n = 1 if size is None else size
    m = spec.m_ensemble[rng.integers(0, spec.m_ensemble.size, n)]
    z = sample_stable(spec.params, rng, n)
    out = m ** spec.scale_power * z
    return float(out[0]) if size is None else out


def build_equilibrium(kernel: KernelModel, initial: InitialLaw, alpha: float | None = None, *,
                      n_big: int = 2 ** 10, ensemble: int = 10 ** 4, seed: int = 0, chi: float | None = None,
                      symmetrized: bool = False, workers: int | None = None) -> EquilibriumSpec:
    """Predicted limit: the stable law attracting ``initial`` mixed over the M_infinity ensemble.

    With ``symmetrized`` the tail constants and moments of the symmetrized
    datum are used, as is appropriate for quarter-turn invariant kernels.
    """
    alpha = find_alpha(kernel) if alpha is None else float(alpha)
    law = symmetrize(initial) if symmetrized else initial
    cls = classify_sda(law, min(alpha, 2.0))
    if cls.member is not True:
        raise HypothesisRefusal("domain of attraction", f"initial law not attracted for alpha={alpha}")
    if alpha == 2:
        params = attraction_params(2.0, m01=law.m01, m02=law.m02)
    else:
        params = attraction_params(alpha, cls.c1, cls.c2, chi=chi)
    m = sample_m_infinity(kernel, alpha, n_big, ensemble, seed=seed, workers=workers)
    return EquilibriumSpec(alpha, params, m.values)


def doubling_gate(kernel: KernelModel, alpha: float, n_big: int = 2 ** 10, ensemble: int = 10 ** 4,
                  seed: int = 0, rel_tol: float = 0.01, workers: int | None = None) -> dict:
    """Compare mean and quartiles of the M ensemble at depths n_big and 2 n_big."""
    a = sample_m_infinity(kernel, alpha, n_big, ensemble, seed=seed, workers=workers)
    b = sample_m_infinity(kernel, alpha, 2 * n_big, ensemble, seed=seed, workers=workers)

    def summary(m: MInfinity):
        q = np.quantile(m.values, [0.25, 0.5, 0.75])
        return [m.mean, *q.tolist()]

    sa, sb = summary(a), summary(b)
    shifts = [abs(y - x) / max(abs(x), 1e-300) for x, y in zip(sa, sb)]
    return {"n_big": n_big, "stats_n": sa, "stats_2n": sb, "rel_shift": shifts,
            "passed": bool(max(shifts) < rel_tol)}


# -- hypothesis checks ------------------------------------------------------------

@dataclass
class RegimeCheck:
    regime: str
    alpha: float
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    symmetrized: bool = False

    @property
    def ok(self) -> bool:
        return not self.failures


def check_regime(kernel: KernelModel, initial: InitialLaw, regime: str = "auto",
                 alpha: float | None = None, seed: int = 0) -> RegimeCheck:
    """Evaluate the hypotheses of the convergence theorem for ``regime``.

    ``sufficiency``: nonnegative support, smallness, NDA-type conditions on
    the datum.  ``quarter_turn``: rotation invariance, support condition,
    smallness, and attraction of the symmetrized datum.
    """
    try:
        alpha = find_alpha(kernel) if alpha is None else float(alpha)
    except HypothesisError as exc:
        return RegimeCheck(regime, math.nan, ["moment equation root"], [str(exc)])
    if regime == "auto":
        regime = "quarter_turn" if kernel.quarter_turn_invariant else "sufficiency"
    rc = RegimeCheck(regime, alpha, symmetrized=(regime == "quarter_turn"))
    if not 0 < alpha <= 2:
        rc.failures.append("alpha in (0, 2]")
        return rc
    grid = np.linspace(alpha, 4 * alpha, 13)[1:]
    if not check_smallness(kernel, grid).holds:
        rc.failures.append("S(p) < 0 for some p")
    if regime == "sufficiency":
        if not kernel.nonnegative_support:
            rc.failures.append("nonnegative support")
        cls = classify_sda(initial, alpha)
        if alpha < 2 and cls.member is not True:
            rc.failures.append("tail limits (NDA)")
        if alpha == 1 and cls.member is True and cls.c1 != cls.c2:
            rc.failures.append("c1 = c2")
        if 1 < alpha <= 2 and initial.m01 != 0:
            rc.failures.append("zero mean")
        if alpha == 2 and cls.member is not True:
            rc.failures.append("finite second moment")
    elif regime == "quarter_turn":
        if not kernel.quarter_turn_invariant:
            rc.failures.append("quarter-turn invariance")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            sup = support_conditions(kernel, alpha, rng_seed=seed)
        if not sup.all_hit:
            rc.failures.append("support condition")
        cls = classify_sda(symmetrize(initial), alpha)
        if cls.member is not True:
            rc.failures.append("symmetrized tail limit" if alpha < 2 else "finite second moment")
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return rc


# -- relaxation runs ----------------------------------------------------------------

@dataclass
class RelaxationConfig:
    kernel: str = "kac"
    initial: str = "gaussian:0,1"
    t_list: tuple = DEFAULT_SCHEDULE
    replicates: int = 10 ** 5
    seed: int = 0
    regime: str = "auto"
    alpha: float | None = None
    override: bool = False
    n_big: int = 2 ** 10
    ensemble: int = 10 ** 4
    chi: float | None = None
    cf_points: int = 41
    cf_half_width: float = 5.0
    inversion_xi_max: float = 64.0
    inversion_log2_nodes: int = 14
    ks_points: int = 2001
    ks_window: float = 0.02
    workers: int | None = None

    def resolved(self) -> dict:
        d = asdict(self)
        d["t_list"] = [float(t) for t in self.t_list]
        d.pop("workers")
        return d


@dataclass
class RelaxationReport:
    config: dict
    alpha: float
    regime: str
    hypotheses_ok: bool
    failures: list
    annotation: str
    equilibrium: dict | None
    rows: list           # one dict per t

    def to_dict(self) -> dict:
        return asdict(self)


def empirical_cf(v: np.ndarray, xi, chunk: int = 200_000):
    """Empirical CF and per-point standard error of its modulus error."""
    xi = np.asarray(xi, dtype=float)
    v = np.asarray(v, dtype=float)
    sums = np.zeros(xi.shape, dtype=complex)
    sq = np.zeros(xi.shape)
    for lo in range(0, v.size, chunk):
        ph = np.multiply.outer(xi, v[lo:lo + chunk])
        c, s = np.cos(ph), np.sin(ph)
        sums += c.sum(axis=1) + 1j * s.sum(axis=1)
        sq += (c * c + s * s).sum(axis=1)
    n = v.size
    mean = sums / n
    var = (sq / n - np.abs(mean) ** 2) * n / (n - 1)
    return mean, np.sqrt(np.maximum(var, 0.0) / n)


def windowed_ks(v: np.ndarray, xk: np.ndarray, Fk: np.ndarray) -> float:
    """sup |F_n - F| over the reference window [xk[0], xk[-1]] (F linearly interpolated)."""
    srt = np.sort(v)
    n = srt.size
    lo, hi = np.searchsorted(srt, [xk[0], xk[-1]], side="left")
    idx = np.arange(lo, min(hi, n))
    ref = np.interp(srt[idx], xk, Fk)
    d = np.max(np.abs(ref - idx / n), initial=0.0)
    d = max(d, np.max(np.abs((idx + 1) / n - ref), initial=0.0))
    ends = np.searchsorted(srt, xk[[0, -1]], side="right") / n
    return float(max(d, *np.abs(ends - Fk[[0, -1]])))


def run_relaxation(config: RelaxationConfig) -> RelaxationReport:
    kernel = parse_kernel(config.kernel)
    initial = parse_initial(config.initial)
    rc = check_regime(kernel, initial, config.regime, config.alpha, config.seed)
    if not rc.ok and not config.override:
        raise HypothesisRefusal(rc.failures[0], f"regime {rc.regime}; all failures: {rc.failures}")
    alpha = rc.alpha
    annotation = "" if rc.ok else VIOLATED_NOTE
    xi = np.linspace(-config.cf_half_width, config.cf_half_width, config.cf_points)

    eq = None
    eq_info = None
    try:
        if math.isfinite(alpha) and alpha <= 2:
            eq = build_equilibrium(kernel, initial, alpha, n_big=config.n_big, ensemble=config.ensemble,
                                   seed=config.seed, chi=config.chi, symmetrized=rc.symmetrized,
                                   workers=config.workers)
    except (HypothesisRefusal, ValueError) as exc:
        if rc.ok:
            raise
        annotation = f"{VIOLATED_NOTE} ({exc})"
    cdf_ref = None
    if eq is not None:
        q = np.quantile(sample_equilibrium(eq, substream(config.seed, _TAG_EQUILIBRIUM), 20_000),
                        [config.ks_window, 1 - config.ks_window])
        xk = np.linspace(q[0], q[1], config.ks_points)
        # quadrature error grows with h |x|; refine the CF grid until h |x| <= 0.1 over the window
        log2 = config.inversion_log2_nodes
        x_reach = float(np.max(np.abs(q)))
        while 2 * config.inversion_xi_max / 2 ** log2 * x_reach > 0.1 and log2 < 20:
            log2 += 1
        grid = equilibrium_cf(np.linspace(-config.inversion_xi_max, config.inversion_xi_max, 2 ** log2 + 1), eq)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            inv = invert_cf_to_cdf(grid, xk)
        cdf_ref = (xk, inv.cdf, inv.budget)
        m = eq.m_ensemble
        eq_info = {
            "alpha": eq.alpha, "chi": eq.params.chi, "k": eq.params.k, "gamma": eq.params.gamma,
            "m_mean": float(m.mean()), "m_stderr": float(m.std(ddof=1) / math.sqrt(m.size)) if m.size > 1 else 0.0,
            "inversion_budget": inv.budget, "inversion_decayed": inv.decayed,
        }
    eq_cf = eq.cf(xi) if eq is not None else None

    rows = []
    mass_alpha = alpha if math.isfinite(alpha) else 1.0
    for t in config.t_list:
        sim = simulate_velocities(float(t), kernel, initial, config.replicates, config.seed, mass_alpha,
                                  config.workers)
        v = sim.v
        row = {
            "t": float(t), "n": int(v.size), "nu_mean": float(sim.nu.mean()),
            "mass_mean": float(sim.mass_alpha.mean()),
            "mean": float(v.mean()), "median": float(np.median(v)), "var": float(v.var(ddof=1)),
            "q25": float(np.quantile(v, 0.25)), "q75": float(np.quantile(v, 0.75)),
        }
        xt = 2.0 ** np.arange(0, 21)
        srt = np.sort(v)
        n = v.size
        up = (n - np.searchsorted(srt, xt, side="right")) / n
        lo = np.searchsorted(srt, -xt, side="left") / n
        row["tail_x"] = xt.tolist()
        row["tail_upper"] = (xt ** mass_alpha * up).tolist()
        row["tail_lower"] = (xt ** mass_alpha * lo).tolist()
        if eq is not None:
            ecf, se = empirical_cf(v, xi)
            diff = np.abs(ecf - eq_cf)
            budget = cdf_ref[2]
            row.update({
                "cf_dist": float(diff.max()), "cf_se_max": float(se.max()),
                "cf_excess": float(np.max(diff - 3 * se)),
                "cf_within": bool(np.all(diff <= 3 * se + budget)),
            })
            xk, Fk, budget = cdf_ref
            row.update({
                "ks": windowed_ks(v, xk, Fk),
                "ks_critical": float(stats.kstwo.ppf(0.99, n) + budget),
            })
        rows.append(row)
    return RelaxationReport(config.resolved(), float(alpha), rc.regime, rc.ok, rc.failures, annotation,
                            eq_info, rows)


# -- the alpha > 2 regime -----------------------------------------------------------

@dataclass
class DegenerateReport:
    roots: list
    rows: list
    concentrates_at: str      # "one", "zero" or "neither"
    v_behavior: str


def degenerate_regime_check(kernel: KernelModel, initial: InitialLaw, t_list=(1.0, 2.0, 4.0),
                            replicates: int = 10 ** 5, seed: int = 0, p_max: float = 16.0,
                            workers: int | None = None) -> DegenerateReport:
    """Law of the plain weight sum sum_j beta_j across t for a kernel with a root of S above 2.

    A sum identically 1 means V_t keeps the datum's location; a sum
    collapsing to 0 drives V_t to 0.
    """
    roots = find_roots(kernel, p_max)
    if not any(r > 2 + 1e-6 for r in roots):
        raise HypothesisRefusal("root of S above 2", f"roots found: {roots}")
    rows = []
    for t in t_list:
        sim = simulate_velocities(float(t), kernel, initial, replicates, seed, 1.0, workers)
        s = sim.beta_sum
        rows.append({
            "t": float(t), "sum_mean": float(s.mean()), "sum_var": float(s.var(ddof=1)),
            "frac_exact_one": float(np.mean(s == 1.0)), "frac_near_zero": float(np.mean(np.abs(s) < 0.1)),
            "v_mean": float(sim.v.mean()), "v_var": float(sim.v.var(ddof=1)),
            "v_all_equal_first": bool(np.all(sim.v == sim.v[0])),
        })
    if all(r["frac_exact_one"] == 1.0 for r in rows):
        verdict = "one"
    elif all(a["sum_var"] > b["sum_var"] for a, b in zip(rows, rows[1:])) and \
            all(a["frac_near_zero"] < b["frac_near_zero"] for a, b in zip(rows, rows[1:])):
        verdict = "zero"
    else:
        verdict = "neither"
    behaviour = {"one": "V_t reproduces the datum", "zero": "V_t collapses toward 0",
                 "neither": "no concentration detected"}[verdict]
    return DegenerateReport(roots, rows, verdict, behaviour)

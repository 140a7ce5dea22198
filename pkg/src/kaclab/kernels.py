"""Collision kernels: the joint law of the coefficients (L, R) in v' = L v + R w.

A :class:`KernelModel` bundles a sampler, the moment functional
S(p) = E|L|^p + E|R|^p - 1, quadrature nodes for expectations over the
kernel, and the structural flags used by the convergence theorems.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize, special, stats
from scipy.spatial import cKDTree

from .rng import substream

TRIG_KINDS = ("kac", "inelastic")
KINDS = ("kac", "inelastic", "simplex", "point", "atoms", "gauss-equal", "gauss-line",
         "independent", "custom")

SPEC_GRAMMAR = (
    "kernel spec grammar: kac | inelastic:A0 | simplex:A0 | point:L0,R0 | "
    "atoms:W,L,R;W,L,R... | gauss-equal:VAR | gauss-line:VAR | independent:A0"
)


class MomentDivergenceError(ArithmeticError):
    """E|L|^p or E|R|^p is infinite."""


class HypothesisError(RuntimeError):
    """A structural hypothesis on the kernel (root of S, smallness, ...) fails."""


@dataclass(frozen=True)
class MomentForm:
    """How S(p) is evaluated when no closed form is used.

    ``kind`` is ``"closed"``, ``"quadrature"`` or ``"montecarlo"``.
    """

    kind: str = "closed"
    nodes: int = 256
    samples: int = 200_000
    seed: int = 0


class MomentEstimate(NamedTuple):
    value: float
    stderr: float
    method: str


@dataclass(frozen=True)
class KernelModel:
    kind: str
    params: tuple = ()
    nonnegative_support: bool = False
    quarter_turn_invariant: bool = False
    moment_form: MomentForm = field(default_factory=MomentForm)
    sampler: Callable | None = field(default=None, compare=False, repr=False)
    moment: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; {SPEC_GRAMMAR}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        if self.kind in ("inelastic", "simplex", "independent") and not self.params[0] > 0:
            raise ValueError(f"{self.kind} kernel needs a positive exponent")
        if self.kind in ("gauss-equal", "gauss-line") and not self.params[0] > 0:
            raise ValueError("Gaussian kernels need a positive variance")
        if self.kind == "atoms":
            if len(self.params) % 3 or not self.params:
                raise ValueError("atoms kernel needs triples (weight, l, r)")
            w = np.asarray(self.params[0::3])
            if np.any(w <= 0) or not math.isclose(w.sum(), 1.0, abs_tol=1e-12):
                raise ValueError("atom weights must be positive and sum to 1")
        if self.kind == "custom" and self.sampler is None:
            raise ValueError("custom kernel needs a sampler")

    # -- sampling ---------------------------------------------------------
    def sample(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``size`` i.i.d. pairs (L, R)."""
        k, p = self.kind, self.params
        if k in TRIG_KINDS:
            theta = 2.0 * np.pi * rng.random(size)
            return _trig_pair(theta, 2.0 if k == "kac" else p[0])
        if k == "simplex":
            u = rng.random(size)
            return u ** (1.0 / p[0]), (1.0 - u) ** (1.0 / p[0])
        if k == "independent":
            u = rng.random((2, size))
            return u[0] ** (1.0 / p[0]), u[1] ** (1.0 / p[0])
        if k == "point":
            return np.full(size, p[0]), np.full(size, p[1])
        if k == "atoms":
            w, l, r = _atoms(p)
            idx = np.searchsorted(np.cumsum(w)[:-1], rng.random(size), side="right")
            return l[idx], r[idx]
        if k == "gauss-equal":
            x = rng.normal(0.0, math.sqrt(p[0]), size)
            return x, x.copy()
        if k == "gauss-line":
            x = rng.normal(0.5, math.sqrt(p[0]), size)
            return x, 1.0 - x
        L, R = self.sampler(rng, size)
        return np.asarray(L, dtype=float), np.asarray(R, dtype=float)

    # -- moments ----------------------------------------------------------
    def closed_form_s(self, p: float) -> float | None:
        """S(p) in closed form, or None when the kernel has none."""
        k, a = self.kind, self.params
        if k == "kac":
            return 2.0 * _abs_cos_moment(p) - 1.0
        if k == "inelastic":
            return 2.0 * _abs_cos_moment(2.0 * p / a[0]) - 1.0
        if k in ("simplex", "independent"):
            return 2.0 * a[0] / (a[0] + p) - 1.0
        if k == "point":
            return _abs_pow(a[0], p) + _abs_pow(a[1], p) - 1.0
        if k == "atoms":
            w, l, r = _atoms(a)
            return float(sum(wi * (_abs_pow(li, p) + _abs_pow(ri, p)) for wi, li, ri in zip(w, l, r))) - 1.0
        if k == "gauss-equal":
            return 2.0 * _normal_abs_moment(0.0, a[0], p) - 1.0
        if k == "gauss-line":
            return 2.0 * _normal_abs_moment(0.5, a[0], p) - 1.0
        if self.moment is not None:
            return float(self.moment(p))
        return None

    def abs_bound(self) -> float:
        """Essential supremum of max(|L|, |R|)."""
        k, a = self.kind, self.params
        if k in TRIG_KINDS or k in ("simplex", "independent"):
            return 1.0
        if k == "point":
            return max(abs(a[0]), abs(a[1]))
        if k == "atoms":
            _, l, r = _atoms(a)
            return float(max(np.abs(l).max(), np.abs(r).max()))
        if k in ("gauss-equal", "gauss-line"):
            return math.inf
        L, R = self.sample(substream(self.moment_form.seed, 7), 100_000)
        return float(max(np.abs(L).max(), np.abs(R).max()))

    def expectation_nodes(self, n: int = 64) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Nodes (L, R) and weights for expectations over the kernel.

        Trigonometric kernels use Gauss-Legendre in the angle on each quarter
        turn with the same nodes repeated, so the node set is exactly
        invariant under (L, R) -> (R, -L).
        """
        k, a = self.kind, self.params
        if k in TRIG_KINDS:
            m = max(1, n // 4)
            x, w = np.polynomial.legendre.leggauss(m)
            theta = (x + 1.0) * (np.pi / 4.0)
            theta = np.concatenate([theta + j * np.pi / 2.0 for j in range(4)])
            weights = np.tile(w * (np.pi / 4.0), 4) / (2.0 * np.pi)
            L, R = _trig_pair(theta, 2.0 if k == "kac" else a[0])
            return L, R, weights
        if k == "simplex":
            x, w = np.polynomial.legendre.leggauss(n)
            u = 0.5 * (x + 1.0)
            return u ** (1.0 / a[0]), (1.0 - u) ** (1.0 / a[0]), 0.5 * w
        if k == "independent":
            m = max(4, n // 4)
            x, w = np.polynomial.legendre.leggauss(m)
            u = (0.5 * (x + 1.0)) ** (1.0 / a[0])
            uu, vv = np.meshgrid(u, u, indexing="ij")
            ww = np.outer(0.5 * w, 0.5 * w)
            return uu.ravel(), vv.ravel(), ww.ravel()
        if k == "point":
            return np.array([a[0]]), np.array([a[1]]), np.array([1.0])
        if k == "atoms":
            return _atoms(a)[1], _atoms(a)[2], _atoms(a)[0]
        if k in ("gauss-equal", "gauss-line"):
            x, w = special.roots_hermitenorm(n)
            w = w / w.sum()
            if k == "gauss-equal":
                s = math.sqrt(a[0]) * x
                return s, s.copy(), w
            s = 0.5 + math.sqrt(a[0]) * x
            return s, 1.0 - s, w
        L, R = self.sample(substream(self.moment_form.seed, 3), n)
        return L, R, np.full(n, 1.0 / n)

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind == "custom":
            raise ValueError("custom kernels carry code and cannot be serialized")
        return {
            "kind": self.kind,
            "params": list(self.params),
            "flags": {
                "nonnegative_support": self.nonnegative_support,
                "quarter_turn_invariant": self.quarter_turn_invariant,
            },
            "moment_form": {
                "kind": self.moment_form.kind,
                "nodes": self.moment_form.nodes,
                "samples": self.moment_form.samples,
                "seed": self.moment_form.seed,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelModel":
        base = _BUILDERS[d["kind"]](*d.get("params", ())) if d["kind"] != "atoms" else atoms(_triples(d["params"]))
        flags = d.get("flags", {})
        mf = d.get("moment_form")
        return replace(
            base,
            nonnegative_support=flags.get("nonnegative_support", base.nonnegative_support),
            quarter_turn_invariant=flags.get("quarter_turn_invariant", base.quarter_turn_invariant),
            moment_form=MomentForm(**mf) if mf else base.moment_form,
        )

    def spec(self) -> str:
        if self.kind == "kac":
            return "kac"
        if self.kind == "atoms":
            trip = [self.params[i:i + 3] for i in range(0, len(self.params), 3)]
            return "atoms:" + ";".join(",".join(repr(v) for v in t) for t in trip)
        if self.kind == "custom":
            return "custom"
        return f"{self.kind}:" + ",".join(repr(v) for v in self.params)


# -- constructors -----------------------------------------------------------

def kac() -> KernelModel:
    return KernelModel("kac", (), quarter_turn_invariant=True)


def inelastic_kac(alpha0: float) -> KernelModel:
    return KernelModel("inelastic", (alpha0,), quarter_turn_invariant=True)


def nonnegative_simplex(alpha0: float) -> KernelModel:
    return KernelModel("simplex", (alpha0,), nonnegative_support=True)


def point_mass(l0: float, r0: float) -> KernelModel:
    return KernelModel("point", (l0, r0), nonnegative_support=(l0 >= 0 and r0 >= 0))


def atoms(triples) -> KernelModel:
    """Finitely supported kernel from ``(weight, l, r)`` triples."""
    flat = tuple(float(v) for t in triples for v in t)
    nonneg = all(v >= 0 for i, v in enumerate(flat) if i % 3)
    return KernelModel("atoms", flat, nonnegative_support=nonneg)


def gaussian_equal(var: float) -> KernelModel:
    """L = R ~ N(0, var)."""
    return KernelModel("gauss-equal", (var,))


def gaussian_line(var: float) -> KernelModel:
    """L ~ N(1/2, var), R = 1 - L; supported on the line l + r = 1."""
    return KernelModel("gauss-line", (var,))


def independent_uniform(alpha0: float) -> KernelModel:
    """L, R independent with L^alpha0, R^alpha0 uniform on [0, 1]."""
    return KernelModel("independent", (alpha0,), nonnegative_support=True)


def custom(sampler: Callable, moment: Callable | None = None, *,
           nonnegative_support: bool = False, quarter_turn_invariant: bool = False,
           moment_form: MomentForm | None = None) -> KernelModel:
    return KernelModel(
        "custom", (), nonnegative_support, quarter_turn_invariant,
        moment_form or MomentForm(kind="closed" if moment else "montecarlo"),
        sampler=sampler, moment=moment,
    )


_BUILDERS = {
    "kac": kac,
    "inelastic": inelastic_kac,
    "simplex": nonnegative_simplex,
    "point": point_mass,
    "gauss-equal": gaussian_equal,
    "gauss-line": gaussian_line,
    "independent": independent_uniform,
}


def parse_kernel(spec: str) -> KernelModel:
    """Build a kernel from its compact text form, e.g. ``inelastic:0.7``."""
    name, _, rest = spec.strip().partition(":")
    name = name.strip().lower()
    try:
        if name == "atoms":
            return atoms([[float(v) for v in t.split(",")] for t in rest.split(";") if t.strip()])
        if name not in _BUILDERS:
            raise KeyError(name)
        args = [float(v) for v in rest.split(",") if v.strip()]
        return _BUILDERS[name](*args)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad kernel spec {spec!r} ({exc}); {SPEC_GRAMMAR}") from None


# -- operations -------------------------------------------------------------

def s_moment(kernel: KernelModel, p: float) -> MomentEstimate:
    """Evaluate S(p) = E|L|^p + E|R|^p - 1."""
    if not p > 0:
        raise ValueError("p must be positive")
    form = kernel.moment_form
    use_quadrature = form.kind == "quadrature" or (form.kind == "montecarlo" and kernel.kind in TRIG_KINDS)
    if form.kind == "closed":
        value = kernel.closed_form_s(p)
        if value is not None:
            if not np.isfinite(value):
                raise MomentDivergenceError(f"moment of order {p} diverges for {kernel.spec()}")
            return MomentEstimate(float(value), 0.0, "closed")
        use_quadrature = kernel.kind != "custom"
    if use_quadrature:
        L, R, w = kernel.expectation_nodes(form.nodes)
        value = float(np.dot(w, np.abs(L) ** p + np.abs(R) ** p)) - 1.0
        return MomentEstimate(value, 0.0, "quadrature")
    L, R = kernel.sample(substream(form.seed, 0), form.samples)
    z = np.abs(L) ** p + np.abs(R) ** p
    if not np.all(np.isfinite(z)):
        raise MomentDivergenceError(f"non-finite samples of |L|^{p} + |R|^{p}")
    return MomentEstimate(float(z.mean()) - 1.0, float(z.std(ddof=1) / math.sqrt(z.size)), "montecarlo")


def find_alpha(kernel: KernelModel, p_max: float = 8.0, tol: float = 1e-10, *,
               p_min: float = 1e-3, n_scan: int = 256, s_tol: float | None = None) -> float:
    """Smallest root of S on (0, p_max].

    A geometric scan locates the leftmost sign change (or the leftmost point
    where |S| falls below ``s_tol``, for roots where S touches zero without
    crossing); bisection then refines it to ``tol``.
    """
    def S(p):
        return s_moment(kernel, p).value

    def snap(root):
        # prefer a short decimal when it is itself a root to within s_tol (e.g. exactly 2 for Kac)
        short = round(root, 8)
        if short > 0 and abs(short - root) <= max(tol, 1e-9) and abs(S(short)) <= s_tol:
            return short
        return root

    grid = np.geomspace(p_min, p_max, n_scan)
    est = [s_moment(kernel, p) for p in grid]
    vals = np.array([e.value for e in est])
    if s_tol is None:
        s_tol = max(1e-12, 3.0 * max(e.stderr for e in est))
    for i, v in enumerate(vals):
        if abs(v) <= s_tol:
            lo = grid[i - 1] if i > 0 else grid[i]
            hi = grid[i + 1] if i + 1 < len(grid) else grid[i]
            if i > 0 and i + 1 < len(grid) and vals[i - 1] > 0 > vals[i + 1]:
                return snap(float(optimize.bisect(S, lo, hi, xtol=tol)))
            if v == 0.0 or lo == hi:
                return float(grid[i])
            res = optimize.minimize_scalar(lambda p: abs(S(p)), bounds=(lo, hi), method="bounded",
                                           options={"xatol": tol})
            return snap(float(res.x))
        if i + 1 < len(grid) and v > 0 and vals[i + 1] < 0:
            if abs(vals[i + 1]) <= s_tol:
                continue
            return snap(float(optimize.bisect(S, grid[i], grid[i + 1], xtol=tol)))
    raise HypothesisError(f"S(p) = 0 has no root in (0, {p_max}] for kernel {kernel.spec()}")


def find_roots(kernel: KernelModel, p_max: float = 16.0, tol: float = 1e-10, *,
               p_min: float = 1e-3, n_scan: int = 512) -> list[float]:
    """All sign changes of S on (p_min, p_max], refined by bisection."""
    def S(p):
        return s_moment(kernel, p).value

    grid = np.geomspace(p_min, p_max, n_scan)
    vals = np.array([S(p) for p in grid])
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(float(optimize.bisect(S, a, b, xtol=tol)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


@dataclass(frozen=True)
class SmallnessReport:
    holds: bool
    witness_p: float | None


def check_smallness(kernel: KernelModel, p_grid, atol: float = 1e-12) -> SmallnessReport:
    """Look for p on the grid with S(p) < 0 beyond noise and round-off."""
    p_grid = list(p_grid)
    if not p_grid or min(p_grid) <= 0:
        raise ValueError("p_grid must be non-empty and positive")
    for p in p_grid:
        est = s_moment(kernel, p)
        if est.value < -max(3.0 * est.stderr, atol):
            return SmallnessReport(True, float(p))
    return SmallnessReport(False, None)


@dataclass(frozen=True)
class SupportReport:
    alpha: float
    probes: np.ndarray
    hits: np.ndarray
    all_hit: bool
    quadrants: str
    nonnegative_support: bool
    quarter_turn_declared: bool
    quarter_turn_pvalue: float
    quarter_turn_sampled: bool
    warnings: tuple[str, ...]


def support_conditions(kernel: KernelModel, alpha: float, probe_count: int = 64, rng_seed: int = 0, *,
                       samples: int = 20_000, delta: float = 0.05, symmetry_samples: int = 100_000,
                       significance: float = 0.01) -> SupportReport:
    """Statistical check that every point of |x|^alpha + |y|^alpha = 1 is in supp(tau).

    Only the nonnegative quadrant is probed for kernels declaring
    nonnegative support.  The quarter-turn test compares (L, R) with
    (R, -L) through Bonferroni-combined two-sample KS tests on fixed
    projections.
    """
    quadrant = kernel.nonnegative_support
    phi = np.linspace(0.0, np.pi / 2 if quadrant else 2 * np.pi, probe_count, endpoint=quadrant)
    probes = np.column_stack(_trig_pair(phi, alpha))
    L, R = kernel.sample(substream(rng_seed, 0), samples)
    dist, _ = cKDTree(np.column_stack([L, R])).query(probes, k=1)
    hits = dist < delta
    msgs = []
    if not hits.all():
        msgs.append(f"support condition suspect: {int((~hits).sum())} of {probe_count} probes never approached")

    a = np.column_stack(kernel.sample(substream(rng_seed, 1), symmetry_samples))
    b = np.column_stack(kernel.sample(substream(rng_seed, 2), symmetry_samples))
    b = np.column_stack([b[:, 1], -b[:, 0]])
    angles = np.arange(8) * np.pi / 8
    pvals = []
    for ang in angles:
        d = np.array([math.cos(ang), math.sin(ang)])
        pvals.append(stats.ks_2samp(a @ d, b @ d).pvalue)
    p_comb = min(1.0, len(angles) * min(pvals))
    for m in msgs:
        warnings.warn(m, RuntimeWarning, stacklevel=2)
    return SupportReport(
        alpha=float(alpha), probes=probes, hits=hits, all_hit=bool(hits.all()),
        quadrants="nonnegative" if quadrant else "all",
        nonnegative_support=kernel.nonnegative_support,
        quarter_turn_declared=kernel.quarter_turn_invariant,
        quarter_turn_pvalue=float(p_comb), quarter_turn_sampled=bool(p_comb >= significance),
        warnings=tuple(msgs),
    )


# -- helpers ----------------------------------------------------------------

def _trig_pair(theta, alpha0):
    c, s = np.cos(theta), np.sin(theta)
    e = 2.0 / alpha0
    if e == 1.0:
        return c, s
    return np.sign(c) * np.abs(c) ** e, np.sign(s) * np.abs(s) ** e


def _abs_cos_moment(q: float) -> float:
    """E|cos U|^q for U uniform on [0, 2 pi)."""
    return math.exp(math.lgamma((q + 1) / 2) - math.lgamma(q / 2 + 1)) / math.sqrt(math.pi)


def _normal_abs_moment(mu: float, var: float, p: float) -> float:
    s = math.sqrt(var)
    base = s ** p * 2 ** (p / 2) * math.exp(math.lgamma((p + 1) / 2)) / math.sqrt(math.pi)
    return base * float(special.hyp1f1(-p / 2, 0.5, -mu * mu / (2 * var)))


def _abs_pow(x: float, p: float) -> float:
    return abs(x) ** p if x != 0 else 0.0


def _atoms(params):
    a = np.asarray(params, dtype=float).reshape(-1, 3)
    return a[:, 0], a[:, 1], a[:, 2]


def _triples(flat):
    return [flat[i:i + 3] for i in range(0, len(flat), 3)]

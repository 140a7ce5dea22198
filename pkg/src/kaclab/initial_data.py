"""Initial laws, symmetrization, tail functionals and domain-of-attraction checks.

Every law exposes the four one-sided distribution functions

    cdf(x) = P(X <= x), cdf_left(x) = P(X < x), sf(x) = P(X > x), sf_left(x) = P(X >= x)

so that tails are evaluated without cancellation against 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, special, stats

LAW_GRAMMAR = (
    "initial spec grammar: point:X0 | gaussian:MU,VAR | pareto:ALPHA,C1,C2[,LOC] | cauchy:LOC,SCALE | "
    "appendixb:I,S,K,S1,ALPHA | sym:<spec>"
)


class InitialLaw:
    """Base class; subclasses provide sample, cdf, sf, cf and moments."""

    spec: str = ""
    m01: float = math.nan
    m02: float = math.nan
    continuous: bool = True

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def cdf(self, x):
        return 1.0 - self.sf(x)

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def cdf_left(self, x):
        return self.cdf(x)

    def sf_left(self, x):
        return self.sf(x)

    def cf(self, xi):
        raise NotImplementedError

    def tail_constants(self, alpha: float):
        """Closed-form (c1, c2) for index alpha; None when unknown, inf when the tail is too heavy."""
        return None

    def tail_grid_hint(self) -> np.ndarray | None:
        """Extra positive abscissae worth adding to tail grids."""
        return None

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec!r})"


class PointMass(InitialLaw):
    continuous = False

    def __init__(self, x0: float):
        self.x0 = float(x0)
        self.spec = f"point:{self.x0!r}"
        self.m01, self.m02 = self.x0, self.x0 ** 2

    def sample(self, rng, size):
        return np.full(size, self.x0)

    def cdf(self, x):
        return (np.asarray(x, dtype=float) >= self.x0).astype(float)

    def cdf_left(self, x):
        return (np.asarray(x, dtype=float) > self.x0).astype(float)

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def sf_left(self, x):
        return 1.0 - self.cdf_left(x)

    def cf(self, xi):
        return np.exp(1j * self.x0 * np.asarray(xi, dtype=float))

    def tail_constants(self, alpha):
        return (0.0, 0.0) if alpha < 2 else None


class Gaussian(InitialLaw):
    def __init__(self, mu: float = 0.0, var: float = 1.0):
        if not var > 0:
            raise ValueError("variance must be positive")
        self.mu, self.var = float(mu), float(var)
        self.spec = f"gaussian:{self.mu!r},{self.var!r}"
        self.m01, self.m02 = self.mu, self.var + self.mu ** 2
        self._d = stats.norm(self.mu, math.sqrt(self.var))

    def sample(self, rng, size):
        return rng.normal(self.mu, math.sqrt(self.var), size)

    def cdf(self, x):
        return self._d.cdf(x)

    def sf(self, x):
        return self._d.sf(x)

    def cf(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(1j * self.mu * xi - 0.5 * self.var * xi * xi)

    def tail_constants(self, alpha):
        return (0.0, 0.0) if alpha < 2 else None


class Pareto(InitialLaw):
    """loc + eps * Y with P(Y > y) = (x_m / y)^alpha on y >= x_m = (c1 + c2)^(1/alpha).

    The sign eps is +1 with probability c2 / (c1 + c2), so that
    P(X - loc > x) = c2 x^-alpha and P(X - loc < -x) = c1 x^-alpha for x >= x_m.
    """

    def __init__(self, alpha: float, c1: float, c2: float, loc: float = 0.0):
        if not alpha > 0 or c1 < 0 or c2 < 0 or c1 + c2 <= 0:
            raise ValueError("need alpha > 0, c1, c2 >= 0 and c1 + c2 > 0")
        self.alpha, self.c1, self.c2, self.loc = float(alpha), float(c1), float(c2), float(loc)
        self.spec = f"pareto:{self.alpha!r},{self.c1!r},{self.c2!r},{self.loc!r}"
        tot = self.c1 + self.c2
        self.xm = tot ** (1.0 / self.alpha)
        self.p_pos = self.c2 / tot
        a = self.alpha
        mean_y = a * self.xm / (a - 1) if a > 1 else math.inf
        m2_y = a * self.xm ** 2 / (a - 2) if a > 2 else math.inf
        skew = self.p_pos - (1 - self.p_pos)
        self.m01 = self.loc + skew * mean_y if math.isfinite(mean_y) else math.nan
        self.m02 = self.loc ** 2 + 2 * self.loc * skew * mean_y + m2_y if math.isfinite(m2_y) else math.inf

    def _ysf(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(y > self.xm, (self.xm / np.where(y > 0, y, 1.0)) ** self.alpha, 1.0)

    def sample(self, rng, size):
        u = rng.random(size)
        y = self.xm * (1.0 - rng.random(size)) ** (-1.0 / self.alpha)
        return self.loc + np.where(u < self.p_pos, y, -y)

    def sf(self, x):
        z = np.asarray(x, dtype=float) - self.loc
        pos = self.p_pos * self._ysf(z)
        neg = (1 - self.p_pos) * (1.0 - self._ysf(-z)) + self.p_pos
        return np.where(z >= 0, pos, neg)

    def cdf(self, x):
        z = np.asarray(x, dtype=float) - self.loc
        neg = (1 - self.p_pos) * self._ysf(-z)
        pos = (1 - self.p_pos) + self.p_pos * (1.0 - self._ysf(z))
        return np.where(z < 0, neg, pos)

    def cf(self, xi):
        xi = np.asarray(xi, dtype=float)
        py = self.alpha * self.xm ** self.alpha * power_law_fourier(self.xm, xi, self.alpha)
        return np.exp(1j * self.loc * xi) * (self.p_pos * py + (1 - self.p_pos) * np.conj(py))

    def tail_constants(self, alpha):
        if alpha == self.alpha:
            return (self.c1, self.c2)
        if alpha < self.alpha:
            return (0.0, 0.0)
        return (math.inf if self.c1 > 0 else 0.0, math.inf if self.c2 > 0 else 0.0)


class Cauchy(InitialLaw):
    def __init__(self, loc: float = 0.0, scale: float = 1.0):
        if not scale > 0:
            raise ValueError("scale must be positive")
        self.loc, self.scale = float(loc), float(scale)
        self.spec = f"cauchy:{self.loc!r},{self.scale!r}"
        self.m01, self.m02 = math.nan, math.inf
        self._d = stats.cauchy(self.loc, self.scale)

    def sample(self, rng, size):
        return self.loc + self.scale * np.tan(np.pi * (rng.random(size) - 0.5))

    def cdf(self, x):
        return self._d.cdf(x)

    def sf(self, x):
        return self._d.sf(x)

    def cf(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(1j * self.loc * xi - self.scale * np.abs(xi))

    def tail_constants(self, alpha):
        if alpha == 1.0:
            return (self.scale / math.pi,) * 2
        return (0.0, 0.0) if alpha < 1 else (math.inf, math.inf)


class SymmetrizedLaw(InitialLaw):
    """Law of eps * X with an independent fair sign; its CDF is {F(x) + 1 - F((-x)-)} / 2."""

    def __init__(self, base: InitialLaw):
        self.base = base
        self.spec = f"sym:{base.spec}"
        self.continuous = base.continuous
        self.m01 = 0.0 if math.isfinite(base.m01) else math.nan
        self.m02 = base.m02

    def sample(self, rng, size):
        x = self.base.sample(rng, size)
        return np.where(rng.random(size) < 0.5, x, -x)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (self.base.cdf(x) + self.base.sf_left(-x))

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (self.base.cdf_left(x) + self.base.sf(-x))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (self.base.sf(x) + self.base.cdf_left(-x))

    def sf_left(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (self.base.sf_left(x) + self.base.cdf(-x))

    def cf(self, xi):
        return np.real(self.base.cf(xi)).astype(complex)

    def tail_constants(self, alpha):
        tc = self.base.tail_constants(alpha)
        if tc is None:
            return None
        c = 0.5 * (tc[0] + tc[1])
        return (c, c)

    def tail_grid_hint(self):
        return self.base.tail_grid_hint()


def symmetrize(law: InitialLaw) -> InitialLaw:
    if isinstance(law, SymmetrizedLaw):
        return SymmetrizedLaw(law.base)
    return SymmetrizedLaw(law)


# -- Fourier integrals of power tails --------------------------------------------

def power_law_fourier(a: float, xi, alpha: float):
    """P(xi) = int_a^inf e^{i xi x} x^(-alpha-1) dx for a > 0."""
    xi = np.asarray(xi, dtype=float)
    ax = np.abs(xi)
    out = np.empty(xi.shape, dtype=complex)
    zero = ax == 0
    out[zero] = a ** (-alpha) / alpha
    nz = ~zero
    if alpha == 1.0:
        z = ax[nz] * a
        si, ci = special.sici(z)
        re = np.cos(z) / a + ax[nz] * (si - np.pi / 2)
        im = np.sin(z) / a - ax[nz] * ci
        out[nz] = re + 1j * im
    else:
        s = alpha + 1.0
        scale = a ** (-alpha)
        vals = [complex(mpmath.expint(s, mpmath.mpc(0, -w * a))) for w in ax[nz]]
        out[nz] = scale * np.asarray(vals, dtype=complex)
    return np.where(xi < 0, np.conj(out), out)


# -- the liminf < limsup construction ---------------------------------------------

@dataclass(frozen=True)
class Breakpoints:
    s: np.ndarray
    i: np.ndarray
    ratio: float           # s_{m+1}^alpha / s_m^alpha
    boundary_case: bool    # S == s1^alpha: the construction starts at F(s1) = 0


def appendix_b_breakpoints(I: float, S: float, k: float, s1: float, alpha: float, m_max: int) -> Breakpoints:
    """Points s_1 < i_1 < s_2 < ... of the oscillating-tail construction.

    On (s_m, i_m) the density is k alpha / x^(alpha+1), so 1 - F falls from
    S s_m^-alpha until it meets I x^-alpha at i_m; then F stays flat until
    1 - F = S x^-alpha again at s_{m+1}.  Both steps are closed form:
    i_m^alpha = s_m^alpha (k - I)/(k - S) and s_{m+1}^alpha = i_m^alpha S / I.
    """
    _check_appendix_b(I, S, k, s1, alpha, m_max)
    up = (k - I) / (k - S)
    across = S / I
    sa = np.empty(m_max)
    ia = np.empty(m_max)
    sa[0] = s1 ** alpha
    for m in range(m_max):
        ia[m] = sa[m] * up
        if m + 1 < m_max:
            sa[m + 1] = ia[m] * across
    inv = 1.0 / alpha
    return Breakpoints(sa ** inv, ia ** inv, up * across, bool(S == s1 ** alpha))


def _check_appendix_b(I, S, k, s1, alpha, m_max):
    if not 0 < I < S:
        raise ValueError(f"need 0 < I < S (got I={I}, S={S})")
    if not S < k < S + I:
        raise ValueError(f"need S < k < S + I (got k={k}, S={S}, I={I})")
    if not s1 > 1:
        raise ValueError(f"need s1 > 1 (got s1={s1})")
    if not alpha > 0:
        raise ValueError("need alpha > 0")
    if not S <= s1 ** alpha:
        raise ValueError(f"need S <= s1^alpha so that F(s1) = 1 - S s1^-alpha >= 0 (got s1^alpha={s1 ** alpha})")
    if m_max < 1:
        raise ValueError("need m_max >= 1")


class AppendixBLaw(InitialLaw):
    """Continuous law whose right tail oscillates between I x^-alpha and S x^-alpha.

    The left tail is F(x) = 2c|x|^-alpha - 1 + F(-x) for x <= -s1, with
    c = (S + I)/2, and F is linear on (-s1, s1).  The linear piece is
    nondecreasing only if s1^alpha >= S + I; otherwise ``is_cdf`` is False
    and only the right-tail quantities are meaningful.

    Internally everything is parametrized by u = |x|^-alpha, in which each
    piece of the CDF is affine; that gives exact inverse-CDF sampling.
    """

    def __init__(self, I: float, S: float, k: float, s1: float, alpha: float, m_max: int = 20):
        self.I, self.S, self.k, self.s1, self.alpha = map(float, (I, S, k, s1, alpha))
        self.m_max = int(m_max)
        self.c = 0.5 * (self.S + self.I)
        self.spec = f"appendixb:{self.I!r},{self.S!r},{self.k!r},{self.s1!r},{self.alpha!r}"
        bp = appendix_b_breakpoints(I, S, k, s1, alpha, self.m_max)
        self.breakpoints = bp
        self.boundary_case = bp.boundary_case
        self.is_cdf = self.s1 ** self.alpha >= self.S + self.I
        # u-breakpoints down to 1e-300 for evaluation and sampling
        up = (self.k - self.I) / (self.k - self.S)
        across = self.S / self.I
        us, ui = [self.s1 ** -self.alpha], []
        while True:
            ui.append(us[-1] / up)
            nxt = ui[-1] / across
            if nxt < 1e-300 or len(us) >= 200_000:
                break
            us.append(nxt)
        self.u_s = np.asarray(us)
        self.u_i = np.asarray(ui)
        self.F_neg_s1 = self.I * self.u_s[0]          # F(-s1)
        self.F_pos_s1 = 1.0 - self.S * self.u_s[0]    # F(s1)
        self.m01 = self._moment(1) if self.alpha > 1 and self.is_cdf else math.nan
        self.m02 = math.inf if self.alpha <= 2 else (self._moment(2) if self.is_cdf else math.nan)

    @property
    def s(self):
        return self.breakpoints.s

    @property
    def i(self):
        return self.breakpoints.i

    def _require_cdf(self):
        if not self.is_cdf:
            raise ValueError(
                f"s1^alpha = {self.s1 ** self.alpha} < S + I = {self.S + self.I}: the linear piece on (-s1, s1) "
                "would decrease, so F is not a distribution function")

    def _moment(self, p):
        # E X^p = int_0^inf p x^(p-1) [P(X > x) + (-1)^p P(X < -x)] dx, piece by piece
        def g(x):
            return p * x ** (p - 1) * (self.sf(np.array([x]))[0] + (-1) ** p * self.cdf(np.array([-x]))[0])
        knots = np.sort(np.concatenate([[0.0], self.u_s ** (-1 / self.alpha), self.u_i ** (-1 / self.alpha)]))
        total = 0.0
        for lo, hi in zip(knots[:-1], knots[1:]):
            piece = integrate.quad(g, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0]
            total += piece
            if lo > self.s1 and abs(piece) < 1e-15 * max(abs(total), 1.0):
                break
        return total

    # right tail 1 - F(y) for y >= s1, through u = y^-alpha
    def _tail_pos(self, u):
        idx = np.searchsorted(-self.u_s, -u, side="right") - 1  # last s_m <= y
        idx = np.clip(idx, 0, self.u_s.size - 1)
        us, ui = self.u_s[idx], self.u_i[idx]
        return np.where(u >= ui, (self.S - self.k) * us + self.k * u, self.I * ui)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        hi = x >= self.s1
        with np.errstate(divide="ignore"):
            u = np.where(hi, np.abs(x), 1.0) ** -self.alpha
        out[hi] = self._tail_pos(u[hi])
        rest = ~hi
        out[rest] = 1.0 - self._cdf_low(x[rest])
        return out

    def _cdf_low(self, x):
        # x < s1
        out = np.empty(x.shape)
        lo = x <= -self.s1
        with np.errstate(divide="ignore"):
            u = np.where(lo, np.abs(x), 1.0) ** -self.alpha
        out[lo] = 2 * self.c * u[lo] - self._tail_pos(u[lo])
        mid = ~lo
        frac = (x[mid] + self.s1) / (2 * self.s1)
        out[mid] = self.F_neg_s1 + frac * (self.F_pos_s1 - self.F_neg_s1)
        return out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        hi = x >= self.s1
        out[hi] = 1.0 - self.sf(x[hi])
        out[~hi] = self._cdf_low(x[~hi])
        return out

    def tail_grid_hint(self):
        return np.sort(np.concatenate([self.s, self.i]))

    def sample(self, rng, size):
        self._require_cdf()
        w = rng.random(size)
        out = np.empty(size)
        a = self.alpha
        neg = w < self.F_neg_s1
        mid = (~neg) & (w < self.F_pos_s1)
        pos = ~(neg | mid)
        # right tail: V = 1 - w in (0, S u_s1]; piece m covers (S u_s[m+1], S u_s[m]]
        v = 1.0 - w[pos]
        m = np.clip(np.searchsorted(-self.S * self.u_s, -v, side="left") - 1, 0, self.u_s.size - 1)
        u = (v - (self.S - self.k) * self.u_s[m]) / self.k
        out[pos] = u ** (-1.0 / a)
        # linear piece
        out[mid] = -self.s1 + 2 * self.s1 * (w[mid] - self.F_neg_s1) / (self.F_pos_s1 - self.F_neg_s1)
        # left tail: W in (0, I u_s1]; density piece (S u_i[m], I u_s[m]], flat piece (I u_s[m+1], S u_i[m]]
        wn = w[neg]
        edges = np.empty(2 * self.u_s.size)
        edges[0::2] = self.I * self.u_s
        edges[1::2] = self.S * self.u_i
        j = np.clip(np.searchsorted(-edges, -wn, side="left") - 1, 0, edges.size - 1)
        mm = j // 2
        dens = (j % 2) == 0
        u = np.where(dens,
                     (wn + (self.S - self.k) * self.u_s[mm]) / (2 * self.c - self.k),
                     (wn + self.I * self.u_i[mm]) / (2 * self.c))
        out[neg] = -(u ** (-1.0 / a))
        return out

    def cf(self, xi, tol: float = 1e-16):
        """Piecewise assembly of the CF from power-tail Fourier integrals."""
        self._require_cdf()
        xi = np.asarray(xi, dtype=float)
        a, k = self.alpha, self.k
        s = self.u_s ** (-1.0 / a)
        i = self.u_i ** (-1.0 / a)
        n = int(np.searchsorted(-(self.S * self.u_s), -tol)) + 1
        n = min(max(n, 1), s.size)

        def P(lo, sgn):
            return power_law_fourier(lo, sgn * xi, a)

        pos = sum(k * a * (P(s[m], 1) - P(i[m], 1)) for m in range(n))
        neg = 2 * self.c * a * P(s[0], -1) - sum(k * a * (P(s[m], -1) - P(i[m], -1)) for m in range(n))
        dens = (self.F_pos_s1 - self.F_neg_s1) / (2 * self.s1)
        with np.errstate(invalid="ignore", divide="ignore"):
            bridge = np.where(xi == 0, 2 * self.s1, 2 * np.sin(xi * self.s1) / np.where(xi == 0, 1.0, xi)) * dens
        return pos + neg + bridge


def build_appendix_b(I: float, S: float, k: float, s1: float, alpha: float, m_max: int = 20,
                     require_cdf: bool = True) -> AppendixBLaw:
    """Construct the oscillating-tail law.

    With ``require_cdf`` (default) the parameters must also satisfy
    s1^alpha >= S + I, without which the linear piece on (-s1, s1) decreases.
    """
    law = AppendixBLaw(I, S, k, s1, alpha, m_max)
    if require_cdf:
        law._require_cdf()
    return law


# -- tail functionals and classification -------------------------------------------

def default_tail_grid() -> np.ndarray:
    return 2.0 ** np.arange(0, 34)


@dataclass
class TailFunctional:
    x: np.ndarray
    upper: np.ndarray          # x^alpha (1 - F(x))
    lower: np.ndarray          # x^alpha F(-x)
    liminf_est: tuple          # (upper, lower) minima over the window
    limsup_est: tuple          # (upper, lower) maxima over the window
    spread: float
    stable: bool
    window: tuple
    notice: str = ""

    @property
    def two_sided(self) -> np.ndarray:
        return self.upper + self.lower


def tail_functional(law: InitialLaw, alpha: float, x_grid=None, tol: float = 1e-6,
                    decades: float = 3.0) -> TailFunctional:
    """Evaluate x^alpha (1 - F(x)) and x^alpha F(-x) along an increasing grid.

    liminf/limsup are estimated over the last ``decades`` decades of the grid.
    """
    x = default_tail_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    if x_grid is None and law.tail_grid_hint() is not None:
        hint = law.tail_grid_hint()
        x = np.union1d(x, hint[(hint >= x[0]) & (hint <= x[-1])])
    if np.any(np.diff(x) <= 0) or np.any(x <= 0):
        raise ValueError("x_grid must be positive and increasing")
    notice = ""
    with np.errstate(over="ignore"):
        xa = x ** alpha
    ok = np.isfinite(xa)
    if not ok.all():
        x, xa = x[ok], xa[ok]
        notice = f"grid truncated at {x[-1]:.3g}: x^alpha overflows beyond"
    upper = xa * law.sf(x)
    lower = xa * law.cdf(-x)
    win = x >= x[-1] / 10 ** decades
    lo = (float(upper[win].min()), float(lower[win].min()))
    hi = (float(upper[win].max()), float(lower[win].max()))
    spread = max(hi[0] - lo[0], hi[1] - lo[1])
    return TailFunctional(x, upper, lower, lo, hi, spread, bool(spread <= tol),
                          (float(x[win][0]), float(x[-1])), notice)


@dataclass
class Classification:
    member: object             # True, False or "undetermined"
    c1: float
    c2: float
    basis: str                 # "closed_form" or "numeric"
    detail: str = ""


def classify_sda(law: InitialLaw, alpha: float, tol: float = 1e-6) -> Classification:
    """Standard-domain-of-attraction membership for index alpha.

    For alpha < 2 closed-form tail constants decide when available.
    Otherwise the tail functionals are examined decade by decade over the
    last three decades: a spread within ``tol`` means membership, an
    oscillation that does not shrink (or a blow-up) means non-membership,
    and anything else is reported as undetermined.
    """
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    if alpha == 2:
        m02 = law.m02
        if math.isfinite(m02):
            return Classification(True, 0.0, 0.0, "closed_form", f"m02 = {m02}")
        if m02 == math.inf:
            return Classification(False, math.nan, math.nan, "closed_form", "infinite second moment")
        return Classification("undetermined", math.nan, math.nan, "numeric", "second moment unknown")
    tc = law.tail_constants(alpha)
    if tc is not None:
        c1, c2 = tc
        member = math.isfinite(c1) and math.isfinite(c2)
        return Classification(member, float(c1), float(c2), "closed_form")
    tf = tail_functional(law, alpha, tol=tol)
    c2, c1 = 0.5 * (tf.liminf_est[0] + tf.limsup_est[0]), 0.5 * (tf.liminf_est[1] + tf.limsup_est[1])
    if tf.stable:
        return Classification(True, c1, c2, "numeric", f"spread {tf.spread:.3g}")
    top = tf.x[-1]
    spreads = []
    for d in range(3):
        sel = (tf.x >= top / 10 ** (d + 1)) & (tf.x <= top / 10 ** d)
        if sel.sum() >= 2:
            spreads.append(max(np.ptp(tf.upper[sel]), np.ptp(tf.lower[sel])))
    growing = tf.upper[-1] > 10 * max(tf.upper[0], 1e-300) and tf.upper[-1] > 1e3
    if growing or (len(spreads) == 3 and min(spreads) > tol and spreads[0] >= 0.5 * spreads[-1]):
        return Classification(False, c1, c2, "numeric",
                              f"tail functional oscillates: liminf {tf.liminf_est}, limsup {tf.limsup_est}")
    return Classification("undetermined", c1, c2, "numeric", f"spread {tf.spread:.3g} above tol")


# -- spec strings -------------------------------------------------------------------

def parse_initial(spec: str) -> InitialLaw:
    """Build a law from text such as ``gaussian:0,1`` or ``sym:pareto:1,1,1``."""
    name, _, rest = spec.strip().partition(":")
    name = name.strip().lower()
    try:
        if name == "sym":
            return symmetrize(parse_initial(rest))
        args = [float(v) for v in rest.split(",") if v.strip()]
        if name == "point":
            return PointMass(*args)
        if name == "gaussian":
            return Gaussian(*args)
        if name == "pareto":
            return Pareto(*args)
        if name == "cauchy":
            return Cauchy(*args)
        if name == "appendixb":
            return build_appendix_b(*args)
        raise KeyError(name)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad initial spec {spec!r} ({exc}); {LAW_GRAMMAR}") from None

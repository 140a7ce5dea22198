"""Deterministic McKean trees with prescribed leaf weights.

A leaf of weight 1/c is expanded into a comb (every split happens at the
first leaf) whose N leaves all carry weight 1/x except the deepest one,
which carries the remainder.  Iterating the comb over a sequence y_1 < y_2
< ... gives nested trees where all but a small "remainder" set of leaves
have weight exactly 1/y_n.  Every invariant is checked on construction.

Leaf indices in ``R_sets`` are 1-based, matching the leaf labels of the comb.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

ATOL = 1e-12
MAX_LEAVES = 10 ** 6


class ConstructionError(AssertionError):
    """An invariant of the construction failed; indicates a bug, never returned silently."""


class PlanSizeError(ValueError):
    pass


@dataclass(frozen=True)
class Step1Split:
    c: float
    x: float
    alpha: float
    N: int
    pairs: list  # (L_k, R_k), k = 1..N-1
    leaf_weights: np.ndarray

    @property
    def R(self) -> np.ndarray:
        return np.array([p[1] for p in self.pairs])

    @property
    def L(self) -> np.ndarray:
        return np.array([p[0] for p in self.pairs])


def _comb_size(ratio_pow: float) -> int:
    r = round(ratio_pow)
    if abs(ratio_pow - r) <= ATOL * max(1.0, ratio_pow):
        return int(r)
    return math.floor(ratio_pow) + 1


def step1_split(c: float, x: float, alpha: float) -> Step1Split:
    """Comb tree rooted at a leaf of weight 1/c with N-1 leaves of weight 1/x."""
    if not (math.isfinite(c) and math.isfinite(x)) or not (x > c >= 1.0):
        raise ValueError(f"need x > c >= 1, got c={c}, x={x}")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    xa, ca = x ** alpha, c ** alpha
    N = _comb_size((x / c) ** alpha)
    pairs = []
    for k in range(1, N):
        R = c / (xa - (k - 1) * ca) ** (1.0 / alpha)
        L = (1.0 - R ** alpha) ** (1.0 / alpha) if R < 1.0 else 0.0
        pairs.append((L, R))
    rem = max(xa - (N - 1) * ca, 0.0)
    weights = np.empty(N)
    weights[0] = rem ** (1.0 / alpha) / (c * x)
    weights[1:] = 1.0 / x
    split = Step1Split(float(c), float(x), float(alpha), N, pairs, weights)
    _check_step1(split)
    return split


def _check_step1(s: Step1Split) -> None:
    a = s.alpha
    ratio = (s.x / s.c) ** a
    near = abs(ratio - round(ratio)) <= ATOL * max(1.0, ratio)
    expect_N = round(ratio) if near else math.floor(ratio) + 1
    _require(s.N == expect_N, f"N={s.N} but floor rule gives {expect_N}")
    _require(abs(math.fsum(s.leaf_weights ** a) - s.c ** (-a)) <= ATOL, "sum of w^alpha differs from c^-alpha")
    _require(s.leaf_weights[0] <= 1.0 / s.x + ATOL, "remainder leaf heavier than 1/x")
    # the comb, multiplied out, reproduces the closed-form weights
    prod_L, w_tree = 1.0 / s.c, np.empty(s.N)
    for k, (L, R) in enumerate(s.pairs, start=1):
        w_tree[s.N - k] = prod_L * R
        prod_L *= L
    w_tree[0] = prod_L
    _require(np.allclose(w_tree, s.leaf_weights, rtol=0, atol=ATOL), "comb products disagree with closed form")
    for L, R in s.pairs:
        _require(abs(L ** a + R ** a - 1.0) <= ATOL, "split pair off the alpha-simplex")


def validate_y_sequence(y, eps: float, alpha: float) -> bool:
    """Check y_1^a > 1/eps and y_{n+1}^a > (1/eps) sum_{j<=n} (y_j^a + 1)."""
    y = [float(v) for v in y]
    if not y or any(v <= 0 for v in y) or any(b <= a for a, b in zip(y, y[1:])):
        raise ValueError("y must be a non-empty, positive, strictly increasing sequence")
    if not (eps > 0 and alpha > 0):
        raise ValueError("eps and alpha must be positive")
    if not y[0] ** alpha > 1.0 / eps:
        return False
    acc = 0.0
    for n in range(len(y) - 1):
        acc += y[n] ** alpha + 1.0
        if not y[n + 1] ** alpha > acc / eps:
            return False
    return True


@dataclass
class TreePlan:
    y: list
    eps: float
    alpha: float
    N_seq: list       # N_0 = 1, N_1, ...
    R_sets: list      # R_sets[n-1] holds the 1-based remainder indices at level n
    level_weights: list

    def to_dict(self) -> dict:
        return {
            "y": self.y,
            "eps": self.eps,
            "alpha": self.alpha,
            "N_0": self.N_seq[0],
            "N_seq": self.N_seq[1:],   # N_1, N_2, ... (one entry per level)
            "R_sets": self.R_sets,
            "level_weights": [w.tolist() for w in self.level_weights],
            "checks": plan_checks(self),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def build_plan(y, eps: float, alpha: float, max_leaves: int = MAX_LEAVES) -> TreePlan:
    """Nested comb trees for the sequence y.

    Level n expands every leaf of weight w from level n-1 with
    ``step1_split(1/w, y_n, alpha)``.  A leaf already no heavier than 1/y_n
    cannot be split that way; it is carried over unchanged as its own
    remainder leaf, which keeps every invariant intact.
    """
    if not validate_y_sequence(y, eps, alpha):
        raise ValueError("y does not satisfy the growth condition for this eps and alpha")
    y = [float(v) for v in y]
    weights = np.array([1.0])
    N_seq, R_sets, levels = [1], [], []
    for yn in y:
        total = 0
        for w in weights:
            c = 1.0 / w
            total += _comb_size((yn / c) ** alpha) if yn > c else 1
        if total > max_leaves:
            raise PlanSizeError(f"level with y={yn} needs {total} leaves (> {max_leaves})")
        new_w, rem_idx = [], []
        for w in weights:
            c = 1.0 / w
            rem_idx.append(len(new_w) + 1)
            if yn > c:
                new_w.extend(step1_split(c, yn, alpha).leaf_weights)
            else:
                new_w.append(w)
        weights = np.asarray(new_w)
        N_seq.append(len(weights))
        R_sets.append(rem_idx)
        levels.append(weights)
    plan = TreePlan(y, float(eps), float(alpha), N_seq, R_sets, levels)
    _check_plan(plan)
    return plan


def plan_checks(plan: TreePlan) -> list[dict]:
    """Per-level invariant quantities of a plan."""
    a, out, acc = plan.alpha, [], 0.0
    for n, (yn, w, R) in enumerate(zip(plan.y, plan.level_weights, plan.R_sets), start=1):
        acc += yn ** a + 1.0
        mask = np.zeros(w.size, dtype=bool)
        mask[np.asarray(R) - 1] = True
        out.append({
            "level": n,
            "N": plan.N_seq[n],
            "R_size": len(R),
            "sum_w_alpha": math.fsum(w ** a),
            "sum_R_w_alpha": math.fsum(w[mask] ** a),
            "max_dev_nonremainder": float(np.max(np.abs(w[~mask] - 1.0 / yn))) if (~mask).any() else 0.0,
            "max_remainder": float(w[mask].max()),
            "N_bound": acc,
            "growth": plan.N_seq[n] - plan.N_seq[n - 1],
            "growth_ratio": (plan.N_seq[n] - plan.N_seq[n - 1]) / yn ** a,
        })
    return out


def _check_plan(plan: TreePlan) -> None:
    for row, yn in zip(plan_checks(plan), plan.y):
        n = row["level"]
        _require(row["R_size"] == plan.N_seq[n - 1], f"level {n}: |R_n| != N_(n-1)")
        _require(abs(row["sum_w_alpha"] - 1.0) <= ATOL, f"level {n}: total mass {row['sum_w_alpha']}")
        _require(row["sum_R_w_alpha"] < plan.eps, f"level {n}: remainder mass not below eps")
        _require(row["max_dev_nonremainder"] <= ATOL, f"level {n}: non-remainder weight differs from 1/y_n")
        _require(row["max_remainder"] <= 1.0 / yn + ATOL, f"level {n}: remainder heavier than 1/y_n")
        _require(row["N"] <= row["N_bound"] + ATOL, f"level {n}: N_n above its bound")
        _require(row["growth"] <= yn ** plan.alpha + ATOL, f"level {n}: N_n - N_(n-1) > y_n^alpha")
        _require(row["growth_ratio"] > 1.0 - plan.eps, f"level {n}: growth ratio not above 1 - eps")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConstructionError(msg)

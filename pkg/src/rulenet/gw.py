"""Inhomogeneous Galton-Watson comparison model.

Generation n progeny is Bin(|A|, p_n) with a schedule p_n depending on the
model variant.  The module provides the mean-size formulas with their k=0
and k=1 corrections, generating-function backward iterates, extinction
probabilities with rigorous sandwich bounds, expected logarithmic sizes,
and fugacity-twisted statistics for the average primitive level.
"""

import math
from dataclasses import dataclass
from itertools import product as iproduct
from typing import List, Optional

import numpy as np
from scipy.integrate import quad

from .core import ModelParams

EULER_GAMMA = 0.5772156649015329

VARIANTS = ("AnaI", "AnaII", "CataI", "CataII")


@dataclass(frozen=True)
class GwSchedule:
    variant: str
    params: ModelParams

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        want = "I" if self.variant.endswith("I") and not self.variant.endswith("II") else "II"
        if self.params.variant != want:
            raise ValueError(f"{self.variant} requires ModelParams variant {want}")

    @property
    def offspring_cap(self) -> int:
        return self.params.alphabet.size

    @property
    def food_weights(self):
        """p'_F = p z^{|F|+1} per food (Model II anabolic)."""
        p, z = self.params.p, self.params.z
        return [p * z ** (f.level + 1) for f in self.params.foodset]


def log_progeny_prob(sch: GwSchedule, n: int) -> float:
    """log p_n: probability that a candidate child survives all its suffix coins."""
    p, q, z = sch.params.p, sch.params.q, sch.params.z
    if sch.variant == "AnaI":
        return n * math.log1p(-p)
    if sch.variant == "AnaII":
        return sum(
            math.log1p(-w * z ** k) for k in range(1, n + 1) for w in sch.food_weights
        )
    if sch.variant == "CataI":
        return n * (n + 1) / 2 * math.log1p(-q)
    return sum(k * math.log1p(-q * z ** (k + 1)) for k in range(1, n + 1))


def progeny_prob(sch: GwSchedule, n: int) -> float:
    if n < 1:
        raise ValueError("progeny schedule starts at generation 1")
    return math.exp(log_progeny_prob(sch, n))


def log_blue_prob(sch: GwSchedule, n: int) -> float:
    """log b_n: candidate child is primitive (full word fires, shorter suffixes silent)."""
    p, q, z = sch.params.p, sch.params.q, sch.params.z
    if sch.variant == "AnaI":
        return math.log(p) + (n - 1) * math.log1p(-p)
    if sch.variant == "AnaII":
        silent_full = sum(math.log1p(-w * z ** n) for w in sch.food_weights)
        shorter = sum(
            math.log1p(-w * z ** k) for k in range(1, n) for w in sch.food_weights
        )
        return math.log(-math.expm1(silent_full)) + shorter
    if sch.variant == "CataI":
        return math.log(-math.expm1(n * math.log1p(-q))) + n * (n - 1) / 2 * math.log1p(-q)
    silent_full = n * math.log1p(-q * z ** (n + 1))
    shorter = sum(k * math.log1p(-q * z ** (k + 1)) for k in range(1, n))
    return math.log(-math.expm1(silent_full)) + shorter


def log_mean_level_size(sch: GwSchedule, n) -> float:
    """log m_{1,n} = sum_{k<=n} log(|A| p_k); real n supported for AnaI."""
    A = sch.params.alphabet.size
    if n == 0:
        return 0.0
    if sch.variant == "AnaI":
        # closed form (|A|(1-p)^{(n+1)/2})^n, valid for non-integer n
        return n * (math.log(A) + (n + 1) / 2 * math.log1p(-sch.params.p))
    n = int(n)
    return n * math.log(A) + sum(log_progeny_prob(sch, k) for k in range(1, n + 1))


def mean_level_size(sch: GwSchedule, n) -> float:
    return math.exp(log_mean_level_size(sch, n))


def log_k0_prefactor(sch: GwSchedule) -> float:
    """Exact-first-level prefactor |A|(1-p)^{|A|} and its variants."""
    A = sch.params.alphabet.size
    p, q, z = sch.params.p, sch.params.q, sch.params.z
    if sch.variant == "AnaI":
        return math.log(A) + A * math.log1p(-p)
    if sch.variant == "AnaII":
        return math.log(A) + A * sum(math.log1p(-w) for w in sch.food_weights)
    if sch.variant == "CataI":
        return math.log(A) + A * math.log1p(-q)
    return math.log(A) + A * math.log1p(-q * z)


def corrected_mean_k0(sch: GwSchedule, n) -> float:
    return math.exp(log_k0_prefactor(sch) + log_mean_level_size(sch, n))


def _level1_trees(A: int):
    """Enumerate exact two-level configurations (red atom set, progeny map)."""
    atoms = list(range(A))
    for mask in range(1 << A):
        red0 = [a for a in atoms if mask >> a & 1]
        subsets = []
        for _ in red0:
            subsets.append([s for s in range(1 << A) if (s & ~mask) == 0])
        if not red0:
            yield red0, {}
            continue
        for choice in iproduct(*subsets):
            prog = {a: [b for b in atoms if choice[i] >> b & 1] for i, a in enumerate(red0)}
            yield red0, prog


def corrected_mean_k1(sch: GwSchedule, n: int) -> float:
    """Mean level size with the first two levels treated exactly.

    Sums over every possible two-level configuration with its exact
    probability, then resumes the generation-dependent mean matrices.
    """
    if sch.variant != "AnaI":
        raise ValueError("k=1 correction is derived for the AnaI schedule only")
    A = sch.params.alphabet.size
    if A > 4:
        raise ValueError("two-level enumeration bounded to |A| <= 4")
    if n < 2:
        raise ValueError("k=1 correction needs n >= 2")
    p = sch.params.p
    total = 0.0
    ones = np.ones(A)
    for red0, prog in _level1_trees(A):
        w = (1 - p) ** len(red0) * p ** (A - len(red0))
        M = np.zeros((A, A))
        for a in red0:
            w *= (1 - p) ** len(prog[a]) * p ** (len(red0) - len(prog[a]))
            for b in prog[a]:
                M[a, b] = 1.0
        if w == 0.0:
            continue
        z1 = M.sum(axis=0)  # level-1 counts by last atom
        # generations 2..n each contribute a factor (1-p)^{l-1} M
        vec = z1 @ np.linalg.matrix_power(M, n - 1) @ ones
        total += w * vec * (1 - p) ** (n * (n - 1) // 2)
    return total


def _gen_fn(sch: GwSchedule, n: int, s):
    A = sch.params.alphabet.size
    return (1 - progeny_prob(sch, n) * (1 - s)) ** A


def generating_fn(sch: GwSchedule, n: int, s: float) -> float:
    if not (0.0 <= s <= 1.0):
        raise ValueError("s must lie in [0,1]")
    return _gen_fn(sch, n, s)


def iterate_backward(sch: GwSchedule, n: int, s) -> float:
    """f^(n)(s) = f_1(f_2(...f_n(s)...)); f^(0) is the identity."""
    for k in range(n, 0, -1):
        s = _gen_fn(sch, k, s)
    return s


def extinction_prob(sch: GwSchedule, n: int) -> float:
    return iterate_backward(sch, n, 0.0)


def mean_via_derivative(sch: GwSchedule, n: int, h: float = 1e-20) -> float:
    """d/ds f^(n) at s=1 by complex-step differentiation (exact to rounding)."""
    return iterate_backward(sch, n, complex(1.0, h)).imag / h


def n0_exact(sch: GwSchedule) -> float:
    """Maximum-average-size level; closed form for AnaI, increment scan otherwise."""
    if sch.variant == "AnaI":
        return math.log(sch.params.alphabet.size) / -math.log1p(-sch.params.p)
    logA = math.log(sch.params.alphabet.size)
    n = 1
    while logA + log_progeny_prob(sch, n) > 0:
        n += 1
        if n > 100000:
            return math.inf
    return float(n - 1)


@dataclass(frozen=True)
class ExtinctionEstimate:
    n: int
    u_exact: float
    lower: Optional[float]  # rigorous lower bound on u_{0,n}; None if inapplicable
    upper: float            # rigorous upper bound on u_{0,n}
    regime: str             # A (n <= n0), B (n0 < n <= 2n0), C (n > 2n0)
    taylor_case: str        # A1/A2/B1/B2 fine classification
    approx: float           # regime's coarse estimate of u_{0,n}


def extinction_bounds(sch: GwSchedule, n: int) -> ExtinctionEstimate:
    """Exact u_{0,n} plus the telescoping sandwich bounds.

    With P_k = prod_{i=k+1}^n |A|p_i and eta_k = P_k/(1-u_{k,n}):
    eta_k <= eta_{k+1} + P_k always, and eta_k >= eta_{k+1} - P_k/|A|
    provided p_{k+1}(1-u_{k+1,n}) < 1/2; unrolling gives two-sided bounds
    on 1-u_{0,n}.
    """
    A = sch.params.alphabet.size
    u = [0.0] * (n + 1)
    for k in range(n - 1, -1, -1):
        u[k] = _gen_fn(sch, k + 1, u[k + 1])
    P = [0.0] * (n + 1)
    P[n] = 1.0
    for k in range(n - 1, -1, -1):
        P[k] = P[k + 1] * A * progeny_prob(sch, k + 1)
    s1 = u[n - 1]
    eta_last = P[n - 1] / (1.0 - s1)
    S = sum(P[k] for k in range(0, n - 1))
    upper_u = 1.0 - P[0] / (eta_last + S)
    lower_u = None
    cond = all(
        progeny_prob(sch, k + 1) * (1.0 - u[k + 1]) < 0.5 for k in range(0, n)
    )
    denom = eta_last - S / A
    if cond and denom > 0:
        lower_u = 1.0 - P[0] / denom
    n0 = n0_exact(sch)
    rate = sch.params.p if sch.variant.startswith("Ana") else sch.params.q
    if n <= n0:
        regime = "A"
    elif n <= 2 * n0:
        regime = "B"
    else:
        regime = "C"
    taylor_case = ("A" if n <= n0 else "B") + ("1" if (1 - s1) * P[0] < 1.0 else "2")
    if regime in ("A", "B"):
        approx = rate ** A
    else:
        approx = 1.0 - min(1.0, P[0] * (1.0 - s1))
    return ExtinctionEstimate(
        n=n, u_exact=u[0], lower=lower_u, upper=upper_u,
        regime=regime, taylor_case=taylor_case, approx=approx,
    )


@dataclass
class GwTrajectory:
    sizes: List[int]
    prims: List[int]


def simulate_gw(sch: GwSchedule, seed: int, n_max: int) -> GwTrajectory:
    """Sample the process; generation n also samples primitive (blue) slots."""
    A = sch.params.alphabet.size
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    sizes = [1]
    prims = [0]
    z = 1
    for k in range(1, n_max + 1):
        if z == 0:
            sizes.append(0)
            prims.append(0)
            continue
        pn = progeny_prob(sch, k)
        bn = math.exp(log_blue_prob(sch, k))
        slots = A * z
        dead = max(0.0, 1.0 - pn - bn)  # clamp rounding residue
        red, blue, _ = rng.multinomial(slots, np.array([pn, bn, dead]) / (pn + bn + dead))
        z = int(red)
        sizes.append(z)
        prims.append(int(blue))
    return GwTrajectory(sizes=sizes, prims=prims)


def expected_log_size(sch: GwSchedule, n: int) -> float:
    """Quadrature of (1 - f^(n)(s))/(1-s): the mean harmonic size E[H_{Z_n}]."""
    m = mean_level_size(sch, n)

    def integrand(s):
        if s >= 1.0:
            return m
        return (1.0 - iterate_backward(sch, n, s)) / (1.0 - s)

    pts = [max(0.0, 1.0 - 1.0 / max(m, 2.0))]
    val, err = quad(integrand, 0.0, 1.0, points=pts, limit=200, epsabs=1e-8)
    if err > 1e-4 * max(1.0, abs(val)):
        raise ArithmeticError("quadrature did not converge")
    return val


def expected_log_estimate(sch: GwSchedule, n: int) -> float:
    """E[log Z_n] estimate: harmonic quadrature minus Euler's constant on survival."""
    return expected_log_size(sch, n) - EULER_GAMMA * (1.0 - extinction_prob(sch, n))


def primitive_mean(sch: GwSchedule, n: int) -> float:
    """Expected number of primitive words at level n.

    Anabolic variants carry the exact-first-level prefactor (the closed
    displays include it); catabolic variants follow their display chain,
    whose level-0 set is deterministic.
    """
    A = sch.params.alphabet.size
    if n == 0:
        if sch.variant.startswith("Cata"):
            return 0.0
        p, z = sch.params.p, sch.params.z
        silent = sum(math.log1p(-p * z ** f.level) for f in sch.params.foodset)
        return A * -math.expm1(silent)
    log_val = log_mean_level_size(sch, n - 1) + math.log(A) + log_blue_prob(sch, n)
    if sch.variant.startswith("Ana"):
        log_val += log_k0_prefactor(sch)
    return math.exp(log_val)


def twisted_iterate(sch: GwSchedule, n: int, x: float, u: float):
    """f^(1,n)(x,u) with f^(j,n) = f_j(u^{x^j} f^(j+1,n)), f^(n,n) = f_n(u^{x^n})."""
    val = 1.0
    for j in range(n, 0, -1):
        val = _gen_fn(sch, j, u ** (x ** j) * val)
    return val


def _mean_log_prim_weight(sch: GwSchedule, n_max: int, x: float) -> float:
    """E[log G(x)] with G(x) = sum_j x^j Prim_j, via the harmonic quadrature."""
    A = sch.params.alphabet.size
    pn = [progeny_prob(sch, j) for j in range(1, n_max + 1)]
    bn = [math.exp(log_blue_prob(sch, j)) for j in range(1, n_max + 1)]
    mean_G = 0.0
    logm = 0.0
    for j in range(1, n_max + 1):
        mean_G += x ** j * math.exp(
            (log_k0_prefactor(sch) if sch.variant.startswith("Ana") else 0.0)
            + log_mean_level_size(sch, j - 1) + math.log(A) + math.log(bn[j - 1])
        )

    def slot_gf(u):
        val = 1.0
        for j in range(n_max, 0, -1):
            val = (1.0 - pn[j - 1] - bn[j - 1] + bn[j - 1] * u ** (x ** j)
                   + pn[j - 1] * val) ** A
        return val

    def integrand(u):
        if u >= 1.0:
            return mean_G
        return (1.0 - slot_gf(u)) / (1.0 - u)

    pts = [max(0.0, 1.0 - 1.0 / max(mean_G, 2.0))]
    val, _ = quad(integrand, 0.0, 1.0, points=pts, limit=200, epsabs=1e-8)
    # harmonic -> log: H_G = log G + gamma + 1/(2G) + O(G^-2)
    p_empty = slot_gf(0.0)

    def inv_integrand(u):
        if u <= 0.0:
            return 0.0
        return (slot_gf(u) - p_empty) / u

    inv_mean, _ = quad(inv_integrand, 0.0, 1.0, limit=200, epsabs=1e-8)
    return val - EULER_GAMMA * (1.0 - p_empty) - 0.5 * inv_mean


def average_primitive_height(sch: GwSchedule, n_max: int, step: float = 1e-4) -> float:
    """<n> = d/dx E[log G(x)] at x=1 by central finite difference."""
    hi = _mean_log_prim_weight(sch, n_max, 1.0 + step)
    lo = _mean_log_prim_weight(sch, n_max, 1.0 - step)
    deriv = (hi - lo) / (2 * step)
    mid = _mean_log_prim_weight(sch, n_max, 1.0)
    if abs(hi - lo) < 1e-10 * max(1.0, abs(mid)):
        raise ArithmeticError("finite difference is noise-dominated")
    return deriv

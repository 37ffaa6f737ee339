"""Closed-form predictions and phase analysis.

Phase functions psi (growth rate of mean level sizes) and phi = log z + psi
(growth rate of mean primitive counts), their roots, phase classification,
characteristic levels from exact finite products, and empty-network
probabilities.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from scipy.optimize import brentq

from . import gw
from .core import ModelParams

ROOT_TOL = 1e-9
GRID_STEP = 1e-3
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class PhaseFunctions:
    kind: str                   # "anabolic" | "catabolic"
    alphabet_size: int
    rate: float                 # p (anabolic) or q (catabolic)
    food_levels: tuple = ()     # empty: Lemma specialization p' = p z
    multiplicity: Optional[int] = None  # effective |F|; defaults to len(food_levels) or 1

    def __post_init__(self):
        if self.kind not in ("anabolic", "catabolic"):
            raise ValueError("kind must be anabolic or catabolic")

    @property
    def f_mult(self) -> int:
        if self.multiplicity is not None:
            return self.multiplicity
        return max(1, len(self.food_levels))

    def p_prime(self, z: float) -> float:
        """p' = (p/|F|) sum_F z^{|F|+1}; the Lemma form p z when levels omitted."""
        if not self.food_levels:
            return self.rate * z
        return self.rate / len(self.food_levels) * sum(
            z ** (l + 1) for l in self.food_levels
        )

    @classmethod
    def from_params(cls, kind: str, params: ModelParams, multiplicity=None):
        if kind == "catabolic":
            return cls(kind, params.alphabet.size, params.q, (), multiplicity)
        levels = tuple(f.level for f in params.foodset)
        return cls(kind, params.alphabet.size, params.p, levels, multiplicity)


def psi(pf: PhaseFunctions, z: float) -> float:
    if not (0.0 < z < 1.0):
        raise ValueError("psi defined on z in (0,1)")
    logA = math.log(pf.alphabet_size)
    if pf.kind == "anabolic":
        return logA - pf.f_mult * pf.p_prime(z) * z / (1.0 - z)
    return logA - pf.rate * (z / (1.0 - z)) ** 2


def phi(pf: PhaseFunctions, z: float) -> float:
    return math.log(z) + psi(pf, z)


def phi_prime(pf: PhaseFunctions, z: float, h: float = 1e-7) -> float:
    return (phi(pf, z + h) - phi(pf, z - h)) / (2 * h)


@dataclass(frozen=True)
class PhaseRoots:
    y_phi: Optional[float]   # lower root of phi
    zp_phi: Optional[float]  # maximum of phi (root of the cubic h)
    z_phi: Optional[float]   # upper root of phi
    z_star: Optional[float]  # root of psi
    note: str = ""


def _sign_change_roots(fn, lo=GRID_STEP, hi=1.0 - GRID_STEP, step=GRID_STEP):
    # uniform grid densified geometrically near both endpoints
    pts = [lo + k * step for k in range(int((hi - lo) / step) + 1)]
    pts += [1.0 - 10.0 ** (-e / 4.0) for e in range(12, 49)]
    pts += [10.0 ** (-e / 4.0) for e in range(12, 49)]
    pts = sorted(set(x for x in pts if lo / 1000 <= x <= hi + (1 - hi) * 0.999))
    roots = []
    prev = fn(pts[0])
    for a, b in zip(pts, pts[1:]):
        nxt = fn(b)
        if prev == 0.0:
            roots.append(a)
        elif prev * nxt < 0:
            roots.append(brentq(fn, a, b, xtol=ROOT_TOL))
        prev = nxt
    return roots


def _cubic_root(coeffs) -> Optional[float]:
    """Unique root of the cubic in (0,1) by bracketed bisection."""

    def h(z):
        return ((coeffs[0] * z + coeffs[1]) * z + coeffs[2]) * z + coeffs[3]

    roots = _sign_change_roots(h, lo=1e-6, hi=1.0 - 1e-6)
    return roots[0] if roots else None


def phase_roots(pf: PhaseFunctions) -> PhaseRoots:
    """Roots of phi and psi plus the location of phi's maximum."""
    phi_roots = _sign_change_roots(lambda z: phi(pf, z))
    psi_roots = _sign_change_roots(lambda z: psi(pf, z))
    z_star = psi_roots[0] if psi_roots else None
    if pf.kind == "catabolic":
        q = pf.rate
        zp = _cubic_root([1.0, -(3.0 - 2.0 * q), 3.0, -1.0])
    elif not pf.food_levels or all(l == 0 for l in pf.food_levels):
        fp = pf.f_mult * pf.rate
        zp = _cubic_root([fp, 1.0 - 2.0 * fp, -2.0, 1.0])
    else:
        dmax = _sign_change_roots(lambda z: phi_prime(pf, z))
        zp = dmax[0] if dmax else None
    if len(phi_roots) >= 2:
        return PhaseRoots(phi_roots[0], zp, phi_roots[1], z_star)
    return PhaseRoots(None, zp, None, z_star, note="phi has no positive part")


@dataclass(frozen=True)
class PhaseLabel:
    label: str      # A_localized | A_delocalized | B | C
    boundary: bool


def classify_phase(pf: PhaseFunctions, z: float) -> PhaseLabel:
    ps = psi(pf, z)
    ph = phi(pf, z)
    boundary = abs(ps) < BOUNDARY_TOL or abs(ph) < BOUNDARY_TOL
    if ps < 0:
        return PhaseLabel("C", boundary)
    if ph < 0:
        return PhaseLabel("B", boundary)
    sub = "localized" if phi_prime(pf, z) > 0 else "delocalized"
    return PhaseLabel(f"A_{sub}", boundary)


@dataclass(frozen=True)
class CharacteristicLevels:
    n0: Optional[float]
    n0p: Optional[float]
    m0: Optional[float]
    m0p: Optional[float]
    n_frag: Optional[float] = None       # catabolic Model I
    predicted_height: Optional[float] = None


def _schedule(kind: str, params: ModelParams) -> gw.GwSchedule:
    stem = "Ana" if kind == "anabolic" else "Cata"
    return gw.GwSchedule(stem + params.variant, params)


_LEVEL_CAP = 5000


def _schedule_steps(sch: gw.GwSchedule, n: int):
    """(log p_n - log p_{n-1}, log of the full-word firing factor at n)."""
    p, q, z = sch.params.p, sch.params.q, sch.params.z
    if sch.variant == "AnaI":
        return math.log1p(-p), math.log(p)
    if sch.variant == "AnaII":
        silent = sum(math.log1p(-w * z ** n) for w in sch.food_weights)
        return silent, math.log(-math.expm1(silent))
    if sch.variant == "CataI":
        return n * math.log1p(-q), math.log(-math.expm1(n * math.log1p(-q)))
    silent = n * math.log1p(-q * z ** (n + 1))
    return silent, math.log(-math.expm1(silent))


def characteristic_levels(kind: str, params: ModelParams) -> CharacteristicLevels:
    """Characteristic levels from sign changes of the exact finite products.

    n0: first level where the mean level size starts to decrease; n0p: first
    level past n0 with mean below one; m0, m0p: same pair for the mean
    primitive counts.  Fields stay None when the sequence never turns.
    """
    sch = _schedule(kind, params)
    A = params.alphabet.size
    log_a = math.log(A)
    prefix = gw.log_k0_prefactor(sch)
    ana = kind == "anabolic"
    lv_prev = prefix                 # log mean |V_0| (k=0 corrected chain)
    lm_prev = -math.inf
    lp = 0.0                         # log p_n running value
    n0 = gw.n0_exact(sch) if (ana and params.variant == "I") else None
    n0p = m0 = m0p = None
    n0_scan = None
    for n in range(1, _LEVEL_CAP + 1):
        stp, fire = _schedule_steps(sch, n)
        lp_prev = lp
        lp += stp
        lv = lv_prev + log_a + lp
        # log Prim_n: red chain to n-1, |A| slots, full word fires
        lm = (prefix if ana else 0.0) + (lv_prev - prefix) + log_a + fire + lp_prev
        if n0_scan is None and lv < lv_prev:
            n0_scan = n - 1
        if n0p is None and n0_scan is not None and lv < 0:
            n0p = n
        if m0 is None and n >= 2 and lm < lm_prev:
            m0 = float(n - 1)
        if m0p is None and m0 is not None and lm < 0:
            m0p = n
        lv_prev, lm_prev = lv, lm
        if None not in (n0_scan, n0p, m0, m0p):
            break
    if n0 is None and n0_scan is not None:
        n0 = float(n0_scan)
    n_frag = None
    height = None
    if kind == "catabolic" and params.variant == "I":
        n_frag = math.sqrt(2 * math.log(A) / params.q)
        height = math.sqrt(3) * n_frag
    return CharacteristicLevels(
        n0=n0, n0p=float(n0p) if n0p is not None else None,
        m0=m0, m0p=float(m0p) if m0p is not None else None,
        n_frag=n_frag, predicted_height=height,
    )


def predicted_level_means(kind: str, variant: str, params: ModelParams, n: int) -> Tuple[float, float]:
    """(mean |V_n|, mean |Prim_n|) prediction surface (k=0 corrected chain)."""
    if variant != params.variant:
        raise ValueError("variant mismatch with params")
    sch = _schedule(kind, params)
    return gw.corrected_mean_k0(sch, n), gw.primitive_mean(sch, n)


def empty_network_prob(kind: str, params: ModelParams) -> Tuple[float, bool]:
    """P[no reaction at all]; (0, True) when the exponent series diverges."""
    A = params.alphabet.size
    z = params.z
    if z >= 1.0 / A:
        return 0.0, True
    log_total = 0.0
    if kind == "anabolic":
        nf = len(params.foodset)
        p = params.p
        n = 0
        while True:
            term = nf * A ** (n + 1) * math.log1p(-p * z ** n)
            log_total += term
            # geometric tail bound on the remaining -log mass
            tail = nf * p * A * (A * z) ** (n + 1) / (1.0 - A * z)
            if tail < 1e-12:
                break
            n += 1
    else:
        q = params.q
        n = 1
        while True:
            term = n * A ** (n + 1) * math.log1p(-q * z ** n)
            log_total += term
            tail = q * A * (n + 1) * (A * z) ** (n + 1) / (1.0 - A * z) ** 2
            if tail < 1e-12:
                break
            n += 1
    return math.exp(log_total), False

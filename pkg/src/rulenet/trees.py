"""Level-by-level construction of composition and fragmentation trees.

Both builders materialize, level by level, the set of red words (words whose
strict subwords all stay silent under the quenched field) and the blue
primitive words (silent strict subwords, firing full word).  A child word is
classified by scanning its suffixes shortest first; the first firing suffix
decides: proper suffix -> the child is the reactant of a derived reaction
and is discarded, full word -> primitive, no firing -> red.

Words at one level are held as rows of a numpy uint8 matrix and hashed
incrementally from the last atom to the first, so all suffix coins of a
child cost O(level) vectorized hash steps for the whole level at once.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import _field
from .core import (
    CapacityError,
    MemoryBudgetError,
    ModelParams,
    Word,
    food_fingerprint,
    cut_partner,
    packing_capacity,
)

DEFAULT_VERTEX_BUDGET = 10 ** 8


@dataclass
class LevelTree:
    """Common container for composition and fragmentation trees."""

    params: ModelParams
    seed: int
    n_max: int
    kind: str  # "anabolic" | "catabolic"
    red_arrays: List[np.ndarray] = field(default_factory=list)
    prim_arrays: List[np.ndarray] = field(default_factory=list)
    extinct_at: Optional[int] = None

    def _as_words(self, arrays, n):
        if n >= len(arrays):
            return set()
        return {Word(tuple(int(a) for a in row)) for row in arrays[n]}

    def red_words(self, n) -> set:
        return self._as_words(self.red_arrays, n)

    def prim_words(self, n) -> set:
        return self._as_words(self.prim_arrays, n)

    @property
    def red_levels(self):
        return [self.red_words(n) for n in range(self.n_max + 1)]

    @property
    def prim_levels(self):
        return [self.prim_words(n) for n in range(self.n_max + 1)]


CompositionTree = LevelTree
FragmentationTree = LevelTree


def level_sizes(tree: LevelTree) -> List[int]:
    out = [0] * (tree.n_max + 1)
    for n, arr in enumerate(tree.red_arrays):
        out[n] = len(arr)
    return out


def prim_counts(tree: LevelTree) -> List[int]:
    out = [0] * (tree.n_max + 1)
    for n, arr in enumerate(tree.prim_arrays):
        out[n] = len(arr)
    return out


def height(tree: LevelTree) -> Optional[int]:
    """Max non-empty red level; None when still alive at n_max."""
    last = None
    for n, arr in enumerate(tree.red_arrays):
        if len(arr):
            last = n
    if last == tree.n_max and len(tree.red_arrays[tree.n_max]):
        return None
    return last if last is not None else -1


def _check_capacity(params: ModelParams, n_max: int) -> None:
    if n_max + 1 > packing_capacity(params.alphabet.size):
        raise CapacityError(
            f"n_max={n_max} exceeds packing capacity for |A|={params.alphabet.size}"
        )


def _empty_level(n):
    return np.zeros((0, n + 1), dtype=np.uint8)


def build_anabolic_tree(
    params: ModelParams,
    seed: int,
    n_max: int,
    vertex_budget: int = DEFAULT_VERTEX_BUDGET,
    fire_fn: Optional[Callable] = None,
) -> CompositionTree:
    """Build the multi-food composition tree T = intersection over foods.

    fire_fn(food: Word, atoms: tuple) -> bool optionally replaces the hash
    field (used by golden tests with injected rule sets).
    """
    _check_capacity(params, n_max)
    alpha = params.alphabet.size
    p, z = params.p, params.z
    foods = [(f, food_fingerprint(f), f.level) for f in params.foodset]
    seedmix = _field.seed_mix(seed, _field.TAG_ANABOLIC)
    tree = CompositionTree(params=params, seed=seed, n_max=n_max, kind="anabolic")

    def fire_mask(children, state, k):
        """OR over foods of the suffix-coin at suffix level k."""
        m = children.shape[0]
        if fire_fn is not None:
            out = np.zeros(m, dtype=bool)
            ncols = children.shape[1]
            for i in range(m):
                suffix = tuple(int(a) for a in children[i, ncols - 1 - k:])
                out[i] = any(fire_fn(f, suffix) for f, _, _ in foods)
            return out
        out = np.zeros(m, dtype=bool)
        for _, fp, flev in foods:
            u = _field.np_uniform(_field.np_coin_key(state, fp, seedmix))
            out |= u < p * z ** (flev + k)
        return out

    total = 0
    for n in range(n_max + 1):
        if n == 0:
            children = np.arange(alpha, dtype=np.uint8).reshape(-1, 1)
        else:
            parents = tree.red_arrays[n - 1]
            if len(parents) == 0:
                tree.extinct_at = n
                break
            children = np.repeat(parents, alpha, axis=0)
            bcol = np.tile(np.arange(alpha, dtype=np.uint8), len(parents))
            children = np.hstack([children, bcol.reshape(-1, 1)])
        total += len(children)
        if total > vertex_budget:
            tree.extinct_at = None
            raise MemoryBudgetError(
                f"vertex budget {vertex_budget} exceeded at level {n}", partial=tree
            )
        state = np.full(len(children), _field.CHAIN_INIT, dtype=np.uint64)
        state = _field.np_chain_step(state, children[:, -1])
        undecided = np.ones(len(children), dtype=bool)
        blue = np.zeros(len(children), dtype=bool)
        for k in range(n + 1):
            if k > 0:
                state = _field.np_chain_step(state, children[:, n - k])
            fires = fire_mask(children, state, k)
            if k < n:
                undecided &= ~fires
            else:
                blue = undecided & fires
        red = undecided & ~blue
        tree.red_arrays.append(children[red])
        tree.prim_arrays.append(children[blue])
        if len(tree.red_arrays[-1]) == 0 and tree.extinct_at is None:
            tree.extinct_at = n
            break
    return tree


def build_fragmentation_tree(
    params: ModelParams,
    seed: int,
    n_max: int,
    vertex_budget: int = DEFAULT_VERTEX_BUDGET,
    fire_fn: Optional[Callable] = None,
) -> FragmentationTree:
    """Build the tree of non-decomposable words.

    A word is decomposable iff some (subword, aligned cut) coin fires;
    scanning runs over suffixes shortest first and, inside a suffix of
    level k, over cuts j = 1..k.  fire_fn(atoms: tuple, cut: int) -> bool
    optionally replaces the hash field.
    """
    _check_capacity(params, n_max)
    alpha = params.alphabet.size
    q, z = params.q, params.z
    seedmix = _field.seed_mix(seed, _field.TAG_CATABOLIC)
    tree = FragmentationTree(params=params, seed=seed, n_max=n_max, kind="catabolic")

    def fire_mask(children, state, k):
        m = children.shape[0]
        out = np.zeros(m, dtype=bool)
        if k == 0:
            return out  # single atom: no bond to cut
        if fire_fn is not None:
            ncols = children.shape[1]
            for i in range(m):
                suffix = tuple(int(a) for a in children[i, ncols - 1 - k:])
                out[i] = any(fire_fn(suffix, j) for j in range(1, k + 1))
            return out
        thr = q * z ** k
        for j in range(1, k + 1):
            u = _field.np_uniform(_field.np_coin_key(state, cut_partner(j), seedmix))
            out |= u < thr
        return out

    total = 0
    for n in range(n_max + 1):
        if n == 0:
            children = np.arange(alpha, dtype=np.uint8).reshape(-1, 1)
        else:
            parents = tree.red_arrays[n - 1]
            if len(parents) == 0:
                tree.extinct_at = n
                break
            children = np.repeat(parents, alpha, axis=0)
            bcol = np.tile(np.arange(alpha, dtype=np.uint8), len(parents))
            children = np.hstack([children, bcol.reshape(-1, 1)])
        total += len(children)
        if total > vertex_budget:
            tree.extinct_at = None
            raise MemoryBudgetError(
                f"vertex budget {vertex_budget} exceeded at level {n}", partial=tree
            )
        state = np.full(len(children), _field.CHAIN_INIT, dtype=np.uint64)
        state = _field.np_chain_step(state, children[:, -1])
        undecided = np.ones(len(children), dtype=bool)
        blue = np.zeros(len(children), dtype=bool)
        for k in range(n + 1):
            if k > 0:
                state = _field.np_chain_step(state, children[:, n - k])
            fires = fire_mask(children, state, k)
            if k < n:
                undecided &= ~fires
            else:
                blue = undecided & fires
        red = undecided & ~blue
        tree.red_arrays.append(children[red])
        tree.prim_arrays.append(children[blue])
        if len(tree.red_arrays[-1]) == 0 and tree.extinct_at is None:
            tree.extinct_at = n
            break
    return tree

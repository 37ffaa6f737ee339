"""Words, alphabets, foodsets, reaction identities and the quenched coin field.

A molecule is an oriented word over a finite alphabet; its level is the
number of bonds (length - 1).  A realization of the random reaction network
is a fixed assignment of Bernoulli coins to reaction identities, implemented
as a pure hash of (seed, identity) so the same word drawn in different
contexts always sees the same coin.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

from . import _field


class CapacityError(Exception):
    """Word or level range exceeds the packed-word capacity."""


class MemoryBudgetError(Exception):
    """Construction exceeded the vertex budget; partial results attached."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


# atoms are packed PACK_BITS_TOTAL // bits_per_atom to a word
PACK_BITS_TOTAL = 128


def bits_per_atom(alphabet_size: int) -> int:
    return max(1, (alphabet_size - 1).bit_length())


def packing_capacity(alphabet_size: int) -> int:
    """Maximum number of atoms a packed word can hold."""
    return PACK_BITS_TOTAL // bits_per_atom(alphabet_size)


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ValueError("alphabet size must be >= 2")

    def validate_word(self, word: "Word") -> None:
        if any(a >= self.size for a in word.atoms):
            raise ValueError("atom index out of alphabet range")
        if len(word.atoms) > packing_capacity(self.size):
            raise CapacityError(
                f"word of {len(word.atoms)} atoms exceeds packing capacity "
                f"{packing_capacity(self.size)} for |A|={self.size}"
            )


@dataclass(frozen=True)
class Word:
    atoms: tuple

    def __post_init__(self):
        if len(self.atoms) == 0:
            raise ValueError("words are non-empty")
        if any((not isinstance(a, int)) or a < 0 for a in self.atoms):
            raise ValueError("atoms are non-negative integers")

    @property
    def level(self) -> int:
        return len(self.atoms) - 1

    def reverse(self) -> "Word":
        return Word(tuple(reversed(self.atoms)))

    def concat(self, other: "Word") -> "Word":
        return Word(self.atoms + other.atoms)

    def pack(self, alphabet_size: int) -> int:
        """Pack atoms into a single integer (fixed bits per atom) plus length."""
        bits = bits_per_atom(alphabet_size)
        if len(self.atoms) * bits > PACK_BITS_TOTAL:
            raise CapacityError("word exceeds packing capacity")
        value = 0
        for a in self.atoms:
            value = (value << bits) | a
        return (value << 8) | len(self.atoms)

    def __str__(self):
        if max(self.atoms) < 26:
            return "".join(chr(ord("a") + a) for a in self.atoms)
        return ".".join(str(a) for a in self.atoms)


def word(text: str) -> Word:
    """Convenience constructor from a letter string ('a' -> atom 0)."""
    return Word(tuple(ord(c) - ord("a") for c in text))


@dataclass(frozen=True)
class Foodset:
    foods: tuple

    def __post_init__(self):
        if len(self.foods) == 0:
            raise ValueError("foodset is non-empty")
        if len(set(self.foods)) != len(self.foods):
            raise ValueError("duplicate foods rejected")

    def __iter__(self):
        return iter(self.foods)

    def __len__(self):
        return len(self.foods)


@dataclass(frozen=True)
class ModelParams:
    alphabet: Alphabet
    foodset: Foodset
    p: float
    q: float
    z: float = 1.0
    variant: str = "I"

    def __post_init__(self):
        if self.variant not in ("I", "II"):
            raise ValueError("variant must be 'I' or 'II'")
        if (self.variant == "I") != (self.z == 1.0):
            raise ValueError("variant I iff z == 1")
        if not (0.0 < self.p < 1.0) or not (0.0 < self.q < 1.0):
            raise ValueError("p, q must lie in (0,1)")
        if not (0.0 < self.z <= 1.0):
            raise ValueError("z must lie in (0,1]")
        for f in self.foodset:
            self.alphabet.validate_word(f)


@dataclass(frozen=True)
class Anabolic:
    food: Word
    reactant: Word


@dataclass(frozen=True)
class Catabolic:
    reactant: Word
    cut: int

    def __post_init__(self):
        if not (1 <= self.cut <= self.reactant.level):
            raise ValueError("cut must sever an existing bond")


ReactionId = Union[Anabolic, Catabolic]


def bernoulli_param(params: ModelParams, rid: ReactionId) -> float:
    """Acceptance probability of the coin attached to a reaction identity."""
    if isinstance(rid, Anabolic):
        return params.p * params.z ** (rid.food.level + rid.reactant.level)
    return params.q * params.z ** rid.reactant.level


def cut_partner(cut: int) -> int:
    return _field.mix64(((cut + 1) * _field.PHI64) & _field.MASK64)


def food_fingerprint(food: Word) -> int:
    return _field.mix64(_field.word_state(food.atoms))


@dataclass(frozen=True)
class ReactionOracle:
    seed: int
    params: ModelParams
    _seedmix_ana: int = field(init=False, repr=False)
    _seedmix_cata: int = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_seedmix_ana", _field.seed_mix(self.seed, _field.TAG_ANABOLIC)
        )
        object.__setattr__(
            self, "_seedmix_cata", _field.seed_mix(self.seed, _field.TAG_CATABOLIC)
        )

    def uniform(self, rid: ReactionId) -> float:
        """The hash-derived uniform deciding rid's coin."""
        state = _field.word_state(rid.reactant.atoms)
        if isinstance(rid, Anabolic):
            key = _field.coin_key(state, food_fingerprint(rid.food), self._seedmix_ana)
        else:
            key = _field.coin_key(state, cut_partner(rid.cut), self._seedmix_cata)
        return _field.uniform_from(key)


def omega(oracle: ReactionOracle, rid: ReactionId) -> int:
    """The quenched coin: 1 with probability bernoulli_param(rid)."""
    return int(oracle.uniform(rid) < bernoulli_param(oracle.params, rid))


def strict_subwords(X: Word) -> set:
    """All contiguous factors of X other than X itself."""
    n = len(X.atoms)
    out = set()
    for i in range(n):
        for j in range(i + 1, n + 1):
            if j - i < n:
                out.add(Word(X.atoms[i:j]))
    return out


def _subwords_with_self(X: Word):
    yield X
    for s in strict_subwords(X):
        yield s


def is_reactant_anabolic(oracle: ReactionOracle, F: Word, X: Word) -> int:
    """1 iff some subword of X (including X) fires the coin for food F."""
    for sub in _subwords_with_self(X):
        if omega(oracle, Anabolic(F, sub)):
            return 1
    return 0


def is_decomposable(oracle: ReactionOracle, X: Word) -> int:
    """1 iff some (subword, aligned cut) coin fires: X can be fragmented."""
    n = len(X.atoms)
    for i in range(n):
        for j in range(i + 2, n + 1):
            sub = Word(X.atoms[i:j])
            for k in range(1, j - i):
                if omega(oracle, Catabolic(sub, k)):
                    return 1
    return 0


def complexity_index(oracle: ReactionOracle, rid: ReactionId) -> Optional[int]:
    """Minimal level sum over firing sub-reactions rid derives from.

    Returns None when no sub-reaction fires (the completed reaction does not
    exist in this realization).
    """
    best = None
    if isinstance(rid, Anabolic):
        for sub in _subwords_with_self(rid.reactant):
            if omega(oracle, Anabolic(rid.food, sub)):
                ell = rid.food.level + sub.level
                if best is None or ell < best:
                    best = ell
        return best
    atoms = rid.reactant.atoms
    n = len(atoms)
    for i in range(n):
        for j in range(i + 2, n + 1):
            # cut must fall strictly inside the subword: i+1 <= cut <= j-1
            if not (i + 1 <= rid.cut <= j - 1):
                continue
            sub = Word(atoms[i:j])
            if omega(oracle, Catabolic(sub, rid.cut - i)):
                ell = sub.level
                if best is None or ell < best:
                    best = ell
    return best

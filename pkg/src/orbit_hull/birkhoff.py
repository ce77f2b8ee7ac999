"""Birkhoff decomposition of doubly stochastic matrices into permutation matrices."""
from typing import List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import DegeneracyError
from .logger import get_logger
from .majorization import DoublyStochastic
from .matching import perfect_matching

# Get the logger
logger = get_logger()


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """P with P[i, perm[i]] = 1, so that (P mu)_i = mu[perm[i]]."""
    n = len(perm)
    p = np.zeros((n, n))
    p[np.arange(n), list(perm)] = 1.0
    return p


class PermutationTerm(BaseModel):
    model_config = ConfigDict(frozen=True)

    weight: float = Field(gt=0, le=1 + 1e-12)
    perm: Tuple[int, ...] = Field(description="Zero-based images: row i is matched to column perm[i].")

    @field_validator("perm")
    @classmethod
    def _is_permutation(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if sorted(value) != list(range(len(value))):
            raise ValueError(f"{value} is not a permutation of 0..{len(value) - 1}")
        return value


class PermutationCombination(BaseModel):
    """Convex combination sum t_sigma P_sigma with distinct permutations."""
    model_config = ConfigDict(frozen=True)

    terms: List[PermutationTerm]

    @model_validator(mode="after")
    def _check(self) -> "PermutationCombination":
        if not self.terms:
            raise ValueError("a combination needs at least one term")
        n = len(self.terms[0].perm)
        if any(len(term.perm) != n for term in self.terms):
            raise ValueError("permutations act on different sizes")
        if len({term.perm for term in self.terms}) != len(self.terms):
            raise ValueError("permutations must be pairwise distinct")
        total = sum(term.weight for term in self.terms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total!r}, not 1")
        if len(self.terms) > n * n - 2 * n + 2:
            raise ValueError(f"{len(self.terms)} terms exceed the bound {n * n - 2 * n + 2}")
        return self

    @property
    def n(self) -> int:
        return len(self.terms[0].perm)


def decompose(d: Union[DoublyStochastic, np.ndarray], tol: float = 1e-10) -> PermutationCombination:
    """Greedy peeling: match on the residual's support, subtract the smallest matched entry."""
    if not isinstance(d, DoublyStochastic):
        d = DoublyStochastic.from_array(d)
    n = d.n
    dust = tol / n
    residual = d.d.copy()
    residual[residual < dust] = 0.0
    rows = np.arange(n)

    peeled: List[Tuple[float, List[int]]] = []
    matching = None
    while np.any(residual > 0):
        if len(peeled) >= n * n:
            raise DegeneracyError("peeling did not terminate within n^2 steps")
        matching = perfect_matching(residual > 0, matching)
        if matching is None:
            raise DegeneracyError(
                f"no perfect matching on the residual support after {len(peeled)} terms; "
                "input is not doubly stochastic within tolerance"
            )
        matched = residual[rows, matching]
        smallest = int(np.argmin(matched))
        weight = float(matched[smallest])
        residual[rows, matching] -= weight
        residual[smallest, matching[smallest]] = 0.0
        residual[residual < dust] = 0.0
        peeled.append((weight, list(matching)))

    total = sum(weight for weight, _ in peeled)
    terms = [PermutationTerm(weight=weight / total, perm=tuple(perm)) for weight, perm in peeled]
    logger.info(f"decompose: n={n}, {len(terms)} permutations")
    return PermutationCombination(terms=terms)


def evaluate(combination: PermutationCombination, n: int) -> DoublyStochastic:
    """sum t_sigma P_sigma."""
    d = np.zeros((n, n))
    for term in combination.terms:
        d[np.arange(n), list(term.perm)] += term.weight
    return DoublyStochastic(n=n, d=d)

"""Seeded random instances. Every generator draws only from the Generator it is given."""
import math
from typing import Optional, Sequence

import numpy as np
from scipy.stats import unitary_group

from .birkhoff import PermutationCombination, PermutationTerm, evaluate
from .errors import ParameterError
from .majorization import DoublyStochastic


def random_complex_tuple(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary of size n."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    if n == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(n, random_state=rng)


def random_normal(n: int, rng: np.random.Generator, spectrum: Optional[Sequence[complex]] = None) -> np.ndarray:
    """U diag(spectrum) U* with a Haar U; the spectrum is random when omitted."""
    values = random_complex_tuple(n, rng) if spectrum is None else np.asarray(spectrum, dtype=complex)
    if values.size != n:
        raise ParameterError(f"spectrum has {values.size} entries, expected {n}")
    u = random_unitary(n, rng)
    return u @ np.diag(values) @ u.conj().T


def random_permutation_combination(n: int, rng: np.random.Generator, terms: int) -> PermutationCombination:
    """Dirichlet weights on distinct uniform permutations; terms is capped at min(n!, n^2 - 2n + 2)."""
    if terms < 1:
        raise ParameterError(f"terms must be positive, got {terms}")
    terms = min(terms, math.factorial(n), n * n - 2 * n + 2)
    perms = []
    while len(perms) < terms:
        perm = tuple(int(i) for i in rng.permutation(n))
        if perm not in perms:
            perms.append(perm)
    weights = rng.dirichlet(np.ones(terms))
    weights = weights / weights.sum()
    return PermutationCombination(
        terms=[PermutationTerm(weight=float(w), perm=perm) for w, perm in zip(weights, perms)]
    )


def random_doubly_stochastic(n: int, rng: np.random.Generator, terms: Optional[int] = None) -> DoublyStochastic:
    """Mixture of random permutation matrices; n terms by default."""
    return evaluate(random_permutation_combination(n, rng, terms or n), n)

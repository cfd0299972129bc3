"""Exact Shapley values of small cooperative games."""

import math
from collections.abc import Callable, Sequence
from fractions import Fraction
from functools import cache
from itertools import combinations, permutations

CharacteristicFunction = Callable[[frozenset[str]], int | Fraction]


def shapley_subset(
    players: Sequence[str],
    value: CharacteristicFunction,
) -> dict[str, Fraction]:
    """
    Shapley values by the subset formula.

    phi_i = sum over S not containing i of |S|! (n-|S|-1)! / n! * (v(S+i) - v(S))
    """
    n = len(players)
    if n == 0:
        return {}

    factorials = [math.factorial(k) for k in range(n + 1)]
    v = cache(value)
    indices: dict[str, Fraction] = {p: Fraction(0) for p in players}

    for i in players:
        others = [p for p in players if p != i]
        for k in range(len(others) + 1):
            weight = Fraction(factorials[k] * factorials[n - k - 1], factorials[n])
            for subset in combinations(others, k):
                s = frozenset(subset)
                indices[i] += weight * (v(s | {i}) - v(s))

    return indices


def shapley_permutation(
    players: Sequence[str],
    value: CharacteristicFunction,
) -> dict[str, Fraction]:
    """Shapley values as the average marginal contribution over all orderings."""
    n = len(players)
    if n == 0:
        return {}

    v = cache(value)
    indices: dict[str, Fraction] = {p: Fraction(0) for p in players}
    for order in permutations(players):
        coalition: frozenset[str] = frozenset()
        previous = v(coalition)
        for i in order:
            coalition = coalition | {i}
            current = v(coalition)
            indices[i] += current - previous
            previous = current

    total = math.factorial(n)
    return {p: x / total for p, x in indices.items()}

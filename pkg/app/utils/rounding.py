"""Integer partitioning by the largest-remainder rule."""

from collections.abc import Sequence
from fractions import Fraction


def largest_remainder(amount: int, weights: Sequence[Fraction | int]) -> list[int]:
    """
    Split an integer amount proportionally to weights, exactly.

    Each share is floored, then the leftover units go one each to the
    largest fractional parts; ties go to the earliest position.

    Args:
        amount: Non-negative number of token units to split
        weights: Non-negative weights, at least one positive

    Returns:
        Integer shares in the order of weights, summing to amount

    Raises:
        ValueError: If amount is negative or all weights are zero
    """
    if amount < 0:
        raise ValueError("amount must be non-negative")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    total = sum((Fraction(w) for w in weights), Fraction(0))
    if total == 0:
        raise ValueError("at least one weight must be positive")

    quotas = [Fraction(w) * amount / total for w in weights]
    shares = [q.numerator // q.denominator for q in quotas]
    leftover = amount - sum(shares)

    # Largest fractional part first, earliest index on ties
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - shares[i]), i))
    for i in order[:leftover]:
        shares[i] += 1
    return shares


def equal_split(amount: int, count: int) -> list[int]:
    """Split amount into count near-equal shares, remainders to the earliest."""
    if count <= 0:
        raise ValueError("count must be positive")
    return largest_remainder(amount, [1] * count)


def floor_fraction(amount: int, fraction: Fraction) -> int:
    """Floor of amount * fraction for non-negative inputs."""
    product = fraction * amount
    return product.numerator // product.denominator

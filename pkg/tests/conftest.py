"""Shared test helpers: compact builders for schemes, class sequences,
and seeded random code arrays."""

from __future__ import annotations

import numpy as np

from droughtcast import ClassificationScheme, ClassSequence, DroughtClass, Period
from droughtcast.classification import DEFAULT_SCHEME
from droughtcast.kappa import LagWeight, LagWeightProfile
from droughtcast.transitions import matrices_from_counts


def scheme_with(class_count: int) -> ClassificationScheme:
    """A minimal valid scheme with the requested number of classes."""
    if class_count == 7:
        return DEFAULT_SCHEME
    classes = tuple(DroughtClass(r, f"C{r}") for r in range(1, class_count + 1))
    return ClassificationScheme(
        classes=classes,
        cuts=tuple(float(k) for k in range(class_count - 1)),
        cut_to_upper=(True,) * (class_count - 1),
        neutral_rank=(class_count + 1) // 2,
    )


def sequence_from_codes(
    codes,
    scheme: ClassificationScheme | None = None,
    station_id: str = "t",
    start: Period = Period(2000, 1),
) -> ClassSequence:
    """ClassSequence from 0-based class codes; None marks a gap."""
    scheme = scheme or DEFAULT_SCHEME
    values = tuple(None if c is None else scheme.classes[c] for c in codes)
    return ClassSequence(
        station_id=station_id, start=start, values=values, scheme=scheme
    )


def random_codes(rng: np.random.Generator, length: int, class_count: int, gap_rate: float = 0.0):
    """Uniform random 0-based codes with independent gaps."""
    codes: list[int | None] = rng.integers(0, class_count, size=length).tolist()
    if gap_rate > 0.0:
        for i in range(length):
            if rng.random() < gap_rate:
                codes[i] = None
    return codes


def profile_with_weights(weights, basis: str = "kappa") -> LagWeightProfile:
    """A weight profile carrying explicit weights (kappa slots unused)."""
    lags = tuple(
        LagWeight(lag=t + 1, kappa=w, z_stat=None, p_value=None, weight=w, pair_count=1)
        for t, w in enumerate(weights)
    )
    return LagWeightProfile(
        max_lag=len(weights), basis=basis, lags=lags, uniform_fallback=False
    )


def matrix_set_from_rows(rows_by_lag):
    """A TransitionMatrixSet whose every row equals the given per-lag row."""
    counts = []
    for row in rows_by_lag:
        d = len(row)
        scaled = np.array([[int(round(p * 100_000)) for p in row]] * d)
        counts.append(scaled)
    return matrices_from_counts(counts)


def simulate_chain(
    rng: np.random.Generator, matrix: np.ndarray, length: int, start_state: int = 0
) -> list[int]:
    """Sample a first-order chain path from a stochastic matrix."""
    matrix = np.asarray(matrix, dtype=float)
    state = start_state
    out = [state]
    for _ in range(length - 1):
        state = int(rng.choice(matrix.shape[0], p=matrix[state]))
        out.append(state)
    return out

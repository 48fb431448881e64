import numpy as np
from sklearn.utils import check_array

from .exceptions import DomainError


def check_inputs(X, d=None) -> np.ndarray:
    """Validate inputs in the unit cube; returns a 2-d float array."""
    X = np.asarray(X, dtype=float)
    if X.ndim <= 1:
        X = X.reshape(-1, 1)
    X = check_array(X, dtype=float, ensure_min_samples=0)
    if d is not None and X.shape[1] != d:
        raise DomainError(f"expected {d} feature(s), got {X.shape[1]}")
    if X.size and (X.min() < 0.0 or X.max() > 1.0):
        raise DomainError("inputs must lie in [0, 1]")
    return X


def check_targets(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if len(y) != n:
        raise ValueError(f"got {n} inputs but {len(y)} targets")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets must be finite")
    return y


def check_exponent(p: float, name: str = "p", lower: float = 0.0) -> float:
    p = float(p)
    if not p > lower:
        raise DomainError(f"{name} must be > {lower}, got {p!r}")
    return p

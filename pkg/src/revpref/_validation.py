"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .dataset import Dataset, DatasetError


def check_dataset(X, bundles=None, exact: bool = True) -> Dataset:
    """Coerce estimator input into a :class:`Dataset`.

    Accepts a ``Dataset`` (returned as is), a ``(K, 2n)`` array laid out as
    ``[p1..pn, x1..xn]`` like the CSV format, or separate price and bundle
    arrays.
    """
    if isinstance(X, Dataset):
        return X
    if bundles is None:
        arr = check_array(X, dtype=np.float64, ensure_min_samples=1)
        if arr.shape[1] % 2:
            raise DatasetError(f"expected an even number of columns [p..., x...], got {arr.shape[1]}")
        n = arr.shape[1] // 2
        P, Xb = arr[:, :n], arr[:, n:]
    else:
        P = check_array(X, dtype=np.float64)
        Xb = check_array(bundles, dtype=np.float64)
        if P.shape != Xb.shape:
            raise DatasetError(f"prices {P.shape} and bundles {Xb.shape} differ in shape")
    return Dataset(P.tolist(), Xb.tolist(), exact=exact)


def check_prices(P, n_goods: int | None = None) -> np.ndarray:
    P = check_array(P, dtype=np.float64)
    if n_goods is not None and P.shape[1] != n_goods:
        raise ValueError(f"expected {n_goods} prices per row, got {P.shape[1]}")
    if np.any(P <= 0):
        raise ValueError("prices must be strictly positive")
    return P

"""scikit-learn style wrappers.

``RationalityAnalyzer`` fits the index battery to one consumer's data;
``CobbDouglasDemand`` is a demand model that can be fitted to observed
budget shares and used to simulate choices.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_dataset, check_prices
from .indices import ccei
from .report import analyze
from .synth import CobbDouglasAgent


class RationalityAnalyzer(BaseEstimator):
    """Revealed-preference rationality indices for a single consumer.

    Parameters
    ----------
    tol : float, default=1e-9
        Threshold under which the instability value counts as zero.
    norm : {"l1"}, default="l1"
        Norm used in the instability program.
    max_cycle_len : int or None, default=None
        Longest cycle enumerated for the money pump index. ``None`` uses K
        for K <= 10 and 4 otherwise.
    aggregator : {"ssq", "sum"}, default="ssq"
        Aggregation of per-observation efficiencies for the Varian index.
    exact : bool, default=True
        Compare expenditures as exact rationals.

    Attributes
    ----------
    report_ : AnalysisReport
    garp_ : bool
    ccei_ : float
    ccei_attained_ : bool
    varian_ : tuple of float
    mpi_ : float
        Largest money pump index over the enumerated cycles.
    afriat_ : AfriatSolution or None
    phi_ : float
    n_features_in_ : int
    """

    def __init__(self, tol=1e-9, norm="l1", max_cycle_len=None, aggregator="ssq", exact=True):
        self.tol = tol
        self.norm = norm
        self.max_cycle_len = max_cycle_len
        self.aggregator = aggregator
        self.exact = exact

    def fit(self, X, y=None):
        """Analyse one consumer.

        ``X`` is a :class:`~revpref.dataset.Dataset` or a ``(K, 2n)`` array
        ``[p1..pn, x1..xn]``. ``y`` is ignored.
        """
        d = check_dataset(X, exact=self.exact)
        rep = analyze(
            d,
            tol=self.tol,
            norm=self.norm,
            max_cycle_len=self.max_cycle_len,
            aggregator=self.aggregator,
        )
        self.report_ = rep
        self.n_features_in_ = 2 * d.n
        self.garp_ = rep.garp
        self.ccei_ = float(rep.ccei.value)
        self.ccei_attained_ = rep.ccei.attained
        self.varian_ = tuple(float(v) for v in rep.varian.e)
        self.mpi_ = float(rep.money_pump.max_mpi)
        self.afriat_ = rep.afriat
        self.phi_ = rep.phi.phi
        return self

    def score(self, X=None, y=None):
        """CCEI of ``X`` (of the fitted data when ``X`` is None)."""
        if X is None:
            check_is_fitted(self, "report_")
            return self.ccei_
        return float(ccei(check_dataset(X, exact=self.exact)).value)


class CobbDouglasDemand(RegressorMixin, BaseEstimator):
    """Cobb-Douglas demand ``x_l = alpha_l * income / p_l``.

    ``fit(P, X)`` sets ``alpha_`` to the mean observed budget shares; with
    ``alpha`` given at construction, ``fit`` only validates and keeps it.

    Parameters
    ----------
    alpha : array-like of shape (n,), optional
        Fixed expenditure shares.
    income : float, default=1.0
        Budget used by :meth:`predict` when none is passed.
    """

    def __init__(self, alpha=None, income=1.0):
        self.alpha = alpha
        self.income = income

    def fit(self, X, y=None):
        P = check_prices(X)
        if self.alpha is not None:
            agent = CobbDouglasAgent(list(np.asarray(self.alpha, dtype=float)))
            alpha = np.array([float(a) for a in agent.alpha])
        else:
            if y is None:
                raise ValueError("bundles are required to estimate alpha")
            B = np.asarray(y, dtype=float)
            if B.shape != P.shape:
                raise ValueError(f"prices {P.shape} and bundles {B.shape} differ in shape")
            spend = P * B
            shares = spend / spend.sum(axis=1, keepdims=True)
            alpha = shares.mean(axis=0)
        self.alpha_ = alpha
        self.n_features_in_ = P.shape[1]
        return self

    def predict(self, X, income=None):
        check_is_fitted(self, "alpha_")
        P = check_prices(X, self.n_features_in_)
        income = self.income if income is None else income
        income = np.broadcast_to(np.asarray(income, dtype=float), (P.shape[0],))
        return self.alpha_[None, :] * income[:, None] / P

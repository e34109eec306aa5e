"""scikit-learn style wrappers.

The "samples" here are whole density fields, so inputs are a
:class:`DensityField` or a sequence of them rather than a 2-d array.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .density import banach_density
from .field import DensityField
from .functionals import colinear_triple, pair_correlation, triangle_d1
from .spectral import as_field, poisson_smooth_values

__all__ = ["PoissonSmoother", "BanachDensityEstimator", "ScaleProfile"]


def _as_fields(X):
    if isinstance(X, DensityField):
        return [X], True
    fields = list(X)
    if not fields or not all(isinstance(f, DensityField) for f in fields):
        raise TypeError("expected a DensityField or a non-empty sequence of DensityFields")
    return fields, False


class PoissonSmoother(TransformerMixin, BaseEstimator):
    """Convolve fields with the Poisson kernel ``P_lam`` and clamp into [0, 1]."""

    def __init__(self, lam=0.05, pad=2.0):
        self.lam = lam
        self.pad = pad

    def fit(self, X, y=None):
        fields, _ = _as_fields(X)
        self.n_fields_in_ = len(fields)
        self.dim_ = fields[0].dim
        return self

    def transform(self, X):
        check_is_fitted(self, "dim_")
        fields, single = _as_fields(X)
        out = [as_field(f, poisson_smooth_values(f, self.lam, pad=self.pad)) for f in fields]
        return out[0] if single else out


class BanachDensityEstimator(BaseEstimator):
    """Tail maximum of supremal window averages over a window-side schedule."""

    def __init__(self, t_schedule=(1.0, 2.0, 4.0, 8.0), stride=None, tail=3, centers="all"):
        self.t_schedule = t_schedule
        self.stride = stride
        self.tail = tail
        self.centers = centers

    def fit(self, X, y=None):
        fields, _ = _as_fields(X)
        self.envelopes_ = [banach_density(f, self.t_schedule, self.stride, self.tail, self.centers) for f in fields]
        self.estimate_ = np.array([e.estimate for e in self.envelopes_])
        return self

    def predict(self, X):
        fields, single = _as_fields(X)
        est = np.array([banach_density(f, self.t_schedule, self.stride, self.tail, self.centers).estimate
                        for f in fields])
        return est[0] if single else est


class ScaleProfile(TransformerMixin, BaseEstimator):
    """Feature vector of a configuration functional over a list of scales.

    ``transform`` returns an array of shape ``(n_fields, len(t_values))``.
    """

    def __init__(self, functional="pair", t_values=(1.0, 2.0, 4.0), alpha=0.5, method="spatial"):
        self.functional = functional
        self.t_values = t_values
        self.alpha = alpha
        self.method = method

    def fit(self, X, y=None):
        if self.functional not in ("pair", "d1", "colinear"):
            raise ValueError(f"functional must be pair, d1 or colinear, got {self.functional!r}")
        _as_fields(X)
        self.n_features_out_ = len(self.t_values)
        return self

    def _one(self, f, t):
        if self.functional == "pair":
            return pair_correlation(f, t, method=self.method).value
        if self.functional == "d1":
            return triangle_d1(f, self.alpha, t=t).value
        return colinear_triple(f, t).value

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        fields, _ = _as_fields(X)
        return np.array([[self._one(f, t) for t in self.t_values] for f in fields])

    def get_feature_names_out(self, input_features=None):
        return np.array([f"{self.functional}_t{t:g}" for t in self.t_values], dtype=object)

import numpy as np
import pytest
from scipy import stats

from robitda.models import ModelKind, UnverifiedModelWarning
from robitda.special import DomainError


def test_robit_requires_nu_above_two():
    with pytest.raises(DomainError):
        ModelKind.robit(2.0)
    with pytest.raises(DomainError):
        ModelKind.robit(-1.0)


def test_low_nu_override_warns():
    with pytest.warns(UnverifiedModelWarning):
        m = ModelKind.robit(1.5, allow_low_nu=True)
    assert m.nu == 1.5


def test_probit_takes_no_nu():
    with pytest.raises(ValueError):
        ModelKind("probit", 3.0)
    with pytest.raises(ValueError):
        ModelKind("logit")


def test_labels():
    assert ModelKind.robit(3).label == "robit-3"
    assert ModelKind.probit().label == "probit"


def test_log_cdf_matches_scipy():
    eta = np.linspace(-8, 8, 41)
    np.testing.assert_allclose(ModelKind.robit(4).log_cdf(eta), stats.t.logcdf(eta, 4), rtol=1e-12)
    np.testing.assert_allclose(ModelKind.probit().log_cdf(eta), stats.norm.logcdf(eta), rtol=1e-12)
    assert np.isfinite(ModelKind.probit().log_cdf(-1e3))

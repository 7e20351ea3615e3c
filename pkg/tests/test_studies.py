import numpy as np
import pytest

from wenonn.core import ConfigurationError
from wenonn.studies import PROBE_FUNCTIONS, convergence_study, jump_profile, weight_probe
from wenonn.weno import scheme


def test_first_order_reference_rate():
    rows = convergence_study(None, [100, 200, 400], t_final=0.25, first_order=True)
    assert np.isnan(rows[0].l1_order)
    assert rows[-1].l1_order == pytest.approx(1.0, abs=0.1)


def test_convergence_rows_and_validation():
    rows = convergence_study(scheme("weno5-js"), [40, 80], t_final=0.1)
    assert [r.n for r in rows] == [40, 80]
    assert rows[1].l1_error < rows[0].l1_error
    with pytest.raises(ConfigurationError):
        convergence_study(scheme("weno5-js"), [80, 40])
    with pytest.raises(ConfigurationError):
        convergence_study(None, [40, 80])


def test_jump_profile_lift():
    assert jump_profile(0.5) - jump_profile(0.5 - 1e-12) == pytest.approx(3.0, abs=1e-9)


def test_weight_probe_shapes_and_jump():
    x, W = weight_probe("jump", scheme("weno5-z"), 200)
    assert x.shape == (200,) and W.shape == (200, 3)
    assert np.allclose(W.sum(axis=1), 1.0)
    # at x = 0.495 only the leftmost substencil avoids the jump
    i = np.argmin(np.abs(x - 0.495))
    assert W[i, 0] > 0.95
    assert np.allclose(W[np.abs(x - 0.5) > 0.05], [0.1, 0.6, 0.3], atol=2e-3)
    x, W = weight_probe("constant", scheme("weno5-js"))
    assert np.allclose(W, [0.1, 0.6, 0.3])
    assert set(PROBE_FUNCTIONS) == {"jump", "smooth", "constant"}
    with pytest.raises(ConfigurationError):
        weight_probe("nope", scheme("weno5-js"))

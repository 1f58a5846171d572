"""Parity checks between the compiled kernels and the NumPy fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from wmsense._kernels import (
    backend_name,
    centroid_batch,
    centroid_sums,
    sin2_centroid,
    sin2_weights,
)
from wmsense._kernels import _fallback

try:
    from wmsense._kernels import _core
except ImportError:  # pragma: no cover - source checkout without build
    _core = None

needs_compiled = pytest.mark.skipif(
    _core is None, reason="compiled extension not built"
)


@pytest.fixture()
def payload():
    rng = np.random.default_rng(42)
    lam = 750.0 + np.arange(2048) * 0.1
    tau = 2e-4
    psd = np.exp(-0.5 * ((lam - 840.0) / 22.0) ** 2) + 1e-6
    c = 0.37
    return {
        "lam": lam,
        "sin_tl": np.sin(tau * lam),
        "cos_tl": np.cos(tau * lam),
        "psd": psd,
        "cos_c": np.cos(c),
        "sin_c": np.sin(c),
        "frames": rng.poisson(2000.0, size=(64, 2048)).astype(np.float64),
    }


def test_active_backend_reports_a_known_name():
    assert backend_name() in ("compiled", "fallback")
    if _core is not None and os.environ.get("WMSENSE_PURE_PYTHON", "0") in ("", "0"):
        assert backend_name() == "compiled"


def test_env_var_forces_fallback():
    code = (
        "from wmsense._kernels import backend_name;"
        "print(backend_name())"
    )
    env = dict(os.environ, WMSENSE_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "fallback"


@needs_compiled
def test_sin2_weights_agreement(payload):
    a = _core.sin2_weights(
        payload["sin_tl"], payload["cos_tl"], payload["psd"],
        payload["cos_c"], payload["sin_c"],
    )
    b = _fallback.sin2_weights(
        payload["sin_tl"], payload["cos_tl"], payload["psd"],
        payload["cos_c"], payload["sin_c"],
    )
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=0.0)


@needs_compiled
def test_sin2_centroid_agreement(payload):
    args = (
        payload["lam"], payload["sin_tl"], payload["cos_tl"], payload["psd"],
        payload["cos_c"], payload["sin_c"],
    )
    assert _core.sin2_centroid(*args) == pytest.approx(
        _fallback.sin2_centroid(*args), rel=1e-12
    )


@pytest.mark.parametrize("impl_name", ["active", "fallback"])
def test_sin2_centroid_rejects_extinguished_spectrum(payload, impl_name):
    impl = sin2_centroid if impl_name == "active" else _fallback.sin2_centroid
    with pytest.raises(ValueError, match="not positive"):
        impl(
            payload["lam"], payload["sin_tl"], payload["cos_tl"],
            np.zeros_like(payload["psd"]), payload["cos_c"], payload["sin_c"],
        )


@needs_compiled
@pytest.mark.parametrize("clamp", [False, True])
def test_centroid_sums_agreement(payload, clamp):
    counts = payload["frames"][0] - 1500.0  # mix of signs
    na, da = _core.centroid_sums(payload["lam"], counts, clamp)
    nb, db = _fallback.centroid_sums(payload["lam"], counts, clamp)
    assert na == pytest.approx(nb, rel=1e-12)
    assert da == pytest.approx(db, rel=1e-12)


def test_centroid_sums_clamp_changes_result(payload):
    counts = np.array([10.0, -10.0, 5.0])
    lam = np.array([1.0, 2.0, 3.0])
    num, den = centroid_sums(lam, counts, False)
    assert den == pytest.approx(5.0)
    num_c, den_c = centroid_sums(lam, counts, True)
    assert den_c == pytest.approx(15.0)
    assert num_c == pytest.approx(25.0)
    assert num == pytest.approx(5.0)


@needs_compiled
@pytest.mark.parametrize("clamp", [False, True])
def test_centroid_batch_agreement(payload, clamp):
    a = _core.centroid_batch(payload["lam"], payload["frames"], 1040.0, clamp)
    b = _fallback.centroid_batch(payload["lam"], payload["frames"], 1040.0, clamp)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_centroid_batch_matches_row_sums(payload):
    got = centroid_batch(payload["lam"], payload["frames"], 1040.0, False)
    for i in (0, 17, 63):
        num, den = centroid_sums(
            payload["lam"], payload["frames"][i] - 1040.0, False
        )
        assert got[i] == pytest.approx(num / den, rel=1e-12)


@pytest.mark.parametrize("impl_name", ["active", "fallback"])
def test_centroid_batch_nan_for_dead_rows(impl_name):
    impl = centroid_batch if impl_name == "active" else _fallback.centroid_batch
    lam = np.array([1.0, 2.0, 3.0])
    frames = np.array([[4.0, 4.0, 4.0], [0.0, 0.0, 0.0], [0.0, 9.0, 0.0]])
    res = impl(lam, frames, 0.0, False)
    assert res[0] == pytest.approx(2.0)
    assert np.isnan(res[1])
    assert res[2] == pytest.approx(2.0)


def test_centroid_batch_out_aliasing(payload):
    out = np.full(payload["frames"].shape[0], -1.0)
    res = centroid_batch(payload["lam"], payload["frames"], 0.0, False, out=out)
    assert res is out
    assert not np.any(out == -1.0)


def test_sin2_weights_out_aliasing(payload):
    out = np.empty_like(payload["psd"])
    res = sin2_weights(
        payload["sin_tl"], payload["cos_tl"], payload["psd"],
        payload["cos_c"], payload["sin_c"], out=out,
    )
    assert res is out


def test_centroid_batch_leaves_input_untouched(payload):
    before = payload["frames"].copy()
    centroid_batch(payload["lam"], payload["frames"], 500.0, True)
    np.testing.assert_array_equal(payload["frames"], before)

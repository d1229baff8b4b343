import os
import sys

import numpy as np
import pytest

# When run from ctest the extension lives in the build directory and the
# package source under python/; installed wheels need neither hint.
if "QTF_MODULE_DIR" in os.environ:
    sys.path.insert(0, os.environ["QTF_MODULE_DIR"])
if "QTF_SOURCE_DIR" in os.environ:
    sys.path.insert(0, os.path.join(os.environ["QTF_SOURCE_DIR"], "python"))

import qtfcert  # noqa: E402


def ideal(d, diag=100000, off=0):
    counts = np.full((d, d), off, dtype=np.uint64)
    np.fill_diagonal(counts, diag)
    return qtfcert.JointCountMatrix(counts, "time", "time")


def test_budgets():
    b = qtfcert.measurement_budget(31)
    assert b == {
        "fst": 984064,
        "fidelity_direct": 30752,
        "two_bases": 1922,
        "this_work": 962,
    }


def test_perfect_state_certification():
    d = 7
    m = ideal(d)
    t = qtfcert.TargetState.maximally_entangled(d)
    f = qtfcert.fidelity_certify(m, m, t)
    assert f["f_tilde"] == pytest.approx(1.0, abs=1e-9)
    assert f["d_ent"] == d

    e = qtfcert.eof_certify(m, m, 1.0 / d)
    assert e["eof_lb"] == pytest.approx(np.log2(d), abs=1e-9)

    s = qtfcert.steering_certify(m, m, d)
    assert s["delta"] == pytest.approx(d, abs=1e-9)
    assert s["n_cert"] == d


def test_matrix_numpy_roundtrip(tmp_path):
    counts = np.arange(1, 10, dtype=np.uint64).reshape(3, 3)
    m = qtfcert.JointCountMatrix(counts, "time", "frequency", acquisition_seconds=2.5)
    assert m.total() == counts.sum()
    assert np.array_equal(m.counts(), counts)
    assert m.normalized() == pytest.approx(counts / counts.sum())
    assert np.array_equal(m.subspace(2, 1).counts(), counts[1:, 1:])

    path = tmp_path / "m.csv"
    m.save_csv(str(path))
    back = qtfcert.JointCountMatrix.load_csv(str(path))
    assert np.array_equal(back.counts(), counts)
    assert back.basis_b == "frequency"
    assert back.acquisition_seconds == pytest.approx(2.5)


def test_bootstrap_and_schmidt():
    d = 3
    counts = np.full((d, d), 50, dtype=np.uint64)
    np.fill_diagonal(counts, 2000)
    m = qtfcert.JointCountMatrix(counts)
    t = qtfcert.TargetState.maximally_entangled(d)

    out = qtfcert.poisson_bootstrap(m, m, t, 1.0 / d, "f_tilde", resamples=50, seed=7)
    again = qtfcert.poisson_bootstrap(m, m, t, 1.0 / d, "f_tilde", resamples=50, seed=7)
    assert out == again
    assert out["f_tilde"]["resamples"] == 50
    assert 0 < out["f_tilde"]["estimate"] < 1

    lambdas = qtfcert.schmidt_decompose(m)
    assert len(lambdas) == d
    assert sum(lambdas) == pytest.approx(1.0)
    assert qtfcert.schmidt_number_from_delta(2.7) == 3


def test_nonprime_rejected():
    m = ideal(4)
    t = qtfcert.TargetState.maximally_entangled(4)
    with pytest.raises(Exception, match="prime"):
        qtfcert.fidelity_certify(m, m, t)
    f = qtfcert.fidelity_certify(m, m, t, allow_nonprime=True)
    assert f["f_tilde"] == pytest.approx(1.0, abs=1e-9)

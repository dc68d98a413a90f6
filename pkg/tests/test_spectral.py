import math

import numpy as np
import pytest

from efgp import (
    Certificate,
    EigenvalueRecord,
    JacobiMatrix,
    OperatorSpec,
    build_jacobi,
    classify_point_spectrum,
    eigenvalues_in_window,
    eigenvector,
    errors,
    make_eigenvalue_set,
    make_potential,
    resonance_construct,
    sturm_count,
)
from efgp.prufer import SpectralParam, evolve_trajectory
from efgp.spectral import default_checkpoints

PI = math.pi


def free_jacobi(n):
    return JacobiMatrix(diagonal=np.zeros(n))


def free_eigs(n):
    return 2.0 * np.cos(np.arange(1, n + 1) * PI / (n + 1))


def test_sturm_free_n3():
    # eigenvalues are sqrt(2), 0, -sqrt(2); strictly below 0 -> one
    assert sturm_count(free_jacobi(3), 0.0) == 1
    assert sturm_count(free_jacobi(3), -2.0) == 0
    assert sturm_count(free_jacobi(3), 2.0) == 3


def test_sturm_below_gershgorin_is_zero():
    rng = np.random.default_rng(2)
    for _ in range(10):
        d = rng.uniform(-3, 3, 17)
        jac = JacobiMatrix(diagonal=d)
        assert sturm_count(jac, d.min() - 2.0 - 1e-9) == 0
        assert sturm_count(jac, d.max() + 2.0 + 1e-9) == 17


def test_sturm_matches_dense_oracle():
    p = make_potential("coulomb", c=1.0)
    jac = build_jacobi(OperatorSpec(p, PI / 2, 30))
    w = np.linalg.eigvalsh(jac.to_dense())
    for e in (-1.5, -0.3, 0.0, 0.42, 1.9):
        assert sturm_count(jac, e) == int(np.sum(w < e))


def test_window_free_n3():
    got = eigenvalues_in_window(free_jacobi(3), (-1.0, 1.0), 1e-12)
    assert got.shape == (1,)
    assert abs(got[0]) <= 1e-12


def test_window_free_n5_closed_form():
    got = eigenvalues_in_window(free_jacobi(5), (-2.0, 2.0), 1e-13)
    assert np.max(np.abs(np.sort(got) - np.sort(free_eigs(5)))) <= 1e-12


def test_window_count_consistency():
    jac = free_jacobi(40)
    got = eigenvalues_in_window(jac, (-2.0, 2.0), 1e-10)
    assert got.size == sturm_count(jac, 2.0) - sturm_count(jac, -2.0) == 40


def test_window_matches_dense_oracle():
    p = make_potential("coulomb", c=1.0)
    jac = build_jacobi(OperatorSpec(p, PI / 2, 40))
    got = eigenvalues_in_window(jac, (-2.0, 2.0), 1e-12)
    w = np.linalg.eigvalsh(jac.to_dense())
    w = w[(w > -2.0) & (w < 2.0)]
    assert got.size == w.size
    assert np.max(np.abs(np.sort(got) - w)) <= 1e-10


def test_window_tol_too_small():
    with pytest.raises(errors.TolTooSmall):
        eigenvalues_in_window(free_jacobi(5), (-2.0, 2.0), 1e-18)
    with pytest.raises(errors.ParamOutOfRange):
        eigenvalues_in_window(free_jacobi(5), (-2.0, 2.0), 0.0)


def test_interlacing_random_potentials():
    rng = np.random.default_rng(8)
    for _ in range(5):
        d = rng.uniform(-1.5, 1.5, 20)
        lam_full = eigenvalues_in_window(JacobiMatrix(d), (-4.0, 4.0), 1e-11)
        lam_sub = eigenvalues_in_window(JacobiMatrix(d[:-1]), (-4.0, 4.0), 1e-11)
        assert lam_full.size == 20 and lam_sub.size == 19
        for k in range(19):
            assert lam_full[k] <= lam_sub[k] + 1e-9
            assert lam_sub[k] <= lam_full[k + 1] + 1e-9


def test_eigenvector_free_n3():
    v = eigenvector(free_jacobi(3), 0.0)
    expect = np.array([1.0, 0.0, -1.0]) / math.sqrt(2.0)
    assert np.max(np.abs(v - expect)) <= 1e-10


def test_eigenvector_free_closed_form():
    n, k = 12, 4
    e = 2.0 * math.cos(k * PI / (n + 1))
    v = eigenvector(free_jacobi(n), e)
    expect = np.sin(np.arange(1, n + 1) * k * PI / (n + 1))
    expect /= np.linalg.norm(expect)
    diff = min(np.max(np.abs(v - expect)), np.max(np.abs(v + expect)))
    assert diff <= 1e-9


def test_eigenvector_residual_coulomb():
    p = make_potential("coulomb", c=1.0)
    jac = build_jacobi(OperatorSpec(p, PI / 2, 40))
    eigs = eigenvalues_in_window(jac, (-2.0, 2.0), 1e-12)
    norm = np.max(np.abs(jac.diagonal)) + 2.0
    for e in eigs[::7]:
        v = eigenvector(jac, e)
        assert np.linalg.norm(jac.apply(v) - e * v) <= 1e-10 * norm


def test_eigenvector_no_convergence_off_spectrum():
    with pytest.raises(errors.NoConvergence):
        eigenvector(free_jacobi(10), 5.0, max_iter=8)


def test_default_checkpoints():
    assert default_checkpoints(10 ** 6) == [100, 1000, 10 ** 4, 10 ** 5, 10 ** 6]
    assert default_checkpoints(5) == [5]
    assert default_checkpoints(100) == [100]


def test_classify_free_never_certifies():
    spec = OperatorSpec(make_potential("coulomb", c=0.0), PI / 2, 10 ** 4)
    rec = classify_point_spectrum(spec, 2.0 * math.cos(1.1))
    assert not rec.certificate.passed
    # R is constant for the free evolution, so R(N*)^2 ~ 1 > 1/N*
    assert rec.certificate.rn_sq * rec.certificate.n_star > 1.0
    assert abs(rec.decay_exponent) < 0.05
    assert rec.weight == pytest.approx(math.sin(1.1) ** 2, rel=1e-12)


def test_classify_validates_inputs():
    spec = OperatorSpec(make_potential("coulomb", c=0.0), PI / 2, 1000)
    with pytest.raises(errors.ParamOutOfRange):
        classify_point_spectrum(spec, 2.5)
    with pytest.raises(errors.ParamOutOfRange):
        classify_point_spectrum(spec, 0.0, checkpoints=[1, 10])
    with pytest.raises(errors.ParamOutOfRange):
        classify_point_spectrum(spec, 0.0, checkpoints=[2000])


def test_resonance_predicted_exponent_trivial():
    res = resonance_construct(PI / 2, 2.5, 10 ** 4)
    assert res.predicted_exponent == pytest.approx(0.625, rel=1e-12)
    assert res.E == pytest.approx(0.0, abs=1e-15)
    assert 0.0 < res.phi < PI


def test_resonance_subcritical_rejected():
    with pytest.raises(errors.SubcriticalAmplitude):
        resonance_construct(PI / 2, 1.9, 10 ** 4)


def test_resonance_certificate_on_and_off_target():
    n = 10 ** 5
    res = resonance_construct(PI / 2, 2.5, n)
    spec = OperatorSpec(res.potential, res.phi, n)
    rec = classify_point_spectrum(spec, res.E, checkpoints=[10 ** 3, 10 ** 4, n])
    assert rec.certificate.passed
    assert rec.decay_exponent > 0.5
    off = classify_point_spectrum(spec, 2.0 * math.cos(PI / 3),
                                  checkpoints=[10 ** 3, 10 ** 4, n])
    assert not off.certificate.passed


def test_certificate_monotone_in_evidence():
    # once the fitted decay rate clears 1/2 with margin, every late
    # checkpoint passes: n * R(n)^2 ~ n^(1 - 2p) is eventually < 1
    n = 10 ** 5
    res = resonance_construct(PI / 3, 2.2, n)
    assert res.fitted_exponent > 0.55
    spec = OperatorSpec(res.potential, res.phi, n)
    traj = evolve_trajectory(spec, SpectralParam.from_energy(res.E))
    ln_rel = traj.ln_R - traj.ln_R[1]
    for c in (10 ** 3, 10 ** 4, 10 ** 5):
        assert c * math.exp(2.0 * ln_rel[c]) <= 1.0


def test_eigenvalue_set_merges_duplicates():
    def rec(e, passed, margin):
        return EigenvalueRecord(
            E=e, x=None, weight=1 - e * e / 4,
            certificate=Certificate(n_star=100, rn_sq=margin / 100, passed=passed))

    a = rec(0.5, False, 2.0)
    b = rec(0.5 + 1e-10, True, 0.5)
    c = rec(0.9, False, 3.0)
    eset = make_eigenvalue_set([c, a, b], tolerance=1e-8)
    assert len(eset.records) == 2
    assert eset.records[0].certificate.passed  # kept the better certificate
    es = [r.E for r in eset.records]
    assert es == sorted(es)
    assert all(abs(es[i + 1] - es[i]) > 1e-8 for i in range(len(es) - 1))

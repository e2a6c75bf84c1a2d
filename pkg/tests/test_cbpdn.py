import numpy as np
import pytest
from hypothesis import given, strategies as st

from rbadmm import BpdnProblem, CbpdnProblem, ConfigurationError, PenaltyConfig, StoppingConfig, run
from rbadmm.cbpdn import gradient_spectrum, highpass_preprocess, pad_filters, random_filters

from oracles import circular_conv2d


def _instance(seed, H=8, W=8, M=4, L=3, K=1, lmbda=0.1):
    rng = np.random.default_rng(seed)
    imgs = rng.standard_normal((K, H, W))
    return CbpdnProblem(random_filters(M, L, seed), imgs, lmbda), rng


def test_convolution_convention():
    p, rng = _instance(0)
    x = rng.standard_normal(p.x_shape)
    direct = sum(circular_conv2d(p.filters[m], x[0, m]) for m in range(4))
    np.testing.assert_allclose(p.reconstruct(x)[0], direct, rtol=0, atol=1e-10 * np.abs(direct).max())


@pytest.mark.parametrize("rho", [1e-2, 1.0, 50.0])
def test_solve_freq_dense_oracle(rho):
    p, rng = _instance(1)
    bf = np.fft.rfft2(rng.standard_normal(p.x_shape))
    xf = p.solve_freq(bf, rho)
    Df = p.Df
    worst = 0.0
    for i in range(Df.shape[1]):
        for j in range(Df.shape[2]):
            d = Df[:, i, j]
            Amat = np.outer(np.conj(d), d) + rho * np.eye(len(d))
            ref = np.linalg.solve(Amat, bf[0, :, i, j])
            worst = max(worst, np.linalg.norm(xf[0, :, i, j] - ref) / np.linalg.norm(ref))
            res = np.linalg.norm(Amat @ xf[0, :, i, j] - bf[0, :, i, j]) / np.linalg.norm(bf[0, :, i, j])
            assert res <= 1e-10
    assert worst <= 1e-10


def test_single_delta_filter():
    rng = np.random.default_rng(2)
    d = np.zeros((1, 2, 2))
    d[0, 0, 0] = 1.0
    p = CbpdnProblem(d, rng.standard_normal((8, 8)), 0.1)
    np.testing.assert_allclose(np.abs(p.Df), 1.0)
    bf = np.fft.rfft2(rng.standard_normal(p.x_shape))
    np.testing.assert_allclose(p.solve_freq(bf, 1.0), bf / 2.0, rtol=1e-14)


def test_joint_images_decouple():
    rng = np.random.default_rng(3)
    d = random_filters(3, 3, 3)
    imgs = rng.standard_normal((2, 8, 8))
    joint = CbpdnProblem(d, imgs, 0.2)
    z, u = rng.standard_normal(joint.x_shape), rng.standard_normal(joint.x_shape)
    x = joint.solve_x(z, u, 0.7)
    for k in range(2):
        sep = CbpdnProblem(d, imgs[k], 0.2)
        np.testing.assert_allclose(x[k], sep.solve_x(z[k:k + 1], u[k:k + 1], 0.7)[0], rtol=1e-12, atol=1e-12)


def test_solve_x_is_least_squares_minimiser():
    p, rng = _instance(4)
    z, u = rng.standard_normal(p.x_shape), rng.standard_normal(p.x_shape)
    x = p.solve_x(z, u, 2.0)
    # gradient of (1/2)||Dx - s||^2 + (rho/2)||x - z + u||^2 vanishes
    Dmat = p.dense_dictionary()
    g = Dmat.T @ (Dmat @ x[0].ravel() - p.sigma[0].ravel()) + 2.0 * (x - z + u)[0].ravel()
    assert np.linalg.norm(g) <= 1e-10 * np.linalg.norm(Dmat.T @ p.sigma[0].ravel())


def test_soft_threshold_z_update():
    p, _ = _instance(5, lmbda=0.5)
    v = np.zeros(p.x_shape)
    v[0, 0, 0, 0], v[0, 1, 2, 3] = 1.0, 0.4
    z = p.solve_z(v, np.zeros_like(v), 1.0)
    assert z[0, 0, 0, 0] == 0.5 and np.count_nonzero(z) == 1


@given(st.integers(0, 10_000))
def test_parseval(seed):
    p, rng = _instance(seed, K=2)
    x = rng.standard_normal(p.x_shape)
    assert p.data_fidelity_freq(x) == pytest.approx(p.f(x), rel=1e-10)


def test_dense_dictionary_matches_reconstruct():
    p, rng = _instance(6, M=2, L=2, H=4, W=4)
    x = rng.standard_normal(p.x_shape)
    np.testing.assert_allclose(p.dense_dictionary() @ x[0].ravel(), p.reconstruct(x)[0].ravel(), atol=1e-12)


def test_block_circulant_equivalence():
    p, _ = _instance(7, M=2, L=2, H=4, W=4, lmbda=0.05)
    q = BpdnProblem(p.dense_dictionary(), p.sigma[0].ravel(), p.lmbda)
    stop = StoppingConfig(eps_rel=1e-9, max_iter=20_000)
    pen = PenaltyConfig(period=1, tau_mode="adaptive")
    a, b = run(p, penalty=pen, stop=stop), run(q, penalty=pen, stop=stop)
    assert a.converged and b.converged
    fa = p.f(a.state.z) + p.g(a.state.z)
    fb = q.bpdn_objective(b.state.z)
    assert fa == pytest.approx(fb, rel=1e-7)


def test_iterates_real_and_finite():
    p, _ = _instance(8, H=16, W=12, K=2)
    tr = run(p, penalty=PenaltyConfig(period=1), stop=StoppingConfig(max_iter=30))
    assert tr.state.x.dtype == float and np.all(np.isfinite(tr.state.x))


def test_pad_filters():
    d = np.arange(4.0).reshape(2, 2)
    pd = pad_filters(d, (3, 4))
    assert pd.shape == (1, 3, 4) and pd[0, 1, 1] == 3.0 and pd.sum() == 6.0
    with pytest.raises(ConfigurationError):
        pad_filters(np.ones((1, 5, 5)), (4, 4))


def test_random_filters():
    d = random_filters(5, 4, seed=0)
    np.testing.assert_allclose(d.mean(axis=(1, 2)), 0, atol=1e-15)
    np.testing.assert_allclose(np.linalg.norm(d.reshape(5, -1), axis=1), 1)
    np.testing.assert_array_equal(d, random_filters(5, 4, seed=0))


def test_constructor_validation():
    with pytest.raises(ConfigurationError):
        CbpdnProblem(np.ones((1, 2, 2)), np.ones((2, 2, 2, 2)), 0.1)
    with pytest.raises(ConfigurationError):
        CbpdnProblem(np.ones((1, 2, 2)), np.ones((4, 4)), 0.0)
    p, _ = _instance(0)
    with pytest.raises(ConfigurationError):
        p.solve_freq(np.zeros((1, 4, 8, 5)), 0.0)


def test_highpass_no_regularisation():
    img = np.random.default_rng(0).random((6, 7))
    low, high = highpass_preprocess(img, 0.0)
    np.testing.assert_array_equal(low, img)
    np.testing.assert_array_equal(high, 0)


def test_highpass_constant_image():
    img = np.full((8, 8), 0.3)
    low, high = highpass_preprocess(img, 5.0)
    np.testing.assert_allclose(low, img, atol=1e-15)
    np.testing.assert_allclose(high, 0, atol=1e-15)


@given(st.integers(0, 10_000), st.floats(0.01, 20))
def test_highpass_sums_to_image(seed, lambda_L):
    img = np.random.default_rng(seed).random((2, 9, 10))
    low, high = highpass_preprocess(img, lambda_L)
    np.testing.assert_allclose(low + high, img, rtol=0, atol=1e-15)


def test_highpass_lowpass_is_tikhonov_minimiser():
    # gradient of (1/2)||x - s||^2 + lambda_L ||grad x||^2 vanishes at x = lowpass
    rng = np.random.default_rng(1)
    img = rng.random((7, 9))
    lam = 5.0
    low, _ = highpass_preprocess(img, lam)

    def grad_sq(x):
        return np.sum((np.roll(x, -1, 0) - x) ** 2 + (np.roll(x, -1, 1) - x) ** 2)

    def obj(x):
        return 0.5 * np.sum((x - img) ** 2) + lam * grad_sq(x)

    eps = 1e-6
    g = np.zeros_like(low)
    for idx in np.ndindex(low.shape):
        e = np.zeros_like(low)
        e[idx] = eps
        g[idx] = (obj(low + e) - obj(low - e)) / (2 * eps)
    assert np.abs(g).max() < 1e-7
    # and it beats random perturbations
    for _ in range(5):
        assert obj(low) < obj(low + 1e-3 * rng.standard_normal(low.shape))


def test_gradient_spectrum():
    G = gradient_spectrum((4, 6))
    assert G[0, 0] == 0
    assert G[2, 0] == pytest.approx(4.0)
    assert G[2, 3] == pytest.approx(8.0)

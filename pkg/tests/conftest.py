import numpy as np
import pytest
from hypothesis import settings

from stlab.spaces import reduce
from stlab.splines import Mesh, make_maximal_space

settings.register_profile("stlab", max_examples=40, deadline=None)
settings.load_profile("stlab")


def pair(degree, nel, T=10.0):
    """Trial and test spaces on a uniform mesh."""
    s = make_maximal_space(Mesh.uniform(T, nel), degree)
    return reduce(s, "trial"), reduce(s, "test")


def random_mesh(rng, nel, T=2.0):
    # Element lengths bounded away from zero so the spaces stay well conditioned.
    lengths = rng.uniform(0.5, 1.5, nel)
    return Mesh(np.concatenate([[0.0], np.cumsum(lengths) * T / lengths.sum()]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def brute_beta(a, h1, h2, starts=8, seed=0):
    """Inf-sup constant by two independent dense routes.

    Returns ``(svd_value, rayleigh_value)``: singular values of
    ``H2^{-1/2} A H1^{-1/2}`` from symmetric eigendecompositions, and a
    multi-start minimization of the Rayleigh quotient ``|Ax|_{H2^-1} / |x|_{H1}``.
    """
    from scipy.optimize import minimize

    def inv_sqrt(h):
        w, v = np.linalg.eigh(h)
        return (v / np.sqrt(w)) @ v.T

    b = inv_sqrt(h2) @ a @ inv_sqrt(h1)
    s = np.linalg.svd(b, compute_uv=False)[-1]
    k = a.T @ np.linalg.solve(h2, a)

    def quot(x):
        d = x @ h1 @ x
        q = (x @ k @ x) / d
        return q, 2.0 * (k @ x - q * (h1 @ x)) / d

    g = np.random.default_rng(seed)
    best = np.inf
    for x0 in [g.normal(size=a.shape[1]) for _ in range(starts)]:
        for _ in range(3):
            # restarts reset the BFGS curvature estimate
            r = minimize(quot, x0, jac=True, method="BFGS", options={"gtol": 1e-15})
            x0 = r.x / np.linalg.norm(r.x)
        if r.fun < best:
            best = r.fun
    return float(s), float(np.sqrt(best))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

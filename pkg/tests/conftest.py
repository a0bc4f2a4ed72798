import numpy as np
import pytest

from shadowlab import make_system
from shadowlab.orbits import generate_noisy, saddle_crossing
from shadowlab.subspace import oblique_matrix

DOUBLE_WELL = {"dimension": 2, "h": 0.5, "bend": 0.5, "tol": 1e-11}
CROSSING_WINDOW = 64

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture(scope="session")
def double_well():
    return make_system("double_well_gradient", DOUBLE_WELL)


@pytest.fixture(scope="session")
def crossing(double_well):
    return saddle_crossing(double_well, CROSSING_WINDOW)


@pytest.fixture(scope="session")
def noisy_crossing(double_well, crossing):
    return generate_noisy(double_well, crossing, 1e-6, seed=0)


def newton_shadow(F, orbit, frame, max_iter=30):
    """Dense Newton solve of the stacked system for corrections v_k.

    Unknowns v_0..v_K; equations F(z_k + v_k) - z_{k+1} - v_{k+1} = 0 plus
    the free-boundary conditions: no stable component in v_0 and no unstable
    component in v_K, both measured in the frame's splittings.
    """
    Z = orbit.states
    K, n = Z.shape
    P0 = oblique_matrix(frame.stable[0], frame.unstable[0])
    PK = oblique_matrix(frame.stable[-1], frame.unstable[-1])
    left = frame.stable[0].basis.T @ P0
    right = frame.unstable[-1].basis.T @ (np.eye(n) - PK)
    v = np.zeros_like(Z)
    for _ in range(max_iter):
        rows = [F.evaluate(Z[k] + v[k]) - Z[k + 1] - v[k + 1] for k in range(K - 1)]
        r = np.concatenate(rows + [left @ v[0], right @ v[-1]])
        J = np.zeros((K * n, K * n))
        for k in range(K - 1):
            J[k * n:(k + 1) * n, k * n:(k + 1) * n] = F.jacobian(Z[k] + v[k])
            J[k * n:(k + 1) * n, (k + 1) * n:(k + 2) * n] = -np.eye(n)
        J[(K - 1) * n:(K - 1) * n + left.shape[0], :n] = left
        J[(K - 1) * n + left.shape[0]:, (K - 1) * n:] = right
        step = np.linalg.solve(J, -r).reshape(K, n)
        v = v + step
        if np.max(np.abs(step)) < 1e-16 * (1.0 + np.max(np.abs(Z))):
            break
    return v

import numpy as np
import pytest

from maofdm.channel import PathGeometry, TapCluster, WidebandChannel


def random_tap(rng, n_paths):
    paths = [
        PathGeometry(
            float(np.arcsin(rng.uniform(-1, 1))),
            float(rng.uniform(-np.pi, np.pi)),
            float(np.arcsin(rng.uniform(-1, 1))),
            float(rng.uniform(-np.pi, np.pi)),
        )
        for _ in range(n_paths)
    ]
    coeffs = rng.normal(size=n_paths) + 1j * rng.normal(size=n_paths)
    return TapCluster(paths, coeffs)


def random_channel(rng, T=3, L=4):
    return WidebandChannel(tuple(random_tap(rng, L) for _ in range(T)))


def single_path_channel(coeff=1.0, angles=(0.3, 1.1, -0.2, 2.0)):
    return WidebandChannel((TapCluster([PathGeometry(*angles)], [coeff]),))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, passed: bool, detail: str) -> None:
    """Record and print one acceptance line; shown again in the terminal summary."""
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

import numpy as np
import pytest

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str, warn_only: bool = False) -> None:
    status = "PASS" if ok else ("WARN" if warn_only else "FAIL")
    line = f"criterion {criterion:>2}: {status}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def i5_setup():
    from subspace_selftest.bell import i5
    from subspace_selftest.stabilizer import code_projector, five_qubit_code

    return i5(), np.real(code_projector(five_qubit_code()))


@pytest.fixture(scope="session")
def i5_certificate(i5_setup):
    # the full slope search takes ~30 s; share it across modules
    from subspace_selftest.bounds import I5_QUANTUM
    from subspace_selftest.robustness import find_certificate

    expr, P = i5_setup
    return find_certificate(expr, P, I5_QUANTUM)

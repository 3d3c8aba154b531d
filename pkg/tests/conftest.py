import functools

import mpmath
import numpy as np
import pytest

# criterion number -> list of (part label, passed, detail)
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@functools.lru_cache(maxsize=None)
def e_expansion(n_bits: int = 1_000_000) -> np.ndarray:
    """First n bits of e in binary, integer part included ("10.1011...")."""
    with mpmath.workprec(n_bits + 64):
        value = int(mpmath.floor(mpmath.e * mpmath.mpf(2) ** (n_bits - 2)))
    text = bin(value)[2:]
    assert len(text) == n_bits
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


@pytest.fixture(scope="session")
def e_bits():
    return e_expansion()


def record(criterion: int, part: str, passed: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))
    print(f"criterion {criterion} [{part}] {'PASS' if passed else 'FAIL'}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[criterion]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{label}: {'ok' if ok else 'FAILED'} ({d})" for label, ok, d in parts)
        terminalreporter.write_line(f"criterion {criterion}: {verdict} | {detail}")

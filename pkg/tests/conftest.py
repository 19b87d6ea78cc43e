"""Shared fixtures: the full scenario matrix and the acceptance summary.

The matrix fixture runs every combination of dimension, constraint mode,
speed, initial amplitude and resolution once per session; the acceptance
tests read it from several angles (h-convexity, enclosure bounds, support
bound, convergence, decay rates).  Building it takes tens of minutes of
single-core time; progress goes to /tmp/hcflow_matrix_progress.log.
"""

import time
from dataclasses import dataclass

import pytest

from hcflow.diag import fit_decay
from hcflow.flow import FlowAbort, FlowConfig, run_flow
from hcflow.hypmath import SpaceParams
from hcflow.surface import perturbed_graph

MATRIX_DIMS = (1, 2)
MATRIX_MODES = ("volume", "area")
MATRIX_SPEEDS = ("H", "H^2", "H^0.5", "log(1+H)+H", "exp(H)")
MATRIX_AMPS = (0.03, 0.06, 0.10)
MATRIX_NS = (128, 256)
MATRIX_R = 1.2
MATRIX_MODE_NUMBER = 2          # cos(2 theta) perturbation

# record cadence per (dimension, N): keeps diagnostics cost in line with the
# step cost while leaving hundreds of records for the tail fits
CADENCE = {(1, 128): 10, (1, 256): 20, (2, 128): 100, (2, 256): 400}

PROGRESS_LOG = "/tmp/hcflow_matrix_progress.log"


@dataclass
class MatrixRun:
    """One matrix entry: flow result plus tail fits and bookkeeping."""

    n: int
    constraint: str
    speed: str
    amplitude: float
    N: int
    result: object = None       # FlowResult (partial if the run aborted)
    fit_sup: object = None      # DecayFit of sup |phi - h|
    fit_f: object = None        # DecayFit of max f (n = 2 only)
    wall: float = 0.0
    error: str = ""

    @property
    def key(self):
        return (self.n, self.constraint, self.speed, self.amplitude, self.N)

    def label(self) -> str:
        return (f"n={self.n} {self.constraint} {self.speed} "
                f"amp={self.amplitude} N={self.N}")


def _run_matrix_entry(n, constraint, speed, amp, N) -> MatrixRun:
    run = MatrixRun(n=n, constraint=constraint, speed=speed, amplitude=amp, N=N)
    g = perturbed_graph(SpaceParams(1.0, n), N, MATRIX_R, MATRIX_MODE_NUMBER, amp)
    cfg = FlowConfig(speed=speed, constraint=constraint, t_end=200.0,
                     stop_eps=1e-8, record_every=CADENCE[(n, N)])
    t0 = time.perf_counter()
    try:
        run.result = run_flow(g, cfg)
    except FlowAbort as e:
        run.result = e.partial
        run.error = f"aborted: {e.reason}"
        run.wall = time.perf_counter() - t0
        return run
    run.wall = time.perf_counter() - t0

    records = run.result.records
    try:
        run.fit_sup = fit_decay([r.t for r in records],
                                [r.sup_phi_minus_h for r in records])
    except ValueError as e:
        run.error = f"sup fit failed: {e}"
    if n == 2:
        try:
            run.fit_f = fit_decay([r.t for r in records],
                                  [r.f_max for r in records])
        except ValueError as e:
            run.error = (run.error + "; " if run.error else "") + f"f fit failed: {e}"
    return run


@pytest.fixture(scope="session")
def matrix():
    """All 120 matrix runs keyed by (n, constraint, speed, amplitude, N)."""
    combos = [(n, mode, speed, amp, N)
              for n in MATRIX_DIMS
              for mode in MATRIX_MODES
              for speed in MATRIX_SPEEDS
              for amp in MATRIX_AMPS
              for N in MATRIX_NS]
    runs = {}
    with open(PROGRESS_LOG, "w") as log:
        for i, combo in enumerate(combos):
            run = _run_matrix_entry(*combo)
            runs[run.key] = run
            status = run.error or run.result.stop_reason
            log.write(f"[{i + 1:3d}/{len(combos)}] {run.label():<42} "
                      f"{status:<10} steps={run.result.monitors.steps:<8} "
                      f"wall={run.wall:6.1f}s\n")
            log.flush()
    return runs


# ---------------------------------------------------------------------------
# acceptance reporting


_ACCEPTANCE: dict = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for a numbered criterion, then assert it."""

    def report(num: int, ok: bool, detail: str):
        _ACCEPTANCE[num] = (bool(ok), detail)
        assert ok, f"criterion {num}: {detail}"

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[num]
        mark = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {num:2d}: {mark} - {detail}")

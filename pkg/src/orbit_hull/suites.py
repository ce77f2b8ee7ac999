"""Seeded acceptance suites.

Each suite draws its instances from ``numpy.random.default_rng(seed)`` and reports how
many instances ran, which failed and the smallest slack (bound minus observed value)
seen. Reports hold no timing data, so a replay with the same seed is identical.
"""
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from .averaging import absorb_witness, corner_replace_witness, cyclic_shift_witness
from .birkhoff import decompose, evaluate
from .correction import correct_ds, corrected_channel
from .cpmaps import FunctionChannel, apply, channel_from_ds, check_channel, ds_from_channel
from .errors import OrbitHullError, ParameterError
from .hull import membership, mutual_membership
from .logger import get_logger
from .majorization import is_majorized, perm_hull_oracle, real_majorization
from .measures import check_condition4, check_condition5
from .sampling import random_complex_tuple, random_doubly_stochastic, random_normal, random_unitary
from .spectra import DiscreteMeasure, NormalMatrix, operator_norm

# Get the logger
logger = get_logger()

MEMBERSHIP_TOL = 1e-7


class SuiteReport(BaseModel):
    name: str
    seed: int
    instances: int
    failures: int
    worst_slack: Optional[float] = Field(default=None, description="Smallest bound-minus-observed margin.")
    messages: List[str] = Field(default_factory=list, description="One line per failed instance.")

    @property
    def passed(self) -> bool:
        return self.failures == 0


class _Tally:
    def __init__(self):
        self.instances = 0
        self.messages: List[str] = []
        self.worst: Optional[float] = None

    def slack(self, value: float) -> None:
        self.worst = value if self.worst is None else min(self.worst, value)

    def fail(self, index: int, message: str) -> None:
        self.messages.append(f"#{index}: {message}")


SuiteRunner = Callable[[np.random.Generator, int, _Tally], None]


def _majorization(rng: np.random.Generator, count: int, tally: _Tally) -> None:
    for index in range(count):
        n = int(rng.integers(2, 6))
        real = index % 4 >= 2
        mu = rng.standard_normal(n) if real else random_complex_tuple(n, rng)
        lam = random_doubly_stochastic(n, rng).d @ mu
        if index % 2:
            drift = rng.standard_normal(n) if real else random_complex_tuple(n, rng)
            lam = lam + 0.3 * (drift - drift.mean())
        certificate = is_majorized(lam, mu, MEMBERSHIP_TOL)
        feasible = certificate.verdict == "feasible"
        oracle = perm_hull_oracle(lam, mu, MEMBERSHIP_TOL)
        tally.instances += 1
        if feasible != oracle:
            tally.fail(index, f"n={n}: LP says {certificate.verdict}, oracle says {oracle}")
        elif feasible:
            tally.slack(MEMBERSHIP_TOL - certificate.residual)
        else:
            tally.slack(certificate.separator.gap)
        if real and feasible != real_majorization(lam.real, mu.real):
            tally.fail(index, f"n={n}: LP disagrees with the partial-sum test")


def _birkhoff(rng: np.random.Generator, count: int, tally: _Tally) -> None:
    for index in range(count):
        n = int(rng.integers(1, 13))
        limit = n * n - 2 * n + 2
        d = random_doubly_stochastic(n, rng, int(rng.integers(1, limit + 1)))
        combination = decompose(d)
        error = float(np.abs(evaluate(combination, n).d - d.d).max())
        tally.instances += 1
        tally.slack(1e-10 - error)
        if error > 1e-10 or len(combination.terms) > limit:
            tally.fail(index, f"n={n}: error {error:.3e} with {len(combination.terms)} terms")


def _cyclic_shift(rng: np.random.Generator, count: int, tally: _Tally) -> None:
    for K in range(2, 11):
        for index in range(count):
            a = random_normal(int(rng.integers(1, 5)), rng)
            witness = cyclic_shift_witness(a, K)
            gap = abs(witness.achieved - operator_norm(a) / K)
            tally.instances += 1
            tally.slack(1e-12 - gap)
            if gap > 1e-12:
                tally.fail(index, f"K={K}: achieved differs from ||a||/K by {gap:.3e}")


def _absorb_corner(rng: np.random.Generator, count: int, tally: _Tally) -> None:
    for index in range(count):
        K = int(rng.integers(1, 7))
        y_small = random_normal(int(rng.integers(1, 4)), rng)
        y_big = random_normal(int(rng.integers(1, 5)), rng)
        witness = absorb_witness(y_small, y_big, K)
        bound = operator_norm(y_small) / (K + 1)
        tally.instances += 1
        tally.slack(bound - witness.achieved)
        if witness.achieved > bound + 1e-9:
            tally.fail(index, f"K={K}: achieved {witness.achieved:.3e} over {bound:.3e}")


def _corner_replace(rng: np.random.Generator, count: int, tally: _Tally) -> None:
    for index in range(count):
        K = int(rng.integers(2, 5))
        r = int(rng.integers(1, 3))
        distinct = int(rng.integers(1, 4))
        spectrum = np.repeat(random_complex_tuple(distinct, rng), (K + 2) * r)
        x = random_normal(spectrum.size, rng, spectrum)
        y_small = random_normal(r, rng)
        witness = corner_replace_witness(x, y_small, K)
        bound = (operator_norm(y_small) + 3 * operator_norm(x)) / K
        tally.instances += 1
        tally.slack(bound - witness.achieved)
        if witness.achieved > bound + 1e-9:
            tally.fail(index, f"K={K}: achieved {witness.achieved:.3e} over {bound:.3e}")
        chained = witness.ledger["absorb_stage"] + witness.ledger["cyclic_stage"]
        if witness.achieved > chained + 1e-10:
            tally.fail(index, f"K={K}: composed error {witness.achieved:.3e} over stage sum {chained:.3e}")


def _measure_and_prepare(s: np.ndarray, fx: np.ndarray, fy: np.ndarray) -> FunctionChannel:
    """a -> Fx diag(S diag(Fy* a Fy)) Fx*; unital when S has unit row sums."""
    def action(a: np.ndarray) -> np.ndarray:
        return fx @ np.diag(s @ np.diag(fy.conj().T @ a @ fy)) @ fx.conj().T

    return FunctionChannel(dim=s.shape[0], action=action)


def _correction(rng: np.random.Generator, count: int, tally: _Tally) -> None:
    for index in range(count):
        n = int(rng.integers(2, 9))
        mu = random_complex_tuple(n, rng)
        fy, fx = random_unitary(n, rng), random_unitary(n, rng)
        base = 0.5 * random_doubly_stochastic(n, rng).d + 0.5 / n
        defects = 0.2 * rng.random(n)
        defects -= defects.mean()
        s = base + defects[None, :] / n
        lam = s @ mu + 1e-3 * random_complex_tuple(n, rng)
        y = fy @ np.diag(mu) @ fy.conj().T
        x = fx @ np.diag(lam) @ fx.conj().T

        report = corrected_channel(NormalMatrix.from_array(x), NormalMatrix.from_array(y), _measure_and_prepare(s, fx, fy))
        bound = 2 * report.eps2 * operator_norm(y) + 3 * report.eps1
        tally.instances += 1
        tally.slack(bound - report.achieved)
        if report.achieved > bound + 1e-8:
            tally.fail(index, f"n={n}: achieved {report.achieved:.3e} over {bound:.3e}")

        ds = random_doubly_stochastic(n, rng).d
        unchanged = float(np.abs(correct_ds(ds, 0.0).d_corrected.d - ds).max())
        if unchanged > 1e-12:
            tally.fail(index, f"n={n}: zero-defect input moved by {unchanged:.3e}")


def _witness(rng: np.random.Generator, count: int, tally: _Tally) -> None:
    for index in range(count):
        n = int(rng.integers(1, 17))
        mu = random_complex_tuple(n, rng)
        frame = random_unitary(n, rng)
        y = frame @ np.diag(mu) @ frame.conj().T
        x = apply(channel_from_ds(random_doubly_stochastic(n, rng, min(n, 4)), frame), y)
        result = membership(x, y, MEMBERSHIP_TOL)
        tally.instances += 1
        if result.verdict != "member":
            tally.fail(index, f"n={n}: constructed member reported as non-member")
            continue
        achieved = operator_norm(x - apply(result.witness, y))
        tally.slack(MEMBERSHIP_TOL - achieved)
        if achieved > MEMBERSHIP_TOL or not check_channel(result.witness, test_matrices=[y]).trace_preserving:
            tally.fail(index, f"n={n}: re-verified error {achieved:.3e}")


def _horn(rng: np.random.Generator, count: int, tally: _Tally) -> None:
    for index in range(count):
        n = int(rng.integers(2, 7))
        mu = random_complex_tuple(n, rng)
        d = random_doubly_stochastic(n, rng)
        extracted = ds_from_channel(channel_from_ds(d), mu)
        error = float(np.abs(extracted.d - d.d).max())
        tally.instances += 1
        tally.slack(1e-10 - error)
        if error > 1e-10:
            tally.fail(index, f"n={n}: round trip error {error:.3e}")


def _mutual_pair(rng: np.random.Generator, index: int) -> Tuple[np.ndarray, np.ndarray]:
    n = int(rng.integers(1, 5))
    values = random_complex_tuple(int(rng.integers(1, n + 1)), rng)
    mu = values[rng.integers(0, values.size, size=n)]
    y = random_normal(n, rng, mu)
    kind = index % 3
    if kind == 0:
        return random_normal(n, rng, rng.permutation(mu)), y
    if kind == 1:
        return random_normal(n, rng, random_doubly_stochastic(n, rng, 2).d @ mu), y
    return random_normal(n, rng, values[rng.integers(0, values.size, size=n)]), y


def _mutual(rng: np.random.Generator, count: int, tally: _Tally) -> None:
    for index in range(count):
        x, y = _mutual_pair(rng, index)
        report = mutual_membership(x, y, MEMBERSHIP_TOL, oracle=True)
        tally.instances += 1
        if not report.consistent:
            tally.fail(
                index,
                f"x<y {report.xy}, y<x {report.yx}, spectral measures equal {report.measures_equal}",
            )
        elif report.oracle_xy != (report.xy == "member") or report.oracle_yx != (report.yx == "member"):
            tally.fail(
                index,
                f"oracle says x<y {report.oracle_xy}, y<x {report.oracle_yx}; LP says {report.xy}, {report.yx}",
            )


def _random_measure(rng: np.random.Generator, size: int, support: Optional[np.ndarray] = None) -> DiscreteMeasure:
    if support is None:
        support = random_complex_tuple(size, rng)
    return DiscreteMeasure(support=support, weights=rng.dirichlet(np.ones(support.size)))


def _measures(rng: np.random.Generator, count: int, tally: _Tally) -> None:
    for index in range(count):
        mx = _random_measure(rng, int(rng.integers(1, 11)))
        if index % 2:
            my = _random_measure(rng, int(rng.integers(1, 11)))
        else:
            my = _random_measure(rng, 0, mx.support + 0.05 * random_complex_tuple(mx.support.size, rng))
        eps = float(0.3 * rng.random())
        degree = int(rng.integers(1, 4))
        first = check_condition4(mx, my, eps, degree)
        second = check_condition5(mx, my, eps, degree)
        tally.instances += 1
        if first.feasible != second.feasible:
            tally.fail(index, f"degree={degree}, eps={eps:.3f}: kernel {first.feasible}, measure map {second.feasible}")


SUITES: Dict[str, Tuple[SuiteRunner, int]] = {
    "majorization": (_majorization, 500),
    "birkhoff": (_birkhoff, 1000),
    "cyclic-shift": (_cyclic_shift, 50),
    "absorb": (_absorb_corner, 200),
    "corner-replace": (_corner_replace, 200),
    "correction": (_correction, 200),
    "witness": (_witness, 100),
    "horn": (_horn, 200),
    "mutual": (_mutual, 300),
    "measures": (_measures, 200),
}


def run_suite(name: str, seed: int, count: Optional[int] = None) -> SuiteReport:
    """Runs one suite; ``count`` overrides its default number of instances."""
    if name not in SUITES:
        raise ParameterError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    runner, default = SUITES[name]
    if count is None:
        count = default
    if count < 1:
        raise ParameterError(f"count must be positive, got {count}")

    logger.info(f"--- Suite: {name} (seed={seed}, count={count}) ---")
    rng = np.random.default_rng(seed)
    tally = _Tally()
    try:
        runner(rng, count, tally)
    except (OrbitHullError, ValidationError) as e:
        logger.error(f"Suite {name} aborted at instance {tally.instances}: {e}")
        tally.fail(tally.instances, f"{type(e).__name__}: {e}")
        tally.instances += 1
    report = SuiteReport(
        name=name,
        seed=seed,
        instances=tally.instances,
        failures=len(tally.messages),
        worst_slack=tally.worst,
        messages=tally.messages,
    )
    if report.failures:
        logger.error(f"Suite {name}: {report.failures} of {report.instances} instances failed")
    else:
        logger.info(f"Suite {name}: {report.instances} instances passed, worst slack {tally.worst}")
    return report

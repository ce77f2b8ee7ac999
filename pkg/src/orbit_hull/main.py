"""Command-line front end: JSON in, one JSON report out.

Exit codes: 0 for an affirmative verdict, 1 for a negative verdict backed by a
certificate, 2 for unreadable input or a violated precondition.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple, Type, TypeVar

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from .averaging import absorb_estimate, absorb_witness, corner_replace_witness, cyclic_shift_witness
from .birkhoff import decompose
from .config import get_settings
from .correction import correct_ds
from .cpmaps import check_channel
from .errors import OrbitHullError
from .hull import distance_bound, membership, mutual_membership
from .logger import get_logger
from .measures import check_condition4, check_condition5
from .schemas import (
    AbsorbInput,
    AverageInput,
    ChannelPayload,
    CorrectInput,
    MatrixPayload,
    MeasuresInput,
    StochasticPayload,
    TransportInput,
    channel_json,
    combination_json,
    correction_json,
    matrix_json,
    plan_json,
    report,
    separator_json,
    transfer_json,
    witness_json,
)
from .spectra import check_normality, operator_norm
from .suites import SUITES, run_suite
from .transport import riesz_interpolate

# Get the logger
logger = get_logger()

Command = Literal[
    "check-normal",
    "member",
    "mutual",
    "distance",
    "birkhoff",
    "correct",
    "average",
    "absorb",
    "transport",
    "measures",
    "verify",
    "suite",
]

Model = TypeVar("Model", bound=BaseModel)


class InputError(Exception):
    """An input file is missing, is not JSON, or does not match its schema."""


class RunConfig(BaseModel):
    command: Command
    inputs: Dict[str, str] = Field(default_factory=dict, description="Input name to file path.")
    tol: float = Field(gt=0)
    seed: int = Field(ge=0)
    exact: bool = False
    degree: int = Field(default=3, ge=1)
    K: int = Field(default=4, ge=1)
    out: Optional[str] = None
    name: Optional[str] = None
    count: Optional[int] = Field(default=None, ge=1)
    oracle: bool = False


def _location(loc: Sequence[Any]) -> str:
    return "".join(f"[{part}]" if isinstance(part, int) else f".{part}" for part in loc).lstrip(".") or "<root>"


def load_input(path: str, model: Type[Model]) -> Model:
    """Reads ``path`` and validates it against ``model``; failures name the file and JSON location."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"{path}: cannot read file ({e.strerror})") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}:{e.lineno}:{e.colno}: malformed JSON ({e.msg})") from e
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise InputError(f"{path}: at {_location(first['loc'])}: {first['msg']}") from e


def _require(config: RunConfig, *names: str) -> List[str]:
    missing = [name for name in names if name not in config.inputs]
    if missing:
        raise InputError(f"{config.command} needs --{' --'.join(missing)}")
    return [config.inputs[name] for name in names]


def _matrix(config: RunConfig, name: str) -> np.ndarray:
    (path,) = _require(config, name)
    return load_input(path, MatrixPayload).to_array()


Outcome = Tuple[int, Dict[str, Any]]


def run_check_normal(config: RunConfig) -> Outcome:
    result = check_normality(_matrix(config, "x"))
    return (0 if result.passed else 1), report("check-normal", **result.model_dump())


def run_member(config: RunConfig) -> Outcome:
    x, y = _matrix(config, "x"), _matrix(config, "y")
    result = membership(x, y, config.tol, exact=config.exact)
    fields: Dict[str, Any] = {"verdict": result.verdict, "tol": config.tol, "x": matrix_json(x), "y": matrix_json(y)}
    if result.verdict == "member":
        fields.update(witness=channel_json(result.witness), achieved=result.achieved)
        return 0, report("member", **fields)
    fields["separator"] = separator_json(result.certificate)
    return 1, report("member", **fields)


def run_mutual(config: RunConfig) -> Outcome:
    result = mutual_membership(_matrix(config, "x"), _matrix(config, "y"), config.tol, oracle=config.oracle)
    both = result.xy == "member" and result.yx == "member"
    return (0 if both else 1), report("mutual", tol=config.tol, **result.model_dump())


def run_distance(config: RunConfig) -> Outcome:
    result = distance_bound(_matrix(config, "x"), _matrix(config, "y"))
    return 0, report("distance", **result.model_dump())


def run_birkhoff(config: RunConfig) -> Outcome:
    (path,) = _require(config, "d")
    combination = decompose(load_input(path, StochasticPayload).to_array())
    return 0, report("birkhoff", combination=combination_json(combination), terms=len(combination.terms))


def run_correct(config: RunConfig) -> Outcome:
    (path,) = _require(config, "input")
    payload = load_input(path, CorrectInput)
    return 0, report("correct", **correction_json(correct_ds(np.asarray(payload.d, dtype=float), payload.eps2)))


def run_average(config: RunConfig) -> Outcome:
    (path,) = _require(config, "input")
    payload = load_input(path, AverageInput)
    if payload.part == 1:
        witness = cyclic_shift_witness(payload.a.to_array(), config.K)
    elif payload.part == 2:
        witness = absorb_witness(payload.y_small.to_array(), payload.y_big.to_array(), config.K, payload.q_size)
    else:
        witness = corner_replace_witness(
            payload.x.to_array(), payload.y_small.to_array(), config.K, payload.corner_sizes
        )
    return 0, report("average", part=payload.part, **witness_json(witness))


def run_absorb(config: RunConfig) -> Outcome:
    (path,) = _require(config, "input")
    payload = load_input(path, AbsorbInput)
    x2 = payload.x2.to_array() if payload.x2 is not None else None
    witness = absorb_estimate(payload.x1.to_array(), x2, config.K, payload.eta, payload.eps)
    return 0, report("absorb", **witness_json(witness))


def run_transport(config: RunConfig) -> Outcome:
    (path,) = _require(config, "input")
    payload = load_input(path, TransportInput)
    return 0, report("transport", **plan_json(riesz_interpolate(payload.a, payload.b)))


def run_measures(config: RunConfig) -> Outcome:
    (path,) = _require(config, "input")
    payload = load_input(path, MeasuresInput)
    mx, my = payload.X.to_measure(), payload.Y.to_measure()
    results = {}
    for key, check in (("condition4", check_condition4), ("condition5", check_condition5)):
        result = check(mx, my, payload.eps, config.degree)
        results[key] = {"feasible": result.feasible, "test_functions": result.test_functions}
        if result.transfer is not None:
            results[key]["transfer"] = transfer_json(result.transfer)
    feasible = results["condition4"]["feasible"]
    agree = feasible == results["condition5"]["feasible"]
    if not agree:
        logger.error("Kernel and measure-map conditions disagree")
    return (0 if feasible else 1), report("measures", eps=payload.eps, degree=config.degree, agree=agree, **results)


class MemberReport(BaseModel):
    command: Literal["member"]
    verdict: Literal["member"]
    tol: float = Field(gt=0)
    x: MatrixPayload
    y: MatrixPayload
    witness: ChannelPayload


def run_verify(config: RunConfig) -> Outcome:
    """Re-checks the witness of a member report by direct matrix arithmetic."""
    (path,) = _require(config, "report")
    payload = load_input(path, MemberReport)
    channel = payload.witness.to_channel()
    x, y = payload.x.to_array(), payload.y.to_array()
    achieved = operator_norm(x - channel(y))
    trace_preserving = check_channel(channel, test_matrices=[y]).trace_preserving
    valid = achieved <= payload.tol and trace_preserving
    if not valid:
        logger.error(f"Witness in {path} fails: error {achieved:.3e}, tol {payload.tol:.3e}")
    fields = {"valid": valid, "achieved": achieved, "tol": payload.tol, "trace_preserving": trace_preserving}
    return (0 if valid else 1), report("verify", **fields)


def run_suite_command(config: RunConfig) -> Outcome:
    if config.name is None:
        raise InputError(f"suite needs --name, one of {', '.join(SUITES)}")
    result = run_suite(config.name, config.seed, config.count)
    return (0 if result.passed else 1), report("suite", **result.model_dump())


def command_runners() -> Dict[str, Callable[[RunConfig], Outcome]]:
    return {
        "check-normal": run_check_normal,
        "member": run_member,
        "mutual": run_mutual,
        "distance": run_distance,
        "birkhoff": run_birkhoff,
        "correct": run_correct,
        "average": run_average,
        "absorb": run_absorb,
        "transport": run_transport,
        "measures": run_measures,
        "verify": run_verify,
        "suite": run_suite_command,
    }


def render(document: Dict[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def run(config: RunConfig) -> int:
    """Runs one command, prints its report and returns the exit code."""
    logger.info(f"--- Command: {config.command} ---")
    try:
        code, document = command_runners()[config.command](config)
    except InputError as e:
        print(f"[error] {e}", file=sys.stderr)
        return 2
    except OrbitHullError as e:
        logger.error(f"{config.command} failed: {type(e).__name__}: {e}")
        print(f"[error] {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except ValidationError as e:
        logger.error(f"{config.command} produced an invalid object: {e}")
        print(f"[error] invariant violation: {e.errors()[0]['msg']}", file=sys.stderr)
        return 2

    text = render(document)
    sys.stdout.write(text)
    if config.out:
        Path(config.out).write_text(text)
    return code


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=settings.tol, help=f"Membership tolerance (default: {settings.tol})")
    common.add_argument("--seed", type=int, default=settings.seed, help="Seed for randomized suites")
    common.add_argument("--exact", action="store_true", help="Rational arithmetic where supported (n <= 4)")
    common.add_argument("--out", help="Also write the report to this path")

    parser = argparse.ArgumentParser(prog="orbit-hull", description="Convex hulls of unitary orbits of normal matrices.")
    commands = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str, *inputs: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, parents=[common], help=help_text)
        for flag in inputs:
            sub.add_argument(f"--{flag}", required=True, help=f"Path to the {flag} JSON file")
        return sub

    command("check-normal", "Measure the normality defect of a matrix", "x")
    command("member", "Decide x in the closed convex hull of the unitary orbit of y", "x", "y")
    command("mutual", "Run membership both ways and compare spectral measures", "x", "y").add_argument(
        "--oracle", action="store_true", help="Cross-check with the permutation enumeration oracle"
    )
    command("distance", "Bracket the distance from x to the hull of y's orbit", "x", "y")
    command("birkhoff", "Decompose a doubly stochastic matrix into permutations", "d")
    command("correct", "Repair a stochastic matrix with row defects", "input")
    command("average", "Averaging witnesses over cyclic block rotations", "input").add_argument(
        "--K", type=int, default=4, help="Number of copies (default: 4)"
    )
    command("absorb", "Absorb a small corner into a large-multiplicity matrix", "input").add_argument(
        "--K", type=int, default=4, help="Number of copies (default: 4)"
    )
    command("transport", "Nonnegative matrix with prescribed marginals", "input")
    command("measures", "Transfer kernel and measure map feasibility", "input").add_argument(
        "--degree", type=int, default=3, help="Maximal total degree of test monomials (default: 3)"
    )
    command("verify", "Re-check the witness of a member report", "report")
    suite = command("suite", "Run a seeded acceptance suite")
    suite.add_argument("--name", required=True, choices=list(SUITES))
    suite.add_argument("--count", type=int, help="Instances (default: the suite's own)")
    return parser


INPUT_FLAGS = ("x", "y", "d", "input", "report")


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    inputs = {flag: args.pop(flag) for flag in INPUT_FLAGS if args.get(flag) is not None}
    for flag in INPUT_FLAGS:
        args.pop(flag, None)
    return RunConfig(inputs=inputs, **{key: value for key, value in args.items() if value is not None})


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_config(argv)
    except ValidationError as e:
        first = e.errors()[0]
        print(f"[error] --{_location(first['loc'])}: {first['msg']}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())

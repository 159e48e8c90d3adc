"""Core problem data types, validation, and problem-file ingestion.

A lossy-compression instance is a source distribution over a finite input
alphabet, a prior over a finite reproduction alphabet, and a nonnegative
distortion matrix between them. Everything else in the package computes
functionals of such an instance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PROB_ATOL = 1e-12    # simplex sum tolerance enforced by validate()
RESCALE_ATOL = 1e-9  # load_problem rescales sums within this, rejects beyond


class ProblemFormatError(ValueError):
    """Problem-spec file does not conform to the documented JSON schema."""


class InvariantViolation(ValueError):
    """A data-type invariant does not hold."""


class EqualityCheckError(RuntimeError):
    """An identity that must hold exactly was violated beyond tolerance."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(eq=False)
class Problem:
    """Finite instance: source p_x, reproduction prior q_y, distortion d.

    Instances are immutable after construction (arrays are read-only) and
    hash by identity, so derived objects can be cached against them. No
    validation happens here; see :func:`validate` and :func:`load_problem`.
    """

    p_x: np.ndarray
    q_y: np.ndarray
    d: np.ndarray
    x_labels: list[str] | None = None
    y_labels: list[str] | None = None

    def __post_init__(self) -> None:
        self.p_x = _readonly(np.atleast_1d(self.p_x))
        self.q_y = _readonly(np.atleast_1d(self.q_y))
        self.d = _readonly(np.atleast_2d(self.d))

    @property
    def x_size(self) -> int:
        return self.p_x.shape[0]

    @property
    def y_size(self) -> int:
        return self.q_y.shape[0]

    @property
    def support_y(self) -> np.ndarray:
        """Indices of reproduction letters with positive prior mass."""
        return np.flatnonzero(self.q_y > 0)

    @property
    def d_max(self) -> float:
        """Largest distortion over the supports of p_x and q_y."""
        sub = self.d[np.ix_(self.p_x > 0, self.q_y > 0)]
        return float(sub.max()) if sub.size else 0.0


@dataclass(eq=False)
class Code:
    """A codebook: reproduction indices, repeats allowed."""

    members: tuple[int, ...]

    def __post_init__(self) -> None:
        self.members = tuple(int(y) for y in self.members)

    @property
    def M(self) -> int:
        return len(self.members)


@dataclass(eq=False)
class Channel:
    """Conditional distribution over reproductions given the source letter."""

    w: np.ndarray

    def __post_init__(self) -> None:
        self.w = _readonly(np.atleast_2d(self.w))


def validate(problem: Problem) -> None:
    """Check every Problem invariant, raising on the first violation."""
    p, q, d = problem.p_x, problem.q_y, problem.d
    if p.ndim != 1 or p.size == 0:
        raise InvariantViolation("p_x must be a nonempty vector")
    if not np.all(np.isfinite(p)):
        raise InvariantViolation("p_x has non-finite entries")
    if np.any(p < 0):
        raise InvariantViolation("p_x has negative entries")
    s = float(np.sum(p))
    if abs(s - 1.0) > PROB_ATOL:
        raise InvariantViolation(f"p_x sums to {s:.12g}")
    if q.ndim != 1 or q.size == 0:
        raise InvariantViolation("q_y must be a nonempty vector")
    if not np.all(np.isfinite(q)):
        raise InvariantViolation("q_y has non-finite entries")
    if np.any(q < 0):
        raise InvariantViolation("q_y has negative entries")
    s = float(np.sum(q))
    if abs(s - 1.0) > PROB_ATOL:
        raise InvariantViolation(f"q_y sums to {s:.12g}")
    if d.shape != (p.size, q.size):
        raise InvariantViolation(
            f"distortion matrix has shape {d.shape}, expected {(p.size, q.size)}"
        )
    if np.any(np.isnan(d)) or np.any(np.isinf(d)):
        raise InvariantViolation("non-finite distortion")
    if np.any(d < 0):
        raise InvariantViolation("negative distortion")


def validate_channel(channel: Channel, atol: float = PROB_ATOL) -> None:
    w = channel.w
    if not np.all(np.isfinite(w)):
        raise InvariantViolation("channel has non-finite entries")
    if np.any(w < 0):
        raise InvariantViolation("channel has negative entries")
    sums = w.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > atol)
    if bad.size:
        raise InvariantViolation(
            f"channel row {bad[0]} sums to {sums[bad[0]]:.12g}"
        )


_ALLOWED_KEYS = {"p_x", "q_y", "d", "x_labels", "y_labels"}


def _vector(raw, name: str) -> np.ndarray:
    try:
        v = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"{name} is not a numeric array") from exc
    if v.ndim != 1 or v.size == 0:
        raise ProblemFormatError(f"{name} must be a nonempty array of numbers")
    if not np.all(np.isfinite(v)):
        raise ProblemFormatError(f"{name} has non-finite entries")
    if np.any(v < 0):
        raise ProblemFormatError(f"{name} has negative entries")
    s = float(np.sum(v))
    if abs(s - 1.0) > RESCALE_ATOL:
        raise ProblemFormatError(f"{name} sums to {s:.12g}, expected 1")
    # vectors already valid at the PROB_ATOL level are kept bit-identical
    return v / s if abs(s - 1.0) > PROB_ATOL else v


def load_problem(path: str | Path) -> Problem:
    """Read and validate a problem-spec JSON file.

    Keys: "p_x", "q_y", "d" (rows indexed by the source letter), optional
    "x_labels"/"y_labels". Any other key is rejected. Probability vectors
    whose sums deviate from 1 by at most 1e-9 are rescaled exactly.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ProblemFormatError(f"{path}: top level must be an object")
    unknown = set(raw) - _ALLOWED_KEYS
    if unknown:
        raise ProblemFormatError(f"{path}: unknown key {sorted(unknown)[0]!r}")
    for key in ("p_x", "q_y", "d"):
        if key not in raw:
            raise ProblemFormatError(f"{path}: missing key {key!r}")

    p_x = _vector(raw["p_x"], "p_x")
    q_y = _vector(raw["q_y"], "q_y")
    try:
        d = np.asarray(raw["d"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError("d is not a numeric matrix") from exc
    if d.ndim != 2:
        raise ProblemFormatError("d must be an array of arrays")
    if d.shape != (p_x.size, q_y.size):
        raise ProblemFormatError(
            f"d has shape {d.shape}, expected {(p_x.size, q_y.size)}"
        )
    if np.any(np.isnan(d)) or np.any(np.isinf(d)):
        raise ProblemFormatError("non-finite distortion")
    if np.any(d < 0):
        raise ProblemFormatError("negative distortion")

    labels = {}
    for key, size in (("x_labels", p_x.size), ("y_labels", q_y.size)):
        if key in raw:
            lab = raw[key]
            if (not isinstance(lab, list)
                    or len(lab) != size
                    or not all(isinstance(s, str) for s in lab)):
                raise ProblemFormatError(
                    f"{key} must be a list of {size} strings"
                )
            labels[key] = list(lab)

    problem = Problem(p_x, q_y, d, **labels)
    validate(problem)
    return problem


def save_problem(problem: Problem, path: str | Path) -> None:
    """Write a Problem back to the JSON problem-spec format."""
    doc: dict = {
        "p_x": problem.p_x.tolist(),
        "q_y": problem.q_y.tolist(),
        "d": problem.d.tolist(),
    }
    if problem.x_labels is not None:
        doc["x_labels"] = list(problem.x_labels)
    if problem.y_labels is not None:
        doc["y_labels"] = list(problem.y_labels)
    Path(path).write_text(json.dumps(doc), encoding="utf-8")

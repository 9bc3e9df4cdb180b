"""Built-in gate table and constructors for oracle and user-declared gates."""

from __future__ import annotations

import itertools
import math

import numpy as np

from .ast import Gate
from .errors import SpecError

UNITARY_TOL = 1e-9

_S2 = 1 / math.sqrt(2)


def _controlled(u: np.ndarray, controls: int) -> np.ndarray:
    dim = 2 ** controls * u.shape[0]
    out = np.eye(dim, dtype=complex)
    out[dim - u.shape[0]:, dim - u.shape[0]:] = u
    return out


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_BUILTIN_MATRICES = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "X": _X,
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": _Z,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
    "CX": _controlled(_X, 1),
    "CZ": _controlled(_Z, 1),
    "CCX": _controlled(_X, 2),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}

BUILTIN_GATES = {name: Gate.from_matrix(name, m, kind="builtin") for name, m in _BUILTIN_MATRICES.items()}


def builtin(name: str) -> Gate:
    return BUILTIN_GATES[name]


def check_unitary(matrix: np.ndarray, name: str = "gate") -> None:
    dev = np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0])).max()
    if dev >= UNITARY_TOL:
        raise SpecError(f"{name}: matrix is not unitary (max deviation {dev:.3g})")


def user_gate(name: str, matrix) -> Gate:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise SpecError(f"{name}: gate matrix must be square")
    dim = matrix.shape[0]
    if dim < 2 or dim & (dim - 1):
        raise SpecError(f"{name}: gate dimension {dim} is not a power of two")
    check_unitary(matrix, name)
    return Gate.from_matrix(name, matrix, kind="matrix")


def oracle_gate(name: str, table: dict) -> Gate:
    """Build ``U_f |x, y> = |x, y xor f(x)>`` from a complete truth table.

    ``table`` maps input bit strings (all of equal length k) to 0 or 1. The
    resulting gate acts on k + 1 qubits, the target last.
    """
    if not table:
        raise SpecError(f"oracle {name}: empty truth table")
    k = len(next(iter(table)))
    expected = {"".join(bits) for bits in itertools.product("01", repeat=k)}
    if set(table) != expected:
        missing = sorted(expected - set(table))
        raise SpecError(f"oracle {name}: truth table incomplete (missing {missing})")
    dim = 2 ** (k + 1)
    u = np.zeros((dim, dim), dtype=complex)
    for x, fx in table.items():
        if fx not in (0, 1):
            raise SpecError(f"oracle {name}: output must be a bit, got {fx}")
        for y in (0, 1):
            src = int(x + str(y), 2)
            dst = int(x + str(y ^ fx), 2)
            u[dst, src] = 1.0
    return Gate.from_matrix(name, u, kind="oracle")

"""Random small system models for property tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .boolmat import BoolMatrix
from .model import Process, SystemModel, make_model


def _operand_set(rng, n_L):
    k = rng.integers(1, n_L + 1)
    return {f"l{i}" for i in rng.choice(n_L, size=k, replace=False)}


def random_model(
    rng: np.random.Generator,
    max_L: int = 4,
    max_Pgamma: int = 3,
    max_BS: int = 5,
    max_M: int = 3,
    max_R: int = 8,
    max_Pmu: int = 4,
    density: float = 0.4,
    constraint_density: float = 0.15,
    operand_holdings: bool = False,
) -> SystemModel:
    """Draw a valid model within the given size bounds.

    With ``operand_holdings=True`` there is exactly one holding process per
    operand, acting on that operand alone.
    """
    n_L = int(rng.integers(1, max_L + 1))
    n_M = int(rng.integers(1, min(max_M, max_BS) + 1))
    n_B = int(rng.integers(0, max_BS - n_M + 1))
    n_BS = n_M + n_B
    n_H = int(rng.integers(0, max(max_R - n_BS, 0) + 1))
    n_R = n_BS + n_H
    n_Pmu = int(rng.integers(1, max_Pmu + 1))

    transformations = [Process(f"t{k}", _operand_set(rng, n_L), _operand_set(rng, n_L), f"t{k}")
                       for k in range(n_Pmu)]
    if operand_holdings:
        holdings = [Process(f"g{i}", {f"l{i}"}, {f"l{i}"}) for i in range(n_L)]
    else:
        n_Pg = int(rng.integers(1, max_Pgamma + 1))
        holdings = [Process(f"g{k}", _operand_set(rng, n_L), _operand_set(rng, n_L), f"g{k}")
                    for k in range(n_Pg)]

    J_M = (rng.random((n_Pmu, n_M)) < density).astype(int)
    J_gamma = (rng.random((len(holdings), n_R)) < max(density, 0.5)).astype(int)
    J_H = np.zeros((n_BS * n_BS, n_R), dtype=int)
    for v in range(n_BS):
        if rng.random() < density + 0.3:
            J_H[v * n_BS + v, v] = 1
    for h in range(n_BS, n_R):
        for y1 in range(n_BS):
            for y2 in range(n_BS):
                if y1 != y2 and rng.random() < density / 2:
                    J_H[y1 * n_BS + y2, h] = 1

    model = make_model(
        operands=[f"l{i}" for i in range(n_L)],
        machines=[f"m{k}" for k in range(n_M)],
        buffers=[f"b{k}" for k in range(n_B)],
        transporters=[f"h{k}" for k in range(n_H)],
        transformations=transformations,
        holdings=holdings,
        J_M=J_M,
        J_gamma=J_gamma,
        J_H=J_H,
        holding_is_operand=operand_holdings,
        name="random",
    )
    K_M = _thin(rng, model.J_M, constraint_density)
    K_Hbar = _thin(rng, model.J_Hbar, constraint_density)
    return make_model(
        operands=[f"l{i}" for i in range(n_L)],
        machines=[f"m{k}" for k in range(n_M)],
        buffers=[f"b{k}" for k in range(n_B)],
        transporters=[f"h{k}" for k in range(n_H)],
        transformations=transformations,
        holdings=holdings,
        J_M=model.J_M,
        J_gamma=model.J_gamma,
        J_H=model.J_H,
        K_M=K_M,
        K_Hbar=K_Hbar,
        holding_is_operand=operand_holdings,
        name="random",
    )


def _thin(rng, J: BoolMatrix, p: float) -> BoolMatrix:
    keep = rng.random(J.nnz) < p
    return BoolMatrix(J.shape, J.rows[keep], J.cols[keep])


def random_digraph(rng: np.random.Generator, n: int, p: float = 0.35, self_loops: bool = False) -> np.ndarray:
    a = (rng.random((n, n)) < p).astype(np.int64)
    if not self_loops:
        np.fill_diagonal(a, 0)
    return a

"""Small named models used in documentation, tests and the CLI demo."""
from __future__ import annotations

from .model import SystemModel, make_model, transport_index


def _JH(n_BS, n_R, entries):
    """Dense J_H from (resource index, origin, destination) triples, 0-based."""
    rows = [[0] * n_R for _ in range(n_BS * n_BS)]
    for v, y1, y2 in entries:
        rows[transport_index(y1 + 1, y2 + 1, n_BS) - 1][v] = 1
    return rows


def toy_water_model() -> SystemModel:
    """One machine treating water, one tank, one truck between them.

    Capabilities: treat@m1, hold water in m1, hold water in b1, truck m1->b1.
    """
    return make_model(
        operands=["water"],
        machines=["m1"],
        buffers=["b1"],
        transporters=["h1"],
        transformations=[("treat", {"water"}, {"water"})],
        holdings=[("carry_water", {"water"}, {"water"})],
        J_M=[[1]],
        J_gamma=[[1, 1, 1]],
        J_H=_JH(2, 3, [(0, 0, 0), (2, 0, 1), (1, 1, 1)]),
        holding_is_operand=True,
        name="toy_water",
    )


def lucidity_counterexample() -> SystemModel:
    """Two holding processes move water b1 -> b2 by different means.

    The two transport capabilities have identical operand/origin/destination
    footprints and so share one entry of the dual adjacency tensor.
    """
    return make_model(
        operands=["water"],
        buffers=["b1", "b2"],
        transporters=["pipe", "truck"],
        holdings=[
            ("pipe_water", {"water"}, {"water"}, "pipe"),
            ("truck_water", {"water"}, {"water"}, "truck"),
        ],
        J_gamma=[[0, 0, 1, 0], [0, 0, 0, 1]],
        J_H=_JH(2, 4, [(2, 0, 1), (3, 0, 1)]),
        name="lucidity",
    )


def two_subsystem_model() -> SystemModel:
    """Disjoint water and power subsystems sharing nothing but the model."""
    return make_model(
        operands=["water", "power"],
        machines=["pump_station", "generator"],
        buffers=["tank", "battery"],
        transporters=["pipe", "line"],
        transformations=[
            ("purify", {"water"}, {"water"}),
            ("generate", {"power"}, {"power"}),
        ],
        holdings=[
            ("hold_water", {"water"}, {"water"}),
            ("hold_power", {"power"}, {"power"}),
        ],
        J_M=[[1, 0], [0, 1]],
        # resources: pump_station, generator, tank, battery, pipe, line
        J_gamma=[[1, 0, 1, 0, 1, 0], [0, 1, 0, 1, 0, 1]],
        J_H=_JH(4, 6, [(0, 0, 0), (1, 1, 1), (2, 2, 2), (3, 3, 3), (4, 0, 2), (5, 1, 3)]),
        name="two_subsystem",
    )


def pump_model() -> SystemModel:
    """A pump that consumes water and electricity and outputs pressurized water."""
    return make_model(
        operands=["water", "electricity"],
        machines=["pump", "plant"],
        transporters=["line"],
        transformations=[
            ("pump_water", {"water", "electricity"}, {"water"}),
            ("generate", {"water"}, {"electricity"}),
        ],
        holdings=[
            ("hold_water", {"water"}, {"water"}),
            ("hold_power", {"electricity"}, {"electricity"}),
        ],
        J_M=[[1, 0], [0, 1]],
        J_gamma=[[1, 1, 0], [1, 1, 1]],
        J_H=_JH(2, 3, [(0, 0, 0), (1, 1, 1), (2, 1, 0)]),
        name="pump",
    )

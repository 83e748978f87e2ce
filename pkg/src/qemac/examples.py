"""Named constructions: the worked F_5 example, the four-server instance and the cut-set scheme.

The worked example's U is kept verbatim in ``WORKED_U``.  It violates the
erasure condition for Server 1 (``u_1 + u_2 = 2 m_1x + 4 m_1z``), so the
verbatim scheme is built unverified and fails pattern 0.  ``WORKED_U_REPAIRED``
changes the single entry ``U[0][0]`` from 4 to 1, which satisfies every
condition and keeps everything else as printed.
"""

from __future__ import annotations

from .ame import AmeScheme, plan_dimensions, synthesize_ame
from .cutset import CutSetScheme, build_cutset_scheme
from .fq import construct_field, field_of_order
from .instance import QemacInstance, build_symmetric_instance
from .linalg import FqMatrix, left_inverse
from .nsum import TransferMatrix

WORKED_M = [
    [1, 1, 1, 1, 0, 0, 0, 0],
    [1, 2, 3, 4, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 2, 3, 4],
    [0, 0, 0, 0, 1, 4, 4, 1],
]
WORKED_U = [[4, 3], [1, 1], [2, 2], [1, 3]]
WORKED_U_REPAIRED = [[1, 3], [1, 1], [2, 2], [1, 3]]


def four_server_instance(d: int = 5) -> QemacInstance:
    return build_symmetric_instance(d, 4, 2, 1)


def worked_example_transfer() -> TransferMatrix:
    return TransferMatrix(FqMatrix(construct_field(5), WORKED_M))


def worked_example_scheme(repaired: bool = True, seed: int = 0) -> AmeScheme:
    """The worked example with M and U injected; V_dec reads the U coordinates directly.

    ``repaired=False`` keeps the printed U, which is accepted without the
    erasure-rank check so that verification can show where it breaks.
    """
    f = construct_field(5)
    inst = four_server_instance()
    dims = plan_dimensions(inst, [0, 1, 1, 1, 1], lam=1, l=2)
    U = FqMatrix(f, WORKED_U_REPAIRED if repaired else WORKED_U)
    # the example decodes by taking the U coordinates, i.e. V_dec U = I
    V_dec = left_inverse(U)
    return synthesize_ame(inst, dims, seed=seed, M=worked_example_transfer(), U=U, V_dec=V_dec, strict=repaired)


def four_server_scheme(seed: int = 0, d: int = 5) -> AmeScheme:
    """Sampled AME scheme for the four-server instance (S=4, alpha=2, beta=1) at one subsystem per data server."""
    inst = four_server_instance(d)
    return synthesize_ame(inst, plan_dimensions(inst, [0, 1, 1, 1, 1]), seed=seed)


def cutset_example_scheme(d: int = 2, z: int = 3) -> CutSetScheme:
    return build_cutset_scheme(d, z)


def bell_box(q: int = 3) -> TransferMatrix:
    f = field_of_order(q)
    return TransferMatrix(FqMatrix(f, [[1, 1, 0, 0], [0, 0, 1, int(f.neg(1))]]))

"""Weighted generalized plant for the speed/current mixed-sensitivity problem.

Channel layout::

    w = [omega_ref, tau_l, n_id, n_iq]
    u = [ud_aux, uq_aux]
    z = [W_e*(omega_ref - omega_m), W_I*i_q, W_I*i_d, eps_u*ud_aux, eps_u*uq_aux]
    y = [omega_ref - omega_m, i_d + eps_n*n_id, i_q + eps_n*n_iq]
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .statespace import StateSpaceModel
from .weights import TransferWeight

W_LABELS = ("omega_ref", "tau_l", "n_id", "n_iq")
U_LABELS = ("ud_aux", "uq_aux")
Z_LABELS = ("z_track", "z_iq", "z_id", "z_ud", "z_uq")
Y_LABELS = ("e_track", "i_d_meas", "i_q_meas")


class RankConditionError(ValueError):
    pass


@dataclass(frozen=True)
class GeneralizedPlant:
    realization: StateSpaceModel
    n_w: int
    n_u: int
    n_z: int
    n_y: int

    def __post_init__(self):
        r = self.realization
        if self.n_w + self.n_u != r.n_inputs or self.n_z + self.n_y != r.n_outputs:
            raise ValueError("channel partition does not match realization")

    def blocks(self):
        """``A, B1, B2, C1, C2, D11, D12, D21, D22``."""
        r = self.realization
        nw, nz = self.n_w, self.n_z
        return (r.A, r.B[:, :nw], r.B[:, nw:], r.C[:nz], r.C[nz:],
                r.D[:nz, :nw], r.D[:nz, nw:], r.D[nz:, :nw], r.D[nz:, nw:])


def pbh_stabilizable(A, B, tol: float = 1e-9) -> bool:
    """PBH test: ``[A - lam I, B]`` has full row rank for every unstable mode."""
    n = A.shape[0]
    for lam in np.linalg.eigvals(A):
        if lam.real >= 0:
            M = np.hstack([A - lam * np.eye(n), B])
            s = np.linalg.svd(M, compute_uv=False)
            if s[n - 1] <= tol * max(1.0, s[0]):
                return False
    return True


def pbh_detectable(C, A, tol: float = 1e-9) -> bool:
    return pbh_stabilizable(A.T, C.T, tol)


def build_generalized_plant(motor: StateSpaceModel, W_e: TransferWeight, W_I: TransferWeight,
                            eps_u: float = 1e-4, eps_n: float = 1e-4) -> GeneralizedPlant:
    """Assemble ``P`` from the 3-state motor model and the two weights.

    ``motor`` must have states ``[i_d, i_q, omega_m]`` and inputs
    ``[ud_aux, uq_aux, tau_l]`` as produced by :func:`reliable_drive.motor.linearize`.
    """
    if motor.n_states != 3 or motor.n_inputs != 3:
        raise ValueError("expected the 3-state, 3-input motor model")
    if not (eps_u > 0 and eps_n > 0):
        raise RankConditionError("regularization epsilons must be positive")
    Am = motor.A
    Bu = motor.B[:, :2]
    Btau = motor.B[:, 2:3]
    We, Wi = W_e.realization, W_I.realization
    ne, ni = We.n_states, Wi.n_states
    n = 3 + ne + 2 * ni
    sl_e = slice(3, 3 + ne)
    sl_q = slice(3 + ne, 3 + ne + ni)
    sl_d = slice(3 + ne + ni, n)

    c_id = np.array([[1.0, 0.0, 0.0]])
    c_iq = np.array([[0.0, 1.0, 0.0]])
    c_w = np.array([[0.0, 0.0, 1.0]])

    A = sla.block_diag(Am, We.A, Wi.A, Wi.A) if n > 3 else Am.copy()
    A = np.asarray(A, dtype=float).reshape(n, n)
    A[sl_e, :3] = -We.B @ c_w
    A[sl_q, :3] = Wi.B @ c_iq
    A[sl_d, :3] = Wi.B @ c_id

    B1 = np.zeros((n, 4))
    B1[:3, 1:2] = Btau
    B1[sl_e, 0:1] = We.B
    B2 = np.zeros((n, 2))
    B2[:3] = Bu

    C1 = np.zeros((5, n))
    C1[0:1, :3] = -We.D @ c_w
    C1[0:1, sl_e] = We.C
    C1[1:2, :3] = Wi.D @ c_iq
    C1[1:2, sl_q] = Wi.C
    C1[2:3, :3] = Wi.D @ c_id
    C1[2:3, sl_d] = Wi.C
    D11 = np.zeros((5, 4))
    D11[0, 0] = We.D[0, 0]
    D12 = np.zeros((5, 2))
    D12[3, 0] = D12[4, 1] = eps_u

    C2 = np.zeros((3, n))
    C2[0:1, :3] = -c_w
    C2[1:2, :3] = c_id
    C2[2:3, :3] = c_iq
    D21 = np.zeros((3, 4))
    D21[0, 0] = 1.0
    D21[1, 2] = D21[2, 3] = eps_n
    D22 = np.zeros((3, 2))

    real = StateSpaceModel(
        A, np.hstack([B1, B2]), np.vstack([C1, C2]),
        np.block([[D11, D12], [D21, D22]]),
        input_labels=W_LABELS + U_LABELS, output_labels=Z_LABELS + Y_LABELS,
    )
    plant = GeneralizedPlant(real, n_w=4, n_u=2, n_z=5, n_y=3)
    check_rank_conditions(plant)
    return plant


def check_rank_conditions(plant: GeneralizedPlant) -> None:
    A, B1, B2, C1, C2, D11, D12, D21, D22 = plant.blocks()
    if np.linalg.matrix_rank(D12) < D12.shape[1]:
        raise RankConditionError("D12 must have full column rank")
    if np.linalg.matrix_rank(D21) < D21.shape[0]:
        raise RankConditionError("D21 must have full row rank")
    if not pbh_stabilizable(A, B2):
        raise RankConditionError("(A, B2) is not stabilizable")
    if not pbh_detectable(C2, A):
        raise RankConditionError("(C2, A) is not detectable")

"""Environment contractions for sweeping algorithms.

Index conventions
-----------------
MPS site tensor ``A[a_left, s, a_right]``.
MPO site tensor ``W[w_left, s_out, s_in, w_right]``.
Left environment ``L[a_bra, w, a_ket]``; right environment ``R[b_bra, w, b_ket]``.
"""

import numpy as np

from .tensor import DTYPE


def edge_env() -> np.ndarray:
    return np.ones((1, 1, 1), dtype=DTYPE)


def update_left(L, A, W, B=None):
    """Grow ``L`` by one site. ``B`` is the bra tensor (defaults to ``A``)."""
    B = A if B is None else B
    t = np.tensordot(L, A, axes=(2, 0))  # a_bra, w, s, a_ket'
    t = np.tensordot(t, W, axes=([1, 2], [0, 2]))  # a_bra, a_ket', s', w'
    t = np.tensordot(B.conj(), t, axes=([0, 1], [0, 2]))  # a_bra', a_ket', w'
    return t.transpose(0, 2, 1)


def update_right(R, A, W, B=None):
    B = A if B is None else B
    t = np.tensordot(A, R, axes=(2, 2))  # a_ket, s, b_bra, w'
    t = np.tensordot(t, W, axes=([1, 3], [2, 3]))  # a_ket, b_bra, w, s'
    t = np.tensordot(t, B.conj(), axes=([1, 3], [2, 1]))  # a_ket, w, a_bra
    return t.transpose(2, 1, 0)


def apply_h2(L, W1, W2, R, theta):
    """Two-site effective Hamiltonian acting on ``theta[a, s1, s2, b]``."""
    t = np.tensordot(L, theta, axes=(2, 0))  # a, w, s1, s2, b
    t = np.tensordot(t, W1, axes=([1, 2], [0, 2]))  # a, s2, b, s1', w1
    t = np.tensordot(t, W2, axes=([4, 1], [0, 2]))  # a, b, s1', s2', w2
    t = np.tensordot(t, R, axes=([1, 4], [2, 1]))  # a, s1', s2', b
    return t


def apply_h1(L, W, R, A):
    t = np.tensordot(L, A, axes=(2, 0))  # a, w, s, b
    t = np.tensordot(t, W, axes=([1, 2], [0, 2]))  # a, b, s', w'
    t = np.tensordot(t, R, axes=([1, 3], [2, 1]))  # a, s', b
    return t


def apply_h0(L, R, C):
    t = np.tensordot(L, C, axes=(2, 0))  # a, w, b
    return np.tensordot(t, R, axes=([1, 2], [1, 2]))


def left_envs(tensors, mpo_tensors, upto):
    """``[L_0, ..., L_upto]`` where ``L_i`` covers sites ``< i``."""
    envs = [edge_env()]
    for i in range(upto):
        envs.append(update_left(envs[-1], tensors[i], mpo_tensors[i]))
    return envs


def right_envs(tensors, mpo_tensors, downto):
    """Dict ``{i: R_i}`` for ``i >= downto`` where ``R_i`` covers sites ``> i``."""
    n = len(tensors)
    envs = {n - 1: edge_env()}
    for i in range(n - 1, downto, -1):
        envs[i - 1] = update_right(envs[i], tensors[i], mpo_tensors[i])
    return envs

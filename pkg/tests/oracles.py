"""Brute-force references that share no code with the package.

The joint particle-marker state is built in the full tensor-product space with
``np.kron``, and every unitary is written out as a dense matrix from scratch.
"""

import numpy as np


def bs(R, n, a, b):
    u = np.eye(n, dtype=complex)
    r, t = np.sqrt(R), np.sqrt(1 - R)
    u[np.ix_([a, b], [a, b])] = [[r, t], [t, -r]]
    return u


def ph(phi, n, m):
    u = np.eye(n, dtype=complex)
    u[m, m] = np.exp(1j * phi)
    return u


def three_path_stages(R4, alpha, beta, gamma):
    """Dense 3x3 stage matrices (checkpoint entries are ('cp', mode, label))."""
    return [
        bs(1 / 3, 3, 0, 1),
        bs(0.5, 3, 1, 2),
        ("cp", 1, "A"), ph(alpha, 3, 1),
        ("cp", 2, "B"), ph(beta, 3, 2),
        ("cp", 0, "C"), ph(gamma, 3, 0),
        bs(0.5, 3, 2, 1),
        bs(R4, 3, 0, 1),
    ]


def joint_probabilities(stages, n_modes, labels, eps, source=0):
    """(mode, marker-config-index) probabilities via explicit Kronecker products.

    Marker register ordering: the first label is the least significant bit.
    """
    K = len(labels)
    dim_m = 2 ** K
    c, s = np.sqrt(1 - 3 * eps), np.sqrt(3 * eps)
    rot = np.array([[c, -s], [s, c]])
    psi = np.zeros(n_modes * dim_m, dtype=complex)
    psi[source * dim_m] = 1.0
    for st in stages:
        if isinstance(st, tuple):
            _, mode, label = st
            k = labels.index(label)
            # marker k is tensor factor K-1-k in big-endian kron order
            factors = [np.eye(2)] * K
            factors[K - 1 - k] = rot
            marker_op = factors[0]
            for f in factors[1:]:
                marker_op = np.kron(marker_op, f)
            proj = np.zeros((n_modes, n_modes))
            proj[mode, mode] = 1
            op = np.kron(proj, marker_op) + np.kron(np.eye(n_modes) - proj, np.eye(dim_m))
        else:
            op = np.kron(st, np.eye(dim_m))
        psi = op @ psi
    return np.abs(psi.reshape(n_modes, dim_m)) ** 2


def unitary(stages, n):
    u = np.eye(n, dtype=complex)
    for st in stages:
        if not isinstance(st, tuple):
            u = st @ u
    return u

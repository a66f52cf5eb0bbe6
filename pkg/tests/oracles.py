"""Independent dense-matrix references used by the tests.

Nothing here imports the package's evolution code: operators are built
explicitly as (N+1)x(N+1) matrices and states are propagated with expm.
"""

import numpy as np
from scipy.linalg import expm
from scipy.special import comb, gammaln


def spin_matrices(n):
    """J_x, J_y, J_z on the Dicke basis |k>, k = number of |a> atoms."""
    dim = n + 1
    jp = np.zeros((dim, dim))
    for k in range(n):
        jp[k + 1, k] = np.sqrt((k + 1) * (n - k))
    jz = np.diag(np.arange(dim) - n / 2)
    jx = (jp + jp.T) / 2
    jy = (jp - jp.T) / 2j
    return jx, jy, jz


def coherent_x(n):
    return np.sqrt(comb(n, np.arange(n + 1))) / 2 ** (n / 2)


def dense_moments(psi, ops):
    """Mean and symmetrized covariance of a pure state."""
    mean = np.array([np.vdot(psi, o @ psi).real for o in ops])
    second = np.array([[0.5 * np.vdot(psi, (a @ b + b @ a) @ psi).real for b in ops] for a in ops])
    return mean, second - np.outer(mean, mean)


def dense_twist(n, mu):
    """Propagator exp(-i mu J_z^2) as a dense matrix exponential."""
    _, _, jz = spin_matrices(n)
    return expm(-1j * mu * jz @ jz)


def rotation_x(n, angle):
    jx, _, _ = spin_matrices(n)
    return expm(-1j * angle * jx)


class LossSpace:
    """Direct sum of Dicke spaces with 0..N atoms, for the lossy master equation."""

    def __init__(self, n):
        self.n = n
        self.offsets = np.cumsum([0] + [m + 1 for m in range(n, -1, -1)])[:-1]
        self.sizes = [m + 1 for m in range(n, -1, -1)]
        self.atoms = list(range(n, -1, -1))
        self.dim = int(sum(self.sizes))

    def block(self, m):
        i = self.atoms.index(m)
        return slice(self.offsets[i], self.offsets[i] + self.sizes[i])

    def embed(self, per_block):
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for m in self.atoms:
            if m == 0:
                continue
            out[self.block(m), self.block(m)] = per_block(m)
        return out

    def jump_ops(self):
        la = np.zeros((self.dim, self.dim))
        lb = np.zeros((self.dim, self.dim))
        for m in self.atoms:
            if m == 0:
                continue
            src, dst = self.block(m), self.block(m - 1)
            for k in range(m + 1):
                if k > 0:
                    la[dst.start + k - 1, src.start + k] = np.sqrt(k)
                if k < m:
                    lb[dst.start + k, src.start + k] = np.sqrt(m - k)
        return la, lb

    def number_op(self):
        return np.diag(np.concatenate([np.full(s, m) for s, m in zip(self.sizes, self.atoms)])).astype(float)


def lindblad_moments(n, chi, gamma, times):
    """<J_i>, <{J_i,J_j}>/2 and <N> from the dense master equation.

    d rho/dt = -i[H, rho] + gamma sum_L (L rho L^+ - {L^+L, rho}/2),
    H = chi J_z^2, L in {a-loss, b-loss}; starts from the +x coherent state.
    """
    space = LossSpace(n)
    ops = [space.embed(lambda m, i=i: spin_matrices(m)[i]) for i in range(3)]
    h = chi * ops[2] @ ops[2]
    la, lb = space.jump_ops()
    eye = np.eye(space.dim)
    # row-major vec: vec(A rho B) = kron(A, B^T) vec(rho)
    liou = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for l in (la, lb):
        ldl = l.T @ l
        liou += gamma * (np.kron(l, l) - 0.5 * np.kron(ldl, eye) - 0.5 * np.kron(eye, ldl.T))
    psi = np.zeros(space.dim, dtype=complex)
    psi[space.block(n)] = coherent_x(n)
    rho0 = np.outer(psi, psi.conj()).reshape(-1)
    nop = space.number_op()
    out = []
    for t in times:
        rho = (expm(liou * t) @ rho0).reshape(space.dim, space.dim)
        mean = np.array([np.trace(rho @ o).real for o in ops])
        second = np.array([[0.5 * np.trace(rho @ (a @ b + b @ a)).real for b in ops] for a in ops])
        out.append((mean, second, np.trace(rho @ nop).real))
    return out


def binomial_outside_mass(n, lo, hi):
    """Binomial(n, 1/2) mass outside [lo, hi], summed directly over the tails."""
    k = np.arange(n + 1)
    logp = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1) - n * np.log(2)
    return np.exp(logp[(k < lo) | (k > hi)]).sum()

"""Independent reference implementations used to cross-check the package.

Everything here is written straight from the defining formulas with plain
Python loops, no einsum and no shared code with ``grflab``.  Slow is fine;
these run on frames of dimension <= 8.

Conventions (must match the package):

* structure constants ``c[i, j, k]`` mean [e_i, e_j] = sum_k c[i,j,k] e_k
* ``i_X`` contracts the first slot of a form
* Chevalley-Eilenberg differential on invariant forms:
  (d a)(X_0..X_k) = sum_{i<j} (-1)^{i+j} a([X_i,X_j], X_0..^i..^j..X_k)
* volume form of g on an oriented frame: sqrt(det g) e^{1...n}
"""

import itertools
import math

import numpy as np


# ---------------------------------------------------------------------------
# multilinear helpers
# ---------------------------------------------------------------------------

def apply_form(form, *indices):
    """Evaluate a k-form stored as a k-dim array on basis indices."""
    out = form
    for i in indices:
        out = out[i]
    return float(out)


def ce_differential(c, form):
    """Chevalley-Eilenberg differential of an invariant k-form.

    Evaluates the textbook alternating sum on every index tuple, no
    antisymmetrization shortcuts.  ``form`` is a k-dim ndarray, k >= 1.
    Returns a (k+1)-dim ndarray.
    """
    c = np.asarray(c, dtype=float)
    form = np.asarray(form, dtype=float)
    n = c.shape[0]
    k = form.ndim
    out = np.zeros((n,) * (k + 1))
    for idx in itertools.product(range(n), repeat=k + 1):
        total = 0.0
        for i in range(k + 1):
            for j in range(i + 1, k + 1):
                rest = [idx[m] for m in range(k + 1) if m != i and m != j]
                for b in range(n):
                    coeff = c[idx[i], idx[j], b]
                    if coeff == 0.0:
                        continue
                    total += (-1) ** (i + j) * coeff * apply_form(form, b, *rest)
        out[idx] = total
    return out


def koszul_connection(c, g):
    """Levi-Civita coefficients Gamma[i,j,k] with nabla_{e_i} e_j = Gamma[i,j,k] e_k.

    Koszul on an invariant frame (all inner products constant):
    2 g(nabla_{e_i} e_j, e_k)
      = g([e_i,e_j], e_k) - g([e_j,e_k], e_i) + g([e_k,e_i], e_j)
    """
    c = np.asarray(c, dtype=float)
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    ginv = np.linalg.inv(g)
    gamma = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                s = 0.0
                for m in range(n):
                    s += c[i, j, m] * g[m, k]
                    s -= c[j, k, m] * g[m, i]
                    s += c[k, i, m] * g[m, j]
                # lower index k; raise at the end
                gamma[i, j, k] = 0.5 * s
    # gamma currently holds g(nabla_i e_j, e_k); raise the last index
    out = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out[i, j, k] = sum(gamma[i, j, m] * ginv[m, k] for m in range(n))
    return out


def curvature(c, gamma):
    """R[i,j,k,l]: coefficient of e_l in R(e_i,e_j)e_k.

    R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{[X,Y]} Z
    on an invariant frame.
    """
    c = np.asarray(c, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.shape[0]
    out = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    s = 0.0
                    for m in range(n):
                        s += gamma[i, m, l] * gamma[j, k, m]
                        s -= gamma[j, m, l] * gamma[i, k, m]
                        s -= c[i, j, m] * gamma[m, k, l]
                    out[i, j, k, l] = s
    return out


def ricci(c, g):
    """Ricci matrix Rc[j,k] = g^{il} R_{ijkl} from the loop curvature."""
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    ginv = np.linalg.inv(g)
    gamma = koszul_connection(c, g)
    riem = curvature(c, gamma)
    # lower the last index: R_{ijkl} = R[i,j,k,m] g[m,l]
    low = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    low[i, j, k, l] = sum(riem[i, j, k, m] * g[m, l] for m in range(n))
    rc = np.zeros((n, n))
    for j in range(n):
        for k in range(n):
            rc[j, k] = sum(
                ginv[i, l] * low[i, j, k, l] for i in range(n) for l in range(n)
            )
    return rc


def scalar_curvature(c, g):
    g = np.asarray(g, dtype=float)
    ginv = np.linalg.inv(g)
    rc = ricci(c, g)
    n = g.shape[0]
    return float(sum(ginv[j, k] * rc[j, k] for j in range(n) for k in range(n)))


def h_squared(g, H):
    """H2[x,y] = H(x, e_i, e_j) H(y, e_k, e_l) g^{ik} g^{jl} (full sum)."""
    g = np.asarray(g, dtype=float)
    H = np.asarray(H, dtype=float)
    n = g.shape[0]
    ginv = np.linalg.inv(g)
    out = np.zeros((n, n))
    for x in range(n):
        for y in range(n):
            s = 0.0
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        for l in range(n):
                            s += H[x, i, j] * H[y, k, l] * ginv[i, k] * ginv[j, l]
            out[x, y] = s
    return out


def h_norm_squared(g, H):
    """|H|^2 = g^{ia} g^{jb} g^{kc} H_{ijk} H_{abc} (full sum, no 1/3!)."""
    g = np.asarray(g, dtype=float)
    H = np.asarray(H, dtype=float)
    n = g.shape[0]
    ginv = np.linalg.inv(g)
    s = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for a in range(n):
                    for b in range(n):
                        for cc in range(n):
                            s += ginv[i, a] * ginv[j, b] * ginv[k, cc] \
                                * H[i, j, k] * H[a, b, cc]
    return float(s)


def covariant_derivative_form(gamma, T):
    """(nabla T)[i, a1..ak] = -sum over slots Gamma[i,a_s,m] T[..m..].

    T is a covariant k-tensor on an invariant frame (constant components),
    so only the connection terms survive.
    """
    gamma = np.asarray(gamma, dtype=float)
    T = np.asarray(T, dtype=float)
    n = gamma.shape[0]
    k = T.ndim
    out = np.zeros((n,) + T.shape)
    for idx in itertools.product(range(n), repeat=k + 1):
        i, rest = idx[0], idx[1:]
        s = 0.0
        for slot in range(k):
            for m in range(n):
                sub = list(rest)
                sub[slot] = m
                s -= gamma[i, rest[slot], m] * T[tuple(sub)]
        out[idx] = s
    return out


def codifferential_via_trace(c, g, T):
    """(d* T)[a2..ak] = -g^{il} (nabla_i T)[l, a2..ak]."""
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    ginv = np.linalg.inv(g)
    gamma = koszul_connection(c, g)
    nt = covariant_derivative_form(gamma, T)
    out = np.zeros(T.shape[1:])
    for rest in itertools.product(range(n), repeat=T.ndim - 1):
        s = 0.0
        for i in range(n):
            for l in range(n):
                s -= ginv[i, l] * nt[(i, l) + rest]
        out[rest] = s
    return out


# ---------------------------------------------------------------------------
# Hodge star route for the codifferential (independent second route)
# ---------------------------------------------------------------------------

def _levi_civita_symbol(n):
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        eps[perm] = _perm_sign(perm)
    return eps


def _perm_sign(perm):
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def hodge_star(g, T):
    """Hodge star of a k-form on an oriented orthonormal-ish frame.

    (*T)_{b...} = (1/k!) sqrt(det g) T^{a1..ak} eps_{a1..ak b1..b_{n-k}}
    with indices raised by g.
    """
    g = np.asarray(g, dtype=float)
    T = np.asarray(T, dtype=float)
    n = g.shape[0]
    k = T.ndim
    ginv = np.linalg.inv(g)
    eps = _levi_civita_symbol(n)
    sqg = np.sqrt(np.linalg.det(g))
    # raise all indices
    Tup = T.copy()
    for slot in range(k):
        Tup = np.tensordot(Tup, ginv, axes=([0], [0]))
        # tensordot moves the contracted slot to the end; k moves restore order
    # after k contractions the index order is restored
    out = np.zeros((n,) * (n - k))
    for bidx in itertools.product(range(n), repeat=n - k):
        s = 0.0
        for aidx in itertools.product(range(n), repeat=k):
            s += Tup[aidx] * eps[aidx + bidx]
        out[bidx] = s * sqg / math.factorial(k)
    return out


def codifferential_via_hodge(c, g, T):
    """delta T = (-1)^{n(k+1)+1} * d * T on an oriented invariant frame."""
    g = np.asarray(g, dtype=float)
    T = np.asarray(T, dtype=float)
    n = g.shape[0]
    k = T.ndim
    star_T = hodge_star(g, T)
    if star_T.ndim == 0:
        # d of an invariant function is zero
        d_star_T = np.zeros((n,))
    else:
        d_star_T = ce_differential(c, star_T)
    sign = (-1) ** (n * (k + 1) + 1)
    return sign * hodge_star(g, d_star_T)


# ---------------------------------------------------------------------------
# Bismut connection and its curvature, by loops
# ---------------------------------------------------------------------------

def bismut_connection(c, g, H, sign):
    """Gamma+/-[i,j,k] = Gamma[i,j,k] +/- (1/2) g^{kl} H[i,j,l]."""
    g = np.asarray(g, dtype=float)
    H = np.asarray(H, dtype=float)
    n = g.shape[0]
    ginv = np.linalg.inv(g)
    gamma = koszul_connection(c, g)
    out = gamma.copy()
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out[i, j, k] += sign * 0.5 * sum(
                    ginv[k, l] * H[i, j, l] for l in range(n)
                )
    return out


def connection_ricci(c, g, gamma):
    """Ricci-type trace of the curvature of an arbitrary connection.

    Rc[j,k] = g^{il} R_{ijkl} with R from `curvature` and the last index
    lowered by g.  For the Levi-Civita connection this is the usual Ricci.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    ginv = np.linalg.inv(g)
    riem = curvature(c, gamma)
    rc = np.zeros((n, n))
    for j in range(n):
        for k in range(n):
            s = 0.0
            for i in range(n):
                for l in range(n):
                    for m in range(n):
                        s += ginv[i, l] * riem[i, j, k, m] * g[m, l]
            rc[j, k] = s
    return rc


# ---------------------------------------------------------------------------
# dense eigensolver oracle for the Schroedinger-type operator
# ---------------------------------------------------------------------------

def dense_ground_state(V, h):
    """Lowest eigenpair of -4*Laplacian + diag(V) on a periodic grid.

    V is a 2-D array (either axis may be 1); five-point Laplacian with
    periodic wrap.  h is the spacing, either a scalar for both axes or a
    pair (hx, hy).  Returns (eigenvalue, grid).
    """
    V = np.asarray(V, dtype=float)
    N, M = V.shape
    size = N * M
    hx, hy = (h, h) if np.isscalar(h) else h

    def lap_entry(u):
        out = np.zeros_like(u)
        if N > 1:
            out += (np.roll(u, 1, axis=0) + np.roll(u, -1, axis=0)
                    - 2.0 * u) / hx ** 2
        if M > 1:
            out += (np.roll(u, 1, axis=1) + np.roll(u, -1, axis=1)
                    - 2.0 * u) / hy ** 2
        return out

    A = np.zeros((size, size))
    for col in range(size):
        e = np.zeros(size)
        e[col] = 1.0
        u = e.reshape(N, M)
        A[:, col] = (-4.0 * lap_entry(u) + V * u).ravel()
    w, vecs = np.linalg.eigh(A)
    ground = vecs[:, 0]
    if ground.sum() < 0:
        ground = -ground
    return float(w[0]), ground.reshape(N, M)

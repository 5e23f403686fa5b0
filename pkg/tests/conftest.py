import numpy as np
import pytest

from burgers2d.fields import SineField, VectorField


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def advect_oracle(u: VectorField, w: SineField) -> SineField:
    """Brute-force pair summation over the full lattice, independent of scipy.

    out_q = 1/2 * sum_{ka + kw = q} (kw1 * s_u1[ka] + kw2 * s_u2[ka]) * s_w[kw].
    """
    N = w.N
    out = np.zeros_like(w.s)
    for q1 in range(-N, N + 1):
        for q2 in range(-N, N + 1):
            acc = 0.0
            for kw1 in range(-N, N + 1):
                for kw2 in range(-N, N + 1):
                    ka1, ka2 = q1 - kw1, q2 - kw2
                    if abs(ka1) > N or abs(ka2) > N:
                        continue
                    sw = w.s[kw1 + N, kw2 + N]
                    if sw == 0.0:
                        continue
                    acc += (
                        kw1 * u.u1.s[ka1 + N, ka2 + N] + kw2 * u.u2.s[ka1 + N, ka2 + N]
                    ) * sw
            out[q1 + N, q2 + N] = 0.5 * acc
    return SineField.fold(N, out)


def fields_close(a, b, tol=1e-12):
    return np.max(np.abs(a.s - b.s)) <= tol


def vectors_close(a, b, tol=1e-12):
    return fields_close(a.u1, b.u1, tol) and fields_close(a.u2, b.u2, tol)

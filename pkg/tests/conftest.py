"""Shared fixtures and independent oracle helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from tunneltime import photonic

# design wavelength used by the photonic fixtures (length units are microns
# when reporting physical equivalents; the core never cares)
LAMBDA0 = 0.702
OMEGA0 = 2.0 * np.pi / LAMBDA0


@pytest.fixture(scope="session")
def skc_stack() -> photonic.LayeredStack:
    """The documented 11-layer quarter-wave barrier used by the SKC-regime runs.

    Indices are chosen so the midgap length/delay ratio lands near 1.7 with a
    total length of about 1.1 length units (micron-equivalent at 702 nm).
    """
    return photonic.LayeredStack.quarter_wave(2.0, 1.5, 11, LAMBDA0)


@pytest.fixture(scope="session")
def front_stack() -> photonic.LayeredStack:
    """Weakly modulated, strongly opaque stack with a narrow stopband.

    373 quarter-wave layers at 2% index contrast: |t|^2 ~ 2e-3 at midgap
    while the stopband is only ~1.5% of the carrier, so a synthesis band of
    50 or 100 stopband widths still keeps every frequency positive.
    """
    return photonic.LayeredStack.quarter_wave(1.02, 1.0, 373, LAMBDA0)


def quantum_matching_oracle(v0: float, length: float, energy: float):
    """Solve the four boundary-matching equations as a linear system.

    Independent of the closed form: unknowns (r, a, b, t) with the interior
    written as a e^{kappa x} + b e^{-kappa x}.
    """
    k = np.sqrt(2.0 * energy)
    kappa = np.sqrt(complex(2.0 * (v0 - energy)))
    e_plus = np.exp(kappa * length)
    e_minus = np.exp(-kappa * length)
    mat = np.array(
        [
            [-1.0, 1.0, 1.0, 0.0],
            [1j * k, kappa, -kappa, 0.0],
            [0.0, e_plus, e_minus, -1.0],
            [0.0, kappa * e_plus, -kappa * e_minus, -1j * k],
        ],
        dtype=complex,
    )
    rhs = np.array([1.0, 1j * k, 0.0, 0.0], dtype=complex)
    r, a, b, t = np.linalg.solve(mat, rhs)
    return t, r, a, b


def stack_matching_oracle(stack: photonic.LayeredStack, omega: float):
    """Solve the full interface-continuity linear system of a layered stack.

    Unknowns are (r, a_j, b_j per layer, t) with per-layer local coordinates;
    returns (t, r, field sampler e(z)) for unit incident amplitude.  This is
    the brute-force route the transfer-matrix implementation is checked
    against.
    """
    layers = stack.layers
    n_layers = len(layers)
    size = 2 * n_layers + 2
    mat = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)

    def a_idx(j):
        return 1 + 2 * j

    def b_idx(j):
        return 2 + 2 * j

    t_idx = size - 1
    row = 0
    # entrance: 1 + r = a_0 + b_0 ; n_in (1 - r) = n_0 (a_0 - b_0)
    n0 = layers[0][0]
    mat[row, 0] = -1.0
    mat[row, a_idx(0)] = 1.0
    mat[row, b_idx(0)] = 1.0
    rhs[row] = 1.0
    row += 1
    mat[row, 0] = stack.n_in
    mat[row, a_idx(0)] = n0
    mat[row, b_idx(0)] = -n0
    rhs[row] = stack.n_in
    row += 1
    # interior interfaces
    for j in range(n_layers - 1):
        nj, dj = layers[j]
        nj1 = layers[j + 1][0]
        ph = np.exp(1j * nj * omega * dj)
        mat[row, a_idx(j)] = ph
        mat[row, b_idx(j)] = 1.0 / ph
        mat[row, a_idx(j + 1)] = -1.0
        mat[row, b_idx(j + 1)] = -1.0
        row += 1
        mat[row, a_idx(j)] = nj * ph
        mat[row, b_idx(j)] = -nj / ph
        mat[row, a_idx(j + 1)] = -nj1
        mat[row, b_idx(j + 1)] = nj1
        row += 1
    # exit: fields match t and n_out t
    nN, dN = layers[-1]
    ph = np.exp(1j * nN * omega * dN)
    mat[row, a_idx(n_layers - 1)] = ph
    mat[row, b_idx(n_layers - 1)] = 1.0 / ph
    mat[row, t_idx] = -1.0
    row += 1
    mat[row, a_idx(n_layers - 1)] = nN * ph
    mat[row, b_idx(n_layers - 1)] = -nN / ph
    mat[row, t_idx] = -stack.n_out
    solution = np.linalg.solve(mat, rhs)
    r = solution[0]
    t = solution[t_idx]

    edges = np.concatenate(([0.0], np.cumsum([d for _, d in layers])))

    def e_field(z: float) -> complex:
        j = min(int(np.searchsorted(edges, z, side="right")) - 1, n_layers - 1)
        j = max(j, 0)
        local = z - edges[j]
        nj = layers[j][0]
        a = solution[a_idx(j)]
        b = solution[b_idx(j)]
        return a * np.exp(1j * nj * omega * local) + b * np.exp(-1j * nj * omega * local)

    return t, r, e_field


def random_symmetric_stack(rng: np.random.Generator) -> photonic.LayeredStack:
    """Random lossless mirror-symmetric quarter-wave-like stack with a stopband."""
    periods = int(rng.integers(3, 7))
    n_hi = float(rng.uniform(1.7, 3.0))
    n_lo = float(rng.uniform(1.1, 1.45))
    lam = float(rng.uniform(0.5, 1.5))
    half = []
    for _ in range(periods):
        half.append((n_hi, lam / (4.0 * n_hi) * float(rng.uniform(0.9, 1.1))))
        half.append((n_lo, lam / (4.0 * n_lo) * float(rng.uniform(0.9, 1.1))))
    center = (n_hi, lam / (4.0 * n_hi) * float(rng.uniform(0.9, 1.1)))
    layers = tuple(half) + (center,) + tuple(half[::-1])
    return photonic.LayeredStack(layers)


def random_stack(rng: np.random.Generator) -> photonic.LayeredStack:
    """Random lossless stack with no symmetry constraint."""
    count = int(rng.integers(1, 14))
    layers = tuple(
        (float(rng.uniform(1.05, 3.2)), float(rng.uniform(0.02, 0.6)))
        for _ in range(count)
    )
    return photonic.LayeredStack(layers)

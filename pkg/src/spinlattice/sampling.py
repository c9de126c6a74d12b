"""Seeded random matrices, states and local operators for property checks."""

from __future__ import annotations

from typing import List

import numpy as np

from .lattice import Region
from .tensorcore import LocalOperator


def ginibre(dim: int, rng: np.random.Generator) -> np.ndarray:
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = ginibre(dim, rng)
    return (g + g.conj().T) / 2


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian Gaussian matrix, shifted by its norm times identity, trace-normalized."""
    h = random_hermitian(dim, rng)
    shift = np.max(np.abs(np.linalg.eigvalsh(h)))
    rho = h + shift * np.eye(dim)
    return rho / np.trace(rho).real


def random_pure_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(dim, rng))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_support(
    region: Region, rng: np.random.Generator, max_size: int = 2, contiguous: bool = True
) -> Region:
    """A random sub-region of at most ``max_size`` sites (a contiguous run if requested)."""
    n = len(region)
    size = int(rng.integers(1, min(max_size, n) + 1))
    if contiguous:
        start = int(rng.integers(0, n - size + 1))
        return Region(region.sites[start : start + size])
    idx = rng.choice(n, size=size, replace=False)
    return Region(tuple(region.sites[i] for i in idx))


def random_local_operator(
    region: Region,
    rng: np.random.Generator,
    max_size: int = 2,
    hermitian: bool = False,
    site_dim: int = 2,
) -> LocalOperator:
    support = random_support(region, rng, max_size)
    dim = site_dim ** len(support)
    m = random_hermitian(dim, rng) if hermitian else ginibre(dim, rng)
    return LocalOperator(support, m, site_dim)


def random_local_unitary(region: Region, rng: np.random.Generator, max_size: int = 2) -> LocalOperator:
    """``exp(iK)`` for a random Hermitian ``K`` on a random local support."""
    k = random_local_operator(region, rng, max_size, hermitian=True)
    w, v = np.linalg.eigh(k.matrix)
    return LocalOperator(k.support, (v * np.exp(1j * w)) @ v.conj().T)


def spawn(seed: int, n: int) -> List[np.random.Generator]:
    """Independent generators for ``n`` parallel tasks."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]

"""Shared fixtures: seeded generators and random Hermitian operators."""

from typing import Callable

import numpy as np
import pytest


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def make_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = 0.5 * (a + a.conj().T)
    return scale * h / np.linalg.norm(h, 2)


def make_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def make_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def random_hermitian(rng: np.random.Generator) -> Callable[..., np.ndarray]:
    return lambda dim, scale=1.0: make_hermitian(rng, dim, scale)


@pytest.fixture
def random_state(rng: np.random.Generator) -> Callable[[int], np.ndarray]:
    return lambda dim: make_state(rng, dim)


@pytest.fixture
def random_density(rng: np.random.Generator) -> Callable[[int], np.ndarray]:
    return lambda dim: make_density(rng, dim)

import numpy as np
import pytest

from deltasub.setfn import GramianModel, ModularFunction, random_gramian_model
from deltasub.verify import frozen_min_eig_witness, frozen_neg_trace_inv_witness


@pytest.fixture
def small_model() -> GramianModel:
    """n=4, N=8, β=1，单位范数高斯列"""
    return random_gramian_model(4, 8, 1.0, seed=7)


@pytest.fixture
def orthonormal_model() -> GramianModel:
    """X = I_4，W_S 为对角阵，各目标都有解析值"""
    return GramianModel(np.eye(4), 1.0)


@pytest.fixture
def modular() -> ModularFunction:
    return ModularFunction([3.0, 2.0, 1.0])


@pytest.fixture
def neg_trace_inv_witness() -> GramianModel:
    return frozen_neg_trace_inv_witness()


@pytest.fixture
def min_eig_witness() -> GramianModel:
    return frozen_min_eig_witness()



"""
小规模稠密对称正定矩阵数值计算

特征值（循环 Jacobi 旋转）、基于 Cholesky 的 log det 与 tr(M⁻¹)、秩一更新。
所有值构造后只读，可在线程间共享。
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_solve

from .const import JACOBI_MAX_SWEEPS, JACOBI_TOL_FACTOR
from .errors import DimensionMismatch, NonConvergence, NotPositiveDefinite


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SymMatrix:
    """
    对称矩阵，构造时以上三角为准镜像到下三角
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DimensionMismatch(f"需要 n×n (n ≥ 1) 矩阵, 实际形状 {a.shape}")
        upper = np.triu(a)
        a = upper + np.triu(a, 1).T
        object.__setattr__(self, "entries", _readonly(a))

    @classmethod
    def identity(cls, n: int, scale: float = 1.0) -> "SymMatrix":
        return cls(scale * np.eye(n))

    @classmethod
    def diag(cls, values) -> "SymMatrix":
        return cls(np.diag(np.asarray(values, dtype=np.float64)))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.entries))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))


@dataclass(frozen=True)
class Spectrum:
    """升序排列的特征值"""

    eigenvalues: np.ndarray

    def __post_init__(self):
        values = np.sort(np.asarray(self.eigenvalues, dtype=np.float64))
        object.__setattr__(self, "eigenvalues", _readonly(values))

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def smallest(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[-1])

    def total(self) -> float:
        return float(np.sum(self.eigenvalues))


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def eigenvalues(m: SymMatrix, tol: Optional[float] = None) -> Spectrum:
    """
    循环 Jacobi 旋转求全部特征值

    Args:
        m: 对称矩阵
        tol: 非对角 Frobenius 残差阈值，默认 1e-12·n·max|entry|

    Returns:
        Spectrum: 升序特征值

    Raises:
        NonConvergence: 扫描预算内残差未降到 tol 以下
    """
    a = np.array(m.entries, dtype=np.float64)
    n = m.n
    scale = m.max_abs()
    if tol is None:
        tol = JACOBI_TOL_FACTOR * n * scale
    if tol <= 0:
        if scale == 0.0:
            return Spectrum(np.zeros(n))
        raise ValueError(f"tol 必须为正: {tol}")

    for _ in range(JACOBI_MAX_SWEEPS):
        if _off_norm(a) < tol:
            return Spectrum(np.diag(a).copy())
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                # A ← JᵀAJ，先列后行
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

    if _off_norm(a) < tol:
        return Spectrum(np.diag(a).copy())
    raise NonConvergence(
        f"Jacobi 在 {JACOBI_MAX_SWEEPS} 次扫描后未收敛, 残差 {_off_norm(a):.3e} ≥ tol {tol:.3e}"
    )


def cholesky(m: SymMatrix) -> np.ndarray:
    """
    下三角 Cholesky 因子 L，满足 L·Lᵀ = m

    Raises:
        NotPositiveDefinite: 主元非正
    """
    try:
        factor = np.linalg.cholesky(m.entries)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"矩阵非正定: {str(e)}") from e
    if not np.all(np.diag(factor) > 0.0):
        raise NotPositiveDefinite("Cholesky 主元非正")
    return _readonly(factor)


def log_det(m: SymMatrix) -> float:
    """log det(m) = 2·Σ ln L_ii"""
    factor = cholesky(m)
    return float(2.0 * np.sum(np.log(np.diag(factor))))


def solve(m: SymMatrix, rhs: np.ndarray) -> np.ndarray:
    """用 Cholesky 因子求解 m·X = rhs"""
    factor = cholesky(m)
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape[0] != m.n:
        raise DimensionMismatch(f"右端维度 {rhs.shape[0]} 与矩阵维度 {m.n} 不一致")
    return cho_solve((factor, True), rhs)


def trace_inverse(m: SymMatrix) -> float:
    """tr(m⁻¹)，对 n 个单位向量做 Cholesky 求解，不显式求逆"""
    return float(np.trace(solve(m, np.eye(m.n))))


def rank1_update(m: SymMatrix, x) -> SymMatrix:
    """m + x·xᵀ"""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != m.n:
        raise DimensionMismatch(f"向量维度 {x.shape[0]} 与矩阵维度 {m.n} 不一致")
    return SymMatrix(m.entries + np.outer(x, x))

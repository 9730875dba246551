"""
SplitMix64 伪随机数发生器

实验中的随机矩阵、随机子集与蒙特卡洛抽样都走这一条流，
给定种子即可跨语言复现。高斯数用 Box–Muller，两个输出都使用。
"""

import math
from typing import List

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """
    64 位 SplitMix 发生器，state 每步加黄金比例常数后混合输出
    """

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        return _mix(self.state)

    def next_float(self) -> float:
        """[0, 1) 上的 53 位均匀数"""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def next_below(self, bound: int) -> int:
        """[0, bound) 上的整数"""
        if bound <= 0:
            raise ValueError(f"bound 必须为正: {bound}")
        return int(self.next_float() * bound)

    def random_mask(self, size: int) -> int:
        """地面集 {0..size-1} 上均匀分布的子集掩码"""
        if size == 0:
            return 0
        return self.next_u64() >> (64 - size)

    def spawn(self, key: int) -> "SplitMix64":
        """按 key 派生独立子流，结果与工作线程数无关"""
        return SplitMix64(_mix((self.state ^ _mix((int(key) * _GOLDEN) & _MASK64)) & _MASK64))

    def u64_array(self, count: int) -> np.ndarray:
        """向量化生成 count 个输出，与逐个调用 next_u64 完全一致"""
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(_GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + count * _GOLDEN) & _MASK64
        return z

    def floats(self, count: int) -> np.ndarray:
        return (self.u64_array(count) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

    def normals(self, count: int) -> np.ndarray:
        """Box–Muller 标准正态样本"""
        pairs = (count + 1) // 2
        u = self.floats(2 * pairs)
        # 1 - u 落在 (0, 1]，log 不会遇到 0
        radius = np.sqrt(-2.0 * np.log(1.0 - u[0::2]))
        angle = 2.0 * math.pi * u[1::2]
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:count]

    def sample_subset(self, size: int, k: int) -> List[int]:
        """Fisher–Yates 部分洗牌，返回 k 个不重复元素（按抽取顺序）"""
        if not 0 <= k <= size:
            raise ValueError(f"k 必须在 [0, {size}] 内: {k}")
        pool = list(range(size))
        for i in range(k):
            j = i + self.next_below(size - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

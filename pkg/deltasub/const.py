# 常量定义
"""
边际单调性容差（ε_mono）
"""
EPS_MONO = 1e-9
"""
分母保护阈值（ε_den），分子分母同时低于该值时视为 0/0 跳过
"""
EPS_DEN = 1e-12
"""
一般性质校验的容差
"""
CHECK_TOL = 1e-9
"""
反例搜索只接受违反量不小于该值的实例，排除舍入级的假反例
"""
WITNESS_MIN_GAP = 1e-6

# Jacobi 特征值求解
"""
最大扫描次数
"""
JACOBI_MAX_SWEEPS = 100
"""
默认收敛阈值系数：tol = 系数 * n * max|entry|
"""
JACOBI_TOL_FACTOR = 1e-12

# 规模限制
"""
子集掩码最多支持 64 个元素
"""
MAX_GROUND_SIZE = 64
"""
TabularFunction 及单指数穷举（值表）的上限
"""
TABLE_MAX_N = 16
"""
双重穷举（S, T 对）的上限
"""
PAIR_MAX_N = 12
"""
exhaustive_opt 的枚举上限，最坏约 1700 万次评估
"""
EXHAUSTIVE_OPT_MAX_N = 24
"""
默认精确计算阈值
"""
DEFAULT_EXACT_THRESHOLD = 12

"""
小 α 级数展开阈值
"""
SMALL_ALPHA = 1e-8
"""
k → ∞ 的极限形式标记
"""
LIMIT = "limit"

"""
CLI 退出码
"""
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VERIFY_FAILED = 2

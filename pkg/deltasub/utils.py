"""
工具函数模块
包含输入 CSV 解析、结果序列化，以及异步文件写出
"""

import asyncio
import csv
import io
import json
import math
import os
from typing import Any, Dict, List, Mapping, Optional, Sequence

import aiofiles
import numpy as np

from .errors import ParseError
from . import logger


# ===== 输入解析 =====
def _parse_float(text: str, line: int, column: int) -> float:
    try:
        value = float(text.strip())
    except ValueError:
        raise ParseError(f"无法解析为实数: {text!r}", line, column) from None
    if not math.isfinite(value):
        raise ParseError(f"数值非有限: {text!r}", line, column)
    return value


def parse_matrix_csv(text: str) -> np.ndarray:
    """
    解析 n 行 × N 列、无表头的逗号分隔矩阵

    Raises:
        ParseError: 含行列位置
    """
    rows: List[List[float]] = []
    width = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(f"列数 {len(cells)} 与首行 {width} 不一致", line_no)
        rows.append([_parse_float(cell, line_no, col) for col, cell in enumerate(cells, start=1)])
    if not rows:
        raise ParseError("文件为空", 1)
    return np.array(rows, dtype=np.float64)


def parse_tabular_csv(text: str) -> np.ndarray:
    """
    解析 "mask,value" 行，mask 为十进制子集编码，返回长度 2^N 的取值表

    Raises:
        ParseError: 格式错误、重复或缺失的掩码
    """
    entries: Dict[int, float] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 2:
            raise ParseError(f"每行须为 mask,value, 实际 {len(cells)} 个字段", line_no)
        try:
            mask = int(cells[0].strip())
        except ValueError:
            raise ParseError(f"掩码不是十进制整数: {cells[0]!r}", line_no, 1) from None
        if mask < 0:
            raise ParseError(f"掩码不能为负: {mask}", line_no, 1)
        if mask in entries:
            raise ParseError(f"掩码重复: {mask}", line_no, 1)
        entries[mask] = _parse_float(cells[1], line_no, 2)
    if not entries:
        raise ParseError("文件为空", 1)
    size = max(entries).bit_length()
    missing = [mask for mask in range(1 << size) if mask not in entries]
    if missing:
        raise ParseError(f"缺少 {len(missing)} 个掩码, 例如 {missing[0]}", len(entries))
    return np.array([entries[mask] for mask in range(1 << size)], dtype=np.float64)


def read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def load_matrix_csv(path: str) -> np.ndarray:
    return parse_matrix_csv(read_text(path))


def load_tabular_csv(path: str) -> np.ndarray:
    return parse_tabular_csv(read_text(path))


# ===== 结果序列化 =====
def _plain(value: Any) -> Any:
    """numpy 标量、非有限浮点转为可写入 JSON 的值"""
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def to_json_text(data: Any, indent: int = 2) -> str:
    """UTF-8 JSON，键按插入顺序输出"""
    return json.dumps(_plain(data), ensure_ascii=False, indent=indent) + "\n"


def to_csv_text(rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    """带表头的 CSV，缺失值写为空"""
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        cells = []
        for column in columns:
            value = _plain(row.get(column))
            cells.append("" if value is None else (repr(value) if isinstance(value, float) else value))
        writer.writerow(cells)
    return buffer.getvalue()


# ===== 异步文件操作函数 =====
async def async_makedirs(path: str, exist_ok: bool = True) -> None:
    """
    异步创建目录

    Args:
        path: 要创建的目录路径
        exist_ok: 如果目录已存在是否报错
    """
    if not path:
        return
    loop = asyncio.get_running_loop()
    await loop.run_in_executor(None, lambda: os.makedirs(path, exist_ok=exist_ok))


async def async_write_file(file_path: str, content: str, encoding: str = "utf-8") -> None:
    """
    异步写入文本文件，自动创建父目录

    Args:
        file_path: 文件路径
        content: 文本内容
        encoding: 文件编码
    """
    try:
        await async_makedirs(os.path.dirname(file_path))
        async with aiofiles.open(file_path, "w", encoding=encoding) as f:
            await f.write(content)
        logger.info(f"结果已写入: {file_path}")
    except OSError as e:
        logger.error(f"写入文件失败: {file_path}, 错误: {str(e)}")
        raise


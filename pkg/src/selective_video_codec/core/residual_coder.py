"""Преобразование и квантование остатков, шаблон знаков коэффициентов.

Базис - целочисленное приближение DCT-II с 8-битной точностью:
T = round(64 * sqrt(N) * D), где D - ортонормированная матрица DCT-II.
Прямое преобразование c = T X T^T / (4096 N) дает ортонормированные
коэффициенты. Деквантование и обратное преобразование целочисленные.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np
import numpy.typing as npt

from ..components.syntax_elements import SignPattern

SUPPORTED_SIZES = (4, 8, 16, 32)
LEVEL_SCALE = (40, 45, 51, 57, 64, 72)
SCALE_BITS = 6
BASIS_SCALE = 64
INTRA_DEADZONE = 1.0 / 3.0
INTER_DEADZONE = 1.0 / 6.0


def check_qp(qp: int) -> int:
    if not 0 <= qp <= 51:
        raise ValueError(f"QP вне диапазона [0, 51]: {qp}")
    return qp


def level_scale(qp: int) -> int:
    """Целочисленный множитель деквантования; шаг = level_scale / 64."""
    check_qp(qp)
    return LEVEL_SCALE[qp % 6] << (qp // 6)


def qstep(qp: int) -> float:
    """Шаг квантования, 2^((qp - 4) / 6) с точностью таблицы LEVEL_SCALE."""
    return level_scale(qp) / (1 << SCALE_BITS)


@lru_cache(maxsize=None)
def transform_matrix(size: int) -> npt.NDArray[np.int64]:
    """Целочисленная матрица DCT-II размера size x size."""
    if size not in SUPPORTED_SIZES:
        raise ValueError(f"Размер преобразования {size} не поддерживается: {SUPPORTED_SIZES}")
    k = np.arange(size)[:, None]
    n = np.arange(size)[None, :]
    norm = np.where(k == 0, math.sqrt(1.0 / size), math.sqrt(2.0 / size))
    basis = norm * np.cos(math.pi * (2 * n + 1) * k / (2 * size))
    matrix = np.round(BASIS_SCALE * math.sqrt(size) * basis).astype(np.int64)
    matrix.setflags(write=False)
    return matrix


@lru_cache(maxsize=None)
def diagonal_scan(size: int) -> Tuple[Tuple[int, int], ...]:
    """Диагональный порядок сканирования вверх-вправо: позиции (row, col)."""
    positions: List[Tuple[int, int]] = []
    for diagonal in range(2 * size - 1):
        for col in range(max(0, diagonal - size + 1), min(diagonal, size - 1) + 1):
            positions.append((diagonal - col, col))
    return tuple(positions)


def _scan_indices(size: int) -> Tuple[npt.NDArray[np.intp], npt.NDArray[np.intp]]:
    scan = diagonal_scan(size)
    return np.array([p[0] for p in scan]), np.array([p[1] for p in scan])


@dataclass(eq=False)
class CoeffBlock:
    """Квантованные уровни блока в диагональном порядке сканирования."""
    size: int
    levels: npt.NDArray[np.int64]

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=np.int64)
        if self.levels.shape != (self.size * self.size,):
            raise ValueError(
                f"Ожидалось {self.size * self.size} уровней, получено {self.levels.size}"
            )

    @property
    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.levels))

    def to_matrix(self) -> npt.NDArray[np.int64]:
        """Уровни в виде матрицы size x size."""
        rows, cols = _scan_indices(self.size)
        matrix = np.zeros((self.size, self.size), dtype=np.int64)
        matrix[rows, cols] = self.levels
        return matrix

    @classmethod
    def from_matrix(cls, matrix: npt.NDArray) -> 'CoeffBlock':
        size = matrix.shape[0]
        rows, cols = _scan_indices(size)
        return cls(size=size, levels=np.asarray(matrix)[rows, cols])

    @classmethod
    def zeros(cls, size: int) -> 'CoeffBlock':
        return cls(size=size, levels=np.zeros(size * size, dtype=np.int64))


class ResidualCoder:
    """Прямое/обратное преобразование с мертвой зоной квантования."""

    def __init__(self, qp: int = 24):
        self.qp = check_qp(qp)
        self.scale = level_scale(qp)
        self.step = qstep(qp)

    def forward_transform(self, residual: npt.NDArray) -> npt.NDArray[np.float64]:
        """Ортонормированные коэффициенты DCT-II (без квантования)."""
        size = residual.shape[0]
        t = transform_matrix(size)
        x = np.asarray(residual, dtype=np.int64)
        return (t @ x @ t.T) / float(BASIS_SCALE * BASIS_SCALE * size)

    def transform_quant(self, residual: npt.NDArray, intra: bool = True) -> CoeffBlock:
        """level = sign(c) * floor(|c| / step + f), f = 1/3 для intra и 1/6 для inter."""
        if residual.ndim != 2 or residual.shape[0] != residual.shape[1]:
            raise ValueError(f"Остаток должен быть квадратным блоком: {residual.shape}")
        coeffs = self.forward_transform(residual)
        deadzone = INTRA_DEADZONE if intra else INTER_DEADZONE
        levels = np.sign(coeffs) * np.floor(np.abs(coeffs) / self.step + deadzone)
        return CoeffBlock.from_matrix(levels.astype(np.int64))

    def dequantize(self, coeffs: CoeffBlock) -> npt.NDArray[np.float64]:
        """Восстановленные коэффициенты level * step."""
        return coeffs.to_matrix() * self.step

    def dequant_itransform(self, coeffs: CoeffBlock) -> npt.NDArray[np.int32]:
        """Целочисленное восстановление остатка, одинаковое у кодера и декодера."""
        size = coeffs.size
        if coeffs.nonzero_count == 0:
            return np.zeros((size, size), dtype=np.int32)
        t = transform_matrix(size)
        scaled = coeffs.to_matrix() * self.scale
        numerator = t.T @ scaled @ t
        denominator = BASIS_SCALE * BASIS_SCALE * size << SCALE_BITS
        return ((numerator + denominator // 2) // denominator).astype(np.int32)


def extract_sign_pattern(coeffs: CoeffBlock) -> Tuple[SignPattern, npt.NDArray[np.int64]]:
    """Отделяет знаки ненулевых уровней (1 = отрицательный) от модулей."""
    nonzero = coeffs.levels[coeffs.levels != 0]
    pattern = SignPattern(tuple(int(v < 0) for v in nonzero))
    return pattern, np.abs(coeffs.levels)


def apply_sign_pattern(pattern: SignPattern, magnitudes: npt.NDArray, size: int) -> CoeffBlock:
    """Обратное к extract_sign_pattern."""
    levels = np.asarray(magnitudes, dtype=np.int64).copy()
    nonzero = np.flatnonzero(levels)
    if len(nonzero) != len(pattern):
        raise ValueError(
            f"Длина шаблона знаков {len(pattern)} не равна числу ненулевых уровней {len(nonzero)}"
        )
    signs = np.array(pattern.bits, dtype=bool)
    levels[nonzero[signs]] *= -1
    return CoeffBlock(size=size, levels=levels)


# Функции для обратной совместимости
def transform_quant(residual: npt.NDArray, qp: int, intra: bool = True) -> CoeffBlock:
    """Преобразование и квантование блока остатка."""
    return ResidualCoder(qp).transform_quant(residual, intra)


def dequant_itransform(coeffs: CoeffBlock, qp: int) -> npt.NDArray[np.int32]:
    """Деквантование и обратное преобразование."""
    return ResidualCoder(qp).dequant_itransform(coeffs)

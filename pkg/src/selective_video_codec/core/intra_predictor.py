"""Внутрикадровое предсказание: 67 режимов, список MPM, выбор режима.

Режимы: 0 - planar, 1 - DC, 2..66 - угловые. Углы заданы в 1/32 пикселя,
режимы >= 34 предсказывают от верхней строки, режимы < 34 - от левого столбца.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from ..components.syntax_elements import REM_MODE_MAX, IpmSyntax

PLANAR = 0
DC = 1
VERTICAL = 50
HORIZONTAL = 18
DIAGONAL = 34
NUM_INTRA_MODES = 67
MPM_LIST_SIZE = 6
DEFAULT_MPM_FILL = (PLANAR, DC, VERTICAL, HORIZONTAL, 46, 54)
MID_LEVEL = 128

# intraPredAngle для режимов 2..66
INTRA_PRED_ANGLE = [
    32, 29, 26, 23, 21, 19, 17, 15, 13, 11, 9, 7, 5, 3, 2, 1,            # 2-17
    0, -1, -2, -3, -5, -7, -9, -11, -13, -15, -17, -19, -21, -23, -26,   # 18-32
    -29, -32, -29, -26, -23, -21, -19, -17, -15, -13, -11, -9, -7, -5,   # 33-46
    -3, -2, -1, 0, 1, 2, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21, 23, 26,     # 47-64
    29, 32,                                                              # 65-66
]


def check_mode(mode: int) -> int:
    if not 0 <= mode < NUM_INTRA_MODES:
        raise ValueError(f"Режим внутрикадрового предсказания вне [0, 66]: {mode}")
    return mode


@dataclass
class ReferenceSamples:
    """Опорные отсчеты блока N x N.

    top[0] - угловой отсчет, top[1..2N] - строка над блоком (включая продолжение вправо);
    left[0] - угловой отсчет, left[1..2N] - столбец слева (включая продолжение вниз).
    """
    top: npt.NDArray[np.int32]
    left: npt.NDArray[np.int32]

    @property
    def size(self) -> int:
        return (len(self.top) - 1) // 2

    @classmethod
    def constant(cls, value: int, size: int) -> 'ReferenceSamples':
        return cls(
            top=np.full(2 * size + 1, value, dtype=np.int32),
            left=np.full(2 * size + 1, value, dtype=np.int32),
        )


def gather_references(plane: npt.NDArray, x: int, y: int, size: int,
                      available: Optional[npt.NDArray[np.bool_]] = None) -> ReferenceSamples:
    """Собирает опорные отсчеты; недоступные заменяются средним уровнем 128.

    Args:
        plane: Плоскость отсчетов (восстановленная или исходная)
        x, y: Левый верхний угол блока
        size: Размер блока
        available: Маска уже восстановленных отсчетов; None - доступно все внутри кадра
    """
    height, width = plane.shape

    def fetch(xs: npt.NDArray, ys: npt.NDArray) -> npt.NDArray[np.int32]:
        inside = (xs >= 0) & (xs < width) & (ys >= 0) & (ys < height)
        values = np.full(xs.shape, MID_LEVEL, dtype=np.int32)
        cx, cy = xs[inside], ys[inside]
        ok = np.ones(cx.shape, dtype=bool) if available is None else available[cy, cx]
        values[np.flatnonzero(inside)[ok]] = plane[cy[ok], cx[ok]]
        return values

    offsets = np.arange(-1, 2 * size)
    top = fetch(x + offsets, np.full_like(offsets, y - 1))
    left = fetch(np.full_like(offsets, x - 1), y + offsets)
    return ReferenceSamples(top=top, left=left)


def build_mpm_list(above: Optional[int], left: Optional[int]) -> List[int]:
    """Список из 6 различных наиболее вероятных режимов.

    [planar], затем левый и верхний режимы, соседи +-1 каждого углового режима,
    затем список по умолчанию [0, 1, 50, 18, 46, 54] без повторов.
    """
    mpm = [PLANAR]

    def push(mode: int):
        if len(mpm) < MPM_LIST_SIZE and mode not in mpm:
            mpm.append(mode)

    for neighbour in (left, above):
        if neighbour is not None:
            push(check_mode(neighbour))

    for mode in list(mpm):
        if mode > DC:
            push(((mode - 2 - 1) % 65) + 2)
            push(((mode - 2 + 1) % 65) + 2)

    for mode in DEFAULT_MPM_FILL:
        push(mode)

    return mpm


class IntraPredictor:
    """Предсказание блока по опорным отсчетам и выбор режима по SAD."""

    def predict_intra(self, refs: ReferenceSamples, mode: int, size: int) -> npt.NDArray[np.int32]:
        """Блок предсказания size x size для заданного режима."""
        check_mode(mode)
        if mode == PLANAR:
            return self._predict_planar(refs, size)
        if mode == DC:
            return self._predict_dc(refs, size)
        return self._predict_angular(refs, mode, size)

    @staticmethod
    def _predict_dc(refs: ReferenceSamples, size: int) -> npt.NDArray[np.int32]:
        total = int(refs.top[1:size + 1].sum()) + int(refs.left[1:size + 1].sum())
        dc_value = (total + size) // (2 * size)
        return np.full((size, size), dc_value, dtype=np.int32)

    @staticmethod
    def _predict_planar(refs: ReferenceSamples, size: int) -> npt.NDArray[np.int32]:
        log2_size = size.bit_length() - 1
        top = refs.top[1:size + 1][None, :]
        left = refs.left[1:size + 1][:, None]
        top_right = int(refs.top[size + 1])
        bottom_left = int(refs.left[size + 1])
        xs = np.arange(size)[None, :]
        ys = np.arange(size)[:, None]
        horizontal = (size - 1 - xs) * left + (xs + 1) * top_right
        vertical = (size - 1 - ys) * top + (ys + 1) * bottom_left
        return ((horizontal + vertical + size) >> (log2_size + 1)).astype(np.int32)

    @staticmethod
    def _predict_angular(refs: ReferenceSamples, mode: int, size: int) -> npt.NDArray[np.int32]:
        angle = INTRA_PRED_ANGLE[mode - 2]
        is_vertical = mode >= DIAGONAL
        main, side = (refs.top, refs.left) if is_vertical else (refs.left, refs.top)

        # ref[k + size] - логический индекс k в диапазоне [-size, 2*size + 1]
        ref = np.empty(3 * size + 2, dtype=np.int32)
        ref[size:3 * size + 1] = main
        ref[3 * size + 1] = main[-1]
        ref[:size] = main[0]

        if angle < 0:
            inv_angle = -round(8192 / -angle)
            for k in range(-1, ((size * angle) >> 5) - 1, -1):
                j = min((k * inv_angle + 128) >> 8, 2 * size)
                ref[k + size] = side[j]

        rows = np.arange(size)[:, None]
        cols = np.arange(size)[None, :]
        position = (rows + 1) * angle
        index = position >> 5
        fraction = position & 31
        base = cols + index + 1 + size
        projected = ((32 - fraction) * ref[base] + fraction * ref[base + 1] + 16) >> 5
        projected = projected.astype(np.int32)
        return projected if is_vertical else projected.T.copy()

    def select_intra_mode(self, block: npt.NDArray, refs: ReferenceSamples,
                          mpm_list: Sequence[int]) -> Tuple[int, IpmSyntax]:
        """Режим с минимальным SAD (при равенстве - меньший индекс) и его синтаксис."""
        size = block.shape[0]
        target = block.astype(np.int32)
        costs = [
            int(np.abs(target - self.predict_intra(refs, mode, size)).sum())
            for mode in range(NUM_INTRA_MODES)
        ]
        mode = int(np.argmin(costs))
        return mode, ipm_syntax_for_mode(mode, mpm_list)


def ipm_syntax_for_mode(mode: int, mpm_list: Sequence[int]) -> IpmSyntax:
    """Индекс в списке MPM либо ранг среди 61 оставшегося режима."""
    check_mode(mode)
    if mode in mpm_list:
        return IpmSyntax(is_mpm=True, mpm_index=list(mpm_list).index(mode))
    rank = sum(1 for m in range(mode) if m not in mpm_list)
    return IpmSyntax(is_mpm=False, rem_mode=rank)


def mode_from_ipm_syntax(syntax: IpmSyntax, mpm_list: Sequence[int]) -> int:
    """Обратное отображение синтаксиса в режим на стороне декодера."""
    if syntax.is_mpm:
        return int(mpm_list[syntax.mpm_index])
    remaining = [m for m in range(NUM_INTRA_MODES) if m not in mpm_list]
    if len(remaining) != REM_MODE_MAX + 1:
        raise ValueError(f"Список MPM должен содержать {MPM_LIST_SIZE} разных режимов: {list(mpm_list)}")
    return remaining[syntax.rem_mode]


# Функции для обратной совместимости
def predict_intra(refs: ReferenceSamples, mode: int, size: int) -> npt.NDArray[np.int32]:
    """Блок предсказания для режима mode."""
    return IntraPredictor().predict_intra(refs, mode, size)


def select_intra_mode(block: npt.NDArray, refs: ReferenceSamples,
                      mpm_list: Sequence[int]) -> Tuple[int, IpmSyntax]:
    """Выбор режима по SAD."""
    return IntraPredictor().select_intra_mode(block, refs, mpm_list)

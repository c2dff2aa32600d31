"""Межкадровое предсказание: полный перебор по SAD и синтаксис MVD."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view

from ..components.syntax_elements import MvdSyntax
from .frame_io import FrameBuffer


@dataclass(frozen=True)
class MotionVector:
    """Вектор движения в целых пикселях."""
    mvx: int = 0
    mvy: int = 0

    def __add__(self, other: 'MotionVector') -> 'MotionVector':
        return MotionVector(self.mvx + other.mvx, self.mvy + other.mvy)

    def __sub__(self, other: 'MotionVector') -> 'MotionVector':
        return MotionVector(self.mvx - other.mvx, self.mvy - other.mvy)

    @property
    def chroma(self) -> 'MotionVector':
        """Вектор для плоскостей 4:2:0 (деление с округлением вниз)."""
        return MotionVector(self.mvx >> 1, self.mvy >> 1)


ZERO_MV = MotionVector(0, 0)


def fetch_block(plane: npt.NDArray, x: int, y: int, size: int) -> npt.NDArray[np.int32]:
    """Блок size x size с координатами, ограниченными границами плоскости.

    Координаты вне плоскости заменяются ближайшими краевыми отсчетами,
    поэтому любой вектор (в том числе расшифрованный неверным ключом) допустим.
    """
    height, width = plane.shape
    ys = np.clip(np.arange(y, y + size), 0, height - 1)
    xs = np.clip(np.arange(x, x + size), 0, width - 1)
    return plane[np.ix_(ys, xs)].astype(np.int32)


class InterPredictor:
    """Поиск движения и компенсация по предыдущему восстановленному кадру."""

    def __init__(self, search_range: int = 8):
        if search_range < 0:
            raise ValueError(f"Диапазон поиска не может быть отрицательным: {search_range}")
        self.search_range = search_range

    def motion_search(self, block: npt.NDArray, reference: FrameBuffer,
                      origin: Tuple[int, int]) -> MotionVector:
        """Полный перебор векторов в [-range, range]^2 с минимальным SAD.

        Рассматриваются только смещения, при которых блок целиком внутри кадра.
        При равном SAD выигрывает меньший |mvx|+|mvy|, затем меньший mvy, затем mvx.
        """
        x, y = origin
        size = block.shape[0]
        plane = reference.y_plane
        height, width = plane.shape
        r = self.search_range

        min_dx, max_dx = max(-r, -x), min(r, width - size - x)
        min_dy, max_dy = max(-r, -y), min(r, height - size - y)
        if min_dx > max_dx or min_dy > max_dy:
            return ZERO_MV

        region = plane[y + min_dy:y + max_dy + size, x + min_dx:x + max_dx + size]
        windows = sliding_window_view(region.astype(np.int32), (size, size))
        sad = np.abs(windows - block.astype(np.int32)[None, None]).sum(axis=(2, 3))

        dy, dx = np.meshgrid(np.arange(min_dy, max_dy + 1), np.arange(min_dx, max_dx + 1),
                             indexing='ij')
        order = np.lexsort((dx.ravel(), dy.ravel(), (np.abs(dx) + np.abs(dy)).ravel(),
                            sad.ravel()))
        best = order[0]
        return MotionVector(int(dx.ravel()[best]), int(dy.ravel()[best]))

    @staticmethod
    def predict_inter(reference: FrameBuffer, origin: Tuple[int, int], size: int,
                      mv: MotionVector) -> Tuple[npt.NDArray[np.int32], ...]:
        """Предсказание яркости и двух цветоразностных блоков."""
        x, y = origin
        chroma_mv = mv.chroma
        luma = fetch_block(reference.y_plane, x + mv.mvx, y + mv.mvy, size)
        cx, cy, csize = x // 2 + chroma_mv.mvx, y // 2 + chroma_mv.mvy, size // 2
        cb = fetch_block(reference.cb_plane, cx, cy, csize)
        cr = fetch_block(reference.cr_plane, cx, cy, csize)
        return luma, cb, cr


def compute_mvd(mv: MotionVector, predictor: MotionVector) -> Tuple[int, int]:
    """Покомпонентная разность mv - predictor."""
    delta = mv - predictor
    return delta.mvx, delta.mvy


def mvd_to_syntax(mvd_component: int) -> MvdSyntax:
    """Компонента MVD -> флаги abs_gr0/abs_gr1, abs_minus_2 и знак (1 = отрицательный)."""
    magnitude = abs(mvd_component)
    if magnitude == 0:
        return MvdSyntax(abs_gr0=False)
    sign = 1 if mvd_component < 0 else 0
    if magnitude == 1:
        return MvdSyntax(abs_gr0=True, abs_gr1=False, sign=sign)
    return MvdSyntax(abs_gr0=True, abs_gr1=True, abs_minus_2=magnitude - 2, sign=sign)


def syntax_to_mvd(syntax: MvdSyntax) -> int:
    """Обратное к mvd_to_syntax."""
    if not syntax.abs_gr0:
        return 0
    magnitude = 1 if not syntax.abs_gr1 else syntax.abs_minus_2 + 2
    return -magnitude if syntax.sign else magnitude


# Функция для обратной совместимости
def motion_search(block: npt.NDArray, reference: FrameBuffer, origin: Tuple[int, int],
                  search_range: int = 8) -> MotionVector:
    """Полный перебор по SAD."""
    return InterPredictor(search_range).motion_search(block, reference, origin)

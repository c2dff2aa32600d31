"""Метрики качества и визуальной защищенности: PSNR, SSIM, EDR.

Все метрики считаются по плоскости яркости, обрезанной до исходного размера.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import cv2
import numpy as np
import numpy.typing as npt

from ..components.syntax_elements import ElementClass
from .frame_io import FrameBuffer
from .pipeline import EncryptionLedger

MAX_VALUE = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
DEFAULT_EDGE_THRESHOLD = 64
PSNR_SENTINEL = 99.99

FrameLike = Union[FrameBuffer, npt.NDArray]


def _luma(frame: FrameLike) -> npt.NDArray:
    if isinstance(frame, FrameBuffer):
        return frame.cropped_luma()
    return np.asarray(frame)


def _check_pair(ref: npt.NDArray, test: npt.NDArray):
    if ref.shape != test.shape:
        raise ValueError(f"Размеры кадров не совпадают: {ref.shape} и {test.shape}")


@dataclass
class EdgeMap:
    """Бинарная карта границ (1 - граничный пиксель) и параметры детектора."""
    values: npt.NDArray[np.uint8]
    threshold: int = DEFAULT_EDGE_THRESHOLD
    detector: str = 'sobel3'

    @property
    def edge_count(self) -> int:
        return int(self.values.sum())


@dataclass
class MetricsReport:
    """Покадровые метрики и сводка по потоку."""
    psnr: List[float] = field(default_factory=list)
    ssim: List[float] = field(default_factory=list)
    edr: List[float] = field(default_factory=list)
    frame_types: List[str] = field(default_factory=list)
    bitrate_delta: Optional[float] = None
    encryption_space: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    @property
    def frame_count(self) -> int:
        return len(self.psnr)

    @property
    def mean_psnr(self) -> float:
        """Среднее PSNR; бесконечные значения заменяются на 99.99."""
        values = [PSNR_SENTINEL if math.isinf(v) else v for v in self.psnr]
        return float(np.mean(values)) if values else 0.0

    @property
    def mean_ssim(self) -> float:
        return float(np.mean(self.ssim)) if self.ssim else 0.0

    @property
    def mean_edr(self) -> float:
        return float(np.mean(self.edr)) if self.edr else 0.0


class QualityMetrics:
    """Вычисление метрик для пар кадров."""

    def __init__(self, edge_threshold: int = DEFAULT_EDGE_THRESHOLD, max_workers: int = 2):
        self.edge_threshold = edge_threshold
        self.max_workers = max_workers

    def psnr(self, ref: FrameLike, test: FrameLike) -> float:
        """10*log10(255^2/MSE); для MSE = 0 - math.inf."""
        a, b = _luma(ref), _luma(test)
        _check_pair(a, b)
        mse = float(np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2))
        if mse == 0.0:
            return math.inf
        return 10.0 * math.log10(MAX_VALUE * MAX_VALUE / mse)

    def ssim(self, ref: FrameLike, test: FrameLike) -> float:
        """Среднее локального SSIM, гауссово окно 11x11, sigma = 1.5."""
        a, b = _luma(ref), _luma(test)
        _check_pair(a, b)
        if min(a.shape) < SSIM_WINDOW:
            raise ValueError(f"Кадр {a.shape} меньше окна SSIM {SSIM_WINDOW}x{SSIM_WINDOW}")

        c1 = (SSIM_K1 * MAX_VALUE) ** 2
        c2 = (SSIM_K2 * MAX_VALUE) ** 2
        ksize = (SSIM_WINDOW, SSIM_WINDOW)
        i1 = a.astype(np.float64)
        i2 = b.astype(np.float64)

        mu1 = cv2.GaussianBlur(i1, ksize, SSIM_SIGMA, borderType=cv2.BORDER_REFLECT_101)
        mu2 = cv2.GaussianBlur(i2, ksize, SSIM_SIGMA, borderType=cv2.BORDER_REFLECT_101)
        sigma1_sq = cv2.GaussianBlur(i1 * i1, ksize, SSIM_SIGMA,
                                     borderType=cv2.BORDER_REFLECT_101) - mu1 ** 2
        sigma2_sq = cv2.GaussianBlur(i2 * i2, ksize, SSIM_SIGMA,
                                     borderType=cv2.BORDER_REFLECT_101) - mu2 ** 2
        sigma12 = cv2.GaussianBlur(i1 * i2, ksize, SSIM_SIGMA,
                                   borderType=cv2.BORDER_REFLECT_101) - mu1 * mu2

        ssim_map = ((2 * mu1 * mu2 + c1) * (2 * sigma12 + c2)) / \
            ((mu1 ** 2 + mu2 ** 2 + c1) * (sigma1_sq + sigma2_sq + c2))
        return float(np.mean(ssim_map))

    def edge_map(self, frame: FrameLike) -> EdgeMap:
        """Собель 3x3: 0.5*|gx| + 0.5*|gy| (8 бит), граница при значении >= порога."""
        luma = _luma(frame).astype(np.uint8)
        grad_x = cv2.Sobel(luma, cv2.CV_16S, 1, 0, ksize=3)
        grad_y = cv2.Sobel(luma, cv2.CV_16S, 0, 1, ksize=3)
        magnitude = cv2.addWeighted(cv2.convertScaleAbs(grad_x), 0.5,
                                    cv2.convertScaleAbs(grad_y), 0.5, 0)
        values = (magnitude >= self.edge_threshold).astype(np.uint8)
        return EdgeMap(values=values, threshold=self.edge_threshold)

    @staticmethod
    def edr_from_maps(original: Union[EdgeMap, npt.NDArray],
                      encrypted: Union[EdgeMap, npt.NDArray]) -> float:
        """sum|P - P'| / sum|P + P'|; 0, если обе карты пусты."""
        p = np.asarray(original.values if isinstance(original, EdgeMap) else original,
                       dtype=np.int64)
        q = np.asarray(encrypted.values if isinstance(encrypted, EdgeMap) else encrypted,
                       dtype=np.int64)
        _check_pair(p, q)
        denominator = int(np.abs(p + q).sum())
        if denominator == 0:
            return 0.0
        return int(np.abs(p - q).sum()) / denominator

    def edr(self, ref: FrameLike, test: FrameLike) -> float:
        """Доля несовпадающих граничных пикселей."""
        a, b = _luma(ref), _luma(test)
        _check_pair(a, b)
        return self.edr_from_maps(self.edge_map(a), self.edge_map(b))

    def frame_metrics(self, ref: FrameLike, test: FrameLike) -> Tuple[float, float, float]:
        return self.psnr(ref, test), self.ssim(ref, test), self.edr(ref, test)

    def analyze(self, ref_frames: Sequence[FrameLike],
                test_frames: Sequence[FrameLike]) -> MetricsReport:
        """Покадровые PSNR/SSIM/EDR, параллельно по кадрам."""
        if len(ref_frames) != len(test_frames):
            raise ValueError(
                f"Разное число кадров: {len(ref_frames)} и {len(test_frames)}"
            )

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            results = list(executor.map(self.frame_metrics, ref_frames, test_frames))

        report = MetricsReport()
        for psnr_db, ssim_value, edr_value in results:
            report.psnr.append(psnr_db)
            report.ssim.append(ssim_value)
            report.edr.append(edr_value)
        report.frame_types = [
            f.frame_type or '' if isinstance(f, FrameBuffer) else '' for f in test_frames
        ]
        return report


def bitrate_change(bits_plain: int, bits_encrypted: int) -> float:
    """(bits_encrypted - bits_plain) / bits_plain."""
    if bits_plain <= 0:
        raise ValueError(f"Базовый размер потока должен быть положительным: {bits_plain}")
    return (bits_encrypted - bits_plain) / bits_plain


def encryption_space(ledger: EncryptionLedger,
                     frame_type: Optional[str] = None) -> Dict[str, Tuple[int, int]]:
    """(элементы, биты) по каждому классу и итог TOTAL."""
    space = {
        cls.name: (ledger.elements(cls, frame_type), ledger.bits(cls, frame_type))
        for cls in ElementClass.members()
    }
    space['TOTAL'] = (ledger.elements(None, frame_type), ledger.bits(None, frame_type))
    return space


# Функции для обратной совместимости
def psnr(ref: FrameLike, test: FrameLike) -> float:
    return QualityMetrics().psnr(ref, test)


def ssim(ref: FrameLike, test: FrameLike) -> float:
    return QualityMetrics().ssim(ref, test)


def edge_map(frame: FrameLike, threshold: int = DEFAULT_EDGE_THRESHOLD) -> EdgeMap:
    return QualityMetrics(edge_threshold=threshold).edge_map(frame)


def edr(ref: FrameLike, test: FrameLike, threshold: int = DEFAULT_EDGE_THRESHOLD) -> float:
    return QualityMetrics(edge_threshold=threshold).edr(ref, test)


edr_from_maps = QualityMetrics.edr_from_maps

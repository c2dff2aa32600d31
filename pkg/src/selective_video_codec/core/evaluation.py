"""Серия экспериментов: сетка QP x наборы шифруемых элементов."""

import secrets
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from ..components.syntax_elements import ElementClass
from .frame_io import FrameBuffer
from .pipeline import QP_PRESETS, CodecConfig, EncodeJob, VideoDecoder, VideoEncoder
from .quality_metrics import MetricsReport, QualityMetrics, bitrate_change
from .selective_crypto import KEY_BYTES, EncryptionConfig

PRESETS: Dict[str, ElementClass] = {
    'ipm': ElementClass.LUMA_IPM,
    'mvd': ElementClass.MVD_VALUE | ElementClass.MVD_SIGN,
    'rsign': ElementClass.RESIDUAL_SIGN,
    'all': (ElementClass.LUMA_IPM | ElementClass.MVD_VALUE
            | ElementClass.MVD_SIGN | ElementClass.RESIDUAL_SIGN),
}


@dataclass
class ExperimentRow:
    """Одна строка результатов для пары (qp, набор)."""
    qp: int
    preset: str
    orig_psnr: float
    orig_ssim: float
    orig_edr: float
    enc_psnr: float
    enc_ssim: float
    enc_edr: float
    plain_bits: int
    enc_bits: int
    bitrate_delta: float
    enc_elements: int
    enc_space_bits: int
    frame_report: Optional[MetricsReport] = None
    plain_report: Optional[MetricsReport] = None


class ExperimentRunner:
    """Кодирует клип без шифрования и с каждым набором, декодирует без ключа и сравнивает."""

    def __init__(self, qps: Sequence[int] = QP_PRESETS, presets: Optional[Sequence[str]] = None,
                 gop_size: int = 8, ctu_size: int = 32, search_range: int = 8,
                 key: Optional[bytes] = None, nonce: int = 0,
                 edge_threshold: int = 64, max_workers: int = 2, verbose: bool = False):
        self.qps = list(qps)
        self.presets = list(presets) if presets is not None else list(PRESETS)
        unknown = [name for name in self.presets if name not in PRESETS]
        if unknown:
            raise ValueError(f"Неизвестные наборы: {', '.join(unknown)} (допустимо: {', '.join(PRESETS)})")
        self.gop_size = gop_size
        self.ctu_size = ctu_size
        self.search_range = search_range
        self.key = key if key is not None else secrets.token_bytes(KEY_BYTES)
        self.nonce = nonce
        self.metrics = QualityMetrics(edge_threshold=edge_threshold, max_workers=max_workers)
        self.max_workers = max_workers
        self.verbose = verbose

    def run(self, frames: Sequence[FrameBuffer]) -> List[ExperimentRow]:
        """Все строки сетки в порядке (qp, набор)."""
        start_time = time.time()
        rows: List[ExperimentRow] = []
        for qp in self.qps:
            rows.extend(self.run_qp(frames, qp))
        if self.verbose:
            print(f"Эксперименты завершены за {time.time() - start_time:.2f} секунд!")
        return rows

    def run_qp(self, frames: Sequence[FrameBuffer], qp: int) -> List[ExperimentRow]:
        config = CodecConfig(qp=qp, gop_size=self.gop_size, ctu_size=self.ctu_size,
                             search_range=self.search_range)
        plain = VideoEncoder(config).encode(EncodeJob(frames, config))
        plain_report = self.metrics.analyze(frames, plain.reconstruction)
        if self.verbose:
            print(f"QP={qp}: без шифрования {plain.payload_bits} бит, "
                  f"SSIM={plain_report.mean_ssim:.4f}")

        def run_preset(name: str) -> ExperimentRow:
            encryption = EncryptionConfig(classes=PRESETS[name], key=self.key, nonce=self.nonce)
            encrypted = VideoEncoder(config).encode(EncodeJob(frames, config, encryption))
            keyless = VideoDecoder().decode(encrypted.bitstream).frames
            report = self.metrics.analyze(frames, keyless)
            if self.verbose:
                print(f"QP={qp}, {name}: {encrypted.payload_bits} бит, "
                      f"SSIM без ключа={report.mean_ssim:.4f}")
            return ExperimentRow(
                qp=qp, preset=name,
                orig_psnr=plain_report.mean_psnr, orig_ssim=plain_report.mean_ssim,
                orig_edr=plain_report.mean_edr,
                enc_psnr=report.mean_psnr, enc_ssim=report.mean_ssim, enc_edr=report.mean_edr,
                plain_bits=plain.payload_bits, enc_bits=encrypted.payload_bits,
                bitrate_delta=bitrate_change(plain.payload_bits, encrypted.payload_bits),
                enc_elements=encrypted.ledger.total_elements,
                enc_space_bits=encrypted.ledger.total_bits,
                frame_report=report,
                plain_report=plain_report,
            )

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            return list(executor.map(run_preset, self.presets))

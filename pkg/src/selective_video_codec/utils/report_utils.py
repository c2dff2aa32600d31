"""CSV-файлы метрик, журнала шифрования, сводного отчета и серии экспериментов."""

import csv
import math
from typing import Dict, List, Optional, Sequence, Tuple

from ..components.syntax_elements import ElementClass
from ..core.evaluation import ExperimentRow
from ..core.pipeline import LEDGER_SCOPES, EncryptionLedger
from ..core.quality_metrics import PSNR_SENTINEL, MetricsReport
from .file_utils import FileUtils

METRICS_HEADER = ['frame', 'psnr_db', 'ssim', 'edr']
LEDGER_HEADER = ['frame_type', 'class', 'elements', 'bits']
EXPERIMENT_HEADER = [
    'qp', 'preset', 'orig_psnr_db', 'orig_ssim', 'orig_edr', 'enc_psnr_db', 'enc_ssim',
    'enc_edr', 'plain_bits', 'enc_bits', 'bitrate_delta', 'enc_elements', 'enc_space_bits',
]
TRACE_HEADER = ['qp', 'preset', 'frame', 'frame_type', 'psnr_db', 'ssim', 'edr']


def format_psnr(value: float) -> str:
    return f"{PSNR_SENTINEL:.2f}" if math.isinf(value) else f"{value:.4f}"


class ReportWriter:
    """Запись и чтение CSV-отчетов."""

    @staticmethod
    def write_metrics(report: MetricsReport, output_path: str):
        """Одна строка на кадр; средние значения выводятся в сводке."""
        FileUtils.ensure_parent_dir(output_path)
        with open(output_path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(METRICS_HEADER)
            for index, (p, s, e) in enumerate(zip(report.psnr, report.ssim, report.edr)):
                writer.writerow([index, format_psnr(p), f"{s:.6f}", f"{e:.6f}"])

    @staticmethod
    def read_metrics(input_path: str) -> List[Dict[str, str]]:
        with open(input_path, newline='') as f:
            return list(csv.DictReader(f))

    @staticmethod
    def write_ledger(ledger: EncryptionLedger, output_path: str):
        FileUtils.ensure_parent_dir(output_path)
        with open(output_path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(LEDGER_HEADER)
            writer.writerows(ledger.rows())

    @staticmethod
    def read_ledger(input_path: str) -> EncryptionLedger:
        """Восстанавливает журнал по строкам I и P (строки ALL - производные)."""
        ledger = EncryptionLedger()
        with open(input_path, newline='') as f:
            for row in csv.DictReader(f):
                if row['frame_type'] not in LEDGER_SCOPES:
                    raise ValueError(f"Неизвестный тип кадра в журнале: {row['frame_type']}")
                if row['frame_type'] == 'ALL':
                    continue
                try:
                    element_class = ElementClass[row['class']]
                except KeyError:
                    raise ValueError(f"Неизвестный класс в журнале: {row['class']}") from None
                elements, bits = int(row['elements']), int(row['bits'])
                if elements < 0 or bits < 0:
                    raise ValueError(f"Отрицательные значения в журнале: {row}")
                if elements:
                    ledger.counts[(row['frame_type'], element_class)] = [elements, bits]
        return ledger

    @staticmethod
    def write_report(bitrate_delta: float, space: Dict[str, Tuple[int, int]], output_path: str):
        """Строка bitrate_delta и строки enc_space по классам."""
        FileUtils.ensure_parent_dir(output_path)
        with open(output_path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(['bitrate_delta', f"{bitrate_delta:.6f}"])
            for name, (elements, bits) in space.items():
                writer.writerow(['enc_space', name, elements, bits])

    @staticmethod
    def write_experiments(rows: Sequence[ExperimentRow], output_path: str,
                          trace_path: Optional[str] = None):
        """Сводная таблица серии и, при необходимости, покадровые трассы."""
        FileUtils.ensure_parent_dir(output_path)
        with open(output_path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(EXPERIMENT_HEADER)
            for row in rows:
                writer.writerow([
                    row.qp, row.preset, format_psnr(row.orig_psnr), f"{row.orig_ssim:.6f}",
                    f"{row.orig_edr:.6f}", format_psnr(row.enc_psnr), f"{row.enc_ssim:.6f}",
                    f"{row.enc_edr:.6f}", row.plain_bits, row.enc_bits,
                    f"{row.bitrate_delta:.6f}", row.enc_elements, row.enc_space_bits,
                ])

        if trace_path is None:
            return
        FileUtils.ensure_parent_dir(trace_path)
        with open(trace_path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(TRACE_HEADER)
            for row in rows:
                report = row.frame_report
                if report is None:
                    continue
                for index, (p, s, e) in enumerate(zip(report.psnr, report.ssim, report.edr)):
                    frame_type = report.frame_types[index] if index < len(report.frame_types) else ''
                    writer.writerow([row.qp, row.preset, index, frame_type, format_psnr(p),
                                     f"{s:.6f}", f"{e:.6f}"])

import csv
import math

import pytest

from selective_video_codec.components.syntax_elements import ElementClass
from selective_video_codec.core.evaluation import ExperimentRow
from selective_video_codec.core.pipeline import EncryptionLedger
from selective_video_codec.core.quality_metrics import MetricsReport, encryption_space
from selective_video_codec.utils.file_utils import FileUtils
from selective_video_codec.utils.report_utils import (
    EXPERIMENT_HEADER,
    TRACE_HEADER,
    ReportWriter,
    format_psnr,
)


def _read_rows(path):
    with open(path, newline='') as f:
        return list(csv.reader(f))


class TestReportWriter:
    """Тесты CSV-отчетов"""

    def test_metrics_csv(self, tmp_path):
        report = MetricsReport(psnr=[math.inf, 30.0], ssim=[1.0, 0.5], edr=[0.0, 0.25])
        path = str(tmp_path / 'out' / 'metrics.csv')
        ReportWriter.write_metrics(report, path)
        rows = ReportWriter.read_metrics(path)
        assert [r['frame'] for r in rows] == ['0', '1']
        assert rows[0]['psnr_db'] == '99.99'
        assert len(_read_rows(path)) == 3

    def test_ledger_roundtrip(self, tmp_path):
        """Журнал читается обратно без строк ALL"""
        ledger = EncryptionLedger()
        ledger.record('I', ElementClass.LUMA_IPM, 6)
        ledger.record('P', ElementClass.MVD_VALUE, 1)
        path = str(tmp_path / 'ledger.csv')
        ReportWriter.write_ledger(ledger, path)
        assert ReportWriter.read_ledger(path).counts == ledger.counts

    def test_bad_ledger(self, tmp_path):
        path = tmp_path / 'ledger.csv'
        path.write_text("frame_type,class,elements,bits\nB,LUMA_IPM,1,6\n")
        with pytest.raises(ValueError):
            ReportWriter.read_ledger(str(path))
        path.write_text("frame_type,class,elements,bits\nI,CHROMA,1,6\n")
        with pytest.raises(ValueError):
            ReportWriter.read_ledger(str(path))

    def test_report_csv(self, tmp_path):
        ledger = EncryptionLedger()
        ledger.record('I', ElementClass.RESIDUAL_SIGN, 10)
        path = str(tmp_path / 'report.csv')
        ReportWriter.write_report(0.0125, encryption_space(ledger), path)
        rows = _read_rows(path)
        assert rows[0] == ['bitrate_delta', '0.012500']
        assert ['enc_space', 'RESIDUAL_SIGN', '1', '10'] in rows
        assert rows[-1] == ['enc_space', 'TOTAL', '1', '10']

    def test_experiments_csv(self, tmp_path):
        report = MetricsReport(psnr=[20.0], ssim=[0.3], edr=[0.7], frame_types=['I'])
        row = ExperimentRow(qp=24, preset='all', orig_psnr=35.0, orig_ssim=0.95, orig_edr=0.1,
                            enc_psnr=12.0, enc_ssim=0.2, enc_edr=0.8, plain_bits=1000,
                            enc_bits=1010, bitrate_delta=0.01, enc_elements=40,
                            enc_space_bits=90, frame_report=report)
        path = str(tmp_path / 'exp.csv')
        trace = str(tmp_path / 'trace.csv')
        ReportWriter.write_experiments([row], path, trace)
        rows = _read_rows(path)
        assert rows[0] == EXPERIMENT_HEADER
        assert rows[1][:2] == ['24', 'all']
        trace_rows = _read_rows(trace)
        assert trace_rows[0] == TRACE_HEADER
        assert trace_rows[1][:4] == ['24', 'all', '0', 'I']

    def test_format_psnr(self):
        assert format_psnr(math.inf) == '99.99'
        assert format_psnr(31.5) == '31.5000'


class TestFileUtils:
    """Тесты файловых утилит"""

    def test_validate(self, tmp_path):
        (tmp_path / 'a.yuv').write_bytes(b'')
        (tmp_path / 'c.txt').write_bytes(b'')
        assert FileUtils.validate_file_path(str(tmp_path / 'a.yuv')) is None
        assert FileUtils.validate_file_path(str(tmp_path / 'a.yuv'), '.sevc') is not None
        assert FileUtils.validate_file_path(str(tmp_path / 'c.txt')) is not None
        assert FileUtils.validate_file_path(str(tmp_path / 'none.yuv')) is not None

    def test_file_info_counts_frames(self, tmp_path):
        """Для YUV считаются целые кадры и остаток"""
        path = tmp_path / 'clip.yuv'
        path.write_bytes(bytes(2 * 384 + 10))
        info = FileUtils.get_file_info(str(path), frame_bytes=384)
        assert (info['frames'], info['tail_bytes']) == (2, 10)
        assert 'frames' not in FileUtils.get_file_info(str(path))

    def test_bytes_roundtrip(self, tmp_path):
        path = str(tmp_path / 'sub' / 'x.sevc')
        assert FileUtils.write_bytes(path, b'abc') == 3
        assert FileUtils.read_bytes(path) == b'abc'
        assert FileUtils.get_file_info(path)['size_bytes'] == 3
        with pytest.raises(FileNotFoundError):
            FileUtils.read_bytes(str(tmp_path / 'none.sevc'))

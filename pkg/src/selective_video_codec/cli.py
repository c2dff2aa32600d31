"""CLI интерфейс для Selective Video Codec."""

import sys
import time
from typing import Optional

import click

from . import __version__
from .components.syntax_elements import parse_class_list
from .core.bitstream_container import Container, FrameType
from .core.evaluation import PRESETS, ExperimentRunner
from .core.frame_io import YuvIO
from .core.pipeline import CodecConfig, EncodeJob, VideoDecoder, VideoEncoder
from .core.quality_metrics import QualityMetrics, bitrate_change, encryption_space
from .core.selective_crypto import EncryptionConfig
from .generators.synthetic_clip_generator import SyntheticClipGenerator
from .utils.file_utils import FileUtils
from .utils.report_utils import ReportWriter


def _fail(message: str):
    click.echo(click.style(f"[ERROR] {message}", fg='red'))
    sys.exit(1)


def _parse_nonce(ctx, param, value: Optional[str]) -> Optional[int]:
    if value is None:
        return None
    try:
        nonce = int(value, 0)
    except ValueError:
        raise click.BadParameter(f"nonce должен быть целым числом: {value}")
    if not 0 <= nonce < (1 << 64):
        raise click.BadParameter(f"nonce должен помещаться в 64 бита: {value}")
    return nonce


def _parse_key(value: Optional[str]) -> Optional[bytes]:
    if not value:
        return None
    try:
        return EncryptionConfig.parse_key(value)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="'--key'")


@click.group()
@click.version_option(version=__version__)
def main():
    """Selective Video Codec - кодек с селективным шифрованием синтаксических элементов."""
    pass


@main.command()
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True),
              help='Исходный файл .yuv (4:2:0, 8 бит)')
@click.option('--width', required=True, type=int, help='Ширина кадра')
@click.option('--height', required=True, type=int, help='Высота кадра')
@click.option('--frames', default=None, type=int, help='Число кадров (по умолчанию все)')
@click.option('--qp', default=24, type=click.IntRange(0, 51), help='Параметр квантования')
@click.option('--gop', default=8, type=click.IntRange(1, 255), help='Размер GOP')
@click.option('--ctu', default=32, type=click.Choice(['8', '16', '32', '64', '128']),
              help='Размер CTU')
@click.option('--search-range', default=8, type=click.IntRange(0, 64),
              help='Диапазон поиска движения')
@click.option('--encrypt', 'encrypt', default='',
              help='Шифруемые классы: ipm,mvdv,mvds,rsign (пусто - без шифрования)')
@click.option('--key', envvar='SEVC_KEY', default=None,
              help='Ключ AES-128, 32 hex-символа (или переменная SEVC_KEY)')
@click.option('--nonce', default=None, callback=_parse_nonce,
              help='Nonce (u64) вместо случайного, для воспроизводимости')
@click.option('--out', 'output_path', required=True, help='Выходной файл .sevc')
@click.option('--ledger', 'ledger_path', default=None, help='CSV журнала шифрования')
def encode(input_path: str, width: int, height: int, frames: Optional[int], qp: int, gop: int,
           ctu: str, search_range: int, encrypt: str, key: Optional[str], nonce: Optional[int],
           output_path: str, ledger_path: Optional[str]):
    """Закодировать последовательность YUV."""
    try:
        classes = parse_class_list(encrypt)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="'--encrypt'")
    key_bytes = _parse_key(key)
    if classes and key_bytes is None:
        raise click.UsageError("Для --encrypt требуется --key или переменная SEVC_KEY")

    try:
        start_time = time.time()
        config = CodecConfig(qp=qp, gop_size=gop, ctu_size=int(ctu), search_range=search_range)
        source = YuvIO.load(input_path, width, height, frames, config.ctu_size)
        encryption = EncryptionConfig(
            classes=classes, key=key_bytes,
            nonce=EncryptionConfig.random_nonce() if nonce is None else nonce,
        )
        result = VideoEncoder(config, verbose=True).encode(EncodeJob(source, config, encryption))
        FileUtils.write_bytes(output_path, result.bitstream)
        if ledger_path:
            ReportWriter.write_ledger(result.ledger, ledger_path)

        click.echo(click.style("[OK] Кодирование завершено!", fg='green'))
        click.echo(f"Кадров: {len(source)}, бит полезной нагрузки: {result.payload_bits}")
        click.echo(f"Зашифровано элементов: {result.ledger.total_elements}, "
                   f"бит: {result.ledger.total_bits}")
        for name, (elements, bits) in encryption_space(result.ledger).items():
            if name != 'TOTAL':
                click.echo(f"  {name}: {elements} элементов, {bits} бит")
        click.echo(f"Время: {time.time() - start_time:.2f} секунд")
    except Exception as e:
        _fail(f"Ошибка: {e}")


@main.command()
@click.option('--in', 'input_path', required=True, type=click.Path(exists=True),
              help='Файл .sevc')
@click.option('--key', envvar='SEVC_KEY', default=None,
              help='Ключ AES-128 (без ключа поток декодируется без расшифрования)')
@click.option('--out', 'output_path', required=True, help='Выходной файл .yuv')
def decode(input_path: str, key: Optional[str], output_path: str):
    """Декодировать поток .sevc в YUV."""
    key_bytes = _parse_key(key)
    try:
        start_time = time.time()
        result = VideoDecoder(key=key_bytes, verbose=True).decode(FileUtils.read_bytes(input_path))
        YuvIO.save(result.frames, output_path)
        click.echo(click.style("[OK] Декодирование завершено!", fg='green'))
        if result.header.enc_flags and key_bytes is None:
            click.echo(click.style("[WARN] Поток зашифрован, ключ не задан", fg='yellow'))
        click.echo(f"Кадров: {len(result.frames)}, время: {time.time() - start_time:.2f} секунд")
    except Exception as e:
        _fail(f"Ошибка: {e}")


@main.command()
@click.option('--ref', 'ref_path', required=True, type=click.Path(exists=True),
              help='Эталонный .yuv')
@click.option('--test', 'test_path', required=True, type=click.Path(exists=True),
              help='Сравниваемый .yuv')
@click.option('--width', required=True, type=int, help='Ширина кадра')
@click.option('--height', required=True, type=int, help='Высота кадра')
@click.option('--frames', default=None, type=int, help='Число кадров (по умолчанию все)')
@click.option('--csv', 'csv_path', required=True, help='Выходной CSV')
@click.option('--edge-threshold', default=64, type=click.IntRange(1, 255),
              help='Порог детектора границ')
@click.option('--workers', default=2, help='Количество потоков для параллельной обработки')
def analyze(ref_path: str, test_path: str, width: int, height: int, frames: Optional[int],
            csv_path: str, edge_threshold: int, workers: int):
    """Посчитать PSNR, SSIM и EDR по кадрам."""
    try:
        ref = YuvIO.load(ref_path, width, height, frames, ctu_size=1)
        test = YuvIO.load(test_path, width, height, frames, ctu_size=1)
        if len(ref) != len(test):
            raise ValueError(f"Разное число кадров: {len(ref)} и {len(test)}")
        report = QualityMetrics(edge_threshold, max_workers=workers).analyze(ref, test)
        ReportWriter.write_metrics(report, csv_path)
        click.echo(click.style("[OK] Анализ завершен!", fg='green'))
        click.echo(f"Кадров: {report.frame_count}")
        click.echo(f"[SUMMARY] PSNR={report.mean_psnr:.2f} dB, SSIM={report.mean_ssim:.4f}, "
                   f"EDR={report.mean_edr:.4f}")
    except Exception as e:
        _fail(f"Ошибка: {e}")


@main.command()
@click.option('--plain-bits', required=True, type=int, help='Размер потока без шифрования, бит')
@click.option('--enc-bits', required=True, type=int, help='Размер зашифрованного потока, бит')
@click.option('--ledger', 'ledger_path', required=True, type=click.Path(exists=True),
              help='CSV журнала шифрования')
@click.option('--csv', 'csv_path', required=True, help='Выходной CSV')
def report(plain_bits: int, enc_bits: int, ledger_path: str, csv_path: str):
    """Свести изменение битрейта и пространство шифрования в один CSV."""
    try:
        delta = bitrate_change(plain_bits, enc_bits)
        space = encryption_space(ReportWriter.read_ledger(ledger_path))
        ReportWriter.write_report(delta, space, csv_path)
        click.echo(click.style("[OK] Отчет создан", fg='green'))
        click.echo(f"Изменение битрейта: {delta:+.4%}")
        total_elements, total_bits = space['TOTAL']
        click.echo(f"Пространство шифрования: {total_elements} элементов, {total_bits} бит")
    except Exception as e:
        _fail(f"Ошибка: {e}")


@main.command()
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True),
              help='Исходный файл .yuv')
@click.option('--width', required=True, type=int, help='Ширина кадра')
@click.option('--height', required=True, type=int, help='Высота кадра')
@click.option('--frames', default=None, type=int, help='Число кадров (по умолчанию все)')
@click.option('--qp', 'qps', multiple=True, type=click.IntRange(0, 51),
              help='QP серии (можно несколько; по умолчанию 8, 24, 40)')
@click.option('--preset', 'presets', multiple=True, type=click.Choice(list(PRESETS)),
              help='Наборы шифруемых элементов (по умолчанию все)')
@click.option('--gop', default=8, type=click.IntRange(1, 255), help='Размер GOP')
@click.option('--ctu', default=32, type=click.Choice(['8', '16', '32', '64', '128']),
              help='Размер CTU')
@click.option('--key', envvar='SEVC_KEY', default=None, help='Ключ AES-128 (по умолчанию случайный)')
@click.option('--nonce', default='0', callback=_parse_nonce, help='Nonce (u64)')
@click.option('--csv', 'csv_path', required=True, help='Сводный CSV')
@click.option('--trace', 'trace_path', default=None, help='CSV покадровых метрик без ключа')
@click.option('--workers', default=2, help='Количество потоков для параллельной обработки')
def evaluate(input_path: str, width: int, height: int, frames: Optional[int], qps, presets,
             gop: int, ctu: str, key: Optional[str], nonce: int, csv_path: str,
             trace_path: Optional[str], workers: int):
    """Серия экспериментов: QP x наборы шифруемых элементов."""
    key_bytes = _parse_key(key)
    try:
        source = YuvIO.load(input_path, width, height, frames, int(ctu))
        runner = ExperimentRunner(
            qps=qps or (8, 24, 40), presets=presets or None, gop_size=gop, ctu_size=int(ctu),
            key=key_bytes, nonce=nonce, max_workers=workers, verbose=True,
        )
        rows = runner.run(source)
        ReportWriter.write_experiments(rows, csv_path, trace_path)
        click.echo(click.style("[OK] Серия экспериментов завершена!", fg='green'))
        click.echo("[SUMMARY] qp  набор  SSIM(без ключа)  EDR  битрейт")
        for row in rows:
            click.echo(f"  {row.qp:>3} {row.preset:>6} {row.enc_ssim:.4f} {row.enc_edr:.4f} "
                       f"{row.bitrate_delta:+.4%}")
    except Exception as e:
        _fail(f"Ошибка: {e}")


@main.command()
@click.option('--output-dir', '-o', default='generated_clips',
              help='Директория для сохранения клипов')
@click.option('--width', default=64, help='Ширина кадра')
@click.option('--height', default=64, help='Высота кадра')
@click.option('--frames', default=17, help='Число кадров')
@click.option('--seed', default=0, help='Зерно генератора')
@click.option('--kind', 'kinds', multiple=True, type=click.Choice(SyntheticClipGenerator.KINDS),
              help='Вид клипа (по умолчанию все)')
def generate(output_dir: str, width: int, height: int, frames: int, seed: int, kinds):
    """Сгенерировать синтетические тестовые клипы."""
    try:
        generator = SyntheticClipGenerator(width, height, frames, seed)
        paths = [
            generator.save_clip(kind, f"{output_dir}/{kind}_{width}x{height}.yuv")
            for kind in (kinds or SyntheticClipGenerator.KINDS)
        ]
        click.echo(click.style(f"[OK] Создано клипов: {len(paths)}", fg='green'))
        for path in paths:
            file_info = FileUtils.get_file_info(path, YuvIO.frame_bytes(width, height))
            click.echo(f"  {file_info['name']}: {file_info['frames']} кадров, "
                       f"{file_info['size_kb']} КБ")
    except Exception as e:
        _fail(f"Ошибка генерации: {e}")


@main.command()
@click.argument('input_path', type=click.Path(exists=True))
def info(input_path: str):
    """Показать заголовок файла .sevc."""
    error = FileUtils.validate_file_path(input_path, '.sevc')
    if error:
        _fail(error)
    try:
        container = Container.from_bytes(FileUtils.read_bytes(input_path))
        header = container.header
        click.echo(click.style("[OK] Контейнер валиден", fg='green'))
        file_info = FileUtils.get_file_info(input_path)
        click.echo(f"Файл: {file_info['name']}, {file_info['size_bytes']} байт")
        click.echo(f"Версия: {header.version}")
        click.echo(f"Размер: {header.width}x{header.height}, {header.bit_depth} бит")
        click.echo(f"QP: {header.qp}, GOP: {header.gop_size}, CTU: {header.ctu_size}")
        click.echo(f"enc_flags: {header.enc_flags:#06b}, nonce: {header.nonce:#018x}")
        i_count = sum(1 for f in container.frames if f.frame_type == FrameType.I)
        click.echo(f"Кадров: {len(container.frames)} (I: {i_count}, "
                   f"P: {len(container.frames) - i_count})")
        click.echo(f"Бит полезной нагрузки: {container.payload_bits}")
    except Exception as e:
        _fail(f"Ошибка: {e}")


if __name__ == '__main__':
    main()

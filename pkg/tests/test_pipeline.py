import functools

import numpy as np
import pytest

from selective_video_codec.components.syntax_elements import ElementClass
from selective_video_codec.core.bitstream_container import (
    Container,
    ContainerFormatError,
    FrameType,
)
from selective_video_codec.core.frame_io import FrameBuffer
from selective_video_codec.core.pipeline import (
    CodecConfig,
    EncodeJob,
    EncryptionLedger,
    VideoDecoder,
    VideoEncoder,
    decode,
    encode,
    recount_encryption_space,
    transform_units,
)
from selective_video_codec.core.quality_metrics import QualityMetrics, edge_map, psnr
from selective_video_codec.core.selective_crypto import EncryptionConfig, StubBlockCipher
from selective_video_codec.generators.synthetic_clip_generator import SyntheticClipGenerator

TEST_KEY = bytes.fromhex('000102030405060708090a0b0c0d0e0f')
WRONG_KEY = bytes.fromhex('f0e0d0c0b0a090807060504030201000')
TEST_NONCE = 0x0123456789ABCDEF
ALL_CLASSES = ElementClass.LUMA_IPM | ElementClass.MVD_VALUE | ElementClass.MVD_SIGN | \
    ElementClass.RESIDUAL_SIGN
CONFIG = CodecConfig(qp=24, gop_size=4, ctu_size=32, search_range=4)
SMALL_CONFIG = dict(gop_size=2, ctu_size=32, search_range=2)
CLASS_SUBSETS = [ElementClass(value) for value in range(1, 16)]
MVD_CLASSES = ElementClass.MVD_VALUE | ElementClass.MVD_SIGN


def _frames_equal(a, b) -> bool:
    return all(np.array_equal(p, q) for p, q in zip(a.cropped_planes(), b.cropped_planes()))


def _mean_psnr(source, decoded) -> float:
    values = [min(psnr(s, d), 99.99) for s, d in zip(source, decoded)]
    return float(np.mean(values))


@pytest.fixture(scope='module')
def plain_result(gradient_clip):
    return encode(EncodeJob(gradient_clip, CONFIG))


@pytest.fixture(scope='module')
def encrypted_result(gradient_clip):
    encryption = EncryptionConfig(ALL_CLASSES, TEST_KEY, TEST_NONCE)
    return encode(EncodeJob(gradient_clip, CONFIG, encryption))


class TestPlainCoding:
    """Тесты кодирования без шифрования"""

    def test_decoder_matches_encoder_reconstruction(self, plain_result):
        """Декодер восстанавливает ровно то, что восстановил кодер"""
        decoded = decode(plain_result.bitstream)
        assert len(decoded) == len(plain_result.reconstruction)
        for ours, theirs in zip(decoded, plain_result.reconstruction):
            assert _frames_equal(ours, theirs)

    def test_frame_types_follow_gop(self, plain_result):
        types = [f.frame_type for f in plain_result.container.frames]
        assert types == [FrameType.I, FrameType.P, FrameType.P, FrameType.P, FrameType.I]

    def test_header_carries_config(self, plain_result):
        header = Container.from_bytes(plain_result.bitstream).header
        assert (header.width, header.height) == (64, 64)
        assert (header.qp, header.gop_size, header.ctu_size) == (24, 4, 32)
        assert header.enc_flags == 0
        assert header.frame_count == 5

    def test_frame_bits_match_payloads(self, plain_result):
        assert plain_result.frame_bits == [f.payload_bits for f in plain_result.container.frames]
        assert plain_result.payload_bits == plain_result.container.payload_bits

    def test_empty_ledger(self, plain_result):
        assert plain_result.ledger.total_elements == 0

    def test_deterministic(self, gradient_clip, plain_result):
        """Повторное кодирование дает тот же поток"""
        assert encode(EncodeJob(gradient_clip, CONFIG)).bitstream == plain_result.bitstream

    def test_fine_qp_quality(self, gradient_clip):
        result = encode(EncodeJob(gradient_clip[:2], CodecConfig(qp=8, gop_size=4)))
        assert _mean_psnr(gradient_clip[:2], decode(result.bitstream)) > 35.0

    def test_flat_clip_lossless_luma(self, flat_clip):
        """Постоянная яркость восстанавливается без потерь"""
        result = encode(EncodeJob(flat_clip[:2], CONFIG))
        decoded = decode(result.bitstream)
        assert all(np.all(f.y_plane == 128) for f in decoded)

    @pytest.mark.slow
    def test_bits_decrease_with_qp(self, gradient_clip):
        """Размер потока строго убывает при росте QP"""
        sizes = [
            encode(EncodeJob(gradient_clip, CodecConfig(qp=qp, gop_size=4))).payload_bits
            for qp in (8, 24, 40)
        ]
        print(f"\n📊 Размеры потока по QP 8/24/40: {sizes}")
        assert sizes[0] > sizes[1] > sizes[2]

    def test_non_multiple_resolution(self):
        """Размеры, не кратные CTU, дополняются и обрезаются обратно"""
        clip = SyntheticClipGenerator(width=72, height=40, frames=2, seed=3).generate('gradient_box')
        result = encode(EncodeJob(clip, CONFIG))
        decoded = decode(result.bitstream)
        assert decoded[0].cropped_luma().shape == (40, 72)
        assert _frames_equal(decoded[1], result.reconstruction[1])

    def test_large_ctu_uses_transform_tiling(self, gradient_clip):
        """CTU 64: блоки больше 32 кодируются плитками преобразования"""
        config = CodecConfig(qp=30, gop_size=2, ctu_size=64)
        result = encode(EncodeJob(gradient_clip[:2], config))
        for ours, theirs in zip(decode(result.bitstream), result.reconstruction):
            assert _frames_equal(ours, theirs)
        assert transform_units(64) == [(0, 0, 32), (32, 0, 32), (0, 32, 32), (32, 32, 32)]


class TestSelectiveEncryption:
    """Тесты селективного шифрования в кодеке"""

    def test_correct_key_matches_plain_decode(self, plain_result, encrypted_result):
        """С верным ключом результат совпадает с декодированием без шифрования"""
        plain = decode(plain_result.bitstream)
        decrypted = decode(encrypted_result.bitstream, key=TEST_KEY)
        for ours, theirs in zip(decrypted, plain):
            assert _frames_equal(ours, theirs)

    def test_header_flags(self, encrypted_result):
        header = Container.from_bytes(encrypted_result.bitstream).header
        assert header.enc_flags == 0x0F
        assert header.nonce == TEST_NONCE

    def test_keyless_and_wrong_key_decode_degraded(self, gradient_clip, encrypted_result):
        """Без ключа и с неверным ключом поток разбирается, но качество хуже"""
        correct = decode(encrypted_result.bitstream, key=TEST_KEY)
        keyless = decode(encrypted_result.bitstream)
        wrong = decode(encrypted_result.bitstream, key=WRONG_KEY)
        assert len(keyless) == len(wrong) == len(gradient_clip)

        correct_psnr = _mean_psnr(gradient_clip, correct)
        keyless_psnr = _mean_psnr(gradient_clip, keyless)
        wrong_psnr = _mean_psnr(gradient_clip, wrong)
        print(f"\n🔐 PSNR: ключ {correct_psnr:.2f}, без ключа {keyless_psnr:.2f}, "
              f"неверный ключ {wrong_psnr:.2f}")
        assert keyless_psnr < correct_psnr
        assert wrong_psnr < correct_psnr

    @pytest.mark.slow
    def test_random_wrong_keys_decode(self, encrypted_result):
        """Любой неверный ключ дает полностью разобранный поток"""
        rng = np.random.default_rng(21)
        for _ in range(100):
            key = rng.integers(0, 256, size=16, dtype=np.uint8).tobytes()
            frames = decode(encrypted_result.bitstream, key=key)
            assert len(frames) == 5
            assert all(f.cropped_luma().shape == (64, 64) for f in frames)

    def test_fixed_length_classes_keep_payload_size(self, gradient_clip, plain_result):
        """Шифрование элементов фиксированной длины не меняет размер нагрузки"""
        classes = ElementClass.MVD_VALUE | ElementClass.MVD_SIGN | ElementClass.RESIDUAL_SIGN
        result = encode(EncodeJob(gradient_clip, CONFIG,
                                  EncryptionConfig(classes, TEST_KEY, TEST_NONCE)))
        assert result.frame_bits == plain_result.frame_bits
        assert result.ledger.total_elements > 0

    def test_zero_keystream_gives_plain_payloads(self, gradient_clip, plain_result):
        """Нулевой ключевой поток: нагрузки кадров совпадают с открытыми"""
        result = encode(EncodeJob(gradient_clip, CONFIG,
                                  EncryptionConfig(ALL_CLASSES, nonce=TEST_NONCE),
                                  cipher=StubBlockCipher()))
        payloads = [f.payload for f in result.container.frames]
        assert payloads == [f.payload for f in plain_result.container.frames]

    def test_stub_cipher_roundtrip(self, gradient_clip, plain_result):
        cipher = StubBlockCipher(seed=5)
        result = encode(EncodeJob(gradient_clip, CONFIG, EncryptionConfig(ALL_CLASSES),
                                  cipher=cipher))
        decoded = VideoDecoder(cipher=cipher).decode(result.bitstream).frames
        for ours, theirs in zip(decoded, decode(plain_result.bitstream)):
            assert _frames_equal(ours, theirs)

    def test_ledger_matches_recount(self, encrypted_result):
        """Журнал кодера совпадает с пересчетом по потоку"""
        recounted = recount_encryption_space(encrypted_result.bitstream)
        assert recounted.counts == encrypted_result.ledger.counts
        assert encrypted_result.ledger.elements(ElementClass.LUMA_IPM, 'I') > 0
        assert encrypted_result.ledger.bits(ElementClass.RESIDUAL_SIGN) > 0

    def test_recount_of_plain_stream_for_all_classes(self, plain_result, encrypted_result):
        """Пространство шифрования открытого потока равно журналу зашифрованного"""
        recounted = recount_encryption_space(plain_result.bitstream, ALL_CLASSES)
        assert recounted.counts == encrypted_result.ledger.counts

    def test_ledger_bit_sizes(self, encrypted_result):
        ledger = encrypted_result.ledger
        ipm_elements = ledger.elements(ElementClass.LUMA_IPM)
        ipm_bits = ledger.bits(ElementClass.LUMA_IPM)
        assert 3 * ipm_elements <= ipm_bits <= 6 * ipm_elements
        assert ledger.bits(ElementClass.MVD_SIGN) == ledger.elements(ElementClass.MVD_SIGN)


@functools.lru_cache(maxsize=None)
def _small_clip(kind: str):
    return tuple(SyntheticClipGenerator(width=32, height=32, frames=3, seed=5).generate(kind))


@functools.lru_cache(maxsize=None)
def _small_plain_decode(kind: str, qp: int):
    config = CodecConfig(qp=qp, **SMALL_CONFIG)
    return tuple(decode(encode(EncodeJob(_small_clip(kind), config)).bitstream))


class TestCorrectKeyEquivalence:
    """Верный ключ дает ровно то же, что кодирование без шифрования"""

    def _check(self, kind: str, qp: int, classes: ElementClass):
        config = CodecConfig(qp=qp, **SMALL_CONFIG)
        result = encode(EncodeJob(_small_clip(kind), config,
                                  EncryptionConfig(classes, TEST_KEY, TEST_NONCE)))
        decrypted = decode(result.bitstream, key=TEST_KEY)
        for ours, theirs in zip(decrypted, _small_plain_decode(kind, qp)):
            assert _frames_equal(ours, theirs)
        assert recount_encryption_space(result.bitstream).counts == result.ledger.counts

    @pytest.mark.parametrize("classes", CLASS_SUBSETS, ids=lambda c: f"classes{int(c)}")
    def test_every_class_subset(self, classes):
        self._check('gradient_box', 24, classes)

    @pytest.mark.slow
    @pytest.mark.parametrize("kind", ['gradient_box', 'checkerboard_pan', 'noise'])
    @pytest.mark.parametrize("qp", [8, 24, 40])
    @pytest.mark.parametrize("classes", CLASS_SUBSETS, ids=lambda c: f"classes{int(c)}")
    def test_clip_qp_grid(self, kind, qp, classes):
        self._check(kind, qp, classes)


class TestVisualSecurity:
    """Неверный ключ при шифровании всех классов скрывает содержимое"""

    @pytest.mark.parametrize("clip_name", ['gradient_clip', 'checker_clip', 'noise_clip'])
    def test_wrong_key_ssim(self, clip_name, request):
        clip = request.getfixturevalue(clip_name)
        plain = decode(encode(EncodeJob(clip, CONFIG)).bitstream)
        encrypted = encode(EncodeJob(clip, CONFIG,
                                     EncryptionConfig(ALL_CLASSES, TEST_KEY, TEST_NONCE)))
        report = QualityMetrics().analyze(plain, decode(encrypted.bitstream, key=WRONG_KEY))
        print(f"\n🔐 {clip_name}: SSIM {report.mean_ssim:.3f}, EDR {report.mean_edr:.3f}")
        assert report.mean_ssim <= 0.60

    def test_wrong_key_edges(self, plain_result, encrypted_result):
        """Границы клипа с редкими границами не совпадают с границами без ключа"""
        plain = decode(plain_result.bitstream)
        wrong = decode(encrypted_result.bitstream, key=WRONG_KEY)
        density = float(np.mean([edge_map(f).values.mean() for f in plain]))
        assert density < 0.15
        assert QualityMetrics().analyze(plain, wrong).mean_edr >= 0.70


class TestElementImportance:
    """Вклад отдельных классов в искажение"""

    @pytest.mark.parametrize("clip_name", ['gradient_clip', 'checker_clip'])
    def test_mvd_only_keeps_i_frames(self, clip_name, request):
        """Шифрование только MVD не затрагивает I-кадры"""
        clip = request.getfixturevalue(clip_name)
        plain = decode(encode(EncodeJob(clip, CONFIG)).bitstream)
        result = encode(EncodeJob(clip, CONFIG,
                                  EncryptionConfig(MVD_CLASSES, TEST_KEY, TEST_NONCE)))
        report = QualityMetrics().analyze(plain, decode(result.bitstream))
        i_ssim = [s for s, t in zip(report.ssim, report.frame_types) if t == 'I']
        p_ssim = [s for s, t in zip(report.ssim, report.frame_types) if t == 'P']
        assert i_ssim == pytest.approx([1.0, 1.0])
        assert min(i_ssim) >= float(np.mean(p_ssim)) - 1e-12


class TestErrors:
    """Тесты ошибок кодирования и декодирования"""

    def test_empty_job(self):
        with pytest.raises(ValueError):
            EncodeJob([])

    def test_encryption_requires_key(self, flat_clip):
        with pytest.raises(ValueError):
            EncodeJob(flat_clip, CONFIG, EncryptionConfig(ElementClass.LUMA_IPM))

    @pytest.mark.parametrize("kwargs", [{'qp': 52}, {'gop_size': 0}, {'ctu_size': 24},
                                        {'search_range': -1}])
    def test_invalid_config(self, kwargs):
        with pytest.raises(ValueError):
            CodecConfig(**kwargs)

    def test_mixed_source_sizes_rejected(self):
        """Разные исходные размеры с одинаковой сеткой CTU отклоняются"""
        frames = [FrameBuffer.blank(40, 24), FrameBuffer.blank(48, 32)]
        with pytest.raises(ValueError):
            encode(EncodeJob(frames, CONFIG))

    def test_p_frame_without_reference(self, plain_result):
        container = Container.from_bytes(plain_result.bitstream)
        container.frames[0].frame_type = FrameType.P
        with pytest.raises(ContainerFormatError):
            VideoDecoder().decode(container)

    def test_verbose_encoder(self, flat_clip, capsys):
        VideoEncoder(CONFIG, verbose=True).encode(EncodeJob(flat_clip[:1], CONFIG))
        assert "Кодирование завершено" in capsys.readouterr().out


class TestLedger:
    """Тесты журнала шифрования"""

    def test_record_and_totals(self):
        ledger = EncryptionLedger()
        ledger.record(FrameType.I, ElementClass.LUMA_IPM, 6)
        ledger.record('P', ElementClass.LUMA_IPM, 3)
        ledger.record('P', ElementClass.MVD_SIGN, 1)
        assert ledger.elements(ElementClass.LUMA_IPM) == 2
        assert ledger.bits(frame_type='P') == 4
        assert ledger.total_bits == 10

    def test_rows(self):
        ledger = EncryptionLedger()
        ledger.record('I', ElementClass.RESIDUAL_SIGN, 12)
        ledger.record('I', ElementClass.RESIDUAL_SIGN, 12)
        assert ledger.bits(ElementClass.RESIDUAL_SIGN) == 24
        rows = ledger.rows()
        assert len(rows) == 12
        assert ('ALL', 'RESIDUAL_SIGN', 2, 24) in rows

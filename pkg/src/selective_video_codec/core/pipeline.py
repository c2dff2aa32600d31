"""Кодер и декодер видеопотока с селективным шифрованием.

Порядок в кадре: CTU в растровом порядке, внутри CTU сначала флаги разбиения,
затем CU в прямом порядке обхода квадродерева. Шифрование выполняется над
значениями элементов непосредственно перед бинаризацией; опорные кадры
кодера строятся из открытых значений.
"""

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from ..components.syntax_elements import (
    ElementClass,
    MvdSyntax,
    SyntaxKind,
)
from .bitstream_container import (
    SUPPORTED_CTU_SIZES,
    Container,
    ContainerFormatError,
    FrameRecord,
    FrameType,
    StreamHeader,
)
from .entropy_coder import BinaryArithmeticDecoder, BinaryArithmeticEncoder
from .frame_io import FrameBuffer, padded_size
from .inter_predictor import (
    ZERO_MV,
    InterPredictor,
    MotionVector,
    compute_mvd,
    fetch_block,
    mvd_to_syntax,
    syntax_to_mvd,
)
from .intra_predictor import (
    DC,
    IntraPredictor,
    ReferenceSamples,
    build_mpm_list,
    gather_references,
    mode_from_ipm_syntax,
)
from .partitioner import CodingUnit, CostFunction, Partitioner, PartitionTree, lambda_from_qp
from .residual_coder import ResidualCoder, apply_sign_pattern, extract_sign_pattern
from .selective_crypto import (
    BlockCipher,
    EncryptionConfig,
    SelectiveEncryptor,
    UnitContext,
    check_resolution,
    create_encryptor,
)
from .syntax_codec import SyntaxReader, SyntaxWriter, TraceEntry

MIN_CU_SIZE = 8
RICE_PARAMETER = 1
MAX_TRANSFORM_SIZE = 32
QP_PRESETS = (8, 24, 40)
INTRA_MODE_BITS = 4.0
LEDGER_SCOPES = ('I', 'P', 'ALL')

Planes = Tuple[npt.NDArray, npt.NDArray, npt.NDArray]


@dataclass
class CodecConfig:
    """Параметры кодирования.

    min_cu_size и rice_parameter зафиксированы форматом контейнера.
    """
    qp: int = 24
    gop_size: int = 8
    ctu_size: int = 32
    search_range: int = 8
    min_cu_size: int = field(default=MIN_CU_SIZE, init=False)
    rice_parameter: int = field(default=RICE_PARAMETER, init=False)

    def __post_init__(self):
        if not 0 <= self.qp <= 51:
            raise ValueError(f"QP вне диапазона [0, 51]: {self.qp}")
        if not 1 <= self.gop_size <= 255:
            raise ValueError(f"Размер GOP вне диапазона [1, 255]: {self.gop_size}")
        if self.ctu_size not in SUPPORTED_CTU_SIZES:
            raise ValueError(f"Размер CTU должен быть одним из {SUPPORTED_CTU_SIZES}: {self.ctu_size}")
        if self.search_range < 0:
            raise ValueError(f"Диапазон поиска не может быть отрицательным: {self.search_range}")

    @property
    def max_depth(self) -> int:
        return (self.ctu_size // self.min_cu_size).bit_length() - 1

    def frame_type(self, frame_index: int) -> FrameType:
        """Первый кадр каждого GOP - I, остальные - P."""
        return FrameType.I if frame_index % self.gop_size == 0 else FrameType.P

    @classmethod
    def from_header(cls, header: StreamHeader) -> 'CodecConfig':
        return cls(qp=header.qp, gop_size=header.gop_size, ctu_size=header.ctu_size)


@dataclass
class EncryptionLedger:
    """Счетчики зашифрованных элементов и бит по классам и типам кадров."""
    counts: Dict[Tuple[str, ElementClass], List[int]] = field(default_factory=dict)

    def record(self, frame_type: Union[FrameType, str], element_class: ElementClass, bits: int):
        name = frame_type.name if isinstance(frame_type, FrameType) else frame_type
        entry = self.counts.setdefault((name, element_class), [0, 0])
        entry[0] += 1
        entry[1] += bits

    def _total(self, index: int, element_class: Optional[ElementClass],
               frame_type: Optional[str]) -> int:
        total = 0
        for (name, cls), values in self.counts.items():
            if frame_type not in (None, 'ALL') and name != frame_type:
                continue
            if element_class is not None and not cls & element_class:
                continue
            total += values[index]
        return total

    def elements(self, element_class: Optional[ElementClass] = None,
                 frame_type: Optional[str] = None) -> int:
        return self._total(0, element_class, frame_type)

    def bits(self, element_class: Optional[ElementClass] = None,
             frame_type: Optional[str] = None) -> int:
        return self._total(1, element_class, frame_type)

    @property
    def total_elements(self) -> int:
        return self.elements()

    @property
    def total_bits(self) -> int:
        return self.bits()

    def rows(self) -> List[Tuple[str, str, int, int]]:
        """Строки (frame_type, class, elements, bits) для I, P и ALL по всем классам."""
        return [
            (scope, cls.name, self.elements(cls, scope), self.bits(cls, scope))
            for scope in LEDGER_SCOPES
            for cls in ElementClass.members()
        ]


@dataclass
class EncodeJob:
    """Задание кодирования: кадры, параметры, шифрование."""
    frames: Sequence[FrameBuffer]
    config: CodecConfig = field(default_factory=CodecConfig)
    encryption: EncryptionConfig = field(default_factory=EncryptionConfig)
    cipher: Optional[BlockCipher] = None

    def __post_init__(self):
        if not self.frames:
            raise ValueError("Нет кадров для кодирования")
        if self.encryption.enabled and self.encryption.key is None and self.cipher is None:
            raise ValueError("Для шифрования требуется ключ")


@dataclass
class EncodeResult:
    bitstream: bytes
    container: Container
    ledger: EncryptionLedger
    reconstruction: List[FrameBuffer]
    frame_bits: List[int]
    elapsed: float = 0.0

    @property
    def payload_bits(self) -> int:
        return sum(self.frame_bits)


@dataclass
class DecodeResult:
    frames: List[FrameBuffer]
    header: StreamHeader
    frame_types: List[FrameType]
    traces: List[List[TraceEntry]] = field(default_factory=list)


def transform_units(size: int) -> List[Tuple[int, int, int]]:
    """Блоки преобразования внутри CU: (dx, dy, размер) в растровом порядке."""
    tsize = min(size, MAX_TRANSFORM_SIZE)
    return [(dx, dy, tsize) for dy in range(0, size, tsize) for dx in range(0, size, tsize)]


def estimate_level_bits(levels: npt.NDArray) -> float:
    """Грубая оценка числа бит уровней одного блока для RD-решений."""
    magnitudes = np.abs(levels[levels != 0])
    if magnitudes.size == 0:
        return 1.0
    return 1.0 + 0.5 * levels.size + float(np.sum(2 * np.floor(np.log2(magnitudes)) + 2))


def estimate_mvd_bits(mvd: Tuple[int, int]) -> float:
    return sum(1.0 if v == 0 else 2.0 + 2 * abs(v).bit_length() for v in mvd)


class _FrameState:
    """Восстановленный кадр и данные соседей, общие для кодера и декодера."""

    def __init__(self, width: int, height: int, frame_index: int, frame_type: FrameType,
                 source_width: int, source_height: int):
        self.recon = FrameBuffer.blank(width, height, frame_index, source_width, source_height)
        self.recon.frame_type = frame_type.name
        self.available = np.zeros((height, width), dtype=bool)
        self.modes = np.full((height, width), -1, dtype=np.int16)
        self.predictor = ZERO_MV

    def neighbour_mode(self, x: int, y: int) -> Optional[int]:
        height, width = self.available.shape
        if not (0 <= x < width and 0 <= y < height) or not self.available[y, x]:
            return None
        mode = int(self.modes[y, x])
        return mode if mode >= 0 else None

    def mpm_list(self, cu: CodingUnit) -> List[int]:
        return build_mpm_list(above=self.neighbour_mode(cu.x, cu.y - 1),
                              left=self.neighbour_mode(cu.x - 1, cu.y))

    def luma_refs(self, cu: CodingUnit) -> ReferenceSamples:
        return gather_references(self.recon.y_plane, cu.x, cu.y, cu.size, self.available)

    def chroma_prediction(self, cu: CodingUnit) -> Tuple[npt.NDArray, npt.NDArray]:
        """Цветоразностные блоки всегда предсказываются в режиме DC."""
        mask = self.available[::2, ::2]
        size = cu.size // 2
        predictor = IntraPredictor()
        return tuple(
            predictor.predict_intra(
                gather_references(plane, cu.x // 2, cu.y // 2, size, mask), DC, size)
            for plane in (self.recon.cb_plane, self.recon.cr_plane)
        )

    def commit(self, cu: CodingUnit, planes: Planes, mode: Optional[int]):
        x, y, size = cu.x, cu.y, cu.size
        luma, cb, cr = planes
        self.recon.y_plane[y:y + size, x:x + size] = luma
        self.recon.cb_plane[y // 2:(y + size) // 2, x // 2:(x + size) // 2] = cb
        self.recon.cr_plane[y // 2:(y + size) // 2, x // 2:(x + size) // 2] = cr
        self.available[y:y + size, x:x + size] = True
        self.modes[y:y + size, x:x + size] = -1 if mode is None else mode


def _cu_planes(frame: FrameBuffer, cu: CodingUnit) -> Planes:
    x, y, size = cu.x, cu.y, cu.size
    cx, cy, csize = x // 2, y // 2, size // 2
    return (
        frame.y_plane[y:y + size, x:x + size],
        frame.cb_plane[cy:cy + csize, cx:cx + csize],
        frame.cr_plane[cy:cy + csize, cx:cx + csize],
    )


class VideoEncoder:
    """Кодер: разбиение, предсказание, остатки, шифрование, арифметическое кодирование."""

    def __init__(self, config: Optional[CodecConfig] = None, verbose: bool = False):
        self.config = config or CodecConfig()
        self.verbose = verbose
        self.lam = lambda_from_qp(self.config.qp)
        self.intra = IntraPredictor()
        self.inter = InterPredictor(self.config.search_range)
        self.residual_coder = ResidualCoder(self.config.qp)
        self.partitioner = Partitioner(self.config.ctu_size, self.config.min_cu_size,
                                       self.config.qp)

    def encode(self, job: EncodeJob) -> EncodeResult:
        """Кодирует все кадры задания."""
        start_time = time.time()
        config = self.config
        source_size = (job.frames[0].source_width, job.frames[0].source_height)
        for index, frame in enumerate(job.frames):
            if (frame.source_width, frame.source_height) != source_size:
                raise ValueError(f"Кадр {index} имеет другой размер")
        frames = [frame.padded_to(config.ctu_size) for frame in job.frames]
        first = frames[0]
        check_resolution(first.width, first.height)

        encryptor = create_encryptor(job.encryption, config.rice_parameter, job.cipher)
        ledger = EncryptionLedger()
        header = StreamHeader(
            width=first.source_width, height=first.source_height, qp=config.qp,
            gop_size=config.gop_size, ctu_size=config.ctu_size,
            enc_flags=job.encryption.header_flags, nonce=job.encryption.nonce,
            frame_count=len(frames),
        )
        container = Container(header=header)

        if self.verbose:
            print(f"Кодирование {len(frames)} кадров {first.source_width}x{first.source_height}, "
                  f"QP={config.qp}, GOP={config.gop_size}, CTU={config.ctu_size}")

        reconstruction: List[FrameBuffer] = []
        frame_bits: List[int] = []
        reference: Optional[FrameBuffer] = None
        for index, frame in enumerate(frames):
            frame_type = config.frame_type(index)
            payload, recon = self._encode_frame(frame, index, frame_type, reference,
                                                encryptor, ledger)
            container.frames.append(FrameRecord(frame_type, payload))
            reconstruction.append(recon)
            frame_bits.append(len(payload) * 8)
            reference = recon
            if self.verbose:
                print(f"Кадр {index} ({frame_type.name}): {len(payload) * 8} бит")

        elapsed = time.time() - start_time
        if self.verbose:
            print(f"Кодирование завершено за {elapsed:.2f} секунд!")

        return EncodeResult(bitstream=container.to_bytes(), container=container, ledger=ledger,
                            reconstruction=reconstruction, frame_bits=frame_bits,
                            elapsed=elapsed)

    def _encode_frame(self, frame: FrameBuffer, index: int, frame_type: FrameType,
                      reference: Optional[FrameBuffer],
                      encryptor: Optional[SelectiveEncryptor],
                      ledger: EncryptionLedger) -> Tuple[bytes, FrameBuffer]:
        ctu = self.config.ctu_size
        encoder = BinaryArithmeticEncoder()
        writer = SyntaxWriter(encoder, self.config.rice_parameter)
        state = _FrameState(frame.width, frame.height, index, frame_type,
                            frame.source_width, frame.source_height)
        cost_fn = self._open_loop_cost(frame, reference if frame_type == FrameType.P else None)

        for y in range(0, frame.height, ctu):
            for x in range(0, frame.width, ctu):
                tree = self.partitioner.partition_ctu(frame.y_plane[y:y + ctu, x:x + ctu],
                                                      cost_fn, (x, y))
                for flag in tree.split_flags(self.config.max_depth):
                    writer.split_flag(bool(flag.value))
                for cu in tree.leaves():
                    self._encode_cu(cu, frame, index, frame_type, reference, state,
                                    writer, encryptor, ledger)

        return encoder.finish(), state.recon

    def _luma_estimate(self, block: npt.NDArray, prediction: npt.NDArray,
                       intra: bool) -> Tuple[float, float]:
        """(биты, SSE) яркости после квантования остатка."""
        residual = block.astype(np.int32) - prediction
        bits = 0.0
        sse = 0.0
        for dx, dy, t in transform_units(block.shape[0]):
            tile = residual[dy:dy + t, dx:dx + t]
            coeffs = self.residual_coder.transform_quant(tile, intra)
            error = tile - self.residual_coder.dequant_itransform(coeffs)
            sse += float(np.sum(error.astype(np.int64) ** 2))
            bits += estimate_level_bits(coeffs.levels)
        return bits, sse

    def _open_loop_cost(self, frame: FrameBuffer,
                        reference: Optional[FrameBuffer]) -> CostFunction:
        """Оценка стоимости блока для разбиения по исходному кадру."""
        def cost(cu: CodingUnit) -> Tuple[float, float]:
            block = frame.y_plane[cu.y:cu.y + cu.size, cu.x:cu.x + cu.size]
            refs = gather_references(frame.y_plane, cu.x, cu.y, cu.size)
            mode, _ = self.intra.select_intra_mode(block, refs, build_mpm_list(None, None))
            bits, sse = self._luma_estimate(block, self.intra.predict_intra(refs, mode, cu.size),
                                            intra=True)
            best = (bits + INTRA_MODE_BITS, sse)
            if reference is not None:
                mv = self.inter.motion_search(block, reference, cu.origin)
                prediction = fetch_block(reference.y_plane, cu.x + mv.mvx, cu.y + mv.mvy, cu.size)
                bits, sse = self._luma_estimate(block, prediction, intra=False)
                candidate = (bits + 1 + estimate_mvd_bits((mv.mvx, mv.mvy)), sse)
                if self._rd(candidate) < self._rd(best):
                    best = candidate
            return best
        return cost

    def _rd(self, estimate: Tuple[float, float]) -> float:
        bits, distortion = estimate
        return distortion + self.lam * bits

    def _encode_cu(self, cu: CodingUnit, frame: FrameBuffer, index: int,
                   frame_type: FrameType, reference: Optional[FrameBuffer],
                   state: _FrameState, writer: SyntaxWriter,
                   encryptor: Optional[SelectiveEncryptor], ledger: EncryptionLedger):
        ctx = UnitContext(index, cu.x, cu.y)
        originals = _cu_planes(frame, cu)
        block = originals[0]

        mpm_list = state.mpm_list(cu)
        refs = state.luma_refs(cu)
        mode, ipm_syntax = self.intra.select_intra_mode(block, refs, mpm_list)
        intra_prediction = self.intra.predict_intra(refs, mode, cu.size)

        is_inter = False
        if frame_type == FrameType.P:
            mv = self.inter.motion_search(block, reference, cu.origin)
            inter_predictions = self.inter.predict_inter(reference, cu.origin, cu.size, mv)
            intra_cost = self._rd(self._luma_estimate(block, intra_prediction, True)) + \
                self.lam * (INTRA_MODE_BITS + 1)
            bits, sse = self._luma_estimate(block, inter_predictions[0], False)
            inter_cost = self._rd((bits + 1 + estimate_mvd_bits(compute_mvd(mv, state.predictor)),
                                   sse))
            is_inter = inter_cost < intra_cost
            writer.pred_mode(is_inter)

        if is_inter:
            cu.is_inter, cu.mv = True, mv
            mvd_x, mvd_y = compute_mvd(mv, state.predictor)
            syntax_x, syntax_y = mvd_to_syntax(mvd_x), mvd_to_syntax(mvd_y)
            if encryptor is not None:
                syntax_x = self._encrypt_mvd(encryptor, syntax_x, ctx, frame_type, ledger)
                syntax_y = self._encrypt_mvd(encryptor, syntax_y, ctx.advanced(1), frame_type,
                                             ledger)
            writer.mvd(syntax_x, syntax_y)
            state.predictor = mv
            predictions = inter_predictions
            committed_mode = None
        else:
            cu.intra_mode = mode
            if encryptor is not None and encryptor.classes & ElementClass.LUMA_IPM:
                ledger.record(frame_type, ElementClass.LUMA_IPM, 3 if ipm_syntax.is_mpm else 6)
                ipm_syntax = encryptor.encrypt_ipm(ipm_syntax, ctx)
            writer.ipm(ipm_syntax)
            predictions = (intra_prediction, *state.chroma_prediction(cu))
            committed_mode = mode

        sign_ctx = ctx
        reconstructed = []
        for original, prediction in zip(originals, predictions):
            recon, sign_ctx = self._code_residual(original, prediction, not is_inter, sign_ctx,
                                                  frame_type, writer, encryptor, ledger)
            reconstructed.append(recon)
        state.commit(cu, tuple(reconstructed), committed_mode)

    def _encrypt_mvd(self, encryptor: SelectiveEncryptor, syntax: MvdSyntax, ctx: UnitContext,
                     frame_type: FrameType, ledger: EncryptionLedger) -> MvdSyntax:
        if syntax.sign is not None and encryptor.classes & ElementClass.MVD_SIGN:
            ledger.record(frame_type, ElementClass.MVD_SIGN, 1)
        k = self.config.rice_parameter
        if syntax.abs_minus_2 is not None and k > 0 and encryptor.classes & ElementClass.MVD_VALUE:
            ledger.record(frame_type, ElementClass.MVD_VALUE, k)
        return encryptor.encrypt_mvd(syntax, ctx)

    def _code_residual(self, original: npt.NDArray, prediction: npt.NDArray, intra: bool,
                       sign_ctx: UnitContext, frame_type: FrameType, writer: SyntaxWriter,
                       encryptor: Optional[SelectiveEncryptor],
                       ledger: EncryptionLedger) -> Tuple[npt.NDArray[np.uint8], UnitContext]:
        residual = original.astype(np.int32) - prediction
        recon = prediction.astype(np.int32).copy()
        for dx, dy, t in transform_units(original.shape[0]):
            coeffs = self.residual_coder.transform_quant(residual[dy:dy + t, dx:dx + t], intra)
            pattern, magnitudes = extract_sign_pattern(coeffs)
            if encryptor is not None:
                if len(pattern) and encryptor.classes & ElementClass.RESIDUAL_SIGN:
                    ledger.record(frame_type, ElementClass.RESIDUAL_SIGN, len(pattern))
                pattern, sign_ctx = encryptor.encrypt_sign_pattern(pattern, sign_ctx)
            writer.residual(magnitudes, pattern)
            recon[dy:dy + t, dx:dx + t] += self.residual_coder.dequant_itransform(coeffs)
        return np.clip(recon, 0, 255).astype(np.uint8), sign_ctx


class VideoDecoder:
    """Декодер. Без ключа (или с неверным ключом) поток разбирается полностью."""

    def __init__(self, key: Optional[bytes] = None, cipher: Optional[BlockCipher] = None,
                 keep_trace: bool = False, verbose: bool = False):
        self.key = key
        self.cipher = cipher
        self.keep_trace = keep_trace
        self.verbose = verbose

    def decode(self, bitstream: Union[bytes, Container]) -> DecodeResult:
        """Восстанавливает кадры из контейнера.

        Raises:
            ContainerFormatError: Поврежденный заголовок или записи кадров
            TruncatedStreamError: Полезная нагрузка кадра обрезана
        """
        container = bitstream if isinstance(bitstream, Container) else \
            Container.from_bytes(bitstream)
        header = container.header
        try:
            config = CodecConfig.from_header(header)
        except ValueError as e:
            raise ContainerFormatError(str(e)) from e

        encryption = EncryptionConfig(classes=ElementClass(header.enc_flags), key=self.key,
                                      nonce=header.nonce)
        decryptor = create_encryptor(encryption, config.rice_parameter, self.cipher)

        frames: List[FrameBuffer] = []
        traces: List[List[TraceEntry]] = []
        frame_types: List[FrameType] = []
        reference: Optional[FrameBuffer] = None
        for index, record in enumerate(container.frames):
            if record.frame_type == FrameType.P and reference is None:
                raise ContainerFormatError(f"P-кадр {index} без опорного кадра")
            trace: Optional[List[TraceEntry]] = [] if self.keep_trace else None
            recon = self._decode_frame(record, index, header, config, reference, decryptor, trace)
            frames.append(recon)
            frame_types.append(record.frame_type)
            if trace is not None:
                traces.append(trace)
            reference = recon
            if self.verbose:
                print(f"Кадр {index} ({record.frame_type.name}) декодирован")

        return DecodeResult(frames=frames, header=header, frame_types=frame_types, traces=traces)

    def _decode_frame(self, record: FrameRecord, index: int, header: StreamHeader,
                      config: CodecConfig, reference: Optional[FrameBuffer],
                      decryptor: Optional[SelectiveEncryptor],
                      trace: Optional[List[TraceEntry]]) -> FrameBuffer:
        ctu = config.ctu_size
        width = padded_size(header.width, ctu)
        height = padded_size(header.height, ctu)
        reader = SyntaxReader(BinaryArithmeticDecoder(record.payload), config.rice_parameter, trace)
        state = _FrameState(width, height, index, record.frame_type, header.width, header.height)
        residual_coder = ResidualCoder(config.qp)
        intra = IntraPredictor()

        for y in range(0, height, ctu):
            for x in range(0, width, ctu):
                tree = PartitionTree.tree_parse(reader.split_flag, x, y, ctu, config.max_depth)
                for cu in tree.leaves():
                    self._decode_cu(cu, index, record.frame_type, reference, state, reader,
                                    decryptor, residual_coder, intra)

        return state.recon

    def _decode_cu(self, cu: CodingUnit, index: int, frame_type: FrameType,
                   reference: Optional[FrameBuffer], state: _FrameState, reader: SyntaxReader,
                   decryptor: Optional[SelectiveEncryptor], residual_coder: ResidualCoder,
                   intra: IntraPredictor):
        ctx = UnitContext(index, cu.x, cu.y)
        is_inter = reader.pred_mode() if frame_type == FrameType.P else False

        if is_inter:
            syntax_x, syntax_y = reader.mvd()
            if decryptor is not None:
                syntax_x = decryptor.decrypt_mvd(syntax_x, ctx)
                syntax_y = decryptor.decrypt_mvd(syntax_y, ctx.advanced(1))
            mv = state.predictor + MotionVector(syntax_to_mvd(syntax_x), syntax_to_mvd(syntax_y))
            state.predictor = mv
            cu.is_inter, cu.mv = True, mv
            predictions = InterPredictor.predict_inter(reference, cu.origin, cu.size, mv)
            mode = None
        else:
            ipm_syntax = reader.ipm()
            if decryptor is not None:
                ipm_syntax = decryptor.decrypt_ipm(ipm_syntax, ctx)
            mode = mode_from_ipm_syntax(ipm_syntax, state.mpm_list(cu))
            cu.intra_mode = mode
            luma = intra.predict_intra(state.luma_refs(cu), mode, cu.size)
            predictions = (luma, *state.chroma_prediction(cu))

        sign_ctx = ctx
        reconstructed = []
        for prediction in predictions:
            recon = prediction.astype(np.int32).copy()
            for dx, dy, t in transform_units(prediction.shape[0]):
                magnitudes, pattern = reader.residual(t)
                if decryptor is not None:
                    pattern, sign_ctx = decryptor.decrypt_sign_pattern(pattern, sign_ctx)
                coeffs = apply_sign_pattern(pattern, magnitudes, t)
                recon[dy:dy + t, dx:dx + t] += residual_coder.dequant_itransform(coeffs)
            reconstructed.append(np.clip(recon, 0, 255).astype(np.uint8))
        state.commit(cu, tuple(reconstructed), mode)


TRACE_CLASSES = {
    SyntaxKind.MPM_INDEX: ElementClass.LUMA_IPM,
    SyntaxKind.REM_MODE: ElementClass.LUMA_IPM,
    SyntaxKind.MVD_MINUS2: ElementClass.MVD_VALUE,
    SyntaxKind.MVD_SIGN: ElementClass.MVD_SIGN,
    SyntaxKind.SIGN_PATTERN: ElementClass.RESIDUAL_SIGN,
}


def recount_encryption_space(bitstream: Union[bytes, Container],
                             classes: Optional[ElementClass] = None) -> EncryptionLedger:
    """Независимый пересчет пространства шифрования по трассе разбора потока.

    Args:
        bitstream: Контейнер
        classes: Учитываемые классы; по умолчанию - из enc_flags заголовка
    """
    result = VideoDecoder(keep_trace=True).decode(bitstream)
    if classes is None:
        classes = ElementClass(result.header.enc_flags)

    ledger = EncryptionLedger()
    for frame_type, trace in zip(result.frame_types, result.traces):
        for entry in trace:
            element_class = TRACE_CLASSES.get(entry.kind)
            if element_class is None or not classes & element_class or entry.length == 0:
                continue
            ledger.record(frame_type, element_class, entry.length)
    return ledger


# Функции для обратной совместимости
def encode(job: EncodeJob, verbose: bool = False) -> EncodeResult:
    """Кодирует задание; возвращает поток, журнал шифрования и размеры."""
    return VideoEncoder(job.config, verbose=verbose).encode(job)


def decode(bitstream: Union[bytes, Container], key: Optional[bytes] = None,
           cipher: Optional[BlockCipher] = None) -> List[FrameBuffer]:
    """Декодирует поток; key=None - разбор без расшифрования."""
    return VideoDecoder(key=key, cipher=cipher).decode(bitstream).frames

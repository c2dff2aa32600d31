"""Разбиение CTU на квадродерево блоков кодирования."""

from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Tuple

import numpy.typing as npt

from ..components.syntax_elements import SyntaxElement, SyntaxKind
from .inter_predictor import MotionVector

SPLIT_FLAG_BITS = 1


def lambda_from_qp(qp: int) -> float:
    """Множитель Лагранжа 0.85 * 2^((QP - 12) / 3)."""
    return 0.85 * 2.0 ** ((qp - 12) / 3.0)


def max_depth_for(ctu_size: int, min_cu_size: int) -> int:
    """Число уровней разбиения от CTU до минимального блока."""
    if ctu_size < min_cu_size or ctu_size & (ctu_size - 1) or min_cu_size & (min_cu_size - 1):
        raise ValueError(f"Недопустимые размеры CTU/CU: {ctu_size}/{min_cu_size}")
    return (ctu_size // min_cu_size).bit_length() - 1


@dataclass
class CodingUnit:
    """Лист разбиения. Поля режима заполняются при кодировании."""
    x: int
    y: int
    size: int
    depth: int = 0
    is_inter: bool = False
    intra_mode: Optional[int] = None
    mv: Optional[MotionVector] = None

    @property
    def origin(self) -> Tuple[int, int]:
        return self.x, self.y


@dataclass
class PartitionTree:
    """Узел квадродерева: либо четыре потомка, либо лист с CodingUnit."""
    x: int
    y: int
    size: int
    depth: int = 0
    children: List['PartitionTree'] = field(default_factory=list)
    unit: Optional[CodingUnit] = None

    def __post_init__(self):
        if not self.children and self.unit is None:
            self.unit = CodingUnit(self.x, self.y, self.size, self.depth)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def split(self) -> List['PartitionTree']:
        """Делит лист на 4 квадранта в z-порядке."""
        half = self.size // 2
        self.children = [
            PartitionTree(self.x + dx, self.y + dy, half, self.depth + 1)
            for dy in (0, half) for dx in (0, half)
        ]
        self.unit = None
        return self.children

    def leaves(self) -> Iterator[CodingUnit]:
        """Листья в прямом порядке обхода (порядок кодирования CU)."""
        if self.is_leaf:
            yield self.unit
            return
        for child in self.children:
            yield from child.leaves()

    def shape(self) -> Tuple:
        """Структура дерева без данных CU, для сравнения деревьев."""
        if self.is_leaf:
            return (self.x, self.y, self.size)
        return tuple(child.shape() for child in self.children)

    def split_flags(self, max_depth: int) -> List[SyntaxElement]:
        """Флаги разбиения в прямом порядке; на максимальной глубине флаг не передается."""
        flags: List[SyntaxElement] = []
        self._collect_flags(max_depth, flags)
        return flags

    def _collect_flags(self, max_depth: int, flags: List[SyntaxElement]):
        if self.depth < max_depth:
            flags.append(SyntaxElement(SyntaxKind.SPLIT_FLAG, int(not self.is_leaf), 1))
        for child in self.children:
            child._collect_flags(max_depth, flags)

    @classmethod
    def tree_parse(cls, read_flag: Callable[[], int], x: int, y: int, size: int,
                   max_depth: int, depth: int = 0) -> 'PartitionTree':
        """Восстанавливает дерево из флагов, прочитанных в прямом порядке."""
        node = cls(x, y, size, depth)
        if depth < max_depth and read_flag():
            for child in node.split():
                parsed = cls.tree_parse(read_flag, child.x, child.y, child.size,
                                        max_depth, depth + 1)
                child.children, child.unit = parsed.children, parsed.unit
        return node


CostFunction = Callable[[CodingUnit], Tuple[float, float]]


class Partitioner:
    """Жадное RD-разбиение сверху вниз.

    Узел делится, если сумма стоимостей четырех потомков как листьев плюс
    стоимость флага разбиения меньше стоимости узла как листа.
    Стоимость = искажение + lambda * биты.
    """

    def __init__(self, ctu_size: int = 32, min_cu_size: int = 8, qp: int = 24,
                 max_depth: Optional[int] = None):
        self.ctu_size = ctu_size
        self.min_cu_size = min_cu_size
        self.max_depth = max_depth_for(ctu_size, min_cu_size) if max_depth is None else max_depth
        self.lam = lambda_from_qp(qp)

    def unit_cost(self, cost_fn: CostFunction, unit: CodingUnit) -> float:
        bits, distortion = cost_fn(unit)
        return distortion + self.lam * bits

    def partition_ctu(self, ctu_pixels: npt.NDArray, cost_fn: CostFunction,
                      origin: Tuple[int, int] = (0, 0)) -> PartitionTree:
        """Дерево разбиения одного CTU.

        Args:
            ctu_pixels: Отсчеты яркости CTU (ctu_size x ctu_size)
            cost_fn: Оценка (биты, искажение) блока-кандидата в координатах кадра
            origin: Положение CTU в кадре
        """
        if ctu_pixels.shape[:2] != (self.ctu_size, self.ctu_size):
            raise ValueError(
                f"Размер CTU {ctu_pixels.shape[:2]} не равен {self.ctu_size}x{self.ctu_size}"
            )
        root = PartitionTree(origin[0], origin[1], self.ctu_size, 0)
        self._decide(root, cost_fn, self.unit_cost(cost_fn, root.unit))
        return root

    def _decide(self, node: PartitionTree, cost_fn: CostFunction, leaf_cost: float):
        if node.depth >= self.max_depth:
            return
        half = node.size // 2
        candidates = [
            CodingUnit(node.x + dx, node.y + dy, half, node.depth + 1)
            for dy in (0, half) for dx in (0, half)
        ]
        child_costs = [self.unit_cost(cost_fn, unit) for unit in candidates]
        if sum(child_costs) + self.lam * SPLIT_FLAG_BITS < leaf_cost:
            for child, cost in zip(node.split(), child_costs):
                self._decide(child, cost_fn, cost)


# Функции для обратной совместимости
def partition_ctu(ctu_pixels: npt.NDArray, cost_fn: CostFunction, max_depth: int = 2,
                  qp: int = 24, origin: Tuple[int, int] = (0, 0)) -> PartitionTree:
    """Разбиение CTU с размером минимального блока ctu / 2^max_depth."""
    size = ctu_pixels.shape[0]
    partitioner = Partitioner(size, size >> max_depth, qp, max_depth)
    return partitioner.partition_ctu(ctu_pixels, cost_fn, origin)


def split_flags(tree: PartitionTree, max_depth: int = 2) -> List[SyntaxElement]:
    return tree.split_flags(max_depth)


tree_parse = PartitionTree.tree_parse

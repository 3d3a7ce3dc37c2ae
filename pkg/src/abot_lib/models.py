# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""File schemas. Every model converts to its domain value with to_domain()."""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Type, TypeVar, Union

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError

from .anisotropy import Anisotropy, BranchingFunction, SymmetricPolygon
from .currents import PolyhedralOneCurrent, ZeroCurrent
from .errors import DomainError, ProblemParseError
from .flat_norm import Triangulation
from .igrep import DirectionMeasure
from .solver import SolveBudget, TransportProblem

Number = Union[float, str]
ModelT = TypeVar('ModelT', bound=BaseModel)


class BranchingModel(BaseModel):
    kind: Literal['power', 'affine_jump', 'tabulated'] = Field('power', description="Family of the branching function H")
    alpha: float = Field(0.5, description="Exponent of power: H(y) = |y|^alpha")
    a: float = Field(0.0, description="Jump of affine_jump: H(y) = a + b|y| for y != 0")
    b: float = Field(1.0, description="Slope of affine_jump")
    knots: List[Tuple[float, float]] = Field(default_factory=list, description="(y, H(y)) knots of tabulated")

    def to_domain(self) -> BranchingFunction:
        if self.kind == 'power':
            return BranchingFunction.power(self.alpha)
        if self.kind == 'affine_jump':
            return BranchingFunction.affine_jump(self.a, self.b)
        return BranchingFunction.tabulated(self.knots)

    @classmethod
    def from_domain(cls, H: BranchingFunction) -> 'BranchingModel':
        return cls(**H.describe())


class AnisotropyModel(BaseModel):
    kind: Literal['constant', 'euclidean', 'polygonal', 'lp', 'fourier'] = Field(
        'euclidean', description="How sigma is given")
    dim: int = Field(2, ge=2, description="Ambient dimension")
    c: float = Field(1.0, gt=0, description="Value of a constant anisotropy")
    vertices: Optional[List[List[float]]] = Field(None, description="Centrally symmetric unit ball, counterclockwise")
    p: Optional[Union[float, str]] = Field(None, description="Exponent of lp; 'inf' for the maximum norm")
    c0: float = Field(1.0, description="Mean of a fourier anisotropy")
    cos: List[float] = Field(default_factory=list, description="cos(k phi) coefficients, k = 1, 2, ...")
    sin: List[float] = Field(default_factory=list, description="sin(k phi) coefficients, k = 1, 2, ...")

    def to_domain(self) -> Anisotropy:
        if self.kind == 'constant':
            return Anisotropy.constant(self.c, self.dim)
        if self.kind == 'euclidean':
            return Anisotropy.euclidean(self.dim)
        if self.kind == 'polygonal':
            if not self.vertices:
                raise DomainError("polygonal anisotropy needs vertices")
            return Anisotropy.polygonal(SymmetricPolygon(np.array(self.vertices, dtype=float)))
        if self.kind == 'lp':
            if self.p is None:
                raise DomainError("lp anisotropy needs p")
            p = math.inf if str(self.p).lower() in ('inf', 'infinity') else float(self.p)
            return Anisotropy.lp(p, self.dim)
        return Anisotropy.fourier(self.c0, self.cos, self.sin)

    @classmethod
    def from_domain(cls, sigma: Anisotropy) -> 'AnisotropyModel':
        """Constant and polygonal anisotropies only; functional ones have no file form."""
        if sigma.kind == 'constant':
            if sigma.label == 'euclidean':
                return cls(kind='euclidean', dim=sigma.dim)
            return cls(kind='constant', c=sigma.c, dim=sigma.dim)
        if sigma.kind == 'polygonal':
            return cls(kind='polygonal', vertices=sigma.polygon.to_list())
        raise DomainError(f"Anisotropy '{sigma.label}' cannot be written to a file")


class AtomModel(BaseModel):
    p: List[Number] = Field(..., description="Coordinates; a string names an entry of the problem params")
    m: Number = Field(1.0, description="Mass")


class BudgetModel(BaseModel):
    mode: Literal['exhaustive', 'local'] = Field('exhaustive', description="Topology search mode")
    max_steiner: Optional[int] = Field(None, ge=0, description="Steiner node cap (default terminals - 2)")
    seeds: int = Field(3, ge=1, description="Local-search restarts")
    iters: int = Field(2000, ge=1, description="Position optimizer iteration cap")
    max_evaluations: int = Field(500, ge=1, description="Topology evaluations per local-search restart")
    max_topologies: Optional[int] = Field(None, ge=1, description="Exhaustive-mode cap on evaluated topologies")

    def to_domain(self) -> SolveBudget:
        return SolveBudget(**self.model_dump())


class ProblemModel(BaseModel):
    sources: List[AtomModel] = Field(..., min_length=1, description="Source atoms of mu-")
    targets: List[AtomModel] = Field(..., min_length=1, description="Target atoms of mu+")
    H: BranchingModel = Field(default_factory=BranchingModel, description="Branching function")
    sigma: AnisotropyModel = Field(default_factory=AnisotropyModel, description="Anisotropy")
    params: Dict[str, float] = Field(default_factory=dict, description="Named values usable as coordinates or masses")
    budget: Optional[BudgetModel] = Field(None, description="Search budget")
    label: str = Field("", description="Free-form instance name")

    def resolve(self, value: Number, params: Dict[str, float]) -> float:
        if isinstance(value, str):
            if value not in params:
                raise ProblemParseError(f"Unknown parameter '{value}'")
            return float(params[value])
        return float(value)

    def to_domain(self, overrides: Optional[Dict[str, float]] = None) -> TransportProblem:
        params = dict(self.params)
        params.update(overrides or {})

        def atoms(items: List[AtomModel]):
            return [([self.resolve(x, params) for x in a.p], self.resolve(a.m, params)) for a in items]

        return TransportProblem.from_atoms(atoms(self.sources), atoms(self.targets), self.H.to_domain(),
                                           self.sigma.to_domain(), label=self.label)


class EdgeModel(BaseModel):
    a: List[float] = Field(..., description="Start point")
    b: List[float] = Field(..., description="End point")
    theta: float = Field(1.0, description="Multiplicity")


class CurrentModel(BaseModel):
    name: str = Field("", description="Instance name")
    edges: List[EdgeModel] = Field(default_factory=list, description="Oriented weighted segments")
    dim: int = Field(2, ge=1, description="Ambient dimension, used when edges is empty")

    def to_domain(self) -> PolyhedralOneCurrent:
        return PolyhedralOneCurrent.from_edges([(e.a, e.b, e.theta) for e in self.edges], self.dim)

    @classmethod
    def from_domain(cls, P: PolyhedralOneCurrent, name: str = "") -> 'CurrentModel':
        return cls(name=name, dim=P.dim, edges=[EdgeModel(a=list(a), b=list(b), theta=t) for a, b, t in P.edges()])


class WeightedAtomModel(BaseModel):
    p: List[float] = Field(..., description="Point")
    w: float = Field(..., description="Signed weight")


class ZeroCurrentModel(BaseModel):
    atoms: List[WeightedAtomModel] = Field(default_factory=list, description="Dirac atoms")
    dim: int = Field(2, ge=1, description="Ambient dimension, used when atoms is empty")

    def to_domain(self) -> ZeroCurrent:
        return ZeroCurrent.from_atoms([(a.p, a.w) for a in self.atoms], self.dim)


class MeshModel(BaseModel):
    vertices: List[Tuple[float, float]] = Field(..., description="Planar vertices")
    triangles: List[Tuple[int, int, int]] = Field(..., description="Vertex index triples")

    def to_domain(self) -> Triangulation:
        return Triangulation(np.array(self.vertices, dtype=float), np.array(self.triangles, dtype=int))


class MeasureAtomModel(BaseModel):
    omega: Tuple[float, float] = Field(..., description="Direction of the line")
    mass: float = Field(..., gt=0, description="Weight")


class MeasureModel(BaseModel):
    atoms: List[MeasureAtomModel] = Field(default_factory=list, description="Atoms on unoriented directions")

    def to_domain(self) -> DirectionMeasure:
        return DirectionMeasure.from_json([a.model_dump() for a in self.atoms])


class PolygonModel(BaseModel):
    vertices: List[List[float]] = Field(..., min_length=4, description="Centrally symmetric polygon, counterclockwise")

    def to_domain(self) -> SymmetricPolygon:
        return SymmetricPolygon(np.array(self.vertices, dtype=float))


class HypermetricRequestModel(BaseModel):
    norm: AnisotropyModel = Field(..., description="Norm to test")
    max_points: int = Field(7, ge=2, description="Largest a = sum of |x_i|")
    coeff_bound: int = Field(2, ge=1, description="Largest |x_i|")
    grid_points: Optional[List[List[float]]] = Field(None, description="Candidate points (default: integer grid)")


class SlicingRequestModel(BaseModel):
    gauge: AnisotropyModel = Field(..., description="Planar gauge whose measure drives the slicing")
    H: BranchingModel = Field(default_factory=BranchingModel, description="Branching function")
    currents: List[CurrentModel] = Field(..., description="Instances to check")


class LscRequestModel(BaseModel):
    family: str = Field(..., description="Sequence family: staircase or oscillation")
    ks: List[int] = Field(default_factory=lambda: [1, 2, 4, 8], description="Sequence indices")
    H: BranchingModel = Field(default_factory=BranchingModel, description="Branching function")
    sigma: AnisotropyModel = Field(default_factory=AnisotropyModel, description="Anisotropy")


class FlatnormDocumentModel(BaseModel):
    """A 0-current (atoms) or a 1-current (edges), with an optional mesh for 1-currents."""

    atoms: Optional[List[WeightedAtomModel]] = Field(None, description="Atoms of a 0-current")
    edges: Optional[List[EdgeModel]] = Field(None, description="Edges of a 1-current")
    mesh: Optional[MeshModel] = Field(None, description="Triangulation carrying the 1-currents")
    dim: int = Field(2, ge=1, description="Ambient dimension")

    @property
    def is_zero_current(self) -> bool:
        return self.atoms is not None


def load_document(path: Union[str, Path]) -> Any:
    """
    Read a JSON or YAML file (by suffix).

    Raises:
        ProblemParseError: With line and column when the parser reports them
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ProblemParseError(f"Cannot read {path}: {e.strerror}")
    if path.suffix.lower() in ('.yaml', '.yml'):
        try:
            return yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, 'problem_mark', None)
            if mark is not None:
                raise ProblemParseError(f"Malformed YAML in {path}: {getattr(e, 'problem', e)}",
                                        mark.line + 1, mark.column + 1)
            raise ProblemParseError(f"Malformed YAML in {path}: {e}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemParseError(f"Malformed JSON in {path}: {e.msg}", e.lineno, e.colno)


def parse_model(model: Type[ModelT], data: Any, source: str = "input") -> ModelT:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = '.'.join(str(x) for x in first['loc']) or '<root>'
        raise ProblemParseError(f"Invalid {source}: {where}: {first['msg']}")


def load_model(model: Type[ModelT], path: Union[str, Path]) -> ModelT:
    return parse_model(model, load_document(path), source=str(path))

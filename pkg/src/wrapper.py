# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Batch pipelines behind run_abot.py: each run_* method reads its input file, calls the
library, and writes JSON, CSV and SVG artifacts into the output directory. Methods
return the process exit code.
"""

import logging
import os
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import report
from .abot_lib import experiments
from .abot_lib.currents import PolyhedralOneCurrent, ZeroCurrent, canonicalize
from .abot_lib.errors import DomainError, NonConformingMeshError, UnsupportedDimensionError
from .abot_lib.flat_norm import Triangulation, flat_distance_one_upper, flat_distance_zero
from .abot_lib.igrep import (HypermetricSearchBudget, approximation_sequence, hausdorff_to_body,
                             hypermetric_search, integral_geometric_status, polygon_decompose,
                             reconstruction_error, representing_measure)
from .abot_lib.models import (AnisotropyModel, BudgetModel, CurrentModel, FlatnormDocumentModel,
                              HypermetricRequestModel, LscRequestModel, MeshModel, PolygonModel, ProblemModel,
                              SlicingRequestModel, ZeroCurrentModel, load_model)
from .abot_lib.solver import (NetworkVerification, SolveResult, TransportProblem, brute_force_oracle, solve,
                              verify_network)
from .abot_lib.svg import render_current, render_network
from .config_manager import config
from .constants import (DEFAULT_TOLERANCES, EXIT_BUDGET_EXCEEDED, EXIT_OK, MAX_APPROX_DEPTH, MIN_APPROX_DEPTH)

logger = logging.getLogger(__name__)

SOLVE_COLUMNS = ['instance', 'mode', 'cost', 'oracle_cost', 'oracle_gap', 'n_topologies', 'n_ties',
                 'n_branch_points', 'budget_exhausted', 'mass', 'mass_bound_C', 'max_multiplicity',
                 'acyclic', 'linf_bound_ok', 'verified']


class AbotWrapper:

    def __init__(self, input_path: str, prefix: Optional[str] = None, seed: int = 0, threads: int = 1,
                 tolerances: Optional[Dict[str, float]] = None):
        self.input_path = input_path
        self.prefix = prefix if prefix else config.get("ABOT_OUTPUT_PREFIX")
        self.seed = seed
        self.threads = threads
        self.tolerances = dict(tolerances) if tolerances else dict(DEFAULT_TOLERANCES)
        os.makedirs(self.prefix, exist_ok=True)

    def _report(self, command: str, columns: Sequence[str] = (), csv_name: str = "metrics.csv") -> report.Report:
        return report.Report(command=command, prefix=self.prefix, columns=list(columns),
                             tolerances=self.tolerances, seed=self.seed, csv_name=csv_name)

    # ----------------------------------------
    # solve
    # ----------------------------------------

    def _budget(self, model: ProblemModel, mode: Optional[str], max_steiner: Optional[int],
                iters: Optional[int]) -> BudgetModel:
        budget = model.budget.model_copy() if model.budget else BudgetModel(iters=config.get("ABOT_MAX_ITERS"))
        if mode is not None:
            budget.mode = mode
        if max_steiner is not None:
            budget.max_steiner = max_steiner
        if iters is not None:
            budget.iters = iters
        return budget

    @staticmethod
    def oracle_grid(problem: TransportProblem, shape: Tuple[int, int]) -> np.ndarray:
        """Regular gx x gy grid spanning the bounding box of the terminals."""
        if problem.dim != 2:
            raise UnsupportedDimensionError("The oracle grid is planar")
        P = problem.terminal_points
        lo, hi = P.min(axis=0), P.max(axis=0)
        xs = np.linspace(lo[0], hi[0], shape[0])
        ys = np.linspace(lo[1], hi[1], shape[1])
        return np.array([[x, y] for x in xs for y in ys])

    def _solve_one(self, problem: TransportProblem, budget: BudgetModel,
                   oracle_shape: Optional[Tuple[int, int]]) -> Tuple[SolveResult, Dict, NetworkVerification]:
        result = solve(problem, budget.to_domain(), seed=self.seed, tol=self.tolerances['optimizer'],
                       threads=self.threads, axiom_tol=self.tolerances['axiom'])
        best = result.best
        check = verify_network(best, problem)
        oracle_cost = None
        if oracle_shape is not None:
            oracle_cost = brute_force_oracle(problem, self.oracle_grid(problem, oracle_shape)).cost
        row = {
            'instance': problem.label or os.path.splitext(os.path.basename(self.input_path))[0],
            'mode': result.mode,
            'cost': best.cost,
            'oracle_cost': oracle_cost,
            'oracle_gap': None if oracle_cost is None else oracle_cost - best.cost,
            'n_topologies': result.n_topologies,
            'n_ties': len(result.ties),
            'n_branch_points': best.n_branch_points,
            'budget_exhausted': result.budget_exhausted,
            'mass': best.diagnostics.mass,
            'mass_bound_C': best.diagnostics.mass_bound_C,
            'max_multiplicity': best.diagnostics.max_multiplicity,
            'acyclic': best.diagnostics.acyclic,
            'linf_bound_ok': best.diagnostics.linf_bound_ok,
            'verified': check.all_ok,
        }
        if not check.all_ok:
            logger.warning(f"Network for {row['instance']} failed verification: {check.to_json()}")
        return result, row, check

    @staticmethod
    def _network_record(problem: TransportProblem, result: SolveResult, check: NetworkVerification) -> Dict:
        return {
            'label': problem.label,
            'mode': result.mode,
            'budget_exhausted': result.budget_exhausted,
            'n_topologies': result.n_topologies,
            'best': result.best.to_json(),
            'ties': [net.to_json() for net in result.ties],
            'verification': check.to_json(),
        }

    def _draw(self, rep: report.Report, name: str, problem: TransportProblem, result: SolveResult) -> None:
        if problem.dim != 2:
            logger.info(f"Skipping {name}: only planar networks are drawn")
            return
        svg = render_network(result.best.current, problem.H, problem.source_points, problem.target_points,
                             result.best.steiner_positions, title=problem.label or None)
        report.write_text(rep.add_artifact(name), svg)

    def run_solve(self, mode: Optional[str] = None, max_steiner: Optional[int] = None,
                  oracle_shape: Optional[Tuple[int, int]] = None, sweep: Optional[Tuple[str, List[float]]] = None,
                  iters: Optional[int] = None) -> int:
        """
        Solve the problem file (optionally over a parameter sweep) and write network.json,
        metrics.csv and network.svg (network_NNN.svg per sweep point).
        """
        model = load_model(ProblemModel, self.input_path)
        budget = self._budget(model, mode, max_steiner, iters)
        columns = ([sweep[0]] if sweep else []) + SOLVE_COLUMNS
        rep = self._report('solve', columns)

        if sweep is None:
            problem = model.to_domain()
            result, row, check = self._solve_one(problem, budget, oracle_shape)
            rep.add_row(**row)
            report.write_json(rep.add_artifact("network.json"), self._network_record(problem, result, check))
            self._draw(rep, "network.svg", problem, result)
            exhausted = result.budget_exhausted
        else:
            var, values = sweep
            if var not in model.params:
                raise DomainError(f"Sweep variable '{var}' is not a parameter of the problem "
                                  f"(known: {sorted(model.params)})")
            runs = []
            exhausted = False
            previous = None
            for idx, value in enumerate(values):
                problem = model.to_domain({var: value})
                result, row, check = self._solve_one(problem, budget, oracle_shape)
                rep.add_row(**{var: value}, **row)
                runs.append({var: value, **self._network_record(problem, result, check)})
                self._draw(rep, f"network_{idx:03d}.svg", problem, result)
                exhausted = exhausted or result.budget_exhausted
                branching = row['n_branch_points'] > 0
                if previous is not None and branching != previous and 'branch_switch' not in rep.summary:
                    rep.summary['branch_switch'] = [values[idx - 1], value]
                previous = branching
            report.write_json(rep.add_artifact("network.json"), {'sweep': var, 'runs': runs})

        rep.summary['budget_exhausted'] = exhausted
        rep.write()
        return EXIT_BUDGET_EXCEEDED if exhausted else EXIT_OK

    # ----------------------------------------
    # integral-geometric representation
    # ----------------------------------------

    def run_ig_decompose(self) -> int:
        """Decompose a symmetric polygon norm; writes decomposition.json and one row per weight."""
        polygon = load_model(PolygonModel, self.input_path).to_domain()
        dec = polygon_decompose(polygon, parallel_tol=self.tolerances['parallel'],
                                recon_tol=self.tolerances['recon'])
        rep = self._report('ig-decompose', ['index', 'weight', 'direction_x', 'direction_y'])
        for i, (w, d) in enumerate(zip(dec.weights, dec.directions)):
            rep.add_row(index=i, weight=float(w), direction_x=float(d[0]), direction_y=float(d[1]))

        residual = float(np.max(np.abs(dec.norm(polygon.vertices) - 1.0)))
        record = {
            'weights': dec.weights,
            'directions': dec.directions,
            'normals': dec.normals,
            'rotation_angle': dec.rotation_angle,
            'inradius': dec.inradius_bound,
            'weight_sum': dec.weight_sum,
            'weight_bound': dec.weight_bound,
            'reconstruction_residual': residual,
            'measure': dec.to_measure(),
        }
        report.write_json(rep.add_artifact("decomposition.json"), record)
        rep.summary.update(weight_sum=dec.weight_sum, weight_bound=dec.weight_bound,
                           reconstruction_residual=residual)
        rep.write()
        return EXIT_OK

    def run_ig_approximate(self, depth: Optional[int] = None) -> int:
        """Rows for depths 2..K of the nested outer approximation, plus measure.json at depth K."""
        gauge = load_model(AnisotropyModel, self.input_path).to_domain()
        depth = depth if depth is not None else config.get("ABOT_DEFAULT_DEPTH")
        depths = list(range(MIN_APPROX_DEPTH, min(depth, MAX_APPROX_DEPTH) + 1)) or [depth]
        rep = self._report('ig-approximate', ['depth', 'vertices', 'delta', 'total_mass', 'mass_bound', 'hausdorff'])

        for k, polygon in zip(depths, approximation_sequence(gauge, depths)):
            dec = polygon_decompose(polygon, parallel_tol=self.tolerances['parallel'],
                                    recon_tol=self.tolerances['recon'])
            measure = dec.to_measure()
            rep.add_row(depth=k, vertices=int(polygon.vertices.shape[0]),
                        delta=reconstruction_error(measure, gauge), total_mass=measure.total_mass,
                        mass_bound=dec.weight_bound, hausdorff=hausdorff_to_body(polygon, gauge))

        final = representing_measure(gauge, depth)
        report.write_json(rep.add_artifact("measure.json"), {
            'atoms': final.to_json(),
            'depth': final.depth,
            'error': final.error,
            'mass_bound': final.mass_bound,
            'total_mass': final.total_mass,
        })
        rep.summary.update(final_delta=final.error, final_total_mass=final.total_mass, atoms=len(final))
        rep.write()
        return EXIT_OK

    def run_hypermetric(self) -> int:
        """Search a violated hypermetric inequality; writes certificate.json either way."""
        request = load_model(HypermetricRequestModel, self.input_path)
        norm = request.norm.to_domain()
        grid = None if request.grid_points is None else np.array(request.grid_points, dtype=float)
        n_grid = grid.shape[0] if grid is not None else 3 ** norm.dim
        budget = HypermetricSearchBudget(request.max_points, request.coeff_bound, n_grid)

        search = dict(max_points=request.max_points, coeff_bound=request.coeff_bound, point_grid=grid,
                      tol=self.tolerances['hypermetric'], threads=self.threads)
        verdict = integral_geometric_status(norm, **search)
        status = verdict.status
        certificate = verdict.certificate
        if status == 'representable':
            # the status check does not search planar or Euclidean norms
            certificate = hypermetric_search(norm, **search)
            if certificate is not None:
                logger.warning(f"Violation value {certificate.value:.3g} for a representable norm: "
                               f"raise the hypermetric tolerance")
        if certificate is not None:
            record = {'status': 'violation', 'certificate': certificate, 'budget': budget}
        else:
            record = {'status': 'none-found-within-budget', 'budget': budget}
        record['norm'] = norm.describe()
        record['integral_geometric_status'] = status

        rep = self._report('hypermetric', ['norm', 'dim', 'max_points', 'coeff_bound', 'grid_points', 'status',
                                           'value', 'integral_geometric_status'])
        rep.add_row(norm=norm.label, dim=norm.dim, max_points=budget.max_points, coeff_bound=budget.coeff_bound,
                    grid_points=budget.grid_points, status=record['status'],
                    value=None if certificate is None else certificate.value,
                    integral_geometric_status=status)
        report.write_json(rep.add_artifact("certificate.json"), record)
        rep.write()
        return EXIT_OK

    # ----------------------------------------
    # experiments
    # ----------------------------------------

    def run_verify_slicing(self, depth: Optional[int] = None) -> int:
        """One row per current: direct and sliced H-mass, their gap and the allowed bound."""
        request = load_model(SlicingRequestModel, self.input_path)
        gauge = request.gauge.to_domain()
        depth = depth if depth is not None else config.get("ABOT_DEFAULT_DEPTH")
        instances = [(c.name or f"current_{i}", c.to_domain()) for i, c in enumerate(request.currents)]
        rows = experiments.verify_slicing(instances, gauge, request.H.to_domain(), depth=depth)

        rep = self._report('verify-slicing', ['instance', 'direct', 'sliced', 'diff', 'bound', 'passed'],
                           csv_name="report.csv")
        for r in rows:
            rep.add_row(instance=r.instance, direct=r.direct, sliced=r.sliced, diff=r.diff, bound=r.bound,
                        passed=r.passed)
        rep.summary.update(instances=len(rows), all_passed=all(r.passed for r in rows))
        rep.write()
        return EXIT_OK

    def run_lsc_experiment(self) -> int:
        """Flat bounds and H-masses along a sequence, then the limit and recovery rows."""
        request = load_model(LscRequestModel, self.input_path)
        H, sigma = request.H.to_domain(), request.sigma.to_domain()
        exp = experiments.lsc_experiment(request.family, request.ks, H, sigma)

        rep = self._report('lsc-experiment', ['k', 'flat_bound', 'h_mass', 'liminf_ok', 'flat_decreasing', 'note'],
                           csv_name="report.csv")
        for r in exp.rows:
            rep.add_row(k=r.k, flat_bound=r.flat_bound, h_mass=r.h_mass)
        rep.add_row(k='limit', h_mass=exp.limit_h_mass, liminf_ok=exp.liminf_ok,
                    flat_decreasing=exp.flat_decreasing)
        rep.add_row(k='recovery', flat_bound=exp.recovery_flat, h_mass=exp.recovery_h_mass, note=exp.note)

        if sigma.dim == 2:
            limit_fn, member_fn, _ = experiments.FAMILIES[request.family]
            report.write_text(rep.add_artifact("limit.svg"), render_current(limit_fn(), H, title="limit"))
            k = max(request.ks)
            report.write_text(rep.add_artifact(f"member_{k}.svg"), render_current(member_fn(k), H, title=f"k={k}"))
        rep.summary.update(family=exp.family, min_h_mass=exp.min_h_mass, limit_h_mass=exp.limit_h_mass,
                           liminf_ok=exp.liminf_ok, flat_decreasing=exp.flat_decreasing)
        rep.write()
        return EXIT_OK

    # ----------------------------------------
    # flat norm
    # ----------------------------------------

    def run_flatnorm(self, against: str, mesh_path: Optional[str] = None) -> int:
        """
        Flat distance between the input and `against`: exact for 0-currents, an upper
        bound over a mesh for planar 1-currents. The mesh comes from --mesh, then from the
        input file, then from a Delaunay triangulation of the edge endpoints.
        """
        first = load_model(FlatnormDocumentModel, self.input_path)
        second = load_model(FlatnormDocumentModel, against)
        if first.is_zero_current != second.is_zero_current:
            raise UnsupportedDimensionError("Both files must hold currents of the same degree")

        rep = self._report('flatnorm', ['input', 'against', 'degree', 'kind', 'distance', 'mesh_edges'])
        row = {'input': os.path.basename(self.input_path), 'against': os.path.basename(against)}
        if first.is_zero_current:
            S = _zero_current(first)
            T = _zero_current(second)
            row.update(degree=0, kind='exact', distance=flat_distance_zero(S, T))
        else:
            P, Q = _one_current(first), _one_current(second)
            diff = canonicalize(P - Q, tol=self.tolerances['geom'])
            if len(diff) == 0:
                row.update(degree=1, kind='exact', distance=0.0, mesh_edges=0)
            else:
                mesh = self._mesh(mesh_path, first, second, diff)
                row.update(degree=1, kind='upper_bound', distance=flat_distance_one_upper(P, Q, mesh),
                           mesh_edges=int(mesh.edges.shape[0]))
        rep.add_row(**row)
        rep.summary['distance'] = row['distance']
        rep.write()
        return EXIT_OK

    @staticmethod
    def _mesh(mesh_path: Optional[str], first: FlatnormDocumentModel, second: FlatnormDocumentModel,
              diff) -> Triangulation:
        if mesh_path:
            return load_model(MeshModel, mesh_path).to_domain()
        for doc in (first, second):
            if doc.mesh is not None:
                return doc.mesh.to_domain()
        points = np.unique(np.concatenate([diff.A, diff.B]), axis=0)
        logger.info(f"No mesh given; triangulating {points.shape[0]} edge endpoints")
        try:
            return Triangulation.from_delaunay(points)
        except (RuntimeError, ValueError) as e:
            # QhullError derives from RuntimeError
            raise NonConformingMeshError(f"Cannot triangulate the edge endpoints; pass --mesh ({e})")


def _zero_current(doc: FlatnormDocumentModel) -> ZeroCurrent:
    return ZeroCurrentModel(atoms=doc.atoms or [], dim=doc.dim).to_domain()


def _one_current(doc: FlatnormDocumentModel) -> PolyhedralOneCurrent:
    return CurrentModel(edges=doc.edges or [], dim=doc.dim).to_domain()

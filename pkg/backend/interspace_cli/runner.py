"""Turns a validated RunConfig into library calls and artifacts on disk."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional

from interspace import haar, paths
from interspace.blocks import (
    BlockSchedule,
    Variant,
    build_schedule,
    dyadic_schedule,
    is_greedy_minimal,
    live_block_count,
    recertify,
)
from interspace.core.config import InterspaceSettings
from interspace.core.report import ExperimentReport
from interspace.core.sampling import ReplicateSampler
from interspace.errors import ConfigError
from interspace.experiments import (
    Body,
    NormSpec,
    Subspace,
    block_variance_profile,
    borel_cantelli_check,
    ciesielski_batch,
    ciesielski_equivalence_check,
    concentration_check,
    estimate_fernique,
    kfunctional_experiment,
    line_concentration_check,
    theta_norm_experiment,
    tightness_experiment,
    verify_key_inequality,
    zn_convergence,
)
from interspace.experiments.base import new_report, timed
from interspace.experiments.kfunctional import default_t_grid
from interspace.experiments.tightness import default_eps_grid
from interspace.haar import CoeffSeq
from interspace.models import BasisModel, SchauderModel, TailParams, make_model, sample_partial_sum
from interspace.norms import block_profile, block_tail_bound, norm_summary, rkhs_norm
from interspace.storage import FileArtifactStore, read_coeffs, read_path, write_coeffs, write_path
from interspace_cli.config import RunConfig

logger = logging.getLogger(__name__)

# Relative slack for inequalities that hold exactly up to roundoff.
ROUNDOFF = 1e-10


@dataclass
class RunResult:
    report: ExperimentReport
    output_dir: Path
    name: str

    @property
    def report_path(self) -> Path:
        return self.output_dir / f"{self.name}.report.json"


class Runner:
    """One subcommand run: builds model, sampler and schedule, then the experiment."""

    def __init__(self, config: RunConfig, settings: InterspaceSettings) -> None:
        self.config = config
        self.settings = settings
        self.name = config.run_name
        self.output_dir = Path(config.output_dir or settings.output_dir)
        self.store = FileArtifactStore(self.output_dir)
        sampling = config.sampling
        self.level = sampling.level
        self.replicates = sampling.replicates
        self.sampler = ReplicateSampler(
            seed=sampling.seed,
            workers=sampling.workers or settings.sampling.workers,
            chunk_size=sampling.chunk_size or settings.sampling.chunk_size,
        )
        self._model: Optional[BasisModel] = None
        self._schedule: Optional[BlockSchedule] = None
        self._handlers: Dict[str, Callable[[object], ExperimentReport]] = {
            "sample": self._sample,
            "blocks": self._blocks,
            "norms": self._norms,
            "verify-key-inequality": self._key_inequality,
            "zn-convergence": self._zn_convergence,
            "borel-cantelli": self._borel_cantelli,
            "fernique": self._fernique,
            "tightness": self._tightness,
            "concentration": self._concentration,
            "line-concentration": self._line_concentration,
            "block-variance": self._block_variance,
            "ciesielski": self._ciesielski,
            "kfunctional": self._kfunctional,
            "theta": self._theta,
        }

    @property
    def model(self) -> BasisModel:
        if self._model is None:
            cfg = self.config.model
            self._model = make_model(cfg.kind, cfg.dimension, cfg.basis_file)
        return self._model

    def schedule(self) -> BlockSchedule:
        """The configured schedule, built once and saved next to the report."""
        if self._schedule is not None:
            return self._schedule
        cfg = self.config.schedule
        if cfg.file is not None:
            try:
                with open(cfg.file, "r", encoding="utf-8") as f:
                    schedule = BlockSchedule.from_dict(json.load(f))
            except (OSError, ValueError, KeyError) as exc:
                raise ConfigError(f"Cannot read schedule file {cfg.file}: {exc}") from exc
            logger.info("schedule_loaded path=%s cuts=%s", cfg.file, schedule.cuts)
        elif cfg.kind == "dyadic":
            schedule = dyadic_schedule(cfg.alpha, cfg.blocks, Variant(cfg.variant), cfg.eta)
        else:
            schedule = build_schedule(
                self.model,
                cfg.alpha,
                Variant(cfg.variant),
                cfg.eta,
                cfg.blocks,
                self.tail_params(),
                self.sampler,
            )
        self.store.save_schedule(schedule, self.name)
        self._schedule = schedule
        return schedule

    def tail_params(self) -> TailParams:
        tail = self.config.tail
        return TailParams(
            replicates=tail.replicates,
            j_max=tail.j_max,
            level=self.level,
            confidence=tail.confidence,
        )

    def run(self) -> RunResult:
        command = self.config.command
        logger.info(
            "run_start command=%s name=%s seed=%s output_dir=%s",
            command,
            self.name,
            self.sampler.seed,
            self.output_dir,
        )
        report = self._handlers[command](self.config.params)
        report.config["run"] = self.config.echo(chunk_size=self.sampler.chunk_size)
        self.store.save_report(report, self.name)
        if report.wall_time_s is not None:
            self.store.save_timing(self.name, report.wall_time_s, workers=self.sampler.workers)
        return RunResult(report=report, output_dir=self.output_dir, name=self.name)

    # ─────────────────────────────────────────────────
    # Inputs
    # ─────────────────────────────────────────────────

    def _read(self, reader: Callable, path: Path):
        try:
            return reader(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"Cannot read input file {path}: {exc}") from exc

    def _schauder_only(self, what: str) -> None:
        if not isinstance(self.model, SchauderModel):
            raise ConfigError(f"{what} needs model.kind = schauder-bm, got {self.model.kind}")

    # ─────────────────────────────────────────────────
    # Subcommands
    # ─────────────────────────────────────────────────

    def _sample(self, params) -> ExperimentReport:
        truncation = params.truncation or self.model.active(2**self.level)
        report = new_report(
            "sample",
            self.sampler,
            1,
            model=self.model.to_dict(),
            level=self.level,
            truncation=truncation,
        )
        with timed(report):
            path, xi = sample_partial_sum(self.model, truncation, self.level, self.sampler.seed)
            write_path(path, self.output_dir / f"{self.name}.path.{params.format}")
            write_coeffs(xi, self.output_dir / f"{self.name}.coeffs.{params.format}")
            report.note("sup_norm", paths.sup_norm(path))
            report.note("h1_seminorm", paths.h1_seminorm(path))
            report.note("rkhs_norm", rkhs_norm(xi))
        return report

    def _blocks(self, params) -> ExperimentReport:
        schedule = self.schedule()
        report = new_report(
            "blocks", self.sampler, self.config.tail.replicates, schedule=schedule.to_dict()
        )
        with timed(report):
            thresholds = schedule.thresholds()
            for k, (thr, cert) in enumerate(zip(thresholds, schedule.certified[1:]), start=1):
                report.check(f"certified_k{k}", cert, thr, n_k=schedule.cuts[k])
            if schedule.certified_before:
                report.flag("greedy_minimal", float(schedule.covered), is_greedy_minimal(schedule))
            report.note(
                "live_blocks",
                float(live_block_count(schedule, self.model)),
                block_count=schedule.block_count,
            )
            if self.config.tail.recertify:
                rebounds = recertify(schedule, self.model, self.tail_params(), self.sampler)
                for k, (thr, bound) in enumerate(zip(thresholds, rebounds), start=1):
                    report.note(
                        f"recertified_k{k}",
                        bound,
                        threshold=thr,
                        below_threshold=bool(bound <= thr),
                    )
            report.tables["cuts"] = [
                {
                    "k": k,
                    "n_k": schedule.cuts[k],
                    "threshold": thresholds[k - 1],
                    "certified": schedule.certified[k] if schedule.certified else None,
                    "certified_before": (
                        schedule.certified_before[k - 1] if schedule.certified_before else None
                    ),
                }
                for k in range(1, schedule.block_count + 1)
            ]
        return report

    def _norms(self, params) -> ExperimentReport:
        schedule = self.schedule()
        level = self.level
        path = None
        if params.path_file is not None:
            self._schauder_only("a path input")
            path = self._read(read_path, params.path_file)
            level = path.level
            xi = haar.analyze(path)
            source = str(params.path_file)
        elif params.coeff_file is not None:
            xi = self._read(read_coeffs, params.coeff_file)
            if isinstance(self.model, SchauderModel):
                level = max(level, haar.required_level(xi.size))
            source = str(params.coeff_file)
        else:
            truncation = schedule.covered
            path, xi = sample_partial_sum(self.model, truncation, level, self.sampler.seed)
            source = f"sample(seed={self.sampler.seed}, N={truncation})"

        report = new_report(
            "norms", self.sampler, 1, source=source, level=level, schedule=schedule.to_dict()
        )
        with timed(report):
            summary = norm_summary(xi, schedule, self.model, level, params.holder_alpha, path)
            for key, value in summary.to_dict().items():
                if key == "holder":
                    report.note("holder", value["value"], alpha=value["alpha"])
                else:
                    report.note(key, value)
            c = summary.embedding_constant
            slack = ROUNDOFF * max(1.0, summary.sum_block)
            report.check("sup_le_c_sup_block", summary.sup, c * summary.sup_block, margin=slack)
            report.check(
                "sup_block_le_sum_block", summary.sup_block, summary.sum_block, margin=slack
            )
            report.check("sup_le_sum_block", summary.sup, summary.sum_block, margin=slack)
            for k0 in range(schedule.block_count):
                tb = block_tail_bound(xi, schedule, k0, self.model, level)
                report.check(f"tail_bound_k{k0}", tb.tail, tb.bound, margin=slack)
            profile = block_profile(xi, schedule, self.model, level)
            weights = schedule.weights()
            report.tables["blocks"] = [
                {
                    "k": k,
                    "start": schedule.cuts[k] + 1,
                    "stop": schedule.cuts[k + 1],
                    "block_sup": float(profile[k]),
                    "weighted": float(weights[k] * profile[k]),
                }
                for k in range(schedule.block_count)
            ]
        return report

    def _key_inequality(self, params) -> ExperimentReport:
        return verify_key_inequality(
            self.model, self.schedule(), self.replicates, self.sampler, self.level
        )

    def _zn_convergence(self, params) -> ExperimentReport:
        return zn_convergence(
            self.model,
            self.schedule(),
            self.replicates,
            self.sampler,
            self.level,
            quantiles=params.quantiles,
        )

    def _borel_cantelli(self, params) -> ExperimentReport:
        return borel_cantelli_check(
            self.model, self.schedule(), params.eps, self.replicates, self.sampler, self.level
        )

    def _block_norm_schedule(self, norm: str) -> Optional[BlockSchedule]:
        if NormSpec(norm) in (NormSpec.SUM_BLOCK, NormSpec.SUP_BLOCK):
            return self.schedule()
        return None

    def _fernique(self, params) -> ExperimentReport:
        return estimate_fernique(
            self.model,
            NormSpec(params.norm),
            params.rho_grid,
            self.replicates,
            self.sampler,
            self.level,
            self._block_norm_schedule(params.norm),
        )

    def _tightness(self, params) -> ExperimentReport:
        eps_grid = params.eps_grid or default_eps_grid(params.radius)
        return tightness_experiment(
            self.model,
            NormSpec(params.norm),
            params.radius,
            eps_grid,
            self.replicates,
            self.sampler,
            self.level,
            self._block_norm_schedule(params.norm),
            params.rho_grid,
            params.fernique_replicates,
        )

    def _concentration(self, params) -> ExperimentReport:
        body_cfg = params.body
        body = Body(
            kind=body_cfg.kind,
            dim=params.dim,
            half_widths=body_cfg.half_widths,
            normals=body_cfg.normals,
            offsets=body_cfg.offsets,
            center=body_cfg.center,
        )
        return concentration_check(
            params.dim,
            Subspace(params.subspace),
            body,
            self.replicates,
            self.sampler,
            params.scales,
        )

    def _line_concentration(self, params) -> ExperimentReport:
        if params.coeff_file is not None:
            x = self._read(read_coeffs, params.coeff_file)
        elif params.direction is not None:
            x = CoeffSeq(params.direction)
        else:
            x = haar.unit_coeffs(1)
        return line_concentration_check(
            self.model, self.schedule(), x, params.a_grid, self.replicates, self.sampler, self.level
        )

    def _block_variance(self, params) -> ExperimentReport:
        return block_variance_profile(
            range(params.k_min, params.k_max + 1), self.replicates, self.sampler, params.lam
        )

    def _ciesielski(self, params) -> ExperimentReport:
        alpha = self.config.schedule.alpha
        if params.path_file is not None:
            path = self._read(read_path, params.path_file)
            return ciesielski_equivalence_check(path, alpha, self.sampler)
        if params.coeff_file is not None:
            xi = self._read(read_coeffs, params.coeff_file)
            return ciesielski_equivalence_check(xi, alpha, self.sampler)
        return ciesielski_batch(alpha, params.depth, params.count, self.sampler)

    def _kfunctional(self, params) -> ExperimentReport:
        path = None
        level = self.level
        if params.path_file is not None:
            path = self._read(read_path, params.path_file)
            level = path.level
        return kfunctional_experiment(
            self.model,
            level,
            params.count,
            self.sampler,
            default_t_grid(params.t_points),
            params.tol,
            path,
        )

    def _theta(self, params) -> ExperimentReport:
        return theta_norm_experiment(
            self.model,
            params.theta,
            params.levels,
            self.replicates,
            self.sampler,
            default_t_grid(params.t_points),
            params.tol,
        )

"""The three batch pipelines: insure, develop and preserve.

Each ``run_*`` takes a validated :class:`~climarisk.config.RunConfig`,
writes its artefacts into ``config.output_dir`` and returns a
:class:`RunSummary`. A summary is written even when a stage fails.
"""
import logging
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .classifier import (
    cross_validate,
    fit_calibration,
    load_model,
    model_to_dict,
    predict_probability,
    roc_csv,
    train_svm,
)
from .clustering import kmeans, label_clusters, reweight_population
from .dataset import (
    IndicatorPanel,
    NormalizedPanel,
    fmt,
    indicator_deviation,
    load_panel,
    net_premium_margin,
    normalize,
    write_deviation,
)
from .elasticity import InsurancePipeline, fit_cdc, sweep
from .errors import ClimariskWarning, InconsistentMatrix
from .mcdm import (
    ahp_weights,
    combine_weights,
    indicator_importance,
    interaction_matrix,
    orm_weights,
    parse_ahp_matrix,
    robustness,
    score,
)
from .report import bar_svg, dumps, line_svg
from .sampling import LabeledDataset, SmoteConfig, balance

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_STAGE = 1
EXIT_CONFIG = 2
EXIT_INCONSISTENT = 3


class StageFailed(Exception):
    def __init__(self, stage, cause, exit_code=EXIT_STAGE):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = exit_code


@dataclass
class RunSummary:
    pipeline: str
    seed: int
    config: dict
    stages: list = field(default_factory=list)
    headline: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    exit_code: int = EXIT_OK

    @property
    def status(self):
        return "ok" if all(s["status"] != "failed" for s in self.stages) else "failed"

    def to_dict(self):
        return {
            "tool": "climarisk",
            "version": __version__,
            "pipeline": self.pipeline,
            "status": self.status,
            "seed": self.seed,
            "stages": self.stages,
            "headline": self.headline,
            "warnings": self.warnings,
            "outputs": self.outputs,
            "config": self.config,
        }


class _Run:
    """Stage bookkeeping plus buffered file output."""

    def __init__(self, cfg, planned):
        self.cfg = cfg
        self.summary = RunSummary(cfg.pipeline, cfg.seed, cfg.echo())
        self.planned = list(planned)
        self.files = {}

    def stage(self, name, fn, exit_code=EXIT_STAGE):
        logger.info("stage %s", name)
        try:
            result = fn()
        except InconsistentMatrix as exc:
            self._fail(name, exc)
            raise StageFailed(name, exc, EXIT_INCONSISTENT) from exc
        except Exception as exc:  # noqa: BLE001 - every stage error is reported
            self._fail(name, exc)
            raise StageFailed(name, exc, exit_code) from exc
        self.summary.stages.append({"name": name, "status": "ok", "error": None})
        return result

    def _fail(self, name, exc):
        logger.error("stage %s failed: %s", name, exc)
        self.summary.stages.append({"name": name, "status": "failed",
                                    "error": f"{type(exc).__name__}: {exc}"})

    def emit(self, name, text):
        self.files[name] = text

    def finish(self, caught):
        done = {s["name"] for s in self.summary.stages}
        for name in self.planned:
            if name not in done:
                self.summary.stages.append({"name": name, "status": "skipped", "error": None})
        seen = []
        for w in caught:
            msg = f"{w.category.__name__}: {w.message}"
            if issubclass(w.category, ClimariskWarning) and msg not in seen:
                seen.append(msg)
        self.summary.warnings.extend(m for m in seen if m not in self.summary.warnings)
        os.makedirs(self.cfg.output_dir, exist_ok=True)
        for name in sorted(self.files):
            with open(os.path.join(self.cfg.output_dir, name), "w", encoding="utf-8",
                      newline="\n") as fh:
                fh.write(self.files[name])
        self.summary.outputs = sorted([*self.files, "summary.json"])
        with open(os.path.join(self.cfg.output_dir, "summary.json"), "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write(dumps(self.summary.to_dict()))
        return self.summary


def _execute(cfg, planned, body):
    run = _Run(cfg, planned)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            body(run)
        except StageFailed as exc:
            run.summary.exit_code = exc.exit_code
    return run.finish(caught)


def _grid(grid):
    if isinstance(grid, list):
        return np.asarray(grid, dtype=float)
    return np.linspace(grid["start"], grid["stop"], grid["num"])


def _csv_table(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# insure


INSURE_STAGES = ["load", "label", "normalize", "balance", "cross_validate", "train",
                 "elasticity", "sweep"]


def _labels(panel, schema):
    if "label_column" in schema:
        y = panel.column(schema["label_column"]).astype(float)
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("label column must contain only +1/-1")
        return y, None
    npm_cfg = schema["npm"]
    if "column" in npm_cfg:
        npm = panel.column(npm_cfg["column"]).astype(float)
    else:
        npm = net_premium_margin(panel.column(npm_cfg["premium"]),
                                 panel.column(npm_cfg["payout"]))
    policy = schema["label_policy"]
    y = np.ones(panel.n)
    if "lowest_npm" in policy:
        count = policy["lowest_npm"]
        if count >= panel.n:
            raise ValueError(f"lowest_npm={count} leaves no positive rows")
        y[np.argsort(npm, kind="stable")[:count]] = -1.0
    else:
        y[npm <= np.quantile(npm, policy["quantile"])] = -1.0
        if np.all(y < 0):
            raise ValueError("quantile labelling left no positive rows")
    return y, np.asarray(npm, dtype=float)


def run_insure(cfg, threads=1):
    s, p = cfg.schema, cfg.params
    state = {}

    def body(run):
        panel = run.stage("load", lambda: load_panel(cfg.inputs["panel"], s["directions"]))

        def label():
            y, npm = _labels(panel, s)
            feats = panel.select(s["features"])
            if s["npm_as_feature"]:
                if npm is None:
                    raise ValueError("npm_as_feature needs schema.npm")
                feats = IndicatorPanel(feats.row_ids, (*feats.names, "npm"),
                                       (*feats.directions, "positive"),
                                       np.column_stack([feats.values, npm]), feats.id_name)
            return y, npm, feats

        y, npm, feats = run.stage("label", label)
        norm = run.stage("normalize", lambda: normalize(feats))

        def do_balance():
            sm = p["smote"]
            config = SmoteConfig(sm["k"], sm["n_synthetic"], cfg.seed, sm["neighbor_pool"])
            return balance(LabeledDataset(norm.values, y), config, threads=threads,
                           return_trace=True)

        data, trace = run.stage("balance", do_balance)
        if trace is not None:
            run.emit("smote_trace.csv", trace.trace_csv())

        cv = run.stage("cross_validate", lambda: cross_validate(
            data, k=p["cv_folds"], C=p["C"], seed=cfg.seed, tol=p["tol"],
            max_iter=p["max_iter"], threads=threads))
        for f, pts in enumerate(cv.roc, start=1):
            if pts is not None:
                run.emit(f"roc_fold{f}.csv", roc_csv(pts))

        def train():
            model = train_svm(data, C=p["C"], tol=p["tol"], max_iter=p["max_iter"])
            return model, fit_calibration(model, data)

        model, calib = run.stage("train", train)
        run.emit("model.json", dumps(model_to_dict(model, calib, {
            "features": list(norm.names),
            "normalization": norm.extremes(),
        })))

        weather = s["weather"]
        responsive = s.get("responsive")
        if responsive is None:
            responsive = [f for f in s["features"] if f != weather]

        def elasticity():
            comps = s.get("weather_components")
            if comps:
                regressor = np.column_stack([panel.column(c) for c in comps])
                names = tuple(comps)
            else:
                regressor = panel.column(weather)[:, None]
                names = (weather,)
            fits, multi = {}, {}
            for target in responsive:
                series = panel.column(target)
                fits[target] = fit_cdc(series, regressor, p["offset"], names, collapse=True)
                if comps:
                    multi[target] = fit_cdc(series, regressor, p["offset"], names)
            return fits, multi

        fits, multi = run.stage("elasticity", elasticity)

        betas = np.zeros(norm.m)
        for j, name in enumerate(norm.names):
            if name == weather:
                betas[j] = 1.0
            elif name in fits:
                betas[j] = fits[name].betas[0]
        baseline = feats.values[-1]
        pipe = InsurancePipeline(model, calib, norm)
        grid = _grid(p["lambda_grid"])
        curve = run.stage("sweep", lambda: sweep(pipe, baseline, betas, grid))
        run.emit("curve.csv", curve.to_csv())
        if p["svg"]:
            run.emit("curve.svg", line_svg(curve.lambdas, curve.probabilities,
                                           "Underwriting probability vs weather change",
                                           "lambda (fractional change)", "probability",
                                           hline=0.5))
        state.update(y=y, npm=npm, data=data, cv=cv, model=model, calib=calib, fits=fits,
                     multi=multi, curve=curve, betas=betas, norm=norm, baseline=baseline,
                     pipe=pipe)

    def headline(run):
        h = run.summary.headline
        if "cv" not in state:
            return
        data, cv = state["data"], state["cv"]
        n_pos, n_neg = data.counts()
        h["samples"] = {"real": int((~data.synthetic).sum()),
                        "synthetic": int(data.synthetic.sum()),
                        "positive": n_pos, "negative": n_neg}
        h["cross_validation"] = {"folds": cv.k, "fold_sizes": cv.fold_sizes,
                                 "accuracies": cv.accuracies,
                                 "mean_accuracy": cv.mean_accuracy, "auc": cv.auc}
        if "curve" in state:
            m, c = state["model"], state["calib"]
            h["model"] = {"w": m.w.tolist(), "b": m.b, "C": m.C, "converged": m.converged,
                          "iterations": m.iterations, "support_vectors": len(m.support_indices)}
            h["calibration"] = {"A": c.A, "B": c.B}
            h["elasticity_mode"] = "collapsed"
            h["elasticities"] = {k: v.to_dict() for k, v in state["fits"].items()}
            if state["multi"]:
                h["elasticities_multivariate"] = {k: v.to_dict()
                                                  for k, v in state["multi"].items()}
            h["scenario_betas"] = dict(zip(state["norm"].names, state["betas"].tolist()))
            h["baseline_probability"] = float(state["pipe"].probability(state["baseline"]))
            h["lambda_star"] = state["curve"].lambda_star

    def wrapped(run):
        try:
            body(run)
        finally:
            headline(run)

    return _execute(cfg, INSURE_STAGES, wrapped)


# --------------------------------------------------------------------------
# develop


DEVELOP_STAGES = ["load", "benchmark", "normalize", "reweight", "cluster", "label",
                  "deviation"]


def _model_scores(path, panel):
    model, calib, doc = load_model(path)
    if calib is None:
        raise ValueError("benchmark model has no calibration")
    ext = doc["normalization"]
    sub = panel.select(ext["names"])
    normer = NormalizedPanel(sub.row_ids, sub.names, tuple(ext["directions"]), sub.values,
                             x_min=np.asarray(ext["x_min"]), x_max=np.asarray(ext["x_max"]))
    x, _ = normer.transform(sub.values, clip=True)
    return np.atleast_1d(predict_probability(model, calib, x))


def run_develop(cfg, threads=1):
    s, p = cfg.schema, cfg.params
    pop = s["population"]

    def body(run):
        h = run.summary.headline
        panel = run.stage("load", lambda: load_panel(cfg.inputs["panel"], s["directions"]))
        feats = panel.select(s["features"])

        def benchmark():
            if "benchmark_column" in s:
                return panel.column(s["benchmark_column"]).astype(float), "column"
            return _model_scores(cfg.inputs["benchmark_model"], panel), "model"

        bench, source = run.stage("benchmark", benchmark)
        norm = run.stage("normalize", lambda: normalize(feats))

        def reweight():
            if p["reweight"] == "before_normalization":
                warnings.warn("reweighting before min-max normalisation cancels out",
                              ClimariskWarning)
                return normalize(reweight_population(feats, p["k_percent"], pop))
            return reweight_population(norm, p["k_percent"], pop)

        weighted = run.stage("reweight", reweight)

        def cluster():
            opts = dict(K=2, seed=cfg.seed, tol=p["tol"], max_iter=p["max_iter"],
                        restarts=p["restarts"])
            return kmeans(weighted.values, **opts), kmeans(norm.values, **opts)

        cl, cl_plain = run.stage("cluster", cluster)
        labels, labels_plain = run.stage("label", lambda: (label_clusters(cl, bench),
                                                           label_clusters(cl_plain, bench)))
        dev = run.stage("deviation", lambda: indicator_deviation(weighted))

        decide = {1: "build", -1: "no_build"}
        ids = panel.row_ids
        run.emit("clusters.csv", _csv_table(
            [panel.id_name, "cluster", "label", "decision", "benchmark"],
            [(i, int(c), int(lab), decide[int(lab)], float(b))
             for i, c, lab, b in zip(ids, cl.assignment, labels, bench)]))
        run.emit("centroids.csv", _csv_table(
            ["cluster", *weighted.names],
            [(c, *map(float, row)) for c, row in enumerate(cl.centroids)]))
        run.emit("deviation.csv", write_deviation(dev, None, weighted.directions,
                                                  panel.id_name))
        groups = {}
        for lab, key in ((1, "build"), (-1, "no_build")):
            mask = labels == lab
            if mask.any():
                groups[key] = dict(zip(dev.names, dev.deviations[mask].mean(axis=0).tolist()))
        if p["svg"] and "build" in groups:
            run.emit("deviation_build.svg", bar_svg(
                list(groups["build"]), list(groups["build"].values()),
                "Mean deviation of build cities", "deviation", hline=0.0,
                ylim=(min(-0.5, min(groups["build"].values())),
                      max(0.5, max(groups["build"].values())))))
        h["benchmark_source"] = source
        h["k_percent"] = p["k_percent"]
        h["reweight"] = p["reweight"]
        h["inertia"] = cl.inertia
        h["decisions"] = {i: decide[int(lab)] for i, lab in zip(ids, labels)}
        h["decisions_unweighted"] = {i: decide[int(lab)] for i, lab in zip(ids, labels_plain)}
        h["changed_by_reweighting"] = [i for i, a, b in zip(ids, labels, labels_plain)
                                       if a != b]
        h["deviation"] = {
            "means": dict(zip(dev.names, dev.means.tolist())),
            "rows": {i: dict(zip(dev.names, row.tolist()))
                     for i, row in zip(ids, dev.deviations)},
            "group_means": groups,
        }

    return _execute(cfg, DEVELOP_STAGES, body)


# --------------------------------------------------------------------------
# preserve


PRESERVE_STAGES = ["load", "normalize", "objective_weights", "ahp", "combine", "score",
                   "robustness"]


def run_preserve(cfg, threads=1, allow_inconsistent=False):
    s, p = cfg.schema, cfg.params
    allow = allow_inconsistent or p["allow_inconsistent"]

    def body(run):
        h = run.summary.headline
        panel = run.stage("load", lambda: load_panel(cfg.inputs["panel"], s["directions"]))
        feats = panel.select(s["features"])
        norm = run.stage("normalize", lambda: normalize(feats))

        def objective():
            im = interaction_matrix(norm)
            imp = indicator_importance(im)
            return imp, orm_weights(imp)

        imp, w = run.stage("objective_weights", objective)

        def ahp():
            mat = parse_ahp_matrix(cfg.inputs["ahp_matrix"])
            if mat.shape[0] != norm.m:
                raise ValueError(f"comparison matrix is {mat.shape[0]}x{mat.shape[0]} "
                                 f"for {norm.m} indicators")
            res = ahp_weights(mat)
            h["ahp"] = {"lambda_max": res.lambda_max, "CI": res.CI, "CR": res.CR,
                        "RI": res.RI, "consistent": res.consistent}
            if not res.consistent:
                if not allow:
                    raise InconsistentMatrix(res.CR)
                warnings.warn(f"comparison matrix inconsistent (CR={res.CR:.4f}); "
                              "continuing as requested", ClimariskWarning)
            return res

        res = run.stage("ahp", ahp)
        z = run.stage("combine", lambda: combine_weights(w, res.weight_vector(),
                                                         p["alpha"]))
        names = norm.names
        run.emit("weights.csv", _csv_table(
            ["indicator", "importance", "orm", "ahp", "combined"],
            [(n, float(si), float(a), float(b), float(c))
             for n, si, a, b, c in zip(names, imp.S, w.weights, res.weights, z.weights)]))
        h["alpha"] = p["alpha"]
        h["weights"] = {n: {"importance": float(si), "orm": float(a), "ahp": float(b),
                            "combined": float(c)}
                        for n, si, a, b, c in zip(names, imp.S, w.weights, res.weights,
                                                  z.weights)}

        rep = run.stage("score", lambda: score(norm, z))
        run.emit("scores.csv", rep.to_csv(panel.id_name))
        h["scores"] = [{"id": i, "score": float(v), "gradient": g, "protect": bool(pr)}
                       for i, v, g, pr in zip(rep.row_ids, rep.scores, rep.gradients,
                                              rep.protect)]
        h["gradient_counts"] = {g: rep.gradients.count(g) for g in ("first", "second",
                                                                    "third")}
        h["protect"] = [i for i, pr in zip(rep.row_ids, rep.protect) if pr]
        if p["svg"]:
            order = rep.ranking()
            run.emit("scores.svg", bar_svg([rep.row_ids[i] for i in order],
                                           rep.scores[order], "Landmark scores", "score",
                                           hline=0.5, ylim=(0.0, 1.0)))
            run.emit("weights.svg", bar_svg(list(names), z.weights, "Combined weights",
                                            "weight", ylim=(0.0, max(0.5, z.weights.max()))))

        rb = p["robustness"]
        if rb is None:
            return
        rob = run.stage("robustness", lambda: robustness(
            norm, res, alpha=p["alpha"], sigma=rb["sigma"], trials=rb["trials"],
            seed=cfg.seed, recompute_weights=rb["recompute_weights"], clamp=rb["clamp"],
            threads=threads))
        run.emit("robustness.json", dumps(rob.to_dict()))
        run.emit("robustness.csv", _csv_table(
            [panel.id_name, "before", "after_mean", "after_std", "flips"],
            [(i, float(b), float(m), float(sd), int(f)) for i, b, m, sd, f in
             zip(rob.row_ids, rob.baseline, rob.mean, rob.std, rob.flips)]))
        h["robustness"] = {"sigma": rob.sigma, "trials": rob.trials,
                           "spearman_mean": rob.spearman_mean,
                           "decision_flips": int(rob.flips.sum())}

    planned = PRESERVE_STAGES if p["robustness"] is not None else PRESERVE_STAGES[:-1]
    return _execute(cfg, planned, body)


RUNNERS = {"insure": run_insure, "develop": run_develop, "preserve": run_preserve}

"""FastAPI application exposing the completion library.

All endpoints are stateless and pure: identical requests produce identical
responses.  Library errors map to HTTP 400 with a machine-readable kind;
mathematically negative outcomes (infeasible, non-completable) are regular
200 responses that clients distinguish by payload.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..core import Pattern
from ..dispatch import complete_with_strategy
from ..errors import HankelCompError
from ..hankel import (
    fully_specified_principal_index_sets,
    hankel,
    is_partial_positive_definite,
    is_partial_positive_semidefinite,
)
from ..measure import extract_measure
from ..oracle import decide_completable, find_witness
from ..patterns import classify
from . import models as m


def create_app() -> FastAPI:
    app = FastAPI(
        title="hankelcomp",
        version=__version__,
        description="Positive (semi)definite completion of partial Hankel "
        "moment sequences.",
    )

    @app.exception_handler(HankelCompError)
    async def _lib_error(request: Request, exc: HankelCompError):
        return JSONResponse(
            status_code=400,
            content={"error": {"kind": exc.kind, "detail": str(exc)}},
        )

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": {"kind": "ValueError", "detail": str(exc)}},
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/check", response_model=m.CheckResponse)
    def check(req: m.CheckRequest):
        s = req.sequence.to_partial_sequence()
        tol = req.tolerances.to_options()
        order = req.order if req.order is not None else math.ceil(s.horizon / 2)
        view = hankel(s, order, cap=max(order, 64))
        sets = fully_specified_principal_index_sets(view)
        return m.CheckResponse(
            partial_positive_definite=is_partial_positive_definite(s, tol, order),
            partial_positive_semidefinite=is_partial_positive_semidefinite(
                s, tol, order
            ),
            order=order,
            maximal_index_sets=[list(r) for r in sets],
        )

    @app.post("/classify-pattern", response_model=m.ClassifyResponse)
    def classify_pattern(req: m.ClassifyRequest):
        verdict = classify(
            Pattern(tuple(req.indices)), req.horizon, req.tolerances.to_options()
        )
        payload = verdict.to_json_dict()
        witness = payload.pop("witness")
        return m.ClassifyResponse(
            witness=None
            if witness is None
            else m.SequenceModel(
                horizon=witness["horizon"],
                entries=[m.EntryModel(**e) for e in witness["entries"]],
            ),
            reduction=m.ReductionModel(**payload.pop("reduction")),
            **payload,
        )

    @app.post("/complete", response_model=m.CertificateModel)
    def complete(req: m.CompleteRequest):
        s = req.sequence.to_partial_sequence()
        cert = complete_with_strategy(
            s,
            req.horizon,
            strategy=req.strategy,
            d=req.d,
            l0=req.l0,
            tol=req.tolerances.to_options(),
        )
        return m.CertificateModel(
            values=list(cert.completed),
            strategy=cert.strategy,
            per_order_min_eig=[(n, e) for n, e in cert.per_order_min_eig],
            margins_used=list(cert.margins_used),
            representation=cert.representation,
            unique_psd=cert.unique_psd,
            epsilon=cert.epsilon,
        )

    @app.post("/measure/extract", response_model=m.MeasureExtractResponse)
    def measure_extract(req: m.MeasureExtractRequest):
        if (req.values is None) == (req.sequence is None):
            raise ValueError("provide exactly one of 'values' or 'sequence'")
        if req.values is not None:
            values = list(req.values)
        else:
            s = req.sequence.to_partial_sequence()
            values = [s.value(k) for k in range(s.horizon + 1)]
        meas = extract_measure(values, req.tolerances.to_options())
        return m.MeasureExtractResponse(
            atoms=[m.AtomModel(location=x, weight=w) for x, w in meas.atoms],
            mass=meas.mass,
        )

    @app.post("/oracle", response_model=m.OracleResponse)
    def oracle(req: m.OracleRequest):
        s = req.sequence.to_partial_sequence()
        res = decide_completable(
            s,
            req.order,
            req.tolerances.to_options(),
            req.mode,
            budget=req.budget,
            seed=req.seed,
        )
        payload = res.to_json_dict()
        return m.OracleResponse(
            feasible=payload["feasible"],
            certified=payload["certified"],
            completion=None
            if payload["completion"] is None
            else [m.EntryModel(**e) for e in payload["completion"]],
            obstruction=None
            if payload["obstruction"] is None
            else m.ObstructionModel(
                variable=payload["obstruction"]["variable"],
                conditions=[
                    m.MinorConditionModel(**c)
                    for c in payload["obstruction"]["conditions"]
                ],
            ),
            search_stats=m.SearchStatsModel(**payload["search_stats"]),
        )

    @app.post("/witness", response_model=m.WitnessResponse)
    def witness(req: m.WitnessRequest):
        w = find_witness(
            Pattern(tuple(req.indices)),
            req.order,
            req.tolerances.to_options(),
            budget=req.budget,
            seed=req.seed,
            mode=req.mode,
        )
        return m.WitnessResponse(
            witness=None if w is None else m.SequenceModel.from_partial_sequence(w)
        )

    return app


app = create_app()

"""HTTP surface for the lab.

This module defines the FastAPI application, registers middleware, exposes
the inexpensive numerical operations as REST endpoints and mounts an MCP
server over the same operation identifiers.  ``create_app`` builds the
application; the module-level ``app`` lets ASGI servers such as Uvicorn
discover it.
"""

from __future__ import annotations

import math
import os

from fastapi import Depends, FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.security import APIKeyHeader
from fastapi_mcp import FastApiMCP
import numpy as np

from .adapters.gap import DEFAULT_N_MAX, DEFAULT_TOL, certify, eigen_pair, eps_s_search
from .adapters.hyperbolic import check_decomposition, check_energy_decay, evolve_decomposed, evolve_hyperbolic
from .adapters.parabolic import audit_all, evolve
from .adapters.robustness import fit_power_law, hyperbolic_config, lift, tail_sum
from .errors import ConfigError, DomainError, LabError, RangeError
from .middleware import RequestLogMiddleware
from .middleware.logging import log_error
from .models.flows import ParabolicConfig
from .models.requests import FitRequest, SimulateRequest
from .models.spectral import SpectralField


def _api_key() -> str | None:
    return os.getenv("CIMLAB_API_KEY")


def _bad_request(exc: Exception) -> HTTPException:
    if isinstance(exc, (DomainError, RangeError, ConfigError)):
        return HTTPException(status_code=400, detail=str(exc))
    log_error("request_failed", error=str(exc))
    return HTTPException(status_code=500, detail=str(exc))


def create_app() -> FastAPI:
    """Factory function for constructing the FastAPI application.

    The returned application includes CORS middleware, request logging and
    optional API key authentication (enabled when ``CIMLAB_API_KEY`` is set)
    on the compute endpoints.
    """
    app = FastAPI(title="cimlab")

    # -----------------------------------------------------------------------
    # Middleware
    # -----------------------------------------------------------------------
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.add_middleware(RequestLogMiddleware)

    # -----------------------------------------------------------------------
    # API key dependency
    # -----------------------------------------------------------------------
    api_key_header = APIKeyHeader(name="x-api-key", auto_error=False)

    def require_api_key(x_api_key: str = Depends(api_key_header)) -> None:
        """Validate the ``x-api-key`` header against ``CIMLAB_API_KEY``."""
        expected = _api_key()
        if expected and x_api_key != expected:
            raise HTTPException(status_code=401, detail="Missing or invalid API key")

    # -----------------------------------------------------------------------
    # Routes
    # -----------------------------------------------------------------------
    @app.get("/api")
    def api_root():
        """Return a simple service descriptor for programmatic clients."""
        return {
            "ok": True,
            "service": "cimlab",
            "docs": "/docs",
            "health": "/health",
            "mcp": "/mcp",
        }

    @app.get("/health")
    def health():
        """Health check endpoint."""
        return {"ok": True}

    @app.get("/api/gap/certify", operation_id="gap_certify", tags=["Gap"], dependencies=[Depends(require_api_key)])
    def rest_certify(
        delta: float = Query(..., description="Cutoff saturation level, > 1"),
        eps: float = Query(..., description="Relaxation parameter in (0, 1]"),
        n_max: int = Query(DEFAULT_N_MAX, ge=1, le=4096),
    ) -> JSONResponse:
        """Certify the spectral gap conditions for a cutoff level and an eps.

        Returns the Lipschitz constant, the parabolic and hyperbolic manifold
        dimensions, the threshold eps_s and every evaluated margin.
        """
        try:
            cert = certify(delta, eps, n_max)
        except LabError as exc:
            raise _bad_request(exc) from exc
        return JSONResponse({"record": cert.model_dump()})

    @app.get("/api/gap/eigenvalues", operation_id="hyperbolic_eigenvalues", tags=["Gap"])
    def rest_eigenvalues(
        eps: float = Query(..., description="Relaxation parameter, > 0"),
        j: int = Query(..., description="Mode index, >= 1"),
    ) -> JSONResponse:
        """Characteristic roots of the j-th hyperbolic mode in the rescaled clock."""
        try:
            pair = eigen_pair(eps, j)
        except LabError as exc:
            raise _bad_request(exc) from exc
        return JSONResponse({"record": pair.model_dump()})

    @app.get("/api/gap/eps-s", operation_id="eps_s_search", tags=["Gap"], dependencies=[Depends(require_api_key)])
    def rest_eps_s(
        delta: float = Query(..., description="Cutoff saturation level, > 1"),
        n_max: int = Query(DEFAULT_N_MAX, ge=1, le=4096),
        tol: float = Query(DEFAULT_TOL, gt=0.0),
    ) -> JSONResponse:
        """Largest certified eps in (0, 1/4], or 0 when none is found."""
        try:
            value = eps_s_search(delta, n_max, tol)
        except LabError as exc:
            raise _bad_request(exc) from exc
        return JSONResponse({"delta": delta, "eps_s": value, "found": value > 0.0})

    @app.get("/api/robustness/tail-sum/{n}", operation_id="tail_sum", tags=["Robustness"])
    def rest_tail_sum(n: int) -> JSONResponse:
        """Sum of n^-2 over all indices above n."""
        try:
            value = tail_sum(n)
        except LabError as exc:
            raise _bad_request(exc) from exc
        return JSONResponse({"n": n, "tail": value, "lower": 1.0 / (n + 1), "upper": 1.0 / n})

    @app.post("/api/robustness/fit", operation_id="fit_power_law", tags=["Robustness"])
    def rest_fit(body: FitRequest) -> JSONResponse:
        """Fit distances against eps as Lambda * eps^phi by log-log least squares."""
        try:
            fit = fit_power_law(body.eps, body.distances)
        except LabError as exc:
            raise _bad_request(exc) from exc
        return JSONResponse({"record": fit.model_dump()})

    @app.post("/api/simulate", operation_id="simulate", tags=["Flows"], dependencies=[Depends(require_api_key)])
    def rest_simulate(body: SimulateRequest) -> JSONResponse:
        """Run one seeded trajectory and return its final norms and audits."""
        rng = np.random.default_rng(body.seed)
        coeffs = np.zeros(body.n_modes)
        k = min(4, body.n_modes)
        raw = rng.standard_normal(k)
        coeffs[:k] = body.amplitude * raw / max(float(np.linalg.norm(raw)), 1e-300)
        u0 = SpectralField(coeffs=coeffs)
        cfg = ParabolicConfig(
            n_modes=body.n_modes,
            f=SpectralField.basis(1, body.n_modes, body.forcing),
            dt=body.dt,
            use_modified_nonlinearity=body.use_modified_nonlinearity,
            delta=body.delta,
        )
        slack = body.slack if body.slack is not None else 1e-6
        try:
            if body.flow == "parabolic":
                record = evolve(u0, body.T, cfg)
                reports = audit_all(record, u0, cfg.f, slack)
                final = {"l2": float(record.l2[-1]), "h1": float(record.h1[-1]), "lyapunov": float(record.lyapunov[-1])}
            else:
                hcfg = hyperbolic_config(cfg, body.eps, auto_halve_dt=True)
                state0 = lift(u0, cfg.f)
                traj = evolve_hyperbolic(state0, body.T, hcfg)
                reports = [
                    check_energy_decay(traj, slack),
                    check_decomposition(evolve_decomposed(state0, body.T, hcfg), traj),
                ]
                final = {"xeps1": float(traj.xeps1[-1]), "xeps2": float(traj.xeps2[-1]), "n3": float(traj.n3[-1])}
        except LabError as exc:
            raise _bad_request(exc) from exc
        final = {k: (v if math.isfinite(v) else None) for k, v in final.items()}
        return JSONResponse(
            {
                "flow": body.flow,
                "T": body.T,
                "final": final,
                "audits": [r.model_dump() for r in reports],
                "passed": all(r.passed for r in reports),
            }
        )

    # -----------------------------------------------------------------------
    # MCP server mount
    # -----------------------------------------------------------------------
    # Include all operation identifiers so they are exposed over the MCP server
    mcp = FastApiMCP(
        app,
        include_operations=[
            "gap_certify",
            "hyperbolic_eigenvalues",
            "eps_s_search",
            "tail_sum",
            "fit_power_law",
            "simulate",
        ],
    )
    mcp.mount()

    return app


# ---------------------------------------------------------------------------
# FastAPI application instance
# ---------------------------------------------------------------------------
app = create_app()

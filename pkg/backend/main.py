from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
import uvicorn
import logging
from datetime import datetime
from contextlib import asynccontextmanager

from app.api.routes import analysis, deformations, examples, manifolds
from app.core.config import settings
from app.core.exceptions import NilgeoException, http_status_for
from app.core.logging_config import setup_logging
from app.core.middleware import RequestLoggingMiddleware, RequestSizeLimitMiddleware

setup_logging()
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info(f"Starting {settings.PROJECT_NAME} API {settings.VERSION}...")
    yield
    logger.info("Shutting down API...")


app = FastAPI(
    title="nilgeo API",
    description="Exact invariant geometry of complex nilmanifolds",
    version=settings.VERSION,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.ALLOWED_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)
app.add_middleware(RequestSizeLimitMiddleware)
app.add_middleware(RequestLoggingMiddleware)


@app.exception_handler(NilgeoException)
async def nilgeo_exception_handler(request: Request, exc: NilgeoException):
    status_code = http_status_for(exc)
    if status_code >= 500:
        logger.error(f"Internal inconsistency on {request.url.path}: {exc.message}")
    return JSONResponse(status_code=status_code, content=exc.to_dict())


@app.get("/health")
async def health_check():
    return {
        "status": "healthy",
        "timestamp": datetime.utcnow().isoformat(),
        "version": settings.VERSION,
    }


app.include_router(manifolds.router, prefix=f"{settings.API_V1_STR}/manifolds", tags=["Manifolds"])
app.include_router(analysis.router, prefix=settings.API_V1_STR, tags=["Analysis"])
app.include_router(deformations.router, prefix=settings.API_V1_STR, tags=["Deformations"])
app.include_router(examples.router, prefix=f"{settings.API_V1_STR}/examples", tags=["Examples"])

if __name__ == "__main__":
    uvicorn.run(
        "main:app",
        host="0.0.0.0",
        port=8000,
        reload=settings.DEBUG,
    )

from fastapi import FastAPI, Request, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
import logging
import time

from core.config import settings
from core.exceptions import SimulatorError
from api.sim_routes import router as sim_router

# Configure logging
logging.basicConfig(level=settings.LOG_LEVEL.upper())
logger = logging.getLogger(__name__)

SERVICE_NAME = "D2D Underlay Power-Control Simulator"

app = FastAPI(
    title=SERVICE_NAME,
    description="DQN and baseline power control for D2D pairs reusing cellular uplink RBs",
    version="1.0.0"
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Request Logging Middleware
@app.middleware("http")
async def log_requests(request: Request, call_next):
    start_time = time.time()
    response = await call_next(request)
    duration = time.time() - start_time
    logger.info(f"Method: {request.method} Path: {request.url.path} Status: {response.status_code} Duration: {duration:.2f}s")
    return response

@app.exception_handler(HTTPException)
async def http_exception_handler(request: Request, exc: HTTPException):
    return JSONResponse(
        status_code=exc.status_code,
        content={"success": False, "message": exc.detail, "error": exc.detail}
    )

@app.exception_handler(SimulatorError)
async def simulator_exception_handler(request: Request, exc: SimulatorError):
    logger.error(f"❌ {type(exc).__name__}: {str(exc)}")
    return JSONResponse(
        status_code=400,
        content={"success": False, "error": str(exc), "message": type(exc).__name__}
    )

@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    logger.error(f"Global Exception: {str(exc)}", exc_info=True)
    return JSONResponse(
        status_code=500,
        content={"success": False, "error": str(exc), "message": "An unexpected error occurred"}
    )

app.include_router(sim_router, prefix="/api/sim", tags=["Simulation"])

logger.info("✅ Routes registered:")
logger.info("   - /api/sim (defaults, evaluate, sweep)")

@app.get("/")
async def root():
    return {
        "message": SERVICE_NAME,
        "version": "1.0.0",
        "endpoints": {
            "defaults": "GET /api/sim/defaults",
            "evaluate": "POST /api/sim/evaluate",
            "sweep": "POST /api/sim/sweep",
            "health": "GET /health"
        }
    }

@app.get("/health")
async def health_check():
    return {
        "status": "ok",
        "service": SERVICE_NAME,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    }

if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=settings.PORT)
